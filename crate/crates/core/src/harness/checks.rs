//! Registered residual suites and their default tolerances.

use super::report::Comparison;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckDef {
    pub name: &'static str,
    pub tolerance: f64,
    pub comparison: Comparison,
    /// Run when a scenario lists no checks.
    pub default: bool,
}

const fn below(name: &'static str, tolerance: f64, default: bool) -> CheckDef {
    CheckDef {
        name,
        tolerance,
        comparison: Comparison::Below,
        default,
    }
}

const fn above(name: &'static str, tolerance: f64) -> CheckDef {
    CheckDef {
        name,
        tolerance,
        comparison: Comparison::Above,
        default: false,
    }
}

pub const SPACE_CHECKS: &[CheckDef] = &[
    below("curvature-model", 1e-6, true),
    below("phi-sectional", 1e-6, true),
    below("xi-flat", 1e-9, true),
    below("bianchi", 1e-6, true),
    below("phi-squared", 1e-9, true),
    below("phi-metric", 1e-9, true),
    below("nabla-phi", 1e-9, true),
    below("nabla-xi", 1e-9, true),
];

pub const CYLINDER_CHECKS: &[CheckDef] = &[
    below("pmc", 1e-6, true),
    below("qzero", 1e-8, true),
    below("dbar-q", 1e-6, true),
    below("dbar-qprime", 1e-6, true),
    below("h-norm", 1e-8, true),
    below("frame", 1e-8, true),
    below("torsion-drift", 1e-6, true),
    below("curvature-recovery", 1e-6, true),
    below("h-bounds", 1e-12, false),
    above("pmc-violated", 1e-2),
    above("dbar-q-violated", 1e-3),
];

pub const SPHERE_CHECKS: &[CheckDef] = &[
    below("closure", 1e-6, true),
    below("pole-smoothness", 1e-6, true),
    below("h-const", 1e-5, true),
    below("pmc", 1e-5, true),
    below("anti-invariance", 1e-8, true),
    below("q-vanish", 1e-5, true),
    below("qprime-vanish", 1e-5, true),
    below("dbar", 1e-5, true),
    below("dbar-qprime", 1e-5, true),
    below("mirror", 1e-6, true),
    below("unit-speed", 1e-10, true),
    below("lemma-suite", 0.0, false),
];

/// Items of `lemma-suite`, reported as `lemma-suite/<item>`.
pub const LEMMA_ITEMS: &[CheckDef] = &[
    below("e1-mu", 1e-5, true),
    below("e1-nu", 1e-5, true),
    below("e2-mu", 1e-4, true),
    below("e2-nu", 1e-4, true),
    below("nabla-e2e2", 1e-4, true),
    below("nabla-e1e1", 1e-3, true),
    below("sigma-diag", 1e-6, true),
    below("eigenvalues", 1e-4, true),
    below("d1", 1e-3, true),
    below("d2", 1e-3, true),
    below("xi-split", 1e-6, true),
    below("a-phi", 1e-5, true),
    below("pseudo-umbilical", 1e-6, true),
];

pub const CUSTOM_CHECKS: &[CheckDef] = &[
    below("weingarten", 1e-8, true),
    below("pmc", 1e-6, false),
    below("qzero", 1e-8, false),
    below("dbar-q", 1e-6, false),
    below("dbar-qprime", 1e-6, false),
    below("anti-invariance", 1e-8, false),
    below("pseudo-umbilical", 1e-8, false),
    below("gauss", 1e-5, false),
];

pub fn registry(kind: &str) -> &'static [CheckDef] {
    match kind {
        "space-checks" => SPACE_CHECKS,
        "cylinder" => CYLINDER_CHECKS,
        "sphere" => SPHERE_CHECKS,
        _ => CUSTOM_CHECKS,
    }
}

pub fn lookup(kind: &str, name: &str) -> Option<CheckDef> {
    if let Some(item) = name.strip_prefix("lemma-suite/") {
        return (kind == "sphere")
            .then(|| LEMMA_ITEMS.iter().find(|c| c.name == item).copied())
            .flatten();
    }
    registry(kind).iter().find(|c| c.name == name).copied()
}
