use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pmc_core::curves::{cylinder_over, CylinderOptions};
use pmc_core::harness::{self, KappaSpec, RunOptions, ScanSpec, Scenario, Subject};
use pmc_core::qforms::QGrid;
use pmc_core::grid::Grid;
use pmc_core::rotational::{RotationalSphere, ShootOptions, SphereOptions};
use pmc_core::spaces::{Family, SpaceFormRecord};
use pmc_core::surface::Immersion;

#[derive(Parser, Debug)]
#[command(name = "pmc", version, about = "Verification harness for pmc surfaces in M^n(rho) x R")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Grid resolution per axis.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Seed for random sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the report and CSV artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct SpaceArgs {
    /// CP, CH or C.
    #[arg(long, default_value = "CP")]
    family: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = 4.0)]
    rho: f64,
    #[arg(long)]
    chart_radius: Option<f64>,
}

impl SpaceArgs {
    fn record(&self) -> Result<SpaceFormRecord> {
        let family = match self.family.as_str() {
            "CP" => Family::ComplexProjective,
            "CH" => Family::ComplexHyperbolic,
            "C" => Family::Flat,
            f => bail!("unknown space family `{f}`; expected CP, CH or C"),
        };
        Ok(SpaceFormRecord {
            family,
            n: self.n,
            rho: self.rho,
            chart_radius: self.chart_radius,
        })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Curvature model and structure-tensor checks at seeded random points.
    CheckSpace {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Vertical cylinder over a Frenet curve.
    Cylinder {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        /// Sinusoidal curvature kappa + amplitude*sin(frequency*s).
        #[arg(long, allow_negative_numbers = true)]
        amplitude: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        frequency: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        tau: f64,
        #[arg(long)]
        length: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
    },
    /// Rotational constant mean curvature sphere.
    Sphere {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        collar: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
    },
    /// Parameter scan of a scenario file; the range flags override its scan section.
    Scan {
        config: PathBuf,
        #[arg(long)]
        param: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run a scenario file.
    Run { config: PathBuf },
}

fn load(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Scenario::from_json(&text)?)
}

fn apply_common(mut s: Scenario, c: &Common) -> Scenario {
    if let Some(g) = c.grid {
        s.grid = g;
    }
    if let Some(seed) = c.seed {
        s.seed = seed;
    }
    s
}

fn scenario(space: SpaceFormRecord, subject: Subject, checks: Vec<String>, c: &Common) -> Scenario {
    apply_common(
        Scenario {
            space,
            subject,
            checks,
            grid: 64,
            tolerances: Default::default(),
            seed: 0,
            samples: 100,
            scan: None,
        },
        c,
    )
}

fn emit(c: &Common, name: &str, json: String, csv: String) -> Result<()> {
    let (body, ext) = match c.format {
        Format::Json => (json, "json"),
        Format::Csv => (csv, "csv"),
    };
    match &c.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(format!("{name}.{ext}"));
            fs::write(&path, body)?;
            log::info!("wrote {}", path.display());
        }
        None if body.ends_with('\n') => print!("{body}"),
        None => println!("{body}"),
    }
    Ok(())
}

fn artifact(c: &Common, name: &str, body: String) -> Result<()> {
    if let Some(dir) = &c.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}

/// CSV grids and profiles for the subject, when `--out` is given.
fn artifacts(s: &Scenario, c: &Common) -> Result<()> {
    if c.out.is_none() {
        return Ok(());
    }
    let spec = s.spec()?;
    match &s.subject {
        Subject::Cylinder { kappa, tau, length } => {
            let mut o = CylinderOptions::default();
            if let Some(l) = length {
                o.length = *l;
            }
            if let Ok(cyl) = cylinder_over(&spec, kappa.profile(), *tau, &o) {
                artifact(c, "curve.csv", cyl.curve.to_csv())?;
                if let Ok(q) = QGrid::compute(&spec, &cyl, &Grid::square(cyl.rect(), s.grid)) {
                    artifact(c, "qgrid.csv", q.to_csv()?)?;
                }
            }
        }
        Subject::Sphere { h, .. } => {
            if let Ok(sp) = RotationalSphere::build(&spec, *h, &ShootOptions::default(), &SphereOptions::default()) {
                artifact(c, "profile.csv", sp.shot.profile.to_csv(&spec, *h))?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn run_scenario(s: &Scenario, c: &Common) -> Result<bool> {
    let rep = harness::run(s, &RunOptions { timing: c.timing })?;
    artifacts(s, c)?;
    emit(c, "report", rep.to_json(), rep.to_csv())?;
    Ok(rep.pass)
}

fn real_main(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    match cli.command {
        Command::CheckSpace { space, samples } => {
            let mut s = scenario(space.record()?, Subject::SpaceChecks, vec![], c);
            s.samples = samples;
            run_scenario(&s, c)
        }
        Command::Cylinder {
            space,
            kappa,
            amplitude,
            frequency,
            tau,
            length,
            checks,
        } => {
            let kappa = match amplitude {
                Some(amplitude) => KappaSpec::Sine {
                    mean: kappa,
                    amplitude,
                    frequency,
                },
                None => KappaSpec::Constant(kappa),
            };
            let s = scenario(space.record()?, Subject::Cylinder { kappa, tau, length }, checks, c);
            run_scenario(&s, c)
        }
        Command::Sphere {
            space,
            h,
            collar,
            checks,
        } => {
            let s = scenario(space.record()?, Subject::Sphere { h, collar }, checks, c);
            run_scenario(&s, c)
        }
        Command::Scan {
            config,
            param,
            from,
            to,
            samples,
        } => {
            let mut s = apply_common(load(&config)?, c);
            let base = s.scan.clone();
            let spec = ScanSpec {
                param: param
                    .or_else(|| base.as_ref().map(|b| b.param.clone()))
                    .context("no scan parameter: give --param or a scan section")?,
                from: from.or(base.as_ref().map(|b| b.from)).context("no scan start")?,
                to: to.or(base.as_ref().map(|b| b.to)).context("no scan end")?,
                samples: samples.or(base.as_ref().map(|b| b.samples)).unwrap_or(101),
            };
            s.scan = Some(spec);
            let rep = harness::scan(&s, &RunOptions { timing: c.timing })?;
            emit(c, "scan", rep.to_json(), rep.to_csv())?;
            Ok(rep.rows.iter().all(|r| r.pass))
        }
        Command::Run { config } => {
            let s = apply_common(load(&config)?, c);
            if s.scan.is_some() {
                let rep = harness::scan(&s, &RunOptions { timing: c.timing })?;
                emit(c, "scan", rep.to_json(), rep.to_csv())?;
                return Ok(rep.rows.iter().all(|r| r.pass));
            }
            run_scenario(&s, c)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(n) = std::env::var("PMC_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size the thread pool: {e}");
                }
            }
            _ => log::warn!("ignoring PMC_THREADS={n}: expected a positive integer"),
        }
    }
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
