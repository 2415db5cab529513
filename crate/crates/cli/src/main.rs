use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rabimod::dynamics::{fidelity_trace, populations, EffectiveModel, HamiltonianChoice, InitialState};
use rabimod::harness::config::{FluxOverlay, GridOverlay, ParamsOverlay, RunOverlay, SolverOverlay};
use rabimod::harness::{
    self, convergence_report, fig4_grid, fig6_grid, output, ExperimentSpec, Overlay, RunOutput, Scenario, Table,
};
use rabimod::model::{resonant_cr_order, sidebands, BasisLabel, SidebandKind};
use rabimod::opensys::{dressed_basis, flux_sweep, flux_trace};
use rabimod::{Error, C64};

#[derive(Parser, Debug)]
#[command(name = "rabimod", version, about = "Quantum Rabi model under qubit-frequency modulation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Photon-number cutoff.
    #[arg(long, global = true)]
    fock: Option<usize>,
    /// Sideband cutoff of the exact rotating-frame Hamiltonian.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Relative integrator tolerance; the absolute one is set 100 times smaller.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    omega0: Option<f64>,
    #[arg(long, global = true)]
    omegac: Option<f64>,
    #[arg(long, global = true)]
    g: Option<f64>,
    #[arg(long, global = true)]
    xi: Option<f64>,
    #[arg(long, global = true)]
    nu: Option<f64>,
    #[arg(long = "gamma-a", global = true)]
    gamma_a: Option<f64>,
    #[arg(long = "gamma-c", global = true)]
    gamma_c: Option<f64>,
    /// Evolution time in units of 1/omega0.
    #[arg(long = "t-max", global = true)]
    t_max: Option<f64>,
    /// Number of time samples.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long = "nu-min", global = true)]
    nu_min: Option<f64>,
    #[arg(long = "nu-max", global = true)]
    nu_max: Option<f64>,
    #[arg(long = "nu-step", global = true)]
    nu_step: Option<f64>,
    /// Step near predicted resonances (0 disables refinement).
    #[arg(long = "nu-fine", global = true)]
    nu_fine: Option<f64>,
    /// Attach a warning when results move at n_fock + 5.
    #[arg(long = "check-convergence", global = true)]
    check_convergence: bool,
    /// Initial state: g0, e0, any basis label such as e1, or `coherent`.
    #[arg(long, global = true)]
    init: Option<String>,
    /// Coherent amplitude used with `--init coherent`.
    #[arg(long, global = true, default_value_t = 0.1)]
    alpha: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Basis-state populations over time.
    Evolve {
        #[arg(long, value_enum, default_value = "exact")]
        hamiltonian: HChoice,
        /// Comma-separated basis labels.
        #[arg(long, default_value = "g0,e0,g1,e1")]
        labels: String,
    },
    /// Fidelity between exact and effective evolution.
    Fidelity {
        #[arg(long, value_enum, default_value = "enhanced")]
        effective: Effective,
    },
    /// Maximal |e,1> population over a modulation-frequency grid.
    PmaxSweep,
    /// Output photon flux rate over time.
    Flux,
    /// Steady-state output photon flux rate over a modulation-frequency grid.
    FluxSweep,
    /// Jacobi-Anger sideband terms, sorted by detuning.
    Sidebands,
    /// Dressed spectrum of the Rabi Hamiltonian.
    Spectrum,
    /// Reproduce a figure scenario.
    Reproduce { figure: String },
    /// Cutoff convergence report for a figure scenario.
    Converge { figure: String },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum HChoice {
    Exact,
    Enhanced,
    Suppressed,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Effective {
    Enhanced,
    Suppressed,
}

fn parse_init(s: &str, alpha: f64) -> rabimod::Result<InitialState> {
    match s.trim().to_ascii_lowercase().as_str() {
        "ground" | "g0" => Ok(InitialState::Ground),
        "excited" | "e0" => Ok(InitialState::Excited),
        "coherent" => Ok(InitialState::superposition_coherent(C64::new(alpha, 0.0))),
        other => Ok(InitialState::Basis { label: other.parse()? }),
    }
}

impl Global {
    fn overlay(&self) -> rabimod::Result<Overlay> {
        Ok(Overlay {
            scenario: None,
            params: ParamsOverlay {
                omega0: self.omega0,
                omegac: self.omegac,
                g: self.g,
                xi: self.xi,
                nu: self.nu,
                gamma_a: self.gamma_a,
                gamma_c: self.gamma_c,
                n_fock: self.fock,
            },
            solver: SolverOverlay {
                n_max: self.nmax,
                atol: self.tol.map(|t| t * 1e-2),
                rtol: self.tol,
                check_convergence: self.check_convergence.then_some(true),
                rwa_factor: None,
            },
            grid: GridOverlay {
                t_max: self.t_max,
                samples: self.samples,
                nu_min: self.nu_min,
                nu_max: self.nu_max,
                coarse_step: self.nu_step,
                fine_step: self.nu_fine,
                ..GridOverlay::default()
            },
            flux: FluxOverlay::default(),
            run: RunOverlay {
                seed: None,
                jobs: self.jobs,
                init: self.init.as_deref().map(|s| parse_init(s, self.alpha)).transpose()?,
            },
        })
    }

    fn spec(&self, scenario: Option<Scenario>) -> rabimod::Result<ExperimentSpec> {
        let file = self.config.as_deref().map(Overlay::load).transpose()?;
        harness::resolve(scenario, file.as_ref(), &self.overlay()?)
    }
}

fn time_column(spec: &ExperimentSpec, times: &[f64]) -> (String, Vec<f64>) {
    if spec.params.g > 0.0 {
        let f = spec.params.g / (2.0 * std::f64::consts::PI);
        ("t_g_over_2pi".into(), times.iter().map(|t| t * f).collect())
    } else {
        ("t".into(), times.to_vec())
    }
}

fn default_t_max(spec: &ExperimentSpec) -> f64 {
    spec.grid.t_max.unwrap_or_else(|| spec.t_s())
}

fn evolve(spec: &ExperimentSpec, h: HChoice, labels: &str) -> rabimod::Result<RunOutput> {
    let labels = labels.split(',').map(str::parse).collect::<rabimod::Result<Vec<BasisLabel>>>()?;
    let choice = match h {
        HChoice::Exact => HamiltonianChoice::Exact,
        HChoice::Enhanced => HamiltonianChoice::EffectiveEnhanced,
        HChoice::Suppressed => HamiltonianChoice::EffectiveSuppressed,
    };
    let times = spec.grid.times(default_t_max(spec))?;
    let ts = populations(&spec.params, choice, &spec.init, &labels, &times, &spec.solver)?;
    let (tn, tc) = time_column(spec, &times);
    let mut t = Table::new("evolve").with(tn, tc);
    for c in ts.channels {
        t.push(c.name, c.values);
    }
    Ok(RunOutput { tables: vec![t], warnings: ts.warnings })
}

fn fidelity(spec: &ExperimentSpec, e: Effective) -> rabimod::Result<RunOutput> {
    let eff = match e {
        Effective::Enhanced => EffectiveModel::Enhanced,
        Effective::Suppressed => EffectiveModel::Suppressed,
    };
    let times = spec.grid.times(default_t_max(spec))?;
    let ts = fidelity_trace(&spec.params, &spec.init, eff, &times, &spec.solver)?;
    let (tn, tc) = time_column(spec, &times);
    let t = Table::new("fidelity").with(tn, tc).with("F", ts.channel("F").unwrap_or_default().to_vec());
    Ok(RunOutput { tables: vec![t], warnings: ts.warnings })
}

fn pmax(spec: &ExperimentSpec) -> rabimod::Result<RunOutput> {
    let mut s = spec.clone();
    s.scenario = Scenario::Fig4;
    let grid = fig4_grid(&s)?;
    let t_max = match spec.grid.t_max {
        Some(t) => t,
        None => spec.comb_horizon()?,
    };
    let sweep = rabimod::dynamics::pmax_sweep(&spec.params, &grid, t_max, &spec.solver)?;
    let t = Table::new("pmax_sweep")
        .with(sweep.axis_name.clone(), sweep.axis.clone())
        .with("pmax", sweep.column("pmax").unwrap_or_default().to_vec());
    Ok(RunOutput { tables: vec![t], warnings: sweep.flags })
}

fn flux(spec: &ExperimentSpec) -> rabimod::Result<RunOutput> {
    let horizon = spec.grid.t_max.unwrap_or_else(|| spec.flux.horizon(&spec.params));
    let times = spec.grid.times(horizon)?;
    let fs = flux_trace(&spec.params, &times, &spec.solver, &spec.flux)?;
    let tg: Vec<f64> = times.iter().map(|t| t * spec.params.gamma_c).collect();
    let t = Table::new("flux").with("t_gamma_c", tg).with("phi_out", fs.phi_out);
    Ok(RunOutput { tables: vec![t], warnings: fs.warnings })
}

fn flux_sweep_cmd(spec: &ExperimentSpec) -> rabimod::Result<RunOutput> {
    let grid = fig6_grid(spec)?;
    let sweep = flux_sweep(&spec.params, &grid, &spec.solver, &spec.flux)?;
    let mut t = Table::new("flux_sweep").with(sweep.axis_name.clone(), sweep.axis.clone());
    for c in sweep.columns {
        t.push(c.name, c.values);
    }
    Ok(RunOutput { tables: vec![t], warnings: sweep.flags })
}

fn sidebands_cmd(spec: &ExperimentSpec) -> rabimod::Result<RunOutput> {
    let terms = sidebands(&spec.params, spec.solver.n_max)?;
    let t = Table::new("sidebands")
        .with("order", terms.iter().map(|s| s.order as f64).collect())
        .with(
            "counter_rotating",
            terms.iter().map(|s| f64::from(u8::from(s.kind == SidebandKind::CounterRotating))).collect(),
        )
        .with("coupling", terms.iter().map(|s| s.coupling).collect())
        .with("detuning", terms.iter().map(|s| s.detuning).collect());
    let mut warnings = Vec::new();
    match resonant_cr_order(&spec.params) {
        Ok(m0) => eprintln!("resonant counter-rotating order m0 = {m0}"),
        Err(Error::UndefinedOrder) => warnings.push("nu = 0: no resonant counter-rotating order".into()),
        Err(e) => return Err(e),
    }
    Ok(RunOutput { tables: vec![t], warnings })
}

fn spectrum(spec: &ExperimentSpec) -> rabimod::Result<RunOutput> {
    let b = dressed_basis(&spec.params, spec.params.dim())?;
    let t = Table::new("spectrum")
        .with("index", (0..b.dim()).map(|k| k as f64).collect())
        .with("energy", b.energies().to_vec())
        .with("parity", b.parity.iter().map(|&p| f64::from(p)).collect());
    Ok(RunOutput { tables: vec![t], warnings: Vec::new() })
}

fn write(spec: &ExperimentSpec, out: RunOutput, dir: &Path, start: Instant) -> rabimod::Result<()> {
    let summary = harness::write_outputs(spec, &out, dir, start.elapsed().as_secs_f64())?;
    for p in &summary.csv {
        println!("{}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> rabimod::Result<ExitCode> {
    let g = &cli.global;
    let start = Instant::now();
    let dir = g.out.as_path();
    match cli.command {
        Command::Reproduce { figure } => {
            let spec = g.spec(Some(figure.parse()?))?;
            let summary = harness::run(&spec, dir)?;
            for p in &summary.csv {
                println!("{}", p.display());
            }
        }
        Command::Converge { figure } => {
            let spec = g.spec(Some(figure.parse()?))?;
            let report = convergence_report(&spec)?;
            print!("{}", report.summary());
            output::ensure_dir(dir)?;
            let value = serde_json::to_value(&report)?;
            let map = value.as_object().cloned().unwrap_or_default().into_iter().collect();
            output::write_json(&dir.join(format!("{}.convergence.json", spec.scenario)), &map)?;
            if !report.pass {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Evolve { hamiltonian, labels } => {
            let spec = g.spec(Some(Scenario::Custom))?;
            write(&spec, evolve(&spec, hamiltonian, &labels)?, dir, start)?;
        }
        Command::Fidelity { effective } => {
            let spec = g.spec(Some(Scenario::Custom))?;
            write(&spec, fidelity(&spec, effective)?, dir, start)?;
        }
        Command::PmaxSweep => {
            let spec = g.spec(Some(Scenario::Fig4))?;
            write(&spec, pmax(&spec)?, dir, start)?;
        }
        Command::Flux => {
            let spec = g.spec(Some(Scenario::Fig5))?;
            write(&spec, flux(&spec)?, dir, start)?;
        }
        Command::FluxSweep => {
            let spec = g.spec(Some(Scenario::Fig6))?;
            write(&spec, flux_sweep_cmd(&spec)?, dir, start)?;
        }
        Command::Sidebands => {
            let spec = g.spec(Some(Scenario::Custom))?;
            write(&spec, sidebands_cmd(&spec)?, dir, start)?;
        }
        Command::Spectrum => {
            let spec = g.spec(Some(Scenario::Custom))?;
            write(&spec, spectrum(&spec)?, dir, start)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
