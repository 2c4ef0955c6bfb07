use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vrpdt::bench::ScenarioSpec;
use vrpdt::model_file::ModelPayload;
use vrpdt::report::{write_ablation, write_cdf, write_results, write_scaling, write_trace};
use vrpdt::trips::{write_trips, TripRow};
use vrpdt::{
    ablation_report, cdf_report, load_instance, load_model, save_instance, scaling_report, Config, Harness, Mode,
    SolutionFile,
};
use vrpdt_core::sample_trips;

#[derive(Parser)]
#[command(name = "vrpdt", version, about = "Truck-drone routing under time-dependent traffic")]
struct Cli {
    /// TOML file overriding default constants.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate instances.
    Gen(Common),
    /// Solve one instance.
    Solve(SolveArgs),
    /// Static baseline vs dynamic mode over repetitions.
    Compare(Common),
    /// Comparison over the configured customer counts.
    Scale(Common),
    /// Dynamic mode with the residential gate off and on.
    Ablate(Common),
    /// Sample oracle trips into a trainer CSV.
    Trips(TripsArgs),
    /// Check a model payload's conformance batch against the core predictor.
    Conformance {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    customers: Option<usize>,
    /// Fraction of customers with a time window, 0.25..=1.
    #[arg(long)]
    tw_density: Option<f64>,
    /// Window width in seconds, 1800..=7200.
    #[arg(long)]
    tw_width: Option<i64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    oracle_seed: Option<u64>,
    /// Model payload for the dynamic mode; a profile fitted to the oracle otherwise.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_enum)]
    ra_gate: Option<OnOff>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "dynamic")]
    mode: ModeArg,
    /// Write the solution file here instead of `<out>/solutions/`.
    #[arg(long)]
    dump_solution: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TripsArgs {
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long)]
    max_distance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    oracle_seed: Option<u64>,
    #[arg(long, default_value = "trips.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Dynamic,
    Static,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn apply(config: &mut Config, c: &Common) {
    let s = &mut config.scenario;
    if let Some(v) = c.seed {
        s.seed = v;
    }
    if let Some(v) = c.customers {
        s.customers = v;
    }
    if let Some(v) = c.tw_density {
        s.tw_density = Some(v);
    }
    if let Some(v) = c.tw_width {
        s.tw_width = Some(v);
    }
    if let Some(v) = c.reps {
        s.repetitions = v;
    }
    if let Some(v) = c.oracle_seed {
        config.oracle.seed = v;
    }
}

fn harness(config: Config, c: &Common) -> Result<Harness> {
    let h = match &c.model {
        Some(path) => Harness::with_model(config, load_model(path)?)?,
        None => Harness::new(config)?,
    };
    Ok(h.with_ra_gate(matches!(c.ra_gate, Some(OnOff::On))))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn scenario(h: &Harness) -> ScenarioSpec {
    h.spec(h.config().scenario.customers)
}

fn print_summary(results: &[vrpdt::RunResult]) -> Result<()> {
    let cdf = cdf_report(results)?;
    for s in &cdf.summary {
        let gate = if s.ra_gate { " (ra gate)" } else { "" };
        println!("{}{gate}: runs {} mean discrepancy {:.4} max {:.4}", s.mode, s.runs, s.mean, s.max);
    }
    let failed = results.iter().filter(|r| !r.ok()).count();
    if failed > 0 {
        println!("{failed} runs failed; see the error column");
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Gen(c) => {
            apply(&mut config, &c);
            let h = Harness::with_model(config, vrpdt_core::TravelModel::static_haversine(1.0, 1.0))?;
            let spec = scenario(&h);
            let dir = c.out.join("instances");
            fs::create_dir_all(&dir)?;
            for rep in 0..spec.repetitions {
                let spec = spec.repetition(rep);
                let path = dir.join(format!("{}.json", spec.id()));
                save_instance(&h.generate(&spec)?, &path)?;
                println!("{}", path.display());
            }
        }
        Command::Solve(a) => {
            apply(&mut config, &a.common);
            let inst = load_instance(&a.instance)?;
            let h = harness(config, &a.common)?;
            let mut spec = h.spec(inst.n());
            spec.repetitions = 1;
            let mode = match a.mode {
                ModeArg::Dynamic => Mode::Dynamic,
                ModeArg::Static => Mode::StaticBaseline,
            };
            let gate = matches!(a.common.ra_gate, Some(OnOff::On));
            let run = h.solve_run(&inst, &spec, mode, gate)?;
            let stem = a.instance.file_stem().and_then(|s| s.to_str()).unwrap_or("instance").to_owned();
            let solution = a.dump_solution.unwrap_or_else(|| a.common.out.join("solutions").join(format!("{stem}.json")));
            create(&solution)?;
            SolutionFile::new(&run.outcome.best)
                .with_plan(&run.outcome.plan)
                .with_report(&run.outcome.report)
                .save(&solution)?;
            write_trace(create(&a.common.out.join(format!("trace_{stem}.csv")))?, &run.outcome.trace)?;
            write_results(create(&a.common.out.join("results.csv"))?, std::slice::from_ref(&run.result))?;
            let r = &run.result;
            println!(
                "{}: p_z {:.4} z {:.4} actual {:.4} discrepancy {:.4} feasible {}",
                r.mode, run.outcome.report.p_z, r.c_method, r.c_actual, r.discrepancy, run.outcome.report.feasible
            );
            if !run.outcome.unassigned.is_empty() {
                println!("construction could not place customers {:?}", run.outcome.unassigned);
            }
            println!("solution written to {}", solution.display());
        }
        Command::Compare(c) => {
            apply(&mut config, &c);
            let h = harness(config, &c)?;
            let results = h.run_comparison(&scenario(&h));
            write_results(create(&c.out.join("results.csv"))?, &results)?;
            write_cdf(create(&c.out.join("cdf.csv"))?, &cdf_report(&results)?)?;
            print_summary(&results)?;
        }
        Command::Scale(c) => {
            apply(&mut config, &c);
            let counts = config.scaling.customer_counts.clone();
            let h = harness(config, &c)?;
            let results = h.run_scaling(&scenario(&h), &counts);
            write_results(create(&c.out.join("results.csv"))?, &results)?;
            let report = scaling_report(&results)?;
            write_scaling(create(&c.out.join("scaling.csv"))?, &report)?;
            for g in &report.growth {
                println!("{}: growth {:.1}% from n={} to n={}", g.mode, g.growth_pct, g.from_customers, g.to_customers);
            }
        }
        Command::Ablate(c) => {
            apply(&mut config, &c);
            let h = harness(config, &c)?;
            let results = h.run_ablation(&scenario(&h));
            write_results(create(&c.out.join("results.csv"))?, &results)?;
            let report = ablation_report(&results)?;
            write_ablation(create(&c.out.join("ablation.csv"))?, &report)?;
            println!(
                "predictor calls {:+.1}%, wall time {:+.1}%, discrepancy {:+.1}%",
                -report.call_reduction_pct, -report.time_saving_pct, report.discrepancy_change_pct
            );
        }
        Command::Trips(t) => {
            if let Some(v) = t.oracle_seed {
                config.oracle.seed = v;
            }
            let h = Harness::with_model(config, vrpdt_core::TravelModel::static_haversine(1.0, 1.0))?;
            let fit = h.config().fit;
            let mut rng = ChaCha8Rng::seed_from_u64(t.seed.unwrap_or(fit.seed));
            let region = h.config().region.bounding_box()?;
            let start = h.horizon_start();
            let samples = sample_trips(
                h.oracle(),
                region,
                t.count,
                t.max_distance.unwrap_or(fit.max_distance_m),
                &start,
                &mut rng,
            )?;
            let rows: Vec<TripRow> = samples.iter().map(TripRow::from_sample).collect();
            write_trips(create(&t.out)?, &rows)?;
            println!("{} trips written to {}", rows.len(), t.out.display());
        }
        Command::Conformance { model } => {
            let payload = ModelPayload::load(&model)?;
            let report = payload.check_conformance()?;
            println!("{} queries, max relative difference {:e}", report.queries, report.max_relative_diff);
            if report.queries == 0 {
                bail!("payload has no conformance batch");
            }
            if !report.passed() {
                bail!("{} queries outside tolerance, first at row {}", report.failures.len(), report.failures[0]);
            }
            println!("conformant");
        }
    }
    Ok(())
}
