//! Experiment harness: instance generation, paired static/dynamic runs
//! against the traffic oracle, and the CDF, scaling and ablation summaries.

use std::fmt;
use std::time::Instant;

use anyhow::{bail, ensure, Result};
use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vrpdt_core::{
    evaluate, fit_profile, sample_trips, solve, BoundingBox, Clock, CostModel, CostParams, Customer, DynamicCost,
    EvalReport, Evaluator, HorizonStart, Instance, OracleCost, ResidentialMap, SolveOutcome, StaticCost,
    TimeWindow, TrafficOracle, TravelModel,
};

use crate::config::{horizon_start_from, Config};

/// Wall clock for the search's time budget and traces.
#[derive(Debug, Clone, Copy)]
pub struct InstantClock(Instant);

impl InstantClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Clock for InstantClock {
    fn elapsed_ms(&self) -> u64 {
        self.0.elapsed().as_millis() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Dynamic,
    StaticBaseline,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Dynamic => "dynamic",
            Mode::StaticBaseline => "static_baseline",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub n_customers: usize,
    pub region: BoundingBox,
    /// Fixed %TW, or sampled per instance when `None`.
    pub tw_density: Option<f64>,
    /// Fixed window width in seconds, or sampled per instance when `None`.
    pub tw_width: Option<i64>,
    pub horizon_start: NaiveDateTime,
    pub seed: u64,
    pub repetitions: usize,
    /// Days between the horizon starts of consecutive repetitions.
    pub spacing_days: i64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.tw_density.is_some_and(|d| !(0.25..=1.0).contains(&d)) {
            bail!("%TW must lie within [0.25, 1]");
        }
        if self.tw_width.is_some_and(|w| !(1800..=7200).contains(&w)) {
            bail!("window width must lie within [1800, 7200] seconds");
        }
        BoundingBox::new(self.region.min, self.region.max)?;
        Ok(())
    }

    /// The spec of repetition `rep`: same scenario on a later day, its own seed.
    pub fn repetition(&self, rep: usize) -> ScenarioSpec {
        ScenarioSpec {
            seed: self.seed.wrapping_add(rep as u64),
            horizon_start: self.horizon_start + Duration::days(self.spacing_days * rep as i64),
            repetitions: 1,
            ..self.clone()
        }
    }

    pub fn id(&self) -> String {
        format!("n{}-s{}", self.n_customers, self.seed)
    }
}

/// Number of windowed customers for `n` customers at density `tw`.
pub fn windowed_count(n: usize, tw: f64) -> usize {
    ((n as f64 * tw) + 1e-9).floor() as usize
}

/// Customers uniform over the region, depot at its centroid. Drone-eligible
/// customers get a light demand, the rest a heavy one; `floor(n * %TW)` of
/// them, chosen at random, get a window of width `w` placed uniformly in
/// `[0, T_max - w]`. Residential flags come from `residential`.
pub fn generate_instance(spec: &ScenarioSpec, config: &Config, residential: &ResidentialMap) -> Result<Instance> {
    spec.validate()?;
    let s = &config.scenario;
    let f = &config.fleet;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let tw = spec.tw_density.unwrap_or_else(|| rng.gen_range(s.tw_density_range[0]..=s.tw_density_range[1]));
    let width = spec.tw_width.unwrap_or_else(|| rng.gen_range(s.tw_width_range[0]..=s.tw_width_range[1]));
    ensure!(width < f.horizon_s, "window width {width} does not fit the horizon {}", f.horizon_s);

    let mut customers = Vec::with_capacity(spec.n_customers);
    for id in 1..=spec.n_customers {
        let location = spec.region.lerp(rng.gen(), rng.gen());
        let [lo, hi] = if rng.gen_bool(s.drone_eligible_fraction) { s.light_demand } else { s.heavy_demand };
        let demand = rng.gen_range(lo..=hi);
        customers.push(Customer::new(id, location, demand).residential(residential.is_residential(location)));
    }
    let mut order: Vec<usize> = (0..spec.n_customers).collect();
    order.shuffle(&mut rng);
    for &i in &order[..windowed_count(spec.n_customers, tw)] {
        let open = rng.gen_range(0..=f.horizon_s - width);
        customers[i].window = Some(TimeWindow::new(open, open + width)?);
    }

    let depot = spec.region.centroid();
    let inst = Instance {
        customers,
        depot,
        depot_residential: residential.is_residential(depot),
        trucks: f.trucks,
        drones_per_truck: f.drones_per_truck,
        truck_capacity: f.truck_capacity,
        drone_capacity: f.drone_capacity,
        endurance: f.endurance_s,
        horizon: f.horizon_s,
        costs: CostParams::from(config.costs),
        drone_speed: f.drone_speed,
        truck_fallback_speed: f.truck_fallback_speed,
        launch_overhead: f.launch_overhead_s,
        retrieval_overhead: f.retrieval_overhead_s,
    };
    inst.validate()?;
    Ok(inst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scenario: String,
    pub seed: u64,
    pub customers: usize,
    pub mode: Mode,
    pub ra_gate: bool,
    /// Objective breakdown under the run's own cost model.
    pub report: Option<EvalReport>,
    pub c_method: f64,
    pub c_actual: f64,
    pub discrepancy: f64,
    pub wall_ms: u64,
    pub predictor_calls: u64,
    pub evaluations: u64,
    pub error: Option<String>,
}

impl RunResult {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// One solve plus its scoring against the oracle.
#[derive(Debug, Clone)]
pub struct SolvedRun {
    pub outcome: SolveOutcome,
    pub result: RunResult,
}

/// Everything shared by the runs of an experiment: configuration, the
/// traffic oracle and the dynamic mode's travel model.
#[derive(Debug, Clone)]
pub struct Harness {
    config: Config,
    region: BoundingBox,
    start: HorizonStart,
    oracle: TrafficOracle,
    model: TravelModel,
    holidays: Vec<NaiveDate>,
    ra_gate: bool,
}

impl Harness {
    /// Builds the oracle and fits the dynamic mode's speed profile to trips
    /// sampled from it.
    pub fn new(config: Config) -> Result<Self> {
        let mut h = Self::with_model(config, TravelModel::static_haversine(1.0, 1.0))?;
        let mut rng = ChaCha8Rng::seed_from_u64(h.config.fit.seed);
        let samples =
            sample_trips(&h.oracle, h.region, h.config.fit.samples, h.config.fit.max_distance_m, &h.start, &mut rng)?;
        h.model = fit_profile(&samples)?;
        Ok(h)
    }

    /// Uses `model` for the dynamic mode instead of fitting one.
    pub fn with_model(config: Config, model: TravelModel) -> Result<Self> {
        config.validate()?;
        model.validate()?;
        let region = config.region.bounding_box()?;
        let start = config.scenario.horizon_start()?;
        let holidays = config.scenario.holidays()?;
        let oracle = TrafficOracle::new(config.oracle.params(region), config.oracle.seed);
        Ok(Self { config, region, start, oracle, model, holidays, ra_gate: false })
    }

    /// RA gate used by the dynamic mode of comparisons and single solves.
    pub fn with_ra_gate(mut self, on: bool) -> Self {
        self.ra_gate = on;
        self
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn oracle(&self) -> &TrafficOracle {
        &self.oracle
    }

    pub fn model(&self) -> &TravelModel {
        &self.model
    }

    pub fn horizon_start(&self) -> HorizonStart {
        self.start
    }

    /// The configured scenario with `n` customers.
    pub fn spec(&self, n: usize) -> ScenarioSpec {
        let s = &self.config.scenario;
        ScenarioSpec {
            n_customers: n,
            region: self.region,
            tw_density: s.tw_density,
            tw_width: s.tw_width,
            horizon_start: s.start_datetime().expect("validated"),
            seed: s.seed,
            repetitions: s.repetitions,
            spacing_days: s.repetition_spacing_days,
        }
    }

    pub fn generate(&self, spec: &ScenarioSpec) -> Result<Instance> {
        generate_instance(spec, &self.config, self.oracle.residential_map())
    }

    fn start_for(&self, spec: &ScenarioSpec) -> HorizonStart {
        horizon_start_from(spec.horizon_start, &self.holidays)
    }

    /// Solves `inst` in `mode` and scores the result against the oracle.
    pub fn solve_run(&self, inst: &Instance, spec: &ScenarioSpec, mode: Mode, ra_gate: bool) -> Result<SolvedRun> {
        let search = self.config.search.to_search_config(spec.seed)?;
        let start = self.start_for(spec);
        let clock = InstantClock::start();
        let (outcome, calls) = match mode {
            Mode::Dynamic => {
                let eval = Evaluator::new(DynamicCost::new(inst, &self.model, start).with_ra_gate(ra_gate));
                let out = solve(&eval, &search, &clock);
                let calls = eval.cost().predictor_calls();
                (out, calls)
            }
            Mode::StaticBaseline => (solve(&Evaluator::new(StaticCost::new(inst)), &search, &clock), 0),
        };
        let wall_ms = clock.elapsed_ms();
        let c_method = outcome.report.z;
        let c_actual = evaluate(&outcome.plan, &OracleCost::new(inst, &self.oracle, start)).z;
        let mut result = RunResult {
            scenario: spec.id(),
            seed: spec.seed,
            customers: inst.n(),
            mode,
            ra_gate: mode == Mode::Dynamic && ra_gate,
            report: Some(outcome.report),
            c_method,
            c_actual,
            discrepancy: f64::NAN,
            wall_ms,
            predictor_calls: calls,
            evaluations: outcome.trace.evaluations,
            error: None,
        };
        if c_actual > 0.0 {
            result.discrepancy = (c_method - c_actual).abs() / c_actual;
        } else {
            result.error = Some("actual cost is zero".into());
        }
        Ok(SolvedRun { outcome, result })
    }

    fn failed(spec: &ScenarioSpec, mode: Mode, ra_gate: bool, err: anyhow::Error) -> RunResult {
        RunResult {
            scenario: spec.id(),
            seed: spec.seed,
            customers: spec.n_customers,
            mode,
            ra_gate,
            report: None,
            c_method: f64::NAN,
            c_actual: f64::NAN,
            discrepancy: f64::NAN,
            wall_ms: 0,
            predictor_calls: 0,
            evaluations: 0,
            error: Some(format!("{err:#}")),
        }
    }

    fn run_arms(&self, spec: &ScenarioSpec, arms: &[(Mode, bool)]) -> Vec<RunResult> {
        (0..spec.repetitions)
            .into_par_iter()
            .flat_map_iter(|rep| {
                let spec = spec.repetition(rep);
                let inst = self.generate(&spec);
                arms.iter()
                    .map(|&(mode, gate)| match &inst {
                        Ok(inst) => self
                            .solve_run(inst, &spec, mode, gate)
                            .map(|r| r.result)
                            .unwrap_or_else(|e| Self::failed(&spec, mode, gate, e)),
                        Err(e) => Self::failed(&spec, mode, gate, anyhow::anyhow!("{e:#}")),
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// Both modes on each repetition's instance, rows in seed order.
    pub fn run_comparison(&self, spec: &ScenarioSpec) -> Vec<RunResult> {
        self.run_arms(spec, &[(Mode::Dynamic, self.ra_gate), (Mode::StaticBaseline, false)])
    }

    /// Dynamic mode with the RA gate off and on, rows in seed order.
    pub fn run_ablation(&self, spec: &ScenarioSpec) -> Vec<RunResult> {
        self.run_arms(spec, &[(Mode::Dynamic, false), (Mode::Dynamic, true)])
    }

    /// Comparisons over each customer count, sharing the seeds of `spec`.
    pub fn run_scaling(&self, spec: &ScenarioSpec, counts: &[usize]) -> Vec<RunResult> {
        counts
            .iter()
            .flat_map(|&n| self.run_comparison(&ScenarioSpec { n_customers: n, ..spec.clone() }))
            .collect()
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.into_iter().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfRow {
    pub mode: Mode,
    pub ra_gate: bool,
    pub discrepancy: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub mode: Mode,
    pub ra_gate: bool,
    pub runs: usize,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfReport {
    pub rows: Vec<CdfRow>,
    pub summary: Vec<ModeSummary>,
}

fn arms(results: &[RunResult]) -> Vec<(Mode, bool)> {
    let mut out: Vec<(Mode, bool)> = results.iter().map(|r| (r.mode, r.ra_gate)).collect();
    out.sort();
    out.dedup();
    out
}

/// Empirical CDF of the discrepancy per arm, over successful runs.
pub fn cdf_report(results: &[RunResult]) -> Result<CdfReport> {
    let ok: Vec<&RunResult> = results.iter().filter(|r| r.ok()).collect();
    ensure!(!ok.is_empty(), "no successful runs to summarize");
    let mut report = CdfReport { rows: Vec::new(), summary: Vec::new() };
    for (mode, gate) in arms(results) {
        let mut xs: Vec<f64> =
            ok.iter().filter(|r| r.mode == mode && r.ra_gate == gate).map(|r| r.discrepancy).collect();
        if xs.is_empty() {
            continue;
        }
        xs.sort_by(f64::total_cmp);
        let m = xs.len() as f64;
        for (i, &x) in xs.iter().enumerate() {
            let at_or_below = xs[i..].iter().take_while(|&&y| y == x).count() + i;
            report.rows.push(CdfRow { mode, ra_gate: gate, discrepancy: x, cdf: at_or_below as f64 / m });
        }
        report.summary.push(ModeSummary {
            mode,
            ra_gate: gate,
            runs: xs.len(),
            mean: mean(xs.iter().copied()).expect("non-empty"),
            max: *xs.last().expect("non-empty"),
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub mode: Mode,
    pub customers: usize,
    pub runs: usize,
    pub mean_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Growth {
    pub mode: Mode,
    pub from_customers: usize,
    pub to_customers: usize,
    /// `(D_max_n - D_min_n) / D_min_n`, in percent.
    pub growth_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub growth: Vec<Growth>,
}

/// Mean discrepancy per (mode, customer count) and its growth from the
/// smallest to the largest count.
pub fn scaling_report(results: &[RunResult]) -> Result<ScalingReport> {
    let mut counts: Vec<usize> = results.iter().map(|r| r.customers).collect();
    counts.sort_unstable();
    counts.dedup();
    ensure!(counts.len() >= 2, "scaling needs at least two customer counts");
    let mut modes: Vec<Mode> = results.iter().map(|r| r.mode).collect();
    modes.sort();
    modes.dedup();
    let mut report = ScalingReport { rows: Vec::new(), growth: Vec::new() };
    for mode in modes {
        for &n in &counts {
            let xs: Vec<f64> =
                results.iter().filter(|r| r.ok() && r.mode == mode && r.customers == n).map(|r| r.discrepancy).collect();
            ensure!(!xs.is_empty(), "no successful {mode} runs with {n} customers");
            report.rows.push(ScalingRow { mode, customers: n, runs: xs.len(), mean_discrepancy: mean(xs).expect("non-empty") });
        }
        let of = |n: usize| report.rows.iter().find(|r| r.mode == mode && r.customers == n).expect("complete grid").mean_discrepancy;
        let (lo, hi) = (counts[0], counts[counts.len() - 1]);
        report.growth.push(Growth {
            mode,
            from_customers: lo,
            to_customers: hi,
            growth_pct: (of(hi) - of(lo)) / of(lo) * 100.0,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationArm {
    pub ra_gate: bool,
    pub runs: usize,
    pub mean_wall_ms: f64,
    pub predictor_calls: u64,
    pub mean_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub off: AblationArm,
    pub on: AblationArm,
    /// Percent fewer predictor calls with the gate on.
    pub call_reduction_pct: f64,
    /// Percent less wall time with the gate on.
    pub time_saving_pct: f64,
    /// Relative change of mean discrepancy with the gate on, percent.
    pub discrepancy_change_pct: f64,
}

/// Compares the gate-off and gate-on dynamic arms over runs that succeeded
/// in both.
pub fn ablation_report(results: &[RunResult]) -> Result<AblationReport> {
    let dynamic = |gate: bool| -> Vec<&RunResult> {
        results.iter().filter(|r| r.mode == Mode::Dynamic && r.ra_gate == gate).collect()
    };
    let (off_rows, on_rows) = (dynamic(false), dynamic(true));
    let paired: Vec<(&RunResult, &RunResult)> = off_rows
        .iter()
        .filter_map(|a| on_rows.iter().find(|b| b.scenario == a.scenario).map(|b| (*a, *b)))
        .filter(|(a, b)| a.ok() && b.ok())
        .collect();
    ensure!(!paired.is_empty(), "no paired gate-off/gate-on runs");
    let arm = |gate: bool| {
        let rows: Vec<&RunResult> = paired.iter().map(|(a, b)| if gate { *b } else { *a }).collect();
        AblationArm {
            ra_gate: gate,
            runs: rows.len(),
            mean_wall_ms: mean(rows.iter().map(|r| r.wall_ms as f64)).expect("non-empty"),
            predictor_calls: rows.iter().map(|r| r.predictor_calls).sum(),
            mean_discrepancy: mean(rows.iter().map(|r| r.discrepancy)).expect("non-empty"),
        }
    };
    let (off, on) = (arm(false), arm(true));
    let pct = |before: f64, after: f64| if before == 0.0 { 0.0 } else { (before - after) / before * 100.0 };
    Ok(AblationReport {
        call_reduction_pct: pct(off.predictor_calls as f64, on.predictor_calls as f64),
        time_saving_pct: pct(off.mean_wall_ms, on.mean_wall_ms),
        discrepancy_change_pct: -pct(off.mean_discrepancy, on.mean_discrepancy),
        off,
        on,
    })
}
