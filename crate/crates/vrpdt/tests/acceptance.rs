//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vrpdt::{ablation_report, cdf_report, scaling_report, Config, Harness, Mode};
use vrpdt_core::objective::propagate_schedule;
use vrpdt_core::{
    apply_move, construct, decode, encode, findsortie, nearest_neighbor_init, repair, solve, two_opt,
    BoundingBox, Customer, DynamicCost, Encoding, EvalReport, Evaluator, GeoPoint, HorizonStart, Instance, MoveId,
    NoClock, SearchConfig, Sortie, StaticCost, TimeWindow, TravelModel,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_instance(n: usize, trucks: usize, seed: u64, windows: bool) -> Instance {
    let mut r = rng(seed);
    let area = BoundingBox::new(GeoPoint::new(40.70, -74.00), GeoPoint::new(40.78, -73.90)).unwrap();
    let customers = (1..=n)
        .map(|id| {
            let demand = if r.gen_bool(0.7) { r.gen_range(1..=2) } else { r.gen_range(3..=6) };
            let mut c = Customer::new(id, area.lerp(r.gen(), r.gen()), demand);
            if windows && r.gen_bool(0.3) {
                let open = r.gen_range(0..3600);
                c = c.with_window(open, open + 30_000);
            }
            c
        })
        .collect();
    let mut inst = Instance::with_defaults(area.centroid(), customers);
    inst.trucks = trucks;
    inst.drone_capacity = 2;
    inst
}

fn random_encoding(inst: &Instance, r: &mut ChaCha8Rng) -> Encoding {
    let mut ids: Vec<usize> = (1..=inst.n()).collect();
    ids.shuffle(r);
    let mut upper = vec![0];
    for (k, id) in ids.into_iter().enumerate() {
        if k > 0 && upper.iter().filter(|&&v| v == 0).count() < inst.trucks && r.gen_bool(0.25) {
            upper.push(0);
        }
        upper.push(id);
    }
    upper.push(0);
    let lower = upper.iter().map(|&v| v != 0 && r.gen_bool(0.25)).collect();
    repair(&Encoding::new(upper, lower), inst).unwrap()
}

fn golden_encoding() -> Outcome {
    let customers = (1..=19).map(|id| Customer::new(id, GeoPoint::new(40.70 + id as f64 * 1e-3, -73.95), 1)).collect();
    let inst = Instance { trucks: 1, ..Instance::with_defaults(GeoPoint::new(40.70, -73.96), customers) };
    let enc = Encoding::from_flags(vec![0, 3, 6, 14, 7, 12, 19, 9, 0], &[0, 0, 0, 1, 0, 0, 0, 1, 0]);
    let plan = decode(&enc, &inst).unwrap();
    let route = &plan.routes[0];
    let visits_ok = plan.routes.len() == 1 && route.visits == [3, 6, 7, 12, 19];
    let sorties: Vec<(usize, usize, usize)> = route.sorties.iter().map(|s: &Sortie| (s.launch, s.customer, s.rendezvous)).collect();
    let sorties_ok = sorties == [(6, 14, 7), (19, 9, 0)];
    let round_trip = encode(&plan).unwrap() == enc;
    outcome(
        visits_ok && sorties_ok && round_trip,
        format!("truck 0-{:?}-0, sorties {sorties:?}, encode round-trip {round_trip}", route.visits),
    )
}

fn same_money(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn terms(r: &EvalReport) -> [f64; 5] {
    [r.endurance_penalty, r.truck_load_penalty, r.drone_load_penalty, r.duration_penalty, r.lateness_penalty]
}

// The injected report must differ from the base in term `k` alone, by `expected`.
fn only_term_moved(base: &EvalReport, injected: &EvalReport, k: usize, expected: f64) -> bool {
    let (b, i) = (terms(base), terms(injected));
    (0..5).all(|j| if j == k { same_money(i[j] - b[j], expected) } else { i[j] == b[j] })
        && injected.z == base.z
        && same_money(injected.p_z, injected.z + i.iter().sum::<f64>())
}

fn objective_identity() -> Outcome {
    let model = TravelModel::static_haversine(10.0, 1.3);
    let start = HorizonStart::default();
    let mut r = rng(2024);
    let (mut plans, mut injections, mut failures) = (0, 0, Vec::new());
    let mut seed = 0;
    while plans < 200 {
        seed += 1;
        let inst = small_instance(4 + (seed as usize % 9), 1 + seed as usize % 3, seed, true);
        let enc = random_encoding(&inst, &mut r);
        let eval = |i: &Instance| Evaluator::new(DynamicCost::new(i, &model, start)).evaluate_encoding(&enc).unwrap();
        let base = eval(&inst);
        if !base.feasible {
            continue;
        }
        plans += 1;
        if base.p_z != base.z {
            failures.push(format!("seed {seed}: p_z {} != Z {}", base.p_z, base.z));
        }
        let p = inst.costs.penalty;
        let plan = decode(&enc, &inst).unwrap();
        let schedule = propagate_schedule(&plan, &DynamicCost::new(&inst, &model, start));
        let mut check = |name: &str, k: usize, changed: Instance, excess: i64| {
            injections += 1;
            let after = eval(&changed);
            if !only_term_moved(&base, &after, k, p * excess as f64) {
                failures.push(format!("seed {seed} {name}: {after:?}"));
            }
        };

        // Endurance: shrink E to 30 s under the longest flight; every sortie
        // over the new limit contributes its own excess.
        let flights: Vec<i64> = schedule.routes.iter().flat_map(|rs| rs.sorties.iter().map(|s| s.outbound + s.inbound)).collect();
        if let Some(&longest) = flights.iter().max() {
            if longest > 30 {
                let e = longest - 30;
                let excess = flights.iter().map(|f| (f - e).max(0)).sum();
                check("endurance", 0, Instance { endurance: e, ..inst.clone() }, excess);
            }
        }

        // Truck load: capacity 5 below the heaviest route.
        let loads: Vec<i64> =
            plan.routes.iter().map(|rt| rt.customers().map(|c| i64::from(inst.demand(c))).sum()).collect();
        let heaviest = *loads.iter().max().unwrap();
        if heaviest > 5 {
            let q = heaviest - 5;
            let excess = loads.iter().map(|l| (l - q).max(0)).sum();
            check("load", 1, Instance { truck_capacity: q as u32, ..inst.clone() }, excess);
        }

        // Duration: horizon 60 s before the latest completion.
        let completions: Vec<i64> = schedule.routes.iter().map(|rs| rs.completion()).collect();
        let latest = *completions.iter().max().unwrap();
        if latest > 60 {
            let t = latest - 60;
            let excess = completions.iter().map(|c| (c - t).max(0)).sum();
            check("duration", 3, Instance { horizon: t, ..inst.clone() }, excess);
        }

        // Lateness: a truck stop whose window now closes 120 s before arrival.
        let stop = schedule.routes.iter().flat_map(|rs| &rs.stops).find(|s| s.arrival >= 2000 && s.service_start == s.arrival);
        if let Some(stop) = stop {
            let mut late = inst.clone();
            let close = stop.arrival - 120;
            late.customers[stop.node - 1].window = Some(TimeWindow::new(close - 1800, close).unwrap());
            check("lateness", 4, late, 120);
        }
    }
    outcome(
        failures.is_empty() && injections >= 400,
        if failures.is_empty() {
            format!("{plans} feasible plans with p_z = Z, {injections} injections each moved one term by p * excess")
        } else {
            format!("{} failures, first: {}", failures.len(), failures[0])
        },
    )
}

fn brute_force_optimum<C: vrpdt_core::CostModel>(eval: &Evaluator<C>) -> f64 {
    fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            return visit(items);
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, visit);
            items.swap(k, i);
        }
    }
    let inst = eval.cost().instance();
    let n = inst.n();
    let mut best = f64::INFINITY;
    permute(&mut (1..=n).collect::<Vec<_>>(), 0, &mut |perm| {
        let mut upper = vec![0];
        upper.extend_from_slice(perm);
        upper.push(0);
        for mask in 0u32..1 << n {
            let lower = (0..n + 2).map(|k| (1..=n).contains(&k) && mask >> (k - 1) & 1 == 1).collect();
            let enc = Encoding::new(upper.clone(), lower);
            if enc.validate(inst).is_ok() {
                best = best.min(eval.p_z(&enc));
            }
        }
    });
    best
}

fn brute_force_gap() -> Outcome {
    let model = TravelModel::static_haversine(10.0, 1.3);
    let (mut within, mut below, mut worst) = (0, 0, 0.0f64);
    for seed in 0..30u64 {
        let inst = small_instance(5 + seed as usize % 3, 1, 500 + seed, false);
        let eval = Evaluator::new(DynamicCost::new(&inst, &model, HorizonStart::default()));
        let optimum = brute_force_optimum(&eval);
        let found = solve(&eval, &SearchConfig { seed, ..SearchConfig::default() }, &NoClock).report.p_z;
        let gap = found / optimum - 1.0;
        worst = worst.max(gap);
        within += usize::from(gap <= 0.10);
        below += usize::from(found < optimum * (1.0 - 1e-12));
    }
    outcome(
        within >= 27 && below == 0,
        format!("{within}/30 within 10% of the optimum, worst gap {:.2}%, {below} below optimum", worst * 100.0),
    )
}

fn harness() -> Harness {
    Harness::new(Config::default()).expect("default harness")
}

fn discrepancy_reduction(h: &Harness) -> Outcome {
    let spec = vrpdt::ScenarioSpec { n_customers: 50, repetitions: 30, ..h.spec(50) };
    let results = h.run_comparison(&spec);
    let failed = results.iter().filter(|r| !r.ok()).count();
    let cdf = cdf_report(&results).unwrap();
    let of = |m: Mode| cdf.summary.iter().find(|s| s.mode == m && !s.ra_gate).unwrap();
    let (d, s) = (of(Mode::Dynamic), of(Mode::StaticBaseline));
    let reduction = (s.mean - d.mean) / s.mean * 100.0;
    outcome(
        failed == 0 && d.runs >= 30 && s.runs >= 30 && d.mean < s.mean && reduction >= 20.0,
        format!(
            "{} paired runs, mean discrepancy dynamic {:.4} vs static {:.4}, reduction {reduction:.1}% (max {:.4} vs {:.4})",
            d.runs, d.mean, s.mean, d.max, s.max
        ),
    )
}

fn scaling_growth(h: &Harness) -> Outcome {
    let spec = vrpdt::ScenarioSpec { repetitions: 10, ..h.spec(50) };
    let results = h.run_scaling(&spec, &[10, 20, 30, 40, 50]);
    let report = scaling_report(&results).unwrap();
    let of = |m: Mode| report.growth.iter().find(|g| g.mode == m).unwrap().growth_pct;
    let (d, s) = (of(Mode::Dynamic), of(Mode::StaticBaseline));
    outcome(d < s, format!("growth n=10 to n=50: dynamic {d:+.1}%, static {s:+.1}% (10 reps per count)"))
}

fn ra_ablation(h: &Harness) -> Outcome {
    let spec = vrpdt::ScenarioSpec { repetitions: 20, ..h.spec(50) };
    let results = h.run_ablation(&spec);
    let report = ablation_report(&results).unwrap();
    outcome(
        report.on.runs >= 20 && report.call_reduction_pct >= 10.0 && report.discrepancy_change_pct <= 10.0,
        format!(
            "{} paired runs, predictor calls {:+.1}%, mean discrepancy {:.4} -> {:.4} ({:+.1}%), wall time {:+.1}%",
            report.on.runs,
            -report.call_reduction_pct,
            report.off.mean_discrepancy,
            report.on.mean_discrepancy,
            report.discrepancy_change_pct,
            -report.time_saving_pct
        ),
    )
}

fn search_invariants(h: &Harness) -> Outcome {
    let mut problems = Vec::new();
    let spec = h.spec(20);
    for rep in 0..5 {
        let inst = h.generate(&spec.repetition(rep)).unwrap();
        let config = SearchConfig { seed: rep as u64, ..SearchConfig::default() };
        let run = || solve(&Evaluator::new(DynamicCost::new(&inst, h.model(), h.horizon_start())), &config, &NoClock);
        let (a, b) = (run(), run());
        if !a.trace.best_is_monotone() {
            problems.push(format!("rep {rep}: best p_z increased"));
        }
        if a.trace != b.trace || a.best != b.best {
            problems.push(format!("rep {rep}: traces differ between identical runs"));
        }
        let s = solve(&Evaluator::new(StaticCost::new(&inst)), &config, &NoClock);
        if !s.trace.best_is_monotone() {
            problems.push(format!("rep {rep}: static best p_z increased"));
        }
    }
    let mut r = rng(77);
    let mut valid = 0;
    for k in 0..1000u64 {
        let inst = small_instance(1 + k as usize % 20, 1 + k as usize % 3, k, true);
        let enc = random_encoding(&inst, &mut r);
        let out = apply_move(&enc, MoveId::ALL[r.gen_range(0..8)], &mut r, &inst);
        valid += usize::from(out.encoding.validate(&inst).is_ok());
    }
    if valid != 1000 {
        problems.push(format!("{} of 1000 moves produced invalid encodings", 1000 - valid));
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            "10 traced runs monotone, repeated runs bitwise identical, 1000/1000 moves valid".to_owned()
        } else {
            problems.join("; ")
        },
    )
}

fn construction_monotone(h: &Harness) -> Outcome {
    let mut violations = 0;
    let mut strict = 0;
    for seed in 0..100u64 {
        let spec = vrpdt::ScenarioSpec { seed: 1000 + seed, ..h.spec(10 + seed as usize % 31) };
        let inst = h.generate(&spec).unwrap();
        let eval = Evaluator::new(DynamicCost::new(&inst, h.model(), h.horizon_start()));
        let nn = nearest_neighbor_init(eval.cost(), inst.trucks).encoding;
        let opt = two_opt(&nn, &eval);
        let sortie = findsortie(&opt, &eval);
        let (a, b, c) = (eval.p_z(&nn), eval.p_z(&opt), eval.p_z(&sortie));
        violations += usize::from(!(c <= b && b <= a));
        strict += usize::from(c < a);
        if construct(&eval).encoding != sortie {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("100 instances, {violations} violations, {strict} strictly improved"))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn(&Harness) -> Outcome>)> = vec![
        ("golden encoding", Box::new(|_| golden_encoding())),
        ("objective identity", Box::new(|_| objective_identity())),
        ("brute-force gap", Box::new(|_| brute_force_gap())),
        ("search invariants", Box::new(search_invariants)),
        ("construction monotonicity", Box::new(construction_monotone)),
        ("discrepancy reduction", Box::new(discrepancy_reduction)),
        ("scaling growth", Box::new(scaling_growth)),
        ("residential ablation", Box::new(ra_ablation)),
    ];
    let h = harness();
    let mut failed = 0;
    for (name, run) in &criteria {
        let t = Instant::now();
        let o = run(&h);
        failed += usize::from(!o.pass);
        println!("{} {name}: {} [{:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, t.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
