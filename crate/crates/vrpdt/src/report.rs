//! CSV outputs of the harness and the search trace.

use std::io::Write;

use anyhow::Result;
use serde::Serialize;
use vrpdt_core::SearchTrace;

use crate::bench::{AblationReport, CdfReport, RunResult, ScalingReport};

#[derive(Serialize)]
struct ResultRow<'a> {
    scenario: &'a str,
    seed: u64,
    customers: usize,
    mode: String,
    ra_gate: u8,
    z: Option<f64>,
    pen_endurance: Option<f64>,
    pen_truck_load: Option<f64>,
    pen_drone_load: Option<f64>,
    pen_duration: Option<f64>,
    pen_lateness: Option<f64>,
    p_z: Option<f64>,
    feasible: Option<u8>,
    c_method: f64,
    c_actual: f64,
    discrepancy: f64,
    wall_ms: u64,
    predictor_calls: u64,
    evaluations: u64,
    error: &'a str,
}

pub fn write_results<W: Write>(out: W, results: &[RunResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        let rep = r.report.as_ref();
        w.serialize(ResultRow {
            scenario: &r.scenario,
            seed: r.seed,
            customers: r.customers,
            mode: r.mode.to_string(),
            ra_gate: r.ra_gate.into(),
            z: rep.map(|e| e.z),
            pen_endurance: rep.map(|e| e.endurance_penalty),
            pen_truck_load: rep.map(|e| e.truck_load_penalty),
            pen_drone_load: rep.map(|e| e.drone_load_penalty),
            pen_duration: rep.map(|e| e.duration_penalty),
            pen_lateness: rep.map(|e| e.lateness_penalty),
            p_z: rep.map(|e| e.p_z),
            feasible: rep.map(|e| e.feasible.into()),
            c_method: r.c_method,
            c_actual: r.c_actual,
            discrepancy: r.discrepancy,
            wall_ms: r.wall_ms,
            predictor_calls: r.predictor_calls,
            evaluations: r.evaluations,
            error: r.error.as_deref().unwrap_or(""),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cdf<W: Write>(out: W, report: &CdfReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mode", "ra_gate", "discrepancy", "cdf"])?;
    for r in &report.rows {
        w.write_record([r.mode.to_string(), u8::from(r.ra_gate).to_string(), r.discrepancy.to_string(), r.cdf.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scaling<W: Write>(out: W, report: &ScalingReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mode", "customers", "runs", "mean_discrepancy", "growth_pct"])?;
    for r in &report.rows {
        let growth = report
            .growth
            .iter()
            .find(|g| g.mode == r.mode && g.to_customers == r.customers)
            .map(|g| g.growth_pct.to_string())
            .unwrap_or_default();
        w.write_record([r.mode.to_string(), r.customers.to_string(), r.runs.to_string(), r.mean_discrepancy.to_string(), growth])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ablation<W: Write>(out: W, report: &AblationReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "ra_gate",
        "runs",
        "mean_wall_ms",
        "predictor_calls",
        "mean_discrepancy",
        "call_reduction_pct",
        "time_saving_pct",
        "discrepancy_change_pct",
    ])?;
    for arm in [&report.off, &report.on] {
        let deltas = if arm.ra_gate {
            [report.call_reduction_pct, report.time_saving_pct, report.discrepancy_change_pct].map(|v| v.to_string())
        } else {
            Default::default()
        };
        let [a, b, c] = deltas;
        w.write_record([
            u8::from(arm.ra_gate).to_string(),
            arm.runs.to_string(),
            arm.mean_wall_ms.to_string(),
            arm.predictor_calls.to_string(),
            arm.mean_discrepancy.to_string(),
            a,
            b,
            c,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(out: W, trace: &SearchTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "move_id", "candidate_pz", "best_pz", "accepted", "evals", "predictor_calls", "elapsed_ms"])?;
    for r in &trace.records {
        w.write_record([
            r.k.to_string(),
            r.move_id.to_string(),
            r.candidate_pz.to_string(),
            r.best_pz.to_string(),
            u8::from(r.accepted).to_string(),
            r.evals.to_string(),
            r.predictor_calls.to_string(),
            r.elapsed_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
