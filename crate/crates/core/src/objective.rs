//! Schedule propagation and the penalized objective.

use alloc::vec::Vec;
use core::cell::{Cell, RefCell};
use thiserror::Error;

use crate::cost::CostModel;
use crate::encoding::{decode_into, DecodedPlan, Encoding, EncodingError, Route, Sortie};
use crate::instance::{NodeId, Seconds, DEPOT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopTimes {
    pub node: NodeId,
    pub arrival: Seconds,
    pub service_start: Seconds,
    pub departure: Seconds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SortieTimes {
    pub sortie: Sortie,
    pub launch: Seconds,
    /// Drone arrival at its customer.
    pub customer_arrival: Seconds,
    pub service_start: Seconds,
    /// Drone arrival at the rendezvous node.
    pub rendezvous_arrival: Seconds,
    /// Flight seconds launch -> customer.
    pub outbound: Seconds,
    /// Flight seconds customer -> rendezvous.
    pub inbound: Seconds,
}

impl SortieTimes {
    pub fn flight(&self) -> Seconds {
        self.outbound + self.inbound
    }
}

/// One truck arc as priced during propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegRecord {
    pub from: NodeId,
    pub to: NodeId,
    pub depart_at: Seconds,
    pub duration_s: f64,
    pub distance_m: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RouteSchedule {
    pub truck_id: usize,
    pub stops: Vec<StopTimes>,
    pub sorties: Vec<SortieTimes>,
    pub legs: Vec<LegRecord>,
    /// Truck arrival back at the depot.
    pub truck_return: Seconds,
    /// Latest drone rendezvous on this route, if any sortie flew.
    pub drone_return: Option<Seconds>,
}

impl RouteSchedule {
    pub fn completion(&self) -> Seconds {
        self.truck_return.max(self.drone_return.unwrap_or(0))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    pub routes: Vec<RouteSchedule>,
}

/// Objective breakdown. Penalty terms are in currency, already multiplied by `p`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalReport {
    pub z: f64,
    pub endurance_penalty: f64,
    pub truck_load_penalty: f64,
    pub drone_load_penalty: f64,
    pub duration_penalty: f64,
    pub lateness_penalty: f64,
    pub p_z: f64,
    pub feasible: bool,
}

impl EvalReport {
    pub fn penalty_total(&self) -> f64 {
        self.endurance_penalty
            + self.truck_load_penalty
            + self.drone_load_penalty
            + self.duration_penalty
            + self.lateness_penalty
    }
}

fn propagate_route_into<C: CostModel>(route: &Route, cost: &C, out: &mut RouteSchedule) {
    let inst = cost.instance();
    out.truck_id = route.truck_id;
    out.stops.clear();
    out.sorties.clear();
    out.legs.clear();
    out.drone_return = None;
    let mut next_sortie = 0;
    let mut open: Option<SortieTimes> = None;

    let mut launch = |node: NodeId, ready: Seconds, out: &mut RouteSchedule, open: &mut Option<SortieTimes>| {
        match route.sorties.get(next_sortie) {
            Some(s) if s.launch == node => {
                next_sortie += 1;
                let at = ready + inst.launch_overhead;
                let outbound = cost.drone_seconds(node, s.customer);
                let customer_arrival = at + outbound;
                let service_start = inst.window(s.customer).map_or(customer_arrival, |w| customer_arrival.max(w.open));
                let inbound = cost.drone_seconds(s.customer, s.rendezvous);
                let rendezvous_arrival = service_start + inst.service(s.customer) + inbound;
                let times =
                    SortieTimes { sortie: *s, launch: at, customer_arrival, service_start, rendezvous_arrival, outbound, inbound };
                out.sorties.push(times);
                out.drone_return = Some(out.drone_return.unwrap_or(0).max(rendezvous_arrival));
                *open = Some(times);
                at
            }
            _ => ready,
        }
    };

    let mut t = launch(DEPOT, 0, out, &mut open);
    let mut prev = DEPOT;
    for &v in &route.visits {
        let leg = cost.truck_leg(prev, v, t);
        out.legs.push(LegRecord {
            from: prev,
            to: v,
            depart_at: t,
            duration_s: leg.estimate.duration_s,
            distance_m: leg.estimate.distance_m,
            cost: leg.cost,
        });
        let arrival = t + leg.seconds;
        let service_start = inst.window(v).map_or(arrival, |w| arrival.max(w.open));
        let mut departure = service_start + inst.service(v);
        if let Some(s) = open {
            if s.sortie.rendezvous == v {
                departure = departure.max(s.rendezvous_arrival) + inst.retrieval_overhead;
                open = None;
            }
        }
        departure = launch(v, departure, out, &mut open);
        out.stops.push(StopTimes { node: v, arrival, service_start, departure });
        t = departure;
        prev = v;
    }
    if prev != DEPOT {
        let leg = cost.truck_leg(prev, DEPOT, t);
        out.legs.push(LegRecord {
            from: prev,
            to: DEPOT,
            depart_at: t,
            duration_s: leg.estimate.duration_s,
            distance_m: leg.estimate.distance_m,
            cost: leg.cost,
        });
        t += leg.seconds;
    }
    out.truck_return = t;
    debug_assert_eq!(next_sortie, route.sorties.len(), "sortie launch node not on route");
}

/// Forward simulation of every route from time 0 at the depot.
pub fn propagate_schedule<C: CostModel>(plan: &DecodedPlan, cost: &C) -> Schedule {
    let mut out = Schedule::default();
    propagate_schedule_into(plan, cost, &mut out);
    out
}

/// [`propagate_schedule`] into an existing schedule, reusing its allocations.
pub fn propagate_schedule_into<C: CostModel>(plan: &DecodedPlan, cost: &C, out: &mut Schedule) {
    out.routes.resize_with(plan.routes.len(), RouteSchedule::default);
    for (route, rs) in plan.routes.iter().zip(&mut out.routes) {
        propagate_route_into(route, cost, rs);
    }
}

fn route_terms<C: CostModel>(route: &Route, rs: &RouteSchedule, cost: &C, acc: &mut EvalReport) {
    let inst = cost.instance();
    let p = inst.costs.penalty;

    acc.z += rs.legs.iter().map(|l| l.cost).sum::<f64>();
    let mut endurance = 0;
    let mut drone_load = 0;
    let mut late = 0;
    for st in &rs.sorties {
        let s = st.sortie;
        acc.z += cost.drone_cost(s.launch, s.customer) + cost.drone_cost(s.customer, s.rendezvous);
        endurance += (st.flight() - inst.endurance).max(0);
        drone_load += (i64::from(inst.demand(s.customer)) - i64::from(inst.drone_capacity)).max(0);
        if let Some(w) = inst.window(s.customer) {
            late += (st.customer_arrival - w.close).max(0);
        }
    }
    for stop in &rs.stops {
        if let Some(w) = inst.window(stop.node) {
            late += (stop.arrival - w.close).max(0);
        }
    }
    let load: i64 = route.customers().map(|c| i64::from(inst.demand(c))).sum();
    let truck_excess = (load - i64::from(inst.truck_capacity)).max(0);
    let duration_excess = (rs.truck_return - inst.horizon)
        .max(rs.drone_return.map_or(0, |d| d - inst.horizon))
        .max(0);

    acc.endurance_penalty += p * endurance as f64;
    acc.drone_load_penalty += p * drone_load as f64;
    acc.truck_load_penalty += p * truck_excess as f64;
    acc.duration_penalty += p * duration_excess as f64;
    acc.lateness_penalty += p * late as f64;
}

fn report_from<C: CostModel>(plan: &DecodedPlan, schedule: &Schedule, cost: &C) -> EvalReport {
    let mut r = EvalReport::default();
    for (route, rs) in plan.routes.iter().zip(&schedule.routes) {
        route_terms(route, rs, cost, &mut r);
    }
    r.p_z = r.z + r.penalty_total();
    r.feasible = r.penalty_total() == 0.0;
    r
}

/// Propagates the schedule and scores it.
pub fn evaluate<C: CostModel>(plan: &DecodedPlan, cost: &C) -> EvalReport {
    let schedule = propagate_schedule(plan, cost);
    report_from(plan, &schedule, cost)
}

/// Scores plans against one cost model and counts evaluations.
#[derive(Debug)]
pub struct Evaluator<C> {
    cost: C,
    evaluations: Cell<u64>,
    scratch: RefCell<(DecodedPlan, Schedule)>,
}

impl<C: CostModel> Evaluator<C> {
    pub fn new(cost: C) -> Self {
        Self { cost, evaluations: Cell::new(0), scratch: RefCell::default() }
    }

    pub fn cost(&self) -> &C {
        &self.cost
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.get()
    }

    pub fn evaluate(&self, plan: &DecodedPlan) -> EvalReport {
        self.evaluations.set(self.evaluations.get() + 1);
        evaluate(plan, &self.cost)
    }

    pub fn evaluate_with_schedule(&self, plan: &DecodedPlan) -> (Schedule, EvalReport) {
        self.evaluations.set(self.evaluations.get() + 1);
        let schedule = propagate_schedule(plan, &self.cost);
        let report = report_from(plan, &schedule, &self.cost);
        (schedule, report)
    }

    pub fn evaluate_encoding(&self, enc: &Encoding) -> Result<EvalReport, EncodingError> {
        let mut scratch = self.scratch.borrow_mut();
        let (plan, schedule) = &mut *scratch;
        decode_into(enc, self.cost.instance(), plan)?;
        self.evaluations.set(self.evaluations.get() + 1);
        propagate_schedule_into(plan, &self.cost, schedule);
        Ok(report_from(plan, schedule, &self.cost))
    }

    /// `p_z` of an encoding known to be valid.
    pub fn p_z(&self, enc: &Encoding) -> f64 {
        self.evaluate_encoding(enc).expect("encoding was repaired").p_z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DiscrepancyError {
    #[error("actual cost is zero; the plan serves nobody")]
    ZeroActualCost,
}

/// `|C_method - C_actual| / C_actual`, where each side propagates its own
/// schedule so every arc is priced at its own departure time.
pub fn discrepancy<M: CostModel, A: CostModel>(
    plan: &DecodedPlan,
    method: &M,
    actual: &A,
) -> Result<f64, DiscrepancyError> {
    let c_method = evaluate(plan, method).z;
    let c_actual = evaluate(plan, actual).z;
    if c_actual == 0.0 {
        return Err(DiscrepancyError::ZeroActualCost);
    }
    Ok((c_method - c_actual).abs() / c_actual)
}
