//! Arc costs.
//!
//! A [`CostModel`] answers the three questions the scheduler asks: how long
//! and how expensive is a truck leg departing at a given time, and how long
//! and how expensive is a drone leg. Three implementations share the
//! scheduler: the time-dependent model ([`DynamicCost`]), the static
//! distance-based baseline ([`StaticCost`]) and ground truth ([`OracleCost`]).

use alloc::vec::Vec;

use crate::geo::haversine_unchecked;
use crate::instance::{CostParams, Instance, NodeId, Seconds};
use crate::oracle::TrafficOracle;
use crate::travel::{predict, predict_over, predict_ra_aware_over, HorizonStart, PredictionCounters, TravelEstimate, TravelModel, TravelQuery};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruckLeg {
    pub estimate: TravelEstimate,
    /// Duration used by the schedule.
    pub seconds: Seconds,
    pub cost: f64,
}

impl TruckLeg {
    const ZERO: Self = Self { estimate: TravelEstimate::ZERO, seconds: 0, cost: 0.0 };
}

/// Rounds a travel duration to schedule seconds; any real trip takes at least one.
pub fn to_seconds(duration_s: f64) -> Seconds {
    if duration_s <= 0.0 {
        0
    } else {
        (libm::round(duration_s) as Seconds).max(1)
    }
}

/// `t * c_w + d * c_veh`.
pub fn eq1_cost(estimate: &TravelEstimate, params: &CostParams) -> f64 {
    estimate.duration_s * params.wage_rate + estimate.distance_m * params.vehicle_cost
}

pub trait CostModel {
    fn instance(&self) -> &Instance;

    fn truck_leg(&self, from: NodeId, to: NodeId, depart_at: Seconds) -> TruckLeg;

    fn drone_seconds(&self, from: NodeId, to: NodeId) -> Seconds;

    fn drone_cost(&self, from: NodeId, to: NodeId) -> f64;

    /// Predictor invocations so far; zero for models without a predictor.
    fn predictor_calls(&self) -> u64 {
        0
    }
}

impl<C: CostModel + ?Sized> CostModel for &C {
    fn instance(&self) -> &Instance {
        (**self).instance()
    }
    fn truck_leg(&self, from: NodeId, to: NodeId, depart_at: Seconds) -> TruckLeg {
        (**self).truck_leg(from, to, depart_at)
    }
    fn drone_seconds(&self, from: NodeId, to: NodeId) -> Seconds {
        (**self).drone_seconds(from, to)
    }
    fn drone_cost(&self, from: NodeId, to: NodeId) -> f64 {
        (**self).drone_cost(from, to)
    }
    fn predictor_calls(&self) -> u64 {
        (**self).predictor_calls()
    }
}

/// Great-circle distances between all nodes, depot first.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGeometry {
    size: usize,
    meters: Vec<f64>,
}

impl NodeGeometry {
    pub fn new(inst: &Instance) -> Self {
        let size = inst.n() + 1;
        let mut meters = alloc::vec![0.0; size * size];
        for i in 0..size {
            for j in 0..size {
                if i != j {
                    meters[i * size + j] = haversine_unchecked(inst.location(i), inst.location(j));
                }
            }
        }
        Self { size, meters }
    }

    pub fn haversine(&self, i: NodeId, j: NodeId) -> f64 {
        self.meters[i * self.size + j]
    }
}

fn drone_seconds(inst: &Instance, geo: &NodeGeometry, i: NodeId, j: NodeId) -> Seconds {
    to_seconds(geo.haversine(i, j) / inst.drone_speed)
}

/// Drone analogue of the time-dependent cost on straight-line geometry:
/// `alpha * (t' * c_w + d * c_veh)`.
pub fn drone_leg_cost(inst: &Instance, i: NodeId, j: NodeId) -> f64 {
    let d = haversine_unchecked(inst.location(i), inst.location(j));
    drone_leg_cost_from(&inst.costs, d, d / inst.drone_speed)
}

fn drone_leg_cost_from(params: &CostParams, meters: f64, seconds: f64) -> f64 {
    params.drone_factor * (seconds * params.wage_rate + meters * params.vehicle_cost)
}

/// Static baseline truck cost `(d * MC) * FP * FC` on great-circle distance.
pub fn arc_cost_static(inst: &Instance, i: NodeId, j: NodeId) -> f64 {
    haversine_unchecked(inst.location(i), inst.location(j)) * inst.costs.static_rate()
}

/// Time-dependent truck cost of `i -> j` departing at `depart_at`.
pub fn arc_cost_dynamic(
    inst: &Instance,
    i: NodeId,
    j: NodeId,
    depart_at: Seconds,
    model: &TravelModel,
    start: &HorizonStart,
) -> TruckLeg {
    if i == j {
        return TruckLeg::ZERO;
    }
    let q = TravelQuery::new(inst.location(i), inst.location(j), depart_at, start);
    let estimate = predict(model, &q);
    TruckLeg { estimate, seconds: to_seconds(estimate.duration_s), cost: eq1_cost(&estimate, &inst.costs) }
}

/// Time-dependent costs from a travel model, optionally with the residential
/// bypass.
#[derive(Debug)]
pub struct DynamicCost<'a> {
    inst: &'a Instance,
    geo: NodeGeometry,
    model: &'a TravelModel,
    start: HorizonStart,
    ra_gate: bool,
    counters: PredictionCounters,
}

impl<'a> DynamicCost<'a> {
    pub fn new(inst: &'a Instance, model: &'a TravelModel, start: HorizonStart) -> Self {
        Self { inst, geo: NodeGeometry::new(inst), model, start, ra_gate: false, counters: PredictionCounters::default() }
    }

    pub fn with_ra_gate(mut self, on: bool) -> Self {
        self.ra_gate = on;
        self
    }

    pub fn counters(&self) -> &PredictionCounters {
        &self.counters
    }

    pub fn model(&self) -> &TravelModel {
        self.model
    }
}

impl CostModel for DynamicCost<'_> {
    fn instance(&self) -> &Instance {
        self.inst
    }

    fn truck_leg(&self, from: NodeId, to: NodeId, depart_at: Seconds) -> TruckLeg {
        if from == to {
            return TruckLeg::ZERO;
        }
        let q = TravelQuery::new(self.inst.location(from), self.inst.location(to), depart_at, &self.start);
        let straight = self.geo.haversine(from, to);
        let estimate = if self.ra_gate {
            let both = self.inst.residential(from) && self.inst.residential(to);
            predict_ra_aware_over(self.model, &q, both, &self.counters, straight)
        } else {
            self.counters.record_call();
            predict_over(self.model, &q, straight)
        };
        TruckLeg { estimate, seconds: to_seconds(estimate.duration_s), cost: eq1_cost(&estimate, &self.inst.costs) }
    }

    fn drone_seconds(&self, from: NodeId, to: NodeId) -> Seconds {
        drone_seconds(self.inst, &self.geo, from, to)
    }

    fn drone_cost(&self, from: NodeId, to: NodeId) -> f64 {
        let d = self.geo.haversine(from, to);
        drone_leg_cost_from(&self.inst.costs, d, d / self.inst.drone_speed)
    }

    fn predictor_calls(&self) -> u64 {
        self.counters.predictor_calls()
    }
}

/// Distance-only baseline: great-circle distance, constant fallback speed for
/// the schedule, `(d * MC) * FP * FC` for cost and `alpha` times that for drones.
#[derive(Debug, Clone)]
pub struct StaticCost<'a> {
    inst: &'a Instance,
    geo: NodeGeometry,
}

impl<'a> StaticCost<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        Self { inst, geo: NodeGeometry::new(inst) }
    }
}

impl CostModel for StaticCost<'_> {
    fn instance(&self) -> &Instance {
        self.inst
    }

    fn truck_leg(&self, from: NodeId, to: NodeId, _depart_at: Seconds) -> TruckLeg {
        let d = self.geo.haversine(from, to);
        let duration_s = d / self.inst.truck_fallback_speed;
        TruckLeg {
            estimate: TravelEstimate { duration_s, distance_m: d },
            seconds: to_seconds(duration_s),
            cost: d * self.inst.costs.static_rate(),
        }
    }

    fn drone_seconds(&self, from: NodeId, to: NodeId) -> Seconds {
        drone_seconds(self.inst, &self.geo, from, to)
    }

    fn drone_cost(&self, from: NodeId, to: NodeId) -> f64 {
        self.inst.costs.drone_factor * self.geo.haversine(from, to) * self.inst.costs.static_rate()
    }
}

/// Ground-truth costs: oracle travel priced with the time-dependent cost.
#[derive(Debug, Clone)]
pub struct OracleCost<'a> {
    inst: &'a Instance,
    geo: NodeGeometry,
    oracle: &'a TrafficOracle,
    start: HorizonStart,
}

impl<'a> OracleCost<'a> {
    pub fn new(inst: &'a Instance, oracle: &'a TrafficOracle, start: HorizonStart) -> Self {
        Self { inst, geo: NodeGeometry::new(inst), oracle, start }
    }
}

impl CostModel for OracleCost<'_> {
    fn instance(&self) -> &Instance {
        self.inst
    }

    fn truck_leg(&self, from: NodeId, to: NodeId, depart_at: Seconds) -> TruckLeg {
        if from == to {
            return TruckLeg::ZERO;
        }
        let q = TravelQuery::new(self.inst.location(from), self.inst.location(to), depart_at, &self.start);
        let estimate = self.oracle.travel(&q);
        TruckLeg { estimate, seconds: to_seconds(estimate.duration_s), cost: eq1_cost(&estimate, &self.inst.costs) }
    }

    fn drone_seconds(&self, from: NodeId, to: NodeId) -> Seconds {
        drone_seconds(self.inst, &self.geo, from, to)
    }

    fn drone_cost(&self, from: NodeId, to: NodeId) -> f64 {
        let d = self.geo.haversine(from, to);
        drone_leg_cost_from(&self.inst.costs, d, d / self.inst.drone_speed)
    }
}
