use alloc::vec::Vec;
use thiserror::Error;

use crate::geo::{GeoError, GeoPoint};

/// Node identifier. `0` is the depot (both route start and terminal), customers are `1..=n`.
pub type NodeId = usize;

/// Integer seconds from the start of the planning horizon.
pub type Seconds = i64;

pub const DEPOT: NodeId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub open: Seconds,
    pub close: Seconds,
}

impl TimeWindow {
    pub fn new(open: Seconds, close: Seconds) -> Result<Self, InstanceError> {
        if open >= close {
            return Err(InstanceError::InvertedWindow { id: 0, open, close });
        }
        Ok(Self { open, close })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Customer {
    pub id: NodeId,
    pub location: GeoPoint,
    pub demand: u32,
    pub window: Option<TimeWindow>,
    pub residential: bool,
    /// Service duration at the customer; zero unless the instance says otherwise.
    pub service_seconds: Seconds,
}

impl Customer {
    pub fn new(id: NodeId, location: GeoPoint, demand: u32) -> Self {
        Self { id, location, demand, window: None, residential: false, service_seconds: 0 }
    }

    pub fn with_window(mut self, open: Seconds, close: Seconds) -> Self {
        self.window = Some(TimeWindow { open, close });
        self
    }

    pub fn residential(mut self, flag: bool) -> Self {
        self.residential = flag;
        self
    }
}

/// Cost constants for the time-dependent arc cost, the static baseline cost,
/// the drone discount and the penalty multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    /// Wage rate, currency per second.
    pub wage_rate: f64,
    /// Vehicle operating cost, currency per meter.
    pub vehicle_cost: f64,
    /// Drone cost relative to a truck over the same arc.
    pub drone_factor: f64,
    /// Meters to miles.
    pub miles_converter: f64,
    /// Fuel price, currency per gallon.
    pub fuel_price: f64,
    /// Fuel consumption, gallons per mile.
    pub fuel_consumption: f64,
    /// Penalty per unit of violation (second or parcel).
    pub penalty: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            wage_rate: 0.005,
            vehicle_cost: 0.0006,
            drone_factor: 0.1,
            miles_converter: 0.000_621_371,
            fuel_price: 3.5,
            fuel_consumption: 0.5,
            penalty: 1000.0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<(), InstanceError> {
        let named = [
            ("c_w", self.wage_rate),
            ("c_veh", self.vehicle_cost),
            ("alpha", self.drone_factor),
            ("MC", self.miles_converter),
            ("FP", self.fuel_price),
            ("FC", self.fuel_consumption),
            ("p", self.penalty),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(InstanceError::NonPositiveConstant(name));
            }
        }
        if self.drone_factor >= 1.0 {
            return Err(InstanceError::DroneNotCheaper(self.drone_factor));
        }
        Ok(())
    }

    /// Static per-meter truck cost `MC * FP * FC`.
    pub fn static_rate(&self) -> f64 {
        self.miles_converter * self.fuel_price * self.fuel_consumption
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub customers: Vec<Customer>,
    pub depot: GeoPoint,
    pub depot_residential: bool,
    pub trucks: usize,
    pub drones_per_truck: usize,
    pub truck_capacity: u32,
    pub drone_capacity: u32,
    /// Maximum flight time of one sortie.
    pub endurance: Seconds,
    /// `T_max`, latest acceptable completion time of any vehicle.
    pub horizon: Seconds,
    pub costs: CostParams,
    /// Drone cruise speed, m/s.
    pub drone_speed: f64,
    /// Truck speed used when no traffic model is available, m/s.
    pub truck_fallback_speed: f64,
    pub launch_overhead: Seconds,
    pub retrieval_overhead: Seconds,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("customer ids must be 1..=n in order; position {position} holds id {id}")]
    BadCustomerId { position: usize, id: NodeId },
    #[error("customer {id}: demand must be positive")]
    ZeroDemand { id: NodeId },
    #[error("customer {id}: window open {open} must be before close {close}")]
    InvertedWindow { id: NodeId, open: Seconds, close: Seconds },
    #[error("customer {id}: window [{open}, {close}] lies outside [0, T_max = {horizon}]")]
    WindowOutsideHorizon { id: NodeId, open: Seconds, close: Seconds, horizon: Seconds },
    #[error("customer {id}: negative service duration")]
    NegativeService { id: NodeId },
    #[error("fleet: {0}")]
    Fleet(&'static str),
    #[error("cost constant {0} must be strictly positive")]
    NonPositiveConstant(&'static str),
    #[error("drone factor alpha = {0} must be below 1")]
    DroneNotCheaper(f64),
    #[error("{context}: {source}")]
    Coordinate { context: &'static str, source: GeoError },
}

impl Instance {
    pub fn n(&self) -> usize {
        self.customers.len()
    }

    pub fn customer(&self, id: NodeId) -> &Customer {
        &self.customers[id - 1]
    }

    pub fn location(&self, id: NodeId) -> GeoPoint {
        if id == DEPOT {
            self.depot
        } else {
            self.customers[id - 1].location
        }
    }

    pub fn demand(&self, id: NodeId) -> u32 {
        if id == DEPOT {
            0
        } else {
            self.customers[id - 1].demand
        }
    }

    pub fn window(&self, id: NodeId) -> Option<TimeWindow> {
        if id == DEPOT {
            None
        } else {
            self.customers[id - 1].window
        }
    }

    pub fn service(&self, id: NodeId) -> Seconds {
        if id == DEPOT {
            0
        } else {
            self.customers[id - 1].service_seconds
        }
    }

    pub fn residential(&self, id: NodeId) -> bool {
        if id == DEPOT {
            self.depot_residential
        } else {
            self.customers[id - 1].residential
        }
    }

    /// Customer may be served by a drone (`q_j <= Qd`).
    pub fn drone_eligible(&self, id: NodeId) -> bool {
        id != DEPOT && self.drones_per_truck > 0 && self.demand(id) <= self.drone_capacity
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.trucks == 0 {
            return Err(InstanceError::Fleet("at least one truck is required"));
        }
        if self.truck_capacity == 0 || self.drone_capacity == 0 {
            return Err(InstanceError::Fleet("capacities Qt and Qd must be positive"));
        }
        if self.drone_capacity > self.truck_capacity {
            return Err(InstanceError::Fleet("drone capacity Qd must not exceed Qt"));
        }
        if self.endurance <= 0 {
            return Err(InstanceError::Fleet("endurance E must be positive"));
        }
        if self.horizon <= 0 {
            return Err(InstanceError::Fleet("horizon T_max must be positive"));
        }
        if !(self.drone_speed.is_finite() && self.drone_speed > 0.0) {
            return Err(InstanceError::Fleet("drone speed must be positive"));
        }
        if !(self.truck_fallback_speed.is_finite() && self.truck_fallback_speed > 0.0) {
            return Err(InstanceError::Fleet("truck fallback speed must be positive"));
        }
        if self.launch_overhead < 0 || self.retrieval_overhead < 0 {
            return Err(InstanceError::Fleet("launch and retrieval overheads must be non-negative"));
        }
        self.depot
            .validate()
            .map_err(|source| InstanceError::Coordinate { context: "depot", source })?;
        self.costs.validate()?;
        for (position, c) in self.customers.iter().enumerate() {
            if c.id != position + 1 {
                return Err(InstanceError::BadCustomerId { position, id: c.id });
            }
            c.location
                .validate()
                .map_err(|source| InstanceError::Coordinate { context: "customer", source })?;
            if c.demand == 0 {
                return Err(InstanceError::ZeroDemand { id: c.id });
            }
            if c.service_seconds < 0 {
                return Err(InstanceError::NegativeService { id: c.id });
            }
            if let Some(w) = c.window {
                if w.open >= w.close {
                    return Err(InstanceError::InvertedWindow { id: c.id, open: w.open, close: w.close });
                }
                if w.open < 0 || w.close > self.horizon {
                    return Err(InstanceError::WindowOutsideHorizon {
                        id: c.id,
                        open: w.open,
                        close: w.close,
                        horizon: self.horizon,
                    });
                }
            }
        }
        Ok(())
    }

    /// A small instance with default fleet and cost constants around `depot`.
    pub fn with_defaults(depot: GeoPoint, customers: Vec<Customer>) -> Self {
        Self {
            customers,
            depot,
            depot_residential: false,
            trucks: 1,
            drones_per_truck: 1,
            truck_capacity: 100,
            drone_capacity: 5,
            endurance: 1800,
            horizon: 36_000,
            costs: CostParams::default(),
            drone_speed: 15.0,
            truck_fallback_speed: 10.0,
            launch_overhead: 0,
            retrieval_overhead: 0,
        }
    }
}
