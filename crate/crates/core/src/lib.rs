//! Truck-drone vehicle routing under time-dependent traffic.
//!
//! The crate is `no_std` (it only needs `alloc`) and holds everything that is
//! pure computation:
//!
//! - [`instance`]: customers, fleet and cost constants.
//! - [`encoding`]: the upper/lower vector solution representation and its
//!   mapping to explicit truck routes and drone sorties.
//! - [`travel`]: time-dependent truck travel-time models, the residential
//!   bypass and drone flight times.
//! - [`oracle`]: a seeded synthetic traffic field used as ground truth, trip
//!   sampling and a profile fit over sampled trips.
//! - [`cost`] and [`objective`]: arc costs, schedule propagation and the
//!   penalized objective.
//! - [`construction`]: nearest neighbour, 2-opt and sortie insertion.
//! - [`search`]: the eight neighbourhood moves, VND descent and the outer
//!   shake/shuffle loop.
//!
//! File formats, the benchmark harness and the CLI live in the `vrpdt` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod construction;
pub mod cost;
pub mod encoding;
pub mod geo;
pub mod instance;
pub mod objective;
pub mod oracle;
pub mod search;
pub mod travel;

mod hash;

pub use construction::{construct, findsortie, nearest_neighbor_init, two_opt, NnOutcome};
pub use cost::{
    arc_cost_dynamic, arc_cost_static, drone_leg_cost, CostModel, DynamicCost, NodeGeometry,
    OracleCost, StaticCost, TruckLeg,
};
pub use encoding::{decode, decode_into, encode, repair, DecodedPlan, Encoding, EncodingError, Route, Sortie};
pub use geo::{haversine_m, BoundingBox, GeoError, GeoPoint, EARTH_RADIUS_M};
pub use instance::{CostParams, Customer, Instance, InstanceError, NodeId, Seconds, TimeWindow};
pub use objective::{discrepancy, evaluate, propagate_schedule, propagate_schedule_into, EvalReport, Evaluator, Schedule};
pub use oracle::{fit_profile, sample_trips, OracleParams, ResidentialMap, TrafficOracle, TripSample};
pub use search::{
    apply_move, shake, solve, vnd_descent, Clock, MoveId, NoClock, SearchConfig, SearchTrace,
    SolveOutcome, TraceRecord,
};
pub use travel::{
    drone_time, predict, predict_ra_aware, Calendar, HorizonStart, LearnedModel, ModelKind,
    PredictionCounters, SpeedProfile, TravelEstimate, TravelModel, TravelQuery, Weather,
};
