//! JSON instance files.
//!
//! ```json
//! {
//!   "depot": {"lat": 40.72, "lon": -73.9},
//!   "customers": [
//!     {"id": 1, "lat": 40.7, "lon": -73.95, "demand": 2,
//!      "window": {"open": 0, "close": 3600}, "residential": true}
//!   ],
//!   "fleet": {"trucks": 1, "drones_per_truck": 1, "Qt": 100, "Qd": 2,
//!             "E": 1800, "T_max": 36000, "drone_speed": 15, "truck_fallback_speed": 10},
//!   "costs": {"c_w": 0.005, "c_veh": 0.0006, "alpha": 0.1,
//!             "MC": 0.000621371, "FP": 3.5, "FC": 0.5, "p": 1000}
//! }
//! ```
//!
//! The `residential` flags (depot and customers), `window`,
//! `service_seconds`, the overhead fleet keys and the whole `costs` object
//! are optional.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vrpdt_core::{CostParams, Customer, GeoPoint, Instance, InstanceError, TimeWindow};

#[derive(Debug, thiserror::Error)]
pub enum InstanceFileError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(#[from] InstanceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DepotDto {
    lat: f64,
    lon: f64,
    #[serde(default, skip_serializing_if = "is_false")]
    residential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowDto {
    open: i64,
    close: i64,
}

fn is_zero(v: &i64) -> bool {
    *v == 0
}

fn is_false(v: &bool) -> bool {
    !*v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomerDto {
    id: usize,
    lat: f64,
    lon: f64,
    demand: u32,
    #[serde(default)]
    window: Option<WindowDto>,
    #[serde(default, skip_serializing_if = "is_false")]
    residential: bool,
    #[serde(default, skip_serializing_if = "is_zero")]
    service_seconds: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FleetDto {
    trucks: usize,
    drones_per_truck: usize,
    #[serde(rename = "Qt")]
    qt: u32,
    #[serde(rename = "Qd")]
    qd: u32,
    #[serde(rename = "E")]
    e: i64,
    #[serde(rename = "T_max")]
    t_max: i64,
    drone_speed: f64,
    truck_fallback_speed: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    launch_overhead: i64,
    #[serde(default, skip_serializing_if = "is_zero")]
    retrieval_overhead: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CostsDto {
    c_w: f64,
    c_veh: f64,
    alpha: f64,
    #[serde(rename = "MC")]
    mc: f64,
    #[serde(rename = "FP")]
    fp: f64,
    #[serde(rename = "FC")]
    fc: f64,
    p: f64,
}

impl Default for CostsDto {
    fn default() -> Self {
        CostParams::default().into()
    }
}

impl From<CostParams> for CostsDto {
    fn from(c: CostParams) -> Self {
        Self {
            c_w: c.wage_rate,
            c_veh: c.vehicle_cost,
            alpha: c.drone_factor,
            mc: c.miles_converter,
            fp: c.fuel_price,
            fc: c.fuel_consumption,
            p: c.penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDto {
    depot: DepotDto,
    customers: Vec<CustomerDto>,
    fleet: FleetDto,
    #[serde(default)]
    costs: CostsDto,
}

impl From<&Instance> for InstanceDto {
    fn from(inst: &Instance) -> Self {
        Self {
            depot: DepotDto { lat: inst.depot.lat, lon: inst.depot.lon, residential: inst.depot_residential },
            customers: inst
                .customers
                .iter()
                .map(|c| CustomerDto {
                    id: c.id,
                    lat: c.location.lat,
                    lon: c.location.lon,
                    demand: c.demand,
                    window: c.window.map(|w| WindowDto { open: w.open, close: w.close }),
                    residential: c.residential,
                    service_seconds: c.service_seconds,
                })
                .collect(),
            fleet: FleetDto {
                trucks: inst.trucks,
                drones_per_truck: inst.drones_per_truck,
                qt: inst.truck_capacity,
                qd: inst.drone_capacity,
                e: inst.endurance,
                t_max: inst.horizon,
                drone_speed: inst.drone_speed,
                truck_fallback_speed: inst.truck_fallback_speed,
                launch_overhead: inst.launch_overhead,
                retrieval_overhead: inst.retrieval_overhead,
            },
            costs: inst.costs.into(),
        }
    }
}

impl InstanceDto {
    fn into_instance(self) -> Result<Instance, InstanceError> {
        let mut customers = Vec::with_capacity(self.customers.len());
        for c in self.customers {
            let window = c.window.map(|w| TimeWindow::new(w.open, w.close)).transpose()?;
            customers.push(Customer {
                id: c.id,
                location: GeoPoint::new(c.lat, c.lon),
                demand: c.demand,
                window,
                residential: c.residential,
                service_seconds: c.service_seconds,
            });
        }
        let f = self.fleet;
        let c = self.costs;
        let inst = Instance {
            customers,
            depot: GeoPoint::new(self.depot.lat, self.depot.lon),
            depot_residential: self.depot.residential,
            trucks: f.trucks,
            drones_per_truck: f.drones_per_truck,
            truck_capacity: f.qt,
            drone_capacity: f.qd,
            endurance: f.e,
            horizon: f.t_max,
            costs: CostParams {
                wage_rate: c.c_w,
                vehicle_cost: c.c_veh,
                drone_factor: c.alpha,
                miles_converter: c.mc,
                fuel_price: c.fp,
                fuel_consumption: c.fc,
                penalty: c.p,
            },
            drone_speed: f.drone_speed,
            truck_fallback_speed: f.truck_fallback_speed,
            launch_overhead: f.launch_overhead,
            retrieval_overhead: f.retrieval_overhead,
        };
        inst.validate()?;
        Ok(inst)
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceFileError> {
    let dto: InstanceDto = serde_json::from_str(text).map_err(|e| InstanceFileError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(dto.into_instance()?)
}

pub fn instance_to_string(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceDto::from(inst)).expect("instances serialize")
}

pub fn load_instance(path: &Path) -> Result<Instance, InstanceFileError> {
    let text = fs::read_to_string(path)
        .map_err(|source| InstanceFileError::Io { path: path.display().to_string(), source })?;
    parse_instance(&text)
}

pub fn save_instance(inst: &Instance, path: &Path) -> std::io::Result<()> {
    fs::write(path, instance_to_string(inst) + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = r#"{
      "depot": {"lat": 40.72, "lon": -73.9},
      "customers": [
        {"id": 1, "lat": 40.70, "lon": -73.95, "demand": 2, "window": {"open": 0, "close": 3600}},
        {"id": 2, "lat": 40.75, "lon": -73.85, "demand": 1, "window": null, "residential": true},
        {"id": 3, "lat": 40.68, "lon": -73.99, "demand": 4, "service_seconds": 120}
      ],
      "fleet": {"trucks": 1, "drones_per_truck": 1, "Qt": 100, "Qd": 2, "E": 1800,
                "T_max": 36000, "drone_speed": 15, "truck_fallback_speed": 10}
    }"#;

    #[test]
    fn hand_written_file() {
        let inst = parse_instance(THREE).unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.window(1), Some(TimeWindow { open: 0, close: 3600 }));
        assert!(inst.residential(2));
        assert!(!inst.residential(3));
        assert_eq!(inst.service(3), 120);
        assert_eq!(inst.costs, CostParams::default());
    }

    #[test]
    fn round_trip() {
        let inst = parse_instance(THREE).unwrap();
        let again = parse_instance(&instance_to_string(&inst)).unwrap();
        assert_eq!(inst, again);
        assert_eq!(instance_to_string(&inst), instance_to_string(&again));
    }

    #[test]
    fn inverted_window_rejected() {
        let bad = THREE.replace(r#""open": 0, "close": 3600"#, r#""open": 3600, "close": 3600"#);
        assert!(matches!(parse_instance(&bad), Err(InstanceFileError::Invalid(_))));
    }

    #[test]
    fn unknown_key_reports_position() {
        let bad = THREE.replace(r#""demand": 4"#, r#""demand": 4, "colour": "red""#);
        match parse_instance(&bad) {
            Err(InstanceFileError::Parse { line, message, .. }) => {
                assert_eq!(line, 6);
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }
}
