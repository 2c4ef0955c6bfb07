//! Every tunable constant, with defaults, loadable from TOML.
//!
//! A config file only needs the keys it changes; everything else keeps its
//! default. Unknown keys are rejected so typos fail loudly.

use std::path::Path;

use anyhow::{bail, Context, Result};
use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use vrpdt_core::{BoundingBox, CostParams, GeoPoint, HorizonStart, MoveId, OracleParams, SearchConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub region: RegionConfig,
    pub fleet: FleetConfig,
    pub costs: CostConfig,
    pub scenario: ScenarioConfig,
    pub oracle: OracleConfig,
    pub fit: FitConfig,
    pub search: SearchSection,
    pub scaling: ScalingConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        let b = BoundingBox::nyc();
        Self { min_lat: b.min.lat, min_lon: b.min.lon, max_lat: b.max.lat, max_lon: b.max.lon }
    }
}

impl RegionConfig {
    pub fn bounding_box(&self) -> Result<BoundingBox> {
        BoundingBox::new(GeoPoint::new(self.min_lat, self.min_lon), GeoPoint::new(self.max_lat, self.max_lon))
            .context("region")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FleetConfig {
    pub trucks: usize,
    pub drones_per_truck: usize,
    pub truck_capacity: u32,
    pub drone_capacity: u32,
    pub endurance_s: i64,
    pub horizon_s: i64,
    pub drone_speed: f64,
    pub truck_fallback_speed: f64,
    pub launch_overhead_s: i64,
    pub retrieval_overhead_s: i64,
}

impl Default for FleetConfig {
    fn default() -> Self {
        Self {
            trucks: 3,
            drones_per_truck: 1,
            truck_capacity: 100,
            drone_capacity: 2,
            endurance_s: 1800,
            horizon_s: 36_000,
            drone_speed: 15.0,
            truck_fallback_speed: 10.0,
            launch_overhead_s: 0,
            retrieval_overhead_s: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub c_w: f64,
    pub c_veh: f64,
    pub alpha: f64,
    pub mc: f64,
    pub fp: f64,
    pub fc: f64,
    pub p: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self::from(CostParams::default())
    }
}

impl From<CostParams> for CostConfig {
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

impl From<CostConfig> for CostParams {
    fn from(c: CostConfig) -> Self {
        Self {
            wage_rate: c.c_w,
            vehicle_cost: c.c_veh,
            drone_factor: c.alpha,
            miles_converter: c.mc,
            fuel_price: c.fp,
            fuel_consumption: c.fc,
            penalty: c.p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub customers: usize,
    pub seed: u64,
    pub repetitions: usize,
    /// Fixed %TW; sampled from `tw_density_range` when absent.
    pub tw_density: Option<f64>,
    pub tw_density_range: [f64; 2],
    /// Fixed window width in seconds; sampled from `tw_width_range` when absent.
    pub tw_width: Option<i64>,
    pub tw_width_range: [i64; 2],
    /// Demand range of drone-eligible customers.
    pub light_demand: [u32; 2],
    /// Demand range of everyone else.
    pub heavy_demand: [u32; 2],
    pub drone_eligible_fraction: f64,
    /// Local date-time of the horizon start, `YYYY-MM-DDTHH:MM:SS`.
    pub horizon_start: String,
    /// Days between the horizon starts of consecutive repetitions.
    pub repetition_spacing_days: i64,
    /// Dates (`YYYY-MM-DD`) treated as public holidays.
    pub public_holidays: Vec<String>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            customers: 50,
            seed: 1,
            repetitions: 30,
            tw_density: None,
            tw_density_range: [0.25, 1.0],
            tw_width: None,
            tw_width_range: [1800, 7200],
            light_demand: [1, 2],
            heavy_demand: [3, 6],
            drone_eligible_fraction: 0.8,
            // A Tuesday.
            horizon_start: "2024-06-04T07:00:00".into(),
            repetition_spacing_days: 7,
            public_holidays: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn start_datetime(&self) -> Result<NaiveDateTime> {
        NaiveDateTime::parse_from_str(&self.horizon_start, "%Y-%m-%dT%H:%M:%S")
            .with_context(|| format!("horizon_start {:?}", self.horizon_start))
    }

    pub fn holidays(&self) -> Result<Vec<NaiveDate>> {
        self.public_holidays
            .iter()
            .map(|d| NaiveDate::parse_from_str(d, "%Y-%m-%d").with_context(|| format!("public holiday {d:?}")))
            .collect()
    }

    pub fn horizon_start(&self) -> Result<HorizonStart> {
        Ok(horizon_start_from(self.start_datetime()?, &self.holidays()?))
    }
}

/// Calendar position of a local date-time.
pub fn horizon_start_from(at: NaiveDateTime, holidays: &[NaiveDate]) -> HorizonStart {
    let date = at.date();
    let first_next = if date.month() == 12 {
        NaiveDate::from_ymd_opt(date.year() + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(date.year(), date.month() + 1, 1)
    }
    .expect("valid month start");
    let days_in_month = first_next.pred_opt().expect("valid date").day() as u8;
    HorizonStart {
        day_of_week: date.weekday().num_days_from_monday() as u8,
        day_of_month: date.day() as u8,
        days_in_month,
        second_of_day: at.time().num_seconds_from_midnight(),
        public_holiday: holidays.contains(&date),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub seed: u64,
    pub zones_x: usize,
    pub zones_y: usize,
    pub free_speed: f64,
    pub detour_factor: f64,
    pub residential_fraction: f64,
    pub residential_blobs: usize,
    pub noise: f64,
    pub residential_sensitivity: f64,
    pub residential_speed_factor: f64,
    pub day_variation: f64,
    pub zone_day_variation: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let p = OracleParams::default();
        Self {
            seed: 7,
            zones_x: p.zones_x,
            zones_y: p.zones_y,
            free_speed: p.free_speed,
            detour_factor: p.detour_factor,
            residential_fraction: p.residential_fraction,
            residential_blobs: p.residential_blobs,
            noise: p.noise,
            residential_sensitivity: p.residential_sensitivity,
            residential_speed_factor: p.residential_speed_factor,
            day_variation: p.day_variation,
            zone_day_variation: p.zone_day_variation,
        }
    }
}

impl OracleConfig {
    pub fn params(&self, region: BoundingBox) -> OracleParams {
        OracleParams {
            region,
            zones_x: self.zones_x,
            zones_y: self.zones_y,
            free_speed: self.free_speed,
            detour_factor: self.detour_factor,
            residential_fraction: self.residential_fraction,
            residential_blobs: self.residential_blobs,
            noise: self.noise,
            residential_sensitivity: self.residential_sensitivity,
            residential_speed_factor: self.residential_speed_factor,
            day_variation: self.day_variation,
            zone_day_variation: self.zone_day_variation,
        }
    }
}

/// Oracle sampling used to fit the dynamic mode's speed profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub samples: usize,
    pub max_distance_m: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { samples: 20_000, max_distance_m: 20_000.0, seed: 11 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub max_iterations: usize,
    pub moves_per_shake: usize,
    pub neighborhood_order: [u8; 8],
    pub sampling_width: Option<usize>,
    pub exhaustive: bool,
    pub time_budget_s: Option<f64>,
}

impl Default for SearchSection {
    fn default() -> Self {
        let d = SearchConfig::default();
        Self {
            max_iterations: d.max_iterations,
            moves_per_shake: d.moves_per_shake,
            neighborhood_order: d.neighborhood_order.map(MoveId::number),
            sampling_width: d.sampling_width,
            exhaustive: d.exhaustive,
            time_budget_s: None,
        }
    }
}

impl SearchSection {
    pub fn to_search_config(&self, seed: u64) -> Result<SearchConfig> {
        let mut order = [MoveId::SwapNode; 8];
        for (slot, &n) in order.iter_mut().zip(&self.neighborhood_order) {
            *slot = MoveId::from_number(n).with_context(|| format!("unknown move id {n}"))?;
        }
        let config = SearchConfig {
            max_iterations: self.max_iterations,
            seed,
            neighborhood_order: order,
            moves_per_shake: self.moves_per_shake,
            time_budget_ms: self.time_budget_s.map(|s| (s * 1000.0) as u64),
            sampling_width: self.sampling_width,
            exhaustive: self.exhaustive,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub customer_counts: Vec<usize>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { customer_counts: vec![10, 20, 30, 40, 50] }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: Config = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.region.bounding_box()?;
        CostParams::from(self.costs).validate()?;
        let s = &self.scenario;
        let [lo, hi] = s.tw_density_range;
        if !(0.25 <= lo && lo <= hi && hi <= 1.0) {
            bail!("tw_density_range must lie within [0.25, 1]");
        }
        if s.tw_density.is_some_and(|d| !(0.25..=1.0).contains(&d)) {
            bail!("tw_density must lie within [0.25, 1]");
        }
        let [wlo, whi] = s.tw_width_range;
        if !(1800 <= wlo && wlo <= whi && whi <= 7200) {
            bail!("tw_width_range must lie within [1800, 7200] seconds");
        }
        if s.tw_width.is_some_and(|w| !(1800..=7200).contains(&w)) {
            bail!("tw_width must lie within [1800, 7200] seconds");
        }
        if s.light_demand[0] == 0 || s.light_demand[0] > s.light_demand[1] || s.heavy_demand[0] > s.heavy_demand[1] {
            bail!("demand ranges must be non-empty and positive");
        }
        if !(0.0..=1.0).contains(&s.drone_eligible_fraction) {
            bail!("drone_eligible_fraction must lie within [0, 1]");
        }
        s.horizon_start()?;
        if !(0..=366).contains(&s.repetition_spacing_days) {
            bail!("repetition_spacing_days must lie within [0, 366]");
        }
        let o = &self.oracle;
        if !(0.0..1.0).contains(&o.day_variation) || !(0.0..1.0).contains(&o.zone_day_variation) {
            bail!("oracle day variations must lie within [0, 1)");
        }
        self.search.to_search_config(0)?;
        if self.fit.samples == 0 {
            bail!("fit.samples must be positive");
        }
        Ok(())
    }
}
