//! Truck travel-time prediction and drone flight times.

use alloc::vec::Vec;
use core::cell::Cell;
use thiserror::Error;

use crate::geo::{haversine_m, haversine_unchecked, BoundingBox, GeoError, GeoPoint};
use crate::instance::{Instance, Seconds};

pub const SECONDS_PER_DAY: i64 = 86_400;
pub const METERS_PER_MILE: f64 = 1609.344;

/// Calendar position of the planning horizon's start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HorizonStart {
    /// 0 = Monday.
    pub day_of_week: u8,
    /// 1-based.
    pub day_of_month: u8,
    pub days_in_month: u8,
    pub second_of_day: u32,
    pub public_holiday: bool,
}

impl Default for HorizonStart {
    /// A Tuesday, 07:00.
    fn default() -> Self {
        Self { day_of_week: 1, day_of_month: 6, days_in_month: 31, second_of_day: 7 * 3600, public_holiday: false }
    }
}

impl HorizonStart {
    pub fn calendar_at(&self, depart_at: Seconds) -> Calendar {
        let absolute = i64::from(self.second_of_day) + depart_at.max(0);
        let day_offset = absolute.div_euclid(SECONDS_PER_DAY);
        let second_of_day = absolute.rem_euclid(SECONDS_PER_DAY) as u32;
        let day_of_week = ((i64::from(self.day_of_week) + day_offset) % 7) as u8;
        let dim = i64::from(self.days_in_month.max(1));
        let day_of_month = ((i64::from(self.day_of_month) - 1 + day_offset) % dim + 1) as u8;
        let hour = (second_of_day / 3600) as u8;
        let weekend = day_of_week >= 5;
        Calendar {
            day_of_week,
            day_of_month,
            hour,
            second_of_day,
            weekend,
            work_day: !weekend && !self.public_holiday,
            peak_hour: is_peak_hour(hour),
            public_holiday: self.public_holiday,
        }
    }
}

/// Peak hours are 07-10 and 16-19.
pub fn is_peak_hour(hour: u8) -> bool {
    (7..10).contains(&hour) || (16..19).contains(&hour)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Calendar {
    pub day_of_week: u8,
    pub day_of_month: u8,
    pub hour: u8,
    pub second_of_day: u32,
    pub weekend: bool,
    pub work_day: bool,
    pub peak_hour: bool,
    pub public_holiday: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weather {
    pub temperature: f64,
    pub dew: f64,
    pub humid: f64,
    pub rain: f64,
    pub snow: f64,
    pub visible: f64,
    pub fog: f64,
    pub thunder: f64,
    pub tornado: f64,
    pub clear: f64,
    pub haze: f64,
    pub heavy_rain: f64,
    pub heavy_snow: f64,
    pub light_rain: f64,
    pub light_snow: f64,
}

impl Default for Weather {
    fn default() -> Self {
        Self::clear()
    }
}

impl Weather {
    pub const FIELDS: [&'static str; 15] = [
        "temperature", "dew", "humid", "rain", "snow", "visible", "fog", "thunder", "tornado", "clear", "haze",
        "heavy_rain", "heavy_snow", "light_rain", "light_snow",
    ];

    /// Fair-weather vector used when no observation is supplied.
    pub fn clear() -> Self {
        Self {
            temperature: 15.0,
            dew: 8.0,
            humid: 60.0,
            rain: 0.0,
            snow: 0.0,
            visible: 10.0,
            fog: 0.0,
            thunder: 0.0,
            tornado: 0.0,
            clear: 1.0,
            haze: 0.0,
            heavy_rain: 0.0,
            heavy_snow: 0.0,
            light_rain: 0.0,
            light_snow: 0.0,
        }
    }

    pub fn to_array(&self) -> [f64; 15] {
        [
            self.temperature,
            self.dew,
            self.humid,
            self.rain,
            self.snow,
            self.visible,
            self.fog,
            self.thunder,
            self.tornado,
            self.clear,
            self.haze,
            self.heavy_rain,
            self.heavy_snow,
            self.light_rain,
            self.light_snow,
        ]
    }

    pub fn from_array(v: [f64; 15]) -> Self {
        Self {
            temperature: v[0],
            dew: v[1],
            humid: v[2],
            rain: v[3],
            snow: v[4],
            visible: v[5],
            fog: v[6],
            thunder: v[7],
            tornado: v[8],
            clear: v[9],
            haze: v[10],
            heavy_rain: v[11],
            heavy_snow: v[12],
            light_rain: v[13],
            light_snow: v[14],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TravelQuery {
    pub origin: GeoPoint,
    pub destination: GeoPoint,
    pub depart_at: Seconds,
    pub calendar: Calendar,
    pub weather: Weather,
}

impl TravelQuery {
    pub fn new(origin: GeoPoint, destination: GeoPoint, depart_at: Seconds, start: &HorizonStart) -> Self {
        Self { origin, destination, depart_at, calendar: start.calendar_at(depart_at), weather: Weather::clear() }
    }

    /// Inputs of the linear model, in [`LINEAR_FEATURES`] order. `distance_m`
    /// is the road distance of the trip.
    pub fn features(&self, distance_m: f64) -> [f64; LINEAR_FEATURE_COUNT] {
        let c = &self.calendar;
        let mut out = [0.0; LINEAR_FEATURE_COUNT];
        out[0] = self.origin.lon;
        out[1] = self.origin.lat;
        out[2] = self.destination.lon;
        out[3] = self.destination.lat;
        out[4] = f64::from(c.day_of_week);
        out[5] = f64::from(c.day_of_month);
        out[6] = f64::from(c.hour);
        out[7] = f64::from(u8::from(c.weekend));
        out[8] = f64::from(u8::from(c.work_day));
        out[9] = f64::from(u8::from(c.peak_hour));
        out[10] = f64::from(u8::from(c.public_holiday));
        out[11..26].copy_from_slice(&self.weather.to_array());
        out[26] = distance_m / METERS_PER_MILE;
        out
    }
}

pub const LINEAR_FEATURE_COUNT: usize = 27;

/// Feature order of the linear model payload.
pub const LINEAR_FEATURES: [&str; LINEAR_FEATURE_COUNT] = [
    "pickup_lon", "pickup_lat", "dropoff_lon", "dropoff_lat", "day_of_week", "day_of_month", "hour", "weekend",
    "work_day", "peak_hour", "public_holiday", "temperature", "dew", "humid", "rain", "snow", "visible", "fog",
    "thunder", "tornado", "clear", "haze", "heavy_rain", "heavy_snow", "light_rain", "light_snow", "trip_miles",
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TravelEstimate {
    pub duration_s: f64,
    pub distance_m: f64,
}

impl TravelEstimate {
    pub const ZERO: Self = Self { duration_s: 0.0, distance_m: 0.0 };
}

/// Piecewise-constant speed over 24 one-hour bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedProfile {
    /// Reference speed, m/s.
    pub base_speed: f64,
    pub multipliers: [f64; 24],
}

impl SpeedProfile {
    pub fn flat(base_speed: f64) -> Self {
        Self { base_speed, multipliers: [1.0; 24] }
    }

    pub fn speed_at(&self, hour: u8) -> f64 {
        self.base_speed * self.multipliers[usize::from(hour) % 24]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        for m in &mut out.multipliers {
            *m *= factor;
        }
        out
    }
}

/// Linear regression of trip duration over standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

/// Gridded speed lookup: origin zone x destination zone x time-of-day bin.
#[derive(Debug, Clone, PartialEq)]
pub struct GridModel {
    pub region: BoundingBox,
    pub zones_x: usize,
    pub zones_y: usize,
    pub bins_per_day: usize,
    /// Row-major `[origin_zone][destination_zone][bin]`, m/s.
    pub speeds: Vec<f64>,
}

impl GridModel {
    pub fn zone_count(&self) -> usize {
        self.zones_x * self.zones_y
    }

    pub fn index(&self, origin: GeoPoint, destination: GeoPoint, second_of_day: u32) -> usize {
        let zo = self.region.cell(origin, self.zones_x, self.zones_y);
        let zd = self.region.cell(destination, self.zones_x, self.zones_y);
        let bin = (second_of_day as usize * self.bins_per_day / SECONDS_PER_DAY as usize).min(self.bins_per_day - 1);
        (zo * self.zone_count() + zd) * self.bins_per_day + bin
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LearnedModel {
    Linear(LinearModel),
    Grid(GridModel),
}

/// Learned linear predictions are clamped to this speed band, m/s.
pub const LINEAR_SPEED_BAND: (f64, f64) = (0.5, 40.0);

impl LearnedModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            LearnedModel::Linear(m) => {
                for (name, len) in [("mean", m.mean.len()), ("scale", m.scale.len()), ("coefficients", m.coefficients.len())] {
                    if len != LINEAR_FEATURE_COUNT {
                        return Err(ModelError::Shape { field: name, expected: LINEAR_FEATURE_COUNT, found: len });
                    }
                }
                if m.scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return Err(ModelError::Value("feature scales must be positive"));
                }
                if !m.intercept.is_finite() || m.coefficients.iter().chain(&m.mean).any(|v| !v.is_finite()) {
                    return Err(ModelError::Value("non-finite coefficient"));
                }
            }
            LearnedModel::Grid(g) => {
                if g.zones_x == 0 || g.zones_y == 0 || g.bins_per_day == 0 {
                    return Err(ModelError::Value("grid dimensions must be positive"));
                }
                let expected = g.zone_count() * g.zone_count() * g.bins_per_day;
                if g.speeds.len() != expected {
                    return Err(ModelError::Shape { field: "speeds", expected, found: g.speeds.len() });
                }
                if g.speeds.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return Err(ModelError::Value("grid speeds must be positive"));
                }
            }
        }
        Ok(())
    }

    fn duration(&self, q: &TravelQuery, distance_m: f64) -> f64 {
        match self {
            LearnedModel::Linear(m) => {
                let x = q.features(distance_m);
                let raw = x
                    .iter()
                    .zip(&m.mean)
                    .zip(&m.scale)
                    .zip(&m.coefficients)
                    .fold(m.intercept, |acc, (((x, mu), s), w)| acc + w * (x - mu) / s);
                let (lo, hi) = LINEAR_SPEED_BAND;
                raw.clamp(distance_m / hi, distance_m / lo)
            }
            LearnedModel::Grid(g) => distance_m / g.speeds[g.index(q.origin, q.destination, q.calendar.second_of_day)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// Constant speed over the road distance.
    StaticHaversine { speed: f64 },
    ParametricProfile(SpeedProfile),
    Learned(LearnedModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TravelModel {
    pub kind: ModelKind,
    /// Road distance over great-circle distance.
    pub detour_factor: f64,
    /// Speed used for residential-to-residential trips when the bypass is on, m/s.
    pub avg_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model payload field {field}: expected {expected} entries, found {found}")]
    Shape { field: &'static str, expected: usize, found: usize },
    #[error("model payload: {0}")]
    Value(&'static str),
}

pub const DEFAULT_DETOUR_FACTOR: f64 = 1.3;

impl TravelModel {
    pub fn static_haversine(speed: f64, detour_factor: f64) -> Self {
        Self { kind: ModelKind::StaticHaversine { speed }, detour_factor, avg_speed: speed }
    }

    pub fn profile(profile: SpeedProfile, detour_factor: f64, avg_speed: f64) -> Self {
        Self { kind: ModelKind::ParametricProfile(profile), detour_factor, avg_speed }
    }

    pub fn learned(model: LearnedModel, detour_factor: f64, avg_speed: f64) -> Result<Self, ModelError> {
        let out = Self { kind: ModelKind::Learned(model), detour_factor, avg_speed };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.detour_factor.is_finite() && self.detour_factor >= 1.0) {
            return Err(ModelError::Value("detour factor must be at least 1"));
        }
        if !(self.avg_speed.is_finite() && self.avg_speed > 0.0) {
            return Err(ModelError::Value("average speed must be positive"));
        }
        match &self.kind {
            ModelKind::StaticHaversine { speed } if !(speed.is_finite() && *speed > 0.0) => {
                Err(ModelError::Value("static speed must be positive"))
            }
            ModelKind::ParametricProfile(p) => {
                if !(p.base_speed.is_finite() && p.base_speed > 0.0)
                    || p.multipliers.iter().any(|m| !(m.is_finite() && *m > 0.0))
                {
                    return Err(ModelError::Value("profile speeds must be positive"));
                }
                Ok(())
            }
            ModelKind::Learned(m) => m.validate(),
            _ => Ok(()),
        }
    }

    pub fn road_distance(&self, q: &TravelQuery) -> f64 {
        haversine_unchecked(q.origin, q.destination) * self.detour_factor
    }
}

/// Predicted truck travel for `q`. The model must have passed
/// [`TravelModel::validate`].
pub fn predict(model: &TravelModel, q: &TravelQuery) -> TravelEstimate {
    predict_over(model, q, haversine_unchecked(q.origin, q.destination))
}

/// [`predict`] with the great-circle distance of `q` already known.
pub(crate) fn predict_over(model: &TravelModel, q: &TravelQuery, straight_m: f64) -> TravelEstimate {
    if q.origin == q.destination {
        return TravelEstimate::ZERO;
    }
    let distance_m = straight_m * model.detour_factor;
    let duration_s = match &model.kind {
        ModelKind::StaticHaversine { speed } => distance_m / speed,
        ModelKind::ParametricProfile(p) => distance_m / p.speed_at(q.calendar.hour),
        ModelKind::Learned(m) => m.duration(q, distance_m),
    };
    TravelEstimate { duration_s, distance_m }
}

/// Per-evaluation tallies of predictor use.
#[derive(Debug, Default)]
pub struct PredictionCounters {
    predictor_calls: Cell<u64>,
    bypassed: Cell<u64>,
}

impl PredictionCounters {
    pub fn predictor_calls(&self) -> u64 {
        self.predictor_calls.get()
    }

    pub fn bypassed(&self) -> u64 {
        self.bypassed.get()
    }

    pub fn record_call(&self) {
        self.predictor_calls.set(self.predictor_calls.get() + 1);
    }

    fn record_bypass(&self) {
        self.bypassed.set(self.bypassed.get() + 1);
    }

    pub fn reset(&self) {
        self.predictor_calls.set(0);
        self.bypassed.set(0);
    }
}

/// Residential-aware prediction: trips between two residential endpoints use
/// distance over the average speed and never reach the predictor.
pub fn predict_ra_aware(
    model: &TravelModel,
    q: &TravelQuery,
    origin_residential: bool,
    dest_residential: bool,
    counters: &PredictionCounters,
) -> TravelEstimate {
    let straight_m = haversine_unchecked(q.origin, q.destination);
    predict_ra_aware_over(model, q, origin_residential && dest_residential, counters, straight_m)
}

pub(crate) fn predict_ra_aware_over(
    model: &TravelModel,
    q: &TravelQuery,
    both_residential: bool,
    counters: &PredictionCounters,
    straight_m: f64,
) -> TravelEstimate {
    if q.origin == q.destination {
        return TravelEstimate::ZERO;
    }
    if both_residential {
        counters.record_bypass();
        let distance_m = straight_m * model.detour_factor;
        return TravelEstimate { duration_s: distance_m / model.avg_speed, distance_m };
    }
    counters.record_call();
    predict_over(model, q, straight_m)
}

/// Straight-line drone flight time in seconds.
pub fn drone_time(a: GeoPoint, b: GeoPoint, inst: &Instance) -> Result<f64, GeoError> {
    Ok(haversine_m(a, b)? / inst.drone_speed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::EARTH_RADIUS_M;

    // Points due north of each other, `meters` apart on the great circle.
    fn pair(meters: f64) -> (GeoPoint, GeoPoint) {
        let a = GeoPoint::new(40.70, -73.95);
        let dlat = (meters / EARTH_RADIUS_M).to_degrees();
        (a, GeoPoint::new(40.70 + dlat, -73.95))
    }

    fn query(a: GeoPoint, b: GeoPoint, at: Seconds) -> TravelQuery {
        TravelQuery::new(a, b, at, &HorizonStart::default())
    }

    #[test]
    fn same_endpoints_are_free() {
        let (a, _) = pair(0.0);
        let m = TravelModel::static_haversine(10.0, 1.3);
        assert_eq!(predict(&m, &query(a, a, 0)), TravelEstimate::ZERO);
    }

    #[test]
    fn static_kind_is_distance_over_speed() {
        // 5000 m of road after a 1.25 detour.
        let (a, b) = pair(4000.0);
        let m = TravelModel::static_haversine(10.0, 1.25);
        let e = predict(&m, &query(a, b, 0));
        assert!((e.distance_m - 5000.0).abs() < 1e-6);
        assert!((e.duration_s - 500.0).abs() < 1e-6);
    }

    #[test]
    fn profile_peak_doubles_duration() {
        let mut p = SpeedProfile::flat(10.0);
        p.multipliers[8] = 0.5;
        let m = TravelModel::profile(p, 1.3, 8.0);
        let (a, b) = pair(3000.0);
        let start = HorizonStart { second_of_day: 0, ..HorizonStart::default() };
        let peak = predict(&m, &TravelQuery::new(a, b, 8 * 3600 + 60, &start));
        let off = predict(&m, &TravelQuery::new(a, b, 12 * 3600, &start));
        assert!((peak.duration_s / off.duration_s - 2.0).abs() < 1e-12);
        assert_eq!(peak.distance_m, off.distance_m);
    }

    #[test]
    fn residential_pair_bypasses_predictor() {
        // 3000 m of road at 7.5 m/s.
        let (a, b) = pair(3000.0);
        let m = TravelModel::profile(SpeedProfile::flat(10.0), 1.0, 7.5);
        let counters = PredictionCounters::default();
        let e = predict_ra_aware(&m, &query(a, b, 0), true, true, &counters);
        assert!((e.duration_s - 400.0).abs() < 1e-6);
        assert_eq!(counters.predictor_calls(), 0);
        assert_eq!(counters.bypassed(), 1);

        let e = predict_ra_aware(&m, &query(a, b, 0), true, false, &counters);
        assert_eq!(e, predict(&m, &query(a, b, 0)));
        assert_eq!(counters.predictor_calls(), 1);
    }

    #[test]
    fn calendar_rolls_over_midnight() {
        let start = HorizonStart { day_of_week: 6, day_of_month: 31, days_in_month: 31, second_of_day: 23 * 3600, public_holiday: false };
        let c = start.calendar_at(2 * 3600);
        assert_eq!((c.day_of_week, c.day_of_month, c.hour), (0, 1, 1));
        assert!(!c.weekend && c.work_day && !c.peak_hour);
        let c = start.calendar_at(0);
        assert!(c.weekend && !c.work_day);
        assert!(start.calendar_at(8 * 3600 + 1800).peak_hour);
    }

    #[test]
    fn grid_payload_shape_checked() {
        let g = GridModel { region: BoundingBox::nyc(), zones_x: 2, zones_y: 2, bins_per_day: 4, speeds: alloc::vec![8.0; 10] };
        assert!(matches!(LearnedModel::Grid(g).validate(), Err(ModelError::Shape { .. })));
    }

    #[test]
    fn grid_lookup_uses_zone_and_bin() {
        let region = BoundingBox::nyc();
        let mut speeds = alloc::vec![10.0; 4 * 4 * 2];
        let a = region.lerp(0.1, 0.1);
        let b = region.lerp(0.9, 0.9);
        let g = GridModel { region, zones_x: 2, zones_y: 2, bins_per_day: 2, speeds: speeds.clone() };
        let start = HorizonStart { second_of_day: 0, ..HorizonStart::default() };
        let q = TravelQuery::new(a, b, 13 * 3600, &start);
        let idx = g.index(a, b, q.calendar.second_of_day);
        assert_eq!(idx, (0 * 4 + 3) * 2 + 1);
        speeds[idx] = 5.0;
        let g = GridModel { speeds, ..g };
        let m = TravelModel::learned(LearnedModel::Grid(g), 1.3, 8.0).unwrap();
        let e = predict(&m, &q);
        assert!((e.duration_s - e.distance_m / 5.0).abs() < 1e-9);
    }

    #[test]
    fn linear_prediction_is_clamped() {
        let n = LINEAR_FEATURE_COUNT;
        let lin = LinearModel { mean: alloc::vec![0.0; n], scale: alloc::vec![1.0; n], coefficients: alloc::vec![0.0; n], intercept: -50.0 };
        let m = TravelModel::learned(LearnedModel::Linear(lin), 1.0, 8.0).unwrap();
        let (a, b) = pair(4000.0);
        let e = predict(&m, &query(a, b, 0));
        assert!((e.duration_s - 4000.0 / LINEAR_SPEED_BAND.1).abs() < 1e-6);
    }

    #[test]
    fn drone_flight() {
        let (a, b) = pair(6000.0);
        let inst = Instance::with_defaults(a, alloc::vec::Vec::new());
        assert!((drone_time(a, b, &inst).unwrap() - 400.0).abs() < 1e-6);
        assert_eq!(drone_time(a, a, &inst).unwrap(), 0.0);
    }
}
