//! Portable travel-time model payload.
//!
//! ```json
//! {
//!   "format": "vrpdt-travel-model",
//!   "version": 1,
//!   "kind": "grid",
//!   "detour_factor": 1.3,
//!   "avg_speed": 8.4,
//!   "grid": {"region": {...}, "zones_x": 6, "zones_y": 6, "bins_per_day": 96, "speeds": [...]},
//!   "metadata": {"seed": 3, "peak_hours": "07-10,16-19"},
//!   "conformance": [ trip rows whose duration_s is the producer's prediction ]
//! }
//! ```
//!
//! `kind` is `linear`, `grid` or `profile`, and exactly the matching section
//! must be present. Each conformance row is replayed through the core
//! predictor and must agree with the stored duration to [`CONFORMANCE_TOLERANCE`].

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vrpdt_core::travel::{GridModel, LinearModel, ModelError, LINEAR_FEATURES, LINEAR_FEATURE_COUNT};
use vrpdt_core::{predict, BoundingBox, GeoPoint, LearnedModel, ModelKind, SpeedProfile, TravelModel};

use crate::trips::TripRow;

pub const FORMAT_NAME: &str = "vrpdt-travel-model";
pub const FORMAT_VERSION: u32 = 1;
pub const CONFORMANCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("model payload parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("not a travel model payload (format {0:?})")]
    Format(String),
    #[error("unsupported model payload version {0}")]
    Version(u32),
    #[error("model payload kind {kind:?} needs exactly its own section")]
    Sections { kind: String },
    #[error("linear feature names differ from the expected order")]
    FeatureOrder,
    #[error("conformance row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadKind {
    Linear,
    Grid,
    Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSection {
    pub features: Vec<String>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub region: RegionSection,
    pub zones_x: usize,
    pub zones_y: usize,
    pub bins_per_day: usize,
    pub speeds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub base_speed: f64,
    pub multipliers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelPayload {
    pub format: String,
    pub version: u32,
    pub kind: PayloadKind,
    pub detour_factor: f64,
    pub avg_speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSection>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub conformance: Vec<TripRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformanceReport {
    pub queries: usize,
    pub max_relative_diff: f64,
    /// Rows outside the tolerance.
    pub failures: Vec<usize>,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl ModelPayload {
    /// Payload describing `model`, without conformance rows. Static models
    /// have no payload form.
    pub fn from_model(model: &TravelModel) -> Option<Self> {
        let mut out = Self {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            kind: PayloadKind::Profile,
            detour_factor: model.detour_factor,
            avg_speed: model.avg_speed,
            linear: None,
            grid: None,
            profile: None,
            metadata: BTreeMap::new(),
            conformance: Vec::new(),
        };
        match &model.kind {
            ModelKind::StaticHaversine { .. } => return None,
            ModelKind::ParametricProfile(p) => {
                out.profile = Some(ProfileSection { base_speed: p.base_speed, multipliers: p.multipliers.to_vec() });
            }
            ModelKind::Learned(LearnedModel::Linear(m)) => {
                out.kind = PayloadKind::Linear;
                out.linear = Some(LinearSection {
                    features: LINEAR_FEATURES.iter().map(|s| s.to_string()).collect(),
                    mean: m.mean.clone(),
                    scale: m.scale.clone(),
                    coefficients: m.coefficients.clone(),
                    intercept: m.intercept,
                });
            }
            ModelKind::Learned(LearnedModel::Grid(g)) => {
                out.kind = PayloadKind::Grid;
                out.grid = Some(GridSection {
                    region: RegionSection {
                        min_lat: g.region.min.lat,
                        min_lon: g.region.min.lon,
                        max_lat: g.region.max.lat,
                        max_lon: g.region.max.lon,
                    },
                    zones_x: g.zones_x,
                    zones_y: g.zones_y,
                    bins_per_day: g.bins_per_day,
                    speeds: g.speeds.clone(),
                });
            }
        }
        Some(out)
    }

    /// Adds conformance rows holding this model's own predictions.
    pub fn with_conformance(mut self, queries: &[TripRow]) -> Result<Self, ModelFileError> {
        let model = self.to_model()?;
        self.conformance = queries
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let q = row.query().map_err(|e| ModelFileError::BadRow { row: i, message: e.to_string() })?;
                let est = predict(&model, &q);
                Ok(TripRow::from_query(&q, est.distance_m, est.duration_s))
            })
            .collect::<Result<_, ModelFileError>>()?;
        Ok(self)
    }

    pub fn to_model(&self) -> Result<TravelModel, ModelFileError> {
        if self.format != FORMAT_NAME {
            return Err(ModelFileError::Format(self.format.clone()));
        }
        if self.version != FORMAT_VERSION {
            return Err(ModelFileError::Version(self.version));
        }
        let sections = (self.linear.is_some(), self.grid.is_some(), self.profile.is_some());
        let kind = match (self.kind, sections) {
            (PayloadKind::Linear, (true, false, false)) => {
                let l = self.linear.as_ref().expect("checked");
                if l.features.len() != LINEAR_FEATURE_COUNT || l.features.iter().zip(LINEAR_FEATURES).any(|(a, b)| a != b) {
                    return Err(ModelFileError::FeatureOrder);
                }
                ModelKind::Learned(LearnedModel::Linear(LinearModel {
                    mean: l.mean.clone(),
                    scale: l.scale.clone(),
                    coefficients: l.coefficients.clone(),
                    intercept: l.intercept,
                }))
            }
            (PayloadKind::Grid, (false, true, false)) => {
                let g = self.grid.as_ref().expect("checked");
                let r = g.region;
                let region = BoundingBox::new(GeoPoint::new(r.min_lat, r.min_lon), GeoPoint::new(r.max_lat, r.max_lon))
                    .map_err(|_| ModelError::Value("grid region is degenerate"))?;
                ModelKind::Learned(LearnedModel::Grid(GridModel {
                    region,
                    zones_x: g.zones_x,
                    zones_y: g.zones_y,
                    bins_per_day: g.bins_per_day,
                    speeds: g.speeds.clone(),
                }))
            }
            (PayloadKind::Profile, (false, false, true)) => {
                let p = self.profile.as_ref().expect("checked");
                let multipliers: [f64; 24] = p.multipliers.as_slice().try_into().map_err(|_| ModelError::Shape {
                    field: "multipliers",
                    expected: 24,
                    found: p.multipliers.len(),
                })?;
                ModelKind::ParametricProfile(SpeedProfile { base_speed: p.base_speed, multipliers })
            }
            (kind, _) => return Err(ModelFileError::Sections { kind: format!("{kind:?}").to_lowercase() }),
        };
        let model = TravelModel { kind, detour_factor: self.detour_factor, avg_speed: self.avg_speed };
        model.validate()?;
        Ok(model)
    }

    /// Replays every conformance row through the core predictor.
    pub fn check_conformance(&self) -> Result<ConformanceReport, ModelFileError> {
        let model = self.to_model()?;
        let mut report = ConformanceReport { queries: self.conformance.len(), max_relative_diff: 0.0, failures: Vec::new() };
        for (i, row) in self.conformance.iter().enumerate() {
            let q = row.query().map_err(|e| ModelFileError::BadRow { row: i, message: e.to_string() })?;
            let got = predict(&model, &q).duration_s;
            let rel = (got - row.duration_s).abs() / row.duration_s.abs().max(f64::MIN_POSITIVE);
            report.max_relative_diff = report.max_relative_diff.max(rel);
            if !(rel <= CONFORMANCE_TOLERANCE) {
                report.failures.push(i);
            }
        }
        Ok(report)
    }

    pub fn parse(text: &str) -> Result<Self, ModelFileError> {
        serde_json::from_str(text).map_err(|e| ModelFileError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ModelFileError> {
        let text = fs::read_to_string(path)
            .map_err(|source| ModelFileError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, serde_json::to_string_pretty(self).expect("payloads serialize") + "\n")
    }
}

/// Loads a payload and builds the model it describes.
pub fn load_model(path: &Path) -> Result<TravelModel, ModelFileError> {
    ModelPayload::load(path)?.to_model()
}

#[cfg(test)]
mod tests {
    use super::*;
    use vrpdt_core::{HorizonStart, TravelQuery};

    fn grid_model() -> TravelModel {
        let g = GridModel {
            region: BoundingBox::nyc(),
            zones_x: 2,
            zones_y: 2,
            bins_per_day: 4,
            speeds: (0..64).map(|i| 5.0 + f64::from(i) * 0.1).collect(),
        };
        TravelModel::learned(LearnedModel::Grid(g), 1.25, 7.0).unwrap()
    }

    fn rows() -> Vec<TripRow> {
        let r = BoundingBox::nyc();
        (0..20)
            .map(|i| {
                let u = f64::from(i) / 20.0;
                let q = TravelQuery::new(r.lerp(u, 1.0 - u), r.lerp(0.5, u), i64::from(i) * 3000, &HorizonStart::default());
                TripRow::from_query(&q, 1.0, 1.0)
            })
            .collect()
    }

    #[test]
    fn grid_round_trip_conforms() {
        let model = grid_model();
        let payload = ModelPayload::from_model(&model).unwrap().with_conformance(&rows()).unwrap();
        let text = serde_json::to_string(&payload).unwrap();
        let back = ModelPayload::parse(&text).unwrap();
        assert_eq!(back.to_model().unwrap(), model);
        let report = back.check_conformance().unwrap();
        assert_eq!(report.queries, 20);
        assert!(report.passed());
        assert_eq!(report.max_relative_diff, 0.0);
    }

    #[test]
    fn tampered_prediction_fails_conformance() {
        let mut payload = ModelPayload::from_model(&grid_model()).unwrap().with_conformance(&rows()).unwrap();
        payload.conformance[3].duration_s *= 1.0 + 1e-5;
        let report = payload.check_conformance().unwrap();
        assert_eq!(report.failures, vec![3]);
    }

    #[test]
    fn linear_needs_feature_order() {
        let lin = LinearModel {
            mean: vec![0.0; 27],
            scale: vec![1.0; 27],
            coefficients: vec![0.0; 27],
            intercept: 300.0,
        };
        let model = TravelModel::learned(LearnedModel::Linear(lin), 1.3, 8.0).unwrap();
        let mut payload = ModelPayload::from_model(&model).unwrap();
        assert_eq!(payload.to_model().unwrap(), model);
        payload.linear.as_mut().unwrap().features.swap(0, 1);
        assert!(matches!(payload.to_model(), Err(ModelFileError::FeatureOrder)));
    }

    #[test]
    fn shape_and_header_errors() {
        let mut payload = ModelPayload::from_model(&grid_model()).unwrap();
        payload.grid.as_mut().unwrap().speeds.pop();
        assert!(matches!(payload.to_model(), Err(ModelFileError::Model(ModelError::Shape { .. }))));
        let mut payload = ModelPayload::from_model(&grid_model()).unwrap();
        payload.version = 9;
        assert!(matches!(payload.to_model(), Err(ModelFileError::Version(9))));
        payload.version = FORMAT_VERSION;
        payload.profile = Some(ProfileSection { base_speed: 1.0, multipliers: vec![1.0; 24] });
        assert!(matches!(payload.to_model(), Err(ModelFileError::Sections { .. })));
    }

    #[test]
    fn corrupt_text_reports_position() {
        assert!(matches!(ModelPayload::parse("{\"format\": "), Err(ModelFileError::Parse { .. })));
    }

    #[test]
    fn profile_payload() {
        let model = TravelModel::profile(SpeedProfile::flat(9.0).scaled(0.9), 1.3, 7.5);
        let payload = ModelPayload::from_model(&model).unwrap();
        assert_eq!(payload.kind, PayloadKind::Profile);
        assert_eq!(payload.to_model().unwrap(), model);
        assert!(ModelPayload::from_model(&TravelModel::static_haversine(10.0, 1.0)).is_none());
    }
}
