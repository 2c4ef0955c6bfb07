//! Synthetic ground-truth traffic.
//!
//! The oracle is a seeded congestion field over a zone grid and 96
//! fifteen-minute bins. It stands in for measured travel times: the solver's
//! models never see it directly, only trips sampled from it.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geo::{haversine_unchecked, BoundingBox, GeoError, GeoPoint};
use crate::hash::{mix, signed_unit};
use crate::travel::{Calendar, HorizonStart, SpeedProfile, TravelEstimate, TravelModel, TravelQuery, SECONDS_PER_DAY};

pub const ORACLE_BINS: usize = 96;
const BIN_SECONDS: f64 = 900.0;
const SAMPLE_DAYS: i64 = 364;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    pub region: BoundingBox,
    pub zones_x: usize,
    pub zones_y: usize,
    /// Uncongested truck speed, m/s.
    pub free_speed: f64,
    pub detour_factor: f64,
    /// Share of the region's area covered by residential blobs.
    pub residential_fraction: f64,
    pub residential_blobs: usize,
    /// Amplitude of the zone-pair noise as a fraction of the multiplier.
    pub noise: f64,
    /// How strongly residential streets follow the daily congestion curve.
    pub residential_sensitivity: f64,
    /// Residential speed relative to free flow.
    pub residential_speed_factor: f64,
    /// Amplitude of the citywide day-to-day speed variation.
    pub day_variation: f64,
    /// Amplitude of the per-zone day-to-day speed variation.
    pub zone_day_variation: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            region: BoundingBox::nyc(),
            zones_x: 6,
            zones_y: 6,
            free_speed: 11.0,
            detour_factor: 1.3,
            residential_fraction: 0.6,
            residential_blobs: 14,
            noise: 0.08,
            residential_sensitivity: 0.2,
            residential_speed_factor: 0.8,
            day_variation: 0.12,
            zone_day_variation: 0.1,
        }
    }
}

/// Residential areas as thresholded overlapping blobs.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidentialMap {
    region: BoundingBox,
    blobs: Vec<(f64, f64, f64)>,
    threshold: f64,
}

impl ResidentialMap {
    const GRID: usize = 64;

    pub fn generate(region: BoundingBox, fraction: f64, blobs: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, 0x5e51]));
        let blobs: Vec<_> = (0..blobs.max(1))
            .map(|_| (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen_range(0.08..0.22)))
            .collect();
        let mut map = Self { region, blobs, threshold: f64::INFINITY };
        map.threshold = if fraction <= 0.0 {
            f64::INFINITY
        } else if fraction >= 1.0 {
            f64::NEG_INFINITY
        } else {
            let mut values: Vec<f64> = (0..Self::GRID * Self::GRID)
                .map(|k| {
                    let u = ((k % Self::GRID) as f64 + 0.5) / Self::GRID as f64;
                    let v = ((k / Self::GRID) as f64 + 0.5) / Self::GRID as f64;
                    map.field(u, v)
                })
                .collect();
            values.sort_by(f64::total_cmp);
            let cut = ((1.0 - fraction) * values.len() as f64) as usize;
            values[cut.min(values.len() - 1)]
        };
        map
    }

    fn field(&self, u: f64, v: f64) -> f64 {
        self.blobs
            .iter()
            .map(|&(cu, cv, r)| libm::exp(-((u - cu) * (u - cu) + (v - cv) * (v - cv)) / (r * r)))
            .fold(0.0, f64::max)
    }

    pub fn is_residential(&self, p: GeoPoint) -> bool {
        if !self.region.contains(p) {
            return false;
        }
        let (u, v) = self.region.unit_coords(p);
        self.field(u, v) >= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficOracle {
    params: OracleParams,
    seed: u64,
    zone_sensitivity: Vec<f64>,
    zone_bias: Vec<f64>,
    bin_jitter: [f64; ORACLE_BINS],
    residential: ResidentialMap,
}

/// Daily congestion curve: below 1 in the morning and evening peaks.
fn daily_curve(hour: f64) -> f64 {
    let bump = |c: f64, w: f64| libm::exp(-(hour - c) * (hour - c) / (2.0 * w * w));
    1.12 - 0.52 * bump(8.25, 1.1) - 0.58 * bump(17.5, 1.4) - 0.15 * bump(12.75, 1.5)
}

impl TrafficOracle {
    pub fn new(params: OracleParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, 0x0_7ac1e]));
        let zones = params.zones_x.max(1) * params.zones_y.max(1);
        let zone_sensitivity = (0..zones).map(|_| rng.gen_range(0.6..1.4)).collect();
        let zone_bias = (0..zones).map(|_| rng.gen_range(0.85..1.1)).collect();
        let mut bin_jitter = [0.0; ORACLE_BINS];
        for j in &mut bin_jitter {
            *j = rng.gen_range(-0.03..0.03);
        }
        let residential = ResidentialMap::generate(
            params.region,
            params.residential_fraction,
            params.residential_blobs,
            seed,
        );
        Self { params, seed, zone_sensitivity, zone_bias, bin_jitter, residential }
    }

    pub fn params(&self) -> &OracleParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn residential_map(&self) -> &ResidentialMap {
        &self.residential
    }

    pub fn is_residential(&self, p: GeoPoint) -> bool {
        self.residential.is_residential(p)
    }

    fn zone(&self, p: GeoPoint) -> usize {
        self.params.region.cell(p, self.params.zones_x.max(1), self.params.zones_y.max(1))
    }

    fn pair_noise(&self, zo: usize, zd: usize, bin: usize) -> f64 {
        self.params.noise * signed_unit(mix(&[self.seed, zo as u64, zd as u64, (bin % ORACLE_BINS) as u64]))
    }

    // Days are told apart by weekday and day of month, the only date
    // information a query carries.
    fn day_factor(&self, zo: usize, zd: usize, calendar: &Calendar) -> f64 {
        let day = [self.seed, 0xda7, u64::from(calendar.day_of_week), u64::from(calendar.day_of_month)];
        let zone = |z: usize| signed_unit(mix(&[day[0], day[1], day[2], day[3], z as u64]));
        let citywide = self.params.day_variation * signed_unit(mix(&day));
        1.0 + citywide + self.params.zone_day_variation * (zone(zo) + zone(zd)) / 2.0
    }

    /// Speed multiplier relative to free flow for a trip between `o` and `d`
    /// departing at `calendar`.
    pub fn multiplier(&self, o: GeoPoint, d: GeoPoint, calendar: &Calendar) -> f64 {
        let second_of_day = calendar.second_of_day;
        let p = &self.params;
        let (zo, zd) = (self.zone(o), self.zone(d));
        let point = |pt: GeoPoint, z: usize| {
            if self.is_residential(pt) {
                (p.residential_sensitivity, p.residential_speed_factor)
            } else {
                (self.zone_sensitivity[z], self.zone_bias[z])
            }
        };
        let (so, bo) = point(o, zo);
        let (sd, bd) = point(d, zd);
        let sensitivity = (so + sd) / 2.0;
        let bias = (bo + bd) / 2.0;

        let pos = f64::from(second_of_day) / BIN_SECONDS;
        let bin = (pos as usize).min(ORACLE_BINS - 1);
        let centre_hour = (bin as f64 + 0.5) * BIN_SECONDS / 3600.0;
        let base = daily_curve(centre_hour) * (1.0 + self.bin_jitter[bin]);
        // Smooth in time: interpolate the pair noise between neighbouring bins.
        let frac = pos - bin as f64;
        let noise = (1.0 - frac) * self.pair_noise(zo, zd, bin) + frac * self.pair_noise(zo, zd, bin + 1);

        let day = self.day_factor(zo, zd, calendar);
        (bias * (1.0 + sensitivity * (base - 1.0)) * (1.0 + noise) * day).clamp(0.25, 1.5)
    }

    /// Ground-truth travel for `q`.
    pub fn travel(&self, q: &TravelQuery) -> TravelEstimate {
        if q.origin == q.destination {
            return TravelEstimate::ZERO;
        }
        let distance_m = haversine_unchecked(q.origin, q.destination) * self.params.detour_factor;
        let m = self.multiplier(q.origin, q.destination, &q.calendar);
        TravelEstimate { duration_s: distance_m / (self.params.free_speed * m), distance_m }
    }
}

pub fn oracle_travel(oracle: &TrafficOracle, q: &TravelQuery) -> TravelEstimate {
    oracle.travel(q)
}

/// One observed trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripSample {
    pub query: TravelQuery,
    pub duration_s: f64,
    pub distance_m: f64,
    pub origin_residential: bool,
    pub dest_residential: bool,
}

impl TripSample {
    pub fn avg_speed(&self) -> f64 {
        self.distance_m / self.duration_s
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error(transparent)]
    Region(#[from] GeoError),
    #[error("generation failure: {produced} of {requested} trips within the distance threshold after {attempts} attempts")]
    GenerationFailure { produced: usize, requested: usize, attempts: usize },
    #[error("no trips to fit")]
    Empty,
}

/// Draws `count` trips uniformly over `region` and the year following
/// `start`, keeping only trips whose road distance is at most `max_distance`.
pub fn sample_trips<R: Rng>(
    oracle: &TrafficOracle,
    region: BoundingBox,
    count: usize,
    max_distance: f64,
    start: &HorizonStart,
    rng: &mut R,
) -> Result<Vec<TripSample>, SampleError> {
    let region = BoundingBox::new(region.min, region.max)?;
    let budget = count.saturating_mul(50).max(1000);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts >= budget {
            return Err(SampleError::GenerationFailure { produced: out.len(), requested: count, attempts });
        }
        attempts += 1;
        let o = region.lerp(rng.gen(), rng.gen());
        let d = region.lerp(rng.gen(), rng.gen());
        let depart = rng.gen_range(0..SAMPLE_DAYS * SECONDS_PER_DAY);
        let query = TravelQuery::new(o, d, depart, start);
        let truth = oracle.travel(&query);
        if truth.distance_m <= 0.0 || truth.distance_m > max_distance {
            continue;
        }
        out.push(TripSample {
            query,
            duration_s: truth.duration_s,
            distance_m: truth.distance_m,
            origin_residential: oracle.is_residential(o),
            dest_residential: oracle.is_residential(d),
        });
    }
    Ok(out)
}

/// Fits an hourly speed profile, a detour factor and the residential average
/// speed to observed trips by ratio estimation.
pub fn fit_profile(samples: &[TripSample]) -> Result<TravelModel, SampleError> {
    if samples.is_empty() {
        return Err(SampleError::Empty);
    }
    let mut dist = [0.0f64; 24];
    let mut dur = [0.0f64; 24];
    let (mut road, mut straight) = (0.0, 0.0);
    let (mut res_dist, mut res_dur) = (0.0, 0.0);
    for s in samples {
        let h = usize::from(s.query.calendar.hour) % 24;
        dist[h] += s.distance_m;
        dur[h] += s.duration_s;
        road += s.distance_m;
        straight += haversine_unchecked(s.query.origin, s.query.destination);
        if s.origin_residential && s.dest_residential {
            res_dist += s.distance_m;
            res_dur += s.duration_s;
        }
    }
    let base_speed = dist.iter().sum::<f64>() / dur.iter().sum::<f64>();
    let mut multipliers = [1.0; 24];
    for h in 0..24 {
        if dur[h] > 0.0 {
            multipliers[h] = dist[h] / dur[h] / base_speed;
        }
    }
    let avg_speed = if res_dur > 0.0 { res_dist / res_dur } else { base_speed };
    let detour = (road / straight).max(1.0);
    Ok(TravelModel::profile(SpeedProfile { base_speed, multipliers }, detour, avg_speed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::travel::predict;

    fn oracle() -> TrafficOracle {
        TrafficOracle::new(OracleParams::default(), 7)
    }

    #[test]
    fn deterministic_per_seed() {
        let a = oracle();
        let b = oracle();
        let r = a.params().region;
        let q = TravelQuery::new(r.lerp(0.2, 0.3), r.lerp(0.7, 0.6), 4000, &HorizonStart::default());
        assert_eq!(a.travel(&q), b.travel(&q));
        let c = TrafficOracle::new(OracleParams::default(), 8);
        assert_ne!(a.travel(&q), c.travel(&q));
    }

    #[test]
    fn zero_for_same_point() {
        let o = oracle();
        let p = o.params().region.centroid();
        assert_eq!(o.travel(&TravelQuery::new(p, p, 0, &HorizonStart::default())), TravelEstimate::ZERO);
    }

    #[test]
    fn multipliers_bounded() {
        let o = oracle();
        let r = o.params().region;
        for k in 0..2000u32 {
            let u = f64::from(k % 37) / 36.0;
            let v = f64::from(k % 41) / 40.0;
            let q = TravelQuery::new(r.lerp(u, v), r.lerp(v, u), i64::from(k * 4310), &HorizonStart::default());
            let m = o.multiplier(q.origin, q.destination, &q.calendar);
            assert!((0.25..=1.5).contains(&m));
        }
    }

    #[test]
    fn residential_share_close_to_target() {
        let map = ResidentialMap::generate(BoundingBox::nyc(), 0.6, 14, 3);
        let r = BoundingBox::nyc();
        let hits = (0..10_000)
            .filter(|k| map.is_residential(r.lerp(f64::from(k % 100) / 99.0, f64::from(k / 100) / 99.0)))
            .count();
        assert!((5400..=6600).contains(&hits), "{hits}");
        let none = ResidentialMap::generate(r, 0.0, 14, 3);
        assert!(!none.is_residential(r.centroid()));
    }

    #[test]
    fn sampling_respects_threshold() {
        let o = oracle();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trips = sample_trips(&o, o.params().region, 500, 5000.0, &HorizonStart::default(), &mut rng).unwrap();
        assert_eq!(trips.len(), 500);
        assert!(trips.iter().all(|t| t.distance_m <= 5000.0));
        let all = sample_trips(&o, o.params().region, 200, f64::INFINITY, &HorizonStart::default(), &mut rng).unwrap();
        assert_eq!(all.len(), 200);
    }

    #[test]
    fn zero_threshold_fails() {
        let o = oracle();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = sample_trips(&o, o.params().region, 10, 0.0, &HorizonStart::default(), &mut rng).unwrap_err();
        assert!(matches!(err, SampleError::GenerationFailure { produced: 0, .. }));
    }

    #[test]
    fn degenerate_region_rejected() {
        let o = oracle();
        let p = o.params().region.centroid();
        let bad = BoundingBox { min: p, max: p };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_trips(&o, bad, 10, 1e9, &HorizonStart::default(), &mut rng),
            Err(SampleError::Region(GeoError::DegenerateRegion))
        ));
    }

    // Model fitted on oracle samples tracks the oracle on fresh queries.
    #[test]
    fn fitted_profile_mean_ratio_near_one() {
        let o = oracle();
        let start = HorizonStart::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let train = sample_trips(&o, o.params().region, 20_000, 20_000.0, &start, &mut rng).unwrap();
        let model = fit_profile(&train).unwrap();
        let test = sample_trips(&o, o.params().region, 1000, 20_000.0, &start, &mut rng).unwrap();
        let mean = test.iter().map(|t| t.duration_s / predict(&model, &t.query).duration_s).sum::<f64>() / 1000.0;
        assert!((0.9..=1.1).contains(&mean), "{mean}");
        assert!((model.detour_factor - 1.3).abs() < 1e-9);
    }
}
