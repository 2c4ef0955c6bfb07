//! Trip dataset CSV shared with the model trainer.
//!
//! `depart_s` is the departure's second of the local day, so a row carries
//! its complete calendar and can be replayed as a query without knowing the
//! horizon it was sampled from.

use std::io::{Read, Write};

use anyhow::{ensure, Result};
use serde::{Deserialize, Serialize};
use vrpdt_core::{Calendar, GeoPoint, TravelQuery, TripSample, Weather};

pub const TRIP_COLUMNS: [&str; 30] = [
    "pickup_lon", "pickup_lat", "dropoff_lon", "dropoff_lat", "depart_s", "day_of_week", "day_of_month", "hour",
    "weekend", "work_day", "peak_hour", "public_holiday", "temperature", "dew", "humid", "rain", "snow", "visible",
    "fog", "thunder", "tornado", "clear", "haze", "heavy_rain", "heavy_snow", "light_rain", "light_snow",
    "avg_speed", "trip_miles", "duration_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripRow {
    pub pickup_lon: f64,
    pub pickup_lat: f64,
    pub dropoff_lon: f64,
    pub dropoff_lat: f64,
    pub depart_s: u32,
    pub day_of_week: u8,
    pub day_of_month: u8,
    pub hour: u8,
    pub weekend: u8,
    pub work_day: u8,
    pub peak_hour: u8,
    pub public_holiday: u8,
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
    pub avg_speed: f64,
    pub trip_miles: f64,
    pub duration_s: f64,
}

impl TripRow {
    pub fn from_query(q: &TravelQuery, distance_m: f64, duration_s: f64) -> Self {
        let c = &q.calendar;
        let w = &q.weather;
        let features = q.features(distance_m);
        Self {
            pickup_lon: q.origin.lon,
            pickup_lat: q.origin.lat,
            dropoff_lon: q.destination.lon,
            dropoff_lat: q.destination.lat,
            depart_s: c.second_of_day,
            day_of_week: c.day_of_week,
            day_of_month: c.day_of_month,
            hour: c.hour,
            weekend: c.weekend.into(),
            work_day: c.work_day.into(),
            peak_hour: c.peak_hour.into(),
            public_holiday: c.public_holiday.into(),
            temperature: w.temperature,
            dew: w.dew,
            humid: w.humid,
            rain: w.rain,
            snow: w.snow,
            visible: w.visible,
            fog: w.fog,
            thunder: w.thunder,
            tornado: w.tornado,
            clear: w.clear,
            haze: w.haze,
            heavy_rain: w.heavy_rain,
            heavy_snow: w.heavy_snow,
            light_rain: w.light_rain,
            light_snow: w.light_snow,
            avg_speed: if duration_s > 0.0 { distance_m / duration_s } else { 0.0 },
            trip_miles: features[26],
            duration_s,
        }
    }

    pub fn from_sample(s: &TripSample) -> Self {
        Self::from_query(&s.query, s.distance_m, s.duration_s)
    }

    /// The query this row describes. Its `depart_at` is the second of day.
    pub fn query(&self) -> Result<TravelQuery> {
        ensure!(self.depart_s < 86_400, "depart_s {} is not a second of the day", self.depart_s);
        ensure!(u32::from(self.hour) == self.depart_s / 3600, "hour {} disagrees with depart_s {}", self.hour, self.depart_s);
        ensure!(self.day_of_week < 7, "day_of_week {} out of range", self.day_of_week);
        for (name, v) in [
            ("weekend", self.weekend),
            ("work_day", self.work_day),
            ("peak_hour", self.peak_hour),
            ("public_holiday", self.public_holiday),
        ] {
            ensure!(v <= 1, "{name} must be 0 or 1, found {v}");
        }
        let origin = GeoPoint::new(self.pickup_lat, self.pickup_lon);
        let destination = GeoPoint::new(self.dropoff_lat, self.dropoff_lon);
        origin.validate()?;
        destination.validate()?;
        Ok(TravelQuery {
            origin,
            destination,
            depart_at: i64::from(self.depart_s),
            calendar: Calendar {
                day_of_week: self.day_of_week,
                day_of_month: self.day_of_month,
                hour: self.hour,
                second_of_day: self.depart_s,
                weekend: self.weekend == 1,
                work_day: self.work_day == 1,
                peak_hour: self.peak_hour == 1,
                public_holiday: self.public_holiday == 1,
            },
            weather: Weather {
                temperature: self.temperature,
                dew: self.dew,
                humid: self.humid,
                rain: self.rain,
                snow: self.snow,
                visible: self.visible,
                fog: self.fog,
                thunder: self.thunder,
                tornado: self.tornado,
                clear: self.clear,
                haze: self.haze,
                heavy_rain: self.heavy_rain,
                heavy_snow: self.heavy_snow,
                light_rain: self.light_rain,
                light_snow: self.light_snow,
            },
        })
    }
}

pub fn write_trips<W: Write>(out: W, rows: &[TripRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trips<R: Read>(input: R) -> Result<Vec<TripRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    ensure!(headers == TRIP_COLUMNS, "trip CSV columns must be exactly {}", TRIP_COLUMNS.join(","));
    r.deserialize().map(|row| Ok(row?)).collect()
}
