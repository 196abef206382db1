//! Raw trip, weather and holiday inputs to the hourly feature matrix.
//!
//! Trips are bucketed by their check-out (start) time, keyed by wall-clock
//! date and hour with no daylight-saving normalization. Hours without a
//! single trip produce no row.

mod aggregate;
mod geo;
mod holidays;
mod stations;
mod stats;
mod trips;
mod weather;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, NaiveDateTime, NaiveTime, Timelike};

use crate::error::{Error, Result};
use crate::matrix::{Dataset, DenseMatrix};

pub use aggregate::{aggregate_hourly, Aggregation, AGE_MAX, AGE_MIN};
pub use geo::{haversine_gcd, EARTH_RADIUS_MI};
pub use holidays::{flag_holidays, parse_holidays};
pub use stations::{station_counts, write_station_counts, StationCount};
pub use stats::{descriptive_stats, write_stats_csv, VariableStats};
pub use trips::{parse_trips, TripField, TripParse, TripReject, TripSchema};
pub use weather::{join_weather, parse_weather, WeatherJoin, MAX_FILL_HOURS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UserType {
    Customer,
    Subscriber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gender {
    Unknown,
    Male,
    Female,
}

impl Gender {
    /// Citi Bike coding: 0 unknown, 1 male, 2 female.
    pub fn from_code(code: &str) -> Option<Self> {
        match code.trim() {
            "0" => Some(Gender::Unknown),
            "1" => Some(Gender::Male),
            "2" => Some(Gender::Female),
            _ => None,
        }
    }
}

/// One bikeshare transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct TripRecord {
    pub duration_s: f64,
    pub start_time: NaiveDateTime,
    pub end_time: NaiveDateTime,
    pub start_station_id: String,
    pub end_station_id: String,
    pub start_lat: f64,
    pub start_lon: f64,
    pub end_lat: f64,
    pub end_lon: f64,
    pub user_type: UserType,
    pub gender: Gender,
    pub birth_year: Option<i32>,
}

impl TripRecord {
    pub fn gcd_mi(&self) -> f64 {
        haversine_gcd(self.start_lat, self.start_lon, self.end_lat, self.end_lon)
    }

    /// Age at the calendar year of check-out, when a birth year is known.
    pub fn age(&self) -> Option<i32> {
        self.birth_year.map(|by| self.start_time.year() - by)
    }
}

/// Study period a trip belongs to, by check-out date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PeriodTag {
    PrePandemic,
    Pandemic,
}

impl PeriodTag {
    pub const ALL: [PeriodTag; 2] = [PeriodTag::PrePandemic, PeriodTag::Pandemic];

    /// Inclusive first and last date of the period.
    pub fn date_range(self) -> (NaiveDate, NaiveDate) {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid calendar date");
        match self {
            PeriodTag::PrePandemic => (d(2019, 3, 1), d(2020, 2, 29)),
            PeriodTag::Pandemic => (d(2020, 3, 1), d(2021, 2, 28)),
        }
    }

    pub fn contains(self, date: NaiveDate) -> bool {
        let (first, last) = self.date_range();
        first <= date && date <= last
    }

    pub fn of_date(date: NaiveDate) -> Option<PeriodTag> {
        PeriodTag::ALL.into_iter().find(|p| p.contains(date))
    }

    pub fn name(self) -> &'static str {
        match self {
            PeriodTag::PrePandemic => "pre-pandemic",
            PeriodTag::Pandemic => "pandemic",
        }
    }
}

impl fmt::Display for PeriodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PeriodTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "pre-pandemic" | "prepandemic" | "pre" => Ok(PeriodTag::PrePandemic),
            "pandemic" => Ok(PeriodTag::Pandemic),
            other => Err(Error::validation(format!(
                "unknown period `{other}` (expected pre-pandemic or pandemic)"
            ))),
        }
    }
}

/// Wall-clock civil hour: a date plus an hour 0-23.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HourKey {
    pub date: NaiveDate,
    pub hour: u32,
}

impl HourKey {
    pub fn new(date: NaiveDate, hour: u32) -> Result<Self> {
        if hour > 23 {
            return Err(Error::validation(format!("hour {hour} outside 0-23")));
        }
        Ok(Self { date, hour })
    }

    pub fn of(ts: NaiveDateTime) -> Self {
        Self {
            date: ts.date(),
            hour: ts.hour(),
        }
    }

    pub fn to_datetime(self) -> NaiveDateTime {
        self.date.and_time(
            NaiveTime::from_hms_opt(self.hour, 0, 0).expect("hour checked at construction"),
        )
    }

    pub fn hours_before(self, n: i64) -> Self {
        Self::of(self.to_datetime() - chrono::Duration::hours(n))
    }
}

impl fmt::Display for HourKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}T{:02}", self.date.format("%Y-%m-%d"), self.hour)
    }
}

impl FromStr for HourKey {
    type Err = Error;

    /// Parses `YYYY-MM-DDTHH`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::validation(format!("`{s}` is not an hour of the form YYYY-MM-DDTHH"));
        let (date, hour) = s.split_once('T').ok_or_else(bad)?;
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d").map_err(|_| bad())?;
        let hour: u32 = hour.parse().map_err(|_| bad())?;
        if hour > 23 || s.len() != 13 {
            return Err(bad());
        }
        Ok(Self { date, hour })
    }
}

/// Hourly weather conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weather {
    pub temperature_f: f64,
    pub precipitation_in: f64,
    pub humidity_pct: f64,
    pub wind_mph: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherObservation {
    pub hour: HourKey,
    pub weather: Weather,
}

/// Names of the 18 explanatory variables, in matrix column order.
pub const FEATURE_NAMES: [&str; 18] = [
    "hour_of_day",
    "day_of_week",
    "month",
    "pct_male",
    "pct_female",
    "pct_age_16_24",
    "pct_age_25_44",
    "pct_age_45_64",
    "pct_age_65p",
    "pct_customer",
    "pct_subscriber",
    "avg_gcd_mi",
    "avg_duration_min",
    "temperature_f",
    "precipitation_in",
    "humidity_pct",
    "wind_mph",
    "holiday",
];

pub const TARGET_NAME: &str = "demand";

/// One training sample: demand in a civil hour and its explanatory variables.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyFeatureRow {
    pub hour: HourKey,
    pub demand: u64,
    /// 0 = 12 a.m. ... 23 = 11 p.m.
    pub hour_of_day: u32,
    /// 1 = Monday ... 7 = Sunday.
    pub day_of_week: u32,
    /// 1 = January ... 12 = December.
    pub month: u32,
    pub pct_male: f64,
    pub pct_female: f64,
    pub pct_age_16_24: f64,
    pub pct_age_25_44: f64,
    pub pct_age_45_64: f64,
    pub pct_age_65p: f64,
    pub pct_customer: f64,
    pub pct_subscriber: f64,
    pub avg_gcd_mi: f64,
    pub avg_duration_min: f64,
    /// Unset until [`join_weather`] runs.
    pub weather: Option<Weather>,
    pub holiday: bool,
}

impl HourlyFeatureRow {
    /// Explanatory variables in [`FEATURE_NAMES`] order; `None` while weather is unset.
    pub fn features(&self) -> Option<[f64; 18]> {
        let w = self.weather?;
        Some([
            f64::from(self.hour_of_day),
            f64::from(self.day_of_week),
            f64::from(self.month),
            self.pct_male,
            self.pct_female,
            self.pct_age_16_24,
            self.pct_age_25_44,
            self.pct_age_45_64,
            self.pct_age_65p,
            self.pct_customer,
            self.pct_subscriber,
            self.avg_gcd_mi,
            self.avg_duration_min,
            w.temperature_f,
            w.precipitation_in,
            w.humidity_pct,
            w.wind_mph,
            if self.holiday { 1.0 } else { 0.0 },
        ])
    }

    fn csv_fields(&self) -> Option<Vec<String>> {
        let w = self.weather?;
        Some(vec![
            self.demand.to_string(),
            self.hour_of_day.to_string(),
            self.day_of_week.to_string(),
            self.month.to_string(),
            format!("{:.2}", self.pct_male),
            format!("{:.2}", self.pct_female),
            format!("{:.2}", self.pct_age_16_24),
            format!("{:.2}", self.pct_age_25_44),
            format!("{:.2}", self.pct_age_45_64),
            format!("{:.2}", self.pct_age_65p),
            format!("{:.2}", self.pct_customer),
            format!("{:.2}", self.pct_subscriber),
            format!("{:.4}", self.avg_gcd_mi),
            format!("{:.4}", self.avg_duration_min),
            format!("{:.2}", w.temperature_f),
            format!("{:.3}", w.precipitation_in),
            format!("{:.2}", w.humidity_pct),
            format!("{:.2}", w.wind_mph),
            u8::from(self.holiday).to_string(),
        ])
    }
}

/// Matrix header: the target followed by [`FEATURE_NAMES`].
pub fn matrix_header() -> Vec<&'static str> {
    std::iter::once(TARGET_NAME).chain(FEATURE_NAMES).collect()
}

/// Writes the model matrix. Shares are written with 2 decimals, distance
/// and duration with 4, precipitation with 3 and the other weather fields
/// with 2.
pub fn write_matrix<W: Write>(rows: &[HourlyFeatureRow], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(matrix_header())?;
    for row in rows {
        let fields = row
            .csv_fields()
            .ok_or_else(|| Error::validation(format!("row {} has no weather values", row.hour)))?;
        wtr.write_record(&fields)?;
    }
    wtr.flush()?;
    Ok(())
}

/// In-memory dataset over complete rows, at full precision.
pub fn rows_to_dataset(rows: &[HourlyFeatureRow]) -> Result<Dataset> {
    let mut features = Vec::with_capacity(rows.len());
    for row in rows {
        features.push(
            row.features().ok_or_else(|| {
                Error::validation(format!("row {} has no weather values", row.hour))
            })?,
        );
    }
    let target = rows.iter().map(|r| r.demand as f64).collect();
    Dataset::new(
        TARGET_NAME,
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        DenseMatrix::from_rows(&features)?,
        target,
    )
}

#[derive(Debug, Clone)]
pub struct MatrixBuild {
    /// Rows with weather attached, chronological.
    pub rows: Vec<HourlyFeatureRow>,
    /// Hours dropped for lack of weather.
    pub incomplete: Vec<HourKey>,
    pub outside_period: usize,
}

/// Aggregates trips for `period`, joins weather and flags holidays.
pub fn build_matrix(
    trips: &[TripRecord],
    period: PeriodTag,
    weather: &[WeatherObservation],
    holidays: &std::collections::BTreeSet<NaiveDate>,
) -> Result<MatrixBuild> {
    let agg = aggregate_hourly(trips, period)?;
    let join = join_weather(agg.rows, weather);
    let mut rows = join.complete;
    flag_holidays(&mut rows, holidays);
    if !join.incomplete.is_empty() {
        log::warn!(
            "{} hours dropped for missing weather",
            join.incomplete.len()
        );
    }
    Ok(MatrixBuild {
        rows,
        incomplete: join.incomplete.iter().map(|r| r.hour).collect(),
        outside_period: agg.outside_period,
    })
}

/// Checks that a matrix file carries the canonical 19-column header.
pub fn check_matrix_schema(dataset: &Dataset) -> Result<()> {
    let ok = dataset.target_name == TARGET_NAME
        && dataset.feature_names.len() == FEATURE_NAMES.len()
        && dataset
            .feature_names
            .iter()
            .zip(FEATURE_NAMES)
            .all(|(a, b)| a == b);
    if ok {
        Ok(())
    } else {
        Err(Error::Schema(format!(
            "matrix header `{},{}` does not match `{}`",
            dataset.target_name,
            dataset.feature_names.join(","),
            matrix_header().join(",")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periods_are_contiguous_and_disjoint() {
        let (_, pre_end) = PeriodTag::PrePandemic.date_range();
        let (pan_start, _) = PeriodTag::Pandemic.date_range();
        assert_eq!(pre_end.succ_opt().unwrap(), pan_start);
        assert_eq!(PeriodTag::of_date(pre_end), Some(PeriodTag::PrePandemic));
        assert_eq!(PeriodTag::of_date(pan_start), Some(PeriodTag::Pandemic));
        assert_eq!(
            PeriodTag::of_date(NaiveDate::from_ymd_opt(2019, 2, 28).unwrap()),
            None
        );
        assert_eq!(
            PeriodTag::of_date(NaiveDate::from_ymd_opt(2021, 3, 1).unwrap()),
            None
        );
    }

    #[test]
    fn every_study_day_maps_to_exactly_one_period() {
        let mut d = NaiveDate::from_ymd_opt(2019, 3, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(2021, 2, 28).unwrap();
        while d <= end {
            let n = PeriodTag::ALL.iter().filter(|p| p.contains(d)).count();
            assert_eq!(n, 1, "{d}");
            d = d.succ_opt().unwrap();
        }
    }

    #[test]
    fn hour_key_parse_and_display() {
        let k: HourKey = "2019-06-03T08".parse().unwrap();
        assert_eq!(k.hour, 8);
        assert_eq!(k.to_string(), "2019-06-03T08");
        assert!("2019-06-03T24".parse::<HourKey>().is_err());
        assert!("2019-06-03 08".parse::<HourKey>().is_err());
        assert_eq!(k.hours_before(9).to_string(), "2019-06-02T23");
    }

    #[test]
    fn period_names_parse() {
        assert_eq!(
            "pre-pandemic".parse::<PeriodTag>().unwrap(),
            PeriodTag::PrePandemic
        );
        assert_eq!(
            "Pandemic".parse::<PeriodTag>().unwrap(),
            PeriodTag::Pandemic
        );
        assert!("post".parse::<PeriodTag>().is_err());
    }
}
