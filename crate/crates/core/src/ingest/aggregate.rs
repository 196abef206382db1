use std::collections::BTreeMap;

use chrono::Datelike;

use super::{Gender, HourKey, HourlyFeatureRow, PeriodTag, TripRecord, UserType};
use crate::error::{Error, Result};

/// Youngest age counted in the age-group shares.
pub const AGE_MIN: i32 = 16;
/// Oldest plausible age; older (or missing) birth years leave the age denominator.
pub const AGE_MAX: i32 = 110;

#[derive(Debug, Clone, Default)]
pub struct Aggregation {
    /// One row per civil hour with at least one trip, in chronological order.
    pub rows: Vec<HourlyFeatureRow>,
    /// Trips whose start date falls outside the requested period.
    pub outside_period: usize,
}

#[derive(Default)]
struct HourAccumulator {
    trips: u64,
    male: u64,
    female: u64,
    customer: u64,
    subscriber: u64,
    age_valid: u64,
    // 16-24, 25-44, 45-64, 65+
    age_groups: [u64; 4],
    gcd_sum: f64,
    duration_s_sum: f64,
}

impl HourAccumulator {
    fn add(&mut self, trip: &TripRecord) {
        self.trips += 1;
        match trip.gender {
            Gender::Male => self.male += 1,
            Gender::Female => self.female += 1,
            Gender::Unknown => {}
        }
        match trip.user_type {
            UserType::Customer => self.customer += 1,
            UserType::Subscriber => self.subscriber += 1,
        }
        if let Some(age) = trip.age().filter(|a| (AGE_MIN..=AGE_MAX).contains(a)) {
            self.age_valid += 1;
            let group = match age {
                ..=24 => 0,
                25..=44 => 1,
                45..=64 => 2,
                _ => 3,
            };
            self.age_groups[group] += 1;
        }
        self.gcd_sum += trip.gcd_mi();
        self.duration_s_sum += trip.duration_s;
    }

    fn finish(&self, key: HourKey) -> HourlyFeatureRow {
        let n = self.trips as f64;
        let pct = |count: u64, denom: u64| {
            if denom == 0 {
                0.0
            } else {
                100.0 * count as f64 / denom as f64
            }
        };
        let ages = self.age_groups.map(|c| pct(c, self.age_valid));
        HourlyFeatureRow {
            hour: key,
            demand: self.trips,
            hour_of_day: key.hour,
            day_of_week: key.date.weekday().number_from_monday(),
            month: key.date.month(),
            pct_male: pct(self.male, self.trips),
            pct_female: pct(self.female, self.trips),
            pct_age_16_24: ages[0],
            pct_age_25_44: ages[1],
            pct_age_45_64: ages[2],
            pct_age_65p: ages[3],
            pct_customer: pct(self.customer, self.trips),
            pct_subscriber: pct(self.subscriber, self.trips),
            avg_gcd_mi: self.gcd_sum / n,
            avg_duration_min: self.duration_s_sum / n / 60.0,
            weather: None,
            holiday: false,
        }
    }
}

/// Aggregates trips into citywide hourly rows for `period`, bucketing by
/// start time.
///
/// Gender and user-type shares use every trip in the hour as denominator,
/// so unknown gender leaves `pct_male + pct_female` below 100. Age shares
/// use only trips with an age in `[AGE_MIN, AGE_MAX]`; an hour with no such
/// trip gets all four age shares set to 0.
pub fn aggregate_hourly(trips: &[TripRecord], period: PeriodTag) -> Result<Aggregation> {
    if trips.is_empty() {
        return Err(Error::validation("no trips to aggregate"));
    }
    let mut hours: BTreeMap<HourKey, HourAccumulator> = BTreeMap::new();
    let mut outside_period = 0;
    for trip in trips {
        if !period.contains(trip.start_time.date()) {
            outside_period += 1;
            continue;
        }
        hours
            .entry(HourKey::of(trip.start_time))
            .or_default()
            .add(trip);
    }
    let rows = hours.iter().map(|(key, acc)| acc.finish(*key)).collect();
    Ok(Aggregation {
        rows,
        outside_period,
    })
}
