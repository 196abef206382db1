use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read};

use chrono::NaiveDate;

use super::HourlyFeatureRow;
use crate::error::{Error, Result};

/// Reads one `YYYY-MM-DD` per line; blank lines are skipped.
pub fn parse_holidays<R: Read>(source: R) -> Result<BTreeSet<NaiveDate>> {
    let mut out = BTreeSet::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        let date = NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| {
            Error::validation(format!("holiday line {}: `{s}` is not YYYY-MM-DD", i + 1))
        })?;
        out.insert(date);
    }
    Ok(out)
}

/// Sets `holiday` on every row whose date is listed, clears it otherwise.
pub fn flag_holidays(rows: &mut [HourlyFeatureRow], holidays: &BTreeSet<NaiveDate>) {
    for row in rows {
        row.holiday = holidays.contains(&row.hour.date);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{aggregate_hourly, Gender, PeriodTag, TripRecord, UserType};
    use chrono::NaiveDateTime;

    fn rows(starts: &[&str]) -> Vec<HourlyFeatureRow> {
        let trips: Vec<TripRecord> = starts
            .iter()
            .map(|s| {
                let t = NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M").unwrap();
                TripRecord {
                    duration_s: 60.0,
                    start_time: t,
                    end_time: t,
                    start_station_id: "a".into(),
                    end_station_id: "a".into(),
                    start_lat: 40.0,
                    start_lon: -74.0,
                    end_lat: 40.0,
                    end_lon: -74.0,
                    user_type: UserType::Subscriber,
                    gender: Gender::Male,
                    birth_year: None,
                }
            })
            .collect();
        aggregate_hourly(&trips, PeriodTag::PrePandemic)
            .unwrap()
            .rows
    }

    #[test]
    fn every_hour_of_a_listed_date() {
        let mut r = rows(&["2019-07-04 00:10", "2019-07-04 23:10", "2019-07-05 00:10"]);
        let set = parse_holidays("2019-07-04\n\n".as_bytes()).unwrap();
        flag_holidays(&mut r, &set);
        let flags: Vec<bool> = r.iter().map(|x| x.holiday).collect();
        assert_eq!(flags, vec![true, true, false]);
    }

    #[test]
    fn empty_set_clears_all() {
        let mut r = rows(&["2019-07-04 00:10"]);
        r[0].holiday = true;
        flag_holidays(&mut r, &BTreeSet::new());
        assert!(!r[0].holiday);
    }

    #[test]
    fn adjacent_date_not_flagged() {
        let mut r = rows(&["2019-12-26 09:00"]);
        flag_holidays(&mut r, &parse_holidays("2019-12-25".as_bytes()).unwrap());
        assert!(!r[0].holiday);
    }

    #[test]
    fn malformed_line() {
        let err = parse_holidays("2019-07-04\n07/04/2019\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
