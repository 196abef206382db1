use std::collections::BTreeMap;
use std::io::Read;

use super::{HourKey, HourlyFeatureRow, Weather, WeatherObservation};
use crate::error::{Error, Result};

/// Longest gap, in hours, bridged by carrying an earlier observation forward.
pub const MAX_FILL_HOURS: i64 = 6;

const WEATHER_HEADER: [&str; 5] = [
    "hour",
    "temperature_f",
    "precipitation_in",
    "humidity_pct",
    "wind_mph",
];

/// Parses `hour,temperature_f,precipitation_in,humidity_pct,wind_mph`.
/// Any invalid row is an error naming its line.
pub fn parse_weather<R: Read>(source: R) -> Result<Vec<WeatherObservation>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header != WEATHER_HEADER {
        return Err(Error::Schema(format!(
            "weather header `{}` does not match `{}`",
            header.join(","),
            WEATHER_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |msg: String| Error::validation(format!("weather line {line}: {msg}"));
        let hour: HourKey = record[0].parse().map_err(|e: Error| err(e.to_string()))?;
        let mut values = [0.0; 4];
        for (i, v) in values.iter_mut().enumerate() {
            let raw = record[i + 1].trim();
            *v = raw
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(format!("{} `{raw}` is not a number", WEATHER_HEADER[i + 1])))?;
        }
        let [temperature_f, precipitation_in, humidity_pct, wind_mph] = values;
        if !(0.0..=100.0).contains(&humidity_pct) {
            return Err(err(format!("humidity {humidity_pct} outside [0, 100]")));
        }
        if precipitation_in < 0.0 {
            return Err(err(format!("negative precipitation {precipitation_in}")));
        }
        if wind_mph < 0.0 {
            return Err(err(format!("negative wind speed {wind_mph}")));
        }
        out.push(WeatherObservation {
            hour,
            weather: Weather {
                temperature_f,
                precipitation_in,
                humidity_pct,
                wind_mph,
            },
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct WeatherJoin {
    /// Rows with weather set, in input order.
    pub complete: Vec<HourlyFeatureRow>,
    /// Rows with no observation at or within [`MAX_FILL_HOURS`] before their hour.
    pub incomplete: Vec<HourlyFeatureRow>,
}

/// Attaches weather to each row: the observation for the same hour if
/// present, else the most recent earlier one at most [`MAX_FILL_HOURS`]
/// back. Later observations are never used. When an hour appears more
/// than once in `observations`, the last one wins.
pub fn join_weather(
    rows: Vec<HourlyFeatureRow>,
    observations: &[WeatherObservation],
) -> WeatherJoin {
    let by_hour: BTreeMap<HourKey, Weather> =
        observations.iter().map(|o| (o.hour, o.weather)).collect();
    let mut out = WeatherJoin::default();
    for mut row in rows {
        let earliest = row.hour.hours_before(MAX_FILL_HOURS);
        let found = by_hour
            .range(earliest..=row.hour)
            .next_back()
            .map(|(_, w)| *w);
        match found {
            Some(w) => {
                row.weather = Some(w);
                out.complete.push(row);
            }
            None => out.incomplete.push(row),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(hour: &str) -> HourlyFeatureRow {
        let key: HourKey = hour.parse().unwrap();
        HourlyFeatureRow {
            hour: key,
            demand: 1,
            hour_of_day: key.hour,
            day_of_week: 1,
            month: 6,
            pct_male: 0.0,
            pct_female: 0.0,
            pct_age_16_24: 0.0,
            pct_age_25_44: 0.0,
            pct_age_45_64: 0.0,
            pct_age_65p: 0.0,
            pct_customer: 0.0,
            pct_subscriber: 100.0,
            avg_gcd_mi: 1.0,
            avg_duration_min: 10.0,
            weather: None,
            holiday: false,
        }
    }

    fn obs(hour: &str, t: f64) -> WeatherObservation {
        WeatherObservation {
            hour: hour.parse().unwrap(),
            weather: Weather {
                temperature_f: t,
                precipitation_in: 0.0,
                humidity_pct: 50.0,
                wind_mph: 3.0,
            },
        }
    }

    #[test]
    fn exact_match() {
        let j = join_weather(vec![row("2019-06-03T08")], &[obs("2019-06-03T08", 70.0)]);
        assert_eq!(j.complete[0].weather.unwrap().temperature_f, 70.0);
        assert!(j.incomplete.is_empty());
    }

    #[test]
    fn prior_observation_wins_over_later() {
        let j = join_weather(
            vec![row("2019-06-03T08")],
            &[obs("2019-06-03T05", 60.0), obs("2019-06-03T09", 75.0)],
        );
        assert_eq!(j.complete[0].weather.unwrap().temperature_f, 60.0);
    }

    #[test]
    fn fill_window_edges() {
        let observations = [obs("2019-06-03T02", 60.0)];
        let j = join_weather(
            vec![row("2019-06-03T08"), row("2019-06-03T09")],
            &observations,
        );
        assert_eq!(j.complete.len(), 1);
        assert_eq!(j.complete[0].hour.to_string(), "2019-06-03T08");
        assert_eq!(j.incomplete[0].hour.to_string(), "2019-06-03T09");
    }

    #[test]
    fn fill_crosses_midnight() {
        let j = join_weather(vec![row("2019-06-04T01")], &[obs("2019-06-03T22", 61.0)]);
        assert_eq!(j.complete.len(), 1);
    }

    #[test]
    fn parse_and_validate() {
        let text = "hour,temperature_f,precipitation_in,humidity_pct,wind_mph\n2019-06-03T08,71.5,0.02,64,5.1\n";
        let obs = parse_weather(text.as_bytes()).unwrap();
        assert_eq!(obs[0].hour.to_string(), "2019-06-03T08");
        assert_eq!(obs[0].weather.precipitation_in, 0.02);

        let bad = "hour,temperature_f,precipitation_in,humidity_pct,wind_mph\n2019-06-03T08,71.5,0.02,101,5.1\n";
        let err = parse_weather(bad.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");

        let wrong_header = "time,temp\n";
        assert!(matches!(
            parse_weather(wrong_header.as_bytes()),
            Err(Error::Schema(_))
        ));
    }
}
