use std::collections::HashMap;
use std::io::Read;

use chrono::NaiveDateTime;

use super::{Gender, TripRecord, UserType};
use crate::error::{Error, Result};

/// Logical trip fields the parser needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TripField {
    Duration,
    StartTime,
    EndTime,
    StartStationId,
    StartLat,
    StartLon,
    EndStationId,
    EndLat,
    EndLon,
    UserType,
    BirthYear,
    Gender,
}

impl TripField {
    pub const ALL: [TripField; 12] = [
        TripField::Duration,
        TripField::StartTime,
        TripField::EndTime,
        TripField::StartStationId,
        TripField::StartLat,
        TripField::StartLon,
        TripField::EndStationId,
        TripField::EndLat,
        TripField::EndLon,
        TripField::UserType,
        TripField::BirthYear,
        TripField::Gender,
    ];

    /// Key used in column-remapping configuration.
    pub fn key(self) -> &'static str {
        match self {
            TripField::Duration => "duration",
            TripField::StartTime => "start_time",
            TripField::EndTime => "end_time",
            TripField::StartStationId => "start_station_id",
            TripField::StartLat => "start_lat",
            TripField::StartLon => "start_lon",
            TripField::EndStationId => "end_station_id",
            TripField::EndLat => "end_lat",
            TripField::EndLon => "end_lon",
            TripField::UserType => "user_type",
            TripField::BirthYear => "birth_year",
            TripField::Gender => "gender",
        }
    }

    /// Column name in the legacy Citi Bike export.
    pub fn legacy_column(self) -> &'static str {
        match self {
            TripField::Duration => "tripduration",
            TripField::StartTime => "starttime",
            TripField::EndTime => "stoptime",
            TripField::StartStationId => "start station id",
            TripField::StartLat => "start station latitude",
            TripField::StartLon => "start station longitude",
            TripField::EndStationId => "end station id",
            TripField::EndLat => "end station latitude",
            TripField::EndLon => "end station longitude",
            TripField::UserType => "usertype",
            TripField::BirthYear => "birth year",
            TripField::Gender => "gender",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        TripField::ALL.into_iter().find(|f| f.key() == key)
    }
}

/// Maps each [`TripField`] to a column header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripSchema {
    columns: HashMap<TripField, String>,
}

impl Default for TripSchema {
    fn default() -> Self {
        Self::legacy()
    }
}

impl TripSchema {
    pub fn legacy() -> Self {
        let columns = TripField::ALL
            .into_iter()
            .map(|f| (f, f.legacy_column().to_string()))
            .collect();
        Self { columns }
    }

    /// Overrides the header for the field named by `key` (see [`TripField::key`]).
    pub fn remap(&mut self, key: &str, column: impl Into<String>) -> Result<()> {
        let field = TripField::from_key(key)
            .ok_or_else(|| Error::validation(format!("unknown trip field `{key}`")))?;
        self.columns.insert(field, column.into());
        Ok(())
    }

    pub fn column(&self, field: TripField) -> &str {
        &self.columns[&field]
    }
}

/// A data row that failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripReject {
    /// 1-based line number in the source, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct TripParse {
    pub trips: Vec<TripRecord>,
    pub rejects: Vec<TripReject>,
}

const TIME_FORMATS: [&str; 5] = [
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%d %H:%M",
    "%m/%d/%Y %H:%M:%S%.f",
    "%m/%d/%Y %H:%M",
    "%Y-%m-%dT%H:%M:%S%.f",
];

fn parse_time(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    TIME_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

fn parse_user_type(s: &str) -> Option<UserType> {
    match s.trim() {
        "Customer" => Some(UserType::Customer),
        "Subscriber" => Some(UserType::Subscriber),
        _ => None,
    }
}

fn parse_birth_year(s: &str) -> std::result::Result<Option<i32>, String> {
    match s.trim() {
        "" | "\\N" | "NULL" | "NA" => Ok(None),
        v => v
            .parse()
            .map(Some)
            .map_err(|_| format!("birth year `{v}` is not an integer")),
    }
}

struct Columns([usize; 12]);

impl Columns {
    fn get<'r>(&self, record: &'r csv::StringRecord, field: TripField) -> &'r str {
        record.get(self.0[field as usize]).unwrap_or("")
    }
}

fn build_trip(
    record: &csv::StringRecord,
    cols: &Columns,
) -> std::result::Result<TripRecord, String> {
    let num = |field: TripField| -> std::result::Result<f64, String> {
        let raw = cols.get(record, field).trim();
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("{} `{raw}` is not a number", field.key()))
    };
    let time = |field: TripField| {
        let raw = cols.get(record, field);
        parse_time(raw)
            .ok_or_else(|| format!("{} `{}` is not a timestamp", field.key(), raw.trim()))
    };

    let duration_s = num(TripField::Duration)?;
    if duration_s <= 0.0 {
        return Err(format!("duration {duration_s} is not positive"));
    }
    let start_time = time(TripField::StartTime)?;
    let end_time = time(TripField::EndTime)?;
    if end_time < start_time {
        return Err("stop time precedes start time".into());
    }
    let start_lat = num(TripField::StartLat)?;
    let start_lon = num(TripField::StartLon)?;
    let end_lat = num(TripField::EndLat)?;
    let end_lon = num(TripField::EndLon)?;
    for lat in [start_lat, end_lat] {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(format!("latitude {lat} out of range"));
        }
    }
    for lon in [start_lon, end_lon] {
        if !(-180.0..=180.0).contains(&lon) {
            return Err(format!("longitude {lon} out of range"));
        }
    }
    let raw_user = cols.get(record, TripField::UserType);
    let user_type = parse_user_type(raw_user)
        .ok_or_else(|| format!("user type `{}` unknown", raw_user.trim()))?;
    let raw_gender = cols.get(record, TripField::Gender);
    let gender = Gender::from_code(raw_gender)
        .ok_or_else(|| format!("gender code `{}` not in {{0,1,2}}", raw_gender.trim()))?;
    let birth_year = parse_birth_year(cols.get(record, TripField::BirthYear))?;

    Ok(TripRecord {
        duration_s,
        start_time,
        end_time,
        start_station_id: cols
            .get(record, TripField::StartStationId)
            .trim()
            .to_string(),
        end_station_id: cols.get(record, TripField::EndStationId).trim().to_string(),
        start_lat,
        start_lon,
        end_lat,
        end_lon,
        user_type,
        gender,
        birth_year,
    })
}

/// Parses comma-separated trip records. Rows that fail validation are
/// returned in [`TripParse::rejects`] with their line number.
pub fn parse_trips<R: Read>(source: R, schema: &TripSchema) -> Result<TripParse> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 12];
    for field in TripField::ALL {
        let name = schema.column(field);
        idx[field as usize] = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("missing required column `{name}`")))?;
    }
    let cols = Columns(idx);

    let mut out = TripParse::default();
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            // malformed CSV framing (e.g. bad UTF-8) is a per-row reject
            Err(e) if !matches!(e.kind(), csv::ErrorKind::Io(_)) => {
                out.rejects.push(TripReject {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e.into()),
        }
        let line = record.position().map_or(line, |p| p.line());
        match build_trip(&record, &cols) {
            Ok(trip) => out.trips.push(trip),
            Err(reason) => out.rejects.push(TripReject { line, reason }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "\"tripduration\",\"starttime\",\"stoptime\",\"start station id\",\"start station name\",\"start station latitude\",\"start station longitude\",\"end station id\",\"end station name\",\"end station latitude\",\"end station longitude\",\"bikeid\",\"usertype\",\"birth year\",\"gender\"\n";

    fn row(gender: &str) -> String {
        format!(
            "215,\"2019-06-03 08:00:29.3930\",\"2019-06-03 08:04:04.8360\",3186,\"Grove St PATH\",40.71958611647166,-74.04311746358871,3270,\"Jersey & 6th St\",40.72528910781132,-74.04557168483734,29270,\"Subscriber\",1992,{gender}\n"
        )
    }

    #[test]
    fn three_valid_rows() {
        let text = format!("{HEADER}{}{}{}", row("1"), row("2"), row("0"));
        let parsed = parse_trips(text.as_bytes(), &TripSchema::legacy()).unwrap();
        assert_eq!(parsed.trips.len(), 3);
        assert!(parsed.rejects.is_empty());
        let t = &parsed.trips[0];
        assert_eq!(t.gender, Gender::Male);
        assert_eq!(t.user_type, UserType::Subscriber);
        assert_eq!(t.birth_year, Some(1992));
        assert_eq!(t.start_station_id, "3186");
        assert_eq!(t.duration_s, 215.0);
    }

    #[test]
    fn bad_gender_code_is_counted() {
        let text = format!("{HEADER}{}{}", row("1"), row("3"));
        let parsed = parse_trips(text.as_bytes(), &TripSchema::legacy()).unwrap();
        assert_eq!(parsed.trips.len(), 1);
        assert_eq!(parsed.rejects.len(), 1);
        assert_eq!(parsed.rejects[0].line, 3);
        assert!(parsed.rejects[0].reason.contains("gender"));
    }

    #[test]
    fn header_only() {
        let parsed = parse_trips(HEADER.as_bytes(), &TripSchema::legacy()).unwrap();
        assert!(parsed.trips.is_empty());
        assert!(parsed.rejects.is_empty());
    }

    #[test]
    fn missing_column_named() {
        let text = HEADER.replace("\"usertype\",", "");
        let err = parse_trips(text.as_bytes(), &TripSchema::legacy()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        assert!(err.to_string().contains("usertype"), "{err}");
    }

    #[test]
    fn remapped_columns() {
        let text = format!("{}{}", HEADER.replace("usertype", "member_type"), row("2"));
        let mut schema = TripSchema::legacy();
        schema.remap("user_type", "member_type").unwrap();
        let parsed = parse_trips(text.as_bytes(), &schema).unwrap();
        assert_eq!(parsed.trips.len(), 1);
        assert!(schema.remap("colour", "x").is_err());
    }

    #[test]
    fn validation_rules() {
        let cases = [
            row("1").replacen("215", "0", 1),
            row("1").replace("2019-06-03 08:04:04.8360", "2019-06-03 07:04:04"),
            row("1").replace("40.71958611647166", "91.0"),
            row("1").replace("\"Subscriber\"", "\"Member\""),
            row("1").replace(",1992,", ",19x2,"),
        ];
        for c in &cases {
            let text = format!("{HEADER}{c}");
            let parsed = parse_trips(text.as_bytes(), &TripSchema::legacy()).unwrap();
            assert_eq!(parsed.rejects.len(), 1, "{c}");
        }
    }

    #[test]
    fn missing_birth_year_is_accepted() {
        let text = format!("{HEADER}{}", row("1").replace(",1992,", ",\\N,"));
        let parsed = parse_trips(text.as_bytes(), &TripSchema::legacy()).unwrap();
        assert_eq!(parsed.trips[0].birth_year, None);
    }

    #[test]
    fn short_legacy_timestamps() {
        let text = format!(
            "{HEADER}{}",
            row("1")
                .replace("\"2019-06-03 08:00:29.3930\"", "\"6/3/2019 08:00\"")
                .replace("\"2019-06-03 08:04:04.8360\"", "\"6/3/2019 08:04:04\"")
        );
        let parsed = parse_trips(text.as_bytes(), &TripSchema::legacy()).unwrap();
        assert!(parsed.rejects.is_empty(), "{:?}", parsed.rejects);
    }
}
