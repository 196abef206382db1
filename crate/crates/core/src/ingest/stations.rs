use std::collections::BTreeMap;
use std::io::Write;

use super::{PeriodTag, TripRecord};
use crate::error::Result;

/// Trips originated and terminated at one station within a period.
#[derive(Debug, Clone, PartialEq)]
pub struct StationCount {
    pub station_id: String,
    /// Coordinates as first seen in the trip feed.
    pub lat: f64,
    pub lon: f64,
    pub originated: u64,
    pub terminated: u64,
}

/// Per-station counts over trips starting in `period`, sorted by station id.
pub fn station_counts(trips: &[TripRecord], period: PeriodTag) -> Vec<StationCount> {
    fn slot<'m>(
        map: &'m mut BTreeMap<String, StationCount>,
        id: &str,
        lat: f64,
        lon: f64,
    ) -> &'m mut StationCount {
        map.entry(id.to_string()).or_insert_with(|| StationCount {
            station_id: id.to_string(),
            lat,
            lon,
            originated: 0,
            terminated: 0,
        })
    }

    let mut by_id = BTreeMap::new();
    for trip in trips
        .iter()
        .filter(|t| period.contains(t.start_time.date()))
    {
        slot(
            &mut by_id,
            &trip.start_station_id,
            trip.start_lat,
            trip.start_lon,
        )
        .originated += 1;
        slot(&mut by_id, &trip.end_station_id, trip.end_lat, trip.end_lon).terminated += 1;
    }
    by_id.into_values().collect()
}

/// Writes `station_id,lat,lon,originated,terminated`.
pub fn write_station_counts<W: Write>(counts: &[StationCount], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["station_id", "lat", "lon", "originated", "terminated"])?;
    for c in counts {
        wtr.write_record([
            c.station_id.clone(),
            c.lat.to_string(),
            c.lon.to_string(),
            c.originated.to_string(),
            c.terminated.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
