//! HTTP client for a NASA-POWER-style daily point endpoint.
//!
//! The endpoint is configurable through [`FetchConfig`] and the
//! `WF_ENDPOINT` environment variable. Offline mode serves the bundled
//! recorded response instead of touching the network.

use crate::catalog::{downloaded_symbols, DOWNLOADED_COUNT};
use crate::error::{Error, Result};
use crate::tile::{Bounds, RawTile, RawYear, DAYS_PER_YEAR};
use chrono::{Datelike, NaiveDate};
use std::time::Duration;

pub const DEFAULT_ENDPOINT: &str = "https://power.larc.nasa.gov/api/temporal/daily/point";
pub const ENDPOINT_ENV: &str = "WF_ENDPOINT";
const FILL_VALUE: f64 = -999.0;

/// Bundled recorded responses: one coordinate (41.5, -93.5), years
/// 2020 (leap, three fill values) and 2021 (complete).
pub const FIXTURE_RESPONSE: &str = include_str!("../fixtures/power_point_2020.json");
pub const FIXTURE_RESPONSE_NEXT: &str = include_str!("../fixtures/power_point_2021.json");
pub const FIXTURE_COORD: (f64, f64) = (41.5, -93.5);
pub const FIXTURE_YEAR: i32 = 2020;

#[derive(Clone, Debug)]
pub struct FetchConfig {
    pub endpoint: String,
    pub offline: bool,
    pub timeout: Duration,
}

impl FetchConfig {
    /// Resolve the endpoint: explicit value, then `WF_ENDPOINT`, then the
    /// default.
    pub fn new(endpoint: Option<String>, offline: bool) -> Self {
        let endpoint = endpoint
            .or_else(|| std::env::var(ENDPOINT_ENV).ok())
            .unwrap_or_else(|| DEFAULT_ENDPOINT.to_string());
        Self {
            endpoint,
            offline,
            timeout: Duration::from_secs(60),
        }
    }
}

/// Fetch one coordinate-year of the 28 downloadable measurements.
pub fn fetch_point(cfg: &FetchConfig, lat: f64, lon: f64, year: i32) -> Result<RawYear> {
    if cfg.offline {
        return parse_point_response(FIXTURE_RESPONSE, FIXTURE_YEAR);
    }
    let url = point_url(&cfg.endpoint, lat, lon, year);
    let client = reqwest::blocking::Client::builder()
        .timeout(cfg.timeout)
        .build()
        .map_err(|e| Error::Endpoint(e.to_string()))?;
    let resp = client
        .get(&url)
        .send()
        .map_err(|e| Error::Endpoint(e.to_string()))?;
    if !resp.status().is_success() {
        return Err(Error::Endpoint(format!("{} returned {}", url, resp.status())));
    }
    let body = resp.text().map_err(|e| Error::Endpoint(e.to_string()))?;
    parse_point_response(&body, year)
}

pub fn point_url(endpoint: &str, lat: f64, lon: f64, year: i32) -> String {
    format!(
        "{endpoint}?parameters={}&latitude={lat}&longitude={lon}&start={year}0101&end={year}1231&community=ag&format=JSON",
        downloaded_symbols().join(",")
    )
}

/// Fetch a whole tile. In offline mode this returns the bundled
/// single-coordinate fixture tile regardless of the requested bounds.
pub fn fetch_tile(cfg: &FetchConfig, bounds: Bounds, years: (i32, i32)) -> Result<RawTile> {
    if cfg.offline {
        return fixture_tile();
    }
    let coords = bounds.grid_coords();
    let mut data = Vec::with_capacity(coords.len());
    for &(lat, lon) in &coords {
        let mut per_year = Vec::new();
        for year in years.0..=years.1 {
            per_year.push(fetch_point(cfg, lat, lon, year)?);
        }
        data.push(per_year);
    }
    Ok(RawTile {
        bounds,
        coords,
        year_start: years.0,
        year_end: years.1,
        data,
    })
}

/// The bundled fixture as a one-coordinate, two-year raw tile. The
/// second year is complete, so the first year's fill values can be
/// imputed from it.
pub fn fixture_tile() -> Result<RawTile> {
    let y0 = parse_point_response(FIXTURE_RESPONSE, FIXTURE_YEAR)?;
    let y1 = parse_point_response(FIXTURE_RESPONSE_NEXT, FIXTURE_YEAR + 1)?;
    let (lat, lon) = FIXTURE_COORD;
    Ok(RawTile {
        bounds: Bounds::tile(lat - 0.5, lon - 0.5),
        coords: vec![FIXTURE_COORD],
        year_start: FIXTURE_YEAR,
        year_end: FIXTURE_YEAR + 1,
        data: vec![vec![y0, y1]],
    })
}

/// Parse a daily point response for one calendar year.
///
/// Every requested measurement must be present, no extra measurements may
/// appear, and every calendar day must be covered; fill values are
/// flagged as missing. Feb 29 of leap years is dropped so every stored
/// year has exactly 365 rows.
pub fn parse_point_response(body: &str, year: i32) -> Result<RawYear> {
    let doc: serde_json::Value = serde_json::from_str(body)?;
    let parameter = doc
        .get("properties")
        .and_then(|p| p.get("parameter"))
        .and_then(|p| p.as_object())
        .ok_or_else(|| Error::SchemaDrift("missing properties.parameter object".into()))?;

    let wanted = downloaded_symbols();
    for key in parameter.keys() {
        if !wanted.contains(&key.as_str()) {
            return Err(Error::SchemaDrift(format!("unknown measurement `{key}`")));
        }
    }

    let dates = year_dates(year)?;
    let mut raw = RawYear::empty();
    for (m, symbol) in wanted.iter().enumerate() {
        let series = parameter
            .get(*symbol)
            .and_then(|s| s.as_object())
            .ok_or_else(|| Error::SchemaDrift(format!("measurement `{symbol}` absent")))?;
        let expected = if is_leap(year) { 366 } else { 365 };
        if series.len() != expected {
            return Err(Error::PartialYear {
                expected,
                got: series.len(),
            });
        }
        for (day, date) in dates.iter().enumerate() {
            let key = format!("{:04}{:02}{:02}", date.year(), date.month(), date.day());
            let v = series
                .get(&key)
                .and_then(|v| v.as_f64())
                .ok_or(Error::PartialYear {
                    expected,
                    got: expected - 1,
                })?;
            if v == FILL_VALUE {
                // leave flagged missing
            } else {
                raw.set(day, m, v);
            }
        }
    }
    debug_assert_eq!(raw.values.len(), DAYS_PER_YEAR * DOWNLOADED_COUNT);
    Ok(raw)
}

fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

/// The 365 stored dates of a year: every calendar day except Feb 29.
fn year_dates(year: i32) -> Result<Vec<NaiveDate>> {
    let start = NaiveDate::from_ymd_opt(year, 1, 1)
        .ok_or_else(|| Error::InvalidArg(format!("year {year}")))?;
    let mut dates = Vec::with_capacity(DAYS_PER_YEAR);
    let mut d = start;
    while d.year() == year {
        if !(d.month() == 2 && d.day() == 29) {
            dates.push(d);
        }
        d = d.succ_opt().expect("date overflow");
    }
    debug_assert_eq!(dates.len(), DAYS_PER_YEAR);
    Ok(dates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_parses_to_365_by_28_with_flagged_missing() {
        let raw = parse_point_response(FIXTURE_RESPONSE, FIXTURE_YEAR).unwrap();
        assert_eq!(raw.values.len(), 365 * 28);
        // the recorded response contains exactly three fill values
        assert_eq!(raw.missing_count(), 3);
        assert!(!raw.is_missing(0, 0));
        // 2020-02-15 is stored day index 45 (Jan has 31 days, Feb 15 is day 46)
        assert!(raw.is_missing(45, 0));
    }

    #[test]
    fn malformed_json_is_an_error_without_partial_data() {
        let r = parse_point_response("{\"properties\": {\"parameter\": 5}}", 2020);
        assert!(matches!(r, Err(Error::SchemaDrift(_))));
        assert!(parse_point_response("not json at all", 2020).is_err());
    }

    #[test]
    fn unknown_measurement_is_schema_drift() {
        let mut doc: serde_json::Value = serde_json::from_str(FIXTURE_RESPONSE).unwrap();
        let params = doc["properties"]["parameter"].as_object_mut().unwrap();
        let t2m = params["T2M"].clone();
        params.insert("MYSTERY_VAR".into(), t2m);
        let body = serde_json::to_string(&doc).unwrap();
        assert!(matches!(
            parse_point_response(&body, FIXTURE_YEAR),
            Err(Error::SchemaDrift(_))
        ));
    }

    #[test]
    fn partial_year_is_rejected() {
        let mut doc: serde_json::Value = serde_json::from_str(FIXTURE_RESPONSE).unwrap();
        let params = doc["properties"]["parameter"].as_object_mut().unwrap();
        params["T2M"].as_object_mut().unwrap().remove("20200601");
        let body = serde_json::to_string(&doc).unwrap();
        assert!(matches!(
            parse_point_response(&body, FIXTURE_YEAR),
            Err(Error::PartialYear { .. })
        ));
    }

    #[test]
    fn offline_mode_returns_the_fixture_tile() {
        let cfg = FetchConfig {
            endpoint: "http://unreachable.invalid".into(),
            offline: true,
            timeout: Duration::from_secs(1),
        };
        let tile = fetch_tile(&cfg, Bounds::tile(0.0, 0.0), (2020, 2020)).unwrap();
        assert_eq!(tile.coords, vec![FIXTURE_COORD]);
        assert_eq!(tile.data[0][0].missing_count(), 3);
        assert_eq!(tile.data[0][1].missing_count(), 0);
    }

    #[test]
    fn point_url_is_parameterized() {
        let url = point_url("http://host/api", 41.5, -93.5, 2020);
        assert!(url.starts_with("http://host/api?parameters=T2M,"));
        assert!(url.contains("latitude=41.5"));
        assert!(url.contains("longitude=-93.5"));
        assert!(url.contains("start=20200101"));
        assert!(url.contains("end=20201231"));
    }

    #[test]
    fn fetch_point_against_a_local_server() {
        use std::io::{Read, Write};
        use std::net::TcpListener;

        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = [0u8; 4096];
            let _ = stream.read(&mut buf);
            let body = FIXTURE_RESPONSE;
            let resp = format!(
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(resp.as_bytes()).unwrap();
        });

        let cfg = FetchConfig {
            endpoint: format!("http://{addr}/api/temporal/daily/point"),
            offline: false,
            timeout: Duration::from_secs(5),
        };
        let raw = fetch_point(&cfg, 41.5, -93.5, 2020).unwrap();
        assert_eq!(raw.missing_count(), 3);
        handle.join().unwrap();
    }

    #[test]
    fn unreachable_endpoint_is_reported() {
        let cfg = FetchConfig {
            endpoint: "http://127.0.0.1:1/api".into(),
            offline: false,
            timeout: Duration::from_millis(200),
        };
        assert!(matches!(
            fetch_point(&cfg, 0.0, 0.0, 2020),
            Err(Error::Endpoint(_))
        ));
    }
}
