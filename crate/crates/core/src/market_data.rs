//! Ingestion and validation of historical VIX closes and option-price
//! observations. Levels are stored in decimal convention (quoted index / 100)
//! throughout the library.

use std::path::Path;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// Dated sequence of decimal VIX levels, ordered by date with no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSeries {
    pub entries: Vec<(NaiveDate, f64)>,
}

impl MarketSeries {
    /// Validating constructor: sorts by date, rejects duplicate dates and
    /// levels outside the decimal-convention range (0, 2).
    pub fn new(mut entries: Vec<(NaiveDate, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Invalid("no data rows".into()));
        }
        entries.sort_by_key(|(d, _)| *d);
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::Invalid(format!("duplicate date {}", pair[0].0)));
            }
        }
        for (d, level) in &entries {
            if !level.is_finite() || *level <= 0.0 {
                return Err(Error::Invalid(format!("nonpositive level {level} on {d}")));
            }
            if *level >= 2.0 {
                return Err(Error::Invalid(format!(
                    "level {level} on {d} outside decimal range (0, 2)"
                )));
            }
        }
        Ok(MarketSeries { entries })
    }

    pub fn levels(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One calibration row: observation time, decimal VIX, observed call price,
/// and that observation's own time to expiry (years).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionObservation {
    pub t: f64,
    pub vix: f64,
    pub call_price: f64,
    pub tau: f64,
}

/// Load a `date,close` CSV of daily VIX quotes. A header row is optional.
/// Quoted-point levels (> 2) are divided by 100; levels ≤ 2 are taken as
/// already decimal. Rows may appear in any order; output is date-sorted.
pub fn load_vix_csv<P: AsRef<Path>>(path: P) -> Result<MarketSeries> {
    let path = path.as_ref();
    let mut reader = csv_reader(path)?;
    let display = path.display().to_string();
    let mut entries = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: display.clone(),
            line: idx + 1,
            msg: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        let fields: Vec<&str> = record.iter().map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: display.clone(),
                line,
                msg: format!("expected 2 columns (date, close), got {}", fields.len()),
            });
        }
        let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d");
        let level = fields[1].parse::<f64>();
        match (date, level) {
            (Ok(d), Ok(raw)) => {
                // decimal-convention auto-detection
                let v = if raw > 2.0 { raw / 100.0 } else { raw };
                entries.push((d, v));
            }
            (Err(_), Err(_)) if idx == 0 => continue, // header row
            (Err(e), _) => {
                return Err(Error::Parse {
                    path: display.clone(),
                    line,
                    msg: format!("bad date {:?}: {e}", fields[0]),
                })
            }
            (_, Err(e)) => {
                return Err(Error::Parse {
                    path: display.clone(),
                    line,
                    msg: format!("bad level {:?}: {e}", fields[1]),
                })
            }
        }
    }
    MarketSeries::new(entries)
}

/// Serialize a series back to `date,close` CSV (decimal levels, full
/// precision) so that load → write → load is the identity.
pub fn write_vix_csv<P: AsRef<Path>>(series: &MarketSeries, path: P) -> Result<()> {
    let mut out = String::from("date,close\n");
    for (d, v) in &series.entries {
        out.push_str(&format!("{d},{v}\n"));
    }
    std::fs::write(path.as_ref(), out).map_err(|e| Error::Io {
        path: path.as_ref().to_path_buf(),
        source: e,
    })
}

/// Collapse a daily series to one entry per ISO week: the level is the
/// arithmetic mean of that week's levels and the date is the last day
/// present in the week.
pub fn weekly_average(series: &MarketSeries) -> Result<MarketSeries> {
    if series.is_empty() {
        return Err(Error::Invalid("weekly_average of empty series".into()));
    }
    // (ISO year, ISO week) sorts chronologically
    let mut weeks: std::collections::BTreeMap<(i32, u32), (f64, usize, NaiveDate)> =
        std::collections::BTreeMap::new();
    for (d, v) in &series.entries {
        let iso = d.iso_week();
        let slot = weeks.entry((iso.year(), iso.week())).or_insert((0.0, 0, *d));
        slot.0 += v;
        slot.1 += 1;
        if *d > slot.2 {
            slot.2 = *d;
        }
    }
    let entries = weeks
        .into_values()
        .map(|(sum, count, last)| (last, sum / count as f64))
        .collect();
    Ok(MarketSeries { entries })
}

/// Load option observations from a `t,vix,call_price,tau` CSV (all decimal,
/// times in years). A header row is optional.
pub fn load_observations<P: AsRef<Path>>(path: P) -> Result<Vec<OptionObservation>> {
    let path = path.as_ref();
    let mut reader = csv_reader(path)?;
    let display = path.display().to_string();
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: display.clone(),
            line: idx + 1,
            msg: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        let fields: Vec<&str> = record.iter().map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                path: display.clone(),
                line,
                msg: format!(
                    "expected 4 columns (t, vix, call_price, tau), got {}",
                    fields.len()
                ),
            });
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|s| s.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => {
                let obs = OptionObservation {
                    t: vals[0],
                    vix: vals[1],
                    call_price: vals[2],
                    tau: vals[3],
                };
                if !vals.iter().all(|v| v.is_finite()) {
                    return Err(Error::Invalid(format!("non-finite observation at line {line}")));
                }
                if obs.vix <= 0.0 {
                    return Err(Error::Invalid(format!(
                        "observation at line {line}: vix must be positive, got {}",
                        obs.vix
                    )));
                }
                if obs.call_price < 0.0 {
                    return Err(Error::Invalid(format!(
                        "observation at line {line}: negative call price {}",
                        obs.call_price
                    )));
                }
                if obs.tau <= 0.0 {
                    return Err(Error::Invalid(format!(
                        "observation at line {line}: time to expiry must be positive, got {}",
                        obs.tau
                    )));
                }
                rows.push(obs);
            }
            Err(e) if idx == 0 => {
                // header row only if nothing parses as a number
                if fields.iter().any(|s| s.parse::<f64>().is_ok()) {
                    return Err(Error::Parse {
                        path: display.clone(),
                        line,
                        msg: format!("bad number: {e}"),
                    });
                }
            }
            Err(e) => {
                return Err(Error::Parse {
                    path: display.clone(),
                    line,
                    msg: format!("bad number: {e}"),
                })
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Invalid("no data rows".into()));
    }
    Ok(rows)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                let io = match e.into_kind() {
                    csv::ErrorKind::Io(io) => io,
                    _ => unreachable!(),
                };
                Error::Io {
                    path: path.to_path_buf(),
                    source: io,
                }
            }
            _ => Error::Invalid(e.to_string()),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn quoted_points_divided_by_100() {
        let f = temp_csv("date,close\n2022-11-07,24.406\n");
        let s = load_vix_csv(f.path()).unwrap();
        assert_eq!(s.entries.len(), 1);
        assert_eq!(s.entries[0].0, NaiveDate::from_ymd_opt(2022, 11, 7).unwrap());
        assert!((s.entries[0].1 - 0.24406).abs() < 1e-15);
    }

    #[test]
    fn decimal_levels_taken_as_is() {
        let f = temp_csv("2022-11-07,0.24406\n");
        let s = load_vix_csv(f.path()).unwrap();
        assert!((s.entries[0].1 - 0.24406).abs() < 1e-15);
    }

    #[test]
    fn empty_file_is_error() {
        let f = temp_csv("date,close\n");
        let err = load_vix_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("no data rows"), "{err}");
    }

    #[test]
    fn rows_out_of_order_are_sorted() {
        let f1 = temp_csv("2022-01-04,19.0\n2022-01-03,18.0\n");
        let f2 = temp_csv("2022-01-03,18.0\n2022-01-04,19.0\n");
        assert_eq!(load_vix_csv(f1.path()).unwrap(), load_vix_csv(f2.path()).unwrap());
    }

    #[test]
    fn duplicate_date_rejected() {
        let f = temp_csv("2022-01-03,18.0\n2022-01-03,19.0\n");
        assert!(load_vix_csv(f.path()).is_err());
    }

    #[test]
    fn nonpositive_level_rejected() {
        let f = temp_csv("2022-01-03,-5.0\n");
        assert!(load_vix_csv(f.path()).is_err());
        let f = temp_csv("2022-01-03,0.0\n");
        assert!(load_vix_csv(f.path()).is_err());
    }

    #[test]
    fn out_of_range_decimal_rejected() {
        // 250 quoted → 2.5 decimal, outside the (0,2) guard
        let f = temp_csv("2022-01-03,250.0\n");
        assert!(load_vix_csv(f.path()).is_err());
    }

    #[test]
    fn malformed_row_names_line() {
        let f = temp_csv("date,close\n2022-01-03,18.0\nnot-a-date,19.0\n");
        let err = load_vix_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains(":3:"), "{err}");
    }

    #[test]
    fn load_write_load_roundtrip() {
        let f = temp_csv("date,close\n1990-01-02,18.17\n1990-01-03,19.78\n2020-03-16,82.69\n");
        let s = load_vix_csv(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_vix_csv(&s, out.path()).unwrap();
        let s2 = load_vix_csv(out.path()).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn weekly_average_identity_when_one_entry_per_week() {
        // Mondays of consecutive ISO weeks
        let f = temp_csv("2022-11-07,20.0\n2022-11-14,22.0\n2022-11-21,24.0\n");
        let s = load_vix_csv(f.path()).unwrap();
        let w = weekly_average(&s).unwrap();
        assert_eq!(w, s);
    }

    #[test]
    fn weekly_average_means_and_last_day() {
        let f = temp_csv("2022-11-07,20.0\n2022-11-09,22.0\n2022-11-15,30.0\n");
        let s = load_vix_csv(f.path()).unwrap();
        let w = weekly_average(&s).unwrap();
        assert_eq!(w.entries.len(), 2);
        assert_eq!(w.entries[0].0, NaiveDate::from_ymd_opt(2022, 11, 9).unwrap());
        assert!((w.entries[0].1 - 0.21).abs() < 1e-15);
        assert_eq!(w.entries[1].0, NaiveDate::from_ymd_opt(2022, 11, 15).unwrap());
        assert!((w.entries[1].1 - 0.30).abs() < 1e-15);
    }

    #[test]
    fn weekly_average_crosses_iso_year_boundary() {
        // 2022-12-30 (week 52) and 2023-01-02 (ISO week 1 of 2023)
        let f = temp_csv("2022-12-30,20.0\n2023-01-02,24.0\n");
        let s = load_vix_csv(f.path()).unwrap();
        let w = weekly_average(&s).unwrap();
        assert_eq!(w.entries.len(), 2);
    }

    #[test]
    fn week_count_equals_distinct_iso_weeks() {
        let f = temp_csv(
            "2022-11-07,20\n2022-11-08,21\n2022-11-10,22\n2022-11-14,23\n2022-11-18,24\n2022-11-28,25\n",
        );
        let s = load_vix_csv(f.path()).unwrap();
        let w = weekly_average(&s).unwrap();
        assert_eq!(w.entries.len(), 3);
    }

    #[test]
    fn observations_table_roundtrip() {
        let f = temp_csv("t,vix,call_price,tau\n0.000,0.24406,0.07926,0.364\n0.019,0.23886,0.07966,0.345\n");
        let obs = load_observations(f.path()).unwrap();
        assert_eq!(obs.len(), 2);
        assert!((obs[0].vix - 0.24406).abs() < 1e-15);
        assert!((obs[0].call_price - 0.07926).abs() < 1e-15);
        assert!((obs[1].tau - 0.345).abs() < 1e-15);
    }

    #[test]
    fn observations_validation() {
        for bad in [
            "0.0,0.2,-0.01,0.3\n",     // negative price
            "0.0,0.2,0.01,0.0\n",      // zero expiry
            "0.0,-0.2,0.01,0.3\n",     // negative vix
            "0.0,0.2,0.01\n",          // wrong arity
        ] {
            let f = temp_csv(bad);
            assert!(load_observations(f.path()).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_vix_csv("/nonexistent/x.csv").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("/nonexistent/x.csv"));
    }
}
