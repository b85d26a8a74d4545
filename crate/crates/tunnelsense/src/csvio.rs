//! Two-column time-series CSVs: `time_s,frequency_hz` for carrier traces and
//! `time_s,force_n` for respiration-belt references.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;
use tunnelsense_core::{FrequencyTrace, RespTrace, UniformSeries};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{}: no {column} column", path.display())]
    MissingColumn { path: PathBuf, column: &'static str },
    #[error("{}: time does not increase at data row {row}", path.display())]
    NonMonotonicTime { path: PathBuf, row: usize },
    #[error("{}: need at least 2 rows, found {rows}", path.display())]
    TooFewRows { path: PathBuf, rows: usize },
    #[error("{}: row {row}: {message}", path.display())]
    Parse { path: PathBuf, row: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CsvError {
    pub fn kind(&self) -> &'static str {
        match self {
            CsvError::MissingColumn { .. } => "missing_column",
            CsvError::NonMonotonicTime { .. } => "non_monotonic_time",
            CsvError::TooFewRows { .. } => "too_few_rows",
            CsvError::Parse { .. } => "csv_parse",
            CsvError::Io { .. } => "io",
        }
    }
}

pub const TRACE_COLUMN: &str = "frequency_hz";
pub const FORCE_COLUMN: &str = "force_n";

/// Writes `time_s,<column>` rows. Floats use the shortest representation
/// that parses back to the same value.
pub fn write_series<S: UniformSeries + ?Sized>(path: &Path, column: &str, series: &S) -> Result<(), CsvError> {
    let rows = (0..series.len()).map(|i| (series.time_at(i), series.values()[i]));
    write_pairs(path, &["time_s", column], rows)
}

pub fn write_pairs(path: &Path, header: &[&str; 2], rows: impl Iterator<Item = (f64, f64)>) -> Result<(), CsvError> {
    let io = |source| CsvError::Io { path: path.to_owned(), source };
    let mut out = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
    writeln!(out, "{},{}", header[0], header[1]).map_err(io)?;
    for (t, v) in rows {
        writeln!(out, "{t},{v}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_trace_csv(path: &Path) -> Result<FrequencyTrace, CsvError> {
    let (start_time, sample_interval, values) = read_uniform(path, "frequency", TRACE_COLUMN)?;
    Ok(FrequencyTrace::new(start_time, sample_interval, values))
}

pub fn read_resp_csv(path: &Path) -> Result<RespTrace, CsvError> {
    let (start_time, sample_interval, force_values) = read_uniform(path, "force", FORCE_COLUMN)?;
    Ok(RespTrace {
        start_time,
        sample_interval,
        force_values,
    })
}

/// Reads the time column and the first column whose name contains
/// `needle`, then puts the samples on a uniform grid.
fn read_uniform(path: &Path, needle: &str, column: &'static str) -> Result<(f64, f64, Vec<f64>), CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, 0, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, 0, e))?.clone();
    let find = |pred: &dyn Fn(&str) -> bool| headers.iter().position(|h| pred(&h.to_ascii_lowercase()));
    let t_col = find(&|h| h == "time_s" || h.starts_with("time")).ok_or(CsvError::MissingColumn {
        path: path.to_owned(),
        column: "time_s",
    })?;
    let v_col = find(&|h| h == column || h.contains(needle)).ok_or(CsvError::MissingColumn {
        path: path.to_owned(),
        column,
    })?;

    let mut times = Vec::new();
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, row + 1, e))?;
        let field = |col: usize| -> Result<f64, CsvError> {
            let text = record.get(col).unwrap_or("");
            let v: f64 = text.parse().map_err(|_| CsvError::Parse {
                path: path.to_owned(),
                row: row + 1,
                message: format!("not a number: {text:?}"),
            })?;
            if !v.is_finite() {
                return Err(CsvError::Parse {
                    path: path.to_owned(),
                    row: row + 1,
                    message: format!("non-finite value {text:?}"),
                });
            }
            Ok(v)
        };
        let t = field(t_col)?;
        if let Some(&prev) = times.last() {
            if !(t > prev) {
                return Err(CsvError::NonMonotonicTime { path: path.to_owned(), row: row + 1 });
            }
        }
        times.push(t);
        values.push(field(v_col)?);
    }
    if times.len() < 2 {
        return Err(CsvError::TooFewRows { path: path.to_owned(), rows: times.len() });
    }

    let interval = uniform_interval(&times);
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - interval).abs() <= 1e-6 * interval);
    if uniform {
        return Ok((times[0], interval, values));
    }
    log::info!("{}: non-uniform timestamps, resampling at {interval} s", path.display());
    let span = times[times.len() - 1] - times[0];
    let n = (span / interval + 1e-9).floor() as usize + 1;
    let mut resampled = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let t = times[0] + k as f64 * interval;
        while j + 2 < times.len() && times[j + 1] <= t {
            j += 1;
        }
        let frac = ((t - times[j]) / (times[j + 1] - times[j])).clamp(0.0, 1.0);
        resampled.push(values[j] + frac * (values[j + 1] - values[j]));
    }
    Ok((times[0], interval, resampled))
}

/// Median spacing, rounded to 12 significant digits so decimal intervals
/// written as text (0.1 s, 0.004096 s) come back exact.
fn uniform_interval(times: &[f64]) -> f64 {
    let mut diffs: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    diffs.sort_by(f64::total_cmp);
    let n = diffs.len();
    let median = if n % 2 == 1 {
        diffs[n / 2]
    } else {
        0.5 * (diffs[n / 2 - 1] + diffs[n / 2])
    };
    format!("{median:.11e}").parse().expect("formatted float parses")
}

fn csv_error(path: &Path, row: usize, e: csv::Error) -> CsvError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => CsvError::Io { path: path.to_owned(), source },
            _ => unreachable!("checked is_io_error"),
        }
    } else {
        CsvError::Parse {
            path: path.to_owned(),
            row,
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "r.csv", "time_s,force_n\n0.0,1.5\n0.1,1.6\n0.2,1.4\n");
        let r = read_resp_csv(&p).unwrap();
        assert_eq!(r.force_values, vec![1.5, 1.6, 1.4]);
        assert_eq!(r.sample_interval, 0.1);
    }

    #[test]
    fn ten_hertz_interval_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let body: String = (0..300).map(|k| format!("{},{}\n", k as f64 * 0.1, k % 7)).collect();
        let p = write(&dir, "r.csv", &format!("time_s,force_n\n{body}"));
        assert_eq!(read_resp_csv(&p).unwrap().sample_interval, 0.1);
    }

    #[test]
    fn shuffled_time_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "r.csv", "time_s,force_n\n0.0,1\n0.2,1\n0.1,1\n");
        assert!(matches!(read_resp_csv(&p), Err(CsvError::NonMonotonicTime { row: 3, .. })));
    }

    #[test]
    fn missing_columns_are_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "r.csv", "time_s,voltage\n0,1\n1,2\n");
        assert!(matches!(read_resp_csv(&p), Err(CsvError::MissingColumn { column: "force_n", .. })));
        let p = write(&dir, "s.csv", "t,force_n\n0,1\n1,2\n");
        assert!(matches!(read_resp_csv(&p), Err(CsvError::MissingColumn { column: "time_s", .. })));
        let p = write(&dir, "u.csv", "time_s,force_n\n0,abc\n1,2\n");
        assert!(matches!(read_resp_csv(&p), Err(CsvError::Parse { row: 1, .. })));
    }

    #[test]
    fn uneven_timestamps_are_resampled() {
        let dir = tempfile::tempdir().unwrap();
        // mostly 0.1 s spacing with one late sample
        let p = write(&dir, "r.csv", "Time (s),Force (N)\n0,0\n0.1,1\n0.2,2\n0.35,3.5\n0.4,4\n0.5,5\n");
        let r = read_resp_csv(&p).unwrap();
        assert_eq!(r.sample_interval, 0.1);
        let expected = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(r.force_values.len(), expected.len());
        for (a, b) in r.force_values.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn trace_round_trip(values in proptest::collection::vec(-1e9f64..1e9, 2..200), start in -100.0f64..100.0, rate in prop::sample::select(vec![10.0, 20.0, 244.140625, 50.0])) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("t.csv");
            let t = FrequencyTrace::new(start, 1.0 / rate, values.iter().map(|v| 868e6 + v).collect());
            write_series(&p, TRACE_COLUMN, &t).unwrap();
            let back = read_trace_csv(&p).unwrap();
            prop_assert_eq!(&back.values, &t.values);
            prop_assert_eq!(back.sample_interval, t.sample_interval);
            prop_assert_eq!(back.start_time, t.start_time);
        }
    }
}
