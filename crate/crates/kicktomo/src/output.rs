//! CSV series files.
//!
//! Each file starts with `#`-prefixed `key: value` metadata lines, followed by
//! the header `experiment,lambda,delta_lambda,eta,step,value,stderr`. Unused
//! fields are empty. Floats are written with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use kicktomo_core::series::{MetricKind, MetricSeries};

use crate::error::RunError;

pub const HEADER: [&str; 7] = [
    "experiment",
    "lambda",
    "delta_lambda",
    "eta",
    "step",
    "value",
    "stderr",
];

/// Metadata lines written above the header.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvMetadata {
    pub seed: u64,
    pub config_hash: String,
    pub metric: MetricKind,
}

/// One data row as read back from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub experiment: String,
    pub lambda: Option<f64>,
    pub delta_lambda: Option<f64>,
    pub eta: Option<f64>,
    pub step: Option<usize>,
    pub value: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFile {
    pub metadata: BTreeMap<String, String>,
    pub rows: Vec<SeriesRow>,
}

/// `f64` with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn metadata_block(meta: &CsvMetadata) -> String {
    format!(
        "# seed: {}\n# config_hash: {}\n# metric: {}\n# units: {}\n",
        meta.seed,
        meta.config_hash,
        meta.metric.name(),
        meta.metric.units()
    )
}

fn write_rows(
    path: &Path,
    meta: &CsvMetadata,
    rows: impl IntoIterator<Item = [String; 7]>,
) -> Result<(), RunError> {
    let csv_err = |source| RunError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::WriterBuilder::new().from_writer(metadata_block(meta).into_bytes());
    writer.write_record(HEADER).map_err(csv_err)?;
    for row in rows {
        writer.write_record(&row).map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| RunError::io(path, e.into_error()))?;
    fs::write(path, bytes).map_err(|e| RunError::io(path, e))
}

/// Writes `series` with its label in every row. Standard errors are written
/// only for fidelity series.
pub fn write_series(
    path: &Path,
    experiment: &str,
    series: &MetricSeries,
    meta: &CsvMetadata,
) -> Result<(), RunError> {
    let label = series.label;
    let stderr = match (series.metric, &series.stderr) {
        (MetricKind::Fidelity, Some(s)) => Some(s),
        _ => None,
    };
    let rows = series.times.iter().enumerate().map(|(k, &t)| {
        [
            experiment.to_string(),
            opt(label.lambda),
            opt(label.delta_lambda),
            opt(label.eta),
            t.to_string(),
            format_float(series.values[k]),
            opt(stderr.map(|s| s[k])),
        ]
    });
    write_rows(path, meta, rows)
}

/// Writes one row per `(η, value)` pair with an empty step column.
pub fn write_eta_table(
    path: &Path,
    experiment: &str,
    etas: &[f64],
    values: &[f64],
    meta: &CsvMetadata,
) -> Result<(), RunError> {
    let rows = etas.iter().zip(values).map(|(&eta, &v)| {
        [
            experiment.to_string(),
            String::new(),
            String::new(),
            format_float(eta),
            String::new(),
            format_float(v),
            String::new(),
        ]
    });
    write_rows(path, meta, rows)
}

/// Reads a file written by [`write_series`] or [`write_eta_table`].
pub fn read_series(path: &Path) -> Result<SeriesFile, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    let malformed = |message: String| RunError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut metadata = BTreeMap::new();
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.strip_prefix('#') else {
            break;
        };
        body_start += line.len();
        if let Some((k, v)) = rest.trim().split_once(':') {
            metadata.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let mut reader = csv::Reader::from_reader(&text.as_bytes()[body_start..]);
    let header = reader.headers().map_err(|source| RunError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    if header.iter().ne(HEADER) {
        return Err(malformed(format!("unexpected header {header:?}")));
    }
    let float = |s: &str| -> Result<Option<f64>, RunError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| malformed(format!("bad number `{s}`")))
        }
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|source| RunError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let step = match &r[4] {
            "" => None,
            s => Some(
                s.parse()
                    .map_err(|_| malformed(format!("bad step `{s}`")))?,
            ),
        };
        rows.push(SeriesRow {
            experiment: r[0].to_string(),
            lambda: float(&r[1])?,
            delta_lambda: float(&r[2])?,
            eta: float(&r[3])?,
            step,
            value: float(&r[5])?.ok_or_else(|| malformed("missing value".into()))?,
            stderr: float(&r[6])?,
        });
    }
    Ok(SeriesFile { metadata, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use kicktomo_core::series::SeriesLabel;

    fn meta(metric: MetricKind) -> CsvMetadata {
        CsvMetadata {
            seed: 7,
            config_hash: "abc".into(),
            metric,
        }
    }

    #[test]
    fn float_format_round_trips() {
        for v in [1.0, 0.1, -1.0 / 3.0, 1e-300, f64::MAX, 5e-324, 0.0] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn series_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut s = MetricSeries::from_samples(
            MetricKind::Fidelity,
            vec![1, 2],
            &[vec![0.1, 0.7], vec![0.2, 0.3]],
        )
        .unwrap();
        s.label = SeriesLabel {
            lambda: Some(7.0),
            delta_lambda: Some(0.01),
            eta: None,
            seed: Some(7),
        };
        write_series(&path, "fidelity_sweep", &s, &meta(MetricKind::Fidelity)).unwrap();
        let back = read_series(&path).unwrap();
        assert_eq!(back.metadata["seed"], "7");
        assert_eq!(back.metadata["metric"], "fidelity");
        assert_eq!(back.metadata["units"], "dimensionless");
        assert_eq!(back.rows.len(), 2);
        for (k, row) in back.rows.iter().enumerate() {
            assert_eq!(row.value.to_bits(), s.values[k].to_bits());
            assert_eq!(
                row.stderr.unwrap().to_bits(),
                s.stderr.as_ref().unwrap()[k].to_bits()
            );
            assert_eq!(row.lambda, Some(7.0));
            assert_eq!(row.eta, None);
            assert_eq!(row.step, Some(k + 1));
        }
    }

    #[test]
    fn non_fidelity_series_have_empty_stderr() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.csv");
        let mut s =
            MetricSeries::from_samples(MetricKind::Loschmidt, vec![1, 2, 3], &[vec![1.0; 3]])
                .unwrap();
        s.label.lambda = Some(0.5);
        write_series(&path, "loschmidt", &s, &meta(MetricKind::Loschmidt)).unwrap();
        let back = read_series(&path).unwrap();
        assert!(back
            .rows
            .iter()
            .all(|r| r.value == 1.0 && r.stderr.is_none()));
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.lines().nth(4).unwrap() == HEADER.join(","));
    }

    #[test]
    fn eta_table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inset.csv");
        write_eta_table(
            &path,
            "bloch_perturb",
            &[0.0, 0.5],
            &[0.0, 1.25],
            &meta(MetricKind::FrobeniusDistance),
        )
        .unwrap();
        let back = read_series(&path).unwrap();
        assert_eq!(back.rows[1].eta, Some(0.5));
        assert_eq!(back.rows[1].step, None);
        assert_eq!(back.rows[1].value, 1.25);
    }

    #[test]
    fn malformed_files_are_reported_with_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "# seed: 1\na,b\n1,2\n").unwrap();
        let err = read_series(&path).unwrap_err();
        assert!(err.to_string().contains("bad.csv"));
        assert!(read_series(&dir.path().join("missing.csv")).is_err());
    }
}
