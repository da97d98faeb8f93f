use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::SessionDataset;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::sampling::Label;
use crate::transfer::SourceSummary;

/// 17 significant digits; parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => parse_err(path, line, format!("{kind:?}")),
    }
}

/// Loads sessions from a directory of `*.csv` files (sorted by name, id =
/// file stem), a single CSV file, or a JSON manifest
/// `{"sessions": [{"session_id": ..., "path": ...}]}` with paths relative to
/// the manifest.
pub fn load_sessions(path: impl AsRef<Path>) -> Result<Vec<SessionDataset>> {
    let path = path.as_ref();
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        let mut files = Vec::new();
        for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
            let p = entry.map_err(|e| Error::io(path, e))?.path();
            if p.is_file() && p.extension().is_some_and(|e| e == "csv") {
                files.push(p);
            }
        }
        files.sort();
        files.iter().map(|f| read_session_csv(f, &stem(f))).collect()
    } else if path.extension().is_some_and(|e| e == "json") {
        load_manifest(path)
    } else {
        Ok(vec![read_session_csv(path, &stem(path))?])
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    sessions: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    session_id: String,
    path: PathBuf,
}

fn load_manifest(path: &Path) -> Result<Vec<SessionDataset>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let m: Manifest =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.line() as u64, e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    m.sessions
        .iter()
        .map(|s| read_session_csv(&base.join(&s.path), &s.session_id))
        .collect()
}

/// Reads one session file with header `label,f1,...,fd`.
pub fn read_session_csv(path: &Path, session_id: &str) -> Result<SessionDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.is_empty() || header.len() < 2 {
        return Err(parse_err(path, 1, "expected header label,f1,...,fd"));
    }
    if &header[0] != "label" {
        return Err(parse_err(path, 1, format!("first column must be `label`, got `{}`", &header[0])));
    }
    for (j, name) in header.iter().enumerate().skip(1) {
        if name != format!("f{j}") {
            return Err(parse_err(path, 1, format!("column {} must be `f{j}`, got `{name}`", j + 1)));
        }
    }
    let d = header.len() - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let label = rec[0]
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(Label::from_u8)
            .ok_or_else(|| parse_err(path, line, format!("label must be 0 or 1, got `{}`", &rec[0])))?;
        labels.push(label);
        for (j, cell) in rec.iter().enumerate().skip(1) {
            let v: f64 = cell.trim().parse().map_err(|_| {
                parse_err(path, line, format!("column f{j}: `{cell}` is not a number"))
            })?;
            values.push(v);
        }
    }
    let features = Matrix::from_row_slice(labels.len(), d, &values);
    SessionDataset::new(session_id, features, labels).map_err(|e| match e {
        Error::InvariantViolation { message, .. } => Error::InvariantViolation {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

pub fn write_session_csv(path: &Path, ds: &SessionDataset) -> Result<()> {
    let mut out = String::from("label");
    for j in 1..=ds.dim() {
        out.push_str(&format!(",f{j}"));
    }
    out.push('\n');
    for i in 0..ds.len() {
        out.push_str(&ds.labels()[i].as_u8().to_string());
        for j in 0..ds.dim() {
            out.push(',');
            out.push_str(&format_float(ds.features()[(i, j)]));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes `<dir>/<session_id>.csv` for every session.
pub fn write_sessions(dir: impl AsRef<Path>, sessions: &[SessionDataset]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for s in sessions {
        write_session_csv(&dir.join(format!("{}.csv", s.session_id())), s)?;
    }
    Ok(())
}

/// One vector per row, no header.
pub fn read_source_vectors(path: impl AsRef<Path>) -> Result<Vec<Vector>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut out: Vec<Vector> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let v = rec
            .iter()
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(path, line, format!("`{c}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(Vector::from_vec(v));
    }
    Ok(out)
}

pub fn write_source_vectors(path: impl AsRef<Path>, vectors: &[Vector]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for v in vectors {
        let row: Vec<_> = v.iter().map(|&x| format_float(x)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AggregateFile {
    d: usize,
    j_count: usize,
    mu_hat: Vec<f64>,
    psi_scale: f64,
    resultant_length: f64,
}

pub fn read_privacy_aggregate(path: impl AsRef<Path>) -> Result<SourceSummary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let a: AggregateFile =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.line() as u64, e.to_string()))?;
    let invalid = |message: String| Error::InvariantViolation {
        path: path.to_path_buf(),
        message,
    };
    if a.mu_hat.len() != a.d {
        return Err(invalid(format!("d = {} but mu_hat has {} entries", a.d, a.mu_hat.len())));
    }
    SourceSummary::new(
        Vector::from_vec(a.mu_hat),
        a.psi_scale,
        a.j_count,
        a.resultant_length,
    )
    .map_err(|e| invalid(e.to_string()))
}

pub fn privacy_aggregate_json(s: &SourceSummary) -> String {
    let mu: Vec<_> = s.mu_hat().iter().map(|&x| format_float(x)).collect();
    format!(
        "{{\n  \"d\": {},\n  \"j_count\": {},\n  \"mu_hat\": [{}],\n  \"psi_scale\": {},\n  \"resultant_length\": {}\n}}\n",
        s.dim(),
        s.j_count(),
        mu.join(", "),
        format_float(s.psi_scale()),
        format_float(s.resultant_length())
    )
}

pub fn write_privacy_aggregate(mut w: impl Write, s: &SourceSummary) -> std::io::Result<()> {
    w.write_all(privacy_aggregate_json(s).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::summarize_sources;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 123456.789, f64::MIN_POSITIVE, 0.0, -0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn session_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_sessions(dir.path()).unwrap().is_empty());
        let m = Matrix::from_fn(6, 2, |i, j| (i as f64 + 0.1) / (j as f64 + 3.0));
        let labels = [0, 1, 0, 1, 1, 0].map(|v| Label::from_u8(v).unwrap()).to_vec();
        let ds = SessionDataset::new("b", m, labels).unwrap();
        let ds2 = SessionDataset::new("a", ds.features() * 2.0, ds.labels().to_vec()).unwrap();
        write_sessions(dir.path(), &[ds.clone(), ds2.clone()]).unwrap();
        let back = load_sessions(dir.path()).unwrap();
        assert_eq!(back, vec![ds2, ds]);

        let bad = dir.path().join("bad.csv");
        fs::write(&bad, "label,f1\n0,1\n1,abc\n").unwrap();
        match read_session_csv(&bad, "bad") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("abc"));
            }
            other => panic!("{other:?}"),
        }
        fs::write(&bad, "label,x\n0,1\n").unwrap();
        assert!(matches!(read_session_csv(&bad, "bad"), Err(Error::Parse { line: 1, .. })));
        fs::write(&bad, "label,f1\n0,1\n1,2\n").unwrap();
        assert!(matches!(
            read_session_csv(&bad, "bad"),
            Err(Error::InvariantViolation { .. })
        ));
    }

    #[test]
    fn manifest() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("x.csv"), "label,f1\n0,1\n1,2\n0,3\n1,4\n").unwrap();
        let man = dir.path().join("m.json");
        fs::write(&man, r#"{"sessions": [{"session_id": "p01", "path": "x.csv"}]}"#).unwrap();
        let s = load_sessions(&man).unwrap();
        assert_eq!(s[0].session_id(), "p01");
        fs::write(&man, r#"{"sessions": [], "extra": 1}"#).unwrap();
        assert!(matches!(load_sessions(&man), Err(Error::Parse { .. })));
    }

    #[test]
    fn aggregate_round_trip() {
        let t = std::f64::consts::PI / 7.0;
        let vs = vec![
            Vector::from_vec(vec![1.0, 0.0, 0.0]),
            Vector::from_vec(vec![t.cos(), t.sin(), 0.0]),
            Vector::from_vec(vec![t.cos(), 0.0, t.sin()]),
        ];
        let s = summarize_sources(&vs).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("agg.json");
        write_privacy_aggregate(fs::File::create(&p).unwrap(), &s).unwrap();
        assert_eq!(read_privacy_aggregate(&p).unwrap(), s);

        let src = dir.path().join("src.csv");
        write_source_vectors(&src, &vs).unwrap();
        assert_eq!(read_source_vectors(&src).unwrap(), vs);
    }
}
