//! Measure JSON and trajectory CSV files.
//!
//! Trajectory rows are `t,atom,x0..x{D-1},v0..v{D-1}`, one row per atom per
//! time, times in increasing order and atoms in index order within a time.
//! Velocity columns may be omitted. Weights are not part of the schema.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::calculus::MeasureCurve;
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, MeasureJson};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_measure(bytes: &[u8]) -> Result<DiscreteMeasure> {
    let json: MeasureJson =
        serde_json::from_slice(bytes).map_err(|e| Error::Invalid(format!("bad measure JSON: {e}")))?;
    DiscreteMeasure::try_from(json)
}

pub fn measure_to_json(mu: &DiscreteMeasure) -> String {
    serde_json::to_string(&mu.to_json()).expect("measures serialize")
}

/// Parse a trajectory CSV; `weights` defaults to uniform.
pub fn parse_curve(bytes: &[u8], weights: Option<Vec<f64>>) -> Result<MeasureCurve> {
    let bad = |msg: String| Error::Invalid(format!("bad curve CSV: {msg}"));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    if header.len() < 3 || header[0] != "t" || header[1] != "atom" {
        return Err(bad("header must start with t,atom".into()));
    }
    let xs = header[2..].iter().take_while(|h| h.starts_with('x')).count();
    let vs = header.len() - 2 - xs;
    if xs == 0 || (vs != 0 && vs != xs) {
        return Err(bad(format!(
            "expected x0..x{{D-1}} and optionally v0..v{{D-1}}, got {header:?}"
        )));
    }
    for k in 0..xs {
        if header[2 + k] != format!("x{k}") || (vs > 0 && header[2 + xs + k] != format!("v{k}")) {
            return Err(bad(format!("unexpected column names {header:?}")));
        }
    }
    let mut times: Vec<f64> = Vec::new();
    let mut positions: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut velocities: Vec<Vec<Vec<f64>>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            record
                .get(k)
                .ok_or_else(|| bad(format!("row {} is short", line + 2)))?
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: {e}", line + 2)))
        };
        let t = num(0)?;
        let atom: usize = record[1]
            .parse()
            .map_err(|e| bad(format!("row {}: atom index: {e}", line + 2)))?;
        if times.last() != Some(&t) {
            times.push(t);
            positions.push(Vec::new());
            velocities.push(Vec::new());
        }
        let k = times.len() - 1;
        if atom != positions[k].len() {
            return Err(bad(format!("row {}: atom {atom} out of order at t = {t}", line + 2)));
        }
        positions[k].push((0..xs).map(|c| num(2 + c)).collect::<Result<_>>()?);
        if vs > 0 {
            velocities[k].push((0..xs).map(|c| num(2 + xs + c)).collect::<Result<_>>()?);
        }
    }
    if times.is_empty() {
        return Err(bad("no rows".into()));
    }
    let n = positions[0].len();
    if let Some(p) = positions.iter().find(|p| p.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: p.len(),
        });
    }
    let weights = weights.unwrap_or_else(|| vec![1.0 / n as f64; n]);
    MeasureCurve::new(times, weights, positions, (vs > 0).then_some(velocities))
}

pub fn read_curve(path: &Path, weights: Option<Vec<f64>>) -> Result<MeasureCurve> {
    parse_curve(&read_bytes(path)?, weights)
}

/// Serialize a curve in the trajectory schema.
pub fn curve_to_csv(curve: &MeasureCurve) -> String {
    let d = curve.dim();
    let mut header = vec!["t".to_string(), "atom".to_string()];
    header.extend((0..d).map(|k| format!("x{k}")));
    if curve.has_velocities() {
        header.extend((0..d).map(|k| format!("v{k}")));
    }
    let mut out = header.join(",");
    out.push('\n');
    for (k, &t) in curve.times().iter().enumerate() {
        for i in 0..curve.n_atoms() {
            let mut row = vec![fmt_f64(t), i.to_string()];
            row.extend(curve.measure(k).atom(i).iter().map(|&c| fmt_f64(c)));
            if let Some(v) = curve.velocity(k) {
                row.extend(v.vector(i).iter().map(|&c| fmt_f64(c)));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linspace;

    #[test]
    fn curve_csv_round_trip() {
        let c = MeasureCurve::from_trajectory(
            linspace(0.0, 1.0, 5),
            vec![0.25, 0.75],
            |t| vec![vec![t.sin(), 1.0 / 3.0], vec![-t, t * t]],
            |t| vec![vec![t.cos(), 0.0], vec![-1.0, 2.0 * t]],
        )
        .unwrap();
        let text = curve_to_csv(&c);
        assert!(text.starts_with("t,atom,x0,x1,v0,v1\n"));
        let back = parse_curve(text.as_bytes(), Some(vec![0.25, 0.75])).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn velocities_are_optional() {
        let text = "t,atom,x0\n0,0,1\n0,1,2\n1,0,1.5\n1,1,2.5\n";
        let c = parse_curve(text.as_bytes(), None).unwrap();
        assert!(!c.has_velocities());
        assert_eq!(c.weights(), &[0.5, 0.5]);
        assert_eq!(c.measure(1).atom(1), &[2.5]);
    }

    #[test]
    fn malformed_curves_are_rejected() {
        assert!(parse_curve(b"time,atom,x0\n0,0,1\n", None).is_err());
        assert!(parse_curve(b"t,atom,x0\n0,1,1\n", None).is_err());
        assert!(parse_curve(b"t,atom,x0,v0,v1\n0,0,1,1,1\n", None).is_err());
        assert!(parse_curve(b"t,atom,x0\n0,0,1\n0,1,2\n1,0,1\n", None).is_err());
        assert!(parse_curve(b"t,atom,x0\n0,0,abc\n", None).is_err());
    }

    #[test]
    fn measure_json_round_trip() {
        let text = r#"{"weights": [0.5, 0.5], "atoms": [[0, 0], [3, 4]], "dimension": 2}"#;
        let mu = parse_measure(text.as_bytes()).unwrap();
        assert_eq!(mu.atom(1), &[3.0, 4.0]);
        assert_eq!(parse_measure(measure_to_json(&mu).as_bytes()).unwrap(), mu);
        assert!(parse_measure(br#"{"dimension": 3, "atoms": [[0, 0]], "weights": [1]}"#).is_err());
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
