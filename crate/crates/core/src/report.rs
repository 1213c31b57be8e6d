//! Report serialization: JSON helpers and the CSV formats.
//!
//! JSON is produced through serde with a fixed field order, and floats are
//! printed in shortest round-trip form, so identical inputs and seeds give
//! byte-identical output. The CSV formats are deliberately small: a header,
//! data rows, and (for orbits) a trailing `# termination=<reason>` comment.

use crate::error::{Error, Result};
use crate::flow::{Orbit, OrbitDirection, Termination};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex number with explicit fields, for stable JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexNumber {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexNumber {
    fn from(z: Complex64) -> Self {
        ComplexNumber { re: z.re, im: z.im }
    }
}

impl From<ComplexNumber> for Complex64 {
    fn from(z: ComplexNumber) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Compact JSON encoding.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report types serialize infallibly")
}

/// JSON encoding with the given indent width (0 = compact).
pub fn to_json_indented<T: Serialize>(value: &T, indent: usize) -> String {
    if indent == 0 {
        return to_json(value);
    }
    let pad = vec![b' '; indent];
    let formatter = serde_json::ser::PrettyFormatter::with_indent(&pad);
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    value.serialize(&mut ser).expect("report types serialize infallibly");
    String::from_utf8(out).expect("serde_json emits utf-8")
}

/// Orbit as CSV: header `t,x1,...,xn`, one row per sample, and a trailing
/// `# termination=<reason>` comment line.
pub fn orbit_to_csv(orbit: &Orbit) -> String {
    let n = orbit.states.first().map_or(0, |s| s.len());
    let mut out = String::from("t");
    for i in 1..=n {
        out.push_str(&format!(",x{i}"));
    }
    out.push('\n');
    for (t, state) in orbit.times.iter().zip(orbit.states.iter()) {
        out.push_str(&format!("{t}"));
        for x in state {
            out.push_str(&format!(",{x}"));
        }
        out.push('\n');
    }
    out.push_str(&format!("# termination={}\n", orbit.termination.reason()));
    out
}

/// Parses an orbit CSV produced by [`orbit_to_csv`]. The direction is not
/// part of the format and must be supplied by the caller.
pub fn orbit_from_csv(text: &str, direction: OrbitDirection) -> Result<Orbit> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut termination: Option<Termination> = None;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty orbit CSV".into()))?;
    if !header.starts_with("t,") && header != "t" {
        return Err(Error::InvalidInput(format!("unexpected orbit CSV header `{header}`")));
    }
    let n = header.split(',').count() - 1;
    for line in lines {
        if let Some(rest) = line.strip_prefix("# termination=") {
            termination = Some(Termination::from_reason(rest.trim())?);
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n + 1 {
            return Err(Error::InvalidInput(format!(
                "orbit CSV row has {} fields, expected {}",
                fields.len(),
                n + 1
            )));
        }
        let mut values = fields.iter().map(|f| {
            f.trim().parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!("orbit CSV field `{f}` is not a number"))
            })
        });
        times.push(values.next().unwrap()?);
        states.push(values.collect::<Result<Vec<f64>>>()?);
    }
    let termination = termination
        .ok_or_else(|| Error::InvalidInput("orbit CSV missing `# termination=` line".into()))?;
    Ok(Orbit {
        times,
        states,
        direction,
        termination,
        limit_point: None,
        convergence_radius: crate::flow::IntegratorConfig::default().convergence_radius,
    })
}

/// Three-column series CSV (`t,observed,bound` and friends).
pub fn series_to_csv(header: &str, rows: &[[f64; 3]]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{},{},{}\n", row[0], row[1], row[2]));
    }
    out
}

/// Parses a three-column series CSV with the expected header.
pub fn series_from_csv(text: &str, header: &str) -> Result<Vec<[f64; 3]>> {
    let mut lines = text.lines();
    let got = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty series CSV".into()))?;
    if got != header {
        return Err(Error::InvalidInput(format!(
            "unexpected series CSV header `{got}`, expected `{header}`"
        )));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "series CSV row has {} fields, expected 3",
                fields.len()
            )));
        }
        let mut row = [0.0; 3];
        for (slot, f) in row.iter_mut().zip(fields.iter()) {
            *slot = f.trim().parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!("series CSV field `{f}` is not a number"))
            })?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// `radius,sup` rows; an empty second field means no finite ratio existed
/// at that radius.
pub fn radius_sup_to_csv(rows: &[(f64, Option<f64>)]) -> String {
    let mut out = String::from("radius,sup\n");
    for (radius, sup) in rows {
        match sup {
            Some(s) => out.push_str(&format!("{radius},{s}\n")),
            None => out.push_str(&format!("{radius},\n")),
        }
    }
    out
}

/// Parses a `radius,sup` CSV produced by [`radius_sup_to_csv`].
pub fn radius_sup_from_csv(text: &str) -> Result<Vec<(f64, Option<f64>)>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty radius-sup CSV".into()))?;
    if header != "radius,sup" {
        return Err(Error::InvalidInput(format!("unexpected header `{header}`")));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (r, s) = line.split_once(',').ok_or_else(|| {
            Error::InvalidInput(format!("radius-sup row `{line}` has no comma"))
        })?;
        let radius = r.trim().parse::<f64>().map_err(|_| {
            Error::InvalidInput(format!("radius `{r}` is not a number"))
        })?;
        let sup = if s.trim().is_empty() {
            None
        } else {
            Some(s.trim().parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!("sup `{s}` is not a number"))
            })?)
        };
        rows.push((radius, sup));
    }
    Ok(rows)
}

/// `radius,k,ratio` rows of a flatness ratio table.
pub fn flatness_to_csv(radii: &[f64], ratio_table: &[Vec<f64>]) -> String {
    let mut out = String::from("radius,k,ratio\n");
    for (radius, row) in radii.iter().zip(ratio_table.iter()) {
        for (k0, ratio) in row.iter().enumerate() {
            out.push_str(&format!("{radius},{},{ratio}\n", k0 + 1));
        }
    }
    out
}
