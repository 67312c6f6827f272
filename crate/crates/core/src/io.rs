//! Plain-text tables for spectra, error curves and envelopes.
//!
//! Numbers are written with 12 significant digits.

use std::io::{BufRead, Write};

use crate::envelope::{AlphaGrid, CurveMeta, EnvelopeFamily, ErrorCurve};
use crate::error::{Error, Result};
use crate::spectral::{Spectrum, SpectrumKind, WavelengthGrid};

/// Shortest decimal form of `x` rounded to 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect()
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| parse_err(line, format!("not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {field:?}")));
    }
    Ok(v)
}

// Rows of numeric fields with their line numbers; comments, blanks and a
// leading non-numeric header are skipped.
fn numeric_rows<R: BufRead>(reader: R) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = split_fields(t).into_iter().map(str::to_owned).collect();
        if rows.is_empty() && fields.first().is_some_and(|f| f.parse::<f64>().is_err()) {
            rows.push((0, fields));
            continue;
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

pub fn write_spectrum<W: Write>(w: &mut W, s: &Spectrum) -> Result<()> {
    writeln!(w, "wavelength_nm, intensity")?;
    for (x, y) in s.points() {
        writeln!(w, "{}, {}", fmt_num(x), fmt_num(y))?;
    }
    Ok(())
}

/// Reads a two-column spectrum. Wavelengths must be strictly increasing and
/// uniformly spaced.
pub fn read_spectrum<R: BufRead>(reader: R, kind: SpectrumKind) -> Result<Spectrum> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut last_line = 0;
    for (line, fields) in numeric_rows(reader)? {
        if line == 0 {
            continue;
        }
        if fields.len() != 2 {
            return Err(parse_err(line, format!("expected 2 columns, found {}", fields.len())));
        }
        let x = parse_f64(&fields[0], line)?;
        if let Some(&prev) = xs.last() {
            if x <= prev {
                return Err(parse_err(line, format!("wavelength {x} does not increase (previous {prev})")));
            }
        }
        xs.push(x);
        ys.push(parse_f64(&fields[1], line)?);
        last_line = line;
    }
    if xs.len() < 2 {
        return Err(parse_err(last_line, "spectrum needs at least two nodes"));
    }
    let grid = WavelengthGrid::from_nodes(&xs).map_err(|e| parse_err(last_line, e.to_string()))?;
    Spectrum::new(grid, ys, kind)
}

/// Long-format curve table, one row per `(curve, alpha)`.
pub fn write_curves<W: Write>(w: &mut W, curves: &[ErrorCurve]) -> Result<()> {
    writeln!(w, "log10_alpha, sigma_rel, curve_id")?;
    for c in curves {
        if c.meta.id.is_empty() || c.meta.id.contains([',', ' ', '\t']) {
            return Err(Error::InvalidArgument(format!("curve id {:?} is not a single token", c.meta.id)));
        }
        for (la, s) in c.log10_alphas().iter().zip(c.sigmas()) {
            writeln!(w, "{}, {}, {}", fmt_num(*la), fmt_num(*s), c.meta.id)?;
        }
    }
    Ok(())
}

/// Reads a curve table; curves keep the order of first appearance. A table
/// without the id column holds a single curve.
pub fn read_curves<R: BufRead>(reader: R) -> Result<Vec<ErrorCurve>> {
    let mut order: Vec<String> = Vec::new();
    let mut data: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (line, fields) in numeric_rows(reader)? {
        if line == 0 {
            continue;
        }
        let id = match fields.len() {
            2 => "curve".to_string(),
            3 => fields[2].clone(),
            n => return Err(parse_err(line, format!("expected 2 or 3 columns, found {n}"))),
        };
        let k = match order.iter().position(|o| *o == id) {
            Some(k) => k,
            None => {
                order.push(id);
                data.push((Vec::new(), Vec::new()));
                order.len() - 1
            }
        };
        data[k].0.push(parse_f64(&fields[0], line)?);
        data[k].1.push(parse_f64(&fields[1], line)?);
    }
    if order.is_empty() {
        return Err(parse_err(0, "curve table is empty"));
    }
    order
        .into_iter()
        .zip(data)
        .map(|(id, (la, s))| {
            let grid = AlphaGrid::from_log10(la).map_err(|e| parse_err(0, format!("curve {id}: {e}")))?;
            ErrorCurve::new(grid, s, CurveMeta::named(id))
        })
        .collect()
}

/// Upper boundary alongside the envelope of every `g` in the family.
pub fn write_envelope_table<W: Write>(w: &mut W, upper: &ErrorCurve, family: &EnvelopeFamily) -> Result<()> {
    if upper.grid() != &family.grid {
        return Err(Error::Dimension("envelope family and upper curve use different alpha grids".into()));
    }
    write!(w, "log10_alpha, sigma_rel")?;
    for g in &family.g_values {
        write!(w, ", epsilon_g_{}", fmt_num(*g))?;
    }
    writeln!(w)?;
    for (i, la) in family.grid.log10_values().iter().enumerate() {
        write!(w, "{}, {}", fmt_num(*la), fmt_num(upper.sigmas()[i]))?;
        for col in &family.values {
            write!(w, ", {}", fmt_num(col[i]))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
