//! Finitely supported functions on `Z^d`, stored on a cube `offset + [0, M)^d`.
//!
//! The same storage doubles as the periodic box `Z_M^d` in torus mode. Values are
//! row-major: the last coordinate varies fastest.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The cube `offset + [0, side)^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxSpec {
    pub side: usize,
    pub offset: Vec<i64>,
}

impl BoxSpec {
    pub fn new(side: usize, offset: Vec<i64>) -> Self {
        assert!(side >= 1, "box side must be positive");
        assert!(!offset.is_empty(), "box must have at least one dimension");
        BoxSpec { side, offset }
    }

    /// The cube `[-r, r]^d`.
    pub fn centered(d: usize, r: u64) -> Self {
        BoxSpec::new(2 * r as usize + 1, vec![-(r as i64); d])
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn cells(&self) -> usize {
        self.side.pow(self.dim() as u32)
    }

    /// Checked cell count.
    pub fn checked_cells(&self) -> Option<usize> {
        self.side.checked_pow(self.dim() as u32)
    }

    /// The box grown by `r` on every side.
    pub fn enlarged(&self, r: u64) -> BoxSpec {
        BoxSpec::new(
            self.side + 2 * r as usize,
            self.offset.iter().map(|o| o - r as i64).collect(),
        )
    }

    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (&xi, &oi) in x.iter().zip(&self.offset) {
            let t = xi - oi;
            if t < 0 || t >= self.side as i64 {
                return None;
            }
            idx = idx * self.side + t as usize;
        }
        Some(idx)
    }

    pub fn point_of(&self, mut idx: usize) -> Vec<i64> {
        let d = self.dim();
        let mut x = vec![0i64; d];
        for c in (0..d).rev() {
            x[c] = self.offset[c] + (idx % self.side) as i64;
            idx /= self.side;
        }
        x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    bx: BoxSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(bx: BoxSpec) -> Self {
        let n = bx.cells();
        GridFunction {
            bx,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(bx: BoxSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != bx.cells() {
            return Err(Error::Precondition(format!(
                "box has {} cells but {} values were given",
                bx.cells(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("grid values must be finite".into()));
        }
        Ok(GridFunction { bx, values })
    }

    /// The delta function at the origin on a one-cell box.
    pub fn delta(d: usize) -> Self {
        GridFunction {
            bx: BoxSpec::new(1, vec![0; d]),
            values: vec![1.0],
        }
    }

    /// The indicator of the closed ball `{|x|^2 <= r^2}` on the box `[-r, r]^d`.
    pub fn ball_indicator(d: usize, r: u64) -> Self {
        let bx = BoxSpec::centered(d, r);
        let r2 = (r * r) as i64;
        let values = (0..bx.cells())
            .map(|i| {
                let x = bx.point_of(i);
                if x.iter().map(|v| v * v).sum::<i64>() <= r2 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        GridFunction { bx, values }
    }

    pub fn box_spec(&self) -> &BoxSpec {
        &self.bx
    }

    pub fn dim(&self) -> usize {
        self.bx.dim()
    }

    pub fn side(&self) -> usize {
        self.bx.side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `f(x)`, zero outside the box.
    pub fn get(&self, x: &[i64]) -> f64 {
        self.bx.index_of(x).map_or(0.0, |i| self.values[i])
    }

    pub fn set(&mut self, x: &[i64], v: f64) -> Result<()> {
        let i = self
            .bx
            .index_of(x)
            .ok_or_else(|| Error::Precondition(format!("point {x:?} outside the box")))?;
        self.values[i] = v;
        Ok(())
    }

    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Copies the function onto another box, dropping whatever falls outside it.
    pub fn restricted_to(&self, bx: BoxSpec) -> GridFunction {
        let mut out = GridFunction::zeros(bx);
        for (i, &v) in self.values.iter().enumerate() {
            if v != 0.0 {
                let x = self.bx.point_of(i);
                if let Some(j) = out.bx.index_of(&x) {
                    out.values[j] = v;
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        let mut m: f64 = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            m = m.max((v - other.get(&self.bx.point_of(i))).abs());
        }
        for (i, &v) in other.values.iter().enumerate() {
            if self.bx.index_of(&other.bx.point_of(i)).is_none() {
                m = m.max(v.abs());
            }
        }
        m
    }
}

/// Rejects exponents outside `[1, ∞]`.
pub fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::InvalidExponent(format!(
            "p={p} must satisfy 1 <= p <= infinity"
        )))
    } else {
        Ok(())
    }
}

/// `‖v‖_p` under counting measure; `p = f64::INFINITY` gives the max modulus.
pub fn lp_norm_slice(values: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    let s: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
    Ok(max * s.powf(1.0 / p))
}

/// `(Σ w_i |v_i|^p)^{1/p}` with nonnegative weights (orbit-reduced storage).
pub fn weighted_lp_norm(values: &[f64], weights: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    let s: f64 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v.abs() / max).powf(p))
        .sum();
    Ok(max * s.powf(1.0 / p))
}

pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    lp_norm_slice(&f.values, p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridFormat {
    /// Header line, then one value per line.
    Csv,
    /// Header line, then little-endian `f64`s.
    Raw,
}

fn header(f: &GridFunction) -> String {
    let off: Vec<String> = f.bx.offset.iter().map(i64::to_string).collect();
    format!("grid d={} M={} offset={}", f.dim(), f.side(), off.join(","))
}

pub fn write_grid<W: Write>(f: &GridFunction, format: GridFormat, mut out: W) -> Result<()> {
    writeln!(out, "{}", header(f))?;
    match format {
        GridFormat::Csv => {
            for v in &f.values {
                writeln!(out, "{v:e}")?;
            }
        }
        GridFormat::Raw => {
            for v in &f.values {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn parse_grid_header(line: &str, at: usize) -> Result<BoxSpec> {
    let mut it = line.split_whitespace();
    if it.next() != Some("grid") {
        return Err(Error::parse(at, "header must start with `grid`"));
    }
    let mut field = |key: &str| -> Result<String> {
        let tok = it
            .next()
            .ok_or_else(|| Error::parse(at, format!("missing `{key}=`")))?;
        tok.strip_prefix(&format!("{key}="))
            .map(str::to_owned)
            .ok_or_else(|| Error::parse(at, format!("expected `{key}=`, found `{tok}`")))
    };
    let d: usize = field("d")?
        .parse()
        .map_err(|e| Error::parse(at, format!("bad d: {e}")))?;
    let side: usize = field("M")?
        .parse()
        .map_err(|e| Error::parse(at, format!("bad M: {e}")))?;
    let offset: Vec<i64> = field("offset")?
        .split(',')
        .map(|t| {
            t.parse()
                .map_err(|e| Error::parse(at, format!("bad offset: {e}")))
        })
        .collect::<Result<_>>()?;
    if offset.len() != d || d == 0 || side == 0 {
        return Err(Error::parse(
            at,
            "offset length must equal d, and d, M must be positive",
        ));
    }
    Ok(BoxSpec::new(side, offset))
}

pub fn read_grid<R: BufRead>(mut input: R, format: GridFormat) -> Result<GridFunction> {
    let mut line = String::new();
    let mut at = 0;
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Err(Error::parse(at + 1, "missing `grid` header"));
        }
        at += 1;
        if !line.starts_with('#') {
            break;
        }
    }
    let bx = parse_grid_header(line.trim_end(), at)?;
    let n = bx
        .checked_cells()
        .ok_or_else(|| Error::parse(at, "box too large"))?;
    let values = match format {
        GridFormat::Csv => {
            let mut vals = Vec::with_capacity(n);
            for (i, l) in input.lines().enumerate() {
                let l = l?;
                let t = l.trim();
                if t.is_empty() {
                    continue;
                }
                vals.push(
                    t.parse::<f64>()
                        .map_err(|e| Error::parse(at + i + 1, format!("bad value `{t}`: {e}")))?,
                );
            }
            vals
        }
        GridFormat::Raw => {
            let mut bytes = Vec::new();
            input.read_to_end(&mut bytes)?;
            if bytes.len() != 8 * n {
                return Err(Error::parse(
                    at + 1,
                    format!("expected {} bytes, found {}", 8 * n, bytes.len()),
                ));
            }
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect()
        }
    };
    if values.len() != n {
        return Err(Error::parse(
            at + n,
            format!("expected {n} values, found {}", values.len()),
        ));
    }
    GridFunction::from_values(bx, values)
}
