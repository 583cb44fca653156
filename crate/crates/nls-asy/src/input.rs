//! Parsing of parameter files, comma lists and final-data tables.

use crate::Failure;
use nls_asymptotics::profile::FinalData;
use nls_asymptotics::quadratic_flow::QuadState;
use nls_asymptotics::standard_form::{GeneralCubic, StandardParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;

/// A general cubic system as JSON: `{"lambda": [λ1, ..., λ12]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneralJson {
    pub lambda: [f64; 12],
}

/// Standard parameters as JSON: `{"p": [p1..p5], "q": [q1, q2, q3]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsJson {
    pub p: [f64; 5],
    #[serde(default)]
    pub q: [f64; 3],
}

/// Reads `source` as inline JSON when it starts with `{` and as a file path otherwise.
pub fn read_json_source(source: &str) -> Result<String, Failure> {
    if source.trim_start().starts_with('{') {
        return Ok(source.to_string());
    }
    fs::read_to_string(source).map_err(|e| Failure::input(format!("cannot read {source}: {e}")))
}

pub fn parse_general(source: &str) -> Result<GeneralCubic, Failure> {
    let text = read_json_source(source)?;
    let g: GeneralJson = serde_json::from_str(&text).map_err(|e| Failure::input(format!("malformed general system JSON: {e}")))?;
    Ok(GeneralCubic { lambda: g.lambda })
}

pub fn parse_params(source: &str) -> Result<StandardParams, Failure> {
    let text = read_json_source(source)?;
    let j: ParamsJson = serde_json::from_str(&text).map_err(|e| Failure::input(format!("malformed parameter JSON: {e}")))?;
    Ok(StandardParams::new(j.p, j.q)?)
}

/// Parses a comma-separated list of reals.
pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Failure::input(format!("{what}: cannot parse {s:?}: {e}"))))
        .collect()
}

pub fn parse_fixed<const N: usize>(text: &str, what: &str) -> Result<[f64; N], Failure> {
    let v = parse_list(text, what)?;
    v.try_into().map_err(|v: Vec<f64>| Failure::input(format!("{what}: expected {N} comma-separated numbers, got {}", v.len())))
}

pub fn parse_init(text: &str) -> Result<QuadState, Failure> {
    Ok(QuadState::from_array(parse_fixed::<3>(text, "--init")?))
}

pub fn parse_span(text: &str) -> Result<(f64, f64), Failure> {
    let [a, b] = parse_fixed::<2>(text, "--span")?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Failure::input(format!("--span: need finite a < b, got {a}, {b}")));
    }
    Ok((a, b))
}

/// `a,b,n` into `n` equally spaced points.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let [a, b, n] = parse_fixed::<3>(text, "--x-grid")?;
    if n.fract() != 0.0 || n < 1.0 || !(a <= b) {
        return Err(Failure::input(format!("--x-grid: need a <= b and an integer count >= 1, got {text}")));
    }
    let n = n as usize;
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

/// Reads a final-data table with header `xi,re_a1,im_a1,re_a2,im_a2`.
pub fn parse_final_data(path: &str) -> Result<FinalData, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {path}: {e}")))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Failure::input(format!("{path}: empty file")))?;
    if header.trim() != "xi,re_a1,im_a1,re_a2,im_a2" {
        return Err(Failure::input(format!("{path}: expected header xi,re_a1,im_a1,re_a2,im_a2, got {header}")));
    }
    let (mut xi, mut a1, mut a2) = (Vec::new(), Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let [x, r1, i1, r2, i2] = parse_fixed::<5>(line, &format!("{path} row {}", k + 1))?;
        xi.push(x);
        a1.push(Complex64::new(r1, i1));
        a2.push(Complex64::new(r2, i2));
    }
    Ok(FinalData::new(xi, a1, a2)?)
}
