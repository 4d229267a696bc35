//! Flat key-value model files.
//!
//! ```text
//! # binary state-flipped channel
//! alphabet.x = 0,1
//! alphabet.v = 0,1
//! alphabet.y = 0,1
//! alphabet.z = 0,1
//! pv.0 = 0.5
//! pv.1 = 0.5
//! q1.0|0,0 = 0.9        # Q1(y=0 | x=0, v=0)
//! q2.1|0 = 0.2          # Q2(z=1 | y=0)
//! ```
//!
//! Entries that are not listed are zero. Every row must sum to 1 within
//! `1e-9`. A single line `preset=binary_example p=<f> q=<f>` replaces the
//! whole file.

use std::collections::BTreeMap;

use super::{binary_example_model, ChannelModel, V, X, Y, Z};
use crate::probcore::{Axis, CondPmf, FinitePmf};
use crate::{Error, Result};

const ROW_TOL: f64 = 1e-9;

fn cfg_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn parse_prob(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| cfg_err(line, format!("not a number: {s:?}")))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(cfg_err(line, format!("probability must be nonnegative, got {v}")));
    }
    Ok(v)
}

fn parse_preset(line: usize, text: &str) -> Result<ChannelModel> {
    let mut name = None;
    let mut p = None;
    let mut q = None;
    for tok in text.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| cfg_err(line, format!("expected key=value, got {tok:?}")))?;
        match k {
            "preset" => name = Some(v.to_string()),
            "p" => p = Some(parse_prob(line, v)?),
            "q" => q = Some(parse_prob(line, v)?),
            _ => return Err(cfg_err(line, format!("unknown preset key {k:?}"))),
        }
    }
    match name.as_deref() {
        Some("binary_example") => {
            let p = p.ok_or_else(|| cfg_err(line, "preset needs p"))?;
            let q = q.ok_or_else(|| cfg_err(line, "preset needs q"))?;
            binary_example_model(p, q)
        }
        other => Err(cfg_err(line, format!("unknown preset {other:?}"))),
    }
}

fn position(labels: &[String], l: &str, line: usize, what: &str) -> Result<usize> {
    labels
        .iter()
        .position(|x| x == l)
        .ok_or_else(|| cfg_err(line, format!("unknown {what} label {l:?}")))
}

/// Parse a model file.
pub fn parse_model_config(text: &str) -> Result<ChannelModel> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with("preset") {
            return parse_preset(line, body);
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| cfg_err(line, "expected key = value"))?;
        entries.push((line, k.trim().to_string(), v.trim().to_string()));
    }

    let mut alphabets: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (line, k, v) in &entries {
        if let Some(name) = k.strip_prefix("alphabet.") {
            let key = match name {
                "x" => "x",
                "v" => "v",
                "y" => "y",
                "z" => "z",
                _ => return Err(cfg_err(*line, format!("unknown alphabet {name:?}"))),
            };
            let labels: Vec<String> = v.split(',').map(|s| s.trim().to_string()).collect();
            if labels.iter().any(|l| l.is_empty() || l.contains('|')) {
                return Err(cfg_err(*line, "empty or malformed label"));
            }
            alphabets.insert(key, labels);
        }
    }
    let get = |k: &str| {
        alphabets
            .get(k)
            .cloned()
            .ok_or_else(|| cfg_err(0, format!("missing alphabet.{k}")))
    };
    let (xs, vs, ys, zs) = (get("x")?, get("v")?, get("y")?, get("z")?);
    let (nx, nv, ny, nz) = (xs.len(), vs.len(), ys.len(), zs.len());

    let mut pv = vec![0.0; nv];
    let mut q1 = vec![0.0; nx * nv * ny];
    let mut q2 = vec![0.0; ny * nz];
    for (line, k, v) in &entries {
        let line = *line;
        if k.starts_with("alphabet.") {
            continue;
        } else if let Some(l) = k.strip_prefix("pv.") {
            pv[position(&vs, l, line, "v")?] = parse_prob(line, v)?;
        } else if let Some(rest) = k.strip_prefix("q1.") {
            let (y, cond) = rest
                .split_once('|')
                .ok_or_else(|| cfg_err(line, "q1 key must be q1.<y>|<x>,<v>"))?;
            let (x, vv) = cond
                .split_once(',')
                .ok_or_else(|| cfg_err(line, "q1 key must be q1.<y>|<x>,<v>"))?;
            let (y, x, vv) = (
                position(&ys, y, line, "y")?,
                position(&xs, x, line, "x")?,
                position(&vs, vv, line, "v")?,
            );
            q1[(x * nv + vv) * ny + y] = parse_prob(line, v)?;
        } else if let Some(rest) = k.strip_prefix("q2.") {
            let (z, y) = rest
                .split_once('|')
                .ok_or_else(|| cfg_err(line, "q2 key must be q2.<z>|<y>"))?;
            let (z, y) = (position(&zs, z, line, "z")?, position(&ys, y, line, "y")?);
            q2[y * nz + z] = parse_prob(line, v)?;
        } else {
            return Err(cfg_err(line, format!("unknown key {k:?}")));
        }
    }

    normalize_rows(&mut pv, nv, "pv")?;
    normalize_rows(&mut q1, ny, "q1")?;
    normalize_rows(&mut q2, nz, "q2")?;

    let q1 = CondPmf::new(
        vec![Axis::new(X, xs), Axis::new(V, vs.clone())],
        vec![Axis::new(Y, ys.clone())],
        q1,
    )?;
    let q2 = CondPmf::new(vec![Axis::new(Y, ys)], vec![Axis::new(Z, zs)], q2)?;
    ChannelModel::new(q1, q2, FinitePmf::new(vs, pv)?)
}

fn normalize_rows(data: &mut [f64], width: usize, what: &str) -> Result<()> {
    for (r, row) in data.chunks_mut(width).enumerate() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_TOL {
            return Err(cfg_err(0, format!("{what} row {r} sums to {s}")));
        }
        row.iter_mut().for_each(|p| *p /= s);
    }
    Ok(())
}

/// Serialise a model in the flat format (every entry written out).
pub fn write_model_config(m: &ChannelModel) -> String {
    let mut out = String::new();
    let join = |a: &Axis| a.labels.join(",");
    out.push_str(&format!("alphabet.x = {}\n", join(m.x_axis())));
    out.push_str(&format!("alphabet.v = {}\n", join(m.v_axis())));
    out.push_str(&format!("alphabet.y = {}\n", join(m.y_axis())));
    out.push_str(&format!("alphabet.z = {}\n", join(m.z_axis())));
    for (l, p) in m.pv().labels().iter().zip(m.pv().mass()) {
        out.push_str(&format!("pv.{l} = {p}\n"));
    }
    for (xi, xl) in m.x_axis().labels.iter().enumerate() {
        for (vi, vl) in m.v_axis().labels.iter().enumerate() {
            for (yi, yl) in m.y_axis().labels.iter().enumerate() {
                out.push_str(&format!("q1.{yl}|{xl},{vl} = {}\n", m.q1_at(yi, xi, vi)));
            }
        }
    }
    for (yi, yl) in m.y_axis().labels.iter().enumerate() {
        for (zi, zl) in m.z_axis().labels.iter().enumerate() {
            out.push_str(&format!("q2.{zl}|{yl} = {}\n", m.q2_at(zi, yi)));
        }
    }
    out
}
