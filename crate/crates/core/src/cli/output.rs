//! CSV and JSON encodings of grids and truncation plans.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::bounds::TruncationPlan;
use crate::walk::{AmplitudeGrid, Method, WalkSpec};

/// Column header of the amplitude CSV.
pub const GRID_HEADER: &str = "x,t,re,im,prob";
/// Column header of the probability-only CSV written for figure panels.
pub const PROB_HEADER: &str = "x,t,prob";
/// Column header of the truncation report CSV.
pub const PLAN_HEADER: &str = "k,zeta,t_threshold,apriori_bound,fallback_used,epsilon,n,t";

/// C's `%.{precision}g`.
pub fn format_g(value: f64, precision: usize) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if value == 0.0 {
        return if value.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let p = precision.max(1);
    let sci = format!("{:.*e}", p - 1, value);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp) as usize;
        strip_zeros(&format!("{:.*}", decimals, value)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn g15(v: f64) -> String {
    format_g(v, 15)
}

/// `x,t,re,im,prob`, site-major.
pub fn write_grid_csv<W: Write>(out: &mut W, grid: &AmplitudeGrid) -> io::Result<()> {
    writeln!(out, "{GRID_HEADER}")?;
    for (i, &x) in grid.sites.iter().enumerate() {
        for (&t, z) in grid.times.iter().zip(grid.row(i)) {
            writeln!(
                out,
                "{x},{},{},{},{}",
                g15(t),
                g15(z.re),
                g15(z.im),
                g15(z.norm_sqr())
            )?;
        }
    }
    Ok(())
}

/// `x,t,prob`, site-major.
pub fn write_probability_csv<W: Write>(out: &mut W, grid: &AmplitudeGrid) -> io::Result<()> {
    writeln!(out, "{PROB_HEADER}")?;
    for (i, &x) in grid.sites.iter().enumerate() {
        for (&t, z) in grid.times.iter().zip(grid.row(i)) {
            writeln!(out, "{x},{},{}", g15(t), g15(z.norm_sqr()))?;
        }
    }
    Ok(())
}

pub fn write_plan_csv<W: Write>(out: &mut W, plan: &TruncationPlan) -> io::Result<()> {
    writeln!(out, "{PLAN_HEADER}")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        plan.k,
        g15(plan.zeta),
        g15(plan.t_threshold),
        g15(plan.apriori_bound),
        plan.fallback_used,
        g15(plan.epsilon),
        plan.n,
        g15(plan.t)
    )
}

/// JSON shape of an [`AmplitudeGrid`]: `data[i][j] = [re, im]` for
/// `sites[i]`, `times[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDocument {
    pub spec: WalkSpec,
    pub method: Method,
    pub truncation: Option<TruncationPlan>,
    pub sites: Vec<i64>,
    pub times: Vec<f64>,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl From<&AmplitudeGrid> for GridDocument {
    fn from(grid: &AmplitudeGrid) -> Self {
        GridDocument {
            spec: grid.spec,
            method: grid.method,
            truncation: grid.truncation,
            sites: grid.sites.clone(),
            times: grid.times.clone(),
            data: (0..grid.sites.len())
                .map(|i| grid.row(i).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl From<GridDocument> for AmplitudeGrid {
    fn from(doc: GridDocument) -> Self {
        AmplitudeGrid {
            spec: doc.spec,
            sites: doc.sites,
            times: doc.times,
            data: doc
                .data
                .into_iter()
                .flatten()
                .map(|[re, im]| crate::Complex::new(re, im))
                .collect(),
            method: doc.method,
            truncation: doc.truncation,
        }
    }
}

pub fn write_grid_json<W: Write>(out: &mut W, grid: &AmplitudeGrid) -> io::Result<()> {
    serde_json::to_writer(&mut *out, &GridDocument::from(grid))?;
    writeln!(out)
}

pub fn write_plan_json<W: Write>(out: &mut W, plan: &TruncationPlan) -> io::Result<()> {
    serde_json::to_writer(&mut *out, plan)?;
    writeln!(out)
}
