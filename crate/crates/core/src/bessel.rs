//! Integer-order Bessel functions of the first kind.
//!
//! `J_0(x) ..= J_n(x)` for real `x >= 0` come from a single Miller backward
//! recurrence normalised with `J_0 + 2 Σ J_2k = 1`. The recurrence is started
//! above both the highest requested order and the argument, so the same code
//! path serves the oscillatory region (`n < x`) and the evanescent one.
//!
//! [`bessel_j_integral_oracle`] evaluates the integral representation
//! `J_n(x) = (i^-n / π) ∫_0^π e^{ix cos w} cos(nw) dw` by the trapezoidal rule
//! and shares no code with the recurrence; it exists for cross-checking.

use crate::error::{Error, Result};
use crate::Complex;

/// Largest order a batch may request unless a caller overrides it.
pub const DEFAULT_MAX_ORDER: usize = 10_000;

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// Below this argument the leading power-series term is exact in `f64`.
const TINY_ARGUMENT: f64 = 1e-10;

/// Quadrature nodes used by [`bessel_j_integral_oracle`].
pub const ORACLE_NODES: usize = 4000;
const ORACLE_MAX_ORDER: usize = 50;
const ORACLE_MAX_ARGUMENT: f64 = 50.0;

/// `J_0(x) ..= J_{max_order}(x)` at a single argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselBatch {
    argument: f64,
    values: Vec<f64>,
}

impl BesselBatch {
    pub fn argument(&self) -> f64 {
        self.argument
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    /// Values indexed by order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `J_n` for `n <= max_order`.
    ///
    /// Panics if `n` exceeds the batch.
    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }

    /// `i^n J_n`.
    pub fn tilde(&self, n: usize) -> Complex {
        i_pow(n) * self.values[n]
    }

    /// Multiplies one stored value by `factor`.
    ///
    /// Fault-injection hook for the verification suite; never used by the
    /// evaluators themselves.
    pub fn scale_value(&mut self, n: usize, factor: f64) {
        self.values[n] *= factor;
    }
}

/// `i^n`, exact.
pub fn i_pow(n: usize) -> Complex {
    match n % 4 {
        0 => Complex::new(1.0, 0.0),
        1 => Complex::new(0.0, 1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, -1.0),
    }
}

/// `J_0(x) ..= J_{n_max}(x)` with the default order cap.
pub fn bessel_j_batch(x: f64, n_max: usize) -> Result<BesselBatch> {
    bessel_j_batch_capped(x, n_max, DEFAULT_MAX_ORDER)
}

/// `J_0(x) ..= J_{n_max}(x)`, refusing batches with `n_max > cap`.
pub fn bessel_j_batch_capped(x: f64, n_max: usize, cap: usize) -> Result<BesselBatch> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "Bessel argument must be finite and non-negative, got {x}"
        )));
    }
    if n_max > cap {
        return Err(Error::OrderCap {
            requested: n_max,
            cap,
        });
    }

    let mut values = vec![0.0; n_max + 1];
    if x == 0.0 {
        values[0] = 1.0;
    } else if x < TINY_ARGUMENT {
        leading_term(x, &mut values);
    } else {
        backward_recurrence(x, &mut values);
    }
    Ok(BesselBatch { argument: x, values })
}

/// `J_n(x) ≈ (x/2)^n / n!`; the first correction is below `x²/4` relative.
fn leading_term(x: f64, values: &mut [f64]) {
    let half = 0.5 * x;
    let mut term = 1.0;
    for (n, v) in values.iter_mut().enumerate() {
        if n > 0 {
            term *= half / n as f64;
        }
        *v = term;
    }
}

fn start_order(x: f64, n_max: usize) -> usize {
    let base = n_max.max(x.ceil() as usize);
    let extra = ((1.2 * (40.0 * base as f64).sqrt()).ceil() as usize).max(20);
    let m = base + extra;
    m + (m & 1)
}

fn backward_recurrence(x: f64, values: &mut [f64]) {
    let n_max = values.len() - 1;
    let start = start_order(x, n_max);
    let two_over_x = 2.0 / x;

    // f_{j+1}, f_j
    let mut above = 0.0;
    let mut current = 1.0;
    // start is even
    let mut even_sum = 2.0 * current;
    if start <= n_max {
        values[start] = current;
    }

    for j in (1..=start).rev() {
        let below = j as f64 * two_over_x * current - above;
        above = current;
        current = below;
        let order = j - 1;
        if order <= n_max {
            values[order] = current;
        }
        if order % 2 == 0 {
            even_sum += if order == 0 { current } else { 2.0 * current };
        }
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            even_sum *= RESCALE_BY;
            if order <= n_max {
                for v in &mut values[order..] {
                    *v *= RESCALE_BY;
                }
            }
        }
    }

    let norm = 1.0 / even_sum;
    for v in values.iter_mut() {
        *v *= norm;
    }
}

/// `J_n(x)`; identical to `bessel_j_batch(x, n)?.values()[n]`.
pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    Ok(bessel_j_batch(x, n)?.values[n])
}

/// `i^n J_n(x)`.
pub fn bessel_j_tilde(n: usize, x: f64) -> Result<Complex> {
    Ok(i_pow(n) * bessel_j(n, x)?)
}

/// Reference `J_n(x)` from the integral representation with
/// [`ORACLE_NODES`] trapezoidal nodes. Limited to `n <= 50`, `|x| <= 50`.
pub fn bessel_j_integral_oracle(n: usize, x: f64) -> Result<f64> {
    bessel_j_quadrature(n, x, ORACLE_NODES)
}

/// Trapezoidal evaluation of `(1/π) ∫_0^π cos(x cos w - nπ/2) cos(nw) dw`.
///
/// The integrand extends to a smooth periodic function, so the rule converges
/// geometrically once `nodes` exceeds roughly `x + n`.
pub fn bessel_j_quadrature(n: usize, x: f64, nodes: usize) -> Result<f64> {
    if n > ORACLE_MAX_ORDER {
        return Err(Error::domain(format!(
            "quadrature oracle supports orders up to {ORACLE_MAX_ORDER}, got {n}"
        )));
    }
    if x.is_nan() || x.abs() > ORACLE_MAX_ARGUMENT {
        return Err(Error::domain(format!(
            "quadrature oracle supports |x| <= {ORACLE_MAX_ARGUMENT}, got {x}"
        )));
    }
    if nodes < 2000 {
        return Err(Error::domain(format!(
            "quadrature oracle needs at least 2000 nodes, got {nodes}"
        )));
    }

    // Re[i^-n e^{iθ}] for θ = x cos w
    let rotated = |theta: f64| match n % 4 {
        0 => theta.cos(),
        1 => theta.sin(),
        2 => -theta.cos(),
        _ => -theta.sin(),
    };
    let h = std::f64::consts::PI / nodes as f64;
    let mut sum = 0.0;
    for j in 0..=nodes {
        let w = j as f64 * h;
        let weight = if j == 0 || j == nodes { 0.5 } else { 1.0 };
        sum += weight * rotated(x * w.cos()) * (n as f64 * w).cos();
    }
    Ok(sum * h / std::f64::consts::PI)
}
