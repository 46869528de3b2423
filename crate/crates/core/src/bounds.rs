//! Truncation order for the image series and the tail bounds that justify it.
//!
//! Truncating the Dirichlet or periodic image series to `n ∈ [-k, k]` leaves a
//! tail dominated by `2 t^{2N} Σ_{n>=k} t^{nN} / (nN)!`. With Stirling's lower
//! bound for the factorial and a geometric majorant this becomes a closed form
//! in `k`, and the ansatz
//!
//! ```text
//! ζ = 2 ln t + ln(c ε⁻¹ t^{-1/2}) / N,    k = (t + N)/N · ζ / ln ζ
//! ```
//!
//! with `c = 22 / (e √(2π))` keeps the tail below `ε` once `t` exceeds
//! [`t_threshold`]. Everything that can overflow (`t^{2N}`, `(nN)!`) is
//! evaluated in log space.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of [`truncation_k`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPlan {
    /// Images kept on each side: the series runs over `n ∈ [-k, k]`.
    pub k: usize,
    /// `ζ(t, ε, N)` at the requested time.
    pub zeta: f64,
    /// Lower end of the time range where the ansatz is guaranteed.
    pub t_threshold: f64,
    pub epsilon: f64,
    /// Lattice length `R - L`.
    pub n: usize,
    pub t: f64,
    /// Closed-form tail bound at `(k, t, N)`.
    pub apriori_bound: f64,
    /// `t <= t_threshold`; `k` was chosen conservatively rather than by the ansatz.
    pub fallback_used: bool,
}

/// `c = 22 / (e √(2π))`.
pub fn constant_c() -> f64 {
    22.0 / (E * (2.0 * PI).sqrt())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("t must be positive and finite, got {t}")))
    }
}

fn check_length(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("lattice length N must be at least 1"))
    } else {
        Ok(())
    }
}

fn zeta_unchecked(t: f64, epsilon: f64, n: usize) -> f64 {
    2.0 * t.ln() + (constant_c() / (epsilon * t.sqrt())).ln() / n as f64
}

fn threshold_unchecked(epsilon: f64, n: usize) -> f64 {
    let n = n as f64;
    let base = E.powf(E) * (epsilon / constant_c()).powf(1.0 / n);
    base.powf(2.0 * n / (4.0 * n - 1.0)).max(1.0)
}

/// Real-valued ansatz `(t + N)/N · ζ / ln ζ`; meaningful for `ζ > 1`.
fn k_ansatz(t: f64, zeta: f64, n: usize) -> f64 {
    (t + n as f64) / n as f64 * zeta / zeta.ln()
}

/// `ζ = 2 ln t + ln(c ε⁻¹ t^{-1/2}) / N`.
pub fn zeta(t: f64, epsilon: f64, n: usize) -> Result<f64> {
    check_time(t)?;
    check_epsilon(epsilon)?;
    check_length(n)?;
    Ok(zeta_unchecked(t, epsilon, n))
}

/// `max{1, (e^e (ε/c)^{1/N})^{2N/(4N-1)}}`, the time above which `ζ >= e`.
pub fn t_threshold(epsilon: f64, n: usize) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_length(n)?;
    Ok(threshold_unchecked(epsilon, n))
}

/// Order and fallback flag straight from the ansatz, before the
/// monotone envelope in [`truncation_k`].
fn raw_order(t: f64, epsilon: f64, n: usize) -> (usize, bool) {
    let threshold = threshold_unchecked(epsilon, n);
    if t > threshold {
        // ζ >= e above the threshold gives k >= (t + N)e/N > te/N.
        (
            k_ansatz(t, zeta_unchecked(t, epsilon, n), n).ceil() as usize,
            false,
        )
    } else {
        let convergent_floor = (t * E / n as f64).ceil() as usize + 1;
        let at_threshold = zeta_unchecked(threshold, epsilon, n);
        let k = k_ansatz(threshold, at_threshold, n).ceil() as usize;
        (k.max(convergent_floor), true)
    }
}

/// Chooses the truncation order for a per-amplitude error budget `epsilon`.
///
/// Above the threshold `k = ⌈(t + N)/N · ζ/ln ζ⌉`. At or below it the ansatz
/// carries no guarantee, and `k = max(⌈te/N⌉ + 1, k_ansatz(t_threshold))`
/// keeps the geometric tail convergent.
///
/// The threshold grows with `epsilon`, so the fallback alone would hand a
/// looser budget more terms than a tighter one. The result is therefore
/// lifted to the order at the loosest budget `epsilon -> 1`, which is the
/// supremum over all looser budgets. This only bites for `t` below the
/// loosest threshold (about 3.9) and never lowers `k`.
pub fn truncation_k(t: f64, epsilon: f64, n: usize) -> Result<TruncationPlan> {
    check_time(t)?;
    check_epsilon(epsilon)?;
    check_length(n)?;

    let threshold = threshold_unchecked(epsilon, n);
    let zeta = zeta_unchecked(t, epsilon, n);
    let (own, own_fallback) = raw_order(t, epsilon, n);
    let (loosest, _) = raw_order(t, 1.0, n);
    let k = own.max(loosest);
    let fallback_used = own_fallback || loosest > own;

    Ok(TruncationPlan {
        k,
        zeta,
        t_threshold: threshold,
        epsilon,
        n,
        t,
        apriori_bound: apriori_error_bound(k, t, n)?,
        fallback_used,
    })
}

/// `ln n!`, summed exactly up to rounding.
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Closed-form bound on the truncation error after `k` images per side:
///
/// ```text
/// 2 t^{2N} / √(2π N k) · (te/kN)^{Nk} / (1 - (te/kN)^N)
/// ```
///
/// Requires `k N > t e` for the geometric majorant to converge.
pub fn apriori_error_bound(k: usize, t: f64, n: usize) -> Result<f64> {
    Ok(ln_apriori_error_bound(k, t, n)?.exp().max(f64::MIN_POSITIVE))
}

/// Natural log of [`apriori_error_bound`], free of underflow.
pub fn ln_apriori_error_bound(k: usize, t: f64, n: usize) -> Result<f64> {
    check_time(t)?;
    check_length(n)?;
    let kn = (k * n) as f64;
    if t.is_nan() || kn <= t * E {
        return Err(Error::domain(format!(
            "tail bound needs k > te/N (k = {k}, te/N = {})",
            t * E / n as f64
        )));
    }
    let nf = n as f64;
    let ln_ratio = (t * E / kn).ln();
    let ln_geometric = (-(nf * ln_ratio).exp()).ln_1p();
    Ok(2f64.ln() + 2.0 * nf * t.ln() - 0.5 * (2.0 * PI * kn).ln() + kn * ln_ratio - ln_geometric)
}

/// `2 t^{2N} Σ_{n=k}^{k+terms-1} t^{nN}/(nN)!` plus [`apriori_error_bound`]
/// for the remaining tail from `k + terms`.
///
/// A tighter numeric bound than the closed form; it never exceeds it when
/// both apply.
pub fn factorial_tail_bound(k: usize, t: f64, n: usize, terms: usize) -> Result<f64> {
    check_time(t)?;
    check_length(n)?;
    if k == 0 || terms == 0 {
        return Err(Error::domain("factorial tail needs k >= 1 and terms >= 1"));
    }
    let remainder = apriori_error_bound(k + terms, t, n)?;

    let ln_t = t.ln();
    let prefix = 2f64.ln() + 2.0 * n as f64 * ln_t;
    let mut lnfact = ln_factorial((k * n) as u64);
    let mut partial = 0.0;
    for m in k..k + terms {
        let order = (m * n) as u64;
        partial += (prefix + order as f64 * ln_t - lnfact).exp();
        for i in order + 1..=order + n as u64 {
            lnfact += (i as f64).ln();
        }
    }
    Ok(partial + remainder)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_value() {
        let c = constant_c();
        assert!((c - 3.228_778_589_822_278).abs() < 1e-12);
        assert!((c * (2.0 * PI).sqrt() * E - 22.0).abs() < 1e-12);
        assert!(c > 1.0);
    }

    #[test]
    fn zeta_examples() {
        let z30 = zeta(30.0, 1e-5, 30).unwrap();
        assert!((z30 - 7.1685).abs() < 1e-3, "{z30}");
        let z60 = zeta(60.0, 1e-5, 30).unwrap();
        assert!((z60 - 8.543).abs() < 5e-3, "{z60}");
        // second term vanishes when c ε⁻¹ t^{-1/2} = 1
        let eps = constant_c() / E.sqrt();
        assert!((zeta_unchecked(E, eps, 7) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zeta_domain() {
        assert!(zeta(0.0, 1e-5, 30).is_err());
        assert!(zeta(-1.0, 1e-5, 30).is_err());
        assert!(zeta(1.0, 0.0, 30).is_err());
        assert!(zeta(1.0, 1.0, 30).is_err());
        assert!(zeta(1.0, 0.1, 0).is_err());
    }

    #[test]
    fn threshold_examples() {
        let th = t_threshold(1e-5, 30).unwrap();
        assert!((th - 3.181_549_986_786_6).abs() < 1e-9, "{th}");
        assert!(zeta(th, 1e-5, 30).unwrap() >= E - 1e-12);

        let n = 9;
        let expected = (2.0 * n as f64 * E / (4.0 * n as f64 - 1.0)).exp().max(1.0);
        assert!((threshold_unchecked(constant_c(), n) - expected).abs() < 1e-12);

        for &eps in &[0.9, 1e-3, 1e-12] {
            for n in [1, 2, 4, 30, 200] {
                assert!(t_threshold(eps, n).unwrap() >= 1.0);
            }
        }
        assert!(t_threshold(2.0, 3).is_err());
    }

    #[test]
    fn truncation_examples() {
        let plan = truncation_k(60.0, 1e-5, 30).unwrap();
        assert_eq!(plan.k, 12);
        assert!(!plan.fallback_used);
        assert!(plan.apriori_bound <= 1e-5);

        assert_eq!(truncation_k(30.0, 1e-5, 30).unwrap().k, 8);

        // ζ = 2 ln 10 + ln(2c/√10)/8 = 4.6944, k = 18/8 · ζ/ln ζ = 6.83
        let plan = truncation_k(10.0, 0.5, 8).unwrap();
        let z = 2.0 * 10f64.ln() + (2.0 * constant_c() / 10f64.sqrt()).ln() / 8.0;
        assert!((plan.zeta - z).abs() < 1e-12);
        assert_eq!(plan.k, 7);
        assert!(!plan.fallback_used);
    }

    #[test]
    fn fallback_below_threshold() {
        let plan = truncation_k(1.5, 1e-5, 30).unwrap();
        assert!(plan.fallback_used);
        assert!(plan.k as f64 > 1.5 * E / 30.0);
        // at the threshold itself the strict inequality routes to the fallback
        let th = t_threshold(1e-5, 30).unwrap();
        assert!(truncation_k(th, 1e-5, 30).unwrap().fallback_used);
        assert!(!truncation_k(th * 1.001, 1e-5, 30).unwrap().fallback_used);
    }

    #[test]
    fn apriori_bound_behaviour() {
        let mut prev = f64::INFINITY;
        for k in 7..40 {
            let b = ln_apriori_error_bound(k, 30.0, 16).unwrap();
            assert!(b < prev);
            prev = b;
        }
        // k <= te/N diverges
        let (t, n) = (20.0, 8);
        let floor = (t * E / n as f64).floor() as usize;
        assert!(apriori_error_bound(floor, t, n).is_err());
        assert!(apriori_error_bound(floor + 1, t, n).is_ok());
        // t^{2N} alone would overflow here
        let b = apriori_error_bound(12, 60.0, 30).unwrap();
        assert!(b.is_finite() && b > 0.0 && b < 1e-5);
    }

    #[test]
    fn factorial_tail_examples() {
        let tail = factorial_tail_bound(6, 5.0, 8, 20).unwrap();
        let closed = apriori_error_bound(6, 5.0, 8).unwrap();
        assert!(tail <= closed * (1.0 + 1e-12));

        // one term dominates once k is large
        let (k, t, n) = (20, 5.0, 8);
        let single = factorial_tail_bound(k, t, n, 1).unwrap();
        let first = (2f64.ln() + (2 * n + k * n) as f64 * t.ln() - ln_factorial((k * n) as u64)).exp();
        assert!(single >= first && single < 2.0 * first);
    }

    #[test]
    fn stirling_lower_bound() {
        for x in 1..=400u64 {
            let xf = x as f64;
            let stirling = 0.5 * (2.0 * PI).ln() + (xf + 0.5) * xf.ln() - xf;
            assert!(ln_factorial(x) >= stirling, "x = {x}");
        }
    }

    #[test]
    fn looser_budget_never_needs_more_terms() {
        // below both thresholds the raw fallback ranks these the wrong way round
        let loose = truncation_k(0.01, 0.1, 19).unwrap();
        let tight = truncation_k(0.01, 1e-11, 19).unwrap();
        assert!(raw_order(0.01, 0.1, 19).0 > raw_order(0.01, 1e-11, 19).0);
        assert!(loose.k <= tight.k);
        assert!(loose.fallback_used && tight.fallback_used);
        assert_eq!(truncation_k(60.0, 1e-5, 30).unwrap().k, 12);
    }
}
