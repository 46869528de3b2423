//! Walk specifications and the Bessel-series amplitude evaluators.
//!
//! On the infinite line `ψ(x,t) = e^{-itq} J̃_{|x-x0|}(2t)` with
//! `J̃_n = i^n J_n`. A wall at `L` subtracts the mirror walk from `2L - x0`.
//! Two walls need the full image sequence `x_n` (alternating signs), and a
//! ring of length `N` the translates `y_n = x0 + nN` (uniform signs); both
//! series are truncated symmetrically to `n ∈ [-k, k]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j_batch_capped, BesselBatch, DEFAULT_MAX_ORDER};
use crate::bounds::{truncation_k, TruncationPlan};
use crate::error::{Error, Result};
use crate::Complex;

/// Which boundary regime the walk lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundarySpec {
    Unbounded,
    /// `ψ(L, t) = 0`, lattice extends to `+∞`.
    LeftWall {
        left: i64,
    },
    /// `ψ(L, t) = ψ(R, t) = 0`.
    Dirichlet {
        left: i64,
        right: i64,
    },
    /// Ring on `L ..= R-1`; `R` is identified with `L`.
    Periodic {
        left: i64,
        right: i64,
    },
}

impl BoundarySpec {
    /// `N = R - L` for the two-sided regimes.
    pub fn length(&self) -> Option<usize> {
        match *self {
            BoundarySpec::Dirichlet { left, right } | BoundarySpec::Periodic { left, right } => {
                Some((right - left) as usize)
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BoundarySpec::Dirichlet { left, right } if right - left < 2 => Err(Error::domain(format!(
                "Dirichlet lattice needs R - L >= 2, got L = {left}, R = {right}"
            ))),
            BoundarySpec::Periodic { left, right } if right <= left => Err(Error::domain(format!(
                "periodic lattice needs L < R, got L = {left}, R = {right}"
            ))),
            _ => Ok(()),
        }
    }

    /// Whether `x` is a state-space site (for the ring: `L <= x < R`).
    pub fn contains_site(&self, x: i64) -> bool {
        match *self {
            BoundarySpec::Unbounded => true,
            BoundarySpec::LeftWall { left } => x >= left,
            BoundarySpec::Dirichlet { left, right } => left <= x && x <= right,
            BoundarySpec::Periodic { left, right } => left <= x && x < right,
        }
    }
}

/// A walk: boundary regime, on-site potential `q` and start site `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWalkSpec")]
pub struct WalkSpec {
    boundary: BoundarySpec,
    q: f64,
    x0: i64,
}

#[derive(Deserialize)]
struct RawWalkSpec {
    boundary: BoundarySpec,
    q: f64,
    x0: i64,
}

impl TryFrom<RawWalkSpec> for WalkSpec {
    type Error = Error;

    fn try_from(raw: RawWalkSpec) -> Result<Self> {
        WalkSpec::new(raw.boundary, raw.q, raw.x0)
    }
}

impl WalkSpec {
    pub fn new(boundary: BoundarySpec, q: f64, x0: i64) -> Result<Self> {
        boundary.validate()?;
        if !q.is_finite() {
            return Err(Error::domain(format!("q must be finite, got {q}")));
        }
        let ok = match boundary {
            BoundarySpec::Unbounded => true,
            BoundarySpec::LeftWall { left } => x0 > left,
            BoundarySpec::Dirichlet { left, right } => left < x0 && x0 < right,
            BoundarySpec::Periodic { left, right } => left <= x0 && x0 < right,
        };
        if !ok {
            return Err(Error::domain(format!(
                "start site x0 = {x0} is not an admissible site for {boundary:?}"
            )));
        }
        Ok(WalkSpec { boundary, q, x0 })
    }

    pub fn boundary(&self) -> BoundarySpec {
        self.boundary
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn x0(&self) -> i64 {
        self.x0
    }

    /// `e^{-itq}`.
    pub fn phase(&self, t: f64) -> Complex {
        Complex::from_polar(1.0, -t * self.q)
    }
}

/// How a grid was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    Spectral,
    Ode,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Series => "series",
            Method::Spectral => "spectral",
            Method::Ode => "ode",
        })
    }
}

/// `ψ(x, t)` over `sites × times`, stored site-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeGrid {
    pub spec: WalkSpec,
    pub sites: Vec<i64>,
    pub times: Vec<f64>,
    /// `data[i * times.len() + j] = ψ(sites[i], times[j])`.
    pub data: Vec<Complex>,
    pub method: Method,
    pub truncation: Option<TruncationPlan>,
}

impl AmplitudeGrid {
    pub fn truncation_order(&self) -> Option<usize> {
        self.truncation.map(|p| p.k)
    }

    pub fn get(&self, site_index: usize, time_index: usize) -> Complex {
        self.data[site_index * self.times.len() + time_index]
    }

    pub fn row(&self, site_index: usize) -> &[Complex] {
        let w = self.times.len();
        &self.data[site_index * w..(site_index + 1) * w]
    }

    /// `Σ_x |ψ(x, times[j])|²` over the grid's sites.
    pub fn total_probability(&self, time_index: usize) -> f64 {
        (0..self.sites.len())
            .map(|i| self.get(i, time_index).norm_sqr())
            .sum()
    }

    /// Assembles a grid from per-time columns.
    pub(crate) fn from_columns(
        spec: WalkSpec,
        sites: Vec<i64>,
        times: Vec<f64>,
        columns: Vec<Vec<Complex>>,
        method: Method,
        truncation: Option<TruncationPlan>,
    ) -> Self {
        let mut data = Vec::with_capacity(sites.len() * times.len());
        for i in 0..sites.len() {
            data.extend(columns.iter().map(|col| col[i]));
        }
        AmplitudeGrid {
            spec,
            sites,
            times,
            data,
            method,
            truncation,
        }
    }
}

/// Image `x_n` of the start site by unrolling the reflection recursion
/// `x_n = 2R - x_{-n+1}` (`n > 0`), `x_n = 2L - x_{-n-1}` (`n < 0`).
///
/// Takes `O(|n|)` steps; [`mirror_point_closed`] is the constant-time form.
pub fn mirror_point(left: i64, right: i64, x0: i64, n: i64) -> i64 {
    // (x_m, x_{-m})
    let (mut pos, mut neg) = (x0, x0);
    for _ in 0..n.unsigned_abs() {
        let next_pos = 2 * right - neg;
        let next_neg = 2 * left - pos;
        pos = next_pos;
        neg = next_neg;
    }
    if n >= 0 {
        pos
    } else {
        neg
    }
}

/// `x_{2m} = x0 + 2mN`, `x_{2m+1} = 2R - x0 + 2mN`.
pub fn mirror_point_closed(left: i64, right: i64, x0: i64, n: i64) -> i64 {
    let len = right - left;
    let m = n.div_euclid(2);
    if n.rem_euclid(2) == 0 {
        x0 + 2 * m * len
    } else {
        2 * right - x0 + 2 * m * len
    }
}

/// `y_n = nN + x0`.
pub fn periodic_point(left: i64, right: i64, x0: i64, n: i64) -> i64 {
    n * (right - left) + x0
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "t must be finite and non-negative, got {t}"
        )))
    }
}

fn delta(x: i64, x0: i64) -> Complex {
    if x == x0 {
        Complex::new(1.0, 0.0)
    } else {
        Complex::new(0.0, 0.0)
    }
}

fn order(a: i64, b: i64) -> usize {
    (a - b).unsigned_abs() as usize
}

fn wrong_regime(expected: &str, spec: &WalkSpec) -> Error {
    Error::domain(format!("expected a {expected} walk, got {:?}", spec.boundary))
}

fn check_site(spec: &WalkSpec, x: i64) -> Result<()> {
    let ok = match spec.boundary {
        // x = R is the alias of x = L on the ring
        BoundarySpec::Periodic { left, right } => left <= x && x <= right,
        b => b.contains_site(x),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "site {x} lies outside the lattice of {:?}",
            spec.boundary
        )))
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::domain("truncation order k must be at least 1"))
    } else {
        Ok(())
    }
}

/// Highest Bessel order any image term can need at a site of the lattice.
fn series_order_cap(len: usize, k: usize) -> usize {
    (k + 1) * len + len
}

/// Sums the alternating image series with the terms paired so that they
/// cancel exactly at the nearer wall: `(n, -n-1)` towards `L`, `(n, 1-n)`
/// towards `R`. The unpaired outermost image carries the wall residual.
fn dirichlet_sum(kernel: &BesselBatch, left: i64, right: i64, x0: i64, x: i64, k: usize) -> Complex {
    let k = k as i64;
    let term = |n: i64| kernel.tilde(order(x, mirror_point_closed(left, right, x0, n)));
    let sign = |n: i64| if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let (pairs, partner, unpaired): (Vec<i64>, fn(i64) -> i64, i64) = if x - left <= right - x {
        ((0..k).collect(), |n| -n - 1, k)
    } else {
        ((1..=k).collect(), |n| 1 - n, -k)
    };
    let paired: Complex = pairs
        .into_iter()
        .map(|n| (term(n) - term(partner(n))) * sign(n))
        .sum();
    paired + term(unpaired) * sign(unpaired)
}

fn periodic_sum(kernel: &BesselBatch, left: i64, right: i64, x0: i64, x: i64, k: usize) -> Complex {
    let k = k as i64;
    (-k..=k)
        .map(|n| kernel.tilde(order(x, periodic_point(left, right, x0, n))))
        .sum()
}

/// `e^{-itq} J̃_{|x-x0|}(2t)`.
pub fn amplitude_unbounded(spec: &WalkSpec, x: i64, t: f64) -> Result<Complex> {
    if spec.boundary != BoundarySpec::Unbounded {
        return Err(wrong_regime("unbounded", spec));
    }
    check_time(t)?;
    if t == 0.0 {
        return Ok(delta(x, spec.x0));
    }
    let n = order(x, spec.x0);
    let kernel = bessel_j_batch_capped(2.0 * t, n, DEFAULT_MAX_ORDER)?;
    Ok(spec.phase(t) * kernel.tilde(n))
}

/// `e^{-itq} [J̃_{|x-x0|}(2t) - J̃_{|x+x0-2L|}(2t)]`, zero at `x = L`.
pub fn amplitude_left_wall(spec: &WalkSpec, x: i64, t: f64) -> Result<Complex> {
    let BoundarySpec::LeftWall { left } = spec.boundary else {
        return Err(wrong_regime("one-wall", spec));
    };
    check_site(spec, x)?;
    check_time(t)?;
    if t == 0.0 {
        return Ok(delta(x, spec.x0));
    }
    let direct = order(x, spec.x0);
    let mirrored = order(x + spec.x0, 2 * left);
    let kernel = bessel_j_batch_capped(2.0 * t, direct.max(mirrored), DEFAULT_MAX_ORDER)?;
    Ok(spec.phase(t) * (kernel.tilde(direct) - kernel.tilde(mirrored)))
}

/// `e^{-itq} Σ_{n=-k}^{k} (-1)^n J̃_{|x-x_n|}(2t)` between walls at `L` and `R`.
pub fn amplitude_dirichlet(spec: &WalkSpec, x: i64, t: f64, k: usize) -> Result<Complex> {
    let BoundarySpec::Dirichlet { left, right } = spec.boundary else {
        return Err(wrong_regime("Dirichlet", spec));
    };
    check_site(spec, x)?;
    check_time(t)?;
    check_k(k)?;
    if t == 0.0 {
        return Ok(delta(x, spec.x0));
    }
    let k_signed = k as i64;
    let n_max = (-k_signed..=k_signed)
        .map(|n| order(x, mirror_point_closed(left, right, spec.x0, n)))
        .max()
        .unwrap_or(0);
    let kernel = bessel_j_batch_capped(2.0 * t, n_max, DEFAULT_MAX_ORDER)?;
    Ok(spec.phase(t) * dirichlet_sum(&kernel, left, right, spec.x0, x, k))
}

/// `e^{-itq} Σ_{n=-k}^{k} J̃_{|x-y_n|}(2t)` on the ring `L ..= R-1`.
///
/// `x = R` is accepted and evaluates the same truncated sum, which is how the
/// identification `ψ(L,t) = ψ(R,t)` is checked.
pub fn amplitude_periodic(spec: &WalkSpec, x: i64, t: f64, k: usize) -> Result<Complex> {
    let BoundarySpec::Periodic { left, right } = spec.boundary else {
        return Err(wrong_regime("periodic", spec));
    };
    check_site(spec, x)?;
    check_time(t)?;
    check_k(k)?;
    if t == 0.0 {
        return Ok(delta(x, spec.x0));
    }
    let k_signed = k as i64;
    let n_max = (-k_signed..=k_signed)
        .map(|n| order(x, periodic_point(left, right, spec.x0, n)))
        .max()
        .unwrap_or(0);
    let kernel = bessel_j_batch_capped(2.0 * t, n_max, DEFAULT_MAX_ORDER)?;
    Ok(spec.phase(t) * periodic_sum(&kernel, left, right, spec.x0, x, k))
}

/// Amplitudes of one walk at one time, sharing a single Bessel batch
/// across every site.
#[derive(Debug, Clone)]
pub struct Propagator {
    spec: WalkSpec,
    t: f64,
    k: Option<usize>,
    phase: Complex,
    kernel: Option<BesselBatch>,
}

impl Propagator {
    /// Prepares the kernel for `sites`.
    ///
    /// `k` is required for the Dirichlet and periodic regimes and ignored
    /// otherwise. Bounded regimes size the batch for every lattice site, so
    /// `sites` only matters on the open lattices.
    pub fn new(spec: &WalkSpec, t: f64, k: Option<usize>, sites: &[i64], max_order: usize) -> Result<Self> {
        check_time(t)?;
        let x0 = spec.x0;
        let n_max = match (spec.boundary, k) {
            (BoundarySpec::Unbounded, _) => sites.iter().map(|&x| order(x, x0)).max().unwrap_or(0),
            (BoundarySpec::LeftWall { left }, _) => sites
                .iter()
                .map(|&x| order(x, x0).max(order(x + x0, 2 * left)))
                .max()
                .unwrap_or(0),
            (BoundarySpec::Dirichlet { .. } | BoundarySpec::Periodic { .. }, Some(k)) => {
                check_k(k)?;
                series_order_cap(spec.boundary.length().unwrap_or(0), k)
            }
            (_, None) => {
                return Err(Error::domain(
                    "truncation order k is required for two-sided lattices",
                ))
            }
        };
        let kernel = if t == 0.0 {
            None
        } else {
            Some(bessel_j_batch_capped(2.0 * t, n_max, max_order)?)
        };
        Ok(Propagator {
            spec: *spec,
            t,
            k,
            phase: spec.phase(t),
            kernel,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Shared Bessel batch; `None` at `t = 0`.
    pub fn kernel(&self) -> Option<&BesselBatch> {
        self.kernel.as_ref()
    }

    /// Mutable access to the shared batch, for fault injection.
    pub fn kernel_mut(&mut self) -> Option<&mut BesselBatch> {
        self.kernel.as_mut()
    }

    pub fn amplitude(&self, x: i64) -> Result<Complex> {
        check_site(&self.spec, x)?;
        let x0 = self.spec.x0;
        let Some(kernel) = &self.kernel else {
            return Ok(delta(x, x0));
        };
        let tilde = |n: usize| {
            if n > kernel.max_order() {
                Err(Error::domain(format!(
                    "site {x} needs Bessel order {n}, beyond the prepared batch"
                )))
            } else {
                Ok(kernel.tilde(n))
            }
        };
        let sum = match self.spec.boundary {
            BoundarySpec::Unbounded => tilde(order(x, x0))?,
            BoundarySpec::LeftWall { left } => tilde(order(x, x0))? - tilde(order(x + x0, 2 * left))?,
            BoundarySpec::Dirichlet { left, right } => {
                dirichlet_sum(kernel, left, right, x0, x, self.k.unwrap_or(1))
            }
            BoundarySpec::Periodic { left, right } => {
                periodic_sum(kernel, left, right, x0, x, self.k.unwrap_or(1))
            }
        };
        Ok(self.phase * sum)
    }
}

/// Knobs for [`evaluate_grid_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridOptions {
    pub max_order: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            max_order: DEFAULT_MAX_ORDER,
        }
    }
}

/// Validates a site list against the regime (the ring excludes `x = R`).
pub fn check_grid_sites(spec: &WalkSpec, sites: &[i64], first_time: f64) -> Result<()> {
    for &x in sites {
        if !spec.boundary.contains_site(x) {
            return Err(Error::Cell {
                site: x,
                time: first_time,
                source: Box::new(Error::domain(format!(
                    "site {x} lies outside the lattice of {:?}",
                    spec.boundary
                ))),
            });
        }
    }
    Ok(())
}

pub(crate) fn check_grid_times(times: &[f64]) -> Result<()> {
    for &t in times {
        check_time(t)?;
    }
    Ok(())
}

/// Plan covering every time in `times`: the largest `k` any of them needs.
pub fn plan_for_times(times: &[f64], epsilon: f64, len: usize) -> Result<Option<TruncationPlan>> {
    let mut best: Option<TruncationPlan> = None;
    for &t in times.iter().filter(|&&t| t > 0.0) {
        let plan = truncation_k(t, epsilon, len)?;
        if best.is_none_or(|b| plan.k >= b.k) {
            best = Some(plan);
        }
    }
    Ok(best)
}

/// Series amplitudes for every `(site, time)` cell with the default options.
pub fn evaluate_grid(spec: &WalkSpec, sites: &[i64], times: &[f64], epsilon: f64) -> Result<AmplitudeGrid> {
    evaluate_grid_with(spec, sites, times, epsilon, &GridOptions::default())
}

/// Series amplitudes for every `(site, time)` cell.
///
/// Two-sided lattices use one truncation order for the whole grid, the one
/// required by the most demanding time; its plan is recorded on the grid.
/// Times are evaluated in parallel, one shared Bessel batch each.
pub fn evaluate_grid_with(
    spec: &WalkSpec,
    sites: &[i64],
    times: &[f64],
    epsilon: f64,
    options: &GridOptions,
) -> Result<AmplitudeGrid> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    check_grid_times(times)?;
    check_grid_sites(spec, sites, times.first().copied().unwrap_or(0.0))?;

    let truncation = match spec.boundary.length() {
        Some(len) => plan_for_times(times, epsilon, len)?,
        None => None,
    };
    let k = truncation.map(|p| p.k).or(spec.boundary.length().map(|_| 1));

    let columns = times
        .par_iter()
        .map(|&t| {
            let cell_error = |site: i64, e: Error| Error::Cell {
                site,
                time: t,
                source: Box::new(e),
            };
            let prop = Propagator::new(spec, t, k, sites, options.max_order)
                .map_err(|e| cell_error(sites.first().copied().unwrap_or(spec.x0), e))?;
            sites
                .iter()
                .map(|&x| prop.amplitude(x).map_err(|e| cell_error(x, e)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(AmplitudeGrid::from_columns(
        *spec,
        sites.to_vec(),
        times.to_vec(),
        columns,
        Method::Series,
        truncation,
    ))
}

/// Default site window: the whole lattice when bounded, otherwise the light
/// cone `|x - x0| <= 2 t_max + pad` (clipped at a left wall).
pub fn default_sites(spec: &WalkSpec, t_max: f64, pad: i64) -> Vec<i64> {
    let reach = (2.0 * t_max).ceil() as i64 + pad;
    let x0 = spec.x0;
    match spec.boundary {
        BoundarySpec::Unbounded => (x0 - reach..=x0 + reach).collect(),
        BoundarySpec::LeftWall { left } => ((x0 - reach).max(left)..=x0 + reach).collect(),
        BoundarySpec::Dirichlet { left, right } => (left..=right).collect(),
        BoundarySpec::Periodic { left, right } => (left..right).collect(),
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    const J0_2: f64 = 0.223_890_779_141_235_67;
    const J1_2: f64 = 0.576_724_807_756_873_4;
    const J3_2: f64 = 0.128_943_249_474_402_05;

    fn close(a: Complex, b: Complex, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn spec_validation() {
        assert!(WalkSpec::new(BoundarySpec::Dirichlet { left: 0, right: 1 }, 0.0, 0).is_err());
        assert!(WalkSpec::new(BoundarySpec::Dirichlet { left: 0, right: 2 }, 0.0, 1).is_ok());
        assert!(WalkSpec::new(BoundarySpec::Dirichlet { left: 0, right: 2 }, 0.0, 2).is_err());
        assert!(WalkSpec::new(BoundarySpec::Periodic { left: 0, right: 1 }, 0.0, 0).is_ok());
        assert!(WalkSpec::new(BoundarySpec::Periodic { left: 3, right: 3 }, 0.0, 3).is_err());
        assert!(WalkSpec::new(BoundarySpec::Periodic { left: 0, right: 4 }, 0.0, 4).is_err());
        assert!(WalkSpec::new(BoundarySpec::LeftWall { left: 0 }, 0.0, 0).is_err());
        assert!(WalkSpec::new(BoundarySpec::Unbounded, f64::NAN, 0).is_err());
        assert!(WalkSpec::new(BoundarySpec::Unbounded, 0.0, -17).is_ok());
    }

    #[test]
    fn unbounded_examples() {
        let spec = WalkSpec::new(BoundarySpec::Unbounded, 0.7, 4).unwrap();
        assert_eq!(
            amplitude_unbounded(&spec, 4, 0.0).unwrap(),
            Complex::new(1.0, 0.0)
        );
        assert_eq!(
            amplitude_unbounded(&spec, 7, 0.0).unwrap(),
            Complex::new(0.0, 0.0)
        );
        let spec = WalkSpec::new(BoundarySpec::Unbounded, 0.0, 4).unwrap();
        let psi = amplitude_unbounded(&spec, 4, 1.0).unwrap();
        assert!(close(psi, Complex::new(J0_2, 0.0), 1e-15));
        assert!(amplitude_unbounded(&spec, 4, -1.0).is_err());
    }

    #[test]
    fn left_wall_examples() {
        let spec = WalkSpec::new(BoundarySpec::LeftWall { left: -3 }, 1.3, 5).unwrap();
        assert_eq!(
            amplitude_left_wall(&spec, -3, 2.7).unwrap(),
            Complex::new(0.0, 0.0)
        );
        assert_eq!(
            amplitude_left_wall(&spec, 5, 0.0).unwrap(),
            Complex::new(1.0, 0.0)
        );
        assert!(amplitude_left_wall(&spec, -4, 1.0).is_err());

        // i J_1(2) - (-i) J_3(2)
        let spec = WalkSpec::new(BoundarySpec::LeftWall { left: 0 }, 0.0, 2).unwrap();
        let psi = amplitude_left_wall(&spec, 1, 1.0).unwrap();
        assert!(close(psi, Complex::new(0.0, J1_2 + J3_2), 1e-15));
        assert!((psi.im - 0.705_668_057_2).abs() < 1e-9);
    }

    #[test]
    fn mirror_examples() {
        assert_eq!(mirror_point(0, 30, 13, 0), 13);
        assert_eq!(mirror_point(0, 30, 13, -1), -13);
        assert_eq!(mirror_point(0, 30, 13, 1), 47);
        assert_eq!(mirror_point(0, 30, 13, 2), 73);
        assert_eq!(mirror_point(0, 30, 13, -2), -47);
        for n in -5..=5 {
            assert_eq!(mirror_point(0, 30, 13, n), mirror_point_closed(0, 30, 13, n));
        }
        assert_eq!(periodic_point(0, 30, 13, 0), 13);
        assert_eq!(periodic_point(0, 30, 13, -1), -17);
        assert_eq!(periodic_point(0, 30, 13, 2), 73);
    }

    #[test]
    fn dirichlet_examples() {
        let spec = WalkSpec::new(BoundarySpec::Dirichlet { left: 0, right: 30 }, 0.4, 13).unwrap();
        assert_eq!(
            amplitude_dirichlet(&spec, 13, 0.0, 1).unwrap(),
            Complex::new(1.0, 0.0)
        );
        assert!(amplitude_dirichlet(&spec, 31, 1.0, 3).is_err());
        assert!(amplitude_dirichlet(&spec, 3, 1.0, 0).is_err());

        // single interior site: pure phase
        let spec = WalkSpec::new(BoundarySpec::Dirichlet { left: 0, right: 2 }, 0.0, 1).unwrap();
        let psi = amplitude_dirichlet(&spec, 1, 3.0, 40).unwrap();
        assert!(close(psi, Complex::new(1.0, 0.0), 1e-10), "{psi}");

        // eigen-expansion reference, 30 digits
        let spec = WalkSpec::new(BoundarySpec::Dirichlet { left: 0, right: 30 }, 0.0, 13).unwrap();
        let psi = amplitude_dirichlet(&spec, 13, 5.0, 12).unwrap();
        assert!(close(psi, Complex::new(-0.245_935_763_010_802_085, 0.0), 1e-5));
    }

    #[test]
    fn periodic_examples() {
        let spec = WalkSpec::new(BoundarySpec::Periodic { left: 0, right: 4 }, 0.0, 1).unwrap();
        assert_eq!(
            amplitude_periodic(&spec, 1, 0.0, 1).unwrap(),
            Complex::new(1.0, 0.0)
        );
        let psi = amplitude_periodic(&spec, 3, 2.0, 30).unwrap();
        assert!(
            close(psi, Complex::new(-0.826_821_810_431_805_957, 0.0), 1e-10),
            "{psi}"
        );
        assert!(amplitude_periodic(&spec, 5, 1.0, 3).is_err());

        let spec = WalkSpec::new(BoundarySpec::Periodic { left: -2, right: 9 }, 0.3, 4).unwrap();
        for &t in &[0.5, 3.0, 7.0] {
            let k = truncation_k(t, 1e-8, 11).unwrap().k;
            let at_left = amplitude_periodic(&spec, -2, t, k).unwrap();
            let at_right = amplitude_periodic(&spec, 9, t, k).unwrap();
            assert!((at_left - at_right).norm() <= 2e-8);
        }
    }

    #[test]
    fn wrong_regime_rejected() {
        let spec = WalkSpec::new(BoundarySpec::Unbounded, 0.0, 0).unwrap();
        assert!(amplitude_dirichlet(&spec, 0, 1.0, 3).is_err());
        assert!(amplitude_periodic(&spec, 0, 1.0, 3).is_err());
        assert!(amplitude_left_wall(&spec, 0, 1.0).is_err());
        let spec = WalkSpec::new(BoundarySpec::LeftWall { left: 0 }, 0.0, 1).unwrap();
        assert!(amplitude_unbounded(&spec, 0, 1.0).is_err());
    }

    #[test]
    fn propagator_matches_pointwise() {
        let cases = [
            (BoundarySpec::Unbounded, 3),
            (BoundarySpec::LeftWall { left: -1 }, 2),
            (BoundarySpec::Dirichlet { left: 0, right: 9 }, 4),
            (BoundarySpec::Periodic { left: 0, right: 9 }, 4),
        ];
        for (boundary, x0) in cases {
            let spec = WalkSpec::new(boundary, 0.9, x0).unwrap();
            let sites = default_sites(&spec, 3.0, 5);
            let prop = Propagator::new(&spec, 3.0, Some(6), &sites, DEFAULT_MAX_ORDER).unwrap();
            for &x in &sites {
                let single = match boundary {
                    BoundarySpec::Unbounded => amplitude_unbounded(&spec, x, 3.0),
                    BoundarySpec::LeftWall { .. } => amplitude_left_wall(&spec, x, 3.0),
                    BoundarySpec::Dirichlet { .. } => amplitude_dirichlet(&spec, x, 3.0, 6),
                    BoundarySpec::Periodic { .. } => amplitude_periodic(&spec, x, 3.0, 6),
                }
                .unwrap();
                assert!(
                    close(prop.amplitude(x).unwrap(), single, 1e-14),
                    "{boundary:?} x={x}"
                );
            }
        }
    }

    #[test]
    fn grid_examples() {
        let spec = WalkSpec::new(BoundarySpec::Dirichlet { left: 0, right: 30 }, 0.0, 13).unwrap();
        let grid = evaluate_grid(&spec, &[13], &[0.0], 1e-5).unwrap();
        assert_eq!(grid.data, vec![Complex::new(1.0, 0.0)]);

        let times: Vec<f64> = (0..=240).map(|i| i as f64 * 0.25).collect();
        let sites: Vec<i64> = (0..=30).collect();
        let grid = evaluate_grid(&spec, &sites, &times, 1e-5).unwrap();
        assert_eq!(grid.truncation_order(), Some(12));
        assert_eq!(grid.data.len(), sites.len() * times.len());
        assert!(grid.row(0).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-15);

        let spec = WalkSpec::new(BoundarySpec::Unbounded, 0.0, 0).unwrap();
        let grid = evaluate_grid(&spec, &[-1, 0, 1], &[0.0, 1.0], 1e-5).unwrap();
        assert_eq!(grid.truncation_order(), None);
        assert!(close(grid.get(1, 1), Complex::new(J0_2, 0.0), 1e-15));
    }

    #[test]
    fn grid_reports_failing_cell() {
        let spec = WalkSpec::new(BoundarySpec::Periodic { left: 0, right: 5 }, 0.0, 2).unwrap();
        match evaluate_grid(&spec, &[0, 5], &[1.0], 1e-5) {
            Err(Error::Cell { site: 5, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let spec = WalkSpec::new(BoundarySpec::Unbounded, 0.0, 0).unwrap();
        let opts = GridOptions { max_order: 10 };
        match evaluate_grid_with(&spec, &[0, 40], &[1.0], 1e-5, &opts) {
            Err(Error::Cell { source, .. }) => {
                assert!(matches!(
                    *source,
                    Error::OrderCap {
                        requested: 40,
                        cap: 10
                    }
                ))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(evaluate_grid(&spec, &[0], &[1.0], 1.5).is_err());
        assert!(evaluate_grid(&spec, &[0], &[-1.0], 1e-3).is_err());
    }
}
