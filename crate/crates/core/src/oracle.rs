//! Reference solutions that do not go through the Bessel series.
//!
//! [`SpectralModel`] diagonalises the finite Hamiltonians exactly: sine modes
//! for the Dirichlet chain on the `N - 1` interior sites and Fourier modes for
//! the `N`-site ring. [`ode_evolve`] integrates the lattice equation directly
//! with classical RK4; on open lattices it works on a window wide enough that
//! the light cone never reaches the artificial edge.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::walk::{check_grid_sites, check_grid_times, AmplitudeGrid, BoundarySpec, Method, WalkSpec};
use crate::Complex;

/// Eigen-decomposition of a two-sided lattice Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    boundary: BoundarySpec,
    q: f64,
    eigenvalues: Vec<f64>,
}

/// `sin(π num / den)` with exact zeros at multiples of `den`.
fn sin_pi_ratio(num: i64, den: i64) -> f64 {
    let r = num.rem_euclid(2 * den);
    if r % den == 0 {
        0.0
    } else {
        (PI * r as f64 / den as f64).sin()
    }
}

/// `e^{2πi num / den}` with the angle reduced before evaluation.
fn unit_root(num: i64, den: i64) -> Complex {
    let r = num.rem_euclid(den);
    Complex::from_polar(1.0, 2.0 * PI * r as f64 / den as f64)
}

impl SpectralModel {
    /// Dirichlet: `2cos(kπ/N) - q`, `k = 1..N-1`. Periodic: `2cos(2πk/N) - q`,
    /// `k = 0..N-1`.
    pub fn new(boundary: BoundarySpec, q: f64) -> Result<Self> {
        boundary.validate()?;
        let eigenvalues = match boundary {
            BoundarySpec::Dirichlet { left, right } => {
                let n = (right - left) as f64;
                (1..right - left)
                    .map(|k| 2.0 * (k as f64 * PI / n).cos() - q)
                    .collect()
            }
            BoundarySpec::Periodic { left, right } => {
                let n = (right - left) as f64;
                (0..right - left)
                    .map(|k| 2.0 * (2.0 * PI * k as f64 / n).cos() - q)
                    .collect()
            }
            _ => {
                return Err(Error::domain(
                    "spectral model needs a Dirichlet or periodic lattice",
                ))
            }
        };
        Ok(SpectralModel {
            boundary,
            q,
            eigenvalues,
        })
    }

    pub fn for_spec(spec: &WalkSpec) -> Result<Self> {
        Self::new(spec.boundary(), spec.q())
    }

    pub fn boundary(&self) -> BoundarySpec {
        self.boundary
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("t must be finite, got {t}")))
    }
}

/// `(2/N) Σ_k sin(πk(x-L)/N) sin(πk(x0-L)/N) e^{itλ_k}` with `λ_k = 2cos(kπ/N) - q`.
pub fn spectral_amplitude_dirichlet(model: &SpectralModel, x0: i64, x: i64, t: f64) -> Result<Complex> {
    let BoundarySpec::Dirichlet { left, right } = model.boundary else {
        return Err(Error::domain("expected a Dirichlet spectral model"));
    };
    if !(left < x0 && x0 < right) {
        return Err(Error::domain(format!(
            "start site {x0} is not interior to [{left}, {right}]"
        )));
    }
    if !(left <= x && x <= right) {
        return Err(Error::domain(format!("site {x} lies outside [{left}, {right}]")));
    }
    check_t(t)?;
    let n = right - left;
    let sum: Complex = model
        .eigenvalues
        .iter()
        .zip(1..n)
        .map(|(&lambda, k)| {
            let weight = sin_pi_ratio(k * (x - left), n) * sin_pi_ratio(k * (x0 - left), n);
            Complex::from_polar(weight, t * lambda)
        })
        .sum();
    Ok(sum * (2.0 / n as f64))
}

/// `(1/N) Σ_k e^{2πik(x-x0)/N} e^{itλ_k}` with `λ_k = 2cos(2πk/N) - q`.
///
/// `x = R` is accepted and equals `x = L`.
pub fn spectral_amplitude_periodic(model: &SpectralModel, x0: i64, x: i64, t: f64) -> Result<Complex> {
    let BoundarySpec::Periodic { left, right } = model.boundary else {
        return Err(Error::domain("expected a periodic spectral model"));
    };
    if !(left <= x0 && x0 < right) {
        return Err(Error::domain(format!(
            "start site {x0} is outside [{left}, {right})"
        )));
    }
    if !(left <= x && x <= right) {
        return Err(Error::domain(format!("site {x} lies outside [{left}, {right}]")));
    }
    check_t(t)?;
    let n = right - left;
    let sum: Complex = model
        .eigenvalues
        .iter()
        .zip(0..n)
        .map(|(&lambda, k)| unit_root(k * (x - x0), n) * Complex::from_polar(1.0, t * lambda))
        .sum();
    Ok(sum / n as f64)
}

/// Dispatches on the model's boundary.
pub fn spectral_amplitude(model: &SpectralModel, x0: i64, x: i64, t: f64) -> Result<Complex> {
    match model.boundary {
        BoundarySpec::Dirichlet { .. } => spectral_amplitude_dirichlet(model, x0, x, t),
        _ => spectral_amplitude_periodic(model, x0, x, t),
    }
}

/// Spectral amplitudes for every `(site, time)` cell.
pub fn spectral_grid(spec: &WalkSpec, sites: &[i64], times: &[f64]) -> Result<AmplitudeGrid> {
    let model = SpectralModel::for_spec(spec)?;
    check_grid_times(times)?;
    check_grid_sites(spec, sites, times.first().copied().unwrap_or(0.0))?;
    let columns = times
        .iter()
        .map(|&t| {
            sites
                .iter()
                .map(|&x| spectral_amplitude(&model, spec.x0(), x, t))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AmplitudeGrid::from_columns(
        *spec,
        sites.to_vec(),
        times.to_vec(),
        columns,
        Method::Spectral,
        None,
    ))
}

/// Largest step accepted by [`ode_evolve`].
pub const MAX_DT: f64 = 0.01;
/// Smallest padding accepted beyond the light cone on open lattices.
pub const MIN_WINDOW_PAD: i64 = 20;
/// Norm drift treated as an integrator failure.
pub const MAX_NORM_DRIFT: f64 = 1e-6;

/// State of an RK4 integration of `i ∂ψ/∂t = -ψ(x-1) + qψ(x) - ψ(x+1)`.
#[derive(Debug, Clone)]
pub struct OdeRun {
    spec: WalkSpec,
    /// Sites carried by `state`, inclusive. Everything outside is held at zero.
    window: (i64, i64),
    periodic: bool,
    dt: f64,
    time: f64,
    state: Vec<Complex>,
    max_norm_drift: f64,
    // RK4 scratch
    k1: Vec<Complex>,
    k2: Vec<Complex>,
    k3: Vec<Complex>,
    k4: Vec<Complex>,
    scratch: Vec<Complex>,
}

impl OdeRun {
    /// Sets up `δ_{x0}` on a lattice sized for evolution up to `horizon`.
    pub fn new(spec: &WalkSpec, horizon: f64, dt: f64, window_pad: i64) -> Result<Self> {
        if !(dt > 0.0 && dt <= MAX_DT) {
            return Err(Error::domain(format!("dt must lie in (0, {MAX_DT}], got {dt}")));
        }
        if window_pad < MIN_WINDOW_PAD {
            return Err(Error::domain(format!(
                "window_pad must be at least {MIN_WINDOW_PAD}, got {window_pad}"
            )));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::domain(format!(
                "horizon must be non-negative, got {horizon}"
            )));
        }
        let x0 = spec.x0();
        let reach = (2.0 * horizon).ceil() as i64 + window_pad;
        let (window, periodic) = match spec.boundary() {
            BoundarySpec::Unbounded => ((x0 - reach, x0 + reach), false),
            BoundarySpec::LeftWall { left } => ((left + 1, x0 + reach), false),
            BoundarySpec::Dirichlet { left, right } => ((left + 1, right - 1), false),
            BoundarySpec::Periodic { left, right } => ((left, right - 1), true),
        };
        let len = (window.1 - window.0 + 1) as usize;
        let mut state = vec![Complex::new(0.0, 0.0); len];
        state[(x0 - window.0) as usize] = Complex::new(1.0, 0.0);
        let zeros = vec![Complex::new(0.0, 0.0); len];
        Ok(OdeRun {
            spec: *spec,
            window,
            periodic,
            dt,
            time: 0.0,
            state,
            max_norm_drift: 0.0,
            k1: zeros.clone(),
            k2: zeros.clone(),
            k3: zeros.clone(),
            k4: zeros.clone(),
            scratch: zeros,
        })
    }

    pub fn spec(&self) -> &WalkSpec {
        &self.spec
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn state(&self) -> &[Complex] {
        &self.state
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.max_norm_drift
    }

    pub fn norm_sqr(&self) -> f64 {
        self.state.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `ψ(x)` at the current time; zero at walls and outside the window.
    /// On the ring, sites are taken modulo `N`.
    pub fn amplitude(&self, x: i64) -> Complex {
        let (lo, hi) = self.window;
        let x = if self.periodic {
            lo + (x - lo).rem_euclid(hi - lo + 1)
        } else {
            x
        };
        if x < lo || x > hi {
            Complex::new(0.0, 0.0)
        } else {
            self.state[(x - lo) as usize]
        }
    }

    /// Replaces the state by its complex conjugate, which reverses time.
    pub fn conjugate(&mut self) {
        for z in &mut self.state {
            *z = z.conj();
        }
    }

    /// Integrates forward by `duration` in equal steps no longer than `dt`.
    pub fn advance(&mut self, duration: f64) -> Result<()> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::domain(format!(
                "duration must be non-negative, got {duration}"
            )));
        }
        if duration == 0.0 {
            return Ok(());
        }
        let steps = (duration / self.dt).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        let start = self.time;
        for step in 1..=steps {
            self.rk4_step(h);
            self.time = start + step as f64 * h;
            let drift = (self.norm_sqr() - 1.0).abs();
            self.max_norm_drift = self.max_norm_drift.max(drift);
            if drift > MAX_NORM_DRIFT {
                return Err(Error::Integrator {
                    drift,
                    time: self.time,
                });
            }
        }
        Ok(())
    }

    /// `dψ_j/dt = i(ψ_{j-1} + ψ_{j+1}) - iqψ_j`.
    fn derivative(periodic: bool, q: f64, psi: &[Complex], out: &mut [Complex]) {
        let n = psi.len();
        let i = Complex::new(0.0, 1.0);
        for j in 0..n {
            let left = if j > 0 {
                psi[j - 1]
            } else if periodic {
                psi[n - 1]
            } else {
                Complex::new(0.0, 0.0)
            };
            let right = if j + 1 < n {
                psi[j + 1]
            } else if periodic {
                psi[0]
            } else {
                Complex::new(0.0, 0.0)
            };
            out[j] = i * (left + right - psi[j] * q);
        }
    }

    fn rk4_step(&mut self, h: f64) {
        let q = self.spec.q();
        let p = self.periodic;
        Self::derivative(p, q, &self.state, &mut self.k1);
        for j in 0..self.state.len() {
            self.scratch[j] = self.state[j] + self.k1[j] * (0.5 * h);
        }
        Self::derivative(p, q, &self.scratch, &mut self.k2);
        for j in 0..self.state.len() {
            self.scratch[j] = self.state[j] + self.k2[j] * (0.5 * h);
        }
        Self::derivative(p, q, &self.scratch, &mut self.k3);
        for j in 0..self.state.len() {
            self.scratch[j] = self.state[j] + self.k3[j] * h;
        }
        Self::derivative(p, q, &self.scratch, &mut self.k4);
        for j in 0..self.state.len() {
            self.state[j] += (self.k1[j] + (self.k2[j] + self.k3[j]) * 2.0 + self.k4[j]) * (h / 6.0);
        }
    }
}

/// Integrates from `δ_{x0}` up to `horizon`.
pub fn ode_evolve(spec: &WalkSpec, horizon: f64, dt: f64, window_pad: i64) -> Result<OdeRun> {
    let mut run = OdeRun::new(spec, horizon, dt, window_pad)?;
    run.advance(horizon)?;
    Ok(run)
}

/// ODE amplitudes for every `(site, time)` cell; `times` must be non-decreasing.
pub fn ode_grid(
    spec: &WalkSpec,
    sites: &[i64],
    times: &[f64],
    dt: f64,
    window_pad: i64,
) -> Result<AmplitudeGrid> {
    check_grid_times(times)?;
    check_grid_sites(spec, sites, times.first().copied().unwrap_or(0.0))?;
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("ODE grid needs non-decreasing times"));
    }
    let horizon = times.last().copied().unwrap_or(0.0);
    let mut run = OdeRun::new(spec, horizon, dt, window_pad)?;
    let mut columns = Vec::with_capacity(times.len());
    for &t in times {
        run.advance(t - run.time())?;
        columns.push(sites.iter().map(|&x| run.amplitude(x)).collect());
    }
    Ok(AmplitudeGrid::from_columns(
        *spec,
        sites.to_vec(),
        times.to_vec(),
        columns,
        Method::Ode,
        None,
    ))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn dirichlet(left: i64, right: i64, q: f64) -> SpectralModel {
        SpectralModel::new(BoundarySpec::Dirichlet { left, right }, q).unwrap()
    }

    #[test]
    fn model_invariants() {
        let m = dirichlet(3, 33, 0.5);
        assert_eq!(m.mode_count(), 29);
        let p = SpectralModel::new(BoundarySpec::Periodic { left: 0, right: 8 }, 0.5).unwrap();
        assert_eq!(p.mode_count(), 8);
        for &l in m.eigenvalues().iter().chain(p.eigenvalues()) {
            assert!((-2.5 - 1e-15..=1.5 + 1e-15).contains(&l));
        }
        assert!(SpectralModel::new(BoundarySpec::Unbounded, 0.0).is_err());
        assert!(SpectralModel::new(BoundarySpec::LeftWall { left: 0 }, 0.0).is_err());
    }

    #[test]
    fn dirichlet_examples() {
        let m = dirichlet(0, 30, 0.0);
        for &t in &[0.0, 1.0, 17.3] {
            assert_eq!(
                spectral_amplitude_dirichlet(&m, 13, 0, t).unwrap(),
                Complex::new(0.0, 0.0)
            );
            assert_eq!(
                spectral_amplitude_dirichlet(&m, 13, 30, t).unwrap(),
                Complex::new(0.0, 0.0)
            );
        }
        let psi = spectral_amplitude_dirichlet(&m, 13, 13, 5.0).unwrap();
        assert!((psi - Complex::new(-0.245_935_763_010_802_085, 0.0)).norm() < 1e-14);

        let m = dirichlet(0, 2, 1.7);
        let psi = spectral_amplitude_dirichlet(&m, 1, 1, 2.5).unwrap();
        assert!((psi - Complex::from_polar(1.0, -1.7 * 2.5)).norm() < 1e-15);

        assert!(spectral_amplitude_dirichlet(&m, 0, 1, 1.0).is_err());
        assert!(spectral_amplitude_dirichlet(&m, 1, 3, 1.0).is_err());
    }

    #[test]
    fn periodic_examples() {
        let m = SpectralModel::new(BoundarySpec::Periodic { left: 0, right: 4 }, 0.0).unwrap();
        let psi = spectral_amplitude_periodic(&m, 1, 3, 2.0).unwrap();
        assert!((psi - Complex::new(-0.826_821_810_431_805_957, 0.0)).norm() < 1e-14);
        for x in 0..4 {
            let psi = spectral_amplitude_periodic(&m, 1, x, 0.0).unwrap();
            let want = if x == 1 { 1.0 } else { 0.0 };
            assert!((psi - Complex::new(want, 0.0)).norm() < 1e-15);
        }
        for &t in &[0.3, 4.0] {
            let l = spectral_amplitude_periodic(&m, 1, 0, t).unwrap();
            let r = spectral_amplitude_periodic(&m, 1, 4, t).unwrap();
            assert_eq!(l, r);
        }
    }

    #[test]
    fn spectral_unitarity() {
        let m = dirichlet(-4, 12, 0.3);
        let p = SpectralModel::new(BoundarySpec::Periodic { left: -4, right: 12 }, 0.3).unwrap();
        for &t in &[0.5, 5.0, 40.0] {
            let d: f64 = (-3..12)
                .map(|x| spectral_amplitude_dirichlet(&m, 2, x, t).unwrap().norm_sqr())
                .sum();
            let r: f64 = (-4..12)
                .map(|x| spectral_amplitude_periodic(&p, 2, x, t).unwrap().norm_sqr())
                .sum();
            assert!((d - 1.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ode_start_state_and_preconditions() {
        let spec = WalkSpec::new(BoundarySpec::Unbounded, 0.0, 5).unwrap();
        let run = ode_evolve(&spec, 0.0, 1e-3, 20).unwrap();
        assert_eq!(run.amplitude(5), Complex::new(1.0, 0.0));
        assert_eq!(run.amplitude(6), Complex::new(0.0, 0.0));
        assert!(ode_evolve(&spec, 1.0, 0.02, 20).is_err());
        assert!(ode_evolve(&spec, 1.0, 1e-3, 19).is_err());
        assert!(ode_evolve(&spec, -1.0, 1e-3, 20).is_err());
    }

    #[test]
    fn ode_unbounded_matches_bessel() {
        let spec = WalkSpec::new(BoundarySpec::Unbounded, 0.0, 0).unwrap();
        let run = ode_evolve(&spec, 1.0, 1e-3, 20).unwrap();
        assert!((run.amplitude(0) - Complex::new(0.223_890_779_141_235_67, 0.0)).norm() < 1e-8);
        assert!(run.max_norm_drift() < 1e-8);
    }

    #[test]
    fn ode_dirichlet_matches_spectral() {
        let spec = WalkSpec::new(BoundarySpec::Dirichlet { left: 0, right: 30 }, 0.0, 13).unwrap();
        let run = ode_evolve(&spec, 5.0, 1e-3, 20).unwrap();
        let m = SpectralModel::for_spec(&spec).unwrap();
        let worst = (0..=30)
            .map(|x| (run.amplitude(x) - spectral_amplitude_dirichlet(&m, 13, x, 5.0).unwrap()).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-7, "{worst}");
    }

    #[test]
    fn ode_ring_of_one_and_two() {
        for right in [1, 2] {
            let spec = WalkSpec::new(BoundarySpec::Periodic { left: 0, right }, 0.4, 0).unwrap();
            let run = ode_evolve(&spec, 2.0, 1e-3, 20).unwrap();
            let m = SpectralModel::for_spec(&spec).unwrap();
            for x in 0..right {
                let want = spectral_amplitude_periodic(&m, 0, x, 2.0).unwrap();
                assert!((run.amplitude(x) - want).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn ode_grid_is_incremental() {
        let spec = WalkSpec::new(BoundarySpec::Periodic { left: 0, right: 6 }, 0.0, 2).unwrap();
        let grid = ode_grid(&spec, &[0, 1, 2], &[0.0, 0.5, 1.0], 1e-3, 20).unwrap();
        let direct = ode_evolve(&spec, 1.0, 1e-3, 20).unwrap();
        assert!((grid.get(2, 2) - direct.amplitude(2)).norm() < 1e-12);
        assert!(ode_grid(&spec, &[0], &[1.0, 0.5], 1e-3, 20).is_err());
    }
}
