//! Cross-checks run by `qwalk verify`.
//!
//! Every check reduces to one measured number compared against a fixed
//! tolerance (`measured <= tolerance` passes). Kernel-level checks always run;
//! walk-level checks run for each spec in the suite.

use std::fmt;

use crate::bessel::{bessel_j, bessel_j_batch, bessel_j_integral_oracle, DEFAULT_MAX_ORDER};
use crate::bounds::{ln_apriori_error_bound, ln_factorial, truncation_k};
use crate::error::Result;
use crate::oracle::{ode_evolve, spectral_amplitude, SpectralModel};
use crate::walk::{mirror_point, mirror_point_closed, BoundarySpec, Propagator, WalkSpec};

/// Times probed by the walk-level checks.
pub const PROBE_TIMES: [f64; 6] = [0.5, 2.0, 5.0, 10.0, 20.0, 40.0];
/// Horizons compared against the ODE integrator.
pub const ODE_TIMES: [f64; 2] = [1.0, 5.0];
const ODE_DT: f64 = 1e-3;
const ODE_PAD: i64 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl PropertyCheck {
    fn new(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        PropertyCheck {
            name: name.into(),
            measured,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

impl fmt::Display for PropertyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} measured={:.3e} tolerance={:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Walks to check; empty selects [`default_specs`].
    pub specs: Vec<WalkSpec>,
    pub epsilon: f64,
    /// Scale `J_0` by `1 + 1e-3` in every series kernel.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            specs: Vec::new(),
            epsilon: 1e-5,
            inject_fault: false,
        }
    }
}

/// The `figure1` walks plus a few small lattices.
pub fn default_specs() -> Vec<WalkSpec> {
    let mk = |b, q, x0| WalkSpec::new(b, q, x0).expect("valid built-in spec");
    vec![
        mk(BoundarySpec::Unbounded, 0.0, 13),
        mk(BoundarySpec::LeftWall { left: 0 }, 0.0, 13),
        mk(BoundarySpec::Dirichlet { left: 0, right: 30 }, 0.0, 13),
        mk(BoundarySpec::Periodic { left: 0, right: 30 }, 0.0, 13),
        mk(BoundarySpec::Dirichlet { left: 0, right: 2 }, 0.8, 1),
        mk(BoundarySpec::Dirichlet { left: -3, right: 5 }, 2.0, 0),
        mk(BoundarySpec::Periodic { left: 0, right: 4 }, 0.0, 1),
        mk(BoundarySpec::Periodic { left: 10, right: 26 }, 2.0, 12),
    ]
}

pub fn run_suite(options: &VerifyOptions) -> Result<Vec<PropertyCheck>> {
    let mut checks = kernel_checks()?;
    let specs = if options.specs.is_empty() {
        default_specs()
    } else {
        options.specs.clone()
    };
    for spec in &specs {
        checks.extend(walk_checks(spec, options.epsilon, options.inject_fault)?);
    }
    Ok(checks)
}

fn kernel_checks() -> Result<Vec<PropertyCheck>> {
    let mut quad = 0.0f64;
    for n in (0..=50).step_by(5) {
        for &x in &[0.5, 5.0, 17.0, 33.3, 50.0] {
            quad = quad.max((bessel_j(n, x)? - bessel_j_integral_oracle(n, x)?).abs());
        }
    }

    let (mut norm, mut hansen) = (0.0f64, 0.0f64);
    for &x in &[0.7, 4.0, 25.0, 120.0] {
        let batch = bessel_j_batch(x, x as usize + 60)?;
        let v = batch.values();
        let even = v[0] + 2.0 * v.iter().skip(2).step_by(2).sum::<f64>();
        let squares = v[0] * v[0] + 2.0 * v[1..].iter().map(|j| j * j).sum::<f64>();
        norm = norm.max((even - 1.0).abs());
        hansen = hansen.max((squares - 1.0).abs());
    }

    let mut deriv = 0.0f64;
    let h = 1e-5;
    for n in 1..=50 {
        for i in 1..=40 {
            let x = 0.5 * i as f64;
            let batch = bessel_j_batch(x, n + 1)?;
            let fd = (bessel_j(n, x + h)? - bessel_j(n, x - h)?) / (2.0 * h);
            deriv = deriv.max((fd - 0.5 * (batch.get(n - 1) - batch.get(n + 1))).abs());
        }
    }

    // max |J_n(2t)| n! / t^n, which the bound caps at 1
    let mut ratio = 0.0f64;
    for n in 0..=30 {
        for i in 1..=20 {
            let t = 0.5 * i as f64;
            let bound = (n as f64 * t.ln() - ln_factorial(n as u64)).exp();
            ratio = ratio.max(bessel_j(n, 2.0 * t)?.abs() / bound);
        }
    }

    let mut mismatches = 0usize;
    for (l, r, x0) in [(0, 30, 13), (-7, 2, -1), (5, 7, 6)] {
        for n in -100..=100 {
            if mirror_point(l, r, x0, n) != mirror_point_closed(l, r, x0, n) {
                mismatches += 1;
            }
        }
    }

    let k = truncation_k(60.0, 1e-5, 30)?.k;

    Ok(vec![
        PropertyCheck::new("bessel.quadrature_agreement", quad, 1e-9),
        PropertyCheck::new("bessel.normalization", norm, 1e-12),
        PropertyCheck::new("bessel.hansen_sum", hansen, 1e-10),
        PropertyCheck::new("bessel.derivative_identity", deriv, 1e-6),
        PropertyCheck::new("bessel.power_bound_ratio", ratio, 1.0),
        PropertyCheck::new("images.closed_form_mismatches", mismatches as f64, 0.0),
        PropertyCheck::new(
            "bounds.figure_truncation_k_deviation",
            (k as f64 - 12.0).abs(),
            0.0,
        ),
    ])
}

fn label(spec: &WalkSpec) -> String {
    let b = match spec.boundary() {
        BoundarySpec::Unbounded => "unbounded".to_string(),
        BoundarySpec::LeftWall { left } => format!("left[L={left}]"),
        BoundarySpec::Dirichlet { left, right } => format!("dirichlet[L={left},R={right}]"),
        BoundarySpec::Periodic { left, right } => format!("periodic[L={left},R={right}]"),
    };
    format!("{b}[x0={},q={}]", spec.x0(), spec.q())
}

fn propagator(spec: &WalkSpec, t: f64, k: Option<usize>, sites: &[i64], fault: bool) -> Result<Propagator> {
    let mut prop = Propagator::new(spec, t, k, sites, DEFAULT_MAX_ORDER)?;
    if fault {
        if let Some(kernel) = prop.kernel_mut() {
            kernel.scale_value(0, 1.0 + 1e-3);
        }
    }
    Ok(prop)
}

fn walk_checks(spec: &WalkSpec, epsilon: f64, fault: bool) -> Result<Vec<PropertyCheck>> {
    let name = label(spec);
    let mut checks = Vec::new();
    let x0 = spec.x0();

    // |ψ| does not depend on q
    let shifted = WalkSpec::new(spec.boundary(), spec.q() + 1.3, x0)?;
    let mut phase = 0.0f64;

    match spec.boundary() {
        BoundarySpec::Unbounded | BoundarySpec::LeftWall { .. } => {
            let mut unitarity = 0.0f64;
            for &t in &PROBE_TIMES {
                let reach = (2.0 * t).ceil() as i64 + 40;
                let lo = match spec.boundary() {
                    BoundarySpec::LeftWall { left } => left.max(x0 - reach),
                    _ => x0 - reach,
                };
                let sites: Vec<i64> = (lo..=x0 + reach).collect();
                let prop = propagator(spec, t, None, &sites, fault)?;
                let other = propagator(&shifted, t, None, &sites, fault)?;
                let mut total = 0.0;
                for &x in &sites {
                    let a = prop.amplitude(x)?;
                    total += a.norm_sqr();
                    phase = phase.max((a.norm() - other.amplitude(x)?.norm()).abs());
                }
                unitarity = unitarity.max((total - 1.0).abs());
            }
            checks.push(PropertyCheck::new(format!("{name}.unitarity"), unitarity, 1e-10));
            if let BoundarySpec::LeftWall { left } = spec.boundary() {
                let mut wall = 0.0f64;
                for &t in &PROBE_TIMES {
                    let prop = propagator(spec, t, None, &[left], fault)?;
                    wall = wall.max(prop.amplitude(left)?.norm());
                }
                checks.push(PropertyCheck::new(format!("{name}.wall"), wall, 0.0));
            }
        }
        BoundarySpec::Dirichlet { left, right } | BoundarySpec::Periodic { left, right } => {
            let len = (right - left) as usize;
            let periodic = matches!(spec.boundary(), BoundarySpec::Periodic { .. });
            let model = SpectralModel::for_spec(spec)?;
            let sites: Vec<i64> = if periodic {
                (left..right).collect()
            } else {
                (left..=right).collect()
            };
            let (mut oracle, mut unitarity, mut spectral_unitarity, mut edge) =
                (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            let mut edge_ratio = 0.0f64;
            for &t in &PROBE_TIMES {
                let plan = truncation_k(t, epsilon, len)?;
                let prop = propagator(spec, t, Some(plan.k), &sites, fault)?;
                let other = propagator(&shifted, t, Some(plan.k), &sites, fault)?;
                let (mut total, mut spectral_total) = (0.0, 0.0);
                for &x in &sites {
                    let a = prop.amplitude(x)?;
                    let s = spectral_amplitude(&model, x0, x, t)?;
                    oracle = oracle.max((a - s).norm());
                    total += a.norm_sqr();
                    spectral_total += s.norm_sqr();
                    phase = phase.max((a.norm() - other.amplitude(x)?.norm()).abs());
                }
                unitarity = unitarity.max((total - 1.0).abs());
                spectral_unitarity = spectral_unitarity.max((spectral_total - 1.0).abs());
                if periodic {
                    edge = edge.max((prop.amplitude(left)? - prop.amplitude(right)?).norm());
                } else {
                    // log space: both sides can sit far below f64 range
                    let ln_bound = ln_apriori_error_bound(plan.k, t, len)?;
                    let worst = prop.amplitude(left)?.norm().max(prop.amplitude(right)?.norm());
                    if worst > 0.0 {
                        edge_ratio = edge_ratio.max((worst.ln() - ln_bound).exp());
                    }
                }
            }
            checks.push(PropertyCheck::new(
                format!("{name}.series_vs_spectral"),
                oracle,
                epsilon,
            ));
            checks.push(PropertyCheck::new(
                format!("{name}.unitarity"),
                unitarity,
                10.0 * epsilon,
            ));
            checks.push(PropertyCheck::new(
                format!("{name}.spectral_unitarity"),
                spectral_unitarity,
                1e-10,
            ));
            if periodic {
                checks.push(PropertyCheck::new(
                    format!("{name}.ring_identification"),
                    edge,
                    2.0 * epsilon,
                ));
            } else {
                checks.push(PropertyCheck::new(
                    format!("{name}.walls_over_tail_bound"),
                    edge_ratio,
                    1.0,
                ));
            }
        }
    }
    checks.push(PropertyCheck::new(
        format!("{name}.phase_invariance"),
        phase,
        1e-14,
    ));

    let mut ode = 0.0f64;
    for &t in &ODE_TIMES {
        let run = ode_evolve(spec, t, ODE_DT, ODE_PAD)?;
        let (lo, hi) = run.window();
        let k = match spec.boundary().length() {
            Some(len) => Some(truncation_k(t, epsilon.min(1e-9), len)?.k),
            None => None,
        };
        let sites: Vec<i64> = (lo..=hi).collect();
        let prop = Propagator::new(spec, t, k, &sites, DEFAULT_MAX_ORDER)?;
        for &x in &sites {
            ode = ode.max((prop.amplitude(x)? - run.amplitude(x)).norm());
        }
    }
    checks.push(PropertyCheck::new(format!("{name}.series_vs_ode"), ode, 1e-7));
    Ok(checks)
}
