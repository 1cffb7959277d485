//! The mesoscopic kinetic equations for the densities `ρ_t^±`.
//!
//! Homogeneous form (convolutions replaced by `⟨g⟩ρ`) and a periodic-grid
//! form with circular convolutions, an RK4 integrator with step-doubling
//! control, damped fixed-point iteration and linear stability.

mod grid;
mod integrate;

pub use grid::{integrate_field, rhs_field, FieldParams, Grid, Kernel};
pub use integrate::{integrate, CeilingViolation, IntegrateOptions, KineticTrajectory, VectorField};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::potential::PotentialSet;
use crate::{Error, Result};

/// Indices into the potential arrays, matching `POTENTIAL_NAMES`.
pub(crate) const PHI_P: usize = 0;
pub(crate) const PHI_M: usize = 1;
pub(crate) const PSI_P: usize = 2;
pub(crate) const PSI_M: usize = 3;
pub(crate) const KAPPA_P: usize = 4;
pub(crate) const KAPPA_M: usize = 5;
pub(crate) const TAU_P: usize = 6;
pub(crate) const TAU_M: usize = 7;

/// Whether potential `i` is convolved with `ρ⁺` (otherwise `ρ⁻`).
pub(crate) const ACTS_ON_PLUS: [bool; 8] = [true, false, false, true, true, false, false, true];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KineticParams {
    /// `⟨g⟩` for the eight potentials in storage order.
    pub masses: [f64; 8],
    pub z_plus: f64,
    pub z_minus: f64,
    pub mutation_multiplier: f64,
}

impl KineticParams {
    pub fn from_potentials(p: &PotentialSet, dim: usize) -> Result<Self> {
        p.validate()?;
        let pots = p.potentials();
        let mut masses = [0.0; 8];
        for (m, g) in masses.iter_mut().zip(pots.iter()) {
            *m = g.mass(dim);
        }
        Ok(KineticParams {
            masses,
            z_plus: p.z_plus,
            z_minus: p.z_minus,
            mutation_multiplier: p.mutation_multiplier,
        })
    }

    pub fn free(z_plus: f64, z_minus: f64) -> Self {
        KineticParams { masses: [0.0; 8], z_plus, z_minus, mutation_multiplier: 1.0 }
    }

    /// Convolutions `⟨g⟩ρ` of a constant state.
    fn convolutions(&self, rp: f64, rm: f64) -> [f64; 8] {
        let mut c = [0.0; 8];
        for i in 0..8 {
            c[i] = self.masses[i] * if ACTS_ON_PLUS[i] { rp } else { rm };
        }
        c
    }
}

/// Right-hand side at one point given the eight convolutions.
#[inline]
pub(crate) fn local_rhs(rp: f64, rm: f64, c: &[f64; 8], zp: f64, zm: f64, m: f64) -> (f64, f64) {
    let mut_p = m * libm::exp(-c[KAPPA_P] - c[TAU_P]);
    let mut_m = m * libm::exp(-c[KAPPA_M] - c[TAU_M]);
    let birth_p = zp * libm::exp(-c[PHI_P] - c[PSI_P]);
    let birth_m = zm * libm::exp(-c[PHI_M] - c[PSI_M]);
    (-(1.0 + mut_p) * rp + birth_p + mut_m * rm, -(1.0 + mut_m) * rm + birth_m + mut_p * rp)
}

fn check_density(rp: f64, rm: f64) -> Result<()> {
    if !(rp >= 0.0 && rm >= 0.0) || !rp.is_finite() || !rm.is_finite() {
        return Err(Error::Argument(format!("densities must be finite and non-negative, got ({rp}, {rm})")));
    }
    Ok(())
}

fn rhs_unchecked(rp: f64, rm: f64, params: &KineticParams) -> (f64, f64) {
    let c = params.convolutions(rp, rm);
    local_rhs(rp, rm, &c, params.z_plus, params.z_minus, params.mutation_multiplier)
}

/// Time derivative of spatially constant densities.
pub fn rhs_homogeneous(rho_plus: f64, rho_minus: f64, params: &KineticParams) -> Result<(f64, f64)> {
    check_density(rho_plus, rho_minus)?;
    Ok(rhs_unchecked(rho_plus, rho_minus, params))
}

/// Densities at one time: one value per grid cell, or a single value for
/// the homogeneous system.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    pub time: f64,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl DensityState {
    pub fn homogeneous(time: f64, rho_plus: f64, rho_minus: f64) -> Self {
        DensityState { time, plus: vec![rho_plus], minus: vec![rho_minus] }
    }

    pub fn constant(time: f64, cells: usize, rho_plus: f64, rho_minus: f64) -> Self {
        DensityState { time, plus: vec![rho_plus; cells], minus: vec![rho_minus; cells] }
    }

    pub fn cells(&self) -> usize {
        self.plus.len()
    }

    /// Spatial means.
    pub fn mean(&self) -> (f64, f64) {
        let n = self.plus.len().max(1) as f64;
        (self.plus.iter().sum::<f64>() / n, self.minus.iter().sum::<f64>() / n)
    }

    pub(crate) fn to_flat(&self) -> Vec<f64> {
        let mut y = self.plus.clone();
        y.extend_from_slice(&self.minus);
        y
    }

    pub(crate) fn from_flat(time: f64, y: &[f64]) -> Self {
        let h = y.len() / 2;
        DensityState { time, plus: y[..h].to_vec(), minus: y[h..].to_vec() }
    }
}

impl VectorField for KineticParams {
    fn len(&self) -> usize {
        2
    }

    fn eval(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let (a, b) = rhs_homogeneous(y[0], y[1], self)?;
        out[0] = a;
        out[1] = b;
        Ok(())
    }
}

/// Solve the homogeneous system from `(ρ⁺, ρ⁻)`, recording `output_times`.
pub fn integrate_homogeneous(
    rho0: (f64, f64),
    params: &KineticParams,
    t_end: f64,
    dt: f64,
    tol: f64,
    output_times: &[f64],
) -> Result<KineticTrajectory> {
    let opts = IntegrateOptions { t_end, dt, tol, output_times: output_times.to_vec(), ceiling: None };
    integrate(params, &DensityState::homogeneous(0.0, rho0.0, rho0.1), &opts)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryPoint {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub iterations: usize,
    /// `‖rhs‖∞` at the returned point.
    pub residual: f64,
}

fn residual(rp: f64, rm: f64, params: &KineticParams) -> f64 {
    let (a, b) = rhs_unchecked(rp, rm, params);
    libm::fabs(a).max(libm::fabs(b))
}

/// Damped Picard iteration `ρ ← (1-θ)ρ + θF(ρ)` on the balance map.
pub fn stationary(
    params: &KineticParams,
    init: (f64, f64),
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<StationaryPoint> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::Argument(format!("damping must lie in (0, 1], got {damping}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    check_density(init.0, init.1)?;
    let m = params.mutation_multiplier;
    let (mut rp, mut rm) = init;
    for it in 0..=max_iter {
        let res = residual(rp, rm, params);
        if !res.is_finite() {
            return Err(Error::Numerical(format!("residual became non-finite at iteration {it}")));
        }
        if res < tol {
            return Ok(StationaryPoint { rho_plus: rp, rho_minus: rm, iterations: it, residual: res });
        }
        if it == max_iter {
            break;
        }
        let c = params.convolutions(rp, rm);
        let mut_p = m * libm::exp(-c[KAPPA_P] - c[TAU_P]);
        let mut_m = m * libm::exp(-c[KAPPA_M] - c[TAU_M]);
        let fp = (params.z_plus * libm::exp(-c[PHI_P] - c[PSI_P]) + mut_m * rm) / (1.0 + mut_p);
        let fm = (params.z_minus * libm::exp(-c[PHI_M] - c[PSI_M]) + mut_p * rp) / (1.0 + mut_m);
        rp = (1.0 - damping) * rp + damping * fp;
        rm = (1.0 - damping) * rm + damping * fm;
    }
    Err(Error::Numerical(format!(
        "fixed-point iteration did not converge in {max_iter} iterations (residual {})",
        residual(rp, rm, params)
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn name(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

/// Real-part threshold below which an eigenvalue counts as zero.
const MARGINAL_EPS: f64 = 1e-12;
/// Central-difference step for the Jacobian check.
const FD_STEP: f64 = 1e-6;
/// Allowed relative disagreement between analytic and numerical Jacobians.
const FD_REL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityReport {
    pub fixed_point: (f64, f64),
    pub jacobian: [[f64; 2]; 2],
    /// `(re, im)` pairs.
    pub eigenvalues: [(f64, f64); 2],
    pub classification: Stability,
    /// Max entrywise `|J - J_fd|` relative to `max |J|`.
    pub fd_rel_error: f64,
}

impl StabilityReport {
    /// `|λ² - tr λ + det|` for each eigenvalue.
    pub fn characteristic_residual(&self) -> f64 {
        let j = &self.jacobian;
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        self.eigenvalues
            .iter()
            .map(|&(re, im)| {
                let pr = re * re - im * im - tr * re + det;
                let pi = 2.0 * re * im - tr * im;
                libm::hypot(pr, pi)
            })
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j = &self.jacobian;
        writeln!(f, "fixed_point = ({:.12}, {:.12})", self.fixed_point.0, self.fixed_point.1)?;
        writeln!(f, "jacobian = [[{:.12}, {:.12}], [{:.12}, {:.12}]]", j[0][0], j[0][1], j[1][0], j[1][1])?;
        for (i, (re, im)) in self.eigenvalues.iter().enumerate() {
            writeln!(f, "eigenvalue_{} = {re:.12} {:+.12}i", i + 1, im)?;
        }
        write!(f, "classification = {}", self.classification.name())
    }
}

/// Closed-form partial derivatives of the homogeneous right-hand side.
pub fn jacobian_analytic(rp: f64, rm: f64, params: &KineticParams) -> [[f64; 2]; 2] {
    let [fp, fm, sp, sm, kp, km, tp, tm] = params.masses;
    let m = params.mutation_multiplier;
    let e_kp = m * libm::exp(-kp * rp - tp * rm);
    let e_km = m * libm::exp(-km * rm - tm * rp);
    let b_p = params.z_plus * libm::exp(-fp * rp - sp * rm);
    let b_m = params.z_minus * libm::exp(-fm * rm - sm * rp);
    [
        [
            -1.0 - e_kp + kp * e_kp * rp - fp * b_p - tm * e_km * rm,
            tp * e_kp * rp - sp * b_p + e_km - km * e_km * rm,
        ],
        [
            tm * e_km * rm - sm * b_m + e_kp - kp * e_kp * rp,
            -1.0 - e_km + km * e_km * rm - fm * b_m - tp * e_kp * rp,
        ],
    ]
}

fn jacobian_fd(rp: f64, rm: f64, params: &KineticParams) -> [[f64; 2]; 2] {
    let h = FD_STEP;
    let (a1, b1) = rhs_unchecked(rp + h, rm, params);
    let (a0, b0) = rhs_unchecked(rp - h, rm, params);
    let (c1, d1) = rhs_unchecked(rp, rm + h, params);
    let (c0, d0) = rhs_unchecked(rp, rm - h, params);
    [[(a1 - a0) / (2.0 * h), (c1 - c0) / (2.0 * h)], [(b1 - b0) / (2.0 * h), (d1 - d0) / (2.0 * h)]]
}

fn eigenvalues_2x2(j: &[[f64; 2]; 2]) -> [(f64, f64); 2] {
    let half_tr = 0.5 * (j[0][0] + j[1][1]);
    let half_diff = 0.5 * (j[0][0] - j[1][1]);
    let disc = half_diff * half_diff + j[0][1] * j[1][0];
    if disc >= 0.0 {
        let s = libm::sqrt(disc);
        [(half_tr + s, 0.0), (half_tr - s, 0.0)]
    } else {
        let s = libm::sqrt(-disc);
        [(half_tr, s), (half_tr, -s)]
    }
}

/// Linearization at a stationary point whose residual is below `tol`.
pub fn jacobian_homogeneous(fixed_point: (f64, f64), params: &KineticParams, tol: f64) -> Result<StabilityReport> {
    let (rp, rm) = fixed_point;
    check_density(rp, rm)?;
    let res = residual(rp, rm, params);
    if !(res < tol) {
        return Err(Error::Argument(format!("({rp}, {rm}) is not stationary: residual {res} >= {tol}")));
    }
    let j = jacobian_analytic(rp, rm, params);
    let fd = jacobian_fd(rp, rm, params);
    let scale = j.iter().flatten().map(|v| libm::fabs(*v)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let fd_rel_error = (0..4).map(|k| libm::fabs(j[k / 2][k % 2] - fd[k / 2][k % 2])).fold(0.0, f64::max) / scale;
    if !(fd_rel_error < FD_REL_TOL) {
        return Err(Error::Numerical(format!(
            "analytic Jacobian disagrees with finite differences (relative error {fd_rel_error:e})"
        )));
    }
    let eigenvalues = eigenvalues_2x2(&j);
    let max_re = eigenvalues[0].0.max(eigenvalues[1].0);
    let classification = if max_re < -MARGINAL_EPS {
        Stability::Stable
    } else if max_re > MARGINAL_EPS {
        Stability::Unstable
    } else {
        Stability::Marginal
    };
    Ok(StabilityReport { fixed_point, jacobian: j, eigenvalues, classification, fd_rel_error })
}
