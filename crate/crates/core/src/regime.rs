//! Parameter-regime constants.
//!
//! With the weight `ρ ≡ 1` on a periodic box every constant is independent
//! of the position `x`, so the suprema in the conditions are single
//! numbers. The integrability condition on the potentials holds
//! automatically for the compactly supported menu and is not modeled.
//!
//! Note that the third and fourth inequalities multiply to
//! `C_{κ⁺}C_{τ⁺}C_{κ⁻}C_{τ⁻} < 1`, while every `C` is at least one, so the
//! two can never hold together; the same is true of the mean-field
//! versions. Reports therefore always carry a FAIL verdict on at least one
//! of them.

use core::fmt;

use alloc::format;

use crate::{Error, PotentialSet, PotentialSpec, Result};

/// The Ruelle weight `(α⁺, α⁻)`; the spatial weight is fixed to one.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct RuelleWeight {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl RuelleWeight {
    pub fn new(alpha_plus: f64, alpha_minus: f64) -> Self {
        RuelleWeight { alpha_plus, alpha_minus }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Conditions built from `C_g = exp(e^α ∫(1 - e^{-g}))`.
    FokkerPlanck,
    /// Mean-field conditions built from `exp(e^α ∫g)`.
    Vlasov,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::FokkerPlanck => "fokker_planck",
            Regime::Vlasov => "vlasov",
        }
    }
}

pub const THRESHOLDS: [f64; 4] = [2.0, 2.0, 1.0, 1.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub weight: RuelleWeight,
    /// Left-hand sides of the four inequalities.
    pub lhs: [f64; 4],
    pub thresholds: [f64; 4],
    /// `threshold - lhs`; an inequality holds iff its margin is positive.
    pub margins: [f64; 4],
    pub a_alpha: f64,
    pub lambda_0: f64,
    pub pass: bool,
}

impl RegimeReport {
    fn from_lhs(regime: Regime, weight: RuelleWeight, lhs: [f64; 4]) -> Self {
        let mut margins = [0.0; 4];
        for i in 0..4 {
            margins[i] = THRESHOLDS[i] - lhs[i];
        }
        let a_alpha = contraction_from_lhs(&lhs);
        RegimeReport {
            regime,
            weight,
            lhs,
            thresholds: THRESHOLDS,
            margins,
            a_alpha,
            lambda_0: 1.0 - a_alpha,
            pass: margins.iter().all(|&m| m > 0.0),
        }
    }

    pub fn holds(&self, i: usize) -> bool {
        self.margins[i] > 0.0
    }
}

impl fmt::Display for RegimeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "regime {} at alpha = ({}, {})",
            self.regime.name(),
            self.weight.alpha_plus,
            self.weight.alpha_minus
        )?;
        writeln!(f, "  condition 1 (integrability): automatic for compact support, weight 1")?;
        for i in 0..4 {
            writeln!(
                f,
                "  inequality {}: lhs {:.12} < {}  margin {:+.6e}  {}",
                i + 1,
                self.lhs[i],
                self.thresholds[i],
                self.margins[i],
                if self.holds(i) { "ok" } else { "FAIL" }
            )?;
        }
        writeln!(f, "  a(alpha) = {:.12}", self.a_alpha)?;
        writeln!(f, "  lambda_0 = {:.12}", self.lambda_0)?;
        write!(f, "  verdict: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// `C_g(α) = exp(e^α ∫(1 - e^{-g(u)}) du)`; at least one.
pub fn c_constant(g: &PotentialSpec, alpha: f64, dim: usize) -> Result<f64> {
    Ok(libm::exp(libm::exp(alpha) * g.mayer_integral(dim)?))
}

/// Mean-field counterpart `exp(e^α ∫g(u) du)`.
pub fn vlasov_constant(g: &PotentialSpec, alpha: f64, dim: usize) -> f64 {
    libm::exp(libm::exp(alpha) * g.mass(dim))
}

fn lhs_with<F>(p: &PotentialSet, w: &RuelleWeight, mut c: F) -> Result<[f64; 4]>
where
    F: FnMut(&PotentialSpec, f64) -> Result<f64>,
{
    let (ap, am) = (w.alpha_plus, w.alpha_minus);
    let kappa_tau_plus = c(&p.kappa_plus, ap)? * c(&p.tau_plus, am)?;
    let kappa_tau_minus = c(&p.kappa_minus, am)? * c(&p.tau_minus, ap)?;
    Ok([
        libm::exp(-ap) * c(&p.phi_plus, ap)? * c(&p.psi_plus, am)? + kappa_tau_minus,
        libm::exp(-am) * c(&p.phi_minus, am)? * c(&p.psi_minus, ap)? + kappa_tau_plus,
        kappa_tau_plus * libm::exp(am - ap),
        kappa_tau_minus * libm::exp(ap - am),
    ])
}

/// The four inequalities of the finite-scale regime.
pub fn check_fokker_planck_conditions(
    p: &PotentialSet,
    w: &RuelleWeight,
    dim: usize,
) -> Result<RegimeReport> {
    let lhs = lhs_with(p, w, |g, a| c_constant(g, a, dim))?;
    Ok(RegimeReport::from_lhs(Regime::FokkerPlanck, *w, lhs))
}

/// The four inequalities of the mean-field regime.
pub fn check_vlasov_conditions(p: &PotentialSet, w: &RuelleWeight, dim: usize) -> RegimeReport {
    let lhs = lhs_with(p, w, |g, a| Ok(vlasov_constant(g, a, dim))).expect("closed forms");
    RegimeReport::from_lhs(Regime::Vlasov, *w, lhs)
}

fn contraction_from_lhs(lhs: &[f64; 4]) -> f64 {
    (lhs[0] - 1.0).max(lhs[1] - 1.0).max(lhs[2]).max(lhs[3])
}

/// `a(α) = max(lhs₁ - 1, lhs₂ - 1, lhs₃, lhs₄)`, reported even when it is
/// not below one.
pub fn contraction_constant(p: &PotentialSet, w: &RuelleWeight, dim: usize) -> Result<f64> {
    Ok(check_fokker_planck_conditions(p, w, dim)?.a_alpha)
}

/// `λ₀ = 1 - a(α)`, the guaranteed exponential rate; only defined when
/// `a(α) < 1`.
pub fn ergodicity_rate(p: &PotentialSet, w: &RuelleWeight, dim: usize) -> Result<f64> {
    rate_from_contraction(contraction_constant(p, w, dim)?)
}

pub fn rate_from_contraction(a: f64) -> Result<f64> {
    if a.is_nan() || a >= 1.0 {
        return Err(Error::Regime(format!("a(alpha) = {a} >= 1: no ergodicity guarantee")));
    }
    Ok(1.0 - a)
}

/// Scans weights `(α⁺, α⁻)` over `alphas × alphas` and returns the report
/// with the smallest `a(α)`. A passing report is returned as soon as one
/// is found.
pub fn search_weights(p: &PotentialSet, dim: usize, regime: Regime, alphas: &[f64]) -> Result<RegimeReport> {
    let mut best: Option<RegimeReport> = None;
    for &ap in alphas {
        for &am in alphas {
            let w = RuelleWeight::new(ap, am);
            let r = match regime {
                Regime::FokkerPlanck => check_fokker_planck_conditions(p, &w, dim)?,
                Regime::Vlasov => check_vlasov_conditions(p, &w, dim),
            };
            if r.pass {
                return Ok(r);
            }
            if best.map_or(true, |b| r.a_alpha < b.a_alpha) {
                best = Some(r);
            }
        }
    }
    best.ok_or_else(|| Error::Argument("empty weight grid".into()))
}
