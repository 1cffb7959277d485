//! The radial, non-negative, finitely supported potential menu.

use core::fmt;

use alloc::format;

use crate::quadrature;
use crate::{Domain, Error, Result};

/// Relative tolerance of the radial integrals.
pub const RADIAL_REL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PotentialSpec {
    Zero,
    /// `height` for `r <= range`, zero beyond.
    SquareWell { height: f64, range: f64 },
    /// `amplitude * exp(-r^2 / (2 sigma^2))` truncated at `cutoff`.
    Gaussian { amplitude: f64, sigma: f64, cutoff: f64 },
    /// `amplitude * exp(-r / scale)` truncated at `cutoff`.
    Exponential { amplitude: f64, scale: f64, cutoff: f64 },
}

impl PotentialSpec {
    pub fn square_well(height: f64, range: f64) -> Self {
        PotentialSpec::SquareWell { height, range }
    }

    pub fn gaussian(amplitude: f64, sigma: f64, cutoff: f64) -> Self {
        PotentialSpec::Gaussian { amplitude, sigma, cutoff }
    }

    pub fn exponential(amplitude: f64, scale: f64, cutoff: f64) -> Self {
        PotentialSpec::Exponential { amplitude, scale, cutoff }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let valid = match *self {
            PotentialSpec::Zero => true,
            PotentialSpec::SquareWell { height, range } => ok(height) && ok(range),
            PotentialSpec::Gaussian { amplitude, sigma, cutoff } => {
                ok(amplitude) && pos(sigma) && ok(cutoff)
            }
            PotentialSpec::Exponential { amplitude, scale, cutoff } => {
                ok(amplitude) && pos(scale) && ok(cutoff)
            }
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Argument(format!("invalid potential parameters: {self}")))
        }
    }

    /// Distance beyond which the potential vanishes.
    pub fn cutoff(&self) -> f64 {
        match *self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::SquareWell { range, .. } => range,
            PotentialSpec::Gaussian { cutoff, .. } | PotentialSpec::Exponential { cutoff, .. } => {
                cutoff
            }
        }
    }

    /// True when the potential is identically zero.
    pub fn is_zero(&self) -> bool {
        match *self {
            PotentialSpec::Zero => true,
            PotentialSpec::SquareWell { height, range } => height == 0.0 || range == 0.0,
            PotentialSpec::Gaussian { amplitude, .. }
            | PotentialSpec::Exponential { amplitude, .. } => amplitude == 0.0,
        }
    }

    /// Value at distance `r`, without the sign check.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::SquareWell { height, range } => {
                if r <= range {
                    height
                } else {
                    0.0
                }
            }
            PotentialSpec::Gaussian { amplitude, sigma, cutoff } => {
                if r <= cutoff {
                    amplitude * libm::exp(-r * r / (2.0 * sigma * sigma))
                } else {
                    0.0
                }
            }
            PotentialSpec::Exponential { amplitude, scale, cutoff } => {
                if r <= cutoff {
                    amplitude * libm::exp(-r / scale)
                } else {
                    0.0
                }
            }
        }
    }

    /// Multiplies the height (amplitude) by `factor`; ranges stay put.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            PotentialSpec::Zero => PotentialSpec::Zero,
            PotentialSpec::SquareWell { height, range } => {
                PotentialSpec::SquareWell { height: height * factor, range }
            }
            PotentialSpec::Gaussian { amplitude, sigma, cutoff } => {
                PotentialSpec::Gaussian { amplitude: amplitude * factor, sigma, cutoff }
            }
            PotentialSpec::Exponential { amplitude, scale, cutoff } => {
                PotentialSpec::Exponential { amplitude: amplitude * factor, scale, cutoff }
            }
        }
    }

    /// `∫_{R^d} g(|u|) du` in closed form.
    pub fn mass(&self, dim: usize) -> f64 {
        use core::f64::consts::PI;
        match *self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::SquareWell { height, range } => match dim {
                1 => 2.0 * height * range,
                _ => height * PI * range * range,
            },
            PotentialSpec::Gaussian { amplitude, sigma, cutoff } => match dim {
                1 => {
                    amplitude
                        * sigma
                        * libm::sqrt(2.0 * PI)
                        * libm::erf(cutoff / (sigma * core::f64::consts::SQRT_2))
                }
                _ => {
                    2.0 * PI
                        * amplitude
                        * sigma
                        * sigma
                        * (1.0 - libm::exp(-cutoff * cutoff / (2.0 * sigma * sigma)))
                }
            },
            PotentialSpec::Exponential { amplitude, scale, cutoff } => {
                let e = libm::exp(-cutoff / scale);
                match dim {
                    1 => 2.0 * amplitude * scale * (1.0 - e),
                    _ => 2.0 * PI * amplitude * scale * scale * (1.0 - e * (1.0 + cutoff / scale)),
                }
            }
        }
    }

    /// `∫_{R^d} f(g(|u|)) du` by adaptive radial quadrature, for any `f`
    /// with `f(0) = 0`.
    pub fn radial_integral<F: Fn(f64) -> f64>(&self, dim: usize, f: F) -> Result<f64> {
        let c = self.cutoff();
        if self.is_zero() {
            return Ok(0.0);
        }
        let v = match dim {
            1 => 2.0 * quadrature::integrate(|r| f(self.value(r)), 0.0, c, RADIAL_REL_TOL)?,
            _ => {
                2.0 * core::f64::consts::PI
                    * quadrature::integrate(|r| f(self.value(r)) * r, 0.0, c, RADIAL_REL_TOL)?
            }
        };
        Ok(v)
    }

    /// `∫ (1 - e^{-g(u)}) du`, closed form for square wells and quadrature
    /// otherwise.
    pub fn mayer_integral(&self, dim: usize) -> Result<f64> {
        match *self {
            PotentialSpec::SquareWell { height, .. } => {
                Ok(-libm::expm1(-height) * PotentialSpec::square_well(1.0, self.cutoff()).mass(dim))
            }
            _ => self.radial_integral(dim, |g| -libm::expm1(-g)),
        }
    }
}

/// Value of `g` at distance `r`.
pub fn evaluate_potential(g: &PotentialSpec, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Argument(format!("distance must be non-negative, got {r}")));
    }
    Ok(g.value(r))
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PotentialSpec::Zero => write!(f, "zero"),
            PotentialSpec::SquareWell { height, range } => {
                write!(f, "square_well({height:?}, {range:?})")
            }
            PotentialSpec::Gaussian { amplitude, sigma, cutoff } => {
                write!(f, "gaussian({amplitude:?}, {sigma:?}, {cutoff:?})")
            }
            PotentialSpec::Exponential { amplitude, scale, cutoff } => {
                write!(f, "exponential({amplitude:?}, {scale:?}, {cutoff:?})")
            }
        }
    }
}

/// Names of the eight potentials, in storage order.
pub const POTENTIAL_NAMES: [&str; 8] = [
    "phi_plus",
    "phi_minus",
    "psi_plus",
    "psi_minus",
    "kappa_plus",
    "kappa_minus",
    "tau_plus",
    "tau_minus",
];

/// The eight pair potentials, the activities and the mutation multiplier.
///
/// `phi` acts between a particle and its own species, `psi` across species
/// (birth), `kappa` same-species and `tau` cross-species (mutation). The
/// suffix names the species being born or mutating.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialSet {
    pub phi_plus: PotentialSpec,
    pub phi_minus: PotentialSpec,
    pub psi_plus: PotentialSpec,
    pub psi_minus: PotentialSpec,
    pub kappa_plus: PotentialSpec,
    pub kappa_minus: PotentialSpec,
    pub tau_plus: PotentialSpec,
    pub tau_minus: PotentialSpec,
    pub z_plus: f64,
    pub z_minus: f64,
    pub mutation_multiplier: f64,
}

impl PotentialSet {
    /// All potentials zero, multiplier one.
    pub fn free(z_plus: f64, z_minus: f64) -> Self {
        PotentialSet {
            phi_plus: PotentialSpec::Zero,
            phi_minus: PotentialSpec::Zero,
            psi_plus: PotentialSpec::Zero,
            psi_minus: PotentialSpec::Zero,
            kappa_plus: PotentialSpec::Zero,
            kappa_minus: PotentialSpec::Zero,
            tau_plus: PotentialSpec::Zero,
            tau_minus: PotentialSpec::Zero,
            z_plus,
            z_minus,
            mutation_multiplier: 1.0,
        }
    }

    pub fn potentials(&self) -> [PotentialSpec; 8] {
        [
            self.phi_plus,
            self.phi_minus,
            self.psi_plus,
            self.psi_minus,
            self.kappa_plus,
            self.kappa_minus,
            self.tau_plus,
            self.tau_minus,
        ]
    }

    pub fn potentials_mut(&mut self) -> [&mut PotentialSpec; 8] {
        [
            &mut self.phi_plus,
            &mut self.phi_minus,
            &mut self.psi_plus,
            &mut self.psi_minus,
            &mut self.kappa_plus,
            &mut self.kappa_minus,
            &mut self.tau_plus,
            &mut self.tau_minus,
        ]
    }

    pub fn max_cutoff(&self) -> f64 {
        self.potentials()
            .iter()
            .filter(|g| !g.is_zero())
            .map(PotentialSpec::cutoff)
            .fold(0.0, f64::max)
    }

    /// Checks parameter ranges. Activities may be zero here; callers that
    /// need strictly positive activities check that themselves.
    pub fn validate(&self) -> Result<()> {
        for (g, name) in self.potentials().iter().zip(POTENTIAL_NAMES) {
            g.validate()
                .map_err(|e| Error::Argument(format!("{name}: {e}")))?;
        }
        for (v, name) in [
            (self.z_plus, "z_plus"),
            (self.z_minus, "z_minus"),
            (self.mutation_multiplier, "mutation_multiplier"),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Argument(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Validates the set and checks every cutoff against half the box.
    pub fn validate_for(&self, domain: &Domain) -> Result<()> {
        self.validate()?;
        let half = domain.max_cutoff();
        for (g, name) in self.potentials().iter().zip(POTENTIAL_NAMES) {
            if !g.is_zero() && g.cutoff() > half {
                return Err(Error::Argument(format!(
                    "{name} cutoff {} exceeds half the smallest side {half}",
                    g.cutoff()
                )));
            }
        }
        Ok(())
    }
}
