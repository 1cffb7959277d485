//! Periodic boxes and minimum-image distances.

use alloc::format;

use crate::{Error, Result};

/// A position. In one dimension only the first coordinate is used and the
/// second is kept at zero.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point(pub [f64; 2]);

impl Point {
    pub const fn new_1d(x: f64) -> Self {
        Point([x, 0.0])
    }

    pub const fn new_2d(x: f64, y: f64) -> Self {
        Point([x, y])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }
}

/// A periodic box `[0, L_1) x ... x [0, L_d)` with `d` in {1, 2}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    dim: usize,
    sides: [f64; 2],
}

impl Domain {
    pub fn new(dim: usize, sides: &[f64]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Argument(format!("dimension must be 1 or 2, got {dim}")));
        }
        if sides.len() != dim {
            return Err(Error::Argument(format!(
                "expected {dim} side lengths, got {}",
                sides.len()
            )));
        }
        let mut s = [0.0; 2];
        for (i, &l) in sides.iter().enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Argument(format!("side length {l} must be positive and finite")));
            }
            s[i] = l;
        }
        Ok(Domain { dim, sides: s })
    }

    pub fn line(length: f64) -> Result<Self> {
        Domain::new(1, &[length])
    }

    pub fn square(side: f64) -> Result<Self> {
        Domain::new(2, &[side, side])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides[..self.dim]
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.sides[axis]
    }

    pub fn volume(&self) -> f64 {
        self.sides().iter().product()
    }

    /// Half the smallest side: the largest admissible interaction cutoff.
    pub fn max_cutoff(&self) -> f64 {
        0.5 * self.sides().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..self.dim).all(|i| p.0[i] >= 0.0 && p.0[i] < self.sides[i])
            && (self.dim == 2 || p.0[1] == 0.0)
    }

    pub fn check(&self, p: Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Domain(format!("position {:?} outside box {:?}", p, self.sides())))
        }
    }

    /// Maps a point back into the box.
    pub fn wrap(&self, p: Point) -> Point {
        let mut q = Point::default();
        for i in 0..self.dim {
            let l = self.sides[i];
            let mut v = p.0[i] - l * libm::floor(p.0[i] / l);
            // floor can round a tiny negative up to exactly l
            if v >= l {
                v -= l;
            }
            q.0[i] = v;
        }
        q
    }

    /// Point with coordinates `fractions * sides`, used to turn uniform
    /// variates into positions.
    pub fn scale_unit(&self, fractions: [f64; 2]) -> Point {
        let mut p = Point::default();
        for i in 0..self.dim {
            p.0[i] = fractions[i] * self.sides[i];
        }
        p
    }

    /// Minimum-image distance without range checks. Callers guarantee
    /// both points are inside the box.
    #[inline]
    pub fn distance(&self, x: Point, y: Point) -> f64 {
        let d = self.displacement_unchecked(x, y);
        libm::sqrt(d[0] * d[0] + d[1] * d[1])
    }

    #[inline]
    pub(crate) fn displacement_unchecked(&self, x: Point, y: Point) -> [f64; 2] {
        let mut d = [0.0; 2];
        for i in 0..self.dim {
            let l = self.sides[i];
            let mut v = y.0[i] - x.0[i];
            // inputs lie in [0, l) so one shift suffices
            if v >= 0.5 * l {
                v -= l;
            } else if v < -0.5 * l {
                v += l;
            }
            d[i] = v;
        }
        d
    }
}

/// Shortest periodic displacement `y - x`; each component lies in
/// `[-L_i/2, L_i/2)`.
pub fn min_image_displacement(x: Point, y: Point, domain: &Domain) -> Result<[f64; 2]> {
    domain.check(x)?;
    domain.check(y)?;
    Ok(domain.displacement_unchecked(x, y))
}
