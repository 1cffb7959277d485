//! Two-type finite configurations.

use core::cmp::Ordering;

use alloc::format;
use alloc::vec::Vec;

use crate::rng::SimRng;
use crate::{Domain, Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    Plus,
    Minus,
}

impl Species {
    pub fn other(self) -> Species {
        match self {
            Species::Plus => Species::Minus,
            Species::Minus => Species::Plus,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Species::Plus => 0,
            Species::Minus => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Species::Plus => '+',
            Species::Minus => '-',
        }
    }
}

/// A finite state `(γ⁺, γ⁻)` in a periodic box.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TwoTypeConfiguration {
    pub plus: Vec<Point>,
    pub minus: Vec<Point>,
}

fn cmp_points(a: &Point, b: &Point) -> Ordering {
    a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1]))
}

impl TwoTypeConfiguration {
    /// Validates that every point lies in `domain` and that no coordinate
    /// appears twice (within or across species).
    pub fn new(domain: &Domain, plus: Vec<Point>, minus: Vec<Point>) -> Result<Self> {
        for p in plus.iter().chain(minus.iter()) {
            domain.check(*p)?;
        }
        let mut all: Vec<Point> = plus.iter().chain(minus.iter()).copied().collect();
        all.sort_by(cmp_points);
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Argument(format!("duplicate position {:?}", w[0])));
        }
        Ok(TwoTypeConfiguration { plus, minus })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn species(&self, s: Species) -> &[Point] {
        match s {
            Species::Plus => &self.plus,
            Species::Minus => &self.minus,
        }
    }

    pub fn count(&self, s: Species) -> usize {
        self.species(s).len()
    }

    pub fn len(&self) -> usize {
        self.plus.len() + self.minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Independent Poisson point processes with the given intensities.
    pub fn poisson(domain: &Domain, rho_plus: f64, rho_minus: f64, rng: &mut SimRng) -> Self {
        let mut sample = |rho: f64| {
            let n = rng.poisson(rho * domain.volume());
            (0..n).map(|_| rng.position(domain)).collect::<Vec<_>>()
        };
        let plus = sample(rho_plus);
        let minus = sample(rho_minus);
        TwoTypeConfiguration { plus, minus }
    }
}
