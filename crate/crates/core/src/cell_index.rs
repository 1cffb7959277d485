//! Cell-list spatial index for one species, and relative energies.
//!
//! Particles live in a dense array so that a uniformly random particle is a
//! single draw; removal swaps the last particle into the hole. Each cell
//! keeps the ids of its particles and each particle remembers its slot in
//! its cell, so insert and remove are O(1).

use core::cmp::Ordering;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Domain, Error, Point, PotentialSpec, Result};

const MAX_CELLS_1D: usize = 4096;
const MAX_CELLS_2D: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct CellIndex {
    domain: Domain,
    cells_per_axis: [usize; 2],
    cell_len: [f64; 2],
    points: Vec<Point>,
    cell_of: Vec<u32>,
    slot_of: Vec<u32>,
    cells: Vec<Vec<u32>>,
    neighbors: Vec<Vec<u32>>,
}

impl CellIndex {
    /// Empty index whose cells are at least `cutoff` wide.
    pub fn new(domain: Domain, cutoff: f64) -> Self {
        let dim = domain.dim();
        let cap = if dim == 1 { MAX_CELLS_1D } else { MAX_CELLS_2D };
        let mut cells_per_axis = [1usize; 2];
        let mut cell_len = [domain.side(0), 1.0];
        for axis in 0..dim {
            let l = domain.side(axis);
            let n = if cutoff > 0.0 { libm::floor(l / cutoff) as usize } else { 1 };
            let n = n.clamp(1, cap);
            cells_per_axis[axis] = n;
            cell_len[axis] = l / n as f64;
        }
        let ncells = cells_per_axis[0] * cells_per_axis[1];
        let neighbors = (0..ncells)
            .map(|c| {
                let (cx, cy) = (c % cells_per_axis[0], c / cells_per_axis[0]);
                let wrap = |v: usize, d: isize, n: usize| ((v as isize + d).rem_euclid(n as isize)) as usize;
                let mut list: Vec<u32> = Vec::with_capacity(9);
                let ys: &[isize] = if dim == 2 { &[-1, 0, 1] } else { &[0] };
                for &dy in ys {
                    for dx in [-1, 0, 1] {
                        let nx = wrap(cx, dx, cells_per_axis[0]);
                        let ny = wrap(cy, dy, cells_per_axis[1]);
                        let id = (ny * cells_per_axis[0] + nx) as u32;
                        if !list.contains(&id) {
                            list.push(id);
                        }
                    }
                }
                list
            })
            .collect();
        CellIndex {
            domain,
            cells_per_axis,
            cell_len,
            points: Vec::new(),
            cell_of: Vec::new(),
            slot_of: Vec::new(),
            cells: vec![Vec::new(); ncells],
            neighbors,
        }
    }

    /// Index over `points`; positions must be inside the box.
    pub fn build(domain: Domain, cutoff: f64, points: &[Point]) -> Result<Self> {
        let mut idx = CellIndex::new(domain, cutoff);
        for &p in points {
            domain.check(p)?;
            idx.insert(p);
        }
        Ok(idx)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, id: usize) -> Option<Point> {
        self.points.get(id).copied()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Smallest cell width; potentials with a larger cutoff cannot be
    /// evaluated through this index.
    pub fn reach(&self) -> f64 {
        if self.cells_per_axis[..self.domain.dim()].iter().all(|&n| n < 3) {
            return f64::INFINITY;
        }
        self.cell_len[..self.domain.dim()].iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[inline]
    fn cell_for(&self, p: Point) -> usize {
        let mut c = [0usize; 2];
        for (axis, slot) in c.iter_mut().enumerate().take(self.domain.dim()) {
            let k = (p.0[axis] / self.cell_len[axis]) as usize;
            *slot = k.min(self.cells_per_axis[axis] - 1);
        }
        c[1] * self.cells_per_axis[0] + c[0]
    }

    /// Adds a particle (position assumed inside the box) and returns its id.
    pub fn insert(&mut self, p: Point) -> usize {
        let id = self.points.len();
        let c = self.cell_for(p);
        self.points.push(p);
        self.cell_of.push(c as u32);
        self.slot_of.push(self.cells[c].len() as u32);
        self.cells[c].push(id as u32);
        id
    }

    /// Removes particle `id`. The particle that held the last id now has
    /// id `id`.
    pub fn remove(&mut self, id: usize) -> Result<Point> {
        if id >= self.points.len() {
            return Err(Error::Invariant(format!(
                "remove of absent particle {id} (have {})",
                self.points.len()
            )));
        }
        let c = self.cell_of[id] as usize;
        let s = self.slot_of[id] as usize;
        self.cells[c].swap_remove(s);
        if let Some(&moved) = self.cells[c].get(s) {
            self.slot_of[moved as usize] = s as u32;
        }
        let last = self.points.len() - 1;
        let p = self.points.swap_remove(id);
        self.cell_of.swap_remove(id);
        self.slot_of.swap_remove(id);
        if id != last {
            let c2 = self.cell_of[id] as usize;
            let s2 = self.slot_of[id] as usize;
            self.cells[c2][s2] = id as u32;
        }
        Ok(p)
    }

    /// Moves particle `id` to `p`; the id is kept.
    pub fn move_to(&mut self, id: usize, p: Point) -> Result<()> {
        if id >= self.points.len() {
            return Err(Error::Invariant(format!("move of absent particle {id}")));
        }
        self.domain.check(p)?;
        let old = self.cell_of[id] as usize;
        let new = self.cell_for(p);
        self.points[id] = p;
        if old != new {
            let s = self.slot_of[id] as usize;
            self.cells[old].swap_remove(s);
            if let Some(&moved) = self.cells[old].get(s) {
                self.slot_of[moved as usize] = s as u32;
            }
            self.cell_of[id] = new as u32;
            self.slot_of[id] = self.cells[new].len() as u32;
            self.cells[new].push(id as u32);
        }
        Ok(())
    }

    /// `Σ_y g(|x - y|)` over indexed particles, skipping particle `skip`.
    pub fn energy(&self, g: &PotentialSpec, x: Point, skip: Option<usize>) -> Result<f64> {
        if g.is_zero() || self.points.is_empty() {
            return Ok(0.0);
        }
        let cutoff = g.cutoff();
        if cutoff > self.reach() {
            return Err(Error::Invariant(format!(
                "potential cutoff {cutoff} exceeds cell width {}",
                self.reach()
            )));
        }
        let c2 = cutoff * cutoff;
        let skip = skip.map_or(u32::MAX, |s| s as u32);
        let mut e = 0.0;
        for &nc in &self.neighbors[self.cell_for(x)] {
            for &id in &self.cells[nc as usize] {
                if id == skip {
                    continue;
                }
                let d = self.domain.displacement_unchecked(x, self.points[id as usize]);
                let r2 = d[0] * d[0] + d[1] * d[1];
                if r2 <= c2 {
                    e += g.value(libm::sqrt(r2));
                }
            }
        }
        Ok(e)
    }

    /// Checks the partition invariants; used by tests and debug paths.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.points.len();
        if self.cell_of.len() != n || self.slot_of.len() != n {
            return Err(Error::Invariant("bookkeeping arrays out of sync".into()));
        }
        let total: usize = self.cells.iter().map(Vec::len).sum();
        if total != n {
            return Err(Error::Invariant(format!("cells hold {total} ids for {n} particles")));
        }
        for id in 0..n {
            let c = self.cell_of[id] as usize;
            let s = self.slot_of[id] as usize;
            if self.cells[c].get(s) != Some(&(id as u32)) {
                return Err(Error::Invariant(format!("particle {id} not at its slot")));
            }
            if c != self.cell_for(self.points[id]) {
                return Err(Error::Invariant(format!("particle {id} in the wrong cell")));
            }
        }
        Ok(())
    }

    /// Per-cell sorted positions: equal for two indices holding the same
    /// particles regardless of insertion history.
    pub fn cell_contents(&self) -> Vec<Vec<Point>> {
        self.cells
            .iter()
            .map(|ids| {
                let mut v: Vec<Point> = ids.iter().map(|&i| self.points[i as usize]).collect();
                v.sort_by(|a, b| {
                    a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1]))
                });
                v
            })
            .collect()
    }

    pub fn cell_occupancy(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    /// Id of the particle at exactly `p`, if any.
    pub fn find(&self, p: Point) -> Option<usize> {
        self.cells[self.cell_for(p)]
            .iter()
            .map(|&i| i as usize)
            .find(|&i| self.points[i].0.iter().zip(p.0.iter()).all(|(a, b)| a.total_cmp(b) == Ordering::Equal))
    }
}

/// Brute-force relative energy `E_g(x, points) = Σ_y g(|x - y|)`.
pub fn relative_energy_direct(g: &PotentialSpec, x: Point, points: &[Point], domain: &Domain) -> f64 {
    points.iter().map(|&y| g.value(domain.distance(x, y))).sum()
}

/// Relative energy of a particle at `x` with `points`. With an index the
/// sum only visits cells within the cutoff; the index must hold exactly
/// `points`.
pub fn relative_energy(
    g: &PotentialSpec,
    x: Point,
    points: &[Point],
    domain: &Domain,
    index: Option<&CellIndex>,
) -> Result<f64> {
    domain.check(x)?;
    match index {
        None => Ok(relative_energy_direct(g, x, points, domain)),
        Some(idx) => {
            if idx.len() != points.len() || idx.domain() != domain {
                return Err(Error::Invariant(format!(
                    "index holds {} particles, point set has {}",
                    idx.len(),
                    points.len()
                )));
            }
            idx.energy(g, x, None)
        }
    }
}
