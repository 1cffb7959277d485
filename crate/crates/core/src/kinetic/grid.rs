use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{local_rhs, DensityState, IntegrateOptions, KineticParams, VectorField, ACTS_ON_PLUS};
use crate::potential::{PotentialSet, PotentialSpec};
use crate::{Domain, Error, Point, Result};

/// Periodic mesh of cells over a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    domain: Domain,
    cells: [usize; 2],
    cell_len: [f64; 2],
}

impl Grid {
    pub fn new(domain: Domain, cells_per_axis: usize) -> Result<Self> {
        if cells_per_axis == 0 {
            return Err(Error::Argument("grid needs at least one cell per axis".into()));
        }
        let ny = if domain.dim() == 2 { cells_per_axis } else { 1 };
        let cell_len = [
            domain.side(0) / cells_per_axis as f64,
            if domain.dim() == 2 { domain.side(1) / ny as f64 } else { 0.0 },
        ];
        Ok(Grid { domain, cells: [cells_per_axis, ny], cell_len })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells[0]
    }

    pub fn n_cells(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn cell_volume(&self) -> f64 {
        self.domain.volume() / self.n_cells() as f64
    }

    /// Center of cell `i`, row-major with the first axis fastest.
    pub fn center(&self, i: usize) -> Point {
        let (ix, iy) = (i % self.cells[0], i / self.cells[0]);
        let x = (ix as f64 + 0.5) * self.cell_len[0];
        if self.domain.dim() == 2 {
            Point::new_2d(x, (iy as f64 + 0.5) * self.cell_len[1])
        } else {
            Point::new_1d(x)
        }
    }

    /// Distance between two cells whose indices differ by `(ox, oy)`.
    fn offset_distance(&self, ox: usize, oy: usize) -> f64 {
        let dx = ox.min(self.cells[0] - ox) as f64 * self.cell_len[0];
        let dy = oy.min(self.cells[1] - oy) as f64 * self.cell_len[1];
        libm::hypot(dx, dy)
    }
}

/// Sampled convolution kernel stored as its non-zero offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    cells: [usize; 2],
    /// `(ox, oy, weight)`, weight including the cell volume.
    stencil: Vec<(usize, usize, f64)>,
}

impl Kernel {
    /// Samples `g` at cell-center offsets and rescales so the weights sum
    /// to `⟨g⟩`.
    pub fn sample(g: &PotentialSpec, grid: &Grid) -> Result<Self> {
        let mass = g.mass(grid.domain.dim());
        let mut stencil = Vec::new();
        if mass > 0.0 {
            if g.cutoff() > grid.domain.max_cutoff() {
                return Err(Error::Argument(format!(
                    "kernel cutoff {} exceeds half the smallest side {}",
                    g.cutoff(),
                    grid.domain.max_cutoff()
                )));
            }
            let cv = grid.cell_volume();
            for oy in 0..grid.cells[1] {
                for ox in 0..grid.cells[0] {
                    let v = g.value(grid.offset_distance(ox, oy));
                    if v != 0.0 {
                        stencil.push((ox, oy, v * cv));
                    }
                }
            }
            let sum: f64 = stencil.iter().map(|s| s.2).sum();
            if !(sum > 0.0) {
                return Err(Error::Argument(format!("grid too coarse to resolve {g}")));
            }
            let scale = mass / sum;
            for s in &mut stencil {
                s.2 *= scale;
            }
        }
        Ok(Kernel { cells: grid.cells, stencil })
    }

    /// Sum of weights, i.e. the discrete integral of the kernel.
    pub fn mass(&self) -> f64 {
        self.stencil.iter().map(|s| s.2).sum()
    }

    pub fn stencil_len(&self) -> usize {
        self.stencil.len()
    }

    /// Dense weight array indexed like the grid.
    pub fn dense(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.cells[0] * self.cells[1]];
        for &(ox, oy, v) in &self.stencil {
            w[ox + self.cells[0] * oy] = v;
        }
        w
    }

    /// Circular convolution `out[i] = Σ_j w(i - j) ρ[j]`.
    pub fn convolve(&self, field: &[f64], out: &mut [f64]) -> Result<()> {
        let [nx, ny] = self.cells;
        if field.len() != nx * ny || out.len() != nx * ny {
            return Err(Error::Argument(format!(
                "field of {} cells does not match the {}-cell kernel grid",
                field.len(),
                nx * ny
            )));
        }
        out.fill(0.0);
        for &(ox, oy, w) in &self.stencil {
            for iy in 0..ny {
                let jy = (iy + ny - oy) % ny;
                let row_out = &mut out[iy * nx..(iy + 1) * nx];
                let row_in = &field[jy * nx..(jy + 1) * nx];
                for (ix, o) in row_out.iter_mut().enumerate() {
                    let jx = if ix >= ox { ix - ox } else { ix + nx - ox };
                    *o += w * row_in[jx];
                }
            }
        }
        Ok(())
    }
}

/// Kinetic parameters discretized on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldParams {
    grid: Grid,
    kernels: [Kernel; 8],
    pub z_plus: f64,
    pub z_minus: f64,
    pub mutation_multiplier: f64,
}

impl FieldParams {
    pub fn new(p: &PotentialSet, grid: Grid) -> Result<Self> {
        p.validate()?;
        let pots = p.potentials();
        let mut ks = Vec::with_capacity(8);
        for g in &pots {
            ks.push(Kernel::sample(g, &grid)?);
        }
        let kernels: [Kernel; 8] = ks.try_into().map_err(|_| Error::Invariant("kernel count".into()))?;
        Ok(FieldParams {
            grid,
            kernels,
            z_plus: p.z_plus,
            z_minus: p.z_minus,
            mutation_multiplier: p.mutation_multiplier,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kernels(&self) -> &[Kernel; 8] {
        &self.kernels
    }

    /// Homogeneous parameters with the kernel masses.
    pub fn homogeneous(&self) -> KineticParams {
        let mut masses = [0.0; 8];
        for (m, k) in masses.iter_mut().zip(&self.kernels) {
            *m = k.mass();
        }
        KineticParams {
            masses,
            z_plus: self.z_plus,
            z_minus: self.z_minus,
            mutation_multiplier: self.mutation_multiplier,
        }
    }

    fn rhs_into(&self, plus: &[f64], minus: &[f64], dp: &mut [f64], dm: &mut [f64]) -> Result<()> {
        let n = self.grid.n_cells();
        if plus.len() != n || minus.len() != n {
            return Err(Error::Argument(format!(
                "state has {}/{} cells, grid has {n}",
                plus.len(),
                minus.len()
            )));
        }
        if let Some(v) = plus.iter().chain(minus).find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Argument(format!("field values must be finite and non-negative, found {v}")));
        }
        let mut conv = vec![vec![0.0; n]; 8];
        for (i, k) in self.kernels.iter().enumerate() {
            let src = if ACTS_ON_PLUS[i] { plus } else { minus };
            k.convolve(src, &mut conv[i])?;
        }
        for j in 0..n {
            let c: [f64; 8] = core::array::from_fn(|i| conv[i][j]);
            let (a, b) = local_rhs(plus[j], minus[j], &c, self.z_plus, self.z_minus, self.mutation_multiplier);
            dp[j] = a;
            dm[j] = b;
        }
        Ok(())
    }
}

/// Pointwise right-hand side with circular convolutions.
pub fn rhs_field(state: &DensityState, params: &FieldParams) -> Result<DensityState> {
    let n = state.cells();
    let mut out = DensityState { time: state.time, plus: vec![0.0; n], minus: vec![0.0; n] };
    params.rhs_into(&state.plus, &state.minus, &mut out.plus, &mut out.minus)?;
    Ok(out)
}

impl VectorField for FieldParams {
    fn len(&self) -> usize {
        2 * self.grid.n_cells()
    }

    fn eval(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.grid.n_cells();
        let (dp, dm) = out.split_at_mut(n);
        self.rhs_into(&y[..n], &y[n..], dp, dm)
    }
}

/// Solve the grid system.
pub fn integrate_field(
    state0: &DensityState,
    params: &FieldParams,
    opts: &IntegrateOptions,
) -> Result<super::KineticTrajectory> {
    super::integrate(params, state0, opts)
}
