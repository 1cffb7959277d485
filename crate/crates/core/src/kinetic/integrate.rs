use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::DensityState;
use crate::{Error, Result, Species};

/// Negative values above this are treated as round-off and clamped to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-12;
/// Smallest step the controller may take.
pub const MIN_STEP: f64 = 1e-12;

/// An autonomous system `y' = f(y)`; the state is the plus block followed
/// by the minus block, of equal length.
pub trait VectorField {
    fn len(&self) -> usize;
    fn eval(&self, y: &[f64], out: &mut [f64]) -> Result<()>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub t_end: f64,
    /// Largest step.
    pub dt: f64,
    /// Per-component bound on the full-step/two-half-step discrepancy;
    /// `f64::INFINITY` gives fixed steps of `dt`.
    pub tol: f64,
    /// Times to record, increasing, within `[t0, t_end]`. Empty means
    /// `t_end` only.
    pub output_times: Vec<f64>,
    /// Upper bounds for `ρ⁺` and `ρ⁻`; exceedances are recorded.
    pub ceiling: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CeilingViolation {
    pub time: f64,
    pub species: Species,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KineticTrajectory {
    pub states: Vec<DensityState>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub ceiling_violations: Vec<CeilingViolation>,
}

impl KineticTrajectory {
    pub fn last(&self) -> &DensityState {
        &self.states[self.states.len() - 1]
    }
}

struct Rk4<'a, F: VectorField + ?Sized> {
    f: &'a F,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'a, F: VectorField + ?Sized> Rk4<'a, F> {
    fn new(f: &'a F) -> Self {
        let n = f.len();
        Rk4 { f, k: core::array::from_fn(|_| vec![0.0; n]), tmp: vec![0.0; n] }
    }

    /// Stage states can dip slightly below zero; they are evaluated as-is
    /// except for clamping, since the field rejects negative input.
    fn eval_at(&mut self, idx: usize) -> Result<()> {
        for v in self.tmp.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let (k, tmp) = (&mut self.k[idx], &self.tmp);
        self.f.eval(tmp, k)
    }

    fn step(&mut self, y: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
        self.tmp.copy_from_slice(y);
        self.eval_at(0)?;
        for (stage, c) in [(1, 0.5), (2, 0.5), (3, 1.0)] {
            for i in 0..y.len() {
                self.tmp[i] = y[i] + c * h * self.k[stage - 1][i];
            }
            self.eval_at(stage)?;
        }
        for i in 0..y.len() {
            out[i] = y[i] + h / 6.0 * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
        }
        Ok(())
    }
}

/// Classical RK4 with step doubling. Each step compares one step of size
/// `h` with two of size `h/2`, keeps the latter, and lands exactly on the
/// requested output times.
pub fn integrate<F: VectorField + ?Sized>(
    field: &F,
    state0: &DensityState,
    opts: &IntegrateOptions,
) -> Result<KineticTrajectory> {
    let t0 = state0.time;
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(Error::Argument(format!("dt must be positive and finite, got {}", opts.dt)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Argument(format!("tol must be positive, got {}", opts.tol)));
    }
    if !(opts.t_end >= t0) || !opts.t_end.is_finite() {
        return Err(Error::Argument(format!("t_end {} precedes start time {t0}", opts.t_end)));
    }
    let n = field.len();
    if state0.plus.len() != state0.minus.len() || 2 * state0.plus.len() != n {
        return Err(Error::Argument(format!(
            "state has {}/{} cells, system expects {}",
            state0.plus.len(),
            state0.minus.len(),
            n / 2
        )));
    }
    let mut outputs = opts.output_times.clone();
    if outputs.is_empty() {
        outputs.push(opts.t_end);
    }
    if outputs.windows(2).any(|w| !(w[1] > w[0])) || outputs[0] < t0 || outputs[outputs.len() - 1] > opts.t_end {
        return Err(Error::Argument("output times must increase within [t0, t_end]".into()));
    }

    let mut y = state0.to_flat();
    if let Some(v) = y.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::Argument(format!("initial densities must be finite and non-negative, found {v}")));
    }
    let mut rk = Rk4::new(field);
    let (mut full, mut half, mut two) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut traj = KineticTrajectory {
        states: Vec::with_capacity(outputs.len()),
        accepted_steps: 0,
        rejected_steps: 0,
        ceiling_violations: Vec::new(),
    };
    let mut t = t0;
    let mut h_ctrl = opts.dt;
    let mut next = 0;
    let monitor = |t: f64, y: &[f64], out: &mut Vec<CeilingViolation>| {
        if let Some([cp, cm]) = opts.ceiling {
            let (p, m) = y.split_at(n / 2);
            let mp = p.iter().copied().fold(0.0, f64::max);
            let mm = m.iter().copied().fold(0.0, f64::max);
            if mp > cp {
                out.push(CeilingViolation { time: t, species: Species::Plus, value: mp });
            }
            if mm > cm {
                out.push(CeilingViolation { time: t, species: Species::Minus, value: mm });
            }
        }
    };
    monitor(t, &y, &mut traj.ceiling_violations);

    while next < outputs.len() {
        if outputs[next] <= t {
            traj.states.push(DensityState::from_flat(outputs[next], &y));
            next += 1;
            continue;
        }
        let target = outputs[next];
        let lands = target - t <= h_ctrl;
        let h = if lands { target - t } else { h_ctrl };
        rk.step(&y, h, &mut full)?;
        rk.step(&y, 0.5 * h, &mut half)?;
        rk.step(&half, 0.5 * h, &mut two)?;
        let err = full.iter().zip(&two).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max);
        if !err.is_finite() || two.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration(format!("non-finite state at t = {t}")));
        }
        if err <= opts.tol {
            for (i, v) in two.iter_mut().enumerate() {
                if *v < 0.0 {
                    if *v < NEGATIVE_CLAMP {
                        return Err(Error::Integration(format!(
                            "component {i} became negative ({v:e}) at t = {}",
                            t + h
                        )));
                    }
                    *v = 0.0;
                }
            }
            core::mem::swap(&mut y, &mut two);
            t = if lands { target } else { t + h };
            traj.accepted_steps += 1;
            monitor(t, &y, &mut traj.ceiling_violations);
            if opts.tol.is_finite() {
                let grow = if err == 0.0 { 2.0 } else { (0.9 * libm::pow(opts.tol / err, 0.2)).min(2.0) };
                let proposed = (h * grow).min(opts.dt);
                // a short landing step only ever shrinks the controller step
                h_ctrl = if !lands {
                    proposed
                } else if grow >= 1.0 {
                    h_ctrl.max(proposed).min(opts.dt)
                } else {
                    proposed.min(h_ctrl)
                };
            }
        } else {
            traj.rejected_steps += 1;
            h_ctrl = h * (0.9 * libm::pow(opts.tol / err, 0.2)).clamp(0.2, 0.9);
            if h_ctrl < MIN_STEP {
                return Err(Error::Numerical(format!("step size underflow ({h_ctrl:e}) at t = {t}: system is stiff")));
            }
        }
    }
    Ok(traj)
}
