//! Exact kinetic Monte Carlo for birth, death and mutation by thinning.
//!
//! Every existing particle proposes a death at rate 1 (always accepted) and
//! a mutation at rate `m`; each species proposes births at rate `z|Λ|` at
//! uniform positions. Proposals are accepted with the Boltzmann factor of
//! the relative energy, which is at most one since potentials are
//! non-negative. The bound rate only changes at accepted events, so
//! drawing waiting times from the current bound is exact.

use alloc::format;
use alloc::vec::Vec;

use crate::cell_index::CellIndex;
use crate::rng::SimRng;
use crate::{Domain, Error, Point, PotentialSet, Result, Species, TwoTypeConfiguration};

/// A domain together with a validated potential set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimParams {
    pub domain: Domain,
    pub potentials: PotentialSet,
}

impl SimParams {
    pub fn new(domain: Domain, potentials: PotentialSet) -> Result<Self> {
        potentials.validate_for(&domain)?;
        Ok(SimParams { domain, potentials })
    }
}

/// Mean-field rescaling: activities times `n`, heights divided by `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledParams {
    pub base: PotentialSet,
    pub scale_n: u32,
    pub scaled: PotentialSet,
}

pub fn vlasov_rescale(params: &PotentialSet, n: u32) -> Result<ScaledParams> {
    if n < 1 {
        return Err(Error::Argument(format!("scale must be >= 1, got {n}")));
    }
    let mut scaled = *params;
    if n > 1 {
        let inv = 1.0 / n as f64;
        for g in scaled.potentials_mut() {
            *g = g.scaled(inv);
        }
        scaled.z_plus *= n as f64;
        scaled.z_minus *= n as f64;
    }
    Ok(ScaledParams { base: *params, scale_n: n, scaled })
}

/// Proposal channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    Birth(Species),
    Death(Species),
    /// Mutation of a particle of the given species into the other one.
    Mutation(Species),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Accepted(Channel),
    Rejected(Channel),
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        use Channel::*;
        use Species::*;
        match self {
            EventKind::Accepted(Birth(Plus)) => "birth+",
            EventKind::Accepted(Birth(Minus)) => "birth-",
            EventKind::Accepted(Death(Plus)) => "death+",
            EventKind::Accepted(Death(Minus)) => "death-",
            EventKind::Accepted(Mutation(Plus)) => "mutation+-",
            EventKind::Accepted(Mutation(Minus)) => "mutation-+",
            EventKind::Rejected(Birth(Plus)) => "rejected:birth+",
            EventKind::Rejected(Birth(Minus)) => "rejected:birth-",
            EventKind::Rejected(Death(Plus)) => "rejected:death+",
            EventKind::Rejected(Death(Minus)) => "rejected:death-",
            EventKind::Rejected(Mutation(Plus)) => "rejected:mutation+-",
            EventKind::Rejected(Mutation(Minus)) => "rejected:mutation-+",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        use Channel::*;
        use Species::*;
        let (rejected, body) = match s.strip_prefix("rejected:") {
            Some(b) => (true, b),
            None => (false, s),
        };
        let ch = match body {
            "birth+" => Birth(Plus),
            "birth-" => Birth(Minus),
            "death+" => Death(Plus),
            "death-" => Death(Minus),
            "mutation+-" => Mutation(Plus),
            "mutation-+" => Mutation(Minus),
            _ => return None,
        };
        Some(if rejected { EventKind::Rejected(ch) } else { EventKind::Accepted(ch) })
    }

    pub fn channel(&self) -> Channel {
        match *self {
            EventKind::Accepted(c) | EventKind::Rejected(c) => c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub position: Point,
    /// `(|γ⁺|, |γ⁻|)` after the event.
    pub counts: (usize, usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EventCounters {
    pub births: [u64; 2],
    pub deaths: [u64; 2],
    pub mutations: [u64; 2],
    pub rejected_births: [u64; 2],
    pub rejected_mutations: [u64; 2],
}

impl EventCounters {
    pub fn total(&self) -> u64 {
        let s = |a: [u64; 2]| a[0] + a[1];
        s(self.births) + s(self.deaths) + s(self.mutations) + s(self.rejected_births) + s(self.rejected_mutations)
    }

    fn record(&mut self, kind: EventKind) {
        let (slot, s) = match kind {
            EventKind::Accepted(Channel::Birth(s)) => (&mut self.births, s),
            EventKind::Accepted(Channel::Death(s)) | EventKind::Rejected(Channel::Death(s)) => {
                (&mut self.deaths, s)
            }
            EventKind::Accepted(Channel::Mutation(s)) => (&mut self.mutations, s),
            EventKind::Rejected(Channel::Birth(s)) => (&mut self.rejected_births, s),
            EventKind::Rejected(Channel::Mutation(s)) => (&mut self.rejected_mutations, s),
        };
        slot[s.index()] += 1;
    }
}

/// Full simulation state: one cell index per species, clock, RNG.
#[derive(Clone, Debug)]
pub struct SimState {
    pub species: [CellIndex; 2],
    pub time: f64,
    pub rng: SimRng,
    pub counters: EventCounters,
}

impl SimState {
    pub fn count(&self, s: Species) -> usize {
        self.species[s.index()].len()
    }

    pub fn configuration(&self) -> TwoTypeConfiguration {
        TwoTypeConfiguration {
            plus: self.species[0].points().to_vec(),
            minus: self.species[1].points().to_vec(),
        }
    }
}

/// Bound components `[deaths, mutations, births⁺, births⁻]`.
fn bound_parts(state: &SimState, params: &SimParams) -> [f64; 4] {
    let n = (state.count(Species::Plus) + state.count(Species::Minus)) as f64;
    let p = &params.potentials;
    let vol = params.domain.volume();
    [n, p.mutation_multiplier * n, p.z_plus * vol, p.z_minus * vol]
}

/// `R̄ = N + (z⁺ + z⁻)|Λ| + m N`, dominating the true total rate.
pub fn total_bound_rate(state: &SimState, params: &SimParams) -> f64 {
    bound_parts(state, params).iter().sum()
}

fn birth_energy(state: &SimState, params: &SimParams, x: Point, s: Species) -> Result<f64> {
    let p = &params.potentials;
    let (same, cross) = match s {
        Species::Plus => (&p.phi_plus, &p.psi_plus),
        Species::Minus => (&p.phi_minus, &p.psi_minus),
    };
    Ok(state.species[s.index()].energy(same, x, None)?
        + state.species[s.other().index()].energy(cross, x, None)?)
}

fn mutation_energy(state: &SimState, params: &SimParams, s: Species, id: usize) -> Result<f64> {
    let p = &params.potentials;
    let (same, cross) = match s {
        Species::Plus => (&p.kappa_plus, &p.tau_plus),
        Species::Minus => (&p.kappa_minus, &p.tau_minus),
    };
    let x = state.species[s.index()]
        .get(id)
        .ok_or_else(|| Error::Invariant(format!("no {} particle with id {id}", s.symbol())))?;
    Ok(state.species[s.index()].energy(same, x, Some(id))?
        + state.species[s.other().index()].energy(cross, x, None)?)
}

/// Probability that a birth of species `s` proposed at `x` is accepted:
/// `exp(-E_same(x, γ^s) - E_cross(x, γ^{-s}))`.
pub fn birth_acceptance(x: Point, s: Species, state: &SimState, params: &SimParams) -> Result<f64> {
    params.domain.check(x)?;
    Ok(libm::exp(-birth_energy(state, params, x, s)?))
}

/// Mutation rate of particle `id` of species `s`:
/// `m exp(-E_κ(x, γ^s∖x) - E_τ(x, γ^{-s}))`.
pub fn mutation_acceptance(s: Species, id: usize, state: &SimState, params: &SimParams) -> Result<f64> {
    Ok(params.potentials.mutation_multiplier * libm::exp(-mutation_energy(state, params, s, id)?))
}

/// A running simulation.
#[derive(Clone, Debug)]
pub struct Simulation {
    params: SimParams,
    state: SimState,
}

impl Simulation {
    pub fn new(initial: &TwoTypeConfiguration, params: SimParams, seed: u64) -> Result<Self> {
        Self::with_rng(initial, params, SimRng::new(seed))
    }

    pub fn with_rng(initial: &TwoTypeConfiguration, params: SimParams, rng: SimRng) -> Result<Self> {
        params.potentials.validate_for(&params.domain)?;
        let cutoff = params.potentials.max_cutoff();
        let plus = CellIndex::build(params.domain, cutoff, &initial.plus)?;
        let minus = CellIndex::build(params.domain, cutoff, &initial.minus)?;
        Ok(Simulation {
            params,
            state: SimState { species: [plus, minus], time: 0.0, rng, counters: EventCounters::default() },
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    /// Draws the time of the next proposal, or `None` if nothing can happen.
    fn next_time(&mut self) -> Option<f64> {
        let rate = total_bound_rate(&self.state, &self.params);
        if rate > 0.0 {
            Some(self.state.time + self.state.rng.exponential(rate))
        } else {
            None
        }
    }

    /// Selects a channel at time `at`, applies it if accepted.
    fn fire(&mut self, at: f64) -> Result<EventRecord> {
        let parts = bound_parts(&self.state, &self.params);
        let total: f64 = parts.iter().sum();
        let u = self.state.rng.uniform() * total;
        let n_plus = self.state.count(Species::Plus);
        let n = n_plus + self.state.count(Species::Minus);
        let pick_particle = |rng: &mut SimRng| {
            let j = rng.below(n);
            if j < n_plus {
                (Species::Plus, j)
            } else {
                (Species::Minus, j - n_plus)
            }
        };
        self.state.time = at;
        let kind;
        let position;
        if u < parts[0] {
            let (s, id) = pick_particle(&mut self.state.rng);
            position = self.state.species[s.index()].remove(id)?;
            kind = EventKind::Accepted(Channel::Death(s));
        } else if u < parts[0] + parts[1] {
            let (s, id) = pick_particle(&mut self.state.rng);
            position = self.state.species[s.index()].get(id).expect("picked particle exists");
            let e = mutation_energy(&self.state, &self.params, s, id)?;
            if e == 0.0 || self.state.rng.uniform() < libm::exp(-e) {
                self.state.species[s.index()].remove(id)?;
                self.state.species[s.other().index()].insert(position);
                kind = EventKind::Accepted(Channel::Mutation(s));
            } else {
                kind = EventKind::Rejected(Channel::Mutation(s));
            }
        } else {
            // rounding may push u past the last nonempty channel
            let s = if u < parts[0] + parts[1] + parts[2] || parts[3] == 0.0 {
                Species::Plus
            } else {
                Species::Minus
            };
            position = self.state.rng.position(&self.params.domain);
            let e = birth_energy(&self.state, &self.params, position, s)?;
            if e == 0.0 || self.state.rng.uniform() < libm::exp(-e) {
                self.state.species[s.index()].insert(position);
                kind = EventKind::Accepted(Channel::Birth(s));
            } else {
                kind = EventKind::Rejected(Channel::Birth(s));
            }
        }
        self.state.counters.record(kind);
        Ok(EventRecord {
            time: at,
            kind,
            position,
            counts: (self.state.count(Species::Plus), self.state.count(Species::Minus)),
        })
    }

    /// One proposal (accepted or rejected).
    pub fn step(&mut self) -> Result<EventRecord> {
        match self.next_time() {
            Some(t) => self.fire(t),
            None => Err(Error::Argument("total bound rate is zero: no event can occur".into())),
        }
    }

    /// Runs until `t_end`, calling `on_snapshot(time, state)` for each
    /// requested time (state at the last event not after it) and
    /// `on_event` after every proposal.
    pub fn advance<S, E>(
        &mut self,
        t_end: f64,
        snapshot_times: &[f64],
        mut on_snapshot: S,
        mut on_event: E,
    ) -> Result<()>
    where
        S: FnMut(f64, &SimState),
        E: FnMut(&EventRecord, &SimState),
    {
        check_schedule(self.state.time, t_end, snapshot_times)?;
        let mut pending = snapshot_times.iter().copied().peekable();
        loop {
            let next = self.next_time();
            let horizon = next.unwrap_or(f64::INFINITY);
            while let Some(&ts) = pending.peek() {
                if ts < horizon {
                    on_snapshot(ts, &self.state);
                    pending.next();
                } else {
                    break;
                }
            }
            match next {
                Some(t) if t <= t_end => {
                    let rec = self.fire(t)?;
                    on_event(&rec, &self.state);
                }
                _ => {
                    // memoryless: the pending proposal beyond t_end is dropped
                    self.state.time = t_end;
                    return Ok(());
                }
            }
        }
    }
}

fn check_schedule(t0: f64, t_end: f64, times: &[f64]) -> Result<()> {
    if !(t_end >= t0) || !t_end.is_finite() {
        return Err(Error::Argument(format!("t_end {t_end} must be finite and >= current time {t0}")));
    }
    if times.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Argument("snapshot times must be sorted".into()));
    }
    if let (Some(&first), Some(&last)) = (times.first(), times.last()) {
        if !(first >= t0) || !(last <= t_end) {
            return Err(Error::Argument(format!(
                "snapshot times must lie in [{t0}, {t_end}], got [{first}, {last}]"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub config: TwoTypeConfiguration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    /// Every proposal, in order; empty when event recording is off.
    pub events: Vec<EventRecord>,
    pub counters: EventCounters,
}

/// Simulates from `initial` to `t_end`. Deterministic in
/// `(initial, params, seed)`.
pub fn run(
    initial: &TwoTypeConfiguration,
    params: &SimParams,
    t_end: f64,
    snapshot_times: &[f64],
    seed: u64,
    record_events: bool,
) -> Result<Trajectory> {
    run_with_rng(initial, params, t_end, snapshot_times, SimRng::new(seed), record_events)
}

pub fn run_with_rng(
    initial: &TwoTypeConfiguration,
    params: &SimParams,
    t_end: f64,
    snapshot_times: &[f64],
    rng: SimRng,
    record_events: bool,
) -> Result<Trajectory> {
    let mut sim = Simulation::with_rng(initial, *params, rng)?;
    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    let mut events = Vec::new();
    sim.advance(
        t_end,
        snapshot_times,
        |t, s| snapshots.push(Snapshot { time: t, config: s.configuration() }),
        |e, _| {
            if record_events {
                events.push(*e)
            }
        },
    )?;
    Ok(Trajectory { snapshots, events, counters: sim.state.counters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell_index::relative_energy_direct;
    use crate::PotentialSpec;
    use alloc::vec;

    fn interacting() -> PotentialSet {
        let mut p = PotentialSet::free(1.0, 0.7);
        p.phi_plus = PotentialSpec::square_well(0.5, 0.4);
        p.phi_minus = PotentialSpec::gaussian(0.8, 0.2, 0.5);
        p.psi_plus = PotentialSpec::square_well(1.0, 0.3);
        p.psi_minus = PotentialSpec::exponential(0.6, 0.2, 0.5);
        p.kappa_plus = PotentialSpec::square_well(0.3, 0.5);
        p.kappa_minus = PotentialSpec::square_well(0.4, 0.2);
        p.tau_plus = PotentialSpec::gaussian(1.2, 0.1, 0.3);
        p.tau_minus = PotentialSpec::square_well(0.9, 0.45);
        p
    }

    #[test]
    fn bound_rate_arithmetic() {
        let d = Domain::line(10.0).unwrap();
        let params = SimParams::new(d, PotentialSet::free(1.0, 1.0)).unwrap();
        let sim = Simulation::new(&TwoTypeConfiguration::empty(), params, 0).unwrap();
        assert_eq!(total_bound_rate(sim.state(), &params), 20.0);
        let cfg = TwoTypeConfiguration {
            plus: (0..5).map(|i| Point::new_1d(i as f64)).collect(),
            minus: (0..3).map(|i| Point::new_1d(i as f64 + 0.5)).collect(),
        };
        let sim = Simulation::new(&cfg, params, 0).unwrap();
        assert_eq!(total_bound_rate(sim.state(), &params), 36.0);
    }

    #[test]
    fn acceptance_examples() {
        let d = Domain::line(10.0).unwrap();
        let mut p = PotentialSet::free(1.0, 1.0);
        p.psi_plus = PotentialSpec::square_well(0.7, 1.0);
        let params = SimParams::new(d, p).unwrap();
        let empty = Simulation::new(&TwoTypeConfiguration::empty(), params, 0).unwrap();
        assert_eq!(birth_acceptance(Point::new_1d(3.0), Species::Plus, empty.state(), &params).unwrap(), 1.0);
        let cfg = TwoTypeConfiguration { plus: vec![], minus: vec![Point::new_1d(3.5)] };
        let sim = Simulation::new(&cfg, params, 0).unwrap();
        let a = birth_acceptance(Point::new_1d(3.0), Species::Plus, sim.state(), &params).unwrap();
        assert!((a - (-0.7f64).exp()).abs() < 1e-15);

        let lone = TwoTypeConfiguration { plus: vec![Point::new_1d(1.0)], minus: vec![] };
        let sim = Simulation::new(&lone, params, 0).unwrap();
        assert_eq!(mutation_acceptance(Species::Plus, 0, sim.state(), &params).unwrap(), 1.0);
        assert!(matches!(
            mutation_acceptance(Species::Plus, 1, sim.state(), &params),
            Err(Error::Invariant(_))
        ));
        let mut off = p;
        off.mutation_multiplier = 0.0;
        let off = SimParams::new(d, off).unwrap();
        let sim = Simulation::new(&lone, off, 0).unwrap();
        assert_eq!(mutation_acceptance(Species::Plus, 0, sim.state(), &off).unwrap(), 0.0);
    }

    #[test]
    fn acceptances_match_all_pairs_energies() {
        let d = Domain::square(3.0).unwrap();
        let params = SimParams::new(d, interacting()).unwrap();
        let mut rng = SimRng::new(17);
        for _ in 0..20 {
            let cfg = TwoTypeConfiguration::poisson(&d, 4.0, 3.0, &mut rng);
            let sim = Simulation::new(&cfg, params, 0).unwrap();
            let p = &params.potentials;
            for _ in 0..10 {
                let x = rng.position(&d);
                let e = relative_energy_direct(&p.phi_minus, x, &cfg.minus, &d)
                    + relative_energy_direct(&p.psi_minus, x, &cfg.plus, &d);
                let a = birth_acceptance(x, Species::Minus, sim.state(), &params).unwrap();
                assert!((a - (-e).exp()).abs() < 1e-12);
            }
            for (i, &x) in sim.state().species[0].points().iter().enumerate() {
                let others: Vec<Point> = sim.state().species[0]
                    .points()
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &q)| q)
                    .collect();
                let e = relative_energy_direct(&p.kappa_plus, x, &others, &d)
                    + relative_energy_direct(&p.tau_plus, x, sim.state().species[1].points(), &d);
                let a = mutation_acceptance(Species::Plus, i, sim.state(), &params).unwrap();
                assert!((a - (-e).exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bound_dominates_exact_rate() {
        let d = Domain::line(4.0).unwrap();
        let params = SimParams::new(d, interacting()).unwrap();
        let mut rng = SimRng::new(23);
        for _ in 0..20 {
            let cfg = TwoTypeConfiguration::poisson(&d, 2.0, 2.0, &mut rng);
            let sim = Simulation::new(&cfg, params, 0).unwrap();
            let st = sim.state();
            let mut exact = cfg.len() as f64;
            for s in [Species::Plus, Species::Minus] {
                for id in 0..st.count(s) {
                    exact += mutation_acceptance(s, id, st, &params).unwrap();
                }
                let z = if s == Species::Plus { params.potentials.z_plus } else { params.potentials.z_minus };
                // midpoint rule for the birth integral
                let k = 4000;
                let h = 4.0 / k as f64;
                let integral: f64 = (0..k)
                    .map(|i| birth_acceptance(Point::new_1d((i as f64 + 0.5) * h), s, st, &params).unwrap() * h)
                    .sum();
                exact += z * integral;
            }
            assert!(total_bound_rate(st, &params) >= exact);
        }
    }

    #[test]
    fn single_death_channel() {
        let d = Domain::line(2.0).unwrap();
        let mut p = PotentialSet::free(0.0, 0.0);
        p.mutation_multiplier = 0.0;
        let params = SimParams::new(d, p).unwrap();
        let cfg = TwoTypeConfiguration { plus: vec![Point::new_1d(0.3)], minus: vec![] };
        let mut sim = Simulation::new(&cfg, params, 5).unwrap();
        let rec = sim.step().unwrap();
        assert_eq!(rec.kind, EventKind::Accepted(Channel::Death(Species::Plus)));
        assert_eq!(rec.counts, (0, 0));
        assert!(sim.step().is_err());
    }

    #[test]
    fn rescale_examples() {
        let mut p = PotentialSet::free(1.0, 2.0);
        p.kappa_plus = PotentialSpec::square_well(1.0, 0.5);
        assert_eq!(vlasov_rescale(&p, 1).unwrap().scaled, p);
        let s = vlasov_rescale(&p, 4).unwrap().scaled;
        assert_eq!(s.kappa_plus, PotentialSpec::square_well(0.25, 0.5));
        assert_eq!((s.z_plus, s.z_minus), (4.0, 8.0));
        assert!(vlasov_rescale(&p, 0).is_err());
        // n (1 - e^{-g/n}) -> g
        let g = 1.7f64;
        let mut prev = f64::INFINITY;
        for n in [1u32, 4, 16, 64, 256, 1024] {
            let v = n as f64 * -libm::expm1(-g / n as f64);
            let err = (v - g).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < g * g / (2.0 * 1024.0) * 1.01);
    }

    #[test]
    fn zero_horizon_snapshot_is_initial() {
        let d = Domain::line(5.0).unwrap();
        let params = SimParams::new(d, interacting()).unwrap();
        let cfg = TwoTypeConfiguration { plus: vec![Point::new_1d(1.0)], minus: vec![Point::new_1d(2.0)] };
        let t = run(&cfg, &params, 0.0, &[0.0], 1, true).unwrap();
        assert_eq!(t.snapshots.len(), 1);
        assert_eq!(t.snapshots[0].config, cfg);
        assert!(t.events.is_empty());
    }

    #[test]
    fn schedule_is_validated() {
        let d = Domain::line(5.0).unwrap();
        let params = SimParams::new(d, interacting()).unwrap();
        let e = TwoTypeConfiguration::empty();
        assert!(run(&e, &params, 1.0, &[0.5, 0.2], 1, false).is_err());
        assert!(run(&e, &params, 1.0, &[2.0], 1, false).is_err());
    }

    #[test]
    fn same_seed_same_log() {
        let d = Domain::square(4.0).unwrap();
        let params = SimParams::new(d, interacting()).unwrap();
        let mut rng = SimRng::new(1);
        let cfg = TwoTypeConfiguration::poisson(&d, 1.0, 1.0, &mut rng);
        let a = run(&cfg, &params, 20.0, &[0.0, 5.0, 10.0, 20.0], 99, true).unwrap();
        let b = run(&cfg, &params, 20.0, &[0.0, 5.0, 10.0, 20.0], 99, true).unwrap();
        assert_eq!(a, b);
        let c = run(&cfg, &params, 20.0, &[0.0, 5.0, 10.0, 20.0], 100, true).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn count_change_discipline() {
        let d = Domain::square(4.0).unwrap();
        let params = SimParams::new(d, interacting()).unwrap();
        let t = run(&TwoTypeConfiguration::empty(), &params, 50.0, &[], 3, true).unwrap();
        let mut prev = (0i64, 0i64);
        assert!(t.events.len() > 1000);
        let mut last_time = 0.0;
        for e in &t.events {
            assert!(e.time >= last_time);
            last_time = e.time;
            let now = (e.counts.0 as i64, e.counts.1 as i64);
            let delta = (now.0 - prev.0, now.1 - prev.1);
            match e.kind {
                EventKind::Rejected(_) => assert_eq!(delta, (0, 0)),
                EventKind::Accepted(Channel::Birth(_)) | EventKind::Accepted(Channel::Death(_)) => {
                    assert_eq!(delta.0.abs() + delta.1.abs(), 1)
                }
                EventKind::Accepted(Channel::Mutation(Species::Plus)) => assert_eq!(delta, (-1, 1)),
                EventKind::Accepted(Channel::Mutation(Species::Minus)) => assert_eq!(delta, (1, -1)),
            }
            prev = now;
        }
        assert_eq!(t.counters.total() as usize, t.events.len());
    }

    #[test]
    fn index_stays_consistent() {
        let d = Domain::square(3.0).unwrap();
        let params = SimParams::new(d, interacting()).unwrap();
        let mut sim = Simulation::new(&TwoTypeConfiguration::empty(), params, 8).unwrap();
        for _ in 0..5000 {
            sim.step().unwrap();
        }
        for s in &sim.state().species {
            s.check_invariants().unwrap();
        }
    }

    #[test]
    fn labels_round_trip() {
        use Channel::*;
        for c in [Birth(Species::Plus), Birth(Species::Minus), Death(Species::Plus), Death(Species::Minus), Mutation(Species::Plus), Mutation(Species::Minus)] {
            for k in [EventKind::Accepted(c), EventKind::Rejected(c)] {
                assert_eq!(EventKind::from_label(k.label()), Some(k));
            }
        }
        assert_eq!(EventKind::from_label("nope"), None);
    }
}
