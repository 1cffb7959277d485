use wrglauber_core::estimators::{decay_fit, ensemble_density, DecayOutcome};
use wrglauber_core::rng::SimRng;
use wrglauber_core::simulator::{
    birth_acceptance, run, total_bound_rate, Channel, EventKind, SimParams, Simulation,
};
use wrglauber_core::{Domain, Point, PotentialSet, PotentialSpec, Species, TwoTypeConfiguration};

fn interacting() -> PotentialSet {
    let mut p = PotentialSet::free(0.8, 0.6);
    p.mutation_multiplier = 0.7;
    p.phi_plus = PotentialSpec::square_well(0.9, 1.0);
    p.phi_minus = PotentialSpec::square_well(0.4, 0.6);
    p.psi_plus = PotentialSpec::square_well(1.3, 0.8);
    p.psi_minus = PotentialSpec::square_well(0.7, 1.2);
    p.kappa_plus = PotentialSpec::square_well(0.5, 1.0);
    p.kappa_minus = PotentialSpec::square_well(0.2, 0.5);
    p.tau_plus = PotentialSpec::square_well(1.1, 0.9);
    p.tau_minus = PotentialSpec::square_well(0.6, 1.5);
    p
}

// First-event channel frequencies against probabilities computed from the
// bound rate and brute-force acceptances.
#[test]
fn first_event_channels_match_rate_oracle() {
    let domain = Domain::line(8.0).unwrap();
    let params = SimParams::new(domain, interacting()).unwrap();
    let xs = |v: &[f64]| v.iter().map(|&x| Point::new_1d(x)).collect::<Vec<_>>();
    let init = TwoTypeConfiguration::new(&domain, xs(&[0.5, 1.2, 4.0, 7.7]), xs(&[1.0, 3.6, 4.4])).unwrap();

    let probe = Simulation::new(&init, params, 0).unwrap();
    let state = probe.state();
    let bound = total_bound_rate(state, &params);
    let p = &params.potentials;
    let mut expect = Vec::new();
    for s in [Species::Plus, Species::Minus] {
        let n = state.count(s) as f64;
        expect.push((EventKind::Accepted(Channel::Death(s)), n / bound));
        // mutation rates by direct pair sums
        let (same, cross) = match s {
            Species::Plus => (p.kappa_plus, p.tau_plus),
            Species::Minus => (p.kappa_minus, p.tau_minus),
        };
        let own = init.species(s);
        let other = init.species(s.other());
        let rate: f64 = own
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let e: f64 = own.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &y)| same.value(domain.distance(x, y))).sum::<f64>()
                    + other.iter().map(|&y| cross.value(domain.distance(x, y))).sum::<f64>();
                p.mutation_multiplier * (-e).exp()
            })
            .sum();
        expect.push((EventKind::Accepted(Channel::Mutation(s)), rate / bound));
        expect.push((EventKind::Rejected(Channel::Mutation(s)), (p.mutation_multiplier * n - rate) / bound));
        let z = if s == Species::Plus { p.z_plus } else { p.z_minus };
        let nodes = 80_000;
        let h = domain.volume() / nodes as f64;
        let accepted: f64 = (0..nodes)
            .map(|k| birth_acceptance(Point::new_1d((k as f64 + 0.5) * h), s, state, &params).unwrap() * h)
            .sum();
        expect.push((EventKind::Accepted(Channel::Birth(s)), z * accepted / bound));
        expect.push((EventKind::Rejected(Channel::Birth(s)), z * (domain.volume() - accepted) / bound));
    }
    let total: f64 = expect.iter().map(|e| e.1).sum();
    assert!((total - 1.0).abs() < 1e-12);

    let trials = 100_000;
    let mut counts = vec![0usize; expect.len()];
    let mut mean_wait = 0.0;
    for seed in 0..trials {
        let mut sim = Simulation::new(&init, params, seed as u64).unwrap();
        let rec = sim.step().unwrap();
        mean_wait += rec.time / trials as f64;
        let i = expect.iter().position(|e| e.0 == rec.kind).unwrap();
        counts[i] += 1;
    }
    for (&(kind, prob), &c) in expect.iter().zip(&counts) {
        let freq = c as f64 / trials as f64;
        let sd = (prob * (1.0 - prob) / trials as f64).sqrt();
        assert!((freq - prob).abs() < 4.0 * sd + 1e-4, "{kind:?}: {freq} vs {prob}");
    }
    // waiting time is exponential with the bound rate
    let sd = 1.0 / bound / (trials as f64).sqrt();
    assert!((mean_wait - 1.0 / bound).abs() < 4.0 * sd, "{mean_wait} vs {}", 1.0 / bound);
}

// With no interactions the total density relaxes to z⁺ + z⁻ at rate one.
#[test]
fn free_total_density_decays_at_unit_rate() {
    let domain = Domain::line(50.0).unwrap();
    let params = SimParams::new(domain, PotentialSet::free(1.0, 0.5)).unwrap();
    let times: Vec<f64> = (1..=10).map(|i| 0.25 * i as f64).collect();
    let trajs: Vec<_> = (0..400)
        .map(|r| run(&TwoTypeConfiguration::empty(), &params, 2.5, &times, SimRng::new(r).next_u64(), false).unwrap())
        .collect();
    let series: Vec<(f64, f64)> = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let configs: Vec<TwoTypeConfiguration> = trajs.iter().map(|tr| tr.snapshots[k].config.clone()).collect();
            let total = ensemble_density(&configs, Species::Plus, &domain).mean()
                + ensemble_density(&configs, Species::Minus, &domain).mean();
            (t, total)
        })
        .collect();
    match decay_fit(&series, 1.5).unwrap() {
        DecayOutcome::Rate(fit) => {
            assert!((fit.rate - 1.0).abs() < 0.1, "{fit:?}");
            assert!(fit.amplitude < 0.0);
        }
        other => panic!("no rate: {other:?}"),
    }
}
