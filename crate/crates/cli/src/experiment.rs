//! Running a [`RunSpec`]: dispatch to the core library, then write all
//! outputs into a temporary directory that replaces the target on success.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use wrglauber_core::estimators::{
    self, ensemble_density, factorization_gap, KineticPoint, RadialBins, RunningStats, SpeciesPair, TimeSlice,
};
use wrglauber_core::kinetic::{
    integrate, integrate_homogeneous, jacobian_homogeneous, stationary, DensityState, FieldParams, Grid,
    IntegrateOptions, KineticParams, KineticTrajectory,
};
use wrglauber_core::regime::{check_fokker_planck_conditions, check_vlasov_conditions, RegimeReport};
use wrglauber_core::rng::{derive_seed, SimRng};
use wrglauber_core::simulator::{run_with_rng, vlasov_rescale, SimParams, Trajectory};
use wrglauber_core::{Species, TwoTypeConfiguration};

use crate::config::{ExperimentKind, RunSpec};
use crate::error::CliError;
use crate::formats::{
    real, sha256_hex, write_events, write_snapshots, Csv, ExperimentManifest, FileEntry, KvRecord, MANIFEST_NAME,
};

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses all cores.
    pub parallel: usize,
}

/// Files and notes produced by an experiment before anything is written.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<(String, Vec<u8>)>,
    pub warnings: Vec<String>,
    pub replica_seeds: Vec<u64>,
}

impl Output {
    fn add(&mut self, path: impl Into<String>, text: String) {
        self.files.push((path.into(), text.into_bytes()));
    }
}

pub fn replica_seeds(seed: u64, replicas: usize) -> Vec<u64> {
    (0..replicas as u64).map(|r| derive_seed(seed, r)).collect()
}

fn pool(parallel: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start {parallel} worker threads: {e}")))
}

/// Runs `spec` and writes its outputs to `spec.output_dir`.
///
/// An existing target is only replaced if it is empty or holds a manifest
/// from an earlier run.
pub fn run_experiment(spec: &RunSpec, opts: &RunOptions) -> Result<ExperimentManifest, CliError> {
    let out = spec
        .output_dir
        .clone()
        .ok_or_else(|| CliError::Validation("no output directory given (use --out or output_dir)".into()))?;
    let replace = check_target(&out)?;
    let output = pool(opts.parallel)?.install(|| produce(spec))?;

    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| CliError::io(&parent, e))?;
    let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = parent.join(format!(".{name}.partial-{}", std::process::id()));
    let result = write_all(spec, &output, &tmp).and_then(|manifest| {
        if replace {
            fs::remove_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
        }
        fs::rename(&tmp, &out).map_err(|e| CliError::io(&out, e))?;
        Ok(manifest)
    });
    if result.is_err() && tmp.exists() {
        let _ = fs::remove_dir_all(&tmp);
    }
    result
}

fn check_target(out: &Path) -> Result<bool, CliError> {
    if !out.exists() {
        return Ok(false);
    }
    if !out.is_dir() {
        return Err(CliError::Validation(format!("output path {} exists and is not a directory", out.display())));
    }
    let mut entries = fs::read_dir(out).map_err(|e| CliError::io(out, e))?;
    if entries.next().is_none() || out.join(MANIFEST_NAME).is_file() {
        return Ok(true);
    }
    Err(CliError::Validation(format!(
        "refusing to replace {}: it is not empty and holds no {MANIFEST_NAME}",
        out.display()
    )))
}

fn write_all(spec: &RunSpec, output: &Output, dir: &Path) -> Result<ExperimentManifest, CliError> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::with_capacity(output.files.len());
    for (rel, bytes) in &output.files {
        let path = dir.join(rel);
        if let Some(p) = path.parent() {
            fs::create_dir_all(p).map_err(|e| CliError::io(p, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        files.push(FileEntry { path: rel.clone(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = ExperimentManifest {
        experiment: spec.experiment.to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        seed: spec.schedule.seed,
        replica_seeds: output.replica_seeds.clone(),
        warnings: output.warnings.clone(),
        config: spec.to_config_string(),
        files,
    };
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, manifest.to_text()).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

/// Computes every output file of `spec` in memory. Parallel sections use
/// the current rayon pool.
pub fn produce(spec: &RunSpec) -> Result<Output, CliError> {
    let mut out = Output::default();
    match spec.experiment {
        ExperimentKind::Check => check(spec, &mut out)?,
        ExperimentKind::Simulate => simulate(spec, &mut out)?,
        ExperimentKind::Kinetics => kinetics(spec, &mut out)?,
        ExperimentKind::Stationary => stationary_point(spec, &mut out)?,
        ExperimentKind::Mesoscopic => mesoscopic(spec, &mut out)?,
    }
    Ok(out)
}

pub fn regime_kv(r: &RegimeReport) -> String {
    let mut kv = KvRecord::new();
    kv.put("regime", r.regime.name())
        .put_real("alpha_plus", r.weight.alpha_plus)
        .put_real("alpha_minus", r.weight.alpha_minus);
    for i in 0..4 {
        kv.put_real(&format!("lhs_{}", i + 1), r.lhs[i])
            .put_real(&format!("threshold_{}", i + 1), r.thresholds[i])
            .put_real(&format!("margin_{}", i + 1), r.margins[i])
            .put(&format!("holds_{}", i + 1), r.holds(i));
    }
    kv.put_real("a_alpha", r.a_alpha)
        .put_real("lambda_0", r.lambda_0)
        .put("verdict", if r.pass { "PASS" } else { "FAIL" });
    kv.into_string()
}

fn check(spec: &RunSpec, out: &mut Output) -> Result<(), CliError> {
    let dim = spec.domain.dim();
    let fp = check_fokker_planck_conditions(&spec.potentials, &spec.weight, dim)
        .map_err(|e| CliError::context("fokker-planck constants", e))?;
    let vl = check_vlasov_conditions(&spec.potentials, &spec.weight, dim);
    out.add("regime_fokker_planck.kv", regime_kv(&fp));
    out.add("regime_vlasov.kv", regime_kv(&vl));
    out.add("regime.txt", format!("{fp}\n{vl}\n"));
    Ok(())
}

fn sim_params(spec: &RunSpec, n: u32) -> Result<SimParams, CliError> {
    let scaled = vlasov_rescale(&spec.potentials, n)?;
    Ok(SimParams::new(spec.domain, scaled.scaled)?)
}

/// Replica `r` draws its Poisson initial state and then its dynamics from
/// one stream seeded by `seeds[r]`.
fn run_replicas(
    spec: &RunSpec,
    params: &SimParams,
    intensities: (f64, f64),
    seeds: &[u64],
    record_events: bool,
) -> Result<Vec<Trajectory>, CliError> {
    seeds
        .par_iter()
        .enumerate()
        .map(|(r, &seed)| {
            let mut rng = SimRng::new(seed);
            let initial = TwoTypeConfiguration::poisson(&spec.domain, intensities.0, intensities.1, &mut rng);
            run_with_rng(&initial, params, spec.schedule.t_end, &spec.schedule.snapshot_times, rng, record_events)
                .map_err(|e| CliError::context(format!("replica {r}"), e))
        })
        .collect()
}

/// Ensemble mean and SE of `count / (scale |Λ|)` at each snapshot time.
fn ensemble_intensity_csv(times: &[f64], trajs: &[Trajectory], scale: f64, spec: &RunSpec) -> String {
    let mut csv = Csv::new(&["time", "rho_plus", "se_plus", "rho_minus", "se_minus"]);
    for (k, &t) in times.iter().enumerate() {
        let configs: Vec<TwoTypeConfiguration> = trajs.iter().map(|tr| tr.snapshots[k].config.clone()).collect();
        let p = ensemble_density(&configs, Species::Plus, &spec.domain);
        let m = ensemble_density(&configs, Species::Minus, &spec.domain);
        csv.row([
            real(t),
            real(p.mean() / scale),
            real(p.std_error() / scale),
            real(m.mean() / scale),
            real(m.std_error() / scale),
        ]);
    }
    csv.into_string()
}

fn simulate(spec: &RunSpec, out: &mut Output) -> Result<(), CliError> {
    let params = sim_params(spec, 1)?;
    let seeds = replica_seeds(spec.schedule.seed, spec.schedule.replicas);
    let trajs = run_replicas(spec, &params, spec.initial, &seeds, spec.schedule.record_events)?;
    let dim = spec.domain.dim();
    let times = &spec.schedule.snapshot_times;
    for (r, tr) in trajs.iter().enumerate() {
        out.add(format!("replica_{r:03}/snapshots.txt"), write_snapshots(dim, &tr.snapshots));
        if spec.schedule.record_events {
            out.add(format!("replica_{r:03}/events.log"), write_events(dim, &tr.events));
        }
    }
    out.add("intensity.csv", ensemble_intensity_csv(times, &trajs, 1.0, spec));

    let window = (spec.estimators.window_start, spec.schedule.t_end);
    let mut kv = KvRecord::new();
    kv.put("replicas", trajs.len());
    let mut totals = wrglauber_core::simulator::EventCounters::default();
    for tr in &trajs {
        let c = &tr.counters;
        for s in 0..2 {
            totals.births[s] += c.births[s];
            totals.deaths[s] += c.deaths[s];
            totals.mutations[s] += c.mutations[s];
            totals.rejected_births[s] += c.rejected_births[s];
            totals.rejected_mutations[s] += c.rejected_mutations[s];
        }
    }
    kv.put("events_total", totals.total());
    for (s, sym) in [(0, "plus"), (1, "minus")] {
        kv.put(&format!("births_{sym}"), totals.births[s])
            .put(&format!("deaths_{sym}"), totals.deaths[s])
            .put(&format!("mutations_{sym}"), totals.mutations[s])
            .put(&format!("rejected_births_{sym}"), totals.rejected_births[s])
            .put(&format!("rejected_mutations_{sym}"), totals.rejected_mutations[s]);
    }
    kv.put_real("window_start", window.0).put_real("window_end", window.1);
    for species in [Species::Plus, Species::Minus] {
        let name = if species == Species::Plus { "plus" } else { "minus" };
        let per_replica: Result<Vec<_>, _> = trajs
            .iter()
            .map(|tr| estimators::intensity(&tr.snapshots, species, window, &spec.domain, spec.estimators.batches))
            .collect();
        // too few snapshots in the window: no time average to report
        let Ok(per_replica) = per_replica else { continue };
        let (mean, se) = if per_replica.len() == 1 {
            (per_replica[0].density, per_replica[0].std_error)
        } else {
            let s: RunningStats = per_replica.iter().map(|e| e.density).collect();
            (s.mean(), s.std_error())
        };
        kv.put_real(&format!("intensity_{name}"), mean).put_real(&format!("intensity_{name}_se"), se);
    }
    out.add("summary.kv", kv.into_string());

    let configs: Vec<&TwoTypeConfiguration> = trajs
        .iter()
        .flat_map(|tr| tr.snapshots.iter().filter(|s| s.time >= window.0).map(|s| &s.config))
        .collect();
    if !configs.is_empty() {
        let bins = RadialBins::uniform(spec.estimators.bins, spec.estimators.r_max)?;
        let mut csv = Csv::new(&["pair", "r_lo", "r_hi", "estimate", "se"]);
        for pair in [SpeciesPair::PlusPlus, SpeciesPair::MinusMinus, SpeciesPair::PlusMinus] {
            let est = estimators::pair_correlation(configs.iter().copied(), pair, &bins, &spec.domain)?;
            for b in 0..est.values.len() {
                csv.row([
                    pair.label().to_string(),
                    real(est.edges[b]),
                    real(est.edges[b + 1]),
                    real(est.values[b]),
                    real(est.std_errors[b]),
                ]);
            }
        }
        out.add("pair_correlation.csv", csv.into_string());
    }
    out.replica_seeds = seeds;
    Ok(())
}

fn output_times(spec: &RunSpec) -> Vec<f64> {
    if spec.schedule.snapshot_times.is_empty() {
        vec![spec.schedule.t_end]
    } else {
        spec.schedule.snapshot_times.clone()
    }
}

fn kinetic_summary(tr: &KineticTrajectory) -> KvRecord {
    let mut kv = KvRecord::new();
    let (p, m) = tr.last().mean();
    kv.put("accepted_steps", tr.accepted_steps)
        .put("rejected_steps", tr.rejected_steps)
        .put("ceiling_violations", tr.ceiling_violations.len())
        .put_real("final_time", tr.last().time)
        .put_real("final_rho_plus", p)
        .put_real("final_rho_minus", m);
    if let Some(v) = tr.ceiling_violations.first() {
        kv.put_real("first_violation_time", v.time);
    }
    kv
}

fn kinetics(spec: &RunSpec, out: &mut Output) -> Result<(), CliError> {
    let k = &spec.kinetics;
    let opts = IntegrateOptions {
        t_end: spec.schedule.t_end,
        dt: k.dt,
        tol: k.tol,
        output_times: output_times(spec),
        ceiling: k.ceiling,
    };
    let (rp, rm) = spec.initial;
    if k.cells == 0 {
        let params = KineticParams::from_potentials(&spec.potentials, spec.domain.dim())?;
        let tr = integrate(&params, &DensityState::homogeneous(0.0, rp, rm), &opts)?;
        let mut csv = Csv::new(&["time", "rho_plus", "rho_minus"]);
        for s in &tr.states {
            csv.row([real(s.time), real(s.plus[0]), real(s.minus[0])]);
        }
        out.add("trajectory.csv", csv.into_string());
        out.add("kinetics.kv", kinetic_summary(&tr).into_string());
    } else {
        let grid = Grid::new(spec.domain, k.cells)?;
        let params = FieldParams::new(&spec.potentials, grid.clone())?;
        let n = grid.n_cells();
        let mut s0 = DensityState::constant(0.0, n, rp, rm);
        let len = spec.domain.side(0);
        for i in 0..n {
            let c = (2.0 * PI * grid.center(i).x() / len).cos();
            s0.plus[i] = rp * (1.0 + k.perturbation * c);
            s0.minus[i] = rm * (1.0 - k.perturbation * c);
        }
        let tr = integrate(&params, &s0, &opts)?;
        let mut cells = Csv::new(&["time", "cell", "x", "y", "rho_plus", "rho_minus"]);
        let mut means = Csv::new(&["time", "rho_plus", "rho_minus"]);
        for s in &tr.states {
            for i in 0..n {
                let c = grid.center(i);
                cells.row([real(s.time), i.to_string(), real(c.x()), real(c.y()), real(s.plus[i]), real(s.minus[i])]);
            }
            let (p, m) = s.mean();
            means.row([real(s.time), real(p), real(m)]);
        }
        out.add("trajectory_cells.csv", cells.into_string());
        out.add("trajectory.csv", means.into_string());
        out.add("kinetics.kv", kinetic_summary(&tr).into_string());
    }
    Ok(())
}

fn stationary_point(spec: &RunSpec, out: &mut Output) -> Result<(), CliError> {
    let params = KineticParams::from_potentials(&spec.potentials, spec.domain.dim())?;
    let st = &spec.stationary;
    let sp = stationary(&params, st.init, st.damping, st.tol, st.max_iter)?;
    let mut kv = KvRecord::new();
    kv.put_real("rho_plus", sp.rho_plus)
        .put_real("rho_minus", sp.rho_minus)
        .put("iterations", sp.iterations)
        .put_real("residual", sp.residual);
    out.add("stationary.kv", kv.into_string());
    let rep = jacobian_homogeneous((sp.rho_plus, sp.rho_minus), &params, st.tol)?;
    let mut kv = KvRecord::new();
    let j = rep.jacobian;
    kv.put_real("j11", j[0][0]).put_real("j12", j[0][1]).put_real("j21", j[1][0]).put_real("j22", j[1][1]);
    for (i, (re, im)) in rep.eigenvalues.iter().enumerate() {
        kv.put_real(&format!("eigenvalue_{}_re", i + 1), *re).put_real(&format!("eigenvalue_{}_im", i + 1), *im);
    }
    kv.put("classification", rep.classification.name()).put_real("fd_rel_error", rep.fd_rel_error);
    out.add("stability.kv", kv.into_string());
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MesoscopicRow {
    pub n: u32,
    /// `sup_t max_± |mean ρ̂_n - ρ_t|` over snapshot times.
    pub density_error: f64,
    pub density_se: f64,
    pub gap: f64,
    pub gap_se: f64,
}

#[derive(Clone, Debug)]
pub struct MesoscopicTable {
    pub rows: Vec<MesoscopicRow>,
    pub kinetic: Vec<KineticPoint>,
    pub vlasov: RegimeReport,
    /// Rescaled ensemble intensities per scale, as CSV.
    pub intensities: Vec<(u32, String)>,
}

/// For each scale `n`, simulates replicas at the rescaled parameters from
/// Poisson data of intensity `nρ₀` and compares rescaled densities and
/// cross pair densities with the homogeneous kinetic solution.
pub fn mesoscopic_sweep(spec: &RunSpec) -> Result<MesoscopicTable, CliError> {
    if spec.schedule.replicas < 4 {
        return Err(CliError::Validation(format!(
            "mesoscopic sweeps need at least 4 replicas for standard errors, got {}",
            spec.schedule.replicas
        )));
    }
    let dim = spec.domain.dim();
    let vlasov = check_vlasov_conditions(&spec.potentials, &spec.weight, dim);
    let kp = KineticParams::from_potentials(&spec.potentials, dim)?;
    let times = &spec.schedule.snapshot_times;
    let ktr = integrate_homogeneous(spec.initial, &kp, spec.schedule.t_end, spec.kinetics.dt, spec.kinetics.tol, times)?;
    let kinetic: Vec<KineticPoint> = ktr.states.iter().map(|s| (s.time, s.plus[0], s.minus[0])).collect();
    let bins = RadialBins::uniform(spec.estimators.bins, spec.estimators.r_max)?;
    let seeds = replica_seeds(spec.schedule.seed, spec.schedule.replicas);
    let vol = spec.domain.volume();

    let mut rows = Vec::new();
    let mut intensities = Vec::new();
    for &n in &spec.scales {
        let params = sim_params(spec, n)?;
        let nf = n as f64;
        let trajs = run_replicas(spec, &params, (nf * spec.initial.0, nf * spec.initial.1), &seeds, false)?;
        let mut row = MesoscopicRow { n, density_error: -1.0, density_se: 0.0, gap: 0.0, gap_se: 0.0 };
        let mut slices = Vec::with_capacity(times.len());
        for (k, &(t, rp, rm)) in kinetic.iter().enumerate() {
            for (species, target) in [(Species::Plus, rp), (Species::Minus, rm)] {
                let s: RunningStats = trajs.iter().map(|tr| tr.snapshots[k].config.count(species) as f64 / (nf * vol)).collect();
                let dev = (s.mean() - target).abs();
                if dev > row.density_error {
                    row.density_error = dev;
                    row.density_se = s.std_error();
                }
            }
            slices.push(TimeSlice { time: t, configs: trajs.iter().map(|tr| tr.snapshots[k].config.clone()).collect() });
        }
        let gap = factorization_gap(&slices, n, &kinetic, &bins, &spec.domain)?;
        row.gap = gap.gap;
        row.gap_se = gap.std_error;
        rows.push(row);
        intensities.push((n, ensemble_intensity_csv(times, &trajs, nf, spec)));
    }
    Ok(MesoscopicTable { rows, kinetic, vlasov, intensities })
}

fn mesoscopic(spec: &RunSpec, out: &mut Output) -> Result<(), CliError> {
    let table = mesoscopic_sweep(spec)?;
    if !table.vlasov.pass {
        out.warnings.push(format!(
            "Vlasov conditions FAIL at alpha = ({}, {}); convergence is not guaranteed",
            spec.weight.alpha_plus, spec.weight.alpha_minus
        ));
    }
    out.add("regime_vlasov.kv", regime_kv(&table.vlasov));
    let mut csv = Csv::new(&["time", "rho_plus", "rho_minus"]);
    for &(t, p, m) in &table.kinetic {
        csv.row([real(t), real(p), real(m)]);
    }
    out.add("kinetic_reference.csv", csv.into_string());
    let mut csv = Csv::new(&["n", "density_error", "density_se", "gap", "gap_se"]);
    for r in &table.rows {
        csv.row([r.n.to_string(), real(r.density_error), real(r.density_se), real(r.gap), real(r.gap_se)]);
    }
    out.add("mesoscopic.csv", csv.into_string());
    for (n, text) in table.intensities {
        out.add(format!("scale_{n}/intensity.csv"), text);
    }
    out.replica_seeds = replica_seeds(spec.schedule.seed, spec.schedule.replicas);
    Ok(())
}
