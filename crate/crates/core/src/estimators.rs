//! Statistics over simulation snapshots.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::simulator::Snapshot;
use crate::{Domain, Error, Result, Species, TwoTypeConfiguration};

/// Default number of batches for batch-means standard errors.
pub const DEFAULT_BATCHES: usize = 20;

/// Streaming mean and variance (Welford), mergeable in any order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan's parallel update.
    pub fn merge(&self, other: &RunningStats) -> RunningStats {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / n as f64;
        RunningStats { count: n, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            libm::sqrt(self.variance() / self.count as f64)
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = RunningStats::new();
        for x in iter {
            s.push(x);
        }
        s
    }
}

/// Batch means of a correlated series: the mean over all samples, with the
/// standard error taken from the spread of `batches` contiguous batch
/// means.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchMeans {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub batches: usize,
}

pub fn batch_means(series: &[f64], batches: usize) -> Result<BatchMeans> {
    let n = series.len();
    if n < 2 {
        return Err(Error::Argument(format!("batch means need at least 2 samples, got {n}")));
    }
    let b = batches.clamp(2, n);
    let stats: RunningStats = (0..b)
        .map(|k| {
            let (lo, hi) = (k * n / b, (k + 1) * n / b);
            series[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    Ok(BatchMeans {
        mean: series.iter().sum::<f64>() / n as f64,
        std_error: stats.std_error(),
        samples: n,
        batches: b,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntensityEstimate {
    pub species: Species,
    /// Particles per unit volume.
    pub density: f64,
    pub std_error: f64,
    pub samples: usize,
    pub window: (f64, f64),
}

/// Mean density of `species` over snapshots with time in `window`
/// (inclusive), batch-means standard error.
pub fn intensity(
    snapshots: &[Snapshot],
    species: Species,
    window: (f64, f64),
    domain: &Domain,
    batches: usize,
) -> Result<IntensityEstimate> {
    let vol = domain.volume();
    let series: Vec<f64> = snapshots
        .iter()
        .filter(|s| s.time >= window.0 && s.time <= window.1)
        .map(|s| s.config.count(species) as f64 / vol)
        .collect();
    if series.len() < 2 {
        return Err(Error::Argument(format!(
            "window [{}, {}] holds {} snapshots, need at least 2",
            window.0,
            window.1,
            series.len()
        )));
    }
    let bm = batch_means(&series, batches)?;
    Ok(IntensityEstimate { species, density: bm.mean, std_error: bm.std_error, samples: bm.samples, window })
}

/// Ensemble density at one time: mean over independent replicas.
pub fn ensemble_density(configs: &[TwoTypeConfiguration], species: Species, domain: &Domain) -> RunningStats {
    let vol = domain.volume();
    configs.iter().map(|c| c.count(species) as f64 / vol).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpeciesPair {
    PlusPlus,
    MinusMinus,
    PlusMinus,
}

impl SpeciesPair {
    pub fn label(self) -> &'static str {
        match self {
            SpeciesPair::PlusPlus => "++",
            SpeciesPair::MinusMinus => "--",
            SpeciesPair::PlusMinus => "+-",
        }
    }
}

/// Radial bin edges `r_0 < r_1 < ... < r_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialBins {
    edges: Vec<f64>,
}

impl RadialBins {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges[0] < 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("bin edges must be non-negative and strictly increasing".into()));
        }
        Ok(RadialBins { edges })
    }

    pub fn uniform(count: usize, r_max: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Argument("need at least one bin".into()));
        }
        RadialBins::new((0..=count).map(|i| r_max * i as f64 / count as f64).collect())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn r_max(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    /// Volume of the shell `r_lo < |u| <= r_hi`.
    pub fn shell_volume(&self, bin: usize, dim: usize) -> f64 {
        let (a, b) = (self.edges[bin], self.edges[bin + 1]);
        match dim {
            1 => 2.0 * (b - a),
            _ => core::f64::consts::PI * (b * b - a * a),
        }
    }

    fn locate(&self, r: f64) -> Option<usize> {
        if r <= self.edges[0] || r > self.r_max() {
            return None;
        }
        // first edge >= r closes the bin
        let i = self.edges.partition_point(|&e| e < r);
        Some(i - 1)
    }

    fn check(&self, domain: &Domain) -> Result<()> {
        if self.r_max() > domain.max_cutoff() {
            return Err(Error::Argument(format!(
                "largest bin edge {} exceeds half the smallest side {}",
                self.r_max(),
                domain.max_cutoff()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairCorrelationEstimate {
    pub pair: SpeciesPair,
    pub edges: Vec<f64>,
    /// Estimated pair density `k⁽²⁾(r)` per bin.
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub snapshots: usize,
}

/// Ordered-pair distance histogram of one configuration.
pub fn pair_histogram(config: &TwoTypeConfiguration, pair: SpeciesPair, bins: &RadialBins, domain: &Domain) -> Vec<u64> {
    let mut h = vec![0u64; bins.len()];
    let r2max = bins.r_max() * bins.r_max();
    let mut add = |a: &[crate::Point], b: &[crate::Point], same: bool| {
        for (i, &x) in a.iter().enumerate() {
            let start = if same { i + 1 } else { 0 };
            for &y in &b[start..] {
                let d = domain.displacement_unchecked(x, y);
                let r2 = d[0] * d[0] + d[1] * d[1];
                if r2 <= r2max {
                    if let Some(k) = bins.locate(libm::sqrt(r2)) {
                        h[k] += if same { 2 } else { 1 };
                    }
                }
            }
        }
    };
    match pair {
        SpeciesPair::PlusPlus => add(&config.plus, &config.plus, true),
        SpeciesPair::MinusMinus => add(&config.minus, &config.minus, true),
        SpeciesPair::PlusMinus => add(&config.plus, &config.minus, false),
    }
    h
}

/// Pair-density estimate normalized so that a Poisson configuration with
/// intensities `ρ₁, ρ₂` gives the flat value `ρ₁ρ₂`. Standard errors treat
/// the configurations as independent samples.
pub fn pair_correlation<'a, I>(configs: I, pair: SpeciesPair, bins: &RadialBins, domain: &Domain) -> Result<PairCorrelationEstimate>
where
    I: IntoIterator<Item = &'a TwoTypeConfiguration>,
{
    bins.check(domain)?;
    let vol = domain.volume();
    let norms: Vec<f64> = (0..bins.len()).map(|b| vol * bins.shell_volume(b, domain.dim())).collect();
    let mut stats = vec![RunningStats::new(); bins.len()];
    for c in configs {
        let h = pair_histogram(c, pair, bins, domain);
        for b in 0..bins.len() {
            stats[b].push(h[b] as f64 / norms[b]);
        }
    }
    let snapshots = stats[0].count() as usize;
    if snapshots == 0 {
        return Err(Error::Argument("pair correlation needs at least one configuration".into()));
    }
    Ok(PairCorrelationEstimate {
        pair,
        edges: bins.edges().to_vec(),
        values: stats.iter().map(RunningStats::mean).collect(),
        std_errors: stats.iter().map(RunningStats::std_error).collect(),
        snapshots,
    })
}

/// Configurations from independent replicas at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSlice {
    pub time: f64,
    pub configs: Vec<TwoTypeConfiguration>,
}

/// Kinetic densities `(t, ρ⁺, ρ⁻)`.
pub type KineticPoint = (f64, f64, f64);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapEstimate {
    pub gap: f64,
    pub std_error: f64,
    pub time: f64,
    pub bin: usize,
}

/// `max_{t, r} |k̂⁽¹'¹⁾_n(r, t) / n² - ρ_t⁺ ρ_t⁻|` for snapshots simulated
/// at scale `n`.
pub fn factorization_gap(
    slices: &[TimeSlice],
    n_scale: u32,
    kinetic: &[KineticPoint],
    bins: &RadialBins,
    domain: &Domain,
) -> Result<GapEstimate> {
    if slices.len() != kinetic.len() {
        return Err(Error::Argument(format!(
            "{} snapshot times but {} kinetic times",
            slices.len(),
            kinetic.len()
        )));
    }
    let n2 = (n_scale as f64) * (n_scale as f64);
    let mut best = GapEstimate { gap: -1.0, std_error: 0.0, time: 0.0, bin: 0 };
    for (slice, &(t, rp, rm)) in slices.iter().zip(kinetic) {
        if libm::fabs(slice.time - t) > 1e-9 * t.abs().max(1.0) {
            return Err(Error::Argument(format!("snapshot time {} does not match kinetic time {t}", slice.time)));
        }
        let est = pair_correlation(&slice.configs, SpeciesPair::PlusMinus, bins, domain)?;
        for b in 0..est.values.len() {
            let g = libm::fabs(est.values[b] / n2 - rp * rm);
            if g > best.gap {
                best = GapEstimate { gap: g, std_error: est.std_errors[b] / n2, time: t, bin: b };
            }
        }
    }
    if best.gap < 0.0 {
        return Err(Error::Argument("no snapshots to compare".into()));
    }
    Ok(best)
}

/// Upper bound on the fit RMS for a rate to be reported.
pub const DEFAULT_MAX_RESIDUAL: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    /// Fitted rate `b` in `|v - target| ≈ a e^{-bt}`.
    pub rate: f64,
    pub amplitude: f64,
    /// RMS of the log-linear fit.
    pub residual: f64,
    pub window: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayOutcome {
    Rate(DecayFit),
    /// Deviations vanish or change sign: the series is at its noise floor.
    NoiseFloor,
    /// The log-linear fit is too poor to report a rate.
    PoorFit { residual: f64 },
}

/// Least-squares fit of `log|v - target|` against time.
pub fn decay_fit(series: &[(f64, f64)], target: f64) -> Result<DecayOutcome> {
    decay_fit_with(series, target, DEFAULT_MAX_RESIDUAL)
}

pub fn decay_fit_with(series: &[(f64, f64)], target: f64, max_residual: f64) -> Result<DecayOutcome> {
    if series.len() < 5 {
        return Err(Error::Argument(format!("decay fit needs at least 5 points, got {}", series.len())));
    }
    let sign = series[0].1 - target;
    if series.iter().any(|&(_, v)| (v - target) * sign <= 0.0) {
        return Ok(DecayOutcome::NoiseFloor);
    }
    let n = series.len() as f64;
    let pts: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (t, libm::log(libm::fabs(v - target)))).collect();
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    if stt == 0.0 {
        return Err(Error::Argument("decay fit needs distinct times".into()));
    }
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let residual = libm::sqrt(pts.iter().map(|p| { let e = p.1 - intercept - slope * p.0; e * e }).sum::<f64>() / n);
    if residual > max_residual {
        return Ok(DecayOutcome::PoorFit { residual });
    }
    Ok(DecayOutcome::Rate(DecayFit {
        rate: -slope,
        amplitude: libm::copysign(libm::exp(intercept), sign),
        residual,
        window: (series[0].0, series[series.len() - 1].0),
    }))
}
