//! Flat `section.key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key is
//! optional except `domain.sides`, `potentials.z_plus` and
//! `potentials.z_minus`; [`RunSpec::to_config_string`] writes every key
//! explicitly, so its output reparses to an equal spec.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use wrglauber_core::potential::POTENTIAL_NAMES;
use wrglauber_core::{Domain, PotentialSet, PotentialSpec, RuelleWeight};

pub const CONFIG_FORMAT_VERSION: u32 = 1;

/// Snapshot count used when `schedule.snapshot_times` is absent.
const DEFAULT_SNAPSHOTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Check,
    Simulate,
    Kinetics,
    Stationary,
    Mesoscopic,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Check,
        ExperimentKind::Simulate,
        ExperimentKind::Kinetics,
        ExperimentKind::Stationary,
        ExperimentKind::Mesoscopic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Check => "check",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Kinetics => "kinetics",
            ExperimentKind::Stationary => "stationary",
            ExperimentKind::Mesoscopic => "mesoscopic",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}` (expected check, simulate, kinetics, stationary or mesoscopic)"))
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub record_events: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KineticSettings {
    pub dt: f64,
    pub tol: f64,
    /// Cells per axis; 0 solves the homogeneous system.
    pub cells: usize,
    /// Relative amplitude of a cosine perturbation along the first axis.
    pub perturbation: f64,
    pub ceiling: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarySettings {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub init: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorSettings {
    pub bins: usize,
    pub r_max: f64,
    pub window_start: f64,
    pub batches: usize,
}

/// A validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub experiment: ExperimentKind,
    pub format_version: u32,
    pub output_dir: Option<PathBuf>,
    pub domain: Domain,
    pub potentials: PotentialSet,
    pub weight: RuelleWeight,
    pub schedule: Schedule,
    /// Poisson intensities of the initial configuration.
    pub initial: (f64, f64),
    pub kinetics: KineticSettings,
    pub stationary: StationarySettings,
    pub estimators: EstimatorSettings,
    pub scales: Vec<u32>,
}

/// One problem in a configuration file. `line` is 0 for problems with
/// defaulted keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
        }
    }
}

const KEYS: &[&str] = &[
    "experiment",
    "format_version",
    "output_dir",
    "domain.dim",
    "domain.sides",
    "potentials.z_plus",
    "potentials.z_minus",
    "potentials.mutation_multiplier",
    "potentials.phi_plus",
    "potentials.phi_minus",
    "potentials.psi_plus",
    "potentials.psi_minus",
    "potentials.kappa_plus",
    "potentials.kappa_minus",
    "potentials.tau_plus",
    "potentials.tau_minus",
    "weight.alpha_plus",
    "weight.alpha_minus",
    "schedule.t_end",
    "schedule.snapshot_times",
    "schedule.replicas",
    "schedule.seed",
    "schedule.record_events",
    "initial.rho_plus",
    "initial.rho_minus",
    "kinetics.dt",
    "kinetics.tol",
    "kinetics.cells",
    "kinetics.perturbation",
    "kinetics.ceiling_plus",
    "kinetics.ceiling_minus",
    "stationary.damping",
    "stationary.tol",
    "stationary.max_iter",
    "stationary.init_plus",
    "stationary.init_minus",
    "estimators.bins",
    "estimators.r_max",
    "estimators.window_start",
    "estimators.batches",
    "mesoscopic.scales",
];

struct Entry {
    value: String,
    line: usize,
    column: usize,
}

struct Parser {
    entries: BTreeMap<String, Entry>,
    errors: Vec<ConfigError>,
}

impl Parser {
    fn error_at(&mut self, key: &str, message: String) {
        let (line, column) = self.entries.get(key).map_or((0, 0), |e| (e.line, e.column));
        self.errors.push(ConfigError { line, column, message });
    }

    fn get<T>(&mut self, key: &str, default: Option<T>, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        match self.entries.get(key) {
            Some(e) => match parse(&e.value) {
                Ok(v) => Some(v),
                Err(msg) => {
                    let (line, column) = (e.line, e.column);
                    self.errors.push(ConfigError { line, column, message: format!("{key}: {msg}") });
                    None
                }
            },
            None => {
                if default.is_none() {
                    self.errors.push(ConfigError { line: 0, column: 0, message: format!("missing required key `{key}`") });
                }
                default
            }
        }
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, got `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("expected a finite number, got `{s}`"));
    }
    Ok(v)
}

fn parse_int<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, got `{s}`"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| item(p.trim())).collect()
}

fn parse_optional_f64(s: &str) -> Result<Option<f64>, String> {
    if s == "none" {
        Ok(None)
    } else {
        parse_f64(s).map(Some)
    }
}

/// Parses `zero`, `square_well(h, R)`, `gaussian(a, σ, C)` or
/// `exponential(a, s, C)`.
pub fn parse_potential(s: &str) -> Result<PotentialSpec, String> {
    let s = s.trim();
    let (name, args) = match s.find('(') {
        Some(i) => {
            let inner = s[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| format!("missing closing parenthesis in `{s}`"))?;
            (s[..i].trim(), parse_list(inner, parse_f64)?)
        }
        None => (s, Vec::new()),
    };
    let want = |n: usize| -> Result<(), String> {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("{name} takes {n} arguments, got {}", args.len()))
        }
    };
    let g = match name {
        "zero" => {
            want(0)?;
            PotentialSpec::Zero
        }
        "square_well" => {
            want(2)?;
            PotentialSpec::square_well(args[0], args[1])
        }
        "gaussian" => {
            want(3)?;
            PotentialSpec::gaussian(args[0], args[1], args[2])
        }
        "exponential" => {
            want(3)?;
            PotentialSpec::exponential(args[0], args[1], args[2])
        }
        _ => return Err(format!("unknown potential `{name}` (expected zero, square_well, gaussian or exponential)")),
    };
    g.validate().map_err(|e| e.to_string())?;
    Ok(g)
}

fn tokenize(text: &str) -> Parser {
    let mut p = Parser { entries: BTreeMap::new(), errors: Vec::new() };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        let Some(eq) = raw.find('=') else {
            p.errors.push(ConfigError { line, column: indent + 1, message: format!("expected `key = value`, got `{trimmed}`") });
            continue;
        };
        let key = raw[..eq].trim();
        let after = &raw[eq + 1..];
        let value = after.trim();
        let column = eq + 2 + (after.len() - after.trim_start().len());
        if key.is_empty() {
            p.errors.push(ConfigError { line, column: indent + 1, message: "empty key".into() });
            continue;
        }
        if !KEYS.contains(&key) {
            p.errors.push(ConfigError { line, column: indent + 1, message: format!("unknown key `{key}`") });
            continue;
        }
        if let Some(prev) = p.entries.get(key) {
            p.errors.push(ConfigError {
                line,
                column: indent + 1,
                message: format!("duplicate key `{key}` (first set on line {})", prev.line),
            });
            continue;
        }
        p.entries.insert(key.to_string(), Entry { value: value.to_string(), line, column });
    }
    p
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunSpec, Vec<ConfigError>> {
    let mut p = tokenize(text);

    let experiment = p.get("experiment", Some(ExperimentKind::Check), |s| s.parse());
    let format_version = p.get("format_version", Some(CONFIG_FORMAT_VERSION), parse_int::<u32>);
    let output_dir = p.get("output_dir", Some(None), |s| {
        if s.is_empty() {
            Err("empty path".to_string())
        } else {
            Ok(Some(PathBuf::from(s)))
        }
    });

    let dim = p.get("domain.dim", Some(1usize), parse_int::<usize>);
    let sides = p.get("domain.sides", None, |s| parse_list(s, parse_f64));
    let domain = match (dim, sides) {
        (Some(dim), Some(sides)) => {
            let sides = if dim == 2 && sides.len() == 1 { vec![sides[0], sides[0]] } else { sides };
            match Domain::new(dim, &sides) {
                Ok(d) => Some(d),
                Err(e) => {
                    p.error_at("domain.sides", format!("domain: {e}"));
                    None
                }
            }
        }
        _ => None,
    };

    let z_plus = p.get("potentials.z_plus", None, parse_f64);
    let z_minus = p.get("potentials.z_minus", None, parse_f64);
    let m = p.get("potentials.mutation_multiplier", Some(1.0), parse_f64);
    let mut pots = [PotentialSpec::Zero; 8];
    for (slot, name) in pots.iter_mut().zip(POTENTIAL_NAMES) {
        if let Some(g) = p.get(&format!("potentials.{name}"), Some(PotentialSpec::Zero), parse_potential) {
            *slot = g;
        }
    }
    let alpha_plus = p.get("weight.alpha_plus", Some(0.0), parse_f64);
    let alpha_minus = p.get("weight.alpha_minus", Some(0.0), parse_f64);

    let t_end = p.get("schedule.t_end", Some(10.0), parse_f64);
    let snapshot_times = if p.has("schedule.snapshot_times") {
        p.get("schedule.snapshot_times", None, |s| parse_list(s, parse_f64))
    } else {
        t_end.map(|t| {
            (0..=DEFAULT_SNAPSHOTS)
                .map(|i| if i == DEFAULT_SNAPSHOTS { t } else { t * i as f64 / DEFAULT_SNAPSHOTS as f64 })
                .collect()
        })
    };
    let replicas = p.get("schedule.replicas", Some(1usize), parse_int::<usize>);
    let seed = p.get("schedule.seed", Some(0u64), parse_int::<u64>);
    let record_events = p.get("schedule.record_events", Some(true), parse_bool);
    let rho_plus = p.get("initial.rho_plus", Some(0.0), parse_f64);
    let rho_minus = p.get("initial.rho_minus", Some(0.0), parse_f64);

    let dt = p.get("kinetics.dt", Some(0.1), parse_f64);
    let tol = p.get("kinetics.tol", Some(1e-9), parse_f64);
    let cells = p.get("kinetics.cells", Some(0usize), parse_int::<usize>);
    let perturbation = p.get("kinetics.perturbation", Some(0.0), parse_f64);
    let ceil_p = p.get("kinetics.ceiling_plus", Some(None), parse_optional_f64);
    let ceil_m = p.get("kinetics.ceiling_minus", Some(None), parse_optional_f64);

    let damping = p.get("stationary.damping", Some(0.5), parse_f64);
    let st_tol = p.get("stationary.tol", Some(1e-12), parse_f64);
    let max_iter = p.get("stationary.max_iter", Some(100_000usize), parse_int::<usize>);
    let init_plus = p.get("stationary.init_plus", Some(0.0), parse_f64);
    let init_minus = p.get("stationary.init_minus", Some(0.0), parse_f64);

    let bins = p.get("estimators.bins", Some(10usize), parse_int::<usize>);
    let r_max = if p.has("estimators.r_max") {
        p.get("estimators.r_max", None, parse_f64)
    } else {
        domain.map(|d| d.max_cutoff())
    };
    let window_start = p.get("estimators.window_start", Some(0.0), parse_f64);
    let batches = p.get("estimators.batches", Some(20usize), parse_int::<usize>);
    let scales = p.get("mesoscopic.scales", Some(vec![1, 2, 4, 8]), |s| parse_list(s, parse_int::<u32>));

    let ceiling = match (ceil_p, ceil_m) {
        (Some(Some(a)), Some(Some(b))) => Some(Some([a, b])),
        (Some(None), Some(None)) => Some(None),
        (Some(_), Some(_)) => {
            p.error_at("kinetics.ceiling_plus", "kinetics.ceiling_plus and kinetics.ceiling_minus must both be set or both be none".into());
            None
        }
        _ => None,
    };

    // Any parse failure above leaves a None; constraint checks need all values.
    let spec = (|| {
        let mut potentials = PotentialSet::free(z_plus?, z_minus?);
        for (slot, g) in potentials.potentials_mut().into_iter().zip(pots) {
            *slot = g;
        }
        potentials.mutation_multiplier = m?;
        Some(RunSpec {
            experiment: experiment?,
            format_version: format_version?,
            output_dir: output_dir?,
            domain: domain?,
            potentials,
            weight: RuelleWeight::new(alpha_plus?, alpha_minus?),
            schedule: Schedule {
                t_end: t_end?,
                snapshot_times: snapshot_times?,
                replicas: replicas?,
                seed: seed?,
                record_events: record_events?,
            },
            initial: (rho_plus?, rho_minus?),
            kinetics: KineticSettings {
                dt: dt?,
                tol: tol?,
                cells: cells?,
                perturbation: perturbation?,
                ceiling: ceiling?,
            },
            stationary: StationarySettings {
                damping: damping?,
                tol: st_tol?,
                max_iter: max_iter?,
                init: (init_plus?, init_minus?),
            },
            estimators: EstimatorSettings {
                bins: bins?,
                r_max: r_max?,
                window_start: window_start?,
                batches: batches?,
            },
            scales: scales?,
        })
    })();

    if let Some(spec) = &spec {
        for (key, message) in spec.constraint_violations() {
            p.error_at(key, message);
        }
    }
    match spec {
        Some(spec) if p.errors.is_empty() => Ok(spec),
        _ => {
            p.errors.sort_by_key(|e| (e.line == 0, e.line, e.column));
            Err(p.errors)
        }
    }
}

impl RunSpec {
    /// Cross-field checks as `(key, message)` pairs.
    pub fn constraint_violations(&self) -> Vec<(&'static str, String)> {
        let mut v: Vec<(&'static str, String)> = Vec::new();
        if self.format_version != CONFIG_FORMAT_VERSION {
            v.push(("format_version", format!("unsupported format version {} (this build reads {CONFIG_FORMAT_VERSION})", self.format_version)));
        }
        let p = &self.potentials;
        if !(p.z_plus > 0.0) {
            v.push(("potentials.z_plus", format!("potentials.z_plus must be positive, got {}", p.z_plus)));
        }
        if !(p.z_minus > 0.0) {
            v.push(("potentials.z_minus", format!("potentials.z_minus must be positive, got {}", p.z_minus)));
        }
        if !(p.mutation_multiplier >= 0.0) {
            v.push(("potentials.mutation_multiplier", format!("potentials.mutation_multiplier must be non-negative, got {}", p.mutation_multiplier)));
        }
        let half = self.domain.max_cutoff();
        const POT_KEYS: [&str; 8] = [
            "potentials.phi_plus",
            "potentials.phi_minus",
            "potentials.psi_plus",
            "potentials.psi_minus",
            "potentials.kappa_plus",
            "potentials.kappa_minus",
            "potentials.tau_plus",
            "potentials.tau_minus",
        ];
        for (g, key) in p.potentials().iter().zip(POT_KEYS) {
            if !g.is_zero() && g.cutoff() > half {
                v.push((key, format!("{key}: cutoff {} exceeds half the smallest box side {half}", g.cutoff())));
            }
        }
        let s = &self.schedule;
        if !(s.t_end >= 0.0) {
            v.push(("schedule.t_end", format!("schedule.t_end must be non-negative, got {}", s.t_end)));
        }
        if s.snapshot_times.windows(2).any(|w| !(w[0] < w[1])) {
            v.push(("schedule.snapshot_times", "schedule.snapshot_times must be strictly increasing".into()));
        }
        if let (Some(&first), Some(&last)) = (s.snapshot_times.first(), s.snapshot_times.last()) {
            if first < 0.0 || last > s.t_end {
                v.push(("schedule.snapshot_times", format!("schedule.snapshot_times must lie in [0, {}], got [{first}, {last}]", s.t_end)));
            }
        }
        if s.replicas == 0 {
            v.push(("schedule.replicas", "schedule.replicas must be at least 1".into()));
        }
        if self.experiment == ExperimentKind::Mesoscopic && s.replicas < 4 {
            v.push(("schedule.replicas", format!("mesoscopic sweeps need at least 4 replicas, got {}", s.replicas)));
        }
        if self.experiment == ExperimentKind::Mesoscopic && s.snapshot_times.is_empty() {
            v.push(("schedule.snapshot_times", "mesoscopic sweeps need at least one snapshot time".into()));
        }
        if !(self.initial.0 >= 0.0 && self.initial.1 >= 0.0) {
            v.push(("initial.rho_plus", "initial intensities must be non-negative".into()));
        }
        let k = &self.kinetics;
        if !(k.dt > 0.0) {
            v.push(("kinetics.dt", format!("kinetics.dt must be positive, got {}", k.dt)));
        }
        if !(k.tol > 0.0) {
            v.push(("kinetics.tol", format!("kinetics.tol must be positive, got {}", k.tol)));
        }
        if !(k.perturbation.abs() <= 1.0) {
            v.push(("kinetics.perturbation", format!("kinetics.perturbation must lie in [-1, 1], got {}", k.perturbation)));
        }
        let st = &self.stationary;
        if !(st.damping > 0.0 && st.damping <= 1.0) {
            v.push(("stationary.damping", format!("stationary.damping must lie in (0, 1], got {}", st.damping)));
        }
        if !(st.tol > 0.0) {
            v.push(("stationary.tol", format!("stationary.tol must be positive, got {}", st.tol)));
        }
        if !(st.init.0 >= 0.0 && st.init.1 >= 0.0) {
            v.push(("stationary.init_plus", "stationary initial densities must be non-negative".into()));
        }
        let e = &self.estimators;
        if e.bins == 0 {
            v.push(("estimators.bins", "estimators.bins must be at least 1".into()));
        }
        if !(e.r_max > 0.0 && e.r_max <= half) {
            v.push(("estimators.r_max", format!("estimators.r_max {} must lie in (0, {half}]", e.r_max)));
        }
        if e.batches < 2 {
            v.push(("estimators.batches", "estimators.batches must be at least 2".into()));
        }
        if self.scales.is_empty() || self.scales[0] < 1 || self.scales.windows(2).any(|w| !(w[0] < w[1])) {
            v.push(("mesoscopic.scales", "mesoscopic.scales must be strictly increasing integers >= 1".into()));
        }
        v
    }

    /// Writes every key; the result reparses to `self`.
    pub fn to_config_string(&self) -> String {
        use std::fmt::Write;
        let f = |x: f64| format!("{x:?}");
        let list = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("experiment", self.experiment.to_string());
        kv("format_version", self.format_version.to_string());
        if let Some(o) = &self.output_dir {
            kv("output_dir", o.display().to_string());
        }
        kv("domain.dim", self.domain.dim().to_string());
        kv("domain.sides", list(self.domain.sides()));
        let p = &self.potentials;
        kv("potentials.z_plus", f(p.z_plus));
        kv("potentials.z_minus", f(p.z_minus));
        kv("potentials.mutation_multiplier", f(p.mutation_multiplier));
        for (g, name) in p.potentials().iter().zip(POTENTIAL_NAMES) {
            kv(&format!("potentials.{name}"), g.to_string());
        }
        kv("weight.alpha_plus", f(self.weight.alpha_plus));
        kv("weight.alpha_minus", f(self.weight.alpha_minus));
        let sc = &self.schedule;
        kv("schedule.t_end", f(sc.t_end));
        kv("schedule.snapshot_times", list(&sc.snapshot_times));
        kv("schedule.replicas", sc.replicas.to_string());
        kv("schedule.seed", sc.seed.to_string());
        kv("schedule.record_events", sc.record_events.to_string());
        kv("initial.rho_plus", f(self.initial.0));
        kv("initial.rho_minus", f(self.initial.1));
        let k = &self.kinetics;
        kv("kinetics.dt", f(k.dt));
        kv("kinetics.tol", f(k.tol));
        kv("kinetics.cells", k.cells.to_string());
        kv("kinetics.perturbation", f(k.perturbation));
        let (cp, cm) = match k.ceiling {
            Some([a, b]) => (f(a), f(b)),
            None => ("none".to_string(), "none".to_string()),
        };
        kv("kinetics.ceiling_plus", cp);
        kv("kinetics.ceiling_minus", cm);
        let st = &self.stationary;
        kv("stationary.damping", f(st.damping));
        kv("stationary.tol", f(st.tol));
        kv("stationary.max_iter", st.max_iter.to_string());
        kv("stationary.init_plus", f(st.init.0));
        kv("stationary.init_minus", f(st.init.1));
        let e = &self.estimators;
        kv("estimators.bins", e.bins.to_string());
        kv("estimators.r_max", f(e.r_max));
        kv("estimators.window_start", f(e.window_start));
        kv("estimators.batches", e.batches.to_string());
        kv("mesoscopic.scales", self.scales.iter().map(u32::to_string).collect::<Vec<_>>().join(", "));
        s
    }
}
