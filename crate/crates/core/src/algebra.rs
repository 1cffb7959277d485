//! Harmonic analysis on finite two-type configurations, at desk scale.
//!
//! Functions on `Γ₀²` are evaluated on point lists (one per species) and
//! must be symmetric under permutations within each list. The truncated
//! Lebesgue-Poisson integral uses a product midpoint rule on the periodic
//! box, so its cost grows like `nodes^(d n)`; functions with a product
//! (Lebesgue-exponential) structure are integrated in closed form over
//! the same rule.

use alloc::format;
use alloc::vec::Vec;

use crate::{Domain, Error, Point, Result, TwoTypeConfiguration};

/// Largest configuration handled by subset-lattice sums.
pub const SUBSET_CAP: usize = 12;

/// Largest number of integrand evaluations a product rule may need.
pub const MAX_EVALUATIONS: f64 = 2e8;

/// Per-point factors of a Lebesgue exponential
/// `G(η) = Π_{x∈η⁺} f⁺(x) Π_{y∈η⁻} f⁻(y)`.
pub struct ProductForm<'a> {
    pub plus: &'a dyn Fn(Point) -> f64,
    pub minus: &'a dyn Fn(Point) -> f64,
}

/// A function on two-type finite configurations with bounded support.
pub trait ConfigFunction {
    /// Value on `(plus, minus)`; only called with `plus.len() +
    /// minus.len() <= size_cap()`.
    fn value(&self, plus: &[Point], minus: &[Point]) -> f64;

    /// `N_max`: the function vanishes on larger configurations.
    fn size_cap(&self) -> usize;

    fn product_form(&self) -> Option<ProductForm<'_>> {
        None
    }

    /// Value with the bounded-support convention applied.
    fn eval(&self, plus: &[Point], minus: &[Point]) -> f64 {
        if plus.len() + minus.len() > self.size_cap() {
            0.0
        } else {
            self.value(plus, minus)
        }
    }
}

/// A closure with a declared size cap.
pub struct FiniteFunction<F> {
    f: F,
    cap: usize,
}

impl<F: Fn(&[Point], &[Point]) -> f64> FiniteFunction<F> {
    pub fn new(cap: usize, f: F) -> Self {
        FiniteFunction { f, cap }
    }
}

impl<F: Fn(&[Point], &[Point]) -> f64> ConfigFunction for FiniteFunction<F> {
    fn value(&self, plus: &[Point], minus: &[Point]) -> f64 {
        (self.f)(plus, minus)
    }

    fn size_cap(&self) -> usize {
        self.cap
    }
}

/// `e_λ(f⁺; η⁺) e_λ(f⁻; η⁻)`, truncated at `cap` points.
pub struct LebesgueExponential<F, G> {
    pub plus: F,
    pub minus: G,
    pub cap: usize,
}

impl<F: Fn(Point) -> f64, G: Fn(Point) -> f64> ConfigFunction for LebesgueExponential<F, G> {
    fn value(&self, plus: &[Point], minus: &[Point]) -> f64 {
        plus.iter().map(|&x| (self.plus)(x)).product::<f64>()
            * minus.iter().map(|&x| (self.minus)(x)).product::<f64>()
    }

    fn size_cap(&self) -> usize {
        self.cap
    }

    fn product_form(&self) -> Option<ProductForm<'_>> {
        Some(ProductForm { plus: &self.plus, minus: &self.minus })
    }
}

/// Pointwise product `G · k`.
pub struct Product<'a> {
    pub left: &'a dyn ConfigFunction,
    pub right: &'a dyn ConfigFunction,
}

impl ConfigFunction for Product<'_> {
    fn value(&self, plus: &[Point], minus: &[Point]) -> f64 {
        self.left.eval(plus, minus) * self.right.eval(plus, minus)
    }

    fn size_cap(&self) -> usize {
        self.left.size_cap().min(self.right.size_cap())
    }
}

/// `KG`, evaluated lazily by subset sums.
pub struct KTransformed<'a>(pub &'a dyn ConfigFunction);

impl ConfigFunction for KTransformed<'_> {
    fn value(&self, plus: &[Point], minus: &[Point]) -> f64 {
        k_transform(self.0, plus, minus).unwrap_or(f64::NAN)
    }

    fn size_cap(&self) -> usize {
        SUBSET_CAP
    }
}

/// `K⁻¹F`, evaluated lazily by alternating subset sums.
pub struct KInverted<'a>(pub &'a dyn ConfigFunction);

impl ConfigFunction for KInverted<'_> {
    fn value(&self, plus: &[Point], minus: &[Point]) -> f64 {
        k_inverse(self.0, plus, minus).unwrap_or(f64::NAN)
    }

    fn size_cap(&self) -> usize {
        SUBSET_CAP
    }
}

fn check_cap(plus: &[Point], minus: &[Point]) -> Result<()> {
    let n = plus.len() + minus.len();
    if n > SUBSET_CAP {
        return Err(Error::Size(format!(
            "configuration has {n} points, subset sums are capped at {SUBSET_CAP}"
        )));
    }
    Ok(())
}

/// `Σ_{ξ⊆η} sign(|η∖ξ|) G(ξ)` over both species' subset lattices.
fn subset_sum(
    g: &dyn ConfigFunction,
    plus: &[Point],
    minus: &[Point],
    alternating: bool,
) -> Result<f64> {
    check_cap(plus, minus)?;
    let (np, nm) = (plus.len(), minus.len());
    let mut sub_p: Vec<Point> = Vec::with_capacity(np);
    let mut sub_m: Vec<Point> = Vec::with_capacity(nm);
    let mut total = 0.0;
    for mask_p in 0u32..(1 << np) {
        sub_p.clear();
        sub_p.extend((0..np).filter(|i| mask_p >> i & 1 == 1).map(|i| plus[i]));
        for mask_m in 0u32..(1 << nm) {
            sub_m.clear();
            sub_m.extend((0..nm).filter(|i| mask_m >> i & 1 == 1).map(|i| minus[i]));
            let v = g.eval(&sub_p, &sub_m);
            let removed = (np + nm) - (sub_p.len() + sub_m.len());
            total += if alternating && removed % 2 == 1 { -v } else { v };
        }
    }
    Ok(total)
}

/// `(KG)(η) = Σ_{ξ⁺⊆η⁺} Σ_{ξ⁻⊆η⁻} G(ξ⁺, ξ⁻)`.
pub fn k_transform(g: &dyn ConfigFunction, plus: &[Point], minus: &[Point]) -> Result<f64> {
    subset_sum(g, plus, minus, false)
}

/// `(K⁻¹F)(η) = Σ_{ξ⊆η} (-1)^{|η∖ξ|} F(ξ)`, counting both species in the
/// exponent.
pub fn k_inverse(f: &dyn ConfigFunction, plus: &[Point], minus: &[Point]) -> Result<f64> {
    subset_sum(f, plus, minus, true)
}

/// `e_λ(f; η) = Π_{x∈η⁺∪η⁻} f(x)`; one for the empty configuration.
pub fn lebesgue_exponential<F: Fn(Point) -> f64>(f: F, plus: &[Point], minus: &[Point]) -> f64 {
    plus.iter().chain(minus.iter()).map(|&x| f(x)).product()
}

/// Uniform midpoint rule on a periodic box.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureScheme {
    domain: Domain,
    nodes_per_axis: usize,
    nodes: Vec<Point>,
    weight: f64,
}

impl QuadratureScheme {
    pub fn new(domain: Domain, nodes_per_axis: usize) -> Result<Self> {
        if nodes_per_axis == 0 {
            return Err(Error::Argument("quadrature needs at least one node per axis".into()));
        }
        let k = nodes_per_axis;
        let h: Vec<f64> = domain.sides().iter().map(|l| l / k as f64).collect();
        let nodes: Vec<Point> = if domain.dim() == 1 {
            (0..k).map(|i| Point::new_1d((i as f64 + 0.5) * h[0])).collect()
        } else {
            (0..k * k)
                .map(|c| Point::new_2d(((c % k) as f64 + 0.5) * h[0], ((c / k) as f64 + 0.5) * h[1]))
                .collect()
        };
        let weight = domain.volume() / nodes.len() as f64;
        Ok(QuadratureScheme { domain, nodes_per_axis, nodes, weight })
    }

    /// Same rule with half the mesh width.
    pub fn refined(&self) -> Self {
        QuadratureScheme::new(self.domain, 2 * self.nodes_per_axis).expect("valid refinement")
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    /// `Σ_i w_i f(x_i)`.
    pub fn integrate<F: Fn(Point) -> f64>(&self, f: F) -> f64 {
        self.weight * self.nodes.iter().map(|&x| f(x)).sum::<f64>()
    }

    /// Sum of `visit(tuple)` over every `len`-tuple of nodes.
    fn for_each_tuple<V: FnMut(&[Point])>(&self, len: usize, mut visit: V) {
        let k = self.nodes.len();
        let mut idx = alloc::vec![0usize; len];
        let mut tuple: Vec<Point> = alloc::vec![self.nodes[0]; len];
        loop {
            visit(&tuple);
            let mut pos = 0;
            loop {
                if pos == len {
                    return;
                }
                idx[pos] += 1;
                if idx[pos] < k {
                    tuple[pos] = self.nodes[idx[pos]];
                    break;
                }
                idx[pos] = 0;
                tuple[pos] = self.nodes[0];
                pos += 1;
            }
        }
    }

    fn check_budget(&self, len: usize) -> Result<()> {
        let cost = libm::pow(self.nodes.len() as f64, len as f64);
        if cost > MAX_EVALUATIONS {
            return Err(Error::Size(format!(
                "{len}-particle product rule on {} nodes needs {cost:e} evaluations",
                self.nodes.len()
            )));
        }
        Ok(())
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Truncated Lebesgue-Poisson integral
/// `Σ_{n,m≤n_max} (1/n!)(1/m!) ∫∫ G({x₁..x_n},{y₁..y_m})` under the
/// product midpoint rule.
pub fn lp_integral(g: &dyn ConfigFunction, scheme: &QuadratureScheme, n_max: usize) -> Result<f64> {
    let cap = g.size_cap();
    if n_max > cap {
        return Err(Error::Argument(format!(
            "n_max {n_max} exceeds the function's size cap {cap}"
        )));
    }
    if let Some(pf) = g.product_form() {
        let sp = scheme.integrate(pf.plus);
        let sm = scheme.integrate(pf.minus);
        let mut total = 0.0;
        for n in 0..=n_max {
            for m in 0..=n_max.min(cap - n) {
                total += libm::pow(sp, n as f64) * libm::pow(sm, m as f64) / (factorial(n) * factorial(m));
            }
        }
        return Ok(total);
    }
    let mut total = 0.0;
    for n in 0..=n_max {
        for m in 0..=n_max.min(cap - n) {
            let len = n + m;
            if len > 0 {
                scheme.check_budget(len)?;
            }
            let mut s = 0.0;
            scheme.for_each_tuple(len, |t| s += g.eval(&t[..n], &t[n..]));
            total += s * libm::pow(scheme.weight(), len as f64) / (factorial(n) * factorial(m));
        }
    }
    Ok(total)
}

/// `⟨G, k⟩ = ∫ G(η) k(η) dλ(η)`, truncated like [`lp_integral`].
pub fn pairing(
    g: &dyn ConfigFunction,
    k: &dyn ConfigFunction,
    scheme: &QuadratureScheme,
    n_max: usize,
) -> Result<f64> {
    lp_integral(&Product { left: g, right: k }, scheme, n_max)
}

/// A function of two configurations `G(ξ, η)`, symmetric within each
/// species list of each argument.
pub trait PairFunction {
    fn value(&self, xi_plus: &[Point], xi_minus: &[Point], eta_plus: &[Point], eta_minus: &[Point]) -> f64;

    /// Vanishes when `|ξ| + |η|` exceeds this.
    fn size_cap(&self) -> usize;
}

/// Both sides of `∫∫ G(ξ,η) dλ(ξ)dλ(η) = ∫ Σ_{ξ⊆η} G(ξ, η∖ξ) dλ(η)`,
/// each computed independently under the same product rule.
pub fn ibp_sides(g: &dyn PairFunction, scheme: &QuadratureScheme) -> Result<(f64, f64)> {
    let cap = g.size_cap();
    if cap > SUBSET_CAP {
        return Err(Error::Size(format!("size cap {cap} exceeds {SUBSET_CAP}")));
    }
    scheme.check_budget(cap)?;
    let w = scheme.weight();

    // left: four independent particle counts
    let mut lhs = 0.0;
    for a in 0..=cap {
        for b in 0..=cap - a {
            for c in 0..=cap - a - b {
                for d in 0..=cap - a - b - c {
                    let len = a + b + c + d;
                    let mut s = 0.0;
                    scheme.for_each_tuple(len, |t| {
                        s += g.value(&t[..a], &t[a..a + b], &t[a + b..a + b + c], &t[a + b + c..]);
                    });
                    lhs += s * libm::pow(w, len as f64)
                        / (factorial(a) * factorial(b) * factorial(c) * factorial(d));
                }
            }
        }
    }

    // right: one configuration, split over its subset lattice
    let split = FiniteFunction::new(cap, |plus: &[Point], minus: &[Point]| {
        let (np, nm) = (plus.len(), minus.len());
        let mut s = 0.0;
        let mut parts: [Vec<Point>; 4] = Default::default();
        for mask_p in 0u32..(1 << np) {
            for mask_m in 0u32..(1 << nm) {
                for p in parts.iter_mut() {
                    p.clear();
                }
                for (i, &x) in plus.iter().enumerate() {
                    parts[if mask_p >> i & 1 == 1 { 0 } else { 2 }].push(x);
                }
                for (i, &x) in minus.iter().enumerate() {
                    parts[if mask_m >> i & 1 == 1 { 1 } else { 3 }].push(x);
                }
                s += g.value(&parts[0], &parts[1], &parts[2], &parts[3]);
            }
        }
        s
    });
    let rhs = lp_integral(&split, scheme, cap)?;
    Ok((lhs, rhs))
}

/// Sampled Ruelle norm: a lower bound for the weighted essential supremum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RuelleNormBound {
    pub lower_bound: f64,
    pub samples: usize,
}

/// `max_η |k(η)| e^{-α⁺|η⁺|} e^{-α⁻|η⁻|}` over `sample` (weight ρ ≡ 1).
pub fn ruelle_norm(
    k: &dyn ConfigFunction,
    alpha: (f64, f64),
    sample: &[TwoTypeConfiguration],
) -> Result<RuelleNormBound> {
    if sample.is_empty() {
        return Err(Error::Argument("Ruelle norm needs a nonempty sample".into()));
    }
    let lower_bound = sample
        .iter()
        .map(|eta| {
            libm::fabs(k.eval(&eta.plus, &eta.minus))
                * libm::exp(-alpha.0 * eta.plus.len() as f64 - alpha.1 * eta.minus.len() as f64)
        })
        .fold(0.0, f64::max);
    Ok(RuelleNormBound { lower_bound, samples: sample.len() })
}
