//! Potts, random-cluster, and joint (coloring, edge-subset) measures.
//!
//! Weights are handled in log space and exponentiated only inside
//! normalized ratios, so large couplings do not overflow.

use crate::error::{Error, Result};
use crate::graph::{connected_components, Graph};
use crate::scalar::{KahanSum, Real};

/// Coloring of the vertices with colors `1..=q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PottsConfig {
    colors: Vec<u8>,
}

impl PottsConfig {
    pub fn new(colors: Vec<u8>, q: u32) -> Result<Self> {
        for (v, &c) in colors.iter().enumerate() {
            if c == 0 || u32::from(c) > q {
                return Err(Error::InvalidInput(format!(
                    "color {c} at vertex {v} outside 1..={q}"
                )));
            }
        }
        Ok(Self { colors })
    }

    pub fn constant(n_vertices: usize, color: u8) -> Self {
        Self {
            colors: vec![color; n_vertices],
        }
    }

    /// Decode a state index: base-q digits with vertex 0 least
    /// significant, digit d meaning color d+1.
    pub fn from_index(index: u64, n_vertices: usize, q: u32) -> Self {
        let mut rest = index;
        let q = u64::from(q);
        let colors = (0..n_vertices)
            .map(|_| {
                let c = (rest % q) as u8 + 1;
                rest /= q;
                c
            })
            .collect();
        Self { colors }
    }

    /// Inverse of [`PottsConfig::from_index`].
    pub fn to_index(&self, q: u32) -> u64 {
        let q = u64::from(q);
        let mut idx = 0u64;
        for &c in self.colors.iter().rev() {
            idx = idx * q + u64::from(c - 1);
        }
        idx
    }

    pub fn n_vertices(&self) -> usize {
        self.colors.len()
    }

    pub fn color(&self, v: usize) -> u8 {
        self.colors[v]
    }

    pub fn set_color(&mut self, v: usize, color: u8) {
        self.colors[v] = color;
    }

    /// Copy with the color at `v` replaced.
    pub fn with_color(&self, v: usize, color: u8) -> Self {
        let mut out = self.clone();
        out.colors[v] = color;
        out
    }

    /// Global cyclic color shift by `l` (all colors move together).
    pub fn shifted(&self, l: u32, q: u32) -> Self {
        let colors = self
            .colors
            .iter()
            .map(|&c| ((u32::from(c) - 1 + l) % q) as u8 + 1)
            .collect();
        Self { colors }
    }

    pub fn colors(&self) -> &[u8] {
        &self.colors
    }
}

/// Subset of edge indices with bitset semantics; the width is the number
/// of edges of the underlying graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RcState {
    n_edges: usize,
    blocks: Vec<u64>,
}

impl RcState {
    pub fn empty(n_edges: usize) -> Self {
        Self {
            n_edges,
            blocks: vec![0; n_edges.div_ceil(64).max(1)],
        }
    }

    pub fn full(n_edges: usize) -> Self {
        let mut s = Self::empty(n_edges);
        for e in 0..n_edges {
            s.insert(e);
        }
        s
    }

    /// Decode an edge-bitmask state index (edge 0 is the least
    /// significant bit). Defined for at most 63 edges.
    pub fn from_index(index: u64, n_edges: usize) -> Result<Self> {
        if n_edges > 63 {
            return Err(Error::InvalidInput(
                "bitmask index defined only for <= 63 edges".into(),
            ));
        }
        if index >= (1u64 << n_edges) {
            return Err(Error::InvalidInput(format!(
                "state index {index} out of range for {n_edges} edges"
            )));
        }
        let mut s = Self::empty(n_edges);
        s.blocks[0] = index;
        Ok(s)
    }

    /// Edge-bitmask state index; `None` when the width exceeds 63 edges.
    pub fn to_index(&self) -> Option<u64> {
        if self.n_edges > 63 {
            return None;
        }
        Some(self.blocks[0])
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn contains(&self, e: usize) -> bool {
        debug_assert!(e < self.n_edges);
        self.blocks[e / 64] >> (e % 64) & 1 == 1
    }

    pub fn insert(&mut self, e: usize) {
        debug_assert!(e < self.n_edges);
        self.blocks[e / 64] |= 1 << (e % 64);
    }

    pub fn remove(&mut self, e: usize) {
        debug_assert!(e < self.n_edges);
        self.blocks[e / 64] &= !(1 << (e % 64));
    }

    /// Number of occupied edges.
    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_subset_of(&self, other: &RcState) -> bool {
        debug_assert_eq!(self.n_edges, other.n_edges);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .all(|(a, b)| a & !b == 0)
    }

    /// Occupied edge indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_edges).filter(move |&e| self.contains(e))
    }
}

/// Coupling parameters: color count `q >= 2`, inverse temperature
/// `beta >= 0`, and the derived bond probability `p = 1 - exp(-beta)`.
/// The optional dual pair `(beta*, p*)` solves
/// `p*/(1-p*) = q(1-p)/p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<F> {
    q: u32,
    beta: F,
    p: F,
    dual: Option<DualPair<F>>,
}

/// Dual coupling values attached to [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualPair<F> {
    pub beta: F,
    pub p: F,
}

impl<F: Real> ModelParams<F> {
    pub fn new(q: u32, beta: F) -> Result<Self> {
        if q < 2 {
            return Err(Error::ParamOutOfRange(format!("q = {q}, need q >= 2")));
        }
        if beta < F::zero() || !beta.is_finite() || beta.is_nan() {
            return Err(Error::ParamOutOfRange(format!("beta = {beta}, need beta >= 0")));
        }
        let p = F::one() - (-beta).exp();
        Ok(Self {
            q,
            beta,
            p,
            dual: None,
        })
    }

    /// Construct from the bond probability; `beta = -ln(1-p)`.
    pub fn from_p(q: u32, p: F) -> Result<Self> {
        if !(p >= F::zero() && p < F::one()) {
            return Err(Error::ParamOutOfRange(format!("p = {p}, need p in [0,1)")));
        }
        let beta = -(F::one() - p).ln();
        let mut params = Self::new(q, beta)?;
        // Store the exact p requested, not the roundtripped value.
        params.p = p;
        Ok(params)
    }

    /// Attach the dual coupling `p* = q(1-p) / (q(1-p) + p)`.
    /// Requires `p` strictly inside `(0,1)`.
    pub fn with_dual(mut self) -> Result<Self> {
        if !(self.p > F::zero() && self.p < F::one()) {
            return Err(Error::ParamOutOfRange(format!(
                "dual parameter undefined at p = {} (need p in (0,1))",
                self.p
            )));
        }
        let q = F::of(f64::from(self.q));
        let p = self.p;
        let p_star = q * (F::one() - p) / (q * (F::one() - p) + p);
        let beta_star = -(F::one() - p_star).ln();
        self.dual = Some(DualPair {
            beta: beta_star,
            p: p_star,
        });
        Ok(self)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn beta(&self) -> F {
        self.beta
    }

    pub fn p(&self) -> F {
        self.p
    }

    pub fn dual(&self) -> Option<&DualPair<F>> {
        self.dual.as_ref()
    }

    /// Parameters for the dual graph: same `q`, couplings swapped for the
    /// dual pair. Errors when no dual pair is attached.
    pub fn dual_params(&self) -> Result<Self> {
        let pair = self.dual.as_ref().ok_or_else(|| {
            Error::ParamOutOfRange("parameters carry no dual pair; call with_dual()".into())
        })?;
        Ok(Self {
            q: self.q,
            beta: pair.beta,
            p: pair.p,
            dual: Some(DualPair {
                beta: self.beta,
                p: self.p,
            }),
        })
    }
}

/// Self-dual bond probability `sqrt(q) / (1 + sqrt(q))`.
pub fn self_dual_p<F: Real>(q: u32) -> F {
    let sq = F::of(f64::from(q)).sqrt();
    sq / (F::one() + sq)
}

/// Critical inverse temperature `ln(1 + sqrt(q))` of the square-lattice
/// model; corresponds to the self-dual bond probability.
pub fn critical_beta<F: Real>(q: u32) -> F {
    (F::one() + F::of(f64::from(q)).sqrt()).ln()
}

/// Edges whose endpoints share a color. Loops are always included.
pub fn mono_edges(g: &Graph, sigma: &PottsConfig) -> RcState {
    let mut out = RcState::empty(g.n_edges());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if sigma.color(u) == sigma.color(v) {
            out.insert(e);
        }
    }
    out
}

/// Number of monochromatic edges (the energy observable).
pub fn mono_edge_count(g: &Graph, sigma: &PottsConfig) -> usize {
    g.edges()
        .iter()
        .filter(|&&(u, v)| sigma.color(u) == sigma.color(v))
        .count()
}

/// Log of the unnormalized coloring weight `exp(beta * #mono edges)`.
pub fn log_potts_weight<F: Real>(g: &Graph, params: &ModelParams<F>, sigma: &PottsConfig) -> F {
    params.beta() * F::of_usize(mono_edge_count(g, sigma))
}

/// Unnormalized coloring weight.
pub fn potts_weight<F: Real>(g: &Graph, params: &ModelParams<F>, sigma: &PottsConfig) -> F {
    log_potts_weight(g, params, sigma).exp()
}

fn require_open_unit_p<F: Real>(params: &ModelParams<F>) -> Result<()> {
    if params.p() > F::zero() && params.p() < F::one() {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange(format!(
            "p = {} outside (0,1)",
            params.p()
        )))
    }
}

/// Log of the unnormalized edge-subset weight
/// `(p/(1-p))^|A| * q^C(A)`.
pub fn log_rc_weight<F: Real>(g: &Graph, params: &ModelParams<F>, a: &RcState) -> Result<F> {
    require_open_unit_p(params)?;
    let p = params.p();
    let odds = p.ln() - (F::one() - p).ln();
    let comps = connected_components(g, a).count();
    Ok(F::of_usize(a.count()) * odds + F::of_usize(comps) * F::of(f64::from(params.q())).ln())
}

/// Unnormalized edge-subset weight.
pub fn rc_weight<F: Real>(g: &Graph, params: &ModelParams<F>, a: &RcState) -> Result<F> {
    Ok(log_rc_weight(g, params, a)?.exp())
}

/// Log of the unnormalized joint weight
/// `(p/(1-p))^|A| * 1(A subset of E(sigma))`; negative infinity when the
/// indicator vanishes.
pub fn log_joint_weight<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    sigma: &PottsConfig,
    a: &RcState,
) -> Result<F> {
    require_open_unit_p(params)?;
    if !a.is_subset_of(&mono_edges(g, sigma)) {
        return Ok(F::neg_infinity());
    }
    let p = params.p();
    Ok(F::of_usize(a.count()) * (p.ln() - (F::one() - p).ln()))
}

/// Unnormalized joint weight; zero when `A` is not contained in the
/// monochromatic edge set of `sigma`.
pub fn joint_weight<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    sigma: &PottsConfig,
    a: &RcState,
) -> Result<F> {
    Ok(log_joint_weight(g, params, sigma, a)?.exp())
}

/// Which state space a distribution is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSpace {
    Potts,
    RandomCluster,
}

/// Default cap on enumerated state spaces.
pub const DEFAULT_ENUMERATION_CAP: usize = 1 << 20;

/// `q^n`, saturating at `u128::MAX` (big lattices only ever compare the
/// size against a cap).
pub fn spin_space_size(n_vertices: usize, q: u32) -> u128 {
    u32::try_from(n_vertices)
        .ok()
        .and_then(|n| u128::from(q).checked_pow(n))
        .unwrap_or(u128::MAX)
}

/// `2^m`, saturating at `u128::MAX`.
pub fn rc_space_size(n_edges: usize) -> u128 {
    if n_edges >= 128 {
        u128::MAX
    } else {
        1u128 << n_edges
    }
}

pub(crate) fn checked_dim(size: u128, cap: usize) -> Result<usize> {
    if size > cap as u128 {
        Err(Error::CapExceeded { size, cap })
    } else {
        Ok(size as usize)
    }
}

fn log_weights<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    space: StateSpace,
    cap: usize,
) -> Result<Vec<F>> {
    match space {
        StateSpace::Potts => {
            let dim = checked_dim(spin_space_size(g.n_vertices(), params.q()), cap)?;
            Ok((0..dim)
                .map(|i| {
                    let sigma = PottsConfig::from_index(i as u64, g.n_vertices(), params.q());
                    log_potts_weight(g, params, &sigma)
                })
                .collect())
        }
        StateSpace::RandomCluster => {
            require_open_unit_p(params)?;
            let dim = checked_dim(rc_space_size(g.n_edges()), cap)?;
            (0..dim)
                .map(|i| {
                    let a = RcState::from_index(i as u64, g.n_edges())?;
                    log_rc_weight(g, params, &a)
                })
                .collect()
        }
    }
}

/// Normalize log weights into a probability vector (log-sum-exp).
pub(crate) fn normalize_log_weights<F: Real>(log_w: &[F]) -> Vec<F> {
    let max = log_w
        .iter()
        .copied()
        .fold(F::neg_infinity(), |a, b| a.max(b));
    let mut total = KahanSum::new();
    let unnorm: Vec<F> = log_w
        .iter()
        .map(|&lw| {
            let w = (lw - max).exp();
            total.add(w);
            w
        })
        .collect();
    let z = total.value();
    unnorm.into_iter().map(|w| w / z).collect()
}

/// Exact normalized distribution over the enumerated state space, indexed
/// by the canonical state index (base-q colorings / edge bitmasks).
pub fn exact_distribution<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    space: StateSpace,
) -> Result<Vec<F>> {
    exact_distribution_capped(g, params, space, DEFAULT_ENUMERATION_CAP)
}

/// [`exact_distribution`] with an explicit state-space cap.
pub fn exact_distribution_capped<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    space: StateSpace,
    cap: usize,
) -> Result<Vec<F>> {
    Ok(normalize_log_weights(&log_weights(g, params, space, cap)?))
}

/// Log partition function of the coloring measure.
pub fn log_partition_potts<F: Real>(g: &Graph, params: &ModelParams<F>) -> Result<F> {
    log_sum_exp(&log_weights(g, params, StateSpace::Potts, DEFAULT_ENUMERATION_CAP)?)
}

/// Log partition function of the edge-subset measure. Equals the coloring
/// one when `p = 1 - exp(-beta)`.
pub fn log_partition_rc<F: Real>(g: &Graph, params: &ModelParams<F>) -> Result<F> {
    log_sum_exp(&log_weights(
        g,
        params,
        StateSpace::RandomCluster,
        DEFAULT_ENUMERATION_CAP,
    )?)
}

fn log_sum_exp<F: Real>(log_w: &[F]) -> Result<F> {
    let max = log_w
        .iter()
        .copied()
        .fold(F::neg_infinity(), |a, b| a.max(b));
    if !max.is_finite() {
        return Err(Error::Numerical("empty or degenerate weight vector".into()));
    }
    let mut acc = KahanSum::new();
    for &lw in log_w {
        acc.add((lw - max).exp());
    }
    Ok(max + acc.value().ln())
}

/// Exact coloring distribution conditioned on vertex `v` carrying color
/// `k`, over the full spin index space (zero off the slice).
pub fn restricted_potts_distribution<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    v: usize,
    k: u8,
) -> Result<Vec<F>> {
    if v >= g.n_vertices() {
        return Err(Error::InvalidInput(format!("pinned vertex {v} out of range")));
    }
    if k == 0 || u32::from(k) > params.q() {
        return Err(Error::InvalidInput(format!("pinned color {k} out of range")));
    }
    let full = exact_distribution(g, params, StateSpace::Potts)?;
    let mut mass = KahanSum::new();
    let kept: Vec<Option<F>> = (0..full.len())
        .map(|i| {
            let sigma = PottsConfig::from_index(i as u64, g.n_vertices(), params.q());
            if sigma.color(v) == k {
                mass.add(full[i]);
                Some(full[i])
            } else {
                None
            }
        })
        .collect();
    let z = mass.value();
    Ok(kept
        .into_iter()
        .map(|w| w.map_or(F::zero(), |w| w / z))
        .collect())
}
