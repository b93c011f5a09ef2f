//! Single-step samplers: heat-bath, Swendsen-Wang on colorings and on
//! edge subsets, the dual-graph modified Swendsen-Wang, and the pinned
//! single-site chain.
//!
//! Every step consumes randomness in a documented order from an
//! [`RngStream`], so trajectories are reproducible bit for bit from the
//! seed.

mod rng;

pub use rng::RngStream;

use crate::error::{Error, Result};
use crate::graph::{connected_components, dual_rc_state, primal_rc_state, DualMap, Graph};
use crate::model::{ModelParams, PottsConfig, RcState};
use crate::scalar::Real;

/// Pinned vertex and color defining the slice `{sigma : sigma(v) = k}`
/// the restricted chain moves on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RestrictedContext {
    pub vertex: usize,
    pub color: u8,
}

impl RestrictedContext {
    pub fn new(vertex: usize, color: u8) -> Self {
        Self { vertex, color }
    }

    pub fn validate<F: Real>(&self, g: &Graph, params: &ModelParams<F>) -> Result<()> {
        if self.vertex >= g.n_vertices() {
            return Err(Error::InvalidInput(format!(
                "pinned vertex {} out of range",
                self.vertex
            )));
        }
        if self.color == 0 || u32::from(self.color) > params.q() {
            return Err(Error::InvalidInput(format!(
                "pinned color {} outside 1..={}",
                self.color,
                params.q()
            )));
        }
        Ok(())
    }
}

/// Per-color counts of non-loop edges from `v` into each color class.
/// Loops at `v` weigh every candidate color equally, so they cancel from
/// the conditional and are skipped.
pub(crate) fn neighbor_color_counts(g: &Graph, sigma: &PottsConfig, v: usize, q: u32) -> Vec<u32> {
    let mut counts = vec![0u32; q as usize];
    for &e in g.incident_edges(v) {
        let (a, b) = g.endpoints(e);
        if a == b {
            continue;
        }
        let other = if a == v { b } else { a };
        counts[usize::from(sigma.color(other)) - 1] += 1;
    }
    counts
}

/// Sample a color from weights proportional to `exp(beta * counts[k])`.
fn sample_conditional_color<F: Real>(
    params: &ModelParams<F>,
    counts: &[u32],
    rng: &mut RngStream,
) -> u8 {
    let beta = params.beta();
    let max = counts.iter().copied().max().unwrap_or(0);
    let weights: Vec<F> = counts
        .iter()
        .map(|&c| (beta * (F::of(f64::from(c)) - F::of(f64::from(max)))).exp())
        .collect();
    let total = weights.iter().copied().fold(F::zero(), |a, b| a + b);
    let target = rng.next_unit::<F>() * total;
    let mut acc = F::zero();
    for (i, &w) in weights.iter().enumerate() {
        acc = acc + w;
        if target < acc {
            return (i + 1) as u8;
        }
    }
    weights.len() as u8
}

/// One heat-bath step: pick a uniform vertex and resample its color from
/// the single-site conditional distribution.
///
/// Randomness order: vertex draw, then one uniform for the color.
pub fn heat_bath_step<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    sigma: &PottsConfig,
    rng: &mut RngStream,
) -> PottsConfig {
    let v = rng.next_usize_below(g.n_vertices());
    let counts = neighbor_color_counts(g, sigma, v, params.q());
    let color = sample_conditional_color(params, &counts, rng);
    sigma.with_color(v, color)
}

/// Bond step: keep each monochromatic edge independently with
/// probability `p`. One uniform is drawn per monochromatic edge, in edge
/// index order.
pub fn sw_bond_step<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    sigma: &PottsConfig,
    rng: &mut RngStream,
) -> RcState {
    let p = params.p();
    let mut a = RcState::empty(g.n_edges());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if sigma.color(u) == sigma.color(v) && rng.next_unit::<F>() < p {
            a.insert(e);
        }
    }
    a
}

/// Color step: assign an independent uniform color to every connected
/// component of `(V, A)`. One color is drawn per component, in component
/// label order (labels ordered by smallest contained vertex).
pub fn sw_color_step<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    a: &RcState,
    rng: &mut RngStream,
) -> PottsConfig {
    let labeling = connected_components(g, a);
    let colors: Vec<u8> = (0..labeling.count())
        .map(|_| rng.next_below(u64::from(params.q())) as u8 + 1)
        .collect();
    let assigned = (0..g.n_vertices())
        .map(|v| colors[labeling.label(v)])
        .collect();
    PottsConfig::new(assigned, params.q()).expect("component colors are in range")
}

/// One Swendsen-Wang step on colorings: bond step then color step.
pub fn sw_step<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    sigma: &PottsConfig,
    rng: &mut RngStream,
) -> PottsConfig {
    let a = sw_bond_step(g, params, sigma, rng);
    sw_color_step(g, params, &a, rng)
}

/// One Swendsen-Wang step on edge subsets: color step then bond step.
pub fn sw_rc_step<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    a: &RcState,
    rng: &mut RngStream,
) -> RcState {
    let sigma = sw_color_step(g, params, a, rng);
    sw_bond_step(g, params, &sigma, rng)
}

/// One modified Swendsen-Wang step on a planar graph with its dual:
///
/// 1. bond step on the primal graph at `p`, giving `A`;
/// 2. one edge-subset Swendsen-Wang step on the dual graph at the dual
///    coupling `p*`, started from the dual configuration of `A`;
/// 3. color step on the primal graph from the primal configuration of the
///    result.
///
/// Requires `p` strictly inside `(0,1)` (the dual coupling degenerates at
/// the endpoints), with the dual pair attached via
/// [`ModelParams::with_dual`].
pub fn modified_sw_step<F: Real>(
    dmap: &DualMap,
    params: &ModelParams<F>,
    sigma: &PottsConfig,
    rng: &mut RngStream,
) -> Result<PottsConfig> {
    let dual_params = params.dual_params()?;
    let a = sw_bond_step(dmap.primal(), params, sigma, rng);
    let a_dual = dual_rc_state(&a, dmap);
    let b_dual = sw_rc_step(dmap.dual(), &dual_params, &a_dual, rng);
    let b = primal_rc_state(&b_dual, dmap);
    Ok(sw_color_step(dmap.primal(), params, &b, rng))
}

/// One step of the single-site chain restricted to the slice
/// `sigma(v) = k`: propose a uniform vertex `u != v` and a uniform
/// replacement color, accept with probability
/// `min(1, (q-1) / (1 + pi(sigma)/pi(tau)))`.
///
/// For `q = 2` the single proposed color makes the off-diagonal
/// transition probability exactly `(1/(N-1)) / (1 + pi(sigma)/pi(tau))`;
/// for `q > 2` the `(q-1)` factor compensates the `1/(q-1)` color
/// proposal so unclamped entries keep that value.
pub fn restricted_hb_step<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    ctx: &RestrictedContext,
    sigma: &PottsConfig,
    rng: &mut RngStream,
) -> Result<PottsConfig> {
    ctx.validate(g, params)?;
    if sigma.color(ctx.vertex) != ctx.color {
        return Err(Error::InvalidInput(format!(
            "configuration has color {} at the pinned vertex, expected {}",
            sigma.color(ctx.vertex),
            ctx.color
        )));
    }
    let n = g.n_vertices();
    if n < 2 {
        return Err(Error::InvalidInput(
            "restricted chain needs >= 2 vertices".into(),
        ));
    }
    let q = params.q();

    // Vertex u uniform on V \ {v}.
    let mut u = rng.next_usize_below(n - 1);
    if u >= ctx.vertex {
        u += 1;
    }
    // Proposed color uniform on [q] \ {sigma(u)}.
    let cur = sigma.color(u);
    let draw = rng.next_below(u64::from(q) - 1) as u8 + 1;
    let proposed = if draw >= cur { draw + 1 } else { draw };

    // Local energy change: only edges incident to u matter.
    let mut delta = 0i64;
    for &e in g.incident_edges(u) {
        let (a, b) = g.endpoints(e);
        if a == b {
            continue; // loops stay monochromatic under any recolor
        }
        let other = if a == u { b } else { a };
        let oc = sigma.color(other);
        delta += i64::from(oc == proposed) - i64::from(oc == cur);
    }

    // Acceptance min(1, (q-1) * logistic(beta * delta)) with
    // logistic(x) = 1/(1+exp(-x)) = 1/(1 + pi(sigma)/pi(tau)).
    let x = params.beta() * F::of(delta as f64);
    let logistic = F::one() / (F::one() + (-x).exp());
    let accept = (F::of(f64::from(q) - 1.0) * logistic).min(F::one());
    if rng.next_unit::<F>() < accept {
        Ok(sigma.with_color(u, proposed))
    } else {
        Ok(sigma.clone())
    }
}
