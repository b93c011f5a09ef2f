//! Exact dense transition matrices for every chain.
//!
//! States follow the canonical enumeration: colorings as base-q integers
//! with vertex 0 least significant, edge subsets as edge bitmasks. The
//! coloring chains act on the spin space, the edge-subset chain on the
//! bitmask space, and the pinned chain on the slice where one vertex has
//! a fixed color.

use crate::dynamics::{neighbor_color_counts, RestrictedContext};
use crate::error::{Error, Result};
use crate::exact::matrix::{ChainKind, ChainMatrix, DenseMatrix};
use crate::graph::{connected_components, DualMap, Graph};
use crate::model::{
    checked_dim, exact_distribution_capped, mono_edge_count, mono_edges, rc_space_size,
    spin_space_size, ModelParams, PottsConfig, RcState, StateSpace,
};
use crate::scalar::{KahanSum, Real};

/// Default cap on enumerated states per matrix factor.
pub const DEFAULT_FACTOR_CAP: usize = 4096;

fn spin_dim(g: &Graph, q: u32, cap: usize) -> Result<usize> {
    checked_dim(spin_space_size(g.n_vertices(), q), cap)
}

fn rc_dim(g: &Graph, cap: usize) -> Result<usize> {
    checked_dim(rc_space_size(g.n_edges()), cap)
}

/// Single-site heat-bath chain: pick a uniform vertex, resample its color
/// from the single-site conditional. Entries with the same target
/// coloring (including the no-move case) accumulate.
pub fn build_hb_matrix<F: Real>(g: &Graph, params: &ModelParams<F>) -> Result<ChainMatrix<F>> {
    build_hb_matrix_capped(g, params, DEFAULT_FACTOR_CAP)
}

pub fn build_hb_matrix_capped<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    cap: usize,
) -> Result<ChainMatrix<F>> {
    let n = g.n_vertices();
    let q = params.q();
    let dim = spin_dim(g, q, cap)?;
    let pi = exact_distribution_capped(g, params, StateSpace::Potts, cap)?;
    let inv_n = F::one() / F::of_usize(n);
    let mut m = DenseMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let sigma = PottsConfig::from_index(idx as u64, n, q);
        for v in 0..n {
            let counts = neighbor_color_counts(g, &sigma, v, q);
            let max = counts.iter().copied().max().unwrap_or(0);
            let weights: Vec<F> = counts
                .iter()
                .map(|&c| (params.beta() * F::of(f64::from(c) - f64::from(max))).exp())
                .collect();
            let total = weights.iter().copied().fold(F::zero(), |a, b| a + b);
            for (k0, &w) in weights.iter().enumerate() {
                let target = sigma.with_color(v, k0 as u8 + 1).to_index(q) as usize;
                *m.at_mut(idx, target) = m.at(idx, target) + inv_n * w / total;
            }
        }
    }
    ChainMatrix::new(ChainKind::HeatBath, m, pi)
}

/// Bond factor: row `sigma`, column `A`, entry
/// `p^|A| (1-p)^(|E(sigma)|-|A|)` for `A` inside the monochromatic edge
/// set, else zero. Rows sum to one.
pub fn build_t_matrix<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    cap: usize,
) -> Result<DenseMatrix<F>> {
    let sdim = spin_dim(g, params.q(), cap)?;
    let rdim = rc_dim(g, cap)?;
    let p = params.p();
    let one_minus_p = F::one() - p;
    let mut t = DenseMatrix::zeros(sdim, rdim);
    for idx in 0..sdim {
        let sigma = PottsConfig::from_index(idx as u64, g.n_vertices(), params.q());
        let mask = mono_edges(g, &sigma)
            .to_index()
            .expect("factor cap keeps edge count small") as usize;
        let mono = mask.count_ones() as i32;
        // Enumerate the subsets of the monochromatic mask directly.
        let mut sub = mask;
        loop {
            let occupied = sub.count_ones() as i32;
            *t.at_mut(idx, sub) = p.powi(occupied) * one_minus_p.powi(mono - occupied);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
    }
    Ok(t)
}

/// Color factor: row `A`, column `sigma`, entry `q^-C(A)` for colorings
/// constant on every component of `A`, else zero. Rows sum to one.
pub fn build_tstar_matrix<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    cap: usize,
) -> Result<DenseMatrix<F>> {
    let sdim = spin_dim(g, params.q(), cap)?;
    let rdim = rc_dim(g, cap)?;
    let q = params.q();
    let n = g.n_vertices();
    let pow_q: Vec<u64> = (0..n)
        .scan(1u64, |acc, _| {
            let cur = *acc;
            *acc *= u64::from(q);
            Some(cur)
        })
        .collect();
    let mut t = DenseMatrix::zeros(rdim, sdim);
    for a_idx in 0..rdim {
        let a = RcState::from_index(a_idx as u64, g.n_edges())?;
        let labeling = connected_components(g, &a);
        let comps = labeling.count();
        let weight = (F::one() / F::of(f64::from(q))).powi(comps as i32);
        let mut colorings = 1u64;
        for _ in 0..comps {
            colorings *= u64::from(q);
        }
        for cidx in 0..colorings {
            // Decode one color per component, then read off the coloring index.
            let mut rest = cidx;
            let comp_color: Vec<u64> = (0..comps)
                .map(|_| {
                    let c = rest % u64::from(q);
                    rest /= u64::from(q);
                    c
                })
                .collect();
            let sigma_idx: u64 = (0..n)
                .map(|v| comp_color[labeling.label(v)] * pow_q[v])
                .sum();
            *t.at_mut(a_idx, sigma_idx as usize) = weight;
        }
    }
    Ok(t)
}

/// Swendsen-Wang chain on colorings: product of the bond and color
/// factors.
pub fn build_sw_matrix<F: Real>(g: &Graph, params: &ModelParams<F>) -> Result<ChainMatrix<F>> {
    build_sw_matrix_capped(g, params, DEFAULT_FACTOR_CAP)
}

pub fn build_sw_matrix_capped<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    cap: usize,
) -> Result<ChainMatrix<F>> {
    let t = build_t_matrix(g, params, cap)?;
    let tstar = build_tstar_matrix(g, params, cap)?;
    let pi = exact_distribution_capped(g, params, StateSpace::Potts, cap)?;
    ChainMatrix::new(ChainKind::Sw, t.matmul(&tstar), pi)
}

/// Swendsen-Wang chain on edge subsets: color factor then bond factor.
pub fn build_sw_rc_matrix<F: Real>(g: &Graph, params: &ModelParams<F>) -> Result<ChainMatrix<F>> {
    build_sw_rc_matrix_capped(g, params, DEFAULT_FACTOR_CAP)
}

pub fn build_sw_rc_matrix_capped<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    cap: usize,
) -> Result<ChainMatrix<F>> {
    let t = build_t_matrix(g, params, cap)?;
    let tstar = build_tstar_matrix(g, params, cap)?;
    let mu = exact_distribution_capped(g, params, StateSpace::RandomCluster, cap)?;
    ChainMatrix::new(ChainKind::SwRc, tstar.matmul(&t), mu)
}

/// Comparison composite: heat-bath, Swendsen-Wang, heat-bath.
pub fn build_q_matrix<F: Real>(g: &Graph, params: &ModelParams<F>) -> Result<ChainMatrix<F>> {
    build_q_matrix_capped(g, params, DEFAULT_FACTOR_CAP)
}

pub fn build_q_matrix_capped<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    cap: usize,
) -> Result<ChainMatrix<F>> {
    let hb = build_hb_matrix_capped(g, params, cap)?;
    let sw = build_sw_matrix_capped(g, params, cap)?;
    let hb_sw = hb.matrix().matmul(sw.matrix());
    ChainMatrix::new(
        ChainKind::Composite,
        hb_sw.matmul(hb.matrix()),
        hb.stationary().to_vec(),
    )
}

/// Index tables of the dual-complement permutation on edge bitmasks:
/// `to_dual[a]` is the dual configuration of primal subset `a`, and
/// `to_primal` its inverse. Composing the two is the identity.
pub fn dual_complement_tables(dmap: &DualMap, cap: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let m = dmap.primal().n_edges();
    let rdim = rc_dim(dmap.primal(), cap)?;
    let mut to_dual = vec![0usize; rdim];
    let mut to_primal = vec![0usize; rdim];
    for a in 0..rdim {
        let mut b = 0usize;
        for e in 0..m {
            if a >> e & 1 == 0 {
                b |= 1 << dmap.dual_edge(e);
            }
        }
        to_dual[a] = b;
        to_primal[b] = a;
    }
    Ok((to_dual, to_primal))
}

/// Modified Swendsen-Wang chain: bond factor on the primal graph, dual
/// complement, one full edge-subset Swendsen-Wang step on the dual graph
/// at the dual coupling, dual complement back, color factor on the
/// primal graph.
pub fn build_modified_sw_matrix<F: Real>(
    dmap: &DualMap,
    params: &ModelParams<F>,
) -> Result<ChainMatrix<F>> {
    build_modified_sw_matrix_capped(dmap, params, DEFAULT_FACTOR_CAP)
}

pub fn build_modified_sw_matrix_capped<F: Real>(
    dmap: &DualMap,
    params: &ModelParams<F>,
    cap: usize,
) -> Result<ChainMatrix<F>> {
    let dual_params = params.dual_params()?;
    let g = dmap.primal();
    let (to_dual, to_primal) = dual_complement_tables(dmap, cap)?;

    let t_primal = build_t_matrix(g, params, cap)?;
    let tstar_dual = build_tstar_matrix(dmap.dual(), &dual_params, cap)?;
    let t_dual = build_t_matrix(dmap.dual(), &dual_params, cap)?;
    let tstar_primal = build_tstar_matrix(g, params, cap)?;

    // Right-multiplying by the permutation matrix D (one at (a, to_dual[a]))
    // reads column to_primal[j] of the left factor, and vice versa.
    let after_d = t_primal.permute_cols(&to_primal);
    let dual_step = tstar_dual.matmul(&t_dual);
    let after_dual = after_d.matmul(&dual_step);
    let after_dstar = after_dual.permute_cols(&to_dual);
    let m = after_dstar.matmul(&tstar_primal);

    let pi = exact_distribution_capped(g, params, StateSpace::Potts, cap)?;
    ChainMatrix::new(ChainKind::ModifiedSw, m, pi)
}

/// The slice of colorings with a fixed color at one vertex, in spin-index
/// order.
#[derive(Debug, Clone)]
pub struct RestrictedSpace {
    /// Global spin index of each slice state, ascending.
    pub indices: Vec<usize>,
    /// Slice position of each global spin index (usize::MAX off-slice).
    pub position: Vec<usize>,
}

impl RestrictedSpace {
    pub fn new(g: &Graph, q: u32, ctx: &RestrictedContext, cap: usize) -> Result<Self> {
        let sdim = checked_dim(spin_space_size(g.n_vertices(), q), cap)?;
        let mut indices = Vec::with_capacity(sdim / q as usize);
        let mut position = vec![usize::MAX; sdim];
        for idx in 0..sdim {
            let sigma = PottsConfig::from_index(idx as u64, g.n_vertices(), q);
            if sigma.color(ctx.vertex) == ctx.color {
                position[idx] = indices.len();
                indices.push(idx);
            }
        }
        Ok(Self { indices, position })
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }
}

/// Pinned single-site chain on the slice `sigma(v) = k`: for colorings
/// differing at exactly one vertex `u != v`, the transition probability
/// is `(1/(N-1)) / (1 + pi(sigma)/pi(tau))`; the diagonal is the
/// row-stochastic remainder.
///
/// For `q > 2` the off-diagonal sum can exceed one (the diagonal then
/// goes negative); [`stochasticity_finding`] reports that instead of
/// renormalizing. For `q = 2` the rows are always stochastic.
pub fn build_restricted_hb_matrix<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    ctx: &RestrictedContext,
) -> Result<ChainMatrix<F>> {
    build_restricted_hb_matrix_capped(g, params, ctx, DEFAULT_FACTOR_CAP)
}

pub fn build_restricted_hb_matrix_capped<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    ctx: &RestrictedContext,
    cap: usize,
) -> Result<ChainMatrix<F>> {
    ctx.validate(g, params)?;
    let n = g.n_vertices();
    if n < 2 {
        return Err(Error::InvalidInput(
            "restricted chain needs >= 2 vertices".into(),
        ));
    }
    let q = params.q();
    let space = RestrictedSpace::new(g, q, ctx, cap)?;
    let dim = space.dim();

    let pi_full = exact_distribution_capped(g, params, StateSpace::Potts, cap)?;
    let mut mass = KahanSum::new();
    for &idx in &space.indices {
        mass.add(pi_full[idx]);
    }
    let pi: Vec<F> = space.indices.iter().map(|&idx| pi_full[idx] / mass.value()).collect();

    let inv_choices = F::one() / F::of_usize(n - 1);
    let mut m = DenseMatrix::zeros(dim, dim);
    for (i, &idx) in space.indices.iter().enumerate() {
        let sigma = PottsConfig::from_index(idx as u64, n, q);
        let energy = mono_edge_count(g, &sigma);
        let mut row_sum = KahanSum::new();
        for u in 0..n {
            if u == ctx.vertex {
                continue;
            }
            for c in 1..=q as u8 {
                if c == sigma.color(u) {
                    continue;
                }
                let tau = sigma.with_color(u, c);
                let j = space.position[tau.to_index(q) as usize];
                debug_assert_ne!(j, usize::MAX);
                let delta = mono_edge_count(g, &tau) as f64 - energy as f64;
                // (1 + pi(sigma)/pi(tau))^-1 = logistic(beta * delta).
                let logistic = F::one() / (F::one() + (-params.beta() * F::of(delta)).exp());
                let entry = inv_choices * logistic;
                *m.at_mut(i, j) = m.at(i, j) + entry;
                row_sum.add(entry);
            }
        }
        *m.at_mut(i, i) = F::one() - row_sum.value();
    }
    ChainMatrix::new(ChainKind::RestrictedHb, m, pi)
}

/// Magnitude of the most negative diagonal entry, when the pinned chain's
/// off-diagonal mass exceeds one somewhere; `None` when the matrix is a
/// proper transition matrix.
pub fn stochasticity_finding<F: Real>(chain: &ChainMatrix<F>) -> Option<F> {
    let min = chain.min_entry();
    if min < -F::epsilon().sqrt() * F::of(1e-2) {
        Some(-min)
    } else {
        None
    }
}

/// Deterministic recoloring onto the slice: maps `sigma` to the global
/// shift of `sigma` whose pinned vertex carries the pinned color. One
/// entry per row; applying it from the slice is the identity.
pub fn pin_shift_matrix<F: Real>(
    g: &Graph,
    q: u32,
    ctx: &RestrictedContext,
    space: &RestrictedSpace,
) -> DenseMatrix<F> {
    let sdim = space.position.len();
    let mut f1 = DenseMatrix::zeros(sdim, space.dim());
    for idx in 0..sdim {
        let sigma = PottsConfig::from_index(idx as u64, g.n_vertices(), q);
        let l = (q + u32::from(ctx.color) - u32::from(sigma.color(ctx.vertex))) % q;
        let target = sigma.shifted(l, q).to_index(q) as usize;
        let j = space.position[target];
        debug_assert_ne!(j, usize::MAX);
        *f1.at_mut(idx, j) = F::one();
    }
    f1
}

/// Averaging over the q global color shifts of a slice coloring (the
/// adjoint of [`pin_shift_matrix`]): q entries of 1/q per row.
pub fn shift_average_matrix<F: Real>(
    g: &Graph,
    q: u32,
    space: &RestrictedSpace,
) -> DenseMatrix<F> {
    let sdim = space.position.len();
    let mut f2 = DenseMatrix::zeros(space.dim(), sdim);
    let inv_q = F::one() / F::of(f64::from(q));
    for (i, &idx) in space.indices.iter().enumerate() {
        let sigma = PottsConfig::from_index(idx as u64, g.n_vertices(), q);
        for l in 0..q {
            let target = sigma.shifted(l, q).to_index(q) as usize;
            *f2.at_mut(i, target) = inv_q;
        }
    }
    f2
}

/// Pinned composite chain: recolor onto the slice, one pinned step,
/// average the shifts out, one Swendsen-Wang step, and the same
/// three-factor block again.
pub fn build_qtilde_matrix<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    ctx: &RestrictedContext,
) -> Result<ChainMatrix<F>> {
    build_qtilde_matrix_capped(g, params, ctx, DEFAULT_FACTOR_CAP)
}

pub fn build_qtilde_matrix_capped<F: Real>(
    g: &Graph,
    params: &ModelParams<F>,
    ctx: &RestrictedContext,
    cap: usize,
) -> Result<ChainMatrix<F>> {
    let q = params.q();
    let space = RestrictedSpace::new(g, q, ctx, cap)?;
    let f1 = pin_shift_matrix::<F>(g, q, ctx, &space);
    let f2 = shift_average_matrix::<F>(g, q, &space);
    let p_pinned = build_restricted_hb_matrix_capped(g, params, ctx, cap)?;
    let p_sw = build_sw_matrix_capped(g, params, cap)?;

    let block = f1.matmul(p_pinned.matrix()).matmul(&f2);
    let qtilde = block.matmul(p_sw.matrix()).matmul(&block);
    ChainMatrix::new(
        ChainKind::PinnedComposite,
        qtilde,
        p_sw.stationary().to_vec(),
    )
}

/// Dirichlet form `(1/2) sum_{x,y} (f(x)-f(y))^2 pi(x) P(x,y)`.
pub fn dirichlet_form<F: Real>(chain: &ChainMatrix<F>, f: &[F]) -> Result<F> {
    if f.len() != chain.dim() {
        return Err(Error::InvalidInput(format!(
            "function has length {}, chain dimension is {}",
            f.len(),
            chain.dim()
        )));
    }
    let mut acc = KahanSum::new();
    for x in 0..chain.dim() {
        for y in 0..chain.dim() {
            let d = f[x] - f[y];
            acc.add(d * d * chain.stationary()[x] * chain.entry(x, y));
        }
    }
    Ok(F::of(0.5) * acc.value())
}

/// Variance of `f` under the chain's stationary distribution.
pub fn pi_variance<F: Real>(chain: &ChainMatrix<F>, f: &[F]) -> Result<F> {
    if f.len() != chain.dim() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let mut mean = KahanSum::new();
    for (x, &w) in chain.stationary().iter().enumerate() {
        mean.add(w * f[x]);
    }
    let mu = mean.value();
    let mut var = KahanSum::new();
    for (x, &w) in chain.stationary().iter().enumerate() {
        let d = f[x] - mu;
        var.add(w * d * d);
    }
    Ok(var.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::eigen::spectral_gap;
    use crate::graph::{build_dual_square_lattice, build_tree_dual};

    fn params(q: u32, beta: f64) -> ModelParams<f64> {
        ModelParams::new(q, beta).unwrap()
    }

    #[test]
    fn hb_matrix_small_cases() {
        // Single vertex: every entry 1/q.
        let g = Graph::new(1, vec![]).unwrap();
        let hb = build_hb_matrix(&g, &params(3, 1.2)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((hb.entry(i, j) - 1.0 / 3.0).abs() < 1e-15);
            }
        }

        // beta = 0: off-diagonal single-site entries are 1/(N q).
        let p3 = Graph::path(3).unwrap();
        let hb = build_hb_matrix(&p3, &params(2, 0.0)).unwrap();
        for idx in 0..8usize {
            let sigma = PottsConfig::from_index(idx as u64, 3, 2);
            for v in 0..3 {
                let flip = sigma.with_color(v, 3 - sigma.color(v));
                let j = flip.to_index(2) as usize;
                assert!((hb.entry(idx, j) - 1.0 / 6.0).abs() < 1e-15);
            }
        }

        // Single edge, q=2, beta=ln 2: flip-one-site entry from (1,1) is
        // (1/2) * (1/3).
        let k2 = Graph::path(2).unwrap();
        let hb = build_hb_matrix(&k2, &params(2, 2.0f64.ln())).unwrap();
        let from = PottsConfig::new(vec![1, 1], 2).unwrap().to_index(2) as usize;
        let to = PottsConfig::new(vec![2, 1], 2).unwrap().to_index(2) as usize;
        assert!((hb.entry(from, to) - 0.5 / 3.0).abs() < 1e-15);
        hb.validate(1e-12).unwrap();
    }

    #[test]
    fn t_factors_are_stochastic_and_adjoint() {
        let k2 = Graph::path(2).unwrap();
        let pr = params(2, 0.9);
        let cap = DEFAULT_FACTOR_CAP;
        let t = build_t_matrix(&k2, &pr, cap).unwrap();
        let tstar = build_tstar_matrix(&k2, &pr, cap).unwrap();
        for i in 0..t.rows() {
            let sum: f64 = t.row(i).iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
        }
        for i in 0..tstar.rows() {
            let sum: f64 = tstar.row(i).iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
        }
        // Adjointness: pi(sigma) T(sigma, A) = mu(A) T*(A, sigma), both
        // being the joint measure.
        let pi = exact_distribution_capped(&k2, &pr, StateSpace::Potts, cap).unwrap();
        let mu = exact_distribution_capped(&k2, &pr, StateSpace::RandomCluster, cap).unwrap();
        for s in 0..4 {
            for a in 0..2 {
                let lhs = pi[s] * t.at(s, a);
                let rhs = mu[a] * tstar.at(a, s);
                assert!((lhs - rhs).abs() < 1e-15, "sigma {s}, A {a}");
            }
        }
    }

    #[test]
    fn sw_matrix_k2_row_matches_hand_enumeration() {
        // Single edge, q=2, p=1/2, from (1,1):
        // (3/8, 1/8, 1/8, 3/8) over the four colorings.
        let k2 = Graph::path(2).unwrap();
        let pr = ModelParams::<f64>::from_p(2, 0.5).unwrap();
        let sw = build_sw_matrix(&k2, &pr).unwrap();
        let from = PottsConfig::new(vec![1, 1], 2).unwrap().to_index(2) as usize;
        let expected = [3.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0, 3.0 / 8.0];
        for (j, want) in expected.iter().enumerate() {
            assert!((sw.entry(from, j) - want).abs() < 1e-15);
        }
        sw.validate(1e-12).unwrap();
    }

    #[test]
    fn sw_matrix_beta_zero_is_uniform() {
        let g2 = Graph::square_lattice(2).unwrap();
        let sw = build_sw_matrix(&g2, &params(2, 0.0)).unwrap();
        for i in 0..sw.dim() {
            for j in 0..sw.dim() {
                assert!((sw.entry(i, j) - 1.0 / 16.0).abs() < 1e-14);
            }
        }
        let spec = spectral_gap(&sw).unwrap();
        assert!((spec.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sw_entries_are_strictly_positive() {
        // The empty bond configuration connects any pair of colorings, so
        // no entry of the coloring chain vanishes.
        for (g, q) in [
            (Graph::path(2).unwrap(), 2u32),
            (Graph::square_lattice(2).unwrap(), 2),
            (Graph::square_lattice(2).unwrap(), 3),
        ] {
            let pr = params(q, 0.8);
            let sw = build_sw_matrix(&g, &pr).unwrap();
            assert!(sw.min_entry() > 0.0);
        }
    }

    #[test]
    fn sw_rc_matrix_stationary_and_gap_match_spin_side() {
        let g2 = Graph::square_lattice(2).unwrap();
        let pr = params(2, 0.6);
        let sw = build_sw_matrix(&g2, &pr).unwrap();
        let swrc = build_sw_rc_matrix(&g2, &pr).unwrap();
        swrc.validate(1e-12).unwrap();
        let gap_spin = spectral_gap(&sw).unwrap().gap;
        let gap_rc = spectral_gap(&swrc).unwrap().gap;
        assert!((gap_spin - gap_rc).abs() < 1e-10);
    }

    #[test]
    fn dual_complement_tables_compose_to_identity() {
        let dmap = build_dual_square_lattice(2).unwrap();
        let (to_dual, to_primal) = dual_complement_tables(&dmap, 4096).unwrap();
        for a in 0..to_dual.len() {
            assert_eq!(to_primal[to_dual[a]], a);
        }
    }

    #[test]
    fn modified_sw_on_tree_has_identical_rows() {
        let tree = Graph::path(4).unwrap();
        let dmap = build_tree_dual(&tree).unwrap();
        let pr = params(2, 0.7).with_dual().unwrap();
        let m = build_modified_sw_matrix(&dmap, &pr).unwrap();
        m.validate(1e-12).unwrap();
        for i in 1..m.dim() {
            for j in 0..m.dim() {
                assert!((m.entry(i, j) - m.entry(0, j)).abs() < 1e-13);
            }
        }
        // Rows equal the stationary distribution, so the gap is 1.
        for j in 0..m.dim() {
            assert!((m.entry(0, j) - m.stationary()[j]).abs() < 1e-12);
        }
        let spec = spectral_gap(&m).unwrap();
        assert!((spec.gap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn restricted_matrix_is_pinned_and_reversible() {
        let g2 = Graph::square_lattice(2).unwrap();
        let pr = params(2, 0.8);
        let ctx = RestrictedContext::new(0, 1);
        let chain = build_restricted_hb_matrix(&g2, &pr, &ctx).unwrap();
        assert_eq!(chain.dim(), 8);
        chain.validate(1e-12).unwrap();
        assert!(stochasticity_finding(&chain).is_none());

        // Eq-style entry check at q=2: the single flip at u has
        // probability (1/(N-1)) / (1 + pi(sigma)/pi(tau)).
        let space = RestrictedSpace::new(&g2, 2, &ctx, 4096).unwrap();
        let pi = exact_distribution_capped(&g2, &pr, StateSpace::Potts, 4096).unwrap();
        for (i, &idx) in space.indices.iter().enumerate() {
            let sigma = PottsConfig::from_index(idx as u64, 4, 2);
            for u in 1..4 {
                let tau = sigma.with_color(u, 3 - sigma.color(u));
                let j = space.position[tau.to_index(2) as usize];
                let expected = (1.0 / 3.0) / (1.0 + pi[idx] / pi[tau.to_index(2) as usize]);
                assert!((chain.entry(i, j) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn restricted_matrix_q3_high_temperature_finding() {
        // At beta = 0 and q = 3 the off-diagonal mass is (q-1)/2 = 1 per
        // row, leaving a zero diagonal; small beta pushes some rows over
        // one, which is reported, not renormalized.
        let g2 = Graph::square_lattice(2).unwrap();
        let ctx = RestrictedContext::new(0, 1);
        let chain = build_restricted_hb_matrix(&g2, &params(3, 0.2), &ctx).unwrap();
        assert!(stochasticity_finding(&chain).is_some());
        // Row sums are still exactly one by construction.
        assert!(chain.max_row_sum_error() < 1e-12);
    }

    #[test]
    fn flip_matrices_identities() {
        let p3 = Graph::path(3).unwrap();
        let q = 3u32;
        let pr = params(q, 0.5);
        let ctx = RestrictedContext::new(1, 2);
        let space = RestrictedSpace::new(&p3, q, &ctx, 4096).unwrap();
        let f1 = pin_shift_matrix::<f64>(&p3, q, &ctx, &space);
        let f2 = shift_average_matrix::<f64>(&p3, q, &space);

        // Applying the recoloring from the slice is the identity, so the
        // square of (F2 F1 viewed on the slice) reproduces it: check the
        // direct idempotence via the slice restriction of F1.
        for (i, &idx) in space.indices.iter().enumerate() {
            assert_eq!(f1.at(idx, i), 1.0);
        }

        // pi F1 = conditional distribution, conditional F2 = pi.
        let pi = exact_distribution_capped(&p3, &pr, StateSpace::Potts, 4096).unwrap();
        let cond: Vec<f64> = {
            let mut mass = 0.0;
            for &idx in &space.indices {
                mass += pi[idx];
            }
            space.indices.iter().map(|&idx| pi[idx] / mass).collect()
        };
        for j in 0..space.dim() {
            let got: f64 = (0..pi.len()).map(|i| pi[i] * f1.at(i, j)).sum();
            assert!((got - cond[j]).abs() < 1e-14);
        }
        for j in 0..pi.len() {
            let got: f64 = (0..space.dim()).map(|i| cond[i] * f2.at(i, j)).sum();
            assert!((got - pi[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn qtilde_is_reversible_for_pi() {
        let g2 = Graph::square_lattice(2).unwrap();
        let pr = params(2, 0.8);
        let ctx = RestrictedContext::new(0, 1);
        let qt = build_qtilde_matrix(&g2, &pr, &ctx).unwrap();
        qt.validate(1e-11).unwrap();
    }

    #[test]
    fn q_matrix_beta_zero_is_uniform() {
        let k2 = Graph::path(2).unwrap();
        let qm = build_q_matrix(&k2, &params(2, 0.0)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((qm.entry(i, j) - 0.25).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dirichlet_form_cases() {
        let k2 = Graph::path(2).unwrap();
        let pr = params(2, 0.4);
        let sw = build_sw_matrix(&k2, &pr).unwrap();
        // Constant function: zero.
        let c = vec![2.5; 4];
        assert_eq!(dirichlet_form(&sw, &c).unwrap(), 0.0);

        // Two-state chain, indicator of state 1: direct four-term sum.
        let a = 0.3f64;
        let chain = ChainMatrix::new(
            ChainKind::Derived,
            DenseMatrix::from_rows(vec![vec![1.0 - a, a], vec![a, 1.0 - a]]),
            vec![0.5, 0.5],
        )
        .unwrap();
        let f = vec![0.0f64, 1.0];
        let direct = 0.5 * (0.5 * a + 0.5 * a); // two off-diagonal terms of (f(x)-f(y))^2 pi P
        assert!((dirichlet_form(&chain, &f).unwrap() - direct).abs() < 1e-15);
        assert!((pi_variance(&chain, &f).unwrap() - 0.25).abs() < 1e-15);

        assert!(dirichlet_form(&sw, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let g3 = Graph::square_lattice(3).unwrap();
        let pr = params(3, 0.5); // 3^9 = 19683 > 4096
        assert!(matches!(
            build_sw_matrix(&g3, &pr),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn f32_builders_run() {
        let k2 = Graph::path(2).unwrap();
        let pr = ModelParams::<f32>::new(2, 0.5).unwrap();
        let sw = build_sw_matrix(&k2, &pr).unwrap();
        assert!(sw.max_row_sum_error() < 1e-5);
    }
}
