//! Shared test oracles, all independent of the library's implementation
//! paths: BFS component counting, direct subset-sum transition rows, and
//! a characteristic-polynomial eigensolver.

#![allow(dead_code)]

use pottsmc::exact::{ChainMatrix, DenseMatrix};
use pottsmc::graph::Graph;
use pottsmc::model::{ModelParams, PottsConfig};

/// Component count by breadth-first search over an explicit adjacency
/// list (no union-find).
pub fn bfs_component_count(n: usize, edges: &[(usize, usize)], keep: &[bool]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        if keep[i] {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    count
}

/// One cluster-dynamics transition probability by the direct sum over
/// all edge subsets: sum over A inside the common monochromatic set of
/// `p^|A| (1-p)^(|E(sigma)|-|A|) q^-C(A)`.
pub fn sw_row_entry_direct(
    g: &Graph,
    params: &ModelParams<f64>,
    sigma: &PottsConfig,
    tau: &PottsConfig,
) -> f64 {
    let m = g.n_edges();
    let p = params.p();
    let q = f64::from(params.q());
    let mono_sigma: Vec<bool> = g
        .edges()
        .iter()
        .map(|&(u, v)| sigma.color(u) == sigma.color(v))
        .collect();
    let mono_tau: Vec<bool> = g
        .edges()
        .iter()
        .map(|&(u, v)| tau.color(u) == tau.color(v))
        .collect();
    let e_sigma = mono_sigma.iter().filter(|&&b| b).count() as i32;

    let mut total = 0.0f64;
    for mask in 0u64..(1 << m) {
        let keep: Vec<bool> = (0..m).map(|e| mask >> e & 1 == 1).collect();
        if keep
            .iter()
            .enumerate()
            .any(|(e, &k)| k && !(mono_sigma[e] && mono_tau[e]))
        {
            continue;
        }
        let occupied = mask.count_ones() as i32;
        let comps = bfs_component_count(g.n_vertices(), g.edges(), &keep) as i32;
        total += p.powi(occupied) * (1.0 - p).powi(e_sigma - occupied) * q.powi(-comps);
    }
    total
}

/// Monic characteristic polynomial coefficients of a square matrix via
/// the Faddeev-LeVerrier recursion (only matrix products and traces):
/// returns `c` with `p(x) = sum c[i] x^i`, `c[n] = 1`.
pub fn char_poly_coeffs(a: &DenseMatrix<f64>) -> Vec<f64> {
    let n = a.rows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = DenseMatrix::<f64>::identity(n);
    for k in 1..=n {
        let am = a.matmul(&m);
        let trace: f64 = (0..n).map(|i| am.at(i, i)).sum();
        let c = -trace / k as f64;
        coeffs[n - k] = c;
        m = am;
        for i in 0..n {
            *m.at_mut(i, i) += c;
        }
    }
    coeffs
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

/// All real roots (with multiplicity, descending) of a monic polynomial
/// whose roots are all real. Repeatedly extracts the largest root by
/// bisection on `[largest critical point, Cauchy bound]`, deflates, and
/// polishes against the original polynomial.
pub fn real_roots_all_real(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    let mut roots = Vec::with_capacity(n);
    let mut current = coeffs.to_vec();
    while current.len() > 3 {
        let r = largest_root(&current);
        roots.push(polish(coeffs, r));
        current = deflate(&current, r);
    }
    if current.len() == 3 {
        let (a, b, c) = (current[2], current[1], current[0]);
        let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
        roots.push(polish(coeffs, (-b + disc) / (2.0 * a)));
        roots.push(polish(coeffs, (-b - disc) / (2.0 * a)));
    } else if current.len() == 2 {
        roots.push(polish(coeffs, -current[0] / current[1]));
    }
    roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
    roots
}

/// Largest real root of a monic all-real-roots polynomial.
fn largest_root(coeffs: &[f64]) -> f64 {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let bound = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0f64, f64::max);
    if n == 1 {
        return -coeffs[0] / coeffs[1];
    }
    // The largest root lies at or above the largest critical point.
    let deriv = poly_derivative(coeffs);
    let mut lo = largest_root(&deriv);
    let mut hi = bound;
    // p has positive leading coefficient, so p(hi) > 0 and p(lo) <= 0
    // (equality at a multiple root).
    let sign = lead.signum();
    if sign * poly_eval(coeffs, lo) > 0.0 {
        // No root above the last critical point within tolerance: the
        // largest root coincides with it (numerically).
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sign * poly_eval(coeffs, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn deflate(coeffs: &[f64], root: f64) -> Vec<f64> {
    // Synthetic division by (x - root); drops the remainder.
    let n = coeffs.len() - 1;
    let mut out = vec![0.0; n];
    let mut carry = coeffs[n];
    for i in (0..n).rev() {
        out[i] = carry;
        carry = coeffs[i] + carry * root;
    }
    out
}

fn polish(coeffs: &[f64], mut x: f64) -> f64 {
    // A root of multiplicity m is a simple root of the (m-1)-th
    // derivative, where Newton regains full accuracy (plain evaluation
    // of p near a multiple root is noise-limited to sqrt(epsilon)).
    let mut poly = coeffs.to_vec();
    while poly.len() > 1 {
        let deriv = poly_derivative(&poly);
        let scale = deriv.iter().map(|c| c.abs()).fold(0.0, f64::max)
            * x.abs().max(1.0).powi(deriv.len() as i32 - 1);
        let simple = poly_eval(&deriv, x).abs() > 1e-7 * scale.max(f64::MIN_POSITIVE);
        if simple || deriv.len() <= 1 {
            for _ in 0..4 {
                let den = poly_eval(&deriv, x);
                if den == 0.0 {
                    break;
                }
                let step = poly_eval(&poly, x) / den;
                if !step.is_finite() || step.abs() > 0.5 {
                    break;
                }
                x -= step;
            }
            return x;
        }
        poly = deriv;
    }
    x
}

/// Spectral gap from the characteristic polynomial of the symmetrized
/// chain: an eigensolve that shares nothing with the Jacobi path.
pub fn gap_from_char_poly(chain: &ChainMatrix<f64>) -> f64 {
    let sym = pottsmc::exact::symmetrized(chain).expect("positive stationary");
    let coeffs = char_poly_coeffs(&sym);
    let roots = real_roots_all_real(&coeffs);
    if roots.len() == 1 {
        return 1.0;
    }
    1.0 - roots[1].max(roots[roots.len() - 1].abs())
}

/// Eigenvalues from the characteristic polynomial, descending.
pub fn eigenvalues_from_char_poly(chain: &ChainMatrix<f64>) -> Vec<f64> {
    let sym = pottsmc::exact::symmetrized(chain).expect("positive stationary");
    real_roots_all_real(&char_poly_coeffs(&sym))
}

/// Complete graph on `n` vertices.
pub fn complete_graph(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v));
        }
    }
    Graph::new(n, edges).expect("valid")
}

/// Multigraph with a loop and a parallel pair, for loop/multi-edge
/// coverage: vertices {0,1,2}, edges loop(0), 0-1, 0-1, 1-2.
pub fn loop_multigraph() -> Graph {
    Graph::new(3, vec![(0, 0), (0, 1), (0, 1), (1, 2)]).expect("valid")
}

/// Check that an empirical count lies within `z` binomial standard
/// deviations of `n * p`.
pub fn within_binomial_band(count: u64, n: u64, p: f64, z: f64) -> bool {
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - mean).abs() <= z * sd.max(1e-12)
}
