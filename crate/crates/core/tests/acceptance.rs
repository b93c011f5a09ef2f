//! Acceptance suite: one test per criterion, each printing a pass line
//! (visible with `--nocapture`). Criteria 1-10 live here; the
//! byte-identical-output criterion drives the CLI binary and lives in
//! the CLI crate's tests.

mod common;

use common::within_binomial_band;
use pottsmc::dynamics::{
    heat_bath_step, modified_sw_step, restricted_hb_step, sw_rc_step, sw_step, RestrictedContext,
    RngStream,
};
use pottsmc::exact::{
    build_hb_matrix, build_modified_sw_matrix, build_restricted_hb_matrix, build_sw_matrix,
    build_sw_rc_matrix, run_suite, spectral_gap, verify_duality, RestrictedSpace,
    Suite, SuiteConfig, DUALITY_TOL, GAP_TOL,
};
use pottsmc::graph::{build_dual_square_lattice, build_tree_dual, DualMap, Graph};
use pottsmc::model::{
    critical_beta, exact_distribution, restricted_potts_distribution, self_dual_p, ModelParams,
    PottsConfig, RcState, StateSpace,
};
use pottsmc::stats::tv_distance;
use std::time::Instant;

fn params(q: u32, beta: f64) -> ModelParams<f64> {
    ModelParams::new(q, beta).unwrap()
}

fn pass_line(criterion: &str, detail: String) {
    println!("criterion {criterion}: PASS ({detail})");
}

#[test]
fn criterion_01_duality_identity() {
    let start = Instant::now();
    let dmap = build_dual_square_lattice(3).unwrap();
    let mut worst = 0.0f64;
    for q in [2u32, 3] {
        for p in [0.3, self_dual_p::<f64>(q), 0.7] {
            let pr = ModelParams::<f64>::from_p(q, p).unwrap().with_dual().unwrap();
            let recs = verify_duality(&dmap, &pr, "G3", 4096).unwrap();
            for r in &recs {
                assert!(
                    r.pass,
                    "duality violated at q={q} p={p}: max diff {}",
                    -r.slack
                );
                worst = worst.max(-r.slack);
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(worst <= DUALITY_TOL);
    assert!(elapsed <= 10.0, "duality took {elapsed:.1} s > 10 s");
    pass_line(
        "01 duality identity",
        format!("max |mu - mu*| = {worst:.3e}, {elapsed:.2} s"),
    );
}

#[test]
fn criterion_02_gap_equality_spin_vs_rc() {
    let start = Instant::now();
    let instances = [
        ("K2", Graph::path(2).unwrap()),
        ("P3", Graph::path(3).unwrap()),
        ("G2", Graph::square_lattice(2).unwrap()),
        ("C4", Graph::cycle(4).unwrap()),
    ];
    let mut worst = 0.0f64;
    for (label, g) in &instances {
        for q in [2u32, 3] {
            for beta in [0.3, critical_beta::<f64>(q), 1.5] {
                let pr = params(q, beta);
                let gap_spin = spectral_gap(&build_sw_matrix(g, &pr).unwrap()).unwrap().gap;
                let gap_rc = spectral_gap(&build_sw_rc_matrix(g, &pr).unwrap())
                    .unwrap()
                    .gap;
                let diff = (gap_spin - gap_rc).abs();
                worst = worst.max(diff);
                assert!(
                    diff <= GAP_TOL,
                    "{label} q={q} beta={beta}: gaps {gap_spin} vs {gap_rc}"
                );
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 60.0, "gap equality took {elapsed:.1} s > 60 s");
    pass_line(
        "02 gap equality",
        format!("max |gap difference| = {worst:.3e}, {elapsed:.2} s"),
    );
}

#[test]
fn criterion_03_spanning_subgraph_sandwich() {
    let records = run_suite(Suite::Lemma3, &SuiteConfig::default(), None).unwrap();
    let bounds: Vec<_> = records
        .iter()
        .filter(|r| r.check.starts_with("sandwich"))
        .collect();
    // All subsets of the single-edge graph (2) and 10 random subsets of
    // the 2x2 lattice, two couplings, two bounds each.
    assert_eq!(bounds.len(), 2 * (2 + 10) * 2);
    let worst = bounds.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    for r in &bounds {
        assert!(r.pass, "{} {} slack {}", r.check, r.instance, r.slack);
    }
    pass_line(
        "03 spanning-subgraph sandwich",
        format!("{} entrywise bounds, min slack {worst:.3e}", bounds.len()),
    );
}

#[test]
fn criterion_04_single_vertex_recolor_bound() {
    let records = run_suite(Suite::Lemma4, &SuiteConfig::default(), None).unwrap();
    let bounds: Vec<_> = records
        .iter()
        .filter(|r| r.check == "vertex_bound")
        .collect();
    assert_eq!(bounds.len(), 2 * 4 * 2 * 2); // two betas, 4 vertices, k, l
    for r in &bounds {
        assert!(r.pass, "{} slack {}", r.instance, r.slack);
    }
    let worst = bounds.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    pass_line(
        "04 single-vertex recolor bound",
        format!("{} exhaustive checks, min slack {worst:.3e}", bounds.len()),
    );
}

#[test]
fn criterion_05_gap_comparison_and_composite_chain() {
    let records = run_suite(Suite::Thm1, &SuiteConfig::default(), None).unwrap();
    let wanted = [
        "gap_sw_vs_hb",
        "lemma2_q_vs_hb2",
        "lemma2_hb2_vs_hb",
        "square_lower",
        "square_upper",
    ];
    let mut counts = [0usize; 5];
    let mut worst = f64::INFINITY;
    for r in &records {
        if let Some(i) = wanted.iter().position(|w| *w == r.check) {
            counts[i] += 1;
            worst = worst.min(r.slack);
            assert!(r.pass, "{} on {} ({}): slack {}", r.check, r.instance, r.params, r.slack);
        }
    }
    // 4 graphs x 2 colors x 3 couplings per check.
    for (i, c) in counts.iter().enumerate() {
        assert_eq!(*c, 24, "check {} ran {c} times", wanted[i]);
    }
    pass_line(
        "05 cluster-vs-single-site gap comparison",
        format!("24 instances x 5 inequalities, min slack {worst:.3e}"),
    );
}

#[test]
fn criterion_06_pinned_vertex_comparison() {
    let records = run_suite(Suite::Thm1p, &SuiteConfig::default(), None).unwrap();
    let main: Vec<_> = records
        .iter()
        .filter(|r| r.check == "gap_sw_vs_pinned2" || r.check == "qtilde_vs_pinned2")
        .collect();
    assert_eq!(main.len(), 2 * 2 * 2); // two graphs, two couplings, two checks
    for r in &main {
        assert!(r.pass, "{} on {}: slack {}", r.check, r.instance, r.slack);
    }
    let worst = main.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    pass_line(
        "06 pinned-vertex gap comparison",
        format!("star and lattice instances, min slack {worst:.3e}"),
    );
}

#[test]
fn criterion_07_modified_chain_dominates() {
    let dmap = build_dual_square_lattice(2).unwrap();
    let mut worst = f64::INFINITY;
    for p in [0.4, self_dual_p::<f64>(2), 0.7] {
        let pr = ModelParams::<f64>::from_p(2, p).unwrap().with_dual().unwrap();
        let m = build_modified_sw_matrix(&dmap, &pr).unwrap();
        let gap_m = spectral_gap(&m).unwrap().gap;
        let gap_primal = spectral_gap(&build_sw_matrix(dmap.primal(), &pr).unwrap())
            .unwrap()
            .gap;
        let dual_pr = pr.dual_params().unwrap();
        let gap_dual = spectral_gap(&build_sw_matrix(dmap.dual(), &dual_pr).unwrap())
            .unwrap()
            .gap;
        let slack = gap_m - gap_primal.max(gap_dual);
        worst = worst.min(slack);
        assert!(
            slack >= -GAP_TOL,
            "p={p}: gap(M)={gap_m} below max({gap_primal}, {gap_dual})"
        );
    }
    pass_line(
        "07 modified-chain gap dominance",
        format!("three couplings on the 2x2 lattice, min slack {worst:.3e}"),
    );
}

#[test]
fn criterion_08_tree_gap_is_one() {
    let trees = [("P4", Graph::path(4).unwrap()), ("K1_3", Graph::star(3).unwrap())];
    let mut worst = 0.0f64;
    for (label, tree) in &trees {
        let dmap = build_tree_dual(tree).unwrap();
        for q in [2u32, 3] {
            for beta in [0.5, 2.0] {
                let pr = params(q, beta).with_dual().unwrap();
                let m = build_modified_sw_matrix(&dmap, &pr).unwrap();
                let gap = spectral_gap(&m).unwrap().gap;
                let diff = (gap - 1.0).abs();
                worst = worst.max(diff);
                assert!(diff <= GAP_TOL, "{label} q={q} beta={beta}: gap {gap}");
            }
        }
    }
    pass_line(
        "08 tree gap equals one",
        format!("path and star, both colors and couplings, max |gap-1| = {worst:.3e}"),
    );
}

/// Samplers and graphs used by the agreement criterion.
struct AgreementCase {
    label: &'static str,
    graph: Graph,
    dual: Option<DualMap>,
}

fn agreement_cases() -> Vec<AgreementCase> {
    let k2 = Graph::path(2).unwrap();
    let g2 = Graph::square_lattice(2).unwrap();
    vec![
        AgreementCase {
            label: "K2",
            dual: Some(build_tree_dual(&k2).unwrap()),
            graph: k2,
        },
        AgreementCase {
            label: "G2",
            dual: Some(build_dual_square_lattice(2).unwrap()),
            graph: g2,
        },
    ]
}

const DRAWS: u64 = 1_000_000;

fn check_one_step_band(
    label: &str,
    counts: &[u64],
    exact_row: &[f64],
) {
    assert_eq!(counts.len(), exact_row.len());
    for (j, (&c, &p)) in counts.iter().zip(exact_row).enumerate() {
        assert!(
            within_binomial_band(c, DRAWS, p, 4.0),
            "{label}: target {j} count {c} vs expected {}",
            DRAWS as f64 * p
        );
    }
}

#[test]
fn criterion_09_sampler_matrix_agreement() {
    let q = 2u32;
    let beta = 0.6f64;
    let start = Instant::now();
    for case in agreement_cases() {
        let g = &case.graph;
        let n = g.n_vertices();
        let sdim = (q as usize).pow(n as u32);
        let pr = params(q, beta);
        let pr_dual = pr.with_dual().unwrap();
        let pi = exact_distribution(g, &pr, StateSpace::Potts).unwrap();

        // Start states: a non-symmetric coloring, and one on the pinned
        // slice for the restricted chain.
        let sigma0 = PottsConfig::from_index((sdim as u64 - 1) / 3, n, q);
        let ctx = RestrictedContext::new(0, 1);
        let mut sigma_pinned = PottsConfig::constant(n, 2);
        sigma_pinned.set_color(0, 1);

        // --- heat bath ---
        let hb = build_hb_matrix(g, &pr).unwrap();
        let mut rng = RngStream::new(1001);
        let mut counts = vec![0u64; sdim];
        for _ in 0..DRAWS {
            counts[heat_bath_step(g, &pr, &sigma0, &mut rng).to_index(q) as usize] += 1;
        }
        check_one_step_band(
            &format!("{} hb", case.label),
            &counts,
            hb.row(sigma0.to_index(q) as usize),
        );

        // --- cluster dynamics ---
        let sw = build_sw_matrix(g, &pr).unwrap();
        let mut rng = RngStream::new(1002);
        let mut counts = vec![0u64; sdim];
        for _ in 0..DRAWS {
            counts[sw_step(g, &pr, &sigma0, &mut rng).to_index(q) as usize] += 1;
        }
        check_one_step_band(
            &format!("{} sw", case.label),
            &counts,
            sw.row(sigma0.to_index(q) as usize),
        );

        // --- cluster dynamics on edge subsets ---
        let dmapless_m = g.n_edges();
        let swrc = build_sw_rc_matrix(g, &pr).unwrap();
        let a0 = RcState::from_index(1, dmapless_m).unwrap();
        let mut rng = RngStream::new(1003);
        let mut counts = vec![0u64; 1 << dmapless_m];
        for _ in 0..DRAWS {
            counts[sw_rc_step(g, &pr, &a0, &mut rng).to_index().unwrap() as usize] += 1;
        }
        check_one_step_band(
            &format!("{} swrc", case.label),
            &counts,
            swrc.row(a0.to_index().unwrap() as usize),
        );

        // --- modified cluster dynamics ---
        let dmap = case.dual.as_ref().unwrap();
        let msw = build_modified_sw_matrix(dmap, &pr_dual).unwrap();
        let mut rng = RngStream::new(1004);
        let mut counts = vec![0u64; sdim];
        for _ in 0..DRAWS {
            counts[modified_sw_step(dmap, &pr_dual, &sigma0, &mut rng)
                .unwrap()
                .to_index(q) as usize] += 1;
        }
        check_one_step_band(
            &format!("{} msw", case.label),
            &counts,
            msw.row(sigma0.to_index(q) as usize),
        );

        // --- restricted single-site dynamics ---
        let rhb = build_restricted_hb_matrix(g, &pr, &ctx).unwrap();
        let space = RestrictedSpace::new(g, q, &ctx, 4096).unwrap();
        let mut rng = RngStream::new(1005);
        let mut counts = vec![0u64; rhb.dim()];
        for _ in 0..DRAWS {
            let next = restricted_hb_step(g, &pr, &ctx, &sigma_pinned, &mut rng).unwrap();
            counts[space.position[next.to_index(q) as usize]] += 1;
        }
        check_one_step_band(
            &format!("{} rhb", case.label),
            &counts,
            rhb.row(space.position[sigma_pinned.to_index(q) as usize]),
        );

        // --- stationary total variation after 10^6 steps ---
        let burnin = 10_000u64;
        let total = DRAWS + burnin;

        let mut rng = RngStream::new(2001);
        let mut hist = vec![0u64; sdim];
        let mut sigma = sigma0.clone();
        for step in 0..total {
            sigma = heat_bath_step(g, &pr, &sigma, &mut rng);
            if step >= burnin {
                hist[sigma.to_index(q) as usize] += 1;
            }
        }
        let tv = tv_distance(&hist, &pi).unwrap();
        assert!(tv <= 0.02, "{} hb stationary tv {tv}", case.label);

        let mut rng = RngStream::new(2002);
        let mut hist = vec![0u64; sdim];
        let mut sigma = sigma0.clone();
        for step in 0..total {
            sigma = sw_step(g, &pr, &sigma, &mut rng);
            if step >= burnin {
                hist[sigma.to_index(q) as usize] += 1;
            }
        }
        let tv = tv_distance(&hist, &pi).unwrap();
        assert!(tv <= 0.02, "{} sw stationary tv {tv}", case.label);

        let mu = exact_distribution(g, &pr, StateSpace::RandomCluster).unwrap();
        let mut rng = RngStream::new(2003);
        let mut hist = vec![0u64; 1 << dmapless_m];
        let mut a = a0.clone();
        for step in 0..total {
            a = sw_rc_step(g, &pr, &a, &mut rng);
            if step >= burnin {
                hist[a.to_index().unwrap() as usize] += 1;
            }
        }
        let tv = tv_distance(&hist, &mu).unwrap();
        assert!(tv <= 0.02, "{} swrc stationary tv {tv}", case.label);

        let mut rng = RngStream::new(2004);
        let mut hist = vec![0u64; sdim];
        let mut sigma = sigma0.clone();
        for step in 0..total {
            sigma = modified_sw_step(dmap, &pr_dual, &sigma, &mut rng).unwrap();
            if step >= burnin {
                hist[sigma.to_index(q) as usize] += 1;
            }
        }
        let tv = tv_distance(&hist, &pi).unwrap();
        assert!(tv <= 0.02, "{} msw stationary tv {tv}", case.label);

        let pi_restricted = restricted_potts_distribution(g, &pr, ctx.vertex, ctx.color).unwrap();
        let mut rng = RngStream::new(2005);
        let mut hist = vec![0u64; sdim];
        let mut sigma = sigma_pinned.clone();
        for step in 0..total {
            sigma = restricted_hb_step(g, &pr, &ctx, &sigma, &mut rng).unwrap();
            if step >= burnin {
                hist[sigma.to_index(q) as usize] += 1;
            }
        }
        let tv = tv_distance(&hist, &pi_restricted).unwrap();
        assert!(tv <= 0.02, "{} rhb stationary tv {tv}", case.label);
    }
    pass_line(
        "09 sampler/matrix agreement",
        format!(
            "5 dynamics x 2 graphs, {DRAWS} one-step draws in 4-sigma bands and stationary TV <= 0.02, {:.1} s",
            start.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_10_matrix_invariants_across_suite() {
    let records = run_suite(Suite::All, &SuiteConfig::default(), None).unwrap();
    let invariants: Vec<_> = records
        .iter()
        .filter(|r| r.check.starts_with("invariants"))
        .collect();
    assert!(
        invariants.len() >= 60,
        "only {} matrices built by the suite",
        invariants.len()
    );
    for r in &invariants {
        assert!(
            r.pass,
            "invariants failed for {} on {} ({}): row {:.3e} rev {:.3e}",
            r.check, r.instance, r.params, r.lhs, r.rhs
        );
    }
    // And the suite as a whole is green.
    let failures = records.iter().filter(|r| !r.pass).count();
    assert_eq!(failures, 0, "{failures} suite records failed");
    pass_line(
        "10 matrix invariants",
        format!(
            "{} chain matrices at 1e-10, {} records all green",
            invariants.len(),
            records.len()
        ),
    );
}
