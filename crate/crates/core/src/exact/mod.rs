//! Exact engine: state-space enumeration, dense transition matrices for
//! every chain, spectral gaps, and the certification suites.

mod builders;
mod eigen;
mod matrix;
mod verify;

pub use builders::{
    build_hb_matrix, build_hb_matrix_capped, build_modified_sw_matrix,
    build_modified_sw_matrix_capped, build_q_matrix, build_q_matrix_capped, build_qtilde_matrix,
    build_qtilde_matrix_capped, build_restricted_hb_matrix, build_restricted_hb_matrix_capped,
    build_sw_matrix, build_sw_matrix_capped, build_sw_rc_matrix, build_sw_rc_matrix_capped,
    build_t_matrix, build_tstar_matrix, dirichlet_form, dual_complement_tables, pi_variance,
    pin_shift_matrix, shift_average_matrix, stochasticity_finding, RestrictedSpace,
    DEFAULT_FACTOR_CAP,
};
pub use eigen::{jacobi_symmetric, spectral_gap, symmetrized, SpectrumResult};
pub use matrix::{matmul_threads, set_matmul_threads, ChainKind, ChainMatrix, DenseMatrix};
pub use verify::{
    beta_grid, gap_instances, run_suite, verify_duality, verify_lemma_spanning,
    verify_lemma_vertex, verify_prop_modified, verify_theorem_main, verify_theorem_main_prime,
    verify_tree_corollary, CheckRecord, ComparisonConstants, InstanceOverride, Suite, SuiteConfig,
    DUALITY_TOL, ENTRY_TOL, GAP_TOL, INVARIANT_TOL,
};
