//! Trajectory statistics: chain driving, empirical histograms,
//! total-variation distance, and integrated autocorrelation time of the
//! energy (the monochromatic-edge count).

use crate::dynamics::{
    heat_bath_step, modified_sw_step, restricted_hb_step, sw_step, RestrictedContext, RngStream,
};
use crate::error::{Error, Result};
use crate::graph::{DualMap, Graph};
use crate::model::{mono_edge_count, spin_space_size, ModelParams, PottsConfig};
use crate::scalar::{KahanSum, Real};

/// Which sampler drives the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsId {
    HeatBath,
    SwendsenWang,
    ModifiedSw,
    RestrictedHb,
}

impl DynamicsId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hb" => Ok(Self::HeatBath),
            "sw" => Ok(Self::SwendsenWang),
            "msw" => Ok(Self::ModifiedSw),
            "rhb" => Ok(Self::RestrictedHb),
            other => Err(Error::InvalidInput(format!("unknown dynamics '{other}'"))),
        }
    }
}

impl std::fmt::Display for DynamicsId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::HeatBath => "hb",
            Self::SwendsenWang => "sw",
            Self::ModifiedSw => "msw",
            Self::RestrictedHb => "rhb",
        };
        f.write_str(s)
    }
}

/// Chain to run: the graph, the dual map when the modified dynamics asks
/// for one, and the pin for the restricted dynamics.
#[derive(Debug, Clone)]
pub struct RunSpec<'a> {
    pub graph: &'a Graph,
    pub dynamics: DynamicsId,
    pub dual: Option<&'a DualMap>,
    pub pin: Option<RestrictedContext>,
}

/// What to record along the trajectory.
#[derive(Debug, Clone, Copy)]
pub struct RecordOptions {
    /// Keep the post-burn-in energy series (needed for the
    /// autocorrelation estimate).
    pub series: bool,
    /// Count visits per state index. Only honored while the state space
    /// has at most [`HISTOGRAM_STATE_CAP`] states.
    pub histogram: bool,
    /// Keep the per-step state indices, under the same cap as the
    /// histogram.
    pub states: bool,
    /// Record every `thin`-th step (>= 1).
    pub thin: u64,
}

impl Default for RecordOptions {
    fn default() -> Self {
        Self {
            series: true,
            histogram: false,
            states: false,
            thin: 1,
        }
    }
}

/// Histograms are recorded only up to this many states.
pub const HISTOGRAM_STATE_CAP: u128 = 1 << 16;

/// Windowed estimate of the integrated autocorrelation time.
#[derive(Debug, Clone, Copy)]
pub struct IatEstimate {
    /// 0.5 for an uncorrelated series under this convention.
    pub iat: f64,
    pub stderr: f64,
    /// Chosen truncation window.
    pub window: usize,
    /// The raw estimate fell below 0.5 (anticorrelated series); the
    /// reported value is floored at 0.5.
    pub antithetic: bool,
}

/// Summary of one trajectory.
#[derive(Debug, Clone)]
pub struct TrajectorySummary {
    /// Recorded (post-burn-in, post-thinning) step count.
    pub n_steps: u64,
    pub mean_energy: f64,
    pub energy_series: Option<Vec<f64>>,
    pub state_series: Option<Vec<u64>>,
    pub state_histogram: Option<Vec<u64>>,
    pub iat: Option<IatEstimate>,
}

impl TrajectorySummary {
    /// Merge an independent replica (run with a split stream) into this
    /// summary: counts and histograms add, the mean reweights, series
    /// concatenate, and the autocorrelation estimate is dropped (it is
    /// per-series).
    pub fn merge(&mut self, other: &TrajectorySummary) -> Result<()> {
        let total = self.n_steps + other.n_steps;
        if total == 0 {
            return Err(Error::InvalidInput("merging empty summaries".into()));
        }
        self.mean_energy = (self.mean_energy * self.n_steps as f64
            + other.mean_energy * other.n_steps as f64)
            / total as f64;
        self.n_steps = total;
        match (&mut self.state_histogram, &other.state_histogram) {
            (Some(mine), Some(theirs)) => {
                if mine.len() != theirs.len() {
                    return Err(Error::InvalidInput("histogram sizes differ".into()));
                }
                for (m, t) in mine.iter_mut().zip(theirs) {
                    *m += t;
                }
            }
            (mine, _) => *mine = None,
        }
        match (&mut self.energy_series, &other.energy_series) {
            (Some(mine), Some(theirs)) => mine.extend_from_slice(theirs),
            (mine, _) => *mine = None,
        }
        match (&mut self.state_series, &other.state_series) {
            (Some(mine), Some(theirs)) => mine.extend_from_slice(theirs),
            (mine, _) => *mine = None,
        }
        self.iat = None;
        Ok(())
    }
}

/// Drive one chain for `steps` total steps, recording after `burnin`.
/// The start defaults to the constant coloring with color 1 for the
/// unrestricted chains and the pinned color for the restricted chain.
pub fn run_chain<F: Real>(
    spec: &RunSpec,
    params: &ModelParams<F>,
    steps: u64,
    burnin: u64,
    rng: &mut RngStream,
    opts: &RecordOptions,
    start: Option<PottsConfig>,
) -> Result<TrajectorySummary> {
    if steps <= burnin {
        return Err(Error::InvalidInput(format!(
            "steps ({steps}) must exceed burnin ({burnin})"
        )));
    }
    if opts.thin == 0 {
        return Err(Error::InvalidInput("thin must be >= 1".into()));
    }
    if spec.dynamics == DynamicsId::ModifiedSw && spec.dual.is_none() {
        return Err(Error::InvalidInput(
            "modified dynamics needs a dual map".into(),
        ));
    }
    if spec.dynamics == DynamicsId::RestrictedHb && spec.pin.is_none() {
        return Err(Error::InvalidInput(
            "restricted dynamics needs a pinned vertex and color".into(),
        ));
    }

    let g = spec.graph;
    let mut sigma = match start {
        Some(s) => {
            if s.n_vertices() != g.n_vertices() {
                return Err(Error::InvalidInput(
                    "start configuration size does not match the graph".into(),
                ));
            }
            s
        }
        None => {
            let mut s = PottsConfig::constant(g.n_vertices(), 1);
            if let Some(ctx) = spec.pin {
                s.set_color(ctx.vertex, ctx.color);
            }
            s
        }
    };

    let space_size = spin_space_size(g.n_vertices(), params.q());
    let indexable = space_size <= HISTOGRAM_STATE_CAP;
    let mut histogram = (opts.histogram && indexable).then(|| vec![0u64; space_size as usize]);
    let mut states = (opts.states && indexable).then(Vec::new);
    let mut series = opts.series.then(Vec::new);
    let mut energy_sum = KahanSum::<f64>::new();
    let mut recorded = 0u64;

    for step in 0..steps {
        sigma = match spec.dynamics {
            DynamicsId::HeatBath => heat_bath_step(g, params, &sigma, rng),
            DynamicsId::SwendsenWang => sw_step(g, params, &sigma, rng),
            DynamicsId::ModifiedSw => {
                modified_sw_step(spec.dual.expect("checked above"), params, &sigma, rng)?
            }
            DynamicsId::RestrictedHb => {
                restricted_hb_step(g, params, &spec.pin.expect("checked above"), &sigma, rng)?
            }
        };
        if step < burnin || (step - burnin) % opts.thin != 0 {
            continue;
        }
        recorded += 1;
        let energy = mono_edge_count(g, &sigma) as f64;
        energy_sum.add(energy);
        if let Some(series) = series.as_mut() {
            series.push(energy);
        }
        if histogram.is_some() || states.is_some() {
            let idx = sigma.to_index(params.q());
            if let Some(hist) = histogram.as_mut() {
                hist[idx as usize] += 1;
            }
            if let Some(states) = states.as_mut() {
                states.push(idx);
            }
        }
    }

    let iat = series
        .as_deref()
        .filter(|s| s.len() >= 1000)
        .map(integrated_autocorrelation)
        .transpose()?;

    Ok(TrajectorySummary {
        n_steps: recorded,
        mean_energy: energy_sum.value() / recorded as f64,
        energy_series: series,
        state_series: states,
        state_histogram: histogram,
        iat,
    })
}

/// Total-variation distance between a count histogram and an exact
/// probability vector.
pub fn tv_distance(hist: &[u64], exact: &[f64]) -> Result<f64> {
    if hist.len() != exact.len() {
        return Err(Error::InvalidInput(format!(
            "histogram has {} bins, exact vector has {}",
            hist.len(),
            exact.len()
        )));
    }
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return Err(Error::InvalidInput("empty histogram".into()));
    }
    let mut acc = KahanSum::<f64>::new();
    for (&h, &e) in hist.iter().zip(exact) {
        acc.add((h as f64 / total as f64 - e).abs());
    }
    Ok(0.5 * acc.value())
}

/// Self-consistent windowed estimator of the integrated autocorrelation
/// time: `tau(W) = 1/2 + sum_{t<=W} rho(t)` truncated at the first
/// window with `W >= 6 tau(W)`. Anticorrelated series are floored at
/// 0.5 and flagged. Needs at least 1000 points.
pub fn integrated_autocorrelation(series: &[f64]) -> Result<IatEstimate> {
    let n = series.len();
    if n < 1000 {
        return Err(Error::InvalidInput(format!(
            "series too short for autocorrelation: {n} < 1000"
        )));
    }
    let nf = n as f64;
    let mut mean_acc = KahanSum::<f64>::new();
    for &x in series {
        mean_acc.add(x);
    }
    let mean = mean_acc.value() / nf;
    let centered: Vec<f64> = series.iter().map(|&x| x - mean).collect();
    let mut c0_acc = KahanSum::<f64>::new();
    for &x in &centered {
        c0_acc.add(x * x);
    }
    let c0 = c0_acc.value() / nf;
    if c0 == 0.0 {
        // Constant series: treat as uncorrelated.
        return Ok(IatEstimate {
            iat: 0.5,
            stderr: 0.0,
            window: 0,
            antithetic: false,
        });
    }

    let max_window = n / 4;
    let mut tau = 0.5f64;
    let mut window = max_window;
    for t in 1..=max_window {
        let mut ct = KahanSum::<f64>::new();
        for i in 0..n - t {
            ct.add(centered[i] * centered[i + t]);
        }
        let rho = ct.value() / nf / c0;
        tau += rho;
        if (t as f64) >= 6.0 * tau {
            window = t;
            break;
        }
    }

    let iat = tau.max(0.5);
    let stderr = iat * ((4.0 * window as f64 + 2.0) / nf).sqrt();
    // Flag anticorrelation only when it clears the estimator noise, so
    // uncorrelated series that dip a hair under 0.5 are not flagged.
    let antithetic = 0.5 - tau > stderr;
    Ok(IatEstimate {
        iat,
        stderr,
        window,
        antithetic,
    })
}
