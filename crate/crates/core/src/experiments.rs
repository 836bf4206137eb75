//! Reproducible studies built on the samplers and certificates.
//!
//! Every report carries the configuration that produced it and the master
//! seed. `wall_time_secs` is the only field that varies between runs; use
//! [`deterministic_json`] to compare reports.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{Float, One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ctrb::{kalman_matrix, pbh_check, rank_svd};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sample::{derive_seed, perturb, sample_ph, stream_rng, PerturbationSpec, SamplerSpec};
use crate::scalar::{Real, Scalar, ScalarField};
use crate::system::{PhSystem, PhtSystem};
use crate::vectorize::{pack, unpack, PackedVector};

/// Verdict knobs shared by every study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOptions {
    /// Relative rank threshold; `None` selects `eps·max(n, nm)`.
    pub rel_tol: Option<f64>,
    /// Relative Hautus threshold; `None` selects the crate default.
    pub pbh_tol: Option<f64>,
    /// Also run the Hautus test and count disagreements.
    pub cross_check: bool,
    /// Trials per CSV row.
    pub batch_size: u64,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            rel_tol: None,
            pbh_tol: None,
            cross_check: false,
            batch_size: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Outcome {
    rank: usize,
    sigma_n: f64,
    sigma_max: f64,
    controllable: bool,
    pbh: Option<bool>,
}

fn certify<T: Scalar>(sys: &PhtSystem<T>, opts: &TrialOptions) -> Result<Outcome> {
    let report = rank_svd(&kalman_matrix(sys), opts.rel_tol.map(linalg::real))?;
    let pbh = if opts.cross_check {
        Some(pbh_check(sys, opts.pbh_tol.map(linalg::real))?)
    } else {
        None
    };
    let n = sys.dims().n;
    Ok(Outcome {
        rank: report.rank,
        sigma_n: report.sigma_n(n),
        sigma_max: report.sigma_max(),
        controllable: report.controllable,
        pbh,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub master: u64,
    pub first_stream: u64,
    pub last_stream: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub batch: u64,
    pub trials: u64,
    pub controllable: u64,
    pub min_sigma_n: f64,
}

/// Outcome of [`run_genericity_trial`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: Value,
    pub trials: u64,
    pub controllable_count: u64,
    pub fraction: f64,
    /// Smallest `σ_n` of any Kalman matrix seen.
    pub min_sigma_n: f64,
    /// Smallest `σ_n/σ_max` of any Kalman matrix seen.
    pub min_rel_sigma_n: f64,
    pub median_sigma_n: f64,
    /// Instances where the Hautus verdict differs from the rank verdict.
    pub pbh_disagreements: Option<u64>,
    pub batches: Vec<BatchRow>,
    pub seeds: SeedInfo,
    pub wall_time_secs: f64,
}

impl ExperimentReport {
    pub fn with_config(mut self, config: Value) -> Self {
        self.config = config;
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("batch,trials,controllable,fraction,min_sigma_n\n");
        for row in &self.batches {
            out.push_str(&format!(
                "{},{},{},{},{:e}\n",
                row.batch,
                row.trials,
                row.controllable,
                row.controllable as f64 / row.trials as f64,
                row.min_sigma_n
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} of {} sampled systems controllable (fraction {}); min sigma_n {:e}, min sigma_n/sigma_max {:e}, median sigma_n {:e}",
            self.controllable_count,
            self.trials,
            self.fraction,
            self.min_sigma_n,
            self.min_rel_sigma_n,
            self.median_sigma_n
        );
        if let Some(d) = self.pbh_disagreements {
            s.push_str(&format!("; {d} Hautus disagreements"));
        }
        s
    }
}

/// Everything [`run_genericity_trial`] needs; echoed as a report's `config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericityConfig {
    pub experiment: String,
    pub sampler: SamplerSpec,
    pub trials: u64,
    pub options: TrialOptions,
}

/// JSON of a report with its `wall_time_secs` field removed.
pub fn deterministic_json<S: Serialize>(report: &S) -> Result<String> {
    let mut v = serde_json::to_value(report)?;
    if let Value::Object(map) = &mut v {
        map.remove("wall_time_secs");
    }
    Ok(serde_json::to_string(&v)?)
}

/// Samples `trials` PH systems from `spec` and certifies each.
pub fn run_genericity_trial(
    spec: &SamplerSpec,
    trials: u64,
    opts: &TrialOptions,
) -> Result<ExperimentReport> {
    match spec.field {
        ScalarField::Real => genericity_trial::<f64>(spec, trials, opts),
        ScalarField::Complex => genericity_trial::<Complex<f64>>(spec, trials, opts),
    }
}

pub fn genericity_trial<T: Scalar>(
    spec: &SamplerSpec,
    trials: u64,
    opts: &TrialOptions,
) -> Result<ExperimentReport> {
    spec.check()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if opts.batch_size == 0 {
        return Err(Error::InvalidParameter("batch size must be at least 1".into()));
    }
    let start = Instant::now();
    let outcomes: Vec<Result<Outcome>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(spec.seed, i);
            let sys = sample_ph::<T, _>(spec, &mut rng)?;
            certify(&sys, opts)
        })
        .collect();
    let mut results = Vec::with_capacity(outcomes.len());
    for (i, r) in outcomes.into_iter().enumerate() {
        results.push(r.map_err(|e| e.in_trial(i as u64))?);
    }

    let controllable_count = results.iter().filter(|o| o.controllable).count() as u64;
    let min_sigma_n = results.iter().map(|o| o.sigma_n).fold(f64::INFINITY, f64::min);
    let min_rel_sigma_n = results
        .iter()
        .map(|o| if o.sigma_max > 0.0 { o.sigma_n / o.sigma_max } else { 0.0 })
        .fold(f64::INFINITY, f64::min);
    let mut sorted: Vec<f64> = results.iter().map(|o| o.sigma_n).collect();
    sorted.sort_by(f64::total_cmp);
    let median_sigma_n = sorted[sorted.len() / 2];
    let pbh_disagreements = opts.cross_check.then(|| {
        results
            .iter()
            .filter(|o| o.pbh != Some(o.controllable))
            .count() as u64
    });
    let batches = results
        .chunks(opts.batch_size as usize)
        .enumerate()
        .map(|(b, chunk)| BatchRow {
            batch: b as u64,
            trials: chunk.len() as u64,
            controllable: chunk.iter().filter(|o| o.controllable).count() as u64,
            min_sigma_n: chunk.iter().map(|o| o.sigma_n).fold(f64::INFINITY, f64::min),
        })
        .collect();

    let config = serde_json::to_value(GenericityConfig {
        experiment: "mc-genericity".into(),
        sampler: spec.clone(),
        trials,
        options: *opts,
    })?;
    Ok(ExperimentReport {
        config,
        trials,
        controllable_count,
        fraction: controllable_count as f64 / trials as f64,
        min_sigma_n,
        min_rel_sigma_n,
        median_sigma_n,
        pbh_disagreements,
        batches,
        seeds: SeedInfo {
            master: spec.seed,
            first_stream: 0,
            last_stream: trials - 1,
        },
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub epsilon: f64,
    pub trials: u64,
    pub controllable: u64,
    pub fraction: f64,
    pub mean_rank: f64,
    pub mean_sigma_n: f64,
    pub min_sigma_n: f64,
    pub max_halvings: usize,
}

/// Outcome of [`run_nowhere_density_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub config: Value,
    pub base_rank: usize,
    pub rows: Vec<ProbeRow>,
    pub seeds: SeedInfo,
    pub wall_time_secs: f64,
}

impl ProbeReport {
    pub fn with_config(mut self, config: Value) -> Self {
        self.config = config;
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "epsilon,trials,controllable,fraction,mean_rank,mean_sigma_n,min_sigma_n,max_halvings\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:e},{},{},{},{},{:e},{:e},{}\n",
                r.epsilon,
                r.trials,
                r.controllable,
                r.fraction,
                r.mean_rank,
                r.mean_sigma_n,
                r.min_sigma_n,
                r.max_halvings
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = format!("base Kalman rank {}\n", self.base_rank);
        for r in &self.rows {
            s.push_str(&format!(
                "  eps {:>8.1e}: {}/{} controllable (fraction {}), mean sigma_n {:e}\n",
                r.epsilon, r.controllable, r.trials, r.fraction, r.mean_sigma_n
            ));
        }
        s
    }

    /// Number of adjacent rows (ordered by epsilon) where the controllable
    /// fraction decreases.
    pub fn fraction_inversions(&self) -> usize {
        let mut rows: Vec<&ProbeRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        rows.windows(2).filter(|w| w[1].fraction < w[0].fraction).count()
    }
}

/// Everything [`run_nowhere_density_probe`] needs, including the base
/// system in packed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub experiment: String,
    pub base: PackedVector<f64>,
    pub eps_grid: Vec<f64>,
    pub trials_per_eps: u64,
    pub seed: u64,
    pub options: TrialOptions,
}

/// Perturbs an uncontrollable base along random structured directions of
/// size `ε` for every `ε` in the grid and records how often the perturbed
/// system is controllable. Trial `t` uses the same direction for every `ε`.
pub fn run_nowhere_density_probe<T: Scalar>(
    base: &PhSystem<T>,
    eps_grid: &[f64],
    trials_per_eps: u64,
    seed: u64,
    opts: &TrialOptions,
) -> Result<ProbeReport> {
    if trials_per_eps == 0 {
        return Err(Error::InvalidParameter("trials per epsilon must be at least 1".into()));
    }
    if let Some(bad) = eps_grid.iter().find(|e| !(**e >= 0.0) || !e.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon grid entry {bad} is not >= 0")));
    }
    let start = Instant::now();
    let base_report = rank_svd(&kalman_matrix(base), opts.rel_tol.map(linalg::real))?;
    if base_report.controllable {
        return Err(Error::BaseNotUncontrollable {
            rank: base_report.rank,
        });
    }
    let dir_seed = derive_seed(seed, "perturb-probe");
    let max_retries = PerturbationSpec::default().max_retries;
    let n = base.dims().n as f64;

    let mut rows = Vec::with_capacity(eps_grid.len());
    for &epsilon in eps_grid {
        let pspec = PerturbationSpec {
            epsilon,
            max_retries,
        };
        let outcomes: Vec<Result<(Outcome, usize)>> = (0..trials_per_eps)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(dir_seed, t);
                let p = perturb(base, &pspec, &mut rng)?;
                Ok((certify(&p.system, opts)?, p.halvings))
            })
            .collect();
        let mut results = Vec::with_capacity(outcomes.len());
        for (t, r) in outcomes.into_iter().enumerate() {
            results.push(r.map_err(|e| e.in_trial(t as u64))?);
        }
        let count = results.len() as f64;
        let controllable = results.iter().filter(|(o, _)| o.controllable).count() as u64;
        rows.push(ProbeRow {
            epsilon,
            trials: trials_per_eps,
            controllable,
            fraction: controllable as f64 / trials_per_eps as f64,
            mean_rank: results.iter().map(|(o, _)| o.rank as f64).sum::<f64>() / count,
            mean_sigma_n: results.iter().map(|(o, _)| o.sigma_n).sum::<f64>() / count,
            min_sigma_n: results.iter().map(|(o, _)| o.sigma_n).fold(f64::INFINITY, f64::min),
            max_halvings: results.iter().map(|(_, h)| *h).max().unwrap_or(0),
        });
    }
    debug_assert!(rows.iter().all(|r| r.mean_rank <= n));

    let packed = pack(base.base());
    let config = serde_json::to_value(ProbeConfig {
        experiment: "perturb-probe".into(),
        base: PackedVector {
            field: packed.field,
            n: packed.n,
            m: packed.m,
            coords: packed.coords.iter().map(|x| x.to_f64_lossy()).collect(),
        },
        eps_grid: eps_grid.to_vec(),
        trials_per_eps,
        seed,
        options: *opts,
    })?;
    Ok(ProbeReport {
        config,
        base_rank: base_report.rank,
        rows,
        seeds: SeedInfo {
            master: seed,
            first_stream: 0,
            last_stream: trials_per_eps - 1,
        },
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

fn probe_replay<T: Scalar<Re = f64>>(c: &ProbeConfig) -> Result<ProbeReport> {
    let base = PhSystem::validate(unpack::<T>(&c.base)?, None)?;
    run_nowhere_density_probe(&base, &c.eps_grid, c.trials_per_eps, c.seed, &c.options)
}

/// Re-runs the experiment described by a report's `config` and returns the
/// new report as JSON without `wall_time_secs`.
pub fn replay(config: &Value) -> Result<String> {
    let kind = config
        .get("experiment")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Format("config has no `experiment` key".into()))?;
    match kind {
        "mc-genericity" => {
            let c: GenericityConfig = serde_json::from_value(config.clone())?;
            deterministic_json(&run_genericity_trial(&c.sampler, c.trials, &c.options)?)
        }
        "perturb-probe" => {
            let c: ProbeConfig = serde_json::from_value(config.clone())?;
            let report = match c.base.field {
                ScalarField::Real => probe_replay::<f64>(&c)?,
                ScalarField::Complex => probe_replay::<Complex<f64>>(&c)?,
            };
            deterministic_json(&report)
        }
        "prop1" => {
            let i_max = config
                .get("i_max")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Format("prop1 config needs an integer `i_max`".into()))?;
            let x = config.get("x").and_then(Value::as_f64);
            deterministic_json(&run_prop1(i_max, x)?)
        }
        other => Err(Error::Format(format!("unknown experiment `{other}`"))),
    }
}

/// Resolution of the distance-to-uncontrollability search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_axis: usize,
    pub max_refine_iters: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points_per_axis: 200,
            max_refine_iters: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    /// Upper bound on `min_λ σ_min([JH - λI, B])`.
    pub value: f64,
    pub argmin_re: f64,
    pub argmin_im: f64,
    /// Half-width of the square searched in the complex plane.
    pub box_radius: f64,
    pub evaluations: usize,
}

fn pencil_sigma<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, re: T::Re, im: T::Re) -> Result<T::Re> {
    linalg::sigma_min(&linalg::pencil(a, b, Complex::new(re, im)))
}

/// Compass search from `(re, im)` with initial step `step`.
fn refine<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    start: (T::Re, T::Re, T::Re),
    step: T::Re,
    min_step: T::Re,
    max_iters: usize,
    evals: &mut usize,
) -> Result<(T::Re, T::Re, T::Re)> {
    let (mut re, mut im, mut best) = start;
    let mut step = step;
    let half = linalg::real::<T::Re>(0.5);
    for _ in 0..max_iters {
        if step < min_step {
            break;
        }
        let mut moved = false;
        for (dr, di) in [(step, T::Re::zero()), (-step, T::Re::zero()), (T::Re::zero(), step), (T::Re::zero(), -step)] {
            let v = pencil_sigma(a, b, re + dr, im + di)?;
            *evals += 1;
            if v < best {
                best = v;
                re = re + dr;
                im = im + di;
                moved = true;
                break;
            }
        }
        if !moved {
            step = step * half;
        }
    }
    Ok((re, im, best))
}

/// Grid search over `|Re λ|, |Im λ| ≤ ‖JH‖₂ + 1` for the smallest
/// `σ_min([JH - λI, B])`, refined locally from the best grid point and from
/// every eigenvalue of `JH`.
pub fn distance_to_uncontrollability<T: Scalar>(
    sys: &impl AsRef<PhtSystem<T>>,
    grid: &GridSpec,
) -> Result<DistanceEstimate> {
    let sys = sys.as_ref();
    if grid.points_per_axis < 2 {
        return Err(Error::InvalidParameter("grid needs at least 2 points per axis".into()));
    }
    let a = sys.system_matrix();
    let b = sys.b();
    let radius = linalg::spectral_norm(&a)? + T::Re::one();
    let p = grid.points_per_axis;
    let spacing = (radius + radius) / linalg::real::<T::Re>((p - 1) as f64);
    let coord = |k: usize| -radius + spacing * linalg::real::<T::Re>(k as f64);

    let values: Vec<Result<T::Re>> = (0..p * p)
        .into_par_iter()
        .map(|idx| pencil_sigma(&a, b, coord(idx % p), coord(idx / p)))
        .collect();
    let mut evals = values.len();
    let mut best = (T::Re::zero(), T::Re::zero(), T::Re::infinity());
    for (idx, v) in values.into_iter().enumerate() {
        let v = v?;
        if v < best.2 {
            best = (coord(idx % p), coord(idx / p), v);
        }
    }

    let min_step = linalg::real::<T::Re>(1e-13) * radius;
    let mut starts = vec![(best, spacing)];
    for lambda in linalg::eigenvalues(&a)? {
        let v = pencil_sigma(&a, b, lambda.re, lambda.im)?;
        evals += 1;
        starts.push(((lambda.re, lambda.im, v), spacing * linalg::real(0.25)));
    }
    let mut overall = best;
    for (start, step) in starts {
        let r = refine(&a, b, start, step, min_step, grid.max_refine_iters, &mut evals)?;
        if r.2 < overall.2 {
            overall = r;
        }
    }
    Ok(DistanceEstimate {
        value: overall.2.to_f64_lossy(),
        argmin_re: overall.0.to_f64_lossy(),
        argmin_im: overall.1.to_f64_lossy(),
        box_radius: radius.to_f64_lossy(),
        evaluations: evals,
    })
}


/// The Calkin–Wilf enumeration `1, 1/2, 2, 1/3, 3/2, 2/3, 3, …` of the
/// positive rationals; a bijection from the positive integers.
#[derive(Debug, Clone)]
pub struct CalkinWilf {
    next: Ratio<u64>,
}

impl Default for CalkinWilf {
    fn default() -> Self {
        CalkinWilf {
            next: Ratio::new_raw(1, 1),
        }
    }
}

impl Iterator for CalkinWilf {
    type Item = Ratio<u64>;

    fn next(&mut self) -> Option<Ratio<u64>> {
        let q = self.next;
        let (a, b) = (*q.numer(), *q.denom());
        // 1 / (2⌊q⌋ - q + 1) = b / (2⌊a/b⌋b - a + b)
        let denom = (2 * (a / b) * b + b).checked_sub(a)?;
        self.next = Ratio::new_raw(b, denom);
        Some(q)
    }
}

/// The open set `⋃_{i ≤ i_max} (φ(i) - 1/i², φ(i) + 1/i²) ∩ (0, ∞)` with `φ`
/// the Calkin–Wilf enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalUnion {
    pub i_max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub in_s_up_to_i_max: bool,
    /// Smallest index whose interval contains the point.
    pub witness_index: Option<u64>,
}

impl IntervalUnion {
    pub fn new(i_max: u64) -> Result<Self> {
        if i_max == 0 {
            return Err(Error::InvalidParameter("i_max must be at least 1".into()));
        }
        Ok(IntervalUnion { i_max })
    }

    pub fn center(index: u64) -> Option<Ratio<u64>> {
        CalkinWilf::default().nth((index.checked_sub(1))? as usize)
    }

    pub fn radius(index: u64) -> f64 {
        let i = index as f64;
        1.0 / (i * i)
    }

    /// `Σ_{i ≤ i_max} 2/i²`, an upper bound on the measure of the union.
    pub fn partial_measure(&self) -> f64 {
        prop1_partial_measure(self.i_max)
    }

    pub fn membership(&self, x: f64) -> Result<Membership> {
        prop1_membership(x, self.i_max)
    }
}

/// `π²/3`, the full sum of interval lengths.
pub fn prop1_limit() -> f64 {
    std::f64::consts::PI * std::f64::consts::PI / 3.0
}

/// `Σ_{i=1}^{i_max} 2/i²`, compensated summation in increasing `i`.
pub fn prop1_partial_measure(i_max: u64) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in 1..=i_max {
        let x = i as f64;
        let term = 2.0 / (x * x) - comp;
        let t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    sum
}

pub fn prop1_membership(x: f64, i_max: u64) -> Result<Membership> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("x must be a positive real, got {x}")));
    }
    for (idx, q) in CalkinWilf::default().take(i_max as usize).enumerate() {
        let i = idx as u64 + 1;
        let center = *q.numer() as f64 / *q.denom() as f64;
        if (x - center).abs() < IntervalUnion::radius(i) {
            return Ok(Membership {
                in_s_up_to_i_max: true,
                witness_index: Some(i),
            });
        }
    }
    Ok(Membership {
        in_s_up_to_i_max: false,
        witness_index: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Checkpoint {
    pub i: u64,
    pub partial_measure: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Report {
    pub config: Value,
    pub i_max: u64,
    pub partial_measure: f64,
    pub limit: f64,
    pub gap: f64,
    pub checkpoints: Vec<Prop1Checkpoint>,
    pub membership: Option<Membership>,
    pub wall_time_secs: f64,
}

impl Prop1Report {
    pub fn with_config(mut self, config: Value) -> Self {
        self.config = config;
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,partial_measure,gap\n");
        for c in &self.checkpoints {
            out.push_str(&format!("{},{},{:e}\n", c.i, c.partial_measure, c.gap));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "sum of 2/i^2 for i <= {}: {} (pi^2/3 = {}, gap {:e})",
            self.i_max, self.partial_measure, self.limit, self.gap
        );
        if let Some(m) = &self.membership {
            match m.witness_index {
                Some(i) => s.push_str(&format!("; point covered by interval {i}")),
                None => s.push_str("; point not covered up to i_max"),
            }
        }
        s
    }
}

/// Partial sums at powers of ten up to `i_max` (and at `i_max`), plus an
/// optional membership query.
pub fn run_prop1(i_max: u64, x: Option<f64>) -> Result<Prop1Report> {
    let union = IntervalUnion::new(i_max)?;
    let start = Instant::now();
    let limit = prop1_limit();
    let mut marks: Vec<u64> = std::iter::successors(Some(10u64), |p| p.checked_mul(10))
        .take_while(|p| *p < i_max)
        .collect();
    marks.push(i_max);
    let checkpoints = marks
        .into_iter()
        .map(|i| {
            let partial_measure = prop1_partial_measure(i);
            Prop1Checkpoint {
                i,
                partial_measure,
                gap: limit - partial_measure,
            }
        })
        .collect();
    let partial_measure = union.partial_measure();
    let membership = x.map(|x| union.membership(x)).transpose()?;
    Ok(Prop1Report {
        config: serde_json::json!({ "experiment": "prop1", "i_max": i_max, "x": x }),
        i_max,
        partial_measure,
        limit,
        gap: limit - partial_measure,
        checkpoints,
        membership,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}
