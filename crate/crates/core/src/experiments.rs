//! Monte Carlo engine: replications over sample sizes, RMSE tables, fitted
//! log-log rate slopes and the oracle-inequality pass rate.
//!
//! Every replication draws from its own stream seeded by
//! `(master_seed, n, rep)`, so results do not depend on scheduling or on
//! which other replications ran.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisSpec, WeightFn};
use crate::dgp::{make_dgp, replication_seed, DgpParams, DgpSpec};
use crate::error::{Error, Result};
use crate::estimators::{ahat_matrix, build_design, fit_with_ahat, loo_sums, quad_plugin, Sample};
use crate::illposedness::{tau_hat, v_hat};
use crate::lepski::{adaptive_estimate, minimax_exponent, oracle_j0, optimal_j, RateSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Leave-one-out estimator at the oracle dimension `J₀`.
    LooOracleJ,
    /// Leave-one-out estimator at the rate-optimal deterministic dimension.
    LooOptimalJ,
    /// Plug-in `∫ĥ²` at the rate-optimal deterministic dimension.
    Plugin,
    /// Leave-one-out estimator at the Lepski-selected dimension.
    Adaptive,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::LooOracleJ,
        EstimatorKind::LooOptimalJ,
        EstimatorKind::Plugin,
        EstimatorKind::Adaptive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::LooOracleJ => "loo_oracle_j",
            EstimatorKind::LooOptimalJ => "loo_optimal_j",
            EstimatorKind::Plugin => "plugin",
            EstimatorKind::Adaptive => "adaptive",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name.trim())
            .ok_or_else(|| Error::invalid(format!("unknown estimator `{name}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dgp: DgpParams,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub estimators: Vec<EstimatorKind>,
    /// Lepski constant `c₀`.
    pub c0: f64,
    /// Oracle constant `C₀`.
    #[serde(rename = "C0")]
    pub big_c0: f64,
    /// Multiplier on the rate-optimal dimension.
    pub scale: f64,
    pub family: BasisFamily,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    /// Record wall-clock times. Off by default so output files are
    /// reproducible byte for byte.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(dgp: DgpParams, sample_sizes: Vec<usize>, replications: usize) -> Self {
        Self {
            dgp,
            sample_sizes,
            replications,
            master_seed: 20_240_601,
            estimators: vec![EstimatorKind::LooOptimalJ],
            c0: crate::lepski::DEFAULT_C0,
            big_c0: crate::lepski::DEFAULT_ORACLE_C0,
            scale: 1.0,
            family: BasisFamily::Cosine,
            threads: 0,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::config(
                "experiment.replications",
                format!("need at least 2 replications, got {}", self.replications),
            ));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::config("experiment.sample_sizes", "list is empty"));
        }
        if self.sample_sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "experiment.sample_sizes",
                "sample sizes must be strictly ascending",
            ));
        }
        if self.sample_sizes[0] < 16 {
            return Err(Error::config(
                "experiment.sample_sizes",
                format!("smallest sample size {} is below 16", self.sample_sizes[0]),
            ));
        }
        if self.estimators.is_empty() {
            return Err(Error::config("experiment.estimators", "no estimator selected"));
        }
        let mut seen = self.estimators.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.estimators.len() {
            return Err(Error::config("experiment.estimators", "duplicate estimator"));
        }
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            return Err(Error::config("tuning.c0", "must be nonnegative"));
        }
        if !(self.big_c0 > 0.0 && self.big_c0.is_finite()) {
            return Err(Error::config("tuning.C0", "must be positive"));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::config("tuning.scale", "must be positive"));
        }
        make_dgp(self.dgp.clone()).map_err(|e| Error::config("dgp", e.to_string()))?;
        Ok(())
    }

    pub fn rate_spec(&self) -> Result<RateSpec> {
        RateSpec::new(self.dgp.regime, self.dgp.p, self.dgp.zeta)
    }
}

/// Deterministic dimensions used at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizePlan {
    pub n: usize,
    /// Oracle `J₀`, when it could be computed.
    pub j0: Option<usize>,
    /// Population `τ_{J₀}`.
    pub tau_j0: Option<f64>,
    pub j_optimal: Option<usize>,
}

fn min_dimension(family: BasisFamily) -> usize {
    match family {
        BasisFamily::BSpline { order } => order,
        _ => 1,
    }
}

pub fn plan_sizes(config: &ExperimentConfig, dgp: &DgpSpec) -> Result<Vec<SizePlan>> {
    let rate = config.rate_spec()?;
    let taus = dgp.true_tau_seq(dgp.nu.len())?;
    let floor = min_dimension(config.family);
    Ok(config
        .sample_sizes
        .iter()
        .map(|&n| {
            let j0 = oracle_j0(&rate, &taus, n, config.big_c0).ok();
            SizePlan {
                n,
                j0: j0.map(|j| j.max(floor)),
                tau_j0: j0.map(|j| taus[j.max(floor).min(taus.len()) - 1]),
                j_optimal: optimal_j(&rate, n, config.scale).ok().map(|j| j.max(floor)),
            }
        })
        .collect())
}

/// One line of the raw results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub n: usize,
    pub rep: usize,
    pub estimator: EstimatorKind,
    pub estimate: Option<f64>,
    pub j_used: Option<usize>,
    pub tau_hat: Option<f64>,
    pub wall_ms: f64,
    /// `ok`, or `fail:<kind>`.
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.estimate.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawResults {
    pub truth: f64,
    pub plans: Vec<SizePlan>,
    /// Sorted by `(n, rep, estimator)`.
    pub rows: Vec<ResultRow>,
}

struct Outcome {
    estimate: f64,
    j: usize,
    tau: f64,
}

fn fixed_dimension(
    sample: &Sample,
    family: BasisFamily,
    j: usize,
    want_loo: bool,
    want_plugin: bool,
) -> Result<(Option<Outcome>, Option<Outcome>)> {
    let spec = BasisSpec::new(family, j)?;
    let design = build_design(sample, spec, spec, &WeightFn::Uniform)?;
    let tau = tau_hat(&design).map(|r| r.tau_hat).unwrap_or(f64::INFINITY);
    let ahat = ahat_matrix(&design)?;
    let loo = if want_loo {
        let estimate = loo_sums(&sample.y, &design, &ahat.matrix)?.loo();
        Some(Outcome { estimate, j, tau })
    } else {
        None
    };
    let plugin = if want_plugin {
        let fit = fit_with_ahat(sample, &design, ahat);
        Some(Outcome {
            estimate: quad_plugin(&fit),
            j,
            tau,
        })
    } else {
        None
    };
    Ok((loo, plugin))
}

fn missing_dimension(what: &str, n: usize) -> Error {
    Error::RangeExhausted(format!("no {what} dimension at n = {n}"))
}

fn run_replication(
    config: &ExperimentConfig,
    dgp: &DgpSpec,
    plan: &SizePlan,
    rep: usize,
) -> Vec<ResultRow> {
    let n = plan.n;
    let seed = replication_seed(config.master_seed, n as u64, rep as u64);
    let start = Instant::now();
    let sample = dgp.draw_sample(n, seed);
    let draw_ms = start.elapsed().as_secs_f64() * 1e3;

    let wants = |k: EstimatorKind| config.estimators.contains(&k);
    let mut outcomes: BTreeMap<EstimatorKind, (Result<Outcome>, f64)> = BTreeMap::new();
    match &sample {
        Err(e) => {
            for &k in &config.estimators {
                outcomes.insert(k, (Err(e.clone()), draw_ms));
            }
        }
        Ok(sample) => {
            if wants(EstimatorKind::LooOptimalJ) || wants(EstimatorKind::Plugin) {
                let t = Instant::now();
                let res = plan
                    .j_optimal
                    .ok_or_else(|| missing_dimension("rate-optimal", n))
                    .and_then(|j| {
                        fixed_dimension(
                            sample,
                            config.family,
                            j,
                            wants(EstimatorKind::LooOptimalJ),
                            wants(EstimatorKind::Plugin),
                        )
                    });
                let ms = t.elapsed().as_secs_f64() * 1e3;
                match res {
                    Ok((loo, plugin)) => {
                        if let Some(o) = loo {
                            outcomes.insert(EstimatorKind::LooOptimalJ, (Ok(o), ms));
                        }
                        if let Some(o) = plugin {
                            outcomes.insert(EstimatorKind::Plugin, (Ok(o), ms));
                        }
                    }
                    Err(e) => {
                        for k in [EstimatorKind::LooOptimalJ, EstimatorKind::Plugin] {
                            if wants(k) {
                                outcomes.insert(k, (Err(e.clone()), ms));
                            }
                        }
                    }
                }
            }
            if wants(EstimatorKind::LooOracleJ) {
                let t = Instant::now();
                let res = plan
                    .j0
                    .ok_or_else(|| missing_dimension("oracle", n))
                    .and_then(|j| fixed_dimension(sample, config.family, j, true, false))
                    .map(|(loo, _)| loo.expect("requested"));
                outcomes.insert(
                    EstimatorKind::LooOracleJ,
                    (res, t.elapsed().as_secs_f64() * 1e3),
                );
            }
            if wants(EstimatorKind::Adaptive) {
                let t = Instant::now();
                let res = adaptive_estimate(sample, config.family, &WeightFn::Uniform, config.c0)
                    .map(|r| {
                        let tau = r
                            .candidate_set
                            .candidates
                            .iter()
                            .find(|c| c.j == r.j_hat)
                            .map(|c| c.report.tau_hat)
                            .unwrap_or(f64::NAN);
                        Outcome {
                            estimate: r.f_hat,
                            j: r.j_hat,
                            tau,
                        }
                    });
                outcomes.insert(
                    EstimatorKind::Adaptive,
                    (res, t.elapsed().as_secs_f64() * 1e3),
                );
            }
        }
    }

    outcomes
        .into_iter()
        .map(|(estimator, (res, ms))| {
            let wall_ms = if config.timing { draw_ms + ms } else { 0.0 };
            match res {
                Ok(o) if o.estimate.is_finite() => ResultRow {
                    n,
                    rep,
                    estimator,
                    estimate: Some(o.estimate),
                    j_used: Some(o.j),
                    tau_hat: o.tau.is_finite().then_some(o.tau),
                    wall_ms,
                    status: "ok".to_string(),
                },
                Ok(_) => ResultRow {
                    n,
                    rep,
                    estimator,
                    estimate: None,
                    j_used: None,
                    tau_hat: None,
                    wall_ms,
                    status: "fail:nonfinite".to_string(),
                },
                Err(e) => {
                    log::debug!("{} n={n} rep={rep}: {e}", estimator.name());
                    ResultRow {
                        n,
                        rep,
                        estimator,
                        estimate: None,
                        j_used: None,
                        tau_hat: None,
                        wall_ms,
                        status: format!("fail:{}", e.kind()),
                    }
                }
            }
        })
        .collect()
}

/// Runs every `(n, rep)` pair. Estimator failures become `NA` rows.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RawResults> {
    config.validate()?;
    let dgp = make_dgp(config.dgp.clone())?;
    let plans = plan_sizes(config, &dgp)?;
    let tasks: Vec<(usize, usize)> = (0..plans.len())
        .flat_map(|i| (0..config.replications).map(move |r| (i, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    let chunks: Vec<Vec<ResultRow>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, r)| run_replication(config, &dgp, &plans[i], r))
            .collect()
    });
    let mut rows: Vec<ResultRow> = chunks.into_iter().flatten().collect();
    rows.sort_by(|a, b| (a.n, a.rep, a.estimator).cmp(&(b.n, b.rep, b.estimator)));
    Ok(RawResults {
        truth: dgp.true_functional(),
        plans,
        rows,
    })
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".to_string())
}

/// Writes the raw table with columns
/// `n,rep,estimator,estimate,j_used,tau_hat,wall_ms,status`.
pub fn write_csv<W: Write>(results: &RawResults, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Resource(format!("writing results: {e}"));
    w.write_record([
        "n", "rep", "estimator", "estimate", "j_used", "tau_hat", "wall_ms", "status",
    ])
    .map_err(io)?;
    for r in &results.rows {
        w.write_record([
            r.n.to_string(),
            r.rep.to_string(),
            r.estimator.name().to_string(),
            fmt_opt(r.estimate),
            fmt_opt(r.j_used),
            fmt_opt(r.tau_hat),
            r.wall_ms.to_string(),
            r.status.clone(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Resource(format!("writing results: {e}")))
}

/// Error moments for one `(n, estimator)` cell. `variance` divides by the
/// number of successful replications so that `rmse² = bias² + variance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub estimator: EstimatorKind,
    pub ok: usize,
    pub failed: usize,
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub rmse: f64,
    pub mean_j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem31Cell {
    pub n: usize,
    pub j0: usize,
    pub tau_j0: f64,
    pub pairs: usize,
    pub pass_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub truth: f64,
    pub cells: Vec<CellSummary>,
    /// Fitted slope of log RMSE on log n, per estimator.
    pub slopes: BTreeMap<String, Option<SlopeFit>>,
    /// `a` in the lower bound `n^{-a}`; absent in the severe regime.
    pub theoretical_exponent: Option<f64>,
    pub theorem31: Vec<Theorem31Cell>,
    /// Pooled over all sample sizes.
    pub theorem31_pass_rate: Option<f64>,
    pub failure_rate: f64,
}

impl RateReport {
    pub fn cell(&self, n: usize, estimator: EstimatorKind) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.estimator == estimator)
    }

    pub fn rmse_series(&self, estimator: EstimatorKind) -> Vec<(usize, f64)> {
        self.cells
            .iter()
            .filter(|c| c.estimator == estimator && c.ok > 0)
            .map(|c| (c.n, c.rmse))
            .collect()
    }
}

/// Estimates grouped by `(n, estimator)`, keyed by replication.
fn group(results: &RawResults) -> BTreeMap<(usize, EstimatorKind), Vec<&ResultRow>> {
    let mut map: BTreeMap<(usize, EstimatorKind), Vec<&ResultRow>> = BTreeMap::new();
    for r in &results.rows {
        map.entry((r.n, r.estimator)).or_default().push(r);
    }
    map
}

pub fn summarize_cell(
    n: usize,
    estimator: EstimatorKind,
    estimates: &[f64],
    js: &[usize],
    failed: usize,
    truth: f64,
) -> CellSummary {
    let m = estimates.len();
    if m == 0 {
        return CellSummary {
            n,
            estimator,
            ok: 0,
            failed,
            mean: f64::NAN,
            bias: f64::NAN,
            variance: f64::NAN,
            rmse: f64::NAN,
            mean_j: f64::NAN,
        };
    }
    let mf = m as f64;
    let mean = estimates.iter().sum::<f64>() / mf;
    let bias = mean - truth;
    let variance = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / mf;
    CellSummary {
        n,
        estimator,
        ok: m,
        failed,
        mean,
        bias,
        variance,
        rmse: (bias * bias + variance).sqrt(),
        mean_j: js.iter().sum::<usize>() as f64 / js.len().max(1) as f64,
    }
}

/// OLS of `ln rmse` on `ln n`. Points with zero RMSE are dropped; at least
/// three must remain.
pub fn rate_slope(points: &[(usize, f64)]) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, r)| *r > 0.0 && r.is_finite())
        .map(|&(n, r)| ((n as f64).ln(), r.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::invalid(format!(
            "slope needs at least 3 positive RMSE values, got {}",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("sample sizes must differ"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let stderr = (rss / (m - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        stderr,
        points: pts.len(),
    })
}

/// Fraction of paired replications with
/// `|f̂_Ĵ − f| ≤ 3c₀ V(J₀) + |f̂_{J₀} − f|`, where `V` uses population `τ_{J₀}`.
pub fn theorem31_check(
    adaptive: &[f64],
    oracle: &[f64],
    truth: f64,
    tau_j0: f64,
    j0: usize,
    n: usize,
    c0: f64,
) -> Result<f64> {
    if adaptive.len() != oracle.len() {
        return Err(Error::invalid("adaptive and oracle results must be paired"));
    }
    if adaptive.is_empty() {
        return Err(Error::invalid("no paired replications"));
    }
    let slack = 3.0 * c0 * v_hat(tau_j0, j0, n);
    let pass = adaptive
        .iter()
        .zip(oracle)
        .filter(|(a, o)| (*a - truth).abs() <= slack + (*o - truth).abs())
        .count();
    Ok(pass as f64 / adaptive.len() as f64)
}

fn paired(
    groups: &BTreeMap<(usize, EstimatorKind), Vec<&ResultRow>>,
    n: usize,
    a: EstimatorKind,
    b: EstimatorKind,
) -> (Vec<f64>, Vec<f64>) {
    let index = |k| -> BTreeMap<usize, f64> {
        groups
            .get(&(n, k))
            .map(|rows| {
                rows.iter()
                    .filter_map(|r| r.estimate.map(|e| (r.rep, e)))
                    .collect()
            })
            .unwrap_or_default()
    };
    let ia = index(a);
    let ib = index(b);
    ia.iter()
        .filter_map(|(rep, ea)| ib.get(rep).map(|eb| (*ea, *eb)))
        .unzip()
}

/// Builds the RMSE table, slopes and the oracle-inequality pass rates.
pub fn summarize(results: &RawResults, config: &ExperimentConfig) -> Result<RateReport> {
    let groups = group(results);
    let truth = results.truth;
    let mut cells = Vec::new();
    for ((n, est), rows) in &groups {
        let ok: Vec<&&ResultRow> = rows.iter().filter(|r| r.is_ok()).collect();
        let estimates: Vec<f64> = ok.iter().filter_map(|r| r.estimate).collect();
        let js: Vec<usize> = ok.iter().filter_map(|r| r.j_used).collect();
        cells.push(summarize_cell(
            *n,
            *est,
            &estimates,
            &js,
            rows.len() - ok.len(),
            truth,
        ));
    }
    let total = results.rows.len();
    let failures = results.rows.iter().filter(|r| !r.is_ok()).count();

    let mut report = RateReport {
        truth,
        cells,
        slopes: BTreeMap::new(),
        theoretical_exponent: minimax_exponent(&config.rate_spec()?),
        theorem31: Vec::new(),
        theorem31_pass_rate: None,
        failure_rate: if total == 0 {
            0.0
        } else {
            failures as f64 / total as f64
        },
    };
    for &est in &config.estimators {
        let fit = rate_slope(&report.rmse_series(est)).ok();
        report.slopes.insert(est.name().to_string(), fit);
    }

    if config.estimators.contains(&EstimatorKind::Adaptive)
        && config.estimators.contains(&EstimatorKind::LooOracleJ)
    {
        let (mut pass, mut pairs) = (0.0, 0usize);
        for plan in &results.plans {
            let (Some(j0), Some(tau_j0)) = (plan.j0, plan.tau_j0) else {
                continue;
            };
            let (a, o) = paired(
                &groups,
                plan.n,
                EstimatorKind::Adaptive,
                EstimatorKind::LooOracleJ,
            );
            if a.is_empty() {
                continue;
            }
            let rate = theorem31_check(&a, &o, truth, tau_j0, j0, plan.n, config.c0)?;
            pass += rate * a.len() as f64;
            pairs += a.len();
            report.theorem31.push(Theorem31Cell {
                n: plan.n,
                j0,
                tau_j0,
                pairs: a.len(),
                pass_rate: rate,
            });
        }
        if pairs > 0 {
            report.theorem31_pass_rate = Some(pass / pairs as f64);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub pairs: usize,
    pub rmse_a: f64,
    pub rmse_b: f64,
    /// `rmse_a / rmse_b`; 1 when both vanish.
    pub ratio: f64,
    /// Mean of `est_a − est_b` over paired replications.
    pub mean_difference: f64,
}

/// Paired comparison of two estimators run on the same streams.
pub fn compare_estimators(
    results: &RawResults,
    a: EstimatorKind,
    b: EstimatorKind,
) -> Vec<ComparisonRow> {
    let groups = group(results);
    let mut ns: Vec<usize> = results.rows.iter().map(|r| r.n).collect();
    ns.dedup();
    let rmse = |v: &[f64]| {
        (v.iter().map(|e| (e - results.truth).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    ns.into_iter()
        .filter_map(|n| {
            let (ea, eb) = paired(&groups, n, a, b);
            if ea.is_empty() {
                return None;
            }
            let (ra, rb) = (rmse(&ea), rmse(&eb));
            let ratio = if ra == rb { 1.0 } else { ra / rb };
            let mean_difference =
                ea.iter().zip(&eb).map(|(x, y)| x - y).sum::<f64>() / ea.len() as f64;
            Some(ComparisonRow {
                n,
                pairs: ea.len(),
                rmse_a: ra,
                rmse_b: rb,
                ratio,
                mean_difference,
            })
        })
        .collect()
}

/// Leave-one-out versus plug-in at the rate-optimal dimension.
pub fn compare_loo_plugin(results: &RawResults) -> Vec<ComparisonRow> {
    compare_estimators(results, EstimatorKind::LooOptimalJ, EstimatorKind::Plugin)
}
