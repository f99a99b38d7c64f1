//! Lepski-type selection of the sieve dimension, plus the oracle and
//! rate formulas used as benchmarks.
//!
//! The candidate set is every integer `J` in `[J_min, Ĵ_max]` with
//! `J_min = ⌊ln ln n⌋` and `Ĵ_max` the first `J` at which
//! `τ̂_J ζ(J)² √(ℓ(J) ln n / n) ≥ 1`, `ℓ(J) = 0.1 ln ln J`. The selected
//! dimension is the smallest candidate whose estimate stays within
//! `c₀(V̂(J) + V̂(J'))` of every larger candidate's.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisSpec, WeightFn};
use crate::dgp::Regime;
use crate::error::{Error, Result};
use crate::estimators::{ahat_matrix, build_design, loo_sums, Sample};
use crate::illposedness::{tau_hat, IllposednessReport};

/// Default Lepski constant `c₀`.
pub const DEFAULT_C0: f64 = 0.5;
/// Default oracle constant `C₀`.
pub const DEFAULT_ORACLE_C0: f64 = 1.0;
/// Floor applied to `ℓ(J)`.
pub const ELL_FLOOR: f64 = 0.01;
/// `J̄^{2+ε} = O(n)` with this ε gives the hard cap `⌊n^{1/(2+ε)}⌋`.
pub const CAP_EPSILON: f64 = 0.1;

/// Smoothness / ill-posedness description used by the rate formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSpec {
    pub regime: Regime,
    pub p: f64,
    pub zeta: f64,
    pub d: usize,
    /// Ellipsoid radius; informational only.
    pub l_radius: f64,
}

impl RateSpec {
    pub fn new(regime: Regime, p: f64, zeta: f64) -> Result<Self> {
        if !(p > 0.0 && zeta > 0.0) {
            return Err(Error::invalid("p and zeta must be positive"));
        }
        Ok(Self {
            regime,
            p,
            zeta,
            d: 1,
            l_radius: 1.0,
        })
    }

    fn df(&self) -> f64 {
        self.d as f64
    }
}

/// `max(1, ⌊ln ln n⌋)`; requires `n ≥ 16`.
pub fn j_min(n: usize) -> Result<usize> {
    if n < 16 {
        return Err(Error::invalid(format!(
            "dimension selection needs n >= 16, got {n}"
        )));
    }
    Ok(((n as f64).ln().ln().floor() as usize).max(1))
}

/// `ℓ(J) = max(0.1 ln ln J, 0.01)`.
pub fn ell(j: usize) -> f64 {
    let j = j as f64;
    let raw = if j > 1.0 { 0.1 * j.ln().ln() } else { f64::NEG_INFINITY };
    if raw.is_finite() {
        raw.max(ELL_FLOOR)
    } else {
        ELL_FLOOR
    }
}

/// Hard cap `⌊n^{1/2.1}⌋`.
pub fn j_cap(n: usize) -> usize {
    ((n as f64).powf(1.0 / (2.0 + CAP_EPSILON)).floor() as usize).max(1)
}

fn min_dimension(family: BasisFamily) -> usize {
    match family {
        BasisFamily::BSpline { order } => order,
        _ => 1,
    }
}

/// Estimates computed at one sieve dimension (with `K = J`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateEval {
    pub j: usize,
    pub f_hat: f64,
    pub report: IllposednessReport,
    pub rank_deficient: bool,
}

/// Builds the `K = J` design and returns `f̂_J` together with `τ̂_J`.
pub fn evaluate_dimension(
    sample: &Sample,
    family: BasisFamily,
    mu: &WeightFn,
    j: usize,
) -> Result<CandidateEval> {
    let spec = BasisSpec::new(family, j)?;
    let design = build_design(sample, spec, spec, mu)?;
    let report = tau_hat(&design)?;
    let ahat = ahat_matrix(&design)?;
    let f_hat = loo_sums(&sample.y, &design, &ahat.matrix)?.loo();
    Ok(CandidateEval {
        j,
        f_hat,
        report,
        rank_deficient: ahat.rank_deficient,
    })
}

/// One step of the `Ĵ_max` scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanStep {
    pub j: usize,
    /// `τ̂_J ζ(J)² √(ℓ(J) ln n / n)`; `None` when `τ̂_J` overflowed.
    pub statistic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JMaxScan {
    pub j_start: usize,
    pub j_cap: usize,
    pub j_max_hat: usize,
    /// The scan ran into `J_cap` without the threshold firing.
    pub hit_cap: bool,
    /// The scan ended because `τ̂` overflowed at `j_max_hat`.
    pub overflow: bool,
    pub steps: Vec<ScanStep>,
}

/// Scans upward from `J_start = max(J_min + 1, 3)` for `Ĵ_max`.
pub fn j_max_hat(sample: &Sample, family: BasisFamily, mu: &WeightFn) -> Result<JMaxScan> {
    let mut cache = BTreeMap::new();
    scan_j_max(sample, family, mu, &mut cache)
}

fn scan_j_max(
    sample: &Sample,
    family: BasisFamily,
    mu: &WeightFn,
    cache: &mut BTreeMap<usize, CandidateEval>,
) -> Result<JMaxScan> {
    let n = sample.len();
    let jmin = j_min(n)?;
    let j_start = (jmin + 1).max(3).max(min_dimension(family));
    let cap = j_cap(n).max(j_start);
    let log_ratio = (n as f64).ln() / n as f64;
    let mut steps = Vec::new();
    for j in j_start..=cap {
        let eval = match evaluate_dimension(sample, family, mu, j) {
            Ok(e) => e,
            Err(Error::IllposednessOverflow { .. }) => {
                steps.push(ScanStep { j, statistic: None });
                return Ok(JMaxScan {
                    j_start,
                    j_cap: cap,
                    j_max_hat: j,
                    hit_cap: false,
                    overflow: true,
                    steps,
                });
            }
            Err(e) => return Err(e),
        };
        cache.insert(j, eval);
        let zeta = BasisSpec { family, dim: j }.zeta_growth();
        let stat = eval.report.tau_hat * zeta * zeta * (ell(j) * log_ratio).sqrt();
        steps.push(ScanStep {
            j,
            statistic: Some(stat),
        });
        if stat >= 1.0 {
            return Ok(JMaxScan {
                j_start,
                j_cap: cap,
                j_max_hat: j,
                hit_cap: false,
                overflow: false,
                steps,
            });
        }
    }
    Ok(JMaxScan {
        j_start,
        j_cap: cap,
        j_max_hat: cap,
        hit_cap: true,
        overflow: false,
        steps,
    })
}

/// The index set `Î` with per-candidate estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    pub j_min: usize,
    pub j_max_hat: usize,
    pub candidates: Vec<CandidateEval>,
}

impl CandidateSet {
    pub fn new(candidates: Vec<CandidateEval>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::invalid("candidate set is empty"));
        }
        let mut candidates = candidates;
        candidates.sort_by_key(|c| c.j);
        if candidates.windows(2).any(|w| w[0].j == w[1].j) {
            return Err(Error::invalid("duplicate candidate dimension"));
        }
        Ok(Self {
            j_min: candidates[0].j,
            j_max_hat: candidates[candidates.len() - 1].j,
            candidates,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveResult {
    pub j_hat: usize,
    pub f_hat: f64,
    pub c0: f64,
    pub candidate_set: CandidateSet,
    /// Per candidate (ascending J): passed every comparison with larger J'.
    pub accepted: Vec<bool>,
    /// `|f̂_J − f̂_J'|`, indexed like the candidates.
    pub differences: Vec<Vec<f64>>,
    /// `c₀ (V̂(J) + V̂(J'))`.
    pub thresholds: Vec<Vec<f64>>,
    /// The `Ĵ_max` scan, when the set was built from data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<JMaxScan>,
}

/// Applies the Lepski rule to a complete candidate set.
pub fn select_j(set: &CandidateSet, c0: f64) -> Result<AdaptiveResult> {
    if !(c0 >= 0.0 && c0.is_finite()) {
        return Err(Error::invalid(format!("c0 must be nonnegative, got {c0}")));
    }
    // Storage order does not matter: work on a sorted copy.
    let set = CandidateSet::new(set.candidates.clone())?;
    let cands = &set.candidates;
    let m = cands.len();
    let mut differences = vec![vec![0.0; m]; m];
    let mut thresholds = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in 0..m {
            differences[a][b] = (cands[a].f_hat - cands[b].f_hat).abs();
            thresholds[a][b] = c0 * (cands[a].report.v_hat + cands[b].report.v_hat);
        }
    }
    let accepted: Vec<bool> = (0..m)
        .map(|a| (a..m).all(|b| differences[a][b] <= thresholds[a][b]))
        .collect();
    let idx = accepted
        .iter()
        .position(|&ok| ok)
        .expect("largest candidate is always accepted");
    Ok(AdaptiveResult {
        j_hat: cands[idx].j,
        f_hat: cands[idx].f_hat,
        c0,
        accepted,
        differences,
        thresholds,
        candidate_set: set,
        scan: None,
    })
}

/// Builds the data-driven candidate set `Î` (scan plus evaluations).
pub fn build_candidate_set(
    sample: &Sample,
    family: BasisFamily,
    mu: &WeightFn,
) -> Result<(CandidateSet, JMaxScan)> {
    let n = sample.len();
    let mut cache = BTreeMap::new();
    let scan = scan_j_max(sample, family, mu, &mut cache)?;
    let lo = j_min(n)?.max(min_dimension(family));
    // An overflowing dimension is infeasible and leaves the set.
    let hi = if scan.overflow {
        scan.j_max_hat - 1
    } else {
        scan.j_max_hat
    };
    let mut candidates = Vec::new();
    for j in lo..=hi {
        if let Some(e) = cache.get(&j) {
            candidates.push(*e);
            continue;
        }
        match evaluate_dimension(sample, family, mu, j) {
            Ok(e) => candidates.push(e),
            // Below J_start an overflow truncates the set from above.
            Err(Error::IllposednessOverflow { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    if candidates.is_empty() {
        return Err(Error::Numeric(format!(
            "no feasible sieve dimension between {lo} and {hi}"
        )));
    }
    let mut set = CandidateSet::new(candidates)?;
    set.j_min = lo;
    Ok((set, scan))
}

/// Full adaptive estimate: candidate set, per-J estimates, Lepski rule.
pub fn adaptive_estimate(
    sample: &Sample,
    family: BasisFamily,
    mu: &WeightFn,
    c0: f64,
) -> Result<AdaptiveResult> {
    let (set, scan) = build_candidate_set(sample, family, mu)?;
    let mut result = select_j(&set, c0)?;
    result.candidate_set.j_min = set.j_min;
    result.scan = Some(scan);
    Ok(result)
}

/// `V(J) = τ_J² √(J ln n) / n` with population `τ_J`.
pub fn variance_proxy(tau: f64, j: usize, n: usize) -> f64 {
    crate::illposedness::v_hat(tau, j, n)
}

/// Oracle dimension `J₀ = min{J : J^{-2p/d} ≤ C₀ V(J)}` searched over
/// `1..=tau_seq.len()`.
pub fn oracle_j0(rate: &RateSpec, tau_seq: &[f64], n: usize, big_c0: f64) -> Result<usize> {
    if !(big_c0 > 0.0) {
        return Err(Error::invalid("C0 must be positive"));
    }
    if tau_seq.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid("tau sequence must be positive"));
    }
    if tau_seq.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("tau sequence must be nondecreasing"));
    }
    let exponent = -2.0 * rate.p / rate.df();
    for (i, &tau) in tau_seq.iter().enumerate() {
        let j = i + 1;
        if (j as f64).powf(exponent) <= big_c0 * variance_proxy(tau, j, n) {
            return Ok(j);
        }
    }
    Err(Error::RangeExhausted(format!(
        "no J <= {} satisfies the oracle inequality; extend the tau sequence",
        tau_seq.len()
    )))
}

/// Rate-optimal deterministic dimension, `round(scale · J*(n))`, at least 1.
pub fn optimal_j(rate: &RateSpec, n: usize, scale: f64) -> Result<usize> {
    if !(scale > 0.0) {
        return Err(Error::invalid("scale must be positive"));
    }
    let (p, zeta, d) = (rate.p, rate.zeta, rate.df());
    let nf = n as f64;
    let base = match rate.regime {
        Regime::Mild => nf.powf(2.0 * d / (4.0 * (p + zeta) + d)),
        Regime::Severe => {
            let inner = nf.ln() - (4.0 * p + d) / (2.0 * zeta) * nf.ln().ln();
            if !(inner > 0.0) {
                return Err(Error::invalid(format!(
                    "severe-case dimension undefined at n = {n}: ln n - ((4p+d)/(2 zeta)) ln ln n = {inner:.4}"
                )));
            }
            inner.powf(d / zeta)
        }
    };
    Ok(((scale * base).round() as usize).max(1))
}

/// Power-law exponent `a` in `r_n = n^{-a}` for the mild regime; `None` in
/// the severe regime, where the rate is logarithmic.
pub fn minimax_exponent(rate: &RateSpec) -> Option<f64> {
    match rate.regime {
        Regime::Mild => {
            let (p, zeta, d) = (rate.p, rate.zeta, rate.df());
            Some(if p <= zeta + d / 4.0 {
                4.0 * p / (4.0 * (p + zeta) + d)
            } else {
                0.5
            })
        }
        Regime::Severe => None,
    }
}

/// Lower-bound rate `r_n`.
pub fn minimax_rate(rate: &RateSpec, n: usize) -> f64 {
    let nf = n as f64;
    match minimax_exponent(rate) {
        Some(a) => nf.powf(-a),
        None => nf.ln().powf(-2.0 * rate.p / rate.zeta),
    }
}
