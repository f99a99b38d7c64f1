//! Sieve 2SLS regression and the quadratic-functional estimators built on it.
//!
//! With `Ψ` (n×J) the regressor design and `B` (n×K) the instrument design,
//! the 2SLS matrix is
//!
//! ```text
//! Â = n [Ψ'B (B'B)⁻ B'Ψ]⁻ Ψ'B (B'B)⁻
//! ```
//!
//! and the leave-one-out estimator of `∫h²μ` is the U-statistic
//!
//! ```text
//! f̂_J = 2/(n(n-1)) Σ_{i<i'} Y_i Y_i' b(W_i)' Â' G_μ Â b(W_i').
//! ```

use nalgebra::{DMatrix, DVector};

use crate::basis::{BasisSpec, WeightFn};
use crate::error::{Error, Result};
use crate::linalg::{pinv, sym_sqrt, TolerancePolicy};

/// Largest sample accepted by the O(n²) reference implementation.
pub const BRUTEFORCE_MAX_N: usize = 5000;

/// Observed `(Y, X, W)` triples with `X, W ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl Sample {
    pub fn new(y: Vec<f64>, x: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if x.len() != n || w.len() != n {
            return Err(Error::invalid(format!(
                "sample columns differ in length: y={}, x={}, w={}",
                n,
                x.len(),
                w.len()
            )));
        }
        if n < 4 {
            return Err(Error::invalid(format!("need at least 4 observations, got {n}")));
        }
        for (i, ((yi, xi), wi)) in y.iter().zip(&x).zip(&w).enumerate() {
            if !(yi.is_finite() && xi.is_finite() && wi.is_finite()) {
                return Err(Error::invalid(format!("observation {i} is not finite")));
            }
            if !(0.0..=1.0).contains(xi) {
                return Err(Error::Domain { what: "x", value: *xi });
            }
            if !(0.0..=1.0).contains(wi) {
                return Err(Error::Domain { what: "w", value: *wi });
            }
        }
        Ok(Self { y, x, w })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Applies a row permutation: row `i` of the result is row `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            y: perm.iter().map(|&i| self.y[i]).collect(),
            x: perm.iter().map(|&i| self.x[i]).collect(),
            w: perm.iter().map(|&i| self.w[i]).collect(),
        }
    }

    pub fn with_y(&self, y: Vec<f64>) -> Result<Self> {
        Self::new(y, self.x.clone(), self.w.clone())
    }
}

/// Basis matrices for one sample and one `(J, K)` pair.
#[derive(Debug, Clone)]
pub struct SieveDesign {
    pub psi_spec: BasisSpec,
    pub b_spec: BasisSpec,
    pub mu: WeightFn,
    /// n×J
    pub psi: DMatrix<f64>,
    /// n×K
    pub b: DMatrix<f64>,
    /// J×J
    pub g_mu: DMatrix<f64>,
    pub tol: TolerancePolicy,
}

impl SieveDesign {
    pub fn n(&self) -> usize {
        self.psi.nrows()
    }

    pub fn j(&self) -> usize {
        self.psi_spec.dim
    }

    pub fn k(&self) -> usize {
        self.b_spec.dim
    }
}

pub fn build_design(
    sample: &Sample,
    psi_spec: BasisSpec,
    b_spec: BasisSpec,
    mu: &WeightFn,
) -> Result<SieveDesign> {
    build_design_with(sample, psi_spec, b_spec, mu, TolerancePolicy::default())
}

pub fn build_design_with(
    sample: &Sample,
    psi_spec: BasisSpec,
    b_spec: BasisSpec,
    mu: &WeightFn,
    tol: TolerancePolicy,
) -> Result<SieveDesign> {
    if b_spec.dim < psi_spec.dim {
        return Err(Error::invalid(format!(
            "instrument dimension K = {} is below J = {}",
            b_spec.dim, psi_spec.dim
        )));
    }
    let psi = psi_spec.design_matrix(&sample.x)?;
    let b = b_spec.design_matrix(&sample.w)?;
    let g_mu = psi_spec.gram_matrix(mu)?;
    Ok(SieveDesign {
        psi_spec,
        b_spec,
        mu: mu.clone(),
        psi,
        b,
        g_mu,
        tol,
    })
}

/// `Â` together with a flag raised when either generalized inverse dropped
/// a direction.
#[derive(Debug, Clone)]
pub struct Ahat {
    pub matrix: DMatrix<f64>,
    pub rank_deficient: bool,
}

pub fn ahat_matrix(design: &SieveDesign) -> Result<Ahat> {
    let n = design.n();
    if n < design.j() {
        return Err(Error::invalid(format!(
            "need n >= J, got n = {n}, J = {}",
            design.j()
        )));
    }
    let btb = design.b.transpose() * &design.b;
    let btb_inv = pinv(&btb, design.tol);
    let psi_t_b = design.psi.transpose() * &design.b;
    let psi_b_btbinv = &psi_t_b * &btb_inv.matrix;
    let middle = &psi_b_btbinv * psi_t_b.transpose();
    let middle = (&middle + middle.transpose()) * 0.5;
    let middle_inv = pinv(&middle, design.tol);
    let rank_deficient = btb_inv.truncated || middle_inv.truncated;
    if rank_deficient {
        log::warn!(
            "ahat: generalized inverse truncated at J = {}, K = {}, n = {n}",
            design.j(),
            design.k()
        );
    }
    Ok(Ahat {
        matrix: middle_inv.matrix * psi_b_btbinv * n as f64,
        rank_deficient,
    })
}

/// A fitted sieve NPIV regression `ĥ(x) = ψ(x)'ĉ`.
#[derive(Debug, Clone)]
pub struct SieveFit {
    pub coefficients: DVector<f64>,
    pub a_hat: DMatrix<f64>,
    pub rank_deficient: bool,
    pub psi_spec: BasisSpec,
    pub g_mu: DMatrix<f64>,
}

impl SieveFit {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let row = self.psi_spec.eval(x)?;
        Ok(row.iter().zip(self.coefficients.iter()).map(|(a, b)| a * b).sum())
    }
}

pub fn fit_npiv(sample: &Sample, design: &SieveDesign) -> Result<SieveFit> {
    let ahat = ahat_matrix(design)?;
    Ok(fit_with_ahat(sample, design, ahat))
}

pub(crate) fn fit_with_ahat(sample: &Sample, design: &SieveDesign, ahat: Ahat) -> SieveFit {
    let y = DVector::from_column_slice(&sample.y);
    let bty = design.b.transpose() * y;
    let coefficients = &ahat.matrix * bty / design.n() as f64;
    SieveFit {
        coefficients,
        a_hat: ahat.matrix,
        rank_deficient: ahat.rank_deficient,
        psi_spec: design.psi_spec,
        g_mu: design.g_mu.clone(),
    }
}

/// Plug-in functional `ĉ' G_μ ĉ = ∫ĥ²μ`.
pub fn quad_plugin(fit: &SieveFit) -> f64 {
    fit.coefficients.dot(&(&fit.g_mu * &fit.coefficients))
}

/// The three sums behind the U-statistic, with `t_i = G_μ^{1/2} Â b(W_i) Y_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LooSums {
    /// `‖Σ_i t_i‖²`
    pub total_sq: f64,
    /// `Σ_i ‖t_i‖²`
    pub diagonal: f64,
    pub n: usize,
}

impl LooSums {
    /// The leave-one-out estimate `(‖Σt‖² − Σ‖t‖²) / (n(n−1))`.
    pub fn loo(&self) -> f64 {
        let n = self.n as f64;
        (self.total_sq - self.diagonal) / (n * (n - 1.0))
    }

    /// The V-statistic that keeps the `i = i'` terms, `‖Σt‖² / n²`.
    pub fn full(&self) -> f64 {
        let n = self.n as f64;
        self.total_sq / (n * n)
    }
}

pub fn loo_sums(y: &[f64], design: &SieveDesign, a_hat: &DMatrix<f64>) -> Result<LooSums> {
    let n = design.n();
    if y.len() != n {
        return Err(Error::invalid("response length does not match design"));
    }
    let root = sym_sqrt(&design.g_mu)?;
    // Row i of `t` is t_i / Y_i.
    let t = &design.b * (root * a_hat).transpose();
    let j = t.ncols();
    let mut total = vec![0.0; j];
    let mut diagonal = 0.0;
    // Fixed accumulation order keeps runs bit-reproducible.
    for (i, &yi) in y.iter().enumerate() {
        let mut norm_sq = 0.0;
        for (c, acc) in total.iter_mut().enumerate() {
            let v = t[(i, c)] * yi;
            *acc += v;
            norm_sq += v * v;
        }
        diagonal += norm_sq;
    }
    let total_sq = total.iter().map(|v| v * v).sum();
    Ok(LooSums {
        total_sq,
        diagonal,
        n,
    })
}

/// Leave-one-out U-statistic estimate of `∫h₀²μ`, O(n) form.
pub fn quad_loo(sample: &Sample, design: &SieveDesign) -> Result<f64> {
    let ahat = ahat_matrix(design)?;
    Ok(loo_sums(&sample.y, design, &ahat.matrix)?.loo())
}

/// Literal pairwise double loop; reference implementation for tests.
pub fn quad_loo_bruteforce(sample: &Sample, design: &SieveDesign) -> Result<f64> {
    let n = design.n();
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::Resource(format!(
            "brute-force U-statistic limited to n <= {BRUTEFORCE_MAX_N}, got {n}"
        )));
    }
    let ahat = ahat_matrix(design)?.matrix;
    // u_i = Â b(W_i), v_i = G_μ u_i
    let u = &design.b * ahat.transpose();
    let v = &u * &design.g_mu;
    let mut sum = 0.0;
    for i in 0..n {
        for k in (i + 1)..n {
            let kernel = u.row(i).dot(&v.row(k));
            sum += sample.y[i] * sample.y[k] * kernel;
        }
    }
    let nf = n as f64;
    Ok(2.0 * sum / (nf * (nf - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisFamily;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sample(seed: u64, n: usize) -> Sample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let x: Vec<f64> = w
            .iter()
            .map(|w| (0.6 * w + 0.4 * rng.random::<f64>()).clamp(0.0, 1.0))
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|x| (3.0 * x).sin() + 0.3 * rng.random_range(-1.0..1.0))
            .collect();
        Sample::new(y, x, w).unwrap()
    }

    fn cosine_design(sample: &Sample, j: usize, k: usize) -> SieveDesign {
        build_design(
            sample,
            BasisSpec::cosine(j).unwrap(),
            BasisSpec::cosine(k).unwrap(),
            &WeightFn::Uniform,
        )
        .unwrap()
    }

    fn rel_diff(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn sample_validation() {
        assert!(Sample::new(vec![1.0; 3], vec![0.5; 3], vec![0.5; 3]).is_err());
        assert!(Sample::new(vec![1.0; 4], vec![0.5; 4], vec![0.5; 5]).is_err());
        assert!(Sample::new(vec![f64::NAN, 1.0, 1.0, 1.0], vec![0.5; 4], vec![0.5; 4]).is_err());
        assert!(Sample::new(vec![1.0; 4], vec![0.5, 0.5, 0.5, 1.2], vec![0.5; 4]).is_err());
        assert!(Sample::new(vec![1.0; 4], vec![0.5; 4], vec![0.5; 4]).is_ok());
    }

    #[test]
    fn design_shapes_and_gram() {
        let s = random_sample(1, 10);
        let d = cosine_design(&s, 2, 2);
        assert_eq!(d.psi.shape(), (10, 2));
        assert_eq!(d.b.shape(), (10, 2));
        assert!((&d.g_mu - DMatrix::identity(2, 2)).abs().max() < 1e-10);
    }

    #[test]
    fn design_rejects_k_below_j() {
        let s = random_sample(1, 10);
        let r = build_design(
            &s,
            BasisSpec::cosine(3).unwrap(),
            BasisSpec::cosine(2).unwrap(),
            &WeightFn::Uniform,
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn ahat_reduces_when_psi_equals_b() {
        let s = random_sample(2, 60);
        let same = Sample::new(s.y.clone(), s.x.clone(), s.x.clone()).unwrap();
        let d = cosine_design(&same, 4, 4);
        let a = ahat_matrix(&d).unwrap().matrix;
        let expect = (d.psi.transpose() * &d.psi).try_inverse().unwrap() * 60.0;
        assert!((&a - &expect).abs().max() < 1e-8 * expect.abs().max());
    }

    #[test]
    fn ahat_square_invertible_case() {
        // n = J with Ψ square and invertible.
        let x = vec![0.1, 0.35, 0.6, 0.9];
        let s = Sample::new(vec![1.0, 2.0, 3.0, 4.0], x.clone(), x).unwrap();
        let d = cosine_design(&s, 4, 4);
        let a = ahat_matrix(&d).unwrap().matrix;
        let inv = d.psi.clone().try_inverse().unwrap();
        let expect = &inv * inv.transpose() * 4.0;
        assert!((&a - &expect).abs().max() < 1e-8 * expect.abs().max());
    }

    #[test]
    fn ahat_identity_contract() {
        let s = random_sample(3, 300);
        let d = cosine_design(&s, 3, 5);
        let a = ahat_matrix(&d).unwrap();
        assert!(!a.rank_deficient);
        let prod = &a.matrix * (d.b.transpose() * &d.psi) / 300.0;
        assert!((prod - DMatrix::identity(3, 3)).abs().max() < 1e-6);
    }

    #[test]
    fn ahat_flags_rank_collapse() {
        let s = Sample::new(vec![1.0; 6], vec![0.5; 6], vec![0.5; 6]).unwrap();
        let d = cosine_design(&s, 2, 2);
        let a = ahat_matrix(&d).unwrap();
        assert!(a.rank_deficient);
        assert!(a.matrix.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn fit_zero_response() {
        let s = random_sample(4, 50);
        let s = s.with_y(vec![0.0; 50]).unwrap();
        let d = cosine_design(&s, 3, 4);
        let f = fit_npiv(&s, &d).unwrap();
        assert!(f.coefficients.iter().all(|c| *c == 0.0));
        assert_eq!(quad_plugin(&f), 0.0);
        assert_eq!(quad_loo(&s, &d).unwrap(), 0.0);
        assert_eq!(quad_loo_bruteforce(&s, &d).unwrap(), 0.0);
    }

    #[test]
    fn fit_reduces_to_series_least_squares() {
        let s = random_sample(5, 80);
        let same = Sample::new(s.y.clone(), s.x.clone(), s.x.clone()).unwrap();
        for fam in [BasisFamily::Cosine, BasisFamily::CUBIC_BSPLINE, BasisFamily::Legendre] {
            let spec = BasisSpec::new(fam, 5).unwrap();
            let d = build_design(&same, spec, spec, &WeightFn::Uniform).unwrap();
            let fit = fit_npiv(&same, &d).unwrap();
            let y = DVector::from_column_slice(&same.y);
            let ols = (d.psi.transpose() * &d.psi).try_inverse().unwrap() * d.psi.transpose() * y;
            assert!((&fit.coefficients - ols).abs().max() < 1e-8);
        }
    }

    #[test]
    fn fit_eval_matches_closed_form() {
        let s = random_sample(6, 120);
        let d = cosine_design(&s, 3, 4);
        let fit = fit_npiv(&s, &d).unwrap();
        // ĥ(x) = ψ(x)'[Ψ'B(B'B)⁻B'Ψ]⁻Ψ'B(B'B)⁻B'Y
        let btb_inv = (d.b.transpose() * &d.b).try_inverse().unwrap();
        let pb = d.psi.transpose() * &d.b;
        let mid = (&pb * &btb_inv * pb.transpose()).try_inverse().unwrap();
        let y = DVector::from_column_slice(&s.y);
        let c = mid * &pb * btb_inv * d.b.transpose() * y;
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            let row = DVector::from_vec(d.psi_spec.eval(x).unwrap());
            assert!((fit.eval(x).unwrap() - row.dot(&c)).abs() < 1e-8);
        }
    }

    #[test]
    fn plugin_examples() {
        let s = random_sample(7, 20);
        let d = cosine_design(&s, 2, 2);
        let mut fit = fit_npiv(&s, &d).unwrap();
        fit.coefficients = DVector::from_vec(vec![1.0, 1.0]);
        assert!((quad_plugin(&fit) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn plugin_matches_quadrature_of_fit() {
        let s = random_sample(8, 200);
        let mu = WeightFn::tabulated(vec![0.0, 1.0], vec![0.5, 2.0]).unwrap();
        let spec = BasisSpec::new(BasisFamily::CUBIC_BSPLINE, 6).unwrap();
        let d = build_design(&s, spec, spec, &mu).unwrap();
        let fit = fit_npiv(&s, &d).unwrap();
        let rule = crate::basis::QuadratureRule::composite(400);
        let q = rule.integrate(|x| fit.eval(x).unwrap().powi(2) * mu.eval(x));
        assert!((quad_plugin(&fit) - q).abs() < 1e-6);
    }

    #[test]
    fn loo_matches_bruteforce() {
        for seed in 0..5 {
            let s = random_sample(100 + seed, 200);
            let d = cosine_design(&s, 4, 4);
            let a = quad_loo(&s, &d).unwrap();
            let b = quad_loo_bruteforce(&s, &d).unwrap();
            assert!(rel_diff(a, b) < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn bruteforce_degenerate_design() {
        // Ψ = B = constant column of ones (Legendre J = 1), Y = 1: Â = 1,
        // every pair contributes 1, so the estimate is 1.
        let s = Sample::new(vec![1.0; 4], vec![0.2, 0.4, 0.6, 0.8], vec![0.1, 0.3, 0.5, 0.7])
            .unwrap();
        let spec = BasisSpec::new(BasisFamily::Legendre, 1).unwrap();
        let d = build_design(&s, spec, spec, &WeightFn::Uniform).unwrap();
        assert!((quad_loo_bruteforce(&s, &d).unwrap() - 1.0).abs() < 1e-12);
        assert!((quad_loo(&s, &d).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bruteforce_cost_guard() {
        let s = random_sample(9, BRUTEFORCE_MAX_N + 1);
        let d = cosine_design(&s, 1, 1);
        assert!(matches!(quad_loo_bruteforce(&s, &d), Err(Error::Resource(_))));
    }

    #[test]
    fn loo_scales_quadratically_in_y() {
        let s = random_sample(10, 150);
        let d = cosine_design(&s, 3, 3);
        let base = quad_loo(&s, &d).unwrap();
        for a in [-2.0, 0.5, 3.0] {
            let ys: Vec<f64> = s.y.iter().map(|y| a * y).collect();
            let scaled = s.with_y(ys).unwrap();
            let v = quad_loo(&scaled, &d).unwrap();
            assert!(rel_diff(v, a * a * base) < 1e-10);
        }
    }

    #[test]
    fn diagonal_exclusion_identity() {
        let s = random_sample(11, 120);
        let d = cosine_design(&s, 3, 3);
        let a = ahat_matrix(&d).unwrap().matrix;
        let sums = loo_sums(&s.y, &d, &a).unwrap();
        let pair_sum = quad_loo_bruteforce(&s, &d).unwrap() * (120.0 * 119.0) / 2.0;
        // ‖Σt‖² = Σ‖t‖² + 2 Σ_{i<i'} t_i't_i'
        assert!(rel_diff(sums.total_sq, sums.diagonal + 2.0 * pair_sum) < 1e-10);
        let n = 120.0;
        let gap = sums.full() - sums.loo();
        let expect = sums.total_sq / (n * n) - (sums.total_sq - sums.diagonal) / (n * (n - 1.0));
        assert!((gap - expect).abs() < 1e-12);
    }

    #[test]
    fn loo_is_permutation_invariant() {
        let s = random_sample(12, 90);
        let d = cosine_design(&s, 3, 4);
        let base = quad_loo(&s, &d).unwrap();
        let perm: Vec<usize> = (0..90).rev().collect();
        let p = s.permuted(&perm);
        let dp = cosine_design(&p, 3, 4);
        assert!(rel_diff(quad_loo(&p, &dp).unwrap(), base) < 1e-10);
    }
}
