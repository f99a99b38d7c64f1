//! Synthetic NPIV models with an exactly diagonal conditional-expectation
//! operator.
//!
//! `W ~ U[0,1]` and `X | W = w` has density
//!
//! ```text
//! f(x | w) = 1 + Σ_j 2ν_j cos(πjx) cos(πjw)
//! ```
//!
//! so `E[φ_j(X) | W] = ν_j φ_j(W)` for the cosine system `φ_j = √2 cos(πj·)`.
//! The structural function is `h₀ = Σ_j c_j φ_j` and the error is
//! `U = ρ(φ₁(X) − ν₁φ₁(W)) + σ η`, which has `E[U | W] = 0` exactly while
//! staying correlated with `X`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::{QuadratureRule, WeightFn};
use crate::error::{Error, Result};
use crate::estimators::Sample;

/// Tolerance on `|F(x|w) − v|` when inverting the conditional CDF.
pub const INVERSION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `ν_j = c_ν j^{-ζ}`
    Mild,
    /// `ν_j = c_ν exp(-½ j^ζ)`
    Severe,
}

/// User-facing parameters of a synthetic design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpParams {
    pub regime: Regime,
    pub zeta: f64,
    /// Smoothness index of h₀.
    pub p: f64,
    pub c_nu: f64,
    #[serde(default = "default_c_h")]
    pub c_h: f64,
    #[serde(default = "default_sigma")]
    pub sigma_eta: f64,
    #[serde(default)]
    pub rho_endog: f64,
    #[serde(default = "default_trunc")]
    pub j_op: usize,
    #[serde(default = "default_trunc")]
    pub j_h: usize,
    /// Sobolev ellipsoid radius L that h₀ must fit in.
    #[serde(default = "default_radius")]
    pub ellipsoid_radius: f64,
}

fn default_c_h() -> f64 {
    1.0
}
fn default_sigma() -> f64 {
    0.5
}
fn default_trunc() -> usize {
    200
}
fn default_radius() -> f64 {
    100.0
}

impl DgpParams {
    pub fn new(regime: Regime, zeta: f64, p: f64, c_nu: f64) -> Self {
        Self {
            regime,
            zeta,
            p,
            c_nu,
            c_h: default_c_h(),
            sigma_eta: default_sigma(),
            rho_endog: 0.0,
            j_op: default_trunc(),
            j_h: default_trunc(),
            ellipsoid_radius: default_radius(),
        }
    }
}

/// A validated design with its derived sequences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DgpSpec {
    pub params: DgpParams,
    /// Singular values ν_1..ν_{J_op}.
    pub nu: Vec<f64>,
    /// Coefficients c_1..c_{J_h} of h₀ in the cosine system.
    pub h_coeffs: Vec<f64>,
}

/// Exponent offset of the h₀ coefficients, `c_j = c_h j^{-(p + 0.55)}`.
pub const COEFF_EXPONENT_OFFSET: f64 = 0.55;

pub fn make_dgp(params: DgpParams) -> Result<DgpSpec> {
    let DgpParams {
        regime,
        zeta,
        p,
        c_nu,
        c_h,
        sigma_eta,
        rho_endog,
        j_op,
        j_h,
        ellipsoid_radius,
    } = params;
    let finite = [zeta, p, c_nu, c_h, sigma_eta, rho_endog, ellipsoid_radius];
    if finite.iter().any(|v| !v.is_finite()) {
        return Err(Error::Construction("parameters must be finite".into()));
    }
    if zeta <= 0.0 {
        return Err(Error::Construction(format!("zeta must be positive, got {zeta}")));
    }
    if p <= 0.0 {
        return Err(Error::Construction(format!("p must be positive, got {p}")));
    }
    if !(c_nu > 0.0 && c_nu <= 0.5) {
        return Err(Error::Construction(format!("c_nu must lie in (0, 0.5], got {c_nu}")));
    }
    if c_h < 0.0 || sigma_eta < 0.0 {
        return Err(Error::Construction("c_h and sigma_eta must be nonnegative".into()));
    }
    if j_op == 0 || j_h == 0 {
        return Err(Error::Construction("truncation orders must be at least 1".into()));
    }
    if ellipsoid_radius <= 0.0 {
        return Err(Error::Construction("ellipsoid radius must be positive".into()));
    }

    let nu: Vec<f64> = (1..=j_op)
        .map(|j| {
            let j = j as f64;
            match regime {
                Regime::Mild => c_nu * j.powf(-zeta),
                Regime::Severe => c_nu * (-0.5 * j.powf(zeta)).exp(),
            }
        })
        .collect();
    if let Some(pos) = nu.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Construction(format!(
            "nu_{} underflows to zero; lower j_op",
            pos + 1
        )));
    }
    if nu.windows(2).any(|w| !(w[1] < w[0])) || nu[0] >= 1.0 {
        return Err(Error::Construction("nu must be strictly decreasing in (0, 1)".into()));
    }
    let density_sum: f64 = nu.iter().map(|v| 2.0 * v).sum();
    if density_sum > 1.0 {
        return Err(Error::Construction(format!(
            "density positivity needs sum 2 nu_j <= 1, got {density_sum:.6}"
        )));
    }

    let h_coeffs: Vec<f64> = (1..=j_h)
        .map(|j| c_h * (j as f64).powf(-(p + COEFF_EXPONENT_OFFSET)))
        .collect();
    let sobolev: f64 = h_coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * c * ((i + 1) as f64).powf(2.0 * p))
        .sum();
    if sobolev > ellipsoid_radius {
        return Err(Error::Construction(format!(
            "h0 leaves the ellipsoid: sum c_j^2 j^(2p) = {sobolev:.6} > L = {ellipsoid_radius}"
        )));
    }
    Ok(DgpSpec {
        params,
        nu,
        h_coeffs,
    })
}

/// Σ_{j=1}^N a_j sin(jθ) by Clenshaw's recurrence.
fn sine_series(coefs: &[f64], theta: f64) -> f64 {
    let (b1, _) = clenshaw(coefs, 2.0 * theta.cos());
    b1 * theta.sin()
}

/// Σ_{j=1}^N a_j cos(jθ) by Clenshaw's recurrence.
fn cosine_series(coefs: &[f64], theta: f64) -> f64 {
    let c = theta.cos();
    let (b1, b2) = clenshaw(coefs, 2.0 * c);
    b1 * c - b2
}

fn clenshaw(coefs: &[f64], alpha: f64) -> (f64, f64) {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &a in coefs.iter().rev() {
        let b0 = a + alpha * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    (b1, b2)
}

/// Fills `out[j-1] = cos(πjw)` for j = 1..len.
fn cos_multiples(w: f64, out: &mut [f64]) {
    let c1 = (PI * w).cos();
    let (mut prev, mut cur) = (1.0, c1);
    for v in out.iter_mut() {
        *v = cur;
        let next = 2.0 * c1 * cur - prev;
        prev = cur;
        cur = next;
    }
}

/// Precomputed series coefficients of `F(·|w)` and `f(·|w)` for one `w`.
struct ConditionalLaw {
    cdf_coefs: Vec<f64>,
    pdf_coefs: Vec<f64>,
}

impl ConditionalLaw {
    fn new(nu: &[f64], w: f64) -> Self {
        let mut cosw = vec![0.0; nu.len()];
        cos_multiples(w, &mut cosw);
        let pdf_coefs: Vec<f64> = nu.iter().zip(&cosw).map(|(v, c)| 2.0 * v * c).collect();
        let cdf_coefs = pdf_coefs
            .iter()
            .enumerate()
            .map(|(i, d)| d / (PI * (i + 1) as f64))
            .collect();
        Self {
            cdf_coefs,
            pdf_coefs,
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        x + sine_series(&self.cdf_coefs, PI * x)
    }

    fn pdf(&self, x: f64) -> f64 {
        1.0 + cosine_series(&self.pdf_coefs, PI * x)
    }

    /// Safeguarded Newton iteration for `F(x|w) = v`; falls back to bisection
    /// whenever a Newton step leaves the bracket.
    fn invert(&self, v: f64) -> Result<f64> {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut x = v;
        for _ in 0..200 {
            let g = self.cdf(x) - v;
            if g.abs() < INVERSION_TOL {
                return Ok(x);
            }
            if g < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.pdf(x);
            let newton = x - g / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-15 {
                return Ok(x);
            }
        }
        Err(Error::Numeric(format!(
            "conditional CDF inversion did not converge for v = {v}"
        )))
    }
}

impl DgpSpec {
    /// Conditional density `f(x | w)`.
    pub fn conditional_density(&self, x: f64, w: f64) -> f64 {
        ConditionalLaw::new(&self.nu, w).pdf(x)
    }

    /// Conditional CDF `F(x | w) = x + Σ_j (2ν_j/(πj)) cos(πjw) sin(πjx)`.
    pub fn conditional_cdf(&self, x: f64, w: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain { what: "x", value: x });
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Domain { what: "w", value: w });
        }
        if x == 1.0 {
            return Ok(1.0);
        }
        Ok(ConditionalLaw::new(&self.nu, w).cdf(x))
    }

    /// `h₀(x) = Σ_j c_j √2 cos(πjx)`.
    pub fn h0(&self, x: f64) -> f64 {
        SQRT_2 * cosine_series(&self.h_coeffs, PI * x)
    }

    /// Density values on a tensor grid, `out[(a, b)] = f(xs[a] | ws[b])`.
    pub fn density_grid(&self, xs: &[f64], ws: &[f64]) -> DMatrix<f64> {
        let m = self.nu.len();
        let mut cx = DMatrix::zeros(xs.len(), m);
        let mut cw = DMatrix::zeros(ws.len(), m);
        let mut row = vec![0.0; m];
        for (a, &x) in xs.iter().enumerate() {
            cos_multiples(x, &mut row);
            for j in 0..m {
                cx[(a, j)] = 2.0 * self.nu[j] * row[j];
            }
        }
        for (b, &w) in ws.iter().enumerate() {
            cos_multiples(w, &mut row);
            for j in 0..m {
                cw[(b, j)] = row[j];
            }
        }
        let mut grid = cx * cw.transpose();
        grid.add_scalar_mut(1.0);
        grid
    }

    /// Draws `n` observations from the model using a ChaCha8 stream seeded
    /// with `seed`. Each observation consumes `W`, `V`, `η` in that order.
    pub fn draw_sample(&self, n: usize, seed: u64) -> Result<Sample> {
        if n < 4 {
            return Err(Error::invalid(format!("need n >= 4, got {n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nu1 = self.nu[0];
        let rho = self.params.rho_endog;
        let sigma = self.params.sigma_eta;
        let mut y = Vec::with_capacity(n);
        let mut x = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n);
        for _ in 0..n {
            let wi: f64 = rng.random();
            let vi: f64 = rng.random();
            let eta: f64 = rng.sample(StandardNormal);
            let xi = ConditionalLaw::new(&self.nu, wi).invert(vi)?;
            let u = rho * SQRT_2 * ((PI * xi).cos() - nu1 * (PI * wi).cos()) + sigma * eta;
            y.push(self.h0(xi) + u);
            x.push(xi);
            w.push(wi);
        }
        Sample::new(y, x, w)
    }

    /// `f(h₀) = ∫h₀²` under the uniform weight (Parseval).
    pub fn true_functional(&self) -> f64 {
        self.h_coeffs.iter().map(|c| c * c).sum()
    }

    /// `∫h₀²μ` by composite Gauss–Legendre quadrature.
    pub fn true_functional_weighted(&self, mu: &WeightFn) -> f64 {
        let panels = (2 * self.h_coeffs.len()).max(64);
        QuadratureRule::for_weight(panels, mu).integrate(|x| self.h0(x).powi(2) * mu.eval(x))
    }

    /// Population ill-posedness `τ_J = 1/ν_J` of the cosine sieve.
    pub fn true_tau(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.nu.len() {
            return Err(Error::invalid(format!(
                "J = {j} outside 1..={}",
                self.nu.len()
            )));
        }
        Ok(1.0 / self.nu[j - 1])
    }

    /// `(τ_1, …, τ_J)`.
    pub fn true_tau_seq(&self, j: usize) -> Result<Vec<f64>> {
        (1..=j).map(|k| self.true_tau(k)).collect()
    }

    /// Monte Carlo exogeneity diagnostics: regresses `U = Y − h₀(X)` on
    /// `(1, φ_1(W), …, φ_4(W))` and measures the correlation of `U` with `φ₁(X)`.
    pub fn check_exogeneity(&self, n: usize, seed: u64) -> Result<ExogeneityReport> {
        const K: usize = 4;
        let sample = self.draw_sample(n, seed)?;
        let u: Vec<f64> = sample
            .y
            .iter()
            .zip(&sample.x)
            .map(|(y, x)| y - self.h0(*x))
            .collect();
        let mut design = DMatrix::zeros(n, K + 1);
        let mut row = vec![0.0; K];
        for (i, &w) in sample.w.iter().enumerate() {
            design[(i, 0)] = 1.0;
            cos_multiples(w, &mut row);
            for j in 0..K {
                design[(i, j + 1)] = SQRT_2 * row[j];
            }
        }
        let uv = DVector::from_column_slice(&u);
        let xtx = design.transpose() * &design;
        let xtx_inv = xtx
            .try_inverse()
            .ok_or_else(|| Error::Numeric("singular exogeneity design".into()))?;
        let coef = &xtx_inv * design.transpose() * &uv;
        let resid = &uv - &design * &coef;
        let dof = (n - (K + 1)) as f64;
        let s2 = resid.norm_squared() / dof;
        let std_errors: Vec<f64> = (0..=K).map(|j| (s2 * xtx_inv[(j, j)]).sqrt()).collect();
        let coefficients: Vec<f64> = coef.iter().copied().collect();
        let max_abs_t = coefficients
            .iter()
            .zip(&std_errors)
            .map(|(c, s)| if *s > 0.0 { (c / s).abs() } else { 0.0 })
            .fold(0.0, f64::max);

        let phi1: Vec<f64> = sample.x.iter().map(|x| SQRT_2 * (PI * x).cos()).collect();
        let corr = correlation(&u, &phi1);
        let corr_se = 1.0 / (n as f64).sqrt();
        Ok(ExogeneityReport {
            coefficients,
            std_errors,
            max_abs_t,
            exogenous: max_abs_t <= 3.0,
            corr_u_phi1_x: corr,
            corr_se,
            endogenous: corr.abs() > 3.0 * corr_se,
        })
    }
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct ExogeneityReport {
    /// OLS coefficients of U on (1, φ_1(W), …, φ_4(W)).
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub max_abs_t: f64,
    /// All |t| ≤ 3.
    pub exogenous: bool,
    pub corr_u_phi1_x: f64,
    pub corr_se: f64,
    /// |corr(U, φ₁(X))| > 3 s.e.
    pub endogenous: bool,
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream used for replication `rep` at sample size `n`.
///
/// Derived purely from `(master, n, rep)`, so any replication can be
/// regenerated on its own.
pub fn replication_seed(master: u64, n: u64, rep: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n) ^ rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mild() -> DgpSpec {
        make_dgp(DgpParams::new(Regime::Mild, 2.0, 1.0, 0.2)).unwrap()
    }

    #[test]
    fn construction_examples() {
        let d = mild();
        let s: f64 = d.nu.iter().map(|v| 2.0 * v).sum();
        // 0.4 · Σ_{j≤200} j⁻² is just below 0.4 π²/6.
        assert!(s < 0.4 * PI * PI / 6.0 && s > 0.4 * PI * PI / 6.0 - 0.4 / 199.0);

        let harmonic = make_dgp(DgpParams::new(Regime::Mild, 1.0, 1.0, 0.4));
        assert!(matches!(harmonic, Err(Error::Construction(_))));

        let severe = make_dgp(DgpParams::new(Regime::Severe, 1.0, 1.0, 0.3)).unwrap();
        let s: f64 = severe.nu.iter().map(|v| 2.0 * v).sum();
        let q = (-0.5f64).exp();
        assert!((s - 0.6 * q / (1.0 - q)).abs() < 1e-12);
        assert!(s < 1.0);
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        let mut p = DgpParams::new(Regime::Mild, 2.0, 1.0, 0.2);
        p.c_nu = 0.6;
        assert!(make_dgp(p.clone()).is_err());
        p.c_nu = 0.2;
        p.zeta = 0.0;
        assert!(make_dgp(p.clone()).is_err());
        p.zeta = 2.0;
        p.ellipsoid_radius = 0.5;
        assert!(make_dgp(p.clone()).is_err());
        p.ellipsoid_radius = 100.0;
        p.sigma_eta = -1.0;
        assert!(make_dgp(p).is_err());
    }

    #[test]
    fn cdf_boundaries_and_single_term() {
        let d = mild();
        for &w in &[0.0, 0.3, 0.77, 1.0] {
            assert_eq!(d.conditional_cdf(0.0, w).unwrap(), 0.0);
            assert_eq!(d.conditional_cdf(1.0, w).unwrap(), 1.0);
            let mut prev = 0.0;
            for i in 1..=100 {
                let f = d.conditional_cdf(i as f64 / 100.0, w).unwrap();
                assert!(f >= prev);
                prev = f;
            }
        }
        let mut p = DgpParams::new(Regime::Mild, 2.0, 1.0, 0.2);
        p.j_op = 1;
        let one = make_dgp(p).unwrap();
        let f = one.conditional_cdf(0.5, 0.0).unwrap();
        assert!((f - (0.5 + 0.4 / PI)).abs() < 1e-15);
        assert!((f - 0.62732).abs() < 1e-5);
        assert!(d.conditional_cdf(1.2, 0.5).is_err());
    }

    #[test]
    fn clenshaw_matches_direct_sums() {
        let coefs: Vec<f64> = (1..=50).map(|j| 1.0 / (j as f64)).collect();
        for &t in &[0.0, 0.4, 1.7, PI] {
            let s: f64 = coefs.iter().enumerate().map(|(i, a)| a * ((i + 1) as f64 * t).sin()).sum();
            let c: f64 = coefs.iter().enumerate().map(|(i, a)| a * ((i + 1) as f64 * t).cos()).sum();
            assert!((sine_series(&coefs, t) - s).abs() < 1e-12);
            assert!((cosine_series(&coefs, t) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn inversion_meets_tolerance() {
        let d = mild();
        for &w in &[0.0, 0.1, 0.5, 0.99] {
            let law = ConditionalLaw::new(&d.nu, w);
            for i in 0..=20 {
                let v = i as f64 / 20.0;
                let x = law.invert(v).unwrap();
                assert!((law.cdf(x) - v).abs() < INVERSION_TOL, "w={w} v={v}");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = mild();
        let a = d.draw_sample(50, 42).unwrap();
        let b = d.draw_sample(50, 42).unwrap();
        assert_eq!(a, b);
        let c = d.draw_sample(50, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_sample_is_exact() {
        let mut p = DgpParams::new(Regime::Mild, 2.0, 1.0, 0.2);
        p.sigma_eta = 0.0;
        p.rho_endog = 0.0;
        let d = make_dgp(p).unwrap();
        let s = d.draw_sample(20, 1).unwrap();
        for (y, x) in s.y.iter().zip(&s.x) {
            assert_eq!(*y, d.h0(*x));
        }
    }

    #[test]
    fn true_functional_paths_agree() {
        let mut p = DgpParams::new(Regime::Mild, 2.0, 1.0, 0.2);
        p.c_h = 1.0;
        let d = make_dgp(p).unwrap();
        let oracle: f64 = (1..=200).map(|j| (j as f64).powf(-3.1)).sum();
        assert!((d.true_functional() - oracle).abs() < 1e-12);
        assert!((d.true_functional_weighted(&WeightFn::Uniform) - oracle).abs() < 1e-8);

        let mut p = DgpParams::new(Regime::Mild, 2.0, 1.0, 0.2);
        p.c_h = 0.0;
        assert_eq!(make_dgp(p).unwrap().true_functional(), 0.0);
    }

    #[test]
    fn true_tau_examples() {
        let d = mild();
        assert!((d.true_tau(4).unwrap() - 80.0).abs() < 1e-12);
        assert!((d.true_tau(1).unwrap() - 5.0).abs() < 1e-12);
        assert!(d.true_tau(0).is_err());
        assert!(d.true_tau(201).is_err());
        let s = make_dgp(DgpParams::new(Regime::Severe, 1.0, 1.0, 0.3)).unwrap();
        assert!((s.true_tau(6).unwrap() - 3f64.exp() / 0.3).abs() < 1e-10);
        assert!((s.true_tau(6).unwrap() - 66.95).abs() < 0.01);
    }

    #[test]
    fn density_grid_matches_pointwise() {
        let d = mild();
        let xs = [0.0, 0.25, 0.9];
        let ws = [0.1, 0.6];
        let g = d.density_grid(&xs, &ws);
        for (a, &x) in xs.iter().enumerate() {
            for (b, &w) in ws.iter().enumerate() {
                assert!((g[(a, b)] - d.conditional_density(x, w)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exogeneity_without_noise_is_trivial() {
        let mut p = DgpParams::new(Regime::Mild, 2.0, 1.0, 0.2);
        p.sigma_eta = 0.0;
        p.rho_endog = 0.0;
        let d = make_dgp(p).unwrap();
        let r = d.check_exogeneity(500, 3).unwrap();
        assert!(r.coefficients.iter().all(|c| *c == 0.0));
        assert!(!r.endogenous);
    }

    #[test]
    fn replication_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for n in [500u64, 1000] {
            for r in 0..100u64 {
                assert!(seen.insert(replication_seed(7, n, r)));
            }
        }
        assert_eq!(replication_seed(7, 500, 3), replication_seed(7, 500, 3));
    }
}
