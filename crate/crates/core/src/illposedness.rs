//! Sieve measure of ill-posedness: the data-driven estimate `τ̂_J`, the
//! Lepski variance proxy `V̂(J)`, and population counterparts for the
//! synthetic designs.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::basis::{BasisSpec, QuadratureRule, WeightFn};
use crate::dgp::DgpSpec;
use crate::error::{Error, Result};
use crate::estimators::SieveDesign;
use crate::linalg::{min_singular_value, sym_inv_sqrt, sym_pinv_sqrt, TolerancePolicy};

/// Below this the minimal singular value is treated as zero and `τ̂_J` as
/// infeasible.
pub const S_MIN_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IllposednessReport {
    pub j: usize,
    pub n: usize,
    /// `s_min((B'B/n)^{-1/2} (B'Ψ/n) G_μ^{-1/2})`
    pub s_hat: f64,
    pub tau_hat: f64,
    pub v_hat: f64,
}

/// Estimates `τ̂_J = 1 / s_min((B'B/n)^{-1/2} (B'Ψ/n) G_μ^{-1/2})`.
///
/// `G_μ` comes from quadrature, not from the data, and the response is never
/// read.
pub fn tau_hat(design: &SieveDesign) -> Result<IllposednessReport> {
    let n = design.n();
    let (j, k) = (design.j(), design.k());
    if n <= k {
        return Err(Error::invalid(format!("tau_hat needs n > K, got n = {n}, K = {k}")));
    }
    let nf = n as f64;
    let btb = design.b.transpose() * &design.b / nf;
    let btpsi = design.b.transpose() * &design.psi / nf;
    // Instrument directions with no sample variation carry no information.
    let b_half = sym_pinv_sqrt(&btb, design.tol)?;
    let g_half = sym_inv_sqrt(&design.g_mu, design.tol)?;
    let s_hat = min_singular_value(&(b_half.matrix * btpsi * g_half.matrix));
    if !(s_hat >= S_MIN_CUTOFF) {
        return Err(Error::IllposednessOverflow { j, s_min: s_hat });
    }
    let tau = 1.0 / s_hat;
    Ok(IllposednessReport {
        j,
        n,
        s_hat,
        tau_hat: tau,
        v_hat: v_hat(tau, j, n),
    })
}

/// `V̂(J) = τ² √(J ln n) / n`.
pub fn v_hat(tau: f64, j: usize, n: usize) -> f64 {
    let nf = n as f64;
    tau * tau * (j as f64 * nf.ln()).sqrt() / nf
}

/// Population moments of a design, computed by tensor Gauss–Legendre
/// quadrature against the model's conditional density.
#[derive(Debug, Clone)]
pub struct PopulationOperator {
    /// `S = E[b(W) ψ(X)']`, K×J
    pub s: DMatrix<f64>,
    /// `G_b = E[b(W) b(W)']`
    pub g_b: DMatrix<f64>,
    pub g_mu: DMatrix<f64>,
    /// `E[(Tψ)(W) (Tψ)(W)']`, the Gram matrix of the image of the sieve.
    pub t_gram: DMatrix<f64>,
}

fn quadrature_panels(dgp: &DgpSpec) -> usize {
    dgp.nu.len().max(64)
}

pub fn population_operator(
    dgp: &DgpSpec,
    psi_spec: BasisSpec,
    b_spec: BasisSpec,
    mu: &WeightFn,
) -> Result<PopulationOperator> {
    let rule = QuadratureRule::composite(quadrature_panels(dgp));
    let nodes = &rule.nodes;
    let psi_nodes = psi_spec.design_matrix(nodes)?;
    let b_nodes = b_spec.design_matrix(nodes)?;
    // density[(a, b)] = f(x_a | w_b); W is uniform so its density is 1.
    let density = dgp.density_grid(nodes, nodes);

    let mut weighted_psi = psi_nodes.clone();
    let mut weighted_b = b_nodes.clone();
    for (a, &wt) in rule.weights.iter().enumerate() {
        weighted_psi.row_mut(a).scale_mut(wt);
        weighted_b.row_mut(a).scale_mut(wt);
    }
    // (Tψ_j)(w_b) = ∫ψ_j(x) f(x|w_b) dx
    let t_psi = density.transpose() * &weighted_psi;
    let s = weighted_b.transpose() * &t_psi;
    let g_b = weighted_b.transpose() * &b_nodes;
    let mut weighted_t = t_psi.clone();
    for (b, &wt) in rule.weights.iter().enumerate() {
        weighted_t.row_mut(b).scale_mut(wt);
    }
    let t_gram = weighted_t.transpose() * &t_psi;
    let g_mu = psi_spec.gram_matrix(mu)?;
    Ok(PopulationOperator {
        s,
        g_b: symmetrize(g_b),
        g_mu,
        t_gram: symmetrize(t_gram),
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

impl PopulationOperator {
    /// `s_J = s_min(G_b^{-1/2} S G_μ^{-1/2})`.
    pub fn s_min(&self) -> Result<f64> {
        let tol = TolerancePolicy::default();
        let gb = sym_inv_sqrt(&self.g_b, tol)?.matrix;
        let gm = sym_inv_sqrt(&self.g_mu, tol)?.matrix;
        Ok(min_singular_value(&(gb * &self.s * gm)))
    }

    /// `τ_J = sup_{h ∈ Ψ_J} ‖h‖_μ / ‖Th‖`, from the Gram matrices directly.
    pub fn sieve_tau(&self) -> Result<f64> {
        let gm = sym_inv_sqrt(&self.g_mu, TolerancePolicy::default())?.matrix;
        let m = &gm * &self.t_gram * &gm;
        let lambda = symmetrize(m).symmetric_eigenvalues().min();
        if !(lambda > 0.0) {
            return Err(Error::Numeric(format!(
                "operator image is degenerate (eigenvalue {lambda:e})"
            )));
        }
        Ok(1.0 / lambda.sqrt())
    }
}

/// Population `s_J` and `τ_J` for the cosine sieve with `K = J` and uniform
/// weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PopulationIllposedness {
    pub j: usize,
    pub s_j: f64,
    /// Analytic `1/ν_J`.
    pub tau_j: f64,
}

pub fn population_s_and_tau(dgp: &DgpSpec, j: usize) -> Result<PopulationIllposedness> {
    let tau_j = dgp.true_tau(j)?;
    let spec = BasisSpec::cosine(j)?;
    let op = population_operator(dgp, spec, spec, &WeightFn::Uniform)?;
    Ok(PopulationIllposedness {
        j,
        s_j: op.s_min()?,
        tau_j,
    })
}
