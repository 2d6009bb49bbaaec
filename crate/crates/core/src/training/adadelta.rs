use serde::{Deserialize, Serialize};

use super::TrainingError;
use crate::numerics::Tensor;

pub const DEFAULT_RHO: f64 = 0.95;
pub const DEFAULT_EPS: f64 = 1e-6;

/// Running averages of squared gradients and squared updates, one pair per parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdadeltaState {
    pub rho: f64,
    pub eps: f64,
    sq_grad: Vec<Vec<f64>>,
    sq_update: Vec<Vec<f64>>,
}

impl AdadeltaState {
    pub fn new(params: &[Tensor], rho: f64, eps: f64) -> Result<Self, TrainingError> {
        if !(rho > 0.0 && rho < 1.0) || eps.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(TrainingError::InvalidHyperparameter(format!("rho={rho}, eps={eps}")));
        }
        Ok(AdadeltaState {
            rho,
            eps,
            sq_grad: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            sq_update: params.iter().map(|p| vec![0.0; p.len()]).collect(),
        })
    }

    pub fn sq_grad(&self) -> &[Vec<f64>] {
        &self.sq_grad
    }

    pub fn sq_update(&self) -> &[Vec<f64>] {
        &self.sq_update
    }

    /// In-place update:
    ///
    /// ```text
    /// E[g²]  ← ρ E[g²] + (1-ρ) g²
    /// Δx     = -sqrt(E[Δx²] + ε) / sqrt(E[g²] + ε) · g
    /// E[Δx²] ← ρ E[Δx²] + (1-ρ) Δx²
    /// x      ← x + Δx
    /// ```
    pub fn step(&mut self, params: &mut [Tensor], grads: &[Tensor]) -> Result<(), TrainingError> {
        if params.len() != self.sq_grad.len() || grads.len() != params.len() {
            return Err(TrainingError::ShapeMismatch(format!(
                "{} params, {} grads, state for {}",
                params.len(),
                grads.len(),
                self.sq_grad.len()
            )));
        }
        let (rho, eps) = (self.rho, self.eps);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            if p.shape() != g.shape() || p.len() != self.sq_grad[i].len() {
                return Err(TrainingError::ShapeMismatch(format!(
                    "param {i}: {:?} vs gradient {:?}",
                    p.shape(),
                    g.shape()
                )));
            }
            let eg = &mut self.sq_grad[i];
            let ex = &mut self.sq_update[i];
            for (j, (x, &gj)) in p.data_mut().iter_mut().zip(g.data()).enumerate() {
                eg[j] = rho * eg[j] + (1.0 - rho) * gj * gj;
                let dx = -((ex[j] + eps).sqrt() / (eg[j] + eps).sqrt()) * gj;
                ex[j] = rho * ex[j] + (1.0 - rho) * dx * dx;
                *x += dx;
            }
        }
        Ok(())
    }
}

/// Functional form: returns updated parameters.
pub fn adadelta_step(
    params: &[Tensor],
    grads: &[Tensor],
    state: &mut AdadeltaState,
) -> Result<Vec<Tensor>, TrainingError> {
    let mut out = params.to_vec();
    state.step(&mut out, grads)?;
    Ok(out)
}

/// Scale `grads` so their global L2 norm is at most `max_norm`. Returns the pre-clip norm.
pub fn clip_global_norm(grads: &mut [Tensor], max_norm: f64) -> f64 {
    let norm = grads
        .iter()
        .flat_map(|g| g.data())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    if norm > max_norm && norm.is_finite() {
        let s = max_norm / norm;
        for g in grads.iter_mut() {
            for x in g.data_mut() {
                *x *= s;
            }
        }
    }
    norm
}
