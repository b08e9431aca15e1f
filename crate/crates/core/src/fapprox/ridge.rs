use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// θ with Ψ(x, a) = θᵀΦ(x, a).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub theta: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(m: usize) -> Self {
        Self { theta: vec![0.0; m] }
    }

    pub fn norm(&self) -> f64 {
        self.theta.iter().map(|t| t * t).sum::<f64>().sqrt()
    }
}

/// θ = (Σ ΦΦᵀ + αN·I)⁻¹ Σ tΦ via a Cholesky solve. `features` is row-major
/// N×m.
pub fn ridge_solve(features: &[f64], targets: &[f64], m: usize, alpha: f64) -> Result<LinearModel> {
    let n = targets.len();
    if n == 0 || m == 0 || features.len() != n * m {
        return Err(Error::input(format!(
            "feature matrix has {} entries for {n} targets and {m} features",
            features.len()
        )));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::config(format!("ridge coefficient must be nonnegative, got {alpha}")));
    }
    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (phi, &t) in features.chunks_exact(m).zip(targets) {
        for i in 0..m {
            if phi[i] == 0.0 {
                continue;
            }
            rhs[i] += t * phi[i];
            for j in i..m {
                gram[(i, j)] += phi[i] * phi[j];
            }
        }
    }
    let shift = alpha * n as f64;
    for i in 0..m {
        gram[(i, i)] += shift;
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("ridge normal equations are not positive definite".into()))?;
    let theta = chol.solve(&rhs);
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("ridge solution is not finite".into()));
    }
    Ok(LinearModel {
        theta: theta.as_slice().to_vec(),
    })
}
