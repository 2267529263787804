use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, fro_norm, identity, op_norm, DenseMatrix, Projection};

/// Partial isometries u_i = ([e_i] ∖ ([e_1] ∨ … ∨ [e_{i−1}])) v_i with e_i = v_i|e_i|.
#[derive(Debug, Clone)]
pub struct OrthogonalizedFamily {
    pub u_list: Vec<DenseMatrix>,
    pub report: OrthogonalizationReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalizationReport {
    /// ‖Σ u_i*u_i − 1‖
    pub sum_residual: f64,
    /// max_{i≠j} ‖u_i*u_j‖
    pub orthogonality_residual: f64,
    /// max_i ‖(1 − [e_i]) u_i‖, the failure of u_iH ⊆ e_iH
    pub range_residual: f64,
}

pub const ORTH_TOL: f64 = 1e-8;

/// Follows the lattice construction with p ∖ q = p − p ∧ q, then verifies the three
/// post-conditions; fails when the ranges do not commute enough for them to hold.
pub fn vn_orthogonalize(e_list: &[DenseMatrix]) -> Result<OrthogonalizedFamily> {
    let n = e_list.first().map_or(0, |e| e.nrows());
    let mut sum = -identity(n);
    for e in e_list {
        sum += e.adjoint() * e;
    }
    let defect = op_norm(&sum);
    if defect > ORTH_TOL {
        return Err(Error::NotPartition { defect });
    }
    let mut joined = Projection::zero(n);
    let mut u_list = Vec::with_capacity(e_list.len());
    let mut ranges = Vec::with_capacity(e_list.len());
    for e in e_list {
        let range = linalg::range_proj(e);
        let fresh = linalg::proj_diff(&range, &joined)?;
        let v = linalg::polar(e).isometry;
        u_list.push(fresh.matrix() * v);
        joined = linalg::proj_join(&joined, &range)?;
        ranges.push(range);
    }
    let mut usum = -identity(n);
    for u in &u_list {
        usum += u.adjoint() * u;
    }
    let mut orth: f64 = 0.0;
    for (i, a) in u_list.iter().enumerate() {
        for b in &u_list[i + 1..] {
            orth = orth.max(op_norm(&(a.adjoint() * b)));
        }
    }
    let range_residual = u_list.iter().zip(&ranges).map(|(u, p)| fro_norm(&((identity(n) - p.matrix()) * u))).fold(0.0, f64::max);
    let report = OrthogonalizationReport { sum_residual: op_norm(&usum), orthogonality_residual: orth, range_residual };
    if report.sum_residual > ORTH_TOL || report.orthogonality_residual > ORTH_TOL || report.range_residual > ORTH_TOL {
        return Err(Error::OrthogonalizationFailed(format!(
            "sum {:.3e}, orthogonality {:.3e}, range {:.3e}",
            report.sum_residual, report.orthogonality_residual, report.range_residual
        )));
    }
    Ok(OrthogonalizedFamily { u_list, report })
}

/// Random commuting positive partition Σ e_i² = 1 in dimension n with sparse joint spectrum.
pub fn random_commuting_partition<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, parts: usize) -> Vec<DenseMatrix> {
    let w = linalg::random::unitary(rng, n);
    let mut weights = vec![vec![0.0f64; n]; parts];
    for k in 0..n {
        // each eigenvector is shared by a random nonempty subset of the parts
        let mut raw: Vec<f64> = (0..parts).map(|_| if rng.random_bool(0.5) { rng.random::<f64>() + 0.05 } else { 0.0 }).collect();
        if raw.iter().all(|&x| x == 0.0) {
            raw[rng.random_range(0..parts)] = 1.0;
        }
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..parts {
            weights[i][k] = raw[i] / norm;
        }
    }
    weights.iter().map(|d| &w * linalg::diag_real(d) * w.adjoint()).collect()
}
