use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::{check_frame, module_gram, BaseRep, GaloisFrame};
use crate::linalg::{self, identity, kron, op_norm, DenseMatrix, C64};

/// Commutator norms above this count as unbounded.
pub const DIFFERENTIABILITY_BOUND: f64 = 1e8;

/// Lift of a base Dirac operator to X ⊗_A H, written in an orthonormal basis of the range of the
/// Gram projection (the Grassmannian connection p(1 ⊗ D)p).
#[derive(Debug, Clone, Serialize)]
pub struct DiracLift {
    pub dim: usize,
    pub spectrum: Vec<f64>,
    pub symmetric_defect: f64,
    /// max_g ‖D̃ g − g D̃‖ with g acting by permuting translates
    pub equivariance_residual: f64,
    #[serde(skip)]
    pub matrix: DenseMatrix,
    #[serde(skip)]
    pub basis: DenseMatrix,
}

/// Coordinates (ρ(⟨gξ_i, x⟩) h)_{(g,i)} of x ⊗ h.
pub fn module_coordinates(frame: &GaloisFrame, rep: &BaseRep, x: &DenseMatrix, h: &DVector<C64>) -> DVector<C64> {
    let d = rep.dim();
    let translates = frame.translates();
    let mut out = DVector::zeros(translates.len() * d);
    for (a, t) in translates.iter().enumerate() {
        out.rows_mut(a * d, d).copy_from(&(rep.apply(&frame.inner(t, x)) * h));
    }
    out
}

/// Block permutation sending coordinate (g′, i) to (g g′, i).
fn translate_permutation(frame: &GaloisFrame, g: usize, block: usize) -> DenseMatrix {
    let k = frame.len();
    let order = frame.group_order();
    let group = frame.action.group();
    let size = order * k * block;
    let mut p = DenseMatrix::zeros(size, size);
    for h in 0..order {
        let target = group.mul(g, h);
        for i in 0..k {
            for r in 0..block {
                p[((target * k + i) * block + r, (h * k + i) * block + r)] = C64::from(1.0);
            }
        }
    }
    p
}

pub fn dirac_lift(frame: &GaloisFrame, dirac: &DenseMatrix, rep: &BaseRep) -> Result<DiracLift> {
    let d = rep.dim();
    if dirac.nrows() != d || dirac.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "Dirac is {}x{}, representation has dim {d}",
            dirac.nrows(),
            dirac.ncols()
        )));
    }
    let defect = linalg::hermitian_defect(dirac);
    if defect > 1e-10 * op_norm(dirac).max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let report = check_frame(frame);
    if !report.pass {
        return Err(Error::FrameFailed(format!("max residual {:.3e}", report.max_residual())));
    }
    for e in &frame.e_list {
        let norm = op_norm(&linalg::commutator(dirac, &rep.apply(e)));
        if !norm.is_finite() || norm > DIFFERENTIABILITY_BOUND {
            return Err(Error::NotDifferentiable { norm });
        }
    }
    let translates = frame.translates();
    let gram = module_gram(frame, rep, &translates);
    let basis = linalg::range_basis(&gram);
    let lifted = kron(&identity(translates.len()), dirac);
    let matrix = basis.adjoint() * &lifted * &basis;
    let symmetric_defect = linalg::hermitian_defect(&matrix);
    let mut equivariance_residual: f64 = 0.0;
    for g in 0..frame.group_order() {
        let perm = translate_permutation(frame, g, d);
        let acting = basis.adjoint() * &perm * &basis;
        equivariance_residual = equivariance_residual
            .max(op_norm(&(&acting * &matrix - &matrix * &acting)))
            .max(op_norm(&(&perm * &gram - &gram * &perm)));
    }
    let hermitian = (&matrix + matrix.adjoint()) * C64::from(0.5);
    let mut spectrum = linalg::herm_eig(&hermitian)?.values;
    spectrum.reverse();
    Ok(DiracLift { dim: basis.ncols(), spectrum, symmetric_defect, equivariance_residual, matrix, basis })
}

impl DiracLift {
    /// ‖D̃(x⊗h) − x⊗Dh‖ together with the part of x⊗h outside the module, which should vanish.
    pub fn locality_residual(
        &self,
        frame: &GaloisFrame,
        rep: &BaseRep,
        dirac: &DenseMatrix,
        x: &DenseMatrix,
        h: &DVector<C64>,
    ) -> f64 {
        let coords = module_coordinates(frame, rep, x, h);
        let inside = self.basis.adjoint() * &coords;
        let outside = (&coords - &self.basis * &inside).norm();
        let moved = self.basis.adjoint() * module_coordinates(frame, rep, x, &(dirac * h));
        (&self.matrix * inside - moved).norm().max(outside)
    }
}

/// Multiset distance between two sorted spectra of equal length.
pub fn spectrum_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Central-difference derivative −i d/dφ on an N-point periodic grid.
pub fn difference_dirac(n: usize) -> DenseMatrix {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut m = DenseMatrix::zeros(n, n);
    for k in 0..n {
        m[(k, (k + 1) % n)] += C64::new(0.0, -0.5 / step);
        m[(k, (k + n - 1) % n)] += C64::new(0.0, 0.5 / step);
    }
    m
}

/// Spectral −i d/dφ on an N-point grid with angles φ_k: Fourier modes −N/2 < m ≤ N/2 at eigenvalue m,
/// the Nyquist mode symmetrized so the matrix stays real-spectrum and shift-free.
pub fn spectral_dirac(angles: &[f64]) -> DenseMatrix {
    let n = angles.len();
    let mut m = DenseMatrix::zeros(n, n);
    let lo = -(n as i64 - 1) / 2;
    let hi = n as i64 / 2;
    for mode in lo..=hi {
        let f = DVector::from_iterator(n, angles.iter().map(|&p| C64::from_polar(1.0 / (n as f64).sqrt(), mode as f64 * p)));
        let weight = if n.is_multiple_of(2) && mode == hi { 0.0 } else { mode as f64 };
        m += &f * f.adjoint() * C64::from(weight);
    }
    m
}

/// Lift of a base operator D on an N-point circle grid to the n-fold cover z ↦ zⁿ, computed on
/// grid functions: the frame map f ↦ (Σ_sheets ζ_{g,i} f)_{(g,i)} is an isometry V, and the lift is
/// V*(1 ⊗ D)V on the nN cover points. Cover point (j, k) sits at angle (φ_k + 2πj)/n. Each V block
/// is diagonal per sheet, so the product is assembled entrywise.
pub fn circle_cover_lift(n: usize, angles: &[f64], dirac: &DenseMatrix) -> Result<DenseMatrix> {
    let q = angles.len();
    if n == 0 || dirac.nrows() != q || dirac.ncols() != q {
        return Err(Error::DimensionMismatch(format!("operator is {}x{}, grid has {q} points", dirac.nrows(), dirac.ncols())));
    }
    // weights[b][j][k]: coordinate b = (g, i) of the frame map at cover point (j, k)
    let weights: Vec<Vec<Vec<f64>>> = (0..n)
        .flat_map(|g| (0..2).map(move |i| (g, i)))
        .map(|(g, i)| {
            (0..n)
                .map(|j| {
                    angles
                        .iter()
                        .map(|&phi| crate::circle::lifted_bump(i, n, g, (phi + 2.0 * std::f64::consts::PI * j as f64) / n as f64))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut isometry_defect: f64 = 0.0;
    for j in 0..n {
        for jj in 0..n {
            for k in 0..q {
                let gram: f64 = weights.iter().map(|w| w[j][k] * w[jj][k]).sum();
                let target = if j == jj { 1.0 } else { 0.0 };
                isometry_defect = isometry_defect.max((gram - target).abs());
            }
        }
    }
    if isometry_defect > 1e-10 {
        return Err(Error::FrameFailed(format!("frame map is not an isometry ({isometry_defect:.3e})")));
    }
    let mut out = DenseMatrix::zeros(n * q, n * q);
    for w in &weights {
        for j in 0..n {
            for jj in 0..n {
                for k in 0..q {
                    for kk in 0..q {
                        out[(j * q + k, jj * q + kk)] += dirac[(k, kk)] * (w[j][k] * w[jj][kk]);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Distance from x to the lattice (1/n)Z.
pub fn lattice_distance(x: f64, n: usize) -> f64 {
    let y = x * n as f64;
    (y - y.round()).abs() / n as f64
}
