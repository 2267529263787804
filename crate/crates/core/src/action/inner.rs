use nalgebra::DMatrix;

use super::algebra::StarAlgebra;
use super::group::Automorphism;
use crate::error::{Error, Result};
use crate::linalg::{self, c, fro_norm, identity, DenseMatrix, RANK_TOL};

#[derive(Debug, Clone)]
pub enum InnerOutcome {
    /// Unitary u with α(a) = u a u* on the algebra.
    Inner { unitary: DenseMatrix, residual: f64 },
    /// Intertwiner space of the given dimension contains no invertible element.
    NotInner { intertwiner_dim: usize },
}

impl InnerOutcome {
    pub fn is_inner(&self) -> bool {
        matches!(self, InnerOutcome::Inner { .. })
    }
}

fn conjugation_residual(alg: &StarAlgebra, alpha: &Automorphism, u: &DenseMatrix) -> f64 {
    alg.basis().iter().map(|b| fro_norm(&(alpha.apply(alg, b) - u * b * u.adjoint()))).fold(0.0, f64::max)
}

/// Searches A⁺ = span(A ∪ {1}) for T with T a = α(a) T, then takes the unitary polar part.
pub fn is_inner(alg: &StarAlgebra, alpha: &Automorphism) -> Result<InnerOutcome> {
    let n = alg.ambient_dim();
    let basis = alg.basis();
    let images: Vec<DenseMatrix> = basis.iter().map(|b| alpha.apply(alg, b)).collect();
    let mut defect: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        defect = defect.max(alg.membership_residual(&images[i]));
        defect = defect.max(fro_norm(&(alpha.apply(alg, &a.adjoint()) - images[i].adjoint())));
        for (j, b) in basis.iter().enumerate() {
            defect = defect.max(fro_norm(&(alpha.apply(alg, &(a * b)) - &images[i] * &images[j])));
        }
    }
    if defect > 1e-9 {
        return Err(Error::NotAutomorphism { defect });
    }

    let one = identity(n);
    if conjugation_residual(alg, alpha, &one) <= 1e-12 {
        return Ok(InnerOutcome::Inner { unitary: one, residual: 0.0 });
    }

    let mut plus: Vec<DenseMatrix> = basis.to_vec();
    if !alg.contains(&one) {
        plus.push(one.clone());
    }
    let d2 = n * n;
    let mut sys = DMatrix::zeros(d2 * basis.len(), plus.len());
    for (k, t) in plus.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let v = linalg::vectorize(&(t * b - &images[j] * t));
            sys.view_mut((j * d2, k), (d2, 1)).copy_from(&v);
        }
    }
    let kernel = linalg::null_space(&sys, RANK_TOL);
    let dim = kernel.ncols();
    if dim == 0 {
        return Ok(InnerOutcome::NotInner { intertwiner_dim: 0 });
    }
    for attempt in 0..4 {
        let mut t = DenseMatrix::zeros(n, n);
        for k in 0..dim {
            let w = (((k + 1) * (attempt + 3)) as f64 * 0.618_033_988_749_895).fract() + 0.25;
            let mut elem = DenseMatrix::zeros(n, n);
            for (p, basis_el) in plus.iter().enumerate() {
                elem += basis_el * kernel[(p, k)];
            }
            t += elem * c(w, 0.3 * w);
        }
        let s = linalg::singular_values(&t);
        let (top, bottom) = (s[0], *s.last().unwrap());
        if top == 0.0 || bottom <= 1e-8 * top {
            continue;
        }
        let u = linalg::polar(&t).isometry;
        let residual = conjugation_residual(alg, alpha, &u);
        if residual <= 1e-8 {
            return Ok(InnerOutcome::Inner { unitary: u, residual });
        }
    }
    Ok(InnerOutcome::NotInner { intertwiner_dim: dim })
}
