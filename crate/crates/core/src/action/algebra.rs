use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, c, fro_norm, herm_eig, identity, DenseMatrix, C64, RANK_TOL};

/// Incremental orthonormal basis of a span of matrices (Hilbert-Schmidt inner product).
#[derive(Debug, Clone)]
pub struct SpanBuilder {
    n: usize,
    basis: Vec<DVector<C64>>,
    scale: f64,
}

impl SpanBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, basis: Vec::new(), scale: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Adds m if it is independent of the current span; returns whether it was added.
    pub fn push(&mut self, m: &DenseMatrix) -> bool {
        let mut v = linalg::vectorize(m);
        let norm0 = v.norm();
        if norm0 == 0.0 {
            return false;
        }
        self.scale = self.scale.max(norm0);
        if norm0 <= 1e-13 * self.scale {
            return false;
        }
        // one pass decides membership; the second restores orthogonality for accepted vectors
        let project_out = |v: &mut DVector<C64>| {
            for b in &self.basis {
                let coef = b.dotc(v);
                v.axpy(-coef, b, c(1.0, 0.0));
            }
        };
        project_out(&mut v);
        if v.norm() <= RANK_TOL * norm0 {
            return false;
        }
        project_out(&mut v);
        let rest = v.norm();
        self.basis.push(v / c(rest, 0.0));
        true
    }

    pub fn matrices(&self) -> Vec<DenseMatrix> {
        self.basis.iter().map(|v| linalg::unvectorize(v, self.n)).collect()
    }
}

/// Finite-dimensional *-algebra of ambient_dim × ambient_dim matrices, stored
/// through a Hilbert-Schmidt orthonormal basis.
#[derive(Debug, Clone)]
pub struct StarAlgebra {
    ambient_dim: usize,
    basis: Vec<DenseMatrix>,
    frame: DMatrix<C64>,
    generators: Vec<DenseMatrix>,
    unit: Option<DenseMatrix>,
}

impl StarAlgebra {
    /// Algebra spanned by the given matrices; closure is not enforced (see `closure_residual`).
    pub fn from_spanning(ambient_dim: usize, spanning: &[DenseMatrix]) -> Result<Self> {
        let mut span = SpanBuilder::new(ambient_dim);
        for m in spanning {
            check_square(m, ambient_dim)?;
            span.push(m);
        }
        Ok(Self::from_basis(ambient_dim, span.matrices(), spanning.to_vec()))
    }

    /// Smallest *-algebra containing the generators (and the ambient identity if requested).
    pub fn generated(ambient_dim: usize, gens: &[DenseMatrix], with_identity: bool) -> Result<Self> {
        let mut all: Vec<DenseMatrix> = Vec::new();
        if with_identity {
            all.push(identity(ambient_dim));
        }
        for g in gens {
            check_square(g, ambient_dim)?;
            all.push(g.clone());
            let ga = g.adjoint();
            if fro_norm(&(&ga - g)) > 1e-14 * fro_norm(g) {
                all.push(ga);
            }
        }
        let mut span = SpanBuilder::new(ambient_dim);
        let mut queue: Vec<DenseMatrix> = Vec::new();
        for g in &all {
            if span.push(g) {
                queue.push(g.clone());
            }
        }
        // the orthonormal basis of span(all) generates the same algebra with fewer factors
        let right = span.matrices();
        let cap = ambient_dim * ambient_dim;
        while let Some(x) = queue.pop() {
            for g in &right {
                let prod = linalg::sparse_mul(&x, g);
                if span.push(&prod) {
                    if span.len() > cap {
                        return Err(Error::ClosureDiverged(ambient_dim));
                    }
                    queue.push(prod);
                }
            }
        }
        Ok(Self::from_basis(ambient_dim, span.matrices(), all))
    }

    /// Algebra whose basis is taken as given; it must be Hilbert-Schmidt orthonormal to 1e-10.
    pub fn from_orthonormal(ambient_dim: usize, basis: Vec<DenseMatrix>) -> Result<Self> {
        for m in &basis {
            check_square(m, ambient_dim)?;
        }
        let out = Self::from_basis(ambient_dim, basis.clone(), basis);
        let gram = out.frame.adjoint() * &out.frame;
        let defect = fro_norm(&(gram - DMatrix::<C64>::identity(out.dim(), out.dim())));
        if defect > 1e-10 {
            return Err(Error::InvalidInput(format!("basis is not orthonormal (Gram defect {defect:.2e})")));
        }
        Ok(out)
    }

    fn from_basis(ambient_dim: usize, basis: Vec<DenseMatrix>, generators: Vec<DenseMatrix>) -> Self {
        let d2 = ambient_dim * ambient_dim;
        let mut frame = DMatrix::zeros(d2, basis.len());
        for (k, b) in basis.iter().enumerate() {
            frame.set_column(k, &linalg::vectorize(b));
        }
        let mut out = Self { ambient_dim, basis, frame, generators, unit: None };
        out.unit = out.find_unit();
        out
    }

    fn find_unit(&self) -> Option<DenseMatrix> {
        if self.basis.is_empty() {
            return None;
        }
        let mut support = DenseMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            support += b * b.adjoint() + b.adjoint() * b;
        }
        let p = linalg::range_proj(&support).into_matrix();
        if self.membership_residual(&p) > 1e-8 {
            return None;
        }
        let defect = self.basis.iter().map(|b| fro_norm(&(&p * b - b)).max(fro_norm(&(b * &p - b)))).fold(0.0, f64::max);
        (defect <= 1e-8).then_some(p)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DenseMatrix] {
        &self.basis
    }

    pub fn generators(&self) -> &[DenseMatrix] {
        &self.generators
    }

    pub fn unit(&self) -> Option<&DenseMatrix> {
        self.unit.as_ref()
    }

    pub fn is_unital(&self) -> bool {
        self.unit.is_some()
    }

    pub fn coords(&self, m: &DenseMatrix) -> DVector<C64> {
        self.frame.ad_mul(&linalg::vectorize(m))
    }

    pub fn element(&self, coords: &DVector<C64>) -> DenseMatrix {
        linalg::unvectorize(&(&self.frame * coords), self.ambient_dim)
    }

    /// Relative distance of m from the algebra.
    pub fn membership_residual(&self, m: &DenseMatrix) -> f64 {
        let norm = fro_norm(m);
        if norm == 0.0 {
            return 0.0;
        }
        let proj = self.element(&self.coords(m));
        fro_norm(&(m - proj)) / norm
    }

    pub fn contains(&self, m: &DenseMatrix) -> bool {
        m.nrows() == self.ambient_dim && self.membership_residual(m) <= 1e-9
    }

    /// Worst relative defect of products and adjoints of basis pairs.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            worst = worst.max(self.membership_residual(&a.adjoint()));
            for b in &self.basis {
                worst = worst.max(self.membership_residual(&(a * b)));
            }
        }
        worst
    }

    /// Columns are the commutators [b_k, g] stacked over generators g; the kernel is the center.
    fn commutation_system(&self) -> DMatrix<C64> {
        let owned;
        let gens: Vec<&DenseMatrix> = if self.generators.is_empty() || self.generators.len() > 6 {
            // a generic pair (with adjoints) already generates every simple summand
            owned = self.generic_elements(3);
            owned.iter().collect()
        } else {
            self.generators.iter().collect()
        };
        let d2 = self.ambient_dim * self.ambient_dim;
        let mut sys = DMatrix::zeros(d2 * gens.len(), self.dim());
        for (j, g) in gens.iter().enumerate() {
            for (k, b) in self.basis.iter().enumerate() {
                let comm = linalg::vectorize(&linalg::commutator(b, g));
                sys.view_mut((j * d2, k), (d2, 1)).copy_from(&comm);
            }
        }
        sys
    }

    /// Deterministic combinations of the basis with irrational weights, and their adjoints.
    fn generic_elements(&self, count: usize) -> Vec<DenseMatrix> {
        let mut out = Vec::with_capacity(2 * count);
        for m in 0..count {
            let mut x = DenseMatrix::zeros(self.ambient_dim, self.ambient_dim);
            for (k, b) in self.basis.iter().enumerate() {
                let t = (k * count + m) as f64 + 1.0;
                let w = c((t * 0.618_033_988_749_895).fract() - 0.5, (t * 0.414_213_562_373_095).fract() - 0.5);
                x += b * w;
            }
            out.push(x.adjoint());
            out.push(x);
        }
        out
    }

    pub fn center(&self) -> Result<StarAlgebra> {
        let kernel = linalg::null_space(&self.commutation_system(), RANK_TOL);
        let elems: Vec<DenseMatrix> = (0..kernel.ncols()).map(|k| self.element(&kernel.column(k).into_owned())).collect();
        StarAlgebra::from_spanning(self.ambient_dim, &elems)
    }

    /// Minimal projections of the center, i.e. the units of the simple summands.
    pub fn minimal_central_projections(&self) -> Result<Vec<DenseMatrix>> {
        let unit = self.unit.clone().ok_or(Error::NotUnital)?;
        let center = self.center()?;
        let mut h = DenseMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (k, z) in center.basis().iter().enumerate() {
            // independent weights on the real and imaginary parts keep distinct summands apart
            let w = ((k as f64 + 1.0) * 0.754_877_666_246_692_7).fract() + 0.5;
            let w_im = ((k as f64 + 1.0) * 0.569_840_290_998_053_3).fract() + 0.5;
            h += (z + z.adjoint()) * c(w, 0.0) + (z - z.adjoint()) * c(0.0, w_im);
        }
        let h = &unit * h * &unit;
        let e = herm_eig(&((&h + h.adjoint()).scale(0.5)))?;
        let scale = e.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let mut out = Vec::new();
        let mut start = 0;
        let n = e.values.len();
        while start < n {
            let mut end = start + 1;
            while end < n && (e.values[start] - e.values[end]).abs() <= 1e-8 * scale {
                end += 1;
            }
            let cols = e.vectors.columns(start, end - start);
            let p = &unit * (cols * cols.adjoint()) * &unit;
            if fro_norm(&p) > 0.5 {
                let p = (&p + p.adjoint()).scale(0.5);
                out.push(linalg::range_proj(&p).into_matrix());
            }
            start = end;
        }
        Ok(out)
    }
}

fn check_square(m: &DenseMatrix, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!("expected {n}x{n}, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// Matrix unit E_ij in dimension n.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    m[(i, j)] = c(1.0, 0.0);
    m
}

/// The full matrix algebra M_n.
pub fn full_matrix_algebra(n: usize) -> StarAlgebra {
    let units: Vec<DenseMatrix> = (0..n).flat_map(|i| (0..n).map(move |j| matrix_unit(n, i, j))).collect();
    StarAlgebra::from_spanning(n, &units).expect("matrix units are square")
}

/// Diagonal matrices, i.e. functions on n points.
pub fn diagonal_algebra(n: usize) -> StarAlgebra {
    let units: Vec<DenseMatrix> = (0..n).map(|i| matrix_unit(n, i, i)).collect();
    StarAlgebra::from_spanning(n, &units).expect("matrix units are square")
}

/// Block-diagonal algebra ⊕_k M_{sizes[k]}.
pub fn block_algebra(sizes: &[usize]) -> StarAlgebra {
    let n: usize = sizes.iter().sum();
    let mut units = Vec::new();
    let mut off = 0;
    for &s in sizes {
        for i in 0..s {
            for j in 0..s {
                units.push(matrix_unit(n, off + i, off + j));
            }
        }
        off += s;
    }
    StarAlgebra::from_spanning(n, &units).expect("matrix units are square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag_real;

    #[test]
    fn generated_matrix_algebra() {
        let gen = matrix_unit(3, 0, 1) + matrix_unit(3, 1, 2);
        let alg = StarAlgebra::generated(3, &[gen], true).unwrap();
        assert_eq!(alg.dim(), 9);
        assert!(alg.closure_residual() < 1e-12);
        assert!(alg.unit().is_some());
    }

    #[test]
    fn generated_by_diagonal() {
        let alg = StarAlgebra::generated(3, &[diag_real(&[1.0, 2.0, 2.0])], false).unwrap();
        assert_eq!(alg.dim(), 2);
        let unit = alg.unit().unwrap();
        assert!(fro_norm(&(unit - identity(3))) < 1e-12);
    }

    #[test]
    fn non_unit_support() {
        let alg = StarAlgebra::generated(3, &[diag_real(&[1.0, 0.0, 0.0])], false).unwrap();
        assert_eq!(alg.dim(), 1);
        assert!(fro_norm(&(alg.unit().unwrap() - diag_real(&[1.0, 0.0, 0.0]))) < 1e-12);
    }

    #[test]
    fn center_and_blocks() {
        let alg = block_algebra(&[2, 1, 2]);
        assert_eq!(alg.dim(), 9);
        assert_eq!(alg.center().unwrap().dim(), 3);
        let projs = alg.minimal_central_projections().unwrap();
        assert_eq!(projs.len(), 3);
        let mut ranks: Vec<usize> = projs.iter().map(|p| p.trace().re.round() as usize).collect();
        ranks.sort();
        assert_eq!(ranks, vec![1, 2, 2]);
    }

    #[test]
    fn membership() {
        let alg = diagonal_algebra(2);
        assert!(alg.contains(&diag_real(&[3.0, -1.0])));
        assert!(!alg.contains(&matrix_unit(2, 0, 1)));
    }
}
