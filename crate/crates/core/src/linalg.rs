//! Dense complex matrices, spectral decompositions, functional calculus and
//! the projection lattice.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type DenseMatrix = DMatrix<C64>;

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> DenseMatrix {
    DenseMatrix::identity(n, n)
}

pub fn zeros(n: usize, m: usize) -> DenseMatrix {
    DenseMatrix::zeros(n, m)
}

pub fn adjoint(m: &DenseMatrix) -> DenseMatrix {
    m.adjoint()
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> DenseMatrix {
    DenseMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
}

pub fn diag(values: &[C64]) -> DenseMatrix {
    DenseMatrix::from_diagonal(&DVector::from_column_slice(values))
}

pub fn diag_real(values: &[f64]) -> DenseMatrix {
    DenseMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&x| c(x, 0.0))))
}

pub fn fro_norm(m: &DenseMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Full singular value decomposition m = U diag(s) V*, singular values in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub values: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    pub fn top(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Indices of singular values above the relative rank threshold.
    pub fn significant(&self, rel_tol: f64) -> impl Iterator<Item = usize> + '_ {
        let top = self.top();
        (0..self.values.len()).filter(move |&k| top > 0.0 && self.values[k] > rel_tol * top)
    }
}

/// SVD from the Hermitian eigenproblem of [[0, m], [m*, 0]], whose eigenvalues are ±σ_k;
/// tall inputs are first reduced by QR. Singular values carry absolute error ~ε‖m‖.
pub fn svd(m: &DenseMatrix) -> Svd {
    let (r, k) = (m.nrows(), m.ncols());
    if r == 0 || k == 0 {
        return Svd { u: identity(r), values: Vec::new(), v: identity(k) };
    }
    if r < k {
        let t = svd(&m.adjoint());
        return Svd { u: t.v, values: t.values, v: t.u };
    }
    let (q, square) = if r > k {
        let qr = m.clone().qr();
        (Some(qr.q()), qr.r())
    } else {
        (None, m.clone())
    };
    let mut dilation = zeros(2 * k, 2 * k);
    dilation.view_mut((0, k), (k, k)).copy_from(&square);
    dilation.view_mut((k, 0), (k, k)).copy_from(&square.adjoint());
    let eig = dilation.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    // pairs with σ well above rounding give singular vectors directly; the rest are completed
    let top = values[0];
    let floor = 1e3 * f64::EPSILON * top.max(f64::MIN_POSITIVE);
    let sig = values.iter().take_while(|&&s| s > floor).count();
    let mut u_sig = zeros(k, sig);
    let mut v_sig = zeros(k, sig);
    for (j, &i) in order[..sig].iter().enumerate() {
        let x = eig.eigenvectors.column(i);
        u_sig.set_column(j, &(x.rows(0, k) * c(std::f64::consts::SQRT_2, 0.0)));
        v_sig.set_column(j, &(x.rows(k, k) * c(std::f64::consts::SQRT_2, 0.0)));
    }
    let u_square = complete_basis(u_sig);
    let v = complete_basis(v_sig);
    let u = match q {
        Some(q) => complete_basis(q * u_square),
        None => u_square,
    };
    Svd { u, values, v }
}

/// Orthonormalizes the given columns and extends them to a unitary matrix.
fn complete_basis(cols: DenseMatrix) -> DenseMatrix {
    let n = cols.nrows();
    let mut out = zeros(n, n);
    let mut filled = 0;
    let given = cols.ncols();
    let unit_floor = 0.5 / (n as f64).sqrt();
    let candidates = (0..given).map(|j| cols.column(j).into_owned()).chain((0..n).map(|i| {
        let mut e = DVector::zeros(n);
        e[i] = c(1.0, 0.0);
        e
    }));
    for (idx, mut x) in candidates.enumerate() {
        if filled == n {
            break;
        }
        // two passes of Gram-Schmidt against the columns so far
        for _ in 0..2 {
            for j in 0..filled {
                let col = out.column(j);
                let proj = col.dotc(&x);
                x -= col * proj;
            }
        }
        let norm = x.norm();
        // a unit vector always leaves a residual ≥ 1/√n for some coordinate
        if (idx < given && norm > 1e-3) || (idx >= given && norm > unit_floor) {
            out.set_column(filled, &(x / c(norm, 0.0)));
            filled += 1;
        }
    }
    out
}

/// Singular values only, descending: the same dilation eigenproblem without singular vectors.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    let (r, k) = (m.nrows(), m.ncols());
    if r == 0 || k == 0 {
        return Vec::new();
    }
    if r < k {
        return singular_values(&m.adjoint());
    }
    let square = if r > k { m.clone().qr().r() } else { m.clone() };
    let mut dilation = zeros(2 * k, 2 * k);
    dilation.view_mut((0, k), (k, k)).copy_from(&square);
    dilation.view_mut((k, 0), (k, k)).copy_from(&square.adjoint());
    let mut values: Vec<f64> = dilation.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.truncate(k);
    values.iter_mut().for_each(|x| *x = x.max(0.0));
    values
}

/// Spectral norm.
pub fn op_norm(m: &DenseMatrix) -> f64 {
    if m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn numerical_rank(m: &DenseMatrix) -> usize {
    numerical_rank_scaled(m, 0.0)
}

/// Rank relative to max(largest singular value, scale); the scale floor keeps
/// matrices made only of rounding noise at rank zero.
pub fn numerical_rank_scaled(m: &DenseMatrix, scale: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0).max(scale);
    if top <= 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > RANK_TOL * top).count()
}

pub fn commutator(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a * b - b * a
}

/// a · b, skipping exact zeros of a; the same product, much faster for block-sparse a.
pub fn sparse_mul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.ncols(), b.nrows(), "sparse_mul dimension mismatch");
    let zero = C64::new(0.0, 0.0);
    let mut out = zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        let bj = b.column(j);
        let mut oj = out.column_mut(j);
        for k in 0..a.ncols() {
            let bkj = bj[k];
            if bkj == zero {
                continue;
            }
            for (i, aik) in a.column(k).iter().enumerate() {
                if *aik != zero {
                    oj[i] += aik * bkj;
                }
            }
        }
    }
    out
}

pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a.kronecker(b)
}

pub fn block_diag(blocks: &[DenseMatrix]) -> DenseMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(n, m);
    let (mut r, mut k) = (0, 0);
    for b in blocks {
        out.view_mut((r, k), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        k += b.ncols();
    }
    out
}

/// Hilbert-Schmidt inner product tr(a* b).
pub fn hs_inner(a: &DenseMatrix, b: &DenseMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hermitian_defect(m: &DenseMatrix) -> f64 {
    fro_norm(&(m - m.adjoint()))
}

pub fn unitary_defect(m: &DenseMatrix) -> f64 {
    op_norm(&(m.adjoint() * m - identity(m.ncols())))
}

fn scale_of(m: &DenseMatrix) -> f64 {
    fro_norm(m).max(f64::MIN_POSITIVE)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

pub fn herm_eig(m: &DenseMatrix) -> Result<HermEig> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let defect = hermitian_defect(m);
    if defect > 1e-10 * scale_of(m) {
        return Err(Error::NotHermitian { defect });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok(HermEig { values, vectors })
}

/// Unitary diagonalization M = U diag(values) U* of a normal matrix.
#[derive(Debug, Clone)]
pub struct NormalEig {
    pub values: Vec<C64>,
    pub vectors: DenseMatrix,
}

impl NormalEig {
    pub fn apply(&self, f: impl Fn(C64) -> C64) -> DenseMatrix {
        let fv: Vec<C64> = self.values.iter().map(|&z| f(z)).collect();
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= fv[k];
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.apply(|z| z)
    }
}

pub fn normal_defect(m: &DenseMatrix) -> f64 {
    fro_norm(&(m * m.adjoint() - m.adjoint() * m))
}

const MIX: [f64; 4] = [0.618_033_988_749_894_8, 1.324_717_957_244_746, 0.414_213_562_373_095, std::f64::consts::E];

/// Joint diagonalization of the Hermitian and anti-Hermitian parts.
pub fn normal_eig(m: &DenseMatrix) -> Result<NormalEig> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", n, m.ncols())));
    }
    let scale = scale_of(m);
    let defect = normal_defect(m);
    if defect > 1e-10 * scale * scale {
        return Err(Error::NotNormal { defect });
    }
    let vectors = split_clusters(m, &identity(n), 0)?;
    let values = (0..n)
        .map(|k| {
            let v = vectors.column(k);
            (v.adjoint() * m * v)[(0, 0)]
        })
        .collect();
    let out = NormalEig { values, vectors };
    let resid = fro_norm(&(out.reconstruct() - m));
    if resid > 1e-10 * scale {
        return Err(Error::NotNormal { defect: resid });
    }
    Ok(out)
}

// Diagonalizes the compression of m to the columns of basis, refining
// degenerate clusters with a different mixing constant.
fn split_clusters(m: &DenseMatrix, basis: &DenseMatrix, depth: usize) -> Result<DenseMatrix> {
    let k = basis.ncols();
    let b = basis.adjoint() * m * basis;
    let h1 = (&b + b.adjoint()).scale(0.5);
    let h2 = (&b - b.adjoint()) * c(0.0, -0.5);
    let mix = MIX[depth % MIX.len()];
    let combo = &h1 + h2.scale(mix);
    let eig = herm_eig(&((&combo + combo.adjoint()).scale(0.5)))?;
    let local = basis * &eig.vectors;
    if depth >= 6 {
        return Ok(local);
    }
    let scale = scale_of(&b).max(1e-300);
    let tol = 1e-9 * scale;
    let mut out = zeros(basis.nrows(), k);
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && (eig.values[start] - eig.values[end]).abs() <= tol {
            end += 1;
        }
        let cols = local.columns(start, end - start).into_owned();
        if end - start > 1 {
            let sub = cols.adjoint() * m * &cols;
            let mean = sub.trace() / C64::from((end - start) as f64);
            let spread = fro_norm(&(&sub - identity(end - start) * mean));
            if spread > 1e-11 * scale {
                let refined = split_clusters(m, &cols, depth + 1)?;
                out.columns_mut(start, end - start).copy_from(&refined);
            } else {
                out.columns_mut(start, end - start).copy_from(&cols);
            }
        } else {
            out.columns_mut(start, 1).copy_from(&cols);
        }
        start = end;
    }
    Ok(out)
}

/// f(M) for a normal matrix M.
pub fn func_calc(m: &DenseMatrix, f: impl Fn(C64) -> C64) -> Result<DenseMatrix> {
    if hermitian_defect(m) <= 1e-12 * scale_of(m) {
        let e = herm_eig(m)?;
        let ne = NormalEig { values: e.values.iter().map(|&x| c(x, 0.0)).collect(), vectors: e.vectors };
        return Ok(ne.apply(f));
    }
    Ok(normal_eig(m)?.apply(f))
}

/// Square root of a positive semidefinite matrix (negative noise clipped).
pub fn sqrt_psd(m: &DenseMatrix) -> Result<DenseMatrix> {
    let e = herm_eig(m)?;
    let ne = NormalEig { values: e.values.iter().map(|&x| c(x.max(0.0).sqrt(), 0.0)).collect(), vectors: e.vectors };
    Ok(ne.apply(|z| z))
}

/// Moore-Penrose pseudo-inverse with the relative rank threshold.
pub fn pinv(m: &DenseMatrix) -> DenseMatrix {
    let d = svd(m);
    let keep: Vec<usize> = d.significant(RANK_TOL).collect();
    let mut v = d.v.select_columns(&keep);
    for (j, &k) in keep.iter().enumerate() {
        v.column_mut(j).scale_mut(1.0 / d.values[k]);
    }
    v * d.u.select_columns(&keep).adjoint()
}

/// Orthonormal basis (as columns) of the kernel of m. Rank counts singular values above
/// rel_tol·max(σ_max, 1): callers assemble m from unit-scale data, so a system that vanishes
/// up to round-off has full kernel.
pub fn null_space(m: &DenseMatrix, rel_tol: f64) -> DenseMatrix {
    let n = m.ncols();
    if n == 0 {
        return zeros(0, 0);
    }
    let square = if m.nrows() > n {
        m.clone().qr().r()
    } else {
        let mut padded = zeros(n, n);
        padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        padded
    };
    let d = svd(&square);
    let floor = rel_tol * d.top().max(1.0);
    let rank = d.values.iter().filter(|&&s| s > floor).count();
    d.v.columns(rank, n - rank).into_owned()
}

/// Minimum-norm least-squares solution of m x = rhs. A thin QR reduces the problem to a square
/// pseudo-inverse of the smaller side.
pub fn lstsq(m: &DenseMatrix, rhs: &DVector<C64>) -> DVector<C64> {
    if m.nrows() >= m.ncols() {
        let qr = m.clone().qr();
        pinv(&qr.r()) * (qr.q().adjoint() * rhs)
    } else {
        // m = R* Q* with Q spanning the row space, so x = Q (R*)⁺ rhs
        let qr = m.adjoint().qr();
        qr.q() * (pinv(&qr.r().adjoint()) * rhs)
    }
}

/// Column-major flattening, the coordinate vector used for spans of matrices.
pub fn vectorize(m: &DenseMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, n: usize) -> DenseMatrix {
    DenseMatrix::from_column_slice(n, n, v.as_slice())
}

/// x = isometry · absval with absval = (x*x)^{1/2}; the isometry has
/// initial projection [absval] and final projection [x].
#[derive(Debug, Clone)]
pub struct PolarParts {
    pub isometry: DenseMatrix,
    pub absval: DenseMatrix,
}

pub fn polar(x: &DenseMatrix) -> PolarParts {
    let (n, m) = (x.nrows(), x.ncols());
    let d = svd(x);
    let mut isometry = zeros(n, m);
    let mut absval = zeros(m, m);
    for k in d.significant(RANK_TOL) {
        let vk = d.v.column(k);
        isometry += d.u.column(k) * vk.adjoint();
        absval += vk * vk.adjoint() * c(d.values[k], 0.0);
    }
    PolarParts { isometry, absval }
}

/// Self-adjoint idempotent.
#[derive(Debug, Clone)]
pub struct Projection {
    matrix: DenseMatrix,
}

impl Projection {
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        let defect = projection_defect(&matrix);
        if defect > 1e-10 {
            return Err(Error::NotProjection { defect });
        }
        Ok(Self { matrix })
    }

    pub fn zero(n: usize) -> Self {
        Self { matrix: zeros(n, n) }
    }

    pub fn one(n: usize) -> Self {
        Self { matrix: identity(n) }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }

    /// p ≤ q in the operator order, within tol.
    pub fn le(&self, other: &Projection, tol: f64) -> bool {
        let diff = other.matrix() - self.matrix();
        match herm_eig(&diff) {
            Ok(e) => e.values.last().is_none_or(|&v| v >= -tol),
            Err(_) => false,
        }
    }
}

pub fn projection_defect(m: &DenseMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    op_norm(&(m - m.adjoint())).max(op_norm(&(m * m - m)))
}

/// Orthonormal basis of the range, at the relative rank threshold.
pub fn range_basis(x: &DenseMatrix) -> DenseMatrix {
    let n = x.nrows();
    if x.ncols() == 0 {
        return zeros(n, 0);
    }
    let d = svd(x);
    let rank = d.significant(RANK_TOL).count();
    d.u.columns(0, rank).into_owned()
}

pub fn range_proj(x: &DenseMatrix) -> Projection {
    let b = range_basis(x);
    Projection { matrix: &b * b.adjoint() }
}

fn check_pair(p: &Projection, q: &Projection) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", p.dim(), q.dim())));
    }
    for m in [p.matrix(), q.matrix()] {
        let defect = projection_defect(m);
        if defect > 1e-10 {
            return Err(Error::NotProjection { defect });
        }
    }
    Ok(())
}

/// Range projection of a combination of projections; its scale is 1, so round-off of a
/// vanishing combination must not count as rank.
fn lattice_range(x: &DenseMatrix) -> Projection {
    let d = svd(x);
    let floor = RANK_TOL * d.top().max(1.0);
    let rank = d.values.iter().filter(|&&s| s > floor).count();
    let b = d.u.columns(0, rank);
    Projection { matrix: b * b.adjoint() }
}

/// p ∨ q = [p + q].
pub fn proj_join(p: &Projection, q: &Projection) -> Result<Projection> {
    check_pair(p, q)?;
    Ok(lattice_range(&(p.matrix() + q.matrix())))
}

/// p ∧ q = 1 − [2 − (p + q)].
pub fn proj_meet(p: &Projection, q: &Projection) -> Result<Projection> {
    check_pair(p, q)?;
    let n = p.dim();
    let two = identity(n) * c(2.0, 0.0);
    let r = lattice_range(&(two - p.matrix() - q.matrix()));
    Ok(Projection { matrix: identity(n) - r.matrix })
}

/// p ∖ q = p − p ∧ q.
pub fn proj_diff(p: &Projection, q: &Projection) -> Result<Projection> {
    let meet = proj_meet(p, q)?;
    Ok(Projection { matrix: p.matrix() - meet.matrix })
}

/// Random matrices for tests and experiments.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, m, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c(re, im) / std::f64::consts::SQRT_2
        })
    }

    pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix {
        let g = gaussian(rng, n, n);
        (&g + g.adjoint()).scale(0.5)
    }

    pub fn positive<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix {
        let g = gaussian(rng, n, n);
        &g * g.adjoint()
    }

    /// Haar-distributed unitary via QR with phase correction.
    pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix {
        let g = gaussian(rng, n, n);
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for k in 0..n {
            let d = r[(k, k)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
            let mut col = q.column_mut(k);
            col *= phase;
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> bool {
        fro_norm(&(a - b)) <= tol
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(adjoint(&identity(3)), identity(3));
        let m = from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(adjoint(&m), from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]));
        let i = DenseMatrix::from_element(1, 1, c(0.0, 1.0));
        assert_eq!(adjoint(&i)[(0, 0)], c(0.0, -1.0));
    }

    #[test]
    fn herm_eig_examples() {
        let e = herm_eig(&diag_real(&[3.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        let e = herm_eig(&from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        let e = herm_eig(&identity(4)).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        let bad = from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(herm_eig(&bad), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn herm_eig_reconstructs_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..10 {
            let h = random::hermitian(&mut rng, n);
            let e = herm_eig(&h).unwrap();
            let lam = diag_real(&e.values);
            let rec = &e.vectors * lam * e.vectors.adjoint();
            assert!(close(&rec, &h, 1e-10 * fro_norm(&h)));
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn func_calc_examples() {
        let m = diag_real(&[4.0, 9.0]);
        assert!(close(&func_calc(&m, |z| z).unwrap(), &m, 1e-14));
        assert!(close(&func_calc(&m, |z| z.sqrt()).unwrap(), &diag_real(&[2.0, 3.0]), 1e-14));
        // rotation by a quarter turn has eigenvalues e^{±iπ/2}
        let u = from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let r = func_calc(&u, |z| C64::from_polar(1.0, z.arg() / 2.0)).unwrap();
        let e = normal_eig(&r).unwrap();
        let mut args: Vec<f64> = e.values.iter().map(|z| z.arg()).collect();
        args.sort_by(f64::total_cmp);
        assert!((args[0] + PI / 4.0).abs() < 1e-12 && (args[1] - PI / 4.0).abs() < 1e-12);
        assert!(close(&(&r * &r), &u, 1e-12));
    }

    #[test]
    fn func_calc_rejects_non_normal() {
        let m = from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(func_calc(&m, |z| z), Err(Error::NotNormal { .. })));
    }

    #[test]
    fn func_calc_polynomial_and_degenerate_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [1, 3, 6, 9] {
            let w = random::unitary(&mut rng, n);
            // repeated eigenvalues on purpose
            let phases: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, 0.7 * (k % 3) as f64)).collect();
            let u = &w * diag(&phases) * w.adjoint();
            let cube = func_calc(&u, |z| z * z * z + z).unwrap();
            let direct = &u * &u * &u + &u;
            assert!(close(&cube, &direct, 1e-10 * (n as f64)));
        }
    }

    #[test]
    fn polar_examples() {
        let p = polar(&identity(3));
        assert!(close(&p.isometry, &identity(3), 1e-14) && close(&p.absval, &identity(3), 1e-14));
        let p = polar(&diag_real(&[2.0, 0.0]));
        assert!(close(&p.isometry, &diag_real(&[1.0, 0.0]), 1e-14));
        assert!(close(&p.absval, &diag_real(&[2.0, 0.0]), 1e-14));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random::gaussian(&mut rng, 5, 5);
        let p = polar(&x);
        assert!(unitary_defect(&p.isometry) < 1e-10);
    }

    #[test]
    fn polar_partial_isometry_spaces() {
        let x = from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let p = polar(&x);
        assert!(close(&(&p.isometry * &p.absval), &x, 1e-14));
        let initial = p.isometry.adjoint() * &p.isometry;
        let fin = &p.isometry * p.isometry.adjoint();
        assert!(close(&initial, range_proj(&p.absval).matrix(), 1e-12));
        assert!(close(&fin, range_proj(&x).matrix(), 1e-12));
    }

    #[test]
    fn range_proj_examples() {
        assert!(close(range_proj(&zeros(3, 3)).matrix(), &zeros(3, 3), 0.0));
        assert!(close(range_proj(&diag_real(&[5.0, 0.0])).matrix(), &diag_real(&[1.0, 0.0]), 1e-14));
        let s = 1.0 / 2f64.sqrt();
        let x = from_real(2, 2, &[s, 0.0, s, 0.0]);
        let expected = from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert!(close(range_proj(&x).matrix(), &expected, 1e-14));
    }

    #[test]
    fn lattice_examples() {
        let p = Projection::new(diag_real(&[1.0, 0.0])).unwrap();
        let q = Projection::new(diag_real(&[0.0, 1.0])).unwrap();
        assert!(close(proj_join(&p, &p).unwrap().matrix(), p.matrix(), 1e-12));
        assert!(close(proj_meet(&p, &p).unwrap().matrix(), p.matrix(), 1e-12));
        assert!(close(proj_diff(&p, &p).unwrap().matrix(), &zeros(2, 2), 1e-12));
        assert!(close(proj_join(&p, &q).unwrap().matrix(), &identity(2), 1e-12));
        assert!(close(proj_meet(&p, &q).unwrap().matrix(), &zeros(2, 2), 1e-12));
        let diag45 = Projection::new(from_real(2, 2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
        assert!(close(proj_join(&p, &diag45).unwrap().matrix(), &identity(2), 1e-12));
        assert!(close(proj_meet(&p, &diag45).unwrap().matrix(), &zeros(2, 2), 1e-12));
        assert!(Projection::new(diag_real(&[2.0, 0.0])).is_err());
    }

    #[test]
    fn meet_of_overlapping_planes() {
        // two planes in C^3 sharing the first axis
        let p = Projection::new(diag_real(&[1.0, 1.0, 0.0])).unwrap();
        let s = 0.5;
        let q = Projection::new(from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, s, s, 0.0, s, s])).unwrap();
        let meet = proj_meet(&p, &q).unwrap();
        assert!(close(meet.matrix(), &diag_real(&[1.0, 0.0, 0.0]), 1e-10));
        assert_eq!(proj_join(&p, &q).unwrap().rank(), 3);
    }

    #[test]
    fn meet_with_identity_survives_round_off() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = random::unitary(&mut rng, 3);
        let full = Projection::new(&w * w.adjoint()).unwrap();
        let plane = Projection::new(&w * diag_real(&[1.0, 1.0, 0.0]) * w.adjoint()).unwrap();
        assert_eq!(proj_meet(&full, &full).unwrap().rank(), 3);
        assert_eq!(proj_meet(&plane, &full).unwrap().rank(), 2);
        assert!(proj_diff(&full, &full).unwrap().matrix().norm() <= 1e-12);
    }

    #[test]
    fn null_space_of_round_off_is_everything() {
        let tiny = identity(3) * c(1e-16, 0.0);
        assert_eq!(null_space(&tiny, RANK_TOL).ncols(), 3);
        assert_eq!(null_space(&zeros(5, 3), RANK_TOL).ncols(), 3);
        assert_eq!(null_space(&from_real(1, 2, &[1.0, 1.0]), RANK_TOL).ncols(), 1);
    }
}
