use crate::action::StarAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{self, fro_norm, identity, DenseMatrix, C64};

/// Σ a_k db_k with each b_k stored as its traceless part, the canonical representative modulo scalars.
#[derive(Debug, Clone, Default)]
pub struct OneForm {
    terms: Vec<(DenseMatrix, DenseMatrix)>,
}

/// b − (tr b / n)·1, which is zero exactly when b is a scalar.
fn traceless(b: &DenseMatrix) -> DenseMatrix {
    let n = b.nrows();
    if n == 0 {
        return b.clone();
    }
    let mean = b.trace() / C64::from(n as f64);
    b - identity(n) * mean
}

impl OneForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[(DenseMatrix, DenseMatrix)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds a·db, dropping it when b is a scalar or a vanishes.
    pub fn push(&mut self, a: DenseMatrix, b: &DenseMatrix) {
        let reduced = traceless(b);
        if fro_norm(&reduced) <= 1e-15 * fro_norm(b) || fro_norm(&a) == 0.0 {
            return;
        }
        self.terms.push((a, reduced));
    }

    pub fn add(&self, other: &OneForm) -> OneForm {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn scale(&self, s: C64) -> OneForm {
        OneForm { terms: self.terms.iter().map(|(a, b)| (a * s, b.clone())).collect() }
    }

    /// c · Σ a_k db_k = Σ (c a_k) db_k
    pub fn left_mul(&self, c: &DenseMatrix) -> OneForm {
        OneForm { terms: self.terms.iter().map(|(a, b)| (c * a, b.clone())).collect() }
    }

    /// (Σ a_k db_k) c = Σ a_k d(b_k c) − a_k b_k dc
    pub fn right_mul(&self, c: &DenseMatrix) -> OneForm {
        let mut out = OneForm::zero();
        for (a, b) in &self.terms {
            out.push(a.clone(), &(b * c));
            out.push(-(a * b), c);
        }
        out
    }
}

/// Universal differential: da = 1 ⊗ ā.
pub fn d(a: &DenseMatrix) -> OneForm {
    let mut out = OneForm::zero();
    out.push(identity(a.nrows()), a);
    out
}

/// Σ rep(a)[D, rep(b)].
pub fn represent_form(form: &OneForm, dirac: &DenseMatrix, rep: impl Fn(&DenseMatrix) -> DenseMatrix) -> DenseMatrix {
    let n = dirac.nrows();
    let mut out = DenseMatrix::zeros(n, n);
    for (a, b) in form.terms() {
        out += rep(a) * linalg::commutator(dirac, &rep(b));
    }
    out
}

/// Finitely generated projective module pA^N, with p ∈ M_N(A) stored as N×N blocks.
#[derive(Debug, Clone)]
pub struct FramedModule {
    pub algebra: StarAlgebra,
    pub rank: usize,
    pub projection: Vec<Vec<DenseMatrix>>,
}

impl FramedModule {
    pub fn new(algebra: StarAlgebra, projection: Vec<Vec<DenseMatrix>>) -> Result<Self> {
        let rank = projection.len();
        let d = algebra.ambient_dim();
        if projection.iter().any(|row| row.len() != rank) || projection.iter().flatten().any(|b| b.nrows() != d || b.ncols() != d)
        {
            return Err(Error::DimensionMismatch(format!("projection must be {rank}×{rank} blocks of size {d}")));
        }
        let out = Self { algebra, rank, projection };
        let defect = linalg::projection_defect(&out.projection_matrix());
        if defect > 1e-10 {
            return Err(Error::NotProjection { defect });
        }
        if let Some(worst) = out.projection.iter().flatten().map(|b| out.algebra.membership_residual(b)).reduce(f64::max) {
            if worst > 1e-9 {
                return Err(Error::InvalidInput(format!("projection entries leave the algebra by {worst:.3e}")));
            }
        }
        Ok(out)
    }

    /// Free module A^N (p = identity). A unit within rounding of the ambient identity is replaced by it exactly.
    pub fn free(algebra: StarAlgebra, rank: usize) -> Result<Self> {
        let d = algebra.ambient_dim();
        let unit = match algebra.unit() {
            Some(u) if fro_norm(&(u - identity(d))) > 1e-10 => u.clone(),
            _ => identity(d),
        };
        let projection = (0..rank)
            .map(|k| (0..rank).map(|l| if k == l { unit.clone() } else { DenseMatrix::zeros(d, d) }).collect())
            .collect();
        Self::new(algebra, projection)
    }

    pub fn projection_matrix(&self) -> DenseMatrix {
        let d = self.algebra.ambient_dim();
        let mut p = DenseMatrix::zeros(self.rank * d, self.rank * d);
        for (k, row) in self.projection.iter().enumerate() {
            for (l, b) in row.iter().enumerate() {
                p.view_mut((k * d, l * d), (d, d)).copy_from(b);
            }
        }
        p
    }

    /// p applied to a coordinate column, i.e. the inclusion-projection composite.
    pub fn project(&self, x: &[DenseMatrix]) -> Vec<DenseMatrix> {
        let d = self.algebra.ambient_dim();
        (0..self.rank)
            .map(|k| {
                let mut acc = DenseMatrix::zeros(d, d);
                for (xl, pkl) in x.iter().zip(&self.projection[k]) {
                    acc += pkl * xl;
                }
                acc
            })
            .collect()
    }

    /// max_k ‖(px)_k − x_k‖, zero for module elements.
    pub fn membership_residual(&self, x: &[DenseMatrix]) -> f64 {
        self.project(x).iter().zip(x).map(|(a, b)| fro_norm(&(a - b))).fold(0.0, f64::max)
    }
}

/// Grassmannian connection ∇ = p(1⊗d)i: coordinate k of ∇x is Σ_l p_kl dx_l.
pub fn grassmann_connection(module: &FramedModule, x: &[DenseMatrix]) -> Vec<OneForm> {
    (0..module.rank)
        .map(|k| {
            let mut form = OneForm::zero();
            for (l, xl) in x.iter().enumerate() {
                form = form.add(&d(xl).left_mul(&module.projection[k][l]));
            }
            form
        })
        .collect()
}

/// max_k ‖rep(∇(xa))_k − rep(∇x)_k rep(a) − rep(x_k)[D, rep(a)]‖.
pub fn leibniz_residual(
    module: &FramedModule,
    x: &[DenseMatrix],
    a: &DenseMatrix,
    dirac: &DenseMatrix,
    rep: impl Fn(&DenseMatrix) -> DenseMatrix + Copy,
) -> f64 {
    let xa: Vec<DenseMatrix> = x.iter().map(|xl| xl * a).collect();
    let lhs = grassmann_connection(module, &xa);
    let base = grassmann_connection(module, x);
    let da = represent_form(&d(a), dirac, rep);
    lhs.iter()
        .zip(&base)
        .zip(x)
        .map(|((l, b), xk)| {
            let rhs = represent_form(b, dirac, rep) * rep(a) + rep(xk) * &da;
            fro_norm(&(represent_form(l, dirac, rep) - rhs))
        })
        .fold(0.0, f64::max)
}

/// Random projection in M_N(A): the positive spectral projection of a random selfadjoint element.
pub fn random_module<R: rand::Rng + ?Sized>(rng: &mut R, algebra: StarAlgebra, rank: usize) -> Result<FramedModule> {
    let d = algebra.ambient_dim();
    let mut h = DenseMatrix::zeros(rank * d, rank * d);
    for k in 0..rank {
        for l in k..rank {
            let block = random_element(rng, &algebra);
            let block = if k == l { (&block + block.adjoint()) * C64::from(0.5) } else { block };
            h.view_mut((k * d, l * d), (d, d)).copy_from(&block);
            if k != l {
                h.view_mut((l * d, k * d), (d, d)).copy_from(&block.adjoint());
            }
        }
    }
    let p = linalg::func_calc(&h, |z| C64::from(if z.re > 0.0 { 1.0 } else { 0.0 }))?;
    let projection = (0..rank).map(|k| (0..rank).map(|l| p.view((k * d, l * d), (d, d)).into_owned()).collect()).collect();
    FramedModule::new(algebra, projection)
}

/// Gaussian combination of the algebra's basis.
pub fn random_element<R: rand::Rng + ?Sized>(rng: &mut R, algebra: &StarAlgebra) -> DenseMatrix {
    let coords = nalgebra::DVector::from_fn(algebra.dim(), |_, _| {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        C64::new(re, im)
    });
    algebra.element(&coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{block_algebra, diagonal_algebra, full_matrix_algebra};
    use crate::linalg::{c, from_real, random};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ident(m: &DenseMatrix) -> DenseMatrix {
        m.clone()
    }

    #[test]
    fn d_kills_scalars() {
        assert!(d(&identity(3)).is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random::gaussian(&mut rng, 3, 3);
        let shifted = &a + identity(3) * c(2.5, -1.0);
        let dirac = random::hermitian(&mut rng, 3);
        let lhs = represent_form(&d(&shifted), &dirac, ident);
        let rhs = represent_form(&d(&a), &dirac, ident);
        assert!(fro_norm(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn two_by_two_commutator() {
        let dirac = from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let a = from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let out = represent_form(&d(&a), &dirac, ident);
        assert!(fro_norm(&(out - from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]))) < 1e-15);
    }

    #[test]
    fn leibniz_for_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [2, 4] {
            let a = random::gaussian(&mut rng, n, n);
            let b = random::gaussian(&mut rng, n, n);
            let dirac = random::hermitian(&mut rng, n);
            let dab = represent_form(&d(&(&a * &b)), &dirac, ident);
            let split = represent_form(&d(&a).right_mul(&b), &dirac, ident) + represent_form(&d(&b).left_mul(&a), &dirac, ident);
            assert!(fro_norm(&(dab - split)) < 1e-11);
        }
    }

    #[test]
    fn free_module_connection() {
        let alg = full_matrix_algebra(2);
        let module = FramedModule::free(alg, 1).unwrap();
        assert!(grassmann_connection(&module, &[identity(2)])[0].is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random::gaussian(&mut rng, 2, 2);
        let dirac = random::hermitian(&mut rng, 2);
        let nabla = represent_form(&grassmann_connection(&module, std::slice::from_ref(&a))[0], &dirac, ident);
        assert!(fro_norm(&(nabla - linalg::commutator(&dirac, &a))) < 1e-13);
    }

    #[test]
    fn leibniz_on_random_projective_modules() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for alg in [full_matrix_algebra(2), diagonal_algebra(4), block_algebra(&[1, 2])] {
            let d = alg.ambient_dim();
            let module = random_module(&mut rng, alg.clone(), 2).unwrap();
            let y: Vec<DenseMatrix> = (0..2).map(|_| random_element(&mut rng, &alg)).collect();
            let x = module.project(&y);
            assert!(module.membership_residual(&x) < 1e-12);
            let a = random_element(&mut rng, &alg);
            let dirac = random::hermitian(&mut rng, d);
            assert!(leibniz_residual(&module, &x, &a, &dirac, ident) < 1e-10);
        }
    }
}
