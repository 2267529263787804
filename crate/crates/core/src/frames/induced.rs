use serde::Serialize;

use super::{check_frame, vn_orthogonalize, GaloisFrame};
use crate::action::StarAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{self, identity, numerical_rank, op_norm, DenseMatrix};

/// Representation of the base on C^d by compression a ↦ J*aJ, with JJ* commuting with the base.
#[derive(Debug, Clone)]
pub struct BaseRep {
    isometry: DenseMatrix,
}

impl BaseRep {
    pub fn new(base: &StarAlgebra, isometry: DenseMatrix) -> Result<Self> {
        if isometry.nrows() != base.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "isometry has {} rows, ambient {}",
                isometry.nrows(),
                base.ambient_dim()
            )));
        }
        let defect = op_norm(&(isometry.adjoint() * &isometry - identity(isometry.ncols())));
        if defect > 1e-10 {
            return Err(Error::InvalidInput(format!("compression map is not an isometry (defect {defect:.3e})")));
        }
        let p = &isometry * isometry.adjoint();
        let comm = base.generators().iter().map(|g| op_norm(&linalg::commutator(&p, g))).fold(0.0, f64::max);
        if comm > 1e-10 {
            return Err(Error::InvalidInput(format!("compression range is not base-invariant (defect {comm:.3e})")));
        }
        Ok(Self { isometry })
    }

    /// Compression onto the first `d` ambient coordinates.
    pub fn leading_block(base: &StarAlgebra, d: usize) -> Result<Self> {
        let n = base.ambient_dim();
        Self::new(base, identity(n).columns(0, d).into_owned())
    }

    pub fn dim(&self) -> usize {
        self.isometry.ncols()
    }

    pub fn apply(&self, a: &DenseMatrix) -> DenseMatrix {
        self.isometry.adjoint() * a * &self.isometry
    }
}

/// X ⊗_A H as the span of {gξ_i ⊗ h} with ⟨x⊗h, y⊗h′⟩ = ⟨h, ρ(⟨x, y⟩) h′⟩.
#[derive(Debug, Clone, Serialize)]
pub struct InducedModule {
    pub dim: usize,
    pub expected_dim: usize,
    /// ‖Γ² − Γ‖ for the Gram matrix Γ of the spanning set
    pub gram_projection_defect: f64,
    /// max_i ‖ρ(⟨ξ_i, ξ_i⟩) − ρ(e_i*e_i)‖
    pub rank_one_residual: f64,
    /// rank of each g-translated block built from the orthogonalized family
    pub block_dims: Vec<usize>,
    /// max ‖ρ(⟨gξ″_i, g′ξ″_j⟩)‖ over g ≠ g′
    pub block_orthogonality: f64,
    /// max ‖ρ(⟨ξ″_i, ξ″_j⟩)‖ over i ≠ j
    pub index_orthogonality: f64,
    #[serde(skip)]
    pub gram: DenseMatrix,
}

impl InducedModule {
    pub fn decomposition_holds(&self, tol: f64) -> bool {
        self.dim == self.expected_dim
            && self.block_dims.iter().all(|&d| d * self.block_dims.len() == self.dim)
            && self.block_orthogonality <= tol
            && self.index_orthogonality <= tol
    }
}

/// Block Gram matrix [ρ(⟨x_a, x_b⟩)] of a list of module elements.
pub(crate) fn module_gram(frame: &GaloisFrame, rep: &BaseRep, elems: &[DenseMatrix]) -> DenseMatrix {
    let d = rep.dim();
    let k = elems.len();
    let mut gram = DenseMatrix::zeros(k * d, k * d);
    for a in 0..k {
        for b in a..k {
            let block = rep.apply(&frame.inner(&elems[a], &elems[b]));
            gram.view_mut((a * d, b * d), (d, d)).copy_from(&block);
            if b != a {
                gram.view_mut((b * d, a * d), (d, d)).copy_from(&block.adjoint());
            }
        }
    }
    gram
}

pub fn induced_module(frame: &GaloisFrame, rep: &BaseRep) -> Result<InducedModule> {
    let report = check_frame(frame);
    if !report.pass {
        return Err(Error::FrameFailed(format!("max residual {:.3e}", report.max_residual())));
    }
    let d = rep.dim();
    let order = frame.group_order();
    let gram = module_gram(frame, rep, &frame.translates());
    let dim = numerical_rank(&gram);
    let gram_projection_defect = op_norm(&(&gram * &gram - &gram));
    let rank_one_residual = frame
        .e_list
        .iter()
        .zip(&frame.xi_list)
        .map(|(e, xi)| op_norm(&(rep.apply(&frame.inner(xi, xi)) - rep.apply(&(e.adjoint() * e)))))
        .fold(0.0, f64::max);

    // ξ″_i = ξ_i |e_i|⁺ u_i
    let family = vn_orthogonalize(&frame.e_list)?;
    let refined: Vec<DenseMatrix> = frame
        .xi_list
        .iter()
        .zip(&frame.e_list)
        .zip(&family.u_list)
        .map(|((xi, e), u)| xi * linalg::pinv(&linalg::polar(e).absval) * u)
        .collect();
    let k = refined.len();
    let translated: Vec<DenseMatrix> = (0..order).flat_map(|g| refined.iter().map(move |x| frame.translate(g, x))).collect();
    let refined_gram = module_gram(frame, rep, &translated);
    let mut block_dims = Vec::with_capacity(order);
    let (mut block_orth, mut index_orth) = (0.0f64, 0.0f64);
    for g in 0..order {
        let view = refined_gram.view((g * k * d, g * k * d), (k * d, k * d)).into_owned();
        block_dims.push(numerical_rank(&view));
        for h in 0..order {
            for i in 0..k {
                for j in 0..k {
                    let norm = op_norm(&refined_gram.view(((g * k + i) * d, (h * k + j) * d), (d, d)).into_owned());
                    if g != h {
                        block_orth = block_orth.max(norm);
                    } else if i != j {
                        index_orth = index_orth.max(norm);
                    }
                }
            }
        }
    }
    Ok(InducedModule {
        dim,
        expected_dim: order * d,
        gram_projection_defect,
        rank_one_residual,
        block_dims,
        block_orthogonality: block_orth,
        index_orthogonality: index_orth,
        gram,
    })
}

/// Per-index comparison of dim(e_i*e_i·A) with the rank of x ↦ ξ_i⟨ξ_i, x⟩ on the cover.
#[derive(Debug, Clone, Serialize)]
pub struct IdealDimensions {
    pub base_side: Vec<usize>,
    pub cover_side: Vec<usize>,
}

impl IdealDimensions {
    pub fn agree(&self) -> bool {
        self.base_side == self.cover_side
    }
}

pub fn ideal_dimensions(frame: &GaloisFrame) -> IdealDimensions {
    let span_dim = |mats: Vec<DenseMatrix>| {
        let cols: Vec<_> = mats.iter().map(linalg::vectorize).collect();
        if cols.is_empty() {
            return 0;
        }
        numerical_rank(&DenseMatrix::from_columns(&cols))
    };
    let mut base_side = Vec::new();
    let mut cover_side = Vec::new();
    for (e, xi) in frame.e_list.iter().zip(&frame.xi_list) {
        let ee = e.adjoint() * e;
        base_side.push(span_dim(frame.base.basis().iter().map(|b| &ee * b).collect()));
        cover_side.push(span_dim(frame.cover().basis().iter().map(|x| xi * frame.inner(xi, x)).collect()));
    }
    IdealDimensions { base_side, cover_side }
}

/// Algebra generated by gξ_i (gξ_i)* a for a among the base generators and the unit.
pub fn subordinated_algebra(frame: &GaloisFrame) -> Result<StarAlgebra> {
    let n = frame.ambient_dim();
    let mut multipliers: Vec<DenseMatrix> = frame.base.generators().to_vec();
    multipliers.push(frame.multiplier_unit());
    let mut gens = Vec::new();
    for t in frame.translates() {
        let rank_one = &t * t.adjoint();
        for a in &multipliers {
            gens.push(&rank_one * a);
        }
    }
    let alg = StarAlgebra::generated(n, &gens, false)?;
    if alg.dim() > n * n {
        return Err(Error::ClosureDiverged(alg.dim()));
    }
    Ok(alg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn boring(order: usize, d: usize) -> GaloisFrame {
        crate::frames::boring_frame(&crate::action::FiniteGroup::cyclic(order), d).unwrap()
    }

    #[test]
    fn boring_cover_induces_g_copies() {
        for order in [2, 3] {
            let f = boring(order, 2);
            let rep = BaseRep::leading_block(&f.base, 2).unwrap();
            let m = induced_module(&f, &rep).unwrap();
            assert_eq!(m.dim, order * 2);
            assert!(m.decomposition_holds(1e-12), "{m:?}");
            assert!(m.gram_projection_defect < 1e-12);
            assert!(m.rank_one_residual < 1e-12);
        }
    }

    #[test]
    fn failing_frame_is_rejected() {
        let mut f = boring(2, 1);
        f.xi_list[0] *= C64::from(1.1);
        let rep = BaseRep::leading_block(&f.base, 1).unwrap();
        assert!(matches!(induced_module(&f, &rep), Err(Error::FrameFailed(_))));
    }

    #[test]
    fn subordinated_algebra_of_boring_cover_over_scalars() {
        let f = boring(2, 1);
        let alg = subordinated_algebra(&f).unwrap();
        assert_eq!(alg.dim(), 2);
        assert_eq!(alg.minimal_central_projections().unwrap().len(), 2);
    }

    #[test]
    fn full_range_vector_generates_matrix_algebra() {
        let f = boring(1, 3);
        assert_eq!(subordinated_algebra(&f).unwrap().dim(), 9);
    }

    #[test]
    fn ideal_dimensions_agree_on_boring_cover() {
        let dims = ideal_dimensions(&boring(3, 2));
        assert!(dims.agree(), "{dims:?}");
    }

    #[test]
    fn compression_must_be_invariant() {
        let base = StarAlgebra::generated(2, &[linalg::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])], true).unwrap();
        assert!(BaseRep::leading_block(&base, 1).is_err());
    }
}
