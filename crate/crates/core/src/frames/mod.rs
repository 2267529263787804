//! Galois frames: the four frame conditions, von Neumann orthogonalization,
//! induced modules, subordinated algebras and the concrete cover families.

mod induced;
mod json;
mod root;
mod torus_cover;
mod vn;

pub(crate) use induced::module_gram;
pub use induced::{ideal_dimensions, induced_module, subordinated_algebra, BaseRep, IdealDimensions, InducedModule};
pub use root::{
    mapping_cone_cover, principal_root, root_extension, root_extension_over, su2_disconnection, su2_grid, MappingCone,
    RootExtension, Su2Report,
};
pub use torus_cover::{torus_cover, TorusCover};
pub use vn::{random_commuting_partition, vn_orthogonalize, OrthogonalizationReport, OrthogonalizedFamily, ORTH_TOL};

use serde::{Deserialize, Serialize};

use crate::action::{block_indicator, boring_cover, full_matrix_algebra, FiniteGroup, GroupAction, StarAlgebra};
use crate::circle::{self, BumpPair};
use crate::error::{Error, Result};
use crate::linalg::{self, identity, kron, op_norm, DenseMatrix, C64};

/// Residual threshold for a passing frame.
pub const FRAME_TOL: f64 = 1e-8;

/// Module inner product ⟨x, y⟩ built from the group action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleForm {
    /// Σ_g g(x*y)
    Summed,
    /// (1/|G|) Σ_g g(x*y)
    Averaged,
}

/// Base algebra (inside the cover ambient), group action on the cover, and the two families.
#[derive(Debug, Clone)]
pub struct GaloisFrame {
    pub base: StarAlgebra,
    pub action: GroupAction,
    pub e_list: Vec<DenseMatrix>,
    pub xi_list: Vec<DenseMatrix>,
    pub form: ModuleForm,
}

impl GaloisFrame {
    pub fn new(
        base: StarAlgebra,
        action: GroupAction,
        e_list: Vec<DenseMatrix>,
        xi_list: Vec<DenseMatrix>,
        form: ModuleForm,
    ) -> Result<Self> {
        let n = action.algebra().ambient_dim();
        if base.ambient_dim() != n {
            return Err(Error::DimensionMismatch(format!("base ambient {} vs cover ambient {n}", base.ambient_dim())));
        }
        if e_list.len() != xi_list.len() {
            return Err(Error::DimensionMismatch(format!("{} e's vs {} ξ's", e_list.len(), xi_list.len())));
        }
        if let Some(m) = e_list.iter().chain(&xi_list).find(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::DimensionMismatch(format!("frame element is {}x{}, ambient {n}", m.nrows(), m.ncols())));
        }
        Ok(Self { base, action, e_list, xi_list, form })
    }

    pub fn cover(&self) -> &StarAlgebra {
        self.action.algebra()
    }

    pub fn ambient_dim(&self) -> usize {
        self.cover().ambient_dim()
    }

    pub fn group_order(&self) -> usize {
        self.action.order()
    }

    pub fn len(&self) -> usize {
        self.xi_list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_list.is_empty()
    }

    pub fn translate(&self, g: usize, x: &DenseMatrix) -> DenseMatrix {
        self.action.apply(g, x)
    }

    /// ⟨x, y⟩ in the frame's module form.
    pub fn inner(&self, x: &DenseMatrix, y: &DenseMatrix) -> DenseMatrix {
        let s = self.action.sum_orbit(&(x.adjoint() * y));
        match self.form {
            ModuleForm::Summed => s,
            ModuleForm::Averaged => s / C64::from(self.group_order() as f64),
        }
    }

    /// Unit of M(A): the base unit if it exists, otherwise the ambient identity.
    pub fn multiplier_unit(&self) -> DenseMatrix {
        self.base.unit().cloned().unwrap_or_else(|| identity(self.ambient_dim()))
    }

    /// The same frame for the averaged form, with ξ rescaled by √|G| so all residuals are unchanged.
    pub fn to_averaged(&self) -> Self {
        let mut out = self.clone();
        if self.form == ModuleForm::Summed {
            let s = C64::from((self.group_order() as f64).sqrt());
            out.xi_list.iter_mut().for_each(|x| *x *= s);
            out.form = ModuleForm::Averaged;
        }
        out
    }

    /// All translates gξ_i, ordered by (g, i).
    pub fn translates(&self) -> Vec<DenseMatrix> {
        (0..self.group_order()).flat_map(|g| self.xi_list.iter().map(move |x| self.translate(g, x))).collect()
    }
}

/// Trivial cover C(G) ⊗ M_d of M_d: e = 1, ξ = indicator of the identity block.
pub fn boring_frame(group: &FiniteGroup, d: usize) -> Result<GaloisFrame> {
    let order = group.order();
    let base = full_matrix_algebra(d);
    let action = boring_cover(&base, group)?;
    let n = order * d;
    let diag: Vec<DenseMatrix> = base.basis().iter().map(|b| kron(&identity(order), b)).collect();
    let base_in_cover = StarAlgebra::generated(n, &diag, true)?;
    GaloisFrame::new(
        base_in_cover,
        action,
        vec![identity(n)],
        vec![block_indicator(order, d, group.identity())],
        ModuleForm::Summed,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct RiggedFrameReport {
    pub residual_1mb: f64,
    pub residual_1mkx: f64,
    pub residual_eexx: f64,
    pub residual_gort: f64,
    pub pass: bool,
}

impl RiggedFrameReport {
    fn from_residuals(r: [f64; 4]) -> Self {
        Self {
            residual_1mb: r[0],
            residual_1mkx: r[1],
            residual_eexx: r[2],
            residual_gort: r[3],
            pass: r.iter().all(|&x| x <= FRAME_TOL),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_1mb.max(self.residual_1mkx).max(self.residual_eexx).max(self.residual_gort)
    }
}

/// Operator norm of x ↦ Σ_g Σ_i gξ_i⟨gξ_i, x⟩ − x on the cover, in Hilbert–Schmidt coordinates.
fn reconstruction_residual(frame: &GaloisFrame) -> f64 {
    let basis = frame.cover().basis();
    let cols: Vec<DenseMatrix> = match spatial_reconstruction(frame) {
        Some(terms) => basis.iter().map(|b| terms.iter().fold(-b.clone(), |acc, (l, w)| acc + l * b * w.adjoint())).collect(),
        None => basis.iter().map(|b| generic_reconstruction(frame, b) - b).collect(),
    };
    operator_norm_on_span(&cols)
}

/// Σ_t t⟨t, x⟩ term by term.
fn generic_reconstruction(frame: &GaloisFrame, x: &DenseMatrix) -> DenseMatrix {
    let translates = frame.translates();
    translates.iter().fold(DenseMatrix::zeros(x.nrows(), x.ncols()), |acc, t| acc + t * frame.inner(t, x))
}

/// With every g(x) = W_g x W_g*, Σ_t t·g(t*x) = L_g x W_g* for L_g = Σ_t t W_g t*.
fn spatial_reconstruction(frame: &GaloisFrame) -> Option<Vec<(DenseMatrix, DenseMatrix)>> {
    let unitaries: Vec<DenseMatrix> = frame.action.maps().iter().map(|m| m.as_unitary()).collect::<Option<_>>()?;
    let translates = frame.translates();
    let scale = match frame.form {
        ModuleForm::Summed => 1.0,
        ModuleForm::Averaged => 1.0 / frame.group_order() as f64,
    };
    let n = frame.ambient_dim();
    Some(
        unitaries
            .into_iter()
            .map(|w| {
                let l = translates.iter().fold(DenseMatrix::zeros(n, n), |acc, t| acc + t * &w * t.adjoint());
                (l * C64::from(scale), w)
            })
            .collect(),
    )
}

/// Largest singular value of the linear map sending the i-th orthonormal basis element to cols[i].
fn operator_norm_on_span(cols: &[DenseMatrix]) -> f64 {
    let k = cols.len();
    let gram = DenseMatrix::from_fn(k, k, |i, j| linalg::hs_inner(&cols[i], &cols[j]));
    linalg::herm_eig(&((&gram + gram.adjoint()) * C64::from(0.5)))
        .map(|e| e.values.first().copied().unwrap_or(0.0).max(0.0).sqrt())
        .unwrap_or(f64::INFINITY)
}

/// Residuals of the four frame conditions, each in operator norm.
pub fn check_frame(frame: &GaloisFrame) -> RiggedFrameReport {
    let unit = frame.multiplier_unit();
    let mut sum = -unit;
    for e in &frame.e_list {
        sum += e.adjoint() * e;
    }
    let r_1mb = op_norm(&sum);
    let r_1mkx = reconstruction_residual(frame);
    let mut r_eexx: f64 = 0.0;
    let mut r_gort: f64 = 0.0;
    let identity_el = frame.action.group().identity();
    for (e, xi) in frame.e_list.iter().zip(&frame.xi_list) {
        r_eexx = r_eexx.max(op_norm(&(frame.inner(xi, xi) - e.adjoint() * e)));
        for g in (0..frame.group_order()).filter(|&g| g != identity_el) {
            r_gort = r_gort.max(op_norm(&frame.inner(&frame.translate(g, xi), xi)));
        }
    }
    RiggedFrameReport::from_residuals([r_1mb, r_1mkx, r_eexx, r_gort])
}

/// Windowed frame for the Z-cover of the circle by the line: e_i = b_i, ξ_i the base-sheet
/// lifts, translates |g| ≤ W, summed form; residuals only on the validity region |x| ≤ (2W−1)π.
pub fn check_line_frame(pair: &BumpPair, window: usize) -> Result<RiggedFrameReport> {
    if window < 1 {
        return Err(Error::WindowTooSmall { w: window, reason: "need W ≥ 1 for a nonempty validity region".into() });
    }
    let n = pair.b1.len();
    let w = window as i64;
    // lifts of b_i at every offset, as plain sample vectors on the window
    let mut lifts: Vec<Vec<Vec<f64>>> = Vec::new();
    for i in 0..2 {
        let mut per_offset = Vec::new();
        for g in -2 * w..=2 * w {
            let v = match circle::lift_to_line(pair.get(i), g, window) {
                Ok(l) => l.samples.iter().map(|z| z.re).collect(),
                Err(Error::WindowTooSmall { .. }) => vec![0.0; (2 * window + 1) * n + 1],
                Err(e) => return Err(e),
            };
            per_offset.push(v);
        }
        lifts.push(per_offset);
    }
    let at = |i: usize, g: i64, j: usize| lifts[i][(g + 2 * w) as usize][j];
    let region = circle::LineFunction::zeros(window, n).inner_range();
    let (mut r_1mb, mut r_1mkx, mut r_eexx, mut r_gort) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for j in region {
        let k = j % n;
        let b: Vec<f64> = (0..2).map(|i| pair.get(i).samples[k].re).collect();
        r_1mb = r_1mb.max((b[0] * b[0] + b[1] * b[1] - 1.0).abs());
        let mut total = 0.0;
        for i in 0..2 {
            // ⟨ξ_i, ξ_i⟩(x) = Σ_h |ξ_i(x − 2πh)|²
            let form: f64 = (-w..=w).map(|h| at(i, h, j).powi(2)).sum();
            r_eexx = r_eexx.max((form - b[i] * b[i]).abs());
            total += form;
            for g in (-w..=w).filter(|&g| g != 0) {
                let cross: f64 = (-w..=w).filter(|&h| (g + h).abs() <= 2 * w).map(|h| at(i, g + h, j) * at(i, h, j)).sum();
                r_gort = r_gort.max(cross.abs());
            }
        }
        // Σ_g Σ_i gξ_i⟨gξ_i, ·⟩ is multiplication by Σ_g Σ_i |ξ_i(x − 2πg)|²
        r_1mkx = r_1mkx.max((total - 1.0).abs());
    }
    Ok(RiggedFrameReport::from_residuals([r_1mb, r_1mkx, r_eexx, r_gort]))
}

/// Spectral-calculus evaluation of a real function of the angle on a unitary.
pub fn angle_function(u: &DenseMatrix, f: impl Fn(f64) -> f64) -> Result<DenseMatrix> {
    linalg::func_calc(u, |z| C64::from(f(z.arg())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::FiniteGroup;

    fn boring(order: usize, d: usize) -> GaloisFrame {
        boring_frame(&FiniteGroup::cyclic(order), d).unwrap()
    }

    #[test]
    fn spatial_reconstruction_matches_termwise() {
        let u = crate::torus::clock_shift(5, 1).unwrap().u * C64::from_polar(1.0, 0.1);
        let ext = root_extension(&u, 3).unwrap();
        for frame in [boring(3, 2), ext.frame.clone(), ext.frame.to_averaged()] {
            let terms = spatial_reconstruction(&frame).unwrap();
            for b in frame.cover().basis() {
                let fast = terms.iter().fold(DenseMatrix::zeros(b.nrows(), b.ncols()), |acc, (l, w)| acc + l * b * w.adjoint());
                assert!(linalg::fro_norm(&(fast - generic_reconstruction(&frame, b))) < 1e-12);
            }
        }
    }

    #[test]
    fn boring_frame_is_exact() {
        for order in [2, 3, 4] {
            let report = check_frame(&boring(order, 2));
            assert!(report.pass);
            assert!(report.max_residual() < 1e-14, "{report:?}");
        }
    }

    #[test]
    fn averaged_form_gives_same_residuals() {
        let f = boring(3, 2);
        let a = check_frame(&f);
        let b = check_frame(&f.to_averaged());
        assert!((a.max_residual() - b.max_residual()).abs() < 1e-14);
        assert!(b.pass);
    }

    #[test]
    fn corrupted_xi_fails_eexx() {
        let mut f = boring(2, 2);
        f.xi_list[0] *= C64::from(1.1);
        let report = check_frame(&f);
        assert!(!report.pass);
        let scale = op_norm(&(f.e_list[0].adjoint() * &f.e_list[0]));
        assert!((report.residual_eexx - 0.21 * scale).abs() < 1e-12);
    }

    #[test]
    fn line_frame_passes_on_validity_region() {
        let pair = circle::make_bumps(512).unwrap();
        let report = check_line_frame(&pair, 3).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.max_residual() <= 1e-12);
        assert!(matches!(check_line_frame(&pair, 0), Err(Error::WindowTooSmall { .. })));
    }
}
