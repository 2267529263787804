use std::f64::consts::PI;

use serde::Serialize;

use super::{angle_function, check_frame, subordinated_algebra, GaloisFrame, ModuleForm, RiggedFrameReport};
use crate::action::{Automorphism, FiniteGroup, GroupAction, StarAlgebra};
use crate::circle;
use crate::error::{Error, Result};
use crate::linalg::{self, c, diag, fro_norm, identity, kron, op_norm, DenseMatrix, C64};
use crate::torus::root_of_unity;

/// Eigenvalues closer than this to −1 have no consistent principal root.
pub const CUT_TOL: f64 = 1e-10;

/// Principal n-th root of a unitary, with the branch cut at angle π.
pub fn principal_root(u: &DenseMatrix, n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("root order must be ≥ 1".into()));
    }
    let defect = linalg::unitary_defect(u);
    if defect > 1e-10 {
        return Err(Error::NotUnitary { defect });
    }
    let eig = linalg::normal_eig(u)?;
    if let Some(z) = eig.values.iter().find(|z| (**z + c(1.0, 0.0)).norm() <= CUT_TOL) {
        return Err(Error::EigenvalueOnCut { angle: z.arg(), tol: CUT_TOL });
    }
    Ok(eig.apply(|z| C64::from_polar(z.norm().powf(1.0 / n as f64), z.arg() / n as f64)))
}

/// Extension of a base algebra by an n-th root v of a unitary u, realized on C^n ⊗ C^q with
/// the base as I ⊗ a and Z_n acting by v ↦ e^{2πi/n} v.
#[derive(Debug, Clone)]
pub struct RootExtension {
    pub n: usize,
    /// Root of u inside the base ambient.
    pub base_root: DenseMatrix,
    /// Root of I ⊗ u generating the cover.
    pub root: DenseMatrix,
    pub frame: GaloisFrame,
    /// ‖vⁿ − I ⊗ u‖
    pub root_residual: f64,
}

impl RootExtension {
    pub fn report(&self) -> RiggedFrameReport {
        check_frame(&self.frame)
    }

    /// Embedding a ↦ I_n ⊗ a of the base ambient into the cover ambient.
    pub fn embed(&self, a: &DenseMatrix) -> DenseMatrix {
        kron(&identity(self.n), a)
    }
}

/// Cyclic shift S e_j = e_{j+1} on C^n.
fn cyclic_shift(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| if i == (j + 1) % n { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn root_extension(u: &DenseMatrix, n: usize) -> Result<RootExtension> {
    root_extension_over(std::slice::from_ref(u), u, None, n)
}

/// Root extension of the algebra generated by `base_gens` (which must contain u's algebra).
/// An explicit root with v0ⁿ = u may be supplied; otherwise the principal root is used.
pub fn root_extension_over(
    base_gens: &[DenseMatrix],
    u: &DenseMatrix,
    explicit_root: Option<DenseMatrix>,
    n: usize,
) -> Result<RootExtension> {
    let q = u.nrows();
    let base_root = match explicit_root {
        Some(v0) => {
            let mut power = identity(q);
            for _ in 0..n {
                power = &power * &v0;
            }
            let defect = fro_norm(&(power - u));
            if defect > 1e-10 * (q as f64).sqrt() {
                return Err(Error::InvalidInput(format!("supplied root misses u by {defect:.3e}")));
            }
            v0
        }
        None => principal_root(u, n)?,
    };
    let phases: Vec<C64> = (0..n).map(|j| root_of_unity(j as i64, n)).collect();
    let root = kron(&diag(&phases), &base_root);
    let big = n * q;
    let embedded: Vec<DenseMatrix> = base_gens.iter().map(|a| kron(&identity(n), a)).collect();
    let base = StarAlgebra::generated(big, &embedded, true)?;
    let mut cover_gens = embedded.clone();
    cover_gens.push(root.clone());
    let cover = StarAlgebra::generated(big, &cover_gens, true)?;

    // W_k = (S*)^k ⊗ I sends v to ω^k v and fixes I ⊗ a
    let step = kron(&cyclic_shift(n).adjoint(), &identity(q));
    let mut maps = Vec::with_capacity(n);
    let mut w = identity(big);
    for _ in 0..n {
        maps.push(Automorphism::Unitary(w.clone()));
        w = &step * w;
    }
    let action = GroupAction::new(FiniteGroup::cyclic(n), cover, maps)?;

    let embedded_u = kron(&identity(n), u);
    let e_list = (0..2).map(|i| angle_function(&embedded_u, |phi| circle::bump(i, phi))).collect::<Result<Vec<_>>>()?;
    let xi_list = (0..2).map(|i| angle_function(&root, |psi| circle::lifted_bump(i, n, 0, psi))).collect::<Result<Vec<_>>>()?;
    let mut power = identity(big);
    for _ in 0..n {
        power = &power * &root;
    }
    let root_residual = op_norm(&(power - &embedded_u));
    let frame = GaloisFrame::new(base, action, e_list, xi_list, ModuleForm::Summed)?;
    Ok(RootExtension { n, base_root, root, frame, root_residual })
}

/// Torsion example: functions on a (t, φ) grid with the t = 0 fiber restricted to functions of zⁿ,
/// extended by the root z of w = zⁿ.
#[derive(Debug, Clone)]
pub struct MappingCone {
    pub extension: RootExtension,
    pub base_ambient: StarAlgebra,
    /// membership residuals of z and zⁿ in the base
    pub root_residual_in_base: f64,
    pub power_residual_in_base: f64,
    /// membership residuals of v and vⁿ in the embedded base
    pub root_residual_in_cover_base: f64,
    pub power_residual_in_cover_base: f64,
    /// largest Fourier coefficient at a mode not divisible by n, over the t = 0 fiber of the base
    pub fiber_off_mode_max: f64,
}

pub fn mapping_cone_cover(n: usize, t_points: usize, phi_points: usize) -> Result<MappingCone> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("mapping cone needs n ≥ 2, got {n}")));
    }
    if t_points < 2 || !phi_points.is_multiple_of(n) || phi_points < 2 * n {
        return Err(Error::InvalidInput(format!(
            "need ≥ 2 t-points and a φ-grid that is a multiple of n with ≥ 2 points per sheet, got {t_points}, {phi_points}"
        )));
    }
    let q = t_points * phi_points;
    let phi = |a: usize| -PI + 2.0 * PI * (a as f64 + 0.5) / phi_points as f64;
    let index = |t: usize, a: usize| t * phi_points + a;
    let mut gens = Vec::new();
    // t = 0: indicators of rotation orbits φ ↦ φ + 2π/n
    let step = phi_points / n;
    for a in 0..step {
        let mut d = vec![0.0; q];
        for s in 0..n {
            d[index(0, a + s * step)] = 1.0;
        }
        gens.push(linalg::diag_real(&d));
    }
    for t in 1..t_points {
        for a in 0..phi_points {
            let mut d = vec![0.0; q];
            d[index(t, a)] = 1.0;
            gens.push(linalg::diag_real(&d));
        }
    }
    let z: Vec<C64> = (0..q).map(|k| C64::from_polar(1.0, phi(k % phi_points))).collect();
    let zn: Vec<C64> = z.iter().map(|w| w.powu(n as u32)).collect();
    let (z, w) = (diag(&z), diag(&zn));
    let base_ambient = StarAlgebra::generated(q, &gens, true)?;
    let extension = root_extension_over(&gens, &w, Some(z.clone()), n)?;
    let embedded_base = &extension.frame.base;
    let mut vn = identity(n * q);
    for _ in 0..n {
        vn = &vn * &extension.root;
    }
    let fiber: Vec<Vec<C64>> =
        base_ambient.basis().iter().map(|b| (0..phi_points).map(|a| b[(index(0, a), index(0, a))]).collect()).collect();
    let mut fiber_off_mode_max: f64 = 0.0;
    for f in &fiber {
        for m in (0..phi_points).filter(|m| m % n != 0) {
            let coeff: C64 = f.iter().enumerate().map(|(a, x)| x * C64::from_polar(1.0, -(m as f64) * phi(a))).sum::<C64>()
                / phi_points as f64;
            fiber_off_mode_max = fiber_off_mode_max.max(coeff.norm());
        }
    }
    Ok(MappingCone {
        root_residual_in_base: base_ambient.membership_residual(&z),
        power_residual_in_base: base_ambient.membership_residual(&w),
        root_residual_in_cover_base: embedded_base.membership_residual(&extension.root),
        power_residual_in_cover_base: embedded_base.membership_residual(&vn),
        fiber_off_mode_max,
        base_ambient,
        extension,
    })
}

/// Grid of SU(2) points exp(i(aσ₁ + bσ₂ + cσ₃)) with a, b, c ∈ {±s}; neighbours differ in one sign.
pub fn su2_grid(s: f64) -> Vec<([f64; 3], DenseMatrix)> {
    let mut out = Vec::with_capacity(8);
    for mask in 0..8u32 {
        let coords = [0, 1, 2].map(|k| if mask & (1 << k) == 0 { s } else { -s });
        let h = linalg::from_real(2, 2, &[coords[2], coords[0], coords[0], -coords[2]])
            + DenseMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -coords[1]), c(0.0, coords[1]), c(0.0, 0.0)]);
        let x = linalg::func_calc(&h, |z| C64::from_polar(1.0, z.re)).expect("hermitian exponent");
        out.push((coords, x));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Su2Report {
    pub n: usize,
    pub factors: usize,
    pub components: usize,
    /// det ρ(v) per component, as (re, im)
    pub labels: Vec<(f64, f64)>,
    /// worst spread of det ρ(v) inside one component
    pub label_spread: f64,
    /// worst distance of a label from the n-th roots of unity
    pub label_root_defect: f64,
    pub labels_distinct: bool,
    pub frame: RiggedFrameReport,
}

/// Root extension of C^K ⊗ M_2 along u = ⊕ x_k over the SU(2) grid, and the decomposition
/// of its subordinated algebra into sheets connected across grid neighbours.
pub fn su2_disconnection(n: usize, s: f64, join_distance: f64) -> Result<Su2Report> {
    let grid = su2_grid(s);
    let k = grid.len();
    let blocks: Vec<DenseMatrix> = grid.iter().map(|(_, x)| x.clone()).collect();
    let u = linalg::block_diag(&blocks);
    let e = |i, j| kron(&identity(k), &crate::action::matrix_unit(2, i, j));
    let ext = root_extension_over(&[u.clone(), e(0, 0), e(0, 1)], &u, None, n)?;
    let frame = check_frame(&ext.frame);
    let sub = subordinated_algebra(&ext.frame)?;
    let projections = sub.minimal_central_projections()?;
    // each factor sits over one grid point; read off ρ(v) by compressing to its range
    let point_of = |p: &DenseMatrix| {
        (0..k)
            .max_by(|&a, &b| {
                let q = |m: usize| fro_norm(&(p * ext.embed(&kron(&point_indicator(k, m), &identity(2)))));
                q(a).total_cmp(&q(b))
            })
            .unwrap_or(0)
    };
    let mut factors = Vec::new();
    for p in &projections {
        let basis = linalg::range_basis(p);
        let rho = basis.adjoint() * &ext.root * &basis;
        let eig = linalg::normal_eig(&rho)?;
        factors.push((point_of(p), rho.determinant(), eig.values));
    }
    let adjacent = |a: usize, b: usize| (a ^ b).count_ones() == 1;
    let spectral_distance = |x: &[C64], y: &[C64]| {
        let one_way = |x: &[C64], y: &[C64]| {
            x.iter().map(|a| y.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
        };
        one_way(x, y).max(one_way(y, x))
    };
    let mut parent: Vec<usize> = (0..factors.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for a in 0..factors.len() {
        for b in a + 1..factors.len() {
            if adjacent(factors[a].0, factors[b].0) && spectral_distance(&factors[a].2, &factors[b].2) < join_distance {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut roots: Vec<usize> = (0..factors.len()).map(|a| find(&mut parent, a)).collect();
    roots.sort_unstable();
    roots.dedup();
    let mut labels = Vec::new();
    let mut label_spread: f64 = 0.0;
    let mut label_root_defect: f64 = 0.0;
    for &r in &roots {
        let members: Vec<usize> = (0..factors.len()).filter(|&a| find(&mut parent, a) == r).collect();
        let first = factors[members[0]].1;
        for &m in &members {
            label_spread = label_spread.max((factors[m].1 - first).norm());
        }
        let nearest = (0..n).map(|j| (first - root_of_unity(j as i64, n)).norm()).fold(f64::INFINITY, f64::min);
        label_root_defect = label_root_defect.max(nearest);
        labels.push((first.re, first.im));
    }
    let labels_distinct = labels
        .iter()
        .enumerate()
        .all(|(i, a)| labels[i + 1..].iter().all(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() > 1e-6));
    Ok(Su2Report {
        n,
        factors: factors.len(),
        components: roots.len(),
        labels,
        label_spread,
        label_root_defect,
        labels_distinct,
        frame,
    })
}

fn point_indicator(k: usize, m: usize) -> DenseMatrix {
    crate::action::matrix_unit(k, m, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::clock_shift;

    fn rotated_clock(q: usize, angle: f64) -> DenseMatrix {
        clock_shift(q, 1).unwrap().u * C64::from_polar(1.0, angle)
    }

    #[test]
    fn principal_root_and_cut() {
        let u = rotated_clock(8, 0.1);
        let v = principal_root(&u, 3).unwrap();
        assert!(fro_norm(&(&v * &v * &v - &u)) < 1e-12);
        let minus = diag(&[c(-1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(principal_root(&minus, 2), Err(Error::EigenvalueOnCut { .. })));
    }

    #[test]
    fn trivial_extension() {
        let u = rotated_clock(8, 0.1);
        let ext = root_extension(&u, 1).unwrap();
        assert!(fro_norm(&(&ext.root - &u)) < 1e-12);
        assert!(ext.report().pass);
    }

    #[test]
    fn circle_double_cover_at_matrix_scale() {
        let u = rotated_clock(8, 0.1);
        let ext = root_extension(&u, 2).unwrap();
        assert!(ext.root_residual < 1e-12);
        let report = ext.report();
        assert!(report.max_residual() <= 1e-10, "{report:?}");
        assert_eq!(ext.frame.cover().dim(), 2 * ext.frame.base.dim());
        assert_eq!(subordinated_algebra(&ext.frame).unwrap().dim(), ext.frame.cover().dim());
    }

    #[test]
    fn mapping_cone_frame_and_constraints() {
        let cone = mapping_cone_cover(2, 3, 12).unwrap();
        assert!(cone.extension.report().pass);
        assert!(cone.root_residual_in_base > 1e-3);
        assert!(cone.power_residual_in_base < 1e-10);
        assert!(cone.root_residual_in_cover_base > 1e-3);
        assert!(cone.power_residual_in_cover_base < 1e-10);
        assert!(cone.fiber_off_mode_max < 1e-12);
    }

    #[test]
    fn su2_sheets_for_odd_root() {
        let r = su2_disconnection(3, 0.6, 0.2).unwrap();
        assert!(r.frame.pass, "{:?}", r.frame);
        assert_eq!(r.factors, 3 * 8);
        assert_eq!(r.components, 3);
        assert!(r.label_spread < 1e-10 && r.label_root_defect < 1e-10 && r.labels_distinct);
    }
}
