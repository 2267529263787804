use nalgebra::{DMatrix, DVector};

use super::algebra::StarAlgebra;
use super::group::{Automorphism, FiniteGroup, GroupAction};
use crate::error::{Error, Result};
use crate::linalg::{self, c, op_norm, DenseMatrix, C64, RANK_TOL};

/// Elements fixed by every group element: the joint kernel of α_g − id.
pub fn fixed_point_algebra(action: &GroupAction) -> Result<StarAlgebra> {
    let alg = action.algebra();
    let n = alg.dim();
    let g = action.order();
    let mut sys = DMatrix::zeros(n * g, n);
    for h in 0..g {
        let m = action.coordinate_matrix(h) - DMatrix::<C64>::identity(n, n);
        sys.view_mut((h * n, 0), (n, n)).copy_from(&m);
    }
    let kernel = linalg::null_space(&sys, RANK_TOL);
    let elems: Vec<DenseMatrix> = (0..kernel.ncols()).map(|k| alg.element(&kernel.column(k).into_owned())).collect();
    StarAlgebra::from_spanning(alg.ambient_dim(), &elems)
}

/// Image of the averaging map, as an algebra; agrees with `fixed_point_algebra`.
pub fn averaged_algebra(action: &GroupAction) -> Result<StarAlgebra> {
    let elems: Vec<DenseMatrix> = action.algebra().basis().iter().map(|b| action.average(b)).collect();
    StarAlgebra::from_spanning(action.algebra().ambient_dim(), &elems)
}

/// |G| block-diagonal copies of A, with G permuting the blocks by left translation.
pub fn boring_cover(base: &StarAlgebra, group: &FiniteGroup) -> Result<GroupAction> {
    let d = base.ambient_dim();
    let n = group.order();
    let mut spanning = Vec::with_capacity(n * base.dim());
    for g in 0..n {
        for b in base.basis() {
            let mut m = DenseMatrix::zeros(n * d, n * d);
            m.view_mut((g * d, g * d), (d, d)).copy_from(b);
            spanning.push(m);
        }
    }
    let cover = StarAlgebra::from_spanning(n * d, &spanning)?;
    let maps = (0..n)
        .map(|h| {
            let perm = (0..n * d).map(|idx| group.mul(h, idx / d) * d + idx % d).collect();
            Automorphism::Permutation(perm)
        })
        .collect();
    GroupAction::new(group.clone(), cover, maps)
}

/// Indicator of the block belonging to group element g inside a boring cover.
pub fn block_indicator(group_order: usize, block_dim: usize, g: usize) -> DenseMatrix {
    let n = group_order * block_dim;
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..block_dim {
        m[(g * block_dim + i, g * block_dim + i)] = c(1.0, 0.0);
    }
    m
}

/// Pairs (a_i, b_i) with Σ a_i b_i = 1 and Σ a_i g(b_i) = 0 for g ≠ e.
#[derive(Debug, Clone)]
pub struct GaloisSolution {
    pub pairs: Vec<(DenseMatrix, DenseMatrix)>,
    pub unit_residual: f64,
    pub orthogonality_residual: f64,
}

#[derive(Debug, Clone)]
pub enum CanonicalOutcome {
    Solved(GaloisSolution),
    /// Least-squares residual certifies that no tensor satisfies the conditions.
    Infeasible {
        residual: f64,
    },
    Indeterminate {
        residual: f64,
    },
}

impl CanonicalOutcome {
    pub fn is_solved(&self) -> bool {
        matches!(self, CanonicalOutcome::Solved(_))
    }
}

pub const INFEASIBLE_FLOOR: f64 = 1e-6;
pub const SOLVED_TOL: f64 = 1e-8;

/// Solves the bilinear conditions as a linear system for the tensor Σ t_kl b_k ⊗ b_l.
pub fn solve_canonical(action: &GroupAction) -> Result<CanonicalOutcome> {
    let alg = action.algebra();
    let unit = alg.unit().ok_or(Error::NotUnital)?.clone();
    let group = action.group();
    if group.order() == 1 {
        let pairs = vec![(unit.clone(), unit)];
        return Ok(CanonicalOutcome::Solved(evaluate_solution(action, pairs)));
    }
    // every b_k g(b_l) lies in A, so the equations are written in the orthonormal algebra coordinates
    let n = alg.dim();
    let order = group.order();
    let basis = alg.basis();
    let images: Vec<Vec<DenseMatrix>> = (0..order).map(|g| basis.iter().map(|b| action.apply(g, b)).collect()).collect();
    let mut sys = DMatrix::zeros(order * n, n * n);
    let mut rhs = DVector::zeros(order * n);
    for g in 0..order {
        for k in 0..n {
            for l in 0..n {
                let prod = alg.coords(&(&basis[k] * &images[g][l]));
                sys.view_mut((g * n, k * n + l), (n, 1)).copy_from(&prod);
            }
        }
        if g == group.identity() {
            rhs.rows_mut(g * n, n).copy_from(&alg.coords(&unit));
        }
    }
    let t = linalg::lstsq(&sys, &rhs);
    let residual = (&sys * &t - &rhs).norm() / rhs.norm();
    if residual > INFEASIBLE_FLOOR {
        return Ok(CanonicalOutcome::Infeasible { residual });
    }
    if residual > SOLVED_TOL {
        return Ok(CanonicalOutcome::Indeterminate { residual });
    }
    let tmat = DMatrix::from_fn(n, n, |k, l| t[k * n + l]);
    let scale = tmat.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let mut pairs = Vec::new();
    for k in 0..n {
        if tmat.row(k).iter().all(|z| z.norm() <= 1e-12 * scale) {
            continue;
        }
        let mut b = DenseMatrix::zeros(alg.ambient_dim(), alg.ambient_dim());
        for l in 0..n {
            b += &basis[l] * tmat[(k, l)];
        }
        pairs.push((basis[k].clone(), b));
    }
    let sol = evaluate_solution(action, pairs);
    if sol.unit_residual.max(sol.orthogonality_residual) > SOLVED_TOL {
        return Ok(CanonicalOutcome::Indeterminate { residual: sol.unit_residual.max(sol.orthogonality_residual) });
    }
    Ok(CanonicalOutcome::Solved(sol))
}

/// Operator-norm residuals of the two conditions for given pairs.
pub fn evaluate_solution(action: &GroupAction, pairs: Vec<(DenseMatrix, DenseMatrix)>) -> GaloisSolution {
    let alg = action.algebra();
    let unit = alg.unit().cloned().unwrap_or_else(|| linalg::identity(alg.ambient_dim()));
    let group = action.group();
    let mut sum = DenseMatrix::zeros(alg.ambient_dim(), alg.ambient_dim());
    for (a, b) in &pairs {
        sum += a * b;
    }
    let unit_residual = op_norm(&(sum - &unit));
    let mut orthogonality_residual: f64 = 0.0;
    for g in (0..group.order()).filter(|&g| g != group.identity()) {
        let mut s = DenseMatrix::zeros(alg.ambient_dim(), alg.ambient_dim());
        for (a, b) in &pairs {
            s += a * action.apply(g, b);
        }
        orthogonality_residual = orthogonality_residual.max(op_norm(&s));
    }
    GaloisSolution { pairs, unit_residual, orthogonality_residual }
}

/// Rank data of can: A ⊗_{A^G} A → Map(G, A), x ⊗ y ↦ (g ↦ x·g(y)).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalMapReport {
    pub tensor_dim: usize,
    pub relations_rank: usize,
    pub domain_dim: usize,
    pub codomain_dim: usize,
    pub rank: usize,
    pub bijective: bool,
}

pub fn canonical_map_matrix(action: &GroupAction) -> Result<CanonicalMapReport> {
    let alg = action.algebra();
    if !alg.is_unital() {
        return Err(Error::NotUnital);
    }
    let fixed = fixed_point_algebra(action)?;
    let n = alg.dim();
    let order = action.order();
    let basis = alg.basis();
    let mut rel_cols: Vec<DVector<C64>> = Vec::new();
    for cfix in fixed.basis() {
        let right: Vec<DVector<C64>> = basis.iter().map(|b| alg.coords(&(b * cfix))).collect();
        let left: Vec<DVector<C64>> = basis.iter().map(|b| alg.coords(&(cfix * b))).collect();
        for k in 0..n {
            for l in 0..n {
                // (b_k c) ⊗ b_l − b_k ⊗ (c b_l)
                let mut v = DVector::zeros(n * n);
                for p in 0..n {
                    v[p * n + l] += right[k][p];
                    v[k * n + p] -= left[l][p];
                }
                rel_cols.push(v);
            }
        }
    }
    let floor = 1.0 / alg.ambient_dim() as f64;
    let relations_rank =
        if rel_cols.is_empty() { 0 } else { linalg::numerical_rank_scaled(&DMatrix::from_columns(&rel_cols), floor) };
    let images: Vec<Vec<DenseMatrix>> = (0..order).map(|g| basis.iter().map(|b| action.apply(g, b)).collect()).collect();
    let mut can = DMatrix::zeros(order * n, n * n);
    for g in 0..order {
        for k in 0..n {
            for l in 0..n {
                let v = alg.coords(&(&basis[k] * &images[g][l]));
                can.view_mut((g * n, k * n + l), (n, 1)).copy_from(&v);
            }
        }
    }
    let rank = linalg::numerical_rank_scaled(&can, floor);
    let domain_dim = n * n - relations_rank;
    let codomain_dim = order * n;
    Ok(CanonicalMapReport {
        tensor_dim: n * n,
        relations_rank,
        domain_dim,
        codomain_dim,
        rank,
        bijective: rank == codomain_dim && rank == domain_dim,
    })
}

/// Random action of Z_order on ⊕_x M_d over a finite set X of orbits, with the generator cycling each
/// orbit, conjugated by a random unitary. Returns the action and whether every orbit is free, which is
/// exactly when the extension is Galois. The ambient dimension stays at most 8.
pub fn random_action<R: rand::Rng + ?Sized>(rng: &mut R) -> Result<(GroupAction, bool)> {
    let order = rng.random_range(2..=4usize);
    let divisors: Vec<usize> = (1..=order).filter(|s| order % s == 0).collect();
    let orbit_sizes: Vec<usize> = (0..rng.random_range(1..=2))
        .map(|_| if rng.random_bool(0.5) { order } else { divisors[rng.random_range(0..divisors.len())] })
        .collect();
    let points: usize = orbit_sizes.iter().sum();
    let d = if points <= 4 { rng.random_range(1..=2) } else { 1 };
    let n = points * d;
    let mut step = Vec::with_capacity(points);
    let mut offset = 0;
    for &s in &orbit_sizes {
        step.extend((0..s).map(|j| offset + (j + 1) % s));
        offset += s;
    }
    let w = linalg::random::unitary(rng, n);
    let basis: Vec<DenseMatrix> =
        super::algebra::block_algebra(&vec![d; points]).basis().iter().map(|b| &w * b * w.adjoint()).collect();
    let algebra = StarAlgebra::from_spanning(n, &basis)?;
    let mut maps = Vec::with_capacity(order);
    let mut perm: Vec<usize> = (0..points).collect();
    for _ in 0..order {
        let p = DenseMatrix::from_fn(n, n, |i, j| c(if i == perm[j / d] * d + j % d { 1.0 } else { 0.0 }, 0.0));
        maps.push(Automorphism::Unitary(&w * p * w.adjoint()));
        perm = perm.iter().map(|&x| step[x]).collect();
    }
    let free = orbit_sizes.iter().all(|&s| s == order);
    Ok((GroupAction::new(FiniteGroup::cyclic(order), algebra, maps)?, free))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::algebra::{diagonal_algebra, full_matrix_algebra, StarAlgebra};
    use crate::linalg::{diag_real, fro_norm, from_real, identity};

    fn swap_on_functions() -> GroupAction {
        GroupAction::new_checked(
            FiniteGroup::cyclic(2),
            diagonal_algebra(2),
            vec![Automorphism::identity_permutation(2), Automorphism::Permutation(vec![1, 0])],
        )
        .unwrap()
    }

    fn conj_m2() -> GroupAction {
        GroupAction::new_checked(
            FiniteGroup::cyclic(2),
            full_matrix_algebra(2),
            vec![Automorphism::identity_permutation(2), Automorphism::Unitary(diag_real(&[1.0, -1.0]))],
        )
        .unwrap()
    }

    fn trivial_on_scalars() -> GroupAction {
        let alg = StarAlgebra::from_spanning(1, &[identity(1)]).unwrap();
        GroupAction::trivial(FiniteGroup::cyclic(2), alg)
    }

    #[test]
    fn fixed_points_examples() {
        let triv = GroupAction::trivial(FiniteGroup::cyclic(3), full_matrix_algebra(2));
        assert_eq!(fixed_point_algebra(&triv).unwrap().dim(), 4);
        let fixed = fixed_point_algebra(&swap_on_functions()).unwrap();
        assert_eq!(fixed.dim(), 1);
        assert!(fixed.contains(&identity(2)));
        let fixed = fixed_point_algebra(&conj_m2()).unwrap();
        assert_eq!(fixed.dim(), 2);
        assert!(fixed.contains(&diag_real(&[2.0, 7.0])));
        assert_eq!(averaged_algebra(&conj_m2()).unwrap().dim(), 2);
    }

    #[test]
    fn solve_examples() {
        let alg = full_matrix_algebra(2);
        let triv = GroupAction::trivial(FiniteGroup::cyclic(1), alg);
        match solve_canonical(&triv).unwrap() {
            CanonicalOutcome::Solved(s) => {
                assert_eq!(s.pairs.len(), 1);
                assert!(fro_norm(&(&s.pairs[0].0 - identity(2))) < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        match solve_canonical(&swap_on_functions()).unwrap() {
            CanonicalOutcome::Solved(s) => {
                assert_eq!(s.pairs.len(), 2);
                for (k, (a, b)) in s.pairs.iter().enumerate() {
                    let mut delta = [0.0, 0.0];
                    delta[k] = 1.0;
                    assert!(fro_norm(&(a - diag_real(&delta))) < 1e-12);
                    assert!(fro_norm(&(b - diag_real(&delta))) < 1e-12);
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(solve_canonical(&trivial_on_scalars()).unwrap(), CanonicalOutcome::Infeasible { .. }));
        assert!(solve_canonical(&conj_m2()).unwrap().is_solved());
    }

    #[test]
    fn canonical_map_examples() {
        let r = canonical_map_matrix(&swap_on_functions()).unwrap();
        assert_eq!((r.domain_dim, r.codomain_dim, r.rank), (4, 4, 4));
        assert!(r.bijective);
        let r = canonical_map_matrix(&GroupAction::trivial(FiniteGroup::cyclic(1), full_matrix_algebra(2))).unwrap();
        assert!(r.bijective);
        let r = canonical_map_matrix(&trivial_on_scalars()).unwrap();
        assert_eq!(r.domain_dim, 1);
        assert!(!r.bijective);
        assert!(canonical_map_matrix(&conj_m2()).unwrap().bijective);
    }

    #[test]
    fn boring_cover_examples() {
        let scalars = StarAlgebra::from_spanning(1, &[identity(1)]).unwrap();
        let a = boring_cover(&scalars, &FiniteGroup::cyclic(1)).unwrap();
        assert_eq!(a.algebra().dim(), 1);
        let a = boring_cover(&scalars, &FiniteGroup::cyclic(3)).unwrap();
        assert!(a.validate().max() < 1e-12);
        assert_eq!(fixed_point_algebra(&a).unwrap().dim(), 1);
        let a = boring_cover(&full_matrix_algebra(2), &FiniteGroup::cyclic(2)).unwrap();
        assert_eq!(a.algebra().dim(), 8);
        let fixed = fixed_point_algebra(&a).unwrap();
        assert_eq!(fixed.dim(), 4);
        let x = from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(fixed.contains(&crate::linalg::block_diag(&[x.clone(), x])));
    }

    #[test]
    fn boring_cover_solution_uses_indicators() {
        let scalars = StarAlgebra::from_spanning(1, &[identity(1)]).unwrap();
        for n in [2, 3, 4, 6] {
            let a = boring_cover(&scalars, &FiniteGroup::cyclic(n)).unwrap();
            let CanonicalOutcome::Solved(s) = solve_canonical(&a).unwrap() else { panic!("boring cover must solve") };
            assert!(s.unit_residual < 1e-10 && s.orthogonality_residual < 1e-10);
            for (a_i, b_i) in &s.pairs {
                assert!(fro_norm(&(a_i - b_i)) < 1e-10);
            }
            assert!(canonical_map_matrix(&a).unwrap().bijective);
        }
    }

    #[test]
    fn random_actions_agree_with_orbit_freeness() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (action, free) = random_action(&mut rng).unwrap();
            assert!(action.validate().max() < 1e-10);
            assert_eq!(canonical_map_matrix(&action).unwrap().bijective, free);
            assert_eq!(solve_canonical(&action).unwrap().is_solved(), free);
        }
    }
}
