use std::f64::consts::PI;

use super::{angle_function, check_frame, GaloisFrame, ModuleForm, RiggedFrameReport};
use crate::action::{fixed_point_algebra, Automorphism, FiniteGroup, GroupAction, StarAlgebra};
use crate::circle;
use crate::error::{Error, Result};
use crate::linalg::{diag, identity, kron, DenseMatrix, C64};
use crate::torus::{clock_shift, gcd, ClockShiftRep};

/// Finite Z_m × Z_n cover of a rational torus by the torus at θ′ = (θ + k)/(mn).
#[derive(Debug, Clone)]
pub struct TorusCover {
    pub m: usize,
    pub n: usize,
    pub k: i64,
    pub theta: f64,
    pub theta_cover: f64,
    pub frame: GaloisFrame,
    pub report: RiggedFrameReport,
    pub base_dim: usize,
    pub fixed_point_dim: usize,
    /// worst membership residual between the fixed-point algebra and the base, both ways
    pub fixed_point_residual: f64,
}

impl TorusCover {
    /// Both cover generators commute with the base generators, the regime where the bump frame is exact.
    pub fn is_commuting_regime(&self) -> bool {
        let frac = |x: f64| (x - x.round()).abs() < 1e-12;
        frac(self.theta_cover * self.m as f64) && frac(self.theta_cover * self.n as f64)
    }
}

fn rational_model(theta: f64) -> Result<ClockShiftRep> {
    for q in 1..=64usize {
        let p = (theta * q as f64).round() as i64;
        if (theta - p as f64 / q as f64).abs() < 1e-12 && gcd(p.rem_euclid(q as i64) as u64, q as u64) == 1 {
            return clock_shift(q, p);
        }
    }
    Err(Error::ThetaIncompatible { theta, p: (theta * 64.0).round() as i64, q: 64 })
}

/// Angle grid offset by half a step so no point sits on the branch cut.
fn phase_grid(points: usize) -> DenseMatrix {
    let phases: Vec<C64> = (0..points).map(|a| C64::from_polar(1.0, -PI + 2.0 * PI * (a as f64 + 0.5) / points as f64)).collect();
    diag(&phases)
}

/// Shift e_a ↦ e_{a−s}, which multiplies the phase grid by e^{2πis/points} under conjugation.
fn grid_rotation(points: usize, s: usize) -> DenseMatrix {
    DenseMatrix::from_fn(points, points, |i, j| if (i + s) % points == j { C64::from(1.0) } else { C64::from(0.0) })
}

/// u′ = U ⊗ D ⊗ 1 and v′ = V ⊗ 1 ⊗ D on C^q ⊗ C^M ⊗ C^M, base generated by u′^m and v′^n.
pub fn torus_cover(m: usize, n: usize, k: i64, theta: f64, grid_points: usize) -> Result<TorusCover> {
    if m == 0 || n == 0 || !grid_points.is_multiple_of(m) || !grid_points.is_multiple_of(n) {
        return Err(Error::InvalidInput(format!("grid size {grid_points} must be a multiple of m = {m} and n = {n}")));
    }
    let theta_cover = (theta + k as f64) / (m * n) as f64;
    let rep = rational_model(theta_cover)?;
    let q = rep.q;
    let big = q * grid_points * grid_points;
    let d = phase_grid(grid_points);
    let one_m = identity(grid_points);
    let u_cover = kron(&kron(&rep.u, &d), &one_m);
    let v_cover = kron(&kron(&rep.v, &one_m), &d);
    let power = |x: &DenseMatrix, p: usize| (0..p).fold(identity(big), |acc, _| acc * x);
    let (u, v) = (power(&u_cover, m), power(&v_cover, n));
    let base = StarAlgebra::generated(big, &[u.clone(), v.clone()], true)?;
    let cover = StarAlgebra::generated(big, &[u_cover.clone(), v_cover.clone()], true)?;

    let group = FiniteGroup::product(&FiniteGroup::cyclic(m), &FiniteGroup::cyclic(n));
    let mut maps = Vec::with_capacity(m * n);
    for a in 0..m {
        for b in 0..n {
            let w = kron(
                &kron(&identity(q), &grid_rotation(grid_points, a * grid_points / m)),
                &grid_rotation(grid_points, b * grid_points / n),
            );
            maps.push(Automorphism::Unitary(w));
        }
    }
    let action = GroupAction::new(group, cover, maps)?;

    let mut e_list = Vec::with_capacity(4);
    let mut xi_list = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            e_list.push(angle_function(&u, |p| circle::bump(i, p))? * angle_function(&v, |p| circle::bump(j, p))?);
            xi_list.push(
                angle_function(&u_cover, |p| circle::lifted_bump(i, m, 0, p))?
                    * angle_function(&v_cover, |p| circle::lifted_bump(j, n, 0, p))?,
            );
        }
    }
    let frame = GaloisFrame::new(base, action, e_list, xi_list, ModuleForm::Summed)?;
    let report = check_frame(&frame);
    let fixed = fixed_point_algebra(&frame.action)?;
    let fixed_point_residual = fixed
        .basis()
        .iter()
        .map(|x| frame.base.membership_residual(x))
        .chain(frame.base.basis().iter().map(|x| fixed.membership_residual(x)))
        .fold(0.0, f64::max);
    Ok(TorusCover {
        m,
        n,
        k,
        theta,
        theta_cover,
        base_dim: frame.base.dim(),
        fixed_point_dim: fixed.dim(),
        fixed_point_residual,
        frame,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_commuting_cases() {
        for (m, n, k, theta) in [(2, 2, 0, 2.0), (2, 3, 1, 5.0)] {
            let cover = torus_cover(m, n, k, theta, 6).unwrap();
            assert!(cover.is_commuting_regime());
            assert!(cover.report.pass, "{m} {n} {k}: {:?}", cover.report);
            assert_eq!(cover.fixed_point_dim, cover.base_dim);
            assert!(cover.fixed_point_residual < 1e-8);
        }
    }

    #[test]
    fn generic_cover_angle_is_not_exact() {
        let cover = torus_cover(2, 2, 0, 4.0 / 3.0, 4).unwrap();
        assert!(!cover.is_commuting_regime());
        assert!(!cover.report.pass);
        assert!(cover.fixed_point_residual < 1e-8, "{} {} {}", cover.fixed_point_residual, cover.fixed_point_dim, cover.base_dim);
    }

    #[test]
    fn irrational_angle_is_rejected() {
        assert!(matches!(torus_cover(2, 2, 0, 2.0f64.sqrt(), 6), Err(Error::ThetaIncompatible { .. })));
    }
}
