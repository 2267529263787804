//! Noncommutative torus: truncated Fourier elements, the rational clock-shift
//! model, the flat Dirac spectrum and the bigraded star product.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dixmier::{log_slope, Provenance, SingularSeries};
use crate::error::{Error, Result};
use crate::linalg::{c, fro_norm, sparse_mul, DenseMatrix, C64};

/// e^{2πi t}
pub fn phase(t: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * t)
}

/// e^{2πi k/q}, exact at multiples of a quarter turn.
pub fn root_of_unity(k: i64, q: usize) -> C64 {
    let q = q as i64;
    let k = k.rem_euclid(q);
    if (4 * k) % q == 0 {
        return [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][(4 * k / q) as usize];
    }
    phase(k as f64 / q as f64)
}

/// Element Σ a_rs u^r v^s with u-powers stored left of v-powers, |r|, |s| ≤ cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusElement {
    pub theta: f64,
    pub cutoff: usize,
    coeffs: Vec<C64>,
}

impl TorusElement {
    pub fn zero(theta: f64, cutoff: usize) -> Self {
        let side = 2 * cutoff + 1;
        Self { theta, cutoff, coeffs: vec![c(0.0, 0.0); side * side] }
    }

    pub fn one(theta: f64) -> Self {
        Self::monomial(theta, 0, 0, c(1.0, 0.0))
    }

    pub fn u(theta: f64) -> Self {
        Self::monomial(theta, 1, 0, c(1.0, 0.0))
    }

    pub fn v(theta: f64) -> Self {
        Self::monomial(theta, 0, 1, c(1.0, 0.0))
    }

    pub fn monomial(theta: f64, r: i64, s: i64, a: C64) -> Self {
        let mut x = Self::zero(theta, r.unsigned_abs().max(s.unsigned_abs()) as usize);
        x.set(r, s, a);
        x
    }

    /// Independent standard complex Gaussian coefficients.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, theta: f64, cutoff: usize) -> Self {
        let mut x = Self::zero(theta, cutoff);
        for a in &mut x.coeffs {
            *a = c(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        x
    }

    fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    fn index(&self, r: i64, s: i64) -> Option<usize> {
        let big = self.cutoff as i64;
        if r.abs() > big || s.abs() > big {
            return None;
        }
        Some((r + big) as usize * self.side() + (s + big) as usize)
    }

    pub fn get(&self, r: i64, s: i64) -> C64 {
        self.index(r, s).map_or(c(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Panics if (r, s) lies outside the cutoff box.
    pub fn set(&mut self, r: i64, s: i64, a: C64) {
        let i = self.index(r, s).expect("mode outside cutoff");
        self.coeffs[i] = a;
    }

    /// Iterates (r, s, a_rs) over the cutoff box.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64, C64)> + '_ {
        let big = self.cutoff as i64;
        let side = self.side();
        self.coeffs.iter().enumerate().map(move |(i, a)| ((i / side) as i64 - big, (i % side) as i64 - big, *a))
    }

    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        let mut out = Self::zero(self.theta, cutoff);
        for (r, s, a) in self.modes() {
            if let Some(i) = out.index(r, s) {
                out.coeffs[i] = a;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_theta(self.theta, other.theta)?;
        let mut out = Self::zero(self.theta, self.cutoff.max(other.cutoff));
        for (r, s, a) in self.modes().chain(other.modes()) {
            let i = out.index(r, s).unwrap();
            out.coeffs[i] += a;
        }
        Ok(out)
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|a| *a *= z);
        out
    }

    /// Coefficients of x*: e^{−2πiθ rs} conj(a_{−r,−s}) at (r, s).
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.theta, self.cutoff);
        for (r, s, a) in self.modes() {
            out.set(-r, -s, a.conj() * phase(-self.theta * (r * s) as f64));
        }
        out
    }

    /// Max |a_rs| on the outermost shell max(|r|, |s|) = cutoff.
    pub fn boundary_shell_max(&self) -> f64 {
        let big = self.cutoff as i64;
        self.modes().filter(|(r, s, _)| r.abs() == big || s.abs() == big).map(|(_, _, a)| a.norm()).fold(0.0, f64::max)
    }

    pub fn coeff_distance(&self, other: &Self) -> f64 {
        let big = self.cutoff.max(other.cutoff) as i64;
        let mut acc = 0.0;
        for r in -big..=big {
            for s in -big..=big {
                acc += (self.get(r, s) - other.get(r, s)).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &TorusJson::from(self))?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TorusJson = serde_json::from_str(text)?;
        let mut x = Self::zero(doc.theta, doc.cutoff);
        for (r, s, re, im) in doc.coeffs {
            if x.index(r, s).is_none() {
                return Err(Error::InvalidInput(format!("mode ({r}, {s}) outside cutoff {}", doc.cutoff)));
            }
            x.set(r, s, c(re, im));
        }
        Ok(x)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TorusJson {
    theta: f64,
    #[serde(rename = "R")]
    cutoff: usize,
    coeffs: Vec<(i64, i64, f64, f64)>,
}

impl From<&TorusElement> for TorusJson {
    fn from(x: &TorusElement) -> Self {
        Self { theta: x.theta, cutoff: x.cutoff, coeffs: x.modes().map(|(r, s, a)| (r, s, a.re, a.im)).collect() }
    }
}

fn check_theta(a: f64, b: f64) -> Result<()> {
    if a != b {
        return Err(Error::ThetaMismatch(a, b));
    }
    Ok(())
}

/// Exact product; the result cutoff is the sum of the factor cutoffs.
pub fn normal_product(x: &TorusElement, y: &TorusElement) -> Result<TorusElement> {
    check_theta(x.theta, y.theta)?;
    let mut out = TorusElement::zero(x.theta, x.cutoff + y.cutoff);
    for (r1, s1, a) in x.modes() {
        if a == c(0.0, 0.0) {
            continue;
        }
        for (r2, s2, b) in y.modes() {
            let i = out.index(r1 + r2, s1 + s2).unwrap();
            out.coeffs[i] += a * b * phase(-x.theta * (s1 * r2) as f64);
        }
    }
    Ok(out)
}

/// Product truncated to `cutoff`, with Σ|dropped coefficients| as a discarded-mass bound.
pub fn truncated_product(x: &TorusElement, y: &TorusElement, cutoff: usize) -> Result<(TorusElement, f64)> {
    let full = normal_product(x, y)?;
    let big = cutoff as i64;
    let dropped = full.modes().filter(|(r, s, _)| r.abs() > big || s.abs() > big).map(|(_, _, a)| a.norm()).sum::<f64>();
    Ok((full.with_cutoff(cutoff), dropped))
}

/// The canonical trace: the (0, 0) coefficient.
pub fn tau0(x: &TorusElement) -> C64 {
    x.get(0, 0)
}

/// (δ1 x, δ2 x): coefficientwise multiplication by 2πi r and 2πi s.
pub fn derivations(x: &TorusElement) -> (TorusElement, TorusElement) {
    let (mut d1, mut d2) = (x.clone(), x.clone());
    for (i, (r, s, a)) in x.modes().enumerate() {
        d1.coeffs[i] = a * c(0.0, 2.0 * PI * r as f64);
        d2.coeffs[i] = a * c(0.0, 2.0 * PI * s as f64);
    }
    (d1, d2)
}

/// Rational model: U = diag(1, ω, …, ω^{q−1}), V the cyclic shift e_k ↦ e_{k+1}, ω = e^{2πip/q}.
#[derive(Debug, Clone)]
pub struct ClockShiftRep {
    pub q: usize,
    pub p: i64,
    pub u: DenseMatrix,
    pub v: DenseMatrix,
}

impl ClockShiftRep {
    pub fn omega(&self) -> C64 {
        root_of_unity(self.p, self.q)
    }

    /// ‖UV − ωVU‖_F.
    pub fn relation_residual(&self) -> f64 {
        fro_norm(&(sparse_mul(&self.u, &self.v) - sparse_mul(&self.v, &self.u) * self.omega()))
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn clock_shift(q: usize, p: i64) -> Result<ClockShiftRep> {
    if q == 0 || gcd(p.rem_euclid(q as i64) as u64, q as u64) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    let mut u = DenseMatrix::zeros(q, q);
    let mut v = DenseMatrix::zeros(q, q);
    for k in 0..q {
        u[(k, k)] = root_of_unity(p * k as i64, q);
        v[((k + 1) % q, k)] = c(1.0, 0.0);
    }
    Ok(ClockShiftRep { q, p, u, v })
}

/// Σ a_rs U^r V^s in the clock-shift model.
pub fn evaluate(x: &TorusElement, rep: &ClockShiftRep) -> Result<DenseMatrix> {
    let q = rep.q as i64;
    if (phase(x.theta) - rep.omega()).norm() > 1e-12 {
        return Err(Error::ThetaIncompatible { theta: x.theta, p: rep.p, q: rep.q });
    }
    let mut out = DenseMatrix::zeros(rep.q, rep.q);
    for (r, s, a) in x.modes() {
        if a == c(0.0, 0.0) {
            continue;
        }
        // (U^r V^s) e_k = ω^{r(k+s)} e_{k+s}
        for k in 0..q {
            let row = (k + s).rem_euclid(q);
            out[(row as usize, k as usize)] += a * root_of_unity(rep.p * r * row, rep.q);
        }
    }
    Ok(out)
}

/// Spectrum of the block Dirac operator built from ∂ = δ1 + τδ2 on modes |r|, |s| ≤ cutoff.
#[derive(Debug, Clone)]
pub struct DiracSpectrum {
    pub tau: C64,
    pub cutoff: usize,
    /// (r, s, 2π|r + τs|), one entry per mode; each contributes ± that value.
    pub modes: Vec<(i64, i64, f64)>,
}

impl DiracSpectrum {
    /// All 2(2R+1)² eigenvalues, sorted ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.modes.iter().flat_map(|&(_, _, m)| [m, -m]).collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Largest ρ such that every lattice point with |r + τs| < ρ lies in the cutoff box.
    pub fn complete_radius(&self) -> f64 {
        complete_radius(self.tau, self.cutoff)
    }

    /// Nonzero |λ|^{-power} over the complete part of the spectrum, with multiplicity two per mode.
    pub fn inverse_power_series(&self, power: f64) -> SingularSeries {
        let limit = 2.0 * PI * self.complete_radius();
        let mut values: Vec<f64> = self
            .modes
            .iter()
            .filter(|&&(_, _, m)| m > 0.0 && m < limit)
            .flat_map(|&(_, _, m)| {
                let v = m.powf(-power);
                [v, v]
            })
            .collect();
        values.sort_by(|a, b| b.total_cmp(a));
        SingularSeries::new_sorted(values, Provenance::Analytic)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "eigenvalue"])?;
        for (i, e) in self.eigenvalues().iter().enumerate() {
            w.write_record([i.to_string(), format!("{e:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn dirac_spectrum(tau: C64, cutoff: usize) -> Result<DiracSpectrum> {
    if tau.im == 0.0 {
        return Err(Error::DegenerateTau);
    }
    let big = cutoff as i64;
    let mut modes = Vec::with_capacity((2 * cutoff + 1).pow(2));
    for r in -big..=big {
        for s in -big..=big {
            modes.push((r, s, 2.0 * PI * (c(r as f64, 0.0) + tau * s as f64).norm()));
        }
    }
    Ok(DiracSpectrum { tau, cutoff, modes })
}

/// min |r + τs| over lattice points outside the box max(|r|, |s|) ≤ cutoff.
pub fn complete_radius(tau: C64, cutoff: usize) -> f64 {
    let big = cutoff as i64;
    let len = |r: i64, s: i64| (c(r as f64, 0.0) + tau * s as f64).norm();
    let im = tau.im.abs();
    let mut best = f64::INFINITY;
    // half-plane s > cutoff: |r + τs| ≥ Im τ · s
    let mut s = big + 1;
    while im * s as f64 <= best {
        let r0 = (-tau.re * s as f64).round() as i64;
        for r in r0 - 1..=r0 + 1 {
            best = best.min(len(r, s));
        }
        s += 1;
    }
    // half-plane r > cutoff: |r + τs| ≥ r · Im τ / |τ|
    let mut r = big + 1;
    let slope = im / tau.norm();
    while slope * r as f64 <= best {
        let s0 = -r as f64 * tau.re / tau.norm_sqr();
        for s in [s0.floor() as i64, s0.ceil() as i64] {
            best = best.min(len(r, s));
        }
        r += 1;
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionDiagnostic {
    pub power: f64,
    pub terms: usize,
    pub slope: f64,
    pub stderr: f64,
    /// σ_N / log N at the largest N.
    pub sigma_over_log: f64,
}

/// Slope of σ_N(|D|^{-power}) against log N over [√N_max, N_max].
pub fn dimension_diagnostic(spec: &DiracSpectrum, power: f64) -> Result<DimensionDiagnostic> {
    let series = spec.inverse_power_series(power);
    let n = series.len();
    let fit = log_slope(&series, (n as f64).sqrt().ceil() as usize, n)?;
    Ok(DimensionDiagnostic {
        power,
        terms: n,
        slope: fit.slope,
        stderr: fit.stderr,
        sigma_over_log: series.sigma_int(n) / (n as f64).ln(),
    })
}

/// Finite sum of homogeneous operator components X_n, keyed by bidegree n.
#[derive(Debug, Clone)]
pub struct BigradedOperator {
    pub dim: usize,
    pub components: BTreeMap<(i64, i64), DenseMatrix>,
}

impl BigradedOperator {
    pub fn new(dim: usize) -> Self {
        Self { dim, components: BTreeMap::new() }
    }

    pub fn add_component(&mut self, degree: (i64, i64), x: DenseMatrix) {
        let dim = self.dim;
        *self.components.entry(degree).or_insert_with(|| DenseMatrix::zeros(dim, dim)) += x;
    }

    /// The undeformed operator Σ X_n.
    pub fn total(&self) -> DenseMatrix {
        self.components.values().fold(DenseMatrix::zeros(self.dim, self.dim), |acc, x| acc + x)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for key in self.components.keys().chain(other.components.keys()) {
            let zero = DenseMatrix::zeros(self.dim, self.dim);
            let a = self.components.get(key).unwrap_or(&zero);
            let b = other.components.get(key).unwrap_or(&zero);
            acc = f64::max(acc, fro_norm(&(a - b)));
        }
        acc
    }
}

/// x * y = Σ λ^{m1 n2} X_n Y_m for x of bidegree n, y of bidegree m.
pub fn star_product(x: &BigradedOperator, y: &BigradedOperator, lambda: C64) -> BigradedOperator {
    let mut out = BigradedOperator::new(x.dim);
    for (&(n1, n2), xn) in &x.components {
        for (&(m1, m2), ym) in &y.components {
            out.add_component((n1 + m1, n2 + m2), xn * ym * lambda.powi((m1 * n2) as i32));
        }
    }
    out
}

/// Star product of Fourier elements over the commutative base product, with λ = e^{−2πiθ}.
pub fn star_coefficients(x: &TorusElement, y: &TorusElement) -> Result<TorusElement> {
    check_theta(x.theta, y.theta)?;
    let lambda = phase(-x.theta);
    let mut out = TorusElement::zero(x.theta, x.cutoff + y.cutoff);
    for (r1, s1, a) in x.modes() {
        for (r2, s2, b) in y.modes() {
            let i = out.index(r1 + r2, s1 + s2).unwrap();
            out.coeffs[i] += a * b * lambda.powi((r2 * s1) as i32);
        }
    }
    Ok(out)
}

/// Truncated Fourier basis of the commutative torus: modes (k1, k2), |k1|, |k2| ≤ size.
#[derive(Debug, Clone)]
pub struct ModeLattice {
    pub size: usize,
}

impl ModeLattice {
    pub fn dim(&self) -> usize {
        (2 * self.size + 1).pow(2)
    }

    fn index(&self, k1: i64, k2: i64) -> Option<usize> {
        let m = self.size as i64;
        (k1.abs() <= m && k2.abs() <= m).then(|| ((k1 + m) * (2 * m + 1) + k2 + m) as usize)
    }

    fn modes(&self) -> impl Iterator<Item = (i64, i64)> {
        let m = self.size as i64;
        (-m..=m).flat_map(move |k1| (-m..=m).map(move |k2| (k1, k2)))
    }

    /// Truncated shift e_k ↦ e_{k + (a, b)}, zero when the target leaves the lattice.
    pub fn shift(&self, a: i64, b: i64) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.dim(), self.dim());
        for (k1, k2) in self.modes() {
            if let (Some(to), Some(from)) = (self.index(k1 + a, k2 + b), self.index(k1, k2)) {
                out[(to, from)] = c(1.0, 0.0);
            }
        }
        out
    }

    /// Diagonal mode-number operators (p1, p2).
    pub fn grading(&self) -> (Vec<i64>, Vec<i64>) {
        self.modes().unzip()
    }

    /// Bigraded operator Σ a_rs S^{(r,s)} of a Fourier element.
    pub fn realize(&self, x: &TorusElement) -> BigradedOperator {
        let mut out = BigradedOperator::new(self.dim());
        for (r, s, a) in x.modes() {
            if a != c(0.0, 0.0) {
                out.add_component((r, s), self.shift(r, s) * a);
            }
        }
        out
    }

    /// Max ‖[p_j, X_n] − n_j X_n‖ over components.
    pub fn homogeneity_defect(&self, x: &BigradedOperator) -> f64 {
        let (p1, p2) = self.grading();
        let mut worst: f64 = 0.0;
        for (&(n1, n2), xn) in &x.components {
            for (p, deg) in [(&p1, n1), (&p2, n2)] {
                let mut d = xn.clone();
                for i in 0..d.nrows() {
                    for j in 0..d.ncols() {
                        d[(i, j)] = xn[(i, j)] * (p[i] - p[j] - deg) as f64;
                    }
                }
                worst = worst.max(fro_norm(&d));
            }
        }
        worst
    }

    /// l(x) built straight from Fourier coefficients, without realizing each component.
    pub fn twist_element(&self, x: &TorusElement, lambda: C64) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.dim(), self.dim());
        for (k1, k2) in self.modes() {
            let from = self.index(k1, k2).unwrap();
            for (r, s, a) in x.modes() {
                if let Some(to) = self.index(k1 + r, k2 + s) {
                    out[(to, from)] += a * lambda.powi((s * k1) as i32);
                }
            }
        }
        out
    }

    /// Indices of modes at least `margin` away from the lattice boundary.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        let m = self.size as i64 - margin as i64;
        self.modes().enumerate().filter(|(_, (k1, k2))| k1.abs() <= m && k2.abs() <= m).map(|(i, _)| i).collect()
    }

    /// Left twist l(x) = Σ X_n λ^{n2 p1}.
    pub fn twist(&self, x: &BigradedOperator, lambda: C64) -> DenseMatrix {
        let (p1, _) = self.grading();
        let mut out = DenseMatrix::zeros(self.dim(), self.dim());
        for (&(_, n2), xn) in &x.components {
            let mut t = xn.clone();
            for (j, &k1) in p1.iter().enumerate() {
                let f = lambda.powi((n2 * k1) as i32);
                t.column_mut(j).iter_mut().for_each(|z| *z *= f);
            }
            out += t;
        }
        out
    }
}

/// ‖(l(x)l(y) − l(x*y))P‖_F, an upper bound for the operator norm, with P the interior modes where
/// no intermediate shift is truncated. Only the interior columns are formed.
pub fn twist_defect(lattice: &ModeLattice, x: &TorusElement, y: &TorusElement) -> Result<f64> {
    let margin = x.cutoff + y.cutoff;
    if lattice.size < margin {
        return Err(Error::InvalidInput(format!("lattice size {} below product cutoff {margin}", lattice.size)));
    }
    let lambda = phase(-x.theta);
    let xy = star_coefficients(x, y)?;
    let cols = lattice.interior(margin);
    let lhs = lattice.twist_element(x, lambda) * lattice.twist_element(y, lambda).select_columns(&cols);
    let rhs = lattice.twist_element(&xy, lambda).select_columns(&cols);
    Ok(fro_norm(&(lhs - rhs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::op_norm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const THETA: f64 = 0.3819660112501051;

    #[test]
    fn product_examples() {
        let (u, v) = (TorusElement::u(THETA), TorusElement::v(THETA));
        let uv = normal_product(&u, &v).unwrap();
        assert_eq!(uv.get(1, 1), c(1.0, 0.0));
        let vu = normal_product(&v, &u).unwrap();
        assert!((vu.get(1, 1) - phase(-THETA)).norm() < 1e-15);
        let rel = uv.add(&vu.scale(-phase(THETA))).unwrap();
        assert!(rel.coeff_distance(&TorusElement::zero(THETA, 2)) < 1e-15);
        let x = TorusElement::random(&mut ChaCha8Rng::seed_from_u64(1), THETA, 3);
        let x1 = normal_product(&x, &TorusElement::one(THETA)).unwrap();
        assert!(x1.coeff_distance(&x) == 0.0);
        assert!(matches!(normal_product(&u, &TorusElement::v(0.1)), Err(Error::ThetaMismatch(..))));
    }

    #[test]
    fn trace_examples() {
        assert_eq!(tau0(&TorusElement::one(THETA)), c(1.0, 0.0));
        assert_eq!(tau0(&TorusElement::u(THETA)), c(0.0, 0.0));
        let u = TorusElement::u(THETA);
        assert!((tau0(&normal_product(&u, &u.adjoint()).unwrap()) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn trace_and_leibniz_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let x = TorusElement::random(&mut rng, THETA, 8);
            let y = TorusElement::random(&mut rng, THETA, 8);
            let xy = normal_product(&x, &y).unwrap();
            let yx = normal_product(&y, &x).unwrap();
            assert!((tau0(&xy) - tau0(&yx)).norm() <= 1e-12 * (1.0 + tau0(&xy).norm()));
            let (dx1, dx2) = derivations(&x);
            let (dy1, dy2) = derivations(&y);
            let (dxy1, dxy2) = derivations(&xy);
            let l1 = normal_product(&dx1, &y).unwrap().add(&normal_product(&x, &dy1).unwrap()).unwrap();
            let l2 = normal_product(&dx2, &y).unwrap().add(&normal_product(&x, &dy2).unwrap()).unwrap();
            let scale = 1.0 + dxy1.coeff_distance(&TorusElement::zero(THETA, 0));
            assert!(dxy1.coeff_distance(&l1) <= 1e-10 * scale);
            assert!(dxy2.coeff_distance(&l2) <= 1e-10 * scale);
        }
    }

    #[test]
    fn derivation_examples() {
        let (d1, d2) = derivations(&TorusElement::u(THETA));
        assert!((d1.get(1, 0) - c(0.0, 2.0 * PI)).norm() < 1e-15);
        assert_eq!(d2.get(1, 0), c(0.0, 0.0));
        let (d1, _) = derivations(&TorusElement::one(THETA));
        assert_eq!(d1.get(0, 0), c(0.0, 0.0));
        let x = TorusElement::random(&mut ChaCha8Rng::seed_from_u64(3), THETA, 4);
        let (a, _) = derivations(&derivations(&x).1);
        let (_, b) = derivations(&derivations(&x).0);
        assert!(a.coeff_distance(&b) <= 1e-15 * a.coeff_distance(&TorusElement::zero(THETA, 0)));
    }

    #[test]
    fn clock_shift_examples() {
        let one = clock_shift(1, 0).unwrap();
        assert_eq!(&one.u * &one.v, &one.v * &one.u);
        let two = clock_shift(2, 1).unwrap();
        assert!(fro_norm(&(&two.u * &two.v + &two.v * &two.u)) == 0.0);
        let five = clock_shift(5, 2).unwrap();
        assert!(op_norm(&(&five.u * &five.v - &five.v * &five.u * phase(0.4))) <= 1e-14);
        assert!(matches!(clock_shift(4, 2), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn evaluate_is_star_homomorphism() {
        let rep = clock_shift(7, 3).unwrap();
        let theta = 3.0 / 7.0;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(evaluate(&TorusElement::one(theta), &rep).unwrap(), DenseMatrix::identity(7, 7));
        assert!(fro_norm(&(evaluate(&TorusElement::u(theta), &rep).unwrap() - &rep.u)) < 1e-15);
        for _ in 0..5 {
            let x = TorusElement::random(&mut rng, theta, 4);
            let y = TorusElement::random(&mut rng, theta, 4);
            let ex = evaluate(&x, &rep).unwrap();
            let ey = evaluate(&y, &rep).unwrap();
            let exy = evaluate(&normal_product(&x, &y).unwrap(), &rep).unwrap();
            assert!(fro_norm(&(&exy - &ex * &ey)) <= 1e-10 * fro_norm(&exy));
            assert!(fro_norm(&(evaluate(&x.adjoint(), &rep).unwrap() - ex.adjoint())) <= 1e-12 * fro_norm(&ex));
        }
        // θ shifted by an integer is still compatible
        assert!(evaluate(&TorusElement::u(theta + 1.0), &rep).is_ok());
        assert!(matches!(evaluate(&TorusElement::u(0.2), &rep), Err(Error::ThetaIncompatible { .. })));
    }

    #[test]
    fn dirac_examples() {
        let spec = dirac_spectrum(c(0.0, 1.0), 1).unwrap();
        let ev = spec.eigenvalues();
        assert_eq!(ev.len(), 18);
        assert_eq!(ev.iter().filter(|&&e| e == 0.0).count(), 2);
        assert!(spec.modes.iter().any(|&(r, s, m)| r == 1 && s == 0 && (m - 2.0 * PI).abs() < 1e-14));
        let mut neg: Vec<f64> = ev.iter().map(|e| -e).collect();
        neg.sort_by(f64::total_cmp);
        assert_eq!(neg, ev);
        assert!(matches!(dirac_spectrum(c(1.0, 0.0), 2), Err(Error::DegenerateTau)));
    }

    #[test]
    fn complete_radius_matches_brute_force() {
        for tau in [c(0.0, 1.0), c(0.0, 2.0), c(1.0, 1.0), c(-0.4, 0.3)] {
            let cutoff = 12usize;
            let big = cutoff as i64;
            let mut best = f64::INFINITY;
            for r in -400i64..=400 {
                for s in -400i64..=400 {
                    if r.abs() > big || s.abs() > big {
                        best = best.min((c(r as f64, 0.0) + tau * s as f64).norm());
                    }
                }
            }
            assert!((complete_radius(tau, cutoff) - best).abs() < 1e-12, "tau {tau}");
        }
    }

    #[test]
    fn dimension_two_is_log_divergent() {
        let d1 = dimension_diagnostic(&dirac_spectrum(c(0.0, 1.0), 120).unwrap(), 2.0).unwrap();
        assert!((d1.slope * 2.0 * PI - 1.0).abs() < 0.05, "slope {}", d1.slope);
        let d2 = dimension_diagnostic(&dirac_spectrum(c(0.0, 2.0), 120).unwrap(), 2.0).unwrap();
        assert!((d2.slope / d1.slope - 0.5).abs() < 0.03);
        // trace class: the slope decays with the window
        let d4_lo = dimension_diagnostic(&dirac_spectrum(c(0.0, 1.0), 30).unwrap(), 4.0).unwrap();
        let d4 = dimension_diagnostic(&dirac_spectrum(c(0.0, 1.0), 120).unwrap(), 4.0).unwrap();
        assert!(d4.slope < 0.5 * d4_lo.slope && d4.slope < 1e-2 * d1.slope, "{} {}", d4_lo.slope, d4.slope);
        let lo = dimension_diagnostic(&dirac_spectrum(c(0.0, 1.0), 30).unwrap(), 1.0).unwrap();
        let hi = dimension_diagnostic(&dirac_spectrum(c(0.0, 1.0), 120).unwrap(), 1.0).unwrap();
        assert!(hi.sigma_over_log > 1.5 * lo.sigma_over_log);
    }

    #[test]
    fn star_matches_normal_product_on_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = TorusElement::random(&mut rng, THETA, 3);
        let y = TorusElement::random(&mut rng, THETA, 3);
        let z = TorusElement::random(&mut rng, THETA, 3);
        let xy = star_coefficients(&x, &y).unwrap();
        assert!(xy.coeff_distance(&normal_product(&x, &y).unwrap()) < 1e-12);
        let left = star_coefficients(&xy, &z).unwrap();
        let right = star_coefficients(&x, &star_coefficients(&y, &z).unwrap()).unwrap();
        assert!(left.coeff_distance(&right) <= 1e-12 * left.coeff_distance(&TorusElement::zero(THETA, 0)));
    }

    #[test]
    fn star_examples_and_twist() {
        let lat = ModeLattice { size: 3 };
        let lambda = phase(-THETA);
        let u = lat.realize(&TorusElement::u(THETA));
        let v = lat.realize(&TorusElement::v(THETA));
        let uv = star_product(&u, &v, lambda);
        let vu = star_product(&v, &u, lambda);
        // commutative base: the star product carries the whole relation
        assert!(fro_norm(&(uv.total() - vu.total() * phase(THETA))) < 1e-14);
        let one = lat.realize(&TorusElement::one(THETA));
        assert!(fro_norm(&(star_product(&one, &one, lambda).total() - one.total())) == 0.0);
        assert!(lat.homogeneity_defect(&uv) == 0.0);
        let lhs = lat.twist(&u, lambda) * lat.twist(&v, lambda);
        assert!(fro_norm(&(lhs - lat.twist(&uv, lambda))) < 1e-13);
    }

    #[test]
    fn twist_is_multiplicative_on_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let lat = ModeLattice { size: 8 };
        let x = TorusElement::random(&mut rng, THETA, 3);
        let y = TorusElement::random(&mut rng, THETA, 3);
        assert!(twist_defect(&lat, &x, &y).unwrap() < 1e-10);
        let u = lat.realize(&x);
        assert!(fro_norm(&(lat.twist(&u, phase(-THETA)) - lat.twist_element(&x, phase(-THETA)))) < 1e-12);
        assert!(twist_defect(&ModeLattice { size: 5 }, &x, &y).is_err());
    }
}
