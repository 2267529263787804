//! Sampled functions on the circle, on windows of the line, and on finite
//! covers of the circle; the two-bump partition of unity and its lifts.

use std::f64::consts::PI;
use std::io::Write;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{c, DenseMatrix, C64};

/// Half-width of the ramp band in sin φ. Strictly inside the ±0.1 open sets.
pub const RAMP_HALF_WIDTH: f64 = 0.09;

/// Quintic smoothstep, clamped to [0, 1].
pub fn smoothstep5(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// Ramp angle χ(φ) ∈ [0, π/2]: zero where sin φ ≥ 0.09, π/2 where sin φ ≤ −0.09.
pub fn ramp_angle(phi: f64) -> f64 {
    let t = (RAMP_HALF_WIDTH - phi.sin()) / (2.0 * RAMP_HALF_WIDTH);
    0.5 * PI * smoothstep5(t)
}

/// (b1(φ), b2(φ)) = (cos χ, sin χ); b1 lives on the upper arc, b2 on the lower.
pub fn bump_values(phi: f64) -> (f64, f64) {
    let chi = ramp_angle(phi);
    let (b1, b2) = (chi.cos(), chi.sin());
    // exact zeros off the supports
    (if chi >= 0.5 * PI { 0.0 } else { b1 }, if chi <= 0.0 { 0.0 } else { b2 })
}

pub fn bump(i: usize, phi: f64) -> f64 {
    let (b1, b2) = bump_values(phi);
    if i == 0 {
        b1
    } else {
        b2
    }
}

/// Center of the support arc of bump i.
pub fn bump_center(i: usize) -> f64 {
    if i == 0 {
        0.5 * PI
    } else {
        -0.5 * PI
    }
}

/// Bump i lifted to sheet `sheet` of the n-fold cover z ↦ zⁿ, evaluated at angle psi.
/// The sheet-0 lift lives on the arc of length 2π centred at the bump's centre.
pub fn lifted_bump(i: usize, n: usize, sheet: usize, psi: f64) -> f64 {
    let x = n as f64 * psi;
    let period = 2.0 * PI * n as f64;
    let start = bump_center(i) - PI + 2.0 * PI * sheet as f64;
    let offset = (x - start).rem_euclid(period);
    if offset < 2.0 * PI {
        bump(i, x)
    } else {
        0.0
    }
}

/// Angle of grid point k on an N-point circle grid.
pub fn grid_angle(k: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * k as f64 / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleFunction {
    pub samples: Vec<C64>,
}

impl CircleFunction {
    pub fn from_fn(n: usize, f: impl Fn(f64) -> C64) -> Self {
        Self { samples: (0..n).map(|k| f(grid_angle(k, n))).collect() }
    }

    pub fn from_real_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(n, |phi| c(f(phi), 0.0))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn angle(&self, k: usize) -> f64 {
        grid_angle(k, self.len())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["angle", "re", "im"])?;
        for (k, z) in self.samples.iter().enumerate() {
            w.write_record([format!("{:.17e}", self.angle(k)), format!("{:.17e}", z.re), format!("{:.17e}", z.im)])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BumpPair {
    pub b1: CircleFunction,
    pub b2: CircleFunction,
}

impl BumpPair {
    pub fn get(&self, i: usize) -> &CircleFunction {
        if i == 0 {
            &self.b1
        } else {
            &self.b2
        }
    }

    pub fn partition_residual(&self) -> f64 {
        self.b1.samples.iter().zip(&self.b2.samples).map(|(a, b)| (a.norm_sqr() + b.norm_sqr() - 1.0).abs()).fold(0.0, f64::max)
    }
}

pub const MIN_GRID: usize = 16;

pub fn make_bumps(n: usize) -> Result<BumpPair> {
    if n < MIN_GRID {
        return Err(Error::GridTooCoarse { n, min: MIN_GRID });
    }
    Ok(BumpPair {
        b1: CircleFunction::from_real_fn(n, |phi| bump(0, phi)),
        b2: CircleFunction::from_real_fn(n, |phi| bump(1, phi)),
    })
}

/// Function on the window (−(2W+1)π, (2W+1)π) sampled at x_j = −(2W+1)π + 2πj/N, j = 0..=(2W+1)N.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFunction {
    pub window: usize,
    pub per_period: usize,
    pub samples: Vec<C64>,
}

impl LineFunction {
    pub fn zeros(window: usize, per_period: usize) -> Self {
        Self { window, per_period, samples: vec![c(0.0, 0.0); (2 * window + 1) * per_period + 1] }
    }

    pub fn point(&self, j: usize) -> f64 {
        -((2 * self.window + 1) as f64) * PI + 2.0 * PI * j as f64 / self.per_period as f64
    }

    /// Indices whose points lie in the validity region |x| ≤ (2W−1)π.
    pub fn inner_range(&self) -> std::ops::RangeInclusive<usize> {
        self.per_period..=(2 * self.window) * self.per_period
    }

    pub fn endpoint_max(&self) -> f64 {
        self.samples[0].norm().max(self.samples.last().map_or(0.0, |z| z.norm()))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "re", "im"])?;
        for (j, z) in self.samples.iter().enumerate() {
            w.write_record([format!("{:.17e}", self.point(j)), format!("{:.17e}", z.re), format!("{:.17e}", z.im)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Support of a sampled circle function as a cyclic index run (start, length),
/// chosen as the complement of the longest run of zeros.
fn support_run(b: &CircleFunction) -> Result<(usize, usize)> {
    let n = b.len();
    let zero: Vec<bool> = b.samples.iter().map(|z| z.norm() == 0.0).collect();
    if !zero.iter().any(|&z| z) {
        return Err(Error::SupportWraps);
    }
    let (mut best_start, mut best_len) = (0, 0);
    for start in 0..n {
        if !zero[start] || zero[(start + n - 1) % n] {
            continue;
        }
        let mut len = 0;
        while len < n && zero[(start + len) % n] {
            len += 1;
        }
        if len > best_len {
            best_start = start;
            best_len = len;
        }
    }
    if best_len == n {
        return Ok((0, 0));
    }
    Ok(((best_start + best_len) % n, n - best_len))
}

/// Lift of b to the line: b∘p on one translate of its support arc, shifted by 2π·offset, zero elsewhere.
pub fn lift_to_line(b: &CircleFunction, offset: i64, window: usize) -> Result<LineFunction> {
    let n = b.len();
    let (start, len) = support_run(b)?;
    let mut out = LineFunction::zeros(window, n);
    if len == 0 {
        return Ok(out);
    }
    // support arc starting at grid index `start`, unrolled without wrapping; its
    // midpoint is moved into [−π, π) to fix the base sheet
    let mid = start as f64 + (len as f64 - 1.0) / 2.0;
    let shift: i64 = if mid >= n as f64 { -1 } else { 0 };
    let last = (2 * window + 1) * n;
    for t in 0..len {
        let k = start + t;
        let unrolled = k as i64 + shift * n as i64;
        let j = unrolled + n as i64 * (window as i64 + offset);
        if j < 0 || j as usize > last {
            return Err(Error::WindowTooSmall { w: window, reason: format!("lift at offset {offset} leaves the window") });
        }
        out.samples[j as usize] = b.samples[k % n];
    }
    Ok(out)
}

/// Max over the validity region of |Σ_{|g|≤W} Σ_i ζ_i(x − 2πg)² − 1|.
pub fn check_line_partition(pair: &BumpPair, window: usize) -> Result<f64> {
    let total = line_partition_sum(pair, window)?;
    Ok(total.inner_range().map(|j| (total.samples[j].re - 1.0).abs()).fold(0.0, f64::max))
}

/// The translate sum Σ_{|g|≤W} Σ_i ζ_i(x − 2πg)² on the whole window.
pub fn line_partition_sum(pair: &BumpPair, window: usize) -> Result<LineFunction> {
    if window < 1 {
        return Err(Error::WindowTooSmall { w: window, reason: "need W ≥ 1 for a nonempty validity region".into() });
    }
    let n = pair.b1.len();
    let mut total = LineFunction::zeros(window, n);
    let w = window as i64;
    for i in 0..2 {
        for g in -w..=w {
            let lift = match lift_to_line(pair.get(i), g, window) {
                Ok(l) => l,
                // translates that leave the window only matter outside the validity region
                Err(Error::WindowTooSmall { .. }) if g.abs() == w => continue,
                Err(e) => return Err(e),
            };
            for (acc, z) in total.samples.iter_mut().zip(&lift.samples) {
                *acc += z.norm_sqr();
            }
        }
    }
    Ok(total)
}

/// Index of the base grid point under the cover map ψ ↦ nψ for an (nN)-point cover grid.
pub fn cover_to_base_index(j: usize, n: usize, base_len: usize) -> Result<usize> {
    if !((n - 1) * base_len).is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("(n−1)·N must be even, got n = {n}, N = {base_len}")));
    }
    let shift = (n - 1) * base_len / 2;
    Ok((j + n * base_len - shift % (n * base_len)) % base_len)
}

/// Lift of bump i to sheet `sheet` of the n-fold cover, on the (nN)-point cover grid.
pub fn lift_to_cover(pair: &BumpPair, i: usize, n: usize, sheet: usize) -> Result<CircleFunction> {
    let base_len = pair.b1.len();
    let cover_len = n * base_len;
    let mut samples = Vec::with_capacity(cover_len);
    for j in 0..cover_len {
        let k = cover_to_base_index(j, n, base_len)?;
        let psi = grid_angle(j, cover_len);
        let on_sheet = lifted_bump(i, n, sheet, psi) != 0.0;
        samples.push(if on_sheet { pair.get(i).samples[k] } else { c(0.0, 0.0) });
    }
    Ok(CircleFunction { samples })
}

/// Max over the cover grid of |Σ_sheets Σ_i ζ_{i,s}² − 1|.
pub fn check_cover_partition(pair: &BumpPair, n: usize) -> Result<f64> {
    let cover_len = n * pair.b1.len();
    let mut acc = vec![0.0; cover_len];
    for i in 0..2 {
        for s in 0..n {
            let lift = lift_to_cover(pair, i, n, s)?;
            for (a, z) in acc.iter_mut().zip(&lift.samples) {
                *a += z.norm_sqr();
            }
        }
    }
    Ok(acc.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max))
}

/// Discrete Fourier coefficients a_{−K..=K} with f(φ_j) = Σ a_k e^{ikφ_j}.
pub fn fourier_of(f: &CircleFunction, cutoff: usize) -> Result<Vec<C64>> {
    let n = f.len();
    if 2 * cutoff >= n {
        return Err(Error::InvalidInput(format!("cutoff {cutoff} needs at least {} grid points", 2 * cutoff + 1)));
    }
    let mut buf = f.samples.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok((-(cutoff as i64)..=cutoff as i64)
        .map(|k| {
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[k.rem_euclid(n as i64) as usize] * (sign * scale)
        })
        .collect())
}

/// Evaluates Σ a_k e^{ikφ} at angle phi, coefficients indexed −K..=K.
pub fn eval_fourier(coeffs: &[C64], phi: f64) -> C64 {
    let cutoff = (coeffs.len() / 2) as i64;
    coeffs.iter().enumerate().map(|(idx, a)| a * C64::from_polar(1.0, (idx as i64 - cutoff) as f64 * phi)).sum()
}

/// Σ a_k u^k for a unitary u (negative powers through the adjoint).
pub fn fourier_calculus(u: &DenseMatrix, coeffs: &[C64]) -> DenseMatrix {
    let n = u.nrows();
    let cutoff = coeffs.len() / 2;
    let mut out = DenseMatrix::identity(n, n) * coeffs[cutoff];
    let ustar = u.adjoint();
    let (mut pos, mut neg) = (u.clone(), ustar.clone());
    for k in 1..=cutoff {
        out += &pos * coeffs[cutoff + k] + &neg * coeffs[cutoff - k];
        if k < cutoff {
            pos = &pos * u;
            neg = &neg * &ustar;
        }
    }
    out
}
