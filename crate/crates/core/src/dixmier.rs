//! Singular-value series, cutoff sums σ_λ, Cesàro means τ_λ and the
//! log-divergence slope used as the noncommutative integral.

use std::f64::consts::E;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, C64};
use crate::torus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Singular values of a finite matrix: the series continues with zeros.
    Matrix,
    /// Truncation of an infinite closed-form sequence.
    Analytic,
}

/// Nonincreasing nonnegative values with compensated prefix sums.
#[derive(Debug, Clone)]
pub struct SingularSeries {
    values: Vec<f64>,
    prefix: Vec<f64>,
    pub provenance: Provenance,
}

fn compensated_prefix(values: &[f64]) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(values.len() + 1);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    prefix.push(0.0);
    for &x in values {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
        prefix.push(sum + comp);
    }
    prefix
}

impl SingularSeries {
    /// Sorts into nonincreasing order; rejects negative or non-finite values.
    pub fn new(mut values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!("singular value {bad} is not a finite nonnegative number")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self::new_sorted(values, provenance))
    }

    /// Caller guarantees the values are nonincreasing and nonnegative.
    pub fn new_sorted(values: Vec<f64>, provenance: Provenance) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        let prefix = compensated_prefix(&values);
        Self { values, prefix, provenance }
    }

    pub fn from_matrix(m: &DenseMatrix) -> Self {
        Self::new_sorted(linalg::singular_values(m), Provenance::Matrix)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// σ_n = Σ_{k<n} μ_k; matrix series are padded with zeros.
    pub fn sigma_int(&self, n: usize) -> f64 {
        self.prefix[n.min(self.len())]
    }

    /// μ_k, zero past the end.
    pub fn value(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "mu"])?;
        for (k, v) in self.values.iter().enumerate() {
            w.write_record([k.to_string(), format!("{v:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, provenance: Provenance) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let v: f64 = rec
                .get(1)
                .ok_or_else(|| Error::InvalidInput("missing mu column".into()))?
                .trim()
                .parse()
                .map_err(|e| Error::InvalidInput(format!("bad mu value: {e}")))?;
            values.push(v);
        }
        Self::new(values, provenance)
    }
}

/// Piecewise-linear interpolation of the cutoff sums; σ_λ = λμ_0 for λ ≤ 1.
pub fn sigma(series: &SingularSeries, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidInput(format!("σ_λ needs λ > 0, got {lambda}")));
    }
    if lambda > series.len() as f64 && series.provenance == Provenance::Analytic {
        return Err(Error::BeyondSeries { lambda, len: series.len() });
    }
    if lambda <= 1.0 {
        return Ok(lambda * series.value(0));
    }
    let n = lambda.floor() as usize;
    let t = lambda - n as f64;
    Ok(series.sigma_int(n) + t * series.value(n))
}

const GAUSS_NODES: [f64; 5] =
    [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GAUSS_WEIGHTS: [f64; 5] =
    [0.236_926_885_056_189_1, 0.478_628_670_499_366_5, 0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];

/// ∫_a^b du / log u for e ≤ a ≤ b by five-point Gauss–Legendre.
fn inv_log_integral(a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    GAUSS_NODES.iter().zip(GAUSS_WEIGHTS).map(|(x, w)| w / (mid + half * x).ln()).sum::<f64>() * half
}

/// ∫_a^b σ_u / (u log u) du over a stretch where σ_u = base + slope·u.
fn segment_integral(base: f64, slope: f64, a: f64, b: f64) -> f64 {
    base * (b.ln().ln() - a.ln().ln()) + slope * inv_log_integral(a, b)
}

/// Cumulative ∫_e^n σ_u/(u log u) du at integers n, for fast τ_λ evaluation.
#[derive(Debug, Clone)]
pub struct TauTable {
    series_len: usize,
    cumulative: Vec<f64>,
    values: Vec<f64>,
    prefix_at: Vec<f64>,
}

impl TauTable {
    pub fn new(series: &SingularSeries) -> Self {
        let n_max = series.len().max(3);
        let mut cumulative = vec![0.0; n_max + 1];
        let piece = |n: usize, a: f64, b: f64| {
            let mu = series.value(n);
            segment_integral(series.sigma_int(n) - n as f64 * mu, mu, a, b)
        };
        cumulative[3] = piece(2, E, 3.0);
        for n in 3..n_max {
            cumulative[n + 1] = cumulative[n] + piece(n, n as f64, n as f64 + 1.0);
        }
        let values = (0..=n_max).map(|k| series.value(k)).collect();
        let prefix_at = (0..=n_max).map(|k| series.sigma_int(k)).collect();
        Self { series_len: series.len(), cumulative, values, prefix_at }
    }

    /// τ_λ = (1/log λ) ∫_e^λ σ_u/(u log u) du for e < λ ≤ N_max.
    pub fn tau(&self, lambda: f64) -> Result<f64> {
        if lambda.is_nan() || lambda <= E {
            return Err(Error::InvalidInput(format!("τ_λ needs λ > e, got {lambda}")));
        }
        if lambda > self.series_len.max(3) as f64 {
            return Err(Error::BeyondSeries { lambda, len: self.series_len });
        }
        let n = lambda.floor() as usize;
        let mu = self.values[n];
        let base = self.prefix_at[n] - n as f64 * mu;
        let integral = if n < 3 {
            segment_integral(base, mu, E, lambda)
        } else {
            self.cumulative[n] + segment_integral(base, mu, n as f64, lambda)
        };
        Ok(integral / lambda.ln())
    }
}

/// Single τ_λ evaluation; builds the cumulative table.
pub fn tau(series: &SingularSeries, lambda: f64) -> Result<f64> {
    TauTable::new(series).tau(lambda)
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Least squares of σ_N against log N at geometrically spaced N in [lo, hi].
pub fn log_slope(series: &SingularSeries, lo: usize, hi: usize) -> Result<SlopeFit> {
    const SAMPLES: usize = 256;
    let lo = lo.max(1);
    if hi <= lo {
        return Err(Error::InsufficientTerms { got: hi, need: lo + 1 });
    }
    let ratio = hi as f64 / lo as f64;
    let mut ns: Vec<usize> =
        (0..SAMPLES).map(|j| (lo as f64 * ratio.powf(j as f64 / (SAMPLES - 1) as f64)).round() as usize).collect();
    ns.dedup();
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns.iter().map(|&n| series.sigma_int(n)).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if xs.len() > 2 { (rss / (m - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(SlopeFit { slope, intercept, stderr, points: xs.len() })
}

#[derive(Debug, Clone, Serialize)]
pub struct DixmierEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub window: (usize, usize),
    /// Slope over the upper half of the log window divided by the lower half.
    pub half_window_ratio: f64,
    /// (λ, τ_λ) on a geometric grid.
    pub tau_curve: Vec<(f64, f64)>,
    /// max − min of τ_λ over the window.
    pub tau_oscillation: f64,
    /// τ_λ at the largest λ.
    pub tau_tail: f64,
}

pub const MIN_TERMS: usize = 1000;

/// Regression slope over [√N, N] with a τ_λ curve for the measurability diagnostic.
pub fn nc_integral(series: &SingularSeries) -> Result<DixmierEstimate> {
    let n = series.len();
    if n < MIN_TERMS {
        return Err(Error::InsufficientTerms { got: n, need: MIN_TERMS });
    }
    let lo = (n as f64).sqrt().ceil() as usize;
    let mid = (n as f64).powf(0.75).round() as usize;
    let fit = log_slope(series, lo, n)?;
    let lower = log_slope(series, lo, mid)?;
    let upper = log_slope(series, mid, n)?;
    let half_window_ratio = if lower.slope > 0.0 { upper.slope / lower.slope } else { f64::NAN };
    let divergent = fit.slope > 2.0 * fit.stderr && fit.slope > 0.0 && (0.5..=2.0).contains(&half_window_ratio);
    if !divergent {
        return Err(Error::NotLogDivergent { slope: fit.slope, stderr: fit.stderr });
    }
    let table = TauTable::new(series);
    let (l0, l1) = (E * E, n as f64);
    let tau_curve: Vec<(f64, f64)> = (0..64)
        .map(|j| {
            let lambda = l0 * (l1 / l0).powf(j as f64 / 63.0);
            let lambda = lambda.min(l1);
            (lambda, table.tau(lambda).unwrap_or(f64::NAN))
        })
        .collect();
    let in_window: Vec<f64> = tau_curve.iter().filter(|(l, _)| *l >= lo as f64).map(|(_, t)| *t).collect();
    let tau_oscillation =
        in_window.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - in_window.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DixmierEstimate {
        slope: fit.slope,
        stderr: fit.stderr,
        window: (lo, n),
        half_window_ratio,
        tau_tail: tau_curve.last().map_or(f64::NAN, |p| p.1),
        tau_curve,
        tau_oscillation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralVerdict {
    LogDivergent,
    NotLogDivergent,
}

/// Summary document of `nc_integral`; a non-divergent series yields a report rather than an error.
#[derive(Debug, Clone, Serialize)]
pub struct IntegralReport {
    pub slope: f64,
    pub stderr: f64,
    pub window: (usize, usize),
    pub tau_tail: Option<f64>,
    pub verdict: IntegralVerdict,
}

impl IntegralReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }
}

pub fn integral_report(series: &SingularSeries) -> Result<IntegralReport> {
    match nc_integral(series) {
        Ok(est) => Ok(IntegralReport {
            slope: est.slope,
            stderr: est.stderr,
            window: est.window,
            tau_tail: Some(est.tau_tail),
            verdict: IntegralVerdict::LogDivergent,
        }),
        Err(Error::NotLogDivergent { slope, stderr }) => Ok(IntegralReport {
            slope,
            stderr,
            window: ((series.len() as f64).sqrt().ceil() as usize, series.len()),
            tau_tail: None,
            verdict: IntegralVerdict::NotLogDivergent,
        }),
        Err(e) => Err(e),
    }
}

/// Each value repeated `group_order` times: the series of diag(T, …, T).
pub fn lift_series(series: &SingularSeries, group_order: usize) -> Result<SingularSeries> {
    if group_order == 0 {
        return Err(Error::InvalidInput("group order must be at least 1".into()));
    }
    let values = series.values.iter().flat_map(|&v| std::iter::repeat_n(v, group_order)).collect();
    Ok(SingularSeries::new_sorted(values, series.provenance))
}

/// |D|^{-1} on the circle: 1/|k| for k ≠ 0, each twice, first `terms` values.
pub fn circle_series(terms: usize) -> SingularSeries {
    let values = (0..terms).map(|i| 1.0 / (i / 2 + 1) as f64).collect();
    SingularSeries::new_sorted(values, Provenance::Analytic)
}

/// D^{-2} of the flat torus with modular parameter τ, complete part of the lattice up to `cutoff`.
pub fn torus_series(tau: C64, cutoff: usize) -> Result<SingularSeries> {
    Ok(torus::dirac_spectrum(tau, cutoff)?.inverse_power_series(2.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutativeReport {
    pub case: String,
    /// m!(2π)^m for even dimension 2m, (2m+1)!! π^{m+1} for odd dimension 2m+1.
    pub constant: f64,
    pub integral: f64,
    pub volume_estimate: f64,
    pub expected_volume: f64,
    pub rel_error: f64,
}

pub enum CommutativeCase {
    /// Unit circle, series length.
    Circle { terms: usize },
    /// Flat torus, normalized area 1/Im τ.
    Torus { tau: C64, cutoff: usize },
}

pub fn commutative_check(case: &CommutativeCase) -> Result<CommutativeReport> {
    use std::f64::consts::PI;
    let (name, constant, series, expected) = match *case {
        CommutativeCase::Circle { terms } => ("circle".to_string(), PI, circle_series(terms), 2.0 * PI),
        CommutativeCase::Torus { tau, cutoff } => {
            (format!("torus tau={}{:+}i", tau.re, tau.im), 2.0 * PI, torus_series(tau, cutoff)?, 1.0 / tau.im)
        }
    };
    let est = nc_integral(&series)?;
    let volume_estimate = constant * est.slope;
    Ok(CommutativeReport {
        case: name,
        constant,
        integral: est.slope,
        volume_estimate,
        expected_volume: expected,
        rel_error: (volume_estimate - expected).abs() / expected,
    })
}
