//! Exponential decay in the straight arm.
//!
//! In the arm frame the straight part is the half-strip `(0, inf) x (0, pi)`, where an
//! eigenfunction with eigenvalue `lambda < 1` is the separated series
//! `sum_k exp(-x sqrt(k^2 - lambda)) g_k v_k(y)`, `v_k = sqrt(2/pi) sin(k y)`, built from
//! its trace `g` on the segment `x = 0`. The slowest mode decays at `sqrt(1 - lambda)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::quadrature::gauss_legendre;
use crate::fem::Discretization;
use crate::geometry::{arm_length, from_arm_frame};

pub const DEFAULT_MODES: usize = 50;

/// Points per cross-section in [`slice_norm`].
pub const SLICE_POINTS: usize = 64;

/// `sqrt(2/pi) sin(k y)`.
pub fn mode(k: usize, y: f64) -> f64 {
    (2.0 / PI).sqrt() * (k as f64 * y).sin()
}

/// Sine coefficients `g_1..g_K` of a trace on `(0, pi)`, with the eigenvalue they belong to.
#[derive(Clone, Debug, PartialEq)]
pub struct ModalTrace {
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    /// `int_0^pi g^2` of the full trace, which bounds `sum_k g_k^2` over all modes.
    pub norm2: f64,
}

impl ModalTrace {
    pub fn modes(&self) -> usize {
        self.coefficients.len()
    }

    /// `sum g_k^2`, the squared `L^2` norm of the truncated trace.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|g| g * g).sum()
    }

    /// `sum_{k > K/2} k g_k^2 / sum_k k g_k^2`; small when `K` resolves the trace.
    pub fn tail_fraction(&self) -> f64 {
        let weighted = |range: std::ops::Range<usize>| -> f64 {
            range.map(|i| (i + 1) as f64 * self.coefficients[i].powi(2)).sum()
        };
        let total = weighted(0..self.modes());
        if total == 0.0 {
            return 0.0;
        }
        weighted(self.modes() / 2..self.modes()) / total
    }

    /// Evaluates the half-strip solution at `(x, y)`, `x >= 0`.
    pub fn halfstrip_solution(&self, x: f64, y: f64) -> Result<f64> {
        self.check_decaying()?;
        if x < 0.0 {
            return Err(Error::InvalidParameter(format!("half-strip abscissa {x} is negative")));
        }
        Ok(self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let k = (i + 1) as f64;
                (-x * (k * k - self.lambda).sqrt()).exp() * g * mode(i + 1, y)
            })
            .sum())
    }

    /// Bound on the squared `L^2(0, pi)` norm at `x` of the modes beyond `K`:
    /// `exp(-2 x sqrt(K^2 - lambda)) |g|^2`.
    pub fn tail_bound(&self, x: f64) -> f64 {
        let k = self.modes() as f64;
        (-2.0 * x * (k * k - self.lambda).sqrt()).exp() * self.norm2
    }

    fn check_decaying(&self) -> Result<()> {
        if self.lambda >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue {} is not below the threshold 1: no decay",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Sine coefficients from samples `g(i pi / n)`, `i = 0..=n`, by the trapezoidal rule
/// (a discrete sine transform). Needs `n >= 4K`; under-sampling is flagged when
/// halving the sample set changes any coefficient by more than `1e-4` of the trace size.
pub fn trace_coefficients(samples: &[f64], modes: usize, lambda: f64) -> Result<ModalTrace> {
    let n = samples.len().saturating_sub(1);
    if modes == 0 || n < 4 * modes {
        return Err(Error::InvalidParameter(format!(
            "{} samples cannot resolve {modes} modes (need at least {})",
            samples.len(),
            4 * modes + 1
        )));
    }
    let transform = |stride: usize| -> Vec<f64> {
        let m = n / stride;
        let h = PI / m as f64;
        (1..=modes)
            .map(|k| (1..m).map(|i| samples[i * stride] * mode(k, i as f64 * h)).sum::<f64>() * h)
            .collect()
    };
    let coefficients = transform(1);
    let norm2 = samples[1..n].iter().map(|g| g * g).sum::<f64>() * PI / n as f64;
    if n.is_multiple_of(2) && n / 2 >= 2 * modes {
        let coarse = transform(2);
        let scale = coefficients.iter().map(|g| g * g).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let worst = coefficients.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if worst > 1e-4 * scale {
            return Err(Error::Unresolved(format!(
                "trace under-sampled: coefficients move by {worst:.3e} when half the samples are used"
            )));
        }
    }
    Ok(ModalTrace { coefficients, lambda, norm2 })
}

/// Samples `g` at `16K + 1` uniform points and transforms.
pub fn trace_of(g: impl Fn(f64) -> Result<f64>, modes: usize, lambda: f64) -> Result<ModalTrace> {
    let n = 16 * modes;
    let samples = (0..=n).map(|i| g(i as f64 * PI / n as f64)).collect::<Result<Vec<_>>>()?;
    trace_coefficients(&samples, modes, lambda)
}

/// `(int_0^pi f(x, y)^2 dy)^{1/2}` with a 64-point Gauss rule.
pub fn slice_norm(field: impl Fn(f64, f64) -> Result<f64>, x: f64) -> Result<f64> {
    let (t, w) = gauss_legendre(SLICE_POINTS);
    let mut sum = 0.0;
    for (t, w) in t.iter().zip(&w) {
        let y = 0.5 * PI * (t + 1.0);
        sum += 0.5 * PI * w * field(x, y)?.powi(2);
    }
    Ok(sum.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    /// Fitted `mu` in `N(x) ~ C exp(-mu x)`.
    pub rate: f64,
    pub log_amplitude: f64,
    /// Root-mean-square residual of `log N`.
    pub residual: f64,
    /// `(x_i, N(x_i))` pairs used in the fit.
    pub slices: Vec<(f64, f64)>,
}

/// Least-squares fit of `log N(x)` against `x` over the given slice positions.
pub fn fit_decay_rate(field: impl Fn(f64, f64) -> Result<f64>, positions: &[f64]) -> Result<DecayFit> {
    let slices = positions
        .iter()
        .map(|&x| Ok((x, slice_norm(&field, x)?)))
        .collect::<Result<Vec<_>>>()?;
    let usable: Vec<(f64, f64)> = slices.iter().copied().filter(|&(_, n)| n > 0.0 && n.is_finite()).collect();
    if usable.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "decay fit needs at least 4 usable slices, got {}",
            usable.len()
        )));
    }
    let m = usable.len() as f64;
    let mx = usable.iter().map(|s| s.0).sum::<f64>() / m;
    let my = usable.iter().map(|s| s.1.ln()).sum::<f64>() / m;
    let sxx: f64 = usable.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|s| (s.0 - mx) * (s.1.ln() - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual =
        (usable.iter().map(|s| (s.1.ln() - intercept - slope * s.0).powi(2)).sum::<f64>() / m).sqrt();
    if residual > 0.1 {
        return Err(Error::Unresolved(format!(
            "decay fit residual {residual:.3} exceeds 10%: slices are contaminated"
        )));
    }
    Ok(DecayFit { rate: -slope, log_amplitude: intercept, residual, slices: usable })
}

/// Fit window `[max(pi, margin), arm - margin]` sampled at `count` equispaced slices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayWindow {
    pub margin: f64,
    pub count: usize,
}

impl Default for DecayWindow {
    fn default() -> Self {
        DecayWindow { margin: PI, count: 24 }
    }
}

impl DecayWindow {
    pub fn positions(&self, arm: f64) -> Result<Vec<f64>> {
        let (a, b) = (self.margin.max(PI), arm - self.margin);
        if !(b > a) || self.count < 2 {
            return Err(Error::InvalidParameter(format!(
                "empty decay window [{a}, {b}] for an arm of length {arm}"
            )));
        }
        Ok((0..self.count).map(|i| a + (b - a) * i as f64 / (self.count - 1) as f64).collect())
    }
}

/// One row of the decay table.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub theta: f64,
    pub lambda: f64,
    pub predicted_rate: f64,
    pub fit: DecayFit,
}

impl DecayReport {
    pub fn fitted_rate(&self) -> f64 {
        self.fit.rate
    }

    pub fn n_slices(&self) -> usize {
        self.fit.slices.len()
    }
}

/// Decay of a computed eigenvector, measured in the arm frame of its formulation.
pub fn fem_decay(disc: &Discretization, vector: &[f64], lambda: f64, window: &DecayWindow) -> Result<DecayReport> {
    if lambda >= 1.0 {
        return Err(Error::InvalidParameter(format!("eigenvalue {lambda} >= 1 has no decay")));
    }
    let spec = disc.spec;
    let f = disc.function(vector);
    let field = |x: f64, y: f64| f.value(from_arm_frame(spec.formulation, spec.theta, [x, y]));
    let fit = fit_decay_rate(field, &window.positions(arm_length(&spec))?)?;
    Ok(DecayReport { theta: spec.theta, lambda, predicted_rate: (1.0 - lambda).sqrt(), fit })
}

/// Trace of a computed eigenvector on the segment `x = 0` of the arm frame.
pub fn fem_trace(disc: &Discretization, vector: &[f64], lambda: f64, modes: usize) -> Result<ModalTrace> {
    let spec = disc.spec;
    let f = disc.function(vector);
    trace_of(|y| f.value(from_arm_frame(spec.formulation, spec.theta, [0.0, y])), modes, lambda)
}
