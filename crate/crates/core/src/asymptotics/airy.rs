//! The Airy function `Ai` and its derivative, and the zeros of `A(X) = Ai(-X)`.
//!
//! For `|x| <= 8` the Maclaurin series is summed in double-double arithmetic, which
//! absorbs the cancellation between the two series; beyond that the standard
//! Poincare-type asymptotic expansions are used.

use std::f64::consts::{FRAC_PI_4, PI};
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Switch point between the series and the asymptotic expansions.
pub const SERIES_LIMIT: f64 = 8.0;

/// Largest zero index served by [`airy_zero`].
pub const MAX_ZERO_INDEX: usize = 1000;

// Ai(0) and -Ai'(0) as unevaluated sums hi + lo.
const AI0: Dd = Dd { hi: 0.355_028_053_887_817_2, lo: 2.052_336_324_362_12e-17 };
const DAI0: Dd = Dd { hi: 0.258_819_403_792_806_8, lo: -2.522_243_111_610_832e-17 };

/// Double-double number `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn normalized(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Dd::normalized(p, e + self.lo * b)
    }

    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Dd::from_f64(b).mul_f64(q1);
        let q2 = r.hi / b;
        Dd::normalized(q1, q2)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd::normalized(s, e + self.lo + o.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + Dd { hi: -o.hi, lo: -o.lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::normalized(p, e + self.hi * o.lo + self.lo * o.hi)
    }
}

/// `(Ai(x), Ai'(x))` from the Maclaurin series; accurate for `|x| <= 8`.
pub fn airy_series(x: f64) -> (f64, f64) {
    let xd = Dd::from_f64(x);
    let x3 = xd * xd * xd;
    // f = sum a_k x^{3k}, g = sum b_k x^{3k+1}, with their derivatives
    let mut f_term = Dd::from_f64(1.0);
    let mut g_term = xd;
    let mut df_term = (xd * xd).div_f64(2.0);
    let mut dg_term = Dd::from_f64(1.0);
    let (mut f, mut g) = (f_term, g_term);
    let (mut df, mut dg) = (df_term, dg_term);
    for k in 1..400 {
        let kf = k as f64;
        f_term = (f_term * x3).div_f64((3.0 * kf - 1.0) * (3.0 * kf));
        g_term = (g_term * x3).div_f64((3.0 * kf) * (3.0 * kf + 1.0));
        dg_term = (dg_term * x3).div_f64((3.0 * kf) * (3.0 * kf - 2.0));
        if k >= 2 {
            df_term = (df_term * x3).div_f64((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            df = df + df_term;
        }
        f = f + f_term;
        g = g + g_term;
        dg = dg + dg_term;
        let scale = f.hi.abs() + g.hi.abs() + df.hi.abs() + dg.hi.abs();
        let last = f_term.hi.abs() + g_term.hi.abs() + df_term.hi.abs() + dg_term.hi.abs();
        if k > 3 && last <= 1e-34 * scale {
            break;
        }
    }
    let ai = AI0 * f - DAI0 * g;
    let dai = AI0 * df - DAI0 * dg;
    (ai.to_f64(), dai.to_f64())
}

/// Coefficients `u_k` and `v_k` of the large-argument expansions.
fn uv_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

/// `(Ai(x), Ai'(x))` from the asymptotic expansions; accurate for `|x| >= 8`.
pub fn airy_asymptotic(x: f64) -> (f64, f64) {
    let z = x.abs();
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let (u, v) = uv_coefficients(40);
    // truncate just before the smallest term of the divergent series
    let mut n = 1;
    while n + 1 < u.len() && u[n + 1] / zeta.powi(n as i32 + 1) < u[n] / zeta.powi(n as i32) {
        n += 1;
    }
    let sqrt_pi = PI.sqrt();
    if x > 0.0 {
        let (mut su, mut sv) = (0.0, 0.0);
        for k in (0..=n).rev() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            su += sign * u[k] / zeta.powi(k as i32);
            sv += sign * v[k] / zeta.powi(k as i32);
        }
        let e = (-zeta).exp();
        (e / (2.0 * sqrt_pi * z.powf(0.25)) * su, -z.powf(0.25) * e / (2.0 * sqrt_pi) * sv)
    } else {
        let (mut pu, mut qu, mut pv, mut qv) = (0.0, 0.0, 0.0, 0.0);
        for k in (0..=n).rev() {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let t = zeta.powi(k as i32);
            if k % 2 == 0 {
                pu += sign * u[k] / t;
                pv += sign * v[k] / t;
            } else {
                qu += sign * u[k] / t;
                qv += sign * v[k] / t;
            }
        }
        let phase = zeta - FRAC_PI_4;
        let (s, c) = phase.sin_cos();
        let ai = z.powf(-0.25) / sqrt_pi * (c * pu + s * qu);
        let dai = z.powf(0.25) / sqrt_pi * (s * pv - c * qv);
        (ai, dai)
    }
}

/// `(Ai(x), Ai'(x))`.
pub fn airy(x: f64) -> (f64, f64) {
    if x.abs() <= SERIES_LIMIT {
        airy_series(x)
    } else {
        airy_asymptotic(x)
    }
}

pub fn airy_ai(x: f64) -> f64 {
    airy(x).0
}

pub fn airy_ai_prime(x: f64) -> f64 {
    airy(x).1
}

/// The `j`-th positive zero of `A(X) = Ai(-X)`, by Newton iteration from the asymptotic guess.
pub fn airy_zero(j: usize) -> Result<f64> {
    if j == 0 || j > MAX_ZERO_INDEX {
        return Err(Error::InvalidParameter(format!(
            "Airy zero index {j} outside 1..={MAX_ZERO_INDEX}"
        )));
    }
    let t = 3.0 * PI * (4.0 * j as f64 - 1.0) / 8.0;
    let t2 = t * t;
    let mut z = t.powf(2.0 / 3.0)
        * (1.0 + 5.0 / 48.0 / t2 - 5.0 / 36.0 / (t2 * t2) + 77125.0 / 82944.0 / (t2 * t2 * t2));
    for _ in 0..50 {
        let (ai, dai) = airy(-z);
        // d/dX Ai(-X) = -Ai'(-X)
        let step = ai / -dai;
        z -= step;
        if step.abs() <= 1e-15 * z {
            break;
        }
    }
    Ok(z)
}

/// Cached zeros `z_A(1..=j_max)`.
#[derive(Clone, Debug)]
pub struct AiryZeroTable {
    pub zeros: Vec<f64>,
}

impl AiryZeroTable {
    pub fn new(j_max: usize) -> Result<Self> {
        let zeros = (1..=j_max).map(airy_zero).collect::<Result<_>>()?;
        Ok(AiryZeroTable { zeros })
    }

    pub fn get(&self, j: usize) -> Result<f64> {
        j.checked_sub(1)
            .and_then(|i| self.zeros.get(i).copied())
            .ok_or_else(|| Error::InvalidParameter(format!("zero index {j} beyond the table")))
    }
}
