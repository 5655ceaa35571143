//! The Airy function `Ai` on the real line and its negative zeros.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{invalid, Error, Result};

/// `Ai(0)` and `-Ai'(0)`.
const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = 0.258_819_403_792_806_8;

const SERIES_LIMIT: f64 = 8.0;
/// On the decaying side the series cancels badly; past this point the
/// asymptotic expansion is more accurate.
const SERIES_LIMIT_POSITIVE: f64 = 5.5;

/// `Ai(x)`: Maclaurin series for `-8 <= x <= 5.5`, asymptotic expansions beyond.
pub fn airy_ai(x: f64) -> f64 {
    if (-SERIES_LIMIT..=SERIES_LIMIT_POSITIVE).contains(&x) {
        ai_series(x)
    } else if x > 0.0 {
        ai_asymptotic_positive(x)
    } else {
        ai_asymptotic_negative(-x)
    }
}

/// `Ai = c1 f - c2 g` with `f = sum 3^k (1/3)_k x^{3k}/(3k)!` and
/// `g = sum 3^k (2/3)_k x^{3k+1}/(3k+1)!`.
fn ai_series(x: f64) -> f64 {
    let x3 = x * x * x;
    let (mut f, mut g) = (1.0, x);
    let (mut tf, mut tg) = (1.0, x);
    // Compensated summation keeps the cancellation error near one ulp of
    // the largest term.
    let (mut cf, mut cg) = (0.0, 0.0);
    for k in 0..200 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        tg *= x3 / ((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        kahan_add(&mut f, &mut cf, tf);
        kahan_add(&mut g, &mut cg, tg);
        if tf.abs() < 1e-18 * f.abs().max(1.0) && tg.abs() < 1e-18 * g.abs().max(1.0) {
            break;
        }
    }
    AI0 * (f + cf) - AIP0 * (g + cg)
}

fn kahan_add(sum: &mut f64, comp: &mut f64, term: f64) {
    let y = term - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

fn u_coefficients(count: usize) -> Vec<f64> {
    let mut u = vec![1.0];
    for k in 1..count {
        let kf = k as f64;
        let prev = u[k - 1];
        u.push(prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf));
    }
    u
}

fn ai_asymptotic_positive(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let u = u_coefficients(30);
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for (k, uk) in u.iter().enumerate() {
        let term = uk / zeta.powi(k as i32);
        if term > last {
            break;
        }
        last = term;
        sum += if k % 2 == 0 { term } else { -term };
    }
    (-zeta).exp() / (2.0 * PI.sqrt() * x.powf(0.25)) * sum
}

fn ai_asymptotic_negative(z: f64) -> f64 {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let u = u_coefficients(40);
    let (mut p, mut q) = (0.0, 0.0);
    let mut last = f64::INFINITY;
    for (k, uk) in u.iter().enumerate() {
        let term = uk / zeta.powi(k as i32);
        if term > last {
            break;
        }
        last = term;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
    }
    let phase = zeta - FRAC_PI_4;
    (phase.cos() * p + phase.sin() * q) / (PI.sqrt() * z.powf(0.25))
}

/// The `m`-th negative zero `a_m` of `Ai` (`a_1 > a_2 > ...`), by bracketing
/// around the large-`m` estimate and bisection.
pub fn airy_negative_zero(m: usize) -> Result<f64> {
    if m == 0 {
        return invalid("Airy zero index starts at 1");
    }
    let t = 3.0 * PI * (4.0 * m as f64 - 1.0) / 8.0;
    let guess = -t.powf(2.0 / 3.0) * (1.0 + 5.0 / 48.0 / (t * t) - 5.0 / 36.0 / t.powi(4));
    let half_gap = 0.25 * PI / guess.abs().sqrt();
    let (mut lo, mut hi) = (guess - half_gap, guess + half_gap);
    let (mut flo, fhi) = (airy_ai(lo), airy_ai(hi));
    if flo * fhi > 0.0 {
        return Err(Error::NonConvergence {
            what: format!("bracketing Airy zero {m}"),
            first: flo,
            second: fhi,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = airy_ai(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
