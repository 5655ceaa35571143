//! Bessel functions `J_0` and `I_0` (and the exponentially scaled `I_0`).

use std::f64::consts::{FRAC_PI_4, PI};

/// `J_0(s)`.
pub fn bessel_j0(s: f64) -> f64 {
    let x = s.abs();
    if x <= 4.0 {
        j0_series(x)
    } else if x <= 60.0 {
        j0_miller(x)
    } else {
        j0_hankel(x)
    }
}

fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Backward recurrence normalized by `J_0 + 2 sum_k J_{2k} = 1`.
fn j0_miller(x: f64) -> f64 {
    let start = 2 * ((x + 50.0) as usize / 2 + 1);
    let (mut above, mut cur) = (0.0f64, 1e-280f64);
    let mut even_sum = 0.0;
    for k in (1..=start).rev() {
        // cur = J_k, above = J_{k+1}; step down to J_{k-1}.
        let below = 2.0 * k as f64 / x * cur - above;
        above = cur;
        cur = below;
        let idx = k - 1;
        if idx > 0 && idx % 2 == 0 {
            even_sum += cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            above *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    cur / (cur + 2.0 * even_sum)
}

fn j0_hankel(x: f64) -> f64 {
    let (mut p, mut q) = (0.0, 0.0);
    let mut b = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..40 {
        if k > 0 {
            let kf = k as f64;
            b *= -(2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
        }
        if b.abs() > last {
            break;
        }
        last = b.abs();
        // P = sum (-1)^j b_{2j}, Q = sum (-1)^j b_{2j+1}
        let j = k / 2;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * b;
        } else {
            q += sign * b;
        }
        if b.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `I_0(s)`. Overflows to infinity beyond `|s| ~ 713`; prefer
/// [`bessel_i0_scaled`] for large arguments.
pub fn bessel_i0(s: f64) -> f64 {
    let x = s.abs();
    if x <= 30.0 {
        i0_series(x)
    } else {
        bessel_i0_scaled(x) * x.exp()
    }
}

/// `e^{-|s|} I_0(s)`.
pub fn bessel_i0_scaled(s: f64) -> f64 {
    let x = s.abs();
    if x <= 30.0 {
        return i0_series(x) * (-x).exp();
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = term * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
        if next > term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    /// (1/2pi) int_0^{2pi} e^{-i s sin t} dt by the trapezoid rule; the real
    /// part is (1/2pi) int cos(s sin t) dt.
    fn j0_trapezoid(s: f64, points: usize) -> f64 {
        let h = 2.0 * PI / points as f64;
        (0..points).map(|k| (s * (k as f64 * h).sin()).cos()).sum::<f64>() / points as f64
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert_eq!(bessel_i0(0.0), 1.0);
    }

    #[test]
    fn j0_matches_angular_quadrature() {
        for s in [1.0, 5.0, 20.0] {
            let a = bessel_j0(s);
            let b = j0_trapezoid(s, 512);
            assert!((a - b).abs() < 1e-10, "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn j0_reference_values() {
        // 20-digit reference values.
        let cases = [
            (1.0, 0.765_197_686_557_966_55),
            (5.0, -0.177_596_771_314_338_30),
            (20.0, 0.167_024_664_340_583_15),
            (37.5, 0.071_722_705_110_602_229),
        ];
        for (s, want) in cases {
            let got = bessel_j0(s);
            assert!(((got - want) / want).abs() < 1e-12, "s={s}: {got} vs {want}");
        }
    }

    #[test]
    fn j0_branches_agree_at_switch_points() {
        for x in [4.0, 60.0] {
            let a = j0_miller(x);
            let b = if x == 4.0 { j0_series(x) } else { j0_hankel(x) };
            assert!((a - b).abs() < 1e-14, "x={x}");
        }
        for x in [45.0, 55.0, 100.0] {
            assert!((j0_trapezoid(x, 1024) - bessel_j0(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn i0_reference_values() {
        let cases = [
            (0.5, 1.063_483_370_741_323_5),
            (10.0, 2_815.716_628_466_254_5),
            (40.0, 1.489_477_479_341_990e16),
        ];
        for (s, want) in cases {
            let got = bessel_i0(s);
            assert!(((got - want) / want).abs() < 1e-12, "s={s}: {got} vs {want}");
        }
        let e2 = (-2.0f64).exp() * bessel_i0(2.0);
        assert!((e2 - 0.308_508_322_553_671_04).abs() < 1e-15);
    }

    #[test]
    fn i0_monotone_and_at_least_one() {
        let mut last = 0.0;
        for k in 0..400 {
            let s = 0.1 * k as f64;
            let v = bessel_i0(s);
            assert!(v >= 1.0 && v >= last);
            last = v;
        }
    }

    #[test]
    fn scaled_i0_continuous_across_switch() {
        let a = bessel_i0_scaled(30.0);
        let b = bessel_i0_scaled(30.0 + 1e-12);
        assert!(((a - b) / a).abs() < 1e-12);
        assert!(bessel_i0_scaled(1e5).is_finite());
    }
}
