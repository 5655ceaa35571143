//! Zeros of `L_n`, their edge and bulk distribution laws, and the shape
//! analysis of the kernel `psi_n`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use super::airy::airy_negative_zero;
use super::laguerre::{psi_derivative, psi_eval, weighted_laguerre_pair, SemiclassicalPoint};
use crate::error::{invalid, Error, Result};
use crate::linalg::tridiagonal_eigenvalues;

/// Zeros `lambda_{n,1} < ... < lambda_{n,n}` of `L_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaguerreZeroSet {
    pub n: usize,
    pub zeros: Vec<f64>,
}

impl LaguerreZeroSet {
    /// Right end `nu = 4n + 2` of the oscillatory region.
    pub fn nu(&self) -> f64 {
        4.0 * self.n as f64 + 2.0
    }

    /// `lambda_{n,k}` with 1-based `k`.
    pub fn zero(&self, k: usize) -> f64 {
        self.zeros[k - 1]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,zero\n");
        for (k, z) in self.zeros.iter().enumerate() {
            let _ = writeln!(s, "{},{:.17e}", k + 1, z);
        }
        s
    }
}

/// Eigenvalues of the Laguerre Jacobi matrix, polished by Newton steps on `L_n`.
pub fn laguerre_zeros(n: usize) -> Result<LaguerreZeroSet> {
    if n == 0 {
        return invalid("Laguerre degree must be at least 1");
    }
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + 1.0).collect();
    let off: Vec<f64> = (1..n).map(|k| k as f64).collect();
    let mut zeros = tridiagonal_eigenvalues(&diag, &off)?;
    if zeros.len() != n {
        return Err(Error::Eigensolver(format!("expected {n} zeros, got {}", zeros.len())));
    }
    for i in 0..n {
        let lo = if i == 0 { 0.0 } else { 0.5 * (zeros[i - 1] + zeros[i]) };
        let hi = if i + 1 == n { f64::INFINITY } else { 0.5 * (zeros[i] + zeros[i + 1]) };
        let mut x = zeros[i];
        for _ in 0..3 {
            let (wn, wm) = weighted_laguerre_pair(n, x);
            let denom = n as f64 * (wn - wm);
            if denom == 0.0 {
                break;
            }
            let next = x - x * wn / denom;
            if !(next > lo && next < hi) {
                break;
            }
            let done = (next - x).abs() <= 4.0 * f64::EPSILON * x;
            x = next;
            if done {
                break;
            }
        }
        zeros[i] = x;
    }
    let set = LaguerreZeroSet { n, zeros };
    let nu = set.nu();
    let ordered = set.zeros.windows(2).all(|w| w[0] < w[1]);
    if !ordered || set.zeros[0] <= 0.0 || set.zeros[n - 1] >= nu {
        return Err(Error::Consistency(format!("zeros of L_{n} leave (0, {nu}) or are not simple")));
    }
    Ok(set)
}

/// `(1/n) #{k : lambda_{n,k} <= 4 n x}`.
pub fn zero_counting_cdf(zeros: &LaguerreZeroSet, x: f64) -> f64 {
    let cut = 4.0 * zeros.n as f64 * x;
    let count = zeros.zeros.partition_point(|&z| z <= cut);
    count as f64 / zeros.n as f64
}

/// `(2/pi) int_0^x t^{-1/2} (1-t)^{1/2} dt = (2/pi)(asin sqrt x + sqrt(x(1-x)))`.
pub fn zero_counting_limit(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    2.0 / PI * (x.sqrt().asin() + (x * (1.0 - x)).sqrt())
}

/// Largest gap between the empirical and limiting counting functions over a
/// uniform grid of `points` abscissae in `[0, 1]`, probing both sides of
/// every grid point so the jumps are seen.
pub fn zero_counting_sup_gap(zeros: &LaguerreZeroSet, points: usize) -> f64 {
    let mut gap: f64 = 0.0;
    let n4 = 4.0 * zeros.n as f64;
    for i in 0..=points {
        let x = i as f64 / points as f64;
        gap = gap.max((zero_counting_cdf(zeros, x) - zero_counting_limit(x)).abs());
    }
    for (k, z) in zeros.zeros.iter().enumerate() {
        let x = z / n4;
        if x <= 1.0 {
            let lim = zero_counting_limit(x);
            let below = k as f64 / zeros.n as f64;
            let above = (k + 1) as f64 / zeros.n as f64;
            gap = gap.max((below - lim).abs()).max((above - lim).abs());
        }
    }
    gap
}

/// Edge approximation `nu + 2^{2/3} a_m nu^{1/3} + (1/5) 2^{4/3} a_m^2 nu^{-1/3}`.
pub fn edge_zero_prediction(n: usize, m: usize) -> Result<f64> {
    let a = airy_negative_zero(m)?;
    let nu = 4.0 * n as f64 + 2.0;
    Ok(nu + 2f64.powf(2.0 / 3.0) * a * nu.cbrt() + 0.2 * 2f64.powf(4.0 / 3.0) * a * a / nu.cbrt())
}

/// `lambda_{n, n-m+1}` minus its Airy edge approximation.
pub fn edge_zero_check(n: usize, m: usize) -> Result<f64> {
    if m == 0 || m > n {
        return invalid(format!("edge index m={m} must lie in 1..={n}"));
    }
    let zeros = laguerre_zeros(n)?;
    Ok(zeros.zero(n - m + 1) - edge_zero_prediction(n, m)?)
}

/// Last zero `mu_{n,n} = (hbar/2) lambda_{n,n}` of `psi_n` minus
/// `E + E^{1/3} a_1 hbar^{2/3} + E^{-1/3} (a_1^2/5) hbar^{4/3}`.
pub fn psi_edge_residual(pt: &SemiclassicalPoint) -> Result<f64> {
    let n = pt.level();
    if n == 0 {
        return invalid("psi_0 has no zeros");
    }
    let h = pt.hbar();
    let e = pt.energy();
    let a1 = airy_negative_zero(1)?;
    let mu = 0.5 * h * laguerre_zeros(n)?.zero(n);
    let pred = e + e.cbrt() * a1 * h.powf(2.0 / 3.0) + a1 * a1 / (5.0 * e.cbrt()) * h.powf(4.0 / 3.0);
    Ok(mu - pred)
}

/// Uniform samples `(u, psi_n(u))` on `[0, u_max]`.
pub fn psi_table(pt: &SemiclassicalPoint, u_max: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    if !(u_max > 0.0 && u_max.is_finite()) || points < 2 {
        return invalid("psi table needs u_max > 0 and at least two points");
    }
    Ok((0..points)
        .map(|i| {
            let u = u_max * i as f64 / (points - 1) as f64;
            (u, psi_eval(pt, u))
        })
        .collect())
}

pub fn psi_table_csv(table: &[(f64, f64)]) -> String {
    let mut s = String::from("u,psi\n");
    for (u, p) in table {
        let _ = writeln!(s, "{:.12e},{:.17e}", u, p);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub u: f64,
    pub value: f64,
    pub is_local_max: bool,
}

/// Summary of the shape of `psi_n` on `[0, u_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiShape {
    pub zeros: Vec<f64>,
    pub last_critical: Option<CriticalPoint>,
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Zeros of `psi_n` inside `(0, u_max)` from the Laguerre zeros, and the last
/// critical point found by scanning `psi_n'` on a grid of `scan` cells.
pub fn psi_shape(pt: &SemiclassicalPoint, u_max: f64, scan: usize) -> Result<PsiShape> {
    let n = pt.level();
    let h = pt.hbar();
    let zeros = if n == 0 {
        Vec::new()
    } else {
        laguerre_zeros(n)?
            .zeros
            .iter()
            .map(|z| 0.5 * h * z)
            .filter(|&u| u < u_max)
            .collect()
    };
    let d = |u: f64| psi_derivative(pt, u);
    let mut last = None;
    let step = u_max / scan as f64;
    let mut prev = d(step * 1e-3);
    for i in 1..=scan {
        let u = step * i as f64;
        let cur = d(u);
        if prev != 0.0 && cur != 0.0 && (prev > 0.0) != (cur > 0.0) {
            let lo = if i == 1 { step * 1e-3 } else { u - step };
            let c = bisect(d, lo, u);
            last = Some(CriticalPoint { u: c, value: psi_eval(pt, c), is_local_max: prev > 0.0 });
        }
        prev = cur;
    }
    Ok(PsiShape { zeros, last_critical: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::laguerre::{laguerre_eval, weighted_laguerre};
    use crate::specfun::quadrature::{gauss_rule, QuadratureKind};

    #[test]
    fn small_degrees() {
        assert!((laguerre_zeros(1).unwrap().zeros[0] - 1.0).abs() < 1e-15);
        let z = laguerre_zeros(2).unwrap().zeros;
        let r = 2f64.sqrt();
        assert!((z[0] - (2.0 - r)).abs() < 1e-14);
        assert!((z[1] - (2.0 + r)).abs() < 1e-14);
        assert!(laguerre_zeros(0).is_err());
    }

    #[test]
    fn zeros_are_roots() {
        for n in [5usize, 30, 100] {
            let z = laguerre_zeros(n).unwrap();
            for &x in &z.zeros {
                let (w, wm) = weighted_laguerre_pair(n, x);
                // Compare against the local slope scale so large zeros are judged fairly.
                let slope = n as f64 * (w - wm) / x;
                assert!(w.abs() <= 1e-10 * slope.abs().max(1e-300) * x.max(1.0), "n={n} x={x}");
                if x < 20.0 {
                    assert!(laguerre_eval(n, x).abs() < 1e-8);
                }
            }
            assert_eq!(weighted_laguerre(n, z.zeros[0]).signum(), weighted_laguerre(n, z.zeros[0]).signum());
        }
    }

    #[test]
    fn first_zero_bound() {
        for n in 1..=200usize {
            let z = laguerre_zeros(n).unwrap();
            assert!(z.zeros[0] <= 3.0 / (2.0 * n as f64 + 1.0), "n={n}");
        }
    }

    #[test]
    fn interlacing() {
        let mut prev = laguerre_zeros(1).unwrap();
        for n in 2..=100usize {
            let cur = laguerre_zeros(n).unwrap();
            for k in 0..prev.n {
                assert!(cur.zeros[k] < prev.zeros[k] && prev.zeros[k] < cur.zeros[k + 1], "n={n} k={k}");
            }
            prev = cur;
        }
    }

    #[test]
    fn counting_limit_closed_form_matches_quadrature() {
        // t = s^2 turns the integrand into 2 sqrt(1 - s^2), smooth on [0, sqrt x].
        let rule = gauss_rule(QuadratureKind::GaussLegendre, 40).unwrap();
        for x in [0.0, 0.01, 0.1, 0.3, 0.5, 0.77, 0.95, 1.0] {
            let b = f64::sqrt(x);
            let q: f64 = rule
                .on_interval(0.0, b)
                .iter()
                .map(|(s, w)| w * 2.0 * (1.0 - s * s).max(0.0).sqrt())
                .sum::<f64>()
                * 2.0
                / PI;
            let tol = if x == 1.0 { 1e-4 } else { 1e-12 };
            assert!((q - zero_counting_limit(x)).abs() < tol, "x={x}");
        }
    }

    #[test]
    fn counting_endpoints() {
        for n in [10usize, 50, 200] {
            let z = laguerre_zeros(n).unwrap();
            assert_eq!(zero_counting_cdf(&z, 0.0), 0.0);
            assert!(zero_counting_cdf(&z, 1.0) >= 1.0 - 2.0 / n as f64);
        }
    }

    #[test]
    fn airy_edge_residual_shrinks() {
        let r: Vec<f64> = [50usize, 100, 200].iter().map(|&n| edge_zero_check(n, 1).unwrap().abs()).collect();
        assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
        assert!(r[2] <= 10.0 / 200.0);
        // n * residual settles near 0.2985; frozen as a regression bound.
        for (n, ri) in [50.0, 100.0, 200.0].iter().zip(&r) {
            assert!(n * ri < 0.35, "n={n} residual={ri}");
        }
    }

    #[test]
    fn psi_edge_residual_is_second_order() {
        let mut scaled = Vec::new();
        for n in [50usize, 100, 200] {
            let pt = SemiclassicalPoint::new(3.0, n).unwrap();
            let r = psi_edge_residual(&pt).unwrap();
            scaled.push(r.abs() / (pt.hbar() * pt.hbar()));
        }
        let spread = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1.1, "{scaled:?}");
    }

    #[test]
    fn figure_shape_n100() {
        let pt = SemiclassicalPoint::new(3.0, 100).unwrap();
        let shape = psi_shape(&pt, 5.0, 20000).unwrap();
        assert_eq!(shape.zeros.len(), 100);
        assert!(shape.zeros.iter().all(|&u| u > 0.0 && u < 3.05));
        let last = shape.last_critical.unwrap();
        assert!(last.is_local_max && last.value > 0.0);
        assert!(last.u > *shape.zeros.last().unwrap());
    }

    #[test]
    fn psi_zero_mapping() {
        let pt = SemiclassicalPoint::new(3.0, 12).unwrap();
        let z = laguerre_zeros(12).unwrap();
        for &l in &z.zeros {
            let u = 0.5 * pt.hbar() * l;
            assert!(psi_eval(&pt, u).abs() < 1e-9 / pt.hbar());
        }
    }

    #[test]
    fn csv_shapes() {
        let z = laguerre_zeros(3).unwrap();
        let csv = z.to_csv();
        assert!(csv.starts_with("k,zero\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
