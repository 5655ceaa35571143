//! Circle averages of potentials, their Fourier-Bessel form, and the
//! invariant `I(r)`.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::potentials::{Point, Potential};
use crate::specfun::bessel::bessel_j0;
use crate::specfun::quadrature::{gauss_rule, QuadratureKind};

/// Phase point `xi = (x2, p2)` of the reduced problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x2: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub fn new(x2: f64, p2: f64) -> Self {
        PhasePoint { x2, p2 }
    }

    /// Circle center `xi_check = (p2, x2) / sqrt 2` in the plane of `V`.
    pub fn check(&self) -> Point {
        [self.p2 / SQRT_2, self.x2 / SQRT_2]
    }

    /// Inverse of [`PhasePoint::check`].
    pub fn from_check(y: Point) -> Self {
        PhasePoint { x2: SQRT_2 * y[1], p2: SQRT_2 * y[0] }
    }
}

/// Orbit radius `sqrt(E/2)` at energy `E`.
pub fn energy_to_radius(energy: f64) -> f64 {
    (0.5 * energy).sqrt()
}

pub fn radius_to_energy(r: f64) -> f64 {
    2.0 * r * r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileConvention {
    /// Arguments are `(xi, E)`.
    Energy,
    /// Arguments are `(y, r)` in the plane of `V`.
    Radius,
}

/// A potential viewed through its circle averages.
#[derive(Debug, Clone)]
pub struct RadonProfile {
    pub potential: Potential,
    pub convention: ProfileConvention,
}

impl RadonProfile {
    pub fn new(potential: Potential, convention: ProfileConvention) -> Self {
        RadonProfile { potential, convention }
    }

    /// `V~(xi; E)` or `R_r(V)(y)` depending on the convention.
    pub fn value(&self, point: Point, param: f64) -> Result<f64> {
        match self.convention {
            ProfileConvention::Energy => circle_average(&self.potential, PhasePoint::new(point[0], point[1]), param),
            ProfileConvention::Radius => radon_average(&self.potential, point, param),
        }
    }
}

const TRAPEZOID_START: usize = 256;
const TRAPEZOID_MAX: usize = 1 << 16;

/// Periodic trapezoid rule for the mean of `V` over the circle, doubling the
/// point count from 256 until successive values agree to `1e-12`.
pub fn trapezoid_circle_average(v: &Potential, y: Point, r: f64) -> Result<f64> {
    let eval = |points: usize| -> f64 {
        (0..points)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / points as f64;
                v.eval([y[0] + r * th.cos(), y[1] + r * th.sin()])
            })
            .sum::<f64>()
            / points as f64
    };
    let mut points = TRAPEZOID_START;
    let mut prev = eval(points);
    while points < TRAPEZOID_MAX {
        points *= 2;
        let cur = eval(points);
        if (cur - prev).abs() <= 1e-12 * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NonConvergence { what: format!("circle average at {y:?}, r={r}"), first: prev, second: eval(points) })
}

/// `R_r(V)(y)`: mean of `V` over the circle of radius `r` about `y`.
pub fn radon_average(v: &Potential, y: Point, r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return invalid(format!("radius must be nonnegative, got {r}"));
    }
    if r == 0.0 {
        return Ok(v.eval(y));
    }
    match v.circle_average_oracle(y, r) {
        Some(val) => Ok(val),
        None => trapezoid_circle_average(v, y, r),
    }
}

/// `V~(xi; E) = R_{sqrt(E/2)}(V)(xi_check)`.
pub fn circle_average(v: &Potential, xi: PhasePoint, energy: f64) -> Result<f64> {
    if !(energy > 0.0 && energy.is_finite()) {
        return invalid(format!("energy must be positive, got {energy}"));
    }
    radon_average(v, xi.check(), energy_to_radius(energy))
}

/// The same average in the half-period parametrization
/// `(1/pi) int_0^pi V(p2/sqrt2 + r sin 2t, x2/sqrt2 + r cos 2t) dt`,
/// by a midpoint rule with `points` nodes.
pub fn circle_average_parametrized(v: &Potential, xi: PhasePoint, energy: f64, points: usize) -> f64 {
    let r = energy_to_radius(energy);
    let c = xi.check();
    (0..points)
        .map(|k| {
            let t = PI * (k as f64 + 0.5) / points as f64;
            v.eval([c[0] + r * (2.0 * t).sin(), c[1] + r * (2.0 * t).cos()])
        })
        .sum::<f64>()
        / points as f64
}

/// Row-major table of `V~(xi; E)` over a tensor grid of `x2` and `p2` values.
pub fn circle_average_table(v: &Potential, x2: &[f64], p2: &[f64], energy: f64) -> Result<Vec<(f64, f64, f64)>> {
    let pts: Vec<(f64, f64)> = x2.iter().flat_map(|&x| p2.iter().map(move |&p| (x, p))).collect();
    pts.par_iter()
        .map(|&(x, p)| circle_average(v, PhasePoint::new(x, p), energy).map(|val| (x, p, val)))
        .collect()
}

/// Polar quadrature settings for frequency-side integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRule {
    pub radial_order: usize,
    pub angular_points: usize,
}

impl Default for PolarRule {
    fn default() -> Self {
        PolarRule { radial_order: 128, angular_points: 128 }
    }
}

fn closed_form_required(v: &Potential) -> Result<()> {
    if v.as_constant().is_some_and(|c| c != 0.0) {
        return invalid("a nonzero constant has no Fourier transform");
    }
    Ok(())
}

fn radon_via_fourier_with(v: &Potential, y: Point, r: f64, rule: PolarRule, rmax: f64) -> Result<f64> {
    let radial = gauss_rule(QuadratureKind::GaussLegendre, rule.radial_order)?;
    let mut acc = 0.0;
    for (rho, w) in radial.on_interval(0.0, rmax) {
        let j = bessel_j0(r * rho);
        let mut ring = 0.0;
        for k in 0..rule.angular_points {
            let phi = 2.0 * PI * k as f64 / rule.angular_points as f64;
            let xi = [rho * phi.cos(), rho * phi.sin()];
            let fhat = v.fourier_transform(xi)?;
            let (s, c) = (y[0] * xi[0] + y[1] * xi[1]).sin_cos();
            ring += fhat.re * c - fhat.im * s;
        }
        acc += w * rho * j * ring * (2.0 * PI / rule.angular_points as f64);
    }
    Ok(acc / (4.0 * PI * PI))
}

/// `R_r(V)(y) = (2 pi)^{-2} int e^{i y.xi} J0(r |xi|) V_hat(xi) dxi`, by
/// Gauss-Legendre in `|xi|` on `[0, R]` times the trapezoid rule in angle.
/// `R` is chosen so that `|V_hat|` has fallen below `1e-14` of its peak.
pub fn radon_via_fourier(v: &Potential, y: Point, r: f64) -> Result<f64> {
    closed_form_required(v)?;
    if v.is_zero() {
        return Ok(0.0);
    }
    let rmax = v.frequency_extent(1e-14);
    let tail = tail_ratio(v, rmax)?;
    if tail > 1e-12 {
        return Err(Error::NonConvergence { what: "frequency truncation of the Radon integral".into(), first: tail, second: 1e-12 });
    }
    let base = PolarRule::default();
    let extra = ((y[0].hypot(y[1]) + r) * rmax / 8.0).ceil() as usize;
    let rule = PolarRule { radial_order: base.radial_order + extra, angular_points: base.angular_points + 2 * extra };
    radon_via_fourier_with(v, y, r, rule, rmax)
}

fn tail_ratio(v: &Potential, rmax: f64) -> Result<f64> {
    let peak = v.fourier_transform([0.0, 0.0])?.norm().max(
        v.gaussians().iter().map(|g| g.amplitude.abs() * PI / g.inverse_width).fold(0.0, f64::max),
    );
    if peak == 0.0 {
        return Ok(0.0);
    }
    let mut edge: f64 = 0.0;
    for k in 0..16 {
        let phi = 2.0 * PI * k as f64 / 16.0;
        edge = edge.max(v.fourier_transform([rmax * phi.cos(), rmax * phi.sin()])?.norm());
    }
    Ok(edge / peak)
}

/// `int_0^{2 pi} |V_hat(rho cos phi, rho sin phi)|^2 dphi` by the trapezoid rule.
pub fn ring_average_fhat2_with(v: &Potential, rho: f64, points: usize) -> Result<f64> {
    let mut acc = 0.0;
    for k in 0..points {
        let phi = 2.0 * PI * k as f64 / points as f64;
        acc += v.fourier_transform([rho * phi.cos(), rho * phi.sin()])?.norm_sqr();
    }
    Ok(acc * 2.0 * PI / points as f64)
}

pub fn ring_average_fhat2(v: &Potential, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return invalid(format!("ring radius must be positive, got {rho}"));
    }
    ring_average_fhat2_with(v, rho, 256)
}

fn invariant_frequency_side(v: &Potential, r: f64, order: usize) -> Result<f64> {
    let rmax = v.frequency_extent(1e-9);
    let radial = gauss_rule(QuadratureKind::GaussLegendre, order)?;
    let mut acc = 0.0;
    for (rho, w) in radial.on_interval(0.0, rmax) {
        let j = bessel_j0(r * rho);
        acc += w * rho * j * j * ring_average_fhat2_with(v, rho, 128)?;
    }
    Ok(acc)
}

/// `I(r) = int J0(r |xi|)^2 |V_hat(xi)|^2 dxi`, computed on the frequency side
/// and accepted when the 128- and 256-node radial rules agree to `1e-10`.
pub fn spectral_invariant_i(v: &Potential, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("radius must be positive, got {r}"));
    }
    closed_form_required(v)?;
    if v.is_zero() {
        return Ok(0.0);
    }
    let coarse = invariant_frequency_side(v, r, 128)?;
    let fine = invariant_frequency_side(v, r, 256)?;
    if (coarse - fine).abs() > 1e-10 * fine.abs() {
        return Err(Error::NonConvergence { what: format!("I({r}) radial quadrature"), first: coarse, second: fine });
    }
    Ok(fine)
}

/// `(2 pi)^2 int R_r(V)(y)^2 dy` on a tensor Gauss-Legendre grid covering the
/// support of `R_r(V)`.
pub fn spectral_invariant_space_side(v: &Potential, r: f64, order: usize) -> Result<f64> {
    let reach = v.spatial_extent() + r;
    let rule = gauss_rule(QuadratureKind::GaussLegendre, order)?;
    let nodes = rule.on_interval(-reach, reach);
    let rows: Vec<f64> = nodes
        .par_iter()
        .map(|&(x, wx)| -> Result<f64> {
            let mut s = 0.0;
            for &(y, wy) in &nodes {
                let val = radon_average(v, [x, y], r)?;
                s += wy * val * val;
            }
            Ok(wx * s)
        })
        .collect::<Result<_>>()?;
    Ok(4.0 * PI * PI * rows.iter().sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub r: f64,
    pub frequency_side: f64,
    pub space_side: f64,
    pub relative_gap: f64,
}

/// Both routes to `I(r)`; a relative gap above `1e-5` is a quadrature failure.
pub fn spectral_invariant_checked(v: &Potential, r: f64) -> Result<InvariantCheck> {
    let f = spectral_invariant_i(v, r)?;
    let s = spectral_invariant_space_side(v, r, 160)?;
    let gap = if f == 0.0 && s == 0.0 { 0.0 } else { (f - s).abs() / f.abs().max(s.abs()) };
    if gap > 1e-5 {
        return Err(Error::NonConvergence { what: format!("I({r}) frequency vs space side"), first: f, second: s });
    }
    Ok(InvariantCheck { r, frequency_side: f, space_side: s, relative_gap: gap })
}
