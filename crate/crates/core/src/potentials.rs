//! Test potentials on the plane: Gaussian mixtures with closed-form Fourier
//! transforms and circle averages, constants, and opaque closures.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::specfun::bessel::bessel_i0_scaled;
use crate::specfun::quadrature::{gauss_rule, QuadratureKind};

pub type Point = [f64; 2];

/// `amplitude * exp(-inverse_width * |x - center|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub center: Point,
    pub inverse_width: f64,
    pub amplitude: f64,
}

impl GaussianSpec {
    pub fn unit() -> Self {
        GaussianSpec { center: [0.0, 0.0], inverse_width: 1.0, amplitude: 1.0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.inverse_width > 0.0 && self.inverse_width.is_finite()) {
            return invalid(format!("inverse_width must be positive, got {}", self.inverse_width));
        }
        if !(self.amplitude.is_finite() && self.center.iter().all(|c| c.is_finite())) {
            return invalid("gaussian center and amplitude must be finite");
        }
        Ok(())
    }

    fn eval(&self, x: Point) -> f64 {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        self.amplitude * (-self.inverse_width * (dx * dx + dy * dy)).exp()
    }

    fn fourier(&self, xi: Point) -> Complex64 {
        let w = self.inverse_width;
        let mag = self.amplitude * PI / w * (-(xi[0] * xi[0] + xi[1] * xi[1]) / (4.0 * w)).exp();
        let phase = -(self.center[0] * xi[0] + self.center[1] * xi[1]);
        Complex64::from_polar(mag, phase)
    }

    fn circle_average(&self, y: Point, r: f64) -> f64 {
        let w = self.inverse_width;
        let d = (y[0] - self.center[0]).hypot(y[1] - self.center[1]);
        self.amplitude * (-w * (d - r) * (d - r)).exp() * bessel_i0_scaled(2.0 * w * d * r)
    }
}

type Evaluator = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Term {
    Gaussian(GaussianSpec),
    Constant(f64),
    Custom { f: Evaluator, center: Point, scale: f64 },
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Gaussian(g) => write!(f, "Gaussian({g:?})"),
            Term::Constant(c) => write!(f, "Constant({c})"),
            Term::Custom { center, scale, .. } => write!(f, "Custom(center={center:?}, scale={scale})"),
        }
    }
}

/// A real potential on the plane, immutable after construction.
#[derive(Clone, Debug)]
pub struct Potential {
    terms: Vec<Term>,
}

/// Node count actually used by a quadrature Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierEstimate {
    pub value: Complex64,
    pub nodes_per_axis: usize,
}

fn rotate_point(p: Point, theta: f64) -> Point {
    let (s, c) = theta.sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

pub fn make_gaussian(spec: GaussianSpec) -> Result<Potential> {
    spec.validate()?;
    Ok(Potential { terms: vec![Term::Gaussian(spec)] })
}

pub fn make_mixture(specs: &[GaussianSpec]) -> Result<Potential> {
    if specs.is_empty() {
        return invalid("mixture needs at least one component");
    }
    for s in specs {
        s.validate()?;
    }
    Ok(Potential { terms: specs.iter().copied().map(Term::Gaussian).collect() })
}

impl Potential {
    pub fn unit_gaussian() -> Self {
        Potential { terms: vec![Term::Gaussian(GaussianSpec::unit())] }
    }

    pub fn zero() -> Self {
        Potential { terms: Vec::new() }
    }

    /// `V == c`. Has a circle average but no Fourier transform.
    pub fn constant(c: f64) -> Self {
        Potential { terms: vec![Term::Constant(c)] }
    }

    /// An opaque potential concentrated near `center` on a length `scale`.
    /// Only the evaluator is available; every downstream quantity falls back
    /// to quadrature.
    pub fn custom(f: impl Fn(Point) -> f64 + Send + Sync + 'static, center: Point, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return invalid("custom potential scale must be positive");
        }
        Ok(Potential { terms: vec![Term::Custom { f: Arc::new(f), center, scale }] })
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Gaussian(g) => g.eval(x),
                Term::Constant(c) => *c,
                Term::Custom { f, .. } => f(x),
            })
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| match t {
            Term::Gaussian(g) => g.amplitude == 0.0,
            Term::Constant(c) => *c == 0.0,
            Term::Custom { .. } => false,
        })
    }

    /// Value of `V` when it is constant, including the zero potential.
    pub fn as_constant(&self) -> Option<f64> {
        let mut c = 0.0;
        for t in &self.terms {
            match t {
                Term::Constant(v) => c += v,
                Term::Gaussian(g) if g.amplitude == 0.0 => {}
                _ => return None,
            }
        }
        Some(c)
    }

    /// Whether `V` depends on `|x|` only, as far as the representation shows.
    pub fn is_radial(&self) -> bool {
        self.terms.iter().all(|t| match t {
            Term::Gaussian(g) => g.center == [0.0, 0.0],
            Term::Constant(_) => true,
            Term::Custom { .. } => false,
        })
    }

    pub fn gaussians(&self) -> Vec<GaussianSpec> {
        self.terms
            .iter()
            .filter_map(|t| if let Term::Gaussian(g) = t { Some(*g) } else { None })
            .collect()
    }

    pub fn has_closed_forms(&self) -> bool {
        self.terms.iter().all(|t| !matches!(t, Term::Custom { .. }))
    }

    fn integrable(&self) -> bool {
        self.terms.iter().all(|t| match t {
            Term::Constant(c) => *c == 0.0,
            _ => true,
        })
    }

    /// Radius around the origin outside which `|V| < 1e-16 * sum |amplitude|`
    /// (constants excluded; custom terms use 9 length scales).
    pub fn spatial_extent(&self) -> f64 {
        let mut ext: f64 = 0.0;
        for t in &self.terms {
            match t {
                Term::Gaussian(g) => {
                    let c = g.center[0].hypot(g.center[1]);
                    ext = ext.max(c + (37.0 / g.inverse_width).sqrt());
                }
                Term::Constant(_) => {}
                Term::Custom { center, scale, .. } => ext = ext.max(center[0].hypot(center[1]) + 9.0 * scale),
            }
        }
        ext
    }

    /// Frequency radius beyond which `|V_hat|` has fallen below `tol` relative
    /// to its peak.
    pub fn frequency_extent(&self, tol: f64) -> f64 {
        let mut ext: f64 = 0.0;
        for t in &self.terms {
            match t {
                Term::Gaussian(g) => ext = ext.max((4.0 * g.inverse_width * (-tol.ln())).sqrt()),
                Term::Custom { scale, .. } => ext = ext.max(2.0 * (-tol.ln()).sqrt() / scale),
                Term::Constant(_) => {}
            }
        }
        ext
    }

    /// Smallest length scale among the terms.
    pub fn min_length_scale(&self) -> f64 {
        self.terms
            .iter()
            .filter_map(|t| match t {
                Term::Gaussian(g) => Some(1.0 / g.inverse_width.sqrt()),
                Term::Custom { scale, .. } => Some(*scale),
                Term::Constant(_) => None,
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `x -> V(R_{-theta} x)`: the graph rotated counterclockwise by `theta`.
    pub fn rotated(&self, theta: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Gaussian(g) => Term::Gaussian(GaussianSpec { center: rotate_point(g.center, theta), ..*g }),
                Term::Constant(c) => Term::Constant(*c),
                Term::Custom { f, center, scale } => {
                    let f = f.clone();
                    Term::Custom {
                        f: Arc::new(move |x| f(rotate_point(x, -theta))),
                        center: rotate_point(*center, theta),
                        scale: *scale,
                    }
                }
            })
            .collect();
        Potential { terms }
    }

    /// `x -> V(x - a)`.
    pub fn translated(&self, a: Point) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Gaussian(g) => Term::Gaussian(GaussianSpec {
                    center: [g.center[0] + a[0], g.center[1] + a[1]],
                    ..*g
                }),
                Term::Constant(c) => Term::Constant(*c),
                Term::Custom { f, center, scale } => {
                    let f = f.clone();
                    let a = a;
                    Term::Custom {
                        f: Arc::new(move |x| f([x[0] - a[0], x[1] - a[1]])),
                        center: [center[0] + a[0], center[1] + a[1]],
                        scale: *scale,
                    }
                }
            })
            .collect();
        Potential { terms }
    }

    /// `c * V`.
    pub fn scaled(&self, c: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Gaussian(g) => Term::Gaussian(GaussianSpec { amplitude: c * g.amplitude, ..*g }),
                Term::Constant(v) => Term::Constant(c * v),
                Term::Custom { f, center, scale } => {
                    let f = f.clone();
                    Term::Custom { f: Arc::new(move |x| c * f(x)), center: *center, scale: *scale }
                }
            })
            .collect();
        Potential { terms }
    }

    pub fn plus(&self, other: &Potential) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Potential { terms }
    }

    /// Closed-form `V_hat(xi) = int V(x) e^{-i x.xi} dx`, if every term has one.
    pub fn fourier_closed(&self, xi: Point) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            match t {
                Term::Gaussian(g) => acc += g.fourier(xi),
                Term::Constant(c) if *c == 0.0 => {}
                _ => return None,
            }
        }
        Some(acc)
    }

    /// Tensor Gauss-Hermite approximation of `V_hat(xi)` with `order` nodes per axis.
    pub fn fourier_quadrature(&self, xi: Point, order: usize) -> Result<Complex64> {
        if !self.integrable() {
            return invalid("a nonzero constant has no Fourier transform");
        }
        let rule = gauss_rule(QuadratureKind::GaussHermite, order)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let (center, s) = match t {
                Term::Gaussian(g) => (g.center, 1.0 / g.inverse_width.sqrt()),
                Term::Custom { center, scale, .. } => (*center, *scale),
                Term::Constant(_) => continue,
            };
            let single = Potential { terms: vec![t.clone()] };
            for i in 0..order {
                let x = center[0] + s * rule.nodes[i];
                let wi = rule.scaled_weight(i);
                for j in 0..order {
                    let y = center[1] + s * rule.nodes[j];
                    let w = wi * rule.scaled_weight(j) * s * s;
                    let v = single.eval([x, y]);
                    acc += Complex64::from_polar(w * v, -(x * xi[0] + y * xi[1]));
                }
            }
        }
        Ok(acc)
    }

    /// Quadrature transform at 64 and 128 nodes per axis, accepted when the two
    /// agree to `1e-10` relative to the `L^1` scale of `V`.
    pub fn fourier_by_quadrature(&self, xi: Point) -> Result<FourierEstimate> {
        let coarse = self.fourier_quadrature(xi, 64)?;
        let fine = self.fourier_quadrature(xi, 128)?;
        let scale = self.fourier_quadrature([0.0, 0.0], 64)?.norm().max(1e-300);
        if (fine - coarse).norm() > 1e-10 * scale.max(1.0) {
            return Err(Error::NonConvergence {
                what: format!("Fourier transform at {xi:?}"),
                first: coarse.norm(),
                second: fine.norm(),
            });
        }
        Ok(FourierEstimate { value: fine, nodes_per_axis: 128 })
    }

    /// `V_hat(xi)`: closed form when available, quadrature otherwise.
    pub fn fourier_transform(&self, xi: Point) -> Result<Complex64> {
        match self.fourier_closed(xi) {
            Some(v) => Ok(v),
            None => Ok(self.fourier_by_quadrature(xi)?.value),
        }
    }

    /// Closed-form average of `V` over the circle of radius `r` about `y`.
    pub fn circle_average_oracle(&self, y: Point, r: f64) -> Option<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            match t {
                Term::Gaussian(g) => acc += g.circle_average(y, r),
                Term::Constant(c) => acc += c,
                Term::Custom { .. } => return None,
            }
        }
        Some(acc)
    }

    /// JSON-level description, unavailable for custom terms.
    pub fn to_spec(&self) -> Option<PotentialSpec> {
        let mut parts = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            parts.push(match t {
                Term::Gaussian(g) => PotentialSpec::Gaussian(*g),
                Term::Constant(c) => PotentialSpec::Constant { value: *c },
                Term::Custom { .. } => return None,
            });
        }
        Some(if parts.len() == 1 { parts.pop().unwrap() } else { PotentialSpec::Mixture { components: parts } })
    }
}

/// Serialized potential: `{"type": "gaussian", "center": [x, y], "inverse_width": w,
/// "amplitude": a}`, `{"type": "mixture", "components": [...]}` or
/// `{"type": "constant", "value": c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PotentialSpec {
    Gaussian(GaussianSpec),
    Mixture { components: Vec<PotentialSpec> },
    Constant { value: f64 },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        match self {
            PotentialSpec::Gaussian(g) => make_gaussian(*g),
            PotentialSpec::Constant { value } => {
                if !value.is_finite() {
                    return invalid("constant potential must be finite");
                }
                Ok(Potential::constant(*value))
            }
            PotentialSpec::Mixture { components } => {
                if components.is_empty() {
                    return invalid("mixture needs at least one component");
                }
                let mut terms = Vec::new();
                for c in components {
                    terms.extend(c.build()?.terms);
                }
                Ok(Potential { terms })
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("potential spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel::bessel_i0;

    fn trapezoid_circle(v: &Potential, y: Point, r: f64, points: usize) -> f64 {
        (0..points)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / points as f64;
                v.eval([y[0] + r * th.cos(), y[1] + r * th.sin()])
            })
            .sum::<f64>()
            / points as f64
    }

    fn sample_mixture() -> Potential {
        make_mixture(&[
            GaussianSpec { center: [0.5, -0.3], inverse_width: 1.3, amplitude: 0.8 },
            GaussianSpec { center: [-1.0, 0.7], inverse_width: 0.6, amplitude: -0.4 },
        ])
        .unwrap()
    }

    #[test]
    fn unit_gaussian_values() {
        let v = Potential::unit_gaussian();
        assert_eq!(v.eval([0.0, 0.0]), 1.0);
        for r in [0.1, 1.0, 2.5] {
            assert!((v.circle_average_oracle([0.0, 0.0], r).unwrap() - (-r * r).exp()).abs() < 1e-15);
        }
        let want = (-2.0f64).exp() * bessel_i0(2.0);
        let got = v.circle_average_oracle([1.0, 0.0], 1.0).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!((got - trapezoid_circle(&v, [1.0, 0.0], 1.0, 256)).abs() < 1e-14);
    }

    #[test]
    fn bad_specs_rejected() {
        assert!(make_gaussian(GaussianSpec { inverse_width: 0.0, ..GaussianSpec::unit() }).is_err());
        assert!(make_gaussian(GaussianSpec { inverse_width: -1.0, ..GaussianSpec::unit() }).is_err());
        assert!(make_mixture(&[]).is_err());
        assert!(PotentialSpec::Mixture { components: vec![] }.build().is_err());
    }

    #[test]
    fn circle_oracle_matches_trapezoid() {
        let v = sample_mixture();
        for &cx in &[-4.0, -1.3, 0.0, 2.2, 4.0] {
            for &cy in &[-2.0, 0.0, 1.7] {
                for &r in &[0.05, 0.5, 1.0, 2.5, 4.0] {
                    if cx * cx + cy * cy > 16.0 {
                        continue;
                    }
                    let o = v.circle_average_oracle([cx, cy], r).unwrap();
                    let q = trapezoid_circle(&v, [cx, cy], r, 256);
                    assert!((o - q).abs() <= 1e-10, "c=({cx},{cy}) r={r}: {o} vs {q}");
                }
            }
        }
    }

    #[test]
    fn fourier_quadrature_matches_closed_form() {
        let v = sample_mixture();
        for i in 0..5 {
            for j in 0..5 {
                let xi = [-4.0 + 2.0 * i as f64, -4.0 + 2.0 * j as f64];
                let closed = v.fourier_closed(xi).unwrap();
                let quad = v.fourier_by_quadrature(xi).unwrap().value;
                assert!((closed - quad).norm() <= 1e-8, "xi={xi:?}");
            }
        }
    }

    #[test]
    fn fourier_facts() {
        let v = Potential::unit_gaussian();
        assert!((v.fourier_transform([0.0, 0.0]).unwrap().re - PI).abs() < 1e-15);
        let even = make_mixture(&[
            GaussianSpec { center: [1.0, 0.0], inverse_width: 1.0, amplitude: 1.0 },
            GaussianSpec { center: [-1.0, 0.0], inverse_width: 1.0, amplitude: 1.0 },
        ])
        .unwrap();
        assert!(even.fourier_transform([0.7, -1.1]).unwrap().im.abs() < 1e-15);
        let moved = v.translated([0.3, -2.0]);
        for xi in [[0.5, 0.5], [2.0, -1.0]] {
            let a = v.fourier_transform(xi).unwrap().norm();
            let b = moved.fourier_transform(xi).unwrap().norm();
            assert!((a - b).abs() < 1e-15);
        }
        let doubled = make_mixture(&[GaussianSpec::unit(), GaussianSpec::unit()]).unwrap();
        let total = doubled.fourier_transform([0.0, 0.0]).unwrap();
        let by_quad = doubled.fourier_quadrature([0.0, 0.0], 40).unwrap();
        assert!((total - by_quad).norm() < 1e-12);
    }

    #[test]
    fn constant_has_no_fourier_transform() {
        assert!(Potential::constant(2.0).fourier_transform([0.0, 0.0]).is_err());
        assert_eq!(Potential::constant(2.0).circle_average_oracle([1.0, 1.0], 3.0), Some(2.0));
    }

    #[test]
    fn linearity_and_cancellation() {
        let g = Potential::unit_gaussian();
        let twice = make_mixture(&[GaussianSpec::unit(), GaussianSpec::unit()]).unwrap();
        let cancel = g.plus(&g.scaled(-1.0));
        for p in [[0.0, 0.0], [0.4, -1.2], [3.0, 1.0]] {
            assert_eq!(twice.eval(p), 2.0 * g.eval(p));
            assert_eq!(cancel.eval(p), 0.0);
        }
        assert_eq!(cancel.circle_average_oracle([0.2, 0.1], 1.0), Some(0.0));
        assert_eq!(cancel.fourier_closed([0.2, 0.1]), Some(Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn rotation_moves_graph() {
        let v = sample_mixture();
        let th = 0.7;
        let r = v.rotated(th);
        for p in [[0.3, 0.4], [-1.0, 2.0]] {
            assert!((r.eval(rotate_point(p, th)) - v.eval(p)).abs() < 1e-14);
        }
        let c = Potential::custom(|x| (-(x[0] - 1.0).powi(2) - 2.0 * x[1] * x[1]).exp(), [1.0, 0.0], 0.7).unwrap();
        let cr = c.rotated(th).translated([0.5, 0.5]);
        let p = [0.2, -0.9];
        let q = rotate_point(p, th);
        assert!((cr.eval([q[0] + 0.5, q[1] + 0.5]) - c.eval(p)).abs() < 1e-14);
    }

    #[test]
    fn custom_fourier_by_quadrature() {
        let c = Potential::custom(|x| 2.0 * (-(x[0] * x[0] + x[1] * x[1])).exp(), [0.0, 0.0], 1.0).unwrap();
        let got = c.fourier_transform([1.0, 0.5]).unwrap();
        let want = Potential::unit_gaussian().scaled(2.0).fourier_closed([1.0, 0.5]).unwrap();
        assert!((got - want).norm() < 1e-12);
        assert!(c.circle_average_oracle([0.0, 0.0], 1.0).is_none());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"type":"mixture","components":[
            {"type":"gaussian","center":[0.0,1.0],"inverse_width":2.0,"amplitude":-1.5},
            {"type":"constant","value":0.25}]}"#;
        let spec = PotentialSpec::from_json(text).unwrap();
        let v = spec.build().unwrap();
        assert!((v.eval([0.0, 1.0]) - (-1.25)).abs() < 1e-15);
        let again = PotentialSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(again, spec);
        assert_eq!(v.to_spec().unwrap(), spec);
        assert!(PotentialSpec::from_json(r#"{"type":"gaussian","center":[0,0],"inverse_width":-1,"amplitude":1}"#)
            .unwrap()
            .build()
            .is_err());
        assert!(PotentialSpec::from_json(r#"{"type":"cubic"}"#).is_err());
    }
}
