//! The reduced operator `T_n`: its Weyl symbol `Phi(xi, n)`, its matrix in the
//! Hermite basis, spectrum, moments, and trace comparisons.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_defect, hermitian_eigenvalues};
use crate::potentials::Potential;
use crate::radon::{circle_average, energy_to_radius, PhasePoint};
use crate::specfun::laguerre::{weighted_laguerre, SemiclassicalPoint};
use crate::specfun::quadrature::{gauss_rule, QuadratureKind};
use crate::weyl::{default_grid_order, loglog_slope, radial_spectrum, weyl_matrix, RadialSymbol, SymbolGrid};

fn parity(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `Phi(xi, n) = ((-1)^n / hbar) int_0^inf V~(xi, u) e^{-u/hbar} L_n(2u/hbar) du`
/// with the Gauss-Laguerre kernel precomputed and evaluations cached by exact
/// phase point.
pub struct ReducedSymbol {
    potential: Potential,
    pt: SemiclassicalPoint,
    order: usize,
    /// `(u_i, (-1)^n w_i e^{t_i} e^{-t_i} L_n(2 t_i))` with `u_i = hbar t_i`.
    kernel: Vec<(f64, f64)>,
    cache: Mutex<HashMap<[u64; 2], f64>>,
}

impl fmt::Debug for ReducedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReducedSymbol").field("pt", &self.pt).field("order", &self.order).finish()
    }
}

/// Default Gauss-Laguerre order `2n + 64`.
pub fn default_symbol_order(n: usize) -> usize {
    2 * n + 64
}

impl ReducedSymbol {
    pub fn new(potential: Potential, pt: SemiclassicalPoint) -> Result<Self> {
        let order = default_symbol_order(pt.level());
        Self::with_order(potential, pt, order)
    }

    pub fn with_order(potential: Potential, pt: SemiclassicalPoint, order: usize) -> Result<Self> {
        let rule = gauss_rule(QuadratureKind::GaussLaguerre, order)?;
        let n = pt.level();
        let h = pt.hbar();
        let kernel = rule
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &t)| (h * t, parity(n) * rule.scaled_weight(i) * weighted_laguerre(n, 2.0 * t)))
            .collect();
        Ok(ReducedSymbol { potential, pt, order, kernel, cache: Mutex::new(HashMap::new()) })
    }

    pub fn point(&self) -> &SemiclassicalPoint {
        &self.pt
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `(Phi, sum |terms|)`.
    fn eval_with_mass(&self, xi: PhasePoint) -> Result<(f64, f64)> {
        if let Some(c) = self.potential.as_constant() {
            return Ok((c, c.abs()));
        }
        let mut acc = 0.0;
        let mut mass = 0.0;
        for &(u, c) in &self.kernel {
            let term = c * circle_average(&self.potential, xi, u)?;
            acc += term;
            mass += term.abs();
        }
        Ok((acc, mass))
    }

    pub fn eval(&self, xi: PhasePoint) -> Result<f64> {
        Ok(self.eval_with_mass(xi)?.0)
    }

    pub fn eval_cached(&self, xi: PhasePoint) -> Result<f64> {
        let key = [xi.x2.to_bits(), xi.p2.to_bits()];
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = self.eval(xi)?;
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }

    pub fn cached_points(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

/// `Phi(xi, n)` at the default order, confirmed at twice the order to `1e-9`.
pub fn reduced_symbol(v: &Potential, xi: PhasePoint, pt: &SemiclassicalPoint) -> Result<f64> {
    let base = default_symbol_order(pt.level());
    let a = ReducedSymbol::with_order(v.clone(), *pt, base)?.eval_with_mass(xi)?;
    let b = ReducedSymbol::with_order(v.clone(), *pt, 2 * base)?.eval_with_mass(xi)?;
    if (a.0 - b.0).abs() > 1e-9 * a.0.abs().max(b.0.abs()) + 1e-14 * b.1 {
        return Err(Error::NonConvergence { what: format!("reduced symbol at {xi:?}"), first: a.0, second: b.0 });
    }
    Ok(b.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RateFit {
    Slope(f64),
    /// Every residual is below `1e-12`; no rate can be fitted.
    Converged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRate {
    pub levels: Vec<usize>,
    pub hbars: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fit: RateFit,
}

/// `|Phi(xi, n) - V~(xi; E)|` along `hbar = E/(2n+1)`, with its log-log slope.
pub fn symbol_residual_rate(v: &Potential, xi: PhasePoint, energy: f64, levels: &[usize]) -> Result<ResidualRate> {
    if levels.len() < 4 {
        return invalid("rate fit needs at least four levels");
    }
    let target = if v.is_zero() { 0.0 } else { circle_average(v, xi, energy)? };
    let mut hbars = Vec::new();
    let mut residuals = Vec::new();
    for &n in levels {
        let pt = SemiclassicalPoint::new(energy, n)?;
        hbars.push(pt.hbar());
        residuals.push((reduced_symbol(v, xi, &pt)? - target).abs());
    }
    let fit = if residuals.iter().all(|r| *r < 1e-12) { RateFit::Converged } else { RateFit::Slope(loglog_slope(&hbars, &residuals)) };
    Ok(ResidualRate { levels: levels.to_vec(), hbars, residuals, fit })
}

/// Magnitude of the part of the Laguerre integral for `Phi(xi, n)` coming from
/// `u > cut`, by Gauss-Laguerre in `tau` after `u = cut + hbar tau`.
pub fn tail_truncation_check(v: &Potential, xi: PhasePoint, pt: &SemiclassicalPoint, cut: f64) -> Result<f64> {
    if !(cut > pt.energy()) {
        return invalid(format!("cut {cut} must exceed the energy {}", pt.energy()));
    }
    if v.is_zero() {
        return Ok(0.0);
    }
    if !cut.is_finite() {
        return Ok(0.0);
    }
    let n = pt.level();
    let h = pt.hbar();
    let rule = gauss_rule(QuadratureKind::GaussLaguerre, 64)?;
    let mut acc = 0.0;
    for (i, &tau) in rule.nodes.iter().enumerate() {
        // e^{-u/hbar} L_n(2u/hbar) du / hbar = e^{tau} wl(n, 2 cut/hbar + 2 tau) e^{-tau} dtau.
        let wl = weighted_laguerre(n, 2.0 * cut / h + 2.0 * tau);
        if wl == 0.0 {
            continue;
        }
        acc += rule.scaled_weight(i) * wl * circle_average(v, xi, cut + h * tau)?;
    }
    Ok(acc.abs())
}

/// Radius in the `xi` plane outside which `|V~(xi; E)|` is below `tol` times
/// the total amplitude.
pub fn symbol_support_radius(v: &Potential, energy: f64, tol: f64) -> f64 {
    let r = energy_to_radius(energy);
    let gs = v.gaussians();
    if gs.is_empty() && v.as_constant().is_some() {
        return 0.0;
    }
    if !v.has_closed_forms() {
        return SQRT_2 * (v.spatial_extent() + r);
    }
    let total: f64 = gs.iter().map(|g| g.amplitude.abs()).sum();
    let mut reach: f64 = 0.0;
    for g in &gs {
        if g.amplitude == 0.0 {
            continue;
        }
        let c = g.center[0].hypot(g.center[1]);
        let level = (g.amplitude.abs() / (tol * total)).max(1.0).ln();
        reach = reach.max(c + r + (level / g.inverse_width).sqrt());
    }
    SQRT_2 * reach
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assembly {
    /// Radial when the potential is radial, phase grid otherwise.
    Auto,
    PhaseGrid,
    /// Diagonal from the radial eigenvalue formula; radial potentials only.
    Radial,
}

#[derive(Debug, Clone)]
pub struct ReducedMatrix {
    pub matrix: DMatrix<Complex64>,
    pub assembly: Assembly,
    pub grid_order: Option<usize>,
    pub hermitian_defect: f64,
}

/// Largest basis accepted by the phase-grid assembly.
pub const PHASE_GRID_MAX_BASIS: usize = 192;

fn radial_phi_profile(symbol: Arc<ReducedSymbol>) -> RadialSymbol {
    RadialSymbol::new("Phi", move |r| symbol.eval(PhasePoint::new(r, 0.0)).unwrap_or(f64::NAN))
}

/// Matrix of `T_n` in the Hermite basis `e_0..e_{basis-1}` at the same `hbar`.
pub fn reduced_matrix(v: &Potential, pt: &SemiclassicalPoint, basis: usize, assembly: Assembly) -> Result<ReducedMatrix> {
    if basis == 0 {
        return invalid("basis size must be positive");
    }
    let resolved = match assembly {
        Assembly::Auto if v.is_radial() => Assembly::Radial,
        Assembly::Auto => Assembly::PhaseGrid,
        Assembly::Radial if !v.is_radial() => return invalid("radial assembly needs a radial potential"),
        other => other,
    };
    if let Some(c) = v.as_constant() {
        let matrix = DMatrix::from_diagonal_element(basis, basis, Complex64::new(c, 0.0));
        return Ok(ReducedMatrix { matrix, assembly: resolved, grid_order: None, hermitian_defect: 0.0 });
    }
    let symbol = Arc::new(ReducedSymbol::new(v.clone(), *pt)?);
    match resolved {
        Assembly::Radial => {
            let diag = radial_spectrum(&radial_phi_profile(symbol), basis, pt.hbar())?;
            if diag.iter().any(|x| !x.is_finite()) {
                return Err(Error::Consistency("reduced symbol evaluation failed on the radial path".into()));
            }
            let matrix = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(basis, diag.into_iter().map(|x| Complex64::new(x, 0.0))));
            Ok(ReducedMatrix { matrix, assembly: resolved, grid_order: None, hermitian_defect: 0.0 })
        }
        _ => {
            if basis > PHASE_GRID_MAX_BASIS {
                let q = default_grid_order(basis - 1) as u64;
                return Err(Error::ResourceCap {
                    what: format!("phase-grid assembly with basis {basis}"),
                    needed: q * q * 8 + (basis as u64).pow(2) * 16,
                    cap: {
                        let qc = default_grid_order(PHASE_GRID_MAX_BASIS - 1) as u64;
                        qc * qc * 8 + (PHASE_GRID_MAX_BASIS as u64).pow(2) * 16
                    },
                });
            }
            let q = default_grid_order(basis - 1);
            let grid = SymbolGrid::try_new(pt.hbar(), q, |x, p| symbol.eval_cached(PhasePoint::new(x, p)))?;
            let matrix = weyl_matrix(&grid, basis)?;
            let defect = hermitian_defect(&matrix);
            let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
            if defect > 1e-9 * scale.max(1.0) {
                return Err(Error::Consistency(format!("reduced matrix Hermitian defect {defect:.3e}")));
            }
            Ok(ReducedMatrix { matrix, assembly: resolved, grid_order: Some(q), hermitian_defect: defect })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Reduced,
    #[serde(rename = "full-2d")]
    Full2d,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumMeta {
    pub energy: f64,
    pub level: usize,
    pub hbar: f64,
    pub basis: Vec<usize>,
    pub grid_order: Option<usize>,
    pub assembly: String,
}

/// Eigenvalues of a cluster, in the scaled units of the reduced operator,
/// each carrying weight one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterMeasure {
    pub eigenvalues: Vec<f64>,
    pub provenance: Provenance,
    pub meta: SpectrumMeta,
}

impl ClusterMeasure {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `hbar * sum f(lambda)`.
    pub fn scaled_trace(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.meta.hbar * self.eigenvalues.iter().map(|&l| f(l)).sum::<f64>()
    }

    /// Eigenvalues in decreasing order.
    pub fn decreasing(&self) -> Vec<f64> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }
}

pub fn reduced_spectrum_with(v: &Potential, pt: &SemiclassicalPoint, basis: usize, assembly: Assembly) -> Result<ClusterMeasure> {
    let rm = reduced_matrix(v, pt, basis, assembly)?;
    let eigenvalues = hermitian_eigenvalues(&rm.matrix)?;
    Ok(ClusterMeasure {
        eigenvalues,
        provenance: Provenance::Reduced,
        meta: SpectrumMeta {
            energy: pt.energy(),
            level: pt.level(),
            hbar: pt.hbar(),
            basis: vec![basis],
            grid_order: rm.grid_order,
            assembly: format!("{:?}", rm.assembly).to_lowercase(),
        },
    })
}

pub fn reduced_spectrum(v: &Potential, pt: &SemiclassicalPoint, basis: usize) -> Result<ClusterMeasure> {
    reduced_spectrum_with(v, pt, basis, Assembly::Auto)
}

/// `int_{R^2} f(V~(xi; E)) dxi`, in polar form for radial potentials and on a
/// tensor Gauss-Legendre grid otherwise.
pub fn phase_plane_integral(v: &Potential, energy: f64, f: impl Fn(f64) -> f64 + Sync) -> Result<f64> {
    let reach = symbol_support_radius(v, energy, 1e-16);
    if reach == 0.0 {
        return invalid("phase-plane integral of a constant potential is unbounded unless f(c) = 0");
    }
    if v.is_radial() {
        let rule = gauss_rule(QuadratureKind::GaussLegendre, 400)?;
        let mut acc = 0.0;
        for (r, w) in rule.on_interval(0.0, reach) {
            acc += w * r * f(circle_average(v, PhasePoint::new(r, 0.0), energy)?);
        }
        return Ok(2.0 * PI * acc);
    }
    let rule = gauss_rule(QuadratureKind::GaussLegendre, 240)?;
    let nodes = rule.on_interval(-reach, reach);
    let rows: Vec<f64> = nodes
        .par_iter()
        .map(|&(x, wx)| -> Result<f64> {
            let mut s = 0.0;
            for &(p, wp) in &nodes {
                s += wp * f(circle_average(v, PhasePoint::new(x, p), energy)?);
            }
            Ok(wx * s)
        })
        .collect::<Result<_>>()?;
    Ok(rows.iter().sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub ell: u32,
    pub trace: f64,
    /// `(1/(2 pi hbar)) int V~^ell`.
    pub integral: f64,
    /// `2 pi hbar trace - int V~^ell`.
    pub scaled_gap: f64,
}

/// `tr T_n^ell` from the eigenvalues, against its phase-plane counterpart.
pub fn reduced_moments(v: &Potential, pt: &SemiclassicalPoint, basis: usize, ell: u32) -> Result<MomentReport> {
    if ell == 0 {
        return invalid("moment order starts at 1");
    }
    let spec = reduced_spectrum(v, pt, basis)?;
    let trace: f64 = spec.eigenvalues.iter().map(|l| l.powi(ell as i32)).sum();
    let raw = if v.is_zero() { 0.0 } else { phase_plane_integral(v, pt.energy(), |t| t.powi(ell as i32))? };
    let h = pt.hbar();
    Ok(MomentReport { ell, trace, integral: raw / (2.0 * PI * h), scaled_gap: 2.0 * PI * h * trace - raw })
}

/// `exp(1 - 1/(1 - s^2))` on `|s| < 1`, zero outside; equals 1 at 0.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Test functions for trace comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `t^k`.
    Power { k: u32 },
    /// `t^k bump(t / half_width)`.
    PolyBump { k: u32, half_width: f64 },
    /// `bump((t - center) / half_width)`.
    ShiftedBump { center: f64, half_width: f64 },
}

impl TestFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TestFunction::Power { k } => t.powi(k as i32),
            TestFunction::PolyBump { k, half_width } => t.powi(k as i32) * bump(t / half_width),
            TestFunction::ShiftedBump { center, half_width } => bump((t - center) / half_width),
        }
    }

    /// Whether `f(t)/t` stays bounded at the origin.
    pub fn vanishes_at_zero(&self) -> bool {
        match *self {
            TestFunction::Power { k } | TestFunction::PolyBump { k, .. } => k >= 1,
            TestFunction::ShiftedBump { center, half_width } => center.abs() >= half_width,
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Power { k } => write!(f, "power:{k}"),
            TestFunction::PolyBump { k, half_width } => write!(f, "poly:{k}:{half_width}"),
            TestFunction::ShiftedBump { center, half_width } => write!(f, "bump:{center}:{half_width}"),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    /// `power:k`, `poly:k[:half_width]` (half width 2 by default) or
    /// `bump:center:half_width`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts.get(i).ok_or_else(|| Error::InvalidInput(format!("test function '{s}' is missing a field")))?.parse::<f64>().map_err(|e| Error::InvalidInput(format!("test function '{s}': {e}")))
        };
        let int = |i: usize| -> Result<u32> {
            parts.get(i).ok_or_else(|| Error::InvalidInput(format!("test function '{s}' is missing a field")))?.parse::<u32>().map_err(|e| Error::InvalidInput(format!("test function '{s}': {e}")))
        };
        let f = match parts[0] {
            "power" if parts.len() == 2 => TestFunction::Power { k: int(1)? },
            "poly" if parts.len() == 2 => TestFunction::PolyBump { k: int(1)?, half_width: 2.0 },
            "poly" if parts.len() == 3 => TestFunction::PolyBump { k: int(1)?, half_width: num(2)? },
            "bump" if parts.len() == 3 => TestFunction::ShiftedBump { center: num(1)?, half_width: num(2)? },
            _ => return invalid(format!("unknown test function '{s}'")),
        };
        if let TestFunction::PolyBump { half_width, .. } | TestFunction::ShiftedBump { half_width, .. } = f {
            if !(half_width > 0.0) {
                return invalid("bump half width must be positive");
            }
        }
        Ok(f)
    }
}

/// How the basis size follows `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum BasisRule {
    Fixed { size: usize },
    /// Enough Hermite functions to cover the disk where `|V~| > tol`:
    /// `size = max(min, ceil(R^2 / (2 hbar)))`, capped at `max`.
    Covering { min: usize, max: usize, tol: f64 },
}

impl BasisRule {
    pub fn size(&self, v: &Potential, pt: &SemiclassicalPoint) -> usize {
        match *self {
            BasisRule::Fixed { size } => size,
            BasisRule::Covering { min, max, tol } => {
                let r = symbol_support_radius(v, pt.energy(), tol);
                let need = (r * r / (2.0 * pt.hbar())).ceil() as usize;
                need.clamp(min, max)
            }
        }
    }
}

impl Default for BasisRule {
    fn default() -> Self {
        BasisRule::Covering { min: 16, max: 6000, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SzegoRow {
    pub level: usize,
    pub hbar: f64,
    pub basis: usize,
    /// `hbar * sum f(lambda_j)`.
    pub trace_side: f64,
    /// `(1/2 pi) int f(V~(xi; E)) dxi`.
    pub integral_side: f64,
    pub gap: f64,
}

pub fn szego_check(v: &Potential, energy: f64, f: TestFunction, levels: &[usize], rule: BasisRule) -> Result<Vec<SzegoRow>> {
    if !f.vanishes_at_zero() {
        return invalid(format!("test function {f} must vanish at 0"));
    }
    let integral_side = if v.is_zero() { 0.0 } else { phase_plane_integral(v, energy, |t| f.eval(t))? / (2.0 * PI) };
    let mut rows = Vec::with_capacity(levels.len());
    for &n in levels {
        let pt = SemiclassicalPoint::new(energy, n)?;
        let basis = rule.size(v, &pt);
        let spec = reduced_spectrum(v, &pt, basis)?;
        let trace_side = spec.scaled_trace(|t| f.eval(t));
        rows.push(SzegoRow { level: n, hbar: pt.hbar(), basis, trace_side, integral_side, gap: (trace_side - integral_side).abs() });
    }
    Ok(rows)
}

/// A profile with its first two derivatives.
#[derive(Clone)]
pub struct TaylorProfile {
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d2f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl TaylorProfile {
    /// `exp(-a t)`.
    pub fn exponential(a: f64) -> Self {
        TaylorProfile {
            f: Arc::new(move |t| (-a * t).exp()),
            df: Arc::new(move |t| -a * (-a * t).exp()),
            d2f: Arc::new(move |t| a * a * (-a * t).exp()),
        }
    }

    /// `c0 + c1 t + c2 t^2`.
    pub fn quadratic(c0: f64, c1: f64, c2: f64) -> Self {
        TaylorProfile {
            f: Arc::new(move |t| c0 + c1 * t + c2 * t * t),
            df: Arc::new(move |t| c1 + 2.0 * c2 * t),
            d2f: Arc::new(move |_| 2.0 * c2),
        }
    }
}

/// `R(t) = int_0^1 int_0^1 u f''(u v (t - E) + E) du dv` on a 32 x 32
/// Gauss-Legendre grid, so that `f(t) = f(E) + (t-E) f'(E) + (t-E)^2 R(t)`.
pub fn taylor_remainder(profile: &TaylorProfile, energy: f64, t: f64) -> Result<f64> {
    let rule = gauss_rule(QuadratureKind::GaussLegendre, 32)?;
    let nodes = rule.on_interval(0.0, 1.0);
    let mut acc = 0.0;
    for &(u, wu) in &nodes {
        for &(v, wv) in &nodes {
            acc += wu * wv * u * (profile.d2f)(u * v * (t - energy) + energy);
        }
    }
    Ok(acc)
}

/// Two-sample Kolmogorov-Smirnov distance between empirical distributions.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

/// `V~(xi; E)` on a uniform `points x points` grid over the square of half
/// side `half_width`.
pub fn pushforward_sample(v: &Potential, energy: f64, half_width: f64, points: usize) -> Result<Vec<f64>> {
    let step = 2.0 * half_width / points as f64;
    (0..points * points)
        .into_par_iter()
        .map(|idx| {
            let x = -half_width + step * (idx / points) as f64 + 0.5 * step;
            let p = -half_width + step * (idx % points) as f64 + 0.5 * step;
            circle_average(v, PhasePoint::new(x, p), energy)
        })
        .collect()
}
