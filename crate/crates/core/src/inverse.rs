//! Recovery of ring profiles from the invariant `I(r)` by regularized
//! deconvolution on a logarithmic grid, and Sobolev-norm invariants.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::potentials::Potential;
use crate::radon::{ring_average_fhat2, spectral_invariant_i};
use crate::specfun::bessel::bessel_j0;
use crate::specfun::quadrature::{gauss_rule, QuadratureKind};

/// Geometric grid `rho_min * q^j`, `j = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub rho_min: f64,
    pub rho_max: f64,
    pub count: usize,
}

impl LogGrid {
    pub fn new(rho_min: f64, rho_max: f64, count: usize) -> Result<Self> {
        if !(rho_min > 0.0 && rho_max > rho_min && rho_max.is_finite()) {
            return invalid(format!("log grid needs 0 < min < max, got [{rho_min}, {rho_max}]"));
        }
        if count < 2 {
            return invalid("log grid needs at least two nodes");
        }
        Ok(LogGrid { rho_min, rho_max, count })
    }

    pub fn log_step(&self) -> f64 {
        (self.rho_max / self.rho_min).ln() / (self.count - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let (a, h) = (self.rho_min.ln(), self.log_step());
        (0..self.count).map(|j| if j + 1 == self.count { self.rho_max } else { (a + h * j as f64).exp() }).collect()
    }

    /// Trapezoid weights in `d(ln rho)`.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.log_step();
        (0..self.count).map(|j| if j == 0 || j + 1 == self.count { 0.5 * h } else { h }).collect()
    }

    /// Index range `[count/4, 3 count/4)`.
    pub fn middle_half(&self) -> std::ops::Range<usize> {
        self.count / 4..(3 * self.count).div_ceil(4)
    }
}

impl fmt::Display for LogGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log:{}:{}:{}", self.rho_min, self.rho_max, self.count)
    }
}

impl FromStr for LogGrid {
    type Err = Error;

    /// `log:min:max:count`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 || parts[0] != "log" {
            return invalid(format!("grid '{s}' is not of the form log:min:max:count"));
        }
        let num = |t: &str| t.parse::<f64>().map_err(|e| Error::InvalidInput(format!("grid '{s}': {e}")));
        let count = parts[3].parse::<usize>().map_err(|e| Error::InvalidInput(format!("grid '{s}': {e}")))?;
        LogGrid::new(num(parts[1])?, num(parts[2])?, count)
    }
}

/// `K(s) = J0(s)^2`.
pub fn kernel(s: f64) -> f64 {
    let j = bessel_j0(s);
    j * j
}

/// `W(t) = t^{-2} int_0^{2 pi} |V_hat(cos phi / t, sin phi / t)|^2 dphi` on a
/// log grid, so that `I(r) = int_0^inf K(r/t) W(t) dt/t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingProfile {
    pub grid: LogGrid,
    pub values: Vec<f64>,
}

impl RingProfile {
    pub fn new(grid: LogGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.count {
            return invalid(format!("{} values for a grid of {}", values.len(), grid.count));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return invalid(format!("ring profile must be nonnegative, found {v}"));
        }
        Ok(RingProfile { grid, values })
    }

    pub fn zero(grid: LogGrid) -> Self {
        RingProfile { grid, values: vec![0.0; grid.count] }
    }

    /// From the potential's Fourier transform.
    pub fn of_potential(v: &Potential, grid: LogGrid) -> Result<Self> {
        let nodes = grid.nodes();
        let values = nodes.par_iter().map(|&t| Ok(ring_average_fhat2(v, 1.0 / t)? / (t * t))).collect::<Result<Vec<_>>>()?;
        RingProfile::new(grid, values)
    }

    /// Closed form for the unit Gaussian: `2 pi^3 t^{-2} exp(-1/(2 t^2))`.
    pub fn unit_gaussian(grid: LogGrid) -> Self {
        let values = grid.nodes().iter().map(|t| 2.0 * PI.powi(3) / (t * t) * (-0.5 / (t * t)).exp()).collect();
        RingProfile { grid, values }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        RingProfile::new(self.grid, self.values.iter().map(|v| c * v).collect())
    }
}

/// `A[i, j] = K(r_i / t_j) w_j`.
pub fn kernel_matrix(grid: &LogGrid, r_nodes: &[f64]) -> Result<DMatrix<f64>> {
    if r_nodes.iter().any(|r| !(*r > 0.0)) {
        return invalid("evaluation radii must be positive");
    }
    let t = grid.nodes();
    let w = grid.weights();
    let rows: Vec<Vec<f64>> = r_nodes.par_iter().map(|&r| t.iter().zip(&w).map(|(tj, wj)| kernel(r / tj) * wj).collect()).collect();
    if let Some(i) = rows.iter().position(|row| row.iter().all(|x| *x == 0.0)) {
        return Err(Error::Consistency(format!("kernel row {i} vanishes identically")));
    }
    Ok(DMatrix::from_fn(r_nodes.len(), grid.count, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardResult {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest integrand `K(r/t) W(t)` at the two grid ends, over the peak
    /// integrand on the whole grid.
    pub boundary_ratio: f64,
}

/// Largest admissible boundary ratio in [`forward_convolve`].
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

/// `I(r_i) = sum_j K(r_i / t_j) W(t_j) w_j`, refused when the integrand at
/// the grid ends is not negligible.
pub fn forward_convolve(w: &RingProfile, r_nodes: &[f64]) -> Result<ForwardResult> {
    let a = kernel_matrix(&w.grid, r_nodes)?;
    let last = w.grid.count - 1;
    let weights = w.grid.weights();
    let mut peak: f64 = 0.0;
    let mut edge: f64 = 0.0;
    for i in 0..r_nodes.len() {
        for j in 0..=last {
            let x = (a[(i, j)] / weights[j] * w.values[j]).abs();
            peak = peak.max(x);
            if j == 0 || j == last {
                edge = edge.max(x);
            }
        }
    }
    let boundary_ratio = if peak == 0.0 { 0.0 } else { edge / peak };
    if boundary_ratio > BOUNDARY_TOLERANCE {
        return Err(Error::Consistency(format!("ring profile grid too narrow: boundary integrand ratio {boundary_ratio:.3e}")));
    }
    let values = (&a * DVector::from_column_slice(&w.values)).iter().copied().collect();
    Ok(ForwardResult { r: r_nodes.to_vec(), values, boundary_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularization {
    Fixed(f64),
    /// Discrepancy principle: largest `lambda` with residual at most
    /// `1.5 * noise_floor * |i|`.
    Auto { noise_floor: f64 },
}

impl FromStr for Regularization {
    type Err = Error;

    /// `auto`, `auto:floor`, or a number.
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Regularization::Auto { noise_floor: DEFAULT_NOISE_FLOOR });
        }
        if let Some(rest) = s.strip_prefix("auto:") {
            let f = rest.parse::<f64>().map_err(|e| Error::InvalidInput(format!("lambda '{s}': {e}")))?;
            if !(f > 0.0) {
                return invalid("noise floor must be positive");
            }
            return Ok(Regularization::Auto { noise_floor: f });
        }
        let l = s.parse::<f64>().map_err(|e| Error::InvalidInput(format!("lambda '{s}': {e}")))?;
        if !(l >= 0.0) {
            return invalid("lambda must be nonnegative");
        }
        Ok(Regularization::Fixed(l))
    }
}

/// Relative noise floor of the invariant samples used by `auto`.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-8;

const DISCREPANCY_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub residual: f64,
    pub solution_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deconvolution {
    pub profile: RingProfile,
    /// Ridge solution before clipping.
    pub unclipped: Vec<f64>,
    pub lambda: f64,
    /// `|A w - i|` for the unclipped solution.
    pub residual: f64,
    /// Same, relative to `|i|`.
    pub relative_residual: f64,
    /// Negative mass removed by clipping, relative to the total mass.
    pub clipped_fraction: f64,
    pub condition_number: f64,
    pub path: Vec<PathPoint>,
    pub residual_flagged: bool,
    /// False when even the smallest ridge parameter misses the discrepancy target.
    pub discrepancy_reached: bool,
    pub ill_conditioned: bool,
}

struct RidgeSolver {
    u_t_i: Vec<f64>,
    sigma: Vec<f64>,
    v: DMatrix<f64>,
    data_norm_sq: f64,
}

impl RidgeSolver {
    fn new(a: DMatrix<f64>, data: &[f64]) -> Result<Self> {
        let svd = nalgebra::SVD::try_new(a, true, true, f64::EPSILON, 0).ok_or_else(|| Error::Eigensolver("SVD of the kernel matrix failed".into()))?;
        let u = svd.u.ok_or_else(|| Error::Eigensolver("SVD without U".into()))?;
        let v = svd.v_t.ok_or_else(|| Error::Eigensolver("SVD without V".into()))?.transpose();
        let d = DVector::from_column_slice(data);
        let u_t_i = (u.transpose() * &d).iter().copied().collect();
        Ok(RidgeSolver { u_t_i, sigma: svd.singular_values.iter().copied().collect(), v, data_norm_sq: d.norm_squared() })
    }

    fn filter(&self, lambda: f64) -> Vec<f64> {
        self.sigma.iter().zip(&self.u_t_i).map(|(s, b)| if *s == 0.0 { 0.0 } else { s * b / (s * s + lambda * lambda) }).collect()
    }

    fn residual(&self, lambda: f64) -> f64 {
        // |A w - i|^2 = |i|^2 - |P i|^2 + sum (lambda^2 / (s^2 + lambda^2))^2 b^2.
        let mut inside = 0.0;
        let mut proj = 0.0;
        for (s, b) in self.sigma.iter().zip(&self.u_t_i) {
            let f = lambda * lambda / (s * s + lambda * lambda);
            inside += f * f * b * b;
            proj += b * b;
        }
        (inside + (self.data_norm_sq - proj).max(0.0)).sqrt()
    }

    fn solve(&self, lambda: f64) -> Vec<f64> {
        let c = DVector::from_vec(self.filter(lambda));
        (self.v.columns(0, self.sigma.len()) * c).iter().copied().collect()
    }

    fn condition(&self) -> f64 {
        let max = self.sigma.iter().cloned().fold(0.0, f64::max);
        let min = self.sigma.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

/// Ridge-regularized solution of `A w = i` on `grid`, clipped to `w >= 0`.
pub fn mellin_deconvolve(r_nodes: &[f64], data: &[f64], grid: LogGrid, reg: Regularization) -> Result<Deconvolution> {
    if r_nodes.len() != data.len() {
        return invalid("radii and samples differ in length");
    }
    if data.iter().any(|x| !x.is_finite()) {
        return invalid("invariant samples must be finite");
    }
    let data_norm = data.iter().map(|x| x * x).sum::<f64>().sqrt();
    if data_norm == 0.0 {
        return Ok(Deconvolution {
            profile: RingProfile::zero(grid),
            unclipped: vec![0.0; grid.count],
            lambda: 0.0,
            residual: 0.0,
            relative_residual: 0.0,
            clipped_fraction: 0.0,
            condition_number: f64::NAN,
            path: Vec::new(),
            residual_flagged: false,
            discrepancy_reached: true,
            ill_conditioned: false,
        });
    }
    let a = kernel_matrix(&grid, r_nodes)?;
    let solver = RidgeSolver::new(a, data)?;
    let smax = solver.sigma.iter().cloned().fold(0.0, f64::max);
    let path: Vec<PathPoint> = (0..=64)
        .map(|k| {
            let lambda = smax * 10f64.powf(-16.0 + 0.25 * k as f64);
            let w = solver.solve(lambda);
            PathPoint { lambda, residual: solver.residual(lambda), solution_norm: w.iter().map(|x| x * x).sum::<f64>().sqrt() }
        })
        .collect();
    let (lambda, target) = match reg {
        Regularization::Fixed(l) => (l, None),
        Regularization::Auto { noise_floor } => {
            let target = DISCREPANCY_FACTOR * noise_floor * data_norm;
            // The residual grows with lambda; bisect in log lambda.
            let mut lo = smax * 1e-16;
            let mut hi = smax;
            if solver.residual(lo) > target {
                (lo, Some(target))
            } else if solver.residual(hi) <= target {
                (hi, Some(target))
            } else {
                for _ in 0..80 {
                    let mid = (lo * hi).sqrt();
                    if solver.residual(mid) <= target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (lo, Some(target))
            }
        }
    };
    let unclipped = solver.solve(lambda);
    let residual = solver.residual(lambda);
    let w = grid.weights();
    let total: f64 = unclipped.iter().zip(&w).map(|(x, wj)| x.abs() * wj).sum();
    let negative: f64 = unclipped.iter().zip(&w).filter(|(x, _)| **x < 0.0).map(|(x, wj)| -x * wj).sum();
    let clipped: Vec<f64> = unclipped.iter().map(|x| x.max(0.0)).collect();
    let condition_number = solver.condition();
    Ok(Deconvolution {
        profile: RingProfile::new(grid, clipped)?,
        unclipped,
        lambda,
        residual,
        relative_residual: residual / data_norm,
        clipped_fraction: if total == 0.0 { 0.0 } else { negative / total },
        condition_number,
        path,
        residual_flagged: target.is_some_and(|t| residual > 10.0 * t),
        discrepancy_reached: target.is_none_or(|t| residual <= t),
        ill_conditioned: condition_number > 1e12,
    })
}

/// `|a - b| / |b|` in the Euclidean norm over `range`.
pub fn relative_l2(a: &[f64], b: &[f64], range: std::ops::Range<usize>) -> f64 {
    let num: f64 = range.clone().map(|i| (a[i] - b[i]).powi(2)).sum();
    let den: f64 = range.map(|i| b[i] * b[i]).sum();
    (num / den).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SobolevConvention {
    /// Weight `(1 + |xi|^2)^{s/2}`.
    Half,
    /// Weight `(1 + |xi|^2)^s`.
    Standard,
}

impl FromStr for SobolevConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(SobolevConvention::Half),
            "standard" => Ok(SobolevConvention::Standard),
            _ => invalid(format!("unknown Sobolev convention '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolevValue {
    pub s: f64,
    pub convention: SobolevConvention,
    /// `int (1 + |xi|^2)^p |V_hat(xi)|^2 dxi`.
    pub norm_sq: f64,
    pub warning: Option<String>,
}

fn sobolev_radial(v: &Potential, power: f64, rmax: f64, order: usize) -> Result<f64> {
    let rule = gauss_rule(QuadratureKind::GaussLegendre, order)?;
    let nodes = rule.on_interval(0.0, rmax);
    let terms: Vec<f64> = nodes.par_iter().map(|&(rho, w)| Ok(w * rho * (1.0 + rho * rho).powf(power) * ring_average_fhat2(v, rho)?)).collect::<Result<_>>()?;
    Ok(terms.iter().sum())
}

/// Squared Sobolev norm `int (1 + |xi|^2)^p |V_hat|^2 dxi` in polar form,
/// with `p = s/2` or `p = s` by convention.
pub fn sobolev_norm_sq(v: &Potential, s: f64, convention: SobolevConvention) -> Result<SobolevValue> {
    if !s.is_finite() {
        return invalid("Sobolev index must be finite");
    }
    if let Some(c) = v.as_constant() {
        if c != 0.0 {
            return invalid("a nonzero constant has no square-integrable Fourier transform");
        }
    }
    if v.is_zero() {
        return Ok(SobolevValue { s, convention, norm_sq: 0.0, warning: None });
    }
    let power = match convention {
        SobolevConvention::Half => 0.5 * s,
        SobolevConvention::Standard => s,
    };
    // Stretch the cutoff so the polynomial weight cannot outrun the decay.
    let base = v.frequency_extent(1e-16);
    let rmax = if power > 0.0 { base * (1.0 + power / 8.0).sqrt().max(1.0) + power.sqrt() } else { base };
    let warning = if !v.has_closed_forms() && power > 2.0 {
        Some(format!("no closed-form transform; weight exponent {power} may amplify quadrature error"))
    } else {
        None
    };
    let coarse = sobolev_radial(v, power, rmax, 128)?;
    let fine = sobolev_radial(v, power, rmax, 256)?;
    if (coarse - fine).abs() > 1e-10 * fine.abs() {
        return Err(Error::NonConvergence { what: format!("Sobolev norm s={s}"), first: coarse, second: fine });
    }
    Ok(SobolevValue { s, convention, norm_sq: fine, warning })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsospectralReport {
    pub r: Vec<f64>,
    pub i_first: Vec<f64>,
    pub i_second: Vec<f64>,
    pub max_relative_gap: f64,
    /// Radius of the largest gap.
    pub worst_r: f64,
    pub tolerance: f64,
    pub i_isospectral: bool,
    /// `(s, first, second, relative gap)`, only when I-isospectral.
    pub sobolev: Vec<(f64, f64, f64, f64)>,
    pub norms_agree: bool,
}

/// Compare `I(r)` of two potentials; when they agree to `tolerance`, compare
/// Sobolev norms as well.
pub fn isospectral_compare(v1: &Potential, v2: &Potential, r_nodes: &[f64], s_list: &[f64], tolerance: f64) -> Result<IsospectralReport> {
    if r_nodes.is_empty() {
        return invalid("at least one radius is needed");
    }
    let eval = |v: &Potential| r_nodes.par_iter().map(|&r| spectral_invariant_i(v, r)).collect::<Result<Vec<f64>>>();
    let i_first = eval(v1)?;
    let i_second = eval(v2)?;
    let mut max_relative_gap: f64 = 0.0;
    let mut worst_r = r_nodes[0];
    for ((a, b), r) in i_first.iter().zip(&i_second).zip(r_nodes) {
        let scale = a.abs().max(b.abs());
        let gap = if scale == 0.0 { 0.0 } else { (a - b).abs() / scale };
        if gap > max_relative_gap {
            max_relative_gap = gap;
            worst_r = *r;
        }
    }
    let i_isospectral = max_relative_gap <= tolerance;
    let mut sobolev = Vec::new();
    let mut norms_agree = true;
    if i_isospectral {
        for &s in s_list {
            let a = sobolev_norm_sq(v1, s, SobolevConvention::Half)?.norm_sq;
            let b = sobolev_norm_sq(v2, s, SobolevConvention::Half)?.norm_sq;
            let gap = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            norms_agree &= gap <= tolerance;
            sobolev.push((s, a, b, gap));
        }
    }
    Ok(IsospectralReport { r: r_nodes.to_vec(), i_first, i_second, max_relative_gap, worst_r, tolerance, i_isospectral, sobolev, norms_agree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{make_mixture, GaussianSpec};

    fn wide() -> LogGrid {
        LogGrid::new(0.05, 2e5, 240).unwrap()
    }

    fn mixture() -> Potential {
        make_mixture(&[
            GaussianSpec { center: [0.3, -0.2], inverse_width: 1.0, amplitude: 1.0 },
            GaussianSpec { center: [-0.5, 0.4], inverse_width: 2.0, amplitude: 0.5 },
        ])
        .unwrap()
    }

    #[test]
    fn grid_basics() {
        let g = LogGrid::new(0.1, 10.0, 5).unwrap();
        let n = g.nodes();
        assert!((n[2] - 1.0).abs() < 1e-15 && n[4] == 10.0);
        for w in n.windows(3) {
            assert!((w[1] / w[0] - w[2] / w[1]).abs() < 1e-12);
        }
        assert_eq!("log:0.1:10:5".parse::<LogGrid>().unwrap(), g);
        assert_eq!(g.to_string().parse::<LogGrid>().unwrap(), g);
        for bad in ["log:1:0.5:4", "lin:0.1:1:4", "log:0.1:1:1", "log:a:1:4"] {
            assert!(bad.parse::<LogGrid>().is_err(), "{bad}");
        }
        assert_eq!(LogGrid::new(1.0, 2.0, 8).unwrap().middle_half(), 2..6);
    }

    #[test]
    fn analytic_profile_matches_fourier() {
        let grid = LogGrid::new(0.2, 20.0, 9).unwrap();
        let exact = RingProfile::unit_gaussian(grid);
        let numeric = RingProfile::of_potential(&Potential::unit_gaussian(), grid).unwrap();
        for (a, b) in exact.values.iter().zip(&numeric.values) {
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
        assert!(RingProfile::new(grid, vec![-1.0; 9]).is_err());
    }

    #[test]
    fn forward_matches_invariant() {
        let w = RingProfile::unit_gaussian(LogGrid::new(0.02, 2e5, 600).unwrap());
        let r = [0.5, 1.0, 2.0];
        let fwd = forward_convolve(&w, &r).unwrap();
        for (k, &rr) in r.iter().enumerate() {
            let want = spectral_invariant_i(&Potential::unit_gaussian(), rr).unwrap();
            assert!(((fwd.values[k] - want) / want).abs() < 1e-5, "r={rr}: {} vs {want}", fwd.values[k]);
        }
    }

    #[test]
    fn forward_trivial_cases() {
        let grid = wide();
        let r = grid.nodes();
        let zero = forward_convolve(&RingProfile::zero(grid), &r).unwrap();
        assert!(zero.values.iter().all(|x| *x == 0.0));
        let w = RingProfile::unit_gaussian(grid);
        let a = forward_convolve(&w, &r).unwrap().values;
        let b = forward_convolve(&w.scaled(3.5).unwrap(), &r).unwrap().values;
        let scale = b.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        for (x, y) in a.iter().zip(&b) {
            assert!((3.5 * x - y).abs() <= 1e-14 * scale);
        }
        let narrow = RingProfile::unit_gaussian(LogGrid::new(0.1, 10.0, 64).unwrap());
        assert!(forward_convolve(&narrow, &[1.0]).is_err());
    }

    #[test]
    fn round_trip_recovers_profile() {
        let grid = wide();
        let r = grid.nodes();
        let truth = RingProfile::unit_gaussian(grid);
        let data = forward_convolve(&truth, &r).unwrap().values;
        let dec = mellin_deconvolve(&r, &data, grid, Regularization::Auto { noise_floor: DEFAULT_NOISE_FLOOR }).unwrap();
        let err = relative_l2(&dec.profile.values, &truth.values, grid.middle_half());
        assert!(err <= 0.03, "relative L2 {err}");
        assert!(dec.clipped_fraction <= 0.01, "{}", dec.clipped_fraction);
        assert!(!dec.residual_flagged);
        assert_eq!(dec.path.len(), 65);
        assert!(dec.condition_number > 1.0);
    }

    #[test]
    fn deconvolution_zero_and_linear() {
        let grid = LogGrid::new(0.05, 2e5, 120).unwrap();
        let r = grid.nodes();
        let zero = mellin_deconvolve(&r, &vec![0.0; r.len()], grid, Regularization::Fixed(1e-6)).unwrap();
        assert!(zero.profile.values.iter().all(|x| *x == 0.0));
        let i1 = forward_convolve(&RingProfile::unit_gaussian(grid), &r).unwrap().values;
        let i2: Vec<f64> = r.iter().map(|x| 1.0 / (1.0 + x)).collect();
        let sum: Vec<f64> = i1.iter().zip(&i2).map(|(a, b)| a + 2.0 * b).collect();
        let reg = Regularization::Fixed(1e-4);
        let d1 = mellin_deconvolve(&r, &i1, grid, reg).unwrap().unclipped;
        let d2 = mellin_deconvolve(&r, &i2, grid, reg).unwrap().unclipped;
        let ds = mellin_deconvolve(&r, &sum, grid, reg).unwrap().unclipped;
        let scale = ds.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for k in 0..grid.count {
            assert!((d1[k] + 2.0 * d2[k] - ds[k]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn regularization_parsing() {
        assert_eq!("auto".parse::<Regularization>().unwrap(), Regularization::Auto { noise_floor: DEFAULT_NOISE_FLOOR });
        assert_eq!("auto:1e-6".parse::<Regularization>().unwrap(), Regularization::Auto { noise_floor: 1e-6 });
        assert_eq!("0.01".parse::<Regularization>().unwrap(), Regularization::Fixed(0.01));
        assert!("-1".parse::<Regularization>().is_err());
        assert!("auto:0".parse::<Regularization>().is_err());
    }

    #[test]
    fn sobolev_values() {
        let g = Potential::unit_gaussian();
        let s0 = sobolev_norm_sq(&g, 0.0, SobolevConvention::Half).unwrap().norm_sq;
        assert!((s0 - 2.0 * PI.powi(3)).abs() < 1e-10 * s0);
        // int (1 + rho^2) pi^2 e^{-rho^2/2} 2 pi rho drho = 2 pi^3 (1 + 2).
        let s2 = sobolev_norm_sq(&g, 2.0, SobolevConvention::Half).unwrap().norm_sq;
        assert!((s2 - 6.0 * PI.powi(3)).abs() < 1e-10 * s2);
        let s1 = sobolev_norm_sq(&g, 1.0, SobolevConvention::Standard).unwrap().norm_sq;
        assert!((s1 - s2).abs() < 1e-10 * s2);
        let mut prev = 0.0;
        for s in [-2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
            let v = sobolev_norm_sq(&mixture(), s, SobolevConvention::Half).unwrap().norm_sq;
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(sobolev_norm_sq(&Potential::zero(), 1.0, SobolevConvention::Half).unwrap().norm_sq, 0.0);
        assert!(sobolev_norm_sq(&Potential::constant(1.0), 1.0, SobolevConvention::Half).is_err());
    }

    #[test]
    fn rotation_and_translation_isospectral() {
        let v = mixture();
        let r = [0.5, 1.0, 2.0];
        let s = [-1.0, 0.0, 1.0, 2.0];
        for other in [v.rotated(0.7), v.translated([1.3, -0.4])] {
            let rep = isospectral_compare(&v, &other, &r, &s, 1e-8).unwrap();
            assert!(rep.i_isospectral, "{}", rep.max_relative_gap);
            assert!(rep.norms_agree, "{:?}", rep.sobolev);
        }
        let scaled = isospectral_compare(&v, &v.scaled(1.1), &r, &s, 1e-8).unwrap();
        assert!(!scaled.i_isospectral);
        assert!(scaled.sobolev.is_empty());
        assert!(r.contains(&scaled.worst_r));
    }

    #[test]
    fn rotated_profiles_recover_identically() {
        let grid = LogGrid::new(0.05, 2e5, 120).unwrap();
        let r = grid.nodes();
        let v = mixture();
        let a = forward_convolve(&RingProfile::of_potential(&v, grid).unwrap(), &r).unwrap().values;
        let b = forward_convolve(&RingProfile::of_potential(&v.rotated(1.1), grid).unwrap(), &r).unwrap().values;
        let reg = Regularization::Fixed(1e-6);
        let da = mellin_deconvolve(&r, &a, grid, reg).unwrap().unclipped;
        let db = mellin_deconvolve(&r, &b, grid, reg).unwrap().unclipped;
        let scale = da.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in da.iter().zip(&db) {
            assert!((x - y).abs() <= 1e-6 * scale);
        }
    }
}
