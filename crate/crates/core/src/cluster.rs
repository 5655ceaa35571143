//! Full two-dimensional check: `H_1 + hbar^2 K` in a tensor oscillator basis,
//! with `H_1` the oscillator in `(x1, p1)` and `K` the Weyl quantization of
//! the rotated symbol `W`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_defect, hermitian_eigenvalues};
use crate::potentials::Potential;
use crate::radon::{circle_average, PhasePoint};
use crate::reduced::{reduced_matrix, symbol_support_radius, Assembly, ClusterMeasure, Provenance, SpectrumMeta};
use crate::specfun::laguerre::SemiclassicalPoint;
use crate::specfun::quadrature::{gauss_rule, QuadratureKind};
use crate::weyl::{closed_form_validated, wigner_cross_closed_unit};

/// `W(x1, x2, p1, p2) = V((x1 + p2)/sqrt 2, (x2 + p1)/sqrt 2)`.
#[derive(Debug, Clone)]
pub struct RotatedSymbol {
    pub potential: Potential,
}

impl RotatedSymbol {
    pub fn new(potential: Potential) -> Self {
        RotatedSymbol { potential }
    }

    pub fn eval(&self, x1: f64, x2: f64, p1: f64, p2: f64) -> f64 {
        self.potential.eval([(x1 + p2) * FRAC_1_SQRT_2, (x2 + p1) * FRAC_1_SQRT_2])
    }
}

/// Truncation `e_a(x1) h_b(x2)`, `a < n1`, `b < n2`, at a common `hbar`.
/// The flat index is `a * n2 + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensorBasisSpec {
    pub n1: usize,
    pub n2: usize,
    pub hbar: f64,
}

impl TensorBasisSpec {
    pub fn new(n1: usize, n2: usize, hbar: f64) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return invalid("tensor basis sizes must be at least 1");
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return invalid(format!("hbar must be positive, got {hbar}"));
        }
        Ok(TensorBasisSpec { n1, n2, hbar })
    }

    pub fn dim(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.n2 + b
    }
}

/// Default memory cap for the full assembly: 2 GiB.
pub const DEFAULT_MEMORY_CAP: u64 = 2 << 30;

/// Peak bytes of [`assemble_full`] with grid order `q`.
pub fn memory_estimate(spec: &TensorBasisSpec, q: usize) -> u64 {
    let g = (q * q) as u64;
    let s1 = (spec.n1 * spec.n1) as u64;
    let s2 = (spec.n2 * spec.n2) as u64;
    let dim = spec.dim() as u64;
    // W on the product grid, the two real/imaginary Wigner tables, the
    // half-contracted product, the pair-indexed K, and the Hamiltonian with
    // eigensolver workspace.
    8 * g * g + 16 * g * (s1 + s2) + 16 * g * s2 + 16 * s1 * s2 + 48 * dim * dim
}

#[derive(Debug, Clone)]
pub struct FullAssembly {
    pub spec: TensorBasisSpec,
    pub order: usize,
    /// `K` in the flat tensor index.
    pub k: DMatrix<Complex64>,
    pub hermitian_defect: f64,
    pub memory_estimate: u64,
}

impl FullAssembly {
    /// `H_1 + hbar^2 K`.
    pub fn hamiltonian(&self) -> DMatrix<Complex64> {
        let h = self.spec.hbar;
        let mut out = self.k.map(|z| z * (h * h));
        for a in 0..self.spec.n1 {
            let e = h * (2 * a + 1) as f64;
            for b in 0..self.spec.n2 {
                let i = self.spec.index(a, b);
                out[(i, i)] += e;
            }
        }
        out
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.hamiltonian())
    }

    /// `<K (e_a x h_j), e_a x h_l>` for `j, l < size`.
    pub fn landau_block(&self, a: usize, size: usize) -> Result<DMatrix<Complex64>> {
        if a >= self.spec.n1 || size > self.spec.n2 {
            return invalid(format!("block ({a}, {size}) outside the {}x{} truncation", self.spec.n1, self.spec.n2));
        }
        Ok(DMatrix::from_fn(size, size, |l, j| self.k[(self.spec.index(a, l), self.spec.index(a, j))]))
    }
}

/// Wigner tables `G(e_a, e_c)(s, t) w_s w_t` for `a, c < size` on the tensor
/// Gauss-Hermite grid, split into real and imaginary parts; row `c * size + a`,
/// column `i * q + j`.
fn wigner_tables(size: usize, nodes: &[f64], weights: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let q = nodes.len();
    let cols: Vec<Vec<Complex64>> = (0..q * q)
        .into_par_iter()
        .map(|g| {
            let (i, j) = (g / q, g % q);
            let w = weights[i] * weights[j];
            let mut col = vec![Complex64::new(0.0, 0.0); size * size];
            for c in 0..size {
                for a in 0..=c {
                    let v = wigner_cross_closed_unit(a, c, nodes[i], nodes[j]) * w;
                    col[c * size + a] = v;
                    col[a * size + c] = v.conj();
                }
            }
            col
        })
        .collect();
    let re = DMatrix::from_fn(size * size, q * q, |r, g| cols[g][r].re);
    let im = DMatrix::from_fn(size * size, q * q, |r, g| cols[g][r].im);
    (re, im)
}

/// Assemble `K` by the factorized contraction `G1 W G2^T` on a `q x q` Gauss-
/// Hermite grid per factor. Refuses when the memory estimate exceeds `cap`.
pub fn assemble_full(v: &Potential, pt: &SemiclassicalPoint, spec: TensorBasisSpec, q: usize, cap: u64) -> Result<FullAssembly> {
    if pt.level() >= spec.n1 {
        return invalid(format!("Landau index {} outside factor-1 truncation {}", pt.level(), spec.n1));
    }
    if (spec.hbar - pt.hbar()).abs() > 1e-14 * pt.hbar() {
        return invalid("tensor basis hbar differs from the semiclassical point");
    }
    if q < 2 {
        return invalid("grid order must be at least 2");
    }
    let needed = memory_estimate(&spec, q);
    if needed > cap {
        return Err(Error::ResourceCap { what: format!("full assembly N1={} N2={} q={q}", spec.n1, spec.n2), needed, cap });
    }
    if !closed_form_validated() {
        return Err(Error::Consistency("Wigner closed form failed validation against quadrature".into()));
    }
    let rule = gauss_rule(QuadratureKind::GaussHermite, q)?;
    let nodes = rule.nodes.clone();
    let weights: Vec<f64> = (0..q).map(|i| rule.scaled_weight(i)).collect();
    let sh = spec.hbar.sqrt();
    let rot = RotatedSymbol::new(v.clone());

    let (a1, b1) = wigner_tables(spec.n1, &nodes, &weights);
    let (a2, b2) = if spec.n2 == spec.n1 { (a1.clone(), b1.clone()) } else { wigner_tables(spec.n2, &nodes, &weights) };

    // Row g1 = (x1, p1), column g2 = (x2, p2).
    let g = q * q;
    let rows: Vec<Vec<f64>> = (0..g)
        .into_par_iter()
        .map(|g1| {
            let x1 = sh * nodes[g1 / q];
            let p1 = sh * nodes[g1 % q];
            (0..g).map(|g2| rot.eval(x1, sh * nodes[g2 / q], p1, sh * nodes[g2 % q])).collect()
        })
        .collect();
    let w = DMatrix::from_fn(g, g, |r, c| rows[r][c]);
    drop(rows);

    let xr = &w * a2.transpose();
    let xi = &w * b2.transpose();
    drop(w);
    let tr = &a1 * &xr - &b1 * &xi;
    let ti = &a1 * &xi + &b1 * &xr;

    // T[(c, a), (d, b)] = <K (e_a x h_b), e_c x h_d>.
    let (n1, n2) = (spec.n1, spec.n2);
    let dim = spec.dim();
    let mut k = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for c in 0..n1 {
        for a in 0..n1 {
            for d in 0..n2 {
                for b in 0..n2 {
                    let (r, s) = (c * n1 + a, d * n2 + b);
                    k[(spec.index(c, d), spec.index(a, b))] = Complex64::new(tr[(r, s)], ti[(r, s)]);
                }
            }
        }
    }
    let defect = hermitian_defect(&k);
    if defect > 1e-8 {
        return Err(Error::Consistency(format!("assembled K has Hermitian defect {defect:.3e}")));
    }
    let sym = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (k[(i, j)] + k[(j, i)].conj()));
    Ok(FullAssembly { spec, order: q, k: sym, hermitian_defect: defect, memory_estimate: needed })
}

/// Eigenvalues with `|lambda - E| < hbar`, as `(lambda - E) / hbar^2`.
pub fn extract_cluster(spectrum: &[f64], pt: &SemiclassicalPoint, spec: &TensorBasisSpec) -> Result<ClusterMeasure> {
    let e = pt.energy();
    let h = pt.hbar();
    let mut eigenvalues: Vec<f64> = spectrum.iter().filter(|l| (*l - e).abs() < h).map(|l| (l - e) / (h * h)).collect();
    if eigenvalues.is_empty() {
        return Err(Error::Consistency(format!("no eigenvalues within hbar of E = {e}; truncation too small")));
    }
    eigenvalues.sort_by(f64::total_cmp);
    Ok(ClusterMeasure {
        eigenvalues,
        provenance: Provenance::Full2d,
        meta: SpectrumMeta {
            energy: e,
            level: pt.level(),
            hbar: h,
            basis: vec![spec.n1, spec.n2],
            grid_order: None,
            assembly: "full-2d".into(),
        },
    })
}

/// One row per eigenvalue: `(k, raw, scaled, in_cluster)`.
pub fn cluster_rows(spectrum: &[f64], pt: &SemiclassicalPoint) -> Vec<(usize, f64, f64, bool)> {
    let e = pt.energy();
    let h = pt.hbar();
    spectrum.iter().enumerate().map(|(k, &l)| (k, l, (l - e) / (h * h), (l - e).abs() < h)).collect()
}

/// `[min, max]` of `V~(xi; E)` over the plane, sampled on a square grid
/// covering the support, with the value at infinity included.
pub fn circle_average_range(v: &Potential, energy: f64, points: usize) -> Result<(f64, f64)> {
    if let Some(c) = v.as_constant() {
        return Ok((c, c));
    }
    let reach = symbol_support_radius(v, energy, 1e-12);
    let step = 2.0 * reach / (points - 1) as f64;
    let vals: Vec<f64> = (0..points * points)
        .into_par_iter()
        .map(|idx| circle_average(v, PhasePoint::new(-reach + step * (idx / points) as f64, -reach + step * (idx % points) as f64), energy))
        .collect::<Result<_>>()?;
    let lo = vals.iter().cloned().fold(0.0, f64::min);
    let hi = vals.iter().cloned().fold(0.0, f64::max);
    Ok((lo, hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoRouteReport {
    pub basis: usize,
    pub max_entry_gap: f64,
    /// Top eigenvalues, decreasing, of the block and the reduced matrix.
    pub block_top: Vec<f64>,
    pub reduced_top: Vec<f64>,
    pub max_relative_top_gap: f64,
    /// Entry gap above `1e-3`.
    pub flagged: bool,
    #[serde(skip)]
    pub block: DMatrix<Complex64>,
    #[serde(skip)]
    pub reduced: DMatrix<Complex64>,
}

pub const TWO_ROUTE_ENTRY_TOLERANCE: f64 = 1e-3;

fn top_decreasing(m: &DMatrix<Complex64>, count: usize) -> Result<Vec<f64>> {
    let mut v = hermitian_eigenvalues(m)?;
    v.reverse();
    v.truncate(count);
    Ok(v)
}

/// Compare the Landau-`n` block of an assembled `K` with the reduced matrix.
pub fn two_route_check(full: &FullAssembly, v: &Potential, pt: &SemiclassicalPoint, basis: usize, top: usize) -> Result<TwoRouteReport> {
    if basis > full.spec.n2 {
        return invalid(format!("basis {basis} exceeds N2 = {}", full.spec.n2));
    }
    let block = full.landau_block(pt.level(), basis)?;
    let reduced = reduced_matrix(v, pt, basis, Assembly::Auto)?.matrix;
    let max_entry_gap = (&block - &reduced).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let block_top = top_decreasing(&block, top)?;
    let reduced_top = top_decreasing(&reduced, top)?;
    let max_relative_top_gap = block_top
        .iter()
        .zip(&reduced_top)
        .map(|(a, b)| {
            let scale = a.abs().max(b.abs());
            if scale == 0.0 {
                0.0
            } else {
                (a - b).abs() / scale
            }
        })
        .fold(0.0, f64::max);
    Ok(TwoRouteReport {
        basis,
        max_entry_gap,
        block_top,
        reduced_top,
        max_relative_top_gap,
        flagged: max_entry_gap > TWO_ROUTE_ENTRY_TOLERANCE,
        block,
        reduced,
    })
}
