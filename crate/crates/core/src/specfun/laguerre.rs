//! Laguerre polynomials `L_n` (normalized so that `L_n(0) = 1`), the
//! overflow-free Laguerre functions `e^{-t/2} L_n(t)`, and the `psi_n` kernel
//! that turns radial phase-space profiles into oscillator eigenvalues.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const RESCALE: f64 = 1e150;

/// The coupled triple `(E, n, hbar)` with `hbar (2n + 1) = E`.
///
/// `hbar` is always derived from the energy and the Landau index, so the
/// relation holds by construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalPoint {
    energy: f64,
    level: usize,
    hbar: f64,
}

impl SemiclassicalPoint {
    pub fn new(energy: f64, level: usize) -> Result<Self> {
        if !(energy.is_finite() && energy > 0.0) {
            return invalid(format!("energy must be positive and finite, got {energy}"));
        }
        Ok(Self {
            energy,
            level,
            hbar: energy / (2 * level + 1) as f64,
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Landau index `n`.
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Magnetic field strength `B = 2 / hbar`.
    pub fn field_strength(&self) -> f64 {
        2.0 / self.hbar
    }
}

/// `L_n(x)` by the three-term recurrence. Intended for moderate `x`; use
/// [`weighted_laguerre`] when `L_n(x)` itself may overflow.
pub fn laguerre_eval(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `e^{-t/2} L_n(t)` for `t >= 0`.
///
/// The recurrence runs on rescaled iterates; the `e^{-t/2}` weight is carried
/// as a running log-scale and applied once at the end, so no intermediate
/// overflows or underflows even when `L_n(t)` alone is far outside `f64`.
pub fn weighted_laguerre(n: usize, t: f64) -> f64 {
    if n == 0 {
        return (-0.5 * t).exp();
    }
    let mut log_scale = 0.0;
    let (mut prev, mut cur) = (1.0, 1.0 - t);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - t) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    cur * (log_scale - 0.5 * t).exp()
}

/// `e^{-t/2} L_k(t)` for every `k = 0..=n`.
pub fn weighted_laguerre_all(n: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut scales = Vec::with_capacity(n + 1);
    let mut log_scale = 0.0;
    let (mut prev, mut cur) = (0.0, 1.0);
    out.push(cur);
    scales.push(log_scale);
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - t) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out.push(cur);
        scales.push(log_scale);
    }
    for (v, s) in out.iter_mut().zip(scales) {
        *v *= (s - 0.5 * t).exp();
    }
    out
}

/// `(e^{-t/2} L_n(t), e^{-t/2} L_{n-1}(t))`, with the second entry zero for `n = 0`.
pub(crate) fn weighted_laguerre_pair(n: usize, t: f64) -> (f64, f64) {
    if n == 0 {
        return ((-0.5 * t).exp(), 0.0);
    }
    let mut log_scale = 0.0;
    let (mut prev, mut cur) = (1.0, 1.0 - t);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - t) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    let w = (log_scale - 0.5 * t).exp();
    (cur * w, prev * w)
}

/// `psi_n(u) = ((-1)^n / hbar) e^{-u/hbar} L_n(2u/hbar)`.
pub fn psi_eval(pt: &SemiclassicalPoint, u: f64) -> f64 {
    let n = pt.level();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign / pt.hbar() * weighted_laguerre(n, 2.0 * u / pt.hbar())
}

/// `d psi_n / du`, using `L_n' = n (L_n - L_{n-1}) / x`.
pub fn psi_derivative(pt: &SemiclassicalPoint, u: f64) -> f64 {
    let n = pt.level();
    let h = pt.hbar();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let t = 2.0 * u / h;
    let (wn, wm) = weighted_laguerre_pair(n, t);
    // e^{-t/2} L_n'(t), with the t -> 0 limit L_n'(0) = -n.
    let wdiff = if t > 1e-12 {
        n as f64 * (wn - wm) / t
    } else {
        -(n as f64) * (-0.5 * t).exp()
    };
    // psi = (s/h) e^{-t/2} L_n(t), dt/du = 2/h.
    sign / h * (2.0 / h) * (wdiff - 0.5 * wn)
}
