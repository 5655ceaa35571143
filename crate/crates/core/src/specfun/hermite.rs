//! L²-normalized eigenfunctions `e_n(x) = hbar^{-1/4} g_n(x / sqrt(hbar))` of
//! `-hbar^2 d²/dx² + x²` (eigenvalue `hbar (2n + 1)`).

use std::f64::consts::PI;

const RESCALE: f64 = 1e150;

/// Normalized Hermite functions `g_k(s)` for `k = 0..=nmax` at `hbar = 1`.
///
/// The recurrence `g_{k+1} = sqrt(2/(k+1)) s g_k - sqrt(k/(k+1)) g_{k-1}` is
/// run on rescaled iterates with the Gaussian factor kept as a log-scale, so
/// large `|s|` neither underflows the seed nor overflows the tail.
pub fn hermite_functions_unit(nmax: usize, s: f64) -> Vec<f64> {
    let mut vals = Vec::with_capacity(nmax + 1);
    let mut scales = Vec::with_capacity(nmax + 1);
    let mut log_scale = -0.5 * s * s - 0.25 * PI.ln();
    let (mut prev, mut cur) = (0.0, 1.0);
    vals.push(cur);
    scales.push(log_scale);
    for k in 0..nmax {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * s * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
        vals.push(cur);
        scales.push(log_scale);
    }
    vals.iter().zip(scales).map(|(v, l)| v * l.exp()).collect()
}

/// `e_k(x)` for `k = 0..=nmax`.
pub fn hermite_functions(nmax: usize, x: f64, hbar: f64) -> Vec<f64> {
    let norm = hbar.powf(-0.25);
    let mut v = hermite_functions_unit(nmax, x / hbar.sqrt());
    v.iter_mut().for_each(|g| *g *= norm);
    v
}

/// `e_n(x)`.
pub fn hermite_function(n: usize, x: f64, hbar: f64) -> f64 {
    hermite_functions(n, x, hbar)[n]
}
