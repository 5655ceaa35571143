//! Gauss rules built by Golub–Welsch: nodes are eigenvalues of the Jacobi
//! matrix of the orthonormal polynomial family, polished by Newton steps, and
//! weights come from the Christoffel function `1 / sum_k p_k(x)^2`.
//!
//! Every rule also stores log-scaled weights `ln(w_i / omega(x_i))` where
//! `omega` is the rule's weight function. Gauss–Laguerre weights underflow
//! long before the scaled weights do, so integrands that already contain the
//! weight (e.g. `e^{-t/2} L_n(t)` factors) should use the scaled form.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::tridiagonal_eigenvalues;

const MAX_ORDER: usize = 20_000;
const RESCALE: f64 = 1e150;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    /// Weight `e^{-x}` on `(0, inf)`.
    GaussLaguerre,
    /// Weight `e^{-x^2}` on the real line.
    GaussHermite,
    /// Weight `1` on `[-1, 1]`.
    GaussLegendre,
}

impl QuadratureKind {
    fn name(self) -> &'static str {
        match self {
            Self::GaussLaguerre => "gauss-laguerre",
            Self::GaussHermite => "gauss-hermite",
            Self::GaussLegendre => "gauss-legendre",
        }
    }

    /// Jacobi matrix entries: `alpha_k` for `k < m`, `beta_k` for `k = 1..=m`
    /// (the last one is only used by the Newton polish).
    fn recurrence(self, m: usize) -> (Vec<f64>, Vec<f64>) {
        let alpha = (0..m)
            .map(|k| match self {
                Self::GaussLaguerre => (2 * k + 1) as f64,
                _ => 0.0,
            })
            .collect();
        let beta = (1..=m)
            .map(|k| {
                let k = k as f64;
                match self {
                    Self::GaussLaguerre => k,
                    Self::GaussHermite => (0.5 * k).sqrt(),
                    Self::GaussLegendre => k / (4.0 * k * k - 1.0).sqrt(),
                }
            })
            .collect();
        (alpha, beta)
    }

    /// Total mass of the weight function.
    fn mass(self) -> f64 {
        match self {
            Self::GaussLaguerre => 1.0,
            Self::GaussHermite => std::f64::consts::PI.sqrt(),
            Self::GaussLegendre => 2.0,
        }
    }

    /// `-ln omega(x)`.
    fn neg_log_weight(self, x: f64) -> f64 {
        match self {
            Self::GaussLaguerre => x,
            Self::GaussHermite => x * x,
            Self::GaussLegendre => 0.0,
        }
    }
}

impl fmt::Display for QuadratureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuadratureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss-laguerre" => Ok(Self::GaussLaguerre),
            "gauss-hermite" => Ok(Self::GaussHermite),
            "gauss-legendre" => Ok(Self::GaussLegendre),
            other => invalid(format!("unsupported quadrature kind '{other}'")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `ln(weights[i] / omega(nodes[i]))`.
    pub log_scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    /// `weights[i] / omega(nodes[i])`.
    pub fn scaled_weight(&self, i: usize) -> f64 {
        self.log_scaled_weights[i].exp()
    }

    /// Approximates `int f(x) omega(x) dx`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Approximates `int g(x) dx` where `g` already carries the decay of the
    /// weight function.
    pub fn integrate_scaled(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.log_scaled_weights)
            .map(|(&x, &lw)| lw.exp() * g(x))
            .sum()
    }

    /// Gauss–Legendre nodes and weights mapped onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        debug_assert_eq!(self.kind, QuadratureKind::GaussLegendre);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect()
    }

    /// CSV with a `node,weight` header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("node,weight\n");
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.push_str(&format!("{x:.17e},{w:.17e}\n"));
        }
        s
    }
}

/// Orthonormal `p_m(x) / p_m'(x)`, the Newton correction for a node.
fn newton_ratio(alpha: &[f64], beta: &[f64], x: f64) -> f64 {
    let m = alpha.len();
    let (mut p_prev, mut p) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    for k in 0..m {
        let b_prev = if k == 0 { 0.0 } else { beta[k - 1] };
        let p_next = ((x - alpha[k]) * p - b_prev * p_prev) / beta[k];
        let d_next = ((x - alpha[k]) * d + p - b_prev * d_prev) / beta[k];
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        let big = p.abs().max(d.abs());
        if big > RESCALE {
            p /= RESCALE;
            p_prev /= RESCALE;
            d /= RESCALE;
            d_prev /= RESCALE;
        }
    }
    p / d
}

/// `ln sum_{k<m} p_k(x)^2` for the orthonormal family.
fn log_christoffel_sum(alpha: &[f64], beta: &[f64], mass: f64, x: f64) -> f64 {
    let m = alpha.len();
    let mut log_scale = 0.0;
    let (mut p_prev, mut p) = (0.0, 1.0 / mass.sqrt());
    let mut sum = p * p;
    for k in 0..m.saturating_sub(1) {
        let b_prev = if k == 0 { 0.0 } else { beta[k - 1] };
        let p_next = ((x - alpha[k]) * p - b_prev * p_prev) / beta[k];
        p_prev = p;
        p = p_next;
        if p.abs() > RESCALE {
            p /= RESCALE;
            p_prev /= RESCALE;
            sum /= RESCALE * RESCALE;
            log_scale += 2.0 * RESCALE.ln();
        }
        sum += p * p;
    }
    sum.ln() + log_scale
}

fn build_rule(kind: QuadratureKind, order: usize) -> Result<QuadratureRule> {
    let (alpha, beta) = kind.recurrence(order);
    let mut nodes = tridiagonal_eigenvalues(&alpha, &beta[..order - 1])?;
    if nodes.len() != order {
        return Err(Error::Eigensolver(format!(
            "{kind} order {order}: expected {order} nodes, got {}",
            nodes.len()
        )));
    }
    // Newton polish, kept inside the gap to the neighbouring nodes.
    let raw = nodes.clone();
    for i in 0..order {
        let lo = if i == 0 { f64::NEG_INFINITY } else { 0.5 * (raw[i - 1] + raw[i]) };
        let hi = if i + 1 == order { f64::INFINITY } else { 0.5 * (raw[i] + raw[i + 1]) };
        let mut x = raw[i];
        for _ in 0..4 {
            let step = newton_ratio(&alpha, &beta, x);
            if !step.is_finite() {
                break;
            }
            let next = x - step;
            if !(next > lo && next < hi) {
                break;
            }
            let done = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300);
            x = next;
            if done {
                break;
            }
        }
        nodes[i] = x;
    }
    let mass = kind.mass();
    let mut weights = Vec::with_capacity(order);
    let mut log_scaled = Vec::with_capacity(order);
    for &x in &nodes {
        let lw = -log_christoffel_sum(&alpha, &beta, mass, x);
        weights.push(lw.exp());
        log_scaled.push(lw + kind.neg_log_weight(x));
    }
    if kind == QuadratureKind::GaussHermite {
        // Exact symmetry about the origin.
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -x;
            nodes[j] = x;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
            let l = 0.5 * (log_scaled[i] + log_scaled[j]);
            log_scaled[i] = l;
            log_scaled[j] = l;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
    }
    if kind == QuadratureKind::GaussLegendre {
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -x;
            nodes[j] = x;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
            log_scaled[i] = w.ln();
            log_scaled[j] = w.ln();
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
    }
    Ok(QuadratureRule {
        kind,
        order,
        nodes,
        weights,
        log_scaled_weights: log_scaled,
    })
}

type RuleCache = Mutex<HashMap<(QuadratureKind, usize), Arc<QuadratureRule>>>;

fn cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss rule of the given kind and order. Rules are cached and shared.
pub fn gauss_rule(kind: QuadratureKind, order: usize) -> Result<Arc<QuadratureRule>> {
    if order == 0 {
        return invalid("quadrature order must be at least 1");
    }
    if order > MAX_ORDER {
        return invalid(format!("quadrature order {order} exceeds {MAX_ORDER}"));
    }
    if let Some(rule) = cache().lock().expect("rule cache poisoned").get(&(kind, order)) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build_rule(kind, order)?);
    cache()
        .lock()
        .expect("rule cache poisoned")
        .insert((kind, order), Arc::clone(&rule));
    Ok(rule)
}
