//! Gevrey weights `M_{r,α} = r^{|α|}(|α|+1)⁴/|α|!`, `L_{ρ,m} = ρ^{m+1}/m!`
//! and numeric scans of the weight-ratio inequalities used to close the
//! analytic energy estimates. All ratios are formed in log space.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::VerticalGrid;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Largest order accepted by the weight evaluators.
pub const MAX_ORDER: usize = 30;

/// Default enumeration bound for the scans.
pub const DEFAULT_CAP: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    M,
    L,
}

/// `ln n!` for `n = 0..=MAX_ORDER + 1`.
fn log_factorials() -> Vec<f64> {
    let mut out = vec![0.0; MAX_ORDER + 2];
    for n in 1..out.len() {
        out[n] = out[n - 1] + (n as f64).ln();
    }
    out
}

#[derive(Clone, Debug)]
pub struct MultiIndexWeight {
    kind: WeightKind,
    r: f64,
    log_fact: Vec<f64>,
}

impl MultiIndexWeight {
    pub fn new(kind: WeightKind, r: f64) -> Result<Self> {
        let ok = match kind {
            WeightKind::M => r > 0.0 && r < 1.0,
            WeightKind::L => r > 0.0 && r.is_finite(),
        };
        if !ok {
            return Err(Error::Parameter(format!(
                "weight parameter {r} out of range for {kind:?}"
            )));
        }
        Ok(Self {
            kind,
            r,
            log_fact: log_factorials(),
        })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Cached `ln n!`.
    pub fn log_factorial(&self, n: usize) -> Result<f64> {
        self.log_fact
            .get(n)
            .copied()
            .ok_or_else(|| Error::Parameter(format!("order {n} exceeds the cap {MAX_ORDER}")))
    }

    /// Natural log of the weight at order `n` (`|α|` for `M`, `m` for `L`).
    pub fn log_value(&self, n: usize) -> Result<f64> {
        if n > MAX_ORDER {
            return Err(Error::Parameter(format!(
                "order {n} exceeds the cap {MAX_ORDER}"
            )));
        }
        let lf = self.log_fact[n];
        Ok(match self.kind {
            WeightKind::M => n as f64 * self.r.ln() + 4.0 * ((n + 1) as f64).ln() - lf,
            WeightKind::L => (n + 1) as f64 * self.r.ln() - lf,
        })
    }

    pub fn value(&self, n: usize) -> Result<f64> {
        Ok(self.log_value(n)?.exp())
    }

    pub fn at(&self, alpha: [usize; 3]) -> Result<f64> {
        self.value(alpha.iter().sum())
    }
}

pub fn gevrey_weight(kind: WeightKind, r: f64, n: usize) -> Result<f64> {
    MultiIndexWeight::new(kind, r)?.value(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Inequality {
    #[serde(rename = "A.3")]
    A3,
    #[serde(rename = "A.4")]
    A4,
    #[serde(rename = "A.5")]
    A5,
    #[serde(rename = "A.6")]
    A6,
}

impl Inequality {
    pub const ALL: [Inequality; 4] = [
        Inequality::A3,
        Inequality::A4,
        Inequality::A5,
        Inequality::A6,
    ];

    fn admits(self, beta: [usize; 3]) -> bool {
        match self {
            Inequality::A3 | Inequality::A5 => beta[2] == 0,
            Inequality::A4 | Inequality::A6 => beta[2] >= 1,
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inequality::A3 => "A.3",
            Inequality::A4 => "A.4",
            Inequality::A5 => "A.5",
            Inequality::A6 => "A.6",
        })
    }
}

impl FromStr for Inequality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Inequality::ALL
            .into_iter()
            .find(|i| i.to_string() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown inequality {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanResult {
    pub inequality: Inequality,
    pub r: f64,
    pub cap: usize,
    /// Smallest `C` making the inequality hold on the scanned range.
    pub constant: f64,
    pub alpha: [usize; 3],
    pub beta: [usize; 3],
    pub pairs: usize,
}

/// Multi-indices with `|α| ≤ cap` and `α₃ ≥ 1`, lexicographic.
fn scan_alphas(cap: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a0 in 0..=cap {
        for a1 in 0..=cap - a0 {
            for a2 in 1..=cap - a0 - a1 {
                out.push([a0, a1, a2]);
            }
        }
    }
    out
}

/// `LHS / (RHS / C)` for one admissible pair.
pub fn pair_ratio(
    ineq: Inequality,
    w: &MultiIndexWeight,
    alpha: [usize; 3],
    beta: [usize; 3],
) -> Result<f64> {
    if w.kind() != WeightKind::M {
        return Err(Error::Parameter(
            "inequality scans use the M weights".into(),
        ));
    }
    if alpha[2] == 0 || (0..3).any(|i| beta[i] > alpha[i]) || !ineq.admits(beta) {
        return Err(Error::Parameter(format!(
            "pair {alpha:?}, {beta:?} violates the side conditions of {ineq}"
        )));
    }
    let a: usize = alpha.iter().sum();
    let b: usize = beta.iter().sum();
    let mut log_binom = 0.0;
    for i in 0..3 {
        log_binom += w.log_factorial(alpha[i])?
            - w.log_factorial(beta[i])?
            - w.log_factorial(alpha[i] - beta[i])?;
    }
    let lm = |n: usize| w.log_value(n);
    // orders of the two denominator weights and the RHS bases
    let (n1, n2, p, q, extra) = match ineq {
        Inequality::A3 => (b, a - b, b + 1, a - b + 1, 0.0),
        Inequality::A4 => (b - 1, a - b + 1, b, a - b + 2, 0.0),
        Inequality::A5 => (b, a - b + 1, b + 1, a - b + 2, w.r().ln()),
        Inequality::A6 => (b, a - b, b + 1, a - b + 1, 0.0),
    };
    let log_lhs = log_binom + extra - (a as f64).ln() + lm(a)? - lm(n1)? - lm(n2)?;
    let rhs = (p as f64).powi(-4) + (q as f64).powi(-4);
    Ok(log_lhs.exp() / rhs)
}

/// Exhaustive scan over `|α| ≤ cap`; ties keep the lexicographically first pair.
pub fn inequality_scan(
    ineq: Inequality,
    r: f64,
    cap: usize,
    exec: Execution,
) -> Result<ScanResult> {
    let w = MultiIndexWeight::new(WeightKind::M, r)?;
    if cap == 0 {
        return Err(Error::Parameter(
            "empty admissible set: cap must be at least 1".into(),
        ));
    }
    if cap >= MAX_ORDER {
        return Err(Error::Parameter(format!(
            "scan cap {cap} must stay below {MAX_ORDER}"
        )));
    }
    let alphas = scan_alphas(cap);
    let per_alpha = exec.map(alphas.len(), |i| -> Result<(f64, [usize; 3], usize)> {
        let alpha = alphas[i];
        let mut best = (f64::NEG_INFINITY, [0; 3], 0usize);
        for b0 in 0..=alpha[0] {
            for b1 in 0..=alpha[1] {
                for b2 in 0..=alpha[2] {
                    let beta = [b0, b1, b2];
                    if !ineq.admits(beta) {
                        continue;
                    }
                    let ratio = pair_ratio(ineq, &w, alpha, beta)?;
                    best.2 += 1;
                    if ratio > best.0 {
                        best = (ratio, beta, best.2);
                    }
                }
            }
        }
        Ok(best)
    });
    let mut out = ScanResult {
        inequality: ineq,
        r,
        cap,
        constant: f64::NEG_INFINITY,
        alpha: [0; 3],
        beta: [0; 3],
        pairs: 0,
    };
    for (alpha, res) in alphas.iter().zip(per_alpha) {
        let (ratio, beta, count) = res?;
        out.pairs += count;
        if ratio > out.constant {
            out.constant = ratio;
            out.alpha = *alpha;
            out.beta = beta;
        }
    }
    if out.pairs == 0 {
        return Err(Error::Parameter(format!(
            "empty admissible set for {ineq} at cap {cap}"
        )));
    }
    Ok(out)
}

/// `max_{1 ≤ n ≤ cap} n M_{r,n} / (r M_{r,n-1})` and where it is attained.
pub fn recurrence_constant(r: f64, cap: usize) -> Result<(f64, usize)> {
    let w = MultiIndexWeight::new(WeightKind::M, r)?;
    let mut best = (f64::NEG_INFINITY, 0);
    for n in 1..=cap {
        let v = (n as f64).ln() + w.log_value(n)? - r.ln() - w.log_value(n - 1)?;
        if v.exp() > best.0 {
            best = (v.exp(), n);
        }
    }
    if best.1 == 0 {
        return Err(Error::Parameter("recurrence scan needs cap ≥ 1".into()));
    }
    Ok(best)
}

/// `[Σ_m (Σ_j p_j q_{m-j})²]^{1/2} / (∥q∥₂ Σ p)`.
pub fn young_check(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.iter().chain(q).any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Parameter(
            "sequences must be finite and non-negative".into(),
        ));
    }
    let sum_p: f64 = p.iter().sum();
    let norm_q = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if sum_p == 0.0 || norm_q == 0.0 {
        return Ok(0.0);
    }
    let mut conv = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            conv[i + j] += a * b;
        }
    }
    let lhs = conv.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(lhs / (norm_q * sum_p))
}

/// `∥h/z∥ / (2∥∂_z h∥)` with `h/z → ∂_z h(0)` at the wall.
pub fn hardy_check(grid: &VerticalGrid, h: &[f64]) -> Result<f64> {
    if h.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    if h[0] != 0.0 {
        return Err(Error::Parameter(format!(
            "profile must vanish at z = 0, got {}",
            h[0]
        )));
    }
    if h.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let dh = grid.d1_vec(h);
    let quotient: Vec<f64> = h
        .iter()
        .zip(grid.nodes())
        .enumerate()
        .map(|(j, (v, z))| {
            if j == 0 {
                dh[0] * dh[0]
            } else {
                (v / z).powi(2)
            }
        })
        .collect();
    let grad = grid.edge_norm2(h, |_| 1.0);
    Ok(grid.integrate_simpson(&quotient).sqrt() / (2.0 * grad.sqrt()))
}
