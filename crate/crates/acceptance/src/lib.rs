//! Helpers shared by the acceptance harness.

use shercliff::experiments::Summary;
use std::time::{Duration, Instant};

/// Result of one acceptance criterion.
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    pub fn error(e: impl std::fmt::Display) -> Self {
        Self::new(false, format!("error: {e}"))
    }
}

/// Runs `f`, prints its pass/fail line and returns the verdict.
pub fn criterion(
    number: usize,
    name: &str,
    limit: Option<Duration>,
    f: impl FnOnce() -> Outcome,
) -> bool {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            out.pass = false;
            out.detail
                .push_str(&format!("; runtime over {} s", limit.as_secs()));
        }
    }
    println!(
        "criterion {number:>2} {} {name}: {} [{:.1} s]",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64()
    );
    out.pass
}

/// Value of the named check in an experiment summary.
pub fn check_value(summary: &Summary, name: &str) -> Option<(bool, f64)> {
    summary
        .checks
        .iter()
        .find(|c| c.name == name)
        .map(|c| (c.pass, c.value))
}

/// `I₀(x) = (1/π) ∫_0^π e^{x cos θ} dθ` by the periodic trapezoid rule, which
/// converges geometrically for this integrand.
pub fn bessel_i0(x: f64, points: usize) -> f64 {
    let h = 2.0 * std::f64::consts::PI / points as f64;
    (0..points)
        .map(|i| (x * (i as f64 * h).cos()).exp())
        .sum::<f64>()
        / points as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_oracle_converged() {
        let a = bessel_i0(2.0, 64);
        let b = bessel_i0(2.0, 400);
        assert!((a - b).abs() < 1e-15);
        assert!((bessel_i0(0.0, 8) - 1.0).abs() < 1e-15);
    }
}
