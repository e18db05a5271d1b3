//! Plain-text rendering of polynomials and check outcomes for reports.

use strand_core::bgg::{monomials, SPoly};
use strand_core::gallery::FiberOutcome;

/// Renders a polynomial as a sum of `c*x0^e0*...` terms.
pub fn spoly_string(p: &SPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for expo in monomials(p.n + 1, p.degree) {
        let c = p.coeff(&expo);
        if c.is_zero() {
            continue;
        }
        let vars: Vec<String> = expo
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(v, &e)| {
                if e == 1 {
                    format!("x{}", v)
                } else {
                    format!("x{}^{}", v, e)
                }
            })
            .collect();
        let mono = vars.join("*");
        parts.push(if mono.is_empty() {
            c.to_string()
        } else if c.is_one() {
            mono
        } else {
            format!("{}*{}", c, mono)
        });
    }
    parts.join(" + ")
}

/// One-token summary of a fiberwise verdict.
pub fn fiber_outcome_string(outcome: &FiberOutcome) -> String {
    match outcome {
        FiberOutcome::Proven { points } => format!("proven({})", points),
        FiberOutcome::Probable { points } => format!("probable({})", points),
        FiberOutcome::Failed { witness } => format!("failed at {}", witness),
    }
}
