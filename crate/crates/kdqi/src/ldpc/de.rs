//! Density evolution for regular LDPC ensembles on the erasure channel.
//!
//! The one-dimensional recursion for a `(dv, dc)`-regular ensemble is
//! `x <- eps * (1 - (1 - x)^(dc-1))^(dv-1)`, starting from `x = eps`. The
//! decoding threshold is the largest channel parameter for which the
//! recursion drains to zero. At the threshold the recursion curve is tangent
//! to the diagonal; the tangency point `(eps*, x*)` is located exactly by
//! minimizing `x / phi(x)` (with `phi` the eps-independent factor) and
//! polishing with Newton steps, so algebraic identities involving the
//! bottleneck-limited shift hold to near machine precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regular ensemble with variable degree `dv` and check degree `dc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LdpcEnsemble {
    pub dv: u32,
    pub dc: u32,
}

impl LdpcEnsemble {
    pub fn new(dv: u32, dc: u32) -> Result<Self> {
        if dv < 2 || dc <= dv {
            return Err(Error::Argument(format!(
                "ensemble needs 2 <= dv < dc, got ({dv}, {dc})"
            )));
        }
        Ok(LdpcEnsemble { dv, dc })
    }

    pub fn design_rate(&self) -> f64 {
        1.0 - self.dv as f64 / self.dc as f64
    }
}

/// Residual erasure mass below which the recursion counts as drained.
pub const DE_CONVERGENCE_EPS: f64 = 1e-12;
/// Iteration cap for the recursion.
pub const DE_MAX_ITERS: usize = 100_000;

/// One density-evolution step `eps * (1 - (1 - x)^(dc-1))^(dv-1)`.
pub fn de_map(ens: LdpcEnsemble, eps: f64, x: f64) -> f64 {
    eps * phi(ens, x)
}

/// Derivative of [`de_map`] in `x`.
pub fn de_map_deriv(ens: LdpcEnsemble, eps: f64, x: f64) -> f64 {
    eps * phi_deriv(ens, x)
}

/// The eps-independent factor `(1 - (1 - x)^(dc-1))^(dv-1)`.
fn phi(ens: LdpcEnsemble, x: f64) -> f64 {
    let u = 1.0 - (1.0 - x).powi(ens.dc as i32 - 1);
    u.powi(ens.dv as i32 - 1)
}

fn phi_deriv(ens: LdpcEnsemble, x: f64) -> f64 {
    let dv = ens.dv as i32;
    let dc = ens.dc as i32;
    let u = 1.0 - (1.0 - x).powi(dc - 1);
    (dv - 1) as f64 * u.powi(dv - 2) * (dc - 1) as f64 * (1.0 - x).powi(dc - 2)
}

fn phi_second_deriv(ens: LdpcEnsemble, x: f64) -> f64 {
    let dv = ens.dv as i32;
    let dc = ens.dc as i32;
    let om = 1.0 - x;
    let u = 1.0 - om.powi(dc - 1);
    let up = (dc - 1) as f64 * om.powi(dc - 2);
    let upp = -((dc - 1) as f64) * (dc - 2) as f64 * om.powi(dc - 3);
    (dv - 1) as f64 * ((dv - 2) as f64 * u.powi(dv - 3) * up * up + u.powi(dv - 2) * upp)
}

/// Whether the recursion started at `x = eps` drains below
/// [`DE_CONVERGENCE_EPS`] within [`DE_MAX_ITERS`] steps.
pub fn de_converges(ens: LdpcEnsemble, eps: f64) -> bool {
    let mut x = eps;
    for _ in 0..DE_MAX_ITERS {
        if x < DE_CONVERGENCE_EPS {
            return true;
        }
        let next = de_map(ens, eps, x);
        // The sequence is monotone nonincreasing; a vanishing decrement
        // while still above the drain level means a fixed point above zero.
        if next >= x * (1.0 - 1e-15) {
            return false;
        }
        x = next;
    }
    false
}

/// Threshold and tangency description of an ensemble.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DeThreshold {
    /// Threshold located by bisection on [`de_converges`].
    pub eps_star: f64,
    /// Residual erasure mass at the tangency point.
    pub x_star: f64,
}

/// Bisect for the decoding threshold to absolute tolerance `tol`.
pub fn de_threshold(ens: LdpcEnsemble, tol: f64) -> Result<DeThreshold> {
    if !(1e-13..=0.1).contains(&tol) {
        return Err(Error::Argument(format!(
            "threshold tolerance {tol} outside [1e-13, 0.1]"
        )));
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if de_converges(ens, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, x_star) = tangency_point(ens);
    Ok(DeThreshold { eps_star: 0.5 * (lo + hi), x_star })
}

/// Exact tangency point `(eps*, x*)`: the minimum of `x / phi(x)` located by
/// golden-section search and polished by Newton steps on
/// `phi(x) - x phi'(x) = 0`.
pub fn tangency_point(ens: LdpcEnsemble) -> (f64, f64) {
    let g = |x: f64| x / phi(ens, x);
    let (mut a, mut b) = (1e-9, 1.0 - 1e-9);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = g(x2);
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..8 {
        let h = phi(ens, x) - x * phi_deriv(ens, x);
        let hp = -x * phi_second_deriv(ens, x);
        if hp.abs() < 1e-300 {
            break;
        }
        let step = h / hp;
        let next = x - step;
        if !(0.0..1.0).contains(&next) {
            break;
        }
        x = next;
        if step.abs() < 1e-16 {
            break;
        }
    }
    (g(x), x)
}

/// Channel-parameter shift from a head-mass advantage:
/// `eps * (1 - kappa * delta_sigma)`.
pub fn bla_shift(eps: f64, kappa: f64, delta_sigma: f64) -> Result<f64> {
    let factor = kappa * delta_sigma;
    if factor >= 1.0 {
        return Err(Error::Argument(format!(
            "shift factor kappa * delta_sigma = {factor} must stay below 1"
        )));
    }
    Ok(eps * (1.0 - factor))
}

/// Tangency identities for the shifted recursion.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TangencyReport {
    pub eps_star: f64,
    pub x_star: f64,
    pub eps_eff: f64,
    /// `|de_map(eps_eff, x*) - (1 - kappa delta) x*|`.
    pub value_gap: f64,
    /// `|de_map_deriv(eps_eff, x*) - (1 - kappa delta) de_map_deriv(eps*, x*)|`.
    pub deriv_gap: f64,
    /// `|de_map(eps*, x*) - x*|`: the fixed-point identity at tangency.
    pub fixed_point_gap: f64,
    /// Slope of the recursion at the tangency point; one up to solver error.
    pub slope_at_tangency: f64,
    pub post_shift_converges: bool,
}

/// Evaluate the tangency identities after a bottleneck-limited shift.
pub fn bla_tangency_check(
    ens: LdpcEnsemble,
    kappa: f64,
    delta_sigma: f64,
) -> Result<TangencyReport> {
    let (eps_star, x_star) = tangency_point(ens);
    let eps_eff = bla_shift(eps_star, kappa, delta_sigma)?;
    let scale = 1.0 - kappa * delta_sigma;
    let value_gap = (de_map(ens, eps_eff, x_star) - scale * x_star).abs();
    let deriv_gap =
        (de_map_deriv(ens, eps_eff, x_star) - scale * de_map_deriv(ens, eps_star, x_star)).abs();
    let fixed_point_gap = (de_map(ens, eps_star, x_star) - x_star).abs();
    let slope_at_tangency = de_map_deriv(ens, eps_star, x_star);
    Ok(TangencyReport {
        eps_star,
        x_star,
        eps_eff,
        value_gap,
        deriv_gap,
        fixed_point_gap,
        slope_at_tangency,
        post_shift_converges: de_converges(ens, eps_eff),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ens(dv: u32, dc: u32) -> LdpcEnsemble {
        LdpcEnsemble::new(dv, dc).unwrap()
    }

    #[test]
    fn ensemble_validation_and_rate() {
        assert!(LdpcEnsemble::new(1, 6).is_err());
        assert!(LdpcEnsemble::new(6, 6).is_err());
        assert!(LdpcEnsemble::new(6, 3).is_err());
        assert!((ens(3, 6).design_rate() - 0.5).abs() < 1e-15);
        assert!((ens(4, 8).design_rate() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn map_closed_form_values() {
        let e = ens(3, 6);
        assert_eq!(de_map(e, 0.4, 0.0), 0.0);
        assert!((de_map(e, 0.4, 1.0) - 0.4).abs() < 1e-15);
        let expect = 0.4 * (1.0 - 0.8f64.powi(5)).powi(2);
        assert!((de_map(e, 0.4, 0.2) - expect).abs() < 1e-15);
    }

    #[test]
    fn deriv_matches_finite_differences() {
        let e = ens(4, 8);
        let h = 1e-6;
        for x in [0.05, 0.2, 0.35, 0.6] {
            let fd = (de_map(e, 0.3, x + h) - de_map(e, 0.3, x - h)) / (2.0 * h);
            assert!(
                (de_map_deriv(e, 0.3, x) - fd).abs() < 1e-7,
                "derivative mismatch at x = {x}"
            );
        }
    }

    #[test]
    fn convergence_flips_across_the_threshold() {
        let e = ens(3, 6);
        assert!(de_converges(e, 0.40));
        assert!(de_converges(e, 0.42));
        assert!(!de_converges(e, 0.44));
        assert!(!de_converges(e, 0.6));
        assert!(de_converges(e, 0.0));
        assert!(!de_converges(e, 1.0));
    }

    #[test]
    fn known_thresholds() {
        let t36 = de_threshold(ens(3, 6), 1e-6).unwrap();
        assert!(
            (t36.eps_star - 0.42944).abs() < 1e-4,
            "(3,6) threshold {}",
            t36.eps_star
        );
        let t48 = de_threshold(ens(4, 8), 1e-6).unwrap();
        assert!((t48.eps_star - 0.3834).abs() < 1e-3);
        let t510 = de_threshold(ens(5, 10), 1e-6).unwrap();
        assert!((t510.eps_star - 0.3416).abs() < 1e-3);
        // denser ensembles of the same rate have lower erasure thresholds
        assert!(t510.eps_star < t48.eps_star && t48.eps_star < t36.eps_star);
    }

    #[test]
    fn threshold_tolerance_validation() {
        assert!(de_threshold(ens(3, 6), 0.0).is_err());
        assert!(de_threshold(ens(3, 6), 0.5).is_err());
    }

    #[test]
    fn tangency_point_satisfies_fixed_point_and_unit_slope() {
        for e in [ens(3, 6), ens(4, 8), ens(5, 10)] {
            let (eps_star, x_star) = tangency_point(e);
            assert!((de_map(e, eps_star, x_star) - x_star).abs() < 1e-13);
            assert!((de_map_deriv(e, eps_star, x_star) - 1.0).abs() < 1e-10);
            let bisected = de_threshold(e, 1e-9).unwrap().eps_star;
            assert!(
                (bisected - eps_star).abs() < 1e-8,
                "bisection {bisected} vs tangency {eps_star}"
            );
        }
    }

    #[test]
    fn shift_arithmetic_and_validation() {
        assert!((bla_shift(0.42, 0.5, 0.1).unwrap() - 0.399).abs() < 1e-15);
        assert!(bla_shift(0.42, 2.0, 0.5).is_err());
        assert!(bla_shift(0.42, 0.0, 0.0).is_ok());
    }

    #[test]
    fn tangency_identities_hold_to_machine_precision() {
        for (kappa, delta) in [(0.5, 0.1), (1.0, 0.05), (0.2, 0.3)] {
            let report = bla_tangency_check(ens(3, 6), kappa, delta).unwrap();
            assert!(report.value_gap < 1e-12, "value gap {}", report.value_gap);
            assert!(report.deriv_gap < 1e-12, "deriv gap {}", report.deriv_gap);
            assert!(report.fixed_point_gap < 1e-13);
            assert!((report.slope_at_tangency - 1.0).abs() < 1e-10);
            assert!(report.post_shift_converges);
        }
    }

    #[test]
    fn zero_shift_sits_at_the_threshold_and_stalls() {
        let report = bla_tangency_check(ens(3, 6), 0.0, 0.0).unwrap();
        assert_eq!(report.eps_eff, report.eps_star);
        assert!(!report.post_shift_converges);
    }
}
