use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::params::DerivedConstants;

/// Which one-sided limit to take at r = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Side used for a generic radius (left branch for r <= 1).
    pub fn of(r: f64) -> Self {
        if r <= 1.0 {
            Side::Left
        } else {
            Side::Right
        }
    }
}

/// S0(r) = (r - 1)^2 (r + 2) / 3.
pub fn eval_s0(r: f64) -> f64 {
    (r - 1.0) * (r - 1.0) * (r + 2.0) / 3.0
}

/// dS0/dr = r^2 - 1.
pub fn eval_s0_prime(r: f64) -> f64 {
    r * r - 1.0
}

/// Lambda(r) = 2g(r - r^3/3).
pub fn eval_lambda(g: f64, r: f64) -> f64 {
    2.0 * g * (r - r * r * r / 3.0)
}

/// V(r) = (g^2/2)(r^2 - 1)^2.
pub fn potential(g: f64, r: f64) -> f64 {
    let s = r * r - 1.0;
    0.5 * g * g * s * s
}

/// log phi and phi'/phi at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiValue {
    pub log_magnitude: f64,
    /// phi is strictly positive; kept for callers that expect a signed pair.
    pub sign: f64,
    pub log_derivative: f64,
}

impl PhiValue {
    /// phi^2 in log form.
    pub fn log_phi2(&self) -> f64 {
        2.0 * self.log_magnitude
    }
}

/// The piecewise trial function built from phi_+ and phi_-.
#[derive(Debug, Clone, Copy)]
pub struct TrialFunction {
    pub dc: DerivedConstants,
}

impl TrialFunction {
    pub fn new(dc: DerivedConstants) -> Self {
        Self { dc }
    }

    /// log of 2 r^k/(r+1) ((1+a)/(r+a))^k, and its derivative.
    fn prefactor(&self, r: f64) -> (f64, f64) {
        let k = self.dc.k;
        let a = self.dc.a();
        let log_p = std::f64::consts::LN_2 + k * r.ln() - (r + 1.0).ln() + k * (1.0 + a).ln()
            - k * (r + a).ln();
        let dlog_p = k / r - 1.0 / (r + 1.0) - k / (r + a);
        (log_p, dlog_p)
    }

    /// g_- e^{-Lambda} / (g_+ + g_- e^{-Lambda}); the X factor of the r < 1 branch.
    pub fn mix_fraction(&self, r: f64) -> f64 {
        let t = (-eval_lambda(self.dc.g(), r)).exp();
        let gm = self.dc.g_minus;
        gm * t / (self.dc.g_plus + gm * t)
    }

    pub fn eval_phi(&self, r: f64) -> Result<PhiValue> {
        self.eval_phi_side(r, Side::of(r))
    }

    pub fn eval_phi_side(&self, r: f64, side: Side) -> Result<PhiValue> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain { r });
        }
        let g = self.dc.g();
        let gp = self.dc.g_plus;
        let gm = self.dc.g_minus;
        let (log_p, dlog_p) = self.prefactor(r);
        let s0 = eval_s0(r);
        let s0p = eval_s0_prime(r);
        let left = r < 1.0 || (r == 1.0 && side == Side::Left);
        let (log_magnitude, log_derivative) = if left {
            let t = (-eval_lambda(g, r)).exp();
            let log_mag = log_p - g * s0 + gp.ln() + (gm / gp * t).ln_1p();
            let x = gm * t / (gp + gm * t);
            (log_mag, dlog_p - g * s0p * (1.0 - 2.0 * x))
        } else {
            let c = gp + gm * (-4.0 * g / 3.0).exp();
            (log_p - g * s0 + c.ln(), dlog_p - g * s0p)
        };
        if r == 0.0 {
            return Ok(PhiValue {
                log_magnitude: f64::NEG_INFINITY,
                sign: 1.0,
                log_derivative: f64::INFINITY,
            });
        }
        Ok(PhiValue {
            log_magnitude,
            sign: 1.0,
            log_derivative,
        })
    }

    /// lim_{r->0} log(r^{-k} phi).
    pub fn log_origin_amplitude(&self) -> f64 {
        let g = self.dc.g();
        let k = self.dc.k;
        let a = self.dc.a();
        let gp = self.dc.g_plus;
        let gm = self.dc.g_minus;
        std::f64::consts::LN_2 + k * ((1.0 + a) / a).ln() - 2.0 * g / 3.0 + (gp + gm).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::{validate_params, ModelParams};
    use proptest::prelude::*;

    fn k2_trial() -> TrialFunction {
        TrialFunction::new(validate_params(&ModelParams::new(3.0, 5, 0, 1.2)).unwrap())
    }

    #[test]
    fn s0_and_lambda_values() {
        assert_eq!(eval_s0(1.0), 0.0);
        assert!((eval_s0(0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((eval_s0(2.0) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(eval_lambda(3.0, 0.0), 0.0);
        assert!((eval_lambda(3.0, 1.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn continuity_at_one() {
        let tf = k2_trial();
        let l = tf.eval_phi_side(1.0, Side::Left).unwrap();
        let r = tf.eval_phi_side(1.0, Side::Right).unwrap();
        assert!((l.log_magnitude - r.log_magnitude).abs() < 1e-12);
        assert!((l.log_derivative - r.log_derivative).abs() < 1e-12);
    }

    #[test]
    fn negative_radius_is_domain_error() {
        assert!(matches!(k2_trial().eval_phi(-0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn origin_behaviour() {
        let tf = k2_trial();
        let k = tf.dc.k;
        let amp = tf.log_origin_amplitude();
        for &r in &[1e-4, 1e-6] {
            let p = tf.eval_phi(r).unwrap();
            assert!((p.log_magnitude - k * f64::ln(r) - amp).abs() < 10.0 * r);
            // (r^{-k} phi)'/ (r^{-k} phi) = phi'/phi - k/r -> 0
            assert!((p.log_derivative - k / r).abs() < 1e3 * r);
        }
    }

    #[test]
    fn k_zero_limit_reduces_to_one_dimensional_form() {
        // N = 1, l = 0 is outside the structural range but the formula still
        // applies; build the constants by hand.
        let mut dc = validate_params(&ModelParams::new(3.0, 3, 0, 1.2)).unwrap();
        dc.k = 0.0;
        dc.g_plus = 3.0 + 1.0;
        dc.g_minus = 3.0 - 1.0;
        let tf = TrialFunction::new(dc);
        for &r in &[1.5, 2.0, 3.0] {
            let p = tf.eval_phi(r).unwrap();
            let c = dc.g_plus + dc.g_minus * (-4.0f64).exp();
            let expect = (2.0 / (r + 1.0)).ln() - 3.0 * eval_s0(r) + c.ln();
            assert!((p.log_magnitude - expect).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn gradient_squared_reproduces_potential(r in 0.0f64..8.0, g in 0.1f64..20.0) {
            let gs = g * eval_s0_prime(r);
            let v = potential(g, r);
            prop_assert!((0.5 * gs * gs - v).abs() <= 1e-12 * v.max(1.0));
        }

        #[test]
        fn lambda_identity(r in 0.0f64..1.0, g in 0.1f64..20.0) {
            let lhs = 4.0 * g / 3.0 - 2.0 * g * eval_s0(r);
            prop_assert!((lhs - eval_lambda(g, r)).abs() < 1e-12 * g);
        }

        #[test]
        fn log_derivative_matches_finite_difference(r in 0.05f64..6.0) {
            prop_assume!((r - 1.0).abs() > 1e-3);
            let tf = k2_trial();
            let h = 1e-5;
            let lp = tf.eval_phi(r + h).unwrap().log_magnitude;
            let lm = tf.eval_phi(r - h).unwrap().log_magnitude;
            let fd = (lp - lm) / (2.0 * h);
            let d = tf.eval_phi(r).unwrap().log_derivative;
            prop_assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()));
        }
    }
}
