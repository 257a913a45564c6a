use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::model::params::DerivedConstants;
use crate::model::trial::{eval_lambda, Side};

/// Regrouped form of w on r < 1, with the factors it is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regrouped {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w_i: f64,
    pub w_ii: f64,
    pub w_iii: f64,
    pub w_iv: f64,
    pub w_v: f64,
    pub w_vi: f64,
    pub w_0: f64,
}

impl Regrouped {
    pub fn total(&self) -> f64 {
        self.w_i + self.w_ii + self.w_iii + self.w_iv + self.w_v + self.w_vi
    }
}

/// w(r) = h(r) + g^(r) together with its pieces.
///
/// At r = 0 the pole terms h1 and g8 are reported as infinities while
/// `value` uses their finite combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialTerms {
    pub r: f64,
    pub side: Side,
    pub value: f64,
    pub h: [f64; 5],
    pub g_hat: [f64; 3],
    pub regrouped: Option<Regrouped>,
}

impl PotentialTerms {
    pub fn h_sum(&self) -> f64 {
        self.h.iter().sum()
    }

    pub fn g_hat_sum(&self) -> f64 {
        self.g_hat.iter().sum()
    }
}

/// Closed form of the jump w(1-) - w(1+).
pub fn jump_closed_form(dc: &DerivedConstants) -> f64 {
    let g = dc.g();
    2.0 * g * dc.g_minus / (dc.g_plus * (4.0 * g / 3.0).exp() + dc.g_minus)
}

pub fn eval_w(dc: &DerivedConstants, r: f64, side: Side) -> Result<PotentialTerms> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::Domain { r });
    }
    let g = dc.g();
    let k = dc.k;
    let a = dc.a();
    let gp = dc.g_plus;
    let gm = dc.g_minus;
    let ka = k * a;

    let h1 = if r == 0.0 {
        f64::INFINITY.copysign(gm)
    } else {
        ka * gm / (r * (r + a))
    };
    let h2 = ka * a * g / (r + a);
    let h3 = 1.0 / ((r + 1.0) * (r + 1.0));
    let h4 = k * (k + 1.0) / (2.0 * (r + a) * (r + a));
    let h5 = ka / ((r + a) * (r + 1.0));
    let h = [h1, h2, h3, h4, h5];

    let left = r < 1.0 || (r == 1.0 && side == Side::Left);
    if !left {
        return Ok(PotentialTerms {
            r,
            side,
            value: h.iter().sum(),
            h,
            g_hat: [0.0; 3],
            regrouped: None,
        });
    }

    let lambda = eval_lambda(g, r);
    let t = (-lambda).exp();
    let dn = gp + gm * t;
    let x = gm * t / dn;
    let y = (gp - gm * t) / dn;
    // Z = g+ g- (1 - e^{-Lambda}) / (g+ + g- e^{-Lambda}); Z/r stays finite at 0.
    let one_minus_t = -(-lambda).exp_m1();
    let z = gp * gm * one_minus_t / dn;
    let z_over_r = if r == 0.0 { gp * gm } else { z / r };

    let g6 = 2.0 * g * x;
    let g7 = 2.0 * g * x * ka * r / (r + a);
    let g8 = if r == 0.0 {
        f64::NEG_INFINITY.copysign(gm)
    } else {
        -2.0 * g * x * ka / (r * (r + a))
    };

    let w_i = z_over_r * ka / (r + a);
    let w_ii = y * g * ka * a / (r + a);
    let w_0 = 2.0 * g * ka * x;
    let w_vi = 2.0 * g * (ka + 1.0) * x;
    let regrouped = Regrouped {
        x,
        y,
        z,
        w_i,
        w_ii,
        w_iii: h3,
        w_iv: h4,
        w_v: h5,
        w_vi,
        w_0,
    };
    Ok(PotentialTerms {
        r,
        side,
        value: regrouped.total(),
        h,
        g_hat: [g6, g7, g8],
        regrouped: Some(regrouped),
    })
}

/// Outcome of scanning w over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub nodes: usize,
    pub min_w: f64,
    pub min_w_at: f64,
    /// Largest one-sided difference quotient within a smooth piece.
    pub max_slope: f64,
    pub max_slope_at: f64,
    pub jump: f64,
    pub jump_closed_form: f64,
    pub jump_rel_error: f64,
    pub positive: bool,
    pub decreasing: bool,
    pub jump_matches: bool,
    pub hierarchy_valid: bool,
    pub label: String,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.positive && self.decreasing && self.jump_matches
    }
}

pub const SLOPE_TOLERANCE: f64 = 1e-10;
pub const JUMP_TOLERANCE: f64 = 1e-10;

/// Scans w over every node of `grid`. Parameters outside the hierarchy
/// window still get a full report, returned inside [`Error::InvalidWindow`].
pub fn check_w_properties(dc: &DerivedConstants, grid: &RadialGrid) -> Result<PropertyReport> {
    let mut min_w = f64::INFINITY;
    let mut min_w_at = f64::NAN;
    let mut max_slope = f64::NEG_INFINITY;
    let mut max_slope_at = f64::NAN;
    for (seg, side) in [(&grid.left, Side::Left), (&grid.right, Side::Right)] {
        let mut prev: Option<(f64, f64)> = None;
        for &r in &seg.r {
            let w = eval_w(dc, r, side)?.value;
            if !w.is_finite() {
                return Err(Error::NonFinite { context: "w(r)" });
            }
            if w < min_w {
                min_w = w;
                min_w_at = r;
            }
            if let Some((r0, w0)) = prev {
                let slope = (w - w0) / (r - r0);
                if slope > max_slope {
                    max_slope = slope;
                    max_slope_at = r0;
                }
            }
            prev = Some((r, w));
        }
    }
    let jump = eval_w(dc, 1.0, Side::Left)?.value - eval_w(dc, 1.0, Side::Right)?.value;
    let closed = jump_closed_form(dc);
    let jump_rel_error = ((jump - closed) / closed).abs();
    let positive = min_w > 0.0;
    let decreasing = max_slope < SLOPE_TOLERANCE;
    let jump_matches = jump_rel_error < JUMP_TOLERANCE && jump > 0.0;
    let all = positive && decreasing && jump_matches;
    let label = match (dc.hierarchy_valid, all) {
        (true, _) => "inside sufficient window",
        (false, true) => "outside sufficient condition (vacuous pass)",
        (false, false) => "outside sufficient condition",
    }
    .to_string();
    let report = PropertyReport {
        nodes: grid.len(),
        min_w,
        min_w_at,
        max_slope,
        max_slope_at,
        jump,
        jump_closed_form: closed,
        jump_rel_error,
        positive,
        decreasing,
        jump_matches,
        hierarchy_valid: dc.hierarchy_valid,
        label,
    };
    if dc.hierarchy_valid {
        Ok(report)
    } else {
        Err(Error::InvalidWindow {
            report: Box::new(report),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridConfig};
    use crate::model::params::{validate_params, ModelParams};
    use proptest::prelude::*;

    fn dc(k: f64, a: f64) -> DerivedConstants {
        validate_params(&ModelParams::from_k(3.0, k, a).unwrap()).unwrap()
    }

    #[test]
    fn jump_value_at_k2() {
        let d = dc(2.0, 1.2);
        let closed = jump_closed_form(&d);
        let direct = 2.0 / (17.0 / 3.0 * 4f64.exp() + 1.0 / 3.0);
        assert!((closed - direct).abs() < 1e-15);
        assert!((closed - 6.46e-3).abs() < 1e-5);
        let l = eval_w(&d, 1.0, Side::Left).unwrap();
        let r = eval_w(&d, 1.0, Side::Right).unwrap();
        assert!(((l.value - r.value) - closed).abs() < 1e-12 * closed);
        // g7(1) + g8(1) cancel
        assert!((l.g_hat[1] + l.g_hat[2]).abs() < 1e-15);
    }

    #[test]
    fn value_at_origin_uses_finite_limit() {
        let d = dc(2.0, 1.2);
        let w0 = eval_w(&d, 0.0, Side::Left).unwrap();
        let wi = w0.regrouped.unwrap().w_i;
        assert!((wi - d.k * d.g_plus * d.g_minus).abs() < 1e-12);
        assert!(w0.h[0].is_infinite() && w0.g_hat[2].is_infinite());
        let near = eval_w(&d, 1e-7, Side::Left).unwrap();
        assert!((near.value - w0.value).abs() < 1e-5);
    }

    #[test]
    fn vanishes_at_infinity() {
        let d = dc(2.0, 1.2);
        assert!(eval_w(&d, 1e8, Side::Right).unwrap().value < 1e-6);
    }

    #[test]
    fn properties_pass_at_k2() {
        let d = dc(2.0, 1.2);
        let grid = build_grid(&GridConfig::scan(10_000, 8.0), &d).unwrap();
        let rep = check_w_properties(&d, &grid).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn outside_window_returns_report_in_error() {
        let d = dc(2.0, 2.0);
        assert!(!d.hierarchy_valid);
        let grid = build_grid(&GridConfig::scan(10_000, 8.0), &d).unwrap();
        match check_w_properties(&d, &grid) {
            Err(Error::InvalidWindow { report }) => assert!(report.label.starts_with("outside")),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn regrouping_identities(r in 1e-3f64..0.999, ki in 1u32..9, a in 0.3f64..2.5) {
            let d = validate_params(&ModelParams::from_k(3.0, 0.5 * f64::from(ki), a).unwrap()).unwrap();
            let t = eval_w(&d, r, Side::Left).unwrap();
            let rg = t.regrouped.unwrap();
            let rel = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
            prop_assert!(rel(t.h[0] + t.g_hat[2], rg.w_i) || (t.h[0] + t.g_hat[2] - rg.w_i).abs() < 1e-12 * t.h[0].abs());
            prop_assert!(rel(t.h[1] + t.g_hat[1], rg.w_ii + rg.w_0));
            prop_assert!(rel(rg.w_0 + t.g_hat[0], rg.w_vi));
            let direct = t.h_sum() + t.g_hat_sum();
            prop_assert!((direct - t.value).abs() <= 1e-11 * (t.h[0].abs() + t.value.abs()));
        }
    }
}
