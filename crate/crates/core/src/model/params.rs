use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Problem definition: coupling `g`, space dimension `dimension` (N),
/// angular momentum `l` and the trial-function shape parameter `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g: f64,
    pub dimension: u32,
    pub l: u32,
    pub a: f64,
}

impl ModelParams {
    pub fn new(g: f64, dimension: u32, l: u32, a: f64) -> Self {
        Self { g, dimension, l, a }
    }

    /// Parameters with effective angular index `k` realised as an s-wave in
    /// dimension N = 2k + 1. `k` must be a positive half-integer.
    pub fn from_k(g: f64, k: f64, a: f64) -> Result<Self> {
        let twice = 2.0 * k;
        if !(twice >= 1.0 && (twice - twice.round()).abs() < 1e-12) {
            return Err(Error::Structural(format!(
                "k = {k} is not a positive half-integer"
            )));
        }
        Ok(Self::new(g, twice.round() as u32 + 1, 0, a))
    }

    /// K = (N - 1)/2.
    pub fn big_k(&self) -> f64 {
        0.5 * (f64::from(self.dimension) - 1.0)
    }

    /// k = l + (N - 1)/2, the index entering the centrifugal term k(k-1)/2r^2.
    pub fn k(&self) -> f64 {
        f64::from(self.l) + self.big_k()
    }

    pub fn check_structure(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::Structural(format!(
                "dimension N = {} must be at least 2",
                self.dimension
            )));
        }
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(Error::Structural(format!("coupling g = {} must be > 0", self.g)));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::Structural(format!(
                "shape parameter a = {} must be > 0",
                self.a
            )));
        }
        Ok(())
    }
}

/// Everything derived from a [`ModelParams`] tuple, including the admissible
/// windows in `a` (at fixed g, k) and in `g` (at fixed k, a).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub params: ModelParams,
    pub big_k: f64,
    pub k: f64,
    pub g_plus: f64,
    pub g_minus: f64,
    pub e0: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub hierarchy_valid: bool,
}

impl DerivedConstants {
    pub fn g(&self) -> f64 {
        self.params.g
    }

    pub fn a(&self) -> f64 {
        self.params.a
    }

    pub fn g2_min(&self) -> f64 {
        self.g_min * self.g_min
    }

    pub fn g2_max(&self) -> f64 {
        self.g_max * self.g_max
    }

    /// The middle quantity of the window inequality, g/(k/a + 1).
    pub fn window_ratio(&self) -> f64 {
        self.params.g / (self.k / self.params.a + 1.0)
    }

    /// Upper end of the window inequality, sqrt(1 + 1/(k + a)).
    pub fn window_ceiling(&self) -> f64 {
        (1.0 + 1.0 / (self.k + self.params.a)).sqrt()
    }
}

/// Lower end of the `a` window: g = 1 + k/a_min. Infinite when g <= 1
/// (no positive `a` satisfies the lower inequality).
pub fn a_lower_limit(g: f64, k: f64) -> f64 {
    if g > 1.0 {
        k / (g - 1.0)
    } else {
        f64::INFINITY
    }
}

/// Upper end of the `a` window: g^2 = (1 + k/a)(1 + (k+1)/a).
///
/// In x = 1/a this is k(k+1)x^2 + (2k+1)x + 1 - g^2 = 0; the positive root is
/// taken in rationalised form so that it stays accurate as g -> 1.
pub fn a_upper_limit(g: f64, k: f64) -> f64 {
    if g <= 1.0 {
        return 0.0;
    }
    let disc = 1.0 + 4.0 * k * (k + 1.0) * g * g;
    let x = 2.0 * (g * g - 1.0) / ((2.0 * k + 1.0) + disc.sqrt());
    1.0 / x
}

/// Validates the structure of `p` and computes all derived constants.
///
/// A parameter set outside the hierarchy window is not an error; it is
/// reported through `hierarchy_valid = false`.
pub fn validate_params(p: &ModelParams) -> Result<DerivedConstants> {
    p.check_structure()?;
    let k = p.k();
    let shift = k / p.a + 1.0;
    let g_plus = p.g + shift;
    let g_minus = p.g - shift;
    let g_min = shift;
    let g_max = (shift * ((k + 1.0) / p.a + 1.0)).sqrt();
    let ratio = p.g / shift;
    let hierarchy_valid = ratio > 1.0 && ratio < (1.0 + 1.0 / (k + p.a)).sqrt();
    Ok(DerivedConstants {
        params: *p,
        big_k: p.big_k(),
        k,
        g_plus,
        g_minus,
        e0: p.g * (1.0 + k * p.a),
        a_min: a_lower_limit(p.g, k),
        a_max: a_upper_limit(p.g, k),
        g_min,
        g_max,
        hierarchy_valid,
    })
}

/// Checks k(k-1) = K(K-1) + l(l+N-2) in exact integer arithmetic (all terms
/// multiplied by 4 so that half-integers become integers).
pub fn separation_identity_holds(dimension: u32, l: u32) -> bool {
    let n = i64::from(dimension);
    let l = i64::from(l);
    let two_k = 2 * l + n - 1;
    let two_big_k = n - 1;
    let lhs = two_k * (two_k - 2);
    let rhs = two_big_k * (two_big_k - 2) + 4 * l * (l + n - 2);
    lhs == rhs
}
