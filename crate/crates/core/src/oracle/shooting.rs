use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::tail_radius;
use crate::model::{potential, validate_params, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FDConfig {
    /// RK4 steps between the series start and r_max.
    pub node_count: usize,
    pub r_max: Option<f64>,
    /// Used when `r_max` is not given: 2 g S0(r_max) = threshold.
    pub tail_threshold: f64,
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for FDConfig {
    fn default() -> Self {
        Self {
            node_count: 4000,
            r_max: None,
            tail_threshold: 80.0,
            tol: 1e-12,
            max_steps: 200,
        }
    }
}

impl FDConfig {
    fn check(&self) -> Result<()> {
        if self.node_count < 2000 {
            return Err(Error::Config(format!(
                "oracle node_count {} is below 2000",
                self.node_count
            )));
        }
        if !(self.tol >= 1e-12) {
            return Err(Error::Config(format!("oracle tolerance {} is below 1e-12", self.tol)));
        }
        Ok(())
    }

    pub fn radius(&self, g: f64) -> f64 {
        self.r_max
            .unwrap_or_else(|| tail_radius(g, self.tail_threshold).max(2.5))
    }
}

/// chi = r^{-k} psi obeys chi'' = -(2k/r) chi' + 2(V - E) chi, regular at 0.
struct Shooter {
    g: f64,
    k: f64,
    r_max: f64,
    steps: usize,
}

impl Shooter {
    /// Taylor series of chi about 0 (even powers), evaluated at r0.
    fn series_start(&self, e: f64, r0: f64) -> (f64, f64) {
        let g2 = self.g * self.g;
        // 2(V - E) = (g^2 - 2E) - 2 g^2 r^2 + g^2 r^4
        let v0 = g2 - 2.0 * e;
        let mut c = vec![1.0f64];
        let (mut chi, mut dchi) = (1.0, 0.0);
        let r2 = r0 * r0;
        let mut pw = 1.0;
        for j in 0..200 {
            let mut rhs = v0 * c[j];
            if j >= 1 {
                rhs -= 2.0 * g2 * c[j - 1];
            }
            if j >= 2 {
                rhs += g2 * c[j - 2];
            }
            let n = 2.0 * (j as f64) + 2.0;
            let next = rhs / (n * (n - 1.0 + 2.0 * self.k));
            c.push(next);
            pw *= r2;
            let term = next * pw;
            chi += term;
            dchi += n * term / r0;
            if term.abs() < 1e-18 * chi.abs() && j > 4 {
                break;
            }
        }
        (chi, dchi)
    }

    /// Number of sign changes of chi on (0, r_max], counting chi(r_max) <= 0.
    fn nodes(&self, e: f64) -> usize {
        let h0 = self.r_max / self.steps as f64;
        let r0 = (20.0 * self.k * h0).clamp(0.02, 0.3);
        let h = (self.r_max - r0) / self.steps as f64;
        let (mut y, mut dy) = self.series_start(e, r0);
        let two_k = 2.0 * self.k;
        let g = self.g;
        let rhs = |r: f64, y: f64, dy: f64| -two_k / r * dy + 2.0 * (potential(g, r) - e) * y;
        let mut count = 0;
        for i in 0..self.steps {
            let r = r0 + i as f64 * h;
            let k1y = dy;
            let k1d = rhs(r, y, dy);
            let k2y = dy + 0.5 * h * k1d;
            let k2d = rhs(r + 0.5 * h, y + 0.5 * h * k1y, dy + 0.5 * h * k1d);
            let k3y = dy + 0.5 * h * k2d;
            let k3d = rhs(r + 0.5 * h, y + 0.5 * h * k2y, dy + 0.5 * h * k2d);
            let k4y = dy + h * k3d;
            let k4d = rhs(r + h, y + h * k3y, dy + h * k3d);
            let ny = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            let nd = dy + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            if (ny < 0.0) != (y < 0.0) {
                count += 1;
            }
            y = ny;
            dy = nd;
            let scale = y.abs().max(dy.abs());
            if scale > 1e150 {
                y /= scale;
                dy /= scale;
            }
        }
        if y == 0.0 {
            count += 1;
        }
        count
    }
}

/// Lowest Dirichlet eigenvalue on (0, r_max] of
/// -psi''/2 + [k(k-1)/2r^2 + V] psi = E psi with psi ~ r^k at the origin,
/// by node-count bisection.
pub fn fd_ground_energy(p: &ModelParams, cfg: &FDConfig) -> Result<f64> {
    cfg.check()?;
    let dc = validate_params(p)?;
    let sh = Shooter {
        g: p.g,
        k: dc.k,
        r_max: cfg.radius(p.g),
        steps: cfg.node_count,
    };
    let mut lo = 0.0;
    let mut hi = dc.e0;
    let brackets = |lo: f64, hi: f64| sh.nodes(lo) == 0 && sh.nodes(hi) >= 1;
    if !brackets(lo, hi) {
        let (wlo, whi) = (-dc.e0.abs() - 1.0, 2.0 * dc.e0.abs() + p.g * p.g);
        if !brackets(wlo, whi) {
            return Err(Error::NoBracket { lo: wlo, hi: whi });
        }
        lo = wlo;
        hi = whi;
    }
    for _ in 0..cfg.max_steps {
        if hi - lo <= cfg.tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if sh.nodes(mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
