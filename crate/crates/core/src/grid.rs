//! Two-segment radial grid and the quadrature used on it.
//!
//! Each segment is uniform in a mapped variable s with spacing `h`; integrals
//! are taken in s with the Jacobian dr/ds folded into the integrand. The left
//! segment carries an implicit node at r = 0 whose integrand value is zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::params::DerivedConstants;
use crate::model::trial::eval_s0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum QuadratureRule {
    Trapezoid,
    /// Four-point cubic rule per cell, one-sided at segment ends.
    #[default]
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub node_count: usize,
    /// r_max is chosen so that 2 g S0(r_max) reaches this value.
    pub tail_threshold: f64,
    /// Node clustering strength in [0, 1): 0 is uniform in r.
    pub clustering: f64,
    pub r_max: Option<f64>,
    pub rule: QuadratureRule,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            node_count: 4001,
            tail_threshold: 60.0,
            clustering: 0.5,
            r_max: None,
            rule: QuadratureRule::Cubic,
        }
    }
}

impl GridConfig {
    pub const MIN_NODES: usize = 500;
    pub const MIN_R_MAX: f64 = 2.0;

    /// Uniform grid on [0, r_max] for property scans.
    pub fn scan(node_count: usize, r_max: f64) -> Self {
        Self {
            node_count,
            clustering: 0.0,
            r_max: Some(r_max),
            ..Self::default()
        }
    }

    pub fn with_nodes(mut self, node_count: usize) -> Self {
        self.node_count = node_count;
        self
    }
}

/// Root of 2 g S0(r) = threshold with r > 1.
pub fn tail_radius(g: f64, threshold: f64) -> f64 {
    let target = threshold / (2.0 * g);
    let mut lo = 1.0;
    let mut hi = 2.0;
    while eval_s0(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval_s0(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    hi
}

/// Log weight e^{log} multiplying an integrand. Near the origin the weight is
/// taken to behave like r^{origin_power}, which is integrated exactly against
/// a polynomial fit of the remaining smooth factor.
#[derive(Debug, Clone, Copy)]
pub struct Weight<'a> {
    pub log: &'a [f64],
    pub origin_power: f64,
}

impl<'a> Weight<'a> {
    pub fn new(log: &'a [f64], origin_power: f64) -> Self {
        Self { log, origin_power }
    }

    fn sub(&self, range: std::ops::Range<usize>) -> Weight<'a> {
        Weight {
            log: &self.log[range],
            origin_power: self.origin_power,
        }
    }
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// One grid segment: nodes, Jacobian dr/ds and the step in s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub r: Vec<f64>,
    pub jac: Vec<f64>,
    pub h: f64,
    /// An extra node at r = 0 (s = 0) precedes `r[0]`; integrands vanish there.
    pub virtual_origin: bool,
}

/// Precomputed data for the power-weighted cells of one sweep.
struct PowerRule {
    p: f64,
    gauss: Vec<(f64, f64)>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn offset(&self) -> usize {
        usize::from(self.virtual_origin)
    }

    fn full_len(&self) -> usize {
        self.r.len() + self.offset()
    }

    fn power_rule(&self, w: Option<Weight>) -> Option<PowerRule> {
        match w {
            Some(w) if self.virtual_origin && w.origin_power > 0.0 => {
                let n = ((w.origin_power + 4.0) / 2.0).ceil().clamp(2.0, 16.0) as usize;
                Some(PowerRule {
                    p: w.origin_power,
                    gauss: gauss_legendre(n),
                })
            }
            _ => None,
        }
    }

    /// Integral of one cell (between full nodes `i` and `i + 1`) of
    /// e^{lw - shift} f dr.
    fn cell(
        &self,
        rule: QuadratureRule,
        i: usize,
        f: &[f64],
        w: Option<Weight>,
        shift: f64,
        power: Option<&PowerRule>,
    ) -> f64 {
        if let (Some(pr), Some(w)) = (power, w) {
            return self.power_cell(rule, i, f, w, shift, pr);
        }
        let val = |t: usize| self.weighted(f, w.map(|w| w.log), shift, t);
        let h = self.h;
        let cells = self.full_len() - 1;
        match rule {
            QuadratureRule::Trapezoid => 0.5 * h * (val(i) + val(i + 1)),
            QuadratureRule::Cubic => {
                if i == 0 {
                    h / 24.0 * (9.0 * val(0) + 19.0 * val(1) - 5.0 * val(2) + val(3))
                } else if i == cells - 1 {
                    h / 24.0 * (9.0 * val(i + 1) + 19.0 * val(i) - 5.0 * val(i - 1) + val(i - 2))
                } else {
                    h / 24.0 * (-val(i - 1) + 13.0 * val(i) + 13.0 * val(i + 1) - val(i + 2))
                }
            }
        }
    }

    /// Cell integral with the weight written as s^p times a smooth factor;
    /// the smooth factor is interpolated on real nodes only and the product
    /// is integrated by Gauss-Legendre, exact for integer p.
    fn power_cell(&self, rule: QuadratureRule, i: usize, f: &[f64], w: Weight, shift: f64, pr: &PowerRule) -> f64 {
        let n = self.full_len();
        let (j0, m) = match rule {
            QuadratureRule::Cubic => (i.saturating_sub(1).clamp(1, n - 4), 4),
            QuadratureRule::Trapezoid => (i.clamp(1, n - 2), 2),
        };
        let h = self.h;
        let mut total = 0.0;
        for &(tau, gw) in &pr.gauss {
            let sg = (i as f64 + tau) * h;
            let mut acc = 0.0;
            for a in 0..m {
                let ja = j0 + a;
                let mut basis = 1.0;
                for b in 0..m {
                    if b != a {
                        let jb = (j0 + b) as f64;
                        basis *= (i as f64 + tau - jb) / (ja as f64 - jb);
                    }
                }
                let k = ja - 1;
                let sa = ja as f64 * h;
                let lg = w.log[k] - shift + pr.p * (sg / sa).ln();
                acc += basis * f[k] * self.jac[k] * lg.exp();
            }
            total += gw * acc;
        }
        h * total
    }

    /// Jacobian-weighted value on a full node, with the weight exp(lw - shift).
    fn weighted(&self, f: &[f64], lw: Option<&[f64]>, shift: f64, t: usize) -> f64 {
        if self.virtual_origin && t == 0 {
            return 0.0;
        }
        let j = t - self.offset();
        let base = f[j] * self.jac[j];
        match lw {
            Some(lw) => base * (lw[j] - shift).exp(),
            None => base,
        }
    }

    fn log_weight(&self, w: Option<Weight>, t: usize) -> f64 {
        match w {
            Some(w) if !(self.virtual_origin && t == 0) => w.log[t - self.offset()],
            Some(_) => f64::NEG_INFINITY,
            None => 0.0,
        }
    }

    /// H_j = (integral from the segment start to r_j of e^{lw} f dr) / e^{lw_j}.
    pub fn head_ratio(&self, rule: QuadratureRule, f: &[f64], w: Option<Weight>) -> Vec<f64> {
        let n = self.full_len();
        let power = self.power_rule(w);
        let mut out = vec![0.0; n];
        for t in 1..n {
            let lt = self.log_weight(w, t);
            let carry = if t - 1 == 0 && self.virtual_origin {
                0.0
            } else {
                out[t - 1] * (self.log_weight(w, t - 1) - lt).exp()
            };
            out[t] = carry + self.cell(rule, t - 1, f, w, lt, power.as_ref());
        }
        out.split_off(self.offset())
    }

    /// T_j = (integral from r_j to the segment end of e^{lw} f dr) / e^{lw_j}.
    pub fn tail_ratio(&self, rule: QuadratureRule, f: &[f64], w: Option<Weight>) -> Vec<f64> {
        let n = self.full_len();
        let power = self.power_rule(w);
        let mut out = vec![0.0; n];
        for t in (self.offset()..n - 1).rev() {
            let lt = self.log_weight(w, t);
            let carry = out[t + 1] * (self.log_weight(w, t + 1) - lt).exp();
            out[t] = carry + self.cell(rule, t, f, w, lt, power.as_ref());
        }
        out.split_off(self.offset())
    }

    /// Total of e^{lw - shift} f over the segment.
    pub fn scaled_total(&self, rule: QuadratureRule, f: &[f64], w: Option<Weight>, shift: f64) -> f64 {
        let power = self.power_rule(w);
        (0..self.full_len() - 1)
            .map(|t| self.cell(rule, t, f, w, shift, power.as_ref()))
            .sum()
    }
}

/// Radial grid on (0, r_max] with a duplicated node pair at r = 1.
///
/// Full-grid arrays are laid out as the left segment (ending at 1) followed
/// by the right segment (starting at 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub left: Segment,
    pub right: Segment,
    pub r_max: f64,
    pub rule: QuadratureRule,
    pub clustering: f64,
}

pub fn build_grid(cfg: &GridConfig, dc: &DerivedConstants) -> Result<RadialGrid> {
    if cfg.node_count < GridConfig::MIN_NODES {
        return Err(Error::Config(format!(
            "node_count {} is below the minimum {}",
            cfg.node_count,
            GridConfig::MIN_NODES
        )));
    }
    if !(0.0..1.0).contains(&cfg.clustering) {
        return Err(Error::Config(format!(
            "clustering {} must lie in [0, 1)",
            cfg.clustering
        )));
    }
    let r_max = match cfg.r_max {
        Some(r) => r,
        None => {
            if !(cfg.tail_threshold > 0.0) {
                return Err(Error::Config("tail_threshold must be positive".into()));
            }
            tail_radius(dc.g(), cfg.tail_threshold).max(GridConfig::MIN_R_MAX)
        }
    };
    if !(r_max >= GridConfig::MIN_R_MAX) || !r_max.is_finite() {
        return Err(Error::Config(format!("r_max = {r_max} must be at least 2")));
    }
    RadialGrid::new(cfg.node_count, r_max, cfg.clustering, cfg.rule)
}

impl RadialGrid {
    /// `node_count` counts both copies of r = 1.
    pub fn new(node_count: usize, r_max: f64, c: f64, rule: QuadratureRule) -> Result<Self> {
        Self::build(node_count, r_max, c, rule, true)
    }

    /// Same layout on [0, x_max] with a real node at 0, for integrands that
    /// do not vanish at the origin.
    pub fn half_line(node_count: usize, x_max: f64, c: f64, rule: QuadratureRule) -> Result<Self> {
        Self::build(node_count, x_max, c, rule, false)
    }

    fn build(node_count: usize, r_max: f64, c: f64, rule: QuadratureRule, virtual_origin: bool) -> Result<Self> {
        if node_count < 12 {
            return Err(Error::Config("too few nodes".into()));
        }
        let cells = node_count - 1 - usize::from(!virtual_origin);
        let n_left = ((cells as f64) / r_max).round().max(4.0) as usize;
        let n_right = cells - n_left;
        if n_right < 4 {
            return Err(Error::Config("too few nodes for the outer segment".into()));
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let hl = 1.0 / n_left as f64;
        let mut left = Segment {
            r: Vec::with_capacity(n_left + 1),
            jac: Vec::with_capacity(n_left + 1),
            h: hl,
            virtual_origin,
        };
        for i in usize::from(virtual_origin)..=n_left {
            let s = i as f64 * hl;
            let r = if i == n_left { 1.0 } else { s - c * (two_pi * s).sin() / two_pi };
            left.r.push(r);
            left.jac.push(1.0 - c * (two_pi * s).cos());
        }
        let len = r_max - 1.0;
        let hr = 1.0 / n_right as f64;
        let mut right = Segment {
            r: Vec::with_capacity(n_right + 1),
            jac: Vec::with_capacity(n_right + 1),
            h: hr,
            virtual_origin: false,
        };
        for i in 0..=n_right {
            let s = i as f64 * hr;
            let r = match i {
                0 => 1.0,
                _ if i == n_right => r_max,
                _ => 1.0 + len * (s + c * s * s) / (1.0 + c),
            };
            right.r.push(r);
            right.jac.push(len * (1.0 + 2.0 * c * s) / (1.0 + c));
        }
        Ok(Self {
            left,
            right,
            r_max,
            rule,
            clustering: c,
        })
    }

    pub fn len(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.left.r.iter().chain(&self.right.r).copied().collect()
    }

    /// Index of the left copy of r = 1; the right copy follows it.
    pub fn split_index(&self) -> usize {
        self.left.len() - 1
    }

    pub fn split<'a>(&self, v: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        v.split_at(self.left.len())
    }

    /// Evaluates `f(r, side)` at every node.
    pub fn sample(&self, mut f: impl FnMut(f64, crate::model::Side) -> f64) -> Vec<f64> {
        use crate::model::Side;
        let mut out = Vec::with_capacity(self.len());
        out.extend(self.left.r.iter().map(|&r| f(r, Side::Left)));
        out.extend(self.right.r.iter().map(|&r| f(r, Side::Right)));
        out
    }

    /// Integral of `values` over (0, r_max].
    pub fn integral(&self, values: &[f64]) -> f64 {
        let (l, r) = self.split(values);
        self.left.scaled_total(self.rule, l, None, 0.0) + self.right.scaled_total(self.rule, r, None, 0.0)
    }

    fn split_weight<'a>(&self, w: Weight<'a>) -> (Weight<'a>, Weight<'a>) {
        let n = self.left.len();
        (w.sub(0..n), w.sub(n..w.log.len()))
    }

    /// Integral of e^{w.log} * values over (0, r_max], returned relative to
    /// e^{offset} where offset is the largest log weight.
    pub fn weighted_integral(&self, w: Weight, values: &[f64]) -> LogScaled {
        let offset = w.log.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (fl, fr) = self.split(values);
        let (wl, wr) = self.split_weight(w);
        let value = self.left.scaled_total(self.rule, fl, Some(wl), offset)
            + self.right.scaled_total(self.rule, fr, Some(wr), offset);
        LogScaled { value, offset }
    }

    /// Weighted integral between two node indices of the full grid (`lo < hi`).
    /// Both indices of the r = 1 pair refer to the same radius.
    pub fn weighted_integral_between(&self, w: Weight, values: &[f64], lo: usize, hi: usize) -> LogScaled {
        let offset = w.log[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cum = self.cumulative_scaled(w, values, offset);
        LogScaled {
            value: cum[hi] - cum[lo],
            offset,
        }
    }

    /// Running integral from 0 at every node, relative to e^{offset}.
    fn cumulative_scaled(&self, w: Weight, values: &[f64], offset: f64) -> Vec<f64> {
        let (fl, fr) = self.split(values);
        let shifted: Vec<f64> = w.log.iter().map(|x| x - offset).collect();
        let (wl, wr) = self.split_weight(Weight::new(&shifted, w.origin_power));
        let hl = self.left.head_ratio(self.rule, fl, Some(wl));
        let hr = self.right.head_ratio(self.rule, fr, Some(wr));
        let mut out: Vec<f64> = hl.iter().zip(wl.log).map(|(h, l)| h * l.exp()).collect();
        let base = *out.last().unwrap();
        out.extend(hr.iter().zip(wr.log).map(|(h, l)| base + h * l.exp()));
        out
    }
}

/// A number stored as `value * exp(offset)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScaled {
    pub value: f64,
    pub offset: f64,
}

impl LogScaled {
    pub fn to_f64(self) -> f64 {
        self.value * self.offset.exp()
    }

    pub fn ratio(self, other: LogScaled) -> f64 {
        self.value / other.value * (self.offset - other.offset).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::{validate_params, ModelParams};
    use proptest::prelude::*;

    fn dc() -> DerivedConstants {
        validate_params(&ModelParams::new(3.0, 5, 0, 1.2)).unwrap()
    }

    #[test]
    fn default_grid_shape() {
        let g = build_grid(&GridConfig::default(), &dc()).unwrap();
        assert_eq!(g.len(), 4001);
        let nodes = g.nodes();
        assert!(nodes[0] > 0.0);
        assert_eq!(nodes.iter().filter(|&&r| r == 1.0).count(), 2);
        let i = g.split_index();
        assert_eq!(nodes[i], 1.0);
        assert_eq!(nodes[i + 1], 1.0);
        for w in nodes.windows(2).enumerate().filter(|(j, _)| *j != i) {
            assert!(w.1[1] > w.1[0]);
        }
        assert!((g.r_max - 3.364_752_895_65).abs() < 1e-9);
        assert!((2.0 * 3.0 * eval_s0(g.r_max) - 60.0).abs() < 1e-9);
    }

    #[test]
    fn config_errors() {
        let d = dc();
        assert!(build_grid(&GridConfig::default().with_nodes(499), &d).is_err());
        let cfg = GridConfig {
            r_max: Some(1.5),
            ..GridConfig::default()
        };
        assert!(build_grid(&cfg, &d).is_err());
    }

    #[test]
    fn large_coupling_keeps_minimum_radius() {
        let d = validate_params(&ModelParams::new(40.0, 3, 0, 1.0)).unwrap();
        let g = build_grid(&GridConfig::default(), &d).unwrap();
        assert_eq!(g.r_max, 2.0);
    }

    #[test]
    fn unit_integrand_gives_length() {
        for rule in [QuadratureRule::Trapezoid, QuadratureRule::Cubic] {
            let g = RadialGrid::new(801, 4.0, 0.5, rule).unwrap();
            let ones = vec![1.0; g.len()];
            let zeros = vec![0.0; g.len()];
            let i = g.split_index();
            let s = g.weighted_integral_between(Weight::new(&zeros, 0.0), &ones, i + 1, g.len() - 1);
            assert!((s.to_f64() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_integrand_vanishing_at_origin() {
        let g = RadialGrid::new(801, 4.0, 0.5, QuadratureRule::Cubic).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|&r| 2.0 * r).collect();
        assert!((g.integral(&f) - 16.0).abs() < 1e-8);
        let g = RadialGrid::new(801, 4.0, 0.5, QuadratureRule::Trapezoid).unwrap();
        assert!((g.integral(&f) - 16.0).abs() < 1e-4);
    }

    #[test]
    fn cubic_rule_is_exact_for_cubics_in_s() {
        let g = RadialGrid::new(600, 3.0, 0.0, QuadratureRule::Cubic).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|&r| r * r * r - 2.0 * r * r + r).collect();
        let exact = 81.0 / 4.0 - 18.0 + 4.5;
        assert!((g.integral(&f) - exact).abs() < 1e-11);
    }

    #[test]
    fn ratio_forms_match_plain_cumulative() {
        let g = RadialGrid::new(1001, 3.0, 0.5, QuadratureRule::Cubic).unwrap();
        let seg = &g.right;
        let lw: Vec<f64> = seg.r.iter().map(|&r| -30.0 * (r - 1.0) * (r - 1.0)).collect();
        let f: Vec<f64> = seg.r.iter().map(|&r| r.cos()).collect();
        let plain: Vec<f64> = f.iter().zip(&lw).map(|(f, l)| f * l.exp()).collect();
        let head_plain = seg.head_ratio(g.rule, &plain, None);
        let head = seg.head_ratio(g.rule, &f, Some(Weight::new(&lw, 0.0)));
        let tail_plain = seg.tail_ratio(g.rule, &plain, None);
        let tail = seg.tail_ratio(g.rule, &f, Some(Weight::new(&lw, 0.0)));
        for j in 0..seg.len() {
            let e = lw[j].exp();
            assert!((head[j] * e - head_plain[j]).abs() < 1e-14);
            assert!((tail[j] * e - tail_plain[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn weighted_integral_survives_extreme_offsets() {
        let g = RadialGrid::new(2001, 3.0, 0.5, QuadratureRule::Cubic).unwrap();
        let lw: Vec<f64> = g.nodes().iter().map(|&r| -2000.0 - (r - 1.5).powi(2)).collect();
        let ones = vec![1.0; g.len()];
        let s = g.weighted_integral_between(Weight::new(&lw, 0.0), &ones, g.split_index() + 1, g.len() - 1);
        let reference = std::f64::consts::PI.sqrt() * 0.5 * (erf(1.5) + erf(0.5));
        let value = s.value * (s.offset + 2000.0).exp();
        assert!((value - reference).abs() < 1e-9, "{value} vs {reference}");
        assert!(s.offset <= -2000.0 && s.offset > -2000.001);
    }

    fn erf(x: f64) -> f64 {
        let n = 200_000;
        let h = x / n as f64;
        let mut s = 0.5 * (1.0 + (-x * x).exp());
        for i in 1..n {
            let t = i as f64 * h;
            s += (-t * t).exp();
        }
        2.0 / std::f64::consts::PI.sqrt() * s * h
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 2..10 {
            let gl = gauss_legendre(n);
            for d in 0..(2 * n) {
                let s: f64 = gl.iter().map(|(x, w)| w * x.powi(d as i32)).sum();
                assert!((s - 1.0 / (d as f64 + 1.0)).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn power_weight_is_resolved_at_the_origin() {
        // int_0^r x^8 e^{-x} dx against a fine reference, at the first nodes.
        let g = RadialGrid::new(4001, 3.4, 0.5, QuadratureRule::Cubic).unwrap();
        let seg = &g.left;
        let lw: Vec<f64> = seg.r.iter().map(|&r| 8.0 * r.ln()).collect();
        let f: Vec<f64> = seg.r.iter().map(|&r| (-r).exp()).collect();
        let head = seg.head_ratio(g.rule, &f, Some(Weight::new(&lw, 8.0)));
        for j in [0usize, 1, 2, 5, 50, seg.len() - 1] {
            let r = seg.r[j];
            let n = 20_000;
            let hh = r / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let x0 = i as f64 * hh;
                for &(t, w) in &gauss_legendre(6) {
                    let x = x0 + t * hh;
                    acc += w * hh * x.powi(8) * (-x).exp();
                }
            }
            let got = head[j] * r.powi(8);
            assert!(((got - acc) / acc).abs() < 1e-9, "j={j} {got} {acc}");
        }
    }

    proptest! {
        #[test]
        fn integral_between_is_additive(lo in 0usize..1000, mid in 0usize..1000, hi in 0usize..1000) {
            let g = RadialGrid::new(1001, 3.0, 0.5, QuadratureRule::Cubic).unwrap();
            let mut ix = [lo, mid, hi];
            ix.sort_unstable();
            prop_assume!(ix[0] < ix[1] && ix[1] < ix[2]);
            let lw: Vec<f64> = g.nodes().iter().map(|&r| -r * r).collect();
            let f: Vec<f64> = g.nodes().iter().map(|&r| 1.0 + r).collect();
            let a = g.weighted_integral_between(Weight::new(&lw, 0.0), &f, ix[0], ix[1]).to_f64();
            let b = g.weighted_integral_between(Weight::new(&lw, 0.0), &f, ix[1], ix[2]).to_f64();
            let c = g.weighted_integral_between(Weight::new(&lw, 0.0), &f, ix[0], ix[2]).to_f64();
            prop_assert!((a + b - c).abs() < 1e-12);
        }
    }
}
