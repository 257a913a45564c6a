use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{tail_radius, GridConfig, QuadratureRule, RadialGrid, Weight};
use crate::model::eval_s0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrototypeConfig {
    pub node_count: usize,
    pub tail_threshold: f64,
    pub clustering: f64,
    pub rule: QuadratureRule,
}

impl Default for PrototypeConfig {
    fn default() -> Self {
        Self {
            node_count: 4001,
            tail_threshold: 60.0,
            clustering: 0.5,
            rule: QuadratureRule::Cubic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeResult {
    pub g: f64,
    pub x_max: f64,
    /// E_n for n = 1..=n_max.
    pub shifts: Vec<f64>,
    /// e_1 = E_1 - 1/4, e_n = E_n - E_{n-1}.
    pub gaps: Vec<f64>,
    /// g_n(0) = f_n(0) - f_{n-1}(0).
    pub g0: Vec<f64>,
    pub f0: Vec<f64>,
    pub charge_residues: Vec<f64>,
    /// Largest |E_n - [u f_{n-1}]/[f_{n-1}]| over n.
    pub ratio_form_mismatch: f64,
    pub shifts_ascending: bool,
    pub gaps_positive: bool,
    /// f_n' <= 0 for every n (up to round-off).
    pub f_decreasing: bool,
    /// g_n' < 0 for every n (up to round-off).
    pub g_decreasing: bool,
    /// [u - 1/4] and the lower bound (1/3) e^{-4g/3} it must exceed.
    pub u_quarter: f64,
    pub u_quarter_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub shift: f64,
    pub gap: f64,
    pub bound: f64,
    pub margin: f64,
    pub g0: f64,
    pub g0_bound: f64,
    pub g0_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub g: f64,
    pub rows: Vec<BoundRow>,
    /// e_n < (5/24)(9/g)^n for every row.
    pub gap_bound_holds: bool,
    /// g_n(0) < (9/g)^n for every row.
    pub g0_bound_holds: bool,
}

struct Line {
    grid: RadialGrid,
    log_phi2: Vec<f64>,
    u: Vec<f64>,
}

impl Line {
    fn weight(&self) -> Weight<'_> {
        Weight::new(&self.log_phi2, 0.0)
    }

    /// [F] = int F phi^2 dx.
    fn bracket(&self, f: &[f64]) -> f64 {
        self.grid.weighted_integral(self.weight(), f).to_f64()
    }

    /// Solution G of -(phi^2 G')'/2 = src phi^2 with G'(0) = 0, G(x_max) = 0,
    /// assuming src has zero total charge.
    fn integrate_out(&self, src: &[f64]) -> Result<Vec<f64>> {
        let grid = &self.grid;
        let (sl, sr) = grid.split(src);
        let (ll, lr) = grid.split(&self.log_phi2);
        let head = grid.left.head_ratio(grid.rule, sl, Some(Weight::new(ll, 0.0)));
        let tail = grid.right.tail_ratio(grid.rule, sr, Some(Weight::new(lr, 0.0)));
        let mut q: Vec<f64> = head.iter().map(|h| -h).collect();
        q.extend(tail);
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::Overflow { context: "prototype inner integral / phi^2" });
        }
        let (ql, qr) = grid.split(&q);
        let out_r = grid.right.tail_ratio(grid.rule, qr, None);
        let out_l = grid.left.tail_ratio(grid.rule, ql, None);
        let at_one = -2.0 * out_r[0];
        let mut g: Vec<f64> = out_l.iter().map(|o| at_one - 2.0 * o).collect();
        g.extend(out_r.iter().map(|o| -2.0 * o));
        Ok(g)
    }
}

fn decreasing(grid: &RadialGrid, v: &[f64]) -> bool {
    let split = grid.split_index();
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    v.windows(2)
        .enumerate()
        .filter(|(i, _)| *i != split)
        .all(|(_, w)| w[1] - w[0] <= 1e-13 * scale)
}

pub fn prototype1d_solve(g: f64, n_max: usize) -> Result<PrototypeResult> {
    prototype1d_solve_with(g, n_max, &PrototypeConfig::default())
}

/// Iterates the half-line problem with phi = 2/(x+1) e^{-g S0} and
/// u = 1/(1+x)^2, f_n'(0) = 0 and f_n(x_max) = 1.
///
/// Each step is carried in difference form: with g_n = f_n - f_{n-1},
/// e_n = [(u - E_{n-1}) g_{n-1}] / [f_{n-1}] and g_n solves the same
/// boundary problem with source (u - E_{n-1}) g_{n-1} - e_n f_{n-1}, which
/// keeps small gaps free of cancellation.
pub fn prototype1d_solve_with(g: f64, n_max: usize, cfg: &PrototypeConfig) -> Result<PrototypeResult> {
    if !(g > 2.0) {
        return Err(Error::Config(format!("prototype requires g > 2, got {g}")));
    }
    if n_max == 0 {
        return Err(Error::Config("n_max must be at least 1".into()));
    }
    if cfg.node_count < GridConfig::MIN_NODES {
        return Err(Error::Config(format!("node_count {} is below 500", cfg.node_count)));
    }
    let x_max = tail_radius(g, cfg.tail_threshold).max(GridConfig::MIN_R_MAX);
    let grid = RadialGrid::half_line(cfg.node_count, x_max, cfg.clustering, cfg.rule)?;
    let nodes = grid.nodes();
    let log_phi2: Vec<f64> = nodes
        .iter()
        .map(|&x| 2.0 * (std::f64::consts::LN_2 - (x + 1.0).ln() - g * eval_s0(x)))
        .collect();
    let u: Vec<f64> = nodes.iter().map(|&x| 1.0 / ((1.0 + x) * (1.0 + x))).collect();
    let line = Line { grid, log_phi2, u };
    let n = nodes.len();

    let mut f = vec![1.0; n];
    let ones = f.clone();
    let norm = line.bracket(&ones);
    let u_quarter = line.bracket(&line.u.iter().map(|u| u - 0.25).collect::<Vec<_>>());
    let mut shift = line.bracket(&line.u) / norm;
    let mut gap = u_quarter / norm;
    let mut src: Vec<f64> = line.u.iter().map(|u| u - shift).collect();

    let mut res = PrototypeResult {
        g,
        x_max,
        shifts: Vec::new(),
        gaps: Vec::new(),
        g0: Vec::new(),
        f0: Vec::new(),
        charge_residues: Vec::new(),
        ratio_form_mismatch: 0.0,
        shifts_ascending: true,
        gaps_positive: true,
        f_decreasing: true,
        g_decreasing: true,
        u_quarter,
        u_quarter_bound: (-4.0 * g / 3.0).exp() / 3.0,
    };
    let mut prev_f = f.clone();
    for step in 1..=n_max {
        let direct = line.bracket(&line.u.iter().zip(&f).map(|(u, f)| u * f).collect::<Vec<_>>())
            / line.bracket(&f);
        res.ratio_form_mismatch = res.ratio_form_mismatch.max((direct - shift).abs());
        let scale = line.bracket(&src.iter().map(|s| s.abs()).collect::<Vec<_>>());
        res.charge_residues.push((line.bracket(&src) / scale).abs());

        let gn = line.integrate_out(&src)?;
        res.shifts.push(shift);
        res.gaps.push(gap);
        res.g0.push(gn[0]);
        res.g_decreasing &= decreasing(&line.grid, &gn);
        prev_f.clone_from(&f);
        for (fi, gi) in f.iter_mut().zip(&gn) {
            *fi += gi;
        }
        res.f0.push(f[0]);
        res.f_decreasing &= decreasing(&line.grid, &f);
        if step == n_max {
            break;
        }
        // next gap and source in difference form
        let num: Vec<f64> = line.u.iter().zip(&gn).map(|(u, gi)| (u - shift) * gi).collect();
        let next_gap = line.bracket(&num) / line.bracket(&f);
        src = num
            .iter()
            .zip(&f)
            .map(|(a, fi)| a - next_gap * fi)
            .collect();
        gap = next_gap;
        shift += next_gap;
    }
    res.shifts_ascending = res.shifts.windows(2).all(|w| w[1] > w[0]);
    res.gaps_positive = res.gaps.iter().all(|&e| e > 0.0);
    Ok(res)
}

pub fn check_rate_bound(g: f64, n_max: usize) -> Result<BoundReport> {
    let res = prototype1d_solve(g, n_max)?;
    Ok(bound_report(&res))
}

pub fn bound_report(res: &PrototypeResult) -> BoundReport {
    let ratio = 9.0 / res.g;
    let rows: Vec<BoundRow> = res
        .gaps
        .iter()
        .enumerate()
        .map(|(i, &gap)| {
            let n = i + 1;
            let bound = 5.0 / 24.0 * ratio.powi(n as i32);
            let g0_bound = ratio.powi(n as i32);
            BoundRow {
                n,
                shift: res.shifts[i],
                gap,
                bound,
                margin: bound - gap,
                g0: res.g0[i],
                g0_bound,
                g0_margin: g0_bound - res.g0[i],
            }
        })
        .collect();
    BoundReport {
        g: res.g,
        gap_bound_holds: rows.iter().all(|r| r.gap < r.bound),
        g0_bound_holds: rows.iter().all(|r| r.g0 < r.g0_bound),
        rows,
    }
}
