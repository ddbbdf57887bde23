//! Slow transfer operators of a pruned branch system, discretized by
//! Chebyshev collocation on compact charts, and their Fredholm
//! determinants.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branch::{Branch, BranchSystem, LimitData};
use crate::exec;
use crate::moebius::{BoundaryPoint, Moebius};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransferError {
    #[error("chart violations: {}", format_violations(.0))]
    ChartViolation(Vec<ChartViolation>),
    #[error("branch C{0} has no limit point to anchor a chart")]
    EmptyChart(usize),
    #[error("scan rectangle reaches Re s = {re} below the floor {floor}")]
    BelowFloor { re: f64, floor: f64 },
    #[error("collocation order must be positive")]
    ZeroOrder,
}

fn format_violations(v: &[ChartViolation]) -> String {
    v.iter()
        .map(|c| format!("({}, {}, {})", c.from, c.to, c.element))
        .collect::<Vec<_>>()
        .join(", ")
}

/// A transition `g ∈ 𝒢(from, to)` whose image of chart `to` escapes the
/// admissible part of I_from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartViolation {
    pub from: usize,
    pub to: usize,
    pub element: Moebius,
}

/// Compact interval inside I_j carrying the collocation nodes of branch j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartedInterval {
    pub label: usize,
    /// Index among the charts of the same branch, left to right.
    pub piece: usize,
    pub lo: f64,
    pub hi: f64,
}

impl ChartedInterval {
    pub fn to_reference(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    pub fn from_reference(&self, t: f64) -> f64 {
        0.5 * (self.lo + self.hi) + 0.5 * (self.hi - self.lo) * t
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

pub const DEFAULT_PADDING: f64 = 1.2;
const FIXUP_ROUNDS: usize = 200;

/// Distance from `x` to the base of `b`, or zero when `x` lies on the
/// wrong side.
fn room(b: &Branch, x: f64) -> f64 {
    if b.i_interval().contains(BoundaryPoint::Finite(x)) {
        (x - b.x).abs()
    } else {
        0.0
    }
}

fn pole(g: &Moebius) -> Option<f64> {
    (g.c() != 0.0).then(|| -g.d() / g.c())
}

fn image(g: &Moebius, c: &ChartedInterval) -> Option<(f64, f64)> {
    if pole(g).is_some_and(|p| p >= c.lo && p <= c.hi) {
        return None;
    }
    let (a, b) = (g.apply_real(c.lo)?, g.apply_real(c.hi)?);
    Some((a.min(b), a.max(b)))
}

/// `g ∈ 𝒢(j, k)` restricted to one chart of k, with the chart of j that
/// receives its image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartLink {
    pub source: usize,
    pub target: usize,
    pub from: usize,
    pub to: usize,
    pub element: Moebius,
}

/// Charts and the transitions between them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartAtlas {
    pub charts: Vec<ChartedInterval>,
    pub links: Vec<ChartLink>,
}

/// Limit points of I_k split at the poles of the transitions leaving k
/// and at known gaps of the limit set, so that no chart straddles a
/// singularity of its weights.
fn pieces(pts: &[f64], poles: &[f64], gaps: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut current: Vec<f64> = Vec::new();
    for &x in pts {
        if let Some(&prev) = current.last() {
            if poles.iter().any(|&p| prev < p && p < x)
                || gaps.iter().any(|&(a, b)| prev <= a && b <= x)
            {
                out.push(std::mem::take(&mut current));
            }
        }
        current.push(x);
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Charts from padded hulls of the known limit points, enlarged until every
/// transition maps its source chart into its target chart.
pub fn build_charts(
    sys: &BranchSystem,
    limits: &LimitData,
    padding: f64,
) -> Result<ChartAtlas, TransferError> {
    let mut charts: Vec<ChartedInterval> = Vec::new();
    // a limit point inside each chart, used to route images
    let mut anchors: Vec<f64> = Vec::new();
    for b in &sys.branches {
        let pts = limits.in_arc(&b.i_interval(), 1e-9);
        if pts.is_empty() {
            return Err(TransferError::EmptyChart(b.label));
        }
        let poles: Vec<f64> = sys
            .transitions
            .iter()
            .filter(|((_, k), _)| *k == b.label)
            .flat_map(|(_, gs)| gs.iter().filter_map(pole))
            .collect();
        let mut obstacles = poles.clone();
        obstacles.push(b.x);
        for (piece, group) in pieces(&pts, &poles, &limits.gaps).into_iter().enumerate() {
            let (lo, hi) = (group[0], group[group.len() - 1]);
            let below = obstacles
                .iter()
                .copied()
                .filter(|&o| o < lo)
                .fold(f64::NEG_INFINITY, f64::max);
            let above = obstacles
                .iter()
                .copied()
                .filter(|&o| o > hi)
                .fold(f64::INFINITY, f64::min);
            let gap = (lo - below).min(above - hi);
            let pad = if hi - lo > 1e-9 * (1.0 + lo.abs()) {
                0.5 * (padding - 1.0) * (hi - lo)
            } else {
                // a lone point gets a window scaled by its distance to the nearest obstacle
                (padding - 1.0) * gap.min(1.0 + lo.abs())
            };
            let pad = pad.min(0.5 * gap);
            charts.push(ChartedInterval {
                label: b.label,
                piece,
                lo: lo - pad,
                hi: hi + pad,
            });
            anchors.push(group[group.len() / 2]);
        }
    }
    let charts_of = |label: usize| -> Vec<usize> {
        (0..charts.len())
            .filter(|&i| charts[i].label == label)
            .collect()
    };
    let mut links = Vec::new();
    for ((j, k), gs) in &sys.transitions {
        let targets = charts_of(*j);
        for src in charts_of(*k) {
            for g in gs {
                let Some(y) = g.apply_real(anchors[src]) else {
                    continue;
                };
                let dist = |c: &ChartedInterval| {
                    if y < c.lo {
                        c.lo - y
                    } else if y > c.hi {
                        y - c.hi
                    } else {
                        0.0
                    }
                };
                let Some(&target) = targets
                    .iter()
                    .min_by(|&&a, &&b| dist(&charts[a]).total_cmp(&dist(&charts[b])))
                else {
                    continue;
                };
                links.push(ChartLink {
                    source: src,
                    target,
                    from: *j,
                    to: *k,
                    element: *g,
                });
            }
        }
    }
    for _ in 0..FIXUP_ROUNDS {
        let mut changed = false;
        for l in &links {
            let Some((a, b)) = image(&l.element, &charts[l.source]) else {
                continue;
            };
            let c = &mut charts[l.target];
            let slack = 1e-12 * (1.0 + c.lo.abs().max(c.hi.abs()));
            if a < c.lo - slack {
                c.lo = a;
                changed = true;
            }
            if b > c.hi + slack {
                c.hi = b;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut violations = Vec::new();
    for l in &links {
        let c = &charts[l.target];
        let inside = image(&l.element, &charts[l.source]).is_some_and(|(a, b)| {
            let slack = 1e-9 * (1.0 + c.lo.abs().max(c.hi.abs()));
            a >= c.lo - slack && b <= c.hi + slack
        });
        let branch = sys.branch(l.from).expect("links reference known branches");
        let admissible = room(branch, c.lo) > 0.0 && room(branch, c.hi) > 0.0;
        if !inside || !admissible {
            violations.push(ChartViolation {
                from: l.from,
                to: l.to,
                element: l.element,
            });
        }
    }
    if violations.is_empty() {
        Ok(ChartAtlas { charts, links })
    } else {
        Err(TransferError::ChartViolation(violations))
    }
}

/// Chebyshev points of the first kind on [−1, 1] with barycentric weights.
#[derive(Debug, Clone)]
pub struct Nodes {
    pub points: Vec<f64>,
    weights: Vec<f64>,
}

impl Nodes {
    pub fn new(n: usize) -> Self {
        let angle = |a: usize| PI * (2 * a + 1) as f64 / (2 * n) as f64;
        Nodes {
            points: (0..n).map(|a| angle(a).cos()).collect(),
            weights: (0..n)
                .map(|a| if a % 2 == 0 { 1.0 } else { -1.0 } * angle(a).sin())
                .collect(),
        }
    }

    /// Values of all Lagrange basis polynomials at `t`.
    pub fn basis_at(&self, t: f64) -> Vec<f64> {
        if let Some(i) = self.points.iter().position(|&p| p == t) {
            let mut v = vec![0.0; self.points.len()];
            v[i] = 1.0;
            return v;
        }
        let terms: Vec<f64> = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w / (t - p))
            .collect();
        let total: f64 = terms.iter().sum();
        terms.into_iter().map(|q| q / total).collect()
    }
}

/// |g′(x)|^s for real x, computed as exp(−2s·ln|cx + d|).
pub fn weight(g: &Moebius, x: f64, s: Complex64) -> Complex64 {
    let log_w = -2.0 * (g.c() * x + g.d()).abs().ln();
    (s * log_w).exp()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferFamily {
    pub system: BranchSystem,
    pub atlas: ChartAtlas,
}

#[derive(Debug, Clone)]
pub struct TransferOperatorMatrix {
    pub s: Complex64,
    pub order: usize,
    /// Branch label of each chart block.
    pub labels: Vec<usize>,
    pub entries: DMatrix<Complex64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionReport {
    /// Largest |g′| over sampled chart points and transitions.
    pub worst: f64,
    pub violations: Vec<ChartViolation>,
}

impl TransferFamily {
    pub fn new(
        system: BranchSystem,
        limits: &LimitData,
        padding: f64,
    ) -> Result<Self, TransferError> {
        let atlas = build_charts(&system, limits, padding)?;
        Ok(TransferFamily { system, atlas })
    }

    pub fn charts(&self) -> &[ChartedInterval] {
        &self.atlas.charts
    }

    pub fn dimension(&self, order: usize) -> usize {
        self.atlas.charts.len() * order
    }

    /// Collocation matrix of the operator at `s`: rows are (source chart,
    /// node), columns are (target chart, basis polynomial).
    pub fn assemble(
        &self,
        s: Complex64,
        order: usize,
    ) -> Result<TransferOperatorMatrix, TransferError> {
        if order == 0 {
            return Err(TransferError::ZeroOrder);
        }
        let nodes = Nodes::new(order);
        let charts = &self.atlas.charts;
        let dim = charts.len() * order;
        let mut outgoing: Vec<Vec<&ChartLink>> = vec![Vec::new(); charts.len()];
        for l in &self.atlas.links {
            outgoing[l.source].push(l);
        }
        let rows = exec::map_range(dim, |r| {
            let (c, a) = (r / order, r % order);
            let x = charts[c].from_reference(nodes.points[a]);
            let mut row = vec![Complex64::new(0.0, 0.0); dim];
            for l in &outgoing[c] {
                let Some(gx) = l.element.apply_real(x) else {
                    continue;
                };
                let w = weight(&l.element, x, s);
                let basis = nodes.basis_at(charts[l.target].to_reference(gx));
                for (b, v) in basis.into_iter().enumerate() {
                    row[l.target * order + b] += w * v;
                }
            }
            row
        });
        let entries = DMatrix::from_fn(dim, dim, |r, c| rows[r][c]);
        Ok(TransferOperatorMatrix {
            s,
            order,
            labels: charts.iter().map(|c| c.label).collect(),
            entries,
        })
    }

    /// det(I − M_s) without the eigenvalue diagnostics.
    pub fn det(&self, s: Complex64, order: usize) -> Result<Complex64, TransferError> {
        Ok(det_i_minus(&self.assemble(s, order)?))
    }

    /// Largest |g′| of each transition over its source chart, sampled.
    pub fn contraction(&self, samples: usize) -> ContractionReport {
        let samples = samples.max(1);
        let mut worst: f64 = 0.0;
        let mut violations = Vec::new();
        for l in &self.atlas.links {
            let chart = self.atlas.charts[l.source];
            let g = &l.element;
            let top = (0..=samples)
                .map(|i| chart.lo + chart.width() * i as f64 / samples as f64)
                .map(|x| 1.0 / (g.c() * x + g.d()).powi(2))
                .fold(0.0, f64::max);
            worst = worst.max(top);
            if top >= 1.0 + 1e-9 {
                violations.push(ChartViolation {
                    from: l.from,
                    to: l.to,
                    element: *g,
                });
            }
        }
        ContractionReport { worst, violations }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FredholmDet {
    pub det: Complex64,
    pub log_abs: f64,
    /// Up to five eigenvalues of the collocation matrix, largest modulus first.
    pub leading_eigenvalues: Vec<Complex64>,
}

fn det_i_minus(m: &TransferOperatorMatrix) -> Complex64 {
    let dim = m.entries.nrows();
    if dim == 0 {
        return Complex64::new(1.0, 0.0);
    }
    (DMatrix::<Complex64>::identity(dim, dim) - &m.entries)
        .lu()
        .determinant()
}

/// det(I − M) by pivoted LU, with eigenvalue diagnostics from a Schur form.
pub fn fredholm_det(m: &TransferOperatorMatrix) -> FredholmDet {
    let det = det_i_minus(m);
    if m.entries.nrows() == 0 {
        return FredholmDet {
            det,
            log_abs: 0.0,
            leading_eigenvalues: Vec::new(),
        };
    }
    let mut eig: Vec<Complex64> = m
        .entries
        .clone()
        .try_schur(1e-14, 10_000)
        .and_then(|s| s.eigenvalues())
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default();
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    eig.truncate(5);
    FredholmDet {
        det,
        log_abs: det.norm().ln(),
        leading_eigenvalues: eig,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub s: Complex64,
    pub residual: f64,
}

/// A grid candidate whose polishing did not settle on a zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoConvergence {
    pub start: Complex64,
    pub last: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScanResult {
    pub roots: Vec<Root>,
    pub failures: Vec<NoConvergence>,
    pub evaluations: usize,
}

pub const DEFAULT_RE_FLOOR: f64 = 0.25;
const SECANT_STEPS: usize = 60;

/// Zeros of s ↦ det(I − M_s) inside `rect`: grid minima of |det| polished
/// by the secant method.
pub fn resonance_scan(
    family: &TransferFamily,
    rect: Rect,
    grid: usize,
    order: usize,
    re_floor: f64,
) -> Result<ScanResult, TransferError> {
    if rect.re_min < re_floor {
        return Err(TransferError::BelowFloor {
            re: rect.re_min,
            floor: re_floor,
        });
    }
    if order == 0 {
        return Err(TransferError::ZeroOrder);
    }
    if family.system.transition_count() == 0 {
        return Ok(ScanResult::default());
    }
    let g = grid.max(2);
    let (dre, dim) = (
        (rect.re_max - rect.re_min) / g as f64,
        (rect.im_max - rect.im_min) / g as f64,
    );
    let at = |i: usize, j: usize| {
        Complex64::new(rect.re_min + dre * i as f64, rect.im_min + dim * j as f64)
    };
    let det_at = |s: Complex64| {
        family
            .det(s, order)
            .unwrap_or(Complex64::new(f64::NAN, 0.0))
    };
    let values = exec::map_range((g + 1) * (g + 1), |idx| {
        det_at(at(idx / (g + 1), idx % (g + 1))).norm()
    });
    let val = |i: usize, j: usize| values[i * (g + 1) + j];

    // the minimum modulus principle puts interior minima of |det| near zeros
    let mut starts = Vec::new();
    for i in 1..g {
        for j in 1..g {
            let v = val(i, j);
            let neighbours = [
                (i - 1, j - 1),
                (i - 1, j),
                (i - 1, j + 1),
                (i, j - 1),
                (i, j + 1),
                (i + 1, j - 1),
                (i + 1, j),
                (i + 1, j + 1),
            ];
            if neighbours.iter().all(|&(a, b)| v < val(a, b)) {
                starts.push(at(i, j));
            }
        }
    }
    let step = Complex64::new(0.25 * dre, 0.25 * dim);
    let polished = exec::map(&starts, |&s0| secant(&det_at, s0, step));
    let scale = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
        .max(1.0);
    let mut out = ScanResult {
        evaluations: values.len(),
        ..Default::default()
    };
    for (start, (last, residual, converged)) in starts.iter().zip(polished) {
        let inside = last.re >= rect.re_min - dre
            && last.re <= rect.re_max + dre
            && last.im >= rect.im_min - dim
            && last.im <= rect.im_max + dim;
        if converged && inside && residual <= 1e-8 * scale {
            if !out.roots.iter().any(|r| (r.s - last).norm() < 1e-8) {
                out.roots.push(Root { s: last, residual });
            }
        } else {
            out.failures.push(NoConvergence {
                start: *start,
                last,
                residual,
            });
        }
    }
    out.roots
        .sort_by(|a, b| a.s.re.total_cmp(&b.s.re).then(a.s.im.total_cmp(&b.s.im)));
    Ok(out)
}

fn secant(
    f: &impl Fn(Complex64) -> Complex64,
    s0: Complex64,
    step: Complex64,
) -> (Complex64, f64, bool) {
    let (mut a, mut b) = (s0, s0 + step);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..SECANT_STEPS {
        let denom = fb - fa;
        if denom.norm() == 0.0 || !denom.is_finite() {
            break;
        }
        let c = b - fb * (b - a) / denom;
        a = b;
        fa = fb;
        b = c;
        fb = f(b);
        if (b - a).norm() <= 1e-13 * (1.0 + b.norm()) {
            return (b, fb.norm(), true);
        }
    }
    (b, fb.norm(), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::{Facing, Provenance};
    use crate::fixtures::h_lambda;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// The pruned system of ⟨h_2⟩ written out by hand.
    fn cyclic_system() -> (BranchSystem, LimitData) {
        let p = 3.0 - 2.0 * 2f64.sqrt();
        let h = h_lambda(2.0);
        let mk = |label, x, facing| Branch { label, x, facing };
        let mut sys = BranchSystem::new(
            vec![
                mk(2, -p, Facing::Right),
                mk(3, p, Facing::Right),
                mk(5, p, Facing::Left),
                mk(6, -p, Facing::Left),
            ],
            Provenance::UserSupplied,
            "cyclic",
        );
        sys.transitions.insert((2, 3), vec![Moebius::IDENTITY]);
        sys.transitions.insert((3, 2), vec![h]);
        sys.transitions.insert((5, 6), vec![Moebius::IDENTITY]);
        sys.transitions.insert((6, 5), vec![h.inverse()]);
        let limits = LimitData {
            points: vec![-1.0, 1.0],
            ..Default::default()
        };
        (sys, limits)
    }

    fn cyclic_closed_form(s: f64) -> f64 {
        (0..80)
            .map(|k| (1.0 - 2f64.powf(-(s + k as f64))).powi(2))
            .product()
    }

    #[test]
    fn barycentric_basis_interpolates() {
        let nodes = Nodes::new(16);
        let f = |t: f64| (2.0 * t).exp();
        let vals: Vec<f64> = nodes.points.iter().map(|&t| f(t)).collect();
        for t in [-0.9, -0.3, 0.0, 0.41, 0.99] {
            let p: f64 = nodes
                .basis_at(t)
                .iter()
                .zip(&vals)
                .map(|(l, v)| l * v)
                .sum();
            assert_relative_eq!(p, f(t), epsilon = 1e-9);
        }
        let at_node = nodes.basis_at(nodes.points[3]);
        assert_eq!(at_node[3], 1.0);
    }

    #[test]
    fn weight_is_derivative_power() {
        let h = h_lambda(2.0);
        let x = 0.7;
        let d = h.deriv_mag(BoundaryPoint::Finite(x)).unwrap();
        let w = weight(&h, x, Complex64::new(1.5, 0.3));
        let expected = (Complex64::new(1.5, 0.3) * d.ln()).exp();
        assert_relative_eq!(w.re, expected.re, epsilon = 1e-14);
        assert_relative_eq!(w.im, expected.im, epsilon = 1e-14);
    }

    #[test]
    fn empty_transitions_give_zero_matrix() {
        let (mut sys, lim) = cyclic_system();
        sys.transitions.clear();
        let fam = TransferFamily::new(sys, &lim, DEFAULT_PADDING).unwrap();
        let m = fam.assemble(c(2.0), 4).unwrap();
        assert!(m.entries.iter().all(|z| z.norm() == 0.0));
        assert_eq!(fredholm_det(&m).det, c(1.0));
        let scan = resonance_scan(
            &fam,
            Rect {
                re_min: 0.5,
                re_max: 2.5,
                im_min: -1.0,
                im_max: 1.0,
            },
            8,
            4,
            DEFAULT_RE_FLOOR,
        )
        .unwrap();
        assert!(scan.roots.is_empty());
    }

    #[test]
    fn one_by_one_matrix() {
        let g = Moebius::new(0.5, 0.0, 0.0, 2.0).unwrap();
        let mut sys = BranchSystem::new(
            vec![Branch {
                label: 1,
                x: -1.0,
                facing: Facing::Right,
            }],
            Provenance::UserSupplied,
            "one",
        );
        sys.transitions.insert((1, 1), vec![g]);
        let lim = LimitData {
            points: vec![0.0],
            ..Default::default()
        };
        let fam = TransferFamily::new(sys, &lim, DEFAULT_PADDING).unwrap();
        let s = Complex64::new(1.3, 0.2);
        let m = fam.assemble(s, 1).unwrap();
        let x0 = fam.charts()[0].from_reference(0.0);
        let w = weight(&g, x0, s);
        assert_relative_eq!((m.entries[(0, 0)] - w).norm(), 0.0, epsilon = 1e-15);
        let d = fredholm_det(&m).det;
        assert_relative_eq!((d - (c(1.0) - w)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn real_s_gives_real_matrix() {
        let (sys, lim) = cyclic_system();
        let fam = TransferFamily::new(sys, &lim, DEFAULT_PADDING).unwrap();
        let m = fam.assemble(c(1.5), 6).unwrap();
        assert!(m.entries.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn cyclic_det_matches_closed_form() {
        let (sys, lim) = cyclic_system();
        let fam = TransferFamily::new(sys, &lim, DEFAULT_PADDING).unwrap();
        for s in [1.0, 1.5, 2.0] {
            let d = fam.det(c(s), 24).unwrap();
            assert_relative_eq!(d.re, cyclic_closed_form(s), max_relative = 1e-6);
            assert!(d.im.abs() < 1e-14);
        }
        // order n holds n eigenvalues per cycle; the rest of the 2^{−(s+k)}
        // tail is lost
        let d16 = fam.det(c(1.0), 16).unwrap().re;
        let lost = 2.0 * 2f64.powi(-17);
        assert!((d16 / cyclic_closed_form(1.0) - 1.0).abs() > 0.5 * lost);
    }

    #[test]
    fn charts_contain_images() {
        let (sys, lim) = cyclic_system();
        let fam = TransferFamily::new(sys, &lim, 1.5).unwrap();
        assert_eq!(fam.charts().len(), 4);
        for l in &fam.atlas.links {
            let (a, b) = image(&l.element, &fam.charts()[l.source]).unwrap();
            let t = fam.charts()[l.target];
            assert!(a >= t.lo - 1e-12 && b <= t.hi + 1e-12);
        }
        assert!(fam
            .contraction(32)
            .violations
            .iter()
            .all(|v| v.element.is_identity(1e-12)));
    }

    #[test]
    fn charts_split_at_poles() {
        let parts = pieces(&[-4.0, -3.0, 2.5, 3.5, 6.0], &[3.0, 10.0], &[]);
        assert_eq!(parts.len(), 2);
        let parts = pieces(&[-4.0, -3.0, 2.5, 3.5, 6.0], &[3.0, 10.0], &[(-2.0, 2.0)]);
        assert_eq!(parts[0], vec![-4.0, -3.0]);
        assert_eq!(parts[2], vec![3.5, 6.0]);
    }

    #[test]
    fn padding_invariance() {
        let (sys, lim) = cyclic_system();
        let fams: Vec<TransferFamily> = [1.05, 1.2, 1.5]
            .iter()
            .map(|&p| TransferFamily::new(sys.clone(), &lim, p).unwrap())
            .collect();
        let d: Vec<Complex64> = fams.iter().map(|f| f.det(c(2.0), 48).unwrap()).collect();
        assert!((d[0] - d[1]).norm() < 1e-8);
        assert!((d[0] - d[2]).norm() < 1e-8);
        let top = |f: &TransferFamily, n| {
            fredholm_det(&f.assemble(c(2.0), n).unwrap()).leading_eigenvalues[0].norm()
        };
        for f in &fams {
            assert!((top(f, 16) - top(f, 24)).abs() < 1e-10);
        }
    }

    #[test]
    fn cyclic_scan_has_no_roots() {
        let (sys, lim) = cyclic_system();
        let fam = TransferFamily::new(sys, &lim, DEFAULT_PADDING).unwrap();
        let rect = Rect {
            re_min: 0.5,
            re_max: 2.5,
            im_min: -1.0,
            im_max: 1.0,
        };
        let scan = resonance_scan(&fam, rect, 8, 8, DEFAULT_RE_FLOOR).unwrap();
        assert!(scan.roots.is_empty(), "{scan:?}");
        assert!(matches!(
            resonance_scan(
                &fam,
                Rect {
                    re_min: 0.0,
                    ..rect
                },
                8,
                8,
                DEFAULT_RE_FLOOR
            ),
            Err(TransferError::BelowFloor { .. })
        ));
    }

    #[test]
    fn leading_eigenvalues_are_sorted() {
        let (sys, lim) = cyclic_system();
        let fam = TransferFamily::new(sys, &lim, DEFAULT_PADDING).unwrap();
        let fd = fredholm_det(&fam.assemble(c(1.0), 8).unwrap());
        assert!(!fd.leading_eigenvalues.is_empty());
        // the 2-cycle has eigenvalues ±2^{−1/2} at s = 1
        assert_relative_eq!(
            fd.leading_eigenvalues[0].norm(),
            0.5f64.sqrt(),
            epsilon = 1e-9
        );
    }
}
