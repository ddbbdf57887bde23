//! Sets of branches: vertical base geodesics with a facing, transition sets
//! found by first-return shooting, the property verifier, pruning to the
//! active set, and descent checks back to the original group.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auxiliary::AuxiliaryGroup;
use crate::check::Check;
use crate::exec;
use crate::group::{contains_up_to, ConjClass, GroupPresentation, Membership, WordBall};
use crate::moebius::{BoundaryInterval, BoundaryPoint, FixedPoints, Geodesic, Moebius};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BranchError {
    #[error("no branch carries a periodic geodesic; cutoff too small")]
    EmptyActiveSet,
    #[error("unknown branch label {0}")]
    UnknownBranch(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Facing {
    Left,
    Right,
}

impl fmt::Display for Facing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Facing::Left => write!(f, "L"),
            Facing::Right => write!(f, "R"),
        }
    }
}

/// Unit tangent vectors on the vertical geodesic above `x` pointing into
/// the half-plane selected by `facing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    /// 1-based label, kept through pruning.
    pub label: usize,
    pub x: f64,
    pub facing: Facing,
}

impl Branch {
    /// Boundary arc of the half-space the vectors point into.
    pub fn i_interval(&self) -> BoundaryInterval {
        let x = BoundaryPoint::Finite(self.x);
        match self.facing {
            Facing::Right => BoundaryInterval::new(x, BoundaryPoint::Infinity),
            Facing::Left => BoundaryInterval::new(BoundaryPoint::Infinity, x),
        }
    }

    pub fn j_interval(&self) -> BoundaryInterval {
        let x = BoundaryPoint::Finite(self.x);
        match self.facing {
            Facing::Right => BoundaryInterval::new(BoundaryPoint::Infinity, x),
            Facing::Left => BoundaryInterval::new(x, BoundaryPoint::Infinity),
        }
    }

    pub fn base(&self) -> Geodesic {
        Geodesic::vertical(self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Constructed,
    UserSupplied,
}

pub type TransitionMap = BTreeMap<(usize, usize), Vec<Moebius>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchSystem {
    pub branches: Vec<Branch>,
    /// 𝒢(j, k) keyed by branch labels.
    pub transitions: TransitionMap,
    pub provenance: Provenance,
    pub group_ref: String,
}

impl BranchSystem {
    pub fn new(branches: Vec<Branch>, provenance: Provenance, group_ref: &str) -> Self {
        BranchSystem {
            branches,
            transitions: BTreeMap::new(),
            provenance,
            group_ref: group_ref.to_string(),
        }
    }

    pub fn branch(&self, label: usize) -> Option<&Branch> {
        self.branches.iter().find(|b| b.label == label)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.branches.iter().map(|b| b.label).collect()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.values().map(Vec::len).sum()
    }

    /// Cardinality of each nonempty 𝒢(j, k).
    pub fn cardinalities(&self) -> BTreeMap<(usize, usize), usize> {
        self.transitions
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| (*k, v.len()))
            .collect()
    }

    pub fn x_values(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self.branches.iter().map(|b| b.x).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * (1.0 + b.abs()));
        xs
    }
}

/// Axis endpoints of one hyperbolic element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisPair {
    pub attracting: f64,
    pub repelling: f64,
}

/// Endpoints of periodic geodesics known at the current cutoff.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LimitData {
    pub pairs: Vec<AxisPair>,
    /// Sorted, deduplicated endpoints of `pairs`.
    pub points: Vec<f64>,
    /// Real intervals known to contain no limit point.
    #[serde(default)]
    pub gaps: Vec<(f64, f64)>,
}

impl LimitData {
    pub fn with_gaps(mut self, gaps: Vec<(f64, f64)>) -> Self {
        self.gaps = gaps;
        self
    }

    pub fn in_arc(&self, arc: &BoundaryInterval, margin: f64) -> Vec<f64> {
        self.points
            .iter()
            .copied()
            .filter(|&x| {
                arc.contains_with_margin(BoundaryPoint::Finite(x), margin * (1.0 + x.abs()))
            })
            .collect()
    }
}

/// Axes of the conjugates q r q⁻¹ of the class representatives by the
/// conjugator ball.
pub fn limit_data(classes: &[ConjClass], conjugators: &WordBall) -> LimitData {
    let eps = conjugators.eps;
    let mut pairs: Vec<AxisPair> = Vec::new();
    for c in classes {
        let Ok(FixedPoints::Hyperbolic {
            attracting,
            repelling,
        }) = c.representative.fixed_points(eps)
        else {
            continue;
        };
        for q in conjugators.iter() {
            let (Some(a), Some(r)) = (
                q.element.apply_boundary(attracting).finite(),
                q.element.apply_boundary(repelling).finite(),
            ) else {
                continue;
            };
            pairs.push(AxisPair {
                attracting: a,
                repelling: r,
            });
        }
    }
    pairs.sort_by(|p, q| {
        p.attracting
            .total_cmp(&q.attracting)
            .then(p.repelling.total_cmp(&q.repelling))
    });
    pairs.dedup_by(|p, q| {
        (p.attracting - q.attracting).abs() < 1e-10 * (1.0 + q.attracting.abs())
            && (p.repelling - q.repelling).abs() < 1e-10 * (1.0 + q.repelling.abs())
    });
    let mut points: Vec<f64> = pairs
        .iter()
        .flat_map(|p| [p.attracting, p.repelling])
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-10 * (1.0 + b.abs()));
    LimitData {
        pairs,
        points,
        gaps: Vec::new(),
    }
}

/// A candidate base point with the facings it carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub x: f64,
    pub facings: Vec<Facing>,
}

/// Candidate base points: strip walls, the points where ∂K meets the real
/// line, and centers of relevant spheres, normalized into [α′, β′].
pub fn candidate_base_points(aux: &AuxiliaryGroup) -> Vec<BasePoint> {
    let both = vec![Facing::Right, Facing::Left];
    let mut raw: Vec<(f64, Vec<Facing>)> = vec![
        (aux.alpha_prime, both.clone()),
        (aux.beta_prime, both.clone()),
    ];
    for x in aux.domain.real_endpoints() {
        raw.push((x, both.clone()));
    }
    for s in &aux.domain.sides {
        raw.push((s.sphere.center, vec![Facing::Right]));
    }
    let tol = 1e-9;
    let mut out: Vec<BasePoint> = Vec::new();
    for (x, facings) in raw {
        let x = normalize_into_strip(x, aux.alpha_prime, aux.beta_prime, aux.lambda);
        match out
            .iter_mut()
            .find(|b| (b.x - x).abs() <= tol * (1.0 + x.abs()))
        {
            Some(b) => {
                for f in facings {
                    if !b.facings.contains(&f) {
                        b.facings.push(f);
                    }
                }
            }
            None => out.push(BasePoint { x, facings }),
        }
    }
    for b in &mut out {
        b.facings.sort_by_key(|f| match f {
            Facing::Right => 0,
            Facing::Left => 1,
        });
    }
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    out
}

fn normalize_into_strip(x: f64, left: f64, right: f64, lambda: f64) -> f64 {
    let tol = 1e-9 * (1.0 + x.abs());
    let mut x = x;
    while x < left - tol {
        x += lambda;
    }
    while x > right + tol {
        x -= lambda;
    }
    x
}

/// Numbers the branches: right-facing left to right, then left-facing
/// right to left.
pub fn number_branches(points: &[BasePoint]) -> Vec<Branch> {
    let mut out = Vec::new();
    for p in points {
        if p.facings.contains(&Facing::Right) {
            out.push(Branch {
                label: out.len() + 1,
                x: p.x,
                facing: Facing::Right,
            });
        }
    }
    for p in points.iter().rev() {
        if p.facings.contains(&Facing::Left) {
            out.push(Branch {
                label: out.len() + 1,
                x: p.x,
                facing: Facing::Left,
            });
        }
    }
    out
}

pub fn construct_system(aux: &AuxiliaryGroup, group_ref: &str) -> BranchSystem {
    BranchSystem::new(
        number_branches(&candidate_base_points(aux)),
        Provenance::Constructed,
        group_ref,
    )
}

/// Image of a branch under a ball element.
#[derive(Debug, Clone, Copy)]
struct Translate {
    ball_index: usize,
    label: usize,
    base: Geodesic,
    i_arc: BoundaryInterval,
    j_arc: BoundaryInterval,
}

fn translates(branches: &[Branch], ball: &WordBall) -> Vec<Translate> {
    let mut out = Vec::with_capacity(branches.len() * ball.len());
    for (gi, g) in ball.iter().enumerate() {
        for b in branches {
            let m = &g.element;
            out.push(Translate {
                ball_index: gi,
                label: b.label,
                base: m.apply_geodesic(&b.base()),
                i_arc: m.apply_interval(&b.i_interval()),
                j_arc: m.apply_interval(&b.j_interval()),
            });
        }
    }
    out
}

const POINT_MARGIN: f64 = 1e-9;

fn strictly_in(arc: &BoundaryInterval, x: f64) -> bool {
    arc.contains_with_margin(BoundaryPoint::Finite(x), POINT_MARGIN * (1.0 + x.abs()))
}

/// Position along the geodesic from `y` to `x` where it meets `base`.
fn crossing_param(y: f64, x: f64, base: &Geodesic) -> Option<f64> {
    let cross_x = match (base.minus_end, base.plus_end) {
        (BoundaryPoint::Finite(p), BoundaryPoint::Infinity)
        | (BoundaryPoint::Infinity, BoundaryPoint::Finite(p)) => p,
        (BoundaryPoint::Finite(p), BoundaryPoint::Finite(q)) => {
            let (c1, r1) = (0.5 * (x + y), 0.5 * (x - y).abs());
            let (c2, r2) = (0.5 * (p + q), 0.5 * (p - q).abs());
            if (c2 - c1).abs() < 1e-300 {
                return None;
            }
            (r1 * r1 - r2 * r2 + c2 * c2 - c1 * c1) / (2.0 * (c2 - c1))
        }
        _ => return None,
    };
    Some((cross_x - y) / (x - y))
}

/// Outcome of one shot.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Shot {
    Hit { label: usize, ball_index: usize },
    Tie,
    Miss,
}

const PARAM_TOL: f64 = 1e-9;

fn shoot(j: &Branch, x: f64, y: f64, trs: &[Translate]) -> Shot {
    let s0 = (j.x - y) / (x - y);
    let mut best: Option<(f64, usize, usize)> = None;
    let mut tie = false;
    for t in trs {
        if !(strictly_in(&t.i_arc, x) && strictly_in(&t.j_arc, y)) {
            continue;
        }
        let Some(s) = crossing_param(y, x, &t.base) else {
            continue;
        };
        if s <= s0 + PARAM_TOL {
            continue;
        }
        match best {
            None => best = Some((s, t.label, t.ball_index)),
            Some((bs, bl, bi)) => {
                if (s - bs).abs() <= PARAM_TOL {
                    if (t.label, t.ball_index) != (bl, bi) {
                        tie = true;
                    }
                } else if s < bs {
                    best = Some((s, t.label, t.ball_index));
                    tie = false;
                }
            }
        }
    }
    match best {
        Some(_) if tie => Shot::Tie,
        Some((_, label, ball_index)) => Shot::Hit { label, ball_index },
        None => Shot::Miss,
    }
}

/// Up to `n` points spread over the sorted input by quantiles.
fn quantile_pick(points: &[f64], n: usize) -> Vec<f64> {
    if points.len() <= n || n == 0 {
        return points.to_vec();
    }
    if n == 1 {
        return vec![points[points.len() / 2]];
    }
    let mut out: Vec<f64> = (0..n)
        .map(|i| points[(i * (points.len() - 1) + (n - 1) / 2) / (n - 1)])
        .collect();
    out.dedup();
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchStats {
    pub label: usize,
    pub shots: usize,
    pub resolved: usize,
    pub ties: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionResult {
    pub system: BranchSystem,
    pub stats: Vec<BranchStats>,
    /// Shots with no crossing inside the ball: (branch, x, y).
    pub unresolved: Vec<(usize, f64, f64)>,
    pub grid: usize,
    pub cutoff: usize,
}

/// First-return transitions by shooting geodesics between known limit
/// points on either side of each base.
pub fn compute_transitions(
    sys: &BranchSystem,
    ball: &WordBall,
    limits: &LimitData,
    grid: usize,
) -> TransitionResult {
    let trs = translates(&sys.branches, ball);
    let mut jobs: Vec<(usize, f64, f64)> = Vec::new();
    for (pos, b) in sys.branches.iter().enumerate() {
        let xs = quantile_pick(&limits.in_arc(&b.i_interval(), POINT_MARGIN), grid);
        let ys = quantile_pick(&limits.in_arc(&b.j_interval(), POINT_MARGIN), grid);
        for &x in &xs {
            for &y in &ys {
                jobs.push((pos, x, y));
            }
        }
    }
    let shots = exec::map(&jobs, |&(pos, x, y)| shoot(&sys.branches[pos], x, y, &trs));

    let mut found: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    let mut stats: Vec<BranchStats> = sys
        .branches
        .iter()
        .map(|b| BranchStats {
            label: b.label,
            shots: 0,
            resolved: 0,
            ties: 0,
        })
        .collect();
    let mut unresolved = Vec::new();
    for (&(pos, x, y), shot) in jobs.iter().zip(&shots) {
        let st = &mut stats[pos];
        st.shots += 1;
        let j = sys.branches[pos].label;
        match shot {
            Shot::Hit { label, ball_index } => {
                st.resolved += 1;
                found.entry((j, *label)).or_default().insert(*ball_index);
            }
            Shot::Tie => st.ties += 1,
            Shot::Miss => unresolved.push((j, x, y)),
        }
    }
    let mut system = sys.clone();
    system.transitions = found
        .into_iter()
        .map(|(key, idx)| {
            (
                key,
                idx.into_iter()
                    .map(|i| ball.elements()[i].element)
                    .collect(),
            )
        })
        .collect();
    TransitionResult {
        system,
        stats,
        unresolved,
        grid,
        cutoff: ball.radius,
    }
}

/// Keeps the branches whose I × J carries the axis of some known periodic
/// geodesic. Labels are preserved.
pub fn prune_to_active(
    sys: &BranchSystem,
    limits: &LimitData,
) -> Result<BranchSystem, BranchError> {
    let active: Vec<Branch> = sys
        .branches
        .iter()
        .copied()
        .filter(|b| carries_axis(b, limits))
        .collect();
    if active.is_empty() {
        return Err(BranchError::EmptyActiveSet);
    }
    let keep: BTreeSet<usize> = active.iter().map(|b| b.label).collect();
    let transitions = sys
        .transitions
        .iter()
        .filter(|((j, k), _)| keep.contains(j) && keep.contains(k))
        .map(|(k, v)| (*k, v.clone()))
        .collect();
    Ok(BranchSystem {
        branches: active,
        transitions,
        provenance: sys.provenance,
        group_ref: sys.group_ref.clone(),
    })
}

fn carries_axis(b: &Branch, limits: &LimitData) -> bool {
    let (i, j) = (b.i_interval(), b.j_interval());
    limits
        .pairs
        .iter()
        .any(|p| strictly_in(&i, p.attracting) && strictly_in(&j, p.repelling))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchReport {
    pub cutoff: usize,
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl BranchReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn fmt_branch(b: &Branch) -> String {
    format!("C{} ({:.6}, {})", b.label, b.x, b.facing)
}

/// The set-of-branches properties, each quantified at the ball cutoff and
/// over the known limit data.
pub fn verify_branch_properties(
    sys: &BranchSystem,
    group: &GroupPresentation,
    ball: &WordBall,
    classes: &[ConjClass],
    limits: &LimitData,
    samples: usize,
    seed: u64,
) -> BranchReport {
    let eps = ball.eps;
    let trs = translates(&sys.branches, ball);
    let mut checks = Vec::new();

    // B1: every branch carries a periodic geodesic
    let missing: Vec<String> = sys
        .branches
        .iter()
        .filter(|b| !carries_axis(b, limits))
        .map(fmt_branch)
        .collect();
    checks.push(
        Check::new(
            "B1",
            missing.is_empty(),
            format!("{} branches without a periodic geodesic", missing.len()),
        )
        .with_witnesses(missing),
    );

    // B2: no known limit point at a base endpoint
    let close: Vec<String> = sys
        .branches
        .iter()
        .filter_map(|b| {
            limits
                .points
                .iter()
                .find(|&&p| (p - b.x).abs() <= 1e-9 * (1.0 + b.x.abs()))
                .map(|p| format!("{} meets limit point {p}", fmt_branch(b)))
        })
        .collect();
    checks.push(
        Check::new(
            "B2",
            close.is_empty(),
            format!(
                "no witness found at cutoff {}: {}",
                ball.radius,
                close.is_empty()
            ),
        )
        .with_witnesses(close),
    );

    // B4: translates of the I_j cover the known limit points
    let uncovered: Vec<String> = limits
        .points
        .iter()
        .filter(|&&p| !trs.iter().any(|t| strictly_in(&t.i_arc, p)))
        .map(|p| p.to_string())
        .collect();
    checks.push(
        Check::new(
            "B4",
            uncovered.is_empty(),
            format!("{} limit points uncovered", uncovered.len()),
        )
        .with_witnesses(uncovered),
    );

    checks.push(Check::new(
        "B5",
        true,
        "I_j × J_j parametrizes C_j by construction",
    ));

    // B6: translated bases meet only as permitted
    let mut b6 = Vec::new();
    for t in &trs {
        for b in &sys.branches {
            let same_elem = t.ball_index == 0 && t.label == b.label;
            if same_elem {
                continue;
            }
            let base = b.base();
            if t.base.same_set(&base, eps * 100.0) {
                // allowed only with opposite facing: g.I_k = J_j
                let opposite = t.i_arc.left.approx_eq(b.j_interval().left, 1e-8)
                    && t.i_arc.right.approx_eq(b.j_interval().right, 1e-8);
                if !opposite {
                    b6.push(format!(
                        "{} · C{} coincides with {}",
                        group.format_word(&ball.elements()[t.ball_index].word),
                        t.label,
                        fmt_branch(b)
                    ));
                }
            } else if let Ok(Some(_)) = crate::moebius::geodesic_meets(&t.base, &base, eps) {
                b6.push(format!(
                    "{} · C{} crosses {}",
                    group.format_word(&ball.elements()[t.ball_index].word),
                    t.label,
                    fmt_branch(b)
                ));
            }
        }
    }
    checks.push(
        Check::new(
            "B6",
            b6.is_empty(),
            format!("{} forbidden base intersections", b6.len()),
        )
        .with_witnesses(b6),
    );

    // B7a: inclusion, disjointness and coverage of known limit points
    let mut b7a = Vec::new();
    for j in &sys.branches {
        let ij = j.i_interval();
        let mut images: Vec<(String, BoundaryInterval)> = Vec::new();
        for ((a, k), gs) in &sys.transitions {
            if *a != j.label {
                continue;
            }
            let Some(bk) = sys.branch(*k) else {
                b7a.push(format!("transition into unknown branch {k}"));
                continue;
            };
            for g in gs {
                let img = g.apply_interval(&bk.i_interval());
                if !ij.contains_arc(&img, 1e-9) {
                    b7a.push(format!("g.I_{k} ⊄ I_{} for g = {g}", j.label));
                }
                images.push((format!("C{k} via {g}"), img));
            }
        }
        for a in 0..images.len() {
            for b in a + 1..images.len() {
                if !images[a].1.disjoint_from(&images[b].1, 1e-9) {
                    b7a.push(format!(
                        "overlap in I_{}: {} and {}",
                        j.label, images[a].0, images[b].0
                    ));
                }
            }
        }
        for p in limits.in_arc(&ij, POINT_MARGIN) {
            if !images.iter().any(|(_, img)| strictly_in(img, p)) {
                b7a.push(format!("limit point {p} of I_{} not covered", j.label));
            }
        }
    }
    checks.push(
        Check::new("B7a", b7a.is_empty(), format!("{} violations", b7a.len())).with_witnesses(b7a),
    );

    // B7b: no translate of the branch union between C_j and g.C_k
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b7b = Vec::new();
    let mut b7b_tested = 0usize;
    for ((j, k), gs) in &sys.transitions {
        let (Some(bj), Some(bk)) = (sys.branch(*j), sys.branch(*k)) else {
            continue;
        };
        for g in gs {
            let gi = g.apply_interval(&bk.i_interval());
            let mut xs = limits.in_arc(&gi, POINT_MARGIN);
            let mut ys = limits.in_arc(&bj.j_interval(), POINT_MARGIN);
            xs.shuffle(&mut rng);
            ys.shuffle(&mut rng);
            let target = Translate {
                ball_index: usize::MAX,
                label: *k,
                base: g.apply_geodesic(&bk.base()),
                i_arc: gi,
                j_arc: g.apply_interval(&bk.j_interval()),
            };
            for (x, y) in xs.iter().zip(ys.iter().cycle()).take(samples.max(1)) {
                b7b_tested += 1;
                let s0 = (bj.x - y) / (x - y);
                let Some(s_end) = crossing_param(*y, *x, &target.base) else {
                    b7b.push(format!("no crossing with g.C{k} for ({x}, {y})"));
                    continue;
                };
                let blocked = trs.iter().any(|t| {
                    strictly_in(&t.i_arc, *x)
                        && strictly_in(&t.j_arc, *y)
                        && crossing_param(*y, *x, &t.base)
                            .is_some_and(|s| s > s0 + PARAM_TOL && s < s_end - PARAM_TOL)
                });
                if s_end <= s0 || blocked {
                    b7b.push(format!("C{j} → {g}·C{k} interrupted for ({x}, {y})"));
                }
            }
        }
    }
    checks.push(
        Check::new(
            "B7b",
            b7b.is_empty(),
            format!("{} of {b7b_tested} sampled segments interrupted", b7b.len()),
        )
        .with_witnesses(b7b),
    );

    // B7c: J_j is covered by pulled-back J_k
    let mut b7c = Vec::new();
    for j in &sys.branches {
        let mut ys = limits.in_arc(&j.j_interval(), POINT_MARGIN);
        ys.shuffle(&mut rng);
        for y in ys.into_iter().take(samples.max(1)) {
            let reached = sys.transitions.iter().any(|((k, jj), hs)| {
                *jj == j.label
                    && sys.branch(*k).is_some_and(|bk| {
                        hs.iter().any(|h| {
                            h.apply_real(y)
                                .is_some_and(|hy| strictly_in(&bk.j_interval(), hy))
                        })
                    })
            });
            if !reached {
                b7c.push(format!("y = {y} in J_{} unreached", j.label));
            }
        }
    }
    checks.push(
        Check::new(
            "B7c",
            b7c.is_empty(),
            format!("{} unreached samples", b7c.len()),
        )
        .with_witnesses(b7c),
    );

    // every periodic axis meets a translate of the branch union
    let mut missed = Vec::new();
    for c in classes {
        let Ok(FixedPoints::Hyperbolic {
            attracting,
            repelling,
        }) = c.representative.fixed_points(eps)
        else {
            continue;
        };
        let (Some(x), Some(y)) = (attracting.finite(), repelling.finite()) else {
            continue;
        };
        if !trs
            .iter()
            .any(|t| strictly_in(&t.i_arc, x) && strictly_in(&t.j_arc, y))
        {
            missed.push(group.format_word(&c.word));
        }
    }
    checks.push(
        Check::new(
            "periodic_axes_meet_branches",
            missed.is_empty(),
            format!(
                "{} of {} class axes miss the branch union",
                missed.len(),
                classes.len()
            ),
        )
        .with_witnesses(missed),
    );

    BranchReport {
        cutoff: ball.radius,
        samples,
        checks,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionWord {
    pub from: usize,
    pub to: usize,
    pub word: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DescentReport {
    pub cutoff: usize,
    pub memberships: Vec<TransitionWord>,
    pub max_word_length: usize,
    /// (branch, word) pairs whose translated intervals cover all known
    /// limit points.
    pub covering_pair: Option<((usize, String), (usize, String))>,
    pub checks: Vec<Check>,
}

impl DescentReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Transition elements lie in Γ, and two translated I-intervals cover the
/// known limit set.
pub fn check_group_descent(
    sys: &BranchSystem,
    group: &GroupPresentation,
    ball: &WordBall,
    limits: &LimitData,
    cover_word_len: usize,
) -> DescentReport {
    let mut memberships = Vec::new();
    let mut unknown = Vec::new();
    let mut max_len = 0;
    for ((j, k), gs) in &sys.transitions {
        for g in gs {
            match contains_up_to(ball, g) {
                Membership::Yes(w) => {
                    max_len = max_len.max(w.len());
                    memberships.push(TransitionWord {
                        from: *j,
                        to: *k,
                        word: Some(group.format_word(&w)),
                    });
                }
                Membership::Unknown => {
                    unknown.push(format!("({j}, {k}): {g}"));
                    memberships.push(TransitionWord {
                        from: *j,
                        to: *k,
                        word: None,
                    });
                }
            }
        }
    }
    let mut checks = vec![Check::new(
        "transitions_in_group",
        unknown.is_empty(),
        format!(
            "{} transitions found in the Γ ball of radius {}; {} unknown",
            memberships.len() - unknown.len(),
            ball.radius,
            unknown.len()
        ),
    )
    .with_witnesses(unknown)];

    // covering pair among short translates
    let cands: Vec<(usize, usize, BoundaryInterval)> = ball
        .up_to(cover_word_len)
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| {
            sys.branches
                .iter()
                .map(move |b| (b.label, gi, g.element.apply_interval(&b.i_interval())))
        })
        .collect();
    let cover_sets: Vec<Vec<bool>> = exec::map(&cands, |(_, _, arc)| {
        limits.points.iter().map(|&p| strictly_in(arc, p)).collect()
    });
    let mut pair = None;
    'outer: for a in 0..cands.len() {
        for b in a..cands.len() {
            if (0..limits.points.len()).all(|i| cover_sets[a][i] || cover_sets[b][i]) {
                let word = |gi: usize| group.format_word(&ball.elements()[gi].word);
                pair = Some((
                    (cands[a].0, word(cands[a].1)),
                    (cands[b].0, word(cands[b].1)),
                ));
                break 'outer;
            }
        }
    }
    checks.push(Check::new(
        "two_translates_cover_limit_set",
        pair.is_some(),
        match &pair {
            Some(((j, g), (k, h))) => format!(
                "{g}·I_{j} ∪ {h}·I_{k} covers {} limit points",
                limits.points.len()
            ),
            None => format!("no pair among words of length ≤ {cover_word_len}"),
        },
    ));
    DescentReport {
        cutoff: ball.radius,
        memberships,
        max_word_length: max_len,
        covering_pair: pair,
        checks,
    }
}

/// Words of all transitions in a ball, for reporting.
pub fn transition_words(
    sys: &BranchSystem,
    group: &GroupPresentation,
    ball: &WordBall,
) -> BTreeMap<String, Vec<String>> {
    sys.transitions
        .iter()
        .map(|((j, k), gs)| {
            (
                format!("{j},{k}"),
                gs.iter()
                    .map(|g| match ball.find(g) {
                        Some(e) => group.format_word(&e.word),
                        None => g.to_string(),
                    })
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxiliary::{build_auxiliary, Walls};
    use crate::fixtures::{cyclic, example_walls, h_lambda, hecke_free, s_involution};
    use crate::group::{primitive_hyperbolic_classes, ClassOptions};
    use approx::assert_relative_eq;

    fn example_aux() -> AuxiliaryGroup {
        let (ap, bp) = example_walls();
        build_auxiliary(
            &hecke_free(2.0, 8),
            Walls::Explicit {
                alpha_prime: ap,
                beta_prime: bp,
            },
        )
        .unwrap()
    }

    fn limits_for(g: &GroupPresentation, n: usize) -> (WordBall, Vec<ConjClass>, LimitData) {
        let ball = g.enumerate_ball(n).unwrap();
        let classes = primitive_hyperbolic_classes(g, &ball, 6.0, ClassOptions::default());
        let lim = limit_data(&classes, &g.enumerate_ball(n / 2).unwrap());
        (ball, classes, lim)
    }

    #[test]
    fn intervals_by_facing() {
        let r = Branch {
            label: 1,
            x: 0.0,
            facing: Facing::Right,
        };
        assert!(r.i_interval().contains(BoundaryPoint::Finite(1.0)));
        assert!(r.j_interval().contains(BoundaryPoint::Finite(-1.0)));
        let l = Branch {
            facing: Facing::Left,
            ..r
        };
        assert!(l.i_interval().contains(BoundaryPoint::Finite(-1.0)));
        assert!(!l.i_interval().contains(BoundaryPoint::Infinity));
    }

    #[test]
    fn example_candidates_and_numbering() {
        let aux = example_aux();
        let pts = candidate_base_points(&aux);
        let r2 = 2f64.sqrt();
        let expected = [
            -(3.0 + 3.0 * r2),
            -(3.0 + 2.0 * r2),
            -3.0,
            0.0,
            3.0,
            3.0 + 2.0 * r2,
            3.0 + 3.0 * r2,
        ];
        assert_eq!(pts.len(), 7);
        for (p, e) in pts.iter().zip(expected) {
            assert_relative_eq!(p.x, e, epsilon = 1e-9);
        }
        let branches = number_branches(&pts);
        assert_eq!(branches.len(), 11);
        assert_eq!(branches[3].label, 4);
        assert_relative_eq!(branches[3].x, 0.0, epsilon = 1e-12);
        assert_eq!(branches[3].facing, Facing::Right);
        assert_eq!(branches[7].facing, Facing::Left);
        assert_relative_eq!(branches[7].x, expected[6], epsilon = 1e-9);
    }

    #[test]
    fn single_sphere_candidates() {
        let g = GroupPresentation::with_default_eps(vec![("s", s_involution())], 2).unwrap();
        let aux = build_auxiliary(&g, Walls::Default).unwrap();
        let xs: Vec<f64> = candidate_base_points(&aux).iter().map(|b| b.x).collect();
        assert_eq!(xs.len(), 5);
        assert_relative_eq!(xs[1], -1.0);
        assert_relative_eq!(xs[2], 0.0);
        assert_relative_eq!(xs[3], 1.0);
    }

    #[test]
    fn example_prunes_to_branch_four() {
        let aux = example_aux();
        let sys = construct_system(&aux, "hecke");
        let (ball, _, lim) = limits_for(&aux.base, 8);
        let full = compute_transitions(&sys, &ball, &lim, 32);
        let pruned = prune_to_active(&full.system, &lim).unwrap();
        assert_eq!(pruned.labels(), vec![4]);
        let g44 = &pruned.transitions[&(4, 4)];
        assert_eq!(g44.len(), 1);
        assert!(g44[0].approx_eq(&h_lambda(2.0), 1e-9));
    }

    #[test]
    fn cyclic_system_verifies() {
        let g = cyclic(2.0, 8);
        let aux = build_auxiliary(&g, Walls::Default).unwrap();
        let sys = construct_system(&aux, "cyclic");
        let (ball, classes, lim) = limits_for(&g, 8);
        let full = compute_transitions(&sys, &ball, &lim, 32);
        let pruned = prune_to_active(&full.system, &lim).unwrap();
        assert_eq!(pruned.branches.len(), 4);
        let rep = verify_branch_properties(&pruned, &g, &ball, &classes, &lim, 16, 5);
        assert!(rep.all_pass(), "{rep:#?}");
        let desc = check_group_descent(&pruned, &g, &g.enumerate_ball(6).unwrap(), &lim, 2);
        assert!(desc.all_pass(), "{desc:#?}");
    }

    #[test]
    fn deleting_a_branch_breaks_coverage() {
        let g = cyclic(2.0, 8);
        let aux = build_auxiliary(&g, Walls::Default).unwrap();
        let sys = construct_system(&aux, "cyclic");
        let (ball, classes, lim) = limits_for(&g, 8);
        let full = compute_transitions(&sys, &ball, &lim, 32);
        let mut pruned = prune_to_active(&full.system, &lim).unwrap();
        let gone = pruned.branches.remove(1).label;
        pruned
            .transitions
            .retain(|(j, k), _| *j != gone && *k != gone);
        let rep = verify_branch_properties(&pruned, &g, &ball, &classes, &lim, 16, 5);
        assert!(!rep.check("B7a").unwrap().pass || !rep.check("B4").unwrap().pass);
    }

    #[test]
    fn empty_limit_data_has_no_active_branch() {
        let aux = example_aux();
        let sys = construct_system(&aux, "hecke");
        assert_eq!(
            prune_to_active(&sys, &LimitData::default()).unwrap_err(),
            BranchError::EmptyActiveSet
        );
    }

    #[test]
    fn quantiles() {
        let pts: Vec<f64> = (0..100).map(f64::from).collect();
        let q = quantile_pick(&pts, 5);
        assert_eq!(q.len(), 5);
        assert_eq!(q[0], 0.0);
        assert_eq!(q[4], 99.0);
        assert_eq!(quantile_pick(&pts[..3], 5).len(), 3);
    }
}
