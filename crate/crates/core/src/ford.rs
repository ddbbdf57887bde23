//! The common exterior of isometric spheres: upper envelope, sides,
//! vertices, vertex cycles, condition (A) and fundamental-domain spot
//! checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::group::{BallElement, Word, WordBall};
use crate::iso::{sphere_of, IsometricSphere};
use crate::moebius::HPoint;

/// Arcs shorter than this (relative to the coordinate scale) are treated
/// as touching points, not sides.
pub const ARC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FordError {
    #[error("no isometric spheres given")]
    EmptyInput,
    #[error("every ball element stabilizes infinity")]
    NoSpheres,
    #[error("side {side} has no partner side or its vertex image is missing; cutoff too small")]
    PairingIncomplete { side: usize },
}

/// Endpoint of a side; `y == 0` marks a point on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcEnd {
    pub x: f64,
    pub y: f64,
}

impl ArcEnd {
    pub fn is_real(&self) -> bool {
        self.y <= 0.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeSide {
    pub sphere: IsometricSphere,
    pub word: Option<Word>,
    pub start: ArcEnd,
    pub end: ArcEnd,
    /// Index of the side lying on iso(g⁻¹).
    pub partner: Option<usize>,
}

impl EnvelopeSide {
    pub fn summit_inside(&self, tol: f64) -> bool {
        let c = self.sphere.center;
        let scale = tol * (1.0 + c.abs());
        self.start.x + scale < c && c < self.end.x - scale
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vertex {
    pub point: HPoint,
    pub left: usize,
    pub right: usize,
    /// Interior angle of the domain at the vertex, radians.
    pub angle: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FordDomain {
    pub sides: Vec<EnvelopeSide>,
    pub alpha: f64,
    pub beta: f64,
    /// Real intervals between α and β not covered by any shadow.
    pub gaps: Vec<(f64, f64)>,
    pub vertices: Vec<Vertex>,
}

impl FordDomain {
    /// Height of ∂K above `x` (zero outside the shadows).
    pub fn height_at(&self, x: f64) -> f64 {
        self.sides
            .iter()
            .map(|s| s.sphere.height_at(x))
            .fold(0.0, f64::max)
    }

    /// Strictly above every side by more than `tol`.
    pub fn in_interior(&self, z: HPoint, tol: f64) -> bool {
        self.sides
            .iter()
            .all(|s| s.sphere.offset(z) > tol * (1.0 + s.sphere.radius))
    }

    /// In the closure, up to `tol`.
    pub fn in_closure(&self, z: HPoint, tol: f64) -> bool {
        self.sides
            .iter()
            .all(|s| s.sphere.offset(z) >= -tol * (1.0 + s.sphere.radius))
    }

    pub fn spheres(&self) -> Vec<IsometricSphere> {
        self.sides.iter().map(|s| s.sphere).collect()
    }

    pub fn max_radius(&self) -> f64 {
        self.sides
            .iter()
            .map(|s| s.sphere.radius)
            .fold(0.0, f64::max)
    }

    /// Points where ∂K meets the real line, left to right.
    pub fn real_endpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for s in &self.sides {
            if s.start.is_real() {
                out.push(s.start.x);
            }
            if s.end.is_real() {
                out.push(s.end.x);
            }
        }
        out
    }

    /// Largest mismatch of g.(arc of iso(g)) against the partner arc.
    pub fn side_pairing_defect(&self) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for side in &self.sides {
            let p = &self.sides[side.partner?];
            let g = side.sphere.generator;
            let img = |e: ArcEnd| -> (f64, f64) {
                if e.is_real() {
                    match g.apply_real(e.x) {
                        Some(x) => (x, 0.0),
                        None => (f64::INFINITY, 0.0),
                    }
                } else {
                    let w = g.apply_interior(HPoint { x: e.x, y: e.y });
                    (w.x, w.y)
                }
            };
            let d = |a: (f64, f64), b: ArcEnd| (a.0 - b.x).abs().max((a.1 - b.y).abs());
            let (s0, s1) = (img(side.start), img(side.end));
            let defect = d(s0, p.end)
                .max(d(s1, p.start))
                .min(d(s0, p.start).max(d(s1, p.end)));
            worst = worst.max(defect);
        }
        Some(worst)
    }
}

fn dedup_spheres(spheres: &[IsometricSphere], eps: f64) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::new();
    for (i, s) in spheres.iter().enumerate() {
        if !keep.iter().any(|&j| spheres[j].same_circle(s, eps)) {
            keep.push(i);
        }
    }
    // drop spheres swallowed by another one
    keep.iter()
        .copied()
        .filter(|&i| {
            let a = &spheres[i];
            !keep.iter().any(|&j| {
                let b = &spheres[j];
                j != i && (a.center - b.center).abs() + a.radius < b.radius - eps
            })
        })
        .collect()
}

/// Upper envelope of the given semicircles, by breakpoint sweep.
pub fn upper_envelope(spheres: &[IsometricSphere], eps: f64) -> Result<FordDomain, FordError> {
    upper_envelope_with_words(spheres, &vec![None; spheres.len()], eps)
}

pub fn upper_envelope_with_words(
    spheres: &[IsometricSphere],
    words: &[Option<Word>],
    eps: f64,
) -> Result<FordDomain, FordError> {
    if spheres.is_empty() {
        return Err(FordError::EmptyInput);
    }
    let keep = dedup_spheres(spheres, eps);
    let sph: Vec<IsometricSphere> = keep.iter().map(|&i| spheres[i]).collect();

    let mut xs: Vec<f64> = Vec::new();
    for (i, a) in sph.iter().enumerate() {
        xs.push(a.center - a.radius);
        xs.push(a.center + a.radius);
        for b in &sph[i + 1..] {
            let dc = b.center - a.center;
            if dc.abs() < a.radius + b.radius && dc.abs() > (a.radius - b.radius).abs() {
                let x = (a.radius * a.radius - b.radius * b.radius + b.center * b.center
                    - a.center * a.center)
                    / (2.0 * dc);
                xs.push(x);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));

    let pieces: Vec<(f64, f64)> = xs.windows(2).map(|w| (w[0], w[1])).collect();
    let owners: Vec<Option<usize>> = exec::map(&pieces, |&(x0, x1)| {
        let scale = 1.0 + x0.abs().max(x1.abs());
        if x1 - x0 <= ARC_TOL * scale {
            return None;
        }
        let m = 0.5 * (x0 + x1);
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in sph.iter().enumerate() {
            let h = s.height_at(m);
            if h > 0.0 && best.is_none_or(|(_, bh)| h > bh) {
                best = Some((i, h));
            }
        }
        best.map(|(i, _)| i)
    });

    // runs of a single owner, skipping sub-tolerance pieces
    let mut runs: Vec<(usize, f64, f64)> = Vec::new();
    let mut gaps: Vec<(f64, f64)> = Vec::new();
    for (&(x0, x1), owner) in pieces.iter().zip(&owners) {
        let scale = 1.0 + x0.abs().max(x1.abs());
        if x1 - x0 <= ARC_TOL * scale {
            continue;
        }
        match owner {
            Some(i) => match runs.last_mut() {
                Some(last) if last.0 == *i => last.2 = x1,
                _ => runs.push((*i, x0, x1)),
            },
            None => {
                if !runs.is_empty() {
                    gaps.push((x0, x1));
                }
            }
        }
    }
    let beta = runs.last().map(|r| r.2).unwrap_or(0.0);
    // gaps after the last side are outside [α, β]
    gaps.retain(|g| g.1 <= beta);
    let alpha = runs.first().map(|r| r.1).unwrap_or(0.0);

    let mut sides: Vec<EnvelopeSide> = runs
        .iter()
        .map(|&(i, x0, x1)| {
            let s = sph[i];
            EnvelopeSide {
                sphere: s,
                word: words.get(keep[i]).cloned().flatten(),
                start: ArcEnd {
                    x: x0,
                    y: s.height_at(x0),
                },
                end: ArcEnd {
                    x: x1,
                    y: s.height_at(x1),
                },
                partner: None,
            }
        })
        .collect();

    let mut vertices = Vec::new();
    for i in 0..sides.len().saturating_sub(1) {
        let (a, b) = (sides[i].sphere, sides[i + 1].sphere);
        let touching = (sides[i + 1].start.x - sides[i].end.x).abs()
            <= ARC_TOL * (1.0 + sides[i].end.x.abs()) * 10.0;
        if !touching {
            continue;
        }
        let dc = b.center - a.center;
        let x = (a.radius * a.radius - b.radius * b.radius + b.center * b.center
            - a.center * a.center)
            / (2.0 * dc);
        let y = a.height_at(x).max(b.height_at(x));
        if y <= eps {
            continue;
        }
        let point = HPoint { x, y };
        sides[i].end = ArcEnd { x, y };
        sides[i + 1].start = ArcEnd { x, y };
        vertices.push(Vertex {
            point,
            left: i,
            right: i + 1,
            angle: vertex_angle(point, a.center, b.center),
        });
    }
    for i in 0..sides.len() {
        let g = sides[i].sphere.generator;
        if let Ok(target) = sphere_of(&g.inverse(), eps) {
            sides[i].partner = sides
                .iter()
                .position(|s| s.sphere.same_circle(&target, eps * 100.0));
        }
    }
    Ok(FordDomain {
        sides,
        alpha,
        beta,
        gaps,
        vertices,
    })
}

/// Angle of the region above both circles at their intersection `v`.
fn vertex_angle(v: HPoint, left_center: f64, right_center: f64) -> f64 {
    // tangent along the left circle heading left, and along the right
    // circle heading right
    let t1 = (-v.y, v.x - left_center);
    let t2 = (v.y, -(v.x - right_center));
    let cross = t2.0 * t1.1 - t2.1 * t1.0;
    let dot = t1.0 * t2.0 + t1.1 * t2.1;
    let a = cross.atan2(dot);
    if a < 0.0 {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

fn ball_spheres(elems: &[BallElement], eps: f64) -> (Vec<IsometricSphere>, Vec<Option<Word>>) {
    let mut spheres = Vec::new();
    let mut words = Vec::new();
    for e in elems {
        if let Ok(s) = sphere_of(&e.element, eps) {
            spheres.push(s);
            words.push(Some(e.word.clone()));
        }
    }
    (spheres, words)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelevantSet {
    pub domain: FordDomain,
    pub cutoff: usize,
    /// The relevant spheres agree with those found at cutoff − 1.
    pub stable: bool,
}

impl RelevantSet {
    pub fn spheres(&self) -> Vec<IsometricSphere> {
        self.domain.spheres()
    }
}

fn same_sphere_sets(a: &[IsometricSphere], b: &[IsometricSphere], eps: f64) -> bool {
    a.len() == b.len() && a.iter().all(|s| b.iter().any(|t| t.same_circle(s, eps)))
}

/// Relevant spheres of the ball, with the cutoff stability flag.
pub fn relevant_set(ball: &WordBall) -> Result<RelevantSet, FordError> {
    let eps = ball.eps;
    let (spheres, words) = ball_spheres(ball.elements(), eps);
    if spheres.is_empty() {
        return Err(FordError::NoSpheres);
    }
    let domain = upper_envelope_with_words(&spheres, &words, eps)?;
    let stable = if ball.radius == 0 {
        false
    } else {
        let (smaller, w) = ball_spheres(ball.up_to(ball.radius - 1), eps);
        if smaller.is_empty() {
            false
        } else {
            let d = upper_envelope_with_words(&smaller, &w, eps)?;
            same_sphere_sets(&domain.spheres(), &d.spheres(), eps * 100.0)
        }
    };
    Ok(RelevantSet {
        domain,
        cutoff: ball.radius,
        stable,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexCycle {
    pub vertices: Vec<HPoint>,
    pub angles: Vec<f64>,
    pub angle_sum: f64,
    pub omega: Option<u32>,
    pub height_discrepancy: f64,
}

/// Cycles of finite vertices under the side pairings.
pub fn vertex_cycles(domain: &FordDomain) -> Result<Vec<VertexCycle>, FordError> {
    let n = domain.vertices.len();
    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    let find = |w: HPoint, side: usize| -> Option<usize> {
        domain
            .vertices
            .iter()
            .position(|v| (v.left == side || v.right == side) && v.point.approx_eq(w, 1e-7))
    };
    for v0 in 0..n {
        if visited[v0] {
            continue;
        }
        let start_side = domain.vertices[v0].right;
        let mut members = vec![v0];
        visited[v0] = true;
        let mut current = v0;
        let mut out_side = start_side;
        for _ in 0..=2 * n + 2 {
            let side = &domain.sides[out_side];
            let partner = side
                .partner
                .ok_or(FordError::PairingIncomplete { side: out_side })?;
            let w = side
                .sphere
                .generator
                .apply_interior(domain.vertices[current].point);
            let u = find(w, partner).ok_or(FordError::PairingIncomplete { side: out_side })?;
            let vu = &domain.vertices[u];
            let next_side = if vu.left == partner {
                vu.right
            } else {
                vu.left
            };
            if u == v0 && next_side == start_side {
                break;
            }
            if !visited[u] {
                visited[u] = true;
                members.push(u);
            }
            current = u;
            out_side = next_side;
        }
        let angles: Vec<f64> = members.iter().map(|&i| domain.vertices[i].angle).collect();
        let heights: Vec<f64> = members
            .iter()
            .map(|&i| domain.vertices[i].point.y)
            .collect();
        let angle_sum: f64 = angles.iter().sum();
        let ratio = 2.0 * std::f64::consts::PI / angle_sum;
        let omega = ratio.round();
        let omega =
            (omega >= 1.0 && ((ratio - omega) / omega).abs() <= 1e-6).then_some(omega as u32);
        let hmax = heights.iter().copied().fold(f64::MIN, f64::max);
        let hmin = heights.iter().copied().fold(f64::MAX, f64::min);
        cycles.push(VertexCycle {
            vertices: members.iter().map(|&i| domain.vertices[i].point).collect(),
            angles,
            angle_sum,
            omega,
            height_discrepancy: hmax - hmin,
        });
    }
    Ok(cycles)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummitCheck {
    pub center: f64,
    pub radius: f64,
    pub summit_inside: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionAReport {
    pub sides: Vec<SummitCheck>,
    pub pass: bool,
}

/// Every relevant summit lies in the relative interior of its side.
pub fn check_condition_a(domain: &FordDomain) -> ConditionAReport {
    let sides: Vec<SummitCheck> = domain
        .sides
        .iter()
        .map(|s| SummitCheck {
            center: s.sphere.center,
            radius: s.sphere.radius,
            summit_inside: s.summit_inside(1e-9),
        })
        .collect();
    let pass = sides.iter().all(|s| s.summit_inside);
    ConditionAReport { sides, pass }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FundamentalReport {
    pub samples: usize,
    /// Interior samples p with g.p also interior for some g ≠ id.
    pub equivalent_interior: usize,
    pub coverage_samples: usize,
    pub covered: usize,
    pub cutoff: usize,
}

impl FundamentalReport {
    pub fn coverage_fraction(&self) -> f64 {
        if self.coverage_samples == 0 {
            1.0
        } else {
            self.covered as f64 / self.coverage_samples as f64
        }
    }
}

/// Optional vertical strip (α′, β′) restricting the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub left: f64,
    pub right: f64,
}

impl Strip {
    pub fn contains_strictly(&self, x: f64, tol: f64) -> bool {
        self.left + tol < x && x < self.right - tol
    }
}

fn in_region(domain: &FordDomain, strip: Option<Strip>, z: HPoint, tol: f64, closed: bool) -> bool {
    let in_strip = match strip {
        None => true,
        Some(s) if closed => s.left - tol <= z.x && z.x <= s.right + tol,
        Some(s) => s.contains_strictly(z.x, tol),
    };
    in_strip
        && if closed {
            domain.in_closure(z, tol)
        } else {
            domain.in_interior(z, tol)
        }
}

/// Ball element g with g.z in the closed domain, if any.
pub fn covering_element<'a>(
    domain: &FordDomain,
    strip: Option<Strip>,
    ball: &'a WordBall,
    z: HPoint,
) -> Option<&'a BallElement> {
    ball.iter()
        .find(|g| in_region(domain, strip, g.element.apply_interior(z), 1e-9, true))
}

/// Sampled exactness and coverage checks for K (or K ∩ strip).
pub fn spotcheck_fundamental(
    domain: &FordDomain,
    ball: &WordBall,
    samples: usize,
    seed: u64,
    strip: Option<Strip>,
) -> FundamentalReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = domain.max_radius().max(1.0);
    let (xl, xr) = match strip {
        Some(s) => (s.left, s.right),
        None => {
            let w = 0.5 * (domain.beta - domain.alpha).max(1.0);
            (domain.alpha - w, domain.beta + w)
        }
    };
    let tol = 1e-7;
    let mut interior = Vec::with_capacity(samples);
    while interior.len() < samples {
        let x = rng.gen_range(xl..xr);
        let base = domain.height_at(x);
        let y = base + r * (0.02 + 2.0 * rng.gen::<f64>());
        let z = HPoint { x, y };
        if in_region(domain, strip, z, tol, false) {
            interior.push(z);
        }
    }
    let eq = exec::map(&interior, |&p| {
        ball.iter().any(|g| {
            !g.word.is_empty()
                && !g.element.is_identity(ball.eps)
                && in_region(domain, strip, g.element.apply_interior(p), tol, false)
        })
    });
    let coverage: Vec<HPoint> = (0..samples)
        .map(|_| HPoint {
            x: rng.gen_range(xl..xr),
            y: r * (0.05 + 1.5 * rng.gen::<f64>()),
        })
        .collect();
    let cov = exec::map(&coverage, |&z| {
        covering_element(domain, strip, ball, z).is_some()
    });
    FundamentalReport {
        samples,
        equivalent_interior: eq.iter().filter(|b| **b).count(),
        coverage_samples: coverage.len(),
        covered: cov.iter().filter(|b| **b).count(),
        cutoff: ball.radius,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cyclic, h_lambda, hecke_free, s_involution};
    use crate::group::GroupPresentation;
    use crate::moebius::Moebius;
    use approx::assert_relative_eq;

    fn sphere(center: f64, radius: f64) -> IsometricSphere {
        // any generator with this sphere: c = 1/r, d = −c·center
        let c = 1.0 / radius;
        let d = -c * center;
        IsometricSphere {
            center,
            radius,
            generator: Moebius::new(0.0, -1.0 / c, c, d).unwrap(),
        }
    }

    #[test]
    fn single_sphere() {
        let d = upper_envelope(&[sphere(0.0, 1.0)], 1e-9).unwrap();
        assert_eq!(d.sides.len(), 1);
        assert_relative_eq!(d.alpha, -1.0);
        assert_relative_eq!(d.beta, 1.0);
        assert!(d.vertices.is_empty());
        assert!(check_condition_a(&d).pass);
        assert!(vertex_cycles(&d).unwrap().is_empty());
    }

    #[test]
    fn disjoint_spheres_leave_gaps() {
        let d = upper_envelope(&[sphere(-3.0, 1.0), sphere(3.0, 1.0)], 1e-9).unwrap();
        assert_eq!(d.sides.len(), 2);
        assert_eq!(d.gaps.len(), 1);
        assert_relative_eq!(d.gaps[0].0, -2.0);
        assert_relative_eq!(d.gaps[0].1, 2.0);
        assert_eq!(d.real_endpoints(), vec![-4.0, -2.0, 2.0, 4.0]);
    }

    #[test]
    fn empty_input() {
        assert_eq!(
            upper_envelope(&[], 1e-9).unwrap_err(),
            FordError::EmptyInput
        );
    }

    #[test]
    fn hecke_domain() {
        let g = hecke_free(2.0, 4);
        let ball = g.enumerate_ball(4).unwrap();
        let rel = relevant_set(&ball).unwrap();
        let d = &rel.domain;
        assert!(rel.stable);
        assert_eq!(d.sides.len(), 3);
        let r2 = 2.0 * 2f64.sqrt();
        assert_relative_eq!(d.alpha, -3.0 - r2, epsilon = 1e-12);
        assert_relative_eq!(d.beta, 3.0 + r2, epsilon = 1e-12);
        let centers: Vec<f64> = d.sides.iter().map(|s| s.sphere.center).collect();
        assert_relative_eq!(centers[0], -3.0, epsilon = 1e-12);
        assert_relative_eq!(centers[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(centers[2], 3.0, epsilon = 1e-12);
        assert_eq!(d.vertices.len(), 2);
        for v in &d.vertices {
            assert_relative_eq!(v.angle, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
            assert_relative_eq!(v.point.y, (8.0f64 / 9.0).sqrt(), epsilon = 1e-12);
        }
        let cycles = vertex_cycles(d).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].omega, Some(2));
        assert!(cycles[0].height_discrepancy < 1e-12);
        assert!(check_condition_a(d).pass);
        assert!(d.side_pairing_defect().unwrap() < 1e-8);
    }

    #[test]
    fn cyclic_relevant_set() {
        let g = cyclic(2.0, 6);
        let ball = g.enumerate_ball(6).unwrap();
        let rel = relevant_set(&ball).unwrap();
        assert_eq!(rel.domain.sides.len(), 2);
        assert_eq!(rel.domain.gaps.len(), 1);
        assert!(check_condition_a(&rel.domain).pass);
        let single = GroupPresentation::with_default_eps(vec![("s", s_involution())], 3).unwrap();
        let rel = relevant_set(&single.enumerate_ball(3).unwrap()).unwrap();
        assert_eq!(rel.domain.sides.len(), 1);
    }

    #[test]
    fn no_spheres_for_translation_group() {
        let g = GroupPresentation::with_default_eps(vec![("t", crate::fixtures::t_lambda(1.0))], 3)
            .unwrap();
        let ball = g.enumerate_ball(3).unwrap();
        assert_eq!(relevant_set(&ball).unwrap_err(), FordError::NoSpheres);
    }

    #[test]
    fn condition_a_fails_at_arc_end() {
        // the second sphere passes through the apex of the first and hides
        // its right half
        let a = sphere(0.0, 1.0);
        let b = sphere(2.0, 5f64.sqrt());
        let d = upper_envelope(&[a, b], 1e-9).unwrap();
        assert!(!check_condition_a(&d).pass);
    }

    #[test]
    fn cyclic_fundamental_spotcheck() {
        let g = cyclic(2.0, 6);
        let ball = g.enumerate_ball(6).unwrap();
        let rel = relevant_set(&ball).unwrap();
        let rep = spotcheck_fundamental(&rel.domain, &ball, 200, 7, None);
        assert_eq!(rep.equivalent_interior, 0);
        assert!(rep.coverage_fraction() > 0.9, "{rep:?}");
        // a point deep inside iso(h) is brought into K by h
        let z = HPoint { x: -3.0, y: 1.0 };
        let cover = covering_element(&rel.domain, None, &ball, z).unwrap();
        assert!(cover.element.approx_eq(&h_lambda(2.0), 1e-9));
    }
}
