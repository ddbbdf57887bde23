//! Auxiliary groups: a funnel group Γ extended by a translation t_λ whose
//! strip (α′, β′) contains every relevant isometric sphere of Γ.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::Check;
use crate::exec;
use crate::ford::{self, check_condition_a, relevant_set, FordDomain, FordError, Strip};
use crate::group::{contains_up_to, GroupError, GroupPresentation, Word, WordBall};
use crate::iso::sphere_of;
use crate::moebius::{BoundaryPoint, Classification, FixedPoints, HPoint, Moebius, MoebiusError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuxError {
    #[error("parabolic or near-parabolic element `{word}` in the ball")]
    ParabolicDetected { word: String },
    #[error("condition (⋆) fails: {reason}")]
    ConditionStarFails { reason: String },
    #[error("strip walls ({alpha_prime}, {beta_prime}) must satisfy α′ < {alpha} and β′ > {beta}")]
    InvalidWalls {
        alpha_prime: f64,
        beta_prime: f64,
        alpha: f64,
        beta: f64,
    },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Ford(#[from] FordError),
}

/// How to place the strip walls around [α, β].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Walls {
    /// α′ = α − m, β′ = β + m with m half the largest relevant radius.
    Default,
    Explicit {
        alpha_prime: f64,
        beta_prime: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuxiliaryGroup {
    pub base: GroupPresentation,
    pub base_cutoff: usize,
    /// Ford domain of Γ; its sides are REL(Γ).
    pub domain: FordDomain,
    pub relevant_stable: bool,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_prime: f64,
    pub beta_prime: f64,
    pub lambda: f64,
    pub t_lambda: Moebius,
    /// Generators of REL(Γ), one per inverse pair, followed by t_λ.
    pub presentation_w: GroupPresentation,
    /// Γ-word of each REL generator, in presentation order.
    pub rel_words: Vec<String>,
    pub t_label: String,
}

impl AuxiliaryGroup {
    pub fn strip(&self) -> Strip {
        Strip {
            left: self.alpha_prime,
            right: self.beta_prime,
        }
    }

    /// W = K ∩ strip, membership of an interior point.
    pub fn in_w(&self, z: HPoint, tol: f64) -> bool {
        self.strip().contains_strictly(z.x, tol) && self.domain.in_interior(z, tol)
    }
}

/// Tight horizontal extent of the relevant spheres.
pub fn bounds_alpha_beta(domain: &FordDomain) -> (f64, f64) {
    let alpha = domain
        .sides
        .iter()
        .map(|s| s.sphere.center - s.sphere.radius)
        .fold(f64::INFINITY, f64::min);
    let beta = domain
        .sides
        .iter()
        .map(|s| s.sphere.center + s.sphere.radius)
        .fold(f64::NEG_INFINITY, f64::max);
    (alpha, beta)
}

fn ensure_no_parabolics(group: &GroupPresentation, ball: &WordBall) -> Result<(), AuxError> {
    for e in ball.iter().skip(1) {
        match e.element.classify(2, group.eps) {
            Ok(Classification::Parabolic) | Err(MoebiusError::AmbiguousClassification { .. }) => {
                return Err(AuxError::ParabolicDetected {
                    word: group.format_word(&e.word),
                })
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn build_auxiliary(base: &GroupPresentation, walls: Walls) -> Result<AuxiliaryGroup, AuxError> {
    let n = base.word_cutoff;
    let ball = base.enumerate_ball(n)?;
    ensure_no_parabolics(base, &ball)?;
    let rel = relevant_set(&ball)?;
    let domain = rel.domain;
    let (alpha, beta) = bounds_alpha_beta(&domain);
    if !alpha.is_finite() || !beta.is_finite() || alpha >= beta {
        return Err(AuxError::ConditionStarFails {
            reason: "the relevant spheres do not leave a neighbourhood of ∞ uncovered".into(),
        });
    }
    let tol = 1e-9 * (1.0 + alpha.abs().max(beta.abs()));
    for e in ball.iter() {
        if let Ok(FixedPoints::Hyperbolic {
            attracting,
            repelling,
        }) = e.element.fixed_points(base.eps)
        {
            for p in [attracting, repelling] {
                let inside =
                    matches!(p, BoundaryPoint::Finite(x) if x >= alpha - tol && x <= beta + tol);
                if !inside {
                    return Err(AuxError::ConditionStarFails {
                        reason: format!(
                            "fixed point {p} of `{}` lies outside [α, β]",
                            base.format_word(&e.word)
                        ),
                    });
                }
            }
        }
    }
    let (alpha_prime, beta_prime) = match walls {
        Walls::Default => {
            let m = 0.5 * domain.max_radius();
            (alpha - m, beta + m)
        }
        Walls::Explicit {
            alpha_prime,
            beta_prime,
        } => {
            if !(alpha_prime < alpha && beta_prime > beta) {
                return Err(AuxError::InvalidWalls {
                    alpha_prime,
                    beta_prime,
                    alpha,
                    beta,
                });
            }
            (alpha_prime, beta_prime)
        }
    };
    let lambda = beta_prime - alpha_prime;
    let t_lambda = Moebius::parabolic(lambda);

    // one generator per pair {iso(g), iso(g⁻¹)}
    let mut gens: Vec<(String, Moebius)> = Vec::new();
    let mut rel_words = Vec::new();
    let mut used = vec![false; domain.sides.len()];
    for (i, side) in domain.sides.iter().enumerate() {
        if used[i] {
            continue;
        }
        used[i] = true;
        if let Some(p) = side.partner {
            used[p] = true;
        }
        let word = side.word.clone().unwrap_or_default();
        let (label, element) = rel_generator(base, &word, side.sphere.generator, gens.len());
        rel_words.push(base.format_word(&word));
        gens.push((label, element));
    }
    let mut t_label = "t".to_string();
    while gens.iter().any(|(l, _)| *l == t_label) {
        t_label.push('\'');
    }
    gens.push((t_label.clone(), t_lambda));
    let presentation_w = GroupPresentation::new(gens, base.eps, n)?;
    Ok(AuxiliaryGroup {
        base: base.clone(),
        base_cutoff: n,
        domain,
        relevant_stable: rel.stable,
        alpha,
        beta,
        alpha_prime,
        beta_prime,
        lambda,
        t_lambda,
        presentation_w,
        rel_words,
        t_label,
    })
}

/// Label a REL generator by its base generator when it is one letter.
fn rel_generator(
    base: &GroupPresentation,
    word: &Word,
    element: Moebius,
    index: usize,
) -> (String, Moebius) {
    if let [letter] = word.letters() {
        let g = base.generators()[letter.gen].element;
        return (base.label(letter.gen).to_string(), g);
    }
    (format!("r{}", index + 1), element)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuxReport {
    pub cutoff: usize,
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl AuxReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const CHECK_STABILIZER: &str = "stabilizer";
pub const CHECK_REL: &str = "rel_preservation";
pub const CHECK_FORD_TYPE: &str = "ford_type";
pub const CHECK_CONDITION_A: &str = "condition_a";
pub const CHECK_CONTAINMENT: &str = "generators_contained";
pub const CHECK_CUSP_CYCLE: &str = "cusp_cycle_parabolic";
pub const CHECK_TILING: &str = "strip_tiling";

fn is_t_power(g: &Moebius, lambda: f64, eps: f64) -> bool {
    if g.c().abs() > eps {
        return false;
    }
    let (a, d) = (g.a(), g.d());
    if (a.abs() - 1.0).abs() > 1e-8 || (d.abs() - 1.0).abs() > 1e-8 || a * d < 0.0 {
        return false;
    }
    let shift = g.b() / a / lambda;
    (shift - shift.round()).abs() < 1e-8
}

/// Spheres of the Γ_W ball whose sides fall inside the strip.
fn strip_domain(ball: &WordBall, strip: Strip) -> Result<(FordDomain, bool), FordError> {
    let rel = relevant_set(ball)?;
    let mut d = rel.domain;
    let tol = 1e-9 * (1.0 + strip.left.abs().max(strip.right.abs()));
    d.sides.retain(|s| {
        s.sphere.center - s.sphere.radius > strip.left - tol
            && s.sphere.center + s.sphere.radius < strip.right + tol
    });
    Ok((d, rel.stable))
}

fn same_spheres(a: &FordDomain, b: &FordDomain, eps: f64) -> bool {
    a.sides.len() == b.sides.len()
        && a.sides
            .iter()
            .all(|s| b.sides.iter().any(|t| t.sphere.same_circle(&s.sphere, eps)))
}

/// The auxiliary-group conclusions, checked on the Γ_W ball of radius `n`.
pub fn verify_auxiliary(aux: &AuxiliaryGroup, n: usize, samples: usize, seed: u64) -> AuxReport {
    let eps = aux.base.eps;
    let strip = aux.strip();
    let mut checks = Vec::new();
    let ball = match aux.presentation_w.enumerate_ball(n) {
        Ok(b) => b,
        Err(e) => {
            checks.push(Check::new(CHECK_STABILIZER, false, e.to_string()));
            return AuxReport {
                cutoff: n,
                samples,
                checks,
            };
        }
    };

    // (i) only powers of t_λ fix ∞
    let bad: Vec<String> = ball
        .iter()
        .filter(|e| e.element.c().abs() < eps && !is_t_power(&e.element, aux.lambda, eps))
        .map(|e| aux.presentation_w.format_word(&e.word))
        .collect();
    let fixing = ball.iter().filter(|e| e.element.c().abs() < eps).count();
    checks.push(
        Check::new(
            CHECK_STABILIZER,
            bad.is_empty(),
            format!(
                "{fixing} ball elements fix ∞; {} are not powers of t",
                bad.len()
            ),
        )
        .with_witnesses(bad),
    );

    // (ii) relevant spheres inside the strip are exactly REL(Γ)
    let strip_result = strip_domain(&ball, strip);
    let (w_domain, rel_ok, rel_detail) = match &strip_result {
        Ok((d, _)) => {
            let same = same_spheres(d, &aux.domain, eps * 100.0);
            let stable_at = if n == 0 {
                false
            } else {
                let smaller = aux
                    .presentation_w
                    .enumerate_ball(n - 1)
                    .ok()
                    .and_then(|b| strip_domain(&b, strip).ok());
                // translates outside the strip keep growing with n, so only
                // the strip part is compared
                smaller.is_some_and(|(s, _)| same_spheres(&s, d, eps * 100.0))
            };
            (
                Some(d.clone()),
                same && stable_at,
                format!(
                    "{} relevant spheres in the strip, {} for Γ; stable at cutoff {n}: {stable_at}",
                    d.sides.len(),
                    aux.domain.sides.len()
                ),
            )
        }
        Err(e) => (None, false, e.to_string()),
    };
    checks.push(Check::new(CHECK_REL, rel_ok, rel_detail));

    // (iii) W agrees with the strip part of the Γ_W common exterior
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = aux.domain.max_radius().max(1.0);
    let pts: Vec<HPoint> = (0..samples)
        .map(|_| HPoint {
            x: rng.gen_range(strip.left..strip.right),
            y: r * (0.02 + 1.5 * rng.gen::<f64>()),
        })
        .collect();
    let all_spheres: Vec<_> = ball
        .iter()
        .filter_map(|e| sphere_of(&e.element, eps).ok())
        .collect();
    let tol = 1e-7;
    let mismatches: Vec<String> = exec::map(&pts, |&z| {
        let near_boundary = all_spheres
            .iter()
            .any(|s| s.offset(z).abs() < tol * (1.0 + s.radius))
            || (z.x - strip.left).abs() < tol
            || (z.x - strip.right).abs() < tol;
        if near_boundary {
            return None;
        }
        let in_w = aux.in_w(z, 0.0);
        let in_ext =
            strip.contains_strictly(z.x, 0.0) && all_spheres.iter().all(|s| s.offset(z) > 0.0);
        (in_w != in_ext).then(|| format!("({:.6}, {:.6})", z.x, z.y))
    })
    .into_iter()
    .flatten()
    .collect();
    checks.push(
        Check::new(
            CHECK_FORD_TYPE,
            mismatches.is_empty(),
            format!("{} of {samples} sampled points disagree", mismatches.len()),
        )
        .with_witnesses(mismatches),
    );

    // (iv) condition (A) is inherited
    let base_a = check_condition_a(&aux.domain).pass;
    let w_a = w_domain
        .as_ref()
        .map(|d| check_condition_a(d).pass)
        .unwrap_or(false);
    checks.push(Check::new(
        CHECK_CONDITION_A,
        !base_a || w_a,
        format!("Γ: {base_a}, Γ_W: {w_a}"),
    ));

    // Γ ⊆ Γ_W at generator level
    let missing: Vec<String> = aux
        .base
        .generators()
        .iter()
        .filter(|g| !contains_up_to(&ball, &g.element).is_yes())
        .map(|g| g.label.clone())
        .collect();
    checks.push(
        Check::new(
            CHECK_CONTAINMENT,
            missing.is_empty(),
            format!(
                "{} generators of Γ not found in the Γ_W ball",
                missing.len()
            ),
        )
        .with_witnesses(missing),
    );

    // the vertex at ∞: walls paired by t_λ, cycle transformation parabolic
    let wall_image = aux.t_lambda.apply_real(aux.alpha_prime).unwrap_or(f64::NAN);
    let parabolic = matches!(aux.t_lambda.classify(2, eps), Ok(Classification::Parabolic));
    let paired = (wall_image - aux.beta_prime).abs() < 1e-9 * (1.0 + aux.beta_prime.abs());
    checks.push(Check::new(
        CHECK_CUSP_CYCLE,
        parabolic && paired,
        format!("t maps α′ to {wall_image}; parabolic: {parabolic}"),
    ));

    // t^q.W ∩ W has empty interior for q ≠ 0
    let inside: Vec<HPoint> = pts.iter().copied().filter(|z| aux.in_w(*z, tol)).collect();
    let overlaps = inside
        .iter()
        .filter(|z| {
            [-2i64, -1, 1, 2]
                .iter()
                .any(|&q| aux.in_w(aux.t_lambda.pow(q).apply_interior(**z), tol))
        })
        .count();
    checks.push(Check::new(
        CHECK_TILING,
        overlaps == 0,
        format!(
            "{overlaps} of {} interior samples overlap a translate",
            inside.len()
        ),
    ));

    AuxReport {
        cutoff: n,
        samples,
        checks,
    }
}

/// Finite vertices of W keep their cycle angle sums 2π/ω.
pub fn w_vertex_cycles(aux: &AuxiliaryGroup) -> Result<Vec<ford::VertexCycle>, FordError> {
    ford::vertex_cycles(&aux.domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cyclic, example_walls, hecke_free, t_lambda};
    use approx::assert_relative_eq;

    #[test]
    fn bounds_examples() {
        let g = hecke_free(2.0, 4);
        let rel = relevant_set(&g.enumerate_ball(4).unwrap()).unwrap();
        let (a, b) = bounds_alpha_beta(&rel.domain);
        let r = 2.0 * 2f64.sqrt();
        assert_relative_eq!(a, -3.0 - r, epsilon = 1e-12);
        assert_relative_eq!(b, 3.0 + r, epsilon = 1e-12);
    }

    #[test]
    fn example_override() {
        let (ap, bp) = example_walls();
        let aux = build_auxiliary(
            &hecke_free(2.0, 4),
            Walls::Explicit {
                alpha_prime: ap,
                beta_prime: bp,
            },
        )
        .unwrap();
        assert_relative_eq!(aux.lambda, 6.0 + 6.0 * 2f64.sqrt(), epsilon = 1e-12);
        // the walls match the published label at λ = 2
        let l: f64 = 2.0;
        assert_relative_eq!(ap, (l + 1.0 + 3.0 * l.sqrt()) / (1.0 - l), epsilon = 1e-12);
        let labels: Vec<&str> = aux
            .presentation_w
            .generators()
            .iter()
            .map(|g| g.label.as_str())
            .collect();
        assert_eq!(labels.len(), 3);
        let rep = verify_auxiliary(&aux, 4, 200, 11);
        assert!(rep.all_pass(), "{rep:#?}");
    }

    #[test]
    fn cyclic_default() {
        let aux = build_auxiliary(&cyclic(2.0, 6), Walls::Default).unwrap();
        assert_eq!(aux.presentation_w.rank(), 2);
        let rep = verify_auxiliary(&aux, 6, 200, 3);
        assert!(rep.all_pass(), "{rep:#?}");
        let tiny = verify_auxiliary(&aux, 1, 50, 3);
        assert!(!tiny.check(CHECK_REL).unwrap().pass);
    }

    #[test]
    fn rejects_parabolics() {
        let g = GroupPresentation::with_default_eps(
            vec![("h", crate::fixtures::h_lambda(2.0)), ("t", t_lambda(1.0))],
            2,
        )
        .unwrap();
        assert!(matches!(
            build_auxiliary(&g, Walls::Default),
            Err(AuxError::ParabolicDetected { .. })
        ));
    }

    #[test]
    fn rejects_walls_inside_hull() {
        assert!(matches!(
            build_auxiliary(
                &hecke_free(2.0, 4),
                Walls::Explicit {
                    alpha_prime: -1.0,
                    beta_prime: 1.0
                }
            ),
            Err(AuxError::InvalidWalls { .. })
        ));
    }
}
