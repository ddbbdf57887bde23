//! Isometric spheres, summits, shadows and the identity suite relating a
//! sphere to its image under the generating element.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::group::{BallElement, WordBall};
use crate::moebius::{BoundaryInterval, BoundaryPoint, HPoint, Moebius};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IsoError {
    #[error("element stabilizes infinity and has no isometric sphere")]
    StabilizesInfinity,
}

/// The semicircle {z : |g'(z)| = 1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometricSphere {
    pub center: f64,
    pub radius: f64,
    pub generator: Moebius,
}

impl IsometricSphere {
    pub fn of(g: &Moebius, eps: f64) -> Result<Self, IsoError> {
        sphere_of(g, eps)
    }

    /// Highest point, center + i·radius.
    pub fn summit(&self) -> HPoint {
        HPoint {
            x: self.center,
            y: self.radius,
        }
    }

    pub fn shadow(&self) -> BoundaryInterval {
        BoundaryInterval::new(
            BoundaryPoint::Finite(self.center - self.radius),
            BoundaryPoint::Finite(self.center + self.radius),
        )
    }

    /// Height of the sphere above `x`, zero outside the shadow.
    pub fn height_at(&self, x: f64) -> f64 {
        let d = x - self.center;
        let h2 = self.radius * self.radius - d * d;
        if h2 > 0.0 {
            h2.sqrt()
        } else {
            0.0
        }
    }

    /// Point on the sphere at polar angle `theta` ∈ (0, π) from the right.
    pub fn point_at_angle(&self, theta: f64) -> HPoint {
        HPoint {
            x: self.center + self.radius * theta.cos(),
            y: self.radius * theta.sin(),
        }
    }

    /// Signed offset |z − c| − r: negative inside, positive outside.
    pub fn offset(&self, z: HPoint) -> f64 {
        ((z.x - self.center).powi(2) + z.y * z.y).sqrt() - self.radius
    }

    pub fn same_circle(&self, other: &IsometricSphere, eps: f64) -> bool {
        let scale = 1.0 + self.center.abs().max(other.center.abs());
        (self.center - other.center).abs() <= eps * scale
            && (self.radius - other.radius).abs() <= eps * (1.0 + self.radius)
    }
}

pub fn sphere_of(g: &Moebius, eps: f64) -> Result<IsometricSphere, IsoError> {
    if g.c().abs() < eps {
        return Err(IsoError::StabilizesInfinity);
    }
    Ok(IsometricSphere {
        center: -g.d() / g.c(),
        radius: 1.0 / g.c().abs(),
        generator: *g,
    })
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IsoReport {
    pub elements_checked: usize,
    pub samples_per_element: usize,
    /// max distance of g.z from iso(g⁻¹) for z on iso(g)
    pub iso1_max: f64,
    /// max |Im g.z − Im z| for z on iso(g)
    pub iso2_max: f64,
    /// max relative chain-rule defect over paired ball elements
    pub chain_rule_max: f64,
    /// chain-rule samples too close to a pole to resolve the tolerance
    pub chain_rule_skipped: usize,
    /// max | |g'(z)| − 1 | for z on iso(g)
    pub unit_derivative_max: f64,
    /// max center defect of iso(g t^n) against t^{−n}.iso(g)
    pub iso5_max: Option<f64>,
    pub concentric_distinct_pairs: usize,
    /// sampled interior points of iso(g) not mapped outside iso(g⁻¹)
    pub interior_mapping_violations: usize,
}

impl IsoReport {
    pub fn max_violation(&self) -> f64 {
        self.iso1_max
            .max(self.iso2_max)
            .max(self.chain_rule_max)
            .max(self.unit_derivative_max)
            .max(self.iso5_max.unwrap_or(0.0))
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation() < tol
            && self.concentric_distinct_pairs == 0
            && self.interior_mapping_violations == 0
    }
}

#[derive(Default, Clone, Copy)]
struct ElementStats {
    iso1: f64,
    iso2: f64,
    chain: f64,
    skipped: usize,
    unit: f64,
    iso5: f64,
    interior: usize,
}

/// Relative rounding in |cz + d| is about ε times this.
fn denominator_condition(g: &Moebius, z: HPoint) -> f64 {
    let (c, d) = (g.c(), g.d());
    let den = ((c * z.x + d).powi(2) + (c * z.y).powi(2)).sqrt();
    (c.abs() * z.x.hypot(z.y) + d.abs()) / den
}

const CHAIN_RESOLUTION: f64 = 1e-10;

/// Evaluates the isometric-sphere identities on every ball element that
/// does not fix ∞. `parabolic` designates a translation t_λ for the
/// translation-compatibility identity.
pub fn check_iso_identities(
    ball: &WordBall,
    samples: usize,
    parabolic: Option<&Moebius>,
) -> IsoReport {
    let eps = ball.eps;
    let elems: Vec<&BallElement> = ball.iter().filter(|e| e.element.c().abs() >= eps).collect();
    let short = ball.up_to(2);
    let stats = exec::map_range(elems.len(), |idx| {
        let g = elems[idx].element;
        let sph = sphere_of(&g, eps).expect("filtered");
        let inv = sphere_of(&g.inverse(), eps).expect("filtered");
        // short partners keep gh well conditioned at deep cutoffs
        let h = short[(idx * 7 + 1) % short.len()].element;
        let gh = g.compose(&h);
        let mut st = ElementStats::default();
        for k in 0..samples {
            let theta = std::f64::consts::PI * (k as f64 + 0.5) / samples as f64;
            let z = sph.point_at_angle(theta);
            let w = g.apply_interior(z);
            st.iso1 = st.iso1.max(inv.offset(w).abs() / inv.radius.max(1.0));
            st.iso2 = st.iso2.max((w.y - z.y).abs());
            if let Ok(d) = g.deriv_mag(z) {
                st.unit = st.unit.max((d - 1.0).abs());
            }
            // chain rule at z: |(gh)'(z)| = |g'(h z)| |h'(z)|
            let hz = h.apply_interior(z);
            let kappa = denominator_condition(&gh, z)
                .max(denominator_condition(&g, hz))
                .max(denominator_condition(&h, z));
            if kappa * f64::EPSILON > CHAIN_RESOLUTION {
                st.skipped += 1;
            } else if let (Ok(lhs), Ok(a), Ok(b)) =
                (gh.deriv_mag(z), g.deriv_mag(hz), h.deriv_mag(z))
            {
                st.chain = st.chain.max((lhs - a * b).abs() / lhs.max(a * b));
            }
            // interior point below the sample
            let inside = HPoint {
                x: z.x,
                y: 0.5 * z.y,
            };
            let image = g.apply_interior(inside);
            if inv.offset(image) <= 0.0 {
                st.interior += 1;
            }
        }
        if let Some(t) = parabolic {
            for n in [-1i64, 1] {
                let tn = t.pow(n);
                if let Ok(shifted) = sphere_of(&g.compose(&tn), eps) {
                    let expected = tn.inverse().apply_interior(sph.summit());
                    st.iso5 = st.iso5.max(
                        (shifted.center - expected.x)
                            .abs()
                            .max((shifted.radius - sph.radius).abs()),
                    );
                }
            }
        }
        st
    });
    let mut report = IsoReport {
        elements_checked: elems.len(),
        samples_per_element: samples,
        iso5_max: parabolic.map(|_| 0.0),
        ..Default::default()
    };
    for st in stats {
        report.iso1_max = report.iso1_max.max(st.iso1);
        report.iso2_max = report.iso2_max.max(st.iso2);
        report.chain_rule_max = report.chain_rule_max.max(st.chain);
        report.chain_rule_skipped += st.skipped;
        report.unit_derivative_max = report.unit_derivative_max.max(st.unit);
        report.interior_mapping_violations += st.interior;
        if let Some(m) = report.iso5_max.as_mut() {
            *m = m.max(st.iso5);
        }
    }
    let spheres: Vec<IsometricSphere> = elems
        .iter()
        .filter_map(|e| sphere_of(&e.element, eps).ok())
        .collect();
    report.concentric_distinct_pairs = concentric_distinct_pairs(&spheres, eps);
    report
}

/// Pairs of spheres with a common center but different radii.
pub fn concentric_distinct_pairs(spheres: &[IsometricSphere], eps: f64) -> usize {
    let mut sorted: Vec<&IsometricSphere> = spheres.iter().collect();
    sorted.sort_by(|a, b| a.center.total_cmp(&b.center));
    let mut count = 0;
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            let scale = 1.0 + sorted[i].center.abs();
            if sorted[j].center - sorted[i].center > eps * scale {
                break;
            }
            // tiny spheres of long words sit closer together than eps
            let (ri, rj) = (sorted[i].radius, sorted[j].radius);
            let near = (eps * ri.min(rj).min(1.0)).max(16.0 * f64::EPSILON * scale);
            if sorted[j].center - sorted[i].center <= near && (rj - ri).abs() > eps * (1.0 + ri) {
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ShadowReport {
    pub spheres_checked: usize,
    pub without_limit_point: usize,
    pub cutoff: usize,
}

/// For each sphere, whether some known limit point lies in its shadow.
pub fn shadows_meet_limit_set(
    spheres: &[IsometricSphere],
    limit_points: &[f64],
    cutoff: usize,
) -> ShadowReport {
    let without = spheres
        .iter()
        .filter(|s| {
            !limit_points
                .iter()
                .any(|&x| s.shadow().contains(BoundaryPoint::Finite(x)))
        })
        .count();
    ShadowReport {
        spheres_checked: spheres.len(),
        without_limit_point: without,
        cutoff,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{h_lambda, hecke_free, s_involution, t_lambda};
    use approx::assert_relative_eq;

    #[test]
    fn sphere_examples() {
        let s = sphere_of(&s_involution(), 1e-9).unwrap();
        assert_relative_eq!(s.center, 0.0);
        assert_relative_eq!(s.radius, 1.0);
        for lambda in [2.0, 5.0] {
            let h = sphere_of(&h_lambda(lambda), 1e-9).unwrap();
            assert_relative_eq!(h.center, (lambda + 1.0) / (1.0 - lambda), epsilon = 1e-12);
            assert_relative_eq!(
                h.radius,
                2.0 * lambda.sqrt() / (lambda - 1.0),
                epsilon = 1e-12
            );
            // left shadow endpoint from the published axis label
            assert_relative_eq!(
                h.center - h.radius,
                (lambda + 1.0 + 2.0 * lambda.sqrt()) / (1.0 - lambda),
                epsilon = 1e-12
            );
        }
        assert_eq!(
            sphere_of(&t_lambda(2.0), 1e-9),
            Err(IsoError::StabilizesInfinity)
        );
    }

    #[test]
    fn summits_and_shadows() {
        let s = sphere_of(&s_involution(), 1e-9).unwrap();
        assert!(s.summit().approx_eq(HPoint { x: 0.0, y: 1.0 }, 1e-12));
        let h = sphere_of(&h_lambda(2.0), 1e-9).unwrap();
        let top = h.summit();
        assert_relative_eq!(top.x, -3.0, epsilon = 1e-12);
        assert_relative_eq!(top.y, 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        for k in 1..100 {
            let z = h.point_at_angle(std::f64::consts::PI * k as f64 / 100.0);
            assert!(z.y <= top.y + 1e-15);
            assert!(h.offset(z).abs() < 1e-12);
        }
        let sh = h.shadow();
        assert_relative_eq!(
            sh.left.finite().unwrap(),
            -3.0 - 2.0 * 2f64.sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            sh.right.finite().unwrap(),
            -3.0 + 2.0 * 2f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(!sh.contains(BoundaryPoint::Infinity));
    }

    #[test]
    fn identity_suite_on_hecke_ball() {
        let g = hecke_free(2.0, 4);
        let ball = g.enumerate_ball(4).unwrap();
        let rep = check_iso_identities(&ball, 50, None);
        assert!(rep.iso1_max < 1e-9, "{rep:?}");
        assert!(rep.iso2_max < 1e-9, "{rep:?}");
        assert!(rep.passes(1e-8), "{rep:?}");
    }

    #[test]
    fn involution_sphere_is_self_paired() {
        let s = s_involution();
        let a = sphere_of(&s, 1e-9).unwrap();
        let b = sphere_of(&s.inverse(), 1e-9).unwrap();
        assert_eq!(a.center, b.center);
        assert_eq!(a.radius, b.radius);
    }

    #[test]
    fn concentric_detection() {
        let a = IsometricSphere {
            center: 1.0,
            radius: 1.0,
            generator: s_involution(),
        };
        let b = IsometricSphere { radius: 2.0, ..a };
        assert_eq!(concentric_distinct_pairs(&[a, a], 1e-9), 0);
        assert_eq!(concentric_distinct_pairs(&[a, b], 1e-9), 1);
    }
}
