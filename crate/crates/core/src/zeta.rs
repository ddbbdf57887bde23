//! Truncated Euler products over enumerated primitive classes and the
//! comparison harness against Fredholm determinants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exec;
use crate::group::{
    conjugate_in_ball, primitive_hyperbolic_classes, ClassOptions, ConjClass, GroupPresentation,
    WordBall,
};
use crate::transfer::{TransferError, TransferFamily};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZetaTruncation {
    pub class_count: usize,
    pub k_max: usize,
    pub s: Complex64,
    pub value: Complex64,
    /// Bound on |log| of the omitted factors with k > K over the given
    /// classes.
    pub k_tail: f64,
}

/// Π over `classes` and k ≤ `k_max` of (1 − e^{−(s+k)ℓ}).
pub fn selberg_zeta_truncated(classes: &[ConjClass], s: Complex64, k_max: usize) -> ZetaTruncation {
    let lengths: Vec<f64> = classes.iter().map(|c| c.length).collect();
    zeta_from_lengths(&lengths, s, k_max)
}

pub fn zeta_from_lengths(lengths: &[f64], s: Complex64, k_max: usize) -> ZetaTruncation {
    let factors = exec::map(lengths, |&l| {
        (0..=k_max).fold(Complex64::new(1.0, 0.0), |acc, k| {
            acc * (1.0 - (-(s + k as f64) * l).exp())
        })
    });
    let value = factors
        .into_iter()
        .fold(Complex64::new(1.0, 0.0), |acc, f| acc * f);
    let k_tail = lengths
        .iter()
        .map(|&l| log_factor_bound((-(s.re + (k_max + 1) as f64) * l).exp() / (1.0 - (-l).exp())))
        .sum();
    ZetaTruncation {
        class_count: lengths.len(),
        k_max,
        s,
        value,
        k_tail,
    }
}

/// |log(1 − z)| ≤ x / (1 − x) for |z| ≤ x < 1.
fn log_factor_bound(x: f64) -> f64 {
    if x < 1.0 {
        x / (1.0 - x)
    } else {
        f64::INFINITY
    }
}

/// Σ_k |e^{−(s+k)ℓ}| for one class.
fn class_weight(sigma: f64, l: f64) -> f64 {
    (-sigma * l).exp() / (1.0 - (-l).exp())
}

/// Estimate of Σ over primitive classes with ℓ > `l_max` of Σ_k
/// |e^{−(s+k)ℓ}|: the classes visible in the ball, plus a geometric
/// continuation over word lengths beyond the ball radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassTail {
    pub visible: f64,
    pub extrapolated: f64,
    /// Ratio of successive word-length layers used for the continuation.
    pub ratio: f64,
    pub visible_classes: usize,
}

impl ClassTail {
    pub fn total(&self) -> f64 {
        self.visible + self.extrapolated
    }
}

pub fn class_tail(all_classes: &[ConjClass], l_max: f64, radius: usize, sigma: f64) -> ClassTail {
    let mut layers = vec![0.0; radius + 1];
    let mut visible = 0.0;
    let mut count = 0;
    for c in all_classes {
        let w = class_weight(sigma, c.length);
        if c.word.len() <= radius {
            layers[c.word.len()] += w;
        }
        if c.length > l_max {
            visible += w;
            count += 1;
        }
    }
    let top_empty = radius >= 1 && layers[radius] == 0.0 && layers[radius - 1] == 0.0;
    let ratio = if top_empty {
        0.0
    } else if radius >= 2 && layers[radius - 1] > 0.0 {
        let r1 = layers[radius] / layers[radius - 1];
        let r0 = if layers[radius - 2] > 0.0 {
            layers[radius - 1] / layers[radius - 2]
        } else {
            r1
        };
        r1.max(r0)
    } else {
        f64::INFINITY
    };
    let extrapolated = if ratio < 1.0 {
        layers[radius] * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    ClassTail {
        visible,
        extrapolated,
        ratio,
        visible_classes: count,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// Classes of g and g⁻¹ counted separately.
    Distinct,
    /// One factor per unordered pair {g, g⁻¹}.
    Identified,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConventionNote {
    pub chosen: Convention,
    pub rel_err_distinct: f64,
    pub rel_err_identified: f64,
    /// det matched the square of the identified product.
    pub squaring_detected: bool,
    pub self_inverse_classes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZetaRow {
    pub s: Complex64,
    pub det: Complex64,
    pub zeta: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Relative bound exp(B) − 1 on the truncation error of `zeta`.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZetaComparison {
    pub rows: Vec<ZetaRow>,
    pub convention: ConventionNote,
    pub l_max: f64,
    pub k_max: usize,
    pub order: usize,
    pub cutoff: usize,
    pub classes: Vec<ClassSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassSummary {
    pub word: String,
    pub length: f64,
}

/// Representatives of one class per inverse pair, and the number of
/// classes conjugate to their own inverse.
fn identify_inverses(classes: &[ConjClass], ball: &WordBall) -> (Vec<usize>, usize) {
    let eps = ball.eps;
    let mut partner: Vec<Option<usize>> = vec![None; classes.len()];
    let mut self_inverse = 0;
    for i in 0..classes.len() {
        if partner[i].is_some() {
            continue;
        }
        let inv = classes[i].representative.inverse();
        if conjugate_in_ball(&inv, &classes[i].representative, ball, eps) {
            partner[i] = Some(i);
            self_inverse += 1;
            continue;
        }
        let ti = classes[i].trace;
        for j in i + 1..classes.len() {
            if partner[j].is_none()
                && (classes[j].trace - ti).abs() <= 1e-7 * (1.0 + ti)
                && conjugate_in_ball(&inv, &classes[j].representative, ball, eps)
            {
                partner[i] = Some(j);
                partner[j] = Some(i);
                break;
            }
        }
    }
    let keep = (0..classes.len())
        .filter(|&i| partner[i].is_none_or(|p| p >= i))
        .collect();
    (keep, self_inverse)
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    if b.norm() == 0.0 {
        (a - b).norm()
    } else {
        (a / b - 1.0).norm()
    }
}

/// det(I − M_s) against the truncated Euler product at each `s`. The
/// class enumeration uses `ball`; classes up to `l_max` enter the product
/// and the rest feed the tail bound.
pub fn compare_det_vs_zeta(
    family: &TransferFamily,
    group: &GroupPresentation,
    ball: &WordBall,
    s_list: &[Complex64],
    order: usize,
    l_max: f64,
    k_max: usize,
) -> Result<ZetaComparison, TransferError> {
    let all = primitive_hyperbolic_classes(group, ball, f64::INFINITY, ClassOptions::default());
    let used: Vec<ConjClass> = all.iter().filter(|c| c.length <= l_max).cloned().collect();
    let (identified, self_inverse) = identify_inverses(&used, ball);
    let lengths: Vec<f64> = used.iter().map(|c| c.length).collect();
    let id_lengths: Vec<f64> = identified.iter().map(|&i| used[i].length).collect();

    let dets = exec::map(s_list, |&s| family.det(s, order));
    let mut per_s = Vec::with_capacity(s_list.len());
    for (s, det) in s_list.iter().zip(dets) {
        let det = det?;
        let distinct = zeta_from_lengths(&lengths, *s, k_max);
        let ident = zeta_from_lengths(&id_lengths, *s, k_max);
        per_s.push((*s, det, distinct, ident));
    }

    let worst = |pick: fn(&(Complex64, Complex64, ZetaTruncation, ZetaTruncation)) -> Complex64| {
        per_s
            .iter()
            .map(|row| rel_err(row.1, pick(row)))
            .fold(0.0, f64::max)
    };
    let err_distinct = worst(|r| r.2.value);
    let err_identified = worst(|r| r.3.value);
    let chosen = if err_identified < err_distinct {
        Convention::Identified
    } else {
        Convention::Distinct
    };
    let squaring = per_s.iter().all(|(_, det, _, ident)| {
        rel_err(*det, ident.value * ident.value) < 0.1 * rel_err(*det, ident.value).max(1e-300)
    }) && self_inverse < used.len();

    let rows = per_s
        .iter()
        .map(|(s, det, distinct, ident)| {
            let trunc = match chosen {
                Convention::Distinct => distinct,
                Convention::Identified => ident,
            };
            let tail = class_tail(&all, l_max, ball.radius, s.re);
            let scale = if chosen == Convention::Identified {
                0.5
            } else {
                1.0
            };
            let b = trunc.k_tail + scale * log_factor_bound_sum(tail.total());
            ZetaRow {
                s: *s,
                det: *det,
                zeta: trunc.value,
                abs_err: (det - trunc.value).norm(),
                rel_err: rel_err(*det, trunc.value),
                tail_bound: b.exp() - 1.0,
            }
        })
        .collect();

    Ok(ZetaComparison {
        rows,
        convention: ConventionNote {
            chosen,
            rel_err_distinct: err_distinct,
            rel_err_identified: err_identified,
            squaring_detected: squaring,
            self_inverse_classes: self_inverse,
        },
        l_max,
        k_max,
        order,
        cutoff: ball.radius,
        classes: used
            .iter()
            .map(|c| ClassSummary {
                word: group.format_word(&c.word),
                length: c.length,
            })
            .collect(),
    })
}

/// Upper bound for Σ |log(1 − z_i)| given Σ |z_i| = `total` and each
/// |z_i| ≤ `total`.
fn log_factor_bound_sum(total: f64) -> f64 {
    if total < 1.0 {
        total / (1.0 - total)
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cyclic, schottky};
    use crate::group::Word;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn empty_product_is_one() {
        let z = selberg_zeta_truncated(&[], c(2.0), 10);
        assert_eq!(z.value, c(1.0));
        assert_eq!(z.k_tail, 0.0);
    }

    #[test]
    fn single_class_k0() {
        let s = Complex64::new(1.2, 0.7);
        let z = zeta_from_lengths(&[1.3], s, 0);
        let expected = 1.0 - (-s * 1.3).exp();
        assert_relative_eq!((z.value - expected).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn cyclic_product_oracle() {
        let g = cyclic(2.0, 6);
        let ball = g.enumerate_ball(6).unwrap();
        let classes = primitive_hyperbolic_classes(&g, &ball, 1.0, ClassOptions::default());
        assert_eq!(classes.len(), 2);
        let z = selberg_zeta_truncated(&classes, c(2.0), 40);
        let oracle: f64 = (0..=40)
            .map(|k| (1.0 - 2f64.powi(-(2 + k))).powi(2))
            .product();
        assert_relative_eq!(z.value.re, oracle, max_relative = 1e-13);
        // two classes, each with Σ_{k>40} 2^{−(2+k)} = 2^{−42}
        assert!(z.k_tail < 2f64.powi(-41) * (1.0 + 1e-9));
    }

    #[test]
    fn huge_re_s_tends_to_one() {
        let z = zeta_from_lengths(&[2f64.ln(), 2f64.ln()], c(30.0), 40);
        assert!((z.value - 1.0).norm() < 1e-8);
    }

    #[test]
    fn schottky_class_lengths() {
        let g = schottky(4);
        let ball = g.enumerate_ball(4).unwrap();
        let classes = primitive_hyperbolic_classes(&g, &ball, 6.0, ClassOptions::default());
        assert_eq!(classes.len(), 6);
        let (keep, self_inv) = identify_inverses(&classes, &ball);
        assert_eq!(keep.len(), 3);
        assert_eq!(self_inv, 0);
        // ℓ(a) = 2 arccosh(3)
        assert_relative_eq!(classes[0].length, 2.0 * 3f64.acosh(), epsilon = 1e-12);
    }

    #[test]
    fn cyclic_tail_vanishes() {
        let g = cyclic(2.0, 6);
        let ball = g.enumerate_ball(6).unwrap();
        let all = primitive_hyperbolic_classes(&g, &ball, f64::INFINITY, ClassOptions::default());
        let t = class_tail(&all, 1.0, 6, 2.0);
        assert_eq!(t.total(), 0.0);
    }

    #[test]
    fn tail_extrapolation_is_finite_for_schottky() {
        let g = schottky(5);
        let ball = g.enumerate_ball(5).unwrap();
        let all = primitive_hyperbolic_classes(&g, &ball, f64::INFINITY, ClassOptions::default());
        let t = class_tail(&all, 6.0, 5, 2.0);
        assert!(t.ratio < 1.0);
        assert!(t.total().is_finite() && t.total() > 0.0);
        assert!(!all.iter().any(|c| c.word == Word::empty()));
    }
}
