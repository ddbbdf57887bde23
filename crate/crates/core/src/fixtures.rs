//! Standard matrices and presentations used throughout the examples and
//! tests.

use crate::group::GroupPresentation;
use crate::moebius::{Moebius, DEFAULT_EPS};

/// The hyperbolic element with fixed points ±1 and multiplier λ.
pub fn h_lambda(lambda: f64) -> Moebius {
    let k = 1.0 / (2.0 * lambda.sqrt());
    Moebius::new(
        k * (lambda + 1.0),
        k * (lambda - 1.0),
        k * (lambda - 1.0),
        k * (lambda + 1.0),
    )
    .expect("h_lambda needs lambda > 0")
}

/// The quarter turn z ↦ −1/z.
pub fn s_involution() -> Moebius {
    Moebius::new(0.0, -1.0, 1.0, 0.0).expect("unit determinant")
}

/// Translation z ↦ z + λ.
pub fn t_lambda(lambda: f64) -> Moebius {
    Moebius::parabolic(lambda)
}

/// ⟨h_λ, s⟩, an infinite dihedral group with limit set {±1}.
pub fn hecke_free(lambda: f64, word_cutoff: usize) -> GroupPresentation {
    GroupPresentation::new(
        vec![
            ("h".to_string(), h_lambda(lambda)),
            ("s".to_string(), s_involution()),
        ],
        DEFAULT_EPS,
        word_cutoff,
    )
    .expect("valid presentation")
}

/// The cyclic group ⟨h_λ⟩.
pub fn cyclic(lambda: f64, word_cutoff: usize) -> GroupPresentation {
    GroupPresentation::new(
        vec![("h".to_string(), h_lambda(lambda))],
        DEFAULT_EPS,
        word_cutoff,
    )
    .expect("valid presentation")
}

/// Hyperbolic element whose isometric spheres have radius one and centers
/// ∓`center` (so iso(g) sits at −center and iso(g⁻¹) at +center).
pub fn schottky_generator(center: f64) -> Moebius {
    // c = 1, −d/c = −center, a/c = center, ad − bc = 1
    Moebius::new(center, center * center - 1.0, 1.0, center).expect("unit determinant")
}

/// Two-generator Schottky group: spheres at ∓3 paired by `a`, spheres at
/// ∓6 paired by `b`, all of radius one.
pub fn schottky(word_cutoff: usize) -> GroupPresentation {
    GroupPresentation::new(
        vec![
            ("a".to_string(), schottky_generator(3.0)),
            ("b".to_string(), schottky_generator(6.0)),
        ],
        DEFAULT_EPS,
        word_cutoff,
    )
    .expect("valid presentation")
}

/// Strip walls used by the worked example at λ = 2.
pub fn example_walls() -> (f64, f64) {
    let w = 3.0 + 3.0 * 2f64.sqrt();
    (-w, w)
}
