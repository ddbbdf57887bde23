//! Floating-point model of PSL(2,R) acting on the upper half-plane and on
//! the boundary circle R ∪ {∞}.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Global tolerance for equality of points and matrices.
pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoebiusError {
    #[error("determinant {det} is not positive")]
    BadDeterminant { det: f64 },
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("point is a pole of the transformation")]
    Pole,
    #[error("derivative at infinity is undefined for a transformation moving infinity")]
    DerivativeAtInfinity,
    #[error("trace {trace} is within tolerance of 2; candidates {candidates:?}")]
    AmbiguousClassification { trace: f64, candidates: [Kind; 2] },
    #[error("the identity has no fixed point set")]
    IdentityHasNoFixedPointSet,
    #[error("transformation is not hyperbolic")]
    NotHyperbolic,
    #[error("geodesics coincide")]
    CoincidentGeodesics,
    #[error("point is not in the upper half-plane (y = {y})")]
    NotInUpperHalfPlane { y: f64 },
}

/// A point of the boundary circle R ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPoint {
    Finite(f64),
    Infinity,
}

impl BoundaryPoint {
    pub fn finite(self) -> Option<f64> {
        match self {
            BoundaryPoint::Finite(x) => Some(x),
            BoundaryPoint::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }

    pub fn approx_eq(self, other: BoundaryPoint, eps: f64) -> bool {
        match (self, other) {
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => true,
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
                (a - b).abs() <= eps * (1.0 + a.abs().max(b.abs()))
            }
            // very large finite values are close to infinity on the circle
            (BoundaryPoint::Finite(a), BoundaryPoint::Infinity)
            | (BoundaryPoint::Infinity, BoundaryPoint::Finite(a)) => a.abs() * eps > 1.0,
        }
    }

    /// Angle of the point on the circle under x ↦ 2·atan(x); ∞ sits at π.
    pub fn angle(self) -> f64 {
        match self {
            BoundaryPoint::Finite(x) => 2.0 * x.atan(),
            BoundaryPoint::Infinity => std::f64::consts::PI,
        }
    }
}

impl From<f64> for BoundaryPoint {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            BoundaryPoint::Finite(x)
        } else {
            BoundaryPoint::Infinity
        }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Finite(x) => write!(f, "{x}"),
            BoundaryPoint::Infinity => write!(f, "∞"),
        }
    }
}

/// A point x + iy of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, MoebiusError> {
        if y.is_nan() || y <= 0.0 || !x.is_finite() || !y.is_finite() {
            return Err(MoebiusError::NotInUpperHalfPlane { y });
        }
        Ok(HPoint { x, y })
    }

    pub fn approx_eq(self, other: HPoint, eps: f64) -> bool {
        let scale = 1.0 + self.x.abs().max(other.x.abs()).max(self.y.max(other.y));
        (self.x - other.x).abs() <= eps * scale && (self.y - other.y).abs() <= eps * scale
    }

    /// Hyperbolic distance.
    pub fn distance(self, other: HPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let arg = 1.0 + (dx * dx + dy * dy) / (2.0 * self.y * other.y);
        arg.max(1.0).acosh()
    }
}

/// Either kind of point on which a transformation can be differentiated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Boundary(BoundaryPoint),
    Interior(HPoint),
}

impl From<BoundaryPoint> for Point {
    fn from(p: BoundaryPoint) -> Self {
        Point::Boundary(p)
    }
}

impl From<HPoint> for Point {
    fn from(p: HPoint) -> Self {
        Point::Interior(p)
    }
}

/// Oriented complete geodesic from `minus_end` to `plus_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub minus_end: BoundaryPoint,
    pub plus_end: BoundaryPoint,
}

impl Geodesic {
    pub fn new(minus_end: BoundaryPoint, plus_end: BoundaryPoint) -> Self {
        Geodesic {
            minus_end,
            plus_end,
        }
    }

    pub fn vertical(x: f64) -> Self {
        Geodesic::new(BoundaryPoint::Finite(x), BoundaryPoint::Infinity)
    }

    /// Same point set, ignoring orientation.
    pub fn same_set(&self, other: &Geodesic, eps: f64) -> bool {
        (self.minus_end.approx_eq(other.minus_end, eps)
            && self.plus_end.approx_eq(other.plus_end, eps))
            || (self.minus_end.approx_eq(other.plus_end, eps)
                && self.plus_end.approx_eq(other.minus_end, eps))
    }

    pub fn reversed(&self) -> Geodesic {
        Geodesic::new(self.plus_end, self.minus_end)
    }

    /// Point of the geodesic above the real coordinate `x`, if any.
    pub fn point_at(&self, x: f64) -> Option<HPoint> {
        match (self.minus_end, self.plus_end) {
            (BoundaryPoint::Finite(p), BoundaryPoint::Finite(q)) => {
                let c = 0.5 * (p + q);
                let r = 0.5 * (p - q).abs();
                let h2 = r * r - (x - c) * (x - c);
                (h2 > 0.0).then(|| HPoint { x, y: h2.sqrt() })
            }
            _ => None,
        }
    }
}

/// Open arc of the boundary circle traversed counterclockwise (increasing
/// real coordinate, wrapping through ∞) from `left` to `right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryInterval {
    pub left: BoundaryPoint,
    pub right: BoundaryPoint,
}

impl BoundaryInterval {
    pub fn new(left: BoundaryPoint, right: BoundaryPoint) -> Self {
        BoundaryInterval { left, right }
    }

    pub fn contains(&self, p: BoundaryPoint) -> bool {
        circular_contains(self, p)
    }

    /// Membership with the arc shrunk by `margin` at finite ends.
    pub fn contains_with_margin(&self, p: BoundaryPoint, margin: f64) -> bool {
        if !self.contains(p) {
            return false;
        }
        let near = |e: BoundaryPoint| match (e, p) {
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => (a - b).abs() <= margin,
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => true,
            _ => false,
        };
        !near(self.left) && !near(self.right)
    }

    /// Whether `other` lies inside the closure of this arc.
    pub fn contains_arc(&self, other: &BoundaryInterval, eps: f64) -> bool {
        let in_closure = |p: BoundaryPoint| {
            self.contains(p) || p.approx_eq(self.left, eps) || p.approx_eq(self.right, eps)
        };
        if !in_closure(other.left) || !in_closure(other.right) {
            return false;
        }
        if other.left.approx_eq(self.right, eps) && other.right.approx_eq(self.left, eps) {
            return false;
        }
        // the ends of self must not be swept by other
        let strictly_inside_other = |p: BoundaryPoint| {
            other.contains(p) && !p.approx_eq(other.left, eps) && !p.approx_eq(other.right, eps)
        };
        !strictly_inside_other(self.left) && !strictly_inside_other(self.right)
    }

    /// Whether the two open arcs are disjoint (touching at ends is allowed).
    pub fn disjoint_from(&self, other: &BoundaryInterval, eps: f64) -> bool {
        if self.left.approx_eq(other.left, eps) && self.right.approx_eq(other.right, eps) {
            return false;
        }
        let strictly = |arc: &BoundaryInterval, p: BoundaryPoint| {
            arc.contains(p) && !p.approx_eq(arc.left, eps) && !p.approx_eq(arc.right, eps)
        };
        !strictly(self, other.left)
            && !strictly(self, other.right)
            && !strictly(other, self.left)
            && !strictly(other, self.right)
    }
}

/// Strict membership of `p` in the counterclockwise open arc `interval`.
pub fn circular_contains(interval: &BoundaryInterval, p: BoundaryPoint) -> bool {
    use BoundaryPoint::{Finite, Infinity};
    match (interval.left, interval.right, p) {
        (Infinity, Infinity, _) => false,
        (Finite(l), Finite(r), Finite(x)) if l < r => l < x && x < r,
        (Finite(l), Finite(r), _) if l < r => false,
        (Finite(_), Finite(_), Infinity) => true,
        (Finite(l), Finite(r), Finite(x)) => x > l || x < r,
        (Infinity, Finite(r), Finite(x)) => x < r,
        (Infinity, Finite(_), Infinity) => false,
        (Finite(l), Infinity, Finite(x)) => x > l,
        (Finite(_), Infinity, Infinity) => false,
    }
}

/// Coarse type of a transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Identity,
    /// Order when some power up to the search bound is the identity.
    Elliptic {
        order: Option<u32>,
    },
    Parabolic,
    Hyperbolic,
}

impl Classification {
    pub fn kind(self) -> Kind {
        match self {
            Classification::Identity => Kind::Identity,
            Classification::Elliptic { .. } => Kind::Elliptic,
            Classification::Parabolic => Kind::Parabolic,
            Classification::Hyperbolic => Kind::Hyperbolic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixedPoints {
    Hyperbolic {
        attracting: BoundaryPoint,
        repelling: BoundaryPoint,
    },
    Parabolic(BoundaryPoint),
    Elliptic(HPoint),
}

/// Element of PSL(2,R), stored with determinant one and canonical sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Moebius {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TryFrom<[f64; 4]> for Moebius {
    type Error = MoebiusError;

    fn try_from(m: [f64; 4]) -> Result<Self, Self::Error> {
        Moebius::new(m[0], m[1], m[2], m[3])
    }
}

impl From<Moebius> for [f64; 4] {
    fn from(g: Moebius) -> Self {
        g.entries()
    }
}

impl fmt::Display for Moebius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl Moebius {
    pub const IDENTITY: Moebius = Moebius {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Normalizes a matrix of positive determinant by √det.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, MoebiusError> {
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(MoebiusError::NonFinite);
        }
        let det = a * d - b * c;
        if det.is_nan() || det <= 0.0 {
            return Err(MoebiusError::BadDeterminant { det });
        }
        let s = det.sqrt();
        Ok(Moebius::canonical(a / s, b / s, c / s, d / s))
    }

    fn canonical(a: f64, b: f64, c: f64, d: f64) -> Self {
        let entries = [a, b, c, d];
        let max = entries.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // first entry (in order a, b, c, d) attaining the maximal magnitude
        let lead = entries
            .iter()
            .copied()
            .find(|v| v.abs() == max)
            .unwrap_or(1.0);
        if lead < 0.0 {
            Moebius {
                a: -a,
                b: -b,
                c: -c,
                d: -d,
            }
        } else {
            Moebius { a, b, c, d }
        }
    }

    pub fn parabolic(lambda: f64) -> Self {
        Moebius::canonical(1.0, lambda, 0.0, 1.0)
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn compose(&self, h: &Moebius) -> Moebius {
        let a = self.a * h.a + self.b * h.c;
        let b = self.a * h.b + self.b * h.d;
        let c = self.c * h.a + self.d * h.c;
        let d = self.c * h.b + self.d * h.d;
        // renormalize against drift in long products, unless the computed
        // determinant is itself rounding noise (large entries)
        let det = a * d - b * c;
        let noise = 16.0 * f64::EPSILON * ((a * d).abs() + (b * c).abs());
        let s = det.abs().sqrt();
        if s > 0.0 && (det - 1.0).abs() > noise.max(1e-14) {
            Moebius::canonical(a / s, b / s, c / s, d / s)
        } else {
            Moebius::canonical(a, b, c, d)
        }
    }

    pub fn inverse(&self) -> Moebius {
        Moebius::canonical(self.d, -self.b, -self.c, self.a)
    }

    pub fn pow(&self, n: i64) -> Moebius {
        let base = if n < 0 { self.inverse() } else { *self };
        let mut acc = Moebius::IDENTITY;
        let mut sq = base;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&sq);
            }
            sq = sq.compose(&sq);
            k >>= 1;
        }
        acc
    }

    pub fn conjugate_by(&self, q: &Moebius) -> Moebius {
        q.compose(self).compose(&q.inverse())
    }

    /// Absolute trace (well defined in PSL).
    pub fn abs_trace(&self) -> f64 {
        (self.a + self.d).abs()
    }

    /// Equality in PSL: entries agree within `eps` up to a global sign.
    pub fn approx_eq(&self, other: &Moebius, eps: f64) -> bool {
        let scale = self
            .entries()
            .iter()
            .chain(other.entries().iter())
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let eps = eps * scale;
        let close = |s: f64| {
            (self.a - s * other.a).abs() <= eps
                && (self.b - s * other.b).abs() <= eps
                && (self.c - s * other.c).abs() <= eps
                && (self.d - s * other.d).abs() <= eps
        };
        close(1.0) || close(-1.0)
    }

    pub fn is_identity(&self, eps: f64) -> bool {
        self.approx_eq(&Moebius::IDENTITY, eps)
    }

    /// Whether the transformation fixes ∞.
    pub fn stabilizes_infinity(&self, eps: f64) -> bool {
        self.c.abs() < eps
    }

    /// Image of a boundary point; total on R ∪ {∞}.
    pub fn apply_boundary(&self, p: BoundaryPoint) -> BoundaryPoint {
        match p {
            BoundaryPoint::Infinity => {
                if self.c == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(self.a / self.c)
                }
            }
            BoundaryPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    let v = (self.a * x + self.b) / den;
                    if v.is_finite() {
                        BoundaryPoint::Finite(v)
                    } else {
                        BoundaryPoint::Infinity
                    }
                }
            }
        }
    }

    /// Image of a real number, `None` when it lands on ∞.
    pub fn apply_real(&self, x: f64) -> Option<f64> {
        self.apply_boundary(BoundaryPoint::Finite(x)).finite()
    }

    pub fn apply_interior(&self, z: HPoint) -> HPoint {
        // (az+b)/(cz+d) = ((az+b)(c z̄+d)) / |cz+d|²
        let (x, y) = (z.x, z.y);
        let den_re = self.c * x + self.d;
        let den_im = self.c * y;
        let den = den_re * den_re + den_im * den_im;
        let num_re = self.a * x + self.b;
        let num_im = self.a * y;
        let re = (num_re * den_re + num_im * den_im) / den;
        let im = y / den;
        HPoint { x: re, y: im }
    }

    pub fn apply_geodesic(&self, g: &Geodesic) -> Geodesic {
        Geodesic::new(
            self.apply_boundary(g.minus_end),
            self.apply_boundary(g.plus_end),
        )
    }

    pub fn apply_interval(&self, i: &BoundaryInterval) -> BoundaryInterval {
        BoundaryInterval::new(self.apply_boundary(i.left), self.apply_boundary(i.right))
    }

    /// |g'(p)| = 1/|cp + d|².
    pub fn deriv_mag(&self, p: impl Into<Point>) -> Result<f64, MoebiusError> {
        let den2 = match p.into() {
            Point::Interior(z) => {
                let re = self.c * z.x + self.d;
                let im = self.c * z.y;
                re * re + im * im
            }
            Point::Boundary(BoundaryPoint::Finite(x)) => {
                let v = self.c * x + self.d;
                v * v
            }
            Point::Boundary(BoundaryPoint::Infinity) => {
                if self.c == 0.0 {
                    return Ok(1.0 / (self.d * self.d));
                }
                return Err(MoebiusError::DerivativeAtInfinity);
            }
        };
        if den2.sqrt() < DEFAULT_EPS {
            return Err(MoebiusError::Pole);
        }
        Ok(1.0 / den2)
    }

    pub fn classify(&self, max_order: u32, eps: f64) -> Result<Classification, MoebiusError> {
        if self.is_identity(eps) {
            return Ok(Classification::Identity);
        }
        let tr = self.abs_trace();
        if tr == 2.0 {
            return Ok(Classification::Parabolic);
        }
        if (tr - 2.0).abs() <= eps {
            let other = if tr < 2.0 {
                Kind::Elliptic
            } else {
                Kind::Hyperbolic
            };
            return Err(MoebiusError::AmbiguousClassification {
                trace: tr,
                candidates: [Kind::Parabolic, other],
            });
        }
        if tr > 2.0 {
            return Ok(Classification::Hyperbolic);
        }
        let mut power = *self;
        let mut order = None;
        for k in 2..=max_order {
            power = power.compose(self);
            if power.is_identity(eps.max(1e-12) * 10.0 * k as f64) {
                order = Some(k);
                break;
            }
        }
        Ok(Classification::Elliptic { order })
    }

    pub fn fixed_points(&self, eps: f64) -> Result<FixedPoints, MoebiusError> {
        if self.is_identity(eps) {
            return Err(MoebiusError::IdentityHasNoFixedPointSet);
        }
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let tr = self.abs_trace();
        let kind = match self.classify(2, eps) {
            Ok(cl) => cl.kind(),
            Err(MoebiusError::AmbiguousClassification { .. }) => Kind::Parabolic,
            Err(e) => return Err(e),
        };
        match kind {
            Kind::Identity => Err(MoebiusError::IdentityHasNoFixedPointSet),
            Kind::Parabolic => {
                if c.abs() < eps {
                    Ok(FixedPoints::Parabolic(BoundaryPoint::Infinity))
                } else {
                    Ok(FixedPoints::Parabolic(BoundaryPoint::Finite(
                        (a - d) / (2.0 * c),
                    )))
                }
            }
            Kind::Elliptic => {
                // cz² + (d − a)z − b = 0 with complex roots
                let disc = 4.0 - tr * tr;
                let x = (a - d) / (2.0 * c);
                let y = (disc.sqrt() / (2.0 * c)).abs();
                Ok(FixedPoints::Elliptic(HPoint { x, y }))
            }
            Kind::Hyperbolic => {
                let (p, q) = if c.abs() < eps * (1.0 + a.abs().max(d.abs())) {
                    (BoundaryPoint::Infinity, BoundaryPoint::Finite(b / (d - a)))
                } else {
                    let disc = ((d - a) * (d - a) + 4.0 * b * c).max(0.0).sqrt();
                    // stable roots of cz² + (d−a)z − b
                    let s = if a - d >= 0.0 { 1.0 } else { -1.0 };
                    let q1 = (a - d) + s * disc;
                    let r1 = q1 / (2.0 * c);
                    let r2 = if q1 != 0.0 { -2.0 * b / q1 } else { r1 };
                    (BoundaryPoint::Finite(r1), BoundaryPoint::Finite(r2))
                };
                let deriv = |pt: BoundaryPoint| match pt {
                    BoundaryPoint::Finite(x) => {
                        let v = c * x + d;
                        1.0 / (v * v)
                    }
                    // at ∞ the multiplier is d² (c = 0)
                    BoundaryPoint::Infinity => d * d,
                };
                if deriv(p) < deriv(q) {
                    Ok(FixedPoints::Hyperbolic {
                        attracting: p,
                        repelling: q,
                    })
                } else {
                    Ok(FixedPoints::Hyperbolic {
                        attracting: q,
                        repelling: p,
                    })
                }
            }
        }
    }

    /// Axis of a hyperbolic element oriented from repelling to attracting.
    pub fn axis(&self, eps: f64) -> Result<Geodesic, MoebiusError> {
        match self.fixed_points(eps)? {
            FixedPoints::Hyperbolic {
                attracting,
                repelling,
            } => Ok(Geodesic::new(repelling, attracting)),
            _ => Err(MoebiusError::NotHyperbolic),
        }
    }

    pub fn translation_length(&self) -> Result<f64, MoebiusError> {
        let tr = self.abs_trace();
        if tr <= 2.0 + DEFAULT_EPS {
            return Err(MoebiusError::NotHyperbolic);
        }
        Ok(2.0 * (tr / 2.0).acosh())
    }

    /// Rounded canonical entries, used as a hashing key.
    pub(crate) fn key_candidates(&self, digits: i32) -> Vec<[i64; 4]> {
        let q = 10f64.powi(digits);
        let mut out = vec![[0i64; 4]];
        for (i, v) in self.entries().iter().enumerate() {
            let scaled = v * q;
            let r = scaled.round();
            let frac = scaled - r;
            let mut next = Vec::with_capacity(out.len() * 2);
            for k in &out {
                let mut k1 = *k;
                k1[i] = r as i64;
                next.push(k1);
                if frac.abs() > 0.499 {
                    let mut k2 = *k;
                    k2[i] = (r + frac.signum()) as i64;
                    next.push(k2);
                }
            }
            out = next;
        }
        out
    }
}

/// Transversal intersection of two geodesics, if their endpoints interlace.
pub fn geodesic_meets(
    g1: &Geodesic,
    g2: &Geodesic,
    eps: f64,
) -> Result<Option<HPoint>, MoebiusError> {
    if g1.same_set(g2, eps) {
        return Err(MoebiusError::CoincidentGeodesics);
    }
    let (p1, q1, p2, q2) = (g1.minus_end, g1.plus_end, g2.minus_end, g2.plus_end);
    // a shared endpoint means the curves meet only at the boundary
    if p1.approx_eq(p2, eps)
        || p1.approx_eq(q2, eps)
        || q1.approx_eq(p2, eps)
        || q1.approx_eq(q2, eps)
    {
        return Ok(None);
    }
    let arc = BoundaryInterval::new(p1, q1);
    if arc.contains(p2) == arc.contains(q2) {
        return Ok(None);
    }
    Ok(intersect_curves(g1, g2))
}

fn semicircle(g: &Geodesic) -> Option<(f64, f64)> {
    match (g.minus_end, g.plus_end) {
        (BoundaryPoint::Finite(p), BoundaryPoint::Finite(q)) => {
            Some((0.5 * (p + q), 0.5 * (p - q).abs()))
        }
        _ => None,
    }
}

fn vertical_x(g: &Geodesic) -> Option<f64> {
    match (g.minus_end, g.plus_end) {
        (BoundaryPoint::Finite(x), BoundaryPoint::Infinity)
        | (BoundaryPoint::Infinity, BoundaryPoint::Finite(x)) => Some(x),
        _ => None,
    }
}

fn intersect_curves(g1: &Geodesic, g2: &Geodesic) -> Option<HPoint> {
    match (semicircle(g1), semicircle(g2)) {
        (Some((c1, r1)), Some((c2, r2))) => {
            if c1 == c2 {
                return None;
            }
            let x = (r1 * r1 - r2 * r2 + c2 * c2 - c1 * c1) / (2.0 * (c2 - c1));
            // evaluate height on the circle where x sits better inside
            let (c, r) = if (x - c1).abs() / r1 < (x - c2).abs() / r2 {
                (c1, r1)
            } else {
                (c2, r2)
            };
            let h2 = r * r - (x - c) * (x - c);
            (h2 > 0.0).then(|| HPoint { x, y: h2.sqrt() })
        }
        (Some((c, r)), None) | (None, Some((c, r))) => {
            let v = vertical_x(g1).or_else(|| vertical_x(g2))?;
            let h2 = r * r - (v - c) * (v - c);
            (h2 > 0.0).then(|| HPoint { x: v, y: h2.sqrt() })
        }
        (None, None) => None,
    }
}

/// Total order on boundary points for sorting (∞ last).
pub fn cmp_boundary(a: BoundaryPoint, b: BoundaryPoint) -> Ordering {
    match (a, b) {
        (BoundaryPoint::Finite(x), BoundaryPoint::Finite(y)) => x.total_cmp(&y),
        (BoundaryPoint::Finite(_), BoundaryPoint::Infinity) => Ordering::Less,
        (BoundaryPoint::Infinity, BoundaryPoint::Finite(_)) => Ordering::Greater,
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => Ordering::Equal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{h_lambda, s_involution, t_lambda};
    use approx::assert_relative_eq;

    const EPS: f64 = DEFAULT_EPS;

    fn fin(x: f64) -> BoundaryPoint {
        BoundaryPoint::Finite(x)
    }

    #[test]
    fn compose_identities() {
        let s = s_involution();
        assert!(s.compose(&s).is_identity(EPS));
        let h = h_lambda(2.0);
        assert!(h.compose(&Moebius::IDENTITY).approx_eq(&h, EPS));
        assert!(h.compose(&h.inverse()).is_identity(EPS));
        // direct product against a hand-multiplied inverse
        let k = 1.0 / (2.0 * 2f64.sqrt());
        let h_inv = Moebius::new(3.0 * k, -k, -k, 3.0 * k).unwrap();
        assert!(h.compose(&h_inv).is_identity(EPS));
    }

    #[test]
    fn canonical_sign_and_normalization() {
        let g = Moebius::new(2.0, 0.0, 0.0, 2.0).unwrap();
        assert!(g.is_identity(EPS));
        let g = Moebius::new(0.0, 1.0, -1.0, 0.0).unwrap();
        assert_eq!(g.entries(), [0.0, 1.0, -1.0, 0.0]);
        let neg = Moebius::new(-3.0, -8.0, -1.0, -3.0).unwrap();
        assert!(neg.a() > 0.0);
        assert!(Moebius::new(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn boundary_action() {
        let s = s_involution();
        assert_eq!(s.apply_boundary(fin(0.0)), BoundaryPoint::Infinity);
        assert_eq!(s.apply_boundary(BoundaryPoint::Infinity), fin(0.0));
        let t = t_lambda(3.0);
        assert_eq!(
            t.apply_boundary(BoundaryPoint::Infinity),
            BoundaryPoint::Infinity
        );
        for lambda in [1.5, 2.0, 7.0] {
            let h = h_lambda(lambda);
            let one = h.apply_boundary(fin(1.0)).finite().unwrap();
            assert_relative_eq!(one, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn interior_action() {
        let z = HPoint::new(0.3, 1.7).unwrap();
        assert!(Moebius::IDENTITY.apply_interior(z).approx_eq(z, EPS));
        let i = HPoint::new(0.0, 1.0).unwrap();
        assert!(s_involution().apply_interior(i).approx_eq(i, EPS));
        // i/(i+1) = (1+i)/2
        let g = Moebius::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let w = g.apply_interior(i);
        assert_relative_eq!(w.x, 0.5, epsilon = 1e-14);
        assert_relative_eq!(w.y, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn derivative_magnitude() {
        let i = HPoint::new(0.0, 1.0).unwrap();
        assert_relative_eq!(s_involution().deriv_mag(i).unwrap(), 1.0);
        let t = t_lambda(2.5);
        assert_relative_eq!(t.deriv_mag(fin(-4.0)).unwrap(), 1.0);
        assert_relative_eq!(t.deriv_mag(i).unwrap(), 1.0);
        // finite-difference oracle for g = [[1,0],[1,1]] at i
        let g = Moebius::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let f = |x: f64, y: f64| {
            let w = g.apply_interior(HPoint { x, y });
            (w.x, w.y)
        };
        let hstep = 1e-6;
        let (ax, ay) = f(hstep, 1.0);
        let (bx, by) = f(-hstep, 1.0);
        let fd = ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt() / (2.0 * hstep);
        assert_relative_eq!(fd, 0.5, epsilon = 1e-8);
        assert_relative_eq!(g.deriv_mag(i).unwrap(), 0.5, epsilon = 1e-14);
        assert_eq!(g.deriv_mag(fin(-1.0)), Err(MoebiusError::Pole));
    }

    #[test]
    fn classification() {
        assert_eq!(
            s_involution().classify(12, EPS).unwrap(),
            Classification::Elliptic { order: Some(2) }
        );
        assert_eq!(
            t_lambda(1.0).classify(12, EPS).unwrap(),
            Classification::Parabolic
        );
        for lambda in [1.1, 2.0, 9.0] {
            assert_eq!(
                h_lambda(lambda).classify(12, EPS).unwrap(),
                Classification::Hyperbolic
            );
        }
        assert_eq!(
            Moebius::IDENTITY.classify(12, EPS).unwrap(),
            Classification::Identity
        );
        // rotation by 2π/3 has order 3
        let th = std::f64::consts::PI / 3.0;
        let r = Moebius::new(th.cos(), -th.sin(), th.sin(), th.cos()).unwrap();
        assert_eq!(
            r.classify(12, EPS).unwrap(),
            Classification::Elliptic { order: Some(3) }
        );
        let nearly = Moebius::new(1.0, 1.0, 1e-12, 1.0 + 1e-12).unwrap();
        assert!(matches!(
            nearly.classify(12, EPS),
            Err(MoebiusError::AmbiguousClassification { .. })
        ));
    }

    #[test]
    fn fixed_point_sets() {
        match h_lambda(2.0).fixed_points(EPS).unwrap() {
            FixedPoints::Hyperbolic {
                attracting,
                repelling,
            } => {
                assert_relative_eq!(attracting.finite().unwrap(), 1.0, epsilon = 1e-12);
                assert_relative_eq!(repelling.finite().unwrap(), -1.0, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            t_lambda(2.0).fixed_points(EPS).unwrap(),
            FixedPoints::Parabolic(BoundaryPoint::Infinity)
        );
        match s_involution().fixed_points(EPS).unwrap() {
            FixedPoints::Elliptic(z) => assert!(z.approx_eq(HPoint { x: 0.0, y: 1.0 }, EPS)),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            Moebius::IDENTITY.fixed_points(EPS),
            Err(MoebiusError::IdentityHasNoFixedPointSet)
        );
        // z ↦ 4z: ∞ attracting
        let dil = Moebius::new(2.0, 0.0, 0.0, 0.5).unwrap();
        match dil.fixed_points(EPS).unwrap() {
            FixedPoints::Hyperbolic {
                attracting,
                repelling,
            } => {
                assert!(attracting.is_infinite());
                assert_relative_eq!(repelling.finite().unwrap(), 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn translation_lengths() {
        let h = h_lambda(2.0);
        let l = h.translation_length().unwrap();
        // conjugate to z ↦ 2z: distance from i to 2i
        let oracle = HPoint { x: 0.0, y: 1.0 }.distance(HPoint { x: 0.0, y: 2.0 });
        assert_relative_eq!(l, oracle, epsilon = 1e-12);
        assert_relative_eq!(l, 2f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(
            h.pow(2).translation_length().unwrap(),
            2.0 * l,
            epsilon = 1e-12
        );
        let q = Moebius::new(1.3, 0.4, -0.7, 0.9).unwrap();
        assert_relative_eq!(
            h.conjugate_by(&q).translation_length().unwrap(),
            l,
            epsilon = 1e-9
        );
        assert_eq!(
            t_lambda(1.0).translation_length(),
            Err(MoebiusError::NotHyperbolic)
        );
    }

    #[test]
    fn geodesic_intersections() {
        let imag = Geodesic::vertical(0.0);
        let unit = Geodesic::new(fin(-1.0), fin(1.0));
        let p = geodesic_meets(&imag, &unit, EPS).unwrap().unwrap();
        assert!(p.approx_eq(HPoint { x: 0.0, y: 1.0 }, EPS));
        let far = Geodesic::new(fin(1.0), fin(2.0));
        assert_eq!(geodesic_meets(&imag, &far, EPS).unwrap(), None);
        // circles |z| = 2 and |z − 1| = 2 meet at x = 1/2
        let g1 = Geodesic::new(fin(-2.0), fin(2.0));
        let g2 = Geodesic::new(fin(-1.0), fin(3.0));
        let p = geodesic_meets(&g1, &g2, EPS).unwrap().unwrap();
        assert_relative_eq!(p.x, 0.5, epsilon = 1e-14);
        assert_relative_eq!(p.y, (4.0f64 - 0.25).sqrt(), epsilon = 1e-14);
        assert_eq!(
            geodesic_meets(&unit, &unit.reversed(), EPS),
            Err(MoebiusError::CoincidentGeodesics)
        );
        // shared endpoint
        let touch = Geodesic::new(fin(1.0), fin(3.0));
        assert_eq!(geodesic_meets(&unit, &touch, EPS).unwrap(), None);
    }

    #[test]
    fn circular_membership() {
        let i = BoundaryInterval::new(fin(0.0), BoundaryPoint::Infinity);
        assert!(circular_contains(&i, fin(1.0)));
        assert!(!circular_contains(&i, fin(-1.0)));
        let wrap = BoundaryInterval::new(fin(1.0), fin(-1.0));
        assert!(circular_contains(&wrap, BoundaryPoint::Infinity));
        assert!(circular_contains(&wrap, fin(5.0)));
        assert!(!circular_contains(&wrap, fin(0.0)));
        let inner = BoundaryInterval::new(fin(-1.0), fin(1.0));
        assert!(!circular_contains(&inner, BoundaryPoint::Infinity));
        assert!(!circular_contains(&inner, fin(1.0)));
    }

    #[test]
    fn arc_inclusion_and_disjointness() {
        let big = BoundaryInterval::new(fin(0.0), BoundaryPoint::Infinity);
        let small = BoundaryInterval::new(fin(1.0 / 3.0), fin(3.0));
        assert!(big.contains_arc(&small, EPS));
        assert!(!small.contains_arc(&big, EPS));
        assert!(big.contains_arc(&big, EPS));
        let wrap = BoundaryInterval::new(fin(3.0), fin(1.0 / 3.0));
        assert!(!big.contains_arc(&wrap, EPS));
        let other = BoundaryInterval::new(fin(3.0), fin(4.0));
        assert!(small.disjoint_from(&other, EPS));
        assert!(!small.disjoint_from(&small, EPS));
        assert!(!big.disjoint_from(&small, EPS));
    }
}
