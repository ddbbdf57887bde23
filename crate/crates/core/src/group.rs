//! Word enumeration, approximate membership and primitive hyperbolic
//! conjugacy classes for finitely generated groups of Moebius maps.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::moebius::{Classification, Moebius, DEFAULT_EPS};

/// Upper bound on stored ball elements unless configured otherwise.
pub const DEFAULT_BALL_CAP: usize = 400_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupError {
    #[error("presentation has no generators")]
    NoGenerators,
    #[error("duplicate generator label `{0}`")]
    DuplicateLabel(String),
    #[error("generator `{0}` is the identity")]
    IdentityGenerator(String),
    #[error("ball exceeds {cap} elements at word length {level}")]
    BallTooLarge { cap: usize, level: usize },
    #[error("unknown generator label `{0}`")]
    UnknownLabel(String),
}

/// A generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub gen: usize,
    pub inv: bool,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        Letter {
            gen: self.gen,
            inv: !self.inv,
        }
    }

    fn rank(self) -> usize {
        2 * self.gen + usize::from(self.inv)
    }
}

/// A word over generators and their inverses, read left to right as a
/// product.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    fn ranks(&self) -> Vec<usize> {
        self.0.iter().map(|l| l.rank()).collect()
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    /// Shortlex order.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.ranks().cmp(&other.ranks()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Generator {
    pub label: String,
    pub element: Moebius,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupPresentation {
    generators: Vec<Generator>,
    pub eps: f64,
    pub word_cutoff: usize,
    pub ball_cap: usize,
    involutions: Vec<bool>,
}

impl GroupPresentation {
    pub fn new(
        generators: Vec<(String, Moebius)>,
        eps: f64,
        word_cutoff: usize,
    ) -> Result<Self, GroupError> {
        if generators.is_empty() {
            return Err(GroupError::NoGenerators);
        }
        let mut seen = std::collections::BTreeSet::new();
        for (label, g) in &generators {
            if !seen.insert(label.clone()) {
                return Err(GroupError::DuplicateLabel(label.clone()));
            }
            if g.is_identity(eps) {
                return Err(GroupError::IdentityGenerator(label.clone()));
            }
        }
        let involutions = generators
            .iter()
            .map(|(_, g)| g.compose(g).is_identity(eps))
            .collect();
        Ok(GroupPresentation {
            generators: generators
                .into_iter()
                .map(|(label, element)| Generator { label, element })
                .collect(),
            eps,
            word_cutoff,
            ball_cap: DEFAULT_BALL_CAP,
            involutions,
        })
    }

    pub fn with_default_eps(
        generators: Vec<(&str, Moebius)>,
        word_cutoff: usize,
    ) -> Result<Self, GroupError> {
        GroupPresentation::new(
            generators
                .into_iter()
                .map(|(l, g)| (l.to_string(), g))
                .collect(),
            DEFAULT_EPS,
            word_cutoff,
        )
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn label(&self, gen: usize) -> &str {
        &self.generators[gen].label
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.label == label)
    }

    pub fn is_involution(&self, gen: usize) -> bool {
        self.involutions[gen]
    }

    /// Letters in enumeration order; involutions contribute one letter.
    pub fn alphabet(&self) -> Vec<Letter> {
        let mut out = Vec::with_capacity(2 * self.rank());
        for gen in 0..self.rank() {
            out.push(Letter { gen, inv: false });
            if !self.involutions[gen] {
                out.push(Letter { gen, inv: true });
            }
        }
        out
    }

    fn normalize(&self, l: Letter) -> Letter {
        if self.involutions[l.gen] {
            Letter {
                gen: l.gen,
                inv: false,
            }
        } else {
            l
        }
    }

    fn letters_cancel(&self, a: Letter, b: Letter) -> bool {
        self.normalize(a) == self.normalize(b.inverse())
    }

    pub fn letter_element(&self, l: Letter) -> Moebius {
        let g = self.generators[l.gen].element;
        if l.inv {
            g.inverse()
        } else {
            g
        }
    }

    pub fn evaluate(&self, w: &Word) -> Moebius {
        w.0.iter().fold(Moebius::IDENTITY, |acc, l| {
            acc.compose(&self.letter_element(*l))
        })
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "id".to_string();
        }
        w.0.iter()
            .map(|l| {
                if l.inv {
                    format!("{}^-1", self.label(l.gen))
                } else {
                    self.label(l.gen).to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses the space-separated form produced by [`Self::format_word`].
    pub fn parse_word(&self, text: &str) -> Result<Word, GroupError> {
        let text = text.trim();
        if text == "id" || text.is_empty() {
            return Ok(Word::empty());
        }
        let mut out = Vec::new();
        for tok in text.split_whitespace() {
            let (name, inv) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (tok, false),
            };
            let gen = self
                .index_of(name)
                .ok_or_else(|| GroupError::UnknownLabel(name.to_string()))?;
            out.push(Letter { gen, inv });
        }
        Ok(Word(out))
    }

    /// Freely and cyclically reduced word, with involution letters
    /// normalized.
    pub fn cyclic_reduce(&self, w: &Word) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(w.len());
        for l in &w.0 {
            let l = self.normalize(*l);
            match stack.last() {
                Some(&top) if self.letters_cancel(top, l) => {
                    stack.pop();
                }
                _ => stack.push(l),
            }
        }
        let mut start = 0;
        let mut end = stack.len();
        while end - start >= 2 && self.letters_cancel(stack[start], stack[end - 1]) {
            start += 1;
            end -= 1;
        }
        Word(stack[start..end].to_vec())
    }

    /// Least rotation in shortlex order.
    pub fn min_rotation(&self, w: &Word) -> Word {
        let n = w.len();
        (0..n.max(1))
            .map(|r| {
                let mut v = w.0[r.min(n)..].to_vec();
                v.extend_from_slice(&w.0[..r.min(n)]);
                Word(v)
            })
            .min()
            .unwrap_or_default()
    }

    /// Root `u` and exponent `k` with `w = u^k`, `k` maximal.
    pub fn word_root(w: &Word) -> (Word, usize) {
        let n = w.len();
        for p in 1..=n {
            if n.is_multiple_of(p) && (p..n).all(|i| w.0[i] == w.0[i - p]) {
                return (Word(w.0[..p].to_vec()), n / p);
            }
        }
        (w.clone(), 1)
    }

    pub fn enumerate_ball(&self, n: usize) -> Result<WordBall, GroupError> {
        enumerate_ball(self, n)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallElement {
    pub element: Moebius,
    pub word: Word,
}

/// Group elements reachable by words of bounded length, each stored once
/// with its shortlex-least word.
#[derive(Debug, Clone)]
pub struct WordBall {
    pub radius: usize,
    pub eps: f64,
    elements: Vec<BallElement>,
    index: HashMap<[i64; 4], usize>,
    digits: i32,
    /// `level_ends[n]` is the number of elements with word length ≤ n.
    level_ends: Vec<usize>,
}

impl WordBall {
    fn new(eps: f64) -> Self {
        let digits = (-eps.log10()).ceil() as i32;
        WordBall {
            radius: 0,
            eps,
            elements: Vec::new(),
            index: HashMap::new(),
            digits,
            level_ends: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[BallElement] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = &BallElement> {
        self.elements.iter()
    }

    /// Elements with word length at most `n`.
    pub fn up_to(&self, n: usize) -> &[BallElement] {
        let end = self
            .level_ends
            .get(n)
            .copied()
            .unwrap_or(self.elements.len());
        &self.elements[..end]
    }

    /// Stored element equal to `g` in PSL within tolerance.
    pub fn find(&self, g: &Moebius) -> Option<&BallElement> {
        let neg = Moebius::new(-g.a(), -g.b(), -g.c(), -g.d()).ok();
        let probes = g
            .key_candidates(self.digits)
            .into_iter()
            .chain(neg.into_iter().flat_map(|m| m.key_candidates(self.digits)));
        for key in probes {
            if let Some(&i) = self.index.get(&key) {
                let e = &self.elements[i];
                if e.element.approx_eq(g, self.eps * 10.0) {
                    return Some(e);
                }
            }
        }
        None
    }

    fn insert(&mut self, element: Moebius, word: Word) -> bool {
        if self.find(&element).is_some() {
            return false;
        }
        let key = element.key_candidates(self.digits)[0];
        self.index.insert(key, self.elements.len());
        self.elements.push(BallElement { element, word });
        true
    }
}

/// Breadth-first enumeration in shortlex order. Products of a level are
/// computed in parallel and inserted sequentially, so the result does not
/// depend on scheduling.
pub fn enumerate_ball(group: &GroupPresentation, n: usize) -> Result<WordBall, GroupError> {
    let mut ball = WordBall::new(group.eps);
    ball.insert(Moebius::IDENTITY, Word::empty());
    ball.level_ends.push(1);
    let alphabet = group.alphabet();
    let mut frontier: Vec<usize> = vec![0];
    for level in 1..=n {
        let parents: Vec<(Moebius, Word)> = frontier
            .iter()
            .map(|&i| (ball.elements[i].element, ball.elements[i].word.clone()))
            .collect();
        let children: Vec<Vec<(Moebius, Word)>> = exec::map(&parents, |(g, w)| {
            alphabet
                .iter()
                .filter(|l| {
                    w.0.last()
                        .is_none_or(|last| !group.letters_cancel(*last, **l))
                })
                .map(|l| {
                    let mut word = w.clone();
                    word.0.push(*l);
                    (g.compose(&group.letter_element(*l)), word)
                })
                .collect()
        });
        let mut next = Vec::new();
        for (g, w) in children.into_iter().flatten() {
            if ball.insert(g, w) {
                next.push(ball.elements.len() - 1);
                if ball.elements.len() > group.ball_cap {
                    return Err(GroupError::BallTooLarge {
                        cap: group.ball_cap,
                        level,
                    });
                }
            }
        }
        ball.level_ends.push(ball.elements.len());
        ball.radius = level;
        frontier = next;
    }
    Ok(ball)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Membership {
    Yes(Word),
    Unknown,
}

impl Membership {
    pub fn is_yes(&self) -> bool {
        matches!(self, Membership::Yes(_))
    }
}

/// Semi-decision for membership: a witness word, or `Unknown`.
pub fn contains_up_to(ball: &WordBall, g: &Moebius) -> Membership {
    match ball.find(g) {
        Some(e) => Membership::Yes(e.word.clone()),
        None => Membership::Unknown,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConjClass {
    pub representative: Moebius,
    pub word: Word,
    pub trace: f64,
    pub length: f64,
    pub primitive: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ClassOptions {
    pub include_imprimitive: bool,
}

/// Conjugacy classes of hyperbolic elements with translation length at
/// most `l_max` that are visible in `ball`.
pub fn primitive_hyperbolic_classes(
    group: &GroupPresentation,
    ball: &WordBall,
    l_max: f64,
    options: ClassOptions,
) -> Vec<ConjClass> {
    let eps = group.eps;
    // one candidate per cyclic word
    let mut by_word: BTreeMap<Word, (Moebius, f64)> = BTreeMap::new();
    for e in ball.iter() {
        if e.word.is_empty() {
            continue;
        }
        let reduced = group.cyclic_reduce(&e.word);
        if reduced.is_empty() {
            continue;
        }
        let key = group.min_rotation(&reduced);
        if by_word.contains_key(&key) {
            continue;
        }
        let rep = group.evaluate(&key);
        if !matches!(rep.classify(2, eps), Ok(Classification::Hyperbolic)) {
            continue;
        }
        let Ok(length) = rep.translation_length() else {
            continue;
        };
        if length <= l_max + eps {
            by_word.insert(key, (rep, length));
        }
    }
    let cands: Vec<(Word, Moebius, f64)> =
        by_word.into_iter().map(|(w, (g, l))| (w, g, l)).collect();

    // merge distinct cyclic words that are conjugate in the ball
    let mut parent: Vec<usize> = (0..cands.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&i, &j| {
        cands[i]
            .1
            .abs_trace()
            .total_cmp(&cands[j].1.abs_trace())
            .then(i.cmp(&j))
    });
    let tol = 1e-7;
    for a in 0..order.len() {
        let i = order[a];
        let ti = cands[i].1.abs_trace();
        for &j in order[a + 1..].iter() {
            let tj = cands[j].1.abs_trace();
            if tj - ti > tol * (1.0 + ti) {
                break;
            }
            if root(&mut parent, i) == root(&mut parent, j) {
                continue;
            }
            if conjugate_in_ball(&cands[i].1, &cands[j].1, ball, eps) {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                parent[hi] = lo;
            }
        }
    }

    let mut classes = Vec::new();
    for i in 0..cands.len() {
        if root(&mut parent, i) != i {
            continue;
        }
        let (w, g, l) = &cands[i];
        let (_, k) = GroupPresentation::word_root(w);
        let mut primitive = k == 1;
        if primitive {
            // numerically a proper power of a shorter class
            primitive = !cands.iter().enumerate().any(|(j, (_, h, lh))| {
                if j == i {
                    return false;
                }
                let ratio = l / lh;
                let p = ratio.round();
                p >= 2.0
                    && (ratio - p).abs() < 1e-7
                    && conjugate_in_ball(&h.pow(p as i64), g, ball, eps)
            });
        }
        if primitive || options.include_imprimitive {
            classes.push(ConjClass {
                representative: *g,
                word: w.clone(),
                trace: g.abs_trace(),
                length: *l,
                primitive,
            });
        }
    }
    classes.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.trace.total_cmp(&b.trace))
            .then(a.word.cmp(&b.word))
    });
    classes
}

/// Whether `q g q⁻¹ = h` for some `q` in the ball.
pub fn conjugate_in_ball(g: &Moebius, h: &Moebius, ball: &WordBall, eps: f64) -> bool {
    if g.approx_eq(h, eps * 10.0) {
        return true;
    }
    ball.iter()
        .any(|q| g.conjugate_by(&q.element).approx_eq(h, eps * 1e3))
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inv {
            write!(f, "g{}^-1", self.gen)
        } else {
            write!(f, "g{}", self.gen)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{h_lambda, s_involution, t_lambda};
    use approx::assert_relative_eq;

    fn pres(gens: Vec<(&str, Moebius)>) -> GroupPresentation {
        GroupPresentation::with_default_eps(gens, 6).unwrap()
    }

    #[test]
    fn involution_ball() {
        let g = pres(vec![("s", s_involution())]);
        let ball = g.enumerate_ball(3).unwrap();
        assert_eq!(ball.len(), 2);
    }

    #[test]
    fn parabolic_ball() {
        let g = pres(vec![("t", t_lambda(2.5))]);
        let ball = g.enumerate_ball(3).unwrap();
        assert_eq!(ball.len(), 7);
        let words: Vec<String> = ball.iter().map(|e| g.format_word(&e.word)).collect();
        assert_eq!(words[0], "id");
        assert_eq!(words[1], "t");
        assert_eq!(words[2], "t^-1");
        assert_eq!(words[3], "t t");
    }

    #[test]
    fn ball_matches_brute_force_products() {
        let g = pres(vec![("h", h_lambda(2.0)), ("s", s_involution())]);
        let ball = g.enumerate_ball(2).unwrap();
        // brute force over all 1 + 4 + 16 words with plain dedup
        let letters = [
            h_lambda(2.0),
            h_lambda(2.0).inverse(),
            s_involution(),
            s_involution().inverse(),
        ];
        let mut all = vec![Moebius::IDENTITY];
        for a in &letters {
            all.push(*a);
            for b in &letters {
                all.push(a.compose(b));
            }
        }
        let mut distinct: Vec<Moebius> = Vec::new();
        for m in all {
            if !distinct.iter().any(|d| d.approx_eq(&m, 1e-9)) {
                distinct.push(m);
            }
        }
        assert_eq!(ball.len(), distinct.len());
    }

    #[test]
    fn membership() {
        let g = pres(vec![("h", h_lambda(2.0)), ("s", s_involution())]);
        let ball = g.enumerate_ball(2).unwrap();
        match contains_up_to(&ball, &s_involution()) {
            Membership::Yes(w) => assert_eq!(w.len(), 1),
            Membership::Unknown => panic!("generator not found"),
        }
        let hs = h_lambda(2.0).compose(&s_involution());
        assert!(contains_up_to(&ball, &hs).is_yes());
        let cyc = pres(vec![("h", h_lambda(2.0))]);
        let ball = cyc.enumerate_ball(6).unwrap();
        assert_eq!(
            contains_up_to(&ball, &t_lambda(std::f64::consts::PI)),
            Membership::Unknown
        );
    }

    #[test]
    fn cyclic_classes() {
        let g = pres(vec![("h", h_lambda(2.0))]);
        let ball = g.enumerate_ball(6).unwrap();
        let cl = primitive_hyperbolic_classes(&g, &ball, 1.0, ClassOptions::default());
        assert_eq!(cl.len(), 2);
        for c in &cl {
            assert_relative_eq!(c.length, 2f64.ln(), epsilon = 1e-12);
            assert!(c.primitive);
        }
        let cl = primitive_hyperbolic_classes(&g, &ball, 1.5, ClassOptions::default());
        assert_eq!(cl.len(), 2);
        let all = primitive_hyperbolic_classes(
            &g,
            &ball,
            1.5,
            ClassOptions {
                include_imprimitive: true,
            },
        );
        assert_eq!(all.len(), 4);
        assert_eq!(all.iter().filter(|c| !c.primitive).count(), 2);
    }

    #[test]
    fn dihedral_merges_h_and_inverse() {
        let g = pres(vec![("h", h_lambda(2.0)), ("s", s_involution())]);
        let ball = g.enumerate_ball(6).unwrap();
        let cl = primitive_hyperbolic_classes(&g, &ball, 1.0, ClassOptions::default());
        assert_eq!(cl.len(), 1);
        assert_relative_eq!(cl[0].length, 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn word_helpers() {
        let g = pres(vec![("a", h_lambda(2.0)), ("b", h_lambda(3.0))]);
        let w = g.parse_word("a^-1 b a b a").unwrap();
        assert_eq!(g.format_word(&g.cyclic_reduce(&w)), "b a b");
        let w = g.parse_word("a^-1 b a b^-1 a").unwrap();
        assert_eq!(g.format_word(&g.cyclic_reduce(&w)), "a");
        let (root, k) = GroupPresentation::word_root(&g.parse_word("a b a b").unwrap());
        assert_eq!(k, 2);
        assert_eq!(g.format_word(&root), "a b");
        assert_eq!(
            g.format_word(&g.min_rotation(&g.parse_word("b a").unwrap())),
            "a b"
        );
        assert!(g.parse_word("z").is_err());
    }

    #[test]
    fn rejects_bad_presentations() {
        assert!(matches!(
            GroupPresentation::with_default_eps(vec![("a", Moebius::IDENTITY)], 3),
            Err(GroupError::IdentityGenerator(_))
        ));
        assert!(matches!(
            GroupPresentation::with_default_eps(
                vec![("a", s_involution()), ("a", t_lambda(1.0))],
                3
            ),
            Err(GroupError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn ball_cap_enforced() {
        let mut g = pres(vec![("a", h_lambda(2.0)), ("b", t_lambda(17.0))]);
        g.ball_cap = 50;
        assert!(matches!(
            g.enumerate_ball(6),
            Err(GroupError::BallTooLarge { .. })
        ));
    }
}
