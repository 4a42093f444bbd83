use std::fmt;

use thiserror::Error;

/// A generator or its inverse, encoded as `2 * index + inverted`. The derived
/// order is `x1 < x1^-1 < x2 < x2^-1 < ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub u32);

impl Letter {
    pub fn gen(index: usize) -> Letter {
        Letter(2 * index as u32)
    }

    pub fn new(index: usize, inverted: bool) -> Letter {
        Letter(2 * index as u32 + inverted as u32)
    }

    pub fn index(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inv(self) -> Letter {
        Letter(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("malformed word token `{0}`")]
    Malformed(String),
}

/// A freely reduced word in a free group.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FreeWord(Vec<Letter>);

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord(Vec::new())
    }

    pub fn gen(index: usize) -> Self {
        FreeWord(vec![Letter::gen(index)])
    }

    /// Freely reduces the letter sequence.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord(out)
    }

    /// From signed 1-based indices: `2` is the second generator, `-2` its inverse.
    pub fn from_signed(indices: &[i32]) -> Self {
        Self::from_letters(indices.iter().map(|&i| {
            assert!(i != 0, "generator indices are 1-based");
            Letter::new(i.unsigned_abs() as usize - 1, i < 0)
        }))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest generator index used plus one.
    pub fn min_rank(&self) -> usize {
        self.0.iter().map(|l| l.index() + 1).max().unwrap_or(0)
    }

    pub fn check_rank(&self, rank: usize) -> Result<(), WordError> {
        match self.0.iter().find(|l| l.index() >= rank) {
            Some(l) => Err(WordError::IndexOutOfRange {
                index: l.index(),
                rank,
            }),
            None => Ok(()),
        }
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.0.clone();
        let mut rest = other.0.as_slice();
        while let (Some(&a), Some(&b)) = (out.last(), rest.first()) {
            if a != b.inv() {
                break;
            }
            out.pop();
            rest = &rest[1..];
        }
        out.extend_from_slice(rest);
        FreeWord(out)
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn pow(&self, n: i64) -> FreeWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = FreeWord::identity();
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// Image under the homomorphism sending generator `i` to `images[i]`.
    pub fn substitute(&self, images: &[FreeWord]) -> FreeWord {
        let mut out: Vec<Letter> = Vec::new();
        for l in &self.0 {
            let img = &images[l.index()];
            let push = |out: &mut Vec<Letter>, x: Letter| {
                if out.last() == Some(&x.inv()) {
                    out.pop();
                } else {
                    out.push(x);
                }
            };
            if l.is_inverse() {
                for &x in img.0.iter().rev() {
                    push(&mut out, x.inv());
                }
            } else {
                for &x in &img.0 {
                    push(&mut out, x);
                }
            }
        }
        FreeWord(out)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&a), Some(&b)) => self.0.len() == 1 || a != b.inv(),
            _ => true,
        }
    }

    /// `(u, c)` with `self = u c u^-1` and `c` cyclically reduced.
    pub fn cyclic_reduction(&self) -> (FreeWord, FreeWord) {
        let w = &self.0;
        let mut k = 0;
        while 2 * k + 1 < w.len() && w[k] == w[w.len() - 1 - k].inv() {
            k += 1;
        }
        (
            FreeWord(w[..k].to_vec()),
            FreeWord(w[k..w.len() - k].to_vec()),
        )
    }

    pub fn cyclically_reduced(&self) -> FreeWord {
        self.cyclic_reduction().1
    }

    /// Canonical representative of the conjugacy class of `self` up to
    /// inversion: the least rotation of the cyclic reduction or of its inverse.
    pub fn canonical_cyclic(&self) -> FreeWord {
        let c = self.cyclically_reduced();
        let a = least_rotation(&c.0);
        let b = least_rotation(&c.inverse().0);
        FreeWord(a.min(b))
    }

    /// Canonical form of the conjugacy class alone (no inversion).
    pub fn conjugacy_canonical(&self) -> FreeWord {
        FreeWord(least_rotation(&self.cyclically_reduced().0))
    }

    pub fn display<'a>(&'a self, labels: &'a [String]) -> WordDisplay<'a> {
        WordDisplay { word: self, labels }
    }
}

pub(crate) fn least_rotation<T: Ord + Clone>(w: &[T]) -> Vec<T> {
    let n = w.len();
    (0..n.max(1))
        .map(|r| w[r.min(n)..].iter().chain(&w[..r.min(n)]).cloned().collect::<Vec<T>>())
        .min()
        .unwrap_or_default()
}

/// Default generator labels: `a, b, c, ...`, then `x27, x28, ...`.
pub fn default_labels(rank: usize) -> Vec<String> {
    (0..rank)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("x{}", i + 1)
            }
        })
        .collect()
}

pub struct WordDisplay<'a> {
    word: &'a FreeWord,
    labels: &'a [String],
}

impl fmt::Display for WordDisplay<'_> {
    /// Space-separated letters; inverses print as the uppercase label when
    /// the label is a single lowercase letter, otherwise as `label^-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_identity() {
            return write!(f, "1");
        }
        for (i, l) in self.word.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let fallback;
            let label = match self.labels.get(l.index()) {
                Some(s) => s.as_str(),
                None => {
                    fallback = format!("x{}", l.index() + 1);
                    &fallback
                }
            };
            if !l.is_inverse() {
                write!(f, "{label}")?;
            } else if is_single_lower(label) {
                write!(f, "{}", label.to_uppercase())?;
            } else {
                write!(f, "{label}^-1")?;
            }
        }
        Ok(())
    }
}

fn is_single_lower(s: &str) -> bool {
    let mut chars = s.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if c.is_ascii_lowercase())
}

/// Parses a word over the given labels.
///
/// Accepted forms: space-separated tokens `x`, `x^-1`, `x^3`, `X` (uppercase of
/// a single-letter label means its inverse), or a compact string like `abA`
/// when every label is a single lowercase letter. `1` and the empty string
/// are the identity.
pub fn parse_word(s: &str, labels: &[String]) -> Result<FreeWord, WordError> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(FreeWord::identity());
    }
    let tokens: Vec<&str> = s.split(|c: char| c.is_whitespace() || c == '*' || c == '.').filter(|t| !t.is_empty()).collect();
    let mut letters = Vec::new();
    for tok in tokens {
        match parse_token(tok, labels) {
            Ok(ls) => letters.extend(ls),
            Err(e) => {
                if labels.iter().all(|l| is_single_lower(l)) && !tok.contains('^') {
                    for c in tok.chars() {
                        letters.extend(parse_token(&c.to_string(), labels)?);
                    }
                } else {
                    return Err(e);
                }
            }
        }
    }
    Ok(FreeWord::from_letters(letters))
}

fn parse_token(tok: &str, labels: &[String]) -> Result<Vec<Letter>, WordError> {
    let (name, exp) = match tok.split_once('^') {
        Some((n, e)) => {
            let e: i64 = e
                .trim_matches(|c| c == '(' || c == ')')
                .parse()
                .map_err(|_| WordError::Malformed(tok.to_string()))?;
            (n, e)
        }
        None => (tok, 1),
    };
    let (index, inverted) = if let Some(i) = labels.iter().position(|l| l == name) {
        (i, false)
    } else if let Some(i) = labels
        .iter()
        .position(|l| is_single_lower(l) && l.to_uppercase() == name)
    {
        (i, true)
    } else {
        return Err(WordError::UnknownGenerator(name.to_string()));
    };
    let letter = Letter::new(index, inverted);
    let letter = if exp < 0 { letter.inv() } else { letter };
    Ok(vec![letter; exp.unsigned_abs() as usize])
}

/// Reduced words of length `1..=max_len` in `rank` generators, in depth-first
/// (prefix) order.
///
/// With `classes` set, only the canonical cyclic form of each conjugacy class
/// up to inversion is produced; subtrees that cannot contain a canonical word
/// (first letter inverted, or a letter below the first generator) are pruned.
pub struct Ball {
    rank: u32,
    max_len: usize,
    classes: bool,
    stack: Vec<Letter>,
    done: bool,
}

pub fn ball(rank: usize, max_len: usize, classes: bool) -> Ball {
    Ball {
        rank: rank as u32,
        max_len,
        classes,
        stack: Vec::new(),
        done: rank == 0 || max_len == 0,
    }
}

impl Ball {
    fn allowed(&self, depth: usize, l: Letter) -> bool {
        if depth > 0 && self.stack[depth - 1] == l.inv() {
            return false;
        }
        if self.classes {
            if depth == 0 {
                return !l.is_inverse();
            }
            return l.index() >= self.stack[0].index();
        }
        true
    }

    fn first_from(&self, depth: usize, start: u32) -> Option<Letter> {
        (start..2 * self.rank)
            .map(Letter)
            .find(|&l| self.allowed(depth, l))
    }

    /// Advances to the next word in prefix order, ignoring the class filter.
    fn step(&mut self) -> bool {
        if self.stack.is_empty() {
            match self.first_from(0, 0) {
                Some(l) => {
                    self.stack.push(l);
                    return true;
                }
                None => return false,
            }
        }
        if self.stack.len() < self.max_len {
            if let Some(l) = self.first_from(self.stack.len(), 0) {
                self.stack.push(l);
                return true;
            }
        }
        while let Some(top) = self.stack.pop() {
            if let Some(l) = self.first_from(self.stack.len(), top.0 + 1) {
                self.stack.push(l);
                return true;
            }
        }
        false
    }
}

impl Iterator for Ball {
    type Item = FreeWord;

    fn next(&mut self) -> Option<FreeWord> {
        while !self.done {
            if !self.step() {
                self.done = true;
                break;
            }
            if !self.classes {
                return Some(FreeWord(self.stack.clone()));
            }
            let w = FreeWord(self.stack.clone());
            if w.is_cyclically_reduced() && w.canonical_cyclic() == w {
                return Some(w);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn labels() -> Vec<String> {
        default_labels(3)
    }

    fn w(s: &str) -> FreeWord {
        parse_word(s, &labels()).unwrap()
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(w("a b A").display(&labels()).to_string(), "a b A");
        assert_eq!(w("abA"), w("a b A"));
        assert_eq!(w("a a^-1"), FreeWord::identity());
        assert_eq!(w("a^3"), w("a a a"));
        assert_eq!(w("b^-2"), w("B B"));
        let named = vec!["x1".to_string(), "x2".to_string()];
        let u = parse_word("x1 x2^-1", &named).unwrap();
        assert_eq!(u, FreeWord::from_signed(&[1, -2]));
        assert_eq!(u.display(&named).to_string(), "x1 x2^-1");
        assert!(matches!(
            parse_word("q", &labels()),
            Err(WordError::UnknownGenerator(_))
        ));
        assert_eq!(w("1"), FreeWord::identity());
        assert_eq!(FreeWord::identity().display(&labels()).to_string(), "1");
    }

    #[test]
    fn cyclic_reduction_and_canonical_form() {
        let (u, c) = w("a b A").cyclic_reduction();
        assert_eq!((u, c), (w("a"), w("b")));
        assert_eq!(w("b a").canonical_cyclic(), w("a b"));
        assert_eq!(w("B A").canonical_cyclic(), w("a b"));
        assert_eq!(w("a B").canonical_cyclic(), w("a B"));
        assert_eq!(w("b A").canonical_cyclic(), w("a B"));
        assert_eq!(w("A").canonical_cyclic(), w("a"));
    }

    #[test]
    fn substitution() {
        let images = vec![w("a b"), w("B")];
        assert_eq!(w("a b").substitute(&images), w("a"));
        assert_eq!(w("A").substitute(&images), w("B A"));
    }

    #[test]
    fn ball_counts() {
        let l1: Vec<_> = ball(2, 1, false).collect();
        assert_eq!(l1, vec![w("a"), w("A"), w("b"), w("B")]);
        assert_eq!(ball(2, 2, false).count(), 16);
        let rank1: HashSet<_> = ball(1, 3, false).collect();
        let expected: HashSet<_> = ["a", "A", "a a", "A A", "a a a", "A A A"]
            .iter()
            .map(|s| w(s))
            .collect();
        assert_eq!(rank1, expected);
        // 4 * 3^(k-1) reduced words of length k in rank 2.
        assert_eq!(ball(2, 5, false).count(), 4 + 12 + 36 + 108 + 324);
    }

    #[test]
    fn class_ball_matches_filtered_ball() {
        for (rank, len) in [(2, 6), (3, 4)] {
            let pruned: Vec<_> = ball(rank, len, true).collect();
            let mut brute: Vec<_> = ball(rank, len, false)
                .map(|u| u.canonical_cyclic())
                .collect::<HashSet<_>>()
                .into_iter()
                .collect();
            brute.sort();
            let mut sorted = pruned.clone();
            sorted.sort();
            assert_eq!(sorted, brute);
            assert_eq!(pruned.len(), brute.len());
        }
    }

    fn arb_word(rank: usize, len: usize) -> impl Strategy<Value = FreeWord> {
        prop::collection::vec(0..(2 * rank as u32), 0..len)
            .prop_map(|v| FreeWord::from_letters(v.into_iter().map(Letter)))
    }

    proptest! {
        #[test]
        fn group_laws(a in arb_word(3, 10), b in arb_word(3, 10), c in arb_word(3, 10)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert!(a.mul(&a.inverse()).is_identity());
            prop_assert_eq!(a.mul(&b).inverse(), b.inverse().mul(&a.inverse()));
        }

        #[test]
        fn canonical_form_is_conjugation_invariant(a in arb_word(3, 10), u in arb_word(3, 6)) {
            let conj = u.mul(&a).mul(&u.inverse());
            prop_assert_eq!(conj.canonical_cyclic(), a.canonical_cyclic());
            prop_assert_eq!(a.inverse().canonical_cyclic(), a.canonical_cyclic());
            prop_assert!(a.canonical_cyclic().is_cyclically_reduced());
        }

        #[test]
        fn display_round_trip(a in arb_word(3, 12)) {
            let l = labels();
            prop_assert_eq!(parse_word(&a.display(&l).to_string(), &l).unwrap(), a);
        }
    }
}
