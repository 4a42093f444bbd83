use std::fmt;

use num_traits::{One, Zero};

use super::matrix::Mat2;
use super::{MatSL2, TreeError};
use crate::padic::{reduce_mod_pn, unit_split, val, val_nonzero, Prime};
use crate::rational::{format_rational, parse_rational, Q};

/// A vertex of the Bruhat-Tits tree of SL2(Q_p): the homothety class of the
/// lattice spanned by the columns `(p^n, 0)` and `(u, 1)`.
///
/// `u` is taken modulo `p^n Z_(p)` and stored as its truncated p-adic
/// expansion, so `(level, translate)` is a normal form. The base vertex `x0`
/// (the class of `Z_p^2`) is `(0, 0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BTVertex {
    level: i64,
    translate: Q,
    prime: Prime,
}

impl BTVertex {
    pub fn base(prime: Prime) -> Self {
        BTVertex {
            level: 0,
            translate: Q::zero(),
            prime,
        }
    }

    pub fn new(level: i64, translate: Q, prime: Prime) -> Self {
        let translate = reduce_mod_pn(&translate, prime, level);
        BTVertex {
            level,
            translate,
            prime,
        }
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn translate(&self) -> &Q {
        &self.translate
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// Type of the vertex in the bipartition of the tree (level mod 2).
    pub fn parity(&self) -> u8 {
        self.level.rem_euclid(2) as u8
    }

    pub(crate) fn basis(&self) -> Mat2 {
        Mat2::new(
            self.prime.pow(self.level),
            self.translate.clone(),
            Q::zero(),
            Q::one(),
        )
    }

    /// Normal form of the class of the lattice spanned by the columns of an
    /// invertible matrix.
    pub fn from_basis(m: &[[Q; 2]; 2], prime: Prime) -> Self {
        Self::from_mat(&Mat2 { m: m.clone() }, prime)
    }

    pub(crate) fn from_mat(m: &Mat2, prime: Prime) -> Self {
        let [[m00, m01], [m10, m11]] = m.m.clone();
        // Put the bottom-row entry of least valuation in the second column.
        let (c1, c2) = if val(&m10, prime) < val(&m11, prime) {
            ((m01, m11), (m00, m10))
        } else {
            ((m00, m10), (m01, m11))
        };
        assert!(!c2.1.is_zero(), "singular lattice basis");
        let t = &c1.1 / &c2.1;
        let x = &c1.0 - &t * &c2.0;
        let (y, z) = c2;
        let x = x / &z;
        let y = y / &z;
        let (n, _) = unit_split(&x, prime);
        BTVertex::new(n, y, prime)
    }

    /// Parses `(n; u)` or `(n; u mod p^n)`.
    pub fn parse(s: &str, prime: Prime) -> Result<Self, TreeError> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| TreeError::Parse(format!("expected (n; u), got `{s}`")))?;
        let (n, u) = inner
            .split_once(';')
            .ok_or_else(|| TreeError::Parse(format!("expected (n; u), got `{s}`")))?;
        let n: i64 = n
            .trim()
            .parse()
            .map_err(|_| TreeError::Parse(format!("bad level in `{s}`")))?;
        let u = u.split("mod").next().unwrap_or("");
        let u = parse_rational(u).map_err(|e| TreeError::Parse(e.to_string()))?;
        Ok(BTVertex::new(n, u, prime))
    }

    /// `g . v`.
    pub fn act(&self, g: &MatSL2) -> Result<BTVertex, TreeError> {
        if g.prime() != self.prime {
            return Err(TreeError::PrimeMismatch(g.prime().get(), self.prime.get()));
        }
        Ok(Self::from_mat(&Mat2::from_sl2(g).mul(&self.basis()), self.prime))
    }
}

impl fmt::Display for BTVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}; {} mod {}^{})",
            self.level,
            format_rational(&self.translate),
            self.prime,
            self.level
        )
    }
}

pub fn act_vertex(g: &MatSL2, v: &BTVertex) -> Result<BTVertex, TreeError> {
    v.act(g)
}

/// Tree distance: `|a - b|` for the elementary divisors `p^a, p^b` of the
/// basis change between the two lattices, i.e. `val(det) - 2 * min val`.
pub fn vertex_dist(v: &BTVertex, w: &BTVertex) -> Result<u64, TreeError> {
    if v.prime != w.prime {
        return Err(TreeError::PrimeMismatch(v.prime.get(), w.prime.get()));
    }
    let change = v.basis().inverse().mul(&w.basis());
    let det_val = val_nonzero(&change.det(), v.prime);
    let min_val = change
        .min_valuation(v.prime)
        .finite()
        .expect("invertible basis change");
    Ok((det_val - 2 * min_val) as u64)
}
