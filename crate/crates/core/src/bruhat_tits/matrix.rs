use std::fmt;

use num_traits::{One, Zero};

use super::TreeError;
use crate::padic::{val, Prime, Valuation};
use crate::rational::{format_rational, parse_rational, Q};

/// An element of SL2(Q) regarded inside SL2(Q_p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatSL2 {
    a: Q,
    b: Q,
    c: Q,
    d: Q,
    prime: Prime,
}

impl MatSL2 {
    pub fn new(a: Q, b: Q, c: Q, d: Q, prime: Prime) -> Result<Self, TreeError> {
        let det = &a * &d - &b * &c;
        if !det.is_one() {
            return Err(TreeError::NotSl2(format_rational(&det)));
        }
        Ok(MatSL2 { a, b, c, d, prime })
    }

    pub(crate) fn new_unchecked(a: Q, b: Q, c: Q, d: Q, prime: Prime) -> Self {
        debug_assert!((&a * &d - &b * &c).is_one());
        MatSL2 { a, b, c, d, prime }
    }

    pub fn identity(prime: Prime) -> Self {
        Self::new_unchecked(Q::one(), Q::zero(), Q::zero(), Q::one(), prime)
    }

    /// `diag(x, 1/x)`, `x != 0`.
    pub fn diag(x: Q, prime: Prime) -> Self {
        let inv = Q::one() / &x;
        Self::new_unchecked(x, Q::zero(), Q::zero(), inv, prime)
    }

    /// `[[1, x], [0, 1]]`
    pub fn upper(x: Q, prime: Prime) -> Self {
        Self::new_unchecked(Q::one(), x, Q::zero(), Q::one(), prime)
    }

    /// `[[1, 0], [x, 1]]`
    pub fn lower(x: Q, prime: Prime) -> Self {
        Self::new_unchecked(Q::one(), Q::zero(), x, Q::one(), prime)
    }

    /// `[[0, -1], [1, 0]]`, the Weyl element.
    pub fn weyl(prime: Prime) -> Self {
        Self::new_unchecked(Q::zero(), -Q::one(), Q::one(), Q::zero(), prime)
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn entries(&self) -> [&Q; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn trace(&self) -> Q {
        &self.a + &self.d
    }

    fn check_prime(&self, other: &MatSL2) -> Result<(), TreeError> {
        if self.prime != other.prime {
            return Err(TreeError::PrimeMismatch(self.prime.get(), other.prime.get()));
        }
        Ok(())
    }

    pub fn mul(&self, o: &MatSL2) -> Result<MatSL2, TreeError> {
        self.check_prime(o)?;
        Ok(self * o)
    }

    pub fn inverse(&self) -> MatSL2 {
        Self::new_unchecked(
            self.d.clone(),
            -&self.b,
            -&self.c,
            self.a.clone(),
            self.prime,
        )
    }

    /// `g^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> MatSL2 {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = MatSL2::identity(self.prime);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        acc
    }

    /// Minimum valuation over the entries (never `+inf` since det = 1).
    pub fn min_entry_valuation(&self) -> i64 {
        self.entries()
            .iter()
            .map(|x| val(x, self.prime))
            .min()
            .and_then(Valuation::finite)
            .expect("an SL2 matrix has a nonzero entry")
    }

    /// Whether every entry lies in Z_(p), i.e. the matrix is in SL2(Z_p).
    pub fn is_integral(&self) -> bool {
        self.min_entry_valuation() >= 0
    }

    /// Parses `[[a,b],[c,d]]` with rational entries.
    pub fn parse(s: &str, prime: Prime) -> Result<Self, TreeError> {
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = cleaned
            .strip_prefix("[[")
            .and_then(|r| r.strip_suffix("]]"))
            .ok_or_else(|| TreeError::Parse(format!("expected [[a,b],[c,d]], got `{s}`")))?;
        let rows: Vec<&str> = inner.split("],[").collect();
        if rows.len() != 2 {
            return Err(TreeError::Parse(format!("expected two rows in `{s}`")));
        }
        let mut vals = Vec::with_capacity(4);
        for row in rows {
            let cells: Vec<&str> = row.split(',').collect();
            if cells.len() != 2 {
                return Err(TreeError::Parse(format!("expected two entries per row in `{s}`")));
            }
            for cell in cells {
                vals.push(parse_rational(cell).map_err(|e| TreeError::Parse(e.to_string()))?);
            }
        }
        let [a, b, c, d]: [Q; 4] = vals.try_into().expect("four entries");
        MatSL2::new(a, b, c, d, prime)
    }
}

impl std::ops::Mul for &MatSL2 {
    type Output = MatSL2;

    /// Panics on a prime mismatch; use [`MatSL2::mul`] for a checked product.
    fn mul(self, o: &MatSL2) -> MatSL2 {
        assert_eq!(self.prime, o.prime, "product of matrices over different primes");
        MatSL2::new_unchecked(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
            self.prime,
        )
    }
}

impl fmt::Display for MatSL2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{},{}],[{},{}]]",
            format_rational(&self.a),
            format_rational(&self.b),
            format_rational(&self.c),
            format_rational(&self.d)
        )
    }
}

/// A 2x2 matrix over Q with no determinant constraint; lattice bases and
/// basis changes between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Mat2 {
    pub m: [[Q; 2]; 2],
}

impl Mat2 {
    pub fn new(a: Q, b: Q, c: Q, d: Q) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn from_sl2(g: &MatSL2) -> Self {
        Mat2::new(g.a.clone(), g.b.clone(), g.c.clone(), g.d.clone())
    }

    pub fn det(&self) -> Q {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let m = &self.m;
        let n = &o.m;
        Mat2::new(
            &m[0][0] * &n[0][0] + &m[0][1] * &n[1][0],
            &m[0][0] * &n[0][1] + &m[0][1] * &n[1][1],
            &m[1][0] * &n[0][0] + &m[1][1] * &n[1][0],
            &m[1][0] * &n[0][1] + &m[1][1] * &n[1][1],
        )
    }

    pub fn inverse(&self) -> Mat2 {
        let det = self.det();
        let m = &self.m;
        Mat2::new(
            &m[1][1] / &det,
            -&m[0][1] / &det,
            -&m[1][0] / &det,
            &m[0][0] / &det,
        )
    }

    pub fn min_valuation(&self, p: Prime) -> Valuation {
        self.m
            .iter()
            .flatten()
            .map(|x| val(x, p))
            .min()
            .expect("four entries")
    }
}
