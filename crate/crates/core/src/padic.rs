//! p-adic valuations of exact rationals and Hensel lifting of the roots of
//! `x^2 - t x + 1`, the characteristic polynomial of an element of SL2.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("{0} is not a prime")]
    InvalidPrime(u64),
    #[error("trace {0} has nonnegative valuation: the roots need not lie in Q_p")]
    NotHyperbolic(String),
    #[error("precision must be positive")]
    ZeroPrecision,
}

/// A rational prime, checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, PadicError> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(PadicError::InvalidPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^k` as a rational; `k` may be negative.
    pub fn pow(self, k: i64) -> Q {
        let base = self.big().pow(k.unsigned_abs() as u32);
        if k >= 0 {
            Q::from_integer(base)
        } else {
            Q::new(BigInt::one(), base)
        }
    }

    /// `p^k` as an integer, `k >= 0`.
    pub fn pow_int(self, k: u32) -> BigInt {
        self.big().pow(k)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// An additive valuation: an integer, or `+infinity` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

/// Exponent of `p` in a nonzero integer, together with the cofactor.
fn split_int(n: &BigInt, p: &BigInt) -> (i64, BigInt) {
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (quo, rem) = n.div_rem(p);
        if !rem.is_zero() {
            return (v, n);
        }
        n = quo;
        v += 1;
    }
}

pub fn val_int(n: &BigInt, p: Prime) -> Valuation {
    if n.is_zero() {
        Valuation::Infinite
    } else {
        Valuation::Finite(split_int(n, &p.big()).0)
    }
}

/// The p-adic valuation, normalized so that `val(p) = 1`.
pub fn val(x: &Q, p: Prime) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let pb = p.big();
    let (vn, _) = split_int(x.numer(), &pb);
    let (vd, _) = split_int(x.denom(), &pb);
    Valuation::Finite(vn - vd)
}

/// Finite valuation of a value known to be nonzero.
pub(crate) fn val_nonzero(x: &Q, p: Prime) -> i64 {
    val(x, p).finite().expect("valuation of zero")
}

/// Writes a nonzero `x` as `p^v * u` and returns `(v, u)` with `u` a p-adic unit.
pub fn unit_split(x: &Q, p: Prime) -> (i64, Q) {
    let v = val_nonzero(x, p);
    (v, x / p.pow(v))
}

/// Residue of a p-adic unit (a rational with numerator and denominator prime
/// to `p`) modulo `p^k`, as an integer in `[0, p^k)`.
pub fn unit_residue(u: &Q, p: Prime, k: u32) -> BigInt {
    let m = p.pow_int(k);
    let inv = mod_inverse(u.denom(), &m).expect("denominator of a unit is invertible");
    (u.numer() * inv).mod_floor(&m)
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let g = a.extended_gcd(m);
    if !g.gcd.is_one() && g.gcd != -BigInt::one() {
        return None;
    }
    let x = if g.gcd.is_negative() { -g.x } else { g.x };
    Some(x.mod_floor(m))
}

/// Canonical representative of `u` modulo `p^n Z_(p)`: the truncated p-adic
/// expansion `sum_{k < n} d_k p^k` with digits in `[0, p)`.
pub fn reduce_mod_pn(u: &Q, p: Prime, n: i64) -> Q {
    if u.is_zero() || val_nonzero(u, p) >= n {
        return Q::zero();
    }
    let pb = p.big();
    let (dv, dcof) = split_int(u.denom(), &pb);
    // u = a / (p^dv * dcof), want c in [0, p^(n+dv)) with c = a / dcof mod p^(n+dv).
    let e = n + dv;
    if e <= 0 {
        return Q::zero();
    }
    let m = p.pow_int(e as u32);
    let inv = mod_inverse(&dcof, &m).expect("cofactor prime to p");
    let c = (u.numer() * inv).mod_floor(&m);
    Q::new(c, p.pow_int(dv as u32))
}

/// An exact rational tagged with its prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicRational {
    value: Q,
    prime: Prime,
}

impl PAdicRational {
    pub fn new(value: Q, prime: Prime) -> Self {
        PAdicRational { value, prime }
    }

    pub fn value(&self) -> &Q {
        &self.value
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn valuation(&self) -> Valuation {
        val(&self.value, self.prime)
    }

    /// `|x|_p = p^(-val x)`, zero for zero.
    pub fn abs_p(&self) -> Q {
        match self.valuation() {
            Valuation::Finite(v) => self.prime.pow(-v),
            Valuation::Infinite => Q::zero(),
        }
    }
}

impl fmt::Display for PAdicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (p={})", format_rational(&self.value), self.prime)
    }
}

/// Valuations `(v, -v)` of the two roots of `x^2 - t x + 1`, read off the
/// Newton polygon: distinct slopes exactly when `val(t) < 0`.
pub fn eigenvalue_valuations(trace: &Q, p: Prime) -> (i64, i64) {
    match val(trace, p) {
        Valuation::Finite(v) if v < 0 => (v, -v),
        _ => (0, 0),
    }
}

/// A p-adic number known to `precision` significant digits:
/// `p^valuation * unit_residue (mod p^(valuation + precision))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicApprox {
    pub unit_residue: BigInt,
    pub valuation: i64,
    pub precision: u32,
    pub prime: Prime,
}

impl PAdicApprox {
    /// The rational `p^valuation * unit_residue`.
    pub fn to_rational(&self) -> Q {
        Q::from_integer(self.unit_residue.clone()) * self.prime.pow(self.valuation)
    }

    /// Whether an exact rational agrees with this approximation to its precision.
    pub fn agrees_with(&self, x: &Q) -> bool {
        let diff = x - self.to_rational();
        val(&diff, self.prime) >= Valuation::Finite(self.valuation + self.precision as i64)
    }
}

impl fmt::Display for PAdicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}^{} * {} + O({}^{})",
            self.prime,
            self.valuation,
            self.unit_residue,
            self.prime,
            self.valuation + self.precision as i64
        )
    }
}

/// Truncates a nonzero `x` to `digits` significant p-adic digits.
pub(crate) fn truncate(x: &Q, p: Prime, digits: u32) -> Q {
    let (v, u) = unit_split(x, p);
    Q::from_integer(unit_residue(&u, p, digits)) * p.pow(v)
}

/// Splits `x^2 - t x + 1` over Q_p when `val(t) < 0`.
///
/// Returns `(alpha, beta)` with `val(alpha) = val(t) < 0 < val(beta)`. The root
/// of positive valuation is found by Newton iteration started at `1/t`; the
/// other is its inverse modulo `p^precision`.
pub fn hensel_split(
    trace: &Q,
    p: Prime,
    precision: u32,
) -> Result<(PAdicApprox, PAdicApprox), PadicError> {
    if precision == 0 {
        return Err(PadicError::ZeroPrecision);
    }
    let vt = match val(trace, p) {
        Valuation::Finite(v) if v < 0 => v,
        _ => return Err(PadicError::NotHyperbolic(format_rational(trace))),
    };
    let v = -vt;
    let f = |x: &Q| x * x - trace * x + Q::one();
    let two = Q::from_integer(BigInt::from(2));
    // Working precision: a few guard digits beyond what the residuals need.
    let work = precision + 2 * v as u32 + 4;
    let target = Valuation::Finite(precision as i64 + v + 2);

    let mut beta = truncate(&(Q::one() / trace), p, work);
    for _ in 0..128 {
        let fx = f(&beta);
        if val(&fx, p) >= target {
            break;
        }
        let step = fx / (&two * &beta - trace);
        beta = truncate(&(&beta - step), p, work);
    }

    let (vb, ub) = unit_split(&beta, p);
    debug_assert_eq!(vb, v);
    let beta_res = unit_residue(&ub, p, precision);
    let modulus = p.pow_int(precision);
    let alpha_res = mod_inverse(&beta_res, &modulus).expect("unit residue is invertible");
    Ok((
        PAdicApprox {
            unit_residue: alpha_res,
            valuation: -v,
            precision,
            prime: p,
        },
        PAdicApprox {
            unit_residue: beta_res,
            valuation: v,
            precision,
            prime: p,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn valuations() {
        assert_eq!(val(&q(8), p(2)), Valuation::Finite(3));
        assert_eq!(val(&qr(3, 4), p(2)), Valuation::Finite(-2));
        assert_eq!(val(&q(0), p(5)), Valuation::Infinite);
        assert_eq!(val(&qr(-50, 3), p(5)), Valuation::Finite(2));
        assert_eq!(Prime::new(4), Err(PadicError::InvalidPrime(4)));
        assert_eq!(Prime::new(1), Err(PadicError::InvalidPrime(1)));
        assert!(Prime::new(97).is_ok());
    }

    #[test]
    fn infinite_valuation_sorts_last() {
        assert!(Valuation::Finite(1_000_000) < Valuation::Infinite);
        assert!(Valuation::Finite(-3) < Valuation::Finite(2));
    }

    #[test]
    fn newton_polygon_slopes() {
        // x^2 - (5/2)x + 1 = (x - 2)(x - 1/2)
        assert_eq!(eigenvalue_valuations(&qr(5, 2), p(2)), (-1, 1));
        assert_eq!(eigenvalue_valuations(&q(2), p(2)), (0, 0));
        // x^2 - (17/4)x + 1 = (x - 4)(x - 1/4)
        assert_eq!(eigenvalue_valuations(&qr(17, 4), p(2)), (-2, 2));
        assert_eq!(eigenvalue_valuations(&q(0), p(3)), (0, 0));
    }

    #[test]
    fn hensel_recovers_rational_roots() {
        let (a, b) = hensel_split(&qr(5, 2), p(2), 8).unwrap();
        assert_eq!(a.to_rational(), qr(1, 2));
        assert_eq!(b.to_rational(), q(2));
        assert!(a.valuation < b.valuation);
    }

    #[test]
    fn hensel_residuals_mod_3_power() {
        let t = qr(10, 3);
        let (a, b) = hensel_split(&t, p(3), 6).unwrap();
        let (a, b) = (a.to_rational(), b.to_rational());
        let sum_err = &a + &b - &t;
        let prod_err = &a * &b - q(1);
        assert!(val(&sum_err, p(3)) >= Valuation::Finite(6 - 1));
        assert!(val(&prod_err, p(3)) >= Valuation::Finite(6));
        // 10/3 = 3 + 1/3: the exact roots are 3 and 1/3.
        assert_eq!(a, qr(1, 3));
        assert_eq!(b, q(3));
    }

    #[test]
    fn hensel_irrational_root() {
        // x^2 - (1/5)x + 1 has no rational root; check residuals only.
        let t = qr(1, 5);
        for prec in [1u32, 4, 12] {
            let (a, b) = hensel_split(&t, p(5), prec).unwrap();
            let (ra, rb) = (a.to_rational(), b.to_rational());
            assert!(val(&(&ra + &rb - &t), p(5)) >= Valuation::Finite(prec as i64 + a.valuation));
            assert!(val(&(&ra * &rb - q(1)), p(5)) >= Valuation::Finite(prec as i64));
        }
    }

    #[test]
    fn hensel_rejects_balanced_slopes() {
        assert!(matches!(
            hensel_split(&q(1), p(2), 4),
            Err(PadicError::NotHyperbolic(_))
        ));
    }

    #[test]
    fn canonical_reduction() {
        assert_eq!(reduce_mod_pn(&q(5), p(2), 2), q(1));
        assert_eq!(reduce_mod_pn(&q(-1), p(2), 3), q(7));
        assert_eq!(reduce_mod_pn(&qr(1, 3), p(2), 2), q(3)); // 3 * 3 = 9 = 1 mod 4
        assert_eq!(reduce_mod_pn(&qr(3, 4), p(2), 0), qr(3, 4));
        assert_eq!(reduce_mod_pn(&qr(3, 4), p(2), -1), qr(1, 4));
        assert_eq!(reduce_mod_pn(&q(7), p(2), -2), q(0));
        for (u, n) in [(qr(7, 12), 3), (qr(-5, 8), 1), (qr(22, 7), 4)] {
            let r = reduce_mod_pn(&u, p(2), n);
            assert!(val(&(&u - &r), p(2)) >= Valuation::Finite(n));
        }
    }

    use proptest::prelude::*;

    fn small_rational() -> impl Strategy<Value = Q> {
        (-2000i64..2000, 1i64..2000).prop_map(|(n, d)| qr(n, d))
    }

    proptest! {
        #[test]
        fn valuation_is_multiplicative_and_ultrametric(x in small_rational(), y in small_rational(), pi in 0usize..3) {
            let pr = p([2, 3, 5][pi]);
            let (vx, vy) = (val(&x, pr), val(&y, pr));
            let vxy = val(&(&x * &y), pr);
            match (vx, vy) {
                (Valuation::Finite(a), Valuation::Finite(b)) => prop_assert_eq!(vxy, Valuation::Finite(a + b)),
                _ => prop_assert_eq!(vxy, Valuation::Infinite),
            }
            let vs = val(&(&x + &y), pr);
            prop_assert!(vs >= vx.min(vy));
            if vx != vy {
                prop_assert_eq!(vs, vx.min(vy));
            }
        }

        #[test]
        fn slopes_sum_to_zero(t in small_rational(), pi in 0usize..3) {
            let (a, b) = eigenvalue_valuations(&t, p([2, 3, 5][pi]));
            prop_assert_eq!(a + b, 0);
            prop_assert!(a <= 0);
        }

        #[test]
        fn hensel_residual_bounds(n in -500i64..500, k in 1u32..4, prec in 1u32..16, pi in 0usize..3) {
            let pr = p([2, 3, 5][pi]);
            let d = pr.pow_int(k);
            let t = Q::new(BigInt::from(n) * pr.big() + 1, d);
            let (a, b) = hensel_split(&t, pr, prec).unwrap();
            let (ra, rb) = (a.to_rational(), b.to_rational());
            prop_assert!(a.valuation < b.valuation);
            prop_assert!(val(&(&ra + &rb - &t), pr) >= Valuation::Finite(prec as i64 + a.valuation));
            prop_assert!(val(&(&ra * &rb - Q::one()), pr) >= Valuation::Finite(prec as i64));
        }
    }
}
