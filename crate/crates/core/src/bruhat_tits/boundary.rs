use std::fmt;

use num_traits::{One, Zero};

use super::{MatSL2, TreeError};
use crate::padic::{reduce_mod_pn, val, val_nonzero, Prime, Valuation};
use crate::rational::{format_rational, parse_rational, Q};

/// A point of P^1(Q_p) given by a unimodular representative `[x:y]`.
///
/// Exact points are stored as `[u:1]` with `val(u) >= 0` or `[1:u]` with
/// `val(u) > 0`, which makes equality structural. Points obtained from
/// Hensel-lifted eigenvalues carry a precision: their coordinates are only
/// known modulo `p^precision`.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    x: Q,
    y: Q,
    prime: Prime,
    precision: Option<u32>,
}

impl BoundaryPoint {
    pub fn new(x: Q, y: Q, prime: Prime) -> Result<Self, TreeError> {
        Self::with_precision(x, y, prime, None)
    }

    pub(crate) fn with_precision(
        x: Q,
        y: Q,
        prime: Prime,
        precision: Option<u32>,
    ) -> Result<Self, TreeError> {
        if x.is_zero() && y.is_zero() {
            return Err(TreeError::ZeroBoundaryPoint);
        }
        let vx = val(&x, prime);
        let vy = val(&y, prime);
        let (x, y) = if vy <= vx {
            (x / &y, Q::one())
        } else {
            (Q::one(), y / &x)
        };
        Ok(BoundaryPoint {
            x,
            y,
            prime,
            precision,
        })
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn coords(&self) -> (&Q, &Q) {
        (&self.x, &self.y)
    }

    pub fn precision(&self) -> Option<u32> {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.precision.is_none()
    }

    /// Representative of the ball `r >= digits` around this point: the free
    /// coordinate reduced modulo `p^digits`.
    pub fn truncated(&self, digits: u32) -> BoundaryPoint {
        let n = digits as i64;
        let (x, y) = if self.y.is_one() {
            (reduce_mod_pn(&self.x, self.prime, n), Q::one())
        } else {
            (Q::one(), reduce_mod_pn(&self.y, self.prime, n))
        };
        BoundaryPoint {
            x,
            y,
            prime: self.prime,
            precision: self.precision,
        }
    }

    /// `g . [x:y] = [ax + by : cx + dy]`.
    pub fn act(&self, g: &MatSL2) -> Result<BoundaryPoint, TreeError> {
        if g.prime() != self.prime {
            return Err(TreeError::PrimeMismatch(g.prime().get(), self.prime.get()));
        }
        let [a, b, c, d] = g.entries();
        let nx = a * &self.x + b * &self.y;
        let ny = c * &self.x + d * &self.y;
        // K preserves the precision of a unimodular vector; other matrices can
        // lose up to -2 * min-valuation digits.
        let loss = (-2 * g.min_entry_valuation()).max(0) as u32;
        let precision = self.precision.map(|pr| pr.saturating_sub(loss));
        BoundaryPoint::with_precision(nx, ny, self.prime, precision)
    }

    /// Parses `[x:y]`.
    pub fn parse(s: &str, prime: Prime) -> Result<Self, TreeError> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| TreeError::Parse(format!("expected [x:y], got `{s}`")))?;
        let (x, y) = inner
            .split_once(':')
            .ok_or_else(|| TreeError::Parse(format!("expected [x:y], got `{s}`")))?;
        let x = parse_rational(x).map_err(|e| TreeError::Parse(e.to_string()))?;
        let y = parse_rational(y).map_err(|e| TreeError::Parse(e.to_string()))?;
        BoundaryPoint::new(x, y, prime)
    }
}

impl PartialEq for BoundaryPoint {
    /// Exact points compare by cross-multiplication; if either side is an
    /// approximation, agreement to the smaller precision.
    fn eq(&self, other: &Self) -> bool {
        if self.prime != other.prime {
            return false;
        }
        let det = &self.x * &other.y - &self.y * &other.x;
        match self.precision.into_iter().chain(other.precision).min() {
            None => det.is_zero(),
            Some(pr) => val(&det, self.prime) >= Valuation::Finite(pr as i64),
        }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}]", format_rational(&self.x), format_rational(&self.y))?;
        if let Some(pr) = self.precision {
            write!(f, " + O({}^{})", self.prime, pr)?;
        }
        Ok(())
    }
}

/// The Gromov product `r` of two ends seen from the base vertex; the visual
/// distance is `p^(-r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryDistance {
    Exact(i64),
    Infinite,
    /// One of the points is an approximation and agrees with the other to its
    /// full precision: only a lower bound on `r` is known.
    AtLeast(i64),
}

impl BoundaryDistance {
    /// Lower bound on `r` (exact when not `AtLeast`); `None` for identical ends.
    pub fn r_lower_bound(self) -> Option<i64> {
        match self {
            BoundaryDistance::Exact(r) | BoundaryDistance::AtLeast(r) => Some(r),
            BoundaryDistance::Infinite => None,
        }
    }

    /// Whether `r >= bound` is certified.
    pub fn r_at_least(self, bound: i64) -> bool {
        self.r_lower_bound().is_none_or(|r| r >= bound)
    }

    /// Whether `r <= bound` is certified.
    pub fn r_at_most(self, bound: i64) -> bool {
        matches!(self, BoundaryDistance::Exact(r) if r <= bound)
    }

    /// `p^(-r)` when known exactly.
    pub fn value(self, prime: Prime) -> Option<Q> {
        match self {
            BoundaryDistance::Exact(r) => Some(prime.pow(-r)),
            BoundaryDistance::Infinite => Some(Q::zero()),
            BoundaryDistance::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for BoundaryDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryDistance::Exact(r) => write!(f, "r = {r}"),
            BoundaryDistance::Infinite => write!(f, "r = +inf"),
            BoundaryDistance::AtLeast(r) => write!(f, "r >= {r}"),
        }
    }
}

/// `r = val(x1 y2 - x2 y1)` for unimodular representatives.
pub fn boundary_dist(xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<BoundaryDistance, TreeError> {
    if xi.prime != eta.prime {
        return Err(TreeError::PrimeMismatch(xi.prime.get(), eta.prime.get()));
    }
    let det = &xi.x * &eta.y - &xi.y * &eta.x;
    let cap = xi.precision.into_iter().chain(eta.precision).min();
    Ok(match (det.is_zero(), cap) {
        (true, None) => BoundaryDistance::Infinite,
        (true, Some(pr)) => BoundaryDistance::AtLeast(pr as i64),
        (false, None) => BoundaryDistance::Exact(val_nonzero(&det, xi.prime)),
        (false, Some(pr)) => {
            let r = val_nonzero(&det, xi.prime);
            if r >= pr as i64 {
                BoundaryDistance::AtLeast(pr as i64)
            } else {
                BoundaryDistance::Exact(r)
            }
        }
    })
}
