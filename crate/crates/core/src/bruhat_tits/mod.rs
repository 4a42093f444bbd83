//! The Bruhat-Tits tree of SL2(Q_p).
//!
//! Vertices are homothety classes of Z_p-lattices in Q_p^2 with matrices
//! acting on column vectors; every edge has length 1. With this
//! normalization the Cartan projection `mu` and the translation length
//! `lambda` take even integer values on SL2.
//!
//! Conventions: `Z+ = { diag(a, 1/a) : val(a) <= 0 }` and its common repelling
//! end is `[0:1]`. `diag(p^-1, p)` translates the base vertex toward `[1:0]`.

mod boundary;
mod matrix;
mod vertex;

pub use boundary::{boundary_dist, BoundaryDistance, BoundaryPoint};
pub use matrix::MatSL2;
pub use vertex::{act_vertex, vertex_dist, BTVertex};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::padic::{eigenvalue_valuations, hensel_split, unit_split, val, PadicError, Prime};
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("determinant is {0}, not 1")]
    NotSl2(String),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("element lies in SL2(Z_p): zeta is undefined")]
    InK,
    #[error("element is elliptic: no fixed ends")]
    NotHyperbolic,
    #[error("[0:0] is not a point of the projective line")]
    ZeroBoundaryPoint,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// Cartan projection: `d(x0, g x0) = -2 * min val(entries)`.
pub fn mu(g: &MatSL2) -> u64 {
    (-2 * g.min_entry_valuation()).max(0) as u64
}

/// Translation length: `|val(alpha) - val(beta)| = 2 * max(0, -val(trace))`.
pub fn lambda(g: &MatSL2) -> u64 {
    let (v, w) = eigenvalue_valuations(&g.trace(), g.prime());
    (w - v) as u64
}

pub fn is_hyperbolic(g: &MatSL2) -> bool {
    lambda(g) > 0
}

/// `g = k1 * z * k2` with `k1, k2` in SL2(Z_p) and `z = diag(p^-m, p^m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartanTriple {
    pub k1: MatSL2,
    pub z: MatSL2,
    pub k2: MatSL2,
    pub m: u64,
}

impl CartanTriple {
    pub fn product(&self) -> MatSL2 {
        &(&self.k1 * &self.z) * &self.k2
    }
}

/// Smith reduction over Z_(p) realized with determinant-one integral matrices:
/// move an entry of least valuation to the top-left corner with Weyl elements,
/// then clear its row and column with unipotents.
pub fn cartan(g: &MatSL2) -> CartanTriple {
    let p = g.prime();
    let w = MatSL2::weyl(p);
    let w_inv = w.inverse();
    let id = MatSL2::identity(p);
    let vals = g.entries().map(|x| val(x, p));
    let pivot = (0..4).min_by_key(|&i| vals[i]).expect("four entries");
    // g = pre * h * post with h[0][0] the pivot.
    let (pre, h, post) = match pivot {
        0 => (id.clone(), g.clone(), id),
        1 => (id, g * &w, w_inv),
        2 => (w.clone(), &w_inv * g, id),
        _ => (w.clone(), &(&w_inv * g) * &w, w_inv),
    };
    let [a, b, c, _] = h.entries();
    let lower = MatSL2::lower(c / a, p);
    let upper = MatSL2::upper(b / a, p);
    let (v, unit) = unit_split(a, p);
    let m = (-v) as u64;
    let unit_diag = MatSL2::diag(unit, p);
    let z = MatSL2::diag(p.pow(v), p);
    CartanTriple {
        k1: &(&pre * &lower) * &unit_diag,
        z,
        k2: &upper * &post,
        m,
    }
}

/// The common repelling end of `Z+`.
pub fn z_plus_repelling_end(prime: Prime) -> BoundaryPoint {
    BoundaryPoint::new(Q::zero(), Q::one(), prime).expect("nonzero point")
}

/// `zeta_g^- = k2^-1 . [0:1]` for `g` outside SL2(Z_p).
///
/// The factor `k2` is unique up to left multiplication by matrices whose
/// upper-right entry is divisible by `p^mu(g)`, so the point is only defined
/// modulo `p^mu(g)`; the returned representative is truncated to that many
/// digits, which makes it independent of the decomposition chosen.
pub fn zeta_minus(g: &MatSL2) -> Result<BoundaryPoint, TreeError> {
    let m = mu(g);
    if m == 0 {
        return Err(TreeError::InK);
    }
    let triple = cartan(g);
    Ok(z_plus_repelling_end(g.prime())
        .act(&triple.k2.inverse())?
        .truncated(m as u32))
}

/// Attracting and repelling fixed ends of a hyperbolic element.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedEnds {
    pub plus: BoundaryPoint,
    pub minus: BoundaryPoint,
}

/// Eigenlines of `g`, known to `precision` p-adic digits. The attracting end
/// is the eigenline of the eigenvalue of negative valuation.
pub fn fixed_ends(g: &MatSL2, precision: u32) -> Result<FixedEnds, TreeError> {
    if !is_hyperbolic(g) {
        return Err(TreeError::NotHyperbolic);
    }
    if precision == 0 {
        return Err(PadicError::ZeroPrecision.into());
    }
    let p = g.prime();
    let entry_spread = (-2 * g.min_entry_valuation()).max(0) as u32;
    let mut work = precision + entry_spread + lambda(g) as u32 + 4;
    loop {
        let (alpha, beta) = hensel_split(&g.trace(), p, work)?;
        let plus = eigenline(g, &alpha.to_rational(), alpha.valuation, work, precision);
        let minus = eigenline(g, &beta.to_rational(), beta.valuation, work, precision);
        match (plus, minus) {
            (Some(plus), Some(minus)) => return Ok(FixedEnds { plus, minus }),
            _ => work *= 2,
        }
    }
}

/// Eigenline for an approximate eigenvalue `ev` with `work` significant
/// digits; `None` if the working precision cannot certify `precision` digits
/// of the normalized direction.
fn eigenline(g: &MatSL2, ev: &Q, ev_val: i64, work: u32, precision: u32) -> Option<BoundaryPoint> {
    let p = g.prime();
    let [a, b, c, d] = g.entries();
    let first = (b.clone(), ev - a);
    let second = (ev - d, c.clone());
    let min_val = |v: &(Q, Q)| val(&v.0, p).min(val(&v.1, p));
    let vec = if min_val(&first) <= min_val(&second) {
        first
    } else {
        second
    };
    let m = min_val(&vec).finite()?;
    // Absolute error in the coordinates has valuation >= ev_val + work.
    let err = ev_val + work as i64;
    if err <= m || err - m < precision as i64 {
        return None;
    }
    BoundaryPoint::with_precision(vec.0, vec.1, p, Some(precision)).ok()
}

/// `k` in SL2(Z_p): all entries have nonnegative valuation.
pub fn in_k(g: &MatSL2) -> bool {
    g.is_integral()
}

/// Whether a matrix is diagonal with `val(a) <= 0` (lies in `Z+`).
pub fn in_z_plus(g: &MatSL2) -> bool {
    let [a, b, c, _] = g.entries();
    b.is_zero() && c.is_zero() && val(a, g.prime()) <= crate::padic::Valuation::Finite(0)
}
