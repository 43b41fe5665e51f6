//! Monomial classification against truncated shadows of the ideals
//! `W(m)`, `X W(m)` and `p^M`.
//!
//! Congruence certificates and the degree-two reduction discard terms that
//! lie in one of these ideals. At truncation the ideals can only be seen
//! monomial by monomial, so the rules live in an overridable policy object
//! and every discard is reported.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::padic::{binomial_exact, PadicContext, RationalCoefficient};

/// Why a monomial was discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShadowClass {
    /// Coefficient divisible by `p^M`.
    PowerOfP,
    /// `X^i Y^j` with `i, j >= 0`, not both zero.
    Maximal,
    /// Pure negative `Y`-power with integral coefficient.
    NegativePart,
    /// `X^i Y^j` with `i >= 1`, `j < 0`, dominated by positive `X`-valuation.
    TwistedMaximal,
}

/// Classifies monomials `c X^i Y^j`.
pub trait ShadowPolicy: Send + Sync {
    /// The class of the monomial, or `None` if it fits no ideal.
    fn classify(&self, ctx: &PadicContext, c: &RationalCoefficient, i: i32, j: i32) -> Option<ShadowClass>;
}

/// The default monomial policy.
///
/// `E = e p / (p - 1)` is the valuation of `X` measured in units of the
/// valuation of `Y`. A term `c X^i Y^j` with `i >= 1` and `j < 0` is kept
/// in the shadow when, after writing `X^i` through `(1 + X) - 1`, every
/// piece either has coefficient valuation at least `M` or positive weight
/// `(i - s) E + j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialShadow {
    /// Target precision `M`.
    pub m: i32,
    /// Ramification index `e`.
    pub e: i64,
    /// Whether pure negative `Y`-parts are discarded.
    pub allow_negative_part: bool,
    /// Whether a factor `X` is required (shadow of `X W(m)`).
    pub require_x: bool,
}

impl MonomialShadow {
    /// Shadow of `W(m) + p^M` with the negative-part rule.
    pub fn degree_two(m: i32, e: i64) -> Self {
        MonomialShadow { m, e, allow_negative_part: true, require_x: false }
    }

    /// Shadow of `X W(m) + p^M`.
    pub fn x_maximal(m: i32, e: i64) -> Self {
        MonomialShadow { m, e, allow_negative_part: false, require_x: true }
    }
}

impl ShadowPolicy for MonomialShadow {
    fn classify(&self, ctx: &PadicContext, c: &RationalCoefficient, i: i32, j: i32) -> Option<ShadowClass> {
        let Some(v) = c.valuation() else {
            return Some(ShadowClass::PowerOfP);
        };
        if v >= self.m {
            return Some(ShadowClass::PowerOfP);
        }
        if v < 0 {
            return None;
        }
        if self.require_x && i < 1 {
            return None;
        }
        if i >= 0 && j >= 0 && (i, j) != (0, 0) {
            return Some(ShadowClass::Maximal);
        }
        if i == 0 && j < 0 {
            return self.allow_negative_part.then_some(ShadowClass::NegativePart);
        }
        if i >= 1 && j < 0 {
            let p = ctx.p() as i64;
            // weights are scaled by (p - 1)
            let big_e = self.e * p;
            let ok = (0..=i).all(|s| {
                let b = binomial_exact(&BigInt::from(i), s as u64);
                let vb = crate::padic::vp_bigint(&b, ctx.p());
                v as i64 + s as i64 + vb as i64 >= self.m as i64 || (i - s) as i64 * big_e + j as i64 * (p - 1) > 0
            });
            return ok.then_some(ShadowClass::TwistedMaximal);
        }
        None
    }
}

/// Shadow of `XY W[[X, Y]] + p^N`: monomials divisible by `XY` with integral
/// coefficient, or coefficients divisible by `p^N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XyShadow {
    pub n: i32,
}

impl ShadowPolicy for XyShadow {
    fn classify(&self, _ctx: &PadicContext, c: &RationalCoefficient, i: i32, j: i32) -> Option<ShadowClass> {
        match c.valuation() {
            None => Some(ShadowClass::PowerOfP),
            Some(v) if v >= self.n => Some(ShadowClass::PowerOfP),
            Some(v) if v >= 0 && i >= 1 && j >= 1 => Some(ShadowClass::Maximal),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_classes() {
        let ctx = PadicContext::new(3, 1, 4).unwrap();
        let pol = MonomialShadow::degree_two(1, 2);
        let one = ctx.q_one();
        assert_eq!(pol.classify(&ctx, &ctx.q_from_i64(3), 0, 0), Some(ShadowClass::PowerOfP));
        assert_eq!(pol.classify(&ctx, &one, 0, 0), None);
        assert_eq!(pol.classify(&ctx, &one, 1, 2), Some(ShadowClass::Maximal));
        assert_eq!(pol.classify(&ctx, &one, 0, -2), Some(ShadowClass::NegativePart));
        // E = 3: X Y^-2 has weight 1 > 0 but the s = 1 piece has weight -2; v + 1 >= 1 holds
        assert_eq!(pol.classify(&ctx, &one, 1, -2), Some(ShadowClass::TwistedMaximal));
        let strict = MonomialShadow::x_maximal(1, 2);
        assert_eq!(strict.classify(&ctx, &one, 0, 2), None);
        assert_eq!(strict.classify(&ctx, &one, 2, 0), Some(ShadowClass::Maximal));
        let xy = XyShadow { n: 2 };
        assert_eq!(xy.classify(&ctx, &one, 1, 1), Some(ShadowClass::Maximal));
        assert_eq!(xy.classify(&ctx, &one, 1, 0), None);
        assert_eq!(xy.classify(&ctx, &ctx.q_from_i64(9), 0, 0), Some(ShadowClass::PowerOfP));
    }
}
