//! Cup products and the reduction of degree-two classes to `Tr(w)`.

use num_bigint::BigInt;
use serde::Serialize;

use super::{binom_coeff, HerrModule, HerrTriple};
use crate::error::{Error, Result};
use crate::padic::RationalCoefficient;
use crate::series::{TruncatedSeries, VarKind};
use crate::shadow::{ShadowClass, ShadowPolicy};

impl HerrModule {
    fn same_ring(&self, other: &HerrModule) -> Result<()> {
        if **self.ring() != **other.ring() {
            return Err(Error::SpecMismatch("cup factors live in different rings".into()));
        }
        Ok(())
    }

    /// `(τ - 1)^k s` for `k = 0, 1, ...` until it vanishes.
    fn tau_minus_one_powers(&self, s: &TruncatedSeries) -> Result<Vec<TruncatedSeries>> {
        let mut out = Vec::new();
        let mut t = s.clone();
        while !t.is_empty() {
            if out.len() as i32 > self.nilpotency_bound() + 1 {
                return Err(Error::TruncationExhausted("tau - 1 is not nilpotent within the caps".into()));
            }
            let next = self.tau(&t)?.sub(&t)?;
            out.push(t);
            t = next;
        }
        Ok(out)
    }

    /// Degree 0 by degree 0: `a ⊗ a'`.
    pub fn cup_00(&self, a: &TruncatedSeries, other: &HerrModule, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.same_ring(other)?;
        a.mul(b)
    }

    /// Degree 0 by degree 1: `(a ⊗ x', a ⊗ y', a ⊗ z')`.
    pub fn cup_01(&self, a: &TruncatedSeries, other: &HerrModule, t: &HerrTriple) -> Result<HerrTriple> {
        self.same_ring(other)?;
        Ok(HerrTriple::new(a.mul(&t.x)?, a.mul(&t.y)?, a.mul(&t.z)?, 1, self.twist() + other.twist()))
    }

    /// Degree 1 by degree 0: `(x ⊗ a', y ⊗ a', z ⊗ a')`.
    pub fn cup_10(&self, t: &HerrTriple, other: &HerrModule, b: &TruncatedSeries) -> Result<HerrTriple> {
        self.same_ring(other)?;
        Ok(HerrTriple::new(t.x.mul(b)?, t.y.mul(b)?, t.z.mul(b)?, 1, self.twist() + other.twist()))
    }

    /// Degree 1 by degree 1:
    /// `(y ⊗ γx' - x ⊗ φy', z ⊗ τx' - x ⊗ φz', δz ⊗ τ^χ y' - y ⊗ γz' + Σ_{z,z'})`.
    pub fn cup_11(&self, t1: &HerrTriple, other: &HerrModule, t2: &HerrTriple) -> Result<HerrTriple> {
        self.same_ring(other)?;
        let (x, y, z) = (&t1.x, &t1.y, &t1.z);
        let (x2, y2, z2) = (&t2.x, &t2.y, &t2.z);
        let first = y.mul(&other.gamma(x2)?)?.sub(&x.mul(&other.phi(y2)?)?)?;
        let second = z.mul(&other.tau(x2)?)?.sub(&x.mul(&other.phi(z2)?)?)?;
        let mut third = self.delta(z)?.mul(&other.tau_chi(y2)?)?.sub(&y.mul(&other.gamma(z2)?)?)?;
        third = third.add(&self.sigma(z, other, z2)?)?;
        Ok(HerrTriple::new(first, second, third, 2, self.twist() + other.twist()))
    }

    /// `Σ_{n ≥ 1} binom(χ, n+1) Σ_{k=1}^n binom(n, k) (τ-1)^{k-1} z ⊗ τ^k (τ-1)^{n-k} z'`.
    fn sigma(&self, z: &TruncatedSeries, other: &HerrModule, z2: &TruncatedSeries) -> Result<TruncatedSeries> {
        let ctx = self.ctx().clone();
        let a = self.tau_minus_one_powers(z)?;
        let b = other.tau_minus_one_powers(z2)?;
        let mut out = TruncatedSeries::zero(self.ring());
        if a.is_empty() || b.is_empty() {
            return Ok(out);
        }
        let chi = BigInt::from(self.chi());
        let n_max = a.len() + b.len();
        for n in 1..=n_max {
            let c = binom_coeff(&ctx, &chi, n as u64 + 1);
            if c.is_zero() {
                continue;
            }
            let mut inner = TruncatedSeries::zero(self.ring());
            for k in 1..=n {
                let (Some(ak), Some(bk)) = (a.get(k - 1), b.get(n - k)) else { continue };
                let t = ak.mul(&bk.tau_pow(k as i64)?)?;
                inner = inner.add(&t.scale(&binom_coeff(&ctx, &BigInt::from(n), k as u64))?)?;
            }
            out = out.add(&inner.scale(&c)?)?;
        }
        Ok(out)
    }
}

/// One discarded monomial of a degree-two triple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discard {
    /// Component index 0, 1 or 2.
    pub component: usize,
    pub monomial: String,
    pub class: ShadowClass,
}

/// Reduction of a degree-two triple to the constant `w` of its middle
/// component, with the log of everything discarded on the way.
#[derive(Clone, Debug, Serialize)]
pub struct FinalReduction {
    #[serde(skip)]
    pub w: RationalCoefficient,
    #[serde(skip)]
    pub trace: RationalCoefficient,
    pub w_text: String,
    pub trace_text: String,
    pub discards: Vec<Discard>,
    /// Monomials that fit no ideal class.
    pub failures: Vec<String>,
}

impl FinalReduction {
    /// Raises `ShadowClassificationFailure` when any monomial was unclassified.
    pub fn ensure_clean(&self) -> Result<()> {
        if self.failures.is_empty() {
            Ok(())
        } else {
            Err(Error::ShadowClassificationFailure(self.failures.join("; ")))
        }
    }
}

/// Discards every monomial of `t` in the ideal shadow described by
/// `policy`, except the constant term `w` of the middle component, and
/// returns `w` with `Tr(w)`.
pub fn final_reduction(t: &HerrTriple, policy: &dyn ShadowPolicy) -> Result<FinalReduction> {
    let ring = t.x.ring().clone();
    let ctx = ring.ctx().clone();
    let xi = ring.var_of_kind(VarKind::Cyclotomic);
    let yi = ring.var_of_kind(VarKind::Kummer);
    if !t.y.is_known(&vec![0; ring.nvars()]) {
        return Err(Error::TruncationExhausted("the constant term of the middle component is beyond the caps".into()));
    }
    let mut w = ctx.q_zero();
    let mut discards = Vec::new();
    let mut failures = Vec::new();
    for (k, comp) in t.components().into_iter().enumerate() {
        for (e, c) in comp.terms() {
            let i = xi.map_or(0, |ix| e[ix]);
            let j = yi.map_or(0, |iy| e[iy]);
            if k == 1 && e.iter().all(|&x| x == 0) {
                w = c.clone();
                continue;
            }
            let monomial = format!("{} * {}", ctx.q_to_string(c), comp.format_exp(e));
            match policy.classify(&ctx, c, i, j) {
                Some(class) => discards.push(Discard { component: k, monomial, class }),
                None => failures.push(format!("component {k}: {monomial}")),
            }
        }
    }
    let floor = t.y.precision_floor();
    w = ctx.q_add(&w, &ctx.q_zero_prec(floor));
    let trace = ctx.q_trace(&w);
    Ok(FinalReduction {
        w_text: ctx.q_to_string(&w),
        trace_text: ctx.q_to_string(&trace),
        w,
        trace,
        discards,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{PadicContext, WittElement};
    use crate::shadow::MonomialShadow;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cup_of_cocycles_is_a_cocycle() {
        let ctx = PadicContext::new(3, 1, 2).unwrap();
        let m = HerrModule::new(&ctx, (4, 4), 0, 0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let a = m.alpha(&m.random_element(&mut rng).unwrap()).unwrap();
            let b = m.alpha(&m.random_element(&mut rng).unwrap()).unwrap();
            let c = m.cup_11(&a, &m, &b).unwrap();
            assert!(m.eta(&c).unwrap().is_zero_within());
        }
        let zero = HerrTriple::zero(m.ring(), 1, 0);
        let a = m.random_triple(&mut rng).unwrap();
        assert!(m.cup_11(&a, &m, &zero).unwrap().is_zero_within());
    }

    #[test]
    fn final_lemma_identity() {
        let ctx = PadicContext::new(3, 2, 3).unwrap();
        let m1 = HerrModule::new(&ctx, (3, 3), 0, 1, 4).unwrap();
        let m0 = m1.with_twist(0);
        let r = m1.ring().clone();
        let w = WittElement::new(&ctx, &[2, 5]).unwrap();
        let t1 = HerrTriple::new(TruncatedSeries::zero(&r), TruncatedSeries::zero(&r), TruncatedSeries::one(&r), 1, 1);
        let wc = TruncatedSeries::constant(&r, w.to_rational()).unwrap();
        let t2 = HerrTriple::new(wc, TruncatedSeries::zero(&r), TruncatedSeries::zero(&r), 1, 0);
        let c = m1.cup_11(&t1, &m0, &t2).unwrap();
        assert!(c.x.is_zero_within() && c.z.is_zero_within());
        let red = final_reduction(&c, &MonomialShadow::degree_two(3, 1)).unwrap();
        assert!(red.failures.is_empty());
        assert!(ctx.q_eq(&red.trace, &ctx.q_from_i64(w.trace() as i64)));
    }
}
