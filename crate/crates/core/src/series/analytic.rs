//! Derivative, logarithms, the Coleman functional, composition, reversion
//! and the valuation-profile checker.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::{Accumulator, CoeffKind, Exp, TruncatedSeries, VarKind, UNBOUNDED};
use crate::error::{Error, Result};
use crate::padic::{vp_u64, EXACT};

fn unit_exp(n: usize, i: usize, k: i32) -> Exp {
    let mut e: Exp = SmallVec::from_elem(0, n);
    e[i] = k;
    e
}

fn floor_log(p: u64, j: u64) -> i32 {
    let mut k = 0;
    let mut x = j;
    while x >= p {
        x /= p;
        k += 1;
    }
    k
}

impl TruncatedSeries {
    /// Partial derivative in variable `var`.
    pub fn derivative(&self, var: usize) -> Result<Self> {
        let ctx = self.ctx().clone();
        let mut unc = self.unc.clone();
        if unc.bounds[var] < UNBOUNDED {
            unc.bounds[var] -= 1;
        }
        unc.total = unc.total.map(|t| t - 1);
        let mut out = TruncatedSeries::zero(self.ring()).with_uncertainty(&unc);
        for (e, c) in self.terms() {
            if e[var] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[var] -= 1;
            out.insert(ne, ctx.q_mul(c, &ctx.q_from_i64(e[var] as i64)))?;
        }
        Ok(out)
    }

    /// Formal antiderivative in a univariate ring (`Y^k -> Y^{k+1}/(k+1)`).
    fn integrate(&self) -> Result<Self> {
        let ctx = self.ctx().clone();
        let mut unc = self.unc.clone();
        if unc.bounds[0] < UNBOUNDED {
            unc.bounds[0] += 1;
        }
        unc.p_floor = unc.p_floor.saturating_sub(floor_log(ctx.p(), unc.bounds[0].max(1) as u64)).min(EXACT);
        let mut out = TruncatedSeries::zero(self.ring()).with_uncertainty(&unc);
        for (e, c) in self.terms() {
            let k = e[0] + 1;
            if k == 0 {
                return Err(Error::SpecMismatch("cannot integrate Y^-1".into()));
            }
            out.insert(SmallVec::from_slice(&[k]), ctx.q_div(c, &ctx.q_from_i64(k as i64))?)?;
        }
        Ok(out)
    }

    /// `p`-adic logarithm of a one-unit `s ≡ 1 mod (p, variables)`.
    ///
    /// The result lives in the rational version of the ring.
    pub fn log_one_unit(&self) -> Result<Self> {
        let s = self.to_rational();
        let ring = s.ring().clone();
        let ctx = ring.ctx().clone();
        let n = ring.nvars();
        if s.terms().keys().any(|e| e.iter().any(|&x| x < 0)) {
            return Err(Error::NotAOneUnit("negative exponent".into()));
        }
        let zero: Exp = SmallVec::from_elem(0, n);
        let c0 = s.coeff(&zero);
        let a = ctx.q_sub(&c0, &ctx.q_one());
        if a.valuation().is_some_and(|v| v < 1) {
            return Err(Error::NotAOneUnit(format!("constant term {}", ctx.q_to_string(&c0))));
        }
        if s.terms().iter().any(|(e, c)| e.iter().any(|&x| x > 0) && c.valuation().is_some_and(|v| v < 0)) {
            return Err(Error::NotAOneUnit("non-integral coefficient".into()));
        }
        // log of the constant
        let mut l0 = ctx.q_zero();
        if let Some(va) = a.valuation() {
            let target = a.precision();
            let mut pw = ctx.q_one();
            let mut j: u64 = 1;
            loop {
                pw = ctx.q_mul(&pw, &a);
                let t = ctx.q_div(&pw, &ctx.q_from_i64(j as i64))?;
                let t = if j.is_multiple_of(2) { ctx.q_neg(&t) } else { t };
                l0 = ctx.q_add(&l0, &t);
                j += 1;
                if (j as i64) * va as i64 - floor_log(ctx.p(), j) as i64 >= target as i64 {
                    break;
                }
            }
        }
        let inv0 = ctx.q_inv(&c0)?;
        let t = s.scale(&inv0)?.sub(&TruncatedSeries::one(&ring))?;
        let t = t.filter_terms(|e| e.iter().any(|&x| x != 0));
        let rest = if t.is_empty() {
            t.clone()
        } else if n == 1 {
            let one_t = t.add(&TruncatedSeries::one(&ring))?;
            t.derivative(0)?.mul(&one_t.invert_unit()?)?.integrate()?
        } else {
            let mut acc = TruncatedSeries::zero(&ring);
            let mut pw = TruncatedSeries::one(&ring);
            let mut j: i64 = 1;
            loop {
                pw = pw.mul(&t)?;
                if pw.is_empty() {
                    acc = acc.with_uncertainty(pw.uncertainty());
                    break;
                }
                let term = pw.div_i64(if j % 2 == 0 { -j } else { j })?;
                acc = acc.add(&term)?;
                j += 1;
            }
            acc
        };
        rest.add(&TruncatedSeries::constant(&ring, l0)?.with_uncertainty(rest.uncertainty()))
    }

    /// The Coleman functional `𝓛(F) = (1/p) log(F^p / φ(F))` of a
    /// univariate series `F = var^d G` with `G(0)` a unit.
    ///
    /// Returns an integral series; raises `IntegralityFailure` at the first
    /// exponent whose coefficient is not integral.
    pub fn coleman_functional(&self) -> Result<Self> {
        let ring = self.ring().clone();
        if ring.nvars() != 1 {
            return Err(Error::SpecMismatch("the Coleman functional is univariate".into()));
        }
        let ctx = ring.ctx().clone();
        let p = ctx.p() as i32;
        let Some(d) = self.order_in(0) else {
            return Err(Error::NotAOneUnit("zero series".into()));
        };
        if d != 0 && ring.vars()[0].kind == VarKind::Cyclotomic {
            return Err(Error::NotAOneUnit("a cyclotomic variable cannot be factored out".into()));
        }
        let s = self.to_rational();
        let g = s.shift(&[-d])?;
        let g0 = g.coeff1(0);
        if g0.valuation() != Some(0) {
            return Err(Error::NotAOneUnit("leading coefficient is not a unit".into()));
        }
        let q = g.pow(p as u32)?.mul(&g.phi()?.invert_unit()?)?;
        let w = q.sub(&TruncatedSeries::one(q.ring()))?.mul_p_power(-1)?;
        let target = ctx.n() as i32 + 1;
        let mut acc = TruncatedSeries::zero(q.ring());
        let mut pw = TruncatedSeries::one(q.ring());
        let mut j: i64 = 1;
        loop {
            pw = pw.mul(&w)?;
            if pw.is_empty() {
                acc = acc.with_uncertainty(pw.uncertainty());
                break;
            }
            let vj = vp_u64(j as u64, p as u64) as i32;
            let sign = if j % 2 == 0 { -1 } else { 1 };
            let term = pw.mul_p_power(j as i32 - 1 - vj)?.div_i64(sign * j / (p as i64).pow(vj as u32))?;
            acc = acc.add(&term)?;
            j += 1;
            if j as i32 - 1 - floor_log(p as u64, j as u64) >= target {
                let mut u = acc.uncertainty().clone();
                u.p_floor = u.p_floor.min(target);
                acc = acc.with_uncertainty(&u);
                break;
            }
        }
        // the division by p costs one digit everywhere
        let cap = ctx.n() as i32 - 1;
        let mut u = acc.uncertainty().clone();
        u.p_floor = u.p_floor.min(cap);
        let clamped =
            TruncatedSeries::from_terms(acc.ring(), acc.terms().iter().map(|(e, c)| (e.clone(), ctx.q_clamp(c, cap))))?
        .with_uncertainty(&u);
        let out_ring = ring.with_kind(CoeffKind::Integral);
        clamped.to_integral()?.embed(&out_ring)
    }

    /// Substitutes `subs[i]` for variable `i`. The result lives in the ring
    /// of the substituted series.
    pub fn compose(&self, subs: &[TruncatedSeries]) -> Result<Self> {
        let n = self.ring().nvars();
        if subs.len() != n {
            return Err(Error::SpecMismatch("one substitution per variable".into()));
        }
        let target = subs[0].ring().clone();
        for s in subs {
            if **s.ring() != *target {
                return Err(Error::SpecMismatch("substitutions live in different rings".into()));
            }
        }
        let m = target.nvars();
        let mut unc = subs[0].unc.clone();
        unc.bounds = vec![UNBOUNDED; m];
        unc.total = None;
        unc.p_floor = self.unc.p_floor;
        let tord: Vec<i32> = subs.iter().map(|s| s.total_order().unwrap_or(UNBOUNDED)).collect();
        for i in 0..n {
            let b = self.unc.bounds[i];
            if b >= UNBOUNDED {
                continue;
            }
            let mut covered = false;
            if target.total_cap().is_some() && tord[i] >= 1 {
                let t = (b as i64 * tord[i] as i64).min(UNBOUNDED as i64) as i32;
                unc.total = Some(unc.total.map_or(t, |x| x.min(t)));
                covered = true;
            } else {
                for j in 0..m {
                    if let Some(o) = subs[i].order_in(j) {
                        if o > 0 {
                            let t = (b as i64 * o as i64).min(UNBOUNDED as i64) as i32;
                            unc.bounds[j] = unc.bounds[j].min(t);
                            covered = true;
                        }
                    }
                }
            }
            if !covered {
                return Err(Error::TruncationExhausted("composition with a non-strict substitution".into()));
            }
        }
        if let Some(t) = self.unc.total {
            let o = tord.iter().copied().min().unwrap_or(1);
            if o < 1 {
                return Err(Error::TruncationExhausted("composition with a non-strict substitution".into()));
            }
            let tt = (t as i64 * o as i64).min(UNBOUNDED as i64) as i32;
            if target.total_cap().is_some() {
                unc.total = Some(unc.total.map_or(tt, |x| x.min(tt)));
            } else {
                for j in 0..m {
                    let oj = subs.iter().map(|s| s.order_in(j).unwrap_or(UNBOUNDED)).min().unwrap_or(0);
                    if oj < 1 {
                        return Err(Error::TruncationExhausted("cannot track a total-degree truncation".into()));
                    }
                    unc.bounds[j] = unc.bounds[j].min((t as i64 * oj as i64).min(UNBOUNDED as i64) as i32);
                }
            }
        }
        let mut acc = Accumulator::new(&target);
        acc.restrict(&unc);
        let mut powers: Vec<HashMap<i32, TruncatedSeries>> = vec![HashMap::new(); n];
        for (e, c) in self.terms() {
            let mut prod = TruncatedSeries::one(&target);
            for i in 0..n {
                let k = e[i];
                if k == 0 {
                    continue;
                }
                if k < 0 {
                    return Err(Error::NonInvertible("negative exponent in composition".into()));
                }
                if !powers[i].contains_key(&k) {
                    let mut top = (1..k).rev().find(|j| powers[i].contains_key(j)).unwrap_or(0);
                    let mut cur = if top == 0 { TruncatedSeries::one(&target) } else { powers[i][&top].clone() };
                    while top < k {
                        cur = cur.mul(&subs[i])?;
                        top += 1;
                        powers[i].insert(top, cur.clone());
                    }
                }
                prod = prod.mul(&powers[i][&k])?;
            }
            acc.add_scaled(&prod, c);
        }
        acc.finish()
    }

    /// Compositional inverse of a strict system `l_i = T_i + (higher order)`.
    ///
    /// Raises `NotStrict` when the linear part is not the identity or a
    /// constant term is present.
    pub fn reversion(ls: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        let d = ls.len();
        if d == 0 {
            return Err(Error::SpecMismatch("empty system".into()));
        }
        let ring = ls[0].ring().clone();
        if ring.nvars() != d {
            return Err(Error::SpecMismatch("system size must equal the number of variables".into()));
        }
        let ctx = ring.ctx().clone();
        let zero: Exp = SmallVec::from_elem(0, d);
        for (i, l) in ls.iter().enumerate() {
            if !l.coeff(&zero).is_zero() {
                return Err(Error::NotStrict(format!("component {i} has a constant term")));
            }
            for j in 0..d {
                let c = l.coeff(&unit_exp(d, j, 1));
                let want = if i == j { ctx.q_one() } else { ctx.q_zero() };
                if !ctx.q_sub(&c, &want).is_zero() {
                    return Err(Error::NotStrict(format!("linear coefficient ({i},{j}) is {}", ctx.q_to_string(&c))));
                }
            }
        }
        let vars: Vec<TruncatedSeries> = (0..d).map(|i| TruncatedSeries::var(&ring, i)).collect();
        // higher-order parts h_i = l_i - T_i
        let hs: Vec<TruncatedSeries> =
            ls.iter().zip(vars.iter()).map(|(l, t)| l.sub(t)).collect::<Result<_>>()?;
        let mut g = vars.clone();
        let limit = ring.caps().iter().copied().max().unwrap_or(1) + ring.total_cap().unwrap_or(0) + 2;
        for _ in 0..limit {
            let mut next = Vec::with_capacity(d);
            for i in 0..d {
                next.push(vars[i].sub(&hs[i].compose(&g)?)?);
            }
            let done = next.iter().zip(g.iter()).all(|(a, b)| {
                a.eq_within(b) && a.uncertainty() == b.uncertainty()
            });
            g = next;
            if done {
                return Ok(g);
            }
        }
        Ok(g)
    }

    /// Univariate reversion.
    pub fn reversion1(&self) -> Result<TruncatedSeries> {
        Ok(Self::reversion(std::slice::from_ref(self))?.remove(0))
    }
}

/// A slope of a valuation profile: `num/den`, or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slope {
    Finite(i64, i64),
    Infinite,
}

/// Parameters of the ring `𝓖_{[b,a]}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GBeltSpec {
    pub a: Slope,
    pub b: (i64, i64),
    pub e: i64,
}

impl GBeltSpec {
    pub fn new(a: Slope, b: (i64, i64), e: i64) -> Result<Self> {
        if b.1 <= 0 || b.0 < 0 || e <= 0 {
            return Err(Error::SpecMismatch("need b >= 0 and e > 0".into()));
        }
        if let Slope::Finite(n, d) = a {
            if d <= 0 || n * b.1 <= b.0 * d {
                return Err(Error::SpecMismatch("need a > b".into()));
            }
        }
        Ok(GBeltSpec { a, b, e })
    }
}

/// Minima of the two valuation profiles over the stored support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GBeltReport {
    /// `min_{n>=0} (a e v(a_n) + n)`; `None` if no such term, `-inf` encoded as `f64::NEG_INFINITY`.
    pub outer_min: Option<f64>,
    /// `min_{n<=0} (b e v(a_n) + n)`.
    pub inner_min: Option<f64>,
    pub outer_ok: bool,
    pub inner_ok: bool,
    pub pass: bool,
}

impl TruncatedSeries {
    /// Valuation-profile check against `𝓖_{[b,a]}`.
    pub fn gbelt_check(&self, spec: &GBeltSpec) -> Result<GBeltReport> {
        if self.ring().nvars() != 1 {
            return Err(Error::SpecMismatch("gbelt_check is univariate".into()));
        }
        let mut outer: Option<f64> = None;
        let mut inner: Option<f64> = None;
        for (e, c) in self.terms() {
            let n = e[0] as f64;
            let v = c.valuation().unwrap() as i64;
            if e[0] >= 0 {
                let w = match spec.a {
                    Slope::Finite(num, den) => (num * spec.e * v) as f64 / den as f64 + n,
                    Slope::Infinite => match v.cmp(&0) {
                        std::cmp::Ordering::Less => f64::NEG_INFINITY,
                        std::cmp::Ordering::Equal => n,
                        std::cmp::Ordering::Greater => f64::INFINITY,
                    },
                };
                outer = Some(outer.map_or(w, |x: f64| x.min(w)));
            }
            if e[0] <= 0 {
                let w = (spec.b.0 * spec.e * v) as f64 / spec.b.1 as f64 + n;
                inner = Some(inner.map_or(w, |x: f64| x.min(w)));
            }
        }
        let outer_ok = outer.is_none_or(|x| x >= 0.0);
        let inner_ok = inner.is_none_or(|x| x >= 0.0);
        Ok(GBeltReport { outer_min: outer, inner_min: inner, outer_ok, inner_ok, pass: outer_ok && inner_ok })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use super::super::SeriesRing;
    use crate::padic::PadicContext;

    fn line(kind: CoeffKind, cap: i32) -> Arc<SeriesRing> {
        let ctx = PadicContext::new(3, 1, 6).unwrap();
        SeriesRing::univariate(&ctx, kind, "Y", VarKind::Kummer, cap, -4).unwrap()
    }

    #[test]
    fn mercator() {
        let r = line(CoeffKind::Integral, 4);
        let s = TruncatedSeries::from_univariate(&r, 0, &[1, 1]).unwrap();
        assert_eq!(s.log_one_unit().unwrap().to_string(), "Y - Y^2/2 + Y^3/3");
        assert!(TruncatedSeries::one(&r).log_one_unit().unwrap().is_empty());
        let bad = TruncatedSeries::from_univariate(&r, 0, &[2, 1]).unwrap();
        assert!(matches!(bad.log_one_unit(), Err(Error::NotAOneUnit(_))));
    }

    #[test]
    fn coleman_examples() {
        let r = line(CoeffKind::Integral, 4);
        let y = TruncatedSeries::var(&r, 0);
        assert!(y.coleman_functional().unwrap().is_empty());
        let f = TruncatedSeries::from_univariate(&r, 0, &[1, 1]).unwrap();
        let l = f.coleman_functional().unwrap();
        assert_eq!(l.to_string(), "Y - Y^2/2");
    }

    #[test]
    fn reversion_of_cubic() {
        let r = line(CoeffKind::Rational, 8);
        let ctx = r.ctx().clone();
        let l = TruncatedSeries::from_terms(
            &r,
            vec![(SmallVec::from_slice(&[1]), ctx.q_one()), (SmallVec::from_slice(&[3]), ctx.q_from_ratio(1, 3).unwrap())],
        )
        .unwrap();
        let g = l.reversion1().unwrap();
        assert!(ctx.q_eq(&g.coeff1(3), &ctx.q_from_ratio(-1, 3).unwrap()));
        assert!(ctx.q_eq(&g.coeff1(5), &ctx.q_from_ratio(1, 3).unwrap()));
        let back = l.compose(std::slice::from_ref(&g)).unwrap();
        assert!(back.eq_within(&TruncatedSeries::var(&r, 0)));
    }

    #[test]
    fn gbelt_examples() {
        let ctx = PadicContext::new(3, 1, 6).unwrap();
        let r = SeriesRing::univariate(&ctx, CoeffKind::Rational, "Y", VarKind::Kummer, 40, -40).unwrap();
        let spec = GBeltSpec::new(Slope::Finite(3, 1), (0, 1), 2).unwrap();
        let s = TruncatedSeries::monomial(&r, &[6], ctx.q_p_power(-1)).unwrap();
        let rep = s.gbelt_check(&spec).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.outer_min, Some(0.0));
        let s = TruncatedSeries::monomial(&r, &[0], ctx.q_p_power(-1)).unwrap();
        assert!(!s.gbelt_check(&spec).unwrap().pass);
        let spec = GBeltSpec::new(Slope::Finite(3, 1), (1, 1), 2).unwrap();
        let s = TruncatedSeries::monomial(&r, &[-2], ctx.q_p_power(1)).unwrap();
        let rep = s.gbelt_check(&spec).unwrap();
        assert!(rep.inner_ok);
        assert_eq!(rep.inner_min, Some(0.0));
    }
}
