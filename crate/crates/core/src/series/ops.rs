//! Frobenius `φ`, the cyclotomic action `γ` and the Kummer action `τ`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use smallvec::SmallVec;

use super::{Accumulator, Exp, TruncatedSeries, VarKind, UNBOUNDED};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
enum Action {
    Phi,
    Gamma(i64),
    Tau(i64),
}

fn unit_exp(n: usize, i: usize, k: i32) -> Exp {
    let mut e: Exp = SmallVec::from_elem(0, n);
    e[i] = k;
    e
}

impl TruncatedSeries {
    /// `(1 + var)^u - 1` truncated at the cap of `var` (or `(1+var)^u` when
    /// `minus_one` is false).
    pub fn binomial_series(ring: &std::sync::Arc<super::SeriesRing>, var: usize, u: i64, minus_one: bool) -> Result<Self> {
        let ctx = ring.ctx();
        let cap = ring.vars()[var].cap;
        let n = ring.nvars();
        let ub = BigInt::from(u);
        let start = if minus_one { 1 } else { 0 };
        let mut terms = Vec::new();
        let mut b = BigInt::from(1);
        for j in 0..cap.max(start) {
            if j > 0 {
                b = b * (&ub - BigInt::from(j - 1)) / BigInt::from(j);
            }
            if j >= start && !b.is_zero() {
                terms.push((unit_exp(n, var, j), ctx.q_from_bigint(&b)));
            }
        }
        let mut s = TruncatedSeries::from_terms(ring, terms)?;
        // the expansion is infinite unless u is a small non-negative integer
        if !(u >= 0 && u < cap as i64) {
            s.unc.bounds[var] = s.unc.bounds[var].min(cap);
        }
        Ok(s)
    }

    fn image_of_var(&self, act: Action, i: usize) -> Result<Option<TruncatedSeries>> {
        let ring = self.ring();
        let n = ring.nvars();
        let kind = ring.vars()[i].kind;
        let p = ring.ctx().p() as i64;
        Ok(match (act, kind) {
            (Action::Phi, VarKind::Cyclotomic) => Some(Self::binomial_series(ring, i, p, true)?),
            (Action::Phi, _) => Some(TruncatedSeries::monomial(ring, &unit_exp(n, i, p as i32), ring.ctx().q_one())?),
            (Action::Gamma(chi), VarKind::Cyclotomic) => Some(Self::binomial_series(ring, i, chi, true)?),
            (Action::Tau(m), VarKind::Kummer) => {
                let Some(x) = ring.var_of_kind(VarKind::Cyclotomic) else {
                    return Err(Error::SpecMismatch("tau needs a cyclotomic variable".into()));
                };
                let b = Self::binomial_series(ring, x, m, false)?;
                Some(b.shift(&unit_exp(n, i, 1))?)
            }
            _ => None,
        })
    }

    fn image_power(
        &self,
        act: Action,
        i: usize,
        k: i32,
        cache: &mut HashMap<(usize, i32), TruncatedSeries>,
    ) -> Result<TruncatedSeries> {
        if let Some(s) = cache.get(&(i, k)) {
            return Ok(s.clone());
        }
        let ring = self.ring();
        let n = ring.nvars();
        let out = match self.image_of_var(act, i)? {
            None => TruncatedSeries::monomial(ring, &unit_exp(n, i, k), ring.ctx().q_one())?,
            Some(img) => {
                if let (Action::Phi, VarKind::Kummer | VarKind::Plain) = (act, ring.vars()[i].kind) {
                    let p = ring.ctx().p() as i32;
                    TruncatedSeries::monomial(ring, &unit_exp(n, i, p * k), ring.ctx().q_one())?
                } else if let (Action::Tau(m), VarKind::Kummer) = (act, ring.vars()[i].kind) {
                    let x = ring.var_of_kind(VarKind::Cyclotomic).unwrap();
                    let b = Self::binomial_series(ring, x, m * k as i64, false)?;
                    b.shift(&unit_exp(n, i, k))?
                } else if k == 0 {
                    TruncatedSeries::one(ring)
                } else if k == 1 {
                    img
                } else if k > 0 {
                    let prev = self.image_power(act, i, k - 1, cache)?;
                    prev.mul(&img)?
                } else if k == -1 {
                    img.invert_laurent(i)?
                } else {
                    let inv = self.image_power(act, i, -1, cache)?;
                    let prev = self.image_power(act, i, k + 1, cache)?;
                    prev.mul(&inv)?
                }
            }
        };
        cache.insert((i, k), out.clone());
        Ok(out)
    }

    fn substitute(&self, act: Action) -> Result<TruncatedSeries> {
        let ring = self.ring().clone();
        let n = ring.nvars();
        let ctx = ring.ctx().clone();
        let mut cache = HashMap::new();
        let mut acc = Accumulator::new(&ring);

        // known region of the result
        let mut unc = self.unc.clone();
        unc.bounds = vec![UNBOUNDED; n];
        for i in 0..n {
            if self.unc.bounds[i] >= UNBOUNDED {
                continue;
            }
            let img = self.image_power(act, i, 1, &mut cache)?;
            let mut covered = false;
            for j in 0..n {
                // an image truncated away entirely is still bounded below
                let o = img.order_in(j).or_else(|| {
                    (img.is_empty() && img.unc.bounds[j] < UNBOUNDED).then_some(img.unc.bounds[j])
                });
                if let Some(o) = o {
                    if o > 0 {
                        let b = (self.unc.bounds[i] as i64 * o as i64).min(UNBOUNDED as i64) as i32;
                        unc.bounds[j] = unc.bounds[j].min(b);
                        covered = true;
                    }
                }
            }
            if !covered {
                return Err(Error::TruncationExhausted(format!(
                    "cannot track the truncation of {} under {:?}",
                    ring.vars()[i].name,
                    act
                )));
            }
        }
        if let Some(t) = self.unc.total {
            let mut o = i32::MAX;
            for i in 0..n {
                let img = self.image_power(act, i, 1, &mut cache)?;
                o = o.min(img.total_order().unwrap_or(1).max(1));
            }
            unc.total = Some(t.saturating_mul(o));
        }
        acc.restrict(&unc);

        for (e, c) in self.terms() {
            let mut prod: Option<TruncatedSeries> = None;
            for i in 0..n {
                if e[i] == 0 {
                    continue;
                }
                let im = self.image_power(act, i, e[i], &mut cache)?;
                prod = Some(match prod {
                    None => im,
                    Some(p) => p.mul(&im)?,
                });
            }
            let c = match act {
                Action::Phi => ctx.q_frob(c),
                _ => c.clone(),
            };
            match prod {
                None => acc.add_term(e.clone(), c),
                Some(p) => acc.add_scaled(&p, &c),
            }
        }
        acc.finish()
    }

    /// Frobenius: coefficient Frobenius, `X -> (1+X)^p - 1`, `Y -> Y^p`.
    pub fn phi(&self) -> Result<Self> {
        self.substitute(Action::Phi)
    }

    /// `φ^j`.
    pub fn phi_pow(&self, j: u32) -> Result<Self> {
        let mut s = self.clone();
        for _ in 0..j {
            s = s.phi()?;
        }
        Ok(s)
    }

    /// `γ_χ`: `X -> (1+X)^χ - 1`, other variables fixed.
    pub fn gamma(&self, chi: i64) -> Result<Self> {
        self.substitute(Action::Gamma(chi))
    }

    /// `τ`: `Y -> Y(1+X)`.
    pub fn tau(&self) -> Result<Self> {
        self.substitute(Action::Tau(1))
    }

    /// `τ^m`: `Y -> Y(1+X)^m`.
    pub fn tau_pow(&self, m: i64) -> Result<Self> {
        self.substitute(Action::Tau(m))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{CoeffKind, SeriesRing};
    use super::*;
    use crate::padic::PadicContext;

    fn xy(caps: (i32, i32)) -> std::sync::Arc<SeriesRing> {
        let ctx = PadicContext::new(3, 1, 6).unwrap();
        SeriesRing::bivariate(&ctx, CoeffKind::Integral, caps, (0, 0)).unwrap()
    }

    #[test]
    fn phi_on_x() {
        let r = xy((5, 5));
        let got = TruncatedSeries::var(&r, 0).phi().unwrap();
        let want = TruncatedSeries::from_int_terms(&r, &[(&[1, 0], 3), (&[2, 0], 3), (&[3, 0], 1)]).unwrap();
        assert!(got.eq_within(&want));
    }

    #[test]
    fn phi_on_y() {
        let r = xy((5, 8));
        let s = TruncatedSeries::from_int_terms(&r, &[(&[0, 2], 1), (&[0, 1], 3)]).unwrap();
        let want = TruncatedSeries::from_int_terms(&r, &[(&[0, 6], 1), (&[0, 3], 3)]).unwrap();
        assert!(s.phi().unwrap().eq_within(&want));
    }

    #[test]
    fn gamma_on_x() {
        let r = xy((4, 4));
        let got = TruncatedSeries::var(&r, 0).gamma(4).unwrap();
        let want = TruncatedSeries::from_int_terms(&r, &[(&[1, 0], 4), (&[2, 0], 6), (&[3, 0], 4)]).unwrap();
        assert!(got.eq_within(&want));
    }

    #[test]
    fn tau_on_y() {
        let r = xy((4, 4));
        let y = TruncatedSeries::var(&r, 1);
        let want = TruncatedSeries::from_int_terms(&r, &[(&[0, 1], 1), (&[1, 1], 1)]).unwrap();
        assert!(y.tau().unwrap().eq_within(&want));
        let y2 = y.mul(&y).unwrap();
        let want2 = TruncatedSeries::from_int_terms(&r, &[(&[0, 2], 1), (&[1, 2], 2), (&[2, 2], 1)]).unwrap();
        assert!(y2.tau().unwrap().eq_within(&want2));
    }
}
