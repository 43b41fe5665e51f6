//! Inversions and the inverse of `1 - φ`.

use smallvec::SmallVec;

use super::{Exp, TruncatedSeries, Uncertainty, UNBOUNDED};
use crate::error::{Error, Result};
use crate::padic::{RationalCoefficient, EXACT};

/// Result of an annulus inversion.
#[derive(Clone, Debug)]
pub struct AnnulusInverse {
    /// The inverse.
    pub series: TruncatedSeries,
    /// Index of the dominant term.
    pub n0: i32,
    /// Radius parameter `r = num/den` used for the weights.
    pub radius: (i64, i64),
}

fn exp1(ring_n: usize, var: usize, k: i32) -> Exp {
    let mut e: Exp = SmallVec::from_elem(0, ring_n);
    e[var] = k;
    e
}

impl TruncatedSeries {
    /// Inverse of a power series whose constant term is invertible.
    ///
    /// Raises `NonInvertible` when the constant term is zero, or not a unit
    /// in an integral ring.
    pub fn invert_unit(&self) -> Result<Self> {
        let ctx = self.ctx().clone();
        let n = self.ring().nvars();
        let zero: Exp = SmallVec::from_elem(0, n);
        let c0 = self.coeff(&zero);
        if c0.is_zero() {
            return Err(Error::NonInvertible("constant term vanishes".into()));
        }
        if self.ring().kind() == super::CoeffKind::Integral && c0.valuation() != Some(0) {
            return Err(Error::NonInvertible("constant term is not a unit".into()));
        }
        if self.terms().keys().any(|e| e.iter().any(|&x| x < 0)) {
            return Err(Error::NonInvertible("not a power series".into()));
        }
        let inv0 = ctx.q_inv(&c0)?;
        if n == 1 {
            let cap = self.ring().vars()[0].cap;
            let bound = self.unc.bounds[0].min(cap);
            let hi = if self.unc.bounds[0] >= UNBOUNDED { cap } else { bound };
            let a: Vec<RationalCoefficient> = (0..hi).map(|k| self.coeff1(k)).collect();
            let support: Vec<usize> = (1..hi as usize).filter(|&i| !a[i].is_zero()).collect();
            let mut r: Vec<RationalCoefficient> = Vec::with_capacity(hi as usize);
            r.push(inv0.clone());
            for m in 1..hi as usize {
                let mut s = ctx.q_zero();
                for &i in &support {
                    if i > m {
                        break;
                    }
                    s = ctx.q_add(&s, &ctx.q_mul(&a[i], &r[m - i]));
                }
                r.push(ctx.q_neg(&ctx.q_mul(&s, &inv0)));
            }
            let mut unc = self.unc.clone();
            let shift = 2 * c0.valuation().unwrap();
            unc.p_floor = super::shift_floor(unc.p_floor, -shift);
            // a series with finite support has an infinite inverse
            unc.bounds[0] = unc.bounds[0].min(cap);
            let mut out = TruncatedSeries::zero(self.ring()).with_uncertainty(&unc);
            for (k, c) in r.into_iter().enumerate() {
                out.insert(SmallVec::from_slice(&[k as i32]), c)?;
            }
            return Ok(out);
        }
        // geometric series in eps = s/c0 - 1
        let eps = self.scale(&inv0)?.sub(&TruncatedSeries::one(self.ring()))?;
        let one = TruncatedSeries::one(self.ring());
        let mut term = one.clone();
        let mut acc = one;
        for _ in 0..10_000 {
            term = term.mul(&eps.neg())?;
            if term.is_empty() {
                let out = acc.with_uncertainty(term.uncertainty());
                return out.scale(&inv0);
            }
            acc = acc.add(&term)?;
        }
        Err(Error::TruncationExhausted("geometric series did not terminate".into()))
    }

    /// Inverse in the `p`-adically completed Laurent ring of variable `var`.
    ///
    /// Writes `s = p^v Y^m u (1 + t)` with `u` a power series with unit
    /// constant term and `t` of positive valuation, then sums `(-t)^j`.
    pub fn invert_laurent(&self, var: usize) -> Result<Self> {
        if !self.depends_only_on(var) {
            return Err(Error::NonInvertible("series involves more than one variable".into()));
        }
        let Some(vmin) = self.min_valuation() else {
            return Err(Error::NonInvertible("zero series".into()));
        };
        let ring = self.ring().clone();
        let n = ring.nvars();
        if ring.kind() == super::CoeffKind::Integral && vmin > 0 {
            return Err(Error::NonInvertible("all coefficients divisible by p".into()));
        }
        let s1 = if vmin == 0 { self.clone() } else { self.mul_p_power(-vmin)? };
        let m = s1
            .terms()
            .iter()
            .filter(|(_, c)| c.valuation() == Some(0))
            .map(|(e, _)| e[var])
            .min()
            .expect("a unit coefficient exists");
        let upper = s1.filter_terms(|e| e[var] >= m).shift(&exp1(n, var, -m))?;
        let lower = s1.filter_terms(|e| e[var] < m).shift(&exp1(n, var, -m))?;
        let u_inv = upper.invert_unit()?;
        let t = lower.mul(&u_inv)?;
        let mut acc = TruncatedSeries::one(&ring);
        if !t.is_empty() {
            let limit = ring.ctx().n() as i32 + 1;
            let mt = t.neg();
            let mut term = TruncatedSeries::one(&ring);
            loop {
                term = term.mul(&mt)?;
                if term.is_empty() {
                    break;
                }
                if term.min_valuation().is_none_or(|v| v >= limit) {
                    let floor = term.min_valuation().unwrap_or(EXACT);
                    acc.unc.p_floor = acc.unc.p_floor.min(floor);
                    break;
                }
                acc = acc.add(&term)?;
            }
        }
        let out = acc.mul(&u_inv)?.shift(&exp1(n, var, -m))?;
        if vmin == 0 {
            Ok(out)
        } else {
            out.mul_p_power(-vmin)
        }
    }

    /// Inverse in the `var`-adic Laurent ring: factor the lowest term.
    pub fn invert_adic(&self, var: usize) -> Result<Self> {
        if !self.depends_only_on(var) {
            return Err(Error::NonInvertible("series involves more than one variable".into()));
        }
        let Some(m) = self.order_in(var) else {
            return Err(Error::NonInvertible("zero series".into()));
        };
        let n = self.ring().nvars();
        let u = self.shift(&exp1(n, var, -m))?;
        u.invert_unit()?.shift(&exp1(n, var, -m))
    }

    /// Inverse on an annulus: weights `w(c Y^k) = e r v_p(c) + k`.
    ///
    /// The dominant term is the one of largest index among those of minimal
    /// weight; terms of the geometric expansion with relative weight at
    /// least `threshold` are dropped. Raises `NonInvertible` when another
    /// term has the same weight as the dominant one.
    pub fn invert_annulus(&self, var: usize, e: i64, radius: (i64, i64), threshold: i64) -> Result<AnnulusInverse> {
        if !self.depends_only_on(var) {
            return Err(Error::NonInvertible("series involves more than one variable".into()));
        }
        if self.is_empty() {
            return Err(Error::NonInvertible("zero series".into()));
        }
        let ctx = self.ctx().clone();
        let ring = self.ring().clone();
        let n = ring.nvars();
        let (rn, rd) = radius;
        // weights scaled by rd
        let weight = |k: i32, c: &RationalCoefficient| -> i64 { e * rn * c.valuation().unwrap() as i64 + k as i64 * rd };
        let wmin = self.terms().iter().map(|(ex, c)| weight(ex[var], c)).min().unwrap();
        let n0 = self
            .terms()
            .iter()
            .filter(|(ex, c)| weight(ex[var], c) == wmin)
            .map(|(ex, _)| ex[var])
            .max()
            .unwrap();
        let a = self.coeff(&exp1(n, var, n0));
        let a_inv = ctx.q_inv(&a)?;
        let eps = self
            .filter_terms(|ex| ex[var] != n0)
            .shift(&exp1(n, var, -n0))?
            .scale(&a_inv)?;
        if let Some(w) = eps.terms().iter().map(|(ex, c)| weight(ex[var], c)).min() {
            if w <= 0 {
                return Err(Error::NonInvertible(format!("annulus weight {w}/{rd} is not positive")));
            }
        }
        let limit = threshold * rd;
        let mut acc = TruncatedSeries::one(&ring);
        let mut term = TruncatedSeries::one(&ring);
        let meps = eps.neg();
        for _ in 0..100_000 {
            let next = term.mul(&meps)?;
            term = next.filter_terms(|ex| {
                let c = &next.terms()[ex];
                weight(ex[var], c) < limit
            });
            if term.is_empty() {
                let mut unc = term.uncertainty().clone();
                unc.p_floor = EXACT;
                let series = acc.with_uncertainty(&unc).scale(&a_inv)?.shift(&exp1(n, var, -n0))?;
                return Ok(AnnulusInverse { series, n0, radius });
            }
            acc = acc.add(&term)?;
        }
        Err(Error::TruncationExhausted("annulus expansion did not terminate".into()))
    }

    /// `(1 - φ)^{-1}` on series without constant term in a Kummer or plain
    /// variable: the sum of `φ^n(s)`.
    pub fn one_minus_phi_inverse(&self) -> Result<Self> {
        let ring = self.ring().clone();
        if ring.nvars() != 1 {
            return Err(Error::SpecMismatch("expected a univariate series".into()));
        }
        let zero: Exp = SmallVec::from_elem(0, 1);
        if !self.coeff(&zero).is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        if self.terms().keys().any(|e| e[0] < 0) {
            return Err(Error::SpecMismatch("expected a power series".into()));
        }
        let mut acc = self.clone();
        let mut term = self.clone();
        loop {
            term = term.phi()?;
            if term.is_empty() {
                return Ok(acc.with_uncertainty(term.uncertainty()));
            }
            acc = acc.add(&term)?;
        }
    }

    /// Residue: the coefficient of `var^{-1}` in a univariate series.
    pub fn residue(&self, var: usize) -> Result<RationalCoefficient> {
        if !self.depends_only_on(var) {
            return Err(Error::SpecMismatch("residue of a multivariate series".into()));
        }
        if self.unc.bounds[var] <= -1 {
            return Err(Error::TruncationExhausted("residue lies beyond the known region".into()));
        }
        let c = self.coeff(&exp1(self.ring().nvars(), var, -1));
        let floor = self.unc.p_floor;
        Ok(self.ctx().q_add(&c, &self.ctx().q_zero_prec(floor)))
    }

    /// Logarithmic derivative `s'/s` in the Laurent ring of `var`.
    pub fn dlog(&self, var: usize) -> Result<Self> {
        let inv = self.invert_laurent(var)?;
        self.derivative(var)?.mul(&inv)
    }

    /// Truncates to the region where coefficients are known modulo `p^k`.
    pub fn with_p_floor(&self, k: i32) -> Self {
        let unc = Uncertainty { p_floor: k, bounds: self.unc.bounds.clone(), total: self.unc.total };
        self.clone().with_uncertainty(&unc)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{CoeffKind, SeriesRing, VarKind};
    use super::*;
    use crate::padic::PadicContext;

    #[test]
    fn laurent_inverse_of_cyclotomic_polynomial() {
        let ctx = PadicContext::new(3, 1, 2).unwrap();
        let r = SeriesRing::univariate(&ctx, CoeffKind::Integral, "Y", VarKind::Kummer, 4, -12).unwrap();
        let s = TruncatedSeries::from_univariate(&r, 1, &[3, 3, 1]).unwrap();
        let inv = s.invert_laurent(0).unwrap();
        let want = TruncatedSeries::from_univariate(&r, -5, &[-3, -3, 1]).unwrap();
        assert!(inv.eq_within(&want), "{inv}");
        assert!(s.mul(&inv).unwrap().eq_within(&TruncatedSeries::one(&r)));
    }

    #[test]
    fn laurent_inverse_window_overflow() {
        let ctx = PadicContext::new(3, 1, 4).unwrap();
        let r = SeriesRing::univariate(&ctx, CoeffKind::Integral, "Y", VarKind::Kummer, 4, -4).unwrap();
        let s = TruncatedSeries::from_univariate(&r, 1, &[3, 3, 1]).unwrap();
        assert!(matches!(s.invert_laurent(0), Err(Error::WindowOverflow { .. })));
    }

    #[test]
    fn one_minus_phi_on_y() {
        let ctx = PadicContext::new(3, 1, 6).unwrap();
        let r = SeriesRing::univariate(&ctx, CoeffKind::Integral, "Y", VarKind::Kummer, 10, 0).unwrap();
        let y = TruncatedSeries::var(&r, 0);
        let got = y.one_minus_phi_inverse().unwrap();
        let want = TruncatedSeries::from_int_terms(&r, &[(&[1], 1), (&[3], 1), (&[9], 1)]).unwrap();
        assert!(got.eq_within(&want));
        let one = TruncatedSeries::one(&r);
        assert_eq!(one.one_minus_phi_inverse().unwrap_err(), Error::NonzeroConstantTerm);
    }

    #[test]
    fn naive_inverse_of_scaled_log() {
        let ctx = PadicContext::new(3, 1, 8).unwrap();
        let r = SeriesRing::univariate(&ctx, CoeffKind::Rational, "Y", VarKind::Kummer, 4, -3).unwrap();
        // 3 log(1+Y) = 3Y - 3Y^2/2 + Y^3 ...
        let v = TruncatedSeries::from_terms(
            &r,
            vec![
                (SmallVec::from_slice(&[1]), ctx.q_from_i64(3)),
                (SmallVec::from_slice(&[2]), ctx.q_from_ratio(-3, 2).unwrap()),
                (SmallVec::from_slice(&[3]), ctx.q_from_i64(1)),
            ],
        )
        .unwrap();
        let inv = v.invert_adic(0).unwrap();
        assert!(ctx.q_eq(&inv.coeff1(-1), &ctx.q_from_ratio(1, 3).unwrap()));
        assert!(ctx.q_eq(&inv.coeff1(0), &ctx.q_from_ratio(1, 6).unwrap()));
        assert!(ctx.q_eq(&inv.coeff1(1), &ctx.q_from_ratio(-1, 36).unwrap()));
    }
}
