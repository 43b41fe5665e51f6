//! The four-term complex `C_{φ,γ,τ}` on truncated two-variable modules.
//!
//! A module is a ring `W/p^N [X, Y]` truncated at caps `(X^a, Y^b)`,
//! optionally Laurent in `X`, with a Tate twist `r`: `γ` is scaled by
//! `χ(γ)^r`, while `φ` and `τ` ignore the twist.

mod cup;
mod checks;
mod kummer;

pub use checks::{check_complex, check_cup, ComplexReport, CupReport};
pub use cup::{final_reduction, Discard, FinalReduction};
pub use kummer::{kummer_triple_classical, kummer_triple_formal, realize_cocycle, Certificate};

use std::sync::Arc;

use num_bigint::BigInt;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{kernel, subquotient_order, ZmodMatrix};
use crate::padic::{binomial_exact, PadicContext, RationalCoefficient};
use crate::series::{CoeffKind, SeriesRing, TruncatedSeries, VarKind};

/// A truncated module with a twist and a choice of `χ(γ)`.
#[derive(Clone, Debug)]
pub struct HerrModule {
    ring: Arc<SeriesRing>,
    twist: i32,
    chi: i64,
}

/// A cochain of degree 1 or 2, `(x, y, z)`.
#[derive(Clone, Debug)]
pub struct HerrTriple {
    pub x: TruncatedSeries,
    pub y: TruncatedSeries,
    pub z: TruncatedSeries,
    pub degree: u8,
    pub twist: i32,
}

impl HerrTriple {
    pub fn new(x: TruncatedSeries, y: TruncatedSeries, z: TruncatedSeries, degree: u8, twist: i32) -> Self {
        HerrTriple { x, y, z, degree, twist }
    }

    pub fn zero(ring: &Arc<SeriesRing>, degree: u8, twist: i32) -> Self {
        let z = TruncatedSeries::zero(ring);
        HerrTriple { x: z.clone(), y: z.clone(), z, degree, twist }
    }

    pub fn add(&self, other: &HerrTriple) -> Result<Self> {
        Ok(HerrTriple {
            x: self.x.add(&other.x)?,
            y: self.y.add(&other.y)?,
            z: self.z.add(&other.z)?,
            degree: self.degree,
            twist: self.twist,
        })
    }

    pub fn sub(&self, other: &HerrTriple) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        HerrTriple { x: self.x.neg(), y: self.y.neg(), z: self.z.neg(), degree: self.degree, twist: self.twist }
    }

    /// All three components vanish within caps.
    pub fn is_zero_within(&self) -> bool {
        self.x.is_zero_within() && self.y.is_zero_within() && self.z.is_zero_within()
    }

    pub fn components(&self) -> [&TruncatedSeries; 3] {
        [&self.x, &self.y, &self.z]
    }
}

/// `log_p` of the orders of `H^0, ..., H^3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyOrders {
    pub h: [u32; 4],
}

/// `binom(u, n)` as a coefficient.
pub(crate) fn binom_coeff(ctx: &PadicContext, u: &BigInt, n: u64) -> RationalCoefficient {
    ctx.q_from_bigint(&binomial_exact(u, n))
}

impl HerrModule {
    /// Module over `W/p^N [X, Y]` with caps `(a, b)` and `X`-window `x_window`.
    pub fn new(ctx: &Arc<PadicContext>, caps: (i32, i32), x_window: i32, twist: i32, chi: i64) -> Result<Self> {
        let ring = SeriesRing::bivariate(ctx, CoeffKind::Integral, caps, (x_window, 0))?;
        Self::from_ring(ring, twist, chi)
    }

    /// Module with Laurent windows in both variables and a chosen
    /// coefficient kind.
    pub fn laurent(
        ctx: &Arc<PadicContext>,
        kind: CoeffKind,
        caps: (i32, i32),
        windows: (i32, i32),
        twist: i32,
        chi: i64,
    ) -> Result<Self> {
        let ring = SeriesRing::bivariate(ctx, kind, caps, windows)?;
        Self::from_ring(ring, twist, chi)
    }

    /// Module on an existing ring with a cyclotomic variable.
    pub fn from_ring(ring: Arc<SeriesRing>, twist: i32, chi: i64) -> Result<Self> {
        let p = ring.ctx().p() as i64;
        if chi.rem_euclid(p) == 0 {
            return Err(Error::InvalidContext(format!("chi(gamma) = {chi} is not a unit")));
        }
        if ring.var_of_kind(VarKind::Cyclotomic).is_none() {
            return Err(Error::SpecMismatch("a Herr module needs a cyclotomic variable".into()));
        }
        Ok(HerrModule { ring, twist, chi })
    }

    /// `χ(γ) = 1 + p`.
    pub fn default_chi(p: u64) -> i64 {
        1 + p as i64
    }

    pub fn with_twist(&self, twist: i32) -> Self {
        HerrModule { ring: self.ring.clone(), twist, chi: self.chi }
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }
    pub fn ctx(&self) -> &Arc<PadicContext> {
        self.ring.ctx()
    }
    pub fn twist(&self) -> i32 {
        self.twist
    }
    pub fn chi(&self) -> i64 {
        self.chi
    }

    fn x_index(&self) -> usize {
        self.ring.var_of_kind(VarKind::Cyclotomic).unwrap()
    }

    /// Upper bound on the nilpotency index of `τ - 1`.
    pub fn nilpotency_bound(&self) -> i32 {
        let v = &self.ring.vars()[self.x_index()];
        v.cap - v.window
    }

    fn check(&self, m: &TruncatedSeries) -> Result<()> {
        if **m.ring() != *self.ring {
            return Err(Error::SpecMismatch("element lives in another ring".into()));
        }
        Ok(())
    }

    /// `χ^r` as a coefficient.
    fn chi_power(&self, r: i32) -> Result<RationalCoefficient> {
        let ctx = self.ctx();
        let c = ctx.q_from_bigint(&num_traits::pow(BigInt::from(self.chi), r.unsigned_abs() as usize));
        if r >= 0 {
            Ok(c)
        } else {
            ctx.q_inv(&c)
        }
    }

    pub fn phi(&self, m: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check(m)?;
        m.phi()
    }

    /// `γ` on the twisted module.
    pub fn gamma(&self, m: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check(m)?;
        let g = m.gamma(self.chi)?;
        if self.twist == 0 {
            Ok(g)
        } else {
            g.scale(&self.chi_power(self.twist)?)
        }
    }

    pub fn tau(&self, m: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check(m)?;
        m.tau()
    }

    /// `τ^{χ(γ)}`.
    pub fn tau_chi(&self, m: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check(m)?;
        m.tau_pow(self.chi)
    }

    /// `Σ_{n ≥ 1} binom(u, n) (τ - 1)^{n-1} m`, i.e. `(τ^u - 1)/(τ - 1)`.
    pub fn tau_quotient(&self, m: &TruncatedSeries, u: i64) -> Result<TruncatedSeries> {
        self.check(m)?;
        let ctx = self.ctx().clone();
        let ub = BigInt::from(u);
        let mut out = TruncatedSeries::zero(&self.ring);
        let mut t = m.clone();
        let limit = self.nilpotency_bound() as u64 + 2;
        for n in 1..=limit {
            if t.is_empty() {
                return Ok(out);
            }
            let b = binom_coeff(&ctx, &ub, n);
            if !b.is_zero() {
                out = out.add(&t.scale(&b)?)?;
            }
            t = t.tau()?.sub(&t)?;
        }
        if t.is_empty() {
            Ok(out)
        } else {
            Err(Error::TruncationExhausted("tau - 1 is not nilpotent within the caps".into()))
        }
    }

    /// `δ = Σ_{n ≥ 1} binom(χ(γ), n) (τ - 1)^{n-1}`.
    pub fn delta(&self, m: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.tau_quotient(m, self.chi)
    }

    /// `δ^{-1}` by the geometric series in the nilpotent part of `δ / χ`.
    pub fn delta_inverse(&self, m: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check(m)?;
        let ctx = self.ctx().clone();
        let chi = ctx.q_from_i64(self.chi);
        let chi_inv = ctx.q_inv(&chi)?;
        let start = m.scale(&chi_inv)?;
        let mut out = start.clone();
        let mut t = start;
        for _ in 0..=self.nilpotency_bound() + 1 {
            // t <- -(δ(t) - χ t) / χ
            let nt = self.delta(&t)?.sub(&t.scale(&chi)?)?.scale(&chi_inv)?.neg();
            if nt.is_empty() {
                return Ok(out);
            }
            out = out.add(&nt)?;
            t = nt;
        }
        Err(Error::TruncationExhausted("delta inverse did not converge within the caps".into()))
    }

    /// `α(m) = ((φ - 1)m, (γ - 1)m, (τ - 1)m)`.
    pub fn alpha(&self, m: &TruncatedSeries) -> Result<HerrTriple> {
        Ok(HerrTriple {
            x: self.phi(m)?.sub(m)?,
            y: self.gamma(m)?.sub(m)?,
            z: self.tau(m)?.sub(m)?,
            degree: 1,
            twist: self.twist,
        })
    }

    /// `β(x, y, z) = ((γ-1)x + (1-φ)y, (τ-1)x + (1-φ)z, (τ^χ-1)y + (δ-γ)z)`.
    pub fn beta(&self, t: &HerrTriple) -> Result<HerrTriple> {
        let (x, y, z) = (&t.x, &t.y, &t.z);
        let u = self.gamma(x)?.sub(x)?.add(&y.sub(&self.phi(y)?)?)?;
        let v = self.tau(x)?.sub(x)?.add(&z.sub(&self.phi(z)?)?)?;
        let w = self.tau_chi(y)?.sub(y)?.add(&self.delta(z)?.sub(&self.gamma(z)?)?)?;
        Ok(HerrTriple { x: u, y: v, z: w, degree: 2, twist: self.twist })
    }

    /// `η(u, v, w) = (τ^χ - 1)u + (δ - γ)v + (φ - 1)w`.
    pub fn eta(&self, t: &HerrTriple) -> Result<TruncatedSeries> {
        let (u, v, w) = (&t.x, &t.y, &t.z);
        self.tau_chi(u)?
            .sub(u)?
            .add(&self.delta(v)?.sub(&self.gamma(v)?)?)?
            .add(&self.phi(w)?.sub(w)?)
    }

    /// Classical `f_1(m) = ((φ - 1)m, (γ - 1)m)`.
    pub fn f1(&self, m: &TruncatedSeries) -> Result<(TruncatedSeries, TruncatedSeries)> {
        Ok((self.phi(m)?.sub(m)?, self.gamma(m)?.sub(m)?))
    }

    /// Classical `f_2(x, y) = (γ - 1)x + (1 - φ)y`.
    pub fn f2(&self, x: &TruncatedSeries, y: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.gamma(x)?.sub(x)?.add(&y.sub(&self.phi(y)?)?)
    }

    /// Monomials `X^i Y^j` inside the caps and windows.
    pub fn basis(&self) -> Vec<Vec<i32>> {
        let vars = self.ring.vars();
        let mut out = vec![vec![]];
        for v in vars {
            out = out
                .into_iter()
                .flat_map(|e: Vec<i32>| {
                    (v.window..v.cap).map(move |k| {
                        let mut e2 = e.clone();
                        e2.push(k);
                        e2
                    })
                })
                .collect();
        }
        out.retain(|e| self.ring.total_cap().is_none_or(|t| e.iter().sum::<i32>() < t));
        out
    }

    /// Uniformly random element with coefficients in `Z/p^N` (residue degree 1)
    /// or random coordinates.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Result<TruncatedSeries> {
        let ctx = self.ctx().clone();
        let m = ctx.p_pow(ctx.n());
        let terms = self.basis().into_iter().map(|e| {
            let coords: Vec<u64> = (0..ctx.f()).map(|_| rng.gen_range(0..m)).collect();
            (e.into_iter().collect(), ctx.q_from_coords(&coords.into(), ctx.n() as i32))
        });
        TruncatedSeries::from_terms(&self.ring, terms)
    }

    /// Random element depending on `X` only.
    pub fn random_x_element<R: Rng>(&self, rng: &mut R) -> Result<TruncatedSeries> {
        let xi = self.x_index();
        let m = self.random_element(rng)?;
        Ok(m.filter_terms(|e| e.iter().enumerate().all(|(i, &k)| i == xi || k == 0)))
    }

    /// Random degree-1 cochain.
    pub fn random_triple<R: Rng>(&self, rng: &mut R) -> Result<HerrTriple> {
        Ok(HerrTriple {
            x: self.random_element(rng)?,
            y: self.random_element(rng)?,
            z: self.random_element(rng)?,
            degree: 1,
            twist: self.twist,
        })
    }

    /// Coordinates of `m` in the monomial basis.
    fn coords(&self, basis: &[Vec<i32>], m: &TruncatedSeries) -> Result<Vec<u64>> {
        let ctx = self.ctx();
        basis.iter().map(|e| Ok(ctx.q_to_coords(&m.coeff(e), ctx.n())?[0])).collect()
    }

    fn element(&self, basis: &[Vec<i32>], v: &[u64]) -> Result<TruncatedSeries> {
        let ctx = self.ctx().clone();
        let terms = basis.iter().zip(v).filter(|(_, &c)| c != 0).map(|(e, &c)| {
            (e.iter().copied().collect(), ctx.q_from_i64(c as i64))
        });
        TruncatedSeries::from_terms(&self.ring, terms)
    }

    /// Matrix of a map `M^k -> M^l`, columns are images of basis vectors.
    fn matrix_of<F>(&self, basis: &[Vec<i32>], k: usize, l: usize, f: F) -> Result<ZmodMatrix>
    where
        F: Fn(&[TruncatedSeries]) -> Result<Vec<TruncatedSeries>>,
    {
        let ctx = self.ctx();
        let n = basis.len();
        let mut mat = ZmodMatrix::zeros(ctx.p(), ctx.n(), l * n, k * n);
        for col in 0..k * n {
            let mut v = vec![0u64; k * n];
            v[col] = 1;
            let elems: Vec<TruncatedSeries> =
                (0..k).map(|i| self.element(basis, &v[i * n..(i + 1) * n])).collect::<Result<_>>()?;
            let img = f(&elems)?;
            for (i, s) in img.iter().enumerate() {
                for (r, c) in self.coords(basis, s)?.into_iter().enumerate() {
                    mat.set(i * n + r, col, c);
                }
            }
        }
        Ok(mat)
    }

    /// The three differentials as matrices over `Z/p^N`.
    pub fn differentials(&self) -> Result<[ZmodMatrix; 3]> {
        let basis = self.basis();
        let a = self.matrix_of(&basis, 1, 3, |v| {
            let t = self.alpha(&v[0])?;
            Ok(vec![t.x, t.y, t.z])
        })?;
        let b = self.matrix_of(&basis, 3, 3, |v| {
            let t = self.beta(&HerrTriple::new(v[0].clone(), v[1].clone(), v[2].clone(), 1, self.twist))?;
            Ok(vec![t.x, t.y, t.z])
        })?;
        let e = self.matrix_of(&basis, 3, 1, |v| {
            Ok(vec![self.eta(&HerrTriple::new(v[0].clone(), v[1].clone(), v[2].clone(), 2, self.twist))?])
        })?;
        Ok([a, b, e])
    }

    /// `log_p |H^i|` for `i = 0..3` by linear algebra over `Z/p^N`.
    ///
    /// Only finite modules (no Laurent window, residue degree 1) are
    /// supported.
    pub fn homology_orders(&self) -> Result<HomologyOrders> {
        if self.ring.vars().iter().any(|v| v.window < 0) {
            return Err(Error::SpecMismatch("homology needs a module without Laurent window".into()));
        }
        if self.ctx().f() != 1 {
            return Err(Error::SpecMismatch("homology is implemented for residue degree 1".into()));
        }
        let ctx = self.ctx();
        let (p, n) = (ctx.p(), ctx.n());
        let dim = self.basis().len();
        let [a, b, e] = self.differentials()?;
        let image = |m: &ZmodMatrix| m.transpose().row_vecs();
        let full: Vec<Vec<u64>> = (0..dim)
            .map(|i| {
                let mut v = vec![0; dim];
                v[i] = 1;
                v
            })
            .collect();
        let h0 = subquotient_order(p, n, dim, &kernel(&a), &[])?;
        let h1 = subquotient_order(p, n, 3 * dim, &kernel(&b), &image(&a))?;
        let h2 = subquotient_order(p, n, 3 * dim, &kernel(&e), &image(&b))?;
        let h3 = subquotient_order(p, n, dim, &full, &image(&e))?;
        Ok(HomologyOrders { h: [h0, h1, h2, h3] })
    }
}

impl HerrModule {
    /// Generators of the degree-1 cocycles `ker β` (finite modules only).
    pub fn cocycle_basis(&self) -> Result<Vec<HerrTriple>> {
        if self.ring.vars().iter().any(|v| v.window < 0) || self.ctx().f() != 1 {
            return Err(Error::SpecMismatch("cocycle basis needs a finite module of residue degree 1".into()));
        }
        let basis = self.basis();
        let n = basis.len();
        let [_, b, _] = self.differentials()?;
        kernel(&b)
            .iter()
            .map(|v| {
                Ok(HerrTriple::new(
                    self.element(&basis, &v[..n])?,
                    self.element(&basis, &v[n..2 * n])?,
                    self.element(&basis, &v[2 * n..])?,
                    1,
                    self.twist,
                ))
            })
            .collect()
    }
}

/// Random `Z`-combination of `gens`.
pub fn random_combination<R: Rng>(gens: &[HerrTriple], ring: &Arc<SeriesRing>, rng: &mut R) -> Result<HerrTriple> {
    let ctx = ring.ctx().clone();
    let m = ctx.p_pow(ctx.n()) as i64;
    let mut out = HerrTriple::zero(ring, 1, gens.first().map_or(0, |g| g.twist));
    for g in gens {
        let c = ctx.q_from_i64(rng.gen_range(0..m));
        let t = HerrTriple::new(g.x.scale(&c)?, g.y.scale(&c)?, g.z.scale(&c)?, 1, g.twist);
        out = out.add(&t)?;
    }
    Ok(out)
}

/// Chooses a random unit `χ(γ)` below `p^k`.
pub fn random_unit<R: Rng>(rng: &mut R, p: u64, k: u32) -> i64 {
    let m = (p as i64).pow(k);
    loop {
        let c = rng.gen_range(1..m);
        if c % p as i64 != 0 {
            return c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn module(n: u32, caps: (i32, i32), chi: i64) -> HerrModule {
        let ctx = PadicContext::new(3, 1, n).unwrap();
        HerrModule::new(&ctx, caps, 0, 0, chi).unwrap()
    }

    #[test]
    fn delta_examples() {
        let m = module(4, (4, 2), 4);
        let r = m.ring().clone();
        let y = TruncatedSeries::var(&r, 1);
        let want = TruncatedSeries::from_int_terms(&r, &[(&[0, 1], 4), (&[1, 1], 6), (&[2, 1], 4), (&[3, 1], 1)]).unwrap();
        assert!(m.delta(&y).unwrap().eq_within(&want));
        let one = TruncatedSeries::one(&r);
        assert!(m.delta(&one).unwrap().eq_within(&TruncatedSeries::from_i64(&r, 4)));
        assert!(m.delta_inverse(&m.delta(&y).unwrap()).unwrap().eq_within(&y));
        let c = TruncatedSeries::from_i64(&r, 5);
        let want = c.scale(&r.ctx().q_inv(&r.ctx().q_from_i64(4)).unwrap()).unwrap();
        assert!(m.delta_inverse(&c).unwrap().eq_within(&want));
    }

    #[test]
    fn complex_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for chi in [4, 7] {
            let m = module(2, (4, 4), chi);
            for _ in 0..5 {
                let a = m.random_element(&mut rng).unwrap();
                assert!(m.beta(&m.alpha(&a).unwrap()).unwrap().is_zero_within());
                let t = m.random_triple(&mut rng).unwrap();
                assert!(m.eta(&m.beta(&t).unwrap()).unwrap().is_zero_within());
                let d = m.delta(&m.tau(&a).unwrap().sub(&a).unwrap()).unwrap();
                assert!(d.eq_within(&m.tau_chi(&a).unwrap().sub(&a).unwrap()));
            }
        }
    }

    #[test]
    fn constants_are_cocycles() {
        let m = module(2, (4, 4), 4);
        let c = TruncatedSeries::from_i64(m.ring(), 5);
        assert!(m.alpha(&c).unwrap().is_zero_within());
    }

    #[test]
    fn small_homology() {
        let m = module(1, (2, 2), 4);
        let h = m.homology_orders().unwrap();
        assert!(h.h[0] >= 1);
        // Euler characteristic of a finite complex of free Z/p-modules
        assert_eq!(h.h[0] as i64 - h.h[1] as i64 + h.h[2] as i64 - h.h[3] as i64, 0);
    }
}
