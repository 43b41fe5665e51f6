//! Exact arithmetic in `W = W(F_{p^f})` modulo `p^N`.
//!
//! `W` is realised as `(Z/p^N)[t]/(P)` where `P` is a monic lift of an
//! irreducible polynomial over `F_p`. The Frobenius is the `W`-algebra map
//! sending `t` to the Hensel-lifted root of `P` congruent to `t^p`.
//!
//! Two value types live here: [`WittElement`], an element of `W/p^N` bound to
//! its context, and [`RationalCoefficient`], an element of `W[1/p]` stored as
//! `p^v * unit` with an absolute precision. The latter carries no context and
//! is manipulated through the `q_*` methods of [`PadicContext`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

/// Coordinates of an element of `W/p^k` in the basis `1, t, ..., t^{f-1}`.
pub type Coords = SmallVec<[u64; 4]>;

/// Precision marker for values known exactly.
pub const EXACT: i32 = 1 << 28;

/// The ring `W(F_{p^f}) / p^N` together with its Frobenius and trace data.
#[derive(Debug)]
pub struct PadicContext {
    p: u64,
    f: usize,
    n: u32,
    pow: Vec<u64>,
    modulus: Vec<u64>,
    frob: Vec<Coords>,
    trace_basis: Vec<u64>,
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Valuation of a nonzero integer.
pub fn vp_u64(mut x: u64, p: u64) -> u32 {
    let mut v = 0;
    while x != 0 && x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

/// Valuation of a nonzero signed integer; `None` for zero.
pub fn vp_i64(x: i64, p: u64) -> Option<u32> {
    if x == 0 {
        None
    } else {
        Some(vp_u64(x.unsigned_abs(), p))
    }
}

/// `v_p(n!)` by Legendre's formula.
pub fn vp_factorial(n: u64, p: u64) -> u32 {
    let mut v = 0;
    let mut q = n / p;
    while q > 0 {
        v += q as u32;
        q /= p;
    }
    v
}

// Polynomials over F_p, low degree first, used only to pick the modulus.
fn fp_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let db = b.len() - 1;
    let inv = mod_inverse(b[db] as i128, p as i128).unwrap() as u64;
    while r.len() > db {
        let c = mulmod(*r.last().unwrap(), inv, p);
        let shift = r.len() - 1 - db;
        for (i, &bi) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - mulmod(c, bi, p)) % p;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_irreducible(poly: &[u64], p: u64) -> bool {
    let f = poly.len() - 1;
    // Trial division by every monic polynomial of degree 1..=f/2.
    for d in 1..=f / 2 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut q = Vec::with_capacity(d + 1);
            let mut k = idx;
            for _ in 0..d {
                q.push(k % p);
                k /= p;
            }
            q.push(1);
            if fp_rem(poly, &q, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Modular inverse by the extended Euclidean algorithm.
pub fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 == 1 {
        Some(s0.rem_euclid(m))
    } else {
        None
    }
}

impl PadicContext {
    /// Builds the context for `W(F_{p^f}) / p^n` with the first irreducible
    /// monic modulus in lexicographic order.
    pub fn new(p: u64, f: usize, n: u32) -> Result<Arc<Self>> {
        if !is_prime(p) || p < 3 {
            return Err(Error::InvalidContext(format!("p = {p} must be an odd prime")));
        }
        if f == 0 {
            return Err(Error::InvalidContext("f must be at least 1".into()));
        }
        let modulus = if f == 1 {
            vec![0, 1]
        } else {
            let total = p.pow(f as u32);
            let mut found = None;
            for idx in 0..total {
                let mut q = Vec::with_capacity(f + 1);
                let mut k = idx;
                for _ in 0..f {
                    q.push(k % p);
                    k /= p;
                }
                q.push(1);
                if q[0] != 0 && fp_irreducible(&q, p) {
                    found = Some(q);
                    break;
                }
            }
            found.ok_or_else(|| Error::InvalidContext("no irreducible modulus".into()))?
        };
        Self::with_modulus(p, f, n, modulus)
    }

    /// Builds the context from a given monic modulus (coefficients low degree
    /// first, as integers; they are reduced mod `p^n`).
    pub fn with_modulus(p: u64, f: usize, n: u32, modulus: Vec<u64>) -> Result<Arc<Self>> {
        if !is_prime(p) || p < 3 {
            return Err(Error::InvalidContext(format!("p = {p} must be an odd prime")));
        }
        if n == 0 {
            return Err(Error::InvalidContext("precision N must be at least 1".into()));
        }
        let top = (p as f64).ln() * n as f64;
        if top > 62.0 * std::f64::consts::LN_2 {
            return Err(Error::InvalidContext(format!("p^N = {p}^{n} exceeds 2^62")));
        }
        if modulus.len() != f + 1 || modulus[f] != 1 {
            return Err(Error::InvalidContext("modulus must be monic of degree f".into()));
        }
        let red: Vec<u64> = modulus.iter().map(|c| c % p).collect();
        if f > 1 && !fp_irreducible(&red, p) {
            return Err(Error::InvalidContext("modulus is reducible mod p".into()));
        }
        let mut pow = vec![1u64];
        for _ in 0..n {
            pow.push(pow.last().unwrap() * p);
        }
        let pn = pow[n as usize];
        let modulus: Vec<u64> = modulus.iter().map(|c| c % pn).collect();
        let mut ctx = PadicContext {
            p,
            f,
            n,
            pow,
            modulus,
            frob: Vec::new(),
            trace_basis: Vec::new(),
        };
        ctx.frob = ctx.compute_frobenius();
        ctx.trace_basis = (0..f)
            .map(|i| {
                let mut ti: Coords = smallvec![0; f];
                ti[i] = 1;
                let mut acc: Coords = smallvec![0; f];
                let mut x = ti;
                for _ in 0..f {
                    acc = ctx.c_add(&acc, &x, n);
                    x = ctx.c_frob(&x, n);
                }
                debug_assert!(acc[1..].iter().all(|&c| c == 0));
                acc[0]
            })
            .collect();
        Ok(Arc::new(ctx))
    }

    fn compute_frobenius(&self) -> Vec<Coords> {
        let (f, n) = (self.f, self.n);
        if f == 1 {
            return vec![smallvec![1]];
        }
        let mut t: Coords = smallvec![0; f];
        t[1] = 1;
        let mut r = self.c_pow(&t, self.p, n);
        for _ in 0..64 {
            let mut val: Coords = smallvec![0; f];
            let mut der: Coords = smallvec![0; f];
            let mut rk: Coords = self.c_one(n);
            for (i, &c) in self.modulus.iter().enumerate() {
                val = self.c_add(&val, &self.c_scale(&rk, c, n), n);
                if i + 1 < self.modulus.len() {
                    let ci = self.modulus[i + 1] as u128 * (i as u128 + 1) % self.pow[n as usize] as u128;
                    der = self.c_add(&der, &self.c_scale(&rk, ci as u64, n), n);
                }
                rk = self.c_mul(&rk, &r, n);
            }
            if val.iter().all(|&c| c == 0) {
                break;
            }
            let inv = self.c_inv(&der, n).expect("derivative of a separable modulus is a unit");
            r = self.c_sub(&r, &self.c_mul(&val, &inv, n), n);
        }
        let mut out = Vec::with_capacity(f);
        let mut x = self.c_one(n);
        for _ in 0..f {
            out.push(x.clone());
            x = self.c_mul(&x, &r, n);
        }
        out
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn f(&self) -> usize {
        self.f
    }
    /// Coefficient precision `N`.
    pub fn n(&self) -> u32 {
        self.n
    }
    /// `p^k` for `0 <= k <= N`.
    pub fn p_pow(&self, k: u32) -> u64 {
        self.pow[k as usize]
    }
    /// The modulus polynomial, low degree first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    /// `p^f`.
    pub fn q(&self) -> u64 {
        self.p.pow(self.f as u32)
    }

    // ---- raw coordinate arithmetic modulo p^k ----

    pub fn c_zero(&self) -> Coords {
        smallvec![0; self.f]
    }
    pub fn c_one(&self, k: u32) -> Coords {
        let mut c = self.c_zero();
        c[0] = 1 % self.pow[k as usize];
        c
    }
    pub fn c_from_i64(&self, x: i64, k: u32) -> Coords {
        let m = self.pow[k as usize] as i128;
        let mut c = self.c_zero();
        c[0] = (x as i128).rem_euclid(m) as u64;
        c
    }
    pub fn c_reduce(&self, a: &Coords, k: u32) -> Coords {
        let m = self.pow[k as usize];
        a.iter().map(|&x| x % m).collect()
    }
    pub fn c_is_zero(&self, a: &Coords) -> bool {
        a.iter().all(|&x| x == 0)
    }
    pub fn c_add(&self, a: &Coords, b: &Coords, k: u32) -> Coords {
        let m = self.pow[k as usize];
        a.iter().zip(b.iter()).map(|(&x, &y)| (x % m + y % m) % m).collect()
    }
    pub fn c_sub(&self, a: &Coords, b: &Coords, k: u32) -> Coords {
        let m = self.pow[k as usize];
        a.iter().zip(b.iter()).map(|(&x, &y)| (x % m + m - y % m) % m).collect()
    }
    pub fn c_neg(&self, a: &Coords, k: u32) -> Coords {
        let m = self.pow[k as usize];
        a.iter().map(|&x| (m - x % m) % m).collect()
    }
    /// Multiplication by an integer scalar given mod `p^N`.
    pub fn c_scale(&self, a: &Coords, s: u64, k: u32) -> Coords {
        let m = self.pow[k as usize];
        a.iter().map(|&x| mulmod(x, s % m, m)).collect()
    }
    pub fn c_mul(&self, a: &Coords, b: &Coords, k: u32) -> Coords {
        let m = self.pow[k as usize];
        let f = self.f;
        if f == 1 {
            return smallvec![mulmod(a[0], b[0], m)];
        }
        let mut prod = vec![0u128; 2 * f - 1];
        for i in 0..f {
            if a[i] == 0 {
                continue;
            }
            for j in 0..f {
                prod[i + j] = (prod[i + j] + a[i] as u128 * b[j] as u128) % m as u128;
            }
        }
        for i in (f..2 * f - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for j in 0..f {
                let s = c * (self.modulus[j] % m) as u128 % m as u128;
                prod[i - f + j] = (prod[i - f + j] + m as u128 - s) % m as u128;
            }
        }
        prod[..f].iter().map(|&x| x as u64).collect()
    }
    pub fn c_pow(&self, a: &Coords, mut e: u64, k: u32) -> Coords {
        let mut base = self.c_reduce(a, k);
        let mut acc = self.c_one(k);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.c_mul(&acc, &base, k);
            }
            base = self.c_mul(&base, &base, k);
            e >>= 1;
        }
        acc
    }
    /// Valuation of a coordinate vector; `None` when it is zero.
    pub fn c_val(&self, a: &Coords) -> Option<u32> {
        a.iter().filter(|&&x| x != 0).map(|&x| vp_u64(x, self.p)).min()
    }
    pub fn c_is_unit(&self, a: &Coords) -> bool {
        a.iter().any(|&x| x % self.p != 0)
    }
    /// Inverse modulo `p^k`, `None` if `a` is not a unit.
    pub fn c_inv(&self, a: &Coords, k: u32) -> Option<Coords> {
        if !self.c_is_unit(a) {
            return None;
        }
        if self.f == 1 {
            let m = self.pow[k as usize] as i128;
            return mod_inverse(a[0] as i128, m).map(|x| smallvec![x as u64]);
        }
        let mut y = self.c_pow(a, self.q() - 2, 1);
        let mut prec = 1;
        while prec < k {
            prec = (2 * prec).min(k);
            let ay = self.c_mul(a, &y, prec);
            let two = self.c_from_i64(2, prec);
            y = self.c_mul(&y, &self.c_sub(&two, &ay, prec), prec);
        }
        Some(self.c_reduce(&y, k))
    }
    pub fn c_frob(&self, a: &Coords, k: u32) -> Coords {
        if self.f == 1 {
            return self.c_reduce(a, k);
        }
        let mut acc = self.c_zero();
        for (i, &ai) in a.iter().enumerate() {
            if ai != 0 {
                acc = self.c_add(&acc, &self.c_scale(&self.frob[i], ai, k), k);
            }
        }
        acc
    }
    /// Applies the Frobenius `j` times.
    pub fn c_frob_pow(&self, a: &Coords, j: u32, k: u32) -> Coords {
        let mut x = self.c_reduce(a, k);
        for _ in 0..(j as usize % self.f) {
            x = self.c_frob(&x, k);
        }
        x
    }
    /// Exact division of every coordinate by `p^s`.
    pub fn c_div_p(&self, a: &Coords, s: u32) -> Coords {
        let d = self.pow[s as usize];
        a.iter()
            .map(|&x| {
                debug_assert_eq!(x % d, 0);
                x / d
            })
            .collect()
    }
    /// Multiplication by `p^s` modulo `p^k`.
    pub fn c_mul_p(&self, a: &Coords, s: u32, k: u32) -> Coords {
        if s >= k {
            return self.c_zero();
        }
        let m = self.pow[k as usize];
        let d = self.pow[s as usize];
        a.iter().map(|&x| mulmod(x, d, m)).collect()
    }
    /// Trace `W -> Z_p` modulo `p^N`.
    pub fn c_trace(&self, a: &Coords) -> u64 {
        let m = self.pow[self.n as usize];
        a.iter()
            .zip(self.trace_basis.iter())
            .fold(0u64, |acc, (&x, &t)| (acc + mulmod(x, t, m)) % m)
    }

    // ---- rational coefficients ----

    fn mk(&self, val: i32, prec: i32, unit: Coords) -> RationalCoefficient {
        RationalCoefficient { val, prec, unit }
    }

    /// Zero known modulo `p^prec`.
    pub fn q_zero_prec(&self, prec: i32) -> RationalCoefficient {
        let prec = prec.min(EXACT);
        self.mk(prec, prec, self.c_zero())
    }
    /// Exact zero.
    pub fn q_zero(&self) -> RationalCoefficient {
        self.q_zero_prec(EXACT)
    }
    pub fn q_one(&self) -> RationalCoefficient {
        self.q_from_i64(1)
    }
    /// An integer with `N` digits of relative precision.
    pub fn q_from_i64(&self, x: i64) -> RationalCoefficient {
        match vp_i64(x, self.p) {
            None => self.q_zero(),
            Some(v) => {
                let u = x / (self.p as i64).pow(v);
                self.mk(v as i32, v as i32 + self.n as i32, self.c_from_i64(u, self.n))
            }
        }
    }
    /// `num / den` with `N` digits of relative precision.
    pub fn q_from_ratio(&self, num: i64, den: i64) -> Result<RationalCoefficient> {
        if den == 0 {
            return Err(Error::NonInvertible("division by zero".into()));
        }
        let d = self.q_inv(&self.q_from_i64(den))?;
        Ok(self.q_mul(&self.q_from_i64(num), &d))
    }
    /// A big integer with `N` digits of relative precision.
    pub fn q_from_bigint(&self, x: &BigInt) -> RationalCoefficient {
        if x.is_zero() {
            return self.q_zero();
        }
        let p = BigInt::from(self.p);
        let mut u = x.clone();
        let mut v = 0i32;
        loop {
            let (q, r) = u.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            u = q;
            v += 1;
        }
        let m = BigInt::from(self.pow[self.n as usize]);
        let r = u.mod_floor(&m).to_u64().unwrap();
        let mut c = self.c_zero();
        c[0] = r;
        self.mk(v, v + self.n as i32, c)
    }
    /// An element of `W/p^k` given by coordinates, known modulo `p^prec`.
    pub fn q_from_coords(&self, a: &Coords, prec: i32) -> RationalCoefficient {
        let prec = prec.min(self.n as i32);
        let a = self.c_reduce(a, prec.max(0) as u32);
        match self.c_val(&a) {
            None => self.q_zero_prec(prec),
            Some(v) => {
                let v = v as i32;
                let rel = (prec - v) as u32;
                let u = self.c_reduce(&self.c_div_p(&a, v as u32), rel);
                self.mk(v, prec, u)
            }
        }
    }
    /// `p^s`, exact in the capped-relative sense.
    pub fn q_p_power(&self, s: i32) -> RationalCoefficient {
        self.mk(s, s + self.n as i32, self.c_one(self.n))
    }

    /// Equality up to the joint precision.
    pub fn q_eq(&self, a: &RationalCoefficient, b: &RationalCoefficient) -> bool {
        self.q_sub(a, b).is_zero()
    }
    pub fn q_is_zero(&self, a: &RationalCoefficient) -> bool {
        a.val >= a.prec
    }
    pub fn q_add(&self, a: &RationalCoefficient, b: &RationalCoefficient) -> RationalCoefficient {
        let prec = a.prec.min(b.prec);
        let v = a.val.min(b.val);
        if v >= prec {
            return self.q_zero_prec(prec);
        }
        let k = ((prec - v) as u32).min(self.n);
        let prec = v + k as i32;
        let sa = self.c_mul_p(&a.unit, (a.val - v).min(EXACT) as u32, k);
        let sb = self.c_mul_p(&b.unit, (b.val - v).min(EXACT) as u32, k);
        let s = self.c_add(&sa, &sb, k);
        match self.c_val(&s) {
            None => self.q_zero_prec(prec),
            Some(w) => {
                let unit = self.c_div_p(&s, w);
                self.mk(v + w as i32, prec, unit)
            }
        }
    }
    pub fn q_neg(&self, a: &RationalCoefficient) -> RationalCoefficient {
        if self.q_is_zero(a) {
            return a.clone();
        }
        let k = (a.prec - a.val) as u32;
        self.mk(a.val, a.prec, self.c_neg(&a.unit, k))
    }
    pub fn q_sub(&self, a: &RationalCoefficient, b: &RationalCoefficient) -> RationalCoefficient {
        self.q_add(a, &self.q_neg(b))
    }
    pub fn q_mul(&self, a: &RationalCoefficient, b: &RationalCoefficient) -> RationalCoefficient {
        let prec = (a.prec as i64 + b.val as i64).min(b.prec as i64 + a.val as i64).min(EXACT as i64) as i32;
        if self.q_is_zero(a) || self.q_is_zero(b) {
            return self.q_zero_prec(prec);
        }
        let val = a.val + b.val;
        let k = (prec - val) as u32;
        self.mk(val, prec, self.c_mul(&a.unit, &b.unit, k))
    }
    pub fn q_inv(&self, a: &RationalCoefficient) -> Result<RationalCoefficient> {
        if self.q_is_zero(a) {
            return Err(Error::NonInvertible("zero coefficient".into()));
        }
        let k = (a.prec - a.val) as u32;
        let u = self.c_inv(&a.unit, k).expect("stored unit part is a unit");
        Ok(self.mk(-a.val, a.prec - 2 * a.val, u))
    }
    pub fn q_div(&self, a: &RationalCoefficient, b: &RationalCoefficient) -> Result<RationalCoefficient> {
        Ok(self.q_mul(a, &self.q_inv(b)?))
    }
    /// Multiplication by `p^s` (any sign); precision shifts with the value.
    pub fn q_shift(&self, a: &RationalCoefficient, s: i32) -> RationalCoefficient {
        if self.q_is_zero(a) {
            return self.q_zero_prec((a.prec + s).min(EXACT));
        }
        self.mk(a.val + s, a.prec + s, a.unit.clone())
    }
    pub fn q_frob(&self, a: &RationalCoefficient) -> RationalCoefficient {
        self.q_frob_pow(a, 1)
    }
    pub fn q_frob_pow(&self, a: &RationalCoefficient, j: u32) -> RationalCoefficient {
        if self.q_is_zero(a) || self.f == 1 {
            return a.clone();
        }
        let k = (a.prec - a.val) as u32;
        self.mk(a.val, a.prec, self.c_frob_pow(&a.unit, j, k))
    }
    /// Lowers the absolute precision to at most `prec`.
    pub fn q_clamp(&self, a: &RationalCoefficient, prec: i32) -> RationalCoefficient {
        if a.prec <= prec {
            return a.clone();
        }
        if a.val >= prec {
            return self.q_zero_prec(prec);
        }
        let k = (prec - a.val) as u32;
        self.mk(a.val, prec, self.c_reduce(&a.unit, k))
    }
    /// Reduces an integral value to coordinates modulo `p^k`. Fails if the
    /// value is not integral or not known to that precision.
    pub fn q_to_coords(&self, a: &RationalCoefficient, k: u32) -> Result<Coords> {
        if self.q_is_zero(a) {
            if a.prec < k as i32 {
                return Err(Error::PrecisionExhausted(format!(
                    "zero known mod p^{} but p^{} requested",
                    a.prec, k
                )));
            }
            return Ok(self.c_zero());
        }
        if a.val < 0 {
            return Err(Error::IntegralityFailure { location: "coefficient".into(), valuation: a.val });
        }
        if a.prec < k as i32 {
            return Err(Error::PrecisionExhausted(format!("value known mod p^{} but p^{} requested", a.prec, k)));
        }
        if a.val as u32 >= k {
            return Ok(self.c_zero());
        }
        Ok(self.c_mul_p(&a.unit, a.val as u32, k))
    }
    /// Trace to `Q_p` of a rational coefficient.
    pub fn q_trace(&self, a: &RationalCoefficient) -> RationalCoefficient {
        if self.q_is_zero(a) {
            return a.clone();
        }
        let k = (a.prec - a.val) as u32;
        let t = self.c_trace(&a.unit) % self.pow[k as usize];
        let c = self.q_from_coords(&{
            let mut c = self.c_zero();
            c[0] = t;
            c
        }, k as i32);
        self.q_shift(&c, a.val)
    }

    /// Renders a coefficient as `a` or `a/D` (f = 1) using rational
    /// reconstruction when a small fraction exists, else as a polynomial in `t`.
    pub fn q_to_string(&self, a: &RationalCoefficient) -> String {
        if self.q_is_zero(a) {
            return "0".into();
        }
        let k = (a.prec - a.val) as u32;
        let m = self.pow[k as usize];
        let render = |x: u64| -> (i128, i128) {
            rational_reconstruct(x as i128, m as i128).unwrap_or_else(|| {
                let s = if x > m / 2 { x as i128 - m as i128 } else { x as i128 };
                (s, 1)
            })
        };
        let scale = |num: i128, den: i128| -> String {
            let (mut num, mut den) = (num, den);
            if a.val >= 0 {
                num *= (self.p as i128).pow(a.val as u32);
            } else {
                den *= (self.p as i128).pow((-a.val) as u32);
            }
            if den == 1 {
                format!("{num}")
            } else {
                format!("{num}/{den}")
            }
        };
        if self.f == 1 {
            let (n, d) = render(a.unit[0]);
            return scale(n, d);
        }
        let mut parts = Vec::new();
        for (i, &c) in a.unit.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (n, d) = render(c);
            let s = scale(n, d);
            parts.push(match i {
                0 => s,
                1 => format!("{s}*t"),
                _ => format!("{s}*t^{i}"),
            });
        }
        format!("({})", parts.join(" + "))
    }
}

/// Finds `n/d` with `|n|, d <= sqrt(m/2)` and `n/d = x mod m`.
pub fn rational_reconstruct(x: i128, m: i128) -> Option<(i128, i128)> {
    let bound = ((m / 2) as f64).sqrt() as i128;
    let (mut r0, mut r1) = (m, x.rem_euclid(m));
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if t1 == 0 || t1.abs() > bound || num_integer::gcd(r1, t1) != 1 {
        return None;
    }
    if t1 < 0 {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

/// An element `p^val * unit` of `W[1/p]` known modulo `p^prec`.
///
/// The tagged zero has `val == prec` and a zero unit. The unit is stored
/// modulo `p^(prec - val)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalCoefficient {
    val: i32,
    prec: i32,
    unit: Coords,
}

impl RationalCoefficient {
    /// Valuation, `None` for the tagged zero.
    pub fn valuation(&self) -> Option<i32> {
        if self.val >= self.prec {
            None
        } else {
            Some(self.val)
        }
    }
    /// Absolute precision: the value is known modulo `p^precision`.
    pub fn precision(&self) -> i32 {
        self.prec
    }
    pub fn unit_part(&self) -> &Coords {
        &self.unit
    }
    pub fn is_zero(&self) -> bool {
        self.val >= self.prec
    }
}

/// An element of `W/p^N` bound to its context.
#[derive(Clone)]
pub struct WittElement {
    ctx: Arc<PadicContext>,
    coords: Coords,
}

impl fmt::Debug for WittElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WittElement({:?} mod {}^{})", self.coords.as_slice(), self.ctx.p, self.ctx.n)
    }
}

impl PartialEq for WittElement {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.p == other.ctx.p && self.ctx.f == other.ctx.f && self.coords == other.coords
    }
}
impl Eq for WittElement {}

/// JSON form of a [`WittElement`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct WittJson {
    pub coords: Vec<String>,
    pub p: u64,
    pub f: usize,
    #[serde(rename = "N")]
    pub n: u32,
}

impl WittElement {
    pub fn new(ctx: &Arc<PadicContext>, coords: &[u64]) -> Result<Self> {
        if coords.len() != ctx.f {
            return Err(Error::SpecMismatch(format!("expected {} coordinates", ctx.f)));
        }
        let c: Coords = coords.iter().copied().collect();
        Ok(WittElement { ctx: ctx.clone(), coords: ctx.c_reduce(&c, ctx.n) })
    }
    pub fn from_i64(ctx: &Arc<PadicContext>, x: i64) -> Self {
        WittElement { ctx: ctx.clone(), coords: ctx.c_from_i64(x, ctx.n) }
    }
    pub fn from_coords(ctx: &Arc<PadicContext>, coords: Coords) -> Self {
        WittElement { ctx: ctx.clone(), coords: ctx.c_reduce(&coords, ctx.n) }
    }
    /// The polynomial generator `t` (zero when `f = 1`).
    pub fn generator(ctx: &Arc<PadicContext>) -> Self {
        let mut c = ctx.c_zero();
        if ctx.f > 1 {
            c[1] = 1;
        }
        WittElement { ctx: ctx.clone(), coords: c }
    }
    pub fn context(&self) -> &Arc<PadicContext> {
        &self.ctx
    }
    pub fn coords(&self) -> &Coords {
        &self.coords
    }
    pub fn is_zero(&self) -> bool {
        self.ctx.c_is_zero(&self.coords)
    }
    pub fn is_unit(&self) -> bool {
        self.ctx.c_is_unit(&self.coords)
    }
    pub fn valuation(&self) -> Option<u32> {
        self.ctx.c_val(&self.coords)
    }
    pub fn frobenius(&self) -> Self {
        WittElement { ctx: self.ctx.clone(), coords: self.ctx.c_frob(&self.coords, self.ctx.n) }
    }
    pub fn pow(&self, e: u64) -> Self {
        WittElement { ctx: self.ctx.clone(), coords: self.ctx.c_pow(&self.coords, e, self.ctx.n) }
    }
    pub fn inverse(&self) -> Result<Self> {
        let c = self
            .ctx
            .c_inv(&self.coords, self.ctx.n)
            .ok_or_else(|| Error::NonInvertible("Witt element is not a unit".into()))?;
        Ok(WittElement { ctx: self.ctx.clone(), coords: c })
    }
    /// Trace to `Z_p`, returned as an integer in `[0, p^N)`.
    pub fn trace(&self) -> u64 {
        self.ctx.c_trace(&self.coords)
    }
    /// Converts to a rational coefficient known modulo `p^N`.
    pub fn to_rational(&self) -> RationalCoefficient {
        self.ctx.q_from_coords(&self.coords, self.ctx.n as i32)
    }
    pub fn to_json(&self) -> WittJson {
        WittJson {
            coords: self.coords.iter().map(|c| c.to_string()).collect(),
            p: self.ctx.p,
            f: self.ctx.f,
            n: self.ctx.n,
        }
    }
    /// Parses the JSON form, building a fresh context with the default modulus.
    pub fn from_json(j: &WittJson) -> Result<Self> {
        let ctx = PadicContext::new(j.p, j.f, j.n)?;
        let coords: std::result::Result<Vec<u64>, _> = j.coords.iter().map(|s| s.parse::<u64>()).collect();
        let coords = coords.map_err(|e| Error::ParseError { position: 0, message: e.to_string() })?;
        WittElement::new(&ctx, &coords)
    }
}

/// Teichmüller lift of a residue-field element given by coordinates mod `p`.
pub fn teichmuller(ctx: &Arc<PadicContext>, residue: &[u64]) -> Result<WittElement> {
    if residue.len() != ctx.f {
        return Err(Error::SpecMismatch(format!("expected {} coordinates", ctx.f)));
    }
    let r: Coords = residue.iter().map(|&x| x % ctx.p).collect();
    let mut x = r;
    for _ in 0..=ctx.n {
        let y = ctx.c_pow(&x, ctx.q(), ctx.n);
        if y == x {
            break;
        }
        x = y;
    }
    Ok(WittElement { ctx: ctx.clone(), coords: x })
}

/// `binom(u, n)` for `u` known modulo `p^prec`, returned modulo
/// `p^(prec - v_p(n!))` together with that precision.
pub fn padic_binomial(p: u64, u: &BigInt, n: u64, prec: u32) -> Result<(BigInt, u32)> {
    let loss = vp_factorial(n, p);
    if prec <= loss {
        return Err(Error::PrecisionExhausted(format!(
            "binomial of order {n} loses {loss} digits of {prec}"
        )));
    }
    let out = prec - loss;
    let modulus = BigInt::from(p).pow(prec);
    let lift = u.mod_floor(&modulus);
    let b = binomial_exact(&lift, n);
    Ok((b.mod_floor(&BigInt::from(p).pow(out)), out))
}

/// `v_p` of a nonzero big integer (`u32::MAX` for zero).
pub fn vp_bigint(x: &BigInt, p: u64) -> u32 {
    if x.is_zero() {
        return u32::MAX;
    }
    let pb = BigInt::from(p);
    let mut u = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = u.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        u = q;
        v += 1;
    }
}

/// Exact `binom(u, n)` for an arbitrary integer `u`.
pub fn binomial_exact(u: &BigInt, n: u64) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..n {
        num *= u - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// `binom(u, n)` reduced modulo `m` for small integer `u` (exact arithmetic).
pub fn binomial_mod(u: i64, n: u64, m: u64) -> u64 {
    let b = binomial_exact(&BigInt::from(u), n);
    let r = b.mod_floor(&BigInt::from(m));
    if r.is_negative() {
        unreachable!()
    }
    r.to_u64().unwrap()
}

macro_rules! witt_binop {
    ($tr:ident, $m:ident, $op:ident) => {
        impl $tr for &WittElement {
            type Output = WittElement;
            fn $m(self, rhs: &WittElement) -> WittElement {
                assert!(Arc::ptr_eq(&self.ctx, &rhs.ctx) || self.ctx.p == rhs.ctx.p, "context mismatch");
                WittElement { ctx: self.ctx.clone(), coords: self.ctx.$op(&self.coords, &rhs.coords, self.ctx.n) }
            }
        }
        impl $tr for WittElement {
            type Output = WittElement;
            fn $m(self, rhs: WittElement) -> WittElement {
                (&self).$m(&rhs)
            }
        }
    };
}
witt_binop!(Add, add, c_add);
witt_binop!(Sub, sub, c_sub);
witt_binop!(Mul, mul, c_mul);

impl Neg for &WittElement {
    type Output = WittElement;
    fn neg(self) -> WittElement {
        WittElement { ctx: self.ctx.clone(), coords: self.ctx.c_neg(&self.coords, self.ctx.n) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_identity_when_f_is_one() {
        let ctx = PadicContext::new(3, 1, 3).unwrap();
        let x = WittElement::from_i64(&ctx, 5);
        assert_eq!(x.frobenius(), x);
    }

    #[test]
    fn frobenius_of_generator_is_other_root() {
        let ctx = PadicContext::new(3, 2, 2).unwrap();
        let t = WittElement::generator(&ctx);
        let s = t.frobenius();
        assert_ne!(s, t);
        // s is a root of the modulus and s ≡ t^3 mod 3
        let m = ctx.modulus();
        let mut acc = WittElement::from_i64(&ctx, 0);
        let mut pw = WittElement::from_i64(&ctx, 1);
        for &c in m {
            acc = &acc + &(&pw * &WittElement::from_i64(&ctx, c as i64));
            pw = &pw * &s;
        }
        assert!(acc.is_zero());
        let t3 = t.pow(3);
        let d = &s - &t3;
        assert!(d.coords().iter().all(|c| c % 3 == 0));
        assert_eq!(s.frobenius(), t);
    }

    #[test]
    fn trace_examples() {
        let c1 = PadicContext::new(3, 1, 3).unwrap();
        assert_eq!(WittElement::from_i64(&c1, 7).trace(), 7);
        let c2 = PadicContext::new(3, 2, 3).unwrap();
        assert_eq!(WittElement::from_i64(&c2, 1).trace(), 2);
        let t = WittElement::generator(&c2);
        let expected = (27 - c2.modulus()[1] % 27) % 27;
        assert_eq!(t.trace(), expected);
    }

    #[test]
    fn teichmuller_examples() {
        let c = PadicContext::new(3, 1, 3).unwrap();
        assert_eq!(teichmuller(&c, &[2]).unwrap().coords()[0], 26);
        assert_eq!(teichmuller(&c, &[1]).unwrap().coords()[0], 1);
        let c5 = PadicContext::new(5, 1, 2).unwrap();
        assert_eq!(teichmuller(&c5, &[2]).unwrap().coords()[0], 7);
    }

    #[test]
    fn binomial_examples() {
        let (b, pr) = padic_binomial(3, &BigInt::from(4), 2, 6).unwrap();
        assert_eq!((b, pr), (BigInt::from(6), 6));
        let (b, pr) = padic_binomial(3, &BigInt::from(4), 3, 4).unwrap();
        assert_eq!((b, pr), (BigInt::from(4), 3));
        let (b, _) = padic_binomial(3, &BigInt::from(123), 0, 2).unwrap();
        assert_eq!(b, BigInt::from(1));
        assert!(padic_binomial(3, &BigInt::from(5), 9, 4).is_err());
    }

    #[test]
    fn rational_arithmetic_tracks_valuation() {
        let c = PadicContext::new(3, 1, 6).unwrap();
        let third = c.q_from_ratio(1, 3).unwrap();
        assert_eq!(third.valuation(), Some(-1));
        let one = c.q_mul(&third, &c.q_from_i64(3));
        assert_eq!(one, c.q_one());
        let x = c.q_add(&third, &c.q_neg(&third));
        assert!(x.is_zero());
        assert_eq!(c.q_to_string(&c.q_from_ratio(-1, 2).unwrap()), "-1/2");
        assert_eq!(c.q_to_string(&c.q_from_ratio(5, 9).unwrap()), "5/9");
    }

    #[test]
    fn reject_even_prime() {
        assert!(PadicContext::new(2, 1, 4).is_err());
        assert!(PadicContext::new(9, 1, 4).is_err());
    }
}
