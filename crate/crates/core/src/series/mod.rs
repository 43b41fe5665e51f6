//! Truncated multivariate power and Laurent series over `W/p^N` or `W[1/p]`.
//!
//! A [`SeriesRing`] fixes the variables, their degree caps and Laurent
//! windows, an optional total-degree cap, and the coefficient kind. Every
//! [`TruncatedSeries`] carries an [`Uncertainty`] describing the monomial
//! ideal beyond which it is unknown and the `p`-adic precision of its
//! implicit zero coefficients.

mod analytic;
mod laurent;
mod ops;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::padic::{PadicContext, RationalCoefficient, EXACT};

pub use analytic::{GBeltReport, GBeltSpec, Slope};
pub use laurent::AnnulusInverse;

/// Exponent tuple, one entry per variable.
pub type Exp = SmallVec<[i32; 4]>;

/// Bound used for monomial directions in which a series is exactly known.
pub const UNBOUNDED: i32 = 1 << 28;

/// Coefficient domain of a ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoeffKind {
    /// `W/p^N`: absolute precision capped at `N`, negative valuations rejected.
    Integral,
    /// `W[1/p]` with `N` digits of relative precision.
    Rational,
}

/// How `φ`, `γ` and `τ` act on a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    /// `X`: `φ(X) = (1+X)^p - 1`, `γ(X) = (1+X)^χ - 1`, `τ(X) = X`.
    Cyclotomic,
    /// `Y`: `φ(Y) = Y^p`, `γ(Y) = Y`, `τ(Y) = Y(1+X)`.
    Kummer,
    /// Formal-group variable: `φ(T) = T^p`, no group action.
    Plain,
}

/// One variable of a ring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    /// Exponents are stored only below this cap.
    pub cap: i32,
    /// Hard lower bound for exponents (0 for power series).
    pub window: i32,
}

impl Variable {
    pub fn new(name: &str, kind: VarKind, cap: i32, window: i32) -> Self {
        Variable { name: name.into(), kind, cap, window }
    }
}

/// Ring of truncated series.
#[derive(Debug)]
pub struct SeriesRing {
    ctx: Arc<PadicContext>,
    kind: CoeffKind,
    vars: Vec<Variable>,
    total_cap: Option<i32>,
}

impl PartialEq for SeriesRing {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.ctx, &other.ctx)
            || (self.ctx.p() == other.ctx.p() && self.ctx.f() == other.ctx.f() && self.ctx.n() == other.ctx.n()))
            && self.kind == other.kind
            && self.vars == other.vars
            && self.total_cap == other.total_cap
    }
}

impl SeriesRing {
    pub fn new(
        ctx: &Arc<PadicContext>,
        kind: CoeffKind,
        vars: Vec<Variable>,
        total_cap: Option<i32>,
    ) -> Result<Arc<Self>> {
        if vars.is_empty() {
            return Err(Error::SpecMismatch("a ring needs at least one variable".into()));
        }
        for v in &vars {
            if v.window > 0 || v.cap <= v.window {
                return Err(Error::SpecMismatch(format!("bad window/cap for {}", v.name)));
            }
        }
        Ok(Arc::new(SeriesRing { ctx: ctx.clone(), kind, vars, total_cap }))
    }

    /// One-variable ring.
    pub fn univariate(
        ctx: &Arc<PadicContext>,
        kind: CoeffKind,
        name: &str,
        vkind: VarKind,
        cap: i32,
        window: i32,
    ) -> Result<Arc<Self>> {
        Self::new(ctx, kind, vec![Variable::new(name, vkind, cap, window)], None)
    }

    /// The two-variable ring in `X` (cyclotomic) and `Y` (Kummer).
    pub fn bivariate(
        ctx: &Arc<PadicContext>,
        kind: CoeffKind,
        caps: (i32, i32),
        windows: (i32, i32),
    ) -> Result<Arc<Self>> {
        Self::new(
            ctx,
            kind,
            vec![
                Variable::new("X", VarKind::Cyclotomic, caps.0, windows.0),
                Variable::new("Y", VarKind::Kummer, caps.1, windows.1),
            ],
            None,
        )
    }

    pub fn ctx(&self) -> &Arc<PadicContext> {
        &self.ctx
    }
    pub fn kind(&self) -> CoeffKind {
        self.kind
    }
    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }
    pub fn nvars(&self) -> usize {
        self.vars.len()
    }
    pub fn total_cap(&self) -> Option<i32> {
        self.total_cap
    }
    pub fn caps(&self) -> Vec<i32> {
        self.vars.iter().map(|v| v.cap).collect()
    }
    /// Index of the variable with the given name.
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }
    /// Index of the first variable of the given kind.
    pub fn var_of_kind(&self, kind: VarKind) -> Option<usize> {
        self.vars.iter().position(|v| v.kind == kind)
    }

    /// Same ring with another coefficient kind.
    pub fn with_kind(&self, kind: CoeffKind) -> Arc<Self> {
        Arc::new(SeriesRing { ctx: self.ctx.clone(), kind, vars: self.vars.clone(), total_cap: self.total_cap })
    }

    /// Same ring with caps and windows multiplied by `factor`.
    pub fn scaled(&self, factor: i32) -> Arc<Self> {
        let vars = self
            .vars
            .iter()
            .map(|v| Variable { cap: v.cap * factor, window: v.window * factor, ..v.clone() })
            .collect();
        Arc::new(SeriesRing {
            ctx: self.ctx.clone(),
            kind: self.kind,
            vars,
            total_cap: self.total_cap.map(|t| t * factor),
        })
    }

    /// Same ring with new caps and windows.
    pub fn with_caps(&self, caps: &[i32], windows: &[i32]) -> Result<Arc<Self>> {
        let vars = self
            .vars
            .iter()
            .zip(caps.iter().zip(windows.iter()))
            .map(|(v, (&c, &w))| Variable { cap: c, window: w, ..v.clone() })
            .collect();
        Self::new(&self.ctx, self.kind, vars, self.total_cap)
    }

    /// Same ring over another coefficient context.
    pub fn with_context(&self, ctx: &Arc<PadicContext>) -> Arc<Self> {
        Arc::new(SeriesRing { ctx: ctx.clone(), kind: self.kind, vars: self.vars.clone(), total_cap: self.total_cap })
    }

    pub(crate) fn in_bounds(&self, e: &[i32]) -> bool {
        e.iter().zip(self.vars.iter()).all(|(&x, v)| x < v.cap)
            && self.total_cap.is_none_or(|t| e.iter().sum::<i32>() < t)
    }

    pub(crate) fn normalize(&self, c: RationalCoefficient) -> RationalCoefficient {
        match self.kind {
            CoeffKind::Integral => self.ctx.q_clamp(&c, self.ctx.n() as i32),
            CoeffKind::Rational => c,
        }
    }

    fn exact_unc(&self) -> Uncertainty {
        Uncertainty { p_floor: self.default_floor(), bounds: vec![UNBOUNDED; self.vars.len()], total: None }
    }

    fn default_floor(&self) -> i32 {
        match self.kind {
            CoeffKind::Integral => self.ctx.n() as i32,
            CoeffKind::Rational => EXACT,
        }
    }
}

/// Shifts a precision floor by a valuation; exact floors stay exact.
fn shift_floor(pf: i32, v: i32) -> i32 {
    if pf >= EXACT / 2 || v >= EXACT / 2 {
        EXACT
    } else {
        (pf as i64 + v as i64).clamp(-(EXACT as i64), EXACT as i64) as i32
    }
}

/// The ideal modulo which a series is known.
///
/// A monomial is known iff every exponent is below `bounds` and the total
/// degree is below `total`. Coefficients absent from the support are zero
/// modulo `p^p_floor`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Uncertainty {
    pub p_floor: i32,
    pub bounds: Vec<i32>,
    pub total: Option<i32>,
}

impl Uncertainty {
    fn contains(&self, e: &[i32]) -> bool {
        e.iter().zip(self.bounds.iter()).all(|(&x, &b)| x < b) && self.total.is_none_or(|t| e.iter().sum::<i32>() < t)
    }
    fn meet(&self, other: &Uncertainty) -> Uncertainty {
        Uncertainty {
            p_floor: self.p_floor.min(other.p_floor),
            bounds: self.bounds.iter().zip(other.bounds.iter()).map(|(&a, &b)| a.min(b)).collect(),
            total: match (self.total, other.total) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        }
    }
}

/// A truncated series.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    ring: Arc<SeriesRing>,
    terms: BTreeMap<Exp, RationalCoefficient>,
    unc: Uncertainty,
}

/// Accumulates scaled series into a result, tracking uncertainty.
pub(crate) struct Accumulator {
    ring: Arc<SeriesRing>,
    map: HashMap<Exp, RationalCoefficient>,
    unc: Uncertainty,
}

impl Accumulator {
    pub(crate) fn new(ring: &Arc<SeriesRing>) -> Self {
        Accumulator {
            ring: ring.clone(),
            map: HashMap::new(),
            unc: ring.exact_unc(),
        }
    }

    pub(crate) fn restrict(&mut self, unc: &Uncertainty) {
        self.unc = self.unc.meet(unc);
    }

    pub(crate) fn add_term(&mut self, e: Exp, c: RationalCoefficient) {
        let ctx = self.ring.ctx.clone();
        match self.map.get_mut(&e) {
            Some(x) => *x = ctx.q_add(x, &c),
            None => {
                self.map.insert(e, c);
            }
        }
    }

    /// Adds `c * s`.
    pub(crate) fn add_scaled(&mut self, s: &TruncatedSeries, c: &RationalCoefficient) {
        let ctx = self.ring.ctx.clone();
        let cv = c.valuation().unwrap_or(c.precision());
        let mut u = s.unc.clone();
        u.p_floor = shift_floor(s.unc.p_floor, cv);
        self.restrict(&u);
        for (e, x) in &s.terms {
            self.add_term(e.clone(), ctx.q_mul(x, c));
        }
    }

    pub(crate) fn finish(self) -> Result<TruncatedSeries> {
        let mut out = TruncatedSeries { ring: self.ring.clone(), terms: BTreeMap::new(), unc: self.unc };
        for (e, c) in self.map {
            out.insert(e, c)?;
        }
        Ok(out)
    }
}

impl TruncatedSeries {
    // ---- construction ----

    pub fn zero(ring: &Arc<SeriesRing>) -> Self {
        TruncatedSeries {
            ring: ring.clone(),
            terms: BTreeMap::new(),
            unc: ring.exact_unc(),
        }
    }

    pub fn constant(ring: &Arc<SeriesRing>, c: RationalCoefficient) -> Result<Self> {
        let e: Exp = SmallVec::from_elem(0, ring.nvars());
        Self::monomial(ring, &e, c)
    }

    pub fn from_i64(ring: &Arc<SeriesRing>, c: i64) -> Self {
        Self::constant(ring, ring.ctx.q_from_i64(c)).expect("constants fit every ring")
    }

    pub fn one(ring: &Arc<SeriesRing>) -> Self {
        Self::from_i64(ring, 1)
    }

    /// `c * prod var_i^e_i`.
    pub fn monomial(ring: &Arc<SeriesRing>, e: &[i32], c: RationalCoefficient) -> Result<Self> {
        let mut s = Self::zero(ring);
        s.insert(e.iter().copied().collect(), c)?;
        Ok(s)
    }

    /// The variable with index `i`.
    pub fn var(ring: &Arc<SeriesRing>, i: usize) -> Self {
        let mut e: Exp = SmallVec::from_elem(0, ring.nvars());
        e[i] = 1;
        Self::monomial(ring, &e, ring.ctx.q_one()).expect("degree one fits")
    }

    /// Builds a series from `(exponents, integer)` pairs.
    pub fn from_int_terms(ring: &Arc<SeriesRing>, terms: &[(&[i32], i64)]) -> Result<Self> {
        let mut s = Self::zero(ring);
        for (e, c) in terms {
            let c = ring.ctx.q_from_i64(*c);
            let m = Self::monomial(ring, e, c)?;
            s = s.add(&m)?;
        }
        Ok(s)
    }

    /// Builds a series from `(exponents, coefficient)` pairs.
    pub fn from_terms<I>(ring: &Arc<SeriesRing>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exp, RationalCoefficient)>,
    {
        let mut acc = Accumulator::new(ring);
        for (e, c) in terms {
            if e.len() != ring.nvars() {
                return Err(Error::SpecMismatch("exponent length".into()));
            }
            acc.add_term(e, c);
        }
        acc.finish()
    }

    /// Builds a univariate series from a coefficient list starting at `low`.
    pub fn from_univariate(ring: &Arc<SeriesRing>, low: i32, coeffs: &[i64]) -> Result<Self> {
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (SmallVec::from_slice(&[low + i as i32]), ring.ctx.q_from_i64(c)));
        Self::from_terms(ring, terms)
    }

    /// Stores a coefficient, applying truncation, integrality and window rules.
    pub(crate) fn insert(&mut self, e: Exp, c: RationalCoefficient) -> Result<()> {
        let c = self.ring.normalize(c);
        if !self.unc.contains(&e) {
            return Ok(());
        }
        if !self.ring.in_bounds(&e) {
            if !c.is_zero() {
                self.lower_to_caps(&e);
            }
            return Ok(());
        }
        if c.is_zero() {
            // cancelled coefficients are dropped without lowering the floor
            self.terms.remove(&e);
            return Ok(());
        }
        for (x, v) in e.iter().zip(self.ring.vars.iter()) {
            if *x < v.window {
                return Err(Error::WindowOverflow { var: v.name.clone(), exponent: *x, bound: v.window });
            }
        }
        if self.ring.kind == CoeffKind::Integral && c.valuation().unwrap() < 0 {
            return Err(Error::IntegralityFailure {
                location: self.format_exp(&e),
                valuation: c.valuation().unwrap(),
            });
        }
        self.terms.insert(e, c);
        Ok(())
    }

    /// Records that a term beyond the caps was dropped.
    fn lower_to_caps(&mut self, e: &[i32]) {
        for (i, v) in self.ring.vars.iter().enumerate() {
            if e[i] >= v.cap {
                self.unc.bounds[i] = self.unc.bounds[i].min(v.cap);
            }
        }
        if let Some(t) = self.ring.total_cap {
            if e.iter().sum::<i32>() >= t {
                self.unc.total = Some(self.unc.total.map_or(t, |x| x.min(t)));
            }
        }
        let keep: Vec<Exp> = self.terms.keys().filter(|e| !self.unc.contains(e)).cloned().collect();
        for e in keep {
            self.terms.remove(&e);
        }
    }

    pub(crate) fn with_uncertainty(mut self, unc: &Uncertainty) -> Self {
        self.unc = self.unc.meet(unc);
        let keep: Vec<Exp> = self.terms.keys().filter(|e| !self.unc.contains(e)).cloned().collect();
        for e in keep {
            self.terms.remove(&e);
        }
        self
    }

    // ---- access ----

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }
    pub fn ctx(&self) -> &Arc<PadicContext> {
        &self.ring.ctx
    }
    pub fn terms(&self) -> &BTreeMap<Exp, RationalCoefficient> {
        &self.terms
    }
    pub fn uncertainty(&self) -> &Uncertainty {
        &self.unc
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    /// Coefficient of a monomial (the tagged zero when absent).
    pub fn coeff(&self, e: &[i32]) -> RationalCoefficient {
        self.terms.get(e).cloned().unwrap_or_else(|| self.ring.ctx.q_zero_prec(self.unc.p_floor))
    }
    /// Coefficient of a univariate monomial.
    pub fn coeff1(&self, k: i32) -> RationalCoefficient {
        self.coeff(&[k])
    }
    /// Whether a monomial lies inside the known region.
    pub fn is_known(&self, e: &[i32]) -> bool {
        self.unc.contains(e)
    }
    /// True when every known coefficient vanishes.
    pub fn is_zero_within(&self) -> bool {
        self.terms.keys().all(|e| !self.unc.contains(e))
    }
    /// Equality modulo the joint uncertainty.
    pub fn eq_within(&self, other: &TruncatedSeries) -> bool {
        match self.sub(other) {
            Ok(d) => d.is_zero_within(),
            Err(_) => false,
        }
    }
    /// Congruence modulo `p^k` inside the joint known region.
    pub fn congruent_mod(&self, other: &TruncatedSeries, k: i32) -> bool {
        match self.sub(other) {
            Ok(d) => d.terms.values().all(|c| c.valuation().is_none_or(|v| v >= k)),
            Err(_) => false,
        }
    }
    /// Minimum valuation over stored coefficients.
    pub fn min_valuation(&self) -> Option<i32> {
        self.terms.values().filter_map(|c| c.valuation()).min()
    }
    fn min_valuation_or_floor(&self) -> i32 {
        self.min_valuation().unwrap_or(self.unc.p_floor)
    }
    /// Minimum absolute precision over stored coefficients and implicit zeros.
    pub fn precision_floor(&self) -> i32 {
        self.terms.values().map(|c| c.precision()).fold(self.unc.p_floor, i32::min)
    }
    /// Lowest exponent of variable `i` in the support.
    pub fn order_in(&self, i: usize) -> Option<i32> {
        self.terms.keys().map(|e| e[i]).min()
    }
    /// Lowest total degree in the support.
    pub fn total_order(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }
    /// Whether only variable `i` occurs.
    pub fn depends_only_on(&self, i: usize) -> bool {
        self.terms.keys().all(|e| e.iter().enumerate().all(|(j, &x)| j == i || x == 0))
    }

    fn check_ring(&self, other: &TruncatedSeries) -> Result<()> {
        if Arc::ptr_eq(&self.ring, &other.ring) || *self.ring == *other.ring {
            Ok(())
        } else {
            Err(Error::SpecMismatch("operands live in different series rings".into()))
        }
    }

    // ---- arithmetic ----

    pub fn add(&self, other: &TruncatedSeries) -> Result<Self> {
        self.check_ring(other)?;
        let ctx = &self.ring.ctx;
        let mut out = TruncatedSeries { ring: self.ring.clone(), terms: BTreeMap::new(), unc: self.unc.meet(&other.unc) };
        let mut merged: BTreeMap<Exp, RationalCoefficient> = self.terms.clone();
        for (e, c) in &other.terms {
            match merged.get_mut(e) {
                Some(x) => *x = ctx.q_add(x, c),
                None => {
                    merged.insert(e.clone(), c.clone());
                }
            }
        }
        for (e, c) in merged {
            // absent coefficients carry the other operand's floor
            let c = if !self.terms.contains_key(&e) {
                ctx.q_add(&c, &ctx.q_zero_prec(self.unc.p_floor))
            } else if !other.terms.contains_key(&e) {
                ctx.q_add(&c, &ctx.q_zero_prec(other.unc.p_floor))
            } else {
                c
            };
            out.insert(e, c)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let ctx = &self.ring.ctx;
        TruncatedSeries {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), ctx.q_neg(c))).collect(),
            unc: self.unc.clone(),
        }
    }

    pub fn sub(&self, other: &TruncatedSeries) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Multiplication by a coefficient.
    pub fn scale(&self, c: &RationalCoefficient) -> Result<Self> {
        let mut acc = Accumulator::new(&self.ring);
        acc.add_scaled(self, c);
        acc.finish()
    }

    pub fn scale_i64(&self, c: i64) -> Result<Self> {
        self.scale(&self.ring.ctx.q_from_i64(c))
    }

    /// Multiplication by `p^s` (`s` may be negative in a rational ring).
    pub fn mul_p_power(&self, s: i32) -> Result<Self> {
        let ctx = &self.ring.ctx;
        let mut out = TruncatedSeries { ring: self.ring.clone(), terms: BTreeMap::new(), unc: self.unc.clone() };
        out.unc.p_floor = shift_floor(out.unc.p_floor, s);
        for (e, c) in &self.terms {
            out.insert(e.clone(), ctx.q_shift(c, s))?;
        }
        Ok(out)
    }

    /// Division by an integer, which must be a unit in an integral ring.
    pub fn div_i64(&self, d: i64) -> Result<Self> {
        let ctx = &self.ring.ctx;
        if self.ring.kind == CoeffKind::Integral && d % ctx.p() as i64 == 0 {
            return Err(Error::DivisorNotUnit(d));
        }
        let inv = ctx.q_inv(&ctx.q_from_i64(d))?;
        self.scale(&inv)
    }

    /// Multiplication by the monomial `prod var_i^shift_i`.
    pub fn shift(&self, shift: &[i32]) -> Result<Self> {
        let mut unc = self.unc.clone();
        for (b, s) in unc.bounds.iter_mut().zip(shift.iter()) {
            *b = b.saturating_add(*s);
        }
        let ts: i32 = shift.iter().sum();
        unc.total = unc.total.map(|t| t.saturating_add(ts));
        for b in unc.bounds.iter_mut() {
            if *b >= UNBOUNDED / 2 {
                *b = UNBOUNDED;
            }
        }
        let mut out = TruncatedSeries { ring: self.ring.clone(), terms: BTreeMap::new(), unc };
        for (e, c) in &self.terms {
            let ne: Exp = e.iter().zip(shift.iter()).map(|(a, b)| a + b).collect();
            out.insert(ne, c.clone())?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &TruncatedSeries) -> Result<Self> {
        self.check_ring(other)?;
        let ctx = self.ring.ctx.clone();
        let n = self.ring.nvars();
        let mut bounds = Vec::with_capacity(n);
        for i in 0..n {
            let fa = self.order_in(i).unwrap_or(self.unc.bounds[i]);
            let fb = other.order_in(i).unwrap_or(other.unc.bounds[i]);
            let mut b = (self.unc.bounds[i] as i64 + fb as i64)
                .min(other.unc.bounds[i] as i64 + fa as i64)
                .min(UNBOUNDED as i64);
            let ma = self.terms.keys().map(|e| e[i]).max();
            let mb = other.terms.keys().map(|e| e[i]).max();
            if let (Some(ma), Some(mb)) = (ma, mb) {
                if ma + mb >= self.ring.vars[i].cap {
                    b = b.min(self.ring.vars[i].cap as i64);
                }
            }
            bounds.push(b as i32);
        }
        let tot = |s: &TruncatedSeries| -> (Option<i32>, Option<i32>) {
            let it = s.terms.keys().map(|e| e.iter().sum::<i32>());
            (it.clone().min(), it.max())
        };
        let (fa, xa) = tot(self);
        let (fb, xb) = tot(other);
        let mut total = match (self.unc.total, other.unc.total) {
            (Some(ta), Some(tb)) => Some((ta + fb.unwrap_or(tb)).min(tb + fa.unwrap_or(ta))),
            (Some(ta), None) => Some(ta + fb.unwrap_or(0)),
            (None, Some(tb)) => Some(tb + fa.unwrap_or(0)),
            (None, None) => None,
        };
        if let (Some(c), Some(xa), Some(xb)) = (self.ring.total_cap, xa, xb) {
            if xa + xb >= c {
                total = Some(total.map_or(c, |t| t.min(c)));
            }
        }
        let va = self.min_valuation_or_floor();
        let vb = other.min_valuation_or_floor();
        let p_floor = shift_floor(self.unc.p_floor, vb).min(shift_floor(other.unc.p_floor, va));
        let unc = Uncertainty { p_floor, bounds, total };

        let mut out = TruncatedSeries { ring: self.ring.clone(), terms: BTreeMap::new(), unc };
        if n == 1 {
            // dense accumulation for the common univariate case
            let (Some(la), Some(lb)) = (self.order_in(0), other.order_in(0)) else {
                return Ok(out);
            };
            let lo = la + lb;
            let hi = out.unc.bounds[0].min(self.ring.vars[0].cap);
            if hi <= lo {
                return Ok(out);
            }
            let mut dense: Vec<Option<RationalCoefficient>> = vec![None; (hi - lo) as usize];
            for (ea, ca) in &self.terms {
                for (eb, cb) in &other.terms {
                    let k = ea[0] + eb[0];
                    if k >= hi {
                        break;
                    }
                    let pr = ctx.q_mul(ca, cb);
                    let slot = &mut dense[(k - lo) as usize];
                    *slot = Some(match slot.take() {
                        Some(x) => ctx.q_add(&x, &pr),
                        None => pr,
                    });
                }
            }
            for (i, c) in dense.into_iter().enumerate() {
                if let Some(c) = c {
                    out.insert(SmallVec::from_slice(&[lo + i as i32]), c)?;
                }
            }
            return Ok(out);
        }
        let mut acc: HashMap<Exp, RationalCoefficient> = HashMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exp = ea.iter().zip(eb.iter()).map(|(a, b)| a + b).collect();
                if e[0] >= out.unc.bounds[0] {
                    break;
                }
                if !out.unc.contains(&e) || !self.ring.in_bounds(&e) {
                    continue;
                }
                let pr = ctx.q_mul(ca, cb);
                match acc.get_mut(&e) {
                    Some(x) => *x = ctx.q_add(x, &pr),
                    None => {
                        acc.insert(e, pr);
                    }
                }
            }
        }
        for (e, c) in acc {
            out.insert(e, c)?;
        }
        Ok(out)
    }

    /// `self^k` for `k >= 0`.
    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::one(&self.ring).with_uncertainty(&self.unc_bounds_only());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    fn unc_bounds_only(&self) -> Uncertainty {
        Uncertainty { p_floor: EXACT, bounds: vec![UNBOUNDED; self.ring.nvars()], total: None }
    }

    /// Applies the coefficient Frobenius `j` times.
    pub fn frobenius_coeffs(&self, j: u32) -> Self {
        let ctx = &self.ring.ctx;
        TruncatedSeries {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), ctx.q_frob_pow(c, j))).collect(),
            unc: self.unc.clone(),
        }
    }

    /// Keeps the terms satisfying a predicate on exponents.
    pub fn filter_terms<F: Fn(&[i32]) -> bool>(&self, keep: F) -> Self {
        TruncatedSeries {
            ring: self.ring.clone(),
            terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (e.clone(), c.clone())).collect(),
            unc: self.unc.clone(),
        }
    }

    /// Lowers the known region to the given per-variable bounds.
    pub fn truncate(&self, bounds: &[i32]) -> Self {
        let mut unc = self.unc.clone();
        for (b, x) in unc.bounds.iter_mut().zip(bounds.iter()) {
            *b = (*b).min(*x);
        }
        self.clone().with_uncertainty(&unc)
    }

    /// Moves the series into another ring with the same variable count.
    pub fn embed(&self, ring: &Arc<SeriesRing>) -> Result<Self> {
        if ring.nvars() != self.ring.nvars() {
            return Err(Error::SpecMismatch("variable count differs".into()));
        }
        let mut unc = self.unc.clone();
        if ring.kind == CoeffKind::Integral {
            unc.p_floor = unc.p_floor.min(ring.ctx.n() as i32);
        }
        let mut out = TruncatedSeries { ring: ring.clone(), terms: BTreeMap::new(), unc };
        for (e, c) in &self.terms {
            out.insert(e.clone(), c.clone())?;
        }
        Ok(out)
    }

    /// Moves the series into `target`, sending variable `i` to `map[i]`.
    pub fn reindex(&self, target: &Arc<SeriesRing>, map: &[usize]) -> Result<Self> {
        if map.len() != self.ring.nvars() {
            return Err(Error::SpecMismatch("variable map length".into()));
        }
        let m = target.nvars();
        let mut unc = target.exact_unc();
        unc.p_floor = self.unc.p_floor;
        if target.kind == CoeffKind::Integral {
            unc.p_floor = unc.p_floor.min(target.ctx.n() as i32);
        }
        for (i, &j) in map.iter().enumerate() {
            unc.bounds[j] = unc.bounds[j].min(self.unc.bounds[i]);
        }
        if self.unc.total.is_some() {
            if m != map.len() {
                return Err(Error::TruncationExhausted("cannot move a total-degree truncation".into()));
            }
            unc.total = self.unc.total;
        }
        let mut out = TruncatedSeries { ring: target.clone(), terms: BTreeMap::new(), unc };
        for (e, c) in &self.terms {
            let mut ne: Exp = SmallVec::from_elem(0, m);
            for (i, &j) in map.iter().enumerate() {
                ne[j] = e[i];
            }
            out.insert(ne, c.clone())?;
        }
        Ok(out)
    }

    /// Converts to the same ring with rational coefficients.
    pub fn to_rational(&self) -> Self {
        let ring = self.ring.with_kind(CoeffKind::Rational);
        TruncatedSeries { ring, terms: self.terms.clone(), unc: self.unc.clone() }
    }

    /// Converts to integral coefficients, asserting integrality.
    pub fn to_integral(&self) -> Result<Self> {
        if let Some((e, c)) = self.terms.iter().find(|(_, c)| c.valuation().is_some_and(|v| v < 0)) {
            return Err(Error::IntegralityFailure { location: self.format_exp(e), valuation: c.valuation().unwrap() });
        }
        self.embed(&self.ring.with_kind(CoeffKind::Integral))
    }

    /// Reduces coefficients to the integral ring without the precision cap
    /// (used to move between contexts of different `N`).
    pub fn change_context(&self, ring: &Arc<SeriesRing>) -> Result<Self> {
        let ctx = ring.ctx();
        let mut out = TruncatedSeries::zero(ring).with_uncertainty(&Uncertainty {
            p_floor: self.unc.p_floor,
            bounds: self.unc.bounds.clone(),
            total: self.unc.total,
        });
        for (e, c) in &self.terms {
            let v = c.valuation().unwrap();
            let rel = ((c.precision() - v).max(0) as u32).min(ctx.n());
            let unit = ctx.c_reduce(c.unit_part(), rel);
            let x = ctx.q_shift(&ctx.q_from_coords(&unit, rel as i32), v);
            out.insert(e.clone(), x)?;
        }
        Ok(out)
    }

    /// The exponent tuple formatted as a monomial.
    pub fn format_exp(&self, e: &[i32]) -> String {
        let mut parts = Vec::new();
        for (x, v) in e.iter().zip(self.ring.vars.iter()) {
            match *x {
                0 => {}
                1 => parts.push(v.name.clone()),
                k => parts.push(format!("{}^{}", v.name, k)),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let ctx = &self.ring.ctx;
        let mut first = true;
        // increasing total degree, then lexicographic
        let mut keys: Vec<&Exp> = self.terms.keys().collect();
        keys.sort_by_key(|e| (e.iter().sum::<i32>(), (*e).clone()));
        for e in keys {
            let c = &self.terms[e];
            let cs = ctx.q_to_string(c);
            let mono = self.format_exp(e);
            let (neg, body) = match cs.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, cs.clone()),
            };
            let body = if body.contains('/') && !body.starts_with('(') && mono != "1" {
                let (a, b) = body.split_once('/').unwrap();
                if a == "1" {
                    format!("{mono}/{b}")
                } else {
                    format!("{a}*{mono}/{b}")
                }
            } else if mono == "1" {
                body
            } else if body == "1" {
                mono
            } else {
                format!("{body}*{mono}")
            };
            if first {
                write!(f, "{}{}", if neg { "-" } else { "" }, body)?;
            } else {
                write!(f, " {} {}", if neg { "-" } else { "+" }, body)?;
            }
            first = false;
        }
        Ok(())
    }
}

/// JSON form of a series.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesJson {
    pub ring: RingJson,
    pub terms: Vec<TermJson>,
    pub uncertainty: Uncertainty,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RingJson {
    pub p: u64,
    pub f: usize,
    #[serde(rename = "N")]
    pub n: u32,
    pub kind: CoeffKind,
    pub variables: Vec<Variable>,
    pub total_cap: Option<i32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<i32>,
    pub coeff: String,
    pub valuation: i32,
    pub precision: i32,
}

impl TruncatedSeries {
    pub fn to_json(&self) -> SeriesJson {
        let ctx = &self.ring.ctx;
        SeriesJson {
            ring: RingJson {
                p: ctx.p(),
                f: ctx.f(),
                n: ctx.n(),
                kind: self.ring.kind,
                variables: self.ring.vars.clone(),
                total_cap: self.ring.total_cap,
            },
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson {
                    exp: e.to_vec(),
                    coeff: ctx.q_to_string(c),
                    valuation: c.valuation().unwrap(),
                    precision: c.precision(),
                })
                .collect(),
            uncertainty: self.unc.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_y(cap: i32) -> Arc<SeriesRing> {
        let ctx = PadicContext::new(3, 1, 6).unwrap();
        SeriesRing::univariate(&ctx, CoeffKind::Integral, "Y", VarKind::Kummer, cap, -10).unwrap()
    }

    #[test]
    fn product_of_conjugates() {
        let r = ring_y(5);
        let a = TruncatedSeries::from_univariate(&r, 0, &[1, 1]).unwrap();
        let b = TruncatedSeries::from_univariate(&r, 0, &[1, -1]).unwrap();
        let c = a.mul(&b).unwrap();
        assert!(c.eq_within(&TruncatedSeries::from_univariate(&r, 0, &[1, 0, -1]).unwrap()));
    }

    #[test]
    fn laurent_product() {
        let r = ring_y(5);
        let y = TruncatedSeries::var(&r, 0);
        let yi = TruncatedSeries::from_univariate(&r, -1, &[1]).unwrap();
        assert!(y.mul(&yi).unwrap().eq_within(&TruncatedSeries::one(&r)));
    }

    #[test]
    fn truncation_is_recorded() {
        let r = ring_y(5);
        let top = TruncatedSeries::from_univariate(&r, 4, &[1]).unwrap();
        let y = TruncatedSeries::var(&r, 0);
        let z = top.mul(&y).unwrap();
        assert!(z.is_empty());
        assert_eq!(z.uncertainty().bounds, vec![5]);
    }

    #[test]
    fn window_overflow_is_an_error() {
        let r = ring_y(5);
        let low = TruncatedSeries::from_univariate(&r, -10, &[1]).unwrap();
        let yi = TruncatedSeries::from_univariate(&r, -1, &[1]).unwrap();
        assert!(matches!(low.mul(&yi), Err(Error::WindowOverflow { .. })));
    }

    #[test]
    fn display_shows_fractions() {
        let ctx = PadicContext::new(3, 1, 6).unwrap();
        let r = SeriesRing::univariate(&ctx, CoeffKind::Rational, "Y", VarKind::Kummer, 5, 0).unwrap();
        let s = TruncatedSeries::from_terms(
            &r,
            vec![
                (SmallVec::from_slice(&[1]), ctx.q_one()),
                (SmallVec::from_slice(&[2]), ctx.q_from_ratio(-1, 2).unwrap()),
                (SmallVec::from_slice(&[3]), ctx.q_from_ratio(1, 3).unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(s.to_string(), "Y - Y^2/2 + Y^3/3");
    }
}
