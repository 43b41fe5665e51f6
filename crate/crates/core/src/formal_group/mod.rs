//! Honda formal groups built from a Frobenius operator `𝓐 = Σ F_u φ^u`.
//!
//! The logarithm is the fixed point of `l = X + (𝓐/p)(l)`, the group law is
//! `l^{-1}(l(X) + l(Y))`, and integrality of the law and of `[p]` is checked
//! at runtime.

mod period;

pub use period::{build_period_matrix, check_tau_congruence, PeriodMatrixApprox, TauCongruenceReport};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::padic::{PadicContext, RationalCoefficient};
use crate::series::{CoeffKind, SeriesRing, TruncatedSeries, VarKind, Variable};

/// A matrix over `W` (entries stored as rational coefficients).
#[derive(Clone, Debug, PartialEq)]
pub struct WMatrix {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<RationalCoefficient>,
}

impl WMatrix {
    pub fn zeros(ctx: &PadicContext, rows: usize, cols: usize) -> Self {
        WMatrix { rows, cols, entries: vec![ctx.q_zero(); rows * cols] }
    }

    pub fn identity(ctx: &PadicContext, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, ctx.q_one());
        }
        m
    }

    /// From integer rows. All rows must have the same length.
    pub fn from_i64(ctx: &PadicContext, rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::SpecMismatch("ragged matrix".into()));
        }
        let entries = rows.iter().flatten().map(|&x| ctx.q_from_i64(x)).collect();
        Ok(WMatrix { rows: r, cols: c, entries })
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalCoefficient {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: RationalCoefficient) {
        self.entries[i * self.cols + j] = c;
    }

    pub fn mul(&self, ctx: &PadicContext, other: &WMatrix) -> Result<WMatrix> {
        if self.cols != other.rows {
            return Err(Error::SpecMismatch("matrix shapes".into()));
        }
        let mut out = WMatrix::zeros(ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut s = ctx.q_zero();
                for k in 0..self.cols {
                    s = ctx.q_add(&s, &ctx.q_mul(self.get(i, k), other.get(k, j)));
                }
                out.set(i, j, s);
            }
        }
        Ok(out)
    }

    /// Entrywise Frobenius `φ^j`.
    pub fn frob(&self, ctx: &PadicContext, j: u32) -> WMatrix {
        WMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|c| ctx.q_frob_pow(c, j)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|c| c.is_zero())
    }

    /// Equality up to the joint precision.
    pub fn eq_in(&self, ctx: &PadicContext, other: &WMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.entries.iter().zip(&other.entries).all(|(a, b)| ctx.q_eq(a, b))
    }

    /// `M v` for a vector of series.
    pub fn apply(&self, v: &[TruncatedSeries], ring: &Arc<SeriesRing>) -> Result<Vec<TruncatedSeries>> {
        if v.len() != self.cols {
            return Err(Error::SpecMismatch("matrix/vector shapes".into()));
        }
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut s = TruncatedSeries::zero(ring);
            for (j, vj) in v.iter().enumerate() {
                let c = self.get(i, j);
                if !c.is_zero() {
                    s = s.add(&vj.scale(c)?)?;
                }
            }
            out.push(s);
        }
        Ok(out)
    }

    fn to_strings(&self, ctx: &PadicContext) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| ctx.q_to_string(self.get(i, j))).collect()).collect()
    }
}

/// The blocks `(A, B; C, D)` of `𝓔^{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EBlocks {
    pub a: WMatrix,
    pub b: WMatrix,
    pub c: WMatrix,
    pub d: WMatrix,
}

/// `𝓐 = Σ_{u=1}^{u_max} F_u φ^u` with optional `F'_u` and source blocks.
#[derive(Clone, Debug)]
pub struct FrobeniusOperator {
    ctx: Arc<PadicContext>,
    d: usize,
    h: usize,
    f: Vec<WMatrix>,
    f_prime: Vec<WMatrix>,
    blocks: Option<EBlocks>,
}

/// Smallest `u` with `p^u >= cap`.
pub fn default_u_max(p: u64, cap: i32) -> usize {
    let mut u = 0;
    let mut pu: i64 = 1;
    while pu < cap as i64 {
        pu *= p as i64;
        u += 1;
    }
    u.max(1)
}

impl FrobeniusOperator {
    /// From an explicit list `F_1, ..., F_{u_max}` of `d x d` matrices.
    pub fn from_f_u(ctx: &Arc<PadicContext>, d: usize, h: usize, f: Vec<WMatrix>) -> Result<Self> {
        if d == 0 || h < d {
            return Err(Error::SpecMismatch(format!("need 1 <= d <= h, got d={d}, h={h}")));
        }
        if f.iter().any(|m| m.rows != d || m.cols != d) {
            return Err(Error::SpecMismatch("F_u must be d x d".into()));
        }
        Ok(FrobeniusOperator { ctx: ctx.clone(), d, h, f, f_prime: Vec::new(), blocks: None })
    }

    /// From the blocks of `𝓔^{-1}`, unrolling the recursions to `u_max`.
    pub fn from_blocks(ctx: &Arc<PadicContext>, d: usize, h: usize, blocks: EBlocks, u_max: usize) -> Result<Self> {
        let e = h - d.min(h);
        if d == 0 || h < d {
            return Err(Error::SpecMismatch(format!("need 1 <= d <= h, got d={d}, h={h}")));
        }
        let shapes = [
            (&blocks.a, d, d, "A"),
            (&blocks.b, d, e, "B"),
            (&blocks.c, e, d, "C"),
            (&blocks.d, e, e, "D"),
        ];
        for (m, r, c, name) in shapes {
            if m.rows != r || m.cols != c {
                return Err(Error::SpecMismatch(format!("block {name} must be {r} x {c}")));
            }
        }
        let (f, f_prime) = unroll(ctx, &blocks, u_max.max(1))?;
        Ok(FrobeniusOperator { ctx: ctx.clone(), d, h, f, f_prime, blocks: Some(blocks) })
    }

    /// Full constructor; when blocks are given the lists are checked against
    /// the recursions.
    pub fn new(
        ctx: &Arc<PadicContext>,
        d: usize,
        h: usize,
        f: Vec<WMatrix>,
        f_prime: Vec<WMatrix>,
        blocks: Option<EBlocks>,
    ) -> Result<Self> {
        let mut op = Self::from_f_u(ctx, d, h, f)?;
        if let Some(b) = &blocks {
            let (ef, efp) = unroll(ctx, b, op.f.len().max(f_prime.len()).max(1))?;
            for (u, m) in op.f.iter().enumerate() {
                if !m.eq_in(ctx, &ef[u]) {
                    return Err(Error::SpecMismatch(format!("F_{} violates the block recursion", u + 1)));
                }
            }
            for (u, m) in f_prime.iter().enumerate() {
                if !m.eq_in(ctx, &efp[u]) {
                    return Err(Error::SpecMismatch(format!("F'_{} violates the block recursion", u + 1)));
                }
            }
        }
        op.f_prime = f_prime;
        op.blocks = blocks;
        Ok(op)
    }

    /// `𝓐 = φ` in dimension and height one, `𝓔 = (1)`.
    pub fn multiplicative(ctx: &Arc<PadicContext>) -> Self {
        let one = WMatrix::identity(ctx, 1);
        let z10 = WMatrix::zeros(ctx, 1, 0);
        let blocks = EBlocks { a: one.clone(), b: z10, c: WMatrix::zeros(ctx, 0, 1), d: WMatrix::zeros(ctx, 0, 0) };
        FrobeniusOperator { ctx: ctx.clone(), d: 1, h: 1, f: vec![one], f_prime: Vec::new(), blocks: Some(blocks) }
    }

    /// `𝓐 = φ^k` in dimension one, height `k`: `G_m` for `k = 1`, otherwise
    /// built from companion blocks of `𝓔^{-1}` so that `F_k = 1`.
    pub fn phi_power(ctx: &Arc<PadicContext>, k: usize, u_max: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::SpecMismatch("phi^0 is not of Honda type".into()));
        }
        if k == 1 {
            return Ok(Self::multiplicative(ctx));
        }
        let e = k - 1;
        let mut b = WMatrix::zeros(ctx, 1, e);
        b.set(0, e - 1, ctx.q_one());
        let mut c = WMatrix::zeros(ctx, e, 1);
        c.set(0, 0, ctx.q_one());
        let mut d = WMatrix::zeros(ctx, e, e);
        for i in 1..e {
            d.set(i, i - 1, ctx.q_one());
        }
        let blocks = EBlocks { a: WMatrix::zeros(ctx, 1, 1), b, c, d };
        Self::from_blocks(ctx, 1, k, blocks, u_max.max(k))
    }

    /// `"phi"` or `"phi^k"`.
    pub fn from_name(ctx: &Arc<PadicContext>, name: &str, cap: i32) -> Result<Self> {
        let bad = || Error::ParseError { position: 0, message: format!("unknown operator '{name}', expected phi or phi^k") };
        let k = match name.trim() {
            "phi" => 1,
            s => s.strip_prefix("phi^").and_then(|k| k.trim().parse::<usize>().ok()).ok_or_else(bad)?,
        };
        Self::phi_power(ctx, k, default_u_max(ctx.p(), cap))
    }

    /// Replaces `F'_u` without any check (negative controls).
    pub fn with_f_prime_replaced(&self, u: usize, m: WMatrix) -> Self {
        let mut out = self.clone();
        if u >= 1 && u <= out.f_prime.len() {
            out.f_prime[u - 1] = m;
        }
        out
    }

    pub fn ctx(&self) -> &Arc<PadicContext> {
        &self.ctx
    }
    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn height(&self) -> usize {
        self.h
    }
    pub fn u_max(&self) -> usize {
        self.f.len()
    }
    /// `F_u` for `1 <= u <= u_max`.
    pub fn f(&self, u: usize) -> &WMatrix {
        &self.f[u - 1]
    }
    /// The list `F'_1, F'_2, ...` (empty when absent).
    pub fn f_prime(&self) -> &[WMatrix] {
        &self.f_prime
    }
    pub fn blocks(&self) -> Option<&EBlocks> {
        self.blocks.as_ref()
    }

    /// `Σ_u M_u φ^u(v) / p`.
    fn apply_list(list: &[WMatrix], v: &[TruncatedSeries], ring: &Arc<SeriesRing>, rows: usize) -> Result<Vec<TruncatedSeries>> {
        let mut out = vec![TruncatedSeries::zero(ring); rows];
        let mut cur = v.to_vec();
        for m in list {
            cur = cur.iter().map(|s| s.phi()).collect::<Result<_>>()?;
            if cur.iter().all(|s| s.is_empty()) {
                break;
            }
            if m.is_zero() {
                continue;
            }
            for (o, t) in out.iter_mut().zip(m.apply(&cur, ring)?) {
                *o = o.add(&t)?;
            }
        }
        out.iter().map(|s| s.mul_p_power(-1)).collect()
    }

    /// `(𝓐/p)(v)` for a `d`-vector of series over rational coefficients.
    pub fn apply_over_p(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        let ring = ring_of(v)?;
        Self::apply_list(&self.f, v, &ring, self.d)
    }

    /// `Σ F'_u φ^u(v) / p`.
    pub fn apply_prime_over_p(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        let ring = ring_of(v)?;
        Self::apply_list(&self.f_prime, v, &ring, self.h - self.d)
    }

    /// Descriptor with entries printed as strings.
    pub fn to_json(&self, cap: i32) -> Value {
        let ctx = &self.ctx;
        let mut j = serde_json::json!({
            "p": ctx.p(),
            "f": ctx.f(),
            "N": ctx.n(),
            "d": self.d,
            "h": self.h,
            "cap": cap,
            "F_u": self.f.iter().map(|m| m.to_strings(ctx)).collect::<Vec<_>>(),
        });
        if !self.f_prime.is_empty() {
            j["F_prime_u"] = serde_json::json!(self.f_prime.iter().map(|m| m.to_strings(ctx)).collect::<Vec<_>>());
        }
        if let Some(b) = &self.blocks {
            j["E_inverse_blocks"] = serde_json::json!({
                "A": b.a.to_strings(ctx), "B": b.b.to_strings(ctx),
                "C": b.c.to_strings(ctx), "D": b.d.to_strings(ctx),
            });
        }
        j
    }
}

fn ring_of(v: &[TruncatedSeries]) -> Result<Arc<SeriesRing>> {
    v.first().map(|s| s.ring().clone()).ok_or_else(|| Error::SpecMismatch("empty vector".into()))
}

/// `F_1 = A`, `F'_1 = C`, `F_{u+1} = B φ(F'_u)`, `F'_{u+1} = D φ(F'_u)`.
fn unroll(ctx: &PadicContext, b: &EBlocks, u_max: usize) -> Result<(Vec<WMatrix>, Vec<WMatrix>)> {
    let mut f = vec![b.a.clone()];
    let mut fp = vec![b.c.clone()];
    for u in 1..u_max {
        let prev = fp[u - 1].frob(ctx, 1);
        f.push(b.b.mul(ctx, &prev)?);
        fp.push(b.d.mul(ctx, &prev)?);
    }
    Ok((f, fp))
}

/// The JSON formal-group descriptor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupDescriptor {
    pub p: u64,
    #[serde(default = "one_usize")]
    pub f: usize,
    #[serde(rename = "N", default)]
    pub n: Option<u32>,
    pub d: usize,
    pub h: usize,
    #[serde(rename = "E_inverse_blocks", default)]
    pub blocks: Option<BlocksJson>,
    #[serde(rename = "F_u", default)]
    pub f_u: Option<Vec<Vec<Vec<i64>>>>,
    pub cap: i32,
}

fn one_usize() -> usize {
    1
}

/// Integer blocks of `𝓔^{-1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct BlocksJson {
    pub a: Vec<Vec<i64>>,
    #[serde(default)]
    pub b: Vec<Vec<i64>>,
    #[serde(default)]
    pub c: Vec<Vec<i64>>,
    #[serde(default)]
    pub d: Vec<Vec<i64>>,
}

fn block(ctx: &PadicContext, rows: &[Vec<i64>], r: usize, c: usize) -> Result<WMatrix> {
    if rows.is_empty() || c == 0 {
        if r * c != 0 && !rows.is_empty() {
            return Err(Error::SpecMismatch("block shape".into()));
        }
        if r * c != 0 {
            return Err(Error::SpecMismatch(format!("missing {r} x {c} block")));
        }
        return Ok(WMatrix::zeros(ctx, r, c));
    }
    WMatrix::from_i64(ctx, rows)
}

impl GroupDescriptor {
    /// Parses a descriptor from JSON text.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ParseError { position: e.column(), message: e.to_string() })
    }

    /// Builds the operator over a context of precision `n` (the descriptor's
    /// `N` wins when present).
    pub fn operator(&self, n: u32) -> Result<FrobeniusOperator> {
        let ctx = PadicContext::new(self.p, self.f, self.n.unwrap_or(n))?;
        let u_max = default_u_max(self.p, self.cap);
        match (&self.blocks, &self.f_u) {
            (Some(b), None) => {
                let e = self.h.checked_sub(self.d).ok_or_else(|| Error::SpecMismatch("h < d".into()))?;
                let blocks = EBlocks {
                    a: block(&ctx, &b.a, self.d, self.d)?,
                    b: block(&ctx, &b.b, self.d, e)?,
                    c: block(&ctx, &b.c, e, self.d)?,
                    d: block(&ctx, &b.d, e, e)?,
                };
                FrobeniusOperator::from_blocks(&ctx, self.d, self.h, blocks, u_max)
            }
            (None, Some(fu)) => {
                let f = fu.iter().map(|m| WMatrix::from_i64(&ctx, m)).collect::<Result<_>>()?;
                FrobeniusOperator::from_f_u(&ctx, self.d, self.h, f)
            }
            _ => Err(Error::SpecMismatch("give exactly one of E_inverse_blocks and F_u".into())),
        }
    }
}

/// Report of the group-law axioms and the logarithm homomorphism property.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub identity: bool,
    pub commutativity: bool,
    pub associativity: bool,
    pub inverse: bool,
    pub log_homomorphism: bool,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.identity && self.commutativity && self.associativity && self.inverse && self.log_homomorphism
    }
}

/// Report of the identity `𝓔^{-1}((φ/p) l; φ m) = ((𝓐/p) l; m)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrobFormReport {
    pub pass: bool,
    /// Located discrepancies, empty on success.
    pub discrepancies: Vec<String>,
}

/// A formal group with its logarithm, law and `[p]`-series, all truncated.
#[derive(Clone, Debug)]
pub struct FormalGroupData {
    op: FrobeniusOperator,
    cap: i32,
    log: Vec<TruncatedSeries>,
    pseudo_log: Vec<TruncatedSeries>,
    law: Vec<TruncatedSeries>,
    p_series: Vec<TruncatedSeries>,
    inverse: Vec<TruncatedSeries>,
}

fn var_names(prefix: &str, d: usize) -> Vec<String> {
    if d == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=d).map(|i| format!("{prefix}{i}")).collect()
    }
}

/// The `d`-variable ring of the logarithm.
pub fn log_ring(ctx: &Arc<PadicContext>, d: usize, cap: i32) -> Result<Arc<SeriesRing>> {
    let vars = var_names("X", d).iter().map(|n| Variable::new(n, VarKind::Plain, cap, 0)).collect();
    SeriesRing::new(ctx, CoeffKind::Rational, vars, (d > 1).then_some(cap))
}

/// Ring of `k` blocks of `d` variables with total-degree cap.
fn block_ring(ctx: &Arc<PadicContext>, d: usize, k: usize, cap: i32) -> Result<Arc<SeriesRing>> {
    let prefixes = ["X", "Y", "Z"];
    let mut vars = Vec::new();
    for pre in prefixes.iter().take(k) {
        for n in var_names(pre, d) {
            vars.push(Variable::new(&n, VarKind::Plain, cap, 0));
        }
    }
    SeriesRing::new(ctx, CoeffKind::Rational, vars, Some(cap))
}

fn block_vars(ring: &Arc<SeriesRing>, d: usize, k: usize) -> Vec<TruncatedSeries> {
    (k * d..(k + 1) * d).map(|i| TruncatedSeries::var(ring, i)).collect()
}

fn compose_all(fs: &[TruncatedSeries], subs: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
    fs.iter().map(|f| f.compose(subs)).collect()
}

fn vec_add(a: &[TruncatedSeries], b: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn vec_eq(a: &[TruncatedSeries], b: &[TruncatedSeries]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_rational().eq_within(&y.to_rational()))
}

fn first_discrepancy(label: &str, i: usize, lhs: &TruncatedSeries, rhs: &TruncatedSeries) -> Result<Option<String>> {
    let diff = lhs.sub(rhs)?;
    Ok(diff.terms().iter().next().map(|(e, c)| {
        format!("{label}[{i}]: coefficient of {} differs by {}", diff.format_exp(e), diff.ctx().q_to_string(c))
    }))
}

/// `l = X + (𝓐/p)(l)` as a fixed point, in the ring of [`log_ring`].
pub fn build_logarithm(op: &FrobeniusOperator, cap: i32) -> Result<Vec<TruncatedSeries>> {
    let ring = log_ring(op.ctx(), op.dim(), cap)?;
    let xs: Vec<TruncatedSeries> = (0..op.dim()).map(|i| TruncatedSeries::var(&ring, i)).collect();
    let mut l = xs.clone();
    let rounds = default_u_max(op.ctx().p(), cap) + 2;
    for _ in 0..rounds {
        let next = vec_add(&xs, &op.apply_over_p(&l)?)?;
        let done = vec_eq(&next, &l);
        l = next;
        if done {
            break;
        }
    }
    Ok(l)
}

/// `m = Σ F'_u φ^u(l) / p`; empty when `h = d`.
pub fn build_pseudo_logarithm(op: &FrobeniusOperator, l: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
    if op.height() == op.dim() {
        return Ok(Vec::new());
    }
    if op.f_prime().is_empty() {
        return Err(Error::SpecMismatch("pseudo-logarithm needs F'_u".into()));
    }
    op.apply_prime_over_p(l)
}

/// Group law `l^{-1}(l(X) + l(Y))`, its inverse and `[p]`, with integrality
/// asserted. Returns `(law, p_series, inverse)`.
pub fn build_group_law(
    l: &[TruncatedSeries],
    cap: i32,
) -> Result<(Vec<TruncatedSeries>, Vec<TruncatedSeries>, Vec<TruncatedSeries>)> {
    let ring = ring_of(l)?;
    let ctx = ring.ctx().clone();
    let d = l.len();
    let g = TruncatedSeries::reversion(l)?;
    let law_ring = block_ring(&ctx, d, 2, cap)?;
    let lx = compose_all(l, &block_vars(&law_ring, d, 0))?;
    let ly = compose_all(l, &block_vars(&law_ring, d, 1))?;
    let law = compose_all(&g, &vec_add(&lx, &ly)?)?;
    let law = law.iter().map(|s| s.to_integral()).collect::<Result<Vec<_>>>()?;
    let pl: Vec<TruncatedSeries> = l.iter().map(|s| s.scale_i64(ctx.p() as i64)).collect::<Result<_>>()?;
    let p_series = compose_all(&g, &pl)?.iter().map(|s| s.to_integral()).collect::<Result<Vec<_>>>()?;
    let ml: Vec<TruncatedSeries> = l.iter().map(|s| s.neg()).collect();
    let inverse = compose_all(&g, &ml)?.iter().map(|s| s.to_integral()).collect::<Result<Vec<_>>>()?;
    Ok((law, p_series, inverse))
}

fn gm_log(ctx: &Arc<PadicContext>, cap: i32) -> Result<TruncatedSeries> {
    let ring = log_ring(ctx, 1, cap)?;
    let x = TruncatedSeries::var(&ring, 0);
    TruncatedSeries::one(&ring).add(&x)?.log_one_unit()
}

/// Observed height from `[p]` reduced modulo `p` (dimension one).
pub fn height_diagnostic(p_series: &TruncatedSeries) -> Result<u32> {
    if p_series.ring().nvars() != 1 {
        return Err(Error::SpecMismatch("height diagnostic needs dimension one".into()));
    }
    let p = p_series.ctx().p() as i64;
    let cap = p_series.ring().vars()[0].cap;
    let support: Vec<i32> =
        p_series.terms().iter().filter(|(_, c)| c.valuation() == Some(0)).map(|(e, _)| e[0]).collect();
    let Some(&low) = support.first() else {
        return Err(Error::HeightUndetectable { cap });
    };
    let mut h = 0u32;
    let mut q = 1i64;
    while q < low as i64 {
        q *= p;
        h += 1;
    }
    if q != low as i64 {
        return Err(Error::SpecMismatch(format!("lowest unit term of [p] has degree {low}, not a power of p")));
    }
    if let Some(bad) = support.iter().find(|&&k| k as i64 % q != 0) {
        return Err(Error::SpecMismatch(format!("[p] mod p has a term of degree {bad} not divisible by {q}")));
    }
    Ok(h)
}

impl FormalGroupData {
    /// Builds everything from the operator.
    pub fn build(op: &FrobeniusOperator, cap: i32) -> Result<Self> {
        let log = build_logarithm(op, cap)?;
        Self::with_logarithm(op, log, cap)
    }

    /// Builds from a precomputed logarithm attached to `op`.
    pub fn with_logarithm(op: &FrobeniusOperator, log: Vec<TruncatedSeries>, cap: i32) -> Result<Self> {
        let pseudo_log = if op.f_prime().is_empty() { Vec::new() } else { build_pseudo_logarithm(op, &log)? };
        let (law, p_series, inverse) = build_group_law(&log, cap)?;
        Ok(FormalGroupData { op: op.clone(), cap, log, pseudo_log, law, p_series, inverse })
    }

    /// `G_m` with `l = log(1 + X)` and `𝓐 = φ`.
    pub fn multiplicative(ctx: &Arc<PadicContext>, cap: i32) -> Result<Self> {
        let op = FrobeniusOperator::multiplicative(ctx);
        Self::with_logarithm(&op, vec![gm_log(ctx, cap)?], cap)
    }

    /// Logarithm and pseudo-logarithm only; the law, `[p]` and inverse are
    /// left empty. Long logarithms at low coefficient precision cannot be
    /// reverted integrally, and the brackets never need the law.
    pub fn logarithm_only(op: &FrobeniusOperator, log: Option<Vec<TruncatedSeries>>, cap: i32) -> Result<Self> {
        let log = match log {
            Some(l) => l,
            None => build_logarithm(op, cap)?,
        };
        let pseudo_log = if op.f_prime().is_empty() { Vec::new() } else { build_pseudo_logarithm(op, &log)? };
        Ok(FormalGroupData { op: op.clone(), cap, log, pseudo_log, law: Vec::new(), p_series: Vec::new(), inverse: Vec::new() })
    }

    /// [`Self::logarithm_only`] for `G_m`.
    pub fn multiplicative_logarithm(ctx: &Arc<PadicContext>, cap: i32) -> Result<Self> {
        let op = FrobeniusOperator::multiplicative(ctx);
        Self::logarithm_only(&op, Some(vec![gm_log(ctx, cap)?]), cap)
    }

    pub fn operator(&self) -> &FrobeniusOperator {
        &self.op
    }
    pub fn cap(&self) -> i32 {
        self.cap
    }
    pub fn dim(&self) -> usize {
        self.op.dim()
    }
    pub fn height(&self) -> usize {
        self.op.height()
    }
    pub fn logarithm(&self) -> &[TruncatedSeries] {
        &self.log
    }
    pub fn pseudo_logarithm(&self) -> &[TruncatedSeries] {
        &self.pseudo_log
    }
    /// `F(X, Y)` in variables `X_1..X_d, Y_1..Y_d`.
    pub fn law(&self) -> &[TruncatedSeries] {
        &self.law
    }
    pub fn p_series(&self) -> &[TruncatedSeries] {
        &self.p_series
    }
    pub fn inverse(&self) -> &[TruncatedSeries] {
        &self.inverse
    }

    /// `height_diagnostic` on the `[p]`-series.
    pub fn observed_height(&self) -> Result<u32> {
        height_diagnostic(&self.p_series[0])
    }

    /// Honda's condition `p l - 𝓐(l) ≡ 0 mod p` within the truncation.
    pub fn honda_check(&self) -> Result<bool> {
        let a = self.op.apply_over_p(&self.log)?;
        for (l, al) in self.log.iter().zip(&a) {
            // u(l)/p = l - (𝓐/p)(l) must be integral
            let r = l.sub(al)?;
            if r.terms().values().any(|c| c.valuation().is_some_and(|v| v < 0)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Axioms of the law and `l(F(X, Y)) = l(X) + l(Y)`, each checked on its
    /// own from the stored series.
    pub fn check_axioms(&self) -> Result<AxiomReport> {
        let d = self.dim();
        let ctx = self.op.ctx().clone();
        let law: Vec<TruncatedSeries> = self.law.iter().map(|s| s.to_rational()).collect();
        let law_ring = ring_of(&law)?;
        let xs = block_vars(&law_ring, d, 0);
        let ys = block_vars(&law_ring, d, 1);
        let zeros = vec![TruncatedSeries::zero(&law_ring); d];

        let mut sub_x0 = xs.clone();
        sub_x0.extend(zeros.iter().cloned());
        let identity = vec_eq(&compose_all(&law, &sub_x0)?, &xs);

        let mut swapped = ys.clone();
        swapped.extend(xs.iter().cloned());
        let commutativity = vec_eq(&compose_all(&law, &swapped)?, &law);

        let r3 = block_ring(&ctx, d, 3, self.cap)?;
        let (a, b, c) = (block_vars(&r3, d, 0), block_vars(&r3, d, 1), block_vars(&r3, d, 2));
        let cat = |u: &[TruncatedSeries], v: &[TruncatedSeries]| -> Vec<TruncatedSeries> {
            u.iter().chain(v.iter()).cloned().collect()
        };
        let fab = compose_all(&law, &cat(&a, &b))?;
        let fbc = compose_all(&law, &cat(&b, &c))?;
        let associativity = vec_eq(&compose_all(&law, &cat(&fab, &c))?, &compose_all(&law, &cat(&a, &fbc))?);

        let r1 = ring_of(&self.log)?;
        let inv: Vec<TruncatedSeries> = self.inverse.iter().map(|s| s.to_rational()).collect();
        let x1: Vec<TruncatedSeries> = (0..d).map(|i| TruncatedSeries::var(&r1, i)).collect();
        let inverse = compose_all(&law, &cat(&x1, &inv))?.iter().all(|s| s.is_zero_within());

        let lx = compose_all(&self.log, &xs)?;
        let ly = compose_all(&self.log, &ys)?;
        let log_homomorphism = vec_eq(&compose_all(&self.log, &law)?, &vec_add(&lx, &ly)?);

        Ok(AxiomReport { identity, commutativity, associativity, inverse, log_homomorphism })
    }

    /// Checks `𝓔^{-1}((φ/p) l; φ m) = ((𝓐/p) l; m)` componentwise.
    pub fn check_frob_form(&self) -> Result<FrobFormReport> {
        let Some(bl) = self.op.blocks() else {
            return Err(Error::SpecMismatch("frob_form needs the blocks of E^{-1}".into()));
        };
        let ring = ring_of(&self.log)?;
        let phil: Vec<TruncatedSeries> =
            self.log.iter().map(|s| s.phi()?.mul_p_power(-1)).collect::<Result<_>>()?;
        let phim: Vec<TruncatedSeries> = self.pseudo_log.iter().map(|s| s.phi()).collect::<Result<_>>()?;
        let top = vec_add(&bl.a.apply(&phil, &ring)?, &bl.b.apply(&phim, &ring)?)?;
        let bottom = vec_add(&bl.c.apply(&phil, &ring)?, &bl.d.apply(&phim, &ring)?)?;
        let want_top = self.op.apply_over_p(&self.log)?;
        let mut discrepancies = Vec::new();
        for (i, (a, b)) in top.iter().zip(&want_top).enumerate() {
            discrepancies.extend(first_discrepancy("top", i, a, b)?);
        }
        for (i, (a, b)) in bottom.iter().zip(&self.pseudo_log).enumerate() {
            discrepancies.extend(first_discrepancy("bottom", i, a, b)?);
        }
        Ok(FrobFormReport { pass: discrepancies.is_empty(), discrepancies })
    }

    /// JSON view of the built group.
    pub fn to_json(&self) -> Value {
        let show = |v: &[TruncatedSeries]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        serde_json::json!({
            "operator": self.op.to_json(self.cap),
            "cap": self.cap,
            "logarithm": show(&self.log),
            "pseudo_logarithm": show(&self.pseudo_log),
            "group_law": show(&self.law),
            "p_series": show(&self.p_series),
            "inverse": show(&self.inverse),
        })
    }
}
