//! Explicit Hilbert-symbol brackets: Coleman, Brückner–Vostokov, the
//! formal-group bracket (Path A) and its cohomological evaluation through
//! cup products (Path B).
//!
//! Every bracket is recomputed with all caps and windows doubled; a change
//! in the result raises `CapInstability`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formal_group::{build_period_matrix, FormalGroupData, GroupDescriptor, PeriodMatrixApprox};
use crate::herr::{final_reduction, kummer_triple_classical, kummer_triple_formal, Certificate, Discard, HerrModule};
use crate::padic::{PadicContext, RationalCoefficient};
use crate::series::{CoeffKind, SeriesRing, TruncatedSeries, VarKind};
use crate::shadow::MonomialShadow;

/// Truncation parameters of one evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Caps {
    /// Cap of the bracket variable (`X` for Coleman, `Y` otherwise).
    pub y_cap: i32,
    /// Laurent window of the bracket variable.
    pub y_window: i32,
    /// `X`-cap of the two-variable module (Path B only).
    pub x_cap: i32,
    /// `X`-window of the two-variable module (Path B only).
    pub x_window: i32,
}

impl Caps {
    /// All caps and windows doubled.
    pub fn doubled(&self) -> Caps {
        Caps { y_cap: 2 * self.y_cap, y_window: 2 * self.y_window, x_cap: 2 * self.x_cap, x_window: 2 * self.x_window }
    }

    /// Parses `"y_cap,y_window"` or `"y_cap,y_window,x_cap,x_window"`.
    pub fn parse(text: &str) -> Result<Caps> {
        let nums: Vec<i32> = text
            .split(',')
            .map(|s| s.trim().parse::<i32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::ParseError { position: 0, message: format!("caps: {e}") })?;
        match nums.as_slice() {
            [a, b] => Ok(Caps { y_cap: *a, y_window: *b, x_cap: 9, x_window: -3 }),
            [a, b, c, d] => Ok(Caps { y_cap: *a, y_window: *b, x_cap: *c, x_window: *d }),
            _ => Err(Error::ParseError { position: 0, message: "caps need 2 or 4 integers".into() }),
        }
    }
}

/// Parameters shared by all brackets.
#[derive(Clone, Debug, Serialize)]
pub struct BracketConfig {
    pub p: u64,
    /// Residue degree of `W`.
    pub f: usize,
    /// The symbol is computed modulo `p^m`.
    pub m: u32,
    /// Explicit caps; `None` picks defaults and enlarges them on demand.
    pub caps: Option<Caps>,
    /// `χ(γ)` for the cohomological path.
    pub chi: i64,
    /// Whether to run the doubled-caps recomputation.
    pub check_stability: bool,
}

impl BracketConfig {
    pub fn new(p: u64, m: u32) -> Self {
        BracketConfig { p, f: 1, m, caps: None, chi: 1 + p as i64, check_stability: true }
    }

    /// Coefficient precision `N = M + ceil(M p / (p - 1)) + 2`.
    pub fn working_precision(&self) -> u32 {
        working_precision(self.p, self.m)
    }

    fn context(&self) -> Result<Arc<PadicContext>> {
        PadicContext::new(self.p, self.f, self.working_precision())
    }
}

/// `N = M + ceil(M p / (p - 1)) + 2`.
pub fn working_precision(p: u64, m: u32) -> u32 {
    let (p, m) = (p as u32, m);
    m + (m * p).div_ceil(p - 1) + 2
}

/// Pre-reduction values and their valuations.
#[derive(Clone, Debug, Serialize)]
pub struct IntegralityCertificate {
    /// Trace-residue values before reduction, printed.
    pub values: Vec<String>,
    /// Their `p`-adic valuations (`None` for zero).
    pub valuations: Vec<Option<i32>>,
    /// Absolute precision of each value.
    pub precisions: Vec<i32>,
}

/// Discard log and side checks of the cohomological path.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub discards: Vec<Discard>,
    /// Monomials that fit no ideal class.
    pub failures: Vec<String>,
    /// The `β`-equations of the classical Kummer triple of `α`.
    pub alpha_certificate: Certificate,
    /// The `β`-equations of the formal Kummer triple of `β`.
    pub beta_certificate: Certificate,
    /// Coordinates of the cup taken in the opposite order.
    pub swapped_order_coords: Vec<u64>,
}

/// A symbol with its certificate.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolResult {
    pub bracket: String,
    pub p: u64,
    /// The coordinates live in `Z/p^modulus_exponent`.
    pub modulus_exponent: u32,
    /// Coordinates in the torsion basis `(o^1_M, ..., o^h_M)`.
    pub coords: Vec<u64>,
    pub working_precision: u32,
    pub caps: Caps,
    pub certificate: IntegralityCertificate,
    /// `Some(true)` when the doubled-caps recomputation agreed.
    pub cap_stable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<ResidualReport>,
}

/// Where the formal group comes from.
#[derive(Clone, Debug)]
pub enum GroupSource {
    /// `G_m` with `l = log(1 + X)`, lift `ô = Y` and `e = (p - 1) p^{M-1}`.
    Multiplicative,
    /// A descriptor with explicit lifts (as exact `Y`-polynomials) and `e`.
    Descriptor { descriptor: GroupDescriptor, lifts: Vec<Vec<TruncatedSeries>>, e: i64 },
}

fn univariate(ctx: &Arc<PadicContext>, name: &str, kind: VarKind, caps: &Caps) -> Result<Arc<SeriesRing>> {
    SeriesRing::univariate(ctx, CoeffKind::Rational, name, kind, caps.y_cap, caps.y_window)
}

/// Moves a univariate series into `ring`.
fn rehome(s: &TruncatedSeries, ring: &Arc<SeriesRing>) -> Result<TruncatedSeries> {
    if s.ring().nvars() != 1 {
        return Err(Error::SpecMismatch("bracket arguments are univariate series".into()));
    }
    let s = if s.ctx().n() == ring.ctx().n() && s.ctx().f() == ring.ctx().f() {
        s.clone()
    } else {
        let src = s.ring().with_context(ring.ctx());
        s.change_context(&src)?
    };
    s.reindex(ring, &[0])
}

/// `𝓛(G) dlog F - (1/p) 𝓛(F) dlog φ(G)`.
pub fn integrand(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
    let lg = g.coleman_functional()?.to_rational();
    let lf = f.coleman_functional()?.to_rational();
    let a = lg.mul(&f.dlog(0)?)?;
    let b = lf.mul(&g.phi()?.dlog(0)?)?.mul_p_power(-1)?;
    a.sub(&b)
}

/// `Tr Res(s)` reduced modulo `p^m`, asserting integrality.
fn trace_residue(s: &TruncatedSeries, m: u32) -> Result<(u64, RationalCoefficient)> {
    let ctx = s.ctx().clone();
    let r = s.residue(0)?;
    let tr = ctx.q_trace(&r);
    reduce(&ctx, &tr, m).map(|v| (v, tr))
}

fn reduce(ctx: &PadicContext, c: &RationalCoefficient, m: u32) -> Result<u64> {
    if let Some(v) = c.valuation() {
        if v < 0 {
            return Err(Error::IntegralityFailure { location: "trace-residue".into(), valuation: v });
        }
    }
    if c.precision() < m as i32 {
        return Err(Error::PrecisionExhausted(format!(
            "value known modulo p^{} only, need p^{m}",
            c.precision()
        )));
    }
    Ok(ctx.q_to_coords(c, m)?[0])
}

fn certificate(ctx: &PadicContext, vals: &[RationalCoefficient]) -> IntegralityCertificate {
    IntegralityCertificate {
        values: vals.iter().map(|c| ctx.q_to_string(c)).collect(),
        valuations: vals.iter().map(|c| c.valuation()).collect(),
        precisions: vals.iter().map(|c| c.precision()).collect(),
    }
}

fn is_truncation(e: &Error) -> bool {
    matches!(e, Error::TruncationExhausted(_) | Error::WindowOverflow { .. })
}

/// Runs `eval` at default caps, enlarging them while the truncation is
/// insufficient, then at doubled caps; compares coordinates.
fn with_stability<F>(cfg: &BracketConfig, default: Caps, eval: F) -> Result<SymbolResult>
where
    F: Fn(&Caps) -> Result<SymbolResult>,
{
    let mut caps = cfg.caps.unwrap_or(default);
    let mut res = eval(&caps);
    if cfg.caps.is_none() {
        for _ in 0..3 {
            match &res {
                Err(e) if is_truncation(e) => {
                    caps = caps.doubled();
                    res = eval(&caps);
                }
                _ => break,
            }
        }
    }
    let mut res = res?;
    if cfg.check_stability {
        let big = eval(&caps.doubled())?;
        if big.coords != res.coords {
            return Err(Error::CapInstability {
                caps: vec![caps.y_cap, caps.y_window, caps.x_cap, caps.x_window],
                first: format!("{:?}", res.coords),
                second: format!("{:?}", big.coords),
            });
        }
        res.cap_stable = Some(true);
    }
    Ok(res)
}

/// Depth of `1 / ((1 + T)^{p^n} - 1)` at precision `N`.
fn kernel_depth(p: u64, n: u32, prec: u32) -> i32 {
    let q = (p as i32).pow(n);
    q + (prec as i32 + 1) * (q - 1)
}

fn kernel_caps(cfg: &BracketConfig) -> Caps {
    let d = kernel_depth(cfg.p, cfg.m, cfg.working_precision());
    Caps { y_cap: d + 2, y_window: -(d + 2), x_cap: 0, x_window: 0 }
}

fn kernel_bracket(
    cfg: &BracketConfig,
    name: &str,
    var: VarKind,
    f: &TruncatedSeries,
    g: &TruncatedSeries,
    s: Option<&TruncatedSeries>,
) -> Result<SymbolResult> {
    let ctx = cfg.context()?;
    let vname = if var == VarKind::Cyclotomic { "X" } else { "Y" };
    with_stability(cfg, kernel_caps(cfg), |caps| {
        let ring = univariate(&ctx, vname, var, caps)?;
        let f = rehome(f, &ring)?;
        let g = rehome(g, &ring)?;
        let s = match s {
            Some(s) => rehome(s, &ring)?,
            None => TruncatedSeries::one(&ring).add(&TruncatedSeries::var(&ring, 0))?,
        };
        let q = ctx.p_pow(cfg.m) as u32;
        let kernel = s.pow(q)?.sub(&TruncatedSeries::one(&ring))?.invert_laurent(0)?;
        let om = integrand(&f, &g)?;
        let (v, raw) = trace_residue(&kernel.mul(&om)?, cfg.m)?;
        Ok(SymbolResult {
            bracket: name.into(),
            p: cfg.p,
            modulus_exponent: cfg.m,
            coords: vec![v],
            working_precision: cfg.working_precision(),
            caps: *caps,
            certificate: certificate(&ctx, &[raw]),
            cap_stable: None,
            residual: None,
        })
    })
}

/// Coleman's bracket `Tr Res_X (1/φ^n(X)) (𝓛(G) dlog F - 𝓛(F) dlog φ(G) / p)`
/// for units `F, G` of `W[[X]]` congruent to 1 modulo `(p, X)`.
pub fn coleman_bracket(cfg: &BracketConfig, f: &TruncatedSeries, g: &TruncatedSeries) -> Result<SymbolResult> {
    for (name, u) in [("F", f), ("G", g)] {
        let c0 = u.coeff(&[0]);
        let one = u.ctx().q_one();
        let ok = u.terms().keys().all(|e| e[0] >= 0)
            && u.ctx().q_sub(&c0, &one).valuation().is_none_or(|v| v >= 1);
        if !ok {
            return Err(Error::NotAOneUnit(format!("{name} is not congruent to 1 modulo (p, X)")));
        }
    }
    kernel_bracket(cfg, "coleman", VarKind::Cyclotomic, f, g, None)
}

/// Brückner–Vostokov bracket `Tr Res_Y (1/(s^{p^n} - 1)) (𝓛(G) dlog F - 𝓛(F) dlog φ(G) / p)`;
/// `s = 1 + Y` when not given.
pub fn bv_bracket(
    cfg: &BracketConfig,
    f: &TruncatedSeries,
    g: &TruncatedSeries,
    s: Option<&TruncatedSeries>,
) -> Result<SymbolResult> {
    kernel_bracket(cfg, "bv", VarKind::Kummer, f, g, s)
}

/// Group, period matrix and ring at the given caps.
struct FormalSetup {
    ring: Arc<SeriesRing>,
    group: FormalGroupData,
    pm: PeriodMatrixApprox,
}

fn formal_setup(cfg: &BracketConfig, src: &GroupSource, caps: &Caps) -> Result<FormalSetup> {
    let ctx = cfg.context()?;
    let ring = univariate(&ctx, "Y", VarKind::Kummer, caps)?;
    let (group, lifts, e) = match src {
        GroupSource::Multiplicative => {
            let g = FormalGroupData::multiplicative_logarithm(&ctx, caps.y_cap)?;
            let e = (cfg.p as i64 - 1) * (cfg.p as i64).pow(cfg.m - 1);
            (g, vec![vec![TruncatedSeries::var(&ring, 0)]], e)
        }
        GroupSource::Descriptor { descriptor, lifts, e } => {
            let op = descriptor.operator(ctx.n())?;
            let op_ctx = op.ctx().clone();
            if op_ctx.n() != ctx.n() {
                return Err(Error::SpecMismatch("descriptor precision differs from the working precision".into()));
            }
            let g = FormalGroupData::logarithm_only(&op, None, caps.y_cap)?;
            let ring = univariate(&op_ctx, "Y", VarKind::Kummer, caps)?;
            let lifts = lifts.iter().map(|l| l.iter().map(|s| rehome(s, &ring)).collect()).collect::<Result<_>>()?;
            (g, lifts, *e)
        }
    };
    let ring = lifts[0][0].ring().clone();
    let pm = build_period_matrix(&group, cfg.m, e, lifts)?;
    Ok(FormalSetup { ring, group, pm })
}

fn default_formal_caps(cfg: &BracketConfig) -> Caps {
    let q = (cfg.p as i32).pow(cfg.m + 1);
    let n = cfg.working_precision() as i32;
    Caps { y_cap: 4 * q + 8, y_window: -(8 * q + 16), x_cap: (cfg.p * cfg.p) as i32, x_window: -((cfg.p as i32) + 2 * (n - 1)) }
}

/// Path A: `Tr Res_Y P ( ((1 - 𝓐/p) l(β); 0) dlog α - 𝓛(α) d/dY ((𝓐/p) l(β); m(β)) )`
/// with `P` the annulus principal part of `𝓥_Y^{-1}`.
pub fn formal_bracket(
    cfg: &BracketConfig,
    src: &GroupSource,
    alpha: &TruncatedSeries,
    beta: &[TruncatedSeries],
) -> Result<SymbolResult> {
    with_stability(cfg, default_formal_caps(cfg), |caps| {
        let FormalSetup { ring, group, pm } = formal_setup(cfg, src, caps)?;
        let ctx = ring.ctx().clone();
        let a = rehome(alpha, &ring)?;
        let b: Vec<TruncatedSeries> = beta.iter().map(|s| rehome(s, &ring)).collect::<Result<_>>()?;
        let la = a.coleman_functional()?.to_rational();
        let dla = a.dlog(0)?;
        let lb: Vec<TruncatedSeries> = group.logarithm().iter().map(|l| l.compose(&b)).collect::<Result<_>>()?;
        let mb: Vec<TruncatedSeries> =
            group.pseudo_logarithm().iter().map(|l| l.compose(&b)).collect::<Result<_>>()?;
        let al = group.operator().apply_over_p(&lb)?;
        let mut w = Vec::with_capacity(group.height());
        for (l, a_l) in lb.iter().zip(&al) {
            let u = l.sub(a_l)?;
            u.to_integral()?;
            w.push(u.mul(&dla)?.sub(&la.mul(&a_l.derivative(0)?)?)?);
        }
        for m in &mb {
            w.push(la.mul(&m.derivative(0)?)?.neg());
        }
        let mut coords = Vec::new();
        let mut raws = Vec::new();
        for row in &pm.annulus_principal_part {
            let mut s = TruncatedSeries::zero(&ring);
            for (pk, wk) in row.iter().zip(&w) {
                s = s.add(&pk.mul(wk)?)?;
            }
            let (v, raw) = trace_residue(&s, cfg.m)?;
            coords.push(v);
            raws.push(raw);
        }
        Ok(SymbolResult {
            bracket: "formal".into(),
            p: cfg.p,
            modulus_exponent: cfg.m,
            coords,
            working_precision: cfg.working_precision(),
            caps: *caps,
            certificate: certificate(&ctx, &raws),
            cap_stable: None,
            residual: None,
        })
    })
}

/// Path B without the stability wrapper: the full report, failures included.
pub fn cohomological_report(
    cfg: &BracketConfig,
    src: &GroupSource,
    alpha: &TruncatedSeries,
    beta: &[TruncatedSeries],
    caps: &Caps,
) -> Result<SymbolResult> {
    let FormalSetup { ring, group, pm } = formal_setup(cfg, src, caps)?;
    let ctx = ring.ctx().clone();
    let module = HerrModule::laurent(
        &ctx,
        CoeffKind::Integral,
        (caps.x_cap, caps.y_cap),
        (caps.x_window, caps.y_window),
        1,
        cfg.chi,
    )?;
    let a = rehome(alpha, &ring)?;
    let b: Vec<TruncatedSeries> = beta.iter().map(|s| rehome(s, &ring)).collect::<Result<_>>()?;
    let (ka, alpha_certificate) = kummer_triple_classical(&module, &a)?;
    let (kb, beta_certificate) = kummer_triple_formal(&module, &group, &pm, &b)?;
    let policy = MonomialShadow::degree_two(cfg.m as i32, pm.e);
    let mut coords = Vec::new();
    let mut swapped = Vec::new();
    let mut raws = Vec::new();
    let mut discards = Vec::new();
    let mut failures = Vec::new();
    for t in &kb {
        let cup = module.cup_11(t, &module, &ka)?;
        let red = final_reduction(&cup, &policy)?;
        coords.push(reduce(&ctx, &red.trace, cfg.m)?);
        raws.push(red.trace.clone());
        discards.extend(red.discards);
        failures.extend(red.failures);
        let other = final_reduction(&module.cup_11(&ka, &module, t)?, &policy)?;
        swapped.push(reduce(&ctx, &other.trace, cfg.m).unwrap_or(u64::MAX));
    }
    Ok(SymbolResult {
        bracket: "formal-cohomological".into(),
        p: cfg.p,
        modulus_exponent: cfg.m,
        coords,
        working_precision: cfg.working_precision(),
        caps: *caps,
        certificate: certificate(&ctx, &raws),
        cap_stable: None,
        residual: Some(ResidualReport {
            discards,
            failures,
            alpha_certificate,
            beta_certificate,
            swapped_order_coords: swapped,
        }),
    })
}

/// Path B: `κ(β) ∪ κ(α)` reduced to `Tr(w)`.
///
/// Raises `ShadowClassificationFailure` when a discarded monomial fits no
/// ideal class.
pub fn formal_bracket_cohomological(
    cfg: &BracketConfig,
    src: &GroupSource,
    alpha: &TruncatedSeries,
    beta: &[TruncatedSeries],
) -> Result<SymbolResult> {
    with_stability(cfg, default_formal_caps(cfg), |caps| {
        let r = cohomological_report(cfg, src, alpha, beta, caps)?;
        if let Some(res) = &r.residual {
            if !res.failures.is_empty() {
                return Err(Error::ShadowClassificationFailure(res.failures.join("; ")));
            }
        }
        Ok(r)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, cap: i32) -> Arc<SeriesRing> {
        let ctx = PadicContext::new(p, 1, 6).unwrap();
        SeriesRing::univariate(&ctx, CoeffKind::Rational, "Y", VarKind::Kummer, cap, -cap).unwrap()
    }

    fn poly(r: &Arc<SeriesRing>, c: &[(i32, i64)]) -> TruncatedSeries {
        let ctx = r.ctx().clone();
        TruncatedSeries::from_terms(r, c.iter().map(|&(k, v)| ([k].into_iter().collect(), ctx.q_from_i64(v)))).unwrap()
    }

    #[test]
    fn precision_formula() {
        assert_eq!(working_precision(3, 1), 5);
        assert_eq!(working_precision(3, 2), 7);
    }

    #[test]
    fn bv_examples() {
        let r = ring(3, 8);
        let cfg = BracketConfig::new(3, 1);
        let y = poly(&r, &[(1, 1)]);
        let one_y = poly(&r, &[(0, 1), (1, 1)]);
        assert_eq!(bv_bracket(&cfg, &y, &y, None).unwrap().coords, vec![0]);
        let res = bv_bracket(&cfg, &one_y, &y, None).unwrap();
        assert_eq!(res.coords, vec![0]);
        assert_eq!(res.cap_stable, Some(true));
    }

    #[test]
    fn path_a_matches_bv_on_a_few_pairs() {
        let r = ring(3, 8);
        let cfg = BracketConfig::new(3, 1);
        let pairs = [
            (vec![(1, 1)], vec![(1, 1)]),
            (vec![(0, 1), (1, 1)], vec![(1, 1)]),
            (vec![(1, 1)], vec![(2, 1)]),
            (vec![(0, 1), (1, 1), (2, 1)], vec![(1, 3), (3, 1)]),
        ];
        for (a, b) in pairs {
            let a = poly(&r, &a);
            let b = poly(&r, &b);
            let one_b = TruncatedSeries::one(&r).add(&b).unwrap();
            let pa = formal_bracket(&cfg, &GroupSource::Multiplicative, &a, std::slice::from_ref(&b)).unwrap();
            let bv = bv_bracket(&cfg, &a, &one_b, None).unwrap();
            assert_eq!(pa.coords, bv.coords, "alpha={a} beta={b}");
        }
    }

    /// `α = Y^d (1 + a_1 Y + a_2 Y^2 + a_3 Y^3)`, `β = b_1 Y + b_2 Y^2 + b_3 Y^3`.
    pub(crate) fn random_pair(r: &Arc<SeriesRing>, rng: &mut impl rand::Rng) -> (TruncatedSeries, TruncatedSeries) {
        let d = [0, 0, 1, 2][rng.gen_range(0..4)];
        let mut a = vec![(d, 1)];
        a.extend((1..4).map(|i| (d + i, rng.gen_range(0..9))));
        let mut b: Vec<(i32, i64)> = (1..4).map(|i| (i, rng.gen_range(0..9))).collect();
        if b.iter().all(|t| t.1 == 0) {
            b[0].1 = 1;
        }
        (poly(r, &a), poly(r, &b))
    }

    #[test]
    fn path_b_matches_path_a_mod_p() {
        use rand::SeedableRng;
        let r = ring(3, 8);
        let mut cfg = BracketConfig::new(3, 1);
        cfg.check_stability = false;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut nonzero = 0;
        for _ in 0..6 {
            let (a, b) = random_pair(&r, &mut rng);
            let pa = formal_bracket(&cfg, &GroupSource::Multiplicative, &a, std::slice::from_ref(&b)).unwrap();
            let pb = cohomological_report(&cfg, &GroupSource::Multiplicative, &a, std::slice::from_ref(&b), &pa.caps).unwrap();
            let res = pb.residual.as_ref().unwrap();
            assert!(res.failures.is_empty(), "{:?}", res.failures);
            assert_eq!(pa.coords, pb.coords, "alpha={a} beta={b}");
            let one_b = TruncatedSeries::one(&r).add(&b).unwrap();
            assert_eq!(pa.coords, bv_bracket(&cfg, &a, &one_b, None).unwrap().coords);
            nonzero += (pa.coords[0] != 0) as usize;
        }
        assert!(nonzero > 0);
    }

    #[test]
    fn path_a_matches_bv_mod_nine() {
        use rand::SeedableRng;
        let r = ring(3, 8);
        let cfg = BracketConfig::new(3, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2 {
            let (a, b) = random_pair(&r, &mut rng);
            let one_b = TruncatedSeries::one(&r).add(&b).unwrap();
            let pa = formal_bracket(&cfg, &GroupSource::Multiplicative, &a, std::slice::from_ref(&b)).unwrap();
            let bv = bv_bracket(&cfg, &a, &one_b, None).unwrap();
            assert_eq!(pa.coords, bv.coords, "alpha={a} beta={b}");
        }
    }
}
