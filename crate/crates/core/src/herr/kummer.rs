//! Kummer triples and evaluation of degree-1 cocycles on `γ^n τ^m`.

use serde::Serialize;

use super::{HerrModule, HerrTriple};
use crate::error::{Error, Result};
use crate::formal_group::{FormalGroupData, PeriodMatrixApprox};
use crate::series::{TruncatedSeries, VarKind};
use crate::shadow::{MonomialShadow, ShadowPolicy, XyShadow};

/// Outcome of checking the `β`-equations of a triple modulo an ideal shadow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub terms_checked: usize,
    /// Monomials of `β(x, y, z)` outside the shadow.
    pub unclassified: Vec<String>,
    pub pass: bool,
}

fn certify(module: &HerrModule, comps: &[&TruncatedSeries], policy: &dyn ShadowPolicy) -> Certificate {
    let ring = module.ring();
    let ctx = ring.ctx();
    let xi = ring.var_of_kind(VarKind::Cyclotomic).unwrap();
    let yi = ring.var_of_kind(VarKind::Kummer);
    let mut cert = Certificate { terms_checked: 0, unclassified: Vec::new(), pass: true };
    for (k, s) in comps.iter().enumerate() {
        for (e, c) in s.terms() {
            cert.terms_checked += 1;
            if policy.classify(ctx, c, e[xi], yi.map_or(0, |i| e[i])).is_none() {
                cert.unclassified.push(format!("equation {k}: {} * {}", ctx.q_to_string(c), s.format_exp(e)));
            }
        }
    }
    cert.pass = cert.unclassified.is_empty();
    cert
}

fn y_index(module: &HerrModule) -> Result<usize> {
    module.ring().var_of_kind(VarKind::Kummer).ok_or_else(|| Error::SpecMismatch("module has no Kummer variable".into()))
}

/// `(-𝓛(F)(1/X + 1/2), 0, Y dlog F)` in the twist-one module, with the
/// `β`-equations checked modulo `XY W[[X, Y]] + p^N`.
///
/// `f` is a univariate `Y`-series `Y^d G` with `G(0)` a unit; the module
/// needs an `X`-window of at least one.
pub fn kummer_triple_classical(module: &HerrModule, f: &TruncatedSeries) -> Result<(HerrTriple, Certificate)> {
    let module = module.with_twist(1);
    let ring = module.ring().clone();
    let ctx = ring.ctx().clone();
    let yi = y_index(&module)?;
    let xi = ring.var_of_kind(VarKind::Cyclotomic).unwrap();
    let n = ring.nvars();
    let l = f.coleman_functional()?.reindex(&ring, &[yi])?;
    let z = f.dlog(0)?.shift(&[1])?.reindex(&ring, &[yi])?;
    let mut xinv = vec![0; n];
    xinv[xi] = -1;
    let zero_exp = vec![0; n];
    let kernel = TruncatedSeries::from_terms(
        &ring,
        [(xinv.into(), ctx.q_one()), (zero_exp.into(), ctx.q_from_ratio(1, 2)?)],
    )?;
    let x = l.mul(&kernel)?.neg();
    let t = HerrTriple::new(x, TruncatedSeries::zero(&ring), z, 1, 1);
    let b = module.beta(&t)?;
    let cert = certify(&module, &[&b.x, &b.y, &b.z], &XyShadow { n: ctx.n() as i32 });
    Ok((t, cert))
}

/// The formal Kummer triples `(x_i, 0, z_i)`, one per torsion-basis
/// coordinate `i = 1..h`:
/// `x = P ((𝓐/p - 1) l(β); 0)` and `z = X Y P d/dY (l(β); m(β))`, where
/// `P` is the annulus principal part of `𝓥_Y^{-1}`.
///
/// Raises `IntegralityFailure` when `(𝓐/p - 1) l(β)` is not integral. The
/// certificate checks `(τ - 1)x ≡ (φ - 1)z` modulo `X W(m) + p^M`.
pub fn kummer_triple_formal(
    module: &HerrModule,
    group: &FormalGroupData,
    pm: &PeriodMatrixApprox,
    beta: &[TruncatedSeries],
) -> Result<(Vec<HerrTriple>, Certificate)> {
    let module = module.with_twist(1);
    let ring = module.ring().clone();
    let yi = y_index(&module)?;
    let xi = ring.var_of_kind(VarKind::Cyclotomic).unwrap();
    let h = group.height();
    let lb: Vec<TruncatedSeries> = group.logarithm().iter().map(|l| l.compose(beta)).collect::<Result<_>>()?;
    let mb: Vec<TruncatedSeries> =
        group.pseudo_logarithm().iter().map(|l| l.compose(beta)).collect::<Result<_>>()?;
    let al = group.operator().apply_over_p(&lb)?;
    let yr = pm.ring().clone();
    let mut v: Vec<TruncatedSeries> = Vec::with_capacity(h);
    for (a, l) in al.iter().zip(&lb) {
        // integrality of the Honda term
        a.sub(l)?.to_integral()?;
        v.push(a.sub(l)?);
    }
    while v.len() < h {
        v.push(TruncatedSeries::zero(&yr));
    }
    let dv: Vec<TruncatedSeries> = lb.iter().chain(mb.iter()).map(|s| s.derivative(0)).collect::<Result<_>>()?;
    let p = &pm.annulus_principal_part;
    let n = ring.nvars();
    let mut xy = vec![0; n];
    xy[xi] = 1;
    xy[yi] = 1;
    let mut triples = Vec::with_capacity(h);
    for row in p.iter() {
        let mut x = TruncatedSeries::zero(&yr);
        let mut z = TruncatedSeries::zero(&yr);
        for (k, pk) in row.iter().enumerate() {
            x = x.add(&pk.mul(&v[k])?)?;
            z = z.add(&pk.mul(&dv[k])?)?;
        }
        let x = x.reindex(&ring, &[yi])?;
        let z = z.reindex(&ring, &[yi])?.shift(&xy)?;
        triples.push(HerrTriple::new(x, TruncatedSeries::zero(&ring), z, 1, 1));
    }
    let policy = MonomialShadow::x_maximal(pm.m as i32, pm.e);
    let eqs: Vec<TruncatedSeries> = triples
        .iter()
        .map(|t| module.tau(&t.x)?.sub(&t.x)?.sub(&module.phi(&t.z)?.sub(&t.z)?))
        .collect::<Result<_>>()?;
    let cert = certify(&module, &eqs.iter().collect::<Vec<_>>(), &policy);
    Ok((triples, cert))
}

/// `γ^n ((τ^m - 1)/(τ - 1)) z + ((γ^n - 1)/(γ - 1)) y - (γ^n τ^m - 1) b`.
///
/// The `b` term is included only when `b` is supplied.
pub fn realize_cocycle(
    module: &HerrModule,
    t: &HerrTriple,
    n: u32,
    m: i64,
    b: Option<&TruncatedSeries>,
) -> Result<TruncatedSeries> {
    let gamma_n = |s: &TruncatedSeries| -> Result<TruncatedSeries> {
        let mut s = s.clone();
        for _ in 0..n {
            s = module.gamma(&s)?;
        }
        Ok(s)
    };
    let mut out = gamma_n(&module.tau_quotient(&t.z, m)?)?;
    let mut g = t.y.clone();
    for _ in 0..n {
        out = out.add(&g)?;
        g = module.gamma(&g)?;
    }
    if let Some(b) = b {
        let sb = gamma_n(&b.tau_pow(m)?)?;
        out = out.sub(&sb.sub(b)?)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicContext;
    use crate::series::{CoeffKind, SeriesRing};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn yring(ctx: &std::sync::Arc<PadicContext>, cap: i32) -> std::sync::Arc<SeriesRing> {
        SeriesRing::univariate(ctx, CoeffKind::Rational, "Y", VarKind::Kummer, cap, -cap).unwrap()
    }

    #[test]
    fn classical_examples() {
        let ctx = PadicContext::new(3, 1, 4).unwrap();
        let module = HerrModule::laurent(&ctx, CoeffKind::Integral, (4, 4), (-2, -4), 1, 4).unwrap();
        let yr = yring(&ctx, 4);
        let y = TruncatedSeries::var(&yr, 0);
        let (t, cert) = kummer_triple_classical(&module, &y).unwrap();
        assert!(cert.pass, "{cert:?}");
        assert!(t.x.is_zero_within() && t.y.is_zero_within());
        assert!(t.z.eq_within(&TruncatedSeries::one(module.ring())));

        let one_y = TruncatedSeries::one(&yr).add(&y).unwrap();
        let (t2, cert2) = kummer_triple_classical(&module, &one_y).unwrap();
        assert!(cert2.pass, "{cert2:?}");
        let r = module.ring();
        // x = -(Y - Y^2/2)(1/X + 1/2)
        let half = ctx.q_from_ratio(1, 2).unwrap();
        let mhalf = ctx.q_from_ratio(-1, 2).unwrap();
        let quarter = ctx.q_from_ratio(1, 4).unwrap();
        let want_x = TruncatedSeries::from_terms(
            r,
            [
                ([-1, 1].into_iter().collect(), ctx.q_from_i64(-1)),
                ([-1, 2].into_iter().collect(), half.clone()),
                ([0, 1].into_iter().collect(), mhalf),
                ([0, 2].into_iter().collect(), quarter),
            ],
        )
        .unwrap();
        assert!(t2.x.eq_within(&want_x), "{}", t2.x);

        let prod = y.mul(&one_y).unwrap();
        let (t3, _) = kummer_triple_classical(&module, &prod).unwrap();
        assert!(t3.sub(&t.add(&t2).unwrap()).unwrap().is_zero_within());
    }

    #[test]
    fn realize_cocycle_examples() {
        let ctx = PadicContext::new(3, 1, 3).unwrap();
        let module = HerrModule::new(&ctx, (3, 3), 0, 0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = module.random_triple(&mut rng).unwrap();
        assert!(realize_cocycle(&module, &t, 0, 1, None).unwrap().eq_within(&t.z));
        assert!(realize_cocycle(&module, &t, 1, 0, None).unwrap().eq_within(&t.y));
        // (τ^9 - 1)/(τ - 1) against the sum of τ^k
        let mut want = TruncatedSeries::zero(module.ring());
        let mut s = t.z.clone();
        for _ in 0..9 {
            want = want.add(&s).unwrap();
            s = s.tau().unwrap();
        }
        assert!(realize_cocycle(&module, &t, 0, 9, None).unwrap().eq_within(&want));
    }
}
