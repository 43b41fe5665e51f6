//! The approximated period matrix `𝓥_Y` and its principal parts.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::{compose_all, FormalGroupData};
use crate::error::{Error, Result};
use crate::series::{CoeffKind, SeriesRing, TruncatedSeries};
use crate::shadow::{MonomialShadow, ShadowClass, ShadowPolicy};

type Matrix = Vec<Vec<TruncatedSeries>>;

/// `𝓥_Y` built from lifts of a torsion basis, with its inverses.
#[derive(Clone, Debug)]
pub struct PeriodMatrixApprox {
    /// Torsion level `M`.
    pub m: u32,
    /// Ramification index `e` of the base field.
    pub e: i64,
    /// Lifts `ô^i_M`, each a `d`-vector of `Y`-series.
    pub lifts: Vec<Vec<TruncatedSeries>>,
    /// `𝓥_Y`, column `i` is `p^M (l(ô^i); m(ô^i))`.
    pub matrix: Matrix,
    /// Inverse in the naive `Y`-adic Laurent expansion.
    pub naive_inverse: Matrix,
    /// Terms of `naive_inverse` with `Y`-exponent at most zero.
    pub principal_part: Matrix,
    /// Principal part of the inverse expanded on the annulus of radius `p - 1`.
    pub annulus_principal_part: Matrix,
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let ring = a[0][0].ring().clone();
    let mut out = Vec::with_capacity(a.len());
    for row in a {
        let mut r = Vec::with_capacity(b[0].len());
        for j in 0..b[0].len() {
            let mut s = TruncatedSeries::zero(&ring);
            for (k, x) in row.iter().enumerate() {
                s = s.add(&x.mul(&b[k][j])?)?;
            }
            r.push(s);
        }
        out.push(r);
    }
    Ok(out)
}

fn minor(a: &Matrix, skip_r: usize, skip_c: usize) -> Matrix {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip_r)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != skip_c).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Determinant by cofactor expansion (the matrices here are tiny).
fn det(a: &Matrix) -> Result<TruncatedSeries> {
    if a.len() == 1 {
        return Ok(a[0][0].clone());
    }
    let ring = a[0][0].ring().clone();
    let mut s = TruncatedSeries::zero(&ring);
    for j in 0..a.len() {
        let t = a[0][j].mul(&det(&minor(a, 0, j))?)?;
        s = if j % 2 == 0 { s.add(&t)? } else { s.sub(&t)? };
    }
    Ok(s)
}

fn adjugate(a: &Matrix) -> Result<Matrix> {
    let n = a.len();
    let ring = a[0][0].ring().clone();
    if n == 1 {
        return Ok(vec![vec![TruncatedSeries::one(&ring)]]);
    }
    let mut out = vec![vec![TruncatedSeries::zero(&ring); n]; n];
    for i in 0..n {
        for j in 0..n {
            let c = det(&minor(a, i, j))?;
            out[j][i] = if (i + j) % 2 == 0 { c } else { c.neg() };
        }
    }
    Ok(out)
}

fn scale_matrix(a: &Matrix, s: &TruncatedSeries) -> Result<Matrix> {
    a.iter().map(|row| row.iter().map(|x| x.mul(s)).collect()).collect()
}

fn principal(a: &Matrix) -> Matrix {
    a.iter().map(|row| row.iter().map(|x| x.filter_terms(|e| e[0] <= 0)).collect()).collect()
}

/// Working precision for the annulus expansion at level `m`.
fn annulus_precision(p: u64, m: u32) -> i64 {
    let p = p as i64;
    let m = m as i64;
    m + (m * p + p - 2) / (p - 1) + 2
}

/// Assembles `𝓥_Y` and inverts it.
///
/// The lifts live in a univariate `Y`-ring with rational coefficients and a
/// Laurent window wide enough for the inverse.
pub fn build_period_matrix(
    group: &FormalGroupData,
    m: u32,
    e: i64,
    lifts: Vec<Vec<TruncatedSeries>>,
) -> Result<PeriodMatrixApprox> {
    let h = group.height();
    let d = group.dim();
    if lifts.len() != h || lifts.iter().any(|l| l.len() != d) {
        return Err(Error::SpecMismatch(format!("need {h} lifts of dimension {d}")));
    }
    let ring = lifts[0][0].ring().clone();
    if ring.nvars() != 1 || ring.kind() != CoeffKind::Rational {
        return Err(Error::SpecMismatch("lifts must be univariate series over rational coefficients".into()));
    }
    for l in lifts.iter().flatten() {
        if !l.coeff(&[0]).is_zero() {
            return Err(Error::SpecMismatch("lifts must have zero constant term".into()));
        }
    }
    let ctx = ring.ctx().clone();
    let pm = ctx.q_p_power(m as i32);
    let mut cols = Vec::with_capacity(h);
    for lift in &lifts {
        let mut col = compose_all(group.logarithm(), lift)?;
        col.extend(compose_all(group.pseudo_logarithm(), lift)?);
        cols.push(col.iter().map(|s| s.scale(&pm)).collect::<Result<Vec<_>>>()?);
    }
    let matrix: Matrix = (0..h).map(|r| (0..h).map(|c| cols[c][r].clone()).collect()).collect();

    let dt = det(&matrix)?;
    let adj = adjugate(&matrix)?;
    let naive_inverse = scale_matrix(&adj, &dt.invert_adic(0)?)?;
    let principal_part = principal(&naive_inverse);

    let p = ctx.p();
    let r = (p as i64 - 1, 1);
    let threshold = e * (p as i64 - 1) * annulus_precision(p, m);
    let ann = dt.invert_annulus(0, e, r, threshold)?;
    let annulus_principal_part = principal(&scale_matrix(&adj, &ann.series)?);

    Ok(PeriodMatrixApprox { m, e, lifts, matrix, naive_inverse, principal_part, annulus_principal_part })
}

impl PeriodMatrixApprox {
    /// `𝓥_Y 𝓥_Y^{-1} = 1` within the recorded uncertainty.
    pub fn inverse_holds(&self) -> Result<bool> {
        let prod = mat_mul(&self.matrix, &self.naive_inverse)?;
        let ring = self.matrix[0][0].ring().clone();
        let one = TruncatedSeries::one(&ring);
        let zero = TruncatedSeries::zero(&ring);
        Ok(prod.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, x)| x.eq_within(if i == j { &one } else { &zero }))
        }))
    }

    /// The `Y` ring of the matrix.
    pub fn ring(&self) -> &Arc<SeriesRing> {
        self.matrix[0][0].ring()
    }
}

/// Outcome of the congruence `(τ - 1)(P U) ≡ X Y P dU/dY`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TauCongruenceReport {
    /// Nonzero monomials of the difference.
    pub terms_checked: usize,
    /// Count of discarded monomials per class.
    pub classified: BTreeMap<String, usize>,
    /// Monomials outside the ideal shadow.
    pub unclassified: Vec<String>,
    pub pass: bool,
}

/// Checks the `τ`-congruence for `P = pm.annulus_principal_part` in the
/// two-variable ring with `X` capped at `x_cap`.
///
/// The difference is classified against the shadow of `X W(m) + p^M`.
pub fn check_tau_congruence(pm: &PeriodMatrixApprox, u: &TruncatedSeries, x_cap: i32) -> Result<TauCongruenceReport> {
    let yr = pm.ring().clone();
    let ctx = yr.ctx().clone();
    let u = u.to_rational();
    if **u.ring() != *yr {
        return Err(Error::SpecMismatch("U must live in the ring of the period matrix".into()));
    }
    let du = u.derivative(0)?;
    let yv = &yr.vars()[0];
    let xy = SeriesRing::bivariate(&ctx, CoeffKind::Rational, (x_cap, yv.cap), (0, yv.window))?;
    let policy = MonomialShadow::x_maximal(pm.m as i32, pm.e);
    let mut report = TauCongruenceReport { terms_checked: 0, classified: BTreeMap::new(), unclassified: Vec::new(), pass: true };
    for row in &pm.annulus_principal_part {
        for p in row {
            let q = p.mul(&u)?.reindex(&xy, &[1])?;
            let r = p.mul(&du)?.reindex(&xy, &[1])?;
            let lhs = q.tau()?.sub(&q)?;
            let rhs = r.shift(&[1, 1])?;
            let diff = lhs.sub(&rhs)?;
            for (e, c) in diff.terms() {
                report.terms_checked += 1;
                match policy.classify(&ctx, c, e[0], e[1]) {
                    Some(cls) => *report.classified.entry(class_name(cls).into()).or_default() += 1,
                    None => report.unclassified.push(format!("{} * {}", ctx.q_to_string(c), diff.format_exp(e))),
                }
            }
        }
    }
    report.pass = report.unclassified.is_empty();
    Ok(report)
}

fn class_name(c: ShadowClass) -> &'static str {
    match c {
        ShadowClass::PowerOfP => "power_of_p",
        ShadowClass::Maximal => "maximal",
        ShadowClass::NegativePart => "negative_part",
        ShadowClass::TwistedMaximal => "twisted_maximal",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicContext;
    use crate::series::VarKind;

    fn gm_period(m: u32, cap: i32) -> PeriodMatrixApprox {
        let ctx = PadicContext::new(3, 1, 10).unwrap();
        let g = FormalGroupData::multiplicative(&ctx, cap).unwrap();
        let yr = SeriesRing::univariate(&ctx, CoeffKind::Rational, "Y", VarKind::Kummer, cap, -20 * cap).unwrap();
        let y = TruncatedSeries::var(&yr, 0);
        let e = 2 * 3i64.pow(m - 1);
        build_period_matrix(&g, m, e, vec![vec![y]]).unwrap()
    }

    #[test]
    fn multiplicative_period_matrix() {
        let pm = gm_period(1, 6);
        let yr = pm.ring().clone();
        let ctx = yr.ctx().clone();
        let one_y = TruncatedSeries::one(&yr).add(&TruncatedSeries::var(&yr, 0)).unwrap();
        let want = one_y.log_one_unit().unwrap().scale_i64(3).unwrap();
        assert!(pm.matrix[0][0].eq_within(&want));
        assert!(pm.inverse_holds().unwrap());
        let inv = &pm.naive_inverse[0][0];
        assert!(ctx.q_eq(&inv.coeff(&[-1]), &ctx.q_from_ratio(1, 3).unwrap()));
        assert!(ctx.q_eq(&inv.coeff(&[0]), &ctx.q_from_ratio(1, 6).unwrap()));
        assert!(ctx.q_eq(&inv.coeff(&[1]), &ctx.q_from_ratio(-1, 36).unwrap()));
        // the annulus principal part is p-entire
        assert!(pm.annulus_principal_part[0][0].min_valuation().unwrap() >= 0);
    }

    #[test]
    fn tau_congruence_examples() {
        let pm = gm_period(1, 6);
        let yr = pm.ring().clone();
        let c = TruncatedSeries::from_i64(&yr, 5);
        let rep = check_tau_congruence(&pm, &c, 4).unwrap();
        assert!(rep.pass, "{rep:?}");
        let y = TruncatedSeries::var(&yr, 0);
        let rep = check_tau_congruence(&pm, &y, 4).unwrap();
        assert!(rep.pass, "{rep:?}");
        let rep = check_tau_congruence(&pm, &y.mul(&y).unwrap(), 4).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}
