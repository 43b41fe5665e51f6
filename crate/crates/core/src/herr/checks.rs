//! Randomized checks of the complex, the group relations and the cup product.

use rand::Rng;
use serde::Serialize;

use super::{random_combination, HerrModule};
use crate::error::Result;

/// Failure counts of the complex identities over random samples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexReport {
    pub samples: usize,
    pub chi: i64,
    /// `β(α(m)) != 0`.
    pub beta_alpha: usize,
    /// `η(β(t)) != 0`.
    pub eta_beta: usize,
    /// `f_2(f_1(m)) != 0` on `X`-only inputs.
    pub f2_f1: usize,
    /// `γτ(m) != τ^χ γ(m)`.
    pub gamma_tau: usize,
    /// `δ((τ - 1)m) != (τ^χ - 1)m`.
    pub delta_tau: usize,
    pub pass: bool,
}

/// Runs every identity on `samples` random inputs.
pub fn check_complex<R: Rng>(module: &HerrModule, samples: usize, rng: &mut R) -> Result<ComplexReport> {
    let mut r = ComplexReport {
        samples,
        chi: module.chi(),
        beta_alpha: 0,
        eta_beta: 0,
        f2_f1: 0,
        gamma_tau: 0,
        delta_tau: 0,
        pass: false,
    };
    for _ in 0..samples {
        let m = module.random_element(rng)?;
        if !module.beta(&module.alpha(&m)?)?.is_zero_within() {
            r.beta_alpha += 1;
        }
        let t = module.random_triple(rng)?;
        if !module.eta(&module.beta(&t)?)?.is_zero_within() {
            r.eta_beta += 1;
        }
        let mx = module.random_x_element(rng)?;
        let (a, b) = module.f1(&mx)?;
        if !module.f2(&a, &b)?.is_zero_within() {
            r.f2_f1 += 1;
        }
        let lhs = module.gamma(&module.tau(&m)?)?;
        let rhs = module.tau_chi(&module.gamma(&m)?)?;
        if !lhs.sub(&rhs)?.is_zero_within() {
            r.gamma_tau += 1;
        }
        let lhs = module.delta(&module.tau(&m)?.sub(&m)?)?;
        let rhs = module.tau_chi(&m)?.sub(&m)?;
        if !lhs.sub(&rhs)?.is_zero_within() {
            r.delta_tau += 1;
        }
    }
    r.pass = r.beta_alpha + r.eta_beta + r.f2_f1 + r.gamma_tau + r.delta_tau == 0;
    Ok(r)
}

/// `η` applied to cups of random 1-cocycles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CupReport {
    pub samples: usize,
    /// Dimension count of the cocycle generators used.
    pub generators: usize,
    pub failures: usize,
    pub pass: bool,
}

/// Cups random cocycles of `module` with random cocycles of `other` and
/// checks that `η` kills the product.
pub fn check_cup<R: Rng>(module: &HerrModule, other: &HerrModule, samples: usize, rng: &mut R) -> Result<CupReport> {
    let g1 = module.cocycle_basis()?;
    let g2 = other.cocycle_basis()?;
    let target = module.with_twist(module.twist() + other.twist());
    let mut failures = 0;
    for _ in 0..samples {
        let a = random_combination(&g1, module.ring(), rng)?;
        let b = random_combination(&g2, other.ring(), rng)?;
        let c = module.cup_11(&a, other, &b)?;
        if !target.eta(&c)?.is_zero_within() {
            failures += 1;
        }
    }
    Ok(CupReport { samples, generators: g1.len() + g2.len(), failures, pass: failures == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicContext;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_complex_and_cup() {
        let ctx = PadicContext::new(3, 1, 2).unwrap();
        let m = HerrModule::new(&ctx, (3, 3), 0, 0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(check_complex(&m, 5, &mut rng).unwrap().pass);
        let m1 = m.with_twist(1);
        let rep = check_cup(&m, &m1, 5, &mut rng).unwrap();
        assert!(rep.pass && rep.generators > 0, "{rep:?}");
    }
}
