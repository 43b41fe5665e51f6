//! Parser round-trip: printing a parsed series and reparsing gives it back.

use std::sync::Arc;

use proptest::prelude::*;
use reciprocity_cli::parse_series;
use reciprocity_core::padic::PadicContext;
use reciprocity_core::series::{CoeffKind, SeriesRing, TruncatedSeries};
use reciprocity_core::{Error, Result};

fn ring(f: usize, kind: CoeffKind) -> Arc<SeriesRing> {
    let ctx = PadicContext::new(3, f, 4).unwrap();
    SeriesRing::bivariate(&ctx, kind, (8, 8), (-12, -12)).unwrap()
}

/// Random expressions in the documented grammar.
fn expr(gen_t: bool) -> impl Strategy<Value = String> {
    let mut atoms = vec!["X", "Y", "X^-1", "Y^-2", "1", "2", "5"];
    if gen_t {
        atoms.push("t");
    }
    let leaf = prop::sample::select(atoms).prop_map(String::from);
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), 0..3u32).prop_map(|(a, k)| format!("({a})^{k}")),
            (inner.clone(), prop::sample::select(vec![2, 4, 5, 7])).prop_map(|(a, d)| format!("({a})/{d}")),
            inner.prop_map(|a| format!("-({a})")),
        ]
    })
}

/// Parses, treating a window overflow as an input outside the ring.
fn parse_in(text: &str, r: &Arc<SeriesRing>) -> Option<TruncatedSeries> {
    let parsed: Result<TruncatedSeries> = parse_series(text, r);
    match parsed {
        Err(Error::WindowOverflow { .. }) => None,
        other => Some(other.unwrap()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn round_trip_integral(text in expr(false)) {
        let r = ring(1, CoeffKind::Integral);
        let s = parse_in(&text, &r);
        prop_assume!(s.is_some());
        let s = s.unwrap();
        let back = parse_series(&s.to_string(), &r).unwrap();
        prop_assert!(s.eq_within(&back), "{} -> {}", text, s);
    }

    #[test]
    fn round_trip_rational_unramified(text in expr(true)) {
        let r = ring(2, CoeffKind::Rational);
        let s = parse_in(&text, &r);
        prop_assume!(s.is_some());
        let s = s.unwrap();
        let back = parse_series(&s.to_string(), &r).unwrap();
        prop_assert!(s.eq_within(&back), "{} -> {}", text, s);
    }
}
