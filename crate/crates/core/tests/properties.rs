use fasi::conformal::{benjamini_hochberg, bh_qvalues};
use fasi::data::Decision;
use fasi::metrics::{fsp, fsp_star, summarize, Observation};
use fasi::rvalue::{self, CalPoint, Scope, TestPoint, Variant};
use fasi::Rational;
use proptest::prelude::*;

fn points() -> impl Strategy<Value = (Vec<CalPoint<f64>>, Vec<TestPoint<f64>>)> {
    let score = (0u8..=20).prop_map(|k| k as f64 / 20.0);
    let cal = prop::collection::vec((0usize..3, score.clone(), any::<bool>()), 0..30)
        .prop_map(|v| v.into_iter().map(|(group, score, null)| CalPoint { group, score, null }).collect());
    let test = prop::collection::vec((0usize..3, score), 1..30)
        .prop_map(|v| v.into_iter().map(|(group, score)| TestPoint { group, score }).collect());
    (cal, test)
}

fn variants() -> impl Strategy<Value = Variant> {
    prop_oneof![
        Just(Variant::Standard),
        Just(Variant::Plus),
        Just(Variant::ConservativeStandard),
        Just(Variant::ConservativePlus)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn monotone_and_capped((cal, test) in points(), variant in variants()) {
        let (raw, mono) = rvalue::rvalues(&cal, &test, variant, Scope::Group);
        for j in 0..test.len() {
            prop_assert!((0.0..=1.0).contains(&raw[j]));
            prop_assert!(mono[j] <= raw[j] && mono[j] >= 0.0);
            for k in 0..test.len() {
                if test[j].group == test[k].group && test[j].score <= test[k].score {
                    prop_assert!(mono[k] <= mono[j]);
                }
            }
        }
    }

    #[test]
    fn conservative_dominates((cal, test) in points(), plus in any::<bool>()) {
        let base = if plus { Variant::Plus } else { Variant::Standard };
        let (raw, mono) = rvalue::rvalues(&cal, &test, base, Scope::Group);
        let (craw, cmono) = rvalue::rvalues(&cal, &test, base.conservative(), Scope::Group);
        for j in 0..test.len() {
            prop_assert!(craw[j] >= raw[j]);
            prop_assert!(cmono[j] >= mono[j]);
        }
    }

    #[test]
    fn pooled_scope_ignores_group_labels((cal, test) in points(), variant in variants()) {
        let flat_cal: Vec<_> = cal.iter().map(|c| CalPoint { group: 0, ..*c }).collect();
        let flat_test: Vec<_> = test.iter().map(|t| TestPoint { group: 0, ..*t }).collect();
        let pooled = rvalue::rvalues(&cal, &test, variant, Scope::Pooled);
        let flat = rvalue::rvalues(&flat_cal, &flat_test, variant, Scope::Group);
        prop_assert_eq!(pooled, flat);
    }

    #[test]
    fn qvalues_reproduce_bh(
        cal in prop::collection::vec(0u8..=50, 0..40),
        test in prop::collection::vec(0u8..=50, 1..40),
        alpha in 0u8..=100,
    ) {
        let cal: Vec<Rational> = cal.into_iter().map(|k| Rational::new(k as i64, 50)).collect();
        let test: Vec<Rational> = test.into_iter().map(|k| Rational::new(k as i64, 50)).collect();
        let alpha = Rational::new(alpha as i64, 100);
        let table = bh_qvalues(&cal, &test);
        prop_assert_eq!(table.rejections(alpha), benjamini_hochberg(&table.p, alpha));
    }

    #[test]
    fn fsp_star_never_exceeds_fsp(
        rows in prop::collection::vec((0usize..2, prop::option::of(0usize..3), 0usize..3), 0..50)
    ) {
        let obs: Vec<Observation> = rows
            .into_iter()
            .map(|(group, d, truth)| Observation {
                group,
                decision: d.map_or(Decision::Indecision, Decision::Class),
                truth: Some(truth),
            })
            .collect();
        for class in [None, Some(0), Some(1), Some(2)] {
            for group in [None, Some(0), Some(1)] {
                let a: f64 = fsp(&obs, class, group).unwrap();
                let b: f64 = fsp_star(&obs, class, group).unwrap();
                prop_assert!(b <= a && (0.0..=1.0).contains(&a));
            }
        }
    }

    #[test]
    fn summary_is_order_free(mut xs in prop::collection::vec(0.0f64..1.0, 1..60), seed in any::<u64>()) {
        let a = summarize(&xs, &[0.05, 0.5, 0.95]).unwrap();
        let n = xs.len();
        xs.rotate_left((seed as usize) % n);
        xs.reverse();
        let b = summarize(&xs, &[0.05, 0.5, 0.95]).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn float_and_exact_agree((cal, test) in points(), variant in variants()) {
        let to_exact = |s: f64| Rational::new((s * 20.0).round() as i64, 20);
        let ecal: Vec<_> = cal
            .iter()
            .map(|c| CalPoint { group: c.group, score: to_exact(c.score), null: c.null })
            .collect();
        let etest: Vec<_> = test
            .iter()
            .map(|t| TestPoint { group: t.group, score: to_exact(t.score) })
            .collect();
        let (_, mono) = rvalue::rvalues(&cal, &test, variant, Scope::Group);
        let (_, exact) = rvalue::rvalues(&ecal, &etest, variant, Scope::Group);
        let fcal: Vec<_> = cal.iter().map(|c| CalPoint { group: c.group, score: c.score as f32, null: c.null }).collect();
        let ftest: Vec<_> = test.iter().map(|t| TestPoint { group: t.group, score: t.score as f32 }).collect();
        let (_, single) = rvalue::rvalues(&fcal, &ftest, variant, Scope::Group);
        for j in 0..test.len() {
            let e = *exact[j].numer() as f64 / *exact[j].denom() as f64;
            prop_assert!((mono[j] - e).abs() < 1e-12);
            prop_assert!((single[j] as f64 - e).abs() < 1e-5);
        }
    }
}
