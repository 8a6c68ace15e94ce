use proptest::prelude::*;
use qfilter::filter::{featurize, gradient_check, load_model, save_model, Head};
use qfilter::{FeatureConfig, FilterModel, Question};

const SMALL: FeatureConfig = FeatureConfig {
    dimension: 1 << 8,
    use_bigrams: true,
};

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-f]{1,3}", 0..8).prop_map(|w| w.join(" "))
}

fn model(head: Head) -> impl Strategy<Value = FilterModel> {
    (prop::collection::vec(-3.0..3.0f64, SMALL.dimension), -2.0..2.0f64, any::<u64>()).prop_map(move |(w, b, seed)| {
        let tau1 = (head == Head::Classification).then_some(0.5);
        let mut m = FilterModel::zeros(head, tau1, SMALL, seed).unwrap();
        m.weights = w;
        m.bias = b;
        m
    })
}

proptest! {
    #[test]
    fn features_are_unit_norm_or_empty(t in text()) {
        let x = featurize(&Question::new("q", t.clone()), &SMALL);
        if t.trim().is_empty() {
            prop_assert!(x.is_zero());
        } else {
            prop_assert!((x.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn regression_gradient_matches_differences(
        t in text(),
        w in prop::collection::vec(-1.0..1.0f64, SMALL.dimension),
        b in -1.0..1.0f64,
        target in 0.0..=1.0f64,
    ) {
        let x = featurize(&Question::new("q", t), &SMALL);
        let err = gradient_check(Head::Regression, &x, target, &w, b);
        prop_assert!(err < 1e-4, "{}", err);
    }

    #[test]
    fn classification_gradient_matches_differences(
        t in text(),
        w in prop::collection::vec(-1.0..1.0f64, SMALL.dimension),
        b in -1.0..1.0f64,
        label in any::<bool>(),
    ) {
        let x = featurize(&Question::new("q", t), &SMALL);
        let err = gradient_check(Head::Classification, &x, f64::from(u8::from(label)), &w, b);
        prop_assert!(err < 1e-4, "{}", err);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn saved_models_predict_identically(
        m in prop_oneof![model(Head::Regression), model(Head::Classification)],
        texts in prop::collection::vec(text(), 1..10),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        prop_assert_eq!(&back, &m);
        for t in texts {
            let q = Question::new("q", t);
            prop_assert_eq!(back.predict(&q).to_bits(), m.predict(&q).to_bits());
        }
    }
}
