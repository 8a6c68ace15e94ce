use proptest::prelude::*;
use qfilter::{answer, retrieve, score_candidate, CandidateSet, Corpus, Question};

const WORDS: &[&str] = &["paris", "capital", "france", "river", "the", "is", "of", "seine", "city", "what", "rome"];

fn sentence(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 0..=max).prop_map(|w| w.join(" "))
}

fn question(text: String) -> Question {
    Question::new("q", text)
}

proptest! {
    #[test]
    fn sigma_is_the_best_candidate_score(q in sentence(6), cands in prop::collection::vec(sentence(8), 0..6)) {
        let q = question(q);
        let set = CandidateSet { question_id: "q".into(), candidates: cands.clone() };
        let d = answer(&q, &set, 0.0);
        let best = cands.iter().map(|c| score_candidate(&q, c)).fold(0.0, f64::max);
        prop_assert_eq!(d.sigma, best);
        if let Some(i) = d.best_candidate_index {
            prop_assert_eq!(score_candidate(&q, &cands[i]), best);
            prop_assert!(cands[..i].iter().all(|c| score_candidate(&q, c) < best));
        } else {
            prop_assert!(cands.is_empty());
        }
    }

    #[test]
    fn raising_tau1_never_adds_answers(
        q in sentence(6),
        cands in prop::collection::vec(sentence(8), 1..6),
        a in 0.0..=1.0f64,
        b in 0.0..=1.0f64,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let q = question(q);
        let set = CandidateSet { question_id: "q".into(), candidates: cands };
        prop_assert!(!answer(&q, &set, hi).answered || answer(&q, &set, lo).answered);
    }

    #[test]
    fn candidate_score_is_symmetric_and_bounded(a in sentence(8), b in sentence(8)) {
        let ab = score_candidate(&question(a.clone()), &b);
        let ba = score_candidate(&question(b), &a);
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn smaller_k_is_a_prefix(docs in prop::collection::vec(sentence(10), 1..12), q in sentence(5), k in 1usize..12) {
        let corpus = Corpus::new(docs.iter().enumerate().map(|(i, t)| (format!("d{i:02}"), t.clone()))).unwrap();
        let q = question(q);
        let all = retrieve(&corpus, &q, docs.len()).unwrap();
        let top = retrieve(&corpus, &q, k).unwrap();
        prop_assert_eq!(&all[..top.len()], &top[..]);
        prop_assert_eq!(top.len(), k.min(docs.len()));
    }
}
