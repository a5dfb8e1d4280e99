mod common;

use maskcombine::{
    assemble_per_word, build_custom, combine, compute_stride, evaluate, generate_windows,
    interior_range, Boundary, CombinerKind, Contribution, Distribution, LogitsFile,
    NoisyBoundaryProvider, ProbabilityProvider, PunctClass, RuleProvider, WindowPrediction,
};
use proptest::prelude::*;

use common::TracingProvider;

fn distribution() -> impl Strategy<Value = Distribution> {
    prop::array::uniform4(0.0f64..1.0)
        .prop_filter("not all zero", |a| a.iter().sum::<f64>() > 1e-6)
        .prop_map(|a| {
            let sum: f64 = a.iter().sum();
            Distribution::new(a.map(|x| x / sum)).unwrap()
        })
}

fn contribution() -> impl Strategy<Value = Contribution> {
    (distribution(), 1usize..64).prop_flat_map(|(dist, win_len)| {
        (0..win_len).prop_map(move |pos| Contribution { dist, pos, win_len })
    })
}

fn class() -> impl Strategy<Value = PunctClass> {
    (0usize..4).prop_map(|i| PunctClass::from_index(i).unwrap())
}

/// (w, m_l, m_r, n) with a valid stride.
fn geometry() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (1usize..100).prop_flat_map(|w| {
        (0..w).prop_flat_map(move |masks| {
            (0..=masks, 1..=(w - masks)).prop_map(move |(ml, n)| (w, ml, masks - ml, n))
        })
    })
}

proptest! {
    #[test]
    fn every_word_is_covered((w, ml, mr, n) in geometry(), len in 1usize..400, causal in any::<bool>()) {
        let (config, _) = build_custom(w, ml, mr, n, CombinerKind::Mean).unwrap();
        let config = config.with_boundary(if causal { Boundary::Causal } else { Boundary::Waive });
        let tokens: Vec<String> = (0..len).map(|i| i.to_string()).collect();
        let preds: Vec<WindowPrediction> = generate_windows(len, &config)
            .into_iter()
            .map(|spec| {
                let d = TracingProvider.predict(&tokens[spec.positions()], &spec).unwrap();
                WindowPrediction::new(spec, d).unwrap()
            })
            .collect();
        let per_word = assemble_per_word(&preds, len).unwrap();
        prop_assert!(per_word.iter().all(|c| !c.is_empty()));
        for i in interior_range(len, &config) {
            prop_assert!(per_word[i].len() >= n);
        }
    }

    #[test]
    fn stride_is_a_floor((w, ml, mr, n) in geometry()) {
        let s = compute_stride(w, ml, mr, n).unwrap();
        let full = w - ml - mr;
        prop_assert!(s * n <= full && full < (s + 1) * n);
    }

    #[test]
    fn combiners_stay_on_simplex(contribs in prop::collection::vec(contribution(), 1..12)) {
        for kind in CombinerKind::ALL {
            let d = combine(kind, &contribs).unwrap();
            let sum: f64 = d.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9, "{kind}: sum {sum}");
            prop_assert!(d.probs().iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn evaluation_ignores_order(pairs in prop::collection::vec((class(), class()), 0..200), seed in any::<u64>()) {
        let (p, g): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
        let mut shuffled = pairs.clone();
        let k = shuffled.len().max(1);
        shuffled.rotate_left((seed as usize) % k);
        let (ps, gs): (Vec<_>, Vec<_>) = shuffled.into_iter().unzip();
        prop_assert_eq!(evaluate(&p, &g).unwrap(), evaluate(&ps, &gs).unwrap());
    }

    #[test]
    fn swapping_runs_swaps_precision_and_recall(pairs in prop::collection::vec((class(), class()), 0..200)) {
        let (p, g): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let a = evaluate(&p, &g).unwrap();
        let b = evaluate(&g, &p).unwrap();
        prop_assert_eq!(a.overall.metrics.precision, b.overall.metrics.recall);
        prop_assert_eq!(a.overall.metrics.recall, b.overall.metrics.precision);
    }

    #[test]
    fn noisy_provider_stays_on_simplex(noise in 0.0f64..=1.0, len in 1usize..50, conf in 0.0f64..=1.0) {
        let tokens: Vec<String> = (0..len).map(|i| if i % 3 == 0 { format!("a{i}·P") } else { format!("a{i}") }).collect();
        let provider = NoisyBoundaryProvider::new(RuleProvider::default().with_confidence(conf), noise).unwrap();
        let spec = maskcombine::WindowSpec { start: 0, len, mask_left: 0, mask_right: 0 };
        for d in provider.predict(&tokens, &spec).unwrap() {
            let sum: f64 = d.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn logits_file_round_trips((w, ml, mr, n) in geometry(), len in 1usize..150) {
        let (config, _) = build_custom(w, ml, mr, n, CombinerKind::Mean).unwrap();
        let tokens: Vec<String> = (0..len).map(|i| format!("t{i}")).collect();
        let plan = generate_windows(len, &config);
        let file = LogitsFile::capture(&TracingProvider, &tokens, &plan, None).unwrap();
        let text = file.to_jsonl();
        let back = LogitsFile::parse(&text, "mem").unwrap();
        prop_assert_eq!(back.to_jsonl(), text);
    }
}
