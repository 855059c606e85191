use proptest::collection::vec;
use proptest::prelude::*;

use whydiffer::evaluation::{average_precision, evaluate, mean_defined, ReportMeta};
use whydiffer::features::{apply_mask, AblationMask, FeatureVector};
use whydiffer::ingestion::{image_features_for, load_records, write_records, ImageFeatures};
use whydiffer::learning::{
    train_forest, train_linear, ClassWeight, Dataset, FeaturesPerSplit, ForestConfig, LinearConfig,
};
use whydiffer::statistics::{cohen_kappa, co_occurrence};
use whydiffer::{
    extract_features, GroundTruthVector, LabelSet, ReasonLabel, Threshold, VisualQuestionRecord,
    WorkerAnnotation, NUM_LABELS,
};

const WORDS: [&str; 8] = ["what", "color", "is", "this", "shirt", "2", "yes", "unanswerable"];

fn text() -> impl Strategy<Value = String> {
    vec(0..WORDS.len(), 0..6).prop_map(|ix| ix.iter().map(|&i| WORDS[i]).collect::<Vec<_>>().join(" "))
}

fn record(i: usize) -> impl Strategy<Value = VisualQuestionRecord> {
    (text(), vec(text(), 10), vec(1u16..1024, 5)).prop_map(move |(question, answers, sets)| {
        VisualQuestionRecord {
            id: format!("r{i}"),
            dataset: if i % 2 == 0 { "VQA" } else { "VizWiz" }.into(),
            question,
            image_id: format!("img{i}"),
            answers,
            annotations: sets
                .iter()
                .enumerate()
                .map(|(w, &b)| WorkerAnnotation {
                    worker_id: format!("w{w}"),
                    labels: LabelSet::from_bits(b),
                })
                .collect(),
        }
    })
}

fn records(max: usize) -> impl Strategy<Value = Vec<VisualQuestionRecord>> {
    (1..=max).prop_flat_map(|n| (0..n).map(record).collect::<Vec<_>>())
}

fn gtv(bits: u16) -> GroundTruthVector {
    GroundTruthVector {
        labels: LabelSet::from_bits(bits),
        threshold: Threshold::default(),
    }
}

fn distinct_rows(n: usize, d: usize) -> Vec<Vec<f64>> {
    // First column is the row index, so rows are pairwise distinct.
    (0..n)
        .map(|i| (0..d).map(|j| ((i * (2 * j + 1) + 7 * j) % (n + 13)) as f64).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn records_round_trip_through_jsonl(recs in records(12)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_records(&path, &recs).unwrap();
        let loaded = load_records(&path, false).unwrap().records;
        prop_assert_eq!(&loaded, &recs);
        let again = dir.path().join("again.jsonl");
        write_records(&again, &loaded).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn one_atype_slot_set(r in record(0), tags in 0u32..20, colors in 0u32..10) {
        let img = ImageFeatures { num_categories: 1, num_tags: tags, num_colors: colors, num_faces: 0 };
        let v = extract_features(&r, &img);
        let hot: Vec<f64> = v.0[6..10].to_vec();
        prop_assert_eq!(hot.iter().filter(|&&x| x == 1.0).count(), 1);
        prop_assert_eq!(hot.iter().filter(|&&x| x == 0.0).count(), 3);
        prop_assert!(v.0.iter().all(|&x| x >= 0.0));
        prop_assert_eq!(extract_features(&r, &img), v);
    }

    #[test]
    fn qia_mask_is_identity(values in vec(-1e6f64..1e6, 20)) {
        let v = FeatureVector(values.clone().try_into().unwrap());
        prop_assert_eq!(apply_mask(&v, AblationMask::QIA), values.clone());
        let mut qi_a = apply_mask(&v, AblationMask::QI);
        qi_a.extend(apply_mask(&v, AblationMask::A));
        prop_assert_eq!(qi_a, values.clone());
        let mut i_q = apply_mask(&v, AblationMask::I);
        i_q.extend(apply_mask(&v, AblationMask::Q));
        prop_assert_eq!(i_q, apply_mask(&v, AblationMask::QI));
    }

    #[test]
    fn defined_co_occurrence_at_most_one(bits in vec(0u16..1024, 1..200), i in 0usize..10, j in 0usize..10) {
        prop_assume!(i != j);
        let g: Vec<_> = bits.into_iter().map(gtv).collect();
        let (a, b) = (ReasonLabel::from_index(i).unwrap(), ReasonLabel::from_index(j).unwrap());
        if let Some(c) = co_occurrence(a, b, &g).unwrap() {
            prop_assert!(c <= 1.0);
        }
    }

    #[test]
    fn kappa_one_for_identical_streams(a in vec(any::<bool>(), 2..80)) {
        prop_assume!(a.iter().any(|&x| x) && a.iter().any(|&x| !x));
        prop_assert_eq!(cohen_kappa(&a, &a).unwrap(), Some(1.0));
    }

    #[test]
    fn ap_is_one_iff_positives_outrank(scores in vec(0u8..8, 1..40), labels in vec(any::<bool>(), 40)) {
        let s: Vec<f64> = scores.iter().map(|&x| f64::from(x)).collect();
        let y = &labels[..s.len()];
        let Some(ap) = average_precision(&s, y).unwrap() else {
            prop_assert!(y.iter().all(|&b| !b));
            return Ok(());
        };
        // Under index tie-breaking a positive outranks a negative when its score is
        // higher, or equal with a lower index.
        let outranks = (0..s.len()).all(|p| {
            !y[p] || (0..s.len()).all(|q| y[q] || s[p] > s[q] || (s[p] == s[q] && p < q))
        });
        prop_assert_eq!(ap == 1.0, outranks);
    }

    #[test]
    fn ap_invariant_under_monotone_transform(scores in vec(-5.0f64..5.0, 1..60), labels in vec(any::<bool>(), 60)) {
        let y = &labels[..scores.len()];
        let moved: Vec<f64> = scores.iter().map(|&x| (x * 0.7).exp() + 3.0).collect();
        prop_assert_eq!(average_precision(&scores, y).unwrap(), average_precision(&moved, y).unwrap());
    }

    #[test]
    fn mean_ap_recomputed(scores in vec(vec(0.0f64..1.0, NUM_LABELS), 1..50), bits in vec(0u16..1024, 50)) {
        let rows: Vec<[f64; NUM_LABELS]> = scores.iter().map(|r| r.clone().try_into().unwrap()).collect();
        let truth: Vec<LabelSet> = bits[..rows.len()].iter().map(|&b| LabelSet::from_bits(b)).collect();
        let meta = ReportMeta { model_id: "m".into(), mask: None, split: "test".into(), threshold: Threshold::default() };
        let report = evaluate(&rows, &truth, meta).unwrap();
        prop_assert_eq!(report.mean_ap, mean_defined(&report.per_label_ap));
        let defined: Vec<f64> = report.per_label_ap.iter().flatten().copied().collect();
        if !defined.is_empty() {
            let sum: f64 = defined.iter().sum();
            prop_assert_eq!(report.mean_ap, Some(sum / defined.len() as f64));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn single_unbounded_tree_memorizes(bits in vec(0u16..1024, 2..60), seed in any::<u64>(), balanced in any::<bool>()) {
        let rows = distinct_rows(bits.len(), 3);
        let targets: Vec<LabelSet> = bits.iter().map(|&b| LabelSet::from_bits(b)).collect();
        let names = (0..3).map(|j| format!("f{j}")).collect();
        let data = Dataset::new(&rows, targets.clone(), names).unwrap();
        let config = ForestConfig {
            n_trees: 1,
            max_depth: 64,
            class_weight: if balanced { ClassWeight::Balanced } else { ClassWeight::Uniform },
            features_per_split: FeaturesPerSplit::All,
            min_samples_split: 2,
            bootstrap: false,
            seed,
        };
        let model = train_forest(&data, &config).unwrap();
        for (x, t) in rows.iter().zip(&targets) {
            let s = model.predict(x).unwrap();
            for label in ReasonLabel::ALL {
                let want = if t.contains(label) { 1.0 } else { 0.0 };
                prop_assert_eq!(s[label.index()], want);
            }
        }
    }

    #[test]
    fn scores_bounded_and_importances_normalized(
        bits in vec(0u16..1024, 5..40),
        probe in vec(-1e3f64..1e3, 3),
        seed in any::<u64>(),
    ) {
        let rows = distinct_rows(bits.len(), 3);
        let targets: Vec<LabelSet> = bits.iter().map(|&b| LabelSet::from_bits(b)).collect();
        let names: Vec<String> = (0..3).map(|j| format!("f{j}")).collect();
        let data = Dataset::new(&rows, targets, names).unwrap();
        let forest = train_forest(&data, &ForestConfig { n_trees: 5, max_depth: 4, seed, ..ForestConfig::default() }).unwrap();
        let linear = train_linear(&data, &LinearConfig { epochs: 30, ..LinearConfig::default() }).unwrap();
        for model in [&forest, &linear] {
            prop_assert_eq!(model.scorers.len(), NUM_LABELS);
            for s in model.predict(&probe).unwrap() {
                prop_assert!((0.0..=1.0).contains(&s));
            }
            for imp in &model.importances {
                let total: f64 = imp.iter().sum();
                prop_assert!(imp.iter().all(|&v| v == 0.0) || (total - 1.0).abs() <= 1e-9, "{:?}", imp);
            }
        }
    }
}

#[test]
fn co_occurrence_endpoints() {
    let (amb, syn) = (ReasonLabel::Amb, ReasonLabel::Syn);
    let both = LabelSet::from_iter([amb, syn]);
    let only_syn = LabelSet::from_iter([syn]);

    // AMB always brings SYN and some record has neither: value 1.
    let g = [both, both, LabelSet::empty(), only_syn].map(|l| GroundTruthVector { labels: l, threshold: Threshold::default() });
    assert_eq!(co_occurrence(amb, syn, &g).unwrap(), Some(1.0));

    // SYN is as common with AMB as without it: value 0.
    let only_amb = LabelSet::from_iter([amb]);
    let g = [both, only_amb, only_syn, LabelSet::empty()].map(|l| GroundTruthVector { labels: l, threshold: Threshold::default() });
    assert_eq!(co_occurrence(amb, syn, &g).unwrap(), Some(0.0));
}

#[test]
fn missing_image_features_are_imputed() {
    let recs: Vec<VisualQuestionRecord> = (0..2)
        .map(|i| VisualQuestionRecord {
            id: format!("r{i}"),
            dataset: "VQA".into(),
            question: "what".into(),
            image_id: format!("img{i}"),
            answers: vec!["yes".into(); 10],
            annotations: (0..5).map(|w| WorkerAnnotation::new(format!("w{w}"), [ReasonLabel::Oth])).collect(),
        })
        .collect();
    let tags = ImageFeatures { num_categories: 1, num_tags: 3, num_colors: 2, num_faces: 0 };
    let sidecar = [("img1".to_string(), tags)].into_iter().collect();
    let (features, imputed) = image_features_for(&recs, &sidecar);
    assert_eq!(imputed, 1);
    assert_eq!(features, vec![ImageFeatures::default(), tags]);
}
