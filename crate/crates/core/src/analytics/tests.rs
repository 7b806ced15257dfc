use proptest::prelude::*;

use super::*;
use crate::config::{AgentAssignment, AgentSlot, GameSetup, Variant};
use crate::engine::RoundRecord;
use crate::payoff::{presets, Orientation};

fn history(model: &str, lang: &str, pers: [&str; 2], variant: &str, moves: &[(&str, &str)]) -> GameHistory {
    let matrix = presets::by_id::<f64>(variant).unwrap_or_else(presets::pd_conventional);
    let setup = GameSetup {
        assignment: AgentAssignment {
            agents: pers
                .iter()
                .enumerate()
                .map(|(i, p)| AgentSlot {
                    name: format!("agent{}", i + 1),
                    personality: p.to_string(),
                    opponent_prob: 0.0,
                })
                .collect(),
        },
        language: lang.into(),
        variant: Variant::new(variant),
        repetition: 0,
    };
    let records = moves
        .iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let idx = [matrix.strategy_index(a).unwrap(), matrix.strategy_index(b).unwrap()];
            RoundRecord {
                round: i as u32 + 1,
                strategies: vec![a.to_string(), b.to_string()],
                scores: matrix.payoff(&idx).to_vec(),
                messages: None,
                reply_digests: vec![],
                replies: vec![],
            }
        })
        .collect();
    GameHistory {
        key: setup.key(),
        setup,
        model: model.into(),
        game_name: "pd".into(),
        n_rounds: moves.len() as u32,
        rounds_known: true,
        strategy_ids: matrix.strategy_ids().to_vec(),
        orientation: Orientation::Penalty,
        matrix: matrix.entries().to_vec(),
        records,
        termination: Termination::CompletedAllRounds,
        failure: None,
    }
}

#[test]
fn final_score_examples() {
    let h = history("m", "en", ["c", "c"], "pd_conventional", &[("A", "A"); 10]);
    assert_eq!(final_scores(&h), vec![60.0, 60.0]);
    let empty = history("m", "en", ["c", "c"], "pd_conventional", &[]);
    assert_eq!(final_scores(&empty), vec![0.0, 0.0]);
    let mut tft = vec![("B", "A")];
    tft.extend([("A", "A"); 9]);
    assert_eq!(
        final_scores(&history("m", "en", ["c", "c"], "pd_conventional", &tft)),
        vec![64.0, 54.0]
    );
}

#[test]
fn aggregate_examples() {
    let k = |s: &str| vec![s.to_string()];
    let cells = aggregate::<f64>(vec![
        (k("a"), vec![5.0, 5.0, 5.0, 5.0]),
        (k("b"), vec![0.0, 10.0]),
        (k("c"), vec![7.0]),
    ])
    .unwrap();
    assert_eq!((cells[0].mean, cells[0].ci95), (5.0, 0.0));
    assert_eq!(cells[1].mean, 5.0);
    assert!((cells[1].ci95 - 9.8).abs() < 1e-9);
    assert_eq!((cells[2].n, cells[2].mean, cells[2].ci95), (1, 7.0, 0.0));
    assert!(matches!(
        aggregate::<f64>(vec![(k("x"), vec![])]),
        Err(AnalyticsError::EmptyGroup(_))
    ));
}

#[test]
fn encodings() {
    let h = history(
        "m",
        "en",
        ["c", "c"],
        "battle_of_sexes",
        &[("A", "B"), ("A", "A"), ("B", "B")],
    );
    let action = encode_runs(std::slice::from_ref(&h), Encoding::Action);
    assert_eq!(action[0].values, vec![1, 1, -1]);
    assert_eq!(action[1].values, vec![-1, 1, -1]);
    let coord = encode_runs(&[h], Encoding::Coordination);
    assert_eq!(coord[0].values, vec![1, -1, -1]);
}

#[test]
fn symmetric_runs_average_to_zero() {
    let runs = vec![
        EncodedRun {
            game: "a".into(),
            agent: None,
            values: vec![1, 1],
        },
        EncodedRun {
            game: "b".into(),
            agent: None,
            values: vec![-1, -1],
        },
    ];
    assert_eq!(average_trajectory::<f64>(&runs).unwrap(), vec![0.0, 0.0]);
    let mixed = vec![
        runs[0].clone(),
        EncodedRun {
            game: "c".into(),
            agent: None,
            values: vec![1],
        },
    ];
    assert!(matches!(
        average_trajectory::<f64>(&mixed),
        Err(AnalyticsError::MixedLengths { .. })
    ));
}

fn metrics(iv: f64, sp: Option<f64>) -> MetricValues<f64> {
    MetricValues {
        iv,
        ci: 0.0,
        sp,
        vr: 1.0,
    }
}

#[test]
fn scorecard_normalization() {
    let raw: BTreeMap<String, _> = [
        ("a".to_string(), metrics(2.0, Some(0.0))),
        ("b".to_string(), metrics(4.0, Some(0.0))),
    ]
    .into();
    let card = build_scorecard(&raw).unwrap();
    assert_eq!(card.models["a"].normalized.iv, 0.5);
    assert_eq!(card.models["b"].normalized.iv, 1.0);
    assert_eq!(card.models["a"].normalized.ci, 0.0);
    assert_eq!(card.models["a"].normalized.sp, Some(0.0));
    let single: BTreeMap<String, _> = [("only".to_string(), metrics(3.0, None))].into();
    assert_eq!(build_scorecard(&single).unwrap().models["only"].normalized.iv, 1.0);
    assert!(matches!(
        build_scorecard::<f64>(&BTreeMap::new()),
        Err(AnalyticsError::NoModels)
    ));
}

#[test]
fn battle_of_sexes_scorecard_has_no_payoff_sensitivity() {
    let hs = vec![
        history("m", "en", ["c", "c"], "battle_of_sexes", &[("A", "B"), ("A", "A")]),
        history("m", "fr", ["c", "c"], "battle_of_sexes", &[("B", "B"), ("A", "A")]),
    ];
    let raw = metrics_by_model::<f64>(&hs).unwrap();
    assert_eq!(raw["m"].sp, None);
    let json = scorecard_json(&build_scorecard(&raw).unwrap());
    assert!(!json.contains("S_P"));
    assert!(json.contains("\"I_V\""));
}

#[test]
fn harsh_and_mild_enable_payoff_sensitivity() {
    let hs = vec![
        history("m", "en", ["c", "c"], "pd_harsh", &[("A", "A"), ("A", "A")]),
        history("m", "en", ["c", "c"], "pd_mild", &[("B", "B"), ("A", "A")]),
    ];
    let raw = model_metrics::<f64>(&hs).unwrap();
    // harsh trajectory (1,1), mild (−1,1)
    assert_eq!(raw.sp, Some(1.0));
}

#[test]
fn failed_games_are_ignored() {
    let good = history("m", "en", ["c", "c"], "pd_conventional", &[("A", "A"), ("B", "B")]);
    let mut bad = history("m", "en", ["c", "c"], "pd_conventional", &[("A", "B")]);
    bad.termination = Termination::AgentFailure;
    bad.n_rounds = 2;
    let with = model_metrics::<f64>(&[good.clone(), good.clone(), bad]).unwrap();
    let without = model_metrics::<f64>(&[good.clone(), good]).unwrap();
    assert_eq!(with, without);
}

#[test]
fn exports_use_seventeen_digits() {
    let mut buf = Vec::new();
    let cells = aggregate(vec![(vec!["m".to_string()], vec![0.0, 10.0])]).unwrap();
    write_aggregates_csv(&mut buf, &[GroupBy::Model], &cells).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "model,n,mean,ci95");
    assert!(text.contains("m,2,5.0000000000000000,"));

    let mut buf = Vec::new();
    let series: BTreeMap<String, Vec<f64>> = [("pd_harsh".to_string(), vec![1.0, 0.5])].into();
    write_trajectories_csv(&mut buf, &series).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text,
        "variant,round,mean_encoded\npd_harsh,1,1.0000000000000000\npd_harsh,2,0.50000000000000000\n"
    );
}

#[test]
fn scorecard_json_round_trips_numbers() {
    let raw: BTreeMap<String, _> = [(
        "a".to_string(),
        MetricValues {
            iv: 1.0 / 3.0,
            ci: 2.0,
            sp: Some(0.1),
            vr: 0.0,
        },
    )]
    .into();
    let json = scorecard_json(&build_scorecard(&raw).unwrap());
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["models"]["a"]["raw"]["I_V"].as_f64().unwrap(), 1.0 / 3.0);
    assert_eq!(v["models"]["a"]["normalized"]["C_I"].as_f64().unwrap(), 1.0);
    assert!(json.contains("0.33333333333333331"));
}

fn arb_histories() -> impl Strategy<Value = Vec<GameHistory>> {
    let mv = prop::sample::select(vec![("A", "A"), ("A", "B"), ("B", "A"), ("B", "B")]);
    let one = (
        prop::sample::select(vec!["en", "fr", "zh"]),
        prop::sample::select(vec![["c", "c"], ["c", "s"], ["s", "s"]]),
        prop::sample::select(vec!["pd_conventional", "pd_harsh", "pd_mild"]),
        prop::collection::vec(mv, 3),
    )
        .prop_map(|(lang, pers, variant, moves)| history("m", lang, pers, variant, &moves));
    prop::collection::vec(one, 2..12)
}

proptest! {
    #[test]
    fn order_never_matters(hs in arb_histories(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = hs.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(model_metrics::<f64>(&hs).unwrap(), model_metrics::<f64>(&shuffled).unwrap());
        prop_assert_eq!(
            aggregate_final_scores::<f64>(&hs, &GroupBy::DEFAULT).unwrap(),
            aggregate_final_scores::<f64>(&shuffled, &GroupBy::DEFAULT).unwrap()
        );
    }

    #[test]
    fn trajectories_stay_in_range(hs in arb_histories()) {
        for enc in [Encoding::Action, Encoding::Coordination] {
            for series in trajectories_by_variant::<f64>(&hs, enc).unwrap().values() {
                prop_assert!(series.iter().all(|v| (-1.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn variance_metrics_scale_quadratically(xs in prop::collection::vec(-50.0f64..50.0, 2..20), k in 0.1f64..10.0) {
        let scaled: Vec<f64> = xs.iter().map(|x| x * k).collect();
        let a = metric_internal_variability(&xs).unwrap();
        let b = metric_internal_variability(&scaled).unwrap();
        prop_assert!((b - k * k * a).abs() <= 1e-9 * (1.0 + b.abs()));
        let obs = |v: &[f64]| v.iter().enumerate().map(|(i, &value)| LanguageObservation {
            language: ["en", "fr", "ar"][i % 3].into(), combo: ["c", "s"][i % 2].into(), rounds_known: i % 4 < 2, value,
        }).collect::<Vec<_>>();
        let c = metric_cross_language_inconsistency(&obs(&xs)).unwrap();
        let d = metric_cross_language_inconsistency(&obs(&scaled)).unwrap();
        prop_assert!((d - k * k * c).abs() <= 1e-9 * (1.0 + d.abs()));
    }

    #[test]
    fn normalized_scores_in_unit_interval(raws in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0, prop::option::of(0.0f64..2.0), 0.0f64..1.0), 1..6)) {
        let raw: BTreeMap<String, MetricValues<f64>> = raws
            .iter()
            .enumerate()
            .map(|(i, &(iv, ci, sp, vr))| (format!("m{i}"), MetricValues { iv, ci, sp, vr }))
            .collect();
        let card = build_scorecard(&raw).unwrap();
        let all: Vec<f64> = card.models.values().flat_map(|m| [m.normalized.iv, m.normalized.ci, m.normalized.vr]).collect();
        prop_assert!(all.iter().all(|v| (0.0..=1.0).contains(v)));
        if raws.iter().any(|r| r.0 > 0.0) {
            prop_assert!(card.models.values().any(|m| m.normalized.iv == 1.0));
        }
    }
}
