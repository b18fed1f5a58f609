mod common;

use std::collections::{BTreeSet, HashSet};

use msa_core::infer::{load, run_rejection, RejectionConfig};
use msa_core::lang::{parse_program, Origin};
use msa_core::olympics::*;
use proptest::prelude::*;

#[test]
fn temporal_wording_is_sport_specific() {
    let tug = generate_vignette(Sport::TugOfWar, "round_robin_loser", BackgroundKind::Detailed, 5).unwrap();
    let t = &tug.questions[3].text;
    assert!(t.contains("how much effort do you think") && t.ends_with("put into the second match?"), "{t}");

    let bi = generate_vignette(Sport::Biathlon, "diverse_winner", BackgroundKind::Detailed, 5).unwrap();
    let b = &bi.questions[3].text;
    assert!(b.contains("how accurate do you think") && b.ends_with("was at shooting in the third round?"), "{b}");

    let canoe = generate_vignette(Sport::CanoeRacing, "round_robin_loser", BackgroundKind::Detailed, 5).unwrap();
    assert!(canoe.questions[3].text.ends_with("second race?"));
    assert!(canoe.observations[0].starts_with("In the first race, "));
}

#[test]
fn round_robin_loser_reads_as_three_losses() {
    let v = generate_vignette(Sport::TugOfWar, "round_robin_loser", BackgroundKind::Detailed, 9).unwrap();
    let a = v.name('A').unwrap();
    assert_eq!(v.observations.len(), 3);
    for o in &v.observations {
        assert!(o.contains(&format!("{a} and ")) && o.contains(" lost to "), "{o}");
    }
    // E appears only in the prediction questions
    let e = v.name('E').unwrap();
    assert!(v.observations.iter().all(|o| !o.contains(e)));
    assert!(v.questions[6].text.contains(e));
}

#[test]
fn question_palette_order() {
    for m in list_motifs() {
        let v = generate_vignette(Sport::Biathlon, &m.id, BackgroundKind::Underspecified, 1).unwrap();
        let kinds: Vec<QueryType> = v.questions.iter().map(|q| q.query_type).collect();
        use QueryType::*;
        assert_eq!(kinds, [Constant, Constant, Constant, Temporal, Temporal, Temporal, Prediction, Prediction]);
        assert_eq!(v.labels(), ["q1", "q2", "q3", "q4", "q5", "q6", "q7", "q8"]);
        assert!(v.questions.iter().all(|q| q.scale == [0.0, 100.0]));
    }
}

#[test]
fn unknown_inputs() {
    assert!(matches!(
        generate_vignette(Sport::TugOfWar, "nope", BackgroundKind::Detailed, 0),
        Err(OlympicsError::UnknownMotif(_))
    ));
    assert!(matches!("fencing".parse::<Sport>(), Err(OlympicsError::UnknownSport(_))));
}

#[test]
fn experiment_sets_have_the_stated_shapes() {
    let e1 = sample_experiment_set(Experiment::E1, 7, None).unwrap();
    let e2 = sample_experiment_set(Experiment::E2, 7, None).unwrap();
    assert_eq!(e1.len(), 18);
    assert_eq!(e2.len(), 18);
    for s in Sport::ALL {
        assert_eq!(e1.iter().filter(|v| v.sport == s).count(), 6);
        let ids: HashSet<_> = e1.iter().filter(|v| v.sport == s).map(|v| &v.motif_id).collect();
        assert_eq!(ids.len(), 6, "motifs repeat within {s}");
    }
    for (a, b) in e1.iter().zip(&e2) {
        assert_eq!(a.motif_id, b.motif_id);
        assert_eq!(a.sport, b.sport);
        assert_eq!(a.background_kind, BackgroundKind::Detailed);
        assert_eq!(b.background_kind, BackgroundKind::Underspecified);
        assert_ne!(a.athletes, b.athletes);
        assert_eq!(a.observations.len(), b.observations.len());
    }

    assert!(matches!(
        sample_experiment_set(Experiment::E3, 7, None),
        Err(OlympicsError::MissingCommentaryFixture(0))
    ));
    let commentary = default_commentary();
    let e3 = sample_experiment_set(Experiment::E3, 7, Some(&commentary)).unwrap();
    assert_eq!(e3.len(), 9);
    let sports: BTreeSet<_> = e3.iter().map(|v| v.sport).collect();
    assert_eq!(sports, BTreeSet::from([Sport::TugOfWar, Sport::CanoeRacing]));
    for v in &e3 {
        let c = v.commentary.as_deref().unwrap();
        assert!(!c.contains('{'), "unfilled placeholder: {c}");
        assert_eq!(v.background_kind, BackgroundKind::UnderspecifiedWithCommentary);
    }
    assert!(matches!(
        sample_experiment_set(Experiment::E3, 7, Some(&commentary[..4])),
        Err(OlympicsError::MissingCommentaryFixture(4))
    ));
}

#[test]
fn experiment_sets_are_deterministic_and_seed_sensitive() {
    let a = sample_experiment_set(Experiment::E1, 3, None).unwrap();
    let b = sample_experiment_set(Experiment::E1, 3, None).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = sample_experiment_set(Experiment::E1, 4, None).unwrap();
    assert_ne!(a, c);
}

#[test]
fn vignette_json_round_trips() {
    let v = generate_vignette(Sport::CanoeRacing, "upset_of_favorite", BackgroundKind::Detailed, 2).unwrap();
    let json = serde_json::to_value(&v).unwrap();
    for key in ["sport", "background_kind", "background", "observations", "questions", "athletes", "motif_id", "seed"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["sport"], "canoe_racing");
    assert!(json.get("commentary").is_none());
    let back: Vignette = serde_json::from_value(json).unwrap();
    assert_eq!(back, v);
}

#[test]
fn gold_aggregation_per_sport() {
    let params = GoldParams::default();
    let src = |s| {
        let v = generate_vignette(s, "single_match_winner", BackgroundKind::Detailed, 1).unwrap();
        gold_model(&v, &params).unwrap()
    };
    let tug = src(Sport::TugOfWar);
    assert_eq!(tug.origin, Origin::Gold);
    assert!(tug.text.contains("var team_pulling_strength_in_match = function({team, match}) {\n  return sum(map("));
    let canoe = src(Sport::CanoeRacing);
    assert!(canoe.text.contains("var team_paddling_speed_in_race = function({team, race}) {\n  return mean(map("));
    let bi = src(Sport::Biathlon).text;
    assert!(bi.contains("return mean(map(function(athlete) {\n    return effective_skiing_speed_in_round"));
    assert!(bi.contains("return team_skiing_speed_in_round({team, round}) + team_shooting_accuracy_in_round({team, round});"));
    for s in Sport::ALL {
        parse_program(&src(s)).unwrap();
    }
}

#[test]
fn commentary_vignettes_have_no_gold_model() {
    let v = generate_vignette(Sport::TugOfWar, "round_robin_loser", BackgroundKind::UnderspecifiedWithCommentary, 1)
        .unwrap();
    assert!(matches!(gold_model(&v, &GoldParams::default()), Err(OlympicsError::NoGoldModel(_))));
}

#[test]
fn gold_parse_mirrors_observations() {
    let v = generate_vignette(Sport::Biathlon, "round_robin_winner", BackgroundKind::Detailed, 4).unwrap();
    let p = gold_parse(&v).unwrap();
    let (a, b) = (v.ident('A').unwrap(), v.ident('B').unwrap());
    assert!(p.conditions[0].starts_with(&format!("condition(beat({{team1: ['{a}', '{b}'], team2: [")));
    assert!(p.conditions[0].ends_with("round: 1}))"));
    assert_eq!(p.queries[0].1, format!("intrinsic_strength_rank({{athlete: '{a}', out_of_n_athletes: 100}})"));
    assert!(p.queries[7].1.ends_with("round: 4})"));
}

/// Every motif in every sport is satisfiable under the gold model and the
/// predictions stay on the slider.
#[test]
fn every_gold_program_runs() {
    let params = GoldParams::default();
    for s in Sport::ALL {
        for m in list_motifs() {
            let v = generate_vignette(s, &m.id, BackgroundKind::Detailed, 21).unwrap();
            let program = load(&gold_model(&v, &params).unwrap().text).unwrap();
            let est = run_rejection(&program, &RejectionConfig::new(200, 5)).unwrap();
            assert_eq!(est.labels().collect::<Vec<_>>(), v.labels(), "{s} {}", m.id);
            for label in ["q7", "q8"] {
                assert!(est.queries[label].iter().all(|x| (0.0..=100.0).contains(x)));
            }
            for xs in est.queries.values() {
                assert!(xs.iter().all(|x| (0.0..=100.0).contains(x)));
            }
        }
    }
}

/// Summing and averaging pulls order equal-size teams identically, so the
/// tug-of-war and canoe gold posteriors coincide draw for draw.
#[test]
fn tug_and_canoe_agree_on_equal_teams() {
    let a = common::signatures::run_probes(Sport::TugOfWar, "diverse_loser", 500, 3);
    let b = common::signatures::run_probes(Sport::CanoeRacing, "diverse_loser", 500, 3);
    assert_eq!(a.n_rejected, b.n_rejected);
    for (l, xs) in &a.queries {
        for (x, y) in xs.iter().zip(&b.queries[l]) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vignettes_are_deterministic_with_distinct_names(
        sport in prop::sample::select(Sport::ALL.to_vec()),
        motif in 0usize..16,
        seed in any::<u64>(),
    ) {
        let id = list_motifs()[motif].id.clone();
        let a = generate_vignette(sport, &id, BackgroundKind::Detailed, seed).unwrap();
        let b = generate_vignette(sport, &id, BackgroundKind::Detailed, seed).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let names: HashSet<_> = a.athletes.values().collect();
        prop_assert_eq!(names.len(), a.athletes.len());
        prop_assert!(a.athletes.values().all(|n| NAME_POOL.contains(&n.as_str())));
    }

    #[test]
    fn observations_follow_motif_outcomes(motif in 0usize..16, seed in any::<u64>()) {
        let m = &list_motifs()[motif];
        let v = generate_vignette(Sport::TugOfWar, &m.id, BackgroundKind::Detailed, seed).unwrap();
        for (g, o) in m.matches.iter().zip(&v.observations) {
            let first = v.name(g.team1[0]).unwrap();
            let verb = if g.winner == Winner::Team1 { " beat " } else { " lost to " };
            prop_assert!(o.contains(verb));
            let (lhs, _) = o.split_once(verb).unwrap();
            prop_assert!(lhs.contains(first));
        }
    }
}
