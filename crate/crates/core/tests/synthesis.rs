use std::sync::Arc;

use msa_core::infer::load;
use msa_core::lang::parse_source;
use msa_core::lm::{Backend, MockBackend, MockScript};
use msa_core::olympics::{
    default_commentary, generate_vignette, gold_parse, sample_experiment_set, BackgroundKind, Experiment, GoldParams,
    Sport, Vignette,
};
use msa_core::synthesis::*;
use proptest::prelude::*;

fn vignette(sport: Sport, motif: &str) -> Vignette {
    generate_vignette(sport, motif, BackgroundKind::Underspecified, 5).unwrap()
}

fn e3_tug() -> Vignette {
    let set = sample_experiment_set(Experiment::E3, 2, Some(&default_commentary())).unwrap();
    set.into_iter().find(|v| v.sport == Sport::TugOfWar).unwrap()
}

fn mock(v: &Vignette) -> MockScript {
    mock_script(v, &GoldParams::default()).unwrap()
}

fn small() -> PipelineConfig {
    PipelineConfig {
        k_samples: 50,
        ..PipelineConfig::default()
    }
}

fn set(script: &mut MockScript, tag: String, texts: &[&str]) {
    script.tagged.insert(tag, texts.iter().map(|t| t.to_string()).collect());
}

fn injected(prompt: &str) -> Vec<&str> {
    prompt
        .lines()
        .filter_map(|l| l.strip_prefix("### EXAMPLE: "))
        .collect()
}

#[test]
fn every_example_fixture_parses_and_runs() {
    for e in EXAMPLES {
        let model = block(e.text, "MODEL").unwrap();
        parse_source(model).unwrap_or_else(|d| panic!("{}: {d}", e.id));
        let code = block(e.text, "LANGUAGE_TO_WEBPPL_CODE").unwrap();
        let scenario = block(e.text, "SCENARIO").unwrap();
        let observations = scenario
            .lines()
            .filter(|l| l.starts_with("In the") || l.starts_with("On the"))
            .count();
        let queries = scenario.lines().filter(|l| l.starts_with("Query ")).count();
        let commentary = usize::from(e.id.ends_with("_commentary"));
        let parsed = parse_block(code, observations + commentary, queries).unwrap_or_else(|err| panic!("{}: {err}", e.id));
        let (_, graph) = parse_background(e.text).unwrap();
        assert!(graph.len() >= 5, "{}", e.id);
        let labels: Vec<String> = (1..=queries).map(|i| format!("q{i}")).collect();
        let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
        let (_, smoke) = gate(model, &parsed, &labels, &PipelineConfig::default(), 3)
            .unwrap_or_else(|d| panic!("{}: {d}", e.id));
        assert_eq!(smoke.queries.len(), queries);
    }
}

#[test]
fn prompts_hold_out_the_vignettes_sport() {
    let config = PipelineConfig::default();
    for sport in Sport::ALL {
        let v = vignette(sport, "round_robin_winner");
        let p = assemble_prompt(Stage::Parse, &v, &config, 9, &PromptContext::default()).unwrap();
        let mut got = injected(&p);
        got.sort_unstable();
        let mut want: Vec<&str> = ["tug_of_war", "canoe_racing", "biathlon", "diving", "exam"]
            .into_iter()
            .filter(|d| *d != sport.as_str())
            .collect();
        want.sort_unstable();
        assert_eq!(got, want);
        assert!(!p.contains(EXAMPLES_TOKEN));
        assert!(p.contains(&v.observations[0]));
    }
}

#[test]
fn prompt_assembly_is_seeded_and_truncated_per_stage() {
    let config = PipelineConfig::default();
    let v = vignette(Sport::Biathlon, "diverse_winner");
    let ctx = PromptContext::default();
    let a = assemble_prompt(Stage::Model, &v, &config, 1, &ctx).unwrap();
    assert_eq!(a, assemble_prompt(Stage::Model, &v, &config, 1, &ctx).unwrap());
    let orders: std::collections::BTreeSet<Vec<String>> = (0..20)
        .map(|s| {
            let p = assemble_prompt(Stage::Model, &v, &config, s, &ctx).unwrap();
            injected(&p).into_iter().map(String::from).collect()
        })
        .collect();
    assert!(orders.len() > 1, "seeds should reorder the examples");

    let parse = assemble_prompt(Stage::Parse, &v, &config, 1, &ctx).unwrap();
    assert!(parse.contains("<END_LANGUAGE_TO_WEBPPL_CODE>"));
    assert!(!parse.contains("<START_DEPENDENCY_GRAPH>"));
    assert!(!parse.contains("<START_MODEL>"));
    let background = assemble_prompt(Stage::Background, &v, &config, 1, &ctx).unwrap();
    assert!(background.contains("<END_DEPENDENCY_GRAPH>"));
    assert!(!background.contains("var intrinsic_strength"));
    // four full examples plus the reply instruction
    assert_eq!(a.matches("<END_MODEL>").count(), 5);
}

#[test]
fn commentary_mode_drops_the_exam_domain() {
    let v = e3_tug();
    let config = PipelineConfig::for_experiment(Experiment::E3);
    assert!(!config.example_pool.iter().any(|id| id.starts_with("exam")));
    let p = assemble_prompt(Stage::Parse, &v, &config, 0, &PromptContext::default()).unwrap();
    let got = injected(&p);
    assert_eq!(got.len(), 3);
    assert!(!got.contains(&"exam") && !got.contains(&"tug_of_war"));
    // even a pool that lists exam leaves it out for commentary vignettes
    let mut pool = PipelineConfig::default();
    pool.example_pool.push("tug_of_war_commentary".into());
    let p = assemble_prompt(Stage::Parse, &v, &pool, 0, &PromptContext::default()).unwrap();
    assert!(!injected(&p).contains(&"exam"));
}

#[test]
fn pool_without_a_required_domain_is_rejected() {
    let v = vignette(Sport::TugOfWar, "single_match_loser");
    let mut config = PipelineConfig::default();
    config.example_pool.retain(|id| id != "diving");
    let err = assemble_prompt(Stage::Parse, &v, &config, 0, &PromptContext::default()).unwrap_err();
    assert_eq!(err, SynthesisError::MissingFixture("diving".into()));
    config.example_pool.push("no_such_fixture".into());
    assert!(matches!(
        assemble_prompt(Stage::Parse, &v, &config, 0, &PromptContext::default()),
        Err(SynthesisError::MissingFixture(id)) if id == "no_such_fixture"
    ));
}

#[test]
fn biathlon_parse_line_matches_the_reference_shape() {
    let v = vignette(Sport::Biathlon, "round_robin_winner");
    let parse = gold_parse(&v).unwrap();
    let a = v.ident('A').unwrap();
    let b = v.ident('B').unwrap();
    assert!(v.observations[0].starts_with(&format!("In the first round, {} and {} beat", v.name('A').unwrap(), v.name('B').unwrap())));
    assert!(parse.conditions[0].starts_with(&format!("condition(beat({{team1: ['{a}', '{b}']")));
    assert!(parse.conditions[0].ends_with("round: 1}))"));
}

#[test]
fn parse_stage_passes_the_script_through() {
    let v = vignette(Sport::TugOfWar, "confounded_losers");
    let script = mock(&v);
    let expected = script.tagged[&format!("parse|{}", v.id)][0].clone();
    let backend = MockBackend::new(script);
    let config = small();
    let mut s = Session::new(&v, &config, &backend, 0, 1);
    let out = stage_parse(&mut s).unwrap();
    assert_eq!(out.output.selected(), expected);
    assert_eq!(out.output.candidates[0].score, None);
    assert_eq!(out.block.conditions.len(), 3);
    assert_eq!(out.block.queries.len(), 8);
    assert!(out.output.rejected.is_empty());
}

#[test]
fn malformed_parse_is_resampled_once() {
    let v = vignette(Sport::TugOfWar, "confounded_losers");
    let mut script = mock(&v);
    let good = script.tagged[&format!("parse|{}", v.id)][0].clone();
    set(&mut script, format!("parse|{}", v.id), &["condition(", &good]);
    let config = small();
    let backend = MockBackend::new(script);
    let mut s = Session::new(&v, &config, &backend, 0, 1);
    let out = stage_parse(&mut s).unwrap();
    assert_eq!(out.output.selected(), good);
    assert_eq!(out.output.rejected.len(), 1);
    assert_eq!(out.output.rejected[0].text, "condition(");
    assert!(matches!(out.output.rejected[0].diagnostic, Diagnostic::Malformed { .. }));
}

#[test]
fn parse_stage_gives_up_after_the_retry_limit() {
    let v = vignette(Sport::CanoeRacing, "single_match_winner");
    let mut script = mock(&v);
    set(&mut script, format!("parse|{}", v.id), &["not code at all ("]);
    let config = small();
    let backend = MockBackend::new(script);
    let mut s = Session::new(&v, &config, &backend, 0, 1);
    match stage_parse(&mut s) {
        Err(SynthesisError::StageFailure { stage, diagnostics }) => {
            assert_eq!(stage, Stage::Parse);
            assert_eq!(diagnostics.len(), config.retry_limits.parse + 1);
        }
        other => panic!("expected a stage failure, got {other:?}"),
    }
    // a parse with the wrong number of queries is malformed too
    let mut script = mock(&v);
    set(&mut script, format!("parse|{}", v.id), &["condition(beat({team1: ['a'], team2: ['b'], race: 1}))"]);
    let backend = MockBackend::new(script);
    let mut s = Session::new(&v, &config, &backend, 0, 1);
    assert!(stage_parse(&mut s).is_err());
}

fn run_background(v: &Vignette, script: MockScript, config: &PipelineConfig) -> BackgroundResult {
    let backend = MockBackend::new(script);
    let mut s = Session::new(v, config, &backend, 0, 4);
    let parse = stage_parse(&mut s).unwrap();
    stage_background(&mut s, &parse).unwrap()
}

#[test]
fn biathlon_graph_links_accuracy_to_strength() {
    let v = vignette(Sport::Biathlon, "weak_indirect_loser");
    let out = run_background(&v, mock(&v), &small());
    let edge = out.graph.iter().find(|e| e.concept == "shooting_accuracy_in_round").unwrap();
    assert!(edge.depends_on.contains(&"intrinsic_strength".to_string()));
    assert_eq!(out.output.candidates.len(), 8);
    // eight equal scores select the first
    assert!(out.output.candidates.iter().all(|c| c.score == Some(80.0)));
    assert_eq!(out.output.selected_index, 0);
}

#[test]
fn single_relevance_candidate_skips_scoring() {
    let v = vignette(Sport::Biathlon, "weak_indirect_loser");
    let mut script = mock(&v);
    // a judge request would draw this and fail the assertion below
    set(&mut script, format!("score_background|{}", v.id), &["100"]);
    let config = PipelineConfig {
        k_relevance: 1,
        ..small()
    };
    let out = run_background(&v, script, &config);
    assert_eq!(out.output.candidates.len(), 1);
    assert_eq!(out.output.candidates[0].score, None);
    assert_eq!(out.output.selected_index, 0);
}

#[test]
fn judge_scores_pick_the_first_maximum() {
    let v = vignette(Sport::CanoeRacing, "diverse_loser");
    let mut script = mock(&v);
    let bg = script.tagged[&format!("background|{}", v.id)][0].clone();
    let other = bg.replace("Strength is fixed", "Strength never changes");
    set(&mut script, format!("background|{}", v.id), &[&bg, &other, &other]);
    set(&mut script, format!("score_background|{}", v.id), &["Score: 40", "90", "I'd give it 90/100"]);
    let config = PipelineConfig {
        k_relevance: 3,
        ..small()
    };
    let out = run_background(&v, script, &config);
    let scores: Vec<_> = out.output.candidates.iter().map(|c| c.score.unwrap()).collect();
    assert_eq!(scores, [40.0, 90.0, 90.0]);
    assert_eq!(out.output.selected_index, 1);
}

#[test]
fn judge_output_without_a_number_scores_zero() {
    let v = vignette(Sport::CanoeRacing, "diverse_loser");
    let mut script = MockScript::default();
    set(&mut script, format!("score_parse|{}", v.id), &["87", "looks fine to me", "score 250 or so"]);
    let backend = MockBackend::new(script);
    let config = small();
    let mut s = Session::new(&v, &config, &backend, 0, 0);
    let c = vec!["a".to_string(), "b".into(), "c".into()];
    assert_eq!(score_candidates(&mut s, Stage::Parse, &c, None), [87.0, 0.0, 0.0]);
    // a backend error also degrades to 0
    let mut s = Session::new(&v, &config, &backend, 1, 0);
    let empty = MockBackend::new(MockScript::default());
    s.backend = &empty;
    assert_eq!(score_candidates(&mut s, Stage::Background, &c[..1], None), [0.0]);
}

/// The tug commentary example program, with the vignette's commentary
/// parsed as a shoulder injury in the first match.
fn injury_script(v: &Vignette) -> MockScript {
    let mut script = mock(v);
    let parse = gold_parse(v).unwrap();
    let mut lines: Vec<String> = parse.conditions.clone();
    lines.push(format!(
        "condition(pulled_muscle_in_shoulder_in_match({{athlete: '{}', match: 1}}))",
        v.ident('A').unwrap()
    ));
    lines.extend(parse.queries.iter().map(|(_, q)| q.clone()));
    let code = format!("<START_LANGUAGE_TO_WEBPPL_CODE>\n{}\n<END_LANGUAGE_TO_WEBPPL_CODE>", lines.join("\n"));
    let model = block(example("tug_of_war_commentary").unwrap().text, "MODEL").unwrap();
    set(&mut script, format!("parse|{}", v.id), &[&code]);
    set(&mut script, format!("model|{}", v.id), &[&format!("<START_MODEL>\n{model}\n<END_MODEL>")]);
    script
}

#[test]
fn commentary_example_program_passes_the_gate() {
    let v = e3_tug();
    let config = PipelineConfig::for_experiment(Experiment::E3);
    let backend = MockBackend::new(injury_script(&v));
    let mut s = Session::new(&v, &config, &backend, 0, 8);
    let parse = stage_parse(&mut s).unwrap();
    let background = stage_background(&mut s, &parse).unwrap();
    let out = stage_model(&mut s, &parse, &background).unwrap();
    assert!(out.output.rejected.is_empty());
    assert!(out.model.pi_b.contains("pulled_muscle_in_shoulder_in_match"));
    let smoke = gate(&out.model.pi_b, &parse.block, &v.labels(), &config, 1).unwrap().1;
    let labels: Vec<&str> = smoke.labels().collect();
    let mut want = v.labels();
    want.sort_unstable();
    assert_eq!(labels, want);
    assert_eq!(labels.len(), 8);
}

#[test]
fn gate_reports_missing_definitions_and_moves_on() {
    let v = vignette(Sport::TugOfWar, "round_robin_loser");
    let mut script = mock(&v);
    let good = script.tagged[&format!("model|{}", v.id)][0].clone();
    let start = good.find("var beat = ").unwrap();
    let end = start + good[start..].find("};\n").unwrap() + 3;
    let broken = format!("{}{}", &good[..start], &good[end..]);
    set(&mut script, format!("model|{}", v.id), &[&broken, &good]);
    let config = small();
    let backend = MockBackend::new(script);
    let mut s = Session::new(&v, &config, &backend, 0, 2);
    let parse = stage_parse(&mut s).unwrap();
    let background = stage_background(&mut s, &parse).unwrap();
    let out = stage_model(&mut s, &parse, &background).unwrap();
    assert_eq!(out.output.candidates[0].text, good);
    assert_eq!(out.output.rejected.len(), 1);
    assert_eq!(
        out.output.rejected[0].diagnostic,
        Diagnostic::FreeFunctions {
            names: vec!["beat".into()]
        }
    );
}

#[test]
fn model_stage_exhaustion_carries_every_diagnostic() {
    let v = vignette(Sport::TugOfWar, "round_robin_loser");
    let mut script = mock(&v);
    set(
        &mut script,
        format!("model|{}", v.id),
        &["var beat = function(", "var x = 1;", "<START_MODEL>\nvar beat = function(r) { return flip(0.0); };\nvar lost = beat;\n<END_MODEL>"],
    );
    let config = PipelineConfig {
        smoke_max_attempts: 100,
        ..small()
    };
    let backend = MockBackend::new(script);
    let mut s = Session::new(&v, &config, &backend, 0, 2);
    let parse = stage_parse(&mut s).unwrap();
    let background = stage_background(&mut s, &parse).unwrap();
    match stage_model(&mut s, &parse, &background) {
        Err(SynthesisError::StageFailure { stage, diagnostics }) => {
            assert_eq!(stage, Stage::Model);
            assert_eq!(diagnostics.len(), config.k_program_attempts);
            assert!(matches!(diagnostics[0].diagnostic, Diagnostic::Syntax { .. }));
            assert!(matches!(diagnostics[1].diagnostic, Diagnostic::FreeFunctions { .. }));
            assert!(matches!(diagnostics[2].diagnostic, Diagnostic::FreeFunctions { .. }));
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
}

#[test]
fn smoke_run_rejecting_everything_fails_the_gate() {
    let v = vignette(Sport::TugOfWar, "single_match_winner");
    let parse = parse_block(&gold_parse_block(&v).unwrap(), 1, 8).unwrap();
    let defs = block(example("tug_of_war").unwrap().text, "MODEL")
        .unwrap()
        .replace("return !beat({team1, team2, match});", "return false;")
        .replace(
            "return team_pulling_strength_in_match({team: team1, match}) > team_pulling_strength_in_match({team: team2, match});",
            "return false;",
        );
    let config = PipelineConfig {
        smoke_max_attempts: 200,
        ..PipelineConfig::default()
    };
    assert!(matches!(
        gate(&defs, &parse, &v.labels(), &config, 0),
        Err(Diagnostic::SmokeRejected { .. })
    ));
}

#[test]
fn one_vignette_per_sport_end_to_end() {
    let config = PipelineConfig::default();
    for sport in Sport::ALL {
        let v = vignette(sport, "strong_indirect_winner");
        let backend = MockBackend::new(mock(&v));
        let run = simulate_participant(&v, &config, &backend, 0, 77).unwrap();
        assert_eq!(run.posterior.n_samples, 1000);
        let mut labels: Vec<&str> = run.posterior.labels().collect();
        let mut want = v.labels();
        labels.sort_unstable();
        want.sort_unstable();
        assert_eq!(labels, want);
        let stages: Vec<Stage> = run.stages.iter().map(|s| s.stage).collect();
        assert_eq!(stages, [Stage::Parse, Stage::Background, Stage::Model]);
        for c in &run.model.pi_o {
            assert!(run.model.combined.text.contains(c.as_str()));
        }
        for q in &run.model.pi_q {
            assert!(run.model.combined.text.contains(&format!("{}: {}", q.label, q.text)));
        }
        assert!(run.model.b_aug.starts_with(&v.background));
        for m in &run.transcript {
            assert!(!m.text.contains(&format!("### EXAMPLE: {}", sport.as_str())));
        }
    }
}

#[test]
fn experiment_budgets_follow_the_experiment() {
    let e3 = PipelineConfig::for_experiment(Experiment::E3);
    assert_eq!(e3.k_samples, 500);
    assert_eq!(PipelineConfig::for_experiment(Experiment::E1).k_samples, 1000);
    let v = e3_tug();
    let backend = MockBackend::new(mock(&v));
    let run = simulate_participant(&v, &e3, &backend, 0, 3).unwrap();
    assert_eq!(run.posterior.n_samples, 500);
    assert!(run.model.pi_o.last().unwrap().contains("commentary_noted"));
}

#[test]
fn mock_runs_are_byte_identical() {
    let v = vignette(Sport::Biathlon, "fluke_loss_of_pair");
    let run = || {
        let backend = MockBackend::new(mock(&v));
        serde_json::to_string(&simulate_participant(&v, &small(), &backend, 2, 11).unwrap()).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn experiment_failures_stay_with_their_participant() {
    let vs = vec![vignette(Sport::TugOfWar, "diverse_winner"), vignette(Sport::CanoeRacing, "diverse_loser")];
    let mut script = mock(&vs[0]);
    script.merge(mock(&vs[1]));
    // participant 3 of the first vignette only ever sees a broken model
    set(&mut script, format!("model|{}|p3", vs[0].id), &["var nothing = 0;"]);
    let config = PipelineConfig {
        n_participants: 4,
        ..small()
    };
    let backend: Arc<dyn Backend> = Arc::new(MockBackend::new(script));
    let outcomes = run_experiment(&vs, &config, backend.as_ref(), 5).unwrap();
    assert_eq!(outcomes.len(), 8);
    let failed: Vec<_> = outcomes
        .iter()
        .filter(|o| o.result.is_err())
        .map(|o| (o.vignette_id.as_str(), o.participant_id))
        .collect();
    assert_eq!(failed, [(vs[0].id.as_str(), 3)]);
    let ids: Vec<_> = outcomes.iter().map(|o| o.participant_id).collect();
    assert_eq!(ids, [0, 1, 2, 3, 0, 1, 2, 3]);

    let single = PipelineConfig {
        n_participants: 1,
        ..small()
    };
    assert_eq!(run_experiment(&vs, &single, backend.as_ref(), 5).unwrap().len(), 2);
}

#[test]
fn direct_baseline_passes_answers_through() {
    let v = vignette(Sport::TugOfWar, "upset_of_favorite");
    let mut script = MockScript::default();
    set(&mut script, format!("baseline_direct|{}", v.id), &["72"]);
    let backend = MockBackend::new(script);
    let run = run_baseline(BaselineMode::Direct, &v, &backend, 0, 1, &BaselineConfig::default()).unwrap();
    assert_eq!(run.answers.answers.len(), 8);
    assert!(run.answers.answers.values().all(|xs| xs == &[72.0; 5]));
    // system, then one question and one answer per slot
    assert_eq!(run.transcript.len(), 1 + 2 * 40);
    let first_q = v.questions[0].text.as_str();
    assert!(run.transcript[1].text.contains(first_q));
    assert!(run.transcript[9].text.contains(first_q));
    assert!(run.transcript[11].text.contains(&v.questions[1].text));
}

#[test]
fn cot_baseline_keeps_reasoning_and_reasks() {
    let v = vignette(Sport::Biathlon, "upset_of_favorite");
    let mut script = MockScript::default();
    set(&mut script, format!("baseline_cot_reasoning|{}", v.id), &["Let me think about the rounds."]);
    set(
        &mut script,
        format!("baseline_cot_answer|{}", v.id),
        &["Hard to say.", "between 60 and 70", "about 85%."],
    );
    let backend = MockBackend::new(script);
    let run = run_baseline(BaselineMode::Cot, &v, &backend, 0, 1, &BaselineConfig::default()).unwrap();
    let first = &run.answers.answers[&v.questions[0].label];
    assert_eq!(first, &[60.0, 85.0, 85.0, 85.0, 85.0]);
    assert!(run.transcript.iter().any(|m| m.text == "Let me think about the rounds."));

    let mut script = MockScript::default();
    set(&mut script, format!("baseline_direct|{}", v.id), &["no idea"]);
    let backend = MockBackend::new(script);
    assert_eq!(
        run_baseline(BaselineMode::Direct, &v, &backend, 0, 1, &BaselineConfig::default()).unwrap_err(),
        SynthesisError::BaselineParseFailure {
            label: v.questions[0].label.clone(),
            response: 0
        }
    );
}

#[test]
fn baseline_json_has_the_documented_shape() {
    let v = vignette(Sport::CanoeRacing, "round_robin_loser");
    let backend = MockBackend::new(mock(&v));
    let run = run_baseline(BaselineMode::Direct, &v, &backend, 3, 1, &BaselineConfig::default()).unwrap();
    let json: serde_json::Value = serde_json::to_value(&run.answers).unwrap();
    assert_eq!(json["vignette_id"], v.id.as_str());
    assert_eq!(json["participant_id"], 3);
    assert_eq!(json["answers"][&v.questions[0].label].as_array().unwrap().len(), 5);
}

#[test]
fn config_validation_and_json() {
    assert!(PipelineConfig::default().validate().is_ok());
    let c = PipelineConfig::from_json(r#"{"k_relevance": 2, "program_temperature": 0.7}"#).unwrap();
    assert_eq!((c.k_relevance, c.k_parse, c.k_samples), (2, 1, 1000));
    assert!(PipelineConfig::from_json(r#"{"k_parse": 0}"#).is_err());
    assert!(PipelineConfig::from_json(r#"{"parse_temperature": 2.5}"#).is_err());
    assert!(PipelineConfig::from_json(r#"{"unknown": 1}"#).is_err());
}

#[test]
fn the_commentary_fixture_program_loads() {
    let text = block(example("tug_of_war_commentary").unwrap().text, "MODEL").unwrap();
    let program = format!(
        "{text}\nvar model = function() {{\n  return {{x: pulling_strength_in_match({{athlete: 'a', match: 2}})}};\n}};\n"
    );
    assert!(load(&program).is_ok());
}

proptest! {
    #[test]
    fn argmax_selects_the_first_maximum(scores in prop::collection::vec(0u32..5, 1..12)) {
        let s: Vec<f64> = scores.iter().map(|&x| f64::from(x)).collect();
        let i = argmax_lowest(&s);
        let max = s.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert_eq!(s[i], max);
        prop_assert!(s[..i].iter().all(|&x| x < max));
    }

    #[test]
    fn extraction_finds_any_embedded_in_range_integer(n in 0u32..=100, prefix in "[a-z ]{0,12}", suffix in "[a-z %.]{0,12}") {
        let text = format!("{prefix} {n}{suffix}");
        prop_assert_eq!(first_in_range_number(&text), Some(f64::from(n)));
        prop_assert_eq!(first_score(&text), Some(n));
    }
}
