//! Scripted completions for offline pipeline runs.
//!
//! The script answers every stage for one vignette with text derived from
//! the gold model: the gold parse, a fixed background per sport and the
//! gold definitions. Commentary has no gold counterpart, so the scripted
//! parse encodes it with an always-true `commentary_noted()` predicate;
//! these runs exercise the machinery, not commentary reasoning.

use crate::lm::MockScript;
use crate::olympics::{gold_definitions, gold_parse, BackgroundKind, GoldParams, OlympicsError, Sport, Vignette};
use crate::seed::{derive_seed, str_word};

fn graph(sport: Sport) -> &'static str {
    match sport {
        Sport::TugOfWar => {
            "- intrinsic_strength\n- intrinsic_strength_rank\n  - depends on: intrinsic_strength\n\
             - effort_level_in_match\n  - depends on: intrinsic_strength\n\
             - pulling_strength_in_match\n  - depends on: intrinsic_strength, effort_level_in_match\n\
             - team_pulling_strength_in_match\n  - depends on: pulling_strength_in_match\n\
             - beat\n  - depends on: team_pulling_strength_in_match\n- lost\n  - depends on: beat\n\
             - who_would_win_by_how_much\n  - depends on: team_pulling_strength_in_match"
        }
        Sport::CanoeRacing => {
            "- intrinsic_strength\n- intrinsic_strength_rank\n  - depends on: intrinsic_strength\n\
             - effort_level_in_race\n  - depends on: intrinsic_strength\n\
             - paddling_speed_in_race\n  - depends on: intrinsic_strength, effort_level_in_race\n\
             - team_paddling_speed_in_race\n  - depends on: paddling_speed_in_race\n\
             - beat\n  - depends on: team_paddling_speed_in_race\n- lost\n  - depends on: beat\n\
             - who_would_win_by_how_much\n  - depends on: team_paddling_speed_in_race"
        }
        Sport::Biathlon => {
            "- intrinsic_strength\n- intrinsic_strength_rank\n  - depends on: intrinsic_strength\n\
             - effective_skiing_speed_in_round\n  - depends on: intrinsic_strength\n\
             - shooting_accuracy_in_round\n  - depends on: intrinsic_strength\n\
             - team_score\n  - depends on: effective_skiing_speed_in_round, shooting_accuracy_in_round\n\
             - beat\n  - depends on: team_score\n- lost\n  - depends on: beat\n\
             - who_would_win_by_how_much\n  - depends on: team_score"
        }
    }
}

fn augmentation(sport: Sport) -> &'static str {
    match sport {
        Sport::TugOfWar | Sport::CanoeRacing => {
            "Strength is fixed for the day. Effort varies by contest and is usually moderate, sometimes low and \
             sometimes high; stronger athletes slack off a little less often. Output in a contest is strength \
             scaled by effort, and the team with more output wins."
        }
        Sport::Biathlon => {
            "Strength is fixed for the day and sets skiing speed. Shooting accuracy improves with strength but \
             varies from round to round. A pair's score adds its mean skiing speed and mean accuracy, and the \
             higher score wins."
        }
    }
}

/// The parse block the gold model implies, one commented line per sentence.
pub fn gold_parse_block(v: &Vignette) -> Result<String, OlympicsError> {
    let parse = gold_parse(v)?;
    let mut out = String::from("<START_LANGUAGE_TO_WEBPPL_CODE>\n");
    for (sentence, c) in v.observations.iter().zip(&parse.conditions) {
        out.push_str(&format!("// {sentence}\n{c}\n"));
    }
    if let Some(c) = &v.commentary {
        out.push_str(&format!("// {c}\ncondition(commentary_noted())\n"));
    }
    for (q, (_, e)) in v.questions.iter().zip(&parse.queries) {
        out.push_str(&format!("// {}\n{e}\n", q.text));
    }
    out.push_str("<END_LANGUAGE_TO_WEBPPL_CODE>");
    Ok(out)
}

/// A script answering every pipeline and baseline request for `v`.
pub fn mock_script(v: &Vignette, params: &GoldParams) -> Result<MockScript, OlympicsError> {
    let id = &v.id;
    let mut script = MockScript::default();
    let mut plain = v.clone();
    plain.commentary = None;
    if plain.background_kind == BackgroundKind::UnderspecifiedWithCommentary {
        plain.background_kind = BackgroundKind::Underspecified;
    }
    let mut defs = gold_definitions(&plain, params)?;
    if v.commentary.is_some() {
        defs.push_str("\nvar commentary_noted = function() {\n  return true;\n};\n");
    }
    let background = format!(
        "<START_BACKGROUND>\n{}\n<END_BACKGROUND>\n<START_DEPENDENCY_GRAPH>\n{}\n<END_DEPENDENCY_GRAPH>",
        augmentation(v.sport),
        graph(v.sport)
    );
    let entries = [
        ("parse", gold_parse_block(v)?),
        ("score_parse", "80".to_string()),
        ("background", background),
        ("score_background", "80".to_string()),
        ("model", format!("<START_MODEL>\n{defs}<END_MODEL>")),
        ("baseline_cot_reasoning", "Weighing the results so far, some athletes look stronger than others.".into()),
    ];
    for (kind, text) in entries {
        script.tagged.insert(format!("{kind}|{id}"), vec![text]);
    }
    let n = v.questions.len() * 5;
    let answers: Vec<String> = (0..n)
        .map(|i| format!("I would say {}.", 20 + derive_seed(&[str_word(id), i as u64]) % 61))
        .collect();
    script.tagged.insert(format!("baseline_direct|{id}"), answers.clone());
    script.tagged.insert(format!("baseline_cot_answer|{id}"), answers);
    Ok(script)
}
