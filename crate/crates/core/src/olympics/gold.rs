//! Hand-built causal models for the three sports, emitted as programs in
//! the PPL so they run through the same inference engine as synthesized
//! ones.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::motifs::{find_motif, Motif, Role, Winner};
use super::{BackgroundKind, OlympicsError, Sport, Vignette};
use crate::lang::{assemble_model, Origin, SourceProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Sum,
    Mean,
}

impl Aggregation {
    fn builtin(self) -> &'static str {
        match self {
            Aggregation::Sum => "sum",
            Aggregation::Mean => "mean",
        }
    }
}

/// Every free parameter of the gold models. Effort vectors are indexed
/// low, moderate, high.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GoldParams {
    pub strength_mean: f64,
    pub strength_sd: f64,
    pub strength_lower: f64,
    pub strength_upper: f64,
    pub effort_probabilities: [f64; 3],
    pub effort_multipliers: [f64; 3],
    /// Shift of the high-effort probability per strength sd above the mean;
    /// the low-effort probability moves the opposite way.
    pub effort_tilt: f64,
    pub effort_report_means: [f64; 3],
    pub effort_report_sds: [f64; 3],
    pub accuracy_intercept: f64,
    pub accuracy_slope: f64,
    pub accuracy_sd: f64,
    pub aggregation: BTreeMap<Sport, Aggregation>,
    /// Slider points per prior sd of the score difference.
    pub prediction_points_per_sd: f64,
}

impl Default for GoldParams {
    fn default() -> Self {
        GoldParams {
            strength_mean: 50.0,
            strength_sd: 15.0,
            strength_lower: 0.0,
            strength_upper: 100.0,
            effort_probabilities: [0.1, 0.75, 0.15],
            effort_multipliers: [0.5, 1.0, 1.25],
            effort_tilt: 0.1,
            effort_report_means: [40.0, 75.0, 95.0],
            effort_report_sds: [8.0, 8.0, 8.0],
            accuracy_intercept: 40.0,
            accuracy_slope: 0.3,
            accuracy_sd: 15.0,
            aggregation: [
                (Sport::TugOfWar, Aggregation::Sum),
                (Sport::CanoeRacing, Aggregation::Mean),
                (Sport::Biathlon, Aggregation::Mean),
            ]
            .into_iter()
            .collect(),
            prediction_points_per_sd: 25.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid gold parameters: {0}")]
pub struct ParamsError(pub String);

impl GoldParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        let bad = |m: &str| Err(ParamsError(m.to_string()));
        let finite = [
            self.strength_mean,
            self.strength_lower,
            self.strength_upper,
            self.effort_tilt,
            self.accuracy_intercept,
            self.accuracy_slope,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return bad("parameters must be finite");
        }
        let sds = [self.strength_sd, self.accuracy_sd]
            .into_iter()
            .chain(self.effort_report_sds);
        if sds.into_iter().any(|s| !(s > 0.0 && s.is_finite())) {
            return bad("standard deviations must be positive");
        }
        if self.strength_lower >= self.strength_upper {
            return bad("strength truncation bounds must be ordered");
        }
        let p = &self.effort_probabilities;
        if p.iter().any(|x| !(*x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("effort probabilities must be non-negative and sum to 1");
        }
        if self.effort_multipliers.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return bad("effort multipliers must be positive");
        }
        if self.effort_report_means.iter().any(|m| !m.is_finite()) {
            return bad("effort report means must be finite");
        }
        for s in Sport::ALL {
            if !self.aggregation.contains_key(&s) {
                return bad(&format!("no aggregation rule for {s}"));
            }
        }
        if !(self.prediction_points_per_sd > 0.0 && self.prediction_points_per_sd.is_finite()) {
            return bad("prediction_points_per_sd must be positive");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ParamsError> {
        let p: GoldParams = serde_json::from_str(text).map_err(|e| ParamsError(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    fn effort_probs(&self, z: f64) -> [f64; 3] {
        let low = (self.effort_probabilities[0] - self.effort_tilt * z).max(0.0);
        let high = (self.effort_probabilities[2] + self.effort_tilt * z).max(0.0);
        [low, (1.0 - low - high).max(0.0), high]
    }
}

/// Observation conditions and labelled queries of a vignette, as source
/// text in the call shapes the gold definitions provide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldParse {
    pub conditions: Vec<String>,
    pub queries: Vec<(String, String)>,
}

fn team_list(v: &Vignette, roles: &[Role]) -> Result<String, OlympicsError> {
    let names: Result<Vec<String>, _> = roles
        .iter()
        .map(|r| {
            v.ident(*r).map(|n| format!("'{n}'")).ok_or_else(|| OlympicsError::Inconsistent {
                vignette: v.id.clone(),
                problem: format!("no athlete for role {r}"),
            })
        })
        .collect();
    Ok(format!("[{}]", names?.join(", ")))
}

fn motif_of(v: &Vignette) -> Result<Motif, OlympicsError> {
    let m = find_motif(&v.motif_id).ok_or_else(|| OlympicsError::UnknownMotif(v.motif_id.clone()))?;
    if m.matches.len() != v.observations.len() || v.questions.len() != 8 {
        return Err(OlympicsError::Inconsistent {
            vignette: v.id.clone(),
            problem: "observation or question count differs from the motif".into(),
        });
    }
    Ok(m)
}

/// Encode the vignette's observations and questions as expressions.
pub fn gold_parse(v: &Vignette) -> Result<GoldParse, OlympicsError> {
    let m = motif_of(v)?;
    let key = v.sport.event_noun();
    let mut conditions = Vec::new();
    for (i, g) in m.matches.iter().enumerate() {
        let f = if g.winner == Winner::Team1 { "beat" } else { "lost" };
        conditions.push(format!(
            "condition({f}({{team1: {}, team2: {}, {key}: {}}}))",
            team_list(v, &g.team1)?,
            team_list(v, &g.team2)?,
            i + 1
        ));
    }
    let ident = |r: Role| {
        v.ident(r).ok_or_else(|| OlympicsError::Inconsistent {
            vignette: v.id.clone(),
            problem: format!("no athlete for role {r}"),
        })
    };
    let mut exprs = Vec::new();
    for &r in &m.focus.constant_roles {
        exprs.push(format!(
            "intrinsic_strength_rank({{athlete: '{}', out_of_n_athletes: 100}})",
            ident(r)?
        ));
    }
    for &(r, idx) in &m.focus.temporal_probes {
        exprs.push(format!("{}({{athlete: '{}', {key}: {idx}}})", v.sport.temporal_function(), ident(r)?));
    }
    let next = m.matches.len() + 1;
    for p in &m.focus.predictions {
        exprs.push(format!(
            "who_would_win_by_how_much({{team1: {}, team2: {}, {key}: {next}}})",
            team_list(v, &p.team1)?,
            team_list(v, &p.team2)?
        ));
    }
    let queries = v.questions.iter().map(|q| q.label.clone()).zip(exprs).collect();
    Ok(GoldParse { conditions, queries })
}

/// Prior sd of (score of team 1 − score of team 2) in a fresh contest,
/// estimated by simulation with a fixed stream.
fn score_difference_sd(sport: Sport, n1: usize, n2: usize, p: &GoldParams) -> f64 {
    const DRAWS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x601d);
    let strength = Normal::new(p.strength_mean, p.strength_sd).expect("validated sd");
    let draw_strength = |rng: &mut ChaCha8Rng| loop {
        let s = strength.sample(rng);
        if s >= p.strength_lower && s <= p.strength_upper {
            return s;
        }
    };
    let agg = p.aggregation[&sport];
    let combine = |xs: &[f64]| match agg {
        Aggregation::Sum => xs.iter().sum::<f64>(),
        Aggregation::Mean => xs.iter().sum::<f64>() / xs.len() as f64,
    };
    let team = |rng: &mut ChaCha8Rng, n: usize| -> f64 {
        match sport {
            Sport::Biathlon => {
                let mut speed = Vec::with_capacity(n);
                let mut acc = Vec::with_capacity(n);
                for _ in 0..n {
                    let s = draw_strength(rng);
                    let a = Normal::new(p.accuracy_intercept + p.accuracy_slope * s, p.accuracy_sd)
                        .expect("validated sd")
                        .sample(rng);
                    speed.push(s);
                    acc.push(a.clamp(0.0, 100.0));
                }
                combine(&speed) + combine(&acc)
            }
            _ => {
                let pulls: Vec<f64> = (0..n)
                    .map(|_| {
                        let s = draw_strength(rng);
                        let probs = p.effort_probs((s - p.strength_mean) / p.strength_sd);
                        let total: f64 = probs.iter().sum();
                        let u = rng.random::<f64>() * total;
                        let cat = if u < probs[0] {
                            0
                        } else if u < probs[0] + probs[1] {
                            1
                        } else {
                            2
                        };
                        s * p.effort_multipliers[cat]
                    })
                    .collect();
                combine(&pulls)
            }
        }
    };
    let diffs: Vec<f64> = (0..DRAWS).map(|_| team(&mut rng, n1) - team(&mut rng, n2)).collect();
    let mean = diffs.iter().sum::<f64>() / DRAWS as f64;
    (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (DRAWS - 1) as f64).sqrt()
}

/// Slider points per unit of score difference for teams of the given sizes.
pub fn prediction_gain(sport: Sport, n1: usize, n2: usize, params: &GoldParams) -> f64 {
    params.prediction_points_per_sd / score_difference_sd(sport, n1, n2, params)
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// Definitions shared by all vignettes of a sport. `gains` maps team sizes
/// to the prediction gain.
fn definitions(sport: Sport, p: &GoldParams, gains: &[((usize, usize), f64)]) -> String {
    let key = sport.event_noun();
    let agg = p.aggregation[&sport].builtin();
    let (mu, sd) = (num(p.strength_mean), num(p.strength_sd));
    let mut out = format!(
        "var clamp = function(x, lo, hi) {{\n  return min(max(x, lo), hi);\n}};\n\n\
         // Truncated by resampling.\n\
         var draw_strength = function() {{\n  var s = gaussian({mu}, {sd});\n  return s >= {lo} && s <= {hi} ? s : draw_strength();\n}};\n\n\
         var intrinsic_strength = mem(function({{athlete}}) {{\n  return draw_strength();\n}});\n\n\
         var intrinsic_strength_rank = function({{athlete, out_of_n_athletes}}) {{\n  \
         return round(out_of_n_athletes * normalCDF((intrinsic_strength({{athlete}}) - {mu}) / {sd}));\n}};\n\n",
        lo = num(p.strength_lower),
        hi = num(p.strength_upper),
    );

    let by_size = {
        let mut chain = String::new();
        for ((n1, n2), g) in &gains[..gains.len() - 1] {
            chain.push_str(&format!("length(team1) == {n1} && length(team2) == {n2} ? {} : ", num(*g)));
        }
        chain.push_str(&num(gains[gains.len() - 1].1));
        chain
    };

    match sport {
        Sport::Biathlon => {
            out.push_str(&format!(
                "var effective_skiing_speed_in_round = function({{athlete, round}}) {{\n  return intrinsic_strength({{athlete}});\n}};\n\n\
                 var shooting_accuracy_in_round = mem(function({{athlete, round}}) {{\n  \
                 return clamp(gaussian({a} + {b} * intrinsic_strength({{athlete}}), {s}), 0, 100);\n}});\n\n\
                 var team_skiing_speed_in_round = function({{team, round}}) {{\n  \
                 return {agg}(map(function(athlete) {{\n    return effective_skiing_speed_in_round({{athlete, round}});\n  }}, team));\n}};\n\n\
                 var team_shooting_accuracy_in_round = function({{team, round}}) {{\n  \
                 return {agg}(map(function(athlete) {{\n    return shooting_accuracy_in_round({{athlete, round}});\n  }}, team));\n}};\n\n\
                 var team_score = function({{team, round}}) {{\n  \
                 return team_skiing_speed_in_round({{team, round}}) + team_shooting_accuracy_in_round({{team, round}});\n}};\n\n",
                a = num(p.accuracy_intercept),
                b = num(p.accuracy_slope),
                s = num(p.accuracy_sd),
            ));
        }
        _ => {
            let [pl, _, ph] = p.effort_probabilities;
            let [ml, mm, mh] = p.effort_multipliers;
            let [rl, rm, rh] = p.effort_report_means;
            let [sl, sm, sh] = p.effort_report_sds;
            let t = num(p.effort_tilt);
            let (athlete_score, team_word) = match sport {
                Sport::TugOfWar => ("pulling_strength_in_match", "team_pulling_strength_in_match"),
                _ => ("paddling_speed_in_race", "team_paddling_speed_in_race"),
            };
            out.push_str(&format!(
                "var effort_category_in_{key} = mem(function({{athlete, {key}}}) {{\n  \
                 var z = (intrinsic_strength({{athlete}}) - {mu}) / {sd};\n  \
                 var p_low = max(0, {pl} - {t} * z);\n  \
                 var p_high = max(0, {ph} + {t} * z);\n  \
                 return categorical({{ps: [p_low, max(0, 1 - p_low - p_high), p_high], vs: ['low', 'moderate', 'high']}});\n}});\n\n\
                 var effort_multiplier_in_{key} = function({{athlete, {key}}}) {{\n  \
                 var c = effort_category_in_{key}({{athlete, {key}}});\n  \
                 return c == 'low' ? {ml} : c == 'moderate' ? {mm} : {mh};\n}};\n\n\
                 // The reported percentage is a noisy reading of the category.\n\
                 var effort_level_in_{key} = mem(function({{athlete, {key}}}) {{\n  \
                 var c = effort_category_in_{key}({{athlete, {key}}});\n  \
                 var center = c == 'low' ? {rl} : c == 'moderate' ? {rm} : {rh};\n  \
                 var spread = c == 'low' ? {sl} : c == 'moderate' ? {sm} : {sh};\n  \
                 return clamp(gaussian(center, spread), 0, 100);\n}});\n\n\
                 var {athlete_score} = function({{athlete, {key}}}) {{\n  \
                 return intrinsic_strength({{athlete}}) * effort_multiplier_in_{key}({{athlete, {key}}});\n}};\n\n\
                 var {team_word} = function({{team, {key}}}) {{\n  \
                 return {agg}(map(function(athlete) {{\n    return {athlete_score}({{athlete, {key}}});\n  }}, team));\n}};\n\n\
                 var team_score = function({{team, {key}}}) {{\n  return {team_word}({{team, {key}}});\n}};\n\n",
                pl = num(pl),
                ph = num(ph),
                ml = num(ml),
                mm = num(mm),
                mh = num(mh),
                rl = num(rl),
                rm = num(rm),
                rh = num(rh),
                sl = num(sl),
                sm = num(sm),
                sh = num(sh),
            ));
        }
    }

    out.push_str(&format!(
        "var beat = function({{team1, team2, {key}}}) {{\n  \
         return team_score({{team: team1, {key}}}) > team_score({{team: team2, {key}}});\n}};\n\n\
         var lost = function({{team1, team2, {key}}}) {{\n  return !beat({{team1, team2, {key}}});\n}};\n\n\
         // 50 is a tie; one prior sd of score difference moves the slider by {pts} points.\n\
         var who_would_win_by_how_much = function({{team1, team2, {key}}}) {{\n  \
         var margin = team_score({{team: team1, {key}}}) - team_score({{team: team2, {key}}});\n  \
         var gain = {by_size};\n  \
         return clamp(50 + gain * margin, 0, 100);\n}};\n",
        pts = num(p.prediction_points_per_sd),
    ));
    out
}

/// The gold definitions for a vignette's sport, without conditions or
/// queries.
pub fn gold_definitions(v: &Vignette, params: &GoldParams) -> Result<String, OlympicsError> {
    if v.background_kind == BackgroundKind::UnderspecifiedWithCommentary || v.commentary.is_some() {
        return Err(OlympicsError::NoGoldModel(v.id.clone()));
    }
    let m = motif_of(v)?;
    let mut sizes: Vec<(usize, usize)> = m
        .focus
        .predictions
        .iter()
        .map(|p| (p.team1.len(), p.team2.len()))
        .collect();
    sizes.sort_unstable();
    sizes.dedup();
    let gains: Vec<_> = sizes
        .into_iter()
        .map(|(a, b)| ((a, b), prediction_gain(v.sport, a, b, params)))
        .collect();
    Ok(definitions(v.sport, params, &gains))
}

/// The gold program for a vignette: sport definitions, one condition per
/// observation and a record answering all question labels.
pub fn gold_model(v: &Vignette, params: &GoldParams) -> Result<SourceProgram, OlympicsError> {
    let defs = gold_definitions(v, params)?;
    let parse = gold_parse(v)?;
    Ok(SourceProgram::new(
        assemble_model(&defs, &parse.conditions, &parse.queries),
        Origin::Gold,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let p = GoldParams::default();
        p.validate().unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(GoldParams::from_json(&text).unwrap(), p);
        assert_eq!(GoldParams::from_json("{}").unwrap(), p);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(GoldParams::from_json(r#"{"strength_sd": 0}"#).is_err());
        assert!(GoldParams::from_json(r#"{"effort_probabilities": [0.5, 0.5, 0.5]}"#).is_err());
        assert!(GoldParams::from_json(r#"{"strength_lower": 100, "strength_upper": 0}"#).is_err());
        assert!(GoldParams::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn tilt_keeps_probabilities_valid() {
        let p = GoldParams::default();
        for z in [-4.0, -1.0, 0.0, 1.0, 4.0] {
            let probs = p.effort_probs(z);
            assert!(probs.iter().all(|x| *x >= 0.0));
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let up = p.effort_probs(1.0);
        assert!((up[2] - 0.25).abs() < 1e-12 && (up[0] - 0.0).abs() < 1e-12);
    }

    #[test]
    fn gain_reflects_aggregation() {
        let p = GoldParams::default();
        let tug = score_difference_sd(Sport::TugOfWar, 2, 2, &p);
        let canoe = score_difference_sd(Sport::CanoeRacing, 2, 2, &p);
        // sums of two pulls spread twice as far as their means
        assert!((tug / canoe - 2.0).abs() < 0.05, "{tug} {canoe}");
        assert!(prediction_gain(Sport::Biathlon, 2, 2, &p) > 0.0);
    }
}
