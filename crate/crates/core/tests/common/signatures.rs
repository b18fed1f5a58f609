//! Directional checks on gold posteriors, shared by the integration tests
//! and the example that regenerates the regression fixture.

#![allow(dead_code)]

use std::collections::BTreeMap;

use msa_core::infer::{load, run_rejection, PosteriorEstimate, RejectionConfig};
use msa_core::lang::assemble_model;
use msa_core::olympics::*;

pub const SIGNATURE_MOTIFS: &[&str] = &[
    "round_robin_loser",
    "confounded_winners",
    "fluke_loss_after_wins",
    "fluke_loss_of_pair",
    "upset_of_favorite",
    "early_fluke_loss",
];

/// `rank_X` for every playing role and `t_X_i` for every participation.
pub fn probe_queries(v: &Vignette, m: &Motif) -> Vec<(String, String)> {
    let key = v.sport.event_noun();
    let mut out = Vec::new();
    for r in m.playing_roles() {
        let id = v.ident(r).unwrap();
        out.push((format!("rank_{r}"), format!("intrinsic_strength_rank({{athlete: '{id}', out_of_n_athletes: 100}})")));
    }
    for (i, g) in m.matches.iter().enumerate() {
        for &r in g.team1.iter().chain(&g.team2) {
            let id = v.ident(r).unwrap();
            out.push((
                format!("t_{r}_{}", i + 1),
                format!("{}({{athlete: '{id}', {key}: {}}})", v.sport.temporal_function(), i + 1),
            ));
        }
    }
    out
}

pub fn run_probes(sport: Sport, motif_id: &str, n: usize, seed: u64) -> PosteriorEstimate {
    let v = generate_vignette(sport, motif_id, BackgroundKind::Detailed, 11).unwrap();
    let m = find_motif(motif_id).unwrap();
    let defs = gold_definitions(&v, &GoldParams::default()).unwrap();
    let parse = gold_parse(&v).unwrap();
    let src = assemble_model(&defs, &parse.conditions, &probe_queries(&v, &m));
    let program = load(&src).unwrap();
    run_rejection(&program, &RejectionConfig::new(n, seed)).unwrap()
}

/// One directional claim: `lhs < rhs` where each side is a mean of labels.
#[derive(Debug, Clone)]
pub struct Claim {
    pub description: String,
    pub lhs: Vec<String>,
    pub rhs: Vec<String>,
    /// Compare against this constant instead of labels when set.
    pub rhs_const: Option<f64>,
}

pub fn claims(motif_id: &str) -> Vec<Claim> {
    let m = find_motif(motif_id).unwrap();
    let rank = |r: char| vec![format!("rank_{r}")];
    let less = |d: String, lhs: Vec<String>, rhs: Vec<String>| Claim {
        description: d,
        lhs,
        rhs,
        rhs_const: None,
    };
    match m.tag {
        MotifTag::RoundRobin => {
            let mut out = vec![Claim {
                description: "A ranks below 50".into(),
                lhs: rank('A'),
                rhs: vec![],
                rhs_const: Some(50.0),
            }];
            for r in ['B', 'C', 'D'] {
                out.push(less(format!("A ranks below {r}"), rank('A'), rank(r)));
            }
            out
        }
        MotifTag::ConfoundedTeammates => {
            let pair: Vec<String> = ['A', 'B'].iter().map(|r| format!("rank_{r}")).collect();
            let opponents: Vec<String> = ['C', 'D', 'E', 'F'].iter().map(|r| format!("rank_{r}")).collect();
            vec![less("losing opponents rank below the winning pair".into(), opponents, pair)]
        }
        MotifTag::ExplainingAway => {
            let a = m.anomaly.unwrap();
            let others: Vec<String> = m
                .matches
                .iter()
                .enumerate()
                .filter(|(i, g)| i + 1 != a.match_index && g.involves(a.role))
                .map(|(i, _)| format!("t_{}_{}", a.role, i + 1))
                .collect();
            vec![less(
                format!("{} lower in the anomalous contest {}", a.role, a.match_index),
                vec![format!("t_{}_{}", a.role, a.match_index)],
                others,
            )]
        }
        _ => vec![],
    }
}

pub fn side_mean(means: &BTreeMap<String, f64>, labels: &[String]) -> f64 {
    labels.iter().map(|l| means[l]).sum::<f64>() / labels.len() as f64
}

pub fn holds(c: &Claim, means: &BTreeMap<String, f64>) -> (bool, f64, f64) {
    let l = side_mean(means, &c.lhs);
    let r = c.rhs_const.unwrap_or_else(|| side_mean(means, &c.rhs));
    (l < r, l, r)
}

pub fn means(est: &PosteriorEstimate) -> BTreeMap<String, f64> {
    est.labels().map(|l| (l.to_string(), est.mean(l).unwrap())).collect()
}

pub fn standard_errors(est: &PosteriorEstimate) -> BTreeMap<String, f64> {
    est.queries
        .iter()
        .map(|(l, xs)| {
            let n = xs.len() as f64;
            let m = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
            (l.clone(), (var / n).sqrt())
        })
        .collect()
}
