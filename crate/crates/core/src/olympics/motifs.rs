//! Tournament motifs: team rosters over abstract roles, outcomes, and which
//! athletes and matches the question palette asks about.

use serde::{Deserialize, Serialize};

/// An athlete slot in a motif, `'A'..='F'`.
pub type Role = char;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Team1,
    Team2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchSpec {
    pub team1: Vec<Role>,
    pub team2: Vec<Role>,
    pub winner: Winner,
}

impl MatchSpec {
    pub fn involves(&self, role: Role) -> bool {
        self.team1.contains(&role) || self.team2.contains(&role)
    }

    /// Whether `role` was on the losing team.
    pub fn lost(&self, role: Role) -> bool {
        match self.winner {
            Winner::Team1 => self.team2.contains(&role),
            Winner::Team2 => self.team1.contains(&role),
        }
    }
}

/// A hypothetical new match the prediction questions ask about.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionSpec {
    pub team1: Vec<Role>,
    pub team2: Vec<Role>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Focus {
    pub constant_roles: Vec<Role>,
    /// (role, 1-based match index)
    pub temporal_probes: Vec<(Role, usize)>,
    pub predictions: Vec<PredictionSpec>,
}

/// The athlete whose result in one match runs against the rest of the
/// evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anomaly {
    pub role: Role,
    pub match_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotifTag {
    RoundRobin,
    ConfoundedTeammates,
    StrongIndirectEvidence,
    WeakIndirectEvidence,
    DiverseEvidence,
    SingleMatch,
    ExplainingAway,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Motif {
    pub id: String,
    pub tag: MotifTag,
    pub roles: Vec<Role>,
    pub matches: Vec<MatchSpec>,
    pub focus: Focus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomaly: Option<Anomaly>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("motif `{motif}`: {problem}")]
pub struct MotifError {
    pub motif: String,
    pub problem: String,
}

impl Motif {
    /// Check the structural invariants of the focus fields.
    pub fn validate(&self) -> Result<(), MotifError> {
        let err = |problem: String| {
            Err(MotifError {
                motif: self.id.clone(),
                problem,
            })
        };
        if self.focus.constant_roles.len() != 3 {
            return err("needs exactly 3 constant roles".into());
        }
        if self.focus.temporal_probes.len() != 3 {
            return err("needs exactly 3 temporal probes".into());
        }
        if self.focus.predictions.len() != 2 {
            return err("needs exactly 2 predictions".into());
        }
        if self.matches.is_empty() {
            return err("has no matches".into());
        }
        for (i, m) in self.matches.iter().enumerate() {
            if m.team1.is_empty() || m.team2.is_empty() || m.team1.iter().any(|r| m.team2.contains(r)) {
                return err(format!("match {} has an empty or overlapping team", i + 1));
            }
        }
        let known = |r: &Role| self.roles.contains(r);
        let all_roles = self
            .matches
            .iter()
            .flat_map(|m| m.team1.iter().chain(&m.team2))
            .chain(self.focus.constant_roles.iter())
            .chain(self.focus.predictions.iter().flat_map(|p| p.team1.iter().chain(&p.team2)));
        for r in all_roles {
            if !known(r) {
                return err(format!("role {r} is not declared"));
            }
        }
        for &(role, idx) in &self.focus.temporal_probes {
            match self.matches.get(idx.wrapping_sub(1)) {
                Some(m) if m.involves(role) => {}
                _ => return err(format!("probe ({role}, {idx}) is not a participation")),
            }
        }
        for p in &self.focus.predictions {
            if p.team1.iter().any(|r| p.team2.contains(r)) {
                return err("prediction teams overlap".into());
            }
        }
        if let Some(a) = self.anomaly {
            match self.matches.get(a.match_index.wrapping_sub(1)) {
                Some(m) if m.lost(a.role) => {}
                _ => return err("the anomalous athlete must lose the anomalous match".into()),
            }
            if !self.focus.temporal_probes.contains(&(a.role, a.match_index)) {
                return err("the anomalous match must be probed".into());
            }
        }
        Ok(())
    }

    /// Roles that appear in matches.
    pub fn playing_roles(&self) -> Vec<Role> {
        let mut out: Vec<Role> = Vec::new();
        for m in &self.matches {
            for &r in m.team1.iter().chain(&m.team2) {
                if !out.contains(&r) {
                    out.push(r);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Parse a match written `AB>CD` (team 1 won) or `AB<CD` (team 1 lost).
fn game(s: &str) -> MatchSpec {
    let (sep, winner) = if s.contains('>') {
        ('>', Winner::Team1)
    } else {
        ('<', Winner::Team2)
    };
    let (a, b) = s.split_once(sep).expect("match notation");
    MatchSpec {
        team1: a.chars().collect(),
        team2: b.chars().collect(),
        winner,
    }
}

fn pred(s: &str) -> PredictionSpec {
    let (a, b) = s.split_once('v').expect("prediction notation");
    PredictionSpec {
        team1: a.chars().collect(),
        team2: b.chars().collect(),
    }
}

fn motif(
    id: &str,
    tag: MotifTag,
    games: &[&str],
    constant: &str,
    probes: &[(Role, usize)],
    preds: [&str; 2],
    anomaly: Option<(Role, usize)>,
) -> Motif {
    Motif {
        id: id.to_string(),
        tag,
        roles: "ABCDEF".chars().collect(),
        matches: games.iter().map(|g| game(g)).collect(),
        focus: Focus {
            constant_roles: constant.chars().collect(),
            temporal_probes: probes.to_vec(),
            predictions: preds.iter().map(|p| pred(p)).collect(),
        },
        anomaly: anomaly.map(|(role, match_index)| Anomaly { role, match_index }),
    }
}

/// The shipped motif set, in a fixed order.
pub fn list_motifs() -> Vec<Motif> {
    use MotifTag::*;
    vec![
        motif(
            "round_robin_loser",
            RoundRobin,
            &["AB<CD", "AC<BD", "AD<BC"],
            "ABC",
            &[('A', 2), ('B', 2), ('C', 2)],
            ["ABvCE", "ACvBE"],
            None,
        ),
        motif(
            "round_robin_winner",
            RoundRobin,
            &["AB>CD", "AC>BD", "AD>BC"],
            "ABC",
            &[('A', 2), ('B', 2), ('C', 2)],
            ["ABvCE", "ACvBE"],
            None,
        ),
        motif(
            "confounded_winners",
            ConfoundedTeammates,
            &["AB>CD", "AB>EF", "AB>CE"],
            "ABC",
            &[('A', 1), ('B', 2), ('C', 3)],
            ["ACvBD", "ABvCE"],
            None,
        ),
        motif(
            "confounded_losers",
            ConfoundedTeammates,
            &["AB<CD", "AB<EF", "AB<CE"],
            "ABC",
            &[('A', 1), ('B', 2), ('C', 3)],
            ["ACvBD", "ABvCE"],
            None,
        ),
        motif(
            "strong_indirect_winner",
            StrongIndirectEvidence,
            &["AB>CD", "BC<DE", "BE<CF"],
            "ABD",
            &[('A', 1), ('B', 2), ('D', 2)],
            ["ADvBE", "ACvBF"],
            None,
        ),
        motif(
            "strong_indirect_loser",
            StrongIndirectEvidence,
            &["AB<CD", "BC>DE", "BE>CF"],
            "ABD",
            &[('A', 1), ('B', 2), ('D', 2)],
            ["ADvBE", "ACvBF"],
            None,
        ),
        motif(
            "weak_indirect_winner",
            WeakIndirectEvidence,
            &["AB>CD", "BC>DE", "BE>CF"],
            "ABC",
            &[('A', 1), ('B', 2), ('C', 2)],
            ["ACvBD", "ADvBE"],
            None,
        ),
        motif(
            "weak_indirect_loser",
            WeakIndirectEvidence,
            &["AB<CD", "BC<DE", "BE<CF"],
            "ABC",
            &[('A', 1), ('B', 2), ('C', 2)],
            ["ACvBD", "ADvBE"],
            None,
        ),
        motif(
            "diverse_winner",
            DiverseEvidence,
            &["AB>CD", "AC>EF", "AD>BE"],
            "ABC",
            &[('A', 3), ('B', 3), ('C', 2)],
            ["ABvCD", "AEvBF"],
            None,
        ),
        motif(
            "diverse_loser",
            DiverseEvidence,
            &["AB<CD", "AC<EF", "AD<BE"],
            "ABC",
            &[('A', 3), ('B', 3), ('C', 2)],
            ["ABvCD", "AEvBF"],
            None,
        ),
        motif(
            "single_match_winner",
            SingleMatch,
            &["AB>CD"],
            "ABC",
            &[('A', 1), ('B', 1), ('C', 1)],
            ["ACvBD", "ABvCE"],
            None,
        ),
        motif(
            "single_match_loser",
            SingleMatch,
            &["AB<CD"],
            "ABC",
            &[('A', 1), ('B', 1), ('C', 1)],
            ["ACvBD", "ABvCE"],
            None,
        ),
        motif(
            "fluke_loss_after_wins",
            ExplainingAway,
            &["AB>CD", "AC>DE", "AE>BF", "AF<BC"],
            "ABC",
            &[('A', 4), ('A', 1), ('B', 4)],
            ["ABvCD", "AFvBE"],
            Some(('A', 4)),
        ),
        motif(
            "fluke_loss_of_pair",
            ExplainingAway,
            &["AB>CD", "AB>EF", "AB<CE"],
            "ABC",
            &[('A', 3), ('A', 1), ('B', 3)],
            ["ABvCE", "ACvBE"],
            Some(('A', 3)),
        ),
        motif(
            "upset_of_favorite",
            ExplainingAway,
            &["BC>AD", "BE>AF", "AF>BD"],
            "ABC",
            &[('B', 3), ('B', 1), ('A', 3)],
            ["ABvCD", "BCvAF"],
            Some(('B', 3)),
        ),
        motif(
            "early_fluke_loss",
            ExplainingAway,
            &["AB<CD", "AC>BD", "AD>BC"],
            "ABC",
            &[('A', 1), ('A', 2), ('B', 1)],
            ["ABvCD", "ACvBE"],
            Some(('A', 1)),
        ),
    ]
}

pub fn find_motif(id: &str) -> Option<Motif> {
    list_motifs().into_iter().find(|m| m.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_valid_motifs_with_unique_ids() {
        let motifs = list_motifs();
        assert_eq!(motifs.len(), 16);
        for m in &motifs {
            m.validate().unwrap();
        }
        let mut ids: Vec<_> = motifs.iter().map(|m| m.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 16);
        let anomalous = motifs.iter().filter(|m| m.tag == MotifTag::ExplainingAway).count();
        assert!(anomalous >= 4);
        assert!(motifs.iter().all(|m| (m.tag == MotifTag::ExplainingAway) == m.anomaly.is_some()));
    }

    #[test]
    fn confounded_pairs_always_share_a_team() {
        for m in list_motifs().iter().filter(|m| m.tag == MotifTag::ConfoundedTeammates) {
            for g in &m.matches {
                let together = |t: &Vec<Role>| t.contains(&'A') && t.contains(&'B');
                assert!(together(&g.team1) || together(&g.team2), "{}", m.id);
            }
        }
    }

    #[test]
    fn notation() {
        let g = game("AB<CD");
        assert_eq!(g.team1, ['A', 'B']);
        assert_eq!(g.winner, Winner::Team2);
        assert!(g.lost('A') && !g.lost('C'));
    }

    #[test]
    fn validation_catches_bad_probes() {
        let mut m = find_motif("round_robin_loser").unwrap();
        m.focus.temporal_probes[0] = ('E', 1);
        assert!(m.validate().is_err());
    }
}
