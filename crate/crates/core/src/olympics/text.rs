//! Sport-specific wording: backgrounds, observation sentences and the
//! question palette.

use super::{BackgroundKind, Sport};

pub const NAME_POOL: &[&str] = &[
    "Alex", "Ash", "Blair", "Cameron", "Casey", "Dakota", "Drew", "Emerson", "Finley", "Harper", "Hayden", "Jamie",
    "Jordan", "Jules", "Kendall", "Lane", "Logan", "Morgan", "Parker", "Quinn", "Reese", "Remy", "Riley", "Robin",
    "Rowan", "Sage", "Skyler", "Taylor",
];

pub fn ordinal(n: usize) -> String {
    const WORDS: [&str; 10] = [
        "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
    ];
    match WORDS.get(n.wrapping_sub(1)) {
        Some(w) => (*w).to_string(),
        None => format!("{n}th"),
    }
}

/// "Ash", "Ash and Blair", "Ash, Blair and Casey".
pub fn join_names(names: &[&str]) -> String {
    match names {
        [] => String::new(),
        [one] => (*one).to_string(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

pub fn background(sport: Sport, kind: BackgroundKind) -> String {
    let detailed = kind == BackgroundKind::Detailed;
    let text = match (sport, detailed) {
        (Sport::TugOfWar, true) => {
            "This is a tug-of-war tournament. Teams face off in a series of matches, and in each match \
             the side that pulls harder wins. Every athlete has an intrinsic strength that does not change \
             over the day. Most athletes sit near the middle of the strength range, with a handful who are \
             far weaker or far stronger than the rest.\n\n\
             How hard an athlete pulls in a given match also depends on effort. In most matches an athlete \
             pulls with a moderately high effort. Now and then someone coasts and puts in little effort, and \
             now and then someone goes all out. Strong athletes go all out a little more often than weak ones, \
             and weak athletes coast a little more often than strong ones.\n\n\
             A team's pull in a match is the combined total of every member's pull in that match, and the \
             team with the larger total wins."
        }
        (Sport::CanoeRacing, true) => {
            "This is a canoe racing tournament. Teams paddle against each other in a series of races, and in \
             each race the faster boat wins. Every athlete has an intrinsic strength that does not change over \
             the day. Most athletes are of middling strength, while a few are much weaker or much stronger.\n\n\
             How fast an athlete paddles in a given race also depends on effort. Usually athletes paddle with a \
             moderately high effort. Occasionally someone eases off and puts in little effort, and occasionally \
             someone gives everything they have. Stronger athletes give everything a little more often, and \
             weaker athletes ease off a little more often.\n\n\
             A boat's speed in a race is the average paddling speed of the people in it, and the faster boat \
             wins the race."
        }
        (Sport::Biathlon, true) => {
            "This is a biathlon tournament, where teams ski cross-country and stop to shoot at targets. Teams \
             meet in a series of rounds. Every athlete has an intrinsic strength that does not change over the \
             day, and stronger athletes ski faster. Most athletes are of middling strength, with a few who are \
             much weaker or much stronger.\n\n\
             Shooting accuracy varies from round to round and is measured as a percentage. Stronger athletes \
             tend to shoot a bit more accurately, but any athlete can have a good or bad round at the range.\n\n\
             In each round a team's score adds its members' average skiing speed to their average shooting \
             accuracy, counting the two parts equally. The team with the higher score wins the round."
        }
        (Sport::TugOfWar, false) => {
            "This is a tug-of-war tournament. Teams of athletes face off in a series of matches. In each \
             match the two teams pull on opposite ends of a rope and one team wins."
        }
        (Sport::CanoeRacing, false) => {
            "This is a canoe racing tournament. Teams of athletes paddle against each other in a series of \
             races, and one boat wins each race."
        }
        (Sport::Biathlon, false) => {
            "This is a biathlon tournament, where teams ski cross-country and shoot at targets. Teams compete \
             in a series of rounds, and one team wins each round."
        }
    };
    text.to_string()
}

pub fn observation(sport: Sport, index: usize, team1: &[&str], team2: &[&str], team1_won: bool) -> String {
    let verb = if team1_won { "beat" } else { "lost to" };
    format!(
        "In the {} {}, {} {verb} {}.",
        ordinal(index),
        sport.event_noun(),
        join_names(team1),
        join_names(team2)
    )
}

/// The question texts differ slightly for the pilot-style `strength`
/// wording used with commentary vignettes.
pub fn constant_question(name: &str, kind: BackgroundKind) -> String {
    match kind {
        BackgroundKind::UnderspecifiedWithCommentary => {
            format!("On a scale from 0 to 100, how strong do you think {name} is compared with 100 random athletes?")
        }
        _ => format!("Out of 100 random athletes, where do you think {name} ranks in terms of intrinsic strength?"),
    }
}

pub fn temporal_question(sport: Sport, name: &str, index: usize) -> String {
    let nth = ordinal(index);
    match sport {
        Sport::Biathlon => format!(
            "On a percentage scale from 0 to 100%, how accurate do you think {name} was at shooting in the {nth} round?"
        ),
        _ => format!(
            "On a percentage scale from 0 to 100%, how much effort do you think {name} put into the {nth} {}?",
            sport.event_noun()
        ),
    }
}

pub fn prediction_question(sport: Sport, team1: &[&str], team2: &[&str]) -> String {
    format!(
        "In a new {} later this same day between {} (Team 1) and {} (Team 2), who would win and by how much?",
        sport.event_noun(),
        join_names(team1),
        join_names(team2)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_is_unique_and_large() {
        let mut names = NAME_POOL.to_vec();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), NAME_POOL.len());
        assert!(names.len() >= 12);
    }

    #[test]
    fn joins() {
        assert_eq!(join_names(&["A"]), "A");
        assert_eq!(join_names(&["A", "B"]), "A and B");
        assert_eq!(join_names(&["A", "B", "C"]), "A, B and C");
        assert_eq!(ordinal(2), "second");
        assert_eq!(ordinal(12), "12th");
    }
}
