//! Prompt text shipped with the crate: stage frames and worked examples.

/// A worked example in the sectioned prompt format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExampleFixture {
    pub id: &'static str,
    /// Sport name (as in `Sport::as_str`) or another domain such as `diving`.
    pub domain: &'static str,
    pub text: &'static str,
}

macro_rules! example {
    ($id:literal, $domain:literal) => {
        ExampleFixture {
            id: $id,
            domain: $domain,
            text: include_str!(concat!("../../prompts/examples/", $id, ".txt")),
        }
    };
}

pub const EXAMPLES: &[ExampleFixture] = &[
    example!("tug_of_war", "tug_of_war"),
    example!("canoe_racing", "canoe_racing"),
    example!("biathlon", "biathlon"),
    example!("diving", "diving"),
    example!("exam", "exam"),
    example!("tug_of_war_commentary", "tug_of_war"),
    example!("canoe_racing_commentary", "canoe_racing"),
    example!("biathlon_commentary", "biathlon"),
    example!("diving_commentary", "diving"),
];

pub fn example(id: &str) -> Option<&'static ExampleFixture> {
    EXAMPLES.iter().find(|e| e.id == id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    System,
    Parse,
    Background,
    Model,
    ScoreParse,
    ScoreBackground,
    BaselineDirect,
    BaselineCot,
}

pub fn frame(f: Frame) -> &'static str {
    match f {
        Frame::System => include_str!("../../prompts/frames/system.txt"),
        Frame::Parse => include_str!("../../prompts/frames/parse.txt"),
        Frame::Background => include_str!("../../prompts/frames/background.txt"),
        Frame::Model => include_str!("../../prompts/frames/model.txt"),
        Frame::ScoreParse => include_str!("../../prompts/frames/score_parse.txt"),
        Frame::ScoreBackground => include_str!("../../prompts/frames/score_background.txt"),
        Frame::BaselineDirect => include_str!("../../prompts/frames/baseline_direct.txt"),
        Frame::BaselineCot => include_str!("../../prompts/frames/baseline_cot.txt"),
    }
}

pub const EXAMPLES_TOKEN: &str = "<SHUFFLED EXAMPLES>";
