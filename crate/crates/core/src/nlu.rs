//! Rule-based intent recognition.
//!
//! Each intent owns a list of token templates. A `{name}` token captures a
//! non-empty run of words; every other token must match literally. Intents
//! are tried in catalogue order and patterns in definition order; the first
//! template that covers the whole normalized utterance wins.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentDef {
    pub name: String,
    pub patterns: Vec<String>,
    pub slots: Vec<String>,
    pub example: String,
}

impl IntentDef {
    pub fn new(name: &str, patterns: &[&str], slots: &[&str], example: &str) -> Self {
        IntentDef {
            name: name.to_string(),
            patterns: patterns.iter().map(|s| s.to_string()).collect(),
            slots: slots.iter().map(|s| s.to_string()).collect(),
            example: example.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ParseResult {
    Recognized { intent: String, slots: BTreeMap<String, String> },
    Unrecognized { text: String },
}

impl ParseResult {
    pub fn intent(&self) -> Option<&str> {
        match self {
            ParseResult::Recognized { intent, .. } => Some(intent),
            ParseResult::Unrecognized { .. } => None,
        }
    }

    pub fn slot(&self, name: &str) -> Option<&str> {
        match self {
            ParseResult::Recognized { slots, .. } => slots.get(name).map(String::as_str),
            ParseResult::Unrecognized { .. } => None,
        }
    }
}

/// Lowercases, trims, collapses inner whitespace and drops any trailing run
/// of `.?!`, including one broken up by spaces.
pub fn normalize(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    collapsed
        .trim_end_matches(|c: char| matches!(c, '.' | '?' | '!') || c.is_whitespace())
        .to_string()
}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Word(&'a str),
    Slot(&'a str),
}

fn tokenize(pattern: &str) -> Vec<Token<'_>> {
    pattern
        .split_whitespace()
        .map(|t| match t.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
            Some(name) => Token::Slot(name),
            None => Token::Word(t),
        })
        .collect()
}

/// Slot names referenced by a pattern, in order of appearance.
pub fn pattern_slots(pattern: &str) -> Vec<&str> {
    tokenize(pattern)
        .into_iter()
        .filter_map(|t| match t {
            Token::Slot(s) => Some(s),
            Token::Word(_) => None,
        })
        .collect()
}

/// Backtracking match. Slots try the longest run first so that a capture is
/// maximal given the literals that follow it.
fn match_tokens<'p>(
    pattern: &[Token<'p>],
    words: &[&str],
    captures: &mut Vec<(&'p str, usize, usize)>,
    offset: usize,
) -> bool {
    match pattern.split_first() {
        None => words.is_empty(),
        Some((Token::Word(w), rest)) => {
            !words.is_empty() && words[0] == w.to_lowercase() && match_tokens(rest, &words[1..], captures, offset + 1)
        }
        Some((Token::Slot(name), rest)) => {
            for len in (1..=words.len()).rev() {
                captures.push((name, offset, offset + len));
                if match_tokens(rest, &words[len..], captures, offset + len) {
                    return true;
                }
                captures.pop();
            }
            false
        }
    }
}

pub fn parse_utterance(text: &str, catalogue: &[IntentDef]) -> ParseResult {
    let normalized = normalize(text);
    let words: Vec<&str> = normalized.split(' ').filter(|w| !w.is_empty()).collect();
    for intent in catalogue {
        for pattern in &intent.patterns {
            let tokens = tokenize(pattern);
            let mut captures = Vec::new();
            if match_tokens(&tokens, &words, &mut captures, 0) {
                let slots = captures
                    .into_iter()
                    .map(|(name, from, to)| (name.to_string(), words[from..to].join(" ")))
                    .collect();
                return ParseResult::Recognized { intent: intent.name.clone(), slots };
            }
        }
    }
    ParseResult::Unrecognized { text: normalized }
}

/// Commands needed for the region-teaching goal plus a few decoys the robot
/// understands but that do not help.
pub fn default_catalogue() -> Vec<IntentDef> {
    vec![
        IntentDef::new(
            "teach_region",
            &["learn the region {region_label}", "this is the {region_label}", "teach you the {region_label}"],
            &["region_label"],
            "learn the region kitchen",
        ),
        IntentDef::new("arrived", &["we arrived", "we are here", "here we are"], &[], "we arrived"),
        IntentDef::new("greet", &["hello", "hi robot"], &[], "hello"),
        IntentDef::new("stop", &["stop", "stop following me"], &[], "stop"),
        IntentDef::new("whoami", &["what can you do"], &[], "what can you do"),
    ]
}
