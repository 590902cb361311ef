//! Extraction of structured answers from free-form model text.
//!
//! Every parser first looks for the bracketed answer the prompts ask for
//! (strict), then for weaker cues (fallback). When several candidates
//! appear, the last one wins. Parsers never fail; an unreadable answer is a
//! `Failed` status with no payload.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::instance::Task;
use crate::scene::{Color, ObjectKind, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    Strict,
    Fallback,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerValue {
    Bool(bool),
    Count(u64),
    Objects(Vec<ObjectKind>),
    Choice(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedAnswer {
    pub status: ParseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<AnswerValue>,
    /// Words that followed a color but are not known shapes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unknown_tokens: Vec<String>,
}

impl ParsedAnswer {
    pub fn strict(value: AnswerValue) -> Self {
        Self {
            status: ParseStatus::Strict,
            value: Some(value),
            unknown_tokens: Vec::new(),
        }
    }

    pub fn fallback(value: AnswerValue) -> Self {
        Self {
            status: ParseStatus::Fallback,
            value: Some(value),
            unknown_tokens: Vec::new(),
        }
    }

    pub fn failed() -> Self {
        Self {
            status: ParseStatus::Failed,
            value: None,
            unknown_tokens: Vec::new(),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.status == ParseStatus::Failed
    }

    fn with_unknown(mut self, unknown: Vec<String>) -> Self {
        self.unknown_tokens = unknown;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParseOptions {
    pub allow_fallback: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { allow_fallback: true }
    }
}

impl ParseOptions {
    pub const STRICT_ONLY: ParseOptions = ParseOptions { allow_fallback: false };
}

fn re(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("valid regex"))
}

pub fn parse_bool(text: &str) -> ParsedAnswer {
    parse_bool_with(text, ParseOptions::default())
}

pub fn parse_bool_with(text: &str, opts: ParseOptions) -> ParsedAnswer {
    static STRICT: OnceLock<Regex> = OnceLock::new();
    static LOOSE: OnceLock<Regex> = OnceLock::new();
    if let Some(c) = re(&STRICT, r"(?i)\[\s*(true|false)\s*\]").captures_iter(text).last() {
        return ParsedAnswer::strict(AnswerValue::Bool(c[1].eq_ignore_ascii_case("true")));
    }
    if opts.allow_fallback {
        if let Some(c) = re(&LOOSE, r"(?i)\b(true|false|yes|no)\b").captures_iter(text).last() {
            let word = c[1].to_ascii_lowercase();
            return ParsedAnswer::fallback(AnswerValue::Bool(word == "true" || word == "yes"));
        }
    }
    ParsedAnswer::failed()
}

pub fn parse_count(text: &str) -> ParsedAnswer {
    parse_count_with(text, ParseOptions::default())
}

pub fn parse_count_with(text: &str, opts: ParseOptions) -> ParsedAnswer {
    static STRICT: OnceLock<Regex> = OnceLock::new();
    static INT: OnceLock<Regex> = OnceLock::new();
    if let Some(n) = re(&STRICT, r"\[\s*(\d+)\s*\]")
        .captures_iter(text)
        .filter_map(|c| c[1].parse::<u64>().ok())
        .last()
    {
        return ParsedAnswer::strict(AnswerValue::Count(n));
    }
    if opts.allow_fallback {
        if let Some(line) = text.lines().rev().find(|l| !l.trim().is_empty()) {
            if let Some(n) = re(&INT, r"\d+")
                .find_iter(line)
                .filter_map(|m| m.as_str().parse::<u64>().ok())
                .last()
            {
                return ParsedAnswer::fallback(AnswerValue::Count(n));
            }
        }
    }
    ParsedAnswer::failed()
}

/// Multiple-choice answer; `options` are the option texts in letter order.
pub fn parse_choice(text: &str, options: &[String]) -> ParsedAnswer {
    parse_choice_with(text, options, ParseOptions::default())
}

pub fn parse_choice_with(text: &str, options: &[String], opts: ParseOptions) -> ParsedAnswer {
    static STRICT: OnceLock<Regex> = OnceLock::new();
    static LETTER: OnceLock<Regex> = OnceLock::new();
    let n = options.len().min(26);
    let in_range = |letter: char| -> Option<usize> {
        let idx = (letter.to_ascii_uppercase() as u8).checked_sub(b'A')? as usize;
        (idx < n).then_some(idx)
    };
    if let Some(idx) = re(&STRICT, r"\[\s*([A-Za-z])\s*\]")
        .captures_iter(text)
        .filter_map(|c| in_range(c[1].chars().next()?))
        .last()
    {
        return ParsedAnswer::strict(AnswerValue::Choice(idx));
    }
    if !opts.allow_fallback {
        return ParsedAnswer::failed();
    }
    // (position, index) of the latest cue.
    let mut best: Option<(usize, usize)> = None;
    let mut consider = |pos: usize, idx: usize| {
        if best.is_none_or(|(p, _)| pos >= p) {
            best = Some((pos, idx));
        }
    };
    for c in re(&LETTER, r"\b([A-Z])\b").captures_iter(text) {
        let m = c.get(1).expect("group");
        let letter = m.as_str().chars().next().expect("one char");
        let Some(idx) = in_range(letter) else { continue };
        // "A red circle ..." is an article, not an option.
        if letter == 'A' && is_article(&text[m.end()..]) {
            continue;
        }
        consider(m.start(), idx);
    }
    for (idx, option) in options.iter().enumerate().take(n) {
        if option.trim().is_empty() {
            continue;
        }
        let pattern = regex::escape(&option.to_lowercase()).replace(r"\-", r"[-\s]?").replace(' ', r"[-\s]+");
        if let Ok(option_re) = Regex::new(&format!(r"(?i)\b{pattern}\b")) {
            if let Some(m) = option_re.find_iter(text).last() {
                consider(m.start(), idx);
            }
        }
    }
    match best {
        Some((_, idx)) => ParsedAnswer::fallback(AnswerValue::Choice(idx)),
        None => ParsedAnswer::failed(),
    }
}

fn is_article(rest: &str) -> bool {
    let mut chars = rest.chars();
    matches!(chars.next(), Some(' ')) && chars.next().is_some_and(|c| c.is_ascii_lowercase())
}

/// Canonical vocabulary entry of the synonym table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Shape(Shape),
    Color(Color),
}

#[derive(Debug, Clone)]
pub struct Synonyms {
    version: String,
    terms: HashMap<String, Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("synonym table line {line}: {reason}")]
pub struct SynonymError {
    pub line: usize,
    pub reason: String,
}

const BUILTIN_SYNONYMS: &str = include_str!("../synonyms.tsv");

impl Synonyms {
    pub fn builtin() -> &'static Synonyms {
        static TABLE: OnceLock<Synonyms> = OnceLock::new();
        TABLE.get_or_init(|| Synonyms::parse(BUILTIN_SYNONYMS).expect("builtin synonym table"))
    }

    /// Parses a `token<TAB>canonical` table. A `# version<TAB>v` comment
    /// sets the version; other `#` lines are ignored.
    pub fn parse(text: &str) -> Result<Synonyms, SynonymError> {
        let mut version = String::from("unversioned");
        let mut terms = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version") {
                    version = v.trim().to_string();
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (token, canonical) = line.split_once('\t').ok_or_else(|| SynonymError {
                line: i + 1,
                reason: "expected token<TAB>canonical".into(),
            })?;
            let canonical = canonical.trim();
            let term = if let Ok(shape) = canonical.parse::<Shape>() {
                Term::Shape(shape)
            } else if let Ok(color) = canonical.parse::<Color>() {
                Term::Color(color)
            } else {
                return Err(SynonymError {
                    line: i + 1,
                    reason: format!("unknown canonical name `{canonical}`"),
                });
            };
            terms.insert(token.trim().to_lowercase(), term);
        }
        Ok(Synonyms { version, terms })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn lookup(&self, token: &str) -> Option<Term> {
        self.terms.get(token).copied()
    }
}

pub fn parse_object_list(text: &str) -> ParsedAnswer {
    parse_object_list_with(text, ParseOptions::default(), Synonyms::builtin())
}

pub fn parse_object_list_with(text: &str, opts: ParseOptions, synonyms: &Synonyms) -> ParsedAnswer {
    static BLOCK: OnceLock<Regex> = OnceLock::new();
    static BULLET: OnceLock<Regex> = OnceLock::new();

    // Strict: the last bracketed block that names at least one object.
    for block in re(&BLOCK, r"\[([^\[\]]*)\]")
        .captures_iter(text)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
    {
        let (objects, unknown) = extract_pairs(&block[1], synonyms);
        if !objects.is_empty() {
            return ParsedAnswer::strict(AnswerValue::Objects(objects)).with_unknown(unknown);
        }
    }

    // Strict: the last run of consecutive bulleted or numbered lines.
    let bullet = re(&BULLET, r"^\s*(?:[-*•]|\d+[.)])\s+(.*)$");
    let mut runs: Vec<Vec<String>> = Vec::new();
    let mut in_run = false;
    for line in text.lines() {
        match bullet.captures(line) {
            Some(c) => {
                if !in_run {
                    runs.push(Vec::new());
                    in_run = true;
                }
                runs.last_mut().expect("run").push(c[1].to_string());
            }
            None if line.trim().is_empty() => {}
            None => in_run = false,
        }
    }
    for run in runs.iter().rev() {
        let (objects, unknown) = extract_pairs(&run.join("\n"), synonyms);
        if !objects.is_empty() {
            return ParsedAnswer::strict(AnswerValue::Objects(objects)).with_unknown(unknown);
        }
    }

    if opts.allow_fallback {
        let (objects, unknown) = extract_pairs(text, synonyms);
        if !objects.is_empty() {
            return ParsedAnswer::fallback(AnswerValue::Objects(objects)).with_unknown(unknown);
        }
    }
    ParsedAnswer::failed()
}

const NUMBER_WORDS: [&str; 21] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    "twenty",
];

const POSITION_WORDS: [&str; 6] = ["row", "segment", "section", "column", "cell", "line"];

fn quantity(token: &str) -> Option<usize> {
    token
        .parse::<usize>()
        .ok()
        .or_else(|| NUMBER_WORDS.iter().position(|w| *w == token))
}

/// Scans `text` for `[quantity] <color> <shape>` sequences.
fn extract_pairs(text: &str, synonyms: &Synonyms) -> (Vec<ObjectKind>, Vec<String>) {
    static TOKEN: OnceLock<Regex> = OnceLock::new();
    let lower = text.to_lowercase();
    let tokens: Vec<&str> = re(&TOKEN, r"[a-z0-9]+(?:['-][a-z0-9]+)*")
        .find_iter(&lower)
        .map(|m| m.as_str())
        .collect();
    let mut objects = Vec::new();
    let mut unknown = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let Some(Term::Color(color)) = synonyms.lookup(tokens[i]) else {
            i += 1;
            continue;
        };
        let count = match i.checked_sub(1) {
            Some(j) => {
                let after_position_word = j
                    .checked_sub(1)
                    .is_some_and(|k| POSITION_WORDS.contains(&tokens[k]));
                quantity(tokens[j])
                    .filter(|n| *n >= 1 && !after_position_word)
                    .unwrap_or(1)
            }
            None => 1,
        };
        let two = tokens.get(i + 1..i + 3).map(|w| w.join(" "));
        let shape = two
            .as_deref()
            .and_then(|w| match synonyms.lookup(w) {
                Some(Term::Shape(s)) => Some((s, 2)),
                _ => None,
            })
            .or_else(|| match tokens.get(i + 1).and_then(|w| synonyms.lookup(w)) {
                Some(Term::Shape(s)) => Some((s, 1)),
                _ => None,
            });
        match shape {
            Some((shape, used)) => {
                objects.extend(std::iter::repeat_n(ObjectKind::new(shape, color), count));
                i += 1 + used;
            }
            None => {
                if let Some(next) = tokens.get(i + 1) {
                    if synonyms.lookup(next).is_none() && quantity(next).is_none() {
                        unknown.push((*next).to_string());
                    }
                }
                i += 1;
            }
        }
    }
    (objects, unknown)
}

/// Dispatches to the parser for `task`. `options` is only used for spatial
/// questions.
pub fn parse_answer(task: Task, text: &str, options: &[String], opts: ParseOptions) -> ParsedAnswer {
    match task {
        Task::Search => parse_bool_with(text, opts),
        Task::Count => parse_count_with(text, opts),
        Task::Describe => parse_object_list_with(text, opts, Synonyms::builtin()),
        Task::Spatial => parse_choice_with(text, options, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts4() -> Vec<String> {
        ["top-left", "top-right", "bottom-left", "bottom-right"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn bool_examples() {
        assert_eq!(
            parse_bool("…therefore [True]"),
            ParsedAnswer::strict(AnswerValue::Bool(true))
        );
        assert_eq!(
            parse_bool("I think the answer is yes."),
            ParsedAnswer::fallback(AnswerValue::Bool(true))
        );
        assert_eq!(parse_bool("cannot determine"), ParsedAnswer::failed());
        assert_eq!(
            parse_bool("[true] at first, but on reflection [FALSE]"),
            ParsedAnswer::strict(AnswerValue::Bool(false))
        );
        assert_eq!(parse_bool_with("yes", ParseOptions::STRICT_ONLY), ParsedAnswer::failed());
    }

    #[test]
    fn count_examples() {
        assert_eq!(
            parse_count("Row1:3 Row2:4 Row3:2 Row4:3 total [12]"),
            ParsedAnswer::strict(AnswerValue::Count(12))
        );
        assert_eq!(
            parse_count("There are 12 circles"),
            ParsedAnswer::fallback(AnswerValue::Count(12))
        );
        assert_eq!(parse_count("several"), ParsedAnswer::failed());
        assert_eq!(
            parse_count("Row 1: 3\nRow 2: 4\n\nSo 7 in total.\n"),
            ParsedAnswer::fallback(AnswerValue::Count(7))
        );
    }

    #[test]
    fn object_list_examples() {
        let green_l = ObjectKind::new(Shape::LetterL, Color::Green);
        let red_t = ObjectKind::new(Shape::LetterT, Color::Red);
        let red_circle = ObjectKind::new(Shape::Circle, Color::Red);
        assert_eq!(
            parse_object_list("1. green L\n2. red T"),
            ParsedAnswer::strict(AnswerValue::Objects(vec![green_l, red_t]))
        );
        assert_eq!(
            parse_object_list("a red circle and a red circle"),
            ParsedAnswer::fallback(AnswerValue::Objects(vec![red_circle, red_circle]))
        );
        assert_eq!(parse_object_list("many colorful items"), ParsedAnswer::failed());
    }

    #[test]
    fn object_list_synonyms_and_quantities() {
        let parsed = parse_object_list("[\n2 blue boxes\nthree green X shapes\nred cube\n]");
        assert_eq!(parsed.status, ParseStatus::Strict);
        let Some(AnswerValue::Objects(objs)) = parsed.value else {
            panic!("no objects")
        };
        assert_eq!(objs.len(), 5);
        assert_eq!(objs.iter().filter(|k| k.shape == Shape::Square).count(), 2);
        assert_eq!(objs.iter().filter(|k| k.shape == Shape::LetterX).count(), 3);
        assert_eq!(parsed.unknown_tokens, vec!["cube".to_string()]);
    }

    #[test]
    fn row_numbers_are_not_quantities() {
        let parsed = parse_object_list("Row 2 red circle");
        assert_eq!(
            parsed.value,
            Some(AnswerValue::Objects(vec![ObjectKind::new(Shape::Circle, Color::Red)]))
        );
    }

    #[test]
    fn choice_examples() {
        assert_eq!(
            parse_choice("[C]", &opts4()),
            ParsedAnswer::strict(AnswerValue::Choice(2))
        );
        assert_eq!(
            parse_choice("the jar is to the top-left", &opts4()),
            ParsedAnswer::fallback(AnswerValue::Choice(0))
        );
        assert_eq!(parse_choice("E", &opts4()), ParsedAnswer::failed());
        assert_eq!(
            parse_choice("The answer is D.", &opts4()),
            ParsedAnswer::fallback(AnswerValue::Choice(3))
        );
        assert_eq!(parse_choice("A red star is above", &opts4()), ParsedAnswer::failed());
        assert_eq!(
            parse_choice("it sits bottom right of the circle", &opts4()),
            ParsedAnswer::fallback(AnswerValue::Choice(3))
        );
    }

    #[test]
    fn synonym_table_errors() {
        assert!(Synonyms::parse("red\tscarlet-ish").is_err());
        assert!(Synonyms::parse("no tab here").is_err());
        let table = Synonyms::parse("# version\t7\nkite\tstar\n").unwrap();
        assert_eq!(table.version(), "7");
        assert_eq!(table.lookup("kite"), Some(Term::Shape(Shape::Star)));
        assert_eq!(Synonyms::builtin().version(), "1");
    }
}
