pub const AFFIRMATIVES: [&str; 8] = [
    "pass", "passes", "passed", "satisfy", "satisfies", "satisfied", "compliant", "ok",
];

/// `un` also catches hyphenated prefixes such as "un-satisfied".
pub const NEGATORS: [&str; 9] = [
    "not", "no", "fail", "fails", "failed", "cannot", "doesn't", "isn't", "un",
];

/// Tokens preceding an affirmative that are scanned for a negator.
pub const NEGATION_WINDOW: usize = 3;

/// Lowercased runs of alphanumerics and apostrophes.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .replace('\u{2019}', "'")
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

/// True iff some affirmative appears with no negator among the preceding
/// [`NEGATION_WINDOW`] tokens.
pub fn check_compliance(text: &str) -> bool {
    let tokens = tokenize(text);
    tokens.iter().enumerate().any(|(i, t)| {
        AFFIRMATIVES.contains(&t.as_str())
            && !tokens[i.saturating_sub(NEGATION_WINDOW)..i]
                .iter()
                .any(|p| NEGATORS.contains(&p.as_str()))
    })
}
