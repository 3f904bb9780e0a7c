//! Tokenization helpers shared by the annotators, the index and the ranker.

/// Characters kept at token edges even though they are ASCII punctuation.
/// Grawlix strings ("#&%") survive so the profanity lexicon can list them.
const KEPT_EDGE_SYMBOLS: &[char] = &['#', '$', '%', '&', '@', '*'];

fn is_trimmed(c: char) -> bool {
    (c.is_ascii_punctuation() && !KEPT_EDGE_SYMBOLS.contains(&c)) || c == '\u{201c}' || c == '\u{201d}'
}

/// Lowercases a raw token and trims surrounding punctuation. Inner
/// apostrophes and hyphens are kept ("don't", "forty-five").
pub fn normalize_token(raw: &str) -> String {
    let lowered = raw.replace(['\u{2019}', '\u{2018}'], "'").to_lowercase();
    lowered.trim_matches(is_trimmed).to_string()
}

/// Whitespace tokenization with per-token normalization; empty tokens dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(normalize_token)
        .filter(|t| !t.is_empty())
        .collect()
}

/// Index/gazetteer form of a token: possessive `'s` removed.
pub fn term(token: &str) -> &str {
    token.strip_suffix("'s").unwrap_or(token)
}

/// Splits text into sentences on `.`, `!` or `?` followed by whitespace or
/// the end of input. Decimal points ("8.8") never split.
pub fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (i, &(pos, c)) in chars.iter().enumerate() {
        if matches!(c, '.' | '!' | '?') {
            let next_is_break = chars.get(i + 1).is_none_or(|&(_, n)| n.is_whitespace());
            if next_is_break {
                let end = pos + c.len_utf8();
                let s = text[start..end].trim();
                if !s.is_empty() {
                    out.push(s);
                }
                start = end;
            }
        }
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest);
    }
    out
}

/// True when `phrase` occurs as a contiguous token subsequence of `tokens`.
/// Comparison is on [`term`] forms so "city's" matches "city".
pub fn contains_phrase(tokens: &[String], phrase: &[String]) -> bool {
    find_phrase(tokens, phrase).is_some()
}

pub fn find_phrase(tokens: &[String], phrase: &[String]) -> Option<usize> {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return None;
    }
    (0..=tokens.len() - phrase.len()).find(|&i| {
        tokens[i..i + phrase.len()]
            .iter()
            .zip(phrase)
            .all(|(a, b)| term(a) == term(b))
    })
}

/// Uppercases the first character.
pub fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Collapses internal whitespace runs to single spaces and trims the ends.
pub fn squash_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_strips_punctuation_and_lowercases() {
        assert_eq!(tokenize("HELLO There!"), vec!["hello", "there"]);
        assert_eq!(tokenize("What is it's population?"), vec!["what", "is", "it's", "population"]);
        assert_eq!(tokenize("You #&%!"), vec!["you", "#&%"]);
        assert_eq!(tokenize("  ...  "), Vec::<String>::new());
    }

    #[test]
    fn sentence_split_keeps_decimals() {
        assert_eq!(
            sentences("Just a guess. Tell me a story."),
            vec!["Just a guess.", "Tell me a story."]
        );
        assert_eq!(sentences("It is 8.8 million"), vec!["It is 8.8 million"]);
        assert!(sentences("   ").is_empty());
    }

    #[test]
    fn phrase_match_uses_term_form() {
        let toks = tokenize("what is mexico city's population");
        assert!(contains_phrase(&toks, &tokenize("mexico city")));
        assert!(!contains_phrase(&toks, &tokenize("city mexico")));
        assert_eq!(find_phrase(&toks, &tokenize("population")), Some(4));
    }
}
