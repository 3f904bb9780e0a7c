use super::DialogueAct;
use crate::text;

const INTERJECTIONS: &[&str] = &[
    "yes", "yeah", "yep", "no", "nope", "nah", "ok", "okay", "oh", "well", "so", "um", "uh", "hmm",
    "and", "but", "alright", "hey",
];
const WH_WORDS: &[&str] = &[
    "what", "who", "whom", "whose", "where", "when", "why", "which", "how", "what's", "who's",
    "where's", "when's", "why's", "how's",
];
const AUXILIARIES: &[&str] = &[
    "do", "does", "did", "is", "are", "was", "were", "can", "could", "will", "would", "should",
    "shall", "may", "might", "must", "have", "has", "had", "am", "don't", "doesn't", "didn't",
    "isn't", "aren't", "won't", "wouldn't", "can't", "couldn't", "shouldn't",
];
const IMPERATIVES: &[&str] = &[
    "tell", "play", "let's", "let", "stop", "give", "show", "say", "talk", "sing", "read", "start",
    "turn", "open", "repeat", "ask", "help", "set", "call", "find", "teach", "recommend",
];
const GREETINGS: &[&str] = &["hi", "hello", "hey", "howdy", "greetings", "hiya"];
const FIRST_PERSON: &[&str] = &["i", "we"];
const OPINION_VERBS: &[&str] = &[
    "like", "love", "hate", "think", "prefer", "enjoy", "adore", "dislike", "believe", "feel",
];

/// Heuristic dialogue-act tagger over the final sentence of the turn.
///
/// Leading interjections ("yes,", "okay", "no") are skipped before the
/// first-word tests.
pub fn classify_dialogue_act(raw: &str) -> DialogueAct {
    let sentences = text::sentences(raw);
    let Some(last) = sentences.last() else {
        return DialogueAct::Other;
    };
    let tokens = text::tokenize(last);
    if tokens.is_empty() {
        return DialogueAct::Other;
    }
    if GREETINGS.contains(&tokens[0].as_str()) && tokens.len() <= 3 {
        return DialogueAct::Greeting;
    }
    let skip = tokens
        .iter()
        .take_while(|t| INTERJECTIONS.contains(&t.as_str()))
        .count();
    let rest = &tokens[skip..];
    let Some(first) = rest.first() else {
        return DialogueAct::Other;
    };
    let first = first.as_str();
    if WH_WORDS.contains(&first) {
        return DialogueAct::OpenQuestion;
    }
    if AUXILIARIES.contains(&first) {
        return DialogueAct::YesNoQuestion;
    }
    if IMPERATIVES.contains(&first) {
        return DialogueAct::Command;
    }
    let opinion = rest.iter().enumerate().any(|(i, t)| {
        FIRST_PERSON.contains(&t.as_str())
            && rest[i + 1..]
                .iter()
                .take(3)
                .any(|v| OPINION_VERBS.contains(&v.as_str()))
    }) || text::contains_phrase(rest, &text::tokenize("my favorite"));
    if opinion {
        return DialogueAct::ProvideOpinion;
    }
    if last.trim_end().ends_with('?') {
        return DialogueAct::YesNoQuestion;
    }
    DialogueAct::Statement
}

#[cfg(test)]
mod tests {
    use super::*;
    use DialogueAct::*;

    #[test]
    fn heuristics() {
        assert_eq!(classify_dialogue_act("do you know anything about pizza"), YesNoQuestion);
        assert_eq!(classify_dialogue_act("What is the capitol city of Mexico."), OpenQuestion);
        assert_eq!(classify_dialogue_act("I like blue"), ProvideOpinion);
        assert_eq!(classify_dialogue_act("Just a guess. Tell me a story."), Command);
        assert_eq!(classify_dialogue_act("yes, we are planning to go to Paris"), Statement);
        assert_eq!(classify_dialogue_act("Okay, how is it that you are smart?"), OpenQuestion);
        assert_eq!(classify_dialogue_act("No, what kind of pet is it?"), OpenQuestion);
        assert_eq!(classify_dialogue_act("hello"), Greeting);
        assert_eq!(classify_dialogue_act("no"), Other);
        assert_eq!(classify_dialogue_act("you like it?"), YesNoQuestion);
    }
}
