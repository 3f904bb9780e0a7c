use super::{AnnotatedUtterance, Mood};

const APOLOGY_DEMANDS: &[&str] = &[
    "say sorry",
    "apologize",
    "apologise",
    "that's rude",
    "how rude",
    "so rude",
    "that's offensive",
    "you should be sorry",
];
const BOREDOM: &[&str] = &["bored", "boring", "so boring"];
const DONT_KNOW: &str = "i don't know";

/// Rule cascade: profanity, apology demands, boredom, then sentiment bands.
///
/// `recent_history` holds earlier user turns of the session, most recent last.
pub fn classify_mood(utterance: &AnnotatedUtterance, recent_history: &[AnnotatedUtterance]) -> Mood {
    if utterance.profane {
        return Mood::Hostile;
    }
    if APOLOGY_DEMANDS.iter().any(|p| utterance.mentions(p)) {
        return Mood::Offended;
    }
    if BOREDOM.iter().any(|p| utterance.mentions(p)) {
        return Mood::Bored;
    }
    if utterance.mentions(DONT_KNOW) && recent_history.iter().rev().take(3).any(|u| u.mentions(DONT_KNOW)) {
        return Mood::Bored;
    }
    if utterance.sentiment < -0.25 {
        Mood::Negative
    } else if utterance.sentiment > 0.25 {
        Mood::Positive
    } else {
        Mood::Neutral
    }
}
