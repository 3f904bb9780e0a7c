use super::{AsrHypothesis, NluError};

#[derive(Debug, Clone, PartialEq)]
pub enum AsrOutcome {
    Accepted(String),
    /// Carries every hypothesis so later turns can reinterpret the noise.
    NeedsClarification(Vec<AsrHypothesis>),
}

/// Accepts the best hypothesis when the mean recognizer score reaches
/// `threshold` (inclusive).
pub fn preprocess_asr(hypotheses: &[AsrHypothesis], threshold: f64) -> Result<AsrOutcome, NluError> {
    if hypotheses.is_empty() {
        return Err(NluError::Input("no ASR hypotheses".into()));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(NluError::Input(format!("ASR threshold {threshold} outside [0,1]")));
    }
    for h in hypotheses {
        if !(0.0..=1.0).contains(&h.score) {
            return Err(NluError::Input(format!("ASR score {} outside [0,1]", h.score)));
        }
        if h.text.trim().is_empty() {
            return Err(NluError::Input("empty ASR hypothesis".into()));
        }
    }
    let mean = hypotheses.iter().map(|h| h.score).sum::<f64>() / hypotheses.len() as f64;
    if mean >= threshold {
        // first of the top-scored hypotheses
        let best = hypotheses
            .iter()
            .reduce(|best, h| if h.score > best.score { h } else { best })
            .expect("non-empty");
        Ok(AsrOutcome::Accepted(best.text.trim().to_string()))
    } else {
        Ok(AsrOutcome::NeedsClarification(hypotheses.to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyp(text: &str, score: f64) -> AsrHypothesis {
        AsrHypothesis { text: text.into(), score }
    }

    #[test]
    fn single_confident_hypothesis_is_accepted() {
        let out = preprocess_asr(&[hyp("tell me a story", 0.9)], 0.45).unwrap();
        assert_eq!(out, AsrOutcome::Accepted("tell me a story".into()));
    }

    #[test]
    fn low_mean_asks_for_clarification() {
        // mean(0.2, 0.3) = 0.25 < 0.45
        let hs = [hyp("a", 0.2), hyp("b", 0.3)];
        match preprocess_asr(&hs, 0.45).unwrap() {
            AsrOutcome::NeedsClarification(all) => assert_eq!(all.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn threshold_is_inclusive() {
        let out = preprocess_asr(&[hyp("hi", 0.45)], 0.45).unwrap();
        assert_eq!(out, AsrOutcome::Accepted("hi".into()));
    }

    #[test]
    fn best_hypothesis_wins_when_mean_passes() {
        let hs = [hyp("tell me a store", 0.5), hyp("tell me a story", 0.8)];
        assert_eq!(
            preprocess_asr(&hs, 0.45).unwrap(),
            AsrOutcome::Accepted("tell me a story".into())
        );
    }

    #[test]
    fn empty_list_is_an_input_error() {
        assert!(matches!(preprocess_asr(&[], 0.45), Err(NluError::Input(_))));
    }
}
