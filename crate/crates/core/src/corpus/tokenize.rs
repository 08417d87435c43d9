/// Splits raw text into lowercase tokens.
///
/// Tokens are whitespace-separated, with leading and trailing
/// non-alphanumeric characters removed. Inner punctuation survives
/// ("don't", "3-1"), and tokens that end up empty are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    lowered
        .split_whitespace()
        .map(|raw| raw.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|tok| !tok.is_empty())
        .map(str::to_owned)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \t\n ").is_empty());
    }

    #[test]
    fn sentence_with_trailing_punctuation() {
        assert_eq!(
            tokenize("We are playing with the Highlighter today!"),
            vec!["we", "are", "playing", "with", "the", "highlighter", "today"]
        );
    }

    #[test]
    fn alphanumeric_tokens_survive() {
        assert_eq!(
            tokenize("F5 tapping, so intense"),
            vec!["f5", "tapping", "so", "intense"]
        );
        assert_eq!(tokenize("2017 ... (vans)"), vec!["2017", "vans"]);
        assert_eq!(tokenize("don't 3-1"), vec!["don't", "3-1"]);
    }

    proptest! {
        #[test]
        fn idempotent_on_joined_output(text in "\\PC{0,80}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }
    }
}
