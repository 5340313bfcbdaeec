//! Pluggable tokenization used for token statistics and input truncation.

/// Splits text into tokens and cuts text down to a token budget.
pub trait Tokenizer: Send + Sync {
    fn count(&self, text: &str) -> usize;

    /// Returns `text` cut to its first `max_tokens` tokens, unchanged if already within budget.
    fn truncate(&self, text: &str, max_tokens: usize) -> String;
}

/// Tokens are maximal runs of non-whitespace characters.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl Tokenizer for WhitespaceTokenizer {
    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }

    fn truncate(&self, text: &str, max_tokens: usize) -> String {
        if max_tokens == 0 {
            return String::new();
        }
        match text.split_whitespace().nth(max_tokens) {
            None => text.to_owned(),
            // cut right before the first token past the budget, then drop the separator
            Some(first_excess) => {
                let offset = first_excess.as_ptr() as usize - text.as_ptr() as usize;
                text[..offset].trim_end().to_owned()
            }
        }
    }
}

pub fn count_tokens(text: &str, tokenizer: &dyn Tokenizer) -> usize {
    tokenizer.count(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitespace_counts() {
        let t = WhitespaceTokenizer;
        assert_eq!(count_tokens("", &t), 0);
        assert_eq!(count_tokens("a b  c", &t), 3);
        assert_eq!(count_tokens("  \t\n ", &t), 0);
    }

    #[test]
    fn truncation_keeps_budget_and_is_idempotent() {
        let t = WhitespaceTokenizer;
        let text: String = (0..1000).map(|i| format!("w{i}")).collect::<Vec<_>>().join("  ");
        let cut = t.truncate(&text, 512);
        assert_eq!(t.count(&cut), 512);
        assert!(cut.ends_with("w511"));
        assert_eq!(t.truncate(&cut, 512), cut);
        assert_eq!(t.truncate("short text", 512), "short text");
        assert_eq!(t.truncate("a b", 0), "");
    }
}
