use unicode_segmentation::UnicodeSegmentation;

/// Splits text on Unicode word boundaries, drops punctuation and
/// whitespace, and lower-cases every token.
pub fn tokenize(text: &str) -> Vec<String> {
    text.unicode_words().map(str::to_lowercase).collect()
}
