use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use super::clean::EmoticonDict;
use super::emoji::grapheme_is_emoji;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Word,
    Emoji,
    Emoticon,
    HashtagWord,
    Number,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub kind: TokenKind,
}

impl Token {
    pub fn new(surface: impl Into<String>, kind: TokenKind) -> Self {
        let surface = surface.into();
        let lemma = match kind {
            TokenKind::HashtagWord => surface.trim_start_matches('#').to_string(),
            _ => surface.clone(),
        };
        Token { surface, lemma, kind }
    }
}

fn classify(segment: &str) -> TokenKind {
    if let Some(rest) = segment.strip_prefix('#') {
        if !rest.is_empty() && rest.chars().all(char::is_alphanumeric) {
            return TokenKind::HashtagWord;
        }
    }
    if segment.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',')
        && segment.chars().any(|c| c.is_ascii_digit())
    {
        return TokenKind::Number;
    }
    if segment.chars().any(char::is_alphabetic) && segment.chars().all(|c| c.is_alphanumeric() || c == '\'') {
        return TokenKind::Word;
    }
    TokenKind::Other
}

/// Whitespace segmentation with every emoji grapheme split into its own
/// token, so `✨✨` yields two tokens.
pub fn tokenize(cleaned: &str, emoticons: &EmoticonDict) -> Vec<Token> {
    let mut out = Vec::new();
    for chunk in cleaned.split_whitespace() {
        if emoticons.contains(chunk) {
            out.push(Token::new(chunk, TokenKind::Emoticon));
            continue;
        }
        let mut pending = String::new();
        for g in chunk.graphemes(true) {
            if grapheme_is_emoji(g) {
                if !pending.is_empty() {
                    let kind = classify(&pending);
                    out.push(Token::new(std::mem::take(&mut pending), kind));
                }
                out.push(Token::new(g, TokenKind::Emoji));
            } else {
                pending.push_str(g);
            }
        }
        if !pending.is_empty() {
            let kind = classify(&pending);
            out.push(Token::new(pending, kind));
        }
    }
    out
}
