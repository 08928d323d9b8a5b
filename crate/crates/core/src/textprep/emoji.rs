//! Emoji detection and modifier stripping.

use unicode_segmentation::UnicodeSegmentation;

const ZWJ: char = '\u{200D}';

pub fn is_skin_tone(c: char) -> bool {
    ('\u{1F3FB}'..='\u{1F3FF}').contains(&c)
}

pub fn is_hair_component(c: char) -> bool {
    ('\u{1F9B0}'..='\u{1F9B3}').contains(&c)
}

pub fn is_gender_sign(c: char) -> bool {
    c == '\u{2640}' || c == '\u{2642}'
}

pub fn is_variation_selector(c: char) -> bool {
    c == '\u{FE0F}' || c == '\u{FE0E}'
}

/// Pictographic code points, approximated by block ranges.
pub fn is_emoji_char(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1F0FF
        | 0x1F10D..=0x1F10F
        | 0x1F12F
        | 0x1F16C..=0x1F171
        | 0x1F17E..=0x1F17F
        | 0x1F18E
        | 0x1F191..=0x1F19A
        | 0x1F1E6..=0x1F1FF
        | 0x1F201..=0x1F202
        | 0x1F21A | 0x1F22F
        | 0x1F232..=0x1F23A
        | 0x1F250..=0x1F251
        | 0x1F300..=0x1F3FA
        | 0x1F400..=0x1FAFF
        | 0x2300..=0x23FF
        | 0x2600..=0x27BF
        | 0x2934..=0x2935
        | 0x2B05..=0x2B07
        | 0x2B1B..=0x2B1C
        | 0x2B50 | 0x2B55
        | 0x3030 | 0x303D | 0x3297 | 0x3299)
        && !is_skin_tone(c)
}

fn is_modifier(c: char) -> bool {
    is_skin_tone(c) || is_hair_component(c) || is_variation_selector(c)
}

pub fn grapheme_is_emoji(g: &str) -> bool {
    g.chars().any(is_emoji_char)
}

/// Reduces one grapheme cluster to its base form: skin tones, hair
/// components and variation selectors are removed; a ZWJ sequence collapses
/// to its first base emoji once gender signs are dropped.
pub fn normalize_grapheme(g: &str) -> String {
    if g.contains(ZWJ) && grapheme_is_emoji(g) {
        return g
            .chars()
            .find(|&c| is_emoji_char(c) && !is_gender_sign(c) && !is_hair_component(c))
            .or_else(|| g.chars().find(|&c| is_emoji_char(c)))
            .map(String::from)
            .unwrap_or_default();
    }
    if g.chars().any(is_modifier) {
        g.chars().filter(|&c| !is_modifier(c)).collect()
    } else {
        g.to_string()
    }
}

pub fn strip_modifiers(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for g in text.graphemes(true) {
        if g.chars().any(|c| is_modifier(c) || c == ZWJ) {
            out.push_str(&normalize_grapheme(g));
        } else {
            out.push_str(g);
        }
    }
    out
}
