/// 32-bit FNV-1a over the UTF-8 bytes.
pub fn fnv1a(s: &str) -> u32 {
    let mut h: u32 = 2_166_136_261;
    for &b in s.as_bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(16_777_619);
    }
    h
}

/// Character n-grams of `<word>` with lengths `minn..=maxn`, in order of
/// start position then length, followed by the bracketed word itself when
/// it was not already produced. Duplicates are kept only once.
pub fn subword_ngrams(word: &str, minn: usize, maxn: usize) -> Vec<String> {
    let chars: Vec<char> = std::iter::once('<').chain(word.chars()).chain(std::iter::once('>')).collect();
    let mut out: Vec<String> = Vec::new();
    for start in 0..chars.len() {
        for n in minn..=maxn {
            if n == 0 || start + n > chars.len() {
                break;
            }
            let g: String = chars[start..start + n].iter().collect();
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    let whole: String = chars.iter().collect();
    if !out.contains(&whole) {
        out.push(whole);
    }
    out
}

pub fn bucket_of(ngram: &str, bucket_count: u32) -> u32 {
    fnv1a(ngram) % bucket_count
}

/// Distinct bucket ids for a word, in first-seen order.
pub fn word_buckets(word: &str, minn: usize, maxn: usize, bucket_count: u32) -> Vec<u32> {
    let mut out = Vec::new();
    for g in subword_ngrams(word, minn, maxn) {
        let b = bucket_of(&g, bucket_count);
        if !out.contains(&b) {
            out.push(b);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn run_ngrams() {
        let got: BTreeSet<String> = subword_ngrams("run", 3, 5).into_iter().collect();
        let want: BTreeSet<String> = ["<ru", "run", "un>", "<run", "run>", "<run>"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn single_letter() {
        assert_eq!(subword_ngrams("a", 3, 5), vec!["<a>".to_string()]);
    }

    #[test]
    fn long_word_keeps_bracketed_form() {
        let g = subword_ngrams("hello", 3, 3);
        assert_eq!(g.last().unwrap(), "<hello>");
        assert_eq!(g.len(), 6);
    }

    #[test]
    fn multibyte_counts_chars() {
        assert_eq!(subword_ngrams("😀", 3, 5), vec!["<😀>".to_string()]);
    }

    #[test]
    fn fnv_reference_values() {
        // published FNV-1a 32-bit test vectors
        assert_eq!(fnv1a(""), 0x811c9dc5);
        assert_eq!(fnv1a("a"), 0xe40c292c);
        assert_eq!(fnv1a("foobar"), 0xbf9cf968);
        assert_eq!(word_buckets("run", 3, 5, 1000), word_buckets("run", 3, 5, 1000));
    }
}
