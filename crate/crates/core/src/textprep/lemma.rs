//! Rule-and-exception English lemmatizer.
//!
//! The exception table is consulted first; otherwise ordered suffix rules
//! strip plural and verbal inflection. Rules repeat until a fixed point, so
//! `lemma(lemma(w)) == lemma(w)`.

use std::collections::HashMap;
use std::path::Path;

use super::tokenize::{Token, TokenKind};
use crate::error::{Error, Result};

pub trait Lemmatizer: Send + Sync {
    fn lemma(&self, word: &str) -> String;
}

/// Irregular forms and words the suffix rules would damage. Entries mapping a
/// word to itself protect it.
const EXCEPTIONS: &str = "\
am be\nare be\nis be\nwas be\nwere be\nbeen be\nbeing be\n\
has have\nhad have\nhaving have\n\
did do\ndoes do\ndone do\ndoing do\n\
went go\ngone go\ngoes go\ngoing go\n\
ran run\nsaid say\nsays say\nmade make\ngot get\ngotten get\ntook take\ntaken take\n\
came come\nsaw see\nseen see\nknew know\nknown know\nthought think\ntold tell\n\
gave give\ngiven give\nfound find\nfelt feel\nkept keep\nbought buy\nbrought bring\n\
caught catch\ntaught teach\nfought fight\nsought seek\nsent send\nspent spend\nbuilt build\n\
meant mean\nmet meet\npaid pay\nheld hold\nstood stand\nunderstood understand\nwon win\n\
lost lose\nbegan begin\nbegun begin\nbroke break\nbroken break\nchose choose\nchosen choose\n\
drove drive\ndriven drive\nate eat\neaten eat\nfell fall\nfallen fall\nflew fly\nflown fly\n\
forgot forget\nforgotten forget\ngrew grow\ngrown grow\nhid hide\nhidden hide\nrode ride\n\
ridden ride\nrang ring\nrung ring\nrose rise\nrisen rise\nsang sing\nsung sing\nsank sink\n\
spoke speak\nspoken speak\nstole steal\nstolen steal\nswam swim\nthrew throw\nthrown throw\n\
wore wear\nworn wear\nwrote write\nwritten write\nslept sleep\nsold sell\nsat sit\n\
heard hear\nled lead\nfed feed\nfled flee\nhung hang\nshot shoot\nshown show\nbecame become\n\
men man\nwomen woman\nchildren child\nfeet foot\nteeth tooth\nmice mouse\ngeese goose\n\
people people\nlives life\nwives wife\nknives knife\nleaves leaf\nwolves wolf\nselves self\n\
themselves themselves\nyourselves yourselves\nourselves ourselves\n\
uses use\nused use\nusing use\ncauses cause\nbuses bus\nviruses virus\ngases gas\n\
movies movie\ncookies cookie\nrookies rookie\nselfies selfie\nzombies zombie\nbrownies brownie\n\
hoodies hoodie\nbesties bestie\nhippies hippie\naches ache\nheadaches headache\nniches niche\n\
dying die\nlying lie\ntying tie\nadding add\nadded add\n\
news news\nalways always\nseries series\nspecies species\nperhaps perhaps\nthis this\nthus thus\n\
bias bias\ntexas texas\nchristmas christmas\natlas atlas\nalias alias\ncanvas canvas\n\
kansas kansas\narkansas arkansas\nvegas vegas\nisis isis\nanyways anyways\nsometimes sometimes\n\
during during\nnothing nothing\nsomething something\nanything anything\neverything everything\n\
morning morning\nevening evening\nwedding wedding\nceiling ceiling\npudding pudding\n\
sibling sibling\ndarling darling\nkidding kidding\namazing amazing\ninteresting interesting\n\
hundred hundred\nsacred sacred\nnaked naked\nwicked wicked\nbeloved beloved\nkindred kindred\n\
crooked crooked\nunited united\nwoke woke\nlit lit\nleft left\nbest best\nless less\n\
its its\nhis his\nhers hers\nyours yours\nours ours\ntheirs theirs\nwhose whose\nyes yes\n\
was be\nvs vs\nplus plus\nlots lot\n";

#[derive(Debug, Clone)]
pub struct RuleLemmatizer {
    exceptions: HashMap<String, String>,
}

impl Default for RuleLemmatizer {
    fn default() -> Self {
        let mut exceptions = HashMap::new();
        for (form, lemma) in parse_table(EXCEPTIONS) {
            exceptions.insert(form, lemma);
        }
        RuleLemmatizer { exceptions }
    }
}

fn parse_table(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let mut parts = l.split(['\t', ' ']).filter(|p| !p.is_empty());
            match (parts.next(), parts.next()) {
                (Some(f), Some(t)) => Some((f.to_lowercase(), t.to_lowercase())),
                _ => None,
            }
        })
        .collect()
}

impl RuleLemmatizer {
    /// Adds or overrides exception entries from a `form<TAB>lemma` list.
    pub fn with_exceptions_text(mut self, text: &str) -> Self {
        for (form, lemma) in parse_table(text) {
            self.exceptions.insert(form, lemma);
        }
        self
    }

    pub fn with_exceptions_file(self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        Ok(self.with_exceptions_text(&text))
    }

    fn step(&self, w: &str) -> Option<String> {
        if let Some(l) = self.exceptions.get(w) {
            return (l != w).then(|| l.clone());
        }
        if !w.chars().all(|c| c.is_ascii_lowercase()) {
            return None;
        }
        let n = w.len();
        if n > 4 && w.ends_with("ies") {
            return Some(format!("{}y", &w[..n - 3]));
        }
        if n > 4 && w.ends_with("ied") {
            return Some(format!("{}y", &w[..n - 3]));
        }
        if n > 4 && (w.ends_with("sses") || w.ends_with("xes") || w.ends_with("ches") || w.ends_with("shes") || w.ends_with("zzes")) {
            return Some(w[..n - 2].to_string());
        }
        if n > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") && !w.ends_with("'s") {
            return Some(w[..n - 1].to_string());
        }
        if n > 4 && w.ends_with("ing") {
            return restore_stem(&w[..n - 3]);
        }
        if n > 3 && w.ends_with("ed") && !w.ends_with("eed") {
            return restore_stem(&w[..n - 2]);
        }
        None
    }
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn vowel_groups(s: &[u8]) -> usize {
    let mut groups = 0;
    let mut prev = false;
    for (i, &c) in s.iter().enumerate() {
        let v = is_vowel(c) || (c == b'y' && i > 0);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    groups
}

/// Repairs a stem left by stripping -ing/-ed: undoubles a final double
/// consonant and restores a silent e after short consonant-vowel-consonant
/// stems.
fn restore_stem(stem: &str) -> Option<String> {
    let b = stem.as_bytes();
    if b.len() < 2 || vowel_groups(b) == 0 {
        return None;
    }
    let n = b.len();
    let last = b[n - 1];
    if n >= 3 && last == b[n - 2] && !is_vowel(last) && !matches!(last, b'l' | b's' | b'z') {
        return Some(stem[..n - 1].to_string());
    }
    if matches!(last, b'v' | b'c') || stem.ends_with("iz") || stem.ends_with("bl") {
        return Some(format!("{stem}e"));
    }
    if n >= 3
        && vowel_groups(b) == 1
        && !is_vowel(b[n - 3])
        && is_vowel(b[n - 2])
        && !is_vowel(last)
        && !matches!(last, b'w' | b'x' | b'y')
    {
        return Some(format!("{stem}e"));
    }
    Some(stem.to_string())
}

impl Lemmatizer for RuleLemmatizer {
    fn lemma(&self, word: &str) -> String {
        let mut current = word.to_lowercase();
        // each rule shortens the word, so this terminates well before the cap
        for _ in 0..16 {
            match self.step(&current) {
                Some(next) if !next.is_empty() && next != current => current = next,
                _ => break,
            }
        }
        current
    }
}

/// Fills the lemma of word-like tokens; other kinds keep lemma = surface.
pub fn lemmatize(token: &Token, lemmatizer: &dyn Lemmatizer) -> Token {
    let mut out = token.clone();
    match token.kind {
        TokenKind::Word | TokenKind::HashtagWord => {
            let base = token.surface.trim_start_matches('#');
            let l = lemmatizer.lemma(base);
            out.lemma = if l.is_empty() { base.to_lowercase() } else { l };
        }
        _ => out.lemma = token.surface.clone(),
    }
    out
}
