//! Tokenization and normalization shared by the word index, the LSA engine
//! and the autocomplete index.

use std::collections::HashSet;
use std::sync::OnceLock;

const STOPWORDS_EN: &str = include_str!("../stopwords/en.txt");
const STOPWORDS_FR: &str = include_str!("../stopwords/fr.txt");
const STOPWORDS_DE: &str = include_str!("../stopwords/de.txt");

fn parse_list(raw: &'static str) -> HashSet<&'static str> {
    raw.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

/// Shipped stopword list for `lang`; empty for languages without one.
pub fn stopwords(lang: &str) -> &'static HashSet<&'static str> {
    static EN: OnceLock<HashSet<&str>> = OnceLock::new();
    static FR: OnceLock<HashSet<&str>> = OnceLock::new();
    static DE: OnceLock<HashSet<&str>> = OnceLock::new();
    static NONE: OnceLock<HashSet<&str>> = OnceLock::new();
    match lang {
        "en" => EN.get_or_init(|| parse_list(STOPWORDS_EN)),
        "fr" => FR.get_or_init(|| parse_list(STOPWORDS_FR)),
        "de" => DE.get_or_init(|| parse_list(STOPWORDS_DE)),
        _ => NONE.get_or_init(HashSet::new),
    }
}

/// Lowercases, splits on anything that is not alphanumeric, drops tokens
/// shorter than two characters and stopwords of `lang`.
pub fn tokenize(text: &str, lang: &str) -> Vec<String> {
    let stop = stopwords(lang);
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| t.chars().count() >= 2 && !stop.contains(t.as_str()))
        .collect()
}

/// Folds one lowercase character to its unaccented form.
fn fold_char(c: char, out: &mut String) {
    let folded = match c {
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' => "a",
        'æ' => "ae",
        'ç' => "c",
        'è' | 'é' | 'ê' | 'ë' => "e",
        'ì' | 'í' | 'î' | 'ï' => "i",
        'ñ' => "n",
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' => "o",
        'œ' => "oe",
        'ù' | 'ú' | 'û' | 'ü' => "u",
        'ý' | 'ÿ' => "y",
        'ß' => "ss",
        other => {
            out.push(other);
            return;
        }
    };
    out.push_str(folded);
}

/// Lowercase, diacritic-folded form used for typeahead matching.
pub fn fold(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars().flat_map(char::to_lowercase) {
        fold_char(c, &mut out);
    }
    out
}

/// Folded tokens of a label or a typeahead query; no stopword removal and
/// no length filter so that one-letter prefixes still match.
pub fn fold_tokens(text: &str) -> Vec<String> {
    fold(text).split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_string).collect()
}
