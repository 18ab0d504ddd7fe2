//! Tokenization, lemmatization and string similarity for field names and
//! corpus text.

use std::collections::HashSet;

const STOP_WORDS: &[&str] = &[
    "a", "about", "am", "an", "and", "any", "are", "as", "at", "be", "been", "by", "do", "does",
    "did", "for", "from", "had", "has", "have", "he", "her", "his", "how", "i", "if", "in",
    "indicate", "into", "is", "it", "its", "me", "my", "of", "on", "or", "our", "please",
    "select", "she", "that", "the", "their", "them", "these", "they", "this", "those", "to",
    "us", "was", "we", "were", "what", "when", "where", "which", "who", "whom", "why", "will",
    "with", "would", "you", "your", "yours",
];

/// Unit and currency markers that decorate field names without changing
/// what they measure.
const UNIT_WORDS: &[&str] = &[
    "usd", "eur", "gbp", "cad", "aud", "jpy", "chf", "inr", "cny", "kg", "lb", "lbs", "cm", "mm",
    "km", "mi", "pct",
];

pub fn is_stop_word(token: &str) -> bool {
    STOP_WORDS.contains(&token) || UNIT_WORDS.contains(&token)
}

/// Splits on non-alphanumerics and camelCase boundaries, keeping case.
fn split_words(text: &str) -> Vec<String> {
    let mut words = Vec::new();
    for run in text.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = run.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = (cur.is_uppercase() && (prev.is_lowercase() || prev.is_numeric()))
                || (cur.is_uppercase() && prev.is_uppercase() && next_lower);
            if boundary {
                words.push(chars[start..i].iter().collect());
                start = i;
            }
        }
        if start < chars.len() {
            words.push(chars[start..].iter().collect());
        }
    }
    words
}

/// Known multiword phrases, matched greedily (longest first) and joined
/// with underscores.
#[derive(Debug, Clone, Default)]
pub struct PhraseSet {
    phrases: Vec<Vec<String>>,
}

impl PhraseSet {
    pub fn new<I, S>(phrases: I) -> PhraseSet
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let mut list: Vec<Vec<String>> = phrases
            .into_iter()
            .map(|p| {
                split_words(p.as_ref())
                    .into_iter()
                    .map(|w| w.to_lowercase())
                    .collect::<Vec<_>>()
            })
            .filter(|ws| ws.len() > 1 && seen.insert(ws.clone()))
            .collect();
        list.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        PhraseSet { phrases: list }
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

/// Lowercased tokens with stop words and unit markers removed. Known
/// phrases survive as single `word_word` tokens.
pub fn tokenize(text: &str, phrases: &PhraseSet) -> Vec<String> {
    let words: Vec<String> = split_words(text)
        .into_iter()
        .map(|w| w.to_lowercase())
        .collect();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < words.len() {
        for p in &phrases.phrases {
            if words[i..].starts_with(p) {
                out.push(p.join("_"));
                i += p.len();
                continue 'outer;
            }
        }
        if !is_stop_word(&words[i]) {
            out.push(words[i].clone());
        }
        i += 1;
    }
    out
}

const IRREGULAR: &[(&str, &str)] = &[
    ("children", "child"),
    ("men", "man"),
    ("women", "woman"),
    ("people", "person"),
    ("persons", "person"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("mice", "mouse"),
    ("geese", "goose"),
    ("lives", "life"),
    ("wives", "wife"),
    ("knives", "knife"),
    ("leaves", "leaf"),
    ("halves", "half"),
    ("indices", "index"),
    ("matrices", "matrix"),
    ("criteria", "criterion"),
    ("phenomena", "phenomenon"),
];

/// Words ending in `s` that are not plurals.
const NOT_PLURAL: &[&str] = &[
    "always", "analysis", "basis", "bias", "bonus", "business", "canvas", "census", "chaos",
    "class", "corpus", "crisis", "diagnosis", "gas", "gross", "kudos", "less", "lens", "loss",
    "news", "plus", "minus", "series", "species", "status", "thesis", "this", "various", "virus",
    "whereas", "yes",
];

fn irregular(word: &str) -> Option<&'static str> {
    IRREGULAR.iter().find(|(k, _)| *k == word).map(|(_, v)| *v)
}

fn lemmatize_word(w: &str) -> String {
    if let Some(base) = irregular(w) {
        return base.to_string();
    }
    if w.chars().count() <= 3 || NOT_PLURAL.contains(&w) || !w.is_ascii() {
        return w.to_string();
    }
    let stem = if w.ends_with("ss") || w.ends_with("us") || w.ends_with("is") {
        w.to_string()
    } else if w.len() > 4 && w.ends_with("ies") {
        format!("{}y", &w[..w.len() - 3])
    } else if w.ends_with("sses") {
        w[..w.len() - 2].to_string()
    } else if ["ches", "shes", "xes", "zes"].iter().any(|s| w.ends_with(s)) {
        w[..w.len() - 2].to_string()
    } else if w.ends_with('s') {
        w[..w.len() - 1].to_string()
    } else {
        w.to_string()
    };
    irregular(&stem).map_or(stem, str::to_string)
}

/// Rule-based plural → singular. Compound `a_b` tokens lemmatize their
/// last part.
pub fn lemmatize(token: &str) -> String {
    match token.rsplit_once('_') {
        Some((head, last)) => format!("{head}_{}", lemmatize_word(last)),
        None => lemmatize_word(token),
    }
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = diag + usize::from(ca != cb);
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(row[j + 1] + 1);
        }
    }
    row[b.len()]
}

/// `1 − distance / max(len)`, in `[0, 1]`.
pub fn edit_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        let none = PhraseSet::default();
        assert_eq!(tokenize("Base Pay (USD)", &none), vec!["base", "pay"]);
        let base_pay = PhraseSet::new(["base pay"]);
        assert_eq!(tokenize("Base Pay (USD)", &base_pay), vec!["base_pay"]);
        assert_eq!(tokenize("AGE", &none), vec!["age"]);
        assert_eq!(tokenize("what is your annual income?", &none), vec!["annual", "income"]);
    }

    #[test]
    fn tokenize_styles() {
        let none = PhraseSet::default();
        for s in ["baseSalary", "BaseSalary", "base_salary", "BASE_SALARY", "base-salary", "Base Salary"] {
            assert_eq!(tokenize(s, &none), vec!["base", "salary"], "{s}");
        }
        assert_eq!(tokenize("HTTPServerCount", &none), vec!["http", "server", "count"]);
        assert_eq!(tokenize("row_id", &none), vec!["row", "id"]);
        let phrases = PhraseSet::new(["base salary", "how old"]);
        assert_eq!(tokenize("baseSalary2020", &phrases), vec!["base", "salary2020"]);
        assert_eq!(tokenize("How old are you?", &phrases), vec!["how_old"]);
    }

    #[test]
    fn lemmatize_examples() {
        assert_eq!(lemmatize("salaries"), "salary");
        assert_eq!(lemmatize("age"), "age");
        assert_eq!(lemmatize("children"), "child");
        assert_eq!(lemmatize("wages"), "wage");
        assert_eq!(lemmatize("earnings"), "earning");
        assert_eq!(lemmatize("taxes"), "tax");
        assert_eq!(lemmatize("classes"), "class");
        assert_eq!(lemmatize("status"), "status");
        assert_eq!(lemmatize("census"), "census");
        assert_eq!(lemmatize("base_salaries"), "base_salary");
        assert_eq!(lemmatize("childrens"), "child");
    }

    #[test]
    fn edit_distance_basics() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("same", "same"), 0);
        assert!((edit_similarity("salary", "salry") - (1.0 - 1.0 / 6.0)).abs() < 1e-12);
        assert_eq!(edit_similarity("", ""), 1.0);
    }

    proptest! {
        #[test]
        fn lemmatize_is_idempotent(w in "[a-z]{1,12}(_[a-z]{1,8})?") {
            let once = lemmatize(&w);
            prop_assert_eq!(lemmatize(&once), once);
        }

        #[test]
        fn irregular_and_plural_words_are_idempotent(i in 0usize..IRREGULAR.len()) {
            let once = lemmatize(IRREGULAR[i].0);
            prop_assert_eq!(lemmatize(&once), once.clone());
            let s = format!("{}s", IRREGULAR[i].0);
            let once = lemmatize(&s);
            prop_assert_eq!(lemmatize(&once), once);
        }

        #[test]
        fn levenshtein_is_a_metric(a in "[a-c]{0,8}", b in "[a-c]{0,8}", c in "[a-c]{0,8}") {
            prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        }
    }
}
