//! Deterministic namer: composes a name from the most frequent descriptive
//! token in the context and a suffix chosen by the identifier's role.

use std::collections::BTreeMap;

use super::{NamingRequest, MAX_NAME_LEN};
use crate::operators::NameKind;
use crate::python::is_builtin;
use crate::python::lexer::{tokenize, TokKind};
use crate::python::parser::is_keyword;

/// Tokens that never describe a value.
const STOP_WORDS: &[&str] = &[
    "self", "cls", "args", "kwargs", "func", "res", "np", "numpy", "threading", "queue", "time",
    "datetime", "base64", "http", "fernet", "scipy", "sklearn", "dateutil", "get", "put",
    "start", "join", "append", "item", "items", "keys", "values", "format", "value",
];

pub fn fallback_rename(request: &NamingRequest) -> String {
    let noun = context_noun(request);
    let role = request.role.clone().unwrap_or_else(|| infer_role(&request.identifier));
    let taken = |n: &str| request.forbidden.contains(n);
    let Some(noun) = noun else {
        let base = match request.kind {
            NameKind::Variable => "value",
            NameKind::Function => "helper",
            NameKind::Class => "CustomError",
        };
        let sep = if request.kind == NameKind::Class { "" } else { "_" };
        return (1..)
            .map(|i| format!("{base}{sep}{i}"))
            .find(|n| !taken(n))
            .expect("unbounded counter");
    };
    let base = compose(&noun, request.kind, &role);
    if !taken(&base) && !is_keyword(&base) && !is_builtin(&base) {
        return base;
    }
    let sep = if request.kind == NameKind::Class { "" } else { "_" };
    (2..)
        .map(|i| format!("{base}{sep}{i}"))
        .find(|n| !taken(n))
        .expect("unbounded counter")
}

/// Role implied by the words of a generated identifier.
fn infer_role(identifier: &str) -> String {
    let words: Vec<&str> = identifier.split('_').collect();
    for role in ["queue", "thread", "batch", "index", "items", "result", "condition", "worker"] {
        if words.contains(&role) {
            return role.to_string();
        }
    }
    "data".to_string()
}

fn compose(noun: &str, kind: NameKind, role: &str) -> String {
    let name = match (kind, role) {
        (NameKind::Class, _) => format!("{}Error", noun.split('_').map(capitalize).collect::<String>()),
        (NameKind::Function, "compute") => format!("compute_{noun}"),
        (NameKind::Function, "loop") => format!("process_{noun}"),
        (NameKind::Function, "worker") => format!("{noun}_worker"),
        (NameKind::Function, "decorator") => format!("{noun}_decorator"),
        (NameKind::Function, _) => format!("get_{noun}"),
        (NameKind::Variable, "condition") => format!("{noun}_check"),
        (NameKind::Variable, r) if !r.is_empty() => format!("{noun}_{r}"),
        (NameKind::Variable, _) => format!("{noun}_data"),
    };
    if name.len() <= MAX_NAME_LEN {
        return name;
    }
    let cut = name.len() - MAX_NAME_LEN;
    let short: String = noun.chars().take(noun.len().saturating_sub(cut).max(1)).collect();
    compose(&short, kind, role)
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(h) => h.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// The most frequent descriptive word among the hints, or failing that
/// among the identifiers of the context snippet. Ties go to the earliest
/// occurrence.
fn context_noun(request: &NamingRequest) -> Option<String> {
    let names: Vec<String> = tokenize(&request.context)
        .map(|ts| {
            ts.into_iter()
                .filter(|t| t.kind == TokKind::Name)
                .map(|t| t.text)
                .collect()
        })
        .unwrap_or_else(|_| {
            request
                .context
                .split(|c: char| !(c.is_alphanumeric() || c == '_'))
                .filter(|w| !w.is_empty())
                .map(String::from)
                .collect()
        });
    let usable = |n: &str| {
        !n.is_empty()
            && n != request.identifier
            && !request.synthetic.iter().any(|s| s == n)
            && !is_keyword(n)
            && !is_builtin(n)
            && noun_of(n).is_some()
    };
    let pool: Vec<&String> = if request.hints.iter().any(|h| usable(h)) {
        request.hints.iter().filter(|h| usable(h)).collect()
    } else {
        names.iter().filter(|n| usable(n)).collect()
    };
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (i, n) in pool.iter().enumerate() {
        let freq = names.iter().filter(|m| m == n).count();
        counts.entry(n.as_str()).or_insert((freq, i));
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
        .and_then(|(n, _)| noun_of(n))
}

/// Last alphabetic word of an identifier, lower-cased and singularized.
fn noun_of(name: &str) -> Option<String> {
    let word = name
        .split('_')
        .rev()
        .find(|w| w.len() >= 2 && w.chars().all(|c| c.is_ascii_alphabetic()))?
        .to_ascii_lowercase();
    if STOP_WORDS.contains(&word.as_str()) {
        return None;
    }
    Some(singular(&word))
}

fn singular(w: &str) -> String {
    if let Some(stem) = w.strip_suffix("ies") {
        if stem.len() >= 2 {
            return format!("{stem}y");
        }
    }
    if w.ends_with("sses") || w.ends_with("xes") || w.ends_with("ches") || w.ends_with("shes") {
        return w[..w.len() - 2].to_string();
    }
    if w.len() > 3 && w.ends_with('s') && !(w.ends_with("ss") || w.ends_with("us") || w.ends_with("is")) {
        return w[..w.len() - 1].to_string();
    }
    w.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn request(identifier: &str, context: &str, forbidden: &[&str]) -> NamingRequest {
        NamingRequest {
            identifier: identifier.to_string(),
            kind: NameKind::Variable,
            role: None,
            context: context.to_string(),
            forbidden: forbidden.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
            hints: Vec::new(),
            synthetic: Vec::new(),
        }
    }

    #[test]
    fn context_noun_with_role_suffix() {
        let r = request("value", "text = text.strip()\nif text:\n    return text\n", &[]);
        assert_eq!(fallback_rename(&r), "text_data");
    }

    #[test]
    fn empty_context_defaults() {
        assert_eq!(fallback_rename(&request("value", "", &[])), "value_1");
        assert_eq!(fallback_rename(&request("value", "", &["value_1"])), "value_2");
    }

    #[test]
    fn collisions_get_a_counter() {
        let r = request("value", "text = text.strip()\n", &["text_data"]);
        assert_eq!(fallback_rename(&r), "text_data_2");
    }

    #[test]
    fn batch_wrapper_is_named_after_its_rows() {
        let mut r = request("batch", "for batch in [rows]:\n    for r in batch:\n        total += r\n", &[]);
        r.role = Some("batch".into());
        r.hints = vec!["rows".into()];
        r.synthetic = vec!["batch".into()];
        assert_eq!(fallback_rename(&r), "row_batch");
    }

    #[test]
    fn classes_and_functions() {
        let mut r = request("CustomError", "def parse(tokens):\n    return tokens\n", &[]);
        r.kind = NameKind::Class;
        assert_eq!(fallback_rename(&r), "TokenError");
        r.kind = NameKind::Function;
        r.role = Some("loop".into());
        assert_eq!(fallback_rename(&r), "process_token");
    }

    #[test]
    fn long_nouns_are_truncated() {
        let r = request("value", "abcdefghijklmnopqrstuvwxyzabcdefghij = 1\n", &[]);
        let n = fallback_rename(&r);
        assert!(n.len() <= MAX_NAME_LEN, "{n}");
        assert!(n.ends_with("_data"));
    }
}
