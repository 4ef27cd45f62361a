//! Operator descriptions and API-call templates, loaded from a JSON data
//! file so that templates can be extended without code changes.
//!
//! Template statements may contain placeholders that are filled with fresh
//! constants on every application: `{int}` (1–99), `{small}` (1–9),
//! `{int_list}` (three ints), `{year}`, `{month}`, `{day}`, `{hour}`,
//! `{minute}`, `{port}`, `{bytes}` (short bytes literal) and `{key32}`
//! (32-byte bytes literal).

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{OperatorId, OpRng};
use crate::python::ast::Stmt;
use crate::python::parse_module;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorInfo {
    pub code: OperatorId,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiTemplate {
    pub code: OperatorId,
    /// Import statements the inserted call needs.
    pub imports: Vec<String>,
    /// Expression statement with placeholders.
    pub statement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(default)]
    pub schema_version: u32,
    pub operators: Vec<OperatorInfo>,
    pub api_templates: Vec<ApiTemplate>,
}

static ACTIVE: OnceLock<Catalog> = OnceLock::new();

impl Catalog {
    pub fn bundled() -> Catalog {
        Self::from_json(include_str!("../../data/operators.json")).expect("bundled catalog is valid")
    }

    pub fn from_json(text: &str) -> Result<Catalog, String> {
        let c: Catalog = serde_json::from_str(text).map_err(|e| e.to_string())?;
        c.validate()?;
        Ok(c)
    }

    /// Checks that every template yields parseable imports and statements.
    pub fn validate(&self) -> Result<(), String> {
        let mut rng = <OpRng as rand::SeedableRng>::seed_from_u64(0);
        for t in &self.api_templates {
            if t.code.family() != super::Family::ApiCall {
                return Err(format!("template for non-API operator {}", t.code));
            }
            t.instantiate(&mut rng)
                .map_err(|e| format!("template {}: {e}", t.code))?;
        }
        Ok(())
    }

    /// Catalog used by the API operators: the installed one, or the bundled
    /// one when none was installed.
    pub fn active() -> &'static Catalog {
        ACTIVE.get_or_init(Catalog::bundled)
    }

    /// Installs a custom catalog. Only the first call takes effect, and only
    /// before any operator consulted the catalog.
    pub fn install(catalog: Catalog) -> bool {
        ACTIVE.set(catalog).is_ok()
    }

    pub fn templates(&self, op: OperatorId) -> impl Iterator<Item = &ApiTemplate> {
        self.api_templates.iter().filter(move |t| t.code == op)
    }

    pub fn description(&self, op: OperatorId) -> Option<&str> {
        self.operators
            .iter()
            .find(|o| o.code == op)
            .map(|o| o.description.as_str())
    }
}

fn letters(rng: &mut OpRng, n: usize) -> String {
    (0..n)
        .map(|_| char::from(b'a' + rng.gen_range(0..26u8)))
        .collect()
}

fn fill(template: &str, rng: &mut OpRng) -> Result<String, String> {
    let mut out = String::new();
    let mut rest = template;
    while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        let close = rest[i..]
            .find('}')
            .ok_or_else(|| "unterminated placeholder".to_string())?;
        let key = &rest[i + 1..i + close];
        let value = match key {
            "int" => rng.gen_range(1..=99).to_string(),
            "small" => rng.gen_range(1..=9).to_string(),
            "int_list" => {
                let v: Vec<String> = (0..3).map(|_| rng.gen_range(1..=99).to_string()).collect();
                format!("[{}]", v.join(", "))
            }
            "year" => rng.gen_range(1990..=2030).to_string(),
            "month" => rng.gen_range(1..=12).to_string(),
            "day" => rng.gen_range(1..=28).to_string(),
            "hour" => rng.gen_range(0..=23).to_string(),
            "minute" => rng.gen_range(0..=59).to_string(),
            "port" => rng.gen_range(1024..=65535).to_string(),
            "bytes" => {
                let n = rng.gen_range(6..=12);
                format!("b'{}'", letters(rng, n))
            }
            "key32" => format!("b'{}'", letters(rng, 32)),
            other => return Err(format!("unknown placeholder {{{other}}}")),
        };
        out.push_str(&value);
        rest = &rest[i + close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

impl ApiTemplate {
    /// Parsed import statements and the filled call statement.
    pub fn instantiate(&self, rng: &mut OpRng) -> Result<(Vec<Stmt>, Stmt), String> {
        let mut imports = Vec::new();
        for i in &self.imports {
            let m = parse_module(i).map_err(|e| e.to_string())?;
            match m.body.as_slice() {
                [s] if matches!(
                    s.kind,
                    crate::python::ast::StmtKind::Import(_)
                        | crate::python::ast::StmtKind::ImportFrom { .. }
                ) =>
                {
                    imports.push(s.clone())
                }
                _ => return Err(format!("'{i}' is not a single import")),
            }
        }
        let text = fill(&self.statement, rng)?;
        let m = parse_module(&text).map_err(|e| e.to_string())?;
        let [stmt] = <[Stmt; 1]>::try_from(m.body).map_err(|_| "statement template must be one statement".to_string())?;
        Ok((imports, stmt))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn bundled_catalog_covers_all_api_operators() {
        let c = Catalog::bundled();
        assert_eq!(c.operators.len(), 27);
        for op in OperatorId::ALL.iter().filter(|o| o.family() == super::super::Family::ApiCall) {
            assert!(c.templates(*op).next().is_some(), "{op}");
        }
    }

    #[test]
    fn placeholders_are_filled_deterministically() {
        let t = ApiTemplate {
            code: OperatorId::A6,
            imports: vec!["from scipy.stats import ttest_ind".into()],
            statement: "ttest_ind({int_list}, {int_list})".into(),
        };
        let mut a = OpRng::seed_from_u64(3);
        let mut b = OpRng::seed_from_u64(3);
        let (_, sa) = t.instantiate(&mut a).unwrap();
        let (_, sb) = t.instantiate(&mut b).unwrap();
        assert_eq!(sa, sb);
        let text = crate::python::emit::emit_stmts(&[sa]);
        assert!(text.starts_with("ttest_ind(["), "{text}");
    }

    #[test]
    fn bad_templates_are_rejected() {
        let bad = r#"{"operators": [], "api_templates": [{"code": "A1", "imports": ["x = 1"], "statement": "f()"}]}"#;
        assert!(Catalog::from_json(bad).is_err());
        let bad = r#"{"operators": [], "api_templates": [{"code": "A1", "imports": [], "statement": "f({nope})"}]}"#;
        assert!(Catalog::from_json(bad).is_err());
    }
}
