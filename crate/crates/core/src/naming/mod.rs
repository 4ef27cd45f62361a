//! Naturalization of operator-generated identifiers.
//!
//! After an operator runs, the identifiers it invented (`batch`,
//! `result_queue`, `loop_fn`, ...) are offered to a [`NamingProvider`] in one
//! batch. Proposals are sanitized and checked against every name in use;
//! anything rejected is retried once with the enlarged forbidden set and then
//! named by the deterministic fallback. Renaming is alpha-conversion only, so
//! it never changes behavior, and it never aborts evolution.

mod fallback;
mod remote;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fallback::fallback_rename;
pub use remote::RemoteNamer;

use crate::operators::rename::rename_everywhere;
use crate::operators::{check_reparses, Cx, NameKind, SyntheticName};
use crate::python::parser::is_keyword;
use crate::python::scope::walk_stmt_idents;
use crate::python::{emit_module, is_builtin, is_identifier};
use crate::unit::ProgramUnit;

pub const MAX_NAME_LEN: usize = 30;
/// Lines of context on either side of an identifier's first use.
const CONTEXT_RADIUS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamingRequest {
    pub identifier: String,
    pub kind: NameKind,
    /// Usage role reported by the operator; inferred from the identifier
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    /// Source lines around the first use of the identifier.
    pub context: String,
    pub forbidden: BTreeSet<String>,
    /// Names from the rewritten code that describe the value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hints: Vec<String>,
    /// Every identifier of the batch; never used as a context word.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub synthetic: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NamingError {
    #[error("naming provider unavailable: {0}")]
    Unavailable(String),
    #[error("malformed provider response: {0}")]
    Malformed(String),
}

/// Proposes replacements for a batch of identifiers. Providers may omit
/// identifiers or propose invalid names; the caller sanitizes.
pub trait NamingProvider: Send + Sync {
    fn propose(&self, requests: &[NamingRequest]) -> Result<BTreeMap<String, String>, NamingError>;

    /// True for providers whose answers are already final.
    fn is_fallback(&self) -> bool {
        false
    }
}

/// The deterministic provider used on its own or behind a remote one.
#[derive(Debug, Clone, Copy, Default)]
pub struct FallbackNamer;

impl NamingProvider for FallbackNamer {
    fn propose(&self, requests: &[NamingRequest]) -> Result<BTreeMap<String, String>, NamingError> {
        let mut used = BTreeSet::new();
        let mut out = BTreeMap::new();
        for r in requests {
            let mut r = r.clone();
            r.forbidden.extend(used.iter().cloned());
            let name = fallback_rename(&r);
            used.insert(name.clone());
            out.insert(r.identifier.clone(), name);
        }
        Ok(out)
    }

    fn is_fallback(&self) -> bool {
        true
    }
}

fn default_enabled() -> bool {
    true
}

fn default_key_env() -> String {
    "EVOBENCH_NAMING_KEY".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamingConfig {
    #[serde(default = "default_enabled")]
    pub enabled: bool,
    /// HTTP endpoint of a remote provider; the fallback namer is used alone
    /// when unset.
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub model: String,
    /// Environment variable holding the bearer key for the endpoint.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
}

impl Default for NamingConfig {
    fn default() -> Self {
        NamingConfig {
            enabled: true,
            endpoint: None,
            model: String::new(),
            api_key_env: default_key_env(),
        }
    }
}

impl NamingConfig {
    /// The configured provider, or `None` when naturalization is disabled.
    pub fn provider(&self) -> Option<Box<dyn NamingProvider>> {
        if !self.enabled {
            return None;
        }
        Some(match &self.endpoint {
            Some(url) => Box::new(RemoteNamer::new(
                url,
                &self.model,
                std::env::var(&self.api_key_env).ok(),
            )),
            None => Box::new(FallbackNamer),
        })
    }
}

/// Identifier grammar, length limit, and not a keyword or builtin.
pub fn is_acceptable(name: &str) -> bool {
    is_identifier(name)
        && name.len() <= MAX_NAME_LEN
        && !is_keyword(name)
        && !is_builtin(name)
        && !name.starts_with("__")
}

/// Renames the synthetic identifiers still present in `unit`. Returns the
/// renamed unit and the records updated with their final names; on any
/// failure the input is returned unchanged.
pub fn naturalize_identifiers(
    unit: &ProgramUnit,
    names: &[SyntheticName],
    provider: &dyn NamingProvider,
) -> (ProgramUnit, Vec<SyntheticName>) {
    let present = identifiers_in(unit);
    let live: Vec<&SyntheticName> = names.iter().filter(|n| present.contains(&n.name)).collect();
    if live.is_empty() {
        return (unit.clone(), names.to_vec());
    }
    let mut scratch = unit.clone();
    let forbidden = Cx::prepare(&mut scratch).taken;
    let texts: Vec<String> = unit.files().map(|(_, f)| emit_module(&f.module)).collect();
    let synthetic: Vec<String> = live.iter().map(|n| n.name.clone()).collect();
    let requests: Vec<NamingRequest> = live
        .iter()
        .map(|n| NamingRequest {
            identifier: n.name.clone(),
            kind: n.kind,
            role: Some(n.role.clone()),
            context: context_snippet(&texts, &n.name),
            forbidden: forbidden.clone(),
            hints: n.hints.clone(),
            synthetic: synthetic.clone(),
        })
        .collect();
    let renames = choose_names(&requests, provider);

    let mut out = unit.clone();
    for (old, new) in &renames {
        rename_everywhere(&mut out, old, new);
    }
    if let Err(e) = check_reparses(&out) {
        log::warn!("naturalization of {} discarded: {e}", unit.manifest.id);
        return (unit.clone(), names.to_vec());
    }
    let updated = names
        .iter()
        .map(|n| match renames.get(&n.name) {
            Some(new) => SyntheticName {
                name: new.clone(),
                generated: Some(n.generated.clone().unwrap_or_else(|| n.name.clone())),
                ..n.clone()
            },
            None => n.clone(),
        })
        .collect();
    (out, updated)
}

/// One accepted name per request: the provider's proposal, one retry for
/// rejected proposals, then the fallback.
fn choose_names(requests: &[NamingRequest], provider: &dyn NamingProvider) -> BTreeMap<String, String> {
    let (proposals, reachable) = match provider.propose(requests) {
        Ok(p) => (p, true),
        Err(e) => {
            log::warn!("{e}; using fallback names");
            (BTreeMap::new(), false)
        }
    };
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut out = BTreeMap::new();
    for r in requests {
        let ok = |n: &String, used: &BTreeSet<String>| {
            is_acceptable(n)
                && !r.forbidden.contains(n)
                && !used.contains(n)
                && (r.kind != NameKind::Class || n.starts_with(|c: char| c.is_ascii_uppercase()))
        };
        let mut chosen = proposals.get(&r.identifier).filter(|n| ok(n, &used)).cloned();
        if chosen.is_none() && reachable && !provider.is_fallback() {
            let mut retry = r.clone();
            retry.forbidden.extend(used.iter().cloned());
            retry.forbidden.extend(proposals.get(&r.identifier).cloned());
            chosen = provider
                .propose(std::slice::from_ref(&retry))
                .ok()
                .and_then(|m| m.get(&r.identifier).cloned())
                .filter(|n| ok(n, &used));
        }
        let name = chosen.unwrap_or_else(|| {
            let mut f = r.clone();
            f.forbidden.extend(used.iter().cloned());
            fallback_rename(&f)
        });
        used.insert(name.clone());
        if name != r.identifier {
            out.insert(r.identifier.clone(), name);
        }
    }
    out
}

fn identifiers_in(unit: &ProgramUnit) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (_, f) in unit.files() {
        walk_stmt_idents(&f.module.body, &mut |id| {
            out.insert(id.name.clone());
        });
    }
    out
}

/// Up to `CONTEXT_RADIUS` lines on either side of the first line that uses
/// `name` as a whole word.
fn context_snippet(texts: &[String], name: &str) -> String {
    for text in texts {
        let lines: Vec<&str> = text.lines().collect();
        let hit = lines.iter().position(|l| {
            l.split(|c: char| !(c.is_alphanumeric() || c == '_'))
                .any(|w| w == name)
        });
        if let Some(i) = hit {
            let lo = i.saturating_sub(CONTEXT_RADIUS);
            let hi = (i + CONTEXT_RADIUS).min(lines.len());
            return lines[lo..hi].join("\n") + "\n";
        }
    }
    String::new()
}
