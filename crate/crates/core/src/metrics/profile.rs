//! Reference profiles: per-metric thresholds taken as corpus means.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{
    complexity_vector, readability_vector, MetricsError, COMPLEXITY_KEYS, READABILITY_KEYS,
};
use crate::unit::ProgramUnit;
use crate::SCHEMA_VERSION;

/// Means below this value are replaced by it so ratios stay defined.
pub const THRESHOLD_FLOOR: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub corpus: String,
    pub date: String,
    pub units: usize,
    /// Metrics whose corpus mean was zero and got the floor value.
    #[serde(default)]
    pub floored: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct ReferenceProfile {
    pub ct: [f64; 7],
    pub rt: [f64; 13],
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    #[serde(default = "default_schema")]
    schema_version: u32,
    complexity_thresholds: serde_json::Map<String, serde_json::Value>,
    readability_thresholds: serde_json::Map<String, serde_json::Value>,
    provenance: Provenance,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn read_thresholds<const N: usize>(
    map: &serde_json::Map<String, serde_json::Value>,
    keys: [&str; N],
) -> Result<[f64; N], MetricsError> {
    let mut out = [0.0; N];
    for (i, k) in keys.iter().enumerate() {
        out[i] = map
            .get(*k)
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| MetricsError::InvalidProfile(format!("missing threshold {k}")))?;
    }
    if let Some(extra) = map.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(MetricsError::InvalidProfile(format!("unknown threshold {extra}")));
    }
    Ok(out)
}

impl TryFrom<RawProfile> for ReferenceProfile {
    type Error = MetricsError;

    fn try_from(raw: RawProfile) -> Result<Self, Self::Error> {
        let p = ReferenceProfile {
            ct: read_thresholds(&raw.complexity_thresholds, COMPLEXITY_KEYS)?,
            rt: read_thresholds(&raw.readability_thresholds, READABILITY_KEYS)?,
            provenance: raw.provenance,
        };
        p.validate()?;
        Ok(p)
    }
}

impl From<ReferenceProfile> for RawProfile {
    fn from(p: ReferenceProfile) -> Self {
        let map = |keys: &[&str], vals: &[f64]| {
            keys.iter()
                .zip(vals)
                .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
                .collect()
        };
        RawProfile {
            schema_version: SCHEMA_VERSION,
            complexity_thresholds: map(&COMPLEXITY_KEYS, &p.ct),
            readability_thresholds: map(&READABILITY_KEYS, &p.rt),
            provenance: p.provenance,
        }
    }
}

impl ReferenceProfile {
    /// Rejects non-positive or non-finite thresholds.
    pub fn validate(&self) -> Result<(), MetricsError> {
        let named = COMPLEXITY_KEYS
            .iter()
            .zip(self.ct.iter())
            .chain(READABILITY_KEYS.iter().zip(self.rt.iter()));
        for (k, v) in named {
            if !(v.is_finite() && *v > 0.0) {
                return Err(MetricsError::InvalidProfile(format!(
                    "threshold {k} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, MetricsError> {
        serde_json::from_str(text).map_err(|e| {
            // errors raised by TryFrom come back wrapped in serde's message
            MetricsError::InvalidProfile(e.to_string())
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes") + "\n"
    }

    /// The profile shipped with the crate, computed from the bundled
    /// reference corpus.
    pub fn shipped() -> ReferenceProfile {
        Self::from_json(include_str!("../../data/default_profile.json"))
            .expect("shipped profile is valid")
    }
}

/// Thresholds as arithmetic means of every metric over `units`, with zero
/// means floored.
pub fn profile_corpus(
    units: &[ProgramUnit],
    corpus: &str,
    date: &str,
) -> Result<ReferenceProfile, MetricsError> {
    if units.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut ct = [0.0; 7];
    let mut rt = [0.0; 13];
    for u in units {
        for (acc, v) in ct.iter_mut().zip(complexity_vector(u).values()) {
            *acc += v;
        }
        for (acc, v) in rt.iter_mut().zip(readability_vector(u).values()) {
            *acc += v;
        }
    }
    let n = units.len() as f64;
    let mut floored = Vec::new();
    let mut finish = |vals: &mut [f64], keys: &[&str]| {
        for (v, k) in vals.iter_mut().zip(keys) {
            *v /= n;
            if *v <= 0.0 {
                *v = THRESHOLD_FLOOR;
                floored.push(k.to_string());
            }
        }
    };
    finish(&mut ct, &COMPLEXITY_KEYS);
    finish(&mut rt, &READABILITY_KEYS);
    let p = ReferenceProfile {
        ct,
        rt,
        provenance: Provenance {
            corpus: corpus.to_string(),
            date: date.to_string(),
            units: units.len(),
            floored,
        },
    };
    p.validate()?;
    Ok(p)
}

/// Current UTC date as `YYYY-MM-DD`.
pub fn today() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    civil_date((secs / 86_400) as i64)
}

/// Converts days since 1970-01-01 to a proleptic Gregorian date.
fn civil_date(days: i64) -> String {
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = yoe + era * 400 + i64::from(m <= 2);
    format!("{y:04}-{m:02}-{d:02}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(src: &str) -> ProgramUnit {
        ProgramUnit::from_source("u", src).unwrap()
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert_eq!(profile_corpus(&[], "x", "d"), Err(MetricsError::EmptyCorpus));
    }

    #[test]
    fn single_program_thresholds_equal_its_metrics() {
        let u = unit("def f(x):\n    if x:\n        return [x]\n    return x\n");
        let p = profile_corpus(std::slice::from_ref(&u), "one", "d").unwrap();
        let cv = complexity_vector(&u).values();
        for i in 0..7 {
            let expect = if cv[i] == 0.0 { 1.0 } else { cv[i] };
            assert_eq!(p.ct[i], expect);
        }
        assert_eq!(p.rt, readability_vector(&u).values().map(|v| if v == 0.0 { 1.0 } else { v }));
        assert!(p.provenance.floored.contains(&"C5".to_string()));
    }

    #[test]
    fn means_over_two_programs() {
        let a = unit("def f(x):\n    return x\n");
        let b = unit("def f(x):\n    if x:\n        return 1\n    while x:\n        x -= 1\n    return 0\n");
        let p = profile_corpus(&[a, b], "two", "d").unwrap();
        // C1 = 1 and 3
        assert_eq!(p.ct[0], 2.0);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let u = unit("x = 1\n");
        let p = profile_corpus(&[u], "c", "2024-01-01").unwrap();
        let json = p.to_json();
        assert!(json.contains("\"schema_version\""));
        assert!(json.contains("\"C7\""));
        assert_eq!(ReferenceProfile::from_json(&json).unwrap(), p);
        let bad = json.replacen("\"C1\": 1.0", "\"C1\": 0.0", 1);
        assert!(matches!(
            ReferenceProfile::from_json(&bad),
            Err(MetricsError::InvalidProfile(_))
        ));
        let missing = json.replacen("\"C1\"", "\"CX\"", 1);
        assert!(ReferenceProfile::from_json(&missing).is_err());
    }

    #[test]
    fn civil_dates() {
        assert_eq!(civil_date(0), "1970-01-01");
        assert_eq!(civil_date(19_723), "2024-01-01");
        assert_eq!(civil_date(11_016), "2000-02-29");
    }

    #[test]
    fn shipped_profile_loads() {
        ReferenceProfile::shipped().validate().unwrap();
    }
}
