//! Complexity and readability measurement, reference profiles and the
//! relative complexity/readability fitness scores.

pub mod complexity;
pub mod fitness;
pub mod profile;
pub mod readability;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use complexity::complexity_vector;
pub use fitness::{relative_complexity, relative_readability, FitnessScore};
pub use profile::{profile_corpus, ReferenceProfile};
pub use readability::{readability_vector, token_entropy};

use crate::unit::ProgramUnit;

pub const COMPLEXITY_KEYS: [&str; 7] = ["C1", "C2", "C3", "C4", "C5", "C6", "C7"];
pub const READABILITY_KEYS: [&str; 13] = [
    "R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9", "R10", "R11", "R12", "R13",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("empty corpus: no program units to profile")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityVector {
    #[serde(rename = "C1")]
    pub c1: u32,
    #[serde(rename = "C2")]
    pub c2: u32,
    #[serde(rename = "C3")]
    pub c3: u32,
    #[serde(rename = "C4")]
    pub c4: u32,
    #[serde(rename = "C5")]
    pub c5: u32,
    #[serde(rename = "C6")]
    pub c6: u32,
    #[serde(rename = "C7")]
    pub c7: u32,
    /// Boolean connectors and chained comparisons across all predicates.
    #[serde(rename = "C2_connectors")]
    pub c2_connectors: u32,
}

impl ComplexityVector {
    pub fn values(&self) -> [f64; 7] {
        [self.c1, self.c2, self.c3, self.c4, self.c5, self.c6, self.c7].map(f64::from)
    }

    pub fn add(&mut self, o: &ComplexityVector) {
        self.c1 += o.c1;
        self.c2 += o.c2;
        self.c3 += o.c3;
        self.c4 += o.c4;
        self.c5 += o.c5;
        self.c6 += o.c6;
        self.c7 += o.c7;
        self.c2_connectors += o.c2_connectors;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityVector {
    #[serde(rename = "R1")]
    pub r1: u32,
    #[serde(rename = "R2")]
    pub r2: u32,
    #[serde(rename = "R3")]
    pub r3: u32,
    #[serde(rename = "R4")]
    pub r4: u32,
    #[serde(rename = "R5")]
    pub r5: u32,
    #[serde(rename = "R6")]
    pub r6: u32,
    #[serde(rename = "R7")]
    pub r7: u32,
    #[serde(rename = "R8")]
    pub r8: u32,
    #[serde(rename = "R9")]
    pub r9: u32,
    #[serde(rename = "R10")]
    pub r10: u32,
    #[serde(rename = "R11")]
    pub r11: u32,
    #[serde(rename = "R12")]
    pub r12: u32,
    #[serde(rename = "R13")]
    pub r13: f64,
}

impl ReadabilityVector {
    pub fn values(&self) -> [f64; 13] {
        [
            f64::from(self.r1),
            f64::from(self.r2),
            f64::from(self.r3),
            f64::from(self.r4),
            f64::from(self.r5),
            f64::from(self.r6),
            f64::from(self.r7),
            f64::from(self.r8),
            f64::from(self.r9),
            f64::from(self.r10),
            f64::from(self.r11),
            f64::from(self.r12),
            self.r13,
        ]
    }
}

/// All measurements of one program unit under a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub complexity: ComplexityVector,
    pub readability: ReadabilityVector,
    pub fitness: FitnessScore,
}

pub fn measure(unit: &ProgramUnit, profile: &ReferenceProfile) -> Measurement {
    let complexity = complexity_vector(unit);
    let readability = readability_vector(unit);
    let fitness = FitnessScore::compute(&complexity, &readability, profile);
    Measurement {
        complexity,
        readability,
        fitness,
    }
}
