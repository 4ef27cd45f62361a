//! Relative complexity and relative readability.
//!
//! `rc_i = min(C_i / CT_i, 1)` and `rr_i = max(1 - R_i / RT_i, 0)`; the
//! scores are the plain means of the per-metric ratios.

use serde::{Deserialize, Serialize};

use super::{ComplexityVector, MetricsError, ReadabilityVector, ReferenceProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessScore {
    pub rc: f64,
    pub rr: f64,
    pub rc_i: Vec<f64>,
    pub rr_i: Vec<f64>,
}

impl FitnessScore {
    pub fn compute(
        cv: &ComplexityVector,
        rv: &ReadabilityVector,
        profile: &ReferenceProfile,
    ) -> FitnessScore {
        let (rc, rc_i) = clipped_ratios(&cv.values(), &profile.ct);
        let (rr, rr_i) = inverse_ratios(&rv.values(), &profile.rt);
        FitnessScore { rc, rr, rc_i, rr_i }
    }

    /// Set when some readability ratio is exhausted, i.e. a metric reached
    /// or passed its threshold.
    pub fn low_readability(&self) -> bool {
        self.rr_i.iter().any(|&r| r <= 0.0)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// `min(c_i / t_i, 1)` per metric and their mean. Thresholds must be
/// positive.
pub fn clipped_ratios(values: &[f64], thresholds: &[f64]) -> (f64, Vec<f64>) {
    let r: Vec<f64> = values
        .iter()
        .zip(thresholds)
        .map(|(c, t)| (c / t).clamp(0.0, 1.0))
        .collect();
    (mean(&r), r)
}

/// `max(1 - r_i / t_i, 0)` per metric and their mean. Thresholds must be
/// positive.
pub fn inverse_ratios(values: &[f64], thresholds: &[f64]) -> (f64, Vec<f64>) {
    let r: Vec<f64> = values
        .iter()
        .zip(thresholds)
        .map(|(v, t)| (1.0 - v / t).clamp(0.0, 1.0))
        .collect();
    (mean(&r), r)
}

fn check(thresholds: &[f64]) -> Result<(), MetricsError> {
    match thresholds.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        Some(t) => Err(MetricsError::InvalidProfile(format!(
            "threshold must be positive, got {t}"
        ))),
        None => Ok(()),
    }
}

pub fn relative_complexity(
    cv: &ComplexityVector,
    profile: &ReferenceProfile,
) -> Result<f64, MetricsError> {
    check(&profile.ct)?;
    Ok(clipped_ratios(&cv.values(), &profile.ct).0)
}

pub fn relative_readability(
    rv: &ReadabilityVector,
    profile: &ReferenceProfile,
) -> Result<f64, MetricsError> {
    check(&profile.rt)?;
    Ok(inverse_ratios(&rv.values(), &profile.rt).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::profile::Provenance;
    use proptest::prelude::*;

    fn profile(ct: [f64; 7], rt: [f64; 13]) -> ReferenceProfile {
        ReferenceProfile {
            ct,
            rt,
            provenance: Provenance {
                corpus: "t".into(),
                date: "d".into(),
                units: 1,
                floored: vec![],
            },
        }
    }

    #[test]
    fn toy_complexity_profile() {
        let (rc, parts) = clipped_ratios(&[1.0, 4.0], &[2.0, 2.0]);
        assert_eq!(parts, vec![0.5, 1.0]);
        assert!((rc - 0.75).abs() < 1e-12);
    }

    #[test]
    fn toy_readability_profile() {
        let (rr, parts) = inverse_ratios(&[5.0, 20.0], &[10.0, 10.0]);
        assert_eq!(parts, vec![0.5, 0.0]);
        assert!((rr - 0.25).abs() < 1e-12);
        let s = FitnessScore {
            rc: 0.0,
            rr,
            rc_i: vec![],
            rr_i: parts,
        };
        assert!(s.low_readability());
    }

    #[test]
    fn saturation_and_zero_readability_metrics() {
        let p = profile([1.0; 7], [5.0; 13]);
        let cv = ComplexityVector {
            c1: 3,
            c2: 1,
            c3: 2,
            c4: 9,
            c5: 1,
            c6: 1,
            c7: 1,
            c2_connectors: 0,
        };
        assert_eq!(relative_complexity(&cv, &p).unwrap(), 1.0);
        assert_eq!(relative_readability(&ReadabilityVector::default(), &p).unwrap(), 1.0);
    }

    #[test]
    fn non_positive_threshold_rejected() {
        let mut ct = [1.0; 7];
        ct[3] = 0.0;
        let p = profile(ct, [1.0; 13]);
        assert!(matches!(
            relative_complexity(&ComplexityVector::default(), &p),
            Err(MetricsError::InvalidProfile(_))
        ));
    }

    proptest! {
        #[test]
        fn scores_are_bounded(
            vals in proptest::collection::vec(0.0f64..1e4, 13),
            ts in proptest::collection::vec(0.01f64..1e3, 13),
        ) {
            let (rc, rci) = clipped_ratios(&vals[..7], &ts[..7]);
            let (rr, rri) = inverse_ratios(&vals, &ts);
            prop_assert!((0.0..=1.0).contains(&rc));
            prop_assert!((0.0..=1.0).contains(&rr));
            prop_assert!(rci.iter().chain(rri.iter()).all(|r| (0.0..=1.0).contains(r)));
        }

        #[test]
        fn clipping_is_monotone(
            vals in proptest::collection::vec(0.0f64..100.0, 7),
            ts in proptest::collection::vec(0.5f64..50.0, 7),
            idx in 0usize..7,
            bump in 0.0f64..50.0,
        ) {
            let (rc, _) = clipped_ratios(&vals, &ts);
            let (rr, _) = inverse_ratios(&vals, &ts);
            let mut up = vals.clone();
            up[idx] += bump;
            prop_assert!(clipped_ratios(&up, &ts).0 >= rc - 1e-12);
            prop_assert!(inverse_ratios(&up, &ts).0 <= rr + 1e-12);
        }
    }
}
