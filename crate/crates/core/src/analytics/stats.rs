//! Summary statistics and the four raw metrics.
//!
//! Inputs are sorted before summation, so every result depends only on the
//! multiset of values and never on their order.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::AnalyticsError;
use crate::Scalar;

/// z-value of the normal-approximation 95% interval.
pub const Z95: f64 = 1.96;

fn sorted<S: Scalar>(xs: &[S]) -> Vec<S> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v
}

pub fn mean<S: Scalar>(xs: &[S]) -> S {
    if xs.is_empty() {
        return S::zero();
    }
    sorted(xs).into_iter().sum::<S>() / S::from_count(xs.len())
}

/// Sum of squared deviations from the mean.
fn squared_deviations<S: Scalar>(xs: &[S]) -> S {
    if xs.windows(2).all(|w| w[0] == w[1]) {
        return S::zero();
    }
    let m = mean(xs);
    let devs: Vec<S> = xs.iter().map(|&x| (x - m) * (x - m)).collect();
    sorted(&devs).into_iter().sum()
}

/// Divides by N.
pub fn population_variance<S: Scalar>(xs: &[S]) -> S {
    if xs.is_empty() {
        return S::zero();
    }
    squared_deviations(xs) / S::from_count(xs.len())
}

/// Divides by N - 1; zero for fewer than two values.
pub fn sample_std<S: Scalar>(xs: &[S]) -> S {
    if xs.len() < 2 {
        return S::zero();
    }
    (squared_deviations(xs) / S::from_count(xs.len() - 1)).sqrt()
}

/// Half-width of the 95% interval: 1.96 · s / √n.
pub fn ci95<S: Scalar>(xs: &[S]) -> S {
    if xs.len() < 2 {
        return S::zero();
    }
    S::lit(Z95) * sample_std(xs) / S::from_count(xs.len()).sqrt()
}

/// Variance of the whole result set.
pub fn metric_internal_variability<S: Scalar>(results: &[S]) -> Result<S, AnalyticsError> {
    if results.len() < 2 {
        return Err(AnalyticsError::TooFewResults {
            needed: 2,
            got: results.len(),
        });
    }
    Ok(population_variance(results))
}

/// One outcome tagged with the cell it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct LanguageObservation<S> {
    pub language: String,
    /// Personality combination.
    pub combo: String,
    pub rounds_known: bool,
    pub value: S,
}

/// For each (combo, rounds-known) cell: the mean per language, then the
/// variance across languages. The result is the mean over cells.
pub fn metric_cross_language_inconsistency<S: Scalar>(
    observations: &[LanguageObservation<S>],
) -> Result<S, AnalyticsError> {
    let mut cells: BTreeMap<(&str, bool), BTreeMap<&str, Vec<S>>> = BTreeMap::new();
    for o in observations {
        cells
            .entry((o.combo.as_str(), o.rounds_known))
            .or_default()
            .entry(o.language.as_str())
            .or_default()
            .push(o.value);
    }
    if cells.is_empty() {
        return Err(AnalyticsError::TooFewResults { needed: 1, got: 0 });
    }
    let per_cell: Vec<S> = cells
        .values()
        .map(|langs| {
            let means: Vec<S> = langs.values().map(|v| mean(v)).collect();
            population_variance(&means)
        })
        .collect();
    Ok(mean(&per_cell))
}

/// Mean absolute per-round gap between two trajectories.
pub fn metric_payoff_sensitivity<S: Scalar>(harsh: &[S], mild: &[S]) -> Result<S, AnalyticsError> {
    if harsh.len() != mild.len() {
        return Err(AnalyticsError::LengthMismatch {
            left: harsh.len(),
            right: mild.len(),
        });
    }
    if harsh.is_empty() {
        return Err(AnalyticsError::NoRuns);
    }
    let gaps: Vec<S> = harsh.iter().zip(mild).map(|(&h, &m)| (h - m).abs()).collect();
    Ok(mean(&gaps))
}

/// Variance across rounds of each variant's trajectory, averaged over
/// variants.
pub fn metric_round_variability<S: Scalar>(series: &[Vec<S>]) -> Result<S, AnalyticsError> {
    if series.is_empty() {
        return Err(AnalyticsError::NoRuns);
    }
    if let Some(short) = series.iter().find(|s| s.len() < 2) {
        return Err(AnalyticsError::TooFewRounds { got: short.len() });
    }
    let per_variant: Vec<S> = series.iter().map(|s| population_variance(s)).collect();
    Ok(mean(&per_variant))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn ci_examples() {
        assert_eq!(mean(&[5.0, 5.0, 5.0, 5.0]), 5.0);
        assert_eq!(ci95(&[5.0, 5.0, 5.0, 5.0]), 0.0);
        assert!(close(ci95(&[0.0, 10.0]), 9.8));
        assert_eq!(ci95(&[7.0]), 0.0);
    }

    #[test]
    fn internal_variability_examples() {
        assert_eq!(metric_internal_variability(&[4.0, 4.0, 4.0]).unwrap(), 0.0);
        assert_eq!(metric_internal_variability(&[0.0, 2.0]).unwrap(), 1.0);
        assert!(close(metric_internal_variability(&[0.0, 0.0, 6.0]).unwrap(), 8.0));
        assert!(metric_internal_variability(&[1.0]).is_err());
    }

    fn obs(language: &str, combo: &str, value: f64) -> LanguageObservation<f64> {
        LanguageObservation {
            language: language.into(),
            combo: combo.into(),
            rounds_known: true,
            value,
        }
    }

    #[test]
    fn cross_language_examples() {
        let same = [obs("en", "cc", 3.0), obs("fr", "cc", 3.0)];
        assert_eq!(metric_cross_language_inconsistency(&same).unwrap(), 0.0);
        let one = [obs("en", "cc", 0.0), obs("fr", "cc", 1.0), obs("fr", "cc", 3.0)];
        assert_eq!(metric_cross_language_inconsistency(&one).unwrap(), 1.0);
        // variances 1 and 3
        let s3 = 3f64.sqrt();
        let two = [
            obs("en", "cc", 0.0),
            obs("fr", "cc", 2.0),
            obs("en", "ss", 0.0),
            obs("fr", "ss", 2.0 * s3),
        ];
        assert!(close(metric_cross_language_inconsistency(&two).unwrap(), 2.0));
    }

    #[test]
    fn payoff_sensitivity_examples() {
        assert_eq!(metric_payoff_sensitivity(&[0.5, 1.0], &[0.5, 1.0]).unwrap(), 0.0);
        assert_eq!(metric_payoff_sensitivity(&[1.0, 1.0], &[-1.0, 0.0]).unwrap(), 1.5);
        assert_eq!(metric_payoff_sensitivity(&[0.0], &[0.0]).unwrap(), 0.0);
        assert!(metric_payoff_sensitivity(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn round_variability_examples() {
        assert_eq!(metric_round_variability(&[vec![0.2, 0.2, 0.2]]).unwrap(), 0.0);
        assert_eq!(metric_round_variability(&[vec![1.0, -1.0]]).unwrap(), 1.0);
        let s2 = 2f64.sqrt();
        let three = [vec![1.0, -1.0], vec![0.0, 0.0], vec![s2, -s2]];
        assert!(close(metric_round_variability(&three).unwrap(), 1.0));
        assert!(metric_round_variability(&[vec![1.0]]).is_err());
    }

    #[test]
    fn f32_agrees_with_f64() {
        let xs = [0.0f32, 0.0, 6.0];
        assert!((metric_internal_variability(&xs).unwrap() - 8.0).abs() < 1e-5);
        assert!((ci95(&[0.0f32, 10.0]) - 9.8).abs() < 1e-4);
    }
}
