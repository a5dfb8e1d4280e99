//! Fusion of the distributions collected at a single word, and the final
//! argmax decode.

use std::f64::consts::PI;

use crate::config::CombinerKind;
use crate::error::{Error, Result};
use crate::types::{Distribution, PunctClass, NUM_CLASSES};
use crate::window::Contribution;

/// Weights below this are treated as zero by the entropy combiner.
const ENTROPY_WEIGHT_FLOOR: f64 = 1e-12;

fn empty() -> Error {
    Error::Coverage("no distributions to combine".to_string())
}

fn weighted_sum<'a>(items: impl Iterator<Item = (&'a Distribution, f64)>) -> Distribution {
    let mut acc = [0.0; NUM_CLASSES];
    for (dist, weight) in items {
        for (a, p) in acc.iter_mut().zip(dist.probs()) {
            *a += weight * p;
        }
    }
    Distribution::from_weights(acc)
}

/// Element-wise arithmetic mean.
pub fn combine_mean(dists: &[Distribution]) -> Result<Distribution> {
    if dists.is_empty() {
        return Err(empty());
    }
    let w = 1.0 / dists.len() as f64;
    Ok(weighted_sum(dists.iter().map(|d| (d, w))))
}

/// Weighted sum with each weight proportional to `ln 4 - H(p)`, so confident
/// distributions dominate. Falls back to the mean when every input is
/// (numerically) uniform.
pub fn combine_entropy_weighted(dists: &[Distribution]) -> Result<Distribution> {
    if dists.is_empty() {
        return Err(empty());
    }
    let max_entropy = (NUM_CLASSES as f64).ln();
    let weights: Vec<f64> = dists
        .iter()
        .map(|d| (max_entropy - d.entropy()).max(0.0))
        .collect();
    if weights.iter().all(|w| *w < ENTROPY_WEIGHT_FLOOR) {
        return combine_mean(dists);
    }
    let total: f64 = weights.iter().sum();
    Ok(weighted_sum(
        dists.iter().zip(weights.iter().map(|w| w / total)),
    ))
}

/// Hamming coefficient for position `pos` of a window of `len` positions.
///
/// A one-position window gets the mid-slope value 0.54.
pub fn hamming_weight(pos: usize, len: usize) -> f64 {
    if len <= 1 {
        return 0.54;
    }
    0.54 - 0.46 * (2.0 * PI * pos as f64 / (len - 1) as f64).cos()
}

/// Weighted sum with Hamming weights taken from each prediction's position
/// inside its source window: edges count little, centres count most.
pub fn combine_hamming(contribs: &[Contribution]) -> Result<Distribution> {
    if contribs.is_empty() {
        return Err(empty());
    }
    if let Some(c) = contribs.iter().find(|c| c.pos >= c.win_len) {
        return Err(Error::Coverage(format!(
            "position {} outside window of length {}",
            c.pos, c.win_len
        )));
    }
    let weights: Vec<f64> = contribs
        .iter()
        .map(|c| hamming_weight(c.pos, c.win_len))
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(weighted_sum(
        contribs
            .iter()
            .zip(&weights)
            .map(|(c, w)| (&c.dist, w / total)),
    ))
}

/// Fuses one word's contributions with the given rule.
pub fn combine(kind: CombinerKind, contribs: &[Contribution]) -> Result<Distribution> {
    match kind {
        CombinerKind::Hamming => combine_hamming(contribs),
        CombinerKind::Mean | CombinerKind::EntropyWeighted => {
            let dists: Vec<Distribution> = contribs.iter().map(|c| c.dist).collect();
            if kind == CombinerKind::Mean {
                combine_mean(&dists)
            } else {
                combine_entropy_weighted(&dists)
            }
        }
    }
}

/// Argmax over the classes; ties go to the lowest index, so `O` wins a tie.
pub fn decode_label(dist: &Distribution) -> PunctClass {
    let mut best = 0;
    for (i, p) in dist.probs().iter().enumerate().skip(1) {
        if *p > dist.probs()[best] {
            best = i;
        }
    }
    PunctClass::ALL[best]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: [f64; 4]) -> Distribution {
        Distribution::new(p).unwrap()
    }

    fn close(a: &Distribution, b: [f64; 4], tol: f64) {
        for (x, y) in a.probs().iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn mean_of_two() {
        let out = combine_mean(&[dist([0.8, 0.2, 0.0, 0.0]), dist([0.6, 0.4, 0.0, 0.0])]).unwrap();
        close(&out, [0.7, 0.3, 0.0, 0.0], 1e-12);
    }

    #[test]
    fn mean_singleton_is_identity() {
        let d = dist([0.1, 0.2, 0.3, 0.4]);
        close(&combine_mean(&[d]).unwrap(), *d.probs(), 1e-15);
    }

    #[test]
    fn empty_inputs_are_coverage_errors() {
        assert_eq!(
            combine_mean(&[]).unwrap_err().category().as_str(),
            "coverage"
        );
        assert!(combine_entropy_weighted(&[]).is_err());
        assert!(combine_hamming(&[]).is_err());
    }

    #[test]
    fn entropy_all_uniform_falls_back_to_mean() {
        let out =
            combine_entropy_weighted(&[Distribution::UNIFORM, Distribution::UNIFORM]).unwrap();
        close(&out, [0.25; 4], 1e-15);
    }

    #[test]
    fn entropy_one_hot_dominates_uniform() {
        let hot = Distribution::one_hot(PunctClass::Question);
        let out = combine_entropy_weighted(&[hot, Distribution::UNIFORM]).unwrap();
        close(&out, [0.0, 0.0, 0.0, 1.0], 1e-12);
    }

    #[test]
    fn entropy_weighted_hand_values() {
        // Weights ln4 - H: 0.445846372464564 and 0.106440135286223,
        // computed independently.
        let out =
            combine_entropy_weighted(&[dist([0.7, 0.1, 0.1, 0.1]), dist([0.4, 0.3, 0.2, 0.1])])
                .unwrap();
        close(
            &out,
            [
                0.642_182_109_941_610_4,
                0.138_545_260_038_926_4,
                0.119_272_630_019_463_19,
                0.1,
            ],
            1e-12,
        );
    }

    #[test]
    fn hamming_coefficients() {
        assert!((hamming_weight(0, 20) - 0.08).abs() < 1e-12);
        assert!((hamming_weight(19, 20) - 0.08).abs() < 1e-12);
        assert!((hamming_weight(10, 21) - 1.0).abs() < 1e-12);
        assert!((hamming_weight(9, 20) - 0.993_726_199_565_252_3).abs() < 1e-12);
        assert_eq!(hamming_weight(0, 1), 0.54);
    }

    #[test]
    fn hamming_centre_beats_edge() {
        let edge = Contribution {
            dist: Distribution::one_hot(PunctClass::O),
            pos: 0,
            win_len: 20,
        };
        let centre = Contribution {
            dist: Distribution::one_hot(PunctClass::Period),
            pos: 9,
            win_len: 20,
        };
        let out = combine_hamming(&[edge, centre]).unwrap();
        close(
            &out,
            [0.074_506_890_147_964_83, 0.0, 0.925_493_109_852_035_3, 0.0],
            1e-12,
        );
    }

    #[test]
    fn hamming_rejects_bad_position() {
        let bad = Contribution {
            dist: Distribution::UNIFORM,
            pos: 5,
            win_len: 5,
        };
        assert!(combine_hamming(&[bad]).is_err());
    }

    #[test]
    fn argmax_with_ties() {
        assert_eq!(
            decode_label(&dist([0.1, 0.2, 0.6, 0.1])),
            PunctClass::Period
        );
        assert_eq!(decode_label(&Distribution::UNIFORM), PunctClass::O);
        assert_eq!(decode_label(&dist([0.1, 0.4, 0.1, 0.4])), PunctClass::Comma);
        for class in PunctClass::ALL {
            assert_eq!(decode_label(&Distribution::one_hot(class)), class);
        }
    }
}
