//! Weight vectors on the unit sphere of the nonnegative orthant and the
//! linear scalarization they induce on objective space.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{dominance, Dominance};
use crate::vecmath::{dot, nrm2};

/// Nonnegative weights normalized to unit Euclidean norm.
///
/// Construction is the only way to obtain one, so every `WeightVector` in the
/// program satisfies the invariant `z >= 0`, `||z|| = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Normalize `raw` onto the unit sphere; see [`normalize_weights`].
    pub fn new(raw: &[f64]) -> Result<Self> {
        normalize_weights(raw)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when every component is strictly positive.
    pub fn is_strict(&self) -> bool {
        self.0.iter().all(|&z| z > 0.0)
    }
}

impl AsRef<[f64]> for WeightVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Scale a nonnegative, not-all-zero vector to unit Euclidean norm.
///
/// Rejected inputs: empty vectors, negative or non-finite components, and the
/// zero vector. Already-normalized input is returned bit-for-bit unchanged.
pub fn normalize_weights(raw: &[f64]) -> Result<WeightVector> {
    if raw.is_empty() {
        return Err(Error::Weight("weight vector is empty".into()));
    }
    for (i, &w) in raw.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::Weight(format!("weight {i} is not finite")));
        }
        if w < 0.0 {
            return Err(Error::Weight(format!("weight {i} is negative ({w})")));
        }
    }
    let norm = nrm2(raw);
    if norm == 0.0 {
        return Err(Error::Weight("weight vector is all zeros".into()));
    }
    if norm == 1.0 {
        return Ok(WeightVector(raw.to_vec()));
    }
    Ok(WeightVector(raw.iter().map(|w| w / norm).collect()))
}

/// Linear scalarization `<f, z>` of an objective vector.
pub fn scalarize(f: &[f64], z: &WeightVector) -> Result<f64> {
    if f.len() != z.len() {
        return Err(Error::Contract(format!(
            "objective vector has {} components but the weight vector has {}",
            f.len(),
            z.len()
        )));
    }
    let v = dot(f, z.as_slice());
    if !v.is_finite() {
        return Err(Error::Evaluation(
            "scalarized objective is not finite".into(),
        ));
    }
    Ok(v)
}

/// A pair on which the scalarized order disagreed with the dominance order.
#[derive(Clone, Debug, Serialize)]
pub struct RepresentationViolation {
    /// Index of the offending pair in the input slice.
    pub pair: usize,
    pub relation: Dominance,
    pub lhs: f64,
    pub rhs: f64,
}

/// Check that scalarization represents dominance on a set of sample pairs:
/// weak dominance must give `<a,z> <= <b,z>` (within `tol`), and strict
/// dominance under a strictly positive weight must give a strict inequality.
/// Returns the list of violations (empty when the order is respected).
pub fn strict_representation_check(
    pairs: &[(Vec<f64>, Vec<f64>)],
    z: &WeightVector,
    tol: f64,
) -> Result<Vec<RepresentationViolation>> {
    let mut violations = Vec::new();
    for (idx, (a, b)) in pairs.iter().enumerate() {
        if a.len() != z.len() || b.len() != z.len() {
            return Err(Error::Contract(format!(
                "pair {idx} does not match the weight dimension"
            )));
        }
        let relation = dominance(a, b, tol);
        let lhs = scalarize(a, z)?;
        let rhs = scalarize(b, z)?;
        let bad = match relation {
            Dominance::StrictlyDominates if z.is_strict() => lhs >= rhs,
            Dominance::StrictlyDominates | Dominance::WeaklyDominates => lhs > rhs + tol,
            Dominance::Equal => (lhs - rhs).abs() > tol * z.len() as f64,
            Dominance::Incomparable => false,
        };
        if bad {
            violations.push(RepresentationViolation {
                pair: idx,
                relation,
                lhs,
                rhs,
            });
        }
    }
    Ok(violations)
}
