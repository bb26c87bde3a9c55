//! JSON document format for triples.

use serde::{Deserialize, Serialize};

use super::{FiniteTriple, RealStructure, RealStructureSigns, TripleError};
use crate::linalg::{CMatrix, Tolerance};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleDocument {
    pub hilbert_dim: usize,
    pub algebra_summands: Vec<usize>,
    pub rep_basis: Vec<CMatrix>,
    pub dirac: Option<CMatrix>,
    pub grading: Option<CMatrix>,
    pub real: Option<RealDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealDocument {
    pub unitary: CMatrix,
    pub epsilon: i64,
    pub epsilon_prime: i64,
    pub epsilon_double_prime: Option<i64>,
}

impl TripleDocument {
    pub fn into_triple(self) -> Result<FiniteTriple, TripleError> {
        let tol = match self.tol {
            Some(eps) => Tolerance::new(eps)?,
            None => Tolerance::default(),
        };
        let real = self
            .real
            .map(|r| -> Result<RealStructure, TripleError> {
                Ok(RealStructure {
                    unitary: r.unitary,
                    signs: RealStructureSigns::new(r.epsilon, r.epsilon_prime, r.epsilon_double_prime)?,
                })
            })
            .transpose()?;
        FiniteTriple::new(
            self.hilbert_dim,
            self.algebra_summands,
            self.rep_basis,
            self.dirac,
            self.grading,
            real,
            tol,
        )
    }

    pub fn from_triple(t: &FiniteTriple) -> Self {
        Self {
            hilbert_dim: t.hilbert_dim(),
            algebra_summands: t.algebra_summands().to_vec(),
            rep_basis: t.rep_basis().to_vec(),
            dirac: t.dirac().cloned(),
            grading: t.grading().cloned(),
            real: t.real().map(|j| RealDocument {
                unitary: j.unitary.clone(),
                epsilon: j.signs.epsilon.into(),
                epsilon_prime: j.signs.epsilon_prime.into(),
                epsilon_double_prime: j.signs.epsilon_double_prime.map(i64::from),
            }),
            tol: (t.tol() != Tolerance::default()).then(|| t.tol().eps()),
        }
    }
}

pub fn parse_triple(text: &str) -> Result<FiniteTriple, TripleError> {
    let doc: TripleDocument = serde_json::from_str(text).map_err(|e| TripleError::Parse(e.to_string()))?;
    doc.into_triple()
}

pub fn triple_to_json(t: &FiniteTriple) -> String {
    serde_json::to_string_pretty(&TripleDocument::from_triple(t)).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_triple::builders::{electrodynamics, two_point_real};
    use crate::linalg::C64;

    #[test]
    fn roundtrip_preserves_bits() {
        let t = electrodynamics(C64::new(0.1, 1.0 / 3.0)).unwrap();
        let back = parse_triple(&triple_to_json(&t)).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn malformed_documents_are_parse_errors() {
        assert!(matches!(parse_triple("{"), Err(TripleError::Parse(_))));
        let ragged = r#"{"hilbert_dim":2,"algebra_summands":[1],"rep_basis":[[[[1,0]],[[0,0],[1,0]]]],"dirac":null,"grading":null,"real":null}"#;
        assert!(matches!(parse_triple(ragged), Err(TripleError::Parse(_))));
    }

    #[test]
    fn bad_tolerance_rejected() {
        let mut doc = TripleDocument::from_triple(&two_point_real(C64::new(0.0, 0.0), 6).unwrap());
        doc.tol = Some(-1.0);
        assert!(matches!(doc.into_triple(), Err(TripleError::Linalg(_))));
    }

    #[test]
    fn sign_out_of_range_rejected() {
        let mut doc = TripleDocument::from_triple(&two_point_real(C64::new(0.0, 0.0), 6).unwrap());
        doc.real.as_mut().unwrap().epsilon = 3;
        assert!(matches!(doc.into_triple(), Err(TripleError::BadSign { .. })));
    }
}
