//! JSON and equatorial-state views of an extent result.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ExtentResult, TermId};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TermJson {
    Diagonal { a: Vec<u8>, b: Vec<u8>, re: f64, im: f64 },
    Clifford { symplectic_index: u64, phase_bits: u32, re: f64, im: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionJson {
    pub group_order: usize,
    pub generators: Vec<Vec<usize>>,
    pub reduced_columns: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub n: usize,
    pub dictionary: String,
    pub reduction: Option<ReductionJson>,
    pub extent: f64,
    pub l1: f64,
    pub residual: f64,
    pub terms: Vec<TermJson>,
}

impl ExtentResult {
    pub fn to_json(&self) -> DecompositionJson {
        let terms = self
            .decomposition
            .iter()
            .map(|(id, x)| match id {
                TermId::Diagonal(c) => TermJson::Diagonal { a: c.a().to_vec(), b: c.b_bits(), re: x.re, im: x.im },
                TermId::Clifford(c) => TermJson::Clifford {
                    symplectic_index: c.symplectic_index,
                    phase_bits: c.phase_bits,
                    re: x.re,
                    im: x.im,
                },
            })
            .collect();
        DecompositionJson {
            n: self.n,
            dictionary: self.dictionary.name().to_string(),
            reduction: self.reduction.as_ref().map(|r| ReductionJson {
                group_order: r.group_order,
                generators: r.generators.clone(),
                reduced_columns: r.reduced_columns,
            }),
            extent: self.extent,
            l1: self.l1,
            residual: self.residual,
            terms,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StateTerm {
    /// Amplitudes of `D|+>^n`.
    pub amplitudes: Vec<Complex64>,
    pub coefficient: Complex64,
}

#[derive(Clone, Debug)]
pub struct StateDecomposition {
    pub n: usize,
    pub terms: Vec<StateTerm>,
    pub l1: f64,
    /// `||sum_k x_k D_k|+>^n - U|+>^n||_inf`.
    pub residual: f64,
}

/// Maps each diagonal term `D` to the equatorial state `D|+>^n`.
pub fn export_state_decomposition(r: &ExtentResult) -> Result<StateDecomposition> {
    if !r.dictionary.is_diagonal() {
        return Err(Error::InvalidInput(format!(
            "state export needs a diagonal dictionary, got {}",
            r.dictionary.name()
        )));
    }
    let dim = 1usize << r.n;
    let amp = 1.0 / (dim as f64).sqrt();
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    let mut terms = Vec::with_capacity(r.decomposition.len());
    for (id, x) in &r.decomposition {
        let TermId::Diagonal(code) = id else {
            return Err(Error::InvalidInput("non-diagonal term in a diagonal decomposition".into()));
        };
        let amplitudes: Vec<Complex64> = code.to_vector().into_iter().map(|z| z * amp).collect();
        for (s, a) in acc.iter_mut().zip(&amplitudes) {
            *s += x * a;
        }
        terms.push(StateTerm { amplitudes, coefficient: *x });
    }
    let target = r.target_matrix.diagonal();
    let residual = acc.iter().zip(&target).map(|(s, t)| (s - t * amp).norm()).fold(0.0, f64::max);
    let l1 = terms.iter().map(|t| t.coefficient.norm()).sum();
    Ok(StateDecomposition { n: r.n, terms, l1, residual })
}
