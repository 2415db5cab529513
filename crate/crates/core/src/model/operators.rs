//! Operators on the truncated qubit ⊗ Fock space.
//!
//! Basis ordering is qubit-major: `|g,0⟩, |g,1⟩, …, |g,N⟩, |e,0⟩, …, |e,N⟩`
//! with `N = n_fock`. Everything that indexes states relies on this.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::ModelParams;
use crate::error::{Error, Result};
use crate::numerics::matrix::{ComplexMatrix, ONE, ZERO};

/// A product basis state `|q, n⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BasisLabel {
    pub excited: bool,
    pub n: usize,
}

impl BasisLabel {
    pub const fn g(n: usize) -> Self {
        Self { excited: false, n }
    }

    pub const fn e(n: usize) -> Self {
        Self { excited: true, n }
    }

    /// Position in the qubit-major basis.
    pub fn index(&self, n_fock: usize) -> usize {
        usize::from(self.excited) * (n_fock + 1) + self.n
    }

    pub fn from_index(index: usize, n_fock: usize) -> Self {
        Self { excited: index > n_fock, n: index % (n_fock + 1) }
    }

    pub fn check(&self, n_fock: usize) -> Result<()> {
        if self.n > n_fock {
            return Err(Error::InvalidParams(format!("state {self} lies outside the Fock cutoff {n_fock}")));
        }
        Ok(())
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.excited { 'e' } else { 'g' }, self.n)
    }
}

impl TryFrom<String> for BasisLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BasisLabel> for String {
    fn from(l: BasisLabel) -> String {
        l.to_string()
    }
}

impl FromStr for BasisLabel {
    type Err = Error;

    /// Accepts `g0`, `e1`, `g,3` and `|e,2>`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !matches!(c, '|' | '>' | '⟩' | ',' | ' ')).collect();
        let mut chars = t.chars();
        let excited = match chars.next() {
            Some('g') | Some('G') => false,
            Some('e') | Some('E') => true,
            _ => return Err(Error::InvalidParams(format!("bad basis label `{s}`"))),
        };
        let n = chars.as_str().parse().map_err(|_| Error::InvalidParams(format!("bad basis label `{s}`")))?;
        Ok(Self { excited, n })
    }
}

/// Ladder and Pauli operators, each of dimension 2(n_fock + 1).
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub n_fock: usize,
    pub a: ComplexMatrix,
    pub a_dag: ComplexMatrix,
    pub sigma_z: ComplexMatrix,
    pub sigma_plus: ComplexMatrix,
    pub sigma_minus: ComplexMatrix,
    pub sigma_x: ComplexMatrix,
}

impl OperatorSet {
    /// Builds the operators for any cutoff `n_fock >= 1`.
    pub fn new(n_fock: usize) -> Self {
        let nf = n_fock + 1;
        let fock_a =
            ComplexMatrix::from_fn(nf, nf, |i, j| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { ZERO });
        let id_f = ComplexMatrix::identity(nf);
        let id_q = ComplexMatrix::identity(2);
        // qubit index 0 = g, 1 = e
        let sz = ComplexMatrix::from_diag(&[-ONE, ONE]);
        let sp = ComplexMatrix::from_vec(2, 2, vec![ZERO, ZERO, ONE, ZERO]);
        let sm = sp.adjoint();

        let a = id_q.kron(&fock_a);
        let sigma_plus = sp.kron(&id_f);
        let sigma_minus = sm.kron(&id_f);
        Self {
            n_fock,
            a_dag: a.adjoint(),
            a,
            sigma_z: sz.kron(&id_f),
            sigma_x: &sigma_plus + &sigma_minus,
            sigma_plus,
            sigma_minus,
        }
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_fock + 1)
    }

    /// a†a
    pub fn number(&self) -> ComplexMatrix {
        self.a_dag.matmul(&self.a)
    }

    /// N = a†a + σ+σ−
    pub fn excitation_number(&self) -> ComplexMatrix {
        &self.number() + &self.sigma_plus.matmul(&self.sigma_minus)
    }

    /// Π = σz (−1)^{a†a}
    pub fn parity(&self) -> ComplexMatrix {
        let diag: Vec<C64> = (0..self.dim())
            .map(|k| {
                let label = BasisLabel::from_index(k, self.n_fock);
                let qubit = if label.excited { 1.0 } else { -1.0 };
                let photons = if label.n % 2 == 0 { 1.0 } else { -1.0 };
                C64::new(qubit * photons, 0.0)
            })
            .collect();
        ComplexMatrix::from_diag(&diag)
    }

    /// a + a†
    pub fn quadrature(&self) -> ComplexMatrix {
        &self.a + &self.a_dag
    }
}

/// Operators for validated parameters.
pub fn build_operators(p: &ModelParams) -> Result<OperatorSet> {
    p.validate()?;
    Ok(OperatorSet::new(p.n_fock))
}
