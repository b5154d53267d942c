//! Plain-text system descriptions (`.sys` files).
//!
//! ```text
//! # pure dephasing of a qubit
//! [system]
//! dim = 2
//! hbar = 1.0
//!
//! [hamiltonian]
//! pauli = 0.0 Z
//!
//! [state]
//! ket = [0.70710678, 0.70710678]
//!
//! [observables]
//! O = 1.0 X
//!
//! [jump]
//! operator = 0.70710678 Z
//! rate = 1.0
//! ```
//!
//! Operators are Pauli expressions (`0.5 XX + 0.5 YY`) or bracketed matrix
//! literals (`[[1, 0-1i], [0+1i, -1]]`). `[jump]` may repeat. A `[kraus]`
//! section selects a Kraus family: `family = dephasing` with `gamma`,
//! `family = unitary`, or `family = tabulated` with one `K<i>(<t>) = matrix`
//! line per operator and time.

mod literal;
mod parser;
mod serialize;

use std::fmt;

use thiserror::Error;

pub use literal::{format_complex, parse_complex, parse_matrix, parse_pauli_expr, parse_vector, LiteralError, MAX_QUBITS};
pub use parser::{parse_system, MAX_DIM};
pub use serialize::serialize;

use crate::dynamics::{DynamicsKind, GeneratorSpec, Jump, KrausFamily, Lindblad};
use crate::{ComplexMatrix, DensityState};

/// A validated system description.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    pub dim: usize,
    pub hbar: f64,
    pub dynamics: DynamicsKind,
    pub hamiltonian: ComplexMatrix,
    pub initial_state: DensityState,
    /// Named observables in declaration order.
    pub observables: Vec<(String, ComplexMatrix)>,
    pub jumps: Vec<Jump<f64>>,
    pub kraus: Option<KrausFamily<f64>>,
    /// SHA-256 of the source text, hex encoded.
    pub source_digest: String,
}

impl PartialEq for SystemSpec {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.hbar.to_bits() == other.hbar.to_bits()
            && self.dynamics == other.dynamics
            && self.hamiltonian == other.hamiltonian
            && self.initial_state == other.initial_state
            && self.observables == other.observables
            && self.jumps == other.jumps
            && self.kraus == other.kraus
    }
}

impl SystemSpec {
    pub fn observable(&self, name: &str) -> Option<&ComplexMatrix> {
        self.observables.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn observable_names(&self) -> impl Iterator<Item = &str> {
        self.observables.iter().map(|(n, _)| n.as_str())
    }

    /// Generator for the declared dynamics kind.
    pub fn generator(&self) -> GeneratorSpec<f64> {
        match self.dynamics {
            DynamicsKind::Unitary => GeneratorSpec::Unitary {
                hamiltonian: self.hamiltonian.clone(),
                hbar: self.hbar,
            },
            DynamicsKind::Lindblad => {
                GeneratorSpec::Lindblad(Lindblad::new(self.hamiltonian.clone(), self.jumps.clone(), self.hbar))
            }
            DynamicsKind::Kraus => GeneratorSpec::Kraus(self.kraus.clone().expect("kraus dynamics has a family")),
        }
    }

    /// Same system under a different `ħ`.
    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        if let Some(KrausFamily::Unitary { hbar: h, .. }) = &mut self.kraus {
            *h = hbar;
        }
        self
    }
}

/// A positioned parse or validation message (1-based line and column).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{}", render_lines(.diagnostics, None))]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseError {
    /// One `file:line:col: message` line per diagnostic.
    pub fn render(&self, file: &str) -> String {
        render_lines(&self.diagnostics, Some(file))
    }
}

fn render_lines(diags: &[Diagnostic], file: Option<&str>) -> String {
    diags
        .iter()
        .map(|d| match file {
            Some(f) => format!("{f}:{d}"),
            None => d.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Source of the two-level pure dephasing model used by the examples.
pub const DEPHASING_SYS: &str = "\
# qubit pure dephasing, O = sigma_x on |+>
[system]
dim = 2
hbar = 1.0

[hamiltonian]
pauli = 0.0 Z

[state]
ket = [0.70710678, 0.70710678]

[observables]
O = 1.0 X

[jump]
operator = 0.70710678 Z
rate = 1.0
";

/// Source of the tight qubit example: `H = σ_z`, `O = σ_x`, `ρ = |+⟩⟨+|`.
pub const TIGHT_QUBIT_SYS: &str = "\
[system]
dim = 2
hbar = 1.0

[hamiltonian]
pauli = 1.0 Z

[state]
ket = [0.7071067811865476, 0.7071067811865476]

[observables]
O = 1.0 X
";
