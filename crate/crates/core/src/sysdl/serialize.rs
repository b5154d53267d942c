use std::fmt::Write;

use super::literal::{format_complex, format_real};
use super::SystemSpec;
use crate::dynamics::{DynamicsKind, KrausFamily, Rate};
use crate::linalg::Matrix;

fn matrix_literal(m: &Matrix<f64>) -> String {
    let rows: Vec<String> = (0..m.dim())
        .map(|i| {
            let entries: Vec<String> = m.row(i).iter().map(|&z| format_complex(z)).collect();
            format!("[{}]", entries.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Canonical text for `spec`. Every matrix is written as a literal with
/// round-tripping number formatting, so `parse_system(&serialize(s)) == s`
/// with bit-equal entries.
pub fn serialize(spec: &SystemSpec) -> String {
    let mut out = String::new();
    let kind = match spec.dynamics {
        DynamicsKind::Unitary => "unitary",
        DynamicsKind::Lindblad => "lindblad",
        DynamicsKind::Kraus => "kraus",
    };
    // Writing to a String cannot fail.
    let _ = writeln!(out, "[system]\ndim = {}\nhbar = {}\ndynamics = {kind}", spec.dim, format_real(spec.hbar));
    let _ = writeln!(out, "\n[hamiltonian]\nmatrix = {}", matrix_literal(&spec.hamiltonian));
    let _ = writeln!(out, "\n[state]\ndensity = {}", matrix_literal(spec.initial_state.matrix()));
    if !spec.observables.is_empty() {
        out.push_str("\n[observables]\n");
        for (name, m) in &spec.observables {
            let _ = writeln!(out, "{name} = {}", matrix_literal(m));
        }
    }
    for jump in &spec.jumps {
        let _ = writeln!(out, "\n[jump]\noperator = {}", matrix_literal(&jump.operator));
        match &jump.rate {
            Rate::Constant(g) => {
                let _ = writeln!(out, "rate = {}", format_real(*g));
            }
            Rate::Table(knots) => {
                let items: Vec<String> = knots
                    .iter()
                    .map(|&(t, g)| format!("{}:{}", format_real(t), format_real(g)))
                    .collect();
                let _ = writeln!(out, "rate_table = {}", items.join(", "));
            }
        }
    }
    match &spec.kraus {
        None => {}
        Some(KrausFamily::Dephasing { gamma }) => {
            let _ = writeln!(out, "\n[kraus]\nfamily = dephasing\ngamma = {}", format_real(*gamma));
        }
        Some(KrausFamily::Unitary { .. }) => out.push_str("\n[kraus]\nfamily = unitary\n"),
        Some(KrausFamily::Tabulated { times, operators }) => {
            out.push_str("\n[kraus]\nfamily = tabulated\n");
            for (t, set) in times.iter().zip(operators) {
                for (i, k) in set.iter().enumerate() {
                    let _ = writeln!(out, "K{i}({}) = {}", format_real(*t), matrix_literal(k));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse_system, DEPHASING_SYS, TIGHT_QUBIT_SYS};
    use super::*;

    #[test]
    fn builtin_files_round_trip() {
        for text in [DEPHASING_SYS, TIGHT_QUBIT_SYS] {
            let spec = parse_system(text).unwrap();
            let canon = serialize(&spec);
            let again = parse_system(&canon).unwrap();
            assert_eq!(again, spec);
            assert_eq!(serialize(&again), canon);
        }
    }
}
