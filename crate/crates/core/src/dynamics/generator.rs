use num_complex::Complex;

use super::DynamicsError;
use crate::linalg::{hs_norm, require_hermitian, Matrix};
use crate::scalar::Real;

/// Dissipation rate, constant or piecewise-linear in time.
#[derive(Clone, Debug, PartialEq)]
pub enum Rate<T: Real> {
    Constant(T),
    /// `(time, rate)` knots with strictly increasing times; held constant
    /// outside the tabulated range.
    Table(Vec<(T, T)>),
}

impl<T: Real> Rate<T> {
    pub fn at(&self, t: T) -> T {
        match self {
            Rate::Constant(g) => *g,
            Rate::Table(knots) => {
                let first = knots[0];
                if t <= first.0 {
                    return first.1;
                }
                for w in knots.windows(2) {
                    let ((ta, ga), (tb, gb)) = (w[0], w[1]);
                    if t <= tb {
                        let s = (t - ta) / (tb - ta);
                        return ga + (gb - ga) * s;
                    }
                }
                knots[knots.len() - 1].1
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Rate::Constant(_))
    }

    fn validate(&self, index: usize) -> Result<(), DynamicsError> {
        match self {
            Rate::Constant(g) => check_rate(index, T::zero(), *g),
            Rate::Table(knots) => {
                if knots.is_empty() {
                    return Err(DynamicsError::InvalidRate {
                        index,
                        reason: "empty rate table".into(),
                    });
                }
                for w in knots.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(DynamicsError::InvalidRate {
                            index,
                            reason: "rate table times must increase strictly".into(),
                        });
                    }
                }
                // Linear interpolation between non-negative knots stays non-negative.
                knots.iter().try_for_each(|&(t, g)| check_rate(index, t, g))
            }
        }
    }
}

fn check_rate<T: Real>(index: usize, t: T, g: T) -> Result<(), DynamicsError> {
    if !g.is_finite() || g < T::zero() {
        Err(DynamicsError::NegativeRate {
            index,
            time: t.to_f64_lossy(),
            value: g.to_f64_lossy(),
        })
    } else {
        Ok(())
    }
}

/// Jump operator `L_k` with rate `γ_k(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jump<T: Real> {
    pub operator: Matrix<T>,
    pub rate: Rate<T>,
}

impl<T: Real> Jump<T> {
    pub fn new(operator: Matrix<T>, rate: Rate<T>) -> Self {
        Self { operator, rate }
    }

    pub fn constant(operator: Matrix<T>, rate: T) -> Self {
        Self::new(operator, Rate::Constant(rate))
    }
}

/// Markovian generator `H_S` plus jump operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Lindblad<T: Real> {
    pub hamiltonian: Matrix<T>,
    pub jumps: Vec<Jump<T>>,
    pub hbar: T,
}

impl<T: Real> Lindblad<T> {
    pub fn new(hamiltonian: Matrix<T>, jumps: Vec<Jump<T>>, hbar: T) -> Self {
        Self { hamiltonian, jumps, hbar }
    }

    /// Pure dephasing `L_0 = √(γ/2) σ_z` with unit rate multiplier and zero Hamiltonian.
    pub fn qubit_dephasing(gamma: T) -> Self {
        let l0 = Matrix::pauli_z().scale_real((gamma / T::lit(2.0)).sqrt());
        Self::new(Matrix::zeros(2), vec![Jump::constant(l0, T::one())], T::one())
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn has_constant_rates(&self) -> bool {
        self.jumps.iter().all(|j| j.rate.is_constant())
    }

    pub fn validate(&self, tol: T) -> Result<(), DynamicsError> {
        check_hbar(self.hbar)?;
        require_hermitian(&self.hamiltonian, tol).map_err(|_| DynamicsError::NonHermitianHamiltonian)?;
        for (k, j) in self.jumps.iter().enumerate() {
            self.hamiltonian.check_dim(&j.operator)?;
            j.operator.ensure_finite()?;
            j.rate.validate(k)?;
        }
        Ok(())
    }
}

/// Time-parameterized Kraus family `{K_i(t)}`.
#[derive(Clone, Debug, PartialEq)]
pub enum KrausFamily<T: Real> {
    /// Qubit dephasing: `K_0 = √((1+e^{−γt})/2)·I`, `K_1 = √((1−e^{−γt})/2)·σ_z`.
    Dephasing { gamma: T },
    /// Single operator `K_0 = e^{−iHt/ħ}`.
    Unitary { hamiltonian: Matrix<T>, hbar: T },
    /// Operators tabulated on a uniform time axis.
    Tabulated { times: Vec<T>, operators: Vec<Vec<Matrix<T>>> },
}

impl<T: Real> KrausFamily<T> {
    pub fn dim(&self) -> usize {
        match self {
            KrausFamily::Dephasing { .. } => 2,
            KrausFamily::Unitary { hamiltonian, .. } => hamiltonian.dim(),
            KrausFamily::Tabulated { operators, .. } => operators[0][0].dim(),
        }
    }

    pub fn count(&self) -> usize {
        match self {
            KrausFamily::Dephasing { .. } => 2,
            KrausFamily::Unitary { .. } => 1,
            KrausFamily::Tabulated { operators, .. } => operators[0].len(),
        }
    }

    /// Closed interval on which the family is defined.
    pub fn domain(&self) -> (T, T) {
        match self {
            KrausFamily::Dephasing { .. } => (T::zero(), T::infinity()),
            KrausFamily::Unitary { .. } => (T::neg_infinity(), T::infinity()),
            KrausFamily::Tabulated { times, .. } => (times[0], times[times.len() - 1]),
        }
    }

    pub fn validate(&self, tol: T) -> Result<(), DynamicsError> {
        match self {
            KrausFamily::Dephasing { gamma } => check_rate(0, T::zero(), *gamma),
            KrausFamily::Unitary { hamiltonian, hbar } => {
                check_hbar(*hbar)?;
                require_hermitian(hamiltonian, tol).map_err(|_| DynamicsError::NonHermitianHamiltonian)
            }
            KrausFamily::Tabulated { times, operators } => {
                if times.len() < 2 || times.len() != operators.len() {
                    return Err(DynamicsError::InvalidKraus("table needs ≥ 2 time points, one operator set each".into()));
                }
                let count = operators[0].len();
                if count == 0 {
                    return Err(DynamicsError::InvalidKraus("empty Kraus set".into()));
                }
                let h = (times[times.len() - 1] - times[0]) / T::usize(times.len() - 1);
                for (k, &t) in times.iter().enumerate() {
                    let expected = times[0] + h * T::usize(k);
                    if (t - expected).abs() > tol.max(h * T::lit(1e-9)) || h <= T::zero() {
                        return Err(DynamicsError::InvalidKraus("tabulated times must be uniformly spaced".into()));
                    }
                }
                let d = operators[0][0].dim();
                for set in operators {
                    if set.len() != count {
                        return Err(DynamicsError::InvalidKraus("Kraus count varies across the table".into()));
                    }
                    for k in set {
                        if k.dim() != d {
                            return Err(DynamicsError::DimMismatch(d, k.dim()));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Kraus operators at time `t`.
    pub fn operators(&self, t: T) -> Result<Vec<Matrix<T>>, DynamicsError> {
        match self {
            KrausFamily::Dephasing { gamma } => {
                if t < T::zero() {
                    return Err(DynamicsError::OutsideDomain(t.to_f64_lossy()));
                }
                let e = (-*gamma * t).exp();
                let half = T::lit(0.5);
                let a = ((T::one() + e) * half).sqrt();
                let b = ((T::one() - e) * half).max(T::zero()).sqrt();
                Ok(vec![Matrix::identity(2).scale_real(a), Matrix::pauli_z().scale_real(b)])
            }
            KrausFamily::Unitary { hamiltonian, hbar } => {
                Ok(vec![super::unitary_propagator_unchecked(hamiltonian, t, *hbar)?])
            }
            KrausFamily::Tabulated { times, operators } => {
                let idx = self.table_index(times, t)?;
                Ok(operators[idx].clone())
            }
        }
    }

    fn table_index(&self, times: &[T], t: T) -> Result<usize, DynamicsError> {
        let h = (times[times.len() - 1] - times[0]) / T::usize(times.len() - 1);
        let pos = ((t - times[0]) / h).round();
        let idx = pos.to_isize().unwrap_or(-1);
        if idx < 0 || idx as usize >= times.len() || (times[idx as usize] - t).abs() > h * T::lit(1e-6) {
            return Err(DynamicsError::OutsideDomain(t.to_f64_lossy()));
        }
        Ok(idx as usize)
    }

    /// Tabulation step for tabulated families.
    pub fn table_spacing(&self) -> Option<T> {
        match self {
            KrausFamily::Tabulated { times, .. } => Some((times[times.len() - 1] - times[0]) / T::usize(times.len() - 1)),
            _ => None,
        }
    }

    /// Largest entry of `Σ K_i†K_i − I` at time `t`.
    pub fn completeness_deviation(&self, t: T) -> Result<T, DynamicsError> {
        let ks = self.operators(t)?;
        let d = self.dim();
        let mut sum = Matrix::zeros(d);
        for k in &ks {
            sum += &(&k.dagger() * k);
        }
        Ok(sum.max_abs_diff(&Matrix::identity(d)))
    }
}

/// The three supported dynamics kinds.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec<T: Real> {
    Unitary { hamiltonian: Matrix<T>, hbar: T },
    Lindblad(Lindblad<T>),
    Kraus(KrausFamily<T>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicsKind {
    Unitary,
    Lindblad,
    Kraus,
}

impl<T: Real> GeneratorSpec<T> {
    pub fn kind(&self) -> DynamicsKind {
        match self {
            GeneratorSpec::Unitary { .. } => DynamicsKind::Unitary,
            GeneratorSpec::Lindblad(_) => DynamicsKind::Lindblad,
            GeneratorSpec::Kraus(_) => DynamicsKind::Kraus,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GeneratorSpec::Unitary { hamiltonian, .. } => hamiltonian.dim(),
            GeneratorSpec::Lindblad(l) => l.dim(),
            GeneratorSpec::Kraus(k) => k.dim(),
        }
    }

    pub fn validate(&self, tol: T) -> Result<(), DynamicsError> {
        match self {
            GeneratorSpec::Unitary { hamiltonian, hbar } => {
                check_hbar(*hbar)?;
                require_hermitian(hamiltonian, tol).map_err(|_| DynamicsError::NonHermitianHamiltonian)
            }
            GeneratorSpec::Lindblad(l) => l.validate(tol),
            GeneratorSpec::Kraus(k) => k.validate(tol),
        }
    }

    /// Hamiltonian part, when the generator has one.
    pub fn hamiltonian(&self) -> Option<&Matrix<T>> {
        match self {
            GeneratorSpec::Unitary { hamiltonian, .. } => Some(hamiltonian),
            GeneratorSpec::Lindblad(l) => Some(&l.hamiltonian),
            GeneratorSpec::Kraus(KrausFamily::Unitary { hamiltonian, .. }) => Some(hamiltonian),
            GeneratorSpec::Kraus(_) => None,
        }
    }

    pub fn hbar(&self) -> T {
        match self {
            GeneratorSpec::Unitary { hbar, .. } => *hbar,
            GeneratorSpec::Lindblad(l) => l.hbar,
            GeneratorSpec::Kraus(KrausFamily::Unitary { hbar, .. }) => *hbar,
            GeneratorSpec::Kraus(_) => T::one(),
        }
    }

    /// Heisenberg generator applied to `o` at time `t`: `(i/ħ)[H, O]` for
    /// unitary dynamics, the adjoint Lindbladian otherwise. Kraus families
    /// have no closed generator and return `None`.
    pub fn heisenberg_rhs(&self, o: &Matrix<T>, t: T) -> Result<Option<Matrix<T>>, DynamicsError> {
        match self {
            GeneratorSpec::Unitary { hamiltonian, hbar } => Ok(Some(hamiltonian_action(hamiltonian, o, *hbar)?)),
            GeneratorSpec::Lindblad(l) => Ok(Some(super::lindblad_adjoint_unchecked(l, o, t)?)),
            GeneratorSpec::Kraus(_) => Ok(None),
        }
    }
}

/// `(i/ħ)[H, O]`.
pub(crate) fn hamiltonian_action<T: Real>(h: &Matrix<T>, o: &Matrix<T>, hbar: T) -> Result<Matrix<T>, DynamicsError> {
    let comm = crate::linalg::commutator(h, o)?;
    Ok(comm.scale(Complex::new(T::zero(), T::one() / hbar)))
}

pub(crate) fn check_hbar<T: Real>(hbar: T) -> Result<(), DynamicsError> {
    if hbar.is_finite() && hbar > T::zero() {
        Ok(())
    } else {
        Err(DynamicsError::InvalidHbar(hbar.to_f64_lossy()))
    }
}

/// HS norm used for speed samples; non-finite input is an error upstream.
pub(crate) fn speed_hs<T: Real>(m: &Matrix<T>) -> Result<T, DynamicsError> {
    Ok(hs_norm(m)?)
}
