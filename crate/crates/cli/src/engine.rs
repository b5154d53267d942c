//! Bound evaluation for one system, observable and time window.

use oqsl::bounds::{
    battery_bounds, commutator_qsl, corr_qsl, oqsl_generator_hs, oqsl_kraus, oqsl_min_norm, oqsl_mt_integral,
    oqsl_purity_hs, oqsl_self_inverse, oqsl_state_independent, qsl_delcampo, state_qsl_projector,
    two_time_correlation, BoundError, BoundId, BoundOptions, BoundReport, SpeedKind,
};
use oqsl::dynamics::{
    evolve_heisenberg, evolve_lindblad_schrodinger, unitary_propagator, DynamicsError, DynamicsKind, EvolveOptions,
    GeneratorSpec, ObservableTrajectory, TimeGrid,
};
use oqsl::linalg::{hs_norm, op_norm, std_dev, tr_norm, LinalgError, DEFAULT_TOL};
use oqsl::{ComplexMatrix, DensityState};
use thiserror::Error;

/// Everything a bound evaluation needs.
#[derive(Clone, Debug)]
pub struct Problem {
    pub generator: GeneratorSpec<f64>,
    pub observable: ComplexMatrix,
    /// Second operator for the commutator bounds and the battery charging
    /// Hamiltonian.
    pub partner: Option<ComplexMatrix>,
    pub state: DensityState,
    pub grid: TimeGrid<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("{bound}: {reason}")]
    NotApplicable { bound: BoundId, reason: String },
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl EngineError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        match self {
            EngineError::NotApplicable { .. } => false,
            EngineError::Bound(b) => match b {
                BoundError::Linalg(l) => linalg_numeric(l),
                BoundError::Dynamics(d) => dynamics_numeric(d),
                BoundError::UnboundedSpeed { .. } => true,
                _ => false,
            },
            EngineError::Dynamics(d) => dynamics_numeric(d),
            EngineError::Linalg(l) => linalg_numeric(l),
        }
    }
}

fn linalg_numeric(e: &LinalgError) -> bool {
    matches!(
        e,
        LinalgError::NonFinite | LinalgError::Overflow | LinalgError::Singular | LinalgError::NoConvergence(_)
    )
}

fn dynamics_numeric(e: &DynamicsError) -> bool {
    match e {
        DynamicsError::Linalg(l) => linalg_numeric(l),
        DynamicsError::Unstable { .. } | DynamicsError::BadStep(_) => true,
        _ => false,
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub trajectory: ObservableTrajectory<f64>,
    pub reports: Vec<BoundReport>,
    /// Bounds left out because they do not apply, with the reason.
    pub skipped: Vec<(BoundId, String)>,
}

/// Why `id` cannot be evaluated for `p`, if it cannot.
pub fn applicability(id: BoundId, p: &Problem, opts: &BoundOptions) -> Result<(), String> {
    let kind = p.generator.kind();
    let pure = p.state.is_pure(opts.state_tol);
    let need = |ok: bool, reason: &str| if ok { Ok(()) } else { Err(reason.to_string()) };
    let unitary = || need(kind == DynamicsKind::Unitary, "requires unitary dynamics");
    let pure_state = || need(pure, "requires a pure initial state");
    let partner = || need(p.partner.is_some(), "requires a partner operator (--partner)");
    match id {
        BoundId::MtIntegral | BoundId::PurityHs => unitary(),
        BoundId::SelfInverse => {
            unitary()?;
            let sq = &p.observable * &p.observable;
            need(
                sq.max_abs_diff(&ComplexMatrix::identity(sq.dim())) <= opts.state_tol,
                "requires a self-inverse observable (O² = I)",
            )
        }
        BoundId::StateMt | BoundId::MinNorm => {
            unitary()?;
            pure_state()
        }
        BoundId::GeneratorHs | BoundId::StateIndep => Ok(()),
        BoundId::Delcampo => match &p.generator {
            GeneratorSpec::Unitary { .. } => Ok(()),
            GeneratorSpec::Lindblad(l) => need(l.has_constant_rates(), "requires constant jump rates"),
            GeneratorSpec::Kraus(_) => Err("requires a generator (unitary or Lindblad dynamics)".into()),
        },
        BoundId::Kraus => need(kind == DynamicsKind::Kraus, "requires Kraus dynamics"),
        BoundId::BatteryCt1 | BoundId::BatteryCt2 | BoundId::CommClosed => {
            unitary()?;
            pure_state()?;
            partner()
        }
        BoundId::CorrClosed => {
            unitary()?;
            pure_state()
        }
        BoundId::CorrOpen => {
            need(kind != DynamicsKind::Unitary, "requires open (Lindblad or Kraus) dynamics")?;
            pure_state()
        }
        BoundId::CommOpen => {
            need(kind != DynamicsKind::Unitary, "requires open (Lindblad or Kraus) dynamics")?;
            pure_state()?;
            partner()
        }
    }
}

/// Evaluates `ids` on `p`. In `strict` mode an inapplicable bound is an
/// error; otherwise it is listed in [`Evaluation::skipped`].
pub fn evaluate(p: &Problem, ids: &[BoundId], strict: bool, opts: &BoundOptions) -> Result<Evaluation, EngineError> {
    if p.observable.dim() != p.generator.dim() || p.state.dim() != p.generator.dim() {
        return Err(DynamicsError::DimMismatch(p.generator.dim(), p.observable.dim()).into());
    }
    if let Some(b) = &p.partner {
        if b.dim() != p.generator.dim() {
            return Err(DynamicsError::DimMismatch(p.generator.dim(), b.dim()).into());
        }
    }
    let traj = evolve_heisenberg(&p.observable, &p.generator, &p.state, &p.grid, &EvolveOptions::default())?;
    let mut ctx = Context::new(p, &traj, opts);
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for &id in ids {
        if let Err(reason) = applicability(id, p, opts) {
            if strict {
                return Err(EngineError::NotApplicable { bound: id, reason });
            }
            skipped.push((id, reason));
            continue;
        }
        reports.push(ctx.report(id)?);
    }
    Ok(Evaluation {
        trajectory: traj,
        reports,
        skipped,
    })
}

/// Lazily computed intermediate quantities shared between bounds.
struct Context<'a> {
    p: &'a Problem,
    traj: &'a ObservableTrajectory<f64>,
    opts: &'a BoundOptions,
    battery: Option<(BoundReport, BoundReport)>,
}

impl<'a> Context<'a> {
    fn new(p: &'a Problem, traj: &'a ObservableTrajectory<f64>, opts: &'a BoundOptions) -> Self {
        Self {
            p,
            traj,
            opts,
            battery: None,
        }
    }

    fn hamiltonian(&self) -> &ComplexMatrix {
        self.p.generator.hamiltonian().expect("checked unitary")
    }

    fn delta_h(&self) -> Result<f64, EngineError> {
        Ok(std_dev(self.hamiltonian(), &self.p.state, DEFAULT_TOL)?)
    }

    fn report(&mut self, id: BoundId) -> Result<BoundReport, EngineError> {
        let p = self.p;
        let traj = self.traj;
        let opts = self.opts;
        let hbar = p.generator.hbar();
        let t = traj.duration();
        let (e0, e_t) = (traj.expect_initial(), traj.expect_final());
        let r = match id {
            BoundId::MtIntegral => oqsl_mt_integral(traj, self.delta_h()?, hbar, opts)?,
            BoundId::SelfInverse => oqsl_self_inverse(e0, e_t, self.delta_h()?, hbar, t, opts)?,
            BoundId::StateMt => {
                let u = unitary_propagator(self.hamiltonian(), t, hbar)?;
                let rho = p.state.matrix();
                let rho_t = &(&u * rho) * &u.dagger();
                let p_t = rho.trace_product(&rho_t).re.clamp(0.0, 1.0);
                state_qsl_projector(1.0, p_t, self.delta_h()?, hbar, t, opts)?
            }
            BoundId::PurityHs => {
                let oh = &p.observable * self.hamiltonian();
                oqsl_purity_hs(e0, e_t, &p.state, hs_norm(&oh)?, hbar, t, opts)?
            }
            BoundId::MinNorm => {
                let oh = &p.observable * self.hamiltonian();
                oqsl_min_norm(e0, e_t, op_norm(&oh)?, tr_norm(&oh)?, hbar, t, opts)?
            }
            BoundId::GeneratorHs => oqsl_generator_hs(traj, &p.state, opts)?,
            BoundId::StateIndep => oqsl_state_independent(&p.observable, traj, opts)?,
            BoundId::Delcampo => {
                let rho0 = p.state.matrix();
                let l_rho0 = p.generator.heisenberg_rhs(rho0, p.grid.t0())?.expect("checked generator");
                let rho_t = final_state(&p.generator, &p.state, &p.grid)?;
                let hs = hs_norm(&l_rho0)?;
                qsl_delcampo(&p.state, &rho_t, hs * hs, t, opts)?
            }
            BoundId::Kraus => oqsl_kraus(traj, &p.state, opts)?,
            BoundId::BatteryCt1 | BoundId::BatteryCt2 => {
                if self.battery.is_none() {
                    let hc = p.partner.as_ref().expect("checked partner");
                    self.battery = Some(battery_bounds(&p.observable, hc, &p.state, &p.grid, hbar, opts)?);
                }
                let (ct1, ct2) = self.battery.as_ref().expect("just computed");
                if id == BoundId::BatteryCt1 {
                    ct1.clone()
                } else {
                    ct2.clone()
                }
            }
            BoundId::CorrClosed | BoundId::CorrOpen => {
                let kind = speed_kind(id == BoundId::CorrClosed);
                let trace = two_time_correlation(&p.observable, traj, &p.state, opts)?;
                corr_qsl(&trace, op_norm(&p.observable)?, &kind.speeds(traj, hbar), hbar, kind, opts)?
            }
            BoundId::CommClosed | BoundId::CommOpen => {
                let kind = speed_kind(id == BoundId::CommClosed);
                let b = p.partner.as_ref().expect("checked partner");
                commutator_qsl(b, traj, &p.state, hbar, kind, opts)?
            }
        };
        Ok(r)
    }
}

fn speed_kind(closed: bool) -> SpeedKind {
    if closed {
        SpeedKind::Closed
    } else {
        SpeedKind::Open
    }
}

/// Schrödinger-picture states `ρ(t_k)` at the requested grid indices.
pub fn states_at(
    gen: &GeneratorSpec<f64>,
    rho: &DensityState,
    grid: &TimeGrid<f64>,
    indices: &[usize],
) -> Result<Vec<DensityState>, EngineError> {
    let rebuild = |m: ComplexMatrix| -> Result<DensityState, EngineError> {
        Ok(DensityState::new(m.hermitian_part(), 1e-7)?)
    };
    match gen {
        GeneratorSpec::Unitary { hamiltonian, hbar } => indices
            .iter()
            .map(|&k| {
                let u = unitary_propagator(hamiltonian, grid.time(k) - grid.t0(), *hbar)?;
                rebuild(&(&u * rho.matrix()) * &u.dagger())
            })
            .collect(),
        GeneratorSpec::Lindblad(_) => {
            let states = evolve_lindblad_schrodinger(rho, gen, grid)?.states;
            Ok(indices.iter().map(|&k| states[k].clone()).collect())
        }
        GeneratorSpec::Kraus(family) => indices
            .iter()
            .map(|&k| {
                let mut acc = ComplexMatrix::zeros(rho.dim());
                for op in family.operators(grid.time(k))? {
                    acc += &(&(&op * rho.matrix()) * &op.dagger());
                }
                rebuild(acc)
            })
            .collect(),
    }
}

/// `ρ(T)` at the end of the grid.
pub fn final_state(gen: &GeneratorSpec<f64>, rho: &DensityState, grid: &TimeGrid<f64>) -> Result<DensityState, EngineError> {
    Ok(states_at(gen, rho, grid, &[grid.len() - 1])?.remove(0))
}
