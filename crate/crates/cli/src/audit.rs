//! Randomized validity audit: sample systems, evaluate every applicable
//! bound and rate inequality, and record the worst violation of each.

use std::collections::BTreeMap;

use num_complex::Complex64;
use oqsl::bounds::{rate_audit_with, AuditMutation, BoundId, BoundOptions, RateInequality};
use oqsl::dynamics::{GeneratorSpec, Jump, KrausFamily, Lindblad, TimeGrid};
use oqsl::linalg::{eigh, op_norm, trace_with};
use oqsl::{ComplexMatrix, DensityState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{evaluate, states_at, EngineError, Problem};

#[derive(Clone, Debug)]
pub struct AuditConfig {
    pub seed: u64,
    /// Qubit trials.
    pub trials: usize,
    pub qutrit_trials: usize,
    pub steps: usize,
    /// Largest tolerated violation.
    pub tol: f64,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    pub mutation: AuditMutation,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 100,
            qutrit_trials: 50,
            steps: 2000,
            tol: 1e-6,
            threads: None,
            mutation: AuditMutation::None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub evaluated: usize,
    /// Worst `t_qsl − T` for bounds, `LHS − RHS` for rate inequalities,
    /// absolute mismatch for duality. `None` when nothing was evaluated.
    pub max_violation: Option<f64>,
    pub worst_trial: Option<usize>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub trials: usize,
    pub qutrit_trials: usize,
    pub tolerance: f64,
    pub checks: Vec<AuditCheck>,
    pub pass: bool,
}

impl AuditSummary {
    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("trial {trial}: {source}")]
pub struct TrialError {
    pub trial: usize,
    #[source]
    pub source: EngineError,
}

/// Check name used for a rate inequality.
pub fn inequality_name(i: RateInequality) -> &'static str {
    match i {
        RateInequality::Robertson => "RATE_ROBERTSON",
        RateInequality::OperatorNorm => "RATE_OPERATOR_NORM",
        RateInequality::PurityHs => "RATE_PURITY_HS",
        RateInequality::KrausSpeed => "RATE_KRAUS",
    }
}

pub const DUALITY: &str = "DUALITY";

type Findings = Vec<(String, f64)>;

/// The generator used for trial `index` (0-based across qubit then qutrit
/// trials). Each trial owns an RNG stream, so results do not depend on
/// scheduling.
pub fn sample_problem(seed: u64, index: usize, dim: usize, steps: usize) -> Problem {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let hbar = rng.random_range(0.5..2.0);
    let hamiltonian = scaled_hermitian(&mut rng, dim);
    let observable = if rng.random_bool(0.5) {
        self_inverse(&mut rng, dim)
    } else {
        scaled_hermitian(&mut rng, dim)
    };
    let partner = scaled_hermitian(&mut rng, dim);
    let state = if rng.random_bool(0.5) {
        random_pure(&mut rng, dim)
    } else {
        random_mixed(&mut rng, dim)
    };
    let generator = match index % 3 {
        0 => GeneratorSpec::Unitary { hamiltonian, hbar },
        1 => {
            let count = rng.random_range(1..=2);
            let jumps = (0..count)
                .map(|_| {
                    let op = gaussian(&mut rng, dim).scale_real(1.0 / (dim as f64).sqrt());
                    Jump::constant(op, rng.random_range(0.0..1.0))
                })
                .collect();
            GeneratorSpec::Lindblad(Lindblad::new(hamiltonian, jumps, hbar))
        }
        _ => GeneratorSpec::Kraus(KrausFamily::Unitary { hamiltonian, hbar }),
    };
    let t = rng.random_range(0.5..2.0);
    Problem {
        generator,
        observable,
        partner: Some(partner),
        state,
        grid: TimeGrid::span(t, steps).expect("positive duration and steps"),
    }
}

fn gaussian<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let entries = (0..dim * dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    ComplexMatrix::from_row_major(dim, entries).expect("dim² entries")
}

/// GUE sample rescaled to operator norm drawn from `[0.5, 2)`.
fn scaled_hermitian<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let h = gaussian(rng, dim).hermitian_part();
    let norm = op_norm(&h).expect("finite sample");
    h.scale_real(rng.random_range(0.5..2.0) / norm)
}

/// `V diag(±1) V†` with a random eigenbasis and both signs present.
fn self_inverse<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut eig = eigh(&gaussian(rng, dim).hermitian_part()).expect("Hermitian sample");
    let split = rng.random_range(1..dim);
    // Keep the eigenvectors, replace the spectrum by the signs.
    eig.values = (0..dim).map(|k| if k < split { -1.0 } else { 1.0 }).collect();
    eig.apply(|l| Complex64::new(l, 0.0))
}

fn random_pure<R: Rng>(rng: &mut R, dim: usize) -> DensityState {
    let g = gaussian(rng, dim);
    let ket: Vec<Complex64> = g.row(0).to_vec();
    let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ket: Vec<Complex64> = ket.iter().map(|z| z / norm).collect();
    DensityState::from_ket(&ket, 1e-10).expect("normalized ket")
}

/// Wishart sample `G G† / tr(G G†)`.
fn random_mixed<R: Rng>(rng: &mut R, dim: usize) -> DensityState {
    let g = gaussian(rng, dim);
    let w = &g * &g.dagger();
    let tr = w.trace().re;
    DensityState::new(w.scale_real(1.0 / tr).hermitian_part(), 1e-10).expect("Wishart sample is a state")
}

fn run_trial(cfg: &AuditConfig, index: usize) -> Result<Findings, TrialError> {
    let dim = if index < cfg.trials { 2 } else { 3 };
    let p = sample_problem(cfg.seed, index, dim, cfg.steps);
    let wrap = |source: EngineError| TrialError { trial: index, source };
    let opts = BoundOptions::default();
    let eval = evaluate(&p, &BoundId::ALL, false, &opts).map_err(wrap)?;
    let mut out: Findings = eval
        .reports
        .iter()
        .map(|r| (r.bound_id.as_str().to_string(), r.t_qsl - r.t))
        .collect();

    let rates = rate_audit_with(&eval.trajectory, &p.generator, &p.state, cfg.mutation)
        .map_err(|e| wrap(e.into()))?;
    out.extend(
        rates
            .entries
            .iter()
            .map(|e| (inequality_name(e.inequality).to_string(), e.max_violation)),
    );

    // tr[O ρ(t)] against tr[O(t) ρ] at eleven evenly spaced times.
    let n = p.grid.len();
    let indices: Vec<usize> = (0..=10).map(|j| j * (n - 1) / 10).collect();
    let states = states_at(&p.generator, &p.state, &p.grid, &indices).map_err(wrap)?;
    let mut worst = 0.0f64;
    for (k, rho_t) in indices.iter().zip(&states) {
        let schrodinger = trace_with(&p.observable, rho_t).map_err(|e| wrap(e.into()))?;
        let heisenberg = trace_with(&eval.trajectory.samples[*k], &p.state).map_err(|e| wrap(e.into()))?;
        worst = worst.max((schrodinger - heisenberg).norm());
    }
    out.push((DUALITY.to_string(), worst));
    Ok(out)
}

fn run_all(cfg: &AuditConfig) -> Vec<Result<Findings, TrialError>> {
    let total = cfg.trials + cfg.qutrit_trials;
    let work = || (0..total).into_par_iter().map(|i| run_trial(cfg, i)).collect();
    match cfg.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(work),
            Err(_) => (0..total).map(|i| run_trial(cfg, i)).collect(),
        },
        None => work(),
    }
}

/// Runs the audit. Any trial whose numerics fail aborts with that error.
pub fn run_audit(cfg: &AuditConfig) -> Result<AuditSummary, TrialError> {
    let mut table: BTreeMap<String, (usize, f64, usize)> = BTreeMap::new();
    let mut names: Vec<String> = BoundId::ALL.iter().map(|b| b.as_str().to_string()).collect();
    names.extend(
        [
            RateInequality::Robertson,
            RateInequality::OperatorNorm,
            RateInequality::PurityHs,
            RateInequality::KrausSpeed,
        ]
        .map(|i| inequality_name(i).to_string()),
    );
    names.push(DUALITY.to_string());

    for (trial, result) in run_all(cfg).into_iter().enumerate() {
        for (name, v) in result? {
            let entry = table.entry(name).or_insert((0, f64::NEG_INFINITY, trial));
            entry.0 += 1;
            if v > entry.1 {
                entry.1 = v;
                entry.2 = trial;
            }
        }
    }

    let checks: Vec<AuditCheck> = names
        .into_iter()
        .map(|name| match table.get(&name) {
            Some(&(evaluated, worst, trial)) => AuditCheck {
                pass: worst <= cfg.tol,
                name,
                evaluated,
                max_violation: Some(worst),
                worst_trial: Some(trial),
            },
            None => AuditCheck {
                name,
                evaluated: 0,
                max_violation: None,
                worst_trial: None,
                pass: true,
            },
        })
        .collect();
    Ok(AuditSummary {
        schema_version: oqsl::scenarios::SCHEMA_VERSION,
        seed: cfg.seed,
        trials: cfg.trials,
        qutrit_trials: cfg.qutrit_trials,
        tolerance: cfg.tol,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Thread count from `OQSL_THREADS`, capped at the available parallelism.
pub fn threads_from_env() -> Option<usize> {
    let requested: usize = std::env::var("OQSL_THREADS").ok()?.trim().parse().ok()?;
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    Some(requested.clamp(1, available))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible() {
        let a = sample_problem(7, 3, 2, 10);
        let b = sample_problem(7, 3, 2, 10);
        assert_eq!(a.observable, b.observable);
        assert_eq!(a.generator, b.generator);
        assert_ne!(sample_problem(7, 4, 2, 10).observable, a.observable);
    }

    #[test]
    fn self_inverse_squares_to_identity() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for dim in [2, 3] {
            let o = self_inverse(&mut rng, dim);
            assert!((&o * &o).max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-12);
            assert!(o.trace().re.abs() < dim as f64 - 0.5);
        }
    }

    #[test]
    fn small_audit_passes_and_fault_is_caught() {
        let cfg = AuditConfig {
            trials: 6,
            qutrit_trials: 3,
            steps: 800,
            ..AuditConfig::default()
        };
        let summary = run_audit(&cfg).unwrap();
        assert!(summary.pass, "{summary:#?}");
        let faulty = run_audit(&AuditConfig {
            mutation: AuditMutation::FlipRobertsonSign,
            ..cfg
        })
        .unwrap();
        assert!(!faulty.pass);
        assert!(!faulty.check("RATE_ROBERTSON").unwrap().pass);
    }
}
