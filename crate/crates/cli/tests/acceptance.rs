//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fs;
use std::panic;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use oqsl::bounds::{state_qsl_projector, BoundOptions};
use oqsl::dynamics::{evolve_heisenberg, EvolveOptions, GeneratorSpec, KrausFamily, Lindblad, TimeGrid};
use oqsl::linalg::{expm, hs_norm, op_norm, tr_norm, Matrix};
use oqsl::scenarios::{run_scenario, scenario_dephasing, Cell};
use oqsl::sysdl::{parse_system, serialize};
use oqsl::{ComplexMatrix, DensityState};
use oqsl_cli::audit::{run_audit, AuditConfig, AuditSummary, DUALITY};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn plus() -> DensityState {
    DensityState::from_ket(&[Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)], 1e-12).unwrap()
}

fn tight_example() -> Outcome {
    let ((code, text), elapsed) = timed(|| {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let tmax = FRAC_PI_2.to_string();
        let args = [
            "oqsl", "bound", "--system", "builtin:tight-qubit", "--observable", "O", "--tmax", &tmax, "--steps", "4000",
            "--bounds", "SELF_INVERSE,MT_INTEGRAL", "--format", "json",
        ];
        let code = oqsl_cli::run(args, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap())
    });
    if code != 0 {
        return Err(format!("exit code {code}"));
    }
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let get = |id: &str| {
        v["reports"]
            .as_array()
            .and_then(|rs| rs.iter().find(|r| r["bound_id"] == id))
            .and_then(|r| r["t_qsl"].as_f64())
            .unwrap_or(f64::NAN)
    };
    let (si, mt) = (get("SELF_INVERSE"), get("MT_INTEGRAL"));
    let (e_si, e_mt) = ((si - FRAC_PI_2).abs(), (mt - FRAC_PI_2).abs());
    check(
        e_si <= 1e-4 && e_mt <= 1e-4 && elapsed < Duration::from_secs(1),
        format!("SELF_INVERSE err {e_si:.2e}, MT_INTEGRAL err {e_mt:.2e} (tol 1e-4), {elapsed:.2?} (< 1 s)"),
    )
}

fn fig1() -> Outcome {
    let (result, elapsed) = timed(|| scenario_dephasing(1.0, FRAC_PI_2, 64));
    let result = result.map_err(|e| e.to_string())?;
    let num = |row: &[Cell], k: usize| match row[k] {
        Cell::Num(x) => x,
        Cell::Text(_) => f64::NAN,
    };
    let col = |name: &str| result.columns.iter().position(|c| c == name).expect("column");
    let (ct, co, cq) = (col("T"), col("oqsl"), col("qsl"));
    let (mut worst_o, mut worst_q, mut ordered) = (0.0f64, 0.0f64, true);
    for row in &result.rows {
        let t = num(row, ct);
        worst_o = worst_o.max((num(row, co) - t * FRAC_1_SQRT_2).abs());
        worst_q = worst_q.max((num(row, cq) - (1.0 - (-t).exp()) * FRAC_1_SQRT_2).abs());
        ordered &= num(row, co) >= num(row, cq);
    }
    let last_t = num(&result.rows[result.rows.len() - 1], ct);
    check(
        result.rows.len() == 64 && (last_t - FRAC_PI_2).abs() < 1e-12 && worst_o <= 1e-6 && worst_q <= 1e-6 && ordered
            && elapsed < Duration::from_secs(5),
        format!(
            "{} points, GENERATOR_HS err {worst_o:.2e}, DELCAMPO err {worst_q:.2e}, ordered {ordered}, {elapsed:.2?} (< 5 s)",
            result.rows.len()
        ),
    )
}

fn dephasing_dynamics() -> Outcome {
    let grid = TimeGrid::span(FRAC_PI_2, 1000).unwrap();
    let opts = EvolveOptions::default();
    let x = ComplexMatrix::pauli_x();
    let lind = GeneratorSpec::Lindblad(Lindblad::qubit_dephasing(1.0));
    let kraus = GeneratorSpec::Kraus(KrausFamily::Dephasing { gamma: 1.0 });
    let a = evolve_heisenberg(&x, &lind, &plus(), &grid, &opts).map_err(|e| e.to_string())?;
    let b = evolve_heisenberg(&x, &kraus, &plus(), &grid, &opts).map_err(|e| e.to_string())?;
    let (mut rk4, mut kr) = (0.0f64, 0.0f64);
    for ((t, oa), ob) in grid.times().zip(&a.samples).zip(&b.samples) {
        let exact = x.scale_real((-t).exp());
        rk4 = rk4.max(hs_norm(&(oa - &exact)).unwrap());
        kr = kr.max(hs_norm(&(ob - oa)).unwrap());
    }
    check(
        rk4 <= 1e-8 && kr <= 1e-9,
        format!("RK4 vs closed form {rk4:.2e} (tol 1e-8), Kraus vs RK4 {kr:.2e} (tol 1e-9)"),
    )
}

fn fuzz_summary() -> Result<(AuditSummary, Duration), String> {
    let (summary, elapsed) = timed(|| run_audit(&AuditConfig::default()));
    summary.map(|s| (s, elapsed)).map_err(|e| e.to_string())
}

fn validity_fuzz(audit: &Result<(AuditSummary, Duration), String>) -> Outcome {
    let (summary, elapsed) = audit.as_ref().map_err(Clone::clone)?;
    let checks: Vec<_> = summary.checks.iter().filter(|c| c.name != DUALITY).collect();
    let worst = checks
        .iter()
        .filter_map(|c| c.max_violation.map(|v| (v, c.name.as_str())))
        .fold((f64::NEG_INFINITY, ""), |a, b| if b.0 > a.0 { b } else { a });
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let evaluated: usize = checks.iter().map(|c| c.evaluated).sum();
    check(
        failed.is_empty() && *elapsed < Duration::from_secs(60),
        format!(
            "{}+{} systems, {evaluated} checks, worst {:.2e} ({}), failed {failed:?}, {elapsed:.2?} (< 60 s)",
            summary.trials, summary.qutrit_trials, worst.0, worst.1
        ),
    )
}

fn duality(audit: &Result<(AuditSummary, Duration), String>) -> Outcome {
    let (summary, _) = audit.as_ref().map_err(Clone::clone)?;
    let c = summary.check(DUALITY).ok_or("no duality check")?;
    let v = c.max_violation.unwrap_or(f64::NAN);
    check(c.pass && v <= 1e-6, format!("max |tr[O ρ(t)] − tr[O(t) ρ]| = {v:.2e} over {} systems", c.evaluated))
}

fn battery() -> Outcome {
    let r = run_scenario("battery-degenerate").map_err(|e| e.to_string())?;
    let col = |name: &str| r.columns.iter().position(|c| c == name).expect("column");
    let (case, bound, t_qsl) = (col("case"), col("bound"), col("t_qsl"));
    let value = |id: &str| {
        r.rows
            .iter()
            .find(|row| row[case] == Cell::from("a=b=1/sqrt2") && row[bound] == Cell::from(id))
            .and_then(|row| match row[t_qsl] {
                Cell::Num(x) => Some(x),
                Cell::Text(_) => None,
            })
            .unwrap_or(f64::NAN)
    };
    let (ct1, ct2, smt) = (value("BATTERY_CT1"), value("BATTERY_CT2"), value("STATE_MT"));
    check(
        r.pass && ct1 == 0.0 && ct2 == 0.0 && smt >= 0.5,
        format!("CT1 = {ct1}, CT2 = {ct2}, state MT = {smt:.6} (≥ 0.5)"),
    )
}

fn reduction() -> Outcome {
    let opts = BoundOptions::default();
    let mut worst = 0.0f64;
    for p_t in [0.0, 0.25, 0.5, 1.0] {
        let r = state_qsl_projector(1.0, p_t, 1.0, 1.0, 2.0, &opts).map_err(|e| e.to_string())?;
        worst = worst.max((r.t_qsl - f64::sqrt(p_t).acos()).abs());
    }
    check(worst <= 4.0 * f64::EPSILON, format!("max |bound − arccos √p_T| = {worst:.2e}"))
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let entries = (0..d * d)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    Matrix::from_row_major(d, entries).unwrap()
}

fn norms() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = 0;
    for k in 0..200 {
        let d = 1 + k % 6;
        let (a, b) = (gaussian(&mut rng, d), gaussian(&mut rng, d));
        let u = expm(&gaussian(&mut rng, d).hermitian_part().scale(Complex64::new(0.0, 1.0))).unwrap();
        let (op, hs, tr) = (op_norm(&a).unwrap(), hs_norm(&a).unwrap(), tr_norm(&a).unwrap());
        let rot = &(&u * &a) * &u.dagger();
        let ok = op <= hs + TOL
            && hs <= tr + TOL
            && (op_norm(&rot).unwrap() - op).abs() <= TOL * (1.0 + op)
            && (tr_norm(&rot).unwrap() - tr).abs() <= TOL * (1.0 + tr)
            && (&a * &b).trace().norm() <= op * tr_norm(&b).unwrap() + TOL
            && a.dagger().trace_product(&b).norm() <= hs * hs_norm(&b).unwrap() + TOL;
        failures += usize::from(!ok);
    }
    check(failures == 0, format!("200 matrices, {failures} violations (tol 1e-10)"))
}

fn parser() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let mut corpus = Vec::new();
    for dir in ["crates/core/tests/golden", "systems"] {
        for entry in fs::read_dir(root.join(dir)).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.extension().is_some_and(|e| e == "sys") {
                corpus.push(fs::read_to_string(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    let mut round_trips = 0;
    for text in &corpus {
        let spec = parse_system(text).map_err(|e| e.to_string())?;
        let canon = serialize(&spec);
        let again = parse_system(&canon).map_err(|e| e.to_string())?;
        let bits = |m: &ComplexMatrix| m.entries().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect::<Vec<_>>();
        if again == spec && serialize(&again) == canon && bits(&again.hamiltonian) == bits(&spec.hamiltonian) {
            round_trips += 1;
        }
    }

    const TOKENS: &[&str] = &["[", "]", "=", ",", "#", "\n", "i", "-", "1e999", "nan", "[jump]", "[kraus]", "é", "dim = 0"];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut panics, mut silent) = (0, 0);
    for it in 0..10_000 {
        let mut chars: Vec<char> = corpus[it % corpus.len()].chars().collect();
        for _ in 0..rng.random_range(1..=3) {
            let at = rng.random_range(0..=chars.len());
            if rng.random_bool(0.5) && at < chars.len() {
                let end = (at + rng.random_range(1..6)).min(chars.len());
                chars.drain(at..end);
            } else {
                let tok = TOKENS[rng.random_range(0..TOKENS.len())];
                chars.splice(at..at, tok.chars());
            }
        }
        let text: String = chars.into_iter().collect();
        match panic::catch_unwind(|| parse_system(&text)) {
            Err(_) => panics += 1,
            Ok(Err(e)) if e.diagnostics.is_empty() => silent += 1,
            Ok(_) => {}
        }
    }
    check(
        round_trips == corpus.len() && panics == 0 && silent == 0,
        format!("{round_trips}/{} golden files round-trip, 10000 mutants: {panics} panics, {silent} empty diagnostics", corpus.len()),
    )
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() {
    // Keep panic messages from interleaving with the report lines.
    panic::set_hook(Box::new(|_| {}));
    let audit = fuzz_summary();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("tight-example reproduction", Box::new(tight_example)),
        ("dephasing bound curves", Box::new(fig1)),
        ("dephasing dynamics closed form", Box::new(dephasing_dynamics)),
        ("validity fuzz", Box::new(|| validity_fuzz(&audit))),
        ("Heisenberg/Schrödinger duality", Box::new(|| duality(&audit))),
        ("battery degenerate case", Box::new(battery)),
        ("projector reduction identity", Box::new(reduction)),
        ("norm ordering, Hölder, Cauchy–Schwarz", Box::new(norms)),
        ("parser round-trip and mutation fuzz", Box::new(parser)),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(panic::AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
