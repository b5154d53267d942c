use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use super::literal::{parse_complex, parse_matrix, parse_pauli_expr, parse_vector, LiteralError, MAX_QUBITS};
use super::{Diagnostic, ParseError, SystemSpec};
use crate::dynamics::{DynamicsKind, Jump, KrausFamily, Rate};
use crate::linalg::{DensityState, Matrix, DEFAULT_TOL};

/// Largest Hilbert-space dimension a system file may declare.
pub const MAX_DIM: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    System,
    Hamiltonian,
    State,
    Observables,
    Jump(usize),
    Kraus,
}

/// One `key = value` line.
struct Entry<'a> {
    line: usize,
    raw: &'a str,
    key: &'a str,
    key_at: usize,
    value: &'a str,
    value_at: usize,
}

impl Entry<'_> {
    fn col(&self, byte: usize) -> usize {
        let byte = byte.min(self.raw.len());
        self.raw.get(..byte).map_or(byte, |p| p.chars().count()) + 1
    }

    fn at_key(&self, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            line: self.line,
            col: self.col(self.key_at),
            message: message.into(),
        }
    }

    fn at_value(&self, offset: usize, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            line: self.line,
            col: self.col(self.value_at + offset),
            message: message.into(),
        }
    }

    fn literal(&self, e: LiteralError) -> Diagnostic {
        self.at_value(e.offset, e.message)
    }
}

struct Header {
    line: usize,
}

#[derive(Default)]
struct Sections<'a> {
    system: Vec<Entry<'a>>,
    system_header: Option<Header>,
    hamiltonian: Vec<Entry<'a>>,
    state: Vec<Entry<'a>>,
    state_header: Option<Header>,
    observables: Vec<Entry<'a>>,
    jumps: Vec<(Header, Vec<Entry<'a>>)>,
    kraus: Vec<Entry<'a>>,
    kraus_header: Option<Header>,
}

fn diag(line: usize, col: usize, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        line,
        col,
        message: message.into(),
    }
}

fn split_lines<'a>(text: &'a str, diags: &mut Vec<Diagnostic>) -> Sections<'a> {
    let mut out = Sections::default();
    let mut current: Option<Section> = None;
    let mut seen_once: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.find('#').map_or(raw, |p| &raw[..p]);
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let col = raw[..indent].chars().count() + 1;
        if trimmed.starts_with('[') {
            if !trimmed.ends_with(']') || trimmed.len() < 2 {
                diags.push(diag(line, col, "malformed section header"));
                current = None;
                continue;
            }
            let name = trimmed[1..trimmed.len() - 1].trim();
            let section = match name {
                "system" => Section::System,
                "hamiltonian" => Section::Hamiltonian,
                "state" => Section::State,
                "observables" => Section::Observables,
                "jump" => {
                    out.jumps.push((Header { line }, Vec::new()));
                    Section::Jump(out.jumps.len() - 1)
                }
                "kraus" => Section::Kraus,
                other => {
                    diags.push(diag(line, col, format!("unknown section `[{other}]`")));
                    current = None;
                    continue;
                }
            };
            if !matches!(section, Section::Jump(_)) {
                if seen_once.contains(&section) {
                    diags.push(diag(line, col, format!("duplicate section `[{name}]`")));
                }
                seen_once.push(section);
            }
            match section {
                Section::System => out.system_header = Some(Header { line }),
                Section::State => out.state_header = Some(Header { line }),
                Section::Kraus => out.kraus_header = Some(Header { line }),
                _ => {}
            }
            current = Some(section);
            continue;
        }
        let Some(eq) = content.find('=') else {
            diags.push(diag(line, col, "expected `key = value`"));
            continue;
        };
        let key_part = &content[..eq];
        let key = key_part.trim();
        let value_part = &content[eq + 1..];
        let value = value_part.trim();
        let value_at = eq + 1 + (value_part.len() - value_part.trim_start().len());
        if key.is_empty() {
            diags.push(diag(line, col, "missing key before `=`"));
            continue;
        }
        let entry = Entry {
            line,
            raw,
            key,
            key_at: indent,
            value,
            value_at,
        };
        if value.is_empty() {
            diags.push(entry.at_value(0, format!("missing value for `{key}`")));
            continue;
        }
        match current {
            None => diags.push(entry.at_key("declaration outside any section")),
            Some(Section::System) => out.system.push(entry),
            Some(Section::Hamiltonian) => out.hamiltonian.push(entry),
            Some(Section::State) => out.state.push(entry),
            Some(Section::Observables) => out.observables.push(entry),
            Some(Section::Jump(i)) => out.jumps[i].1.push(entry),
            Some(Section::Kraus) => out.kraus.push(entry),
        }
    }
    out
}

/// Rejects repeated keys; returns entries by key.
fn keyed<'e, 'a>(
    entries: &'e [Entry<'a>],
    allowed: &[&str],
    section: &str,
    diags: &mut Vec<Diagnostic>,
) -> BTreeMap<&'a str, &'e Entry<'a>> {
    let mut map = BTreeMap::new();
    for e in entries {
        if !allowed.contains(&e.key) {
            diags.push(e.at_key(format!("unknown key `{}` in [{section}]", e.key)));
        } else if map.insert(e.key, e).is_some() {
            diags.push(e.at_key(format!("duplicate key `{}`", e.key)));
        }
    }
    map
}

fn real_value(e: &Entry<'_>) -> Result<f64, Diagnostic> {
    let z = parse_complex(e.value).map_err(|err| e.literal(err))?;
    if z.im != 0.0 {
        return Err(e.at_value(0, format!("`{}` must be real", e.key)));
    }
    Ok(z.re)
}

fn real_token(e: &Entry<'_>, text: &str, offset: usize) -> Result<f64, Diagnostic> {
    let z = parse_complex(text).map_err(|err| e.at_value(offset + err.offset, err.message))?;
    if z.im != 0.0 {
        return Err(e.at_value(offset, "expected a real number"));
    }
    Ok(z.re)
}

fn qubits_for(dim: usize) -> Option<usize> {
    (dim.is_power_of_two() && dim >= 2).then(|| dim.trailing_zeros() as usize).filter(|&n| n <= MAX_QUBITS)
}

enum OperatorSyntax {
    Pauli,
    Matrix,
    Auto,
}

fn operator(e: &Entry<'_>, dim: usize, syntax: OperatorSyntax) -> Result<Matrix<f64>, Diagnostic> {
    let (text, shift, syntax) = match syntax {
        OperatorSyntax::Auto => {
            if let Some(rest) = e.value.strip_prefix("matrix") {
                (rest, "matrix".len(), OperatorSyntax::Matrix)
            } else if e.value.starts_with('[') {
                (e.value, 0, OperatorSyntax::Matrix)
            } else {
                (e.value, 0, OperatorSyntax::Pauli)
            }
        }
        s => (e.value, 0, s),
    };
    let shifted = |err: LiteralError| e.at_value(shift + err.offset, err.message);
    match syntax {
        OperatorSyntax::Matrix => parse_matrix(text, dim).map_err(shifted),
        _ => {
            let n = qubits_for(dim).ok_or_else(|| {
                e.at_value(0, format!("Pauli expressions need dim = 2^n (n ≤ {MAX_QUBITS}), got {dim}"))
            })?;
            parse_pauli_expr(text, n).map_err(shifted)
        }
    }
}

fn hermitian(e: &Entry<'_>, m: &Matrix<f64>, what: &str) -> Result<(), Diagnostic> {
    if m.is_hermitian(DEFAULT_TOL) {
        Ok(())
    } else {
        Err(e.at_value(0, format!("{what} is not Hermitian")))
    }
}

fn parse_dynamics(e: &Entry<'_>) -> Result<DynamicsKind, Diagnostic> {
    match e.value {
        "unitary" => Ok(DynamicsKind::Unitary),
        "lindblad" => Ok(DynamicsKind::Lindblad),
        "kraus" => Ok(DynamicsKind::Kraus),
        other => Err(e.at_value(0, format!("unknown dynamics `{other}` (expected unitary, lindblad or kraus)"))),
    }
}

fn parse_rate_table(e: &Entry<'_>) -> Result<Vec<(f64, f64)>, Diagnostic> {
    let mut knots: Vec<(f64, f64)> = Vec::new();
    let mut offset = 0;
    for part in e.value.split(',') {
        let lead = part.len() - part.trim_start().len();
        let item = part.trim();
        let Some((t_text, g_text)) = item.split_once(':') else {
            return Err(e.at_value(offset + lead, "expected `time:rate`"));
        };
        let t = real_token(e, t_text.trim(), offset + lead)?;
        let g_at = offset + lead + t_text.len() + 1;
        let g = real_token(e, g_text.trim(), g_at + (g_text.len() - g_text.trim_start().len()))?;
        if g < 0.0 {
            return Err(e.at_value(g_at, format!("negative rate {g}")));
        }
        if let Some(&(prev, _)) = knots.last() {
            if t <= prev {
                return Err(e.at_value(offset + lead, "rate table times must increase strictly"));
            }
        }
        knots.push((t, g));
        offset += part.len() + 1;
    }
    Ok(knots)
}

fn parse_jump(header: &Header, entries: &[Entry<'_>], dim: usize, diags: &mut Vec<Diagnostic>) -> Option<Jump<f64>> {
    let map = keyed(entries, &["operator", "rate", "rate_table"], "jump", diags);
    let Some(op_entry) = map.get("operator") else {
        diags.push(diag(header.line, 1, "[jump] needs an `operator`"));
        return None;
    };
    let op = operator(op_entry, dim, OperatorSyntax::Auto).map_err(|d| diags.push(d)).ok();
    let rate = match (map.get("rate"), map.get("rate_table")) {
        (Some(_), Some(t)) => {
            diags.push(t.at_key("`rate` and `rate_table` are mutually exclusive"));
            None
        }
        (Some(r), None) => match real_value(r) {
            Ok(g) if g < 0.0 => {
                diags.push(r.at_value(0, format!("negative rate {g}")));
                None
            }
            Ok(g) => Some(Rate::Constant(g)),
            Err(d) => {
                diags.push(d);
                None
            }
        },
        (None, Some(t)) => parse_rate_table(t).map(Rate::Table).map_err(|d| diags.push(d)).ok(),
        (None, None) => Some(Rate::Constant(1.0)),
    };
    Some(Jump::new(op?, rate?))
}

/// `K<i>(<t>)` keys of a tabulated family.
fn parse_kraus_key(key: &str) -> Option<(usize, &str)> {
    let rest = key.strip_prefix('K')?;
    let open = rest.find('(')?;
    let index = rest[..open].parse::<usize>().ok()?;
    let time = rest[open + 1..].strip_suffix(')')?;
    Some((index, time.trim()))
}

fn parse_kraus(
    header: &Header,
    entries: &[Entry<'_>],
    dim: usize,
    hamiltonian: &Matrix<f64>,
    hbar: f64,
    diags: &mut Vec<Diagnostic>,
) -> Option<KrausFamily<f64>> {
    let family_entry = entries.iter().find(|e| e.key == "family");
    let Some(fe) = family_entry else {
        diags.push(diag(header.line, 1, "[kraus] needs a `family`"));
        return None;
    };
    match fe.value {
        "dephasing" => {
            let map = keyed(entries, &["family", "gamma"], "kraus", diags);
            if dim != 2 {
                diags.push(fe.at_value(0, format!("dephasing family is two-dimensional, system has dim = {dim}")));
                return None;
            }
            let Some(ge) = map.get("gamma") else {
                diags.push(fe.at_key("dephasing family needs `gamma`"));
                return None;
            };
            match real_value(ge) {
                Ok(g) if g >= 0.0 => Some(KrausFamily::Dephasing { gamma: g }),
                Ok(g) => {
                    diags.push(ge.at_value(0, format!("negative rate {g}")));
                    None
                }
                Err(d) => {
                    diags.push(d);
                    None
                }
            }
        }
        "unitary" => {
            keyed(entries, &["family"], "kraus", diags);
            Some(KrausFamily::Unitary {
                hamiltonian: hamiltonian.clone(),
                hbar,
            })
        }
        "tabulated" => parse_tabulated(fe, entries, dim, diags),
        other => {
            diags.push(fe.at_value(0, format!("unknown Kraus family `{other}`")));
            None
        }
    }
}

fn parse_tabulated(family: &Entry<'_>, entries: &[Entry<'_>], dim: usize, diags: &mut Vec<Diagnostic>) -> Option<KrausFamily<f64>> {
    let before = diags.len();
    // time bits -> (time, index -> operator)
    let mut table: BTreeMap<u64, (f64, BTreeMap<usize, Matrix<f64>>)> = BTreeMap::new();
    for e in entries.iter().filter(|e| e.key != "family") {
        let Some((index, time_text)) = parse_kraus_key(e.key) else {
            diags.push(e.at_key(format!("expected `K<index>(<time>)`, found `{}`", e.key)));
            continue;
        };
        if index >= MAX_DIM * MAX_DIM {
            diags.push(e.at_key(format!("Kraus index {index} too large")));
            continue;
        }
        let t = match parse_complex(time_text) {
            Ok(z) if z.im == 0.0 => z.re,
            _ => {
                diags.push(e.at_key(format!("malformed time `{time_text}`")));
                continue;
            }
        };
        let m = match operator(e, dim, OperatorSyntax::Matrix) {
            Ok(m) => m,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        let slot = table.entry((t + 0.0).to_bits()).or_insert_with(|| (t, BTreeMap::new()));
        if slot.1.insert(index, m).is_some() {
            diags.push(e.at_key(format!("duplicate Kraus operator K{index}({time_text})")));
        }
    }
    if diags.len() > before {
        return None;
    }
    let mut rows: Vec<(f64, BTreeMap<usize, Matrix<f64>>)> = table.into_values().collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if rows.len() < 2 {
        diags.push(family.at_value(0, "tabulated family needs operators at two or more times"));
        return None;
    }
    let count = rows[0].1.len();
    let mut times = Vec::with_capacity(rows.len());
    let mut operators = Vec::with_capacity(rows.len());
    for (t, ops) in rows {
        if ops.len() != count || ops.keys().enumerate().any(|(i, &k)| i != k) {
            diags.push(family.at_value(0, format!("time {t}: expected operators K0..K{}", count - 1)));
            return None;
        }
        times.push(t);
        operators.push(ops.into_values().collect());
    }
    let fam = KrausFamily::Tabulated { times, operators };
    if let Err(err) = fam.validate(DEFAULT_TOL) {
        diags.push(family.at_value(0, err.to_string()));
        return None;
    }
    if let KrausFamily::Tabulated { times, .. } = &fam {
        for &t in times {
            match fam.completeness_deviation(t) {
                Ok(dev) if dev <= DEFAULT_TOL => {}
                Ok(dev) => {
                    diags.push(family.at_value(0, format!("Σ K†K ≠ I at t = {t} (deviation {dev:e})")));
                    return None;
                }
                Err(err) => {
                    diags.push(family.at_value(0, err.to_string()));
                    return None;
                }
            }
        }
    }
    Some(fam)
}

fn parse_state(header: Option<&Header>, entries: &[Entry<'_>], dim: usize, diags: &mut Vec<Diagnostic>) -> Option<DensityState<f64>> {
    let Some(header) = header else {
        diags.push(diag(1, 1, "missing [state] section"));
        return None;
    };
    let map = keyed(entries, &["ket", "density", "basis"], "state", diags);
    if map.len() != 1 {
        diags.push(diag(header.line, 1, "[state] needs exactly one of `ket`, `density` or `basis`"));
        return None;
    }
    let (&key, e) = map.iter().next().expect("one entry");
    let result = match key {
        "ket" => parse_vector(e.value).map_err(|err| e.literal(err)).and_then(|v| {
            if v.len() != dim {
                return Err(e.at_value(0, format!("ket has {} entries, expected {dim}", v.len())));
            }
            let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if norm2 < 1e-24 {
                return Err(e.at_value(0, "ket has zero norm"));
            }
            DensityState::from_ket(&v, DEFAULT_TOL).map_err(|err| e.at_value(0, format!("invalid state: {err}")))
        }),
        "density" => parse_matrix(e.value, dim)
            .map_err(|err| e.literal(err))
            .and_then(|m| DensityState::new(m, DEFAULT_TOL).map_err(|err| e.at_value(0, format!("invalid state: {err}")))),
        _ => match e.value.parse::<usize>() {
            Ok(i) if i < dim => Ok(DensityState::basis(dim, i).expect("index checked")),
            Ok(i) => Err(e.at_value(0, format!("basis index {i} out of range for dim = {dim}"))),
            Err(_) => Err(e.at_value(0, format!("expected a basis index, found `{}`", e.value))),
        },
    };
    result.map_err(|d| diags.push(d)).ok()
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses and validates a system description. Either every declaration is
/// well formed and consistent, or all problems found are returned.
pub fn parse_system(text: &str) -> Result<SystemSpec, ParseError> {
    let mut diags = Vec::new();
    let sections = split_lines(text, &mut diags);

    let Some(sys_header) = &sections.system_header else {
        diags.push(diag(1, 1, "missing [system] section"));
        return Err(finish(diags));
    };
    let sys = keyed(&sections.system, &["dim", "hbar", "dynamics"], "system", &mut diags);
    let dim = match sys.get("dim") {
        None => {
            diags.push(diag(sys_header.line, 1, "[system] needs `dim`"));
            None
        }
        Some(e) => match e.value.parse::<usize>() {
            Ok(d) if (1..=MAX_DIM).contains(&d) => Some(d),
            Ok(d) => {
                diags.push(e.at_value(0, format!("dim must be between 1 and {MAX_DIM}, got {d}")));
                None
            }
            Err(_) => {
                diags.push(e.at_value(0, format!("expected a positive integer, found `{}`", e.value)));
                None
            }
        },
    };
    let Some(dim) = dim else {
        return Err(finish(diags));
    };
    let hbar = match sys.get("hbar") {
        None => 1.0,
        Some(e) => match real_value(e) {
            Ok(h) if h > 0.0 => h,
            Ok(h) => {
                diags.push(e.at_value(0, format!("hbar must be positive, got {h}")));
                1.0
            }
            Err(d) => {
                diags.push(d);
                1.0
            }
        },
    };
    let declared = sys.get("dynamics").and_then(|e| parse_dynamics(e).map_err(|d| diags.push(d)).ok());

    let ham = keyed(&sections.hamiltonian, &["pauli", "matrix"], "hamiltonian", &mut diags);
    let hamiltonian = if ham.len() > 1 {
        let e = ham.values().last().expect("non-empty");
        diags.push(e.at_key("[hamiltonian] takes a single `pauli` or `matrix` declaration"));
        Matrix::zeros(dim)
    } else if let Some((&key, e)) = ham.iter().next() {
        let syntax = if key == "pauli" { OperatorSyntax::Pauli } else { OperatorSyntax::Matrix };
        match operator(e, dim, syntax).and_then(|h| hermitian(e, &h, "Hamiltonian").map(|_| h)) {
            Ok(h) => h,
            Err(d) => {
                diags.push(d);
                Matrix::zeros(dim)
            }
        }
    } else {
        Matrix::zeros(dim)
    };

    let state = parse_state(sections.state_header.as_ref(), &sections.state, dim, &mut diags);

    let mut observables: Vec<(String, Matrix<f64>)> = Vec::new();
    for e in &sections.observables {
        if !is_identifier(e.key) {
            diags.push(e.at_key(format!("invalid observable name `{}`", e.key)));
            continue;
        }
        if observables.iter().any(|(n, _)| n == e.key) {
            diags.push(e.at_key(format!("duplicate observable `{}`", e.key)));
            continue;
        }
        match operator(e, dim, OperatorSyntax::Auto).and_then(|m| hermitian(e, &m, "observable").map(|_| m)) {
            Ok(m) => observables.push((e.key.to_string(), m)),
            Err(d) => diags.push(d),
        }
    }

    let jumps: Vec<Jump<f64>> = sections
        .jumps
        .iter()
        .filter_map(|(h, entries)| parse_jump(h, entries, dim, &mut diags))
        .collect();

    let kraus = sections
        .kraus_header
        .as_ref()
        .and_then(|h| parse_kraus(h, &sections.kraus, dim, &hamiltonian, hbar, &mut diags));

    let dynamics = match declared {
        Some(d) => d,
        None if sections.kraus_header.is_some() => DynamicsKind::Kraus,
        None if !sections.jumps.is_empty() => DynamicsKind::Lindblad,
        None => DynamicsKind::Unitary,
    };
    let dyn_line = sys.get("dynamics").map_or(sys_header.line, |e| e.line);
    match dynamics {
        DynamicsKind::Unitary if !sections.jumps.is_empty() => {
            diags.push(diag(dyn_line, 1, "unitary dynamics cannot have [jump] sections"))
        }
        DynamicsKind::Kraus if sections.kraus_header.is_none() => {
            diags.push(diag(dyn_line, 1, "kraus dynamics needs a [kraus] section"))
        }
        DynamicsKind::Lindblad | DynamicsKind::Unitary if sections.kraus_header.is_some() => {
            diags.push(diag(dyn_line, 1, "[kraus] section requires `dynamics = kraus`"))
        }
        _ => {}
    }

    if !diags.is_empty() {
        return Err(finish(diags));
    }
    Ok(SystemSpec {
        dim,
        hbar,
        dynamics,
        hamiltonian,
        initial_state: state.expect("no diagnostics implies a state"),
        observables,
        jumps,
        kraus,
        source_digest: hex::encode(Sha256::digest(text.as_bytes())),
    })
}

fn finish(mut diags: Vec<Diagnostic>) -> ParseError {
    diags.sort_by_key(|d| (d.line, d.col));
    ParseError { diagnostics: diags }
}
