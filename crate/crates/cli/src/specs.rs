//! Operator, state and channel spec strings.
//!
//! A spec is either inline JSON (`[[re, im], ...]` for states, a list of such
//! rows for matrices) or a named builder `name:args`, where args are
//! comma-separated and either positional or `key=value`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use weakval_core::channels::{self, KrausChannel};
use weakval_core::linalg;
use weakval_core::phase::{self, PhaseSpaceConfig};
use weakval_core::pt::{self, PTParams};
use weakval_core::sampling;
use weakval_core::{c64, ComplexMatrix, StateVector};

use crate::CliError;

/// Named builder arguments, looked up by key or by position.
struct Args {
    name: String,
    positional: Vec<String>,
    named: BTreeMap<String, String>,
}

impl Args {
    fn parse(spec: &str) -> Self {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut positional = Vec::new();
        let mut named = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once('=') {
                Some((k, v)) => {
                    named.insert(k.trim().to_string(), v.trim().to_string());
                }
                None => positional.push(item.to_string()),
            }
        }
        Self {
            name: name.trim().to_string(),
            positional,
            named,
        }
    }

    fn raw(&self, key: &str, pos: usize) -> Option<&str> {
        self.named
            .get(key)
            .map(String::as_str)
            .or_else(|| self.positional.get(pos).map(String::as_str))
    }

    fn f64(&self, key: &str, pos: usize, default: Option<f64>) -> Result<f64, CliError> {
        match self.raw(key, pos) {
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Parse(format!("{}: `{key}` = `{v}` is not a number", self.name))),
            None => default.ok_or_else(|| CliError::Parse(format!("{}: missing `{key}`", self.name))),
        }
    }

    fn usize(&self, key: &str, pos: usize, default: Option<usize>) -> Result<usize, CliError> {
        match self.raw(key, pos) {
            Some(v) => v.parse().map_err(|_| {
                CliError::Parse(format!(
                    "{}: `{key}` = `{v}` is not a non-negative integer",
                    self.name
                ))
            }),
            None => default.ok_or_else(|| CliError::Parse(format!("{}: missing `{key}`", self.name))),
        }
    }
}

fn parse_pairs(v: &serde_json::Value) -> Result<Vec<weakval_core::C64>, CliError> {
    let pairs: Vec<[f64; 2]> = serde_json::from_value(v.clone())
        .map_err(|e| CliError::Parse(format!("expected a list of [re, im] pairs: {e}")))?;
    Ok(pairs.into_iter().map(|[re, im]| c64(re, im)).collect())
}

fn parse_json_matrix(spec: &str) -> Result<ComplexMatrix, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(spec).map_err(|e| CliError::Parse(format!("operator JSON: {e}")))?;
    let rows = value
        .as_array()
        .ok_or_else(|| CliError::Parse("operator JSON must be a list of rows".into()))?
        .iter()
        .map(parse_pairs)
        .collect::<Result<Vec<_>, _>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Parse(
            "operator JSON must be a non-empty square matrix".into(),
        ));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn parse_pt_params(args_spec: &str) -> Result<PTParams, CliError> {
    let args = Args::parse(&format!("pt:{args_spec}"));
    Ok(PTParams::new(
        args.f64("r", 0, None)?,
        args.f64("s", 1, None)?,
        args.f64("t", 2, None)?,
        args.f64("theta", 3, Some(0.0))?,
    )?)
}

/// Builds an operator. Named forms: `lowering:s=4`, `raising:s=4`,
/// `number:s=4`, `pt:r=1,s=2,t=3,theta=0.785`, `amp-damp:p=0.5[,k=2]`,
/// `pauli:x|y|z`, `identity:d=3`.
pub fn parse_operator(spec: &str) -> Result<ComplexMatrix, CliError> {
    let spec = spec.trim();
    if spec.starts_with('[') {
        return parse_json_matrix(spec);
    }
    let args = Args::parse(spec);
    let m = match args.name.as_str() {
        "lowering" => phase::lowering_operator(positive(args.usize("s", 0, None)?, "s")?),
        "raising" => phase::raising_operator(positive(args.usize("s", 0, None)?, "s")?),
        "number" => phase::number_operator(positive(args.usize("s", 0, None)?, "s")?),
        "identity" => linalg::identity(positive(args.usize("d", 0, None)?, "d")?),
        "pt" => pt::pt_hamiltonian(&parse_pt_params(spec.split_once(':').map_or("", |x| x.1))?),
        "amp-damp" => {
            let ch = channels::amplitude_damping(args.f64("p", 0, None)?)?;
            let k = args.usize("k", 1, Some(2))?;
            if !(1..=2).contains(&k) {
                return Err(CliError::Parse(format!("amp-damp: k = {k} must be 1 or 2")));
            }
            ch.kraus()[k - 1].clone()
        }
        "pauli" => {
            let axis = args.raw("axis", 0).unwrap_or("");
            let (z, o, i) = (c64(0., 0.), c64(1., 0.), c64(0., 1.));
            match axis {
                "x" => linalg::from_rows(&[&[z, o], &[o, z]]),
                "y" => linalg::from_rows(&[&[z, -i], &[i, z]]),
                "z" => linalg::diag_real(&[1.0, -1.0]),
                other => return Err(CliError::Parse(format!("pauli: unknown axis `{other}`"))),
            }
        }
        other => return Err(CliError::Parse(format!("unknown operator builder `{other}`"))),
    };
    Ok(m)
}

fn positive(n: usize, key: &str) -> Result<usize, CliError> {
    if n == 0 {
        return Err(CliError::Parse(format!("`{key}` must be at least 1")));
    }
    Ok(n)
}

/// Builds a state. Named forms: `bloch:eta,xi`, `phase-state:s,m,theta0`,
/// `number:n[,dim]`, `equal:s,nu`, `plus`, `zero`, `one`. Inline JSON
/// amplitudes are normalized. `dim_hint` sizes `number:` when `dim` is omitted.
pub fn parse_state(spec: &str, dim_hint: Option<usize>) -> Result<StateVector, CliError> {
    let spec = spec.trim();
    if spec.starts_with('[') {
        let value: serde_json::Value =
            serde_json::from_str(spec).map_err(|e| CliError::Parse(format!("state JSON: {e}")))?;
        return Ok(StateVector::normalized(parse_pairs(&value)?)?);
    }
    let args = Args::parse(spec);
    let state = match args.name.as_str() {
        "bloch" => StateVector::bloch(args.f64("eta", 0, None)?, args.f64("xi", 1, Some(0.0))?),
        "phase-state" => {
            let cfg = PhaseSpaceConfig::new(args.usize("s", 0, None)?, args.f64("theta0", 2, Some(0.0))?)?;
            phase::phase_state(&cfg, args.usize("m", 1, Some(0))?)?
        }
        "number" => {
            let n = args.usize("n", 0, None)?;
            let dim = args.usize("dim", 1, Some(dim_hint.unwrap_or(n + 1)))?;
            StateVector::basis(dim, n)?
        }
        "equal" => phase::equal_superposition(
            positive(args.usize("s", 0, None)?, "s")?,
            args.f64("nu", 1, Some(0.0))?,
        ),
        "plus" => StateVector::new(vec![c64(FRAC_1_SQRT_2, 0.0), c64(FRAC_1_SQRT_2, 0.0)])?,
        "zero" => StateVector::basis(2, 0)?,
        "one" => StateVector::basis(2, 1)?,
        other => return Err(CliError::Parse(format!("unknown state builder `{other}`"))),
    };
    Ok(state)
}

/// Builds a channel: `amp-damp:p=0.5`, `identity:d=2`, `random:dim=3,k=2`
/// (sampled from `seed`).
pub fn parse_channel(spec: &str, seed: u64) -> Result<KrausChannel, CliError> {
    let args = Args::parse(spec.trim());
    let ch = match args.name.as_str() {
        "amp-damp" => channels::amplitude_damping(args.f64("p", 0, None)?)?,
        "identity" => KrausChannel::identity(positive(args.usize("d", 0, Some(2))?, "d")?),
        "random" => {
            let dim = positive(args.usize("dim", 0, Some(2))?, "dim")?;
            let k = positive(args.usize("k", 1, Some(2))?, "k")?;
            sampling::random_channel(&mut sampling::rng(seed), dim, k)?
        }
        other => return Err(CliError::Parse(format!("unknown channel builder `{other}`"))),
    };
    Ok(ch)
}
