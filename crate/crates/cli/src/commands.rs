use clap::{Args, ValueEnum};
use serde::Serialize;
use weakval_core::channels::{self, KrausChannel};
use weakval_core::dirac::{self, dirac_distribution_full};
use weakval_core::linalg::max_abs;
use weakval_core::phase;
use weakval_core::pointer::{reconstruct_expectation_stochastic, PointerConfig};
use weakval_core::pt::{self, BlochState};
use weakval_core::sampling;
use weakval_core::uncertainty::{creation_annihilation_bound_sweep, RELATION_SLACK};
use weakval_core::weak::expectation_via_right_polar;
use weakval_core::{c64, Error, StateVector, C64};

use crate::output::{complex_cells, Cell, Table};
use crate::specs::{parse_channel, parse_operator, parse_pt_params, parse_state};
use crate::CliError;

/// Agreement required between two routes to the same number, relative to
/// the operator scale.
const ROUTE_TOL: f64 = 1e-10;

fn check_routes(name: &'static str, a: C64, b: C64, scale: f64) -> Result<(), CliError> {
    let diff = (a - b).norm();
    if diff > ROUTE_TOL * scale.max(1.0) {
        return Err(CliError::Invariant(Error::InvariantViolation {
            name,
            detail: format!("{a} vs {b} (|diff| = {diff:e})"),
        }));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Stochastic,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PointerArgs {
    /// Number of Monte Carlo trials.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Coupling strength g.
    #[arg(long, default_value_t = 0.05)]
    pub g: f64,
    /// Pointer width σ.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Grid points (power of two, at least 16).
    #[arg(long, default_value_t = 1024)]
    pub grid_points: usize,
    /// Grid half-width L; the grid spans [-L, L).
    #[arg(long, default_value_t = 16.0)]
    pub halfwidth: f64,
}

impl PointerArgs {
    fn config(&self, seed: u64) -> PointerConfig {
        PointerConfig {
            grid_points: self.grid_points,
            grid_halfwidth: self.halfwidth,
            sigma: self.sigma,
            g: self.g,
            seed,
            ..PointerConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExpectationArgs {
    /// Operator spec: JSON [[[re,im],...],...] or lowering:s=N, raising:s=N,
    /// number:s=N, pt:r=,s=,t=,theta=, amp-damp:p=[,k=1|2], pauli:x|y|z,
    /// identity:d=N.
    #[arg(long)]
    pub operator: String,
    /// State spec: JSON [[re,im],...] (normalized on input) or bloch:eta,xi,
    /// phase-state:s,m,theta0, number:n[,dim], equal:s,nu, plus, zero, one.
    #[arg(long)]
    pub state: String,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    pub method: Method,
    #[command(flatten)]
    pub pointer: PointerArgs,
}

pub fn expectation(args: &ExpectationArgs, seed: u64) -> Result<Table, CliError> {
    let a = parse_operator(&args.operator)?;
    let psi = parse_state(&args.state, Some(a.nrows()))?;
    let direct = psi.expectation(&a)?;
    let mut table = Table::new(vec![
        "method",
        "expect_re",
        "expect_im",
        "direct_re",
        "direct_im",
        "weak_re",
        "weak_im",
        "overlap_re",
        "overlap_im",
        "se_re",
        "se_im",
        "n_trials",
        "n_postselected",
    ]);
    let mut row: Vec<Cell> = Vec::with_capacity(table.columns.len());
    match args.method {
        Method::Exact => {
            let w = expectation_via_right_polar(&a, &psi)?;
            check_routes(
                "weak-value route reproduces the expectation value",
                w.reconstructed_expectation,
                direct,
                max_abs(&a),
            )?;
            row.push("exact".into());
            row.extend(complex_cells(Some(w.reconstructed_expectation)));
            row.extend(complex_cells(Some(direct)));
            row.extend(complex_cells(w.weak_value));
            row.extend(complex_cells(Some(w.overlap)));
            row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
        }
        Method::Stochastic => {
            let run = reconstruct_expectation_stochastic(
                &a,
                &psi,
                &args.pointer.config(seed),
                args.pointer.trials,
            )?;
            if run.estimate.is_none() {
                return Err(CliError::Math(Error::InvalidParameter(
                    "no trials survived post-selection".into(),
                )));
            }
            row.push("stochastic".into());
            row.extend(complex_cells(run.estimate));
            row.extend(complex_cells(Some(direct)));
            row.extend(complex_cells(run.record.wv_estimate));
            row.extend(complex_cells(Some(run.overlap)));
            row.extend(complex_cells(run.std_error));
            row.push(run.record.n_trials.into());
            row.push(run.record.n_postselected.into());
        }
    }
    table.push(row);
    Ok(table)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Fig1Args {
    /// Largest truncation s; rows run over s = 1..=s_max.
    #[arg(long, default_value_t = 100)]
    pub s_max: usize,
    /// Phase-grid offset θ₀.
    #[arg(long, default_value_t = 0.0)]
    pub theta0: f64,
    /// Phase-state index m (clamped to s).
    #[arg(long, default_value_t = 0)]
    pub m: usize,
}

pub fn fig1(args: &Fig1Args) -> Result<Table, CliError> {
    let rows = creation_annihilation_bound_sweep(args.s_max, args.theta0, args.m)?;
    let mut table = Table::new(vec![
        "s",
        "lhs",
        "rhs",
        "slack",
        "matrix_lhs",
        "matrix_rhs",
        "polar_rhs",
    ]);
    for r in rows {
        if r.slack() < -RELATION_SLACK {
            return Err(CliError::Invariant(Error::InvariantViolation {
                name: "uncertainty product dominates its bound",
                detail: format!("s = {}: slack {}", r.s, r.slack()),
            }));
        }
        table.push(vec![
            r.s.into(),
            r.lhs.into(),
            r.rhs.into(),
            r.slack().into(),
            r.matrix_lhs.into(),
            r.matrix_rhs.into(),
            r.polar_rhs.into(),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Fig2Args {
    /// Bloch polar angle of the input state.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub theta: f64,
    /// Bloch azimuth of the input state.
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    /// Largest damping probability.
    #[arg(long, default_value_t = 1.0)]
    pub p_max: f64,
    /// Number of evenly spaced p values from 0 to p_max.
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
}

pub fn fig2(args: &Fig2Args) -> Result<Table, CliError> {
    let grid = channels::p_grid(args.p_max, args.steps);
    let rows = channels::fig2_sweep(args.theta, args.phi, &grid)?;
    let mut table = Table::new(vec!["p", "lower", "product", "upper", "lower_weak"]);
    for r in rows {
        table.push(vec![
            r.p.into(),
            r.lower.into(),
            r.product.into(),
            r.upper.into(),
            r.lower_weak.into(),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RamanujanArgs {
    /// Largest truncation s; rows run over s = 1..=s_max.
    #[arg(long, default_value_t = 500)]
    pub s_max: usize,
    /// Global phase ν of the equal superposition.
    #[arg(long, default_value_t = 0.0)]
    pub nu: f64,
}

pub fn ramanujan(args: &RamanujanArgs) -> Result<Table, CliError> {
    if args.s_max < 1 {
        return Err(CliError::Parse("--s-max must be at least 1".into()));
    }
    let rows = phase::ramanujan_sweep(args.s_max, args.nu)?;
    let mut table = Table::new(vec![
        "s",
        "direct_sum",
        "formula_minus_phi",
        "phi",
        "imag_residue",
    ]);
    for r in rows {
        table.push(vec![
            r.s.into(),
            r.direct_sum.into(),
            r.formula_value_minus_phi.into(),
            r.phi_s_2.into(),
            r.imag_residue.into(),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Computational,
    Fourier,
    /// Haar-random, drawn from the run seed.
    Random,
}

fn basis(kind: BasisKind, d: usize, seed: u64) -> Vec<StateVector> {
    match kind {
        BasisKind::Computational => dirac::computational_basis(d),
        BasisKind::Fourier => dirac::fourier_basis(d),
        BasisKind::Random => sampling::random_basis(&mut sampling::rng(seed), d),
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiracArgs {
    /// State spec (see `expectation --help`); `random` draws a Haar state.
    #[arg(long)]
    pub state: String,
    /// Hilbert-space dimension, used by `random` and `number:` states.
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, value_enum, default_value_t = BasisKind::Computational)]
    pub basis_b: BasisKind,
    #[arg(long, value_enum, default_value_t = BasisKind::Fourier)]
    pub basis_c: BasisKind,
}

pub fn dirac(args: &DiracArgs, seed: u64) -> Result<Table, CliError> {
    if args.dim == 0 {
        return Err(CliError::Parse("--dim must be at least 1".into()));
    }
    let psi = if args.state.trim() == "random" {
        sampling::random_state(&mut sampling::rng(seed.wrapping_add(2)), args.dim)
    } else {
        parse_state(&args.state, Some(args.dim))?
    };
    let d = psi.dim();
    let b = basis(args.basis_b, d, seed);
    let c = basis(args.basis_c, d, seed.wrapping_add(1));
    let table = dirac_distribution_full(&b, &c, &psi)?;
    check_routes("distribution sums to one", table.grand_sum(), c64(1.0, 0.0), 1.0)?;
    let proj = |basis: &[StateVector], k: usize| psi.inner(&basis[k]).norm_sqr();
    for (j, col) in table.column_sums().into_iter().enumerate() {
        check_routes(
            "column marginal equals |<c_j|psi>|^2",
            col,
            c64(proj(&c, j), 0.0),
            1.0,
        )?;
    }
    for (i, row) in table.row_sums().into_iter().enumerate() {
        check_routes(
            "row marginal equals |<b_i|psi>|^2",
            row,
            c64(proj(&b, i), 0.0),
            1.0,
        )?;
    }

    let mut out = Table::new(vec!["i", "j", "re", "im", "protocol_undefined"]);
    for i in 0..d {
        for j in 0..d {
            let v = table.values[i][j];
            out.push(vec![
                i.into(),
                j.into(),
                v.re.into(),
                v.im.into(),
                table.protocol_undefined[i][j].into(),
            ]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PtArgs {
    /// Scale of the diagonal entries r e^{±iθ}.
    #[arg(long)]
    pub r: f64,
    /// Lower off-diagonal entry (row 2, column 1).
    #[arg(long)]
    pub s: f64,
    /// Upper off-diagonal entry (row 1, column 2).
    #[arg(long)]
    pub t: f64,
    /// Diagonal phase θ.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Bloch polar angle of the state.
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    /// Bloch azimuth of the state.
    #[arg(long, default_value_t = 0.0)]
    pub xi: f64,
}

pub fn pt(args: &PtArgs) -> Result<Table, CliError> {
    let p = parse_pt_params(&format!(
        "r={},s={},t={},theta={}",
        args.r, args.s, args.t, args.theta
    ))?;
    let eig = pt::pt_eigensystem(&p)?;
    let state = BlochState {
        eta: args.eta,
        xi: args.xi,
    };
    let h = pt::pt_hamiltonian(&p);
    let exp = pt::pt_expectation(&p, &state)?;
    let direct = state.state().expectation(&h)?;
    let scale = max_abs(&h);
    check_routes(
        "weak-value route reproduces <H>",
        exp.weak_route.reconstructed_expectation,
        direct,
        scale,
    )?;
    check_routes(
        "general closed form reproduces <H>",
        exp.general_formula,
        direct,
        scale,
    )?;

    let mut table = Table::new(vec![
        "eps_plus_re",
        "eps_plus_im",
        "eps_minus_re",
        "eps_minus_im",
        "broken",
        "route",
        "expect_re",
        "expect_im",
        "general_re",
        "general_im",
        "printed_re",
        "printed_im",
        "direct_re",
        "direct_im",
    ]);
    let mut row: Vec<Cell> = Vec::new();
    row.extend(complex_cells(Some(eig.eps_plus)));
    row.extend(complex_cells(Some(eig.eps_minus)));
    row.push(eig.broken.into());
    row.push(format!("{:?}", exp.route).as_str().into());
    row.extend(complex_cells(Some(exp.weak_route.reconstructed_expectation)));
    row.extend(complex_cells(Some(exp.general_formula)));
    row.extend(complex_cells(Some(exp.printed_formula)));
    row.extend(complex_cells(Some(direct)));
    table.push(row);
    Ok(table)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChannelArgs {
    /// Channel spec: amp-damp:p=P, identity:d=N, random:dim=N,k=K (seeded).
    #[arg(long)]
    pub kraus: String,
    /// State spec (see `expectation --help`).
    #[arg(long)]
    pub state: String,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    pub method: Method,
    #[command(flatten)]
    pub pointer: PointerArgs,
}

pub fn channel(args: &ChannelArgs, seed: u64) -> Result<Table, CliError> {
    let ch: KrausChannel = parse_channel(&args.kraus, seed)?;
    let psi = parse_state(&args.state, Some(ch.dim()))?;
    let rep = channels::channel_fidelity(&ch, &psi)?;
    let mut table = Table::new(vec![
        "fidelity",
        "fidelity_weak",
        "variance_sum",
        "upper",
        "product",
        "lower",
        "fidelity_mc",
        "fidelity_mc_se",
    ]);
    let mut row: Vec<Cell> = vec![
        rep.fidelity.into(),
        rep.fidelity_weak.into(),
        rep.variance_sum.into(),
    ];
    let b = rep.two_kraus;
    row.push(b.map(|b| b.upper).into());
    row.push(b.map(|b| b.product).into());
    row.push(b.map(|b| b.lower).into());
    match args.method {
        Method::Exact => row.extend([Cell::Empty, Cell::Empty]),
        Method::Stochastic => {
            let mc = channels::channel_fidelity_stochastic(
                &ch,
                &psi,
                &args.pointer.config(seed),
                args.pointer.trials,
            )?;
            row.push(mc.estimate.into());
            row.push(mc.std_error.into());
        }
    }
    table.push(row);
    Ok(table)
}
