use clap::{Args, Subcommand};
use integrable_core::chiral_potts::{
    commutator_norm, curve_residuals, make_curve_point, order_parameter, order_parameter_exponent,
    transfer_matrix, weight_table, ChiralPottsError, CurvePoint, Modulus, RootBranch,
    TransferMatrixSpec,
};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::output::{print_json, Precision};
use crate::CliError;

/// Points whose curve residual exceeds this are rejected.
const CURVE_TOL: f64 = 1e-12;

#[derive(Debug, Subcommand)]
pub enum ChiralCommand {
    /// Boltzmann weight ratios W^h(n), W^v(n) for the pair (p, q).
    Weights(PairArgs),
    /// Row-to-row transfer matrix T(p, q).
    Transfer(TransferArgs),
    /// Relative commutator of T(p, q) and T(p, q2); exit 0 iff below --tol.
    Commutator(CommutatorArgs),
    /// Spontaneous order parameter (1 − k²)^{n(N−n)/(2N²)}.
    OrderParam(OrderArgs),
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct CurveArgs {
    /// Number of states N.
    #[arg(long = "n", visible_alias = "n-states")]
    pub n_states: usize,
    /// Curve modulus k in (0, 1).
    #[arg(long)]
    pub k: f64,
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u8).range(6..=17))]
    pub precision: u8,
}

/// One rapidity given by `a`, `b` ("re,im"), root branches ("c,d") and
/// optional explicit `c`, `d`.
#[derive(Debug, Clone)]
pub struct PointArgs {
    pub a: Complex64,
    pub b: Complex64,
    pub branch: (usize, usize),
    pub c: Option<Complex64>,
    pub d: Option<Complex64>,
}

macro_rules! point_args {
    ($name:ident, $a:literal, $b:literal, $br:literal, $c:literal, $d:literal) => {
        #[derive(Debug, Clone, Args)]
        pub struct $name {
            #[arg(id = $a, long = $a, value_parser = parse_complex, allow_hyphen_values = true)]
            a: Complex64,
            #[arg(id = $b, long = $b, value_parser = parse_complex, allow_hyphen_values = true)]
            b: Complex64,
            #[arg(id = $br, long = $br, value_parser = parse_branch, default_value = "0,0")]
            branch: (usize, usize),
            #[arg(id = $c, long = $c, value_parser = parse_complex, allow_hyphen_values = true)]
            c: Option<Complex64>,
            #[arg(id = $d, long = $d, value_parser = parse_complex, allow_hyphen_values = true)]
            d: Option<Complex64>,
        }

        impl From<&$name> for PointArgs {
            fn from(p: &$name) -> Self {
                PointArgs {
                    a: p.a,
                    b: p.b,
                    branch: p.branch,
                    c: p.c,
                    d: p.d,
                }
            }
        }
    };
}

point_args!(PArgs, "pa", "pb", "p-branch", "pc", "pd");
point_args!(QArgs, "qa", "qb", "q-branch", "qc", "qd");
point_args!(Q2Args, "q2a", "q2b", "q2-branch", "q2c", "q2d");

#[derive(Debug, Args)]
pub struct PairArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[command(flatten)]
    pub p: PArgs,
    #[command(flatten)]
    pub q: QArgs,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Number of sites in a row (periodic).
    #[arg(long, default_value_t = 2)]
    pub width: usize,
}

#[derive(Debug, Args)]
pub struct CommutatorArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub q2: Q2Args,
    #[arg(long, default_value_t = 2)]
    pub width: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[arg(long)]
    pub n_states: usize,
    /// Power n of the spin, 1 <= n < N.
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long)]
    pub k: f64,
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u8).range(6..=17))]
    pub precision: u8,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse(re)?, parse(im)?)),
        _ => Err(format!("expected \"re,im\", got {s:?}")),
    }
}

fn parse_branch(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [c, d] => Ok((
            c.parse().map_err(|e| format!("bad branch {c:?}: {e}"))?,
            d.parse().map_err(|e| format!("bad branch {d:?}: {e}"))?,
        )),
        _ => Err(format!("expected \"c,d\", got {s:?}")),
    }
}

fn core_error(e: ChiralPottsError) -> CliError {
    match e {
        ChiralPottsError::SingularWeight { .. } => CliError::Singular(e.to_string()),
        ChiralPottsError::OffCurve(..) => CliError::OffCurve(e.to_string()),
        ChiralPottsError::DimensionCap { .. } => CliError::Failed(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn build_point(curve: &CurveArgs, args: &PointArgs, label: &str) -> Result<CurvePoint, CliError> {
    let modulus = Modulus::new(curve.k).map_err(core_error)?;
    let (bc, bd) = args.branch;
    let mut p = make_curve_point(curve.n_states, modulus, args.a, args.b, RootBranch::new(bc, bd))
        .map_err(core_error)?;
    if args.c.is_none() && args.d.is_none() {
        return Ok(p);
    }
    p.c = args.c.unwrap_or(p.c);
    p.d = args.d.unwrap_or(p.d);
    let (r1, r2) = curve_residuals(&p).map_err(core_error)?;
    if r1.max(r2) > CURVE_TOL {
        return Err(CliError::OffCurve(format!(
            "{label}: {}",
            ChiralPottsError::OffCurve(r1, r2)
        )));
    }
    Ok(p)
}

fn point_json(p: &CurvePoint, prec: Precision) -> Result<Value, CliError> {
    let (r1, r2) = curve_residuals(p).map_err(core_error)?;
    Ok(json!({
        "a": prec.complex(p.a),
        "b": prec.complex(p.b),
        "c": prec.complex(p.c),
        "d": prec.complex(p.d),
        "curve_residuals": [prec.num(r1), prec.num(r2)],
        "has_zero_coordinate": p.has_zero_coordinate(),
    }))
}

fn pair(args: &PairArgs) -> Result<(CurvePoint, CurvePoint), CliError> {
    let p = build_point(&args.curve, &PointArgs::from(&args.p), "p")?;
    let q = build_point(&args.curve, &PointArgs::from(&args.q), "q")?;
    Ok((p, q))
}

pub fn run(cmd: &ChiralCommand) -> Result<(), CliError> {
    match cmd {
        ChiralCommand::Weights(args) => {
            let prec = Precision(usize::from(args.curve.precision));
            let (p, q) = pair(args)?;
            let w = weight_table(&p, &q).map_err(core_error)?;
            print_json(&json!({
                "n_states": w.n_states,
                "k": prec.num(args.curve.k),
                "p": point_json(&p, prec)?,
                "q": point_json(&q, prec)?,
                "omega": prec.complex(w.omega),
                "w_h": prec.complex_list(&w.w_h),
                "w_v": prec.complex_list(&w.w_v),
                "periodicity_h": prec.num(w.periodicity_h),
                "periodicity_v": prec.num(w.periodicity_v),
            }))?;
        }
        ChiralCommand::Transfer(args) => {
            let prec = Precision(usize::from(args.pair.curve.precision));
            let (p, q) = pair(&args.pair)?;
            let w = weight_table(&p, &q).map_err(core_error)?;
            let t = transfer_matrix(&TransferMatrixSpec::new(args.width, w)).map_err(core_error)?;
            let rows: Vec<Value> = t
                .rows()
                .into_iter()
                .map(|row| prec.complex_list(&row.to_vec()))
                .collect();
            print_json(&json!({
                "n_states": p.n_states,
                "width": args.width,
                "dimension": t.nrows(),
                "matrix": rows,
            }))?;
        }
        ChiralCommand::Commutator(args) => {
            let prec = Precision(usize::from(args.pair.curve.precision));
            let (p, q) = pair(&args.pair)?;
            let q2 = build_point(&args.pair.curve, &PointArgs::from(&args.q2), "q2")?;
            let norm = commutator_norm(&p, &q, &q2, args.width).map_err(core_error)?;
            let commutes = norm < args.tol;
            print_json(&json!({
                "n_states": p.n_states,
                "width": args.width,
                "norm": prec.num(norm),
                "tol": prec.num(args.tol),
                "commutes": commutes,
            }))?;
            if !commutes {
                return Err(CliError::CheckFailed(format!(
                    "commutator norm {norm:e} is not below {:e}",
                    args.tol
                )));
            }
        }
        ChiralCommand::OrderParam(args) => {
            let prec = Precision(usize::from(args.precision));
            let beta = order_parameter_exponent(args.n_states, args.n).map_err(core_error)?;
            let value = order_parameter(args.n_states, args.n, args.k).map_err(core_error)?;
            print_json(&json!({
                "n_states": args.n_states,
                "n": args.n,
                "k": prec.num(args.k),
                "exponent": beta.to_string(),
                "value": prec.num(value),
            }))?;
        }
    }
    Ok(())
}
