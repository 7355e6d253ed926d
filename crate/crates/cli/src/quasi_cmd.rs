use clap::{Args, Subcommand};
use integrable_core::quasiparticle::{
    counting_polynomial, enumerate_states, windows, Bound, Dispersion, ParticleContent,
    QuasiparticleError, QuasiparticleSpec,
};
use num_rational::Rational64;
use serde_json::{json, Map, Value};

use crate::output::{print_json, ratio, Precision};
use crate::CliError;

#[derive(Debug, Subcommand)]
pub enum QuasiCommand {
    /// Momentum window of every species for the given content.
    Windows(QuasiArgs),
    /// All allowed states, optionally in one total-momentum sector.
    Enumerate(EnumerateArgs),
    /// State count by total grid offset.
    Polynomial(QuasiArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct QuasiArgs {
    /// Rows separated by ';', entries by ',', each an integer or p/q.
    #[arg(long, allow_hyphen_values = true)]
    pub b_matrix: String,
    #[arg(long, allow_hyphen_values = true)]
    pub a_vector: String,
    /// Entries may be "inf".
    #[arg(long, allow_hyphen_values = true)]
    pub u_vector: String,
    #[arg(long)]
    pub m_sites: u32,
    /// Particle numbers per species, comma-separated.
    #[arg(long)]
    pub content: String,
    /// Speed v of the linear dispersion v|P|.
    #[arg(long, default_value_t = 1.0)]
    pub speed: f64,
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u8).range(6..=17))]
    pub precision: u8,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub spec: QuasiArgs,
    /// Keep only states with this total momentum (radians, mod 2π).
    #[arg(long)]
    pub sector: Option<f64>,
}

fn parse_rational(s: &str) -> Result<Rational64, CliError> {
    let s = s.trim();
    let bad = |e: &dyn std::fmt::Display| CliError::Usage(format!("bad rational {s:?}: {e}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|e| bad(&e))?;
            let d: i64 = d.trim().parse().map_err(|e| bad(&e))?;
            if d == 0 {
                return Err(bad(&"zero denominator"));
            }
            Ok(Rational64::new(n, d))
        }
        None => Ok(Rational64::from_integer(s.parse().map_err(|e| bad(&e))?)),
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    s.split(',').map(item).collect()
}

fn parse_bound(s: &str) -> Result<Bound, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(Bound::Infinite),
        _ => parse_rational(s).map(Bound::Finite),
    }
}

fn usage(e: QuasiparticleError) -> CliError {
    CliError::Usage(e.to_string())
}

fn core_error(e: QuasiparticleError) -> CliError {
    match e {
        QuasiparticleError::NeedsFiniteU { .. } => CliError::NeedsFinite(e.to_string()),
        QuasiparticleError::EnumerationCap { .. }
        | QuasiparticleError::InvalidDispersion { .. }
        | QuasiparticleError::Overflow => CliError::Failed(e.to_string()),
        other => usage(other),
    }
}

fn build(args: &QuasiArgs) -> Result<(QuasiparticleSpec, ParticleContent), CliError> {
    let b = args
        .b_matrix
        .split(';')
        .map(|row| parse_list(row, parse_rational))
        .collect::<Result<Vec<_>, _>>()?;
    let a = parse_list(&args.a_vector, parse_rational)?;
    let u = parse_list(&args.u_vector, parse_bound)?;
    let counts = parse_list(&args.content, |t| {
        t.trim()
            .parse::<u32>()
            .map_err(|e| CliError::Usage(format!("bad particle count {t:?}: {e}")))
    })?;
    let spec = QuasiparticleSpec::new(args.m_sites, b, a, u)
        .map_err(usage)?
        .with_dispersion(Dispersion::linear(args.speed).map_err(usage)?);
    Ok((spec, ParticleContent::new(counts)))
}

fn spec_json(spec: &QuasiparticleSpec, m: &ParticleContent, speed: f64, prec: Precision) -> Value {
    let b: Vec<Value> = spec
        .b_matrix()
        .iter()
        .map(|row| Value::Array(row.iter().map(|&r| ratio(r)).collect()))
        .collect();
    json!({
        "n_species": spec.n_species(),
        "m_sites": spec.m_sites(),
        "b_matrix": b,
        "a_vector": spec.a_vector().iter().map(|&r| ratio(r)).collect::<Vec<_>>(),
        "u_vector": spec.u_vector().iter().map(|u| u.finite().map_or(Value::Null, ratio)).collect::<Vec<_>>(),
        "speed": prec.num(speed),
        "content": m.counts,
    })
}

pub fn run(cmd: &QuasiCommand) -> Result<(), CliError> {
    match cmd {
        QuasiCommand::Windows(args) => {
            let prec = Precision(usize::from(args.precision));
            let (spec, m) = build(args)?;
            let wins = windows(&spec, &m).map_err(core_error)?;
            let rows: Vec<Value> = wins
                .iter()
                .map(|w| {
                    json!({
                        "species": w.species,
                        "p_min_units": ratio(w.p_min_units),
                        "p_max_units": w.p_max_units.map_or(Value::Null, ratio),
                        "p_min": prec.num(w.p_min(&spec)),
                        "p_max": prec.num(w.p_max(&spec)),
                        "size": w.size,
                        "on_grid": w.on_grid,
                    })
                })
                .collect();
            print_json(&json!({
                "spec": spec_json(&spec, &m, args.speed, prec),
                "windows": rows,
            }))?;
        }
        QuasiCommand::Enumerate(args) => {
            let prec = Precision(usize::from(args.spec.precision));
            let (spec, m) = build(&args.spec)?;
            let states = enumerate_states(&spec, &m, args.sector).map_err(core_error)?;
            let rows: Vec<Value> = states
                .iter()
                .map(|s| {
                    json!({
                        "offsets": s.offsets,
                        "momenta": s.momenta.iter()
                            .map(|ps| ps.iter().map(|&p| prec.num(p)).collect::<Vec<_>>())
                            .collect::<Vec<_>>(),
                        "total_units": ratio(s.total_units),
                        "total_momentum": prec.num(s.total_momentum),
                        "energy": prec.num(s.energy),
                    })
                })
                .collect();
            print_json(&json!({
                "spec": spec_json(&spec, &m, args.spec.speed, prec),
                "sector": args.sector.map(|s| prec.num(s)),
                "count": states.len(),
                "states": rows,
            }))?;
        }
        QuasiCommand::Polynomial(args) => {
            let prec = Precision(usize::from(args.precision));
            let (spec, m) = build(args)?;
            let poly = counting_polynomial(&spec, &m).map_err(core_error)?;
            let coefficients: Map<String, Value> = poly
                .coefficients
                .iter()
                .map(|(k, v)| (k.to_string(), json!(v)))
                .collect();
            print_json(&json!({
                "spec": spec_json(&spec, &m, args.speed, prec),
                "total": poly.total(),
                "coefficients": coefficients,
            }))?;
        }
    }
    Ok(())
}
