use clap::{Args, ValueEnum};
use integrable_core::painleve::{
    scaling_table, solve_eta_on_grid, uniform_grid, PainleveIIIParams, DEFAULT_GRID_STEP,
    DEFAULT_X_MAX, DEFAULT_X_MIN,
};
use integrable_core::special_functions::ToleranceSpec;
use serde_json::json;

use crate::output::{print_csv, print_json, Precision};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct PainleveArgs {
    /// Right end of the window, where the asymptote seeds the integration.
    #[arg(long, default_value_t = DEFAULT_X_MAX)]
    pub x_max: f64,
    #[arg(long, default_value_t = DEFAULT_X_MIN)]
    pub x_min: f64,
    /// Spacing of the sample grid.
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    pub grid: f64,
    #[arg(long, default_value_t = 1e-24)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_steps: usize,
    /// Print the scaling functions G± instead of the η table.
    #[arg(long)]
    pub scaling: bool,
    /// Comma-separated radii for --scaling; defaults to the sample grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub r: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Significant digits, 6 to 17.
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u8).range(6..=17))]
    pub precision: u8,
}

pub fn run(args: &PainleveArgs) -> Result<(), CliError> {
    if !(args.x_min > 0.0 && args.x_min < args.x_max && args.x_max.is_finite()) {
        return Err(CliError::Usage(format!(
            "need 0 < x_min < x_max, got x_min = {}, x_max = {}",
            args.x_min, args.x_max
        )));
    }
    if !(args.grid > 0.0 && args.grid.is_finite()) {
        return Err(CliError::Usage(format!("grid step must be positive, got {}", args.grid)));
    }
    let tol = ToleranceSpec::new(args.abs_tol, args.rel_tol, args.max_steps)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let prec = Precision(usize::from(args.precision));

    let grid = uniform_grid(args.x_min, args.x_max, args.grid);
    let mut radii = args.r.clone();
    if args.scaling {
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        if let Some(&bad) = radii.iter().find(|&&r| !(r >= args.x_min && r <= args.x_max)) {
            return Err(CliError::Usage(format!(
                "r = {bad} outside [{}, {}]",
                args.x_min, args.x_max
            )));
        }
    }

    let traj = solve_eta_on_grid(&PainleveIIIParams::ising(), args.x_max, args.x_min, &grid, &tol)
        .map_err(|e| CliError::Failed(format!("integration failed: {e}")))?;

    if args.scaling {
        if radii.is_empty() {
            radii = traj.samples().iter().map(|s| s.x).collect();
        }
        let table = scaling_table(&traj, &radii, &tol)
            .map_err(|e| CliError::Failed(format!("scaling function failed: {e}")))?;
        match args.format {
            Format::Csv => {
                print_csv(
                    &["r", "g_plus", "g_minus", "est_error"],
                    table
                        .iter()
                        .map(|v| [v.r, v.g_plus, v.g_minus, v.est_error].map(|x| prec.text(x)).to_vec()),
                )?;
            }
            Format::Json => {
                let rows: Vec<_> = table
                    .iter()
                    .map(|v| {
                        json!({
                            "r": prec.num(v.r),
                            "g_plus": prec.num(v.g_plus),
                            "g_minus": prec.num(v.g_minus),
                            "est_error": prec.num(v.est_error),
                        })
                    })
                    .collect();
                print_json(&json!({ "scaling": rows }))?;
            }
        }
        return Ok(());
    }

    match args.format {
        Format::Csv => {
            print_csv(
                &["x", "eta", "eta_prime", "residual"],
                traj.samples()
                    .iter()
                    .map(|s| [s.x, s.eta, s.eta_prime, s.residual].map(|x| prec.text(x)).to_vec()),
            )?;
        }
        Format::Json => {
            let rows: Vec<_> = traj
                .samples()
                .iter()
                .map(|s| {
                    json!({
                        "x": prec.num(s.x),
                        "eta": prec.num(s.eta),
                        "eta_prime": prec.num(s.eta_prime),
                        "deficit": prec.num(s.deficit),
                        "residual": prec.num(s.residual),
                        "est_error": prec.num(s.est_error),
                    })
                })
                .collect();
            print_json(&json!({
                "x_min": prec.num(traj.x_min()),
                "x_max": prec.num(traj.x_max()),
                "steps": traj.steps(),
                "max_residual": prec.num(traj.max_residual()),
                "samples": rows,
            }))?;
        }
    }
    Ok(())
}
