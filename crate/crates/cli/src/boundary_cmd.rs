use std::path::PathBuf;

use clap::Args;
use covthresh::boundary::{beta_grid, check_phase_rows, phase_table, PhaseRow, PHASE_HEADER};

use crate::failure::Failure;

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    /// Comma-separated values of xi in [0, 2].
    #[arg(long, value_delimiter = ',', default_value = "0,0.75,1.5")]
    xi: Vec<f64>,
    #[arg(long, default_value_t = 0.501)]
    beta_min: f64,
    #[arg(long, default_value_t = 0.999)]
    beta_max: f64,
    /// Grid points per xi.
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// A table written by `boundary`.
    #[arg(long)]
    input: PathBuf,
    /// Tolerance for recomputed values.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

pub fn run(args: &BoundaryArgs) -> Result<String, Failure> {
    if args.points == 0 {
        return Err(Failure::Input("--points must be at least 1".into()));
    }
    if args.beta_min > args.beta_max {
        return Err(Failure::Input("--beta-min exceeds --beta-max".into()));
    }
    let rows = phase_table(
        &args.xi,
        &beta_grid(args.beta_min, args.beta_max, args.points),
    )?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Input(e.to_string());
    w.write_record(PHASE_HEADER).map_err(io)?;
    for row in &rows {
        w.write_record([
            row.xi.to_string(),
            row.beta.to_string(),
            row.rho_star.to_string(),
            row.rho_mean.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Input(e.to_string()))
}

/// Parse a boundary table, rejecting any header other than the documented one.
pub fn read_rows(text: &[u8]) -> Result<Vec<PhaseRow>, Failure> {
    let mut reader = csv::Reader::from_reader(text);
    let headers = reader
        .headers()
        .map_err(|e| Failure::Input(e.to_string()))?;
    if headers.iter().ne(PHASE_HEADER) {
        return Err(Failure::Input(format!("unexpected header {headers:?}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Failure::Input(e.to_string()))?;
        let mut v = [0.0; 4];
        for (slot, cell) in v.iter_mut().zip(record.iter()) {
            *slot = cell
                .parse()
                .map_err(|_| Failure::Input(format!("non-numeric cell '{cell}'")))?;
        }
        rows.push(PhaseRow {
            xi: v[0],
            beta: v[1],
            rho_star: v[2],
            rho_mean: v[3],
        });
    }
    Ok(rows)
}

pub fn check(args: &CheckArgs) -> Result<String, Failure> {
    let text = std::fs::read(&args.input)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", args.input.display())))?;
    let rows = read_rows(&text)?;
    let problems = check_phase_rows(&rows, args.tol);
    if problems.is_empty() {
        Ok(format!("ok: {} rows\n", rows.len()))
    } else {
        Err(Failure::Check(problems.join("\n")))
    }
}
