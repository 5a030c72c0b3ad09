use cvclone_core::cloners::{build_circuit_cloner, run_cloner};
use cvclone_core::grid::{
    check_fourier_self_dual, clone_wave_function, grid_fidelity, reduced_density, squeezed_wavefunction, GridParams,
    OutputMode,
};
use serde_json::json;

use crate::args::{InputSpec, OracleArgs};
use crate::output::{fmt_num, Outcome, Table};
use crate::CliError;

/// Relative deviation allowed between grid and covariance results.
pub const ORACLE_GATE: f64 = 0.05;

struct Row {
    quantity: String,
    grid: f64,
    analytic: f64,
    gate: f64,
}

impl Row {
    fn deviation(&self) -> f64 {
        (self.grid - self.analytic).abs()
    }

    fn passed(&self) -> bool {
        self.deviation() <= self.gate * self.analytic.abs().max(1.0)
    }
}

pub fn run(args: &OracleArgs) -> Result<Outcome, CliError> {
    let params = GridParams::new(args.grid.unwrap_or(64), args.extent.unwrap_or(8.0))?;
    let input = args.input.unwrap_or(InputSpec::Vacuum);
    let (r, x0, p0) = match input {
        InputSpec::Vacuum => (0.0, 0.0, 0.0),
        InputSpec::Coherent { x, p } => (0.0, x, p),
        InputSpec::Squeezed { r, x, p } => (r, x, p),
    };
    let psi = squeezed_wavefunction(r, x0, p0);
    let grid = clone_wave_function(psi, params)?;

    let build = build_circuit_cloner();
    let state = input.state();
    let analytic = build.output_state(&state)?;
    let report = run_cloner(&build, &state)?;

    let mut rows = Vec::new();
    let names = ["clone_a", "clone_b", "anticlone"];
    let modes = [OutputMode::CloneA, OutputMode::CloneB, OutputMode::Ancilla];
    let mut grid_fid = Vec::new();
    let mut grid_vars = Vec::new();
    let mut anticlone_mean = [0.0; 2];
    for (k, (name, mode)) in names.iter().zip(modes).enumerate() {
        let rho = reduced_density(&grid, mode);
        let (xm, xv) = rho.position_moments();
        let (pm, pv) = rho.momentum_moments();
        let mean = analytic.mode_mean(k);
        let var = analytic.mode_variances(k);
        for (q, g, a) in [("mean_x", xm, mean[0]), ("mean_p", pm, mean[1]), ("var_x", xv, var[0]), ("var_p", pv, var[1])] {
            rows.push(Row { quantity: format!("{name}.{q}"), grid: g, analytic: a, gate: ORACLE_GATE });
        }
        if k < 2 {
            let f = grid_fidelity(&rho, psi);
            rows.push(Row { quantity: format!("{name}.fidelity"), grid: f, analytic: report.fidelity[k], gate: ORACLE_GATE });
            grid_fid.push(f);
            grid_vars.push([xv, pv]);
        } else {
            anticlone_mean = [xm, pm];
        }
    }
    let fourier = check_fourier_self_dual(&params);
    rows.push(Row { quantity: "fourier_self_dual".into(), grid: fourier, analytic: 0.0, gate: ORACLE_GATE });

    let passed = rows.iter().all(Row::passed);
    let mut table = Table::new(&["quantity", "grid", "analytic", "deviation", "pass"]);
    for row in &rows {
        table.push(vec![
            row.quantity.clone(),
            fmt_num(row.grid),
            fmt_num(row.analytic),
            fmt_num(row.deviation()),
            row.passed().to_string(),
        ]);
    }
    let json = json!({
        "grid_points": params.points_per_axis(),
        "half_extent": params.half_extent(),
        "input": input.to_string(),
        "fidelity": grid_fid,
        "marginal_variances": grid_vars,
        "anticlone_mean": anticlone_mean,
        "fourier_self_dual_deviation": fourier,
        "gate": ORACLE_GATE,
        "passed": passed,
        "rows": rows.iter().map(|r| json!({
            "quantity": r.quantity,
            "grid": r.grid,
            "analytic": r.analytic,
            "deviation": r.deviation(),
            "pass": r.passed(),
        })).collect::<Vec<_>>(),
    });
    Ok(Outcome { json, table, text: Vec::new(), passed })
}
