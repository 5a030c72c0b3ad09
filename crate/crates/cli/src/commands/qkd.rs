use std::fs;
use std::io::BufWriter;

use cvclone_core::qkd::{simulate_protocol, write_transcript_csv, ProtocolParams, DEFAULT_DISCLOSED_FRACTION};
use serde_json::json;

use crate::args::{Format, QkdArgs};
use crate::config::resolve_seed;
use crate::output::{fmt_num, render, Outcome, Table};
use crate::CliError;

pub const DEFAULT_ROUNDS: usize = 200_000;

pub fn run(args: &QkdArgs) -> Result<Outcome, CliError> {
    let v = args.v.ok_or_else(|| CliError::Usage("qkd needs --v".into()))?;
    let seed = resolve_seed(args.seed)?;
    let params = ProtocolParams::new(v, args.rounds.unwrap_or(DEFAULT_ROUNDS), seed)?
        .with_disclosed_fraction(args.disclosed.unwrap_or(DEFAULT_DISCLOSED_FRACTION))?;
    let run = simulate_protocol(&params, args.noise_b)?;
    let report = &run.report;
    let empirical = report.empirical.as_ref().expect("simulation fills empirical fields");

    let bound = empirical.i_ae_bound.unwrap_or_else(|| (report.i - empirical.empirical_i_ab).max(0.0));
    // exclusion must hold up to sampling error
    let passed = match (empirical.empirical_gap, empirical.stderr_gap) {
        (Some(gap), Some(se)) => gap >= -3.0 * se,
        _ => true,
    };

    let mut json = serde_json::to_value(report).map_err(|e| CliError::Runtime(e.to_string()))?;
    json["v"] = json!(v);
    json["displacement_variance"] = json!(params.displacement_variance());
    json["noise_b"] = json!(args.noise_b);
    json["rounds"] = json!(params.n_rounds());
    json["seed"] = json!(seed);
    json["disclosed_fraction"] = json!(params.disclosed_fraction());

    let mut table = Table::new(&["quantity", "analytic", "empirical", "stderr"]);
    table.push(vec!["i".into(), fmt_num(report.i), String::new(), String::new()]);
    table.push(vec![
        "i_ab".into(),
        fmt_num(report.i_ab),
        fmt_num(empirical.empirical_i_ab),
        fmt_num(empirical.stderr_i_ab),
    ]);
    table.push(vec![
        "i_ae".into(),
        fmt_num(report.i_ae),
        empirical.empirical_i_ae.map(fmt_num).unwrap_or_default(),
        empirical.stderr_i_ae.map(fmt_num).unwrap_or_default(),
    ]);
    table.push(vec![
        "gap".into(),
        fmt_num(report.gap),
        empirical.empirical_gap.map(fmt_num).unwrap_or_default(),
        empirical.stderr_gap.map(fmt_num).unwrap_or_default(),
    ]);

    let summary = format!(
        "I={} I_AB={} I_AE≤{}",
        fmt_num(report.i),
        fmt_num(empirical.empirical_i_ab),
        fmt_num(bound)
    );
    let outcome = Outcome { json, table, text: vec![summary], passed };

    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
        let path = dir.join("transcript.csv");
        let file = fs::File::create(&path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        write_transcript_csv(&run.records, BufWriter::new(file)).map_err(|e| CliError::Runtime(e.to_string()))?;
        let path = dir.join("info.json");
        fs::write(&path, render(&outcome, Format::Json)?)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(outcome)
}
