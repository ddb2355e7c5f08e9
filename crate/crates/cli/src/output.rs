//! Table emission in CSV or JSON. Formatting is fixed-precision
//! scientific notation, so identical runs produce identical bytes.

use serde::Serialize;

/// One output row common to `pd-curve` (closed form only) and
/// `simulate` (Monte Carlo plus closed form).
#[derive(Debug, Clone, Serialize)]
pub struct OutRow {
    pub detector: String,
    pub sinr_db: f64,
    pub eta: f64,
    pub pd_closed: Option<f64>,
    pub pd_mc: Option<f64>,
    pub pd_stderr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10e}")).unwrap_or_default()
}

pub fn render(rows: &[OutRow], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::from("detector,sinr_db,eta,pd_closed,pd_mc,pd_stderr\n");
            for row in rows {
                out.push_str(&format!(
                    "{},{},{:.10e},{},{},{}\n",
                    row.detector,
                    row.sinr_db,
                    row.eta,
                    fmt_opt(row.pd_closed),
                    fmt_opt(row.pd_mc),
                    fmt_opt(row.pd_stderr),
                ));
            }
            out
        }
        Format::Json => {
            let mut out = serde_json::to_string_pretty(rows).expect("rows serialize");
            out.push('\n');
            out
        }
    }
}

pub fn emit(text: &str, output: Option<&std::path::Path>) -> std::io::Result<()> {
    match output {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}
