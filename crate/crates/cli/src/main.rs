mod config;
mod plot;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use fracquant::asymptotics::{
    beta, coefficient_table, dimension, dimension_table_with, kappa, subsequence_limits,
    AsymptoticsRow,
};
use fracquant::construction::{build_alpha_m_with, closed_v_f};
use fracquant::distortion::DistortionOptions;
use fracquant::model::{nu_moments, p_moments, NuSpec};
use fracquant::oracle::{verify_many, OracleOptions};
use fracquant::sequences::f_of;
use fracquant::{Execution, Variant};
use serde_json::{json, Value};

use config::{FileConfig, Format, Overrides, RunConfig};
use plot::{Chart, Series};

#[derive(Parser, Debug)]
#[command(name = "fracquant", version, about = "Exact optimal quantizers for condensation measures")]
struct Cli {
    /// Condensation measure: nu1, nu2, nu3 or nu4 [default: nu1]
    #[arg(long, global = true, value_parser = parse_variant)]
    variant: Option<Variant>,
    /// Output format [default: json; svg for `plot`]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// TOML file with default settings; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Bits used for float exports of exact values [default: 128]
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    /// Run single-threaded
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Means and variances of ν and P
    Moments,
    /// An optimal set of m-means with its exact quantization error
    OptimalSet {
        #[arg(long)]
        m: u64,
    },
    /// Closed-form errors V_{F(n)} for n = 1..N
    ErrorTable {
        #[arg(long, default_value_t = 20)]
        max_n: u32,
    },
    /// Compare the constructed set with a dynamic-programming optimum on a discretization
    OracleCheck {
        #[arg(long)]
        m: u64,
        /// [default: 8]
        #[arg(long)]
        depth_p: Option<u32>,
        /// [default: 8]
        #[arg(long)]
        depth_nu: Option<u32>,
        /// [default: 1e-6]
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Dimension estimates 2 ln F(n) / -ln V_{F(n)}
    Dimension {
        #[arg(long, default_value_t = 40)]
        max_n: u32,
    },
    /// Scaled errors F(n)^{2/d} V_{F(n)}
    Coefficient {
        /// A number, or one of: auto (the quantization dimension), beta, kappa [default: auto]
        #[arg(long, value_parser = parse_dim)]
        dim: Option<DimArg>,
        #[arg(long, default_value_t = 40)]
        max_n: u32,
    },
    /// SVG chart of errors, dimension estimates or coefficients
    Plot {
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long, default_value_t = 40)]
        max_n: u32,
        #[arg(long, value_parser = parse_dim)]
        dim: Option<DimArg>,
        /// Draw all four measures instead of the selected one
        #[arg(long)]
        all_variants: bool,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long, default_value_t = 500)]
        height: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PlotKind {
    Error,
    Dimension,
    Coefficient,
}

#[derive(Clone, Copy, Debug)]
enum DimArg {
    Auto,
    Beta,
    Kappa,
    Value(f64),
}

impl DimArg {
    fn resolve(self, v: Variant) -> f64 {
        match self {
            DimArg::Auto => dimension(v),
            DimArg::Beta => beta(v),
            DimArg::Kappa => kappa(),
            DimArg::Value(d) => d,
        }
    }
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

fn parse_dim(s: &str) -> Result<DimArg, String> {
    match s {
        "auto" => Ok(DimArg::Auto),
        "beta" => Ok(DimArg::Beta),
        "kappa" => Ok(DimArg::Kappa),
        _ => match s.parse::<f64>() {
            Ok(d) if d.is_finite() && d > 0.0 => Ok(DimArg::Value(d)),
            _ => Err(format!("expected a positive number, auto, beta or kappa; got {s:?}")),
        },
    }
}

enum Status {
    Ok,
    VerificationFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let (depth_p, depth_nu, tol) = match &cli.command {
        Command::OracleCheck { depth_p, depth_nu, tol, .. } => (*depth_p, *depth_nu, *tol),
        _ => (None, None, None),
    };
    let cfg = RunConfig::resolve(
        Overrides {
            variant: cli.variant,
            format: cli.format,
            tol,
            depth_p,
            depth_nu,
            precision_bits: cli.precision_bits,
            output: cli.output,
            sequential: cli.sequential,
        },
        file,
    )?;
    if let Some(bits) = cfg.precision_bits {
        // Read back by the library whenever it rounds to floats.
        std::env::set_var("FRACQUANT_PRECISION_BITS", bits.to_string());
    }
    let exec = if cfg.sequential { Execution::Sequential } else { Execution::default() };
    let v = cfg.variant;

    let (body, status) = match cli.command {
        Command::Moments => (moments(v, data_format(&cfg)?)?, Status::Ok),
        Command::OptimalSet { m } => (optimal_set(v, m, exec, data_format(&cfg)?)?, Status::Ok),
        Command::ErrorTable { max_n } => (error_table(&cfg, max_n)?, Status::Ok),
        Command::OracleCheck { m, .. } => oracle_check(&cfg, m, exec)?,
        Command::Dimension { max_n } => (dimension_cmd(&cfg, max_n, exec)?, Status::Ok),
        Command::Coefficient { dim, max_n } => {
            (coefficient_cmd(&cfg, dim.unwrap_or(DimArg::Auto), max_n)?, Status::Ok)
        }
        Command::Plot { kind, max_n, dim, all_variants, width, height } => {
            if matches!(cfg.format, Some(f) if f != Format::Svg) {
                bail!("plot only writes svg");
            }
            let variants = if all_variants { Variant::ALL.to_vec() } else { vec![v] };
            let dim = dim.unwrap_or(DimArg::Auto);
            let chart = match kind {
                PlotKind::Error => error_chart(&variants, max_n)?,
                PlotKind::Dimension => dimension_chart(&variants, max_n, exec)?,
                PlotKind::Coefficient => coefficient_chart(&variants, dim, max_n)?,
            };
            (sized(chart, width, height)?.render(), Status::Ok)
        }
    };
    emit(&cfg, &body)?;
    Ok(status)
}

fn sized(mut chart: Chart, width: u32, height: u32) -> anyhow::Result<Chart> {
    if width < 200 || height < 150 {
        bail!("plot must be at least 200x150");
    }
    chart.width = width;
    chart.height = height;
    Ok(chart)
}

/// JSON or CSV; svg is rejected for commands without a chart.
fn data_format(cfg: &RunConfig) -> anyhow::Result<Format> {
    match cfg.format.unwrap_or(Format::Json) {
        Format::Svg => bail!("this command has no svg output; use json or csv"),
        f => Ok(f),
    }
}

fn emit(cfg: &RunConfig, body: &str) -> anyhow::Result<()> {
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn to_json(value: &impl serde::Serialize) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn to_csv(header: &[&str], rows: Vec<Vec<String>>) -> anyhow::Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn moments(v: Variant, format: Format) -> anyhow::Result<String> {
    let nu = NuSpec::variant(v);
    let (e, var) = p_moments(&nu);
    let (e_nu, w) = nu_moments(&nu);
    let items = [("E", e), ("W", w), ("V", var), ("E_nu", e_nu)];
    match format {
        Format::Csv => to_csv(
            &["quantity", "exact", "decimal"],
            items.iter().map(|(k, x)| vec![k.to_string(), x.to_string(), x.decimal()]).collect(),
        ),
        _ => {
            let mut obj = serde_json::Map::new();
            let mut decimals = serde_json::Map::new();
            obj.insert("variant".into(), v.name().into());
            for (k, x) in &items {
                obj.insert(k.to_string(), x.to_string().into());
                decimals.insert(k.to_string(), x.decimal().into());
            }
            obj.insert("decimals".into(), Value::Object(decimals));
            to_json(&obj)
        }
    }
}

fn optimal_set(v: Variant, m: u64, exec: Execution, format: Format) -> anyhow::Result<String> {
    let bundle = build_alpha_m_with(v, m, &DistortionOptions::default().with_execution(exec))?;
    match format {
        Format::Csv => {
            let rows = bundle
                .points
                .points()
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    vec![
                        (i + 1).to_string(),
                        p.provenance.as_ref().map(|a| a.to_string()).unwrap_or_default(),
                        p.value.to_string(),
                        p.value.decimal(),
                    ]
                })
                .collect();
            to_csv(&["index", "address", "value", "decimal"], rows)
        }
        _ => to_json(&bundle),
    }
}

fn error_rows(v: Variant, max_n: u32) -> anyhow::Result<Vec<(u32, String, fracquant::Scalar)>> {
    if max_n == 0 {
        bail!("--max-n must be at least 1");
    }
    (1..=max_n)
        .map(|n| Ok((n, f_of(v.regime(), n as u64)?.to_string(), closed_v_f(v, n)?)))
        .collect()
}

fn error_table(cfg: &RunConfig, max_n: u32) -> anyhow::Result<String> {
    let v = cfg.variant;
    if cfg.format == Some(Format::Svg) {
        return Ok(error_chart(&[v], max_n)?.render());
    }
    let rows = error_rows(v, max_n)?;
    match data_format(cfg)? {
        Format::Csv => to_csv(
            &["n", "F_n", "V_Fn_decimal", "V_Fn"],
            rows.into_iter().map(|(n, f, e)| vec![n.to_string(), f, e.decimal(), e.to_string()]).collect(),
        ),
        _ => {
            let rows: Vec<Value> = rows
                .into_iter()
                .map(|(n, f, e)| json!({"n": n, "F_n": f, "V_Fn": e.to_string(), "V_Fn_decimal": e.decimal()}))
                .collect();
            to_json(&json!({"variant": v.name(), "rows": rows}))
        }
    }
}

fn oracle_check(cfg: &RunConfig, m: u64, exec: Execution) -> anyhow::Result<(String, Status)> {
    let opts = OracleOptions {
        depth_p: cfg.depth_p,
        depth_nu: cfg.depth_nu,
        tol: cfg.tol,
        ..OracleOptions::default()
    };
    let report = verify_many(&[(cfg.variant, m)], &opts, exec)?.remove(0);
    let status = if report.pass { Status::Ok } else { Status::VerificationFailed };
    let body = match data_format(cfg)? {
        Format::Csv => to_csv(
            &[
                "variant",
                "m",
                "dp_cost",
                "exact_error",
                "exact_error_decimal",
                "diff",
                "bound",
                "truncation_variance_bound",
                "centroid_deviation",
                "pass",
            ],
            vec![vec![
                report.variant.clone(),
                report.m.to_string(),
                format!("{:e}", report.dp_cost),
                report.exact_error.to_string(),
                report.exact_error.decimal(),
                format!("{:e}", report.diff),
                format!("{:e}", report.bound),
                format!("{:e}", report.truncation_variance_bound),
                report.centroid_deviation.map(|d| format!("{d:e}")).unwrap_or_default(),
                report.pass.to_string(),
            ]],
        )?,
        _ => to_json(&report)?,
    };
    Ok((body, status))
}

fn asymptotics_csv(rows: &[AsymptoticsRow]) -> anyhow::Result<String> {
    to_csv(
        &["n", "F_n", "V_Fn_decimal", "dim_estimate", "coeff", "V_Fn"],
        rows.iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.f_n.to_string(),
                    r.v_f_n.decimal(),
                    r.dim_estimate.to_string(),
                    r.coeff.to_string(),
                    r.v_f_n.to_string(),
                ]
            })
            .collect(),
    )
}

fn dimension_cmd(cfg: &RunConfig, max_n: u32, exec: Execution) -> anyhow::Result<String> {
    let v = cfg.variant;
    if cfg.format == Some(Format::Svg) {
        return Ok(dimension_chart(&[v], max_n, exec)?.render());
    }
    let rows = dimension_table_with(v, max_n, exec)?;
    match data_format(cfg)? {
        Format::Csv => asymptotics_csv(&rows),
        _ => to_json(&json!({
            "variant": v.name(),
            "dimension": dimension(v),
            "rows": rows,
        })),
    }
}

fn coefficient_cmd(cfg: &RunConfig, dim: DimArg, max_n: u32) -> anyhow::Result<String> {
    let v = cfg.variant;
    if cfg.format == Some(Format::Svg) {
        return Ok(coefficient_chart(&[v], dim, max_n)?.render());
    }
    let d = dim.resolve(v);
    let rows = coefficient_table(v, d, max_n)?;
    match data_format(cfg)? {
        Format::Csv => asymptotics_csv(&rows),
        _ => to_json(&json!({
            "variant": v.name(),
            "dim": d,
            "rows": rows,
            "limits": subsequence_limits(v),
        })),
    }
}

fn chart(title: &str, y_label: &str, log_y: bool, series: Vec<Series>) -> Chart {
    Chart {
        title: title.into(),
        x_label: "n".into(),
        y_label: y_label.into(),
        log_y,
        width: 800,
        height: 500,
        series,
    }
}

fn error_chart(variants: &[Variant], max_n: u32) -> anyhow::Result<Chart> {
    let mut series = Vec::new();
    for &v in variants {
        let points = error_rows(v, max_n)?
            .into_iter()
            .map(|(n, _, e)| (n as f64, e.to_f64()))
            .collect();
        series.push(Series { name: v.name().into(), points, dashed: false });
    }
    Ok(chart("Quantization error V_F(n)", "V_F(n)", true, series))
}

fn dimension_chart(variants: &[Variant], max_n: u32, exec: Execution) -> anyhow::Result<Chart> {
    let mut series = Vec::new();
    for &v in variants {
        let rows = dimension_table_with(v, max_n, exec)?;
        series.push(Series {
            name: v.name().into(),
            points: rows.iter().map(|r| (r.n as f64, r.dim_estimate)).collect(),
            dashed: false,
        });
    }
    if let [v] = variants {
        let target = dimension(*v);
        series.push(Series {
            name: format!("D = {target:.6}"),
            points: vec![(1.0, target), (max_n as f64, target)],
            dashed: true,
        });
    }
    Ok(chart("Dimension estimate 2 ln F(n) / -ln V_F(n)", "estimate", false, series))
}

fn coefficient_chart(variants: &[Variant], dim: DimArg, max_n: u32) -> anyhow::Result<Chart> {
    let mut series = Vec::new();
    for &v in variants {
        let rows = coefficient_table(v, dim.resolve(v), max_n)?;
        if v == Variant::Nu1 && variants.len() == 1 {
            // The two parities converge to different limits.
            for (name, parity) in [("odd n", 1), ("even n", 0)] {
                series.push(Series {
                    name: format!("{} {name}", v.name()),
                    points: rows
                        .iter()
                        .filter(|r| r.n % 2 == parity)
                        .map(|r| (r.n as f64, r.coeff))
                        .collect(),
                    dashed: false,
                });
            }
        } else {
            series.push(Series {
                name: v.name().into(),
                points: rows.iter().map(|r| (r.n as f64, r.coeff)).collect(),
                dashed: false,
            });
        }
    }
    Ok(chart("Scaled error F(n)^(2/d) V_F(n)", "coefficient", true, series))
}
