use clap::{Args, Parser, Subcommand, ValueEnum};
use pmm_core::cli_io::{
    working_cap, ComplexMapDocument, DecomposeInput, InputDocument, ModelDocument, DEFAULT_DEGREE_CAP,
};
use pmm_core::pcomplex::factor_cofibration;
use pmm_core::persistence::{bar_records, Bar, Grid};
use pmm_core::pminimal::{build_persistent_minimal_model, presentation, validate_model, ValidationReport};
use pmm_core::{Error, Result};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Persistent minimal models of tame persistent CDGAs.
#[derive(Parser)]
#[command(name = "pmm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the persistent minimal model of an input diagram.
    Build(Opts),
    /// Re-run every invariant check on an input diagram or a saved model.
    Check(Opts),
    /// Barcode of a persistence module or of the cohomology of a persistent complex.
    Decompose(Opts),
    /// Factor an injective map of persistent complexes through cell attachments.
    Factor(Opts),
}

#[derive(Args)]
struct Opts {
    #[arg(long)]
    input: PathBuf,
    /// Model degree; defaults to the input's `degree_cap`, then 6.
    #[arg(long)]
    degree_cap: Option<usize>,
    /// Comma separated subset of barcode, presentation, report, model.
    #[arg(long, value_delimiter = ',', default_value = "barcode,presentation,report")]
    emit: Vec<Emit>,
    /// Write outputs into this directory instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// List zero differentials and endpoints too.
    #[arg(long)]
    verbose_relations: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Barcode,
    Presentation,
    Report,
    Model,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn barcode_text(grid: &Grid, bars: &[Bar]) -> String {
    bar_records(grid, bars)
        .iter()
        .map(|b| format!("degree {} [{}, {})\n", b.degree, b.birth, b.death.as_deref().unwrap_or("inf")))
        .collect()
}

fn report_text(r: &ValidationReport) -> String {
    let mut out = format!("minimality: {}\n", r.minimality);
    for c in &r.connectivity {
        out += &format!("connectivity at {} through degree {}: {}\n", c.stage, c.through_degree, c.status);
    }
    out += &format!("homotopy identities: {}\n", r.homotopy_identities);
    for h in &r.hirsch_certificates {
        out += &format!("hirsch certificate {}: {}\n", h.generator, h.status);
    }
    out += &format!("endpoint law: {}\npassed: {}\n", r.endpoint_law, r.passed);
    out
}

/// Collects named outputs, then writes them to files or standard output.
struct Outputs {
    dir: Option<PathBuf>,
    items: Vec<(String, String)>,
}

impl Outputs {
    fn push(&mut self, file: &str, body: String) {
        self.items.push((file.to_string(), body));
    }

    fn flush(self) -> Result<()> {
        match self.dir {
            Some(dir) => {
                std::fs::create_dir_all(&dir)
                    .map_err(|e| Error::Schema(format!("cannot create {}: {e}", dir.display())))?;
                for (file, body) in self.items {
                    let p = dir.join(file);
                    std::fs::write(&p, body).map_err(|e| Error::Schema(format!("cannot write {}: {e}", p.display())))?;
                }
            }
            None => {
                for (_, body) in self.items {
                    print!("{body}");
                }
            }
        }
        Ok(())
    }
}

fn user_cap(opts: &Opts, doc: &InputDocument) -> usize {
    opts.degree_cap.or(doc.degree_cap).unwrap_or(DEFAULT_DEGREE_CAP)
}

fn build(opts: &Opts) -> Result<bool> {
    let doc = InputDocument::from_json(&read(&opts.input)?)?;
    let cap = user_cap(opts, &doc);
    let a = doc.load(working_cap(cap))?;
    let model = build_persistent_minimal_model(&a, cap)?;
    let report = validate_model(&model, &a);
    let mut out = Outputs { dir: opts.output.clone(), items: Vec::new() };
    let text = opts.format == Format::Text;
    for e in &opts.emit {
        match e {
            Emit::Barcode if text && opts.output.is_none() => out.push("barcode.txt", barcode_text(&a.grid, &model.homotopy_barcode())),
            Emit::Barcode => out.push("barcode.json", pretty(&bar_records(&a.grid, &model.homotopy_barcode()))),
            Emit::Presentation => {
                let p = presentation(&model, opts.verbose_relations);
                if text || opts.output.is_some() {
                    out.push("presentation.txt", p.to_text() + "\n");
                }
                if !text {
                    out.push("presentation.json", pretty(&p));
                }
            }
            Emit::Report if text && opts.output.is_none() => out.push("report.txt", report_text(&report)),
            Emit::Report => out.push("report.json", pretty(&report)),
            Emit::Model => out.push("model.json", ModelDocument::from_model(&model, &a, &doc).to_json() + "\n"),
        }
    }
    out.flush()?;
    if !report.passed {
        eprintln!("validation failed:\n{}", report_text(&report));
    }
    Ok(report.passed)
}

fn check(opts: &Opts) -> Result<bool> {
    let text = read(&opts.input)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    let (a, model) = if value.get("generators").is_some() && value.get("input").is_some() {
        ModelDocument::from_json(&text)?.load()?
    } else {
        let doc = InputDocument::from_json(&text)?;
        let cap = user_cap(opts, &doc);
        let a = doc.load(working_cap(cap))?;
        let m = build_persistent_minimal_model(&a, cap)?;
        (a, m)
    };
    let report = validate_model(&model, &a);
    let body = match opts.format {
        Format::Json => pretty(&report),
        Format::Text => report_text(&report),
    };
    let file = if opts.format == Format::Json { "report.json" } else { "report.txt" };
    Outputs { dir: opts.output.clone(), items: vec![(file.into(), body)] }.flush()?;
    if !report.passed {
        let failing: Vec<String> = std::iter::once(("minimality", &report.minimality))
            .chain([("homotopy identities", &report.homotopy_identities), ("endpoint law", &report.endpoint_law)])
            .filter(|(_, s)| *s != "pass")
            .map(|(n, s)| format!("{n}: {s}"))
            .chain(report.connectivity.iter().filter(|c| c.status != "pass").map(|c| format!("connectivity at {}", c.stage)))
            .chain(
                report
                    .hirsch_certificates
                    .iter()
                    .filter(|h| h.status != "pass")
                    .map(|h| format!("hirsch certificate {}: {}", h.generator, h.status)),
            )
            .collect();
        eprintln!("failing invariants:\n  {}", failing.join("\n  "));
    }
    Ok(report.passed)
}

fn decompose(opts: &Opts) -> Result<bool> {
    let input: DecomposeInput =
        serde_json::from_str(&read(&opts.input)?).map_err(|e| Error::Schema(format!("not a module or complex: {e}")))?;
    let (grid, bars) = match input {
        DecomposeInput::Module(m) => {
            let module = m.load()?;
            let dec = module.decompose(m.degree);
            module.check_decomposition(&dec).map_err(|e| Error::Invariant(e.to_string()))?;
            (module.grid, dec.bars)
        }
        DecomposeInput::Complex(c) => {
            let complex = c.load()?;
            let mut bars = Vec::new();
            for k in 0..=complex.max_degree {
                bars.extend(complex.cohomology(k).decompose().bars);
            }
            (complex.grid, bars)
        }
    };
    let body = match opts.format {
        Format::Json => pretty(&bar_records(&grid, &bars)),
        Format::Text => barcode_text(&grid, &bars),
    };
    Outputs { dir: opts.output.clone(), items: vec![("barcode.json".into(), body)] }.flush()?;
    Ok(true)
}

fn factor(opts: &Opts) -> Result<bool> {
    let doc: ComplexMapDocument = serde_json::from_str(&read(&opts.input)?).map_err(|e| Error::Schema(e.to_string()))?;
    let map = doc.load()?;
    let cert = factor_cofibration(&map)?;
    cert.verify(&map)?;
    let grid = &map.source.grid;
    let cells: Vec<_> = cert
        .cells
        .iter()
        .map(|c| {
            json!({
                "stage": c.stage,
                "degree": c.data.degree,
                "birth": grid.label(c.data.s),
                "death": c.data.t.map(|t| grid.label(t)),
            })
        })
        .collect();
    let body = match opts.format {
        Format::Json => pretty(&json!({ "cells": cells, "verified": true })),
        Format::Text => cert
            .cells
            .iter()
            .map(|c| {
                let end = c.data.t.map_or("inf".to_string(), |t| grid.label(t));
                format!("stage {} cell S^{} on [{}, {})\n", c.stage, c.data.degree, grid.label(c.data.s), end)
            })
            .collect::<String>()
            + "verified\n",
    };
    Outputs { dir: opts.output.clone(), items: vec![("certificate.json".into(), body)] }.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(o) => build(o),
        Command::Check(o) => check(o),
        Command::Decompose(o) => decompose(o),
        Command::Factor(o) => factor(o),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
