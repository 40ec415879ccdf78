mod args;
mod commands;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::Parser;
use mott_core::config::RunConfig;
use mott_core::derive_coefficients;
use mott_core::output::{Format, ResultBundle};

use args::Cli;
use commands::{Context, UsageError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Bad input (config file, parameter values, flag combinations) is a usage
/// error; everything else is a computation error.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<mott_core::Error>() {
        Some(mott_core::Error::Config { .. } | mott_core::Error::InvalidParameter { .. }) => 2,
        Some(_) => 1,
        None if e.downcast_ref::<UsageError>().is_some() => 2,
        None => 1,
    }
}

fn execute(cli: Cli) -> Result<()> {
    let g = cli.global;
    if let Some(n) = g.jobs {
        if n == 0 {
            return Err(UsageError("--jobs must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = RunConfig::load(g.config.as_deref(), &g.device)?;
    let formats = match (&g.format[..], &cfg.output.formats) {
        ([], Some(names)) => {
            names.iter().map(|n| n.parse::<Format>().map_err(|e| UsageError(e).into())).collect::<Result<Vec<_>>>()?
        }
        ([], None) => Vec::new(),
        (f, _) => f.to_vec(),
    };
    let out_dir = g.out_dir.clone().or_else(|| cfg.output.dir.clone());
    let wants_svg =
        formats.contains(&Format::Svg) || g.out.as_deref().is_some_and(|p| p.extension().is_some_and(|e| e == "svg"));
    let coeffs = derive_coefficients(&cfg.device)?;
    let ctx = Context { cfg, coeffs, svg: wants_svg };
    let bundle = commands::run(&cli.command, &ctx)?;

    if let Some(path) = &g.out {
        write_primary(&bundle, path)?;
    }
    if let Some(dir) = &out_dir {
        let formats = if formats.is_empty() { vec![Format::Csv, Format::Json] } else { formats.clone() };
        for p in bundle.write_dir(dir, &formats)? {
            eprintln!("wrote {}", p.display());
        }
    }
    if g.out.is_none() && out_dir.is_none() {
        let text = match formats.first() {
            Some(Format::Csv) => primary_csv(&bundle)?,
            Some(Format::Svg) => primary_svg(&bundle)?,
            Some(Format::Json) => json_text(&bundle)?,
            None if bundle.json.is_some() => json_text(&bundle)?,
            None => primary_csv(&bundle)?,
        };
        let mut out = std::io::stdout().lock();
        match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
            _ => {}
        }
    }
    Ok(())
}

fn json_text(b: &ResultBundle) -> Result<String> {
    Ok(serde_json::to_string_pretty(&b.json_document())? + "\n")
}

fn primary_csv(b: &ResultBundle) -> Result<String> {
    let t = b.tables.first().context("command produced no table")?;
    Ok(t.to_csv()?)
}

fn primary_svg(b: &ResultBundle) -> Result<String> {
    match b.figures.first() {
        Some((_, svg)) => Ok(svg.clone()),
        None => bail!(UsageError(format!("`{}` has no figure", b.command))),
    }
}

fn write_primary(b: &ResultBundle, path: &Path) -> Result<()> {
    let text = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => json_text(b)?,
        Some("svg") => primary_svg(b)?,
        _ => primary_csv(b)?,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
