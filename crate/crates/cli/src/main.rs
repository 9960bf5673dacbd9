mod args;
mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{Ctx, Outcome};
use error::CliError;

const THREADS_ENV: &str = "VORTEX_ATLAS_THREADS";

fn threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) if !s.trim().is_empty() => Some(s.trim().parse().map_err(|_| CliError::Usage(format!("{THREADS_ENV}: '{s}' is not a thread count")))?),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    Ok(n)
}

fn run(argv: Vec<String>) -> Result<u8, CliError> {
    let argv = match config::config_path(&argv) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("config file {path}: {e}")))?;
            config::inject(argv, &config::parse(&text)?)?
        }
        None => argv,
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return Ok(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let nthreads = threads(cli.global.threads)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = nthreads {
        pool = pool.num_threads(n);
    }
    pool.build_global().map_err(|e| CliError::Usage(e.to_string()))?;

    let command = serde_json::to_value(&cli.command).map_err(|e| CliError::Numeric(e.to_string()))?;
    let (name, args) = match command {
        serde_json::Value::Object(m) => m.into_iter().next().expect("externally tagged subcommand"),
        other => (other.as_str().unwrap_or_default().to_string(), serde_json::Value::Null),
    };
    let mut extra = vec![("threads", rayon::current_num_threads().to_string()), ("json", cli.global.json.to_string())];
    if let Some(o) = &cli.global.out {
        extra.push(("out", o.clone()));
    }
    let pairs = config::effective(&name, &args, &extra);
    eprintln!("# effective config");
    for (k, v) in &pairs {
        eprintln!("# {k} = {v}");
    }
    let ctx = Ctx { config: config::to_json(&pairs), json: cli.global.json, out: cli.global.out.clone() };

    let Outcome { text, status } = match &cli.command {
        Command::Catalog { action } => commands::catalog_cmd(action, &ctx)?,
        Command::Classify(a) => commands::classify_cmd(a, &ctx)?,
        Command::Scan(a) => commands::scan_cmd(a, &ctx)?,
        Command::Trace(a) => commands::trace_cmd(a, &ctx)?,
        Command::Sweep(a) => commands::sweep_cmd(a, &ctx)?,
        Command::Verify(a) => commands::verify_cmd(a, &ctx)?,
        Command::Strata(a) => commands::strata_cmd(a, &ctx)?,
        Command::Montecarlo(a) => commands::montecarlo_cmd(a, &ctx)?,
        Command::Render(a) => commands::render_cmd(a, &ctx)?,
    };
    match (&ctx.out, &cli.command) {
        (Some(path), c) if !matches!(c, Command::Render(_)) => {
            std::fs::write(path, &text).map_err(|e| CliError::Precondition(format!("{path}: {e}")))?;
        }
        _ => print!("{text}"),
    }
    Ok(status)
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
