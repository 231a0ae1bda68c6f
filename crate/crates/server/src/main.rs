use std::io::{self, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use livediag_core::diagnostics::{Diagnostic, Severity};
use livediag_core::pipeline::compile;
use livediag_server::transport::{serve_lines, serve_websocket};
use livediag_server::{Server, ServerConfig};

const EXIT_DIAGNOSTICS: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_FORMAT: u8 = 3;

#[derive(Parser)]
#[command(name = "livediag", version, about = "Render, check and serve live class diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a diagram program and write the rendered SVG.
    Render {
        file: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(short, long, default_value = "svg")]
        format: String,
    },
    /// Print diagnostics; exits with 1 when there are errors.
    Check { file: PathBuf },
    /// Run the session server.
    Serve {
        /// Websocket port.
        #[arg(long, conflicts_with = "stdio")]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Speak newline-delimited JSON on stdin/stdout instead.
        #[arg(long)]
        stdio: bool,
        #[arg(long)]
        workers: Option<usize>,
        /// Delay every execution, to observe scheduling.
        #[arg(long, default_value_t = 0)]
        execution_delay_ms: u64,
    },
    /// Print a generated sample program.
    Sample { which: SampleKind },
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleKind {
    /// 34 classes, 3 enumerations and routed associations.
    Scale,
    /// A program whose output depends on a layout value.
    LayoutDependent,
}

fn read(file: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(file).map_err(|e| {
        eprintln!("{}: {e}", file.display());
        ExitCode::from(EXIT_IO)
    })
}

fn print_diagnostics(file: &Path, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprintln!("{}:{}..{}: {}: {}", file.display(), d.span.start, d.span.end, d.severity, d.message);
    }
}

fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}

fn render(file: &Path, output: Option<&Path>, format: &str) -> Result<ExitCode, ExitCode> {
    if format != "svg" {
        eprintln!("unsupported format `{format}` (supported: svg)");
        return Err(ExitCode::from(EXIT_FORMAT));
    }
    let source = read(file)?;
    let compiled = compile(&source);
    let diagnostics = compiled.diagnostics();
    print_diagnostics(file, &diagnostics);
    let Some(svg) = compiled.svg() else { return Err(ExitCode::from(EXIT_DIAGNOSTICS)) };
    let written = match output {
        Some(path) => std::fs::write(path, svg).map_err(|e| (path.display().to_string(), e)),
        None => io::stdout().write_all(svg.as_bytes()).map_err(|e| ("stdout".to_owned(), e)),
    };
    if let Err((target, e)) = written {
        eprintln!("{target}: {e}");
        return Err(ExitCode::from(EXIT_IO));
    }
    Ok(if has_errors(&diagnostics) { ExitCode::from(EXIT_DIAGNOSTICS) } else { ExitCode::SUCCESS })
}

fn check(file: &Path) -> Result<ExitCode, ExitCode> {
    let source = read(file)?;
    let diagnostics = compile(&source).diagnostics();
    for d in &diagnostics {
        println!("{}:{}..{}: {}: {}", file.display(), d.span.start, d.span.end, d.severity, d.message);
    }
    Ok(if has_errors(&diagnostics) { ExitCode::from(EXIT_DIAGNOSTICS) } else { ExitCode::SUCCESS })
}

fn serve(port: Option<u16>, host: &str, stdio: bool, config: ServerConfig) -> Result<ExitCode, ExitCode> {
    let server = Server::start(config);
    let io_error = |e: io::Error| {
        eprintln!("{e}");
        ExitCode::from(EXIT_IO)
    };
    if stdio || port.is_none() {
        serve_lines(&server.connector(), BufReader::new(io::stdin()), io::stdout()).map_err(io_error)?;
    } else {
        let listener = TcpListener::bind((host, port.unwrap_or(0))).map_err(io_error)?;
        eprintln!("listening on ws://{}", listener.local_addr().map_err(io_error)?);
        serve_websocket(listener, server.connector(), Arc::new(AtomicBool::new(false))).map_err(io_error)?;
    }
    server.shutdown();
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Render { file, output, format } => render(&file, output.as_deref(), &format),
        Command::Check { file } => check(&file),
        Command::Serve { port, host, stdio, workers, execution_delay_ms } => {
            let mut config = ServerConfig { execution_delay: Duration::from_millis(execution_delay_ms), ..Default::default() };
            if let Some(w) = workers {
                config.workers = w.max(1);
            }
            serve(port, &host, stdio, config)
        }
        Command::Sample { which } => {
            let text = match which {
                SampleKind::Scale => livediag_core::samples::scale_program(),
                SampleKind::LayoutDependent => livediag_core::samples::layout_dependent_program(),
            };
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|code| code)
}
