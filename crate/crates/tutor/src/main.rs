use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use tutor::cli::{self, Format};
use tutor_core::session::{Library, Session, SessionManager, MINI_CORPUS};

#[derive(Parser)]
#[command(name = "tutor", version, about = "Tutor for declarative proofs about binary relations")]
struct Args {
    /// Directory with extra theories, exercises, classifiers and templates.
    #[arg(long, global = true)]
    theory_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interactive step and hint loop.
    Repl {
        #[arg(long)]
        exercise: String,
    },
    /// Check every step of a proof script; exits 0 iff all are correct.
    Check {
        #[arg(long)]
        exercise: String,
        #[arg(long)]
        script: PathBuf,
    },
    /// Replay a labelled corpus and print the verdict table.
    Eval {
        /// Corpus file; the bundled mini-corpus when omitted.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Print the plan a strategy finds for an exercise.
    Prove {
        #[arg(long)]
        exercise: String,
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        level: Option<usize>,
    },
    /// Serve the JSON session API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Args) -> Result<bool> {
    let library = match &args.theory_dir {
        Some(dir) => Library::with_dir(dir)?,
        None => Library::bundled(),
    };
    match args.command {
        Command::Repl { exercise } => repl(&library, &exercise, args.format),
        Command::Check { exercise, script } => {
            let text = std::fs::read_to_string(&script).with_context(|| format!("reading {}", script.display()))?;
            let report = cli::check(&library, &exercise, &text, args.format)?;
            print!("{}", report.output);
            Ok(report.success)
        }
        Command::Eval { corpus, depth } => {
            let text = match corpus {
                Some(p) => std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?,
                None => MINI_CORPUS.to_string(),
            };
            let (_, output) = cli::eval(&library, &text, depth, args.format)?;
            print!("{output}");
            Ok(true)
        }
        Command::Prove { exercise, strategy, level } => {
            let report = cli::prove(&library, &exercise, strategy.as_deref(), level, args.format)?;
            print!("{}", report.output);
            Ok(report.success)
        }
        Command::Serve { addr } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let app = tutor::http::router(Arc::new(SessionManager::new(library)));
                let listener = tokio::net::TcpListener::bind(&addr).await?;
                eprintln!("listening on {addr}");
                axum::serve(listener, app).await?;
                Ok::<_, anyhow::Error>(())
            })?;
            Ok(true)
        }
    }
}

fn repl(library: &Library, exercise: &str, format: Format) -> Result<bool> {
    let ex = library.exercise(exercise).ok_or_else(|| anyhow!("unknown exercise '{exercise}'"))?;
    let mut session = Session::new("repl", ex, library);
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    writeln!(out, "prove: {}\ncommands: :hint :state :quit; anything else is a proof step", ex.goal)?;
    let show_state = |s: &Session, out: &mut std::io::Stdout| -> Result<()> {
        let st = s.current();
        for (i, q) in st.sequents.iter().enumerate() {
            writeln!(out, "{} {q}", if i == st.marked { "*" } else { " " })?;
        }
        Ok(())
    };
    show_state(&session, &mut out)?;
    loop {
        write!(out, "> ")?;
        out.flush()?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim();
        match line {
            "" => continue,
            ":quit" | ":q" => break,
            ":state" => show_state(&session, &mut out)?,
            ":hint" => match session.request_hint() {
                Ok(h) => match format {
                    Format::Json => writeln!(out, "{}", serde_json::to_string(&h)?)?,
                    Format::Text => writeln!(out, "hint ({}): {}", h.category_name(), h.text)?,
                },
                Err(e) => writeln!(out, "{e}")?,
            },
            step => match session.submit_step(step) {
                Ok(o) => {
                    match format {
                        Format::Json => writeln!(out, "{}", serde_json::to_string(&o)?)?,
                        Format::Text => {
                            writeln!(out, "{}", o.feedback)?;
                            for m in &o.messages {
                                writeln!(out, "  {m}")?;
                            }
                        }
                    }
                    if o.proof_complete {
                        writeln!(out, "proof complete")?;
                        break;
                    }
                }
                Err(e) => writeln!(out, "{e}")?,
            },
        }
    }
    Ok(true)
}
