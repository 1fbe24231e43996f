//! `xapi`: run Xapi story files, inspect the resulting state, and drive
//! the golden corpus.
//!
//! Exit codes: 0 success, 1 parse/execution error, 2 usage error,
//! 3 corpus mismatch.

mod repl;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use xapi_core::executor::{ExecConfig, ExecError, ExecMode, Executor, SentenceOutcome};
use xapi_core::export::{summarize, to_dot, to_json, DotOptions};
use xapi_core::lexicon::Lexicon;
use xapi_core::parser::{StoryParser, StorySentence};

const EXIT_ERROR: u8 = 1;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "xapi", version, about = "Run and inspect Xapi stories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute story files in order against one state
    Run(RunArgs),
    /// Interactive session: one sentence per line, plus `:` commands
    Repl(ReplArgs),
    /// Execute every `.xapi` story in a directory and compare each
    /// structural summary against its `.summary` fixture
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct LexiconArgs {
    /// Additional lexicon file (repeatable; `XAPI_LEXICON` adds one more)
    #[arg(long = "lexicon", value_name = "PATH")]
    lexicon: Vec<PathBuf>,
    /// Do not load the built-in default lexicon
    #[arg(long)]
    no_default_lexicon: bool,
}

#[derive(Args)]
struct ExecArgs {
    /// Skip failing sentences instead of aborting
    #[arg(long)]
    lenient: bool,
    /// An action VI stays in focus for this many subsequent action VIs
    #[arg(long, value_name = "N", default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    focus_window: u32,
}

#[derive(Args)]
struct RunArgs {
    /// Story files (`.xapi`)
    #[arg(required = true, value_name = "STORY")]
    stories: Vec<PathBuf>,
    #[command(flatten)]
    lexicon: LexiconArgs,
    #[command(flatten)]
    exec: ExecArgs,
    /// Write the structural summary (`-` for stdout)
    #[arg(long, value_name = "PATH")]
    summary: Option<String>,
    /// Write the JSON state dump (`-` for stdout)
    #[arg(long, value_name = "PATH")]
    json: Option<String>,
    /// Write the DOT graph (`-` for stdout)
    #[arg(long, value_name = "PATH")]
    dot: Option<String>,
    /// Print a per-sentence execution trace
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct ReplArgs {
    #[command(flatten)]
    lexicon: LexiconArgs,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args)]
struct CorpusArgs {
    /// Directory holding paired `<story>.xapi` / `<story>.summary` files
    #[arg(value_name = "DIR")]
    dir: PathBuf,
    #[command(flatten)]
    lexicon: LexiconArgs,
    #[command(flatten)]
    exec: ExecArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Repl(args) => repl::cmd_repl(args),
        Command::Corpus(args) => cmd_corpus(args),
    };
    match result {
        Ok(code) => code,
        Err(error) => {
            eprintln!("xapi: {error:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn build_lexicon(args: &LexiconArgs) -> Result<Lexicon> {
    let mut lexicon = if args.no_default_lexicon {
        Lexicon::new()
    } else {
        Lexicon::with_defaults()
    };
    let mut paths = args.lexicon.clone();
    if let Ok(extra) = std::env::var("XAPI_LEXICON") {
        if !extra.is_empty() {
            paths.push(PathBuf::from(extra));
        }
    }
    for path in paths {
        let text = fs::read_to_string(&path)
            .with_context(|| format!("cannot read lexicon {}", path.display()))?;
        lexicon
            .load(&text)
            .with_context(|| format!("in lexicon {}", path.display()))?;
    }
    Ok(lexicon)
}

fn exec_config(args: &ExecArgs) -> ExecConfig {
    ExecConfig {
        mode: if args.lenient {
            ExecMode::Lenient
        } else {
            ExecMode::Strict
        },
        focus_window: args.focus_window,
    }
}

/// Parse and execute one story file against an executor. Strict-mode
/// errors carry `file:line`.
fn run_story_file(
    executor: &mut Executor<'_>,
    lexicon: &Lexicon,
    path: &Path,
    lenient: bool,
    trace: bool,
) -> Result<()> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read story {}", path.display()))?;
    let mut parser = StoryParser::new(lexicon);
    let sentences: Vec<StorySentence> = if lenient {
        let (sentences, errors) = parser.parse_all_lenient(&text);
        for error in errors {
            eprintln!("{}: skipped: {error}", path.display());
        }
        sentences
    } else {
        parser
            .parse_all(&text)
            .map_err(|e| anyhow!("{}: {e}", path.display()))?
    };

    let parsed: Vec<_> = sentences.iter().map(|s| s.sentence.clone()).collect();
    let trace_result = executor.execute_story(&parsed).map_err(|e| match &e {
        ExecError::AtSentence { index, source } => {
            let line = sentences.get(*index).map(|s| s.line).unwrap_or(0);
            anyhow!("{}:{line}: {source}", path.display())
        }
        other => anyhow!("{}: {other}", path.display()),
    })?;

    for (outcome, sentence) in trace_result.sentences.iter().zip(&sentences) {
        match outcome {
            SentenceOutcome::Executed(record) => {
                if trace {
                    println!(
                        "{}:{}: instances={:?} vis={:?} links={} identities={}",
                        path.display(),
                        sentence.line,
                        record.created_instances.iter().map(|i| i.0).collect::<Vec<_>>(),
                        record.created_vis.iter().map(|v| v.0).collect::<Vec<_>>(),
                        record.created_links.len(),
                        record.created_identity_edges.len(),
                    );
                }
            }
            SentenceOutcome::Skipped { error } => {
                eprintln!("{}:{}: skipped: {error}", path.display(), sentence.line);
            }
        }
    }
    Ok(())
}

fn write_output(target: &str, contents: &str) -> Result<()> {
    if target == "-" {
        std::io::stdout().write_all(contents.as_bytes())?;
        Ok(())
    } else {
        fs::write(target, contents).with_context(|| format!("cannot write {target}"))
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let lexicon = build_lexicon(&args.lexicon)?;
    let mut executor = Executor::with_config(&lexicon, exec_config(&args.exec));
    for story in &args.stories {
        run_story_file(
            &mut executor,
            &lexicon,
            story,
            args.exec.lenient,
            args.trace,
        )?;
    }
    let state = executor.into_state();
    if let Some(target) = &args.summary {
        write_output(target, &summarize(&state).to_string())?;
    }
    if let Some(target) = &args.json {
        write_output(target, &to_json(&state))?;
    }
    if let Some(target) = &args.dot {
        write_output(target, &to_dot(&state, &DotOptions::default()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_corpus(args: CorpusArgs) -> Result<ExitCode> {
    let lexicon = build_lexicon(&args.lexicon)?;
    let mut stories: Vec<PathBuf> = fs::read_dir(&args.dir)
        .with_context(|| format!("cannot read corpus directory {}", args.dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| path.extension().map(|e| e == "xapi").unwrap_or(false))
        .collect();
    stories.sort();

    let mut failed = 0usize;
    for story in &stories {
        let name = story
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match check_story(&lexicon, &args, story) {
            Ok(()) => println!("PASS {name}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}");
                for line in reason.lines() {
                    println!("  {line}");
                }
            }
        }
    }
    println!("{} stories, {failed} failed", stories.len());
    if failed > 0 {
        Ok(ExitCode::from(EXIT_MISMATCH))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

/// Run one corpus story and compare its summary to the frozen fixture.
/// Returns a human-readable reason on mismatch.
fn check_story(lexicon: &Lexicon, args: &CorpusArgs, story: &Path) -> std::result::Result<(), String> {
    let fixture_path = story.with_extension("summary");
    let expected = fs::read_to_string(&fixture_path)
        .map_err(|_| format!("missing fixture {}", fixture_path.display()))?;

    let text = fs::read_to_string(story).map_err(|e| format!("cannot read story: {e}"))?;
    let sentences = StoryParser::new(lexicon)
        .parse_all(&text)
        .map_err(|e| format!("parse error: {e}"))?;
    let parsed: Vec<_> = sentences.into_iter().map(|s| s.sentence).collect();
    let mut executor = Executor::with_config(lexicon, exec_config(&args.exec));
    executor
        .execute_story(&parsed)
        .map_err(|e| format!("execution error: {e}"))?;
    let actual = summarize(&executor.into_state()).to_string();

    if actual == expected {
        Ok(())
    } else {
        let mut reason = String::from("summary mismatch:\n");
        for diff in diff_lines(&expected, &actual) {
            reason.push_str(&diff);
            reason.push('\n');
        }
        Err(reason)
    }
}

fn diff_lines(expected: &str, actual: &str) -> Vec<String> {
    let expected: Vec<&str> = expected.lines().collect();
    let actual: Vec<&str> = actual.lines().collect();
    let mut out = Vec::new();
    for i in 0..expected.len().max(actual.len()) {
        let e = expected.get(i).copied();
        let a = actual.get(i).copied();
        if e != a {
            if let Some(e) = e {
                out.push(format!("- {e}"));
            }
            if let Some(a) = a {
                out.push(format!("+ {a}"));
            }
        }
    }
    out
}
