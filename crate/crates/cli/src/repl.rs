//! Interactive session: executes one sentence per line and prints what it
//! created. Incomplete input (a sentence without its period, a macro line
//! ending in a comma) is buffered until the unit completes.

use std::io::{BufRead, Write};
use std::process::ExitCode;

use anyhow::Result;

use xapi_core::executor::Executor;
use xapi_core::export::{summarize, to_dot, DotOptions};
use xapi_core::parser::{unit_complete, StoryParser};
use xapi_core::token::tokenize;

use crate::{build_lexicon, exec_config, ReplArgs};

pub fn cmd_repl(args: ReplArgs) -> Result<ExitCode> {
    let lexicon = build_lexicon(&args.lexicon)?;
    let mut parser = StoryParser::new(&lexicon);
    let mut executor = Executor::with_config(&lexicon, exec_config(&args.exec));

    let stdin = std::io::stdin();
    let mut buffer = String::new();
    print_prompt(buffer.is_empty());
    for line in stdin.lock().lines() {
        let line = line?;
        let trimmed = line.trim();

        if buffer.is_empty() && trimmed.starts_with(':') {
            if !meta_command(trimmed, &executor) {
                return Ok(ExitCode::SUCCESS);
            }
            print_prompt(true);
            continue;
        }

        buffer.push_str(&line);
        buffer.push('\n');
        let complete = match tokenize(&buffer) {
            Ok(tokens) => tokens.is_empty() || unit_complete(&tokens),
            // let the parser report the error below
            Err(_) => true,
        };
        if !complete {
            print_prompt(false);
            continue;
        }

        let input = std::mem::take(&mut buffer);
        execute_unit(&input, &mut parser, &mut executor);
        print_prompt(true);
    }
    Ok(ExitCode::SUCCESS)
}

fn print_prompt(fresh: bool) {
    print!("{}", if fresh { "xapi> " } else { "  ... " });
    let _ = std::io::stdout().flush();
}

fn execute_unit(input: &str, parser: &mut StoryParser<'_>, executor: &mut Executor<'_>) {
    let sentences = match parser.parse_all(input) {
        Ok(sentences) => sentences,
        Err(error) => {
            println!("error: {error}");
            return;
        }
    };
    for sentence in sentences {
        match executor.execute_sentence(&sentence.sentence) {
            Ok(record) => {
                let instances: Vec<u32> = record.created_instances.iter().map(|i| i.0).collect();
                let vis: Vec<u32> = record.created_vis.iter().map(|v| v.0).collect();
                println!(
                    "ok: instances={instances:?} vis={vis:?} links={} identities={}",
                    record.created_links.len(),
                    record.created_identity_edges.len()
                );
            }
            Err(error) => println!("error: {error}"),
        }
    }
}

/// Handle a `:` command; returns false when the session should end.
fn meta_command(command: &str, executor: &Executor<'_>) -> bool {
    let state = &executor.state;
    let mut parts = command.splitn(2, char::is_whitespace);
    match parts.next().unwrap_or_default() {
        ":quit" | ":q" => return false,
        ":focus" => {
            for scene in state.focus_snapshot().scenes {
                let label = scene
                    .label
                    .map(|l| format!("#{l}"))
                    .unwrap_or_else(|| format!("scene {}", scene.scene));
                let instances: Vec<u32> = scene.instances.iter().map(|i| i.0).collect();
                let vis: Vec<u32> = scene.vis.iter().map(|v| v.0).collect();
                println!("{label}: instances={instances:?} vis={vis:?}");
            }
        }
        ":scenes" => {
            for scene in &state.scenes {
                let label = scene
                    .label
                    .as_ref()
                    .map(|l| format!("#{l}"))
                    .unwrap_or_else(|| "-".into());
                let current = if scene.is_current { " (current)" } else { "" };
                println!(
                    "scene {} {label}{current}: {} instances, {} vis",
                    scene.id,
                    scene.members.len(),
                    scene.vis.len()
                );
            }
        }
        ":instances" => {
            for instance in &state.instances {
                let name = instance
                    .proper_name
                    .as_ref()
                    .map(|n| format!(" \"{n}\""))
                    .unwrap_or_default();
                let focus = if instance.in_focus { "" } else { " (defocused)" };
                println!(
                    "i{} scene={} [{}]{name}{focus}",
                    instance.id,
                    instance.scene,
                    instance.attributes.join(" ")
                );
            }
        }
        ":chains" => {
            for chain in state.identity_chains() {
                let ids: Vec<u32> = chain.iter().map(|i| i.0).collect();
                println!("chain: {ids:?}");
            }
        }
        ":summary" => print!("{}", summarize(state)),
        ":dot" => match parts.next() {
            Some(path) => match std::fs::write(path, to_dot(state, &DotOptions::default())) {
                Ok(()) => println!("wrote {path}"),
                Err(error) => println!("error: {error}"),
            },
            None => println!("usage: :dot <path>"),
        },
        other => println!(
            "unknown command {other:?}; commands: :focus :scenes :instances :chains :summary :dot <path> :quit"
        ),
    }
    true
}
