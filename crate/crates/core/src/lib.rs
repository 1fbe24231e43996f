//! Parser and execution engine for Xapi, a pidgin narrative language.
//!
//! An Xapi story is a sequence of slash-separated sentences
//! (`"Achilles" / hits / "Hector".`). Executing a story materializes a
//! graph of scenes, instances, and verb instances, connected by identity,
//! succession, coincidence, and summarization links. The crate exposes:
//!
//! - [`lexicon`]: the registry of concept and verb words,
//! - [`token`] / [`parser`] / [`printer`]: text to syntax trees and back,
//! - [`model`]: the narrative data model and its queries,
//! - [`executor`]: sentence execution against a [`model::StoryState`],
//! - [`export`]: structural summaries, lossless JSON, and DOT graphs.
//!
//! ```
//! use xapi_core::{executor::Executor, lexicon::Lexicon, parser::parse_story};
//!
//! let lexicon = Lexicon::with_defaults();
//! let story = parse_story("An apple / exists.\nThe apple / is-a / red.", &lexicon).unwrap();
//! let sentences: Vec<_> = story.into_iter().map(|s| s.sentence).collect();
//! let mut executor = Executor::new(&lexicon);
//! executor.execute_story(&sentences).unwrap();
//! assert_eq!(executor.state.instances[0].attributes, vec!["apple", "red"]);
//! ```

pub mod ast;
pub mod executor;
pub mod export;
pub mod lexicon;
pub mod model;
pub mod parser;
pub mod printer;
pub mod token;

pub use ast::{ParsedSentence, ReferenceExpr, SentenceForm};
pub use executor::{ExecConfig, ExecError, ExecMode, ExecutionTrace, Executor};
pub use export::{from_json, summarize, to_dot, to_json, DotOptions, GraphSummary};
pub use lexicon::{Lexicon, LexiconError, VerbCategory};
pub use model::{InstanceId, SceneId, StoryState, ViId};
pub use parser::{parse_sentence, parse_story, ParseError, StoryParser, StorySentence};
pub use printer::print_canonical;
pub use token::{tokenize, Token, TokenKind};
