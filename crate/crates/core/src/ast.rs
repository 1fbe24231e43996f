//! Syntax trees for Xapi sentences and noun-phrase references.

/// Article of a reference. `None` covers bare names (`"Hector"`) and bare
/// attribute references (`pair`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Article {
    Indefinite,
    Definite,
    #[default]
    None,
}

/// One noun-phrase reference.
///
/// A group reference (`A + B`) carries its parts in `group_parts` and has
/// no article, attributes, or name of its own. A text literal excludes all
/// other fields.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReferenceExpr {
    pub article: Article,
    pub attributes: Vec<String>,
    pub proper_name: Option<String>,
    /// `X -- of -- Y`: the path word and the target reference.
    pub relation_path: Option<(String, Box<ReferenceExpr>)>,
    /// `X -- in -- "scene"`: the scene the reference resolves in.
    pub scene_qualifier: Option<String>,
    pub group_parts: Vec<ReferenceExpr>,
    /// `scene` / `scene #label` / `scene "name"`.
    pub is_scene_ref: bool,
    /// Scene label when `is_scene_ref` (bare `Scene` means the current one).
    pub scene_label: Option<String>,
    pub is_text_literal: Option<String>,
    /// Bare `I` or `Me` inside a quoted sentence.
    pub pronoun: Option<String>,
}

impl ReferenceExpr {
    pub fn is_group(&self) -> bool {
        !self.group_parts.is_empty()
    }

    pub fn named(name: &str) -> ReferenceExpr {
        ReferenceExpr {
            proper_name: Some(name.to_string()),
            ..ReferenceExpr::default()
        }
    }
}

/// How a `thus` marker was written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThusMarker {
    Bare,
    Labeled(String),
}

/// Classification of a parsed sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentenceForm {
    SV,
    SVO,
    SVAdj,
    Quote,
    SceneMacro,
    IdentityMacroRow,
}

impl std::fmt::Display for SentenceForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SentenceForm::SV => "SV",
            SentenceForm::SVO => "SVO",
            SentenceForm::SVAdj => "SVAdj",
            SentenceForm::Quote => "Quote",
            SentenceForm::SceneMacro => "SceneMacro",
            SentenceForm::IdentityMacroRow => "IdentityMacroRow",
        };
        f.write_str(name)
    }
}

/// The part of a clause after the verb.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClausePayload {
    /// Subject-verb, no third part.
    None,
    /// Subject-verb-object.
    Object(ReferenceExpr),
    /// Subject-verb-adjective(s).
    Adjectives(Vec<String>),
    /// Communication verb with a scene and a nested sentence.
    Quote {
        scene_label: String,
        inner: Box<ParsedSentence>,
    },
}

/// An ordinary (non-macro) sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseSentence {
    pub subject: ReferenceExpr,
    pub thus: Option<ThusMarker>,
    pub in_summary: bool,
    /// Verb word as written (`not-` prefix kept).
    pub verb: String,
    pub verb_label: Option<String>,
    pub payload: ClausePayload,
}

impl ClauseSentence {
    pub fn form(&self) -> SentenceForm {
        match self.payload {
            ClausePayload::None => SentenceForm::SV,
            ClausePayload::Object(_) => SentenceForm::SVO,
            ClausePayload::Adjectives(_) => SentenceForm::SVAdj,
            ClausePayload::Quote { .. } => SentenceForm::Quote,
        }
    }
}

/// Scene-creating macro kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroKind {
    /// Create a scene, make it current, drop focus on the prior scene's VIs.
    NewSceneOnly,
    /// Create a scene and make it current; prior scenes keep their focus.
    NewSceneCurrent,
    /// Create a scene without changing the current one.
    NewScene,
}

impl MacroKind {
    pub fn head(&self) -> &'static str {
        match self {
            MacroKind::NewSceneOnly => "NewSceneOnly",
            MacroKind::NewSceneCurrent => "NewSceneCurrent",
            MacroKind::NewScene => "NewScene",
        }
    }
}

/// One member spec inside a scene macro: `man "John"` creates an instance,
/// `man "John" -> man "John"` also identity-links it to an existing one.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MacroMember {
    pub attributes: Vec<String>,
    pub proper_name: Option<String>,
    /// Arrow source, resolved in the creating scene.
    pub source: Option<(Vec<String>, Option<String>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroSpec {
    pub kind: MacroKind,
    pub scene_label: String,
    /// Relation recorded from the creating scene to the new one; the word
    /// `none` parses to `None`.
    pub scene_relation: Option<String>,
    pub members: Vec<MacroMember>,
}

/// One parsed sentence of a story.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedSentence {
    Clause(ClauseSentence),
    SceneMacro(MacroSpec),
    /// A macro continuation row parsed on its own (member specs only).
    MacroRow(Vec<MacroMember>),
}

impl ParsedSentence {
    pub fn form(&self) -> SentenceForm {
        match self {
            ParsedSentence::Clause(c) => c.form(),
            ParsedSentence::SceneMacro(_) => SentenceForm::SceneMacro,
            ParsedSentence::MacroRow(_) => SentenceForm::IdentityMacroRow,
        }
    }

    pub fn as_clause(&self) -> Option<&ClauseSentence> {
        match self {
            ParsedSentence::Clause(c) => Some(c),
            _ => None,
        }
    }
}
