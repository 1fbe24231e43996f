//! Recursive-descent parser from tokens to [`ParsedSentence`] trees.
//!
//! Sentences end with a period and may span lines. Scene macros are
//! line-based; a macro line ending in a comma continues on the next line
//! (member rows). `$..` clones the previous sentence's quote prefix.

use thiserror::Error;

use crate::ast::{
    Article, ClausePayload, ClauseSentence, MacroKind, MacroMember, MacroSpec, ParsedSentence,
    ReferenceExpr, SentenceForm, ThusMarker,
};
use crate::lexicon::{Lexicon, VerbCategory};
use crate::token::{tokenize, Token, TokenError, TokenKind};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error(transparent)]
    Token(#[from] TokenError),
    #[error("unknown verb {word:?} at line {line}, column {column}")]
    UnknownVerb { word: String, line: usize, column: usize },
    #[error("unknown concept word {word:?} at line {line}, column {column}")]
    UnknownWord { word: String, line: usize, column: usize },
    #[error("malformed reference at line {line}, column {column}: {message}")]
    MalformedReference { message: String, line: usize, column: usize },
    #[error("missing sentence-terminating period at line {line}, column {column}")]
    MissingPeriod { line: usize, column: usize },
    #[error("adjective sentence needs at least one adjective at line {line}, column {column}")]
    MissingAdjective { line: usize, column: usize },
    #[error("quote verb {verb:?} needs `// <sentence>` at line {line}, column {column}")]
    QuoteWithoutBody { verb: String, line: usize, column: usize },
    #[error("quote verb {verb:?} needs a scene (`in #label`) at line {line}, column {column}")]
    QuoteWithoutScene { verb: String, line: usize, column: usize },
    #[error("`$..` continuation without a preceding quote sentence at line {line}")]
    OrphanContinuation { line: usize },
    #[error("expected {expected} at line {line}, column {column}, found {found}")]
    Unexpected { expected: String, found: String, line: usize, column: usize },
    #[error("macro syntax error at line {line}: {message}")]
    MacroSyntax { message: String, line: usize },
    #[error("empty sentence")]
    Empty,
}

/// A parsed sentence with the source line it started on.
#[derive(Debug, Clone, PartialEq)]
pub struct StorySentence {
    pub sentence: ParsedSentence,
    pub line: usize,
}

/// Parses a sequence of sentence units, carrying the quote-prefix state
/// that `$..` continuations need. One per story; the REPL feeds it
/// incrementally.
pub struct StoryParser<'l> {
    lexicon: &'l Lexicon,
    last_quote: Option<ClauseSentence>,
}

impl<'l> StoryParser<'l> {
    pub fn new(lexicon: &'l Lexicon) -> StoryParser<'l> {
        StoryParser {
            lexicon,
            last_quote: None,
        }
    }

    /// Parse every sentence in `text`, stopping at the first error.
    pub fn parse_all(&mut self, text: &str) -> Result<Vec<StorySentence>, ParseError> {
        let mut out = Vec::new();
        for unit in segment(&tokenize(text)?)? {
            out.push(self.parse_unit(&unit)?);
        }
        Ok(out)
    }

    /// Parse every sentence in `text`, skipping units that fail and
    /// collecting the errors.
    pub fn parse_all_lenient(&mut self, text: &str) -> (Vec<StorySentence>, Vec<ParseError>) {
        let tokens = match tokenize(text) {
            Ok(t) => t,
            Err(e) => return (Vec::new(), vec![e.into()]),
        };
        let units = match segment(&tokens) {
            Ok(u) => u,
            Err(e) => return (Vec::new(), vec![e]),
        };
        let mut sentences = Vec::new();
        let mut errors = Vec::new();
        for unit in units {
            match self.parse_unit(&unit) {
                Ok(s) => sentences.push(s),
                Err(e) => errors.push(e),
            }
        }
        (sentences, errors)
    }

    /// Parse one segmented unit (a complete sentence, macro, or `$..` row).
    pub fn parse_unit(&mut self, tokens: &[Token]) -> Result<StorySentence, ParseError> {
        let first = tokens.first().ok_or(ParseError::Empty)?;
        let line = first.line;
        if first.kind == TokenKind::MacroHead && first.text == ".." {
            let prev = self
                .last_quote
                .clone()
                .ok_or(ParseError::OrphanContinuation { line })?;
            let sentence = expand_continuation(tokens, &prev, self.lexicon)?;
            self.last_quote = Some(sentence.clone());
            return Ok(StorySentence {
                sentence: ParsedSentence::Clause(sentence),
                line,
            });
        }
        let sentence = parse_sentence(tokens, self.lexicon)?;
        if let ParsedSentence::Clause(clause) = &sentence {
            if clause.form() == SentenceForm::Quote {
                self.last_quote = Some(clause.clone());
            }
        }
        Ok(StorySentence { sentence, line })
    }
}

/// Parse a whole story text; the first error aborts.
pub fn parse_story(text: &str, lexicon: &Lexicon) -> Result<Vec<StorySentence>, ParseError> {
    StoryParser::new(lexicon).parse_all(text)
}

/// Parse one sentence from tokens. `$..` units cannot be parsed without
/// story context and report an orphan continuation.
pub fn parse_sentence(tokens: &[Token], lexicon: &Lexicon) -> Result<ParsedSentence, ParseError> {
    let first = tokens.first().ok_or(ParseError::Empty)?;
    if first.kind == TokenKind::MacroHead {
        if first.text == ".." {
            return Err(ParseError::OrphanContinuation { line: first.line });
        }
        return parse_macro(tokens, lexicon).map(ParsedSentence::SceneMacro);
    }
    // a member row (`apple -> apple, "John"`) has arrows but no verb slash
    let has_slash = tokens.iter().any(|t| t.kind == TokenKind::Slash);
    let has_arrow = tokens.iter().any(|t| t.kind == TokenKind::Arrow);
    if has_arrow && !has_slash {
        let mut cur = Cursor::new(tokens);
        let members = parse_member_list(&mut cur, lexicon)?;
        cur.expect_end()?;
        return Ok(ParsedSentence::MacroRow(members));
    }

    let last = tokens.last().unwrap();
    if last.kind != TokenKind::Period {
        return Err(ParseError::MissingPeriod {
            line: last.line,
            column: last.column,
        });
    }
    let body = &tokens[..tokens.len() - 1];
    let mut cur = Cursor::new(body);
    let clause = parse_clause(&mut cur, lexicon)?;
    cur.expect_end()?;
    Ok(ParsedSentence::Clause(clause))
}

/// Convenience wrapper: tokenize and parse one sentence.
pub fn parse_sentence_text(text: &str, lexicon: &Lexicon) -> Result<ParsedSentence, ParseError> {
    parse_sentence(&tokenize(text)?, lexicon)
}

/// True when the buffered tokens form a complete input unit. Used by the
/// REPL to decide whether to keep reading lines.
pub fn unit_complete(tokens: &[Token]) -> bool {
    match tokens.first() {
        None => true,
        Some(t) if t.kind == TokenKind::MacroHead && t.text != ".." => {
            !matches!(tokens.last(), Some(t) if t.kind == TokenKind::Comma)
        }
        _ => matches!(tokens.last(), Some(t) if t.kind == TokenKind::Period),
    }
}

/// Split a token stream into sentence units: period-terminated clauses,
/// line-based macros (with comma continuation), and `$..` rows.
fn segment(tokens: &[Token]) -> Result<Vec<Vec<Token>>, ParseError> {
    let mut units = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let start = &tokens[i];
        if start.kind == TokenKind::MacroHead && start.text != ".." {
            let mut j = i;
            let mut current_line = start.line;
            loop {
                while j < tokens.len() && tokens[j].line == current_line {
                    j += 1;
                }
                let continues = tokens
                    .get(j - 1)
                    .map(|t| t.kind == TokenKind::Comma)
                    .unwrap_or(false);
                if continues && j < tokens.len() {
                    current_line = tokens[j].line;
                } else {
                    break;
                }
            }
            units.push(tokens[i..j].to_vec());
            i = j;
        } else {
            let mut j = i;
            loop {
                match tokens.get(j) {
                    None => {
                        let last = &tokens[tokens.len() - 1];
                        return Err(ParseError::MissingPeriod {
                            line: last.line,
                            column: last.column,
                        });
                    }
                    Some(t) if t.kind == TokenKind::Period => {
                        j += 1;
                        break;
                    }
                    Some(t) if t.kind == TokenKind::MacroHead && j > i => {
                        return Err(ParseError::MissingPeriod {
                            line: t.line,
                            column: t.column,
                        });
                    }
                    Some(_) => j += 1,
                }
            }
            units.push(tokens[i..j].to_vec());
            i = j;
        }
    }
    Ok(units)
}

fn expand_continuation(
    tokens: &[Token],
    prev: &ClauseSentence,
    lexicon: &Lexicon,
) -> Result<ClauseSentence, ParseError> {
    let mut cur = Cursor::new(tokens);
    cur.bump(); // the `$..` head
    cur.expect(TokenKind::DoubleSlash, "`//`")?;
    let last = tokens.last().unwrap();
    if last.kind != TokenKind::Period {
        return Err(ParseError::MissingPeriod {
            line: last.line,
            column: last.column,
        });
    }
    let body = &tokens[cur.pos..tokens.len() - 1];
    let mut inner_cur = Cursor::new(body);
    let inner = parse_clause(&mut inner_cur, lexicon)?;
    inner_cur.expect_end()?;
    let scene_label = match &prev.payload {
        ClausePayload::Quote { scene_label, .. } => scene_label.clone(),
        _ => unreachable!("continuation antecedent is always a quote"),
    };
    Ok(ClauseSentence {
        subject: prev.subject.clone(),
        thus: prev.thus.clone(),
        in_summary: prev.in_summary,
        verb: prev.verb.clone(),
        verb_label: prev.verb_label.clone(),
        payload: ClausePayload::Quote {
            scene_label,
            inner: Box::new(ParsedSentence::Clause(inner)),
        },
    })
}

struct Cursor<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Cursor<'t> {
    fn new(tokens: &'t [Token]) -> Cursor<'t> {
        Cursor { tokens, pos: 0 }
    }

    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Position for error reporting: the current token, or the last one.
    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| (t.line, t.column))
            .unwrap_or((0, 0))
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Result<&'t Token, ParseError> {
        match self.peek() {
            Some(t) if t.kind == kind => Ok(self.bump().unwrap()),
            other => {
                let (line, column) = self.here();
                Err(ParseError::Unexpected {
                    expected: expected.to_string(),
                    found: other.map(|t| format!("{:?}", t.text)).unwrap_or_else(|| "end of sentence".into()),
                    line,
                    column,
                })
            }
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(ParseError::Unexpected {
                expected: "end of sentence".into(),
                found: format!("{:?}", t.text),
                line: t.line,
                column: t.column,
            }),
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Word && t.text == word => {
                self.bump();
                true
            }
            _ => false,
        }
    }
}

fn parse_clause(cur: &mut Cursor<'_>, lexicon: &Lexicon) -> Result<ClauseSentence, ParseError> {
    let subject = parse_reference(cur, lexicon)?;
    cur.expect(TokenKind::Slash, "`/` after subject")?;

    // verb phrase
    let mut thus = None;
    if cur.eat_word("thus") {
        thus = Some(match cur.peek() {
            Some(t) if t.kind == TokenKind::Label => {
                let label = t.text.clone();
                cur.bump();
                ThusMarker::Labeled(label)
            }
            _ => ThusMarker::Bare,
        });
    }
    let in_summary = cur.eat_word("in-summary");
    let verb_token = cur.expect(TokenKind::Word, "a verb word")?;
    let verb = verb_token.text.clone();
    let entry = lexicon.verb(&verb).ok_or(ParseError::UnknownVerb {
        word: verb.clone(),
        line: verb_token.line,
        column: verb_token.column,
    })?;
    let mut verb_label = None;
    if let Some(t) = cur.peek() {
        if t.kind == TokenKind::Label {
            verb_label = Some(t.text.clone());
            cur.bump();
        }
    }
    let mut quote_scene: Option<String> = None;
    if cur.eat_word("in") {
        let label = cur.expect(TokenKind::Label, "a scene label after `in`")?;
        quote_scene = Some(label.text.clone());
    }

    let is_quote_verb = entry.category == VerbCategory::Quote;
    let payload = match cur.peek() {
        None => {
            if is_quote_verb {
                let (line, column) = cur.here();
                return Err(ParseError::QuoteWithoutBody { verb, line, column });
            }
            if entry.category == VerbCategory::Attribute {
                let (line, column) = cur.here();
                return Err(ParseError::MissingAdjective { line, column });
            }
            ClausePayload::None
        }
        Some(t) if t.kind == TokenKind::Slash => {
            cur.bump();
            if entry.category == VerbCategory::Attribute {
                let adjectives = parse_adjectives(cur, lexicon)?;
                ClausePayload::Adjectives(adjectives)
            } else {
                ClausePayload::Object(parse_reference(cur, lexicon)?)
            }
        }
        Some(t) if t.kind == TokenKind::DoubleSlash => {
            cur.bump();
            if !is_quote_verb {
                let (line, column) = cur.here();
                return Err(ParseError::Unexpected {
                    expected: "`/` or end of sentence".into(),
                    found: "`//`".into(),
                    line,
                    column,
                });
            }
            let scene_label = quote_scene.take().ok_or(ParseError::QuoteWithoutScene {
                verb: verb.clone(),
                line: verb_token.line,
                column: verb_token.column,
            })?;
            let inner = parse_clause(cur, lexicon)?;
            ClausePayload::Quote {
                scene_label,
                inner: Box::new(ParsedSentence::Clause(inner)),
            }
        }
        Some(t) => {
            return Err(ParseError::Unexpected {
                expected: "`/`, `//` or end of sentence".into(),
                found: format!("{:?}", t.text),
                line: t.line,
                column: t.column,
            })
        }
    };

    if is_quote_verb && !matches!(payload, ClausePayload::Quote { .. }) {
        let (line, column) = cur.here();
        return Err(ParseError::QuoteWithoutBody { verb, line, column });
    }
    if quote_scene.is_some() {
        // `in #label` is only meaningful on quote verbs
        return Err(ParseError::Unexpected {
            expected: "`//` after quote scene".into(),
            found: "sentence without quote body".into(),
            line: verb_token.line,
            column: verb_token.column,
        });
    }

    Ok(ClauseSentence {
        subject,
        thus,
        in_summary,
        verb,
        verb_label,
        payload,
    })
}

fn parse_adjectives(cur: &mut Cursor<'_>, lexicon: &Lexicon) -> Result<Vec<String>, ParseError> {
    let mut adjectives = Vec::new();
    while let Some(t) = cur.peek() {
        if t.kind != TokenKind::Word {
            break;
        }
        check_concept(t, lexicon)?;
        adjectives.push(t.text.clone());
        cur.bump();
    }
    if adjectives.is_empty() {
        let (line, column) = cur.here();
        return Err(ParseError::MissingAdjective { line, column });
    }
    Ok(adjectives)
}

fn check_concept(token: &Token, lexicon: &Lexicon) -> Result<(), ParseError> {
    if lexicon.is_concept(&token.text) {
        Ok(())
    } else {
        Err(ParseError::UnknownWord {
            word: token.text.clone(),
            line: token.line,
            column: token.column,
        })
    }
}

fn parse_reference(cur: &mut Cursor<'_>, lexicon: &Lexicon) -> Result<ReferenceExpr, ParseError> {
    let first = parse_reference_part(cur, lexicon)?;
    if !matches!(cur.peek(), Some(t) if t.kind == TokenKind::Plus) {
        return Ok(first);
    }
    let mut parts = vec![first];
    while matches!(cur.peek(), Some(t) if t.kind == TokenKind::Plus) {
        cur.bump();
        parts.push(parse_reference_part(cur, lexicon)?);
    }
    Ok(ReferenceExpr {
        group_parts: parts,
        ..ReferenceExpr::default()
    })
}

fn parse_reference_part(
    cur: &mut Cursor<'_>,
    lexicon: &Lexicon,
) -> Result<ReferenceExpr, ParseError> {
    let (line, column) = cur.here();
    match cur.peek() {
        Some(t) if t.kind == TokenKind::SceneKeyword => {
            cur.bump();
            let scene_label = match cur.peek() {
                Some(t) if t.kind == TokenKind::Label || t.kind == TokenKind::ProperName => {
                    let label = t.text.clone();
                    cur.bump();
                    Some(label)
                }
                _ => None,
            };
            return Ok(ReferenceExpr {
                is_scene_ref: true,
                scene_label,
                ..ReferenceExpr::default()
            });
        }
        Some(t) if t.kind == TokenKind::TextLiteral => {
            let text = t.text.clone();
            cur.bump();
            return Ok(ReferenceExpr {
                is_text_literal: Some(text),
                ..ReferenceExpr::default()
            });
        }
        _ => {}
    }

    let mut reference = ReferenceExpr::default();
    if let Some(t) = cur.peek() {
        if t.kind == TokenKind::Word {
            match t.text.as_str() {
                "a" | "an" => {
                    reference.article = Article::Indefinite;
                    cur.bump();
                }
                "the" => {
                    reference.article = Article::Definite;
                    cur.bump();
                }
                _ => {}
            }
        }
    }

    let mut words: Vec<&Token> = Vec::new();
    while let Some(t) = cur.peek() {
        if t.kind == TokenKind::Word {
            words.push(t);
            cur.bump();
        } else {
            break;
        }
    }
    // bare `I` / `Me` is a pronoun, resolved against the quote context
    if reference.article == Article::None && words.len() == 1 {
        let w = &words[0].text;
        if w == "I" || w == "Me" {
            reference.pronoun = Some(w.clone());
            return Ok(reference);
        }
    }
    for token in &words {
        check_concept(token, lexicon)?;
        reference.attributes.push(token.text.clone());
    }

    if let Some(t) = cur.peek() {
        if t.kind == TokenKind::ProperName {
            reference.proper_name = Some(t.text.clone());
            cur.bump();
        }
    }

    if reference.attributes.is_empty()
        && reference.proper_name.is_none()
        && reference.article == Article::None
    {
        return Err(ParseError::MalformedReference {
            message: "expected a reference".into(),
            line,
            column,
        });
    }
    if reference.attributes.is_empty() && reference.proper_name.is_none() {
        return Err(ParseError::MalformedReference {
            message: "article without words or name".into(),
            line,
            column,
        });
    }

    if matches!(cur.peek(), Some(t) if t.kind == TokenKind::DashDash) {
        cur.bump();
        let path_token = cur.expect(TokenKind::Word, "a path word (`of` or `in`)")?;
        let path_word = path_token.text.clone();
        let (pline, pcolumn) = (path_token.line, path_token.column);
        cur.expect(TokenKind::DashDash, "`--` after the path word")?;
        match path_word.as_str() {
            "of" => {
                let target = parse_reference_part(cur, lexicon)?;
                reference.relation_path = Some(("of".into(), Box::new(target)));
            }
            "in" => {
                let label = match cur.peek() {
                    Some(t) if t.kind == TokenKind::ProperName || t.kind == TokenKind::Label => {
                        let label = t.text.clone();
                        cur.bump();
                        label
                    }
                    Some(t) if t.kind == TokenKind::SceneKeyword => {
                        cur.bump();
                        match cur.peek() {
                            Some(t)
                                if t.kind == TokenKind::Label
                                    || t.kind == TokenKind::ProperName =>
                            {
                                let label = t.text.clone();
                                cur.bump();
                                label
                            }
                            _ => {
                                let (line, column) = cur.here();
                                return Err(ParseError::MalformedReference {
                                    message: "`-- in -- scene` needs a label or name".into(),
                                    line,
                                    column,
                                });
                            }
                        }
                    }
                    _ => {
                        let (line, column) = cur.here();
                        return Err(ParseError::MalformedReference {
                            message: "`-- in --` needs a scene name or label".into(),
                            line,
                            column,
                        });
                    }
                };
                reference.scene_qualifier = Some(label);
            }
            other => {
                return Err(ParseError::MalformedReference {
                    message: format!("unsupported path word `{other}` (only `of` and `in`)"),
                    line: pline,
                    column: pcolumn,
                })
            }
        }
    }

    Ok(reference)
}

fn parse_macro(tokens: &[Token], lexicon: &Lexicon) -> Result<MacroSpec, ParseError> {
    let mut cur = Cursor::new(tokens);
    let head = cur.bump().unwrap();
    let line = head.line;
    let kind = match head.text.as_str() {
        "NewSceneOnly" => MacroKind::NewSceneOnly,
        "NewSceneCurrent" => MacroKind::NewSceneCurrent,
        "NewScene" => MacroKind::NewScene,
        other => {
            return Err(ParseError::MacroSyntax {
                message: format!("unknown macro `${other}`"),
                line,
            })
        }
    };
    let label = cur.expect(TokenKind::Label, "a scene label")?;
    let scene_label = label.text.clone();

    let mut scene_relation = None;
    let mut members = Vec::new();
    if cur.peek().is_some() {
        cur.expect(TokenKind::Comma, "`,` before the scene relation")?;
        let rel = cur.expect(TokenKind::Word, "a scene relation word or `none`")?;
        if rel.text != "none" {
            scene_relation = Some(rel.text.clone());
        }
        if cur.peek().is_some() {
            cur.expect(TokenKind::Comma, "`,` before the member list")?;
            members = parse_member_list(&mut cur, lexicon)?;
        }
    }
    cur.expect_end()?;
    Ok(MacroSpec {
        kind,
        scene_label,
        scene_relation,
        members,
    })
}

fn parse_member_list(
    cur: &mut Cursor<'_>,
    lexicon: &Lexicon,
) -> Result<Vec<MacroMember>, ParseError> {
    let mut members = Vec::new();
    loop {
        members.push(parse_member(cur, lexicon)?);
        match cur.peek() {
            Some(t) if t.kind == TokenKind::Comma => {
                cur.bump();
            }
            _ => break,
        }
    }
    Ok(members)
}

fn parse_member(cur: &mut Cursor<'_>, lexicon: &Lexicon) -> Result<MacroMember, ParseError> {
    let first = parse_member_spec(cur, lexicon)?;
    if matches!(cur.peek(), Some(t) if t.kind == TokenKind::Arrow) {
        cur.bump();
        let target = parse_member_spec(cur, lexicon)?;
        Ok(MacroMember {
            attributes: target.0,
            proper_name: target.1,
            source: Some(first),
        })
    } else {
        Ok(MacroMember {
            attributes: first.0,
            proper_name: first.1,
            source: None,
        })
    }
}

fn parse_member_spec(
    cur: &mut Cursor<'_>,
    lexicon: &Lexicon,
) -> Result<(Vec<String>, Option<String>), ParseError> {
    let mut attrs = Vec::new();
    let mut name = None;
    while let Some(t) = cur.peek() {
        match t.kind {
            TokenKind::Word => {
                check_concept(t, lexicon)?;
                attrs.push(t.text.clone());
                cur.bump();
            }
            TokenKind::ProperName => {
                name = Some(t.text.clone());
                cur.bump();
                break;
            }
            _ => break,
        }
    }
    if attrs.is_empty() && name.is_none() {
        let (line, _) = cur.here();
        return Err(ParseError::MacroSyntax {
            message: "expected a member spec (attribute words or a name)".into(),
            line,
        });
    }
    Ok((attrs, name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Article;

    fn lex() -> Lexicon {
        Lexicon::with_defaults()
    }

    fn parse_one(text: &str) -> ParsedSentence {
        parse_sentence_text(text, &lex()).unwrap()
    }

    #[test]
    fn classifies_simple_forms() {
        assert_eq!(parse_one("An apple / exists.").form(), SentenceForm::SV);
        assert_eq!(
            parse_one("\"Achilles\" / hits / \"Hector\".").form(),
            SentenceForm::SVO
        );
        assert_eq!(
            parse_one("\"Hector\" / is-a / trojan warrior.").form(),
            SentenceForm::SVAdj
        );
    }

    #[test]
    fn quote_with_labels() {
        let s = parse_one("\"Me\" / sees in #Television // \"JayLeno\" / talks-to #A / \"BradPitt\".");
        let clause = s.as_clause().unwrap();
        assert_eq!(clause.form(), SentenceForm::Quote);
        match &clause.payload {
            ClausePayload::Quote { scene_label, inner } => {
                assert_eq!(scene_label, "Television");
                let inner = inner.as_clause().unwrap();
                assert_eq!(inner.form(), SentenceForm::SVO);
                assert_eq!(inner.verb, "talks-to");
                assert_eq!(inner.verb_label.as_deref(), Some("A"));
            }
            other => panic!("expected quote payload, got {other:?}"),
        }
    }

    #[test]
    fn labeled_thus_inside_quote() {
        let s = parse_one("\"Me\" / thinks in #Television // \"JayLeno\" / thus #A jokes.");
        let inner = match &s.as_clause().unwrap().payload {
            ClausePayload::Quote { inner, .. } => inner.as_clause().unwrap(),
            _ => panic!(),
        };
        assert_eq!(inner.thus, Some(ThusMarker::Labeled("A".into())));
        assert_eq!(inner.verb, "jokes");
        assert_eq!(inner.form(), SentenceForm::SV);
    }

    #[test]
    fn group_subject_with_summary_marker() {
        let s = parse_one("\"Caesar\" + \"Cicero\" / in-summary meet-and-greet-each-other.");
        let clause = s.as_clause().unwrap();
        assert_eq!(clause.form(), SentenceForm::SV);
        assert!(clause.in_summary);
        assert_eq!(clause.subject.group_parts.len(), 2);
        assert_eq!(clause.subject.article, Article::None);
    }

    #[test]
    fn adjective_sentence_requires_adjectives() {
        let err = parse_sentence_text("\"Hector\" / is-a.", &lex()).unwrap_err();
        assert!(matches!(err, ParseError::MissingAdjective { .. }));
    }

    #[test]
    fn unknown_verb_reports_position() {
        let err = parse_sentence_text("\"Hector\" / frobnicates.", &lex()).unwrap_err();
        match err {
            ParseError::UnknownVerb { word, line, column } => {
                assert_eq!(word, "frobnicates");
                assert_eq!((line, column), (1, 12));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn relation_path_and_scene_qualifier() {
        let s = parse_one("The shield -- of -- \"Achilles\" / is-a / big.");
        let subject = &s.as_clause().unwrap().subject;
        assert_eq!(subject.attributes, vec!["shield"]);
        let (word, target) = subject.relation_path.as_ref().unwrap();
        assert_eq!(word, "of");
        assert_eq!(target.proper_name.as_deref(), Some("Achilles"));

        let s = parse_one("The kitchen / is-identical / the kitchen -- in -- \"plan\".");
        let clause = s.as_clause().unwrap();
        let object = match &clause.payload {
            ClausePayload::Object(r) => r,
            _ => panic!(),
        };
        assert_eq!(object.scene_qualifier.as_deref(), Some("plan"));
    }

    #[test]
    fn scene_sentences() {
        let s = parse_one("Scene #yesterday / is-past-of / scene #current.");
        let clause = s.as_clause().unwrap();
        assert!(clause.subject.is_scene_ref);
        assert_eq!(clause.subject.scene_label.as_deref(), Some("yesterday"));
        match &clause.payload {
            ClausePayload::Object(r) => {
                assert!(r.is_scene_ref);
                assert_eq!(r.scene_label.as_deref(), Some("current"));
            }
            _ => panic!(),
        }
        // quoted scene names normalize to the same field
        let s = parse_one("Scene #yesterday / is-yesterday-of / scene \"current\".");
        match &s.as_clause().unwrap().payload {
            ClausePayload::Object(r) => assert_eq!(r.scene_label.as_deref(), Some("current")),
            _ => panic!(),
        }
    }

    #[test]
    fn scene_macro_with_arrows() {
        let text = "$NewScene #Attempt, fictional-future, man \"John\" -> man \"John\", cat -> cat, box -> box";
        let s = parse_sentence_text(text, &lex()).unwrap();
        match s {
            ParsedSentence::SceneMacro(m) => {
                assert_eq!(m.kind, MacroKind::NewScene);
                assert_eq!(m.scene_label, "Attempt");
                assert_eq!(m.scene_relation.as_deref(), Some("fictional-future"));
                assert_eq!(m.members.len(), 3);
                assert!(m.members.iter().all(|mm| mm.source.is_some()));
                assert_eq!(m.members[0].proper_name.as_deref(), Some("John"));
            }
            other => panic!("expected macro, got {other:?}"),
        }
    }

    #[test]
    fn macro_with_zero_members() {
        let s = parse_sentence_text("$NewSceneOnly #Reality", &lex()).unwrap();
        match s {
            ParsedSentence::SceneMacro(m) => {
                assert_eq!(m.scene_relation, None);
                assert!(m.members.is_empty());
            }
            _ => panic!(),
        }
    }

    #[test]
    fn member_row_parses_standalone() {
        let s = parse_sentence_text("apple-> apple, \"John\"", &lex()).unwrap();
        assert_eq!(s.form(), SentenceForm::IdentityMacroRow);
        match s {
            ParsedSentence::MacroRow(members) => {
                assert_eq!(members.len(), 2);
                assert!(members[0].source.is_some());
                assert_eq!(members[1].proper_name.as_deref(), Some("John"));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn wrapped_macro_lines_join() {
        let text = "$NewScene #Television, none, man \"JayLeno\",\n   man \"BradPitt\"\n\"BradPitt\" / laughs.\n";
        let sentences = parse_story(text, &lex()).unwrap();
        assert_eq!(sentences.len(), 2);
        match &sentences[0].sentence {
            ParsedSentence::SceneMacro(m) => assert_eq!(m.members.len(), 2),
            _ => panic!(),
        }
    }

    #[test]
    fn plan_story_expands_continuations() {
        let text = "\
$NewSceneOnly #Reality, none, man \"John\"
\"John\" / is-a / hungry.
$NewScene #Plan, fictional-future, \"John\" -> \"John\"
\"John\" / plans in #Plan // I / goes-to / a kitchen.
$..// I / open / a fridge.
$..// A milk / is-inside / the fridge.
$..// I / pick-up / the milk.
$..// I / drink / the milk.
";
        let sentences = parse_story(text, &lex()).unwrap();
        assert_eq!(sentences.len(), 8);
        let forms: Vec<SentenceForm> = sentences.iter().map(|s| s.sentence.form()).collect();
        assert_eq!(forms[0], SentenceForm::SceneMacro);
        assert_eq!(forms[1], SentenceForm::SVAdj);
        assert_eq!(forms[2], SentenceForm::SceneMacro);
        assert!(forms[3..].iter().all(|f| *f == SentenceForm::Quote));
        for s in &sentences[3..] {
            let clause = s.sentence.as_clause().unwrap();
            assert_eq!(clause.verb, "plans");
            match &clause.payload {
                ClausePayload::Quote { scene_label, .. } => assert_eq!(scene_label, "Plan"),
                _ => panic!(),
            }
        }
        // the last continuation's inner subject is the pronoun
        let last = sentences[7].sentence.as_clause().unwrap();
        match &last.payload {
            ClausePayload::Quote { inner, .. } => {
                assert_eq!(inner.as_clause().unwrap().subject.pronoun.as_deref(), Some("I"));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn orphan_continuation_is_an_error() {
        let err = parse_story("$..// I / drink / the milk.\n", &lex()).unwrap_err();
        assert_eq!(err, ParseError::OrphanContinuation { line: 1 });
    }

    #[test]
    fn iliad_snippet_forms() {
        let text = "\
A \"Hector\" / exists.
\"Hector\" / is-a / trojan warrior.
An \"Achilles\" / exists.
\"Achilles\" / is-a / greek warrior.
\"Achilles\" / owns / a shield.
The shield -- of -- \"Achilles\" / is-a / big.
\"Achilles\" / hits / \"Hector\".
\"Hector\" / hits / \"Achilles\".
";
        let sentences = parse_story(text, &lex()).unwrap();
        let forms: Vec<SentenceForm> = sentences.iter().map(|s| s.sentence.form()).collect();
        assert_eq!(
            forms,
            vec![
                SentenceForm::SV,
                SentenceForm::SVAdj,
                SentenceForm::SV,
                SentenceForm::SVAdj,
                SentenceForm::SVO,
                SentenceForm::SVAdj,
                SentenceForm::SVO,
                SentenceForm::SVO,
            ]
        );
        let path_subject = sentences[5].sentence.as_clause().unwrap();
        assert!(path_subject.subject.relation_path.is_some());
    }

    #[test]
    fn lenient_mode_skips_and_reports() {
        let text = "An apple / exists.\n\"Ghost\" / frobnicates.\nThe apple / is-a / red.\n";
        let lexicon = lex();
        let mut parser = StoryParser::new(&lexicon);
        let (sentences, errors) = parser.parse_all_lenient(text);
        assert_eq!(sentences.len(), 2);
        assert_eq!(errors.len(), 1);
    }

    #[test]
    fn articles_never_become_attributes() {
        let s = parse_one("The box / contains / an inexistent pencil.");
        let clause = s.as_clause().unwrap();
        assert_eq!(clause.subject.attributes, vec!["box"]);
        match &clause.payload {
            ClausePayload::Object(r) => {
                assert_eq!(r.article, Article::Indefinite);
                assert_eq!(r.attributes, vec!["inexistent", "pencil"]);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn missing_period_reported() {
        let err = parse_story("An apple / exists\n$NewScene #X", &lex()).unwrap_err();
        assert!(matches!(err, ParseError::MissingPeriod { .. }));
    }

    #[test]
    fn unit_completeness_for_repl_buffers() {
        let t = |s: &str| tokenize(s).unwrap();
        assert!(unit_complete(&t("An apple / exists.")));
        assert!(!unit_complete(&t("An apple / exists")));
        assert!(!unit_complete(&t("$NewScene #X, none,")));
        assert!(unit_complete(&t("$NewScene #X, none, apple")));
        assert!(unit_complete(&t("$..// I / drink / the milk.")));
    }
}
