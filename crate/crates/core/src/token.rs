//! Tokenizer for Xapi text.
//!
//! Comments (`%` to end of line) are dropped. Every token carries its
//! 1-based line and column. Quoted proper names keep interior spacing and
//! capitalization exactly; the capitalized articles `A`/`An`/`The` and the
//! keyword `Scene` are normalized here so the parser only sees one form.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    /// A bare word: concept, verb, article, marker, or pronoun.
    Word,
    /// A quoted proper name, quotes stripped.
    ProperName,
    Slash,
    DoubleSlash,
    DashDash,
    Plus,
    /// `#label`, leading `#` stripped.
    Label,
    Period,
    Comma,
    Arrow,
    /// `$NewScene` and friends (`$` stripped), or `$..` (text `..`).
    MacroHead,
    /// `text "..."` collapsed into one token holding the quoted string.
    TextLiteral,
    /// The keyword `scene` (or sentence-initial `Scene`).
    SceneKeyword,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn position(&self) -> (usize, usize) {
        (self.line, self.column)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TokenError {
    #[error("unterminated quoted name at line {line}, column {column}")]
    UnterminatedName { line: usize, column: usize },
    #[error("illegal character {ch:?} at line {line}, column {column}")]
    IllegalChar { ch: char, line: usize, column: usize },
    #[error("empty label at line {line}, column {column}")]
    EmptyLabel { line: usize, column: usize },
}

struct Scanner<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Scanner<'a> {
        Scanner {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Tokenize a whole story or a single sentence.
pub fn tokenize(text: &str) -> Result<Vec<Token>, TokenError> {
    let mut sc = Scanner::new(text);
    let mut tokens: Vec<Token> = Vec::new();

    while let Some(c) = sc.peek() {
        let (line, column) = (sc.line, sc.column);
        match c {
            '%' => {
                while let Some(c) = sc.peek() {
                    if c == '\n' {
                        break;
                    }
                    sc.bump();
                }
            }
            c if c.is_whitespace() => {
                sc.bump();
            }
            '"' => {
                sc.bump();
                let mut name = String::new();
                loop {
                    match sc.peek() {
                        Some('"') => {
                            sc.bump();
                            break;
                        }
                        Some('\n') | None => {
                            return Err(TokenError::UnterminatedName { line, column });
                        }
                        Some(ch) => {
                            name.push(ch);
                            sc.bump();
                        }
                    }
                }
                // `text "..."` collapses into a single text-literal token
                if matches!(tokens.last(), Some(t) if t.kind == TokenKind::Word && t.text == "text")
                {
                    let head = tokens.pop().unwrap();
                    tokens.push(Token {
                        kind: TokenKind::TextLiteral,
                        text: name,
                        line: head.line,
                        column: head.column,
                    });
                } else {
                    tokens.push(Token {
                        kind: TokenKind::ProperName,
                        text: name,
                        line,
                        column,
                    });
                }
            }
            '/' => {
                sc.bump();
                if sc.peek() == Some('/') {
                    sc.bump();
                    tokens.push(Token {
                        kind: TokenKind::DoubleSlash,
                        text: "//".into(),
                        line,
                        column,
                    });
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Slash,
                        text: "/".into(),
                        line,
                        column,
                    });
                }
            }
            '-' => {
                sc.bump();
                match sc.peek() {
                    Some('-') => {
                        sc.bump();
                        tokens.push(Token {
                            kind: TokenKind::DashDash,
                            text: "--".into(),
                            line,
                            column,
                        });
                    }
                    Some('>') => {
                        sc.bump();
                        tokens.push(Token {
                            kind: TokenKind::Arrow,
                            text: "->".into(),
                            line,
                            column,
                        });
                    }
                    _ => return Err(TokenError::IllegalChar { ch: '-', line, column }),
                }
            }
            '+' => {
                sc.bump();
                tokens.push(Token {
                    kind: TokenKind::Plus,
                    text: "+".into(),
                    line,
                    column,
                });
            }
            '.' => {
                sc.bump();
                tokens.push(Token {
                    kind: TokenKind::Period,
                    text: ".".into(),
                    line,
                    column,
                });
            }
            ',' => {
                sc.bump();
                tokens.push(Token {
                    kind: TokenKind::Comma,
                    text: ",".into(),
                    line,
                    column,
                });
            }
            '#' => {
                sc.bump();
                let label = scan_word(&mut sc);
                if label.is_empty() {
                    return Err(TokenError::EmptyLabel { line, column });
                }
                tokens.push(Token {
                    kind: TokenKind::Label,
                    text: label,
                    line,
                    column,
                });
            }
            '$' => {
                sc.bump();
                let head = if sc.peek() == Some('.') {
                    sc.bump();
                    if sc.peek() == Some('.') {
                        sc.bump();
                        "..".to_string()
                    } else {
                        return Err(TokenError::IllegalChar { ch: '.', line, column });
                    }
                } else {
                    scan_word(&mut sc)
                };
                if head.is_empty() {
                    return Err(TokenError::IllegalChar { ch: '$', line, column });
                }
                tokens.push(Token {
                    kind: TokenKind::MacroHead,
                    text: head,
                    line,
                    column,
                });
            }
            c if is_word_char(c) => {
                let word = scan_word(&mut sc);
                let token = match word.as_str() {
                    "scene" | "Scene" => Token {
                        kind: TokenKind::SceneKeyword,
                        text: "scene".into(),
                        line,
                        column,
                    },
                    "A" | "An" | "The" => Token {
                        kind: TokenKind::Word,
                        text: word.to_lowercase(),
                        line,
                        column,
                    },
                    _ => Token {
                        kind: TokenKind::Word,
                        text: word,
                        line,
                        column,
                    },
                };
                tokens.push(token);
            }
            other => {
                return Err(TokenError::IllegalChar {
                    ch: other,
                    line,
                    column,
                })
            }
        }
    }
    Ok(tokens)
}

/// Scan a word: alphanumerics with interior hyphens. A hyphen ends the word
/// unless the next character continues it, so `apple->` stops before `->`.
fn scan_word(sc: &mut Scanner<'_>) -> String {
    let mut word = String::new();
    while let Some(c) = sc.peek() {
        if is_word_char(c) {
            word.push(c);
            sc.bump();
        } else if c == '-' {
            let mut ahead = sc.chars.clone();
            ahead.next();
            match ahead.next() {
                Some(n) if is_word_char(n) => {
                    word.push('-');
                    sc.bump();
                }
                _ => break,
            }
        } else {
            break;
        }
    }
    word
}
