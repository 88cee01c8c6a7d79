//! POS-pattern DSL: parsing, compilation to a finite-state matcher, and
//! candidate extraction.
//!
//! Patterns are regular expressions over the six-symbol coarse tag alphabet:
//!
//! ```text
//! atom    := "{" TAG "}" | "{.*}"
//! group   := "(" expr ")"
//! postfix := (atom | group) ("?" | "*" | "+")?
//! concat  := postfix+
//! expr    := concat ("|" concat)*
//! ```
//!
//! `{.*}` matches a non-empty run of arbitrary tags (any tag, including
//! `HYPH`, one or more times), so `({.*}{HYPH}{.*})` covers multi-token
//! hyphenated compounds like `state - of - the - art` in one match.
//! Whitespace between atoms is ignored.

mod candidates;
mod matcher;

pub use candidates::{extract_candidates, select_ngrams, Candidate};
pub use matcher::Matcher;

use std::fmt;

use thiserror::Error;

use crate::textpipe::CoarseTag;

/// Errors from pattern parsing and n-gram selection.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    /// The pattern text is not well formed.
    #[error("parse error at position {position}: expected {expected}")]
    Parse { position: usize, expected: String },
    /// A braced tag name outside the coarse alphabet.
    #[error("unknown tag {0:?} (expected NOUN, ADJ, VBG, VBN, HYPH, OTHER, or .*)")]
    UnknownTag(String),
    /// n-gram bounds violate 1 <= min <= max.
    #[error("invalid n-gram range [{min},{max}]")]
    InvalidRange { min: usize, max: usize },
}

/// Parsed pattern expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternAst {
    /// One token with the given coarse tag.
    Literal(CoarseTag),
    /// `{.*}`: a non-empty run of tokens with arbitrary tags.
    Wildcard,
    Concat(Vec<PatternAst>),
    Alternation(Vec<PatternAst>),
    /// `min` to `max` repetitions of the child; `None` means unbounded.
    Repeat(Box<PatternAst>, u32, Option<u32>),
}

/// The two patterns the toolkit ships with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinPattern {
    /// Hyphenated compounds followed by nouns, or an optional participle,
    /// adjectives, and nouns.
    PatternrankPos,
    /// Zero or more adjectives followed by one or more nouns.
    NounPhrase,
}

impl BuiltinPattern {
    /// The pattern source in DSL syntax.
    pub fn source(&self) -> &'static str {
        match self {
            BuiltinPattern::PatternrankPos => {
                "(({.*}{HYPH}{.*}){NOUN}*)|(({VBG}|{VBN})?{ADJ}*{NOUN}+)"
            }
            BuiltinPattern::NounPhrase => "{ADJ}*{NOUN}+",
        }
    }
}

/// Parse a builtin by its canonical name.
pub fn builtin_pattern(name: BuiltinPattern) -> PatternAst {
    parse_pattern(name.source()).expect("builtin patterns parse")
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, expected: &str) -> PatternError {
        PatternError::Parse {
            position: self.pos,
            expected: expected.to_string(),
        }
    }

    fn expr(&mut self) -> Result<PatternAst, PatternError> {
        let mut branches = vec![self.concat()?];
        loop {
            self.skip_ws();
            if self.peek() == Some('|') {
                self.pos += 1;
                branches.push(self.concat()?);
            } else {
                break;
            }
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            PatternAst::Alternation(branches)
        })
    }

    fn concat(&mut self) -> Result<PatternAst, PatternError> {
        let mut parts = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some('{') | Some('(') => parts.push(self.postfix()?),
                _ => break,
            }
        }
        match parts.len() {
            0 => Err(self.error("'{' or '('")),
            1 => Ok(parts.pop().unwrap()),
            _ => Ok(PatternAst::Concat(parts)),
        }
    }

    fn postfix(&mut self) -> Result<PatternAst, PatternError> {
        let inner = match self.peek() {
            Some('{') => self.atom()?,
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.error("')'"));
                }
                self.pos += 1;
                e
            }
            _ => return Err(self.error("'{' or '('")),
        };
        Ok(match self.peek() {
            Some('?') => {
                self.pos += 1;
                PatternAst::Repeat(Box::new(inner), 0, Some(1))
            }
            Some('*') => {
                self.pos += 1;
                PatternAst::Repeat(Box::new(inner), 0, None)
            }
            Some('+') => {
                self.pos += 1;
                PatternAst::Repeat(Box::new(inner), 1, None)
            }
            _ => inner,
        })
    }

    fn atom(&mut self) -> Result<PatternAst, PatternError> {
        debug_assert_eq!(self.peek(), Some('{'));
        self.pos += 1;
        let mut name = String::new();
        loop {
            match self.peek() {
                Some('}') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => {
                    name.push(c);
                    self.pos += 1;
                }
                None => return Err(self.error("'}'")),
            }
        }
        if name == ".*" {
            return Ok(PatternAst::Wildcard);
        }
        CoarseTag::from_name(&name)
            .map(PatternAst::Literal)
            .ok_or(PatternError::UnknownTag(name))
    }
}

/// Parse a pattern expression into its AST.
pub fn parse_pattern(source: &str) -> Result<PatternAst, PatternError> {
    let mut parser = Parser {
        chars: source.chars().collect(),
        pos: 0,
    };
    let ast = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.chars.len() {
        return Err(parser.error("end of pattern"));
    }
    Ok(ast)
}

/// Compile an AST into its finite-state matcher.
pub fn compile(ast: &PatternAst) -> Matcher {
    Matcher::compile(ast)
}

impl fmt::Display for PatternAst {
    /// Pretty-print back to DSL syntax. ASTs produced by [`parse_pattern`]
    /// round-trip to a structurally identical tree; repeat bounds not
    /// expressible as `?`/`*`/`+` are expanded into copies.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternAst::Literal(tag) => write!(f, "{{{}}}", tag.name()),
            PatternAst::Wildcard => write!(f, "{{.*}}"),
            PatternAst::Concat(parts) => {
                for part in parts {
                    match part {
                        PatternAst::Literal(_) | PatternAst::Wildcard | PatternAst::Repeat(..) => {
                            write!(f, "{part}")?
                        }
                        _ => write!(f, "({part})")?,
                    }
                }
                Ok(())
            }
            PatternAst::Alternation(branches) => {
                for (i, branch) in branches.iter().enumerate() {
                    if i > 0 {
                        write!(f, "|")?;
                    }
                    match branch {
                        PatternAst::Alternation(_) => write!(f, "({branch})")?,
                        _ => write!(f, "{branch}")?,
                    }
                }
                Ok(())
            }
            PatternAst::Repeat(child, min, max) => {
                let atom = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
                    match child.as_ref() {
                        PatternAst::Literal(_) | PatternAst::Wildcard => write!(f, "{child}"),
                        _ => write!(f, "({child})"),
                    }
                };
                match (min, max) {
                    (0, Some(1)) => {
                        atom(f)?;
                        write!(f, "?")
                    }
                    (0, None) => {
                        atom(f)?;
                        write!(f, "*")
                    }
                    (1, None) => {
                        atom(f)?;
                        write!(f, "+")
                    }
                    (min, max) => {
                        // Outside DSL quantifiers: expand into copies.
                        for _ in 0..*min {
                            atom(f)?;
                        }
                        match max {
                            None => {
                                atom(f)?;
                                write!(f, "*")?;
                            }
                            Some(max) => {
                                for _ in *min..*max {
                                    atom(f)?;
                                    write!(f, "?")?;
                                }
                            }
                        }
                        Ok(())
                    }
                }
            }
        }
    }
}
