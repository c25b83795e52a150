//! The presentation file format.
//!
//! Line oriented, UTF-8, LF line endings:
//!
//! ```text
//! # anything after '#' is a comment
//! gens 2
//! rel abAB
//! rel BBBa
//! ```
//!
//! The first directive must be `gens <m>`, each following `rel <word>` adds
//! one relator (alphabetic or numeric word syntax), blank lines are ignored.
//! Writing is canonical — `gens` header, one `rel` per line, no comments —
//! so write(read(write(p))) is byte-identical to write(p).

use crate::sampler::{Presentation, PresentationError};
use crate::words::Word;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PresFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: relator {index} ({word}) rejected: {reason}")]
    BadRelator {
        line: usize,
        index: usize,
        word: String,
        reason: String,
    },
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

pub fn parse_presentation(text: &str) -> Result<Presentation, PresFileError> {
    let mut m: Option<u32> = None;
    let mut relators: Vec<Word> = Vec::new();
    let mut relator_lines: Vec<usize> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(h) => &raw_line[..h],
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col = line.find(|c: char| !c.is_whitespace()).unwrap_or(0) + 1;
        let (keyword, rest) = match trimmed.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (trimmed, ""),
        };
        match keyword {
            "gens" => {
                if m.is_some() {
                    return Err(PresFileError::Syntax {
                        line: line_no,
                        col,
                        msg: "duplicate 'gens' directive".into(),
                    });
                }
                let value: u32 = rest.parse().map_err(|_| PresFileError::Syntax {
                    line: line_no,
                    col: col + 5,
                    msg: format!("expected a generator count, found {rest:?}"),
                })?;
                if value == 0 {
                    return Err(PresFileError::Syntax {
                        line: line_no,
                        col: col + 5,
                        msg: "generator count must be at least 1".into(),
                    });
                }
                m = Some(value);
            }
            "rel" => {
                if m.is_none() {
                    return Err(PresFileError::Syntax {
                        line: line_no,
                        col,
                        msg: "'rel' before 'gens'".into(),
                    });
                }
                if rest.is_empty() {
                    return Err(PresFileError::Syntax {
                        line: line_no,
                        col: col + 4,
                        msg: "'rel' requires a word".into(),
                    });
                }
                let word: Word = rest.parse().map_err(|e: crate::words::WordError| {
                    let offset = match e {
                        crate::words::WordError::Syntax { pos, .. } => pos,
                        _ => 0,
                    };
                    PresFileError::Syntax {
                        line: line_no,
                        col: col + 4 + offset,
                        msg: e.to_string(),
                    }
                })?;
                relators.push(word);
                relator_lines.push(line_no);
            }
            other => {
                return Err(PresFileError::Syntax {
                    line: line_no,
                    col,
                    msg: format!("unknown directive {other:?}"),
                });
            }
        }
    }
    let m = m.ok_or(PresFileError::Syntax {
        line: text.lines().count() + 1,
        col: 1,
        msg: "missing 'gens' directive".into(),
    })?;
    Presentation::new(m, relators).map_err(|e| match &e {
        PresentationError::EmptyRelator { index }
        | PresentationError::NotCyclicallyReduced { index, .. }
        | PresentationError::GeneratorOutOfRange { index, .. } => {
            let line = relator_lines.get(*index).copied().unwrap_or(0);
            let word = match &e {
                PresentationError::NotCyclicallyReduced { word, .. }
                | PresentationError::GeneratorOutOfRange { word, .. } => word.clone(),
                _ => String::new(),
            };
            PresFileError::BadRelator {
                line,
                index: *index,
                word,
                reason: e.to_string(),
            }
        }
        PresentationError::NoGenerators => PresFileError::Presentation(e),
    })
}

/// Canonical file bytes for a presentation.
pub fn format_presentation(p: &Presentation) -> String {
    let mut out = String::new();
    writeln!(out, "gens {}", p.generator_count()).expect("string write");
    for r in p.relators() {
        writeln!(out, "rel {r}").expect("string write");
    }
    out
}

pub fn read_presentation(path: impl AsRef<Path>) -> Result<Presentation, PresFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| PresFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_presentation(&text)
}

pub fn write_presentation(p: &Presentation, path: impl AsRef<Path>) -> Result<(), PresFileError> {
    let path = path.as_ref();
    std::fs::write(path, format_presentation(p)).map_err(|source| PresFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_basic_form() {
        let p = parse_presentation("gens 2\nrel abAB\n").unwrap();
        assert_eq!(p.generator_count(), 2);
        assert_eq!(p.relators().len(), 1);
        assert_eq!(p.relators()[0].to_string(), "abAB");
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# a sample\n\ngens 2  # two generators\nrel ab # fine\n";
        let p = parse_presentation(text).unwrap();
        assert_eq!(p.relators().len(), 1);
    }

    #[test]
    fn rejects_non_reduced_relator_by_name() {
        let err = parse_presentation("gens 2\nrel aA\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("aA"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn rejects_with_line_and_column() {
        let err = parse_presentation("gens 2\nrel ab?\n").unwrap_err();
        match err {
            PresFileError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert!(col > 4);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(parse_presentation("rel ab\n").is_err());
        assert!(parse_presentation("gens 2\nwat 3\n").is_err());
        assert!(parse_presentation("gens 2\nrel abc\n").is_err()); // c out of range
    }

    #[test]
    fn writes_canonical_bytes() {
        let p = Presentation::from_strs(2, &["abAB", "BBBa"]).unwrap();
        let text = format_presentation(&p);
        assert_eq!(text, "gens 2\nrel abAB\nrel BBBa\n");
        let q = parse_presentation(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(format_presentation(&q), text);
    }

    #[test]
    fn roundtrip_through_disk() {
        let dir = std::env::temp_dir().join("sc_core_presfile_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("g2.pres");
        let p = Presentation::from_strs(4, &["abABcdCD"]).unwrap();
        write_presentation(&p, &path).unwrap();
        let q = read_presentation(&path).unwrap();
        assert_eq!(p, q);
        let missing = read_presentation(dir.join("nope.pres"));
        assert!(matches!(missing, Err(PresFileError::Io { .. })));
    }
}
