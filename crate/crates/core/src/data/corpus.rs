//! Text corpus format.
//!
//! ```text
//! # hybridssl-corpus v1 K=2 M=20
//! 1 3:1 17:1
//! * 2:1
//! ```
//!
//! The header comes first. Each following line holds a label (a class id in
//! `[0, K)`, or `*` for unlabeled) and the strictly increasing ids of the
//! features present. Other lines starting with `#` are comments; blank lines
//! are skipped.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Dataset, Instance, SparseBinaryVector};

pub const CORPUS_MAGIC: &str = "hybridssl-corpus";
pub const CORPUS_VERSION: &str = "v1";

/// Feature id to token.
pub type Vocabulary = BTreeMap<u32, String>;

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with their 1-based byte columns.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = line;
    let mut offset = 0;
    std::iter::from_fn(move || {
        let start = rest.find(|c: char| !c.is_whitespace())?;
        let tail = &rest[start..];
        let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
        let tok = &tail[..len];
        let col = offset + start + 1;
        offset += start + len;
        rest = &tail[len..];
        Some((col, tok))
    })
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let toks: Vec<_> = tokens(line).collect();
    let expect = format!("expected header `# {CORPUS_MAGIC} {CORPUS_VERSION} K=<int> M=<int>`");
    if toks.len() != 5 || toks[0].1 != "#" || toks[1].1 != CORPUS_MAGIC {
        return Err(parse_err(1, 1, expect));
    }
    if toks[2].1 != CORPUS_VERSION {
        return Err(parse_err(
            1,
            toks[2].0,
            format!("unsupported corpus version `{}`", toks[2].1),
        ));
    }
    let field = |(col, tok): (usize, &str), key: &str| -> Result<usize> {
        tok.strip_prefix(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| parse_err(1, col, format!("expected `{key}<int>`, found `{tok}`")))
    };
    Ok((field(toks[3], "K=")?, field(toks[4], "M=")?))
}

fn parse_instance(line: &str, lineno: usize, k: usize, m: usize) -> Result<Instance> {
    let mut toks = tokens(line);
    let (col, label_tok) = toks
        .next()
        .ok_or_else(|| parse_err(lineno, 1, "empty instance line"))?;
    let label = if label_tok == "*" {
        None
    } else {
        match label_tok.parse::<usize>() {
            Ok(y) if y < k => Some(y),
            Ok(y) => {
                return Err(parse_err(
                    lineno,
                    col,
                    format!("label {y} out of range for K={k}"),
                ))
            }
            Err(_) => {
                return Err(parse_err(
                    lineno,
                    col,
                    format!("expected a class id or `*`, found `{label_tok}`"),
                ))
            }
        }
    };
    let mut indices: Vec<u32> = Vec::new();
    for (col, tok) in toks {
        let (id_str, val) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(lineno, col, format!("expected `<id>:1`, found `{tok}`")))?;
        let id: u32 = id_str
            .parse()
            .map_err(|_| parse_err(lineno, col, format!("invalid feature id `{id_str}`")))?;
        if val != "1" {
            return Err(parse_err(
                lineno,
                col + id_str.len() + 1,
                format!("feature value must be 1, found `{val}`"),
            ));
        }
        if id as usize >= m {
            return Err(Error::Bounds {
                line: lineno,
                id: id as usize,
                num_features: m,
            });
        }
        if let Some(&last) = indices.last() {
            if id == last {
                return Err(parse_err(lineno, col, format!("duplicate feature id {id}")));
            }
            if id < last {
                return Err(parse_err(
                    lineno,
                    col,
                    format!("feature id {id} after {last}; ids must increase"),
                ));
            }
        }
        indices.push(id);
    }
    let x = SparseBinaryVector::new(indices, m)?;
    Ok(Instance { features: x, label })
}

/// Parses corpus text. `m_override` replaces the declared feature count.
pub fn parse_corpus(text: &str, m_override: Option<usize>) -> Result<Dataset> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty corpus"))?;
    let (k, declared_m) = parse_header(header)?;
    let m = m_override.unwrap_or(declared_m);
    if k < 2 || m < 1 {
        return Err(parse_err(
            1,
            1,
            format!("header needs K >= 2 and M >= 1, got K={k} M={m}"),
        ));
    }
    let mut instances = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        instances.push(parse_instance(line, lineno, k, m)?);
    }
    Dataset::new(instances, k, m)
}

pub fn load_corpus(path: &Path, m_override: Option<usize>) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, m_override)
}

pub fn corpus_to_string(data: &Dataset) -> String {
    let mut out = format!(
        "# {CORPUS_MAGIC} {CORPUS_VERSION} K={} M={}\n",
        data.num_classes(),
        data.num_features()
    );
    for inst in data.instances() {
        match inst.label {
            Some(y) => write!(out, "{y}").unwrap(),
            None => out.push('*'),
        }
        for id in inst.features.indices() {
            write!(out, " {id}:1").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_corpus(path: &Path, data: &Dataset) -> Result<()> {
    std::fs::write(path, corpus_to_string(data)).map_err(|e| Error::io(path, e))
}

/// Parses a vocabulary sidecar of `<id>\t<token>` lines.
pub fn parse_vocabulary(text: &str, num_features: usize) -> Result<Vocabulary> {
    let mut vocab = Vocabulary::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let (id_str, token) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(lineno, 1, "expected `<id>\\t<token>`"))?;
        let id: u32 = id_str
            .parse()
            .map_err(|_| parse_err(lineno, 1, format!("invalid feature id `{id_str}`")))?;
        if id as usize >= num_features {
            return Err(Error::Bounds {
                line: lineno,
                id: id as usize,
                num_features,
            });
        }
        if token.is_empty() {
            return Err(parse_err(lineno, id_str.len() + 2, "empty token"));
        }
        if vocab.insert(id, token.to_string()).is_some() {
            return Err(parse_err(lineno, 1, format!("duplicate feature id {id}")));
        }
    }
    Ok(vocab)
}

pub fn load_vocabulary(path: &Path, num_features: usize) -> Result<Vocabulary> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vocabulary(&text, num_features)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "# hybridssl-corpus v1 K=2 M=20\n";

    fn parse(body: &str) -> Result<Dataset> {
        parse_corpus(&format!("{HEAD}{body}"), None)
    }

    fn parse_error_at(body: &str) -> (usize, usize) {
        match parse(body) {
            Err(Error::Parse { line, column, .. }) => (line, column),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn grammar_examples() {
        let d = parse("1 3:1 17:1\n* 2:1\n").unwrap();
        assert_eq!(d.instances()[0].label, Some(1));
        assert_eq!(d.instances()[0].features.indices(), &[3, 17]);
        assert_eq!(d.instances()[1].label, None);
        assert_eq!(d.instances()[1].features.indices(), &[2]);
    }

    #[test]
    fn comments_blanks_and_empty_documents() {
        let d = parse("# note\n\n0\n  # indented note\n1\t4:1\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.instances()[0].features.nnz(), 0);
    }

    #[test]
    fn error_positions() {
        assert_eq!(parse_error_at("1 3:1 3:1\n"), (2, 7));
        assert_eq!(parse_error_at("1 5:1 3:1\n"), (2, 7));
        assert_eq!(parse_error_at("0 1:1\n1 3:2\n"), (3, 5));
        assert_eq!(parse_error_at("2 3:1\n"), (2, 1));
        assert_eq!(parse_error_at("x 3:1\n"), (2, 1));
        assert_eq!(parse_error_at("0  3\n"), (2, 4));
        assert_eq!(parse_error_at("0 a:1\n"), (2, 3));
        assert!(matches!(
            parse("0 20:1\n"),
            Err(Error::Bounds {
                line: 2,
                id: 20,
                num_features: 20
            })
        ));
    }

    #[test]
    fn header_is_checked() {
        for bad in [
            "",
            "0 1:1\n",
            "# hybridssl-corpus v2 K=2 M=3\n",
            "# hybridssl-corpus v1 K=x M=3\n",
            "# hybridssl-corpus v1 K=1 M=3\n",
        ] {
            assert!(
                matches!(parse_corpus(bad, None), Err(Error::Parse { line: 1, .. })),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn m_override() {
        let text = format!("{HEAD}0 15:1\n");
        assert_eq!(parse_corpus(&text, Some(40)).unwrap().num_features(), 40);
        assert!(matches!(
            parse_corpus(&text, Some(10)),
            Err(Error::Bounds { .. })
        ));
    }

    #[test]
    fn vocabulary() {
        let v = parse_vocabulary("0\tgood\n3\tbad\n", 4).unwrap();
        assert_eq!(v[&3], "bad");
        assert!(matches!(
            parse_vocabulary("4\tx\n", 4),
            Err(Error::Bounds { .. })
        ));
        assert!(matches!(
            parse_vocabulary("0\tx\n0\ty\n", 4),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_vocabulary("0 x\n", 4),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
