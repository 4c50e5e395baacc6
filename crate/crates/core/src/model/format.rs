//! Flat text model files.
//!
//! ```text
//! hybridssl-model v1 K=<K> M=<M>
//! pi
//! <K values>
//! theta_tilde
//! <K lines of M values>
//! b
//! <K values>
//! w
//! <K lines of M values>
//! ```
//!
//! Values are written with 17 significant digits so reading a file back
//! reproduces every parameter bit for bit. Line breaks inside a section are
//! cosmetic; the reader consumes whitespace-separated tokens.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::{DiscriminativeParams, GenerativeParams};

pub const MODEL_MAGIC: &str = "hybridssl-model";
pub const MODEL_VERSION: &str = "v1";

/// Trained generative and discriminative halves, as persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    pub gen: GenerativeParams,
    pub disc: DiscriminativeParams,
}

impl HybridModel {
    pub fn new(gen: GenerativeParams, disc: DiscriminativeParams) -> Result<Self> {
        if gen.num_classes() != disc.num_classes() || gen.num_features() != disc.num_features() {
            return Err(Error::Config(
                "generative and discriminative shapes differ".into(),
            ));
        }
        Ok(HybridModel { gen, disc })
    }

    pub fn num_classes(&self) -> usize {
        self.gen.num_classes()
    }

    pub fn num_features(&self) -> usize {
        self.gen.num_features()
    }

    pub fn to_text(&self) -> String {
        let k = self.num_classes();
        let m = self.num_features();
        let mut out = String::new();
        writeln!(out, "{MODEL_MAGIC} {MODEL_VERSION} K={k} M={m}").unwrap();
        out.push_str("pi\n");
        push_row(&mut out, self.gen.pi());
        out.push_str("theta_tilde\n");
        for y in 0..k {
            push_row(&mut out, self.gen.theta_tilde_row(y));
        }
        out.push_str("b\n");
        push_row(&mut out, self.disc.b());
        out.push_str("w\n");
        for y in 0..k {
            push_row(&mut out, self.disc.w_row(y));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, 1, "empty model file"))?;
        let (k, m) = parse_header(header)?;
        let mut tokens = lines
            .enumerate()
            .flat_map(|(i, line)| line.split_whitespace().map(move |t| (i + 2, t)));
        let mut section = |name: &str, count: usize| -> Result<Vec<f64>> {
            match tokens.next() {
                Some((_, t)) if t == name => {}
                Some((line, t)) => {
                    return Err(parse_err(
                        line,
                        1,
                        &format!("expected section `{name}`, found `{t}`"),
                    ))
                }
                None => return Err(parse_err(0, 0, &format!("missing section `{name}`"))),
            }
            (0..count)
                .map(|_| {
                    let (line, t) = tokens
                        .next()
                        .ok_or_else(|| parse_err(0, 0, &format!("section `{name}` truncated")))?;
                    t.parse::<f64>().map_err(|_| {
                        parse_err(
                            line,
                            1,
                            &format!("invalid number `{t}` in section `{name}`"),
                        )
                    })
                })
                .collect()
        };
        let pi = section("pi", k)?;
        let theta_tilde = section("theta_tilde", k * m)?;
        let b = section("b", k)?;
        let w = section("w", k * m)?;
        if let Some((line, t)) = tokens.next() {
            return Err(parse_err(line, 1, &format!("trailing token `{t}`")));
        }
        HybridModel::new(
            GenerativeParams::new(k, m, pi, theta_tilde)?,
            DiscriminativeParams::new(k, m, b, w)?,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v:.16e}").unwrap();
    }
    out.push('\n');
}

fn parse_err(line: usize, column: usize, message: &str) -> Error {
    Error::Parse {
        line,
        column,
        message: message.to_string(),
    }
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != MODEL_MAGIC {
        return Err(parse_err(
            1,
            1,
            &format!("expected `{MODEL_MAGIC} {MODEL_VERSION} K=<K> M=<M>`"),
        ));
    }
    if parts[1] != MODEL_VERSION {
        return Err(parse_err(
            1,
            header.find(parts[1]).unwrap_or(0) + 1,
            &format!("unsupported version `{}`", parts[1]),
        ));
    }
    let field = |tok: &str, key: &str| -> Result<usize> {
        tok.strip_prefix(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| {
                parse_err(
                    1,
                    header.find(tok).unwrap_or(0) + 1,
                    &format!("expected `{key}<int>`, found `{tok}`"),
                )
            })
    };
    Ok((field(parts[2], "K=")?, field(parts[3], "M=")?))
}
