//! Plain-text codebook files.
//!
//! ```text
//! n=7 m=2
//! level 1 t=1
//! 0000000
//! level 2 t=3
//! 1111111
//! ```
//!
//! Lines are `\n`-terminated. Blank lines and lines starting with `#` are
//! ignored on input and never written, so a canonical file round-trips
//! byte for byte.

use std::fmt::Write as _;

use crate::codebook::LayeredCodebook;
use crate::codeword::Codeword;
use crate::error::{Error, Result};

/// The shipped 45-bit, six-level codebook built from
/// [`ConstructionConfig::reference`](crate::construct::ConstructionConfig::reference).
pub const REFERENCE_CODEBOOK: &str = include_str!("../data/reference.codebook");

pub fn reference_codebook() -> LayeredCodebook {
    parse_codebook(REFERENCE_CODEBOOK).expect("shipped codebook parses")
}

pub fn write_codebook(cb: &LayeredCodebook) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n={} m={}", cb.blocklength(), cb.levels());
    for spec in cb.level_specs() {
        let _ = writeln!(out, "level {} t={}", spec.level, spec.target_t);
        for w in cb.group(spec.level) {
            let _ = writeln!(out, "{w}");
        }
    }
    out
}

fn parse_kv(token: &str, key: &str, line: usize) -> Result<usize> {
    let value = token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| Error::parse(line, format!("expected `{key}=<value>`, found `{token}`")))?;
    value
        .parse()
        .map_err(|_| Error::parse(line, format!("`{value}` is not a non-negative integer")))
}

pub fn parse_codebook(text: &str) -> Result<LayeredCodebook> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty codebook file"))?;
    let mut tokens = header.split_whitespace();
    let (Some(n_tok), Some(m_tok), None) = (tokens.next(), tokens.next(), tokens.next()) else {
        return Err(Error::parse(line_no, "header must be `n=<blocklength> m=<levels>`"));
    };
    let n = parse_kv(n_tok, "n", line_no)?;
    let m = parse_kv(m_tok, "m", line_no)?;
    if n == 0 || n > crate::codeword::MAX_BLOCKLENGTH {
        return Err(Error::parse(line_no, format!("unsupported blocklength {n}")));
    }
    if m == 0 {
        return Err(Error::parse(line_no, "a codebook needs at least one level"));
    }

    let mut levels: Vec<(usize, Vec<Codeword>)> = Vec::with_capacity(m);
    for (line_no, line) in lines {
        if let Some(rest) = line.strip_prefix("level ") {
            let mut tokens = rest.split_whitespace();
            let (Some(x_tok), Some(t_tok), None) = (tokens.next(), tokens.next(), tokens.next())
            else {
                return Err(Error::parse(line_no, "level line must be `level <x> t=<t>`"));
            };
            let x: usize = x_tok
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad level index `{x_tok}`")))?;
            if x != levels.len() + 1 {
                return Err(Error::parse(
                    line_no,
                    format!("expected level {}, found level {x}", levels.len() + 1),
                ));
            }
            if x > m {
                return Err(Error::parse(line_no, format!("level {x} exceeds m={m}")));
            }
            if let Some((_, prev)) = levels.last() {
                if prev.is_empty() {
                    return Err(Error::parse(line_no, format!("level {} has no codewords", x - 1)));
                }
            }
            levels.push((parse_kv(t_tok, "t", line_no)?, Vec::new()));
        } else {
            let Some((_, group)) = levels.last_mut() else {
                return Err(Error::parse(line_no, "codeword before the first `level` line"));
            };
            if line.len() != n {
                return Err(Error::parse(
                    line_no,
                    format!("codeword has {} symbols, expected n={n}", line.len()),
                ));
            }
            let word: Codeword = line.parse().map_err(|e| Error::parse(line_no, format!("{e}")))?;
            group.push(word);
        }
    }
    if levels.len() != m {
        return Err(Error::parse(
            text.lines().count().max(1),
            format!("header declares m={m} levels but {} were found", levels.len()),
        ));
    }
    if levels.last().is_some_and(|(_, g)| g.is_empty()) {
        return Err(Error::parse(text.lines().count(), format!("level {m} has no codewords")));
    }
    LayeredCodebook::new(n, levels)
}
