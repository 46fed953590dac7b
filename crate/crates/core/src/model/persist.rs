//! Line-oriented pattern-set format:
//!
//! ```text
//! q=3 n=4 p=2
//! +1 -3 +2 +1
//! -2 -2 +3 +1
//! ```
//!
//! Tokens are `<sign><freq>` with a one-based frequency.

use std::fmt::Write as _;
use std::path::Path;

use super::{Pattern, SpinState};
use crate::error::{Error, Result};

pub fn write_patterns(patterns: &[Pattern]) -> Result<String> {
    let first = patterns
        .first()
        .ok_or_else(|| Error::invalid("cannot write an empty pattern set"))?;
    let (q, n) = (first.q(), first.len());
    if patterns.iter().any(|p| p.q() != q || p.len() != n) {
        return Err(Error::invalid("patterns differ in shape"));
    }
    let mut out = format!("q={q} n={n} p={}\n", patterns.len());
    for p in patterns {
        writeln!(out, "{p}").expect("writing to a String");
    }
    Ok(out)
}

fn header_field(token: Option<&str>, key: &str) -> Result<usize> {
    let err = |message: String| Error::Parse { line: 1, message };
    let token = token.ok_or_else(|| err(format!("missing `{key}=` in header")))?;
    let value = token
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| err(format!("expected `{key}=<value>`, found `{token}`")))?;
    value
        .parse()
        .map_err(|_| err(format!("bad value for {key}: `{value}`")))
}

fn parse_token(token: &str, q: usize, line: usize) -> Result<SpinState> {
    let err = |message: String| Error::Parse { line, message };
    let (sign, digits) = match token.as_bytes().first() {
        Some(b'+') => (1, &token[1..]),
        Some(b'-') => (-1, &token[1..]),
        _ => return Err(err(format!("token `{token}` must start with + or -"))),
    };
    let freq: usize = digits
        .parse()
        .map_err(|_| err(format!("bad frequency in token `{token}`")))?;
    if freq == 0 || freq > q {
        return Err(err(format!("frequency {freq} outside 1..={q}")));
    }
    Ok(SpinState::new(sign, freq - 1).expect("sign is ±1"))
}

pub fn parse_patterns(text: &str) -> Result<Vec<Pattern>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let mut fields = header.split_whitespace();
    let q = header_field(fields.next(), "q")?;
    let n = header_field(fields.next(), "n")?;
    let p = header_field(fields.next(), "p")?;
    if q == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "q must be at least 1".into(),
        });
    }
    let mut patterns = Vec::with_capacity(p);
    for (line, body) in lines {
        let states = body
            .split_whitespace()
            .map(|t| parse_token(t, q, line))
            .collect::<Result<Vec<_>>>()?;
        if states.len() != n {
            return Err(Error::Parse {
                line,
                message: format!("expected {n} tokens, found {}", states.len()),
            });
        }
        patterns.push(Pattern::new(q, states)?);
    }
    if patterns.len() != p {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "header declares p={p} but {} patterns follow",
                patterns.len()
            ),
        });
    }
    Ok(patterns)
}

pub fn save_patterns(path: &Path, patterns: &[Pattern]) -> Result<()> {
    let text = write_patterns(patterns)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_patterns(path: &Path) -> Result<Vec<Pattern>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_patterns(&text)
}
