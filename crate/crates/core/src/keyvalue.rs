//! Flat `key = value` text files with `#` comments.

use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Parses the file into entries in file order. Blank lines and `#` comments
/// are skipped; a line without `=`, an empty key or a repeated key is an error
/// naming the offending key or line.
pub fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(Error::config(
                format!("line {line}"),
                format!("expected `key = value`, found `{content}`"),
            ));
        };
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::config(format!("line {line}"), "empty key"));
        }
        if out.iter().any(|e| e.key == key) {
            return Err(Error::config(key, format!("duplicate key on line {line}")));
        }
        out.push(Entry {
            key: key.to_string(),
            value: v.trim().to_string(),
            line,
        });
    }
    Ok(out)
}

pub fn parse_value<T>(key: &str, value: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| Error::config(key, format!("invalid value `{value}`: {e}")))
}

pub fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::config(
            key,
            format!("expected a boolean, found `{value}`"),
        )),
    }
}

/// Two comma-separated numbers.
pub fn parse_pair(key: &str, value: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::config(
            key,
            format!("expected `a,b`, found `{value}`"),
        ));
    }
    Ok((parse_value(key, parts[0])?, parse_value(key, parts[1])?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let e = parse("# header\n\nk_c = 0.42  # trailing\nvariant=full\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].key, "k_c");
        assert_eq!(e[0].value, "0.42");
        assert_eq!(e[0].line, 3);
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn errors_name_the_problem() {
        let err = parse("k_c 0.4").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        let err = parse("a=1\na=2").unwrap_err().to_string();
        assert!(err.contains('a'), "{err}");
        let err = parse_value::<f64>("k_p", "abc").unwrap_err().to_string();
        assert!(err.contains("k_p"), "{err}");
        assert_eq!(parse_pair("size", "3, 4.5").unwrap(), (3.0, 4.5));
        assert!(parse_pair("size", "3").is_err());
        assert!(parse_bool("x", "maybe").is_err());
    }
}
