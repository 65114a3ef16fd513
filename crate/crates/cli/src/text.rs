//! The structured-text document format used for certificates, reports and
//! manifests: `key: value` lines, nested by two-space indentation. A key with
//! nothing after the colon opens a section.

use std::fmt::Write;

use anyhow::{anyhow, bail, Context, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Scalar(String),
    Section(Doc),
}

/// An ordered list of entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Doc {
    entries: Vec<(String, Node)>,
}

/// Shortest text that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn check_key(key: &str) {
    assert!(!key.is_empty() && !key.contains(':') && key.trim() == key, "bad key {key:?}");
}

impl Doc {
    pub fn new() -> Self {
        Self::default()
    }

    /// A document carrying the format version and its kind.
    pub fn versioned(kind: &str) -> Self {
        let mut d = Self::new();
        d.put("format_version", FORMAT_VERSION.to_string());
        d.put("kind", kind);
        d
    }

    pub fn put(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        check_key(key);
        let v: String = value.into();
        assert!(!v.contains('\n'), "multi-line value for {key}");
        self.entries.push((key.to_string(), Node::Scalar(v)));
        self
    }

    pub fn num(&mut self, key: &str, x: f64) -> &mut Self {
        self.put(key, num(x))
    }

    pub fn flag(&mut self, key: &str, b: bool) -> &mut Self {
        self.put(key, b.to_string())
    }

    pub fn section(&mut self, key: &str, doc: Doc) -> &mut Self {
        check_key(key);
        self.entries.push((key.to_string(), Node::Section(doc)));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Node> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn text(&self, key: &str) -> Result<&str> {
        match self.get(key) {
            Some(Node::Scalar(s)) => Ok(s),
            Some(Node::Section(_)) => bail!("`{key}` is a section, expected a value"),
            None => bail!("missing key `{key}`"),
        }
    }

    pub fn sub(&self, key: &str) -> Result<&Doc> {
        match self.get(key) {
            Some(Node::Section(d)) => Ok(d),
            Some(Node::Scalar(_)) => bail!("`{key}` is a value, expected a section"),
            None => bail!("missing section `{key}`"),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let s = self.text(key)?;
        s.parse().with_context(|| format!("`{key}`: {s:?} is not a number"))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let s = self.text(key)?;
        s.parse().with_context(|| format!("`{key}`: {s:?} is not a count"))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        let s = self.text(key)?;
        s.parse().with_context(|| format!("`{key}`: {s:?} is not true/false"))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        for (k, v) in &self.entries {
            let pad = "  ".repeat(depth);
            match v {
                Node::Scalar(s) if s.is_empty() => writeln!(out, "{pad}{k}:").unwrap(),
                Node::Scalar(s) => writeln!(out, "{pad}{k}: {s}").unwrap(),
                Node::Section(d) => {
                    writeln!(out, "{pad}{k}:").unwrap();
                    d.render_into(out, depth + 1);
                }
            }
        }
    }

    /// Parse a rendered document. An empty section and an empty value are
    /// indistinguishable on disk; both read back as an empty section.
    pub fn parse(text: &str) -> Result<Doc> {
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let indent = raw.len() - raw.trim_start_matches(' ').len();
            if indent % 2 != 0 {
                bail!("line {}: indentation must be a multiple of two spaces", i + 1);
            }
            let body = &raw[indent..];
            let (k, v) = body.split_once(':').ok_or_else(|| anyhow!("line {}: expected `key: value`", i + 1))?;
            lines.push((i + 1, indent / 2, k.trim().to_string(), v.trim().to_string()));
        }
        let mut pos = 0;
        let doc = parse_level(&lines, &mut pos, 0)?;
        if let Some((line, ..)) = lines.get(pos) {
            bail!("line {line}: unexpected indentation");
        }
        Ok(doc)
    }
}

fn parse_level(lines: &[(usize, usize, String, String)], pos: &mut usize, depth: usize) -> Result<Doc> {
    let mut doc = Doc::new();
    while let Some((line, d, k, v)) = lines.get(*pos) {
        if *d < depth {
            break;
        }
        if *d > depth {
            bail!("line {line}: unexpected indentation");
        }
        *pos += 1;
        let opens = v.is_empty();
        let node = if opens && lines.get(*pos).is_some_and(|n| n.1 > depth) {
            Node::Section(parse_level(lines, pos, depth + 1)?)
        } else if opens {
            Node::Section(Doc::new())
        } else {
            Node::Scalar(v.clone())
        };
        doc.entries.push((k.clone(), node));
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -3.3765127421602346, 1e-12, 6.02e23, f64::INFINITY, 1.0 / 3.0, 123456.789, -2.5e-300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert!(num(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn nested_round_trip() {
        let mut inner = Doc::new();
        inner.num("a", 0.5).flag("ok", true);
        let mut d = Doc::versioned("test");
        d.section("inner", inner).put("name", "x y");
        let back = Doc::parse(&d.render()).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.sub("inner").unwrap().f64("a").unwrap(), 0.5);
        assert_eq!(back.usize("format_version").unwrap(), 1);
    }

    #[test]
    fn bad_indentation_is_reported_with_line() {
        let e = Doc::parse("a: 1\n   b: 2\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = Doc::parse("a: 1\n  b: 2\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }
}
