//! Flat `key = value` text, `#` comments, blank lines separating blocks.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, ParseError, ParseErrorKind, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// One block of entries, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Block {
    pub entries: Vec<Entry>,
}

impl Block {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.key == key)
            .map(|e| e.value.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::InvalidParameter(format!("missing key '{key}'")))
    }

    pub fn first_line(&self) -> usize {
        self.entries.first().map_or(0, |e| e.line)
    }
}

fn syntax(line: usize, message: String) -> Error {
    Error::Parse(ParseError {
        kind: ParseErrorKind::Syntax,
        line,
        column: 1,
        message,
    })
}

/// Splits `text` into blocks; duplicate keys within a block are rejected.
pub fn parse_blocks(text: &str) -> Result<Vec<Block>> {
    let mut blocks = Vec::new();
    let mut current = Block::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            // A comment-only line does not end a block.
            if raw.trim().is_empty() && !current.entries.is_empty() {
                blocks.push(core::mem::take(&mut current));
            }
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected 'key = value', found '{content}'")))?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(syntax(line, format!("malformed key '{key}'")));
        }
        if current.get(key).is_some() {
            return Err(syntax(line, format!("duplicate key '{key}'")));
        }
        current.entries.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    if !current.entries.is_empty() {
        blocks.push(current);
    }
    Ok(blocks)
}

/// Parses the whole text as a single block, ignoring blank lines.
pub fn parse_flat(text: &str) -> Result<Block> {
    let mut merged = Block::default();
    for block in parse_blocks(text)? {
        for e in block.entries {
            if merged.get(&e.key).is_some() {
                return Err(syntax(e.line, format!("duplicate key '{}'", e.key)));
            }
            merged.entries.push(e);
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_and_comments() {
        let text = "# head\na = 1\nb=two words # note\n\n\nc = 3\n# mid\nd = 4\n";
        let blocks = parse_blocks(text).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].get("b"), Some("two words"));
        assert_eq!(blocks[1].get("d"), Some("4"));
        assert_eq!(blocks[1].first_line(), 6);
        assert_eq!(parse_flat(text).unwrap().entries.len(), 4);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_blocks("a 1").is_err());
        assert!(parse_blocks("a = 1\na = 2").is_err());
        assert!(parse_flat("a = 1\n\na = 2").is_err());
        assert!(parse_blocks("bad key = 1").is_err());
    }
}
