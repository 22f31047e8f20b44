//! Line-oriented `key = value` text with optional `[section arg]` headers.
//! `#` and `;` start comments; blank lines are ignored.

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub line: usize,
    /// Empty for the entries before the first header.
    pub name: String,
    pub arg: Option<String>,
    pub entries: Vec<Entry>,
}

pub fn parse(text: &str) -> Result<Vec<Section>, ParseError> {
    let mut sections = vec![Section {
        line: 0,
        name: String::new(),
        arg: None,
        entries: Vec::new(),
    }];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| ParseError::new(line, "unterminated section header"))?
                .trim();
            let mut parts = inner.splitn(2, char::is_whitespace);
            let name = parts.next().unwrap_or("").to_string();
            if name.is_empty() {
                return Err(ParseError::new(line, "empty section name"));
            }
            let arg = parts.next().map(|a| a.trim().to_string()).filter(|a| !a.is_empty());
            sections.push(Section {
                line,
                name,
                arg,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ParseError::new(line, format!("expected `key = value`, found `{content}`")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ParseError::new(line, "empty key"));
        }
        sections.last_mut().expect("root section").entries.push(Entry {
            line,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(sections)
}

pub fn parse_bool(e: &Entry) -> Result<bool, ParseError> {
    match e.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ParseError::new(e.line, format!("`{}` expects true or false, found `{}`", e.key, e.value))),
    }
}

pub fn parse_num<T: std::str::FromStr>(e: &Entry) -> Result<T, ParseError> {
    e.value
        .parse()
        .map_err(|_| ParseError::new(e.line, format!("`{}`: cannot parse `{}`", e.key, e.value)))
}

/// Comma-separated list of numbers.
pub fn parse_list<T: std::str::FromStr>(e: &Entry) -> Result<Vec<T>, ParseError> {
    let items: Result<Vec<T>, _> = e
        .value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| ParseError::new(e.line, format!("`{}`: cannot parse `{}`", e.key, s.trim())))
        })
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(ParseError::new(e.line, format!("`{}` is empty", e.key)));
    }
    Ok(items)
}
