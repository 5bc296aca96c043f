use std::fmt;

use serde::Serialize;

use crate::index::FieldPrefix;

/// One conjunct of a query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Clause {
    Term { prefix: FieldPrefix, text: String },
    Phrase { prefix: FieldPrefix, texts: Vec<String> },
}

impl Clause {
    pub fn term(prefix: FieldPrefix, text: impl Into<String>) -> Self {
        Clause::Term { prefix, text: text.into() }
    }

    pub fn phrase<S: Into<String>>(prefix: FieldPrefix, texts: impl IntoIterator<Item = S>) -> Self {
        Clause::Phrase {
            prefix,
            texts: texts.into_iter().map(Into::into).collect(),
        }
    }

    pub fn prefix(&self) -> FieldPrefix {
        match self {
            Clause::Term { prefix, .. } | Clause::Phrase { prefix, .. } => *prefix,
        }
    }

    /// The clause text as analysis sees it; phrase words joined by spaces.
    pub fn text(&self) -> String {
        match self {
            Clause::Term { text, .. } => text.clone(),
            Clause::Phrase { texts, .. } => texts.join(" "),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.prefix() {
            FieldPrefix::All => String::new(),
            p => format!("{p}:"),
        };
        match self {
            Clause::Term { text, .. } => write!(f, "{prefix}{text}"),
            Clause::Phrase { texts, .. } => write!(f, "{prefix}\"{}\"", texts.join(" ")),
        }
    }
}

/// A parsed query: the conjunction of its clauses, plus notes about input
/// that was interpreted leniently.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryAst {
    pub clauses: Vec<Clause>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("query is empty")]
    Empty,
    #[error("unterminated quote starting at column {}", .column)]
    UnterminatedQuote { column: usize },
}

impl QueryError {
    /// Stable machine-readable name.
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::Empty => "empty_query",
            QueryError::UnterminatedQuote { .. } => "unterminated_quote",
        }
    }
}

/// Parses the query language.
///
/// ```text
/// query  := item (ws item)*
/// item   := prefix ':' (word | '"' chars '"') | '"' chars '"' | word
/// ```
///
/// A prefix must be a known field name (any case). `foo:bar` with an unknown
/// prefix is kept as the literal term `foo:bar` under `all`. Everything after
/// the first colon is the value, so `tag:graphs:directed` scopes
/// `graphs:directed` to `tag`.
pub fn parse_query(q: &str) -> Result<QueryAst, QueryError> {
    let chars: Vec<(usize, char)> = q.char_indices().collect();
    let mut clauses = Vec::new();
    let mut diagnostics = Vec::new();
    let mut i = 0;

    let read_quoted = |start: usize| -> Result<(String, usize), QueryError> {
        // start is the index of the opening quote
        let mut j = start + 1;
        while j < chars.len() && chars[j].1 != '"' {
            j += 1;
        }
        if j >= chars.len() {
            return Err(QueryError::UnterminatedQuote { column: start + 1 });
        }
        let text: String = chars[start + 1..j].iter().map(|c| c.1).collect();
        Ok((text, j + 1))
    };
    let push_phrase = |prefix: FieldPrefix, body: &str, clauses: &mut Vec<Clause>, diagnostics: &mut Vec<String>| {
        let words: Vec<&str> = body.split_whitespace().collect();
        if words.is_empty() {
            diagnostics.push(format!("empty phrase for `{prefix}` ignored"));
        } else {
            clauses.push(Clause::phrase(prefix, words));
        }
    };

    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '"' {
            let (body, next) = read_quoted(i)?;
            push_phrase(FieldPrefix::All, &body, &mut clauses, &mut diagnostics);
            i = next;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].1.is_whitespace() && chars[i].1 != ':' {
            i += 1;
        }
        let head: String = chars[start..i].iter().map(|c| c.1).collect();
        let prefix = (i < chars.len() && chars[i].1 == ':').then(|| FieldPrefix::from_name(&head)).flatten();
        match prefix {
            Some(prefix) => {
                i += 1;
                if i < chars.len() && chars[i].1 == '"' {
                    let (body, next) = read_quoted(i)?;
                    push_phrase(prefix, &body, &mut clauses, &mut diagnostics);
                    i = next;
                } else {
                    let vstart = i;
                    while i < chars.len() && !chars[i].1.is_whitespace() {
                        i += 1;
                    }
                    let value: String = chars[vstart..i].iter().map(|c| c.1).collect();
                    if value.is_empty() {
                        diagnostics.push(format!("`{prefix}:` without a value ignored"));
                    } else {
                        clauses.push(Clause::term(prefix, value));
                    }
                }
            }
            None => {
                while i < chars.len() && !chars[i].1.is_whitespace() {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|c| c.1).collect();
                if word.contains(':') {
                    diagnostics.push(format!("unknown field `{head}`; `{word}` searched as a plain term"));
                }
                clauses.push(Clause::term(FieldPrefix::All, word));
            }
        }
    }
    if clauses.is_empty() {
        return Err(QueryError::Empty);
    }
    Ok(QueryAst { clauses, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use FieldPrefix::*;

    fn clauses(q: &str) -> Vec<Clause> {
        parse_query(q).unwrap().clauses
    }

    #[test]
    fn field_phrase() {
        assert_eq!(clauses(r#"title:"general""#), [Clause::phrase(Title, ["general"])]);
        assert_eq!(clauses(r#"title:"persistent  homology""#), [Clause::phrase(Title, ["persistent", "homology"])]);
    }

    #[test]
    fn bare_words_and_phrases() {
        assert_eq!(clauses("epilepsy"), [Clause::term(All, "epilepsy")]);
        assert_eq!(clauses(r#""time series" Mapper"#), [Clause::phrase(All, ["time", "series"]), Clause::term(All, "Mapper")]);
    }

    #[test]
    fn tag_value_keeps_colons() {
        assert_eq!(
            clauses("tag:graphs:directed persistent"),
            [Clause::term(Tag, "graphs:directed"), Clause::term(All, "persistent")]
        );
        assert_eq!(clauses("tag:epilepsy"), [Clause::term(Tag, "epilepsy")]);
        assert_eq!(clauses("DOI:10.1/x:y"), [Clause::term(Doi, "10.1/x:y")]);
    }

    #[test]
    fn unknown_prefix_is_literal() {
        let ast = parse_query("foo:bar").unwrap();
        assert_eq!(ast.clauses, [Clause::term(All, "foo:bar")]);
        assert_eq!(ast.diagnostics.len(), 1);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_query(""), Err(QueryError::Empty));
        assert_eq!(parse_query(" \t "), Err(QueryError::Empty));
        assert_eq!(parse_query(r#"title:"gen"#), Err(QueryError::UnterminatedQuote { column: 7 }));
        assert_eq!(parse_query(r#"a ""#), Err(QueryError::UnterminatedQuote { column: 3 }));
        assert_eq!(parse_query(r#""""#), Err(QueryError::Empty));
    }

    #[test]
    fn dangling_prefix() {
        let ast = parse_query("title: homology").unwrap();
        assert_eq!(ast.clauses, [Clause::term(All, "homology")]);
        assert_eq!(ast.diagnostics.len(), 1);
    }

    #[test]
    fn display_round_trips() {
        for q in [r#"title:"general""#, "tag:graphs:directed", r#""a b" c author:pawel"#] {
            let ast = parse_query(q).unwrap();
            let shown: Vec<String> = ast.clauses.iter().map(Clause::to_string).collect();
            assert_eq!(parse_query(&shown.join(" ")).unwrap().clauses, ast.clauses);
        }
    }
}
