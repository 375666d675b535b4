use std::collections::BTreeMap;

use thiserror::Error;

use super::{Modifier, ModifierKind, Projection, QueryCandidate, Term, TriplePattern, RDF_TYPE, XSD};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ParseError>;

/// Prefixes the public Wikidata and DBpedia endpoints predeclare. Used only
/// when the query itself does not declare the prefix.
const WELL_KNOWN_PREFIXES: &[(&str, &str)] = &[
    ("bd", "http://www.bigdata.com/rdf#"),
    ("dbo", "http://dbpedia.org/ontology/"),
    ("dbp", "http://dbpedia.org/property/"),
    ("dbr", "http://dbpedia.org/resource/"),
    ("foaf", "http://xmlns.com/foaf/0.1/"),
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("p", "http://www.wikidata.org/prop/"),
    ("pq", "http://www.wikidata.org/prop/qualifier/"),
    ("ps", "http://www.wikidata.org/prop/statement/"),
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("schema", "http://schema.org/"),
    ("skos", "http://www.w3.org/2004/02/skos/core#"),
    ("wd", "http://www.wikidata.org/entity/"),
    ("wdt", "http://www.wikidata.org/prop/direct/"),
    ("wikibase", "http://wikiba.se/ontology#"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
];

/// Parses UTF-8 bytes; invalid encodings are reported at the first bad byte.
pub fn parse_query_bytes(bytes: &[u8]) -> Result<QueryCandidate> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_query(text),
        Err(e) => Err(ParseError::new(e.valid_up_to(), "invalid UTF-8")),
    }
}

/// Parses a SPARQL `SELECT` query candidate.
///
/// The returned candidate has an empty `id` and rank 1; callers that know
/// the candidate's position set them with [`QueryCandidate::with_id`].
pub fn parse_query(text: &str) -> Result<QueryCandidate> {
    let tokens = Lexer::new(text).run()?;
    Parser {
        src: text,
        tokens,
        pos: 0,
        prefixes: BTreeMap::new(),
    }
    .query()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    IriRef(String),
    PName { prefix: String, local: String },
    Var(String),
    Str(String),
    LangTag(String),
    DoubleCaret,
    Number { lexical: String, datatype: &'static str },
    Word(String),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    out: Vec<Token>,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            out: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn push(&mut self, tok: Tok, start: usize) {
        self.out.push(Token {
            tok,
            start,
            end: self.pos,
        });
    }

    fn run(mut self) -> Result<Vec<Token>> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                '<' => {
                    if let Some(iri) = self.try_iri_ref() {
                        self.push(Tok::IriRef(iri), start);
                    } else {
                        self.bump();
                        self.push(Tok::Sym('<'), start);
                    }
                }
                '?' | '$' => {
                    self.bump();
                    let name_start = self.pos;
                    while self.peek().is_some_and(is_name_char) {
                        self.bump();
                    }
                    if self.pos == name_start {
                        return Err(ParseError::new(start, "empty variable name"));
                    }
                    let name = self.src[name_start..self.pos].to_string();
                    self.push(Tok::Var(name), start);
                }
                '"' | '\'' => {
                    let s = self.string(c)?;
                    self.push(Tok::Str(s), start);
                }
                '@' => {
                    self.bump();
                    let tag_start = self.pos;
                    while self
                        .peek()
                        .is_some_and(|c| c.is_ascii_alphanumeric() || c == '-')
                    {
                        self.bump();
                    }
                    if self.pos == tag_start {
                        return Err(ParseError::new(start, "empty language tag"));
                    }
                    let tag = self.src[tag_start..self.pos].to_string();
                    self.push(Tok::LangTag(tag), start);
                }
                '^' if self.peek_at(1) == Some('^') => {
                    self.bump();
                    self.bump();
                    self.push(Tok::DoubleCaret, start);
                }
                c if c.is_ascii_digit()
                    || ((c == '+' || c == '-' || c == '.')
                        && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())
                        && !self.prev_is_operand()) =>
                {
                    self.number(start);
                }
                c if c.is_alphabetic() || c == ':' => {
                    self.word_or_pname(start)?;
                }
                c => {
                    self.bump();
                    self.push(Tok::Sym(c), start);
                }
            }
        }
        Ok(self.out)
    }

    // `?x -1` is subtraction inside expressions, but `LIMIT -1` never
    // matters to us; treat a sign as part of a number only after punctuation.
    fn prev_is_operand(&self) -> bool {
        matches!(
            self.out.last().map(|t| &t.tok),
            Some(Tok::Var(_) | Tok::Number { .. } | Tok::Str(_) | Tok::Sym(')'))
        )
    }

    fn try_iri_ref(&mut self) -> Option<String> {
        let rest = &self.src[self.pos + 1..];
        let end = rest.find(|c: char| {
            c == '>' || c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`')
        })?;
        if !rest[end..].starts_with('>') {
            return None;
        }
        let iri = rest[..end].to_string();
        self.pos += 1 + end + 1;
        Some(iri)
    }

    fn string(&mut self, quote: char) -> Result<String> {
        let start = self.pos;
        let long = self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote);
        let delim_len = if long { 3 } else { 1 };
        for _ in 0..delim_len {
            self.bump();
        }
        let mut out = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(ParseError::new(start, "unterminated string literal"));
            };
            if c == quote {
                if !long {
                    return Ok(out);
                }
                if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                    self.bump();
                    self.bump();
                    return Ok(out);
                }
                out.push(c);
            } else if c == '\\' {
                let esc_at = self.pos - 1;
                let e = self
                    .bump()
                    .ok_or_else(|| ParseError::new(esc_at, "unterminated escape"))?;
                match e {
                    't' => out.push('\t'),
                    'n' => out.push('\n'),
                    'r' => out.push('\r'),
                    'b' => out.push('\u{8}'),
                    'f' => out.push('\u{c}'),
                    '"' | '\'' | '\\' => out.push(e),
                    'u' | 'U' => {
                        let n = if e == 'u' { 4 } else { 8 };
                        let hex_start = self.pos;
                        for _ in 0..n {
                            if !self.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
                                return Err(ParseError::new(esc_at, "bad unicode escape"));
                            }
                            self.bump();
                        }
                        let code = u32::from_str_radix(&self.src[hex_start..self.pos], 16)
                            .map_err(|_| ParseError::new(esc_at, "bad unicode escape"))?;
                        let ch = char::from_u32(code)
                            .ok_or_else(|| ParseError::new(esc_at, "invalid code point"))?;
                        out.push(ch);
                    }
                    _ => return Err(ParseError::new(esc_at, "unknown string escape")),
                }
            } else if !long && (c == '\n' || c == '\r') {
                return Err(ParseError::new(start, "newline in short string literal"));
            } else {
                out.push(c);
            }
        }
    }

    fn number(&mut self, start: usize) {
        if matches!(self.peek(), Some('+' | '-')) {
            self.bump();
        }
        let mut datatype = "integer";
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            datatype = "decimal";
            self.bump();
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let digit_at = if matches!(self.peek_at(1), Some('+' | '-')) { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                datatype = "double";
                for _ in 0..digit_at {
                    self.bump();
                }
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        let lexical = self.src[start..self.pos].to_string();
        self.push(Tok::Number { lexical, datatype }, start);
    }

    fn word_or_pname(&mut self, start: usize) -> Result<()> {
        while self
            .peek()
            .is_some_and(|c| is_name_char(c) || c == '-' || c == '.')
        {
            self.bump();
        }
        // a trailing '.' is a triple terminator, not part of the name
        while self.src[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.peek() != Some(':') {
            let word = self.src[start..self.pos].to_string();
            self.push(Tok::Word(word), start);
            return Ok(());
        }
        let prefix = self.src[start..self.pos].to_string();
        if prefix.starts_with(|c: char| !c.is_alphabetic()) {
            return Err(ParseError::new(start, "invalid prefix name"));
        }
        self.bump();
        let mut local = String::new();
        loop {
            match self.peek() {
                Some(c) if is_name_char(c) || c == '-' || c == ':' => {
                    self.bump();
                    local.push(c);
                }
                Some('.') if self
                    .peek_at(1)
                    .is_some_and(|c| is_name_char(c) || c == '-' || c == ':' || c == '%' || c == '\\') =>
                {
                    self.bump();
                    local.push('.');
                }
                Some('%') => {
                    let at = self.pos;
                    let ok = self.peek_at(1).is_some_and(|c| c.is_ascii_hexdigit())
                        && self.peek_at(2).is_some_and(|c| c.is_ascii_hexdigit());
                    if !ok {
                        return Err(ParseError::new(at, "bad percent escape in local name"));
                    }
                    for _ in 0..3 {
                        local.push(self.bump().unwrap_or_default());
                    }
                }
                Some('\\') => {
                    let at = self.pos;
                    self.bump();
                    match self.bump() {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => local.push(c),
                        _ => return Err(ParseError::new(at, "bad escape in local name")),
                    }
                }
                _ => break,
            }
        }
        self.push(Tok::PName { prefix, local }, start);
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
}

const TRAILING_CLAUSES: &[&str] = &["GROUP", "HAVING", "ORDER", "LIMIT", "OFFSET"];

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.src.len(), |t| t.start)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(ParseError::new(self.offset(), message))
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Word(w), .. }) if w.eq_ignore_ascii_case(kw))
    }

    fn at_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        if self.at_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {kw}"))
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.at_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn query(mut self) -> Result<QueryCandidate> {
        while self.at_keyword("PREFIX") {
            self.pos += 1;
            let prefix = match self.next() {
                Some(Token {
                    tok: Tok::PName { prefix, local },
                    start,
                    ..
                }) => {
                    if !local.is_empty() {
                        return Err(ParseError::new(start, "expected prefix name ending in ':'"));
                    }
                    prefix
                }
                Some(Token { start, .. }) => {
                    return Err(ParseError::new(start, "expected prefix name"))
                }
                None => return self.err("expected prefix name"),
            };
            let iri = match self.next() {
                Some(Token {
                    tok: Tok::IriRef(iri),
                    start,
                    ..
                }) => {
                    check_absolute(&iri, start)?;
                    iri
                }
                Some(Token { start, .. }) => return Err(ParseError::new(start, "expected <IRI>")),
                None => return self.err("expected <IRI>"),
            };
            self.prefixes.insert(prefix, iri);
        }

        self.expect_keyword("SELECT")?;
        let mut distinct = false;
        if self.at_keyword("DISTINCT") {
            self.pos += 1;
            distinct = true;
        }

        let mut modifiers = Vec::new();
        let mut vars: Vec<(String, usize)> = Vec::new();
        let projection_all;
        if self.at_sym('*') {
            self.pos += 1;
            projection_all = true;
        } else {
            projection_all = false;
            loop {
                match self.peek() {
                    Some(Token {
                        tok: Tok::Var(v),
                        start,
                        ..
                    }) => {
                        vars.push((v.clone(), *start));
                        self.pos += 1;
                    }
                    Some(Token {
                        tok: Tok::Sym('('),
                        ..
                    }) => {
                        let text = self.balanced_parens()?;
                        modifiers.push(Modifier::new(ModifierKind::Aggregate, text));
                    }
                    _ => break,
                }
            }
            if vars.is_empty() && modifiers.is_empty() {
                return self.err("expected projection");
            }
        }

        if !self.at_keyword("WHERE") {
            return self.err("missing WHERE");
        }
        self.pos += 1;
        let open = self.offset();
        self.expect_sym('{')?;

        let mut patterns = Vec::new();
        loop {
            match self.peek() {
                None => return Err(ParseError::new(open, "unbalanced braces")),
                Some(Token { tok: Tok::Sym('}'), .. }) => break,
                Some(Token { tok: Tok::Sym('.'), .. }) => {
                    self.pos += 1;
                }
                Some(Token { tok: Tok::Word(w), .. }) if w.eq_ignore_ascii_case("FILTER") => {
                    let text = self.filter()?;
                    modifiers.push(Modifier::new(ModifierKind::Filter, text));
                }
                Some(Token { tok: Tok::Word(w), .. })
                    if ["OPTIONAL", "UNION", "MINUS", "BIND", "VALUES", "SERVICE", "GRAPH"]
                        .iter()
                        .any(|k| w.eq_ignore_ascii_case(k)) =>
                {
                    return self.err(format!("unsupported clause {}", w.to_uppercase()));
                }
                Some(Token { tok: Tok::Sym('{'), .. }) => {
                    return self.err("nested group patterns are not supported")
                }
                Some(_) => self.triples(&mut patterns)?,
            }
        }
        let close = self.offset();
        self.pos += 1;
        if patterns.is_empty() {
            return Err(ParseError::new(close, "empty graph pattern"));
        }

        while let Some(tok) = self.peek() {
            let start = tok.start;
            let kind = match &tok.tok {
                Tok::Word(w) if w.eq_ignore_ascii_case("GROUP") => ModifierKind::GroupBy,
                Tok::Word(w) if w.eq_ignore_ascii_case("HAVING") => ModifierKind::Having,
                Tok::Word(w) if w.eq_ignore_ascii_case("ORDER") => ModifierKind::OrderBy,
                Tok::Word(w) if w.eq_ignore_ascii_case("LIMIT") => ModifierKind::Limit,
                Tok::Word(w) if w.eq_ignore_ascii_case("OFFSET") => ModifierKind::Offset,
                _ => return self.err("unexpected token after graph pattern"),
            };
            self.pos += 1;
            match kind {
                ModifierKind::GroupBy | ModifierKind::OrderBy => self.expect_keyword("BY")?,
                ModifierKind::Limit | ModifierKind::Offset => match self.next() {
                    Some(Token {
                        tok: Tok::Number { datatype: "integer", lexical },
                        ..
                    }) if !lexical.starts_with(['+', '-']) => {}
                    _ => return Err(ParseError::new(start, "expected integer")),
                },
                _ => {}
            }
            let mut end = self.tokens[self.pos - 1].end;
            if matches!(
                kind,
                ModifierKind::GroupBy | ModifierKind::OrderBy | ModifierKind::Having
            ) {
                let body_start = self.pos;
                let mut depth = 0usize;
                while let Some(t) = self.peek() {
                    match &t.tok {
                        Tok::Word(w)
                            if depth == 0
                                && TRAILING_CLAUSES.iter().any(|k| w.eq_ignore_ascii_case(k)) =>
                        {
                            break
                        }
                        Tok::Sym('(') => depth += 1,
                        Tok::Sym(')') => {
                            if depth == 0 {
                                return self.err("unbalanced parentheses");
                            }
                            depth -= 1;
                        }
                        Tok::Sym('{' | '}') => return self.err("unexpected brace"),
                        _ => {}
                    }
                    end = t.end;
                    self.pos += 1;
                }
                if depth != 0 {
                    return Err(ParseError::new(self.src.len(), "unbalanced parentheses"));
                }
                if self.pos == body_start {
                    return Err(ParseError::new(start, "empty solution modifier"));
                }
            }
            modifiers.push(Modifier::new(kind, &self.src[start..end]));
        }

        let projection = if projection_all {
            Projection::All
        } else {
            for (v, at) in &vars {
                if !patterns
                    .iter()
                    .any(|p: &TriplePattern| p.variables().any(|pv| pv == v))
                {
                    return Err(ParseError::new(*at, format!("projected variable ?{v} not in pattern")));
                }
            }
            let mut names: Vec<String> = Vec::new();
            for (v, _) in vars {
                if !names.contains(&v) {
                    names.push(v);
                }
            }
            Projection::Vars(names)
        };

        Ok(QueryCandidate {
            id: String::new(),
            rank: 1,
            projection,
            distinct,
            patterns,
            modifiers,
            prefixes: self.prefixes,
            raw_text: self.src.to_string(),
        })
    }

    /// Consumes `( ... )` and returns the source slice including the parens.
    fn balanced_parens(&mut self) -> Result<String> {
        let start = self.offset();
        self.expect_sym('(')?;
        let mut depth = 1usize;
        loop {
            match self.next() {
                None => return Err(ParseError::new(start, "unbalanced parentheses")),
                Some(Token { tok: Tok::Sym('('), .. }) => depth += 1,
                Some(Token {
                    tok: Tok::Sym(')'),
                    end,
                    ..
                }) => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(self.src[start..end].to_string());
                    }
                }
                Some(Token {
                    tok: Tok::Sym('{' | '}'),
                    start: at,
                    ..
                }) => return Err(ParseError::new(at, "unexpected brace in expression")),
                Some(_) => {}
            }
        }
    }

    fn filter(&mut self) -> Result<String> {
        let start = self.offset();
        self.pos += 1;
        if let Some(Token { tok: Tok::Word(w), .. }) = self.peek() {
            if w.eq_ignore_ascii_case("NOT") || w.eq_ignore_ascii_case("EXISTS") {
                return self.err("FILTER EXISTS is not supported");
            }
            self.pos += 1;
        }
        let inner = self.balanced_parens()?;
        let end = self.tokens[self.pos - 1].end;
        debug_assert!(self.src[start..end].ends_with(&inner));
        Ok(self.src[start..end].to_string())
    }

    fn triples(&mut self, out: &mut Vec<TriplePattern>) -> Result<()> {
        let subject = self.term(false)?;
        if matches!(subject, Term::Literal { .. }) {
            // legal SPARQL, but it can never match
            log::debug!("literal in subject position");
        }
        loop {
            let predicate = self.term(true)?;
            loop {
                let object = self.term(false)?;
                out.push(TriplePattern::new(
                    subject.clone(),
                    predicate.clone(),
                    object,
                ));
                if self.at_sym(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.at_sym(';') {
                self.pos += 1;
                while self.at_sym(';') {
                    self.pos += 1;
                }
                if self.at_sym('.') || self.at_sym('}') {
                    break;
                }
            } else {
                break;
            }
        }
        if self.at_sym('.') {
            self.pos += 1;
        } else if !self.at_sym('}') && !self.at_keyword("FILTER") {
            return self.err("expected '.' or '}' after triple");
        }
        Ok(())
    }

    fn term(&mut self, predicate: bool) -> Result<Term> {
        let Some(token) = self.next() else {
            return self.err("unexpected end of input");
        };
        let at = token.start;
        let term = match token.tok {
            Tok::Var(v) => Term::var(v),
            Tok::IriRef(iri) => {
                check_absolute(&iri, at)?;
                Term::iri(iri)
            }
            Tok::PName { prefix, local } => Term::iri(self.expand(&prefix, &local, at)?),
            Tok::Word(w) if predicate && w == "a" => Term::iri(RDF_TYPE),
            Tok::Word(w) if !predicate && (w == "true" || w == "false") => Term::Literal {
                value: w,
                lang: None,
                datatype: Some(format!("{XSD}boolean")),
            },
            Tok::Number { lexical, datatype } if !predicate => Term::Literal {
                value: lexical,
                lang: None,
                datatype: Some(format!("{XSD}{datatype}")),
            },
            Tok::Str(value) if !predicate => {
                let mut lang = None;
                let mut datatype = None;
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::LangTag(tag)) => {
                        lang = Some(tag.clone());
                        self.pos += 1;
                    }
                    Some(Tok::DoubleCaret) => {
                        self.pos += 1;
                        match self.next() {
                            Some(Token {
                                tok: Tok::IriRef(iri),
                                start,
                                ..
                            }) => {
                                check_absolute(&iri, start)?;
                                datatype = Some(iri);
                            }
                            Some(Token {
                                tok: Tok::PName { prefix, local },
                                start,
                                ..
                            }) => datatype = Some(self.expand(&prefix, &local, start)?),
                            _ => return Err(ParseError::new(at, "expected datatype IRI")),
                        }
                    }
                    _ => {}
                }
                Term::Literal {
                    value,
                    lang,
                    datatype,
                }
            }
            Tok::Str(_) | Tok::Number { .. } => {
                return Err(ParseError::new(at, "literal in predicate position"))
            }
            Tok::Sym('[') | Tok::Sym('_') => {
                return Err(ParseError::new(at, "blank nodes are not supported"))
            }
            Tok::Sym('}') => return Err(ParseError::new(at, "incomplete triple pattern")),
            _ => return Err(ParseError::new(at, "expected RDF term")),
        };
        Ok(term)
    }

    fn expand(&self, prefix: &str, local: &str, at: usize) -> Result<String> {
        let base = self.prefixes.get(prefix).map(String::as_str).or_else(|| {
            WELL_KNOWN_PREFIXES
                .iter()
                .find(|(p, _)| *p == prefix)
                .map(|(_, iri)| *iri)
        });
        match base {
            Some(base) => Ok(format!("{base}{local}")),
            None => Err(ParseError::new(at, format!("undeclared prefix '{prefix}:'"))),
        }
    }
}

fn check_absolute(iri: &str, at: usize) -> Result<()> {
    if iri.contains("://") {
        Ok(())
    } else {
        Err(ParseError::new(at, format!("relative IRI <{iri}>")))
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    const DBR: &str = "http://dbpedia.org/resource/";
    const DBO: &str = "http://dbpedia.org/ontology/";
    const WD: &str = "http://www.wikidata.org/entity/";
    const WDT: &str = "http://www.wikidata.org/prop/direct/";

    #[test]
    fn kennedy_query() {
        let q = parse_query(KENNEDY_QUERY).unwrap();
        assert_eq!(
            q.patterns,
            vec![TriplePattern::new(
                Term::iri(format!("{DBR}John_F._Kennedy")),
                Term::iri(format!("{DBO}deathCause")),
                Term::var("answer"),
            )]
        );
        assert_eq!(q.projection, Projection::Vars(vec!["answer".into()]));
        assert!(!q.distinct);
        assert!(q.modifiers.is_empty());
        assert_eq!(q.raw_text, KENNEDY_QUERY);
        assert_eq!(q.prefixes.len(), 2);
    }

    #[test]
    fn given_name_query() {
        let q = parse_query(GIVEN_NAME_QUERY).unwrap();
        assert_eq!(
            q.patterns,
            vec![
                TriplePattern::new(
                    Term::var("s1"),
                    Term::var("p1"),
                    Term::iri(format!("{WD}Q57747377"))
                ),
                TriplePattern::new(
                    Term::var("s1"),
                    Term::iri(format!("{WDT}P21")),
                    Term::var("o2")
                ),
            ]
        );
        assert!(q.distinct);
        assert!(q.modifiers.iter().any(|m| m.text == "LIMIT 1000"));
    }

    #[test]
    fn empty_pattern_block() {
        let err = parse_query("SELECT ?x WHERE { }").unwrap_err();
        assert_eq!(err.offset, 18);
    }

    #[test]
    fn missing_where() {
        let err = parse_query("SELECT ?x { ?x ?p ?o }").unwrap_err();
        assert!(err.message.contains("WHERE"));
        assert_eq!(err.offset, 10);
    }

    #[test]
    fn unbalanced_braces() {
        let err = parse_query("SELECT ?x WHERE { ?x ?p ?o .").unwrap_err();
        assert_eq!(err.offset, 16);
        assert!(parse_query("SELECT ?x WHERE { ?x ?p ?o } }").is_err());
    }

    #[test]
    fn undeclared_prefix_falls_back_to_well_known() {
        let q = parse_query("SELECT ?o WHERE { wd:Q205761 wdt:P19 ?o . ?o rdfs:label ?l }").unwrap();
        assert!(q.prefixes.is_empty());
        assert_eq!(q.patterns[1].predicate, Term::iri(crate::sparql::RDFS_LABEL));
        let err = parse_query("SELECT ?o WHERE { nope:x ?p ?o }").unwrap_err();
        assert_eq!(err.offset, 18);
    }

    #[test]
    fn filter_and_modifiers_verbatim() {
        let q = parse_query(
            "SELECT DISTINCT ?o WHERE {
  wd:Q205761 wdt:P19 ?o .
  ?o rdfs:label ?ol .
  FILTER regex(?ol, 'Victoria')
} ORDER BY DESC(?o) ASC(?ol) LIMIT 10 OFFSET 5",
        )
        .unwrap();
        let texts: Vec<_> = q.modifiers.iter().map(|m| (m.kind, m.text.as_str())).collect();
        assert_eq!(
            texts,
            vec![
                (ModifierKind::Filter, "FILTER regex(?ol, 'Victoria')"),
                (ModifierKind::OrderBy, "ORDER BY DESC(?o) ASC(?ol)"),
                (ModifierKind::Limit, "LIMIT 10"),
                (ModifierKind::Offset, "OFFSET 5"),
            ]
        );
        assert_eq!(q.patterns.len(), 2);
    }

    #[test]
    fn literals_and_shorthand() {
        let q = parse_query(
            r#"SELECT * WHERE { ?s rdfs:label "Le \"Cat\""@fr , 'x'^^xsd:string ; a wd:Q5 ; wdt:P1 42, -1.5e3, true . }"#,
        )
        .unwrap();
        assert_eq!(q.patterns.len(), 6);
        assert_eq!(q.patterns[0].object, Term::lang_literal("Le \"Cat\"", "fr"));
        assert_eq!(q.patterns[2].predicate, Term::iri(RDF_TYPE));
        assert_eq!(q.patterns[3].object.value(), "42");
        assert_eq!(q.patterns[4].object.value(), "-1.5e3");
    }

    #[test]
    fn projected_variable_must_occur() {
        assert!(parse_query("SELECT ?nope WHERE { ?s ?p ?o }").is_err());
    }

    #[test]
    fn rejects_unsupported_constructs() {
        for q in [
            "SELECT * WHERE { ?s ?p ?o OPTIONAL { ?s ?q ?r } }",
            "SELECT * WHERE { { ?s ?p ?o } UNION { ?s ?q ?o } }",
            "SELECT * WHERE { _:b ?p ?o }",
            "SELECT * WHERE { ?s \"lit\" ?o }",
            "SELECT * WHERE { ?s <relative> ?o }",
            "SELECT * WHERE { ?s ?p ?o } LIMIT x",
        ] {
            assert!(parse_query(q).is_err(), "{q}");
        }
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let err = parse_query_bytes(b"SELECT \xff").unwrap_err();
        assert_eq!(err.offset, 7);
    }

    proptest! {
        #[test]
        fn never_panics_on_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
            let _ = parse_query_bytes(&bytes);
        }

        #[test]
        fn never_panics_on_sparql_like_text(
            parts in proptest::collection::vec(
                prop_oneof![
                    Just("SELECT"), Just("DISTINCT"), Just("WHERE"), Just("{"), Just("}"),
                    Just("?x"), Just("?"), Just("wd:Q1"), Just("<http://a/b>"), Just("<"),
                    Just("."), Just(";"), Just(","), Just("("), Just(")"), Just("\""),
                    Just("'a'"), Just("@en"), Just("^^"), Just("FILTER"), Just("LIMIT"),
                    Just("10"), Just("PREFIX"), Just("p:"), Just("*"), Just("#"), Just("\n"),
                    Just("ORDER"), Just("BY"), Just("\\"), Just("%"), Just("é"),
                ],
                0..30,
            )
        ) {
            let text = parts.join(" ");
            let _ = parse_query(&text);
            let _ = parse_query(&parts.concat());
        }
    }
}
