//! Markup parser for XML and for SGML in the style of the Reuters-21578
//! distribution.
//!
//! Strict mode accepts well-formed XML (minus DTD validation and namespaces).
//! Lenient mode additionally tolerates end tags that close several open
//! elements at once, stray end tags, unterminated constructs at end of input,
//! undeclared entities, bare `&` and `<` in character data, and several
//! top-level elements (which are wrapped under a synthetic [`SYNTHETIC_ROOT`]).

use std::borrow::Cow;

use super::tree::{DocTree, NodeId};
use super::CorpusError;

/// Root element used when a lenient parse finds several top-level elements.
pub const SYNTHETIC_ROOT: &str = "FILE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    Strict,
    #[default]
    Lenient,
}

impl ParseMode {
    pub fn from_lenient(lenient: bool) -> Self {
        if lenient {
            ParseMode::Lenient
        } else {
            ParseMode::Strict
        }
    }
}

/// Decodes `raw` as UTF-8, falling back to Latin-1.
///
/// NUL bytes never occur in text under either encoding; input containing them
/// is rejected as binary.
pub fn decode(raw: &[u8]) -> Result<Cow<'_, str>, CorpusError> {
    if let Some(pos) = raw.iter().position(|&b| b == 0) {
        return Err(CorpusError::Encoding(format!(
            "NUL byte at offset {pos}; input is not UTF-8 or Latin-1 text"
        )));
    }
    match std::str::from_utf8(raw) {
        Ok(s) => Ok(Cow::Borrowed(s)),
        Err(_) => Ok(Cow::Owned(raw.iter().map(|&b| b as char).collect())),
    }
}

pub fn parse_document(raw: &[u8], mode: ParseMode) -> Result<DocTree, CorpusError> {
    let text = decode(raw)?;
    parse_str(&text, mode)
}

pub fn parse_str(input: &str, mode: ParseMode) -> Result<DocTree, CorpusError> {
    Parser {
        src: input,
        pos: 0,
        mode,
        holder: DocTree::new("#document".to_owned(), Vec::new()),
        stack: Vec::new(),
    }
    .run()
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    mode: ParseMode,
    // Scratch tree whose root stands for the document itself.
    holder: DocTree,
    stack: Vec<NodeId>,
}

impl<'a> Parser<'a> {
    fn lenient(&self) -> bool {
        self.mode == ParseMode::Lenient
    }

    fn err(&self, position: usize, reason: impl Into<String>) -> CorpusError {
        CorpusError::MalformedMarkup {
            position,
            reason: reason.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn current(&self) -> NodeId {
        self.stack.last().copied().unwrap_or(self.holder.root())
    }

    fn run(mut self) -> Result<DocTree, CorpusError> {
        while self.pos < self.src.len() {
            if self.rest().starts_with('<') {
                self.markup()?;
            } else {
                self.text()?;
            }
        }
        if let Some(&open) = self.stack.last() {
            if !self.lenient() {
                let name = self.holder.node(open).element.clone();
                return Err(self.err(self.pos, format!("unclosed element <{name}> at end of input")));
            }
        }
        self.finish()
    }

    fn finish(self) -> Result<DocTree, CorpusError> {
        let holder = self.holder;
        let root = holder.root();
        let mut elements = Vec::new();
        for child in holder.children(root) {
            match &child.text {
                Some(t) if t.trim().is_empty() => {}
                Some(_) => {
                    if self.mode == ParseMode::Strict {
                        return Err(CorpusError::MalformedMarkup {
                            position: 0,
                            reason: "character data outside the root element".into(),
                        });
                    }
                    elements.push(child.id);
                }
                None => elements.push(child.id),
            }
        }
        let element_count = elements
            .iter()
            .filter(|id| !holder.node(**id).is_text())
            .count();
        if element_count == 0 {
            return Err(CorpusError::MalformedMarkup {
                position: self.src.len(),
                reason: "no markup element found".into(),
            });
        }
        if elements.len() == 1 {
            return Ok(holder.subtree(elements[0]));
        }
        if self.mode == ParseMode::Strict {
            return Err(CorpusError::MalformedMarkup {
                position: 0,
                reason: format!("{element_count} top-level elements; expected exactly one"),
            });
        }
        let mut wrapped = DocTree::new(SYNTHETIC_ROOT.to_owned(), Vec::new());
        for id in elements {
            wrapped.graft(wrapped.root(), &holder, id);
        }
        Ok(wrapped)
    }

    fn text(&mut self) -> Result<(), CorpusError> {
        let start = self.pos;
        let end = self.rest().find('<').map_or(self.src.len(), |i| start + i);
        self.pos = end;
        let decoded = self.decode_entities(&self.src[start..end], start)?;
        self.append_text(decoded);
        Ok(())
    }

    fn append_text(&mut self, text: String) {
        if text.is_empty() {
            return;
        }
        let parent = self.current();
        // Merge with a preceding text sibling (comments and CDATA split runs).
        if let Some(&last) = self.holder.node(parent).children.last() {
            if self.holder.node(last).is_text() {
                self.holder.append_to_text(last, &text);
                return;
            }
        }
        self.holder.push_text(parent, text);
    }

    fn markup(&mut self) -> Result<(), CorpusError> {
        let start = self.pos;
        let rest = self.rest();
        if rest.starts_with("<!--") {
            return self.skip_until(start, "-->", "unterminated comment");
        }
        if let Some(body) = rest.strip_prefix("<![CDATA[") {
            let content_start = start + "<![CDATA[".len();
            return match body.find("]]>") {
                Some(i) => {
                    self.append_text(body[..i].to_owned());
                    self.pos = content_start + i + 3;
                    Ok(())
                }
                None if self.lenient() => {
                    self.append_text(body.to_owned());
                    self.pos = self.src.len();
                    Ok(())
                }
                None => Err(self.err(start, "unterminated CDATA section")),
            };
        }
        if rest.starts_with("<?") {
            return self.skip_until(start, "?>", "unterminated processing instruction");
        }
        if rest.starts_with("<!") {
            return self.declaration(start);
        }
        if let Some(after) = rest.strip_prefix("</") {
            return self.end_tag(start, after);
        }
        if rest[1..].chars().next().is_some_and(is_name_start) {
            return self.start_tag(start);
        }
        if self.lenient() {
            self.append_text("<".to_owned());
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(start, "'<' not followed by a tag name"))
        }
    }

    fn skip_until(&mut self, start: usize, terminator: &str, reason: &str) -> Result<(), CorpusError> {
        match self.rest().find(terminator) {
            Some(i) => {
                self.pos += i + terminator.len();
                Ok(())
            }
            None if self.lenient() => {
                self.pos = self.src.len();
                Ok(())
            }
            None => Err(self.err(start, reason)),
        }
    }

    // <!DOCTYPE ...> and friends, with an optional [...] internal subset.
    fn declaration(&mut self, start: usize) -> Result<(), CorpusError> {
        let mut depth = 0usize;
        let mut quote: Option<char> = None;
        for (i, c) in self.rest().char_indices().skip(2) {
            match (quote, c) {
                (Some(q), c) if c == q => quote = None,
                (Some(_), _) => {}
                (None, '"' | '\'') => quote = Some(c),
                (None, '[') => depth += 1,
                (None, ']') => depth = depth.saturating_sub(1),
                (None, '>') if depth == 0 => {
                    self.pos += i + 1;
                    return Ok(());
                }
                _ => {}
            }
        }
        if self.lenient() {
            self.pos = self.src.len();
            Ok(())
        } else {
            Err(self.err(start, "unterminated declaration"))
        }
    }

    fn end_tag(&mut self, start: usize, after: &str) -> Result<(), CorpusError> {
        let name_len = after
            .char_indices()
            .find(|&(_, c)| !is_name_char(c))
            .map_or(after.len(), |(i, _)| i);
        let name = &after[..name_len];
        let tail = &after[name_len..];
        let close = tail.find('>');
        let consumed = match close {
            Some(i) if tail[..i].trim().is_empty() => 2 + name_len + i + 1,
            _ if self.lenient() => 2 + name_len + close.map_or(tail.len(), |i| i + 1),
            _ => return Err(self.err(start, format!("malformed end tag </{name}"))),
        };
        if name.is_empty() && !self.lenient() {
            return Err(self.err(start, "end tag without a name"));
        }
        self.pos = start + consumed;

        let matches = |tree: &DocTree, id: NodeId, lenient: bool| {
            let open = &tree.node(id).element;
            if lenient {
                open.eq_ignore_ascii_case(name)
            } else {
                open == name
            }
        };
        match self.stack.last() {
            Some(&top) if matches(&self.holder, top, self.lenient()) => {
                self.stack.pop();
                Ok(())
            }
            Some(&top) if !self.lenient() => {
                let open = self.holder.node(top).element.clone();
                Err(self.err(start, format!("end tag </{name}> does not match open <{open}>")))
            }
            None if !self.lenient() => Err(self.err(start, format!("end tag </{name}> with no open element"))),
            _ => {
                // SGML omitted end tags: close everything up to the matching
                // ancestor, or drop the stray end tag.
                if let Some(idx) = self
                    .stack
                    .iter()
                    .rposition(|&id| matches(&self.holder, id, true))
                {
                    self.stack.truncate(idx);
                }
                Ok(())
            }
        }
    }

    fn start_tag(&mut self, start: usize) -> Result<(), CorpusError> {
        let body_start = start + 1;
        let bytes = self.src.as_bytes();
        let mut i = body_start;
        while i < self.src.len() {
            let c = self.src[i..].chars().next().unwrap();
            if !is_name_char(c) {
                break;
            }
            i += c.len_utf8();
        }
        let name = self.src[body_start..i].to_owned();
        let mut attributes = Vec::new();
        let self_closing;
        loop {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i >= bytes.len() {
                if self.lenient() {
                    self.pos = self.src.len();
                    return Ok(());
                }
                return Err(self.err(start, format!("unterminated start tag <{name}")));
            }
            if self.src[i..].starts_with("/>") {
                self_closing = true;
                i += 2;
                break;
            }
            if bytes[i] == b'>' {
                self_closing = false;
                i += 1;
                break;
            }
            let (attr, next) = self.attribute(start, i)?;
            if let Some(attr) = attr {
                attributes.push(attr);
            }
            i = next;
        }
        self.pos = i;
        let parent = self.current();
        let id = self.holder.push_element(parent, name, attributes);
        if !self_closing {
            self.stack.push(id);
        }
        Ok(())
    }

    // Parses one attribute at `i`; returns it (if well-formed) and the next
    // position.
    fn attribute(
        &self,
        tag_start: usize,
        mut i: usize,
    ) -> Result<(Option<(String, String)>, usize), CorpusError> {
        let src = self.src;
        let bytes = src.as_bytes();
        let name_start = i;
        while i < src.len() {
            let c = src[i..].chars().next().unwrap();
            if !is_name_char(c) {
                break;
            }
            i += c.len_utf8();
        }
        if i == name_start {
            if self.lenient() {
                // Skip one junk character inside the tag.
                let c = src[i..].chars().next().unwrap();
                return Ok((None, i + c.len_utf8()));
            }
            return Err(self.err(i, "invalid character in start tag"));
        }
        let name = src[name_start..i].to_owned();
        let mut j = i;
        while j < bytes.len() && bytes[j].is_ascii_whitespace() {
            j += 1;
        }
        if j >= bytes.len() || bytes[j] != b'=' {
            // SGML minimized attribute (`<OPTION SELECTED>`).
            if self.lenient() {
                return Ok((Some((name.clone(), name)), i));
            }
            return Err(self.err(i, format!("attribute {name} has no value")));
        }
        j += 1;
        while j < bytes.len() && bytes[j].is_ascii_whitespace() {
            j += 1;
        }
        if j >= bytes.len() {
            return Err(self.err(tag_start, format!("unterminated start tag (attribute {name})")));
        }
        let (raw, next) = match bytes[j] {
            q @ (b'"' | b'\'') => match src[j + 1..].find(q as char) {
                Some(end) => (&src[j + 1..j + 1 + end], j + 1 + end + 1),
                None if self.lenient() => (&src[j + 1..], src.len()),
                None => return Err(self.err(j, format!("unterminated value for attribute {name}"))),
            },
            _ if self.lenient() => {
                let end = src[j..]
                    .find(|c: char| c.is_ascii_whitespace() || c == '>')
                    .map_or(src.len(), |e| j + e);
                (&src[j..end], end)
            }
            _ => return Err(self.err(j, format!("unquoted value for attribute {name}"))),
        };
        let value = self.decode_entities(raw, j)?;
        Ok((Some((name, value)), next))
    }

    fn decode_entities(&self, raw: &str, offset: usize) -> Result<String, CorpusError> {
        if !raw.contains('&') {
            return Ok(raw.to_owned());
        }
        let mut out = String::with_capacity(raw.len());
        let mut rest = raw;
        let mut at = offset;
        while let Some(amp) = rest.find('&') {
            out.push_str(&rest[..amp]);
            at += amp;
            rest = &rest[amp..];
            let semi = rest[1..]
                .char_indices()
                .take(32)
                .find(|&(_, c)| !(c.is_alphanumeric() || c == '#'))
                .filter(|&(_, c)| c == ';')
                .map(|(i, _)| i + 1);
            let Some(semi) = semi else {
                if !self.lenient() {
                    return Err(self.err(at, "bare '&' in character data"));
                }
                out.push('&');
                rest = &rest[1..];
                at += 1;
                continue;
            };
            let entity = &rest[1..semi];
            match resolve_entity(entity) {
                Some(c) => out.push(c),
                None if self.lenient() => {}
                None => return Err(self.err(at, format!("undeclared entity &{entity};"))),
            }
            rest = &rest[semi + 1..];
            at += semi + 1;
        }
        out.push_str(rest);
        Ok(out)
    }
}

fn resolve_entity(entity: &str) -> Option<char> {
    match entity {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        _ => {
            let num = entity.strip_prefix('#')?;
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => num.parse::<u32>().ok()?,
            };
            char::from_u32(code).filter(|&c| c != '\0')
        }
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == ':'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':')
}
