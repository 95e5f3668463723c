//! Markup removal and section extraction for definition pages.

use std::sync::OnceLock;

use regex::Regex;

/// Which part of the page a fragment selects.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionScope {
    /// The section and its subsections, up to the next heading of the same or a higher level.
    #[default]
    WithSubsections,
    /// The section text only, up to the next heading of any level.
    SectionOnly,
}

struct Patterns {
    comment: Regex,
    math_alt: Regex,
    self_closing_ref: Regex,
    wiki_link: Regex,
    wiki_file_link: Regex,
    external_link: Regex,
    emphasis: Regex,
    heading_line: Regex,
    tag: Regex,
    citation_marker: Regex,
    whitespace: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        comment: Regex::new(r"(?s)<!--.*?-->").unwrap(),
        math_alt: Regex::new(r#"(?s)<math\b[^>]*\balttext="([^"]*)"[^>]*>.*?</math>"#).unwrap(),
        self_closing_ref: Regex::new(r"<ref\b[^>]*/>").unwrap(),
        wiki_file_link: Regex::new(r"\[\[(?i:file|image|category|fichier|datei|catégorie|kategorie):[^\[\]]*\]\]").unwrap(),
        wiki_link: Regex::new(r"\[\[(?:[^\[\]|]*\|)?([^\[\]|]*)\]\]").unwrap(),
        external_link: Regex::new(r"\[https?://[^\s\]]+\s*([^\]]*)\]").unwrap(),
        emphasis: Regex::new(r"'{2,}").unwrap(),
        heading_line: Regex::new(r"(?m)^=+[ \t]*(.*?)[ \t]*=+[ \t]*$").unwrap(),
        tag: Regex::new(r"</?[A-Za-z][^<>]*>|<![^<>]*>").unwrap(),
        citation_marker: Regex::new(
            r"\[\s*(?:\d{1,3}|[a-z]|note \d+|citation needed|edit|modifier|modifier le code|bearbeiten|quelltext bearbeiten)\s*\]",
        )
        .unwrap(),
        whitespace: Regex::new(r"\s+").unwrap(),
    })
}

/// Elements removed together with their content.
const DROPPED_ELEMENTS: &[(&str, Option<&str>)] = &[
    ("script", None),
    ("style", None),
    ("ref", None),
    ("table", None),
    ("figure", None),
    ("sup", Some("reference")),
    ("sup", Some("noprint")),
    ("span", Some("mw-editsection")),
    ("div", Some("hatnote")),
    ("div", Some("thumb")),
];

/// Strips HTML tags, wiki templates, links syntax and citation markers, and
/// collapses whitespace. Math content is kept as text. Idempotent.
pub fn clean_markup(raw: &str) -> String {
    let mut current = raw.to_string();
    for _ in 0..32 {
        let next = clean_once(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn clean_once(raw: &str) -> String {
    let p = patterns();
    let mut text = p.comment.replace_all(raw, " ").into_owned();
    text = p
        .math_alt
        .replace_all(&text, |c: &regex::Captures<'_>| {
            let alt = c[1].trim();
            let inner = alt.strip_prefix("{\\displaystyle").and_then(|a| a.strip_suffix('}')).unwrap_or(alt);
            format!(" {} ", inner.trim())
        })
        .into_owned();
    text = p.self_closing_ref.replace_all(&text, " ").into_owned();
    for (name, class) in DROPPED_ELEMENTS {
        text = remove_elements(&text, name, *class);
    }
    text = remove_templates(&text);
    text = p.wiki_file_link.replace_all(&text, " ").into_owned();
    text = p.wiki_link.replace_all(&text, "$1").into_owned();
    text = p.external_link.replace_all(&text, "$1").into_owned();
    text = p.emphasis.replace_all(&text, "").into_owned();
    text = p.heading_line.replace_all(&text, "$1").into_owned();
    text = p.tag.replace_all(&text, " ").into_owned();
    text = html_escape::decode_html_entities(&text).into_owned();
    text = p.citation_marker.replace_all(&text, " ").into_owned();
    p.whitespace.replace_all(&text, " ").trim().to_string()
}

/// Removes `{{ ... }}` templates, honoring nesting. An unbalanced opening
/// brace pair is kept as text.
fn remove_templates(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut depth = 0usize;
    let mut pending_start = 0usize;
    let mut last = 0usize;
    let mut i = 0usize;
    while i + 1 < bytes.len() {
        if bytes[i] == b'{' && bytes[i + 1] == b'{' {
            if depth == 0 {
                out.push_str(&text[last..i]);
                pending_start = i;
            }
            depth += 1;
            i += 2;
        } else if bytes[i] == b'}' && bytes[i + 1] == b'}' && depth > 0 {
            depth -= 1;
            i += 2;
            if depth == 0 {
                out.push(' ');
                last = i;
            }
        } else {
            i += 1;
        }
    }
    if depth > 0 {
        out.push_str(&text[pending_start..]);
    } else {
        out.push_str(&text[last..]);
    }
    out
}

/// Removes every `<name ...>...</name>` element (nesting-aware), optionally
/// only those whose `class` attribute contains `class`.
fn remove_elements(text: &str, name: &str, class: Option<&str>) -> String {
    let lower = text.to_ascii_lowercase();
    let open = format!("<{name}");
    let close = format!("</{name}>");
    let mut out = String::with_capacity(text.len());
    let mut pos = 0usize;
    while let Some(rel) = lower[pos..].find(&open) {
        let start = pos + rel;
        let after_name = start + open.len();
        let boundary = lower.as_bytes().get(after_name).copied();
        let Some(tag_end) = lower[start..].find('>').map(|e| start + e) else {
            break;
        };
        let is_tag = matches!(boundary, Some(b' ' | b'>' | b'\t' | b'\n' | b'/'));
        let class_ok = class.is_none_or(|c| {
            lower[start..tag_end]
                .split("class=\"")
                .nth(1)
                .and_then(|rest| rest.split('"').next())
                .is_some_and(|classes| classes.split_whitespace().any(|k| k == c))
        });
        if !is_tag || !class_ok {
            out.push_str(&text[pos..after_name]);
            pos = after_name;
            continue;
        }
        out.push_str(&text[pos..start]);
        if lower.as_bytes()[tag_end - 1] == b'/' {
            out.push(' ');
            pos = tag_end + 1;
            continue;
        }
        // find the matching close tag
        let mut depth = 1usize;
        let mut cursor = tag_end + 1;
        let mut end = text.len();
        while depth > 0 {
            let next_open = find_open_tag(&lower, &open, cursor);
            let next_close = lower[cursor..].find(&close).map(|c| cursor + c);
            match (next_open, next_close) {
                (Some(o), Some(c)) if o < c => {
                    depth += 1;
                    cursor = o + open.len();
                }
                (_, Some(c)) => {
                    depth -= 1;
                    cursor = c + close.len();
                    if depth == 0 {
                        end = cursor;
                    }
                }
                (_, None) => break,
            }
        }
        out.push(' ');
        pos = end;
    }
    out.push_str(&text[pos..]);
    out
}

fn find_open_tag(lower: &str, open: &str, from: usize) -> Option<usize> {
    let mut cursor = from;
    while let Some(rel) = lower[cursor..].find(open) {
        let at = cursor + rel;
        match lower.as_bytes().get(at + open.len()) {
            Some(b' ' | b'>' | b'\t' | b'\n' | b'/') => return Some(at),
            _ => cursor = at + open.len(),
        }
    }
    None
}

fn heading_regex() -> &'static Regex {
    static R: OnceLock<Regex> = OnceLock::new();
    R.get_or_init(|| Regex::new(r"(?i)<h([1-6])[\s>]").unwrap())
}

/// Returns the raw markup of the section whose anchor id is `fragment`, or
/// of the lead section when `fragment` is `None`. `None` is returned when the
/// anchor does not exist.
pub fn extract_section(page: &str, fragment: Option<&str>, scope: SectionScope) -> Option<String> {
    let headings: Vec<(usize, u8)> =
        heading_regex().captures_iter(page).map(|c| (c.get(0).unwrap().start(), c[1].as_bytes()[0] - b'0')).collect();

    let Some(fragment) = fragment.filter(|f| !f.is_empty()) else {
        let lower = page.to_ascii_lowercase();
        let mut start = lower
            .find("mw-parser-output")
            .and_then(|p| lower[p..].find('>').map(|e| p + e + 1))
            .or_else(|| lower.find("<body").and_then(|p| lower[p..].find('>').map(|e| p + e + 1)))
            .unwrap_or(0);
        if let Some(h1_end) = lower[start..].find("</h1>") {
            start += h1_end + "</h1>".len();
        }
        let end = headings
            .iter()
            .find(|(pos, level)| *pos >= start && *level >= 2)
            .map(|(pos, _)| *pos)
            .unwrap_or(page.len());
        return Some(page[start..end].to_string());
    };

    let candidates = [fragment.to_string(), fragment.replace(' ', "_"), fragment.replace('_', " ")];
    let id_pos = candidates
        .iter()
        .find_map(|id| page.find(&format!("id=\"{id}\"")).or_else(|| page.find(&format!("id='{id}'"))))?;

    // The heading holding the anchor, if any.
    let lower = page.to_ascii_lowercase();
    let enclosing = headings.iter().rev().find(|(pos, _)| *pos <= id_pos).and_then(|(pos, level)| {
        let close = format!("</h{level}>");
        let close_pos = lower[*pos..].find(&close).map(|c| pos + c)?;
        (close_pos > id_pos).then_some((*level, close_pos + close.len()))
    });
    let (level, start) = match enclosing {
        Some(found) => found,
        None => (6, lower[id_pos..].find('>').map(|e| id_pos + e + 1).unwrap_or(page.len())),
    };
    let end = headings
        .iter()
        .find(|(pos, l)| {
            *pos >= start
                && match scope {
                    SectionScope::WithSubsections => *l <= level,
                    SectionScope::SectionOnly => true,
                }
        })
        .map(|(pos, _)| *pos)
        .unwrap_or(page.len());
    Some(page[start..end].to_string())
}
