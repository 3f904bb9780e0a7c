//! Inline speech markers compiled to a small SSML subset.
//!
//! | marker | output |
//! |---|---|
//! | `[[pause:500ms]]` | `<break time="500ms"/>` |
//! | `[[emph:text]]` | `<emphasis>text</emphasis>` |
//! | `[[sayas:characters:text]]` | `<say-as interpret-as="characters">text</say-as>` |
//! | `[[prosody:slow:text]]` | `<prosody rate="slow">text</prosody>` |

use std::sync::LazyLock;

use regex::Regex;

use crate::text::squash_whitespace;

static MARKER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[\[([^\]]*)\]\]").expect("marker regex"));
static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<[^>]*>").expect("tag regex"));
static DURATION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\d+(ms|s)$").expect("duration regex"));
static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[a-z-]+$").expect("word regex"));

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SsmlError {
    #[error("unknown speech marker `[[{0}]]`")]
    UnknownMarker(String),
    #[error("malformed speech marker `[[{0}]]`")]
    Malformed(String),
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

fn unescape(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

/// Compiles one marker body into (spoken markup, displayed text).
fn compile(body: &str) -> Result<(String, String), SsmlError> {
    let malformed = || SsmlError::Malformed(body.to_string());
    let (name, rest) = body.split_once(':').ok_or_else(|| SsmlError::UnknownMarker(body.to_string()))?;
    match name {
        "pause" if DURATION.is_match(rest) => Ok((format!("<break time=\"{rest}\"/>"), String::new())),
        "pause" => Err(malformed()),
        "emph" if !rest.trim().is_empty() => Ok((format!("<emphasis>{}</emphasis>", escape(rest)), rest.to_string())),
        "sayas" | "prosody" => {
            let (attr, text) = rest.split_once(':').ok_or_else(malformed)?;
            if !WORD.is_match(attr) || text.trim().is_empty() {
                return Err(malformed());
            }
            let t = escape(text);
            Ok(if name == "sayas" {
                (format!("<say-as interpret-as=\"{attr}\">{t}</say-as>"), text.to_string())
            } else {
                (format!("<prosody rate=\"{attr}\">{t}</prosody>"), text.to_string())
            })
        }
        "emph" => Err(malformed()),
        _ => Err(SsmlError::UnknownMarker(body.to_string())),
    }
}

/// Returns `(display_text, ssml_text)`. Whitespace is squashed in both.
pub fn emit_ssml(marked: &str) -> Result<(String, String), SsmlError> {
    let mut display = String::new();
    let mut ssml = String::new();
    let mut last = 0;
    for m in MARKER.captures_iter(marked) {
        let whole = m.get(0).expect("match");
        let plain = &marked[last..whole.start()];
        display.push_str(plain);
        ssml.push_str(&escape(plain));
        let (spoken, shown) = compile(&m[1])?;
        display.push_str(&shown);
        ssml.push_str(&spoken);
        last = whole.end();
    }
    let tail = &marked[last..];
    display.push_str(tail);
    ssml.push_str(&escape(tail));
    Ok((squash_whitespace(&display), format!("<speak>{}</speak>", squash_whitespace(&ssml))))
}

/// Speech markup for text that carries no markers or whose markers failed
/// to compile; everything is spoken as written.
pub fn plain_ssml(text: &str) -> (String, String) {
    let display = squash_whitespace(text);
    let ssml = format!("<speak>{}</speak>", escape(&display));
    (display, ssml)
}

/// Text content of SSML with tags removed, entities decoded and whitespace
/// squashed.
pub fn strip_tags(ssml: &str) -> String {
    squash_whitespace(&unescape(&TAG.replace_all(ssml, "")))
}
