//! HTTP request parsing and obfuscation-stripping decode.
//!
//! The parser is deliberately lenient (corpus files mix CRLF and LF, and
//! attack traffic is rarely well-formed) but total: any input either parses
//! or yields [`ParseError::MalformedRequest`]. Parsed parts re-serialize to
//! the original bytes for CRLF-delimited input; LF-only input is accepted
//! and canonicalized to CRLF.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Header names whose values are folded into the inspection payload by
/// default: the fields attackers routinely smuggle payloads through.
pub const DEFAULT_HEADER_ALLOWLIST: [&str; 3] = ["cookie", "user-agent", "referer"];

/// Default cap on fixpoint decoding passes.
pub const DEFAULT_DECODE_ROUNDS: usize = 5;

/// Parse failure. Anything that is not a request line plus headers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed request: {0}")]
    MalformedRequest(String),
}

/// A single header, with the value bytes after the colon kept verbatim so
/// re-serialization is byte-exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub name: String,
    raw_value: String,
}

impl Header {
    pub fn new(name: impl Into<String>, value: impl Into<String>) -> Self {
        Header {
            name: name.into(),
            raw_value: format!(" {}", value.into()),
        }
    }

    /// The value with surrounding optional whitespace trimmed.
    pub fn value(&self) -> &str {
        self.raw_value.trim_matches([' ', '\t'])
    }

    /// Case-insensitive name match.
    pub fn is(&self, name: &str) -> bool {
        self.name.eq_ignore_ascii_case(name)
    }
}

/// A parsed HTTP/1.x request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub method: String,
    /// The full request target as it appeared on the request line.
    pub target: String,
    /// Target up to the first `?`.
    pub path: String,
    /// Raw query string after the first `?` (empty when absent).
    pub raw_query: String,
    /// Query pairs: split on `&`, then on the first `=` (a segment without
    /// `=` becomes a pair with an empty value).
    pub query: Vec<(String, String)>,
    pub version: String,
    pub headers: Vec<Header>,
    pub body: String,
    /// The original request text, verbatim.
    pub raw: String,
    blank_line_seen: bool,
}

impl HttpRequest {
    /// First header matching `name`, case-insensitively.
    pub fn header(&self, name: &str) -> Option<&Header> {
        self.headers.iter().find(|h| h.is(name))
    }

    /// Re-serializes the parsed parts. Byte-identical to [`Self::raw`] for
    /// CRLF input.
    pub fn to_raw(&self) -> String {
        let mut out = String::with_capacity(self.raw.len());
        out.push_str(&self.method);
        out.push(' ');
        out.push_str(&self.target);
        out.push(' ');
        out.push_str(&self.version);
        out.push_str("\r\n");
        for h in &self.headers {
            out.push_str(&h.name);
            out.push(':');
            out.push_str(&h.raw_value);
            out.push_str("\r\n");
        }
        if self.blank_line_seen || !self.body.is_empty() {
            out.push_str("\r\n");
            out.push_str(&self.body);
        }
        out
    }
}

/// Splits off one line, accepting `\r\n` or bare `\n` terminators.
/// Returns (line, rest, had_terminator).
fn next_line(text: &str) -> (&str, &str, bool) {
    match text.find('\n') {
        Some(idx) => {
            let line = &text[..idx];
            let line = line.strip_suffix('\r').unwrap_or(line);
            (line, &text[idx + 1..], true)
        }
        None => (text, "", false),
    }
}

/// Parses a raw request. Total: every input yields a request or a
/// [`ParseError::MalformedRequest`].
pub fn parse_raw_request(text: &str) -> Result<HttpRequest, ParseError> {
    let (request_line, mut rest, _) = next_line(text);
    let parts: Vec<&str> = request_line.split(' ').collect();
    if parts.len() < 3 {
        return Err(ParseError::MalformedRequest(format!(
            "request line has {} space-separated parts, need at least 3",
            parts.len()
        )));
    }
    let method = parts[0];
    if method.is_empty() || !method.bytes().all(|b| b.is_ascii_graphic()) {
        return Err(ParseError::MalformedRequest(
            "method is not a non-empty ASCII token".into(),
        ));
    }
    let version = parts[parts.len() - 1];
    if !version.starts_with("HTTP/") {
        return Err(ParseError::MalformedRequest(format!(
            "version {version:?} does not start with \"HTTP/\""
        )));
    }
    // Rejoining interior parts keeps round-trip fidelity for targets that
    // contain (technically invalid) spaces.
    let target = parts[1..parts.len() - 1].join(" ");

    let mut headers = Vec::new();
    let mut blank_line_seen = false;
    let body;
    loop {
        if rest.is_empty() {
            body = "";
            break;
        }
        let (line, after, _) = next_line(rest);
        if line.is_empty() {
            blank_line_seen = true;
            body = after;
            break;
        }
        let colon = line.find(':').ok_or_else(|| {
            ParseError::MalformedRequest(format!("header line without colon: {line:?}"))
        })?;
        let name = &line[..colon];
        if name.is_empty() || name.contains(' ') || name.contains('\t') {
            return Err(ParseError::MalformedRequest(format!(
                "invalid header name in line {line:?}"
            )));
        }
        headers.push(Header {
            name: name.to_string(),
            raw_value: line[colon + 1..].to_string(),
        });
        rest = after;
    }

    let (path, raw_query) = match target.find('?') {
        Some(idx) => (&target[..idx], &target[idx + 1..]),
        None => (target.as_str(), ""),
    };
    let query = parse_query(raw_query);

    Ok(HttpRequest {
        method: method.to_string(),
        path: path.to_string(),
        raw_query: raw_query.to_string(),
        query,
        target: target.clone(),
        version: version.to_string(),
        headers,
        body: body.to_string(),
        raw: text.to_string(),
        blank_line_seen,
    })
}

/// Splits a raw query string into pairs: `&`-separated segments, each split
/// on the first `=`. Empty segments are dropped.
pub fn parse_query(raw_query: &str) -> Vec<(String, String)> {
    raw_query
        .split('&')
        .filter(|seg| !seg.is_empty())
        .map(|seg| match seg.find('=') {
            Some(idx) => (seg[..idx].to_string(), seg[idx + 1..].to_string()),
            None => (seg.to_string(), String::new()),
        })
        .collect()
}

/// How `+` is treated during a percent-decoding pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlusMode {
    /// `+` is an ordinary character (paths, header values).
    Literal,
    /// `+` decodes to a space (form-encoded query strings and bodies).
    Space,
}

fn hex_val(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

/// One percent-decoding pass over the raw bytes. Invalid escapes pass
/// through verbatim; decoded bytes that break UTF-8 become U+FFFD.
fn percent_pass(s: &str, plus: PlusMode) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' if i + 2 < bytes.len() => {
                if let (Some(hi), Some(lo)) = (hex_val(bytes[i + 1]), hex_val(bytes[i + 2])) {
                    out.push(hi << 4 | lo);
                    i += 3;
                } else {
                    out.push(b'%');
                    i += 1;
                }
            }
            b'+' if plus == PlusMode::Space => {
                out.push(b' ');
                i += 1;
            }
            b => {
                out.push(b);
                i += 1;
            }
        }
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// One HTML-entity pass: the five named entities plus numeric character
/// references. Anything unrecognized passes through verbatim.
fn entity_pass(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let mut consumed = 0;
        for (entity, ch) in [("&lt;", '<'), ("&gt;", '>'), ("&amp;", '&'), ("&quot;", '"')] {
            if rest.starts_with(entity) {
                out.push(ch);
                consumed = entity.len();
                break;
            }
        }
        if consumed == 0 {
            if let Some((ch, len)) = numeric_reference(rest) {
                out.push(ch);
                consumed = len;
            }
        }
        if consumed == 0 {
            out.push('&');
            consumed = 1;
        }
        rest = &rest[consumed..];
    }
    out.push_str(rest);
    out
}

/// Parses a numeric character reference (`&#39;`, `&#x27;`) at the start of
/// `s`, returning the character and the byte length consumed.
fn numeric_reference(s: &str) -> Option<(char, usize)> {
    let body = s.strip_prefix("&#")?;
    let (digits, radix) = match body.strip_prefix(['x', 'X']) {
        Some(hex) => (hex, 16),
        None => (body, 10),
    };
    let end = digits.find(';')?;
    if end == 0 || end > 6 {
        return None;
    }
    let code = u32::from_str_radix(&digits[..end], radix).ok()?;
    let ch = char::from_u32(code)?;
    // consumed: "&#" + optional x + digits + ";"
    let prefix = s.len() - digits.len();
    Some((ch, prefix + end + 1))
}

fn decode_pass(s: &str, plus: PlusMode) -> String {
    entity_pass(&percent_pass(s, plus))
}

/// Repeatedly percent- and entity-decodes until a pass changes nothing or
/// `max_rounds` is reached. Returns the decoded string and the number of
/// passes applied (the final, confirming pass counts).
pub fn decode_fixpoint(s: &str, max_rounds: usize, plus: PlusMode) -> (String, usize) {
    let max_rounds = max_rounds.max(1);
    let mut current = s.to_string();
    for round in 1..=max_rounds {
        let next = decode_pass(&current, plus);
        if next == current {
            return (current, round);
        }
        current = next;
    }
    (current, max_rounds)
}

/// Which request parts feed the inspection payload and how deep decoding
/// may recurse. Stored inside the model bundle so a verdict is a pure
/// function of (bundle, request).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InspectionConfig {
    /// Header names (case-insensitive) whose values are inspected, in order.
    pub header_allowlist: Vec<String>,
    /// Cap on fixpoint decoding passes per component.
    pub max_decode_rounds: usize,
}

impl Default for InspectionConfig {
    fn default() -> Self {
        InspectionConfig {
            header_allowlist: DEFAULT_HEADER_ALLOWLIST.iter().map(|s| s.to_string()).collect(),
            max_decode_rounds: DEFAULT_DECODE_ROUNDS,
        }
    }
}

/// The decoded text both detection layers classify.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InspectionPayload {
    /// Fixpoint-decoded path, query, body and allowlisted header values,
    /// joined by single spaces (empty components skipped).
    pub text: String,
    /// Maximum number of decoding passes any component needed.
    pub decode_rounds: usize,
}

/// Replaces body bytes outside printable ASCII with U+FFFD before decoding.
fn sanitize_body(body: &str) -> String {
    body.bytes()
        .map(|b| match b {
            0x20..=0x7e => b as char,
            _ => char::REPLACEMENT_CHARACTER,
        })
        .collect()
}

/// Builds the inspection payload: each component is fixpoint-decoded on its
/// own (`+` means space only in the query and body), then the non-empty
/// components join in fixed order: path, query, body, then headers in
/// allowlist order.
pub fn inspection_payload(req: &HttpRequest, cfg: &InspectionConfig) -> InspectionPayload {
    let mut components: Vec<(String, PlusMode)> = vec![
        (req.path.clone(), PlusMode::Literal),
        (req.raw_query.clone(), PlusMode::Space),
        (sanitize_body(&req.body), PlusMode::Space),
    ];
    for name in &cfg.header_allowlist {
        for header in req.headers.iter().filter(|h| h.is(name)) {
            components.push((header.value().to_string(), PlusMode::Literal));
        }
    }

    let mut parts = Vec::with_capacity(components.len());
    let mut rounds = 1;
    for (component, plus) in components {
        if component.is_empty() {
            continue;
        }
        let (decoded, r) = decode_fixpoint(&component, cfg.max_decode_rounds, plus);
        rounds = rounds.max(r);
        if !decoded.is_empty() {
            parts.push(decoded);
        }
    }
    InspectionPayload {
        text: parts.join(" "),
        decode_rounds: rounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_get() {
        let req = parse_raw_request("GET /index.html HTTP/1.1\r\nHost: a\r\n\r\n").unwrap();
        assert_eq!(req.method, "GET");
        assert_eq!(req.path, "/index.html");
        assert!(req.query.is_empty());
        assert_eq!(req.headers.len(), 1);
        assert_eq!(req.headers[0].name, "Host");
        assert_eq!(req.headers[0].value(), "a");
        assert!(req.body.is_empty());
    }

    #[test]
    fn parses_post_without_headers() {
        let req = parse_raw_request("POST /login HTTP/1.1\r\n\r\nuser=a&pass=b").unwrap();
        assert_eq!(req.method, "POST");
        assert_eq!(req.body, "user=a&pass=b");
        assert!(req.headers.is_empty());
    }

    #[test]
    fn query_splits_on_amp_then_first_equals() {
        let req = parse_raw_request("GET /a?x=1&flag HTTP/1.1\r\n\r\n").unwrap();
        assert_eq!(
            req.query,
            vec![("x".to_string(), "1".to_string()), ("flag".to_string(), String::new())]
        );
        let req = parse_raw_request("GET /a?k=v=w HTTP/1.1\r\n\r\n").unwrap();
        assert_eq!(req.query, vec![("k".to_string(), "v=w".to_string())]);
    }

    #[test]
    fn short_request_line_is_malformed() {
        assert!(matches!(
            parse_raw_request("GET /index.html"),
            Err(ParseError::MalformedRequest(_))
        ));
        assert!(matches!(
            parse_raw_request("GET /a NOTHTTP"),
            Err(ParseError::MalformedRequest(_))
        ));
        assert!(matches!(parse_raw_request(""), Err(ParseError::MalformedRequest(_))));
    }

    #[test]
    fn crlf_requests_round_trip_byte_exact() {
        for raw in [
            "GET /index.html HTTP/1.1\r\nHost: a\r\n\r\n",
            "POST /login HTTP/1.1\r\nHost:b\r\nCookie: s=1; t=2\r\n\r\nuser=a&pass=b",
            "GET /a?x=%271 HTTP/1.0\r\n\r\n",
            "GET /no-blank-line HTTP/1.1\r\nHost: x\r\n",
            "GET /a b HTTP/1.1\r\n\r\n",
        ] {
            let req = parse_raw_request(raw).unwrap();
            assert_eq!(req.to_raw(), raw, "round trip failed for {raw:?}");
        }
    }

    #[test]
    fn lf_requests_parse() {
        let req = parse_raw_request("GET /x HTTP/1.1\nHost: a\n\nbody").unwrap();
        assert_eq!(req.path, "/x");
        assert_eq!(req.body, "body");
    }

    #[test]
    fn decode_single_escape() {
        let (text, rounds) = decode_fixpoint("%27", 5, PlusMode::Literal);
        assert_eq!(text, "'");
        assert_eq!(rounds, 2);
    }

    #[test]
    fn decode_double_encoded() {
        let (text, _) = decode_fixpoint("%2527", 5, PlusMode::Literal);
        assert_eq!(text, "'");
    }

    #[test]
    fn decode_identity() {
        let (text, rounds) = decode_fixpoint("abc", 5, PlusMode::Literal);
        assert_eq!(text, "abc");
        assert_eq!(rounds, 1);
    }

    #[test]
    fn decode_entities_and_numeric_refs() {
        let (text, _) = decode_fixpoint("&lt;script&gt;&#39;x&#x27;&quot;", 5, PlusMode::Literal);
        assert_eq!(text, "<script>'x'\"");
        // &amp;lt; needs two passes
        let (text, rounds) = decode_fixpoint("&amp;lt;", 5, PlusMode::Literal);
        assert_eq!(text, "<");
        assert_eq!(rounds, 3);
    }

    #[test]
    fn invalid_escapes_pass_through() {
        let (text, rounds) = decode_fixpoint("100%zz &#; &#xquux; %2", 5, PlusMode::Literal);
        assert_eq!(text, "100%zz &#; &#xquux; %2");
        assert_eq!(rounds, 1);
    }

    #[test]
    fn plus_is_space_only_in_form_mode() {
        assert_eq!(decode_fixpoint("a+b", 5, PlusMode::Space).0, "a b");
        assert_eq!(decode_fixpoint("a+b", 5, PlusMode::Literal).0, "a+b");
    }

    #[test]
    fn decode_respects_round_cap() {
        let (text, rounds) = decode_fixpoint("%252527", 2, PlusMode::Literal);
        assert_eq!(text, "%27");
        assert_eq!(rounds, 2);
    }

    #[test]
    fn payload_single_component() {
        let req = parse_raw_request("GET /index.html HTTP/1.1\r\nHost: a\r\n\r\n").unwrap();
        let p = inspection_payload(&req, &InspectionConfig::default());
        assert_eq!(p.text, "/index.html");
    }

    #[test]
    fn payload_joins_and_decodes() {
        let req = parse_raw_request("GET /a?id=%27 HTTP/1.1\r\n\r\n").unwrap();
        let p = inspection_payload(&req, &InspectionConfig::default());
        assert_eq!(p.text, "/a id='");
    }

    #[test]
    fn payload_includes_body_and_allowlisted_headers() {
        let req =
            parse_raw_request("POST /f HTTP/1.1\r\nCookie: s=2\r\nX-Skip: nope\r\n\r\nq=1").unwrap();
        let p = inspection_payload(&req, &InspectionConfig::default());
        assert_eq!(p.text, "/f q=1 s=2");
    }

    #[test]
    fn payload_component_order_is_stable() {
        let req = parse_raw_request(
            "POST /p?a=1 HTTP/1.1\r\nReferer: r\r\nCookie: c\r\nUser-Agent: u\r\n\r\nb=2",
        )
        .unwrap();
        let p = inspection_payload(&req, &InspectionConfig::default());
        // path, query, body, then headers in allowlist order (cookie, ua, referer)
        assert_eq!(p.text, "/p a=1 b=2 c u r");
    }

    #[test]
    fn payload_sanitizes_non_printable_body() {
        let req = parse_raw_request("POST /f HTTP/1.1\r\n\r\na\x01b").unwrap();
        let p = inspection_payload(&req, &InspectionConfig::default());
        assert_eq!(p.text, "/f a\u{fffd}b");
    }

    #[test]
    fn decode_is_idempotent_at_fixpoint() {
        for s in ["%2527", "a+b%20c", "&amp;amp;lt;", "plain", "%"] {
            let (once, _) = decode_fixpoint(s, 8, PlusMode::Space);
            let (twice, rounds) = decode_fixpoint(&once, 8, PlusMode::Space);
            assert_eq!(once, twice);
            assert_eq!(rounds, 1);
        }
    }
}
