//! Minimal URL canonicalization for label keys.
//!
//! Only the scheme and host are case-folded, the fragment is dropped and a
//! port equal to the scheme's default is removed. Path and query are kept
//! byte-for-byte: two URLs that differ there may name different resources.

use thiserror::Error;

use crate::label::ItemId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UrlError {
    #[error("empty URL")]
    Empty,
    #[error("malformed URL: {0}")]
    Malformed(&'static str),
}

fn default_port(scheme: &str) -> Option<u16> {
    match scheme {
        "http" | "ws" => Some(80),
        "https" | "wss" => Some(443),
        "ftp" => Some(21),
        _ => None,
    }
}

fn valid_scheme(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

/// Canonicalizes an absolute `scheme://authority[path][?query][#fragment]`
/// URL into an [`ItemId`]. Leading and trailing ASCII whitespace is ignored.
pub fn canonicalize_url(raw: &str) -> Result<ItemId, UrlError> {
    let raw = raw.trim_matches(|c: char| c.is_ascii_whitespace());
    if raw.is_empty() {
        return Err(UrlError::Empty);
    }
    if raw.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(UrlError::Malformed("contains whitespace or control characters"));
    }

    let (scheme, rest) = raw
        .split_once(':')
        .ok_or(UrlError::Malformed("missing scheme"))?;
    if !valid_scheme(scheme) {
        return Err(UrlError::Malformed("invalid scheme"));
    }
    let rest = rest
        .strip_prefix("//")
        .ok_or(UrlError::Malformed("missing authority"))?;

    let rest = rest.split_once('#').map_or(rest, |(before, _)| before);
    let authority_end = rest.find(['/', '?']).unwrap_or(rest.len());
    let (authority, tail) = rest.split_at(authority_end);

    let (userinfo, hostport) = match authority.rfind('@') {
        Some(at) => (Some(&authority[..at]), &authority[at + 1..]),
        None => (None, authority),
    };

    let (host, port) = if hostport.starts_with('[') {
        let close = hostport
            .find(']')
            .ok_or(UrlError::Malformed("unterminated IPv6 literal"))?;
        let after = &hostport[close + 1..];
        let port = match after {
            "" => None,
            p => Some(
                p.strip_prefix(':')
                    .ok_or(UrlError::Malformed("garbage after IPv6 literal"))?,
            ),
        };
        (&hostport[..=close], port)
    } else {
        match hostport.rsplit_once(':') {
            Some((h, p)) => (h, Some(p)),
            None => (hostport, None),
        }
    };
    if host.is_empty() || host == "[]" {
        return Err(UrlError::Malformed("empty host"));
    }

    let scheme = scheme.to_ascii_lowercase();
    let port = match port {
        None | Some("") => None,
        Some(p) => {
            if !p.bytes().all(|b| b.is_ascii_digit()) {
                return Err(UrlError::Malformed("non-numeric port"));
            }
            let n: u16 = p.parse().map_err(|_| UrlError::Malformed("port out of range"))?;
            if default_port(&scheme) == Some(n) {
                None
            } else {
                Some(p)
            }
        }
    };

    let mut out = String::with_capacity(raw.len());
    out.push_str(&scheme);
    out.push_str("://");
    if let Some(userinfo) = userinfo {
        out.push_str(userinfo);
        out.push('@');
    }
    out.push_str(&host.to_ascii_lowercase());
    if let Some(port) = port {
        out.push(':');
        out.push_str(port);
    }
    out.push_str(tail);
    Ok(ItemId::from_canonical(out))
}
