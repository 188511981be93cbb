//! Canonical JSON serialization and content hashing.
//!
//! Canonical form: UTF-8, object keys sorted, no insignificant whitespace,
//! `\n` line endings inside strings are left as-is (callers normalize CRLF
//! before hashing where the contract asks for it).

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Serialize `value` to canonical JSON bytes.
///
/// Going through `serde_json::Value` sorts every object's keys because the
/// default map backend is a `BTreeMap`.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> String {
    let tree = serde_json::to_value(value).expect("domain values always serialize");
    serde_json::to_string(&tree).expect("json values always serialize")
}

/// Canonical JSON terminated by a single LF, the on-disk form.
pub fn to_canonical_line<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = to_canonical_string(value);
    s.push('\n');
    s
}

/// Lower-case hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}

/// Short content id: a prefix plus the first 16 hex digits (64 bits) of the
/// SHA-256 of the canonical serialization.
pub fn content_id<T: Serialize + ?Sized>(prefix: &str, value: &T) -> String {
    let digest = sha256_hex(to_canonical_string(value));
    format!("{prefix}{}", &digest[..16])
}

/// Replace CRLF and lone CR with LF.
pub fn normalize_newlines(text: &str) -> String {
    if !text.contains('\r') {
        return text.to_owned();
    }
    text.replace("\r\n", "\n").replace('\r', "\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_are_sorted_and_compact() {
        let v = json!({"b": 1, "a": {"z": true, "c": [1, 2]}});
        assert_eq!(to_canonical_string(&v), r#"{"a":{"c":[1,2],"z":true},"b":1}"#);
    }

    #[test]
    fn crlf_normalization() {
        assert_eq!(normalize_newlines("a\r\nb\rc\n"), "a\nb\nc\n");
    }

    #[test]
    fn content_id_is_stable() {
        let a = content_id("x-", &json!({"k": "v"}));
        let b = content_id("x-", &json!({"k": "v"}));
        assert_eq!(a, b);
        assert_eq!(a.len(), 2 + 16);
    }
}
