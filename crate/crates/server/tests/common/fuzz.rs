//! Random and malformed protocol messages.

use proptest::prelude::*;
use serde_json::{json, Value};

use livediag_server::{Client, Connection};

use super::URI;

const METHODS: &[&str] = &[
    "initialize",
    "document/open",
    "document/change",
    "document/close",
    "document/subscribe",
    "interaction/start",
    "interaction/update",
    "interaction/end",
    "source/reveal",
    "diagram/export",
    "debug/stats",
    "bogus",
];

pub fn junk() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::from),
        any::<i64>().prop_map(Value::from),
        (-1e6f64..1e6).prop_map(Value::from),
        "[a-zA-Z/0-9 ]{0,12}".prop_map(Value::from),
        Just(json!(URI)),
        Just(json!("canvas0/canvasElement0")),
        Just(json!("moveElement")),
    ];
    leaf.prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Value::from),
            prop::collection::btree_map(
                prop::sample::select(vec!["uri", "text", "version", "edits", "elementId", "kind", "params", "dx", "format"]),
                inner,
                0..5
            )
            .prop_map(|m| Value::Object(m.into_iter().map(|(k, v)| (k.to_owned(), v)).collect())),
        ]
    })
}

pub fn message() -> impl Strategy<Value = String> {
    prop_oneof![
        "\\PC{0,40}",
        (prop::sample::select(METHODS), junk(), prop::option::of(0u32..1000)).prop_map(|(m, p, id)| {
            let mut v = json!({ "jsonrpc": "2.0", "method": m, "params": p });
            if let Some(id) = id {
                v["id"] = json!(format!("fuzz-{id}"));
            }
            v.to_string()
        }),
    ]
}

/// Send `batch`, then wait for an answer to each request in it, in order.
/// Returns how many requests were answered.
pub fn exchange(c: &mut Client<Connection>, batch: &[String]) -> Result<usize, String> {
    for m in batch {
        c.send_raw(m.clone());
    }
    let mut answered = 0;
    for m in batch {
        let id = serde_json::from_str::<Value>(m).ok().and_then(|v| v.get("id").cloned());
        let Some(id) = id.filter(|id| id.as_str().is_some_and(|s| s.starts_with("fuzz-"))) else { continue };
        let answer = c.response(&id).ok_or_else(|| format!("no answer to {m}"))?;
        if answer.get("result").is_some() == answer.get("error").is_some() {
            return Err(format!("malformed answer {answer} to {m}"));
        }
        answered += 1;
    }
    Ok(answered)
}
