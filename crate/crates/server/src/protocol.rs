//! Wire format: JSON-RPC 2.0 style envelopes, one JSON object per message.
//!
//! Requests carry an `id` and always get exactly one response; messages
//! without an `id` are notifications and get none. Errors use the standard
//! JSON-RPC numbers for envelope problems and `-32000` and below for
//! domain errors, with the stable error name in `data.name`.

use livediag_core::edit::{AnchorEnd, InteractionKind, InteractionParams};
use livediag_core::syntax::TextEdit;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ServerError {
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("method `{0}` not found")]
    MethodNotFound(String),
    #[error("invalid params: {0}")]
    InvalidParams(String),
    #[error("document `{0}` is not open")]
    UnknownDocument(String),
    #[error("expected version {expected}, got {found}")]
    VersionMismatch { expected: u64, found: u64 },
    #[error("{message}")]
    NotEditable { message: String, start: usize, end: usize },
    #[error("interaction is stale: expected version {expected}, found {found}")]
    SessionStale { expected: u64, found: u64 },
    #[error("no interaction in progress")]
    NoActiveInteraction,
    #[error("an interaction is already in progress")]
    InteractionActive,
    #[error("no element `{0}` in the current diagram")]
    UnknownElement(String),
    #[error("unsupported export format `{0}`")]
    UnsupportedFormat(String),
    #[error("no successful render yet")]
    NoRender,
    #[error("edits do not apply: {0}")]
    InvalidEdit(String),
}

impl ServerError {
    pub fn name(&self) -> &'static str {
        match self {
            ServerError::ParseError(_) => "ParseError",
            ServerError::InvalidRequest(_) => "InvalidRequest",
            ServerError::MethodNotFound(_) => "MethodNotFound",
            ServerError::InvalidParams(_) => "InvalidParams",
            ServerError::UnknownDocument(_) => "UnknownDocument",
            ServerError::VersionMismatch { .. } => "VersionMismatch",
            ServerError::NotEditable { .. } => "NotEditable",
            ServerError::SessionStale { .. } => "SessionStale",
            ServerError::NoActiveInteraction => "NoActiveInteraction",
            ServerError::InteractionActive => "InteractionActive",
            ServerError::UnknownElement(_) => "UnknownElement",
            ServerError::UnsupportedFormat(_) => "UnsupportedFormat",
            ServerError::NoRender => "NoRender",
            ServerError::InvalidEdit(_) => "InvalidEdit",
        }
    }

    pub fn code(&self) -> i64 {
        match self {
            ServerError::ParseError(_) => -32700,
            ServerError::InvalidRequest(_) => -32600,
            ServerError::MethodNotFound(_) => -32601,
            ServerError::InvalidParams(_) => -32602,
            ServerError::UnknownDocument(_) => -32001,
            ServerError::VersionMismatch { .. } => -32002,
            ServerError::NotEditable { .. } => -32003,
            ServerError::SessionStale { .. } => -32004,
            ServerError::NoActiveInteraction => -32005,
            ServerError::InteractionActive => -32006,
            ServerError::UnknownElement(_) => -32007,
            ServerError::UnsupportedFormat(_) => -32008,
            ServerError::NoRender => -32009,
            ServerError::InvalidEdit(_) => -32010,
        }
    }

    fn data(&self) -> Value {
        let mut data = json!({ "name": self.name() });
        match self {
            ServerError::VersionMismatch { expected, found } | ServerError::SessionStale { expected, found } => {
                data["expected"] = json!(expected);
                data["found"] = json!(found);
            }
            ServerError::NotEditable { start, end, .. } => data["span"] = json!({ "start": start, "end": end }),
            _ => {}
        }
        data
    }

    pub fn to_json(&self) -> Value {
        json!({ "code": self.code(), "message": self.to_string(), "data": self.data() })
    }
}

/// A decoded incoming message.
#[derive(Debug, Clone, PartialEq)]
pub struct Incoming {
    /// `None` for notifications.
    pub id: Option<Value>,
    pub method: String,
    pub params: Value,
}

/// Decode one message. On failure returns the id to answer (if one could be
/// recovered) with the error.
pub fn decode(text: &str) -> Result<Incoming, (Value, ServerError)> {
    let value: Value = serde_json::from_str(text).map_err(|e| (Value::Null, ServerError::ParseError(e.to_string())))?;
    let Value::Object(mut obj) = value else {
        return Err((Value::Null, ServerError::InvalidRequest("message must be a JSON object".into())));
    };
    let id = match obj.remove("id") {
        None => None,
        Some(id @ (Value::Number(_) | Value::String(_) | Value::Null)) => Some(id),
        Some(_) => return Err((Value::Null, ServerError::InvalidRequest("id must be a number, string or null".into()))),
    };
    let answer = id.clone().unwrap_or(Value::Null);
    let method = match obj.remove("method") {
        Some(Value::String(m)) => m,
        _ => return Err((answer, ServerError::InvalidRequest("missing method".into()))),
    };
    let params = match obj.remove("params") {
        None | Some(Value::Null) => Value::Object(Default::default()),
        Some(p @ Value::Object(_)) => p,
        Some(_) => return Err((answer, ServerError::InvalidParams("params must be an object".into()))),
    };
    Ok(Incoming { id, method, params })
}

pub fn response(id: &Value, result: Value) -> String {
    json!({ "jsonrpc": "2.0", "id": id, "result": result }).to_string()
}

pub fn error_response(id: &Value, err: &ServerError) -> String {
    json!({ "jsonrpc": "2.0", "id": id, "error": err.to_json() }).to_string()
}

pub fn notification(method: &str, params: Value) -> String {
    json!({ "jsonrpc": "2.0", "method": method, "params": params }).to_string()
}

pub fn parse_params<T: for<'de> Deserialize<'de>>(params: Value) -> Result<T, ServerError> {
    serde_json::from_value(params).map_err(|e| ServerError::InvalidParams(e.to_string()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OpenParams {
    pub uri: String,
    pub text: String,
}

/// Either a list of edits or a whole replacement text.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ChangeParams {
    pub uri: String,
    pub version: u64,
    #[serde(default)]
    pub edits: Option<Vec<TextEdit>>,
    #[serde(default)]
    pub text: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct UriParams {
    pub uri: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StartParams {
    pub uri: String,
    pub element_id: String,
    pub kind: InteractionKind,
    #[serde(default)]
    pub anchor_end: AnchorEnd,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct UpdateParams {
    pub uri: String,
    pub params: InteractionParams,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EndParams {
    pub uri: String,
    #[serde(default)]
    pub params: Option<InteractionParams>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RevealParams {
    pub uri: String,
    pub element_id: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExportParams {
    pub uri: String,
    pub format: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StatsParams {
    #[serde(default)]
    pub uri: Option<String>,
}

/// Execution counters of one document, as reported by `debug/stats`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DocumentStats {
    pub version: u64,
    pub seq: u64,
    pub started: u64,
    pub completed: u64,
    pub coalesced: u64,
    pub in_flight: usize,
    pub max_in_flight: usize,
    pub interaction_active: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_shapes() {
        assert!(matches!(decode("{"), Err((Value::Null, ServerError::ParseError(_)))));
        assert!(matches!(decode("[1]"), Err((_, ServerError::InvalidRequest(_)))));
        assert!(matches!(decode(r#"{"id":{},"method":"x"}"#), Err((Value::Null, ServerError::InvalidRequest(_)))));
        let (id, err) = decode(r#"{"id":4,"params":{}}"#).unwrap_err();
        assert_eq!((id, err.name()), (json!(4), "InvalidRequest"));
        let (id, err) = decode(r#"{"id":"a","method":"m","params":[1]}"#).unwrap_err();
        assert_eq!((id, err.name()), (json!("a"), "InvalidParams"));
        let ok = decode(r#"{"jsonrpc":"2.0","id":1,"method":"m"}"#).unwrap();
        assert_eq!(ok, Incoming { id: Some(json!(1)), method: "m".into(), params: json!({}) });
        assert_eq!(decode(r#"{"method":"n"}"#).unwrap().id, None);
    }

    #[test]
    fn error_json_carries_name() {
        let e = ServerError::VersionMismatch { expected: 3, found: 5 };
        let v = e.to_json();
        assert_eq!(v["code"], -32002);
        assert_eq!(v["data"]["name"], "VersionMismatch");
        assert_eq!(v["data"]["expected"], 3);
    }
}
