//! Blocking protocol client, used by tests, the acceptance suite and
//! benchmarks. Notifications that arrive while waiting for a response are
//! buffered in order.

use std::collections::VecDeque;
use std::net::TcpStream;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

use crate::server::Connection;

/// A message pipe to a server.
pub trait Link {
    fn send(&mut self, text: String);
    fn recv_timeout(&mut self, timeout: Duration) -> Option<String>;
}

impl Link for Connection {
    fn send(&mut self, text: String) {
        Connection::send(self, text);
    }

    fn recv_timeout(&mut self, timeout: Duration) -> Option<String> {
        self.outgoing.recv_timeout(timeout).ok()
    }
}

pub struct WsLink {
    ws: WebSocket<MaybeTlsStream<TcpStream>>,
}

impl WsLink {
    pub fn connect(url: &str) -> Result<WsLink, tungstenite::Error> {
        let (ws, _) = tungstenite::connect(url)?;
        Ok(WsLink { ws })
    }
}

impl Link for WsLink {
    fn send(&mut self, text: String) {
        let _ = self.ws.send(Message::Text(text));
    }

    fn recv_timeout(&mut self, timeout: Duration) -> Option<String> {
        if let MaybeTlsStream::Plain(s) = self.ws.get_ref() {
            let _ = s.set_read_timeout(Some(timeout.max(Duration::from_millis(1))));
        }
        loop {
            match self.ws.read() {
                Ok(Message::Text(t)) => return Some(t),
                Ok(Message::Close(_)) | Err(_) => return None,
                Ok(_) => continue,
            }
        }
    }
}

/// Error half of a response.
#[derive(Debug, Clone, PartialEq)]
pub struct RpcError(pub Value);

impl RpcError {
    pub fn name(&self) -> &str {
        self.0["data"]["name"].as_str().unwrap_or("")
    }
}

pub struct Client<L: Link> {
    link: L,
    next_id: u64,
    buffered: VecDeque<Value>,
    pub timeout: Duration,
}

impl<L: Link> Client<L> {
    pub fn new(link: L) -> Self {
        Client { link, next_id: 1, buffered: VecDeque::new(), timeout: Duration::from_secs(30) }
    }

    pub fn send_raw(&mut self, text: impl Into<String>) {
        self.link.send(text.into());
    }

    /// Send a request and return its id without waiting.
    pub fn send_request(&mut self, method: &str, params: Value) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        self.link.send(json!({ "jsonrpc": "2.0", "id": id, "method": method, "params": params }).to_string());
        id
    }

    pub fn notify(&mut self, method: &str, params: Value) {
        self.link.send(json!({ "jsonrpc": "2.0", "method": method, "params": params }).to_string());
    }

    /// Wait for the response with `id`; notifications are buffered.
    pub fn response(&mut self, id: &Value) -> Option<Value> {
        let deadline = Instant::now() + self.timeout;
        loop {
            let left = deadline.checked_duration_since(Instant::now())?;
            let msg: Value = serde_json::from_str(&self.link.recv_timeout(left)?).ok()?;
            if msg.get("id").is_some() && msg.get("method").is_none() {
                if &msg["id"] == id {
                    return Some(msg);
                }
            } else {
                self.buffered.push_back(msg);
            }
        }
    }

    pub fn request(&mut self, method: &str, params: Value) -> Result<Value, RpcError> {
        let id = self.send_request(method, params);
        let msg = self.response(&json!(id)).unwrap_or_else(|| panic!("no response to {method}"));
        match msg.get("error") {
            Some(e) => Err(RpcError(e.clone())),
            None => Ok(msg["result"].clone()),
        }
    }

    /// Next notification, buffered or fresh.
    pub fn next_notification(&mut self, timeout: Duration) -> Option<Value> {
        if let Some(n) = self.buffered.pop_front() {
            return Some(n);
        }
        let deadline = Instant::now() + timeout;
        loop {
            let left = deadline.checked_duration_since(Instant::now())?;
            let msg: Value = serde_json::from_str(&self.link.recv_timeout(left)?).ok()?;
            if msg.get("method").is_some() {
                return Some(msg);
            }
        }
    }

    /// Skip notifications until one with `method` satisfies `pred`. Skipped
    /// notifications are dropped.
    pub fn wait_for(&mut self, method: &str, mut pred: impl FnMut(&Value) -> bool) -> Option<Value> {
        let deadline = Instant::now() + self.timeout;
        loop {
            let left = deadline.checked_duration_since(Instant::now())?;
            let n = self.next_notification(left)?;
            if n["method"] == method && pred(&n["params"]) {
                return Some(n);
            }
        }
    }

    /// Everything that arrives within `quiet` of the previous message.
    pub fn drain(&mut self, quiet: Duration) -> Vec<Value> {
        let mut out = Vec::new();
        while let Some(n) = self.next_notification(quiet) {
            out.push(n);
        }
        out
    }
}
