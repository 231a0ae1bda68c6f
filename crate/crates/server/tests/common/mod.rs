#![allow(dead_code)]

use std::time::Duration;

use livediag_server::{Client, Connection, Server, ServerConfig};
use serde_json::{json, Value};

pub mod fuzz;

pub const URI: &str = "mem://test.diagram";

pub const TWO_CLASSES: &str = "classDiagram {\n  class(\"A\") {\n    layout {\n      pos = apos(100, 200)\n    }\n  }\n  class(\"B\") {\n    layout {\n      pos = apos(400, 200)\n    }\n  }\n  A --> B\n}\n";

pub fn start(config: ServerConfig) -> (Server, Client<Connection>) {
    let server = Server::start(config);
    let client = Client::new(server.connect());
    (server, client)
}

pub fn delayed(ms: u64) -> ServerConfig {
    ServerConfig { execution_delay: Duration::from_millis(ms), ..Default::default() }
}

/// Open `text` and wait for its first full update.
pub fn open(client: &mut Client<Connection>, text: &str) -> Value {
    client.request("document/open", json!({ "uri": URI, "text": text })).expect("open");
    client.wait_for("diagram/update", |_| true).expect("first full update")["params"].clone()
}

pub fn node<'a>(model: &'a Value, id: &str) -> Option<&'a Value> {
    if model["id"] == id {
        return Some(model);
    }
    model["children"].as_array()?.iter().find_map(|c| node(c, id))
}

pub fn position(update: &Value, id: &str) -> (f64, f64) {
    let n = node(&update["renderModel"]["root"], id).unwrap_or_else(|| panic!("no {id}"));
    (n["x"].as_f64().unwrap(), n["y"].as_f64().unwrap())
}

pub fn stats(client: &mut Client<Connection>) -> Value {
    client.request("debug/stats", json!({ "uri": URI })).expect("stats")
}
