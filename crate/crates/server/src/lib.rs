//! Session server for live diagrams: documents, scheduled executions,
//! graphical interactions and export over a JSON message protocol.

pub mod client;
pub mod protocol;
pub mod server;
pub mod transport;

pub use client::{Client, Link, RpcError, WsLink};
pub use server::{Connection, Connector, Server, ServerConfig};
