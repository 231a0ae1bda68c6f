//! Byte transports for the message protocol: newline-delimited JSON over
//! stdio, and text frames over websocket. Both carry the same messages.

use std::io::{self, BufRead, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use log::{debug, info, warn};
use tungstenite::{Error as WsError, Message};

use crate::server::{Connection, Connector};

/// Serve one client on a line stream until the input ends. Every message
/// answered before end of input is written out before returning.
pub fn serve_lines(connector: &Connector, input: impl BufRead, output: impl Write + Send + 'static) -> io::Result<()> {
    let conn = connector.connect();
    let outgoing = conn.outgoing.clone();
    let writer = std::thread::spawn(move || -> io::Result<()> {
        let mut output = output;
        // ends once the coordinator drops this client after the disconnect
        for line in outgoing {
            output.write_all(line.as_bytes())?;
            output.write_all(b"\n")?;
            output.flush()?;
        }
        Ok(())
    });
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        conn.send(line);
    }
    drop(conn);
    writer.join().unwrap_or_else(|_| Err(io::Error::other("writer thread panicked")))
}

const POLL: Duration = Duration::from_millis(2);

/// Accept websocket clients until `stop` is set.
pub fn serve_websocket(listener: TcpListener, connector: Connector, stop: Arc<AtomicBool>) -> io::Result<()> {
    listener.set_nonblocking(true)?;
    info!("listening on ws://{}", listener.local_addr()?);
    while !stop.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, peer)) => {
                debug!("client {peer} connected");
                let conn = connector.connect();
                let stop = stop.clone();
                std::thread::spawn(move || {
                    if let Err(e) = websocket_client(stream, conn, &stop) {
                        debug!("client {peer}: {e}");
                    }
                });
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => std::thread::sleep(Duration::from_millis(10)),
            Err(e) => warn!("accept failed: {e}"),
        }
    }
    Ok(())
}

fn websocket_client(stream: TcpStream, conn: Connection, stop: &AtomicBool) -> Result<(), WsError> {
    stream.set_nonblocking(false)?;
    let mut ws = tungstenite::accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(e) => e,
        tungstenite::HandshakeError::Interrupted(_) => WsError::Io(io::Error::other("handshake interrupted")),
    })?;
    // short read timeouts let one thread alternate between both directions
    ws.get_ref().set_read_timeout(Some(POLL))?;
    while !stop.load(Ordering::Relaxed) {
        match ws.read() {
            Ok(Message::Text(text)) => conn.send(text),
            Ok(Message::Binary(bytes)) => conn.send(String::from_utf8_lossy(&bytes).into_owned()),
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(WsError::Io(e)) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
            Err(WsError::ConnectionClosed | WsError::AlreadyClosed) => break,
            Err(e) => return Err(e),
        }
        let mut wrote = false;
        while let Ok(text) = conn.outgoing.try_recv() {
            ws.write(Message::Text(text))?;
            wrote = true;
        }
        if wrote {
            ws.flush()?;
        }
    }
    let _ = ws.close(None);
    let _ = ws.flush();
    Ok(())
}
