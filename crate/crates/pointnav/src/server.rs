//! TCP and WebSocket front ends for a [`Bridge`].

use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, TryRecvError};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use log::{debug, info, warn};
use tungstenite::Message;

use crate::bridge::Bridge;
use crate::wire::{read_frame, write_frame, Session};

const ACCEPT_POLL: Duration = Duration::from_millis(20);
const WS_POLL: Duration = Duration::from_millis(10);

/// A running bridge service. Dropping it stops accepting new connections.
pub struct BridgeServer {
    tcp_addr: SocketAddr,
    ws_addr: Option<SocketAddr>,
    stop: Arc<AtomicBool>,
    acceptors: Vec<JoinHandle<()>>,
}

impl BridgeServer {
    /// Binds both listeners before returning, so a busy port fails here.
    pub fn start(bridge: Arc<Bridge>, tcp: &str, ws: Option<&str>) -> io::Result<Self> {
        let stop = Arc::new(AtomicBool::new(false));
        let tcp_listener = TcpListener::bind(tcp)?;
        let ws_listener = ws.map(TcpListener::bind).transpose()?;
        let tcp_addr = tcp_listener.local_addr()?;
        let ws_addr = ws_listener.as_ref().map(TcpListener::local_addr).transpose()?;

        let mut acceptors = Vec::new();
        {
            let (bridge, stop) = (bridge.clone(), stop.clone());
            acceptors.push(thread::spawn(move || accept_loop(tcp_listener, stop, move |s| serve_tcp(s, bridge.clone()))));
        }
        if let Some(l) = ws_listener {
            let (bridge, stop) = (bridge.clone(), stop.clone());
            acceptors.push(thread::spawn(move || accept_loop(l, stop, move |s| serve_ws(s, bridge.clone()))));
        }
        info!("bridge listening on tcp {tcp_addr}{}", ws_addr.map(|a| format!(", ws {a}")).unwrap_or_default());
        Ok(BridgeServer { tcp_addr, ws_addr, stop, acceptors })
    }

    pub fn tcp_addr(&self) -> SocketAddr {
        self.tcp_addr
    }

    pub fn ws_addr(&self) -> Option<SocketAddr> {
        self.ws_addr
    }

    /// Blocks until the server is stopped from another thread.
    pub fn wait(mut self) {
        for h in self.acceptors.drain(..) {
            let _ = h.join();
        }
    }

    pub fn stop(&self) {
        self.stop.store(true, Ordering::SeqCst);
    }
}

impl Drop for BridgeServer {
    fn drop(&mut self) {
        self.stop();
        for h in self.acceptors.drain(..) {
            let _ = h.join();
        }
    }
}

fn accept_loop(listener: TcpListener, stop: Arc<AtomicBool>, serve: impl Fn(TcpStream) + Send + Clone + 'static) {
    if let Err(e) = listener.set_nonblocking(true) {
        warn!("cannot poll listener: {e}");
        return;
    }
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, peer)) => {
                debug!("connection from {peer}");
                let _ = stream.set_nonblocking(false);
                let _ = stream.set_nodelay(true);
                let serve = serve.clone();
                thread::spawn(move || serve(stream));
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(ACCEPT_POLL),
            Err(e) => {
                warn!("accept failed: {e}");
                thread::sleep(ACCEPT_POLL);
            }
        }
    }
}

fn serve_tcp(stream: TcpStream, bridge: Arc<Bridge>) {
    let (tx, rx) = mpsc::channel::<String>();
    let mut writer = match stream.try_clone() {
        Ok(w) => w,
        Err(e) => return warn!("cannot split connection: {e}"),
    };
    let writer_thread = thread::spawn(move || {
        for msg in rx {
            if write_frame(&mut writer, msg.as_bytes()).is_err() {
                break;
            }
        }
        let _ = writer.shutdown(std::net::Shutdown::Both);
    });
    let session = Session::new(bridge, tx);
    let mut reader = stream;
    loop {
        match read_frame(&mut reader) {
            Ok(Some(body)) => match std::str::from_utf8(&body) {
                Ok(text) => session.handle(text),
                Err(_) => session.handle("\u{0}"),
            },
            Ok(None) => break,
            Err(e) => {
                debug!("tcp client dropped: {e}");
                break;
            }
        }
    }
    drop(session);
    let _ = reader.shutdown(std::net::Shutdown::Both);
    let _ = writer_thread.join();
}

fn serve_ws(stream: TcpStream, bridge: Arc<Bridge>) {
    let mut ws = match tungstenite::accept(stream) {
        Ok(ws) => ws,
        Err(e) => return debug!("websocket handshake failed: {e}"),
    };
    if let Err(e) = ws.get_ref().set_read_timeout(Some(WS_POLL)) {
        return warn!("cannot poll websocket: {e}");
    }
    let (tx, rx) = mpsc::channel::<String>();
    let session = Session::new(bridge, tx);
    'conn: loop {
        match ws.read() {
            Ok(Message::Text(text)) => session.handle(&text),
            Ok(Message::Binary(bytes)) => match std::str::from_utf8(&bytes) {
                Ok(text) => session.handle(text),
                Err(_) => session.handle("\u{0}"),
            },
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
            Err(e) => {
                debug!("websocket client dropped: {e}");
                break;
            }
        }
        loop {
            match rx.try_recv() {
                Ok(msg) => {
                    if ws.send(Message::Text(msg)).is_err() {
                        break 'conn;
                    }
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => break 'conn,
            }
        }
    }
    drop(session);
    let _ = ws.close(None);
}
