use std::io::{self, BufReader, BufWriter};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use thiserror::Error;

use super::wire::{read_frame, write_frame, Frame, WireError};

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("transport I/O: {0}")]
    Io(#[from] io::Error),
    #[error("peer closed the connection without replying")]
    Closed,
    #[error("peer sent a malformed frame: {0}")]
    Malformed(#[from] WireError),
}

/// One request, one reply.
pub trait Transport: Send + Sync {
    fn exchange(&self, request: &Frame) -> Result<Frame, TransportError>;
}

/// A role that answers frames. Implementations must be safe to call from
/// many threads at once.
pub trait Service: Send + Sync {
    fn handle(&self, request: Frame) -> Frame;
}

impl<T: Transport + ?Sized> Transport for Arc<T> {
    fn exchange(&self, request: &Frame) -> Result<Frame, TransportError> {
        (**self).exchange(request)
    }
}

impl<T: Service + ?Sized> Service for Arc<T> {
    fn handle(&self, request: Frame) -> Frame {
        (**self).handle(request)
    }
}

/// Calls a service directly. Frames are still flattened to bytes and parsed
/// back in both directions so the in-process path exercises the same codec
/// as the socket path.
pub struct InProcess<T: ?Sized> {
    service: Arc<T>,
}

impl<T: Service + ?Sized> InProcess<T> {
    pub fn new(service: Arc<T>) -> Self {
        Self { service }
    }
}

impl<T: Service + ?Sized> Transport for InProcess<T> {
    fn exchange(&self, request: &Frame) -> Result<Frame, TransportError> {
        let request = Frame::from_bytes(&request.to_bytes())?;
        let reply = self.service.handle(request);
        Ok(Frame::from_bytes(&reply.to_bytes())?)
    }
}

/// Opens a fresh connection per exchange.
#[derive(Debug, Clone)]
pub struct TcpTransport {
    addr: String,
    timeout: Duration,
}

impl TcpTransport {
    pub fn new(addr: impl Into<String>) -> Self {
        Self { addr: addr.into(), timeout: Duration::from_secs(30) }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

impl Transport for TcpTransport {
    fn exchange(&self, request: &Frame) -> Result<Frame, TransportError> {
        let addr = self
            .addr
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "endpoint resolves to nothing"))?;
        let stream = TcpStream::connect_timeout(&addr, self.timeout)?;
        stream.set_read_timeout(Some(self.timeout))?;
        stream.set_write_timeout(Some(self.timeout))?;
        write_frame(&mut BufWriter::new(&stream), request)?;
        read_frame(&mut BufReader::new(&stream))?.ok_or(TransportError::Closed)
    }
}

/// Accepts connections forever, one thread per connection. Each connection
/// may carry any number of request/reply pairs.
pub fn serve_tcp(listener: TcpListener, service: Arc<dyn Service>) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let service = Arc::clone(&service);
        thread::spawn(move || {
            let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
            if let Err(e) = serve_connection(&stream, service.as_ref()) {
                log::debug!("connection {peer} ended: {e}");
            }
        });
    }
    Ok(())
}

fn serve_connection(stream: &TcpStream, service: &dyn Service) -> io::Result<()> {
    let mut reader = BufReader::new(stream);
    let mut writer = BufWriter::new(stream);
    while let Some(request) = read_frame(&mut reader)? {
        log::debug!("request {:?} ({} bytes)", request.kind, request.body.len());
        write_frame(&mut writer, &service.handle(request))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::MessageType;

    struct Echo;

    impl Service for Echo {
        fn handle(&self, request: Frame) -> Frame {
            Frame::new(MessageType::Decision, request.body)
        }
    }

    #[test]
    fn in_process_and_tcp_agree() {
        let request = Frame::new(MessageType::RegisterId, vec![1, 2, 3]);
        let local = InProcess::new(Arc::new(Echo)).exchange(&request).unwrap();

        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        thread::spawn(move || serve_tcp(listener, Arc::new(Echo)));
        let remote = TcpTransport::new(addr.to_string()).exchange(&request).unwrap();

        assert_eq!(local, remote);
        assert_eq!(remote.body, [1, 2, 3]);
    }

    #[test]
    fn connection_refused_is_an_io_error() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let err = TcpTransport::new(addr.to_string())
            .exchange(&Frame::new(MessageType::RosterQuery, vec![]))
            .unwrap_err();
        assert!(matches!(err, TransportError::Io(_)));
    }
}
