//! Ordered, reliable message delivery between the two parties.

use std::io::{BufReader, BufWriter};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{channel, Receiver, Sender};

use super::message::{read_frame, write_frame, Message};
use super::{Error, Result};

pub trait Transport {
    /// Sends an encoded frame.
    fn send_frame(&mut self, frame: &[u8]) -> Result<()>;
    /// Receives one frame, returning the message and its raw bytes.
    fn recv_frame(&mut self) -> Result<(Message, Vec<u8>)>;

    fn send(&mut self, msg: &Message) -> Result<()> {
        self.send_frame(&msg.encode())
    }

    fn recv(&mut self) -> Result<Message> {
        self.recv_frame().map(|(m, _)| m)
    }
}

/// In-process endpoint backed by a pair of channels.
pub struct ChannelTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
}

/// Two connected in-process endpoints.
pub fn channel_pair() -> (ChannelTransport, ChannelTransport) {
    let (a_tx, b_rx) = channel();
    let (b_tx, a_rx) = channel();
    (ChannelTransport { tx: a_tx, rx: a_rx }, ChannelTransport { tx: b_tx, rx: b_rx })
}

impl Transport for ChannelTransport {
    fn send_frame(&mut self, frame: &[u8]) -> Result<()> {
        self.tx
            .send(frame.to_vec())
            .map_err(|_| Error::Disconnected("peer endpoint dropped".into()))
    }

    fn recv_frame(&mut self) -> Result<(Message, Vec<u8>)> {
        let frame = self
            .rx
            .recv()
            .map_err(|_| Error::Disconnected("peer endpoint dropped".into()))?;
        let (msg, used) = Message::decode(&frame)?;
        if used != frame.len() {
            return Err(Error::Frame(format!("{} trailing bytes after frame", frame.len() - used)));
        }
        Ok((msg, frame))
    }
}

/// Endpoint over a TCP stream.
pub struct StreamTransport {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl StreamTransport {
    pub fn new(stream: TcpStream) -> Result<Self> {
        stream.set_nodelay(true)?;
        Ok(Self {
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
        })
    }

    pub fn connect<A: ToSocketAddrs>(addr: A) -> Result<Self> {
        Self::new(TcpStream::connect(addr)?)
    }

    /// Accepts a single peer on `listener`.
    pub fn accept(listener: &TcpListener) -> Result<Self> {
        let (stream, _) = listener.accept()?;
        Self::new(stream)
    }
}

impl Transport for StreamTransport {
    fn send_frame(&mut self, frame: &[u8]) -> Result<()> {
        write_frame(&mut self.writer, frame)
    }

    fn recv_frame(&mut self) -> Result<(Message, Vec<u8>)> {
        read_frame(&mut self.reader)
    }
}
