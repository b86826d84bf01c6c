//! Protocol messages and their wire framing.
//!
//! Every frame is a 4-byte big-endian length, a 1-byte tag, then the payload;
//! the length counts the tag and payload. Payloads:
//!
//! | tag | message          | payload                                              |
//! |-----|------------------|------------------------------------------------------|
//! | 1   | `SyndromeBundle` | `u16` count, `u32` bits each, then packed syndromes   |
//! | 2   | `ShortenReveal`  | repeated (`u32` position, `u8` bit)                   |
//! | 3   | `Verdict`        | one byte, 0 or 1                                      |
//! | 4   | `Abort`          | UTF-8 reason                                          |
//!
//! Integers are big-endian; syndromes are packed MSB-first, each padded to a
//! whole byte.

use std::io::{Read, Write};

use serde::Serialize;

use super::{Error, Result};
use crate::bits;
use crate::ldpc::Syndrome;

/// Largest accepted frame length, tag included.
pub const MAX_FRAME_LEN: usize = 64 << 20;

const TAG_SYNDROMES: u8 = 1;
const TAG_REVEAL: u8 = 2;
const TAG_VERDICT: u8 = 3;
const TAG_ABORT: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    /// Alice's syndromes, one per matrix.
    SyndromeBundle(Vec<Syndrome>),
    /// Newly shortened positions and Alice's bit values there.
    ShortenReveal(Vec<(u32, u8)>),
    /// Bob's decoding verdict for the current round.
    Verdict(bool),
    Abort(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MessageKind {
    SyndromeBundle,
    ShortenReveal,
    Verdict,
    Abort,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::SyndromeBundle(_) => MessageKind::SyndromeBundle,
            Message::ShortenReveal(_) => MessageKind::ShortenReveal,
            Message::Verdict(_) => MessageKind::Verdict,
            Message::Abort(_) => MessageKind::Abort,
        }
    }

    fn tag(&self) -> u8 {
        match self {
            Message::SyndromeBundle(_) => TAG_SYNDROMES,
            Message::ShortenReveal(_) => TAG_REVEAL,
            Message::Verdict(_) => TAG_VERDICT,
            Message::Abort(_) => TAG_ABORT,
        }
    }

    fn payload(&self) -> Vec<u8> {
        match self {
            Message::SyndromeBundle(zs) => {
                let m = zs.first().map_or(0, Syndrome::len);
                let mut out = Vec::with_capacity(6 + zs.len() * m.div_ceil(8));
                out.extend_from_slice(&(zs.len() as u16).to_be_bytes());
                out.extend_from_slice(&(m as u32).to_be_bytes());
                for z in zs {
                    debug_assert_eq!(z.len(), m);
                    out.extend_from_slice(&bits::pack(z.bits()));
                }
                out
            }
            Message::ShortenReveal(pairs) => {
                let mut out = Vec::with_capacity(pairs.len() * 5);
                for &(pos, bit) in pairs {
                    out.extend_from_slice(&pos.to_be_bytes());
                    out.push(bit);
                }
                out
            }
            Message::Verdict(ok) => vec![u8::from(*ok)],
            Message::Abort(reason) => reason.as_bytes().to_vec(),
        }
    }

    /// Full frame: length prefix, tag, payload.
    pub fn encode(&self) -> Vec<u8> {
        let payload = self.payload();
        let len = 1 + payload.len();
        let mut out = Vec::with_capacity(4 + len);
        out.extend_from_slice(&(len as u32).to_be_bytes());
        out.push(self.tag());
        out.extend_from_slice(&payload);
        out
    }

    /// Decodes one frame from the front of `buf`, returning the message and
    /// the number of bytes consumed.
    pub fn decode(buf: &[u8]) -> Result<(Message, usize)> {
        if buf.len() < 4 {
            return Err(frame_err("truncated length prefix"));
        }
        let len = u32::from_be_bytes(buf[..4].try_into().unwrap()) as usize;
        check_len(len)?;
        let body = buf
            .get(4..4 + len)
            .ok_or_else(|| frame_err(format!("frame declares {len} bytes, {} available", buf.len() - 4)))?;
        Ok((Self::decode_body(body)?, 4 + len))
    }

    /// Decodes a tag-plus-payload body (a frame without its length prefix).
    pub fn decode_body(body: &[u8]) -> Result<Message> {
        let (&tag, payload) = body.split_first().ok_or_else(|| frame_err("empty frame"))?;
        match tag {
            TAG_SYNDROMES => {
                if payload.len() < 6 {
                    return Err(frame_err("syndrome bundle header truncated"));
                }
                let count = u16::from_be_bytes([payload[0], payload[1]]) as usize;
                let m = u32::from_be_bytes(payload[2..6].try_into().unwrap()) as usize;
                if count == 0 || m == 0 {
                    return Err(frame_err("syndrome bundle must hold at least one non-empty syndrome"));
                }
                let stride = m.div_ceil(8);
                let data = &payload[6..];
                if data.len() != count.checked_mul(stride).ok_or_else(|| frame_err("syndrome size overflow"))? {
                    return Err(frame_err(format!(
                        "syndrome bundle holds {} bytes, expected {count} x {stride}",
                        data.len()
                    )));
                }
                let zs = data
                    .chunks(stride)
                    .map(|c| Syndrome(bits::unpack(c, m).expect("chunk length checked")))
                    .collect();
                Ok(Message::SyndromeBundle(zs))
            }
            TAG_REVEAL => {
                if payload.len() % 5 != 0 {
                    return Err(frame_err(format!("reveal payload of {} bytes is not a multiple of 5", payload.len())));
                }
                payload
                    .chunks(5)
                    .map(|c| {
                        let pos = u32::from_be_bytes(c[..4].try_into().unwrap());
                        match c[4] {
                            b @ (0 | 1) => Ok((pos, b)),
                            b => Err(frame_err(format!("reveal bit value {b}"))),
                        }
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Message::ShortenReveal)
            }
            TAG_VERDICT => match payload {
                [0] => Ok(Message::Verdict(false)),
                [1] => Ok(Message::Verdict(true)),
                _ => Err(frame_err("verdict payload must be a single 0 or 1 byte")),
            },
            TAG_ABORT => std::str::from_utf8(payload)
                .map(|s| Message::Abort(s.to_owned()))
                .map_err(|_| frame_err("abort reason is not UTF-8")),
            t => Err(frame_err(format!("unknown tag {t}"))),
        }
    }
}

fn frame_err(msg: impl Into<String>) -> Error {
    Error::Frame(msg.into())
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 {
        return Err(frame_err("zero-length frame"));
    }
    if len > MAX_FRAME_LEN {
        return Err(frame_err(format!("frame length {len} exceeds {MAX_FRAME_LEN}")));
    }
    Ok(())
}

/// Reads one frame, returning the decoded message and the raw frame bytes.
pub fn read_frame<R: Read>(r: &mut R) -> Result<(Message, Vec<u8>)> {
    let mut prefix = [0u8; 4];
    r.read_exact(&mut prefix)?;
    let len = u32::from_be_bytes(prefix) as usize;
    check_len(len)?;
    // Grow with the bytes actually received rather than trusting the prefix.
    let mut frame = prefix.to_vec();
    r.take(len as u64).read_to_end(&mut frame).map_err(Error::Transport)?;
    if frame.len() != 4 + len {
        return Err(frame_err(format!("connection closed inside a {len}-byte frame")));
    }
    let msg = Message::decode_body(&frame[4..])?;
    Ok((msg, frame))
}

pub fn write_frame<W: Write>(w: &mut W, frame: &[u8]) -> Result<()> {
    w.write_all(frame)?;
    w.flush()?;
    Ok(())
}
