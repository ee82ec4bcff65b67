//! Length-prefixed binary messages for the classical channel.
//!
//! Each message is `u8 type | u32 session | u32 payload length | payload`,
//! integers little-endian. Payloads:
//!
//! | type | name | payload |
//! |------|------|---------|
//! | 1 | `MAP_BLOCKS` | `u32 frame, u8 d, u32 n, n x f64 m, n/d x f64 norms` |
//! | 2 | `IDX_LIST` | `u32 count, count x u32 frame` |
//! | 3 | `PADDED_SYNDROME` | `u32 payload bits, u32 n_h, u32 m_h, u64 code seed, f64 crossover, packed bits` |
//! | 4 | `HASH_TAG` | `u32 bits, packed bits` |
//! | 5 | `ACCEPT` | empty |
//! | 6 | `REJECT` | empty |
//!
//! Bits are packed LSB first.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::multidim::MappedBlock;

/// Upper bound on a payload, to refuse absurd length fields.
pub const MAX_PAYLOAD: u32 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum MessageType {
    MapBlocks = 1,
    IdxList = 2,
    PaddedSyndrome = 3,
    HashTag = 4,
    Accept = 5,
    Reject = 6,
}

impl MessageType {
    pub fn name(self) -> &'static str {
        match self {
            MessageType::MapBlocks => "MAP_BLOCKS",
            MessageType::IdxList => "IDX_LIST",
            MessageType::PaddedSyndrome => "PADDED_SYNDROME",
            MessageType::HashTag => "HASH_TAG",
            MessageType::Accept => "ACCEPT",
            MessageType::Reject => "REJECT",
        }
    }

    fn from_u8(v: u8) -> Result<Self> {
        Ok(match v {
            1 => MessageType::MapBlocks,
            2 => MessageType::IdxList,
            3 => MessageType::PaddedSyndrome,
            4 => MessageType::HashTag,
            5 => MessageType::Accept,
            6 => MessageType::Reject,
            _ => return Err(Error::Wire(format!("unknown message type {v}"))),
        })
    }
}

/// Stage-2 syndrome message body.
#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeMsg {
    pub payload_len: u32,
    pub n_h: u32,
    pub m_h: u32,
    pub code_seed: u64,
    pub crossover_p: f64,
    pub bits: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    MapBlocks { frame: u32, mapped: MappedBlock },
    IdxList(Vec<u32>),
    PaddedSyndrome(SyndromeMsg),
    HashTag(Vec<u8>),
    Accept,
    Reject,
}

/// A decoded frame header plus raw payload.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub kind: MessageType,
    pub session: u32,
    pub payload: Vec<u8>,
}

impl Envelope {
    /// Bytes on the wire including the 9-byte header.
    pub fn wire_len(&self) -> usize {
        9 + self.payload.len()
    }
}

pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 8] |= (b & 1) << (i % 8);
    }
    out
}

pub fn unpack_bits(bytes: &[u8], n: usize) -> Result<Vec<u8>> {
    if bytes.len() != n.div_ceil(8) {
        return Err(Error::Wire(format!("{n} bits need {} bytes, got {}", n.div_ceil(8), bytes.len())));
    }
    Ok((0..n).map(|i| (bytes[i / 8] >> (i % 8)) & 1).collect())
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Wire("truncated payload".into()));
        }
        let (a, b) = self.buf.split_at(n);
        self.buf = b;
        Ok(a)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn finish(self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(Error::Wire(format!("{} trailing payload bytes", self.buf.len())))
        }
    }
}

impl Message {
    pub fn kind(&self) -> MessageType {
        match self {
            Message::MapBlocks { .. } => MessageType::MapBlocks,
            Message::IdxList(_) => MessageType::IdxList,
            Message::PaddedSyndrome(_) => MessageType::PaddedSyndrome,
            Message::HashTag(_) => MessageType::HashTag,
            Message::Accept => MessageType::Accept,
            Message::Reject => MessageType::Reject,
        }
    }

    pub fn to_envelope(&self, session: u32) -> Envelope {
        let mut p = Vec::new();
        match self {
            Message::MapBlocks { frame, mapped } => {
                p.extend(frame.to_le_bytes());
                p.push(mapped.dimension as u8);
                p.extend((mapped.m.len() as u32).to_le_bytes());
                for v in mapped.m.iter().chain(&mapped.block_norms) {
                    p.extend(v.to_bits().to_le_bytes());
                }
            }
            Message::IdxList(idx) => {
                p.extend((idx.len() as u32).to_le_bytes());
                for i in idx {
                    p.extend(i.to_le_bytes());
                }
            }
            Message::PaddedSyndrome(s) => {
                p.extend(s.payload_len.to_le_bytes());
                p.extend(s.n_h.to_le_bytes());
                p.extend(s.m_h.to_le_bytes());
                p.extend(s.code_seed.to_le_bytes());
                p.extend(s.crossover_p.to_bits().to_le_bytes());
                p.extend(pack_bits(&s.bits));
            }
            Message::HashTag(bits) => {
                p.extend((bits.len() as u32).to_le_bytes());
                p.extend(pack_bits(bits));
            }
            Message::Accept | Message::Reject => {}
        }
        Envelope {
            kind: self.kind(),
            session,
            payload: p,
        }
    }

    pub fn from_envelope(env: &Envelope) -> Result<Message> {
        let mut r = Reader { buf: &env.payload };
        let msg = match env.kind {
            MessageType::MapBlocks => {
                let frame = r.u32()?;
                let d = r.u8()? as usize;
                let n = r.u32()? as usize;
                if !crate::multidim::algebra::is_supported(d) || !n.is_multiple_of(d) {
                    return Err(Error::Wire(format!("bad MAP_BLOCKS shape n = {n}, d = {d}")));
                }
                let m = r.f64s(n)?;
                let block_norms = r.f64s(n / d)?;
                Message::MapBlocks {
                    frame,
                    mapped: MappedBlock {
                        m,
                        block_norms,
                        dimension: d,
                    },
                }
            }
            MessageType::IdxList => {
                let n = r.u32()? as usize;
                if n > env.payload.len() / 4 {
                    return Err(Error::Wire("IDX_LIST count exceeds payload".into()));
                }
                Message::IdxList((0..n).map(|_| r.u32()).collect::<Result<_>>()?)
            }
            MessageType::PaddedSyndrome => {
                let payload_len = r.u32()?;
                let n_h = r.u32()?;
                let m_h = r.u32()?;
                let code_seed = r.u64()?;
                let crossover_p = r.f64()?;
                let bits = unpack_bits(r.bytes(r.buf.len())?, m_h as usize)?;
                Message::PaddedSyndrome(SyndromeMsg {
                    payload_len,
                    n_h,
                    m_h,
                    code_seed,
                    crossover_p,
                    bits,
                })
            }
            MessageType::HashTag => {
                let n = r.u32()? as usize;
                Message::HashTag(unpack_bits(r.bytes(r.buf.len())?, n)?)
            }
            MessageType::Accept => Message::Accept,
            MessageType::Reject => Message::Reject,
        };
        r.finish()?;
        Ok(msg)
    }
}

pub fn write_envelope<W: Write>(w: &mut W, env: &Envelope) -> Result<()> {
    let len = u32::try_from(env.payload.len())
        .ok()
        .filter(|&l| l <= MAX_PAYLOAD)
        .ok_or_else(|| Error::Wire("payload too large".into()))?;
    let mut head = [0u8; 9];
    head[0] = env.kind as u8;
    head[1..5].copy_from_slice(&env.session.to_le_bytes());
    head[5..9].copy_from_slice(&len.to_le_bytes());
    w.write_all(&head)?;
    w.write_all(&env.payload)?;
    w.flush()?;
    Ok(())
}

pub fn read_envelope<R: Read>(r: &mut R) -> Result<Envelope> {
    let mut head = [0u8; 9];
    r.read_exact(&mut head)?;
    let kind = MessageType::from_u8(head[0])?;
    let session = u32::from_le_bytes(head[1..5].try_into().expect("4 bytes"));
    let len = u32::from_le_bytes(head[5..9].try_into().expect("4 bytes"));
    if len > MAX_PAYLOAD {
        return Err(Error::Wire(format!("payload length {len} exceeds limit")));
    }
    let mut payload = vec![0u8; len as usize];
    r.read_exact(&mut payload)?;
    Ok(Envelope { kind, session, payload })
}
