//! Postings codecs.
//!
//! Every codec maps a strictly increasing doc id list to bytes and back. The
//! storage analysis only ever asks a codec for encoded sizes, so alternative
//! integer codecs can be dropped in behind [`PostingsCodec`].

use crate::DocId;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("doc ids not strictly increasing at position {position}")]
    NotIncreasing { position: usize },
    #[error("truncated varint at byte {offset}")]
    Truncated { offset: usize },
    #[error("varint overflows 32 bits at byte {offset}")]
    Overflow { offset: usize },
    #[error("zero gap at byte {offset}")]
    ZeroGap { offset: usize },
}

pub trait PostingsCodec {
    fn name(&self) -> &'static str;
    fn encode(&self, ids: &[DocId]) -> Result<Vec<u8>, CodecError>;
    fn decode(&self, bytes: &[u8]) -> Result<Vec<DocId>, CodecError>;
}

/// Delta gaps in variable-byte form: 7-bit groups, low group first, with the
/// high bit set on every byte but the last of each value. The first gap is
/// the first doc id itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct VByte;

impl VByte {
    pub fn write_u32(mut value: u32, out: &mut Vec<u8>) {
        while value >= 0x80 {
            out.push((value as u8 & 0x7F) | 0x80);
            value >>= 7;
        }
        out.push(value as u8);
    }

    /// Reads one value starting at `*pos`, advancing it.
    pub fn read_u32(bytes: &[u8], pos: &mut usize) -> Result<u32, CodecError> {
        let start = *pos;
        let mut value = 0u64;
        let mut shift = 0u32;
        loop {
            let Some(&byte) = bytes.get(*pos) else {
                return Err(CodecError::Truncated { offset: start });
            };
            *pos += 1;
            value |= u64::from(byte & 0x7F) << shift;
            if value > u64::from(u32::MAX) {
                return Err(CodecError::Overflow { offset: start });
            }
            if byte & 0x80 == 0 {
                return Ok(value as u32);
            }
            shift += 7;
            if shift > 28 {
                return Err(CodecError::Overflow { offset: start });
            }
        }
    }

    /// Encoded length of `ids` in bytes, without materializing the buffer.
    pub fn encoded_len(ids: &[DocId]) -> usize {
        let mut prev = None;
        ids.iter()
            .map(|&id| {
                let gap = match prev {
                    None => id,
                    Some(p) => id - p,
                };
                prev = Some(id);
                match gap {
                    0..=0x7F => 1,
                    0x80..=0x3FFF => 2,
                    0x4000..=0x1F_FFFF => 3,
                    0x20_0000..=0xFFF_FFFF => 4,
                    _ => 5,
                }
            })
            .sum()
    }
}

impl PostingsCodec for VByte {
    fn name(&self) -> &'static str {
        "vbyte"
    }

    fn encode(&self, ids: &[DocId]) -> Result<Vec<u8>, CodecError> {
        let mut out = Vec::with_capacity(ids.len());
        let mut prev: Option<DocId> = None;
        for (position, &id) in ids.iter().enumerate() {
            let gap = match prev {
                None => id,
                Some(p) if id > p => id - p,
                Some(_) => return Err(CodecError::NotIncreasing { position }),
            };
            Self::write_u32(gap, &mut out);
            prev = Some(id);
        }
        Ok(out)
    }

    fn decode(&self, bytes: &[u8]) -> Result<Vec<DocId>, CodecError> {
        let mut ids = Vec::new();
        let mut pos = 0;
        let mut prev: Option<DocId> = None;
        while pos < bytes.len() {
            let offset = pos;
            let gap = Self::read_u32(bytes, &mut pos)?;
            let id = match prev {
                None => gap,
                Some(_) if gap == 0 => return Err(CodecError::ZeroGap { offset }),
                Some(p) => p.checked_add(gap).ok_or(CodecError::Overflow { offset })?,
            };
            ids.push(id);
            prev = Some(id);
        }
        Ok(ids)
    }
}
