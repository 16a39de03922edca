//! Canonical byte encoding shared by the wire, the ledger file, and every
//! byte-exact comparison in the system.
//!
//! Layout rules:
//! - integers are fixed-width big-endian (`u32` lengths/counts, `u64`/`i64`
//!   values; `i64` is two's complement),
//! - byte strings and UTF-8 strings are `u32` length-prefixed,
//! - maps are encoded as a `u32` entry count followed by entries sorted by
//!   key bytes,
//! - options are a presence byte (0 or 1) followed by the value,
//! - enums are a single tag byte followed by their fields.
//!
//! Decoding is strict: unknown tags, truncation, trailing bytes at the top
//! level and invalid UTF-8 are all errors. Two semantically equal values
//! always encode to identical bytes, and distinct values to distinct bytes.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("unexpected end of input (wanted {wanted} more bytes)")]
    UnexpectedEof { wanted: usize },
    #[error("{context}: invalid tag {tag}")]
    InvalidTag { context: &'static str, tag: u8 },
    #[error("invalid UTF-8 in string field")]
    InvalidUtf8,
    #[error("{0} bytes left over after decoding")]
    TrailingBytes(usize),
    #[error("map keys not sorted or duplicated")]
    UnsortedMap,
    #[error("length {len} exceeds remaining input {remaining}")]
    LengthOverrun { len: usize, remaining: usize },
    #[error("invalid presence byte {0}")]
    InvalidPresence(u8),
}

/// Append-only canonical writer. A thin wrapper over `Vec<u8>` so encoders
/// cannot accidentally use a non-canonical integer width.
#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self { buf: Vec::new() }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_i64(&mut self, v: i64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_bytes(&mut self, v: &[u8]) {
        self.put_u32(v.len() as u32);
        self.buf.extend_from_slice(v);
    }

    pub fn put_str(&mut self, v: &str) {
        self.put_bytes(v.as_bytes());
    }

    pub fn put_bool(&mut self, v: bool) {
        self.put_u8(u8::from(v));
    }

    /// Raw bytes without a length prefix. Only for fixed-width fields
    /// (hashes, auth tags).
    pub fn put_raw(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(v);
    }
}

/// Strict canonical reader over a byte slice.
pub struct Reader<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(input: &'a [u8]) -> Self {
        Self { input, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.input.len() - self.pos
    }

    pub fn finish(&self) -> Result<(), CodecError> {
        if self.remaining() == 0 {
            Ok(())
        } else {
            Err(CodecError::TrailingBytes(self.remaining()))
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.remaining() < n {
            return Err(CodecError::UnexpectedEof {
                wanted: n - self.remaining(),
            });
        }
        let out = &self.input[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn get_u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn get_u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn get_u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn get_i64(&mut self) -> Result<i64, CodecError> {
        Ok(i64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn get_bytes(&mut self) -> Result<Vec<u8>, CodecError> {
        let len = self.get_u32()? as usize;
        if len > self.remaining() {
            return Err(CodecError::LengthOverrun {
                len,
                remaining: self.remaining(),
            });
        }
        Ok(self.take(len)?.to_vec())
    }

    pub fn get_str(&mut self) -> Result<String, CodecError> {
        let raw = self.get_bytes()?;
        String::from_utf8(raw).map_err(|_| CodecError::InvalidUtf8)
    }

    pub fn get_bool(&mut self) -> Result<bool, CodecError> {
        match self.get_u8()? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(CodecError::InvalidPresence(other)),
        }
    }

    pub fn get_presence(&mut self) -> Result<bool, CodecError> {
        self.get_bool()
    }

    pub fn get_raw(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        self.take(n)
    }
}

/// Everything that participates in the canonical format implements this.
pub trait Canonical: Sized {
    fn write(&self, w: &mut Writer);
    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError>;

    fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.into_bytes()
    }

    /// Decode an entire buffer; trailing bytes are an error.
    fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let out = Self::read(&mut r)?;
        r.finish()?;
        Ok(out)
    }
}

pub fn sha256(data: &[u8]) -> [u8; 32] {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(data);
    h.finalize().into()
}

/// HMAC-SHA256 over `msg` with `key`, used to authenticate control-protocol
/// requests with the shared secret from config.
pub fn hmac_sha256(key: &[u8], msg: &[u8]) -> [u8; 32] {
    const BLOCK: usize = 64;
    let mut k = [0u8; BLOCK];
    if key.len() > BLOCK {
        k[..32].copy_from_slice(&sha256(key));
    } else {
        k[..key.len()].copy_from_slice(key);
    }
    let mut inner = Vec::with_capacity(BLOCK + msg.len());
    let mut outer = Vec::with_capacity(BLOCK + 32);
    for &b in &k {
        inner.push(b ^ 0x36);
        outer.push(b ^ 0x5c);
    }
    inner.extend_from_slice(msg);
    outer.extend_from_slice(&sha256(&inner));
    sha256(&outer)
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_are_big_endian_fixed_width() {
        let mut w = Writer::new();
        w.put_u32(0x01020304);
        w.put_u64(0x0102030405060708);
        w.put_i64(-2);
        let b = w.into_bytes();
        assert_eq!(&b[..4], &[1, 2, 3, 4]);
        assert_eq!(&b[4..12], &[1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(&b[12..], &(-2i64).to_be_bytes());
    }

    #[test]
    fn strict_decode_rejects_trailing_bytes() {
        let mut w = Writer::new();
        w.put_str("ab");
        let mut b = w.into_bytes();
        b.push(0);
        let mut r = Reader::new(&b);
        r.get_str().unwrap();
        assert!(matches!(r.finish(), Err(CodecError::TrailingBytes(1))));
    }

    #[test]
    fn length_overrun_is_detected() {
        let mut w = Writer::new();
        w.put_u32(1000);
        w.put_raw(b"short");
        let b = w.into_bytes();
        let mut r = Reader::new(&b);
        assert!(matches!(
            r.get_bytes(),
            Err(CodecError::LengthOverrun { .. })
        ));
    }

    #[test]
    fn hmac_matches_rfc4231_test_case_2() {
        // RFC 4231 test case 2: key "Jefe", data "what do ya want for nothing?"
        let tag = hmac_sha256(b"Jefe", b"what do ya want for nothing?");
        assert_eq!(
            hex(&tag),
            "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843"
        );
    }
}
