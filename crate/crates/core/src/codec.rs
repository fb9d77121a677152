//! Little-endian binary primitives shared by every on-disk structure.
//!
//! All multi-byte integers are unsigned 32-bit little-endian. Strings are
//! encoded as a `u32le` byte length followed by the UTF-8 payload without a
//! byte order mark. Reads past the end of the buffer are hard errors, never
//! partial results.

use thiserror::Error;

/// The UTF-8 byte order mark, which is forbidden at the start of any
/// serialized string.
const UTF8_BOM: [u8; 3] = [0xEF, 0xBB, 0xBF];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("truncated input: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("string payload is not valid UTF-8")]
    InvalidUtf8,
    #[error("string payload starts with a byte order mark")]
    LeadingBom,
    #[error("{0} trailing bytes after the last field")]
    TrailingBytes(usize),
}

/// Cursor over an immutable byte buffer.
#[derive(Debug)]
pub struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.remaining() == 0
    }

    pub fn read_bytes(&mut self, len: usize) -> Result<&'a [u8], CodecError> {
        if len > self.remaining() {
            return Err(CodecError::Truncated {
                need: len,
                have: self.remaining(),
            });
        }
        let out = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    pub fn read_array<const N: usize>(&mut self) -> Result<[u8; N], CodecError> {
        let bytes = self.read_bytes(N)?;
        Ok(bytes.try_into().expect("slice has requested length"))
    }

    pub fn read_u32le(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.read_array::<4>()?))
    }

    /// Reads a length-prefixed UTF-8 string. A declared length exceeding the
    /// remaining bytes is a hard error, as are invalid UTF-8 and a leading
    /// byte order mark.
    pub fn read_string(&mut self) -> Result<String, CodecError> {
        let len = self.read_u32le()? as usize;
        let payload = self.read_bytes(len)?;
        if payload.starts_with(&UTF8_BOM) {
            return Err(CodecError::LeadingBom);
        }
        std::str::from_utf8(payload)
            .map(str::to_owned)
            .map_err(|_| CodecError::InvalidUtf8)
    }

    /// Fails unless the cursor consumed the whole buffer.
    pub fn expect_end(&self) -> Result<(), CodecError> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(CodecError::TrailingBytes(self.remaining()))
        }
    }
}

/// Append-only byte buffer with the same field encodings as [`ByteReader`].
#[derive(Debug, Default)]
pub struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            buf: Vec::with_capacity(capacity),
        }
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.buf
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn write_bytes(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn write_u32le(&mut self, value: u32) {
        self.buf.extend_from_slice(&value.to_le_bytes());
    }

    /// Writes a length-prefixed UTF-8 string.
    ///
    /// The caller must keep the payload below 2^32 bytes; every format using
    /// this codec bounds its fields well under that limit.
    pub fn write_string(&mut self, s: &str) {
        assert!(s.len() < u32::MAX as usize, "string exceeds u32 length prefix");
        self.write_u32le(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    /// Overwrites 4 bytes at `offset` with a new `u32le` value. Used to patch
    /// a placeholder once the real value is known.
    pub fn patch_u32le(&mut self, offset: usize, value: u32) {
        self.buf[offset..offset + 4].copy_from_slice(&value.to_le_bytes());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_u32(value: u32) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.write_u32le(value);
        w.into_bytes()
    }

    #[test]
    fn u32le_known_encodings() {
        assert_eq!(write_u32(0), [0x00, 0x00, 0x00, 0x00]);
        assert_eq!(write_u32(0x0001_0000), [0x00, 0x00, 0x01, 0x00]);
        assert_eq!(write_u32(0xECFF_C0DE), [0xDE, 0xC0, 0xFF, 0xEC]);
    }

    #[test]
    fn u32le_known_decodings() {
        assert_eq!(ByteReader::new(&[0, 0, 0, 0]).read_u32le().unwrap(), 0);
        assert_eq!(
            ByteReader::new(&[0x01, 0x01, 0x01, 0x01]).read_u32le().unwrap(),
            0x0101_0101
        );
    }

    #[test]
    fn u32le_boundary_values_roundtrip() {
        for value in [0, 1, u32::MAX] {
            let encoded = write_u32(value);
            assert_eq!(encoded.len(), 4);
            assert_eq!(ByteReader::new(&encoded).read_u32le().unwrap(), value);
        }
    }

    #[test]
    fn u32le_truncated() {
        let err = ByteReader::new(&[0x01, 0x02]).read_u32le().unwrap_err();
        assert_eq!(err, CodecError::Truncated { need: 4, have: 2 });
    }

    #[test]
    fn string_known_encodings() {
        let mut w = ByteWriter::new();
        w.write_string("");
        assert_eq!(w.as_bytes(), [0x00, 0x00, 0x00, 0x00]);

        let mut w = ByteWriter::new();
        w.write_string("Alice");
        assert_eq!(
            w.as_bytes(),
            [0x05, 0x00, 0x00, 0x00, 0x41, 0x6C, 0x69, 0x63, 0x65]
        );

        let mut w = ByteWriter::new();
        w.write_string("é");
        assert_eq!(w.as_bytes(), [0x02, 0x00, 0x00, 0x00, 0xC3, 0xA9]);
    }

    #[test]
    fn string_known_decodings() {
        let mut r = ByteReader::new(&[0x00, 0x00, 0x00, 0x00]);
        assert_eq!(r.read_string().unwrap(), "");

        let mut r = ByteReader::new(&[0x05, 0x00, 0x00, 0x00, 0x41, 0x6C, 0x69, 0x63, 0x65]);
        assert_eq!(r.read_string().unwrap(), "Alice");
    }

    #[test]
    fn string_invalid_utf8() {
        let mut r = ByteReader::new(&[0x02, 0x00, 0x00, 0x00, 0xFF, 0xFE]);
        assert_eq!(r.read_string().unwrap_err(), CodecError::InvalidUtf8);
    }

    #[test]
    fn string_leading_bom_rejected() {
        let mut r = ByteReader::new(&[0x04, 0x00, 0x00, 0x00, 0xEF, 0xBB, 0xBF, 0x41]);
        assert_eq!(r.read_string().unwrap_err(), CodecError::LeadingBom);
    }

    #[test]
    fn string_declared_length_past_end_fails_closed() {
        let mut r = ByteReader::new(&[0xFF, 0x00, 0x00, 0x00, 0x41]);
        assert_eq!(
            r.read_string().unwrap_err(),
            CodecError::Truncated { need: 255, have: 1 }
        );
    }

    #[test]
    fn string_encoded_length_law() {
        for s in ["", "a", "Alice", "héllo wörld", "名前"] {
            let mut w = ByteWriter::new();
            w.write_string(s);
            assert_eq!(w.len(), 4 + s.len());
        }
    }

    #[test]
    fn expect_end_reports_trailing() {
        let mut r = ByteReader::new(&[0, 0, 0, 0, 9]);
        r.read_u32le().unwrap();
        assert_eq!(r.expect_end().unwrap_err(), CodecError::TrailingBytes(1));
    }

    #[test]
    fn patch_u32le_overwrites_in_place() {
        let mut w = ByteWriter::new();
        w.write_u32le(0xECFF_C0DE);
        w.write_u32le(7);
        w.patch_u32le(0, 42);
        let mut r = ByteReader::new(w.as_bytes());
        assert_eq!(r.read_u32le().unwrap(), 42);
        assert_eq!(r.read_u32le().unwrap(), 7);
    }
}
