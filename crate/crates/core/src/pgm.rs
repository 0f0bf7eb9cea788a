//! Binary PGM (P5) reading and writing, 8-bit only.
//!
//! The writer always emits `P5\n<width> <height>\n255\n` followed by the raw
//! samples. The reader accepts any run of ASCII whitespace between header
//! tokens but requires exactly one whitespace byte after maxval. Comments are
//! not supported.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, PgmError, Result};
use crate::image::Image;

pub fn read_pgm(bytes: &[u8]) -> std::result::Result<Image, PgmError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(PgmError::BadMagic);
    }
    let mut cursor = Header { bytes, pos: 2 };
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates maxval from the payload
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(PgmError::MalformedHeader("maxval")),
    }

    let width = usize::try_from(width).map_err(|_| PgmError::MalformedHeader("width"))?;
    let height = usize::try_from(height).map_err(|_| PgmError::MalformedHeader("height"))?;
    if width == 0 {
        return Err(PgmError::MalformedHeader("width"));
    }
    if height == 0 {
        return Err(PgmError::MalformedHeader("height"));
    }
    let expected = width.checked_mul(height).ok_or(PgmError::MalformedHeader("height"))?;
    let payload = &bytes[cursor.pos..];
    if payload.len() < expected {
        return Err(PgmError::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    Ok(Image::from_u8(width, height, &payload[..expected]).expect("dimensions validated above"))
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    /// Skips at least one whitespace byte, then parses a decimal number.
    fn number(&mut self, field: &'static str) -> std::result::Result<u64, PgmError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(PgmError::MalformedHeader(field));
        }
        let digits_start = self.pos;
        let mut value: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u64::from(b - b'0')))
                .ok_or(PgmError::MalformedHeader(field))?;
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(PgmError::MalformedHeader(field));
        }
        Ok(value)
    }
}

/// Serializes `img` as P5, quantizing intensities to 8 bits.
pub fn write_pgm<W: Write>(img: &Image, mut sink: W) -> std::io::Result<()> {
    write!(sink, "P5\n{} {}\n255\n", img.width(), img.height())?;
    sink.write_all(&img.to_u8())?;
    sink.flush()
}

pub fn to_pgm_bytes(img: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.len() + 20);
    write_pgm(img, &mut out).expect("writing to a Vec cannot fail");
    out
}

pub fn read_pgm_file<P: AsRef<Path>>(path: P) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    read_pgm(&bytes).map_err(|source| Error::Pgm {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_pgm_file<P: AsRef<Path>>(path: P, img: &Image) -> Result<()> {
    fs::write(path, to_pgm_bytes(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_two_by_two() {
        let mut bytes = b"P5 2 2 255 ".to_vec();
        bytes.extend_from_slice(&[0, 255, 7, 9]);
        let img = read_pgm(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0.0, 255.0, 7.0, 9.0]);
    }

    #[test]
    fn reads_single_pixel() {
        let img = read_pgm(b"P5 1 1 255 \x80").unwrap();
        assert_eq!(img.pixels(), &[128.0]);
    }

    #[test]
    fn payload_may_start_with_whitespace_byte() {
        // 0x0a is a valid sample even though it is also whitespace
        let img = read_pgm(b"P5\n2 1\n255\n\x0a\x20").unwrap();
        assert_eq!(img.pixels(), &[10.0, 32.0]);
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(read_pgm(b"P2 1 1 255 \x00"), Err(PgmError::BadMagic)));
        assert!(matches!(
            read_pgm(b"P5 1 1 65535 \x00\x00"),
            Err(PgmError::UnsupportedMaxval(65535))
        ));
        assert!(matches!(
            read_pgm(b"P5 x 1 255 \x00"),
            Err(PgmError::MalformedHeader("width"))
        ));
        assert!(matches!(read_pgm(b"P5 1"), Err(PgmError::MalformedHeader("height"))));
        assert!(matches!(
            read_pgm(b"P5 1 1 255"),
            Err(PgmError::MalformedHeader("maxval"))
        ));
        assert!(matches!(
            read_pgm(b"P5 2 2 255 \x01\x02"),
            Err(PgmError::TruncatedPayload { expected: 4, found: 2 })
        ));
        let msg = read_pgm(b"P5 1 1 65535 \x00").unwrap_err().to_string();
        assert!(msg.contains("unsupported maxval"), "{msg}");
    }

    #[test]
    fn writes_canonical_header() {
        let img = Image::from_u8(1, 1, &[128]).unwrap();
        assert_eq!(to_pgm_bytes(&img), b"P5\n1 1\n255\n\x80");
        let frac = Image::new(1, 1, vec![254.6]).unwrap();
        assert_eq!(to_pgm_bytes(&frac).last(), Some(&255));
    }

    proptest! {
        #[test]
        fn round_trip((w, h, bytes) in (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
            (Just(w), Just(h), proptest::collection::vec(any::<u8>(), w * h))
        })) {
            let img = Image::from_u8(w, h, &bytes).unwrap();
            let encoded = to_pgm_bytes(&img);
            prop_assert_eq!(&read_pgm(&encoded).unwrap(), &img);
            prop_assert_eq!(encoded, to_pgm_bytes(&img));
        }
    }
}
