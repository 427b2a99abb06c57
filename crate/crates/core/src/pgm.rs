//! Binary PGM (P5) encoding for rasters and masks.
//!
//! Writes always use maxval 255 with 0 = black and 255 = white. The reader
//! accepts any 8-bit P5 file and treats non-zero samples as white.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::bits::{BinaryRaster, PackedBits};
use crate::error::{Error, Result};

pub fn header(width: usize, height: usize) -> String {
    format!("P5\n{width} {height}\n255\n")
}

pub fn encode_to<W: Write>(
    out: &mut W,
    width: usize,
    height: usize,
    pixel: impl Fn(usize) -> bool,
) -> std::io::Result<()> {
    out.write_all(header(width, height).as_bytes())?;
    let mut row = vec![0u8; width];
    for r in 0..height {
        for (c, byte) in row.iter_mut().enumerate() {
            *byte = if pixel(r * width + c) { 255 } else { 0 };
        }
        out.write_all(&row)?;
    }
    Ok(())
}

pub fn encode(raster: &BinaryRaster) -> Vec<u8> {
    let mut out = Vec::with_capacity(raster.len() + 32);
    encode_to(&mut out, raster.width(), raster.height(), |i| {
        raster.bits().get(i)
    })
    .expect("writing to a Vec cannot fail");
    out
}

pub fn write(path: &Path, raster: &BinaryRaster) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode_to(&mut w, raster.width(), raster.height(), |i| {
        raster.bits().get(i)
    })
    .and_then(|_| w.flush())
    .map_err(|e| Error::io(path, e))
}

pub fn decode(bytes: &[u8]) -> Result<BinaryRaster> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::format("PGM", "expected P5 magic"));
    }
    let width = parse_usize(next_token(bytes, &mut pos)?)?;
    let height = parse_usize(next_token(bytes, &mut pos)?)?;
    let maxval = parse_usize(next_token(bytes, &mut pos)?)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(
            "PGM",
            format!("unsupported maxval {maxval}"),
        ));
    }
    // exactly one whitespace byte separates the header from the samples
    pos += 1;
    let n = width * height;
    let data = bytes
        .get(pos..pos + n)
        .ok_or_else(|| Error::format("PGM", "truncated pixel data"))?;
    let bits = PackedBits::from_bools(data.iter().map(|&b| b != 0));
    BinaryRaster::from_bits(width, height, bits)
}

pub fn read(path: &Path) -> Result<BinaryRaster> {
    let mut bytes = Vec::new();
    File::open(path)
        .map(BufReader::new)
        .and_then(|mut r| r.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(Error::format("PGM", "truncated header")),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}

fn parse_usize(tok: &[u8]) -> Result<usize> {
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format("PGM", format!("bad header field {tok:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_small() {
        let r = BinaryRaster::from_fn(5, 3, |c, r| (c + r) % 2 == 0);
        let bytes = encode(&r);
        assert!(bytes.starts_with(b"P5\n5 3\n255\n"));
        assert_eq!(bytes.len(), 11 + 15);
        assert_eq!(decode(&bytes).unwrap(), r);
    }

    #[test]
    fn header_comments_are_skipped() {
        let bytes = b"P5\n# made by hand\n2 1\n255\n\xff\x00";
        let r = decode(bytes).unwrap();
        assert!(r.get(0, 0));
        assert!(!r.get(1, 0));
    }

    #[test]
    fn rejects_truncated() {
        assert!(decode(b"P5\n4 4\n255\n\x00\x00").is_err());
        assert!(decode(b"P6\n1 1\n255\n\x00").is_err());
    }
}
