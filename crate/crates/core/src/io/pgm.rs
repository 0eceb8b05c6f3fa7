//! Binary PGM (`P5`), the byte-exact golden format.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// `P5\n{w} {h}\n255\n` followed by the raw row-major bytes.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width, image.height);
    let mut out = Vec::with_capacity(header.len() + image.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&image.pixels);
    out
}

/// Writes `image` to `path`, returning the number of bytes written.
pub fn write_pgm(image: &GrayImage, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let bytes = encode_pgm(image);
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    Ok(bytes.len())
}

/// Parses exactly the layout produced by [`encode_pgm`].
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let bad = |message: &str| Error::Parse {
        context: "pgm".into(),
        line: 0,
        column: 0,
        message: message.into(),
    };
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n' || b == b' ')
            .ok_or_else(|| bad("truncated header"))?;
        fields.push(std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| bad("non-ascii header"))?);
        pos += end + 1;
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad("expected P5 with maxval 255"));
    }
    let width: usize = fields[1].parse().map_err(|_| bad("bad width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad("bad height"))?;
    GrayImage::new(width, height, bytes[pos..].to_vec())
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    decode_pgm(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
