//! PGM (P2/P5) leaf mask reader and writer. Any nonzero pixel is leaf.

use crate::cloud::LeafMask;
use crate::error::{Error, Result};

fn pgm_err(msg: impl Into<String>) -> Error {
    Error::PgmParse(msg.into())
}

/// Tokenizer over the PGM header: whitespace-separated words with
/// '#'-to-end-of-line comments. Returns the token and the byte offset just
/// past it.
fn next_token(bytes: &[u8], mut pos: usize) -> Result<(String, usize)> {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        break;
    }
    let start = pos;
    while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
        pos += 1;
    }
    if start == pos {
        return Err(pgm_err("unexpected end of header"));
    }
    Ok((
        String::from_utf8_lossy(&bytes[start..pos]).into_owned(),
        pos,
    ))
}

pub fn parse_mask(bytes: &[u8], leaf_id: &str) -> Result<LeafMask> {
    let (magic, pos) = next_token(bytes, 0)?;
    let binary = match magic.as_str() {
        "P2" => false,
        "P5" => true,
        other => return Err(pgm_err(format!("not a PGM file (magic '{other}')"))),
    };
    let (w, pos) = next_token(bytes, pos)?;
    let (h, pos) = next_token(bytes, pos)?;
    let (maxval, pos) = next_token(bytes, pos)?;
    let width: u32 = w.parse().map_err(|_| pgm_err(format!("bad width '{w}'")))?;
    let height: u32 = h
        .parse()
        .map_err(|_| pgm_err(format!("bad height '{h}'")))?;
    let maxval: u32 = maxval
        .parse()
        .map_err(|_| pgm_err(format!("bad maxval '{maxval}'")))?;
    if maxval == 0 || maxval > 255 {
        return Err(pgm_err(format!("maxval {maxval} out of range 1..=255")));
    }
    if width == 0 || height == 0 {
        return Err(pgm_err("zero image dimension"));
    }
    let n = width as usize * height as usize;

    let mut pixels = Vec::new();
    if binary {
        // exactly one whitespace byte separates the header from the raster
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(pgm_err("missing separator before P5 raster"));
        }
        let raster = &bytes[pos + 1..];
        if raster.len() < n {
            return Err(pgm_err(format!(
                "P5 raster truncated: expected {n} bytes, found {}",
                raster.len()
            )));
        }
        for (i, &v) in raster[..n].iter().enumerate() {
            if v > 0 {
                pixels.push((i as u32 / width, i as u32 % width));
            }
        }
    } else {
        let mut pos = pos;
        for i in 0..n {
            let (tok, next) =
                next_token(bytes, pos).map_err(|_| pgm_err("P2 raster truncated"))?;
            pos = next;
            let v: u32 = tok
                .parse()
                .map_err(|_| pgm_err(format!("bad P2 sample '{tok}'")))?;
            if v > maxval {
                return Err(pgm_err(format!("sample {v} exceeds maxval {maxval}")));
            }
            if v > 0 {
                pixels.push((i as u32 / width, i as u32 % width));
            }
        }
    }
    LeafMask::new(width, height, pixels, leaf_id.to_string())
}

/// Write a mask as binary PGM (P5), 255 for leaf pixels.
pub fn write_mask(mask: &LeafMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width, mask.height).into_bytes();
    let mut raster = vec![0u8; mask.width as usize * mask.height as usize];
    for &(r, c) in mask.pixels() {
        raster[r as usize * mask.width as usize + c as usize] = 255;
    }
    out.extend_from_slice(&raster);
    out
}
