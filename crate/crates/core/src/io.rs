//! Binary PGM images and the `CSCB1` float array container.
//!
//! `CSCB1` layout: an ASCII header line `CSCB1 <rows> <cols> <planes>\n`
//! followed by `rows * cols * planes` little-endian IEEE-754 doubles, plane
//! by plane, each plane row-major.

use std::fs;
use std::path::Path;

use crate::error::{CscError, Result};
use crate::grid::SignalGrid;

const ARRAY_MAGIC: &str = "CSCB1";

/// Sample depth of a written PGM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn maxval(self) -> u32 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(CscError::parse(start, format!("expected {what}, found end of header")));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| CscError::parse(start, format!("{what} is not ASCII")))?;
        Ok((start, text))
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let (offset, text) = self.token(what)?;
        text.parse::<usize>()
            .map_err(|_| CscError::parse(offset, format!("invalid {what} '{text}'")))
    }
}

/// Decodes a binary (`P5`) PGM, scaling samples by `1 / maxval`.
pub fn decode_pgm(bytes: &[u8]) -> Result<SignalGrid> {
    let mut cur = HeaderCursor { bytes, pos: 0 };
    let (off, magic) = cur.token("magic number")?;
    if magic != "P5" {
        return Err(CscError::parse(off, format!("bad magic '{magic}', expected P5")));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval_off = cur.pos;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(CscError::parse(off, format!("image dimensions {width}x{height} must be positive")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(CscError::parse(maxval_off, format!("maxval {maxval} outside 1..=65535")));
    }
    // exactly one whitespace byte separates the header from the raster
    if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
        return Err(CscError::parse(cur.pos, "missing whitespace after maxval"));
    }
    let data_start = cur.pos + 1;
    let bytes_per_sample = if maxval < 256 { 1 } else { 2 };
    let needed = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bytes_per_sample))
        .ok_or_else(|| CscError::parse(off, format!("image dimensions {width}x{height} overflow")))?;
    let raster = &bytes[data_start..];
    if raster.len() < needed {
        return Err(CscError::parse(
            bytes.len(),
            format!("truncated raster: expected {needed} bytes, found {}", raster.len()),
        ));
    }
    let scale = 1.0 / maxval as f64;
    let values: Vec<f64> = if bytes_per_sample == 1 {
        raster[..needed].iter().map(|&b| b as f64 * scale).collect()
    } else {
        raster[..needed]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale)
            .collect()
    };
    if let Some(pos) = values.iter().position(|&v| v > 1.0) {
        return Err(CscError::parse(
            data_start + pos * bytes_per_sample,
            format!("sample exceeds maxval {maxval}"),
        ));
    }
    SignalGrid::from_vec(height, width, values)
}

/// Encodes a grid as a binary PGM. Values are clamped to `[0, 1]` and
/// rounded to the nearest level.
pub fn encode_pgm(g: &SignalGrid, depth: BitDepth) -> Vec<u8> {
    let maxval = depth.maxval();
    let mut out = format!("P5\n{} {}\n{}\n", g.cols(), g.rows(), maxval).into_bytes();
    for &v in g.as_slice() {
        let level = (v.clamp(0.0, 1.0) * maxval as f64).round() as u32;
        match depth {
            BitDepth::Eight => out.push(level as u8),
            BitDepth::Sixteen => out.extend_from_slice(&(level as u16).to_be_bytes()),
        }
    }
    out
}

pub fn read_image(path: impl AsRef<Path>) -> Result<SignalGrid> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_image(path: impl AsRef<Path>, g: &SignalGrid, depth: BitDepth) -> Result<()> {
    fs::write(path, encode_pgm(g, depth))?;
    Ok(())
}

/// Decodes a `CSCB1` container into its planes.
pub fn decode_array(bytes: &[u8]) -> Result<Vec<SignalGrid>> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| CscError::parse(bytes.len(), "missing header line"))?;
    let header = std::str::from_utf8(&bytes[..newline]).map_err(|_| CscError::parse(0, "header is not ASCII"))?;
    let mut fields = header.split(' ');
    if fields.next() != Some(ARRAY_MAGIC) {
        return Err(CscError::parse(0, format!("bad magic, expected '{ARRAY_MAGIC}'")));
    }
    let mut dims = [0usize; 3];
    let mut offset = ARRAY_MAGIC.len() + 1;
    for (slot, name) in dims.iter_mut().zip(["rows", "cols", "planes"]) {
        let text = fields
            .next()
            .ok_or_else(|| CscError::parse(offset.min(newline), format!("missing {name}")))?;
        *slot = text
            .parse()
            .map_err(|_| CscError::parse(offset, format!("invalid {name} '{text}'")))?;
        if *slot == 0 {
            return Err(CscError::parse(offset, format!("{name} must be positive")));
        }
        offset += text.len() + 1;
    }
    if fields.next().is_some() {
        return Err(CscError::parse(offset, "unexpected trailing header field"));
    }
    let [rows, cols, planes] = dims;
    let count = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(planes))
        .and_then(|n| n.checked_mul(8).map(|_| n))
        .ok_or_else(|| CscError::parse(0, format!("dimensions {rows}x{cols}x{planes} overflow")))?;
    let body = &bytes[newline + 1..];
    if body.len() != count * 8 {
        return Err(CscError::parse(
            newline + 1 + body.len().min(count * 8),
            format!("expected {} payload bytes, found {}", count * 8, body.len()),
        ));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(CscError::parse(newline + 1 + i * 8, "non-finite value"));
    }
    let plane_len = rows * cols;
    Ok(values
        .chunks_exact(plane_len)
        .map(|c| SignalGrid::from_raw(rows, cols, c.to_vec()))
        .collect())
}

/// Encodes equally sized planes as a `CSCB1` container.
pub fn encode_array(planes: &[SignalGrid]) -> Result<Vec<u8>> {
    let first = planes
        .first()
        .ok_or_else(|| CscError::invalid("array must contain at least one plane"))?;
    if planes.iter().any(|p| !p.same_dims(first)) {
        return Err(CscError::invalid("all planes must share the same dimensions"));
    }
    let mut out = format!("{ARRAY_MAGIC} {} {} {}\n", first.rows(), first.cols(), planes.len()).into_bytes();
    out.reserve(planes.len() * first.len() * 8);
    for p in planes {
        for v in p.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn read_array(path: impl AsRef<Path>) -> Result<Vec<SignalGrid>> {
    decode_array(&fs::read(path)?)
}

pub fn write_array(path: impl AsRef<Path>, planes: &[SignalGrid]) -> Result<()> {
    fs::write(path, encode_array(planes)?)?;
    Ok(())
}

/// Shortest text form of `v` that parses back to the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Builds CSV text with `.` decimals and `\n` line endings.
#[derive(Debug, Default)]
pub struct CsvTable {
    text: String,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut t = Self::default();
        t.text.push_str(&header.join(","));
        t.text.push('\n');
        t
    }

    pub fn push_row<I, T>(&mut self, cells: I)
    where
        I: IntoIterator<Item = T>,
        T: ToString,
    {
        let row: Vec<String> = cells.into_iter().map(|c| c.to_string()).collect();
        self.text.push_str(&row.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }

    /// Number of data rows.
    pub fn row_count(&self) -> usize {
        self.text.lines().count().saturating_sub(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_round_trip_is_bit_exact() {
        let g = SignalGrid::from_vec(2, 2, vec![0.1, -1.0 / 3.0, 1e300, -0.0]).unwrap();
        let bytes = encode_array(std::slice::from_ref(&g)).unwrap();
        let back = decode_array(&bytes).unwrap();
        assert_eq!(back.len(), 1);
        for (a, b) in back[0].as_slice().iter().zip(g.as_slice()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn array_header_example() {
        let mut bytes = b"CSCB1 2 2 1\n".to_vec();
        for v in [1.0f64, 2.0, 3.0, 4.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let planes = decode_array(&bytes).unwrap();
        assert_eq!(planes.len(), 1);
        assert_eq!(planes[0].dims(), (2, 2));
        assert_eq!(planes[0].as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn array_errors() {
        assert!(matches!(decode_array(b"CSCB2 1 1 1\n\0\0\0\0\0\0\0\0"), Err(CscError::Parse { offset: 0, .. })));
        let truncated = decode_array(b"CSCB1 1 1 1\n\0\0\0");
        assert!(matches!(truncated, Err(CscError::Parse { offset: 15, .. })), "{truncated:?}");
        assert!(decode_array(b"CSCB1 1 x 1\n").is_err());
        assert!(decode_array(b"CSCB1 99999999999 99999999999 99999999999\n").is_err());
        assert!(decode_array(b"CSCB1 1 1\n").is_err());
        assert!(decode_array(b"no newline").is_err());
    }

    #[test]
    fn pgm_8bit_scaling() {
        let bytes = b"P5\n# comment\n2 1\n255\n\xff\x00";
        let g = decode_pgm(bytes).unwrap();
        assert_eq!(g.dims(), (1, 2));
        assert_eq!(g.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn pgm_16bit_round_trip() {
        let g = SignalGrid::from_vec(2, 3, vec![0.0, 1.0, 0.5, 0.25, 1.0 / 65535.0, 0.75]).unwrap();
        let back = decode_pgm(&encode_pgm(&g, BitDepth::Sixteen)).unwrap();
        assert!(back.max_abs_diff(&g) <= 0.5 / 65535.0);
        let eight = decode_pgm(&encode_pgm(&g, BitDepth::Eight)).unwrap();
        assert!(eight.max_abs_diff(&g) <= 0.5 / 255.0 + 1e-12);
    }

    #[test]
    fn pgm_errors_carry_offsets() {
        assert!(matches!(decode_pgm(b"P2\n1 1\n255\n\x00"), Err(CscError::Parse { offset: 0, .. })));
        assert!(matches!(decode_pgm(b"P5\n2 2\n255\n\x00"), Err(CscError::Parse { offset: 12, .. })));
        assert!(matches!(decode_pgm(b"P5\n2 x\n255\n"), Err(CscError::Parse { offset: 5, .. })));
        assert!(decode_pgm(b"P5\n1 1\n100\n\xff").is_err());
        assert!(decode_pgm(b"P5\n1 1\n70000\n\x00\x00").is_err());
    }

    #[test]
    fn csv_rows() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push_row([fmt_f64(1.5), fmt_f64(-0.25)]);
        t.push_row([fmt_f64(2.0), fmt_f64(1e-20)]);
        assert_eq!(t.as_str(), "a,b\n1.5,-0.25\n2.0,1e-20\n");
        assert_eq!(t.row_count(), 2);
    }
}
