//! STL reading and writing.
//!
//! Binary: 80-byte header, little-endian `u32` triangle count, then 50-byte
//! records (normal, three vertices as `f32` triples, `u16` attribute).
//! ASCII: `solid … facet normal … outer loop vertex ×3 endloop endfacet … endsolid`.
//! Stored normals are ignored; orientation comes from vertex order.

use std::io::Write;
use std::path::Path;

use super::soup::TriangleSoup;
use super::GeometryError;
use crate::Vec3;

/// Result of loading an STL file.
#[derive(Debug, Clone)]
pub struct LoadedStl {
    pub soup: TriangleSoup,
    /// Degenerate triangles removed while loading.
    pub dropped: usize,
}

pub fn load_stl(path: &Path) -> Result<LoadedStl, GeometryError> {
    let bytes = std::fs::read(path).map_err(|source| GeometryError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_stl(&bytes)
}

pub fn parse_stl(bytes: &[u8]) -> Result<LoadedStl, GeometryError> {
    let raw = parse_triangles(bytes)?;
    let (soup, dropped) = TriangleSoup::from_vertices(&raw)?;
    if dropped > 0 {
        log::warn!("dropped {dropped} degenerate STL triangles");
    }
    Ok(LoadedStl { soup, dropped })
}

/// Raw vertex triples without degeneracy filtering.
pub fn parse_triangles(bytes: &[u8]) -> Result<Vec<[Vec3; 3]>, GeometryError> {
    if bytes.len() >= 84 {
        let count = u32::from_le_bytes(bytes[80..84].try_into().expect("4 bytes")) as usize;
        if Some(bytes.len()) == count.checked_mul(50).and_then(|n| n.checked_add(84)) {
            return parse_binary(bytes, count);
        }
    }
    let head = bytes.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(bytes.len());
    if bytes[head..].starts_with(b"solid") {
        return parse_ascii(bytes);
    }
    if bytes.len() < 84 {
        return Err(stl_error(bytes.len(), "file too short for a binary STL header"));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().expect("4 bytes")) as usize;
    Err(stl_error(
        80,
        format!(
            "binary STL declares {count} triangles but holds {} bytes of records",
            bytes.len() - 84
        ),
    ))
}

fn stl_error(offset: usize, message: impl Into<String>) -> GeometryError {
    GeometryError::Stl {
        offset,
        message: message.into(),
    }
}

fn parse_binary(bytes: &[u8], count: usize) -> Result<Vec<[Vec3; 3]>, GeometryError> {
    let mut tris = Vec::with_capacity(count);
    for i in 0..count {
        let rec = &bytes[84 + 50 * i..84 + 50 * (i + 1)];
        let f = |k: usize| f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().expect("4 bytes")) as f64;
        let v = |j: usize| Vec3::new(f(3 + 3 * j), f(4 + 3 * j), f(5 + 3 * j));
        let tri = [v(0), v(1), v(2)];
        if tri.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(stl_error(84 + 50 * i + 12, "non-finite vertex coordinate"));
        }
        tris.push(tri);
    }
    Ok(tris)
}

struct Tokens<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.text.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.text.len() && !self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some((start, std::str::from_utf8(&self.text[start..self.pos]).unwrap_or("\u{fffd}")))
    }

    fn skip_line(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos] != b'\n' {
            self.pos += 1;
        }
    }

    fn expect(&mut self, word: &str) -> Result<usize, GeometryError> {
        match self.next() {
            Some((off, tok)) if tok == word => Ok(off),
            Some((off, tok)) => Err(stl_error(off, format!("expected `{word}`, found `{tok}`"))),
            None => Err(stl_error(self.pos, format!("expected `{word}`, found end of file"))),
        }
    }

    fn number(&mut self) -> Result<f64, GeometryError> {
        match self.next() {
            Some((off, tok)) => tok
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| stl_error(off, format!("invalid number `{tok}`"))),
            None => Err(stl_error(self.pos, "expected a number, found end of file")),
        }
    }
}

fn parse_ascii(bytes: &[u8]) -> Result<Vec<[Vec3; 3]>, GeometryError> {
    let mut tok = Tokens { text: bytes, pos: 0 };
    tok.expect("solid")?;
    tok.skip_line();
    let mut tris = Vec::new();
    loop {
        match tok.next() {
            Some((_, "facet")) => {
                tok.expect("normal")?;
                for _ in 0..3 {
                    tok.number()?;
                }
                tok.expect("outer")?;
                tok.expect("loop")?;
                let mut tri = [Vec3::zeros(); 3];
                for v in &mut tri {
                    tok.expect("vertex")?;
                    *v = Vec3::new(tok.number()?, tok.number()?, tok.number()?);
                }
                tok.expect("endloop")?;
                tok.expect("endfacet")?;
                tris.push(tri);
            }
            Some((_, "endsolid")) => return Ok(tris),
            Some((off, other)) => {
                return Err(stl_error(off, format!("expected `facet` or `endsolid`, found `{other}`")))
            }
            None => return Err(stl_error(bytes.len(), "missing `endsolid`")),
        }
    }
}

fn facet_normal(t: &[Vec3; 3]) -> Vec3 {
    let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
    let len = n.norm();
    if len > 0.0 {
        n / len
    } else {
        n
    }
}

pub fn write_binary(path: &Path, tris: &[[Vec3; 3]]) -> std::io::Result<()> {
    let mut out = Vec::with_capacity(84 + 50 * tris.len());
    let mut header = [0u8; 80];
    let tag = b"binary stl";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(tris.len() as u32).to_le_bytes());
    for t in tris {
        let n = facet_normal(t);
        for v in std::iter::once(&n).chain(t.iter()) {
            for c in v.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    std::fs::write(path, out)
}

pub fn write_ascii(path: &Path, name: &str, tris: &[[Vec3; 3]]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "solid {name}")?;
    for t in tris {
        let n = facet_normal(t);
        writeln!(out, "  facet normal {:e} {:e} {:e}", n[0], n[1], n[2])?;
        writeln!(out, "    outer loop")?;
        for v in t {
            writeln!(out, "      vertex {:e} {:e} {:e}", v[0], v[1], v[2])?;
        }
        writeln!(out, "    endloop")?;
        writeln!(out, "  endfacet")?;
    }
    writeln!(out, "endsolid {name}")?;
    out.flush()
}
