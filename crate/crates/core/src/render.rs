//! Image encodings for classified grids.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::catalog::EntireMapSpec;
use crate::error::Result;
use crate::orbits::{classify_grid, ClassGrid, Window};

/// Everything needed to reproduce a rendered image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub map: EntireMapSpec,
    pub window: Window,
    pub resolution: (usize, usize),
    #[serde(rename = "R")]
    pub escape_radius: f64,
    pub horizon: usize,
}

/// JSON sidecar written next to every image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(flatten)]
    pub spec: RenderSpec,
    pub black_pixels: usize,
    pub encoding: String,
}

impl RenderSpec {
    pub fn render(&self) -> Result<ClassGrid> {
        classify_grid(&self.map, &self.window, self.resolution, self.escape_radius, self.horizon)
    }

    pub fn sidecar(&self, grid: &ClassGrid) -> Sidecar {
        Sidecar {
            spec: self.clone(),
            black_pixels: grid.black_count(),
            encoding: "0 = orbit stayed large (or overflowed), 255 = orbit fell below R".into(),
        }
    }
}

/// Binary PGM (`P5`), maxval 255.
pub fn write_pgm<W: Write>(grid: &ClassGrid, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", grid.width, grid.height)?;
    out.write_all(&grid.gray_bytes())?;
    out.flush()
}

/// Parse a binary PGM with maxval 255; returns `(width, height, pixels)`.
pub fn read_pgm(bytes: &[u8]) -> Option<(usize, usize, Vec<u8>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return None;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?.to_string());
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return None;
    }
    let (w, h): (usize, usize) = (fields[1].parse().ok()?, fields[2].parse().ok()?);
    let data = bytes.get(pos + 1..)?;
    (data.len() == w * h).then(|| (w, h, data.to_vec()))
}
