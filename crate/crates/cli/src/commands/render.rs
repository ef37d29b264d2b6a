use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tractlab_core::orbits::{ClassGrid, Window};
use tractlab_core::render::{write_pgm, RenderSpec};

use crate::config::RenderSection;
use crate::error::{config_err, CliError, CliResult};
use crate::output::write_json;

/// A validated render request.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderJob {
    pub spec: RenderSpec,
    pub out: PathBuf,
    pub png: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RenderSummary {
    pub out: PathBuf,
    pub sidecar: PathBuf,
    pub png: Option<PathBuf>,
    pub black_pixels: usize,
}

impl RenderJob {
    pub fn from_section(s: &RenderSection) -> CliResult<Self> {
        let map = s.map.clone().ok_or_else(|| config_err("render.map", "required"))?;
        map.validate().map_err(|e| config_err("render.map", e))?;
        let window = s.window.unwrap_or(Window { re_min: -4.0, re_max: 4.0, im_min: -4.0, im_max: 4.0 });
        window.validate().map_err(|e| config_err("render.window", e))?;
        let resolution = s.resolution.unwrap_or((256, 256));
        if resolution.0 == 0 || resolution.1 == 0 {
            return Err(config_err("render.resolution", "width and height must be positive"));
        }
        let escape_radius = s.r.unwrap_or(50.0);
        if !(escape_radius > 0.0) || !escape_radius.is_finite() {
            return Err(config_err("render.R", format!("must be positive and finite, got {escape_radius}")));
        }
        let horizon = s.horizon.unwrap_or(30);
        if horizon == 0 {
            return Err(config_err("render.horizon", "must be at least 1"));
        }
        let out = s.out.clone().ok_or_else(|| config_err("render.out", "required"))?;
        Ok(Self { spec: RenderSpec { map, window, resolution, escape_radius, horizon }, out, png: s.png.clone() })
    }

    pub fn run(&self) -> CliResult<RenderSummary> {
        let grid = self.spec.render()?;
        let file = File::create(&self.out).map_err(|e| CliError::io(&self.out, e))?;
        write_pgm(&grid, BufWriter::new(file)).map_err(|e| CliError::io(&self.out, e))?;
        let sidecar = sidecar_path(&self.out);
        write_json(&sidecar, &self.spec.sidecar(&grid))?;
        if let Some(png) = &self.png {
            write_png(&grid, png)?;
        }
        log::info!("rendered {} ({} black pixels)", self.out.display(), grid.black_count());
        Ok(RenderSummary { out: self.out.clone(), sidecar, png: self.png.clone(), black_pixels: grid.black_count() })
    }
}

/// `img.pgm` gets `img.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn write_png(grid: &ClassGrid, path: &Path) -> CliResult<()> {
    let img = image::GrayImage::from_raw(grid.width as u32, grid.height as u32, grid.gray_bytes())
        .ok_or_else(|| CliError::Computation("grid size does not match its pixel buffer".into()))?;
    img.save_with_format(path, image::ImageFormat::Png).map_err(|e| CliError::io(path, std::io::Error::other(e)))
}
