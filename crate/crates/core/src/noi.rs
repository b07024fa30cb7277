//! Non-observable issue (NOI) classification.
//!
//! A failure region is captured twice at `fail_min`: once as rendered and
//! once with the affected element hidden. If no pixel in the region changes,
//! the failure has no visible manifestation.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{FailureReport, Observability};
use crate::par::{map_slice, Execution};
use crate::snapshot::{BBox, CaptureBundle};

#[derive(Debug, Error)]
pub enum NoiError {
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("region {0:?} lies outside the {1}x{2} raster")]
    RegionOutOfBounds(BBox, u32, u32),
    #[error("{path}: {message}")]
    Image { path: String, message: String },
}

/// 8-bit RGBA raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32, fill: [u8; 4]) -> Self {
        let pixels = fill.iter().copied().cycle().take((width * height * 4) as usize).collect();
        Self { width, height, pixels }
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let i = ((y * self.width + x) * 4) as usize;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2], self.pixels[i + 3]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgba: [u8; 4]) {
        let i = ((y * self.width + x) * 4) as usize;
        self.pixels[i..i + 4].copy_from_slice(&rgba);
    }

    pub fn full_region(&self) -> BBox {
        BBox::new(0.0, 0.0, self.width as f64, self.height as f64)
    }

    pub fn read_png(path: &Path) -> Result<Self, NoiError> {
        let err = |message: String| NoiError::Image {
            path: path.display().to_string(),
            message,
        };
        let file = fs::File::open(path).map_err(|e| err(e.to_string()))?;
        let mut decoder = png::Decoder::new(std::io::BufReader::new(file));
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder.read_info().map_err(|e| err(e.to_string()))?;
        let mut buf = vec![0; reader.output_buffer_size().ok_or_else(|| err("image too large".into()))?];
        let info = reader.next_frame(&mut buf).map_err(|e| err(e.to_string()))?;
        let data = &buf[..info.buffer_size()];
        let pixels = match info.color_type {
            png::ColorType::Rgba => data.to_vec(),
            png::ColorType::Rgb => data.chunks(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect(),
            png::ColorType::GrayscaleAlpha => data.chunks(2).flat_map(|p| [p[0], p[0], p[0], p[1]]).collect(),
            png::ColorType::Grayscale => data.iter().flat_map(|&g| [g, g, g, 255]).collect(),
            png::ColorType::Indexed => return Err(err("unexpanded palette image".into())),
        };
        Ok(Self {
            width: info.width,
            height: info.height,
            pixels,
        })
    }

    pub fn write_png(&self, path: &Path) -> Result<(), NoiError> {
        let err = |message: String| NoiError::Image {
            path: path.display().to_string(),
            message,
        };
        let file = fs::File::create(path).map_err(|e| err(e.to_string()))?;
        let mut encoder = png::Encoder::new(BufWriter::new(file), self.width, self.height);
        encoder.set_color(png::ColorType::Rgba);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(|e| err(e.to_string()))?;
        writer.write_image_data(&self.pixels).map_err(|e| err(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiConfig {
    /// A channel differs when |a - b| exceeds this.
    pub channel_threshold: u8,
    /// Observable iff at least this many pixels differ.
    pub min_diff_pixels: u64,
}

impl Default for NoiConfig {
    fn default() -> Self {
        Self {
            channel_threshold: 0,
            min_diff_pixels: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiVerdict {
    pub observability: Observability,
    pub differing_pixels: u64,
}

/// Pixel range covered by `region`, expanded outward to whole pixels.
fn pixel_span(region: &BBox, width: u32, height: u32) -> Result<(u32, u32, u32, u32), NoiError> {
    let x0 = region.x.floor();
    let y0 = region.y.floor();
    let x1 = region.right().ceil();
    let y1 = region.bottom().ceil();
    if !region.is_valid() || x0 < 0.0 || y0 < 0.0 || x1 > width as f64 || y1 > height as f64 {
        return Err(NoiError::RegionOutOfBounds(*region, width, height));
    }
    Ok((x0 as u32, y0 as u32, x1 as u32, y1 as u32))
}

/// Counts pixels within `region` where any channel differs by more than
/// `channel_threshold`.
pub fn differing_pixels(a: &Raster, b: &Raster, region: &BBox, channel_threshold: u8) -> Result<u64, NoiError> {
    if a.width != b.width || a.height != b.height {
        return Err(NoiError::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    let (x0, y0, x1, y1) = pixel_span(region, a.width, a.height)?;
    let mut count = 0;
    for y in y0..y1 {
        let row = (y * a.width) as usize * 4;
        for x in x0..x1 {
            let i = row + x as usize * 4;
            let differs = (0..4).any(|c| a.pixels[i + c].abs_diff(b.pixels[i + c]) > channel_threshold);
            count += u64::from(differs);
        }
    }
    Ok(count)
}

pub fn classify_noi(visible: &Raster, hidden: &Raster, region: &BBox, config: &NoiConfig) -> Result<NoiVerdict, NoiError> {
    let differing = differing_pixels(visible, hidden, region, config.channel_threshold)?;
    let observability = if differing >= config.min_diff_pixels {
        Observability::Observable
    } else {
        Observability::Noi
    };
    Ok(NoiVerdict {
        observability,
        differing_pixels: differing,
    })
}

/// Classifies every report that has a screenshot pair in the bundle; the
/// others keep `unknown`. Reports are never dropped.
pub fn annotate(
    bundle: &CaptureBundle,
    reports: &[FailureReport],
    config: &NoiConfig,
    exec: Execution,
) -> Result<Vec<FailureReport>, NoiError> {
    let root = bundle.root_dir().map(Path::to_path_buf).unwrap_or_default();
    let verdicts = map_slice(reports, exec, |r| -> Result<Option<NoiVerdict>, NoiError> {
        let Some(pair) = bundle.screenshots().get(&r.id) else {
            return Ok(None);
        };
        let visible = Raster::read_png(&root.join(&pair.visible))?;
        let hidden = Raster::read_png(&root.join(&pair.hidden))?;
        classify_noi(&visible, &hidden, &pair.region, config).map(Some)
    });
    reports
        .iter()
        .zip(verdicts)
        .map(|(r, v)| {
            let mut r = r.clone();
            if let Some(v) = v? {
                r.observability = v.observability;
                r.differing_pixels = Some(v.differing_pixels);
            }
            Ok(r)
        })
        .collect()
}
