//! PNG output for rendered fields and streamline overlays.

use std::io::Write;
use std::path::Path;

use ffeinr_core::viz::{RgbImage, Streamline};
use ffeinr_core::Extents;

use crate::error::{FfError, Result};

/// Nearest-neighbour enlargement by an integer factor.
pub fn upscale(img: &RgbImage, k: usize) -> RgbImage {
    let k = k.max(1);
    let (w, h) = (img.width * k, img.height * k);
    let mut data = Vec::with_capacity(w * h * 3);
    for r in 0..h {
        for c in 0..w {
            data.extend_from_slice(&img.pixel(r / k, c / k));
        }
    }
    RgbImage { width: w, height: h, data, min: img.min, max: img.max }
}

/// Draws polylines given in physical coordinates. Row 0 of the image is
/// `y_min`, matching the grid.
pub fn draw_streamlines(img: &mut RgbImage, extents: Extents, lines: &[Streamline], color: [u8; 3]) {
    let to_px = |p: [f64; 2]| {
        (
            (p[0] - extents.x_min) / extents.width() * (img.width - 1) as f64,
            (p[1] - extents.y_min) / extents.height() * (img.height - 1) as f64,
        )
    };
    for line in lines {
        for seg in line.points.windows(2) {
            let (x0, y0) = to_px(seg[0]);
            let (x1, y1) = to_px(seg[1]);
            let n = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as usize;
            for i in 0..=n {
                let f = i as f64 / n as f64;
                let (x, y) = (x0 + (x1 - x0) * f, y0 + (y1 - y0) * f);
                let (c, r) = (x.round() as usize, y.round() as usize);
                if r < img.height && c < img.width {
                    let at = 3 * (r * img.width + c);
                    img.data[at..at + 3].copy_from_slice(&color);
                }
            }
        }
    }
}

/// Encodes an 8-bit RGB PNG with `y` increasing upward, so the first grid
/// row becomes the bottom image row.
pub fn encode_png(img: &RgbImage, out: impl Write) -> Result<()> {
    if img.width == 0 || img.height == 0 {
        return Err(FfError::format("empty image"));
    }
    let mut enc = png::Encoder::new(out, img.width as u32, img.height as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    enc.add_text_chunk("value_min".into(), format!("{:?}", img.min))?;
    enc.add_text_chunk("value_max".into(), format!("{:?}", img.max))?;
    let mut w = enc.write_header()?;
    let stride = img.width * 3;
    let flipped: Vec<u8> = img.data.chunks_exact(stride).rev().flatten().copied().collect();
    w.write_image_data(&flipped)?;
    w.finish()?;
    Ok(())
}

pub fn save_png(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    encode_png(img, f)
}
