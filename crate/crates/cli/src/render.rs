//! Raster output for density maps.
//!
//! Values are drawn on a log₁₀ scale between a fixed floor and the panel
//! maximum. The gradient runs blue, cyan, green, yellow, red with equal
//! spacing; anything at or below the floor is pure blue.

use std::io::Write;

pub const DEFAULT_FLOOR: f64 = 1e-5;

const STOPS: [[f64; 3]; 5] = [
    [0.0, 0.0, 255.0],
    [0.0, 255.0, 255.0],
    [0.0, 255.0, 0.0],
    [255.0, 255.0, 0.0],
    [255.0, 0.0, 0.0],
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples, row 0 at the top.
    pub pixels: Vec<u8>,
}

impl RenderedImage {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let k = 3 * (y * self.width + x);
        [self.pixels[k], self.pixels[k + 1], self.pixels[k + 2]]
    }

    /// Binary PPM (`P6`, maxval 255).
    pub fn write_ppm(&self, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.pixels)
    }
}

/// Colour for `value` on a panel whose largest value is `max`.
pub fn palette(value: f64, max: f64, floor: f64) -> [u8; 3] {
    if !(value > floor) {
        return [0, 0, 255];
    }
    let lo = floor.log10();
    let hi = max.log10();
    let s = if hi > lo {
        ((value.log10() - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let pos = s * (STOPS.len() - 1) as f64;
    let k = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - k as f64;
    let mut rgb = [0u8; 3];
    for c in 0..3 {
        let v = STOPS[k][c] + f * (STOPS[k + 1][c] - STOPS[k][c]);
        rgb[c] = v.round() as u8;
    }
    rgb
}

/// Render a `cols × rows` grid, `cell(c, r)` giving the value with `r = 0`
/// at the top. Each cell becomes a `scale × scale` block. Returns the image
/// and the panel maximum used for normalisation.
pub fn render_grid(
    cols: usize,
    rows: usize,
    scale: usize,
    floor: f64,
    cell: impl Fn(usize, usize) -> f64,
) -> (RenderedImage, f64) {
    let scale = scale.max(1);
    let mut max = 0.0f64;
    for r in 0..rows {
        for c in 0..cols {
            max = max.max(cell(c, r));
        }
    }
    let (width, height) = (cols * scale, rows * scale);
    let mut pixels = Vec::with_capacity(3 * width * height);
    for y in 0..height {
        for x in 0..width {
            pixels.extend_from_slice(&palette(cell(x / scale, y / scale), max, floor));
        }
    }
    (RenderedImage { width, height, pixels }, max)
}

/// Pixel block size that brings the longer side to at least 256 pixels.
pub fn upscale_for(cols: usize, rows: usize) -> usize {
    let side = cols.max(rows).max(1);
    256usize.div_ceil(side).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_floor() {
        assert_eq!(palette(0.0, 1.0, DEFAULT_FLOOR), [0, 0, 255]);
        assert_eq!(palette(1e-5, 1.0, DEFAULT_FLOOR), [0, 0, 255]);
        assert_eq!(palette(1.0, 1.0, DEFAULT_FLOOR), [255, 0, 0]);
        // Halfway in log space is the green stop.
        assert_eq!(palette(10f64.powf(-2.5), 1.0, DEFAULT_FLOOR), [0, 255, 0]);
    }

    #[test]
    fn ppm_header_and_size() {
        let (img, max) = render_grid(2, 3, 2, DEFAULT_FLOOR, |c, r| (c + r) as f64);
        assert_eq!(max, 3.0);
        assert_eq!((img.width, img.height), (4, 6));
        let mut out = Vec::new();
        img.write_ppm(&mut out).unwrap();
        assert!(out.starts_with(b"P6\n4 6\n255\n"));
        assert_eq!(out.len(), 11 + 4 * 6 * 3);
        assert_eq!(img.pixel(3, 5), [255, 0, 0]);
    }
}
