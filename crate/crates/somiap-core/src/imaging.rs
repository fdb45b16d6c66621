//! Shared image substrate: 8-bit color/gray buffers, bilinear resampling and
//! integral images for O(1) rectangle sums.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{contract, Error, Result};

/// Row-major RGB image, 8 bits per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl ColorImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(contract("image dimensions must be at least 1x1"));
        }
        if data.len() != width as usize * height as usize * 3 {
            return Err(contract("color data length must be width*height*3"));
        }
        Ok(ColorImage {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn rgb(&self, x: u32, y: u32) -> (u8, u8, u8) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        (self.data[i], self.data[i + 1], self.data[i + 2])
    }

    /// Extracts one channel (0 = R, 1 = G, 2 = B) as a gray plane.
    pub fn channel_plane(&self, channel: usize) -> GrayImage {
        debug_assert!(channel < 3);
        let mut data = Vec::with_capacity(self.width as usize * self.height as usize);
        for px in self.data.chunks_exact(3) {
            data.push(px[channel]);
        }
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Row-major 8-bit intensity image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(contract("image dimensions must be at least 1x1"));
        }
        if data.len() != width as usize * height as usize {
            return Err(contract("gray data length must be width*height"));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn crop(&self, r: Rect) -> Result<GrayImage> {
        check_bounds(r, self.width, self.height)?;
        let mut data = Vec::with_capacity(r.w as usize * r.h as usize);
        for dy in 0..r.h {
            let y = (r.y + dy as i64) as usize;
            let start = y * self.width as usize + r.x as usize;
            data.extend_from_slice(&self.data[start..start + r.w as usize]);
        }
        Ok(GrayImage {
            width: r.w,
            height: r.h,
            data,
        })
    }
}

/// Axis-aligned pixel rectangle; `w` and `h` are at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: i64,
    pub y: i64,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub const fn new(x: i64, y: i64, w: u32, h: u32) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    /// Intersection-over-union of two rectangles.
    pub fn iou(&self, other: &Rect) -> f64 {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = (self.x + self.w as i64).min(other.x + other.w as i64);
        let y1 = (self.y + self.h as i64).min(other.y + other.h as i64);
        if x1 <= x0 || y1 <= y0 {
            return 0.0;
        }
        let inter = (x1 - x0) as f64 * (y1 - y0) as f64;
        let union = self.area() as f64 + other.area() as f64 - inter;
        inter / union
    }
}

fn check_bounds(r: Rect, image_w: u32, image_h: u32) -> Result<()> {
    let inside = r.w >= 1
        && r.h >= 1
        && r.x >= 0
        && r.y >= 0
        && r.x + r.w as i64 <= image_w as i64
        && r.y + r.h as i64 <= image_h as i64;
    if inside {
        Ok(())
    } else {
        Err(Error::OutOfBounds {
            x: r.x,
            y: r.y,
            w: r.w,
            h: r.h,
            image_w,
            image_h,
        })
    }
}

/// Cumulative sum tables over intensities and squared intensities.
///
/// `sums[y][x]` holds the sum over the half-open rectangle `[0,x) x [0,y)`,
/// so the tables are one row and one column larger than the image and their
/// first row/column are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralImage {
    image_w: u32,
    image_h: u32,
    sums: Vec<u64>,
    squared_sums: Vec<u64>,
}

impl IntegralImage {
    pub fn image_width(&self) -> u32 {
        self.image_w
    }

    pub fn image_height(&self) -> u32 {
        self.image_h
    }

    #[inline]
    fn at(&self, table: &[u64], x: usize, y: usize) -> u64 {
        table[y * (self.image_w as usize + 1) + x]
    }

    /// Sum of intensities over `r` via the four-corner formula.
    pub fn rect_sum(&self, r: Rect) -> Result<u64> {
        check_bounds(r, self.image_w, self.image_h)?;
        Ok(self.corner_sum(&self.sums, r))
    }

    /// Sum of squared intensities over `r`.
    pub fn rect_sum_squared(&self, r: Rect) -> Result<u64> {
        check_bounds(r, self.image_w, self.image_h)?;
        Ok(self.corner_sum(&self.squared_sums, r))
    }

    #[inline]
    fn corner_sum(&self, table: &[u64], r: Rect) -> u64 {
        let (x, y) = (r.x as usize, r.y as usize);
        let (xw, yh) = (x + r.w as usize, y + r.h as usize);
        self.at(table, xw, yh) + self.at(table, x, y)
            - self.at(table, xw, y)
            - self.at(table, x, yh)
    }
}

/// BT.601 luma with round-half-up: Y = round(0.299 R + 0.587 G + 0.114 B).
pub fn to_gray(img: &ColorImage) -> GrayImage {
    let mut data = Vec::with_capacity(img.width as usize * img.height as usize);
    for px in img.data.chunks_exact(3) {
        let y = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
        data.push(round_to_u8(y));
    }
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Rounds half-up and clamps to the 8-bit range.
#[inline]
pub(crate) fn round_to_u8(v: f64) -> u8 {
    let r = libm::floor(v + 0.5);
    if r <= 0.0 {
        0
    } else if r >= 255.0 {
        255
    } else {
        r as u8
    }
}

/// Bilinear resampling with pixel-center alignment.
///
/// The source coordinate of output pixel `i` is `(i + 0.5)·(src/dst) − 0.5`,
/// clamped to the source extent; samples are rounded half-up to 8 bits.
pub fn resize_bilinear(img: &GrayImage, out_w: u32, out_h: u32) -> GrayImage {
    assert!(out_w >= 1 && out_h >= 1, "target dimensions must be >= 1");
    if out_w == img.width && out_h == img.height {
        return img.clone();
    }
    let sx = img.width as f64 / out_w as f64;
    let sy = img.height as f64 / out_h as f64;
    let mut data = Vec::with_capacity(out_w as usize * out_h as usize);
    for oy in 0..out_h {
        let fy = clampf((oy as f64 + 0.5) * sy - 0.5, 0.0, img.height as f64 - 1.0);
        let y0 = fy as u32;
        let y1 = (y0 + 1).min(img.height - 1);
        let wy = fy - y0 as f64;
        for ox in 0..out_w {
            let fx = clampf((ox as f64 + 0.5) * sx - 0.5, 0.0, img.width as f64 - 1.0);
            let x0 = fx as u32;
            let x1 = (x0 + 1).min(img.width - 1);
            let wx = fx - x0 as f64;
            let top = img.pixel(x0, y0) as f64 * (1.0 - wx) + img.pixel(x1, y0) as f64 * wx;
            let bot = img.pixel(x0, y1) as f64 * (1.0 - wx) + img.pixel(x1, y1) as f64 * wx;
            data.push(round_to_u8(top * (1.0 - wy) + bot * wy));
        }
    }
    GrayImage {
        width: out_w,
        height: out_h,
        data,
    }
}

#[inline]
fn clampf(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

/// Builds the integral tables in one pass.
pub fn integral(img: &GrayImage) -> IntegralImage {
    let w = img.width as usize;
    let h = img.height as usize;
    let stride = w + 1;
    let mut sums = vec![0u64; stride * (h + 1)];
    let mut squared = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u64;
        let mut row_sq = 0u64;
        for x in 0..w {
            let v = img.data[y * w + x] as u64;
            row += v;
            row_sq += v * v;
            sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            squared[(y + 1) * stride + x + 1] = squared[y * stride + x + 1] + row_sq;
        }
    }
    IntegralImage {
        image_w: img.width,
        image_h: img.height,
        sums,
        squared_sums: squared,
    }
}
