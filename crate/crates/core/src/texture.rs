//! RGB images, UV textures and their PNG encodings.

use std::path::Path;

use image::{GrayImage, ImageBuffer, Luma, Rgb as PngRgb, RgbImage};

use crate::error::{Error, Result};
use crate::mesh::Vec2;

/// Linear RGB triple in [0, 1].
pub type Rgb = [f32; 3];

/// Dense RGB image, row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
}

impl ColorImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self::filled(width, height, [0.0; 3])
    }

    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        ColorImage {
            width,
            height,
            pixels: vec![color; width as usize * height as usize],
        }
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Bilinear sample at continuous coordinates where pixel `(i, j)` has its
    /// center at `(i + 0.5, j + 0.5)`. Edges clamp. Only pixels accepted by
    /// `usable` contribute; if none of the four taps is usable the plain
    /// bilinear value is returned.
    pub fn sample_bilinear_masked(&self, x: f64, y: f64, usable: impl Fn(usize) -> bool) -> Rgb {
        bilinear(&self.pixels, self.width, self.height, x, y, usable)
    }

    pub fn sample_bilinear(&self, x: f64, y: f64) -> Rgb {
        self.sample_bilinear_masked(x, y, |_| true)
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path)
            .map_err(|e| Error::Image {
                path: path.to_path_buf(),
                source: e,
            })?
            .to_rgb8();
        Ok(from_rgb8(&img))
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        save_rgb8(&self.pixels, self.width, self.height, path.as_ref())
    }
}

pub(crate) fn bilinear(
    pixels: &[Rgb],
    width: u32,
    height: u32,
    x: f64,
    y: f64,
    usable: impl Fn(usize) -> bool,
) -> Rgb {
    let (w, h) = (width as i64, height as i64);
    let fx = x - 0.5;
    let fy = y - 0.5;
    let x0 = fx.floor();
    let y0 = fy.floor();
    let tx = fx - x0;
    let ty = fy - y0;
    let (x0, y0) = (x0 as i64, y0 as i64);
    let taps = [
        (x0, y0, (1.0 - tx) * (1.0 - ty)),
        (x0 + 1, y0, tx * (1.0 - ty)),
        (x0, y0 + 1, (1.0 - tx) * ty),
        (x0 + 1, y0 + 1, tx * ty),
    ];
    let mut acc = [0.0f64; 3];
    let mut total = 0.0f64;
    let mut plain = [0.0f64; 3];
    let mut plain_total = 0.0f64;
    for (ix, iy, wgt) in taps {
        let idx = (iy.clamp(0, h - 1) * w + ix.clamp(0, w - 1)) as usize;
        let c = pixels[idx];
        for k in 0..3 {
            plain[k] += wgt * c[k] as f64;
        }
        plain_total += wgt;
        if wgt > 0.0 && usable(idx) {
            for k in 0..3 {
                acc[k] += wgt * c[k] as f64;
            }
            total += wgt;
        }
    }
    let (acc, total) = if total > 0.0 {
        (acc, total)
    } else {
        (plain, plain_total)
    };
    [
        (acc[0] / total) as f32,
        (acc[1] / total) as f32,
        (acc[2] / total) as f32,
    ]
}

/// UV texture: color plus chart coverage (`valid`), real color
/// (`painted`, a subset of `valid`) and gutter fill (`dilated`, disjoint
/// from `valid`). Row 0 is the top of the image, i.e. v = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UvTexture {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
    pub valid: Vec<bool>,
    pub painted: Vec<bool>,
    pub dilated: Vec<bool>,
}

impl UvTexture {
    pub fn new(width: u32, height: u32, valid: Vec<bool>) -> Self {
        let n = width as usize * height as usize;
        assert_eq!(valid.len(), n, "valid mask size");
        UvTexture {
            width,
            height,
            pixels: vec![[0.0; 3]; n],
            valid,
            painted: vec![false; n],
            dilated: vec![false; n],
        }
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn index(&self, col: u32, row: u32) -> usize {
        row as usize * self.width as usize + col as usize
    }

    /// Continuous texel coordinates of a UV point (v = 0 is the bottom row).
    pub fn uv_to_texel(&self, uv: Vec2) -> (f64, f64) {
        uv_to_texel(uv, self.width, self.height)
    }

    /// Bilinear lookup at a UV coordinate, restricted to painted texels
    /// (plus gutter texels) when any of the four taps is painted.
    pub fn sample_uv(&self, uv: Vec2) -> Rgb {
        let (x, y) = self.uv_to_texel(uv);
        bilinear(&self.pixels, self.width, self.height, x, y, |i| {
            self.painted[i] || self.dilated[i]
        })
    }

    pub fn painted_count(&self) -> usize {
        self.painted
            .iter()
            .zip(&self.valid)
            .filter(|(p, v)| **p && **v)
            .count()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Wraps an RGB image as a texture whose painted region is `valid`.
    pub fn from_image(image: ColorImage, valid: Vec<bool>) -> Self {
        let mut tex = UvTexture::new(image.width, image.height, valid);
        tex.pixels = image.pixels;
        tex.painted = tex.valid.clone();
        tex
    }

    pub fn to_image(&self) -> ColorImage {
        ColorImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.clone(),
        }
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        save_rgb8(&self.pixels, self.width, self.height, path.as_ref())
    }

    pub fn check_invariants(&self) -> bool {
        let n = self.pixels.len();
        self.valid.len() == n
            && self.painted.len() == n
            && self.dilated.len() == n
            && self.painted.iter().zip(&self.valid).all(|(p, v)| !p || *v)
            && self.dilated.iter().zip(&self.valid).all(|(d, v)| !(*d && *v))
            && self
                .pixels
                .iter()
                .all(|c| c.iter().all(|x| (0.0..=1.0).contains(x)))
    }
}

pub fn uv_to_texel(uv: Vec2, width: u32, height: u32) -> (f64, f64) {
    (uv.x * width as f64, (1.0 - uv.y) * height as f64)
}

pub fn to_u8(x: f32) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn from_rgb8(img: &RgbImage) -> ColorImage {
    ColorImage {
        width: img.width(),
        height: img.height(),
        pixels: img
            .pixels()
            .map(|p| p.0.map(|c| c as f32 / 255.0))
            .collect(),
    }
}

fn save_rgb8(pixels: &[Rgb], width: u32, height: u32, path: &Path) -> Result<()> {
    let img: RgbImage = ImageBuffer::from_fn(width, height, |x, y| {
        PngRgb(pixels[y as usize * width as usize + x as usize].map(to_u8))
    });
    img.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        source: e,
    })
}

/// 8-bit grayscale mask, 255 where set.
pub fn save_mask_png(mask: &[bool], width: u32, height: u32, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let img: GrayImage = ImageBuffer::from_fn(width, height, |x, y| {
        Luma([if mask[y as usize * width as usize + x as usize] {
            255
        } else {
            0
        }])
    });
    img.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Reads a grayscale mask; texels at or above 128 are set.
pub fn load_mask_png(path: impl AsRef<Path>) -> Result<(u32, u32, Vec<bool>)> {
    let path = path.as_ref();
    let img = image::open(path)
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })?
        .to_luma8();
    Ok((
        img.width(),
        img.height(),
        img.pixels().map(|p| p.0[0] >= 128).collect(),
    ))
}
