//! Gutter fill and integer-factor upscaling of UV textures.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::exec;
use crate::texture::{ColorImage, Rgb, UvTexture};

/// Fills invalid texels within Chebyshev distance `radius` of a valid texel
/// with the color of the nearest valid texel (ties go to the earlier texel
/// in scanline order). Valid texels are untouched.
pub fn dilate(texture: &UvTexture, radius: u32) -> UvTexture {
    let mut out = texture.clone();
    if radius == 0 {
        return out;
    }
    let (w, h) = (texture.width as i64, texture.height as i64);
    let r = radius as i64;
    let fills: Vec<Option<Rgb>> = exec::map_range(texture.len(), |i| {
        if texture.valid[i] {
            return None;
        }
        let (x, y) = (i as i64 % w, i as i64 / w);
        let mut best: Option<(i64, usize)> = None;
        for yy in (y - r).max(0)..=(y + r).min(h - 1) {
            for xx in (x - r).max(0)..=(x + r).min(w - 1) {
                let j = (yy * w + xx) as usize;
                if !texture.valid[j] {
                    continue;
                }
                let d = (xx - x).pow(2) + (yy - y).pow(2);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
        }
        best.map(|(_, j)| texture.pixels[j])
    });
    for (i, fill) in fills.into_iter().enumerate() {
        if let Some(c) = fill {
            out.pixels[i] = c;
            out.dilated[i] = true;
        }
    }
    out
}

/// Resamples a whole image by an integer factor.
pub trait Upscaler: Send + Sync {
    fn name(&self) -> &str;
    fn factor(&self) -> u32;
    fn upscale_image(&self, image: &ColorImage) -> Result<ColorImage>;
}

/// Returns the input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Upscaler for Identity {
    fn name(&self) -> &str {
        "identity"
    }

    fn factor(&self) -> u32 {
        1
    }

    fn upscale_image(&self, image: &ColorImage) -> Result<ColorImage> {
        Ok(image.clone())
    }
}

/// Separable Lanczos filter with a 3-lobe window.
#[derive(Debug, Clone, Copy)]
pub struct Lanczos3 {
    pub factor: u32,
}

impl Default for Lanczos3 {
    fn default() -> Self {
        Lanczos3 { factor: 2 }
    }
}

const LOBES: f64 = 3.0;

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn lanczos(x: f64) -> f64 {
    if x.abs() >= LOBES {
        0.0
    } else {
        sinc(x) * sinc(x / LOBES)
    }
}

/// Normalized taps `(offset from floor(source), weight)` for each output phase.
fn phase_tables(factor: u32) -> Vec<Vec<(i64, f64)>> {
    (0..factor)
        .map(|p| {
            let s = (p as f64 + 0.5) / factor as f64 - 0.5;
            let base = s.floor();
            let mut taps: Vec<(i64, f64)> = (-2..=3)
                .map(|o| (base as i64 + o, lanczos(s - (base + o as f64))))
                .filter(|(_, w)| *w != 0.0)
                .collect();
            let total: f64 = taps.iter().map(|t| t.1).sum();
            taps.iter_mut().for_each(|t| t.1 /= total);
            taps
        })
        .collect()
}

/// One filtering pass along rows (`stride == 1`) or columns.
fn resample_axis(
    src: &[[f64; 3]],
    lines: usize,
    len: usize,
    along_rows: bool,
    factor: u32,
    tables: &[Vec<(i64, f64)>],
) -> Vec<[f64; 3]> {
    let f = factor as usize;
    let out_len = len * f;
    let at = |line: usize, pos: usize| {
        if along_rows {
            line * len + pos
        } else {
            pos * lines + line
        }
    };
    let lines_out: Vec<Vec<[f64; 3]>> = exec::map_range(lines, |line| {
        (0..out_len)
            .map(|o| {
                let (cell, phase) = (o / f, o % f);
                let mut acc = [0.0; 3];
                for &(off, w) in &tables[phase] {
                    let pos = (cell as i64 + off).clamp(0, len as i64 - 1) as usize;
                    let c = src[at(line, pos)];
                    for k in 0..3 {
                        acc[k] += w * c[k];
                    }
                }
                acc
            })
            .collect()
    });
    let mut out = vec![[0.0; 3]; lines * out_len];
    for (line, values) in lines_out.into_iter().enumerate() {
        for (pos, v) in values.into_iter().enumerate() {
            let idx = if along_rows {
                line * out_len + pos
            } else {
                pos * lines + line
            };
            out[idx] = v;
        }
    }
    out
}

impl Upscaler for Lanczos3 {
    fn name(&self) -> &str {
        "lanczos3"
    }

    fn factor(&self) -> u32 {
        self.factor
    }

    fn upscale_image(&self, image: &ColorImage) -> Result<ColorImage> {
        if self.factor == 0 {
            return Err(Error::UpscalerMismatch("factor must be at least 1".into()));
        }
        let (w, h) = (image.width as usize, image.height as usize);
        let tables = phase_tables(self.factor);
        let src: Vec<[f64; 3]> = image.pixels.iter().map(|c| c.map(f64::from)).collect();
        let wide = resample_axis(&src, h, w, true, self.factor, &tables);
        let wf = w * self.factor as usize;
        let tall = resample_axis(&wide, wf, h, false, self.factor, &tables);
        Ok(ColorImage {
            width: image.width * self.factor,
            height: image.height * self.factor,
            pixels: tall
                .into_iter()
                .map(|c| c.map(|x| (x as f32).clamp(0.0, 1.0)))
                .collect(),
        })
    }
}

/// An externally upscaled image read from disk; must match the input size
/// times `factor`.
#[derive(Debug, Clone)]
pub struct Precomputed {
    pub path: PathBuf,
    pub factor: u32,
    image: ColorImage,
}

impl Precomputed {
    pub fn load(path: impl AsRef<Path>, factor: u32) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let image = ColorImage::load_png(&path)?;
        Ok(Precomputed { path, factor, image })
    }
}

impl Upscaler for Precomputed {
    fn name(&self) -> &str {
        "precomputed"
    }

    fn factor(&self) -> u32 {
        self.factor
    }

    fn upscale_image(&self, image: &ColorImage) -> Result<ColorImage> {
        let expected = (image.width * self.factor, image.height * self.factor);
        if self.image.dims() != expected {
            return Err(Error::UpscalerMismatch(format!(
                "{} is {}x{}, expected {}x{}",
                self.path.display(),
                self.image.width,
                self.image.height,
                expected.0,
                expected.1
            )));
        }
        Ok(self.image.clone())
    }
}

/// Nearest-neighbor enlargement of a mask.
pub fn upscale_mask(mask: &[bool], width: u32, height: u32, factor: u32) -> Vec<bool> {
    let (w, f) = (width as usize, factor as usize);
    let wf = w * f;
    (0..wf * height as usize * f)
        .map(|i| mask[(i / wf / f) * w + (i % wf) / f])
        .collect()
}

/// Upscales colors with `upscaler` and masks by nearest neighbor; the result
/// is painted wherever it is valid.
pub fn upscale(texture: &UvTexture, upscaler: &dyn Upscaler) -> Result<UvTexture> {
    let f = upscaler.factor();
    if f == 0 {
        return Err(Error::UpscalerMismatch("factor must be at least 1".into()));
    }
    let image = upscaler.upscale_image(&texture.to_image())?;
    let expected = (texture.width * f, texture.height * f);
    if image.dims() != expected {
        return Err(Error::UpscalerMismatch(format!(
            "{} produced {}x{}, expected {}x{}",
            upscaler.name(),
            image.width,
            image.height,
            expected.0,
            expected.1
        )));
    }
    let valid = upscale_mask(&texture.valid, texture.width, texture.height, f);
    let dilated = upscale_mask(&texture.dilated, texture.width, texture.height, f);
    let mut out = UvTexture::from_image(image, valid);
    out.pixels.iter_mut().for_each(|c| *c = c.map(|x| x.clamp(0.0, 1.0)));
    out.dilated = dilated;
    Ok(out)
}
