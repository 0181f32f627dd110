use std::sync::OnceLock;

use proptest::prelude::*;

use texweave_core::fixtures;
use texweave_core::inpaint3d::{cloud_from_texture, s3i_inpaint, NormalGating, S3iOptions, TexelCloud};
use texweave_core::raster::{rasterize_uv, GeometryBuffers};
use texweave_core::seam::{detect_seams, ssa_smooth};
use texweave_core::texture::{Rgb, UvTexture};

fn buffers() -> &'static GeometryBuffers {
    static B: OnceLock<GeometryBuffers> = OnceLock::new();
    B.get_or_init(|| rasterize_uv(&fixtures::cube_sphere(4), 48, 48).unwrap())
}

/// Cloud over the fixture with pseudo-random colors; texel `i` is painted
/// when `keep(i)` holds.
fn cloud(seed: u64, keep: impl Fn(usize) -> bool) -> TexelCloud {
    let b = buffers();
    let mut tex = UvTexture::new(b.width, b.height, b.valid.clone());
    let mut state = seed | 1;
    for i in 0..tex.len() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let c = [0, 21, 42].map(|s| ((state >> s) & 0xffff) as f32 / 65535.0);
        if tex.valid[i] && keep(i) {
            tex.pixels[i] = c;
            tex.painted[i] = true;
        }
    }
    cloud_from_texture(&tex, b).unwrap()
}

fn bounds(colors: impl Iterator<Item = Rgb>) -> [(f32, f32); 3] {
    colors.fold([(f32::INFINITY, f32::NEG_INFINITY); 3], |mut acc, c| {
        for k in 0..3 {
            acc[k] = (acc[k].0.min(c[k]), acc[k].1.max(c[k]));
        }
        acc
    })
}

fn within(c: Rgb, b: &[(f32, f32); 3]) -> bool {
    (0..3).all(|k| c[k] >= b[k].0 - 1e-6 && c[k] <= b[k].1 + 1e-6)
}

fn gating() -> impl Strategy<Value = NormalGating> {
    prop_oneof![
        Just(NormalGating::Robust),
        Just(NormalGating::RawCosine),
        Just(NormalGating::Disabled)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn inpainting_stays_inside_seed_gamut(
        seed in any::<u64>(),
        stride in 2usize..9,
        k in 1usize..12,
        gating in gating(),
    ) {
        let c = cloud(seed, |i| i % stride == 0);
        prop_assume!(c.painted_count() > 0);
        let seeds = bounds((0..c.len()).filter(|&i| c.painted[i]).map(|i| c.colors[i]));
        let opts = S3iOptions { k, gating, ..S3iOptions::default() };
        let (out, _) = s3i_inpaint(&c, &opts).unwrap();
        prop_assert!(out.painted.iter().all(|p| *p));
        for i in 0..out.len() {
            if c.painted[i] {
                prop_assert_eq!(out.colors[i], c.colors[i]);
            }
            prop_assert!(within(out.colors[i], &seeds));
        }
    }

    #[test]
    fn smoothing_stays_inside_non_seam_gamut(
        seed in any::<u64>(),
        band in 1u32..4,
        k in 1usize..30,
        gating in gating(),
    ) {
        let c = cloud(seed, |_| true);
        let b = buffers();
        let seam = detect_seams(&b.valid, b.width, b.height, band);
        let on_seam = |i: usize| seam.mask[c.texels[i] as usize];
        let outside = bounds((0..c.len()).filter(|&i| !on_seam(i)).map(|i| c.colors[i]));
        let out = ssa_smooth(&c, &seam, k, gating).unwrap();
        for i in 0..c.len() {
            if on_seam(i) {
                prop_assert!(within(out.colors[i], &outside));
            } else {
                prop_assert_eq!(out.colors[i], c.colors[i]);
            }
        }
    }
}
