use proptest::prelude::*;

use texweave_core::fixtures::{self, Patch};
use texweave_core::mesh::{TriangleMesh, Vec3};
use texweave_core::metrics::raycast_oracle;
use texweave_core::project::{
    detect_occlusion, fuse_layers, inverse_project, Camera, PerViewUvLayer, ProjectionParams,
    Visibility,
};
use texweave_core::raster::{rasterize_uv, render_view, GeometryBuffers, RenderOptions};
use texweave_core::texture::{ColorImage, Rgb};

const HALF: f64 = 0.1;

/// Small square through the origin spanned by `a` and +y.
fn quad(a: Vec3) -> TriangleMesh {
    let n = a.cross(&Vec3::y());
    fixtures::build(
        &[Patch::new(4, 4, move |s, t| {
            (a * (2.0 * s - 1.0) * HALF + Vec3::y() * (2.0 * t - 1.0) * HALF, n)
        })],
        false,
    )
}

/// Distant narrow camera so perspective barely bends the cosines.
fn far_camera(azimuth: f64) -> Camera {
    Camera::new(azimuth, 0.0, 20.0, 5.0, 256, 256).unwrap()
}

/// Image whose red channel is the normalized pixel x coordinate; bilinear
/// sampling reproduces it exactly away from the border.
fn gradient(camera: &Camera) -> ColorImage {
    let (w, h) = camera.resolution();
    let mut img = ColorImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            img.pixels[(y * w + x) as usize] = [(x as f32 + 0.5) / w as f32, 0.5, 0.5];
        }
    }
    img
}

fn project_one(
    mesh: &TriangleMesh,
    camera: &Camera,
    image: &ColorImage,
) -> (GeometryBuffers, PerViewUvLayer) {
    let buffers = rasterize_uv(mesh, 64, 64).unwrap();
    let render = render_view(mesh, camera, None, RenderOptions::default());
    let vis = detect_occlusion(mesh, &buffers, camera, &render, 1e-3);
    let (layer, _) = inverse_project(
        image,
        camera,
        &buffers,
        &vis,
        &render,
        ProjectionParams::default(),
    );
    (buffers, layer)
}

#[test]
fn aligned_camera_gives_unit_weights_and_image_colors() {
    let mesh = quad(Vec3::x());
    let camera = far_camera(0.0);
    let image = gradient(&camera);
    let (buffers, layer) = project_one(&mesh, &camera, &image);
    assert!(layer.contributing() as f64 >= 0.9 * buffers.valid_count() as f64);
    for i in 0..buffers.len() {
        if layer.weights[i] == 0.0 {
            continue;
        }
        assert!((layer.weights[i] - 1.0).abs() < 1e-3, "weight {}", layer.weights[i]);
        let p = buffers.positions[i];
        if p.x.abs() < 0.8 * HALF && p.y.abs() < 0.8 * HALF {
            let proj = camera.project(p).unwrap();
            let expected = proj.x / camera.width as f64;
            assert!((layer.colors[i][0] as f64 - expected).abs() < 1e-4);
        }
    }
}

#[test]
fn camera_behind_the_quad_contributes_nothing() {
    let mesh = quad(Vec3::x());
    let camera = far_camera(180.0);
    let (_, layer) = project_one(&mesh, &camera, &gradient(&camera));
    assert_eq!(layer.contributing(), 0);
    assert!(layer.weights.iter().all(|w| *w == 0.0));
}

#[test]
fn sixty_degree_tilt_halves_the_weight() {
    let a = Vec3::new(60f64.to_radians().cos(), 0.0, -60f64.to_radians().sin());
    let mesh = quad(a);
    let camera = far_camera(0.0);
    let (buffers, layer) = project_one(&mesh, &camera, &gradient(&camera));
    assert!(layer.contributing() as f64 >= 0.9 * buffers.valid_count() as f64);
    for w in layer.weights.iter().filter(|w| **w > 0.0) {
        assert!((w - 0.5).abs() < 1e-2, "weight {w}");
    }
}

#[test]
fn front_facing_sphere_texels_are_never_occluded() {
    let mesh = fixtures::uv_sphere(0.9, Vec3::zeros(), 32, 16);
    let buffers = rasterize_uv(&mesh, 128, 128).unwrap();
    for az in [0.0, 75.0, 200.0] {
        let camera = Camera::new(az, 20.0, 2.2, 45.0, 256, 256).unwrap();
        let render = render_view(&mesh, &camera, None, RenderOptions::default());
        let delta = texweave_core::project::default_occlusion_delta(&mesh, &camera);
        let vis = detect_occlusion(&mesh, &buffers, &camera, &render, delta);
        for i in 0..buffers.len() {
            if !buffers.valid[i] {
                continue;
            }
            let p = buffers.positions[i];
            let to_cam = (camera.position() - p).normalize();
            if to_cam.dot(&buffers.normals[i]) > 0.2 {
                assert_ne!(vis.states[i], Visibility::Occluded, "texel {i} at az {az}");
            }
        }
    }
}

#[test]
fn back_quad_behind_front_quad_is_occluded() {
    let mesh = fixtures::stacked_quads(4);
    let buffers = rasterize_uv(&mesh, 128, 128).unwrap();
    let camera = Camera::new(0.0, 0.0, 2.2, 45.0, 256, 256).unwrap();
    let render = render_view(&mesh, &camera, None, RenderOptions::default());
    let vis = detect_occlusion(&mesh, &buffers, &camera, &render, 1e-3);
    let eye = camera.position();
    let mut checked = 0;
    for i in 0..buffers.len() {
        let p = buffers.positions[i];
        if !buffers.valid[i] || p.z > 0.0 {
            continue;
        }
        let dir = (p - eye).normalize();
        let hit = raycast_oracle(&mesh, eye, dir).expect("ray toward a surface point");
        // Skip texels whose ray grazes the front quad's silhouette.
        let q = eye + dir * hit.distance;
        let inside = q.x.abs() < 0.29 && q.y.abs() < 0.29;
        if q.z > 0.0 && inside {
            assert_eq!(vis.states[i], Visibility::Occluded, "texel {i}");
            checked += 1;
        }
    }
    assert!(checked > 100, "only {checked} shadowed texels");
}

#[test]
fn surface_at_rendered_depth_is_not_occluded() {
    let mesh = quad(Vec3::x());
    let camera = far_camera(0.0);
    let buffers = rasterize_uv(&mesh, 64, 64).unwrap();
    let render = render_view(&mesh, &camera, None, RenderOptions::default());
    let vis = detect_occlusion(&mesh, &buffers, &camera, &render, 1e-3);
    assert_eq!(vis.count(Visibility::Occluded), 0);
    assert!(vis.count(Visibility::Visible) > 0);
}

fn layer(colors: Vec<Rgb>, weights: Vec<f64>) -> PerViewUvLayer {
    PerViewUvLayer {
        width: colors.len() as u32,
        height: 1,
        colors,
        weights,
    }
}

#[test]
fn fusion_is_the_normalized_weighted_mean() {
    let (c1, c2) = ([0.9f32, 0.1, 0.4], [0.2f32, 0.7, 0.4]);
    let a = layer(vec![c1, c1], vec![0.8, 0.0]);
    let b = layer(vec![c2, c2], vec![0.2, 0.0]);
    let fused = fuse_layers(&[a, b], &[true, true]).unwrap();
    for k in 0..3 {
        let expected = 0.8 * c1[k] as f64 + 0.2 * c2[k] as f64;
        assert!((fused.texture.pixels[0][k] as f64 - expected).abs() < 1e-6);
    }
    assert!(fused.texture.painted[0]);
    assert!(!fused.texture.painted[1], "texel no view observes stays unpainted");
}

#[test]
fn single_layer_fusion_is_exact() {
    let colors = vec![[0.3, 0.6, 0.9], [0.123, 0.456, 0.789]];
    let fused = fuse_layers(&[layer(colors.clone(), vec![1.0, 0.37])], &[true, true]).unwrap();
    assert_eq!(fused.texture.pixels, colors);
}

#[test]
fn fusion_rejects_mismatched_layers() {
    let a = layer(vec![[0.0; 3]; 2], vec![1.0; 2]);
    let b = layer(vec![[0.0; 3]; 3], vec![1.0; 3]);
    assert!(fuse_layers(&[a, b], &[true, true]).is_err());
    assert!(fuse_layers(&[], &[]).is_err());
}

fn arb_layers() -> impl Strategy<Value = Vec<PerViewUvLayer>> {
    let texel = (prop::array::uniform3(0.0f32..=1.0), prop_oneof![Just(0.0), 0.2f64..=1.0]);
    (1usize..6).prop_flat_map(move |n| {
        prop::collection::vec(prop::collection::vec(texel.clone(), 4), n).prop_map(|views| {
            views
                .into_iter()
                .map(|t| {
                    let (colors, weights) = t.into_iter().unzip();
                    layer(colors, weights)
                })
                .collect()
        })
    })
}

proptest! {
    #[test]
    fn fusion_is_convex(layers in arb_layers()) {
        let fused = fuse_layers(&layers, &[true; 4]).unwrap();
        for i in 0..4 {
            let seen: Vec<Rgb> = layers.iter().filter(|l| l.weights[i] > 0.0).map(|l| l.colors[i]).collect();
            prop_assert_eq!(fused.texture.painted[i], !seen.is_empty());
            for k in 0..3 {
                let lo = seen.iter().map(|c| c[k]).fold(f32::INFINITY, f32::min);
                let hi = seen.iter().map(|c| c[k]).fold(f32::NEG_INFINITY, f32::max);
                if !seen.is_empty() {
                    let v = fused.texture.pixels[i][k];
                    prop_assert!(v >= lo - 1e-6 && v <= hi + 1e-6);
                }
            }
        }
    }

    #[test]
    fn fusion_ignores_layer_order(layers in arb_layers(), seed in any::<u64>()) {
        let mut shuffled = layers.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed.rotate_left(i as u32) % (i as u64 + 1)) as usize);
        }
        let a = fuse_layers(&layers, &[true; 4]).unwrap();
        let b = fuse_layers(&shuffled, &[true; 4]).unwrap();
        prop_assert_eq!(a.texture, b.texture);
    }

    #[test]
    fn fusion_ignores_common_weight_scale(layers in arb_layers(), scale in 0.1f64..10.0) {
        let scaled: Vec<_> = layers
            .iter()
            .map(|l| layer(l.colors.clone(), l.weights.iter().map(|w| w * scale).collect()))
            .collect();
        let a = fuse_layers(&layers, &[true; 4]).unwrap();
        let b = fuse_layers(&scaled, &[true; 4]).unwrap();
        prop_assert_eq!(a.texture.pixels, b.texture.pixels);
    }
}
