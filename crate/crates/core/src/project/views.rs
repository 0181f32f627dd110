use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    detect_occlusion, fuse_layers, inverse_project, Camera, OcclusionReport, PerViewUvLayer,
    ProjectionParams,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::mesh::TriangleMesh;
use crate::raster::{render_view, GeometryBuffers, RenderOptions, ViewRender};
use crate::texture::{ColorImage, UvTexture};

/// Cameras with their images and geometry renders, index-aligned.
#[derive(Debug, Clone)]
pub struct ViewSet {
    pub cameras: Vec<Camera>,
    pub images: Vec<ColorImage>,
    pub renders: Vec<ViewRender>,
}

impl ViewSet {
    pub fn new(
        cameras: Vec<Camera>,
        images: Vec<ColorImage>,
        renders: Vec<ViewRender>,
    ) -> Result<Self> {
        if cameras.is_empty() {
            return Err(Error::InvalidViewSet("no views".into()));
        }
        if cameras.len() != images.len() || cameras.len() != renders.len() {
            return Err(Error::InvalidViewSet(format!(
                "{} cameras, {} images, {} renders",
                cameras.len(),
                images.len(),
                renders.len()
            )));
        }
        for (i, (cam, img)) in cameras.iter().zip(&images).enumerate() {
            if cam.resolution() != img.dims() {
                return Err(Error::InvalidViewSet(format!(
                    "view {i}: image is {:?} but camera is {:?}",
                    img.dims(),
                    cam.resolution()
                )));
            }
        }
        Ok(ViewSet {
            cameras,
            images,
            renders,
        })
    }

    /// Renders geometry for every camera and pairs it with the images.
    pub fn with_renders(
        mesh: &TriangleMesh,
        cameras: Vec<Camera>,
        images: Vec<ColorImage>,
    ) -> Result<Self> {
        let renders = exec::map_slice(&cameras, |c| {
            render_view(mesh, c, None, RenderOptions::default())
        });
        ViewSet::new(cameras, images, renders)
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }
}

/// JSON view manifest: the entry point for externally generated images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewManifest {
    pub views: Vec<ManifestView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestView {
    pub image: String,
    pub azimuth: f64,
    pub elevation: f64,
    pub radius: f64,
    pub fov_y: f64,
    pub width: u32,
    pub height: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<String>,
}

impl ManifestView {
    pub fn from_camera(camera: &Camera, image: impl Into<String>) -> Self {
        ManifestView {
            image: image.into(),
            azimuth: camera.azimuth,
            elevation: camera.elevation,
            radius: camera.radius,
            fov_y: camera.fov_y,
            width: camera.width,
            height: camera.height,
            depth: None,
            depth_max: None,
            normal: None,
        }
    }

    pub fn camera(&self) -> Result<Camera> {
        Camera::new(
            self.azimuth,
            self.elevation,
            self.radius,
            self.fov_y,
            self.width,
            self.height,
        )
    }
}

impl ViewManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::error::write_json(path.as_ref(), self)
    }
}

/// Reads a manifest and its images (paths relative to the manifest).
pub fn load_views(manifest_path: impl AsRef<Path>) -> Result<(Vec<Camera>, Vec<ColorImage>)> {
    let manifest_path = manifest_path.as_ref();
    let manifest = ViewManifest::load(manifest_path)?;
    let base = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut cameras = Vec::new();
    let mut images = Vec::new();
    for (i, view) in manifest.views.iter().enumerate() {
        let camera = view.camera()?;
        let path: PathBuf = base.join(&view.image);
        let image = ColorImage::load_png(&path)?;
        if image.dims() != camera.resolution() {
            return Err(Error::InvalidViewSet(format!(
                "view {i}: {} is {:?}, manifest says {:?}",
                path.display(),
                image.dims(),
                camera.resolution()
            )));
        }
        cameras.push(camera);
        images.push(image);
    }
    if cameras.is_empty() {
        return Err(Error::InvalidViewSet(format!(
            "{} lists no views",
            manifest_path.display()
        )));
    }
    Ok((cameras, images))
}

/// Projects every view into texture space; `delta` of `None` picks the
/// default tolerance per camera.
pub fn project_views(
    mesh: &TriangleMesh,
    views: &ViewSet,
    buffers: &GeometryBuffers,
    params: ProjectionParams,
    delta: Option<f64>,
) -> (Vec<PerViewUvLayer>, OcclusionReport) {
    let idx: Vec<usize> = (0..views.len()).collect();
    let results = exec::map_slice(&idx, |&i| {
        let cam = &views.cameras[i];
        let d = delta.unwrap_or_else(|| super::default_occlusion_delta(mesh, cam));
        let vis = detect_occlusion(mesh, buffers, cam, &views.renders[i], d);
        inverse_project(&views.images[i], cam, buffers, &vis, &views.renders[i], params)
    });
    let mut layers = Vec::with_capacity(results.len());
    let mut report = OcclusionReport {
        candidates: buffers.valid_count(),
        views: Vec::new(),
    };
    for (layer, stats) in results {
        layers.push(layer);
        report.views.push(stats);
    }
    (layers, report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncReport {
    /// Mean per-channel |re-rendered - input| per view.
    pub view_errors: Vec<f64>,
    pub occlusion: OcclusionReport,
}

impl SyncReport {
    pub fn mean_error(&self) -> f64 {
        self.view_errors.iter().sum::<f64>() / self.view_errors.len().max(1) as f64
    }
}

/// Fuses the views into a texture, renders it back through every camera
/// and measures how far each view is from the consensus. The residue is
/// the cross-view inconsistency that fusion averaged away.
pub fn sync_roundtrip(
    mesh: &TriangleMesh,
    views: &ViewSet,
    buffers: &GeometryBuffers,
    params: ProjectionParams,
    delta: Option<f64>,
) -> Result<(UvTexture, SyncReport)> {
    let (layers, occlusion) = project_views(mesh, views, buffers, params, delta);
    let fused = fuse_layers(&layers, &buffers.valid)?.texture;
    let view_errors = exec::map_range(views.len(), |i| {
        let cam = &views.cameras[i];
        let render = render_view(mesh, cam, Some(&fused), RenderOptions::default());
        let colors = render.colors.as_ref().expect("textured render");
        let mut sum = 0.0;
        let mut n = 0usize;
        for y in 0..render.height {
            for x in 0..render.width {
                let k = render.index(x, y);
                if !render.hit[k] {
                    continue;
                }
                let ray = cam.pixel_ray(x, y);
                if -ray.dot(&render.normals[k]) < params.min_cos {
                    continue;
                }
                let a = colors[k];
                let b = views.images[i].get(x, y);
                sum += (0..3).map(|c| (a[c] - b[c]).abs() as f64).sum::<f64>() / 3.0;
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    });
    Ok((
        fused,
        SyncReport {
            view_errors,
            occlusion,
        },
    ))
}
