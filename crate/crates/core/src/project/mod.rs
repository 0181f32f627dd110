//! Cameras, occlusion-aware inverse projection and multi-view fusion.

mod camera;
mod fusion;
mod occlusion;
mod views;

pub use camera::{default_view_ring, Camera, Projection};
pub use fusion::{
    fuse_layers, inverse_project, FusedTexture, OcclusionReport, PerViewUvLayer,
    ProjectionParams, ViewExclusions,
};
pub use occlusion::{default_occlusion_delta, detect_occlusion, Visibility, VisibilityMap};
pub use views::{
    load_views, project_views, sync_roundtrip, ManifestView, SyncReport, ViewManifest, ViewSet,
};
