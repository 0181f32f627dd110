use crate::error::{Error, Result};
use crate::mesh::Vec3;

/// Pinhole camera on a sphere around the origin, looking at the origin.
///
/// Azimuth 0 / elevation 0 sits on +z; positive azimuth turns toward +x and
/// positive elevation raises the camera toward +y. Image rows grow downward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub azimuth: f64,
    pub elevation: f64,
    pub radius: f64,
    pub fov_y: f64,
    pub width: u32,
    pub height: u32,
    position: Vec3,
    forward: Vec3,
    right: Vec3,
    up: Vec3,
    tan_half: f64,
}

/// Where a 3D point lands in the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Continuous pixel coordinates; pixel `(i, j)` spans `[i, i+1) x [j, j+1)`.
    pub x: f64,
    pub y: f64,
    /// Euclidean distance from the camera center.
    pub distance: f64,
}

impl Projection {
    pub fn pixel(&self, width: u32, height: u32) -> Option<(u32, u32)> {
        let (px, py) = (self.x.floor(), self.y.floor());
        (px >= 0.0 && py >= 0.0 && px < width as f64 && py < height as f64)
            .then_some((px as u32, py as u32))
    }
}

impl Camera {
    pub fn new(
        azimuth: f64,
        elevation: f64,
        radius: f64,
        fov_y: f64,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        if !(fov_y > 0.0 && fov_y < 180.0) {
            return Err(Error::InvalidCamera(format!("fov_y {fov_y} not in (0, 180)")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidCamera(format!("radius {radius} must be positive")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("zero resolution".into()));
        }
        if !azimuth.is_finite() || !elevation.is_finite() {
            return Err(Error::InvalidCamera("non-finite angles".into()));
        }
        let (az, el) = (azimuth.to_radians(), elevation.to_radians());
        let position = Vec3::new(el.cos() * az.sin(), el.sin(), el.cos() * az.cos()) * radius;
        let forward = (-position).normalize();
        let right = forward
            .cross(&Vec3::y())
            .try_normalize(1e-9)
            .unwrap_or_else(|| Vec3::new(az.cos(), 0.0, -az.sin()));
        let up = right.cross(&forward);
        Ok(Camera {
            azimuth,
            elevation,
            radius,
            fov_y,
            width,
            height,
            position,
            forward,
            right,
            up,
            tan_half: (fov_y.to_radians() * 0.5).tan(),
        })
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    /// Unit direction from the camera toward its target (the origin).
    pub fn view_direction(&self) -> Vec3 {
        self.forward
    }

    pub fn right(&self) -> Vec3 {
        self.right
    }

    pub fn up(&self) -> Vec3 {
        self.up
    }

    pub fn resolution(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    /// Camera-space coordinates `(right, up, forward)` of a world point.
    pub fn to_camera(&self, p: Vec3) -> Vec3 {
        let d = p - self.position;
        Vec3::new(d.dot(&self.right), d.dot(&self.up), d.dot(&self.forward))
    }

    /// Continuous pixel coordinates of a camera-space point in front of the
    /// camera.
    pub fn camera_to_pixel(&self, c: Vec3) -> [f64; 2] {
        let x_ndc = c.x / (c.z * self.tan_half * self.aspect());
        let y_ndc = c.y / (c.z * self.tan_half);
        [
            (x_ndc + 1.0) * 0.5 * self.width as f64,
            (1.0 - y_ndc) * 0.5 * self.height as f64,
        ]
    }

    /// Projects a world point; `None` when it is not in front of the camera.
    pub fn project(&self, p: Vec3) -> Option<Projection> {
        let c = self.to_camera(p);
        if c.z <= 1e-9 {
            return None;
        }
        let [x, y] = self.camera_to_pixel(c);
        Some(Projection {
            x,
            y,
            distance: (p - self.position).norm(),
        })
    }

    /// Unit world-space ray through continuous pixel coordinates.
    pub fn ray_direction(&self, x: f64, y: f64) -> Vec3 {
        let x_ndc = 2.0 * x / self.width as f64 - 1.0;
        let y_ndc = 1.0 - 2.0 * y / self.height as f64;
        (self.forward
            + self.right * (x_ndc * self.tan_half * self.aspect())
            + self.up * (y_ndc * self.tan_half))
            .normalize()
    }

    /// Ray through the center of pixel `(px, py)`.
    pub fn pixel_ray(&self, px: u32, py: u32) -> Vec3 {
        self.ray_direction(px as f64 + 0.5, py as f64 + 0.5)
    }
}

/// Ring of `n` cameras with evenly spaced azimuths and elevations that
/// alternate `+elevation`, `-elevation`, starting positive.
pub fn default_view_ring(
    n: usize,
    elevation: f64,
    radius: f64,
    fov_y: f64,
    width: u32,
    height: u32,
) -> Result<Vec<Camera>> {
    (0..n)
        .map(|i| {
            let az = 360.0 * i as f64 / n as f64;
            let el = if i % 2 == 0 { elevation } else { -elevation };
            Camera::new(az, el, radius, fov_y, width, height)
        })
        .collect()
}
