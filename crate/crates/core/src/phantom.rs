//! Numeric scattering phantoms: a deformable head phantom built from the
//! classic ten-ellipse layout, and a distance/resolution pattern of point
//! and line scatterers, both expressed as sound-speed maps and converted to
//! the complex scattering potential `q = k0^2 (c0^2/c^2 - 1)`.

use crate::{Error, Point, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// Gridded sound-speed map (m/s). Pixel `(iz, ix)` is centered at
/// `origin + (ix * pitch, iz * pitch)`.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub speed: Array2<f64>,
    pub origin: Point,
    pub pitch: f64,
    pub c0: f64,
}

/// Complex scattering potential on the same grid as the phantom (1/m^2),
/// zero outside the scatterer support.
#[derive(Debug, Clone)]
pub struct ScatteringPotential {
    pub values: Array2<Complex64>,
    pub origin: Point,
    pub pitch: f64,
    pub k0: f64,
}

/// One radial Fourier mode of the outer-boundary deformation:
/// the boundary radius is scaled by `1 + amplitude * cos(mode * theta + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformMode {
    pub mode: u32,
    pub amplitude: f64,
    pub phase: f64,
}

/// Deformation applied to the two outermost ellipses.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Deformation {
    pub modes: Vec<DeformMode>,
}

impl Deformation {
    /// Default deformation: low-order modes that carve visible concave
    /// features into the outer boundary.
    pub fn concave_default() -> Self {
        Deformation {
            modes: vec![
                DeformMode {
                    mode: 3,
                    amplitude: 0.09,
                    phase: 0.6,
                },
                DeformMode {
                    mode: 5,
                    amplitude: 0.06,
                    phase: 2.1,
                },
            ],
        }
    }

    fn factor(&self, theta: f64) -> f64 {
        1.0 + self
            .modes
            .iter()
            .map(|m| m.amplitude * (m.mode as f64 * theta + m.phase).cos())
            .sum::<f64>()
    }
}

/// Classic ten-ellipse head layout: (intensity, a, b, x0, z0, angle_deg),
/// all geometry in units of the phantom half-size.
const HEAD_ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
    (2.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.01, 0.0230, 0.0230, 0.00, -0.6050, 0.0),
    (0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
];

/// The outermost ellipses (skull and brain) to which the boundary
/// deformation applies; interior structures are left untouched.
const OUTER_ELLIPSES: usize = 2;

/// Build the deformed head phantom.
///
/// * `pitch` - pixel size (m).
/// * `half_size` - physical half-extent of the unit layout (m); the skull
///   ellipse then spans `0.69 * half_size` by `0.92 * half_size`.
/// * `deform` - outer-boundary deformation; an empty mode list gives the
///   classic layout.
/// * `c0` - background sound speed (m/s).
/// * `speed_scale` - sound-speed offset per unit layout intensity (m/s);
///   the skull ring (intensity ~2) reaches `c0 + 2 * speed_scale`.
pub fn make_shepp_logan_modified(
    pitch: f64,
    half_size: f64,
    deform: &Deformation,
    c0: f64,
    speed_scale: f64,
) -> Result<Phantom> {
    if !(pitch > 0.0) || !(half_size > 0.0) {
        return Err(Error::Domain("pitch and half_size must be positive".into()));
    }
    if !(c0 > 0.0) {
        return Err(Error::Domain("background speed must be positive".into()));
    }
    // A radial scale factor reaching zero would fold the boundary onto
    // itself; reject well before that.
    let mut theta = 0.0;
    while theta < 2.0 * std::f64::consts::PI {
        if deform.factor(theta) < 0.05 {
            return Err(Error::Validity(format!(
                "deformation collapses the boundary at theta = {theta:.3}"
            )));
        }
        theta += 1e-3;
    }
    let max_factor = 1.0
        + deform
            .modes
            .iter()
            .map(|m| m.amplitude.abs())
            .sum::<f64>();

    let half_x = 0.69 * half_size * max_factor + 2.0 * pitch;
    let half_z = 0.92 * half_size * max_factor + 2.0 * pitch;
    let nx = ((2.0 * half_x / pitch).ceil() as usize + 1) | 1;
    let nz = ((2.0 * half_z / pitch).ceil() as usize + 1) | 1;
    let origin = Point::new(
        -pitch * (nx - 1) as f64 / 2.0,
        -pitch * (nz - 1) as f64 / 2.0,
    );

    let mut speed = Array2::from_elem((nz, nx), c0);
    for iz in 0..nz {
        for ix in 0..nx {
            let p = Point::new(origin.x + ix as f64 * pitch, origin.z + iz as f64 * pitch);
            let mut a_sum = 0.0;
            for (idx, &(val, ea, eb, ex, ez, ang)) in HEAD_ELLIPSES.iter().enumerate() {
                let local = rotate_into(
                    Point::new(p.x / half_size - ex, p.z / half_size - ez),
                    -ang.to_radians(),
                );
                // Normalized elliptical radius; <= 1 is inside.
                let rho =
                    ((local.x / ea).powi(2) + (local.z / eb).powi(2)).sqrt();
                let boundary = if idx < OUTER_ELLIPSES {
                    deform.factor(local.z.atan2(local.x))
                } else {
                    1.0
                };
                if rho <= boundary {
                    a_sum += val;
                }
            }
            if a_sum != 0.0 {
                speed[(iz, ix)] = c0 + speed_scale * a_sum;
            }
        }
    }

    Ok(Phantom {
        speed,
        origin,
        pitch,
        c0,
    })
}

fn rotate_into(p: Point, angle: f64) -> Point {
    p.rotate(angle)
}

/// Nominal spacings of the point-scatterer ladder (m), halving each step.
pub const LADDER_SPACINGS_M: [f64; 7] = [
    0.056, 0.028, 0.014, 0.007, 0.0035, 0.00175, 0.00088,
];

/// Distance/resolution pattern: two rows and two columns of point-like
/// scatterers at the halving ladder spacings, plus two solid crossing
/// lines. Point scatterers occupy a single pixel.
pub fn make_resolution_phantom(pitch: f64, c0: f64, c_scatter: f64) -> Result<Phantom> {
    if !(pitch > 0.0) {
        return Err(Error::Domain("pitch must be positive".into()));
    }
    if !(c0 > 0.0) || !(c_scatter > 0.0) {
        return Err(Error::Domain("speeds must be positive".into()));
    }

    // Ladder positions accumulated from the starting offset, centered.
    let span: f64 = LADDER_SPACINGS_M.iter().sum();
    let mut ladder = vec![-span / 2.0];
    for s in LADDER_SPACINGS_M {
        ladder.push(ladder.last().unwrap() + s);
    }

    let row_offset = 0.020; // rows at z = +-20 mm, columns at x = +-20 mm
    let line_half = 0.060; // solid crossing lines span +-60 mm

    let half = 0.064_f64.max(span / 2.0 + 2.0 * pitch);
    let n = ((2.0 * half / pitch).ceil() as usize + 1) | 1;
    let origin = Point::new(
        -pitch * (n - 1) as f64 / 2.0,
        -pitch * (n - 1) as f64 / 2.0,
    );
    let mut speed = Array2::from_elem((n, n), c0);

    let mut set_px = |p: Point| {
        let ix = ((p.x - origin.x) / pitch).round() as isize;
        let iz = ((p.z - origin.z) / pitch).round() as isize;
        if ix >= 0 && iz >= 0 && (ix as usize) < n && (iz as usize) < n {
            speed[(iz as usize, ix as usize)] = c_scatter;
        }
    };

    for &u in &ladder {
        set_px(Point::new(u, row_offset));
        set_px(Point::new(u, -row_offset));
        set_px(Point::new(row_offset, u));
        set_px(Point::new(-row_offset, u));
    }
    let mut s = -line_half;
    while s <= line_half {
        set_px(Point::new(s, 0.0));
        set_px(Point::new(0.0, s));
        s += pitch;
    }

    Ok(Phantom {
        speed,
        origin,
        pitch,
        c0,
    })
}

/// Uniform background phantom (no scatterers), mainly for zero-input tests.
pub fn make_uniform_phantom(pitch: f64, half_size: f64, c0: f64) -> Result<Phantom> {
    if !(pitch > 0.0) || !(half_size > 0.0) || !(c0 > 0.0) {
        return Err(Error::Domain("phantom parameters must be positive".into()));
    }
    let n = ((2.0 * half_size / pitch).ceil() as usize + 1) | 1;
    Ok(Phantom {
        speed: Array2::from_elem((n, n), c0),
        origin: Point::new(
            -pitch * (n - 1) as f64 / 2.0,
            -pitch * (n - 1) as f64 / 2.0,
        ),
        pitch,
        c0,
    })
}

impl Phantom {
    pub fn nz(&self) -> usize {
        self.speed.nrows()
    }

    pub fn nx(&self) -> usize {
        self.speed.ncols()
    }

    /// Physical center of pixel `(iz, ix)`.
    pub fn pixel_center(&self, iz: usize, ix: usize) -> Point {
        Point::new(
            self.origin.x + ix as f64 * self.pitch,
            self.origin.z + iz as f64 * self.pitch,
        )
    }

    /// Convert to the scattering potential `q = k0^2 (c0^2 / c^2 - 1)`.
    pub fn to_q(&self, k0: f64) -> Result<ScatteringPotential> {
        if !(k0 > 0.0) {
            return Err(Error::Domain(format!("k0 must be positive, got {k0}")));
        }
        let c0sq = self.c0 * self.c0;
        let mut values = Array2::from_elem(self.speed.dim(), Complex64::new(0.0, 0.0));
        for ((iz, ix), &c) in self.speed.indexed_iter() {
            if !(c > 0.0) {
                return Err(Error::Domain(format!(
                    "non-positive sound speed {c} at pixel ({iz}, {ix})"
                )));
            }
            if c != self.c0 {
                values[(iz, ix)] = Complex64::new(k0 * k0 * (c0sq / (c * c) - 1.0), 0.0);
            }
        }
        Ok(ScatteringPotential {
            values,
            origin: self.origin,
            pitch: self.pitch,
            k0,
        })
    }

    /// Born-validity figure `max |q| / k0^2`; weak scattering keeps it well
    /// below 1.
    pub fn born_contrast(&self) -> f64 {
        self.speed.iter().fold(0.0f64, |acc, &c| {
            acc.max((self.c0 * self.c0 / (c * c) - 1.0).abs())
        })
    }
}

impl ScatteringPotential {
    pub fn nz(&self) -> usize {
        self.values.nrows()
    }

    pub fn nx(&self) -> usize {
        self.values.ncols()
    }

    pub fn pixel_center(&self, iz: usize, ix: usize) -> Point {
        Point::new(
            self.origin.x + ix as f64 * self.pitch,
            self.origin.z + iz as f64 * self.pitch,
        )
    }

    pub fn pixel_area(&self) -> f64 {
        self.pitch * self.pitch
    }

    /// Positions and values of the nonzero pixels, row-major order.
    pub fn nonzero_pixels(&self) -> Vec<(Point, Complex64)> {
        self.values
            .indexed_iter()
            .filter(|(_, v)| v.norm_sqr() > 0.0)
            .map(|((iz, ix), &v)| (self.pixel_center(iz, ix), v))
            .collect()
    }
}
