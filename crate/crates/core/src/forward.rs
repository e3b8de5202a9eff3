//! Born forward simulation: scattered pressure (and optionally its normal
//! derivative) on the boundary for every source position on the same
//! boundary.
//!
//! The discrete model is a midpoint-rule sum over scatterer pixels,
//!
//! `p(j; i) = sum_p q_p * g(r_p, r_i) * g(r_j, r_p) * A`,
//!
//! which is symmetric in (i, j) and linear in `q`. Only the scattered field
//! is produced: the incident field carries no object information and its
//! sources sit on the curve itself, outside the representation's domain of
//! validity.

use crate::geometry::BoundaryCurve;
use crate::phantom::ScatteringPotential;
use crate::special::{green2d, green2d_dn};
use crate::{par, Error, Point, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// Which field a measurement matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Scattered,
    Total,
}

/// Complex pressure for every (receiver, source) pair on the curve.
#[derive(Debug, Clone)]
pub struct MeasurementMatrix {
    /// `data[(j, i)]` = pressure at receiver `j` due to source `i`.
    pub data: Array2<Complex64>,
    pub k0: f64,
    pub field_kind: FieldKind,
    /// Hash of the curve the matrix was simulated on.
    pub curve_hash: u64,
}

/// Normal derivative of the scattered pressure at each receiver.
#[derive(Debug, Clone)]
pub struct GradientMatrix {
    pub data: Array2<Complex64>,
    pub k0: f64,
    pub curve_hash: u64,
}

/// Pixels per accumulation chunk; bounds scratch memory at
/// `2 * chunk * n_points` complex values.
const PIXEL_CHUNK: usize = 256;

fn check_support(q: &ScatteringPotential, curve: &BoundaryCurve) -> Result<Vec<(Point, Complex64)>> {
    let pixels = q.nonzero_pixels();
    let margin = q.pitch * std::f64::consts::SQRT_2;
    for (p, _) in &pixels {
        if !curve.contains_unchecked(*p) || curve.distance_to_boundary(*p) <= margin {
            return Err(Error::Validity(format!(
                "scatterer support at ({:.4}, {:.4}) touches or leaves the measurement curve",
                p.x, p.z
            )));
        }
    }
    Ok(pixels)
}

/// Generic chunked accumulation over scatterer pixels.
///
/// `recv_leg(j, p)` supplies the receiver-side factor for curve point `j`
/// and pixel position `p`; the source side is always `g(r_p, r_i)`.
fn accumulate<F>(
    curve: &BoundaryCurve,
    pixels: &[(Point, Complex64)],
    area: f64,
    k0: f64,
    recv_leg: F,
) -> Result<Array2<Complex64>>
where
    F: Fn(usize, Point) -> Result<Complex64> + Sync,
{
    let n = curve.len();
    let mut data = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    let rows = data
        .as_slice_mut()
        .expect("freshly allocated array is contiguous");

    for chunk in pixels.chunks(PIXEL_CHUNK) {
        let m = chunk.len();
        // Source-leg Green's values scaled by q A, pixel-major.
        let src: Vec<Complex64> = par::map_indexed(m * n, |idx| {
            let (pix, qv) = chunk[idx / n];
            let i = idx % n;
            green2d(k0, pix, curve.points[i]).map(|g| g * qv * area)
        })
        .into_iter()
        .collect::<Result<_>>()?;
        // Receiver-leg values, pixel-major.
        let rec: Vec<Complex64> = par::map_indexed(m * n, |idx| {
            let (pix, _) = chunk[idx / n];
            recv_leg(idx % n, pix)
        })
        .into_iter()
        .collect::<Result<_>>()?;

        // Accumulate rows in parallel; each row is owned by one task and the
        // pixel order inside is fixed, so results do not depend on the
        // thread count.
        par::chunks_mut(rows, n, 8, |row0, slab| {
            for (local_j, row) in slab.chunks_mut(n).enumerate() {
                let j = row0 + local_j;
                for p in 0..m {
                    let w = rec[p * n + j];
                    let s = &src[p * n..(p + 1) * n];
                    for i in 0..n {
                        row[i] += w * s[i];
                    }
                }
            }
        });
    }
    Ok(data)
}

/// Simulate the scattered-field measurement matrix.
///
/// The scatterer support must lie strictly inside the curve; an empty
/// support yields a valid all-zero matrix.
pub fn simulate_measurements(
    q: &ScatteringPotential,
    curve: &BoundaryCurve,
    k0: f64,
) -> Result<MeasurementMatrix> {
    if !(k0 > 0.0) {
        return Err(Error::Domain(format!("k0 must be positive, got {k0}")));
    }
    let pixels = check_support(q, curve)?;
    let data = accumulate(curve, &pixels, q.pixel_area(), k0, |j, pix| {
        green2d(k0, curve.points[j], pix)
    })?;
    Ok(MeasurementMatrix {
        data,
        k0,
        field_kind: FieldKind::Scattered,
        curve_hash: curve.geometry_hash(),
    })
}

/// Simulate the normal derivative of the scattered field at each receiver.
///
/// Recorded alongside the pressure for completeness; the Dirichlet
/// projection pipeline consumes only the pressure.
pub fn simulate_gradients(
    q: &ScatteringPotential,
    curve: &BoundaryCurve,
    k0: f64,
) -> Result<GradientMatrix> {
    if !(k0 > 0.0) {
        return Err(Error::Domain(format!("k0 must be positive, got {k0}")));
    }
    let pixels = check_support(q, curve)?;
    let data = accumulate(curve, &pixels, q.pixel_area(), k0, |j, pix| {
        green2d_dn(k0, pix, curve.points[j], curve.normals[j])
    })?;
    Ok(GradientMatrix {
        data,
        k0,
        curve_hash: curve.geometry_hash(),
    })
}

/// Free-space field of a point source evaluated at each target.
pub fn incident_field(source: Point, targets: &[Point], k0: f64) -> Result<Vec<Complex64>> {
    targets
        .iter()
        .map(|&t| green2d(k0, source, t))
        .collect()
}
