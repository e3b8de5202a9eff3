//! Projection of boundary measurements onto exterior virtual lines.
//!
//! Stage one treats each measurement column (all receivers, one source) as
//! a field on the curve and projects it to every element of the source
//! line; by reciprocity the result, read along the other axis, is the field
//! on the curve due to a virtual source at that element. Stage two projects
//! those fields to the receiver line, producing `p(x_R; x_S)` as if a
//! plane-parallel transmit/receive pair had surrounded the object.
//!
//! Working frame: virtual lines are axis-aligned (constant z); a rotation
//! of the pair is realized by counter-rotating the curve about its
//! centroid, which leaves the measured samples attached to their points.

use crate::forward::MeasurementMatrix;
use crate::geometry::BoundaryCurve;
use crate::kernel::ProjectionKernel;
use crate::{par, Error, Point, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// A uniform line of virtual elements at constant `z = offset` in the
/// working frame of rotation `rotation`.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualLine {
    pub rotation: f64,
    pub offset: f64,
    pub n: usize,
    pub spacing: f64,
}

impl VirtualLine {
    /// Line of `n` elements spanning `span` metres, centered on x = 0.
    pub fn new(rotation: f64, offset: f64, span: f64, n: usize) -> Result<Self> {
        if n < 2 || !(span > 0.0) {
            return Err(Error::Domain(
                "virtual line needs at least 2 elements and a positive span".into(),
            ));
        }
        Ok(Self {
            rotation,
            offset,
            n,
            spacing: span / n as f64,
        })
    }

    pub fn span(&self) -> f64 {
        self.spacing * self.n as f64
    }

    /// Element positions in the working frame.
    pub fn positions(&self) -> Vec<Point> {
        (0..self.n)
            .map(|i| {
                Point::new(
                    (i as f64 - (self.n as f64 - 1.0) / 2.0) * self.spacing,
                    self.offset,
                )
            })
            .collect()
    }

    /// Every element must be exterior to the curve (working frame).
    pub fn validate_exterior(&self, curve: &BoundaryCurve) -> Result<()> {
        for (i, p) in self.positions().iter().enumerate() {
            if curve.contains_unchecked(*p) {
                return Err(Error::Validity(format!(
                    "virtual line element {i} at ({:.4}, {:.4}) lies inside the curve",
                    p.x, p.z
                )));
            }
        }
        Ok(())
    }
}

/// Virtual-array data `p(x_R; x_S)` for one rotation.
#[derive(Debug, Clone)]
pub struct VirtualArrayData {
    /// `data[(r, s)]` - virtual receiver r, virtual source s.
    pub data: Array2<Complex64>,
    pub line_s: VirtualLine,
    pub line_r: VirtualLine,
    pub rotation: f64,
    pub k0: f64,
}

/// View of the measurement geometry in the working frame of a rotation:
/// the curve is counter-rotated so the virtual lines stay axis-aligned.
pub fn rotate_frame(curve: &BoundaryCurve, rotation: f64) -> BoundaryCurve {
    curve.rotated(-rotation)
}

/// Quadrature projection of a boundary field to the kernel's target:
/// `sum_j field_j K_j w_j`.
pub fn project_field(
    field: &[Complex64],
    kernel: &ProjectionKernel,
    curve: &BoundaryCurve,
) -> Result<Complex64> {
    if field.len() != curve.len() || kernel.values.len() != curve.len() {
        return Err(Error::Dimension(format!(
            "field {} / kernel {} / curve {}",
            field.len(),
            kernel.values.len(),
            curve.len()
        )));
    }
    Ok(field
        .iter()
        .zip(kernel.values.iter())
        .zip(curve.weights.iter())
        .map(|((f, k), &w)| f * k * w)
        .sum())
}

/// Stage one: project every measurement column to all elements of the
/// source line. Row `s` of the result is the field on the curve due to a
/// virtual source at element `s` (reciprocity).
pub fn build_virtual_sources(
    meas: &MeasurementMatrix,
    curve: &BoundaryCurve,
    kernels: &[std::sync::Arc<ProjectionKernel>],
    line_s: &VirtualLine,
) -> Result<Array2<Complex64>> {
    line_s.validate_exterior(curve)?;
    if meas.data.nrows() != curve.len() || meas.data.ncols() != curve.len() {
        return Err(Error::Dimension(
            "measurement matrix does not match curve sampling".into(),
        ));
    }
    if kernels.len() != line_s.n {
        return Err(Error::Dimension(
            "one kernel per source-line element required".into(),
        ));
    }
    let n_c = curve.len();
    let rows = par::map_indexed(line_s.n, |s| {
        let kern = &kernels[s];
        let mut row = vec![Complex64::new(0.0, 0.0); n_c];
        // weighted kernel once per element
        let kw: Vec<Complex64> = kern
            .values
            .iter()
            .zip(curve.weights.iter())
            .map(|(k, &w)| k * w)
            .collect();
        for i in 0..n_c {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n_c {
                acc += meas.data[(j, i)] * kw[j];
            }
            row[i] = acc;
        }
        row
    });
    let mut out = Array2::from_elem((line_s.n, n_c), Complex64::new(0.0, 0.0));
    for (s, row) in rows.into_iter().enumerate() {
        for (i, v) in row.into_iter().enumerate() {
            out[(s, i)] = v;
        }
    }
    Ok(out)
}

/// Stage two: project the virtual-source fields to the receiver line.
pub fn build_virtual_receivers(
    virtual_sources: &Array2<Complex64>,
    curve: &BoundaryCurve,
    kernels: &[std::sync::Arc<ProjectionKernel>],
    line_s: &VirtualLine,
    line_r: &VirtualLine,
    k0: f64,
) -> Result<VirtualArrayData> {
    line_r.validate_exterior(curve)?;
    if virtual_sources.nrows() != line_s.n || virtual_sources.ncols() != curve.len() {
        return Err(Error::Dimension(
            "virtual-source matrix does not match line/curve".into(),
        ));
    }
    if kernels.len() != line_r.n {
        return Err(Error::Dimension(
            "one kernel per receiver-line element required".into(),
        ));
    }
    let n_c = curve.len();
    let n_s = line_s.n;
    let rows = par::map_indexed(line_r.n, |r| {
        let kern = &kernels[r];
        let kw: Vec<Complex64> = kern
            .values
            .iter()
            .zip(curve.weights.iter())
            .map(|(k, &w)| k * w)
            .collect();
        let mut row = vec![Complex64::new(0.0, 0.0); n_s];
        for s in 0..n_s {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n_c {
                acc += virtual_sources[(s, j)] * kw[j];
            }
            row[s] = acc;
        }
        row
    });
    let mut data = Array2::from_elem((line_r.n, n_s), Complex64::new(0.0, 0.0));
    for (r, row) in rows.into_iter().enumerate() {
        for (s, v) in row.into_iter().enumerate() {
            data[(r, s)] = v;
        }
    }
    Ok(VirtualArrayData {
        data,
        line_s: line_s.clone(),
        line_r: line_r.clone(),
        rotation: line_s.rotation,
        k0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::simulate_measurements;
    use crate::geometry::{sample_curve, CurveFamily, CurveSpec};
    use crate::kernel::image_kernel;
    use crate::phantom::make_uniform_phantom;
    use crate::special::green2d;
    use std::sync::Arc;

    const C0: f64 = 1500.0;
    const F0: f64 = 500e3;

    fn k0() -> f64 {
        2.0 * std::f64::consts::PI * F0 / C0
    }

    fn lambda() -> f64 {
        C0 / F0
    }

    fn oval(spacing: f64) -> BoundaryCurve {
        sample_curve(&CurveSpec {
            family: CurveFamily::default_oval(),
            spacing,
        })
        .unwrap()
    }

    fn image_kernels(
        targets: &[Point],
        curve: &BoundaryCurve,
    ) -> Vec<Arc<ProjectionKernel>> {
        targets
            .iter()
            .map(|&t| Arc::new(image_kernel(t, curve, k0()).unwrap()))
            .collect()
    }

    /// Relative L2 error of the projected free field of an interior point
    /// source against the analytic value, at the given boundary sampling.
    fn free_field_error(spacing: f64, targets: &[Point]) -> f64 {
        let curve = oval(spacing);
        let src = Point::new(0.013, -0.007);
        let field: Vec<Complex64> = curve
            .points
            .iter()
            .map(|&p| green2d(k0(), src, p).unwrap())
            .collect();
        let mut num = 0.0;
        let mut den = 0.0;
        for &t in targets {
            let kern = image_kernel(t, &curve, k0()).unwrap();
            let got = project_field(&field, &kern, &curve).unwrap();
            let expect = green2d(k0(), src, t).unwrap();
            num += (got - expect).norm_sqr();
            den += expect.norm_sqr();
        }
        (num / den).sqrt()
    }

    #[test]
    fn free_field_projection_matches_analytic() {
        let line = VirtualLine::new(0.0, -0.110, 1.0, 100).unwrap();
        let targets = line.positions();
        let e_half = free_field_error(lambda() / 2.0, &targets);
        assert!(e_half < 0.05, "projection error at lambda/2: {e_half:.4}");
        let e_quarter = free_field_error(lambda() / 4.0, &targets);
        let e_eighth = free_field_error(lambda() / 8.0, &targets);
        assert!(
            e_quarter < e_half && e_eighth < e_quarter,
            "no monotone refinement: {e_half:.2e} {e_quarter:.2e} {e_eighth:.2e}"
        );
    }

    #[test]
    fn projection_is_linear() {
        let curve = oval(lambda() / 2.0);
        let kern = image_kernel(Point::new(0.05, -0.2), &curve, k0()).unwrap();
        let n = curve.len();
        let a: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64).sin(), (j as f64 * 0.7).cos()))
            .collect();
        let b: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64 * 1.3).cos(), -(j as f64 * 0.2).sin()))
            .collect();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        assert_eq!(
            project_field(&zero, &kern, &curve).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let pa = project_field(&a, &kern, &curve).unwrap();
        let pb = project_field(&b, &kern, &curve).unwrap();
        let combo: Vec<Complex64> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| x * 2.0 + y * Complex64::new(0.0, -1.5))
            .collect();
        let pc = project_field(&combo, &kern, &curve).unwrap();
        let expect = pa * 2.0 + pb * Complex64::new(0.0, -1.5);
        assert!((pc - expect).norm() <= 1e-12 * expect.norm());
    }

    #[test]
    fn project_field_length_mismatch_rejected() {
        let curve = oval(lambda() / 2.0);
        let kern = image_kernel(Point::new(0.0, -0.2), &curve, k0()).unwrap();
        let short = vec![Complex64::new(1.0, 0.0); 3];
        assert!(project_field(&short, &kern, &curve).is_err());
    }

    fn single_scatterer_setup(
        spacing: f64,
    ) -> (BoundaryCurve, MeasurementMatrix, Point, f64, f64) {
        let curve = oval(spacing);
        let mut ph = make_uniform_phantom(0.5e-3, 0.02, C0).unwrap();
        let (iz, ix) = (17, 23);
        ph.speed[(iz, ix)] = 1550.0;
        let q = ph.to_q(k0()).unwrap();
        let pix = q.nonzero_pixels();
        assert_eq!(pix.len(), 1);
        let (rc, qv) = pix[0];
        let meas = simulate_measurements(&q, &curve, k0()).unwrap();
        (curve, meas, rc, qv.re, q.pixel_area())
    }

    #[test]
    fn virtual_sources_match_single_scatterer_oracle() {
        let (curve, meas, rc, q0, area) = single_scatterer_setup(lambda() / 2.0);
        let line = VirtualLine::new(0.0, -0.110, 0.4, 24).unwrap();
        let kernels = image_kernels(&line.positions(), &curve);
        let p1 = build_virtual_sources(&meas, &curve, &kernels, &line).unwrap();

        let mut num = 0.0;
        let mut den = 0.0;
        for (s, &sp) in line.positions().iter().enumerate() {
            for (i, &ri) in curve.points.iter().enumerate() {
                let expect = green2d(k0(), rc, ri).unwrap()
                    * green2d(k0(), sp, rc).unwrap()
                    * q0
                    * area;
                num += (p1[(s, i)] - expect).norm_sqr();
                den += expect.norm_sqr();
            }
        }
        let rel = (num / den).sqrt();
        assert!(rel < 0.05, "virtual-source oracle error {rel:.4}");
    }

    #[test]
    fn reciprocity_roles_transpose() {
        // Projecting measurement columns (fixed source) vs rows (fixed
        // receiver) gives the same matrix because the scattered-field
        // kernel is symmetric.
        let (curve, meas, _, _, _) = single_scatterer_setup(lambda() / 2.0);
        let line = VirtualLine::new(0.0, -0.110, 0.3, 9).unwrap();
        let kernels = image_kernels(&line.positions(), &curve);
        let by_cols = build_virtual_sources(&meas, &curve, &kernels, &line).unwrap();
        let mut transposed = meas.clone();
        transposed.data = meas.data.t().to_owned();
        let by_rows = build_virtual_sources(&transposed, &curve, &kernels, &line).unwrap();
        let scale = by_cols.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in by_cols.iter().zip(by_rows.iter()) {
            assert!((a - b).norm() <= 1e-6 * scale);
        }
    }

    #[test]
    fn virtual_receivers_match_oracle_and_compose() {
        let (curve, meas, rc, q0, area) = single_scatterer_setup(lambda() / 2.0);
        let line_s = VirtualLine::new(0.0, -0.110, 0.3, 12).unwrap();
        let line_r = VirtualLine::new(0.0, 0.110, 0.3, 10).unwrap();
        let ks = image_kernels(&line_s.positions(), &curve);
        let kr = image_kernels(&line_r.positions(), &curve);
        let p1 = build_virtual_sources(&meas, &curve, &ks, &line_s).unwrap();
        let vad = build_virtual_receivers(&p1, &curve, &kr, &line_s, &line_r, k0()).unwrap();

        // Two-leg analytic oracle.
        let mut num = 0.0;
        let mut den = 0.0;
        for (r, &rp) in line_r.positions().iter().enumerate() {
            for (s, &sp) in line_s.positions().iter().enumerate() {
                let expect = green2d(k0(), rc, sp).unwrap()
                    * green2d(k0(), rp, rc).unwrap()
                    * q0
                    * area;
                num += (vad.data[(r, s)] - expect).norm_sqr();
                den += expect.norm_sqr();
            }
        }
        let rel = (num / den).sqrt();
        assert!(rel < 0.08, "two-stage oracle error {rel:.4}");

        // Composition equals the direct double quadrature, reassociated.
        for (r, _) in line_r.positions().iter().enumerate().take(3) {
            for (s, _) in line_s.positions().iter().enumerate().take(3) {
                let mut direct = Complex64::new(0.0, 0.0);
                for j in 0..curve.len() {
                    let mut inner = Complex64::new(0.0, 0.0);
                    for i in 0..curve.len() {
                        inner += meas.data[(i, j)] * ks[s].values[i] * curve.weights[i];
                    }
                    direct += inner * kr[r].values[j] * curve.weights[j];
                }
                assert!(
                    (vad.data[(r, s)] - direct).norm() <= 1e-10 * direct.norm().max(1e-30),
                    "composition mismatch at ({r},{s})"
                );
            }
        }
    }

    #[test]
    fn zero_measurements_project_to_zero() {
        let curve = oval(lambda() / 2.0);
        let q = make_uniform_phantom(1e-3, 0.01, C0)
            .unwrap()
            .to_q(k0())
            .unwrap();
        let meas = simulate_measurements(&q, &curve, k0()).unwrap();
        let line_s = VirtualLine::new(0.0, -0.110, 0.2, 6).unwrap();
        let line_r = VirtualLine::new(0.0, 0.110, 0.2, 5).unwrap();
        let ks = image_kernels(&line_s.positions(), &curve);
        let kr = image_kernels(&line_r.positions(), &curve);
        let p1 = build_virtual_sources(&meas, &curve, &ks, &line_s).unwrap();
        assert!(p1.iter().all(|v| v.norm() == 0.0));
        let vad = build_virtual_receivers(&p1, &curve, &kr, &line_s, &line_r, k0()).unwrap();
        assert!(vad.data.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn interior_line_element_rejected() {
        let curve = oval(lambda() / 2.0);
        let line = VirtualLine::new(0.0, 0.0, 0.3, 10).unwrap(); // through the middle
        assert!(line.validate_exterior(&curve).is_err());
    }

    #[test]
    fn rotate_frame_identities() {
        let curve = oval(lambda() / 2.0);
        let same = rotate_frame(&curve, 0.0);
        for (a, b) in curve.points.iter().zip(same.points.iter()) {
            assert_eq!(a, b);
        }
        let full = rotate_frame(&curve, 2.0 * std::f64::consts::PI);
        for (a, b) in curve.points.iter().zip(full.points.iter()) {
            assert!(a.dist(*b) < 1e-12);
        }
    }
}

#[cfg(test)]
mod dbg_tests {
    use super::*;
    use super::tests_helpers_dbg::*;

    #[test]
    fn dbg_free_field() {
        let (curve, src) = setup(1.5e-3);
        let field: Vec<Complex64> = curve.points.iter().map(|&p| crate::special::green2d(K, src, p).unwrap()).collect();
        for t in [Point::new(0.0, -0.11), Point::new(0.2, -0.11), Point::new(0.0, -0.3)] {
            let kern = crate::kernel::image_kernel(t, &curve, K).unwrap();
            let got = project_field(&field, &kern, &curve).unwrap();
            let expect = crate::special::green2d(K, src, t).unwrap();
            eprintln!("target ({:.2},{:.2}): got {:?} expect {:?} ratio {:?}", t.x, t.z, got, expect, got/expect);
        }
        let fine = |sp: f64| {
            let (curve, src) = setup(sp);
            let field: Vec<Complex64> = curve.points.iter().map(|&p| crate::special::green2d(K, src, p).unwrap()).collect();
            let t = Point::new(0.0, -0.11);
            let kern = crate::kernel::image_kernel(t, &curve, K).unwrap();
            let got = project_field(&field, &kern, &curve).unwrap();
            let expect = crate::special::green2d(K, src, t).unwrap();
            eprintln!("spacing {sp:.5}: ratio {:?} err {:.4}", got/expect, (got-expect).norm()/expect.norm());
        };
        fine(1.5e-3); fine(0.75e-3); fine(0.375e-3); fine(0.1875e-3);
        panic!("dbg");
    }
}
