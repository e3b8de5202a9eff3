//! Boundary projection kernels.
//!
//! A kernel K is the outward normal derivative on the measurement curve of
//! the Dirichlet Green's function anchored at an exterior target point, so
//! that an outward-radiating field with interior sources obeys
//!
//! `p(target) = sum_j p_j K_j w_j`
//!
//! over the curve samples. Two constructions are provided:
//!
//! * the image method, which cancels the free-space term pointwise with a
//!   reflected source held fixed during differentiation (closed-form, valid
//!   for gently curved boundaries), and
//! * the extinction method, which enforces that the representation vanish
//!   at random interior points and solves the resulting system with GMRES
//!   (general boundaries, including concave ones).
//!
//! Kernels depend only on target and geometry, never on any source, so they
//! are computed once and cached.

use crate::geometry::{mirror_point, BoundaryCurve};
use crate::solver::{dense_apply, gmres, GmresConfig, SolveStats};
use crate::special::{green2d, green2d_grad};
use crate::{par, Error, Point, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// How a kernel was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelMethod {
    Image,
    Extinction,
}

/// Normal-derivative kernel samples for one exterior target (units 1/m).
#[derive(Debug, Clone)]
pub struct ProjectionKernel {
    pub target: Point,
    pub values: Vec<Complex64>,
    pub method: KernelMethod,
    pub curve_hash: u64,
    pub k0: f64,
}

fn require_exterior(target: Point, curve: &BoundaryCurve) -> Result<()> {
    match curve.contains(target) {
        Ok(false) => Ok(()),
        Ok(true) => Err(Error::Validity(format!(
            "kernel target ({:.4}, {:.4}) lies inside the measurement curve",
            target.x, target.z
        ))),
        Err(e) => Err(e),
    }
}

/// Closed-form image-method kernel.
///
/// `K_j = n_j . [grad g0(target | r_j) - grad g0(image_j | r_j)]` with the
/// image source `2 r_j - target` held fixed while differentiating in the
/// boundary point. The summed free-space and image values cancel exactly on
/// each sample, which is the Dirichlet condition this construction encodes.
///
/// Validity requires the reflection of every boundary sample through the
/// target to stay exterior; a concavity that swallows the target breaks
/// this and is reported with the offending sample.
pub fn image_kernel(target: Point, curve: &BoundaryCurve, k0: f64) -> Result<ProjectionKernel> {
    require_exterior(target, curve)?;
    for (j, &rj) in curve.points.iter().enumerate() {
        let m = mirror_point(rj, target);
        if curve.contains_unchecked(m) {
            return Err(Error::Validity(format!(
                "image construction invalid for target ({:.4}, {:.4}): reflection of \
                 boundary sample {j} lands inside the curve",
                target.x, target.z
            )));
        }
    }
    let values = curve
        .points
        .iter()
        .zip(curve.normals.iter())
        .map(|(&rj, &nj)| {
            let g_free = green2d_grad(k0, target, rj)?;
            let image = mirror_point(target, rj);
            let g_img = green2d_grad(k0, image, rj)?;
            Ok((g_free[0] - g_img[0]) * nj.x + (g_free[1] - g_img[1]) * nj.z)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjectionKernel {
        target,
        values,
        method: KernelMethod::Image,
        curve_hash: curve.geometry_hash(),
        k0,
    })
}

/// Extinction-method configuration. Defaults follow the reference setup:
/// 4500 uniformly drawn interior points, relative tolerance 1e-6.
#[derive(Debug, Clone)]
pub struct ExtinctionConfig {
    pub n_interior: usize,
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for ExtinctionConfig {
    fn default() -> Self {
        Self {
            n_interior: 4500,
            tol: 1e-6,
            restart: 50,
            max_iterations: 2000,
            seed: 0x5eed,
        }
    }
}

/// Draw points uniformly over the curve interior, at least a quarter
/// wavelength clear of the boundary (closer rows are dominated by the
/// log-singular kernel and poison the conditioning).
pub fn interior_points(
    curve: &BoundaryCurve,
    k0: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<Point>> {
    let clearance = 0.25 * 2.0 * std::f64::consts::PI / k0;
    let (mut xmin, mut xmax, mut zmin, mut zmax) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in &curve.points {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        zmin = zmin.min(p.z);
        zmax = zmax.max(p.z);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while pts.len() < n {
        attempts += 1;
        if attempts > 1000 * n {
            return Err(Error::Geometry(
                "interior sampling failed: region too thin for the boundary clearance".into(),
            ));
        }
        let p = Point::new(rng.gen_range(xmin..xmax), rng.gen_range(zmin..zmax));
        if curve.contains_unchecked(p) && curve.distance_to_boundary(p) > clearance {
            pts.push(p);
        }
    }
    Ok(pts)
}

/// Dense extinction system on a square row subsample: `A[m][j] =
/// g0(r_m | r_j) w_j`, right-hand side `b[m] = g0(r_m | target)`.
struct ExtinctionSystem {
    matrix: Vec<Complex64>,
    rows: Vec<Point>,
    n: usize,
}

impl ExtinctionSystem {
    fn build(curve: &BoundaryCurve, k0: f64, interior: &[Point], seed: u64) -> Result<Self> {
        let n = curve.len();
        if interior.len() < n {
            return Err(Error::Validity(format!(
                "extinction needs at least as many interior points as boundary samples \
                 ({} < {n})",
                interior.len()
            )));
        }
        // Random square subsample of the interior rows.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut idx: Vec<usize> = (0..interior.len()).collect();
        for i in (1..idx.len()).rev() {
            idx.swap(i, rng.gen_range(0..=i));
        }
        idx.truncate(n);
        let rows: Vec<Point> = idx.into_iter().map(|i| interior[i]).collect();

        let matrix = par::map_indexed(n * n, |e| {
            let (m, j) = (e / n, e % n);
            green2d(k0, rows[m], curve.points[j]).map(|g| g * curve.weights[j])
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(Self { matrix, rows, n })
    }

    fn rhs(&self, k0: f64, target: Point) -> Result<Vec<Complex64>> {
        self.rows
            .iter()
            .map(|&r| green2d(k0, r, target))
            .collect()
    }

    fn rank_check(&self) -> Result<()> {
        // Degenerate row sampling shows up as a (near-)duplicated row.
        let n = self.n;
        for m in 0..self.rows.len() {
            for l in (m + 1)..self.rows.len() {
                if self.rows[m].dist(self.rows[l]) < 1e-12 {
                    return Err(Error::Validity(format!(
                        "degenerate interior sampling: rows {m} and {l} coincide"
                    )));
                }
            }
        }
        if self.matrix.len() != n * n {
            return Err(Error::Dimension("extinction system shape".into()));
        }
        Ok(())
    }
}

/// Solve for the kernel of one exterior target by the extinction method.
///
/// The discretized interior-extinction system is solved square (random row
/// subsample) with GMRES; if that stalls, a least-squares pass over all
/// interior rows (normal equations) is attempted before giving up.
pub fn extinction_kernel(
    target: Point,
    curve: &BoundaryCurve,
    k0: f64,
    cfg: &ExtinctionConfig,
) -> Result<(ProjectionKernel, SolveStats)> {
    require_exterior(target, curve)?;
    let interior = interior_points(curve, k0, cfg.n_interior, cfg.seed)?;
    let system = ExtinctionSystem::build(curve, k0, &interior, cfg.seed)?;
    system.rank_check()?;
    let b = system.rhs(k0, target)?;

    let gc = GmresConfig {
        tol: cfg.tol,
        restart: cfg.restart,
        max_iterations: cfg.max_iterations,
    };
    let n = system.n;
    let (x, mut stats) = gmres(dense_apply(&system.matrix, n), &b, &gc);

    if !stats.converged {
        // Least-squares fallback over every interior row via the normal
        // equations A^H A x = A^H b.
        let rows_all: Vec<Point> = interior;
        let m_all = rows_all.len();
        let a_full = par::map_indexed(m_all * n, |e| {
            let (m, j) = (e / n, e % n);
            green2d(k0, rows_all[m], curve.points[j]).map(|g| g * curve.weights[j])
        })
        .into_iter()
        .collect::<Result<Vec<Complex64>>>()?;
        let b_full: Vec<Complex64> = rows_all
            .iter()
            .map(|&r| green2d(k0, r, target))
            .collect::<Result<_>>()?;
        let mut atb = vec![Complex64::new(0.0, 0.0); n];
        for m in 0..m_all {
            let bm = b_full[m];
            for j in 0..n {
                atb[j] += a_full[m * n + j].conj() * bm;
            }
        }
        let apply_normal = |v: &[Complex64], y: &mut [Complex64]| {
            let mut t = vec![Complex64::new(0.0, 0.0); m_all];
            for m in 0..m_all {
                t[m] = a_full[m * n..(m + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, x)| a * x)
                    .sum();
            }
            for (j, yj) in y.iter_mut().enumerate() {
                *yj = (0..m_all).map(|m| a_full[m * n + j].conj() * t[m]).sum();
            }
        };
        let (x2, stats2) = gmres(apply_normal, &atb, &gc);
        if !stats2.converged {
            return Err(Error::Solve {
                reason: "extinction system did not converge (square and least-squares passes)"
                    .into(),
                iterations: stats.iterations + stats2.iterations,
                residual: stats2.residual,
            });
        }
        stats = stats2;
        return Ok((
            ProjectionKernel {
                target,
                values: x2,
                method: KernelMethod::Extinction,
                curve_hash: curve.geometry_hash(),
                k0,
            },
            stats,
        ));
    }

    Ok((
        ProjectionKernel {
            target,
            values: x,
            method: KernelMethod::Extinction,
            curve_hash: curve.geometry_hash(),
            k0,
        },
        stats,
    ))
}

/// Shared-system extinction solver for many targets on one curve.
///
/// The system matrix depends only on curve and interior sampling, so it is
/// factored once (dense LU) and each target costs a pair of triangular
/// solves. Conditioning trouble surfaces through [`ExtinctionBatch::suspect`].
pub struct ExtinctionBatch {
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    system: ExtinctionSystem,
    curve_hash: u64,
    k0: f64,
    /// Smallest |pivot| / largest |pivot| seen during factorization; very
    /// small values flag a near-singular system (interior resonance).
    pub pivot_ratio: f64,
}

impl ExtinctionBatch {
    pub fn new(curve: &BoundaryCurve, k0: f64, cfg: &ExtinctionConfig) -> Result<Self> {
        let interior = interior_points(curve, k0, cfg.n_interior, cfg.seed)?;
        let system = ExtinctionSystem::build(curve, k0, &interior, cfg.seed)?;
        system.rank_check()?;
        let n = system.n;
        let mut lu = system.matrix.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_piv = f64::INFINITY;
        let mut max_piv = 0.0f64;
        for col in 0..n {
            let (piv, mag) = (col..n)
                .map(|r| (r, lu[r * n + col].norm()))
                .fold((col, -1.0), |acc, it| if it.1 > acc.1 { it } else { acc });
            if mag == 0.0 {
                return Err(Error::Solve {
                    reason: "extinction system is singular".into(),
                    iterations: 0,
                    residual: f64::INFINITY,
                });
            }
            min_piv = min_piv.min(mag);
            max_piv = max_piv.max(mag);
            perm.swap(col, piv);
            if piv != col {
                for j in 0..n {
                    lu.swap(col * n + j, piv * n + j);
                }
            }
            let d = lu[col * n + col];
            for r in (col + 1)..n {
                let f = lu[r * n + col] / d;
                lu[r * n + col] = f;
                for j in (col + 1)..n {
                    let v = lu[col * n + j];
                    lu[r * n + j] -= f * v;
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            system,
            curve_hash: curve.geometry_hash(),
            k0,
            pivot_ratio: min_piv / max_piv,
        })
    }

    /// Whether the factorization looked ill-conditioned (reported, not fixed).
    pub fn suspect(&self) -> bool {
        self.pivot_ratio < 1e-10
    }

    pub fn kernel_for(&self, target: Point, curve: &BoundaryCurve) -> Result<ProjectionKernel> {
        require_exterior(target, curve)?;
        let n = self.system.n;
        let b = self.system.rhs(self.k0, target)?;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for col in 0..n {
            for r in (col + 1)..n {
                let f = self.lu[r * n + col];
                let xv = x[col];
                x[r] -= f * xv;
            }
        }
        for col in (0..n).rev() {
            x[col] /= self.lu[col * n + col];
            for r in 0..col {
                let f = self.lu[r * n + col];
                let xv = x[col];
                x[r] -= f * xv;
            }
        }
        Ok(ProjectionKernel {
            target,
            values: x,
            method: KernelMethod::Extinction,
            curve_hash: self.curve_hash,
            k0: self.k0,
        })
    }
}

/// Thread-safe kernel cache keyed by curve geometry, method, wavenumber and
/// target coordinates.
#[derive(Default)]
pub struct KernelCache {
    map: RwLock<HashMap<CacheKey, Arc<ProjectionKernel>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub curve_hash: u64,
    pub method: KernelMethod,
    pub k0_bits: u64,
    pub x_bits: u64,
    pub z_bits: u64,
}

impl CacheKey {
    pub fn new(curve_hash: u64, method: KernelMethod, k0: f64, target: Point) -> Self {
        Self {
            curve_hash,
            method,
            k0_bits: k0.to_bits(),
            x_bits: target.x.to_bits(),
            z_bits: target.z.to_bits(),
        }
    }
}

impl KernelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &CacheKey) -> Option<Arc<ProjectionKernel>> {
        self.map.read().unwrap().get(key).cloned()
    }

    pub fn insert(&self, kernel: ProjectionKernel) -> Arc<ProjectionKernel> {
        let key = CacheKey::new(kernel.curve_hash, kernel.method, kernel.k0, kernel.target);
        let arc = Arc::new(kernel);
        self.map.write().unwrap().insert(key, arc.clone());
        arc
    }

    pub fn get_or_insert_with<F>(&self, key: CacheKey, build: F) -> Result<Arc<ProjectionKernel>>
    where
        F: FnOnce() -> Result<ProjectionKernel>,
    {
        if let Some(hit) = self.get(&key) {
            return Ok(hit);
        }
        let built = build()?;
        Ok(self.insert(built))
    }

    /// Snapshot of every cached kernel (for persistence).
    pub fn snapshot(&self) -> Vec<Arc<ProjectionKernel>> {
        self.map.read().unwrap().values().cloned().collect()
    }
}
