//! Convex geometry in evaluation space.
//!
//! Aspirations are carried as [`Polytope`]s holding both a vertex list and a
//! halfspace list. Translations and homotheties update both in closed form;
//! clipping recomputes vertices by halfspace-subset enumeration.

mod distance;
mod file;
mod fit;
mod hull;
mod simplex;

pub use distance::{distance_to_hull, hausdorff_distance, min_norm_point};
pub use file::AspirationFile;
pub use fit::{clip_to_simplex, max_shrink_then_min_shift, ray_interval, segment_intersects_simplex};
pub use hull::{enumerate_vertices, halfspaces_from_points, MAX_HULL_DIM};
pub use simplex::{AffineTracingMap, Simplex};

use thiserror::Error;

use crate::config::TOL;
use crate::linalg::{self, LinalgError, Lu, Matrix};
use crate::lp::LpError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polytope has no vertices")]
    Empty,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("simplex is degenerate (|det| = {det:e})")]
    Degenerate { det: f64 },
    #[error("a simplex needs {expected} vertices, got {got}")]
    VertexCount { expected: usize, got: usize },
    #[error("ray from the anchor never enters the target simplex")]
    RayMissesTarget,
    #[error("intersection is empty")]
    EmptyIntersection,
    #[error("operation supports affine dimension ≤ {max}, got {got}")]
    UnsupportedDimension { max: usize, got: usize },
    #[error("halfspace description is unbounded")]
    Unbounded,
    #[error("halfspace normal is zero")]
    ZeroNormal,
    #[error("point is not in the source simplex")]
    OutsideSource,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_dims(points: &[Vec<f64>]) -> Result<usize, GeometryError> {
    let d = points.first().ok_or(GeometryError::Empty)?.len();
    for p in points {
        if p.len() != d {
            return Err(GeometryError::DimensionMismatch { expected: d, got: p.len() });
        }
    }
    Ok(d)
}

/// Removes points within `tol` (max-norm) of an earlier point.
pub fn dedup_points(points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    if points.len() <= 64 {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for p in points {
            if !out.iter().any(|q| linalg::max_abs_diff(q, &p) <= tol) {
                out.push(p);
            }
        }
        return out;
    }
    // bucket on the first coordinate; neighbours differ by at most one bucket
    let key = |x: f64| (x / tol).floor() as i64;
    let mut buckets: std::collections::HashMap<i64, Vec<usize>> = std::collections::HashMap::new();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        let k = key(p[0]);
        let dup = (k - 1..=k + 1)
            .any(|b| buckets.get(&b).is_some_and(|ids| ids.iter().any(|&i| linalg::max_abs_diff(&out[i], &p) <= tol)));
        if !dup {
            buckets.entry(k).or_default().push(out.len());
            out.push(p);
        }
    }
    out
}

/// Convex hull of a finite point list.
#[derive(Clone, Debug, PartialEq)]
pub struct VPolytope {
    vertices: Vec<Vec<f64>>,
}

impl VPolytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        check_dims(&vertices)?;
        Ok(Self { vertices: dedup_points(vertices, TOL.dedup) })
    }

    pub fn point(p: Vec<f64>) -> Self {
        Self { vertices: vec![p] }
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vec<f64>> {
        self.vertices
    }

    /// Average of the vertices.
    pub fn centroid(&self) -> Vec<f64> {
        linalg::mean(&self.vertices)
    }

    /// `max_v c·v`.
    pub fn support_value(&self, c: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| linalg::dot(c, v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn distance_to(&self, x: &[f64]) -> f64 {
        distance_to_hull(x, &self.vertices)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.distance_to(x) <= tol
    }

    /// Maximum pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                m = m.max(linalg::dist(a, b));
            }
        }
        m
    }

    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> VPolytope {
        VPolytope { vertices: dedup_points(self.vertices.iter().map(|v| f(v)).collect(), TOL.dedup) }
    }

    /// Image under a general affine map.
    pub fn affine_image(&self, map: &AffineMap) -> VPolytope {
        self.map_points(|v| map.apply(v))
    }

    /// Image under a vertex-to-vertex tracing map.
    pub fn traced(&self, map: &AffineTracingMap<'_>) -> Result<VPolytope, GeometryError> {
        let imgs = self.vertices.iter().map(|v| map.apply(v)).collect::<Result<Vec<_>, _>>()?;
        Ok(VPolytope { vertices: dedup_points(imgs, TOL.dedup) })
    }
}

/// `normal · x ≤ offset` with a unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    /// Normalizes `normal` to unit length.
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self, GeometryError> {
        let n = linalg::norm(&normal);
        if n <= 1e-300 || !n.is_finite() {
            return Err(GeometryError::ZeroNormal);
        }
        Ok(Self { normal: linalg::scale(&normal, 1.0 / n), offset: offset / n })
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - linalg::dot(&self.normal, x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HPolytope {
    halfspaces: Vec<Halfspace>,
}

impl HPolytope {
    pub fn new(halfspaces: Vec<Halfspace>) -> Self {
        Self { halfspaces }
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.slack(x) >= -tol)
    }

    /// Smallest slack over all halfspaces (negative when outside).
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        self.halfspaces.iter().map(|h| h.slack(x)).fold(f64::INFINITY, f64::min)
    }
}

/// An invertible-or-not affine map `x ↦ A x + t`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub matrix: Matrix,
    pub shift: Vec<f64>,
}

impl AffineMap {
    pub fn identity(d: usize) -> Self {
        Self { matrix: Matrix::identity(d), shift: vec![0.0; d] }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        linalg::add(&self.matrix.mul_vec(x), &self.shift)
    }

    /// Applies only the linear part.
    pub fn apply_linear(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(x)
    }
}

/// A polytope carrying both representations.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    v: VPolytope,
    h: HPolytope,
}

impl Polytope {
    /// Derives the halfspaces from the vertices (affine dimension ≤ 3).
    /// Non-extreme input points are dropped.
    pub fn from_vertices(vertices: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        let v = VPolytope::new(vertices)?;
        let hs = halfspaces_from_points(v.vertices())?;
        let extreme = enumerate_vertices(&hs, v.dim())?;
        // keep the caller's exact coordinates, in input order
        let mut keep = vec![false; v.vertices.len()];
        for e in &extreme {
            let nearest = (0..v.vertices.len())
                .min_by(|&a, &b| {
                    linalg::max_abs_diff(&v.vertices[a], e).total_cmp(&linalg::max_abs_diff(&v.vertices[b], e))
                })
                .expect("nonempty");
            keep[nearest] = true;
        }
        let mut i = 0;
        let mut v = v;
        v.vertices.retain(|_| {
            i += 1;
            keep[i - 1]
        });
        Ok(Self { v, h: HPolytope::new(hs) })
    }

    /// Enumerates vertices of a bounded halfspace description.
    pub fn from_halfspaces(halfspaces: Vec<Halfspace>) -> Result<Self, GeometryError> {
        let d = check_dims(&halfspaces.iter().map(|h| h.normal.clone()).collect::<Vec<_>>())?;
        hull::check_bounded(&halfspaces, d)?;
        let verts = enumerate_vertices(&halfspaces, d)?;
        if verts.is_empty() {
            return Err(GeometryError::EmptyIntersection);
        }
        let h = prune_halfspaces(halfspaces, &verts);
        Ok(Self { v: VPolytope { vertices: verts }, h: HPolytope::new(h) })
    }

    /// Trusts the caller that both lists describe the same set.
    pub fn from_parts(v: VPolytope, h: HPolytope) -> Self {
        Self { v, h }
    }

    pub fn point(p: Vec<f64>) -> Self {
        let d = p.len();
        let mut hs = Vec::with_capacity(2 * d);
        for k in 0..d {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            hs.push(Halfspace { normal: e.clone(), offset: p[k] });
            e[k] = -1.0;
            hs.push(Halfspace { normal: e, offset: -p[k] });
        }
        Self { v: VPolytope::point(p), h: HPolytope::new(hs) }
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn aabb(lo: &[f64], hi: &[f64]) -> Result<Self, GeometryError> {
        let d = lo.len();
        let mut hs = Vec::with_capacity(2 * d);
        for k in 0..d {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            hs.push(Halfspace { normal: e.clone(), offset: hi[k] });
            e[k] = -1.0;
            hs.push(Halfspace { normal: e, offset: -lo[k] });
        }
        let mut verts = Vec::with_capacity(1 << d);
        for mask in 0..(1usize << d) {
            verts.push((0..d).map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] }).collect());
        }
        Ok(Self { v: VPolytope::new(verts)?, h: HPolytope::new(hs) })
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        self.v.vertices()
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        self.h.halfspaces()
    }

    pub fn vpolytope(&self) -> &VPolytope {
        &self.v
    }

    pub fn hpolytope(&self) -> &HPolytope {
        &self.h
    }

    pub fn centroid(&self) -> Vec<f64> {
        self.v.centroid()
    }

    pub fn support_value(&self, c: &[f64]) -> f64 {
        self.v.support_value(c)
    }

    pub fn is_point(&self) -> bool {
        self.v.vertices.len() == 1
    }

    /// `x ↦ target + r (x − center)` applied to both representations.
    pub fn homothety(&self, center: &[f64], r: f64, target: &[f64]) -> Polytope {
        if r == 0.0 {
            return Polytope::point(target.to_vec());
        }
        let v = self.v.map_points(|x| {
            x.iter().zip(center).zip(target).map(|((xi, ci), ti)| ti + r * (xi - ci)).collect()
        });
        let h = self
            .h
            .halfspaces
            .iter()
            .map(|hs| Halfspace {
                normal: hs.normal.clone(),
                offset: linalg::dot(&hs.normal, target) + r * (hs.offset - linalg::dot(&hs.normal, center)),
            })
            .collect();
        Polytope { v, h: HPolytope::new(h) }
    }

    pub fn translate(&self, t: &[f64]) -> Polytope {
        let zero = vec![0.0; t.len()];
        self.homothety(&zero, 1.0, t)
    }

    /// Image under an invertible affine map; halfspaces transform by the
    /// inverse transpose.
    pub fn affine_image(&self, map: &AffineMap) -> Result<Polytope, GeometryError> {
        let v = self.v.affine_image(map);
        let lu = Lu::factor(&map.matrix)?;
        let mut h = Vec::with_capacity(self.h.halfspaces.len());
        for hs in &self.h.halfspaces {
            let n = lu.solve_transpose(&hs.normal);
            h.push(Halfspace::new(n.clone(), hs.offset + linalg::dot(&n, &map.shift))?);
        }
        Ok(Polytope { v, h: HPolytope::new(h) })
    }

    /// Vertex containment in another polytope's halfspaces.
    pub fn is_subset_of_h(&self, other: &HPolytope, tol: f64) -> bool {
        self.v.vertices.iter().all(|x| other.contains(x, tol))
    }

    /// Smallest point of `self` nearest to `x`, by distance.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        self.v.distance_to(x)
    }
}

/// Drops halfspaces not tight at any vertex.
fn prune_halfspaces(hs: Vec<Halfspace>, verts: &[Vec<f64>]) -> Vec<Halfspace> {
    let scale = verts.iter().map(|v| linalg::max_abs(v)).fold(1.0, f64::max);
    let tight_tol = 1e-9 * scale;
    let mut kept: Vec<Halfspace> = Vec::new();
    for h in hs {
        if verts.iter().any(|v| h.slack(v).abs() <= tight_tol)
            && !kept.iter().any(|k| {
                linalg::max_abs_diff(&k.normal, &h.normal) <= 1e-12 && (k.offset - h.offset).abs() <= tight_tol
            })
        {
            kept.push(h);
        }
    }
    kept
}
