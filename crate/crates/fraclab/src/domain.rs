//! Computational domain: intervals and axis-aligned rectangles, tensor
//! trapezoid quadrature, boundary partition into Dirichlet and Neumann
//! pieces, distance-to-boundary field and smooth bump sources.
//!
//! The domain is restricted to intervals (N = 1) and rectangles (N = 2) so
//! that the distance function is exact, boundary partitions are unions of
//! whole faces or node-aligned sub-intervals of faces, and closed-form
//! eigenpairs are available as oracles.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the base domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Rectangle,
}

/// User-facing description of the domain: kind, side lengths, nodes per axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub extents: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl DomainSpec {
    pub fn interval(length: f64, nodes: usize) -> Self {
        DomainSpec {
            kind: DomainKind::Interval,
            extents: vec![length],
            resolution: vec![nodes],
        }
    }

    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Self {
        DomainSpec {
            kind: DomainKind::Rectangle,
            extents: vec![lx, ly],
            resolution: vec![nx, ny],
        }
    }

    /// Unit square helper used all over the verification suite.
    pub fn unit_square(n: usize) -> Self {
        Self::rectangle(1.0, 1.0, n, n)
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if self.extents.len() != dim || self.resolution.len() != dim {
            return Err(Error::Config(format!(
                "domain kind {:?} needs {} extent(s) and {} resolution(s), got {} and {}",
                self.kind,
                dim,
                dim,
                self.extents.len(),
                self.resolution.len()
            )));
        }
        for &e in &self.extents {
            if !(e > 0.0) || !e.is_finite() {
                return Err(Error::Config(format!("extent must be positive, got {e}")));
            }
        }
        for &r in &self.resolution {
            if r < 4 {
                return Err(Error::Config(format!(
                    "resolution must be at least 4 nodes per axis, got {r}"
                )));
            }
        }
        Ok(())
    }
}

/// Tensor-product grid with uniform spacing per axis and trapezoid
/// quadrature weights. Node index is row-major: `idx = j * nx + i`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub kind: DomainKind,
    /// Nodes per axis; `[nx, 1]` for intervals.
    pub shape: [usize; 2],
    /// Spacing per axis; `h[1] = 0` for intervals.
    pub h: [f64; 2],
    /// Side lengths; `extent[1] = 0` for intervals.
    pub extent: [f64; 2],
    /// Per-node quadrature weight for integrals over the domain.
    pub quad_weights: Vec<f64>,
}

impl Grid {
    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => 2,
        }
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.shape[0] + i
    }

    #[inline]
    pub fn coords_of(&self, idx: usize) -> (usize, usize) {
        (idx % self.shape[0], idx / self.shape[0])
    }

    /// Physical coordinates of a node; second component is 0 for intervals.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.coords_of(idx);
        [i as f64 * self.h[0], j as f64 * self.h[1]]
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.coords_of(idx);
        match self.kind {
            DomainKind::Interval => i == 0 || i == self.shape[0] - 1,
            DomainKind::Rectangle => {
                i == 0 || i == self.shape[0] - 1 || j == 0 || j == self.shape[1] - 1
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self.kind {
            DomainKind::Interval => self.extent[0],
            DomainKind::Rectangle => self.extent[0] * self.extent[1],
        }
    }

    /// Total (N-1)-measure of the boundary. For intervals this is the
    /// counting measure of the two endpoints.
    pub fn boundary_measure(&self) -> f64 {
        match self.kind {
            DomainKind::Interval => 2.0,
            DomainKind::Rectangle => 2.0 * (self.extent[0] + self.extent[1]),
        }
    }

    /// Largest axis spacing; masks of the form `d >= h` use this.
    pub fn h_max(&self) -> f64 {
        match self.kind {
            DomainKind::Interval => self.h[0],
            DomainKind::Rectangle => self.h[0].max(self.h[1]),
        }
    }

    /// Euclidean distance between a node and an arbitrary point.
    pub fn dist_to(&self, idx: usize, p: &[f64]) -> f64 {
        let x = self.point(idx);
        match self.kind {
            DomainKind::Interval => (x[0] - p[0]).abs(),
            DomainKind::Rectangle => ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)).sqrt(),
        }
    }
}

/// Builds the tensor-product grid for a validated [`DomainSpec`].
pub fn build_grid(spec: &DomainSpec) -> Result<Arc<Grid>> {
    spec.validate()?;
    let (nx, ny, lx, ly) = match spec.kind {
        DomainKind::Interval => (spec.resolution[0], 1, spec.extents[0], 0.0),
        DomainKind::Rectangle => (
            spec.resolution[0],
            spec.resolution[1],
            spec.extents[0],
            spec.extents[1],
        ),
    };
    let hx = lx / (nx - 1) as f64;
    let hy = if ny > 1 { ly / (ny - 1) as f64 } else { 0.0 };

    let axis_weight = |n: usize, h: f64, k: usize| -> f64 {
        if n == 1 {
            1.0
        } else if k == 0 || k == n - 1 {
            0.5 * h
        } else {
            h
        }
    };

    let mut quad_weights = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let wy = axis_weight(ny, hy, j);
        for i in 0..nx {
            quad_weights.push(axis_weight(nx, hx, i) * wy);
        }
    }

    Ok(Arc::new(Grid {
        kind: spec.kind,
        shape: [nx, ny],
        h: [hx, hy],
        extent: [lx, ly],
        quad_weights,
    }))
}

/// One of the (up to four) faces of the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Face {
    Left,
    Right,
    Bottom,
    Top,
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Face::Left => "left",
            Face::Right => "right",
            Face::Bottom => "bottom",
            Face::Top => "top",
        };
        f.write_str(s)
    }
}

/// A whole face or a leading arclength fraction of it.
///
/// Fractions grow from the corner with the smallest coordinates (bottom end
/// of vertical faces, left end of horizontal faces) and are snapped to grid
/// nodes so that the Dirichlet measure `alpha` is exact on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceSelection {
    pub face: Face,
    pub fraction: f64,
}

impl FaceSelection {
    pub fn whole(face: Face) -> Self {
        FaceSelection { face, fraction: 1.0 }
    }

    /// Parses `"left"` or `"left:0.5"`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, frac) = match text.split_once(':') {
            Some((n, f)) => {
                let frac: f64 = f
                    .parse()
                    .map_err(|_| Error::Config(format!("bad face fraction in '{text}'")))?;
                (n, frac)
            }
            None => (text, 1.0),
        };
        if !(frac > 0.0 && frac <= 1.0) {
            return Err(Error::Config(format!(
                "face fraction must lie in (0, 1], got {frac} in '{text}'"
            )));
        }
        let face = match name.trim() {
            "left" => Face::Left,
            "right" => Face::Right,
            "bottom" => Face::Bottom,
            "top" => Face::Top,
            other => {
                return Err(Error::Config(format!("unknown boundary face '{other}'")));
            }
        };
        Ok(FaceSelection { face, fraction: frac })
    }
}

/// Classification of a grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeClass {
    Interior,
    Dirichlet,
    Neumann,
}

/// Labeling of every boundary node plus the measure of the Dirichlet part.
///
/// Interface nodes between the Dirichlet and Neumann pieces are labeled
/// Dirichlet, which keeps the discrete operator coercive.
#[derive(Debug, Clone)]
pub struct BoundaryPartition {
    pub labels: Vec<NodeClass>,
    /// (N-1)-measure of the Dirichlet part.
    pub alpha: f64,
    /// Total boundary measure.
    pub boundary_measure: f64,
    pub pure_dirichlet: bool,
    pub selections: Vec<FaceSelection>,
}

impl BoundaryPartition {
    pub fn class(&self, idx: usize) -> NodeClass {
        self.labels[idx]
    }

    pub fn dirichlet_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|&&c| c == NodeClass::Dirichlet)
            .count()
    }

    pub fn neumann_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|&&c| c == NodeClass::Neumann)
            .count()
    }
}

/// Labels every boundary node from a set of face selections.
///
/// Errors when the selection is empty: the Dirichlet part must carry
/// positive surface measure for the operator to be invertible.
pub fn partition_boundary(
    grid: &Arc<Grid>,
    selections: &[FaceSelection],
) -> Result<BoundaryPartition> {
    if selections.is_empty() {
        return Err(Error::Config(
            "empty Dirichlet selection: the Dirichlet part must have positive measure".into(),
        ));
    }
    let [nx, ny] = grid.shape;
    let mut labels = vec![NodeClass::Interior; grid.len()];
    for idx in 0..grid.len() {
        if grid.is_boundary(idx) {
            labels[idx] = NodeClass::Neumann;
        }
    }

    let mut alpha = 0.0;
    for sel in selections {
        match grid.kind {
            DomainKind::Interval => {
                if (sel.fraction - 1.0).abs() > 1e-14 {
                    return Err(Error::Config(
                        "face fractions are only meaningful on rectangles".into(),
                    ));
                }
                let i = match sel.face {
                    Face::Left => 0,
                    Face::Right => nx - 1,
                    f => {
                        return Err(Error::Config(format!(
                            "face '{f}' does not exist on an interval"
                        )));
                    }
                };
                if labels[i] != NodeClass::Dirichlet {
                    labels[i] = NodeClass::Dirichlet;
                    alpha += 1.0; // counting measure for interval endpoints
                }
            }
            DomainKind::Rectangle => {
                // Nodes along the face, ordered from the smallest corner.
                let (line, h): (Vec<usize>, f64) = match sel.face {
                    Face::Left => ((0..ny).map(|j| grid.index(0, j)).collect(), grid.h[1]),
                    Face::Right => ((0..ny).map(|j| grid.index(nx - 1, j)).collect(), grid.h[1]),
                    Face::Bottom => ((0..nx).map(|i| grid.index(i, 0)).collect(), grid.h[0]),
                    Face::Top => ((0..nx).map(|i| grid.index(i, ny - 1)).collect(), grid.h[0]),
                };
                let edges_total = line.len() - 1;
                // Snap to whole grid edges, keeping at least one.
                let edges = ((sel.fraction * edges_total as f64).round() as usize)
                    .clamp(1, edges_total);
                for &idx in &line[..=edges] {
                    labels[idx] = NodeClass::Dirichlet;
                }
                alpha += edges as f64 * h;
            }
        }
    }

    // Selecting overlapping faces may double-count corner-free measure only
    // on intervals, which the branch above already guards. On rectangles the
    // faces are disjoint up to corner points of measure zero, but repeated
    // selections of the same face would inflate alpha; detect that.
    let mut seen = Vec::new();
    for sel in selections {
        if seen.contains(&sel.face) {
            return Err(Error::Config(format!(
                "face '{}' selected more than once",
                sel.face
            )));
        }
        seen.push(sel.face);
    }

    let boundary_measure = grid.boundary_measure();
    let pure_dirichlet = labels
        .iter()
        .enumerate()
        .all(|(idx, &c)| !grid.is_boundary(idx) || c == NodeClass::Dirichlet);
    // Pure-Dirichlet mode must report alpha = |boundary| exactly.
    if pure_dirichlet {
        alpha = boundary_measure;
    }

    Ok(BoundaryPartition {
        labels,
        alpha,
        boundary_measure,
        pure_dirichlet,
        selections: selections.to_vec(),
    })
}

/// All faces Dirichlet; used for the first Dirichlet eigenpair and the
/// Hardy/Sobolev checks that live in `H^s_0`.
pub fn pure_dirichlet_partition(grid: &Arc<Grid>) -> BoundaryPartition {
    let selections: Vec<FaceSelection> = match grid.kind {
        DomainKind::Interval => vec![
            FaceSelection::whole(Face::Left),
            FaceSelection::whole(Face::Right),
        ],
        DomainKind::Rectangle => vec![
            FaceSelection::whole(Face::Left),
            FaceSelection::whole(Face::Right),
            FaceSelection::whole(Face::Bottom),
            FaceSelection::whole(Face::Top),
        ],
    };
    partition_boundary(grid, &selections).expect("whole-boundary selection is always valid")
}

/// Distance to the boundary, exact for intervals and rectangles.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub values: Vec<f64>,
}

pub fn distance_field(grid: &Grid) -> DistanceField {
    let values = (0..grid.len())
        .map(|idx| {
            let p = grid.point(idx);
            match grid.kind {
                DomainKind::Interval => p[0].min(grid.extent[0] - p[0]),
                DomainKind::Rectangle => p[0]
                    .min(grid.extent[0] - p[0])
                    .min(p[1])
                    .min(grid.extent[1] - p[1]),
            }
        })
        .collect();
    DistanceField { values }
}

/// Nodal scalar field on a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "value count must match grid");
        GridFunction {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::new(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self::new(grid, vec![c; grid.len()])
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let p = grid.point(idx);
                f(p[0], p[1])
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Quadrature of the field over the domain.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.grid.quad_weights)
            .map(|(v, w)| v * w)
            .sum()
    }

    /// Weighted L^2 inner product.
    pub fn dot(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(&self.grid.quad_weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Weighted L^p norm, p >= 1.
    pub fn lp(&self, p: f64) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .zip(&self.grid.quad_weights)
            .map(|(v, w)| v.abs().powf(p) * w)
            .sum();
        s.powf(1.0 / p)
    }

    pub fn scaled(&self, t: f64) -> GridFunction {
        GridFunction::new(&self.grid, self.values.iter().map(|v| v * t).collect())
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        GridFunction::new(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        GridFunction::new(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// max |self - other| over all nodes.
    pub fn linf_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Smooth bump supported in the ball `B_radius(center)`:
/// `exp(1 - 1/(1 - |x-c|^2/r^2))` inside, 0 outside, 1 at the center.
///
/// Errors unless the ball is compactly contained in the domain.
pub fn make_bump(grid: &Arc<Grid>, center: &[f64], radius: f64) -> Result<GridFunction> {
    if radius <= 0.0 {
        return Err(Error::Precondition(format!(
            "bump radius must be positive, got {radius}"
        )));
    }
    let dist_center = match grid.kind {
        DomainKind::Interval => center[0].min(grid.extent[0] - center[0]),
        DomainKind::Rectangle => center[0]
            .min(grid.extent[0] - center[0])
            .min(center[1])
            .min(grid.extent[1] - center[1]),
    };
    if dist_center <= radius {
        return Err(Error::Precondition(format!(
            "bump ball of radius {radius} at {center:?} is not compactly contained \
             (distance to boundary {dist_center})"
        )));
    }
    let r2 = radius * radius;
    Ok(GridFunction::from_fn(grid, |x, y| {
        let dx = x - center[0];
        let dy = if grid.dim() == 2 { y - center[1] } else { 0.0 };
        let t2 = (dx * dx + dy * dy) / r2;
        if t2 >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - t2)).exp()
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_grid_weights() {
        let grid = build_grid(&DomainSpec::interval(1.0, 5)).unwrap();
        assert_eq!(grid.len(), 5);
        assert!((grid.h[0] - 0.25).abs() < 1e-15);
        let total: f64 = grid.quad_weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rectangle_grid_weights() {
        let grid = build_grid(&DomainSpec::unit_square(5)).unwrap();
        assert_eq!(grid.len(), 25);
        let total: f64 = grid.quad_weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_is_exact_for_linear() {
        let grid = build_grid(&DomainSpec::interval(1.0, 33)).unwrap();
        let x = GridFunction::from_fn(&grid, |x, _| x);
        assert!((x.integral() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tiny_resolution_rejected() {
        assert!(build_grid(&DomainSpec::interval(1.0, 0)).is_err());
        assert!(build_grid(&DomainSpec::interval(1.0, 3)).is_err());
        assert!(build_grid(&DomainSpec::interval(-1.0, 8)).is_err());
    }

    #[test]
    fn partition_left_edge() {
        let grid = build_grid(&DomainSpec::unit_square(5)).unwrap();
        let part =
            partition_boundary(&grid, &[FaceSelection::whole(Face::Left)]).unwrap();
        assert!((part.alpha - 1.0).abs() < 1e-14);
        assert!((part.boundary_measure - 4.0).abs() < 1e-14);
        assert!(!part.pure_dirichlet);
        // Totality: every boundary node labeled exactly once.
        let boundary_nodes = (0..grid.len()).filter(|&i| grid.is_boundary(i)).count();
        assert_eq!(part.dirichlet_count() + part.neumann_count(), boundary_nodes);
    }

    #[test]
    fn partition_all_faces_is_pure_dirichlet() {
        let grid = build_grid(&DomainSpec::unit_square(5)).unwrap();
        let faces = [Face::Left, Face::Right, Face::Bottom, Face::Top]
            .map(FaceSelection::whole);
        let part = partition_boundary(&grid, &faces).unwrap();
        assert!(part.pure_dirichlet);
        assert!((part.alpha - 4.0).abs() < 1e-14);
        assert_eq!(part.neumann_count(), 0);
    }

    #[test]
    fn partition_fraction_snaps_to_nodes() {
        let grid = build_grid(&DomainSpec::unit_square(5)).unwrap();
        let sel = FaceSelection::parse("left:0.5").unwrap();
        let part = partition_boundary(&grid, &[sel]).unwrap();
        // 4 edges in the face, half of them = 2 edges = measure 0.5.
        assert!((part.alpha - 0.5).abs() < 1e-14);
        assert_eq!(part.class(grid.index(0, 0)), NodeClass::Dirichlet);
        assert_eq!(part.class(grid.index(0, 2)), NodeClass::Dirichlet);
        assert_eq!(part.class(grid.index(0, 3)), NodeClass::Neumann);
    }

    #[test]
    fn empty_selection_rejected() {
        let grid = build_grid(&DomainSpec::unit_square(5)).unwrap();
        assert!(partition_boundary(&grid, &[]).is_err());
    }

    #[test]
    fn distance_examples() {
        let grid = build_grid(&DomainSpec::interval(1.0, 5)).unwrap();
        let d = distance_field(&grid);
        assert!((d.values[2] - 0.5).abs() < 1e-15);
        assert_eq!(d.values[0], 0.0);

        let sq = build_grid(&DomainSpec::unit_square(5)).unwrap();
        let d2 = distance_field(&sq);
        let h = sq.h[0];
        assert!((d2.values[sq.index(1, 1)] - h).abs() < 1e-15);
    }

    #[test]
    fn distance_is_lipschitz() {
        let grid = build_grid(&DomainSpec::unit_square(9)).unwrap();
        let d = distance_field(&grid);
        let [nx, ny] = grid.shape;
        for j in 0..ny {
            for i in 0..nx.saturating_sub(1) {
                let a = d.values[grid.index(i, j)];
                let b = d.values[grid.index(i + 1, j)];
                assert!((a - b).abs() <= grid.h[0] + 1e-14);
            }
        }
    }

    #[test]
    fn bump_basics() {
        let grid = build_grid(&DomainSpec::interval(1.0, 65)).unwrap();
        let bump = make_bump(&grid, &[0.5], 0.2).unwrap();
        let center_idx = 32;
        assert!((bump.values[center_idx] - 1.0).abs() < 1e-15);
        for idx in 0..grid.len() {
            let x = grid.point(idx)[0];
            if (x - 0.5).abs() >= 0.2 {
                assert_eq!(bump.values[idx], 0.0);
            } else {
                assert!(bump.values[idx] >= 0.0 && bump.values[idx] <= 1.0);
            }
        }
    }

    #[test]
    fn bump_requires_containment() {
        let grid = build_grid(&DomainSpec::interval(1.0, 17)).unwrap();
        assert!(make_bump(&grid, &[0.1], 0.2).is_err());
    }

    #[test]
    fn face_selection_parsing() {
        assert_eq!(
            FaceSelection::parse("left").unwrap(),
            FaceSelection::whole(Face::Left)
        );
        let half = FaceSelection::parse("top:0.25").unwrap();
        assert_eq!(half.face, Face::Top);
        assert!((half.fraction - 0.25).abs() < 1e-15);
        assert!(FaceSelection::parse("diagonal").is_err());
        assert!(FaceSelection::parse("left:1.5").is_err());
    }
}
