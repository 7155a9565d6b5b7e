//! Exact distortion of a finite codebook against P or ν.
//!
//! Cylinder cells are refined until each one lies inside a single Voronoi region; such a
//! cell contributes its second moment about that region's point in closed form.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num::{BigInt, One, Zero};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::exec::Execution;
use crate::model::{Address, CellKind, CondensationSystem, CylinderCell, ModelError, Word};
use crate::scalar::{rat, rat_pow, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistortionError {
    #[error("codebook is empty")]
    EmptyCodebook,
    #[error("codebook contains the point {0} twice")]
    DuplicatePoint(String),
    #[error("tolerance must be positive when the depth is unbounded")]
    Unbounded,
}

/// The measure being quantized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    P,
    Nu,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantPoint {
    pub value: Scalar,
    pub provenance: Option<Address>,
}

/// A codebook with strictly increasing values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizerSet {
    points: Vec<QuantPoint>,
}

impl QuantizerSet {
    pub fn new(mut points: Vec<QuantPoint>) -> Result<Self, DistortionError> {
        if points.is_empty() {
            return Err(DistortionError::EmptyCodebook);
        }
        sort_by_value(&mut points);
        for w in points.windows(2) {
            if w[0].value == w[1].value {
                return Err(DistortionError::DuplicatePoint(w[0].value.to_string()));
            }
        }
        Ok(QuantizerSet { points })
    }

    pub fn from_values(values: Vec<Scalar>) -> Result<Self, DistortionError> {
        QuantizerSet::new(
            values
                .into_iter()
                .map(|value| QuantPoint {
                    value,
                    provenance: None,
                })
                .collect(),
        )
    }

    pub fn from_addresses(
        addrs: &[Address],
        sys: &CondensationSystem,
        exec: Execution,
    ) -> Result<Self, DistortionError> {
        let values = exec.map(addrs, |a| sys.eval_point(a));
        QuantizerSet::new(
            values
                .into_iter()
                .zip(addrs.iter().cloned())
                .map(|(value, a)| QuantPoint {
                    value,
                    provenance: Some(a),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[QuantPoint] {
        &self.points
    }

    pub fn values(&self) -> Vec<Scalar> {
        self.points.iter().map(|p| p.value.clone()).collect()
    }

    /// Mirror image x ↦ 2c − x.
    pub fn reflect(&self, center: &Scalar) -> QuantizerSet {
        let twice = center.mul_rat(&rat(2, 1));
        QuantizerSet::from_values(self.points.iter().map(|p| &twice - &p.value).collect())
            .expect("reflection preserves distinctness")
    }
}

/// Sorts by value using a float key first and exact comparison on near-ties.
fn sort_by_value(points: &mut [QuantPoint]) {
    let mut keyed: Vec<(f64, QuantPoint)> = points
        .iter()
        .map(|p| (p.value.to_f64(), p.clone()))
        .collect();
    keyed.sort_by(|a, b| cmp_prefiltered(a.0, &a.1.value, b.0, &b.1.value));
    for (slot, (_, p)) in points.iter_mut().zip(keyed) {
        *slot = p;
    }
}

const REL_MARGIN: f64 = 1e-9;

/// Compares two exact values, deciding from their float shadows when they are far apart.
fn cmp_prefiltered(xf: f64, x: &Scalar, yf: f64, y: &Scalar) -> Ordering {
    let gap = xf - yf;
    let scale = xf.abs().max(yf.abs());
    if scale.is_finite() && scale > 1e-280 && gap.abs() > REL_MARGIN * scale {
        if gap < 0.0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    } else {
        x.cmp(y)
    }
}

/// The n − 1 midpoints between consecutive codebook values.
pub fn voronoi_boundaries(alpha: &QuantizerSet) -> Vec<Scalar> {
    alpha
        .points
        .windows(2)
        .map(|w| (&w[0].value + &w[1].value).half())
        .collect()
}

#[derive(Clone, Debug)]
pub struct DistortionOptions {
    pub tol: Rational,
    /// Cells at this depth that still straddle a boundary are left unresolved.
    pub max_depth: Option<usize>,
    pub execution: Execution,
}

impl Default for DistortionOptions {
    fn default() -> Self {
        DistortionOptions {
            tol: Rational::new(BigInt::one(), num::pow::pow(BigInt::from(10), 30)),
            max_depth: Some(60),
            execution: Execution::default(),
        }
    }
}

impl DistortionOptions {
    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = Some(depth);
        self
    }
}

/// Result of a distortion computation. The true distortion lies in
/// `[value, value + truncation_bound]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistortionReport {
    pub value: Scalar,
    pub truncation_bound: Scalar,
    pub per_point: Vec<Scalar>,
    pub max_depth_used: usize,
    pub exact: bool,
}

impl Serialize for DistortionReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(Some(5))?;
        m.serialize_entry("value", &self.value)?;
        m.serialize_entry("truncation_bound", &self.truncation_bound)?;
        m.serialize_entry("exact", &self.exact)?;
        m.serialize_entry("per_point", &self.per_point)?;
        m.serialize_entry("depth", &self.max_depth_used)?;
        m.end()
    }
}

struct Engine<'a> {
    sys: &'a CondensationSystem,
    points: Vec<Scalar>,
    points_f: Vec<f64>,
    bounds: Vec<Scalar>,
    bounds_f: Vec<f64>,
    nu_hull_f: (f64, f64),
    v_f: f64,
    w_f: f64,
    mean_f: f64,
    nu_mean_f: f64,
}

enum Outcome {
    Resolved(usize, Scalar),
    Split(Vec<CylinderCell>),
    Capped(Scalar),
}

struct Pending {
    priority: f64,
    seq: u64,
    cell: CylinderCell,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

const BATCH: usize = 2048;

impl<'a> Engine<'a> {
    fn new(alpha: &QuantizerSet, sys: &'a CondensationSystem) -> Self {
        let points = alpha.values();
        let points_f = points.iter().map(Scalar::to_f64).collect();
        let bounds = voronoi_boundaries(alpha);
        let bounds_f = bounds.iter().map(Scalar::to_f64).collect();
        Engine {
            sys,
            points,
            points_f,
            bounds,
            bounds_f,
            nu_hull_f: (sys.nu.hull.0.to_f64(), sys.nu.hull.1.to_f64()),
            v_f: sys.v.to_f64(),
            w_f: sys.nu.w.to_f64(),
            mean_f: sys.mean.to_f64(),
            nu_mean_f: sys.nu.mean.to_f64(),
        }
    }

    /// Number of boundaries strictly below x: the index of the region holding x, ties going left.
    fn region_of(&self, xf: f64, x: &Scalar) -> usize {
        let lt = |j: usize| cmp_prefiltered(self.bounds_f[j], &self.bounds[j], xf, x) == Ordering::Less;
        let mut i = self.bounds_f.partition_point(|&b| b < xf);
        while i > 0 && !lt(i - 1) {
            i -= 1;
        }
        while i < self.bounds.len() && lt(i) {
            i += 1;
        }
        i
    }

    fn region_of_f64(&self, xf: f64) -> usize {
        self.bounds_f.partition_point(|&b| b < xf)
    }

    fn centroid_f(&self, cell: &CylinderCell) -> f64 {
        let a = cell.approx();
        let m = if cell.kind == CellKind::J {
            self.mean_f
        } else {
            self.nu_mean_f
        };
        a.ratio * m + a.offset
    }

    /// Float estimate of the best single-point second moment, used as the work priority.
    fn priority(&self, cell: &CylinderCell) -> f64 {
        let a = cell.approx();
        let c = self.centroid_f(cell);
        let y = self.points_f[self.region_of_f64(c)];
        let var = if cell.kind == CellKind::J {
            self.v_f
        } else {
            self.w_f
        };
        a.mass * (a.ratio * a.ratio * var + (c - y) * (c - y))
    }

    fn upper(&self, cell: &CylinderCell) -> (usize, Scalar) {
        let c = cell.centroid(self.sys);
        let i = self.region_of(self.centroid_f(cell), &c);
        (i, cell.second_moment_about(&self.points[i], self.sys))
    }

    fn process(&self, cell: &CylinderCell, max_depth: Option<usize>) -> Outcome {
        let (lo_f, hi_f) = cell.hull_f64(self.nu_hull_f);
        let (lo, hi) = cell.hull(self.sys);
        let i = self.region_of(hi_f, &hi);
        let inside = i == 0
            || cmp_prefiltered(lo_f, &lo, self.bounds_f[i - 1], &self.bounds[i - 1])
                != Ordering::Less;
        if inside {
            return Outcome::Resolved(i, cell.second_moment_about(&self.points[i], self.sys));
        }
        if max_depth.is_some_and(|d| cell.depth() >= d) {
            let (_, u) = self.upper(cell);
            return Outcome::Capped(u);
        }
        Outcome::Split(cell.children(self.sys))
    }
}

/// ∫ min_{a∈α} (x − a)² dμ for μ = P or ν.
pub fn distortion(
    alpha: &QuantizerSet,
    target: Target,
    sys: &CondensationSystem,
    opts: &DistortionOptions,
) -> Result<DistortionReport, DistortionError> {
    if alpha.is_empty() {
        return Err(DistortionError::EmptyCodebook);
    }
    if opts.max_depth.is_none() && opts.tol <= Rational::zero() {
        return Err(DistortionError::Unbounded);
    }
    let engine = Engine::new(alpha, sys);
    let root = match target {
        Target::P => CylinderCell::root_j(),
        Target::Nu => CylinderCell::root_nu(),
    };
    let tol = Scalar::Rat(opts.tol.clone());
    let tol_f = opts.tol_f64();
    let mut per_point = vec![Scalar::zero(); alpha.len()];
    let mut unresolved: Vec<Scalar> = Vec::new();
    let mut max_depth_used = 0;
    let mut seq = 0u64;
    let mut heap = BinaryHeap::new();
    let mut pending_f = 0.0f64;
    let push = |heap: &mut BinaryHeap<Pending>, cell: CylinderCell, seq: &mut u64, sum: &mut f64| {
        let priority = engine.priority(&cell);
        *sum += priority;
        heap.push(Pending {
            priority,
            seq: *seq,
            cell,
        });
        *seq += 1;
    };
    push(&mut heap, root, &mut seq, &mut pending_f);

    while !heap.is_empty() {
        if tol_f > 0.0 && pending_f <= 0.5 * tol_f {
            // Confirm exactly before giving up on the remaining cells.
            let rest: Vec<Pending> = heap.drain().collect();
            let cells: Vec<&CylinderCell> = rest.iter().map(|p| &p.cell).collect();
            let bounds: Vec<Scalar> = opts
                .execution
                .map(&cells, |c| engine.upper(c).1);
            let total: Scalar = bounds.iter().sum();
            if total <= tol {
                for p in &rest {
                    max_depth_used = max_depth_used.max(p.cell.depth());
                }
                unresolved.extend(bounds);
                break;
            }
            pending_f = 0.0;
            for p in rest {
                pending_f += p.priority;
                heap.push(p);
            }
            // Float shadow disagreed with the exact check; refine one more batch regardless.
        }
        let mut batch = Vec::with_capacity(BATCH.min(heap.len()));
        while batch.len() < BATCH {
            match heap.pop() {
                Some(p) => {
                    pending_f -= p.priority;
                    batch.push(p.cell);
                }
                None => break,
            }
        }
        if heap.is_empty() {
            pending_f = 0.0;
        }
        let outcomes = opts
            .execution
            .map(&batch, |c| engine.process(c, opts.max_depth));
        for (cell, outcome) in batch.iter().zip(outcomes) {
            max_depth_used = max_depth_used.max(cell.depth());
            match outcome {
                Outcome::Resolved(i, v) => per_point[i] = &per_point[i] + v,
                Outcome::Capped(u) => unresolved.push(u),
                Outcome::Split(children) => {
                    for child in children {
                        push(&mut heap, child, &mut seq, &mut pending_f);
                    }
                }
            }
        }
    }

    let value: Scalar = per_point.iter().sum();
    let truncation_bound: Scalar = unresolved.iter().sum();
    let exact = truncation_bound.is_zero();
    Ok(DistortionReport {
        value,
        truncation_bound,
        per_point,
        max_depth_used,
        exact,
    })
}

impl DistortionOptions {
    fn tol_f64(&self) -> f64 {
        Scalar::Rat(self.tol.clone()).to_f64()
    }
}

/// Distortion with default options.
pub fn distortion_of(
    alpha: &QuantizerSet,
    target: Target,
    sys: &CondensationSystem,
) -> Result<DistortionReport, DistortionError> {
    distortion(alpha, target, sys, &DistortionOptions::default())
}

/// Error contributed by L_ω when it is covered by S_ω(α_n(ν)): (1/75^|ω|)(1/3)V_n(ν).
pub fn scaled_block_error(
    omega: &Word,
    n: u64,
    sys: &CondensationSystem,
) -> Result<Scalar, ModelError> {
    let vn = sys.nu_optimal_error(n)?;
    let factor = rat_pow(&rat(1, 75), omega.len() as u32) * rat(1, 3);
    Ok(vn.mul_rat(&factor))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Error of one half of the two-means block of J_ω, measured about an arbitrary point `a`:
/// (1/3^k)((1/25^k)(V₂/2) + (1/2)(S_ω(anchor) − a)²).
pub fn two_mean_block_error(omega: &Word, a: &Scalar, side: Side, sys: &CondensationSystem) -> Scalar {
    let k = omega.len() as u32;
    let anchor = match side {
        Side::Left => &sys.two_means.0,
        Side::Right => &sys.two_means.1,
    };
    let center = sys.s_word(omega).apply(anchor);
    let spread = sys.v2.half().mul_rat(&rat_pow(&rat(1, 25), k));
    let shift = (center - a).square().half();
    (spread + shift).mul_rat(&rat_pow(&rat(1, 3), k))
}
