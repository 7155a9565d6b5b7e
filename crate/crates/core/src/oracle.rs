//! Brute-force check: discretize the measure into weighted atoms and solve the 1-D
//! k-means problem on them exactly by dynamic programming.

use num::{BigUint, Zero};
use serde::Serialize;

use crate::construction::{all_optimal_sets, build_alpha_m, ConstructionError};
use crate::distortion::Target;
use crate::exec::Execution;
use crate::model::{CondensationSystem, Variant};
use crate::scalar::{rat, rat_pow, Rational, Scalar};

/// Largest atom count `discretize` will produce.
pub const ATOM_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("depths must be at least 1")]
    ZeroDepth,
    #[error("discretization would create {0} atoms (limit {ATOM_LIMIT})")]
    TooManyAtoms(BigUint),
    #[error("cannot split {atoms} atoms into {k} clusters")]
    ClusterCount { k: usize, atoms: usize },
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

/// Weighted atoms approximating P or ν, sorted by position.
#[derive(Clone, Debug)]
pub struct AtomicMeasure {
    pub positions: Vec<f64>,
    pub masses: Vec<f64>,
    /// Σ mass evaluated exactly, group by group.
    pub total_mass: Rational,
    /// Σ over the leaf cells of mass · scale² · template variance.
    pub truncation_variance_bound: f64,
}

impl AtomicMeasure {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

struct Builder {
    depth_p: u32,
    depth_nu: u32,
    t: [(f64, f64); 2],
    mean_nu: f64,
    mean_p: f64,
    v: f64,
    w: f64,
    out: AtomicMeasure,
}

impl Builder {
    fn nu_cell(&mut self, ratio: f64, offset: f64, mass: f64, left: u32) {
        if left == 0 {
            self.out.positions.push(ratio * self.mean_nu + offset);
            self.out.masses.push(mass);
            self.out.truncation_variance_bound += mass * ratio * ratio * self.w;
            return;
        }
        for (tr, to) in self.t {
            self.nu_cell(ratio * tr, ratio * to + offset, mass * 0.5, left - 1);
        }
    }

    fn j_cell(&mut self, ratio: f64, offset: f64, mass: f64, level: u32) {
        if level == self.depth_p {
            self.out.positions.push(ratio * self.mean_p + offset);
            self.out.masses.push(mass);
            self.out.truncation_variance_bound += mass * ratio * ratio * self.v;
            return;
        }
        let third = mass / 3.0;
        self.j_cell(ratio * 0.2, offset, third, level + 1);
        self.nu_cell(ratio, offset, third, self.depth_nu);
        self.j_cell(ratio * 0.2, ratio * 0.8 + offset, third, level + 1);
    }
}

/// Atoms at S_ω(1/2) for |ω| = depth_p and at S_ω T_τ(1/2) for |ω| < depth_p, |τ| = depth_nu
/// (for ν: at T_τ(1/2), |τ| = depth_nu).
pub fn discretize(
    target: Target,
    sys: &CondensationSystem,
    depth_p: u32,
    depth_nu: u32,
) -> Result<AtomicMeasure, OracleError> {
    if depth_p == 0 || depth_nu == 0 {
        return Err(OracleError::ZeroDepth);
    }
    let two = BigUint::from(2u32);
    let count = match target {
        Target::P => {
            let jp = num::pow::pow(two.clone(), depth_p as usize);
            &jp + (&jp - 1u32) * num::pow::pow(two, depth_nu as usize)
        }
        Target::Nu => num::pow::pow(two, depth_nu as usize),
    };
    if count > BigUint::from(ATOM_LIMIT) {
        return Err(OracleError::TooManyAtoms(count));
    }
    let total_mass = match target {
        Target::P => {
            // 2^dp atoms of mass 3^-dp, and 2^(k+dn) atoms of mass 3^-(k+1) 2^-dn for each k < dp.
            let mut total = rat_pow(&rat(2, 3), depth_p);
            for k in 0..depth_p {
                total += rat_pow(&rat(2, 3), k) * rat(1, 3);
            }
            total
        }
        Target::Nu => rat(1, 1),
    };
    let t = [
        (sys.nu.t1.ratio.to_f64(), sys.nu.t1.offset.to_f64()),
        (sys.nu.t2.ratio.to_f64(), sys.nu.t2.offset.to_f64()),
    ];
    let mut b = Builder {
        depth_p,
        depth_nu,
        t,
        mean_nu: sys.nu.mean.to_f64(),
        mean_p: sys.mean.to_f64(),
        v: sys.v.to_f64(),
        w: sys.nu.w.to_f64(),
        out: AtomicMeasure {
            positions: Vec::with_capacity(count.to_string().parse().unwrap_or(0)),
            masses: Vec::new(),
            total_mass,
            truncation_variance_bound: 0.0,
        },
    };
    match target {
        Target::P => b.j_cell(1.0, 0.0, 1.0, 0),
        Target::Nu => b.nu_cell(1.0, 0.0, 1.0, depth_nu),
    }
    Ok(b.out)
}

/// Optimal contiguous clustering of weighted atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct DpSolution {
    /// Index of the first atom of each cluster.
    pub breakpoints: Vec<usize>,
    pub centroids: Vec<f64>,
    pub cost: f64,
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.c
    }
}

struct Prefix {
    center: f64,
    w: Vec<f64>,
    s: Vec<f64>,
    q: Vec<f64>,
}

impl Prefix {
    fn new(atoms: &AtomicMeasure) -> Self {
        // Shift to the weighted mean so the second-moment sums stay small.
        let mut mw = Compensated::default();
        let mut mx = Compensated::default();
        for (&x, &m) in atoms.positions.iter().zip(&atoms.masses) {
            mw.add(m);
            mx.add(m * x);
        }
        let center = mx.value() / mw.value();
        let n = atoms.len();
        let (mut w, mut s, mut q) = (vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]);
        let (mut cw, mut cs, mut cq) = (Compensated::default(), Compensated::default(), Compensated::default());
        for i in 0..n {
            let m = atoms.masses[i];
            let y = atoms.positions[i] - center;
            cw.add(m);
            cs.add(m * y);
            cq.add(m * y * y);
            w[i + 1] = cw.value();
            s[i + 1] = cs.value();
            q[i + 1] = cq.value();
        }
        Prefix { center, w, s, q }
    }

    /// Within-cluster sum of squares of atoms i..j.
    fn cost(&self, i: usize, j: usize) -> f64 {
        let w = self.w[j] - self.w[i];
        if w <= 0.0 {
            return 0.0;
        }
        let s = self.s[j] - self.s[i];
        let q = self.q[j] - self.q[i];
        (q - s * s / w).max(0.0)
    }

    fn mean(&self, i: usize, j: usize) -> f64 {
        let w = self.w[j] - self.w[i];
        (self.s[j] - self.s[i]) / w + self.center
    }
}

/// Exact k-clustering by interval dynamic programming (divide-and-conquer row minimization).
pub fn kmeans_dp(atoms: &AtomicMeasure, k: usize) -> Result<DpSolution, OracleError> {
    let n = atoms.len();
    if k == 0 || k > n {
        return Err(OracleError::ClusterCount { k, atoms: n });
    }
    let pre = Prefix::new(atoms);
    let mut prev: Vec<f64> = (0..=n).map(|j| pre.cost(0, j)).collect();
    let mut arg: Vec<Vec<u32>> = Vec::with_capacity(k);
    arg.push(vec![0; n + 1]);
    for layer in 1..k {
        let mut cur = vec![f64::INFINITY; n + 1];
        let mut choice = vec![0u32; n + 1];
        solve_layer(&pre, &prev, &mut cur, &mut choice, layer + 1, n, layer, n - 1);
        prev = cur;
        arg.push(choice);
    }
    let mut breakpoints = vec![0; k];
    let mut end = n;
    for layer in (0..k).rev() {
        let start = arg[layer][end] as usize;
        breakpoints[layer] = start;
        end = start;
    }
    let centroids = (0..k)
        .map(|c| {
            let j = if c + 1 < k { breakpoints[c + 1] } else { n };
            pre.mean(breakpoints[c], j)
        })
        .collect();
    Ok(DpSolution {
        breakpoints,
        centroids,
        cost: prev[n],
    })
}

/// Fills cur[j] = min_i prev[i] + cost(i, j) for j in lo..=hi, with the optimum in opt_lo..=opt_hi.
#[allow(clippy::too_many_arguments)]
fn solve_layer(
    pre: &Prefix,
    prev: &[f64],
    cur: &mut [f64],
    choice: &mut [u32],
    lo: usize,
    hi: usize,
    opt_lo: usize,
    opt_hi: usize,
) {
    if lo > hi {
        return;
    }
    let mid = (lo + hi) / 2;
    let mut best = f64::INFINITY;
    let mut best_i = opt_lo;
    for i in opt_lo..=opt_hi.min(mid - 1) {
        let v = prev[i] + pre.cost(i, mid);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    cur[mid] = best;
    choice[mid] = best_i as u32;
    if mid > lo {
        solve_layer(pre, prev, cur, choice, lo, mid - 1, opt_lo, best_i);
    }
    solve_layer(pre, prev, cur, choice, mid + 1, hi, best_i, opt_hi);
}

/// Lloyd iteration from given starting centroids; a local method kept for comparison only.
pub fn lloyd(atoms: &AtomicMeasure, init: &[f64], iterations: usize) -> DpSolution {
    let mut centers: Vec<f64> = init.to_vec();
    centers.sort_by(f64::total_cmp);
    let pre = Prefix::new(atoms);
    let mut breaks = vec![0usize; centers.len()];
    for _ in 0..iterations.max(1) {
        for c in 1..centers.len() {
            let mid = 0.5 * (centers[c - 1] + centers[c]);
            breaks[c] = atoms.positions.partition_point(|&x| x <= mid);
        }
        let mut changed = false;
        for c in 0..centers.len() {
            let end = if c + 1 < centers.len() { breaks[c + 1] } else { atoms.len() };
            if end > breaks[c] {
                let m = pre.mean(breaks[c], end);
                changed |= (m - centers[c]).abs() > 1e-15;
                centers[c] = m;
            }
        }
        if !changed {
            break;
        }
    }
    let cost = (0..centers.len())
        .map(|c| {
            let end = if c + 1 < centers.len() { breaks[c + 1] } else { atoms.len() };
            (breaks[c]..end)
                .map(|i| atoms.masses[i] * (atoms.positions[i] - centers[c]).powi(2))
                .sum::<f64>()
        })
        .sum();
    DpSolution {
        breakpoints: breaks,
        centroids: centers,
        cost,
    }
}

/// Outcome of comparing the DP optimum with a constructed optimal set.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub variant: String,
    pub m: u64,
    pub dp_cost: f64,
    pub exact_error: Scalar,
    pub diff: f64,
    pub bound: f64,
    pub truncation_variance_bound: f64,
    /// Smallest, over the admissible optimal sets, of the largest centroid deviation.
    pub centroid_deviation: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub depth_p: u32,
    pub depth_nu: u32,
    pub tol: f64,
    /// Centroids must match a constructed set to within this distance.
    pub centroid_tol: f64,
    /// Largest number of alternative optimal sets enumerated for centroid matching.
    pub max_alternatives: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            depth_p: 8,
            depth_nu: 8,
            tol: 1e-6,
            centroid_tol: 1e-4,
            max_alternatives: 4096,
        }
    }
}

/// Checks the constructed optimal set of m-means against the DP optimum on the atoms.
pub fn verify_optimality(
    variant: Variant,
    m: u64,
    opts: &OracleOptions,
) -> Result<VerificationReport, OracleError> {
    let sys = variant.system();
    let atoms = discretize(Target::P, &sys, opts.depth_p, opts.depth_nu)?;
    verify_against(&atoms, variant, m, opts)
}

fn verify_against(
    atoms: &AtomicMeasure,
    variant: Variant,
    m: u64,
    opts: &OracleOptions,
) -> Result<VerificationReport, OracleError> {
    let sys = variant.system();
    let bundle = build_alpha_m(variant, m)?;
    let dp = kmeans_dp(atoms, m as usize)?;
    let exact_f = bundle.error.to_f64();
    let diff = (dp.cost - exact_f).abs();
    let bound = opts.tol + atoms.truncation_variance_bound;
    let centroid_deviation = all_optimal_sets(variant, m, opts.max_alternatives)?.map(|sets| {
        sets.iter()
            .map(|addrs| {
                let mut vals: Vec<f64> = addrs.iter().map(|a| sys.eval_point(a).to_f64()).collect();
                vals.sort_by(f64::total_cmp);
                vals.iter()
                    .zip(&dp.centroids)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    });
    let centroids_ok = centroid_deviation.map_or(true, |d| d <= opts.centroid_tol);
    Ok(VerificationReport {
        variant: variant.name().to_string(),
        m,
        dp_cost: dp.cost,
        exact_error: bundle.error,
        diff,
        bound,
        truncation_variance_bound: atoms.truncation_variance_bound,
        centroid_deviation,
        pass: diff <= bound && centroids_ok,
    })
}

/// Runs independent verifications, sharing one discretization per variant.
pub fn verify_many(
    cases: &[(Variant, u64)],
    opts: &OracleOptions,
    exec: Execution,
) -> Result<Vec<VerificationReport>, OracleError> {
    let mut variants: Vec<Variant> = cases.iter().map(|c| c.0).collect();
    variants.sort();
    variants.dedup();
    let atoms: Vec<(Variant, Result<AtomicMeasure, OracleError>)> = exec
        .map(&variants, |&v| (v, discretize(Target::P, &v.system(), opts.depth_p, opts.depth_nu)))
        .into_iter()
        .collect();
    let lookup = |v: Variant| atoms.iter().find(|(w, _)| *w == v).map(|(_, a)| a).expect("variant");
    exec.map(cases, |&(v, m)| match lookup(v) {
        Ok(a) => verify_against(a, v, m, opts),
        Err(e) => Err(e.clone()),
    })
    .into_iter()
    .collect()
}

/// Exhaustive minimum over all contiguous partitions; only for tiny inputs.
pub fn brute_force_cost(atoms: &AtomicMeasure, k: usize) -> f64 {
    let n = atoms.len();
    let pre = Prefix::new(atoms);
    fn rec(pre: &Prefix, start: usize, n: usize, k: usize) -> f64 {
        if k == 1 {
            return pre.cost(start, n);
        }
        (start + 1..=n - (k - 1))
            .map(|cut| pre.cost(start, cut) + rec(pre, cut, n, k - 1))
            .fold(f64::INFINITY, f64::min)
    }
    if k == 0 || k > n {
        return f64::NAN;
    }
    rec(&pre, 0, n, k)
}

impl AtomicMeasure {
    /// Atoms built directly from positions and masses, for tests and comparisons.
    pub fn from_parts(positions: Vec<f64>, masses: Vec<f64>) -> Self {
        let total = masses.iter().sum::<f64>();
        AtomicMeasure {
            positions,
            masses,
            total_mass: Rational::zero() + rat((total * 1e6).round() as i64, 1_000_000),
            truncation_variance_bound: 0.0,
        }
    }
}
