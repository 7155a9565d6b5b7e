//! Families of quantizer points, the order ≻ on them, and the greedy construction of
//! optimal sets of F(n)-means and of arbitrary m-means.

use std::cmp::Ordering;
use std::fmt;

use num::{BigUint, One, ToPrimitive, Zero};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::Serialize;

use crate::distortion::{distortion, DistortionError, DistortionOptions, QuantizerSet, Target};
use crate::exec::Execution;
use crate::model::{Address, Anchor, CondensationSystem, Regime, Variant, Word};
use crate::scalar::{int, rat, rat_pow, Scalar};
use crate::sequences::{a_of, block_exponent, f_of, level_of};

/// Largest codebook that is ever materialized point by point.
pub const MATERIALIZE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructionError {
    #[error("m must be at least 1")]
    ZeroMeans,
    #[error("n must be at least 1")]
    ZeroLevel,
    #[error("refusing to materialize {0} points (limit {MATERIALIZE_LIMIT})")]
    TooLarge(BigUint),
    #[error(transparent)]
    Distortion(#[from] DistortionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// {S_ω(1/2) : |ω| = d}
    Centroids,
    /// {S_ω(a1), S_ω(a2) : |ω| = d}
    TwoMeans,
    /// ∪_{|ω| = d} S_ω(α_{2^e}(ν))
    NuBlock { exponent: u32 },
}

impl FamilyKind {
    fn rank(self) -> u8 {
        match self {
            FamilyKind::NuBlock { .. } => 0,
            FamilyKind::Centroids => 1,
            FamilyKind::TwoMeans => 2,
        }
    }
}

/// A block of points sharing one per-element error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub kind: FamilyKind,
    pub scale_depth: u32,
    pub label: String,
    pub cardinality: BigUint,
    pub per_element_error: Scalar,
}

impl Family {
    pub fn new(kind: FamilyKind, scale_depth: u32, level: u32, sys: &CondensationSystem) -> Family {
        let regime = regime_of(sys);
        let scale = rat_pow(&rat(1, 75), scale_depth);
        let (cardinality, per_element_error) = match kind {
            FamilyKind::Centroids => (pow2(scale_depth as u64), sys.v.mul_rat(&scale)),
            FamilyKind::TwoMeans => (pow2(scale_depth as u64 + 1), sys.v2.half().mul_rat(&scale)),
            FamilyKind::NuBlock { exponent } => (
                pow2(scale_depth as u64 + exponent as u64),
                (sys.nu.r2_half.pow(exponent) * &sys.nu.w).mul_rat(&(scale * rat(1, 3))),
            ),
        };
        Family {
            kind,
            scale_depth,
            label: family_label(kind, scale_depth, level, regime),
            cardinality,
            per_element_error,
        }
    }

    /// Σ over the family of its per-element error.
    pub fn total_error(&self) -> Scalar {
        self.per_element_error
            .mul_rat(&num::BigRational::from_integer(self.cardinality.clone().into()))
    }

    /// The family (or pair of families) obtained by splitting every element once.
    pub fn split(&self, level: u32, sys: &CondensationSystem) -> Vec<Family> {
        let d = self.scale_depth;
        match self.kind {
            FamilyKind::Centroids => vec![Family::new(FamilyKind::TwoMeans, d, level, sys)],
            FamilyKind::TwoMeans => vec![
                Family::new(FamilyKind::Centroids, d + 1, level, sys),
                Family::new(FamilyKind::NuBlock { exponent: 1 }, d, level, sys),
            ],
            FamilyKind::NuBlock { exponent } => vec![Family::new(
                FamilyKind::NuBlock {
                    exponent: exponent + 1,
                },
                d,
                level,
                sys,
            )],
        }
    }

    /// Per-element error of the two points that replace one element when it is split.
    pub fn split_child_error(&self, sys: &CondensationSystem) -> Scalar {
        let kids = self.split(0, sys);
        let parent = num::BigRational::new(num::BigInt::one(), self.cardinality.clone().into());
        kids.iter().map(|k| k.total_error()).sum::<Scalar>().mul_rat(&parent)
    }

    /// Error removed by splitting one element.
    pub fn element_split_gain(&self, sys: &CondensationSystem) -> Scalar {
        &self.per_element_error - &self.split_child_error(sys)
    }

    fn same_block(&self, other: &Family) -> bool {
        self.kind == other.kind && self.scale_depth == other.scale_depth
    }

    /// Addresses of all elements in lexicographic order.
    pub fn addresses(&self) -> Vec<Address> {
        let omegas = Word::all(self.scale_depth as usize);
        match self.kind {
            FamilyKind::Centroids => omegas.into_iter().map(Address::half).collect(),
            FamilyKind::TwoMeans => omegas
                .into_iter()
                .flat_map(|w| {
                    [
                        Address::new(w.clone(), Word::empty(), Anchor::TwoLeft),
                        Address::new(w, Word::empty(), Anchor::TwoRight),
                    ]
                })
                .collect(),
            FamilyKind::NuBlock { exponent } => {
                let taus = Word::all(exponent as usize);
                omegas
                    .into_iter()
                    .flat_map(|w| {
                        taus.iter()
                            .map(move |t| Address::new(w.clone(), t.clone(), Anchor::Half))
                            .collect::<Vec<_>>()
                    })
                    .collect()
            }
        }
    }

    /// The two addresses replacing one element of this family.
    pub fn split_element(&self, addr: &Address) -> [Address; 2] {
        match (self.kind, &addr.anchor) {
            (FamilyKind::Centroids, _) => [
                Address::new(addr.s.clone(), Word::empty(), Anchor::TwoLeft),
                Address::new(addr.s.clone(), Word::empty(), Anchor::TwoRight),
            ],
            (FamilyKind::TwoMeans, Anchor::TwoLeft) => [
                Address::half(addr.s.push(1)),
                Address::new(addr.s.clone(), Word(vec![1]), Anchor::Half),
            ],
            (FamilyKind::TwoMeans, _) => [
                Address::new(addr.s.clone(), Word(vec![2]), Anchor::Half),
                Address::half(addr.s.push(2)),
            ],
            (FamilyKind::NuBlock { .. }, _) => [
                Address::new(addr.s.clone(), addr.t.push(1), Anchor::Half),
                Address::new(addr.s.clone(), addr.t.push(2), Anchor::Half),
            ],
        }
    }
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(Some(3))?;
        m.serialize_entry("label", &self.label)?;
        m.serialize_entry("cardinality", &self.cardinality.to_string())?;
        m.serialize_entry("per_element_error", &self.per_element_error)?;
        m.end()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn pow2(e: u64) -> BigUint {
    BigUint::one() << (e as usize)
}

fn regime_of(sys: &CondensationSystem) -> Regime {
    sys.variant().map(Variant::regime).unwrap_or(Regime::Plain)
}

fn family_label(kind: FamilyKind, depth: u32, level: u32, regime: Regime) -> String {
    match kind {
        FamilyKind::Centroids if depth == level => "S(0)".into(),
        FamilyKind::Centroids => format!("S(0)@{depth}"),
        FamilyKind::TwoMeans if depth == level => "S^(2)(0)".into(),
        FamilyKind::TwoMeans => format!("S^(2)(0)@{depth}"),
        FamilyKind::NuBlock { exponent } => {
            if depth < level {
                let l = (level - depth) as u64;
                let base = block_exponent(regime, l).expect("l >= 1");
                let name = if regime == Regime::Crossing && l >= 3 {
                    format!("a({l})")
                } else {
                    l.to_string()
                };
                match (exponent as u64).checked_sub(base) {
                    Some(0) => return format!("S({name})"),
                    Some(1) => return format!("S^(2)({name})"),
                    Some(2) => return format!("S^(2)(2)({name})"),
                    _ => {}
                }
            }
            format!("nu[{depth},{exponent}]")
        }
    }
}

/// SF(n): the families making up α_{F(n)}.
pub fn sf(variant: Variant, n: u32) -> Vec<Family> {
    let sys = variant.system();
    sf_with(&sys, n)
}

fn sf_with(sys: &CondensationSystem, n: u32) -> Vec<Family> {
    let regime = regime_of(sys);
    let mut out = vec![Family::new(FamilyKind::Centroids, n, n, sys)];
    for l in 1..=n {
        let e = block_exponent(regime, l as u64).expect("l >= 1") as u32;
        out.push(Family::new(FamilyKind::NuBlock { exponent: e }, n - l, n, sys));
    }
    out
}

/// SF*(n): SF(n) together with the once-split families the order ≻ ranges over.
pub fn sf_star(variant: Variant, n: u32) -> Vec<Family> {
    let sys = variant.system();
    sf_star_with(&sys, n)
}

fn sf_star_with(sys: &CondensationSystem, n: u32) -> Vec<Family> {
    let mut out = sf_with(sys, n);
    out.push(Family::new(FamilyKind::TwoMeans, n, n, sys));
    if regime_of(sys) == Regime::Crossing {
        for l in 2..=n / 2 {
            let e = a_of(Regime::Crossing, 2 * l as u64).expect("2l >= 1") as u32 + 1;
            out.push(Family::new(FamilyKind::NuBlock { exponent: e }, n - 2 * l, n, sys));
        }
    }
    out
}

/// Exact ordering: larger per-element error first. Exact ties put the family with the
/// smaller scale depth first, then ν-blocks before S(0) before S^(2)(0).
pub fn compare_families(a: &Family, b: &Family) -> Ordering {
    b.per_element_error
        .cmp(&a.per_element_error)
        .then_with(|| a.scale_depth.cmp(&b.scale_depth))
        .then_with(|| a.kind.rank().cmp(&b.kind.rank()))
}

/// SF*(n) sorted by ≻.
pub fn family_order(variant: Variant, n: u32) -> Vec<Family> {
    let sys = variant.system();
    family_order_with(&sys, n)
}

fn family_order_with(sys: &CondensationSystem, n: u32) -> Vec<Family> {
    let mut fams = sf_star_with(sys, n);
    fams.sort_by(compare_families);
    fams
}

/// The families split, in order, on the way from α_{F(n)} to α_{F(n+1)}. In the plain
/// regime S(1) is carried over unsplit: it becomes S(2) at the next level.
pub fn split_ladder(variant: Variant, n: u32) -> Vec<Family> {
    split_ladder_with(&variant.system(), n)
}

fn split_ladder_with(sys: &CondensationSystem, n: u32) -> Vec<Family> {
    let mut order = family_order_with(sys, n);
    if regime_of(sys) == Regime::Plain {
        order.retain(|f| !(f.kind == (FamilyKind::NuBlock { exponent: 1 }) && f.scale_depth + 1 == n));
    }
    order
}

/// A multiset of families, optionally with some elements of one family split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyState {
    pub level: u32,
    pub families: Vec<Family>,
    pub partial: Option<PartialSplit>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialSplit {
    /// Index into `families` of the partially split family.
    pub index: usize,
    /// Number of its elements that are split.
    pub count: u64,
    pub child_error: Scalar,
}

impl FamilyState {
    pub fn total_cardinality(&self) -> BigUint {
        let base: BigUint = self.families.iter().map(|f| f.cardinality.clone()).sum();
        base + self.partial.as_ref().map_or(0, |p| p.count)
    }

    pub fn total_error(&self) -> Scalar {
        let base: Scalar = self.families.iter().map(Family::total_error).sum();
        match &self.partial {
            None => base,
            Some(p) => {
                let f = &self.families[p.index];
                let delta = (&p.child_error - &f.per_element_error).mul_rat(&int(p.count as i64));
                base + delta
            }
        }
    }

    /// Number of optimal sets represented by this state: the ways to pick the split elements.
    pub fn multiplicity(&self) -> BigUint {
        match &self.partial {
            None => BigUint::one(),
            Some(p) => binomial(&self.families[p.index].cardinality, p.count),
        }
    }

    /// All addresses, taking the lexicographically first elements of the partial family.
    pub fn addresses(&self) -> Result<Vec<Address>, ConstructionError> {
        let chosen = self
            .partial
            .as_ref()
            .map(|p| (0..p.count as usize).collect::<Vec<_>>());
        self.addresses_with(chosen.as_deref())
    }

    /// The split elements of the partial family under the canonical choice.
    pub fn beta(&self) -> Vec<Address> {
        match &self.partial {
            None => Vec::new(),
            Some(p) => self.families[p.index]
                .addresses()
                .into_iter()
                .take(p.count as usize)
                .collect(),
        }
    }

    fn addresses_with(&self, chosen: Option<&[usize]>) -> Result<Vec<Address>, ConstructionError> {
        let total = self.total_cardinality();
        if total > BigUint::from(MATERIALIZE_LIMIT) {
            return Err(ConstructionError::TooLarge(total));
        }
        let mut out = Vec::with_capacity(total.to_usize().unwrap_or(0));
        for (i, fam) in self.families.iter().enumerate() {
            let elems = fam.addresses();
            match (&self.partial, chosen) {
                (Some(p), Some(chosen)) if p.index == i => {
                    let mut picked = vec![false; elems.len()];
                    for &c in chosen {
                        picked[c] = true;
                    }
                    for (a, split) in elems.iter().zip(picked) {
                        if split {
                            out.extend(fam.split_element(a));
                        } else {
                            out.push(a.clone());
                        }
                    }
                }
                _ => out.extend(elems),
            }
        }
        Ok(out)
    }
}

/// C(n, k) for a big n.
pub fn binomial(n: &BigUint, k: u64) -> BigUint {
    if BigUint::from(k) > *n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

/// The family state of the greedy optimal set of m-means.
pub fn optimal_state(variant: Variant, m: u64) -> Result<FamilyState, ConstructionError> {
    optimal_state_with(&variant.system(), m)
}

fn optimal_state_with(sys: &CondensationSystem, m: u64) -> Result<FamilyState, ConstructionError> {
    if m == 0 {
        return Err(ConstructionError::ZeroMeans);
    }
    let regime = regime_of(sys);
    let small = |families: Vec<Family>| FamilyState {
        level: 0,
        families,
        partial: None,
    };
    match m {
        1 => return Ok(small(vec![Family::new(FamilyKind::Centroids, 0, 0, sys)])),
        2 => return Ok(small(vec![Family::new(FamilyKind::TwoMeans, 0, 0, sys)])),
        3 => {
            return Ok(small(vec![
                Family::new(FamilyKind::Centroids, 1, 1, sys),
                Family::new(FamilyKind::NuBlock { exponent: 0 }, 0, 1, sys),
            ]))
        }
        _ => {}
    }
    let m_big = BigUint::from(m);
    let n = level_of(regime, &m_big).expect("m >= F(1)") as u32;
    let mut families = sf_with(sys, n);
    let mut remaining = m_big - f_of(regime, n as u64).expect("n >= 1");
    let mut partial = None;
    for fam in split_ladder_with(sys, n) {
        if remaining.is_zero() {
            break;
        }
        let idx = families
            .iter()
            .position(|f| f.same_block(&fam))
            .expect("ladder families appear before they are split");
        if fam.cardinality <= remaining {
            remaining -= &fam.cardinality;
            let replaced = families.remove(idx);
            for (offset, child) in replaced.split(n, sys).into_iter().enumerate() {
                families.insert(idx + offset, child);
            }
        } else {
            let count = remaining.to_u64().expect("below one family");
            partial = Some(PartialSplit {
                index: idx,
                count,
                child_error: families[idx].split_child_error(sys),
            });
            remaining = BigUint::zero();
            break;
        }
    }
    debug_assert!(remaining.is_zero());
    Ok(FamilyState {
        level: n,
        families,
        partial,
    })
}

/// α_{F(n)} as a codebook.
pub fn build_alpha_f(variant: Variant, n: u32) -> Result<QuantizerSet, ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::ZeroLevel);
    }
    let sys = variant.system();
    let state = FamilyState {
        level: n,
        families: sf_with(&sys, n),
        partial: None,
    };
    let addrs = state.addresses()?;
    Ok(QuantizerSet::from_addresses(&addrs, &sys, Execution::default())?)
}

/// A constructed optimal set of m-means.
#[derive(Clone, Debug)]
pub struct OptimalSetBundle {
    pub variant: Variant,
    pub m: u64,
    pub points: QuantizerSet,
    /// Exact distortion computed by the distortion engine.
    pub error: Scalar,
    /// Σ cardinality · per-element error over the family state.
    pub family_error: Scalar,
    pub multiplicity: BigUint,
    pub beta: Vec<Address>,
    pub state: FamilyState,
}

impl OptimalSetBundle {
    /// Human-readable description of the partial split.
    pub fn chosen_beta(&self) -> String {
        match &self.state.partial {
            None => "none".into(),
            Some(p) => {
                let fam = &self.state.families[p.index];
                let list: Vec<String> = self.beta.iter().map(|a| a.to_string()).collect();
                format!(
                    "{} of {} elements of {}: {}",
                    p.count,
                    fam.cardinality,
                    fam.label,
                    list.join(", ")
                )
            }
        }
    }
}

impl Serialize for OptimalSetBundle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Points<'a>(&'a QuantizerSet);
        impl Serialize for Points<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
                for p in self.0.points() {
                    let mut entry = serde_json::Map::new();
                    if let Some(a) = &p.provenance {
                        entry.insert("address".into(), serde_json::to_value(a).expect("address"));
                    }
                    entry.insert("value".into(), p.value.to_string().into());
                    entry.insert("decimal".into(), p.value.decimal().into());
                    seq.serialize_element(&entry)?;
                }
                seq.end()
            }
        }
        let mut m = serializer.serialize_map(Some(7))?;
        m.serialize_entry("m", &self.m)?;
        m.serialize_entry("variant", self.variant.name())?;
        m.serialize_entry("error", &self.error)?;
        m.serialize_entry("multiplicity", &self.multiplicity.to_string())?;
        m.serialize_entry("chosen_beta", &self.chosen_beta())?;
        m.serialize_entry("points", &Points(&self.points))?;
        m.serialize_entry("families", &self.state.families)?;
        m.end()
    }
}

/// Greedy optimal set of m-means with its exact error.
pub fn build_alpha_m(variant: Variant, m: u64) -> Result<OptimalSetBundle, ConstructionError> {
    build_alpha_m_with(variant, m, &DistortionOptions::default())
}

pub fn build_alpha_m_with(
    variant: Variant,
    m: u64,
    opts: &DistortionOptions,
) -> Result<OptimalSetBundle, ConstructionError> {
    let sys = variant.system();
    let state = optimal_state_with(&sys, m)?;
    let addrs = state.addresses()?;
    let points = QuantizerSet::from_addresses(&addrs, &sys, opts.execution)?;
    let report = distortion(&points, Target::P, &sys, opts)?;
    Ok(OptimalSetBundle {
        variant,
        m,
        points,
        error: report.value,
        family_error: state.total_error(),
        multiplicity: state.multiplicity(),
        beta: state.beta(),
        state,
    })
}

/// Number of optimal sets of m-means produced by the greedy procedure.
pub fn count_optimal_sets(variant: Variant, m: u64) -> Result<BigUint, ConstructionError> {
    Ok(optimal_state(variant, m)?.multiplicity())
}

/// Every optimal set of m-means the procedure allows, when there are at most `limit`.
pub fn all_optimal_sets(
    variant: Variant,
    m: u64,
    limit: u64,
) -> Result<Option<Vec<Vec<Address>>>, ConstructionError> {
    let state = optimal_state(variant, m)?;
    if state.multiplicity() > BigUint::from(limit) {
        return Ok(None);
    }
    let Some(p) = &state.partial else {
        return Ok(Some(vec![state.addresses()?]));
    };
    let size = state.families[p.index].cardinality.to_usize().expect("small family");
    let mut out = Vec::new();
    for combo in combinations(size, p.count as usize) {
        out.push(state.addresses_with(Some(&combo))?);
    }
    Ok(Some(out))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// V_{F(n)} from the closed forms.
pub fn closed_v_f(variant: Variant, n: u32) -> Result<Scalar, ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::ZeroLevel);
    }
    let sys = variant.system();
    let q = Scalar::ratio(2, 75);
    let w = &sys.nu.w;
    let v = &sys.v;
    let n_i = n as i64;
    Ok(match variant {
        Variant::Nu1 => nu1_closed(&sys, n),
        Variant::Nu2 => {
            if n == 1 {
                Scalar::ratio(13057, 4292400)
            } else {
                Scalar::ratio(69071, 6170325) * q.pow(n - 1)
                    - Scalar::ratio(3, 368) * Scalar::ratio(1, 49).pow(n - 1)
            }
        }
        Variant::Nu3 => w * Scalar::ratio(1, 25).pow(n - 1) - Scalar::ratio(164, 45625) * q.pow(n - 1),
        Variant::Nu4 => {
            let w3 = w.mul_rat(&rat(1, 3));
            q.pow(n - 1) * (w3.mul_rat(&int(n_i - 1)) + &q * (&w3 + v))
        }
    })
}

fn nu1_closed(sys: &CondensationSystem, n: u32) -> Scalar {
    let q = Scalar::ratio(2, 75);
    let w3 = sys.nu.w.mul_rat(&rat(1, 3));
    let ninth = Scalar::ratio(1, 9);
    if n % 2 == 1 && n >= 5 {
        let k = n / 2;
        let lead = ninth.pow(3 * k) * Scalar::ratio(79, 7224) * (Scalar::one() - Scalar::ratio(324, 625).pow(k));
        return lead - Scalar::ratio(3571, 44347500) * q.pow(2 * k - 1);
    }
    if n % 2 == 0 && n >= 6 {
        let a = a_of(Regime::Crossing, n as u64).expect("n >= 1") as u32;
        return &w3 * ninth.pow(a) + q * nu1_closed(sys, n - 1);
    }
    // Finite sum for n ≤ 4.
    let mut total = q.pow(n) * &sys.v + q.pow(n - 1) * &w3 * &ninth;
    if n >= 2 {
        total = total + q.pow(n - 2) * &w3 * ninth.pow(2);
    }
    for l in 3..=n {
        let a = a_of(Regime::Crossing, l as u64).expect("l >= 1") as u32;
        total = total + q.pow(n - l) * &w3 * ninth.pow(a);
    }
    total
}

/// (1/3)V_{2^{e(n)}}(ν) + (2/75)V_{F(n−1)}, the one-step error recursion.
pub fn recursive_v_f(variant: Variant, n: u32) -> Result<Scalar, ConstructionError> {
    if n < 2 {
        return Err(ConstructionError::ZeroLevel);
    }
    let sys = variant.system();
    let e = block_exponent(variant.regime(), n as u64).expect("n >= 1");
    let block = sys
        .nu_optimal_error(1u64 << e)
        .expect("dyadic resolution")
        .mul_rat(&rat(1, 3));
    Ok(block + Scalar::ratio(2, 75) * closed_v_f(variant, n - 1)?)
}

/// Σ cardinality · per-element error over SF(n).
pub fn family_v_f(variant: Variant, n: u32) -> Scalar {
    sf(variant, n).iter().map(Family::total_error).sum()
}

/// Serializes a big integer as a decimal string.
pub fn ser_biguint<S: Serializer>(x: &BigUint, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&x.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_means_nu1() {
        let set = build_alpha_f(Variant::Nu1, 1).unwrap();
        assert_eq!(
            set.values(),
            vec![
                Scalar::ratio(1, 10),
                Scalar::ratio(13, 30),
                Scalar::ratio(17, 30),
                Scalar::ratio(9, 10)
            ]
        );
        let set = build_alpha_f(Variant::Nu2, 1).unwrap();
        assert_eq!(set.values()[1], Scalar::ratio(1, 14) + Scalar::ratio(12, 35));
        assert_eq!(build_alpha_f(Variant::Nu1, 2).unwrap().len(), 12);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_v_f(Variant::Nu1, 2).unwrap(), Scalar::ratio(9283, 88695000));
        assert_eq!(closed_v_f(Variant::Nu2, 1).unwrap(), Scalar::ratio(13057, 4292400));
        assert_eq!(closed_v_f(Variant::Nu3, 1).unwrap(), Scalar::ratio(841, 273750));
        assert_eq!(
            closed_v_f(Variant::Nu4, 1).unwrap(),
            "(93298-740√6)/29975625".parse().unwrap()
        );
        for v in Variant::ALL {
            for n in 1..=12 {
                assert_eq!(closed_v_f(v, n).unwrap(), family_v_f(v, n), "{v} n={n}");
            }
        }
    }

    #[test]
    fn split_examples() {
        let sys = Variant::Nu1.system();
        let s0 = Family::new(FamilyKind::Centroids, 1, 1, &sys);
        let split = s0.split(1, &sys);
        assert_eq!(split.len(), 1);
        assert_eq!(split[0].label, "S^(2)(0)");
        assert_eq!(split[0].per_element_error, sys.v2.half().mul_rat(&rat(1, 75)));
        let nb = Family::new(FamilyKind::NuBlock { exponent: 2 }, 0, 3, &sys);
        let next = &nb.split(3, &sys)[0];
        assert_eq!(&next.per_element_error / &nb.per_element_error, Scalar::ratio(1, 18));
        let sys4 = Variant::Nu4.system();
        let nb = Family::new(FamilyKind::NuBlock { exponent: 2 }, 0, 3, &sys4);
        let next = &nb.split(3, &sys4)[0];
        assert_eq!(&next.per_element_error / &nb.per_element_error, Scalar::ratio(1, 75));
    }

    #[test]
    fn known_multiplicities() {
        assert_eq!(count_optimal_sets(Variant::Nu1, 23).unwrap(), BigUint::from(56u32));
        assert_eq!(count_optimal_sets(Variant::Nu1, 31).unwrap(), BigUint::from(4u32));
        for v in Variant::ALL {
            let b = build_alpha_m(v, 3).unwrap();
            assert_eq!(
                b.points.values(),
                vec![Scalar::ratio(1, 10), Scalar::ratio(1, 2), Scalar::ratio(9, 10)]
            );
            assert_eq!(b.multiplicity, BigUint::one());
        }
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
    }
}
