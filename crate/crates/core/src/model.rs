//! The condensation system, its four ν variants, symbolic addresses and cylinder cells.

use std::fmt;
use std::str::FromStr;

use num::{One, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::scalar::{int, rat, rat_pow, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown variant {0:?} (expected nu1, nu2, nu3 or nu4)")]
    UnknownVariant(String),
    #[error("invalid word {0:?}: letters must be 1 or 2")]
    InvalidWord(String),
    #[error("condensation measure maps violate strong separation: {0}")]
    Separation(String),
    #[error("V_{n}(nu) is only available for powers of two with this variant")]
    UnsupportedResolution { n: u64 },
    #[error("n must be positive")]
    NonPositive,
}

/// x ↦ ratio·x + offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimilarityMap {
    pub ratio: Scalar,
    pub offset: Scalar,
}

impl SimilarityMap {
    pub fn new(ratio: Scalar, offset: Scalar) -> Self {
        SimilarityMap { ratio, offset }
    }

    pub fn identity() -> Self {
        SimilarityMap::new(Scalar::one(), Scalar::zero())
    }

    pub fn apply(&self, x: &Scalar) -> Scalar {
        &self.ratio * x + &self.offset
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SimilarityMap) -> SimilarityMap {
        SimilarityMap::new(&self.ratio * &inner.ratio, self.apply(&inner.offset))
    }

    /// Preimage of a point.
    pub fn invert(&self, y: &Scalar) -> Scalar {
        (y - &self.offset) / &self.ratio
    }

    fn approx(&self) -> (f64, f64) {
        (self.ratio.to_f64(), self.offset.to_f64())
    }
}

/// The four condensation measures ν studied here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Nu1,
    Nu2,
    Nu3,
    Nu4,
}

/// Which pair of canonical sequences governs the optimal sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// ν-ratio 1/3: the ν-blocks interleave with the S-blocks in a two-step pattern.
    Crossing,
    /// ν-ratios 1/7, 1/5, √6/15: one ν-block per level.
    Plain,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Nu1, Variant::Nu2, Variant::Nu3, Variant::Nu4];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Nu1 => "nu1",
            Variant::Nu2 => "nu2",
            Variant::Nu3 => "nu3",
            Variant::Nu4 => "nu4",
        }
    }

    pub fn regime(self) -> Regime {
        match self {
            Variant::Nu1 => Regime::Crossing,
            _ => Regime::Plain,
        }
    }

    /// Contraction ratio r shared by T1 and T2.
    pub fn nu_ratio(self) -> Scalar {
        match self {
            Variant::Nu1 => Scalar::ratio(1, 3),
            Variant::Nu2 => Scalar::ratio(1, 7),
            Variant::Nu3 => Scalar::ratio(1, 5),
            Variant::Nu4 => Scalar::quad(Rational::zero(), rat(1, 15)),
        }
    }

    pub fn system(self) -> CondensationSystem {
        CondensationSystem::new(NuSpec::variant(self))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, ModelError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nu1" | "1" => Ok(Variant::Nu1),
            "nu2" | "2" => Ok(Variant::Nu2),
            "nu3" | "3" => Ok(Variant::Nu3),
            "nu4" | "4" => Ok(Variant::Nu4),
            _ => Err(ModelError::UnknownVariant(s.to_string())),
        }
    }
}

/// The self-similar measure ν = ½ν∘T1⁻¹ + ½ν∘T2⁻¹.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NuSpec {
    /// `None` for a custom pair of maps.
    pub variant: Option<Variant>,
    pub t1: SimilarityMap,
    pub t2: SimilarityMap,
    pub mean: Scalar,
    /// Variance of ν.
    pub w: Scalar,
    /// ratio²/2, the per-element factor gained by one dyadic split.
    pub r2_half: Scalar,
    /// Convex hull of the support, spanned by the fixed points of T1 and T2.
    pub hull: (Scalar, Scalar),
}

impl NuSpec {
    pub fn variant(v: Variant) -> NuSpec {
        let r = v.nu_ratio();
        let two_fifths = Scalar::ratio(2, 5);
        let three_fifths = Scalar::ratio(3, 5);
        let o1 = &two_fifths - &(&r * &two_fifths);
        let o2 = &three_fifths - &(&r * &three_fifths);
        let mut spec = NuSpec::custom(r, o1, o2).expect("registered variants are separated");
        spec.variant = Some(v);
        spec
    }

    /// ν generated by x ↦ r·x + o1 and x ↦ r·x + o2. The support must sit strictly
    /// inside the gap (1/5, 4/5) and the two images must be disjoint.
    pub fn custom(r: Scalar, o1: Scalar, o2: Scalar) -> Result<NuSpec, ModelError> {
        if r <= Scalar::zero() || r >= Scalar::one() {
            return Err(ModelError::Separation("ratio must lie in (0,1)".into()));
        }
        let one_minus = Scalar::one() - &r;
        let p1 = &o1 / &one_minus;
        let p2 = &o2 / &one_minus;
        if !(Scalar::ratio(1, 5) < p1 && p1 < p2 && p2 < Scalar::ratio(4, 5)) {
            return Err(ModelError::Separation(
                "support hull must lie inside (1/5, 4/5)".into(),
            ));
        }
        let t1 = SimilarityMap::new(r.clone(), o1.clone());
        let t2 = SimilarityMap::new(r.clone(), o2.clone());
        if t1.apply(&p2) >= t2.apply(&p1) {
            return Err(ModelError::Separation("T1(L) and T2(L) overlap".into()));
        }
        let (mean, w) = nu_moments_raw(&r, &o1, &o2);
        Ok(NuSpec {
            variant: None,
            t1,
            t2,
            mean,
            w,
            r2_half: r.square().half(),
            hull: (p1, p2),
        })
    }

    pub fn ratio(&self) -> &Scalar {
        &self.t1.ratio
    }

    pub fn map(&self, letter: u8) -> &SimilarityMap {
        if letter == 1 {
            &self.t1
        } else {
            &self.t2
        }
    }
}

fn nu_moments_raw(r: &Scalar, o1: &Scalar, o2: &Scalar) -> (Scalar, Scalar) {
    let osum = o1 + o2;
    let mean = osum.half() / (Scalar::one() - r);
    let second = (r * &mean * &osum + (o1.square() + o2.square()).half())
        / (Scalar::one() - r.square());
    let w = &second - &mean.square();
    (mean, w)
}

/// Mean and variance of ν.
pub fn nu_moments(nu: &NuSpec) -> (Scalar, Scalar) {
    (nu.mean.clone(), nu.w.clone())
}

/// Mean and variance of P, solved from the self-similarity equation.
pub fn p_moments(nu: &NuSpec) -> (Scalar, Scalar) {
    // m = (1/3)(m/5) + (1/3)(m/5 + 4/5) + (1/3)·mean(ν)
    let mean = (Scalar::ratio(4, 15) + nu.mean.mul_rat(&rat(1, 3))) / Scalar::ratio(13, 15);
    // s = (1/3)(s/25) + (1/3)(s/25 + 8m/25 + 16/25) + (1/3)·E_ν[x²]
    let nu_second = &nu.w + &nu.mean.square();
    let rhs = mean.mul_rat(&rat(8, 75)) + Scalar::ratio(16, 75) + nu_second.mul_rat(&rat(1, 3));
    let second = rhs / Scalar::ratio(73, 75);
    let v = &second - &mean.square();
    (mean, v)
}

/// The condensation system ({S1, S2}, (1/3, 1/3, 1/3), ν) together with derived constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CondensationSystem {
    pub s1: SimilarityMap,
    pub s2: SimilarityMap,
    pub nu: NuSpec,
    pub mean: Scalar,
    /// Variance of P.
    pub v: Scalar,
    /// The two points of the symmetric two-means candidate.
    pub two_means: (Scalar, Scalar),
    /// Error of the two-means candidate.
    pub v2: Scalar,
}

impl CondensationSystem {
    pub fn new(nu: NuSpec) -> Self {
        let s1 = SimilarityMap::new(Scalar::ratio(1, 5), Scalar::zero());
        let s2 = SimilarityMap::new(Scalar::ratio(1, 5), Scalar::ratio(4, 5));
        let (mean, v) = p_moments(&nu);
        // Left half: J1 (mass 1/3) and T1(L) (mass 1/6).
        let c_j1 = s1.apply(&mean);
        let c_t1 = nu.t1.apply(&nu.mean);
        let third = rat(1, 3);
        let sixth = rat(1, 6);
        let a1 = c_j1.mul_rat(&rat(2, 3)) + c_t1.mul_rat(&third);
        let j_part = (v.mul_rat(&rat(1, 25)) + (&c_j1 - &a1).square()).mul_rat(&third);
        let t_part = (nu.ratio().square() * &nu.w + (&c_t1 - &a1).square()).mul_rat(&sixth);
        let v2 = (j_part + t_part).mul_rat(&int(2));
        // Reflect through the mean of P for the right-hand point.
        let a2 = mean.mul_rat(&int(2)) - &a1;
        CondensationSystem {
            s1,
            s2,
            nu,
            mean,
            v,
            two_means: (a1, a2),
            v2,
        }
    }

    pub fn variant(&self) -> Option<Variant> {
        self.nu.variant
    }

    pub fn s_map(&self, letter: u8) -> &SimilarityMap {
        if letter == 1 {
            &self.s1
        } else {
            &self.s2
        }
    }

    /// S_ω as a single similarity.
    pub fn s_word(&self, w: &Word) -> SimilarityMap {
        w.0.iter().fold(SimilarityMap::identity(), |acc, &l| {
            acc.compose(self.s_map(l))
        })
    }

    /// T_τ as a single similarity.
    pub fn t_word(&self, w: &Word) -> SimilarityMap {
        w.0.iter().fold(SimilarityMap::identity(), |acc, &l| {
            acc.compose(self.nu.map(l))
        })
    }

    pub fn anchor_value(&self, anchor: &Anchor) -> Scalar {
        match anchor {
            Anchor::Half => self.mean.clone(),
            Anchor::TwoLeft => self.two_means.0.clone(),
            Anchor::TwoRight => self.two_means.1.clone(),
            Anchor::Explicit(x) => x.clone(),
        }
    }

    /// S_ω T_τ(anchor).
    pub fn eval_point(&self, addr: &Address) -> Scalar {
        let x = self.anchor_value(&addr.anchor);
        self.s_word(&addr.s).apply(&self.t_word(&addr.t).apply(&x))
    }

    /// Optimal error V_n(ν) for n means.
    pub fn nu_optimal_error(&self, n: u64) -> Result<Scalar, ModelError> {
        nu_optimal_error(n, &self.nu)
    }
}

/// V_n(ν). Dyadic n uses (r²)^k·W for every variant; other n use the ratio-1/3 formula
/// and are rejected for other ratios.
pub fn nu_optimal_error(n: u64, nu: &NuSpec) -> Result<Scalar, ModelError> {
    if n == 0 {
        return Err(ModelError::NonPositive);
    }
    let l = 63 - n.leading_zeros();
    if n.is_power_of_two() {
        return Ok(nu.ratio().square().pow(l) * &nu.w);
    }
    if nu.ratio() != &Scalar::ratio(1, 3) {
        return Err(ModelError::UnsupportedResolution { n });
    }
    let p = 1u64 << l;
    let bracket = int((2 * p - n) as i64) + rat((n - p) as i64, 9);
    Ok((nu.w.clone()).mul_rat(&(bracket / rat_pow(&int(18), l))))
}

/// A word over {1, 2}.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&self, letter: u8) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    /// All 2^k words of length k in lexicographic order.
    pub fn all(k: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..k {
            out = out
                .iter()
                .flat_map(|w| [w.push(1), w.push(2)])
                .collect();
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Word, ModelError> {
        s.chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(ModelError::InvalidWord(s.to_string())),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Word)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anchor {
    Half,
    TwoLeft,
    TwoRight,
    Explicit(Scalar),
}

/// Symbolic point S_s T_t(anchor).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address {
    pub s: Word,
    pub t: Word,
    pub anchor: Anchor,
}

impl Address {
    pub fn new(s: Word, t: Word, anchor: Anchor) -> Self {
        Address { s, t, anchor }
    }

    pub fn half(s: Word) -> Self {
        Address::new(s, Word::empty(), Anchor::Half)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let anchor = match &self.anchor {
            Anchor::Half => "1/2".to_string(),
            Anchor::TwoLeft => "a1".to_string(),
            Anchor::TwoRight => "a2".to_string(),
            Anchor::Explicit(x) => x.to_string(),
        };
        write!(f, "S[{}]T[{}]({})", self.s, self.t, anchor)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(Some(3))?;
        m.serialize_entry("s", &self.s.to_string())?;
        m.serialize_entry("t", &self.t.to_string())?;
        match &self.anchor {
            Anchor::Half => m.serialize_entry("anchor", "half")?,
            Anchor::TwoLeft => m.serialize_entry("anchor", "two_left")?,
            Anchor::TwoRight => m.serialize_entry("anchor", "two_right")?,
            Anchor::Explicit(x) => {
                let mut inner = std::collections::BTreeMap::new();
                inner.insert("explicit", x);
                m.serialize_entry("anchor", &inner)?
            }
        }
        m.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnchorJson {
    Tag(String),
    Explicit { explicit: Scalar },
}

#[derive(Deserialize)]
struct AddressJson {
    s: String,
    t: String,
    anchor: AnchorJson,
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Address, D::Error> {
        let j = AddressJson::deserialize(deserializer)?;
        let s = j.s.parse().map_err(de::Error::custom)?;
        let t = j.t.parse().map_err(de::Error::custom)?;
        let anchor = match j.anchor {
            AnchorJson::Tag(tag) => match tag.as_str() {
                "half" => Anchor::Half,
                "two_left" => Anchor::TwoLeft,
                "two_right" => Anchor::TwoRight,
                other => return Err(de::Error::custom(format!("unknown anchor {other}"))),
            },
            AnchorJson::Explicit { explicit } => Anchor::Explicit(explicit),
        };
        Ok(Address { s, t, anchor })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    /// J_ω = S_ω([0,1]).
    J,
    /// L_ω = S_ω(L).
    L,
    /// S_ω T_τ(L) with τ non-empty.
    Nu,
}

/// A cylinder set with its mass and the similarity carrying the template onto it.
///
/// J-cells use the template ([0,1], P); L- and ν-cells use (L, ν).
#[derive(Clone, Debug)]
pub struct CylinderCell {
    pub kind: CellKind,
    pub omega: Word,
    pub tau: Word,
    pub map: SimilarityMap,
    pub mass: Rational,
    pub(crate) approx: CellApprox,
}

/// Double-precision shadow of a cell, used only to order work and to prefilter comparisons.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CellApprox {
    pub ratio: f64,
    pub offset: f64,
    pub mass: f64,
}

impl CylinderCell {
    /// J = [0,1] carrying all of P.
    pub fn root_j() -> Self {
        CylinderCell {
            kind: CellKind::J,
            omega: Word::empty(),
            tau: Word::empty(),
            map: SimilarityMap::identity(),
            mass: Rational::one(),
            approx: CellApprox {
                ratio: 1.0,
                offset: 0.0,
                mass: 1.0,
            },
        }
    }

    /// L carrying ν with total mass one.
    pub fn root_nu() -> Self {
        CylinderCell {
            kind: CellKind::L,
            ..CylinderCell::root_j()
        }
    }

    /// J_ω or L_ω inside P.
    pub fn of_word(kind: CellKind, omega: &Word, sys: &CondensationSystem) -> Self {
        let map = sys.s_word(omega);
        let k = omega.len() as u32;
        let mass = match kind {
            CellKind::J => rat_pow(&rat(1, 3), k),
            _ => rat_pow(&rat(1, 3), k + 1),
        };
        let (ratio, offset) = map.approx();
        let mass_f = 3f64.powi(-(k as i32) - if kind == CellKind::J { 0 } else { 1 });
        CylinderCell {
            kind,
            omega: omega.clone(),
            tau: Word::empty(),
            map,
            mass,
            approx: CellApprox {
                ratio,
                offset,
                mass: mass_f,
            },
        }
    }

    /// S_ω T_τ(L) inside P.
    pub fn nu_cell(omega: &Word, tau: &Word, sys: &CondensationSystem) -> Self {
        let mut cell = CylinderCell::of_word(CellKind::L, omega, sys);
        for &l in &tau.0 {
            cell = cell.nu_child(l, sys);
        }
        cell
    }

    pub fn depth(&self) -> usize {
        self.omega.len() + self.tau.len()
    }

    fn template_hull<'a>(&self, sys: &'a CondensationSystem) -> (Scalar, Scalar) {
        match self.kind {
            CellKind::J => (Scalar::zero(), Scalar::one()),
            _ => sys.nu.hull.clone(),
        }
    }

    pub fn hull(&self, sys: &CondensationSystem) -> (Scalar, Scalar) {
        let (lo, hi) = self.template_hull(sys);
        (self.map.apply(&lo), self.map.apply(&hi))
    }

    pub fn scale(&self) -> &Scalar {
        &self.map.ratio
    }

    pub fn centroid(&self, sys: &CondensationSystem) -> Scalar {
        match self.kind {
            CellKind::J => self.map.apply(&sys.mean),
            _ => self.map.apply(&sys.nu.mean),
        }
    }

    /// Variance of the normalised measure on the cell.
    pub fn variance(&self, sys: &CondensationSystem) -> Scalar {
        let template = match self.kind {
            CellKind::J => &sys.v,
            _ => &sys.nu.w,
        };
        self.map.ratio.square() * template
    }

    /// ∫_cell (x − x0)² dP.
    pub fn second_moment_about(&self, x0: &Scalar, sys: &CondensationSystem) -> Scalar {
        let d = self.centroid(sys) - x0;
        (self.variance(sys) + d.square()).mul_rat(&self.mass)
    }

    /// Mass-weighted variance, i.e. the second moment about the centroid.
    pub fn inertia(&self, sys: &CondensationSystem) -> Scalar {
        self.variance(sys).mul_rat(&self.mass)
    }

    fn nu_child(&self, letter: u8, sys: &CondensationSystem) -> CylinderCell {
        let t = sys.nu.map(letter);
        let (tr, to) = t.approx();
        CylinderCell {
            kind: CellKind::Nu,
            omega: self.omega.clone(),
            tau: self.tau.push(letter),
            map: self.map.compose(t),
            mass: &self.mass * rat(1, 2),
            approx: CellApprox {
                ratio: self.approx.ratio * tr,
                offset: self.approx.ratio * to + self.approx.offset,
                mass: self.approx.mass * 0.5,
            },
        }
    }

    fn j_child(&self, kind: CellKind, letter: Option<u8>, sys: &CondensationSystem) -> CylinderCell {
        let (map, omega, approx) = match letter {
            Some(l) => {
                let s = sys.s_map(l);
                let off = if l == 1 { 0.0 } else { 0.8 };
                (
                    self.map.compose(s),
                    self.omega.push(l),
                    CellApprox {
                        ratio: self.approx.ratio * 0.2,
                        offset: self.approx.ratio * off + self.approx.offset,
                        mass: self.approx.mass / 3.0,
                    },
                )
            }
            None => (
                self.map.clone(),
                self.omega.clone(),
                CellApprox {
                    mass: self.approx.mass / 3.0,
                    ..self.approx
                },
            ),
        };
        CylinderCell {
            kind,
            omega,
            tau: Word::empty(),
            map,
            mass: &self.mass * rat(1, 3),
            approx,
        }
    }

    pub fn children(&self, sys: &CondensationSystem) -> Vec<CylinderCell> {
        match self.kind {
            CellKind::J => vec![
                self.j_child(CellKind::J, Some(1), sys),
                self.j_child(CellKind::L, None, sys),
                self.j_child(CellKind::J, Some(2), sys),
            ],
            _ => vec![self.nu_child(1, sys), self.nu_child(2, sys)],
        }
    }

    pub(crate) fn hull_f64(&self, sys_hull: (f64, f64)) -> (f64, f64) {
        let (lo, hi) = match self.kind {
            CellKind::J => (0.0, 1.0),
            _ => sys_hull,
        };
        (
            self.approx.ratio * lo + self.approx.offset,
            self.approx.ratio * hi + self.approx.offset,
        )
    }

    pub(crate) fn approx(&self) -> CellApprox {
        self.approx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Scalar {
        x.parse().unwrap()
    }

    #[test]
    fn registered_moments() {
        let expected = [
            ("1/200", "65/584"),
            ("3/400", "131/1168"),
            ("1/150", "49/438"),
            ("(77-10√6)/7300", "(2413-10√6)/21316"),
        ];
        for (v, (w, vp)) in Variant::ALL.iter().zip(expected) {
            let sys = v.system();
            assert_eq!(sys.nu.mean, Scalar::ratio(1, 2));
            assert_eq!(sys.nu.w, s(w), "{v}");
            assert_eq!(sys.mean, Scalar::ratio(1, 2));
            assert_eq!(sys.v, s(vp), "{v}");
            assert_eq!(sys.nu.hull, (Scalar::ratio(2, 5), Scalar::ratio(3, 5)));
        }
    }

    #[test]
    fn two_means_anchors() {
        let cases = [
            (Variant::Nu1, "19/90", "32929/1182600"),
            (Variant::Nu2, "43/210", "321827/12877200"),
            (Variant::Nu3, "31/150", "21211/821250"),
            (Variant::Nu4, "(90+√6)/450", "(155430√6+4167521)/179853750"),
        ];
        for (v, a1, v2) in cases {
            let sys = v.system();
            assert_eq!(sys.two_means.0, s(a1), "{v}");
            assert_eq!(&sys.two_means.0 + &sys.two_means.1, Scalar::one());
            assert_eq!(sys.v2, s(v2), "{v}");
        }
    }

    #[test]
    fn eval_point_examples() {
        let nu1 = Variant::Nu1.system();
        let a = Address::new(Word::empty(), "1".parse().unwrap(), Anchor::Half);
        assert_eq!(nu1.eval_point(&a), Scalar::ratio(13, 30));
        assert_eq!(nu1.eval_point(&Address::half("1".parse().unwrap())), Scalar::ratio(1, 10));
        let nu2 = Variant::Nu2.system();
        let a = Address::new(Word::empty(), Word::empty(), Anchor::TwoLeft);
        assert_eq!(nu2.eval_point(&a), Scalar::ratio(43, 210));
    }

    #[test]
    fn second_moment_examples() {
        let sys = Variant::Nu1.system();
        let j1 = CylinderCell::of_word(CellKind::J, &"1".parse().unwrap(), &sys);
        assert_eq!(j1.second_moment_about(&Scalar::ratio(1, 10), &sys), Scalar::ratio(13, 8760));
        let l = CylinderCell::of_word(CellKind::L, &Word::empty(), &sys);
        assert_eq!(l.second_moment_about(&Scalar::ratio(1, 2), &sys), Scalar::ratio(1, 600));
        assert_eq!(l.second_moment_about(&Scalar::ratio(2, 5), &sys), Scalar::ratio(1, 200));
    }

    #[test]
    fn children_examples() {
        let sys = Variant::Nu1.system();
        let masses: Vec<_> = CylinderCell::root_j()
            .children(&sys)
            .iter()
            .map(|c| c.mass.clone())
            .collect();
        assert_eq!(masses, vec![rat(1, 3); 3]);
        let l = CylinderCell::of_word(CellKind::L, &Word::empty(), &sys);
        assert!(l.children(&sys).iter().all(|c| c.mass == rat(1, 6)));
        let n1 = CylinderCell::nu_cell(&Word::empty(), &"1".parse().unwrap(), &sys);
        for c in n1.children(&sys) {
            let (lo, hi) = c.hull(&sys);
            assert_eq!(hi - lo, Scalar::ratio(1, 45));
        }
        let kids = n1.children(&sys);
        assert_eq!(kids[0].hull(&sys).0, Scalar::ratio(2, 5));
        assert_eq!(kids[0].tau, "11".parse().unwrap());
    }

    #[test]
    fn nu_errors() {
        let nu1 = Variant::Nu1.system();
        assert_eq!(nu1.nu_optimal_error(3).unwrap(), Scalar::ratio(1, 3240));
        assert_eq!(nu1.nu_optimal_error(8).unwrap(), Scalar::ratio(1, 200 * 729));
        let nu4 = Variant::Nu4.system();
        assert_eq!(nu4.nu_optimal_error(2).unwrap(), Scalar::ratio(2, 75) * &nu4.nu.w);
        assert_eq!(
            nu4.nu_optimal_error(3),
            Err(ModelError::UnsupportedResolution { n: 3 })
        );
        assert_eq!(nu1.nu_optimal_error(0), Err(ModelError::NonPositive));
    }

    #[test]
    fn custom_rejects_overlap() {
        let r = Scalar::ratio(3, 5);
        let o1 = Scalar::ratio(2, 5) - &r * Scalar::ratio(2, 5);
        let o2 = Scalar::ratio(3, 5) - &r * Scalar::ratio(3, 5);
        assert!(NuSpec::custom(r, o1, o2).is_err());
    }

    #[test]
    fn address_json() {
        let a = Address::new("121".parse().unwrap(), "21".parse().unwrap(), Anchor::TwoRight);
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(text, r#"{"s":"121","t":"21","anchor":"two_right"}"#);
        let back: Address = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
        let e = Address::new(Word::empty(), Word::empty(), Anchor::Explicit(Scalar::ratio(1, 3)));
        let back: Address = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }
}
