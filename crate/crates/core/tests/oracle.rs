use fracquant::distortion::{distortion_of, QuantizerSet, Target};
use fracquant::oracle::{
    brute_force_cost, discretize, kmeans_dp, lloyd, verify_optimality, AtomicMeasure, OracleError,
    OracleOptions,
};
use fracquant::scalar::rat;
use fracquant::{Scalar, Variant};
use proptest::prelude::*;

fn atoms() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((0.0f64..1.0, 0.01f64..1.0), 2..11).prop_map(|mut pts| {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let (x, m): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        AtomicMeasure::from_parts(x, m)
    })
}

proptest! {
    #[test]
    fn dp_equals_exhaustive(a in atoms(), k in 1usize..5) {
        prop_assume!(k <= a.len());
        let dp = kmeans_dp(&a, k).unwrap();
        let brute = brute_force_cost(&a, k);
        prop_assert!((dp.cost - brute).abs() <= 1e-12, "{} vs {}", dp.cost, brute);
        prop_assert_eq!(dp.breakpoints.len(), k);
    }

    #[test]
    fn lloyd_never_beats_dp(a in atoms(), k in 1usize..5) {
        prop_assume!(k <= a.len());
        let dp = kmeans_dp(&a, k).unwrap();
        let init: Vec<f64> = a.positions.iter().take(k).copied().collect();
        let local = lloyd(&a, &init, 100);
        prop_assert!(local.cost >= dp.cost - 1e-12);
    }

    #[test]
    fn atom_mass_is_one(dp in 1u32..7, dn in 1u32..7, vi in 0usize..4) {
        let v = Variant::ALL[vi];
        let a = discretize(Target::P, &v.system(), dp, dn).unwrap();
        prop_assert_eq!(a.total_mass.clone(), rat(1, 1));
        prop_assert!((a.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(a.positions.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn depth_eight_is_small_enough() {
    let a = discretize(Target::P, &Variant::Nu1.system(), 8, 8).unwrap();
    assert_eq!(a.len(), 65536);
    assert!(a.truncation_variance_bound < 1e-8);
}

#[test]
fn nu_target_atoms() {
    let sys = Variant::Nu3.system();
    let a = discretize(Target::Nu, &sys, 1, 6).unwrap();
    assert_eq!(a.len(), 64);
    let one = kmeans_dp(&a, 1).unwrap();
    let w = sys.nu.w.to_f64();
    assert!((one.cost - w).abs() <= a.truncation_variance_bound + 1e-15);
}

#[test]
fn discretized_distortion_brackets_engine() {
    // For any codebook, the atom distortion is within the truncation bound of the exact one.
    let sys = Variant::Nu2.system();
    let book: Vec<Scalar> = ["1/20", "3/10", "41/100", "1/2", "7/10", "19/20"]
        .iter()
        .map(|x| x.parse().unwrap())
        .collect();
    let vals: Vec<f64> = book.iter().map(Scalar::to_f64).collect();
    let exact = distortion_of(&QuantizerSet::from_values(book).unwrap(), Target::P, &sys)
        .unwrap()
        .value
        .to_f64();
    let a = discretize(Target::P, &sys, 7, 7).unwrap();
    let atom_cost: f64 = a
        .positions
        .iter()
        .zip(&a.masses)
        .map(|(x, m)| m * vals.iter().map(|c| (x - c).powi(2)).fold(f64::INFINITY, f64::min))
        .sum();
    assert!(atom_cost <= exact + 1e-15);
    assert!(exact - atom_cost <= a.truncation_variance_bound + 1e-12);
}

#[test]
fn one_mean_check_passes() {
    for v in Variant::ALL {
        let r = verify_optimality(v, 1, &OracleOptions::default()).unwrap();
        assert!(r.pass, "{v}: {r:?}");
        assert!(r.diff <= r.bound);
    }
}

#[test]
fn guards() {
    let sys = Variant::Nu1.system();
    assert!(matches!(discretize(Target::P, &sys, 14, 14), Err(OracleError::TooManyAtoms(_))));
    assert!(matches!(discretize(Target::P, &sys, 3, 0), Err(OracleError::ZeroDepth)));
}
