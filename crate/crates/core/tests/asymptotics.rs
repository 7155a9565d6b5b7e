use fracquant::asymptotics::{
    beta, coefficient_table, dimension, dimension_table, dimension_table_with, kappa,
    subsequence_limits, LimitsReport,
};
use fracquant::construction::closed_v_f;
use fracquant::sequences::a_of;
use fracquant::{Execution, Scalar, Variant};

#[test]
fn errors_strictly_decrease() {
    for v in Variant::ALL {
        let rows = dimension_table(v, 60).unwrap();
        assert!(rows.windows(2).all(|w| w[1].v_f_n < w[0].v_f_n), "{v}");
        assert!(rows.iter().all(|r| r.dim_estimate.is_finite() && r.dim_estimate > 0.0));
    }
}

#[test]
fn nu1_even_step() {
    let w = Variant::Nu1.system().nu.w;
    for k in 1..=15u32 {
        let a = a_of(Variant::Nu1.regime(), 2 * (k as u64 + 1)).unwrap() as u32;
        let rhs = w.clone() * Scalar::ratio(1, 3) * Scalar::ratio(1, 9).pow(a)
            + Scalar::ratio(2, 75) * closed_v_f(Variant::Nu1, 2 * k + 1).unwrap();
        assert_eq!(closed_v_f(Variant::Nu1, 2 * (k + 1)).unwrap(), rhs, "k={k}");
    }
}

#[test]
fn nu1_subsequences_settle() {
    let rows = coefficient_table(Variant::Nu1, beta(Variant::Nu1), 42).unwrap();
    for parity in [0usize, 1] {
        // rows[i] holds n = i + 1; compare k = 19 with k = 20.
        let idx = |k: usize| 2 * k + parity - 1;
        let (prev, cur) = (rows[idx(19)].coeff, rows[idx(20)].coeff);
        assert!(((cur - prev) / prev).abs() < 0.005, "parity {parity}");
    }
}

#[test]
fn dimension_targets() {
    assert!((kappa() - 0.382496).abs() < 1e-6);
    assert!((dimension(Variant::Nu1) - 0.63093).abs() < 1e-5);
    assert_eq!(dimension(Variant::Nu4), kappa());
    let rows = dimension_table(Variant::Nu1, 25).unwrap();
    assert!((rows[24].dim_estimate - dimension(Variant::Nu1)).abs() < 0.02);
}

#[test]
fn execution_modes_agree() {
    let a = dimension_table_with(Variant::Nu3, 30, Execution::Sequential).unwrap();
    let b = dimension_table_with(Variant::Nu3, 30, Execution::Parallel).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.v_f_n, y.v_f_n);
        assert_eq!(x.dim_estimate, y.dim_estimate);
    }
}

#[test]
fn divergence_signature() {
    for v in [Variant::Nu2, Variant::Nu3, Variant::Nu4] {
        let rows = coefficient_table(v, dimension(v), 40).unwrap();
        assert!(rows[39].coeff > 10.0 * rows[4].coeff, "{v}");
        assert!(matches!(subsequence_limits(v), LimitsReport::Diverges { .. }));
    }
}
