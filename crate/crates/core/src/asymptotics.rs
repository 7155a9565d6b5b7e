//! Quantization dimension and coefficient along the canonical subsequence F(n).

use num::{BigUint, ToPrimitive};
use serde::Serialize;

use crate::construction::{closed_v_f, ConstructionError};
use crate::exec::Execution;
use crate::model::Variant;
use crate::scalar::Scalar;
use crate::sequences::f_of;

/// κ = 2 log 2 / (log 75 − log 2).
pub fn kappa() -> f64 {
    2.0 * std::f64::consts::LN_2 / (75f64.ln() - std::f64::consts::LN_2)
}

/// β = D(ν): log 2 / (−log r).
pub fn beta(variant: Variant) -> f64 {
    match variant {
        Variant::Nu1 => std::f64::consts::LN_2 / 3f64.ln(),
        Variant::Nu2 => std::f64::consts::LN_2 / 7f64.ln(),
        Variant::Nu3 => std::f64::consts::LN_2 / 5f64.ln(),
        Variant::Nu4 => kappa(),
    }
}

/// D(P) = max(κ, β).
pub fn dimension(variant: Variant) -> f64 {
    kappa().max(beta(variant))
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsRow {
    pub n: u32,
    #[serde(serialize_with = "crate::construction::ser_biguint")]
    pub f_n: BigUint,
    pub v_f_n: Scalar,
    pub dim_estimate: f64,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AsymptoticsError {
    #[error("n_max must be at least {0}")]
    RangeTooSmall(u32),
    #[error("dimension must be positive, got {0}")]
    NonPositiveDimension(f64),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

fn ln_biguint(x: &BigUint) -> f64 {
    match x.to_f64() {
        Some(f) if f.is_finite() => f.ln(),
        _ => {
            let bits = x.bits();
            let shift = bits.saturating_sub(60);
            (x >> shift).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

fn row(variant: Variant, n: u32, d: f64) -> Result<AsymptoticsRow, AsymptoticsError> {
    let f_n = f_of(variant.regime(), n as u64).expect("n >= 1");
    let v = closed_v_f(variant, n)?;
    let ln_f = ln_biguint(&f_n);
    let ln_v = v.ln();
    Ok(AsymptoticsRow {
        n,
        f_n,
        v_f_n: v,
        dim_estimate: 2.0 * ln_f / -ln_v,
        coeff: (2.0 / d * ln_f + ln_v).exp(),
    })
}

fn table(variant: Variant, d: f64, n_max: u32, exec: Execution) -> Result<Vec<AsymptoticsRow>, AsymptoticsError> {
    let ns: Vec<u32> = (1..=n_max).collect();
    exec.map(&ns, |&n| row(variant, n, d)).into_iter().collect()
}

/// Rows n = 1..=n_max with the coefficient taken at d = D(P).
pub fn dimension_table(variant: Variant, n_max: u32) -> Result<Vec<AsymptoticsRow>, AsymptoticsError> {
    dimension_table_with(variant, n_max, Execution::default())
}

pub fn dimension_table_with(
    variant: Variant,
    n_max: u32,
    exec: Execution,
) -> Result<Vec<AsymptoticsRow>, AsymptoticsError> {
    if n_max < 2 {
        return Err(AsymptoticsError::RangeTooSmall(2));
    }
    table(variant, dimension(variant), n_max, exec)
}

/// Rows n = 1..=n_max with coeff = F(n)^{2/d} V_{F(n)}.
pub fn coefficient_table(variant: Variant, d: f64, n_max: u32) -> Result<Vec<AsymptoticsRow>, AsymptoticsError> {
    if !(d > 0.0) {
        return Err(AsymptoticsError::NonPositiveDimension(d));
    }
    if n_max < 1 {
        return Err(AsymptoticsError::RangeTooSmall(1));
    }
    table(variant, d, n_max, Execution::default())
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsequenceLimit {
    pub subsequence: &'static str,
    pub expression: &'static str,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum LimitsReport {
    Finite {
        variant: String,
        beta: f64,
        limits: Vec<SubsequenceLimit>,
        liminf_lower_bound: f64,
        limsup_upper_bound: f64,
    },
    Diverges {
        variant: String,
        dimension: f64,
    },
}

/// Limits of F(n)^{2/β} V_{F(n)} along odd and even n for nu1; the others diverge.
pub fn subsequence_limits(variant: Variant) -> LimitsReport {
    if variant != Variant::Nu1 {
        return LimitsReport::Diverges {
            variant: variant.name().to_string(),
            dimension: dimension(variant),
        };
    }
    let b = beta(variant);
    let odd = 3f64.powf(2.0 / b) * 79.0 / 7224.0;
    let w = variant.system().nu.w.to_f64();
    let even = 8f64.powf(2.0 / b) * (w / 27.0 + 2.0 / 75.0 * 79.0 / 7224.0);
    LimitsReport::Finite {
        variant: variant.name().to_string(),
        beta: b,
        limits: vec![
            SubsequenceLimit {
                subsequence: "odd",
                expression: "3^(2/beta) * 79/7224",
                value: odd,
            },
            SubsequenceLimit {
                subsequence: "even",
                expression: "8^(2/beta) * (W/27 + (2/75)(79/7224))",
                value: even,
            },
        ],
        liminf_lower_bound: odd / 9.0,
        limsup_upper_bound: odd * 9.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_value() {
        assert!((kappa() - 0.382496).abs() < 1e-6);
        assert_eq!(dimension(Variant::Nu2), kappa());
        assert_eq!(dimension(Variant::Nu3), beta(Variant::Nu3));
    }

    #[test]
    fn small_tables() {
        let t = dimension_table(Variant::Nu3, 2).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t[1].dim_estimate.is_finite() && t[1].dim_estimate > 0.0);
        assert!(dimension_table(Variant::Nu1, 1).is_err());
        assert!(coefficient_table(Variant::Nu1, 0.0, 5).is_err());
    }

    #[test]
    fn nu1_limits() {
        match subsequence_limits(Variant::Nu1) {
            LimitsReport::Finite {
                limits,
                liminf_lower_bound,
                limsup_upper_bound,
                ..
            } => {
                assert_ne!(limits[0].value, limits[1].value);
                assert!((limsup_upper_bound / liminf_lower_bound - 81.0).abs() < 1e-9);
            }
            _ => panic!("nu1 has finite limits"),
        }
        assert!(matches!(subsequence_limits(Variant::Nu4), LimitsReport::Diverges { .. }));
    }

    #[test]
    fn large_f_logs() {
        let x = BigUint::from(3u32) << 2000usize;
        let expected = 3f64.ln() + 2000.0 * std::f64::consts::LN_2;
        assert!((ln_biguint(&x) - expected).abs() < 1e-9);
    }
}
