//! Share of non-zero entries in a two-level sparse matrix.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityFraction {
    /// Leading-term value `{1 + 2(p/q)} / m`.
    pub raw: f64,
    /// `raw` clamped to at most 1.
    pub value: f64,
    /// False when the asymptotic formula exceeds 1 and is meaningless for this `m`.
    pub in_regime: bool,
}

/// Leading term, as `m` grows, of the non-zero fraction of a two-level matrix.
pub fn sparsity_fraction(p: usize, q: usize, m: usize) -> Result<SparsityFraction> {
    if p == 0 || q == 0 || m == 0 {
        return Err(Error::InvalidArgument(format!("sparsity needs p, q, m >= 1, got ({p}, {q}, {m})")));
    }
    let raw = (1.0 + 2.0 * (p as f64 / q as f64)) / m as f64;
    Ok(SparsityFraction { raw, value: raw.min(1.0), in_regime: raw <= 1.0 })
}

/// Exact non-zero fraction `(p² + 2pqm + mq²) / (p + qm)²` for dense blocks.
pub fn exact_nonzero_fraction(p: usize, q: usize, m: usize) -> Result<f64> {
    if p == 0 || q == 0 || m == 0 {
        return Err(Error::InvalidArgument(format!("sparsity needs p, q, m >= 1, got ({p}, {q}, {m})")));
    }
    let (p, q, m) = (p as f64, q as f64, m as f64);
    Ok((p * p + 2.0 * p * q * m + m * q * q) / (p + q * m).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longitudinal_case() {
        let s = sparsity_fraction(2, 2, 1000).unwrap();
        assert!((s.raw - 0.003).abs() < 1e-15);
        assert!(s.in_regime);
    }

    #[test]
    fn degenerate_m_is_flagged() {
        let s = sparsity_fraction(1, 1, 1).unwrap();
        assert_eq!(s.raw, 3.0);
        assert_eq!(s.value, 1.0);
        assert!(!s.in_regime);
        assert_eq!(exact_nonzero_fraction(1, 1, 1).unwrap(), 1.0);
    }

    #[test]
    fn exact_versus_leading_term() {
        let s = sparsity_fraction(1, 2, 100).unwrap();
        assert!((s.raw - 0.02).abs() < 1e-15);
        let exact = exact_nonzero_fraction(1, 2, 100).unwrap();
        assert!((exact - 801.0 / 40401.0).abs() < 1e-15);
    }

    #[test]
    fn leading_term_converges() {
        let (p, q, m) = (3, 2, 10_000);
        let approx = sparsity_fraction(p, q, m).unwrap().raw;
        let exact = exact_nonzero_fraction(p, q, m).unwrap();
        assert!((approx - exact).abs() / exact < 1e-2);
    }

    #[test]
    fn zero_dimensions_rejected() {
        assert!(sparsity_fraction(0, 1, 1).is_err());
        assert!(exact_nonzero_fraction(1, 1, 0).is_err());
    }
}
