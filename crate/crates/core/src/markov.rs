// SPDX-License-Identifier: Apache-2.0

//! Closed-form analysis of the two-state chain driven by bidirectional
//! write pulses, and of the XOR of two such chains.

use libm::log2;

use crate::error::{check, Error};
use crate::Result;

/// Per-cycle switching probabilities: `p1` for P→AP, `p2` for AP→P.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlipProbs {
    pub p1: f64,
    pub p2: f64,
}

impl FlipProbs {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        check((0.0..=1.0).contains(&p1), "p1", "must lie in [0, 1]")?;
        check((0.0..=1.0).contains(&p2), "p2", "must lie in [0, 1]")?;
        Ok(Self { p1, p2 })
    }

    pub const FAIR: FlipProbs = FlipProbs { p1: 0.5, p2: 0.5 };
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SteadyState {
    pub p_ap: f64,
    pub p_p: f64,
    pub p_out_1: f64,
    pub p_out_0: f64,
}

/// Stationary distribution. Output 1 is the AP state.
pub fn steady_state(fp: FlipProbs) -> Result<SteadyState> {
    let total = fp.p1 + fp.p2;
    if total <= 0.0 {
        return Err(Error::AbsorbingChain);
    }
    let p_ap = fp.p1 / total;
    let p_p = fp.p2 / total;
    Ok(SteadyState {
        p_ap,
        p_p,
        p_out_1: p_ap,
        p_out_0: p_p,
    })
}

/// Probability that the XOR of two independent bits is 1.
pub fn xor_output_prob(p_a: f64, p_b: f64) -> f64 {
    p_a * (1.0 - p_b) + p_b * (1.0 - p_a)
}

/// Second eigenvalue of the transition matrix, which is the lag-1
/// autocorrelation of the stationary state sequence. Lag k is its k-th power.
pub fn lag1_autocorrelation(fp: FlipProbs) -> Result<f64> {
    if fp.p1 + fp.p2 <= 0.0 {
        return Err(Error::AbsorbingChain);
    }
    Ok(1.0 - fp.p1 - fp.p2)
}

/// Lag-1 autocorrelation of the XOR of two independent copies of the chain.
pub fn xor_lag1_autocorrelation(fp: FlipProbs) -> Result<f64> {
    lag1_autocorrelation(fp).map(|l| l * l)
}

/// Lag-1 autocorrelation of `a XOR b` for independent stationary binary
/// chains with 1-probabilities `p_a`, `p_b` and lag-1 autocorrelations
/// `l_a`, `l_b`. Zero when the output is constant.
pub fn xor_chain_lag1(p_a: f64, l_a: f64, p_b: f64, l_b: f64) -> f64 {
    // In the ±1 encoding the XOR is a product, so its lag-1 moment factors.
    let (m_a, m_b) = (1.0 - 2.0 * p_a, 1.0 - 2.0 * p_b);
    let second = |m: f64, l: f64| m * m + l * (1.0 - m * m);
    let mean_sq = m_a * m_a * m_b * m_b;
    if mean_sq >= 1.0 {
        return 0.0;
    }
    (second(m_a, l_a) * second(m_b, l_b) - mean_sq) / (1.0 - mean_sq)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PredictedEntropy {
    pub p_one: f64,
    pub shannon: f64,
    pub min_entropy: f64,
}

/// Binary Shannon entropy with 0·log 0 = 0.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * log2(x) } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Binary min-entropy.
pub fn binary_min_entropy(p: f64) -> f64 {
    let worst = p.max(1.0 - p);
    if worst >= 1.0 {
        0.0
    } else {
        -log2(worst)
    }
}

/// Marginal entropies of one unit's output, or of the XOR of two identical
/// independent units when `xor_of_two` is set. Serial correlation is ignored.
pub fn predicted_entropy(fp: FlipProbs, xor_of_two: bool) -> Result<PredictedEntropy> {
    let single = steady_state(fp)?.p_out_1;
    let p_one = if xor_of_two {
        xor_output_prob(single, single)
    } else {
        single
    };
    Ok(PredictedEntropy {
        p_one,
        shannon: binary_entropy(p_one),
        min_entropy: binary_min_entropy(p_one),
    })
}

/// Variance inflation of the sample mean of a stationary two-state chain
/// relative to i.i.d. sampling, `(1 + λ) / (1 - λ)` with λ the lag-1
/// autocorrelation.
pub fn mean_variance_inflation(lag1: f64) -> f64 {
    if lag1 >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + lag1) / (1.0 - lag1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fp(p1: f64, p2: f64) -> FlipProbs {
        FlipProbs::new(p1, p2).unwrap()
    }

    #[test]
    fn steady_state_examples() {
        assert_eq!(steady_state(fp(0.5, 0.5)).unwrap().p_out_1, 0.5);
        assert_eq!(steady_state(fp(0.6, 0.6)).unwrap().p_out_1, 0.5);
        let s = steady_state(fp(0.6, 0.4)).unwrap();
        assert!((s.p_out_1 - 0.6).abs() < 1e-15);
        assert!((s.p_out_0 - 0.4).abs() < 1e-15);
        assert_eq!(steady_state(fp(0.0, 0.0)), Err(Error::AbsorbingChain));
    }

    #[test]
    fn steady_state_satisfies_balance_equation() {
        let f = fp(0.37, 0.81);
        let s = steady_state(f).unwrap();
        assert!((s.p_ap - (s.p_ap * (1.0 - f.p2) + s.p_p * f.p1)).abs() < 1e-15);
        assert!((s.p_ap + s.p_p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn xor_examples() {
        for x in [0.0, 0.13, 0.5, 0.99, 1.0] {
            assert!((xor_output_prob(0.5, x) - 0.5).abs() < 1e-15);
        }
        assert!((xor_output_prob(0.6, 0.6) - 0.48).abs() < 1e-15);
        assert!((xor_output_prob(0.45, 0.45) - 0.495).abs() < 1e-15);
    }

    #[test]
    fn autocorrelation_examples() {
        assert_eq!(lag1_autocorrelation(fp(0.5, 0.5)).unwrap(), 0.0);
        assert_eq!(lag1_autocorrelation(fp(1.0, 1.0)).unwrap(), -1.0);
        assert!((lag1_autocorrelation(fp(0.4, 0.4)).unwrap() - 0.2).abs() < 1e-15);
        assert!(lag1_autocorrelation(fp(0.0, 0.0)).is_err());
    }

    #[test]
    fn xor_chain_lag1_reduces_to_square() {
        let l = lag1_autocorrelation(fp(0.3, 0.3)).unwrap();
        assert!(
            (xor_chain_lag1(0.5, l, 0.5, l) - xor_lag1_autocorrelation(fp(0.3, 0.3)).unwrap())
                .abs()
                < 1e-15
        );
        assert_eq!(xor_chain_lag1(0.5, 0.9, 0.5, 0.0), 0.0);
        assert_eq!(xor_chain_lag1(1.0, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn entropy_examples() {
        let e = predicted_entropy(fp(0.5, 0.5), false).unwrap();
        assert_eq!((e.shannon, e.min_entropy), (1.0, 1.0));
        let e = predicted_entropy(fp(0.6, 0.4), false).unwrap();
        assert!((e.shannon - 0.970_950_594).abs() < 1e-8);
        assert!((e.min_entropy - 0.736_965_594).abs() < 1e-8);
        let e = predicted_entropy(fp(0.6, 0.4), true).unwrap();
        assert!((e.p_one - 0.48).abs() < 1e-15);
        assert!((e.min_entropy - 0.943_416_472).abs() < 1e-8);
        assert!(predicted_entropy(fp(0.0, 0.0), true).is_err());
    }

    proptest! {
        #[test]
        fn equal_shifts_keep_output_fair(p in 1e-9f64..=1.0) {
            prop_assert_eq!(steady_state(fp(p, p)).unwrap().p_out_1, 0.5);
        }

        #[test]
        fn xor_pulls_toward_center(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
            let dev = (xor_output_prob(p, q) - 0.5).abs();
            let expected = 2.0 * (p - 0.5).abs() * (q - 0.5).abs();
            prop_assert!((dev - expected).abs() < 1e-12);
            prop_assert!(dev <= (p - 0.5).abs() + 1e-12);
        }

        #[test]
        fn min_entropy_never_exceeds_shannon(p in 0.0f64..=1.0) {
            prop_assert!(binary_min_entropy(p) <= binary_entropy(p) + 1e-12);
        }
    }
}
