//! Witnesses that a sequence with vanishing steps is not Cauchy.
//!
//! For a scale `ε₀` and each `k`, look for indices `m(k) > n(k) > k` with
//! `d(x_{m(k)}, x_{n(k)}) >= ε₀` and `d(x_{m(k)-1}, x_{n(k)}) < ε₀`: the first
//! time the sequence leaves the `ε₀`-ball around `x_{n(k)}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::distance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessIndex {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    /// `d(x_m, x_n)`, at least `ε₀`.
    pub gap: f64,
    /// `d(x_{m-1}, x_n)`, below `ε₀`.
    pub gap_before: f64,
    /// `d(x_{m-1}, x_{n+1})`.
    pub gap_shifted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyWitness {
    pub eps0: f64,
    pub indices: Vec<WitnessIndex>,
}

impl CauchyWitness {
    /// Largest `|gap - ε₀|` over the three distances tracked at each `k`; the
    /// three sequences approach `ε₀` when the steps vanish.
    pub fn excess(&self) -> Vec<f64> {
        self.indices
            .iter()
            .map(|w| {
                [w.gap, w.gap_before, w.gap_shifted]
                    .iter()
                    .map(|g| (g - self.eps0).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Scans `seq` for `k = 1..=k_max`, taking the smallest `n(k) > k` that has an
/// exit and then its first exit `m(k)`. Returns `None` when no `k` has a
/// witness inside the prefix.
pub fn extract_cauchy_witness(seq: &[f64], eps0: f64, k_max: usize) -> Result<Option<CauchyWitness>> {
    if !(eps0 > 0.0) {
        return Err(Error::InvalidArgument("eps0 must be positive".into()));
    }
    if seq.len() < k_max + 2 {
        return Err(Error::InvalidArgument(format!(
            "prefix of length {} is shorter than k_max + 2 = {}",
            seq.len(),
            k_max + 2
        )));
    }
    let len = seq.len();
    // suffix extrema let an index without any exit be skipped in O(1)
    let mut suffix_max = vec![f64::NEG_INFINITY; len + 1];
    let mut suffix_min = vec![f64::INFINITY; len + 1];
    for i in (0..len).rev() {
        suffix_max[i] = suffix_max[i + 1].max(seq[i]);
        suffix_min[i] = suffix_min[i + 1].min(seq[i]);
    }
    let has_exit = |n: usize| suffix_max[n + 1] - seq[n] >= eps0 || seq[n] - suffix_min[n + 1] >= eps0;
    let first_exit = |n: usize| (n + 1..len).find(|&m| distance(seq[m], seq[n]) >= eps0);

    let mut indices = Vec::new();
    let mut n = 0;
    for k in 1..=k_max {
        n = n.max(k + 1);
        while n < len && !has_exit(n) {
            n += 1;
        }
        let Some(m) = (n < len).then(|| first_exit(n)).flatten() else {
            break;
        };
        indices.push(WitnessIndex {
            k,
            n,
            m,
            gap: distance(seq[m], seq[n]),
            gap_before: distance(seq[m - 1], seq[n]),
            gap_shifted: distance(seq[m - 1], seq[n + 1]),
        });
    }
    Ok((!indices.is_empty()).then_some(CauchyWitness { eps0, indices }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(len: usize) -> Vec<f64> {
        let mut s = 0.0;
        (1..=len)
            .map(|k| {
                s += 1.0 / k as f64;
                s
            })
            .collect()
    }

    #[test]
    fn harmonic_sums_have_witnesses() {
        let seq = harmonic(10_000);
        let w = extract_cauchy_witness(&seq, 0.5, 20).unwrap().unwrap();
        assert_eq!(w.indices.len(), 20);
        for ix in &w.indices {
            assert!(ix.m > ix.n && ix.n > ix.k);
            assert!(ix.gap >= 0.5 && ix.gap_before < 0.5);
        }
        let excess = w.excess();
        assert!(excess.last().unwrap() < &excess[0]);
    }

    #[test]
    fn cauchy_sequences_have_none() {
        assert_eq!(extract_cauchy_witness(&[3.0; 50], 0.1, 10).unwrap(), None);
        let geometric: Vec<f64> = (0..40).map(|n| 8f64.powi(-n) / 16.0).collect();
        assert_eq!(extract_cauchy_witness(&geometric, 0.01, 10).unwrap(), None);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(extract_cauchy_witness(&[0.0; 10], 0.0, 3).is_err());
        assert!(extract_cauchy_witness(&[0.0; 4], 0.1, 3).is_err());
    }
}
