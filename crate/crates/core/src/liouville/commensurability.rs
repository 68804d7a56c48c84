//! Rational-dependence test for a set of oscillation frequencies.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommensurabilityParams {
    /// Largest denominator accepted for `ω_k / ω_min`.
    pub max_den: u64,
    /// Relative error allowed in each rational approximation.
    pub rel_tol: f64,
    /// Experimental time horizon.
    pub t_exp: f64,
}

impl Default for CommensurabilityParams {
    fn default() -> Self {
        Self {
            max_den: 1000,
            rel_tol: 1e-8,
            t_exp: 1000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommensurabilityVerdict {
    /// Distinct positive frequencies that were tested, ascending.
    pub frequencies: Vec<f64>,
    pub commensurable: bool,
    pub base_frequency: Option<f64>,
    /// `ω_k ≈ n_k ω₀`, aligned with `frequencies`; empty when not commensurable.
    pub integer_multipliers: Vec<u64>,
    pub fundamental_period: Option<f64>,
    pub effectively_incommensurable: bool,
    /// Some pair of neighbouring frequencies is closer than `2π / T_exp`.
    pub dense_flag: bool,
}

/// Smallest-denominator `p/q` with `q ≤ max_den` and `|x − p/q| ≤ tol`,
/// walking convergents and intermediate fractions in order of denominator.
pub fn rational_approximation(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    if !(x.is_finite() && x >= 0.0) {
        return None;
    }
    // h/k are the last two convergents: (h1/k1) older, (h2/k2) newer.
    let (mut h1, mut k1, mut h2, mut k2) = (0u64, 1u64, 1u64, 0u64);
    let mut rest = x;
    loop {
        let a = rest.floor();
        if a > u64::MAX as f64 / 2.0 {
            return None;
        }
        let a = a as u64;
        // On the first step every candidate has q = 1 and only j = a can be closest.
        let first = if k2 == 0 { a.max(1) } else { 1 };
        for j in first..=a {
            let (Some(p), Some(q)) = (
                j.checked_mul(h2).and_then(|v| v.checked_add(h1)),
                j.checked_mul(k2).and_then(|v| v.checked_add(k1)),
            ) else {
                return None;
            };
            if q > max_den {
                return None;
            }
            if q > 0 && (x - p as f64 / q as f64).abs() <= tol {
                return Some((p, q));
            }
        }
        let h = a * h2 + h1;
        let k = a * k2 + k1;
        (h1, k1, h2, k2) = (h2, k2, h, k);
        let frac = rest - a as f64;
        if frac <= f64::EPSILON * rest.max(1.0) {
            // Exact convergent reached; it failed the tolerance only if x is not representable.
            return (k2 > 0 && k2 <= max_den && (x - h2 as f64 / k2 as f64).abs() <= tol).then_some((h2, k2));
        }
        rest = 1.0 / frac;
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Positive representatives of `freqs`, sorted and merged at relative distance `rel_tol`.
fn distinct_positive(freqs: &[f64], rel_tol: f64) -> Vec<f64> {
    let mut v: Vec<f64> = freqs.iter().map(|w| w.abs()).collect();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for w in v {
        match out.last() {
            Some(&last) if w - last <= rel_tol * w => {}
            _ => out.push(w),
        }
    }
    out
}

pub fn commensurability(freqs: &[f64], params: &CommensurabilityParams) -> Result<CommensurabilityVerdict> {
    if freqs.is_empty() {
        return Err(Error::Argument("commensurability needs at least one frequency".into()));
    }
    if let Some(w) = freqs.iter().find(|w| !(w.is_finite() && **w != 0.0)) {
        return Err(Error::Argument(format!("frequency {w} is not a nonzero finite number")));
    }
    if !(params.max_den >= 1 && params.rel_tol > 0.0 && params.t_exp > 0.0) {
        return Err(Error::Argument(format!("invalid commensurability parameters {params:?}")));
    }
    let frequencies = distinct_positive(freqs, params.rel_tol);
    let dense_flag = frequencies.windows(2).any(|p| p[1] - p[0] < 2.0 * PI / params.t_exp);
    let w_min = frequencies[0];

    let fit = (|| {
        let ratios: Vec<(u64, u64)> = frequencies
            .iter()
            .map(|w| {
                let x = w / w_min;
                rational_approximation(x, params.max_den, params.rel_tol * x)
            })
            .collect::<Option<_>>()?;
        let mut lcm: u64 = 1;
        for &(_, q) in &ratios {
            lcm = (lcm / gcd(lcm, q)).checked_mul(q)?;
        }
        let scaled: Vec<u64> = ratios
            .iter()
            .map(|&(p, q)| p.checked_mul(lcm / q))
            .collect::<Option<_>>()?;
        let g = scaled.iter().copied().fold(0, gcd);
        let mult: Vec<u64> = scaled.iter().map(|n| n / g).collect();
        // Least-squares base frequency for ω_k ≈ n_k ω₀.
        let num: f64 = mult.iter().zip(&frequencies).map(|(&n, w)| n as f64 * w).sum();
        let den: f64 = mult.iter().map(|&n| (n as f64).powi(2)).sum();
        let base = num / den;
        let consistent = mult
            .iter()
            .zip(&frequencies)
            .all(|(&n, w)| (w - n as f64 * base).abs() <= 2.0 * params.rel_tol * w);
        consistent.then_some((base, mult))
    })();

    Ok(match fit {
        Some((base, mult)) => {
            let period = 2.0 * PI / base;
            CommensurabilityVerdict {
                frequencies,
                commensurable: true,
                base_frequency: Some(base),
                integer_multipliers: mult,
                fundamental_period: Some(period),
                effectively_incommensurable: period > params.t_exp,
                dense_flag,
            }
        }
        None => CommensurabilityVerdict {
            frequencies,
            commensurable: false,
            base_frequency: None,
            integer_multipliers: Vec::new(),
            fundamental_period: None,
            effectively_incommensurable: true,
            dense_flag,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(max_den: u64, rel_tol: f64) -> CommensurabilityParams {
        CommensurabilityParams {
            max_den,
            rel_tol,
            t_exp: 1000.0,
        }
    }

    #[test]
    fn integer_set() {
        let v = commensurability(&[1.0, 2.0, 3.0, -2.0], &CommensurabilityParams::default()).unwrap();
        assert!(v.commensurable);
        assert_eq!(v.frequencies, vec![1.0, 2.0, 3.0]);
        assert!((v.base_frequency.unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(v.integer_multipliers, vec![1, 2, 3]);
        assert!((v.fundamental_period.unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!(!v.effectively_incommensurable);
        assert!(!v.dense_flag);
    }

    #[test]
    fn exact_rationals() {
        let v = commensurability(&[0.5, 1.25], &CommensurabilityParams::default()).unwrap();
        assert!(v.commensurable);
        assert!((v.base_frequency.unwrap() - 0.25).abs() < 1e-14);
        assert_eq!(v.integer_multipliers, vec![2, 5]);
    }

    #[test]
    fn sqrt_two_is_rejected() {
        let (cap, tol) = (10_000u64, 1e-9);
        // Independent oracle: no p/q with q ≤ cap approximates √2 to the relative tolerance.
        let r = 2f64.sqrt();
        let best = (1..=cap)
            .map(|q| {
                let p = (q as f64 * r).round();
                (r - p / q as f64).abs() / r
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best > tol);
        let v = commensurability(&[1.0, r], &params(cap, tol)).unwrap();
        assert!(!v.commensurable);
        assert!(v.effectively_incommensurable);
        assert!(v.base_frequency.is_none());
    }

    #[test]
    fn long_period_is_effectively_incommensurable() {
        // Base 1/997 gives a period of ~6264 > T_exp.
        let v = commensurability(&[1.0, 1.0 + 1.0 / 997.0], &CommensurabilityParams::default()).unwrap();
        assert!(v.commensurable);
        assert!(v.fundamental_period.unwrap() > 1000.0);
        assert!(v.effectively_incommensurable);
        assert!(v.dense_flag);
    }

    #[test]
    fn rejects_bad_input() {
        let p = CommensurabilityParams::default();
        assert!(matches!(commensurability(&[], &p), Err(Error::Argument(_))));
        assert!(matches!(commensurability(&[1.0, 0.0], &p), Err(Error::Argument(_))));
        assert!(matches!(commensurability(&[f64::NAN], &p), Err(Error::Argument(_))));
    }

    #[test]
    fn smallest_denominator_wins() {
        // 2 + 1e-12 is within tolerance of 2/1; a larger-denominator fit must not be chosen.
        assert_eq!(rational_approximation(2.0 + 1e-12, 1000, 1e-8), Some((2, 1)));
        assert_eq!(rational_approximation(0.75, 1000, 1e-12), Some((3, 4)));
        assert_eq!(rational_approximation(PI, 1000, 1e-6), Some((355, 113)));
        assert_eq!(rational_approximation(PI, 100, 1e-6), None);
    }

    proptest! {
        #[test]
        fn integer_multiples_recover_base(base in 0.01f64..10.0, ns in proptest::collection::vec(1u64..40, 1..6)) {
            let freqs: Vec<f64> = ns.iter().map(|&n| n as f64 * base).collect();
            let v = commensurability(&freqs, &CommensurabilityParams::default()).unwrap();
            prop_assert!(v.commensurable);
            let g = ns.iter().copied().fold(0, gcd);
            let w0 = v.base_frequency.unwrap();
            prop_assert!((w0 - g as f64 * base).abs() <= 1e-9 * base);
            for (w, n) in v.frequencies.iter().zip(&v.integer_multipliers) {
                prop_assert!((w - *n as f64 * w0).abs() <= 1e-8 * w);
            }
        }
    }
}
