//! Partition of a Liouvillian spectrum into stationary, oscillatory and decaying modes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use super::commensurability::{commensurability, CommensurabilityParams, CommensurabilityVerdict};
use super::eigen::{spectral_scale, DEGENERACY_REL_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumTolerances {
    /// `|Re λ| ≤ tol_re · scale` counts as purely imaginary.
    pub tol_re: f64,
    /// `|λ| ≤ tol_zero · scale` counts as zero.
    pub tol_zero: f64,
}

impl Default for SpectrumTolerances {
    fn default() -> Self {
        Self {
            tol_re: 1e-9,
            tol_zero: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeClass {
    Stationary,
    Oscillatory,
    Decaying,
}

impl ModeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeClass::Stationary => "stationary",
            ModeClass::Oscillatory => "oscillatory",
            ModeClass::Decaying => "decaying",
        }
    }
}

fn finite_or_inf<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str("inf")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub tolerances: SpectrumTolerances,
    /// `max_k |λ_k|`.
    pub scale: f64,
    /// Class of each eigenvalue, aligned with the input order.
    pub classes: Vec<ModeClass>,
    pub stationary: Vec<usize>,
    pub oscillatory: Vec<usize>,
    pub decaying: Vec<usize>,
    /// Smallest decay rate among decaying modes; `+∞` when there are none.
    #[serde(serialize_with = "finite_or_inf")]
    pub gap: f64,
    pub gap_defined: bool,
    /// Distinct signed `Im λ` over oscillatory modes, ascending.
    pub oscillatory_frequencies: Vec<f64>,
    /// Verdict over the oscillatory frequencies; absent when there are none.
    pub commensurability: Option<CommensurabilityVerdict>,
}

/// Sorted values merged when neighbours are within `tol`; each cluster is
/// represented by its mean.
pub(crate) fn cluster_values(values: &[f64], tol: f64) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    for x in v {
        if let Some(&last) = group.last() {
            if x - last > tol {
                out.push(group.iter().sum::<f64>() / group.len() as f64);
                group.clear();
            }
        }
        group.push(x);
    }
    if !group.is_empty() {
        out.push(group.iter().sum::<f64>() / group.len() as f64);
    }
    out
}

pub fn classify(lambdas: &[Complex64], tol: &SpectrumTolerances, comm: &CommensurabilityParams) -> SpectrumReport {
    let scale = spectral_scale(lambdas);
    let zero = tol.tol_zero * scale;
    let flat = tol.tol_re * scale;
    let classes: Vec<ModeClass> = lambdas
        .iter()
        .map(|z| {
            if z.norm() <= zero {
                ModeClass::Stationary
            } else if z.re.abs() <= flat && z.im.abs() > zero {
                ModeClass::Oscillatory
            } else {
                ModeClass::Decaying
            }
        })
        .collect();
    let pick = |c: ModeClass| -> Vec<usize> { (0..classes.len()).filter(|&k| classes[k] == c).collect() };
    let (stationary, oscillatory, decaying) =
        (pick(ModeClass::Stationary), pick(ModeClass::Oscillatory), pick(ModeClass::Decaying));
    let gap = decaying
        .iter()
        .map(|&k| lambdas[k].re.abs())
        .fold(f64::INFINITY, f64::min);
    let ims: Vec<f64> = oscillatory.iter().map(|&k| lambdas[k].im).collect();
    let oscillatory_frequencies = cluster_values(&ims, DEGENERACY_REL_TOL * scale.max(1.0));
    let commensurability = if oscillatory_frequencies.is_empty() {
        None
    } else {
        // Frequencies are nonzero by construction, so only invalid params can fail here.
        commensurability(&oscillatory_frequencies, comm).ok()
    };
    SpectrumReport {
        tolerances: *tol,
        scale,
        classes,
        stationary,
        oscillatory,
        decaying,
        gap,
        gap_defined: gap.is_finite(),
        oscillatory_frequencies,
        commensurability,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{build_liouvillian, spectrum};
    use crate::model::{Model, PresetOptions, ScenarioSpec, ScenarioTag};

    fn report(tag: ScenarioTag, sites: usize, seed: u64) -> SpectrumReport {
        let m = Model::build(&ScenarioSpec::preset(tag, sites, seed, &PresetOptions::default()).unwrap()).unwrap();
        let l = build_liouvillian(&m.hamiltonian, &m.jumps).unwrap();
        classify(&spectrum(&l).unwrap(), &SpectrumTolerances::default(), &CommensurabilityParams::default())
    }

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn partition_of_hand_spectrum() {
        let lambdas = [z(0.0, 0.0), z(0.0, 2.0), z(0.0, -2.0), z(-0.5, 1.0), z(-3.0, 0.0)];
        let r = classify(&lambdas, &SpectrumTolerances::default(), &CommensurabilityParams::default());
        assert_eq!(r.stationary, vec![0]);
        assert_eq!(r.oscillatory, vec![1, 2]);
        assert_eq!(r.decaying, vec![3, 4]);
        assert_eq!(r.gap, 0.5);
        assert_eq!(r.oscillatory_frequencies, vec![-2.0, 2.0]);
        let c = r.commensurability.unwrap();
        assert!(c.commensurable);
        assert_eq!(c.base_frequency, Some(2.0));
    }

    #[test]
    fn closed_has_no_decay_and_infinite_gap() {
        let r = report(ScenarioTag::Closed, 2, 1);
        assert!(r.decaying.is_empty());
        assert!(r.gap.is_infinite() && !r.gap_defined);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["gap"], "inf");
        assert_eq!(r.stationary.len() + r.oscillatory.len(), 256);
    }

    #[test]
    fn loss_gain_two_sites_has_ladder_frequencies() {
        let r = report(ScenarioTag::LossGain, 2, 8);
        let expected = [-4.0, -2.0, 2.0, 4.0];
        assert_eq!(r.oscillatory_frequencies.len(), 4, "{:?}", r.oscillatory_frequencies);
        for (a, b) in r.oscillatory_frequencies.iter().zip(expected) {
            assert!((a - b).abs() < 1e-8);
        }
        let c = r.commensurability.unwrap();
        assert!(c.commensurable);
        assert!((c.base_frequency.unwrap() - 2.0).abs() < 1e-8);
        assert!(r.gap_defined && r.gap > 0.0);
    }

    #[test]
    fn inhomogeneous_field_single_pair() {
        let m = Model::build(&ScenarioSpec::preset(ScenarioTag::InhomField, 2, 5, &PresetOptions::default()).unwrap())
            .unwrap();
        let total = m.spec.params.total_field();
        let l = build_liouvillian(&m.hamiltonian, &m.jumps).unwrap();
        let r = classify(&spectrum(&l).unwrap(), &SpectrumTolerances::default(), &CommensurabilityParams::default());
        assert_eq!(r.oscillatory_frequencies.len(), 2);
        assert!((r.oscillatory_frequencies[1] - total).abs() < 1e-8);
        assert!((r.oscillatory_frequencies[0] + total).abs() < 1e-8);
    }

    #[test]
    fn cluster_merge() {
        assert_eq!(cluster_values(&[1.0, 1.0 + 1e-12, 3.0], 1e-9), vec![1.0 + 5e-13, 3.0]);
        assert!(cluster_values(&[], 1.0).is_empty());
    }
}
