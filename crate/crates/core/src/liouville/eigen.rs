//! Dense eigendecomposition of the materialized generator.
//!
//! Right eigenvectors come from `𝓛`, left ones from `𝓛†`. The two lists are
//! paired through clusters of (numerically) equal eigenvalues; inside each
//! cluster the left vectors are recombined with the inverse Gram matrix so
//! that `Tr(σ_k† ρ_k′) = δ_kk′`.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64;

use super::superop::{Liouvillian, MATERIALIZE_MAX_DIM};
use crate::error::{Error, Result};

/// Eigenvalues closer than this (relative to the spectral scale) form a cluster.
pub const DEGENERACY_REL_TOL: f64 = 1e-8;

/// Clusters whose Gram matrix has a reciprocal condition number below this
/// are considered unpaired.
const GRAM_RCOND_MIN: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Eigensystem {
    /// Fock dimension `N`; every eigenmatrix is `N × N`.
    pub dim: usize,
    pub lambdas: Vec<Complex64>,
    /// Right eigenmatrices `ρ_k`, unit Frobenius norm.
    pub rights: Vec<Mat<Complex64>>,
    /// Left eigenmatrices `σ_k` with `Tr(σ_k† ρ_k′) = δ_kk′`.
    pub lefts: Vec<Mat<Complex64>>,
    /// True when cluster pairing failed and the lefts were taken from the
    /// rows of the inverse right-eigenvector matrix instead.
    pub inverse_fallback: bool,
}

impl Eigensystem {
    /// `max_kk′ |Tr(σ_k† ρ_k′) − δ_kk′|`.
    pub fn biorthogonality_residual(&self) -> f64 {
        let n = self.lambdas.len();
        let s = stack(&self.lefts);
        let r = stack(&self.rights);
        let g = s.adjoint() * r;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Largest `|λ_k|`.
    pub fn scale(&self) -> f64 {
        spectral_scale(&self.lambdas)
    }

    /// `ρ(t) = Σ_k e^{λ_k t} Tr(σ_k† ρ0) ρ_k`.
    pub fn propagate(&self, rho0: &Mat<Complex64>, t: f64) -> Result<Mat<Complex64>> {
        if rho0.nrows() != self.dim || rho0.ncols() != self.dim {
            return Err(Error::Shape(format!(
                "{}x{} state for an eigensystem on dim {}",
                rho0.nrows(),
                rho0.ncols(),
                self.dim
            )));
        }
        let mut out = Mat::<Complex64>::zeros(self.dim, self.dim);
        for ((lambda, right), left) in self.lambdas.iter().zip(&self.rights).zip(&self.lefts) {
            let c = hs_inner(left, rho0) * (lambda * t).exp();
            out += right * faer::Scale(c);
        }
        Ok(out)
    }
}

/// `Tr(A† B)`.
pub(crate) fn hs_inner(a: &Mat<Complex64>, b: &Mat<Complex64>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in 0..a.ncols() {
        for (x, y) in a.col_as_slice(c).iter().zip(b.col_as_slice(c)) {
            acc += x.conj() * y;
        }
    }
    acc
}

pub(crate) fn spectral_scale(lambdas: &[Complex64]) -> f64 {
    lambdas.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn stack(mats: &[Mat<Complex64>]) -> Mat<Complex64> {
    let n = mats.first().map_or(0, |m| m.nrows());
    Mat::from_fn(n * n, mats.len(), |i, k| mats[k][(i % n, i / n)])
}

fn reshape(v: faer::ColRef<'_, Complex64>, n: usize) -> Mat<Complex64> {
    Mat::from_fn(n, n, |r, c| v[c * n + r])
}

fn materialize(liouv: &Liouvillian) -> Result<Mat<Complex64>> {
    if liouv.dim() > MATERIALIZE_MAX_DIM {
        return Err(Error::Size(format!(
            "dense Liouvillian spectra need Fock dim <= {MATERIALIZE_MAX_DIM} (at most 3 sites), got {}; \
             use master-equation evolution with DFT probes for larger chains",
            liouv.dim()
        )));
    }
    liouv.matrix()
}

/// Eigenvalues of `𝓛` only.
pub fn spectrum(liouv: &Liouvillian) -> Result<Vec<Complex64>> {
    let m = materialize(liouv)?;
    m.eigenvalues()
        .map_err(|e| Error::Numerical(format!("Liouvillian eigenvalues: {e:?}")))
}

/// Full biorthonormal eigensystem of `𝓛`.
pub fn eigensystem(liouv: &Liouvillian) -> Result<Eigensystem> {
    let n = liouv.dim();
    let m = materialize(liouv)?;
    let right = m
        .eigen()
        .map_err(|e| Error::Numerical(format!("right eigendecomposition: {e:?}")))?;
    let left = m
        .adjoint()
        .to_owned()
        .eigen()
        .map_err(|e| Error::Numerical(format!("left eigendecomposition: {e:?}")))?;

    let nn = n * n;
    let lambdas: Vec<Complex64> = (0..nn).map(|k| right.S()[k]).collect();
    let mus: Vec<Complex64> = (0..nn).map(|k| left.S()[k].conj()).collect();
    let v = right.U().to_owned();
    let w = left.U().to_owned();

    let scale = spectral_scale(&lambdas).max(1.0);
    let tol = DEGENERACY_REL_TOL * scale;

    let (s, inverse_fallback) = match pair_clusters(&lambdas, &mus, tol)
        .and_then(|clusters| biorthonormalize(&v, &w, &clusters))
    {
        Some(s) => (s, false),
        None => (inverse_lefts(&v)?, true),
    };

    Ok(Eigensystem {
        dim: n,
        lambdas,
        rights: (0..nn).map(|k| reshape(v.col(k), n)).collect(),
        lefts: (0..nn).map(|k| reshape(s.col(k), n)).collect(),
        inverse_fallback,
    })
}

/// A cluster of right indices and the left indices it pairs with.
struct Cluster {
    rights: Vec<usize>,
    lefts: Vec<usize>,
}

/// Groups right eigenvalues `lambdas` and conjugated left eigenvalues `mus`
/// into connected components at distance `tol`. `None` if some component has
/// unequal counts on the two sides.
fn pair_clusters(lambdas: &[Complex64], mus: &[Complex64], tol: f64) -> Option<Vec<Cluster>> {
    let points: Vec<Complex64> = lambdas.iter().chain(mus).copied().collect();
    let total = points.len();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| points[a].im.total_cmp(&points[b].im));
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            if points[b].im - points[a].im > tol {
                break;
            }
            if (points[a] - points[b]).norm() <= tol {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    let split = lambdas.len();
    let mut groups: std::collections::BTreeMap<usize, Cluster> = Default::default();
    for i in 0..total {
        let root = find(&mut parent, i);
        let entry = groups.entry(root).or_insert_with(|| Cluster {
            rights: Vec::new(),
            lefts: Vec::new(),
        });
        if i < split {
            entry.rights.push(i);
        } else {
            entry.lefts.push(i - split);
        }
    }
    let clusters: Vec<Cluster> = groups.into_values().collect();
    clusters
        .iter()
        .all(|c| c.rights.len() == c.lefts.len())
        .then_some(clusters)
}

/// Builds `S` with `S† V = I` cluster by cluster: `S_C = W_C (W_C† V_C)^{-†}`.
fn biorthonormalize(v: &Mat<Complex64>, w: &Mat<Complex64>, clusters: &[Cluster]) -> Option<Mat<Complex64>> {
    let mut s = Mat::<Complex64>::zeros(v.nrows(), v.ncols());
    for c in clusters {
        let m = c.rights.len();
        let vc = Mat::from_fn(v.nrows(), m, |i, k| v[(i, c.rights[k])]);
        let wc = Mat::from_fn(w.nrows(), m, |i, k| w[(i, c.lefts[k])]);
        let gram = wc.adjoint() * &vc;
        let sv = gram.singular_values().ok()?;
        let (hi, lo) = (sv[0], sv[m - 1]);
        if !(lo > GRAM_RCOND_MIN * hi) {
            return None;
        }
        let inv = gram.partial_piv_lu().inverse();
        let sc = &wc * inv.adjoint();
        for (k, &col) in c.rights.iter().enumerate() {
            for i in 0..v.nrows() {
                s[(i, col)] = sc[(i, k)];
            }
        }
    }
    Some(s)
}

/// Columns of `V^{-†}`, which satisfy `S† V = I` by construction.
fn inverse_lefts(v: &Mat<Complex64>) -> Result<Mat<Complex64>> {
    let sv = v
        .singular_values()
        .map_err(|e| Error::Numerical(format!("eigenvector conditioning: {e:?}")))?;
    if sv.last().copied().unwrap_or(0.0) <= GRAM_RCOND_MIN * sv[0] {
        return Err(Error::Numerical(
            "Liouvillian is numerically defective; no biorthonormal eigenbasis".into(),
        ));
    }
    Ok(v.partial_piv_lu().inverse().adjoint().to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::build_liouvillian;
    use crate::model::{HubbardParams, Model, PresetOptions, ScenarioSpec, ScenarioTag};
    use crate::qspace::{build_basis, Spin};

    fn liouv(tag: ScenarioTag, sites: usize, seed: u64) -> Liouvillian {
        let m = Model::build(&ScenarioSpec::preset(tag, sites, seed, &PresetOptions::default()).unwrap()).unwrap();
        build_liouvillian(&m.hamiltonian, &m.jumps).unwrap()
    }

    #[test]
    fn single_site_coherence_eigenpair() {
        // L=1, uniform B=2 with loss and gain: |↑⟩⟨↓| is an eigenmatrix with λ = −iB.
        let l = liouv(ScenarioTag::LossGain, 1, 0);
        let b = build_basis(1).unwrap();
        let (up, down) = (b.polarized(Spin::Up), b.polarized(Spin::Down));
        let es = eigensystem(&l).unwrap();
        let target = Complex64::new(0.0, -2.0);
        let k = (0..es.lambdas.len())
            .min_by(|&a, &b| (es.lambdas[a] - target).norm().total_cmp(&(es.lambdas[b] - target).norm()))
            .unwrap();
        assert!((es.lambdas[k] - target).norm() < 1e-10);
        let r = &es.rights[k];
        let phase = r[(up, down)];
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        let mut expected = Mat::<Complex64>::zeros(4, 4);
        expected[(up, down)] = phase;
        assert!((r - expected).norm_max() < 1e-10);
    }

    #[test]
    fn closed_spectrum_is_imaginary_and_conjugation_closed() {
        let l = liouv(ScenarioTag::Closed, 2, 4);
        let es = eigensystem(&l).unwrap();
        let scale = es.scale();
        assert!(es.lambdas.iter().all(|z| z.re.abs() <= 1e-10 * scale));
        for z in &es.lambdas {
            let best = es.lambdas.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9);
        }
    }

    #[test]
    fn biorthonormal_for_every_scenario() {
        for tag in ScenarioTag::ALL {
            let es = eigensystem(&liouv(tag, 2, 3)).unwrap();
            let res = es.biorthogonality_residual();
            assert!(res < 1e-8, "{tag}: {res}");
        }
    }

    #[test]
    fn spectrum_matches_eigensystem() {
        let l = liouv(ScenarioTag::ThermoBreaker, 1, 0);
        let mut a = spectrum(&l).unwrap();
        let mut b = eigensystem(&l).unwrap().lambdas;
        let key = |z: &Complex64, w: &Complex64| z.re.total_cmp(&w.re).then(z.im.total_cmp(&w.im));
        a.sort_by(key);
        b.sort_by(key);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn propagation_preserves_trace() {
        let l = liouv(ScenarioTag::Loss, 1, 0);
        let es = eigensystem(&l).unwrap();
        let mut rho = Mat::<Complex64>::zeros(4, 4);
        rho[(3, 3)] = Complex64::new(1.0, 0.0);
        for t in [0.0, 0.3, 2.0] {
            let r = es.propagate(&rho, t).unwrap();
            let tr: Complex64 = (0..4).map(|i| r[(i, i)]).sum();
            assert!((tr - 1.0).norm() < 1e-10);
        }
        // The pair decays into the vacuum at rate 2γ² = 2: ρ_{↑↓}(t) = e^{−2t}.
        let r = es.propagate(&rho, 1.0).unwrap();
        assert!((r[(3, 3)].re - (-2.0f64).exp()).abs() < 1e-10);
        assert!((r[(0, 0)].re - (1.0 - (-2.0f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn size_cap() {
        let b = build_basis(4).unwrap();
        let h = crate::model::build_hamiltonian(&HubbardParams::uniform(4, 0.0, 0.0, 1.0), &b).unwrap();
        let l = build_liouvillian(&h, &[]).unwrap();
        let err = eigensystem(&l).unwrap_err();
        assert!(matches!(err, Error::Size(_)));
        assert!(err.to_string().contains("evolution"));
        assert!(matches!(spectrum(&l), Err(Error::Size(_))));
    }

    #[test]
    fn unequal_cluster_counts_are_rejected() {
        let z = |re: f64, im: f64| Complex64::new(re, im);
        assert!(pair_clusters(&[z(0.0, 1.0), z(0.0, 1.0)], &[z(0.0, 1.0), z(-1.0, 0.0)], 1e-8).is_none());
        let ok = pair_clusters(&[z(0.0, 1.0), z(-1.0, 0.0)], &[z(-1.0, 0.0), z(0.0, 1.0)], 1e-8).unwrap();
        assert_eq!(ok.len(), 2);
    }
}
