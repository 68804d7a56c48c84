use num_complex::Complex64;

use super::scenario::{DephasingOperator, Dissipator, HubbardParams, ScenarioSpec};
use crate::error::{Error, Result};
use crate::qspace::{FockBasis, SparseOperator, Spin};

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_sites(basis: &FockBasis, sites: usize) -> Result<()> {
    if basis.sites() != sites {
        return Err(Error::Config(format!(
            "basis built for {} sites, parameters describe {sites}",
            basis.sites()
        )));
    }
    Ok(())
}

/// Open-chain Hubbard Hamiltonian
///
/// `H = −Σ_{i<L,s} (c†_{i,s} c_{i+1,s} + h.c.) + Σ_j [U_j n_{j↑} n_{j↓} + ε_j n_j + (B_j/2)(n_{j↑} − n_{j↓})]`.
pub fn build_hamiltonian(p: &HubbardParams, basis: &FockBasis) -> Result<SparseOperator> {
    p.validate()?;
    check_sites(basis, p.sites)?;
    let mut h = SparseOperator::zeros(basis.dim());
    for i in 1..p.sites {
        for spin in [Spin::Up, Spin::Down] {
            let hop = basis
                .creator(i, spin)?
                .multiply(&basis.annihilator(i + 1, spin)?)?;
            h = h.sub(&hop.add(&hop.adjoint())?)?;
        }
    }
    // Onsite terms are diagonal: accumulate them directly.
    let diag: Vec<Complex64> = (0..basis.dim())
        .map(|s| {
            let mut e = 0.0;
            for j in 0..p.sites {
                let up = (s >> (2 * j) & 1) as f64;
                let down = (s >> (2 * j + 1) & 1) as f64;
                e += p.interaction[j] * up * down
                    + p.potential[j] * (up + down)
                    + 0.5 * p.field[j] * (up - down);
            }
            real(e)
        })
        .collect();
    h.add(&SparseOperator::diagonal(&diag))
}

/// Total and per-site spin operators.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    /// `Σ_j (n_{j↑} − n_{j↓})`.
    pub s_z: SparseOperator,
    /// `Σ_j c†_{j↑} c_{j↓}`.
    pub s_plus: SparseOperator,
    pub s_minus: SparseOperator,
    /// `S^x_j = ½(c†_{j↑}c_{j↓} + c†_{j↓}c_{j↑})`, index `j − 1`.
    pub s_x: Vec<SparseOperator>,
}

impl SpinOperators {
    /// Transverse spin on a 1-based site.
    pub fn s_x(&self, site: usize) -> Result<&SparseOperator> {
        site.checked_sub(1)
            .and_then(|j| self.s_x.get(j))
            .ok_or_else(|| Error::Index(format!("site {site} outside 1..={}", self.s_x.len())))
    }
}

/// Site-resolved spin flip `c†_{j↑} c_{j↓}`.
pub fn spin_raise(basis: &FockBasis, site: usize) -> Result<SparseOperator> {
    basis
        .creator(site, Spin::Up)?
        .multiply(&basis.annihilator(site, Spin::Down)?)
}

pub fn spin_operators(basis: &FockBasis) -> Result<SpinOperators> {
    let dim = basis.dim();
    let mut s_z = SparseOperator::zeros(dim);
    let mut s_plus = SparseOperator::zeros(dim);
    let mut s_x = Vec::with_capacity(basis.sites());
    for j in 1..=basis.sites() {
        let n = basis.number_ops(j)?;
        s_z = s_z.add(&n.up.sub(&n.down)?)?;
        let raise = spin_raise(basis, j)?;
        s_plus = s_plus.add(&raise)?;
        s_x.push(raise.add(&raise.adjoint())?.scale_real(0.5));
    }
    let s_minus = s_plus.adjoint();
    Ok(SpinOperators {
        s_z,
        s_plus,
        s_minus,
        s_x,
    })
}

/// `η⁻_j = c_{j↓} c_{j↑}`.
pub fn eta_minus(basis: &FockBasis, site: usize) -> Result<SparseOperator> {
    basis
        .annihilator(site, Spin::Down)?
        .multiply(&basis.annihilator(site, Spin::Up)?)
}

/// `η⁺_j = c†_{j↑} c†_{j↓} = (η⁻_j)†`.
pub fn eta_plus(basis: &FockBasis, site: usize) -> Result<SparseOperator> {
    Ok(eta_minus(basis, site)?.adjoint())
}

/// Jump operators in deterministic order: losses by site, gains by site,
/// then the dephasing channel. Rates multiply the operator as amplitudes.
pub fn build_jump_operators(spec: &ScenarioSpec, basis: &FockBasis) -> Result<Vec<SparseOperator>> {
    spec.validate()?;
    check_sites(basis, spec.params.sites)?;
    let mut losses = Vec::new();
    let mut gains = Vec::new();
    let mut dephasers = Vec::new();
    for d in &spec.dissipators {
        match d {
            Dissipator::Loss { rates } => {
                for (j, &g) in rates.iter().enumerate() {
                    losses.push(eta_minus(basis, j + 1)?.scale_real(g));
                }
            }
            Dissipator::Gain { rates } => {
                for (j, &g) in rates.iter().enumerate() {
                    gains.push(eta_plus(basis, j + 1)?.scale_real(g));
                }
            }
            Dissipator::Site1Dephase { mu, operator } => {
                let n = basis.number_ops(1)?;
                let op = match operator {
                    DephasingOperator::SpinUpDensity => n.up,
                    DephasingOperator::TotalDensity => n.total,
                };
                dephasers.push(op.scale_real(*mu));
            }
        }
    }
    losses.extend(gains);
    losses.extend(dephasers);
    Ok(losses)
}

/// Hamiltonian and jump operators of a scenario on its own basis.
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: ScenarioSpec,
    pub basis: FockBasis,
    pub hamiltonian: SparseOperator,
    pub jumps: Vec<SparseOperator>,
    pub spins: SpinOperators,
}

impl Model {
    pub fn build(spec: &ScenarioSpec) -> Result<Self> {
        spec.validate()?;
        let basis = FockBasis::new(spec.params.sites)?;
        let hamiltonian = build_hamiltonian(&spec.params, &basis)?;
        let jumps = build_jump_operators(spec, &basis)?;
        let spins = spin_operators(&basis)?;
        Ok(Self {
            spec: spec.clone(),
            basis,
            hamiltonian,
            jumps,
            spins,
        })
    }
}
