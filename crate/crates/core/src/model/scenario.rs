//! Parameter sets and scenario presets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper edge of the uniform disorder window for `U_j` and `ε_j`.
pub const DISORDER_MAX: f64 = 3.0;
/// Default uniform magnetic field.
pub const DEFAULT_FIELD: f64 = 2.0;
/// Default half-width of the inhomogeneous field window around [`DEFAULT_FIELD`].
pub const DEFAULT_FIELD_WIDTH: f64 = 0.1;
/// Default strength of the site-1 dephasing channel.
pub const DEFAULT_DEPHASING: f64 = 0.5;

/// Onsite parameters of the disordered Hubbard chain. Hopping is fixed to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubbardParams {
    pub sites: usize,
    /// Onsite interactions `U_j`.
    pub interaction: Vec<f64>,
    /// Onsite potentials `ε_j`.
    pub potential: Vec<f64>,
    /// Magnetic fields `B_j` along z.
    pub field: Vec<f64>,
}

/// How the magnetic field is laid out along the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldProfile {
    Uniform(f64),
    /// `B_j` drawn uniformly from `[center - width, center + width]`.
    Inhomogeneous { center: f64, width: f64 },
}

impl HubbardParams {
    pub fn uniform(sites: usize, interaction: f64, potential: f64, field: f64) -> Self {
        Self {
            sites,
            interaction: vec![interaction; sites],
            potential: vec![potential; sites],
            field: vec![field; sites],
        }
    }

    /// Draws `U_1..U_L`, then `ε_1..ε_L` uniformly from `[0, 3]`, then (for an
    /// inhomogeneous profile) `B_1..B_L`, all from one stream keyed by `seed`.
    pub fn disordered(sites: usize, seed: u64, profile: FieldProfile) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let interaction = (0..sites).map(|_| rng.random_range(0.0..DISORDER_MAX)).collect();
        let potential = (0..sites).map(|_| rng.random_range(0.0..DISORDER_MAX)).collect();
        let field = match profile {
            FieldProfile::Uniform(b) => vec![b; sites],
            FieldProfile::Inhomogeneous { center, width } => (0..sites)
                .map(|_| center - width + 2.0 * width * rng.random::<f64>())
                .collect(),
        };
        Self {
            sites,
            interaction,
            potential,
            field,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("interaction", &self.interaction),
            ("potential", &self.potential),
            ("field", &self.field),
        ] {
            if v.len() != self.sites {
                return Err(Error::Config(format!(
                    "{name} has {} entries for {} sites",
                    v.len(),
                    self.sites
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("{name} contains a non-finite value")));
            }
        }
        Ok(())
    }

    pub fn field_is_uniform(&self) -> bool {
        self.field.windows(2).all(|w| w[0] == w[1])
    }

    /// `Σ_j B_j`.
    pub fn total_field(&self) -> f64 {
        self.field.iter().sum()
    }
}

/// Which of the five model variants a scenario represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioTag {
    Closed,
    Loss,
    LossGain,
    InhomField,
    ThermoBreaker,
}

impl ScenarioTag {
    pub const ALL: [ScenarioTag; 5] = [
        ScenarioTag::Closed,
        ScenarioTag::Loss,
        ScenarioTag::LossGain,
        ScenarioTag::InhomField,
        ScenarioTag::ThermoBreaker,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioTag::Closed => "closed",
            ScenarioTag::Loss => "loss",
            ScenarioTag::LossGain => "loss_gain",
            ScenarioTag::InhomField => "inhom_field",
            ScenarioTag::ThermoBreaker => "thermo_breaker",
        }
    }
}

impl std::fmt::Display for ScenarioTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Operator used by the site-1 dephasing channel.
///
/// The total density `n_1 = n_{1↑} + n_{1↓}` commutes with `S⁺`, so it cannot
/// break the spin raising symmetry; the spin-resolved density `n_{1↑}` does.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingOperator {
    #[default]
    SpinUpDensity,
    TotalDensity,
}

/// One family of Lindblad channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Dissipator {
    /// `γ_j c_{j↓} c_{j↑}` on every site.
    Loss { rates: Vec<f64> },
    /// `Γ_j c†_{j↑} c†_{j↓}` on every site.
    Gain { rates: Vec<f64> },
    /// `μ n_1` (see [`DephasingOperator`]).
    Site1Dephase {
        mu: f64,
        #[serde(default)]
        operator: DephasingOperator,
    },
}

/// A fully determined open-system model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub scenario_tag: ScenarioTag,
    pub disorder_seed: u64,
    pub params: HubbardParams,
    pub dissipators: Vec<Dissipator>,
}

/// Knobs for [`ScenarioSpec::preset`].
#[derive(Clone, Debug, PartialEq)]
pub struct PresetOptions {
    pub field: f64,
    pub field_width: f64,
    pub loss_rate: f64,
    pub gain_rate: f64,
    pub dephasing: f64,
    pub dephasing_operator: DephasingOperator,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self {
            field: DEFAULT_FIELD,
            field_width: DEFAULT_FIELD_WIDTH,
            loss_rate: 1.0,
            gain_rate: 1.0,
            dephasing: DEFAULT_DEPHASING,
            dephasing_operator: DephasingOperator::default(),
        }
    }
}

impl ScenarioSpec {
    /// Builds the canonical scenario for `tag` with disorder drawn from `seed`.
    pub fn preset(tag: ScenarioTag, sites: usize, seed: u64, opts: &PresetOptions) -> Result<Self> {
        let profile = match tag {
            ScenarioTag::InhomField => FieldProfile::Inhomogeneous {
                center: opts.field,
                width: opts.field_width,
            },
            _ => FieldProfile::Uniform(opts.field),
        };
        let params = HubbardParams::disordered(sites, seed, profile);
        let loss = Dissipator::Loss {
            rates: vec![opts.loss_rate; sites],
        };
        let gain = Dissipator::Gain {
            rates: vec![opts.gain_rate; sites],
        };
        let dissipators = match tag {
            ScenarioTag::Closed => vec![],
            ScenarioTag::Loss => vec![loss],
            ScenarioTag::LossGain | ScenarioTag::InhomField => vec![loss, gain],
            ScenarioTag::ThermoBreaker => vec![
                loss,
                gain,
                Dissipator::Site1Dephase {
                    mu: opts.dephasing,
                    operator: opts.dephasing_operator,
                },
            ],
        };
        let spec = Self {
            scenario_tag: tag,
            disorder_seed: seed,
            params,
            dissipators,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the tag/dissipator/field consistency rules and rate positivity.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let sites = self.params.sites;
        let (mut loss, mut gain, mut dephase) = (0, 0, 0);
        for d in &self.dissipators {
            match d {
                Dissipator::Loss { rates } | Dissipator::Gain { rates } => {
                    if rates.len() != sites {
                        return Err(Error::Config(format!(
                            "{} rates for {sites} sites",
                            rates.len()
                        )));
                    }
                    if rates.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
                        return Err(Error::Config("dissipation rates must be strictly positive".into()));
                    }
                    if matches!(d, Dissipator::Loss { .. }) {
                        loss += 1;
                    } else {
                        gain += 1;
                    }
                }
                Dissipator::Site1Dephase { mu, .. } => {
                    if !(*mu > 0.0 && mu.is_finite()) {
                        return Err(Error::Config("dephasing strength must be strictly positive".into()));
                    }
                    dephase += 1;
                }
            }
        }
        let expected = match self.scenario_tag {
            ScenarioTag::Closed => (0, 0, 0),
            ScenarioTag::Loss => (1, 0, 0),
            ScenarioTag::LossGain | ScenarioTag::InhomField => (1, 1, 0),
            ScenarioTag::ThermoBreaker => (1, 1, 1),
        };
        if (loss, gain, dephase) != expected {
            return Err(Error::Config(format!(
                "scenario {} expects (loss, gain, dephasing) channel families {:?}, found {:?}",
                self.scenario_tag,
                expected,
                (loss, gain, dephase)
            )));
        }
        let uniform = self.params.field_is_uniform();
        match (self.scenario_tag, uniform) {
            (ScenarioTag::InhomField, true) if sites > 1 => Err(Error::Config(
                "inhom_field requires a non-constant field profile".into(),
            )),
            (ScenarioTag::InhomField, _) => Ok(()),
            (_, false) => Err(Error::Config(format!(
                "scenario {} requires a uniform field",
                self.scenario_tag
            ))),
            _ => Ok(()),
        }
    }

    /// Parses and validates a scenario file; unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario file: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}
