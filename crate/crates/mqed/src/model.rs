//! Physical constants, unit handling and the atomic model shared by all
//! other modules.
//!
//! The atomic input to every formula in this crate is an [`AtomModel`]: a
//! list of level energies plus a symmetric table of real electric-dipole
//! matrix elements μ^{ℓm}. Constants follow Gaussian-cgs conventions (the
//! mode normalization used throughout is 2πħω/V).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{MqedError, Result};

/// Fundamental constants in Gaussian-cgs units (or dimensionless model units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant ħ (erg·s in cgs, 1 in model units).
    pub hbar: f64,
    /// Speed of light c (cm/s in cgs, 1 in model units).
    pub c: f64,
    /// Elementary charge e (esu in cgs, 1 in model units).
    pub e_charge: f64,
}

impl PhysicalConstants {
    /// Dimensionless model units: ħ = c = e = 1.
    pub fn model_units() -> Self {
        Self { hbar: 1.0, c: 1.0, e_charge: 1.0 }
    }

    /// CODATA values in Gaussian-cgs units.
    pub fn gaussian_cgs() -> Self {
        Self {
            hbar: 1.054_571_817e-27,     // erg s
            c: 2.997_924_58e10,          // cm/s
            e_charge: 4.803_204_712e-10, // esu
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.c > 0.0 && self.e_charge > 0.0) {
            return Err(MqedError::InvalidModel(
                "physical constants must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Exact SI definition of the electronvolt.
pub const EV_IN_JOULE: f64 = 1.602_176_634e-19;
/// One erg in joule (exact).
pub const ERG_IN_JOULE: f64 = 1e-7;

/// Energy unit tags accepted by [`convert_energy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyUnit {
    /// Model units; the scale is fixed by [`UnitSystem::model_energy_joule`].
    Model,
    ElectronVolt,
    Joule,
}

impl std::str::FromStr for EnergyUnit {
    type Err = MqedError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "model" | "model-units" => Ok(Self::Model),
            "ev" | "electronvolt" => Ok(Self::ElectronVolt),
            "j" | "joule" => Ok(Self::Joule),
            other => Err(MqedError::UnknownUnit(other.into())),
        }
    }
}

/// A consistent unit system: the constants record plus the size of one
/// model energy unit. A single `UnitSystem` is used across a computation;
/// mixing systems is the caller's bug, not supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub constants: PhysicalConstants,
    /// One model energy unit expressed in joule.
    pub model_energy_joule: f64,
}

impl UnitSystem {
    /// Model units with the reference energy set to 1 eV.
    pub fn model_ev() -> Self {
        Self { constants: PhysicalConstants::model_units(), model_energy_joule: EV_IN_JOULE }
    }

    pub fn cgs() -> Self {
        Self { constants: PhysicalConstants::gaussian_cgs(), model_energy_joule: ERG_IN_JOULE }
    }
}

/// Exact linear conversion between the supported energy units.
pub fn convert_energy(value: f64, from: EnergyUnit, to: EnergyUnit, system: &UnitSystem) -> f64 {
    let joule = match from {
        EnergyUnit::Model => value * system.model_energy_joule,
        EnergyUnit::ElectronVolt => value * EV_IN_JOULE,
        EnergyUnit::Joule => value,
    };
    match to {
        EnergyUnit::Model => joule / system.model_energy_joule,
        EnergyUnit::ElectronVolt => joule / EV_IN_JOULE,
        EnergyUnit::Joule => joule,
    }
}

/// One atomic level: a label and its unperturbed energy E_ℓ.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub label: String,
    pub energy: f64,
}

/// Atomic level energies and the electric-dipole matrix elements between
/// them. Matrix elements are real 3-vectors (they can be taken real
/// without loss of generality) and the table is symmetric, μ^{ℓm} = μ^{mℓ}.
///
/// Diagonal entries μ^{ℓℓ} may be stored but never enter any second-order
/// formula; [`AtomModel::coupling_dipole`] returns zero for them.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomModel {
    levels: Vec<Level>,
    dipoles: BTreeMap<(usize, usize), Vector3<f64>>,
    ground_index: usize,
}

impl AtomModel {
    /// Build and validate a model. The dipole table may contain either or
    /// both orderings of a pair; when both are present they must agree.
    pub fn new(
        levels: Vec<Level>,
        dipoles: BTreeMap<(usize, usize), Vector3<f64>>,
        ground_index: usize,
    ) -> Result<Self> {
        let model = Self { levels, dipoles, ground_index };
        validate_atom_model(model)
    }

    /// Two-level model: ground at energy 0, excited at `gap`, with a single
    /// transition dipole `mu`.
    pub fn two_level(gap: f64, mu: Vector3<f64>) -> Self {
        let mut dipoles = BTreeMap::new();
        dipoles.insert((0, 1), mu);
        dipoles.insert((1, 0), mu);
        Self {
            levels: vec![
                Level { label: "g".into(), energy: 0.0 },
                Level { label: "e".into(), energy: gap },
            ],
            dipoles,
            ground_index: 0,
        }
    }

    /// Isotropic four-level model: three degenerate excited levels at `gap`,
    /// coupled to the ground state by dipoles of magnitude `mu` along x, y, z.
    /// Its polarizability tensor is `alpha(ω) = 2 gap mu²/(gap²−(ħω)²) · δ_ij`.
    pub fn isotropic(gap: f64, mu: f64) -> Self {
        let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
        let mut levels = vec![Level { label: "g".into(), energy: 0.0 }];
        let mut dipoles = BTreeMap::new();
        for (i, axis) in axes.iter().enumerate() {
            levels.push(Level { label: format!("e{}", i), energy: gap });
            dipoles.insert((0, i + 1), axis * mu);
            dipoles.insert((i + 1, 0), axis * mu);
        }
        Self { levels, dipoles, ground_index: 0 }
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn energy(&self, index: usize) -> f64 {
        self.levels[index].energy
    }

    pub fn label(&self, index: usize) -> &str {
        &self.levels[index].label
    }

    pub fn ground_index(&self) -> usize {
        self.ground_index
    }

    pub fn ground_energy(&self) -> f64 {
        self.levels[self.ground_index].energy
    }

    /// E_ℓ − E_m.
    pub fn transition_energy(&self, l: usize, m: usize) -> f64 {
        self.levels[l].energy - self.levels[m].energy
    }

    /// Dipole matrix element entering the coupling operator. Zero for
    /// diagonal pairs and for pairs absent from the table.
    pub fn coupling_dipole(&self, l: usize, m: usize) -> Vector3<f64> {
        if l == m {
            return Vector3::zeros();
        }
        self.dipoles
            .get(&(l, m))
            .or_else(|| self.dipoles.get(&(m, l)))
            .copied()
            .unwrap_or_else(Vector3::zeros)
    }

    /// Largest level-energy magnitude, used for relative tolerances.
    pub fn energy_scale(&self) -> f64 {
        self.levels.iter().map(|l| l.energy.abs()).fold(0.0, f64::max).max(1e-300)
    }

    /// Uniform scaling of every dipole matrix element by `s`.
    pub fn scale_dipoles(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in out.dipoles.values_mut() {
            *v *= s;
        }
        out
    }

    /// Parse a model from the sectioned plain-text config format.
    ///
    /// ```text
    /// [atom]
    /// ground = 0            # optional, defaults to 0
    ///
    /// [levels]
    /// g = 0.0
    /// e = 1.0
    ///
    /// [dipoles]
    /// g e = 0.0 0.0 1.0     # labels or zero-based indices
    /// ```
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut levels: Vec<Level> = Vec::new();
        let mut dipoles: BTreeMap<(usize, usize), Vector3<f64>> = BTreeMap::new();
        let mut ground_index = 0usize;
        let mut section = String::new();

        let find_level = |levels: &[Level], token: &str| -> Result<usize> {
            if let Some(i) = levels.iter().position(|l| l.label == token) {
                return Ok(i);
            }
            if let Ok(i) = token.parse::<usize>() {
                if i < levels.len() {
                    return Ok(i);
                }
            }
            Err(MqedError::Config(format!("unknown level `{}` in dipole row", token)))
        };

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_ascii_lowercase();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| {
                    MqedError::Config(format!("line {}: expected `key = value`", lineno + 1))
                })?;
            match section.as_str() {
                "atom" => {
                    if key == "ground" {
                        ground_index = value.parse().map_err(|_| {
                            MqedError::Config(format!("line {}: bad ground index", lineno + 1))
                        })?;
                    } else {
                        return Err(MqedError::Config(format!(
                            "line {}: unknown key `{}` in [atom]",
                            lineno + 1,
                            key
                        )));
                    }
                }
                "levels" => {
                    let energy: f64 = value.parse().map_err(|_| {
                        MqedError::Config(format!("line {}: bad level energy", lineno + 1))
                    })?;
                    levels.push(Level { label: key.to_string(), energy });
                }
                "dipoles" => {
                    let mut pair = key.split_whitespace();
                    let (a, b) = match (pair.next(), pair.next(), pair.next()) {
                        (Some(a), Some(b), None) => (a, b),
                        _ => {
                            return Err(MqedError::Config(format!(
                                "line {}: dipole row key must be two level names",
                                lineno + 1
                            )))
                        }
                    };
                    let i = find_level(&levels, a)?;
                    let j = find_level(&levels, b)?;
                    let comps: Vec<f64> = value
                        .split_whitespace()
                        .map(|t| t.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| {
                            MqedError::Config(format!("line {}: bad dipole components", lineno + 1))
                        })?;
                    if comps.len() != 3 {
                        return Err(MqedError::Config(format!(
                            "line {}: dipole rows need exactly 3 components",
                            lineno + 1
                        )));
                    }
                    let key_fwd = (i, j);
                    let key_rev = (j, i);
                    if dipoles.contains_key(&key_fwd) || dipoles.contains_key(&key_rev) {
                        return Err(MqedError::Config(format!(
                            "line {}: duplicate dipole row ({}, {})",
                            lineno + 1,
                            a,
                            b
                        )));
                    }
                    let v = Vector3::new(comps[0], comps[1], comps[2]);
                    dipoles.insert(key_fwd, v);
                    dipoles.insert(key_rev, v);
                }
                other => {
                    return Err(MqedError::Config(format!(
                        "line {}: unknown section `{}`",
                        lineno + 1,
                        other
                    )))
                }
            }
        }
        if levels.is_empty() {
            return Err(MqedError::Config("no [levels] defined".into()));
        }
        Self::new(levels, dipoles, ground_index)
    }

    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_config_str(&std::fs::read_to_string(path)?)
    }
}

/// Check every `AtomModel` invariant, returning the model unchanged when
/// all hold. Idempotent by construction.
pub fn validate_atom_model(model: AtomModel) -> Result<AtomModel> {
    let n = model.levels.len();
    if n == 0 {
        return Err(MqedError::InvalidModel("model has no levels".into()));
    }
    if model.ground_index >= n {
        return Err(MqedError::InvalidModel(format!(
            "ground index {} out of range (only {} levels)",
            model.ground_index, n
        )));
    }
    for level in &model.levels {
        if !level.energy.is_finite() {
            return Err(MqedError::InvalidModel(format!(
                "level `{}` has non-finite energy",
                level.label
            )));
        }
    }
    for w in model.levels.windows(2) {
        if w[1].energy < w[0].energy {
            return Err(MqedError::InvalidModel(format!(
                "level energies must be non-decreasing with index ({} after {})",
                w[1].label, w[0].label
            )));
        }
    }
    let e_ground = model.levels[model.ground_index].energy;
    for (i, level) in model.levels.iter().enumerate() {
        if i != model.ground_index && level.energy <= e_ground {
            return Err(MqedError::InvalidModel(format!(
                "ground level is not strictly minimal (level `{}` has E = {})",
                level.label, level.energy
            )));
        }
    }
    for (&(i, j), v) in &model.dipoles {
        if i >= n || j >= n {
            return Err(MqedError::InvalidModel(format!(
                "dipole entry ({}, {}) out of range",
                i, j
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(MqedError::InvalidModel(format!(
                "dipole entry ({}, {}) has non-finite components",
                i, j
            )));
        }
        if let Some(w) = model.dipoles.get(&(j, i)) {
            if (v - w).norm() > 0.0 {
                return Err(MqedError::InvalidModel(format!(
                    "asymmetric dipoles: mu({}, {}) != mu({}, {})",
                    i, j, j, i
                )));
            }
        }
    }
    Ok(model)
}

/// How an energy shift was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMethod {
    DiscreteSum,
    ContinuumQuadrature,
    Oracle,
}

impl fmt::Display for ShiftMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DiscreteSum => write!(f, "discrete-sum"),
            Self::ContinuumQuadrature => write!(f, "continuum-quadrature"),
            Self::Oracle => write!(f, "oracle"),
        }
    }
}

/// An energy-shift value with its computation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftResult {
    pub value: f64,
    pub method: ShiftMethod,
    /// Estimated relative truncation error, >= 0.
    pub convergence: f64,
    /// Grid / cutoff description.
    pub metadata: String,
}

impl ShiftResult {
    pub fn new(value: f64, method: ShiftMethod, convergence: f64, metadata: String) -> Self {
        debug_assert!(convergence >= 0.0);
        Self { value, method, convergence, metadata }
    }
}
