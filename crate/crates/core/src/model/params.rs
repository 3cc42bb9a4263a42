use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exchange symmetry of the two-atom spatial wavefunction.
///
/// `Fermionic` selects antisymmetric spatial states (spin-polarized fermions,
/// or bosons in an antisymmetric spin state); `Bosonic` selects symmetric ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Fermionic,
    Bosonic,
}

impl Symmetry {
    /// Sign picked up under exchange of the two coordinates.
    pub fn exchange_sign(self) -> f64 {
        match self {
            Symmetry::Fermionic => -1.0,
            Symmetry::Bosonic => 1.0,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Symmetry::Fermionic => 0,
            Symmetry::Bosonic => 1,
        }
    }

    pub fn from_u8(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Symmetry::Fermionic),
            1 => Some(Symmetry::Bosonic),
            _ => None,
        }
    }
}

impl std::str::FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fermionic" | "fermion" | "f" => Ok(Symmetry::Fermionic),
            "bosonic" | "boson" | "b" => Ok(Symmetry::Bosonic),
            other => Err(Error::config(
                "symmetry",
                format!("expected `fermionic` or `bosonic`, got `{other}`"),
            )),
        }
    }
}

impl std::fmt::Display for Symmetry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Symmetry::Fermionic => f.write_str("fermionic"),
            Symmetry::Bosonic => f.write_str("bosonic"),
        }
    }
}

/// Dimensionless physical parameters of the two-atom system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Transverse over longitudinal trap frequency, ω_p/ω_x.
    pub omega_ratio: f64,
    /// s-wave scattering length in units of the ground-state width, α·a_s.
    pub scaled_scattering_length: f64,
    pub symmetry: Symmetry,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            omega_ratio: 24.0,
            scaled_scattering_length: 0.0,
            symmetry: Symmetry::Fermionic,
        }
    }
}

impl PhysicalParams {
    pub fn new(
        omega_ratio: f64,
        scaled_scattering_length: f64,
        symmetry: Symmetry,
    ) -> Result<Self> {
        let params = Self {
            omega_ratio,
            scaled_scattering_length,
            symmetry,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_ratio > 0.0 && self.omega_ratio.is_finite()) {
            return Err(Error::config("omega_ratio", "must be positive and finite"));
        }
        if !self.scaled_scattering_length.is_finite() {
            return Err(Error::config("alpha_as", "must be finite"));
        }
        Ok(())
    }
}
