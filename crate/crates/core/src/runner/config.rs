//! Experiment configuration: presets for E1..E10, JSON files and key=value overrides.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Error, Result};
use crate::mesh::Diagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentId {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
    E8,
    E9,
    E10,
    #[serde(rename = "custom")]
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::E1,
        ExperimentId::E2,
        ExperimentId::E3,
        ExperimentId::E4,
        ExperimentId::E5,
        ExperimentId::E6,
        ExperimentId::E7,
        ExperimentId::E8,
        ExperimentId::E9,
        ExperimentId::E10,
    ];
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentId::Custom => f.write_str("custom"),
            other => write!(f, "{other:?}"),
        }
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("custom") {
            return Ok(ExperimentId::Custom);
        }
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid(format!("unknown experiment '{s}', expected E1..E10 or custom")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Poisson,
    AdvectionDiffusion,
}

/// Interface model selection; explicit variants are built from the exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceChoice {
    /// ⟪u′⟫ = 0 and ⟪∇u′⟫ = 0
    None,
    /// Θ from the centred difference of nodal exact values, u′ = 0 at nodes
    DifferenceRule,
    /// Φ, Θ and one-sided u′ from the constrained L² projection
    L2Projection,
    /// Φ, Θ and one-sided u′ from the nodal interpolant
    Interpolant,
    InteriorPenalty,
    /// Upwind advective flux, no diffusive fine-scale data
    Upwind,
    /// Upwind advective flux with difference-rule diffusive data
    UpwindDifferenceRule,
    InteriorPenaltyUpwind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumetricChoice {
    Zero,
    Tau,
    TauGamma,
}

/// Everything needed to set up and run one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub operator: OperatorKind,
    /// Advection velocity.
    pub a: f64,
    /// Diffusivity.
    pub nu: f64,
    /// Forcing expression in x (1-D) or x1, x2 (2-D).
    pub forcing: String,
    /// Exact solution expression; derived from the boundary value problem when absent (1-D, constant forcing).
    pub exact: Option<String>,
    /// Interval end points (1-D).
    pub domain: [f64; 2],
    /// Dirichlet values at the interval end points (1-D).
    pub boundary_values: [f64; 2],
    /// 1 for intervals, 2 for the unit square.
    pub dim: usize,
    /// Elements in 1-D, cells per side in 2-D.
    pub elements: usize,
    pub diagonal: Diagonal,
    pub order: usize,
    pub interface_model: InterfaceChoice,
    pub volumetric_model: VolumetricChoice,
    /// Penalty on interior facets.
    pub eta: f64,
    /// Penalty on boundary facets (2-D).
    pub eta_boundary: f64,
    /// Taylor distance d; for the IP-upwind model it also fixes η.
    pub distance: Option<f64>,
    /// Samples per element in solution.csv (1-D); per edge of a triangle in 2-D.
    pub samples: usize,
}

impl ExperimentConfig {
    /// The preset for an experiment.
    pub fn preset(id: ExperimentId) -> Self {
        let base = ExperimentConfig {
            experiment: id,
            operator: OperatorKind::Poisson,
            a: 0.0,
            nu: 1.0,
            forcing: "0".into(),
            exact: None,
            domain: [0.0, 1.0],
            boundary_values: [0.0, 0.0],
            dim: 1,
            elements: 3,
            diagonal: Diagonal::LowerLeftUpperRight,
            order: 1,
            interface_model: InterfaceChoice::None,
            volumetric_model: VolumetricChoice::Zero,
            eta: 0.0,
            eta_boundary: 0.0,
            distance: None,
            samples: 200,
        };
        let addiff = |a: f64, nu: f64| ExperimentConfig {
            operator: OperatorKind::AdvectionDiffusion,
            a,
            nu,
            forcing: "6".into(),
            boundary_values: [0.0, 2.0],
            ..base.clone()
        };
        let sine = ExperimentConfig {
            forcing: "sin(pi*x)".into(),
            exact: Some("sin(pi*x)/pi^2".into()),
            interface_model: InterfaceChoice::InteriorPenalty,
            ..base.clone()
        };
        match id {
            ExperimentId::E1 => {
                ExperimentConfig { forcing: "2".into(), domain: [0.0, 5.0], boundary_values: [1.0, 3.0], ..base }
            }
            ExperimentId::E2 => ExperimentConfig {
                forcing: "10*(x - x^2)".into(),
                exact: Some("-(5/3)*x^3 + (10/12)*x^4 + (14/15)*x".into()),
                boundary_values: [0.0, 0.1],
                interface_model: InterfaceChoice::DifferenceRule,
                ..base
            },
            ExperimentId::E3 => ExperimentConfig {
                forcing: "10*(x - x^2)".into(),
                exact: Some("-(5/3)*x^3 + (10/12)*x^4 + (241/240)*x".into()),
                domain: [0.0, 1.5],
                boundary_values: [0.0, 0.1],
                interface_model: InterfaceChoice::L2Projection,
                ..base
            },
            ExperimentId::E4 => ExperimentConfig { eta: 2.5, ..sine },
            ExperimentId::E5 => ExperimentConfig { eta: 2.0, ..sine },
            ExperimentId::E6 => ExperimentConfig {
                forcing: "0".into(),
                exact: Some("(cosh(pi*x2) - cosh(pi)/sinh(pi)*sinh(pi*x2))*sin(pi*x1)".into()),
                dim: 2,
                interface_model: InterfaceChoice::InteriorPenalty,
                eta: 3.0,
                eta_boundary: 8.0,
                samples: 20,
                ..base
            },
            ExperimentId::E7 => ExperimentConfig {
                interface_model: InterfaceChoice::DifferenceRule,
                volumetric_model: VolumetricChoice::TauGamma,
                ..addiff(0.5, 0.15)
            },
            ExperimentId::E8 => ExperimentConfig {
                interface_model: InterfaceChoice::L2Projection,
                volumetric_model: VolumetricChoice::TauGamma,
                ..addiff(0.5, 0.15)
            },
            ExperimentId::E9 => ExperimentConfig {
                elements: 10,
                interface_model: InterfaceChoice::DifferenceRule,
                volumetric_model: VolumetricChoice::TauGamma,
                ..addiff(0.5, 0.001)
            },
            ExperimentId::E10 => ExperimentConfig {
                domain: [0.0, 0.9],
                interface_model: InterfaceChoice::InteriorPenaltyUpwind,
                volumetric_model: VolumetricChoice::TauGamma,
                distance: Some(0.1),
                ..addiff(-0.5, 0.15)
            },
            ExperimentId::Custom => ExperimentConfig {
                forcing: "sin(pi*x)".into(),
                exact: Some("sin(pi*x)/pi^2".into()),
                elements: 8,
                interface_model: InterfaceChoice::InteriorPenalty,
                eta: 3.0,
                ..base
            },
        }
    }

    /// Parse a JSON configuration; absent keys fall back to the preset of the named experiment.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| invalid(format!("config is not valid JSON: {e}")))?;
        let obj = value.as_object().ok_or_else(|| invalid("config must be a JSON object"))?;
        let id = match obj.get("experiment") {
            Some(v) => serde_json::from_value::<ExperimentId>(v.clone())
                .map_err(|e| invalid(format!("bad experiment id: {e}")))?,
            None => ExperimentId::Custom,
        };
        let mut cfg = ExperimentConfig::preset(id);
        for (k, v) in obj {
            cfg.set(k, v.clone())?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: serde_json::Value) -> Result<()> {
        let mut current = serde_json::to_value(&*self).map_err(|e| invalid(e.to_string()))?;
        let map = current.as_object_mut().expect("config serializes to an object");
        if !map.contains_key(key) {
            return Err(invalid(format!("unknown config key '{key}'")));
        }
        map.insert(key.to_string(), value);
        *self = serde_json::from_value(current).map_err(|e| invalid(format!("bad value for '{key}': {e}")))?;
        Ok(())
    }

    /// Apply `key=value`; the value is read as JSON, or as a plain string if that fails.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) =
            assignment.split_once('=').ok_or_else(|| invalid(format!("override '{assignment}' is not key=value")))?;
        let raw = raw.trim();
        let value = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        self.set(key.trim(), value)
    }

    /// Reject settings the solvers cannot honour.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.nu, self.eta, self.eta_boundary, self.domain[0], self.domain[1]];
        if finite.iter().any(|v| !v.is_finite()) || self.boundary_values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("numeric parameters must be finite"));
        }
        if self.elements == 0 {
            return Err(invalid("need at least one element"));
        }
        if !(1..=crate::basis::MAX_ORDER).contains(&self.order) {
            return Err(invalid(format!("order must be in 1..={}", crate::basis::MAX_ORDER)));
        }
        if self.samples < 2 {
            return Err(invalid("need at least two samples per element"));
        }
        if self.eta < 0.0 || self.eta_boundary < 0.0 {
            return Err(invalid("penalties must be non-negative"));
        }
        if let Some(d) = self.distance {
            if !(d > 0.0 && d.is_finite()) {
                return Err(invalid("distance must be positive"));
            }
        }
        match self.dim {
            1 => {
                if self.domain[1] <= self.domain[0] {
                    return Err(invalid("domain must be an increasing interval"));
                }
            }
            2 => {
                if self.operator != OperatorKind::Poisson || self.interface_model != InterfaceChoice::InteriorPenalty {
                    return Err(mismatch("2-D runs use the Poisson operator with the interior-penalty model"));
                }
                if self.exact.is_none() {
                    return Err(mismatch("2-D runs need an exact solution, which also supplies the boundary data"));
                }
            }
            d => return Err(invalid(format!("dim must be 1 or 2, got {d}"))),
        }
        let advective = matches!(
            self.interface_model,
            InterfaceChoice::Upwind | InterfaceChoice::UpwindDifferenceRule | InterfaceChoice::InteriorPenaltyUpwind
        );
        match self.operator {
            OperatorKind::Poisson => {
                if advective {
                    return Err(mismatch("upwind interface models need the advection-diffusion operator"));
                }
                if self.volumetric_model != VolumetricChoice::Zero {
                    return Err(mismatch("the residual-based volumetric model belongs to advection-diffusion"));
                }
            }
            OperatorKind::AdvectionDiffusion => {
                if self.nu <= 0.0 {
                    return Err(invalid("diffusivity must be positive"));
                }
                if self.volumetric_model != VolumetricChoice::Zero && self.order != 1 {
                    return Err(mismatch("the residual-based volumetric model is derived for linear elements"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for id in ExperimentId::ALL.into_iter().chain([ExperimentId::Custom]) {
            let cfg = ExperimentConfig::preset(id);
            cfg.validate().unwrap();
            let text = serde_json::to_string(&cfg).unwrap();
            assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
            assert_eq!(id.to_string().parse::<ExperimentId>().unwrap(), id);
        }
        assert!("E11".parse::<ExperimentId>().is_err());
        assert_eq!("e4".parse::<ExperimentId>().unwrap(), ExperimentId::E4);
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::preset(ExperimentId::E4);
        cfg.apply_override("eta=10").unwrap();
        cfg.apply_override("forcing=2*x").unwrap();
        cfg.apply_override("interface_model=\"none\"").unwrap();
        cfg.apply_override("exact=null").unwrap();
        assert_eq!(
            (cfg.eta, cfg.forcing.as_str(), cfg.interface_model, cfg.exact.clone()),
            (10.0, "2*x", InterfaceChoice::None, None)
        );
        assert!(cfg.apply_override("colour=red").is_err());
        assert!(cfg.apply_override("eta=abc").is_err());
        assert!(cfg.apply_override("noequals").is_err());
    }

    #[test]
    fn partial_json_uses_preset() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "E9", "elements": 20}"#).unwrap();
        assert_eq!((cfg.elements, cfg.nu), (20, 0.001));
        assert!(ExperimentConfig::from_json(r#"{"experiment": "E9", "bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json("[1]").is_err());
    }

    #[test]
    fn mismatches_are_reported() {
        let mut cfg = ExperimentConfig::preset(ExperimentId::E1);
        cfg.interface_model = InterfaceChoice::Upwind;
        assert!(matches!(cfg.validate(), Err(Error::ModelMismatch(_))));
        let mut cfg = ExperimentConfig::preset(ExperimentId::E7);
        cfg.order = 2;
        assert!(matches!(cfg.validate(), Err(Error::ModelMismatch(_))));
        let mut cfg = ExperimentConfig::preset(ExperimentId::E6);
        cfg.interface_model = InterfaceChoice::None;
        assert!(matches!(cfg.validate(), Err(Error::ModelMismatch(_))));
    }
}
