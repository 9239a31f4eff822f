use std::path::PathBuf;

use qpc_construction::{ConstructionParams, Mode, Variant};
use qpc_rotation::{cf_expand, CriticalGeometry, RotationNumber};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Continued-fraction depth used when `omega` is given numerically.
const CF_DEPTH: usize = 36;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub construction: ConstructionSection,
    pub gap: GapSection,
    pub schrodinger: SchrodingerSection,
    pub verify: VerifySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub out: PathBuf,
    /// Construction levels beyond the base cocycle.
    pub levels: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructionSection {
    /// `finite:l` or `smooth:a`.
    pub mode: String,
    pub lambda: f64,
    /// `golden` or a number in (0, 1).
    pub omega: String,
    pub c1: f64,
    /// Smallest admissible `q_N`.
    pub q_start: u64,
    pub delta0: f64,
    pub delta1: f64,
    pub amplitude: f64,
    /// `hom` or `nonhom`.
    pub variant: String,
    pub grid_size: usize,
    pub epsilon_desk: f64,
    pub tol_align: f64,
    pub cheb_nodes: usize,
    pub max_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapSection {
    /// `0` selects `K = 10·q_{n+2}` per level.
    pub horizon: usize,
    pub samples: usize,
    pub destruction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchrodingerSection {
    pub grid: usize,
    pub modes: usize,
    pub tol_conj: f64,
    /// Horizon of the direct `L_K(D)` vs `L_K(S_{v,0})` comparison.
    pub check_horizon: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub svd_samples: usize,
    pub deriv_samples: usize,
    pub cancellation_pairs: usize,
    pub decay_blocks: usize,
    pub return_grid: usize,
    pub nonresonance_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_params(&ConstructionParams::desk_finite())
    }
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { out: PathBuf::from("runs/desk"), levels: 3, seed: 1 }
    }
}

impl Default for ConstructionSection {
    fn default() -> Self {
        RunConfig::default().construction
    }
}

impl Default for GapSection {
    fn default() -> Self {
        GapSection { horizon: 0, samples: 400, destruction: true }
    }
}

impl Default for SchrodingerSection {
    fn default() -> Self {
        SchrodingerSection { grid: 1 << 14, modes: 256, tol_conj: 1e-6, check_horizon: 10_000, samples: 400 }
    }
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            svd_samples: 100_000,
            deriv_samples: 10_000,
            cancellation_pairs: 10_000,
            decay_blocks: 1000,
            return_grid: 1_000_000,
            nonresonance_samples: 1_000_000,
        }
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure::config(msg)
}

impl RunConfig {
    /// Config whose construction section reproduces `p` (for golden `ω`).
    pub fn from_params(p: &ConstructionParams) -> Self {
        let golden = p.rot.omega == RotationNumber::golden().omega;
        RunConfig {
            run: RunSection::default(),
            construction: ConstructionSection {
                mode: p.mode.to_string(),
                lambda: p.lambda,
                omega: if golden { "golden".into() } else { format!("{:?}", p.rot.omega) },
                c1: p.geometry.c1,
                q_start: p.q(p.big_n),
                delta0: p.delta0,
                delta1: p.delta1,
                amplitude: p.amplitude,
                variant: p.variant.to_string(),
                grid_size: p.grid_size,
                epsilon_desk: p.epsilon_desk,
                tol_align: p.tol_align,
                cheb_nodes: p.cheb_nodes,
                max_samples: p.max_samples,
            },
            gap: GapSection::default(),
            schrodinger: SchrodingerSection::default(),
            verify: VerifySection::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| config_error(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Canonical text of a config: parse, then serialize.
    pub fn normalize(text: &str) -> Result<String, Failure> {
        Ok(Self::parse(text)?.to_toml())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn mode(&self) -> Result<Mode, Failure> {
        self.construction.mode.parse().map_err(|e| config_error(format!("{e}")))
    }

    pub fn variant(&self) -> Result<Variant, Failure> {
        self.construction.variant.parse().map_err(|e| config_error(format!("{e}")))
    }

    pub fn rotation(&self) -> Result<RotationNumber, Failure> {
        let w = self.construction.omega.trim();
        if w == "golden" {
            return Ok(RotationNumber::golden());
        }
        let omega: f64 = w.parse().map_err(|_| config_error(format!("omega `{w}` is neither `golden` nor a number")))?;
        cf_expand(omega, CF_DEPTH).map_err(|e| config_error(format!("omega: {e}")))
    }

    pub fn params(&self) -> Result<ConstructionParams, Failure> {
        let c = &self.construction;
        let rot = self.rotation()?;
        let base = ConstructionParams::desk_finite();
        let geometry = CriticalGeometry::new(c.c1, &rot);
        let p = ConstructionParams {
            mode: self.mode()?,
            lambda: c.lambda,
            delta0: c.delta0,
            delta1: c.delta1,
            amplitude: c.amplitude,
            variant: self.variant()?,
            grid_size: c.grid_size,
            epsilon_desk: c.epsilon_desk,
            tol_align: c.tol_align,
            cheb_nodes: c.cheb_nodes,
            max_samples: c.max_samples,
            rot: rot.clone(),
            geometry,
            ..base
        }
        .with_rotation(rot, c.c1, c.q_start)
        .map_err(|e| config_error(format!("{e}")))?;
        p.validate().map_err(|e| config_error(format!("{e}")))?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_reproduces_the_desk_parameters() {
        assert_eq!(RunConfig::default().params().unwrap(), ConstructionParams::desk_finite());
        let s = RunConfig::from_params(&ConstructionParams::desk_smooth());
        assert_eq!(s.params().unwrap(), ConstructionParams::desk_smooth());
    }

    #[test]
    fn text_round_trips() {
        let c = RunConfig::default();
        let text = c.to_toml();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
        assert_eq!(RunConfig::normalize(&text).unwrap(), text);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c = RunConfig::parse("[construction]\nlambda = 80.0\n\n[run]\nlevels = 1\n").unwrap();
        assert_eq!(c.construction.lambda, 80.0);
        assert_eq!(c.run.levels, 1);
        assert_eq!(c.construction.mode, "finite:2");
        let norm = RunConfig::normalize("[run]\nlevels = 1\n[construction]\nlambda = 80.0\n").unwrap();
        assert_eq!(norm, c.to_toml());
    }

    #[test]
    fn bad_values_are_configuration_errors() {
        for text in ["[construction]\nmode = \"cubic:3\"\n", "[construction]\nomega = \"0.5\"\n", "[nope]\nx = 1\n", "[construction]\nlambda = 0.5\n"] {
            let err = RunConfig::parse(text).and_then(|c| c.params()).unwrap_err();
            assert_eq!(err.code, crate::EXIT_CONFIG, "{text}");
        }
    }

    #[test]
    fn numeric_omega_is_expanded() {
        let mut c = RunConfig::default();
        c.construction.omega = "0.4142135623730951".into();
        c.construction.q_start = 12;
        let p = c.params().unwrap();
        assert_eq!(p.q(p.big_n), 12);
    }

    const SHIPPED: [(&str, &str); 3] = [
        ("desk", include_str!("../../../configs/desk.toml")),
        ("smooth", include_str!("../../../configs/smooth.toml")),
        ("schrodinger", include_str!("../../../configs/schrodinger.toml")),
    ];

    #[test]
    fn shipped_configs_match_the_presets() {
        let presets =
            [ConstructionParams::desk_finite(), ConstructionParams::desk_smooth(), ConstructionParams::desk_schrodinger()];
        for ((name, text), p) in SHIPPED.iter().zip(presets) {
            assert_eq!(RunConfig::parse(text).unwrap().params().unwrap(), p, "{name}");
            assert_eq!(RunConfig::normalize(text).unwrap(), *text, "{name}");
        }
    }
}
