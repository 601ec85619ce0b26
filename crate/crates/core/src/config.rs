//! TOML run configuration.
//!
//! The file mirrors the experiment parameter lists section by section and is
//! converted into a [`ColonyConfig`]. Unknown keys are rejected; type and
//! missing-key errors carry the dotted path of the offending key.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{michaelis_k_from_values, ReporterParams, ResponseFn, SelectionParams, TransportParams};
use crate::colony::{ColonyConfig, InitialPlasmid, MutationTarget, Protocol, Variation};
use crate::error::{BagaError, Result};
use crate::genome::{Recombinase, RecombinationMode};
use crate::problems::{
    Circuit, DetectionKind, KnapsackInstance, Normalization, ProblemKind, ProblemParams, ProblemSpec,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub protocol: ProtocolSection,
    pub circuit: CircuitSection,
    pub sim: SimSection,
    pub detection: DetectionSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: ProblemKind,
    /// `zeros`, `random`, `random_order` or a segment order such as `B,A,C`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_ceiling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    /// Knapsack instance override; the three-item reference instance otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knapsack: Option<KnapsackSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnapsackSection {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub capacity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub variant: Protocol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_target: Option<MutationTarget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_hix: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_accept: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recombination_mode: Option<RecombinationMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invert_segments: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_e: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Linear,
    Hill,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    pub response: ResponseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vmax: Option<f64>,
    /// Hill constant; knapsack problems default to the value-derived K.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_saturation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    pub m: f64,
    pub theta_gfp: f64,
    pub k0: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport: Option<TransportSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSection {
    pub vmax: f64,
    /// Defaults to the value-derived K.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub michaelis: Option<f64>,
    pub inhibitor_k: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub seed: u64,
    pub capacity: usize,
    pub t_max: f64,
    pub sample_dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub rule: DetectionKind,
}

fn required<T: Copy>(v: Option<T>, path: &str) -> Result<T> {
    v.ok_or_else(|| BagaError::config(path, "missing required key"))
}

fn forbid<T>(v: &Option<T>, path: &str, why: &str) -> Result<()> {
    match v {
        Some(_) => Err(BagaError::config(path, why.to_string())),
        None => Ok(()),
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(s).map_err(|e| BagaError::config("<document>", e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            BagaError::config(path, e.into_inner().message().trim().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| BagaError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| BagaError::config("<document>", e.to_string()))
    }

    /// Build and validate the simulation configuration.
    pub fn to_colony(&self) -> Result<ColonyConfig> {
        let kind = self.problem.name;
        let binary = kind != ProblemKind::Hamiltonian3;

        let knapsack = match (&self.problem.knapsack, kind.is_knapsack()) {
            (Some(k), true) => Some(KnapsackInstance {
                values: k.values.clone(),
                weights: k.weights.clone(),
                capacity: k.capacity,
            }),
            (None, true) => Some(KnapsackInstance::reference()),
            (Some(_), false) => {
                return Err(BagaError::config(
                    "problem.knapsack",
                    "only valid for knapsack problems",
                ));
            }
            (None, false) => None,
        };
        if let Some(k) = &knapsack {
            k.validate()
                .map_err(|e| BagaError::config("problem.knapsack", e.to_string()))?;
        }
        let value_k = || -> Result<f64> {
            let k = knapsack
                .as_ref()
                .ok_or_else(|| BagaError::config("circuit", "value-derived K needs a knapsack instance"))?;
            michaelis_k_from_values(&k.values, k.len())
                .map_err(|e| BagaError::config("problem.knapsack", e.to_string()))
        };

        let c = &self.circuit;
        let response = match c.response {
            ResponseKind::Linear => {
                for (v, key) in [
                    (&c.vmax, "vmax"),
                    (&c.half_saturation, "half_saturation"),
                    (&c.exponent, "exponent"),
                ] {
                    forbid(v, &format!("circuit.{key}"), "not a parameter of the linear response")?;
                }
                ResponseFn::Linear {
                    gain: required(c.gain, "circuit.gain")?,
                    scale: required(c.scale, "circuit.scale")?,
                }
            }
            ResponseKind::Hill => {
                forbid(&c.gain, "circuit.gain", "not a parameter of the hill response")?;
                forbid(&c.scale, "circuit.scale", "not a parameter of the hill response")?;
                ResponseFn::Hill {
                    vmax: required(c.vmax, "circuit.vmax")?,
                    half_saturation: match c.half_saturation {
                        Some(h) => h,
                        None if kind.is_knapsack() => value_k()?,
                        None => return Err(BagaError::config("circuit.half_saturation", "missing required key")),
                    },
                    exponent: required(c.exponent, "circuit.exponent")?,
                }
            }
        };
        response
            .validate()
            .map_err(|e| BagaError::config("circuit", e.to_string()))?;

        let transport = match &c.transport {
            Some(t) => {
                let tp = TransportParams {
                    vmax: t.vmax,
                    michaelis: match t.michaelis {
                        Some(m) => m,
                        None => value_k()?,
                    },
                    inhibitor_k: t.inhibitor_k,
                };
                tp.validate()
                    .map_err(|e| BagaError::config("circuit.transport", e.to_string()))?;
                Some(tp)
            }
            None => None,
        };

        let problem = ProblemParams {
            kind,
            circuit: Circuit {
                response,
                transport,
                selection: SelectionParams {
                    k0: c.k0,
                    alpha: c.alpha,
                    beta: c.beta,
                },
                reporter: ReporterParams {
                    m: c.m,
                    theta_gfp: c.theta_gfp,
                    theta_e: None,
                },
            },
            knapsack,
            y_ceiling: self.problem.y_ceiling,
            normalization: self.problem.normalization.unwrap_or(Normalization::None),
            detection: self.detection.rule,
        };

        let p = &self.protocol;
        let variation = if binary {
            for (v, key) in [(&p.p_hix, "p_hix"), (&p.p_accept, "p_accept")] {
                forbid(
                    v,
                    &format!("protocol.{key}"),
                    "recombinase keys need a segmented plasmid",
                )?;
            }
            forbid(
                &p.recombination_mode,
                "protocol.recombination_mode",
                "recombinase keys need a segmented plasmid",
            )?;
            forbid(
                &p.invert_segments,
                "protocol.invert_segments",
                "recombinase keys need a segmented plasmid",
            )?;
            Variation::FlipBit {
                p_m: required(p.p_m, "protocol.p_m")?,
            }
        } else {
            forbid(&p.p_m, "protocol.p_m", "flip-bit mutation needs a binary plasmid")?;
            let mut op = Recombinase::new(required(p.p_hix, "protocol.p_hix")?);
            if let Some(a) = p.p_accept {
                op.p_accept = a;
            }
            if let Some(m) = p.recombination_mode {
                op.mode = m;
            }
            if let Some(inv) = p.invert_segments {
                op.invert_segments = inv;
            }
            Variation::HinHix(op)
        };
        if !p.variant.eugenic() {
            forbid(
                &p.theta_e,
                "protocol.theta_e",
                "only used by the eugenic variants SPE and PE",
            )?;
        }

        let initial = match &self.problem.initial {
            Some(s) => InitialPlasmid::parse(s)?,
            None => ColonyConfig::preset(kind, p.variant, 0).initial,
        };

        let cfg = ColonyConfig {
            problem,
            protocol: p.variant,
            variation,
            mutation_target: p.mutation_target.unwrap_or(MutationTarget::DaughterOnly),
            initial,
            capacity: self.sim.capacity,
            t_max: self.sim.t_max,
            sample_dt: self.sim.sample_dt,
            seed: self.sim.seed,
            theta_e: p.theta_e,
        };
        cfg.validate()?;
        ProblemSpec::new(cfg.effective_problem()).map_err(|e| match e {
            BagaError::Parameter(m) | BagaError::Schema(m) => BagaError::config("circuit", m),
            other => other,
        })?;
        Ok(cfg)
    }

    /// File representation of a simulation configuration.
    pub fn from_colony(cfg: &ColonyConfig) -> Self {
        let circuit = &cfg.problem.circuit;
        let (response, gain, scale, vmax, half_saturation, exponent) = match circuit.response {
            ResponseFn::Linear { gain, scale } => (ResponseKind::Linear, Some(gain), Some(scale), None, None, None),
            ResponseFn::Hill {
                vmax,
                half_saturation,
                exponent,
            } => (
                ResponseKind::Hill,
                None,
                None,
                Some(vmax),
                Some(half_saturation),
                Some(exponent),
            ),
        };
        let (p_m, p_hix, p_accept, recombination_mode, invert_segments) = match cfg.variation {
            Variation::FlipBit { p_m } => (Some(p_m), None, None, None, None),
            Variation::HinHix(op) => (
                None,
                Some(op.p_hix),
                Some(op.p_accept),
                Some(op.mode),
                Some(op.invert_segments),
            ),
        };
        RunConfig {
            problem: ProblemSection {
                name: cfg.problem.kind,
                initial: Some(cfg.initial.label()),
                y_ceiling: cfg.problem.y_ceiling,
                normalization: Some(cfg.problem.normalization),
                knapsack: cfg.problem.knapsack.as_ref().map(|k| KnapsackSection {
                    values: k.values.clone(),
                    weights: k.weights.clone(),
                    capacity: k.capacity,
                }),
            },
            protocol: ProtocolSection {
                variant: cfg.protocol,
                mutation_target: Some(cfg.mutation_target),
                p_m,
                p_hix,
                p_accept,
                recombination_mode,
                invert_segments,
                theta_e: cfg.theta_e,
            },
            circuit: CircuitSection {
                response,
                gain,
                scale,
                vmax,
                half_saturation,
                exponent,
                m: circuit.reporter.m,
                theta_gfp: circuit.reporter.theta_gfp,
                k0: circuit.selection.k0,
                alpha: circuit.selection.alpha,
                beta: circuit.selection.beta,
                transport: circuit.transport.map(|t| TransportSection {
                    vmax: t.vmax,
                    michaelis: Some(t.michaelis),
                    inhibitor_k: t.inhibitor_k,
                }),
            },
            sim: SimSection {
                seed: cfg.seed,
                capacity: cfg.capacity,
                t_max: cfg.t_max,
                sample_dt: cfg.sample_dt,
            },
            detection: DetectionSection {
                rule: cfg.problem.detection,
            },
        }
    }

    /// Apply command-line overrides. A variant switch to a non-eugenic
    /// protocol drops the culling threshold.
    pub fn with_overrides(mut self, seed: Option<u64>, variant: Option<Protocol>) -> Self {
        if let Some(s) = seed {
            self.sim.seed = s;
        }
        if let Some(v) = variant {
            self.protocol.variant = v;
            if !v.eugenic() {
                self.protocol.theta_e = None;
            }
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINE: &str = r#"
[problem]
name = "sine_ratio"
initial = "random"

[protocol]
variant = "SP"
p_m = 0.3

[circuit]
response = "linear"
gain = 10.0
scale = 60.0
m = 150.0
theta_gfp = 149.0
k0 = 0.03
alpha = 0.8
beta = 10.0

[sim]
seed = 1
capacity = 5000
t_max = 3000.0
sample_dt = 1.0

[detection]
rule = "gfp_threshold"
"#;

    #[test]
    fn sine_matches_preset() {
        let rc = RunConfig::from_toml_str(SINE).unwrap();
        let cfg = rc.to_colony().unwrap();
        assert_eq!(cfg, ColonyConfig::preset(ProblemKind::SineRatio, Protocol::SP, 1));
    }

    #[test]
    fn unknown_key_is_rejected_with_path() {
        let bad = SINE.replace("p_m = 0.3", "p_m = 0.3\npm = 1");
        let err = RunConfig::from_toml_str(&bad).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("protocol"), "{msg}");
        assert!(msg.contains("pm"), "{msg}");
    }

    #[test]
    fn missing_key_reports_path() {
        let bad = SINE.replace("k0 = 0.03\n", "");
        let msg = RunConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(msg.contains("circuit") && msg.contains("k0"), "{msg}");
    }

    #[test]
    fn wrong_type_reports_path() {
        let bad = SINE.replace("capacity = 5000", "capacity = \"big\"");
        let msg = RunConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(msg.contains("sim.capacity"), "{msg}");
    }

    #[test]
    fn eugenic_variant_needs_theta_e() {
        let rc = RunConfig::from_toml_str(&SINE.replace("\"SP\"", "\"SPE\"")).unwrap();
        match rc.to_colony().unwrap_err() {
            BagaError::Config { path, .. } => assert_eq!(path, "protocol.theta_e"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn binary_problem_rejects_recombinase_keys() {
        let rc = RunConfig::from_toml_str(&SINE.replace("p_m = 0.3", "p_m = 0.3\np_hix = 0.3")).unwrap();
        assert!(matches!(rc.to_colony(), Err(BagaError::Config { path, .. }) if path == "protocol.p_hix"));
    }

    #[test]
    fn hill_without_constant_outside_knapsack() {
        let src = SINE.replace(
            "response = \"linear\"\ngain = 10.0\nscale = 60.0",
            "response = \"hill\"\nvmax = 1.0\nexponent = 2.0",
        );
        let rc = RunConfig::from_toml_str(&src).unwrap();
        assert!(matches!(rc.to_colony(), Err(BagaError::Config { path, .. }) if path == "circuit.half_saturation"));
    }

    #[test]
    fn overrides() {
        let rc = RunConfig::from_toml_str(SINE)
            .unwrap()
            .with_overrides(Some(9), Some(Protocol::P));
        let cfg = rc.to_colony().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.effective_problem().circuit.selection.alpha, 0.0);
    }

    #[test]
    fn presets_round_trip_through_file_form() {
        for kind in ProblemKind::ALL {
            for protocol in Protocol::ALL {
                let cfg = ColonyConfig::preset(kind, protocol, 7);
                let rc = RunConfig::from_colony(&cfg);
                let text = rc.to_toml_string().unwrap();
                let back = RunConfig::from_toml_str(&text).unwrap();
                assert_eq!(back, rc);
                assert_eq!(back.to_colony().unwrap(), cfg, "{kind} {protocol}");
            }
        }
    }
}
