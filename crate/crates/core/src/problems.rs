//! Benchmark problems: objective, plasmid-to-inducer mapping, feasibility and
//! optimal-cell detection, each paired with an exhaustive oracle.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::{
    clamp_concentration, michaelis_k_from_values, transport_velocity, ReporterParams, ResponseFn, SelectionParams,
    TransportParams,
};
use crate::error::{BagaError, Result};
use crate::genome::{all_segment_orders, Fluorescence, Plasmid, Schema};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    SineRatio,
    Booth,
    KnapsackStandard,
    KnapsackImproved,
    Hamiltonian3,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::SineRatio,
        ProblemKind::Booth,
        ProblemKind::KnapsackStandard,
        ProblemKind::KnapsackImproved,
        ProblemKind::Hamiltonian3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::SineRatio => "sine_ratio",
            ProblemKind::Booth => "booth",
            ProblemKind::KnapsackStandard => "knapsack_standard",
            ProblemKind::KnapsackImproved => "knapsack_improved",
            ProblemKind::Hamiltonian3 => "hamiltonian3",
        }
    }

    pub fn is_knapsack(self) -> bool {
        matches!(self, ProblemKind::KnapsackStandard | ProblemKind::KnapsackImproved)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = BagaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knapsack" => Ok(ProblemKind::KnapsackStandard),
            "hamiltonian" => Ok(ProblemKind::Hamiltonian3),
            _ => ProblemKind::ALL
                .into_iter()
                .find(|k| k.name() == s)
                .ok_or_else(|| BagaError::config("problem.name", format!("unknown problem `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Maximize,
    Minimize,
}

/// `y = (x - 5) / (2 + sin x)` on the 4-bit domain 0..=15.
pub fn eval_sine_ratio(x: u64) -> Result<f64> {
    if x > 15 {
        return Err(BagaError::param(format!("x={x} outside 0..=15")));
    }
    let x = x as f64;
    Ok((x - 5.0) / (2.0 + x.sin()))
}

/// Booth function on the 3-bit grid 0..=7 per variable.
pub fn eval_booth(x1: u64, x2: u64) -> Result<f64> {
    if x1 > 7 || x2 > 7 {
        return Err(BagaError::param(format!("({x1}, {x2}) outside 0..=7")));
    }
    let (a, b) = (x1 as f64, x2 as f64);
    Ok((a + 2.0 * b - 7.0).powi(2) + (2.0 * a + b - 5.0).powi(2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnapsackInstance {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub capacity: f64,
}

impl KnapsackInstance {
    /// Three items, profits (50, 55, 35), weights (65, 45, 55), W = 100.
    pub fn reference() -> Self {
        KnapsackInstance {
            values: vec![50.0, 55.0, 35.0],
            weights: vec![65.0, 45.0, 55.0],
            capacity: 100.0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.values.len() != self.weights.len() {
            return Err(BagaError::param(
                "knapsack values and weights must be non-empty and equal length",
            ));
        }
        if self.values.iter().chain(&self.weights).any(|&v| !(v > 0.0)) || !(self.capacity > 0.0) {
            return Err(BagaError::param(
                "knapsack values, weights and capacity must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnapsackEval {
    pub profit: f64,
    pub weight: f64,
    pub feasible: bool,
}

pub fn eval_knapsack(bits: &[u8], inst: &KnapsackInstance) -> Result<KnapsackEval> {
    if bits.len() != inst.len() {
        return Err(BagaError::Schema(format!(
            "knapsack expects {} bits, got {}",
            inst.len(),
            bits.len()
        )));
    }
    let dot = |w: &[f64]| bits.iter().zip(w).map(|(&b, &w)| f64::from(b) * w).sum::<f64>();
    let profit = dot(&inst.values);
    let weight = dot(&inst.weights);
    Ok(KnapsackEval {
        profit,
        weight,
        feasible: weight <= inst.capacity,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnapsackMode {
    Standard,
    Improved,
}

/// Raw knapsack fitness. Standard: the response of the profit itself.
/// Improved: overweight becomes an uptake inhibitor, the uptake velocity is
/// computed, and the fitness response is applied to that velocity.
/// Returns `(v0, z)`; `v0` is `None` in standard mode.
pub fn knapsack_fitness(
    bits: &[u8],
    inst: &KnapsackInstance,
    response: &ResponseFn,
    transport: Option<&TransportParams>,
    mode: KnapsackMode,
) -> Result<(Option<f64>, f64)> {
    let k = eval_knapsack(bits, inst)?;
    match mode {
        KnapsackMode::Standard => Ok((None, response.eval(k.profit))),
        KnapsackMode::Improved => {
            let t = transport.ok_or_else(|| BagaError::param("improved knapsack needs transport parameters"))?;
            let inhibitor = (k.weight - inst.capacity).max(0.0);
            let v0 = transport_velocity(k.profit, inhibitor, t);
            Ok((Some(v0), response.eval(v0)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    OracleMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionKind {
    GfpThreshold,
    PlasmidMatch,
    Fluorescence,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DetectionRule {
    GfpThreshold(f64),
    /// Exact genome match against the oracle's optimal set.
    PlasmidMatch(BTreeSet<Vec<u8>>),
    Fluorescence(Fluorescence),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub response: ResponseFn,
    pub transport: Option<TransportParams>,
    pub selection: SelectionParams,
    pub reporter: ReporterParams,
}

/// Everything needed to build a [`ProblemSpec`]; the configuration layer
/// produces one of these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub kind: ProblemKind,
    pub circuit: Circuit,
    pub knapsack: Option<KnapsackInstance>,
    /// Worst objective value, used to turn minimisation into a fitness.
    pub y_ceiling: Option<f64>,
    pub normalization: Normalization,
    pub detection: DetectionKind,
}

impl ProblemParams {
    /// Parameter sets of the five reference experiments.
    pub fn preset(kind: ProblemKind) -> Self {
        let reporter = |theta_gfp| ReporterParams {
            m: 150.0,
            theta_gfp,
            theta_e: None,
        };
        let items = KnapsackInstance::reference();
        let km = michaelis_k_from_values(&items.values, items.len()).unwrap();
        match kind {
            ProblemKind::SineRatio => ProblemParams {
                kind,
                circuit: Circuit {
                    response: ResponseFn::Linear {
                        gain: 10.0,
                        scale: 60.0,
                    },
                    transport: None,
                    selection: SelectionParams {
                        k0: 0.03,
                        alpha: 0.8,
                        beta: 10.0,
                    },
                    reporter: reporter(149.0),
                },
                knapsack: None,
                y_ceiling: None,
                normalization: Normalization::None,
                detection: DetectionKind::GfpThreshold,
            },
            ProblemKind::Booth => ProblemParams {
                kind,
                circuit: Circuit {
                    response: ResponseFn::Linear {
                        gain: 10.0,
                        scale: 7000.0,
                    },
                    transport: None,
                    selection: SelectionParams {
                        k0: 0.03,
                        alpha: 0.8,
                        beta: 1.0,
                    },
                    reporter: reporter(149.0),
                },
                knapsack: None,
                y_ceiling: Some(452.0),
                normalization: Normalization::None,
                detection: DetectionKind::PlasmidMatch,
            },
            ProblemKind::KnapsackStandard => ProblemParams {
                kind,
                circuit: Circuit {
                    response: ResponseFn::Hill {
                        vmax: 1.0,
                        half_saturation: 27.0,
                        exponent: 6.0,
                    },
                    transport: None,
                    selection: SelectionParams {
                        k0: 0.03,
                        alpha: 2.0,
                        beta: 10.0,
                    },
                    reporter: reporter(145.0),
                },
                knapsack: Some(items.clone()),
                y_ceiling: None,
                normalization: Normalization::None,
                detection: DetectionKind::PlasmidMatch,
            },
            ProblemKind::KnapsackImproved => ProblemParams {
                kind,
                circuit: Circuit {
                    response: ResponseFn::Hill {
                        vmax: 1.0,
                        half_saturation: km,
                        exponent: 3.0,
                    },
                    transport: Some(TransportParams {
                        vmax: 1.0,
                        michaelis: km,
                        inhibitor_k: 0.02,
                    }),
                    selection: SelectionParams {
                        k0: 0.03,
                        alpha: 2.0,
                        beta: 10.0,
                    },
                    reporter: reporter(145.0),
                },
                knapsack: Some(items.clone()),
                y_ceiling: None,
                normalization: Normalization::OracleMax,
                detection: DetectionKind::PlasmidMatch,
            },
            ProblemKind::Hamiltonian3 => ProblemParams {
                kind,
                circuit: Circuit {
                    // z = reporters / 2, so a yellow cell has z = 1.
                    response: ResponseFn::Linear { gain: 1.0, scale: 2.0 },
                    transport: None,
                    selection: SelectionParams {
                        k0: 0.03,
                        alpha: 0.0,
                        beta: 1.0,
                    },
                    reporter: reporter(149.0),
                },
                knapsack: None,
                y_ceiling: None,
                normalization: Normalization::None,
                detection: DetectionKind::Fluorescence,
            },
        }
    }
}

/// Result of pushing one plasmid through the problem and circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    /// Objective value: y for the functions, profit for knapsack,
    /// reporters expressed for the Hamiltonian path.
    pub objective: f64,
    pub feasible: bool,
    pub weight: Option<f64>,
    pub iptg: f64,
    /// True when a negative objective was clamped to zero inducer.
    pub clamped: bool,
    pub v0: Option<f64>,
    pub raw_z: f64,
    pub z: f64,
    pub fluorescence: Option<Fluorescence>,
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    params: ProblemParams,
    schema: Arc<Schema>,
    direction: Direction,
    normalizer: Option<f64>,
    detection: DetectionRule,
}

impl ProblemSpec {
    pub fn preset(kind: ProblemKind) -> Result<Self> {
        ProblemSpec::new(ProblemParams::preset(kind))
    }

    pub fn new(params: ProblemParams) -> Result<Self> {
        let c = &params.circuit;
        c.response.validate()?;
        c.selection.validate()?;
        c.reporter.validate()?;
        if let Some(t) = &c.transport {
            t.validate()?;
        }
        let (schema, direction) = match params.kind {
            ProblemKind::SineRatio => (Schema::Binary { length: 4 }, Direction::Maximize),
            ProblemKind::Booth => (Schema::Binary { length: 6 }, Direction::Minimize),
            ProblemKind::KnapsackStandard | ProblemKind::KnapsackImproved => {
                let inst = params
                    .knapsack
                    .as_ref()
                    .ok_or_else(|| BagaError::config("problem", "knapsack instance missing"))?;
                inst.validate()?;
                if inst.len() > 20 {
                    return Err(BagaError::config("problem.values", "at most 20 items are supported"));
                }
                (Schema::Binary { length: inst.len() }, Direction::Maximize)
            }
            ProblemKind::Hamiltonian3 => (Schema::hin_hix(), Direction::Maximize),
        };
        if params.kind == ProblemKind::KnapsackImproved && c.transport.is_none() {
            return Err(BagaError::config(
                "circuit.transport",
                "improved knapsack requires transport parameters",
            ));
        }
        if direction == Direction::Minimize {
            match params.y_ceiling {
                None => {
                    return Err(BagaError::config(
                        "problem.y_ceiling",
                        "minimisation requires a ceiling",
                    ))
                }
                Some(y) if !(y > 0.0) => return Err(BagaError::config("problem.y_ceiling", "ceiling must be > 0")),
                _ => {}
            }
        }
        if params.detection == DetectionKind::Fluorescence && schema.is_binary() {
            return Err(BagaError::config(
                "detection.rule",
                "fluorescence detection needs a segmented plasmid",
            ));
        }

        let mut spec = ProblemSpec {
            params,
            schema: Arc::new(schema),
            direction,
            normalizer: None,
            detection: DetectionRule::GfpThreshold(0.0),
        };
        if spec.params.normalization == Normalization::OracleMax {
            let max = spec
                .search_space()
                .iter()
                .map(|p| spec.evaluate(p).map(|e| e.raw_z))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0f64, f64::max);
            if !(max > 0.0) {
                return Err(BagaError::param("oracle-max normalisation: every fitness is zero"));
            }
            spec.normalizer = Some(max);
        }
        spec.detection = match spec.params.detection {
            DetectionKind::GfpThreshold => DetectionRule::GfpThreshold(spec.params.circuit.reporter.theta_gfp),
            DetectionKind::Fluorescence => DetectionRule::Fluorescence(Fluorescence::Yellow),
            DetectionKind::PlasmidMatch => DetectionRule::PlasmidMatch(
                brute_force_oracle(&spec)?
                    .optimal
                    .iter()
                    .map(|p| p.symbols().to_vec())
                    .collect(),
            ),
        };
        Ok(spec)
    }

    pub fn kind(&self) -> ProblemKind {
        self.params.kind
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn circuit(&self) -> &Circuit {
        &self.params.circuit
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn detection(&self) -> &DetectionRule {
        &self.detection
    }

    pub fn normalizer(&self) -> Option<f64> {
        self.normalizer
    }

    /// Every plasmid the schema admits: all bit strings, or all six segment orders.
    pub fn search_space(&self) -> Vec<Plasmid> {
        match *self.schema {
            Schema::Binary { length } => (0..1u64 << length)
                .map(|n| Plasmid::encode_unsigned(n, length).unwrap())
                .collect(),
            Schema::Segmented { .. } => all_segment_orders().into_iter().map(Plasmid::new_hamiltonian).collect(),
        }
    }

    fn check_schema(&self, p: &Plasmid) -> Result<()> {
        if p.schema() != &*self.schema {
            return Err(BagaError::Schema(format!(
                "plasmid schema {:?} does not match problem {}",
                p.schema(),
                self.kind()
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, p: &Plasmid) -> Result<Evaluation> {
        self.check_schema(p)?;
        let c = &self.params.circuit;
        let mut ev = Evaluation {
            objective: 0.0,
            feasible: true,
            weight: None,
            iptg: 0.0,
            clamped: false,
            v0: None,
            raw_z: 0.0,
            z: 0.0,
            fluorescence: None,
        };
        match self.params.kind {
            ProblemKind::SineRatio => {
                ev.objective = eval_sine_ratio(p.decode_unsigned(0..4)?)?;
                (ev.iptg, ev.clamped) = clamp_concentration(ev.objective);
                ev.raw_z = c.response.eval(ev.iptg);
            }
            ProblemKind::Booth => {
                ev.objective = eval_booth(p.decode_unsigned(0..3)?, p.decode_unsigned(3..6)?)?;
                let ceiling = self.params.y_ceiling.expect("validated at construction");
                let target = ((ceiling - ev.objective) / ceiling).max(0.0);
                ev.iptg = c
                    .response
                    .inverse(target)
                    .ok_or_else(|| BagaError::param(format!("response cannot reach fitness {target}")))?;
                ev.raw_z = c.response.eval(ev.iptg);
            }
            ProblemKind::KnapsackStandard | ProblemKind::KnapsackImproved => {
                let inst = self.params.knapsack.as_ref().expect("validated at construction");
                let k = eval_knapsack(p.symbols(), inst)?;
                ev.objective = k.profit;
                ev.weight = Some(k.weight);
                ev.feasible = k.feasible;
                ev.iptg = k.profit;
                let mode = if self.params.kind == ProblemKind::KnapsackImproved {
                    KnapsackMode::Improved
                } else {
                    KnapsackMode::Standard
                };
                let (v0, z) = knapsack_fitness(p.symbols(), inst, &c.response, c.transport.as_ref(), mode)?;
                ev.v0 = v0;
                ev.raw_z = z;
            }
            ProblemKind::Hamiltonian3 => {
                let f = p.detect_fluorescence()?;
                ev.fluorescence = Some(f);
                ev.objective = f64::from(f.reporters());
                ev.iptg = ev.objective;
                ev.raw_z = c.response.eval(ev.iptg);
            }
        }
        ev.z = match self.normalizer {
            Some(max) => ev.raw_z / max,
            None => ev.raw_z,
        };
        Ok(ev)
    }

    /// Inducer concentration the problem feeds to the circuit.
    pub fn iptg_of(&self, p: &Plasmid) -> Result<f64> {
        Ok(self.evaluate(p)?.iptg)
    }

    pub fn is_optimal(&self, p: &Plasmid, ev: &Evaluation, gfp: f64) -> bool {
        match &self.detection {
            DetectionRule::GfpThreshold(theta) => gfp >= *theta,
            DetectionRule::PlasmidMatch(set) => set.contains(p.symbols()),
            DetectionRule::Fluorescence(want) => ev.fluorescence == Some(*want),
        }
    }

    /// Human-readable decoding of a genome for reports.
    pub fn describe(&self, p: &Plasmid) -> String {
        match self.params.kind {
            ProblemKind::SineRatio => format!("x={}", p.decode_unsigned(0..4).unwrap_or(0)),
            ProblemKind::Booth => format!(
                "x1={}, x2={}",
                p.decode_unsigned(0..3).unwrap_or(0),
                p.decode_unsigned(3..6).unwrap_or(0)
            ),
            ProblemKind::KnapsackStandard | ProblemKind::KnapsackImproved => p.genome_string(),
            ProblemKind::Hamiltonian3 => p
                .segment_order()
                .map(|o| crate::genome::format_segment_order(&o))
                .unwrap_or_else(|| p.genome_string()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleRow {
    pub plasmid: Plasmid,
    pub evaluation: Evaluation,
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
    pub optimal: Vec<Plasmid>,
    pub value: f64,
}

/// Exhaustive enumeration of the search space. The optimum is taken on the
/// objective (feasible candidates only), independent of the circuit.
pub fn brute_force_oracle(spec: &ProblemSpec) -> Result<OracleReport> {
    let rows = spec
        .search_space()
        .into_iter()
        .map(|plasmid| {
            let evaluation = spec.evaluate(&plasmid)?;
            Ok(OracleRow { plasmid, evaluation })
        })
        .collect::<Result<Vec<_>>>()?;
    let better = |a: f64, b: f64| match spec.direction() {
        Direction::Maximize => a > b,
        Direction::Minimize => a < b,
    };
    let value = rows
        .iter()
        .filter(|r| r.evaluation.feasible)
        .map(|r| r.evaluation.objective)
        .reduce(|best, y| if better(y, best) { y } else { best })
        .ok_or_else(|| BagaError::param("no feasible candidate in the search space"))?;
    let optimal = rows
        .iter()
        .filter(|r| r.evaluation.feasible && r.evaluation.objective == value)
        .map(|r| r.plasmid.clone())
        .collect();
    Ok(OracleReport { rows, optimal, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gfp_level, hill_response};
    use crate::genome::Edge;

    fn bits(b: &[u8]) -> Plasmid {
        Plasmid::binary(b).unwrap()
    }

    #[test]
    fn sine_ratio_values() {
        let y11 = eval_sine_ratio(11).unwrap();
        assert!((y11 - 5.99994).abs() < 1e-4);
        assert_eq!(eval_sine_ratio(5).unwrap(), 0.0);
        assert_eq!(eval_sine_ratio(0).unwrap(), -2.5);
        assert!(eval_sine_ratio(16).is_err());
    }

    #[test]
    fn booth_values() {
        assert_eq!(eval_booth(1, 3).unwrap(), 0.0);
        assert_eq!(eval_booth(0, 0).unwrap(), 74.0);
        assert_eq!(eval_booth(7, 7).unwrap(), 452.0);
        let max = (0..8)
            .flat_map(|a| (0..8).map(move |b| eval_booth(a, b).unwrap()))
            .fold(f64::MIN, f64::max);
        assert_eq!(max, 452.0);
        assert!(eval_booth(8, 0).is_err());
    }

    #[test]
    fn knapsack_values() {
        let inst = KnapsackInstance::reference();
        let k = eval_knapsack(&[0, 1, 1], &inst).unwrap();
        assert_eq!((k.profit, k.weight, k.feasible), (90.0, 100.0, true));
        let k = eval_knapsack(&[0, 0, 0], &inst).unwrap();
        assert_eq!((k.profit, k.weight, k.feasible), (0.0, 0.0, true));
        let k = eval_knapsack(&[1, 1, 1], &inst).unwrap();
        assert_eq!((k.profit, k.weight, k.feasible), (140.0, 165.0, false));
        assert!(eval_knapsack(&[1, 1], &inst).is_err());
    }

    #[test]
    fn iptg_mapping() {
        let sine = ProblemSpec::preset(ProblemKind::SineRatio).unwrap();
        assert!((sine.iptg_of(&bits(&[1, 0, 1, 1])).unwrap() - 5.99994).abs() < 1e-4);
        let zero = sine.evaluate(&bits(&[0, 0, 0, 0])).unwrap();
        assert!(zero.clamped);
        assert_eq!((zero.iptg, zero.z), (0.0, 0.0));

        let booth = ProblemSpec::preset(ProblemKind::Booth).unwrap();
        let ev = booth.evaluate(&bits(&[0, 0, 1, 0, 1, 1])).unwrap();
        assert!((ev.z - 1.0).abs() < 1e-12);

        let ks = ProblemSpec::preset(ProblemKind::KnapsackStandard).unwrap();
        assert_eq!(ks.iptg_of(&bits(&[0, 1, 1])).unwrap(), 90.0);

        let mut no_ceiling = ProblemParams::preset(ProblemKind::Booth);
        no_ceiling.y_ceiling = None;
        assert!(matches!(ProblemSpec::new(no_ceiling), Err(BagaError::Config { .. })));

        assert!(sine.evaluate(&bits(&[1, 0, 1])).is_err());
    }

    #[test]
    fn knapsack_fitness_modes() {
        let inst = KnapsackInstance::reference();
        let std_resp = ResponseFn::Hill {
            vmax: 1.0,
            half_saturation: 27.0,
            exponent: 6.0,
        };
        let (_, z) = knapsack_fitness(&[0, 1, 1], &inst, &std_resp, None, KnapsackMode::Standard).unwrap();
        assert!((z - 0.999272).abs() < 1e-6);

        let p = ProblemParams::preset(ProblemKind::KnapsackImproved);
        let t = p.circuit.transport.unwrap();
        let (v0, z) =
            knapsack_fitness(&[1, 1, 0], &inst, &p.circuit.response, Some(&t), KnapsackMode::Improved).unwrap();
        let v0 = v0.unwrap();
        assert!((v0 - 0.0044709).abs() < 1e-7);
        let k = t.michaelis;
        assert!((z - v0.powi(3) / (k.powi(3) + v0.powi(3))).abs() < 1e-18);

        let (v0, z) =
            knapsack_fitness(&[0, 0, 0], &inst, &p.circuit.response, Some(&t), KnapsackMode::Improved).unwrap();
        assert_eq!((v0, z), (Some(0.0), 0.0));
    }

    #[test]
    fn improved_branches_meet_at_zero_inhibitor() {
        let t = ProblemParams::preset(ProblemKind::KnapsackImproved)
            .circuit
            .transport
            .unwrap();
        let at_zero = transport_velocity(90.0, 0.0, &t);
        let eps = transport_velocity(90.0, 1e-12, &t);
        assert!((at_zero - eps).abs() < 1e-9);
    }

    #[test]
    fn oracles() {
        let sine = brute_force_oracle(&ProblemSpec::preset(ProblemKind::SineRatio).unwrap()).unwrap();
        assert_eq!(sine.optimal.len(), 1);
        assert_eq!(sine.optimal[0].genome_string(), "1011");
        assert!((sine.value - 5.99994).abs() < 1e-4);

        let booth = brute_force_oracle(&ProblemSpec::preset(ProblemKind::Booth).unwrap()).unwrap();
        assert_eq!(booth.optimal.len(), 1);
        assert_eq!(booth.optimal[0].genome_string(), "001011");
        assert_eq!(booth.value, 0.0);

        for kind in [ProblemKind::KnapsackStandard, ProblemKind::KnapsackImproved] {
            let ks = brute_force_oracle(&ProblemSpec::preset(kind).unwrap()).unwrap();
            assert_eq!(ks.optimal.len(), 1);
            assert_eq!(ks.optimal[0].genome_string(), "011");
            assert_eq!(ks.value, 90.0);
            assert_eq!(ks.rows.len(), 8);
        }

        let ham = brute_force_oracle(&ProblemSpec::preset(ProblemKind::Hamiltonian3).unwrap()).unwrap();
        assert_eq!(ham.optimal.len(), 1);
        assert_eq!(ham.optimal[0].segment_order(), Some([Edge::A, Edge::B, Edge::C]));
        let yellow = ham
            .rows
            .iter()
            .filter(|r| r.evaluation.fluorescence == Some(Fluorescence::Yellow))
            .count();
        assert_eq!(yellow, 1);
    }

    #[test]
    fn sine_threshold_separates_optimum() {
        let spec = ProblemSpec::preset(ProblemKind::SineRatio).unwrap();
        let m = spec.circuit().reporter.m;
        let mut gfps: Vec<(u64, f64)> = (0..16)
            .map(|x| {
                let p = Plasmid::encode_unsigned(x, 4).unwrap();
                (x, gfp_level(spec.evaluate(&p).unwrap().z, m))
            })
            .collect();
        gfps.sort_by(|a, b| b.1.total_cmp(&a.1));
        assert_eq!(gfps[0].0, 11);
        assert!((gfps[0].1 - 149.9985).abs() < 1e-3 && gfps[0].1 >= 149.0);
        assert_eq!(gfps[1].0, 12);
        assert!((gfps[1].1 - 119.6).abs() < 0.05 && gfps[1].1 < 149.0);
        let detected: Vec<u64> = (0..16)
            .filter(|&x| {
                let p = Plasmid::encode_unsigned(x, 4).unwrap();
                let ev = spec.evaluate(&p).unwrap();
                spec.is_optimal(&p, &ev, gfp_level(ev.z, m))
            })
            .collect();
        assert_eq!(detected, vec![11]);
    }

    #[test]
    fn improved_penalty_ranks_infeasible_below_optimum() {
        let spec = ProblemSpec::preset(ProblemKind::KnapsackImproved).unwrap();
        let oracle = brute_force_oracle(&spec).unwrap();
        let best = spec.evaluate(&oracle.optimal[0]).unwrap().z;
        assert!((best - 1.0).abs() < 1e-12, "normalised optimum {best}");
        for row in oracle.rows.iter().filter(|r| !r.evaluation.feasible) {
            assert!(row.evaluation.z < best);
        }
    }

    #[test]
    fn standard_threshold_does_not_separate() {
        // Documented gap: the infeasible {1,1,0} clears the standard threshold.
        let p = ProblemParams::preset(ProblemKind::KnapsackStandard);
        let z = hill_response(105.0, 1.0, 27.0, 6.0);
        assert!(gfp_level(z, 150.0) >= p.circuit.reporter.theta_gfp);
    }

    #[test]
    fn detection_schema_consistency() {
        let mut p = ProblemParams::preset(ProblemKind::SineRatio);
        p.detection = DetectionKind::Fluorescence;
        assert!(ProblemSpec::new(p).is_err());
    }

    #[test]
    fn plasmid_match_uses_oracle_set() {
        let spec = ProblemSpec::preset(ProblemKind::Booth).unwrap();
        match spec.detection() {
            DetectionRule::PlasmidMatch(set) => {
                assert_eq!(set.len(), 1);
                assert!(set.contains(&vec![0, 0, 1, 0, 1, 1]));
            }
            other => panic!("unexpected rule {other:?}"),
        }
    }

    #[test]
    fn names_round_trip() {
        for k in ProblemKind::ALL {
            assert_eq!(k.name().parse::<ProblemKind>().unwrap(), k);
        }
        assert!("nope".parse::<ProblemKind>().is_err());
    }
}
