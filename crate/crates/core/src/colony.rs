//! Event-driven colony simulation.
//!
//! The colony is well mixed and has no geometry. Each living cell divides as
//! a Poisson process with its own growth rate `k`, so under constant `k` the
//! expected census follows `y0 e^{kt}`. A division produces a daughter whose
//! plasmid goes through the variation operator; varied cells are evaluated
//! through the problem's circuit, which sets fitness, GFP, growth rate and
//! optimality. Eugenic protocols cull evaluated cells whose GFP does not
//! exceed the culling threshold.
//!
//! The founder is created with zeroed circuit state and is never evaluated
//! unless its own plasmid is varied (mutation target `Both`); until then it is
//! exempt from culling.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::circuit::{eugenic_check, gfp_level};
use crate::error::{BagaError, Result};
use crate::genome::{
    parse_segment_order, BitInit, Edge, Fluorescence, Plasmid, Recombinase, RecombinationMode, Schema,
};
use crate::problems::{ProblemKind, ProblemParams, ProblemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    /// Selection and parallelism.
    SP,
    /// Selection, parallelism and eugenic culling.
    SPE,
    /// Parallelism only (alpha forced to zero).
    P,
    /// Parallelism with eugenic culling.
    PE,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [Protocol::SP, Protocol::SPE, Protocol::P, Protocol::PE];

    pub fn selects(self) -> bool {
        matches!(self, Protocol::SP | Protocol::SPE)
    }

    pub fn eugenic(self) -> bool {
        matches!(self, Protocol::SPE | Protocol::PE)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Protocol {
    type Err = BagaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SP" => Ok(Protocol::SP),
            "SPE" => Ok(Protocol::SPE),
            "P" => Ok(Protocol::P),
            "PE" => Ok(Protocol::PE),
            _ => Err(BagaError::config("protocol.variant", format!("unknown variant `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationTarget {
    DaughterOnly,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operator", rename_all = "snake_case")]
pub enum Variation {
    FlipBit { p_m: f64 },
    HinHix(Recombinase),
}

impl Variation {
    pub fn apply<R: Rng + ?Sized>(&self, p: &Plasmid, rng: &mut R) -> Result<Plasmid> {
        match self {
            Variation::FlipBit { p_m } => p.flip_bit_mutation(*p_m, rng),
            Variation::HinHix(op) => p.hin_hix_recombinase(op, rng),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPlasmid {
    Zeros,
    RandomUniform,
    RandomOrder,
    SegmentOrder([Edge; 3]),
}

impl InitialPlasmid {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "zeros" => Ok(InitialPlasmid::Zeros),
            "random" | "random_uniform" => Ok(InitialPlasmid::RandomUniform),
            "random_order" => Ok(InitialPlasmid::RandomOrder),
            other => parse_segment_order(other)
                .map(InitialPlasmid::SegmentOrder)
                .map_err(|_| BagaError::config("problem.initial", format!("unknown initial plasmid `{other}`"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            InitialPlasmid::Zeros => "zeros".into(),
            InitialPlasmid::RandomUniform => "random".into(),
            InitialPlasmid::RandomOrder => "random_order".into(),
            InitialPlasmid::SegmentOrder(o) => o.iter().map(|e| e.as_char()).collect(),
        }
    }

    fn build<R: Rng + ?Sized>(&self, schema: &Schema, rng: &mut R) -> Result<Plasmid> {
        match (self, schema) {
            (InitialPlasmid::Zeros, Schema::Binary { length }) => Plasmid::new_binary(*length, BitInit::Zeros, rng),
            (InitialPlasmid::RandomUniform, Schema::Binary { length }) => {
                Plasmid::new_binary(*length, BitInit::RandomUniform, rng)
            }
            (InitialPlasmid::RandomOrder, Schema::Segmented { .. }) => Ok(Plasmid::random_hamiltonian(rng)),
            (InitialPlasmid::SegmentOrder(o), Schema::Segmented { .. }) => Ok(Plasmid::new_hamiltonian(*o)),
            _ => Err(BagaError::config(
                "problem.initial",
                format!("initial plasmid `{}` does not fit the problem schema", self.label()),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColonyConfig {
    pub problem: ProblemParams,
    pub protocol: Protocol,
    pub variation: Variation,
    pub mutation_target: MutationTarget,
    pub initial: InitialPlasmid,
    /// Hard stop on the number of living cells.
    pub capacity: usize,
    pub t_max: f64,
    pub sample_dt: f64,
    pub seed: u64,
    /// Culling threshold, required by the eugenic protocols.
    pub theta_e: Option<f64>,
}

impl ColonyConfig {
    /// Reference parameter set for each experiment.
    pub fn preset(kind: ProblemKind, protocol: Protocol, seed: u64) -> Self {
        let problem = ProblemParams::preset(kind);
        let (variation, initial, theta_e) = match kind {
            ProblemKind::SineRatio => (Variation::FlipBit { p_m: 0.3 }, InitialPlasmid::RandomUniform, 100.0),
            ProblemKind::Booth => (Variation::FlipBit { p_m: 0.5 }, InitialPlasmid::RandomUniform, 145.0),
            ProblemKind::KnapsackStandard | ProblemKind::KnapsackImproved => {
                (Variation::FlipBit { p_m: 0.3 }, InitialPlasmid::RandomUniform, 100.0)
            }
            ProblemKind::Hamiltonian3 => (
                Variation::HinHix(Recombinase {
                    p_hix: 0.3,
                    p_accept: 0.5,
                    mode: RecombinationMode::Segment,
                    invert_segments: false,
                }),
                InitialPlasmid::SegmentOrder([Edge::B, Edge::A, Edge::C]),
                0.0,
            ),
        };
        ColonyConfig {
            problem,
            protocol,
            variation,
            mutation_target: MutationTarget::DaughterOnly,
            initial,
            capacity: 5000,
            t_max: 3000.0,
            sample_dt: 1.0,
            seed,
            theta_e: protocol.eugenic().then_some(theta_e),
        }
    }

    /// Problem parameters after the protocol is applied: non-selective
    /// protocols zero `alpha`, eugenic ones carry the culling threshold.
    pub fn effective_problem(&self) -> ProblemParams {
        let mut p = self.problem.clone();
        if !self.protocol.selects() {
            p.circuit.selection.alpha = 0.0;
        }
        p.circuit.reporter.theta_e = if self.protocol.eugenic() { self.theta_e } else { None };
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.protocol.eugenic() && self.theta_e.is_none() {
            return Err(BagaError::config(
                "protocol.theta_e",
                format!("variant {} requires a culling threshold", self.protocol),
            ));
        }
        if self.capacity == 0 {
            return Err(BagaError::config("sim.capacity", "capacity must be at least 1"));
        }
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(BagaError::config("sim.t_max", "t_max must be finite and >= 0"));
        }
        if !(self.sample_dt > 0.0) {
            return Err(BagaError::config("sim.sample_dt", "sample interval must be > 0"));
        }
        match (&self.variation, self.problem.kind) {
            (Variation::HinHix(op), ProblemKind::Hamiltonian3) => op.validate(),
            (Variation::FlipBit { p_m }, k) if k != ProblemKind::Hamiltonian3 => {
                crate::genome::check_probability("p_m", *p_m)
            }
            _ => Err(BagaError::config(
                "protocol",
                "flip-bit mutation needs a binary plasmid; Hin-hixC recombination needs a segmented one",
            )),
        }
        .map_err(|e| match e {
            BagaError::Parameter(m) => BagaError::config("protocol", m),
            other => other,
        })
    }
}

/// Agent state of one bacterium.
#[derive(Clone, Debug, PartialEq)]
pub struct Bacterium {
    pub id: u64,
    pub parent_id: Option<u64>,
    pub plasmid: Plasmid,
    pub iptg: f64,
    pub v0: Option<f64>,
    pub z: f64,
    pub gfp: f64,
    /// Growth rate (1/time).
    pub k: f64,
    pub birth_time: f64,
    pub next_division: f64,
    pub alive: bool,
    pub is_optimal: bool,
    pub fluorescence: Option<Fluorescence>,
    /// False for the founder until its plasmid is first varied.
    pub evaluated: bool,
}

/// Division waiting time: exponential with rate `k`. A non-positive rate
/// leaves the cell inert.
pub fn schedule_division<R: Rng + ?Sized>(k: f64, now: f64, rng: &mut R) -> Option<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return None;
    }
    let wait = Exp::new(k).ok()?.sample(rng);
    Some(now + wait)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Occurrence {
    pub time: f64,
    pub bacterium_id: u64,
    pub genome: Plasmid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusSample {
    pub time: f64,
    pub colony_size: usize,
    pub optimal_count: usize,
    pub mean_fitness: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    TimeLimit,
    Capacity,
    Extinct,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub divisions: u64,
    pub culled: u64,
    pub culled_optimal: u64,
    /// Cells that stopped being optimal after their own plasmid was varied.
    pub lost_optimal: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub occurrences: Vec<Occurrence>,
    pub census: Vec<CensusSample>,
    pub final_population: Vec<Bacterium>,
    pub end_time: f64,
    pub halt: HaltReason,
    pub stats: RunStats,
}

impl RunRecord {
    pub fn occurrence_times(&self) -> Vec<f64> {
        self.occurrences.iter().map(|o| o.time).collect()
    }

    /// Time at which the `n`-th optimal cell appeared.
    pub fn time_to_count(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.occurrences.get(i)).map(|o| o.time)
    }

    pub fn first_occurrence(&self) -> Option<f64> {
        self.time_to_count(1)
    }
}

#[derive(Clone, Copy, Debug)]
struct Event {
    time: f64,
    seq: u64,
    cell: usize,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

/// Live simulation state. Most callers want [`run`].
pub struct Colony {
    config: ColonyConfig,
    spec: ProblemSpec,
    rng: ChaCha8Rng,
    cells: Vec<Bacterium>,
    queue: BinaryHeap<Reverse<Event>>,
    seq: u64,
    next_id: u64,
    now: f64,
    alive: usize,
    optimal_alive: usize,
    occurrences: Vec<Occurrence>,
    stats: RunStats,
}

impl Colony {
    /// One founder at t = 0 with k = k0 and zeroed gfp, iptg and z.
    pub fn init(config: &ColonyConfig) -> Result<Colony> {
        config.validate()?;
        let spec = ProblemSpec::new(config.effective_problem())?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let plasmid = config.initial.build(spec.schema(), &mut rng)?;
        let k0 = spec.circuit().selection.k0;
        let mut colony = Colony {
            config: config.clone(),
            spec,
            rng,
            cells: Vec::new(),
            queue: BinaryHeap::new(),
            seq: 0,
            next_id: 1,
            now: 0.0,
            alive: 1,
            optimal_alive: 0,
            occurrences: Vec::new(),
            stats: RunStats::default(),
        };
        colony.cells.push(Bacterium {
            id: 0,
            parent_id: None,
            plasmid,
            iptg: 0.0,
            v0: None,
            z: 0.0,
            gfp: 0.0,
            k: k0,
            birth_time: 0.0,
            next_division: f64::INFINITY,
            alive: true,
            is_optimal: false,
            fluorescence: None,
            evaluated: false,
        });
        colony.schedule(0);
        Ok(colony)
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[Bacterium] {
        &self.cells
    }

    pub fn living(&self) -> impl Iterator<Item = &Bacterium> {
        self.cells.iter().filter(|b| b.alive)
    }

    pub fn size(&self) -> usize {
        self.alive
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    fn schedule(&mut self, idx: usize) {
        let cell = &mut self.cells[idx];
        match schedule_division(cell.k, self.now, &mut self.rng) {
            Some(t) => {
                cell.next_division = t;
                self.seq += 1;
                self.queue.push(Reverse(Event {
                    time: t,
                    seq: self.seq,
                    cell: idx,
                }));
            }
            None => cell.next_division = f64::INFINITY,
        }
    }

    /// Runs the plasmid through the circuit and updates every derived field.
    pub fn evaluate_cell(spec: &ProblemSpec, b: &mut Bacterium) -> Result<()> {
        let ev = spec.evaluate(&b.plasmid)?;
        let c = spec.circuit();
        b.iptg = ev.iptg;
        b.v0 = ev.v0;
        b.z = ev.z;
        b.gfp = gfp_level(ev.z, c.reporter.m);
        b.k = c.selection.growth_rate(ev.z);
        b.fluorescence = ev.fluorescence;
        b.is_optimal = spec.is_optimal(&b.plasmid, &ev, b.gfp);
        b.evaluated = true;
        if let Some(theta) = c.reporter.theta_e {
            if !eugenic_check(b.gfp, theta) {
                b.alive = false;
            }
        }
        Ok(())
    }

    /// Evaluates a freshly varied cell and updates counters and occurrences.
    /// Returns whether the cell survived.
    fn settle(&mut self, b: &mut Bacterium, was_alive: bool, was_optimal: bool) -> Result<bool> {
        Self::evaluate_cell(&self.spec, b)?;
        if b.is_optimal && !was_optimal {
            self.occurrences.push(Occurrence {
                time: self.now,
                bacterium_id: b.id,
                genome: b.plasmid.clone(),
            });
            self.optimal_alive += 1;
        } else if !b.is_optimal && was_optimal {
            self.optimal_alive -= 1;
            self.stats.lost_optimal += 1;
        }
        if !b.alive {
            self.stats.culled += 1;
            if b.is_optimal {
                self.stats.culled_optimal += 1;
                self.optimal_alive -= 1;
            }
            if was_alive {
                self.alive -= 1;
            }
        } else if !was_alive {
            self.alive += 1;
        }
        Ok(b.alive)
    }

    /// One cell division: the daughter inherits a varied copy of the plasmid;
    /// with target `Both` the mother is varied too. Varied cells are
    /// re-evaluated, survivors get fresh division times.
    pub fn divide(&mut self, idx: usize) -> Result<()> {
        self.stats.divisions += 1;
        let variation = self.config.variation;
        let mother_plasmid = self.cells[idx].plasmid.clone();
        let daughter_plasmid = variation.apply(&mother_plasmid, &mut self.rng)?;
        let mut daughter = Bacterium {
            id: self.next_id,
            parent_id: Some(self.cells[idx].id),
            plasmid: daughter_plasmid,
            birth_time: self.now,
            next_division: f64::INFINITY,
            alive: true,
            is_optimal: false,
            evaluated: false,
            ..self.cells[idx].clone()
        };
        self.next_id += 1;
        let daughter_alive = self.settle(&mut daughter, false, false)?;

        let mut mother_alive = true;
        if self.config.mutation_target == MutationTarget::Both {
            let mut mother = self.cells[idx].clone();
            mother.plasmid = variation.apply(&mother_plasmid, &mut self.rng)?;
            let was_optimal = mother.is_optimal;
            mother_alive = self.settle(&mut mother, true, was_optimal)?;
            self.cells[idx] = mother;
        }

        if daughter_alive {
            self.cells.push(daughter);
            let d = self.cells.len() - 1;
            self.schedule(d);
        }
        if mother_alive {
            self.schedule(idx);
        } else {
            self.cells[idx].next_division = f64::INFINITY;
        }
        Ok(())
    }

    pub fn census(&self) -> CensusSample {
        let (n, sum) = self.living().fold((0usize, 0.0f64), |(n, s), b| (n + 1, s + b.z));
        debug_assert_eq!(n, self.alive);
        CensusSample {
            time: self.now,
            colony_size: self.alive,
            optimal_count: self.optimal_alive,
            mean_fitness: if n == 0 { 0.0 } else { sum / n as f64 },
        }
    }

    fn sample_at(&self, t: f64) -> CensusSample {
        CensusSample {
            time: t,
            ..self.census()
        }
    }

    /// Drives the event loop to completion.
    pub fn run(mut self) -> Result<RunRecord> {
        let t_max = self.config.t_max;
        let dt = self.config.sample_dt;
        let mut census = Vec::new();
        let mut sample_idx: u64 = 0;
        let grid = |i: u64| i as f64 * dt;

        let halt = loop {
            let next = self.queue.peek().map(|Reverse(e)| e.time);
            match next {
                Some(t) if t <= t_max => {
                    while grid(sample_idx) < t {
                        census.push(self.sample_at(grid(sample_idx)));
                        sample_idx += 1;
                    }
                    let Reverse(ev) = self.queue.pop().unwrap();
                    let cell = &self.cells[ev.cell];
                    if !cell.alive || cell.next_division != ev.time {
                        continue;
                    }
                    debug_assert!(ev.time >= self.now);
                    self.now = ev.time;
                    self.divide(ev.cell)?;
                    if self.alive >= self.config.capacity {
                        break HaltReason::Capacity;
                    }
                }
                _ => {
                    while grid(sample_idx) <= t_max {
                        census.push(self.sample_at(grid(sample_idx)));
                        sample_idx += 1;
                    }
                    self.now = t_max;
                    break if self.alive == 0 {
                        HaltReason::Extinct
                    } else {
                        HaltReason::TimeLimit
                    };
                }
            }
        };
        if halt == HaltReason::Capacity {
            while grid(sample_idx) <= self.now {
                census.push(self.sample_at(grid(sample_idx)));
                sample_idx += 1;
            }
            if census.last().is_none_or(|s| s.time < self.now) {
                census.push(self.census());
            }
        }

        Ok(RunRecord {
            seed: self.config.seed,
            end_time: self.now,
            halt,
            stats: self.stats,
            census,
            final_population: self.cells.into_iter().filter(|b| b.alive).collect(),
            occurrences: self.occurrences,
        })
    }
}

/// Runs one colony from a fresh founder until `t_max` or capacity.
pub fn run(config: &ColonyConfig) -> Result<RunRecord> {
    Colony::init(config)?.run()
}
