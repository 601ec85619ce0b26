//! Plasmid encodings and the variation operators that act on them.
//!
//! Two layouts exist. A binary plasmid is a flat bit string decoded
//! MSB-first into integers. A segmented plasmid follows the Hin/hix gene
//! code: a fixed expression prefix (promoter, rbs, 5' RFP) followed by
//! gene segments, each bracketed by HixC sites:
//!
//! ```text
//! {0,1,4} # {2} # S1 # {2} # S2 # {2} # S3 # {2}
//! ```

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BagaError, Result};

/// Hin/hix gene component codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum GeneCode {
    Promoter = 0,
    Rbs = 1,
    HixC = 2,
    Terminator = 3,
    Rfp5 = 4,
    Rfp3 = 5,
    Gfp5 = 6,
    Gfp3 = 7,
    Null = 8,
}

impl GeneCode {
    pub const ALL: [GeneCode; 9] = [
        GeneCode::Promoter,
        GeneCode::Rbs,
        GeneCode::HixC,
        GeneCode::Terminator,
        GeneCode::Rfp5,
        GeneCode::Rfp3,
        GeneCode::Gfp5,
        GeneCode::Gfp3,
        GeneCode::Null,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

/// Reporter colour emitted by a segmented plasmid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fluorescence {
    None,
    Red,
    Green,
    Yellow,
}

impl Fluorescence {
    /// Number of reporter genes expressed (0, 1 or 2).
    pub fn reporters(self) -> u32 {
        match self {
            Fluorescence::None => 0,
            Fluorescence::Red | Fluorescence::Green => 1,
            Fluorescence::Yellow => 2,
        }
    }

    fn from_flags(red: bool, green: bool) -> Self {
        match (red, green) {
            (true, true) => Fluorescence::Yellow,
            (true, false) => Fluorescence::Red,
            (false, true) => Fluorescence::Green,
            (false, false) => Fluorescence::None,
        }
    }
}

impl fmt::Display for Fluorescence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Fluorescence::None => "None",
            Fluorescence::Red => "Red",
            Fluorescence::Green => "Green",
            Fluorescence::Yellow => "Yellow",
        };
        f.write_str(s)
    }
}

/// Graph edges of the three-node Hamiltonian instance, as gene segments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Edge {
    A,
    B,
    C,
}

impl Edge {
    pub const ALL: [Edge; 3] = [Edge::A, Edge::B, Edge::C];

    pub fn symbols(self) -> [u8; 3] {
        match self {
            Edge::A => [5, 1, 6],
            Edge::B => [7, 3, 8],
            Edge::C => [5, 3, 6],
        }
    }

    pub fn from_symbols(s: &[u8]) -> Option<Edge> {
        Self::ALL.into_iter().find(|e| e.symbols() == s)
    }

    pub fn from_char(c: char) -> Option<Edge> {
        match c.to_ascii_uppercase() {
            'A' => Some(Edge::A),
            'B' => Some(Edge::B),
            'C' => Some(Edge::C),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Edge::A => 'A',
            Edge::B => 'B',
            Edge::C => 'C',
        }
    }
}

/// All six orderings of the three edge segments, lexicographic.
pub fn all_segment_orders() -> [[Edge; 3]; 6] {
    use Edge::*;
    [[A, B, C], [A, C, B], [B, A, C], [B, C, A], [C, A, B], [C, B, A]]
}

/// Parses "ABC", "A,B,C" or "a b c" into a segment order.
pub fn parse_segment_order(s: &str) -> Result<[Edge; 3]> {
    let edges: Vec<Edge> = s
        .chars()
        .filter(|c| !matches!(c, ',' | ' ' | '-'))
        .map(|c| Edge::from_char(c).ok_or_else(|| BagaError::param(format!("unknown edge `{c}`"))))
        .collect::<Result<_>>()?;
    let order: [Edge; 3] = edges
        .try_into()
        .map_err(|_| BagaError::param(format!("segment order `{s}` must name three edges")))?;
    if order[0] == order[1] || order[0] == order[2] || order[1] == order[2] {
        return Err(BagaError::param(format!("segment order `{s}` is not a permutation")));
    }
    Ok(order)
}

pub fn format_segment_order(order: &[Edge; 3]) -> String {
    order
        .iter()
        .map(|e| e.as_char().to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schema {
    Binary {
        length: usize,
    },
    Segmented {
        prefix: Vec<u8>,
        segment_count: usize,
        segment_length: usize,
        separator: u8,
    },
}

impl Schema {
    /// The Hin/hix layout: prefix {0,1,4}, three 3-symbol segments, HixC separators.
    pub fn hin_hix() -> Schema {
        Schema::Segmented {
            prefix: vec![GeneCode::Promoter.code(), GeneCode::Rbs.code(), GeneCode::Rfp5.code()],
            segment_count: 3,
            segment_length: 3,
            separator: GeneCode::HixC.code(),
        }
    }

    /// Total symbol count. Segmented plasmids carry one more separator than
    /// segments (each segment is bracketed on both sides).
    pub fn len(&self) -> usize {
        match self {
            Schema::Binary { length } => *length,
            Schema::Segmented {
                prefix,
                segment_count,
                segment_length,
                ..
            } => prefix.len() + segment_count * (segment_length + 1) + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Schema::Binary { .. })
    }

    /// Index range of segment `i` (segmented schema only).
    pub fn segment_range(&self, i: usize) -> Option<Range<usize>> {
        match self {
            Schema::Segmented {
                prefix,
                segment_count,
                segment_length,
                ..
            } if i < *segment_count => {
                let start = prefix.len() + 1 + i * (segment_length + 1);
                Some(start..start + segment_length)
            }
            _ => None,
        }
    }

    pub fn separator_positions(&self) -> Vec<usize> {
        match self {
            Schema::Segmented {
                prefix,
                segment_count,
                segment_length,
                ..
            } => (0..=*segment_count)
                .map(|j| prefix.len() + j * (segment_length + 1))
                .collect(),
            Schema::Binary { .. } => Vec::new(),
        }
    }

    /// Positions the element-mode recombinase may exchange: everything inside
    /// a segment, never the prefix or a HixC site.
    pub fn element_loci(&self) -> Vec<usize> {
        match self {
            Schema::Segmented { segment_count, .. } => (0..*segment_count)
                .flat_map(|i| self.segment_range(i).unwrap())
                .collect(),
            Schema::Binary { .. } => Vec::new(),
        }
    }

    fn validate(&self, symbols: &[u8]) -> Result<()> {
        if symbols.len() != self.len() {
            return Err(BagaError::Schema(format!(
                "expected {} symbols, found {}",
                self.len(),
                symbols.len()
            )));
        }
        match self {
            Schema::Binary { .. } => {
                if let Some(s) = symbols.iter().find(|&&s| s > 1) {
                    return Err(BagaError::Schema(format!("non-binary symbol {s}")));
                }
            }
            Schema::Segmented { prefix, separator, .. } => {
                if &symbols[..prefix.len()] != prefix.as_slice() {
                    return Err(BagaError::Schema("prefix mismatch".into()));
                }
                for p in self.separator_positions() {
                    if symbols[p] != *separator {
                        return Err(BagaError::Schema(format!("position {p} is not a separator")));
                    }
                }
                if let Some(s) = symbols.iter().find(|&&s| GeneCode::from_code(s).is_none()) {
                    return Err(BagaError::Schema(format!("unknown gene code {s}")));
                }
            }
        }
        Ok(())
    }
}

/// How a fresh binary plasmid is filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitInit {
    Zeros,
    RandomUniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecombinationMode {
    /// Loci are whole segments; an exchange swaps two segments.
    Segment,
    /// Loci are single positions inside segments.
    Element,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recombinase {
    /// Probability that the operator fires on a given plasmid.
    pub p_hix: f64,
    /// Inner acceptance probability for the exchange once fired.
    pub p_accept: f64,
    pub mode: RecombinationMode,
    /// Segment mode only: reverse the chosen segment instead of swapping.
    pub invert_segments: bool,
}

impl Recombinase {
    pub fn new(p_hix: f64) -> Self {
        Recombinase {
            p_hix,
            p_accept: 0.5,
            mode: RecombinationMode::Segment,
            invert_segments: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("p_hix", self.p_hix)?;
        check_probability("p_accept", self.p_accept)
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(BagaError::param(format!("{name}={p} is outside [0, 1]")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plasmid {
    symbols: Vec<u8>,
    schema: Arc<Schema>,
}

impl Plasmid {
    pub fn new(symbols: Vec<u8>, schema: Arc<Schema>) -> Result<Self> {
        schema.validate(&symbols)?;
        Ok(Plasmid { symbols, schema })
    }

    pub fn binary(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(BagaError::InvalidLength(0));
        }
        Plasmid::new(bits.to_vec(), Arc::new(Schema::Binary { length: bits.len() }))
    }

    pub fn new_binary<R: Rng + ?Sized>(length: usize, init: BitInit, rng: &mut R) -> Result<Self> {
        if length == 0 {
            return Err(BagaError::InvalidLength(0));
        }
        let symbols = match init {
            BitInit::Zeros => vec![0; length],
            BitInit::RandomUniform => (0..length).map(|_| u8::from(rng.random_bool(0.5))).collect(),
        };
        Ok(Plasmid {
            symbols,
            schema: Arc::new(Schema::Binary { length }),
        })
    }

    /// MSB-first encoding of `value` into `length` bits.
    pub fn encode_unsigned(value: u64, length: usize) -> Result<Self> {
        if length == 0 || length > 64 {
            return Err(BagaError::InvalidLength(length));
        }
        if length < 64 && value >> length != 0 {
            return Err(BagaError::param(format!("{value} does not fit in {length} bits")));
        }
        let bits: Vec<u8> = (0..length).map(|i| ((value >> (length - 1 - i)) & 1) as u8).collect();
        Plasmid::binary(&bits)
    }

    /// Concatenates the Hin/hix prefix with the given edge segments.
    pub fn new_hamiltonian(order: [Edge; 3]) -> Self {
        let schema = Schema::hin_hix();
        let sep = GeneCode::HixC.code();
        let mut symbols = vec![0, 1, 4, sep];
        for edge in order {
            symbols.extend_from_slice(&edge.symbols());
            symbols.push(sep);
        }
        debug_assert_eq!(symbols.len(), schema.len());
        Plasmid {
            symbols,
            schema: Arc::new(schema),
        }
    }

    pub fn random_hamiltonian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let orders = all_segment_orders();
        Plasmid::new_hamiltonian(orders[rng.random_range(0..orders.len())])
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    fn require_binary(&self) -> Result<()> {
        if self.schema.is_binary() {
            Ok(())
        } else {
            Err(BagaError::Schema("operation requires a binary plasmid".into()))
        }
    }

    fn require_segmented(&self) -> Result<()> {
        if self.schema.is_binary() {
            Err(BagaError::Schema("operation requires a segmented plasmid".into()))
        } else {
            Ok(())
        }
    }

    /// Integer value of the bits in `range`, most significant bit first.
    pub fn decode_unsigned(&self, range: Range<usize>) -> Result<u64> {
        self.require_binary()?;
        if range.start > range.end || range.end > self.len() || range.len() > 64 {
            return Err(BagaError::param(format!(
                "bit range {range:?} out of bounds for length {}",
                self.len()
            )));
        }
        Ok(self.symbols[range]
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b)))
    }

    /// Flips each bit independently with probability `p_m`.
    pub fn flip_bit_mutation<R: Rng + ?Sized>(&self, p_m: f64, rng: &mut R) -> Result<Plasmid> {
        self.require_binary()?;
        check_probability("p_m", p_m)?;
        let symbols = self
            .symbols
            .iter()
            .map(|&b| if rng.random_bool(p_m) { b ^ 1 } else { b })
            .collect();
        Ok(Plasmid {
            symbols,
            schema: Arc::clone(&self.schema),
        })
    }

    /// Current segment order, if every segment holds an intact edge.
    pub fn segment_order(&self) -> Option<[Edge; 3]> {
        if self.schema.is_binary() {
            return None;
        }
        let mut order = [Edge::A; 3];
        for (i, slot) in order.iter_mut().enumerate() {
            *slot = Edge::from_symbols(&self.symbols[self.schema.segment_range(i)?])?;
        }
        Some(order)
    }

    /// Exchanges segments `i` and `j`.
    pub fn swap_segments(&self, i: usize, j: usize) -> Result<Plasmid> {
        self.require_segmented()?;
        let (ri, rj) = match (self.schema.segment_range(i), self.schema.segment_range(j)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(BagaError::param(format!("segment index out of range: {i}, {j}"))),
        };
        let mut symbols = self.symbols.clone();
        for (a, b) in ri.zip(rj) {
            symbols.swap(a, b);
        }
        Ok(Plasmid {
            symbols,
            schema: Arc::clone(&self.schema),
        })
    }

    fn invert_segment(&self, i: usize) -> Plasmid {
        let mut symbols = self.symbols.clone();
        if let Some(r) = self.schema.segment_range(i) {
            symbols[r].reverse();
        }
        Plasmid {
            symbols,
            schema: Arc::clone(&self.schema),
        }
    }

    /// Hin-hixC recombination. Fires with probability `p_hix`; once fired, a
    /// first locus is drawn, then the exchange with a second, distinct locus
    /// happens only if a uniform draw falls below `p_accept`.
    pub fn hin_hix_recombinase<R: Rng + ?Sized>(&self, op: &Recombinase, rng: &mut R) -> Result<Plasmid> {
        self.require_segmented()?;
        op.validate()?;
        if !rng.random_bool(op.p_hix) {
            return Ok(self.clone());
        }
        match op.mode {
            RecombinationMode::Segment => {
                let Schema::Segmented { segment_count, .. } = *self.schema else {
                    unreachable!()
                };
                let x = rng.random_range(0..segment_count);
                let u: f64 = rng.random();
                if u >= op.p_accept || segment_count < 2 {
                    return Ok(self.clone());
                }
                if op.invert_segments {
                    return Ok(self.invert_segment(x));
                }
                let y = other_index(x, segment_count, rng);
                self.swap_segments(x, y)
            }
            RecombinationMode::Element => {
                let loci = self.schema.element_loci();
                let x = rng.random_range(0..loci.len());
                let u: f64 = rng.random();
                if u >= op.p_accept || loci.len() < 2 {
                    return Ok(self.clone());
                }
                let y = other_index(x, loci.len(), rng);
                let mut symbols = self.symbols.clone();
                symbols.swap(loci[x], loci[y]);
                Ok(Plasmid {
                    symbols,
                    schema: Arc::clone(&self.schema),
                })
            }
        }
    }

    /// Reads the reporter genes. Transcription starts at the first promoter and
    /// stops at the first terminator; a red (4,2,5) or green (6,2,7) junction
    /// counts only inside that window.
    pub fn detect_fluorescence(&self) -> Result<Fluorescence> {
        self.require_segmented()?;
        let Some(start) = self.symbols.iter().position(|&s| s == GeneCode::Promoter.code()) else {
            return Ok(Fluorescence::None);
        };
        let tail = &self.symbols[start..];
        let end = tail
            .iter()
            .position(|&s| s == GeneCode::Terminator.code())
            .unwrap_or(tail.len());
        let window = &tail[..end];
        let has = |pat: [u8; 3]| window.windows(3).any(|w| w == pat);
        Ok(Fluorescence::from_flags(has(RED_JUNCTION), has(GREEN_JUNCTION)))
    }

    /// Compact text form: bits for binary plasmids, digit codes otherwise.
    pub fn genome_string(&self) -> String {
        self.symbols.iter().map(|s| char::from(b'0' + s)).collect()
    }
}

pub const RED_JUNCTION: [u8; 3] = [4, 2, 5];
pub const GREEN_JUNCTION: [u8; 3] = [6, 2, 7];

fn other_index<R: Rng + ?Sized>(x: usize, n: usize, rng: &mut R) -> usize {
    let y = rng.random_range(0..n - 1);
    if y >= x {
        y + 1
    } else {
        y
    }
}

impl fmt::Display for Plasmid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.genome_string())
    }
}
