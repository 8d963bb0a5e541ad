//! Chords as points of `Z^n` (MIDI numbers) and the three concept levels
//! built from octave shifts, voice permutations and transposition.

use std::collections::BTreeMap;
use std::io::BufRead;

use crate::engine::{induction_family, ExpansionPolicy, Schedule};
use crate::error::{Error, Result};
use crate::generators::{Generator, GeneratorSet};
use crate::infolattice::Measure;
use crate::matrix::IntMatrix;
use crate::partition::{Partition, Relation};
use crate::space::HypercubeWindow;
use crate::transform::{AffineTransform, Transform};

pub const PITCH_NAMES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

/// Allowed MIDI values, inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstrumentRange {
    pub lo: i64,
    pub hi: i64,
}

impl Default for InstrumentRange {
    fn default() -> Self {
        InstrumentRange { lo: 0, hi: 127 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chord {
    midi: Vec<i64>,
}

impl Chord {
    pub fn new(midi: Vec<i64>, range: &InstrumentRange) -> Result<Self> {
        if midi.is_empty() {
            return Err(Error::InvalidArgument("chord needs at least one voice".into()));
        }
        if midi.iter().any(|&m| m < range.lo || m > range.hi) {
            return Err(Error::OutOfRange { midi, lo: range.lo, hi: range.hi });
        }
        Ok(Chord { midi })
    }

    pub fn midi(&self) -> &[i64] {
        &self.midi
    }

    pub fn pitch_classes(&self) -> Vec<i64> {
        self.midi.iter().map(|m| m.rem_euclid(12)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConceptLevel {
    /// Octave shifts per voice.
    PitchClassVector,
    /// Also voice permutations.
    PitchClassMultiset,
    /// Also common transposition.
    TranspositionClass,
}

impl ConceptLevel {
    pub const ALL: [ConceptLevel; 3] =
        [ConceptLevel::PitchClassVector, ConceptLevel::PitchClassMultiset, ConceptLevel::TranspositionClass];
}

pub fn pitch_name(m: i64) -> &'static str {
    PITCH_NAMES[m.rem_euclid(12) as usize]
}

/// Text label shared by exactly the chords of one concept cell.
pub fn canonical_label(c: &Chord, level: ConceptLevel) -> String {
    match level {
        ConceptLevel::PitchClassVector => {
            format!("({})", c.midi.iter().map(|&m| pitch_name(m)).collect::<Vec<_>>().join(","))
        }
        ConceptLevel::PitchClassMultiset => {
            let mut names: Vec<&str> = c.midi.iter().map(|&m| pitch_name(m)).collect();
            names.sort_unstable();
            format!("{{{}}}", names.join(","))
        }
        ConceptLevel::TranspositionClass => {
            let pcs = c.pitch_classes();
            let best = (0..12)
                .map(|t| {
                    let mut v: Vec<i64> = pcs.iter().map(|p| (p + t) % 12).collect();
                    v.sort_unstable();
                    v
                })
                .min()
                .expect("twelve transpositions");
            format!("<{}>", best.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
        }
    }
}

/// Octave shifts `t(12 e_i)`, adjacent voice swaps and `t(1,..,1)`, with the
/// masks of the three concept levels.
pub fn concept_generators(n: usize) -> Result<(GeneratorSet, [u64; 3])> {
    if n == 0 {
        return Err(Error::InvalidArgument("chords need at least one voice".into()));
    }
    let mut gens = Vec::new();
    for i in 0..n {
        let mut u = vec![0i64; n];
        u[i] = 12;
        gens.push(Generator::new(Transform::translation(u), format!("oct{}", i + 1)).with_period(12));
    }
    for i in 0..n - 1 {
        let m = IntMatrix::swap(n, i, i + 1);
        gens.push(Generator::new(Transform::Affine(AffineTransform::linear(m)?), format!("swap({},{})", i + 1, i + 2)));
    }
    gens.push(Generator::new(Transform::translation(vec![1; n]), "transpose".to_string()));
    let s1 = (1u64 << n) - 1;
    let s2 = (1u64 << (2 * n - 1)) - 1;
    let s3 = (1u64 << (2 * n)) - 1;
    Ok((GeneratorSet::affine(format!("chords(n={n})"), n, gens)?, [s1, s2, s3]))
}

/// Reads comma-separated rows of `n` MIDI numbers; blank lines and lines
/// starting with `#` are skipped.
pub fn load_chords<R: BufRead>(reader: R, n: usize, range: &InstrumentRange) -> Result<Vec<Chord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: i + 1, msg };
        let values: Vec<i64> = text
            .split(',')
            .map(|s| s.trim().parse::<i64>().map_err(|e| parse_err(format!("{s:?}: {e}"))))
            .collect::<Result<_>>()?;
        if values.len() != n {
            return Err(parse_err(format!("expected {n} values, found {}", values.len())));
        }
        out.push(Chord::new(values, range).map_err(|e| parse_err(e.to_string()))?);
    }
    if out.is_empty() {
        return Err(Error::NoData);
    }
    Ok(out)
}

/// Bounding box of the chords, axis by axis.
pub fn chord_window(chords: &[Chord]) -> Result<HypercubeWindow> {
    let first = chords.first().ok_or(Error::NoData)?;
    let mut lo = first.midi.clone();
    let mut hi = first.midi.clone();
    for c in chords {
        if c.midi.len() != lo.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: c.midi.len() });
        }
        for (a, &m) in c.midi.iter().enumerate() {
            lo[a] = lo[a].min(m);
            hi[a] = hi[a].max(m);
        }
    }
    HypercubeWindow::new(lo, hi)
}

/// Normalized chord counts on `window` (the chords' bounding box if `None`).
pub fn empirical_measure(chords: &[Chord], window: Option<&HypercubeWindow>) -> Result<Measure> {
    let window = match window {
        Some(w) => w.clone(),
        None => chord_window(chords)?,
    };
    let mut counts = vec![0.0; window.len()];
    for c in chords {
        let i = window
            .index_of(&c.midi)
            .ok_or_else(|| Error::InvalidArgument(format!("chord {:?} outside window {window}", c.midi)))?;
        counts[i] += 1.0;
    }
    Measure::from_counts(&window, &counts)
}

/// Chord, then the three labels, tab-separated.
pub fn label_report(chords: &[Chord]) -> String {
    let mut s = String::from("chord\tpitch_class_vector\tpitch_class_multiset\ttransposition_class\n");
    for c in chords {
        let midi: Vec<String> = c.midi.iter().map(i64::to_string).collect();
        s.push_str(&midi.join(","));
        for level in ConceptLevel::ALL {
            s.push('\t');
            s.push_str(&canonical_label(c, level));
        }
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug)]
pub struct ChainReport {
    pub partitions: [Partition; 3],
    /// Labels induce exactly the engine cells, per level.
    pub label_agreement: [bool; 3],
    pub chain_holds: bool,
    pub approximate: usize,
    pub failures: Vec<String>,
}

impl ChainReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Partition induced by equal labels.
pub fn label_partition(window: &HypercubeWindow, level: ConceptLevel) -> Result<Partition> {
    let mut ids: BTreeMap<String, u32> = BTreeMap::new();
    let mut raw = Vec::with_capacity(window.len());
    let range = InstrumentRange { lo: i64::MIN, hi: i64::MAX };
    for p in window.points() {
        let label = canonical_label(&Chord::new(p.0, &range)?, level);
        let next = ids.len() as u32;
        raw.push(*ids.entry(label).or_insert(next));
    }
    Partition::from_labels(window, &raw)
}

/// Runs the engine for the three concept levels on `window`, checks the
/// coarsening chain and that labels reproduce the engine cells.
pub fn concept_chain_check(window: &HypercubeWindow, policy: &ExpansionPolicy) -> Result<ChainReport> {
    let (set, masks) = concept_generators(window.dim())?;
    let family = induction_family(&set, window, policy, &Schedule::Explicit(masks.to_vec()))?;
    let parts: Vec<Partition> = masks.iter().map(|m| family.partition(*m).expect("scheduled").clone()).collect();
    let mut failures = Vec::new();
    let mut label_agreement = [false; 3];
    for (i, level) in ConceptLevel::ALL.into_iter().enumerate() {
        label_agreement[i] = label_partition(window, level)? == parts[i];
        if !label_agreement[i] {
            failures.push(format!("labels disagree with engine cells at {level:?}"));
        }
    }
    let mut chain_holds = true;
    for i in 0..2 {
        let r = parts[i].relate(&parts[i + 1])?;
        if !matches!(r, Relation::Finer | Relation::Equal) {
            chain_holds = false;
            failures.push(format!("level {} is {r} relative to level {}", i + 1, i + 2));
        }
    }
    let approximate = family.approximate_count();
    let partitions = [parts[0].clone(), parts[1].clone(), parts[2].clone()];
    Ok(ChainReport { partitions, label_agreement, chain_holds, approximate, failures })
}
