//! Seeded synthetic triage tasks with known structure, for tests and
//! benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::featurizer::{FeatureFamily, FeatureKind, FeatureManifest, FeatureVector, ManifestEntry};
use crate::hash::derive_seed;
use crate::trainer::WarningInput;
use crate::warning_store::{stratified_split, Label, Level, Span, Split, SplitAssignment, SplitRatios, WarningId, WarningRecord};

pub const NOISE_FEATURES: usize = 6;

/// Whether a warning's features reveal its label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subclass {
    Clear,
    Ambiguous,
}

#[derive(Debug, Clone)]
pub struct SyntheticTask {
    pub manifest: FeatureManifest,
    pub records: Vec<WarningRecord>,
    pub vectors: Vec<FeatureVector>,
    pub subclass: Vec<Subclass>,
    pub splits: SplitAssignment,
}

/// Slots: `signal`, `clarity`, then `noise_0..`.
pub fn synthetic_manifest() -> FeatureManifest {
    let mut names = vec!["signal", "clarity"];
    names.extend(["noise_0", "noise_1", "noise_2", "noise_3", "noise_4", "noise_5"]);
    let entries = names
        .into_iter()
        .map(|name| ManifestEntry { name, family: FeatureFamily::Structural, kind: FeatureKind::Ratio })
        .collect();
    FeatureManifest::from_entries(1, entries)
}

fn record(i: usize, label: Label) -> WarningRecord {
    let span = Span { start_line: i as u32 + 1, start_col: 1, end_line: i as u32 + 1, end_col: 2 };
    let mut r = WarningRecord::new(Level::Warning, "UnsafeDataflow", None, "synthetic warning", "synthetic-0.1.0/src/lib.rs", span, "");
    r.label = Some(label);
    r
}

impl SyntheticTask {
    /// `(subclass, label)` per warning; features drawn from `seed`.
    fn build(spec: &[(Subclass, Label)], seed: u64) -> Self {
        let manifest = synthetic_manifest();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x7379_6e74]));
        let mut records = Vec::with_capacity(spec.len());
        let mut vectors = Vec::with_capacity(spec.len());
        for (i, &(sub, label)) in spec.iter().enumerate() {
            let r = record(i, label);
            let signal = match sub {
                Subclass::Clear => f64::from(u8::from(label.is_positive())),
                Subclass::Ambiguous => rng.random::<f64>(),
            };
            let clarity = f64::from(u8::from(sub == Subclass::Clear));
            let mut values = vec![signal, clarity];
            values.extend((0..NOISE_FEATURES).map(|_| rng.random::<f64>()));
            vectors.push(FeatureVector { warning_id: r.id, manifest_digest: manifest.digest, values });
            records.push(r);
        }
        let splits = stratified_split(&records, SplitRatios::default(), seed).expect("synthetic records are labeled and unique");
        Self { manifest, records, vectors, subclass: spec.iter().map(|s| s.0).collect(), splits }
    }

    /// `signal` equals the label; everything else is noise.
    pub fn separable(n: usize, positives: usize, seed: u64) -> Self {
        let spec: Vec<_> = (0..n)
            .map(|i| (Subclass::Clear, if i < positives { Label::TruePositive } else { Label::FalsePositive }))
            .collect();
        Self::build(&spec, seed)
    }

    /// A clear subclass whose `signal` equals the label and an ambiguous
    /// subclass (`clarity` 0) whose features carry no label information.
    pub fn mixed(clear: usize, clear_positives: usize, ambiguous: usize, ambiguous_positives: usize, seed: u64) -> Self {
        let mut spec = Vec::with_capacity(clear + ambiguous);
        for i in 0..clear {
            spec.push((Subclass::Clear, if i < clear_positives { Label::TruePositive } else { Label::FalsePositive }));
        }
        for i in 0..ambiguous {
            spec.push((Subclass::Ambiguous, if i < ambiguous_positives { Label::TruePositive } else { Label::FalsePositive }));
        }
        Self::build(&spec, seed)
    }

    pub fn label(&self, i: usize) -> Label {
        self.records[i].label.expect("synthetic records are labeled")
    }

    /// Indices of warnings in `split`, in record order.
    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.records.len()).filter(|&i| self.splits.get(self.records[i].id) == Some(split)).collect()
    }

    pub fn inputs(&self, split: Split) -> Vec<WarningInput<'_>> {
        self.indices(split)
            .into_iter()
            .map(|i| WarningInput { vector: &self.vectors[i], label: Some(self.label(i)), record: Some(&self.records[i]) })
            .collect()
    }

    pub fn id(&self, i: usize) -> WarningId {
        self.records[i].id
    }
}
