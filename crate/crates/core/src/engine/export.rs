//! Family directories: `manifest.json` plus one `partition_<mask>.json` per entry.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::family::{AbstractionFamily, ExpansionPolicy, FamilyEntry, Provenance};
use crate::error::{Error, Result};
use crate::generators::GeneratorSet;
use crate::partition::Partition;
use crate::space::HypercubeWindow;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Serialize, Deserialize)]
struct Manifest {
    generators: GeneratorSet,
    window: HypercubeWindow,
    policy: ExpansionPolicy,
    entries: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    mask: u64,
    subset: Vec<String>,
    file: String,
    cells: usize,
    k: usize,
    approximate: bool,
    #[serde(default)]
    fixed_level: bool,
    provenance: Provenance,
}

pub fn partition_file_name(mask: u64) -> String {
    format!("partition_{mask}.json")
}

impl AbstractionFamily {
    /// Writes the manifest and one partition file per entry into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut entries = Vec::with_capacity(self.entries.len());
        for (&mask, e) in &self.entries {
            let file = partition_file_name(mask);
            fs::write(dir.join(&file), e.partition.to_json()?)?;
            entries.push(ManifestEntry {
                mask,
                subset: self.generators.subset_labels(mask),
                file,
                cells: e.partition.cell_count(),
                k: e.k,
                approximate: e.approximate,
                fixed_level: e.fixed_level,
                provenance: e.provenance,
            });
        }
        let manifest = Manifest {
            generators: self.generators.clone(),
            window: self.window.clone(),
            policy: self.policy.clone(),
            entries,
        };
        fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    /// Loads a directory written by [`AbstractionFamily::write_dir`].
    pub fn read_dir(dir: &Path) -> Result<AbstractionFamily> {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
        let full = manifest.generators.full_mask();
        let mut entries = BTreeMap::new();
        for e in manifest.entries {
            if e.mask & !full != 0 {
                return Err(Error::InvalidArgument(format!("manifest mask {} exceeds the generator set", e.mask)));
            }
            let partition = Partition::from_json(&fs::read_to_string(dir.join(&e.file))?)?;
            if partition.window() != &manifest.window {
                return Err(Error::WindowMismatch);
            }
            entries.insert(
                e.mask,
                FamilyEntry { partition, provenance: e.provenance, k: e.k, approximate: e.approximate, fixed_level: e.fixed_level },
            );
        }
        Ok(AbstractionFamily { generators: manifest.generators, window: manifest.window, policy: manifest.policy, entries })
    }
}

#[cfg(test)]
mod tests {
    use crate::engine::{induction_family, AbstractionFamily, ExpansionPolicy, Schedule};
    use crate::generators::standard_generators;
    use crate::space::HypercubeWindow;

    #[test]
    fn round_trip() {
        let set = standard_generators(1, 2).unwrap();
        let w = HypercubeWindow::centered(1, 2).unwrap();
        let fam = induction_family(&set, &w, &ExpansionPolicy::default(), &Schedule::All).unwrap();
        let dir = tempfile::tempdir().unwrap();
        fam.write_dir(dir.path()).unwrap();
        let back = AbstractionFamily::read_dir(dir.path()).unwrap();
        assert_eq!(back.entries(), fam.entries());
        assert_eq!(back.generators(), fam.generators());
        assert_eq!(back.policy(), fam.policy());
    }
}
