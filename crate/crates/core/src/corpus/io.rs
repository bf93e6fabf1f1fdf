//! File formats: concepts as JSON, programs as one instruction per line,
//! plus a small manifest tying generated files to their template and seed.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::emulator::{parse_program, Program};
use crate::world::Concept;

use super::CorpusError;

pub fn save_concept(path: &Path, concept: &Concept) -> Result<(), CorpusError> {
    let mut text = serde_json::to_string_pretty(concept)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_concept(path: &Path) -> Result<Concept, CorpusError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn save_program(path: &Path, program: &Program) -> Result<(), CorpusError> {
    let mut text = String::new();
    for inst in program.instructions() {
        text.push_str(&inst.to_string());
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn load_program(path: &Path) -> Result<Program, CorpusError> {
    Ok(parse_program(&fs::read_to_string(path)?)?)
}

/// One generated artifact in a corpus directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    /// Template or fixture the concept came from.
    pub source: String,
    /// Seed used for generation; absent for fixed diagnostics.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub concept_file: String,
    pub ground_truth_file: String,
    /// Per-concept program budget; benchmarks fall back to their own
    /// default when absent.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub budget: Option<u64>,
}

/// Index of a corpus directory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

pub fn save_manifest(path: &Path, manifest: &Manifest) -> Result<(), CorpusError> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_manifest(path: &Path) -> Result<Manifest, CorpusError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
