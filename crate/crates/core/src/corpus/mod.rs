//! Concept corpus: seeded template generators, hand-built diagnostic
//! fixtures, the built-in transition-training set, and file I/O.
//!
//! A concept is a set of input/output scene pairs; its generator also
//! returns the ground-truth program the outputs were executed from. Output
//! scenes are never written by hand — they are always what the ground truth
//! actually produces, so the corpus cannot drift from VM semantics.

mod fixtures;
mod io;
mod templates;
mod training;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::emulator::{ParseError, Program};
use crate::world::{Concept, WorldError};

pub use fixtures::FIXTURE_NAMES;
pub use io::{
    load_concept, load_manifest, load_program, save_concept, save_manifest, save_program,
    Manifest, ManifestEntry,
};
pub use templates::TEMPLATE_NAMES;
pub use training::{default_mask, default_model, training_programs};

/// Attempt cap for rejection sampling inside [`generate`].
pub const MAX_GENERATION_ATTEMPTS: usize = 1000;

/// A concept together with the program its outputs were derived from.
#[derive(Debug, Clone)]
pub struct GeneratedConcept {
    pub concept: Concept,
    pub ground_truth: Program,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("template `{template}` produced no valid concept in {attempts} attempts")]
    Unsatisfiable { template: String, attempts: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Generates a concept from a seeded template. Deterministic in
/// `(template, seed)`.
pub fn generate(template: &str, seed: u64) -> Result<GeneratedConcept, CorpusError> {
    let gen =
        templates::generator(template).ok_or_else(|| CorpusError::UnknownTemplate(template.into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        if let Some((examples, ground_truth)) = gen(&mut rng) {
            let concept = Concept::new(format!("{template}-{seed}"), examples)
                .expect("generated examples are well-formed");
            return Ok(GeneratedConcept {
                concept,
                ground_truth,
            });
        }
    }
    Err(CorpusError::Unsatisfiable {
        template: template.into(),
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

/// Returns a fixed diagnostic concept by name.
pub fn fixture(name: &str) -> Result<GeneratedConcept, CorpusError> {
    fixtures::fixture(name).ok_or_else(|| CorpusError::UnknownFixture(name.into()))
}
