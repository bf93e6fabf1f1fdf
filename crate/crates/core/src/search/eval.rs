//! Batch evaluation of candidate programs against a concept's examples.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::emulator::{execute_untraced, Program};
use crate::world::{is_solved, match_objects, Concept, MatchMode, ObjectId};

/// Result of running one program on every example of a concept.
#[derive(Debug, Clone)]
pub(crate) struct Evaluated {
    pub program: Program,
    pub dl: f64,
    /// Execution failed on at least one example.
    pub error: bool,
    /// Every example's working scene reproduces its target.
    pub solved: bool,
    /// Per example: target-side ids covered by the object matching. Because
    /// admissibility requires equal position, the maximum matching is unique
    /// and these sets are canonical.
    pub matched: Vec<BTreeSet<ObjectId>>,
}

pub(crate) struct Evaluator<'a> {
    concept: &'a Concept,
    match_mode: MatchMode,
    exec_counter: Option<Arc<AtomicU64>>,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        concept: &'a Concept,
        match_mode: MatchMode,
        exec_counter: Option<Arc<AtomicU64>>,
        workers: usize,
    ) -> Evaluator<'a> {
        #[cfg(not(feature = "parallel"))]
        let _ = workers;
        Evaluator {
            concept,
            match_mode,
            exec_counter,
            #[cfg(feature = "parallel")]
            pool: if workers > 1 {
                Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .build()
                        .expect("building evaluation thread pool"),
                )
            } else {
                None
            },
        }
    }

    /// Evaluates every candidate, preserving input order so downstream
    /// processing is identical with any worker count.
    pub fn evaluate_batch(&self, batch: Vec<(Program, f64)>) -> Vec<Evaluated> {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| {
                batch
                    .into_par_iter()
                    .map(|(p, dl)| self.evaluate_one(p, dl))
                    .collect()
            });
        }
        batch
            .into_iter()
            .map(|(p, dl)| self.evaluate_one(p, dl))
            .collect()
    }

    pub fn evaluate_one(&self, program: Program, dl: f64) -> Evaluated {
        if let Some(counter) = &self.exec_counter {
            counter.fetch_add(1, Ordering::Relaxed);
        }
        let mut matched = Vec::with_capacity(self.concept.examples.len());
        let mut solved = true;
        for ex in &self.concept.examples {
            let result = execute_untraced(&program, &ex.input);
            if !result.outcome.is_ok() {
                return Evaluated {
                    program,
                    dl,
                    error: true,
                    solved: false,
                    matched: Vec::new(),
                };
            }
            let state = &result.final_state;
            let report = match_objects(&state.working, &ex.output, state.held, self.match_mode)
                .expect("examples share dimensions by construction");
            matched.push(report.matched_target_ids());
            solved = solved
                && is_solved(&state.working, &ex.output, state.held)
                    .expect("examples share dimensions by construction");
        }
        Evaluated {
            program,
            dl,
            error: false,
            solved,
            matched,
        }
    }
}
