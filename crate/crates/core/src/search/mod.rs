//! Program induction by description-length-ordered search.
//!
//! [`induce`] recovers a program that maps every example input of a
//! [`Concept`] to its output. Candidates are explored best-first by
//! description length under a [`TransitionModel`](crate::model::TransitionModel)
//! and per-concept argument prior — a Dijkstra traversal of the program
//! prefix tree, since appending an instruction only ever adds cost.
//!
//! In the factorized mode the search exploits object structure: whenever a
//! candidate newly places at least one object in every example without
//! disturbing previously placed ones, it is adopted as a sub-goal root and
//! the search restarts from it, so a k-object concept costs roughly k short
//! searches instead of one deep one. Candidates that regress placed objects
//! or raise execution errors are pruned. When progress stalls, a mutation
//! pass proposes single-edit variants of the current root (notably paired
//! loop insertions, which roll up unrolled bodies).
//!
//! Solutions are not returned the moment they appear: the search settles
//! until no frontier entry could still beat the best solution's description
//! length, so (restarts and mutation aside) the returned program is
//! minimum-DL among all solutions.

mod engine;
mod eval;
mod mutate;

pub use mutate::mutants;

use std::collections::HashSet;
use std::sync::atomic::AtomicU64;
use std::sync::Arc;

use crate::emulator::Program;
use crate::model::{TransitionModel, DEFAULT_EPSILON_ARG};
use crate::world::{MatchMode, ObjectId};

pub use crate::world::{Concept, Example};

/// Default evaluation budget.
pub const DEFAULT_BUDGET: u64 = 4000;

/// How candidates relate to concept structure during search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Pure DL-ordered enumeration; only error prefixes are pruned (an
    /// erroring prefix errors under every extension, so this is lossless).
    Naive,
    /// Object-factorized sub-goaling with pruning and mutation.
    Factorized,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Maximum number of candidate program evaluations.
    pub n_progs: u64,
    pub mode: SearchMode,
    /// Enables the single-edit mutation passes (factorized mode only).
    pub mutation_enabled: bool,
    /// Matching discipline for progress tracking and pruning.
    pub match_mode: MatchMode,
    /// Floor probability for instruction arguments absent from the concept's
    /// input/output differences.
    pub epsilon_arg: f64,
    /// Recorded for reproducibility; the search itself is deterministic.
    pub seed: u64,
    /// Worker threads for batch evaluation. Results are identical for any
    /// value; more workers only evaluate a batch concurrently.
    pub parallel_workers: usize,
    /// On failure, retry with the first sub-goal's object signature banned,
    /// forcing a different placement order (budget is shared across tries).
    pub order_retry: bool,
    /// Prune against the parent candidate's placed objects instead of the
    /// current sub-goal root's.
    pub prune_vs_parent: bool,
    /// Approximate memory cap for the seen-program set used to deduplicate
    /// mutants; deduplication degrades (never breaks) past the cap.
    pub seen_cap_bytes: usize,
    /// Record the description length of every frontier pop.
    pub track_pops: bool,
    /// Optional external counter incremented once per program evaluation,
    /// at the evaluation site; lets callers audit budget accounting.
    pub exec_counter: Option<Arc<AtomicU64>>,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            n_progs: DEFAULT_BUDGET,
            mode: SearchMode::Factorized,
            mutation_enabled: true,
            match_mode: MatchMode::ByProperty,
            epsilon_arg: DEFAULT_EPSILON_ARG,
            seed: 0,
            parallel_workers: 1,
            order_retry: false,
            prune_vs_parent: false,
            seen_cap_bytes: 1 << 30,
            track_pops: false,
            exec_counter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Solved,
    BudgetExhausted,
    FrontierExhausted,
}

/// How a sub-goal root was adopted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgoalKind {
    /// A search candidate newly placed objects in every example.
    Subgoal,
    /// A mutation-pass variant did.
    Mutation,
    /// A stored mutation variant was adopted after its line's frontier
    /// emptied.
    LineSwitch,
}

/// One sub-goal adoption.
#[derive(Debug, Clone)]
pub struct SubgoalRecord {
    pub root: Program,
    /// Per example: target objects newly placed relative to the previous
    /// root, in id order.
    pub newly_matched: Vec<Vec<ObjectId>>,
    /// Evaluations spent when this root was adopted.
    pub visited_at: u64,
    pub kind: SubgoalKind,
}

#[derive(Debug, Clone)]
pub struct InductionResult {
    pub status: SearchStatus,
    /// The solving program, when status is `Solved`.
    pub program: Option<Program>,
    /// Its description length.
    pub dl: Option<f64>,
    /// Program evaluations consumed.
    pub visited: u64,
    pub subgoal_history: Vec<SubgoalRecord>,
    pub mutation_rounds: u32,
    /// Error-free candidate that placed the most objects, for failure
    /// reports.
    pub best_partial: Option<Program>,
    /// Description length of each frontier pop, oldest first; filled only
    /// when [`SearchConfig::track_pops`] is set.
    pub pop_dls: Vec<f64>,
}

/// Runs the search configured by `config`.
pub fn induce(concept: &Concept, model: &TransitionModel, config: &SearchConfig) -> InductionResult {
    if config.order_retry && config.mode == SearchMode::Factorized {
        return induce_with_order_retry(concept, model, config);
    }
    let banned = HashSet::new();
    engine::Engine::new(concept, model, config, &banned).run(config.n_progs)
}

/// Convenience wrapper for the naive baseline.
pub fn induce_naive(
    concept: &Concept,
    model: &TransitionModel,
    config: &SearchConfig,
) -> InductionResult {
    let mut cfg = config.clone();
    cfg.mode = SearchMode::Naive;
    induce(concept, model, &cfg)
}

/// Splits the budget into slices; after each failed slice the first
/// sub-goal's newly-placed-object signature is banned, so the next slice
/// commits to a different object order. Stops early when no new signature
/// can be banned, giving the final slice the remaining budget.
fn induce_with_order_retry(
    concept: &Concept,
    model: &TransitionModel,
    config: &SearchConfig,
) -> InductionResult {
    let slice = (config.n_progs / 4).max(1);
    let mut banned: HashSet<Vec<Vec<ObjectId>>> = HashSet::new();
    let mut spent: u64 = 0;
    loop {
        let remaining = config.n_progs - spent;
        let first_signature_known = |r: &InductionResult| {
            r.subgoal_history
                .iter()
                .find(|s| s.kind == SubgoalKind::Subgoal)
                .map(|s| s.newly_matched.clone())
        };
        // When banning can no longer change anything, spend what is left in
        // one final slice.
        let this_budget = remaining.min(slice);
        let mut result =
            engine::Engine::new(concept, model, config, &banned).run(this_budget);
        spent += result.visited;
        result.visited = spent;
        if result.status == SearchStatus::Solved || spent >= config.n_progs {
            return result;
        }
        match first_signature_known(&result) {
            Some(sig) if !banned.contains(&sig) => {
                banned.insert(sig);
            }
            _ => {
                // Nothing new to ban; one last run with the full remainder.
                let mut last =
                    engine::Engine::new(concept, model, config, &banned).run(config.n_progs - spent);
                spent += last.visited;
                last.visited = spent;
                return last;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulator::{execute_untraced, ops};
    use crate::model::{train, Mask};
    use crate::world::{is_solved, Color, Scene, SceneObject, Shape};

    fn recolor_concept() -> Concept {
        // Two examples: every red square turns blue; distractors vary.
        let ex1 = Example::new(
            Scene::new(
                8,
                8,
                vec![
                    SceneObject::new(0, Shape::Square, Color::Red, 2, 2),
                    SceneObject::new(1, Shape::Circle, Color::Green, 5, 5),
                ],
            )
            .unwrap(),
            Scene::new(
                8,
                8,
                vec![
                    SceneObject::new(0, Shape::Square, Color::Blue, 2, 2),
                    SceneObject::new(1, Shape::Circle, Color::Green, 5, 5),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let ex2 = Example::new(
            Scene::new(
                8,
                8,
                vec![
                    SceneObject::new(0, Shape::Square, Color::Red, 6, 1),
                    SceneObject::new(1, Shape::Triangle, Color::Yellow, 1, 6),
                ],
            )
            .unwrap(),
            Scene::new(
                8,
                8,
                vec![
                    SceneObject::new(0, Shape::Square, Color::Blue, 6, 1),
                    SceneObject::new(1, Shape::Triangle, Color::Yellow, 1, 6),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        Concept::new("recolor_red_blue", vec![ex1, ex2]).unwrap()
    }

    fn small_model() -> crate::model::TransitionModel {
        let states = crate::emulator::registry();
        let programs = vec![
            Program::new(vec![
                ops::scene_parse(),
                ops::set_color_attn(Color::Green),
                ops::top_down_attend(),
                ops::fill_color(Color::Yellow),
            ]),
            Program::new(vec![
                ops::scene_parse(),
                ops::set_shape_attn(Shape::Circle),
                ops::top_down_attend(),
                ops::move_hand_to_attended_object(),
                ops::grab_object(),
                ops::move_hand_up(),
                ops::release_object(),
            ]),
        ];
        let mask = Mask::derive(states, &programs);
        train(&programs, 0.1, &mask).unwrap()
    }

    fn check_solution(concept: &Concept, result: &InductionResult) {
        assert_eq!(result.status, SearchStatus::Solved, "search failed");
        let program = result.program.as_ref().expect("solved without program");
        for ex in &concept.examples {
            let run = execute_untraced(program, &ex.input);
            assert!(run.outcome.is_ok());
            assert!(
                is_solved(&run.final_state.working, &ex.output, run.final_state.held).unwrap(),
                "returned program does not reproduce the target"
            );
        }
    }

    #[test]
    fn factorized_search_solves_a_recolor_concept() {
        let concept = recolor_concept();
        let model = small_model();
        let config = SearchConfig::default();
        let result = induce(&concept, &model, &config);
        check_solution(&concept, &result);
        assert!(result.visited <= config.n_progs);
        // Minimum-length solutions select the red square (by color or by
        // shape) and repaint it; nothing shorter exists.
        let program = result.program.unwrap();
        assert_eq!(program.len(), 4);
        assert_eq!(program.get(3), Some(&ops::fill_color(Color::Blue)));
    }

    #[test]
    fn naive_search_solves_the_same_concept() {
        let concept = recolor_concept();
        let model = small_model();
        let config = SearchConfig {
            n_progs: 100_000,
            ..SearchConfig::default()
        };
        let result = induce_naive(&concept, &model, &config);
        check_solution(&concept, &result);
    }

    #[test]
    fn zero_budget_exhausts_immediately() {
        let concept = recolor_concept();
        let model = small_model();
        let config = SearchConfig {
            n_progs: 0,
            ..SearchConfig::default()
        };
        let result = induce(&concept, &model, &config);
        assert_eq!(result.status, SearchStatus::BudgetExhausted);
        assert_eq!(result.visited, 0);
    }

    #[test]
    fn visited_never_exceeds_budget_and_matches_audit_counter() {
        let concept = recolor_concept();
        let model = small_model();
        for budget in [1, 7, 50, 4000] {
            let counter = Arc::new(AtomicU64::new(0));
            let config = SearchConfig {
                n_progs: budget,
                exec_counter: Some(Arc::clone(&counter)),
                ..SearchConfig::default()
            };
            let result = induce(&concept, &model, &config);
            assert!(result.visited <= budget);
            assert_eq!(
                result.visited,
                counter.load(std::sync::atomic::Ordering::Relaxed),
                "budget accounting diverged from the evaluation-site audit"
            );
        }
    }

    #[test]
    fn pop_description_lengths_are_monotone() {
        let concept = recolor_concept();
        let model = small_model();
        let config = SearchConfig {
            mutation_enabled: false,
            track_pops: true,
            ..SearchConfig::default()
        };
        let result = induce(&concept, &model, &config);
        assert!(!result.pop_dls.is_empty());
        for w in result.pop_dls.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "pop DLs regressed: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn identical_scenes_solve_with_bare_parse() {
        let scene = Scene::new(
            6,
            6,
            vec![SceneObject::new(0, Shape::Star, Color::Blue, 1, 1)],
        )
        .unwrap();
        let concept =
            Concept::new("identity", vec![Example::new(scene.clone(), scene).unwrap()]).unwrap();
        let model = small_model();
        let result = induce(&concept, &model, &SearchConfig::default());
        check_solution(&concept, &result);
        assert_eq!(result.program.unwrap().len(), 1);
    }
}
