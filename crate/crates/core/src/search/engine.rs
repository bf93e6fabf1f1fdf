//! The best-first search engine.

use std::cmp::Ordering as CmpOrdering;
use std::collections::{BTreeSet, BinaryHeap, HashSet, VecDeque};
use std::sync::Arc;

use crate::emulator::{ops, Program};
use crate::model::{append_cost, argument_prior, description_length, ArgumentPrior, TransitionModel};
use crate::world::{Concept, ObjectId};

use super::eval::{Evaluated, Evaluator};
use super::mutate::mutants;
use super::{
    InductionResult, SearchConfig, SearchMode, SearchStatus, SubgoalKind, SubgoalRecord,
};

type MatchedSets = Vec<BTreeSet<ObjectId>>;

/// Frontier entry; the heap is a min-heap on (description length, insertion
/// sequence), so equal-cost entries pop in insertion order.
struct Node {
    dl: f64,
    seq: u64,
    program: Program,
    /// This candidate's own placed objects; kept only under
    /// `prune_vs_parent` so its children can be pruned against it.
    matched: Option<Arc<MatchedSets>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Node) -> bool {
        self.cmp(other) == CmpOrdering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Node) -> Option<CmpOrdering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Node) -> CmpOrdering {
        // Reversed: BinaryHeap is a max-heap.
        other
            .dl
            .total_cmp(&self.dl)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// A mutation-found sub-goal root stored for adoption if the current line
/// dies out.
struct PendingRoot {
    program: Program,
    dl: f64,
    matched: MatchedSets,
}

pub(super) struct Engine<'a> {
    model: &'a TransitionModel,
    config: &'a SearchConfig,
    prior: ArgumentPrior,
    evaluator: Evaluator<'a>,
    banned: &'a HashSet<Vec<Vec<ObjectId>>>,

    frontier: BinaryHeap<Node>,
    seq: u64,
    visited: u64,
    budget: u64,

    /// Current sub-goal root and the objects it places (the baseline).
    root_matched: Arc<MatchedSets>,
    candidate: Option<(Program, f64)>,
    pending: VecDeque<PendingRoot>,
    history: Vec<SubgoalRecord>,

    /// Canonical encodings of every candidate handed to the evaluator;
    /// maintained only when mutation is on, to deduplicate mutants.
    seen: HashSet<Vec<u8>>,
    seen_bytes: usize,
    rounds_done: u32,
    next_threshold: u64,

    pop_dls: Vec<f64>,
    best_partial: Option<(Program, usize)>,
}

impl<'a> Engine<'a> {
    pub fn new(
        concept: &'a Concept,
        model: &'a TransitionModel,
        config: &'a SearchConfig,
        banned: &'a HashSet<Vec<Vec<ObjectId>>>,
    ) -> Engine<'a> {
        Engine {
            model,
            config,
            prior: argument_prior(concept, config.epsilon_arg),
            evaluator: Evaluator::new(
                concept,
                config.match_mode,
                config.exec_counter.clone(),
                config.parallel_workers,
            ),
            banned,
            frontier: BinaryHeap::new(),
            seq: 0,
            visited: 0,
            budget: 0,
            root_matched: Arc::new(Vec::new()),
            candidate: None,
            pending: VecDeque::new(),
            history: Vec::new(),
            seen: HashSet::new(),
            seen_bytes: 0,
            rounds_done: 0,
            next_threshold: 0,
            pop_dls: Vec::new(),
            best_partial: None,
        }
    }

    fn factorized(&self) -> bool {
        self.config.mode == SearchMode::Factorized
    }

    fn track_seen(&self) -> bool {
        self.factorized() && self.config.mutation_enabled
    }

    /// True when the program was not seen before; also records it, while the
    /// memory cap allows.
    fn check_and_mark_seen(&mut self, program: &Program) -> bool {
        if !self.track_seen() {
            return true;
        }
        let enc = program.encode();
        if self.seen.contains(&enc) {
            return false;
        }
        let cost = enc.len() + 64;
        if self.seen_bytes + cost <= self.config.seen_cap_bytes {
            self.seen_bytes += cost;
            self.seen.insert(enc);
        }
        true
    }

    fn remaining(&self) -> u64 {
        self.budget.saturating_sub(self.visited)
    }

    /// Clamps the batch to the remaining budget and evaluates it. Every
    /// evaluation counts toward `visited`.
    fn evaluate_clamped(&mut self, mut batch: Vec<(Program, f64)>) -> Vec<Evaluated> {
        let take = (self.remaining() as usize).min(batch.len());
        batch.truncate(take);
        self.visited += take as u64;
        self.evaluator.evaluate_batch(batch)
    }

    fn note_partial(&mut self, e: &Evaluated) {
        let score: usize = e.matched.iter().map(|m| m.len()).sum();
        if self.best_partial.as_ref().map_or(true, |(_, s)| score > *s) {
            self.best_partial = Some((e.program.clone(), score));
        }
    }

    fn offer_candidate(&mut self, program: Program, dl: f64) {
        match &self.candidate {
            Some((_, best)) if dl >= *best => {}
            _ => self.candidate = Some((program, dl)),
        }
    }

    fn loses_baseline(&self, matched: &MatchedSets, base: &MatchedSets) -> bool {
        base.iter()
            .zip(matched)
            .any(|(b, m)| !b.is_subset(m))
    }

    fn strict_superset(&self, matched: &MatchedSets, base: &MatchedSets) -> bool {
        base.iter()
            .zip(matched)
            .all(|(b, m)| b.is_subset(m) && m.len() > b.len())
    }

    fn signature(&self, matched: &MatchedSets) -> Vec<Vec<ObjectId>> {
        matched
            .iter()
            .zip(self.root_matched.iter())
            .map(|(m, b)| m.difference(b).copied().collect())
            .collect()
    }

    fn adopt_root(&mut self, e: &Evaluated, kind: SubgoalKind) {
        let newly = self.signature(&e.matched);
        self.history.push(SubgoalRecord {
            root: e.program.clone(),
            newly_matched: newly,
            visited_at: self.visited,
            kind,
        });
        self.root_matched = Arc::new(e.matched.clone());
        self.frontier.clear();
        self.push_program(e.program.clone(), e.dl, Some(Arc::clone(&self.root_matched)));
    }

    fn push_program(&mut self, program: Program, dl: f64, matched: Option<Arc<MatchedSets>>) {
        let matched = if self.config.prune_vs_parent {
            matched
        } else {
            None
        };
        self.frontier.push(Node {
            dl,
            seq: self.seq,
            program,
            matched,
        });
        self.seq += 1;
    }

    fn result(&mut self, status: SearchStatus) -> InductionResult {
        let (program, dl) = match (&status, self.candidate.take()) {
            (SearchStatus::Solved, Some((p, d))) => (Some(p), Some(d)),
            _ => (None, None),
        };
        InductionResult {
            status,
            program,
            dl,
            visited: self.visited,
            subgoal_history: std::mem::take(&mut self.history),
            mutation_rounds: self.rounds_done,
            best_partial: self.best_partial.take().map(|(p, _)| p),
            pop_dls: std::mem::take(&mut self.pop_dls),
        }
    }

    fn can_mutate(&self) -> bool {
        self.factorized()
            && self.config.mutation_enabled
            && self.rounds_done < 10
            && !self.history.is_empty()
            && self.candidate.is_none()
    }

    pub fn run(mut self, budget: u64) -> InductionResult {
        self.budget = budget;
        self.next_threshold = (budget / 10).max(1);

        let root = Program::new(vec![ops::scene_parse()]);
        let root_dl = description_length(&root, self.model, &self.prior);
        if !root_dl.is_finite() {
            return self.result(SearchStatus::FrontierExhausted);
        }
        if self.remaining() == 0 {
            return self.result(SearchStatus::BudgetExhausted);
        }
        self.check_and_mark_seen(&root);
        let evaluated = self.evaluate_clamped(vec![(root, root_dl)]);
        let root_eval = &evaluated[0];
        if root_eval.error {
            return self.result(SearchStatus::FrontierExhausted);
        }
        self.note_partial(root_eval);
        if root_eval.solved {
            self.offer_candidate(root_eval.program.clone(), root_eval.dl);
        }
        self.root_matched = Arc::new(root_eval.matched.clone());
        self.push_program(
            root_eval.program.clone(),
            root_eval.dl,
            Some(Arc::clone(&self.root_matched)),
        );

        loop {
            // Settle: once no frontier entry can beat the best solution,
            // return it. Pops are monotone, so peeking suffices.
            if let Some((_, cdl)) = &self.candidate {
                if self.frontier.peek().map_or(true, |n| n.dl >= *cdl) {
                    return self.result(SearchStatus::Solved);
                }
            }
            if self.remaining() == 0 {
                let status = if self.candidate.is_some() {
                    SearchStatus::Solved
                } else {
                    SearchStatus::BudgetExhausted
                };
                return self.result(status);
            }
            if self.can_mutate() && self.visited >= self.next_threshold {
                self.mutation_round();
                continue;
            }
            let node = match self.frontier.pop() {
                Some(n) => n,
                None => {
                    if self.adopt_pending() {
                        continue;
                    }
                    if self.can_mutate() {
                        // The line is dead; fire the next pass early rather
                        // than give up with budget in hand.
                        self.mutation_round();
                        continue;
                    }
                    return self.result(SearchStatus::FrontierExhausted);
                }
            };
            if self.config.track_pops {
                self.pop_dls.push(node.dl);
            }
            self.expand(node);
        }
    }

    /// Evaluates all extensions of a popped candidate and routes the results:
    /// solutions compete for the settle candidate, progress adopts a new
    /// sub-goal root, regressions and errors are dropped, the rest join the
    /// frontier.
    fn expand(&mut self, node: Node) {
        let last = *node
            .program
            .get(node.program.len() - 1)
            .expect("frontier programs are never empty");
        let mut batch: Vec<(Program, f64)> = Vec::new();
        for inst in self.model.states() {
            let cost = append_cost(Some(&last), inst, self.model, &self.prior);
            if !cost.is_finite() {
                continue;
            }
            let dl = node.dl + cost;
            if let Some((_, cdl)) = &self.candidate {
                if dl >= *cdl {
                    continue;
                }
            }
            let child = node.program.with_appended(*inst);
            if !self.check_and_mark_seen(&child) {
                continue;
            }
            batch.push((child, dl));
        }
        let evaluated = self.evaluate_clamped(batch);

        let prune_base: Arc<MatchedSets> = if self.config.prune_vs_parent {
            node.matched
                .clone()
                .unwrap_or_else(|| Arc::clone(&self.root_matched))
        } else {
            Arc::clone(&self.root_matched)
        };
        let mut survivors: Vec<Evaluated> = Vec::new();
        for e in evaluated {
            if e.error {
                continue;
            }
            self.note_partial(&e);
            if e.solved {
                self.offer_candidate(e.program.clone(), e.dl);
                continue;
            }
            if self.factorized() && self.loses_baseline(&e.matched, &prune_base) {
                continue;
            }
            survivors.push(e);
        }

        if self.factorized() && self.candidate.is_none() {
            for e in &survivors {
                if !self.strict_superset(&e.matched, &self.root_matched) {
                    continue;
                }
                let first_restart = self.history.is_empty();
                if first_restart && self.banned.contains(&self.signature(&e.matched)) {
                    continue;
                }
                self.adopt_root(e, SubgoalKind::Subgoal);
                return;
            }
        }
        for e in survivors {
            if let Some((_, cdl)) = &self.candidate {
                if e.dl >= *cdl {
                    continue;
                }
            }
            let matched = Arc::new(e.matched);
            self.push_program(e.program, e.dl, Some(matched));
        }
    }

    /// Adopts the first stored mutation root that still strictly extends the
    /// current baseline. Returns true when one was adopted.
    fn adopt_pending(&mut self) -> bool {
        while let Some(p) = self.pending.pop_front() {
            if !self.strict_superset(&p.matched, &self.root_matched) {
                continue;
            }
            let e = Evaluated {
                program: p.program,
                dl: p.dl,
                error: false,
                solved: false,
                matched: p.matched,
            };
            self.adopt_root(&e, SubgoalKind::LineSwitch);
            return true;
        }
        false
    }

    /// One mutation pass over the current root: evaluate unseen single-edit
    /// variants, take a solving one as the settle candidate if any solves
    /// (shortest first, then DL, then encoding), otherwise adopt the best
    /// strict-progress variant as the next root, queue the other progress
    /// variants, and feed no-loss-no-gain variants into the frontier.
    fn mutation_round(&mut self) {
        self.rounds_done += 1;
        self.next_threshold = self
            .next_threshold
            .saturating_add((self.budget / 10).max(1));

        let root = match self.history.last() {
            Some(r) => r.root.clone(),
            None => return,
        };
        let mut batch: Vec<(Program, f64)> = Vec::new();
        for m in mutants(&root, self.model.states()) {
            let dl = description_length(&m, self.model, &self.prior);
            if !dl.is_finite() {
                continue;
            }
            if !self.check_and_mark_seen(&m) {
                continue;
            }
            batch.push((m, dl));
        }
        let evaluated = self.evaluate_clamped(batch);

        let base = Arc::clone(&self.root_matched);
        let mut solved: Vec<&Evaluated> = Vec::new();
        let mut progress: Vec<&Evaluated> = Vec::new();
        let mut level: Vec<&Evaluated> = Vec::new();
        for e in &evaluated {
            if e.error {
                continue;
            }
            self.note_partial(e);
            if e.solved {
                solved.push(e);
                continue;
            }
            if self.loses_baseline(&e.matched, &base) {
                continue;
            }
            if self.strict_superset(&e.matched, &base) {
                progress.push(e);
            } else if e.matched.iter().zip(base.iter()).all(|(m, b)| m == b) {
                level.push(e);
            }
        }

        if !solved.is_empty() {
            solved.sort_by(|a, b| {
                a.program
                    .len()
                    .cmp(&b.program.len())
                    .then_with(|| a.dl.total_cmp(&b.dl))
                    .then_with(|| a.program.encode().cmp(&b.program.encode()))
            });
            let best = solved[0];
            self.offer_candidate(best.program.clone(), best.dl);
            return;
        }

        progress.sort_by(|a, b| {
            a.dl.total_cmp(&b.dl)
                .then_with(|| a.program.encode().cmp(&b.program.encode()))
        });
        let mut progress_iter = progress.into_iter();
        if let Some(first) = progress_iter.next() {
            let rest: Vec<PendingRoot> = progress_iter
                .map(|e| PendingRoot {
                    program: e.program.clone(),
                    dl: e.dl,
                    matched: e.matched.clone(),
                })
                .collect();
            self.adopt_root(first, SubgoalKind::Mutation);
            self.pending.extend(rest);
            return;
        }
        for e in level {
            let matched = Arc::new(e.matched.clone());
            self.push_program(e.program.clone(), e.dl, Some(matched));
        }
    }
}
