//! Description-length model for programs.
//!
//! A [`TransitionModel`] is a first-order Markov chain over a state list
//! consisting of a start symbol plus argumented instruction variants. A
//! boolean [`Mask`] (the dependency graph) fixes which transitions can carry
//! probability at all; training counts transitions in ground-truth programs
//! and Laplace-smooths over the allowed cells. An [`ArgumentPrior`] derived
//! from a concept's input/output differences scales the probability of
//! argumented instructions. Together they assign each program the
//! description length `-sum ln[P(inst_t | inst_{t-1}) * arg_prior(inst_t)]`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::emulator::{parse_instruction, Instruction, Opcode, Program};
use crate::world::Concept;

/// Tolerance for row-stochasticity checks.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Default Laplace smoothing constant.
pub const DEFAULT_ALPHA: f64 = 0.1;

/// Default floor probability for arguments absent from a concept's diff.
pub const DEFAULT_EPSILON_ARG: f64 = 0.01;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("state `{0}` has no allowed outgoing transitions")]
    AllMaskedRow(String),
    #[error("training program uses `{0}`, which is not in the state list")]
    UnknownState(String),
    #[error("malformed model data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Index 0 is the start symbol; instruction variants follow in state order.
fn dim(n_states: usize) -> usize {
    n_states + 1
}

/// Opcode classes used when generalizing observed transitions: argumented
/// opcodes are one class across their arguments, and the four directional
/// hand moves form a single class.
fn opcode_class(op: Opcode) -> u8 {
    match op {
        Opcode::MoveHandUp | Opcode::MoveHandDown | Opcode::MoveHandLeft
        | Opcode::MoveHandRight => 100,
        other => other as u8,
    }
}

/// Transitions that can never occur in a well-formed, non-erroring program,
/// plus adjacent pairs where the first instruction is provably dead.
pub fn static_forbidden(from: Option<&Instruction>, to: &Instruction) -> bool {
    let to_op = to.opcode();
    let from_inst = match from {
        // The start symbol precedes exactly `scene_parse`.
        None => return to_op != Opcode::SceneParse,
        Some(f) => f,
    };
    if to_op == Opcode::SceneParse {
        return true;
    }
    let from_op = from_inst.opcode();
    if from_op == Opcode::SceneParse {
        // Right after parsing nothing is attended, held, fixated, or looping.
        if matches!(
            to_op,
            Opcode::NextObject
                | Opcode::FixateObject
                | Opcode::FixatePrevious
                | Opcode::FixateNext
                | Opcode::MoveHandToAttendedObject
                | Opcode::FillColor
                | Opcode::LoopEnd
                | Opcode::ReleaseObject
        ) {
            return true;
        }
    }
    if from_op == Opcode::LoopStart && to_op == Opcode::LoopEnd {
        return true;
    }
    // Pairs where the first instruction's effect is overwritten or repeated.
    match (from_op, to_op) {
        (Opcode::GrabObject, Opcode::GrabObject)
        | (Opcode::ReleaseObject, Opcode::ReleaseObject)
        | (Opcode::TopDownAttend, Opcode::TopDownAttend)
        | (Opcode::ResetAttn, Opcode::ResetAttn)
        | (Opcode::SetColorAttn, Opcode::SetColorAttn)
        | (Opcode::SetShapeAttn, Opcode::SetShapeAttn)
        | (Opcode::FillColor, Opcode::FillColor)
        | (Opcode::MoveHandToAttendedObject, Opcode::MoveHandToAttendedObject)
        | (Opcode::MoveHandToFixation, Opcode::MoveHandToFixation) => true,
        (a, b) if a == b => matches!(
            a,
            Opcode::MoveHandUp | Opcode::MoveHandDown | Opcode::MoveHandLeft
                | Opcode::MoveHandRight
        ),
        _ => false,
    }
}

/// Which (from, to) transitions may carry probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    states: Vec<Instruction>,
    /// Row-major `(n+1) x (n+1)`; row/column 0 is the start symbol. The
    /// start column is always false: nothing transitions back to start.
    allowed: Vec<bool>,
}

impl Mask {
    fn blank(states: &[Instruction]) -> Mask {
        let d = dim(states.len());
        Mask {
            states: states.to_vec(),
            allowed: vec![false; d * d],
        }
    }

    /// Everything allowed except transitions into the start symbol.
    pub fn all_allowed(states: &[Instruction]) -> Mask {
        let mut m = Mask::blank(states);
        let d = dim(states.len());
        for from in 0..d {
            for to in 1..d {
                m.allowed[from * d + to] = true;
            }
        }
        m
    }

    /// Everything the static rules permit.
    pub fn statically_valid(states: &[Instruction]) -> Mask {
        let mut m = Mask::blank(states);
        for from in 0..dim(states.len()) {
            let from_inst = if from == 0 { None } else { Some(&states[from - 1]) };
            for (to_idx, to) in states.iter().enumerate() {
                if !static_forbidden(from_inst, to) {
                    m.set(from, to_idx + 1, true);
                }
            }
        }
        m
    }

    /// Dependency graph derived from training programs: a transition is
    /// allowed when its opcode-class pair occurs in some program (classes
    /// pool instruction arguments and the four hand directions) and the
    /// static rules do not forbid it. `loop_start`/`loop_end` are treated as
    /// transparent markers insertable around any observed pair. States whose
    /// row would end up empty fall back to the static rules.
    pub fn derive(states: &[Instruction], programs: &[Program]) -> Mask {
        let mut observed: std::collections::BTreeSet<(u8, u8)> = Default::default();
        const START_CLASS: u8 = 255;
        for p in programs {
            let mut prev = START_CLASS;
            for inst in p.instructions() {
                let c = opcode_class(inst.opcode());
                observed.insert((prev, c));
                prev = c;
            }
        }

        let d = dim(states.len());
        let mut m = Mask::blank(states);
        let class_at = |idx: usize| -> u8 {
            if idx == 0 {
                START_CLASS
            } else {
                opcode_class(states[idx - 1].opcode())
            }
        };
        let is_control = |idx: usize| -> bool {
            idx > 0
                && matches!(
                    states[idx - 1].opcode(),
                    Opcode::LoopStart | Opcode::LoopEnd
                )
        };
        let base = |from: usize, to: usize| observed.contains(&(class_at(from), class_at(to)));

        // A state is extendable/reachable judging by non-control base pairs.
        let extendable: Vec<bool> = (0..d)
            .map(|from| (1..d).any(|to| !is_control(to) && base(from, to)))
            .collect();
        let reachable: Vec<bool> = (0..d)
            .map(|to| to > 0 && (0..d).any(|from| !is_control(from) && base(from, to)))
            .collect();

        for from in 0..d {
            let from_inst = if from == 0 { None } else { Some(&states[from - 1]) };
            for to in 1..d {
                if static_forbidden(from_inst, &states[to - 1]) {
                    continue;
                }
                let ok = base(from, to)
                    || (is_control(to) && extendable[from])
                    || (is_control(from) && reachable[to]);
                if ok {
                    m.set(from, to, true);
                }
            }
        }

        for from in 0..d {
            if (1..d).any(|to| m.get(from, to)) {
                continue;
            }
            let from_inst = if from == 0 { None } else { Some(&states[from - 1]) };
            for to in 1..d {
                if !static_forbidden(from_inst, &states[to - 1]) {
                    m.set(from, to, true);
                }
            }
        }
        m
    }

    pub fn states(&self) -> &[Instruction] {
        &self.states
    }

    fn set(&mut self, from: usize, to: usize, value: bool) {
        let d = dim(self.states.len());
        // The start column stays false unconditionally.
        if to == 0 {
            return;
        }
        self.allowed[from * d + to] = value;
    }

    pub fn get(&self, from: usize, to: usize) -> bool {
        self.allowed[from * dim(self.states.len()) + to]
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let file = MaskFile {
            states: self.states.iter().map(|i| i.to_string()).collect(),
            forbidden: self.forbidden_pairs(),
        };
        let text = serde_json::to_string_pretty(&file)
            .map_err(|e| ModelError::Format(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    /// All forbidden pairs, `"start"` naming the start symbol.
    pub fn forbidden_pairs(&self) -> Vec<(String, String)> {
        let d = dim(self.states.len());
        let name = |i: usize| {
            if i == 0 {
                "start".to_string()
            } else {
                self.states[i - 1].to_string()
            }
        };
        let mut out = Vec::new();
        for from in 0..d {
            for to in 0..d {
                if !self.get(from, to) {
                    out.push((name(from), name(to)));
                }
            }
        }
        out
    }

    pub fn load(path: &Path) -> Result<Mask, ModelError> {
        let text = std::fs::read_to_string(path)?;
        Mask::from_json(&text)
    }

    /// Parses the same JSON document [`Mask::save`] writes; used both by
    /// [`Mask::load`] and for masks embedded at compile time.
    pub fn from_json(text: &str) -> Result<Mask, ModelError> {
        let file: MaskFile =
            serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
        let states = parse_states(&file.states)?;
        let mut m = Mask::all_allowed(&states);
        let index = state_index_map(&states);
        let lookup = |name: &str| -> Result<usize, ModelError> {
            if name == "start" {
                return Ok(0);
            }
            let inst = parse_instruction(name).map_err(ModelError::Format)?;
            index
                .get(&inst)
                .map(|i| i + 1)
                .ok_or_else(|| ModelError::UnknownState(name.to_string()))
        };
        for (from, to) in &file.forbidden {
            let f = lookup(from)?;
            let t = lookup(to)?;
            let d = dim(states.len());
            m.allowed[f * d + t] = false;
        }
        // Start column is structural, not data.
        let d = dim(states.len());
        for from in 0..d {
            m.allowed[from * d] = false;
        }
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct MaskFile {
    states: Vec<String>,
    forbidden: Vec<(String, String)>,
}

fn parse_states(names: &[String]) -> Result<Vec<Instruction>, ModelError> {
    names
        .iter()
        .map(|s| parse_instruction(s).map_err(ModelError::Format))
        .collect()
}

fn state_index_map(states: &[Instruction]) -> BTreeMap<Instruction, usize> {
    states.iter().enumerate().map(|(i, s)| (*s, i)).collect()
}

/// Row-stochastic first-order transition model over instruction variants.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    states: Vec<Instruction>,
    index: BTreeMap<Instruction, usize>,
    /// Row-major `(n+1) x (n+1)` probabilities; row/col 0 is the start symbol.
    probs: Vec<f64>,
    mask: Mask,
}

/// Counts transitions (including start -> first instruction) in the training
/// programs, adds `alpha` to every mask-allowed cell, and normalizes each
/// row. Rows with no observations and `alpha = 0` become uniform over their
/// allowed cells, keeping every row stochastic.
pub fn train(
    programs: &[Program],
    alpha: f64,
    mask: &Mask,
) -> Result<TransitionModel, ModelError> {
    if programs.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let states = mask.states().to_vec();
    let index = state_index_map(&states);
    let d = dim(states.len());

    let mut counts = vec![0.0f64; d * d];
    for p in programs {
        let mut prev = 0usize;
        for inst in p.instructions() {
            let to = *index
                .get(inst)
                .ok_or_else(|| ModelError::UnknownState(inst.to_string()))?
                + 1;
            if mask.get(prev, to) {
                counts[prev * d + to] += 1.0;
            }
            prev = to;
        }
    }

    let mut probs = vec![0.0f64; d * d];
    for from in 0..d {
        let allowed: Vec<usize> = (0..d).filter(|to| mask.get(from, *to)).collect();
        if allowed.is_empty() {
            let name = if from == 0 {
                "start".to_string()
            } else {
                states[from - 1].to_string()
            };
            return Err(ModelError::AllMaskedRow(name));
        }
        let total: f64 = allowed
            .iter()
            .map(|to| counts[from * d + to] + alpha)
            .sum();
        if total > 0.0 {
            for to in &allowed {
                probs[from * d + to] = (counts[from * d + to] + alpha) / total;
            }
        } else {
            let u = 1.0 / allowed.len() as f64;
            for to in &allowed {
                probs[from * d + to] = u;
            }
        }
    }

    Ok(TransitionModel {
        states,
        index,
        probs,
        mask: mask.clone(),
    })
}

impl TransitionModel {
    pub fn states(&self) -> &[Instruction] {
        &self.states
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn state_index(&self, inst: &Instruction) -> Option<usize> {
        self.index.get(inst).copied()
    }

    /// P(to | from), `from = None` meaning the start symbol. Zero when either
    /// state is unknown.
    pub fn prob(&self, from: Option<&Instruction>, to: &Instruction) -> f64 {
        let f = match from {
            None => 0,
            Some(i) => match self.state_index(i) {
                Some(idx) => idx + 1,
                None => return 0.0,
            },
        };
        match self.state_index(to) {
            Some(t) => self.probs[f * dim(self.states.len()) + t + 1],
            None => 0.0,
        }
    }

    fn prob_by_row(&self, from_row: usize, to_row: usize) -> f64 {
        self.probs[from_row * dim(self.states.len()) + to_row]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let d = dim(self.states.len());
        (0..d)
            .map(|from| (0..d).map(|to| self.probs[from * d + to]).sum())
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let d = dim(self.states.len());
        let file = ModelFile {
            states: self.states.iter().map(|i| i.to_string()).collect(),
            probs: (0..d)
                .map(|from| self.probs[from * d..(from + 1) * d].to_vec())
                .collect(),
            mask: (0..d)
                .map(|from| (0..d).map(|to| self.mask.get(from, to)).collect())
                .collect(),
        };
        let text = serde_json::to_string_pretty(&file)
            .map_err(|e| ModelError::Format(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    /// Loads and re-validates shape and row-stochasticity.
    pub fn load(path: &Path) -> Result<TransitionModel, ModelError> {
        let text = std::fs::read_to_string(path)?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| ModelError::Format(e.to_string()))?;
        let states = parse_states(&file.states)?;
        let d = dim(states.len());
        if file.probs.len() != d
            || file.mask.len() != d
            || file.probs.iter().any(|r| r.len() != d)
            || file.mask.iter().any(|r| r.len() != d)
        {
            return Err(ModelError::Format(format!(
                "expected {d}x{d} probability and mask tables"
            )));
        }
        let mut mask = Mask::blank(&states);
        for (from, row) in file.mask.iter().enumerate() {
            for (to, v) in row.iter().enumerate() {
                if *v {
                    mask.set(from, to, true);
                }
            }
        }
        let mut probs = vec![0.0f64; d * d];
        for (from, row) in file.probs.iter().enumerate() {
            let mut sum = 0.0;
            for (to, p) in row.iter().enumerate() {
                if *p < 0.0 {
                    return Err(ModelError::Format("negative probability".into()));
                }
                if *p > 0.0 && !mask.get(from, to) {
                    return Err(ModelError::Format(format!(
                        "probability on masked cell ({from}, {to})"
                    )));
                }
                probs[from * d + to] = *p;
                sum += *p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ModelError::Format(format!(
                    "row {from} sums to {sum}, not 1"
                )));
            }
        }
        let index = state_index_map(&states);
        Ok(TransitionModel {
            states,
            index,
            probs,
            mask,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    states: Vec<String>,
    probs: Vec<Vec<f64>>,
    mask: Vec<Vec<bool>>,
}

/// Per-concept prior over instruction arguments, substituting a learned
/// argument predictor with a deterministic rule: colors and shapes possessed
/// by objects that differ between an example's input and output share the
/// support uniformly; every other palette entry gets `epsilon_arg` before
/// renormalization. With no differing objects the prior is uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentPrior {
    pub set_color_attn: [f64; 4],
    pub set_shape_attn: [f64; 4],
    pub fill_color: [f64; 4],
}

impl ArgumentPrior {
    pub fn uniform() -> ArgumentPrior {
        ArgumentPrior {
            set_color_attn: [0.25; 4],
            set_shape_attn: [0.25; 4],
            fill_color: [0.25; 4],
        }
    }

    /// Multiplicative factor this prior contributes for one instruction;
    /// 1 for instructions without arguments.
    pub fn factor(&self, inst: &Instruction) -> f64 {
        match inst.opcode() {
            Opcode::SetColorAttn => self.set_color_attn[inst.color_arg().unwrap().index()],
            Opcode::FillColor => self.fill_color[inst.color_arg().unwrap().index()],
            Opcode::SetShapeAttn => self.set_shape_attn[inst.shape_arg().unwrap().index()],
            _ => 1.0,
        }
    }
}

fn support_distribution(in_support: [bool; 4], epsilon: f64) -> [f64; 4] {
    let n = in_support.iter().filter(|b| **b).count();
    if n == 0 {
        return [0.25; 4];
    }
    let mut w = [0.0; 4];
    let mut total = 0.0;
    for i in 0..4 {
        w[i] = if in_support[i] { 1.0 / n as f64 } else { epsilon };
        total += w[i];
    }
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Builds the argument prior for a concept from its example diffs.
pub fn argument_prior(concept: &Concept, epsilon_arg: f64) -> ArgumentPrior {
    let mut colors = [false; 4];
    let mut shapes = [false; 4];
    for ex in &concept.examples {
        for obj in ex.input.objects() {
            let out = match ex.output.object(obj.id) {
                Some(o) => o,
                None => continue,
            };
            if obj.shape == out.shape && obj.color == out.color && obj.pos == out.pos {
                continue;
            }
            colors[obj.color.index()] = true;
            colors[out.color.index()] = true;
            shapes[obj.shape.index()] = true;
            shapes[out.shape.index()] = true;
        }
    }
    let color_dist = support_distribution(colors, epsilon_arg);
    ArgumentPrior {
        set_color_attn: color_dist,
        set_shape_attn: support_distribution(shapes, epsilon_arg),
        fill_color: color_dist,
    }
}

/// Description length in nats; infinite when any factor is zero or a state
/// is unknown to the model.
pub fn description_length(
    program: &Program,
    model: &TransitionModel,
    prior: &ArgumentPrior,
) -> f64 {
    let mut prev = 0usize;
    let mut dl = 0.0f64;
    for inst in program.instructions() {
        let to = match model.state_index(inst) {
            Some(i) => i + 1,
            None => return f64::INFINITY,
        };
        let p = model.prob_by_row(prev, to) * prior.factor(inst);
        if p <= 0.0 {
            return f64::INFINITY;
        }
        dl -= p.ln();
        prev = to;
    }
    dl
}

/// Incremental description-length cost of appending `inst` after `prev`
/// (`None` = start symbol). Infinite when the factor is zero.
pub fn append_cost(
    prev: Option<&Instruction>,
    inst: &Instruction,
    model: &TransitionModel,
    prior: &ArgumentPrior,
) -> f64 {
    let p = model.prob(prev, inst) * prior.factor(inst);
    if p <= 0.0 {
        f64::INFINITY
    } else {
        -p.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulator::{ops::*, registry};
    use crate::world::{Color, Example, Scene, SceneObject, Shape};

    fn recolor_program(from: Color, to: Color) -> Program {
        Program::new(vec![
            scene_parse(),
            set_color_attn(from),
            top_down_attend(),
            fill_color(to),
        ])
    }

    #[test]
    fn single_program_alpha_zero_gives_unit_probabilities() {
        let states = registry();
        let mask = Mask::all_allowed(states);
        let p = Program::new(vec![scene_parse(), fill_color(Color::Red)]);
        let model = train(&[p], 0.0, &mask).unwrap();
        assert_eq!(model.prob(None, &scene_parse()), 1.0);
        assert_eq!(model.prob(Some(&scene_parse()), &fill_color(Color::Red)), 1.0);
        assert_eq!(model.prob(Some(&scene_parse()), &fill_color(Color::Blue)), 0.0);
    }

    #[test]
    fn rows_are_stochastic_for_any_alpha() {
        let states = registry();
        for mask in [
            Mask::all_allowed(states),
            Mask::statically_valid(states),
            Mask::derive(states, &[recolor_program(Color::Red, Color::Blue)]),
        ] {
            for alpha in [0.0, 0.1, 1.0, 7.5] {
                let model = train(
                    &[recolor_program(Color::Red, Color::Blue)],
                    alpha,
                    &mask,
                )
                .unwrap();
                for (i, sum) in model.row_sums().iter().enumerate() {
                    assert!((sum - 1.0).abs() < ROW_SUM_TOLERANCE, "row {i}: {sum}");
                }
            }
        }
    }

    #[test]
    fn scaling_counts_preserves_probability_order() {
        let states = registry();
        let mask = Mask::statically_valid(states);
        let base: Vec<Program> = vec![
            recolor_program(Color::Red, Color::Blue),
            recolor_program(Color::Red, Color::Yellow),
            recolor_program(Color::Green, Color::Blue),
        ];
        let tripled: Vec<Program> = base
            .iter()
            .cloned()
            .cycle()
            .take(base.len() * 3)
            .collect();
        let m1 = train(&base, 0.1, &mask).unwrap();
        let m3 = train(&tripled, 0.3, &mask).unwrap();
        for from in [None, Some(scene_parse()), Some(set_color_attn(Color::Red))] {
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for (i, a) in states.iter().enumerate() {
                for b in &states[i + 1..] {
                    let (p1a, p1b) = (m1.prob(from.as_ref(), a), m1.prob(from.as_ref(), b));
                    let (p3a, p3b) = (m3.prob(from.as_ref(), a), m3.prob(from.as_ref(), b));
                    assert_eq!(
                        p1a.partial_cmp(&p1b).unwrap(),
                        p3a.partial_cmp(&p3b).unwrap(),
                        "order changed for {a} vs {b}"
                    );
                    pairs.push((0, 0));
                }
            }
            assert!(!pairs.is_empty());
        }
    }

    #[test]
    fn empty_training_set_is_an_error() {
        assert!(matches!(
            train(&[], 0.1, &Mask::all_allowed(registry())),
            Err(ModelError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn all_masked_row_is_an_error() {
        let states = registry();
        let mut mask = Mask::all_allowed(states);
        let d = states.len() + 1;
        for to in 0..d {
            mask.allowed[1 * d + to] = false;
        }
        assert!(matches!(
            train(&[recolor_program(Color::Red, Color::Blue)], 0.1, &mask),
            Err(ModelError::AllMaskedRow(_))
        ));
    }

    #[test]
    fn static_rules_forbid_impossible_pairs() {
        assert!(static_forbidden(None, &top_down_attend()));
        assert!(!static_forbidden(None, &scene_parse()));
        assert!(static_forbidden(Some(&top_down_attend()), &scene_parse()));
        assert!(static_forbidden(Some(&scene_parse()), &release_object()));
        assert!(static_forbidden(Some(&scene_parse()), &fill_color(Color::Red)));
        assert!(static_forbidden(Some(&grab_object()), &grab_object()));
        assert!(static_forbidden(Some(&loop_start()), &loop_end()));
        assert!(static_forbidden(
            Some(&set_color_attn(Color::Red)),
            &set_color_attn(Color::Blue)
        ));
        assert!(static_forbidden(Some(&move_hand_up()), &move_hand_up()));
        assert!(!static_forbidden(Some(&move_hand_up()), &move_hand_left()));
        assert!(!static_forbidden(Some(&scene_parse()), &grab_object()));
        assert!(!static_forbidden(Some(&grab_object()), &release_object()));
    }

    #[test]
    fn derived_mask_generalizes_classes_and_keeps_rows_nonempty() {
        let states = registry();
        let mask = Mask::derive(states, &[recolor_program(Color::Red, Color::Blue)]);
        let idx = |i: &Instruction| states.iter().position(|s| s == i).unwrap() + 1;
        // Observed pair generalizes across arguments.
        assert!(mask.get(idx(&scene_parse()), idx(&set_color_attn(Color::Green))));
        assert!(mask.get(idx(&set_color_attn(Color::Yellow)), idx(&top_down_attend())));
        // Unobserved class pair stays masked.
        assert!(!mask.get(idx(&scene_parse()), idx(&move_hand_up())));
        // Loop markers are insertable around observed pairs.
        assert!(mask.get(idx(&scene_parse()), idx(&loop_start())));
        assert!(mask.get(idx(&loop_start()), idx(&top_down_attend())));
        assert!(!mask.get(idx(&loop_start()), idx(&loop_end())));
        // Static rules still apply within an observed class: same-argument
        // attention updates never repeat.
        assert!(!mask.get(
            idx(&set_color_attn(Color::Red)),
            idx(&set_color_attn(Color::Red))
        ));
        // No row is left without successors, so training always normalizes.
        assert!(train(&[recolor_program(Color::Red, Color::Blue)], 0.1, &mask).is_ok());
    }

    #[test]
    fn description_length_sums_transition_and_argument_terms() {
        let states = registry();
        let mask = Mask::all_allowed(states);
        let p = recolor_program(Color::Red, Color::Yellow);
        let model = train(&[p.clone()], 0.0, &mask).unwrap();
        let prior = ArgumentPrior::uniform();
        // Transitions all have probability 1; only the two argumented
        // instructions contribute -ln(0.25).
        let dl = description_length(&p, &model, &prior);
        assert!((dl - 2.0 * 4.0f64.ln()).abs() < 1e-12);
        // An unknown transition is infinitely costly.
        let q = Program::new(vec![scene_parse(), move_hand_up()]);
        assert_eq!(description_length(&q, &model, &prior), f64::INFINITY);
        // Apppend costs agree with the full sum.
        let mut acc = 0.0;
        let mut prev: Option<Instruction> = None;
        for inst in p.instructions() {
            acc += append_cost(prev.as_ref(), inst, &model, &prior);
            prev = Some(*inst);
        }
        assert!((acc - dl).abs() < 1e-12);
    }

    #[test]
    fn argument_prior_follows_example_diffs() {
        // A red square is recolored yellow; a green circle moves; a blue
        // triangle stays put. Support = {red, yellow, green} colors,
        // {square, circle} shapes.
        let input = Scene::new(
            10,
            10,
            vec![
                SceneObject::new(0, Shape::Square, Color::Red, 1, 1),
                SceneObject::new(1, Shape::Circle, Color::Green, 3, 3),
                SceneObject::new(2, Shape::Triangle, Color::Blue, 5, 5),
            ],
        )
        .unwrap();
        let output = Scene::new(
            10,
            10,
            vec![
                SceneObject::new(0, Shape::Square, Color::Yellow, 1, 1),
                SceneObject::new(1, Shape::Circle, Color::Green, 3, 4),
                SceneObject::new(2, Shape::Triangle, Color::Blue, 5, 5),
            ],
        )
        .unwrap();
        let concept = Concept::new(
            "diff",
            vec![Example::new(input, output).unwrap()],
        )
        .unwrap();

        let prior = argument_prior(&concept, 0.0);
        assert_eq!(prior.set_color_attn[Color::Blue.index()], 0.0);
        assert!((prior.set_color_attn.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(prior.set_color_attn[Color::Red.index()] > 0.0);
        assert!(prior.set_color_attn[Color::Yellow.index()] > 0.0);
        assert_eq!(prior.set_shape_attn[Shape::Star.index()], 0.0);
        assert!(prior.set_shape_attn[Shape::Square.index()] > 0.0);

        let soft = argument_prior(&concept, DEFAULT_EPSILON_ARG);
        assert!(soft.set_color_attn[Color::Blue.index()] > 0.0);
        assert!(
            soft.set_color_attn[Color::Blue.index()] < soft.set_color_attn[Color::Red.index()]
        );

        // No diffs at all: uniform.
        let same = Concept::new(
            "same",
            vec![Example::new(
                Scene::new(5, 5, vec![]).unwrap(),
                Scene::new(5, 5, vec![]).unwrap(),
            )
            .unwrap()],
        )
        .unwrap();
        assert_eq!(argument_prior(&same, 0.0).set_color_attn, [0.25; 4]);
    }

    #[test]
    fn model_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let states = registry();
        let mask = Mask::derive(states, &[recolor_program(Color::Red, Color::Blue)]);
        let model = train(&[recolor_program(Color::Red, Color::Blue)], 0.1, &mask).unwrap();

        let model_path = dir.path().join("model.json");
        model.save(&model_path).unwrap();
        let loaded = TransitionModel::load(&model_path).unwrap();
        assert_eq!(model.states, loaded.states);
        assert_eq!(model.mask, loaded.mask);
        for (a, b) in model.probs.iter().zip(&loaded.probs) {
            let rel = if *a == 0.0 { (a - b).abs() } else { ((a - b) / a).abs() };
            assert!(rel < 1e-12);
        }

        let mask_path = dir.path().join("mask.json");
        model.mask().save(&mask_path).unwrap();
        assert_eq!(Mask::load(&mask_path).unwrap(), *model.mask());
    }
}
