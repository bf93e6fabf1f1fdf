//! Stepping semantics for the virtual machine.

use serde::{Deserialize, Serialize};

use super::{Instruction, Opcode, Program};
use crate::world::{Color, GridPos, ObjectId, Scene, Shape};

/// Hard per-execution step limit; exceeding it is reported as an error.
pub const STEP_CAP: usize = 1000;

/// One open loop: index of its `loop_start` and completed iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopFrame {
    pub start: usize,
    pub count: u32,
}

/// Full machine state between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct VmState {
    pub working: Scene,
    pub hand: GridPos,
    pub held: Option<ObjectId>,
    pub fixation: GridPos,
    pub fixation_history: Vec<GridPos>,
    /// Index of the current history entry; 0 while the history is empty.
    pub fixation_cursor: usize,
    pub color_filter: Option<Color>,
    pub shape_filter: Option<Shape>,
    pub attended: Vec<ObjectId>,
    pub attended_index: Option<usize>,
    pub loop_stack: Vec<LoopFrame>,
    pub parsed: bool,
}

impl VmState {
    pub fn new(input: &Scene) -> VmState {
        let center = input.center();
        VmState {
            working: input.clone(),
            hand: center,
            held: None,
            fixation: center,
            fixation_history: Vec::new(),
            fixation_cursor: 0,
            color_filter: None,
            shape_filter: None,
            attended: Vec::new(),
            attended_index: None,
            loop_stack: Vec::new(),
            parsed: false,
        }
    }

    /// The object currently designated by the attention index.
    pub fn attended_object(&self) -> Option<ObjectId> {
        self.attended_index.and_then(|i| self.attended.get(i)).copied()
    }

    /// Structural invariants, checked after every step in debug builds.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.working.in_bounds(self.hand) {
            return Err(format!("hand {} out of bounds", self.hand));
        }
        if !self.working.in_bounds(self.fixation) {
            return Err(format!("fixation {} out of bounds", self.fixation));
        }
        if let Some(id) = self.held {
            match self.working.object(id) {
                None => return Err(format!("held {id} not in scene")),
                Some(o) if o.pos != self.hand => {
                    return Err(format!("held {id} at {} but hand at {}", o.pos, self.hand))
                }
                _ => {}
            }
        }
        for id in &self.attended {
            if self.working.object(*id).is_none() {
                return Err(format!("attended {id} not in scene"));
            }
        }
        if let Some(i) = self.attended_index {
            if i >= self.attended.len() {
                return Err(format!("attended index {i} out of range"));
            }
        }
        if self.fixation_cursor > self.fixation_history.len()
            || (!self.fixation_history.is_empty()
                && self.fixation_cursor >= self.fixation_history.len())
        {
            return Err(format!(
                "fixation cursor {} invalid for history of {}",
                self.fixation_cursor,
                self.fixation_history.len()
            ));
        }
        let cap = self.working.objects().len() as u32 + 1;
        for f in &self.loop_stack {
            if f.count > cap {
                return Err(format!("loop count {} exceeds cap {cap}", f.count));
            }
        }
        Ok(())
    }
}

/// Why a transition was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvalidReason {
    /// First executed instruction was not `scene_parse`.
    NotParsed,
    /// `scene_parse` after step 0.
    SceneParseNotFirst,
    /// `top_down_attend` selected no objects.
    EmptyAttention,
    /// No attended object for `fixate_object` / `move_hand_to_attended_object` / `fill_color`.
    NoAttendedObject,
    /// `move_hand_to_attended_object` aimed at the held object.
    AttendedObjectHeld,
    /// `next_object` ran past the end outside any loop.
    AttentionExhausted,
    /// `fixate_previous` / `fixate_next` at a history boundary.
    FixationHistoryBoundary,
    GrabWhileHolding,
    NothingToGrab,
    ReleaseEmptyHand,
    LoopEndWithoutLoop,
}

impl std::fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InvalidReason::NotParsed => "instruction before scene_parse",
            InvalidReason::SceneParseNotFirst => "scene_parse after step 0",
            InvalidReason::EmptyAttention => "attention selected no objects",
            InvalidReason::NoAttendedObject => "no attended object",
            InvalidReason::AttendedObjectHeld => "attended object is held",
            InvalidReason::AttentionExhausted => "attention exhausted outside loop",
            InvalidReason::FixationHistoryBoundary => "fixation history boundary",
            InvalidReason::GrabWhileHolding => "grab while holding",
            InvalidReason::NothingToGrab => "nothing under hand to grab",
            InvalidReason::ReleaseEmptyHand => "release with empty hand",
            InvalidReason::LoopEndWithoutLoop => "loop_end without open loop",
        };
        f.write_str(s)
    }
}

/// Error classes surfaced by execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecErrorKind {
    InvalidTransition(InvalidReason),
    StepCapExceeded,
}

impl std::fmt::Display for ExecErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExecErrorKind::InvalidTransition(r) => write!(f, "invalid transition: {r}"),
            ExecErrorKind::StepCapExceeded => write!(f, "step cap exceeded"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("{kind} at step {at_step}")]
pub struct ExecError {
    pub kind: ExecErrorKind,
    pub at_step: usize,
}

/// Whether a run completed or stopped on an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Error(ExecError),
}

impl Outcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, Outcome::Ok)
    }
}

/// Snapshot recorded after each executed step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub instr_index: usize,
    pub scene: Scene,
    pub hand: GridPos,
    pub held: Option<ObjectId>,
    pub fixation: GridPos,
    pub attended: Vec<ObjectId>,
}

/// Result of executing a program on an input scene.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecResult {
    pub outcome: Outcome,
    pub final_state: VmState,
    pub trace: Vec<TraceStep>,
}

/// Where control goes after a step.
enum Effect {
    Advance,
    Jump(usize),
    /// `next_object` exhausted inside the loop opened at this index: control
    /// transfers past the matching `loop_end`.
    ExhaustLoop(usize),
}

fn four_adjacent(a: GridPos, b: GridPos) -> bool {
    (a.x - b.x).abs() + (a.y - b.y).abs() == 1
}

/// Next cell on the x-then-y grid path from `from` toward `to`.
fn path_step(from: GridPos, to: GridPos) -> GridPos {
    if from.x != to.x {
        GridPos::new(from.x + (to.x - from.x).signum(), from.y)
    } else {
        GridPos::new(from.x, from.y + (to.y - from.y).signum())
    }
}

fn move_holding(state: &mut VmState, pos: GridPos) {
    state.hand = pos;
    if let Some(id) = state.held {
        state.working.set_pos(id, pos);
    }
}

/// Slide the hand (with its held object) along the x-then-y path toward
/// `target`, stopping at the first cell 4-adjacent to it, or earlier when
/// the next cell is blocked.
fn slide_to_adjacent(state: &mut VmState, target: GridPos) {
    while !four_adjacent(state.hand, target) {
        let next = path_step(state.hand, target);
        if next == target || !state.working.is_free(next, state.held) {
            break;
        }
        move_holding(state, next);
    }
}

/// Slide toward `target` entering it exactly; stops early when blocked.
fn slide_into(state: &mut VmState, target: GridPos) {
    while state.hand != target {
        let next = path_step(state.hand, target);
        if !state.working.is_free(next, state.held) {
            break;
        }
        move_holding(state, next);
    }
}

fn apply(
    state: &VmState,
    inst: &Instruction,
    program_index: usize,
) -> Result<(VmState, Effect), InvalidReason> {
    if !state.parsed && inst.opcode() != Opcode::SceneParse {
        return Err(InvalidReason::NotParsed);
    }
    let mut s = state.clone();
    let mut effect = Effect::Advance;
    match inst.opcode() {
        Opcode::SceneParse => {
            if state.parsed {
                return Err(InvalidReason::SceneParseNotFirst);
            }
            let center = s.working.center();
            s.hand = center;
            s.fixation = center;
            s.parsed = true;
        }
        Opcode::SetColorAttn => s.color_filter = inst.color_arg(),
        Opcode::SetShapeAttn => s.shape_filter = inst.shape_arg(),
        Opcode::TopDownAttend => {
            let mut selected: Vec<(i64, i32, i32, ObjectId)> = s
                .working
                .objects()
                .iter()
                .filter(|o| {
                    s.color_filter.map_or(true, |c| o.color == c)
                        && s.shape_filter.map_or(true, |sh| o.shape == sh)
                })
                .map(|o| (o.pos.dist2(s.fixation), o.pos.y, o.pos.x, o.id))
                .collect();
            if selected.is_empty() {
                return Err(InvalidReason::EmptyAttention);
            }
            selected.sort();
            s.attended = selected.into_iter().map(|t| t.3).collect();
            s.attended_index = Some(0);
        }
        Opcode::ResetAttn => {
            s.color_filter = None;
            s.shape_filter = None;
            s.attended.clear();
            s.attended_index = None;
        }
        Opcode::NextObject => match s.attended_index {
            Some(i) if i + 1 < s.attended.len() => s.attended_index = Some(i + 1),
            _ => {
                // Exhaustion deselects everything: instructions after the
                // loop exit must not act on a stale selection.
                s.attended.clear();
                s.attended_index = None;
                match s.loop_stack.pop() {
                    Some(frame) => effect = Effect::ExhaustLoop(frame.start),
                    None => return Err(InvalidReason::AttentionExhausted),
                }
            }
        },
        Opcode::FixateObject => {
            let id = s.attended_object().ok_or(InvalidReason::NoAttendedObject)?;
            let pos = s.working.object(id).expect("attended object exists").pos;
            s.fixation = pos;
            s.fixation_history.push(pos);
            s.fixation_cursor = s.fixation_history.len() - 1;
        }
        Opcode::FixatePrevious => {
            if s.fixation_history.is_empty() || s.fixation_cursor == 0 {
                return Err(InvalidReason::FixationHistoryBoundary);
            }
            s.fixation_cursor -= 1;
            s.fixation = s.fixation_history[s.fixation_cursor];
        }
        Opcode::FixateNext => {
            if s.fixation_cursor + 1 >= s.fixation_history.len() {
                return Err(InvalidReason::FixationHistoryBoundary);
            }
            s.fixation_cursor += 1;
            s.fixation = s.fixation_history[s.fixation_cursor];
        }
        Opcode::MoveHandToAttendedObject => {
            let id = s.attended_object().ok_or(InvalidReason::NoAttendedObject)?;
            if s.held == Some(id) {
                return Err(InvalidReason::AttendedObjectHeld);
            }
            let target = s.working.object(id).expect("attended object exists").pos;
            if s.held.is_none() {
                s.hand = target;
            } else {
                slide_to_adjacent(&mut s, target);
            }
        }
        Opcode::MoveHandToFixation => {
            let target = s.fixation;
            if s.held.is_none() {
                s.hand = target;
            } else if s.working.is_free(target, s.held) {
                slide_into(&mut s, target);
            } else {
                slide_to_adjacent(&mut s, target);
            }
        }
        Opcode::MoveHandUp | Opcode::MoveHandDown | Opcode::MoveHandLeft
        | Opcode::MoveHandRight => {
            let (dx, dy) = match inst.opcode() {
                Opcode::MoveHandUp => (0, -1),
                Opcode::MoveHandDown => (0, 1),
                Opcode::MoveHandLeft => (-1, 0),
                _ => (1, 0),
            };
            if let Some(id) = s.held {
                loop {
                    let next = s.hand.shifted(dx, dy);
                    if !s.working.is_free(next, Some(id)) {
                        break;
                    }
                    move_holding(&mut s, next);
                }
            } else {
                s.hand = GridPos::new(
                    if dx < 0 {
                        0
                    } else if dx > 0 {
                        s.working.width() - 1
                    } else {
                        s.hand.x
                    },
                    if dy < 0 {
                        0
                    } else if dy > 0 {
                        s.working.height() - 1
                    } else {
                        s.hand.y
                    },
                );
            }
        }
        Opcode::GrabObject => {
            if s.held.is_some() {
                return Err(InvalidReason::GrabWhileHolding);
            }
            let id = s
                .working
                .object_at(s.hand)
                .ok_or(InvalidReason::NothingToGrab)?
                .id;
            s.held = Some(id);
        }
        Opcode::ReleaseObject => {
            if s.held.is_none() {
                return Err(InvalidReason::ReleaseEmptyHand);
            }
            s.held = None;
        }
        Opcode::FillColor => {
            let id = s.attended_object().ok_or(InvalidReason::NoAttendedObject)?;
            s.working.set_color(id, inst.color_arg().expect("color arg"));
        }
        Opcode::LoopStart => s.loop_stack.push(LoopFrame {
            start: program_index,
            count: 0,
        }),
        Opcode::LoopEnd => {
            let n_objs = s.working.objects().len() as u32;
            let frame = s
                .loop_stack
                .last_mut()
                .ok_or(InvalidReason::LoopEndWithoutLoop)?;
            frame.count += 1;
            if frame.count > n_objs + 1 {
                s.loop_stack.pop();
            } else {
                effect = Effect::Jump(frame.start + 1);
            }
        }
    }
    debug_assert_eq!(s.check_invariants(), Ok(()), "after {inst}");
    Ok((s, effect))
}

/// Applies a single instruction, returning the successor state. Loop-control
/// transfers are reflected in the state (`loop_stack`); callers driving a
/// whole program should use [`execute`].
pub fn step(
    state: &VmState,
    inst: &Instruction,
    program_index: usize,
) -> Result<VmState, InvalidReason> {
    apply(state, inst, program_index).map(|(s, _)| s)
}

/// Index of the `loop_end` matching the `loop_start` at `start`, if any.
fn matching_loop_end(program: &Program, start: usize) -> Option<usize> {
    let mut depth = 1usize;
    for (i, inst) in program.instructions().iter().enumerate().skip(start + 1) {
        match inst.opcode() {
            Opcode::LoopStart => depth += 1,
            Opcode::LoopEnd => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn run(program: &Program, input: &Scene, traced: bool) -> ExecResult {
    let mut state = VmState::new(input);
    let mut trace = Vec::new();
    let mut outcome = Outcome::Ok;
    let mut pc = 0usize;
    let mut steps = 0usize;
    while pc < program.len() {
        if steps >= STEP_CAP {
            outcome = Outcome::Error(ExecError {
                kind: ExecErrorKind::StepCapExceeded,
                at_step: steps,
            });
            break;
        }
        let inst = program.get(pc).expect("pc in range");
        match apply(&state, inst, pc) {
            Err(reason) => {
                outcome = Outcome::Error(ExecError {
                    kind: ExecErrorKind::InvalidTransition(reason),
                    at_step: steps,
                });
                break;
            }
            Ok((next, effect)) => {
                state = next;
                steps += 1;
                if traced {
                    trace.push(TraceStep {
                        instr_index: pc,
                        scene: state.working.clone(),
                        hand: state.hand,
                        held: state.held,
                        fixation: state.fixation,
                        attended: state.attended.clone(),
                    });
                }
                pc = match effect {
                    Effect::Advance => pc + 1,
                    Effect::Jump(t) => t,
                    Effect::ExhaustLoop(start) => match matching_loop_end(program, start) {
                        Some(end) => end + 1,
                        None => program.len(),
                    },
                };
            }
        }
    }
    debug_assert!({
        let mut a: Vec<ObjectId> = input.objects().iter().map(|o| o.id).collect();
        let mut b: Vec<ObjectId> = state.working.objects().iter().map(|o| o.id).collect();
        a.sort();
        b.sort();
        a == b
    });
    ExecResult {
        outcome,
        final_state: state,
        trace,
    }
}

/// Executes a program, recording a per-step trace.
pub fn execute(program: &Program, input: &Scene) -> ExecResult {
    run(program, input, true)
}

/// Executes without recording a trace; used on search hot paths.
pub fn execute_untraced(program: &Program, input: &Scene) -> ExecResult {
    run(program, input, false)
}
