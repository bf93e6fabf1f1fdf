//! Instruction set and virtual machine for cognitive programs.
//!
//! A program is a sequence of instructions executed against a [`VmState`]
//! holding a working scene, a hand (which may hold one object), a fixation
//! point with history, attention filters, an attended-object list, and a
//! loop stack. Twenty opcodes expand to 29 argumented variants over the
//! four-color / four-shape palette:
//!
//! | group      | instructions |
//! |------------|--------------|
//! | perception | `scene_parse` |
//! | attention  | `set_color_attn(c)`, `set_shape_attn(s)`, `top_down_attend`, `reset_attn`, `next_object` |
//! | fixation   | `fixate_object`, `fixate_previous`, `fixate_next` |
//! | hand       | `move_hand_to_attended_object`, `move_hand_to_fixation`, `move_hand_up/down/left/right`, `grab_object`, `release_object` |
//! | drawing    | `fill_color(c)` |
//! | control    | `loop_start`, `loop_end` |
//!
//! Execution never panics on malformed programs: every violation is
//! reported as an error outcome in [`ExecResult`].

mod exec;
mod parse;
pub mod render;

pub use exec::{
    execute, execute_untraced, step, ExecError, ExecErrorKind, ExecResult, InvalidReason,
    LoopFrame, Outcome, TraceStep, VmState, STEP_CAP,
};
pub use parse::{parse_instruction, parse_program, ParseError};

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::world::{Color, Shape};

/// The twenty primitive opcodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Opcode {
    SceneParse,
    SetColorAttn,
    SetShapeAttn,
    TopDownAttend,
    ResetAttn,
    NextObject,
    FixateObject,
    FixatePrevious,
    FixateNext,
    MoveHandToAttendedObject,
    MoveHandToFixation,
    MoveHandUp,
    MoveHandDown,
    MoveHandLeft,
    MoveHandRight,
    GrabObject,
    ReleaseObject,
    FillColor,
    LoopStart,
    LoopEnd,
}

/// Which argument an opcode expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgKind {
    None,
    Color,
    Shape,
}

impl Opcode {
    pub const ALL: [Opcode; 20] = [
        Opcode::SceneParse,
        Opcode::SetColorAttn,
        Opcode::SetShapeAttn,
        Opcode::TopDownAttend,
        Opcode::ResetAttn,
        Opcode::NextObject,
        Opcode::FixateObject,
        Opcode::FixatePrevious,
        Opcode::FixateNext,
        Opcode::MoveHandToAttendedObject,
        Opcode::MoveHandToFixation,
        Opcode::MoveHandUp,
        Opcode::MoveHandDown,
        Opcode::MoveHandLeft,
        Opcode::MoveHandRight,
        Opcode::GrabObject,
        Opcode::ReleaseObject,
        Opcode::FillColor,
        Opcode::LoopStart,
        Opcode::LoopEnd,
    ];

    pub fn arg_kind(self) -> ArgKind {
        match self {
            Opcode::SetColorAttn | Opcode::FillColor => ArgKind::Color,
            Opcode::SetShapeAttn => ArgKind::Shape,
            _ => ArgKind::None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Opcode::SceneParse => "scene_parse",
            Opcode::SetColorAttn => "set_color_attn",
            Opcode::SetShapeAttn => "set_shape_attn",
            Opcode::TopDownAttend => "top_down_attend",
            Opcode::ResetAttn => "reset_attn",
            Opcode::NextObject => "next_object",
            Opcode::FixateObject => "fixate_object",
            Opcode::FixatePrevious => "fixate_previous",
            Opcode::FixateNext => "fixate_next",
            Opcode::MoveHandToAttendedObject => "move_hand_to_attended_object",
            Opcode::MoveHandToFixation => "move_hand_to_fixation",
            Opcode::MoveHandUp => "move_hand_up",
            Opcode::MoveHandDown => "move_hand_down",
            Opcode::MoveHandLeft => "move_hand_left",
            Opcode::MoveHandRight => "move_hand_right",
            Opcode::GrabObject => "grab_object",
            Opcode::ReleaseObject => "release_object",
            Opcode::FillColor => "fill_color",
            Opcode::LoopStart => "loop_start",
            Opcode::LoopEnd => "loop_end",
        }
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An instruction argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Arg {
    Color(Color),
    Shape(Shape),
}

/// One argumented instruction. The argument is present exactly when the
/// opcode requires one; [`Instruction::new`] enforces this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Instruction {
    opcode: Opcode,
    arg: Option<Arg>,
}

impl Instruction {
    pub fn new(opcode: Opcode, arg: Option<Arg>) -> Result<Instruction, String> {
        let ok = matches!(
            (opcode.arg_kind(), arg),
            (ArgKind::None, None) | (ArgKind::Color, Some(Arg::Color(_))) | (ArgKind::Shape, Some(Arg::Shape(_)))
        );
        if ok {
            Ok(Instruction { opcode, arg })
        } else {
            Err(format!("opcode {opcode} given incompatible argument {arg:?}"))
        }
    }

    pub fn opcode(self) -> Opcode {
        self.opcode
    }

    pub fn arg(self) -> Option<Arg> {
        self.arg
    }

    pub fn color_arg(self) -> Option<Color> {
        match self.arg {
            Some(Arg::Color(c)) => Some(c),
            _ => None,
        }
    }

    pub fn shape_arg(self) -> Option<Shape> {
        match self.arg {
            Some(Arg::Shape(s)) => Some(s),
            _ => None,
        }
    }

    /// Registry-independent two-byte encoding, used for seen-set keys.
    pub fn encode(self) -> [u8; 2] {
        let arg = match self.arg {
            None => 0xff,
            Some(Arg::Color(c)) => c.index() as u8,
            Some(Arg::Shape(s)) => 0x10 + s.index() as u8,
        };
        [self.opcode as u8, arg]
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.arg {
            None => write!(f, "{}", self.opcode),
            Some(Arg::Color(c)) => write!(f, "{}({})", self.opcode, c),
            Some(Arg::Shape(s)) => write!(f, "{}({})", self.opcode, s),
        }
    }
}

/// Convenience constructors for writing programs in code.
pub mod ops {
    use super::{Arg, Instruction, Opcode};
    use crate::world::{Color, Shape};

    fn simple(op: Opcode) -> Instruction {
        Instruction::new(op, None).unwrap()
    }

    pub fn scene_parse() -> Instruction {
        simple(Opcode::SceneParse)
    }
    pub fn set_color_attn(c: Color) -> Instruction {
        Instruction::new(Opcode::SetColorAttn, Some(Arg::Color(c))).unwrap()
    }
    pub fn set_shape_attn(s: Shape) -> Instruction {
        Instruction::new(Opcode::SetShapeAttn, Some(Arg::Shape(s))).unwrap()
    }
    pub fn top_down_attend() -> Instruction {
        simple(Opcode::TopDownAttend)
    }
    pub fn reset_attn() -> Instruction {
        simple(Opcode::ResetAttn)
    }
    pub fn next_object() -> Instruction {
        simple(Opcode::NextObject)
    }
    pub fn fixate_object() -> Instruction {
        simple(Opcode::FixateObject)
    }
    pub fn fixate_previous() -> Instruction {
        simple(Opcode::FixatePrevious)
    }
    pub fn fixate_next() -> Instruction {
        simple(Opcode::FixateNext)
    }
    pub fn move_hand_to_attended_object() -> Instruction {
        simple(Opcode::MoveHandToAttendedObject)
    }
    pub fn move_hand_to_fixation() -> Instruction {
        simple(Opcode::MoveHandToFixation)
    }
    pub fn move_hand_up() -> Instruction {
        simple(Opcode::MoveHandUp)
    }
    pub fn move_hand_down() -> Instruction {
        simple(Opcode::MoveHandDown)
    }
    pub fn move_hand_left() -> Instruction {
        simple(Opcode::MoveHandLeft)
    }
    pub fn move_hand_right() -> Instruction {
        simple(Opcode::MoveHandRight)
    }
    pub fn grab_object() -> Instruction {
        simple(Opcode::GrabObject)
    }
    pub fn release_object() -> Instruction {
        simple(Opcode::ReleaseObject)
    }
    pub fn fill_color(c: Color) -> Instruction {
        Instruction::new(Opcode::FillColor, Some(Arg::Color(c))).unwrap()
    }
    pub fn loop_start() -> Instruction {
        simple(Opcode::LoopStart)
    }
    pub fn loop_end() -> Instruction {
        simple(Opcode::LoopEnd)
    }
}

/// All 29 argumented variants in canonical order: opcodes in declaration
/// order, color arguments in palette order, shape arguments in palette order.
pub fn registry() -> &'static [Instruction] {
    static REG: OnceLock<Vec<Instruction>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut out = Vec::with_capacity(29);
        for op in Opcode::ALL {
            match op.arg_kind() {
                ArgKind::None => out.push(Instruction::new(op, None).unwrap()),
                ArgKind::Color => {
                    for c in Color::ALL {
                        out.push(Instruction::new(op, Some(Arg::Color(c))).unwrap());
                    }
                }
                ArgKind::Shape => {
                    for s in Shape::ALL {
                        out.push(Instruction::new(op, Some(Arg::Shape(s))).unwrap());
                    }
                }
            }
        }
        out
    })
}

/// A sequence of instructions. A well-formed program starts with
/// `scene_parse`, which appears nowhere else; [`Program::validate`] checks
/// this, and execution reports violations as error outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Program(Vec<Instruction>);

impl Program {
    pub fn new(instructions: Vec<Instruction>) -> Program {
        Program(instructions)
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Instruction> {
        self.0.get(i)
    }

    pub fn with_appended(&self, inst: Instruction) -> Program {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(inst);
        Program(v)
    }

    pub fn validate(&self) -> Result<(), String> {
        for (i, inst) in self.0.iter().enumerate() {
            let is_parse = inst.opcode() == Opcode::SceneParse;
            if i == 0 && !is_parse {
                return Err("programs must start with scene_parse".into());
            }
            if i > 0 && is_parse {
                return Err(format!("scene_parse reappears at index {i}"));
            }
        }
        Ok(())
    }

    /// Canonical byte encoding (two bytes per instruction).
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.0.len() * 2);
        for inst in &self.0 {
            out.extend_from_slice(&inst.encode());
        }
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for inst in &self.0 {
            writeln!(f, "{inst}")?;
        }
        Ok(())
    }
}

impl FromIterator<Instruction> for Program {
    fn from_iter<T: IntoIterator<Item = Instruction>>(iter: T) -> Self {
        Program(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Color;

    #[test]
    fn registry_has_29_unique_variants() {
        let reg = registry();
        assert_eq!(reg.len(), 29);
        let set: std::collections::BTreeSet<_> = reg.iter().collect();
        assert_eq!(set.len(), 29);
        let encodings: std::collections::BTreeSet<_> = reg.iter().map(|i| i.encode()).collect();
        assert_eq!(encodings.len(), 29);
    }

    #[test]
    fn instruction_arity_is_enforced() {
        assert!(Instruction::new(Opcode::SceneParse, Some(Arg::Color(Color::Red))).is_err());
        assert!(Instruction::new(Opcode::FillColor, None).is_err());
        assert!(Instruction::new(
            Opcode::SetShapeAttn,
            Some(Arg::Color(Color::Red))
        )
        .is_err());
    }

    #[test]
    fn program_validation() {
        use super::ops::*;
        assert!(Program::new(vec![scene_parse(), top_down_attend()])
            .validate()
            .is_ok());
        assert!(Program::new(vec![top_down_attend()]).validate().is_err());
        assert!(Program::new(vec![scene_parse(), scene_parse()])
            .validate()
            .is_err());
        assert!(Program::default().validate().is_ok());
    }
}
