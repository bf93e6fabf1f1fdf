//! Text format for programs: one instruction per line, `opcode` or
//! `opcode(argument)`, with `#` comments.

use super::{Arg, ArgKind, Instruction, Opcode, Program};
use crate::world::{Color, Shape};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn opcode_by_name(name: &str) -> Option<Opcode> {
    // Accepted aliases seen in the wild for two instructions.
    let name = match name {
        "move_hand_to_object" => "move_hand_to_attended_object",
        "reset_attention" => "reset_attn",
        other => other,
    };
    Opcode::ALL.into_iter().find(|op| op.as_str() == name)
}

/// Parses a single `opcode` or `opcode(arg)` token.
pub fn parse_instruction(token: &str) -> Result<Instruction, String> {
    let token = token.trim();
    let (name, arg_text) = match token.find('(') {
        None => (token, None),
        Some(open) => {
            let rest = &token[open + 1..];
            let close = rest
                .find(')')
                .ok_or_else(|| format!("missing `)` in `{token}`"))?;
            if !rest[close + 1..].trim().is_empty() {
                return Err(format!("trailing text after `)` in `{token}`"));
            }
            (&token[..open], Some(rest[..close].trim()))
        }
    };
    let opcode =
        opcode_by_name(name).ok_or_else(|| format!("unknown instruction `{name}`"))?;
    let arg = match (opcode.arg_kind(), arg_text) {
        (ArgKind::None, None) => None,
        (ArgKind::Color, Some(a)) => Some(Arg::Color(
            a.parse::<Color>().map_err(|e| format!("{e} in `{token}`"))?,
        )),
        (ArgKind::Shape, Some(a)) => Some(Arg::Shape(
            a.parse::<Shape>().map_err(|e| format!("{e} in `{token}`"))?,
        )),
        (ArgKind::None, Some(_)) => {
            return Err(format!("`{name}` takes no argument"));
        }
        (_, None) => return Err(format!("`{name}` requires an argument")),
    };
    Instruction::new(opcode, arg)
}

/// Parses a whole program and validates its structure.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut instructions = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let inst = parse_instruction(content).map_err(|message| ParseError { line, message })?;
        instructions.push(inst);
    }
    let program = Program::new(instructions);
    program
        .validate()
        .map_err(|message| ParseError { line: 0, message })?;
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulator::ops::*;
    use crate::world::Color;

    #[test]
    fn round_trips_through_display() {
        let program = Program::new(vec![
            scene_parse(),
            set_color_attn(Color::Green),
            top_down_attend(),
            move_hand_to_attended_object(),
            grab_object(),
            move_hand_up(),
            release_object(),
            fill_color(Color::Yellow),
        ]);
        let text = program.to_string();
        assert_eq!(parse_program(&text).unwrap(), program);
    }

    #[test]
    fn accepts_comments_and_aliases() {
        let text = "\
# touch the red object
scene_parse
top_down_attend  # all objects
move_hand_to_object
reset_attention
";
        let p = parse_program(text).unwrap();
        assert_eq!(
            p,
            Program::new(vec![
                scene_parse(),
                top_down_attend(),
                move_hand_to_attended_object(),
                reset_attn(),
            ])
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_program("scene_parse\nwiggle").is_err());
        assert!(parse_program("scene_parse\nfill_color").is_err());
        assert!(parse_program("scene_parse\nfill_color(mauve)").is_err());
        assert!(parse_program("scene_parse\ntop_down_attend(red)").is_err());
        assert!(parse_program("scene_parse\nset_shape_attn(red)").is_err());
        assert!(parse_program("top_down_attend").is_err());
        assert!(parse_program("scene_parse\nscene_parse").is_err());
        let err = parse_program("scene_parse\nbogus_op").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
