//! The built-in transition-training set and the default model derived from
//! it.
//!
//! Training programs are ground truths written in the loop-free instruction
//! idioms: selection by filter, grab/slide/release blocks, fixation
//! bookkeeping, touches, and recoloring. Loop markers are deliberately
//! absent, so loop transitions never acquire counts and stay reachable only
//! through the generic insertion allowance of the dependency mask — looping
//! programs are meant to be discovered by mutation of an adopted sub-goal,
//! not assembled step by step.

use crate::emulator::{ops, Program};
use crate::model::{train, Mask, TransitionModel, DEFAULT_ALPHA};
use crate::world::Color;

use super::fixtures::fixture_training_gts;

fn recolor(c: Color, fresh: Color) -> Program {
    Program::new(vec![
        ops::scene_parse(),
        ops::set_color_attn(c),
        ops::top_down_attend(),
        ops::fill_color(fresh),
    ])
}

fn corner(c: Color, d1: crate::emulator::Instruction, d2: crate::emulator::Instruction) -> Program {
    Program::new(vec![
        ops::scene_parse(),
        ops::set_color_attn(c),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        d1,
        d2,
        ops::release_object(),
    ])
}

fn touch(mover: Color, target: Color) -> Program {
    Program::new(vec![
        ops::scene_parse(),
        ops::set_color_attn(mover),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        ops::set_color_attn(target),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::release_object(),
    ])
}

fn touch_recolor(mover: Color, target: Color, fresh: Color) -> Program {
    let mut v = touch(mover, target).instructions().to_vec();
    v.push(ops::fill_color(fresh));
    Program::new(v)
}

fn replace(displaced: Color, d: crate::emulator::Instruction, mover: Color) -> Program {
    Program::new(vec![
        ops::scene_parse(),
        ops::set_color_attn(displaced),
        ops::top_down_attend(),
        ops::fixate_object(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        d,
        ops::release_object(),
        ops::set_color_attn(mover),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        ops::move_hand_to_fixation(),
        ops::release_object(),
    ])
}

fn swap(first: Color, second: Color, park: crate::emulator::Instruction) -> Program {
    Program::new(vec![
        ops::scene_parse(),
        ops::set_color_attn(first),
        ops::top_down_attend(),
        ops::fixate_object(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        park,
        ops::release_object(),
        ops::set_color_attn(second),
        ops::top_down_attend(),
        ops::fixate_object(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        ops::fixate_previous(),
        ops::move_hand_to_fixation(),
        ops::release_object(),
        ops::set_color_attn(first),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        ops::fixate_next(),
        ops::move_hand_to_fixation(),
        ops::release_object(),
    ])
}

fn move_block(c: Color, d: crate::emulator::Instruction) -> Vec<crate::emulator::Instruction> {
    vec![
        ops::set_color_attn(c),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        d,
        ops::release_object(),
    ]
}

fn recolor_block(c: Color, fresh: Color) -> Vec<crate::emulator::Instruction> {
    vec![
        ops::set_color_attn(c),
        ops::top_down_attend(),
        ops::fill_color(fresh),
    ]
}

/// All built-in training ground truths.
pub fn training_programs() -> Vec<Program> {
    use Color::*;
    let (up, down, left, right) = (
        ops::move_hand_up(),
        ops::move_hand_down(),
        ops::move_hand_left(),
        ops::move_hand_right(),
    );
    let mut out = vec![
        recolor(Red, Blue),
        recolor(Green, Yellow),
        recolor(Blue, Red),
        recolor(Yellow, Green),
        corner(Red, left, up),
        corner(Green, right, down),
        corner(Blue, left, down),
        corner(Yellow, right, up),
        touch(Red, Green),
        touch(Blue, Yellow),
        touch(Green, Red),
        touch_recolor(Green, Blue, Red),
        touch_recolor(Yellow, Red, Blue),
        replace(Red, up, Green),
        replace(Blue, left, Yellow),
        swap(Red, Blue, up),
        swap(Green, Yellow, right),
    ];
    let two_moves = {
        let mut v = vec![ops::scene_parse()];
        v.extend(move_block(Red, left));
        v.extend(move_block(Blue, down));
        Program::new(v)
    };
    let moves_then_recolor = {
        let mut v = vec![ops::scene_parse()];
        v.extend(move_block(Green, right));
        v.extend(move_block(Yellow, up));
        v.extend(recolor_block(Red, Green));
        Program::new(v)
    };
    let recolor_between_moves = {
        let mut v = vec![ops::scene_parse()];
        v.extend(move_block(Blue, down));
        v.extend(recolor_block(Red, Yellow));
        v.extend(move_block(Green, left));
        Program::new(v)
    };
    out.push(two_moves);
    out.push(moves_then_recolor);
    out.push(recolor_between_moves);
    out.extend(fixture_training_gts());
    out
}

/// The dependency mask shipped with the crate, embedded from
/// `data/default_mask.json`. The file is derived from the built-in training
/// set over the full instruction registry; `regenerate_default_mask` (an
/// ignored test in this module) rewrites it and a companion test keeps it in
/// lockstep with [`training_programs`].
pub fn default_mask() -> Mask {
    static DEFAULT_MASK_JSON: &str =
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/default_mask.json"));
    Mask::from_json(DEFAULT_MASK_JSON).expect("embedded mask file is well-formed")
}


/// Transition model trained on the built-in set under the default
/// smoothing, using [`default_mask`].
pub fn default_model() -> TransitionModel {
    train(&training_programs(), DEFAULT_ALPHA, &default_mask())
        .expect("built-in training set is well-formed")
}
