//! Hand-built diagnostic concepts with fixed geometry.
//!
//! Unlike the seeded templates these are single canonical instances, each
//! constructed to expose one specific behavior of the search:
//!
//! * `wrong_order` — a touch-then-recolor task whose cheap recolor-only
//!   prefix is a trap: adopting it first destroys every route to the touch
//!   half, because the recolor removes the color the touch must select and
//!   the remaining yellow objects rank differently across examples.
//! * `mistaken_identity` — two identical objects trade places such that one
//!   input object already sits on a property-identical target cell;
//!   property-level matching therefore refuses every first grab, while
//!   identity-level matching solves the task.
//! * `faulty_argument` — the moved object must park against a star whose
//!   shape never appears in the input/output differences, so the solution
//!   needs an argument from outside the evidence-supported set.
//! * `swap_locations` — a full two-object exchange whose earliest partial
//!   credit lies fourteen instructions deep; far beyond the default budget.
//! * `replace_demo`, `stack_demo` — fixed-seed template instances kept as
//!   worked examples for the renderer and the command-line tools.
//!
//! Outputs are always derived by executing the ground truth, and the
//! builders assert the geometric facts each diagnostic depends on.

use crate::emulator::{execute_untraced, ops, Program};
use crate::world::{Color, Concept, Example, Scene, SceneObject, Shape};

use super::templates::{swap_program, Dir};
use super::{generate, GeneratedConcept};

/// Names of all fixed diagnostic concepts.
pub const FIXTURE_NAMES: [&str; 6] = [
    "wrong_order",
    "mistaken_identity",
    "faulty_argument",
    "swap_locations",
    "replace_demo",
    "stack_demo",
];

pub(super) fn fixture(name: &str) -> Option<GeneratedConcept> {
    Some(match name {
        "wrong_order" => wrong_order(),
        "mistaken_identity" => mistaken_identity(),
        "faulty_argument" => faulty_argument(),
        "swap_locations" => swap_fixture(),
        "replace_demo" => demo("replace_demo", "move_and_replace", REPLACE_DEMO_SEED),
        "stack_demo" => demo("stack_demo", "stack_variable", STACK_DEMO_SEED),
        _ => return None,
    })
}

const REPLACE_DEMO_SEED: u64 = 5;
const STACK_DEMO_SEED: u64 = 3;

fn scene(objects: Vec<SceneObject>) -> Scene {
    Scene::new(10, 10, objects).expect("fixture scene is valid")
}

fn built(name: &str, gt: Program, inputs: Vec<Scene>) -> GeneratedConcept {
    let examples: Vec<Example> = inputs
        .into_iter()
        .map(|input| {
            let run = execute_untraced(&gt, &input);
            assert!(
                run.outcome.is_ok() && run.final_state.held.is_none(),
                "fixture ground truth must run cleanly"
            );
            Example::new(input, run.final_state.working).expect("fixture example is well-formed")
        })
        .collect();
    GeneratedConcept {
        concept: Concept::new(name, examples).expect("fixture concept is well-formed"),
        ground_truth: gt,
    }
}

fn demo(name: &str, template: &str, seed: u64) -> GeneratedConcept {
    let mut g = generate(template, seed).expect("demo seed generates");
    g.concept.name = name.to_string();
    g
}

pub(super) fn wrong_order_gt() -> Program {
    Program::new(vec![
        ops::scene_parse(),
        ops::set_color_attn(Color::Green),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        ops::set_color_attn(Color::Red),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::release_object(),
        ops::fill_color(Color::Yellow),
    ])
}

/// Green circle touches the red square, then the square turns yellow.
///
/// In the second example the yellow distractor sits closer to the center
/// than the square, so once the square has already been recolored, every
/// yellow- or square-directed selection picks the distractor there and the
/// touch lands on the wrong object.
fn wrong_order() -> GeneratedConcept {
    let ex1 = scene(vec![
        SceneObject::new(0, Shape::Circle, Color::Green, 2, 3),
        SceneObject::new(1, Shape::Square, Color::Red, 6, 6),
        SceneObject::new(2, Shape::Square, Color::Yellow, 8, 1),
    ]);
    let ex2 = scene(vec![
        SceneObject::new(0, Shape::Circle, Color::Green, 1, 6),
        SceneObject::new(1, Shape::Square, Color::Red, 7, 7),
        SceneObject::new(2, Shape::Square, Color::Yellow, 4, 4),
    ]);
    let center = ex2.center();
    for s in [&ex1, &ex2] {
        let g = s.objects()[0].pos;
        let r = s.objects()[1].pos;
        assert!(g.x != r.x && g.y != r.y, "no straight slide reaches the square");
    }
    let r2 = ex2.objects()[1].pos.dist2(center);
    let y2 = ex2.objects()[2].pos.dist2(center);
    assert!(y2 < r2, "distractor must outrank the square once both are yellow");
    built("wrong_order", wrong_order_gt(), vec![ex1, ex2])
}

pub(super) fn mistaken_identity_gt() -> Program {
    Program::new(vec![
        ops::scene_parse(),
        ops::top_down_attend(),
        ops::fixate_object(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        ops::move_hand_left(),
        ops::move_hand_up(),
        ops::release_object(),
        ops::set_color_attn(Color::Red),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        ops::move_hand_to_fixation(),
        ops::release_object(),
    ])
}

/// Two identical red squares: the central one retires to the corner and the
/// other takes its cell. The vacated cell is the only property-level match
/// in the initial scene, so any first grab loses it under property matching.
fn mistaken_identity() -> GeneratedConcept {
    let ex1 = scene(vec![
        SceneObject::new(0, Shape::Square, Color::Red, 4, 4),
        SceneObject::new(1, Shape::Square, Color::Red, 7, 6),
    ]);
    let ex2 = scene(vec![
        SceneObject::new(0, Shape::Square, Color::Red, 4, 5),
        SceneObject::new(1, Shape::Square, Color::Red, 2, 8),
    ]);
    for s in [&ex1, &ex2] {
        let center = s.center();
        let a = s.objects()[0].pos;
        let b = s.objects()[1].pos;
        assert!(a.dist2(center) < b.dist2(center), "central square moves first");
        assert!(
            b.x != 0 && b.x != 9 && b.y != 0 && b.y != 9 && b != center,
            "the other square must be unreachable before the first move"
        );
    }
    built("mistaken_identity", mistaken_identity_gt(), vec![ex1, ex2])
}

pub(super) fn faulty_argument_gt() -> Program {
    Program::new(vec![
        ops::scene_parse(),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        ops::set_shape_attn(Shape::Star),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::release_object(),
    ])
}

/// The red circle parks against the blue star. Only the circle changes
/// between input and output, so neither the star's shape nor its color is in
/// the evidence-supported argument set: with a zero argument floor the
/// selection is priced out entirely. The green triangle sits strictly closer
/// to the fixation than the star, so unfiltered attention never ranks the
/// star first and no argument-free route can single it out.
fn faulty_argument() -> GeneratedConcept {
    let ex1 = scene(vec![
        SceneObject::new(0, Shape::Circle, Color::Red, 5, 4),
        SceneObject::new(1, Shape::Star, Color::Blue, 2, 7),
        SceneObject::new(2, Shape::Triangle, Color::Green, 3, 6),
    ]);
    let ex2 = scene(vec![
        SceneObject::new(0, Shape::Circle, Color::Red, 6, 5),
        SceneObject::new(1, Shape::Star, Color::Blue, 3, 1),
        SceneObject::new(2, Shape::Triangle, Color::Green, 7, 3),
    ]);
    for s in [&ex1, &ex2] {
        let center = s.center();
        let c = s.objects()[0].pos;
        assert!(
            s.objects()[1..].iter().all(|o| c.dist2(center) < o.pos.dist2(center)),
            "the circle must rank first under unfiltered attention"
        );
        let star = s.objects()[1].pos;
        let tri = s.objects()[2].pos;
        assert!(
            tri.dist2(center) < star.dist2(center),
            "the triangle must outrank the star under unfiltered attention"
        );
        assert!(c.x != star.x && c.y != star.y, "no straight slide reaches the star");
    }
    built("faulty_argument", faulty_argument_gt(), vec![ex1, ex2])
}

/// Red square and blue circle exchange cells via a wall parking spot.
/// Nothing matches until fourteen instructions in, so the default budget
/// gives up while a far larger one still faces a fourteen-deep first climb.
fn swap_fixture() -> GeneratedConcept {
    let gt = swap_program(Color::Red, Color::Blue, Dir::Up);
    let ex1 = scene(vec![
        SceneObject::new(0, Shape::Square, Color::Red, 3, 2),
        SceneObject::new(1, Shape::Circle, Color::Blue, 6, 7),
    ]);
    let ex2 = scene(vec![
        SceneObject::new(0, Shape::Square, Color::Red, 2, 6),
        SceneObject::new(1, Shape::Circle, Color::Blue, 7, 3),
    ]);
    let g = built("swap_locations", gt, vec![ex1, ex2]);
    for e in &g.concept.examples {
        let a_in = e.input.objects()[0].pos;
        let b_in = e.input.objects()[1].pos;
        assert_eq!(e.output.objects()[0].pos, b_in, "first object takes the second cell");
        assert_eq!(e.output.objects()[1].pos, a_in, "second object takes the first cell");
    }
    g
}

/// Ground truths of the hand-built fixtures, used for transition training.
pub(super) fn fixture_training_gts() -> Vec<Program> {
    vec![wrong_order_gt(), mistaken_identity_gt(), faulty_argument_gt()]
}
