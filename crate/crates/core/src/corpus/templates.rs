//! Seeded generators for the standard concept templates.
//!
//! Each template samples concept-level parameters (colors, directions, block
//! structure) once, samples per-example object layouts under geometric
//! constraints, and derives every output scene by executing the ground-truth
//! program on the corresponding input. A sample is rejected when the run
//! errors, leaves an object in hand, changes nothing, or violates the
//! template's own predicate (for example: the touched pair must end adjacent,
//! a swap must exchange the two cells exactly). Rejection keeps resampling up
//! to the attempt cap in [`super::generate`].

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::ops::RangeInclusive;

use crate::emulator::{execute_untraced, ops, Instruction, Program};
use crate::world::{Color, Example, GridPos, ObjectId, Scene, SceneObject, Shape};

/// Grid side used by every template.
pub(super) const GRID: i32 = 10;

const PLACE_TRIES: usize = 64;

pub(super) type Generator = fn(&mut ChaCha8Rng) -> Option<(Vec<Example>, Program)>;

/// Names of all seeded templates, in registry order.
pub const TEMPLATE_NAMES: [&str; 8] = [
    "recolor_by_color",
    "move_to_corner",
    "touch",
    "touch_and_recolor",
    "move_and_replace",
    "swap_locations",
    "stack_variable",
    "k_independent_moves",
];

pub(super) fn generator(template: &str) -> Option<Generator> {
    Some(match template {
        "recolor_by_color" => recolor_by_color,
        "move_to_corner" => move_to_corner,
        "touch" => touch,
        "touch_and_recolor" => touch_and_recolor,
        "move_and_replace" => move_and_replace,
        "swap_locations" => swap_locations,
        "stack_variable" => stack_variable,
        "k_independent_moves" => k_independent_moves,
        _ => return None,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(super) enum Dir {
    Up,
    Down,
    Left,
    Right,
}

impl Dir {
    pub(super) const ALL: [Dir; 4] = [Dir::Up, Dir::Down, Dir::Left, Dir::Right];

    pub(super) fn instruction(self) -> Instruction {
        match self {
            Dir::Up => ops::move_hand_up(),
            Dir::Down => ops::move_hand_down(),
            Dir::Left => ops::move_hand_left(),
            Dir::Right => ops::move_hand_right(),
        }
    }

    fn horizontal(self) -> bool {
        matches!(self, Dir::Left | Dir::Right)
    }

    /// Coordinate of the wall a held object slides into along this direction.
    fn wall(self) -> i32 {
        match self {
            Dir::Up | Dir::Left => 0,
            Dir::Down | Dir::Right => GRID - 1,
        }
    }
}

/// Tracks reserved cells while an example is being laid out.
struct Placer {
    used: HashSet<(i32, i32)>,
}

impl Placer {
    fn new() -> Placer {
        Placer {
            used: HashSet::new(),
        }
    }

    fn take(&mut self, pos: GridPos) -> bool {
        self.used.insert((pos.x, pos.y))
    }

    fn sample(
        &mut self,
        rng: &mut ChaCha8Rng,
        xs: RangeInclusive<i32>,
        ys: RangeInclusive<i32>,
    ) -> Option<GridPos> {
        for _ in 0..PLACE_TRIES {
            let pos = GridPos::new(
                rng.gen_range(xs.clone()),
                rng.gen_range(ys.clone()),
            );
            if self.take(pos) {
                return Some(pos);
            }
        }
        None
    }
}

fn shuffled_colors(rng: &mut ChaCha8Rng) -> [Color; 4] {
    let mut colors = Color::ALL;
    colors.shuffle(rng);
    colors
}

fn random_shape(rng: &mut ChaCha8Rng) -> Shape {
    *Shape::ALL.choose(rng).expect("non-empty")
}

fn choice<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    *xs.choose(rng).expect("non-empty")
}

fn adjacent(a: GridPos, b: GridPos) -> bool {
    (a.x - b.x).abs() + (a.y - b.y).abs() == 1
}

/// Runs the ground truth over the sampled inputs and packages the examples.
/// `None` when any run errors, ends holding an object, changes nothing, or
/// fails the template predicate.
fn finish(
    gt: Program,
    inputs: Vec<Scene>,
    check: impl Fn(&Scene, &Scene) -> bool,
) -> Option<(Vec<Example>, Program)> {
    let mut examples = Vec::with_capacity(inputs.len());
    for input in inputs {
        let run = execute_untraced(&gt, &input);
        if !run.outcome.is_ok() || run.final_state.held.is_some() {
            return None;
        }
        let output = run.final_state.working;
        if output == input || !check(&input, &output) {
            return None;
        }
        examples.push(Example::new(input, output).ok()?);
    }
    Some((examples, gt))
}

fn pos_of(scene: &Scene, id: u32) -> GridPos {
    scene.object(ObjectId(id)).expect("id exists").pos
}

/// Every object of one color takes a new color; distractors keep theirs.
fn recolor_by_color(rng: &mut ChaCha8Rng) -> Option<(Vec<Example>, Program)> {
    let colors = shuffled_colors(rng);
    let (target, fresh) = (colors[0], colors[1]);
    let gt = Program::new(vec![
        ops::scene_parse(),
        ops::set_color_attn(target),
        ops::top_down_attend(),
        ops::fill_color(fresh),
    ]);
    let n_examples = rng.gen_range(2..=3);
    let mut inputs = Vec::new();
    for _ in 0..n_examples {
        let mut placer = Placer::new();
        let mut objects = vec![SceneObject::new(
            0,
            random_shape(rng),
            target,
            0,
            0,
        )];
        objects[0].pos = placer.sample(rng, 0..=GRID - 1, 0..=GRID - 1)?;
        for i in 0..rng.gen_range(1..=3) {
            let pos = placer.sample(rng, 0..=GRID - 1, 0..=GRID - 1)?;
            let mut o = SceneObject::new(1 + i, random_shape(rng), choice(rng, &colors[1..]), 0, 0);
            o.pos = pos;
            objects.push(o);
        }
        inputs.push(Scene::new(GRID, GRID, objects).ok()?);
    }
    finish(gt, inputs, |_, _| true)
}

/// The uniquely colored object slides into a corner along two directions.
fn move_to_corner(rng: &mut ChaCha8Rng) -> Option<(Vec<Example>, Program)> {
    let colors = shuffled_colors(rng);
    let mover = colors[0];
    let h = choice(rng, &[Dir::Left, Dir::Right]);
    let v = choice(rng, &[Dir::Up, Dir::Down]);
    let (d1, d2) = if rng.gen_bool(0.5) { (h, v) } else { (v, h) };
    let gt = Program::new(vec![
        ops::scene_parse(),
        ops::set_color_attn(mover),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        d1.instruction(),
        d2.instruction(),
        ops::release_object(),
    ]);
    let n_examples = rng.gen_range(2..=3);
    let mut inputs = Vec::new();
    for _ in 0..n_examples {
        let mut placer = Placer::new();
        let mut objects = Vec::new();
        let pos = placer.sample(rng, 2..=GRID - 3, 2..=GRID - 3)?;
        let mut m = SceneObject::new(0, random_shape(rng), mover, 0, 0);
        m.pos = pos;
        objects.push(m);
        for i in 0..rng.gen_range(1..=3) {
            let pos = placer.sample(rng, 0..=GRID - 1, 0..=GRID - 1)?;
            let mut o = SceneObject::new(1 + i, random_shape(rng), choice(rng, &colors[1..]), 0, 0);
            o.pos = pos;
            objects.push(o);
        }
        inputs.push(Scene::new(GRID, GRID, objects).ok()?);
    }
    finish(gt, inputs, |inp, out| pos_of(out, 0) != pos_of(inp, 0))
}

fn touch_program(mover: Color, target: Color) -> Vec<Instruction> {
    vec![
        ops::scene_parse(),
        ops::set_color_attn(mover),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        ops::set_color_attn(target),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::release_object(),
    ]
}

fn touch_inputs(
    rng: &mut ChaCha8Rng,
    mover: Color,
    target: Color,
    spare: &[Color],
) -> Option<Vec<Scene>> {
    let n_examples = rng.gen_range(2..=3);
    let mut inputs = Vec::new();
    for _ in 0..n_examples {
        let mut placer = Placer::new();
        let m_pos = placer.sample(rng, 1..=GRID - 2, 1..=GRID - 2)?;
        let t_pos = placer.sample(rng, 1..=GRID - 2, 1..=GRID - 2)?;
        if m_pos.dist2(t_pos) <= 2 {
            return None;
        }
        let mut objects = Vec::new();
        let mut m = SceneObject::new(0, random_shape(rng), mover, 0, 0);
        m.pos = m_pos;
        objects.push(m);
        let mut t = SceneObject::new(1, random_shape(rng), target, 0, 0);
        t.pos = t_pos;
        objects.push(t);
        for i in 0..rng.gen_range(0..=2) {
            let pos = placer.sample(rng, 0..=GRID - 1, 0..=GRID - 1)?;
            let mut o = SceneObject::new(2 + i, random_shape(rng), choice(rng, spare), 0, 0);
            o.pos = pos;
            objects.push(o);
        }
        inputs.push(Scene::new(GRID, GRID, objects).ok()?);
    }
    Some(inputs)
}

/// One object slides until it rests against another, selected by color.
fn touch(rng: &mut ChaCha8Rng) -> Option<(Vec<Example>, Program)> {
    let colors = shuffled_colors(rng);
    let (mover, target) = (colors[0], colors[1]);
    let gt = Program::new(touch_program(mover, target));
    let inputs = touch_inputs(rng, mover, target, &colors[2..])?;
    finish(gt, inputs, |inp, out| {
        adjacent(pos_of(out, 0), pos_of(out, 1)) && pos_of(out, 0) != pos_of(inp, 0)
    })
}

/// Touch, then repaint the touched object.
fn touch_and_recolor(rng: &mut ChaCha8Rng) -> Option<(Vec<Example>, Program)> {
    let colors = shuffled_colors(rng);
    let (mover, target) = (colors[0], colors[1]);
    let fresh = choice(rng, &[colors[0], colors[2], colors[3]]);
    let mut body = touch_program(mover, target);
    body.push(ops::fill_color(fresh));
    let gt = Program::new(body);
    let inputs = touch_inputs(rng, mover, target, &colors[2..])?;
    finish(gt, inputs, move |inp, out| {
        adjacent(pos_of(out, 0), pos_of(out, 1))
            && pos_of(out, 0) != pos_of(inp, 0)
            && out.object(ObjectId(1)).expect("target").color == fresh
    })
}

/// One object is pushed aside and another takes its exact cell.
fn move_and_replace(rng: &mut ChaCha8Rng) -> Option<(Vec<Example>, Program)> {
    let colors = shuffled_colors(rng);
    let (displaced, mover) = (colors[0], colors[1]);
    let d = choice(rng, &Dir::ALL);
    let gt = Program::new(vec![
        ops::scene_parse(),
        ops::set_color_attn(displaced),
        ops::top_down_attend(),
        ops::fixate_object(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        d.instruction(),
        ops::release_object(),
        ops::set_color_attn(mover),
        ops::top_down_attend(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        ops::move_hand_to_fixation(),
        ops::release_object(),
    ]);
    let n_examples = rng.gen_range(2..=3);
    let mut inputs = Vec::new();
    for _ in 0..n_examples {
        let mut placer = Placer::new();
        let d_pos = placer.sample(rng, 2..=GRID - 3, 2..=GRID - 3)?;
        let m_pos = placer.sample(rng, 0..=GRID - 1, 0..=GRID - 1)?;
        let mut objects = Vec::new();
        let mut b = SceneObject::new(0, random_shape(rng), displaced, 0, 0);
        b.pos = d_pos;
        objects.push(b);
        let mut a = SceneObject::new(1, random_shape(rng), mover, 0, 0);
        a.pos = m_pos;
        objects.push(a);
        for i in 0..rng.gen_range(0..=2) {
            let pos = placer.sample(rng, 0..=GRID - 1, 0..=GRID - 1)?;
            let mut o = SceneObject::new(2 + i, random_shape(rng), choice(rng, &colors[2..]), 0, 0);
            o.pos = pos;
            objects.push(o);
        }
        inputs.push(Scene::new(GRID, GRID, objects).ok()?);
    }
    finish(gt, inputs, |inp, out| {
        pos_of(out, 0) != pos_of(inp, 0) && pos_of(out, 1) == pos_of(inp, 0)
    })
}

pub(super) fn swap_program(first: Color, second: Color, park: Dir) -> Program {
    Program::new(vec![
        ops::scene_parse(),
        ops::set_color_attn(first),
        ops::top_down_attend(),
        ops::fixate_object(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        park.instruction(),
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

/// Two uniquely colored objects trade cells, parking one at a wall en route.
fn swap_locations(rng: &mut ChaCha8Rng) -> Option<(Vec<Example>, Program)> {
    let colors = shuffled_colors(rng);
    let (first, second) = (colors[0], colors[1]);
    let park = choice(rng, &Dir::ALL);
    let gt = swap_program(first, second, park);
    let n_examples = rng.gen_range(2..=3);
    let mut inputs = Vec::new();
    for _ in 0..n_examples {
        let mut placer = Placer::new();
        let a_pos = placer.sample(rng, 1..=GRID - 2, 1..=GRID - 2)?;
        let b_pos = placer.sample(rng, 1..=GRID - 2, 1..=GRID - 2)?;
        let mut objects = Vec::new();
        let mut a = SceneObject::new(0, random_shape(rng), first, 0, 0);
        a.pos = a_pos;
        objects.push(a);
        let mut b = SceneObject::new(1, random_shape(rng), second, 0, 0);
        b.pos = b_pos;
        objects.push(b);
        if rng.gen_bool(0.5) {
            let pos = placer.sample(rng, 0..=GRID - 1, 0..=GRID - 1)?;
            let mut o = SceneObject::new(2, random_shape(rng), choice(rng, &colors[2..]), 0, 0);
            o.pos = pos;
            objects.push(o);
        }
        inputs.push(Scene::new(GRID, GRID, objects).ok()?);
    }
    finish(gt, inputs, |inp, out| {
        pos_of(out, 0) == pos_of(inp, 1) && pos_of(out, 1) == pos_of(inp, 0)
    })
}

pub(super) fn stack_program(color: Color, d: Dir) -> Program {
    Program::new(vec![
        ops::scene_parse(),
        ops::set_color_attn(color),
        ops::top_down_attend(),
        ops::loop_start(),
        ops::move_hand_to_attended_object(),
        ops::grab_object(),
        d.instruction(),
        ops::release_object(),
        ops::next_object(),
        ops::loop_end(),
    ])
}

/// A variable number of same-colored objects sweep to one wall.
///
/// The two examples differ in count by four, so no fixed unrolling covers
/// both. Movers sit on distinct slide lanes with both coordinates in the
/// central band, which keeps every lane clear and guarantees that objects
/// already at the wall rank behind the ones still to move whenever attention
/// re-sorts from the scene center.
fn stack_variable(rng: &mut ChaCha8Rng) -> Option<(Vec<Example>, Program)> {
    let colors = shuffled_colors(rng);
    let color = colors[0];
    let d = choice(rng, &Dir::ALL);
    let gt = stack_program(color, d);
    let k_small = rng.gen_range(2..=3);
    let mut counts = [k_small, k_small + 4];
    if rng.gen_bool(0.5) {
        counts.swap(0, 1);
    }
    let mut inputs = Vec::new();
    for &k in &counts {
        let mut placer = Placer::new();
        let mut lanes: Vec<i32> = (2..=GRID - 2).collect();
        lanes.shuffle(rng);
        if lanes.len() < k as usize {
            return None;
        }
        let mut objects = Vec::new();
        for (i, &lane) in lanes.iter().take(k as usize).enumerate() {
            let depth = rng.gen_range(4..=6);
            let pos = if d.horizontal() {
                GridPos::new(depth, lane)
            } else {
                GridPos::new(lane, depth)
            };
            if !placer.take(pos) {
                return None;
            }
            let mut o = SceneObject::new(i as u32, random_shape(rng), color, 0, 0);
            o.pos = pos;
            objects.push(o);
        }
        // Distractors stay on the far side, behind every slide lane.
        let behind = if d.wall() == 0 {
            GRID - 2..=GRID - 1
        } else {
            0..=1
        };
        for i in 0..rng.gen_range(1..=2) {
            let pos = if d.horizontal() {
                let x = rng.gen_range(behind.clone());
                let y = rng.gen_range(0..=GRID - 1);
                GridPos::new(x, y)
            } else {
                let x = rng.gen_range(0..=GRID - 1);
                let y = rng.gen_range(behind.clone());
                GridPos::new(x, y)
            };
            if !placer.take(pos) {
                return None;
            }
            let mut o = SceneObject::new(k + i, random_shape(rng), choice(rng, &colors[1..]), 0, 0);
            o.pos = pos;
            objects.push(o);
        }
        inputs.push(Scene::new(GRID, GRID, objects).ok()?);
    }
    let wall = d.wall();
    let horizontal = d.horizontal();
    finish(gt, inputs, move |inp, out| {
        inp.objects().iter().filter(|o| o.color == color).all(|o| {
            let p = pos_of(out, o.id.0);
            if horizontal {
                p.x == wall
            } else {
                p.y == wall
            }
        })
    })
}

/// Two or three blocks act on distinct colors: slide, slide, then optionally
/// recolor. Each block is independent, so partial programs already reproduce
/// a prefix of the target scene.
fn k_independent_moves(rng: &mut ChaCha8Rng) -> Option<(Vec<Example>, Program)> {
    let colors = shuffled_colors(rng);
    let k = rng.gen_range(2..=3);
    let mut body = vec![ops::scene_parse()];
    let d1 = choice(rng, &Dir::ALL);
    let d2 = choice(rng, &Dir::ALL);
    for (c, d) in [(colors[0], d1), (colors[1], d2)] {
        body.extend([
            ops::set_color_attn(c),
            ops::top_down_attend(),
            ops::move_hand_to_attended_object(),
            ops::grab_object(),
            d.instruction(),
            ops::release_object(),
        ]);
    }
    let mut fresh = None;
    if k == 3 {
        let f = choice(rng, &[colors[0], colors[1], colors[3]]);
        body.extend([
            ops::set_color_attn(colors[2]),
            ops::top_down_attend(),
            ops::fill_color(f),
        ]);
        fresh = Some(f);
    }
    let gt = Program::new(body);
    let n_examples = 2;
    let mut inputs = Vec::new();
    for _ in 0..n_examples {
        let mut placer = Placer::new();
        let mut objects = Vec::new();
        for i in 0..2 {
            let pos = placer.sample(rng, 2..=GRID - 3, 2..=GRID - 3)?;
            let mut o = SceneObject::new(i, random_shape(rng), colors[i as usize], 0, 0);
            o.pos = pos;
            objects.push(o);
        }
        if k == 3 {
            let pos = placer.sample(rng, 0..=GRID - 1, 0..=GRID - 1)?;
            let mut o = SceneObject::new(2, random_shape(rng), colors[2], 0, 0);
            o.pos = pos;
            objects.push(o);
        }
        let spare = &colors[k as usize..];
        if !spare.is_empty() {
            for i in 0..rng.gen_range(0..=2 - (k as i32 - 2)) {
                let pos = placer.sample(rng, 0..=GRID - 1, 0..=GRID - 1)?;
                let mut o =
                    SceneObject::new(k + i as u32, random_shape(rng), choice(rng, spare), 0, 0);
                o.pos = pos;
                objects.push(o);
            }
        }
        inputs.push(Scene::new(GRID, GRID, objects).ok()?);
    }
    finish(gt, inputs, move |inp, out| {
        pos_of(out, 0) != pos_of(inp, 0)
            && pos_of(out, 1) != pos_of(inp, 1)
            && fresh.map_or(true, |f| out.object(ObjectId(2)).expect("recolored").color == f)
    })
}
