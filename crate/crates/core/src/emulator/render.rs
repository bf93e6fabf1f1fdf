//! ASCII and SVG rendering of scenes and execution traces.
//!
//! Grid cells show a shape initial (`s` square, `c` circle, `t` triangle,
//! `r` star), uppercased when the object is in the attended list. An empty
//! fixation cell is drawn as `*`. The `H` row below the grid reports hand,
//! held object, and fixation.

use super::{ExecResult, Outcome, Program, TraceStep};
use crate::world::{GridPos, ObjectId, Scene, Shape};

fn shape_char(shape: Shape) -> char {
    match shape {
        Shape::Square => 's',
        Shape::Circle => 'c',
        Shape::Triangle => 't',
        Shape::Star => 'r',
    }
}

/// Renders one scene snapshot.
pub fn render_scene(
    scene: &Scene,
    attended: &[ObjectId],
    fixation: GridPos,
    hand: GridPos,
    held: Option<ObjectId>,
) -> String {
    let mut out = String::new();
    for y in 0..scene.height() {
        for x in 0..scene.width() {
            if x > 0 {
                out.push(' ');
            }
            let pos = GridPos::new(x, y);
            let ch = match scene.object_at(pos) {
                Some(o) => {
                    let c = shape_char(o.shape);
                    if attended.contains(&o.id) {
                        c.to_ascii_uppercase()
                    } else {
                        c
                    }
                }
                None if pos == fixation => '*',
                None => '.',
            };
            out.push(ch);
        }
        out.push('\n');
    }
    let held_text = match held {
        Some(id) => format!("holding {id}"),
        None => "empty".to_string(),
    };
    out.push_str(&format!(
        "H hand={hand} {held_text} fixation={fixation}\n"
    ));
    out
}

/// Renders a full execution trace, one frame per step.
pub fn render_trace(program: &Program, result: &ExecResult) -> String {
    let mut out = String::new();
    for (step, t) in result.trace.iter().enumerate() {
        let inst = program
            .get(t.instr_index)
            .map(|i| i.to_string())
            .unwrap_or_default();
        out.push_str(&format!("step {step}: [{}] {inst}\n", t.instr_index));
        out.push_str(&render_scene(&t.scene, &t.attended, t.fixation, t.hand, t.held));
        out.push('\n');
    }
    match result.outcome {
        Outcome::Ok => out.push_str("outcome: ok\n"),
        Outcome::Error(e) => out.push_str(&format!("outcome: {e}\n")),
    }
    out
}

const CELL: i32 = 24;

fn svg_shape(o: &crate::world::SceneObject, attended: bool) -> String {
    let cx = o.pos.x * CELL + CELL / 2;
    let cy = o.pos.y * CELL + CELL / 2;
    let r = CELL as f32 * 0.38;
    let stroke = if attended { "black" } else { "gray" };
    let sw = if attended { 2.5 } else { 1.0 };
    let fill = o.color.as_str();
    match o.shape {
        Shape::Square => format!(
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{fill}" stroke="{stroke}" stroke-width="{sw}"/>"#,
            cx as f32 - r,
            cy as f32 - r,
            2.0 * r,
            2.0 * r
        ),
        Shape::Circle => format!(
            r#"<circle cx="{cx}" cy="{cy}" r="{r:.1}" fill="{fill}" stroke="{stroke}" stroke-width="{sw}"/>"#
        ),
        Shape::Triangle | Shape::Star => {
            let n = if o.shape == Shape::Triangle { 3 } else { 10 };
            let pts: Vec<String> = (0..n)
                .map(|i| {
                    let ang = -std::f32::consts::FRAC_PI_2
                        + i as f32 * std::f32::consts::TAU / n as f32;
                    let rad = if o.shape == Shape::Star && i % 2 == 1 {
                        r * 0.45
                    } else {
                        r
                    };
                    format!("{:.1},{:.1}", cx as f32 + rad * ang.cos(), cy as f32 + rad * ang.sin())
                })
                .collect();
            format!(
                r#"<polygon points="{}" fill="{fill}" stroke="{stroke}" stroke-width="{sw}"/>"#,
                pts.join(" ")
            )
        }
    }
}

/// Renders one scene snapshot as a standalone SVG document.
pub fn render_scene_svg(
    scene: &Scene,
    attended: &[ObjectId],
    fixation: GridPos,
    hand: GridPos,
) -> String {
    let w = scene.width() * CELL;
    let h = scene.height() * CELL;
    let mut out = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    out.push('\n');
    out.push_str(&format!(
        r#"<rect width="{w}" height="{h}" fill="white" stroke="none"/>"#
    ));
    out.push('\n');
    for x in 0..=scene.width() {
        out.push_str(&format!(
            r##"<line x1="{0}" y1="0" x2="{0}" y2="{h}" stroke="#ddd"/>"##,
            x * CELL
        ));
        out.push('\n');
    }
    for y in 0..=scene.height() {
        out.push_str(&format!(
            r##"<line x1="0" y1="{0}" x2="{w}" y2="{0}" stroke="#ddd"/>"##,
            y * CELL
        ));
        out.push('\n');
    }
    out.push_str(&format!(
        r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="none" stroke="purple" stroke-dasharray="3,2"/>"#,
        fixation.x * CELL,
        fixation.y * CELL
    ));
    out.push('\n');
    for o in scene.objects() {
        out.push_str(&svg_shape(o, attended.contains(&o.id)));
        out.push('\n');
    }
    let hx = hand.x * CELL + CELL / 2;
    let hy = hand.y * CELL + CELL / 2;
    out.push_str(&format!(
        r#"<path d="M {0} {1} l 4 10 l -8 0 z" fill="none" stroke="black" stroke-width="1.5"/>"#,
        hx, hy
    ));
    out.push_str("\n</svg>\n");
    out
}

/// Renders one SVG per trace step, returned as (filename, content) pairs.
pub fn render_trace_svgs(result: &ExecResult) -> Vec<(String, String)> {
    result
        .trace
        .iter()
        .enumerate()
        .map(|(i, t): (usize, &TraceStep)| {
            (
                format!("step_{i:04}.svg"),
                render_scene_svg(&t.scene, &t.attended, t.fixation, t.hand),
            )
        })
        .collect()
}
