//! Symbolic grid scenes and object matching.
//!
//! A [`Scene`] is a rectangular grid populated by colored, shaped objects
//! with persistent integer identities. Cells hold at most one object.
//! [`match_objects`] computes a maximum bipartite matching between a working
//! scene and a target scene; [`is_solved`] reports whether the working scene
//! reproduces the target exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Object fill colors. The palette is fixed at four entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
    Yellow,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Red, Color::Green, Color::Blue, Color::Yellow];

    pub fn as_str(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Yellow => "yellow",
        }
    }

    pub fn index(self) -> usize {
        Color::ALL.iter().position(|c| *c == self).unwrap()
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown color `{s}`"))
    }
}

/// Object shapes. The palette is fixed at four entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Square,
    Circle,
    Triangle,
    Star,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Square, Shape::Circle, Shape::Triangle, Shape::Star];

    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Square => "square",
            Shape::Circle => "circle",
            Shape::Triangle => "triangle",
            Shape::Star => "star",
        }
    }

    pub fn index(self) -> usize {
        Shape::ALL.iter().position(|s| *s == self).unwrap()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Shape::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown shape `{s}`"))
    }
}

/// Persistent identity of a scene object.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "id{}", self.0)
    }
}

/// A cell coordinate. `x` grows rightward, `y` grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridPos {
    pub x: i32,
    pub y: i32,
}

impl GridPos {
    pub fn new(x: i32, y: i32) -> Self {
        GridPos { x, y }
    }

    /// Squared Euclidean distance; exact in integers.
    pub fn dist2(self, other: GridPos) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }

    pub fn shifted(self, dx: i32, dy: i32) -> GridPos {
        GridPos::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for GridPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// One object in a scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: ObjectId,
    pub shape: Shape,
    pub color: Color,
    #[serde(flatten)]
    pub pos: GridPos,
}

impl SceneObject {
    pub fn new(id: u32, shape: Shape, color: Color, x: i32, y: i32) -> Self {
        SceneObject {
            id: ObjectId(id),
            shape,
            color,
            pos: GridPos::new(x, y),
        }
    }
}

/// Errors from scene construction and matching.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorldError {
    #[error("scene dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(i32, i32, i32, i32),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

/// A rectangular grid of exclusive cells holding objects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SceneRepr", into = "SceneRepr")]
pub struct Scene {
    width: i32,
    height: i32,
    objects: Vec<SceneObject>,
}

/// Serde-facing representation; conversion re-validates the invariants.
#[derive(Serialize, Deserialize)]
struct SceneRepr {
    width: i32,
    height: i32,
    objects: Vec<SceneObject>,
}

impl TryFrom<SceneRepr> for Scene {
    type Error = WorldError;

    fn try_from(r: SceneRepr) -> Result<Self, Self::Error> {
        Scene::new(r.width, r.height, r.objects)
    }
}

impl From<Scene> for SceneRepr {
    fn from(s: Scene) -> Self {
        SceneRepr {
            width: s.width,
            height: s.height,
            objects: s.objects,
        }
    }
}

impl Scene {
    /// Builds a scene, validating bounds, id uniqueness, and cell exclusivity.
    pub fn new(width: i32, height: i32, objects: Vec<SceneObject>) -> Result<Scene, WorldError> {
        if width < 1 || height < 1 || width > 16 || height > 16 {
            return Err(WorldError::InvalidScene(format!(
                "grid {width}x{height} outside supported range 1..=16"
            )));
        }
        let mut ids = BTreeSet::new();
        let mut cells = BTreeSet::new();
        for o in &objects {
            if o.pos.x < 0 || o.pos.y < 0 || o.pos.x >= width || o.pos.y >= height {
                return Err(WorldError::InvalidScene(format!(
                    "object {} at {} out of bounds for {width}x{height}",
                    o.id, o.pos
                )));
            }
            if !ids.insert(o.id) {
                return Err(WorldError::InvalidScene(format!("duplicate id {}", o.id)));
            }
            if !cells.insert((o.pos.x, o.pos.y)) {
                return Err(WorldError::InvalidScene(format!(
                    "two objects occupy cell {}",
                    o.pos
                )));
            }
        }
        Ok(Scene {
            width,
            height,
            objects,
        })
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    /// Initial hand/fixation cell: (floor(w/2), floor(h/2)).
    pub fn center(&self) -> GridPos {
        GridPos::new(self.width / 2, self.height / 2)
    }

    pub fn object(&self, id: ObjectId) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn object_at(&self, pos: GridPos) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.pos == pos)
    }

    pub fn in_bounds(&self, pos: GridPos) -> bool {
        pos.x >= 0 && pos.y >= 0 && pos.x < self.width && pos.y < self.height
    }

    /// True when `pos` is inside the grid and not occupied by any object
    /// other than `ignore`.
    pub fn is_free(&self, pos: GridPos, ignore: Option<ObjectId>) -> bool {
        self.in_bounds(pos)
            && !self
                .objects
                .iter()
                .any(|o| o.pos == pos && Some(o.id) != ignore)
    }

    /// Moves an object to a cell the caller has verified to be free.
    pub(crate) fn set_pos(&mut self, id: ObjectId, pos: GridPos) {
        debug_assert!(self.is_free(pos, Some(id)), "cell {pos} not free for {id}");
        if let Some(o) = self.objects.iter_mut().find(|o| o.id == id) {
            o.pos = pos;
        }
    }

    pub(crate) fn set_color(&mut self, id: ObjectId, color: Color) {
        if let Some(o) = self.objects.iter_mut().find(|o| o.id == id) {
            o.color = color;
        }
    }
}

/// Which attributes must agree for two objects to be matchable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    /// Shape, color, and position must be equal.
    #[default]
    ByProperty,
    /// Shape, color, position, and identity must be equal.
    ById,
}

/// Result of matching a working scene against a target scene.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchReport {
    /// Map from working-scene object id to the target object it matches.
    pub pairing: BTreeMap<ObjectId, ObjectId>,
}

impl MatchReport {
    pub fn matched_work_ids(&self) -> BTreeSet<ObjectId> {
        self.pairing.keys().copied().collect()
    }

    pub fn matched_target_ids(&self) -> BTreeSet<ObjectId> {
        self.pairing.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.pairing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairing.is_empty()
    }
}

fn admissible(work: &SceneObject, target: &SceneObject, mode: MatchMode) -> bool {
    let base = work.shape == target.shape && work.color == target.color && work.pos == target.pos;
    match mode {
        MatchMode::ByProperty => base,
        MatchMode::ById => base && work.id == target.id,
    }
}

/// Maximum bipartite matching between `work` and `target` objects.
///
/// An object currently held by the hand (`held`) is excluded from the working
/// side: objects only qualify as matched once released. Ties are broken
/// deterministically by preferring lower work ids, then lower target ids.
pub fn match_objects(
    work: &Scene,
    target: &Scene,
    held: Option<ObjectId>,
    mode: MatchMode,
) -> Result<MatchReport, WorldError> {
    if work.width != target.width || work.height != target.height {
        return Err(WorldError::DimensionMismatch(
            work.width,
            target.width,
            work.height,
            target.height,
        ));
    }

    let mut work_objs: Vec<&SceneObject> = work
        .objects
        .iter()
        .filter(|o| Some(o.id) != held)
        .collect();
    work_objs.sort_by_key(|o| o.id);
    let mut target_objs: Vec<&SceneObject> = target.objects.iter().collect();
    target_objs.sort_by_key(|o| o.id);

    // Kuhn's augmenting-path algorithm. Iterating work objects and their
    // admissible targets in ascending id order makes the maximum matching
    // it returns unique and deterministic.
    let mut target_to_work: Vec<Option<usize>> = vec![None; target_objs.len()];
    fn try_assign(
        w: usize,
        work_objs: &[&SceneObject],
        target_objs: &[&SceneObject],
        mode: MatchMode,
        visited: &mut [bool],
        target_to_work: &mut [Option<usize>],
    ) -> bool {
        for (t, tobj) in target_objs.iter().enumerate() {
            if visited[t] || !admissible(work_objs[w], tobj, mode) {
                continue;
            }
            visited[t] = true;
            let free = match target_to_work[t] {
                None => true,
                Some(prev) => try_assign(
                    prev,
                    work_objs,
                    target_objs,
                    mode,
                    visited,
                    target_to_work,
                ),
            };
            if free {
                target_to_work[t] = Some(w);
                return true;
            }
        }
        false
    }
    for w in 0..work_objs.len() {
        let mut visited = vec![false; target_objs.len()];
        try_assign(
            w,
            &work_objs,
            &target_objs,
            mode,
            &mut visited,
            &mut target_to_work,
        );
    }

    let mut pairing = BTreeMap::new();
    for (t, w) in target_to_work.iter().enumerate() {
        if let Some(w) = w {
            pairing.insert(work_objs[*w].id, target_objs[t].id);
        }
    }
    Ok(MatchReport { pairing })
}

/// True when nothing is held, object counts agree, and a by-property
/// matching covers every object.
pub fn is_solved(
    work: &Scene,
    target: &Scene,
    held: Option<ObjectId>,
) -> Result<bool, WorldError> {
    if work.width != target.width || work.height != target.height {
        return Err(WorldError::DimensionMismatch(
            work.width,
            target.width,
            work.height,
            target.height,
        ));
    }
    if held.is_some() || work.objects.len() != target.objects.len() {
        return Ok(false);
    }
    let report = match_objects(work, target, None, MatchMode::ByProperty)?;
    Ok(report.len() == work.objects.len())
}

/// One demonstration pair. Input and output share dimensions and the same
/// set of object ids (objects persist; only pose and color change).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ExampleRepr", into = "ExampleRepr")]
pub struct Example {
    pub input: Scene,
    pub output: Scene,
}

#[derive(Serialize, Deserialize)]
struct ExampleRepr {
    input: Scene,
    output: Scene,
}

impl TryFrom<ExampleRepr> for Example {
    type Error = WorldError;
    fn try_from(r: ExampleRepr) -> Result<Example, WorldError> {
        Example::new(r.input, r.output)
    }
}

impl From<Example> for ExampleRepr {
    fn from(e: Example) -> ExampleRepr {
        ExampleRepr {
            input: e.input,
            output: e.output,
        }
    }
}

impl Example {
    pub fn new(input: Scene, output: Scene) -> Result<Example, WorldError> {
        if input.width != output.width || input.height != output.height {
            return Err(WorldError::DimensionMismatch(
                input.width,
                output.width,
                input.height,
                output.height,
            ));
        }
        let in_ids: BTreeSet<ObjectId> = input.objects.iter().map(|o| o.id).collect();
        let out_ids: BTreeSet<ObjectId> = output.objects.iter().map(|o| o.id).collect();
        if in_ids != out_ids {
            return Err(WorldError::InvalidScene(
                "input and output ids differ".into(),
            ));
        }
        Ok(Example { input, output })
    }
}

/// A named transformation demonstrated by one or more examples, all of which
/// share grid dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConceptRepr", into = "ConceptRepr")]
pub struct Concept {
    pub name: String,
    pub examples: Vec<Example>,
}

#[derive(Serialize, Deserialize)]
struct ConceptRepr {
    name: String,
    examples: Vec<Example>,
}

impl TryFrom<ConceptRepr> for Concept {
    type Error = WorldError;
    fn try_from(r: ConceptRepr) -> Result<Concept, WorldError> {
        Concept::new(r.name, r.examples)
    }
}

impl From<Concept> for ConceptRepr {
    fn from(c: Concept) -> ConceptRepr {
        ConceptRepr {
            name: c.name,
            examples: c.examples,
        }
    }
}

impl Concept {
    pub fn new(name: impl Into<String>, examples: Vec<Example>) -> Result<Concept, WorldError> {
        let name = name.into();
        if examples.is_empty() {
            return Err(WorldError::InvalidScene(format!(
                "concept `{name}` has no examples"
            )));
        }
        let (w, h) = (examples[0].input.width, examples[0].input.height);
        for e in &examples[1..] {
            if e.input.width != w || e.input.height != h {
                return Err(WorldError::DimensionMismatch(
                    w,
                    e.input.width,
                    h,
                    e.input.height,
                ));
            }
        }
        Ok(Concept { name, examples })
    }
}
