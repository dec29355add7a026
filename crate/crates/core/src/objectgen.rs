//! Block objects: generation, canonical form, congruence and mutation.
//!
//! An object is a face-connected union of small cuboid blocks inside a
//! 7x7x7 voxel grid, resting on the z = 0 plane. Two objects are "same"
//! when their voxel sets coincide up to translation and a yaw rotation by
//! a multiple of 90 degrees; reflections and tilts are not allowed since
//! the objects sit on base plates.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use thiserror::Error;

use crate::rng;

/// Edge length of the object grid, in voxels.
pub const GRID_EXTENT: i32 = 7;

/// Objects per complexity class in a library.
pub const OBJECTS_PER_CLASS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObjectError {
    #[error("no valid single-block mutation of {0} found")]
    GenerationExhausted(String),
    #[error("unknown complexity class {0:?}")]
    UnknownClass(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Voxel {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Voxel {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Voxel { x, y, z }
    }

    fn offset(self, d: [i32; 3]) -> Voxel {
        Voxel::new(self.x + d[0], self.y + d[1], self.z + d[2])
    }

    fn in_grid(self) -> bool {
        (0..GRID_EXTENT).contains(&self.x)
            && (0..GRID_EXTENT).contains(&self.y)
            && (0..GRID_EXTENT).contains(&self.z)
    }
}

pub(crate) const NEIGHBOURS: [[i32; 3]; 6] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComplexityClass {
    Easy,
    Medium,
    Hard,
}

impl ComplexityClass {
    pub const ALL: [ComplexityClass; 3] = [Self::Easy, Self::Medium, Self::Hard];

    /// Inclusive block-count interval of the class.
    pub fn block_count_range(self) -> RangeInclusive<usize> {
        match self {
            Self::Easy => 4..=6,
            Self::Medium => 7..=10,
            Self::Hard => 11..=15,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Easy => "easy",
            Self::Medium => "medium",
            Self::Hard => "hard",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ComplexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ComplexityClass {
    type Err = ObjectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy" => Ok(Self::Easy),
            "medium" => Ok(Self::Medium),
            "hard" => Ok(Self::Hard),
            other => Err(ObjectError::UnknownClass(other.to_string())),
        }
    }
}

/// An axis-aligned cuboid of voxels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub origin: Voxel,
    pub size: [i32; 3],
}

/// Block footprints the generator draws from.
const BLOCK_SIZES: [[i32; 3]; 5] = [[1, 1, 1], [2, 1, 1], [1, 2, 1], [2, 2, 1], [1, 1, 2]];

impl Block {
    pub fn voxels(&self) -> impl Iterator<Item = Voxel> + '_ {
        let o = self.origin;
        (0..self.size[0]).flat_map(move |dx| {
            (0..self.size[1]).flat_map(move |dy| {
                (0..self.size[2]).map(move |dz| Voxel::new(o.x + dx, o.y + dy, o.z + dz))
            })
        })
    }

    fn translated(&self, d: [i32; 3]) -> Block {
        Block {
            origin: self.origin.offset(d),
            size: self.size,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockObject {
    pub id: String,
    pub blocks: Vec<Block>,
    pub complexity: ComplexityClass,
    pub seed: u64,
    voxels: BTreeSet<Voxel>,
}

impl BlockObject {
    /// Assemble an object from blocks. Does not check invariants; see
    /// [`BlockObject::validate`].
    pub fn from_blocks(
        id: impl Into<String>,
        blocks: Vec<Block>,
        complexity: ComplexityClass,
        seed: u64,
    ) -> Self {
        let voxels = blocks.iter().flat_map(|b| b.voxels()).collect();
        BlockObject {
            id: id.into(),
            blocks,
            complexity,
            seed,
            voxels,
        }
    }

    pub fn voxels(&self) -> &BTreeSet<Voxel> {
        &self.voxels
    }

    pub fn base(&self) -> impl Iterator<Item = &Voxel> {
        self.voxels.iter().filter(|v| v.z == 0)
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing `v`.
    pub fn block_of(&self, v: Voxel) -> Option<usize> {
        self.blocks.iter().position(|b| b.voxels().any(|w| w == v))
    }

    /// Exclusive upper corner of the voxel bounding box.
    pub fn extent(&self) -> [i32; 3] {
        let mut e = [0; 3];
        for v in &self.voxels {
            e[0] = e[0].max(v.x + 1);
            e[1] = e[1].max(v.y + 1);
            e[2] = e[2].max(v.z + 1);
        }
        e
    }

    /// Checks every structural invariant: nonempty, inside the grid,
    /// disjoint blocks, face-connected, resting on z = 0, and a block count
    /// within the class range.
    pub fn validate(&self) -> bool {
        let total: usize = self.blocks.iter().map(|b| b.voxels().count()).sum();
        !self.voxels.is_empty()
            && total == self.voxels.len()
            && self.voxels.iter().all(|v| v.in_grid())
            && self.base().next().is_some()
            && self
                .complexity
                .block_count_range()
                .contains(&self.blocks.len())
            && is_face_connected(&self.voxels)
    }
}

pub fn is_face_connected(voxels: &BTreeSet<Voxel>) -> bool {
    let Some(&start) = voxels.iter().next() else {
        return false;
    };
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for d in NEIGHBOURS {
            let w = v.offset(d);
            if voxels.contains(&w) && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen.len() == voxels.len()
}

fn overlaps(blocks: &[Block], candidate: &Block, skip: Option<usize>) -> bool {
    let cells: Vec<Voxel> = candidate.voxels().collect();
    blocks.iter().enumerate().any(|(i, b)| {
        Some(i) != skip && b.voxels().any(|v| cells.contains(&v))
    })
}

fn block_in_grid(b: &Block) -> bool {
    b.voxels().all(|v| v.in_grid())
}

/// Proposes a block that touches `anchor` from direction `dir` with a
/// random footprint, or `None` if it leaves the grid.
fn propose_adjacent<R: Rng>(rng: &mut R, anchor: Voxel, dir: [i32; 3]) -> Option<Block> {
    let target = anchor.offset(dir);
    let size = *BLOCK_SIZES.choose(rng).expect("nonempty");
    let off = [
        rng.random_range(0..size[0]),
        rng.random_range(0..size[1]),
        rng.random_range(0..size[2]),
    ];
    // The block must contain `target`, and it must not swallow `anchor`.
    let origin = Voxel::new(target.x - off[0], target.y - off[1], target.z - off[2]);
    let block = Block { origin, size };
    if block_in_grid(&block) && !block.voxels().any(|v| v == anchor) {
        Some(block)
    } else {
        None
    }
}

fn random_adjacent_block<R: Rng>(rng: &mut R, blocks: &[Block], skip: Option<usize>) -> Option<Block> {
    let cells: Vec<Voxel> = blocks
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .flat_map(|(_, b)| b.voxels())
        .collect();
    for _ in 0..64 {
        let anchor = *cells.choose(rng)?;
        let dir = *NEIGHBOURS.choose(rng).expect("nonempty");
        if let Some(b) = propose_adjacent(rng, anchor, dir) {
            if !overlaps(blocks, &b, skip) {
                return Some(b);
            }
        }
    }
    None
}

/// Generates an object of the given class. Deterministic in `(class, seed)`.
pub fn generate_object(class: ComplexityClass, seed: u64) -> BlockObject {
    let mut rng = rng::stream(seed, 0x0B1E_C700 + class.index() as u64);
    let range = class.block_count_range();
    let target = rng.random_range(range.clone());
    loop {
        let first = Block {
            origin: Voxel::new(2 + rng.random_range(0..2), 2 + rng.random_range(0..2), 0),
            size: [2, 2, 1],
        };
        let mut blocks = vec![first];
        let mut stalls = 0;
        while blocks.len() < target && stalls < 200 {
            match random_adjacent_block(&mut rng, &blocks, None) {
                Some(b) => blocks.push(b),
                None => stalls += 1,
            }
        }
        if blocks.len() == target {
            let obj = BlockObject::from_blocks(format!("{}-{:016x}", class.label(), seed), blocks, class, seed);
            debug_assert!(obj.validate());
            return obj;
        }
    }
}

/// Rotates a voxel by `quarter_turns` x 90 degrees counter-clockwise about +z.
pub fn rotate_voxel(v: Voxel, quarter_turns: u8) -> Voxel {
    match quarter_turns % 4 {
        0 => v,
        1 => Voxel::new(-v.y, v.x, v.z),
        2 => Voxel::new(-v.x, -v.y, v.z),
        _ => Voxel::new(v.y, -v.x, v.z),
    }
}

fn normalize(mut cells: Vec<Voxel>) -> Vec<Voxel> {
    let (mx, my, mz) = cells.iter().fold((i32::MAX, i32::MAX, i32::MAX), |a, v| {
        (a.0.min(v.x), a.1.min(v.y), a.2.min(v.z))
    });
    for v in &mut cells {
        *v = Voxel::new(v.x - mx, v.y - my, v.z - mz);
    }
    cells.sort_unstable();
    cells
}

/// Translation-normalized, lexicographically least voxel list over the
/// four yaw rotations of `voxels`.
pub fn canonical_voxels<'a>(voxels: impl IntoIterator<Item = &'a Voxel>) -> Vec<Voxel> {
    let cells: Vec<Voxel> = voxels.into_iter().copied().collect();
    (0..4u8)
        .map(|q| normalize(cells.iter().map(|&v| rotate_voxel(v, q)).collect()))
        .min()
        .unwrap_or_default()
}

pub fn canonical_form(obj: &BlockObject) -> Vec<Voxel> {
    canonical_voxels(obj.voxels())
}

pub fn is_same(a: &BlockObject, b: &BlockObject) -> bool {
    a.voxels.len() == b.voxels.len() && canonical_form(a) == canonical_form(b)
}

/// Rotates the whole object (blocks included) and re-seats it at the grid
/// origin.
pub fn rotate_yaw(obj: &BlockObject, quarter_turns: u8) -> BlockObject {
    let rotated: Vec<(Voxel, Voxel)> = obj
        .blocks
        .iter()
        .map(|b| {
            let far = b.origin.offset([b.size[0] - 1, b.size[1] - 1, b.size[2] - 1]);
            (rotate_voxel(b.origin, quarter_turns), rotate_voxel(far, quarter_turns))
        })
        .collect();
    let mx = rotated.iter().map(|(a, b)| a.x.min(b.x)).min().unwrap_or(0);
    let my = rotated.iter().map(|(a, b)| a.y.min(b.y)).min().unwrap_or(0);
    let blocks = rotated
        .into_iter()
        .map(|(a, b)| Block {
            origin: Voxel::new(a.x.min(b.x) - mx, a.y.min(b.y) - my, a.z.min(b.z)),
            size: [(a.x - b.x).abs() + 1, (a.y - b.y).abs() + 1, (a.z - b.z).abs() + 1],
        })
        .collect();
    BlockObject::from_blocks(obj.id.clone(), blocks, obj.complexity, obj.seed)
}

/// Shifts blocks so the lowest voxel sits on z = 0 and x, y start at 0.
fn reseat(blocks: Vec<Block>) -> Vec<Block> {
    let mut m = [i32::MAX; 3];
    for b in &blocks {
        m[0] = m[0].min(b.origin.x);
        m[1] = m[1].min(b.origin.y);
        m[2] = m[2].min(b.origin.z);
    }
    if m == [0, 0, 0] || blocks.is_empty() {
        return blocks;
    }
    blocks.iter().map(|b| b.translated([-m[0], -m[1], -m[2]])).collect()
}

#[derive(Clone, Copy, Debug)]
enum Edit {
    Move,
    Resize,
    Add,
    Remove,
}

/// Produces a non-congruent object of the same class by a single block
/// edit (move, resize, add or remove one block). Deterministic in
/// `(obj, seed)`.
pub fn mutate_different(obj: &BlockObject, seed: u64) -> Result<BlockObject, ObjectError> {
    let mut rng = rng::stream(seed, 0x3D17 ^ obj.seed);
    let range = obj.complexity.block_count_range();
    let original = canonical_form(obj);
    for _ in 0..2000 {
        let edit = *[Edit::Move, Edit::Resize, Edit::Add, Edit::Remove]
            .choose(&mut rng)
            .expect("nonempty");
        let mut blocks = obj.blocks.clone();
        match edit {
            Edit::Move => {
                let i = rng.random_range(0..blocks.len());
                let Some(mut b) = random_adjacent_block(&mut rng, &blocks, Some(i)) else {
                    continue;
                };
                // keep the moved block's footprint
                b.size = blocks[i].size;
                if !block_in_grid(&b) || overlaps(&blocks, &b, Some(i)) {
                    continue;
                }
                blocks[i] = b;
            }
            Edit::Resize => {
                let i = rng.random_range(0..blocks.len());
                let size = *BLOCK_SIZES.choose(&mut rng).expect("nonempty");
                if size == blocks[i].size {
                    continue;
                }
                let b = Block {
                    origin: blocks[i].origin,
                    size,
                };
                if !block_in_grid(&b) || overlaps(&blocks, &b, Some(i)) {
                    continue;
                }
                blocks[i] = b;
            }
            Edit::Add => {
                if blocks.len() >= *range.end() {
                    continue;
                }
                let Some(b) = random_adjacent_block(&mut rng, &blocks, None) else {
                    continue;
                };
                blocks.push(b);
            }
            Edit::Remove => {
                if blocks.len() <= *range.start() {
                    continue;
                }
                let i = rng.random_range(0..blocks.len());
                blocks.remove(i);
            }
        }
        let candidate = BlockObject::from_blocks(
            format!("{}~{:x}", obj.id, seed & 0xffff),
            reseat(blocks),
            obj.complexity,
            seed,
        );
        if candidate.validate() && canonical_form(&candidate) != original {
            return Ok(candidate);
        }
    }
    Err(ObjectError::GenerationExhausted(obj.id.clone()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectLibrary {
    pub objects: Vec<BlockObject>,
    pub seed: u64,
}

impl ObjectLibrary {
    /// Four pairwise non-congruent objects per class. The first object of
    /// each class is generated; the rest are single-edit variants of
    /// earlier members so that "different" pairs stay close.
    pub fn generate(seed: u64) -> Self {
        let mut objects = Vec::with_capacity(3 * OBJECTS_PER_CLASS);
        for class in ComplexityClass::ALL {
            let mut rng = rng::stream(seed, 0x11B0 + class.index() as u64);
            let mut members: Vec<BlockObject> = Vec::new();
            while members.is_empty() {
                let s = rng.random::<u64>();
                members.push(generate_object(class, s));
            }
            while members.len() < OBJECTS_PER_CLASS {
                let parent = members.choose(&mut rng).expect("nonempty").clone();
                let s = rng.random::<u64>();
                let candidate = match mutate_different(&parent, s) {
                    Ok(c) => c,
                    Err(_) => generate_object(class, s),
                };
                if members.iter().all(|m| !is_same(m, &candidate)) {
                    members.push(candidate);
                }
            }
            for (k, mut m) in members.into_iter().enumerate() {
                m.id = format!("{}-{k}", class.label());
                objects.push(m);
            }
        }
        ObjectLibrary { objects, seed }
    }

    pub fn by_class(&self, class: ComplexityClass) -> Vec<&BlockObject> {
        self.objects.iter().filter(|o| o.complexity == class).collect()
    }

    pub fn get(&self, id: &str) -> Option<&BlockObject> {
        self.objects.iter().find(|o| o.id == id)
    }
}

/// Number of distinct (object pair, start, orientation difference) trial
/// configurations: ordered pairs with replacement for the short and corner
/// starts, unordered pairs with replacement for the long start (targets
/// are equidistant), three orientation differences, summed over classes.
pub fn count_configurations(library: &ObjectLibrary) -> u64 {
    ComplexityClass::ALL
        .iter()
        .map(|&c| {
            let n = library.by_class(c).len() as u64;
            let ordered = n * n;
            let unordered = n * (n + 1) / 2;
            (2 * ordered + unordered) * 3
        })
        .sum()
}

pub fn write_object(obj: &BlockObject) -> String {
    let mut out = format!("object {} {} {}\n", obj.id, obj.complexity, obj.seed);
    for v in obj.voxels() {
        out.push_str(&format!("{} {} {}\n", v.x, v.y, v.z));
    }
    out
}

pub fn write_library(lib: &ObjectLibrary) -> String {
    lib.objects
        .iter()
        .map(write_object)
        .collect::<Vec<_>>()
        .join("\n")
}

/// One object as read back from the text export. Block structure is not
/// part of the export, only voxels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectRecord {
    pub id: String,
    pub complexity: ComplexityClass,
    pub seed: u64,
    pub voxels: BTreeSet<Voxel>,
}

pub fn parse_library(text: &str) -> Result<Vec<ObjectRecord>, ObjectError> {
    let mut out: Vec<ObjectRecord> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let err = |msg: &str| ObjectError::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f[0] == "object" {
            if f.len() != 4 {
                return Err(err("expected `object <id> <class> <seed>`"));
            }
            out.push(ObjectRecord {
                id: f[1].to_string(),
                complexity: f[2].parse().map_err(|_| err("bad class"))?,
                seed: f[3].parse().map_err(|_| err("bad seed"))?,
                voxels: BTreeSet::new(),
            });
        } else {
            let rec = out.last_mut().ok_or_else(|| err("voxel before header"))?;
            if f.len() != 3 {
                return Err(err("expected `x y z`"));
            }
            let p = |s: &str| s.parse::<i32>().map_err(|_| err("bad coordinate"));
            rec.voxels.insert(Voxel::new(p(f[0])?, p(f[1])?, p(f[2])?));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force congruence: try every yaw and every translation that
    /// could line the sets up.
    fn congruent_brute(a: &BTreeSet<Voxel>, b: &BTreeSet<Voxel>) -> bool {
        if a.len() != b.len() {
            return false;
        }
        let a0 = *a.iter().next().unwrap();
        (0..4u8).any(|q| {
            let rb: BTreeSet<Voxel> = b.iter().map(|&v| rotate_voxel(v, q)).collect();
            rb.iter().any(|&anchor| {
                let d = [a0.x - anchor.x, a0.y - anchor.y, a0.z - anchor.z];
                rb.iter().all(|v| a.contains(&v.offset(d)))
            })
        })
    }

    #[test]
    fn generation_is_deterministic_and_in_range() {
        for s in 0..40 {
            for class in ComplexityClass::ALL {
                let a = generate_object(class, s);
                let b = generate_object(class, s);
                assert_eq!(a.voxels(), b.voxels());
                assert!(a.validate(), "{class} {s}");
                assert!(class.block_count_range().contains(&a.block_count()));
            }
            assert!(
                generate_object(ComplexityClass::Hard, s).block_count()
                    > generate_object(ComplexityClass::Easy, s).block_count()
            );
        }
    }

    #[test]
    fn canonical_form_is_rotation_invariant_and_idempotent() {
        for s in 0..30 {
            let a = generate_object(ComplexityClass::Medium, s);
            for q in 0..4 {
                assert_eq!(canonical_form(&rotate_yaw(&a, q)), canonical_form(&a));
            }
            let c = canonical_form(&a);
            assert_eq!(canonical_voxels(&c), c);
        }
    }

    #[test]
    fn canonical_equality_matches_brute_force() {
        for s in 0..200u64 {
            let class = ComplexityClass::ALL[(s % 3) as usize];
            let a = generate_object(class, s);
            let b = if s % 2 == 0 {
                rotate_yaw(&a, (s % 4) as u8)
            } else {
                mutate_different(&a, s).unwrap()
            };
            assert_eq!(is_same(&a, &b), congruent_brute(a.voxels(), b.voxels()));
        }
    }

    #[test]
    fn same_relation_basics() {
        let a = generate_object(ComplexityClass::Easy, 3);
        assert!(is_same(&a, &a));
        assert!(is_same(&a, &rotate_yaw(&a, 2)));
        let m = mutate_different(&a, 11).unwrap();
        assert!(!is_same(&a, &m));
        assert!(!congruent_brute(a.voxels(), m.voxels()));
    }

    fn block_diff(a: &BlockObject, b: &BlockObject) -> usize {
        // smallest symmetric difference over translations (mutation may reseat)
        let mut best = usize::MAX;
        for dx in -GRID_EXTENT..=GRID_EXTENT {
            for dy in -GRID_EXTENT..=GRID_EXTENT {
                for dz in -2..=2 {
                    let moved: BTreeSet<Block> =
                        b.blocks.iter().map(|bl| bl.translated([dx, dy, dz])).collect();
                    let orig: BTreeSet<Block> = a.blocks.iter().copied().collect();
                    best = best.min(orig.symmetric_difference(&moved).count());
                }
            }
        }
        best
    }

    #[test]
    fn mutation_contract() {
        for s in 0..60u64 {
            let class = ComplexityClass::ALL[(s % 3) as usize];
            let a = generate_object(class, s * 7 + 1);
            let m = mutate_different(&a, s).unwrap();
            assert!(!is_same(&a, &m));
            assert_eq!(m.complexity, a.complexity);
            assert!(m.validate());
            assert!(block_diff(&a, &m) <= 2, "seed {s}");
            assert_eq!(mutate_different(&a, s).unwrap(), m);
        }
    }

    #[test]
    fn mutation_exhaustion_is_reported() {
        // A single 1x1x1 block cannot satisfy any class range, so no edit
        // can produce a valid object.
        let obj = BlockObject::from_blocks(
            "tiny",
            vec![Block {
                origin: Voxel::new(0, 0, 0),
                size: [1, 1, 1],
            }],
            ComplexityClass::Hard,
            0,
        );
        assert!(matches!(
            mutate_different(&obj, 1),
            Err(ObjectError::GenerationExhausted(_))
        ));
    }

    #[test]
    fn library_shape_and_configuration_count() {
        let lib = ObjectLibrary::generate(42);
        assert_eq!(lib.objects.len(), 12);
        for class in ComplexityClass::ALL {
            let members = lib.by_class(class);
            assert_eq!(members.len(), 4);
            for i in 0..4 {
                for j in (i + 1)..4 {
                    assert!(!is_same(members[i], members[j]));
                }
            }
        }
        assert_eq!(count_configurations(&lib), 378);
        assert_eq!(count_configurations(&lib), 3 * (2 * 16 + 10) * 3);
    }

    #[test]
    fn export_round_trips_voxels() {
        let lib = ObjectLibrary::generate(5);
        let text = write_library(&lib);
        assert!(text.starts_with("object easy-0 easy "));
        let recs = parse_library(&text).unwrap();
        assert_eq!(recs.len(), 12);
        for (r, o) in recs.iter().zip(&lib.objects) {
            assert_eq!(&r.voxels, o.voxels());
            assert_eq!(r.id, o.id);
        }
        assert!(parse_library("1 2 3\n").is_err());
    }
}
