//! Observer kinematics and perception.
//!
//! Objects live in their own voxel grids; a [`World`] places both grids on
//! their posts. Visibility of a voxel face is decided by casting one ray
//! from the face centre to the eye and walking the voxel grids it crosses.
//!
//! Angles are degrees. World yaw is counter-clockwise from +x, pitch is
//! positive upwards. Gaze azimuth/elevation are offsets from the head's
//! yaw/pitch.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::objectgen::{BlockObject, Voxel, GRID_EXTENT};
use crate::scenario::{Post, Scene, Workspace};

/// Half-extent of the visual field, degrees (180 x 100 field).
pub const FIELD_HALF_AZIMUTH: f64 = 90.0;
pub const FIELD_HALF_ELEVATION: f64 = 50.0;
/// Head rotation limit relative to the body, degrees.
pub const HEAD_YAW_LIMIT: f64 = 90.0;
pub const HEAD_PITCH_LIMIT: f64 = 90.0;
/// Maximum horizontal offset of the head from the body centre.
pub const HEAD_BODY_OFFSET_LIMIT: f64 = 0.3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("walk target ({0:.3}, {1:.3}) is outside the workspace")]
    OutsideWorkspace(f64, f64),
    #[error("gaze ({0:.1}, {1:.1}) lies outside the visual field")]
    OutsideVisualField(f64, f64),
    #[error("head rotation ({0:.1}, {1:.1}) exceeds the neck limits")]
    OutsideHeadRange(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    A,
    B,
    Environment,
}

impl Target {
    pub fn is_object(self) -> bool {
        !matches!(self, Target::Environment)
    }

    pub fn other(self) -> Target {
        match self {
            Target::A => Target::B,
            Target::B => Target::A,
            Target::Environment => Target::Environment,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Target::A => "A",
            Target::B => "B",
            Target::Environment => "env",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "A" => Ok(Target::A),
            "B" => Ok(Target::B),
            "env" => Ok(Target::Environment),
            o => Err(format!("unknown target {o:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Face {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::PosX,
        Face::NegX,
        Face::PosY,
        Face::NegY,
        Face::PosZ,
        Face::NegZ,
    ];

    pub fn normal(self) -> [i32; 3] {
        match self {
            Face::PosX => [1, 0, 0],
            Face::NegX => [-1, 0, 0],
            Face::PosY => [0, 1, 0],
            Face::NegY => [0, -1, 0],
            Face::PosZ => [0, 0, 1],
            Face::NegZ => [0, 0, -1],
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Face::PosX => "+x",
            Face::NegX => "-x",
            Face::PosY => "+y",
            Face::NegY => "-y",
            Face::PosZ => "+z",
            Face::NegZ => "-z",
        }
    }
}

impl FromStr for Face {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Face::ALL
            .into_iter()
            .find(|f| f.token() == s)
            .ok_or_else(|| format!("unknown face {s:?}"))
    }
}

pub type Vec3 = [f64; 3];

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Unit vector for a world yaw/pitch.
pub fn direction(yaw: f64, pitch: f64) -> Vec3 {
    let (y, p) = (yaw.to_radians(), pitch.to_radians());
    [p.cos() * y.cos(), p.cos() * y.sin(), p.sin()]
}

/// World yaw/pitch of a vector.
pub fn yaw_pitch(v: Vec3) -> (f64, f64) {
    let yaw = v[1].atan2(v[0]).to_degrees();
    let pitch = v[2].atan2((v[0] * v[0] + v[1] * v[1]).sqrt()).to_degrees();
    (yaw, pitch)
}

/// Wraps an angle into (-180, 180].
pub fn wrap180(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Angle between two vectors, degrees.
pub fn angle_between(a: Vec3, b: Vec3) -> f64 {
    let c = dot(a, b) / (norm(a) * norm(b));
    c.clamp(-1.0, 1.0).acos().to_degrees()
}

/// One object placed on its post.
#[derive(Clone, Debug)]
pub struct PlacedObject {
    pub target: Target,
    pub object: BlockObject,
    post: Post,
    cos: f64,
    sin: f64,
    edge: f64,
    center: [f64; 2],
    occupancy: Vec<bool>,
}

fn cell_index(x: i32, y: i32, z: i32) -> usize {
    ((z * GRID_EXTENT + y) * GRID_EXTENT + x) as usize
}

impl PlacedObject {
    pub fn new(target: Target, object: BlockObject, post: Post, yaw_deg: f64, edge: f64) -> Self {
        let mut occupancy = vec![false; (GRID_EXTENT * GRID_EXTENT * GRID_EXTENT) as usize];
        for v in object.voxels() {
            occupancy[cell_index(v.x, v.y, v.z)] = true;
        }
        let e = object.extent();
        // exact trig for the quarter turns used by mounting
        let q = (yaw_deg / 90.0).round();
        let (cos, sin) = if (yaw_deg - 90.0 * q).abs() < 1e-9 {
            match (q as i64).rem_euclid(4) {
                0 => (1.0, 0.0),
                1 => (0.0, 1.0),
                2 => (-1.0, 0.0),
                _ => (0.0, -1.0),
            }
        } else {
            let r = yaw_deg.to_radians();
            (r.cos(), r.sin())
        };
        PlacedObject {
            target,
            object,
            post,
            cos,
            sin,
            edge,
            center: [f64::from(e[0]) / 2.0, f64::from(e[1]) / 2.0],
            occupancy,
        }
    }

    pub fn occupied(&self, v: Voxel) -> bool {
        (0..GRID_EXTENT).contains(&v.x)
            && (0..GRID_EXTENT).contains(&v.y)
            && (0..GRID_EXTENT).contains(&v.z)
            && self.occupancy[cell_index(v.x, v.y, v.z)]
    }

    /// Local continuous coordinates (voxel units) to world meters.
    pub fn to_world(&self, p: Vec3) -> Vec3 {
        let dx = (p[0] - self.center[0]) * self.edge;
        let dy = (p[1] - self.center[1]) * self.edge;
        [
            self.post.position[0] + self.cos * dx - self.sin * dy,
            self.post.position[1] + self.sin * dx + self.cos * dy,
            self.post.height + p[2] * self.edge,
        ]
    }

    pub fn to_local(&self, w: Vec3) -> Vec3 {
        let dx = (w[0] - self.post.position[0]) / self.edge;
        let dy = (w[1] - self.post.position[1]) / self.edge;
        [
            self.cos * dx + self.sin * dy + self.center[0],
            -self.sin * dx + self.cos * dy + self.center[1],
            (w[2] - self.post.height) / self.edge,
        ]
    }

    /// World position of a voxel centre.
    pub fn voxel_center(&self, v: Voxel) -> Vec3 {
        self.to_world([
            f64::from(v.x) + 0.5,
            f64::from(v.y) + 0.5,
            f64::from(v.z) + 0.5,
        ])
    }

    pub fn face_center(&self, v: Voxel, f: Face) -> Vec3 {
        self.to_world(local_face_center(v, f, 0.0))
    }

    /// Centre of the bounding box, world meters.
    pub fn center(&self) -> Vec3 {
        let e = self.object.extent();
        self.to_world([self.center[0], self.center[1], f64::from(e[2]) / 2.0])
    }

    /// Radius of the bounding sphere, meters.
    pub fn bounding_radius(&self) -> f64 {
        let e = self.object.extent();
        let d = [f64::from(e[0]), f64::from(e[1]), f64::from(e[2])];
        norm(d) * self.edge / 2.0
    }

    /// First occupied cell along the segment, as a fraction of its length.
    pub fn segment_hit(&self, from: Vec3, to: Vec3) -> Option<f64> {
        grid_traverse(&self.occupancy, self.to_local(from), self.to_local(to))
    }

    pub fn exposed(&self, v: Voxel, f: Face) -> bool {
        let n = f.normal();
        !self.occupied(Voxel::new(v.x + n[0], v.y + n[1], v.z + n[2]))
    }
}

fn local_face_center(v: Voxel, f: Face, lift: f64) -> Vec3 {
    let n = f.normal();
    [
        f64::from(v.x) + 0.5 + f64::from(n[0]) * (0.5 + lift),
        f64::from(v.y) + 0.5 + f64::from(n[1]) * (0.5 + lift),
        f64::from(v.z) + 0.5 + f64::from(n[2]) * (0.5 + lift),
    ]
}

/// Amanatides-Woo traversal of the segment `p0 -> p1` through the object
/// grid. Returns the segment parameter at which the first occupied cell is
/// entered.
fn grid_traverse(occ: &[bool], p0: Vec3, p1: Vec3) -> Option<f64> {
    let n = f64::from(GRID_EXTENT);
    let d = sub(p1, p0);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for a in 0..3 {
        if d[a].abs() < 1e-15 {
            if p0[a] < 0.0 || p0[a] >= n {
                return None;
            }
        } else {
            let (mut ta, mut tb) = ((0.0 - p0[a]) / d[a], (n - p0[a]) / d[a]);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
        }
    }
    if t0 > t1 {
        return None;
    }
    let start = [p0[0] + d[0] * t0, p0[1] + d[1] * t0, p0[2] + d[2] * t0];
    let mut cell = [0i32; 3];
    let mut step = [0i32; 3];
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    for a in 0..3 {
        cell[a] = (start[a].floor() as i32).clamp(0, GRID_EXTENT - 1);
        if d[a] > 1e-15 {
            step[a] = 1;
            t_max[a] = t0 + (f64::from(cell[a] + 1) - start[a]) / d[a];
            t_delta[a] = 1.0 / d[a];
        } else if d[a] < -1e-15 {
            step[a] = -1;
            t_max[a] = t0 + (f64::from(cell[a]) - start[a]) / d[a];
            t_delta[a] = -1.0 / d[a];
        }
    }
    let mut t_enter = t0;
    loop {
        if occ[cell_index(cell[0], cell[1], cell[2])] {
            return Some(t_enter);
        }
        let a = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
            0
        } else if t_max[1] <= t_max[2] {
            1
        } else {
            2
        };
        if t_max[a] > t1 {
            return None;
        }
        t_enter = t_max[a];
        cell[a] += step[a];
        if !(0..GRID_EXTENT).contains(&cell[a]) {
            return None;
        }
        t_max[a] += t_delta[a];
    }
}

/// Both mounted objects of a trial.
#[derive(Clone, Debug)]
pub struct World {
    pub scene: Scene,
    pub a: PlacedObject,
    pub b: PlacedObject,
}

impl World {
    pub fn new(scene: Scene, a: BlockObject, b: BlockObject) -> Self {
        let edge = scene.geometry.voxel_edge;
        let pa = PlacedObject::new(Target::A, a, scene.post_a, scene.yaw_a, edge);
        let pb = PlacedObject::new(Target::B, b, scene.post_b, scene.yaw_b, edge);
        World { scene, a: pa, b: pb }
    }

    pub fn object(&self, t: Target) -> Option<&PlacedObject> {
        match t {
            Target::A => Some(&self.a),
            Target::B => Some(&self.b),
            Target::Environment => None,
        }
    }

    pub fn objects(&self) -> [&PlacedObject; 2] {
        [&self.a, &self.b]
    }

    /// True when some voxel of either object lies on the open segment.
    pub fn segment_blocked(&self, from: Vec3, to: Vec3) -> bool {
        self.a.segment_hit(from, to).is_some() || self.b.segment_hit(from, to).is_some()
    }

    /// Whether a face of `obj` is visible from `eye`: exposed, facing the
    /// eye, and with an unobstructed centre-to-eye ray.
    pub fn face_visible(&self, obj: &PlacedObject, v: Voxel, f: Face, eye: Vec3) -> bool {
        if !obj.exposed(v, f) {
            return false;
        }
        let n = f.normal();
        let local_eye = obj.to_local(eye);
        let lc = local_face_center(v, f, 0.0);
        let facing = f64::from(n[0]) * (local_eye[0] - lc[0])
            + f64::from(n[1]) * (local_eye[1] - lc[1])
            + f64::from(n[2]) * (local_eye[2] - lc[2]);
        if facing <= 1e-9 {
            return false;
        }
        let lifted = obj.to_world(local_face_center(v, f, 1e-4));
        !self.segment_blocked(lifted, eye)
    }

    /// Every visible face of one object from `eye`.
    pub fn visible_faces(&self, obj: &PlacedObject, eye: Vec3) -> Vec<(Voxel, Face)> {
        let mut out = Vec::new();
        for &v in obj.object.voxels() {
            for f in Face::ALL {
                if self.face_visible(obj, v, f, eye) {
                    out.push((v, f));
                }
            }
        }
        out
    }

    /// First object surface hit along a ray, with its distance.
    pub fn ray_hit(&self, origin: Vec3, dir: Vec3, max_range: f64) -> Option<(Target, f64)> {
        let end = [
            origin[0] + dir[0] * max_range,
            origin[1] + dir[1] * max_range,
            origin[2] + dir[2] * max_range,
        ];
        let ha = self.a.segment_hit(origin, end).map(|t| (Target::A, t));
        let hb = self.b.segment_hit(origin, end).map(|t| (Target::B, t));
        match (ha, hb) {
            (Some(a), Some(b)) => Some(if a.1 <= b.1 { a } else { b }),
            (x, None) | (None, x) => x,
        }
        .map(|(t, s)| (t, s * max_range))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeadPose {
    pub position: Vec3,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObserverPose {
    pub body_position: [f64; 2],
    pub body_yaw: f64,
    pub head: HeadPose,
    pub gaze_azimuth: f64,
    pub gaze_elevation: f64,
    pub fixation_depth: f64,
}

impl ObserverPose {
    /// Standing pose with head level and aligned with the body.
    pub fn standing(position: [f64; 2], body_yaw: f64, eye_height: f64) -> Self {
        ObserverPose {
            body_position: position,
            body_yaw,
            head: HeadPose {
                position: [position[0], position[1], eye_height],
                yaw: body_yaw,
                pitch: 0.0,
                roll: 0.0,
            },
            gaze_azimuth: 0.0,
            gaze_elevation: 0.0,
            fixation_depth: 1.0,
        }
    }

    pub fn eye(&self) -> Vec3 {
        self.head.position
    }

    pub fn gaze_direction(&self) -> Vec3 {
        direction(
            self.head.yaw + self.gaze_azimuth,
            self.head.pitch + self.gaze_elevation,
        )
    }

    pub fn gaze_point(&self) -> Vec3 {
        let d = self.gaze_direction();
        let e = self.eye();
        [
            e[0] + d[0] * self.fixation_depth,
            e[1] + d[1] * self.fixation_depth,
            e[2] + d[2] * self.fixation_depth,
        ]
    }

    /// Gaze offsets needed to look at `p` with the current head.
    pub fn gaze_toward(&self, p: Vec3) -> (f64, f64) {
        let (yaw, pitch) = yaw_pitch(sub(p, self.eye()));
        (wrap180(yaw - self.head.yaw), pitch - self.head.pitch)
    }

    pub fn is_valid(&self) -> bool {
        let dx = self.head.position[0] - self.body_position[0];
        let dy = self.head.position[1] - self.body_position[1];
        in_field(self.gaze_azimuth, self.gaze_elevation)
            && (dx * dx + dy * dy).sqrt() <= HEAD_BODY_OFFSET_LIMIT
    }
}

pub fn in_field(azimuth: f64, elevation: f64) -> bool {
    azimuth.abs() <= FIELD_HALF_AZIMUTH && elevation.abs() <= FIELD_HALF_ELEVATION
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisibleElement {
    pub target: Target,
    pub block: usize,
    pub voxel: Voxel,
    pub face: Face,
    /// Face centre in head coordinates: forward, left, up (meters).
    pub view_position: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Percept {
    pub fixated: Target,
    pub visible: Vec<VisibleElement>,
    /// Indices into `visible` within the foveal cone.
    pub foveal: Vec<usize>,
}

/// Default foveal half-angle, degrees.
pub const FOVEAL_RADIUS_DEG: f64 = 5.0;

fn to_head_frame(head: &HeadPose, p: Vec3) -> Vec3 {
    let d = sub(p, head.position);
    let fwd = direction(head.yaw, head.pitch);
    let left = direction(head.yaw + 90.0, 0.0);
    let up = [
        -head.pitch.to_radians().sin() * head.yaw.to_radians().cos(),
        -head.pitch.to_radians().sin() * head.yaw.to_radians().sin(),
        head.pitch.to_radians().cos(),
    ];
    [dot(d, fwd), dot(d, left), dot(d, up)]
}

pub fn visible_elements(world: &World, pose: &ObserverPose) -> Percept {
    visible_elements_with(world, pose, FOVEAL_RADIUS_DEG)
}

pub fn visible_elements_with(world: &World, pose: &ObserverPose, foveal_radius: f64) -> Percept {
    let eye = pose.eye();
    let gaze = pose.gaze_direction();
    let mut visible = Vec::new();
    let mut foveal = Vec::new();
    for obj in world.objects() {
        for (v, f) in world.visible_faces(obj, eye) {
            let c = obj.face_center(v, f);
            if angle_between(sub(c, eye), gaze) <= foveal_radius {
                foveal.push(visible.len());
            }
            visible.push(VisibleElement {
                target: obj.target,
                block: obj.object.block_of(v).unwrap_or(usize::MAX),
                voxel: v,
                face: f,
                view_position: to_head_frame(&pose.head, c),
            });
        }
    }
    let fixated = world
        .ray_hit(eye, gaze, 20.0)
        .map(|(t, _)| t)
        .unwrap_or(Target::Environment);
    Percept {
        fixated,
        visible,
        foveal,
    }
}

/// Octant of the direction from the object's centre to the head. Bit 0 is
/// set for +x, bit 1 for +y, bit 2 for +z (world axes).
pub fn sector_of(object_center: Vec3, head: Vec3) -> u8 {
    let d = sub(head, object_center);
    u8::from(d[0] >= 0.0) | (u8::from(d[1] >= 0.0) << 1) | (u8::from(d[2] >= 0.0) << 2)
}

pub fn sector_index(world: &World, pose: &ObserverPose, target: Target) -> Option<u8> {
    world
        .object(target)
        .map(|o| sector_of(o.center(), pose.eye()))
}

/// Time costs of the observer's motor repertoire.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostTable {
    /// Saccade plus one fixation.
    pub fixation_s: f64,
    pub head_deg_per_s: f64,
    pub walk_m_per_s: f64,
    /// Start/stop overhead per walk.
    pub walk_overhead_s: f64,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable {
            fixation_s: 0.3,
            head_deg_per_s: 90.0,
            walk_m_per_s: 1.0,
            walk_overhead_s: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Action {
    Saccade { azimuth: f64, elevation: f64 },
    /// Head-only rotation to an absolute world yaw/pitch.
    ViewingAngleChange { yaw: f64, pitch: f64 },
    /// Walk to a position and face `body_yaw`.
    PointOfViewChange { position: [f64; 2], body_yaw: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionResult {
    pub pose: ObserverPose,
    pub elapsed: f64,
    pub path_length: f64,
}

pub fn act(
    pose: &ObserverPose,
    action: Action,
    workspace: &Workspace,
    costs: &CostTable,
) -> Result<ActionResult, ActionError> {
    let mut next = *pose;
    match action {
        Action::Saccade { azimuth, elevation } => {
            if !in_field(azimuth, elevation) {
                return Err(ActionError::OutsideVisualField(azimuth, elevation));
            }
            next.gaze_azimuth = azimuth;
            next.gaze_elevation = elevation;
            Ok(ActionResult {
                pose: next,
                elapsed: costs.fixation_s,
                path_length: 0.0,
            })
        }
        Action::ViewingAngleChange { yaw, pitch } => {
            let rel = wrap180(yaw - pose.body_yaw);
            if rel.abs() > HEAD_YAW_LIMIT || pitch.abs() > HEAD_PITCH_LIMIT {
                return Err(ActionError::OutsideHeadRange(rel, pitch));
            }
            let sweep = wrap180(yaw - pose.head.yaw)
                .abs()
                .max((pitch - pose.head.pitch).abs());
            next.head.yaw = yaw.rem_euclid(360.0);
            next.head.pitch = pitch;
            Ok(ActionResult {
                pose: next,
                elapsed: sweep / costs.head_deg_per_s,
                path_length: 0.0,
            })
        }
        Action::PointOfViewChange { position, body_yaw } => {
            if !workspace.contains(position) {
                return Err(ActionError::OutsideWorkspace(position[0], position[1]));
            }
            let dx = position[0] - pose.body_position[0];
            let dy = position[1] - pose.body_position[1];
            let dist = (dx * dx + dy * dy).sqrt();
            next.body_position = position;
            next.body_yaw = body_yaw.rem_euclid(360.0);
            next.head.position = [
                pose.head.position[0] + dx,
                pose.head.position[1] + dy,
                pose.head.position[2],
            ];
            next.head.yaw = next.body_yaw;
            next.head.pitch = 0.0;
            let elapsed = if dist > 0.0 {
                costs.walk_overhead_s + dist / costs.walk_m_per_s
            } else {
                0.0
            };
            Ok(ActionResult {
                pose: next,
                elapsed,
                path_length: dist,
            })
        }
    }
}

/// Measurement noise of the recording apparatus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub enabled: bool,
    /// Per-axis standard deviation of head position error, meters.
    pub head_sigma_m: f64,
    /// Per-axis standard deviation of gaze angle error, degrees.
    pub gaze_sigma_deg: f64,
}

/// 97% of head samples fall within this radius.
pub const HEAD_ACCURACY_M: f64 = 0.0004;
pub const HEAD_ACCURACY_QUANTILE: f64 = 0.97;
/// Mean absolute gaze error, degrees.
pub const GAZE_ACCURACY_DEG: f64 = 1.42;

impl NoiseModel {
    /// Calibrated to the tracker: isotropic 3D head error whose 97th
    /// percentile radius is 0.4 mm, and 2D gaze error with mean magnitude
    /// 1.42 degrees (Rayleigh mean = sigma * sqrt(pi / 2)).
    pub fn pesao() -> Self {
        let chi2 = ChiSquared::new(3.0).expect("valid dof");
        let r = chi2.inverse_cdf(HEAD_ACCURACY_QUANTILE).sqrt();
        NoiseModel {
            enabled: true,
            head_sigma_m: HEAD_ACCURACY_M / r,
            gaze_sigma_deg: GAZE_ACCURACY_DEG / (std::f64::consts::PI / 2.0).sqrt(),
        }
    }

    pub fn disabled() -> Self {
        NoiseModel {
            enabled: false,
            ..Self::pesao()
        }
    }

    pub fn head_error<R: Rng>(&self, rng: &mut R) -> Vec3 {
        if !self.enabled {
            return [0.0; 3];
        }
        let n = Normal::new(0.0, self.head_sigma_m).expect("finite sigma");
        [n.sample(rng), n.sample(rng), n.sample(rng)]
    }

    /// (azimuth, elevation) error, degrees.
    pub fn gaze_error<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        if !self.enabled {
            return (0.0, 0.0);
        }
        let n = Normal::new(0.0, self.gaze_sigma_deg).expect("finite sigma");
        (n.sample(rng), n.sample(rng))
    }
}

/// Returns the pose as the tracker would report it.
pub fn apply_noise<R: Rng>(pose: &ObserverPose, model: &NoiseModel, rng: &mut R) -> ObserverPose {
    if !model.enabled {
        return *pose;
    }
    let mut out = *pose;
    let e = model.head_error(rng);
    for (p, d) in out.head.position.iter_mut().zip(e) {
        *p += d;
    }
    let (da, de) = model.gaze_error(rng);
    out.gaze_azimuth += da;
    out.gaze_elevation += de;
    out
}
