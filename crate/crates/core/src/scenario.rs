//! Trial configurations, room layout and state-space arithmetic.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use thiserror::Error;

use crate::objectgen::{ComplexityClass, ObjectLibrary};
use crate::rng;

/// Trials per simulated session.
pub const TRIALS_PER_SESSION: usize = 18;
/// Trials of each complexity class in one session.
pub const TRIALS_PER_CLASS: usize = 6;
pub const ORIENTATION_DIFFS: [u16; 3] = [0, 90, 180];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("{what} at ({x:.3}, {y:.3}) lies outside the {w} x {d} m workspace")]
    OutsideWorkspace {
        what: &'static str,
        x: f64,
        y: f64,
        w: f64,
        d: f64,
    },
    #[error("trial index {0} outside 1..=18")]
    TrialIndex(usize),
    #[error("object {0} not in library")]
    UnknownObject(String),
    #[error("malformed trial record: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundTruth {
    Same,
    Different,
}

impl GroundTruth {
    pub fn label(self) -> &'static str {
        match self {
            Self::Same => "same",
            Self::Different => "different",
        }
    }
}

impl fmt::Display for GroundTruth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GroundTruth {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "same" => Ok(Self::Same),
            "different" => Ok(Self::Different),
            o => Err(format!("expected same|different, got {o:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StartPosition {
    Long,
    Corner,
    Short,
}

impl StartPosition {
    pub const ALL: [StartPosition; 3] = [Self::Long, Self::Corner, Self::Short];

    pub fn label(self) -> &'static str {
        match self {
            Self::Long => "long",
            Self::Corner => "corner",
            Self::Short => "short",
        }
    }
}

impl fmt::Display for StartPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for StartPosition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "long" => Ok(Self::Long),
            "corner" => Ok(Self::Corner),
            "short" => Ok(Self::Short),
            o => Err(format!("expected long|corner|short, got {o:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TrialConfig {
    pub object_a: String,
    pub object_b: String,
    pub ground_truth: GroundTruth,
    pub orientation_diff: u16,
    pub start: StartPosition,
    pub complexity: ComplexityClass,
    pub trial_index: usize,
    pub seed: u64,
}

impl TrialConfig {
    /// One-line record: `trial <index> <objA> <objB> <same|different> <orient> <start> <class> <seed>`.
    pub fn to_record(&self) -> String {
        format!(
            "trial {} {} {} {} {} {} {} {}",
            self.trial_index,
            self.object_a,
            self.object_b,
            self.ground_truth,
            self.orientation_diff,
            self.start,
            self.complexity,
            self.seed
        )
    }

    pub fn parse_record(line: &str) -> Result<Self, ScenarioError> {
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = |m: &str| ScenarioError::Parse(format!("{m}: {line:?}"));
        if f.len() != 9 || f[0] != "trial" {
            return Err(bad("expected 9 fields starting with `trial`"));
        }
        let orientation_diff: u16 = f[5].parse().map_err(|_| bad("orientation"))?;
        if !ORIENTATION_DIFFS.contains(&orientation_diff) {
            return Err(bad("orientation must be 0, 90 or 180"));
        }
        Ok(TrialConfig {
            trial_index: f[1].parse().map_err(|_| bad("trial index"))?,
            object_a: f[2].to_string(),
            object_b: f[3].to_string(),
            ground_truth: f[4].parse().map_err(|e: String| bad(&e))?,
            orientation_diff,
            start: f[6].parse().map_err(|e: String| bad(&e))?,
            complexity: f[7].parse().map_err(|_| bad("class"))?,
            seed: f[8].parse().map_err(|_| bad("seed"))?,
        })
    }

    /// Identity of the target configuration; the long start does not
    /// distinguish the two posts.
    fn configuration_key(&self) -> (String, String, u16, StartPosition) {
        let (mut a, mut b) = (self.object_a.clone(), self.object_b.clone());
        if self.start == StartPosition::Long && b < a {
            std::mem::swap(&mut a, &mut b);
        }
        (a, b, self.orientation_diff, self.start)
    }
}

fn draw_config<R: Rng>(
    rng: &mut R,
    library: &ObjectLibrary,
    class: ComplexityClass,
    trial_index: usize,
) -> TrialConfig {
    let members = library.by_class(class);
    let ground_truth = if rng.random_bool(0.5) {
        GroundTruth::Same
    } else {
        GroundTruth::Different
    };
    let a = *members.choose(rng).expect("library class nonempty");
    let b = match ground_truth {
        GroundTruth::Same => a,
        GroundTruth::Different => loop {
            let b = *members.choose(rng).expect("nonempty");
            if b.id != a.id {
                break b;
            }
        },
    };
    TrialConfig {
        object_a: a.id.clone(),
        object_b: b.id.clone(),
        ground_truth,
        orientation_diff: *ORIENTATION_DIFFS.choose(rng).expect("nonempty"),
        start: *StartPosition::ALL.choose(rng).expect("nonempty"),
        complexity: class,
        trial_index,
        seed: rng.random(),
    }
}

/// Draws a full 18-trial session: six trials per class in random order,
/// every other variable uniform, no configuration repeated.
pub fn sample_session(library: &ObjectLibrary, seed: u64) -> Vec<TrialConfig> {
    let mut rng = rng::stream(seed, 0x5E55);
    let mut classes: Vec<ComplexityClass> = ComplexityClass::ALL
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, TRIALS_PER_CLASS))
        .collect();
    classes.shuffle(&mut rng);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(TRIALS_PER_SESSION);
    for (i, class) in classes.into_iter().enumerate() {
        let cfg = loop {
            let c = draw_config(&mut rng, library, class, i + 1);
            if seen.insert(c.configuration_key()) {
                break c;
            }
        };
        out.push(cfg);
    }
    out
}

/// The `trial_index`-th (1-based) trial of the session identified by `seed`.
pub fn sample_trial_config(
    library: &ObjectLibrary,
    trial_index: usize,
    seed: u64,
) -> Result<TrialConfig, ScenarioError> {
    if !(1..=TRIALS_PER_SESSION).contains(&trial_index) {
        return Err(ScenarioError::TrialIndex(trial_index));
    }
    Ok(sample_session(library, seed).swap_remove(trial_index - 1))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Workspace {
    /// Extent along x, meters.
    pub width: f64,
    /// Extent along y, meters.
    pub depth: f64,
}

impl Workspace {
    pub const PESAO: Workspace = Workspace {
        width: 4.3,
        depth: 3.4,
    };

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0.0..=self.width).contains(&p[0]) && (0.0..=self.depth).contains(&p[1])
    }

    pub fn center(&self) -> [f64; 2] {
        [self.width / 2.0, self.depth / 2.0]
    }

    fn check(&self, what: &'static str, p: [f64; 2]) -> Result<(), ScenarioError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(ScenarioError::OutsideWorkspace {
                what,
                x: p[0],
                y: p[1],
                w: self.width,
                d: self.depth,
            })
        }
    }
}

/// Declared room geometry. The source only describes the layout
/// qualitatively.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneGeometry {
    pub workspace: Workspace,
    pub post_separation: f64,
    pub mount_height: f64,
    pub long_distance: f64,
    pub corner_distance: f64,
    pub short_distance: f64,
    /// Edge length of one voxel, meters.
    pub voxel_edge: f64,
    pub eye_height: f64,
}

impl Default for SceneGeometry {
    fn default() -> Self {
        SceneGeometry {
            workspace: Workspace::PESAO,
            post_separation: 1.0,
            mount_height: 1.4,
            long_distance: 1.5,
            corner_distance: 1.9,
            short_distance: 2.0,
            voxel_edge: 0.05,
            eye_height: 1.65,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Post {
    pub position: [f64; 2],
    pub height: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StartPose {
    pub position: [f64; 2],
    /// Degrees, counter-clockwise from +x.
    pub body_yaw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub geometry: SceneGeometry,
    pub post_a: Post,
    pub post_b: Post,
    /// Mounting yaw of each object, degrees in [0, 360).
    pub yaw_a: f64,
    pub yaw_b: f64,
    pub start: StartPose,
}

impl Scene {
    pub fn workspace(&self) -> Workspace {
        self.geometry.workspace
    }

    pub fn midpoint(&self) -> [f64; 2] {
        [
            (self.post_a.position[0] + self.post_b.position[0]) / 2.0,
            (self.post_a.position[1] + self.post_b.position[1]) / 2.0,
        ]
    }
}

pub fn build_scene(config: &TrialConfig) -> Result<Scene, ScenarioError> {
    build_scene_with(config, &SceneGeometry::default())
}

/// Lays out posts along the workspace's long axis and the start pose per
/// the start position: long = perpendicular bisector, corner = 45 degree
/// oblique on A's side, short = on the post axis beyond A. The observer
/// starts facing away from the posts.
pub fn build_scene_with(config: &TrialConfig, geometry: &SceneGeometry) -> Result<Scene, ScenarioError> {
    let ws = geometry.workspace;
    let [cx, cy] = ws.center();
    let half = geometry.post_separation / 2.0;
    let post_a = Post {
        position: [cx - half, cy],
        height: geometry.mount_height,
    };
    let post_b = Post {
        position: [cx + half, cy],
        height: geometry.mount_height,
    };
    let position = match config.start {
        StartPosition::Long => [cx, cy - geometry.long_distance],
        StartPosition::Corner => {
            let d = geometry.corner_distance * std::f64::consts::FRAC_1_SQRT_2;
            [cx - d, cy - d]
        }
        StartPosition::Short => [cx - geometry.short_distance, cy],
    };
    ws.check("post A", post_a.position)?;
    ws.check("post B", post_b.position)?;
    ws.check("start position", position)?;
    let toward = (cy - position[1]).atan2(cx - position[0]).to_degrees();
    let body_yaw = (toward + 180.0).rem_euclid(360.0);

    let mut rng = rng::stream(config.seed, 0x5CE7E);
    let yaw_a = f64::from(90 * rng.random_range(0..4u16));
    let yaw_b = (yaw_a + f64::from(config.orientation_diff)).rem_euclid(360.0);
    Ok(Scene {
        geometry: *geometry,
        post_a,
        post_b,
        yaw_a,
        yaw_b,
        start: StartPose { position, body_yaw },
    })
}

/// Measurement quanta of the observer state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateQuantization {
    pub gaze_cell_deg: [f64; 2],
    pub visual_field_deg: [f64; 2],
    pub head_quantum_deg: f64,
    pub head_span_deg: [f64; 2],
    pub position_cell_m: [f64; 2],
    pub workspace: Workspace,
    pub body_quantum_deg: f64,
    pub body_span_deg: f64,
}

impl StateQuantization {
    pub const PESAO: StateQuantization = StateQuantization {
        gaze_cell_deg: [2.0, 2.0],
        visual_field_deg: [180.0, 100.0],
        head_quantum_deg: 5.0,
        head_span_deg: [180.0, 180.0],
        position_cell_m: [0.4, 0.4],
        workspace: Workspace::PESAO,
        body_quantum_deg: 5.0,
        body_span_deg: 360.0,
    };

    pub fn fixation_angles(&self) -> u64 {
        cells(self.visual_field_deg[0], self.gaze_cell_deg[0])
            * cells(self.visual_field_deg[1], self.gaze_cell_deg[1])
    }

    pub fn head_poses(&self) -> u64 {
        cells(self.head_span_deg[0], self.head_quantum_deg)
            * cells(self.head_span_deg[1], self.head_quantum_deg)
    }

    /// Floor of workspace area over cell area.
    pub fn positions(&self) -> u64 {
        let area = self.workspace.width * self.workspace.depth;
        cells(area, self.position_cell_m[0] * self.position_cell_m[1])
    }

    pub fn body_orientations(&self) -> u64 {
        cells(self.body_span_deg, self.body_quantum_deg)
    }
}

fn cells(span: f64, quantum: f64) -> u64 {
    ((span / quantum) + 1e-9).floor().max(0.0) as u64
}

pub fn state_space_size(q: &StateQuantization) -> u64 {
    q.fixation_angles() * q.head_poses() * q.positions() * q.body_orientations()
}
