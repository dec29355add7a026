//! Hypothesize, deploy, test: the trial executive.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::library::StrategyLibrary;
use super::parts::PartDecomposition;
use super::program::{instantiate, sample_choice, CognitiveProgram, NodeKind, OperationKind};
use crate::objectgen::{BlockObject, ObjectLibrary, Voxel};
use crate::percept::{
    act, apply_noise, direction, in_field, norm, sector_of, sub, wrap180, yaw_pitch, Action, CostTable, Face,
    NoiseModel, ObserverPose, Target, Vec3, World, HEAD_YAW_LIMIT,
};
use crate::scenario::{build_scene, GroundTruth, ScenarioError, TrialConfig};
use crate::tracefmt::{
    quantize, AnswerRecord, Element, FixationRecord, HeadSample, MotionKind, MotionRecord, Trace, TraceMeta,
};
use crate::{rng, ENGINE_VERSION};

/// Fixations after which the executive must answer.
pub const STEP_BUDGET: usize = 1000;
pub const MIN_TARGET_FIXATIONS: usize = 6;
pub const FIXATION_MS: u32 = 300;
/// Outlier scrutiny fixations.
pub const SCRUTINY_MS: u32 = 800;
/// Gaze displacement at the object beyond which a comparison is misread.
pub const MISREAD_DISPLACEMENT_M: f64 = 0.05;
pub const PAIR_RING_RADIUS: f64 = 1.5;
pub const OBJECT_RING_RADIUS: f64 = 0.9;
/// Minimum distance between a viewpoint and either post.
pub const POST_CLEARANCE: f64 = 0.5;
pub const MAX_CONFIRMATIONS: usize = 2;
/// Deliberation pause before a freshly formulated deployment, seconds.
pub const FORMULATION_PAUSE: Range<f64> = 0.4..1.2;
/// Pause before a confirmation repeat, seconds.
pub const REPEAT_PAUSE: Range<f64> = 0.25..0.35;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("object `{0}` is not in the library")]
    UnknownObject(String),
    #[error(transparent)]
    Scene(#[from] ScenarioError),
    #[error("step budget exhausted")]
    Budget,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExecutiveState {
    /// Visited viewing-sphere sectors of A and B (bit per octant).
    pub visited_sectors: [u8; 2],
    /// Regions compared and found equal; never subdivided again.
    pub conquered: BTreeSet<u8>,
    pub outlier_candidates: Vec<u8>,
    /// Compared regions and the perceived verdict (true = equal).
    pub ledger: BTreeMap<u8, bool>,
    /// Method the active Script was instantiated from.
    pub hypothesis: Option<String>,
    pub candidate: Option<GroundTruth>,
    pub confidence: f64,
    /// Strategy kinds dismissed per region.
    pub excluded: BTreeMap<u8, BTreeSet<OperationKind>>,
    pub focus: Option<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeployOutcome {
    NotApplicable,
    /// Gist coverage reached.
    Covered,
    Match,
    Mismatch(u8),
    Dismissed,
    Confirmed(u8),
    Refuted(u8),
}

#[derive(Clone, Debug, PartialEq)]
enum Replay {
    Divide(Vec<u8>),
    Alternate { part: u8, reps: usize, vp: [f64; 2] },
    AlternateView { part: u8, reps: usize, vps: [[f64; 2]; 2] },
    Coarse { part: u8, passes: usize, vp: [f64; 2] },
    Outlier(u8),
    Gist,
}

/// One executed strategy, the ground truth for trace analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct Deployment {
    /// Annotation carried by its fixations.
    pub kind: OperationKind,
    /// Strategy actually executed (differs from `kind` for repetitions).
    pub strategy: OperationKind,
    pub parts: Vec<u8>,
    /// Fixation record indices.
    pub records: Range<usize>,
    pub outcome: DeployOutcome,
    /// Abandoned: a later comparison re-examined one of its parts.
    pub dead_end: bool,
    replay: Replay,
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub answer: GroundTruth,
    pub correct: bool,
    pub trace: Trace,
    pub deployments: Vec<Deployment>,
    pub reformulations: usize,
    pub forced: bool,
    pub state: ExecutiveState,
}

impl TrialOutcome {
    /// Ground-truth intervals: the two initialization routines, then one
    /// per deployment, as (kind, start s, end s).
    pub fn annotated_intervals(&self) -> Vec<(OperationKind, f64, f64)> {
        let recs = &self.trace.records;
        let mut out = Vec::new();
        let init_end = self.deployments.first().map_or(recs.len(), |d| d.records.start);
        for kind in [OperationKind::ThreeDLayout, OperationKind::LocateTargets] {
            let span: Vec<&FixationRecord> = recs[..init_end]
                .iter()
                .filter(|r| r.annotation == Some(kind))
                .collect();
            if let (Some(f), Some(l)) = (span.first(), span.last()) {
                out.push((kind, f.t_start, l.t_end()));
            }
        }
        for d in &self.deployments {
            if d.records.is_empty() {
                continue;
            }
            out.push((d.kind, recs[d.records.start].t_start, recs[d.records.end - 1].t_end()));
        }
        out
    }
}

struct Budget;
type Step<T> = Result<T, Budget>;

struct PlannedOp {
    kind: OperationKind,
    reps: usize,
    passes: usize,
    coverage: u32,
}

impl PlannedOp {
    fn of(kind: OperationKind) -> Self {
        PlannedOp {
            kind,
            reps: 2,
            passes: 3,
            coverage: 4,
        }
    }
}

/// Mutable state of one running trial.
pub struct TrialRun<'a> {
    pub world: World,
    pub parts: PartDecomposition,
    pub state: ExecutiveState,
    library: &'a StrategyLibrary,
    noise: NoiseModel,
    costs: CostTable,
    rng: ChaCha8Rng,
    noise_rng: ChaCha8Rng,
    pose: ObserverPose,
    clock: f64,
    records: Vec<FixationRecord>,
    motions: Vec<MotionRecord>,
    deployments: Vec<Deployment>,
}

fn target_index(t: Target) -> usize {
    usize::from(t == Target::B)
}

impl<'a> TrialRun<'a> {
    pub fn new(
        config: &TrialConfig,
        a: &BlockObject,
        b: &BlockObject,
        library: &'a StrategyLibrary,
        noise: NoiseModel,
        seed: u64,
    ) -> Result<Self, EngineError> {
        let scene = build_scene(config)?;
        let pose = ObserverPose::standing(scene.start.position, scene.start.body_yaw, scene.geometry.eye_height);
        Ok(TrialRun {
            world: World::new(scene, a.clone(), b.clone()),
            parts: PartDecomposition::new(a, b),
            state: ExecutiveState::default(),
            library,
            noise,
            costs: CostTable::default(),
            rng: rng::stream(seed, 0xE1),
            noise_rng: rng::stream(seed, 0xE2),
            pose,
            clock: 0.0,
            records: Vec::new(),
            motions: Vec::new(),
            deployments: Vec::new(),
        })
    }

    pub fn records(&self) -> &[FixationRecord] {
        &self.records
    }

    pub fn motions(&self) -> &[MotionRecord] {
        &self.motions
    }

    pub fn deployments(&self) -> &[Deployment] {
        &self.deployments
    }

    pub fn pose(&self) -> &ObserverPose {
        &self.pose
    }

    fn eye(&self) -> Vec3 {
        self.pose.eye()
    }

    fn object(&self, t: Target) -> &BlockObject {
        &self.world.object(t).expect("object target").object
    }

    fn focus_point(&self) -> Vec3 {
        let m = self.world.scene.midpoint();
        [m[0], m[1], self.world.scene.geometry.mount_height + 0.1]
    }

    fn eye_at(&self, p: [f64; 2]) -> Vec3 {
        [p[0], p[1], self.world.scene.geometry.eye_height]
    }

    fn target_fixations(&self) -> usize {
        self.records.iter().filter(|r| r.target.is_object()).count()
    }

    // ---- motor layer ----------------------------------------------------

    fn push_motion(&mut self, kind: MotionKind, length: f64, elapsed: f64) {
        let t = quantize(self.clock);
        self.motions.push(MotionRecord {
            t_start: t,
            kind,
            length: quantize(length),
        });
        self.clock = t + elapsed;
    }

    /// Turns body and head in place to face `p`.
    fn orient(&mut self, p: Vec3) {
        let (yaw, pitch) = yaw_pitch(sub(p, self.eye()));
        let pitch = pitch.clamp(-60.0, 60.0);
        let sweep = wrap180(yaw - self.pose.head.yaw)
            .abs()
            .max((pitch - self.pose.head.pitch).abs());
        if sweep < 1e-6 {
            return;
        }
        self.pose.body_yaw = yaw.rem_euclid(360.0);
        self.pose.head.yaw = self.pose.body_yaw;
        self.pose.head.pitch = pitch;
        self.push_motion(MotionKind::HeadTurn, 0.0, sweep / self.costs.head_deg_per_s);
    }

    /// Head-only turn toward `p`, falling back to a body turn beyond the
    /// neck range.
    fn turn_head(&mut self, p: Vec3) {
        let (yaw, pitch) = yaw_pitch(sub(p, self.eye()));
        if wrap180(yaw - self.pose.body_yaw).abs() > HEAD_YAW_LIMIT - 1.0 {
            self.orient(p);
            return;
        }
        let ws = self.world.scene.workspace();
        match act(&self.pose, Action::ViewingAngleChange { yaw, pitch: pitch.clamp(-60.0, 60.0) }, &ws, &self.costs) {
            Ok(r) => {
                self.pose = r.pose;
                if r.elapsed > 0.0 {
                    self.push_motion(MotionKind::HeadTurn, 0.0, r.elapsed);
                }
            }
            Err(_) => self.orient(p),
        }
    }

    fn walk_to(&mut self, pos: [f64; 2], face: Vec3) {
        let d = norm([pos[0] - self.pose.body_position[0], pos[1] - self.pose.body_position[1], 0.0]);
        if d < 1e-9 {
            self.orient(face);
            return;
        }
        let (yaw, _) = yaw_pitch(sub(face, self.eye_at(pos)));
        let ws = self.world.scene.workspace();
        let r = act(&self.pose, Action::PointOfViewChange { position: pos, body_yaw: yaw }, &ws, &self.costs)
            .expect("viewpoints lie inside the workspace");
        self.pose = r.pose;
        let (_, pitch) = yaw_pitch(sub(face, self.eye()));
        let pitch = pitch.clamp(-60.0, 60.0);
        let settle = pitch.abs() / self.costs.head_deg_per_s;
        self.pose.head.pitch = pitch;
        self.push_motion(MotionKind::Walk, r.path_length, r.elapsed + settle);
    }

    fn pause(&mut self, span: Range<f64>) {
        self.clock += self.rng.random_range(span);
    }

    /// Fixates `point`; returns whether noise made the percept unreliable.
    fn fixate(
        &mut self,
        target: Target,
        point: Vec3,
        element: Option<Element>,
        part: Option<u8>,
        ms: u32,
        annotation: OperationKind,
    ) -> Step<bool> {
        if self.records.len() >= STEP_BUDGET {
            return Err(Budget);
        }
        let (mut az, mut el) = self.pose.gaze_toward(point);
        if !in_field(az, el) {
            self.turn_head(point);
            (az, el) = self.pose.gaze_toward(point);
        }
        self.pose.gaze_azimuth = az;
        self.pose.gaze_elevation = el;
        self.pose.fixation_depth = norm(sub(point, self.eye()));
        let seen = apply_noise(&self.pose, &self.noise, &mut self.noise_rng);
        let err = (seen.gaze_azimuth - az).hypot(seen.gaze_elevation - el);
        let misread =
            self.noise.enabled && self.pose.fixation_depth * err.to_radians().tan() > MISREAD_DISPLACEMENT_M;
        let sector = self.world.object(target).map(|o| sector_of(o.center(), seen.eye()));
        let rec = FixationRecord {
            t_start: self.clock,
            duration_ms: ms,
            head: HeadSample {
                position: seen.head.position,
                yaw: seen.head.yaw,
                pitch: seen.head.pitch,
                roll: seen.head.roll,
            },
            gaze: seen.gaze_point(),
            target,
            element,
            part,
            sector,
            annotation: Some(annotation),
        }
        .quantized();
        self.clock = rec.t_end();
        if let Some(s) = sector {
            self.state.visited_sectors[target_index(target)] |= 1 << s;
        }
        self.records.push(rec);
        Ok(misread)
    }

    // ---- perception helpers ------------------------------------------------

    /// Most frontal visible face of a block from `eye`.
    fn best_face(&self, target: Target, block: usize, eye: Vec3) -> Option<(Vec3, Element)> {
        let obj = self.world.object(target)?;
        let mut best: Option<(f64, Vec3, Element)> = None;
        for v in obj.object.blocks[block].voxels() {
            for f in Face::ALL {
                if !self.world.face_visible(obj, v, f, eye) {
                    continue;
                }
                let c = obj.face_center(v, f);
                let n = sub(c, obj.voxel_center(v));
                let to_eye = sub(eye, c);
                let score = (n[0] * to_eye[0] + n[1] * to_eye[1] + n[2] * to_eye[2]) / (norm(n) * norm(to_eye));
                if best.as_ref().is_none_or(|b| score > b.0) {
                    best = Some((score, c, Element { block, face: f }));
                }
            }
        }
        best.map(|(_, c, e)| (c, e))
    }

    /// Blocks of region `r` with at least one face open to view.
    fn units(&self, target: Target, r: u8) -> Vec<usize> {
        let Some(obj) = self.world.object(target) else {
            return Vec::new();
        };
        self.parts
            .blocks(target, r)
            .iter()
            .copied()
            .filter(|&i| {
                obj.object.blocks[i]
                    .voxels()
                    .any(|v| Face::ALL.iter().any(|&f| f != Face::NegZ && obj.exposed(v, f)))
            })
            .collect()
    }

    fn region_visible(&self, r: u8, eyes: &[Vec3]) -> bool {
        [Target::A, Target::B].into_iter().all(|t| {
            self.units(t, r)
                .into_iter()
                .all(|u| eyes.iter().any(|&e| self.best_face(t, u, e).is_some()))
        })
    }

    fn region_point(&self, target: Target, r: u8) -> Vec3 {
        let obj = self.world.object(target).expect("object target");
        obj.to_world(self.parts.region_center(r))
    }

    /// The k-th visible unit of a region, or the region's location.
    fn region_target(&self, target: Target, r: u8, k: usize) -> (Vec3, Option<Element>) {
        let eye = self.eye();
        let seen: Vec<(Vec3, Element)> = self
            .units(target, r)
            .into_iter()
            .filter_map(|u| self.best_face(target, u, eye))
            .collect();
        if seen.is_empty() {
            (self.region_point(target, r), None)
        } else {
            let (p, e) = seen[k % seen.len()];
            (p, Some(e))
        }
    }

    fn valid_viewpoint(&self, p: [f64; 2]) -> bool {
        let s = &self.world.scene;
        s.workspace().contains(p)
            && [s.post_a.position, s.post_b.position]
                .iter()
                .all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) >= POST_CLEARANCE)
    }

    fn ring(&self, center: [f64; 2], radius: f64) -> Vec<Option<[f64; 2]>> {
        (0..8)
            .map(|k| {
                let a = (22.5 + 45.0 * f64::from(k)).to_radians();
                let p = [center[0] + radius * a.cos(), center[1] + radius * a.sin()];
                self.valid_viewpoint(p).then_some(p)
            })
            .collect()
    }

    fn pair_ring(&self) -> Vec<Option<[f64; 2]>> {
        self.ring(self.world.scene.midpoint(), PAIR_RING_RADIUS)
    }

    fn distance_to(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.pose.body_position[0]).hypot(p[1] - self.pose.body_position[1])
    }

    fn random_pair_viewpoint(&mut self) -> [f64; 2] {
        let ring: Vec<[f64; 2]> = self.pair_ring().into_iter().flatten().collect();
        *ring.choose(&mut self.rng).expect("pair ring has a valid viewpoint")
    }

    /// Makes block `u` visible, walking to the nearest viewpoint from which
    /// it can be seen. None when no viewpoint shows it.
    fn bring_into_view(&mut self, target: Target, u: usize) -> Option<(Vec3, Element)> {
        if let Some(hit) = self.best_face(target, u, self.eye()) {
            return Some(hit);
        }
        let post = match target {
            Target::A => self.world.scene.post_a.position,
            _ => self.world.scene.post_b.position,
        };
        let mut cands: Vec<[f64; 2]> = self.ring(post, OBJECT_RING_RADIUS).into_iter().flatten().collect();
        cands.extend(self.pair_ring().into_iter().flatten());
        let best = cands
            .into_iter()
            .filter(|&p| self.best_face(target, u, self.eye_at(p)).is_some())
            .min_by(|&p, &q| self.distance_to(p).total_cmp(&self.distance_to(q)))?;
        let c = self.world.object(target).expect("object target").center();
        self.walk_to(best, c);
        self.best_face(target, u, self.eye())
    }

    /// Fixates every unit of region `r` on `target`; returns the misread
    /// flag of the last fixation.
    fn sweep_region(&mut self, target: Target, r: u8, ms: u32, ann: OperationKind) -> Step<bool> {
        let mut misread = None;
        for u in self.units(target, r) {
            if let Some((p, e)) = self.bring_into_view(target, u) {
                misread = Some(self.fixate(target, p, Some(e), Some(r), ms, ann)?);
            }
        }
        match misread {
            Some(m) => Ok(m),
            None => {
                let p = self.region_point(target, r);
                self.fixate(target, p, None, Some(r), ms, ann)
            }
        }
    }

    fn perceive_match(&self, r: u8, misread: bool) -> bool {
        let truth = self.parts.matches(self.object(Target::A), self.object(Target::B), r);
        truth != misread
    }

    // ---- strategies ---------------------------------------------------------

    fn global_gist(&mut self, coverage: u32, ann: OperationKind) -> Step<()> {
        let covered = |s: &Self| s.state.visited_sectors.iter().all(|m| m.count_ones() >= coverage);
        let centers = [self.world.a.center(), self.world.b.center()];
        for _ in 0..16 {
            if covered(self) {
                break;
            }
            let fresh = |s: &Self, eye: Vec3| {
                [0, 1].map(|i| s.state.visited_sectors[i] & (1 << sector_of(centers[i], eye)) == 0)
            };
            let mut cands = vec![self.pose.body_position];
            cands.extend(self.pair_ring().into_iter().flatten());
            let Some(vp) = cands
                .into_iter()
                .filter(|&p| fresh(self, self.eye_at(p)).iter().any(|&n| n))
                .min_by(|&p, &q| self.distance_to(p).total_cmp(&self.distance_to(q)))
            else {
                break;
            };
            let focus = self.focus_point();
            self.walk_to(vp, focus);
            let eye = self.eye();
            let new = fresh(self, eye);
            for (i, t) in [Target::A, Target::B].into_iter().enumerate() {
                if !new[i] {
                    continue;
                }
                let (p, e) = self.gist_target(t, eye);
                self.fixate(t, p, e, None, FIXATION_MS, ann)?;
            }
        }
        Ok(())
    }

    /// Visible face closest to the line of sight through the object centre.
    fn gist_target(&self, t: Target, eye: Vec3) -> (Vec3, Option<Element>) {
        let obj = self.world.object(t).expect("object target");
        let c = obj.center();
        let axis = sub(c, eye);
        let mut best: Option<(f64, Vec3, Element)> = None;
        for (v, f) in self.world.visible_faces(obj, eye) {
            let fc = obj.face_center(v, f);
            let d = sub(fc, eye);
            let cosang = (d[0] * axis[0] + d[1] * axis[1] + d[2] * axis[2]) / (norm(d) * norm(axis));
            if best.as_ref().is_none_or(|b| cosang > b.0) {
                let block = obj.object.block_of(v).expect("voxel belongs to a block");
                best = Some((cosang, fc, Element { block, face: f }));
            }
        }
        match best {
            Some((_, p, e)) => (p, Some(e)),
            None => (c, None),
        }
    }

    /// Returns the regions covered and the first perceived mismatch.
    fn divide_and_conquer(&mut self, regions: &[u8], ann: OperationKind) -> Step<(Vec<u8>, Option<u8>)> {
        let mut covered = Vec::new();
        for &r in regions {
            covered.push(r);
            self.sweep_region(Target::A, r, FIXATION_MS, ann)?;
            let misread = self.sweep_region(Target::B, r, FIXATION_MS, ann)?;
            if !self.perceive_match(r, misread) {
                return Ok((covered, Some(r)));
            }
        }
        Ok((covered, None))
    }

    /// Alternating fixations of part `p` from fixed viewpoints; one
    /// viewpoint holds the head still, two make it an alternating view.
    fn alternate(&mut self, p: u8, reps: usize, vps: &[[f64; 2]], ann: OperationKind) -> Step<DeployOutcome> {
        let focus = self.focus_point();
        let mut eyes = Vec::new();
        let mut misread = false;
        let reps = reps.max(vps.len());
        for (i, &vp) in vps.iter().enumerate() {
            self.walk_to(vp, focus);
            eyes.push(self.eye());
            let n = reps / vps.len() + usize::from(i < reps % vps.len());
            for k in 0..n {
                for t in [Target::A, Target::B] {
                    let (pt, e) = self.region_target(t, p, k);
                    misread = self.fixate(t, pt, e, Some(p), FIXATION_MS, ann)?;
                }
            }
        }
        Ok(self.conclude_part(p, &eyes, misread))
    }

    fn coarse_to_fine(&mut self, p: u8, passes: usize, vp: [f64; 2], ann: OperationKind) -> Step<DeployOutcome> {
        let focus = self.focus_point();
        self.walk_to(vp, focus);
        let mut misread = false;
        for pass in 1..=passes {
            let ms = FIXATION_MS + 100 * (pass as u32 - 1);
            for t in [Target::A, Target::B] {
                for k in 0..pass {
                    let (pt, e) = self.region_target(t, p, k);
                    misread = self.fixate(t, pt, e, Some(p), ms, ann)?;
                }
            }
        }
        let eye = self.eye();
        Ok(self.conclude_part(p, &[eye], misread))
    }

    fn conclude_part(&self, p: u8, eyes: &[Vec3], misread: bool) -> DeployOutcome {
        if !self.region_visible(p, eyes) {
            DeployOutcome::Dismissed
        } else if self.perceive_match(p, misread) {
            DeployOutcome::Match
        } else {
            DeployOutcome::Mismatch(p)
        }
    }

    /// A block of `target` in region `r` that has no counterpart.
    fn differing_unit(&self, target: Target, r: u8) -> Option<usize> {
        let (mine, other) = match target {
            Target::A => (self.object(Target::A), (self.object(Target::B), Target::B)),
            _ => (self.object(Target::B), (self.object(Target::A), Target::A)),
        };
        let theirs: BTreeSet<Voxel> = self.parts.voxels(other.0, other.1, r);
        let units = self.units(target, r);
        units
            .iter()
            .copied()
            .find(|&i| mine.blocks[i].voxels().any(|v| !theirs.contains(&v)))
            .or_else(|| units.first().copied())
    }

    fn outlier(&mut self, p: u8, ann: OperationKind) -> Step<DeployOutcome> {
        let mut misread = false;
        for t in [Target::A, Target::B] {
            let hit = self.differing_unit(t, p).and_then(|u| self.bring_into_view(t, u));
            let (pt, e) = match hit {
                Some((pt, e)) => (pt, Some(e)),
                None => (self.region_point(t, p), None),
            };
            misread = self.fixate(t, pt, e, Some(p), SCRUTINY_MS, ann)?;
        }
        Ok(if self.perceive_match(p, misread) {
            DeployOutcome::Refuted(p)
        } else {
            DeployOutcome::Confirmed(p)
        })
    }

    // ---- executive ----------------------------------------------------------

    fn unresolved(&self) -> Vec<u8> {
        self.parts
            .regions()
            .into_iter()
            .filter(|r| !self.state.ledger.contains_key(r))
            .collect()
    }

    fn excluded(&self, part: u8, kind: OperationKind) -> bool {
        self.state.excluded.get(&part).is_some_and(|s| s.contains(&kind))
    }

    /// Stage A: an environment pan interleaved with short target glances.
    fn initialize(&mut self) -> Step<()> {
        let focus = self.focus_point();
        self.orient(focus);
        let lt = |s: &mut Self| s.rng.random_range(150..=280u32);
        let interleaved = self.rng.random_bool(0.5);
        let order: [Option<Target>; 5] = if interleaved {
            [None, Some(Target::A), None, Some(Target::B), None]
        } else {
            [None, None, Some(Target::A), Some(Target::B), None]
        };
        let body = self.pose.body_yaw;
        let mut pan = [-30.0, 0.0, 30.0].into_iter();
        for slot in order {
            match slot {
                None => {
                    let off: f64 = pan.next().expect("three pan steps");
                    let eye = self.eye();
                    let d = direction(body + off, -20.0);
                    let look = [eye[0] + d[0], eye[1] + d[1], eye[2] + d[2]];
                    self.turn_head(look);
                    let d = direction(body + off, -25.0);
                    let p = [eye[0] + 2.5 * d[0], eye[1] + 2.5 * d[1], eye[2] + 2.5 * d[2]];
                    self.fixate(Target::Environment, p, None, None, FIXATION_MS, OperationKind::ThreeDLayout)?;
                }
                Some(t) => {
                    let eye = self.eye();
                    let (p, e) = self.gist_target(t, eye);
                    let ms = lt(self);
                    self.fixate(t, p, e, None, ms, OperationKind::LocateTargets)?;
                }
            }
        }
        Ok(())
    }

    /// Samples a method for part `focus` and walks it into a list of
    /// operations, avoiding kinds dismissed for that part.
    fn plan(&mut self, focus: u8) -> Vec<PlannedOp> {
        let lib = self.library;
        let mut cands: Vec<(&CognitiveProgram, f64)> = if lib.select.is_empty() {
            lib.methods.iter().map(|m| (m, 1.0)).collect()
        } else {
            lib.select
                .iter()
                .filter_map(|(n, w)| lib.method(n).map(|m| (m, *w)))
                .collect()
        };
        while !cands.is_empty() {
            let weights: Vec<f64> = cands.iter().map(|c| c.1).collect();
            let Ok(i) = sample_choice(&weights, &mut self.rng) else {
                break;
            };
            let method = cands[i].0;
            if let Some(ops) = self.walk_method(method, focus) {
                self.state.hypothesis = Some(method.name.clone());
                return ops;
            }
            cands.remove(i);
        }
        self.state.hypothesis = None;
        vec![PlannedOp::of(OperationKind::DivideAndConquer)]
    }

    fn walk_method(&mut self, method: &CognitiveProgram, focus: u8) -> Option<Vec<PlannedOp>> {
        let bindings: BTreeMap<String, String> = method
            .unbound()
            .into_iter()
            .map(|(_, name)| (name, focus.to_string()))
            .collect();
        let script = instantiate(method, &bindings).ok()?;
        let mut ops = Vec::new();
        let mut id = script.entry.clone();
        for _ in 0..64 {
            let node = script.node(&id)?;
            let out: Vec<_> = script.outgoing(&id).collect();
            match &node.kind {
                NodeKind::Op { kind, .. } => {
                    if self.excluded(focus, *kind) {
                        return None;
                    }
                    if kind.is_strategy() && *kind != OperationKind::OutlierDetection {
                        let num = |k: &str, d: usize| node.param(k).and_then(|v| v.parse().ok()).unwrap_or(d);
                        ops.push(PlannedOp {
                            kind: *kind,
                            reps: num("reps", 2).max(2),
                            passes: num("passes", 3).max(3),
                            coverage: num("coverage", 4).clamp(1, 4) as u32,
                        });
                    }
                    if script.exits.contains(&id) || out.is_empty() {
                        return Some(ops);
                    }
                    id = out[0].to.clone();
                }
                NodeKind::Choice => {
                    let weights: Vec<f64> = out
                        .iter()
                        .map(|a| match script.node(&a.to).and_then(|n| n.operation()) {
                            Some(k) if self.excluded(focus, k) => 0.0,
                            _ => a.weight,
                        })
                        .collect();
                    let pick = sample_choice(&weights, &mut self.rng).ok()?;
                    id = out[pick].to.clone();
                }
            }
        }
        None
    }

    fn run_replay(&mut self, replay: &Replay, ann: OperationKind) -> Step<(Vec<u8>, DeployOutcome)> {
        Ok(match replay {
            Replay::Divide(regions) => {
                let (covered, miss) = self.divide_and_conquer(regions, ann)?;
                (covered, miss.map_or(DeployOutcome::Match, DeployOutcome::Mismatch))
            }
            Replay::Alternate { part, reps, vp } => (vec![*part], self.alternate(*part, *reps, &[*vp], ann)?),
            Replay::AlternateView { part, reps, vps } => (vec![*part], self.alternate(*part, *reps, vps, ann)?),
            Replay::Coarse { part, passes, vp } => (vec![*part], self.coarse_to_fine(*part, *passes, *vp, ann)?),
            Replay::Outlier(p) => (vec![*p], self.outlier(*p, ann)?),
            Replay::Gist => (Vec::new(), DeployOutcome::Covered),
        })
    }

    fn adjacent_viewpoints(&mut self) -> [[f64; 2]; 2] {
        let ring = self.pair_ring();
        let mut pairs = Vec::new();
        for i in 0..8 {
            for j in [(i + 1) % 8, (i + 7) % 8] {
                if let (Some(p), Some(q)) = (ring[i], ring[j]) {
                    pairs.push([p, q]);
                }
            }
        }
        *pairs.choose(&mut self.rng).expect("adjacent pair viewpoints exist")
    }

    /// Executes one strategy and records it as a deployment.
    fn deploy(&mut self, op: &PlannedOp, focus: u8) -> Step<DeployOutcome> {
        let kind = op.kind;
        let replay = match kind {
            OperationKind::GlobalGist => {
                if self.state.visited_sectors.iter().all(|m| m.count_ones() >= op.coverage) {
                    return Ok(DeployOutcome::NotApplicable);
                }
                Replay::Gist
            }
            OperationKind::DivideAndConquer => {
                let mut regions = vec![focus];
                regions.extend(self.unresolved().into_iter().filter(|&r| r != focus));
                Replay::Divide(regions)
            }
            OperationKind::AlternatingFixation => Replay::Alternate {
                part: focus,
                reps: op.reps,
                vp: self.random_pair_viewpoint(),
            },
            OperationKind::AlternatingView => Replay::AlternateView {
                part: focus,
                reps: op.reps,
                vps: self.adjacent_viewpoints(),
            },
            OperationKind::CoarseToFine => Replay::Coarse {
                part: focus,
                passes: op.passes,
                vp: self.random_pair_viewpoint(),
            },
            OperationKind::OutlierDetection => Replay::Outlier(focus),
            _ => return Ok(DeployOutcome::NotApplicable),
        };
        self.pause(FORMULATION_PAUSE);
        let start = self.records.len();
        let (parts, outcome) = if replay == Replay::Gist {
            self.global_gist(op.coverage, kind)?;
            (Vec::new(), DeployOutcome::Covered)
        } else {
            self.run_replay(&replay, kind)?
        };
        self.deployments.push(Deployment {
            kind,
            strategy: kind,
            parts: parts.clone(),
            records: start..self.records.len(),
            outcome,
            dead_end: false,
            replay,
        });
        match outcome {
            DeployOutcome::Match => {
                for r in parts {
                    self.state.ledger.insert(r, true);
                    self.state.conquered.insert(r);
                }
            }
            DeployOutcome::Mismatch(r) => {
                for &c in parts.iter().filter(|&&c| c != r) {
                    self.state.ledger.insert(c, true);
                    self.state.conquered.insert(c);
                }
                self.state.ledger.insert(r, false);
                self.state.outlier_candidates.push(r);
            }
            DeployOutcome::Dismissed => {
                self.state.excluded.entry(focus).or_default().insert(kind);
                self.state.focus = Some(focus);
            }
            DeployOutcome::Refuted(r) => {
                self.forget(&[r]);
                self.state.focus = Some(r);
            }
            _ => {}
        }
        Ok(outcome)
    }

    fn forget(&mut self, parts: &[u8]) {
        for r in parts {
            self.state.ledger.remove(r);
            self.state.conquered.remove(r);
        }
        self.state.outlier_candidates.retain(|c| !parts.contains(c));
    }

    /// Stage C: optional (or, below the fixation floor, mandatory) repeats
    /// of the concluding deployment. Returns the answer, or None when a
    /// repeat disagreed and formulation must resume.
    fn confirm(&mut self, candidate: GroundTruth) -> Step<Option<GroundTruth>> {
        self.state.candidate = Some(candidate);
        self.state.confidence = 0.5;
        let last = self.deployments.last().expect("a deployment concluded").clone();
        let mut repeats = 0;
        loop {
            let wanted = self.rng.random_bool(self.library.confirm) && repeats < MAX_CONFIRMATIONS;
            if !wanted && self.target_fixations() >= MIN_TARGET_FIXATIONS {
                return Ok(Some(candidate));
            }
            self.pause(REPEAT_PAUSE);
            let start = self.records.len();
            let (parts, outcome) = self.run_replay(&last.replay, OperationKind::StrategyRepetition)?;
            self.deployments.push(Deployment {
                kind: OperationKind::StrategyRepetition,
                strategy: last.strategy,
                parts,
                records: start..self.records.len(),
                outcome,
                dead_end: false,
                replay: last.replay.clone(),
            });
            if outcome == last.outcome {
                repeats += 1;
                self.state.confidence = (self.state.confidence + 0.25).min(1.0);
                continue;
            }
            self.state.candidate = None;
            self.state.confidence = 0.0;
            self.forget(&last.parts);
            self.state.focus = last.parts.last().copied();
            return Ok(None);
        }
    }

    fn next_focus(&mut self) -> u8 {
        let open = self.unresolved();
        match self.state.focus.take().filter(|f| open.contains(f)) {
            Some(f) => f,
            None => match open.choose(&mut self.rng) {
                Some(&f) => f,
                None => *self.parts.regions().first().expect("objects are nonempty"),
            },
        }
    }

    /// Deploys the planned operations until one concludes something about
    /// the focus part. Returns the final answer if the trial is decided, and
    /// whether anything was deployed.
    fn follow(&mut self, plan: &[PlannedOp], focus: u8) -> Step<(Option<GroundTruth>, bool)> {
        let mut progressed = false;
        for op in plan {
            match self.deploy(op, focus)? {
                DeployOutcome::NotApplicable => {}
                DeployOutcome::Covered => progressed = true,
                DeployOutcome::Match => {
                    let answer = if self.unresolved().is_empty() {
                        self.confirm(GroundTruth::Same)?
                    } else {
                        None
                    };
                    return Ok((answer, true));
                }
                DeployOutcome::Mismatch(r) => {
                    let answer = match self.deploy(&PlannedOp::of(OperationKind::OutlierDetection), r)? {
                        DeployOutcome::Confirmed(_) => self.confirm(GroundTruth::Different)?,
                        _ => None,
                    };
                    return Ok((answer, true));
                }
                _ => return Ok((None, true)),
            }
        }
        Ok((None, progressed))
    }

    fn execute(&mut self) -> Step<GroundTruth> {
        self.initialize()?;
        loop {
            let focus = self.next_focus();
            let plan = self.plan(focus);
            let (answer, progressed) = self.follow(&plan, focus)?;
            if let Some(a) = answer {
                return Ok(a);
            }
            if !progressed {
                // every step was inapplicable: divide instead
                let fallback = [PlannedOp::of(OperationKind::DivideAndConquer)];
                if let (Some(a), _) = self.follow(&fallback, focus)? {
                    return Ok(a);
                }
            }
        }
    }

    fn mark_dead_ends(&mut self) {
        let n = self.deployments.len();
        for i in 0..n {
            let d = &self.deployments[i];
            let abandonable = d.kind.is_comparison()
                || matches!(d.kind, OperationKind::OutlierDetection | OperationKind::StrategyRepetition);
            if !abandonable {
                continue;
            }
            let dead = self.deployments[i + 1..]
                .iter()
                .any(|l| l.kind.is_comparison() && l.parts.iter().any(|p| d.parts.contains(p)));
            self.deployments[i].dead_end = dead;
        }
    }

    fn finish(mut self, config: &TrialConfig, seed: u64) -> TrialOutcome {
        let result = self.execute();
        let forced = result.is_err();
        let answer = result.unwrap_or_else(|Budget| {
            self.state.candidate.unwrap_or(if self.state.outlier_candidates.is_empty() {
                GroundTruth::Same
            } else {
                GroundTruth::Different
            })
        });
        self.mark_dead_ends();
        let correct = answer == config.ground_truth;
        let trace = Trace {
            meta: TraceMeta {
                config: config.clone(),
                engine_version: ENGINE_VERSION.to_string(),
                seed,
                forced,
            },
            records: self.records,
            motions: self.motions,
            answer: Some(AnswerRecord { answer, correct }),
        };
        TrialOutcome {
            answer,
            correct,
            trace,
            reformulations: self.deployments.iter().filter(|d| d.dead_end).count(),
            deployments: self.deployments,
            forced,
            state: self.state,
        }
    }
}

/// Deploys a single strategy on `part` with default parameters. Returns the
/// outcome; the run's records and state reflect the actions taken.
pub fn deploy_strategy(run: &mut TrialRun<'_>, kind: OperationKind, part: u8) -> Result<DeployOutcome, EngineError> {
    run.deploy(&PlannedOp::of(kind), part).map_err(|Budget| EngineError::Budget)
}

/// Runs one complete trial through the three executive stages.
pub fn run_trial(
    config: &TrialConfig,
    objects: &ObjectLibrary,
    library: &StrategyLibrary,
    noise: NoiseModel,
    seed: u64,
) -> Result<TrialOutcome, EngineError> {
    let get = |id: &str| objects.get(id).ok_or_else(|| EngineError::UnknownObject(id.to_string()));
    let (a, b) = (get(&config.object_a)?, get(&config.object_b)?);
    let run = TrialRun::new(config, a, b, library, noise, seed)?;
    Ok(run.finish(config, seed))
}

impl TrialRun<'_> {
    /// Runs stage A only, for inspecting strategies in isolation.
    pub fn start(&mut self) -> Result<(), EngineError> {
        self.initialize().map_err(|Budget| EngineError::Budget)
    }
}
