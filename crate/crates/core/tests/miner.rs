use pesao_sim::engine::library::{parse_library, write_library};
use pesao_sim::engine::{run_trial, OperationKind, StrategyLibrary};
use pesao_sim::miner::*;
use pesao_sim::objectgen::ObjectLibrary;
use pesao_sim::percept::{NoiseModel, Target};
use pesao_sim::scenario::{sample_session, GroundTruth};
use pesao_sim::tracefmt::*;

use OperationKind::*;

struct Builder {
    trace: Trace,
    clock: f64,
}

impl Builder {
    fn new() -> Self {
        let objs = ObjectLibrary::generate(1);
        let config = sample_session(&objs, 0).remove(0);
        Builder {
            trace: Trace {
                meta: TraceMeta {
                    config,
                    engine_version: "test".into(),
                    seed: 0,
                    forced: false,
                },
                records: Vec::new(),
                motions: Vec::new(),
                answer: None,
            },
            clock: 0.0,
        }
    }

    fn fix(mut self, ms: u32, target: Target, part: Option<u8>, sector: Option<u8>, head: [f64; 4]) -> Self {
        self.trace.records.push(FixationRecord {
            t_start: self.clock,
            duration_ms: ms,
            head: HeadSample {
                position: [head[0], head[1], head[2]],
                yaw: head[3],
                pitch: 0.0,
                roll: 0.0,
            },
            gaze: [3.0, 0.0, 1.0],
            target,
            element: None,
            part,
            sector,
            annotation: None,
        });
        self.clock += f64::from(ms) / 1000.0 + 0.02;
        self
    }

    fn still(self, ms: u32, target: Target, part: u8) -> Self {
        self.fix(ms, target, Some(part), Some(0), [0.0, 0.0, 1.6, 0.0])
    }

    fn pause(mut self, s: f64) -> Self {
        self.clock += s;
        self
    }

    fn init(self) -> Self {
        self.fix(300, Target::Environment, None, None, [0.0, 0.0, 1.6, -30.0])
            .fix(300, Target::Environment, None, None, [0.0, 0.0, 1.6, 30.0])
            .fix(200, Target::A, None, Some(0), [0.0, 0.0, 1.6, 0.0])
            .fix(200, Target::B, None, Some(0), [0.0, 0.0, 1.6, 0.0])
    }

    fn answer(mut self) -> Trace {
        self.trace.answer = Some(AnswerRecord {
            answer: GroundTruth::Same,
            correct: true,
        });
        self.trace
    }
}

fn kinds(ivs: &[OperationInterval]) -> Vec<OperationKind> {
    ivs.iter().map(|i| i.kind).collect()
}

#[test]
fn initialization_needs_short_glances_at_both_objects() {
    let t = Builder::new().init().pause(0.5).still(300, Target::A, 1).answer();
    assert_eq!(kinds(&detect_initialization(&t)), vec![ThreeDLayout, LocateTargets]);
    let lt = &detect_initialization(&t)[1];
    assert_eq!(lt.evidence, vec![2, 3]);
    assert!(lt.t0 < lt.t1);

    let slow = Builder::new()
        .fix(300, Target::Environment, None, None, [0.0, 0.0, 1.6, -30.0])
        .fix(300, Target::Environment, None, None, [0.0, 0.0, 1.6, 30.0])
        .fix(400, Target::A, None, Some(0), [0.0; 4])
        .fix(400, Target::B, None, Some(0), [0.0; 4])
        .answer();
    assert_eq!(kinds(&detect_initialization(&slow)), vec![ThreeDLayout]);
}

#[test]
fn strategy_rules() {
    let af = Builder::new()
        .init()
        .pause(0.6)
        .still(300, Target::A, 2)
        .still(300, Target::B, 2)
        .still(300, Target::A, 2)
        .still(300, Target::B, 2)
        .answer();
    assert_eq!(kinds(&detect_strategy_operations(&af)), vec![AlternatingFixation]);

    let mut av = Builder::new().init().pause(0.6);
    for (k, t) in [Target::A, Target::B, Target::A, Target::B].into_iter().enumerate() {
        av = av.fix(300, t, Some(2), Some(0), [0.0, 0.5 * (k / 2) as f64, 1.6, 20.0 * (k / 2) as f64]);
    }
    assert_eq!(kinds(&detect_strategy_operations(&av.answer())), vec![AlternatingView]);

    let mut c2f = Builder::new().init().pause(0.6);
    for (ms, n) in [(300, 1), (400, 2), (500, 3)] {
        for t in [Target::A, Target::B] {
            for _ in 0..n {
                c2f = c2f.still(ms, t, 5);
            }
        }
    }
    assert_eq!(kinds(&detect_strategy_operations(&c2f.answer())), vec![CoarseToFine]);

    let dc = Builder::new()
        .init()
        .pause(0.6)
        .still(300, Target::A, 0)
        .still(300, Target::A, 0)
        .still(300, Target::B, 0)
        .still(300, Target::A, 3)
        .still(300, Target::B, 3)
        .pause(0.8)
        .still(800, Target::A, 3)
        .still(800, Target::B, 3)
        .answer();
    assert_eq!(kinds(&detect_strategy_operations(&dc)), vec![DivideAndConquer, OutlierDetection]);

    let gist = Builder::new()
        .init()
        .pause(0.6)
        .fix(300, Target::A, None, Some(3), [1.0, 1.0, 1.6, 0.0])
        .fix(300, Target::B, None, Some(4), [1.0, 1.0, 1.6, 0.0])
        .pause(0.6)
        .fix(300, Target::A, None, Some(3), [1.0, 1.0, 1.6, 0.0])
        .answer();
    // the second visit to sector 3 of A is not a new sector
    assert_eq!(kinds(&detect_strategy_operations(&gist)), vec![GlobalGist]);
}

#[test]
fn scrutiny_without_counterpart_is_not_outlier_detection() {
    let t = Builder::new()
        .init()
        .pause(0.6)
        .still(800, Target::A, 6)
        .answer();
    assert!(detect_strategy_operations(&t).is_empty());
}

#[test]
fn short_pause_repeat_is_a_repetition() {
    let seg = |b: Builder| {
        b.still(300, Target::A, 1)
            .still(300, Target::B, 1)
            .still(300, Target::A, 1)
            .still(300, Target::B, 1)
    };
    let t = seg(seg(Builder::new().init().pause(0.6)).pause(0.3)).answer();
    let prior = detect_strategy_operations(&t);
    assert_eq!(kinds(&prior), vec![AlternatingFixation, AlternatingFixation]);
    let sr = detect_confirmation(&t, &prior);
    assert_eq!(kinds(&sr), vec![StrategyRepetition]);
    assert_eq!(sr[0].evidence, prior[1].evidence);
    assert_eq!(
        kinds(&detect_all(&t)),
        vec![ThreeDLayout, LocateTargets, AlternatingFixation, StrategyRepetition]
    );

    let slow = seg(seg(Builder::new().init().pause(0.6)).pause(0.9)).answer();
    assert!(detect_confirmation(&slow, &detect_strategy_operations(&slow)).is_empty());
}

#[test]
fn elemental_classification() {
    let cfg = MinerConfig::default();
    let mut near = Builder::new().still(300, Target::A, 0).still(300, Target::A, 0).answer().records;
    near[1].gaze[0] += 0.02;
    assert_eq!(
        classify_elemental(ElementalSegment::Fixations(&near), &cfg),
        Some(TraceConnectedComponents)
    );
    let mut far = near.clone();
    far[1].gaze[0] += 0.3;
    assert_eq!(
        classify_elemental(ElementalSegment::Fixations(&far), &cfg),
        Some(CompareArbitraryComponents)
    );
    assert_eq!(classify_elemental(ElementalSegment::Fixations(&near[..1]), &cfg), None);
    let walk = ElementalSegment::Motion {
        body_displacement_m: 0.8,
    };
    assert_eq!(classify_elemental(walk, &cfg), Some(PointOfViewChange));
    let lean = ElementalSegment::Motion {
        body_displacement_m: 0.1,
    };
    assert_eq!(classify_elemental(lean, &cfg), Some(ViewingAngleChange));
}

#[test]
fn linear_trace_gives_a_path_graph() {
    let t = Builder::new()
        .init()
        .pause(0.6)
        .still(300, Target::A, 0)
        .still(300, Target::B, 0)
        .answer();
    let g = build_trial_graph(&t, &detect_all(&t)).unwrap();
    assert_eq!(g.labels(), vec![ThreeDLayout, LocateTargets, DivideAndConquer, Answer]);
    assert_eq!(g.dead_ends(), 0);
    assert_eq!(g.arcs, vec![(0, 1, ArcKind::Succession), (1, 2, ArcKind::Succession), (2, 3, ArcKind::Succession)]);
    g.to_program("t").validate().unwrap();

    let mut open = t.clone();
    open.answer = None;
    assert_eq!(build_trial_graph(&open, &[]), Err(MinerError::NoAnswer));
}

#[test]
fn identical_graphs_mine_to_their_path() {
    let path = vec![ThreeDLayout, LocateTargets, GlobalGist, DivideAndConquer, Answer];
    let seqs = vec![path.clone(); 100];
    let mined = mine_sequences(&seqs, 0.5);
    assert_eq!(mined.len(), 1);
    assert_eq!(mined[0].nodes, path);
    assert_eq!(mined[0].support, 100);
    assert!(mined[0].arcs.iter().all(|a| a.2 == 1.0));
    assert!(mine_sequences(&seqs[..1], 0.5).is_empty());
}

#[test]
fn branch_frequencies_match_counts() {
    let left = vec![ThreeDLayout, LocateTargets, GlobalGist, DivideAndConquer, Answer];
    let right = vec![ThreeDLayout, LocateTargets, GlobalGist, CoarseToFine, Answer];
    let mut seqs = vec![left.clone(); 60];
    seqs.extend(vec![right.clone(); 40]);
    let mined = mine_sequences(&seqs, 0.3);
    let root = mined.iter().find(|g| g.nodes[0] == ThreeDLayout).unwrap();
    assert_eq!(root.frequency(&left[..4]), Some(0.6));
    assert_eq!(root.frequency(&right[..4]), Some(0.4));
    for i in 0..root.nodes.len() {
        let out: Vec<f64> = root.successors(i).map(|a| a.2).collect();
        if !out.is_empty() {
            assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
    let mut shuffled = seqs.clone();
    shuffled.reverse();
    shuffled.rotate_left(37);
    assert_eq!(mine_sequences(&shuffled, 0.3), mined);

    let lib = export_library(&mined, "mined");
    let text = write_library(&lib);
    assert_eq!(parse_library(&text).unwrap(), lib);
}

#[test]
fn iou_matching() {
    assert_eq!(temporal_iou((0.0, 2.0), (1.0, 3.0)), 1.0 / 3.0);
    assert_eq!(temporal_iou((0.0, 1.0), (2.0, 3.0)), 0.0);
    let truth = vec![(GlobalGist, 0.0, 1.0), (GlobalGist, 5.0, 6.0)];
    let det = vec![OperationInterval {
        t0: 0.1,
        t1: 1.0,
        kind: GlobalGist,
        evidence: vec![],
        rule: "x",
        confidence: 1.0,
    }];
    let m = match_intervals(&truth, &det, 0.5);
    assert_eq!(m[&GlobalGist], F1Counts { tp: 1, fp: 0, fn_: 1 });
    assert!((m[&GlobalGist].f1() - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn engine_traces_recover_annotations_and_dead_ends() {
    let objs = ObjectLibrary::generate(2);
    let lib = StrategyLibrary::default();
    let mut graphs = Vec::new();
    for s in 0..3 {
        for cfg in sample_session(&objs, s) {
            let o = run_trial(&cfg, &objs, &lib, NoiseModel::disabled(), cfg.seed).unwrap();
            let det = detect_all(&o.trace);
            for (k, c) in match_intervals(&o.annotated_intervals(), &det, 0.5) {
                assert_eq!(c.f1(), 1.0, "{k}: {c:?}");
            }
            // a round trip through the text format changes nothing
            let reread = parse_trace(&trace_to_string(&o.trace)).unwrap();
            assert_eq!(detect_all(&reread), det);
            let g = build_trial_graph(&o.trace, &det).unwrap();
            assert_eq!(g.dead_ends(), o.reformulations);
            graphs.push(g);
        }
    }
    let mined = mine_method_graphs(&graphs, 0.1);
    assert!(mined.iter().any(|g| g.contains_path(&[GlobalGist, DivideAndConquer])));
    assert!(mined.iter().any(|g| g.nodes[0] == ThreeDLayout));
}
