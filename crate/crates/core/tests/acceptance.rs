//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines are visible under `cargo test`. Set `ACCEPTANCE_STRICT=1` to
//! turn any FAIL into a nonzero exit.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use pesao_sim::engine::library::parse_library;
use pesao_sim::engine::{run_trial, OperationKind, StrategyLibrary};
use pesao_sim::harness::{learning_effect, run_experiment, ExperimentPlan, Metric};
use pesao_sim::miner::{build_trial_graph, detect_all, match_intervals, mine_method_graphs, F1Counts};
use pesao_sim::objectgen::{
    count_configurations, generate_object, is_same, mutate_different, rotate_yaw, ComplexityClass, ObjectLibrary,
    Voxel,
};
use pesao_sim::percept::{Face, NoiseModel, Target};
use pesao_sim::scenario::{
    sample_session, state_space_size, GroundTruth, StateQuantization, TrialConfig, TRIALS_PER_SESSION,
};
use pesao_sim::tracefmt::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    let took = t.elapsed();
    let in_time = took <= limit;
    let pass = o.pass && in_time;
    println!(
        "{} {id:>2} {name}: {} [{:.2}s, limit {}s{}]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        took.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { ", too slow" }
    );
    pass
}

fn sessions(objs: &ObjectLibrary, n: u64, salt: u64) -> Vec<TrialConfig> {
    (0..n).flat_map(|s| sample_session(objs, s * 7919 + salt)).collect()
}

fn configuration_count() -> Outcome {
    let n = count_configurations(&ObjectLibrary::generate(1));
    Outcome {
        pass: n == 378,
        detail: format!("{n} configurations, expected 378"),
    }
}

fn state_space() -> Outcome {
    let q = StateQuantization::PESAO;
    let parts = [q.fixation_angles(), q.head_poses(), q.positions(), q.body_orientations()];
    let expected_parts = [4500u64, 1296, 91, 72];
    let total = state_space_size(&q);
    let expected_total: u64 = expected_parts.iter().product();
    Outcome {
        pass: parts == expected_parts && total == expected_total && total == 38_211_264_000,
        detail: format!("components {parts:?}, total {total}"),
    }
}

/// Brute force: every yaw, each normalized to its minimum corner.
fn congruent_brute(a: &BTreeSet<Voxel>, b: &BTreeSet<Voxel>) -> bool {
    let norm = |s: &BTreeSet<Voxel>| -> BTreeSet<(i32, i32, i32)> {
        let mx = s.iter().map(|v| v.x).min().unwrap_or(0);
        let my = s.iter().map(|v| v.y).min().unwrap_or(0);
        let mz = s.iter().map(|v| v.z).min().unwrap_or(0);
        s.iter().map(|v| (v.x - mx, v.y - my, v.z - mz)).collect()
    };
    let target = norm(b);
    let mut cur: BTreeSet<Voxel> = a.clone();
    for _ in 0..4 {
        if norm(&cur) == target {
            return true;
        }
        cur = cur.iter().map(|v| Voxel::new(-v.y, v.x, v.z)).collect();
    }
    false
}

fn congruence() -> Outcome {
    let mut agree = 0;
    let mut total = 0;
    let mut same = 0;
    for class in ComplexityClass::ALL {
        for i in 0..200u64 {
            let a = generate_object(class, 10_000 + i);
            let b = match i % 4 {
                0 => rotate_yaw(&a, (i / 4 % 4) as u8),
                1 => mutate_different(&a, i).expect("mutation exists"),
                2 => generate_object(class, 20_000 + i),
                _ => rotate_yaw(&mutate_different(&a, i + 1).expect("mutation exists"), 1),
            };
            let truth = congruent_brute(a.voxels(), b.voxels());
            same += usize::from(truth);
            agree += usize::from(is_same(&a, &b) == truth);
            total += 1;
        }
    }
    Outcome {
        pass: agree == total && same > 0 && same < total,
        detail: format!("{agree}/{total} pairs agree ({same} congruent)"),
    }
}

fn grid_run(noise: NoiseModel, salt: u64) -> (Vec<(TrialConfig, usize, bool)>, usize) {
    let objs = ObjectLibrary::generate(1);
    let lib = StrategyLibrary::default();
    let cfgs = sessions(&objs, 56, salt);
    let out: Vec<(TrialConfig, usize, bool)> = cfgs
        .into_iter()
        .map(|c| {
            let o = run_trial(&c, &objs, &lib, noise, c.seed ^ salt).expect("trial runs");
            let f = trace_metrics(&o.trace).expect("complete trace").fixations;
            (c, f, o.correct)
        })
        .collect();
    let cells: BTreeSet<(ComplexityClass, String, u16, GroundTruth)> = out
        .iter()
        .map(|(c, _, _)| (c.complexity, c.start.to_string(), c.orientation_diff, c.ground_truth))
        .collect();
    (out, cells.len())
}

fn fixation_floor() -> Outcome {
    let (runs, cells) = grid_run(NoiseModel::pesao(), 11);
    let min = runs.iter().map(|r| r.1).min().unwrap_or(0);
    Outcome {
        pass: runs.len() >= 1000 && min >= 6 && cells == 54,
        detail: format!("{} trials over {cells}/54 grid cells, minimum {min} target fixations", runs.len()),
    }
}

fn exactness() -> Outcome {
    let (runs, cells) = grid_run(NoiseModel::disabled(), 12);
    let correct = runs.iter().filter(|r| r.2).count();
    Outcome {
        pass: runs.len() >= 1000 && correct == runs.len() && cells == 54,
        detail: format!("{correct}/{} noise-free answers correct over {cells}/54 cells", runs.len()),
    }
}

fn trends() -> Outcome {
    let objs = ObjectLibrary::generate(1);
    let lib = StrategyLibrary::default();
    let mut cells: BTreeMap<(ComplexityClass, GroundTruth), Vec<f64>> = BTreeMap::new();
    let mut s = 0;
    while cells.len() < 6 || cells.values().any(|v| v.len() < 300) {
        for c in sample_session(&objs, 50_000 + s) {
            let o = run_trial(&c, &objs, &lib, NoiseModel::pesao(), c.seed).expect("trial runs");
            let f = trace_metrics(&o.trace).expect("complete").fixations as f64;
            cells.entry((c.complexity, c.ground_truth)).or_default().push(f);
        }
        s += 1;
    }
    let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let m: BTreeMap<_, f64> = cells.iter().map(|(k, v)| (*k, mean(v))).collect();
    let same_more = ComplexityClass::ALL
        .iter()
        .all(|&c| m[&(c, GroundTruth::Same)] > m[&(c, GroundTruth::Different)]);
    let class_mean = |c: ComplexityClass| {
        let v: Vec<f64> = [GroundTruth::Same, GroundTruth::Different]
            .iter()
            .flat_map(|&g| cells[&(c, g)].clone())
            .collect();
        mean(&v)
    };
    let (easy, hard) = (class_mean(ComplexityClass::Easy), class_mean(ComplexityClass::Hard));
    let detail = m
        .iter()
        .map(|((c, g), v)| format!("{c}/{g} {v:.1} (n={})", cells[&(*c, *g)].len()))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome {
        pass: same_more && hard > easy,
        detail: format!("{detail}; easy {easy:.1} < hard {hard:.1}"),
    }
}

fn miner_round_trip() -> Outcome {
    let objs = ObjectLibrary::generate(1);
    let lib = StrategyLibrary::default();
    let mut counts: BTreeMap<OperationKind, F1Counts> = BTreeMap::new();
    let cfgs: Vec<TrialConfig> = sessions(&objs, 28, 13).into_iter().take(500).collect();
    for c in &cfgs {
        let o = run_trial(c, &objs, &lib, NoiseModel::disabled(), c.seed).expect("trial runs");
        for (k, v) in match_intervals(&o.annotated_intervals(), &detect_all(&o.trace), 0.5) {
            counts.entry(k).or_default().add(v);
        }
    }
    let worst = counts
        .iter()
        .map(|(k, v)| (v.f1(), *k))
        .fold((1.0, OperationKind::Answer), |a, b| if b.0 < a.0 { b } else { a });
    Outcome {
        pass: cfgs.len() == 500 && counts.len() >= 9 && worst.0 >= 0.90,
        detail: format!(
            "{} traces, {} kinds, lowest F1 {:.3} ({})",
            cfgs.len(),
            counts.len(),
            worst.0,
            worst.1
        ),
    }
}

const TWO_METHODS: &str = "\
library two
select divide 0.6
select gist-divide 0.4
confirm 0.5

method divide
node d DivideAndConquer part=?
entry d
exit d
end

method gist-divide
node g GlobalGist coverage=4
node d DivideAndConquer part=?
arc g d 1
entry g
exit d
end
";

fn generate_then_mine() -> Outcome {
    use OperationKind::*;
    let objs = ObjectLibrary::generate(1);
    let lib = parse_library(TWO_METHODS).expect("library parses");
    let cfgs = sessions(&objs, 20, 14);
    let graphs: Vec<_> = cfgs
        .iter()
        .map(|c| {
            let o = run_trial(c, &objs, &lib, NoiseModel::disabled(), c.seed).expect("trial runs");
            build_trial_graph(&o.trace, &detect_all(&o.trace)).expect("answered")
        })
        .collect();
    let n = graphs.len() as f64;
    let mined = mine_method_graphs(&graphs, 0.1);
    let Some(root) = mined.iter().find(|g| g.nodes[0] == ThreeDLayout) else {
        return Outcome {
            pass: false,
            detail: "no graph rooted at initialization".into(),
        };
    };
    let first = |p: &[OperationKind]| root.frequency(p).unwrap_or(f64::NAN);
    let f_divide = first(&[ThreeDLayout, LocateTargets, DivideAndConquer]);
    let f_gist = first(&[ThreeDLayout, LocateTargets, GlobalGist]);
    let both = root.contains_path(&[LocateTargets, DivideAndConquer])
        && root.contains_path(&[LocateTargets, GlobalGist, DivideAndConquer]);
    let sigma = (0.6f64 * 0.4 / n).sqrt();
    let within = (f_divide - 0.6).abs() <= 3.0 * sigma && (f_gist - 0.4).abs() <= 3.0 * sigma;
    Outcome {
        pass: both && within,
        detail: format!(
            "{} trials, divide {f_divide:.3} vs 0.6, gist-divide {f_gist:.3} vs 0.4, 3 sigma = {:.3}, both methods {both}",
            graphs.len(),
            3.0 * sigma
        ),
    }
}

fn determinism() -> Outcome {
    let plan = ExperimentPlan {
        library_seed: 2,
        sessions: 3,
        noise: true,
        master_seed: 4242,
    };
    let lib = StrategyLibrary::default();
    let (a, b) = (tempfile::tempdir().expect("tmp"), tempfile::tempdir().expect("tmp"));
    run_experiment(&plan, &lib, Some(a.path())).expect("run a");
    run_experiment(&plan, &lib, Some(b.path())).expect("run b");
    let files = |d: &std::path::Path| -> BTreeMap<String, Vec<u8>> {
        let mut m = BTreeMap::new();
        for sub in [d.to_path_buf(), d.join("traces")] {
            for e in std::fs::read_dir(&sub).expect("dir").flatten() {
                if e.path().is_file() {
                    let key = e.path().strip_prefix(d).expect("inside").display().to_string();
                    m.insert(key, std::fs::read(e.path()).expect("read"));
                }
            }
        }
        m
    };
    let (fa, fb) = (files(a.path()), files(b.path()));
    let traces = fa.keys().filter(|k| k.ends_with(".trace")).count();
    Outcome {
        pass: fa == fb && traces >= 50 && fa.contains_key("results.csv"),
        detail: format!("{traces} traces and results file byte-identical: {}", fa == fb),
    }
}

fn arb_f(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(quantize)
}

fn arb_trace() -> impl Strategy<Value = Trace> {
    let rec = (
        0.0..2.0f64,
        1u32..3000,
        [arb_f(0.0, 4.3), arb_f(0.0, 3.4), arb_f(1.0, 2.0)],
        [arb_f(-180.0, 180.0), arb_f(-90.0, 90.0), arb_f(-5.0, 5.0)],
        [arb_f(-1.0, 5.0), arb_f(-1.0, 5.0), arb_f(0.0, 3.0)],
        prop::sample::select(vec![Target::A, Target::B, Target::Environment]),
        prop::option::of((0usize..20, prop::sample::select(Face::ALL.to_vec()))),
        prop::option::of(0u8..8),
        0u8..8,
        prop::option::of(prop::sample::select(OperationKind::ALL.to_vec())),
    );
    let mv = (0.0..3.0f64, arb_f(0.0, 3.0), any::<bool>());
    (
        prop::collection::vec(rec, 0..60),
        prop::collection::vec(mv, 0..12),
        prop::option::of((any::<bool>(), any::<bool>())),
        any::<u64>(),
        any::<bool>(),
    )
        .prop_map(|(recs, moves, answer, seed, forced)| {
            let objs = ObjectLibrary::generate(1);
            let mut config = sample_session(&objs, seed % 1000).remove((seed % TRIALS_PER_SESSION as u64) as usize);
            config.seed = seed;
            let mut t = Trace {
                meta: TraceMeta {
                    config,
                    engine_version: "acceptance".into(),
                    seed,
                    forced,
                },
                records: Vec::new(),
                motions: Vec::new(),
                answer: answer.map(|(s, c)| AnswerRecord {
                    answer: if s { GroundTruth::Same } else { GroundTruth::Different },
                    correct: c,
                }),
            };
            let mut clock = 0.0;
            for (dt, dur, pos, ang, gaze, target, el, part, sector, ann) in recs {
                clock += dt;
                t.records.push(FixationRecord {
                    t_start: quantize(clock),
                    duration_ms: dur,
                    head: HeadSample {
                        position: pos,
                        yaw: ang[0],
                        pitch: ang[1],
                        roll: ang[2],
                    },
                    gaze,
                    target,
                    element: el.map(|(block, face)| Element { block, face }),
                    part,
                    sector: target.is_object().then_some(sector),
                    annotation: ann,
                });
            }
            let mut clock = 0.0;
            for (dt, len, walk) in moves {
                clock += dt;
                t.motions.push(MotionRecord {
                    t_start: quantize(clock),
                    kind: if walk { MotionKind::Walk } else { MotionKind::HeadTurn },
                    length: len,
                });
            }
            t
        })
}

fn format_round_trip() -> Outcome {
    let cases = 1000;
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    let res = runner.run(&arb_trace(), |t| {
        let text = trace_to_string(&t);
        let back = parse_trace(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(trace_to_string(&back), text);
        Ok(())
    });
    Outcome {
        pass: res.is_ok(),
        detail: match res {
            Ok(()) => format!("{cases} generated traces read back equal"),
            Err(e) => format!("counterexample: {e}"),
        },
    }
}

fn no_learning() -> Outcome {
    let corpora = 100u64;
    let metrics = [Metric::Accuracy, Metric::Fixations, Metric::HeadMovement];
    // one family per corpus: 3 classes x 3 metrics
    let alpha = 0.05 / 9.0;
    let lib = StrategyLibrary::default();
    let mut quiet = 0;
    for k in 0..corpora {
        let plan = ExperimentPlan {
            library_seed: 1,
            sessions: 20,
            noise: true,
            master_seed: 90_000 + k,
        };
        let rows = run_experiment(&plan, &lib, None).expect("corpus runs").rows;
        let min_p = metrics
            .iter()
            .flat_map(|&m| learning_effect(&rows, m, k).expect("six per class"))
            .map(|t| t.p_value)
            .fold(1.0, f64::min);
        quiet += usize::from(min_p >= alpha);
    }
    let frac = quiet as f64 / corpora as f64;
    Outcome {
        pass: frac >= 0.95,
        detail: format!("{quiet}/{corpora} corpora without a significant trend (family alpha 0.05, Bonferroni over 9 tests)"),
    }
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        check(1, "configuration count", s(1), configuration_count),
        check(2, "state-space arithmetic", s(1), state_space),
        check(3, "congruence oracle", s(10), congruence),
        check(4, "fixation floor", s(300), fixation_floor),
        check(5, "engine exactness", s(300), exactness),
        check(6, "directional trends", s(900), trends),
        check(7, "miner round trip", s(120), miner_round_trip),
        check(8, "generate then mine", s(120), generate_then_mine),
        check(9, "determinism", s(120), determinism),
        check(10, "format round trip", s(60), format_round_trip),
        check(11, "no learning effect", s(300), no_learning),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() && std::env::var_os("ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
