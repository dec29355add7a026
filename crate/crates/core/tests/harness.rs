use pesao_sim::engine::StrategyLibrary;
use pesao_sim::harness::*;
use pesao_sim::objectgen::ComplexityClass;
use pesao_sim::scenario::{GroundTruth, StartPosition};

fn row(session: usize, trial: usize, c: ComplexityClass, fixations: usize, correct: bool) -> ResultsRow {
    ResultsRow {
        session,
        trial,
        complexity: c,
        start: StartPosition::Long,
        orientation: 0,
        ground_truth: GroundTruth::Same,
        answer: if correct { GroundTruth::Same } else { GroundTruth::Different },
        correct,
        fixations,
        head_movement_m: 1.5,
        response_time_s: 10.0,
    }
}

fn plan(sessions: usize, noise: bool, seed: u64) -> ExperimentPlan {
    ExperimentPlan {
        library_seed: 1,
        sessions,
        noise,
        master_seed: seed,
    }
}

#[test]
fn plan_file_round_trip_and_errors() {
    let p = ExperimentPlan::parse("# pilot\nlibrary_seed = 4\nsessions=3\nnoise = off\nmaster_seed = 9\n").unwrap();
    assert_eq!(p, ExperimentPlan { library_seed: 4, sessions: 3, noise: false, master_seed: 9 });
    assert_eq!(ExperimentPlan::parse(&p.to_text()).unwrap(), p);
    assert!(ExperimentPlan::parse("colour = red").is_err());
    assert!(ExperimentPlan::parse("trials_per_session = 20").is_err());
    assert!(ExperimentPlan::parse("sessions = 0").is_err());
}

#[test]
fn one_session_gives_eighteen_rows_six_per_class() {
    let run = run_experiment(&plan(1, true, 3), &StrategyLibrary::default(), None).unwrap();
    assert!(run.failures.is_empty());
    assert_eq!(run.rows.len(), 18);
    for c in ComplexityClass::ALL {
        assert_eq!(run.rows.iter().filter(|r| r.complexity == c).count(), 6);
    }
    for r in &run.rows {
        assert_eq!(r.correct, r.answer == r.ground_truth);
    }
}

#[test]
fn noise_off_is_always_correct() {
    let run = run_experiment(&plan(3, false, 8), &StrategyLibrary::default(), None).unwrap();
    assert!(run.rows.iter().all(|r| r.correct));
    let acc = summarize(&run.rows, &[Dimension::Complexity], Metric::Accuracy).unwrap();
    assert!(acc.cells.iter().all(|c| c.mean == 1.0));
}

#[test]
fn repeated_runs_write_identical_files() {
    let lib = StrategyLibrary::default();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_experiment(&plan(2, true, 21), &lib, Some(a.path())).unwrap();
    run_experiment(&plan(2, true, 21), &lib, Some(b.path())).unwrap();
    let read = |d: &std::path::Path| std::fs::read(d.join("results.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let name = trace_file_name(1, 17);
    assert_eq!(
        std::fs::read(a.path().join("traces").join(&name)).unwrap(),
        std::fs::read(b.path().join("traces").join(&name)).unwrap()
    );
    let rows = read_results(&a.path().join("results.csv")).unwrap();
    assert_eq!(rows.len(), 36);
    assert_eq!(write_results(&rows), String::from_utf8(read(a.path())).unwrap());
}

#[test]
fn group_means_match_hand_computation() {
    let rows = vec![
        row(0, 0, ComplexityClass::Easy, 10, true),
        row(0, 1, ComplexityClass::Easy, 20, false),
        row(0, 2, ComplexityClass::Hard, 30, true),
        row(0, 3, ComplexityClass::Hard, 50, true),
    ];
    let fix = summarize(&rows, &[Dimension::Complexity], Metric::Fixations).unwrap();
    let easy = &fix.cells[0];
    assert_eq!((easy.key[0].as_str(), easy.n, easy.mean), ("easy", 2, 15.0));
    assert_eq!((fix.cells[1].key[0].as_str(), fix.cells[1].mean), ("hard", 40.0));
    assert_eq!((fix.cells[1].min, fix.cells[1].max), (30.0, 50.0));
    let acc = summarize(&rows, &[Dimension::Complexity], Metric::Accuracy).unwrap();
    assert_eq!(acc.cells[0].mean, 0.5);
    assert_eq!(acc.cells[1].mean, 1.0);
    let by_index = summarize(&rows, &[Dimension::TrialIndex], Metric::Fixations).unwrap();
    assert_eq!(by_index.cells[0].mean, 20.0);
    assert_eq!(by_index.cells[1].mean, 35.0);

    let mut shuffled = rows.clone();
    shuffled.swap(0, 3);
    shuffled.swap(1, 2);
    assert_eq!(summarize(&shuffled, &[Dimension::TrialIndex], Metric::Fixations).unwrap(), by_index);

    assert!(matches!("colour".parse::<Dimension>(), Err(HarnessError::UnknownDimension(_))));
    assert!(matches!(summarize(&[], &[], Metric::Accuracy), Err(HarnessError::Empty)));
}

#[test]
fn plots_carry_counts_and_reference() {
    let rows: Vec<ResultsRow> = (0..5).map(|i| row(0, i, ComplexityClass::Medium, 10 + i, true)).collect();
    let t = summarize(&rows, &[Dimension::Complexity], Metric::Fixations).unwrap();
    let svg = box_plot_svg(&t, "fixations", Some(HUMAN_REFERENCE.fixations));
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("n=5"));
    assert!(svg.contains("92.38"));
}

#[test]
fn reference_constants_are_display_only() {
    let rows: Vec<ResultsRow> = (0..6)
        .flat_map(|i| ComplexityClass::ALL.map(|c| row(0, i * 3 + c.index(), c, 7, true)))
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let files = write_report(&rows, dir.path(), 1).unwrap();
    assert!(files.len() >= 2 * PANELS.len());
    let refs = std::fs::read_to_string(dir.path().join("reference.csv")).unwrap();
    assert!(refs.contains("fixations,7.000000,92.38"));
    let table = std::fs::read_to_string(dir.path().join("fixations_by_complexity.csv")).unwrap();
    assert!(table.contains("easy,6,7.000000"));
}

#[test]
fn learning_effect_on_flat_and_falling_series() {
    let mk = |f: &dyn Fn(usize) -> usize| -> Vec<ResultsRow> {
        (0..6)
            .flat_map(|i| ComplexityClass::ALL.map(|c| row(0, i * 3 + c.index(), c, f(i), true)))
            .collect()
    };
    for t in learning_effect(&mk(&|_| 12), Metric::Fixations, 0).unwrap() {
        assert_eq!((t.slope, t.spearman), (0.0, 0.0));
        assert_eq!(t.p_value, 1.0);
        assert_eq!(t.n, 6);
    }
    for t in learning_effect(&mk(&|i| 100 - 10 * i), Metric::Fixations, 0).unwrap() {
        assert!((t.slope + 10.0).abs() < 1e-12);
        assert!((t.spearman + 1.0).abs() < 1e-12);
        // 2 of the 720 orderings are as extreme
        assert!(t.p_value < 0.02, "{}", t.p_value);
    }
    let single: Vec<ResultsRow> = ComplexityClass::ALL.map(|c| row(0, c.index(), c, 5, true)).to_vec();
    assert!(matches!(
        learning_effect(&single, Metric::Fixations, 0),
        Err(HarnessError::TooFewTrials(_))
    ));
}

#[test]
fn rank_statistics_match_hand_values() {
    // ranks of y = [1, 2.5, 2.5, 4]; Pearson against [1, 2, 3, 4]
    let rho = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 5.0, 5.0, 9.0]);
    let expect = 4.5 / (5.0f64 * 4.5).sqrt();
    assert!((rho - expect).abs() < 1e-12);
    assert!((ols_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-12);
}
