//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Run with `cargo test -p sketchcoach-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sketchcoach_core::classifier::{encode, save_model, train, ClassifierModel, Label, TrainConfig};
use sketchcoach_core::data::{ingest, split_dataset, synth, ClassMap};
use sketchcoach_core::optimize::{
    both_candidate, optimize, permute_candidate, reverse_candidate, DescentConfig, LossWeights, Objective,
    OptimizationConfig, Proposal, Strategy,
};
use sketchcoach_core::pipeline::{evaluate_accuracy, evaluate_noisy_accuracy, optimize_batch, MethodSequence};
use sketchcoach_core::sketch::{
    add_noise, cut_paste_strokes, effort_loss, length_diff_loss, point_diff_loss, visible_length, InsertAt, Point, Sketch,
};

const SEED: u64 = 7;
const PER_CLASS: usize = 2256;
const TRAIN_PER_CLASS: usize = 2000;
const DESK_PER_CLASS: usize = 100;
const D: f64 = 0.2;
const ITERATIONS: usize = 500;
const FD_STEP: f64 = 1e-3;
const FD_TOLERANCE: f64 = 1e-4;

type Samples = Vec<(Sketch, Label)>;

/// Verdicts, printed in criterion order once every check has run.
struct Outcome {
    results: Vec<(usize, bool, String)>,
}

impl Outcome {
    fn report(&mut self, id: usize, name: &str, pass: bool, detail: String, started: Instant) {
        let line = format!(
            "{} {id:>2} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
        self.results.push((id, pass, line));
    }
}

/// One batch of proposals and which distortion measures bound it.
struct Run {
    name: String,
    proposals: Vec<Proposal>,
    length_budget: bool,
    point_budget: bool,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn mean_effort(proposals: &[Proposal]) -> f64 {
    mean(proposals.iter().map(|p| effort_loss(&p.optimized)))
}

fn proposal_accuracy(model: &ClassifierModel, proposals: &[Proposal]) -> f64 {
    let s: Samples = proposals.iter().map(|p| (p.optimized.clone(), p.label)).collect();
    evaluate_accuracy(model, &s).unwrap()
}

fn run_method(
    name: &str,
    model: &ClassifierModel,
    desk: &Samples,
    seq: MethodSequence,
    objective: Objective,
    dcfg: &DescentConfig,
) -> Run {
    let cfg = OptimizationConfig {
        objective,
        max_distortion: D,
        iterations: ITERATIONS,
        seed: SEED,
        ..Default::default()
    };
    let continuous = seq.stages().iter().any(|s| matches!(s.method, sketchcoach_core::optimize::Method::Continuous(_)));
    let discrete = seq.stages().iter().any(|s| matches!(s.method, sketchcoach_core::optimize::Method::Discrete(_)));
    Run {
        name: name.into(),
        proposals: optimize_batch(desk, model, &seq, &cfg, dcfg).unwrap(),
        length_budget: discrete,
        point_budget: continuous,
    }
}

fn desk_set() -> (ClassifierModel, Samples, Option<f64>, f64) {
    let drawings = synth::generate(PER_CLASS, SEED);
    let classes = ClassMap::from_drawings(&drawings);
    let samples: Samples = drawings.iter().filter_map(|d| ingest(d, &classes).ok()).collect();
    let split = split_dataset(&samples, classes.names(), TRAIN_PER_CLASS as f64 / PER_CLASS as f64, SEED).unwrap();
    let cfg = TrainConfig {
        seed: SEED,
        ..Default::default()
    };
    let model = train(&split.train, classes.names(), &cfg).unwrap();
    let test_accuracy = evaluate_accuracy(&model, &split.test).unwrap();
    let mut taken = vec![0; classes.len()];
    let desk = split
        .test
        .iter()
        .filter(|(_, y)| {
            taken[*y] += 1;
            taken[*y] <= DESK_PER_CLASS
        })
        .cloned()
        .collect();
    let heldout = model.meta().heldout_accuracy;
    (model, desk, heldout, test_accuracy)
}

fn gradients(model: &ClassifierModel, desk: &Samples, out: &mut Outcome) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut classifier = common::FdReport::default();
    let mut total = common::FdReport::default();
    let k = model.num_classes();
    for i in 0..20 {
        let (s, y) = &desk[(i * 37) % desk.len()];
        classifier.merge(common::fd_classifier(model, &encode(&s.truncated(104)), *y, FD_STEP));

        let x = common::spread_sketch(&mut rng);
        let z = Sketch::from_points(
            x.points()
                .iter()
                .map(|p| {
                    let (a, r) = (rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(60.0..80.0));
                    Point::new(p.x + r * a.cos(), p.y + r * a.sin(), p.flag)
                })
                .collect(),
        )
        .unwrap();
        let w = [
            LossWeights::default(),
            LossWeights { beta_c: 1.0, beta_p: 0.5, beta_e: 0.25 },
        ][i % 2];
        total.merge(common::fd_total(model, &z, &x, rng.gen_range(0..k), &w, FD_STEP));
    }
    let pass = classifier.max_rel <= FD_TOLERANCE
        && total.max_rel <= FD_TOLERANCE
        && classifier.checked > 0
        && total.checked > 0
        && started.elapsed().as_secs() < 60;
    out.report(
        1,
        "gradient correctness",
        pass,
        format!(
            "20 pairs, h={FD_STEP}; classifier max rel err {:.2e} ({} coords, {} kink-skipped), total loss {:.2e} ({} coords, {} skipped), tolerance {FD_TOLERANCE:e}",
            classifier.max_rel, classifier.checked, classifier.skipped, total.max_rel, total.checked, total.skipped
        ),
        started,
    );
}

/// Safety and budget violation counts over every proposal of `runs`.
#[derive(Default)]
struct Violations {
    correct_inputs: usize,
    unsafe_outputs: usize,
    proposals: usize,
    over_budget: usize,
}

fn violations(model: &ClassifierModel, desk: &Samples, runs: &[&Run]) -> Violations {
    let mut v = Violations::default();
    for run in runs {
        for (p, (x, y)) in run.proposals.iter().zip(desk) {
            assert!(p.original.points() == x.points() && p.label == *y, "proposal order");
            if model.predict(x) == *y {
                v.correct_inputs += 1;
                v.unsafe_outputs += usize::from(model.predict(&p.optimized) != *y);
            }
            v.proposals += 1;
            let limit = D * visible_length(x);
            let within = (!run.length_budget || length_diff_loss(x, &p.optimized) < limit)
                && (!run.point_budget || point_diff_loss(x, &p.optimized).unwrap_or(p.metrics.point_diff) < limit);
            v.over_budget += usize::from(!(within || p.optimized == *x));
        }
    }
    v
}

fn geometry(out: &mut Outcome) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let strokes = rng.gen_range(1..7);
        let s = common::random_sketch(&mut rng, strokes, 8, 0.0, 255.0);
        let v = visible_length(&s);
        for z in [reverse_candidate(&s, &mut rng), permute_candidate(&s, &mut rng), both_candidate(&s, &mut rng)] {
            worst = worst.max((visible_length(&z) - v).abs() / v);
        }
    }
    let sq = Sketch::from_points(vec![
        Point::pen_up(0.0, 0.0),
        Point::drawn(0.0, 10.0),
        Point::drawn(10.0, 10.0),
        Point::pen_up(10.0, 0.0),
        Point::drawn(0.0, 0.0),
    ])
    .unwrap();
    let moved = cut_paste_strokes(&sq, 1..2, InsertAt::Front).unwrap();
    let (before, after) = (effort_loss(&sq), effort_loss(&moved));
    out.report(
        6,
        "rearrangement geometry",
        worst <= 1e-9 && before == 40.0 && after == 30.0,
        format!("3000 candidates, worst relative visible-length change {worst:.1e}; square L_E {before} -> {after}"),
        started,
    );
}

fn brute_force(model: &ClassifierModel, out: &mut Outcome) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let k = model.num_classes();
    let mut infeasible = 0;
    let mut worse = 0;
    let mut gaps = Vec::new();
    let mut optimal = 0;
    for i in 0..100 {
        let x = common::small_sketch(&mut rng, 8);
        let y = if i % 2 == 0 { model.predict(&x) } else { rng.gen_range(0..k) };
        let feasible = |z: &Sketch| {
            (length_diff_loss(&x, z) < D * visible_length(&x) || z == &x)
                && (model.predict(&x) != y || model.predict(z) == y)
        };
        let best = common::removal_closure(&x)
            .iter()
            .filter(|z| feasible(z))
            .map(effort_loss)
            .fold(f64::INFINITY, f64::min);
        let cfg = OptimizationConfig {
            objective: Objective::Time,
            max_distortion: D,
            iterations: ITERATIONS,
            seed: SEED + i,
            ..Default::default()
        };
        let p = optimize(&x, y, model, &cfg, Strategy::RemovalRA).unwrap();
        let z = &p.optimized;
        infeasible += usize::from(!feasible(z));
        worse += usize::from(effort_loss(z) > effort_loss(&x));
        let gap = effort_loss(z) - best;
        optimal += usize::from(gap <= 1e-9);
        gaps.push(gap);
    }
    let mean_gap = mean(gaps.iter().copied());
    out.report(
        7,
        "brute-force removal oracle",
        infeasible == 0 && worse == 0 && gaps.iter().all(|g| *g >= -1e-9),
        format!(
            "100 sketches <=8 segments, RA/effort: {infeasible} infeasible, {worse} worse than original; mean L_E gap to optimum {mean_gap:.2}, optimum reached {optimal}/100"
        ),
        started,
    );
}

fn noise(model: &ClassifierModel, desk: &Samples, out: &mut Outcome) {
    let started = Instant::now();
    let exact = evaluate_accuracy(model, desk).unwrap();
    let zero = evaluate_noisy_accuracy(model, desk, 0.0, 10, SEED).unwrap();
    let noisy = evaluate_noisy_accuracy(model, desk, 10.0, 10, SEED).unwrap();
    let mut widest: f64 = 0.0;
    for (i, (s, _)) in desk.iter().enumerate() {
        let copies: Vec<Sketch> = (0..10).map(|j| add_noise(s, 10.0, (i * 10 + j) as u64)).collect();
        for a in &copies {
            for b in &copies {
                for (p, q) in a.points().iter().zip(b.points()) {
                    widest = widest.max(p.distance(q));
                }
            }
        }
    }
    let bound = 20.0 * 2f64.sqrt();
    out.report(
        8,
        "noise protocol",
        zero.accuracy == exact && noisy.evaluations == 10 * desk.len() && zero.evaluations == 10 * desk.len() && widest <= bound,
        format!(
            "r=0 {:.4} vs exact {exact:.4}; {} evaluations for {} samples; widest pairwise displacement {widest:.2} <= {bound:.2}; noisy accuracy {:.4}",
            zero.accuracy,
            noisy.evaluations,
            desk.len(),
            noisy.accuracy
        ),
        started,
    );
}

fn cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_sketchcoach"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .stdout(Stdio::null())
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn determinism(model: &ClassifierModel, desk: &Samples, out: &mut Outcome) {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    save_model(model, p.join("model.skcm")).unwrap();
    let lines: String = desk.iter().step_by(10).map(|(s, _)| s.to_json() + "\n").collect();
    std::fs::write(p.join("desk.jsonl"), lines).unwrap();

    let commands: Vec<Vec<String>> = ["a", "b"]
        .iter()
        .map(|r| {
            let args = format!(
                "synth --per-class 30 --seed 3 --out {r}.ndjson|\
                 train --data {r}.ndjson --model-out {r}.skcm --test-out {r}-test.jsonl --manifest-out {r}-split.txt --epochs 2|\
                 optimize --model model.skcm --input desk.jsonl --out {r}-both.jsonl --method both --objective effort --seed 4|\
                 optimize --model model.skcm --input desk.jsonl --out {r}-seq.jsonl --sequence B:100,C:50,B:100 --steps 50 --seed 4|\
                 optimize --model model.skcm --input desk.jsonl --out {r}-ra.jsonl --method removal-ra --seed 4|\
                 evaluate --model model.skcm --proposals {r}-both.jsonl --proposals {r}-seq.jsonl --proposals {r}-ra.jsonl --report-out {r}-report.json --table-out {r}-table.txt --seed 4|\
                 keep --model model.skcm --input desk.jsonl --keep 0.6 --order random --seed 4 --out {r}-keep.jsonl|\
                 render --input {r}-both.jsonl --out-dir {r}-svg --compare"
            );
            args.split('|').map(String::from).collect()
        })
        .collect();
    let mut ok = true;
    for cmds in &commands {
        for c in cmds {
            let argv: Vec<&str> = c.split_whitespace().collect();
            ok &= cli(p, &argv);
        }
    }
    let outputs = [
        ".ndjson", ".skcm", "-test.jsonl", "-split.txt", "-both.jsonl", "-seq.jsonl", "-ra.jsonl", "-report.json",
        "-table.txt", "-keep.jsonl", "-svg/00000.svg", "-svg/00049.svg",
    ];
    let mut differing = Vec::new();
    for suffix in outputs {
        let a = std::fs::read(p.join(format!("a{suffix}")));
        let b = std::fs::read(p.join(format!("b{suffix}")));
        match (a, b) {
            (Ok(a), Ok(b)) if a == b && !a.is_empty() => {}
            _ => differing.push(suffix),
        }
    }
    out.report(
        9,
        "CLI determinism",
        ok && differing.is_empty(),
        format!(
            "{} commands run twice, {} output files compared, differing: {}",
            commands[0].len(),
            outputs.len(),
            if differing.is_empty() { "none".to_string() } else { differing.join(" ") }
        ),
        started,
    );
}

fn main() {
    let mut out = Outcome { results: Vec::new() };
    let t0 = Instant::now();
    let (model, desk, heldout, test_accuracy) = desk_set();
    println!(
        "desk set: {} classes, {} samples; held-out accuracy {:.4}, test accuracy {test_accuracy:.4} (trained in {:.1}s)",
        model.num_classes(),
        desk.len(),
        heldout.unwrap_or(f64::NAN),
        t0.elapsed().as_secs_f64()
    );

    gradients(&model, &desk, &mut out);

    let dcfg = DescentConfig::default();
    let t = Instant::now();
    let cl = run_method("CL", &model, &desk, "CL".parse().unwrap(), Objective::Accuracy, &dcfg);
    let original_acc = evaluate_accuracy(&model, &desk).unwrap();
    let cl_acc = proposal_accuracy(&model, &cl.proposals);
    out.report(
        4,
        "accuracy gain",
        heldout.is_some_and(|h| h >= 0.80) && desk.len() >= 500 && cl_acc - original_acc >= 0.02,
        format!(
            "held-out {:.4} (>=0.80); RemovalCL accuracy objective, {} samples, {ITERATIONS} iterations: {original_acc:.4} -> {cl_acc:.4} ({:+.1} pp, need >= +2)",
            heldout.unwrap_or(f64::NAN),
            desk.len(),
            (cl_acc - original_acc) * 100.0
        ),
        t,
    );

    let t = Instant::now();
    let original_effort = mean(desk.iter().map(|(s, _)| effort_loss(s)));
    let ro = run_method("RO", &model, &desk, "RO".parse().unwrap(), Objective::Time, &dcfg);
    let ce = run_method("CE", &model, &desk, "CE".parse().unwrap(), Objective::Time, &dcfg);
    let reduction = |r: &Run| 1.0 - mean_effort(&r.proposals) / original_effort;
    let (ro_red, ce_red) = (reduction(&ro), reduction(&ce));
    out.report(
        5,
        "effort reduction",
        ro_red >= 0.05 || ce_red >= 0.05,
        format!(
            "mean L_E {original_effort:.1}; RO {:.1} ({:.1}%), CE {:.1} ({:.1}%), need >= 5%",
            mean_effort(&ro.proposals),
            ro_red * 100.0,
            mean_effort(&ce.proposals),
            ce_red * 100.0
        ),
        t,
    );

    geometry(&mut out);
    brute_force(&model, &mut out);
    noise(&model, &desk, &mut out);
    determinism(&model, &desk, &mut out);

    let t = Instant::now();
    let d_run = run_method("D", &model, &desk, "D".parse().unwrap(), Objective::Time, &dcfg);
    let db = run_method("D-B", &model, &desk, "D-B".parse().unwrap(), Objective::Time, &dcfg);
    let continuous = run_method("C", &model, &desk, "C".parse().unwrap(), Objective::Accuracy, &dcfg);
    let (d_eff, db_eff) = (mean_effort(&d_run.proposals), mean_effort(&db.proposals));
    let db_check = violations(&model, &desk, &[&db]);
    let db_safe = db_check.unsafe_outputs == 0 && db_check.over_budget == 0;
    out.report(
        10,
        "sequence composition",
        db_eff <= d_eff && db_safe,
        format!(
            "mean L_E: original {original_effort:.1}, D {d_eff:.1}, D-B {db_eff:.1}; D-B {} unsafe, {} over budget",
            db_check.unsafe_outputs, db_check.over_budget
        ),
        t,
    );

    let runs = [&cl, &ro, &ce, &d_run, &db, &continuous];
    let all = violations(&model, &desk, &runs);
    let names: Vec<&str> = runs.iter().map(|r| r.name.as_str()).collect();
    out.report(
        2,
        "safety invariant",
        all.unsafe_outputs == 0,
        format!(
            "{} violations over {} correctly classified inputs across {}",
            all.unsafe_outputs,
            all.correct_inputs,
            names.join(", ")
        ),
        t,
    );
    out.report(
        3,
        "budget invariant",
        all.over_budget == 0,
        format!("{} violations over {} proposals at d={D}", all.over_budget, all.proposals),
        t,
    );

    out.results.sort_by_key(|(id, _, _)| *id);
    for (_, _, line) in &out.results {
        println!("{line}");
    }
    let failed: Vec<String> = out.results.iter().filter(|(_, p, _)| !p).map(|(id, _, _)| id.to_string()).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s{}",
        out.results.len() - failed.len(),
        out.results.len(),
        t0.elapsed().as_secs_f64(),
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
