use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use sketchcoach_core::classifier::{load_model, save_model, train_with_progress, ClassifierModel, Label, TrainConfig};
use sketchcoach_core::data::{ingest, parse_drawing_file, split_dataset, synth, ClassMap};
use sketchcoach_core::optimize::{
    budget_removal, derive_seed, DescentConfig, Method, OptimizationConfig, Proposal, RemovalOrder, Strategy,
};
use sketchcoach_core::pipeline::{
    evaluate_accuracy, optimize_batch, MethodSequence, MetricsReport, ReportConfig,
};
use sketchcoach_core::render::{render_comparison, render_instructions};
use sketchcoach_core::sketch::Sketch;

use crate::args::*;

/// Refuses to write over a file the command reads.
fn guard_output(out: &Path, inputs: &[&Path]) -> Result<()> {
    let Ok(out_abs) = fs::canonicalize(out) else {
        return Ok(());
    };
    for input in inputs {
        if fs::canonicalize(input).ok().as_deref() == Some(out_abs.as_path()) {
            bail!("output {} would overwrite an input file", out.display());
        }
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot read {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create directory {}", dir.display()))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot write {}", path.display()))
}

fn model(path: &Path) -> Result<ClassifierModel> {
    load_model(path).with_context(|| format!("cannot load model {}", path.display()))
}

fn non_empty_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line = line.with_context(|| format!("cannot read {}", path.display()))?;
        if !line.trim().is_empty() {
            out.push((n + 1, line));
        }
    }
    Ok(out)
}

/// Labelled sketches: canonical sketches whose `class` is a model class.
fn read_samples(path: &Path, model: &ClassifierModel, limit: Option<usize>) -> Result<Vec<(Sketch, Label)>> {
    let mut samples = Vec::new();
    for (line, text) in non_empty_lines(path)? {
        if limit.is_some_and(|l| samples.len() >= l) {
            break;
        }
        let s = Sketch::from_json(&text).with_context(|| format!("{}:{line}: invalid sketch", path.display()))?;
        let class = s
            .class()
            .ok_or_else(|| anyhow!("{}:{line}: sketch has no class", path.display()))?;
        let y = model
            .class_index(class)
            .ok_or_else(|| anyhow!("{}:{line}: class {class:?} is not known to the model", path.display()))?;
        samples.push((s, y));
    }
    if samples.is_empty() {
        bail!("{} contains no sketches", path.display());
    }
    Ok(samples)
}

fn read_proposals(path: &Path) -> Result<Vec<Proposal>> {
    let mut out = Vec::new();
    for (line, text) in non_empty_lines(path)? {
        out.push(Proposal::from_json(&text).with_context(|| format!("{}:{line}: invalid proposal", path.display()))?);
    }
    if out.is_empty() {
        bail!("{} contains no proposals", path.display());
    }
    Ok(out)
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let drawings = synth::generate(args.per_class, args.seed);
    let mut w = create(&args.out)?;
    for (i, d) in drawings.iter().enumerate() {
        writeln!(w, "{}", d.to_ndjson(i as u64))?;
    }
    w.flush()?;
    log::info!("wrote {} drawings to {}", drawings.len(), args.out.display());
    Ok(())
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let inputs: Vec<&Path> = args.data.iter().map(PathBuf::as_path).collect();
    for out in [Some(&args.model_out), args.test_out.as_ref(), args.manifest_out.as_ref()].into_iter().flatten() {
        guard_output(out, &inputs)?;
    }
    let mut drawings = Vec::new();
    for path in &args.data {
        let parsed = parse_drawing_file(open(path)?).with_context(|| format!("cannot read {}", path.display()))?;
        for e in &parsed.errors {
            log::warn!("{}:{}: skipped: {}", path.display(), e.line, e.reason);
        }
        drawings.extend(parsed.drawings);
    }
    let classes = ClassMap::from_drawings(&drawings);
    if classes.len() < 2 {
        bail!("training needs at least two classes, found {}", classes.len());
    }
    let mut samples = Vec::with_capacity(drawings.len());
    for (i, d) in drawings.iter().enumerate() {
        match ingest(d, &classes) {
            Ok(s) => samples.push(s),
            Err(e) => log::warn!("drawing {i} skipped: {e}"),
        }
    }
    let split = split_dataset(&samples, classes.names(), args.train_fraction, args.seed)?;
    log::info!(
        "{} classes, {} training and {} test sketches",
        classes.len(),
        split.train.len(),
        split.test.len()
    );
    let cfg = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        learning_rate: args.learning_rate,
        lr_decay: args.lr_decay,
        seed: args.seed,
        holdout_fraction: args.holdout_fraction,
    };
    let model = train_with_progress(&split.train, classes.names(), &cfg, |e| {
        log::info!(
            "epoch {:>3}: loss {:.4}, training accuracy {:.4}",
            e.epoch + 1,
            e.mean_loss,
            e.train_accuracy
        )
    })?;
    if let Some(acc) = model.meta().heldout_accuracy {
        println!("held-out accuracy: {acc:.4}");
    }
    if !split.test.is_empty() {
        println!("test accuracy: {:.4}", evaluate_accuracy(&model, &split.test)?);
    }
    save_model(&model, &args.model_out).with_context(|| format!("cannot write {}", args.model_out.display()))?;
    if let Some(path) = &args.test_out {
        let mut w = create(path)?;
        for (s, _) in &split.test {
            writeln!(w, "{}", s.to_json())?;
        }
        w.flush()?;
    }
    if let Some(path) = &args.manifest_out {
        fs::write(path, split.manifest()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

pub fn sequence_of(args: &OptimizeArgs) -> Result<MethodSequence> {
    Ok(match (&args.method, &args.sequence) {
        (_, Some(seq)) => MethodSequence::parse(seq, args.beta)?,
        (Some(m), None) if m == "continuous" => MethodSequence::single(Method::Continuous(args.beta)),
        (Some(m), None) => MethodSequence::single(Method::Discrete(m.parse::<Strategy>()?)),
        (None, None) => MethodSequence::single(Method::Discrete(Strategy::RemovalCE)),
    })
}

pub fn optimize(args: &OptimizeArgs) -> Result<()> {
    guard_output(&args.out, &[&args.input, &args.model])?;
    let seq = sequence_of(args)?;
    log::info!("method: {}", seq.name());
    let model = model(&args.model)?;
    let samples = read_samples(&args.input, &model, args.limit)?;
    let cfg = OptimizationConfig {
        objective: args.objective,
        max_distortion: args.d,
        iterations: args.iterations,
        seed: args.seed,
        ..Default::default()
    };
    let dcfg = DescentConfig {
        step_size: args.step_size,
        steps: args.steps,
    };
    let proposals = optimize_batch(&samples, &model, &seq, &cfg, &dcfg)?;
    let mut w = create(&args.out)?;
    for p in &proposals {
        writeln!(w, "{}", p.to_json())?;
    }
    w.flush()?;
    let changed = proposals.iter().filter(|p| !p.is_unchanged()).count();
    log::info!("{} proposals written, {changed} changed", proposals.len());
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    if args.proposals.is_empty() && args.originals.is_none() {
        bail!("nothing to evaluate: pass --proposals and/or --originals");
    }
    let mut inputs: Vec<&Path> = args.proposals.iter().map(PathBuf::as_path).collect();
    inputs.push(&args.model);
    inputs.extend(args.originals.as_deref());
    for out in [args.report_out.as_ref(), args.table_out.as_ref()].into_iter().flatten() {
        guard_output(out, &inputs)?;
    }
    let model = model(&args.model)?;
    let cfg = ReportConfig {
        noise_radius: args.r,
        noise_replicas: args.replicas,
        seed: args.seed,
    };
    let sets = args
        .proposals
        .iter()
        .map(|p| read_proposals(p))
        .collect::<Result<Vec<_>>>()?;
    let originals = match &args.originals {
        Some(path) => read_samples(path, &model, None)?,
        None => sets[0].iter().map(|p| (p.original.clone(), p.label)).collect(),
    };
    let mut report = MetricsReport::original(&model, &originals, &cfg)?;
    for (set, path) in sets.iter().zip(&args.proposals) {
        if set.len() != originals.len()
            || set.iter().zip(&originals).any(|(p, (x, y))| p.label != *y || p.original.points() != x.points())
        {
            bail!("{} does not match the originals", path.display());
        }
        report.push_proposals(&model, set)?;
    }
    let table = report.to_table();
    print!("{table}");
    if let Some(path) = &args.report_out {
        fs::write(path, report.to_json() + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.table_out {
        fs::write(path, &table).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

pub fn keep(args: &KeepArgs) -> Result<()> {
    if let Some(out) = &args.out {
        guard_output(out, &[&args.input, &args.model])?;
    }
    let model = model(&args.model)?;
    let samples = read_samples(&args.input, &model, args.limit)?;
    let reduced = samples
        .iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let order = match args.order {
                KeepOrder::Cl => RemovalOrder::Cl,
                KeepOrder::Ce => RemovalOrder::Ce,
                KeepOrder::Random => RemovalOrder::Random(derive_seed(args.seed, i as u64)),
            };
            budget_removal(x, args.keep, &model, *y, order).map(|s| (s, *y))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let before = evaluate_accuracy(&model, &samples)?;
    let after = evaluate_accuracy(&model, &reduced)?;
    println!("accuracy original {before:.4}, kept {:.0}%: {after:.4}, change {:+.4}", args.keep * 100.0, after - before);
    if let Some(path) = &args.out {
        let mut w = create(path)?;
        for (s, _) in &reduced {
            writeln!(w, "{}", s.to_json())?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn render(args: &RenderArgs) -> Result<()> {
    fs::create_dir_all(&args.out_dir).with_context(|| format!("cannot create directory {}", args.out_dir.display()))?;
    let mut count = 0;
    for (line, text) in non_empty_lines(&args.input)? {
        if args.limit.is_some_and(|l| count >= l) {
            break;
        }
        let svg = match Proposal::from_json(&text) {
            Ok(p) if args.compare => render_comparison(&p.original, &p),
            Ok(p) => render_instructions(&p.optimized),
            Err(_) => {
                if args.compare {
                    bail!("{}:{line}: --compare needs proposals", args.input.display());
                }
                let s = Sketch::from_json(&text)
                    .with_context(|| format!("{}:{line}: neither a proposal nor a sketch", args.input.display()))?;
                render_instructions(&s)
            }
        };
        let path = args.out_dir.join(format!("{count:05}.svg"));
        fs::write(&path, svg).with_context(|| format!("cannot write {}", path.display()))?;
        count += 1;
    }
    log::info!("rendered {count} files into {}", args.out_dir.display());
    Ok(())
}

pub fn serve(args: &ServeArgs) -> Result<()> {
    let cfg = sketchcoach_service::ServerConfig {
        model_path: args.model.clone(),
        addr: args.addr,
        static_dir: args.static_dir.clone(),
        iteration_cap: args.iteration_cap,
    };
    let rt = tokio::runtime::Runtime::new().context("cannot start the async runtime")?;
    rt.block_on(sketchcoach_service::serve(cfg))?;
    Ok(())
}
