use rand::Rng;

use crate::classifier::{encode, Assessment, ClassifierModel, ClassifierError, InputTensor, Label};
use crate::sketch::{InsertAt, Rewrite, Segment, Sketch};

use super::config::Strategy;
use super::search::{Search, Tracked};

type Ranked = Vec<(Tracked, Option<Assessment>)>;

/// Single-segment removals of `t` in the order the strategy tries them.
///
/// CL and CE are sorted by classifier loss (ties keep the lower segment
/// index); RO walks segments from last to first, SO from first to last.
fn removal_ranking(
    strategy: Strategy,
    t: &Tracked,
    model: &ClassifierModel,
    label: Label,
) -> Result<Ranked, ClassifierError> {
    let segments = t.sketch.segments();
    let remove = |seg: Segment| {
        let rw = Rewrite::remove_segment(&t.sketch, seg).expect("segment of this sketch");
        t.rewrite(&rw)
    };
    match strategy {
        Strategy::RemovalCL | Strategy::RemovalCE => {
            let candidates: Vec<Tracked> = segments
                .into_iter()
                .filter(|&seg| strategy == Strategy::RemovalCL || t.sketch.is_terminal_segment(seg))
                .map(remove)
                .collect();
            let tensors: Vec<InputTensor> = candidates.iter().map(|c| encode(&c.sketch)).collect();
            let scores = model.assess_batch(&tensors, label)?;
            let mut ranked: Ranked = candidates.into_iter().zip(scores.into_iter().map(Some)).collect();
            // stable: equal losses stay in segment order
            ranked.sort_by(|a, b| a.1.unwrap().loss.total_cmp(&b.1.unwrap().loss));
            Ok(ranked)
        }
        Strategy::RemovalRO => Ok(segments.into_iter().rev().map(|s| (remove(s), None)).collect()),
        Strategy::RemovalSO => Ok(segments.into_iter().map(|s| (remove(s), None)).collect()),
        other => unreachable!("{other:?} has no fixed removal order"),
    }
}

fn random_removal<R: Rng>(t: &Tracked, rng: &mut R) -> Option<Tracked> {
    let segments = t.sketch.segments();
    if segments.is_empty() {
        return None;
    }
    let seg = segments[rng.gen_range(0..segments.len())];
    Some(t.rewrite(&Rewrite::remove_segment(&t.sketch, seg).expect("segment of this sketch")))
}

fn random_reverse<R: Rng>(t: &Tracked, rng: &mut R) -> Option<Tracked> {
    let n = t.sketch.stroke_count();
    if n == 0 {
        return None;
    }
    let k = rng.gen_range(0..n);
    Some(t.rewrite(&Rewrite::reverse_stroke(&t.sketch, k).expect("stroke of this sketch")))
}

/// Cut a random run of consecutive strokes and paste it at a random valid
/// place; with `flip`, each moved stroke is then reversed with probability 1/2.
fn random_permute<R: Rng>(t: &Tracked, flip: bool, rng: &mut R) -> Option<Tracked> {
    let n = t.sketch.stroke_count();
    if n == 0 {
        return None;
    }
    let start = rng.gen_range(0..n);
    let len = rng.gen_range(1..=n - start);
    let range = start..start + len;
    let outside: Vec<usize> = (0..n).filter(|k| !range.contains(k)).collect();
    let pick = rng.gen_range(0..=outside.len());
    let (at, pos) = if pick == 0 {
        (InsertAt::Front, 0)
    } else {
        (InsertAt::After(outside[pick - 1]), pick)
    };
    let mut out = t.rewrite(&Rewrite::cut_paste(&t.sketch, range, at).expect("valid range"));
    if flip {
        for k in pos..pos + len {
            if rng.gen_bool(0.5) {
                out = out.rewrite(&Rewrite::reverse_stroke(&out.sketch, k).expect("stroke exists"));
            }
        }
    }
    Some(out)
}

fn random_candidate<R: Rng>(strategy: Strategy, t: &Tracked, rng: &mut R) -> Option<Tracked> {
    match strategy {
        Strategy::RemovalRA => random_removal(t, rng),
        Strategy::Reverse => random_reverse(t, rng),
        Strategy::Permute => random_permute(t, false, rng),
        Strategy::Both => random_permute(t, true, rng),
        other => unreachable!("{other:?} is not randomized"),
    }
}

/// Runs one discrete stage on `search` for at most `iterations` candidates.
///
/// Ordered removal strategies walk their ranking of the current best: a
/// rejected candidate is skipped in favour of the next one, an accepted one
/// triggers a fresh ranking, and the stage ends when a ranking is used up.
pub(crate) fn run_discrete<R: Rng>(search: &mut Search<'_>, strategy: Strategy, iterations: usize, rng: &mut R) {
    match strategy {
        Strategy::RemovalCL | Strategy::RemovalCE | Strategy::RemovalRO | Strategy::RemovalSO => {
            let mut ranked: Option<std::vec::IntoIter<(Tracked, Option<Assessment>)>> = None;
            for it in 0..iterations {
                let queue = ranked.get_or_insert_with(|| {
                    removal_ranking(strategy, &search.best, search.model, search.label)
                        .expect("label validated")
                        .into_iter()
                });
                let Some((z, known)) = queue.next() else { break };
                if search.consider(z, known, it) {
                    ranked = None;
                }
            }
        }
        Strategy::Permute if search.best.sketch.stroke_count() < 2 => {}
        _ => {
            for it in 0..iterations {
                let Some(z) = random_candidate(strategy, &search.best, rng) else { break };
                search.consider(z, None, it);
            }
        }
    }
}

/// The candidate a removal strategy proposes first for `current`, or `None`
/// when no segment is left.
pub fn removal_candidate<R: Rng>(
    strategy: Strategy,
    current: &Sketch,
    model: &ClassifierModel,
    label: Label,
    rng: &mut R,
) -> Result<Option<Sketch>, ClassifierError> {
    assert!(strategy.is_removal(), "{strategy} is not a removal strategy");
    let t = Tracked::new(current);
    if strategy == Strategy::RemovalRA {
        return Ok(random_removal(&t, rng).map(|z| z.sketch));
    }
    Ok(removal_ranking(strategy, &t, model, label)?
        .into_iter()
        .next()
        .map(|(z, _)| z.sketch))
}

/// Reverses a uniformly chosen stroke.
pub fn reverse_candidate<R: Rng>(current: &Sketch, rng: &mut R) -> Sketch {
    random_reverse(&Tracked::new(current), rng).map_or_else(|| current.clone(), |z| z.sketch)
}

/// Moves a random run of consecutive strokes to a random position.
pub fn permute_candidate<R: Rng>(current: &Sketch, rng: &mut R) -> Sketch {
    random_permute(&Tracked::new(current), false, rng).map_or_else(|| current.clone(), |z| z.sketch)
}

/// As [`permute_candidate`], flipping each moved stroke with probability 1/2.
pub fn both_candidate<R: Rng>(current: &Sketch, rng: &mut R) -> Sketch {
    random_permute(&Tracked::new(current), true, rng).map_or_else(|| current.clone(), |z| z.sketch)
}

/// Order used by [`budget_removal`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RemovalOrder {
    /// Lowest classifier loss first, any segment.
    Cl,
    /// Lowest classifier loss first, stroke-end segments only.
    Ce,
    /// Uniformly random segment, seeded.
    Random(u64),
}

/// Removes segments in the given order, ignoring classification and
/// distortion, until at most `ceil(keep_fraction * segments)` remain.
pub fn budget_removal(
    x: &Sketch,
    keep_fraction: f64,
    model: &ClassifierModel,
    label: Label,
    order: RemovalOrder,
) -> Result<Sketch, ClassifierError> {
    use rand::SeedableRng;
    assert!((0.0..=1.0).contains(&keep_fraction), "keep fraction {keep_fraction} outside [0, 1]");
    let target = (keep_fraction * x.segment_count() as f64).ceil() as usize;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(match order {
        RemovalOrder::Random(seed) => seed,
        _ => 0,
    });
    let mut t = Tracked::new(x);
    while t.sketch.segment_count() > target {
        t = match order {
            RemovalOrder::Cl => removal_ranking(Strategy::RemovalCL, &t, model, label)?.swap_remove(0).0,
            RemovalOrder::Ce => removal_ranking(Strategy::RemovalCE, &t, model, label)?.swap_remove(0).0,
            RemovalOrder::Random(_) => random_removal(&t, &mut rng).expect("segments remain"),
        };
    }
    Ok(t.sketch)
}
