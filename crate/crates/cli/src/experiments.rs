//! One function per CLI subcommand. Each builds a [`Report`] or fails with
//! a [`commlab::Error`] whose variant picks the exit status.

use commlab::analyzer::{det_cc, max_box_ones, min_cover, verify_fooling_set, FunctionMatrix};
use commlab::ann::{AnnIndex, AnnParams};
use commlab::gf2hash::{FieldSpec, KWisePoly, SignHash};
use commlab::protocols::{
    equality_tape_len, gap_probability, run_cis, run_epsgh, run_equality, CisInstance, GapHammingParams, SampleRule, Tape,
};
use commlab::rng::{derive_seed, SplitMix64};
use commlab::scalar::{int, ratio, rational_to_f64};
use commlab::sketches::{mean, F0Sketch, F2Sketch, MisraGries, MorrisCounter, Stream, StreamingSketch};
use commlab::testers::{
    blr_rejection_probability, blr_test, blr_trials, distance_by_matching, distance_to_linear, distance_to_monotone,
    edge_test, monotonize_ranged, range_bits, violation_slices, BoolFn, CubeFn, RangedFn, BLR_CONSTANT,
};
use commlab::{BitVector, Error, Rational, Result};
use rayon::prelude::*;

use crate::report::Report;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Copy, Default)]
pub struct Common {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl Common {
    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Input("--seed is required for randomized runs".into()))
    }

    pub fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn echo(&self, report: &mut Report, default_trials: usize) -> Result<u64> {
        let seed = self.seed()?;
        report.config("seed", seed).config("trials", self.trials(default_trials));
        Ok(seed)
    }
}

/// Runs `trials` independent jobs on derived seeds; results keep trial order.
pub fn par_trials<T: Send>(seed: u64, trials: usize, job: impl Fn(u64) -> T + Sync) -> Vec<T> {
    (0..trials as u64).into_par_iter().map(|i| job(derive_seed(seed, i))).collect()
}

fn stream_or_random(n: u64, stream: &[u64], length: Option<usize>, seed: Option<u64>) -> Result<Stream> {
    match (stream.is_empty(), length) {
        (false, _) => Stream::new(n, stream.to_vec()),
        (true, Some(m)) => {
            let seed = seed.ok_or_else(|| Error::Input("--seed is required for a random stream".into()))?;
            let mut rng = SplitMix64::new(seed);
            Stream::new(n, (0..m).map(|_| 1 + rng.below(n)).collect())
        }
        (true, None) => Err(Error::Input("give --stream or --length".into())),
    }
}

pub struct F2Args<'a> {
    pub n: u64,
    pub stream: &'a [u64],
    pub length: Option<usize>,
    pub exhaustive: bool,
    pub copies: usize,
    pub groups: usize,
    pub eps: f64,
}

pub fn sketch_f2(args: &F2Args, common: &Common) -> Result<Report> {
    let mut report = Report::new("sketch f2");
    report.config("n", args.n);
    let stream = stream_or_random(args.n, args.stream, args.length, common.seed)?;
    let f2 = Rational::from_integer(stream.moment(2));
    report.config("stream_length", stream.len());
    report.rational("F2", &f2, "exact second moment");
    if args.exhaustive {
        let spec = FieldSpec::for_universe(args.n)?;
        if spec.width() > 4 {
            return Err(Error::Resource(format!("exhaustive family over GF(2^{}) is too large", spec.width())));
        }
        let (mut sum, mut sum_sq, mut count) = (int(0), int(0), 0i64);
        for poly in KWisePoly::family(spec, 4) {
            let mut sketch = F2Sketch::with_hashes(args.n, vec![SignHash::new(poly)], 1)?;
            sketch.feed(stream.items())?;
            let x = sketch.basic_estimates().remove(0);
            sum_sq += x.clone() * x.clone();
            sum += x;
            count += 1;
        }
        let ex = sum / int(count);
        let ex2 = sum_sq / int(count);
        let second_ok = ex2 <= int(3) * f2.clone() * f2.clone();
        report
            .config("mode", "exhaustive")
            .push("hashes", count, true, "all cubic polynomials")
            .rational("E[X]", &ex, "mean basic estimate")
            .rational("E[X2]", &ex2, "mean squared basic estimate")
            .push("E[X2]<=3F2^2", second_ok, true, "")
            .rational("Var[X]", &(ex2.clone() - ex.clone() * ex.clone()), "");
        if ex != f2 || !second_ok {
            return Err(Error::Verification(format!("E[X] = {ex} against F2 = {f2}")));
        }
        return Ok(report);
    }
    let seed = common.echo(&mut report, 200)?;
    let trials = common.trials(200);
    report.config("copies", args.copies).config("groups", args.groups).config("eps", args.eps);
    let items = stream.items().to_vec();
    let estimates: Vec<Rational> = par_trials(seed, trials, |s| {
        let mut sketch = F2Sketch::new(args.n, args.copies, args.groups, &mut SplitMix64::new(s))?;
        sketch.feed(&items)?;
        Ok(sketch.estimate())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let f2f = rational_to_f64(&f2);
    let misses = estimates.iter().filter(|e| (rational_to_f64(e) - f2f).abs() > args.eps * f2f).count();
    report
        .rational("mean_estimate", &mean(&estimates), "")
        .rational("miss_rate", &ratio(misses as i64, trials.max(1) as i64), "fraction outside (1 +- eps) F2");
    Ok(report)
}

pub fn sketch_f0(n: u64, stream: &[u64], length: Option<usize>, retain: usize, common: &Common) -> Result<Report> {
    let mut report = Report::new("sketch f0");
    report.config("n", n).config("retain", retain);
    let stream = stream_or_random(n, stream, length, common.seed)?;
    let seed = common.echo(&mut report, 200)?;
    let trials = common.trials(200);
    let items = stream.items().to_vec();
    let estimates: Vec<Rational> = par_trials(seed, trials, |s| {
        let mut sketch = F0Sketch::new(n, retain, &mut SplitMix64::new(s))?;
        sketch.feed(&items)?;
        Ok(sketch.estimate())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut sorted = estimates.clone();
    sorted.sort();
    report
        .push("F0", stream.moment(0), true, "exact distinct count")
        .rational("mean_estimate", &mean(&estimates), "")
        .rational("median_estimate", &sorted[(sorted.len().max(1) - 1) / 2], "");
    Ok(report)
}

pub fn sketch_morris(count: u64, common: &Common) -> Result<Report> {
    let mut report = Report::new("sketch morris");
    report.config("count", count);
    let seed = common.echo(&mut report, 1000)?;
    let estimates: Vec<Rational> = par_trials(seed, common.trials(1000), |s| {
        let mut c = MorrisCounter::new(s);
        (0..count).for_each(|_| c.touch());
        c.estimate()
    });
    report.rational("mean_estimate", &mean(&estimates), "unbiased for the count");
    Ok(report)
}

pub fn sketch_mg(k: usize, n: u64, stream: &[u64], length: Option<usize>, seed: Option<u64>) -> Result<Report> {
    let mut report = Report::new("sketch mg");
    report.config("k", k).config("n", n);
    if let Some(s) = seed {
        report.config("seed", s);
    }
    let stream = stream_or_random(n, stream, length, seed)?;
    let mut mg = MisraGries::new(k)?;
    stream.items().iter().for_each(|&j| mg.update(j));
    let freq = stream.frequencies();
    let heavy: Vec<u64> = {
        let mut h: Vec<u64> = freq.iter().filter(|(_, &c)| c as usize * k > stream.len()).map(|(&j, _)| j).collect();
        h.sort();
        h
    };
    let candidates: Vec<String> = mg.candidates().iter().map(u64::to_string).collect();
    report
        .push("candidates", candidates.join(" "), true, "")
        .push("heavy", heavy.iter().map(u64::to_string).collect::<Vec<_>>().join(" "), true, "count above m/k")
        .push("heavy_covered", heavy.iter().all(|j| mg.candidates().contains(j)), true, "");
    Ok(report)
}

pub fn protocol_eq(x: &BitVector, y: &BitVector, reps: usize, exhaustive: bool, common: &Common) -> Result<Report> {
    let mut report = Report::new("protocol eq");
    report.config("x", x).config("y", y).config("reps", reps);
    report.push("equal", x == y, true, "");
    let len = equality_tape_len(x.len(), reps);
    if exhaustive {
        if len > 20 {
            return Err(Error::Resource(format!("{len}-bit tapes are too many to enumerate")));
        }
        let accepted = (0..1u64 << len)
            .map(|t| run_equality(x, y, &mut Tape::fixed(BitVector::from_u64(t, len)), reps).map(|o| o.output))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|&a| a)
            .count();
        report
            .config("mode", "exhaustive")
            .rational("accept_probability", &ratio(accepted as i64, 1i64 << len), "over all tapes");
    } else {
        let seed = common.echo(&mut report, 1000)?;
        let outs = par_trials(seed, common.trials(1000), |s| run_equality(x, y, &mut Tape::seeded(s), reps))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let acc = outs.iter().filter(|o| o.output).count();
        report.rational("accept_rate", &ratio(acc as i64, outs.len().max(1) as i64), "");
    }
    report.push("bits", 2 * reps, true, "Alice's parities");
    Ok(report)
}

pub fn protocol_cis(n: usize, graph: u64, clique: &BitVector, indep: &BitVector) -> Result<Report> {
    let mut report = Report::new("protocol cis");
    report.config("n", n).config("graph", graph).config("clique", clique).config("indep", indep);
    let inst = CisInstance::new(CisInstance::graph_from_mask(n, graph), clique.clone(), indep.clone())?;
    let out = run_cis(&inst);
    let width = commlab::protocols::name_width(n);
    report
        .push("disjoint", out.output, true, "")
        .push("bits", out.total_bits(), true, "")
        .push("bound", 4 * (width + 1) * (width + 1), true, "4 (ceil(log2 n) + 1)^2")
        .push("transcript", out.transcript.to_json(), true, "");
    Ok(report)
}

pub struct GhArgs<'a> {
    pub x: &'a BitVector,
    pub y: &'a BitVector,
    pub scale: u64,
    pub eps: f64,
    pub delta: f64,
    pub constant: Option<f64>,
}

pub fn protocol_gh(args: &GhArgs, common: &Common) -> Result<Report> {
    let mut report = Report::new("protocol gh");
    report.config("x", args.x).config("y", args.y).config("scale", args.scale).config("eps", args.eps).config("delta", args.delta);
    let mut params = GapHammingParams::new(args.scale, args.eps, args.delta);
    if let Some(c) = args.constant {
        params.rule = SampleRule::Constant(c);
        report.config("sample_constant", c);
    }
    let seed = common.echo(&mut report, 200)?;
    let dist = args.x.hamming(args.y) as u64;
    let outs = par_trials(seed, common.trials(200), |s| run_epsgh(args.x, args.y, &params, &mut Tape::seeded(s)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let near = outs.iter().filter(|o| o.output).count();
    report
        .push("distance", dist, true, "")
        .push("samples", params.samples(), true, "")
        .rational("flip_probability", &gap_probability(args.scale, dist), "per sample")
        .rational("near_rate", &ratio(near as i64, outs.len().max(1) as i64), "fraction answering near")
        .push("bits", outs.first().map_or(0, |o| o.total_bits()), true, "");
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Cover,
    DetCc,
    Fool,
    Box,
}

pub fn analyze(kind: Analysis, m: &FunctionMatrix, value: bool, pairs: &[(usize, usize)]) -> Result<Report> {
    let mut report = Report::new("analyze");
    report.config("dims", format!("{:?}", m.dims()));
    match kind {
        Analysis::Cover => {
            let cover = min_cover(m, value)?;
            report.config("value", value as u8).push("min_cover", cover.size, true, "");
            for (i, r) in cover.rects.iter().enumerate() {
                report.push(&format!("rect_{i}"), format!("{:?}x{:?}", r.rows(), r.cols()), true, "");
            }
        }
        Analysis::DetCc => {
            report.push("det_cc", det_cc(m)?, true, "");
        }
        Analysis::Fool => {
            let ok = verify_fooling_set(m, pairs)?;
            report.push("fooling_set_valid", ok, true, "").push("size", pairs.len(), true, "");
            if !ok {
                return Err(Error::Verification("pairs do not form a fooling set".into()));
            }
        }
        Analysis::Box => {
            let (ones, rect) = max_box_ones(m)?;
            report.push("max_box_ones", ones, true, "").push("box", format!("{:?}", rect), true, "");
        }
    }
    Ok(report)
}

pub fn parse_points(text: &str) -> Result<Vec<BitVector>> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::parse).collect()
}

pub fn ann_build(points: Vec<BitVector>, eps: f64, delta: f64, seed: u64) -> Result<Report> {
    let mut report = Report::new("ann build");
    report.config("eps", eps).config("delta", delta).config("seed", seed);
    let n = points.len();
    let d = points.first().map_or(0, BitVector::len);
    let index = AnnIndex::new(points, AnnParams::new(eps, delta), seed)?;
    let table = index.table(1, 0)?;
    report
        .push("points", n, true, "")
        .push("dimension", d, true, "")
        .push("samples", index.samples(), true, "hash length per table")
        .push("max_scale", index.max_scale(), true, "")
        .push("table_radius", table.radius(), true, "at scale 1")
        .push("materialized", table.is_materialized(), true, "at scale 1")
        .push("buckets", table.bucket_count(), true, "at scale 1");
    Ok(report)
}

pub fn ann_query(points: Vec<BitVector>, q: &BitVector, eps: f64, delta: f64, seed: u64) -> Result<Report> {
    let mut report = Report::new("ann query");
    report.config("eps", eps).config("delta", delta).config("seed", seed).config("query", q);
    let index = AnnIndex::new(points, AnnParams::new(eps, delta), seed)?;
    let ans = index.query(q, derive_seed(seed, u64::MAX))?;
    let best = index.points().iter().map(|p| p.hamming(q)).min().unwrap_or(0);
    let got = index.points()[ans.point].hamming(q);
    report
        .push("point", ans.point, true, "")
        .push("distance", got, true, "")
        .push("nearest_distance", best, true, "brute force")
        .push("within_factor", got as f64 <= (1.0 + eps) * best as f64, true, "")
        .push("probes", ans.probes, true, "");
    Ok(report)
}

pub fn test_blr(n: usize, eps: f64, f: Option<BoolFn>, common: &Common) -> Result<Report> {
    let mut report = Report::new("test blr");
    report.config("n", n).config("eps", eps);
    let seed = common.echo(&mut report, 500)?;
    let f = match f {
        Some(f) => f,
        None => {
            let mut rng = SplitMix64::new(seed);
            BoolFn::new(n, (0..1usize << n).map(|_| rng.next_bool()).collect())?
        }
    };
    let outs = par_trials(seed, common.trials(500), |s| blr_test(&f, eps, &mut Tape::seeded(s)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let rejected = outs.iter().filter(|v| !v.accepted).count();
    report
        .push("function", f.to_string().replace('\n', " ").trim(), true, "")
        .push("trials_per_run", blr_trials(eps, BLR_CONSTANT), true, "ceil(12 / eps)")
        .push("distance_to_linear", distance_to_linear(&f)?, true, "")
        .rational("trial_rejection_probability", &blr_rejection_probability(&f), "exhaustive over pairs")
        .rational("run_rejection_rate", &ratio(rejected as i64, outs.len().max(1) as i64), "");
    Ok(report)
}

pub fn test_mono(n: usize, eps: f64, f: Option<RangedFn>, common: &Common) -> Result<Report> {
    let mut report = Report::new("test mono");
    report.config("n", n).config("eps", eps);
    let seed = common.echo(&mut report, 500)?;
    let f = match f {
        Some(f) => f,
        None => {
            let mut rng = SplitMix64::new(seed);
            BoolFn::new(n, (0..1usize << n).map(|_| rng.next_bool()).collect())?.to_ranged()
        }
    };
    let t = (3.0 * f.size().trailing_zeros() as f64 / eps).ceil() as usize;
    let v = violation_slices(&f);
    let m = monotonize_ranged(&f);
    let dist = match distance_to_monotone(&f) {
        Ok(d) => d,
        Err(Error::Resource(_)) => distance_by_matching(&f)?,
        Err(e) => return Err(e),
    };
    let outs = par_trials(seed, common.trials(500), |s| edge_test(&f, t, &mut Tape::seeded(s)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let rejected = outs.iter().filter(|v| !v.accepted).count();
    let counts: Vec<String> = v.counts.iter().map(usize::to_string).collect();
    report
        .push("function", f.to_string().replace('\n', " ").trim(), true, "")
        .push("slice_violations", counts.join(" "), true, "")
        .rational("trial_rejection_probability", &v.probability, "")
        .push("monotonize_changes", m.changes, true, "")
        .push("change_bound", 2 * range_bits(f.range()) as usize * v.total(), true, "2 ceil(log2 r) sum |A_i|")
        .push("distance_to_monotone", dist, true, "")
        .push("trials_per_run", t, true, "ceil(3n / eps)")
        .rational("run_rejection_rate", &ratio(rejected as i64, outs.len().max(1) as i64), "");
    Ok(report)
}
