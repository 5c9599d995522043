//! Acceptance suite: one PASS/FAIL line per criterion, exact comparisons only.
//!
//! Run with `cargo test -p dyadic-bellman --test acceptance`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dyadic_bellman::candidate::{candidate_c1, candidate_c2, candidate_c32, candidate_eval};
use dyadic_bellman::extremal::{convergence_report, dp_max_levelset, dp_table, DpLimits};
use dyadic_bellman::supersolution::{top_level_coverage, CONCAVITY_CASES, JUMP_CASES};
use dyadic_bellman::{
    check_jump, check_midpoint_concavity, check_obstacle, check_supersolution, construct_admissible, induction_trace,
    random_carleson, BellmanPoint, Candidate, CandidateParams, CarlesonSeq, CheckGrid, ConstructionStyle, Counterexample,
    DyadicRational, GeneralRational, NodeAddress,
};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn g(s: &str) -> GeneralRational {
    s.parse().unwrap()
}

fn d(s: &str) -> DyadicRational {
    s.parse().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lambda_set(c: &GeneralRational) -> Vec<GeneralRational> {
    let hi = c.ceil().to_i64().unwrap() + 6;
    let mut v: Vec<GeneralRational> = (-2..=hi).map(GeneralRational::from_integer).collect();
    v.push(g("1/2"));
    v.push(g("7/2"));
    v
}

fn a_grid(c: &GeneralRational, exp: u32) -> Vec<GeneralRational> {
    let n = c.floor_scaled(exp).to_u64().unwrap();
    (0..=n)
        .map(|j| GeneralRational::new(j, 1u64 << exp).unwrap())
        .collect()
}

fn closed_form_agreement() -> Outcome {
    type Oracle = fn(&BellmanPoint) -> Result<GeneralRational, dyadic_bellman::DomainError>;
    let cases: [(&str, Oracle); 3] = [("1", candidate_c1), ("2", candidate_c2), ("16/5", candidate_c32)];
    let mut compared = 0usize;
    for (c, oracle) in cases {
        let c = g(c);
        let params = CandidateParams::new(c.clone()).unwrap();
        for a in a_grid(&c, 6) {
            for lambda in lambda_set(&c) {
                let pt = BellmanPoint::new(a.clone(), lambda);
                let general = candidate_eval(&params, &pt).map_err(|e| e.to_string())?;
                let special = oracle(&pt).map_err(|e| e.to_string())?;
                ensure(general == special, || format!("C = {c} at {pt}: {general} vs {special}"))?;
                compared += 1;
            }
        }
    }
    let spot = |c: &str, a: &str, l: &str| {
        candidate_eval(&CandidateParams::new(g(c)).unwrap(), &BellmanPoint::new(g(a), g(l))).unwrap()
    };
    ensure(spot("2", "2", "3") == g("1/2"), || "G_2(2, 3) != 1/2".into())?;
    ensure(spot("16/5", "16/5", "4") == g("11/15"), || "G_16/5(16/5, 4) != 11/15".into())?;
    Ok(format!("{compared} points equal; G_2(2,3) = 1/2, G_16/5(16/5,4) = 11/15"))
}

fn supersolution_certificate() -> Outcome {
    let mut coverage: BTreeMap<String, u64> = BTreeMap::new();
    let mut notes = Vec::new();
    for c in ["1", "3/2", "2", "16/5", "7"] {
        let start = Instant::now();
        let c = g(c);
        let mut lambdas = lambda_set(&c);
        lambdas.push(g("16/5"));
        let grid = CheckGrid::new(c.clone(), 8, lambdas);
        let report = check_supersolution(&Candidate::new(c.clone()).unwrap(), &grid).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        if let Some(v) = report.all_violations().next() {
            return Err(format!("C = {c}: {} violation at {:?}: {} < {}", v.kind, v.points, v.lhs, v.rhs));
        }
        ensure(report.is_clean() && report.reduction_consistent && report.main.equivalence_holds, || {
            format!("C = {c}: inconsistent report")
        })?;
        ensure(elapsed < Duration::from_secs(30), || format!("C = {c} took {elapsed:?}"))?;
        for r in [&report.concavity, &report.jump] {
            for (k, v) in top_level_coverage(&r.coverage) {
                *coverage.entry(k).or_default() += v;
            }
        }
        notes.push(format!("C={c} {:.1}s", elapsed.as_secs_f64()));
    }
    for case in CONCAVITY_CASES.iter().chain(JUMP_CASES.iter()) {
        ensure(coverage.get(*case).copied().unwrap_or(0) > 0, || format!("{case} never exercised"))?;
    }
    Ok(format!("no violations; all 8 proof branches hit; {}", notes.join(", ")))
}

fn counterexample_detection() -> Outcome {
    let grid = CheckGrid::new(g("2"), 6, lambda_set(&g("2")));
    let f = Counterexample;
    let obstacle = check_obstacle(&f, &grid).map_err(|e| e.to_string())?;
    let concavity = check_midpoint_concavity(&f, &grid).map_err(|e| e.to_string())?;
    let jump = check_jump(&f, &grid).map_err(|e| e.to_string())?;
    ensure(obstacle.is_clean(), || "obstacle check failed".into())?;
    ensure(concavity.is_clean(), || "concavity check failed".into())?;
    let first = jump.violations.first().ok_or("no jump violation found")?;
    let expected = vec![BellmanPoint::new(g("0"), g("0")), BellmanPoint::new(g("1"), g("1"))];
    ensure(first.points == expected && first.lhs == g("0") && first.rhs == g("1"), || {
        format!("first violation {:?}: {} < {}", first.points, first.lhs, first.rhs)
    })?;
    Ok(format!(
        "obstacle and concavity clean; jump fails {} times, first at (0,0) -> (1,1) with 0 < 1",
        jump.violation_count
    ))
}

fn dp_sharpness() -> Outcome {
    let c = g("2");
    let limits = DpLimits::default();
    let (v, _) = dp_max_levelset(&c, 2, &d("2"), 2, limits).map_err(|e| e.to_string())?;
    let bound = candidate_eval(&CandidateParams::new(c.clone()).unwrap(), &BellmanPoint::new(g("2"), g("2"))).unwrap();
    ensure(v == d("1") && bound == g("1"), || format!("F_2(2,2) = {v}, G_2(2,2) = {bound}"))?;
    let rows = convergence_report(&c, &d("2"), 3, 10, limits).map_err(|e| e.to_string())?;
    let rows: Vec<_> = rows.into_iter().filter(|r| r.depth >= 3).collect();
    ensure(rows.len() == 8, || format!("expected depths 3..=10, got {}", rows.len()))?;
    ensure(rows.iter().all(|r| r.bound == g("1/2")), || "target is not 1/2".into())?;
    ensure(rows.iter().all(|r| r.gap >= GeneralRational::zero()), || "negative gap".into())?;
    ensure(rows.windows(2).all(|w| w[1].gap <= w[0].gap), || "gaps increase".into())?;
    let gaps: Vec<String> = rows.iter().map(|r| r.gap.to_string()).collect();
    Ok(format!("F_2(2,2) = 1 = G_2(2,2); gaps to 1/2 for D=3..10: {}", gaps.join(", ")))
}

/// Best level-set measures over all depth-`depth` sequences, by exhaustive
/// enumeration: `best[p][m]` in units of `2^-depth`, with `p` the root
/// average in the same units.
fn brute_force(c: &GeneralRational, depth: u32, m_max: usize) -> BTreeMap<u64, Vec<u64>> {
    let nodes = (1usize << (depth + 1)) - 1;
    let leaves = 1usize << depth;
    let (cp, cq) = (c.numer().to_u64().unwrap(), c.denom().to_u64().unwrap());
    let mut best: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let level_of = |h: usize| (usize::BITS - 1 - (h + 1).leading_zeros()) as u32;
    for mask in 0u64..(1u64 << nodes) {
        let sel = |h: usize| mask >> h & 1 == 1;
        // mass in units 2^-depth, heap order, bottom-up
        let mut mass = vec![0u64; nodes];
        for h in (0..nodes).rev() {
            let own = if sel(h) { 1u64 << (depth - level_of(h)) } else { 0 };
            let kids = if 2 * h + 2 < nodes { mass[2 * h + 1] + mass[2 * h + 2] } else { 0 };
            mass[h] = own + kids;
        }
        // A(J) <= C  <=>  mass * 2^level * q <= p * 2^depth
        let ok = (0..nodes).all(|h| mass[h] * (1u64 << level_of(h)) * cq <= cp * (1u64 << depth));
        if !ok {
            continue;
        }
        let mut counts = vec![0u64; m_max + 1];
        for leaf in 0..leaves {
            let mut h = (1usize << depth) - 1 + leaf;
            let mut height = 0usize;
            loop {
                height += usize::from(sel(h));
                if h == 0 {
                    break;
                }
                h = (h - 1) / 2;
            }
            for (m, slot) in counts.iter_mut().enumerate() {
                if m == 0 || height >= m {
                    *slot += 1;
                }
            }
        }
        let entry = best.entry(mass[0]).or_insert_with(|| vec![0; m_max + 1]);
        for m in 0..=m_max {
            entry[m] = entry[m].max(counts[m]);
        }
    }
    best
}

fn brute_force_oracle() -> Outcome {
    let mut cells = 0usize;
    for c in ["1", "2"] {
        let c = g(c);
        for depth in 0..=3u32 {
            let brute = brute_force(&c, depth, 4);
            let table = dp_table(&c, depth, 4, DpLimits::default()).map_err(|e| e.to_string())?;
            let dp_cells = table.cells(depth);
            let dp_averages: std::collections::BTreeSet<u64> = dp_cells
                .iter()
                .map(|(a, _, _)| a.scaled_numerator(depth).unwrap().to_u64().unwrap())
                .collect();
            ensure(dp_averages.iter().eq(brute.keys()), || {
                format!("C = {c}, D = {depth}: reachable averages differ")
            })?;
            for (a, m, v) in dp_cells {
                let p = a.scaled_numerator(depth).unwrap().to_u64().unwrap();
                let expected = DyadicRational::new(brute[&p][m as usize], depth);
                ensure(v == expected, || format!("C = {c}, D = {depth}, a = {a}, m = {m}: DP {v}, brute {expected}"))?;
                let (w, _) = dp_max_levelset(&c, depth, &a, i64::from(m), DpLimits::default()).map_err(|e| e.to_string())?;
                ensure(w == v, || format!("dp_max_levelset disagrees with table at a = {a}, m = {m}"))?;
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} cells equal exhaustive enumeration (C in {{1, 2}}, D <= 3, m <= 4)"))
}

/// Largest `A(alpha; J)` over every interval of the tree, selected or not.
fn dense_carleson_constant(seq: &CarlesonSeq) -> DyadicRational {
    let n = seq.depth();
    let mut best = DyadicRational::zero();
    for level in 0..=n {
        for j in NodeAddress::generation(level) {
            let mass: DyadicRational = seq
                .selected()
                .iter()
                .filter(|k| j.is_ancestor_of(**k))
                .map(|k| k.relative_measure())
                .sum();
            let avg = mass.shl(level);
            if avg > best {
                best = avg;
            }
        }
    }
    best
}

fn constructor_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let params = ["1", "3/2", "2", "5/2", "16/5", "7"];
    let mut triples: Vec<(GeneralRational, GeneralRational, u32)> = vec![
        (g("13/16"), g("1"), 4),
        (g("11/8"), g("2"), 4),
        (g("11/8"), g("3/2"), 3),
        (g("3"), g("3"), 3),
        (g("2"), g("2"), 1),
        (g("7"), g("7"), 6),
    ];
    while triples.len() < 500 {
        let c = g(params[rng.gen_range(0..params.len())]);
        let depth = rng.gen_range(0..=9u32);
        let floor_c = c.floor().to_u32().unwrap();
        let whole = rng.gen_range(0..=floor_c.min(depth + 1));
        let bits = if whole == 0 { depth } else { depth + 1 - whole };
        let e = rng.gen_range(0..=bits.min(8));
        let frac = GeneralRational::new(rng.gen_range(0..1u64 << e), 1u64 << e).unwrap();
        let a = &GeneralRational::from_integer(whole) + &frac;
        if a <= c {
            triples.push((a, c, depth));
        }
    }
    for (a, c, depth) in &triples {
        let seq = construct_admissible(a, c, *depth, ConstructionStyle::Roof)
            .map_err(|e| format!("a = {a}, C = {c}, depth = {depth}: {e}"))?;
        ensure(seq.average_at_root().to_general() == *a, || {
            format!("a = {a}, C = {c}, depth = {depth}: average {}", seq.average_at_root())
        })?;
        let constant = dense_carleson_constant(&seq);
        ensure(constant.cmp_general(c).is_le(), || {
            format!("a = {a}, C = {c}, depth = {depth}: constant {constant}")
        })?;
    }
    Ok(format!("{} triples exact and C-Carleson (13/16, 11/8, integer a = C included)", triples.len()))
}

const PARAMS: [&str; 5] = ["1", "3/2", "2", "16/5", "7"];

fn corpus() -> Vec<(GeneralRational, CarlesonSeq)> {
    (0..1000u64)
        .map(|i| {
            let c = g(PARAMS[(i % 5) as usize]);
            let depth = (i % 9) as u32;
            let seq = random_carleson(depth, &c, 1_000 + i).unwrap();
            (c, seq)
        })
        .collect()
}

fn leaf_heights(seq: &CarlesonSeq) -> Vec<u32> {
    let n = seq.depth();
    NodeAddress::generation(n)
        .map(|leaf| (0..=n).filter(|&l| seq.is_selected(leaf.ancestor_at(l).unwrap())).count() as u32)
        .collect()
}

fn structural_identities(corpus: &[(GeneralRational, CarlesonSeq)]) -> Outcome {
    for (i, (_, seq)) in corpus.iter().enumerate() {
        let n = seq.depth();
        let heights = leaf_heights(seq);
        for m in -1..=(n as i64 + 2) {
            let brute = if m <= 0 {
                DyadicRational::one()
            } else {
                DyadicRational::new(heights.iter().filter(|&&h| i64::from(h) >= m).count() as u64, n)
            };
            let v = seq.level_set_measure(&GeneralRational::from_integer(m));
            ensure(v == brute, || format!("seq {i}: V_{m} = {v}, leaf count {brute}"))?;
            if m >= 1 {
                let s = seq.generation_measure((m - 1) as usize);
                ensure(s == brute, || format!("seq {i}: |S^{}| = {s}, V = {brute}", m - 1))?;
            }
            for off in ["1/2", "1/4", "3/4"] {
                let lambda = &GeneralRational::from_integer(m) - &g(off);
                ensure(seq.level_set_measure(&lambda) == v, || format!("seq {i}: V at {lambda} != V_{m}"))?;
            }
        }
        let (sparse, _) = seq.carleson_constant();
        let dense = dense_carleson_constant(seq);
        ensure(sparse == dense, || format!("seq {i}: selected-only sup {sparse}, all-intervals sup {dense}"))?;
        let gens = seq.sparse_generations();
        for w in gens.windows(2) {
            ensure(
                w[1].iter().all(|k| w[0].iter().any(|p| p.is_strict_ancestor_of(*k))),
                || format!("seq {i}: generations not nested"),
            )?;
        }
        let measures = seq.generation_measures();
        ensure(measures.windows(2).all(|w| w[1] <= w[0]), || format!("seq {i}: measures increase"))?;
    }
    Ok(format!("{} sequences (depth <= 8) satisfy all four identities", corpus.len()))
}

fn sandwich(corpus: &[(GeneralRational, CarlesonSeq)]) -> Outcome {
    let mut traces = 0usize;
    for (i, (c, seq)) in corpus.iter().enumerate() {
        let candidate = Candidate::new(c.clone()).unwrap();
        let a = seq.average_at_root().to_general();
        for l in -1..=8i64 {
            let lambda = GeneralRational::from_integer(l);
            let v = seq.level_set_measure(&lambda);
            let bound = candidate_eval(&candidate.0, &BellmanPoint::new(a.clone(), lambda.clone())).map_err(|e| e.to_string())?;
            ensure(v.cmp_general(&bound).is_le(), || format!("seq {i}, C = {c}, lambda = {l}: V = {v} > {bound}"))?;
            if i < 200 {
                let t = induction_trace(&candidate, seq, &lambda).map_err(|e| e.to_string())?;
                ensure(t.holds && t.levels.iter().all(|lv| lv.holds), || {
                    format!("seq {i}, C = {c}, lambda = {l}: induction trace fails at {:?}", t.failures.first())
                })?;
                traces += 1;
            }
        }
    }
    Ok(format!("V <= G on {} sequences x 10 levels; {traces} induction traces hold", corpus.len()))
}

fn main() -> ExitCode {
    let corpus = corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + Send + Sync + '_>)> = vec![
        ("closed-form agreement", Box::new(closed_form_agreement)),
        ("supersolution certificate", Box::new(supersolution_certificate)),
        ("counterexample detection", Box::new(counterexample_detection)),
        ("DP sharpness probe", Box::new(dp_sharpness)),
        ("brute-force oracle equivalence", Box::new(brute_force_oracle)),
        ("constructor exactness", Box::new(constructor_exactness)),
        ("structural identities", Box::new(|| structural_identities(&corpus))),
        ("least-supersolution sandwich", Box::new(|| sandwich(&corpus))),
    ];
    let results: Vec<(Outcome, Duration)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                s.spawn(move || {
                    let start = Instant::now();
                    let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
                        .unwrap_or_else(|_| Err("panicked".to_string()));
                    (out, start.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (i, ((name, _), (out, t))) in criteria.iter().zip(&results).enumerate() {
        match out {
            Ok(msg) => println!("PASS  [{}] {name} ({:.2}s): {msg}", i + 1, t.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL  [{}] {name} ({:.2}s): {msg}", i + 1, t.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
