//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any fails.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use traintrack_core::corpus::{corpus, random_automorphism, signed_permutations};
use traintrack_core::driver::{certify_train_track, classify, has_back_tracking, Classification, ClassifyOptions, Outcome};
use traintrack_core::graph::{DirEdge, EdgePath};
use traintrack_core::map::{from_generator_images, rose_map, GraphMap};
use traintrack_core::mapclass::{
    adjust_decompose, classify_sphere_body, plan, MapClassElement, ManifoldSpec, SlideLetter, SpecError, Summand,
    SummandKind, SummandPerm, S2XS1_LABEL,
};
use traintrack_core::spectra::growth::iterate_counts;
use traintrack_core::spectra::{
    growth_estimate, is_irreducible, perron, switch_check, transition_matrix, untightened_matrix, AlgebraicRoot,
    TransitionMatrix,
};

const CORPUS_SEED: u64 = 20240601;

type Check = Result<String, String>;
type Classified = (GraphMap, Classification);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn one() -> BigRational {
    BigRational::from_integer(BigInt::from(1))
}

// ---------- oracles ----------

/// Strong connectivity through paths of positive length, by depth-first
/// search over nonzero entries (edge `j -> i` when `m[i][j] > 0`).
fn reachability_irreducible(m: &[Vec<u64>]) -> bool {
    let n = m.len();
    if n == 0 {
        return false;
    }
    for start in 0..n {
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        while let Some(j) = stack.pop() {
            for i in 0..n {
                if m[i][j] > 0 && !seen[i] {
                    seen[i] = true;
                    stack.push(i);
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return false;
        }
    }
    true
}

/// Dominant eigenvalue by power iteration on `M + I`.
fn power_iteration(m: &[Vec<u64>]) -> f64 {
    let n = m.len();
    let mut x = vec![1.0f64; n];
    let mut mu = 0.0;
    for _ in 0..2_000_000 {
        let mut y: Vec<f64> = (0..n).map(|i| x[i] + (0..n).map(|j| m[i][j] as f64 * x[j]).sum::<f64>()).collect();
        let norm = y.iter().cloned().fold(0.0, f64::max);
        for v in &mut y {
            *v /= norm;
        }
        let diff = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        let done = diff < 1e-15 && (norm - mu).abs() < 1e-14 * norm;
        mu = norm;
        if done {
            break;
        }
    }
    mu - 1.0
}

fn mat_mul(a: &[Vec<u128>], b: &[Vec<u128>]) -> Vec<Vec<u128>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

/// Order of a signed permutation of generators by direct iteration.
fn signed_perm_order(images: &[DirEdge]) -> usize {
    let act = |d: DirEdge| {
        let t = images[d.edge()];
        if d.is_reversed() {
            t.reverse()
        } else {
            t
        }
    };
    let mut cur: Vec<DirEdge> = images.to_vec();
    let mut k = 1;
    while cur.iter().enumerate().any(|(i, &d)| d != DirEdge::positive(i)) {
        cur = cur.into_iter().map(act).collect();
        k += 1;
    }
    k
}

// ---------- soundness of a terminal state ----------

fn sound(c: &Classification, opts: &ClassifyOptions) -> Result<(), String> {
    let f = &c.map;
    match &c.outcome {
        Outcome::Periodic { period, perron } => {
            ensure(*period >= 1, || "period 0".into())?;
            let p = f.iterate(*period).map_err(|e| e.to_string())?.tightened();
            ensure(p.is_identity(), || format!("f^{period} is not the identity"))?;
            ensure(perron.root.equals_rational(&one()), || "periodic map with lambda != 1".into())
        }
        Outcome::Reducible { witness, block, .. } => {
            let real = f.graph().real_edges();
            ensure(!witness.is_empty() && witness.len() < real.len(), || "witness not a proper subset".into())?;
            for &e in witness {
                for d in f.image(DirEdge::positive(e)).steps() {
                    ensure(witness.contains(&d.edge()) || f.graph().is_phantom(d.edge()), || {
                        format!("witness edge {e} leaves the witness")
                    })?;
                }
            }
            ensure(block.dim() == witness.len(), || "block dimension".into())
        }
        Outcome::TrainTrackGeneric { perron, certificate } => {
            ensure(certificate.holds, || "certificate fails".into())?;
            ensure(has_back_tracking(f, opts.certificate_depth).is_none(), || "back-tracking found".into())?;
            let m = transition_matrix(f).map_err(|e| e.to_string())?;
            ensure(reachability_irreducible(m.rows()), || "transition matrix reducible".into())?;
            ensure(perron.lambda > 1.0, || "generic map with lambda <= 1".into())
        }
    }
}

/// Exact bracket comparison along the recorded λ sequence, starting from
/// the input's own untightened counts. `None` means all counts vanished.
fn lambda_monotone(input: &GraphMap, c: &Classification, tol: f64) -> Result<(), String> {
    let opt = |m: TransitionMatrix| perron(&m, tol).ok().map(|d| d.root);
    let mut prev: Option<AlgebraicRoot> = opt(untightened_matrix(input));
    for r in &c.move_log {
        match (&prev, &r.lambda) {
            (None, Some(_)) => return Err(format!("lambda appears after vanishing at step {}", r.step)),
            (Some(a), Some(b)) if b.cmp_exact(a) == Ordering::Greater => {
                return Err(format!("lambda increases at step {} ({} > {})", r.step, b.to_f64(), a.to_f64()))
            }
            _ => {}
        }
        prev = r.lambda.clone();
    }
    Ok(())
}

// ---------- criteria ----------

fn c1_fibonacci() -> Check {
    let f = rose_map(&["ab", "a"]).unwrap();
    let opts = ClassifyOptions::default();
    let t0 = Instant::now();
    let c = classify(&f, &opts).map_err(|e| e.to_string())?;
    let cert = certify_train_track(&c.map, 8);
    let elapsed = t0.elapsed();
    let Outcome::TrainTrackGeneric { perron, .. } = &c.outcome else {
        return Err(format!("classified {}", c.outcome.kind()));
    };
    // det(xI - M) for M = [[1,1],[1,0]]
    let m = transition_matrix(&c.map).unwrap();
    let r = m.rows();
    let (tr, det) = ((r[0][0] + r[1][1]) as i64, (r[0][0] * r[1][1]) as i64 - (r[0][1] * r[1][0]) as i64);
    ensure(tr == 1 && det == -1, || format!("char poly x^2 - {tr}x + {det}"))?;
    ensure(perron.char_poly.to_string() == "x^2 - x - 1", || format!("char poly {}", perron.char_poly))?;
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    ensure((perron.lambda - phi).abs() <= 1e-9, || format!("lambda {}", perron.lambda))?;
    ensure(cert.holds && cert.depth >= 8, || "certificate fails at depth 8".into())?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("lambda = {:.12}, {elapsed:?}", perron.lambda))
}

fn c2_periodic() -> Check {
    let opts = ClassifyOptions::default();
    let mut n = 0;
    for k in 1..=4 {
        for p in signed_permutations(k) {
            let words: Vec<EdgePath> = p.iter().map(|&d| EdgePath::single(d)).collect();
            let f = from_generator_images(&words).unwrap();
            let c = classify(&f, &opts).map_err(|e| format!("{p:?}: {e}"))?;
            let expected = signed_perm_order(&p);
            match &c.outcome {
                Outcome::Periodic { period, perron } => {
                    ensure(*period == expected, || format!("{p:?}: period {period}, expected {expected}"))?;
                    ensure(perron.root.is_exact() && perron.root.equals_rational(&one()), || {
                        format!("{p:?}: lambda not exactly 1")
                    })?;
                }
                o => return Err(format!("{p:?}: classified {}", o.kind())),
            }
            n += 1;
        }
    }
    Ok(format!("{n} signed permutations, ranks 1..=4"))
}

fn c3_reducible() -> Check {
    let f = rose_map(&["a", "ab"]).unwrap();
    let c = classify(&f, &ClassifyOptions::default()).map_err(|e| e.to_string())?;
    let Outcome::Reducible { witness, .. } = &c.outcome else {
        return Err(format!("classified {}", c.outcome.kind()));
    };
    ensure(witness == &vec![0], || format!("witness {witness:?}"))?;
    for &e in witness {
        let img = c.map.image(DirEdge::positive(e));
        ensure(img.steps().iter().all(|d| witness.contains(&d.edge())), || format!("image of {e} escapes"))?;
    }
    let m = vec![vec![1, 1], vec![0, 1]];
    ensure(!reachability_irreducible(&m), || "oracle says irreducible".into())?;
    ensure(!is_irreducible(&TransitionMatrix::from_rows(m)), || "library says irreducible".into())?;
    ensure(transition_matrix(&f).unwrap().rows() == [vec![1, 1], vec![0, 1]], || "matrix of a->a, b->ab".into())?;
    Ok("witness {a}".into())
}

fn c4_perron_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 4);
    let tol = 1e-9;
    let mut done = 0;
    let mut worst = 0.0f64;
    while done < 200 {
        let n = rng.gen_range(1..=6);
        let density = rng.gen_range(0.2..0.9);
        let m: Vec<Vec<u64>> = (0..n)
            .map(|_| (0..n).map(|_| if rng.gen_bool(density) { rng.gen_range(1..=4) } else { 0 }).collect())
            .collect();
        if !reachability_irreducible(&m) {
            continue;
        }
        let tm = TransitionMatrix::from_rows(m.clone());
        let d = perron(&tm, tol).map_err(|e| format!("{m:?}: {e}"))?;
        let (lo, hi) = d.isolating_interval();
        ensure(hi - lo <= tol, || format!("{m:?}: interval width {}", hi - lo))?;
        let pi = power_iteration(&m);
        // float slack for rounding the rational endpoints
        let slack = 4.0 * f64::EPSILON * hi.max(1.0);
        ensure(lo - slack <= pi && pi <= hi + slack, || format!("{m:?}: power iteration {pi} outside [{lo}, {hi}]"))?;
        ensure(d.eigenvector.iter().all(|&v| v > 0.0), || format!("{m:?}: eigenvector {:?}", d.eigenvector))?;
        let r = switch_check(&tm, &d).unwrap();
        // independent residual
        let own = (0..n)
            .map(|i| ((0..n).map(|j| m[i][j] as f64 * d.eigenvector[j]).sum::<f64>() - d.lambda * d.eigenvector[i]).abs())
            .fold(0.0, f64::max);
        ensure(r <= 1e-9 && own <= 1e-9, || format!("{m:?}: residual {r} / {own}"))?;
        worst = worst.max(own);
        done += 1;
    }
    Ok(format!("200 matrices, worst residual {worst:.2e}"))
}

fn c5_growth(results: &[Classified]) -> Check {
    let mut n_tt = 0;
    let mut worst = 0.0f64;
    for (_, c) in results {
        let Outcome::TrainTrackGeneric { perron, .. } = &c.outcome else { continue };
        let f = &c.map;
        let m = transition_matrix(f).map_err(|e| e.to_string())?;
        let base: Vec<Vec<u128>> = m.rows().iter().map(|r| r.iter().map(|&x| x as u128).collect()).collect();
        let dim = base.len();
        let mut pow: Vec<Vec<u128>> = (0..dim).map(|i| (0..dim).map(|j| (i == j) as u128).collect()).collect();
        let mut materialized = f.clone();
        for n in 0..=8 {
            let counts = iterate_counts(f, n).map_err(|e| format!("n = {n}: {e:?}"))?;
            for (j, w) in counts.iter().enumerate() {
                let col: u128 = (0..dim).map(|i| pow[i][j]).sum();
                ensure(w.len() == col, || format!("n = {n}, edge {j}: {} vs column sum {col}", w.len()))?;
                if (1..=5).contains(&n) {
                    let direct = materialized.image(DirEdge::positive(m.edges()[j])).len() as u128;
                    ensure(direct == col, || format!("n = {n}, edge {j}: tightened length {direct} vs {col}"))?;
                }
            }
            pow = mat_mul(&base, &pow);
            if (1..5).contains(&n) {
                materialized = f.compose(&materialized).map_err(|e| e.to_string())?;
            }
        }
        let g = growth_estimate(f, 5, 15).map_err(|e| format!("{e:?}"))?;
        let ln = perron.lambda.ln();
        let rel = (g.slope - ln).abs() / ln;
        ensure(rel <= 0.02, || format!("slope {} vs ln lambda {ln} ({:.2}% off) for {:?}", g.slope, rel * 100.0, f))?;
        worst = worst.max(rel);
        n_tt += 1;
    }
    ensure(n_tt > 0, || "no train-track outputs in the corpus".into())?;
    Ok(format!("{n_tt} train-track maps, worst slope error {:.3}%", worst * 100.0))
}

fn c6_monotone(results: &[Classified], opts: &ClassifyOptions) -> Check {
    let mut max_moves = 0;
    for (i, (f, c)) in results.iter().enumerate() {
        ensure(c.move_log.len() <= 200, || format!("input {i}: {} moves", c.move_log.len()))?;
        lambda_monotone(f, c, opts.tol).map_err(|e| format!("input {i}: {e}"))?;
        sound(c, opts).map_err(|e| format!("input {i} ({}): {e}", c.outcome.kind()))?;
        max_moves = max_moves.max(c.move_log.len());
    }
    Ok(format!("{} inputs, at most {max_moves} moves", results.len()))
}

fn c7_totality(results: &[Classified], opts: &ClassifyOptions) -> Check {
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, (f, c)) in results.iter().enumerate() {
        let kind = c.outcome.kind();
        ensure(["periodic", "reducible", "train_track_generic"].contains(&kind), || format!("input {i}: {kind}"))?;
        *tally.entry(kind).or_default() += 1;
        let again = classify(f, opts).map_err(|e| e.to_string())?;
        ensure(format!("{c:?}") == format!("{again:?}"), || format!("input {i}: rerun differs"))?;
    }
    Ok(format!("{tally:?}"))
}

fn c8_mapclass() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 8);
    let opts = ClassifyOptions::default();
    for i in 0..50 {
        let k = rng.gen_range(1..=4);
        let len = rng.gen_range(1..=10);
        let outer = random_automorphism(k, len, &mut rng);
        let t1: Vec<u8> = (0..k).map(|_| rng.gen_range(0..2)).collect();
        let t2: Vec<u8> = (0..k).map(|_| rng.gen_range(0..2)).collect();
        let u = MapClassElement::new(outer.clone(), t1).map_err(|e| format!("element {i}: {e}"))?;
        let inv = u.inverse().map_err(|e| e.to_string())?;
        ensure(u.compose(&inv).unwrap().is_identity(), || format!("element {i}: u u^-1 != 1"))?;
        ensure(inv.compose(&u).unwrap().is_identity(), || format!("element {i}: u^-1 u != 1"))?;
        let v = MapClassElement::new(outer, t2).unwrap();
        let ru = classify_sphere_body(&u, &opts).map_err(|e| e.to_string())?;
        let rv = classify_sphere_body(&v, &opts).map_err(|e| e.to_string())?;
        ensure(format!("{:?}", ru.classification) == format!("{:?}", rv.classification), || {
            format!("element {i}: twist change alters the classification")
        })?;
    }
    Ok("50 elements".into())
}

fn random_spec(rng: &mut impl Rng, max: usize) -> ManifoldSpec {
    let n = rng.gen_range(1..=max);
    let summands = (0..n)
        .map(|i| {
            let id = format!("X{i}");
            match rng.gen_range(0..4) {
                0 => Summand { id, kind: SummandKind::S2xs1, label: S2XS1_LABEL.into(), genus: None },
                1 => {
                    let g = rng.gen_range(1..=2);
                    Summand { id, kind: SummandKind::Handlebody, label: format!("H{g}"), genus: Some(g) }
                }
                _ => {
                    let label = ["P", "Q", "R"][rng.gen_range(0..3)];
                    Summand { id, kind: SummandKind::Irreducible, label: label.into(), genus: None }
                }
            }
        })
        .collect();
    ManifoldSpec::new(summands, rng.gen_range(0..3)).unwrap()
}

fn c9_adjust() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 9);
    let mut rejected = 0;
    for i in 0..100 {
        let spec = random_spec(&mut rng, 8);
        let ids: Vec<String> = spec.summands().iter().map(|s| s.id.clone()).collect();
        let label = |id: &str| spec.summand(id).unwrap().label.clone();
        // random shuffle inside each label class
        let mut classes: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for id in &ids {
            classes.entry(label(id)).or_default().push(id.clone());
        }
        let mut f = BTreeMap::new();
        for members in classes.values() {
            let mut img = members.clone();
            for j in (1..img.len()).rev() {
                img.swap(j, rng.gen_range(0..=j));
            }
            for (a, b) in members.iter().zip(img) {
                f.insert(a.clone(), b);
            }
        }
        let adj = adjust_decompose(&spec, &SummandPerm(f.clone())).map_err(|e| format!("spec {i}: {e}"))?;
        for x in &ids {
            let mut y = f[x].clone();
            for l in &adj.h.letters {
                if let SlideLetter::Interchange { first, second } = l {
                    ensure(label(first) == label(second), || format!("spec {i}: cross-label interchange"))?;
                    if y == *first {
                        y = second.clone();
                    } else if y == *second {
                        y = first.clone();
                    }
                }
            }
            ensure(y == *x, || format!("spec {i}: h(f({x})) = {y}"))?;
        }
        ensure(adj.g_perm.is_identity(), || format!("spec {i}: g not the identity permutation"))?;
        // swap two summands with different labels
        if let Some((a, b)) = ids.iter().flat_map(|a| ids.iter().map(move |b| (a, b))).find(|(a, b)| label(a) != label(b)) {
            let bad = SummandPerm([(a.clone(), b.clone()), (b.clone(), a.clone())].into_iter().collect());
            match adjust_decompose(&spec, &bad) {
                Err(SpecError::LabelViolation { .. }) => rejected += 1,
                other => return Err(format!("spec {i}: label violation accepted: {other:?}")),
            }
        }
    }
    Ok(format!("100 specs, {rejected} violations rejected"))
}

fn c10_planner() -> Check {
    // closed irreducible, bounded irreducible, s2xs1, handlebody
    fn summand(kind: usize, i: usize) -> Summand {
        let id = format!("Y{i}");
        match kind {
            0 => Summand { id, kind: SummandKind::Irreducible, label: "P".into(), genus: None },
            1 => Summand { id, kind: SummandKind::Irreducible, label: "B".into(), genus: Some(2) },
            2 => Summand { id, kind: SummandKind::S2xs1, label: S2XS1_LABEL.into(), genus: None },
            _ => Summand { id, kind: SummandKind::Handlebody, label: "H".into(), genus: Some(2) },
        }
    }
    fn multisets(len: usize, min: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if acc.len() == len {
            out.push(acc.clone());
            return;
        }
        for k in min..4 {
            acc.push(k);
            multisets(len, k, acc, out);
            acc.pop();
        }
    }
    let mut all = Vec::new();
    for len in 1..=6 {
        multisets(len, 0, &mut Vec::new(), &mut all);
    }
    let mut count = 0;
    for kinds in &all {
        for holes in 0..2 {
            let summands: Vec<Summand> = kinds.iter().enumerate().map(|(i, &k)| summand(k, i)).collect();
            let spec = ManifoldSpec::new(summands, holes).unwrap();
            let p = plan(&spec).map_err(|e| format!("{kinds:?}: {e}"))?;
            let terminal = p.terminal_targets();
            for s in spec.summands() {
                let hits = terminal.iter().filter(|t| **t == s.id).count();
                ensure(hits == 1, || format!("{kinds:?}: {} reaches {hits} terminal steps\n{p}", s.id))?;
            }
            ensure(p.steps.last().is_some_and(|s| s.terminal), || format!("{kinds:?}: plan ends non-terminal"))?;
            count += 1;
        }
    }
    let golden_dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");
    for (name, kind) in [("handlebody", 3), ("s2xs1", 2), ("irreducible", 0), ("irreducible_bounded", 1)] {
        let spec = ManifoldSpec::new(vec![summand(kind, 0)], 0).unwrap();
        let text = plan(&spec).unwrap().to_string();
        let path = format!("{golden_dir}/{name}.plan");
        let expected = std::fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
        ensure(text == expected, || format!("golden {name} differs:\n{text}"))?;
    }
    Ok(format!("{count} specs, 4 golden plans"))
}

fn main() {
    let opts = ClassifyOptions::default();
    let inputs = corpus(CORPUS_SEED, 100, 3, 12);
    let classified: Result<Vec<Classified>, String> = inputs
        .iter()
        .enumerate()
        .map(|(i, f)| classify(f, &opts).map(|c| (f.clone(), c)).map_err(|e| format!("input {i}: {e}")))
        .collect();
    let corpus_check = |run: &dyn Fn(&[Classified]) -> Check| match &classified {
        Ok(r) => run(r),
        Err(e) => Err(e.clone()),
    };

    let results: Vec<(&str, Check)> = vec![
        ("1 fibonacci train track", c1_fibonacci()),
        ("2 periodic signed permutations", c2_periodic()),
        ("3 reducible a->a b->ab", c3_reducible()),
        ("4 perron oracle equivalence", c4_perron_oracle()),
        ("5 growth law", corpus_check(&c5_growth)),
        ("6 monotonicity and termination", corpus_check(&|r| c6_monotone(r, &opts))),
        ("7 trichotomy and determinism", corpus_check(&|r| c7_totality(r, &opts))),
        ("8 mapping class algebra", c8_mapclass()),
        ("9 adjusting decomposition", c9_adjust()),
        ("10 planner totality", c10_planner()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {name}: FAIL ({why})");
            }
        }
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
