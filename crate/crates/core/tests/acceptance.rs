//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use millefeuille::heintze::{
    dm_closed_form, euclid_cygan, level_metric, normalize_for_tree, unit_height, visual_distance,
    ExpandingStructure, Layer, LevelNorm,
};
use millefeuille::madic::{madic_distance, MAdicPoint};
use millefeuille::maps::{
    estimate_bilipschitz, estimate_measure_distortion, estimate_qs_modulus, rigidity_profile,
    verify_coordinate_form, verify_decomposition, BoundaryMap, BoundarySpace, Func,
    SimilarityData, Sampler, Source, Term, Trend, Window,
};
use millefeuille::mille::{
    boundary_case, boundary_visual, dmax_formula, fit_distortion, horoball_distortion,
    BoundaryCase,
};
use millefeuille::qiclass::{
    common_power_base, jordan_power_compatible, qi_equivalent, AbsJordanForm, Equivalence,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: &'static str, pass: bool, detail: String) -> Outcome {
    println!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    Outcome { id, pass, detail }
}

fn random_madic<R: Rng>(rng: &mut R, m: u32) -> MAdicPoint {
    let lo = rng.gen_range(-12i64..0);
    let hi = rng.gen_range(0i64..12);
    MAdicPoint::new(m, (lo..hi).map(|h| (h, rng.gen_range(0..m)))).unwrap()
}

fn random_layers<R: Rng>(rng: &mut R) -> Vec<(f64, usize)> {
    let r = rng.gen_range(1..=3);
    let mut l: Vec<(f64, usize)> = (0..r).map(|_| (rng.gen_range(0.5..=4.0), rng.gen_range(1..=2))).collect();
    l.sort_by(|a, b| a.0.total_cmp(&b.0));
    l
}

// Components with log-uniform magnitude in [e^-lim, e^lim] and random sign.
fn random_vector<R: Rng>(rng: &mut R, n: usize, lim: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            s * rng.gen_range(-lim..lim).exp()
        })
        .collect()
}

// Oracle for the agreement exponent: scan heights from the top down.
fn first_difference(x: &MAdicPoint, y: &MAdicPoint) -> Option<i64> {
    let mut heights: Vec<i64> = x.nonzero_digits().chain(y.nonzero_digits()).map(|(h, _)| h).collect();
    heights.sort_unstable_by(|a, b| b.cmp(a));
    heights.into_iter().find(|&h| x.digit(h) != y.digit(h)).map(|h| h + 1)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut violations = 0usize;
    let mut mismatches = 0usize;
    let mut triples = 0usize;
    for (k, m) in [2u32, 3, 10].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        for i in 0..100_000 {
            let x = random_madic(&mut rng, m);
            let y = random_madic(&mut rng, m);
            // share a random top part so that small distances occur
            let cut = rng.gen_range(-12i64..12);
            let z = MAdicPoint::new(
                m,
                x.nonzero_digits()
                    .filter(|(h, _)| *h >= cut)
                    .chain(random_madic(&mut rng, m).nonzero_digits().filter(|(h, _)| *h < cut)),
            )
            .unwrap();
            let e = |a: &MAdicPoint, b: &MAdicPoint| madic_distance(a, b, m as f64).unwrap().exponent;
            let (xy, yz, xz) = (e(&x, &y), e(&y, &z), e(&x, &z));
            if xz > xy.max(yz) {
                violations += 1;
            }
            if i % 10 == 0 && xz != first_difference(&x, &z) {
                mismatches += 1;
            }
            triples += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    line(
        "1 ultrametric suite",
        violations == 0 && mismatches == 0 && secs < 2.0,
        format!("{triples} triples, {violations} violations, {mismatches} oracle mismatches, {secs:.2}s (limit 2s)"),
    )
}

// Oracle for the unit height: bisection on the level metric.
fn bisected_unit_height(e: &ExpandingStructure, x: &[f64], y: &[f64]) -> f64 {
    let f = |t: f64| level_metric(e, t, x, y).unwrap() - 1.0;
    let (mut lo, mut hi) = (-1.0, 1.0);
    while f(lo) <= 0.0 {
        lo *= 2.0;
    }
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return hi;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut worst_library: f64 = 0.0;
    for _ in 0..10_000 {
        let e = ExpandingStructure::diagonal(&random_layers(&mut rng)).unwrap();
        let x = random_vector(&mut rng, e.dim(), 10.0);
        let y = random_vector(&mut rng, e.dim(), 10.0);
        let t0 = bisected_unit_height(&e, &x, &y);
        let oracle = (e.alpha1() * t0).exp();
        let dm = dm_closed_form(&e, &x, &y).unwrap();
        worst = worst.max((oracle - dm).abs() / dm);
        let lib = (e.alpha1() * unit_height(&e, &x, &y).unwrap()).exp();
        worst_library = worst_library.max((lib - dm).abs() / dm);
    }
    line(
        "2 visual-metric oracle equivalence",
        worst <= 1e-9 && worst_library <= 1e-9,
        format!(
            "10000 pairs, max rel err bisection oracle {worst:.2e}, library unit height {worst_library:.2e} (tol 1e-9)"
        ),
    )
}

fn criterion_3() -> Outcome {
    let structures = [
        ExpandingStructure::diagonal(&[(1.0, 1), (2.0, 1)]).unwrap(),
        ExpandingStructure::from_layers(vec![Layer::with_blocks(1.0, vec![2]), Layer::new(2.0, 1)]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut details = Vec::new();
    let mut pass = true;
    for (k, e) in structures.iter().enumerate() {
        let mut r40 = (f64::INFINITY, 0.0f64);
        let mut r80 = (f64::INFINITY, 0.0f64);
        for _ in 0..1000 {
            let x = random_vector(&mut rng, e.dim(), 7.0);
            let y = random_vector(&mut rng, e.dim(), 7.0);
            let v = visual_distance(e, &x, &y).unwrap();
            let a = euclid_cygan(e, &x, &y, -40.0).unwrap() / v;
            let b = euclid_cygan(e, &x, &y, -80.0).unwrap() / v;
            r40 = (r40.0.min(a), r40.1.max(a));
            r80 = (r80.0.min(b), r80.1.max(b));
        }
        let inside = r40.0 >= 0.25 && r40.1 <= 4.0;
        let stable = r80.0 >= r40.0 * (1.0 - 1e-9) && r80.1 <= r40.1 * (1.0 + 1e-9);
        pass &= inside && stable;
        details.push(format!(
            "structure {k}: T=-40 [{:.4}, {:.4}], T=-80 [{:.4}, {:.4}]",
            r40.0, r40.1, r80.0, r80.1
        ));
    }
    line(
        "3 Euclid-Cygan comparability",
        pass,
        format!("{} (within [1/4, 4], no widening beyond 1e-9)", details.join("; ")),
    )
}

fn case_name(c: BoundaryCase) -> &'static str {
    match c {
        BoundaryCase::SameHyperplane => "same_hyperplane",
        BoundaryCase::SameTree => "same_tree",
        BoundaryCase::Mixed => "mixed",
    }
}

// Largest K with ratios inside [1/K, K], per case.
fn boundary_k(norm: LevelNorm, outer: f64) -> BTreeMap<&'static str, (f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ks: BTreeMap<&'static str, (f64, usize)> = BTreeMap::new();
    let per_structure = 500;
    for s in 0..20 {
        let m = [2u32, 3, 5][s % 3];
        let raw = ExpandingStructure::diagonal(&random_layers(&mut rng)).unwrap().with_norm(norm);
        let (e, _) = normalize_for_tree(&raw, m).unwrap();
        let space = BoundarySpace::new(e.clone(), m).unwrap();
        let sampler = Sampler::new(40 + s as u64, Window::new(0.01, outer).unwrap(), per_structure);
        for pair in sampler.pairs(&space) {
            let d = dmax_formula(&e, m, &pair.a, &pair.b).unwrap();
            if d == 0.0 {
                continue;
            }
            let r = boundary_visual(&e, m, &pair.a, &pair.b).unwrap() / d;
            let entry = ks.entry(case_name(boundary_case(&pair.a, &pair.b))).or_insert((1.0, 0));
            entry.0 = entry.0.max(r).max(1.0 / r);
            entry.1 += 1;
        }
    }
    ks
}

fn criterion_4() -> Vec<Outcome> {
    let mut out = Vec::new();
    for (label, norm) in [("layer-max norm", LevelNorm::LayerMax), ("euclidean norm", LevelNorm::Euclidean)] {
        let small = boundary_k(norm, 100.0);
        let large = boundary_k(norm, 1000.0);
        let mut pass = small.len() == 3;
        let mut parts = Vec::new();
        let mut total = 0;
        for (case, (k_small, n)) in &small {
            let (k_large, _) = large[case];
            pass &= *k_small <= 4.0 && k_large <= 4.0 && k_large <= k_small * 1.05;
            total += n;
            parts.push(format!("{case} K={k_small:.4} -> {k_large:.4} ({n} pairs)"));
        }
        out.push(line(
            if norm == LevelNorm::LayerMax { "4 millefeuille boundary (layer-max norm)" } else { "4 millefeuille boundary (euclidean norm)" },
            pass,
            format!("{label}, {total} pairs: {} (K <= 4, growth <= 5% under 10x window)", parts.join(", ")),
        ));
    }
    out
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let e = ExpandingStructure::diagonal(&[(1.0, 1), (2.0, 1)]).unwrap();
    let levels: Vec<f64> = (0..=32).map(|k| (2.0 + 8.0 * k as f64 / 32.0).exp()).collect();
    let samples = horoball_distortion(&e, 2, 0, &levels).unwrap();
    let fit = fit_distortion(e.alpha1(), &samples).unwrap();
    let target = e.alpha1() / 2.0;
    let slope_ok = (fit.slope - target).abs() <= 0.05 * target;
    let ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    let monotone = ratios.windows(2).all(|w| w[1] > w[0]);
    let first = ratios[0];
    let last = *ratios.last().unwrap();
    let growth = last - first;
    let secs = start.elapsed().as_secs_f64();
    line(
        "5 exponential distortion",
        slope_ok && monotone && growth >= 1e3 && secs < 10.0,
        format!(
            "slope {:.4} vs {target} (5%), ratio {first:.3} -> {last:.1} increasing={monotone}, growth +{growth:.1} (>= 1e3; factor {:.1}x), K' = {:.3}, {secs:.3}s (limit 10s)",
            fit.slope,
            last / first,
            fit.lower_constant
        ),
    )
}

// Oracle: for every r, the list of exponents with r^i <= limit.
fn power_table(limit: u64) -> HashMap<u64, Vec<(u64, u32)>> {
    let mut table: HashMap<u64, Vec<(u64, u32)>> = HashMap::new();
    for r in 2..=limit {
        let mut p = r;
        let mut i = 1;
        while p <= limit {
            table.entry(p).or_default().push((r, i));
            p *= r;
            i += 1;
        }
    }
    table
}

fn corpus() -> Vec<ExpandingStructure> {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let mut out = vec![
        ExpandingStructure::diagonal(&[(1.0, 1)]).unwrap(),
        ExpandingStructure::diagonal(&[(2.0, 1)]).unwrap(),
        ExpandingStructure::diagonal(&[(1.0, 1), (2.0, 1)]).unwrap(),
        ExpandingStructure::diagonal(&[(2.0, 1), (4.0, 1)]).unwrap(),
        ExpandingStructure::diagonal(&[(1.0, 2)]).unwrap(),
        ExpandingStructure::from_layers(vec![Layer::with_blocks(1.0, vec![2])]).unwrap(),
        ExpandingStructure::from_layers(vec![Layer::with_blocks(1.5, vec![2, 1]), Layer::new(3.0, 1)]).unwrap(),
        ExpandingStructure::diagonal(&[(3.0f64.ln(), 1), (2.0 * 3.0f64.ln(), 1)]).unwrap(),
    ];
    while out.len() < 20 {
        out.push(ExpandingStructure::diagonal(&random_layers(&mut rng)).unwrap());
    }
    out
}

fn criterion_6() -> Vec<Outcome> {
    let limit = 4096u64;
    let table = power_table(limit);
    let mut disagreements = 0usize;
    let mut pairs = 0usize;
    for m in 2..=limit {
        for mp in 2..=limit {
            let a = &table[&m];
            let b = &table[&mp];
            // smallest shared root is the primitive common base
            let oracle = a
                .iter()
                .filter_map(|&(r, i)| b.iter().find(|&&(rp, _)| rp == r).map(|&(_, j)| (r, i, j)))
                .min();
            let got = common_power_base(m, mp).map(|c| (c.r, c.i, c.j));
            if got != oracle {
                disagreements += 1;
            }
            pairs += 1;
        }
    }
    let first = line(
        "6a common power base vs brute force",
        disagreements == 0,
        format!("{pairs} pairs m, m' <= {limit}, {disagreements} disagreements"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut worst: f64 = 0.0;
    let mut missed = 0usize;
    for _ in 0..1000 {
        let blocks: Vec<(f64, usize)> = (0..rng.gen_range(1..6))
            .map(|_| (rng.gen_range(0.1..5.0), rng.gen_range(1..4)))
            .collect();
        let s = rng.gen_range(-3.0f64..3.0).exp();
        let j = AbsJordanForm::new(blocks.clone()).unwrap();
        let jp = AbsJordanForm::new(blocks.iter().map(|&(a, k)| (a * s, k)).collect()).unwrap();
        match jordan_power_compatible(&j, &jp) {
            Some(got) => worst = worst.max((got - s).abs() / s),
            None => missed += 1,
        }
    }
    let second = line(
        "6b planted Jordan scale recovery",
        missed == 0 && worst <= 1e-9,
        format!("1000 cases, {missed} missed, max rel err {worst:.2e} (tol 1e-9)"),
    );

    let corpus = corpus();
    let bases = [2u64, 4, 8, 3, 6];
    let mut asym = 0usize;
    let mut non_reflexive = 0usize;
    let mut checked = 0usize;
    for (a, e) in corpus.iter().enumerate() {
        for &m in &bases {
            if qi_equivalent(e, m, e, m).equivalent != Equivalence::Yes {
                non_reflexive += 1;
            }
            for ep in &corpus[a..] {
                for &mp in &bases {
                    let v = qi_equivalent(e, m, ep, mp);
                    let w = qi_equivalent(ep, mp, e, m);
                    if v.equivalent != w.equivalent {
                        asym += 1;
                    }
                    checked += 1;
                }
            }
        }
    }
    let third = line(
        "6c verdict symmetry and reflexivity",
        asym == 0 && non_reflexive == 0,
        format!("20 structures x {} bases, {checked} ordered pairs: {asym} asymmetric, {non_reflexive} non-reflexive", bases.len()),
    );
    vec![first, second, third]
}

fn catalog_space() -> BoundarySpace {
    BoundarySpace::new(ExpandingStructure::diagonal(&[(1.0, 2), (1.5, 1), (2.0, 1)]).unwrap(), 3).unwrap()
}

fn almost_translation(a: f64) -> BoundaryMap {
    BoundaryMap::AlmostTranslation {
        terms: vec![
            Term { layer: 0, component: 0, source: Source::Coord(2), func: Func::Sine { amplitude: a, frequency: 0.7 } },
            Term { layer: 0, component: 1, source: Source::Tree(1.0), func: Func::ClampedPower { scale: a, theta: 0.5, clamp: 5.0 } },
            Term { layer: 1, component: 0, source: Source::Coord(3), func: Func::Affine { slope: -a, offset: 1.0 } },
        ],
    }
}

fn similarity() -> BoundaryMap {
    let (c, s) = (0.6f64, 0.8f64);
    BoundaryMap::Similarity(SimilarityData {
        shift: 1,
        rotations: Some(vec![vec![vec![c, -s], vec![s, c]], vec![vec![-1.0]], vec![vec![1.0]]]),
        translation: Some(vec![0.5, -1.0, 2.0, 0.25]),
        tree_offset: Some("3:{2:1,-1:2}".parse().unwrap()),
    })
}

fn criterion_7() -> Vec<Outcome> {
    let space = catalog_space();
    let sampler = Sampler::new(7, Window::new(0.01, 100.0).unwrap(), 1000);
    let sim = similarity();
    let at = almost_translation(0.8);
    let at2 = almost_translation(-1.3);
    let bilipschitz = vec![
        ("identity", BoundaryMap::Identity),
        ("dilation", BoundaryMap::dilation(-2)),
        ("similarity", sim.clone()),
        ("almost translation", at.clone()),
        ("similarity then almost translation", sim.compose(&at, &space).unwrap()),
        ("almost translation inverse", at.invert(&space).unwrap()),
    ];
    let mut failed = Vec::new();
    for (name, f) in &bilipschitz {
        if !verify_decomposition(&space, f, &sampler).unwrap().passed {
            failed.push(*name);
        }
    }
    let counter = BoundaryMap::SignRouted { coordinate: 0, offset: "3:{0:1}".parse().unwrap() };
    let rep = verify_decomposition(&space, &counter, &sampler).unwrap();
    let witness_ok = rep.witness.as_ref().is_some_and(|w| w.a.xi == w.b.xi && w.fa_xi != w.fb_xi);
    let first = line(
        "7a decomposition check",
        failed.is_empty() && !rep.passed && witness_ok,
        format!(
            "{} bilipschitz elements, failures {:?}; counterexample rejected={} with witness={witness_ok}",
            bilipschitz.len(),
            failed,
            !rep.passed
        ),
    );

    let mut worst: f64 = 0.0;
    let mut eta_bad = 0usize;
    for f in [BoundaryMap::dilation(2), BoundaryMap::dilation(-1), sim.clone(), sim.compose(&BoundaryMap::dilation(1), &space).unwrap()] {
        let s = f.similarity_ratio(&space).unwrap();
        let est = estimate_bilipschitz(&space, &f, &sampler).unwrap();
        worst = worst.max((est.a_low - s).abs() / s).max((est.b_high - s).abs() / s);
        let qs = estimate_qs_modulus(&space, &f, &sampler, &[1.0 / 3.0, 1.0, 3.0], 0.05).unwrap();
        for b in &qs.bins {
            if let Some(eta) = b.eta {
                if eta > b.hi * (1.0 + 1e-9) || eta < b.lo * (1.0 - 1e-9) {
                    eta_bad += 1;
                }
            }
        }
    }
    let second = line(
        "7b similarity estimators exact",
        worst <= 1e-9 && eta_bad == 0,
        format!("bilipschitz bounds max rel err {worst:.2e} (tol 1e-9); {eta_bad} modulus bins outside t within bin width 0.05"),
    );

    let composites = [
        ("at . at'", at.compose(&at2, &space).unwrap()),
        ("sim . at", sim.compose(&at, &space).unwrap()),
        ("at . sim . at'", at.compose(&sim, &space).unwrap().compose(&at2, &space).unwrap()),
        ("at^-1 . sim", at.invert(&space).unwrap().compose(&sim, &space).unwrap()),
    ];
    let mut bad = Vec::new();
    let mut max_dev: f64 = 0.0;
    for (name, f) in &composites {
        let r = verify_coordinate_form(&space, f, &sampler, 1e-9).unwrap();
        max_dev = max_dev.max(r.max_deviation);
        if !r.passed() || r.samples < 1000 {
            bad.push(*name);
        }
    }
    let third = line(
        "7c composed almost translations keep the coordinate form",
        bad.is_empty(),
        format!("{} compositions x 1000 samples, failures {bad:?}, max deviation {max_dev:.2e} (tol 1e-9)", composites.len()),
    );
    vec![first, second, third]
}

fn criterion_8() -> Outcome {
    let single = BoundarySpace::new(ExpandingStructure::diagonal(&[(1.0, 1)]).unwrap(), 2).unwrap();
    let layered = BoundarySpace::new(ExpandingStructure::diagonal(&[(1.0, 1), (2.0, 1)]).unwrap(), 2).unwrap();
    let sine = BoundaryMap::AlmostTranslation {
        terms: vec![Term { layer: 0, component: 0, source: Source::Coord(1), func: Func::Sine { amplitude: 1.0, frequency: 1.0 } }],
    };
    let sim = BoundaryMap::Similarity(SimilarityData {
        shift: 1,
        translation: Some(vec![1.0, -2.0]),
        tree_offset: Some("2:{0:1}".parse().unwrap()),
        ..Default::default()
    });
    let families: Vec<(&str, &BoundarySpace, BoundaryMap, bool)> = vec![
        ("similarity", &layered, sim.clone(), true),
        ("almost translation", &layered, sine.clone(), true),
        ("similarity . almost translation", &layered, sim.compose(&sine, &layered).unwrap(), true),
        ("power 1/2", &single, BoundaryMap::Power { theta: 0.5 }, false),
        ("tree snowflake 2", &single, BoundaryMap::TreeSnowflake { factor: 2 }, false),
    ];
    let outers = [10.0, 100.0, 1000.0, 10000.0];
    let mut pass = true;
    let mut anomalies = 0;
    let mut parts = Vec::new();
    for (name, space, f, bounded) in &families {
        let p = rigidity_profile(space, f, 8, 0.01, &outers, 2000).unwrap();
        let expected = if *bounded { Trend::Bounded } else { Trend::Diverging };
        let increasing = p.windows.windows(2).all(|w| w[1].bilipschitz_ratio > w[0].bilipschitz_ratio);
        let ok = p.consistent() && p.bilipschitz_trend == expected && (*bounded || increasing);
        if p.anomalous() {
            anomalies += 1;
        }
        pass &= ok;
        let ratios: Vec<String> = p.windows.iter().map(|w| format!("{:.3}", w.bilipschitz_ratio)).collect();
        let etas: Vec<String> = p.windows.iter().map(|w| format!("{:.3}", w.eta_normalized)).collect();
        parts.push(format!(
            "{name}: ratio [{}] {:?}, eta/t [{}] {:?}",
            ratios.join(", "),
            p.bilipschitz_trend,
            etas.join(", "),
            p.eta_trend
        ));
    }
    line(
        "8 rigidity consistency",
        pass && anomalies == 0,
        format!(
            "windows 0.01:10..0.01:10000, bounded = last/first <= 2, diverging = non-decreasing with last/first >= 10 and strictly increasing ratio; {anomalies} anomalies; {}",
            parts.join("; ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let space = BoundarySpace::new(ExpandingStructure::diagonal(&[(1.0, 1), (2.0, 1)]).unwrap(), 2).unwrap();
    let sampler = Sampler::new(9, Window::new(0.1, 10.0).unwrap(), 5);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for shift in [1i64, -1, 2] {
        let f = BoundaryMap::Similarity(SimilarityData {
            shift,
            translation: Some(vec![0.3, -0.7]),
            tree_offset: Some("2:{1:1}".parse().unwrap()),
            ..Default::default()
        });
        let s = 2f64.powi(shift as i32);
        // independent of the library: layers (1, 2) give 1 + 1 + 2
        let analytic = s.powf(1.0 + 1.0 + 2.0);
        let rep = estimate_measure_distortion(&space, &f, &sampler, 200_000).unwrap();
        let samples: usize = rep.boxes.iter().map(|b| b.samples).sum();
        let dev = ((rep.b_low - analytic) / analytic).abs().max(((rep.b_high - analytic) / analytic).abs());
        worst = worst.max(dev);
        parts.push(format!("s={s}: [{:.5}, {:.5}] vs {analytic} ({samples} samples)", rep.b_low, rep.b_high));
    }
    line(
        "9 measure distortion of similarities",
        worst <= 0.01,
        format!("{}; max rel dev {worst:.4} (tol 1%)", parts.join("; ")),
    )
}

#[test]
fn acceptance() {
    let mut all = vec![criterion_1(), criterion_2(), criterion_3()];
    all.extend(criterion_4());
    all.push(criterion_5());
    all.extend(criterion_6());
    all.extend(criterion_7());
    all.push(criterion_8());
    all.push(criterion_9());
    let failed: Vec<&Outcome> = all.iter().filter(|o| !o.pass).collect();
    println!("{} of {} criteria passed", all.len() - failed.len(), all.len());
    for o in &failed {
        eprintln!("failed: {} ({})", o.id, o.detail);
    }
    assert!(failed.is_empty());
}
