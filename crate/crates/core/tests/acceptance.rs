//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use subgray_core::grassmann::{build_general, RandomChoices, ReplayChoices};
use subgray_core::projective::{
    build_full_n1, build_full_n3, build_full_n5, expand_path, fixture_code_2_2, nonexistence_certificate,
    search_necklace_path, total_subspaces, verify_subspace,
};
use subgray_core::qcombin::{count_lower_bound, gaussian, gaussian_product_tree, q_pow};
use subgray_core::{build_simple, dual_code, verify_gray, BigUint, Codec, ExtensionField, Field, Subspace};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(t)
}

fn gf(q: u64) -> Field {
    Field::with_order(q).unwrap()
}

/// Counts subspaces level by level: every `(k-1)`-subspace is grown by
/// every vector outside it and the distinct canonical spans are collected.
/// Stops before a level whose work would exceed `budget` span computations.
fn enumerate_levels(f: &Field, n: usize, budget: usize) -> Vec<usize> {
    let q = f.q() as usize;
    let vectors: Vec<Vec<u32>> = (0..q.pow(n as u32))
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let d = (c % q) as u32;
                    c /= q;
                    d
                })
                .collect()
        })
        .collect();
    let mut level: HashSet<Subspace> = HashSet::from([Subspace::zero(f, n)]);
    let mut counts = vec![1];
    for _ in 0..n {
        if level.len() * vectors.len() > budget {
            break;
        }
        let mut next = HashSet::new();
        for s in &level {
            for v in &vectors {
                if !s.contains(v).unwrap() {
                    let mut rows = s.rows();
                    rows.push(v.clone());
                    next.insert(Subspace::from_rows(f, n, &rows).unwrap());
                }
            }
        }
        counts.push(next.len());
        level = next;
    }
    counts
}

/// Sum over pivot sets `p_0 < ... < p_(k-1)` of the number of reduced
/// echelon matrices with those pivots.
fn schubert_count(n: usize, k: usize, q: u64) -> BigUint {
    // row i of the echelon matrix is free at the non-pivot columns after p_i
    let mut total = BigUint::zero();
    let mut pivots: Vec<usize> = (0..k).collect();
    loop {
        let free: usize = pivots
            .iter()
            .enumerate()
            .map(|(i, &p)| (n - 1 - p) - (k - 1 - i))
            .sum();
        total += q_pow(q, free);
        let Some(i) = (0..k).rev().find(|&i| pivots[i] < n - k + i) else {
            return total;
        };
        pivots[i] += 1;
        for j in i + 1..k {
            pivots[j] = pivots[j - 1] + 1;
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    ensure(gaussian(4, 2, 2).unwrap() == BigUint::from(35u32), || "[4,2]_2 != 35".into())?;
    ensure(gaussian(2, 1, 3).unwrap() == BigUint::from(4u32), || "[2,1]_3 != 4".into())?;
    let mut identities = 0;
    for q in [2u64, 3, 4, 5, 8] {
        for n in 0..=12 {
            for k in 0..=n {
                let g = gaussian(n, k, q).unwrap();
                ensure(g == gaussian(n, n - k, q).unwrap(), || format!("symmetry ({n},{k};{q})"))?;
                ensure(g == gaussian_product_tree(n, k, q).unwrap(), || format!("product tree ({n},{k};{q})"))?;
                if 1 <= k && k < n {
                    let rhs = gaussian(n - 1, k, q).unwrap() + q_pow(q, n - k) * gaussian(n - 1, k - 1, q).unwrap();
                    ensure(g == rhs, || format!("recurrence ({n},{k};{q})"))?;
                }
                identities += 1;
            }
        }
    }
    let mut enumerated = 0;
    let mut cells = 0;
    for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32] {
        let f = gf(q);
        let mut n = 0;
        while q.pow(n as u32) <= 1024 {
            for k in 0..=n {
                let g = gaussian(n, k, q).unwrap();
                ensure(g == schubert_count(n, k, q), || format!("cell count ({n},{k};{q})"))?;
                cells += 1;
            }
            for (k, &count) in enumerate_levels(&f, n, 300_000).iter().enumerate() {
                let g = gaussian(n, k, q).unwrap();
                ensure(g == BigUint::from(count), || format!("enumeration ({n},{k};{q}): {count} vs {g}"))?;
                enumerated += 1;
            }
            n += 1;
        }
    }
    let t = within(start, Duration::from_secs(10))?;
    Ok(format!(
        "{identities} identity checks, {cells} cell-count and {enumerated} enumeration oracles, {t:.2?}"
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut codes = 0;
    let mut items = 0;
    for q in [2u64, 3, 4] {
        let f = gf(q);
        for n in 0..=6 {
            for k in 0..=n {
                let s = build_simple(n, k, &f).map_err(|e| e.to_string())?;
                let r = verify_gray(&s);
                ensure(r.is_optimal_gray(), || format!("({n},{k};{q}): {r:?}"))?;
                ensure(s.cyclic && r.first_simple && r.first_last_simple == Some(true), || {
                    format!("({n},{k};{q}): cyclic/simplicity flags")
                })?;
                codes += 1;
                items += s.len();
            }
        }
    }
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("{codes} codes, {items} subspaces verified, {t:.2?}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let limit = BigUint::from(10_000u32);
    let mut sets = 0;
    let mut words = 0u64;
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let f = gf(q);
        for n in 0..=13 {
            for k in 0..=n {
                let c = Codec::new(&f, n, k).map_err(|e| e.to_string())?;
                if *c.len() > limit {
                    continue;
                }
                let walk = build_simple(n, k, &f).map_err(|e| e.to_string())?;
                for (m, item) in walk.items.iter().enumerate() {
                    let m = BigUint::from(m);
                    let w = c.encode(&m).map_err(|e| e.to_string())?;
                    ensure(&w == item, || format!("({n},{k};{q}) encode({m}) differs from the code"))?;
                    let d = c.decode(&w).map_err(|e| e.to_string())?;
                    let d_fast = c.decode_fast(&w).map_err(|e| e.to_string())?;
                    ensure(d == m && d_fast == m, || format!("({n},{k};{q}) m={m}: decode {d}, fast {d_fast}"))?;
                }
                sets += 1;
                words += walk.len() as u64;
            }
        }
    }
    let t = within(start, Duration::from_secs(120))?;
    Ok(format!("{sets} parameter sets, {words} round trips, {t:.2?}"))
}

fn criterion_4() -> Outcome {
    let mut checked = 0;
    let mut codes = Vec::new();
    for q in [2u64, 3] {
        for n in 0..=5 {
            for k in 0..=n {
                codes.push(build_simple(n, k, &gf(q)).unwrap());
            }
        }
    }
    for seed in 0..10 {
        codes.push(build_general(4, 2, &gf(2), &mut RandomChoices::new(seed)).unwrap());
        codes.push(build_general(4, 1, &gf(3), &mut RandomChoices::new(seed)).unwrap());
    }
    for s in &codes {
        ensure(verify_gray(s).is_optimal_gray() && s.cyclic, || format!("input ({},{}) not optimal", s.n, s.k))?;
        let d = dual_code(s);
        let r = verify_gray(&d);
        ensure(d.k == s.n - s.k && d.cyclic && r.is_optimal_gray(), || {
            format!("dual of ({},{};{}) fails: {r:?}", s.n, s.k, s.field.q())
        })?;
        checked += 1;
    }
    Ok(format!("{checked} duals verified as optimal cyclic codes"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let s = build_full_n1(&gf(2));
    ensure(s.len() == 2 && verify_subspace(&s).is_optimal_gray(), || "n = 1".into())?;
    for q in [2u64, 3, 4] {
        let f = gf(q);
        let ext = ExtensionField::new(&f, 3).map_err(|e| e.to_string())?;
        let path = search_necklace_path(&ext).map_err(|e| e.to_string())?;
        let middle = expand_path(&ext, &path.reps, path.step).map_err(|e| e.to_string())?;
        ensure(middle.len() as u64 == 2 * (q * q + q + 1), || format!("middle levels length for q = {q}"))?;
        ensure(verify_subspace(&middle).is_gray(), || format!("middle levels code for q = {q}"))?;
        let s = build_full_n3(&f).map_err(|e| e.to_string())?;
        let r = verify_subspace(&s);
        ensure(s.len() as u64 == 2 * q * q + 2 * q + 4 && r.is_optimal_gray(), || format!("(3;{q}): {r:?}"))?;
        lines.push(format!("(3;{q}) {}", s.len()));
    }
    for q in [2u64, 3] {
        let s = build_full_n5(&gf(q)).map_err(|e| e.to_string())?;
        let r = verify_subspace(&s);
        ensure(BigUint::from(s.len()) == total_subspaces(5, q) && r.is_optimal_gray(), || {
            format!("(5;{q}): {r:?}")
        })?;
        lines.push(format!("(5;{q}) {}", s.len()));
    }
    let t = within(start, Duration::from_secs(300))?;
    Ok(format!("(1;2) 2, {}, {t:.2?}", lines.join(", ")))
}

fn criterion_6() -> Outcome {
    let mut count = 0;
    for m in 1..=6 {
        for q in 2..=9u64 {
            if !subgray_core::field::split_prime_power(q).is_some() {
                continue;
            }
            let r = nonexistence_certificate(2 * m, q).map_err(|e| e.to_string())?;
            ensure(r.cyclic_excluded() && r.ratio_identity && r.ratio_exceeds_one, || {
                format!("(n,q) = ({},{q}): {r:?}", 2 * m)
            })?;
            let deficit_one = r.deficit() == Some(BigUint::from(1u32));
            ensure(deficit_one == (2 * m == 2 && q == 2), || format!("deficit at ({},{q})", 2 * m))?;
            count += 1;
        }
    }
    let fixture = fixture_code_2_2();
    let r = verify_subspace(&fixture);
    ensure(!fixture.cyclic && !r.wrap_checked && r.is_optimal_gray(), || format!("fixture: {r:?}"))?;
    Ok(format!("{count} certificates, non-cyclic (2;2) fixture verified"))
}

/// Rotation- and direction-free key of a cyclic sequence.
fn cycle_key(items: &[Subspace]) -> Vec<Subspace> {
    let len = items.len();
    let start = (0..len).min_by(|&a, &b| items[a].cmp(&items[b])).unwrap();
    let forward: Vec<Subspace> = (0..len).map(|i| items[(start + i) % len].clone()).collect();
    let backward: Vec<Subspace> = (0..len).map(|i| items[(start + len - i) % len].clone()).collect();
    forward.min(backward)
}

fn criterion_7() -> Outcome {
    for (n, q) in [(3, 2), (5, 3), (8, 2), (4, 7)] {
        ensure(count_lower_bound(n, 0, q).unwrap() == BigUint::from(1u32), || format!("k = 0 at n = {n}"))?;
        ensure(count_lower_bound(n, n, q).unwrap() == BigUint::from(1u32), || format!("k = n at n = {n}"))?;
    }
    let f = gf(2);
    let mut sequences = HashSet::new();
    let mut cycles = HashSet::new();
    let mut leaves = 0;
    let mut script = Vec::new();
    loop {
        let mut src = ReplayChoices::new(script);
        let code = build_general(3, 1, &f, &mut src).map_err(|e| e.to_string())?;
        ensure(verify_gray(&code).is_optimal_gray(), || "census produced an invalid code".into())?;
        cycles.insert(cycle_key(&code.items));
        sequences.insert(code.items);
        leaves += 1;
        match src.next_script() {
            Some(s) => script = s,
            None => break,
        }
    }
    let bound = count_lower_bound(3, 1, 2).unwrap();
    ensure(BigUint::from(cycles.len()) >= bound, || {
        format!("{} distinct Hamiltonian cycles < bound {bound}", cycles.len())
    })?;
    Ok(format!(
        "{leaves} choice paths, {} distinct sequences, {} distinct Hamiltonian cycles >= bound {bound}",
        sequences.len(),
        cycles.len()
    ))
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn time_decodes(n: usize, samples: usize, rng: &mut StdRng) -> Result<(Duration, Duration), String> {
    let c = Codec::new(&gf(2), n, 4).map_err(|e| e.to_string())?;
    let bits = c.len().bits();
    let mut plain = Vec::new();
    let mut fast = Vec::new();
    for _ in 0..samples {
        let m = loop {
            let bytes: Vec<u8> = (0..bits.div_ceil(8)).map(|_| rng.gen()).collect();
            let m = BigUint::from_bytes_le(&bytes) % (BigUint::from(1u32) << bits);
            if m < *c.len() {
                break m;
            }
        };
        let w = c.encode(&m).map_err(|e| e.to_string())?;
        let t = Instant::now();
        let d = c.decode(&w).map_err(|e| e.to_string())?;
        plain.push(t.elapsed());
        let t = Instant::now();
        let d_fast = c.decode_fast(&w).map_err(|e| e.to_string())?;
        fast.push(t.elapsed());
        ensure(d == m && d_fast == m, || format!("round trip failed at n = {n}"))?;
    }
    Ok((median(plain), median(fast)))
}

fn criterion_8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let start = Instant::now();
    let mut medians = Vec::new();
    for n in [16, 32, 64, 128] {
        medians.push((n, time_decodes(n, 41, &mut rng)?.0));
    }
    within(start, Duration::from_secs(60))?;
    let table: Vec<String> = medians.iter().map(|(n, t)| format!("n={n}: {t:.1?}")).collect();
    ensure(medians.windows(2).all(|w| w[0].1 <= w[1].1), || format!("decode medians not monotone: {table:?}"))?;
    let start = Instant::now();
    let (plain, fast) = time_decodes(256, 41, &mut rng)?;
    within(start, Duration::from_secs(60))?;
    ensure(fast <= plain, || format!("n=256: decode_fast {fast:.1?} > decode {plain:.1?}"))?;
    Ok(format!("{}; n=256: decode {plain:.1?}, decode_fast {fast:.1?}", table.join(", ")))
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("Gaussian coefficients", criterion_1),
        ("Gray construction", criterion_2),
        ("codec bijectivity", criterion_3),
        ("duality", criterion_4),
        ("projective constructions", criterion_5),
        ("nonexistence certificates", criterion_6),
        ("count lower bound", criterion_7),
        ("decode scaling", criterion_8),
    ];
    // optional criterion numbers on the command line select a subset
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !selected.is_empty() && !selected.contains(&(i + 1)) {
            continue;
        }
        match check() {
            Ok(detail) => println!("criterion {} ({name}): PASS - {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL - {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
