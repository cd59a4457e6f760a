//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use permpack::report::BoundResultDto;
use permpack::Parallel;
use permpack_core::bounds::{
    bound_sequence, closed_form_packing, extended_price_bound, min_mono_value, min_price_bound,
    predicted_extended_witness, price_bound, BoundConfig, BoundMode, ForcedPolicy,
};
use permpack_core::layered::{
    blow_up, count_occurrences_layered, enumerate_quasi_blocks, from_layer_sequence,
    quasi_block_count, Block, BlockSeq, LayerSeq,
};
use permpack_core::oracle::{
    brute_force_pn, brute_force_pn_layered, erdos_szekeres_scan, sandwich_report, Extremum,
    SANDWICH_TOL,
};
use permpack_core::perm::{count_occurrences, density, FormalCombination, Permutation};
use permpack_core::poly::build_extended_price_polynomial;
use permpack_core::simplex::OptimizerConfig;
use permpack_core::{Rational, Sequential};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn f64_of(x: &Rational) -> f64 {
    x.to_f64().unwrap()
}

fn comb(s: &str) -> FormalCombination {
    s.parse().unwrap()
}

fn blocks(s: &str) -> BlockSeq {
    s.parse().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    (1..=n)
        .flat_map(|first| {
            compositions(n - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn layered_upto(max_len: usize) -> Vec<(LayerSeq, Permutation)> {
    (1..=max_len)
        .flat_map(compositions)
        .map(|c| {
            let l = LayerSeq::new(c).unwrap();
            let p = from_layer_sequence(&l);
            (l, p)
        })
        .collect()
}

fn orderings(items: &[Block]) -> Vec<Vec<Block>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out: Vec<Vec<Block>> = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in orderings(&rest) {
            tail.insert(0, head);
            if !out.contains(&tail) {
                out.push(tail);
            }
        }
    }
    out
}

/// Minimization bounds agree with the closed form, and decrease with the order.
fn monotone_sum_minimum(exec: &Parallel) -> Outcome {
    let cfg = BoundConfig::default();
    let cases = [("123 + 321", 2, 3, 3), ("123 + 4321", 2, 3, 4), ("1234 + 4321", 3, 4, 4)];
    let mut details = Vec::new();
    for (spec, n, l, k) in cases {
        let f = comb(spec);
        let closed = f64_of(&min_mono_value(l, k).map_err(|e| e.to_string())?);
        let u = min_price_bound(&f, n, &cfg, exec).map_err(|e| e.to_string())?;
        ensure((u.value - closed).abs() <= 1e-8, || {
            format!("U_{n}({spec}) = {} but the closed form is {closed}", u.value)
        })?;
        let seq = bound_sequence(&f, 6, BoundMode::Minimize, ForcedPolicy::None, &cfg, exec)
            .map_err(|e| e.to_string())?;
        for w in seq.entries.windows(2) {
            ensure(w[1].value <= w[0].value + 1e-7, || {
                format!("U({spec}) increases from n={} to n={}", w[0].n, w[1].n)
            })?;
        }
        details.push(format!("U_{n}({spec}) = {:.10}", u.value));
    }
    Ok(details.join(", ") + "; non-increasing up to n=6")
}

/// The asymmetric case Id_3 + Rev_4 sits strictly above the symmetric guess.
fn asymmetric_minimum(exec: &Parallel) -> Outcome {
    let cfg = BoundConfig::default();
    let exact = min_mono_value(3, 4).map_err(|e| e.to_string())?;
    ensure(exact == r(1, 8) && exact > r(1, 9), || format!("closed form gives {exact}"))?;
    let seq = bound_sequence(&comb("123 + 4321"), 6, BoundMode::Minimize, ForcedPolicy::None, &cfg, exec)
        .map_err(|e| e.to_string())?;
    for e in &seq.entries[1..] {
        ensure((e.value - 0.125).abs() <= 1e-8 && e.value > 1.0 / 9.0, || {
            format!("U_{} = {}", e.n, e.value)
        })?;
    }
    let last = seq.entries.last().unwrap();
    Ok(format!("U_2..U_6 = 1/8 (U_6 = {:.12}) > 1/9", last.value))
}

/// Closed forms for one antilayer, and their recovery by the optimizer.
fn antilayer_closed_form(exec: &Parallel) -> Outcome {
    let cfg = BoundConfig::default();
    let mut details = Vec::new();
    for (spec, expected) in [("^2 2", r(3, 8)), ("^3 3", r(5, 16))] {
        let seq = blocks(spec);
        let closed = closed_form_packing(&seq).map_err(|e| e.to_string())?.value;
        ensure(closed == expected, || format!("{spec}: closed form {closed}, expected {expected}"))?;
        let k = seq.len() - 1;
        let forced: Vec<usize> = (1..k).collect();
        let f = FormalCombination::single(seq.to_permutation());
        let b = extended_price_bound(&f, k, &forced, &cfg, exec).map_err(|e| e.to_string())?;
        ensure((b.value - f64_of(&expected)).abs() <= 1e-6, || {
            format!("{spec}: extended bound {} vs {expected}", b.value)
        })?;
        let predicted = predicted_extended_witness(&seq).ok_or("no predicted witness")?;
        for (got, want) in b.witness.coords().iter().zip(&predicted) {
            ensure((got - f64_of(want)).abs() <= 1e-6, || {
                format!("{spec}: witness {:?} vs predicted {predicted:?}", b.witness.coords())
            })?;
        }
        details.push(format!("{spec} -> {expected} (bound {:.9})", b.value));
    }
    Ok(details.join(", "))
}

/// The closed form does not depend on the order of the blocks.
fn block_order_invariance(_: &Parallel) -> Outcome {
    let mut checked = 0;
    for spec in ["^2 2", "^3 3 3"] {
        let base = closed_form_packing(&blocks(spec)).map_err(|e| e.to_string())?.value;
        for order in orderings(blocks(spec).blocks()) {
            let seq = BlockSeq::new(order).map_err(|e| e.to_string())?;
            let v = closed_form_packing(&seq).map_err(|e| e.to_string())?.value;
            ensure(v == base, || format!("{seq}: {v} differs from {base}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} orderings agree exactly"))
}

/// Price bounds are non-decreasing and the all-pinned extended bound equals
/// the plain one.
fn price_bound_monotonicity(exec: &Parallel) -> Outcome {
    let cfg = BoundConfig::default();
    let mut details = Vec::new();
    for spec in ["132", "1243", "2143"] {
        let f = comb(spec);
        let mut prev = f64::NEG_INFINITY;
        let mut values = Vec::new();
        for n in 1..=5 {
            let plain = price_bound(&f, n, &cfg, exec).map_err(|e| e.to_string())?;
            let all: Vec<usize> = (0..n).collect();
            let pinned = extended_price_bound(&f, n, &all, &cfg, exec).map_err(|e| e.to_string())?;
            ensure(plain.value >= prev - 1e-7, || format!("{spec}: L_{n} = {} < {prev}", plain.value))?;
            ensure((plain.value - pinned.value).abs() <= 1e-8, || {
                format!("{spec}: L_{n} = {} but pinned extended = {}", plain.value, pinned.value)
            })?;
            prev = plain.value;
            values.push(format!("{:.6}", plain.value));
        }
        details.push(format!("{spec}: [{}]", values.join(", ")));
    }
    Ok(details.join("; "))
}

/// Some layered permutation attains the maximum over all permutations.
fn layered_extremizer(exec: &Parallel) -> Outcome {
    let mut checked = 0;
    for spec in ["132", "21 + 132", "2143"] {
        let f = comb(spec);
        for n in 1..=7 {
            let global = brute_force_pn(&f, n, Extremum::Max, false, exec).map_err(|e| e.to_string())?;
            let layered = brute_force_pn_layered(&f, n, Extremum::Max, exec).map_err(|e| e.to_string())?;
            ensure(global.value == layered.value, || {
                format!("{spec}, N={n}: global {} vs layered {}", global.value, layered.value)
            })?;
            let w = &layered.witnesses[0];
            ensure(permpack_core::perm::combination_density(&f, w).exact == global.value, || {
                format!("{spec}, N={n}: witness {w} does not attain {}", global.value)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (f, N) pairs, exact equality"))
}

/// Monotone subsequences are unavoidable at length 5 but not at 4.
fn monotone_subsequences(exec: &Parallel) -> Outcome {
    let s5 = erdos_szekeres_scan(5, 2, exec).map_err(|e| e.to_string())?;
    ensure(s5.all_contain, || format!("S_5 counterexample {:?}", s5.counterexample))?;
    let s4 = erdos_szekeres_scan(4, 2, exec).map_err(|e| e.to_string())?;
    let c = s4.counterexample.ok_or("no counterexample in S_4")?;
    let min4 = brute_force_pn(&comb("123 + 321"), 4, Extremum::Min, false, exec).map_err(|e| e.to_string())?;
    ensure(min4.value.is_zero(), || format!("min over S_4 is {}", min4.value))?;
    Ok(format!("S_5 all contain; S_4 counterexample {c}; minimum over S_4 = 0"))
}

/// Block-wise counting equals direct counting, and decomposition counts
/// follow the product formula.
fn oracle_equivalence(_: &Parallel) -> Outcome {
    let patterns: Vec<Permutation> = layered_upto(5).into_iter().map(|(_, p)| p).collect();
    let hosts = layered_upto(9);
    let mut pairs = 0u64;
    for (layers, sigma) in &hosts {
        let b = BlockSeq::from_layers(layers);
        for tau in &patterns {
            let fast = count_occurrences_layered(tau, &b).map_err(|e| e.to_string())?;
            let slow = count_occurrences(tau, sigma) as u128;
            ensure(fast == slow, || format!("{tau} in {sigma}: {fast} vs {slow}"))?;
            pairs += 1;
        }
    }
    for (layers, sigma) in hosts.iter().chain(layered_upto(5).iter()) {
        let b = BlockSeq::from_layers(layers);
        let expected: u128 = b.blocks().iter().filter(|x| x.anti).map(|x| 1u128 << (x.len - 1)).product();
        let listed = enumerate_quasi_blocks(sigma).map_err(|e| e.to_string())?.len() as u128;
        ensure(listed == expected && quasi_block_count(&b) == expected, || {
            format!("{sigma}: {listed} decompositions, expected {expected}")
        })?;
    }
    Ok(format!("{pairs} (pattern, host) pairs and {} decomposition counts", hosts.len()))
}

/// Densities in blow-ups approach the extended polynomial.
fn blow_up_convergence(_: &Parallel) -> Outcome {
    let tau = Permutation::identity(2);
    let g = build_extended_price_polynomial(&tau, 1).map_err(|e| e.to_string())?;
    let limit = g.evaluate_exact(&[r(1, 3), r(2, 3)]).map_err(|e| e.to_string())?;
    let entries = [Block::antilayer(1), Block::layer(2)];
    let mut worst = 0.0f64;
    for m in 2..=20 {
        let d = density(&tau, &blow_up(&entries, m)).exact;
        let gap = (d - &limit).abs();
        let bound = r(2, 3 * m as i64);
        ensure(gap <= bound, || format!("m={m}: gap {gap} exceeds {bound}"))?;
        worst = worst.max(f64_of(&gap) * m as f64);
    }
    Ok(format!("limit {limit}; max m*gap = {worst:.6} <= 2/3"))
}

/// The sandwich around p(1243) contains 3/8 and never inverts.
fn sandwich_soundness(exec: &Parallel) -> Outcome {
    let cfg = BoundConfig::default();
    let f = comb("1243");
    let s = sandwich_report(&f, 1, 7, &cfg, exec).map_err(|e| e.to_string())?;
    ensure(s.contains(&r(3, 8), SANDWICH_TOL), || {
        format!("[{}, {}] misses 3/8", s.lower, s.upper.value)
    })?;
    for n in 1..=3 {
        for big_n in 4..=7 {
            let s = sandwich_report(&f, n, big_n, &cfg, exec).map_err(|e| e.to_string())?;
            ensure(s.lower <= s.upper_f64() + SANDWICH_TOL, || {
                format!("n={n}, N={big_n}: {} > {}", s.lower, s.upper.value)
            })?;
        }
    }
    let s = sandwich_report(&f, 1, 7, &cfg, exec).map_err(|e| e.to_string())?;
    Ok(format!("[{:.9}, {}] contains 3/8", s.lower, s.upper.value))
}

fn power_product(x: &[Rational], e: &[u32]) -> Rational {
    x.iter()
        .zip(e)
        .fold(Rational::one(), |acc, (b, &k)| acc * num_traits::pow(b.clone(), k as usize))
}

fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let mut w: Vec<u32> = (1..=n as u32).collect();
    w.shuffle(rng);
    Permutation::new(w).unwrap()
}

/// Rearrangement inequality, averaging identity, optimizer determinism.
fn property_suites(exec: &Parallel) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..1000 {
        let k = rng.random_range(1..=6);
        let mut x: Vec<Rational> = (0..k)
            .map(|_| r(rng.random_range(0..=12), rng.random_range(1..=6)))
            .collect();
        x.sort();
        let mut y: Vec<u32> = (0..k).map(|_| rng.random_range(0..=6)).collect();
        y.sort_unstable();
        let mut z = y.clone();
        z.shuffle(&mut rng);
        ensure(power_product(&x, &z) <= power_product(&x, &y), || {
            format!("instance {i}: x={x:?}, y={y:?}, z={z:?}")
        })?;
    }
    for i in 0..200 {
        let host_len = rng.random_range(2..=9);
        let sigma = random_perm(&mut rng, host_len);
        let tau_len = rng.random_range(1..host_len.min(5));
        let tau = random_perm(&mut rng, tau_len);
        let total: Rational = (0..host_len)
            .map(|j| density(&tau, &sigma.delete(j).unwrap()).exact)
            .sum();
        let mean = total / Rational::from_integer(BigInt::from(host_len));
        let direct = density(&tau, &sigma).exact;
        ensure(mean == direct, || format!("instance {i}: {tau} in {sigma}: {mean} vs {direct}"))?;
    }
    let cfg = BoundConfig {
        optimizer: OptimizerConfig {
            seed: 11,
            ..OptimizerConfig::default()
        },
        ..BoundConfig::default()
    };
    for spec in ["132", "1243 + 2143", "123 + 321"] {
        let f = comb(spec);
        let render = |mode: BoundMode, exec: &dyn Fn() -> Result<permpack_core::bounds::BoundResult, permpack_core::Error>| {
            let res = exec().map_err(|e| e.to_string())?;
            debug_assert_eq!(res.mode, mode);
            let dto = BoundResultDto::new(&res);
            dto.validate().map_err(|e| e.to_string())?;
            serde_json::to_string(&dto).map_err(|e| e.to_string())
        };
        let pack_par = || price_bound(&f, 4, &cfg, exec);
        let pack_seq = || price_bound(&f, 4, &cfg, &Sequential);
        let min_par = || min_price_bound(&f, 4, &cfg, exec);
        let a = render(BoundMode::Pack, &pack_par)?;
        let b = render(BoundMode::Pack, &pack_par)?;
        let c = render(BoundMode::Pack, &pack_seq)?;
        ensure(a == b && b == c, || format!("{spec}: pack runs differ"))?;
        let a = render(BoundMode::Minimize, &min_par)?;
        let b = render(BoundMode::Minimize, &min_par)?;
        ensure(a == b, || format!("{spec}: min runs differ"))?;
    }
    Ok("1000 rearrangement instances, 200 averaging instances, identical repeated runs".into())
}

type Criterion = fn(&Parallel) -> Outcome;

fn main() -> ExitCode {
    let exec = match Parallel::from_env() {
        Ok(e) => e,
        Err(e) => {
            eprintln!("cannot start executor: {e}");
            return ExitCode::FAILURE;
        }
    };
    let criteria: [(&str, Criterion); 11] = [
        ("monotone-sum minimum", monotone_sum_minimum),
        ("asymmetric minimum", asymmetric_minimum),
        ("antilayer closed form", antilayer_closed_form),
        ("block-order invariance", block_order_invariance),
        ("price-bound monotonicity", price_bound_monotonicity),
        ("layered extremizer", layered_extremizer),
        ("monotone subsequences", monotone_subsequences),
        ("oracle equivalence", oracle_equivalence),
        ("blow-up convergence", blow_up_convergence),
        ("sandwich soundness", sandwich_soundness),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&exec)))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
