use num_bigint::BigInt;
use num_traits::{One, Zero};
use permpack_core::bounds::{
    antilayer_slot, bound_sequence, closed_form_packing, extended_price_bound, price_bound,
    BoundConfig, BoundMode, ForcedPolicy,
};
use permpack_core::layered::{Block, BlockSeq};
use permpack_core::oracle::{brute_force_pn, Extremum};
use permpack_core::perm::FormalCombination;
use permpack_core::poly::build_extended_price_polynomial;
use permpack_core::{Rational, Sequential};
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn f(s: &str) -> FormalCombination {
    s.parse().unwrap()
}

fn blocks(s: &str) -> BlockSeq {
    s.parse().unwrap()
}

/// `Π x_i^{e_i}` exactly.
fn power_product(x: &[Rational], e: &[u32]) -> Rational {
    x.iter()
        .zip(e)
        .fold(Rational::one(), |acc, (b, &k)| acc * num_traits::pow(b.clone(), k as usize))
}

/// All orderings of `items`, without duplicates.
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

fn sorted_pair_strategy() -> impl Strategy<Value = (Vec<Rational>, Vec<u32>, Vec<usize>)> {
    (1usize..=6).prop_flat_map(|k| {
        (
            prop::collection::vec((0i64..=12, 1i64..=6), k),
            prop::collection::vec(0u32..=6, k),
            Just((0..k).collect::<Vec<usize>>()).prop_shuffle(),
        )
            .prop_map(|(x, y, z)| {
                let mut x: Vec<Rational> = x.into_iter().map(|(n, d)| r(n, d)).collect();
                x.sort();
                let mut y = y;
                y.sort_unstable();
                (x, y, z)
            })
    })
}

proptest! {
    #[test]
    fn rearranging_exponents_never_beats_the_sorted_order((x, y, z) in sorted_pair_strategy()) {
        let shuffled: Vec<u32> = z.iter().map(|&i| y[i]).collect();
        prop_assert!(power_product(&x, &shuffled) <= power_product(&x, &y));
    }
}

/// `g_{N,σ}(y, x_1, 0, x_2, …, 0, x_N)`.
fn first_antilayer_objective(sigma: &BlockSeq, n: usize, y: &Rational, x: &[Rational]) -> Rational {
    let g = build_extended_price_polynomial(&sigma.to_permutation(), n).unwrap();
    let mut point = vec![Rational::zero(); 2 * n];
    point[0] = y.clone();
    for (j, v) in x.iter().enumerate() {
        point[2 * j + 1] = v.clone();
    }
    g.evaluate_exact(&point).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swapping_a_descent_of_layer_weights_never_decreases_the_objective(
        choice in 0usize..4,
        extra in 0usize..=2,
        y in 0i64..=10,
        xs in prop::collection::vec(0i64..=10, 5),
        i0 in 0usize..4,
    ) {
        let sigma = blocks(["^2 2", "^3 3", "^2 3", "^3 3 3"][choice]);
        let k = sigma.len() - 1;
        let n = k + extra;
        prop_assume!(n >= 2);
        let i0 = i0 % (n - 1);
        let mut x: Vec<Rational> = xs[..n].iter().map(|&v| r(v, 1)).collect();
        if x[i0] < x[i0 + 1] {
            x.swap(i0, i0 + 1);
        }
        let y = r(y, 1);
        let before = first_antilayer_objective(&sigma, n, &y, &x);
        x.swap(i0, i0 + 1);
        let after = first_antilayer_objective(&sigma, n, &y, &x);
        prop_assert!(before <= after);
    }
}

#[test]
fn extra_layer_slots_do_not_raise_the_first_antilayer_bound() {
    let cfg = BoundConfig::default();
    for spec in ["^2 2", "^3 3"] {
        let sigma = blocks(spec);
        let f = FormalCombination::single(sigma.to_permutation());
        let k = sigma.len() - 1;
        let bound = |n: usize| {
            let forced: Vec<usize> = (1..n).collect();
            extended_price_bound(&f, n, &forced, &cfg, &Sequential).unwrap().value
        };
        for n in [k + 1, k + 2] {
            assert!(bound(n) <= bound(n - 1) + 1e-6, "{spec}, N = {n}");
        }
    }
}

#[test]
fn closed_form_ignores_block_order() {
    for spec in ["^2 2", "^3 3 3", "^2 3", "^3 4 3"] {
        let base = closed_form_packing(&blocks(spec)).unwrap().value;
        for order in orderings(blocks(spec).blocks()) {
            let seq = BlockSeq::new(order).unwrap();
            assert_eq!(closed_form_packing(&seq).unwrap().value, base, "{seq}");
        }
    }
}

#[test]
fn closed_form_matches_the_block_permutation_bound() {
    let cfg = BoundConfig::default();
    for spec in ["^2 2", "^3 3", "2 ^2", "3 ^3 3"] {
        let seq = blocks(spec);
        let seq = if seq.blocks().last().unwrap().anti { seq.reversed() } else { seq };
        let expected = closed_form_packing(&seq).unwrap().value;
        let k = seq.len() - 1;
        let j = antilayer_slot(&seq).unwrap();
        let forced: Vec<usize> = (0..k).filter(|&i| i != j).collect();
        let f = FormalCombination::single(seq.to_permutation());
        let b = extended_price_bound(&f, k, &forced, &cfg, &Sequential).unwrap();
        assert!((b.value - to_f64(&expected)).abs() < 1e-6, "{spec}: {}", b.value);
    }
}

fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap()
}

#[test]
fn lower_bounds_never_exceed_brute_force_maxima() {
    let cfg = BoundConfig::default();
    for spec in ["132", "1243", "2143", "21 + 132"] {
        let f = f(spec);
        let uppers: Vec<f64> = (f.max_pattern_len()..=7)
            .map(|n| to_f64(&brute_force_pn(&f, n, Extremum::Max, false, &Sequential).unwrap().value))
            .collect();
        for n in 1..=4 {
            let lower = price_bound(&f, n, &cfg, &Sequential).unwrap().value;
            for &upper in &uppers {
                assert!(lower - 1e-7 <= upper, "{spec}: L_{n} = {lower} > {upper}");
            }
        }
    }
}

#[test]
fn sequences_are_monotone() {
    let cfg = BoundConfig::default();
    for spec in ["132", "1243", "2143"] {
        let seq = bound_sequence(&f(spec), 5, BoundMode::Pack, ForcedPolicy::None, &cfg, &Sequential)
            .unwrap();
        assert!(seq.monotone, "{spec}: {:?}", seq.diagnostics);
        let ext = bound_sequence(
            &f(spec),
            3,
            BoundMode::PackExtended,
            ForcedPolicy::All,
            &cfg,
            &Sequential,
        )
        .unwrap();
        for (a, b) in seq.entries.iter().zip(&ext.entries) {
            assert!((a.value - b.value).abs() <= 1e-8, "{spec}, n = {}", a.n);
        }
    }
    let min = bound_sequence(&f("21"), 5, BoundMode::Minimize, ForcedPolicy::None, &cfg, &Sequential)
        .unwrap();
    assert!(min.monotone);
    for (i, e) in min.entries.iter().enumerate() {
        assert_eq!(e.exact_value, Some(r(1, i as i64 + 1)));
    }
}
