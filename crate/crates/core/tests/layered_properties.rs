use permpack_core::layered::{
    block_sequence, count_occurrences_layered, enumerate_quasi_blocks, from_layer_sequence,
    layer_sequence, natural_decomposition, quasi_block_count, BlockSeq, LayerSeq,
};
use permpack_core::perm::{count_occurrences, for_each_occurrence, Permutation};

/// Every composition of `n`, in lexicographic order.
fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn layered_perms(max_len: usize) -> Vec<Permutation> {
    (0..=max_len)
        .flat_map(compositions)
        .map(|c| from_layer_sequence(&LayerSeq::new(c).unwrap()))
        .collect()
}

#[test]
fn layer_sequence_round_trips() {
    for sigma in layered_perms(10) {
        let layers = layer_sequence(&sigma).unwrap();
        assert_eq!(from_layer_sequence(&layers), sigma);
    }
}

#[test]
fn quasi_block_count_is_a_product_of_powers_of_two() {
    for sigma in layered_perms(8) {
        let blocks = block_sequence(&sigma).unwrap();
        let expected: u128 = blocks
            .blocks()
            .iter()
            .filter(|b| b.anti)
            .map(|b| 1u128 << (b.len - 1))
            .product();
        let decomps = enumerate_quasi_blocks(&sigma).unwrap();
        assert_eq!(decomps.len() as u128, expected, "{sigma}");
        assert_eq!(quasi_block_count(&blocks), expected);
        assert!(decomps.iter().any(|d| d.coarsen() == blocks && d.items() == blocks.blocks()));
    }
}

#[test]
fn natural_decompositions_partition_the_occurrences() {
    let patterns: Vec<Permutation> =
        layered_perms(5).into_iter().filter(|t| !t.is_empty()).collect();
    for sigma in layered_perms(9) {
        for tau in &patterns {
            let decomps = enumerate_quasi_blocks(tau).unwrap();
            let mut tally = vec![0u64; decomps.len()];
            for_each_occurrence(tau, &sigma, |positions| {
                let d = natural_decomposition(positions, &sigma).unwrap();
                let idx = decomps
                    .iter()
                    .position(|q| *q == d)
                    .unwrap_or_else(|| panic!("{d} is not a decomposition of {tau}"));
                tally[idx] += 1;
                true
            });
            assert_eq!(tally.iter().sum::<u64>(), count_occurrences(tau, &sigma));
        }
    }
}

#[test]
fn block_wise_count_matches_direct_count() {
    let patterns = layered_perms(5);
    for n in 0..=10 {
        for c in compositions(n) {
            let layers = LayerSeq::new(c).unwrap();
            let blocks = BlockSeq::from_layers(&layers);
            let sigma = from_layer_sequence(&layers);
            for tau in &patterns {
                assert_eq!(
                    count_occurrences_layered(tau, &blocks).unwrap(),
                    count_occurrences(tau, &sigma) as u128,
                    "{tau} in {blocks}"
                );
            }
        }
    }
}
