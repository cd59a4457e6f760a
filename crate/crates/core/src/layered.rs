//! Layered permutations and their decompositions.
//!
//! A layered permutation is an increasing sequence of decreasing runs of
//! consecutive values. It is described by its layer sequence `(ℓ₁,…,ℓ_k)`, or by
//! its block sequence in which maximal runs of length-1 layers are merged into
//! antilayers (written `^a`).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::perm::{check_index_set, Permutation};
use crate::util::binomial_u128;
use crate::{Error, Result};

/// Refuse to materialize more quasi-block decompositions than this.
pub const MAX_QUASI_BLOCK_DECOMPOSITIONS: u128 = 1 << 20;

/// Layer lengths `(ℓ₁,…,ℓ_k)`, all positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LayerSeq(Vec<usize>);

impl LayerSeq {
    pub fn new(lengths: Vec<usize>) -> Result<Self> {
        if lengths.contains(&0) {
            return Err(Error::Parse("layer lengths must be positive".into()));
        }
        Ok(LayerSeq(lengths))
    }

    pub fn lengths(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn to_permutation(&self) -> Permutation {
        from_layer_sequence(self)
    }
}

/// A block (or, with zeros allowed, a blow-up entry): a layer of length ≥ 2
/// or an antilayer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub len: usize,
    pub anti: bool,
}

impl Block {
    pub fn layer(len: usize) -> Self {
        Block { len, anti: false }
    }

    pub fn antilayer(len: usize) -> Self {
        Block { len, anti: true }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.anti {
            write!(f, "^{}", self.len)
        } else {
            write!(f, "{}", self.len)
        }
    }
}

/// The block decomposition of a layered permutation.
///
/// Invariants: every layer block has length ≥ 2, every antilayer has length
/// ≥ 1 and no two antilayers are adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockSeq(Vec<Block>);

impl BlockSeq {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        for (i, b) in blocks.iter().enumerate() {
            if b.len == 0 {
                return Err(Error::Parse(format!("block {} has length 0", i + 1)));
            }
            if !b.anti && b.len < 2 {
                return Err(Error::Parse(format!(
                    "layer block {} has length 1; write it as an antilayer ^1",
                    i + 1
                )));
            }
            if i > 0 && b.anti && blocks[i - 1].anti {
                return Err(Error::Parse(format!(
                    "antilayers {} and {} are adjacent",
                    i,
                    i + 1
                )));
            }
        }
        Ok(BlockSeq(blocks))
    }

    /// Groups a layer sequence into blocks.
    pub fn from_layers(layers: &LayerSeq) -> Self {
        let mut blocks: Vec<Block> = Vec::new();
        for &len in layers.lengths() {
            if len == 1 {
                match blocks.last_mut() {
                    Some(last) if last.anti => last.len += 1,
                    _ => blocks.push(Block::antilayer(1)),
                }
            } else {
                blocks.push(Block::layer(len));
            }
        }
        BlockSeq(blocks)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|b| b.len).sum()
    }

    pub fn layers(&self) -> LayerSeq {
        LayerSeq(expand_layers(&self.0))
    }

    pub fn to_permutation(&self) -> Permutation {
        from_layer_sequence(&self.layers())
    }

    pub fn reversed(&self) -> BlockSeq {
        BlockSeq(self.0.iter().rev().copied().collect())
    }
}

fn expand_layers(blocks: &[Block]) -> Vec<usize> {
    let mut layers = Vec::new();
    for b in blocks {
        if b.anti {
            layers.extend(core::iter::repeat_n(1, b.len));
        } else if b.len > 0 {
            layers.push(b.len);
        }
    }
    layers
}

impl fmt::Display for BlockSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_items(f, &self.0)
    }
}

fn write_items(f: &mut fmt::Formatter<'_>, items: &[Block]) -> fmt::Result {
    for (i, b) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{b}")?;
    }
    Ok(())
}

/// Parses whitespace- or comma-separated tokens; a `^` prefix marks an
/// antilayer, e.g. `3 ^2 2 ^2`.
pub fn parse_blocks(text: &str) -> Result<Vec<Block>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|tok| {
            let (anti, digits) = match tok.strip_prefix('^') {
                Some(rest) => (true, rest),
                None => (false, tok),
            };
            let len: usize = digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad block token {tok:?}")))?;
            Ok(Block { len, anti })
        })
        .collect()
}

impl FromStr for BlockSeq {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        BlockSeq::new(parse_blocks(text)?)
    }
}

impl FromStr for LayerSeq {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let lengths = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad layer length {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        LayerSeq::new(lengths)
    }
}

/// One quasi-block: a layer of length ≥ 2 (`anti = false`) or an antilayeroid.
pub type QuasiBlock = Block;

/// A quasi-block decomposition. Unlike [`BlockSeq`], consecutive antilayeroids
/// are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuasiBlockSeq(Vec<QuasiBlock>);

impl QuasiBlockSeq {
    pub fn new(items: Vec<QuasiBlock>) -> Result<Self> {
        for (i, q) in items.iter().enumerate() {
            if q.len == 0 || (!q.anti && q.len < 2) {
                return Err(Error::Parse(format!("invalid quasi-block {} ({q})", i + 1)));
            }
        }
        Ok(QuasiBlockSeq(items))
    }

    pub fn items(&self) -> &[QuasiBlock] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|b| b.len).sum()
    }

    /// Merges adjacent antilayeroids back into blocks.
    pub fn coarsen(&self) -> BlockSeq {
        let mut blocks: Vec<Block> = Vec::new();
        for q in &self.0 {
            match blocks.last_mut() {
                Some(last) if last.anti && q.anti => last.len += q.len,
                _ => blocks.push(*q),
            }
        }
        BlockSeq(blocks)
    }
}

impl FromStr for QuasiBlockSeq {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        QuasiBlockSeq::new(parse_blocks(text)?)
    }
}

impl fmt::Display for QuasiBlockSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_items(f, &self.0)
    }
}

fn not_layered(sigma: &Permutation) -> Error {
    Error::NotLayered(format!("{sigma}"))
}

/// The unique layer decomposition of `σ`.
pub fn layer_sequence(sigma: &Permutation) -> Result<LayerSeq> {
    let word = sigma.word();
    let mut layers = Vec::new();
    let mut i = 0;
    while i < word.len() {
        // the values before position i are exactly 1..=i
        let top = word[i] as usize;
        if top <= i {
            return Err(not_layered(sigma));
        }
        let len = top - i;
        if i + len > word.len() {
            return Err(not_layered(sigma));
        }
        for t in 0..len {
            if word[i + t] as usize != top - t {
                return Err(not_layered(sigma));
            }
        }
        layers.push(len);
        i += len;
    }
    Ok(LayerSeq(layers))
}

pub fn is_layered(sigma: &Permutation) -> bool {
    layer_sequence(sigma).is_ok()
}

pub fn from_layer_sequence(layers: &LayerSeq) -> Permutation {
    let mut word = Vec::with_capacity(layers.total());
    let mut base = 0u32;
    for &len in layers.lengths() {
        let len = len as u32;
        word.extend((base + 1..=base + len).rev());
        base += len;
    }
    Permutation::from_word_unchecked(word)
}

pub fn block_sequence(sigma: &Permutation) -> Result<BlockSeq> {
    Ok(BlockSeq::from_layers(&layer_sequence(sigma)?))
}

/// Compositions of `a`, starting with `(a)` and ending with `(1,…,1)`.
fn antilayer_splits(a: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=remaining).rev() {
            prefix.push(part);
            rec(remaining - part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(a, &mut Vec::new(), &mut out);
    out
}

/// `|𝔔_σ| = Π 2^(a−1)` over the antilayer lengths `a`.
pub fn quasi_block_count(blocks: &BlockSeq) -> u128 {
    blocks
        .blocks()
        .iter()
        .filter(|b| b.anti)
        .map(|b| 1u128.checked_shl(b.len as u32 - 1).unwrap_or(u128::MAX))
        .fold(1u128, |acc, c| acc.saturating_mul(c))
}

/// All quasi-block decompositions of the permutation with block sequence
/// `blocks`, beginning with the block sequence itself.
pub fn quasi_block_decompositions(blocks: &BlockSeq) -> Result<Vec<QuasiBlockSeq>> {
    let total = quasi_block_count(blocks);
    if total > MAX_QUASI_BLOCK_DECOMPOSITIONS {
        return Err(Error::CapExceeded {
            what: "quasi-block decompositions",
            value: total,
            cap: MAX_QUASI_BLOCK_DECOMPOSITIONS,
        });
    }
    let mut out: Vec<Vec<QuasiBlock>> = alloc::vec![Vec::new()];
    for b in blocks.blocks() {
        if b.anti {
            let splits = antilayer_splits(b.len);
            let mut next = Vec::with_capacity(out.len() * splits.len());
            for prefix in &out {
                for split in &splits {
                    let mut items = prefix.clone();
                    items.extend(split.iter().map(|&l| Block::antilayer(l)));
                    next.push(items);
                }
            }
            out = next;
        } else {
            for items in &mut out {
                items.push(*b);
            }
        }
    }
    Ok(out.into_iter().map(QuasiBlockSeq).collect())
}

/// `𝔔_σ`.
pub fn enumerate_quasi_blocks(sigma: &Permutation) -> Result<Vec<QuasiBlockSeq>> {
    quasi_block_decompositions(&block_sequence(sigma)?)
}

/// `𝔑(A, σ)`: the quasi-block decomposition of `σ[A]` grouping the points of
/// `A` (0-based, strictly increasing, nonempty) by the block of `σ` that
/// contains them.
pub fn natural_decomposition(positions: &[usize], sigma: &Permutation) -> Result<QuasiBlockSeq> {
    if positions.is_empty() {
        return Err(Error::InvalidIndexSet("the occurrence must be nonempty".into()));
    }
    check_index_set(positions, sigma.len())?;
    let blocks = block_sequence(sigma)?;
    Ok(natural_decomposition_in(positions, &blocks))
}

pub(crate) fn natural_decomposition_in(positions: &[usize], blocks: &BlockSeq) -> QuasiBlockSeq {
    let mut items = Vec::new();
    let mut start = 0;
    let mut cursor = 0;
    for b in blocks.blocks() {
        let end = start + b.len;
        let mut count = 0;
        while cursor < positions.len() && positions[cursor] < end {
            count += 1;
            cursor += 1;
        }
        if count > 0 {
            items.push(Block {
                len: count,
                anti: b.anti || count == 1,
            });
        }
        start = end;
    }
    QuasiBlockSeq(items)
}

/// The layered permutation whose blocks are `entries` scaled by `m`; entries of
/// length zero are dropped first. Adjacent antilayers left by dropped entries
/// merge into one.
pub fn blow_up(entries: &[Block], m: usize) -> Permutation {
    let scaled: Vec<Block> = entries
        .iter()
        .filter(|b| b.len > 0)
        .map(|b| Block {
            len: b.len * m,
            anti: b.anti,
        })
        .collect();
    from_layer_sequence(&LayerSeq(expand_layers(&scaled)))
}

/// `Λ(τ, σ_b)` for layered `τ` and the permutation `σ_b` with block sequence
/// `b`, summed over quasi-block decompositions of `τ` and increasing
/// assignments of quasi-blocks to blocks.
///
/// Compatibility: a layer quasi-block needs a layer block, an antilayeroid of
/// length ≥ 2 needs an antilayer, and a single point fits anywhere. Each
/// assignment contributes `Π C(block length, ℓ_j)`.
pub fn count_occurrences_layered(pattern: &Permutation, blocks: &BlockSeq) -> Result<u128> {
    let decompositions = enumerate_quasi_blocks(pattern)?;
    Ok(count_with_decompositions(&decompositions, blocks))
}

/// The block-wise count with the pattern's decompositions precomputed.
pub fn count_with_decompositions(decompositions: &[QuasiBlockSeq], blocks: &BlockSeq) -> u128 {
    decompositions
        .iter()
        .map(|d| count_assignments(d.items(), blocks.blocks()))
        .sum()
}

pub(crate) fn compatible(q: &QuasiBlock, block: &Block) -> bool {
    q.len == 1 || q.anti == block.anti
}

fn count_assignments(items: &[QuasiBlock], blocks: &[Block]) -> u128 {
    if items.is_empty() {
        return 1;
    }
    // ways[i]: placements of the first j items with the last one in a block < i
    let mut ways = alloc::vec![1u128; blocks.len() + 1];
    for q in items {
        let mut next = alloc::vec![0u128; blocks.len() + 1];
        for (i, b) in blocks.iter().enumerate() {
            let here = if compatible(q, b) {
                ways[i] * binomial_u128(b.len as u128, q.len as u128)
            } else {
                0
            };
            next[i + 1] = next[i] + here;
        }
        ways = next;
    }
    ways[blocks.len()]
}

impl fmt::Display for LayerSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| format!("{l}")).collect();
        f.write_str(&parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use crate::perm::count_occurrences;
    use alloc::vec;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn bs(s: &str) -> BlockSeq {
        s.parse().unwrap()
    }

    fn qb(s: &str) -> QuasiBlockSeq {
        s.parse().unwrap()
    }

    #[test]
    fn layer_sequence_examples() {
        assert_eq!(layer_sequence(&p("321457689")).unwrap().lengths(), &[3, 1, 1, 2, 1, 1]);
        assert_eq!(layer_sequence(&Permutation::identity(3)).unwrap().lengths(), &[1, 1, 1]);
        assert!(matches!(layer_sequence(&p("231")), Err(Error::NotLayered(_))));
        assert!(layer_sequence(&p("312")).is_err());
        assert!(layer_sequence(&p("")).unwrap().lengths().is_empty());
    }

    #[test]
    fn from_layer_examples() {
        assert_eq!(from_layer_sequence(&LayerSeq::new(vec![1, 2]).unwrap()), p("132"));
        assert_eq!(from_layer_sequence(&LayerSeq::new(vec![2, 2]).unwrap()), p("2143"));
        assert_eq!(from_layer_sequence(&LayerSeq::new(vec![5]).unwrap()), Permutation::reverse(5));
        assert!(LayerSeq::new(vec![1, 0]).is_err());
    }

    #[test]
    fn block_sequence_examples() {
        assert_eq!(block_sequence(&p("321457689")).unwrap(), bs("3 ^2 2 ^2"));
        assert_eq!(block_sequence(&Permutation::identity(4)).unwrap(), bs("^4"));
        assert_eq!(block_sequence(&p("2143")).unwrap(), bs("2,2"));
        assert!(block_sequence(&p("231")).is_err());
        assert_eq!(bs("3 ^2 2 ^2").to_permutation(), p("321457689"));
    }

    #[test]
    fn block_seq_validation() {
        assert!("^2 ^1".parse::<BlockSeq>().is_err());
        assert!("1 2".parse::<BlockSeq>().is_err());
        assert!("0".parse::<BlockSeq>().is_err());
        assert!("x".parse::<BlockSeq>().is_err());
        assert_eq!(bs("3 ^2 2 ^2").to_string(), "3 ^2 2 ^2");
    }

    #[test]
    fn quasi_blocks_of_mixed_example() {
        let all = enumerate_quasi_blocks(&p("321457689")).unwrap();
        assert_eq!(
            all,
            vec![
                qb("3 ^2 2 ^2"),
                qb("3 ^2 2 ^1 ^1"),
                qb("3 ^1 ^1 2 ^2"),
                qb("3 ^1 ^1 2 ^1 ^1"),
            ]
        );
        assert_eq!(enumerate_quasi_blocks(&Permutation::reverse(3)).unwrap(), vec![qb("3")]);
        assert_eq!(
            enumerate_quasi_blocks(&Permutation::identity(2)).unwrap(),
            vec![qb("^2"), qb("^1 ^1")]
        );
        assert!(enumerate_quasi_blocks(&p("231")).is_err());
    }

    #[test]
    fn quasi_block_guard() {
        let huge = BlockSeq::new(vec![Block::antilayer(22)]).unwrap();
        assert!(matches!(
            quasi_block_decompositions(&huge),
            Err(Error::CapExceeded { .. })
        ));
        let ok = BlockSeq::new(vec![Block::antilayer(21)]).unwrap();
        assert_eq!(quasi_block_count(&ok), 1 << 20);
    }

    #[test]
    fn quasi_block_seq_rejects_short_layers() {
        assert!(QuasiBlockSeq::new(vec![Block::layer(1)]).is_err());
        assert!(QuasiBlockSeq::new(vec![Block::antilayer(1), Block::antilayer(1)]).is_ok());
        assert_eq!(qb("2 ^1 ^1 2").coarsen(), bs("2 ^2 2"));
    }

    #[test]
    fn natural_decomposition_examples() {
        let sigma = p("21346587");
        assert_eq!(natural_decomposition(&[0, 1, 2, 3, 7], &sigma).unwrap(), qb("2 ^2 ^1"));
        assert_eq!(sigma.induced(&[0, 1, 2, 3, 7]).unwrap(), p("21345"));
        let all: Vec<usize> = (0..8).collect();
        assert_eq!(natural_decomposition(&all, &sigma).unwrap(), qb("2 ^2 2 2"));
        assert_eq!(natural_decomposition(&[4], &sigma).unwrap(), qb("^1"));
        assert!(natural_decomposition(&[], &sigma).is_err());
        assert!(natural_decomposition(&[9], &sigma).is_err());
        assert!(natural_decomposition(&[0], &p("231")).is_err());
    }

    #[test]
    fn blow_up_examples() {
        let b = [Block::antilayer(1), Block::layer(2)];
        assert_eq!(blow_up(&b, 2), p("126543"));
        let mixed = bs("3 ^2 2 ^2");
        assert_eq!(blow_up(mixed.blocks(), 1), mixed.to_permutation());
        let big = blow_up(mixed.blocks(), 2);
        assert_eq!(big.len(), 18);
        assert_eq!(block_sequence(&big).unwrap(), bs("6 ^4 4 ^4"));
        let with_zero = [Block::antilayer(0), Block::layer(2), Block::antilayer(1)];
        assert_eq!(block_sequence(&blow_up(&with_zero, 3)).unwrap(), bs("6 ^3"));
    }

    #[test]
    fn layered_count_examples() {
        assert_eq!(count_occurrences_layered(&p("21"), &bs("2 2")).unwrap(), 2);
        assert_eq!(count_occurrences_layered(&p("12"), &bs("^2")).unwrap(), 1);
        assert_eq!(count_occurrences_layered(&p("12"), &bs("2 2")).unwrap(), 4);
        assert_eq!(count_occurrences(&p("12"), &p("2143")), 4);
        assert!(count_occurrences_layered(&p("231"), &bs("2 2")).is_err());
    }
}
