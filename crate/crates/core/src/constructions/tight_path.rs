//! Greedy barycentric tight-path sphere for the edge-cost model.
//!
//! Start from the tetrahedron 1234 and repeatedly subdivide the face spanned
//! by the last three vertices of the word with a fresh vertex, chosen as the
//! cheapest unused vertex of class `i mod 4`. Vertex `j` belongs to class
//! `j mod 4`, so pairs inside one class are never examined and every other
//! pair is examined at most once.

use std::collections::HashSet;

use crate::cost::{ticks_to_cost, CostModel, QueryLog, WeightOracle, TICK};
use crate::error::{Error, Result};
use crate::simplex::{PureComplex, Simplex, Vertex};

#[derive(Clone, Debug)]
pub struct TightPath {
    pub complex: PureComplex,
    /// `v_1 .. v_n`.
    pub word: Vec<Vertex>,
    /// `Z_1 .. Z_n`: the cost of the edges added at each step.
    pub step_costs: Vec<f64>,
    /// Exact sum of the step costs, equal to the edge-model cost of `complex`.
    pub cost: f64,
    pub log: QueryLog,
}

/// The 2-sphere encoded by a word: tetrahedron on the first four letters,
/// then letter `i` subdivides the face of letters `i-3, i-2, i-1`.
pub fn tight_path_from_word(word: &[Vertex], n: u32) -> Result<PureComplex> {
    if word.len() < 4 {
        return Err(Error::TooSmall(format!("word of length {} is shorter than 4", word.len())));
    }
    let mut faces: HashSet<Simplex> = HashSet::with_capacity(2 * word.len());
    let (a, b, c, d) = (word[0], word[1], word[2], word[3]);
    for f in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        faces.insert(Simplex::new(&f)?);
    }
    for i in 4..word.len() {
        let (x, y, z, v) = (word[i - 3], word[i - 2], word[i - 1], word[i]);
        let face = Simplex::triangle(x, y, z);
        if !faces.remove(&face) {
            return Err(Error::InvalidParameter(format!("face {face} missing at step {}", i + 1)));
        }
        for f in [[x, y, v], [x, z, v], [y, z, v]] {
            let s = Simplex::new(&f)?;
            if !faces.insert(s) {
                return Err(Error::WouldDegenerate(format!("facet {s} created twice")));
            }
        }
    }
    PureComplex::new(2, n, faces)
}

/// Runs the greedy construction on `[n]` under edge costs, logging every pair query.
pub fn tight_path_sphere(n: u32, oracle: &WeightOracle) -> Result<TightPath> {
    if oracle.model() != CostModel::Edge {
        return Err(Error::WrongModel { simplex: Simplex::from_sorted(&[]), model: oracle.model().to_string() });
    }
    if n < 8 {
        return Err(Error::TooSmall(format!("tight path needs n >= 8, got {n}")));
    }
    let mut log = QueryLog::new();
    let query = |a: Vertex, b: Vertex, log: &mut QueryLog| -> u64 {
        log.record(Simplex::edge(a, b));
        oracle.pair_ticks(a, b)
    };

    // Unused vertices per class, ascending.
    let mut unused: [Vec<Vertex>; 4] = Default::default();
    for j in 5..=n {
        unused[(j % 4) as usize].push(j);
    }

    let mut word: Vec<Vertex> = vec![1, 2, 3, 4];
    let mut step_ticks: Vec<u64> = vec![0; 4];
    step_ticks[1] = query(1, 2, &mut log);
    step_ticks[2] = query(1, 3, &mut log) + query(2, 3, &mut log);
    step_ticks[3] = query(1, 4, &mut log) + query(2, 4, &mut log) + query(3, 4, &mut log);

    for i in 5..=n as usize {
        let class = &mut unused[i % 4];
        let (a, b, c) = (word[i - 4], word[i - 3], word[i - 2]);
        let mut best: Option<(u64, usize)> = None;
        for (slot, &u) in class.iter().enumerate() {
            let z = query(a, u, &mut log) + query(b, u, &mut log) + query(c, u, &mut log);
            // Strict comparison keeps the smallest id on ties.
            if best.is_none_or(|(bz, _)| z < bz) {
                best = Some((z, slot));
            }
        }
        let (z, slot) = best.expect("class sizes match the word positions");
        word.push(class.remove(slot));
        step_ticks.push(z);
    }

    let complex = tight_path_from_word(&word, n)?;
    let cost = ticks_to_cost(step_ticks.iter().map(|&t| t as u128).sum());
    let step_costs = step_ticks.iter().map(|&t| t as f64 * TICK).collect();
    Ok(TightPath { complex, word, step_costs, cost, log })
}

/// Smallest multiple of 4 whose square is at least `n`.
pub fn block_size(n: usize) -> usize {
    let mut k = 4;
    while k * k < n {
        k += 4;
    }
    k
}

/// One block `A_j = { s : jk <= n - s < (j+1)k }` of step indices.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockStat {
    pub j: usize,
    pub size: usize,
    /// `Y_j`, the summed step costs in the block.
    pub sum: f64,
    /// `25k (jk/4)^(-1/3)` for `j >= 1`, and `k` for the last block `j = 0`.
    pub bound: f64,
}

/// Groups step costs `Z_1..Z_n` into blocks of `k` counted from the end.
pub fn block_analysis(step_costs: &[f64]) -> Vec<BlockStat> {
    let n = step_costs.len();
    let k = block_size(n);
    let blocks = (n - 1) / k + 1;
    let mut out: Vec<BlockStat> = (0..blocks)
        .map(|j| BlockStat {
            j,
            size: 0,
            sum: 0.0,
            bound: if j == 0 { k as f64 } else { 25.0 * k as f64 * ((j * k) as f64 / 4.0).powf(-1.0 / 3.0) },
        })
        .collect();
    for (idx, &z) in step_costs.iter().enumerate() {
        let s = idx + 1;
        let j = (n - s) / k;
        out[j].size += 1;
        out[j].sum += z;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{verify, Outcome};

    #[test]
    fn word_of_six_gives_expected_facets() {
        let k = tight_path_from_word(&[1, 2, 3, 4, 5, 6], 6).unwrap();
        let expected = PureComplex::from_lists(
            2,
            6,
            &[&[1, 2, 3], &[1, 2, 4], &[1, 3, 4], &[2, 3, 5], &[2, 4, 5], &[3, 4, 6], &[3, 5, 6], &[4, 5, 6]],
        )
        .unwrap();
        assert_eq!(k, expected);
    }

    #[test]
    fn skeleton_is_band_of_width_three() {
        for n in [8u32, 9, 10, 11, 23, 64] {
            let tp = tight_path_sphere(n, &WeightOracle::edges(n as u64)).unwrap();
            let pos: std::collections::HashMap<Vertex, usize> = tp.word.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let edges = tp.complex.edges();
            assert_eq!(edges.len(), 3 * n as usize - 6);
            for (a, b) in edges {
                assert!(pos[&a].abs_diff(pos[&b]) <= 3);
            }
            assert_eq!(tp.complex.num_facets(), 2 * n as usize - 4);
            let v = verify(&tp.complex).unwrap();
            assert_eq!(v.outcome, Outcome::Sphere2);
            assert!(v.spanning);
        }
    }

    #[test]
    fn word_respects_classes_and_cost_matches() {
        let o = WeightOracle::edges(99);
        let tp = tight_path_sphere(100, &o).unwrap();
        for (i, &v) in tp.word.iter().enumerate() {
            assert_eq!((i + 1) % 4, v as usize % 4);
        }
        assert_eq!(tp.cost, o.complex_cost(&tp.complex).unwrap());
        assert_eq!(tp.log.max_count(), 1);
        assert!(tp.step_costs.iter().skip(4).all(|&z| z < 3.0));
    }

    #[test]
    fn greedy_choice_is_the_class_minimum() {
        let o = WeightOracle::edges(5);
        let tp = tight_path_sphere(40, &o).unwrap();
        let mut used: HashSet<Vertex> = tp.word[..4].iter().copied().collect();
        for i in 4..40 {
            let (a, b, c) = (tp.word[i - 3], tp.word[i - 2], tp.word[i - 1]);
            let z = |u: Vertex| o.pair_cost(a, u) + o.pair_cost(b, u) + o.pair_cost(c, u);
            let best = (1..=40u32)
                .filter(|u| !used.contains(u) && *u as usize % 4 == (i + 1) % 4)
                .min_by(|&x, &y| z(x).total_cmp(&z(y)))
                .unwrap();
            assert_eq!(tp.word[i], best);
            used.insert(best);
        }
    }

    #[test]
    fn rejects_small_or_wrong_model() {
        assert!(matches!(tight_path_sphere(7, &WeightOracle::edges(1)), Err(Error::TooSmall(_))));
        assert!(matches!(tight_path_sphere(9, &WeightOracle::facets(1, 2)), Err(Error::WrongModel { .. })));
    }

    #[test]
    fn blocks_partition_the_steps() {
        assert_eq!(block_size(100), 12);
        assert_eq!(block_size(10_000), 100);
        assert_eq!(block_size(16), 4);
        let z: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let blocks = block_analysis(&z);
        assert_eq!(blocks.iter().map(|b| b.size).sum::<usize>(), 100);
        assert!(blocks.iter().all(|b| b.size <= 12));
        assert_eq!(blocks.iter().map(|b| b.sum).sum::<f64>(), z.iter().sum::<f64>());
        // Block 0 holds the last steps.
        assert_eq!(blocks[0].sum, (88..100).map(|i| i as f64).sum::<f64>());
    }
}
