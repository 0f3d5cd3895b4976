//! Layered proximity graph for approximate nearest-neighbor queries.
//!
//! Each point is assigned a top layer drawn geometrically (a point reaches
//! layer `l + 1` from layer `l` with probability `1/e`). Queries descend
//! greedily through the sparse upper layers, then run a best-first beam
//! search of width `ef` on layer 0. Insertion order is the row order and all
//! randomness comes from one seeded stream, so the index is a pure function
//! of `(points, m, ef_construction, seed)`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::DenseMatrix;

const MAX_LEVEL: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Scored {
    dist: f64,
    id: usize,
}

impl Eq for Scored {}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) struct ProximityIndex<'a> {
    points: &'a DenseMatrix,
    /// `links[node][layer]`, present for layers `0..=level(node)`.
    links: Vec<Vec<Vec<usize>>>,
    entry: usize,
    top: usize,
    m: usize,
    m0: usize,
    ef_construction: usize,
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl<'a> ProximityIndex<'a> {
    pub(crate) fn build(points: &'a DenseMatrix, m: usize, ef_construction: usize, seed: u64) -> Self {
        let m = m.max(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut index = Self {
            points,
            links: Vec::with_capacity(points.rows()),
            entry: 0,
            top: 0,
            m,
            m0: 2 * m,
            ef_construction: ef_construction.max(m),
        };
        for id in 0..points.rows() {
            let u: f64 = rng.random();
            // 1 - u lies in (0, 1], so the log is finite
            let level = ((-(1.0 - u).ln()).floor() as usize).min(MAX_LEVEL);
            index.insert(id, level);
        }
        index
    }

    fn dist(&self, a: usize, b: usize) -> f64 {
        squared_distance(self.points.row(a), self.points.row(b))
    }

    fn insert(&mut self, id: usize, level: usize) {
        self.links.push(vec![Vec::new(); level + 1]);
        if id == 0 {
            self.entry = 0;
            self.top = level;
            return;
        }
        let query = self.points.row(id);
        let mut ep = Scored {
            dist: squared_distance(query, self.points.row(self.entry)),
            id: self.entry,
        };
        for layer in (level + 1..=self.top).rev() {
            ep = self.greedy(query, ep, layer);
        }
        let mut entries = vec![ep];
        for layer in (0..=level.min(self.top)).rev() {
            let found = self.search_layer(query, &entries, self.ef_construction, layer);
            let cap = if layer == 0 { self.m0 } else { self.m };
            let chosen: Vec<usize> = found.iter().take(self.m).map(|s| s.id).collect();
            for &nb in &chosen {
                self.links[id][layer].push(nb);
                self.links[nb][layer].push(id);
                if self.links[nb][layer].len() > cap {
                    self.prune(nb, layer, cap);
                }
            }
            entries = found;
        }
        if level > self.top {
            self.top = level;
            self.entry = id;
        }
    }

    fn prune(&mut self, node: usize, layer: usize, cap: usize) {
        let mut scored: Vec<Scored> = self.links[node][layer]
            .iter()
            .map(|&nb| Scored {
                dist: self.dist(node, nb),
                id: nb,
            })
            .collect();
        scored.sort();
        scored.truncate(cap);
        self.links[node][layer] = scored.into_iter().map(|s| s.id).collect();
    }

    fn greedy(&self, query: &[f64], mut best: Scored, layer: usize) -> Scored {
        loop {
            let mut improved = false;
            for &nb in &self.links[best.id][layer] {
                let cand = Scored {
                    dist: squared_distance(query, self.points.row(nb)),
                    id: nb,
                };
                if cand < best {
                    best = cand;
                    improved = true;
                }
            }
            if !improved {
                return best;
            }
        }
    }

    /// Beam search; returns up to `ef` results sorted nearest first.
    fn search_layer(&self, query: &[f64], entries: &[Scored], ef: usize, layer: usize) -> Vec<Scored> {
        let mut visited = vec![false; self.links.len()];
        let mut candidates: BinaryHeap<Reverse<Scored>> = BinaryHeap::new();
        let mut results: BinaryHeap<Scored> = BinaryHeap::new();
        for &e in entries {
            if !visited[e.id] {
                visited[e.id] = true;
                candidates.push(Reverse(e));
                results.push(e);
            }
        }
        while results.len() > ef {
            results.pop();
        }
        while let Some(Reverse(current)) = candidates.pop() {
            if let Some(worst) = results.peek() {
                if results.len() >= ef && current > *worst {
                    break;
                }
            }
            for &nb in &self.links[current.id][layer] {
                if visited[nb] {
                    continue;
                }
                visited[nb] = true;
                let cand = Scored {
                    dist: squared_distance(query, self.points.row(nb)),
                    id: nb,
                };
                if results.len() < ef || cand < *results.peek().unwrap() {
                    candidates.push(Reverse(cand));
                    results.push(cand);
                    if results.len() > ef {
                        results.pop();
                    }
                }
            }
        }
        results.into_sorted_vec()
    }

    /// Approximate `k` nearest neighbors of stored point `id`, excluding it.
    pub(crate) fn neighbors_of(&self, id: usize, k: usize, ef: usize) -> Vec<usize> {
        let query = self.points.row(id);
        let mut ep = Scored {
            dist: squared_distance(query, self.points.row(self.entry)),
            id: self.entry,
        };
        for layer in (1..=self.top).rev() {
            ep = self.greedy(query, ep, layer);
        }
        self.search_layer(query, &[ep], ef.max(k + 1), 0)
            .into_iter()
            .filter(|s| s.id != id)
            .take(k)
            .map(|s| s.id)
            .collect()
    }
}
