//! Maximum bipartite matching (Hopcroft-Karp).

use std::collections::VecDeque;

const UNMATCHED: usize = usize::MAX;

/// Bipartite graph with `left` vertices, each holding its right neighbours.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    adjacency: Vec<Vec<usize>>,
    right: usize,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize) -> Self {
        BipartiteGraph {
            adjacency: vec![Vec::new(); left],
            right,
        }
    }

    pub fn add_edge(&mut self, l: usize, r: usize) {
        debug_assert!(r < self.right);
        self.adjacency[l].push(r);
    }

    pub fn left_len(&self) -> usize {
        self.adjacency.len()
    }

    /// Size of a maximum matching, with `mate[l]` the partner of each left vertex.
    pub fn maximum_matching(&self) -> (usize, Vec<Option<usize>>) {
        let left = self.adjacency.len();
        let mut mate_left = vec![UNMATCHED; left];
        let mut mate_right = vec![UNMATCHED; self.right];
        let mut dist = vec![0usize; left];
        let mut size = 0;

        while self.bfs(&mate_left, &mate_right, &mut dist) {
            for l in 0..left {
                if mate_left[l] == UNMATCHED && self.dfs(l, &mut mate_left, &mut mate_right, &mut dist) {
                    size += 1;
                }
            }
        }
        let mates = mate_left.into_iter().map(|r| (r != UNMATCHED).then_some(r)).collect();
        (size, mates)
    }

    pub fn has_perfect_matching(&self) -> bool {
        self.adjacency.len() == self.right && self.maximum_matching().0 == self.right
    }

    /// Layers free left vertices at distance 0; returns whether a free right
    /// vertex is reachable along alternating paths.
    fn bfs(&self, mate_left: &[usize], mate_right: &[usize], dist: &mut [usize]) -> bool {
        let mut queue = VecDeque::new();
        for (l, &m) in mate_left.iter().enumerate() {
            if m == UNMATCHED {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &self.adjacency[l] {
                let next = mate_right[r];
                if next == UNMATCHED {
                    found = true;
                } else if dist[next] == usize::MAX {
                    dist[next] = dist[l] + 1;
                    queue.push_back(next);
                }
            }
        }
        found
    }

    fn dfs(&self, l: usize, mate_left: &mut [usize], mate_right: &mut [usize], dist: &mut [usize]) -> bool {
        for &r in &self.adjacency[l] {
            let next = mate_right[r];
            let advance = next == UNMATCHED
                || (dist[next] == dist[l].wrapping_add(1) && self.dfs(next, mate_left, mate_right, dist));
            if advance {
                mate_left[l] = r;
                mate_right[r] = l;
                return true;
            }
        }
        dist[l] = usize::MAX;
        false
    }
}
