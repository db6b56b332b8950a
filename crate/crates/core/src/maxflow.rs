//! Dinic max-flow on real capacities, for small bipartite certification graphs.

use std::collections::VecDeque;

pub(crate) struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    eps: f64,
}

impl FlowNetwork {
    pub fn new(nodes: usize, eps: f64) -> Self {
        Self {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            eps,
        }
    }

    /// Adds a directed edge and returns its id.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64) -> usize {
        let id = self.to.len();
        self.head[from].push(id);
        self.to.push(to);
        self.cap.push(cap);
        self.head[to].push(id + 1);
        self.to.push(from);
        self.cap.push(0.0);
        id
    }

    pub fn flow(&self, edge: usize) -> f64 {
        self.cap[edge ^ 1]
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let n = self.head.len();
        let mut total = 0.0;
        let mut level = vec![usize::MAX; n];
        let mut next = vec![0usize; n];
        loop {
            level.iter_mut().for_each(|l| *l = usize::MAX);
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.head[u] {
                    let v = self.to[e];
                    if self.cap[e] > self.eps && level[v] == usize::MAX {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            next.iter_mut().for_each(|x| *x = 0);
            loop {
                let pushed = self.augment(s, t, f64::INFINITY, &level, &mut next);
                if pushed <= self.eps {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(&mut self, u: usize, t: usize, limit: f64, level: &[usize], next: &mut [usize]) -> f64 {
        if u == t {
            return limit;
        }
        while next[u] < self.head[u].len() {
            let e = self.head[u][next[u]];
            let v = self.to[e];
            if self.cap[e] > self.eps && level[v] == level[u] + 1 {
                let pushed = self.augment(v, t, limit.min(self.cap[e]), level, next);
                if pushed > self.eps {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bipartite_transport() {
        // s=0, buyers 1,2, items 3,4, t=5
        let mut g = FlowNetwork::new(6, 1e-14);
        g.add_edge(0, 1, 2.0);
        g.add_edge(0, 2, 1.0);
        let e13 = g.add_edge(1, 3, f64::INFINITY);
        let e14 = g.add_edge(1, 4, f64::INFINITY);
        let e24 = g.add_edge(2, 4, f64::INFINITY);
        g.add_edge(3, 5, 1.5);
        g.add_edge(4, 5, 1.5);
        let f = g.max_flow(0, 5);
        assert!((f - 3.0).abs() < 1e-12);
        assert!((g.flow(e13) - 1.5).abs() < 1e-12);
        assert!((g.flow(e14) + g.flow(e24) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bottleneck() {
        let mut g = FlowNetwork::new(4, 1e-14);
        g.add_edge(0, 1, 5.0);
        g.add_edge(1, 2, 0.25);
        g.add_edge(2, 3, 5.0);
        assert_eq!(g.max_flow(0, 3), 0.25);
    }
}
