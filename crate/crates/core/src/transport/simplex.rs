//! Primal network simplex for the bipartite transportation problem.
//!
//! Sources `0..m`, sinks `m..m+n`, and an artificial root `m+n` joined to
//! every node by a Big-M arc. The spanning tree is kept strongly feasible
//! (leaving arc chosen as the last blocking arc from the cycle apex), which
//! rules out cycling under degenerate pivots.

/// A real arc from source `from` to sink `to` with a gain to maximize.
#[derive(Clone, Copy, Debug)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub gain: f64,
}

#[derive(Clone, Debug)]
pub struct FlowSolution {
    /// `(arc index, flow)` for every real arc with positive flow.
    pub flows: Vec<(usize, f64)>,
    pub feasible: bool,
    pub objective: f64,
    pub pivots: usize,
}

const NONE: usize = usize::MAX;

struct Tree {
    tail: Vec<usize>,
    head: Vec<usize>,
    cost: Vec<f64>,
    flow: Vec<f64>,
    in_tree: Vec<bool>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    depth: Vec<usize>,
    pi: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl Tree {
    fn reduced(&self, a: usize) -> f64 {
        self.cost[a] + self.pi[self.tail[a]] - self.pi[self.head[a]]
    }

    fn other(&self, a: usize, v: usize) -> usize {
        if self.tail[a] == v {
            self.head[a]
        } else {
            self.tail[a]
        }
    }

    fn detach(&mut self, a: usize) {
        for v in [self.tail[a], self.head[a]] {
            let list = &mut self.adj[v];
            if let Some(pos) = list.iter().position(|&b| b == a) {
                list.swap_remove(pos);
            }
        }
        self.in_tree[a] = false;
    }

    fn attach(&mut self, a: usize) {
        self.adj[self.tail[a]].push(a);
        self.adj[self.head[a]].push(a);
        self.in_tree[a] = true;
    }

    /// Re-hangs the subtree containing `q` below `r` through arc `e`, then
    /// refreshes parents, depths and potentials inside it.
    fn rehang(&mut self, q: usize, r: usize, e: usize, stack: &mut Vec<usize>) {
        self.parent[q] = r;
        self.pred[q] = e;
        self.depth[q] = self.depth[r] + 1;
        self.set_pi(q);
        stack.clear();
        stack.push(q);
        while let Some(v) = stack.pop() {
            for k in 0..self.adj[v].len() {
                let a = self.adj[v][k];
                if a == self.pred[v] {
                    continue;
                }
                let w = self.other(a, v);
                self.parent[w] = v;
                self.pred[w] = a;
                self.depth[w] = self.depth[v] + 1;
                self.set_pi(w);
                stack.push(w);
            }
        }
    }

    fn set_pi(&mut self, v: usize) {
        let a = self.pred[v];
        let p = self.parent[v];
        if self.head[a] == v {
            self.pi[v] = self.cost[a] + self.pi[p];
        } else {
            self.pi[v] = self.pi[p] - self.cost[a];
        }
    }
}

/// Maximizes `Σ gain·flow` subject to source supplies and sink demands.
/// Supplies and demands must have equal totals.
pub fn max_gain_transport(supply: &[f64], demand: &[f64], arcs: &[Arc]) -> FlowSolution {
    let m = supply.len();
    let n = demand.len();
    let root = m + n;
    let nodes = m + n + 1;
    let real = arcs.len();
    let total_arcs = real + m + n;

    let cmax = arcs.iter().map(|a| a.gain.abs()).fold(0.0, f64::max);
    let big_m = (nodes as f64) * (cmax + 1.0);
    let total_supply: f64 = supply.iter().sum();

    let mut t = Tree {
        tail: Vec::with_capacity(total_arcs),
        head: Vec::with_capacity(total_arcs),
        cost: Vec::with_capacity(total_arcs),
        flow: vec![0.0; total_arcs],
        in_tree: vec![false; total_arcs],
        parent: vec![NONE; nodes],
        pred: vec![NONE; nodes],
        depth: vec![0; nodes],
        pi: vec![0.0; nodes],
        adj: vec![Vec::new(); nodes],
    };
    for a in arcs {
        t.tail.push(a.from);
        t.head.push(m + a.to);
        t.cost.push(-a.gain);
    }
    for (i, &s) in supply.iter().enumerate() {
        let a = t.tail.len();
        t.tail.push(i);
        t.head.push(root);
        t.cost.push(big_m);
        t.flow[a] = s;
        t.attach(a);
        t.parent[i] = root;
        t.pred[i] = a;
        t.depth[i] = 1;
        t.pi[i] = -big_m;
    }
    for (j, &d) in demand.iter().enumerate() {
        let a = t.tail.len();
        t.tail.push(root);
        t.head.push(m + j);
        t.cost.push(big_m);
        t.flow[a] = d;
        t.attach(a);
        t.parent[m + j] = root;
        t.pred[m + j] = a;
        t.depth[m + j] = 1;
        t.pi[m + j] = big_m;
    }

    let eps = 1e-11 * (cmax + 1.0);
    let block = ((total_arcs as f64).sqrt().ceil() as usize).max(10).min(total_arcs.max(1));
    let mut next = 0usize;
    let mut pivots = 0usize;
    let mut stack = Vec::new();

    loop {
        // block search pricing
        let mut best = NONE;
        let mut best_rc = -eps;
        let mut scanned = 0usize;
        let mut in_block = 0usize;
        while scanned < total_arcs {
            let a = next;
            next += 1;
            if next == total_arcs {
                next = 0;
            }
            scanned += 1;
            in_block += 1;
            if !t.in_tree[a] {
                let rc = t.reduced(a);
                if rc < best_rc {
                    best_rc = rc;
                    best = a;
                }
            }
            if in_block == block {
                if best != NONE {
                    break;
                }
                in_block = 0;
            }
        }
        if best == NONE {
            break;
        }
        let e = best;
        pivots += 1;

        let u = t.tail[e];
        let v = t.head[e];
        let (mut a, mut b) = (u, v);
        while a != b {
            if t.depth[a] > t.depth[b] {
                a = t.parent[a];
            } else if t.depth[b] > t.depth[a] {
                b = t.parent[b];
            } else {
                a = t.parent[a];
                b = t.parent[b];
            }
        }
        let join = a;

        // flow runs join -> ... -> u -> v -> ... -> join
        let mut delta = f64::INFINITY;
        let mut out = NONE;
        let mut out_on_u_side = true;
        let mut w = u;
        while w != join {
            let arc = t.pred[w];
            if t.tail[arc] == w && t.flow[arc] < delta {
                delta = t.flow[arc];
                out = w;
                out_on_u_side = true;
            }
            w = t.parent[w];
        }
        let mut w = v;
        while w != join {
            let arc = t.pred[w];
            if t.head[arc] == w && t.flow[arc] <= delta {
                delta = t.flow[arc];
                out = w;
                out_on_u_side = false;
            }
            w = t.parent[w];
        }
        assert!(out != NONE, "unbounded transportation problem");

        if delta > 0.0 {
            t.flow[e] += delta;
            let mut w = u;
            while w != join {
                let arc = t.pred[w];
                if t.head[arc] == w {
                    t.flow[arc] += delta;
                } else {
                    t.flow[arc] -= delta;
                }
                w = t.parent[w];
            }
            let mut w = v;
            while w != join {
                let arc = t.pred[w];
                if t.tail[arc] == w {
                    t.flow[arc] += delta;
                } else {
                    t.flow[arc] -= delta;
                }
                w = t.parent[w];
            }
        }
        let leaving = t.pred[out];
        t.flow[leaving] = 0.0;
        t.detach(leaving);
        t.attach(e);
        let (q, r) = if out_on_u_side { (u, v) } else { (v, u) };
        t.rehang(q, r, e, &mut stack);
    }

    let tol = 1e-9 * total_supply.max(1e-300);
    let feasible = (real..total_arcs).all(|a| t.flow[a] <= tol);
    let flow_floor = 1e-15 * total_supply;
    let flows: Vec<(usize, f64)> = (0..real)
        .filter(|&a| t.flow[a] > flow_floor)
        .map(|a| (a, t.flow[a]))
        .collect();
    let objective = flows.iter().map(|&(a, f)| arcs[a].gain * f).sum();
    FlowSolution { flows, feasible, objective, pivots }
}
