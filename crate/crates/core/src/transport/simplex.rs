//! Transportation simplex on the dense bipartite graph.
//!
//! The basis is a spanning tree on `n + m` nodes (rows then columns) with
//! exactly `n + m − 1` basic cells, degenerate zeros included. Potentials
//! satisfy `u_i + v_j = c_ij` on basic cells; the method stops once every
//! reduced cost `c_ij − u_i − v_j` is ≥ `−tol`, which certifies optimality by
//! dual feasibility. Dantzig pricing is used until a run of degenerate
//! pivots, after which Bland's rule takes over to rule out cycling.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct Solution {
    /// Row-major `n × m` flows.
    pub flow: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Basic cells `(i, j)`.
    pub basis: Vec<(usize, usize)>,
    pub iterations: usize,
}

pub struct Problem<'a> {
    pub supply: &'a [f64],
    pub demand: &'a [f64],
    /// Row-major `n × m` costs.
    pub cost: &'a [f64],
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.supply.len()
    }

    fn m(&self) -> usize {
        self.demand.len()
    }

    fn c(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.m() + j]
    }

    fn tolerance(&self) -> f64 {
        let scale = self.cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        1e-12 * (1.0 + scale)
    }
}

/// Solve to optimality.
pub fn solve(p: &Problem<'_>) -> Solution {
    let mut state = State::north_west(p);
    state.optimize(p);
    state.into_solution()
}

/// Another optimal vertex adjacent to the optimal basis, reached through a
/// non-degenerate pivot on a cell with zero reduced cost.
pub fn alternative_vertex(p: &Problem<'_>, sol: &Solution) -> Option<Solution> {
    let tol = p.tolerance();
    let base = State::from_solution(p, sol);
    for i in 0..p.n() {
        for j in 0..p.m() {
            if base.is_basic(i, j) {
                continue;
            }
            let reduced = p.c(i, j) - base.u[i] - base.v[j];
            if reduced.abs() > 1e3 * tol {
                continue;
            }
            let mut trial = State::from_solution(p, sol);
            let theta = trial.pivot(i, j, false);
            let moved = theta > 1e-12;
            if moved {
                trial.compute_potentials(p);
                return Some(trial.into_solution());
            }
        }
    }
    None
}

struct State {
    n: usize,
    m: usize,
    flow: Vec<f64>,
    basic: Vec<bool>,
    basis: Vec<(usize, usize)>,
    u: Vec<f64>,
    v: Vec<f64>,
    iterations: usize,
}

impl State {
    fn north_west(p: &Problem<'_>) -> Self {
        let (n, m) = (p.n(), p.m());
        let mut s = Self {
            n,
            m,
            flow: vec![0.0; n * m],
            basic: vec![false; n * m],
            basis: Vec::with_capacity(n + m - 1),
            u: vec![0.0; n],
            v: vec![0.0; m],
            iterations: 0,
        };
        let mut supply = p.supply.to_vec();
        let mut demand = p.demand.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let q = supply[i].min(demand[j]).max(0.0);
            s.set_basic(i, j, q);
            supply[i] -= q;
            demand[j] -= q;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if i == n - 1 {
                j += 1;
            } else if j == m - 1 || supply[i] <= demand[j] {
                // on a tie the next cell in the column carries a zero
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(s.basis.len(), n + m - 1);
        s.compute_potentials(p);
        s
    }

    fn from_solution(p: &Problem<'_>, sol: &Solution) -> Self {
        let (n, m) = (p.n(), p.m());
        let mut basic = vec![false; n * m];
        for &(i, j) in &sol.basis {
            basic[i * m + j] = true;
        }
        Self {
            n,
            m,
            flow: sol.flow.clone(),
            basic,
            basis: sol.basis.clone(),
            u: sol.u.clone(),
            v: sol.v.clone(),
            iterations: sol.iterations,
        }
    }

    fn into_solution(self) -> Solution {
        Solution {
            flow: self.flow,
            u: self.u,
            v: self.v,
            basis: self.basis,
            iterations: self.iterations,
        }
    }

    fn set_basic(&mut self, i: usize, j: usize, q: f64) {
        let k = i * self.m + j;
        self.flow[k] = q;
        if !self.basic[k] {
            self.basic[k] = true;
            self.basis.push((i, j));
        }
    }

    fn is_basic(&self, i: usize, j: usize) -> bool {
        self.basic[i * self.m + j]
    }

    /// Adjacency of the basis tree; node `i < n` is row `i`, node `n + j` is
    /// column `j`.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n + self.m];
        for &(i, j) in &self.basis {
            adj[i].push(self.n + j);
            adj[self.n + j].push(i);
        }
        adj
    }

    fn compute_potentials(&mut self, p: &Problem<'_>) {
        let adj = self.adjacency();
        let total = self.n + self.m;
        let mut pot = vec![f64::NAN; total];
        let mut seen = vec![false; total];
        pot[0] = 0.0;
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if seen[b] {
                    continue;
                }
                seen[b] = true;
                pot[b] = if a < self.n {
                    p.c(a, b - self.n) - pot[a]
                } else {
                    p.c(b, a - self.n) - pot[a]
                };
                queue.push_back(b);
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "basis is not a spanning tree");
        self.u = pot[..self.n].to_vec();
        self.v = pot[self.n..].to_vec();
    }

    /// Tree path from row `i` to column `j` as a list of nodes.
    fn tree_path(&self, i: usize, j: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let total = self.n + self.m;
        let mut parent = vec![usize::MAX; total];
        parent[i] = i;
        let mut queue = VecDeque::from([i]);
        let target = self.n + j;
        while let Some(a) = queue.pop_front() {
            if a == target {
                break;
            }
            for &b in &adj[a] {
                if parent[b] == usize::MAX {
                    parent[b] = a;
                    queue.push_back(b);
                }
            }
        }
        let mut path = vec![target];
        let mut cur = target;
        while cur != i {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Enter cell `(ei, ej)`; returns the step length θ. With `bland`, the
    /// leaving cell among ties is the lowest-indexed one.
    fn pivot(&mut self, ei: usize, ej: usize, bland: bool) -> f64 {
        let path = self.tree_path(ei, ej);
        // consecutive node pairs are basic cells; signs alternate starting
        // with − on the cell adjacent to the entering row
        let mut cells: Vec<(usize, usize)> = Vec::with_capacity(path.len() - 1);
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            let cell = if a < self.n { (a, b - self.n) } else { (b, a - self.n) };
            cells.push(cell);
        }
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, &(i, j)) in cells.iter().enumerate() {
            if k % 2 == 0 {
                let f = self.flow[i * self.m + j];
                let better = f < theta
                    || (f == theta
                        && bland
                        && (i * self.m + j) < {
                            let (li, lj) = cells[leave];
                            li * self.m + lj
                        });
                if better {
                    theta = f;
                    leave = k;
                }
            }
        }
        let theta = theta.max(0.0);
        for (k, &(i, j)) in cells.iter().enumerate() {
            let idx = i * self.m + j;
            if k % 2 == 0 {
                self.flow[idx] -= theta;
            } else {
                self.flow[idx] += theta;
            }
        }
        let (li, lj) = cells[leave];
        self.flow[li * self.m + lj] = 0.0;
        self.basic[li * self.m + lj] = false;
        self.basis.retain(|&c| c != (li, lj));
        self.flow[ei * self.m + ej] = theta;
        self.basic[ei * self.m + ej] = true;
        self.basis.push((ei, ej));
        theta
    }

    fn optimize(&mut self, p: &Problem<'_>) {
        let tol = p.tolerance();
        let max_iter = 50 * (self.n + self.m).pow(2) + 1000;
        let mut degenerate_run = 0usize;
        while self.iterations < max_iter {
            let bland = degenerate_run > self.n + self.m;
            let mut entering: Option<(usize, usize)> = None;
            let mut best = -tol;
            'scan: for i in 0..self.n {
                for j in 0..self.m {
                    if self.is_basic(i, j) {
                        continue;
                    }
                    let r = p.c(i, j) - self.u[i] - self.v[j];
                    if r < best {
                        entering = Some((i, j));
                        if bland {
                            break 'scan;
                        }
                        best = r;
                    }
                }
            }
            let Some((i, j)) = entering else { return };
            let theta = self.pivot(i, j, bland);
            degenerate_run = if theta == 0.0 { degenerate_run + 1 } else { 0 };
            self.compute_potentials(p);
            self.iterations += 1;
        }
    }
}
