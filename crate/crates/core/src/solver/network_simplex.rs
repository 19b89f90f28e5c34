//! Transportation simplex on the spanning-tree basis of the bipartite graph.
//!
//! Starts from the northwest-corner basis (exactly `n + m - 1` cells,
//! degenerate zeros included) and pivots with Bland's rule on both the
//! entering and the leaving cell. Generic over the scalar so the same code
//! runs in `f64` and in exact rationals.

use std::collections::VecDeque;
use std::fmt::Debug;

use num_traits::Num;

use crate::error::SolveError;

/// Scalar field usable by the simplex.
pub trait Scalar: Num + Clone + PartialOrd + Debug {}

impl<T: Num + Clone + PartialOrd + Debug> Scalar for T {}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisSolution<T> {
    /// Basic cells; always `n + m - 1` of them.
    pub cells: Vec<(usize, usize)>,
    pub flows: Vec<T>,
    /// Row potentials with `u[0] = 0`.
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub iterations: usize,
}

/// Solves `min sum c_ij x_ij` over couplings of `supply` and `demand`.
///
/// A non-basic cell enters when its reduced cost is below `-eps`.
pub fn network_simplex<T: Scalar>(
    supply: &[T],
    demand: &[T],
    cost: &dyn Fn(usize, usize) -> T,
    eps: &T,
    max_iterations: usize,
) -> Result<BasisSolution<T>, SolveError> {
    let (n, m) = (supply.len(), demand.len());
    assert!(n > 0 && m > 0, "empty transport problem");
    let (mut cells, mut flows) = northwest_corner(supply, demand);
    let mut basic = vec![usize::MAX; n * m];
    for (k, &(i, j)) in cells.iter().enumerate() {
        basic[i * m + j] = k;
    }
    let mut iterations = 0;
    loop {
        let adj = adjacency(&cells, n, m);
        let (u, v) = potentials(&cells, &adj, cost, n, m);
        let entering = (0..n * m).find(|&c| {
            if basic[c] != usize::MAX {
                return false;
            }
            let (i, j) = (c / m, c % m);
            let reduced = cost(i, j) - u[i].clone() - v[j].clone();
            reduced < T::zero() - eps.clone()
        });
        let Some(enter) = entering else {
            return Ok(BasisSolution { cells, flows, u, v, iterations });
        };
        if iterations >= max_iterations {
            return Err(SolveError::IterationLimit(max_iterations));
        }
        iterations += 1;
        let (ei, ej) = (enter / m, enter % m);
        // Tree path from row ei to column ej; its cells alternate -, +, -, ...
        let path = tree_path(&adj, ei, n + ej, n + m);
        let mut leave: Option<usize> = None;
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 1 {
                continue;
            }
            let better = match leave {
                None => true,
                Some(l) => {
                    flows[k] < flows[l]
                        || (flows[k] == flows[l] && cell_index(cells[k], m) < cell_index(cells[l], m))
                }
            };
            if better {
                leave = Some(k);
            }
        }
        let leave = leave.expect("cycle has a decreasing cell");
        let theta = flows[leave].clone();
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                flows[k] = flows[k].clone() - theta.clone();
            } else {
                flows[k] = flows[k].clone() + theta.clone();
            }
        }
        basic[cell_index(cells[leave], m)] = usize::MAX;
        cells[leave] = (ei, ej);
        flows[leave] = theta;
        basic[enter] = leave;
    }
}

fn cell_index((i, j): (usize, usize), m: usize) -> usize {
    i * m + j
}

fn northwest_corner<T: Scalar>(supply: &[T], demand: &[T]) -> (Vec<(usize, usize)>, Vec<T>) {
    let (n, m) = (supply.len(), demand.len());
    let mut ra = supply[0].clone();
    let mut rb = demand[0].clone();
    let (mut i, mut j) = (0, 0);
    let mut cells = Vec::with_capacity(n + m - 1);
    let mut flows = Vec::with_capacity(n + m - 1);
    loop {
        let x = if ra < rb { ra.clone() } else { rb.clone() };
        let x = if x < T::zero() { T::zero() } else { x };
        cells.push((i, j));
        flows.push(x.clone());
        ra = ra - x.clone();
        rb = rb - x;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if i == n - 1 || (j < m - 1 && !(ra <= T::zero())) {
            j += 1;
            rb = demand[j].clone();
        } else {
            i += 1;
            ra = supply[i].clone();
        }
    }
    (cells, flows)
}

/// Node ids: rows `0..n`, columns `n..n+m`. Entries are `(neighbor, cell)`.
fn adjacency(cells: &[(usize, usize)], n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); n + m];
    for (k, &(i, j)) in cells.iter().enumerate() {
        adj[i].push((n + j, k));
        adj[n + j].push((i, k));
    }
    adj
}

fn potentials<T: Scalar>(
    cells: &[(usize, usize)],
    adj: &[Vec<(usize, usize)>],
    cost: &dyn Fn(usize, usize) -> T,
    n: usize,
    m: usize,
) -> (Vec<T>, Vec<T>) {
    let mut pot: Vec<Option<T>> = vec![None; n + m];
    pot[0] = Some(T::zero());
    let mut queue = VecDeque::from([0usize]);
    while let Some(a) = queue.pop_front() {
        let pa = pot[a].clone().expect("visited");
        for &(b, k) in &adj[a] {
            if pot[b].is_none() {
                let (i, j) = cells[k];
                pot[b] = Some(cost(i, j) - pa.clone());
                queue.push_back(b);
            }
        }
    }
    let pot: Vec<T> = pot.into_iter().map(|p| p.expect("basis is a spanning tree")).collect();
    let v = pot[n..].to_vec();
    let mut u = pot;
    u.truncate(n);
    (u, v)
}

/// Cells on the tree path from node `from` to node `to`, in order.
fn tree_path(adj: &[Vec<(usize, usize)>], from: usize, to: usize, nodes: usize) -> Vec<usize> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
    let mut seen = vec![false; nodes];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(a) = queue.pop_front() {
        if a == to {
            break;
        }
        for &(b, k) in &adj[a] {
            if !seen[b] {
                seen[b] = true;
                parent[b] = Some((a, k));
                queue.push_back(b);
            }
        }
    }
    let mut path = Vec::new();
    let mut x = to;
    while x != from {
        let (p, k) = parent[x].expect("tree is connected");
        path.push(k);
        x = p;
    }
    path.reverse();
    path
}
