//! Communication graphs and their uniform doubly stochastic mixing matrices.
//!
//! Every constructor yields a symmetric matrix with self-loops whose rows and
//! columns sum to one, with uniform edge weight `1/(degree+1)`. Weights are
//! assigned to `(i,j)` and `(j,i)` from one computation, so symmetry is exact.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Row/column sum tolerance for the doubly stochastic check.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// LCF jump sequence generating the 32-node Dyck graph over a Hamiltonian cycle.
const DYCK_LCF: [i64; 4] = [5, -5, 13, -13];

/// Graph family of a mixing matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    Ring,
    Dyck,
    Torus,
    FullyConnected,
}

impl std::fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TopologyKind::Ring => write!(f, "ring"),
            TopologyKind::Dyck => write!(f, "dyck32"),
            TopologyKind::Torus => write!(f, "torus"),
            TopologyKind::FullyConnected => write!(f, "full"),
        }
    }
}

/// Symmetric doubly stochastic gossip weights with self-loops.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    n: usize,
    w: DMatrix<f64>,
    kind: TopologyKind,
    /// Neighbors of each node including itself, ascending.
    neighbors: Vec<Vec<usize>>,
}

impl MixingMatrix {
    /// Validates `w` against the mixing-matrix invariants and wraps it.
    pub fn new(kind: TopologyKind, w: DMatrix<f64>) -> Result<Self> {
        let n = w.nrows();
        if n == 0 || w.ncols() != n {
            return Err(Error::InvalidTopology(format!(
                "weights must be square and nonempty, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        for i in 0..n {
            if w[(i, i)] <= 0.0 {
                return Err(Error::InvalidTopology(format!(
                    "node {i} has no self-loop (w_ii = {})",
                    w[(i, i)]
                )));
            }
            let mut row = 0.0;
            let mut col = 0.0;
            for j in 0..n {
                let wij = w[(i, j)];
                if !(0.0..=1.0).contains(&wij) {
                    return Err(Error::InvalidTopology(format!(
                        "w[{i},{j}] = {wij} outside [0,1]"
                    )));
                }
                if wij != w[(j, i)] {
                    return Err(Error::InvalidTopology(format!(
                        "asymmetric weights at ({i},{j})"
                    )));
                }
                row += wij;
                col += w[(j, i)];
            }
            if (row - 1.0).abs() > STOCHASTIC_TOL || (col - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidTopology(format!(
                    "row/col {i} sums to {row}/{col}, expected 1"
                )));
            }
        }
        if !is_connected(&w) {
            return Err(Error::Disconnected);
        }
        let neighbors = (0..n)
            .map(|i| (0..n).filter(|&j| w[(i, j)] > 0.0).collect())
            .collect();
        Ok(Self { n, w, kind, neighbors })
    }

    /// Undirected ring: node i links to i±1 (mod n) plus itself, each weight 1/3.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidTopology(format!(
                "ring needs n >= 3 so predecessor and successor are distinct, got {n}"
            )));
        }
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            w[(i, i)] = 1.0 / 3.0;
            let succ = (i + 1) % n;
            w[(i, succ)] = 1.0 / 3.0;
            w[(succ, i)] = 1.0 / 3.0;
        }
        Self::new(TopologyKind::Ring, w)
    }

    /// Wraparound grid: node (r,c) links to its 4 grid neighbors plus itself,
    /// each weight 1/5. Both dimensions must be at least 3 so the wraparound
    /// neighbors are distinct.
    pub fn torus(rows: usize, cols: usize) -> Result<Self> {
        if rows < 3 || cols < 3 {
            return Err(Error::InvalidTopology(format!(
                "torus needs rows >= 3 and cols >= 3, got {rows}x{cols}"
            )));
        }
        let n = rows * cols;
        let idx = |r: usize, c: usize| r * cols + c;
        let mut w = DMatrix::zeros(n, n);
        for r in 0..rows {
            for c in 0..cols {
                let i = idx(r, c);
                w[(i, i)] = 0.2;
                for (nr, nc) in [
                    ((r + rows - 1) % rows, c),
                    ((r + 1) % rows, c),
                    (r, (c + cols - 1) % cols),
                    (r, (c + 1) % cols),
                ] {
                    w[(i, idx(nr, nc))] = 0.2;
                }
            }
        }
        Self::new(TopologyKind::Torus, w)
    }

    /// The 32-node cubic Dyck graph, generated from LCF notation
    /// [5,-5,13,-13]^8 over a Hamiltonian cycle. 3 neighbors plus self,
    /// each weight 1/4.
    pub fn dyck() -> Self {
        let n = 32usize;
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            w[(i, i)] = 0.25;
            let succ = (i + 1) % n;
            w[(i, succ)] = 0.25;
            w[(succ, i)] = 0.25;
            let jump = DYCK_LCF[i % DYCK_LCF.len()];
            let chord = (i as i64 + jump).rem_euclid(n as i64) as usize;
            w[(i, chord)] = 0.25;
            w[(chord, i)] = 0.25;
        }
        Self::new(TopologyKind::Dyck, w).expect("LCF construction yields a valid mixing matrix")
    }

    /// All-to-all graph with every entry 1/n.
    pub fn fully_connected(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTopology("need at least one agent".into()));
        }
        let w = DMatrix::from_element(n, n, 1.0 / n as f64);
        Self::new(TopologyKind::FullyConnected, w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[(i, j)]
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Neighbors of node `i` including `i` itself, in ascending order.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Number of outgoing edges of node `i` (neighbors excluding self).
    pub fn out_degree(&self, i: usize) -> usize {
        self.neighbors[i].len() - 1
    }

    /// 1 - |lambda_2|, the gap below the second-largest eigenvalue magnitude.
    pub fn spectral_gap(&self) -> Result<f64> {
        spectral_gap_of(&self.w)
    }
}

/// Spectral gap of an arbitrary symmetric stochastic matrix.
///
/// Returns an error for a disconnected graph, whose gap degenerates to 0.
pub fn spectral_gap_of(w: &DMatrix<f64>) -> Result<f64> {
    if !is_connected(w) {
        return Err(Error::Disconnected);
    }
    let n = w.nrows();
    if n == 1 {
        return Ok(1.0);
    }
    let eigen = SymmetricEigen::new(w.clone());
    let mut mags: Vec<f64> = eigen.eigenvalues.iter().map(|l| l.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(1.0 - mags[1])
}

/// BFS over nonzero off-diagonal entries.
fn is_connected(w: &DMatrix<f64>) -> bool {
    let n = w.nrows();
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if i != j && w[(i, j)] > 0.0 && !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == n
}

/// Parses a CLI topology string: `ring`, `dyck32`, `torus:RxC` or `full`.
///
/// `agents` supplies n for the families that need it; families with a fixed
/// node count reject a mismatching agent count.
pub fn parse_topology(s: &str, agents: usize) -> Result<MixingMatrix> {
    match s {
        "ring" => MixingMatrix::ring(agents),
        "full" => MixingMatrix::fully_connected(agents),
        "dyck32" => {
            if agents != 32 {
                return Err(Error::InvalidTopology(format!(
                    "dyck32 is a fixed 32-node graph, got agents = {agents}"
                )));
            }
            Ok(MixingMatrix::dyck())
        }
        other => {
            if let Some(dims) = other.strip_prefix("torus:") {
                let (r, c) = dims.split_once(['x', 'X']).ok_or_else(|| {
                    Error::InvalidTopology(format!("torus dims must look like RxC, got {dims:?}"))
                })?;
                let rows: usize = r
                    .parse()
                    .map_err(|_| Error::InvalidTopology(format!("bad torus rows {r:?}")))?;
                let cols: usize = c
                    .parse()
                    .map_err(|_| Error::InvalidTopology(format!("bad torus cols {c:?}")))?;
                if rows * cols != agents {
                    return Err(Error::InvalidTopology(format!(
                        "torus {rows}x{cols} has {} nodes, got agents = {agents}",
                        rows * cols
                    )));
                }
                MixingMatrix::torus(rows, cols)
            } else {
                Err(Error::InvalidTopology(format!(
                    "unknown topology {other:?} (expected ring, dyck32, torus:RxC or full)"
                )))
            }
        }
    }
}
