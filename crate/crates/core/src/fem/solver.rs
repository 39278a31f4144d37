//! Symmetric positive definite linear solves.
//!
//! Systems up to [`DIRECT_DOF_LIMIT`] unknowns use a direct envelope
//! (profile) Cholesky factorization after reverse Cuthill-McKee reordering;
//! larger systems fall back to Jacobi-preconditioned conjugate gradients.
//! Either path must meet the relative residual contract
//! ‖f − K·u‖ / max(‖f‖, ε) ≤ [`RESIDUAL_TOL`], enforced after every solve
//! with at most two iterative-refinement passes.

use crate::error::{Error, Result};
use crate::fem::sparse::{dot, norm2, SparseSym};

/// Largest system solved with the direct factorization.
pub const DIRECT_DOF_LIMIT: usize = 50_000;

/// Relative residual every solve must meet.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Reverse Cuthill-McKee ordering; `perm[new] = old`. Neighbor ties break on
/// (degree, index) so the ordering is deterministic.
pub fn reverse_cuthill_mckee(matrix: &SparseSym) -> Vec<usize> {
    let n = matrix.size();
    let degree: Vec<usize> = (0..n)
        .map(|i| matrix.row(i).filter(|&(j, _)| j != i).count())
        .collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, visited: &[bool]| -> Vec<usize> {
        // returns nodes of the last BFS level
        let mut seen = visited.to_vec();
        let mut frontier = vec![start];
        seen[start] = true;
        let mut last = frontier.clone();
        while !frontier.is_empty() {
            last = frontier.clone();
            let mut next = Vec::new();
            for &u in &frontier {
                for (v, _) in matrix.row(u) {
                    if v != u && !seen[v] {
                        seen[v] = true;
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        last
    };

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start: walk to a min-degree node of the deepest level
        let mut start = seed;
        for _ in 0..4 {
            let mut last = bfs_levels(start, &visited);
            last.sort_by_key(|&v| (degree[v], v));
            let candidate = last[0];
            if candidate == start {
                break;
            }
            start = candidate;
        }

        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        visited[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut neighbors: Vec<usize> = matrix
                .row(u)
                .filter(|&(v, _)| v != u && !visited[v])
                .map(|(v, _)| v)
                .collect();
            neighbors.sort_by_key(|&v| (degree[v], v));
            for v in neighbors {
                if !visited[v] {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Envelope Cholesky factorization K = L·Lᵀ of a permuted SPD matrix. Fill
/// stays inside the envelope, so storage is one contiguous span per row.
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    env: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(matrix: &SparseSym) -> Result<Self> {
        let n = matrix.size();
        let perm = reverse_cuthill_mckee(matrix);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for old_i in 0..n {
            let i = iperm[old_i];
            for (old_j, _) in matrix.row(old_i) {
                let j = iperm[old_j];
                if j < i && j < first[i] {
                    first[i] = j;
                }
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut env = vec![0.0; offset[n]];
        for old_i in 0..n {
            let i = iperm[old_i];
            for (old_j, v) in matrix.row(old_i) {
                let j = iperm[old_j];
                if j <= i {
                    env[offset[i] + (j - first[i])] = v;
                }
            }
        }

        let diag_scale = (0..n)
            .map(|i| env[offset[i + 1] - 1].abs())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = env[offset[i] + (j - fi)];
                if lo < j {
                    let a = &env[offset[i] + (lo - fi)..offset[i] + (j - fi)];
                    let b = &env[offset[j] + (lo - fj)..offset[j] + (j - fj)];
                    s -= dot(a, b);
                }
                env[offset[i] + (j - fi)] = s / env[offset[j + 1] - 1];
            }
            let mut d = env[offset[i + 1] - 1];
            for k in offset[i]..offset[i + 1] - 1 {
                d -= env[k] * env[k];
            }
            if d <= 1e-14 * diag_scale {
                return Err(Error::Solver(format!(
                    "matrix not positive definite: pivot {d:.3e} at reduced row {i} \
                     (check that constraints remove all rigid body modes)"
                )));
            }
            env[offset[i + 1] - 1] = d.sqrt();
        }

        Ok(Self {
            n,
            perm,
            first,
            offset,
            env,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = (0..self.n).map(|i| b[self.perm[i]]).collect();
        // forward: L y = Pb
        for i in 0..self.n {
            let fi = self.first[i];
            let mut s = y[i];
            for (k, j) in (fi..i).enumerate() {
                s -= self.env[self.offset[i] + k] * y[j];
            }
            y[i] = s / self.env[self.offset[i + 1] - 1];
        }
        // backward: Lᵀ x = y
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            y[i] /= self.env[self.offset[i + 1] - 1];
            let xi = y[i];
            for (k, j) in (fi..i).enumerate() {
                y[j] -= self.env[self.offset[i] + k] * xi;
            }
        }
        let mut x = vec![0.0; self.n];
        for i in 0..self.n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

/// Jacobi-preconditioned conjugate gradient solve to a relative residual.
pub fn jacobi_cg(matrix: &SparseSym, b: &[f64], tol: f64, max_iters: usize) -> Result<Vec<f64>> {
    let n = matrix.size();
    let inv_diag: Vec<f64> = matrix
        .diagonal()
        .iter()
        .map(|&d| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::Solver(format!("non-positive diagonal entry {d}")))
            }
        })
        .collect::<Result<_>>()?;
    let norm_b = norm2(b);
    if norm_b == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for iteration in 0..max_iters {
        matrix.mul_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver(format!(
                "conjugate gradient breakdown at iteration {iteration}: pᵀKp = {pap:.3e}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= tol * norm_b {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver(format!(
        "conjugate gradient did not reach tolerance {tol:.1e} in {max_iters} iterations \
         (residual {:.3e})",
        norm2(&r) / norm_b
    )))
}

enum SolverKind {
    Direct(EnvelopeCholesky),
    Iterative,
}

/// A factorized (or prepared) SPD solver that keeps its matrix for residual
/// verification; reusable for repeated right-hand sides, including adjoint
/// solves with the same stiffness.
pub struct SpdSolver {
    matrix: SparseSym,
    kind: SolverKind,
}

impl SpdSolver {
    pub fn new(matrix: SparseSym) -> Result<Self> {
        let kind = if matrix.size() <= DIRECT_DOF_LIMIT {
            SolverKind::Direct(EnvelopeCholesky::factor(&matrix)?)
        } else {
            SolverKind::Iterative
        };
        Ok(Self { matrix, kind })
    }

    pub fn size(&self) -> usize {
        self.matrix.size()
    }

    pub fn matrix(&self) -> &SparseSym {
        &self.matrix
    }

    fn solve_once(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match &self.kind {
            SolverKind::Direct(chol) => Ok(chol.solve(rhs)),
            SolverKind::Iterative => jacobi_cg(
                &self.matrix,
                rhs,
                RESIDUAL_TOL * 1e-2,
                20 * self.matrix.size().max(100),
            ),
        }
    }

    /// Solves K·u = f and verifies the residual contract, applying up to two
    /// refinement passes before giving up.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.matrix.size() {
            return Err(Error::Shape(format!(
                "rhs length {} vs system size {}",
                rhs.len(),
                self.matrix.size()
            )));
        }
        if self.matrix.size() == 0 {
            return Ok(Vec::new());
        }
        let norm_rhs = norm2(rhs);
        if norm_rhs == 0.0 {
            return Ok(vec![0.0; self.matrix.size()]);
        }
        let mut x = self.solve_once(rhs)?;
        for _ in 0..3 {
            let mut residual = self.matrix.mul_vec(&x);
            for (ri, fi) in residual.iter_mut().zip(rhs) {
                *ri = fi - *ri;
            }
            let rel = norm2(&residual) / norm_rhs.max(f64::MIN_POSITIVE);
            if rel <= RESIDUAL_TOL {
                return Ok(x);
            }
            let dx = self.solve_once(&residual)?;
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        let mut residual = self.matrix.mul_vec(&x);
        for (ri, fi) in residual.iter_mut().zip(rhs) {
            *ri = fi - *ri;
        }
        let rel = norm2(&residual) / norm_rhs;
        if rel <= RESIDUAL_TOL {
            Ok(x)
        } else {
            Err(Error::Solver(format!(
                "residual {rel:.3e} exceeds contract {RESIDUAL_TOL:.1e} after refinement"
            )))
        }
    }
}
