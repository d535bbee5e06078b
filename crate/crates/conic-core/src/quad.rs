//! Convex quadratic forms stored block-diagonally.
//!
//! All quadratic functions in this crate are `x ↦ xᵀAx + bᵀx + c` with `A`
//! symmetric positive semidefinite. `A` never couples variables across the
//! blocks of a shared [`Partition`], which the interior-point method exploits
//! to factor the Newton system per block.

use nalgebra::{DMatrix, DVector};

use crate::ConicError;

/// A partition of the decision vector into contiguous blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    offsets: Vec<usize>,
    n: usize,
}

impl Partition {
    /// One block covering the whole vector.
    pub fn single(n: usize) -> Self {
        Self::new(vec![n])
    }

    pub fn new(sizes: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for s in &sizes {
            acc += s;
            offsets.push(acc);
        }
        Self { offsets, n: acc }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn n_blocks(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn range(&self, b: usize) -> std::ops::Range<usize> {
        self.offsets[b]..self.offsets[b + 1]
    }

    pub fn size(&self, b: usize) -> usize {
        self.offsets[b + 1] - self.offsets[b]
    }
}

/// `x ↦ xᵀAx + bᵀx + c` with `A` block-diagonal over a shared [`Partition`].
#[derive(Debug, Clone)]
pub struct QuadForm {
    /// One symmetric matrix per partition block.
    pub blocks: Vec<DMatrix<f64>>,
    pub lin: DVector<f64>,
    pub cst: f64,
}

impl QuadForm {
    pub fn zero(p: &Partition) -> Self {
        Self {
            blocks: (0..p.n_blocks())
                .map(|b| DMatrix::zeros(p.size(b), p.size(b)))
                .collect(),
            lin: DVector::zeros(p.dim()),
            cst: 0.0,
        }
    }

    /// Build from a dense matrix as a single-block form. The matrix is
    /// symmetrized; `b` and `c` are taken as given.
    pub fn from_dense(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Self {
        let sym = (&a + a.transpose()) * 0.5;
        Self {
            blocks: vec![sym],
            lin: b,
            cst: c,
        }
    }

    pub fn value(&self, p: &Partition, x: &DVector<f64>) -> f64 {
        let mut v = self.cst + self.lin.dot(x);
        for (b, m) in self.blocks.iter().enumerate() {
            if m.nrows() == 0 {
                continue;
            }
            let xb = x.rows(p.range(b).start, p.size(b));
            v += (m * &xb).dot(&xb);
        }
        v
    }

    /// `∇f(x) = 2Ax + b`.
    pub fn gradient(&self, p: &Partition, x: &DVector<f64>) -> DVector<f64> {
        let mut g = self.lin.clone();
        for (b, m) in self.blocks.iter().enumerate() {
            if m.nrows() == 0 {
                continue;
            }
            let r = p.range(b);
            let xb = x.rows(r.start, p.size(b));
            let gb = m * &xb * 2.0;
            for (i, idx) in r.enumerate() {
                g[idx] += gb[i];
            }
        }
        g
    }

    /// Add `w · uuᵀ` to block `b`, where `u` is given in block-local
    /// coordinates. `w` must be nonnegative to preserve convexity.
    pub fn add_outer(&mut self, b: usize, w: f64, u: &DVector<f64>) {
        let m = &mut self.blocks[b];
        for i in 0..u.len() {
            let wi = w * u[i];
            if wi == 0.0 {
                continue;
            }
            for j in 0..u.len() {
                m[(i, j)] += wi * u[j];
            }
        }
    }

    /// Add `w` to the diagonal entries of global coordinates `idx`.
    pub fn add_diag(&mut self, p: &Partition, idx: impl Iterator<Item = usize>, w: f64) {
        for g in idx {
            let b = (0..p.n_blocks())
                .find(|&b| p.range(b).contains(&g))
                .expect("index out of partition");
            let local = g - p.range(b).start;
            self.blocks[b][(local, local)] += w;
        }
    }

    /// Certify convexity: every block must have min eigenvalue `≥ -tol`.
    ///
    /// A Cholesky factorization of `A + tol·I` is tried first as a cheap
    /// certificate; only on failure is the eigenvalue actually computed.
    pub fn certify_convex(&self, tol: f64) -> Result<(), ConicError> {
        for (b, m) in self.blocks.iter().enumerate() {
            if m.nrows() == 0 {
                continue;
            }
            let scale = m.amax().max(1.0);
            let shifted = m + DMatrix::identity(m.nrows(), m.ncols()) * (tol * scale);
            if shifted.clone().cholesky().is_some() {
                continue;
            }
            let min_eig = m
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if min_eig < -tol * scale {
                return Err(ConicError::NotConvex { block: b, min_eig });
            }
        }
        Ok(())
    }

    /// Restrict the form to the coordinates in `keep` (new partition `np`
    /// must describe the kept coordinates block-compatibly). Principal
    /// submatrices of PSD blocks stay PSD.
    pub fn restrict(&self, p: &Partition, keep: &[usize], np: &Partition) -> Self {
        assert_eq!(keep.len(), np.dim());
        let mut out = QuadForm::zero(np);
        for (new_i, &old_i) in keep.iter().enumerate() {
            out.lin[new_i] = self.lin[old_i];
        }
        out.cst = self.cst;
        for nb in 0..np.n_blocks() {
            let nr = np.range(nb);
            for (li, gi) in nr.clone().enumerate() {
                let old_i = keep[gi];
                let ob = (0..p.n_blocks())
                    .find(|&b| p.range(b).contains(&old_i))
                    .expect("index out of partition");
                let obr = p.range(ob);
                for (lj, gj) in nr.clone().enumerate() {
                    let old_j = keep[gj];
                    if obr.contains(&old_j) {
                        out.blocks[nb][(li, lj)] =
                            self.blocks[ob][(old_i - obr.start, old_j - obr.start)];
                    }
                }
            }
        }
        out
    }
}
