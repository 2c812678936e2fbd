//! Labeled tensor-product Hilbert spaces and sparse operators on them.
//!
//! Operators are stored in compressed sparse row form and promoted to the
//! full layout by Kronecker placement on demand. Subsystem 0 varies slowest
//! in the composite basis index.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Ordered list of (label, dimension) subsystems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertLayout {
    subsystems: Vec<(String, usize)>,
}

impl HilbertLayout {
    pub fn new(subsystems: Vec<(String, usize)>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::Config("layout needs at least one subsystem".into()));
        }
        for (label, dim) in &subsystems {
            if *dim == 0 {
                return Err(Error::Config(format!("subsystem {label} has zero dimension")));
            }
        }
        for i in 0..subsystems.len() {
            for j in (i + 1)..subsystems.len() {
                if subsystems[i].0 == subsystems[j].0 {
                    return Err(Error::Config(format!(
                        "duplicate subsystem label {}",
                        subsystems[i].0
                    )));
                }
            }
        }
        Ok(Self { subsystems })
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|(_, d)| d).product()
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn subsystems(&self) -> &[(String, usize)] {
        &self.subsystems
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.subsystems.iter().position(|(l, _)| l == label)
    }

    pub fn dim_of(&self, index: usize) -> usize {
        self.subsystems[index].1
    }

    /// Stride of subsystem `index` in the composite basis.
    fn stride(&self, index: usize) -> usize {
        self.subsystems[index + 1..].iter().map(|(_, d)| d).product()
    }

    /// Composite basis index of a product basis state.
    pub fn state_index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.subsystems.len() {
            return Err(Error::Config(format!(
                "expected {} occupation numbers",
                self.subsystems.len()
            )));
        }
        let mut idx = 0;
        for (k, (&occ, (label, dim))) in occupations.iter().zip(&self.subsystems).enumerate() {
            if occ >= *dim {
                return Err(Error::Config(format!(
                    "occupation {occ} out of range for subsystem {label}"
                )));
            }
            idx += occ * self.stride(k);
        }
        Ok(idx)
    }

    /// Promote a small operator on one subsystem to the full layout.
    pub fn embed(&self, label: &str, local: &LocalOp) -> Result<SparseOp> {
        let k = self
            .position(label)
            .ok_or_else(|| Error::Config(format!("no subsystem labeled {label}")))?;
        let dk = self.dim_of(k);
        if local.dim != dk {
            return Err(Error::Config(format!(
                "operator dimension {} does not match subsystem {label} ({dk})",
                local.dim
            )));
        }
        let pre: usize = self.subsystems[..k].iter().map(|(_, d)| d).product();
        let post = self.stride(k);
        let mut triplets = Vec::with_capacity(local.entries.len() * pre * post);
        for p in 0..pre {
            for &(r, c, v) in &local.entries {
                for q in 0..post {
                    triplets.push(((p * dk + r) * post + q, (p * dk + c) * post + q, v));
                }
            }
        }
        Ok(SparseOp::from_triplets(self.total_dim(), triplets))
    }
}

/// Small single-subsystem operator in coordinate form.
#[derive(Debug, Clone)]
pub struct LocalOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl LocalOp {
    /// |row><col| on a `dim`-dimensional subsystem (zero-based levels).
    pub fn transition(dim: usize, row: usize, col: usize) -> Self {
        Self { dim, entries: vec![(row, col, C64::new(1.0, 0.0))] }
    }

    /// Bosonic annihilation operator truncated at `dim` Fock states.
    pub fn annihilation(dim: usize) -> Self {
        let entries = (1..dim)
            .map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)))
            .collect();
        Self { dim, entries }
    }

    /// Occupation-number operator.
    pub fn number(dim: usize) -> Self {
        let entries = (1..dim).map(|n| (n, n, C64::new(n as f64, 0.0))).collect();
        Self { dim, entries }
    }
}

/// Compressed sparse row complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    pub fn zero(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![C64::new(1.0, 0.0); dim],
        }
    }

    /// Build from (row, col, value) triplets; duplicates are summed and
    /// negligible entries dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut k = 0;
        for r in 0..dim {
            while k < triplets.len() && triplets[k].0 == r {
                let c = triplets[k].1;
                debug_assert!(c < dim, "column index out of range");
                let mut v = triplets[k].2;
                k += 1;
                while k < triplets.len() && triplets[k].0 == r && triplets[k].1 == c {
                    v += triplets[k].2;
                    k += 1;
                }
                if v.norm_sqr() > 1e-60 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        debug_assert_eq!(k, triplets.len(), "row index out of range");
        Self { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= factor;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let triplets = self.triplets().chain(other.triplets()).collect();
        Self::from_triplets(self.dim, triplets)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn adjoint(&self) -> Self {
        let triplets = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, triplets)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let mid = self.cols[k];
                let a = self.vals[k];
                for k2 in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    triplets.push((r, other.cols[k2], a * other.vals[k2]));
                }
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    /// y = A x
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    /// y += factor * A x
    pub fn matvec_add(&self, factor: C64, x: &[C64], y: &mut [C64]) {
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] += factor * acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// ||A x||^2
    pub fn apply_norm_sqr(&self, x: &[C64]) -> f64 {
        let mut total = 0.0;
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            total += acc.norm_sqr();
        }
        total
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other)
            .vals
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }
}
