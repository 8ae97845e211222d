//! Dense kernels behind pseudo-variable generation: Householder QR with
//! column pivoting, Haar-distributed orthonormal frames, null-space bases and
//! the Gram-preserving pseudo-variable constructor.

use ndarray::{s, Array2, ArrayView2, ArrayViewMut2, Axis, ShapeBuilder};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::design::{check_finite, to_column_major, DesignMatrix};
use crate::error::{FsrError, Result};
use crate::rng;

/// Diagonal entries of R below `rank_tol * |r_11|` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
struct Reflector {
    start: usize,
    v: Vec<f64>,
    tau: f64,
}

impl Reflector {
    /// Apply `I - tau v v^T` to rows `start..` of every column of `m`.
    fn apply(&self, mut m: ArrayViewMut2<'_, f64>) {
        if self.tau == 0.0 {
            return;
        }
        for mut col in m.axis_iter_mut(Axis(1)) {
            let mut seg = col.slice_mut(s![self.start..]);
            let dot: f64 = seg.iter().zip(&self.v).map(|(a, b)| a * b).sum();
            if dot != 0.0 {
                let f = self.tau * dot;
                seg.iter_mut().zip(&self.v).for_each(|(a, b)| *a -= f * b);
            }
        }
    }
}

/// Result of a (possibly column-pivoted) Householder QR, `m[:, pivot] = q * r_mat`.
#[derive(Debug, Clone)]
pub struct QrFactors {
    /// n × rank, orthonormal columns.
    pub q: Array2<f64>,
    /// rank × p upper-trapezoidal factor, columns in pivoted order.
    pub r_mat: Array2<f64>,
    pub rank: usize,
    /// `pivot[k]` is the original column sitting at position `k`.
    pub pivot: Vec<usize>,
    r_full: Array2<f64>,
    reflectors: Vec<Reflector>,
    nrows: usize,
}

impl QrFactors {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Leading `k` rows of the full triangular factor, with columns moved back
    /// to the original (unpivoted) order.
    pub fn r_rows_unpivoted(&self, k: usize) -> Array2<f64> {
        let k = k.min(self.r_full.nrows());
        let p = self.r_full.ncols();
        let mut out = Array2::zeros((k, p));
        for (pos, &orig) in self.pivot.iter().enumerate() {
            out.slice_mut(s![.., orig])
                .assign(&self.r_full.slice(s![..k, pos]));
        }
        out
    }

    /// Columns `cols` of the full n×n orthogonal factor.
    pub fn full_q_columns(&self, cols: std::ops::Range<usize>) -> Array2<f64> {
        let n = self.nrows;
        let mut out = Array2::zeros((n, cols.len()).f());
        for (k, c) in cols.enumerate() {
            out[[c, k]] = 1.0;
        }
        for refl in self.reflectors.iter().rev() {
            refl.apply(out.view_mut());
        }
        out
    }

    fn diag_signs(&self) -> Vec<f64> {
        (0..self.r_full.nrows().min(self.r_full.ncols()))
            .map(|k| if self.r_full[[k, k]] < 0.0 { -1.0 } else { 1.0 })
            .collect()
    }
}

fn householder_qr(m: ArrayView2<'_, f64>, pivoting: bool, rank_tol: f64) -> QrFactors {
    let (n, p) = m.dim();
    let mut a = to_column_major(m);
    let mut pivot: Vec<usize> = (0..p).collect();
    let steps = n.min(p);
    let mut reflectors = Vec::with_capacity(steps);

    for k in 0..steps {
        if pivoting {
            let (best, _) = (k..p)
                .map(|j| (j, a.slice(s![k.., j]).iter().map(|v| v * v).sum::<f64>()))
                .fold((k, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if best != k {
                for i in 0..n {
                    a.swap([i, k], [i, best]);
                }
                pivot.swap(k, best);
            }
        }
        let x = a.slice(s![k.., k]);
        let alpha = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha == 0.0 {
            reflectors.push(Reflector { start: k, v: vec![0.0; n - k], tau: 0.0 });
            continue;
        }
        let sign = if x[0] < 0.0 { -1.0 } else { 1.0 };
        let mut v: Vec<f64> = x.to_vec();
        v[0] += sign * alpha;
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        let refl = Reflector { start: k, v, tau: 2.0 / vtv };
        refl.apply(a.slice_mut(s![.., k..]));
        // Exact zeros below the diagonal.
        a[[k, k]] = -sign * alpha;
        a.slice_mut(s![k + 1.., k]).fill(0.0);
        reflectors.push(refl);
    }

    let r_full = a.slice(s![..steps, ..]).to_owned();
    let lead = if steps > 0 { r_full[[0, 0]].abs() } else { 0.0 };
    let rank = if lead == 0.0 {
        0
    } else {
        (0..steps).filter(|&k| r_full[[k, k]].abs() > rank_tol * lead).count()
    };
    let mut qr = QrFactors {
        q: Array2::zeros((n, 0)),
        r_mat: r_full.slice(s![..rank, ..]).to_owned(),
        rank,
        pivot,
        r_full,
        reflectors,
        nrows: n,
    };
    qr.q = qr.full_q_columns(0..rank);
    qr
}

/// Column-pivoted Householder QR with numerical rank detection.
pub fn qr_pivoted(m: ArrayView2<'_, f64>, rank_tol: f64) -> Result<QrFactors> {
    check_finite(m)?;
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(FsrError::InvalidConfig(format!("rank_tol must lie in (0, 1), got {rank_tol}")));
    }
    Ok(householder_qr(m, true, rank_tol))
}

/// Random `dim × cols` matrix with orthonormal columns, Haar distributed:
/// QR of a standard Gaussian matrix with the signs of diag(R) folded into Q.
pub fn haar_orthonormal(dim: usize, cols: usize, seed: u64) -> Result<Array2<f64>> {
    if cols > dim || dim == 0 {
        return Err(FsrError::DimensionError(format!(
            "need 1 <= cols <= dim for a Haar frame, got dim={dim}, cols={cols}"
        )));
    }
    if cols == 0 {
        return Ok(Array2::zeros((dim, 0)));
    }
    let mut rng = rng::stream(seed);
    let mut g = Array2::<f64>::zeros((dim, cols).f());
    g.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
    let qr = householder_qr(g.view(), false, f64::EPSILON);
    let mut q = qr.full_q_columns(0..cols);
    for (mut col, sign) in q.axis_iter_mut(Axis(1)).zip(qr.diag_signs()) {
        col.mapv_inplace(|v| v * sign);
    }
    Ok(q)
}

/// Orthonormal basis of the orthogonal complement of the column space
/// factored by `qr`; n × (n − rank).
pub fn null_space_basis(qr: &QrFactors, n: usize) -> Result<Array2<f64>> {
    if qr.nrows() != n {
        return Err(FsrError::DimensionError(format!(
            "factorization has {} rows, asked for a basis in R^{n}",
            qr.nrows()
        )));
    }
    Ok(qr.full_q_columns(qr.rank..n))
}

/// Pseudo-variables standing in for the columns outside `source_set`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoMatrix {
    /// n × (p − s); column k replaces original column `complement[k]`.
    pub values: Array2<f64>,
    pub source_set: Vec<usize>,
    pub complement: Vec<usize>,
    pub seed: u64,
    /// Width of the random component, `r − r(S)`.
    pub residual_rank: usize,
}

/// Sorted, deduplicated, in-range, nonempty index set.
pub fn validate_index_set(set: &[usize], p: usize) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(FsrError::InvalidIndexSet("must be nonempty".into()));
    }
    let mut out = set.to_vec();
    out.sort_unstable();
    out.dedup();
    if out.len() != set.len() {
        return Err(FsrError::InvalidIndexSet("contains duplicate indices".into()));
    }
    if let Some(&bad) = out.iter().find(|&&j| j >= p) {
        return Err(FsrError::InvalidIndexSet(format!("index {bad} out of range for {p} columns")));
    }
    Ok(out)
}

pub fn complement_of(set: &[usize], p: usize) -> Vec<usize> {
    let mut member = vec![false; p];
    set.iter().for_each(|&j| member[j] = true);
    (0..p).filter(|&j| !member[j]).collect()
}

pub(crate) fn take_columns(x: ArrayView2<'_, f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((x.nrows(), idx.len()).f());
    for (k, &j) in idx.iter().enumerate() {
        out.column_mut(k).assign(&x.column(j));
    }
    out
}

/// Generates replicate pseudo-variable blocks for one design.
///
/// The global rank of the design is computed once here. With
/// `intercept_aware`, the design is column-centered and the constant vector is
/// carried along with the screened block, so the pseudo-variables are
/// mean-zero and reproduce the centered Gram matrix; this is the geometry an
/// intercept-fitting solver sees.
#[derive(Debug, Clone)]
pub struct PseudoGenerator {
    x: Array2<f64>,
    rank: usize,
    rank_tol: f64,
    intercept_aware: bool,
}

impl PseudoGenerator {
    pub fn new(x: ArrayView2<'_, f64>, intercept_aware: bool, rank_tol: f64) -> Result<Self> {
        check_finite(x)?;
        let mut xm = to_column_major(x);
        if intercept_aware {
            let n = xm.nrows() as f64;
            for mut col in xm.axis_iter_mut(Axis(1)) {
                let mean = col.sum() / n;
                col.mapv_inplace(|v| v - mean);
            }
        }
        let rank = qr_pivoted(xm.view(), rank_tol)?.rank;
        Ok(Self { x: xm, rank, rank_tol, intercept_aware })
    }

    /// The design the Gram identity refers to (centered when intercept-aware).
    pub fn design(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generate(&self, source_set: &[usize], seed: u64) -> Result<PseudoMatrix> {
        let (n, p) = self.x.dim();
        let s_set = validate_index_set(source_set, p)?;
        let complement = complement_of(&s_set, p);
        if complement.is_empty() {
            return Err(FsrError::EmptyComplement);
        }

        let xs = take_columns(self.x.view(), &s_set);
        let xsc = take_columns(self.x.view(), &complement);
        let basis = if self.intercept_aware {
            let mut b = Array2::from_elem((n, s_set.len() + 1).f(), 1.0);
            b.slice_mut(s![.., 1..]).assign(&xs);
            b
        } else {
            xs
        };
        let qr_s = qr_pivoted(basis.view(), self.rank_tol)?;
        let rank_s = qr_s.rank.saturating_sub(usize::from(self.intercept_aware));

        let projected = qr_s.q.dot(&qr_s.q.t().dot(&xsc));
        let residual = &xsc - &projected;

        let null_dim = n - qr_s.rank;
        let k = self.rank.saturating_sub(rank_s).min(null_dim);
        let mut values = projected;
        if k > 0 {
            let qr_e = qr_pivoted(residual.view(), self.rank_tol)?;
            // sqrt(n) V Omega with Omega = R_E / sqrt(n).
            let r_rows = qr_e.r_rows_unpivoted(k);
            let k = r_rows.nrows();
            let v1 = null_space_basis(&qr_s, n)?;
            let v2 = haar_orthonormal(null_dim, k, rng::derive_seed(seed, &[rng::tag::HAAR]))?;
            values = values + v1.dot(&v2).dot(&r_rows);
        }
        Ok(PseudoMatrix {
            values: to_column_major(values.view()),
            source_set: s_set,
            complement,
            seed,
            residual_rank: k,
        })
    }
}

/// Pseudo-variables for `x` itself (no centering), per the plain construction.
pub fn generate_pseudo(x: &DesignMatrix, source_set: &[usize], seed: u64) -> Result<PseudoMatrix> {
    PseudoGenerator::new(x.view(), false, DEFAULT_RANK_TOL)?.generate(source_set, seed)
}

/// Max-abs gap between the (1/n) Gram matrices of `(X_S, pseudo)` and
/// `(X_S, X_{S^c})`.
pub fn gram_deviation(x: ArrayView2<'_, f64>, pseudo: &PseudoMatrix) -> f64 {
    let n = x.nrows() as f64;
    let mut order = pseudo.source_set.clone();
    order.extend_from_slice(&pseudo.complement);
    let original = take_columns(x, &order);
    let mut replaced = original.clone();
    replaced
        .slice_mut(s![.., pseudo.source_set.len()..])
        .assign(&pseudo.values);
    let g0 = original.t().dot(&original) / n;
    let g1 = replaced.t().dot(&replaced) / n;
    (&g0 - &g1).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Columns `cols` of `x` with rows shuffled by one uniform random permutation.
pub fn permuted_copy(x: ArrayView2<'_, f64>, cols: &[usize], seed: u64) -> Result<Array2<f64>> {
    if cols.is_empty() {
        return Err(FsrError::InvalidIndexSet("must be nonempty".into()));
    }
    if let Some(&bad) = cols.iter().find(|&&j| j >= x.ncols()) {
        return Err(FsrError::InvalidIndexSet(format!("index {bad} out of range")));
    }
    let perm = random_permutation(x.nrows(), &mut rng::stream(seed));
    Ok(permute_rows(x, cols, &perm))
}

pub(crate) fn permute_rows(x: ArrayView2<'_, f64>, cols: &[usize], perm: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((x.nrows(), cols.len()).f());
    for (k, &j) in cols.iter().enumerate() {
        let src = x.column(j);
        let mut dst = out.column_mut(k);
        for (i, &pi) in perm.iter().enumerate() {
            dst[i] = src[pi];
        }
    }
    out
}

/// Max-abs deviation of `q^T q` from the identity.
pub fn orthonormality_error(q: ArrayView2<'_, f64>) -> f64 {
    let g = q.t().dot(&q);
    g.indexed_iter()
        .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
pub(crate) fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
pub(crate) fn column_means(a: ArrayView2<'_, f64>) -> ndarray::Array1<f64> {
    a.mean_axis(Axis(0)).unwrap_or_else(|| ndarray::Array1::zeros(a.ncols()))
}
