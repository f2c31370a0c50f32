"""Core sparse and dense linear algebra kernels.

CSR storage with full symmetric pattern, matrix-vector products,
triangular solves, Matrix Market I/O, an in-repo dense symmetric
eigensolver (Householder tridiagonalization + implicit-shift QL) and
power iteration for spectral radii.  All reductions run through
sequential numba kernels so results are bit-identical regardless of
BLAS thread counts.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .errors import FormatError, SingularFactorError, ZeroOperatorError
from .rng import normals

__all__ = [
    "CsrMatrix",
    "TriFactor",
    "SpectrumSummary",
    "EigMethod",
    "spmv",
    "tri_solve",
    "read_matrix_market",
    "write_matrix_market",
    "dense_sym_eig",
    "power_spectral_radius",
    "dot",
    "norm2",
]


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _csr_matvec(row_ptr, col_idx, values, x, y):
    n = row_ptr.shape[0] - 1
    for i in range(n):
        acc = 0.0
        for p in range(row_ptr[i], row_ptr[i + 1]):
            acc += values[p] * x[col_idx[p]]
        y[i] = acc


@njit(cache=True)
def _lower_solve(row_ptr, col_idx, values, b, x, unit_diag):
    # Diagonal entry is last in each row (column indices increase).
    n = row_ptr.shape[0] - 1
    for i in range(n):
        acc = b[i]
        end = row_ptr[i + 1] - 1
        for p in range(row_ptr[i], end):
            acc -= values[p] * x[col_idx[p]]
        if unit_diag:
            x[i] = acc
        else:
            d = values[end]
            if d == 0.0:
                return i
            x[i] = acc / d
    return -1


@njit(cache=True)
def _lower_t_solve(row_ptr, col_idx, values, b, x, unit_diag):
    n = row_ptr.shape[0] - 1
    for i in range(n):
        x[i] = b[i]
    for i in range(n - 1, -1, -1):
        end = row_ptr[i + 1] - 1
        if not unit_diag:
            d = values[end]
            if d == 0.0:
                return i
            x[i] /= d
        xi = x[i]
        for p in range(row_ptr[i], end):
            x[col_idx[p]] -= values[p] * xi
    return -1


@njit(cache=True)
def _dot(a, b):
    acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i] * b[i]
    return acc


def dot(a, b):
    """Deterministic sequential dot product."""
    return _dot(np.ascontiguousarray(a), np.ascontiguousarray(b))


def norm2(a):
    """Deterministic Euclidean norm."""
    return float(np.sqrt(_dot(a, a)))


@njit(cache=True)
def _tred2(a, d, e, wantv):
    # Householder reduction to tridiagonal form (Numerical Recipes tred2).
    n = a.shape[0]
    for i in range(n - 1, 0, -1):
        l = i - 1
        h = 0.0
        scale = 0.0
        if l > 0:
            for k in range(l + 1):
                scale += abs(a[i, k])
            if scale == 0.0:
                e[i] = a[i, l]
            else:
                for k in range(l + 1):
                    a[i, k] /= scale
                    h += a[i, k] * a[i, k]
                f = a[i, l]
                g = -np.sqrt(h) if f >= 0.0 else np.sqrt(h)
                e[i] = scale * g
                h -= f * g
                a[i, l] = f - g
                f = 0.0
                for j in range(l + 1):
                    if wantv:
                        a[j, i] = a[i, j] / h
                    g = 0.0
                    for k in range(j + 1):
                        g += a[j, k] * a[i, k]
                    for k in range(j + 1, l + 1):
                        g += a[k, j] * a[i, k]
                    e[j] = g / h
                    f += e[j] * a[i, j]
                hh = f / (h + h)
                for j in range(l + 1):
                    f = a[i, j]
                    g = e[j] - hh * f
                    e[j] = g
                    for k in range(j + 1):
                        a[j, k] -= f * e[k] + g * a[i, k]
        else:
            e[i] = a[i, l]
        d[i] = h
    d[0] = 0.0
    e[0] = 0.0
    for i in range(n):
        if wantv:
            if d[i] != 0.0:
                for j in range(i):
                    g = 0.0
                    for k in range(i):
                        g += a[i, k] * a[k, j]
                    for k in range(i):
                        a[k, j] -= g * a[k, i]
            d[i] = a[i, i]
            a[i, i] = 1.0
            for j in range(i):
                a[j, i] = 0.0
                a[i, j] = 0.0
        else:
            d[i] = a[i, i]


@njit(cache=True)
def _tqli(d, e, z, wantv, max_sweeps):
    # Implicit-shift QL on a symmetric tridiagonal matrix (NR tqli).
    # e holds subdiagonals in e[0..n-2] on entry.
    n = d.shape[0]
    ee = np.empty(n, dtype=np.float64)
    for i in range(n - 1):
        ee[i] = e[i]
    ee[n - 1] = 0.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(ee[m]) <= 1e-300 or abs(ee[m]) <= 2.220446049250313e-16 * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_sweeps:
                return l + 1
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = np.hypot(g, 1.0)
            sg = r if g >= 0.0 else -r
            g = d[m] - d[l] + ee[l] / (g + sg)
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * ee[i]
                b = c * ee[i]
                r = np.hypot(f, g)
                ee[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ee[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if wantv:
                    for k in range(n):
                        f = z[k, i + 1]
                        z[k, i + 1] = s * z[k, i] + c * f
                        z[k, i] = c * z[k, i] - s * f
            if not underflow:
                d[l] -= p
                ee[l] = g
                ee[m] = 0.0
    return 0


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

class CsrMatrix:
    """Compressed-sparse-row matrix with explicit full pattern.

    When ``symmetric`` is set, logical symmetry is verified on
    construction: every stored (i, j, v) must have a bit-identical
    (j, i, v) counterpart.
    """

    def __init__(self, nrows, ncols, row_ptr, col_idx, values, symmetric=False):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        self.col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.symmetric = bool(symmetric)
        self._validate()

    def _validate(self):
        rp = self.row_ptr
        if rp.shape[0] != self.nrows + 1 or rp[0] != 0:
            raise ValueError("row_ptr must have nrows+1 entries starting at 0")
        if np.any(np.diff(rp) < 0) or rp[-1] != self.col_idx.shape[0]:
            raise ValueError("row_ptr must be non-decreasing and end at nnz")
        if self.col_idx.shape[0] != self.values.shape[0]:
            raise ValueError("col_idx and values length mismatch")
        if self.col_idx.size and (self.col_idx.min() < 0 or self.col_idx.max() >= self.ncols):
            raise ValueError("column index out of range")
        for i in range(self.nrows):
            cols = self.col_idx[rp[i]:rp[i + 1]]
            if cols.size > 1 and np.any(np.diff(cols) <= 0):
                raise ValueError(f"column indices not strictly increasing in row {i}")
        if self.symmetric:
            if self.nrows != self.ncols:
                raise ValueError("symmetric flag requires a square matrix")
            t = self.transpose()
            same = (
                np.array_equal(t.row_ptr, rp)
                and np.array_equal(t.col_idx, self.col_idx)
                and np.array_equal(t.values, self.values)
            )
            if not same:
                raise ValueError("symmetric flag set but stored pattern/values are not symmetric")

    @property
    def nnz(self):
        return int(self.row_ptr[-1])

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, vals, symmetric=False, sum_duplicates=True):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if sum_duplicates and rows.size:
            keep = np.empty(rows.size, dtype=bool)
            keep[0] = True
            keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            idx = np.cumsum(keep) - 1
            summed = np.zeros(int(idx[-1]) + 1, dtype=np.float64)
            np.add.at(summed, idx, vals)
            rows, cols, vals = rows[keep], cols[keep], summed
        row_ptr = np.zeros(nrows + 1, dtype=np.int64)
        np.add.at(row_ptr, rows + 1, 1)
        row_ptr = np.cumsum(row_ptr)
        return cls(nrows, ncols, row_ptr, cols, vals, symmetric=symmetric)

    @classmethod
    def from_dense(cls, a, symmetric=False, tol=0.0):
        a = np.asarray(a, dtype=np.float64)
        rows, cols = np.nonzero(np.abs(a) > tol)
        return cls.from_coo(a.shape[0], a.shape[1], rows, cols, a[rows, cols],
                            symmetric=symmetric)

    @classmethod
    def identity(cls, n):
        idx = np.arange(n, dtype=np.int64)
        return cls(n, n, np.arange(n + 1, dtype=np.int64), idx,
                   np.ones(n), symmetric=True)

    @classmethod
    def diagonal(cls, d):
        d = np.asarray(d, dtype=np.float64)
        n = d.shape[0]
        return cls(n, n, np.arange(n + 1, dtype=np.int64),
                   np.arange(n, dtype=np.int64), d.copy(), symmetric=True)

    def transpose(self):
        rows = np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.row_ptr))
        return CsrMatrix.from_coo(self.ncols, self.nrows, self.col_idx, rows,
                                  self.values, sum_duplicates=False)

    def to_dense(self):
        a = np.zeros((self.nrows, self.ncols))
        rows = np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.row_ptr))
        a[rows, self.col_idx] = self.values
        return a

    def diag(self):
        """Stored diagonal entries (zeros where absent)."""
        d = np.zeros(min(self.nrows, self.ncols))
        rp = self.row_ptr
        for i in range(d.shape[0]):
            cols = self.col_idx[rp[i]:rp[i + 1]]
            pos = np.searchsorted(cols, i)
            if pos < cols.size and cols[pos] == i:
                d[i] = self.values[rp[i] + pos]
        return d

    def matvec(self, x):
        return spmv(self, x)


@dataclass
class TriFactor:
    """Lower-triangular CSR factor with the diagonal stored last per row."""

    L: CsrMatrix
    unit_diag: bool = False

    def __post_init__(self):
        rp = self.L.row_ptr
        for i in range(self.L.nrows):
            if rp[i + 1] == rp[i]:
                raise ValueError(f"row {i} is empty; diagonal entry required")
            cols = self.L.col_idx[rp[i]:rp[i + 1]]
            if cols[-1] != i or np.any(cols > i):
                raise ValueError(f"row {i} is not lower triangular with explicit diagonal")
            if not self.unit_diag and self.L.values[rp[i + 1] - 1] <= 0.0:
                raise ValueError(f"nonpositive diagonal in row {i}")


class EigMethod(Enum):
    LANCZOS = "lanczos"
    DENSE = "dense"


@dataclass
class SpectrumSummary:
    lambda_min: float
    lambda_max: float
    kappa: float
    method: EigMethod

    def __post_init__(self):
        if not (0.0 < self.lambda_min <= self.lambda_max):
            raise ValueError("spectrum must satisfy 0 < lambda_min <= lambda_max")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def spmv(A, x):
    """y = A x with deterministic left-to-right row accumulation."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape[0] != A.ncols:
        raise ValueError(f"dimension mismatch: matrix has {A.ncols} columns, vector has {x.shape[0]}")
    y = np.empty(A.nrows)
    _csr_matvec(A.row_ptr, A.col_idx, A.values, x, y)
    return y


def tri_solve(F, b, transposed=False):
    """Solve L x = b (or L^T x = b) by substitution."""
    b = np.ascontiguousarray(b, dtype=np.float64)
    L = F.L
    if b.shape[0] != L.nrows:
        raise ValueError(f"dimension mismatch: factor has {L.nrows} rows, vector has {b.shape[0]}")
    x = np.empty(L.nrows)
    kern = _lower_t_solve if transposed else _lower_solve
    bad = kern(L.row_ptr, L.col_idx, L.values, b, x, F.unit_diag)
    if bad >= 0:
        raise SingularFactorError(f"zero diagonal in row {bad}")
    return x


def read_matrix_market(path):
    """Read a coordinate real symmetric Matrix Market file.

    The stored lower triangle is mirrored to a full symmetric pattern;
    duplicate entries are summed.
    """
    with open(path, "r") as fh:
        header = fh.readline().strip().lower().split()
        if len(header) != 5 or header[0] != "%%matrixmarket" or header[1] != "matrix":
            raise FormatError(f"{path}: not a Matrix Market matrix file")
        fmt, field, sym = header[2], header[3], header[4]
        if fmt != "coordinate":
            raise FormatError(f"{path}: unsupported format '{fmt}' (coordinate only)")
        if field != "real":
            raise FormatError(f"{path}: unsupported field '{field}' (real only)")
        if sym != "symmetric":
            raise FormatError(f"{path}: unsupported symmetry '{sym}' (symmetric only)")
        line = fh.readline()
        while line and (line.startswith("%") or not line.strip()):
            line = fh.readline()
        try:
            nrows, ncols, nnz = (int(t) for t in line.split())
        except ValueError as exc:
            raise FormatError(f"{path}: malformed size line") from exc
        if nrows != ncols:
            raise FormatError(f"{path}: symmetric matrix must be square")
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        k = 0
        for line in fh:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(f"{path}: malformed entry line '{line}'")
            if k >= nnz:
                raise FormatError(f"{path}: more entries than declared ({nnz})")
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise FormatError(f"{path}: index ({i + 1},{j + 1}) out of range")
            rows[k], cols[k], vals[k] = i, j, float(parts[2])
            k += 1
        if k != nnz:
            raise FormatError(f"{path}: expected {nnz} entries, found {k}")
    off = rows != cols
    full_rows = np.concatenate([rows, cols[off]])
    full_cols = np.concatenate([cols, rows[off]])
    full_vals = np.concatenate([vals, vals[off]])
    return CsrMatrix.from_coo(nrows, ncols, full_rows, full_cols, full_vals,
                              symmetric=True)


def write_matrix_market(A, path, comment=None):
    """Write the lower triangle of a symmetric CsrMatrix in coordinate format."""
    if not A.symmetric:
        raise ValueError("write_matrix_market supports symmetric matrices only")
    rows = np.repeat(np.arange(A.nrows, dtype=np.int64), np.diff(A.row_ptr))
    keep = A.col_idx <= rows
    r, c, v = rows[keep], A.col_idx[keep], A.values[keep]
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        if comment:
            fh.write(f"% {comment}\n")
        fh.write(f"{A.nrows} {A.ncols} {r.size}\n")
        for i in range(r.size):
            fh.write(f"{r[i] + 1} {c[i] + 1} {v[i]:.17g}\n")


def _is_tridiagonal(a):
    n = a.shape[0]
    if n <= 2:
        return True
    mask = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :]) > 1
    return not np.any(a[mask])


def dense_sym_eig(a, eigenvectors=False, max_sweeps=50):
    """Eigenvalues (ascending) of a dense symmetric matrix.

    Householder tridiagonalization followed by implicit-shift QL; the
    Householder stage is skipped for already-tridiagonal input.
    """
    a = np.array(a, dtype=np.float64, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    n = a.shape[0]
    if n > 5000:
        raise ValueError("dense eigensolver is capped at size 5000")
    scale = np.max(np.abs(a)) or 1.0
    if np.max(np.abs(a - a.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric within 1e-12 relative")
    d = np.empty(n)
    e = np.empty(n)
    if _is_tridiagonal(a):
        d[:] = np.diag(a)
        e[1:] = np.diag(a, -1)
        e[0] = 0.0
        z = np.eye(n) if eigenvectors else np.empty((1, 1))
    else:
        work = a.copy()
        _tred2(work, d, e, eigenvectors)
        z = work if eigenvectors else np.empty((1, 1))
    sub = np.ascontiguousarray(e[1:]) if n > 1 else np.empty(0)
    fail = _tqli(d, sub, z, eigenvectors, max_sweeps)
    if fail:
        raise RuntimeError(f"QL failed to converge within {max_sweeps} sweeps (eigenvalue {fail - 1})")
    order = np.argsort(d, kind="stable")
    w = d[order]
    if eigenvectors:
        return w, z[:, order]
    return w


def power_spectral_radius(apply, m, iters, seed):
    """Spectral radius estimate ||G^{k+1}v|| / ||G^k v|| with per-step normalization."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    for restart in range(4):
        v = normals(np.uint64(seed) + np.uint64(restart), m)
        nrm = norm2(v)
        if nrm == 0.0:
            continue
        v /= nrm
        ratio = 0.0
        dead = False
        for _ in range(iters):
            w = np.asarray(apply(v), dtype=np.float64)
            ratio = norm2(w)
            if ratio == 0.0:
                dead = True
                break
            v = w / ratio
        if not dead:
            return float(ratio)
    raise ZeroOperatorError("power iteration produced the zero vector after 3 restarts")
