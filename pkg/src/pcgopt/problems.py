"""Test linear systems: 2-D variable-coefficient diffusion and a diagonal demo.

The diffusion operator -(D1 u_x)_x - (D2 u_y)_y on the unit square with
homogeneous Dirichlet boundaries is discretized with the 5-point flux-form
stencil on the interior n x n grid.  The stencil is assembled without the
1/h^2 scaling (CG iterates and both convergence functionals are invariant
under joint positive scaling of A and b) and the right-hand side is defined
as b = A x_exact so the discrete solution is exactly the sampled sine
product.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .sparsela import CsrMatrix, spmv

__all__ = ["CoeffKind", "DiffusionSpec", "LinearSystem",
           "build_diffusion", "build_diag_demo"]


class CoeffKind(Enum):
    CONSTANT = "constant"
    DISCONTINUOUS = "discontinuous"


@dataclass
class DiffusionSpec:
    n_interior: int
    coeff: CoeffKind = CoeffKind.CONSTANT

    def __post_init__(self):
        if isinstance(self.coeff, str):
            self.coeff = CoeffKind(self.coeff)
        if self.n_interior < 2:
            raise ValueError("n_interior must be >= 2")

    @property
    def h(self):
        return 1.0 / (self.n_interior + 1)


@dataclass
class LinearSystem:
    A: CsrMatrix
    b: np.ndarray
    x_exact: np.ndarray | None = None


def _d1(x, y, kind):
    # Midpoints on the boundary of [1/4, 3/4]^2 take the inside value.
    if kind is CoeffKind.CONSTANT:
        return 1.0
    inside = (0.25 <= x <= 0.75) and (0.25 <= y <= 0.75)
    return 1000.0 if inside else 1.0


def _d2(x, y, kind):
    # D2 = D1/2 in the discontinuous case, identically 1 otherwise.
    if kind is CoeffKind.CONSTANT:
        return 1.0
    return 0.5 * _d1(x, y, kind)


def build_diffusion(spec):
    """Assemble the 5-point diffusion system with b = A x_exact."""
    n = spec.n_interior
    h = spec.h
    kind = spec.coeff
    m = n * n
    rows, cols, vals = [], [], []
    # node (i, j) at x=(i+1)h, y=(j+1)h, row index j*n + i
    for j in range(n):
        y = (j + 1) * h
        for i in range(n):
            x = (i + 1) * h
            idx = j * n + i
            # Midpoint coordinates are computed from the link index with a
            # single canonical expression so the two nodes sharing a link
            # evaluate D at bit-identical points (exact symmetry of A).
            w = _d1((i + 0.5) * h, y, kind)
            e = _d1((i + 1.5) * h, y, kind)
            s = _d2(x, (j + 0.5) * h, kind)
            no = _d2(x, (j + 1.5) * h, kind)
            diag = w + e + s + no
            if i > 0:
                rows.append(idx); cols.append(idx - 1); vals.append(-w)
            if i < n - 1:
                rows.append(idx); cols.append(idx + 1); vals.append(-e)
            if j > 0:
                rows.append(idx); cols.append(idx - n); vals.append(-s)
            if j < n - 1:
                rows.append(idx); cols.append(idx + n); vals.append(-no)
            rows.append(idx); cols.append(idx); vals.append(diag)
    A = CsrMatrix.from_coo(m, m, rows, cols, vals, symmetric=True)
    xi = (np.arange(n) + 1) * h
    sx = np.sin(np.pi * xi)
    x_exact = np.outer(sx, sx).reshape(m)  # row j*n+i -> sin(pi x_i) sin(pi y_j)
    b = spmv(A, x_exact)
    return LinearSystem(A=A, b=b, x_exact=x_exact)


def build_diag_demo(m):
    """A = diag(1..m), x_exact = ones, b = A x_exact."""
    if m < 2:
        raise ValueError("m must be >= 2")
    d = np.arange(1, m + 1, dtype=np.float64)
    A = CsrMatrix.diagonal(d)
    x_exact = np.ones(m)
    return LinearSystem(A=A, b=d.copy(), x_exact=x_exact)
