"""Linear operators with explicit adjoints, plus discrete TV machinery.

Images of shape (n, m) are handled as column-major vectorizations (columns
stacked), so the Kronecker block I (x) B differentiates along the row
index within each column.
"""

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError

__all__ = [
    "LinearOperator", "identity", "dense", "sparse", "zero",
    "first_difference", "tv_gradient", "scaled", "compose",
    "op_norm_sq", "safe_norm_sq", "atv", "itv",
]


class LinearOperator:
    """A bounded linear map backed by a dense or sparse matrix.

    Immutable after construction; ``apply``/``adjoint_apply`` are pure.
    """

    def __init__(self, mat, kind):
        if sp.issparse(mat):
            mat = mat.tocsr()
            self._matT = mat.T.tocsr()
        else:
            mat = np.asarray(mat, dtype=float)
            if mat.ndim != 2:
                raise DimensionError("matrix must be 2-dimensional")
            self._matT = mat.T
        self._mat = mat
        self.kind = kind
        self.rows, self.cols = mat.shape
        if self.rows < 1 or self.cols < 1:
            raise DimensionError(
                f"operator dimensions must be positive, got {mat.shape}")

    def apply(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.cols:
            raise DimensionError(
                f"apply expects length {self.cols}, got {x.size}")
        return np.asarray(self._mat @ x).ravel()

    def adjoint_apply(self, y):
        y = np.asarray(y, dtype=float).ravel()
        if y.size != self.rows:
            raise DimensionError(
                f"adjoint_apply expects length {self.rows}, got {y.size}")
        return np.asarray(self._matT @ y).ravel()

    @property
    def matrix(self):
        """Backing matrix (sparse CSR or dense ndarray)."""
        return self._mat

    def to_dense(self):
        if sp.issparse(self._mat):
            return self._mat.toarray()
        return np.array(self._mat)

    def __repr__(self):
        return f"LinearOperator({self.rows}x{self.cols}, kind={self.kind!r})"


def identity(n):
    if n < 1:
        raise DimensionError("identity needs n >= 1")
    return LinearOperator(sp.identity(n, format="csr"), "identity")


def dense(mat):
    return LinearOperator(np.asarray(mat, dtype=float), "dense-matrix")


def sparse(mat):
    return LinearOperator(sp.csr_matrix(mat), "sparse-matrix")


def zero(rows, cols):
    if rows < 1 or cols < 1:
        raise DimensionError("zero operator needs positive dimensions")
    return LinearOperator(sp.csr_matrix((rows, cols)), "sparse-matrix")


def first_difference(n):
    """n x n forward difference with a reflexive (all-zero) last row."""
    if n < 1:
        raise DimensionError("first_difference needs n >= 1")
    rows = np.repeat(np.arange(n - 1), 2)
    cols = np.empty(2 * (n - 1), dtype=int)
    cols[0::2] = np.arange(n - 1)
    cols[1::2] = np.arange(1, n)
    data = np.tile([-1.0, 1.0], n - 1)
    mat = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    return LinearOperator(mat, "first-difference")


def tv_gradient(n, m):
    """Discrete gradient of an n x m image, stacked (2nm) x (nm).

    The first nm output rows are within-column (row-index) differences,
    the second nm are across-column differences.
    """
    if n < 1 or m < 1:
        raise DimensionError("tv_gradient needs n, m >= 1")
    bn = first_difference(n).matrix
    bm = first_difference(m).matrix
    top = sp.kron(sp.identity(m), bn, format="csr")
    bottom = sp.kron(bm, sp.identity(n), format="csr")
    return LinearOperator(sp.vstack([top, bottom], format="csr"),
                          "tv-gradient")


def scaled(op, s):
    return LinearOperator(op.matrix * float(s), "scaled")


def compose(a, b):
    """The map x -> a(b(x))."""
    if b.rows != a.cols:
        raise DimensionError(
            f"cannot compose {a.rows}x{a.cols} after {b.rows}x{b.cols}")
    return LinearOperator(a.matrix @ b.matrix, "composition")


def _seed_vectors(n):
    v = np.ones(n)
    yield v / np.linalg.norm(v)
    v = 1.0 + np.arange(n, dtype=float) / n
    yield v / np.linalg.norm(v)
    v = np.zeros(n)
    v[0] = 1.0
    yield v


def op_norm_sq(op, tol=1e-9, max_iter=100_000):
    """Estimate ||B||^2 = lambda_max(B^T B) by power iteration.

    Starts from a deterministic all-ones vector (deterministically perturbed
    if that lies in the null space).  Stops when the geometric tail bound on
    the Rayleigh-quotient error drops below ``tol`` relative, so the result
    is within ``tol`` of the true largest eigenvalue whenever the iteration
    converges before ``max_iter``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = w = None
    for cand in _seed_vectors(op.cols):
        wc = op.adjoint_apply(op.apply(cand))
        if np.linalg.norm(wc) > 0:
            v, w = cand, wc
            break
    if v is None:
        return 0.0
    lam = float(v @ w)
    diff_prev = np.inf
    for _ in range(max_iter):
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        w = op.adjoint_apply(op.apply(v))
        lam_new = float(v @ w)
        diff = abs(lam_new - lam)
        lam = lam_new
        if diff == 0.0:
            break
        if np.isfinite(diff_prev) and diff_prev > 0.0:
            r = diff / diff_prev
            if r < 1.0 and diff * r / (1.0 - r) <= tol * max(lam, 1e-300):
                break
        diff_prev = diff
    return max(lam, 0.0)


def safe_norm_sq(op, tol=1e-9, max_iter=100_000):
    """Upper-bound flavor of :func:`op_norm_sq` for step-size formulas.

    Power iteration approaches the top eigenvalue from below; the strict
    step-size inequalities need an upper bound, hence the (1 + 10 tol)
    inflation.
    """
    return op_norm_sq(op, tol=tol, max_iter=max_iter) * (1.0 + 10.0 * tol)


def _image(u, n, m):
    u = np.asarray(u, dtype=float).ravel()
    if u.size != n * m:
        raise DimensionError(f"expected image of {n * m} pixels, got {u.size}")
    return u.reshape((n, m), order="F")


def atv(u, n, m):
    """Anisotropic total variation of a column-major n x m image."""
    img = _image(u, n, m)
    dx = img[:, 1:] - img[:, :-1]
    dy = img[1:, :] - img[:-1, :]
    return float(np.abs(dx).sum() + np.abs(dy).sum())


def itv(u, n, m):
    """Isotropic total variation of a column-major n x m image."""
    img = _image(u, n, m)
    dx = np.zeros((n, m))
    dx[:, :-1] = img[:, 1:] - img[:, :-1]
    dy = np.zeros((n, m))
    dy[:-1, :] = img[1:, :] - img[:-1, :]
    return float(np.sqrt(dx * dx + dy * dy).sum())
