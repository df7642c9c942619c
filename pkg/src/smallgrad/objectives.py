"""Finite-sum objectives: f(x) = (1/n) sum_i f_i(x) with L-smooth convex components.

Every objective exposes component-wise value/gradient access plus vectorized
full value/gradient, and reports a certified smoothness constant ``L`` such
that each component f_i is L-smooth. Objectives are immutable after
construction and safe to share across concurrent solver runs.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit


def _as_vector(x, d: int | None = None) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {x.shape}")
    if d is not None and x.shape[0] != d:
        raise ValueError(f"expected dimension {d}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector contains non-finite entries")
    return x


def power_iteration(A: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000,
                    seed: int = 0) -> float:
    """Largest eigenvalue of a symmetric PSD matrix, to ``tol`` relative."""
    d = A.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = A @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        lam_new = float(v @ (A @ v))
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1.0):
            return lam_new
        lam = lam_new
    return lam


class FiniteSumObjective:
    """Base interface: n components in dimension d, each L-smooth and convex."""

    n: int
    d: int
    L: float

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value_component(self, i: int, x: np.ndarray) -> float:
        raise NotImplementedError

    def grad_component(self, i: int, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad_component_diff(self, i: int, x: np.ndarray,
                            y: np.ndarray) -> np.ndarray:
        """grad f_i(x) - grad f_i(y); overridable for cheaper paired access."""
        return self.grad_component(i, x) - self.grad_component(i, y)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        """Dense Hessian; used only by the reference-optimum solver."""
        raise NotImplementedError


class QuadraticObjective(FiniteSumObjective):
    """Finite sum of convex quadratics f_i(x) = (1/2) x'A_i x - b_i'x.

    The averages satisfy mean(A_i) = A and mean(b_i) = b, so the full
    objective is (1/2) x'Ax - b'x. Every A_i is PSD with largest eigenvalue
    at most L = lambda_max(A): see :func:`make_quadratic` for the split.
    """

    def __init__(self, A_parts: np.ndarray, b_parts: np.ndarray, L: float):
        self._A_parts = A_parts  # shape (n, d, d)
        self._b_parts = b_parts  # shape (n, d)
        self.A = A_parts.mean(axis=0)
        self.b = b_parts.mean(axis=0)
        self.n = int(A_parts.shape[0])
        self.d = int(A_parts.shape[1])
        self.L = float(L)

    def value(self, x):
        return float(0.5 * x @ (self.A @ x) - self.b @ x)

    def grad(self, x):
        return self.A @ x - self.b

    def value_component(self, i, x):
        return float(0.5 * x @ (self._A_parts[i] @ x) - self._b_parts[i] @ x)

    def grad_component(self, i, x):
        return self._A_parts[i] @ x - self._b_parts[i]

    def grad_component_diff(self, i, x, y):
        return self._A_parts[i] @ (x - y)

    def hessian(self, x):
        return self.A


def make_quadratic(A: np.ndarray, b: np.ndarray, n: int = 1, *,
                   seed: int = 0, jitter: float = 0.5) -> QuadraticObjective:
    """Quadratic test objective (1/2) x'Ax - b'x split into n components.

    The split keeps every component exactly L-smooth with L = lambda_max(A):
    component i gets A_i = A + E_i where the zero-mean perturbations E_i act
    on the orthogonal complement of the top eigenvector and are scaled to
    preserve both positive semidefiniteness and the top eigenvalue. When the
    spectrum leaves no room (e.g. A = c*I), only the linear terms b_i vary.
    L itself is certified by power iteration (1e-10 relative).
    """
    A = np.asarray(A, dtype=np.float64)
    b = _as_vector(b, A.shape[0])
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    scale = max(float(np.abs(A).max()), 1.0)
    if not np.allclose(A, A.T, atol=1e-12 * scale):
        raise ValueError("A must be symmetric")
    eigvals = np.linalg.eigvalsh(A)
    if eigvals[0] < -1e-10 * scale:
        raise ValueError("A must be positive semidefinite")
    if n < 1:
        raise ValueError("n must be >= 1")

    d = A.shape[0]
    L = power_iteration(A)

    A_parts = np.repeat(A[None, :, :], n, axis=0)
    b_parts = np.repeat(b[None, :], n, axis=0)
    if n > 1:
        rng = np.random.default_rng(seed)
        lam, vecs = np.linalg.eigh(A)  # ascending
        # room for perturbing the complement of the top eigenvector
        room = min(lam[-1] - lam[-2], lam[0]) if d > 1 else 0.0
        if room > 1e-12 * scale:
            U = vecs[:, :-1]
            W = rng.standard_normal((n, d - 1, d - 1))
            W = 0.5 * (W + np.transpose(W, (0, 2, 1)))
            W -= W.mean(axis=0)
            norms = np.linalg.norm(W, ord=2, axis=(1, 2))
            top = norms.max()
            if top > 0:
                W *= jitter * room / top
            A_parts += np.einsum("ij,njk,lk->nil", U, W, U)
        shifts = rng.standard_normal((n, d)) * jitter * (1.0 + np.linalg.norm(b))
        shifts -= shifts.mean(axis=0)
        b_parts += shifts
    return QuadraticObjective(A_parts, b_parts, L)


class LogisticObjective(FiniteSumObjective):
    """Binary logistic regression f_i(x) = log(1 + exp(-b_i <a_i, x>)).

    Rows are stored in CSR form; L = max_i ||a_i||^2 / 4, which is 0.25 for
    unit-norm rows.
    """

    def __init__(self, indptr: np.ndarray, indices: np.ndarray,
                 data: np.ndarray, labels: np.ndarray, d: int):
        self._indptr = indptr
        self._indices = indices
        self._data = data
        self.labels = labels
        self.n = int(labels.shape[0])
        self.d = int(d)
        from scipy.sparse import csr_matrix
        self._X = csr_matrix((data, indices, indptr), shape=(self.n, self.d))
        row_sq = np.asarray(self._X.multiply(self._X).sum(axis=1)).ravel()
        self.L = float(row_sq.max()) / 4.0

    def _margin(self, i, x):
        lo, hi = self._indptr[i], self._indptr[i + 1]
        return self.labels[i] * (self._data[lo:hi] @ x[self._indices[lo:hi]])

    def value_component(self, i, x):
        return float(np.logaddexp(0.0, -self._margin(i, x)))

    def grad_component(self, i, x):
        lo, hi = self._indptr[i], self._indptr[i + 1]
        idx = self._indices[lo:hi]
        m = self.labels[i] * (self._data[lo:hi] @ x[idx])
        coef = -self.labels[i] * expit(-m)
        g = np.zeros(self.d)
        g[idx] = coef * self._data[lo:hi]
        return g

    def grad_component_diff(self, i, x, y):
        # both gradients live on row i's support, so only one scatter is needed
        lo, hi = self._indptr[i], self._indptr[i + 1]
        idx = self._indices[lo:hi]
        row = self._data[lo:hi]
        b = self.labels[i]
        coef = -b * (expit(-b * (row @ x[idx])) - expit(-b * (row @ y[idx])))
        g = np.zeros(self.d)
        g[idx] = coef * row
        return g

    def value(self, x):
        m = self.labels * (self._X @ x)
        return float(np.logaddexp(0.0, -m).mean())

    def grad(self, x):
        m = self.labels * (self._X @ x)
        coef = -self.labels * expit(-m) / self.n
        return self._X.T @ coef

    def hessian(self, x):
        m = self.labels * (self._X @ x)
        s = expit(m)
        w = s * (1.0 - s) / self.n
        Xw = self._X.multiply(w[:, None])
        return np.asarray((self._X.T @ Xw).todense())


def make_logistic(dataset) -> LogisticObjective:
    """Logistic finite sum from a :class:`~smallgrad.datasets.SparseDataset`."""
    labels = np.asarray(dataset.labels, dtype=np.float64)
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise ValueError("logistic labels must be in {-1, +1}")
    return LogisticObjective(dataset.indptr, dataset.indices, dataset.data,
                             labels, dataset.d)


class RegularizedObjective(FiniteSumObjective):
    """Proximal wrapper f_i(x) + (delta/2) ||x - x0||^2 around a base sum.

    Components are (base.L + delta)-smooth and delta-strongly convex. The
    base gradient is recoverable through :meth:`base_grad_from`, which is the
    single arithmetic path solvers use to maintain it.
    """

    def __init__(self, base: FiniteSumObjective, x0: np.ndarray, delta: float):
        if delta <= 0:
            raise ValueError("delta must be positive")
        self.base = base
        self.x0 = _as_vector(x0, base.d)
        self.delta = float(delta)
        self.n = base.n
        self.d = base.d
        self.L = base.L + self.delta
        self.mu = self.delta

    def _penalty(self, x):
        diff = x - self.x0
        return 0.5 * self.delta * float(diff @ diff)

    def value(self, x):
        return self.base.value(x) + self._penalty(x)

    def grad(self, x):
        return self.base.grad(x) + self.delta * (x - self.x0)

    def value_component(self, i, x):
        return self.base.value_component(i, x) + self._penalty(x)

    def grad_component(self, i, x):
        return self.base.grad_component(i, x) + self.delta * (x - self.x0)

    def grad_component_diff(self, i, x, y):
        return self.base.grad_component_diff(i, x, y) + self.delta * (x - y)

    def hessian(self, x):
        return self.base.hessian(x) + self.delta * np.eye(self.d)

    def base_grad_from(self, reg_grad: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Recover the base gradient from a regularized one at the same x."""
        return reg_grad - self.delta * (x - self.x0)


def regularize(obj: FiniteSumObjective, x0: np.ndarray,
               delta: float) -> RegularizedObjective:
    """Anchor a quadratic penalty of weight delta at x0."""
    return RegularizedObjective(obj, x0, delta)


def finite_difference_check(obj, x: np.ndarray, h: float = 1e-6,
                            component: int | None = None) -> float:
    """Max relative error of the analytic gradient vs central differences.

    Probes every coordinate; relative error per coordinate uses an absolute
    floor of 1 in the denominator so near-zero entries do not blow up.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = _as_vector(x, obj.d)
    if component is None:
        value, grad = obj.value, obj.grad
    else:
        value = lambda z: obj.value_component(component, z)  # noqa: E731
        grad = lambda z: obj.grad_component(component, z)  # noqa: E731
    g = grad(x)
    worst = 0.0
    e = np.zeros_like(x)
    for j in range(x.shape[0]):
        e[j] = h
        fd = (value(x + e) - value(x - e)) / (2.0 * h)
        e[j] = 0.0
        worst = max(worst, abs(fd - g[j]) / max(abs(g[j]), 1.0))
    return worst
