"""Binary soft-margin SVM trained with sequential minimal optimization.

Labels are -1/+1. The working pair is chosen with the classic heuristic:
the second index first by largest error gap over unbound points, then by
seeded random sweeps, keeping training deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, ParameterError, ShapeError

DEFAULT_C = 1.0
DEFAULT_TOL = 1e-3
DEFAULT_MAX_PASSES = 200


def rbf_gamma(x: np.ndarray) -> float:
    """Default RBF width: 1 / (n_features * mean per-feature variance)."""
    x = np.asarray(x, dtype=float)
    mean_var = float(np.mean(np.var(x, axis=0)))
    if mean_var <= 0:
        raise DegenerateDataError("cannot derive gamma from constant features")
    return 1.0 / (x.shape[1] * mean_var)


def kernel_matrix(a: np.ndarray, b: np.ndarray, kernel: str, gamma: float | None) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"kernel inputs have {a.shape[1]} and {b.shape[1]} features")
    if kernel == "linear":
        return a @ b.T
    if kernel == "rbf":
        if gamma is None or gamma <= 0:
            raise ParameterError("rbf kernel requires gamma > 0")
        sq = (
            np.einsum("ij,ij->i", a, a)[:, None]
            + np.einsum("ij,ij->i", b, b)[None, :]
            - 2.0 * (a @ b.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-gamma * sq)
    raise ParameterError(f"unknown kernel {kernel!r}")


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray
    support_indices: np.ndarray
    dual_coefs: np.ndarray  # alpha_i * y_i per support vector
    bias: float
    kernel: str
    gamma: float | None
    C: float

    @property
    def n_support(self) -> int:
        return int(self.support_indices.size)


def train_svm(
    x: np.ndarray,
    y: np.ndarray,
    kernel: str = "rbf",
    C: float = DEFAULT_C,
    gamma: float | None = None,
    tol: float = DEFAULT_TOL,
    max_passes: int = DEFAULT_MAX_PASSES,
    seed: int = 0,
) -> SvmModel:
    """SMO training until no KKT violation exceeds tol (or the sweep budget ends)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if x.ndim != 2 or x.shape[0] != y.size:
        raise ShapeError("x must be (n, d) with one label per row")
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise DegenerateDataError("labels must contain both -1 and +1")
    if C <= 0 or tol <= 0:
        raise ParameterError("C and tol must be positive")
    if kernel == "rbf" and gamma is None:
        gamma = rbf_gamma(x)

    n = x.shape[0]
    k = kernel_matrix(x, x, kernel, gamma)
    alphas = np.zeros(n)
    bias = 0.0
    # cached decision values f_i = sum_j alpha_j y_j K_ij + bias
    f = np.full(n, bias)
    rng = np.random.default_rng(seed)

    def take_step(i: int, j: int) -> bool:
        nonlocal bias, f
        if i == j:
            return False
        ai_old, aj_old = alphas[i], alphas[j]
        yi, yj = y[i], y[j]
        ei = f[i] - yi
        ej = f[j] - yj
        if yi == yj:
            lo, hi = max(0.0, ai_old + aj_old - C), min(C, ai_old + aj_old)
        else:
            lo, hi = max(0.0, aj_old - ai_old), min(C, C + aj_old - ai_old)
        if hi - lo < 1e-12:
            return False
        eta = 2.0 * k[i, j] - k[i, i] - k[j, j]
        if eta >= 0:
            return False
        aj = aj_old - yj * (ei - ej) / eta
        aj = min(hi, max(lo, aj))
        if abs(aj - aj_old) < 1e-8 * (aj + aj_old + 1e-8):
            return False
        ai = ai_old + yi * yj * (aj_old - aj)

        b1 = bias - ei - yi * (ai - ai_old) * k[i, i] - yj * (aj - aj_old) * k[i, j]
        b2 = bias - ej - yi * (ai - ai_old) * k[i, j] - yj * (aj - aj_old) * k[j, j]
        if 0 < ai < C:
            new_bias = b1
        elif 0 < aj < C:
            new_bias = b2
        else:
            new_bias = 0.5 * (b1 + b2)

        f += (ai - ai_old) * yi * k[i] + (aj - aj_old) * yj * k[j] + (new_bias - bias)
        alphas[i], alphas[j] = ai, aj
        bias = new_bias
        return True

    def examine(i: int) -> bool:
        yi = y[i]
        ei = f[i] - yi
        r = ei * yi
        if (r < -tol and alphas[i] < C) or (r > tol and alphas[i] > 0):
            unbound = np.flatnonzero((alphas > 0) & (alphas < C))
            if unbound.size > 1:
                errors = f[unbound] - y[unbound]
                j = int(unbound[np.argmax(np.abs(errors - ei))])
                if take_step(i, j):
                    return True
            if unbound.size:
                start = rng.integers(unbound.size)
                for offset in range(unbound.size):
                    if take_step(i, int(unbound[(start + offset) % unbound.size])):
                        return True
            start = rng.integers(n)
            for offset in range(n):
                if take_step(i, int((start + offset) % n)):
                    return True
        return False

    examine_all = True
    sweeps = 0
    while sweeps < max_passes:
        sweeps += 1
        changed = 0
        if examine_all:
            for i in range(n):
                changed += examine(i)
        else:
            for i in np.flatnonzero((alphas > 0) & (alphas < C)):
                changed += examine(int(i))
        if examine_all:
            if changed == 0:
                break
            examine_all = False
        elif changed == 0:
            examine_all = True

    support = np.flatnonzero(alphas > 0)
    return SvmModel(
        support_vectors=x[support].copy(),
        support_indices=support,
        dual_coefs=alphas[support] * y[support],
        bias=float(bias),
        kernel=kernel,
        gamma=gamma,
        C=float(C),
    )


def decision_function(model: SvmModel, x: np.ndarray) -> np.ndarray:
    """Signed distance-like score sum_sv coef * K(sv, x) + bias."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if model.n_support == 0:
        return np.full(x.shape[0], model.bias)
    k = kernel_matrix(x, model.support_vectors, model.kernel, model.gamma)
    return k @ model.dual_coefs + model.bias


def predict_svm(model: SvmModel, x: np.ndarray) -> np.ndarray:
    """Signs of the decision function; an exact zero maps to +1."""
    scores = decision_function(model, x)
    return np.where(scores >= 0.0, 1.0, -1.0)
