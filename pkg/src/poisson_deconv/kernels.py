"""Compactly supported smoothing kernels and their norms.

The deconvolution estimator only ever evaluates the *derivative* of the
kernel, so every :class:`KernelSpec` carries an analytic derivative next to
the kernel itself, together with the handful of norms that the selection
penalty and the variance formula need.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

__all__ = [
    "KernelSpec",
    "compute_norms",
    "epanechnikov",
    "higher_order_kernel",
    "from_name",
    "kernel_moment",
]

MAX_ORDER = 10

_QUAD_OPTS = dict(limit=500, epsabs=1e-13, epsrel=1e-11)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A differentiable kernel supported on ``[-support_radius, support_radius]``.

    ``value_fn`` and ``deriv_fn`` are vectorized and vanish outside the
    support.  ``deriv_fn`` additionally vanishes *at* the support endpoints,
    so that ties in the estimator's window arithmetic (a translate window
    touching its neighbour) contribute nothing from either side.

    ``order`` is the highest vanishing-moment index: the moments of order
    1..order of the kernel are all zero.
    """

    support_radius: float
    order: int
    value_fn: Callable[[np.ndarray], np.ndarray]
    deriv_fn: Callable[[np.ndarray], np.ndarray]
    norm_k_l1: float
    norm_kprime_l1: float
    norm_kprime_l2: float
    norm_kprime_sup: float
    label: str = "custom"


def compute_norms(
    value_fn: Callable[[np.ndarray], np.ndarray],
    deriv_fn: Callable[[np.ndarray], np.ndarray],
    support_radius: float,
) -> tuple[float, float, float, float]:
    """Norms ``(||K||_1, ||K'||_1, ||K'||_2, ||K'||_inf)`` by quadrature.

    Integrals use adaptive quadrature on the support (relative tolerance
    1e-11); the sup norm comes from a 200001-point scan refined by repeated
    local rescans.  Rejects kernels that take non-finite values inside the
    support, and kernels that do not vanish at the support boundary: those
    are discontinuous as functions on the real line, hence not differentiable
    on the closed support.
    """
    radius = float(support_radius)
    if not radius > 0:
        raise ValueError("support_radius must be positive")
    probe = np.linspace(-radius, radius, 20001)
    vals = np.asarray(value_fn(probe), dtype=float)
    dvals = np.asarray(deriv_fn(probe), dtype=float)
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(dvals))):
        raise ValueError("kernel takes a non-finite value inside its support")
    edge = max(
        abs(float(value_fn(np.asarray(radius * (1.0 - 1e-9))))),
        abs(float(value_fn(np.asarray(-radius * (1.0 - 1e-9))))),
    )
    if edge > 1e-6 * max(1.0, float(np.max(np.abs(vals)))):
        raise ValueError(
            "kernel does not vanish at the support boundary, so it is not "
            "differentiable on its closed support"
        )

    def _abs_val(u: float) -> float:
        return abs(float(value_fn(np.asarray(u))))

    def _abs_deriv(u: float) -> float:
        return abs(float(deriv_fn(np.asarray(u))))

    def _deriv_sq(u: float) -> float:
        return float(deriv_fn(np.asarray(u))) ** 2

    k_l1 = quad(_abs_val, -radius, radius, **_QUAD_OPTS)[0]
    kp_l1 = quad(_abs_deriv, -radius, radius, **_QUAD_OPTS)[0]
    kp_l2 = float(np.sqrt(quad(_deriv_sq, -radius, radius, **_QUAD_OPTS)[0]))
    kp_sup = _sup_by_scan(deriv_fn, radius)
    return float(k_l1), float(kp_l1), kp_l2, float(kp_sup)


def _sup_by_scan(fn: Callable, radius: float, points: int = 200001) -> float:
    grid = np.linspace(-radius, radius, points)
    mags = np.abs(np.asarray(fn(grid), dtype=float))
    j = int(np.argmax(mags))
    best = float(mags[j])
    lo = grid[max(j - 1, 0)]
    hi = grid[min(j + 1, points - 1)]
    for _ in range(4):
        fine = np.linspace(lo, hi, 2001)
        fm = np.abs(np.asarray(fn(fine), dtype=float))
        jj = int(np.argmax(fm))
        best = max(best, float(fm[jj]))
        lo = fine[max(jj - 1, 0)]
        hi = fine[min(jj + 1, 2000)]
    return best


def kernel_moment(kernel: KernelSpec, j: int) -> float:
    """j-th moment of the kernel, by adaptive quadrature on its support."""
    radius = kernel.support_radius

    def _f(u: float) -> float:
        return (u**j) * float(kernel.value_fn(np.asarray(u)))

    return quad(_f, -radius, radius, **_QUAD_OPTS)[0]


def _reconcile(spec: KernelSpec) -> None:
    """Cross-check stored norms against quadrature; a mismatch is a bug."""
    numeric = compute_norms(spec.value_fn, spec.deriv_fn, spec.support_radius)
    stored = (
        spec.norm_k_l1,
        spec.norm_kprime_l1,
        spec.norm_kprime_l2,
        spec.norm_kprime_sup,
    )
    for name, s, q in zip(
        ("norm_k_l1", "norm_kprime_l1", "norm_kprime_l2", "norm_kprime_sup"),
        stored,
        numeric,
    ):
        if abs(s - q) > 1e-8 * max(1.0, abs(s)):
            raise RuntimeError(
                f"kernel construction bug: {name} stored={s!r} quadrature={q!r}"
            )


@lru_cache(maxsize=None)
def epanechnikov() -> KernelSpec:
    """Parabolic kernel ``0.75 * (1 - u^2)`` on ``[-1, 1]``, order 1."""

    def value(u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)

    def deriv(u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) < 1.0, -1.5 * u, 0.0)

    spec = KernelSpec(
        support_radius=1.0,
        order=1,
        value_fn=value,
        deriv_fn=deriv,
        norm_k_l1=1.0,
        norm_kprime_l1=1.5,
        norm_kprime_l2=float(np.sqrt(1.5)),
        norm_kprime_sup=1.5,
        label="epanechnikov",
    )
    _reconcile(spec)
    return spec


def _moment_coefficients(order: int) -> np.ndarray:
    """Coefficients b of K(u) = (1 - u^2) * sum_i b_i u^(2i) on [-1, 1].

    The b solve the exact rational linear system that pins the zeroth moment
    to one and the even moments 2..order to zero; odd moments vanish by
    symmetry.  Solved in exact arithmetic so conditioning never degrades the
    moment identities.
    """
    p = order // 2
    size = p + 1
    mat = [
        [Fraction(2, 2 * (i + j) + 1) - Fraction(2, 2 * (i + j) + 3) for i in range(size)]
        for j in range(size)
    ]
    rhs = [Fraction(1)] + [Fraction(0)] * p
    # Gaussian elimination over the rationals.
    for col in range(size):
        pivot = next(r for r in range(col, size) if mat[r][col] != 0)
        mat[col], mat[pivot] = mat[pivot], mat[col]
        rhs[col], rhs[pivot] = rhs[pivot], rhs[col]
        inv = Fraction(1) / mat[col][col]
        mat[col] = [v * inv for v in mat[col]]
        rhs[col] = rhs[col] * inv
        for r in range(size):
            if r != col and mat[r][col] != 0:
                factor = mat[r][col]
                mat[r] = [v - factor * w for v, w in zip(mat[r], mat[col])]
                rhs[r] = rhs[r] - factor * rhs[col]
    return np.array([float(v) for v in rhs])


@lru_cache(maxsize=None)
def higher_order_kernel(ell: int) -> KernelSpec:
    """Polynomial kernel on ``[-1, 1]`` whose moments 1..ell vanish.

    Built as ``(1 - u^2)`` times an even polynomial whose coefficients are
    solved from the moment conditions; ``ell = 1`` reproduces the parabolic
    kernel.  Orders above ``MAX_ORDER`` are rejected (the polynomials become
    numerically useless long before the algebra breaks).
    """
    ell = int(ell)
    if ell < 1:
        raise ValueError("kernel order must be at least 1")
    if ell > MAX_ORDER:
        raise ValueError(f"kernel orders above {MAX_ORDER} are unsupported")
    b = _moment_coefficients(ell)
    coeffs = np.zeros(2 * (len(b) - 1) + 3)
    for i, bi in enumerate(b):
        coeffs[2 * i] += bi
        coeffs[2 * i + 2] -= bi
    poly = np.polynomial.Polynomial(coeffs)
    dpoly = poly.deriv()

    def value(u, _p=poly):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) <= 1.0, _p(u), 0.0)

    def deriv(u, _d=dpoly):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) < 1.0, _d(u), 0.0)

    norms = compute_norms(value, deriv, 1.0)
    return KernelSpec(1.0, ell, value, deriv, *norms, label=f"order-{ell}")


def from_name(name: str) -> KernelSpec:
    """Resolve a kernel by name: ``epanechnikov`` or ``order-<ell>``."""
    if name == "epanechnikov":
        return epanechnikov()
    if name.startswith("order-"):
        try:
            ell = int(name.split("-", 1)[1])
        except ValueError:
            raise ValueError(f"unknown kernel {name!r}") from None
        return higher_order_kernel(ell)
    raise ValueError(
        f"unknown kernel {name!r}; expected 'epanechnikov' or 'order-<ell>'"
    )
