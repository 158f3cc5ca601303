"""Measured domains, orthonormal bases and quadrature.

Three built-in spaces are provided, each paired with a probability measure:

* ``legendre`` on the interval [-1, 1] with ``dmu = dx / 2``,
* ``fourier`` on the circle [0, 1) with Lebesgue measure,
* ``piecewise_constant`` on the unit interval [0, 1) with Lebesgue measure.

All scalars are treated as complex. The built-in bases are real, so
conjugation only matters for complex-valued targets. Inner products are
linear in the first slot and conjugate-linear in the second.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import DomainError, InconsistencyError, ParameterError, SingularPointError

BASES = ("legendre", "fourier", "piecewise_constant")
DOMAINS = ("interval", "circle", "unit_interval")

_DOMAIN_OF = {
    "legendre": "interval",
    "fourier": "circle",
    "piecewise_constant": "unit_interval",
}

ORTHONORMALITY_TOL = 1e-10
COEFF_CONSISTENCY_TOL = 1e-8


@dataclass(frozen=True)
class FunctionSpace:
    """An ``n``-dimensional space spanned by an orthonormal basis.

    Parameters
    ----------
    basis_id : str
        One of ``legendre``, ``fourier``, ``piecewise_constant``.
    n : int
        Dimension. Must be odd for ``fourier``.
    quadrature_order : int
        Gauss nodes per quadrature piece. The interval rule never uses fewer
        than ``4 n`` nodes; the circle and unit interval use one panel per
        cell of the uniform ``n``-cell partition, so every basis product
        integrates exactly (or to round-off for trigonometric products).
    domain_id : str, optional
        Derived from the basis when omitted.
    """

    basis_id: str
    n: int
    quadrature_order: int = 64
    domain_id: Optional[str] = None

    def __post_init__(self):
        if self.basis_id not in BASES:
            raise ParameterError(f"unknown basis {self.basis_id!r}; expected one of {BASES}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"dimension must be a positive integer, got {self.n!r}")
        if self.quadrature_order < 1:
            raise ParameterError("quadrature_order must be positive")
        if self.basis_id == "fourier" and self.n % 2 == 0:
            raise ParameterError("fourier basis requires odd n")
        expected = _DOMAIN_OF[self.basis_id]
        if self.domain_id is None:
            object.__setattr__(self, "domain_id", expected)
        elif self.domain_id != expected:
            raise ParameterError(f"basis {self.basis_id} lives on {expected}, not {self.domain_id}")

    @property
    def bounds(self):
        return (-1.0, 1.0) if self.domain_id == "interval" else (0.0, 1.0)

    @property
    def closed_right(self):
        return self.domain_id == "interval"

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.bounds
        right = x <= hi if self.closed_right else x < hi
        return (x >= lo) & right

    def envelope(self):
        """Closed-form ``sup |L_j|^2`` for every basis function, as an array of length n."""
        j = np.arange(1, self.n + 1)
        if self.basis_id == "legendre":
            return (2 * j - 1).astype(float)
        if self.basis_id == "fourier":
            env = np.full(self.n, 2.0)
            env[0] = 1.0
            return env
        return np.full(self.n, float(self.n))

    def basis_function(self, j):
        """The ``j``-th basis function (0-based) as a vectorised callable."""
        if not 0 <= j < self.n:
            raise ParameterError(f"basis index {j} out of range for n={self.n}")
        return lambda x: basis_eval(self, x)[..., j]

    def with_dimension(self, n):
        return FunctionSpace(self.basis_id, n, self.quadrature_order)


def _check_domain(space, x):
    if not np.all(space.contains(x)):
        bad = np.asarray(x)[~space.contains(x)]
        raise DomainError(f"point(s) {bad.ravel()[:5]} outside the {space.domain_id} domain")


def _legendre(x, n):
    # normalised so that int P_j P_k dx/2 = delta_jk
    out = np.empty(x.shape + (n,))
    out[..., 0] = 1.0
    if n > 1:
        out[..., 1] = x
    for k in range(1, n - 1):
        out[..., k + 1] = ((2 * k + 1) * x * out[..., k] - k * out[..., k - 1]) / (k + 1)
    return out * np.sqrt(2 * np.arange(n) + 1.0)


def _fourier(x, n):
    out = np.empty(x.shape + (n,))
    out[..., 0] = 1.0
    for k in range(1, (n - 1) // 2 + 1):
        arg = 2 * np.pi * k * x
        out[..., 2 * k - 1] = np.sqrt(2.0) * np.cos(arg)
        out[..., 2 * k] = np.sqrt(2.0) * np.sin(arg)
    return out


def _piecewise_constant(x, n):
    cell = np.minimum(np.floor(x * n).astype(int), n - 1)
    out = np.zeros(x.shape + (n,))
    np.put_along_axis(out, cell[..., None], np.sqrt(float(n)), axis=-1)
    return out


_EVALUATORS = {
    "legendre": _legendre,
    "fourier": _fourier,
    "piecewise_constant": _piecewise_constant,
}


def basis_eval(space: FunctionSpace, x) -> np.ndarray:
    """Evaluate ``(L_1(x), ..., L_n(x))``.

    A scalar ``x`` gives a complex vector of length ``n``; an array of shape
    ``s`` gives an array of shape ``s + (n,)``.
    """
    x = np.asarray(x, dtype=float)
    _check_domain(space, x)
    return _EVALUATORS[space.basis_id](x, space.n).astype(complex)


def christoffel_sum(space, x):
    """``sum_j |L_j(x)|^2`` (the inverse Christoffel function up to 1/n)."""
    vals = basis_eval(space, x)
    return np.sum(np.abs(vals) ** 2, axis=-1)


def christoffel_weight(space: FunctionSpace, x):
    """Optimal weight ``w(x) = n / sum_j |L_j(x)|^2``."""
    s = christoffel_sum(space, x)
    if np.any(s <= 0.0):
        raise SingularPointError("sum of squared basis values vanishes")
    w = space.n / s
    return float(w) if np.ndim(w) == 0 else w


def uniform_grid(space, size):
    """Uniform grid; the interval grid includes both endpoints, periodic/unit grids use cell midpoints."""
    if size < 1:
        raise ParameterError("grid size must be positive")
    if space.domain_id == "interval":
        return np.array([0.0]) if size == 1 else np.linspace(-1.0, 1.0, size)
    return (np.arange(size) + 0.5) / size


# -- quadrature -----------------------------------------------------------


def _gauss_pieces(cuts, order):
    gx, gw = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        half = 0.5 * (b - a)
        nodes.append(0.5 * (a + b) + half * gx)
        weights.append(half * gw)
    return np.concatenate(nodes), np.concatenate(weights)


def quadrature_rule(space: FunctionSpace, breakpoints: Sequence[float] = ()):
    """Nodes and mu-weights (summing to one) for integrals over the domain.

    ``breakpoints`` are points where an integrand may jump; the rule is split
    there so that piecewise smooth integrands are handled accurately.
    """
    lo, hi = space.bounds
    inner = sorted({float(b) for b in breakpoints if lo < b < hi})
    if space.domain_id == "interval":
        order = max(4 * space.n, space.quadrature_order)
        x, w = _gauss_pieces([lo] + inner + [hi], order)
        return x, w / 2.0
    # circle and unit interval: Gauss panels on a uniform n-cell partition
    cells = set(np.arange(space.n + 1) / space.n) | set(inner)
    return _gauss_pieces(sorted(cells), max(4, space.quadrature_order))


# -- targets -------------------------------------------------------------


@dataclass(frozen=True)
class TargetFunction:
    """A pointwise-evaluable function with optional exact projection data.

    ``coeffs`` holds the inner products ``<u, L_j>`` for the space the target
    was built against and ``norm_sq`` holds ``||u||^2``. ``breakpoints`` lists
    jump locations, used to split quadrature.
    """

    func: Callable
    coeffs: Optional[np.ndarray] = None
    norm_sq: Optional[float] = None
    breakpoints: tuple = ()
    name: str = "u"

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=complex)


Integrand = Union[TargetFunction, Callable]


def make_target(space, func, coeffs=None, norm_sq=None, breakpoints=(), name="u"):
    """Build a :class:`TargetFunction`, checking any exact data against quadrature."""
    u = TargetFunction(func, None, None, tuple(breakpoints), name)
    if coeffs is not None:
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (space.n,):
            raise ParameterError(f"expected {space.n} coefficients, got shape {coeffs.shape}")
        quad = quadrature_coeffs(space, u)
        if np.max(np.abs(quad - coeffs)) > COEFF_CONSISTENCY_TOL:
            raise InconsistencyError(
                f"exact coefficients of {name} disagree with quadrature by "
                f"{np.max(np.abs(quad - coeffs)):.3e}"
            )
    if norm_sq is not None:
        quad = inner_product(space, u, u).real
        if abs(quad - norm_sq) > COEFF_CONSISTENCY_TOL * max(1.0, abs(norm_sq)):
            raise InconsistencyError(f"exact norm of {name} disagrees with quadrature")
        norm_sq = float(norm_sq)
    return TargetFunction(func, coeffs, norm_sq, tuple(breakpoints), name)


def basis_target(space, coeffs, name="v"):
    """The element ``sum_j coeffs[j] L_j`` of the space, with exact data."""
    coeffs = np.asarray(coeffs, dtype=complex)
    return TargetFunction(
        lambda x: basis_eval(space, x) @ coeffs,
        coeffs,
        float(np.sum(np.abs(coeffs) ** 2)),
        (),
        name,
    )


def _breaks(f):
    return getattr(f, "breakpoints", ())


def inner_product(space: FunctionSpace, f: Integrand, g: Integrand) -> complex:
    """Quadrature value of ``int f conj(g) dmu``."""
    x, w = quadrature_rule(space, tuple(_breaks(f)) + tuple(_breaks(g)))
    fx = np.asarray(f(x), dtype=complex)
    gx = np.asarray(g(x), dtype=complex)
    return complex(np.sum(w * fx * np.conj(gx)))


def quadrature_coeffs(space, u):
    x, w = quadrature_rule(space, _breaks(u))
    return (w * np.asarray(u(x), dtype=complex)) @ np.conj(basis_eval(space, x))


def coefficients(space, u: TargetFunction) -> np.ndarray:
    """``(<u, L_j>)_j``, exact when available."""
    if isinstance(u, TargetFunction) and u.coeffs is not None:
        return u.coeffs
    return quadrature_coeffs(space, u)


def norm_sq(space, u: TargetFunction) -> float:
    if isinstance(u, TargetFunction) and u.norm_sq is not None:
        return u.norm_sq
    return inner_product(space, u, u).real


def best_approx_error_sq(space, u):
    radicand = norm_sq(space, u) - float(np.sum(np.abs(coefficients(space, u)) ** 2))
    if radicand < -ORTHONORMALITY_TOL:
        raise InconsistencyError(f"negative squared projection error {radicand:.3e}")
    return max(radicand, 0.0)


def best_approx_error(space: FunctionSpace, u: TargetFunction) -> float:
    """``e_n(u) = min_v ||u - v||`` computed from Parseval's identity."""
    return float(np.sqrt(best_approx_error_sq(space, u)))


def sup_error_proxy(space: FunctionSpace, u: TargetFunction, grid_size: int) -> float:
    """Grid maximum of ``|u - P u|`` with ``P`` the exact L2 projection.

    Used as a stand-in for the best uniform approximation error on the
    right-hand side of the worst-case bound.
    """
    if grid_size < 10 * space.n:
        raise ParameterError(f"grid_size must be at least 10 n = {10 * space.n}")
    x = uniform_grid(space, grid_size)
    proj = basis_eval(space, x) @ coefficients(space, u)
    return float(np.max(np.abs(u(x) - proj)))


def orthonormality_residual(space):
    x, w = quadrature_rule(space)
    vals = basis_eval(space, x)
    gram = (vals * w[:, None]).T @ np.conj(vals)
    return float(np.max(np.abs(gram - np.eye(space.n))))


def christoffel_mass(space):
    """Quadrature of ``1 / w`` under mu; equals one for every orthonormal basis."""
    x, w = quadrature_rule(space)
    return float(np.sum(w * christoffel_sum(space, x)) / space.n)
