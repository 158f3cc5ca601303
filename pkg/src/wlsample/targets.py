"""Built-in target functions with exact or quadrature-backed projection data."""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError
from .spaces import FunctionSpace, basis_eval, basis_target, make_target, quadrature_coeffs, TargetFunction

STEP_AT = 0.5 - 1.0 / math.pi

BUILTINS = ("exp", "power", "step", "random_vn", "random_v2n")


def _random_coeffs(gen, size, complex_valued):
    c = gen.standard_normal(size)
    if complex_valued:
        c = c + 1j * gen.standard_normal(size)
    return c


def builtin_target(space: FunctionSpace, name: str, *, k: int = 2, rng=None, complex_valued=False,
                   coeffs=None) -> TargetFunction:
    """Construct one of the built-in targets on ``space``.

    ``exp``
        ``exp(x)``.
    ``power``
        ``x ** k``.
    ``step``
        indicator of ``x >= 0.5 - 1/pi``.
    ``random_vn``
        random element of the space itself (``e_n = 0``); ``coeffs`` may fix it.
    ``random_v2n``
        random element of the next space of twice the dimension, so that
        ``e_n > 0`` is known exactly.
    """
    lo, hi = space.bounds
    if name == "exp":
        norm = (math.exp(2 * hi) - math.exp(2 * lo)) / 2 / (hi - lo)
        return make_target(space, np.exp, norm_sq=norm, name="exp")
    if name == "power":
        if k < 0:
            raise ParameterError("power target needs k >= 0")
        norm = (hi ** (2 * k + 1) - lo ** (2 * k + 1)) / (2 * k + 1) / (hi - lo)
        return make_target(space, lambda x: x ** k, norm_sq=norm, name=f"x^{k}")
    if name == "step":
        norm = (hi - STEP_AT) / (hi - lo)
        return make_target(
            space, lambda x: (x >= STEP_AT).astype(float), norm_sq=norm,
            breakpoints=(STEP_AT,), name="step",
        )
    gen = rng.generator if hasattr(rng, "generator") else np.random.default_rng(rng)
    if name == "random_vn":
        c = _random_coeffs(gen, space.n, complex_valued) if coeffs is None else coeffs
        return basis_target(space, c, name="random_vn")
    if name == "random_v2n":
        big = space.with_dimension(2 * space.n + (1 if space.basis_id == "fourier" else 0))
        c = _random_coeffs(gen, big.n, complex_valued) if coeffs is None else np.asarray(coeffs)
        f = lambda x: basis_eval(big, x) @ c  # noqa: E731
        cells = tuple(np.arange(1, big.n) / big.n) if space.basis_id == "piecewise_constant" else ()
        proto = TargetFunction(f, breakpoints=cells)
        return make_target(
            space, f, coeffs=quadrature_coeffs(space, proto),
            norm_sq=float(np.sum(np.abs(c) ** 2)), breakpoints=cells, name="random_v2n",
        )
    raise ParameterError(f"unknown target {name!r}; expected one of {BUILTINS}")
