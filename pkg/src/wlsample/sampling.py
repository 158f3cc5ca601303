"""Draws from the base measure and from the optimal sampling measure.

The optimal measure has density ``(1/n) sum_j |L_j|^2`` with respect to mu.
It is sampled as an equal-weight mixture: pick ``j`` uniformly, then draw
from ``|L_j|^2 dmu`` by rejection against mu with the closed-form envelope
``sup |L_j|^2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConditioningFailureError, ParameterError, SamplingStallError
from .gramian import gram, spectral_distance_to_identity
from .spaces import FunctionSpace, basis_eval, christoffel_weight

PROVENANCES = ("iid", "conditioned", "subsampled", "bss", "greedy_removed")

_MASK64 = (1 << 64) - 1


@dataclass
class RngStream:
    """Reproducible random stream keyed by ``(seed, stream_id)``.

    The stream is stateful: successive draws advance it. Do not share one
    instance between concurrent callers; derive a fresh ``stream_id`` instead.
    """

    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seq = np.random.SeedSequence([self.seed & _MASK64, self.stream_id & _MASK64])
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def child(self, offset):
        """Independent stream ``(seed, stream_id + offset)``."""
        return RngStream(self.seed, self.stream_id + offset)


def _gen(rng):
    return rng.generator if isinstance(rng, RngStream) else rng


@dataclass(eq=False)
class Sample:
    """Ordered sample points with their per-point weights.

    ``weights`` equal the Christoffel weights ``w(x_i)`` except for ``bss``
    samples, which carry their own reweighting. ``indices`` locate the
    points inside the parent sample for derived samples.
    """

    points: np.ndarray
    weights: np.ndarray
    provenance: str = "iid"
    parent_size: int = 0
    redraw_count: int = 0
    indices: np.ndarray = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.points.ndim != 1 or len(self.points) < 1:
            raise ParameterError("a sample needs at least one point")
        if self.weights.shape != self.points.shape:
            raise ParameterError("points and weights differ in length")
        if self.provenance not in PROVENANCES:
            raise ParameterError(f"unknown provenance {self.provenance!r}")

    def __len__(self):
        return len(self.points)

    @property
    def size(self):
        return len(self.points)

    def subset(self, idx, provenance, weights=None):
        idx = np.asarray(idx, dtype=int)
        base = self.indices if self.indices is not None else np.arange(len(self))
        return Sample(
            self.points[idx],
            self.weights[idx] if weights is None else weights,
            provenance,
            parent_size=len(self),
            redraw_count=self.redraw_count,
            indices=base[idx],
        )


def minimal_budget(n: int, epsilon: float) -> int:
    """``ceil(10 n ln(2n / epsilon))``: sample size making the Gram well conditioned w.p. ``1 - epsilon``."""
    if n < 1:
        raise ParameterError("n must be positive")
    if not 0.0 < epsilon < 1.0:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    return math.ceil(10 * n * math.log(2 * n / epsilon))


def sample_mu(space: FunctionSpace, rng, size=None):
    """Draw from the base probability measure of the space."""
    lo, hi = space.bounds
    return _gen(rng).uniform(lo, hi, size=size)


def sample_rho(space: FunctionSpace, rng, size=None, max_iter=10**6):
    """Draw from ``drho = (1/n) sum_j |L_j|^2 dmu``.

    Each point picks a basis index uniformly and is then accepted with
    probability ``|L_j(x)|^2 / sup |L_j|^2`` for ``x ~ mu``.
    """
    gen = _gen(rng)
    k = 1 if size is None else int(size)
    env = space.envelope()
    which = gen.integers(space.n, size=k)
    out = np.empty(k)
    pending = np.arange(k)
    rounds = 0
    while pending.size:
        rounds += 1
        if rounds > max_iter:
            raise SamplingStallError(f"rejection sampler exceeded {max_iter} iterations")
        x = sample_mu(space, gen, size=pending.size)
        j = which[pending]
        dens = np.abs(basis_eval(space, x)[np.arange(pending.size), j]) ** 2
        accept = gen.random(pending.size) * env[j] < dens
        out[pending[accept]] = x[accept]
        pending = pending[~accept]
    return float(out[0]) if size is None else out


def draw_iid(space: FunctionSpace, m: int, rng, max_iter=10**6) -> Sample:
    """``m`` i.i.d. points from the optimal measure with Christoffel weights."""
    if m < 1:
        raise ParameterError("sample size must be at least 1")
    x = sample_rho(space, rng, size=m, max_iter=max_iter)
    return Sample(x, np.atleast_1d(christoffel_weight(space, x)), "iid")


def in_event(sample, space, radius=0.5):
    """Whether ``||G - I||_2 <= radius`` for the sample's Gram; returns (flag, distance)."""
    dist = spectral_distance_to_identity(gram(sample, space))
    return dist <= radius, dist


def conditioned_sample(space: FunctionSpace, m: int, rng, max_redraws: int = 1000) -> Sample:
    """First i.i.d. draw whose Gram lies within spectral distance 1/2 of the identity.

    Rejected draws only consume randomness; no target is evaluated on them.
    """
    if m < minimal_budget(space.n, 0.5):
        warnings.warn(
            f"m={m} is below the recommended budget {minimal_budget(space.n, 0.5)} "
            f"for n={space.n}; expect many redraws",
            stacklevel=2,
        )
    for redraws in range(max_redraws + 1):
        Z = draw_iid(space, m, rng)
        ok, _ = in_event(Z, space)
        if ok:
            return replace(Z, provenance="conditioned", redraw_count=redraws)
    raise ConditioningFailureError(
        f"no conditioned sample after {max_redraws} redraws (n={space.n}, m={m})"
    )
