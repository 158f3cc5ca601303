"""Reducing a well-conditioned sample to a budget linear in ``n``.

Three sparsifiers are provided:

* spectral partitioning: the sample's frame vectors ``a_i`` are split in
  two, recursively ``L`` times, with every split verified to keep a
  proportional framing; one part is then drawn with probability
  proportional to its size (:func:`build_partition`, :func:`random_subsample`);
* greedy removal of points while the Gram stays above an eigenvalue floor;
* a deterministic twice-barrier selection with reweighting (:func:`bss_sparsify`).

No polynomial-time algorithm is known that always finds a split with the
required framing. The search strategies here are exhaustive enumeration
for small sets and randomized or local heuristics otherwise. Whatever a
strategy proposes is re-checked before it is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import (
    ParameterError,
    PreconditionError,
    SizeError,
    SparsificationFailure,
    SplitSearchFailure,
)
from .gramian import eigvalsh, frame_vectors, gram, jacobi_eigh, lambda_min, spectral_distance_to_identity
from .sampling import Sample, _gen
from .spaces import basis_eval

STRATEGIES = ("exhaustive", "randomized", "local")
EXHAUSTIVE_MAX = 24
SMALL_DELTA = 1.0 / 200
FRAME_TOL = 1e-10


def _schedule_constant():
    C = 300.0
    for ell in range(2, 400):
        r = 2.0 ** (-ell / 2)
        C *= (1 + r) / (1 - r)
    return C


SCHEDULE_C = _schedule_constant()


def child_bounds(alpha, beta, delta, theta=1.0):
    """Framing guaranteed for both halves of a split, optionally relaxed by ``theta``."""
    r = 5.0 * math.sqrt(delta / alpha)
    return theta * alpha * (1 - r) / 2, beta * (1 + r) / 2 / theta


@dataclass(frozen=True)
class SplitSchedule:
    delta: float
    levels: int
    alphas: tuple
    betas: tuple
    c0: float
    C0: float

    def as_dict(self):
        return {
            "delta": self.delta,
            "L": self.levels,
            "alphas": list(self.alphas),
            "betas": list(self.betas),
            "c0": self.c0,
            "C0": self.C0,
        }


def build_schedule(n: int, m: int) -> SplitSchedule:
    """Number of halvings and framing constants for ``m`` vectors in dimension ``n``.

    With ``delta = n / m >= 1/200`` no split is needed and the framing
    constants are ``(1/2, 300)``. Otherwise ``alpha`` and ``beta`` are
    iterated until ``alpha_L <= 100 delta``.
    """
    if n < 1 or m < 1:
        raise ParameterError("n and m must be positive")
    if n > m:
        raise ParameterError(f"need n <= m, got n={n}, m={m}")
    delta = n / m
    if delta >= SMALL_DELTA:
        return SplitSchedule(delta, 0, (0.5,), (1.5,), 0.5, 300.0)
    alphas, betas = [0.5], [1.5]
    while alphas[-1] > 100 * delta:
        a, b = child_bounds(alphas[-1], betas[-1], delta)
        alphas.append(a)
        betas.append(b)
    L = len(alphas) - 1
    c0, C0 = alphas[-1] / delta, betas[-1] / delta
    assert alphas[-1] > 25 * delta, (n, m, alphas[-1])
    assert betas[-1] <= SCHEDULE_C * delta, (n, m, betas[-1])
    return SplitSchedule(delta, L, tuple(alphas), tuple(betas), c0, C0)


# -- single split ----------------------------------------------------------


@dataclass
class Split:
    """Outcome of :func:`split_once`; unpacks as ``(s1, s2)``."""

    s1: np.ndarray
    s2: np.ndarray
    lower: float
    upper: float
    achieved: tuple
    strategy: str
    candidates: int

    def __iter__(self):
        yield self.s1
        yield self.s2


def _outer_flat(A):
    # row i holds vec(a_i a_i^*)
    return (A[:, :, None] * np.conj(A[:, None, :])).reshape(len(A), -1)


def _batch_extremes(sums, n):
    ev = np.linalg.eigvalsh(sums.reshape(-1, n, n))
    return ev[:, 0], ev[:, -1]


def _verified(A, s1, s2, lower, upper):
    """Exact Jacobi re-check of both halves; returns the four extreme eigenvalues or None."""
    out = []
    for s in (s1, s2):
        M = A[s].T @ np.conj(A[s]) if len(s) else np.zeros((A.shape[1],) * 2, dtype=complex)
        ev = eigvalsh(0.5 * (M + M.conj().T))
        out += [ev[0], ev[-1]]
    lo1, hi1, lo2, hi2 = out
    if min(lo1, lo2) >= lower - FRAME_TOL and max(hi1, hi2) <= upper + FRAME_TOL:
        return (lo1, hi1, lo2, hi2)
    return None


def _feasible(lo1, hi1, lo2, hi2, lower, upper):
    return (np.minimum(lo1, lo2) >= lower - FRAME_TOL) & (np.maximum(hi1, hi2) <= upper + FRAME_TOL)


def _exhaustive(A, lower, upper, chunk=1 << 15):
    k, n = A.shape
    if k > EXHAUSTIVE_MAX:
        raise SizeError(f"exhaustive search limited to {EXHAUSTIVE_MAX} vectors, got {k}")
    O = _outer_flat(A)
    total = O.sum(axis=0)
    count = 1 << (k - 1)
    best, best_score = None, -np.inf
    for start in range(0, count, chunk):
        codes = np.arange(start, min(start + chunk, count))
        # element 0 always sits in S1; bit j of the code places element j+1
        bits = ((codes[:, None] >> np.arange(k - 1)) & 1).astype(bool)
        member = np.concatenate([np.ones((len(codes), 1), bool), bits], axis=1)
        s1 = member.astype(float) @ O
        lo1, hi1 = _batch_extremes(s1, n)
        lo2, hi2 = _batch_extremes(total - s1, n)
        ok = _feasible(lo1, hi1, lo2, hi2, lower, upper)
        score = np.where(ok, np.minimum(lo1, lo2), -np.inf)
        i = int(np.argmax(score))
        if ok[i] and score[i] > best_score:
            best, best_score = member[i], score[i]
    return best, count


def _randomized(A, lower, upper, gen, budget, batch=256):
    k, n = A.shape
    O = _outer_flat(A)
    total = O.sum(axis=0)
    tried = 0
    while tried < budget:
        size = min(batch, budget - tried)
        member = np.zeros((size, k), bool)
        for r in range(size):
            member[r, gen.permutation(k)[: k // 2]] = True
        s1 = member.astype(float) @ O
        lo1, hi1 = _batch_extremes(s1, n)
        lo2, hi2 = _batch_extremes(total - s1, n)
        ok = np.flatnonzero(_feasible(lo1, hi1, lo2, hi2, lower, upper))
        if ok.size:
            return member[ok[0]], tried + int(ok[0]) + 1
        tried += size
    return None, tried


def _local(A, lower, upper, gen, budget, neighbours=64):
    k, n = A.shape
    if k < 2:
        return None, 0
    O = _outer_flat(A)
    total = O.sum(axis=0)

    def margin(s1):
        lo1, hi1 = _batch_extremes(s1, n)
        lo2, hi2 = _batch_extremes(total - s1, n)
        return np.minimum.reduce([lo1 - lower, lo2 - lower, upper - hi1, upper - hi2])

    member = np.zeros(k, bool)
    member[gen.permutation(k)[: k // 2]] = True
    s1 = member.astype(float) @ O
    current = margin(s1[None])[0]
    used = 1
    while used < budget:
        if current >= -FRAME_TOL:
            return member, used
        ins, outs = np.flatnonzero(member), np.flatnonzero(~member)
        size = min(neighbours, budget - used)
        i = ins[gen.integers(len(ins), size=size)]
        j = outs[gen.integers(len(outs), size=size)]
        cand = s1[None] - O[i] + O[j]
        scores = margin(cand)
        used += size
        b = int(np.argmax(scores))
        if scores[b] > current:
            member[i[b]], member[j[b]] = False, True
            s1, current = cand[b], scores[b]
        else:
            # stuck at a local optimum: restart from a fresh balanced split
            member = np.zeros(k, bool)
            member[gen.permutation(k)[: k // 2]] = True
            s1 = member.astype(float) @ O
            current = margin(s1[None])[0]
            used += 1
    if current >= -FRAME_TOL:
        return member, used
    return None, used


def split_once(
    vectors,
    alpha: float,
    beta: float,
    delta: float,
    strategy: str = "randomized",
    rng=None,
    theta: float = 1.0,
    trial_budget: int = 10**4,
    move_budget: int = 10**4,
) -> Split:
    """Split the rows of ``vectors`` into two framed halves.

    Preconditions: every ``|a_i|^2 <= delta``, ``alpha I <= sum a_i a_i^* <= beta I``
    and ``delta < alpha``. Both halves of the result satisfy the child framing
    from :func:`child_bounds`; the check uses the Jacobi eigensolver,
    independently of the batched screening used during the search.
    """
    if strategy not in STRATEGIES:
        raise ParameterError(f"unknown split strategy {strategy!r}")
    if not 0.0 < theta <= 1.0:
        raise ParameterError("theta must lie in (0, 1]")
    A = np.asarray(vectors, dtype=complex)
    k, n = A.shape
    if not delta < alpha:
        raise PreconditionError(f"need delta < alpha, got delta={delta}, alpha={alpha}")
    if np.max(np.sum(np.abs(A) ** 2, axis=1)) > delta * (1 + 1e-12):
        raise PreconditionError("a vector exceeds the squared-norm bound delta")
    ev = eigvalsh(A.T @ np.conj(A))
    if ev[0] < alpha - FRAME_TOL or ev[-1] > beta + FRAME_TOL:
        raise PreconditionError(
            f"input framing [{ev[0]:.6g}, {ev[-1]:.6g}] not within [{alpha:.6g}, {beta:.6g}]"
        )
    lower, upper = child_bounds(alpha, beta, delta, theta)
    return find_split(A, lower, upper, strategy, rng, trial_budget, move_budget)


def find_split(vectors, lower, upper, strategy="randomized", rng=None,
               trial_budget=10**4, move_budget=10**4) -> Split:
    """Search for a partition whose halves both have spectrum inside ``[lower, upper]``.

    Candidates are screened in batches with LAPACK eigenvalues; the chosen
    split is re-verified with the Jacobi solver before being returned.
    ``exhaustive`` returns the feasible split with the largest smallest
    eigenvalue; the heuristics return the first feasible one they meet.
    """
    if strategy not in STRATEGIES:
        raise ParameterError(f"unknown split strategy {strategy!r}")
    A = np.asarray(vectors, dtype=complex)
    gen = _gen(rng) if rng is not None else np.random.default_rng(0)
    if strategy == "exhaustive":
        member, tried = _exhaustive(A, lower, upper)
    elif strategy == "randomized":
        member, tried = _randomized(A, lower, upper, gen, trial_budget)
    else:
        member, tried = _local(A, lower, upper, gen, move_budget)
    if member is not None:
        s1, s2 = np.flatnonzero(member), np.flatnonzero(~member)
        achieved = _verified(A, s1, s2, lower, upper)
        if achieved is not None:
            return Split(s1, s2, lower, upper, achieved, strategy, tried)
    raise SplitSearchFailure(
        f"{strategy} search found no split with framing [{lower:.6g}, {upper:.6g}] "
        f"after {tried} candidates",
        candidates=tried,
    )


# -- partition and subsample ----------------------------------------------


@dataclass
class PartitionResult:
    """Partition of ``{0, ..., m-1}`` into ``2^L`` framed sets.

    ``framing[k]`` holds the extreme eigenvalues of ``(m/n) sum_{i in J_k} a_i a_i^*``.
    """

    schedule: SplitSchedule
    sets: List[np.ndarray]
    framing: List[tuple]
    search_stats: List[dict] = field(default_factory=list)
    theta: float = 1.0
    m: int = 0
    n: int = 0

    @property
    def achieved_c0(self):
        return min(lo for lo, _ in self.framing)

    @property
    def achieved_C0(self):
        return max(hi for _, hi in self.framing)

    def check(self):
        """Verify cover, disjointness, cardinality and framing exactly."""
        joined = np.concatenate(self.sets)
        if len(joined) != self.m or not np.array_equal(np.sort(joined), np.arange(self.m)):
            raise AssertionError("sets do not form a partition")
        cap = self.schedule.C0 if self.theta == 1.0 else self.achieved_C0
        for J in self.sets:
            if len(J) > cap * self.n * (1 + 1e-12):
                raise AssertionError(f"set of size {len(J)} exceeds C0 n = {cap * self.n}")
        if self.theta == 1.0:
            for lo, hi in self.framing:
                if lo < self.schedule.c0 - 1e-8 or hi > self.schedule.C0 + 1e-8:
                    raise AssertionError(f"framing ({lo}, {hi}) violates schedule constants")
        return True


def build_partition(
    sample: Sample,
    space,
    strategy: str = "randomized",
    rng=None,
    theta: float = 1.0,
    trial_budget: int = 10**4,
    move_budget: int = 10**4,
) -> PartitionResult:
    """Recursively split a conditioned sample per :func:`build_schedule`.

    With ``theta < 1`` each split only needs a ``theta`` fraction of the
    nominal child framing; the targets then compound level by level and the
    constants actually achieved are recorded.
    """
    n, m = space.n, len(sample)
    if spectral_distance_to_identity(gram(sample, space)) > 0.5 + 1e-12:
        raise PreconditionError("partitioning requires ||G - I||_2 <= 1/2")
    schedule = build_schedule(n, m)
    A = frame_vectors(sample, space)
    sets = [np.arange(m)]
    alpha, beta = 0.5, 1.5
    stats = []
    for level in range(schedule.levels):
        children = []
        for pos, J in enumerate(sets):
            try:
                split = split_once(
                    A[J], alpha, beta, schedule.delta, strategy, rng, theta,
                    trial_budget, move_budget,
                )
            except SplitSearchFailure as exc:
                raise SplitSearchFailure(
                    f"level {level}, subset {pos}: {exc}", level=level, subset=pos,
                    candidates=exc.candidates,
                ) from exc
            stats.append({"level": level, "subset": pos, "strategy": strategy,
                          "candidates": split.candidates})
            children += [J[split.s1], J[split.s2]]
        sets = children
        alpha, beta = child_bounds(alpha, beta, schedule.delta, theta)
    framing = []
    for J in sets:
        M = (m / n) * (A[J].T @ np.conj(A[J]))
        ev = eigvalsh(0.5 * (M + M.conj().T))
        framing.append((float(ev[0]), float(ev[-1])))
    result = PartitionResult(schedule, sets, framing, stats, theta, m, n)
    result.check()
    return result


def random_subsample(partition: PartitionResult, parent: Sample, rng) -> Sample:
    """Keep the points of ``J_k`` where ``k`` is drawn with probability ``|J_k| / m``."""
    sizes = np.array([len(J) for J in partition.sets], dtype=float)
    k = int(_gen(rng).choice(len(sizes), p=sizes / sizes.sum()))
    return parent.subset(np.sort(partition.sets[k]), "subsampled")


# -- greedy removal ----------------------------------------------------------


def greedy_removal(sample: Sample, space, lambda_floor: float = 0.5, tie_tol: float = 1e-12) -> Sample:
    """Drop points one at a time while the Gram's smallest eigenvalue stays above ``lambda_floor``.

    At each step the point whose removal leaves the largest ``lambda_min``
    goes; near-ties go to the lowest index.
    """
    if lambda_min(gram(sample, space)) < lambda_floor:
        raise PreconditionError("input Gram is already below the eigenvalue floor")
    n = space.n
    V = basis_eval(space, sample.points)
    w = np.asarray(sample.weights, dtype=float)
    O = (w[:, None, None] * V[:, :, None] * np.conj(V[:, None, :]))
    keep = np.arange(len(sample))
    S = O.sum(axis=0)
    while len(keep) > 1:
        cand = (S[None] - O[keep]) / (len(keep) - 1)
        cand = 0.5 * (cand + np.conj(np.swapaxes(cand, 1, 2)))
        lmins = np.linalg.eigvalsh(cand)[:, 0]
        best = lmins.max()
        if best < lambda_floor:
            break
        pos = int(np.flatnonzero(lmins >= best - tie_tol)[0])
        S = S - O[keep[pos]]
        keep = np.delete(keep, pos)
    out = sample.subset(keep, "greedy_removed")
    final = lambda_min(gram(out, space))
    if final < lambda_floor - FRAME_TOL:
        raise AssertionError(f"greedy removal left lambda_min {final} below the floor")
    return out


# -- barrier sparsifier ----------------------------------------------------


def bss_bounds(c):
    """Framing ``(lower, upper)`` guaranteed for the sparsified Gram."""
    r = 1.0 / math.sqrt(c)
    return 0.5 * (1 - r) ** 2, 1.5 * (1 + r) ** 2


def bss_sparsify(sample: Sample, space, c: float = 2.0) -> Sample:
    """Select at most ``ceil(c n)`` reweighted points by the twice-barrier potential method.

    The frame vectors are first whitened so that they sum to the identity.
    Each of ``ceil(c n)`` steps adds one rank-one term ``t v v^*`` that keeps
    the spectrum strictly between a lower and an upper barrier; both barriers
    then advance. The final weights are rescaled so that the output Gram lies
    in :func:`bss_bounds`.
    """
    if not c > 1:
        raise ParameterError("oversampling factor c must exceed 1")
    G = gram(sample, space).entries
    if spectral_distance_to_identity(G) > 0.5 + 1e-12:
        raise PreconditionError("sparsification requires ||G - I||_2 <= 1/2")
    n, m = space.n, len(sample)
    A = frame_vectors(sample, space)
    ev, U = jacobi_eigh(G)
    # row i of B is the whitened vector G^{-1/2} a_i
    B = A @ (U @ np.diag(ev ** -0.5) @ U.conj().T).T

    sd = math.sqrt(c)
    eps_l, eps_u = 1.0 / sd, (sd - 1) / (c + sd)
    step_l, step_u = 1.0, (sd + 1) / (sd - 1)
    lo, hi = -n / eps_l, n / eps_u
    X = np.zeros((n, n), dtype=complex)
    s = np.zeros(m)
    eye = np.eye(n)
    steps = math.ceil(c * n)

    def quad(M):
        return np.einsum("ij,jk,ik->i", np.conj(B), M, B).real

    for _ in range(steps):
        Mu = np.linalg.inv((hi + step_u) * eye - X)
        Ml = np.linalg.inv(X - (lo + step_l) * eye)
        phi_u = np.trace(np.linalg.inv(hi * eye - X)).real - np.trace(Mu).real
        phi_l = np.trace(Ml).real - np.trace(np.linalg.inv(X - lo * eye)).real
        upper = quad(Mu @ Mu) / phi_u + quad(Mu)
        lower = quad(Ml @ Ml) / phi_l - quad(Ml)
        i = int(np.argmax(lower - upper))
        if lower[i] < upper[i] - 1e-12 * max(1.0, abs(upper[i])) or lower[i] <= 0:
            raise SparsificationFailure("no vector admissible for the barrier step")
        t = 2.0 / (lower[i] + upper[i])
        X += t * np.outer(B[i], np.conj(B[i]))
        s[i] += t
        hi += step_u
        lo += step_l
    final = np.linalg.eigvalsh(0.5 * (X + X.conj().T))
    if final[0] <= lo - 1e-9 * abs(lo) or final[-1] >= hi + 1e-9 * abs(hi):
        raise SparsificationFailure("spectrum left the barrier window")
    s *= (1 - 1 / sd) ** 2 / lo
    keep = np.flatnonzero(s > 0)
    k = len(keep)
    weights = k * s[keep] * sample.weights[keep] / m
    out = sample.subset(keep, "bss", weights=weights)
    lmin_bound, lmax_bound = bss_bounds(c)
    evg = eigvalsh(gram(out, space))
    if evg[0] < lmin_bound - 1e-10 or evg[-1] > lmax_bound + 1e-10:
        raise SparsificationFailure(
            f"output framing [{evg[0]:.6g}, {evg[-1]:.6g}] outside [{lmin_bound:.6g}, {lmax_bound:.6g}]"
        )
    return out
