"""Seedable statistical cultures for approval and ranked ballots.

Approval models: ``resampling``, ``disjoint``, ``noise``, ``truncated_urn``.
Ranking models (full strict rankings): ``mallows``, ``urn``, ``sphere``,
``cube``.

Randomness comes from numpy's PCG64.  Streams are split deterministically:
stream 0 carries shared draws (central ballots, candidate positions, the urn
history), stream ``i + 1`` belongs to voter ``i``.  A given
:class:`CultureSpec` therefore produces the same profile on every run and
under any parallel schedule; one spec's generators must not be shared
across concurrent samplers mid-stream.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from prvote.core import Instance, WeakProfile

__all__ = [
    "CultureSpec",
    "APPROVAL_MODELS",
    "RANKING_MODELS",
    "sample_approval",
    "sample_ranking",
    "sample_profile",
    "sample_committee",
]

APPROVAL_MODELS = ("resampling", "disjoint", "noise", "truncated_urn")
RANKING_MODELS = ("mallows", "urn", "sphere", "cube")


@dataclass(frozen=True)
class CultureSpec:
    """A fully parameterized, seeded ballot culture."""

    model: str
    n: int
    m: int
    seed: int
    p: float | None = None
    phi: float | None = None
    g: int | None = None
    alpha: float | None = None
    dim: int | None = None

    def __post_init__(self):
        if self.model not in APPROVAL_MODELS + RANKING_MODELS:
            raise ValueError(f"unknown culture model {self.model!r}")
        if self.n < 1 or self.m < 1:
            raise ValueError("need at least one voter and one candidate")
        needs = {
            "resampling": ("p", "phi"),
            "disjoint": ("p", "phi", "g"),
            "noise": ("p", "phi"),
            "truncated_urn": ("p", "alpha"),
            "mallows": ("phi",),
            "urn": ("alpha",),
            "sphere": ("dim",),
            "cube": ("dim",),
        }[self.model]
        for name in needs:
            if getattr(self, name) is None:
                raise ValueError(f"model {self.model!r} needs parameter {name!r}")
        if self.p is not None and not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if self.phi is not None and not 0 <= self.phi <= 1:
            raise ValueError("phi must lie in [0, 1]")
        if self.alpha is not None and self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.g is not None and self.g < 1:
            raise ValueError("g must be a positive integer")
        if self.dim is not None and self.dim < 1:
            raise ValueError("dim must be a positive integer")


def _stream(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, stream))))


def _voter_stream(spec: CultureSpec, voter: int) -> np.random.Generator:
    return _stream(spec.seed, voter + 1)


# ---------------------------------------------------------------------------
# approval cultures


def _ballot_size(p: float, m: int) -> int:
    # floor(p*m) guarded against binary-float artifacts like 0.3*10=2.999...
    return int(p * m + 1e-9)


def _central_ballot(rng, m: int, p: float) -> np.ndarray:
    size = _ballot_size(p, m)
    vec = np.zeros(m, dtype=bool)
    vec[rng.choice(m, size=size, replace=False)] = True
    return vec


def _resample_around(spec, start_by_voter) -> WeakProfile:
    """Keep each start-vote entry with probability 1 - phi, else re-approve
    with probability p (shared by the resampling and disjoint models)."""
    ballots = []
    for voter in range(spec.n):
        rng = _voter_stream(spec, voter)
        resample = rng.random(spec.m) < spec.phi
        fresh = rng.random(spec.m) < spec.p
        vec = np.where(resample, fresh, start_by_voter(voter, rng))
        ballots.append(np.flatnonzero(vec).tolist())
    return WeakProfile.from_approval(spec.m, ballots)


def sample_approval(spec: CultureSpec) -> WeakProfile:
    """Draw a dichotomous profile from an approval culture."""
    if spec.model == "resampling":
        central = _central_ballot(_stream(spec.seed, 0), spec.m, spec.p)
        return _resample_around(spec, lambda voter, rng: central)
    if spec.model == "disjoint":
        sizes = [
            spec.m // spec.g + (1 if i < spec.m % spec.g else 0)
            for i in range(spec.g)
        ]
        groups = []
        at = 0
        for size in sizes:
            vec = np.zeros(spec.m, dtype=bool)
            vec[at : at + size] = True
            groups.append(vec)
            at += size

        def start(voter, rng):
            return groups[int(rng.integers(spec.g))]

        return _resample_around(spec, start)
    if spec.model == "noise":
        central = _central_ballot(_stream(spec.seed, 0), spec.m, spec.p)
        # ballot probability proportional to phi^(Hamming distance) factors
        # into independent per-candidate flips with probability phi/(1+phi)
        flip_prob = spec.phi / (1 + spec.phi)
        ballots = []
        for voter in range(spec.n):
            rng = _voter_stream(spec, voter)
            flips = rng.random(spec.m) < flip_prob
            vec = central ^ flips
            ballots.append(np.flatnonzero(vec).tolist())
        return WeakProfile.from_approval(spec.m, ballots)
    if spec.model == "truncated_urn":
        size = _ballot_size(spec.p, spec.m)
        rankings = _urn_rankings(spec.seed, spec.n, spec.m, spec.alpha)
        return WeakProfile.from_approval(
            spec.m, [ranking[:size].tolist() for ranking in rankings]
        )
    raise ValueError(f"{spec.model!r} is not an approval culture")


# ---------------------------------------------------------------------------
# ranking cultures


def _urn_rankings(seed: int, n: int, m: int, alpha: float) -> list:
    """Polya-Eggenberger urn: each drawn ranking is reinforced with weight
    alpha (in units of all-m! fresh rankings).  Sequentially dependent, so
    the whole history consumes the shared stream."""
    rng = _stream(seed, 0)
    rankings: list = []
    for t in range(n):
        fresh_prob = 1 / (1 + t * alpha) if alpha > 0 else 1.0
        if t == 0 or rng.random() < fresh_prob:
            rankings.append(rng.permutation(m))
        else:
            rankings.append(rankings[int(rng.integers(t))].copy())
    return rankings


def _mallows_ranking(rng, m: int, phi: float) -> list:
    """Repeated-insertion sampling: item j lands d slots before the end of
    the current prefix with probability proportional to phi^d, giving the
    exact phi^(Kendall distance) distribution around identity."""
    if phi == 0:
        return list(range(m))
    powers = [phi**d for d in range(m)]
    cumulative = []
    total = 0.0
    for d in range(m):
        total += powers[d]
        cumulative.append(total)
    ranking: list = []
    draws = rng.random(m)
    for item in range(m):
        # insertion position item - d has weight phi^d, d = 0..item
        u = draws[item] * cumulative[item]
        d = bisect_right(cumulative, u, 0, item + 1)
        ranking.insert(item - d, item)
    return ranking


def sample_ranking(spec: CultureSpec) -> WeakProfile:
    """Draw a strict full-ranking profile from a ranking culture."""
    if spec.model == "mallows":
        ballots = []
        for voter in range(spec.n):
            order = _mallows_ranking(_voter_stream(spec, voter), spec.m, spec.phi)
            ballots.append({c: pos + 1 for pos, c in enumerate(order)})
        return WeakProfile.from_ranks(spec.m, ballots)
    if spec.model == "urn":
        rankings = _urn_rankings(spec.seed, spec.n, spec.m, spec.alpha)
        return WeakProfile.from_ranks(
            spec.m,
            [{int(c): pos + 1 for pos, c in enumerate(r)} for r in rankings],
        )
    if spec.model in ("sphere", "cube"):
        shared = _stream(spec.seed, 0)
        if spec.model == "cube":
            cands = shared.random((spec.m, spec.dim))
        else:
            cands = _ball_points(shared, spec.m, spec.dim)
        ballots = []
        for voter in range(spec.n):
            rng = _voter_stream(spec, voter)
            if spec.model == "cube":
                point = rng.random(spec.dim)
            else:
                point = _ball_points(rng, 1, spec.dim)[0]
            dist = np.linalg.norm(cands - point, axis=1)
            order = np.lexsort((np.arange(spec.m), dist))
            ballots.append({int(c): pos + 1 for pos, c in enumerate(order)})
        return WeakProfile.from_ranks(spec.m, ballots)
    raise ValueError(f"{spec.model!r} is not a ranking culture")


def _ball_points(rng, count: int, dim: int) -> np.ndarray:
    """Uniform points in the d-dimensional unit ball."""
    directions = rng.normal(size=(count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = rng.random(count) ** (1 / dim)
    return directions * radii[:, None]


def sample_profile(spec: CultureSpec) -> WeakProfile:
    """Dispatch to the approval or ranking sampler by model name."""
    if spec.model in APPROVAL_MODELS:
        return sample_approval(spec)
    return sample_ranking(spec)


def sample_committee(instance: Instance, seed: int) -> frozenset:
    """A uniformly random committee of size exactly k, fixed by the seed."""
    rng = _stream(seed, 0)
    members = rng.choice(instance.m, size=instance.k, replace=False)
    return frozenset(int(c) for c in members)
