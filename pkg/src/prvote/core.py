"""Preference profiles, rank expansion, quotas, and instance I/O.

Candidates are integers ``0, ..., m-1``.  A ballot assigns a positive rank to
every candidate the voter finds acceptable; unacceptable candidates carry no
rank (conceptually rank infinity).  Rank values must describe a weak order:
``rank(i, c)`` equals the number of candidates voter ``i`` strictly prefers
to ``c``, plus one.  Tied candidates therefore share a rank, and the ranks
used by one voter form a contiguous pattern such as 1, 2, 2, 4.

All objects in this module are immutable after construction and all
operations are pure functions.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "ScaleGuardError",
    "ProfileValidationError",
    "WeakProfile",
    "Instance",
    "validate_profile",
    "rank_expand",
    "group_quota",
    "candidate_name",
    "parse_candidate",
    "parse_committee",
    "instance_to_dict",
    "instance_from_dict",
    "load_instance",
    "dump_instance",
    "load_preflib",
]


class ScaleGuardError(RuntimeError):
    """Raised when an exhaustive checker exceeds its work budget."""


class ProfileValidationError(ValueError):
    """Raised when raw ballots do not describe weak orders.

    The ``problems`` attribute lists one ``(voter, message)`` pair per
    offending ballot.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = "; ".join(f"voter {v}: {msg}" for v, msg in self.problems)
        super().__init__(f"invalid profile: {lines}")


def _check_ballot(ranks: Mapping[int, int], m: int):
    """Return an error message if ``ranks`` is not a valid weak-order ballot."""
    for cand, rank in ranks.items():
        if not isinstance(cand, int) or not 0 <= cand < m:
            return f"candidate {cand!r} out of range [0, {m})"
        if not isinstance(rank, int) or rank < 1:
            return f"candidate {cand} has invalid rank {rank!r}"
    # rank(c) must equal |{c' : c' strictly better}| + 1, which forces the
    # multiset of ranks into contiguous blocks: 1, then 1 + mult(1), ...
    counts: dict[int, int] = {}
    for rank in ranks.values():
        counts[rank] = counts.get(rank, 0) + 1
    expected = 1
    for rank in sorted(counts):
        if rank != expected:
            return f"rank {rank} should be {expected} (count of strictly better plus one)"
        expected += counts[rank]
    return None


@dataclass(frozen=True)
class WeakProfile:
    """An immutable profile of weak-order ballots over ``m`` candidates.

    Parameters
    ----------
    m : int
        Number of candidates.
    ranks : tuple of dict
        One mapping ``candidate -> rank`` per voter.  Candidates absent from
        the mapping are unacceptable to that voter.

    Use :meth:`from_ranks` or :meth:`from_approval` to construct validated
    profiles; the raw constructor does not validate.
    """

    m: int
    ranks: tuple

    @staticmethod
    def from_ranks(m: int, ranks: Iterable[Mapping[int, int]]) -> "WeakProfile":
        ballots = tuple(dict(b) for b in ranks)
        problems = []
        for voter, ballot in enumerate(ballots):
            msg = _check_ballot(ballot, m)
            if msg is not None:
                problems.append((voter, msg))
        if problems:
            raise ProfileValidationError(problems)
        return WeakProfile(m, ballots)

    @staticmethod
    def from_approval(m: int, approval_sets: Iterable[Iterable[int]]) -> "WeakProfile":
        return WeakProfile.from_ranks(
            m, [{c: 1 for c in ballot} for ballot in approval_sets]
        )

    @property
    def n(self) -> int:
        """Number of voters."""
        return len(self.ranks)

    def rank(self, voter: int, cand: int):
        """Rank of ``cand`` for ``voter``; ``None`` if unacceptable."""
        return self.ranks[voter].get(cand)

    @property
    def approval_sets(self) -> tuple:
        """Acceptable-candidate set of each voter."""
        return tuple(frozenset(b) for b in self.ranks)

    @property
    def is_strict(self) -> bool:
        """True iff no voter ties two acceptable candidates."""
        return all(len(set(b.values())) == len(b) for b in self.ranks)

    @property
    def is_dichotomous(self) -> bool:
        """True iff every acceptable candidate has rank 1."""
        return all(all(r == 1 for r in b.values()) for b in self.ranks)

    @property
    def max_rank(self) -> int:
        """Largest finite rank appearing in the profile (0 if all ballots empty)."""
        return max((max(b.values()) for b in self.ranks if b), default=0)

    def approvers(self, cand: int, within_rank: int | None = None) -> frozenset:
        """Voters ranking ``cand``, optionally only those ranking it at
        ``within_rank`` or better."""
        if within_rank is None:
            return frozenset(i for i, b in enumerate(self.ranks) if cand in b)
        return frozenset(
            i for i, b in enumerate(self.ranks) if b.get(cand, 0) and b[cand] <= within_rank
        )


def validate_profile(m: int, raw_ranks: Iterable) -> WeakProfile:
    """Normalize raw per-voter rank assignments into a :class:`WeakProfile`.

    ``raw_ranks`` holds, per voter, either a mapping ``candidate -> rank`` or
    an iterable of ``(candidate, rank)`` pairs.  Duplicate candidate entries,
    rank 0, and non-contiguous rank patterns raise
    :class:`ProfileValidationError`.
    """
    ballots = []
    problems = []
    for voter, raw in enumerate(raw_ranks):
        if isinstance(raw, Mapping):
            ballots.append(dict(raw))
            continue
        ballot: dict[int, int] = {}
        for cand, rank in raw:
            if cand in ballot:
                problems.append((voter, f"duplicate entry for candidate {cand}"))
            ballot[cand] = rank
        ballots.append(ballot)
    if problems:
        raise ProfileValidationError(problems)
    return WeakProfile.from_ranks(m, ballots)


def rank_expand(profile: WeakProfile, r: int) -> WeakProfile:
    """Approval profile in which voter ``i`` approves candidates ranked ``<= r``.

    Expansions are nested: the result for ``r`` is contained in the result
    for ``r + 1``.  Candidates without a finite rank are never included, so
    expanding past a voter's worst finite rank is a no-op for that voter.
    """
    if not 1 <= r <= profile.m:
        raise ValueError(f"expansion rank {r} out of range [1, {profile.m}]")
    return WeakProfile(
        profile.m,
        tuple({c: 1 for c, rk in b.items() if rk <= r} for b in profile.ranks),
    )


@dataclass(frozen=True)
class Instance:
    """A multiwinner election: a profile plus the target committee size ``k``.

    Feasible committees are candidate sets of size at most ``k``.
    """

    profile: WeakProfile
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.profile.m:
            raise ValueError(f"committee size {self.k} not in [1, {self.profile.m}]")

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def m(self) -> int:
        return self.profile.m


def group_quota(ell: int, instance: Instance) -> Fraction:
    """The exact voter-count threshold ``ell * n / k`` entitling a group to
    ``ell`` committee seats."""
    if ell < 1:
        raise ValueError("quota multiplier must be a positive integer")
    return Fraction(ell * instance.n, instance.k)


# ---------------------------------------------------------------------------
# candidate naming and committee parsing


def candidate_name(cand: int, names: Sequence[str] | None = None) -> str:
    if names is not None:
        return names[cand]
    return f"c{cand + 1}"


def parse_candidate(token: str, m: int, names: Sequence[str] | None = None) -> int:
    """Resolve a candidate given by name (``c3``), listed name, or index."""
    token = token.strip()
    if names is not None and token in names:
        return list(names).index(token)
    match = re.fullmatch(r"c(\d+)", token)
    if match:
        cand = int(match.group(1)) - 1
        if 0 <= cand < m:
            return cand
    if token.lstrip("-").isdigit():
        cand = int(token)
        if 0 <= cand < m:
            return cand
    raise ValueError(f"cannot resolve candidate {token!r}")


def parse_committee(spec: str, m: int, names: Sequence[str] | None = None) -> frozenset:
    if not spec.strip():
        return frozenset()
    return frozenset(parse_candidate(tok, m, names) for tok in spec.split(","))


# ---------------------------------------------------------------------------
# JSON instance format
#
# {"m": int, "k": int,
#  "voters": [[{"cand": int, "rank": int}, ...], ...]}
# or the dichotomous shortcut
# {"m": int, "k": int, "voters_approval": [[int, ...], ...]}
# with an optional "names": [str, ...] of length m.


def instance_to_dict(instance: Instance, names: Sequence[str] | None = None) -> dict:
    profile = instance.profile
    data: dict = {"m": profile.m, "k": instance.k}
    if names is not None:
        data["names"] = list(names)
    if profile.is_dichotomous:
        data["voters_approval"] = [sorted(b) for b in profile.ranks]
    else:
        data["voters"] = [
            [{"cand": c, "rank": r} for c, r in sorted(b.items())] for b in profile.ranks
        ]
    return data


def instance_from_dict(data: Mapping) -> tuple[Instance, list | None]:
    """Build an instance from its JSON dictionary; returns ``(instance, names)``."""
    m = int(data["m"])
    if "voters_approval" in data:
        profile = WeakProfile.from_approval(m, data["voters_approval"])
    elif "voters" in data:
        profile = validate_profile(
            m, [[(e["cand"], e["rank"]) for e in ballot] for ballot in data["voters"]]
        )
    else:
        raise ValueError("instance JSON needs 'voters' or 'voters_approval'")
    names = list(data["names"]) if "names" in data else None
    if names is not None and len(names) != m:
        raise ValueError("'names' must list exactly m candidate names")
    return Instance(profile, int(data["k"])), names


def load_instance(path) -> tuple[Instance, list | None]:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def dump_instance(instance: Instance, path, names: Sequence[str] | None = None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance, names), fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# PrefLib .soi / .toi ingestion (strict / with-ties incomplete orders)


def load_preflib(path, k: int) -> tuple[Instance, list | None]:
    """Read a PrefLib ``.soi``/``.toi`` (or ``.soc``/``.toc``) file.

    Order lines look like ``count: 1,2,{3,4}`` with 1-based alternative
    numbers; braces mark indifference classes.  Each line contributes
    ``count`` identical ballots.
    """
    names: dict[int, str] = {}
    m = 0
    ballots: list[dict[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                meta = re.match(r"#\s*ALTERNATIVE NAME (\d+)\s*:\s*(.*)", line)
                if meta:
                    names[int(meta.group(1))] = meta.group(2).strip()
                meta = re.match(r"#\s*NUMBER ALTERNATIVES\s*:\s*(\d+)", line)
                if meta:
                    m = int(meta.group(1))
                continue
            count_str, _, order = line.partition(":")
            count = int(count_str.strip())
            ballot: dict[int, int] = {}
            next_rank = 1
            for group in re.findall(r"\{[^}]*\}|[^,{}]+", order):
                members = [tok for tok in re.split(r"[,\s]+", group.strip("{} ")) if tok]
                for tok in members:
                    ballot[int(tok) - 1] = next_rank
                next_rank += len(members)
            ballots.extend([dict(ballot)] * count)
    if m == 0:
        m = 1 + max((c for b in ballots for c in b), default=-1)
    profile = WeakProfile.from_ranks(m, ballots)
    name_list = [names.get(i + 1, f"c{i + 1}") for i in range(m)] if names else None
    return Instance(profile, k), name_list
