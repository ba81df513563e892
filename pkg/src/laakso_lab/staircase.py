"""Exact-rational staircase vectors under the sup norm.

The building blocks are u_k = theta*(e_1 + ... + e_k) in finitely supported
sequences, with the n-th coordinate functional as the biorthogonal partner:
coordinate n of u_k is theta when n <= k and 0 otherwise.  An increasing
index set J = {n_1 < ... < n_k} gets the vector v_J = u_{n_1} + ... + u_{n_k},
whose i-th coordinate is theta times the number of elements of J that are
at least i.  Sup-norm arithmetic on such vectors therefore reduces to
counting, and every check in this module runs in exact Fractions; nothing
is floating point.

The verification entry points enumerate all increasing subsets of
{1..index_bound} up to a size bound and check, exhaustively: injectivity
and the two-sided norm bounds with constants theta and theta/3; the same
shape of bounds with the fixed constant 1/4; exact prefix-pair norms
theta * (level difference); and the biorthogonality table itself.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence, Union

from .errors import DomainError

THETA_DEFAULT = Fraction(3, 4)

IndexSet = Union[tuple[int, ...], Iterable[int]]


def _elements(J) -> tuple[int, ...]:
    els = tuple(getattr(J, "elements", J))
    if any(int(e) != e or e < 1 for e in els):
        raise DomainError(f"index set {els} must contain positive integers")
    if any(els[i] >= els[i + 1] for i in range(len(els) - 1)):
        raise DomainError(f"index set {els} is not strictly increasing")
    return els


@dataclass(frozen=True)
class StaircaseVector:
    """Finitely supported coordinates, index 1..len(coords)."""

    coords: tuple[Fraction, ...]
    theta: Fraction

    def coordinate(self, n: int) -> Fraction:
        if n < 1:
            raise DomainError("coordinates are indexed from 1")
        return self.coords[n - 1] if n <= len(self.coords) else Fraction(0)


def step_vector(k: int, theta: Fraction = THETA_DEFAULT) -> StaircaseVector:
    if k < 1:
        raise DomainError("step index must be >= 1")
    theta = Fraction(theta)
    return StaircaseVector(coords=(theta,) * k, theta=theta)


def v_of(J: IndexSet, theta: Fraction = THETA_DEFAULT) -> StaircaseVector:
    els = _elements(J)
    theta = Fraction(theta)
    if not els:
        return StaircaseVector(coords=(), theta=theta)
    coords = tuple(
        theta * (len(els) - bisect_left(els, i)) for i in range(1, els[-1] + 1)
    )
    return StaircaseVector(coords=coords, theta=theta)


def sup_norm(v: StaircaseVector) -> Fraction:
    return max((abs(c) for c in v.coords), default=Fraction(0))


def _max_count_diff(J: tuple[int, ...], K: tuple[int, ...]) -> int:
    # Coordinate i of v_J - v_K is theta * (count_J(i) - count_K(i)) with
    # count(i) = |{n : n >= i}|; both counts are constant between
    # consecutive elements, so the extremes sit at element values.
    best = 0
    for i in sorted(set(J) | set(K)):
        cj = len(J) - bisect_left(J, i)
        ck = len(K) - bisect_left(K, i)
        if abs(cj - ck) > best:
            best = abs(cj - ck)
    return best


def diff_norm(J: IndexSet, K: IndexSet, theta: Fraction = THETA_DEFAULT) -> Fraction:
    """Exact sup norm of v_J - v_K by the counting route (no vectors built)."""
    return Fraction(theta) * _max_count_diff(_elements(J), _elements(K))


def enumerate_index_sets(index_bound: int, size_bound: int) -> list[tuple[int, ...]]:
    """All increasing subsets of {1..index_bound} with at most size_bound
    elements, by size then lexicographically; deterministic."""
    out: list[tuple[int, ...]] = []
    for k in range(0, size_bound + 1):
        out.extend(combinations(range(1, index_bound + 1), k))
    return out


def verify_biorthogonality(theta: Fraction = THETA_DEFAULT, index_bound: int = 12) -> dict:
    """Coordinate functional n on u_k must give theta for n <= k, else 0."""
    theta = Fraction(theta)
    bad = []
    for k in range(1, index_bound + 1):
        u = step_vector(k, theta)
        for n in range(1, index_bound + 1):
            want = theta if n <= k else Fraction(0)
            if u.coordinate(n) != want:
                bad.append({"n": n, "k": k, "got": str(u.coordinate(n))})
    return {
        "checked": index_bound * index_bound,
        "counterexamples": bad[:5],
        "pass": not bad,
    }


def verify_staircase_bounds(
    theta: Fraction = THETA_DEFAULT, index_bound: int = 12, size_bound: int = 6
) -> dict:
    """Injectivity of J -> v_J, the per-set bounds theta*k <= ||v_J|| <= k,
    and for every ordered pair with max J < min J' the two-sided bound
    (theta/3)*(|J|+|J'|) <= ||v_J - v_J'|| <= |J|+|J'|.  Exact arithmetic;
    reports the tightest ratios observed."""
    if not 0 < theta < 1:
        raise DomainError("theta must lie in (0,1)")
    theta = Fraction(theta)
    sets = enumerate_index_sets(index_bound, size_bound)
    bad: list[dict] = []

    seen: dict[tuple, tuple] = {}
    for J in sets:
        key = v_of(J, theta).coords
        if key in seen:
            bad.append({"check": "injective", "J": list(seen[key]), "K": list(J)})
        seen[key] = J

    tight_norm = None
    for J in sets:
        if not J:
            continue
        norm = sup_norm(v_of(J, theta))
        if not theta * len(J) <= norm <= len(J):
            bad.append({"check": "norm", "J": list(J), "norm": str(norm)})
        ratio = norm / len(J)
        if tight_norm is None or ratio < tight_norm:
            tight_norm = ratio

    pairs = 0
    tight_pair = None
    for K in sets:
        if not K:
            continue
        limit = K[0]
        for J in sets:
            if J and J[-1] >= limit:
                continue
            pairs += 1
            norm = theta * _max_count_diff(J, K)
            lower = theta / 3 * (len(J) + len(K))
            upper = Fraction(len(J) + len(K))
            if not lower <= norm <= upper:
                bad.append(
                    {"check": "pair", "J": list(J), "K": list(K),
                     "norm": str(norm), "lower": str(lower),
                     "upper": str(upper)}
                )
            ratio = norm / lower
            if tight_pair is None or ratio < tight_pair:
                tight_pair = ratio

    return {
        "theta": str(theta),
        "sets": len(sets),
        "pairs": pairs,
        "tightest_norm_ratio": str(tight_norm),
        "tightest_pair_ratio": str(tight_pair),
        "counterexamples": bad[:5],
        "violations": len(bad),
        "pass": not bad,
    }


def verify_quarter_bounds(index_bound: int = 12, size_bound: int = 6) -> dict:
    """The same enumeration against the fixed constant 1/4 at theta = 3/4:
    (1/4)|J| <= ||v_J|| <= |J| for each set, and for max J < min J' the
    bound (1/4)(|J|+|J'|) <= ||v_J - v_J'|| <= |J|+|J'|."""
    theta = Fraction(3, 4)
    quarter = Fraction(1, 4)
    sets = enumerate_index_sets(index_bound, size_bound)
    bad: list[dict] = []
    for J in sets:
        if not J:
            continue
        norm = sup_norm(v_of(J, theta))
        if not quarter * len(J) <= norm <= len(J):
            bad.append({"check": "norm", "J": list(J), "norm": str(norm)})
    pairs = 0
    tight = None
    for K in sets:
        if not K:
            continue
        limit = K[0]
        for J in sets:
            if J and J[-1] >= limit:
                continue
            pairs += 1
            norm = theta * _max_count_diff(J, K)
            lower = quarter * (len(J) + len(K))
            if not lower <= norm <= len(J) + len(K):
                bad.append(
                    {"check": "pair", "J": list(J), "K": list(K),
                     "norm": str(norm), "lower": str(lower)}
                )
            ratio = norm / lower
            if tight is None or ratio < tight:
                tight = ratio
    return {
        "theta": str(theta),
        "sets": len(sets),
        "pairs": pairs,
        "tightest_pair_ratio": str(tight),
        "counterexamples": bad[:5],
        "violations": len(bad),
        "pass": not bad,
    }


def verify_prefix_exactness(
    theta: Fraction = THETA_DEFAULT, index_bound: int = 12, size_bound: int = 6
) -> dict:
    """For prefix-comparable sets J below J' the norm of the difference is
    exactly theta times the level gap: the map J -> v_J distorts
    ancestor-to-descendant distances by the single factor theta."""
    theta = Fraction(theta)
    sets = enumerate_index_sets(index_bound, size_bound)
    bad = []
    pairs = 0
    for K in sets:
        for p in range(len(K) + 1):
            J = K[:p]
            pairs += 1
            norm = theta * _max_count_diff(J, K)
            if norm != theta * (len(K) - p):
                bad.append(
                    {"check": "prefix", "J": list(J), "K": list(K),
                     "norm": str(norm), "expected": str(theta * (len(K) - p))}
                )
    return {
        "theta": str(theta),
        "pairs": pairs,
        "counterexamples": bad[:5],
        "violations": len(bad),
        "pass": not bad,
    }


def exponent_for_radius(r: int) -> int:
    """The exponent N with 3**(N-2) = r, for fork radii that are powers
    of three."""
    if r < 1:
        raise DomainError("radius must be a positive integer")
    k = 0
    m = r
    while m % 3 == 0:
        m //= 3
        k += 1
    if m != 1:
        raise DomainError(f"radius {r} is not a power of 3")
    return k + 2


def sibling_separation_report(
    nodes: Sequence[IndexSet],
    exponent: int,
    theta: Fraction = THETA_DEFAULT,
) -> dict:
    """Cardinality and separation bounds for index sets branching off a
    common prefix.  With tails I_k (the elements past the longest common
    prefix), requires each |I_k| >= 3**(exponent-2) and pairwise
    ||v_J - v_J'|| >= (1/4)(|I_k|+|I_j|) >= (1/2)*3**(exponent-2).

    Preconditions (nonempty tails, ranges disjoint and ordered) are
    reported as violations, never raised; bounds are still evaluated so a
    failing witness shows exactly which part breaks."""
    if exponent < 2:
        raise DomainError("exponent must be >= 2")
    theta = Fraction(theta)
    tuples = [_elements(n) for n in nodes]
    if len(tuples) <= 1:
        return {
            "nodes": len(tuples), "pairs": 0, "precondition_ok": True,
            "cardinality_ok": True, "separation_ok": True,
            "violations": [], "pass": True,
        }
    prefix_len = 0
    while all(len(t) > prefix_len for t in tuples) and len(
        {t[prefix_len] for t in tuples}
    ) == 1:
        prefix_len += 1
    tails = [t[prefix_len:] for t in tuples]

    violations: list[str] = []
    precondition_ok = True
    if any(not tail for tail in tails):
        precondition_ok = False
        violations.append("empty tail: some node equals the common prefix")
    else:
        by_min = sorted(range(len(tails)), key=lambda i: tails[i][0])
        for a, b in zip(by_min, by_min[1:]):
            if tails[a][-1] >= tails[b][0]:
                precondition_ok = False
                violations.append(
                    f"tail ranges overlap: {list(tails[a])} and {list(tails[b])}"
                )

    bound = 3 ** (exponent - 2)
    cardinality_ok = True
    for tail in tails:
        if len(tail) < bound:
            cardinality_ok = False
            violations.append(
                f"tail {list(tail)} has {len(tail)} < {bound} elements"
            )

    separation_ok = True
    pairs = 0
    half_bound = Fraction(bound, 2)
    for i in range(len(tuples)):
        for j in range(i + 1, len(tuples)):
            pairs += 1
            norm = theta * _max_count_diff(tuples[i], tuples[j])
            lower = Fraction(1, 4) * (len(tails[i]) + len(tails[j]))
            if norm < lower:
                separation_ok = False
                violations.append(
                    f"pair {i},{j}: norm {norm} < quarter bound {lower}"
                )
            if lower < half_bound:
                separation_ok = False
                violations.append(
                    f"pair {i},{j}: quarter bound {lower} < {half_bound}"
                )
    return {
        "nodes": len(tuples),
        "pairs": pairs,
        "common_prefix": list(tuples[0][:prefix_len]),
        "tails": [list(t) for t in tails],
        "required_cardinality": bound,
        "precondition_ok": precondition_ok,
        "cardinality_ok": cardinality_ok,
        "separation_ok": separation_ok,
        "violations": violations[:10],
        "pass": precondition_ok and cardinality_ok and separation_ok,
    }
