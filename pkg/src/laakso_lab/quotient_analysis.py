"""Analysis of maps between finite metric spaces given by distance tables:
Lipschitz and co-Lipschitz constants, ball-inclusion moduli, coarse
profiles, relation-restricted co-Lipschitz constants, and a deterministic
fork search with the bound arithmetic it feeds.

Everything here is table-driven and space-agnostic; the tree and graph
modules only show up through `as_map_table`.  Two deliberately independent
routes compute the relation-restricted constant: an optimized minimum of
distance ratios and a direct predicate evaluation.  They are cross-checked
against each other in tests rather than merged.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import inf
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

TRIANGLE_EXHAUSTIVE_LIMIT = 256
TRIANGLE_SAMPLES = 20_000


class FiniteMetricSpace:
    """Indexed points 0..n-1 with a full distance table and an optional
    strict partial order ("ancestor of").  All invariants are validated at
    construction: symmetry, zero diagonal, positivity off the diagonal, the
    triangle inequality (exhaustively up to 256 points, by a seeded
    20000-triple sample above that), and strictness of the order."""

    def __init__(
        self,
        dist: Sequence[Sequence[float]],
        order: Optional[Sequence[tuple[int, int]]] = None,
    ):
        n = len(dist)
        rows = tuple(tuple(row) for row in dist)
        if any(len(row) != n for row in rows):
            raise ValueError("distance table is not square")
        self.n = n
        self.dist = rows
        arr = np.asarray(rows, dtype=float)
        if n and (np.diag(arr) != 0).any():
            raise ValueError("nonzero diagonal in distance table")
        if not np.array_equal(arr, arr.T):
            raise ValueError("distance table is not symmetric")
        off = arr[~np.eye(n, dtype=bool)] if n else arr
        if off.size and off.min() <= 0:
            raise ValueError("non-positive distance between distinct points")
        self._validate_triangle(arr)
        self.order: Optional[frozenset[tuple[int, int]]] = None
        if order is not None:
            pairs = frozenset((int(i), int(j)) for i, j in order)
            for i, j in pairs:
                if not (0 <= i < n and 0 <= j < n):
                    raise ValueError(f"order pair ({i},{j}) out of range")
                if i == j:
                    raise ValueError(f"order is not irreflexive at {i}")
                if (j, i) in pairs:
                    raise ValueError(f"order is not antisymmetric on ({i},{j})")
            by_first: dict[int, list[int]] = {}
            for i, j in pairs:
                by_first.setdefault(i, []).append(j)
            for i, j in pairs:
                for k in by_first.get(j, ()):
                    if (i, k) not in pairs:
                        raise ValueError(
                            f"order is not transitive: ({i},{j}),({j},{k})"
                        )
            self.order = pairs

    def _validate_triangle(self, arr: np.ndarray) -> None:
        n = self.n
        if n <= TRIANGLE_EXHAUSTIVE_LIMIT:
            for k in range(n):
                if (arr > arr[:, k : k + 1] + arr[k : k + 1, :] + 1e-12).any():
                    bad = np.argwhere(
                        arr > arr[:, k : k + 1] + arr[k : k + 1, :] + 1e-12
                    )[0]
                    raise ValueError(
                        f"triangle inequality fails via {k} "
                        f"for pair ({bad[0]},{bad[1]})"
                    )
            return
        rng = random.Random(0)
        for _ in range(TRIANGLE_SAMPLES):
            i, j, k = (rng.randrange(n) for _ in range(3))
            if arr[i][j] > arr[i][k] + arr[k][j] + 1e-12:
                raise ValueError(
                    f"triangle inequality fails via {k} for pair ({i},{j})"
                )

    def related(self, i: int, j: int) -> bool:
        return self.order is not None and (i, j) in self.order

    def to_dict(self) -> dict:
        return {"n": self.n, "dist": [list(row) for row in self.dist]}


class MetricMapTable:
    """A total assignment between two finite metric spaces, indexed
    pointwise: source point i maps to target point assign[i]."""

    def __init__(
        self,
        source: FiniteMetricSpace,
        target: FiniteMetricSpace,
        assign: Sequence[int],
    ):
        if len(assign) != source.n:
            raise ValueError(
                f"assignment covers {len(assign)} of {source.n} source points"
            )
        self.assign = tuple(int(a) for a in assign)
        for a in self.assign:
            if not 0 <= a < target.n:
                raise ValueError(f"assigned index {a} outside target")
        self.source = source
        self.target = target
        self.surjective = len(set(self.assign)) == target.n
        self._preimages: dict[int, tuple[int, ...]] = {}
        for i, a in enumerate(self.assign):
            self._preimages.setdefault(a, ())
            self._preimages[a] = self._preimages[a] + (i,)

    def preimages(self, t: int) -> tuple[int, ...]:
        return self._preimages.get(t, ())

    @classmethod
    def from_dict(cls, d: dict) -> "MetricMapTable":
        source = FiniteMetricSpace(
            d["source"]["dist"], order=d.get("source_order")
        )
        target = FiniteMetricSpace(
            d["target"]["dist"], order=d.get("target_order")
        )
        if d["source"].get("n", source.n) != source.n:
            raise ValueError("declared source size disagrees with table")
        if d["target"].get("n", target.n) != target.n:
            raise ValueError("declared target size disagrees with table")
        return cls(source, target, d["assign"])

    def to_dict(self) -> dict:
        out = {
            "schema": 1,
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
            "assign": list(self.assign),
        }
        if self.source.order is not None:
            out["source_order"] = sorted([i, j] for i, j in self.source.order)
        if self.target.order is not None:
            out["target_order"] = sorted([i, j] for i, j in self.target.order)
        return out


def lipschitz_constant(m: MetricMapTable) -> float:
    if m.source.n < 2:
        raise DomainError("need at least two source points")
    sdist, tdist, assign = m.source.dist, m.target.dist, m.assign
    best = 0.0
    for i in range(m.source.n):
        for j in range(i + 1, m.source.n):
            ratio = tdist[assign[i]][assign[j]] / sdist[i][j]
            if ratio > best:
                best = ratio
    return best


def quotient_moduli(m: MetricMapTable, r: float) -> tuple[float, float]:
    """(omega, Omega) at radius r: Omega is the largest image distance over
    source pairs within r; omega is the largest realized target radius s so
    that every target point within s of any image has a preimage within r.
    Both are step functions of r, reported at realized distances only."""
    if not m.surjective:
        raise DomainError("moduli require a surjective assignment")
    sdist, tdist, assign = m.source.dist, m.target.dist, m.assign
    omega_big = 0.0
    for i in range(m.source.n):
        for j in range(i + 1, m.source.n):
            if sdist[i][j] <= r:
                d = tdist[assign[i]][assign[j]]
                if d > omega_big:
                    omega_big = d
    # rho[x][y]: closest preimage of target y to source x.
    threshold = inf
    for x in range(m.source.n):
        fx = assign[x]
        for y in range(m.target.n):
            rho = min(sdist[x][p] for p in m.preimages(y))
            if rho > r and tdist[fx][y] < threshold:
                threshold = tdist[fx][y]
    realized = sorted({tdist[i][j] for i in range(m.target.n)
                       for j in range(m.target.n)})
    omega_small = max(s for s in realized if s < threshold)
    return omega_small, omega_big


def atd_pairs(m: MetricMapTable) -> list[tuple[int, int, float, float]]:
    """All (source, target, D, rho) with the image strictly below the
    target point: D is the image-to-target distance, rho the distance from
    the source point to the nearest preimage of the target point."""
    if m.target.order is None or m.source.order is None:
        raise DomainError("relation-restricted analysis needs both orders")
    if not m.surjective:
        raise DomainError("relation-restricted analysis needs surjectivity")
    out = []
    sdist, tdist = m.source.dist, m.target.dist
    for x in range(m.source.n):
        fx = m.assign[x]
        for y in range(m.target.n):
            if (fx, y) not in m.target.order:
                continue
            rho = min(sdist[x][p] for p in m.preimages(y))
            out.append((x, y, tdist[fx][y], rho))
    return out


def _co_constant(pairs, delta: float) -> float:
    vals = [D / rho for _, _, D, rho in pairs if rho > delta]
    return min(vals) if vals else inf


def all_pairs(m: MetricMapTable) -> list[tuple[int, int, float, float]]:
    """Unrestricted analog of `atd_pairs`: every source point against every
    target point other than its own image."""
    out = []
    sdist, tdist = m.source.dist, m.target.dist
    for x in range(m.source.n):
        fx = m.assign[x]
        for y in range(m.target.n):
            if y == fx:
                continue
            pre = m.preimages(y)
            if not pre:
                continue
            rho = min(sdist[x][p] for p in pre)
            out.append((x, y, tdist[fx][y], rho))
    return out


@dataclass(frozen=True)
class CoarseProfile:
    lip: float
    L: dict
    c: dict
    c_atd: Optional[dict]
    c_atd_inf: Optional[float]


def coarse_profile(m: MetricMapTable, delta_grid: Sequence[float]) -> CoarseProfile:
    """Large-distance Lipschitz profile L, co-Lipschitz profile c, and the
    relation-restricted profile when both orders are present.  c_atd_inf is
    the largest finite tabulated value (the profile is non-decreasing, so
    this is its supremum over the grid)."""
    if not m.surjective:
        raise DomainError("coarse profile requires a surjective assignment")
    deltas = sorted(set(float(d) for d in delta_grid))
    if any(d <= 0 for d in deltas):
        raise DomainError("delta grid must be positive")
    sdist, tdist, assign = m.source.dist, m.target.dist, m.assign
    lip = lipschitz_constant(m) if m.source.n >= 2 else 0.0

    ratios = []
    for i in range(m.source.n):
        for j in range(i + 1, m.source.n):
            ratios.append((sdist[i][j], tdist[assign[i]][assign[j]]))
    L = {}
    for d in deltas:
        far = [t / s for s, t in ratios if s >= d]
        L[d] = max(far) if far else 0.0

    plain = all_pairs(m)
    c = {d: _co_constant(plain, d) for d in deltas}

    c_atd = None
    c_atd_inf = None
    if m.source.order is not None and m.target.order is not None:
        restricted = atd_pairs(m)
        c_atd = {d: _co_constant(restricted, d) for d in deltas}
        finite = [v for v in c_atd.values() if v < inf]
        c_atd_inf = max(finite) if finite else inf
    return CoarseProfile(lip=lip, L=L, c=c, c_atd=c_atd, c_atd_inf=c_atd_inf)


def c_atd_infinity(m: MetricMapTable) -> float:
    """Supremum of the restricted co-Lipschitz profile over all scales.
    The profile is a step function changing only at realized preimage
    distances, so evaluating the minimum over {rho >= step} for every step
    covers all of it; the largest value wins."""
    pairs = atd_pairs(m)
    if not pairs:
        return inf
    steps = sorted({rho for _, _, _, rho in pairs})
    best = 0.0
    for step in steps:
        vals = [D / rho for _, _, D, rho in pairs if rho >= step]
        best = max(best, min(vals))
    return best


def atd_violation(
    m: MetricMapTable, c: float, delta: float
) -> Optional[dict]:
    """Direct predicate route: hunt for a scale R >= delta and a related
    pair whose image gap fits under c*R while every preimage sits farther
    than R.  Scanning R over the per-pair threshold max(delta, D/c) is
    exhaustive because the predicate is monotone between realized values."""
    for x, y, D, rho in atd_pairs(m):
        R = max(delta, D / c)
        if R < rho and D <= c * R:
            return {
                "source": x, "target": y, "scale": R,
                "image_gap": D, "nearest_preimage": rho,
            }
    return None


def check_atd_colip(m: MetricMapTable, c: float, delta: float) -> bool:
    return atd_violation(m, c, delta) is None


def cross_validate_atd(
    m: MetricMapTable, c_grid: Sequence[float], delta_grid: Sequence[float]
) -> dict:
    """Grid agreement between the predicate route and the optimized profile:
    for every (c, delta) the predicate must pass exactly when c does not
    exceed the tabulated constant at delta."""
    prof = coarse_profile(m, delta_grid)
    disagreements = []
    checked = 0
    for d in delta_grid:
        for c in c_grid:
            checked += 1
            direct = check_atd_colip(m, c, d)
            tabulated = c <= prof.c_atd[float(d)]
            if direct != tabulated:
                disagreements.append(
                    {"c": c, "delta": d, "predicate": direct,
                     "tabulated_constant": prof.c_atd[float(d)]}
                )
    return {
        "checked": checked,
        "disagreements": disagreements[:5],
        "pass": not disagreements,
    }


@dataclass(frozen=True)
class ForkWitness:
    """Indices of a fork: head mu0, center mu1, arms mu2 in the target at
    distances r / r / 2r, together with preimages whose arm lengths are
    short and whose spread stays wide, to tolerance eps."""

    r: float
    mu0: int
    mu1: int
    mu2: tuple[int, ...]
    sigma0: int
    sigma1: int
    sigma2: tuple[int, ...]
    eps: float

    def as_dict(self) -> dict:
        return {
            "schema": 1,
            "r": self.r,
            "eps": self.eps,
            "mu0": self.mu0, "mu1": self.mu1, "mu2": list(self.mu2),
            "sigma0": self.sigma0, "sigma1": self.sigma1,
            "sigma2": list(self.sigma2),
        }

    def self_check(self, m: MetricMapTable) -> list[str]:
        """Re-verify every defining inequality straight from the tables;
        returns the list of violations (empty when sound)."""
        problems = []
        td, sd = m.target.dist, m.source.dist
        r = self.r
        if td[self.mu0][self.mu1] != r:
            problems.append("head-to-center distance is not r")
        for k in self.mu2:
            if td[self.mu1][k] != r:
                problems.append(f"center-to-arm {k} distance is not r")
            if td[self.mu0][k] != 2 * r:
                problems.append(f"head-to-arm {k} distance is not 2r")
        for s, mu in [(self.sigma0, self.mu0), (self.sigma1, self.mu1)] + [
            (s, mu) for s, mu in zip(self.sigma2, self.mu2)
        ]:
            if m.assign[s] != mu:
                problems.append(f"preimage {s} does not map to {mu}")
        c = c_atd_infinity(m)
        arm_bound = (1 + 3 * self.eps) * r / c
        spread_bound = (1 - 80 * self.eps) * r / c
        if sd[self.sigma0][self.sigma1] > arm_bound:
            problems.append("head preimage arm too long")
        for s in self.sigma2:
            if sd[self.sigma1][s] > arm_bound:
                problems.append(f"arm preimage {s} too long")
            if sd[self.sigma0][s] / 2 < spread_bound:
                problems.append(f"arm preimage {s} spread too narrow")
        return problems


def fork_search(
    m: MetricMapTable,
    eps: float,
    r_min: float,
    max_arms: Optional[int] = None,
) -> Optional[ForkWitness]:
    """Deterministic search for a fork: scan radii in increasing order over
    realized target distances, heads and centers in index order, collect
    arms greedily under the mutual-2r constraint, then lift each target
    point to the lexicographically first preimage meeting the arm and
    spread bounds.  Returns the first witness found, or None.

    The spread bound is enforced non-strictly: at eps = 0 an exact fork has
    spread equal to the bound itself, and that exact witness is the point
    of the search."""
    if m.source.n < 4 or m.target.n < 4:
        return None
    if not m.surjective:
        return None
    if m.source.order is None or m.target.order is None:
        return None
    c = c_atd_infinity(m)
    if c == inf:
        return None
    td, sd = m.target.dist, m.source.dist
    torder, sorder = m.target.order, m.source.order
    radii = sorted(
        {td[i][j] for i in range(m.target.n) for j in range(m.target.n)
         if td[i][j] >= r_min}
    )
    for r in radii:
        arm_bound = (1 + 3 * eps) * r / c
        spread_bound = (1 - 80 * eps) * r / c
        for mu0 in range(m.target.n):
            for mu1 in range(m.target.n):
                if (mu0, mu1) not in torder or td[mu0][mu1] != r:
                    continue
                arms: list[int] = []
                for mu2 in range(m.target.n):
                    if (mu1, mu2) not in torder:
                        continue
                    if td[mu1][mu2] != r or td[mu0][mu2] != 2 * r:
                        continue
                    if all(td[mu2][a] == 2 * r for a in arms):
                        arms.append(mu2)
                if max_arms is not None:
                    arms = arms[:max_arms]
                if len(arms) < 2:
                    continue
                witness = _lift_fork(
                    m, r, mu0, mu1, arms, arm_bound, spread_bound, eps,
                    sd, sorder,
                )
                if witness is not None:
                    return witness
    return None


def _lift_fork(m, r, mu0, mu1, arms, arm_bound, spread_bound, eps, sd, sorder):
    for s0 in m.preimages(mu0):
        for s1 in m.preimages(mu1):
            if (s0, s1) not in sorder or sd[s0][s1] > arm_bound:
                continue
            chosen = []
            for mu2 in arms:
                pick = None
                for s2 in m.preimages(mu2):
                    if (s1, s2) not in sorder:
                        continue
                    if sd[s1][s2] > arm_bound:
                        continue
                    if sd[s0][s2] / 2 < spread_bound:
                        continue
                    pick = s2
                    break
                if pick is None:
                    break
                chosen.append(pick)
            if len(chosen) == len(arms):
                return ForkWitness(
                    r=r, mu0=mu0, mu1=mu1, mu2=tuple(arms),
                    sigma0=s0, sigma1=s1, sigma2=tuple(chosen), eps=eps,
                )
    return None


def beta_bound_from_fork(eps):
    """83*eps / (1 + 3*eps); exact under Fraction inputs, float otherwise."""
    if eps < 0:
        raise DomainError("eps must be non-negative")
    return 83 * eps / (1 + 3 * eps)


def json_ready(obj):
    """Replace non-finite floats and exact rationals by strings so reports
    stay valid JSON."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float):
        if obj != obj:
            return "nan"
        if obj == inf:
            return "inf"
        if obj == -inf:
            return "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    return obj
