"""Coset-structured decompositions of integer functions and the selected
subgroup chains built from them.

``decompose_int`` is a branch-and-bound search over the enumerated
subgroup lattice: each level picks a subgroup H and subtracts the
H-coset-constant integer function obtained by rounding the residual's
coset averages.  The trivial closing move (H = {0}, g = residual) is
always available, so the search never fails; a node cap bounds the work
and falls back to the trivial decomposition when exceeded.

``corkey_build`` rounds a near-integer function once, decomposes it,
greedily reorders the parts by intersection size, and for each requested
eta selects the subgroup K(eta) along the intersection chain.  Every
property the selection is supposed to have is verified at runtime and
recorded, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import Config, DEFAULT_CONFIG
from .errors import (
    DecompositionFailed,
    OverEnumerationCap,
    RoundingTooFar,
)
from .fourier import GroupFunction, a_norm, band_project, sup_norm
from .group_core import (
    FiniteAbelianGroup,
    Subgroup,
    coset_ids,
    coset_representatives,
    enumerate_subgroups,
    subgroup_intersect,
    trivial_subgroup,
)
from .rounding import dist_to_int, integer_values, round_int


def _round_half_toward_zero(a: np.ndarray) -> np.ndarray:
    return np.copysign(np.ceil(np.abs(a) - 0.5), a)


def _coset_round(values: np.ndarray, ids: np.ndarray, order: int
                 ) -> np.ndarray:
    """Round the coset averages of an integer vector, half toward zero."""
    sums = np.bincount(ids, weights=values.astype(float))
    avg = sums / order
    return _round_half_toward_zero(avg)[ids].astype(np.int64)


# -- decomposition -------------------------------------------------------------


@dataclass(frozen=True)
class IdempotentPart:
    subgroup: Subgroup
    values: np.ndarray            # int64, constant on subgroup cosets
    sup: int
    coset_count: int              # cosets of the subgroup carrying support

    @property
    def score(self) -> int:
        return max(self.sup, self.coset_count)

    def to_json_dict(self) -> dict:
        return {
            "subgroup": list(self.subgroup.key),
            "values": [int(v) for v in self.values],
            "sup": self.sup,
            "coset_count": self.coset_count,
        }


def _make_part(group: FiniteAbelianGroup, sub: Subgroup, values: np.ndarray
               ) -> IdempotentPart:
    ids = coset_ids(group, sub)
    reps = coset_representatives(group, sub)
    rep_of = reps[ids]
    if not np.array_equal(values, values[rep_of]):
        raise DecompositionFailed("part is not constant on its cosets")
    nonzero = np.unique(ids[values != 0])
    arr = values.astype(np.int64)
    arr.flags.writeable = False
    return IdempotentPart(
        subgroup=sub,
        values=arr,
        sup=int(np.abs(values).max(initial=0)),
        coset_count=int(nonzero.size),
    )


@dataclass(frozen=True)
class IdempotentDecomposition:
    group: FiniteAbelianGroup
    parts: tuple[IdempotentPart, ...]
    m_bound: float                 # a-norm budget the search ran under
    cost_mode: str
    downgraded: bool               # node cap hit; trivial fallback returned
    zero_subsets_verified: bool    # subset check done (part count <= 12)
    nodes: int

    @property
    def l(self) -> int:
        return len(self.parts)

    @property
    def f_actual(self) -> int:
        return max((p.score for p in self.parts), default=0)

    def total(self) -> np.ndarray:
        out = np.zeros(self.group.order, dtype=np.int64)
        for p in self.parts:
            out += p.values
        return out

    def to_json_dict(self) -> dict:
        return {
            "group": self.group.spec(),
            "l": self.l,
            "f_actual": self.f_actual,
            "m_bound": self.m_bound,
            "cost_mode": self.cost_mode,
            "downgraded": self.downgraded,
            "zero_subsets_verified": self.zero_subsets_verified,
            "parts": [p.to_json_dict() for p in self.parts],
        }


def _cost(parts: Sequence[IdempotentPart], mode: str) -> tuple:
    f_actual = max((p.score for p in parts), default=0)
    if mode == "min_parts":
        return (len(parts), f_actual)
    return (f_actual, len(parts))


def _keys_of(parts: Sequence[IdempotentPart]) -> tuple:
    return tuple(p.subgroup.key for p in parts)


class _NodeCapHit(Exception):
    pass


def _strip_zero_subsets(parts: list[IdempotentPart]) -> tuple[list, bool]:
    """Remove proper nonempty zero-sum subsets (exhaustive up to 12 parts)."""
    changed = True
    while changed and 1 < len(parts) <= 12:
        changed = False
        n = len(parts)
        for mask in range(1, (1 << n) - 1):
            total = None
            for i in range(n):
                if mask >> i & 1:
                    total = parts[i].values if total is None \
                        else total + parts[i].values
            if total is not None and not np.any(total):
                parts = [p for i, p in enumerate(parts)
                         if not (mask >> i & 1)]
                changed = True
                break
    return parts, len(parts) <= 12


def decompose_int(w: GroupFunction, cost: str = "min_f_actual",
                  config: Config = DEFAULT_CONFIG,
                  m_bound: float | None = None) -> IdempotentDecomposition:
    """Best coset-structured decomposition of an integer-valued function.

    Cost orderings are lexicographic: ``min_parts`` compares
    (part count, largest part score) and ``min_f_actual`` the reverse;
    ties are broken by the tuple of subgroup canonical keys.
    """
    if cost not in ("min_parts", "min_f_actual"):
        raise DecompositionFailed(f"unknown cost mode {cost!r}")
    group = w.group
    if group.order > config.enumeration_cap:
        raise OverEnumerationCap(
            f"order {group.order} exceeds enumeration cap "
            f"{config.enumeration_cap}")
    values = integer_values(w)
    m_measured = m_bound if m_bound is not None else a_norm(w)
    if not np.any(values):
        return IdempotentDecomposition(group, (), m_measured, cost,
                                       False, True, 0)

    subgroups = enumerate_subgroups(group, config.enumeration_cap)
    id_cache = {s.key: coset_ids(group, s) for s in subgroups}
    budget = max(math.ceil(2 * m_measured), 4)
    trivial = trivial_subgroup(group)

    best: dict = {"cost": None, "keys": None, "parts": None}

    def consider(parts: list[IdempotentPart]) -> None:
        c, k = _cost(parts, cost), _keys_of(parts)
        if best["cost"] is None or (c, k) < (best["cost"], best["keys"]):
            best["cost"], best["keys"], best["parts"] = c, k, list(parts)

    nodes = [0]
    seen: dict[bytes, list[tuple[int, int]]] = {}

    def dominated(key: bytes, f_so_far: int, depth: int) -> bool:
        frontier = seen.setdefault(key, [])
        for f_old, d_old in frontier:
            if f_old <= f_so_far and d_old <= depth:
                return True
        frontier[:] = [(f, d) for f, d in frontier
                       if not (f >= f_so_far and d >= depth)]
        frontier.append((f_so_far, depth))
        return False

    def dfs(residual: np.ndarray, parts: list[IdempotentPart],
            f_so_far: int) -> None:
        nodes[0] += 1
        if nodes[0] > config.decompose_node_cap:
            raise _NodeCapHit
        if not np.any(residual):
            consider(parts)
            return
        if len(parts) >= budget:
            return
        if best["cost"] is not None:
            # one more part is unavoidable; prune on the lexicographic bound
            if cost == "min_parts":
                if (len(parts) + 1, f_so_far) > best["cost"]:
                    return
            else:
                if (f_so_far, len(parts) + 1) > best["cost"]:
                    return
        for sub in subgroups:
            ids = id_cache[sub.key]
            g = _coset_round(residual, ids, sub.order)
            if not np.any(g):
                continue
            child = residual - g
            part = _make_part(group, sub, g)
            f_next = max(f_so_far, part.score)
            if best["cost"] is not None:
                bound = ((len(parts) + 1, f_next) if cost == "min_parts"
                         else (f_next, len(parts) + 1))
                if bound > best["cost"]:
                    continue
            if np.any(child) and dominated(child.tobytes(), f_next,
                                           len(parts) + 1):
                continue
            parts.append(part)
            dfs(child, parts, f_next)
            parts.pop()

    downgraded = False
    try:
        dfs(values, [], 0)
    except _NodeCapHit:
        downgraded = True
        best["parts"] = [_make_part(group, trivial, values.copy())]

    parts, verified = _strip_zero_subsets(best["parts"])
    deco = IdempotentDecomposition(
        group=group,
        parts=tuple(parts),
        m_bound=float(m_measured),
        cost_mode=cost,
        downgraded=downgraded,
        zero_subsets_verified=verified,
        nodes=nodes[0],
    )
    if not np.array_equal(deco.total(), values):
        raise DecompositionFailed("parts do not sum back to the input")
    return deco


# -- the eta-indexed subgroup chain ---------------------------------------------


def f_prime_bound(m_bound: float, eta: float, f_cap: int
                  ) -> tuple[float, float]:
    """Coset-count budget: ceil of the largest eta^-(l-1) l^l F^(2l-1)
    over 1 <= l <= 2M.  Returned as (value-or-inf, log-value)."""
    f_cap = max(int(f_cap), 1)
    lv_max = max(1, math.floor(2 * m_bound))
    best_log = -math.inf
    for lv in range(1, lv_max + 1):
        log_term = (-(lv - 1) * math.log(eta) + lv * math.log(lv)
                    + (2 * lv - 1) * math.log(f_cap))
        best_log = max(best_log, log_term)
    if best_log > 700.0:
        return math.inf, best_log
    return float(math.ceil(math.exp(best_log))), best_log


@dataclass(frozen=True)
class CheckRecord:
    name: str
    lhs: float
    rhs: float
    passed: bool
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": _json_float(self.lhs),
            "rhs": _json_float(self.rhs),
            "passed": self.passed,
            "note": self.note,
        }


def _json_float(x: float):
    return float(x) if math.isfinite(x) else repr(x)


@dataclass(frozen=True)
class CorkeyChain:
    """Audit record for one eta: selected subgroup plus every verified
    intermediate quantity."""

    eta: float
    decomposition: IdempotentDecomposition
    kk_keys: tuple[tuple[int, ...], ...]    # K_1 >= ... >= K_l
    ratios: tuple[float, ...]               # |K_k ^ H_{k+1}| / |K_k|
    threshold: float                        # eta / (l * F^2)
    k_eta: int
    k_group: Subgroup
    f_prime: float
    f_prime_log: float
    coset_count: int                        # measured support cosets
    projected: GroupFunction                # f * m_{K(eta)}
    projected_rounded: np.ndarray           # int64
    checks: dict[str, CheckRecord]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_json_dict(self) -> dict:
        return {
            "eta": self.eta,
            "k_eta": self.k_eta,
            "k_group": list(self.k_group.key),
            "kk": [list(k) for k in self.kk_keys],
            "ratios": [float(r) for r in self.ratios],
            "threshold": self.threshold,
            "f_prime": _json_float(self.f_prime),
            "f_prime_log": self.f_prime_log,
            "coset_count": self.coset_count,
            "checks": {k: v.to_json_dict() for k, v in self.checks.items()},
            "all_passed": self.all_passed,
            "decomposition": self.decomposition.to_json_dict(),
        }


class CorkeyCore:
    """One rounding + decomposition + reorder, shared by every eta."""

    def __init__(self, f: GroupFunction, m_bound: float | None = None,
                 config: Config = DEFAULT_CONFIG):
        self.config = config
        self.f = f
        self.group = f.group
        self.distance = dist_to_int(f)
        if self.distance > config.corkey_threshold:
            raise RoundingTooFar(
                f"d(f, Z) = {self.distance} exceeds threshold "
                f"{config.corkey_threshold}")
        rounding = round_int(f, config.round_margin)
        self.w = rounding.rounded
        self.w_values = rounding.integer_values()
        if not np.any(self.w_values):
            raise DecompositionFailed("input rounds to the zero function")
        self.m_bound = float(m_bound) if m_bound is not None else a_norm(f)
        self.decomposition = decompose_int(
            self.w, cost="min_f_actual", config=config,
            m_bound=self.m_bound)

        self.parts = self._reorder(list(self.decomposition.parts))
        self.l = len(self.parts)
        self.f_cap = max(self.decomposition.f_actual, 1)

        self.kk: list[Subgroup] = []
        current = None
        for part in self.parts:
            current = part.subgroup if current is None else \
                subgroup_intersect(current, part.subgroup)
            self.kk.append(current)
        self.ratios = tuple(
            len(self.kk[k - 1].elements & self.parts[k].subgroup.elements)
            / self.kk[k - 1].order
            for k in range(1, self.l)
        )

    def _reorder(self, parts: list[IdempotentPart]) -> list[IdempotentPart]:
        """Greedy intersection-maximizing order, ties by canonical key."""
        ordered: list[IdempotentPart] = []
        current: frozenset | None = None
        remaining = list(parts)
        while remaining:
            def gain(p: IdempotentPart) -> tuple:
                inter = (len(p.subgroup.elements) if current is None
                         else len(current & p.subgroup.elements))
                return (-inter, p.subgroup.key, tuple(int(v) for v in p.values))
            remaining.sort(key=gain)
            chosen = remaining.pop(0)
            ordered.append(chosen)
            current = (chosen.subgroup.elements if current is None
                       else current & chosen.subgroup.elements)
        return ordered

    def threshold(self, eta: float) -> float:
        return eta / (max(self.l, 1) * self.f_cap ** 2)

    def k_of_eta(self, eta: float) -> int:
        thr = self.threshold(eta)
        for k in range(1, self.l):
            if self.ratios[k - 1] <= thr:
                return k
        return self.l

    def subgroup_of_eta(self, eta: float) -> Subgroup:
        return self.kk[self.k_of_eta(eta) - 1]

    def prefix_sum(self, k: int) -> np.ndarray:
        out = np.zeros(self.group.order, dtype=np.int64)
        for part in self.parts[:k]:
            out += part.values
        return out

    def build_chain(self, eta: float) -> CorkeyChain:
        config = self.config
        group = self.group
        k = self.k_of_eta(eta)
        k_sub = self.kk[k - 1]
        f_prime, f_prime_log = f_prime_bound(self.m_bound, eta, self.f_cap)

        projected = band_project(self.f, k_sub)
        proj_dist = dist_to_int(projected)
        checks: dict[str, CheckRecord] = {}
        checks["a_rounding_drift"] = CheckRecord(
            "d(f*m_K, Z) <= d(f, Z) + eta",
            proj_dist, self.distance + eta,
            proj_dist <= self.distance + eta + 1e-12)
        proj_sup = sup_norm(projected)
        checks["b_projection_mass"] = CheckRecord(
            "||f*m_K||_inf >= 1/2",
            proj_sup, 0.5, proj_sup >= 0.5 - 1e-12)

        proj_round = round_int(projected, config.round_margin)
        proj_int = proj_round.integer_values()
        ids = coset_ids(group, k_sub)
        reps = coset_representatives(group, k_sub)
        rep_of = reps[ids]
        coset_exact = bool(np.array_equal(proj_int, proj_int[rep_of]))
        support_cosets = np.unique(ids[proj_int != 0])
        coset_count = int(support_cosets.size)
        checks["c_coset_support"] = CheckRecord(
            "supp (f*m_K)_Z is a union of at most F' cosets of K",
            float(coset_count), f_prime,
            coset_exact and coset_count <= f_prime,
            note="support verified to be a union of whole cosets"
            if coset_exact else "support is not coset-aligned")

        prefix = self.prefix_sum(k)
        checks["dec_identity"] = CheckRecord(
            "(f*m_K)_Z equals the first k parts, exactly",
            float(np.abs(proj_int - prefix).max(initial=0)), 0.0,
            bool(np.array_equal(proj_int, prefix)))

        prefix_constant = bool(np.array_equal(prefix, prefix[rep_of]))
        checks["smooth_exact"] = CheckRecord(
            "sum_{j<=k} g_j is already K-coset-constant",
            0.0 if prefix_constant else 1.0, 0.0, prefix_constant)

        tail = self.w_values - prefix
        tail_fn = GroupFunction(group, tail.astype(np.complex128), self.f.side)
        tail_proj = band_project(tail_fn, k_sub)
        tail_sup = sup_norm(tail_proj)
        checks["smooth2_leakage"] = CheckRecord(
            "||sum_{j>k} g_j * m_K||_inf <= eta",
            tail_sup, eta, tail_sup <= eta + 1e-9)

        h1_order = self.parts[0].subgroup.order if self.parts else 1
        lower = (self.threshold(eta) ** (self.l - 1)) * h1_order
        checks["lowerk_size"] = CheckRecord(
            "|K(eta)| >= (eta / (l F^2))^(l-1) |H_1|",
            float(k_sub.order), lower, k_sub.order >= lower - 1e-9,
            note="equality occurs in the degenerate single-part chain")

        return CorkeyChain(
            eta=float(eta),
            decomposition=self.decomposition,
            kk_keys=tuple(s.key for s in self.kk),
            ratios=self.ratios,
            threshold=self.threshold(eta),
            k_eta=k,
            k_group=k_sub,
            f_prime=f_prime,
            f_prime_log=f_prime_log,
            coset_count=coset_count,
            projected=projected,
            projected_rounded=proj_int,
            checks=checks,
        )


def corkey_build(f: GroupFunction, etas: Sequence[float],
                 m_bound: float | None = None,
                 config: Config = DEFAULT_CONFIG) -> list[CorkeyChain]:
    """Build the audit chain for every eta in a descending list.

    The decomposition is computed once and shared; the nesting of the
    selected subgroups across etas is verified and recorded on each
    chain.
    """
    etas = [float(e) for e in etas]
    if not etas:
        raise DecompositionFailed("need at least one eta")
    for e in etas:
        if not 0.0 < e <= 0.25:
            raise DecompositionFailed(f"eta {e} outside (0, 1/4]")
    if any(b > a + 1e-15 for a, b in zip(etas, etas[1:])):
        raise DecompositionFailed("etas must be non-increasing")

    core = CorkeyCore(f, m_bound=m_bound, config=config)
    chains = [core.build_chain(eta) for eta in etas]
    for prev, cur in zip(chains, chains[1:]):
        nested = cur.k_group.elements <= prev.k_group.elements
        cur.checks["d_nesting"] = CheckRecord(
            "K(eta') <= K(eta) for eta' <= eta",
            float(cur.k_group.order), float(prev.k_group.order), nested)
    if chains:
        chains[0].checks["d_nesting"] = CheckRecord(
            "K(eta') <= K(eta) for eta' <= eta",
            float(chains[0].k_group.order),
            float(chains[0].k_group.order), True,
            note="first chain in the family")
    return chains
