"""Finite Abelian groups as products of cyclic groups, with exact arithmetic.

Elements and characters share one indexing scheme.  The element with
coordinates ``(x1, ..., xd)``, ``0 <= xj < nj``, gets the lexicographic
index ``x1*(n2*...*nd) + ... + xd`` (C order), and the character with
coordinates ``(r1, ..., rd)`` pairs with it via

    <r, x> = exp(2*pi*i * sum_j rj*xj / nj).

The pairing phase is tracked as the exact integer

    s(r, x) = sum_j rj*xj*(L/nj)  mod L,      L = lcm(n1, ..., nd),

so triviality tests (``<r, x> == 1``) never touch floating point.  The
dual group is represented by the same coordinate system (self-dual
indexing); annihilators are subgroups of the same object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    OverEnumerationCap,
    OverMaxOrder,
    ParentMismatch,
    ZeroModulus,
)

DEFAULT_MAX_ORDER = 4096
DEFAULT_ENUMERATION_CAP = 64


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """A product of cyclic groups Z_{n1} x ... x Z_{nd}."""

    moduli: tuple[int, ...]

    @property
    def order(self) -> int:
        return math.prod(self.moduli)

    @property
    def lcm(self) -> int:
        return math.lcm(*self.moduli)

    @property
    def rank(self) -> int:
        return len(self.moduli)

    def spec(self) -> str:
        """Render as the ``n1xn2x...xnd`` spec string."""
        return "x".join(str(n) for n in self.moduli)

    # -- index/coordinate conversions ----------------------------------

    def coords(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.order:
            raise DimensionMismatch(
                f"index {index} out of range for group of order {self.order}")
        out = []
        for n in reversed(self.moduli):
            index, c = divmod(index, n)
            out.append(c)
        return tuple(reversed(out))

    def index(self, coords: Sequence[int]) -> int:
        if len(coords) != self.rank:
            raise DimensionMismatch(
                f"expected {self.rank} coordinates, got {len(coords)}")
        idx = 0
        for c, n in zip(coords, self.moduli):
            idx = idx * n + (int(c) % n)
        return idx

    def as_index(self, value) -> int:
        """Accept either an index or a coordinate tuple."""
        if isinstance(value, (int, np.integer)):
            if not 0 <= value < self.order:
                raise DimensionMismatch(
                    f"index {value} out of range for order {self.order}")
            return int(value)
        return self.index(tuple(value))

    def add(self, a, b) -> int:
        ca, cb = self.coords(self.as_index(a)), self.coords(self.as_index(b))
        return self.index([x + y for x, y in zip(ca, cb)])

    def neg(self, a) -> int:
        return int(_neg_table(self)[self.as_index(a)])

    def elements(self) -> range:
        return range(self.order)


def make_group(moduli: Iterable[int], max_order: int = DEFAULT_MAX_ORDER
               ) -> FiniteAbelianGroup:
    """Build the product of cyclic groups with the given orders."""
    mods = tuple(int(n) for n in moduli)
    if not mods:
        mods = (1,)
    if any(n < 1 for n in mods):
        raise ZeroModulus(f"moduli must all be >= 1, got {mods}")
    if math.prod(mods) > max_order:
        raise OverMaxOrder(
            f"group order {math.prod(mods)} exceeds cap {max_order}")
    return FiniteAbelianGroup(mods)


def parse_group_spec(spec: str, max_order: int = DEFAULT_MAX_ORDER
                     ) -> FiniteAbelianGroup:
    """Parse a ``n1xn2x...xnd`` string, e.g. ``"2x2"`` or ``"3x9"``."""
    parts = [p.strip() for p in spec.lower().split("x") if p.strip()]
    if not parts:
        raise ZeroModulus(f"empty group spec {spec!r}")
    try:
        mods = [int(p) for p in parts]
    except ValueError as exc:
        raise ZeroModulus(f"bad group spec {spec!r}") from exc
    return make_group(mods, max_order=max_order)


# -- cached per-group tables (groups are immutable) -------------------------

@lru_cache(maxsize=None)
def _coords_array(group: FiniteAbelianGroup) -> np.ndarray:
    """(order, rank) int64 array of coordinates in index order."""
    grids = np.indices(group.moduli).reshape(group.rank, group.order)
    arr = grids.T.astype(np.int64)
    arr.flags.writeable = False
    return arr

@lru_cache(maxsize=None)
def _neg_table(group: FiniteAbelianGroup) -> np.ndarray:
    coords = _coords_array(group)
    neg = (-coords) % np.array(group.moduli, dtype=np.int64)
    table = _indices_of(group, neg)
    table.flags.writeable = False
    return table


@lru_cache(maxsize=None)
def _phase_weights(group: FiniteAbelianGroup) -> np.ndarray:
    """Per-coordinate weights L/nj used by the exact pairing phase."""
    lcm = group.lcm
    return np.array([lcm // n for n in group.moduli], dtype=np.int64)


def _indices_of(group: FiniteAbelianGroup, coords: np.ndarray) -> np.ndarray:
    """Vectorized coordinate-to-index conversion (coords already reduced)."""
    idx = np.zeros(coords.shape[:-1], dtype=np.int64)
    for j, n in enumerate(group.moduli):
        idx = idx * n + coords[..., j]
    return idx


@lru_cache(maxsize=None)
def _add_table(group: FiniteAbelianGroup) -> np.ndarray:
    """Full addition table; only built for enumeration-sized groups."""
    coords = _coords_array(group)
    mods = np.array(group.moduli, dtype=np.int64)
    summed = (coords[:, None, :] + coords[None, :, :]) % mods
    table = _indices_of(group, summed)
    table.flags.writeable = False
    return table


# -- pairing ----------------------------------------------------------------

def pairing_phase(group: FiniteAbelianGroup, r, x) -> int:
    """Exact integer phase s(r, x) mod L; the pairing is exp(2*pi*i*s/L)."""
    rc = group.coords(group.as_index(r))
    xc = group.coords(group.as_index(x))
    lcm = group.lcm
    return sum(ri * xi * (lcm // n)
               for ri, xi, n in zip(rc, xc, group.moduli)) % lcm


def pair(group: FiniteAbelianGroup, r, x) -> complex:
    """Evaluate the character r at the element x (unit modulus)."""
    s = pairing_phase(group, r, x)
    return complex(np.exp(2j * np.pi * s / group.lcm))


def pair_is_trivial(group: FiniteAbelianGroup, r, x) -> bool:
    """Decide <r, x> == 1 by exact integer arithmetic."""
    return pairing_phase(group, r, x) == 0


@lru_cache(maxsize=None)
def character_table(group: FiniteAbelianGroup) -> np.ndarray:
    """Dense (order, order) table chi[r, x] = <r, x>.

    Materialized lazily; intended for LP-sized groups only.
    """
    coords = _coords_array(group)
    weights = _phase_weights(group)
    phases = (coords * weights) @ coords.T % group.lcm
    table = np.exp(2j * np.pi * phases / group.lcm)
    table.flags.writeable = False
    return table


# -- subgroups ---------------------------------------------------------------

@dataclass(frozen=True)
class Subgroup:
    """Exact subgroup: sorted element-index tuple plus generator list."""

    group: FiniteAbelianGroup
    key: tuple[int, ...]            # sorted element indices, canonical
    generators: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.key)

    @property
    def elements(self) -> frozenset:
        return _element_set(self.group, self.key)

    def contains(self, index: int) -> bool:
        return index in self.elements

    def mask(self) -> np.ndarray:
        m = np.zeros(self.group.order, dtype=bool)
        m[list(self.key)] = True
        return m

    def is_subset_of(self, other: "Subgroup") -> bool:
        if self.group != other.group:
            raise ParentMismatch("subgroups live on different groups")
        return self.elements <= other.elements

    def to_json(self) -> list[int]:
        return list(self.key)


@lru_cache(maxsize=None)
def _element_set(group: FiniteAbelianGroup, key: tuple[int, ...]) -> frozenset:
    return frozenset(key)


def _closure(group: FiniteAbelianGroup, seed: Iterable[int]) -> tuple[int, ...]:
    """Smallest subgroup containing the seed indices (always contains 0)."""
    coords = _coords_array(group)
    mods = np.array(group.moduli, dtype=np.int64)
    current = np.unique(np.array([0, *seed], dtype=np.int64))
    while True:
        summed = (coords[current][:, None, :] + coords[current][None, :, :]) % mods
        nxt = np.unique(_indices_of(group, summed.reshape(-1, group.rank)))
        if nxt.size == current.size:
            return tuple(int(i) for i in nxt)
        current = nxt


def subgroup_span(group: FiniteAbelianGroup, gens: Iterable) -> Subgroup:
    """Smallest subgroup containing the generators."""
    idxs = tuple(sorted({group.as_index(g) for g in gens}))
    key = _closure(group, idxs)
    return Subgroup(group, key, idxs)


def trivial_subgroup(group: FiniteAbelianGroup) -> Subgroup:
    return Subgroup(group, (0,), ())


def full_subgroup(group: FiniteAbelianGroup) -> Subgroup:
    key = tuple(range(group.order))
    return Subgroup(group, key, key)


def _generating_set(group: FiniteAbelianGroup, key: tuple[int, ...]
                    ) -> tuple[int, ...]:
    """Greedy small generating set for the subgroup given by ``key``."""
    target = set(key)
    have = {0}
    gens: list[int] = []
    for idx in key:
        if idx in have:
            continue
        gens.append(idx)
        have = set(_closure(group, tuple(gens)))
        if have == target:
            break
    return tuple(gens)


def subgroup_from_indices(group: FiniteAbelianGroup, indices: Iterable[int]
                          ) -> Subgroup:
    """Wrap an index set already known to be a subgroup (verified)."""
    key = tuple(sorted(int(i) for i in set(indices)))
    closed = _closure(group, key)
    if closed != key:
        raise DimensionMismatch("index set is not closed under addition")
    return Subgroup(group, key, key)


@lru_cache(maxsize=None)
def _annihilator_key(group: FiniteAbelianGroup, key: tuple[int, ...]
                     ) -> tuple[int, ...]:
    coords = _coords_array(group)
    weights = _phase_weights(group)
    gen_coords = coords[list(key)]             # (g, rank)
    phases = (coords * weights) @ gen_coords.T % group.lcm   # (order, g)
    mask = np.all(phases == 0, axis=1)
    return tuple(int(i) for i in np.nonzero(mask)[0])


def annihilator(group: FiniteAbelianGroup, k: Subgroup) -> Subgroup:
    """All characters trivial on ``k``; exact by integer phases."""
    if k.group != group:
        raise ParentMismatch("subgroup belongs to a different group")
    gens = k.generators if k.generators else k.key
    key = _annihilator_key(group, tuple(gens))
    return Subgroup(group, key, key)


def subgroup_intersect(k1: Subgroup, k2: Subgroup) -> Subgroup:
    if k1.group != k2.group:
        raise ParentMismatch("subgroups live on different groups")
    key = tuple(sorted(k1.elements & k2.elements))
    return Subgroup(k1.group, key, key)


@lru_cache(maxsize=None)
def _enumerate_keys(group: FiniteAbelianGroup) -> tuple[tuple[int, ...], ...]:
    """All subgroup keys, by closure BFS over one-generator extensions.

    Extending a closed K by x gives K + <x>, so each extension is a single
    vectorized sumset rather than a fixpoint iteration.
    """
    add = _add_table(group)
    neg = _neg_table(group)
    order = group.order

    # cyclic subgroup generated by each element, as index arrays
    cyclic: list[np.ndarray] = []
    for x in range(order):
        chain = [0]
        cur = x
        while cur != 0:
            chain.append(cur)
            cur = int(add[cur, x])
        cyclic.append(np.unique(np.array(chain, dtype=np.int64)))

    trivial = (0,)
    found: dict[tuple[int, ...], None] = {trivial: None}
    frontier = [np.array([0], dtype=np.int64)]
    while frontier:
        new_frontier = []
        for base in frontier:
            in_base = np.zeros(order, dtype=bool)
            in_base[base] = True
            for x in range(1, order):
                if in_base[x]:
                    continue
                ext = np.unique(add[np.ix_(base, cyclic[x])].ravel())
                key = tuple(int(i) for i in ext)
                if key not in found:
                    found[key] = None
                    new_frontier.append(ext)
        frontier = new_frontier
    del neg
    return tuple(found.keys())


def enumerate_subgroups(group: FiniteAbelianGroup,
                        cap: int = DEFAULT_ENUMERATION_CAP) -> list[Subgroup]:
    """All subgroups, sorted by descending order then canonical key."""
    if group.order > cap:
        raise OverEnumerationCap(
            f"order {group.order} exceeds enumeration cap {cap}")
    keys = sorted(_enumerate_keys(group), key=lambda k: (-len(k), k))
    return [Subgroup(group, key, key) for key in keys]


# -- cosets and the quotient-dual identification -----------------------------

@lru_cache(maxsize=None)
def _coset_data(group: FiniteAbelianGroup, key: tuple[int, ...]
                ) -> tuple[np.ndarray, np.ndarray]:
    """(reps, coset_id): minimal-index representatives, and for every
    element the position of its coset in the reps list."""
    coords = _coords_array(group)
    mods = np.array(group.moduli, dtype=np.int64)
    k_coords = coords[list(key)]
    coset_id = np.full(group.order, -1, dtype=np.int64)
    reps = []
    for x in range(group.order):
        if coset_id[x] >= 0:
            continue
        members = _indices_of(group, (coords[x] + k_coords) % mods)
        coset_id[members] = len(reps)
        reps.append(x)
    reps_arr = np.array(reps, dtype=np.int64)
    reps_arr.flags.writeable = False
    coset_id.flags.writeable = False
    return reps_arr, coset_id


def coset_representatives(group: FiniteAbelianGroup, k: Subgroup
                          ) -> np.ndarray:
    return _coset_data(group, k.key)[0]


def coset_ids(group: FiniteAbelianGroup, k: Subgroup) -> np.ndarray:
    return _coset_data(group, k.key)[1]


@dataclass(frozen=True)
class QuotientDualIso:
    """The identification of G/K with the characters of the annihilator.

    Coset x+K acts on the annihilator points by gamma -> gamma(x).  The
    object doubles as a harmonic space for the L1 interpolation search:
    ``points`` are the annihilator characters, ``freqs`` the cosets.
    """

    group: FiniteAbelianGroup
    subgroup: Subgroup
    annihilator: Subgroup
    coset_reps: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.coset_reps)

    @property
    def point_indices(self) -> tuple[int, ...]:
        return self.annihilator.key

    def char_matrix(self) -> np.ndarray:
        """(freq, point) table: coset j evaluated at annihilator char i."""
        return _iso_char_matrix(self.group, self.subgroup.key)

    def char_of_coset(self, position: int) -> np.ndarray:
        return self.char_matrix()[position]

    def coset_position(self, x) -> int:
        return int(coset_ids(self.group, self.subgroup)[self.group.as_index(x)])

    def neg_freq(self, position: int) -> int:
        rep = self.coset_reps[position]
        return self.coset_position(self.group.neg(rep))

    def freq_label(self, position: int) -> str:
        return f"coset:{self.coset_reps[position]}"


@lru_cache(maxsize=None)
def _iso_char_matrix(group: FiniteAbelianGroup, key: tuple[int, ...]
                     ) -> np.ndarray:
    k = Subgroup(group, key, key)
    ann = annihilator(group, k)
    reps, _ = _coset_data(group, key)
    coords = _coords_array(group)
    weights = _phase_weights(group)
    rep_coords = coords[reps]                      # (freq, rank)
    ann_coords = coords[list(ann.key)]             # (point, rank)
    phases = (ann_coords * weights) @ rep_coords.T % group.lcm  # (point, freq)
    table = np.exp(2j * np.pi * phases.T / group.lcm)           # (freq, point)
    table.flags.writeable = False
    return table


def quotient_dual_iso(group: FiniteAbelianGroup, k: Subgroup
                      ) -> QuotientDualIso:
    """Build the coset-to-annihilator-character identification.

    Well-definedness is runtime-checked on two representatives of one
    coset (exact integer phases).
    """
    if k.group != group:
        raise ParentMismatch("subgroup belongs to a different group")
    ann = annihilator(group, k)
    reps, _ = _coset_data(group, k.key)
    iso = QuotientDualIso(group, k, ann, tuple(int(r) for r in reps))
    if k.order > 1:
        rep = int(reps[0])
        alt = group.add(rep, k.key[1])
        for gamma in ann.key:
            s1 = pairing_phase(group, gamma, rep)
            s2 = pairing_phase(group, gamma, alt)
            if s1 != s2:
                raise DimensionMismatch(
                    "coset character map is not well defined")
    return iso
