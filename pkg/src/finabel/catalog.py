"""Instance catalogs and seeded generators shared by the CLI self-test
and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .config import Config, DEFAULT_CONFIG
from .fourier import DUAL, GroupFunction, idft, subgroup_haar
from .group_core import (
    FiniteAbelianGroup,
    enumerate_subgroups,
    make_group,
)


# 12 groups of order <= 256 for transform-level criteria
GROUPS_256 = (
    (2,), (3,), (4,), (2, 2), (6,), (8,), (2, 4), (9,), (16,), (5, 5),
    (2, 2, 2, 2), (256,),
)

# moderate-lattice groups of order <= 64 for chain/pipeline criteria
GROUPS_64 = (
    (2,), (3,), (4,), (2, 2), (6,), (8,), (2, 4), (2, 2, 2), (9,), (3, 3),
    (12,), (16,), (24,), (36,), (2, 16), (64,),
)

# groups used by the certificate catalog; orders mostly small with a
# few moderate-lattice entries up to 64
TWS_GROUPS = (
    (2,), (3,), (4,), (2, 2), (5,), (6,), (8,), (2, 4), (2, 2, 2), (9,),
    (3, 3), (12,), (16,), (4, 4), (2, 8), (18,), (24,), (27,), (32,),
    (36,), (48,), (2, 16), (4, 8), (64,),
)


def _partitions(n: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for first in range(n, 0, -1):
        for rest in _partitions(n - first):
            if not rest or rest[0] <= first:
                yield (first,) + rest


@lru_cache(maxsize=None)
def _prime_factors(n: int) -> tuple[tuple[int, int], ...]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def all_abelian_groups_upto(cap: int) -> list[FiniteAbelianGroup]:
    """Every isomorphism type of order <= cap, one representative each,
    as a product of prime-power cyclic factors."""
    groups = []
    for n in range(1, cap + 1):
        per_prime = []
        for p, e in _prime_factors(n):
            per_prime.append([tuple(p ** part for part in parts)
                              for parts in _partitions(e)])
        combos = [()]
        for options in per_prime:
            combos = [c + o for c in combos for o in options]
        for moduli in combos:
            groups.append(make_group(sorted(moduli, reverse=True) or [1]))
    return groups


def catalog_groups_256() -> list[FiniteAbelianGroup]:
    return [make_group(m) for m in GROUPS_256]


def catalog_groups_64() -> list[FiniteAbelianGroup]:
    return [make_group(m) for m in GROUPS_64]


# -- seeded random functions ----------------------------------------------------


def random_function(group: FiniteAbelianGroup, rng: np.random.Generator,
                    scale: float = 1.0, side: str = "primal"
                    ) -> GroupFunction:
    values = rng.normal(0, scale, group.order) \
        + 1j * rng.normal(0, scale, group.order)
    return GroupFunction(group, values, side)


def random_near_integer(group: FiniteAbelianGroup,
                        rng: np.random.Generator,
                        amp: float = 0.02,
                        max_int: int = 2) -> GroupFunction:
    """Real function within ``amp`` of a random small-integer function."""
    base = rng.integers(-max_int, max_int + 1, group.order).astype(float)
    noise = rng.uniform(-amp, amp, group.order)
    return GroupFunction(group, (base + noise).astype(np.complex128))


def random_measure_with_near_integer_transform(
        group: FiniteAbelianGroup, rng: np.random.Generator,
        amp: float = 0.01, structured: bool = True,
        config: Config = DEFAULT_CONFIG) -> GroupFunction:
    """Measure density whose transform is real and close to integers.

    When ``structured`` and the group is small enough, the integer part
    is a subgroup-annihilator indicator so that certificates exercise
    nontrivial chains; otherwise the integer part is zero (base case).
    """
    hat = rng.uniform(-amp, amp, group.order)
    if structured and group.order <= config.enumeration_cap:
        subs = enumerate_subgroups(group, config.enumeration_cap)
        sub = subs[int(rng.integers(0, len(subs)))]
        haar = subgroup_haar(group, sub)
        base = np.fft.fftn(haar.values.reshape(group.moduli)).ravel().real \
            / group.order
        hat = base + hat
    sym = 0.5 * (hat + hat[[_neg(group, i) for i in range(group.order)]])
    return idft(GroupFunction(group, sym.astype(np.complex128), DUAL))


def _neg(group: FiniteAbelianGroup, idx: int) -> int:
    return group.neg(idx)


# -- certificate instance catalog -------------------------------------------------


@dataclass(frozen=True)
class CertificateInstance:
    name: str
    group: FiniteAbelianGroup
    values: np.ndarray          # real values on the group
    eps: float
    perturbed: bool
    seed: int

    def function(self) -> GroupFunction:
        return GroupFunction(self.group, self.values.astype(np.complex128))


def _integer_bases(group: FiniteAbelianGroup, config: Config
                   ) -> list[tuple[str, np.ndarray]]:
    order = group.order
    subs = enumerate_subgroups(group, config.enumeration_cap)
    bases: list[tuple[str, np.ndarray]] = []

    bases.append(("constant", np.ones(order)))

    proper = [s for s in subs if 1 < s.order < order]
    if proper:
        k = proper[0]
        bases.append((f"haar_{k.order}",
                      subgroup_haar(group, k).values.real.copy()))
        ind = np.zeros(order)
        ind[list(k.key)] = 1.0
        bases.append((f"indicator_{k.order}", ind))
    if len(proper) > 1:
        k1, k2 = proper[0], proper[-1]
        two = np.zeros(order)
        two[list(k1.key)] += 1.0
        two[list(k2.key)] += 1.0
        bases.append((f"two_subgroups_{k1.order}_{k2.order}", two))

    spike = np.ones(order)
    spike[0] += 1.0
    bases.append(("one_plus_spike", spike))
    return bases


def tws_catalog(config: Config = DEFAULT_CONFIG,
                eps_values: tuple[float, ...] = (0.25, 0.5, 1.0),
                amp: float = 0.02) -> list[CertificateInstance]:
    """Shipped certificate instances: integer bases plus perturbations
    of size at most ``amp``, with the epsilon grid cycled across them."""
    instances: list[CertificateInstance] = []
    counter = 0
    for moduli in TWS_GROUPS:
        group = make_group(moduli)
        for name, base in _integer_bases(group, config):
            for perturbed in (False, True):
                eps = eps_values[counter % len(eps_values)]
                seed = 10_000 + counter
                values = base.copy()
                if perturbed:
                    rng = np.random.default_rng(seed)
                    values = values + rng.uniform(-amp, amp, group.order)
                instances.append(CertificateInstance(
                    name=f"{group.spec()}:{name}"
                         f"{':perturbed' if perturbed else ''}",
                    group=group,
                    values=values,
                    eps=eps,
                    perturbed=perturbed,
                    seed=seed,
                ))
                counter += 1
    return instances


def corkey_catalog(config: Config = DEFAULT_CONFIG
                   ) -> list[tuple[str, GroupFunction]]:
    """Decomposable chain instances on groups of order <= 64."""
    out: list[tuple[str, GroupFunction]] = []
    for idx, moduli in enumerate(GROUPS_64):
        group = make_group(moduli)
        for name, base in _integer_bases(group, config):
            fn = GroupFunction(group, base.astype(np.complex128))
            out.append((f"{group.spec()}:{name}", fn))
        rng = np.random.default_rng(777 + idx)
        perturbed = _integer_bases(group, config)[0][1] \
            + rng.uniform(-0.05, 0.05, group.order)
        out.append((f"{group.spec()}:constant:perturbed",
                    GroupFunction(group, perturbed.astype(np.complex128))))
    return out
