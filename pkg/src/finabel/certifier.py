"""Certificates for the rounding-norm inequality, the measure-side
bridge, and the Riemann-sum discretization of the algebra norm.

``certify_tws`` certifies ||f_Z||_A <= (1 + eps1) ||f||_A + eps2 for a
near-integer real function by recursing on mass windows: each step
splits off a band projection f * m_H along a selected subgroup chain,
certifies the projected part against a dual witness built from an L1
interpolation search on the quotient data, and recurses on the residual
with half the additive budget.  Every inequality the argument uses is
instantiated with measured operands and checked; the certificate is the
tree of those checks.

The eta schedule the selection runs on is a stand-in for an otherwise
nonconstructive recipe: eta_{i+1} is capped by (eps2/4) divided by
(1 + eps1) times the annihilator size at eta_i, which makes the final
leak budget close automatically; if a step check still fails, the step
is retried once with all etas halved and the retry recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bpb_lp import bpb_search
from .config import Config, DEFAULT_CONFIG
from .errors import (
    DepthExceeded,
    FinabelError,
    NBelowSeparation,
    PreconditionRounding,
)
from .fourier import (
    DUAL,
    PRIMAL,
    GroupFunction,
    _raw_forward,
    a_norm,
    dft,
    idft,
    l1_norm,
    sup_norm,
)
from .group_core import (
    FiniteAbelianGroup,
    annihilator,
    coset_ids,
    make_group,
    pair,
    quotient_dual_iso,
)
from .idempotent import CorkeyChain, CorkeyCore
from .rounding import dist_to_int, real_reduce, round_int

ETA0_DEFAULT = 0.125
SCHEDULE_POLICY = (
    "measured-caps-adaptive: eta_{i+1} = min(eta_i, eps2/4 / ((1+eps1) * "
    "|K(eta_i)^perp|)), one halved retry on failure"
)


@dataclass(frozen=True)
class ClaimRecord:
    name: str
    lhs: float
    rhs: float
    passed: bool
    note: str = ""
    gates_verdict: bool = True     # audit-only records never gate

    def to_json_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "passed": self.passed, "note": self.note,
                "gates_verdict": self.gates_verdict}


@dataclass(frozen=True)
class EtaSchedule:
    mass_index: int               # window index floor(2M)
    l: int                        # ceil(3M)
    etas: tuple[float, ...]       # eta_0 >= ... >= eta_l
    f_caps: tuple[float, ...]     # caps that produced each eta_{i+1}

    def validate(self) -> None:
        assert 0.0 < self.etas[0] <= 0.25
        for a, b in zip(self.etas, self.etas[1:]):
            assert b <= a + 1e-15
        for i, cap in enumerate(self.f_caps):
            assert self.etas[i + 1] <= 0.25 and cap > 0

    def to_json_dict(self) -> dict:
        return {"mass_index": self.mass_index, "l": self.l,
                "etas": list(self.etas), "f_caps": list(self.f_caps)}


@dataclass
class TwsStep:
    depth: int
    kind: str                  # "base" or "step"
    a_norm_f: float
    sup_norm_f: float
    distance: float
    eps1: float
    eps2: float
    verdict: bool
    claims: dict[str, ClaimRecord] = field(default_factory=dict)
    schedule: Optional[EtaSchedule] = None
    i0: Optional[int] = None
    gap: Optional[float] = None
    k_key: Optional[tuple[int, ...]] = None
    h_key: Optional[tuple[int, ...]] = None
    coset_count: Optional[int] = None
    phi_l1: Optional[float] = None
    g_support: Optional[int] = None
    retried: bool = False
    failure: str = ""
    chains: list[CorkeyChain] = field(default_factory=list)
    child: Optional["TwsStep"] = None

    def to_json_dict(self) -> dict:
        out = {
            "depth": self.depth,
            "kind": self.kind,
            "a_norm_f": self.a_norm_f,
            "sup_norm_f": self.sup_norm_f,
            "distance": self.distance,
            "eps1": self.eps1,
            "eps2": self.eps2,
            "verdict": self.verdict,
            "retried": self.retried,
            "failure": self.failure,
            "claims": {k: v.to_json_dict() for k, v in self.claims.items()},
        }
        if self.schedule is not None:
            out["schedule"] = self.schedule.to_json_dict()
        for name in ("i0", "gap", "coset_count", "phi_l1", "g_support"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.k_key is not None:
            out["k_group"] = list(self.k_key)
        if self.h_key is not None:
            out["h_group"] = list(self.h_key)
        if self.chains:
            out["chains"] = [c.to_json_dict() for c in self.chains]
        if self.child is not None:
            out["child"] = self.child.to_json_dict()
        return out


@dataclass(frozen=True)
class TwsCertificate:
    group: FiniteAbelianGroup
    eps1: float
    eps2: float
    threshold: float
    f_a_norm: float
    rounded_a_norm: float          # independent direct computation
    bound: float                   # (1+eps1)*||f||_A + eps2
    verdict: bool
    root: TwsStep
    policy: str = SCHEDULE_POLICY

    def to_json_dict(self) -> dict:
        return {
            "group": self.group.spec(),
            "eps1": self.eps1,
            "eps2": self.eps2,
            "threshold": self.threshold,
            "f_a_norm": self.f_a_norm,
            "rounded_a_norm": self.rounded_a_norm,
            "bound": self.bound,
            "verdict": self.verdict,
            "policy": self.policy,
            "root": self.root.to_json_dict(),
        }


def _ann_mask(group: FiniteAbelianGroup, sub) -> np.ndarray:
    ann = annihilator(group, sub)
    mask = np.zeros(group.order, dtype=bool)
    mask[list(ann.key)] = True
    return mask


def _claim(claims: dict, name: str, lhs: float, rhs: float, tol: float,
           note: str = "") -> None:
    claims[name] = ClaimRecord(name, float(lhs), float(rhs),
                               bool(lhs <= rhs + tol), note)


def _attempt_step(f: GroupFunction, eps1: float, eps2: float, depth: int,
                  eta0: float, config: Config) -> TwsStep:
    group = f.group
    an = a_norm(f)
    linf = sup_norm(f)
    d = dist_to_int(f)
    step = TwsStep(depth=depth, kind="step", a_norm_f=an, sup_norm_f=linf,
                   distance=d, eps1=eps1, eps2=eps2, verdict=False)
    claims = step.claims

    core = CorkeyCore(f, config=config)
    m_bound = an
    l = max(2, math.ceil(3 * m_bound))

    etas = [eta0]
    f_caps: list[float] = []
    for i in range(l):
        k_i = core.subgroup_of_eta(etas[i])
        cap = (1.0 + eps1) * (group.order / k_i.order)
        f_caps.append(cap)
        etas.append(min(etas[i], (eps2 / 4.0) / cap))
    schedule = EtaSchedule(mass_index=math.floor(2 * m_bound), l=l,
                           etas=tuple(etas), f_caps=tuple(f_caps))
    schedule.validate()
    step.schedule = schedule

    chains = [core.build_chain(eta) for eta in etas]
    step.chains = chains
    chains_ok = all(c.all_passed for c in chains)
    claims["chain_checks"] = ClaimRecord(
        "all selection-chain checks pass", 0.0 if chains_ok else 1.0, 0.0,
        chains_ok)

    f_hat_abs = np.abs(_raw_forward(group, f.values))
    masks = [_ann_mask(group, c.k_group) for c in chains]
    gaps = np.array([
        float(f_hat_abs[masks[i + 1] & ~masks[i]].sum())
        for i in range(l)
    ])
    i0 = int(np.argmin(gaps))
    step.i0, step.gap = i0, float(gaps[i0])
    _claim(claims, "jt_pigeonhole_avg", gaps[i0], m_bound / l, 1e-9,
           note=f"M/l = {m_bound / l}")
    _claim(claims, "jt_below_third", gaps[i0], 1.0 / 3.0, 1e-12)

    chain_k, chain_h = chains[i0], chains[i0 + 1]
    k_sub, h_sub = chain_k.k_group, chain_h.k_group
    step.k_key, step.h_key = k_sub.key, h_sub.key
    f_h = chain_h.projected
    w_k, w_h = chain_k.projected_rounded, chain_h.projected_rounded
    rounding_equal = bool(np.array_equal(w_k, w_h))
    claims["projections_round_alike"] = ClaimRecord(
        "(f*m_K)_Z equals (f*m_H)_Z exactly",
        float(np.abs(w_k - w_h).max(initial=0)), 0.0, rounding_equal)

    d_h = dist_to_int(f_h)
    eta_next = etas[i0 + 1]
    claims["a_prime_drift"] = ClaimRecord(
        "d(f*m_H, Z) against twice the next eta",
        d_h, 2 * eta_next, d_h <= 2 * eta_next + 1e-12,
        note="bookkeeping form; the verdict uses the measured leak "
             "budget instead", gates_verdict=False)

    w_fn = GroupFunction(group, w_h.astype(np.complex128), f.side)
    w_a_norm = a_norm(w_fn)
    w_hat = _raw_forward(group, w_fn.values)

    # dual witness: unimodular phases on the annihilator band, modulated
    # by the interpolation polynomial pulled back through the cosets
    ids = coset_ids(group, k_sub)
    support_positions = sorted(int(p) for p in np.unique(ids[w_h != 0]))
    step.coset_count = len(support_positions)
    iso = quotient_dual_iso(group, k_sub)
    poly = bpb_search(iso, support_positions, eps1, config)
    step.g_support = len(poly.actual_support)

    phi0_hat = np.zeros(group.order, dtype=np.complex128)
    band = masks[i0] & (np.abs(w_hat) > 1e-12)
    phi0_hat[band] = w_hat[band] / np.abs(w_hat[band])
    phi0 = np.fft.ifftn(phi0_hat.reshape(group.moduli)).ravel() * group.order
    phi = phi0 * poly.transform[ids]
    phi_fn = GroupFunction(group, phi, f.side)
    phi_hat = _raw_forward(group, phi)
    phi_l1 = l1_norm(phi_fn)
    step.phi_l1 = phi_l1

    inner = float((w_h * np.conjugate(phi)).sum().real) / group.order
    claims["claim_a_pairing"] = ClaimRecord(
        "<(f*m_H)_Z, phi> attains the algebra norm",
        abs(inner - w_a_norm), 0.0,
        abs(inner - w_a_norm) <= config.tol_constraint)
    _claim(claims, "claim_b_transform_sup", float(np.abs(phi_hat).max()),
           1.0 + eps1, config.tol_constraint)
    off_band = float(np.abs(phi_hat[~masks[i0]]).max(initial=0.0))
    scale = max(1.0, float(np.abs(phi).max(initial=0.0)))
    claims["claim_c_band_support"] = ClaimRecord(
        "supp phi_hat inside the annihilator band", off_band, 0.0,
        off_band <= 1e-10 * scale)
    f_cap_used = (1.0 + eps1) * len(poly.actual_support)
    _claim(claims, "claim_d_witness_l1", phi_l1, f_cap_used,
           config.tol_constraint)

    f_h_a = a_norm(f_h)
    slack_measured = d_h * phi_l1
    eta_cap_slack = 2 * eta_next * f_cap_used
    claims["wazo_rounded_band_norm"] = ClaimRecord(
        "||(f*m_H)_Z||_A <= (1+eps1)||f*m_H||_A + d*||phi||_1",
        w_a_norm, (1 + eps1) * f_h_a + slack_measured,
        w_a_norm <= (1 + eps1) * f_h_a + slack_measured
        + config.tol_constraint,
        note=f"eta-cap form of the slack, 2*eta*F'' = {eta_cap_slack}")
    _claim(claims, "wazo_budget", slack_measured, eps2 / 2.0, 1e-12,
           note="leak budget that must close the additive error")

    residual = f - f_h
    res_a = a_norm(residual)
    split_gap = abs(an - f_h_a - res_a)
    claims["ju_exact_split"] = ClaimRecord(
        "||f||_A = ||f*m_H||_A + ||f - f*m_H||_A",
        split_gap, 0.0, split_gap <= config.tol_exact * max(1.0, an))
    _claim(claims, "zalind_mass_drop", res_a, an - 0.5, config.tol_sum)

    d_res = dist_to_int(residual)
    premises_ok = max(d, d_h, d_res) < 1.0 / 3.0
    f_rounded = round_int(f, config.round_margin).integer_values()
    res_rounded = round_int(residual, config.round_margin).integer_values()
    adds_ok = bool(np.array_equal(f_rounded, w_h + res_rounded))
    claims["rounding_additivity"] = ClaimRecord(
        "f_Z = (f*m_H)_Z + (f - f*m_H)_Z exactly",
        0.0 if (premises_ok and adds_ok) else 1.0, 0.0,
        premises_ok and adds_ok)

    step.verdict = all(c.passed for c in claims.values()
                       if c.gates_verdict)
    return step


def _finish_step(step: TwsStep, f: GroupFunction, child: TwsStep,
                 config: Config) -> TwsStep:
    step.child = child
    f_rounded = round_int(f, config.round_margin).rounded
    direct = a_norm(f_rounded)
    bound = (1 + step.eps1) * step.a_norm_f + step.eps2
    _claim(step.claims, "final_bound", direct, bound, config.tol_constraint)
    step.verdict = step.verdict and child.verdict \
        and step.claims["final_bound"].passed
    return step


def _certify(f: GroupFunction, eps1: float, eps2: float, depth: int,
             depth_cap: int, config: Config) -> TwsStep:
    an = a_norm(f)
    linf = sup_norm(f)
    d = dist_to_int(f)
    if linf < 0.5:
        step = TwsStep(depth=depth, kind="base", a_norm_f=an,
                       sup_norm_f=linf, distance=d, eps1=eps1, eps2=eps2,
                       verdict=True)
        _claim(step.claims, "base_zero_bound", 0.0,
               (1 + eps1) * an + eps2, 0.0,
               note="rounded function is identically zero")
        step.verdict = step.claims["base_zero_bound"].passed
        return step
    if depth > depth_cap:
        raise DepthExceeded(
            f"depth {depth} exceeded cap {depth_cap}; mass failed to drop")

    step: Optional[TwsStep] = None
    for retry, eta0 in enumerate((ETA0_DEFAULT, ETA0_DEFAULT / 2)):
        try:
            attempt = _attempt_step(f, eps1, eps2, depth, eta0, config)
        except FinabelError as exc:
            attempt = TwsStep(depth=depth, kind="step", a_norm_f=an,
                              sup_norm_f=linf, distance=d, eps1=eps1,
                              eps2=eps2, verdict=False,
                              failure=f"{type(exc).__name__}: {exc}")
        attempt.retried = retry > 0
        step = attempt
        if attempt.verdict:
            break

    if not step.verdict:
        return step
    chain_h = step.chains[step.i0 + 1]
    residual = f - chain_h.projected
    child = _certify(residual, eps1, eps2 / 2.0, depth + 1, depth_cap,
                     config)
    return _finish_step(step, f, child, config)


def certify_tws(f: GroupFunction, eps1: float, eps2: float,
                config: Config = DEFAULT_CONFIG,
                threshold: float | None = None) -> TwsCertificate:
    """Certify ||f_Z||_A <= (1+eps1)||f||_A + eps2 for near-integer f."""
    if not (0.0 < eps1 <= 1.0 and 0.0 < eps2 <= 1.0):
        raise PreconditionRounding("eps1 and eps2 must lie in (0, 1]")
    thr = config.rounding_threshold if threshold is None else float(threshold)
    d = dist_to_int(f)
    linf = sup_norm(f)
    if d > thr * (1 + 1e-9) + 1e-12 and linf >= 0.5:
        raise PreconditionRounding(
            f"d(f, Z) = {d} exceeds admission threshold {thr}")
    an = a_norm(f)
    depth_cap = 2 * math.ceil(an) + 2
    root = _certify(f, eps1, eps2, 0, depth_cap, config)
    if linf < 0.5:
        direct = 0.0        # every value rounds to zero
    else:
        direct = a_norm(round_int(f, config.round_margin).rounded)
    bound = (1 + eps1) * an + eps2
    verdict = root.verdict and direct <= bound + config.tol_constraint
    return TwsCertificate(
        group=f.group, eps1=eps1, eps2=eps2, threshold=thr,
        f_a_norm=an, rounded_a_norm=direct, bound=bound,
        verdict=verdict, root=root)


# -- measure-side wrapper --------------------------------------------------------


@dataclass(frozen=True)
class SknResult:
    mu_z: GroupFunction
    certificate: TwsCertificate
    mu_norm: float
    mu_z_norm: float
    bound: float
    verdict: bool
    bridge_gap: float              # | ||mu|| - ||mu_hat||_A |
    support: tuple[int, ...]       # supp (mu_hat)_Z
    imag_sup: float

    def to_json_dict(self) -> dict:
        return {
            "mu_norm": self.mu_norm,
            "mu_z_norm": self.mu_z_norm,
            "bound": self.bound,
            "verdict": self.verdict,
            "bridge_gap": self.bridge_gap,
            "support": list(self.support),
            "imag_sup": self.imag_sup,
            "certificate": self.certificate.to_json_dict(),
            "mu_z": self.mu_z.to_json_dict(),
        }


def skn_finite(mu: GroupFunction, eps1: float, eps2: float,
               config: Config = DEFAULT_CONFIG,
               threshold: float | None = None) -> SknResult:
    """Round the transform of a measure density and certify the norm bound.

    On a finite group the measure norm equals the algebra norm of the
    transform exactly, so the function-side certificate is literally the
    measure-side bound.
    """
    thr = config.rounding_threshold if threshold is None else float(threshold)
    mu_hat = dft(mu)
    reduction = real_reduce(mu_hat)
    d_real = dist_to_int(reduction.real.with_side(PRIMAL))
    if max(d_real, reduction.imag_sup) > thr:
        raise PreconditionRounding(
            f"transform distance {max(d_real, reduction.imag_sup)} exceeds "
            f"admission threshold {thr}")

    as_function = reduction.real.with_side(PRIMAL)
    certificate = certify_tws(as_function, eps1, eps2, config, threshold=thr)

    rounded = round_int(as_function, config.round_margin)
    mu_z_hat = rounded.rounded.with_side(DUAL)
    mu_z = idft(mu_z_hat)
    mu_norm = l1_norm(mu)
    mu_z_norm = l1_norm(mu_z)
    bound = (1 + eps1) * mu_norm + eps2
    bridge_gap = abs(mu_norm - a_norm(as_function))
    return SknResult(
        mu_z=mu_z,
        certificate=certificate,
        mu_norm=mu_norm,
        mu_z_norm=mu_z_norm,
        bound=bound,
        verdict=certificate.verdict and mu_z_norm <= bound
        + config.tol_constraint,
        bridge_gap=bridge_gap,
        support=rounded.support,
        imag_sup=reduction.imag_sup,
    )


# -- Riemann discretization of the algebra norm -----------------------------------


@dataclass(frozen=True)
class RiemannFrequency:
    chi: tuple[int, ...]       # character coordinates on the finite part
    r: tuple[int, ...]         # integer frequencies on the free part
    coeff: complex

    def to_json_dict(self) -> dict:
        return {"chi": list(self.chi), "r": list(self.r),
                "coeff": [self.coeff.real, self.coeff.imag]}


@dataclass(frozen=True)
class RiemannTable:
    h_moduli: tuple[int, ...]
    zrank: int
    n0: int
    entries: tuple[tuple[int, float], ...]
    reference: float           # value at the largest resolution
    gaps: tuple[tuple[int, float], ...]

    def to_json_dict(self) -> dict:
        return {
            "h_moduli": list(self.h_moduli),
            "zrank": self.zrank,
            "n0": self.n0,
            "entries": [[n, v] for n, v in self.entries],
            "reference": self.reference,
            "gaps": [[n, g] for n, g in self.gaps],
        }


def _separation_point(freqs: Sequence[RiemannFrequency], zrank: int) -> int:
    pairs = []
    for i in range(len(freqs)):
        for j in range(i + 1, len(freqs)):
            if freqs[i].chi != freqs[j].chi:
                continue
            diff = [abs(a - b) for a, b in zip(freqs[i].r, freqs[j].r)]
            if all(d == 0 for d in diff):
                raise NBelowSeparation(
                    f"duplicate frequency tuples at positions {i} and {j}")
            pairs.append(diff)
    if not pairs or zrank == 0:
        return 1
    n = 1
    while True:
        if all(any(d % n != 0 for d in diff) for diff in pairs):
            return n
        n += 1


def riemann_a_norm(h_moduli: Sequence[int], zrank: int,
                   freqs: Sequence[RiemannFrequency],
                   n_ladder: Sequence[int],
                   config: Config = DEFAULT_CONFIG) -> RiemannTable:
    """Algebra norm of the frequency mixture on the discretized group,
    for each resolution in the ladder.

    The value at resolution N is the exact double sum over the finite
    part and the N^zrank grid; the inner sum is the zrank-dimensional
    Riemann sum whose limit is the continuous norm.
    """
    group = make_group(h_moduli, max_order=config.max_order)
    freqs = list(freqs)
    for fr in freqs:
        if len(fr.chi) != group.rank:
            raise NBelowSeparation(
                f"character coordinates {fr.chi} do not fit {group.spec()}")
        if len(fr.r) != zrank:
            raise NBelowSeparation(
                f"frequency tuple {fr.r} does not have rank {zrank}")
    n0 = _separation_point(freqs, zrank)
    ladder = sorted(set(int(n) for n in n_ladder))
    if not ladder:
        raise NBelowSeparation("empty resolution ladder")
    below = [n for n in ladder if n < n0]
    if below:
        raise NBelowSeparation(
            f"resolutions {below} lie below the separation point {n0}")

    char_cols = np.array([
        [pair(group, group.index(fr.chi), h) for fr in freqs]
        for h in range(group.order)
    ], dtype=np.complex128) if freqs else np.zeros((group.order, 0))
    coeffs = np.array([fr.coeff for fr in freqs], dtype=np.complex128)

    entries = []
    for n in ladder:
        weighted = char_cols * coeffs          # (|H|, nfreq)
        if zrank == 0:
            value = float(np.abs(weighted.sum(axis=1)).mean())
        else:
            grid = np.arange(n)
            inner = weighted                   # (|H|, x1, ..., xt, nfreq)
            for t in range(zrank):
                r_t = np.array([fr.r[t] for fr in freqs])
                phases = np.exp(2j * np.pi * np.outer(r_t, grid) / n)
                inner = np.einsum("...f,fx->...xf", inner, phases)
            value = float(np.abs(inner.sum(axis=-1)).mean())
        entries.append((n, value))

    reference = entries[-1][1]
    gaps = tuple((n, abs(v - reference)) for n, v in entries)
    return RiemannTable(
        h_moduli=tuple(group.moduli),
        zrank=zrank,
        n0=n0,
        entries=tuple(entries),
        reference=reference,
        gaps=gaps,
    )
