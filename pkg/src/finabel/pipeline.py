"""Measure-synthesis experiment drivers.

A run starts from a strictly decreasing sequence of positive levels and
a measure whose transform takes exactly those values (plus 0).  The
driver peels level sets off one scale at a time, tracks the residual
recursion, certifies each normalized residual, and assembles the
squared-level sum whose transform must equal the squared transform of
the input.  Every inequality in the chain is recorded as a verdict with
its operands; a failed verdict marks the report but never aborts a run.

Sequences are stored in log domain.  Literal decay modes construct the
next level exactly at the admissibility boundary and stop with an
``Unrepresentable`` error once the recursion leaves the range where
doubles can even carry the increments (|log a| >= 2^53).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bpb_lp import bpb_search
from .config import Config, DEFAULT_CONFIG
from .errors import (
    FinabelError,
    LevelMismatch,
    NotEnoughSpectrum,
    Unrepresentable,
)
from .fourier import (
    DUAL,
    GroupFunction,
    dft,
    idft,
    l1_norm,
    natural_spectrum_check,
    spectrum_sigma,
    sup_norm,
)
from .group_core import FiniteAbelianGroup, Subgroup, annihilator, \
    enumerate_subgroups
from .rounding import round_int
from .certifier import skn_finite

LOG_REP_CAP = 2.0 ** 53       # beyond this, log-domain increments are lost
EXP_OVERFLOW = 709.0

MODE_GLOW = "literal_glow"
MODE_NAJP = "literal_najp"
MODE_EMPIRICAL = "empirical"


def _glow_log_delta(log_a: float, delta_cfg: float) -> Optional[float]:
    """log of min{(1/9) exp(-18 x^-2), delta_cfg} at x = exp(log_a)."""
    if -2.0 * log_a > EXP_OVERFLOW:
        return None
    inv_sq = math.exp(-2.0 * log_a)
    return min(-math.log(9.0) - 18.0 * inv_sq, math.log(delta_cfg))


def _najp_log_decrement(log_a: float, c2: float) -> Optional[float]:
    """exp(C'' x^-6), the log-domain step of the fast literal decay."""
    if -6.0 * log_a > EXP_OVERFLOW:
        return None
    exponent = c2 * math.exp(-6.0 * log_a)
    if exponent > EXP_OVERFLOW:
        return None
    return math.exp(exponent)


@dataclass(frozen=True)
class DecaySequence:
    log_a: tuple[float, ...]
    mode: str
    checks: tuple[dict, ...]      # per-step admissibility records

    @property
    def length(self) -> int:
        return len(self.log_a)

    def values(self) -> np.ndarray:
        """Levels as doubles; deep literal levels may underflow to 0."""
        return np.exp(np.array(self.log_a, dtype=float))

    def to_json_dict(self) -> dict:
        return {"log_a": list(self.log_a), "mode": self.mode,
                "checks": list(self.checks)}


def make_sequence(a1: float, length: int, mode: str = MODE_EMPIRICAL,
                  params: Optional[dict] = None,
                  config: Config = DEFAULT_CONFIG) -> DecaySequence:
    """Build a decay sequence of the requested length.

    Literal modes construct each next level exactly at the admissibility
    boundary; empirical mode accepts any strictly decreasing positive
    values given in ``params["values"]`` (overriding ``a1``/``length``).
    """
    params = dict(params or {})
    if mode == MODE_EMPIRICAL:
        values = [float(v) for v in params.get("values", [])]
        if not values:
            raise LevelMismatch("empirical mode needs params['values']")
        if values[0] > 1.0 or any(v <= 0 for v in values):
            raise LevelMismatch("levels must be positive with a1 <= 1")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise LevelMismatch("levels must be strictly decreasing")
        checks = tuple({"step": i + 1, "applicable": False,
                        "glow_ok": None, "najp_ok": None}
                       for i in range(len(values) - 1))
        return DecaySequence(tuple(math.log(v) for v in values),
                             MODE_EMPIRICAL, checks)

    if not 0.0 < a1 <= 1.0:
        raise LevelMismatch(f"a1 = {a1} outside (0, 1]")
    if length < 1:
        raise LevelMismatch("length must be at least 1")

    logs = [math.log(a1)]
    checks: list[dict] = []
    while len(logs) < length:
        current = logs[-1]
        if mode == MODE_GLOW:
            delta_cfg = float(params.get("delta_cfg", 1.0))
            step = _glow_log_delta(current, delta_cfg)
        elif mode == MODE_NAJP:
            c2 = float(params.get("c_doubleprime",
                                  config.najp_Cdoubleprime))
            dec = _najp_log_decrement(current, c2)
            step = None if dec is None else -dec
        else:
            raise LevelMismatch(f"unknown sequence mode {mode!r}")
        if step is None or abs(current + step) >= LOG_REP_CAP:
            raise Unrepresentable(
                f"{mode} sequence leaves double range at level "
                f"{len(logs) + 1}; maximal representable length is "
                f"{len(logs)}", max_length=len(logs))
        logs.append(current + step)
        checks.append({"step": len(logs) - 1, "applicable": True,
                       "glow_ok": mode == MODE_GLOW or None,
                       "najp_ok": mode == MODE_NAJP or None})
    return DecaySequence(tuple(logs), mode, tuple(checks))


# -- synthesis -----------------------------------------------------------------


@dataclass(frozen=True)
class SynthesizedMeasure:
    mu: GroupFunction
    level_sets: tuple[tuple[int, ...], ...]   # character indices per level
    values: tuple[float, ...]
    preset: str
    chain_keys: tuple[tuple[int, ...], ...]   # nested preset only
    norm: float
    warnings: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "mu": self.mu.to_json_dict(),
            "level_sets": [list(s) for s in self.level_sets],
            "values": list(self.values),
            "preset": self.preset,
            "chain_keys": [list(k) for k in self.chain_keys],
            "norm": self.norm,
            "warnings": list(self.warnings),
        }


def default_nested_chain(group: FiniteAbelianGroup, length: int,
                         config: Config = DEFAULT_CONFIG) -> list[Subgroup]:
    """Deterministic strictly decreasing subgroup chain from the top."""
    subgroups = enumerate_subgroups(group, config.enumeration_cap)
    chain = [subgroups[0]]                     # the full group
    while len(chain) < length:
        below = [s for s in subgroups
                 if s.order < chain[-1].order
                 and s.elements < chain[-1].elements]
        if not below:
            raise NotEnoughSpectrum(
                f"no strict subgroup chain of length {length} in "
                f"{group.spec()}")
        chain.append(below[0])                 # largest, ties by key
    return chain


def synth_measure_detailed(group: FiniteAbelianGroup, seq: DecaySequence,
                           preset: str = "nested_annihilator",
                           seed: int = 0,
                           chain: Optional[Sequence[Subgroup]] = None,
                           config: Config = DEFAULT_CONFIG
                           ) -> SynthesizedMeasure:
    """Synthesize a measure whose transform range is exactly the level
    set (plus 0), by direct construction in the transform domain."""
    values = seq.values()
    n = len(values)
    mu_hat = np.zeros(group.order, dtype=np.complex128)
    level_sets: list[tuple[int, ...]] = []
    chain_keys: tuple[tuple[int, ...], ...] = ()
    warnings: list[str] = []

    if n == 0:
        pass
    elif preset == "nested_annihilator":
        chain = list(chain) if chain is not None else \
            default_nested_chain(group, n, config)
        if len(chain) < n:
            raise NotEnoughSpectrum(
                f"chain of length {len(chain)} cannot carry {n} levels")
        for a, b in zip(chain, chain[1:]):
            if not b.elements < a.elements:
                raise NotEnoughSpectrum(
                    "chain must be strictly decreasing")
        covered = np.zeros(group.order, dtype=bool)
        for k in range(n):
            ann = annihilator(group, chain[k])
            mask = np.zeros(group.order, dtype=bool)
            mask[list(ann.key)] = True
            fresh = mask & ~covered
            mu_hat[fresh] = values[k]
            level_sets.append(tuple(int(i) for i in np.nonzero(fresh)[0]))
            covered |= mask
        chain_keys = tuple(s.key for s in chain)
    elif preset == "random_disjoint":
        rng = np.random.default_rng(seed)
        if 2 * n > group.order:
            raise NotEnoughSpectrum(
                f"cannot carve {n} disjoint sets out of {group.order} "
                "characters")
        perm = rng.permutation(group.order)
        size = max(1, group.order // (2 * n))
        for k in range(n):
            block = perm[k * size:(k + 1) * size]
            if block.size == 0:
                raise NotEnoughSpectrum("ran out of characters")
            mu_hat[block] = values[k]
            level_sets.append(tuple(sorted(int(i) for i in block)))
    else:
        raise NotEnoughSpectrum(f"unknown preset {preset!r}")

    mu = idft(GroupFunction(group, mu_hat, DUAL))
    norm = l1_norm(mu)
    if norm > 1.0 + 1e-12:
        warnings.append(f"norm {norm} exceeds 1")
    return SynthesizedMeasure(
        mu=mu,
        level_sets=tuple(level_sets),
        values=tuple(float(v) for v in values),
        preset=preset,
        chain_keys=chain_keys,
        norm=norm,
        warnings=tuple(warnings),
    )


def synth_measure(group: FiniteAbelianGroup, seq: DecaySequence,
                  preset: str = "nested_annihilator", seed: int = 0,
                  chain: Optional[Sequence[Subgroup]] = None,
                  config: Config = DEFAULT_CONFIG) -> GroupFunction:
    return synth_measure_detailed(group, seq, preset, seed, chain,
                                  config).mu


# -- shared run machinery --------------------------------------------------------


def strong_continuity_check(group: FiniteAbelianGroup) -> tuple[bool, str]:
    """Vacuously true on finite groups: every subgroup has finite index,
    so there is no coset a continuous measure is required to miss."""
    return True, ("vacuous on finite groups: no closed subgroup of "
                  "infinite index exists")


def _match_levels(mu_hat: np.ndarray, values: np.ndarray,
                  tol: float = 1e-12) -> list[np.ndarray]:
    """Assign each character to a level by transform value, or fail."""
    n = len(values)
    assigned = np.full(mu_hat.shape, -1, dtype=np.int64)
    for k in range(n):
        hit = np.abs(mu_hat - values[k]) <= tol
        hit &= assigned < 0
        assigned[hit] = k
    zero = np.abs(mu_hat) <= tol
    unmatched = (assigned < 0) & ~zero
    if np.any(unmatched):
        bad = np.nonzero(unmatched)[0][:8]
        raise LevelMismatch(
            f"transform values at characters {bad.tolist()} match no level")
    return [np.nonzero(assigned == k)[0] for k in range(n)]


@dataclass
class PipelineReport:
    group: FiniteAbelianGroup
    mode: str
    sequence: DecaySequence
    level_sets: list[list[int]]
    steps: list[dict] = field(default_factory=list)
    rho_gaps: list[dict] = field(default_factory=list)
    final: dict = field(default_factory=dict)
    annotations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def all_bound_verdicts(self) -> bool:
        keys = ("tau_bound_ok", "mu_bound_ok", "nu_bound_ok",
                "mu_scaled_bound_ok", "chain_ok")
        for step in self.steps:
            for key in keys:
                if step.get(key) is False:
                    return False
        return all(g["within"] for g in self.rho_gaps) and \
            self.final.get("rho_equals_mu_sq", True)

    def to_json_dict(self) -> dict:
        return {
            "group": self.group.spec(),
            "mode": self.mode,
            "sequence": self.sequence.to_json_dict(),
            "level_sets": self.level_sets,
            "steps": self.steps,
            "rho_gaps": self.rho_gaps,
            "final": self.final,
            "annotations": self.annotations,
            "warnings": self.warnings,
        }

    def to_csv(self) -> str:
        lines = ["n,a_n,norm,bound,verdict"]
        for step in self.steps:
            lines.append("{n},{a_n!r},{norm!r},{bound!r},{verdict}".format(
                n=step["n"], a_n=step["a_n"],
                norm=step.get("tau_norm", step.get("nu_norm", 0.0)),
                bound=step.get("tau_bound", step.get("nu_bound", 0.0)),
                verdict=step.get("tau_bound_ok",
                                 step.get("nu_bound_ok", True))))
        return "\n".join(lines) + "\n"


def _q_report(mu_hat_abs: np.ndarray, values: np.ndarray, n: int,
              cum_size: int, config: Config) -> dict:
    """Sizes of the peeled spectrum against the exponential budgets.

    Two exponent forms are printed side by side (cubic, and square-log);
    neither is adjudicated, both are log-domain numbers.
    """
    a_n = float(values[n - 1])
    r = math.ceil(17.0 / a_n ** 2) if a_n > 0 else None
    if r is None:
        return {"q_size": cum_size, "r": None}
    c_prime = config.najp_Cprime
    return {
        "q_size": cum_size,
        "r": r,
        "log_bound_cubic": c_prime * float(r) ** 3,
        "log_bound_square_log": c_prime * float(r) ** 2 * math.log(r),
    }


def _run_common(group: FiniteAbelianGroup, mu: GroupFunction,
                seq: DecaySequence, config: Config):
    mu_hat = dft(mu)
    values = seq.values()
    level_idx = _match_levels(mu_hat.values, values)
    mus = [idft(GroupFunction.indicator(group, idx, DUAL))
           for idx in level_idx]
    taus = [mu]
    for k in range(len(values)):
        taus.append(taus[-1] - mus[k].scale(values[k]))
    return mu_hat, values, level_idx, mus, taus


def _rho_records(values: np.ndarray, mus, template, config: Config):
    """Partial squared-level sums and their pairwise gaps."""
    n = len(values)
    rhos = []
    acc = None
    for k in range(n):
        term = mus[k].scale(float(values[k]) ** 2)
        acc = term if acc is None else acc + term
        rhos.append(acc)
    gaps = []
    for m in range(n):
        for k in range(m + 1, n):
            gap = l1_norm(rhos[k] - rhos[m])
            bound = template(m + 1)
            gaps.append({"m": m + 1, "n": k + 1, "gap": gap,
                         "template": bound,
                         "within": gap <= bound + config.tol_sum})
    return rhos, gaps


def _finalize(report: PipelineReport, group, mu, mu_hat, rhos,
              config: Config) -> None:
    if rhos:
        rho_hat = dft(rhos[-1])
        diff = float(np.abs(rho_hat.values - mu_hat.values ** 2)
                     .max(initial=0.0))
    else:
        diff = float(np.abs(mu_hat.values ** 2).max(initial=0.0))
    report.final["rho_vs_mu_sq_gap"] = diff
    report.final["rho_equals_mu_sq"] = diff <= config.tol_exact
    report.final["sigma"] = [[z.real, z.imag]
                             for z in spectrum_sigma(mu)]
    report.final["natural_spectrum"] = natural_spectrum_check(mu)
    ok, note = strong_continuity_check(group)
    report.annotations.append(f"strong continuity check: {note}")
    report.annotations.append(
        "squared measure has absolutely continuous density by "
        "construction on a finite group; spectrum naturality is "
        "reported, not inferred")


def glow_run(group: FiniteAbelianGroup, mu: GroupFunction,
             seq: DecaySequence, config: Config = DEFAULT_CONFIG
             ) -> PipelineReport:
    """Residual recursion driver with per-level certificates."""
    mu_hat, values, level_idx, mus, taus = _run_common(group, mu, seq,
                                                       config)
    report = PipelineReport(group, "glow", seq,
                            [list(map(int, idx)) for idx in level_idx])
    mu_hat_abs = np.abs(mu_hat.values)
    cum = 0
    for n in range(1, len(values) + 1):
        a_n = float(values[n - 1])
        cum += len(level_idx[n - 1])
        step: dict = {"n": n, "a_n": a_n,
                      "level_size": len(level_idx[n - 1])}
        if a_n == 0.0:
            step["approximate"] = True
            step["log_a_n"] = seq.log_a[n - 1]
            step["log_tau_bound"] = -0.5 * seq.log_a[n - 1]
            report.steps.append(step)
            continue
        tau_n = taus[n - 1]
        tau_norm = l1_norm(tau_n)
        tau_bound = a_n ** -0.5
        step["tau_norm"] = tau_norm
        step["tau_bound"] = tau_bound
        step["tau_bound_ok"] = tau_norm <= tau_bound + config.tol_exact
        mu_norm = l1_norm(mus[n - 1])
        mu_bound = 1.5 * a_n ** -1.5 + 0.5
        step["mu_norm"] = mu_norm
        step["mu_bound"] = mu_bound
        step["mu_bound_ok"] = mu_norm <= mu_bound + config.tol_exact

        recursion_gap = sup_norm(tau_n - mus[n - 1].scale(a_n)
                                 - taus[n])
        step["tozs_identity_gap"] = recursion_gap

        scaled = tau_n.scale(1.0 / a_n)
        scaled_hat = dft(scaled)
        target = np.zeros(group.order, dtype=np.int64)
        target[level_idx[n - 1]] = 1
        try:
            rounded = round_int(scaled_hat.with_side("primal"),
                                config.round_margin)
            step["round_matches_level"] = bool(
                np.array_equal(rounded.integer_values(), target))
            d_obs = rounded.distance
        except FinabelError as exc:
            step["round_matches_level"] = False
            step["round_error"] = f"{type(exc).__name__}: {exc}"
            d_obs = 0.5
        try:
            skn = skn_finite(scaled, 0.5, 0.5, config,
                             threshold=max(config.rounding_threshold,
                                           d_obs + 1e-9))
            step["skn_verdict"] = skn.verdict
            step["skn_mu_z_norm"] = skn.mu_z_norm
            step["skn_bound"] = skn.bound
        except FinabelError as exc:
            step["skn_verdict"] = None
            step["skn_error"] = f"{type(exc).__name__}: {exc}"
        step["q_report"] = _q_report(mu_hat_abs, values, n, cum, config)
        report.steps.append(step)

    rhos, gaps = _rho_records(values, mus, lambda m: 3.0 ** -m, config)
    report.rho_gaps = gaps
    _finalize(report, group, mu, mu_hat, rhos, config)
    return report


def najp_run(group: FiniteAbelianGroup, mu: GroupFunction,
             seq: DecaySequence, config: Config = DEFAULT_CONFIG
             ) -> PipelineReport:
    """Interpolation-majorant driver for torsion-free style runs."""
    mu_hat, values, level_idx, mus, taus = _run_common(group, mu, seq,
                                                       config)
    report = PipelineReport(group, "najp", seq,
                            [list(map(int, idx)) for idx in level_idx])
    mu_hat_abs = np.abs(mu_hat.values)
    cum_idx: list[int] = []
    nu = GroupFunction.zero(group)
    for n in range(1, len(values) + 1):
        a_n = float(values[n - 1])
        cum_idx.extend(int(i) for i in level_idx[n - 1])
        step: dict = {"n": n, "a_n": a_n,
                      "level_size": len(level_idx[n - 1])}
        if a_n == 0.0:
            step["approximate"] = True
            step["log_a_n"] = seq.log_a[n - 1]
            report.steps.append(step)
            continue
        nu = nu + mus[n - 1].scale(a_n)
        support = sorted(cum_idx)
        poly = bpb_search(group, support, 1.0, config)
        f_n = poly.function
        conv = idft(GroupFunction(
            group, mu_hat.values * poly.transform, DUAL))
        diff = conv - nu
        lhs = l1_norm(diff)
        sup_major = sup_norm(diff)
        off = np.ones(group.order, dtype=bool)
        off[support] = False
        spectral = float((mu_hat_abs * np.abs(poly.transform))[off].sum())
        a_next = float(values[n]) if n < len(values) else 0.0
        rhs = poly.l1 * a_next * len(poly.actual_support)
        tol = config.tol_sum
        step.update({
            "f_l1": poly.l1,
            "f_support": len(poly.actual_support),
            "majorant_lhs": lhs,
            "majorant_sup": sup_major,
            "majorant_spectral": spectral,
            "majorant_rhs": rhs,
            "chain_ok": (lhs <= sup_major + tol
                         and sup_major <= spectral + tol
                         and spectral <= rhs + tol),
        })
        nu_norm = l1_norm(nu)
        step["nu_norm"] = nu_norm
        step["nu_bound"] = 3.0
        step["nu_bound_ok"] = nu_norm <= 3.0 + tol
        scaled_norm = a_n * l1_norm(mus[n - 1])
        step["mu_scaled_norm"] = scaled_norm
        step["mu_scaled_bound"] = 6.0
        step["mu_scaled_bound_ok"] = scaled_norm <= 6.0 + tol
        step["q_report"] = _q_report(mu_hat_abs, values, n,
                                     len(cum_idx), config)
        report.steps.append(step)

    rhos, gaps = _rho_records(values, mus, lambda m: 6.0 / 2.0 ** m,
                              config)
    report.rho_gaps = gaps
    _finalize(report, group, mu, mu_hat, rhos, config)
    return report
