"""Deterministic property suite behind the ``selftest`` subcommand.

Writes one JSON artifact per section plus a summary; byte-identical
across runs for the same (seed, config).  Exit status is nonzero when
any check fails.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .bpb_lp import bpb_search, lp_min_l1
from .catalog import all_abelian_groups_upto, catalog_groups_256
from .certifier import RiemannFrequency, certify_tws, riemann_a_norm, \
    skn_finite
from .config import Config
from .fourier import DUAL, GroupFunction, dft, idft, subgroup_haar
from .group_core import annihilator, enumerate_subgroups, make_group
from .idempotent import corkey_build
from .jsonutil import dump_json
from .pipeline import glow_run, make_sequence, najp_run, \
    synth_measure_detailed
from .rounding import round_int


def _section_duality(config: Config) -> dict:
    rows = []
    ok = True
    for group in all_abelian_groups_upto(24):
        for sub in enumerate_subgroups(group, config.enumeration_cap):
            ann = annihilator(group, sub)
            haar_hat = dft(subgroup_haar(group, sub))
            indicator = np.zeros(group.order)
            indicator[list(ann.key)] = 1.0
            gap = float(np.abs(haar_hat.values - indicator).max())
            good = gap <= 1e-12 and ann.order * sub.order == group.order
            ok &= good
            rows.append({"group": group.spec(), "k": sub.order,
                         "gap": gap, "ok": good})
    return {"ok": ok, "count": len(rows), "max_gap":
            max(r["gap"] for r in rows)}


def _section_fourier(config: Config, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    worst_parseval = 0.0
    worst_roundtrip = 0.0
    for group in catalog_groups_256():
        for _ in range(5):
            values = rng.normal(0, 1, group.order) \
                + 1j * rng.normal(0, 1, group.order)
            f = GroupFunction(group, values)
            fh = dft(f)
            lhs = float((np.abs(fh.values) ** 2).sum())
            rhs = float((np.abs(values) ** 2).mean())
            worst_parseval = max(worst_parseval,
                                 abs(lhs - rhs) / max(rhs, 1e-30))
            back = idft(fh)
            worst_roundtrip = max(worst_roundtrip, float(
                np.abs(back.values - values).max()))
    return {"ok": worst_parseval <= config.tol_sum
            and worst_roundtrip <= config.tol_exact * 10,
            "worst_parseval": worst_parseval,
            "worst_roundtrip": worst_roundtrip}


def _section_rounding(config: Config, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    group = make_group([4, 4])
    failures = 0
    for _ in range(500):
        base_g = rng.integers(-3, 4, group.order).astype(float)
        base_h = rng.integers(-3, 4, group.order).astype(float)
        g = base_g + rng.uniform(-1 / 6, 1 / 6, group.order)
        h = base_h + rng.uniform(-1 / 6, 1 / 6, group.order)
        fg = GroupFunction(group, g.astype(complex))
        fh = GroupFunction(group, h.astype(complex))
        fsum = GroupFunction(group, (g + h).astype(complex))
        lhs = round_int(fsum, config.round_margin).integer_values()
        rhs = round_int(fg, config.round_margin).integer_values() \
            + round_int(fh, config.round_margin).integer_values()
        failures += int(not np.array_equal(lhs, rhs))
    return {"ok": failures == 0, "failures": failures, "trials": 500}


def _section_lp(config: Config) -> dict:
    group = make_group([2])
    sol = lp_min_l1(group, [1], [1], config)
    case1 = abs(sol.optimum - 1.0) <= 1e-9 and \
        np.allclose(sol.values, [1.0, -1.0], atol=1e-9)
    group4 = make_group([4])
    poly = bpb_search(group4, [1, 3], 1.0, config)
    case2 = poly.l1 <= 2.0 + 1e-9
    return {"ok": bool(case1 and case2),
            "z2_optimum": sol.optimum, "z4_l1": poly.l1}


def _section_corkey(config: Config) -> dict:
    group = make_group([2, 2])
    values = np.zeros(group.order)
    values[[0, 2]] += 1.0
    values[[0, 1]] += 1.0
    f = GroupFunction(group, values.astype(complex))
    chains = corkey_build(f, [0.25, 0.125, 0.0625], config=config)
    ok = all(c.all_passed for c in chains)
    return {"ok": ok,
            "k_orders": [c.k_group.order for c in chains],
            "l": chains[0].decomposition.l,
            "f_actual": chains[0].decomposition.f_actual}


def _section_certify(config: Config) -> dict:
    results = {}
    group2 = make_group([2])
    cert = certify_tws(GroupFunction(group2, [1.0, 1.0]), 0.5, 0.5, config)
    results["z2_ones"] = cert.verdict and \
        cert.rounded_a_norm == cert.f_a_norm
    group4 = make_group([4])
    values = np.array([2.02, 0.0, 1.98, 0.0])
    cert2 = certify_tws(GroupFunction(group4, values.astype(complex)),
                        0.5, 0.5, config)
    results["z4_perturbed_haar"] = cert2.verdict
    spike = np.ones(8)
    spike[0] += 1.0
    cert3 = certify_tws(GroupFunction(make_group([8]),
                                      spike.astype(complex)),
                        0.25, 0.25, config)
    results["z8_spike"] = cert3.verdict
    return {"ok": all(results.values()), **results}


def _section_skn(config: Config) -> dict:
    group = make_group([2])
    mu = idft(GroupFunction(group, [1.0, 0.01], DUAL))
    result = skn_finite(mu, 0.5, 0.5, config)
    ok = result.verdict and abs(result.mu_norm - 1.0) <= 1e-12 \
        and abs(result.mu_z_norm - 1.0) <= 1e-12 \
        and result.bridge_gap <= 1e-12
    return {"ok": ok, "mu_norm": result.mu_norm,
            "mu_z_norm": result.mu_z_norm,
            "bridge_gap": result.bridge_gap}


def _section_riemann(config: Config) -> dict:
    single = riemann_a_norm([1], 1, [RiemannFrequency((0,), (1,), 1.0)],
                            [64, 256], config)
    two = riemann_a_norm(
        [1], 1,
        [RiemannFrequency((0,), (0,), 1.0),
         RiemannFrequency((0,), (1,), 1.0)],
        [128, 512, 2048], config)
    single_ok = all(abs(v - 1.0) <= 1e-12 for _, v in single.entries)
    two_gap = abs(two.entries[-1][1] - 4.0 / math.pi)
    return {"ok": single_ok and two_gap <= 1e-3,
            "two_freq_value": two.entries[-1][1],
            "two_freq_gap_to_4_over_pi": two_gap}


def _section_pipeline(config: Config) -> dict:
    group = make_group([4])
    seq = make_sequence(1.0, 0, "empirical", {"values": [0.5, 0.02]},
                        config)
    synth = synth_measure_detailed(group, seq, "nested_annihilator", 0,
                                   config=config)
    glow = glow_run(group, synth.mu, seq, config)
    najp = najp_run(group, synth.mu, seq, config)
    ok = (abs(synth.norm - 0.5) <= 1e-12
          and glow.all_bound_verdicts and najp.all_bound_verdicts
          and glow.final["rho_equals_mu_sq"])
    return {"ok": ok, "norm": synth.norm,
            "glow_pass": glow.all_bound_verdicts,
            "najp_pass": najp.all_bound_verdicts}


SECTIONS = [
    ("duality", lambda cfg, seed: _section_duality(cfg)),
    ("fourier", _section_fourier),
    ("rounding", _section_rounding),
    ("lp", lambda cfg, seed: _section_lp(cfg)),
    ("corkey", lambda cfg, seed: _section_corkey(cfg)),
    ("certify", lambda cfg, seed: _section_certify(cfg)),
    ("skn", lambda cfg, seed: _section_skn(cfg)),
    ("riemann", lambda cfg, seed: _section_riemann(cfg)),
    ("pipeline", lambda cfg, seed: _section_pipeline(cfg)),
]


def run_selftest(out_dir: Path, config: Config) -> int:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {"seed": config.seed, "sections": {}}
    all_ok = True
    for name, runner in SECTIONS:
        result = runner(config, config.seed)
        dump_json({"section": name, "config": config.to_dict(), **result},
                  out_dir / f"{name}.json")
        summary["sections"][name] = result["ok"]
        all_ok &= result["ok"]
        print(f"[selftest] {name}: {'pass' if result['ok'] else 'FAIL'}")
    summary["ok"] = all_ok
    dump_json(summary, out_dir / "summary.json")
    print(f"[selftest] overall: {'pass' if all_ok else 'FAIL'}")
    return 0 if all_ok else 1
