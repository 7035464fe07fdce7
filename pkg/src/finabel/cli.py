"""Command-line surface binding all modules.

Exit-code policy: usage errors exit 2 (argparse), tool failures exit 1,
and runs whose mathematical verdicts fail still exit 0 with the
verdicts recorded in the artifact.  ``selftest`` is the exception: it
exits nonzero when any of its checks fail.  Artifacts are UTF-8 JSON
with sorted keys and no timestamps, so identical (argv, seed, config)
yield byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import selftest as selftest_mod
from .bpb_lp import bpb_search
from .certifier import (
    RiemannFrequency,
    certify_tws,
    riemann_a_norm,
    skn_finite,
)
from .config import Config, load_config
from .errors import FinabelError
from .fourier import GroupFunction, dft, idft, norms, spectrum_sigma
from .group_core import (
    annihilator,
    enumerate_subgroups,
    parse_group_spec,
    subgroup_from_indices,
    subgroup_span,
)
from .idempotent import corkey_build, decompose_int
from .jsonutil import dumps
from .pipeline import (
    DecaySequence,
    MODE_EMPIRICAL,
    MODE_GLOW,
    MODE_NAJP,
    glow_run,
    make_sequence,
    najp_run,
    synth_measure_detailed,
)
from .rounding import dist_to_int, real_reduce, round_int


def _emit(payload: dict, out: str | None, config: Config) -> None:
    payload = dict(payload)
    payload["config"] = config.to_dict()
    text = dumps(payload)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _values_arg(raw: str) -> np.ndarray:
    pairs = json.loads(raw)
    return np.array([complex(re, im) for re, im in pairs],
                    dtype=np.complex128)


def _function_from_args(args, config) -> GroupFunction:
    group = parse_group_spec(args.group, config.max_order)
    return GroupFunction(group, _values_arg(args.values),
                         getattr(args, "side", "primal"))


def _load_function(path: str) -> GroupFunction:
    with open(path, "r", encoding="utf-8") as handle:
        return GroupFunction.from_json_dict(json.load(handle))


def _int_list(raw: str) -> list[int]:
    return [int(p) for p in raw.split(",") if p.strip()]


# -- subcommands --------------------------------------------------------------


def _cmd_group(args, config) -> int:
    group = parse_group_spec(args.group, config.max_order)
    payload: dict = {
        "group": group.spec(),
        "order": group.order,
        "lcm": group.lcm,
    }
    if args.subgroups:
        subs = enumerate_subgroups(group, config.enumeration_cap)
        payload["subgroups"] = [s.to_json() for s in subs]
        payload["subgroup_count"] = len(subs)
    if args.span is not None:
        sub = subgroup_span(group, _int_list(args.span))
        payload["span"] = sub.to_json()
    if args.annihilator_of is not None:
        sub = subgroup_from_indices(group, _int_list(args.annihilator_of))
        ann = annihilator(group, sub)
        payload["annihilator_of"] = sub.to_json()
        payload["annihilator"] = ann.to_json()
        payload["product_identity"] = ann.order * sub.order == group.order
    _emit(payload, args.out, config)
    return 0


def _cmd_fourier(args, config) -> int:
    f = _function_from_args(args, config)
    payload: dict = {"group": f.group.spec(), "op": args.op}
    if args.op == "dft":
        result = dft(f)
        payload["values"] = result.to_json_dict()["values"]
    elif args.op == "idft":
        result = idft(f.with_side("dual"))
        payload["values"] = result.to_json_dict()["values"]
    elif args.op == "norms":
        report = norms(f)
        payload["norms"] = {"l1": report.l1, "linf": report.linf,
                            "a_norm": report.a_norm}
        payload["csv"] = report.CSV_HEADER + "\n" + report.to_csv_row()
    elif args.op == "spectrum":
        payload["sigma"] = [[z.real, z.imag] for z in spectrum_sigma(f)]
    else:
        raise FinabelError(f"unknown fourier op {args.op!r}")
    if args.op in ("dft", "idft"):
        # compact echo of the transform, matching the values schema
        sys.stdout.write(json.dumps(payload["values"],
                                    separators=(",", ":")) + "\n")
    _emit(payload, args.out, config)
    return 0


def _cmd_round(args, config) -> int:
    f = _function_from_args(args, config)
    payload: dict = {"group": f.group.spec(), "op": args.op}
    if args.op == "dist":
        payload["distance"] = dist_to_int(f)
    elif args.op == "round":
        result = round_int(f, args.margin)
        payload["distance"] = result.distance
        payload["rounded"] = [int(v) for v in result.integer_values()]
        payload["support"] = list(result.support)
    elif args.op == "real_reduce":
        red = real_reduce(f)
        payload["imag_sup"] = red.imag_sup
        payload["a_norm_real"] = red.a_norm_real
        payload["a_norm_original"] = red.a_norm_original
        payload["values"] = red.real.to_json_dict()["values"]
    else:
        raise FinabelError(f"unknown rounding op {args.op!r}")
    _emit(payload, args.out, config)
    return 0


def _cmd_bpb(args, config) -> int:
    group = parse_group_spec(args.group, config.max_order)
    poly = bpb_search(group, _int_list(args.lam), args.eps, config)
    payload = {
        "group": group.spec(),
        "lambda": list(poly.lambda_freqs),
        "allowed_support": list(poly.allowed_support),
        "actual_support": list(poly.actual_support),
        "l1": poly.l1,
        "epsilon": poly.epsilon,
        "bound_report": poly.bound_report.to_json_dict(),
        "transform": [[z.real, z.imag] for z in poly.transform],
    }
    if args.emit:
        Path(args.emit).write_text(dumps(poly.function.to_json_dict()),
                                   encoding="utf-8")
    _emit(payload, args.out, config)
    return 0


def _cmd_decompose(args, config) -> int:
    f = _function_from_args(args, config)
    deco = decompose_int(f, cost=args.cost, config=config)
    _emit(deco.to_json_dict(), args.out, config)
    return 0


def _cmd_corkey(args, config) -> int:
    f = _function_from_args(args, config)
    etas = [float(p) for p in args.etas.split(",") if p.strip()]
    chains = corkey_build(f, etas, m_bound=args.m, config=config)
    payload = {
        "group": f.group.spec(),
        "etas": etas,
        "chains": [c.to_json_dict() for c in chains],
        "all_passed": all(c.all_passed for c in chains),
    }
    _emit(payload, args.out, config)
    return 0


def _cmd_certify(args, config) -> int:
    f = _load_function(args.input)
    cert = certify_tws(f, args.eps1, args.eps2, config,
                       threshold=args.threshold)
    _emit(cert.to_json_dict(), args.out, config)
    return 0


def _cmd_skn(args, config) -> int:
    mu = _load_function(args.input)
    result = skn_finite(mu, args.eps1, args.eps2, config,
                        threshold=args.threshold)
    _emit(result.to_json_dict(), args.out, config)
    return 0


def _parse_freqs(path: str, zrank: int) -> list[RiemannFrequency]:
    with open(path, "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    out = []
    for item in raw:
        coeff = item.get("coeff", [1.0, 0.0])
        out.append(RiemannFrequency(
            chi=tuple(int(c) for c in item.get("chi", [])),
            r=tuple(int(r) for r in item.get("r", [])),
            coeff=complex(coeff[0], coeff[1]),
        ))
    return out


_RIEMANN_PRESETS = {
    "single": [{"chi": [0], "r": [1], "coeff": [1.0, 0.0]}],
    "two_freq": [{"chi": [0], "r": [0], "coeff": [1.0, 0.0]},
                 {"chi": [0], "r": [1], "coeff": [1.0, 0.0]}],
}


def _cmd_riemann(args, config) -> int:
    if args.preset:
        raw = _RIEMANN_PRESETS[args.preset]
        freqs = [RiemannFrequency(tuple(i["chi"]), tuple(i["r"]),
                                  complex(*i["coeff"])) for i in raw]
        h_moduli = [1]
    else:
        if not args.freqs:
            raise FinabelError("riemann needs --freqs or --preset")
        freqs = _parse_freqs(args.freqs, args.d)
        h_moduli = _int_list(args.h) if args.h else [1]
    ladder = _int_list(args.ladder)
    table = riemann_a_norm(h_moduli, args.d, freqs, ladder, config)
    _emit(table.to_json_dict(), args.out, config)
    return 0


def _parse_sequence(raw: str, config: Config) -> DecaySequence:
    if raw.strip().startswith("{"):
        data = json.loads(raw)
    else:
        with open(raw, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    if "empirical" in data:
        return make_sequence(1.0, 0, MODE_EMPIRICAL,
                             {"values": data["empirical"]}, config)
    for mode in (MODE_GLOW, MODE_NAJP):
        if mode in data:
            spec = data[mode]
            return make_sequence(spec["a1"], spec["length"], mode,
                                 spec.get("params", {}), config)
    raise FinabelError(f"unrecognized sequence description {data!r}")


def _cmd_pipeline(args, config) -> int:
    group = parse_group_spec(args.group, config.max_order)
    seq = _parse_sequence(args.seq, config)
    preset = {"nested": "nested_annihilator",
              "random": "random_disjoint"}.get(args.preset, args.preset)
    synth = synth_measure_detailed(group, seq, preset, args.seed,
                                   config=config)
    runner = glow_run if args.mode == "glow" else najp_run
    report = runner(group, synth.mu, seq, config)
    report.warnings.extend(synth.warnings)
    payload = report.to_json_dict()
    payload["measure"] = synth.to_json_dict()
    payload["all_bound_verdicts"] = report.all_bound_verdicts
    _emit(payload, args.out, config)
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    return 0


def _cmd_selftest(args, config) -> int:
    return selftest_mod.run_selftest(Path(args.out), config)


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finabel",
        description="Harmonic analysis toolkit on finite Abelian groups")
    parser.add_argument("--config", default=None,
                        help="path to a JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("group", help="group info, subgroups, annihilators")
    p.add_argument("--group", required=True)
    p.add_argument("--subgroups", action="store_true")
    p.add_argument("--span", default=None)
    p.add_argument("--annihilator-of", dest="annihilator_of", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_group)

    p = sub.add_parser("fourier", help="transforms, norms, spectrum")
    p.add_argument("--group", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--op", required=True,
                   choices=["dft", "idft", "norms", "spectrum"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_fourier)

    p = sub.add_parser("round", help="nearest-integer calculus")
    p.add_argument("--group", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--op", required=True,
                   choices=["dist", "round", "real_reduce"])
    p.add_argument("--margin", type=float, default=1e-6)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_round)

    p = sub.add_parser("bpb", help="minimal-l1 interpolation search")
    p.add_argument("--group", required=True)
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--emit", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bpb)

    p = sub.add_parser("decompose", help="coset-structured decomposition")
    p.add_argument("--group", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--cost", default="min_f_actual",
                   choices=["min_parts", "min_f_actual"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("corkey", help="eta-indexed subgroup chains")
    p.add_argument("--group", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--etas", required=True)
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_corkey)

    p = sub.add_parser("certify", help="rounding-norm certificate")
    p.add_argument("--input", required=True)
    p.add_argument("--eps1", type=float, required=True)
    p.add_argument("--eps2", type=float, required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("skn", help="measure-transform rounding certificate")
    p.add_argument("--input", required=True)
    p.add_argument("--eps1", type=float, required=True)
    p.add_argument("--eps2", type=float, required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_skn)

    p = sub.add_parser("riemann", help="discretized algebra-norm ladder")
    p.add_argument("--h", default="1")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--freqs", default=None)
    p.add_argument("--preset", default=None,
                   choices=["single", "two_freq"])
    p.add_argument("--ladder", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_riemann)

    p = sub.add_parser("pipeline", help="measure experiment drivers")
    p.add_argument("mode", choices=["glow", "najp"])
    p.add_argument("--group", required=True)
    p.add_argument("--seq", required=True)
    p.add_argument("--preset", default="nested")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("selftest", help="deterministic property suite")
    p.add_argument("--out", default="selftest_artifacts")
    p.set_defaults(func=_cmd_selftest)

    return parser


def run_command(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except FinabelError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
