"""Command-line entry point: run a scenario and emit its report files."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lgsqueeze",
        description=(
            "Simulate multimode squeezed-light generation in Laguerre-Gauss "
            "bases and emit CSV/JSON reports."
        ),
    )
    parser.add_argument("--scenario", help="named scenario to run")
    parser.add_argument("--config", help="path to a JSON scenario configuration")
    parser.add_argument("--out", help="output directory (default $OUT_DIR or ./out)")
    parser.add_argument("--lmax", type=int, default=None, help="azimuthal basis bound")
    parser.add_argument("--pmax", type=int, default=None, help="radial basis bound")
    parser.add_argument(
        "--seed-gain",
        type=float,
        default=None,
        help="apply this gain factor instead of calibrating the photon number",
    )
    parser.add_argument(
        "--oracle",
        action="store_true",
        help="cross-check against the truncated-Fock oracle (basis size <= 3)",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress the summary")
    return parser


def _oracle_check(result, out_dir) -> dict:
    from .fock_oracle import DIMENSION_GUARD, TruncatedFockSpace, vacuum_statistics

    sq = result.squeeze
    n = sq.size
    if n > 3:
        raise ValueError(f"oracle cross-check needs a basis of <= 3 modes, got {n}")
    from .coupling import InteractionType

    degenerate = sq.interaction is InteractionType.DEGENERATE_SINGLE_BEAM
    n_modes = n if degenerate else 2 * n
    # deepest cut the state-vector guard allows; degenerate single-mode runs
    # reach several photons, so small spaces get generous headroom
    n_cut = min(300, int(DIMENSION_GUARD ** (1.0 / n_modes)) - 1)
    space = TruncatedFockSpace(n_modes, n_cut)
    oracle = vacuum_statistics(sq.xi, space)
    rep = result.report
    if degenerate:
        from .squeeze_core import degenerate_statistics

        rep = degenerate_statistics(sq)
    def scaled(dev, reference):
        return float(dev / max(1.0, abs(reference)))

    deviations = {
        "var_X1": scaled(np.abs(oracle.var_X1 - rep.var_X1).max(),
                         np.abs(rep.var_X1).max()),
        "var_X2": scaled(np.abs(oracle.var_X2 - rep.var_X2).max(),
                         np.abs(rep.var_X2).max()),
        "nbar_matrix": scaled(np.abs(oracle.nbar_matrix - rep.nbar_matrix).max(),
                              np.abs(rep.nbar_matrix).max()),
        "pair_modulus": scaled(
            np.abs(np.abs(oracle.pair_matrix) - np.abs(rep.pair_matrix)).max(),
            np.abs(rep.pair_matrix).max(),
        ),
        "nbar_total": scaled(abs(oracle.nbar_total - rep.nbar_total),
                             rep.nbar_total),
        "number_variance": scaled(abs(oracle.number_variance - rep.number_variance),
                                  rep.number_variance),
    }
    agreement = {
        "truncation_bound": oracle.truncation_bound,
        "max_deviation": max(deviations.values()),
        "deviations": deviations,
        "within_bound": max(deviations.values())
        <= max(oracle.truncation_bound, 1e-9),
    }
    path = os.path.join(out_dir, "oracle_agreement.json")
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(agreement, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return agreement


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    from .modes import QuadratureError
    from .report_io import ConfigError, emit_result, scenario_config_from_dict
    from .scenarios import SCENARIO_NAMES, default_config, run_scenario

    if args.scenario and args.config:
        parser.error("--scenario and --config are mutually exclusive")
    if not args.scenario and not args.config:
        parser.error("one of --scenario or --config is required")

    try:
        if args.config:
            with open(args.config, encoding="utf-8") as handle:
                data = json.load(handle)
            cfg = scenario_config_from_dict(data)
        else:
            if args.scenario not in SCENARIO_NAMES:
                raise ConfigError(
                    f"unknown scenario {args.scenario!r}; choose from "
                    + ", ".join(SCENARIO_NAMES)
                )
            cfg = default_config(
                args.scenario,
                ell_max=1 if args.lmax is None else args.lmax,
                p_max=2 if args.pmax is None else args.pmax,
            )
        if args.lmax is not None or args.pmax is not None:
            from .modes import build_basis
            from .coupling import CouplingConfig

            basis = build_basis(
                cfg.coupling.basis.ell_max if args.lmax is None else args.lmax,
                cfg.coupling.basis.p_max if args.pmax is None else args.pmax,
            )
            cfg.coupling = CouplingConfig(
                interaction=cfg.coupling.interaction,
                medium=cfg.coupling.medium,
                pump1=cfg.coupling.pump1,
                pump2=cfg.coupling.pump2,
                collection=cfg.coupling.collection,
                basis=basis,
                single_pump=cfg.coupling.single_pump,
            )
        if args.seed_gain is not None:
            cfg.seed_gain = args.seed_gain

        out_dir = args.out or os.environ.get("OUT_DIR") or "out"
        start = time.perf_counter()
        result = run_scenario(cfg)
        wall = time.perf_counter() - start
        files = emit_result(result, cfg, out_dir, wall_time_s=wall)
        oracle_summary = None
        if args.oracle:
            oracle_summary = _oracle_check(result, out_dir)
            files.append("oracle_agreement.json")
    except (ConfigError, QuadratureError, ValueError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if not args.quiet:
        print(f"{result.name}: nbar = {result.report.nbar_total:.6f}, "
              f"gain = {result.gain:.6g}")
        for key in sorted(result.metrics):
            print(f"  {key} = {result.metrics[key]:.6g}")
        if oracle_summary is not None:
            print(
                "  oracle max deviation = %.3e (bound %.3e)"
                % (oracle_summary["max_deviation"], oracle_summary["truncation_bound"])
            )
        print(f"wrote {len(files)} files to {out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
