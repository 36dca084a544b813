from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Callable

from depp.automation.sweep import SweepError, run_sweep, sweep_rows
from depp.core.config import SEED_MAX, SEED_MIN, ParseError, ScenarioConfig, load_scenario
from depp.core.diag import debug, error
from depp.noise.channels import bell_weights
from depp.optics.network import OpticalNetwork
from depp.protocols.compare import compare_protocols
from depp.protocols.runner import execute, polarization_state, spatial_state
from depp.render.document import build_document, dump_document, serialize_result, write_document
from depp.render.table import comparison_csv, format_comparison_table, run_csv, sweep_csv
from depp.verify.invariants import perturbed_network, run_suite

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

SEED_ENV = "DEPP_SEED"


class UsageError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="depp", add_help=True)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a scenario and write its results document")
    run.add_argument("scenario", type=Path, help="Path to a .epp scenario file")
    run.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override a scenario entry (repeatable)",
    )
    run.add_argument("--format", choices=("json", "csv"), default="json")

    sweep = sub.add_parser("sweep", help="Evaluate the one-step protocol over a parameter range")
    sweep.add_argument("scenario", type=Path)
    sweep.add_argument("--param", required=True, help="Dotted key, e.g. source.theta")
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--set", dest="overrides", action="append", default=[])

    cmp = sub.add_parser("compare", help="Tabulate one-step vs recurrence vs Simon-Pan")
    cmp.add_argument("scenario", type=Path)
    cmp.add_argument("--target", type=float, default=None, help="Target fidelity in (0.5, 1]")
    cmp.add_argument("--format", choices=("table", "csv", "json"), default="table")
    cmp.add_argument("--set", dest="overrides", action="append", default=[])

    val = sub.add_parser("validate", help="Run the built-in invariant suite")
    val.add_argument("--perturb-network", action="store_true", help=argparse.SUPPRESS)

    return p


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or not raw.strip():
        return None
    try:
        seed = int(raw.strip())
    except ValueError:
        raise ParseError(f"{SEED_ENV} must be an integer, got {raw!r}", 1, 1, SEED_ENV) from None
    if not SEED_MIN <= seed <= SEED_MAX:
        raise ParseError(f"{SEED_ENV} must fit in 64 bits", 1, 1, SEED_ENV)
    return seed


def _load(path: Path, overrides: list[str]) -> ScenarioConfig:
    cfg = load_scenario(path, overrides=overrides)
    seed = _env_seed()
    # An explicit --set run.seed wins over the environment.
    if seed is not None and not any(o.strip().startswith("run.seed") for o in overrides):
        debug(f"seed {seed} from {SEED_ENV}", scope="cli")
        cfg = cfg.with_seed(seed)
    return cfg


def _emit(text: str, cfg: ScenarioConfig) -> None:
    out = cfg.output_path()
    if out is None:
        sys.stdout.write(text)
        return
    write_document(text, out)
    debug(f"wrote {out}", scope="cli")


def cmd_run(ns: argparse.Namespace) -> int:
    cfg = _load(ns.scenario, ns.overrides)
    result = execute(cfg)
    if ns.format == "csv":
        _emit(run_csv(result.analytic, result.sampling), cfg)
    else:
        _emit(dump_document(build_document(result)), cfg)
    return EXIT_OK


def cmd_sweep(ns: argparse.Namespace) -> int:
    cfg = _load(ns.scenario, ns.overrides)
    points = run_sweep(cfg, ns.param, ns.start, ns.stop, ns.steps)
    sys.stdout.write(sweep_csv(sweep_rows(points)))
    return EXIT_OK


def cmd_compare(ns: argparse.Namespace) -> int:
    cfg = _load(ns.scenario, ns.overrides)
    target = ns.target if ns.target is not None else cfg.protocol.target_fidelity
    if target is None:
        raise UsageError("compare needs --target or protocol.target_fidelity in the scenario")
    if not 0.5 < target <= 1.0:
        raise UsageError(f"--target must lie in (0.5, 1], got {target!r}")
    rho_p = polarization_state(cfg)
    result = compare_protocols(
        bell_weights(rho_p), target, spatial=spatial_state(cfg), rho_p=rho_p
    )
    if ns.format == "csv":
        sys.stdout.write(comparison_csv(result))
    elif ns.format == "json":
        sys.stdout.write(serialize_result(result))
    else:
        sys.stdout.write(format_comparison_table(result))
    return EXIT_OK


def cmd_validate(ns: argparse.Namespace) -> int:
    network = perturbed_network() if ns.perturb_network else OpticalNetwork.pbs_hwp()
    results = run_suite(network)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{status}  {r.name.ljust(width)}"
        if not r.passed:
            line += f"  {r.detail}"
        sys.stdout.write(line.rstrip() + "\n")
    failed = [r.name for r in results if not r.passed]
    sys.stdout.write(f"{len(results) - len(failed)}/{len(results)} invariants hold\n")
    if failed:
        error(f"violated invariants: {', '.join(failed)}")
        return EXIT_INVARIANT
    return EXIT_OK


_COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    try:
        return _COMMANDS[ns.command](ns)
    except (ParseError, SweepError, UsageError) as e:
        error(str(e))
        return EXIT_USAGE
    except (ValueError, RuntimeError, OSError) as e:
        error(str(e))
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
