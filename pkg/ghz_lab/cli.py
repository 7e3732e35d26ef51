"""
Command-line front end: ``ghz-lab compute | sweep | verify | roof``.

Exit codes: 0 success or passed campaign, 1 failed campaign, 2 usage or
input error. Payloads (JSON/CSV) go to stdout or ``--out``; logs go to
stderr.
"""

import argparse
import json
import logging
import math
import sys
from collections.abc import Sequence
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from ghz_lab import __version__
from ghz_lab.analytic import (
    C23_VARIANTS,
    FactorInputs,
    factor_three_sided,
    factor_two_sided,
    placement_label,
    single_sided_at,
    single_sided_factor,
    tau3_from_cuts,
    three_sided_in_domain,
    two_sided_at,
    two_sided_in_domain,
)
from ghz_lab.channels import NAMED_FAMILIES, ChannelSpec, apply_channels, parse_channel_spec
from ghz_lab.concurrence import tau3
from ghz_lab.config import CliConfig, load_config
from ghz_lab.errors import GhzLabError, PreconditionError
from ghz_lab.harness.campaigns import CAMPAIGNS
from ghz_lab.harness.report import plain, write_atomic
from ghz_lab.harness.sweep import Axis, SweepSpec, sweep, to_csv, write_csv
from ghz_lab.roof import estimate_convex_roof, support_rank
from ghz_lab.states import PureState, as_state, ghz, pure_density, random_ghz_type

log = logging.getLogger(__name__)

CANONICAL_SLOTS = {1: (3,), 2: (2, 3), 3: (1, 2, 3)}


def parse_state_spec(text: str) -> tuple[PureState, str]:
    """``ghz``, ``ghz-lu:seed=N`` or ``file:PATH`` (8 lines of ``re im``)."""
    if text == "ghz":
        return ghz(), "ghz"
    if text.startswith("ghz-lu:"):
        key, _, value = text.removeprefix("ghz-lu:").partition("=")
        if key != "seed" or not value.isdigit():
            raise PreconditionError(f"expected ghz-lu:seed=N, got {text!r}")
        return random_ghz_type(int(value)), text
    if text.startswith("file:"):
        return read_state_file(Path(text.removeprefix("file:"))), text
    raise PreconditionError(f"unknown state spec {text!r}; use ghz, ghz-lu:seed=N or file:PATH")


def read_state_file(path: Path) -> PureState:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise PreconditionError(f"cannot read state file {path}: {e}") from e
    amplitudes = []
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.replace(",", " ").split()
        if len(fields) != 2:
            raise PreconditionError(f"{path}:{lineno}: expected 're im', got {line!r}")
        try:
            re_part, im_part = (float(x) for x in fields)
        except ValueError as e:
            raise PreconditionError(f"{path}:{lineno}: {e}") from e
        amplitudes.append(complex(re_part, im_part))
    if len(amplitudes) != 8:
        raise PreconditionError(f"{path}: expected 8 amplitudes, got {len(amplitudes)}")
    return as_state(np.array(amplitudes))


def _channel_specs(texts: Sequence[str] | None) -> list[ChannelSpec]:
    specs = [parse_channel_spec(t) for t in texts or ()]
    if len(specs) > 3:
        raise PreconditionError(f"at most 3 channels, got {len(specs)}")
    slots = [s.slot for s in specs]
    if len(set(slots)) != len(slots):
        raise PreconditionError(f"channels must act on distinct slots, got {slots}")
    return specs


def _noisy_state(psi: PureState, specs: Sequence[ChannelSpec]):
    rho = pure_density(psi)
    if specs:
        rho = apply_channels(rho, [(s.channel, s.slot) for s in specs])
    return rho


def _validity(in_domain: bool) -> str:
    return "within stated validity" if in_domain else "outside stated validity"


def _analytic_block(specs: Sequence[ChannelSpec], variant: str, measured) -> dict[str, Any]:
    """Closed-form values for the GHZ state under ``specs``.

    Factorization laws are evaluated for any channels and flagged when the
    channels fall outside the flip families they are stated for.
    """
    channels = [s.channel for s in specs]
    slots = tuple(s.slot for s in specs)
    out: dict[str, Any] = {"placement": placement_label(slots) if slots else "canonical"}
    factors = FactorInputs(*(single_sided_factor(ch) for ch in channels)) if len(specs) > 1 else None
    match len(specs):
        case 0:
            cuts = (1.0, 1.0, 1.0)
        case 1:
            cuts = single_sided_at(channels[0], slots[0])
        case 2:
            cuts = two_sided_at(channels[0], slots[0], channels[1], slots[1], variant)
            out["factor_law_tau3_sq"] = factor_two_sided(factors)
            out["factor_law_validity"] = _validity(two_sided_in_domain(*channels))
        case _:
            law = factor_three_sided(factors)
            out["factor_law_tau3_sq"] = law
            out["factor_law_validity"] = _validity(three_sided_in_domain(*channels))
            out["tau3"] = math.sqrt(law)
            out["residuals"] = {
                "tau3": abs(measured.tau3 - out["tau3"]),
                "factor_law": abs(measured.tau3**2 - law),
            }
            return out
    out["bipartite"] = dict(zip(("12|3", "13|2", "23|1"), cuts, strict=True))
    out["tau3"] = tau3_from_cuts(cuts)
    out["residuals"] = {
        "bipartite": max(abs(a - b) for a, b in zip(measured.cuts, cuts, strict=True)),
        "tau3": abs(measured.tau3 - out["tau3"]),
    }
    if "factor_law_tau3_sq" in out:
        out["residuals"]["factor_law"] = abs(measured.tau3**2 - out["factor_law_tau3_sq"])
    return out


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)
        log.info("wrote %s", out)


def _dump(payload: dict[str, Any], args: argparse.Namespace) -> str:
    if args.timestamp:
        payload["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return json.dumps(plain(payload), indent=2, allow_nan=False) + "\n"


def _out_path(args: argparse.Namespace, config: CliConfig) -> Path | None:
    if args.out is None:
        return None
    return args.out if args.out.is_absolute() else config.out_dir / args.out


def cmd_compute(args: argparse.Namespace, config: CliConfig) -> int:
    psi, label = parse_state_spec(args.state)
    specs = _channel_specs(args.channel)
    report = tau3(_noisy_state(psi, specs))
    payload: dict[str, Any] = {
        "state": label,
        "channels": [str(s) for s in specs],
        "report": report.to_dict(),
        "eq15_variant": config.eq15_variant,
        "version": __version__,
    }
    if label == "ghz":
        payload["analytic"] = _analytic_block(specs, config.eq15_variant, report)
    _emit(_dump(payload, args), _out_path(args, config))
    return 0


def cmd_sweep(args: argparse.Namespace, config: CliConfig) -> int:
    families = args.family or ["bitflip"]
    if len(families) == 1:
        families = families * args.sides
    if len(families) != args.sides:
        raise PreconditionError(f"--family given {len(families)} times for {args.sides} sides")
    slots = tuple(args.slot) if args.slot else CANONICAL_SLOTS[args.sides]
    if len(slots) != args.sides:
        raise PreconditionError(f"--slot given {len(slots)} times for {args.sides} sides")
    spec = SweepSpec(
        tuple(
            Axis(slot, family, args.p_min, args.p_max, args.points)
            for slot, family in zip(slots, families, strict=True)
        ),
        state=args.state,
        seed=config.seed,
        eq15_variant=config.eq15_variant,
    )
    frame = sweep(spec)
    out = _out_path(args, config)
    if out is None:
        sys.stdout.write(to_csv(frame))
    else:
        write_csv(frame, out)
        log.info("wrote %d rows to %s", len(frame), out)
    return 0


def cmd_verify(args: argparse.Namespace, config: CliConfig) -> int:
    campaign = args.campaign
    tol = args.tol if args.tol is not None else config.tolerance(campaign)
    samples = config.samples
    common = {"seed": config.seed, "eq15_variant": config.eq15_variant}
    match campaign:
        case "never-vanish":
            report = CAMPAIGNS[campaign](grid_points=config.grid_points, floor=tol, **common)
        case "rank4-roof":
            report = CAMPAIGNS[campaign](
                samples=samples or 100, restarts=config.restarts, tol=tol, workers=args.workers, **common
            )
        case "factorization-2sided" | "factorization-3sided":
            report = CAMPAIGNS[campaign](samples=samples or 500, tol=tol, **common)
        case "lu-invariance":
            report = CAMPAIGNS[campaign](samples=samples or 200, tol=tol, **common)
        case _:
            report = CAMPAIGNS[campaign](samples=samples or 1000, tol=tol, **common)
    if args.timestamp:
        report.stamp()
    _emit(report.to_json(), _out_path(args, config))
    if not report.passed:
        print(
            f"[verify] {campaign} FAIL: max residual {report.max_residual:.3e} > {report.tolerance:.1e}",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_roof(args: argparse.Namespace, config: CliConfig) -> int:
    psi, label = parse_state_spec(args.state)
    specs = _channel_specs(args.channel)
    rho = _noisy_state(psi, specs)
    t = tau3(rho).tau3
    est = estimate_convex_roof(rho, restarts=config.restarts, max_m=args.max_m, seed=config.seed)
    scaled = math.sqrt(2) * est.value
    payload = {
        "state": label,
        "channels": [str(s) for s in specs],
        "seed": config.seed,
        "restarts": config.restarts,
        "rank": support_rank(rho),
        "tau3": t,
        "roof": est.value,
        "sqrt2_roof": scaled,
        "ratio": scaled / t if t > 1e-9 else None,
        "decomposition": {"weights": est.best.weights, "members": len(est.best)},
        "trace": [asdict(run) for run in est.trace],
        "version": __version__,
    }
    _emit(_dump(payload, args), _out_path(args, config))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default: config or 42)")
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    common.add_argument("--config", type=Path, default=None, help="key=value config file")
    common.add_argument("--eq15-variant", "--c23-variant", dest="eq15_variant", choices=C23_VARIANTS,
                        default=None,
                        help="reading of the two-sided C^{23|1} formula")
    common.add_argument("--timestamp", action="store_true", help="stamp reports with the UTC time")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")

    parser = argparse.ArgumentParser(
        prog="ghz-lab",
        description="Entanglement of GHZ-type three-qubit states under local Pauli noise.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="concurrence report for one state")
    p.add_argument("--state", default="ghz", help="ghz | ghz-lu:seed=N | file:PATH")
    p.add_argument("--channel", action="append", help="e.g. bitflip:q3:p=0.25 (repeatable)")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("sweep", parents=[common], help="grid sweep over named channels, CSV output")
    p.add_argument("--sides", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--family", action="append", choices=NAMED_FAMILIES,
                   help="channel family per side (once for all sides)")
    p.add_argument("--slot", type=int, action="append", choices=(1, 2, 3),
                   help="qubit per side (default: 3 | 2,3 | 1,2,3)")
    p.add_argument("--points", type=int, default=11, help="grid points per axis")
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--state", choices=("ghz", "ghz-lu"), default="ghz")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run a verification campaign")
    p.add_argument("campaign", choices=sorted(CAMPAIGNS))
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None, help="roof restarts (rank4-roof)")
    p.add_argument("--grid-points", type=int, default=None, help="grid size (never-vanish)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (rank4-roof)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("roof", parents=[common], help="numerical convex roof of a noisy state")
    p.add_argument("--state", default="ghz", help="ghz | ghz-lu:seed=N | file:PATH")
    p.add_argument("--channel", action="append", help="e.g. bitflip:q3:p=0.25 (repeatable)")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--max-m", type=int, default=None, help="largest decomposition size")
    p.set_defaults(func=cmd_roof)
    return parser


def _setup_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        config = load_config(args.config).override(
            seed=args.seed,
            eq15_variant=args.eq15_variant,
            samples=getattr(args, "samples", None),
            restarts=getattr(args, "restarts", None),
            grid_points=getattr(args, "grid_points", None),
        )
        return args.func(args, config)
    except GhzLabError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
