"""``magicotoc`` command line.

    magicotoc sre-scan --sites 6 --nt-max 12 --out runs/sre --svg
    magicotoc verify --out runs/verify

Exit status is 0 on success, 2 when ``verify`` finds a failing check and 1
on usage or runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__, magic, otoc
from .circuits import Circuit, build_tdoped_circuit, circuit_unitary
from .experiments import ExperimentConfig, run_command
from .tensor import QuditState

log = logging.getLogger("magicotoc")

SCANS = ("mana-scan", "sre-scan", "hamiltonian-scan", "verify")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    # Defaults are None so --config values survive unless a flag is given.
    p.add_argument("--config", type=Path, help="JSON file with config keys; flags override it")
    p.add_argument("--q", type=int)
    p.add_argument("--sites", type=int)
    p.add_argument("--nt-min", type=int)
    p.add_argument("--nt-max", type=int)
    p.add_argument("--samples", type=int, help="OTOC samples per point (default 50)")
    p.add_argument("--repeats", type=int, help="repetitions for error bars (default 10)")
    p.add_argument("--exact-instances", type=int, help="circuits for exact magic (default 10)")
    p.add_argument("--cycles", type=int, help="Clifford cycles per block (default 10)")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=otoc.MODES)
    p.add_argument("--a-site", type=int)
    p.add_argument("--b-site", type=int)
    p.add_argument("--out", help="output directory (default results)")
    p.add_argument("--svg", action="store_true", default=None, help="also write SVG figures")
    p.add_argument("--large", action="store_true", default=None, help="lift the desk-scale size caps")
    p.add_argument("--workers", type=int, help="sampling threads (results do not depend on it)")
    p.add_argument("--j-coupling", type=float)
    p.add_argument("--h-field", type=float)
    p.add_argument("--time-points", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="magicotoc", description="Magic from OTOC fluctuations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SCANS:
        _add_common(sub.add_parser(name))

    c = sub.add_parser("circuit", help="write a seeded t-doped circuit as JSON")
    c.add_argument("--q", type=int, default=2)
    c.add_argument("--sites", type=int, required=True)
    c.add_argument("--nt", type=int, default=0)
    c.add_argument("--cycles", type=int, default=10)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--output", type=Path, help="file to write (default stdout)")

    i = sub.add_parser("inspect", help="magic of the state a circuit JSON prepares from |0..0>")
    i.add_argument("circuit", type=Path)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config is not None:
        data = json.loads(args.config.read_text())
        unknown = set(data) - set(ExperimentConfig.fields())
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for name in ExperimentConfig.fields():
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    cfg = ExperimentConfig(**data)
    if cfg.mode not in otoc.MODES:
        raise ValueError(f"mode must be one of {otoc.MODES}")
    for name in ("samples", "repeats", "exact_instances", "cycles", "workers", "time_points"):
        if getattr(cfg, name) < 1:
            raise ValueError(f"{name} must be positive")
    if cfg.seed < 0:
        raise ValueError("seed must be non-negative")
    return cfg


def _cmd_circuit(args) -> int:
    circ = build_tdoped_circuit(args.q, args.sites, args.nt, args.cycles, args.seed, seed=args.seed)
    text = circ.dumps() + "\n"
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)
    return 0


def _cmd_inspect(args) -> int:
    circ = Circuit.loads(args.circuit.read_text())
    state = QuditState(circ.q, circ.n_sites, circuit_unitary(circ)[:, 0])
    info = {"q": circ.q, "n_sites": circ.n_sites, "n_ops": len(circ.ops), "n_t": circ.count("T")}
    if circ.q == 2:
        info["m2"] = magic.stabilizer_renyi_entropy(state)
    else:
        info["mana"] = magic.mana(state, allow_large=True)
    sys.stdout.write(json.dumps(info, sort_keys=True) + "\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "circuit":
            return _cmd_circuit(args)
        if args.command == "inspect":
            return _cmd_inspect(args)
        cfg = config_from_args(args)
        result = run_command(args.command, cfg)
    except (ValueError, KeyError, OSError) as exc:
        print(f"magicotoc: error: {exc}", file=sys.stderr)
        return 1
    for f in result["files"]:
        print(f)
    if args.command == "verify":
        for c in result["checks"]:
            print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}")
        return 0 if result["passed"] else 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
