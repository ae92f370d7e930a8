"""``verify``: run a verification suite and report residuals.

Exit status is 0 when every case passes, 1 when any case fails and 2 on a
configuration error.  ``PARACONTACT_LOG`` selects ``quiet``, ``info`` or ``debug``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .polynomials import parse_function
from .structures import load_spec
from .suites import SUITES, ConfigError, RunConfig, run_suite

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="verify", description="Numerical checks of paracontact conformal geometry.")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--n", type=int, default=1, help="half the horizontal dimension")
    p.add_argument("--order", type=int, default=4, help="jet order")
    p.add_argument("--tol", type=float, default=1e-7, help="tolerance on normalized residuals")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--points", type=int, default=10, help="sample points per structure")
    p.add_argument(
        "--u",
        action="append",
        default=[],
        metavar="EXPR",
        help='conformal factor such as "0.3*u1*v1 - t"; repeatable',
    )
    p.add_argument("--spec", metavar="FILE", help="structure in the JSON polynomial format")
    p.add_argument("--eps", type=float, default=1.0, help="scale of the Yamabe solution")
    p.add_argument("--out", metavar="FILE.json", help="write the JSON report here")
    return p


def _configure_logging():
    level = os.environ.get("PARACONTACT_LOG", "quiet").lower()
    if level not in _LEVELS:
        raise ConfigError(f"PARACONTACT_LOG must be one of {', '.join(_LEVELS)}")
    logging.basicConfig(level=_LEVELS[level], format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("paracontact").setLevel(_LEVELS[level])


def _config(args) -> RunConfig:
    spec = None
    if args.spec:
        try:
            spec = load_spec(args.spec)
        except (OSError, KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"cannot load {args.spec}: {exc}") from exc
    us = []
    for text in args.u:
        text = text.strip()
        if text.startswith("["):
            try:
                us.append(parse_function(json.loads(text)))
            except (ValueError, TypeError, IndexError) as exc:
                raise ConfigError(f"bad monomial list {text!r}: {exc}") from exc
        else:
            us.append(text)
    cfg = RunConfig(
        suite=args.suite,
        n=spec.n if spec is not None else args.n,
        order=args.order,
        tol=args.tol,
        seed=args.seed,
        points=args.points,
        u=us,
        spec=spec,
        out=args.out,
        eps=args.eps,
    )
    return cfg.validate()


def _summary_line(rep) -> str:
    s = rep.summary()
    return f"{rep.suite}: {s['passed']}/{s['total']} passed, max residual {s['max_residual']:.3e}"


def main(argv=None) -> int:
    try:
        _configure_logging()
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        rep = run_suite(cfg)
    except ConfigError as exc:
        print(f"verify: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for c in rep.failures():
        tag = f" [{c.error}]" if c.error else ""
        print(f"FAIL {c.name}[{c.index}] residual={c.residual:.3e} tol={c.tolerance:.1e}{tag}")
    print(_summary_line(rep))
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
