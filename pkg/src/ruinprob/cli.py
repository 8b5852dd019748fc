"""Command-line interface: ``ruinprob {bound,solve,validate,reproduce}``.

Results go to ``--out`` as CSV/JSON (plus a PNG summary for ``reproduce``);
a short tab-separated summary is printed on stdout.  Library errors map to
distinct exit codes (see :mod:`ruinprob.errors`).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cases import CASES, case_config
from .config import SOLVERS, RunConfig, load_config
from .errors import ConfigError, RuinError, ToleranceNotMet, ValidationFailed
from .pipeline import select_bound, solve, validate
from .report import write_bound, write_solution, write_validation


def _emit(**pairs) -> None:
    for k, v in pairs.items():
        if isinstance(v, float):
            v = f"{v:.10g}"
        print(f"{k}\t{v}")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--epsilon", type=float, metavar="R", help="total precision in (0, 1)")
    common.add_argument("--split", type=float, metavar="R", help="share of epsilon spent on the tail bound, in (0, 1]")
    common.add_argument("--solver", choices=SOLVERS)
    common.add_argument("--trials", type=int, metavar="N", help="Monte Carlo paths per point")
    common.add_argument("--horizon", type=int, metavar="N", help="Monte Carlo path length")
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--out", metavar="DIR", help="output directory")

    p = argparse.ArgumentParser(prog="ruinprob", description="Ruin probabilities via a two-barrier approximation.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("bound", parents=[common], help="tail bound and barrier for the requested precision")
    sub.add_parser("solve", parents=[common], help="solve for the approximation and write its certificate")
    sub.add_parser("validate", parents=[common], help="solve, then check against Monte Carlo")
    rep = sub.add_parser("reproduce", parents=[common], help="run an embedded case study end to end")
    rep.add_argument("figure", choices=sorted(CASES))
    return p


def _config(args) -> RunConfig:
    if args.command == "reproduce":
        cfg = case_config(args.figure)
        if args.out is None:
            args.out = str(Path("results") / args.figure)
    elif args.config is None:
        raise ConfigError("--config PATH is required")
    else:
        cfg = load_config(args.config)
    return cfg.with_overrides(epsilon=args.epsilon, split=args.split, solver=args.solver, trials=args.trials,
                              horizon=args.horizon, seed=args.seed, out=args.out)


def cmd_bound(cfg: RunConfig) -> int:
    b = select_bound(cfg)
    _emit(drift=b.drift, bound=b.method)
    if b.lam is not None:
        _emit(**{"lambda": b.lam, "lambda_at_domain_edge": b.boundary})
    if b.constants is not None:
        _emit(**b.constants.to_dict())
    if b.truncation is not None:
        _emit(premium_truncation=b.truncation)
    _emit(eps_tail=b.eps_tail, y=b.y, bound_at_y=float(b.bound(b.y)))
    write_bound(Path(cfg.out), b)
    return 0


def _report_certificate(res) -> None:
    c = res.certificate
    _emit(y=c.y, tail_term=c.tail_term, solver_error=c.solver_error, total_error=c.total_error,
          epsilon=c.epsilon, meets_request=c.meets_request)


def cmd_solve(cfg: RunConfig) -> int:
    res = solve(cfg)
    write_solution(Path(cfg.out), res)
    _report_certificate(res)
    if not res.certificate.meets_request:
        raise ToleranceNotMet(
            f"certified error {res.certificate.total_error:.6g} exceeds epsilon {cfg.epsilon:g}"
        )
    return 0


def cmd_validate(cfg: RunConfig, plot: bool = False) -> int:
    res = solve(cfg)
    out = Path(cfg.out)
    write_solution(out, res)
    val = validate(res)
    write_validation(out, res, val)
    if plot:
        from .plotting import plot_summary

        plot_summary(out / "figure.png", res, val, title=cfg.name)
    _report_certificate(res)
    print("z\ti\tpsi_tilde\tp_hat\tband\tpass")
    for r in val.rows:
        print(f"{r.z:g}\t{r.i:g}\t{r.psi_tilde:.6g}\t{r.estimate.p_hat:.6g}\t{r.band:.6g}\t{'ok' if r.passed else 'FAIL'}")
    _emit(points=len(val.rows), failed=len(val.failures))
    if not val.passed:
        raise ValidationFailed(f"{len(val.failures)} of {len(val.rows)} points outside epsilon + CI half-width")
    return 0


def cmd_reproduce(cfg: RunConfig) -> int:
    return cmd_validate(cfg, plot=True)


COMMANDS = {"bound": cmd_bound, "solve": cmd_solve, "validate": cmd_validate, "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](cfg)
    except RuinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
