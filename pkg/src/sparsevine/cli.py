"""Command-line interface: ``sparsevine {fit,simulate,simstudy,backtest}``.

Exit codes: 0 success, 2 input error, 3 numeric error, 4 configuration
error (including bad flags), 1 anything else raised by the library.
"""

from __future__ import annotations

import argparse
import io
import sys
import time
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import fit as vfit
from . import persist, risk, sim
from .bicop import FamilyId
from .criteria import CriterionConfig, CriterionKind
from .errors import ConfigError, InputError, VineError
from .fit import AUTO, FitConfig

__all__ = ["main", "build_parser"]

_FAMILY_ALIASES = {"t": FamilyId.STUDENT_T, "indep": FamilyId.INDEPENDENCE}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ConfigError.exit_code, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _families(text: str) -> tuple[FamilyId, ...]:
    out = []
    for name in (x.strip().lower() for x in text.split(",") if x.strip()):
        try:
            out.append(_FAMILY_ALIASES.get(name) or FamilyId(name))
        except ValueError:
            known = ", ".join(f.value for f in FamilyId)
            raise argparse.ArgumentTypeError(f"unknown family {name!r} (known: {known})") from None
    return tuple(out)


def _threshold(text: str):
    if text == AUTO:
        return AUTO
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from None


def _truncation(text: str):
    if text == AUTO:
        return AUTO
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {text!r}") from None


def _add_common(p: argparse.ArgumentParser, output_required: bool = False) -> None:
    p.add_argument("--seed", type=int, default=0, help="top-level random seed (default 0)")
    p.add_argument("--threads", type=int, default=1, help="parallelism degree (results do not depend on it)")
    p.add_argument("--output", "-o", required=output_required, default=None if output_required else "-",
                   help="output path ('-' for stdout)")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--criterion", choices=[k.value for k in CriterionKind], default="mbicv")
    p.add_argument("--psi0", type=float, default=0.9, help="prior base probability of mBICV (default 0.9)")
    p.add_argument("--families", type=_families, default=None,
                   help="comma-separated families (default: all); e.g. gaussian,t,clayton,gumbel,frank,joe")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sparsevine", description="Sparse vine copula models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a vine copula model")
    p.add_argument("--input", "-i", required=True, help="comma-separated data with header")
    p.add_argument("--raw", action="store_true",
                   help="input is a returns panel (first column dates); fit ARMA-GARCH margins and use their PIT")
    _add_model_flags(p)
    p.add_argument("--threshold", type=_threshold, default=0.0, help="'auto' or a number in [0, 1] (default 0)")
    p.add_argument("--truncation", type=_truncation, default=None, help="'auto' or a number of trees (default: none)")
    p.add_argument("--memory", choices=["full", "lean"], default="full")
    p.add_argument("--diagnostics", default="-", help="where to write the diagnostics table (default stdout)")
    p.add_argument("--cv", action="store_true", help="add 5-fold cross-validated log-likelihood to diagnostics")
    p.add_argument("--timings", action="store_true", help="add wall-clock seconds (output no longer reproducible)")
    p.add_argument("--variance-form", choices=[f.value for f in risk.VarianceForm], default="eps2",
                   help="GARCH recursion driver for --raw: eps2 (standardized innovation) or a2 (shock)")
    _add_common(p, output_required=True)

    p = sub.add_parser("simulate", help="sample from a saved model")
    p.add_argument("--input", "-i", required=True, help="model file")
    p.add_argument("--n", type=int, required=True, help="number of rows")
    _add_common(p)

    p = sub.add_parser("simstudy", help="family-wise error rates of BIC and mBICV")
    p.add_argument("--regimes", type=_floats, default=sim.DEFAULT_EXPONENTS, help="dimension exponents")
    p.add_argument("--sizes", type=_ints, default=sim.DEFAULT_SIZES, help="sample sizes")
    p.add_argument("--reps", type=int, default=100, help="replications per sample size")
    p.add_argument("--psi0", type=float, default=0.9)
    _add_common(p)

    p = sub.add_parser("backtest", help="rolling Value-at-Risk backtest on a returns panel")
    p.add_argument("--input", "-i", required=True, help="returns panel: first column dates, header row")
    p.add_argument("--train", type=int, default=1260)
    p.add_argument("--test", type=int, default=252)
    p.add_argument("--levels", type=_floats, default=risk.DEFAULT_LEVELS)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--models", default="bic,threshold,truncation",
                   help="subset of bic (full BIC fit), threshold (mBICV, automatic threshold), "
                        "truncation (mBICV, automatic truncation)")
    p.add_argument("--psi0", type=float, default=0.9)
    p.add_argument("--families", type=_families, default=None)
    p.add_argument("--variance-form", choices=[f.value for f in risk.VarianceForm], default="eps2")
    _add_common(p)
    return parser


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _fit_config(args, threshold, trunc) -> FitConfig:
    kwargs = dict(
        criterion=CriterionConfig(args.criterion, args.psi0),
        threshold=threshold,
        trunc_level=trunc,
        seed=args.seed,
        threads=args.threads,
    )
    if args.families is not None:
        kwargs["families"] = args.families
    if getattr(args, "memory", None):
        kwargs["memory_mode"] = args.memory
    return FitConfig(**kwargs)


def _cmd_fit(args) -> int:
    config = _fit_config(args, args.threshold, args.truncation)
    table = persist.read_table(args.input, label_column=args.raw)
    data = table.values
    if args.raw:
        margins = risk.fit_margins(data, risk.VarianceForm(args.variance_form), args.threads)
        data = np.column_stack([risk.pit(m) for m in margins])
    cache = vfit.FitCache(config.memory_mode)
    start = time.perf_counter()
    rows: list[tuple] = []  # (theta, trunc_level, criterion, q, seconds)
    if config.threshold == AUTO and config.trunc_level == AUTO:
        model, trace = vfit.select_joint(data, config, cache=cache)
        rows = [(s.theta, s.trunc_level, s.criterion, s.q, s.seconds) for s in trace.steps]
    elif config.threshold == AUTO:
        model, trace = vfit.select_threshold(data, config, cache=cache)
        rows = [(s.theta, s.trunc_level, s.criterion, s.q, s.seconds) for s in trace.steps]
    elif config.trunc_level == AUTO:
        model, steps = vfit.select_truncation(data, config, cache=cache)
        rows = [(model.threshold, s.trunc_level, s.criterion, s.q, s.seconds) for s in steps]
    else:
        model = vfit.fit_vine(data, config, cache=cache)
        rows = [(model.threshold, model.trunc_level, model.criterion_value, model.q, time.perf_counter() - start)]
    elapsed = time.perf_counter() - start

    meta = {"names": list(table.names), "input": "returns" if args.raw else "copula"}
    if args.timings:
        meta["seconds"] = elapsed
    persist.save_model(model, args.output, meta)

    q_max = model.d * (model.d - 1) // 2
    header = ["step", "theta", "trunc_level", model.criterion.kind.value, "q", "q_over_qmax"]
    if args.cv:
        header.append("cv_loglik")
    if args.timings:
        header.append("seconds")
    buf = io.StringIO()
    buf.write(f"# selected: theta = {model.threshold!r}, trunc_level = {model.trunc_level}, q = {model.q}\n")
    buf.write(",".join(header) + "\n")
    for k, (theta, trunc, crit, q, secs) in enumerate(rows):
        cells = [str(k), repr(float(theta)), str(trunc), repr(float(crit)), str(q), repr(q / q_max)]
        if args.cv:
            cv_config = config.replace(threshold=float(theta), trunc_level=int(trunc))
            cells.append(repr(float(sum(vfit.cross_validate(data, cv_config, folds=5, seed=args.seed)))))
        if args.timings:
            cells.append(f"{secs:.3f}")
        buf.write(",".join(cells) + "\n")
    _write_text(args.diagnostics, buf.getvalue())
    return 0


def _cmd_simulate(args) -> int:
    model, meta = persist.load_model(args.input)
    if args.n < 1:
        raise ConfigError(f"--n must be positive, got {args.n}")
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 1]))
    u = sim.rvine_sample(model, args.n, rng)
    names = meta.get("names") or [f"V{k + 1}" for k in range(model.d)]
    if len(names) != model.d:
        names = [f"V{k + 1}" for k in range(model.d)]
    fh = _open_out(args.output)
    try:
        persist.write_table(fh, names, u)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def _cmd_simstudy(args) -> int:
    if args.reps < 1:
        raise ConfigError(f"--reps must be positive, got {args.reps}")
    regimes = [sim.RegimeSpec(e, args.sizes, args.reps, args.psi0) for e in args.regimes]
    report = sim.run_consistency_study(regimes, seed=args.seed, threads=args.threads)
    fh = _open_out(args.output)
    try:
        report.write(fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


_BACKTEST_MODELS = {
    "bic": dict(criterion="bic", threshold=0.0, trunc=None),
    "threshold": dict(criterion="mbicv", threshold=AUTO, trunc=None),
    "truncation": dict(criterion="mbicv", threshold=0.0, trunc=AUTO),
}


def _cmd_backtest(args) -> int:
    names = [m.strip() for m in args.models.split(",") if m.strip()]
    unknown = [m for m in names if m not in _BACKTEST_MODELS]
    if unknown or not names:
        raise ConfigError(f"unknown model(s) {unknown}; choose from {', '.join(_BACKTEST_MODELS)}")
    if args.test < 1 or args.train < 1:
        raise ConfigError("--train and --test must be positive")
    table = persist.read_table(args.input, label_column=True)
    reports = {}
    for name in names:
        choice = _BACKTEST_MODELS[name]
        kwargs = dict(criterion=CriterionConfig(choice["criterion"], args.psi0), threshold=choice["threshold"],
                      trunc_level=choice["trunc"])
        if args.families is not None:
            kwargs["families"] = args.families
        config = risk.BacktestConfig(
            fit=FitConfig(**kwargs),
            levels=args.levels,
            draws=args.draws,
            seed=args.seed,
            form=args.variance_form,
            threads=args.threads,
        )
        reports[name] = risk.rolling_backtest(table.values, args.train, args.test, config)
    fh = _open_out(args.output)
    try:
        risk.write_backtest_table(reports, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


_COMMANDS = {"fit": _cmd_fit, "simulate": _cmd_simulate, "simstudy": _cmd_simstudy, "backtest": _cmd_backtest}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return _COMMANDS[args.command](args)
    except VineError as exc:
        print(f"sparsevine {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"sparsevine {args.command}: {exc}", file=sys.stderr)
        return InputError.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
