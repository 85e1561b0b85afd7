"""Command-line interface: ``stressmoments <command> [options]``.

Exit codes: 0 success, 2 invalid configuration, 3 insufficient moment depth,
4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional

import mpmath

from . import __version__
from .analysis import accelerate_chain, extrapolate_fit, stieltjes_lower_bounds
from .applications import (NucleationQuery, PhysicalConstants, a0_constant, black_hole_count,
                           black_hole_mass_for_count, boltzmann_brain_exponent)
from .cache import cached_base_connected, default_cache_dir
from .distributions import (RHO_EM_FIT, ShiftedGammaParams, cdf_asymptotic_bound, cdf_upper_bound,
                            fitted_tail_probability, fractional_errors, model_fit_moments,
                            model_fit_pdf, shifted_gamma_moments, tail_fit, tail_validity_range)
from .kernel import (DEFAULT_DIGITS, MIN_DIGITS, ConvergenceError, InsufficientDepthError)
from .moments import (BUILTIN_OPERATORS, DEFAULT_N_MAX, MomentTable, OperatorSpec,
                      appendix_b_bounds, growth_diagnostics, rational_from_str, rational_to_str,
                      table_from_base, table_to_dict)

EXIT_OK, EXIT_CONFIG, EXIT_DEPTH, EXIT_CONVERGENCE = 0, 2, 3, 4

OPERATOR_ALIASES = {"phi2": "phi2", "phidot2": "phidot2", "E2": "E2", "B2": "B2",
                    "rhoS": "rhoS", "rhoEM": "rhoEM"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    operator: str = "phi2"
    n_max: int = DEFAULT_N_MAX
    digits: int = DEFAULT_DIGITS
    cache_dir: Optional[Path] = None
    output_format: str = "json"

    def validate(self):
        if self.n_max < 2:
            raise ConfigError("--n-max must be at least 2")
        if self.digits < MIN_DIGITS:
            raise ConfigError(f"--digits must be at least {MIN_DIGITS}")
        if self.output_format not in ("json", "csv"):
            raise ConfigError("--format must be json or csv")


# -- parsing helpers ------------------------------------------------------------

_UNITS = {
    "volume": {"cm3": 1, "m3": 10 ** 6, "": 1},
    "time": {"s": 1, "ms": mpmath.mpf("1e-3"), "yr": mpmath.mpf("3.15576e7"), "": 1},
    "length": {"cm": 1, "m": 100, "km": 10 ** 5, "": 1},
    "mass": {"kg": 1, "g": mpmath.mpf("1e-3"), "": 1},
}


def parse_quantity(text: str, kind: str) -> mpmath.mpf:
    """``"0.3s"`` -> 0.3 in the base unit of ``kind`` (cm3, s, cm, kg)."""
    m = re.fullmatch(r"\s*([-+0-9.eE]+)\s*([a-zA-Z0-9]*)\s*", text)
    if not m:
        raise ConfigError(f"cannot parse {kind} {text!r}")
    number, unit = m.groups()
    table = _UNITS[kind]
    if unit not in table:
        raise ConfigError(f"unknown {kind} unit {unit!r}; use one of {sorted(u for u in table if u)}")
    try:
        return mpmath.mpf(number) * table[unit]
    except ValueError:
        raise ConfigError(f"cannot parse number {number!r}") from None


def parse_range(text: str) -> list:
    """``"2..12"`` or ``"2:12"`` or ``"5"`` -> inclusive integer list."""
    m = re.fullmatch(r"\s*(\d+)\s*(?:(?:\.\.|:)\s*(\d+))?\s*", text)
    if not m:
        raise ConfigError(f"bad range {text!r}")
    lo = int(m.group(1))
    hi = int(m.group(2) or lo)
    if hi < lo:
        raise ConfigError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def parse_rationals(text: str) -> list:
    try:
        return [Fraction(s.strip()) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad rational list {text!r}") from None


def load_operator(name: str) -> OperatorSpec:
    if name in BUILTIN_OPERATORS:
        return BUILTIN_OPERATORS[name]
    path = Path(name)
    if path.is_file():
        try:
            data = json.loads(path.read_text())
            return OperatorSpec(data.get("name", path.stem), int(data["p"]),
                                tuple((rational_from_str(str(w)), int(m)) for w, m in data["weights"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad weights file {name}: {exc}") from None
    raise ConfigError(f"unknown operator {name!r}; choose from {sorted(BUILTIN_OPERATORS)} or a weights file")


def get_table(cfg: RunConfig, n_max: Optional[int] = None) -> MomentTable:
    spec = load_operator(cfg.operator)
    base = cached_base_connected(spec.p, n_max or cfg.n_max, cfg.cache_dir)
    return table_from_base(spec, base)


def fmt(v, digits: int) -> str:
    return mpmath.nstr(mpmath.mpf(v), digits, strip_zeros=False, min_fixed=-4, max_fixed=12)


def _json_out(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _csv_out(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- commands -------------------------------------------------------------------

def cmd_moments(args, cfg: RunConfig) -> str:
    table = get_table(cfg)
    if cfg.output_format == "csv":
        rows = [[n, rational_to_str(c), rational_to_str(a)]
                for n, (c, a) in enumerate(zip(table.connected, table.full))]
        return _csv_out(["n", "connected", "full"], rows)
    return _json_out(table_to_dict(table))


def _bounds(args, cfg):
    Ns = parse_range(args.N)
    table = get_table(cfg)
    if 2 * Ns[-1] - 1 > table.n_max:
        raise InsufficientDepthError(f"N = {Ns[-1]} needs --n-max >= {2 * Ns[-1] - 1}")
    return table, stieltjes_lower_bounds(table, Ns, cfg.digits)


def cmd_lower_bound(args, cfg: RunConfig) -> str:
    table, ys = _bounds(args, cfg)
    acc = dict(accelerate_chain(ys, parse_rationals(args.accelerate))) if args.accelerate else {}
    fit = None
    if args.extrapolate:
        lo, hi = parse_range(args.window)[0], parse_range(args.window)[-1]
        fit = extrapolate_fit(ys, parse_rationals(args.extrapolate), (lo, hi))
    d = cfg.digits
    if cfg.output_format == "csv":
        header = ["N", "y_N"] + (["accelerated"] if args.accelerate else [])
        rows = []
        for N, y in sorted(ys.items()):
            row = [N, fmt(y, d)]
            if args.accelerate:
                row.append(fmt(acc[N], d) if N in acc else "")
            rows.append(row)
        text = _csv_out(header, rows)
        if fit is not None:
            text += f"# y_infinity={fmt(fit.y_infinity, d)} max_residual={fmt(fit.max_residual, 5)}\n"
        return text
    out = {"operator": table.spec.name, "digits": d,
           "y_N": {str(N): fmt(y, d) for N, y in sorted(ys.items())}}
    if args.accelerate:
        out["accelerated"] = {"chain": args.accelerate,
                              "values": {str(N): fmt(v, d) for N, v in sorted(acc.items())}}
    if fit is not None:
        out["extrapolation"] = _fit_dict(fit, d)
    return _json_out(out)


def _fit_dict(fit, d) -> dict:
    return {"exponents": [str(e) for e in fit.exponents],
            "coefficients": [fmt(c, d) for c in fit.coefficients],
            "y_infinity": fmt(fit.y_infinity, d), "max_residual": fmt(fit.max_residual, 5)}


def cmd_accelerate(args, cfg: RunConfig) -> str:
    _, ys = _bounds(args, cfg)
    acc = accelerate_chain(ys, parse_rationals(args.chain))
    d = cfg.digits
    if cfg.output_format == "csv":
        return _csv_out(["N", "accelerated"], [[N, fmt(v, d)] for N, v in acc])
    return _json_out({"operator": cfg.operator, "chain": args.chain,
                      "values": {str(N): fmt(v, d) for N, v in acc}})


def cmd_extrapolate(args, cfg: RunConfig) -> str:
    _, ys = _bounds(args, cfg)
    w = parse_range(args.window)
    fit = extrapolate_fit(ys, parse_rationals(args.exponents), (w[0], w[-1]))
    out = dict(_fit_dict(fit, cfg.digits), operator=cfg.operator, window=[w[0], w[-1]])
    if cfg.output_format == "csv":
        return _csv_out(["quantity", "value"], [["y_infinity", out["y_infinity"]],
                                                ["max_residual", out["max_residual"]]])
    return _json_out(out)


def cmd_tail(args, cfg: RunConfig) -> str:
    pair = tuple(int(s) for s in args.n_pair.split(","))
    if len(pair) != 2:
        raise ConfigError("--n-pair takes two integers")
    table = get_table(cfg, max(cfg.n_max, pair[0] + 1, pair[1]))
    t = tail_fit(table, pair, cfg.digits)
    lo, hi = tail_validity_range(t, 4, pair[1])
    d = min(cfg.digits, 20)
    out = {"operator": table.spec.name, "n_pair": list(pair), "c0": fmt(t.c0, d), "a": fmt(t.a, d),
           "b": t.b, "c": str(t.c), "C": fmt(t.C, d), "D": fmt(t.D, d),
           "validity_x_lo": fmt(lo, 8), "validity_x_hi": fmt(hi, 8)}
    if cfg.output_format == "csv":
        return _csv_out(["quantity", "value"], sorted(out.items()))
    return _json_out(out)


def cmd_fit(args, cfg: RunConfig) -> str:
    if args.grid:
        lo, hi, count = args.grid.split(":")
        lo, hi, count = mpmath.mpf(lo), mpmath.mpf(hi), int(count)
        xs = [lo + (hi - lo) * i / (count - 1) for i in range(count)] if count > 1 else [lo]
        return _csv_out(["x", "P"], [[fmt(x, 12), fmt(model_fit_pdf(RHO_EM_FIT, x), 12)] for x in xs])
    n_fit = args.moments
    # the model constants describe rhoEM, so compare against its moments whatever --operator says
    table = get_table(replace(cfg, operator="rhoEM"), max(n_fit, 2))
    fitted = model_fit_moments(RHO_EM_FIT, n_fit, mpmath.mpf(args.tol))
    errs = fractional_errors(fitted, table.full[:n_fit + 1])
    rows = [[n, fmt(m, 12), "" if e is None else fmt(e, 6)] for n, (m, e) in enumerate(zip(fitted, errs))]
    if cfg.output_format == "csv":
        return _csv_out(["n", "fit_moment", "fractional_error"], rows)
    return _json_out({"operator": "rhoEM", "moments": [r[1] for r in rows],
                      "fractional_errors": [r[2] or None for r in rows]})


def cmd_cdf_bound(args, cfg: RunConfig) -> str:
    table = get_table(cfg)
    tail = tail_fit(table) if table.n_max >= 65 else None
    lams = [mpmath.mpf(s) for s in args.lam.split(",")]
    rows = []
    for lam in lams:
        b, n = cdf_upper_bound(table, lam, return_index=True)
        row = [fmt(lam, 8), fmt(b, 10), "" if n is None else n]
        if tail is not None:
            row += [fmt(cdf_asymptotic_bound(tail, lam), 10), fmt(fitted_tail_probability(tail, lam), 10)]
        rows.append(row)
    header = ["lambda", "bound", "argmin_n"] + (["asymptotic_bound", "fitted_tail"] if tail else [])
    if cfg.output_format == "csv":
        return _csv_out(header, rows)
    return _json_out({"operator": table.spec.name, "rows": [dict(zip(header, r)) for r in rows]})


def _constants(args) -> PhysicalConstants:
    return PhysicalConstants(cm_per_second=args.cm_per_second, planck_length_cm=args.planck_length)


def cmd_nucleation(args, cfg: RunConfig) -> str:
    if (args.count is None) == (args.mass is None):
        raise ConfigError("give exactly one of --count and --mass")
    consts = _constants(args)
    table = get_table(cfg, max(cfg.n_max, 65))
    tail = tail_fit(table)
    common = dict(volume_cm3=parse_quantity(args.volume, "volume"), time_s=parse_quantity(args.time, "time"),
                  planck_four_volume=mpmath.mpf(args.four_volume) if args.four_volume else None)
    out = {"operator": table.spec.name, "a0": fmt(a0_constant(tail), 10)}
    if args.count is not None:
        q = NucleationQuery(expected_count=mpmath.mpf(args.count), **common)
        mass = black_hole_mass_for_count(q, tail, consts)
        out.update(count=args.count, mass_planck=fmt(mass, 10),
                   mass_g=fmt(mass * consts.planck_mass_g, 6))
    else:
        q = NucleationQuery(mass_in_planck_units=mpmath.mpf(args.mass), **common)
        out.update(mass_planck=args.mass, count=fmt(black_hole_count(q, tail, consts), 10))
    out["planck_four_volume"] = fmt(q.four_volume(consts), 6)
    if cfg.output_format == "csv":
        return _csv_out(["quantity", "value"], sorted(out.items()))
    return _json_out(out)


def cmd_brain(args, cfg: RunConfig) -> str:
    consts = _constants(args)
    e = boltzmann_brain_exponent(parse_quantity(args.mass, "mass"), parse_quantity(args.size, "length"),
                                 parse_quantity(args.time, "time"), consts)
    out = {"exponent": fmt(e, 6), "log10_exponent": fmt(mpmath.log10(e), 6)}
    if cfg.output_format == "csv":
        return _csv_out(["quantity", "value"], sorted(out.items()))
    return _json_out(out)


def cmd_gamma_moments(args, cfg: RunConfig) -> str:
    if args.central_charge is not None:
        params = ShiftedGammaParams.from_central_charge(mpmath.mpf(args.central_charge))
    else:
        params = ShiftedGammaParams(Fraction(args.x0), Fraction(args.alpha), Fraction(args.beta))
    moments = shifted_gamma_moments(params, cfg.n_max)
    vals = [rational_to_str(m) if isinstance(m, Fraction) else fmt(m, cfg.digits) for m in moments]
    if cfg.output_format == "csv":
        return _csv_out(["n", "moment"], list(enumerate(vals)))
    return _json_out({"moments": vals})


def cmd_diagnostics(args, cfg: RunConfig) -> str:
    table = get_table(cfg)
    g = growth_diagnostics(table, cfg.digits)
    out = {"operator": table.spec.name, "n_max": table.n_max,
           "factorial_order_estimate": fmt(g.factorial_order_estimate, 8),
           "hamburger_margin": [fmt(x, 8) for x in g.hamburger_margin],
           "stieltjes_margin": [fmt(x, 8) for x in g.stieltjes_margin]}
    if table.n_max >= 3:
        b = appendix_b_bounds(table.spec.p, table.n_max, cfg.digits)
        out["appendix_b"] = {"n": table.n_max, "J_n": rational_to_str(b.J_n), "lower": fmt(b.lower, 12),
                             "upper": fmt(b.upper, 12), "alpha_growth": fmt(b.alpha_growth, 11),
                             "beta_growth": fmt(b.beta_growth, 11)}
    if cfg.output_format == "csv":
        rows = [[n + 2, h, s] for n, (h, s) in enumerate(zip(out["hamburger_margin"], out["stieltjes_margin"]))]
        return _csv_out(["n", "hamburger_margin", "stieltjes_margin"], rows)
    return _json_out(out)


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stressmoments", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--operator", default="phi2",
                        help="phi2, phidot2, E2, B2, rhoS, rhoEM or a JSON weights file")
    common.add_argument("--n-max", type=int, default=DEFAULT_N_MAX, help="highest moment index")
    common.add_argument("--digits", type=int, default=DEFAULT_DIGITS, help="working precision in digits")
    common.add_argument("--format", dest="output_format", default="json", choices=["json", "csv"])
    common.add_argument("--cache-dir", type=Path, default=None,
                        help="cache directory (default: $STRESSMOMENTS_CACHE or ~/.cache/stressmoments)")
    common.add_argument("--output", "-o", type=Path, default=None, help="write to file instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("moments", parents=[common], help="exact connected and full moments")

    for name, helptext in (("lower-bound", "Stieltjes lower bounds y_N"),
                           ("accelerate", "accelerated y_N sequence"),
                           ("extrapolate", "least-squares y_infinity")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--N", default="2..12", help="range of N, e.g. 2..12")
        if name == "lower-bound":
            p.add_argument("--accelerate", default=None, help="chain of k values, innermost first, e.g. 1,2")
            p.add_argument("--extrapolate", default=None, help="basis exponents, e.g. 0,1,2")
            p.add_argument("--window", default="21:33")
        elif name == "accelerate":
            p.add_argument("--chain", default="1,2", help="k values, innermost first")
        else:
            p.add_argument("--exponents", default="0,1,2")
            p.add_argument("--window", default="21:33")

    p = sub.add_parser("tail", parents=[common], help="tail parameters c0, a")
    p.add_argument("--n-pair", default="64,65")

    p = sub.add_parser("fit", parents=[common], help="moments of the two-term model density")
    p.add_argument("--moments", type=int, default=21, help="highest fitted moment")
    p.add_argument("--tol", default="1e-10")
    p.add_argument("--grid", default=None, help="x_lo:x_hi:count, emit (x, P(x)) CSV")

    p = sub.add_parser("cdf-bound", parents=[common], help="tail-probability bounds")
    p.add_argument("--lambda", dest="lam", default="1e6", help="comma-separated lambda values")

    for name in ("nucleation", "brain"):
        p = sub.add_parser(name, parents=[common],
                           help="black-hole nucleation" if name == "nucleation" else "Boltzmann-brain exponent")
        p.add_argument("--cm-per-second", default="3e10")
        p.add_argument("--planck-length", default="1e-33", help="Planck length in cm")
        p.add_argument("--time", default="1s")
        if name == "nucleation":
            p.add_argument("--volume", default="1cm3")
            p.add_argument("--count", default=None)
            p.add_argument("--mass", default=None, help="black-hole mass in Planck masses")
            p.add_argument("--four-volume", default=None, help="V T / l_p^4 directly")
        else:
            p.add_argument("--mass", default="1kg")
            p.add_argument("--size", default="10cm")

    p = sub.add_parser("gamma-moments", parents=[common], help="shifted Gamma moments")
    p.add_argument("--alpha", default="1/72")
    p.add_argument("--beta", default="1/12")
    p.add_argument("--x0", default="1/6")
    p.add_argument("--central-charge", default=None, help="use the 2D CFT parameters instead")

    sub.add_parser("diagnostics", parents=[common], help="moment-growth diagnostics")
    return parser


COMMANDS = {
    "moments": cmd_moments, "lower-bound": cmd_lower_bound, "accelerate": cmd_accelerate,
    "extrapolate": cmd_extrapolate, "tail": cmd_tail, "fit": cmd_fit, "cdf-bound": cmd_cdf_bound,
    "nucleation": cmd_nucleation, "brain": cmd_brain, "gamma-moments": cmd_gamma_moments,
    "diagnostics": cmd_diagnostics,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = RunConfig(args.operator, args.n_max, args.digits,
                    args.cache_dir or default_cache_dir(), args.output_format)
    try:
        cfg.validate()
        with mpmath.workdps(cfg.digits + 10):
            text = COMMANDS[args.command](args, cfg)
    except InsufficientDepthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEPTH
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.output is not None:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
