"""Command-line driver: ``fracedge expand | rates | verify | smooth-demo | fractional-check``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import sys
from dataclasses import dataclass, field
from math import floor
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import checks
from .charfun import get_model, model_names
from .edgeworth import EdgeworthApproximant, ExpansionOrder, pk_polynomial, qk_density_term
from .errors import (
    BoundsError,
    ConfigurationError,
    FracEdgeError,
    NumericError,
    PreconditionError,
)
from .gridoracle import (
    invert_charfn,
    normalized_sum_density,
    tv_error,
    weighted_error_report,
)
from .smoothing import first_good_n, modified_density, threshold_split
from .gridoracle import GridDensity

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class InvariantFailure(FracEdgeError):
    pass


@dataclass
class ExperimentConfig:
    model: str = "uniform"
    s: float = 4.0
    m: Optional[int] = None
    n_list: list[int] = field(default_factory=lambda: [4, 8, 16, 32, 64, 128, 256])
    L: Optional[float] = None
    h: float = 1.0 / 256.0
    t_rule: str = "auto"
    t_cutoff: Optional[float] = None
    t_scale: float = 1.0
    tail_budget: float = 1e-12
    weights: Optional[list[float]] = None
    window: float = 12.0
    x_step: float = 1.0 / 64.0
    primary: Optional[str] = None
    oracle_tolerance: Optional[float] = None
    out: Optional[str] = None

    def __post_init__(self) -> None:
        model = get_model(self.model)
        if self.s < 2:
            raise ConfigurationError(f"s must be >= 2, got {self.s}")
        if self.s > model.s_max:
            raise ConfigurationError(f"s={self.s} exceeds the moment order {model.s_max} of {self.model}")
        if self.m is None:
            self.m = int(floor(self.s))
        if self.m < 2 or self.m > floor(self.s):
            raise ConfigurationError(f"m must lie in [2, floor(s)], got {self.m}")
        if not self.n_list or any(n < 2 for n in self.n_list):
            raise ConfigurationError("n_list must be non-empty with every n >= 2")
        if list(self.n_list) != sorted(self.n_list):
            raise ConfigurationError("n_list must be sorted ascending")
        if self.t_rule not in ("auto", "fixed", "scaled"):
            raise ConfigurationError(f"t_rule must be auto, fixed or scaled, got {self.t_rule!r}")
        if self.t_rule == "fixed" and not self.t_cutoff:
            raise ConfigurationError("t_rule=fixed needs t_cutoff")
        if self.weights is None:
            self.weights = [0.0, float(self.m), float(self.s)]
        if self.primary is None:
            self.primary = "inversion" if np.isfinite(model.s_max) else "convolution"
        if self.primary not in ("convolution", "inversion"):
            raise ConfigurationError(f"primary oracle must be convolution or inversion, got {self.primary!r}")
        if self.oracle_tolerance is None:
            self.oracle_tolerance = 1e-3 if self.primary == "inversion" else 1e-4

    @classmethod
    def from_mapping(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        d = dataclasses.asdict(self)
        d.pop("out")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    def support_half_width(self, n: int) -> float:
        """Explicit ``L``, or the smallest multiple of 8 (at least 16) whose tails hold < 1e-9/n."""
        if self.L is not None:
            return self.L
        model = get_model(self.model)
        L = 16.0
        while L < 256.0 and model.cdf(-L) + model.sf(L) > 1e-9 / n:
            L += 8.0
        return L

    def cutoff(self, n: int) -> Optional[float]:
        if self.t_rule == "fixed":
            return self.t_cutoff
        if self.t_rule == "scaled":
            return self.t_scale * n ** (1.0 / 6.0)
        return None


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _poly_terms(poly, var: str = "t") -> str:
    parts = []
    for j, c in enumerate(poly.coeffs):
        c = complex(c)
        if c == 0:
            continue
        val = c.real if c.imag == 0 else c
        parts.append(f"{val:+.12g}*{var}^{j}")
    return " ".join(parts) if parts else "0"


def cmd_expand(model_name: str, m: int) -> str:
    model = get_model(model_name)
    if m > model.s_max:
        raise ConfigurationError(f"m={m} exceeds the moment order {model.s_max} of {model_name}")
    if m < 2:
        raise ConfigurationError("m must be at least 2")
    cum = model.cumulants(m)
    lines = [f"model {model.name}, m = {m}"]
    for k in range(3, m + 1):
        lines.append(f"gamma_{k} = {cum[k]:.12g}")
    for k in range(1, m - 1):
        lines.append(f"P_{k}(t) = {_poly_terms(pk_polynomial(k, cum))}")
    for k in range(1, m - 1):
        q = qk_density_term(k, cum)
        herm = " ".join(f"{c:+.12g}*He_{j}(x)" for j, c in q.hermite_coeffs) or "0"
        lines.append(f"q_{k}(x) = phi(x) * [{herm}]")
    if m == 2:
        lines.append("no correction terms for m = 2")
    return "\n".join(lines) + "\n"


def _slope(ns: Sequence[int], errs: Sequence[float]) -> tuple[float, float] | None:
    ns, errs = np.asarray(ns, dtype=float), np.asarray(errs, dtype=float)
    half = len(ns) // 2
    x, y = ns[half:], errs[half:]
    if len(x) < 2 or np.any(y <= 0) or np.max(errs) < 1e-11:
        return None
    fit = stats.linregress(np.log(x), np.log(y))
    return float(fit.slope), float(fit.stderr)


@dataclass
class RatesResult:
    rows: list[dict]
    slopes: dict[str, Optional[tuple[float, float]]]
    csv_text: str


RATE_COLUMNS = ("sup_err_w0", "sup_err_wm", "sup_err_ws", "tv_err")


def _rate_row(cfg: ExperimentConfig, n: int) -> dict:
    model = get_model(cfg.model)
    order = ExpansionOrder(cfg.s)
    approx = EdgeworthApproximant(order, model.cumulants(cfg.m), n)
    if cfg.primary == "convolution":
        primary = normalized_sum_density(model, n, L=cfg.support_half_width(n), h=cfg.h).restricted(cfg.window)
        grid = primary.x
    else:
        half = int(round(cfg.window / cfg.x_step))
        grid = np.arange(-half, half + 1) * cfg.x_step
        primary = invert_charfn(model, n, cfg.cutoff(n), grid, tail_budget=cfg.tail_budget)
    check_window = 8.0
    if cfg.primary == "convolution":
        other = invert_charfn(model, n, cfg.cutoff(n), primary.restricted(check_window).x, tail_budget=cfg.tail_budget)
        gap = float(np.max(np.abs(primary.restricted(check_window).values - other.values)))
    else:
        conv = normalized_sum_density(model, n, L=max(cfg.support_half_width(n), 64.0), h=cfg.h, budget=1e-3).restricted(check_window)
        gap = float(np.max(np.abs(conv.values - primary.at(conv.x))))
    if gap > cfg.oracle_tolerance:
        raise InvariantFailure(f"n={n}: oracles disagree by {gap:.3e} > {cfg.oracle_tolerance:.1e}")
    w0, wm, ws = (weighted_error_report(primary, approx, w) for w in cfg.weights)
    row = {
        "n": n,
        "sup_err_w0": w0.value,
        "sup_err_wm": wm.value,
        "sup_err_ws": ws.value,
        "tv_err": tv_error(primary, approx),
        "oracle_gap": gap,
        "edge_flag": int(w0.boundary_flag or wm.boundary_flag or ws.boundary_flag),
    }
    return row


def cmd_rates(cfg: ExperimentConfig) -> RatesResult:
    rows = [_rate_row(cfg, n) for n in cfg.n_list]
    buf = io.StringIO()
    buf.write(f"# fracedge rates config_sha256={cfg.digest()}\n")
    buf.write(f"# config={cfg.to_json()}\n")
    w = csv.writer(buf, lineterminator="\n")
    cols = ["n", *RATE_COLUMNS, "oracle_gap", "edge_flag"]
    w.writerow(cols)
    for r in rows:
        w.writerow([r["n"]] + [_fmt(r[c]) for c in cols[1:-1]] + [r["edge_flag"]])
    slopes = {}
    ns = [r["n"] for r in rows]
    for c in RATE_COLUMNS:
        sl = _slope(ns, [r[c] for r in rows])
        slopes[c] = sl
        if sl is None:
            buf.write(f"# slope {c}: undefined (errors at grid-noise level or too few n)\n")
        else:
            buf.write(f"# slope {c}: {sl[0]:.6f} +- {sl[1]:.6f} (upper half of n_list)\n")
    return RatesResult(rows, slopes, buf.getvalue())


def cmd_verify(suite: str) -> tuple[int, str]:
    if suite not in (*checks.SUITES, "all"):
        raise ConfigurationError(f"unknown suite {suite!r}")
    results = checks.run_suite(suite)
    lines = [f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail}" for r in results]
    failed = [r for r in results if not r.ok]
    if failed:
        lines.append(f"first failure: {failed[0].name} ({failed[0].detail})")
    return (EXIT_INVARIANT if failed else EXIT_OK), "\n".join(lines) + "\n"


def cmd_smooth_demo(c: float, n_list: Sequence[int], m: int = 2, model_name: str = "chi2_1", L: float = 32.0) -> tuple[int, str]:
    if not (0.0 < c < 1.0):
        raise ConfigurationError(f"c must lie in (0, 1), got {c}")
    model = get_model(model_name)
    rho = GridDensity.from_model(model, L=L)
    d = threshold_split(rho, c)
    buf = io.StringIO()
    buf.write(f"# smooth-demo model={model_name} c={c} m={m} M={_fmt(d.M)} a={_fmt(d.a)} b={_fmt(d.b)} trivial={d.trivial}\n")
    n1 = None if d.trivial else first_good_n(m, d.a, d.b, c)
    buf.write(f"# n_1 (smallest n with beta_n < c^n/2 from there on) = {n1 if not d.trivial else 'all n > m+1'}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "beta_n", "tv_gap", "bound_2beta", "c_pow_n"])
    status = EXIT_OK
    for n in n_list:
        if n < m + 2:
            buf.write(f"# n={n} skipped: needs n >= m+2\n")
            continue
        rep = modified_density(d, n, m)
        w.writerow([n, _fmt(rep.beta_n), _fmt(rep.tv_gap), _fmt(rep.bound_2beta), _fmt(c**n)])
        if not rep.within_bound:
            buf.write(f"# INVARIANT FAILURE at n={n}: tv_gap exceeds 2 beta_n\n")
            status = EXIT_INVARIANT
    return status, buf.getvalue()


def cmd_fractional_check() -> tuple[int, str]:
    return cmd_verify("fractional")


def _load_config(args) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")
    for key in ("model", "s", "m", "n_list", "L", "h", "t_rule", "t_cutoff", "t_scale", "tail_budget", "weights", "window", "primary", "out"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    return ExperimentConfig.from_mapping(data)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracedge", description="Edgeworth expansions with fractional moments: builders, oracles and checks.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("expand", help="print cumulants, P_k and q_k for a model")
    e.add_argument("--model", required=True, choices=model_names())
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--out")

    r = sub.add_parser("rates", help="error-rate experiment, CSV output")
    r.add_argument("--config")
    r.add_argument("--model", choices=model_names())
    r.add_argument("--s", type=float)
    r.add_argument("--m", type=int)
    r.add_argument("--n-list", dest="n_list", type=_int_list)
    r.add_argument("--L", type=float)
    r.add_argument("--h", type=float)
    r.add_argument("--t-rule", dest="t_rule", choices=["auto", "fixed", "scaled"])
    r.add_argument("--t-cutoff", dest="t_cutoff", type=float)
    r.add_argument("--t-scale", dest="t_scale", type=float)
    r.add_argument("--tail-budget", dest="tail_budget", type=float)
    r.add_argument("--weights", type=_float_list)
    r.add_argument("--window", type=float)
    r.add_argument("--primary", choices=["convolution", "inversion"])
    r.add_argument("--out")

    v = sub.add_parser("verify", help="run an invariant battery")
    v.add_argument("suite", choices=[*checks.SUITES, "all"])
    v.add_argument("--out")

    s = sub.add_parser("smooth-demo", help="binomial smoothing of the chi-square(1) density, CSV output")
    s.add_argument("--c", type=float, default=0.5)
    s.add_argument("--n-list", dest="n_list", type=_int_list, default=list(range(2, 21)))
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--model", default="chi2_1", choices=model_names())
    s.add_argument("--out")

    f = sub.add_parser("fractional-check", help="Liouville operator identities")
    f.add_argument("--out")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "expand":
            _emit(cmd_expand(args.model, args.m), args.out)
            return EXIT_OK
        if args.command == "rates":
            cfg = _load_config(args)
            res = cmd_rates(cfg)
            _emit(res.csv_text, cfg.out)
            return EXIT_OK
        if args.command == "verify":
            code, text = cmd_verify(args.suite)
        elif args.command == "smooth-demo":
            code, text = cmd_smooth_demo(args.c, args.n_list, args.m, args.model)
        else:
            code, text = cmd_fractional_check()
        _emit(text, args.out)
        return code
    except InvariantFailure as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigurationError, PreconditionError, BoundsError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
