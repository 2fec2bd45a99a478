"""Command-line driver: reproducible parameter sweeps and validation runs.

Usage::

    qregress fig1|fig2|sweep|check [--param value ...] [--config path]
                                   [--out path] [--format csv|json]

Parameters are resolved as flag > key=value config file > built-in
default.  Output bytes depend only on the resolved configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import __version__
from .criteria import blp_measure, epsilon, qrt_npcf, rhp_divisibility
from .errors import InstabilityError, MapSingularityError, QRegressError
from .models import (ClosedAmplitude, DecayMap, EngineeredDephasingMap, ThermalDephasingMap,
                     closed_G_lorentzian, exact_tpcf_decay, exact_tpcf_dephasing,
                     exact_tpcf_engineered, solve_G_volterra)
from .oracle import DecayDilation, discretize, oracle_tpcf_decay, pq_decomposition
from .qalg import P_UP, SM, SP, SZ, ket_plus, projector
from .spectral import EngineeredDistribution, LorentzianBath, OhmicBath, peak_count

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_VALIDATION = 3

COMMANDS = ("fig1", "fig2", "sweep", "check")


class UsageError(Exception):
    """Invalid command line or configuration; the message names the field."""


# -- configuration ------------------------------------------------------------------

def _int(s):
    return int(s)


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _float_or_inf(s):
    return float(s)


def _opt_float(s):
    if s is None or str(s).lower() in ("", "none", "auto"):
        return None
    return _float(s)


def _int_list(s):
    vals = [int(x) for x in str(s).split(",") if x.strip()]
    if not vals:
        raise ValueError("empty list")
    return vals


def _choice(*options):
    def parse(s):
        s = str(s)
        if s not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return s
    return parse


_DECAY = {"omega0": (_float, 20.0), "lam": (_float, 1.1), "delta": (_float, 0.2)}
_ENGINEERED = {"omega_bar": (_float, 1.0), "sigma": (_float, 0.1),
               "delta_max": (_float, 0.5), "delta_n": (_float, 1.0)}
_THERMAL = {"ohmic_lam": (_float, 1.0), "beta": (_float_or_inf, 10.0)}
_GAMMA_GRID = {"gamma0_min": (_float, 0.0), "gamma0_max": (_float, 1.0),
               "gamma0_count": (_int, 101)}

SCHEMA: dict = {
    "fig1": {
        **_DECAY, **_GAMMA_GRID,
        "t": (_float, 0.1),
        "tau_min": (_float, 0.0), "tau_max": (_float, 10.0), "tau_count": (_int, 101),
        "amplitude": (_choice("closed", "volterra"), "closed"),
        "dt": (_float, 1e-3),
        "propagator": (_choice("reference", "composed"), "reference"),
        "jobs": (_int, 1),
    },
    "fig2": {
        **_ENGINEERED, **_GAMMA_GRID,
        "t_max": (_opt_float, None),
        "dt": (_float, 1e-3),
        "rhp_eps": (_float, 1e-4),
        "jobs": (_int, 1),
    },
    "sweep": {
        **_DECAY, **_ENGINEERED, **_THERMAL,
        "model": (_choice("decay", "dephasing_thermal", "dephasing_engineered"), "decay"),
        "pair": (_choice("pm", "zz"), "pm"),
        "state": (_choice("excited", "plus"), "excited"),
        "gamma0_min": (_float, 0.0), "gamma0_max": (_float, 1.0), "gamma0_count": (_int, 5),
        "t_min": (_float, 0.0), "t_max": (_float, 10.0), "t_count": (_int, 11),
        "tau_min": (_float, 0.0), "tau_max": (_float, 10.0), "tau_count": (_int, 11),
        "propagator": (_choice("reference", "composed"), "reference"),
        "jobs": (_int, 1),
    },
    "check": {
        **_DECAY,
        "volterra_dt": (_float, 1e-3),
        "volterra_t_max": (_float, 10.0),
        "oracle_n": (_int_list, [64, 128, 256, 512]),
        "pq_configs": (_int, 10),
        "seed": (_int, 12345),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration of one command invocation.

    Attributes
    ----------
    command : str
    params : dict
        Every schema field of the command, with its resolved value.
    out : str or None
        Output path; ``None`` writes to standard output.
    fmt : {"csv", "json"}
    """

    command: str
    params: dict
    out: Optional[str] = None
    fmt: str = "csv"

    def __getitem__(self, key):
        return self.params[key]

    def echo(self) -> dict:
        """Configuration as strings, enough to re-run the sweep.

        ``jobs`` is omitted because it never changes the output.
        """
        return {k: _fmt_value(v) for k, v in sorted(self.params.items()) if k != "jobs"}


def parse_config_file(path: str) -> dict:
    """Read ``key = value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"config: cannot read {path!r} ({exc.strerror})") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config: line {lineno} is not key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve_config(command: str, flags: dict, file_values: Optional[dict] = None,
                   out: Optional[str] = None, fmt: str = "csv") -> RunConfig:
    """Merge defaults, config-file values and flags, then validate.

    Raises
    ------
    UsageError
        Unknown field, unparsable value or violated invariant; the message
        names the field.
    """
    if command not in SCHEMA:
        raise UsageError(f"command: unknown command {command!r}")
    schema = SCHEMA[command]
    raw = dict(file_values or {})
    raw.update({k: v for k, v in flags.items() if v is not None})
    for key in raw:
        if key not in schema:
            raise UsageError(f"{key}: not a parameter of {command}")
    params = {}
    for key, (parse, default) in schema.items():
        if key in raw:
            try:
                params[key] = parse(raw[key])
            except (TypeError, ValueError) as exc:
                raise UsageError(f"{key}: invalid value {raw[key]!r} ({exc})") from None
        else:
            params[key] = default
    _validate(command, params)
    return RunConfig(command, params, out, fmt)


def _validate(command: str, p: dict) -> None:
    for key, value in p.items():
        if key.endswith("_count") and value < 1:
            raise UsageError(f"{key}: must be >= 1")
        if key.endswith("_max") and key[:-4] + "_min" in p and value < p[key[:-4] + "_min"]:
            raise UsageError(f"{key}: must be >= {key[:-4]}_min")
    for key in ("dt", "volterra_dt", "volterra_t_max", "rhp_eps", "lam", "ohmic_lam",
                "sigma", "delta_n", "beta"):
        if key in p and not p[key] > 0:
            raise UsageError(f"{key}: must be positive")
    if "jobs" in p and p["jobs"] < 1:
        raise UsageError("jobs: must be >= 1")
    if p.get("gamma0_min", 0.0) < 0:
        raise UsageError("gamma0_min: must be >= 0")
    if command == "fig1" and p["t"] < 0:
        raise UsageError("t: must be >= 0")
    if command == "fig1" and p["tau_min"] < 0:
        raise UsageError("tau_min: must be >= 0")
    if command == "fig2" and p["t_max"] is not None and not p["t_max"] > 0:
        raise UsageError("t_max: must be positive")
    if command == "sweep":
        if p["t_min"] < 0 or p["tau_min"] < 0:
            raise UsageError("t_min: times must be >= 0")
        if p["model"] == "decay" and (p["pair"] != "pm" or p["state"] != "excited"):
            raise UsageError("pair: the decay model supports only pair=pm with state=excited")
    if command == "check":
        if any(n < 1 for n in p["oracle_n"]):
            raise UsageError("oracle_n: mode counts must be >= 1")
        if p["pq_configs"] < 1:
            raise UsageError("pq_configs: must be >= 1")


def grid(p: dict, name: str) -> np.ndarray:
    """``linspace(name_min, name_max, name_count)``; a single point sits at ``name_min``."""
    n = p[f"{name}_count"]
    if n == 1:
        return np.array([p[f"{name}_min"]])
    return np.linspace(p[f"{name}_min"], p[f"{name}_max"], n)


# -- tables ---------------------------------------------------------------------------

def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt_value(x) for x in v)
    if v is None:
        return "auto"
    return str(v)


@dataclass
class SweepTable:
    """Column schema, ordered rows and a metadata block.

    Rows hold floats, ints or strings; every float must be finite.
    """

    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def check_finite(self) -> None:
        for i, row in enumerate(self.rows):
            for name, v in zip(self.columns, row):
                if isinstance(v, float) and not math.isfinite(v):
                    raise QRegressError(f"non-finite value in row {i}, column {name}")

    def to_csv(self) -> str:
        lines = [f"# {k}: {_fmt_value(v)}" for k, v in sorted(self.metadata.items())]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_fmt_value(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {"metadata": {k: _fmt_value(v) for k, v in self.metadata.items()},
               "columns": list(self.columns),
               "rows": [[float(v) if isinstance(v, (float, np.floating)) else v for v in r]
                        for r in self.rows]}
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"

    def render(self, fmt: str) -> str:
        self.check_finite()
        return self.to_json() if fmt == "json" else self.to_csv()


def _base_metadata(cfg: RunConfig) -> dict:
    meta = {"command": cfg.command, "version": __version__}
    meta.update({f"config.{k}": v for k, v in cfg.echo().items()})
    return meta


def _ordered_map(fn: Callable, items: list, jobs: int) -> list:
    """Apply ``fn`` to ``items``; results come back in input order."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- fig1 -----------------------------------------------------------------------------

FIG1_COLUMNS = ["gamma0", "tau", "eps_re", "eps_im", "eps_abs",
                "exact_re", "exact_im", "markov_re", "markov_im"]


def _fig1_row_block(args) -> list:
    g0, p = args
    bath = LorentzianBath(g0, p["lam"], p["delta"], p["omega0"])
    taus = grid(p, "tau")
    t1 = p["t"]
    if p["amplitude"] == "volterra":
        t_end = t1 + float(taus[-1])
        A = solve_G_volterra(bath, max(t_end, p["dt"]), p["dt"])
    else:
        A = ClosedAmplitude(bath)
    m = DecayMap(p["omega0"], A)
    out = []
    for tau in taus:
        t2 = t1 + float(tau)
        exact = exact_tpcf_decay(A, t1, t2, omega0=p["omega0"])
        try:
            markov = qrt_npcf(m, [SM, SP], [t1, t2], P_UP, propagator=p["propagator"])
            rec = epsilon(exact, markov, t1, t2)
            flag = "degenerate" if rec.degenerate else ""
        except (MapSingularityError, ArithmeticError):
            rec = epsilon(exact, 0.0, t1, t2)
            rec = type(rec)(t1, t2, rec.exact, 0j, 0j, 0.0, True)
            flag = "singular"
        out.append(([float(g0), float(tau), rec.epsilon.real, rec.epsilon.imag, rec.epsilon_abs,
                     rec.exact.real, rec.exact.imag, rec.markov.real, rec.markov.imag], flag))
    return out


def cmd_fig1(cfg: RunConfig) -> SweepTable:
    """Relative change of ``<s+(t+tau) s-(t)>`` over a ``gamma0 x tau`` grid (decay model).

    Rows where the map-built value is undefined or ``|exact|`` is below the
    degenerate floor are kept with ``eps = 0`` and listed in the metadata.
    """
    p = cfg.params
    blocks = _ordered_map(_fig1_row_block, [(float(g), p) for g in grid(p, "gamma0")], p["jobs"])
    table = SweepTable(list(FIG1_COLUMNS), metadata=_base_metadata(cfg))
    flagged = []
    for block in blocks:
        for row, flag in block:
            if flag:
                flagged.append(f"{len(table.rows)}:{flag}")
            table.rows.append(row)
    table.metadata["model"] = "decay"
    table.metadata["correlator"] = "<sigma+(t+tau) sigma-(t)>, excited initial state"
    table.metadata["flagged_rows"] = len(flagged)
    if flagged:
        table.metadata["flagged"] = " ".join(flagged)
    return table


# -- fig2 -----------------------------------------------------------------------------

FIG2_COLUMNS = ["gamma0", "blp", "rhp", "peak_count", "rhp_singular", "rhp_half_norm"]


def fig2_t_max(p: dict) -> float:
    """Default BLP/RHP window ``pi / (2 sigma delta_n)``."""
    return p["t_max"] if p["t_max"] is not None else math.pi / (2 * p["sigma"] * p["delta_n"])


def _fig2_row(args) -> list:
    g0, p = args
    dist = EngineeredDistribution(g0, p["omega_bar"], p["sigma"], p["delta_max"], p["delta_n"])
    m = EngineeredDephasingMap(dist)
    t_max = fig2_t_max(p)
    pair = (projector(ket_plus()), projector(np.array([1, -1]) / math.sqrt(2)))
    blp = blp_measure(m, pair, t_max, p["dt"])
    rhp = rhp_divisibility(m, t_max, p["dt"], p["rhp_eps"], on_singular="excise")
    half = rhp_divisibility(m, t_max, p["dt"], p["rhp_eps"], amplitude=0.5, on_singular="excise")
    return [float(g0), blp.value, rhp.value, peak_count(dist),
            1 if rhp.singular_at is not None else 0, half.value]


def cmd_fig2(cfg: RunConfig) -> SweepTable:
    """BLP measure, RHP measure and peak count of ``|f(w)|^2`` over ``gamma0`` (engineered model).

    The BLP value uses the ``|+>, |->`` pair, which is optimal for pure
    dephasing.  ``rhp_singular = 1`` marks rows where the map becomes
    non-invertible inside the window; ``rhp`` is then a finite proxy with
    the singular neighbourhood excised.  ``rhp_half_norm`` evaluates the
    divisibility measure with reference-state amplitudes 1/2.
    """
    p = cfg.params
    rows = _ordered_map(_fig2_row, [(float(g), p) for g in grid(p, "gamma0")], p["jobs"])
    table = SweepTable(list(FIG2_COLUMNS), rows, _base_metadata(cfg))
    table.metadata["model"] = "dephasing_engineered"
    table.metadata["window"] = fig2_t_max(p)
    table.metadata["blp_pair"] = "|+>,|->"
    table.metadata["singular_rows"] = sum(r[4] for r in rows)
    return table


# -- sweep ----------------------------------------------------------------------------

SWEEP_COLUMNS = ["gamma0", "t", "tau", "eps_re", "eps_im", "eps_abs",
                 "exact_re", "exact_im", "markov_re", "markov_im", "degenerate"]


def _sweep_block(args) -> list:
    g0, p = args
    kind = p["model"]
    o1, o2 = (SM, SP) if p["pair"] == "pm" else (SZ, SZ)
    rho0 = P_UP if p["state"] == "excited" else projector(ket_plus())
    if kind == "decay":
        m = DecayMap.closed(LorentzianBath(g0, p["lam"], p["delta"], p["omega0"]))

        def exact(t1, t2):
            return exact_tpcf_decay(m.amplitude, t1, t2, omega0=p["omega0"])
    elif kind == "dephasing_thermal":
        m = ThermalDephasingMap(OhmicBath(g0, p["ohmic_lam"], p["beta"]))

        def exact(t1, t2):
            return exact_tpcf_dephasing(m, o1, o2, t1, t2, rho0)
    else:
        dist = EngineeredDistribution(g0, p["omega_bar"], p["sigma"], p["delta_max"], p["delta_n"])
        m = EngineeredDephasingMap(dist)

        def exact(t1, t2):
            return exact_tpcf_engineered(dist, o1, o2, t1, t2, rho0)
    out = []
    for t1 in grid(p, "t"):
        for tau in grid(p, "tau"):
            t1, tau = float(t1), float(tau)
            ex = exact(t1, t1 + tau)
            try:
                mk = qrt_npcf(m, [o1, o2], [t1, t1 + tau], rho0, propagator=p["propagator"])
                rec = epsilon(ex, mk, t1, t1 + tau)
                flag = int(rec.degenerate)
            except (MapSingularityError, ArithmeticError):
                rec = type(epsilon(ex, 0.0))(t1, t1 + tau, complex(ex), 0j, 0j, 0.0, True)
                flag = 2
            out.append([float(g0), t1, tau, rec.epsilon.real, rec.epsilon.imag, rec.epsilon_abs,
                        rec.exact.real, rec.exact.imag, rec.markov.real, rec.markov.imag, flag])
    return out


def cmd_sweep(cfg: RunConfig) -> SweepTable:
    """Relative change over ``gamma0 x t x tau`` for any model and observable pair.

    ``degenerate`` is 1 when ``|exact|`` is below the floor and 2 when the
    map-built value is undefined.
    """
    p = cfg.params
    blocks = _ordered_map(_sweep_block, [(float(g), p) for g in grid(p, "gamma0")], p["jobs"])
    table = SweepTable(list(SWEEP_COLUMNS), metadata=_base_metadata(cfg))
    for b in blocks:
        table.rows.extend(b)
    return table


# -- check ----------------------------------------------------------------------------

CHECK_COLUMNS = ["check", "metric", "tolerance", "pass", "flag"]

# metric reported when a check could not produce a number
FAILED_METRIC = -1.0


def _check_volterra(p: dict) -> list:
    rows = []
    for delta in (0.0, 0.2):
        for g0 in (0.1, 1.0, 5.0):
            name = f"volterra_vs_closed(delta={delta:g};gamma0={g0:g})"
            bath = LorentzianBath(g0, p["lam"], delta, p["omega0"])
            try:
                A = solve_G_volterra(bath, p["volterra_t_max"], p["volterra_dt"])
            except InstabilityError:
                rows.append([name, FAILED_METRIC, 1e-8, 0, "instability"])
                continue
            err = float(np.max(np.abs(A.G - closed_G_lorentzian(bath, A.t))))
            rows.append([name, err, 1e-8, int(err <= 1e-8), ""])
    return rows


def oracle_ladder(bath: LorentzianBath, ns, t1s, taus) -> list:
    """Largest relative error of the decay oracle against the continuum for each ``N``."""
    errs = []
    for n in ns:
        dil = DecayDilation(discretize(bath, n))
        worst = 0.0
        for t1 in t1s:
            for tau in taus:
                ex = exact_tpcf_decay(bath, t1, t1 + tau)
                orc = oracle_tpcf_decay(dil.db, t1, t1 + tau, dilation=dil)
                worst = max(worst, abs(ex - orc) / abs(orc))
        errs.append(worst)
    return errs


def ladder_decreasing(errs, slack: float = 0.1) -> bool:
    """Each error is at most ``(1 + slack)`` times its predecessor."""
    return all(b <= (1 + slack) * a for a, b in zip(errs, errs[1:]))


def _check_oracle(p: dict) -> list:
    rows = []
    grid5 = np.linspace(0.0, 2.0, 5)
    for g0 in (0.1, 1.0):
        bath = LorentzianBath(g0, p["lam"], p["delta"], p["omega0"])
        errs = oracle_ladder(bath, p["oracle_n"], grid5, grid5)
        rows.append([f"oracle_decay(gamma0={g0:g};N={p['oracle_n'][-1]})",
                     errs[-1], 1e-3, int(errs[-1] <= 1e-3), ""])
        # worst ratio of successive errors; 1.1 allows a 10% rise
        ratio = max((b / a for a, b in zip(errs, errs[1:]) if a > 0), default=0.0)
        mono = ladder_decreasing(errs)
        rows.append([f"oracle_ladder(gamma0={g0:g})", ratio, 1.1, int(mono),
                     "" if mono else "not decreasing"])
    return rows


_PAIRS = {"zz": (SZ, SZ), "pm": (SM, SP)}


def _check_dephasing(p: dict) -> list:
    rows = []
    ts = np.linspace(0.0, 10.0, 11)
    rho0 = projector(ket_plus())
    for name, (o1, o2) in _PAIRS.items():
        worst = 0.0
        for g0 in (0.0, 0.25, 0.5, 0.75, 1.0):
            dist = EngineeredDistribution(g0)
            m = EngineeredDephasingMap(dist)
            for t1 in ts:
                for tau in ts:
                    ex = exact_tpcf_engineered(dist, o1, o2, t1, t1 + tau, rho0)
                    mk = qrt_npcf(m, [o1, o2], [t1, t1 + tau], rho0)
                    worst = max(worst, epsilon(ex, mk).epsilon_abs)
        rows.append([f"engineered_eps({name})", worst, 1e-10, int(worst <= 1e-10), ""])
    # thermal: zz must vanish; pm keeps the modulus, |1 - eps| = 1
    base = ThermalDephasingMap(OhmicBath(1.0))
    for name, (o1, o2) in _PAIRS.items():
        worst = 0.0
        for g0 in (0.0, 0.25, 0.5, 0.75, 1.0):
            m = ThermalDephasingMap(OhmicBath(g0), base.spec) if g0 != 1.0 else base
            for t1 in ts:
                for tau in ts:
                    ex = exact_tpcf_dephasing(m, o1, o2, t1, t1 + tau, rho0)
                    mk = qrt_npcf(m, [o1, o2], [t1, t1 + tau], rho0)
                    rec = epsilon(ex, mk)
                    metric = rec.epsilon_abs if name == "zz" else abs(abs(1 - rec.epsilon) - 1)
                    worst = max(worst, metric)
        label = "thermal_eps(zz)" if name == "zz" else "thermal_modulus(pm)"
        rows.append([label, worst, 1e-6, int(worst <= 1e-6), ""])
    return rows


def _check_pq(p: dict) -> list:
    rng = np.random.default_rng(p["seed"])
    worst = 0.0
    for _ in range(p["pq_configs"]):
        g0 = float(rng.uniform(0.05, 2.0))
        db = discretize(LorentzianBath(g0, p["lam"], p["delta"], p["omega0"]), 64)
        t1 = float(rng.uniform(0.0, 3.0))
        t2 = t1 + float(rng.uniform(0.0, 3.0))
        dil = DecayDilation(db)
        terms = pq_decomposition(db, t1, t2, dilation=dil)
        orc = oracle_tpcf_decay(db, t1, t2, dilation=dil)
        worst = max(worst, abs(terms.total() - orc))
    return [["pq_sum_identity", worst, 1e-12, int(worst <= 1e-12), ""]]


def cmd_check(cfg: RunConfig) -> SweepTable:
    """Run the validation suites; one row per check with its metric and tolerance."""
    p = cfg.params
    table = SweepTable(list(CHECK_COLUMNS), metadata=_base_metadata(cfg))
    for suite in (_check_volterra, _check_oracle, _check_dephasing, _check_pq):
        table.rows.extend(suite(p))
    table.metadata["failed"] = sum(1 for r in table.rows if not r[3])
    return table


COMMAND_FUNCS = {"fig1": cmd_fig1, "fig2": cmd_fig2, "sweep": cmd_sweep, "check": cmd_check}


# -- entry point ------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qregress", description="Markovianity sweeps for qubit-bath models.")
    parser.add_argument("--version", action="version", version=f"qregress {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{fig1,fig2,sweep,check}")
    for name in COMMANDS:
        sp = sub.add_parser(name, help=(COMMAND_FUNCS[name].__doc__ or "").splitlines()[0])
        sp.add_argument("--config", help="key=value file; flags take precedence")
        sp.add_argument("--out", help="output path (default: standard output)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        for key, (_, default) in SCHEMA[name].items():
            sp.add_argument(f"--{key.replace('_', '-')}", f"--{key}", dest=f"p_{key}",
                            default=None, metavar="VALUE",
                            help=f"default: {_fmt_value(default)}")
    return parser


def run(argv=None) -> tuple:
    """Execute a command line; returns ``(exit status, text, output path)``.

    On usage or numeric failure ``text`` is the error message.
    """
    try:
        ns = build_parser().parse_args(argv)
        if ns.command is None:
            raise UsageError("command: one of fig1, fig2, sweep, check is required")
        flags = {k[2:]: v for k, v in vars(ns).items() if k.startswith("p_")}
        file_values = parse_config_file(ns.config) if ns.config else None
        cfg = resolve_config(ns.command, flags, file_values, ns.out, ns.format)
    except UsageError as exc:
        return EXIT_USAGE, f"qregress: usage error: {exc}\n", None
    try:
        table = COMMAND_FUNCS[cfg.command](cfg)
        text = table.render(cfg.fmt)
    except (QRegressError, ArithmeticError, FloatingPointError) as exc:
        return EXIT_NUMERIC, f"qregress: numeric failure: {exc}\n", None
    status = EXIT_OK
    if cfg.command == "check" and table.metadata["failed"]:
        status = EXIT_VALIDATION
    return status, text, cfg.out


def main(argv=None) -> int:
    status, text, out = run(argv)
    if status in (EXIT_USAGE, EXIT_NUMERIC):
        sys.stderr.write(text)
        return status
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            sys.stderr.write(f"qregress: usage error: out: cannot write {out!r} ({exc.strerror})\n")
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
