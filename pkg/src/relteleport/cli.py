"""Command line driver: capacity sweeps, teleport runs, causality scans and
oracle checks.

Configuration is a plain ``key = value`` file, ``#`` starts a comment::

    detector_a.position = 0, 0, 0
    detector_a.coupling_strength = 30
    detector_b.position = 2, 0, 0
    detector_b.coupling_time = 4
    input.alpha = 0.6
    input.beta = 0.8j
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__, qmath
from .capacity import classical_capacity_closed_form, holevo_numeric, one_shot_bounds
from .channel import ChannelError, TimeOrderError, apply, build_channel
from .field import (
    DetectorConfig,
    correlators,
    lightcone_propagator,
    sample_correlators,
    tune_alice_coupling,
)
from .quadrature import QuadratureError
from .teleport import SCHEMES, TeleportConfig, bit_state, causality_guard, run_teleport
from .weyl import printed_coefficients, receiver_coefficients, verify_product_to_sum

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ORACLE = 0, 2, 3, 4

DETECTOR_SCALARS = ("coupling_time", "coupling_strength", "smearing_width", "gap", "monopole_phase")
AXES = tuple(
    f"detector_{d}.{k}" for d in "ab" for k in DETECTOR_SCALARS + ("x", "y", "z")
)
CAPACITY_COLUMNS = ("axis_value", "e_ab", "nu_b", "c_closed_form", "chi_numeric", "c_min", "c_max")
CAUSALITY_COLUMNS = ("axis_value", "distance", "time_delay", "causal_status", "e_ab", "e_ab_lightcone", "c_closed_form")
ORACLE_COLUMNS = ("draw", "e_ab", "coefficient_deviation", "product_to_sum_deviation", "passed")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Sweep:
    parameter: str | None = None
    start: float = 0.0
    stop: float = 0.0
    steps: int = 1

    def values(self) -> list[float | None]:
        if self.parameter is None:
            return [None]
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


@dataclass(frozen=True)
class RunConfig:
    detector_a: DetectorConfig
    detector_b: DetectorConfig
    alpha: complex
    beta: complex
    rho_b0_bloch: tuple[float, float, float] = (0.0, 0.0, 1.0)
    scheme: str = "two_binary_uses"
    epsilon: float = 0.05
    tolerance: float = 1e-10
    seed: int = 0
    sweep: Sweep = field(default_factory=Sweep)
    tune_e_ab: float | None = None
    ideal_side_channel: bool = False
    grid: int = 50
    holevo: bool = True
    oracle_draws: int = 100
    oracle_e_sign: float = 1.0

    @property
    def rho_b0(self) -> np.ndarray:
        return qmath.bloch_state(self.rho_b0_bloch)

    def input_state(self) -> qmath.PureQubit:
        return qmath.PureQubit.from_amplitudes(self.alpha, self.beta)


REQUIRED = ("detector_a.position", "detector_b.position", "input.alpha", "input.beta")


def _vector(text: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected 3 comma-separated numbers, got {text!r}")
    return tuple(float(p) for p in parts)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


def _axis(text: str) -> str:
    if text not in AXES:
        raise ValueError(f"unknown sweep axis {text!r}; valid axes: {', '.join(AXES)}")
    return text


PARSERS: dict[str, Callable[[str], Any]] = {
    "input.alpha": _complex,
    "input.beta": _complex,
    "rho_b0.bloch": _vector,
    "scheme": str,
    "epsilon": float,
    "tolerance": float,
    "seed": int,
    "sweep.parameter": _axis,
    "sweep.start": float,
    "sweep.stop": float,
    "sweep.steps": int,
    "tune_e_ab": float,
    "ideal_side_channel": _bool,
    "one_shot.grid": int,
    "holevo": _bool,
    "oracle.draws": int,
    "oracle.e_sign": float,
}
for _d in "ab":
    PARSERS[f"detector_{_d}.position"] = _vector
    for _k in DETECTOR_SCALARS:
        PARSERS[f"detector_{_d}.{_k}"] = float


def parse_config(text: str) -> RunConfig:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        try:
            values[key] = PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    for key in REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    return _build_config(values)


def _build_config(v: dict[str, Any]) -> RunConfig:
    dets = []
    for d in "ab":
        kwargs = {k: v[f"detector_{d}.{k}"] for k in DETECTOR_SCALARS if f"detector_{d}.{k}" in v}
        try:
            dets.append(DetectorConfig(d.upper(), v[f"detector_{d}.position"], **kwargs))
        except ValueError as exc:
            raise ConfigError(f"detector_{d}: {exc}") from None
    if abs(v["input.alpha"]) == 0 and abs(v["input.beta"]) == 0:
        raise ConfigError("input state must be nonzero")
    bloch = v.get("rho_b0.bloch", (0.0, 0.0, 1.0))
    if np.linalg.norm(bloch) > 1.0 + 1e-12:
        raise ConfigError("rho_b0.bloch must have length at most 1")
    scheme = v.get("scheme", "two_binary_uses")
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    eps = v.get("epsilon", 0.05)
    if not 0.0 < eps < 1.0:
        raise ConfigError("epsilon must lie in (0, 1)")
    tol = v.get("tolerance", 1e-10)
    if not 0.0 < tol <= 1e-6:
        raise ConfigError("tolerance must lie in (0, 1e-6]")
    steps = v.get("sweep.steps", 1)
    if steps < 1:
        raise ConfigError("sweep.steps must be at least 1")
    sweep_keys = [k for k in v if k.startswith("sweep.") and k != "sweep.parameter"]
    if sweep_keys and "sweep.parameter" not in v:
        raise ConfigError("sweep settings given without sweep.parameter")
    start = v.get("sweep.start", 0.0)
    sweep = Sweep(v.get("sweep.parameter"), start, v.get("sweep.stop", start), steps)
    grid = v.get("one_shot.grid", 50)
    if grid < 1:
        raise ConfigError("one_shot.grid must be at least 1")
    draws = v.get("oracle.draws", 100)
    if draws < 1:
        raise ConfigError("oracle.draws must be at least 1")
    return RunConfig(
        detector_a=dets[0],
        detector_b=dets[1],
        alpha=v["input.alpha"],
        beta=v["input.beta"],
        rho_b0_bloch=tuple(bloch),
        scheme=scheme,
        epsilon=eps,
        tolerance=tol,
        seed=v.get("seed", 0),
        sweep=sweep,
        tune_e_ab=v.get("tune_e_ab"),
        ideal_side_channel=v.get("ideal_side_channel", False),
        grid=grid,
        holevo=v.get("holevo", True),
        oracle_draws=draws,
        oracle_e_sign=v.get("oracle.e_sign", 1.0),
    )


def detectors_at(cfg: RunConfig, value: float | None) -> tuple[DetectorConfig, DetectorConfig]:
    a, b = cfg.detector_a, cfg.detector_b
    if value is not None:
        name, key = cfg.sweep.parameter.split(".")
        det = a if name == "detector_a" else b
        if key in "xyz":
            pos = list(det.position)
            pos["xyz".index(key)] = value
            det = det.replace(position=tuple(pos))
        else:
            det = det.replace(**{key: value})
        a, b = (det, b) if name == "detector_a" else (a, det)
    if cfg.tune_e_ab is not None:
        try:
            a = tune_alice_coupling(a, b, cfg.tune_e_ab, cfg.tolerance)
        except ValueError as exc:
            raise ConfigError(f"tune_e_ab: {exc}") from None
    return a, b


# commands


def capacity_row(cfg: RunConfig, value: float | None) -> dict[str, Any]:
    a, b = detectors_at(cfg, value)
    corr = correlators(a, b, cfg.tolerance)
    ch = build_channel(a, b, cfg.rho_b0, corr, cfg.tolerance)
    chi = holevo_numeric(ch, seed=cfg.seed)[0] if cfg.holevo else float("nan")
    outs = [apply(ch, bit_state(bit, a.monopole_phase)) for bit in "01"]
    bounds = one_shot_bounds(outs, cfg.epsilon, grid=cfg.grid)
    return {
        "axis_value": value if value is not None else float("nan"),
        "e_ab": corr.e_ab,
        "nu_b": corr.nu_b,
        "c_closed_form": classical_capacity_closed_form(corr),
        "chi_numeric": chi,
        "c_min": bounds.c_min,
        "c_max": bounds.c_max,
    }


def causality_row(cfg: RunConfig, value: float | None) -> dict[str, Any]:
    a, b = detectors_at(cfg, value)
    corr = correlators(a, b, cfg.tolerance)
    return {
        "axis_value": value if value is not None else float("nan"),
        "distance": float(np.linalg.norm(np.subtract(b.position, a.position))),
        "time_delay": b.coupling_time - a.coupling_time,
        "causal_status": causality_guard(a, b),
        "e_ab": corr.e_ab,
        "e_ab_lightcone": lightcone_propagator(a, b),
        "c_closed_form": classical_capacity_closed_form(corr),
    }


def teleport_report(cfg: RunConfig) -> dict[str, Any]:
    a, b = detectors_at(cfg, None)
    tc = TeleportConfig(
        cfg.input_state(),
        (a, b),
        cfg.rho_b0,
        cfg.scheme,
        cfg.seed,
        cfg.ideal_side_channel,
        cfg.tolerance,
        cfg.holevo,
    )
    return run_teleport(tc).to_dict()


def oracle_rows(cfg: RunConfig) -> list[dict[str, Any]]:
    """Coefficient identities and the product-to-sum check on random
    correlator draws; every other draw has E_AB = 0."""
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for i in range(cfg.oracle_draws):
        corr = next(sample_correlators(rng, 1, spacelike=bool(i % 2)))
        got, want = receiver_coefficients(corr), printed_coefficients(corr)
        coeff_dev = max(abs(got[k] - want[k]) for k in want)
        pts = verify_product_to_sum(corr, n_probes=4, rng=rng, tol=cfg.tolerance, e_sign=cfg.oracle_e_sign)
        rows.append(
            {
                "draw": i,
                "e_ab": corr.e_ab,
                "coefficient_deviation": coeff_dev,
                "product_to_sum_deviation": pts.max_deviation,
                "passed": bool(coeff_dev <= cfg.tolerance and pts.passed),
            }
        )
    return rows


def _sweep(func, cfg: RunConfig, jobs: int) -> list[dict[str, Any]]:
    values = cfg.sweep.values()
    if jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            # map keeps axis order whatever the completion order
            return list(pool.map(func, [cfg] * len(values), values))
    return [func(cfg, v) for v in values]


# serialisation


def _fmt(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return {"re": _jsonable(x.real), "im": _jsonable(x.imag)}
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def to_csv(rows: Sequence[dict[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def to_json(meta: dict[str, Any], key: str, payload: Any) -> str:
    return json.dumps(_jsonable({"meta": meta, key: payload}), indent=2) + "\n"


def _flatten(d: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    out = {}
    for k, v in d.items():
        name = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, name + "."))
        elif isinstance(v, list):
            arr = np.asarray(v, dtype=float)
            for idx in np.ndindex(arr.shape):
                out[name + "." + ".".join(map(str, idx))] = float(arr[idx])
        else:
            out[name] = v
    return out


def _meta(command: str, cfg: RunConfig) -> dict[str, Any]:
    return {"command": command, "version": __version__, "seed": cfg.seed, "config": asdict(cfg)}


def run_command(command: str, cfg: RunConfig, fmt: str, jobs: int = 1) -> tuple[str, int]:
    """Returns (serialised output, exit code)."""
    meta = _meta(command, cfg)
    code = EXIT_OK
    if command == "capacity":
        rows, cols = _sweep(capacity_row, cfg, jobs), CAPACITY_COLUMNS
        best = max(max(r["c_min"] for r in rows), 0.0)
        meta["summary"] = {"c_min_clamped": best, "c_closed_form_max": max(r["c_closed_form"] for r in rows)}
    elif command == "causality-scan":
        rows, cols = _sweep(causality_row, cfg, jobs), CAUSALITY_COLUMNS
    elif command == "oracle-check":
        rows, cols = oracle_rows(cfg), ORACLE_COLUMNS
        ok = all(r["passed"] for r in rows)
        meta["summary"] = {
            "passed": ok,
            "max_coefficient_deviation": max(r["coefficient_deviation"] for r in rows),
            "max_product_to_sum_deviation": max(r["product_to_sum_deviation"] for r in rows),
        }
        code = EXIT_OK if ok else EXIT_ORACLE
    elif command == "teleport":
        report = teleport_report(cfg)
        if fmt == "json":
            return to_json(meta, "report", report), code
        flat = _flatten(report)
        return to_csv([flat], list(flat)), code
    else:
        raise ValueError(f"unknown command {command!r}")
    if fmt == "json":
        return to_json(meta, "rows", rows), code
    return to_csv(rows, cols), code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relteleport", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("capacity", "capacity sweep along one axis"),
        ("teleport", "single teleportation run"),
        ("causality-scan", "causal status and propagator along one axis"),
        ("oracle-check", "Weyl-algebra identity checks on random correlators"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="key = value configuration file")
        sp.add_argument("--output", help="write here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        sp.add_argument("--seed", type=int, help="overrides the config seed")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        if args.seed is not None:
            cfg = RunConfig(**{**cfg.__dict__, "seed": args.seed})
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        text, code = run_command(args.command, cfg, args.format, args.jobs)
    except (ConfigError, TimeOrderError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, ChannelError, np.linalg.LinAlgError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "capacity" and args.format == "csv":
        rows = list(csv.DictReader(io.StringIO(text)))
        best = max(max(float(r["c_min"]) for r in rows), 0.0)
        print(f"best c_min (clamped at 0): {best:.6g}", file=sys.stderr)
    if code == EXIT_ORACLE:
        print("oracle check failed", file=sys.stderr)
    return code
