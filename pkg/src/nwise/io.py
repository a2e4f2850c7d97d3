"""Scenario files, time-series output and run reports.

Scenarios are YAML documents.  A Hamiltonian scenario has the sections
``system``, ``fields``, ``couplings``, ``time`` and ``initial``; a protocol
scenario has ``system`` and ``protocol`` (plus an optional ``time``) and
derives the rest.  A driver is either a bare number (a constant) or a mapping
with a ``kind`` key:

    fields: [1.0, {kind: cosine, amplitude: 0.5, frequency: 2.0}]
    couplings: {x: 0.3, y: {kind: sech-pulse, amplitude: 1, width: 0.2}}
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import yaml

from .errors import OutputError, ScenarioError, UsageError
from .model import (DRIVER_KINDS, Constant, CouplingSchedule, InitialState, ScenarioConfig,
                    Tabulated, driver_to_dict)
from .protocols import CoolingScenario, GhzScenario

FORMAT_VERSION = 1

_DRIVER_PARAMS = {
    "constant": ({"value"}, set()),
    "cosine": ({"amplitude", "frequency"}, {"phase"}),
    "sine": ({"amplitude", "frequency"}, {"phase"}),
    "linear-ramp": ({"slope"}, {"offset"}),
    "sech-pulse": ({"amplitude", "width"}, {"center"}),
    "tabulated": ({"times", "values"}, set()),
}



@dataclass(frozen=True)
class TimeSeriesRecord:
    t: float
    tau: float | None = None
    observables: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    """A parsed scenario: the Hamiltonian config plus an optional protocol."""

    config: ScenarioConfig
    protocol: GhzScenario | CoolingScenario | None = None

    def echo(self) -> dict:
        """Fully resolved parameters; parsing this back gives the same config."""
        if self.protocol is None:
            return self.config.to_dict()
        return protocol_to_dict(self.protocol)


# -- parsing ---------------------------------------------------------------

def _line_map(node, path=(), out=None) -> dict:
    """Map key paths to 1-based source lines, rejecting duplicate keys."""
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        seen = set()
        for k, v in node.value:
            key = k.value
            if key in seen:
                raise ScenarioError("duplicate key", field=".".join(map(str, path + (key,))),
                                    line=k.start_mark.line + 1)
            seen.add(key)
            out[path + (key,)] = k.start_mark.line + 1
            _line_map(v, path + (key,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_map(v, path + (i,), out)
    return out


class _Reader:
    def __init__(self, lines: dict):
        self.lines = lines

    def fail(self, message, path):
        path = tuple(path)
        line = None
        for cut in range(len(path), -1, -1):
            if path[:cut] in self.lines:
                line = self.lines[path[:cut]]
                break
        name = ".".join(str(p) for p in path) or None
        raise ScenarioError(message, field=name, line=line)

    def mapping(self, obj, path, required=(), optional=()) -> dict:
        if not isinstance(obj, dict):
            self.fail("expected a mapping", path)
        allowed = set(required) | set(optional)
        for k in obj:
            if k not in allowed:
                self.fail(f"unknown key '{k}' (allowed: {', '.join(sorted(allowed))})", tuple(path) + (k,))
        for k in required:
            if k not in obj:
                self.fail(f"missing required key '{k}'", path)
        return obj

    def number(self, obj, path) -> float:
        if isinstance(obj, bool) or not isinstance(obj, (int, float)):
            self.fail(f"expected a number, got {obj!r}", path)
        x = float(obj)
        if not math.isfinite(x):
            self.fail("value must be finite", path)
        return x

    def integer(self, obj, path, minimum=None) -> int:
        if isinstance(obj, bool) or not isinstance(obj, int):
            self.fail(f"expected an integer, got {obj!r}", path)
        if minimum is not None and obj < minimum:
            self.fail(f"must be >= {minimum}", path)
        return int(obj)

    def numbers(self, obj, path) -> tuple[float, ...]:
        if not isinstance(obj, list):
            self.fail("expected a list of numbers", path)
        return tuple(self.number(x, tuple(path) + (i,)) for i, x in enumerate(obj))

    def choice(self, obj, path, options) -> str:
        if obj not in options:
            self.fail(f"expected one of {', '.join(options)}, got {obj!r}", path)
        return obj

    def driver(self, obj, path):
        if not isinstance(obj, dict):
            return Constant(self.number(obj, path))
        kind = obj.get("kind")
        if kind not in DRIVER_KINDS:
            self.fail(f"unknown driver kind {kind!r} (known: {', '.join(DRIVER_KINDS)})",
                      tuple(path) + ("kind",))
        required, optional = _DRIVER_PARAMS[kind]
        self.mapping(obj, path, required | {"kind"}, optional)
        cls = DRIVER_KINDS[kind]
        try:
            if cls is Tabulated:
                return Tabulated(self.numbers(obj["times"], tuple(path) + ("times",)),
                                 self.numbers(obj["values"], tuple(path) + ("values",)))
            args = {k: self.number(v, tuple(path) + (k,)) for k, v in obj.items() if k != "kind"}
            return cls(**args)
        except UsageError as exc:
            if isinstance(exc, ScenarioError):
                raise
            self.fail(str(exc), path)

    def guard(self, fn, path):
        """Run a constructor, reporting its validation errors at ``path``."""
        try:
            return fn()
        except ScenarioError:
            raise
        except UsageError as exc:
            self.fail(str(exc), path)


def _load(text: str):
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError(f"malformed YAML: {getattr(exc, 'problem', exc)}",
                            line=None if mark is None else mark.line + 1) from None
    if node is None:
        raise ScenarioError("empty scenario document")
    return data, _line_map(node)


def parse_scenario_text(text: str) -> Scenario:
    data, lines = _load(text)
    r = _Reader(lines)
    if not isinstance(data, dict):
        r.fail("scenario must be a mapping of sections", ())
    if "protocol" in data:
        r.mapping(data, (), ("system", "protocol"), ("time",))
        return _parse_protocol(r, data)
    r.mapping(data, (), ("system", "fields", "time", "initial"), ("couplings",))
    system = r.mapping(data["system"], ("system",), ("n",))
    n = r.integer(system["n"], ("system", "n"), minimum=2)

    fields = data["fields"]
    if not isinstance(fields, list):
        r.fail("expected a list of drivers", ("fields",))
    if len(fields) != n:
        r.fail(f"expected {n} field drivers, got {len(fields)}", ("fields",))
    drivers = tuple(r.driver(d, ("fields", i)) for i, d in enumerate(fields))

    couplings = r.mapping(data.get("couplings", {}), ("couplings",), (), ("x", "y", "z"))
    schedule = CouplingSchedule(**{k: r.driver(v, ("couplings", k)) for k, v in couplings.items()})

    time = r.mapping(data["time"], ("time",), ("t1", "steps"), ("t0",))
    t0 = r.number(time.get("t0", 0.0), ("time", "t0"))
    t1 = r.number(time["t1"], ("time", "t1"))
    steps = r.integer(time["steps"], ("time", "steps"), minimum=1)
    if t1 < t0:
        r.fail("t1 must be >= t0", ("time", "t1"))

    initial = _parse_initial(r, data["initial"], n)
    cfg = r.guard(lambda: ScenarioConfig(n, drivers, schedule, t0, t1, steps, initial), ())
    return Scenario(cfg)


def _parse_initial(r: _Reader, obj, n: int) -> InitialState:
    path = ("initial",)
    if not isinstance(obj, dict):
        r.fail("expected a mapping", path)
    kind = r.choice(obj.get("kind"), path + ("kind",), ("basis", "ghz", "mixture"))
    if kind == "basis":
        r.mapping(obj, path, ("kind", "index"))
        state = InitialState("basis", index=r.integer(obj["index"], path + ("index",), minimum=0))
    elif kind == "ghz":
        r.mapping(obj, path, ("kind",), ("phase",))
        state = InitialState("ghz", phase=r.number(obj.get("phase", 0.0), path + ("phase",)))
    else:
        r.mapping(obj, path, ("kind", "weights"), ("anchored",))
        anchored = obj.get("anchored", True)
        if not isinstance(anchored, bool):
            r.fail("expected true or false", path + ("anchored",))
        state = InitialState("mixture", weights=r.numbers(obj["weights"], path + ("weights",)),
                             anchored=anchored)
    r.guard(lambda: state.validate(n), path)
    return state


def _parse_protocol(r: _Reader, data) -> Scenario:
    system = r.mapping(data["system"], ("system",), ("n",))
    n = r.integer(system["n"], ("system", "n"), minimum=2)
    p = data["protocol"]
    path = ("protocol",)
    if not isinstance(p, dict):
        r.fail("expected a mapping", path)
    kind = r.choice(p.get("kind"), path + ("kind",), ("ghz", "cooling"))
    if kind == "ghz":
        r.mapping(p, path, ("kind", "gamma_x"), ("omega1", "target"))
        time = r.mapping(data.get("time", {}), ("time",), (), ("t0", "t1", "steps"))
        t1 = time.get("t1")
        proto = r.guard(lambda: GhzScenario(
            n=n,
            gamma_x=r.number(p["gamma_x"], path + ("gamma_x",)),
            omega1=r.driver(p.get("omega1", 0.0), path + ("omega1",)),
            target=r.choice(p.get("target", "full"), path + ("target",), ("half", "full")),
            t0=r.number(time.get("t0", 0.0), ("time", "t0")),
            t1=None if t1 is None else r.number(t1, ("time", "t1")),
            steps=r.integer(time.get("steps", 200), ("time", "steps"), minimum=1),
        ), path)
        if proto.end < proto.t0:
            r.fail("t1 must be >= t0", ("time", "t1"))
    else:
        r.mapping(p, path, ("kind", "mode", "omegas", "gamma", "weights"), ("nu",))
        time = r.mapping(data.get("time", {}), ("time",), (), ("t1", "steps"))
        mode = r.choice(p["mode"], path + ("mode",), ("odd-exact", "even-rwa"))
        nu = p.get("nu")
        t1 = time.get("t1")
        proto = r.guard(lambda: CoolingScenario(
            n=n,
            omegas=r.numbers(p["omegas"], path + ("omegas",)),
            gamma=r.number(p["gamma"], path + ("gamma",)),
            weights=r.numbers(p["weights"], path + ("weights",)),
            nu=None if nu is None else r.number(nu, path + ("nu",)),
            pulse=None if t1 is None else r.number(t1, ("time", "t1")),
            mode=mode,
            steps=r.integer(time.get("steps", 200), ("time", "steps"), minimum=1),
        ), path)
    return Scenario(proto.to_config(), proto)


def parse_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot read scenario {path}: {exc.strerror or exc}") from None
    return parse_scenario_text(text)


def protocol_to_dict(p: GhzScenario | CoolingScenario) -> dict:
    if isinstance(p, GhzScenario):
        return {
            "system": {"n": p.n},
            "protocol": {"kind": "ghz", "gamma_x": float(p.gamma_x), "omega1": driver_to_dict(p.omega1),
                         "target": p.target},
            "time": {"t0": float(p.t0), "t1": float(p.end), "steps": int(p.steps)},
        }
    return {
        "system": {"n": p.n},
        "protocol": {"kind": "cooling", "mode": p.mode, "omegas": list(p.omegas), "gamma": float(p.gamma),
                     "weights": list(p.weights), "nu": float(p.resolved_nu)},
        "time": {"t1": float(p.pulse_duration), "steps": int(p.steps)},
    }


def dump_scenario(echo: dict) -> str:
    return yaml.safe_dump(echo, sort_keys=False)


# -- output ----------------------------------------------------------------

def is_probability_column(name: str) -> bool:
    return name.startswith("P_") or "fidelity" in name or name == "leakage"


def _columns(records: Sequence[TimeSeriesRecord]) -> list[str]:
    names = sorted({k for r in records for k in r.observables})
    head = ["t"] + (["tau"] if all(r.tau is not None for r in records) else [])
    return head + names


def display_rows(records: Sequence[TimeSeriesRecord]) -> tuple[list[str], list[list[float]], int]:
    """Column names, rows with probability columns clamped to [0, 1], clamp count."""
    if not records:
        raise UsageError("no records to emit")
    cols = _columns(records)
    rows = []
    clamps = 0
    for r in records:
        row = []
        for c in cols:
            if c == "t":
                x = r.t
            elif c == "tau":
                x = r.tau
            else:
                x = r.observables.get(c, math.nan)
                if is_probability_column(c) and not math.isnan(x):
                    y = min(1.0, max(0.0, x))
                    clamps += y != x
                    x = y
            row.append(float(x))
        rows.append(row)
    return cols, rows, clamps


def format_real(x: float) -> str:
    return format(x, ".17g")


def render_timeseries(records: Sequence[TimeSeriesRecord], fmt: str = "csv") -> tuple[str, int]:
    cols, rows, clamps = display_rows(records)
    if fmt == "csv":
        lines = [",".join(cols)] + [",".join(format_real(x) for x in row) for row in rows]
        return "\n".join(lines) + "\n", clamps
    if fmt == "json":
        data = [dict(zip(cols, row)) for row in rows]
        return json.dumps(data, indent=1) + "\n", clamps
    raise UsageError(f"format must be csv or json, got {fmt!r}")


def emit_timeseries(records: Sequence[TimeSeriesRecord], fmt: str, path) -> int:
    """Write records to ``path``; returns the number of clamped display values."""
    text, clamps = render_timeseries(records, fmt)
    write_text(path, text)
    return clamps


def read_csv(path) -> list[dict[str, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def write_text(path, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None


# -- reports ---------------------------------------------------------------

def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def input_hash(command: str, echo: dict, engine: dict) -> str:
    blob = _canonical({"command": command, "scenario": echo, "engine": engine, "format": FORMAT_VERSION})
    return hashlib.sha256(blob.encode()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def build_report(command: str, echo: dict, engine: dict, results: dict) -> dict:
    from . import __version__

    return {
        "command": command,
        "version": __version__,
        "scenario": _jsonable(echo),
        "engine": _jsonable(engine),
        "results": _jsonable(results),
        "input_hash": input_hash(command, _jsonable(echo), _jsonable(engine)),
    }


def render_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(path, report: dict):
    write_text(path, render_report(report))


def report_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".report.json")
