"""Scenario configuration files.

A scenario is a UTF-8 JSON object.  Complex numbers are ``[re, im]`` pairs
(bare reals are accepted too) and matrices are row-major nested lists::

    {
      "kind": "two-measurement",
      "state": {"p": 0.5, "gamma": [1, 0], "theta": 1.5707963, "phi": 0},
      "observables": {"x": [[-1, 0], [0, 1]]},
      "seed": 42,
      "shots": 100000,
      "output": {"format": "json", "path": "report.json"}
    }

``state`` is either a density matrix or qubit parameters.  With qubit
parameters the observables default to ``x = diag(-1, 1)`` and the ``y``
tilted by ``theta``/``phi``.  An observable may also be given by the qubit
angle shorthand ``{"theta": ..., "phi": ...}``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classical import ClassicalSystem
from .coherence import QubitParams, qubit_state, qubit_x, qubit_y_matrix
from .errors import CollapseLabError, ParseError, ValidationError
from .linalg import TAU_HERM, hermiticity_error
from .quantum import DensityMatrix, Observable

KINDS = ("cmo-probe", "two-measurement", "classical-check", "coherence-audit", "qubit-sweep")
FORMATS = ("json", "csv")
DEFAULT_SEED = 42
DEFAULT_SHOTS = 100_000

DEFAULT_SWEEP = {
    "p": [round(0.1 * k, 10) for k in range(11)],
    "gamma_abs": [0.0, 0.5, 1.0],
    "gamma_arg": [0.0, math.pi / 3, math.pi],
    "theta": [k * math.pi / 6 for k in range(7)],
    "phi": [k * math.pi / 4 for k in range(9)],
}


@dataclass
class ScenarioConfig:
    kind: str
    raw: dict
    state: DensityMatrix | None = None
    qubit: QubitParams | None = None
    observables: dict = field(default_factory=dict)
    hamiltonian: np.ndarray | None = None
    t_grid: np.ndarray | None = None
    seed: int = DEFAULT_SEED
    shots: int = DEFAULT_SHOTS
    output_format: str = "json"
    output_path: str | None = None
    classical: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)

    def with_overrides(self, seed=None, shots=None, fmt=None, path=None) -> "ScenarioConfig":
        """Copy with command-line overrides applied (and echoed into ``raw``)."""
        raw = copy.deepcopy(self.raw)
        if seed is not None:
            raw["seed"] = seed
        if shots is not None:
            raw["shots"] = shots
        if fmt is not None or path is not None:
            out = dict(raw.get("output") or {})
            if fmt is not None:
                out["format"] = fmt
            if path is not None:
                out["path"] = str(path)
            raw["output"] = out
        return parse_config(raw)


def _complex(value, where):
    if isinstance(value, bool):
        raise ValidationError(where, "expected a number or [re, im] pair")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise ValidationError(where, "expected a number or [re, im] pair")


def parse_matrix(value, where) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ValidationError(where, "expected a non-empty row-major nested list")
    d = len(value)
    if any(len(r) != d for r in value):
        raise ValidationError(where, f"matrix is not square ({d} rows)")
    m = np.array([[_complex(v, where) for v in row] for row in value], dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ValidationError(where, "non-finite entry")
    return m


def _number(value, where, *, integer=False, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(where, "expected a number")
    if integer and (not isinstance(value, int)):
        raise ValidationError(where, "expected an integer")
    if not math.isfinite(value):
        raise ValidationError(where, "expected a finite number")
    if minimum is not None and value < minimum:
        raise ValidationError(where, f"must be >= {minimum}")
    return value


def _qubit_params(obj, where) -> QubitParams:
    unknown = set(obj) - {"p", "gamma", "theta", "phi"}
    if unknown:
        raise ValidationError(where, f"unknown qubit parameter(s) {sorted(unknown)}")
    if "p" not in obj:
        raise ValidationError(where, "qubit parameters need 'p'")
    try:
        return QubitParams(
            p=_number(obj["p"], f"{where}.p"),
            gamma=_complex(obj.get("gamma", 0.0), f"{where}.gamma"),
            theta=_number(obj.get("theta", 0.0), f"{where}.theta"),
            phi=_number(obj.get("phi", 0.0), f"{where}.phi"),
        )
    except CollapseLabError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(where, str(exc)) from exc


def _observable(value, where) -> Observable:
    if isinstance(value, dict):
        unknown = set(value) - {"theta", "phi"}
        if unknown:
            raise ValidationError(where, f"unknown qubit angle key(s) {sorted(unknown)}")
        m = qubit_y_matrix(
            _number(value.get("theta", 0.0), f"{where}.theta"),
            _number(value.get("phi", 0.0), f"{where}.phi"),
        )
    else:
        m = parse_matrix(value, where)
    try:
        return Observable(m, name=where)
    except CollapseLabError as exc:
        raise ValidationError(where, str(exc)) from exc
    except ValueError as exc:
        raise ValidationError(where, str(exc)) from exc


def _t_grid(value, where):
    if not isinstance(value, list) or not value:
        raise ValidationError(where, "expected a non-empty list of times")
    t = np.array([_number(v, where) for v in value], dtype=float)
    if np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise ValidationError(where, "times must be strictly positive and strictly descending")
    return t


def parse_config(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ValidationError("<root>", "config must be a JSON object")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ValidationError("kind", f"expected one of {', '.join(KINDS)}, got {kind!r}")
    cfg = ScenarioConfig(kind=kind, raw=copy.deepcopy(raw))

    state = raw.get("state")
    if state is not None:
        if isinstance(state, dict):
            cfg.qubit = _qubit_params(state, "state")
            cfg.state = qubit_state(cfg.qubit.p, cfg.qubit.gamma)
        else:
            try:
                cfg.state = DensityMatrix(parse_matrix(state, "state"))
            except CollapseLabError as exc:
                if isinstance(exc, ValidationError):
                    raise
                raise ValidationError("state", str(exc)) from exc
    elif kind in ("cmo-probe", "two-measurement", "coherence-audit"):
        raise ValidationError("state", "required for this scenario kind")

    obs = raw.get("observables") or {}
    if not isinstance(obs, dict):
        raise ValidationError("observables", "expected an object mapping names to observables")
    for name, value in obs.items():
        cfg.observables[name] = _observable(value, f"observables.{name}")
    if cfg.qubit is not None:
        cfg.observables.setdefault("x", qubit_x())
        cfg.observables.setdefault(
            "y", Observable(qubit_y_matrix(cfg.qubit.theta, cfg.qubit.phi))
        )

    if raw.get("hamiltonian") is not None:
        h = parse_matrix(raw["hamiltonian"], "hamiltonian")
        if hermiticity_error(h) > TAU_HERM:
            raise ValidationError("hamiltonian", "matrix is not Hermitian")
        cfg.hamiltonian = h
    if raw.get("t_grid") is not None:
        cfg.t_grid = _t_grid(raw["t_grid"], "t_grid")

    seed = raw.get("seed", DEFAULT_SEED)
    cfg.seed = _number(seed, "seed", integer=True, minimum=0)
    if cfg.seed >= 2**64:
        raise ValidationError("seed", "must fit in 64 bits")
    cfg.shots = _number(raw.get("shots", DEFAULT_SHOTS), "shots", integer=True, minimum=1)

    out = raw.get("output") or {}
    if not isinstance(out, dict):
        raise ValidationError("output", "expected an object with 'format' and 'path'")
    cfg.output_format = out.get("format", "json")
    if cfg.output_format not in FORMATS:
        raise ValidationError("output.format", f"expected one of {FORMATS}")
    cfg.output_path = out.get("path")

    cfg.classical = dict(raw.get("classical") or {})
    sweep = dict(DEFAULT_SWEEP)
    for key, values in (raw.get("sweep") or {}).items():
        if key not in DEFAULT_SWEEP:
            raise ValidationError(f"sweep.{key}", "unknown sweep axis")
        if not isinstance(values, list) or not values:
            raise ValidationError(f"sweep.{key}", "expected a non-empty list")
        sweep[key] = [_number(v, f"sweep.{key}") for v in values]
    cfg.sweep = sweep

    _check_requirements(cfg)
    return cfg


def _check_requirements(cfg: ScenarioConfig):
    d = cfg.state.dim if cfg.state is not None else None
    for name, o in cfg.observables.items():
        if d is not None and o.dim != d:
            raise ValidationError(
                f"observables.{name}", f"dimension {o.dim} does not match state dimension {d}"
            )
    if cfg.hamiltonian is not None and d is not None and cfg.hamiltonian.shape[0] != d:
        raise ValidationError("hamiltonian", f"dimension {cfg.hamiltonian.shape[0]} != state dimension {d}")
    need = {"cmo-probe": ("x",), "two-measurement": ("x", "y"), "coherence-audit": ("x",)}
    for name in need.get(cfg.kind, ()):
        if name not in cfg.observables:
            raise ValidationError(f"observables.{name}", "required for this scenario kind")
    if cfg.kind == "cmo-probe" and cfg.hamiltonian is None:
        raise ValidationError("hamiltonian", "required for cmo-probe")
    if cfg.kind == "classical-check":
        c = cfg.classical
        if "system" in c:
            classical_system_from_config(c["system"])
        else:
            _number(c.get("systems", 16), "classical.systems", integer=True, minimum=1)
            _number(c.get("size", 16), "classical.size", integer=True, minimum=1)


def classical_system_from_config(obj, where="classical.system") -> ClassicalSystem:
    """``{"distribution": [...], "partition_x": [...], "partition_y": [...],
    "flow": [{"t": 1.0, "perm": [...]}, ...]}``"""
    if not isinstance(obj, dict):
        raise ValidationError(where, "expected an object")
    try:
        pieces = tuple((float(f["t"]), list(f["perm"])) for f in obj.get("flow", []))
        return ClassicalSystem(
            np.asarray(obj["distribution"], dtype=float),
            np.asarray(obj["partition_x"], dtype=float),
            np.asarray(obj["partition_y"], dtype=float),
            pieces,
        )
    except KeyError as exc:
        raise ValidationError(where, f"missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ValidationError(where, str(exc)) from exc


def load_config(path) -> ScenarioConfig:
    """Read, parse and validate a scenario file."""
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from exc
    return parse_config(raw)
