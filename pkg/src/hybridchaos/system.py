"""The 4D hybrid map: configuration model, stepping, trajectories, presets.

A system is four coupled update rules, one per coordinate. Each rule has
two branches selected by whether a branch variable is below 0.5; a branch
computes

    alpha * f(base_map(r, tau)) + g(r, x, y, z, w, xn, yn, zn) + h((beta - r)*v/2)

reduced mod 1, where tau is the coordinate being updated, v is the branch
variable (or 1 - v on the upper branch), and f, g, h are expressions from
the config. Coordinates update in the order x, y, z, w; the g slots of
later coordinates may reference the freshly computed values xn, yn, zn.
The branch variable for y, z, w is either the current or the freshly
computed predecessor coordinate, depending on the coupling mode (x always
branches on the current z).

Configs are plain JSON; two presets ship with the package ("case_i",
"case_ii"). Stepping is compiled to a specialized Python function per
config, with a tree-walking fallback for exact NaN/inf semantics.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from array import array
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .expr import (
    Expr,
    ExprSyntaxError,
    FAST_NAMESPACE,
    emit_python,
    evaluate,
    free_variables,
    parse,
    unparse,
)
from .maps import BaseMap, eval_base_map

__all__ = [
    "COORDS",
    "ConfigError",
    "NonFiniteStateError",
    "CouplingMode",
    "State4",
    "PartSpec",
    "SystemConfig",
    "Trajectory",
    "PRESET_NAMES",
    "load_preset",
    "load_config",
    "config_from_dict",
    "config_to_dict",
    "config_hash",
    "step",
    "generate",
]

COORDS = ("x", "y", "z", "w")
COORD_INDEX = {c: i for i, c in enumerate(COORDS)}

PRESET_NAMES = ("case_i", "case_ii")

# Variables a g slot may reference, by the coordinate it updates. Later
# coordinates additionally see the already-computed next values.
_G_VARS = {
    "x": frozenset({"r", "x", "y", "z", "w"}),
    "y": frozenset({"r", "x", "y", "z", "w", "xn"}),
    "z": frozenset({"r", "x", "y", "z", "w", "xn", "yn"}),
    "w": frozenset({"r", "x", "y", "z", "w", "xn", "yn", "zn"}),
}
_UNARY_VARS = frozenset({"p"})

_R_MAX = 1.2


class ConfigError(ValueError):
    """Invalid system configuration; message names the offending key."""


class NonFiniteStateError(ArithmeticError):
    """A branch expression produced NaN or +-inf before the mod-1 step."""

    def __init__(self, component: str, branch: int, iteration: int | None = None):
        self.component = component
        self.branch = branch
        self.iteration = iteration
        super().__init__(component, branch)

    def __str__(self) -> str:
        where = f"component {self.component}, branch {self.branch}"
        if self.iteration is not None:
            where += f", iteration {self.iteration}"
        return f"non-finite value in {where}"


class CouplingMode(enum.Enum):
    CURRENT = "current"  # branch/transfer variable is the current value
    NEXT = "next"  # ... is the freshly computed next value


@dataclass(frozen=True, slots=True)
class State4:
    """A point of the 4D system; every coordinate in [0, 1)."""

    x: float
    y: float
    z: float
    w: float

    def __post_init__(self):
        for name, v in zip(COORDS, self):
            if not (math.isfinite(v) and 0.0 <= v < 1.0):
                raise ValueError(f"state coordinate {name}={v!r} outside [0, 1)")

    def __iter__(self) -> Iterator[float]:
        return iter((self.x, self.y, self.z, self.w))


@dataclass(frozen=True, slots=True)
class PartSpec:
    """One coordinate's update rule: two branches of (alpha, beta, base, f, g, h)."""

    alpha: tuple[float, float]
    beta: tuple[float, float]
    base: tuple[BaseMap, BaseMap]
    f: tuple[Expr, Expr]
    g: tuple[Expr, Expr]
    h: tuple[Expr, Expr]


@dataclass(frozen=True, slots=True)
class SystemConfig:
    """Complete description of a 4D hybrid system."""

    r: float
    parts: tuple[PartSpec, PartSpec, PartSpec, PartSpec]  # x, y, z, w order
    coupling: CouplingMode
    initial: State4
    burn_in: int

    def __post_init__(self):
        if not (isinstance(self.r, float) and math.isfinite(self.r) and 0.0 < self.r <= _R_MAX):
            raise ConfigError(f"r: must be a finite real in (0, {_R_MAX}], got {self.r!r}")
        if not (isinstance(self.burn_in, int) and self.burn_in >= 0):
            raise ConfigError(f"burn_in: must be a non-negative integer, got {self.burn_in!r}")
        if len(self.parts) != 4:
            raise ConfigError("parts: expected one part per coordinate x, y, z, w")
        for coord, part in zip(COORDS, self.parts):
            for pair, name in ((part.alpha, "alpha"), (part.beta, "beta")):
                if len(pair) != 2 or not all(isinstance(v, float) and math.isfinite(v) for v in pair):
                    raise ConfigError(f"parts.{coord}.{name}: expected two finite reals")
            for slot, allowed in (("f", _UNARY_VARS), ("g", _G_VARS[coord]), ("h", _UNARY_VARS)):
                exprs = getattr(part, slot)
                if len(exprs) != 2:
                    raise ConfigError(f"parts.{coord}.{slot}: expected two expressions")
                for i, e in enumerate(exprs):
                    extra = free_variables(e) - allowed
                    if extra:
                        raise ConfigError(
                            f"parts.{coord}.{slot}[{i}]: variable(s) {sorted(extra)} not "
                            f"available in this slot (allowed: {sorted(allowed)}) "
                            f"in {unparse(e)!r}"
                        )

    def part(self, coord: str) -> PartSpec:
        return self.parts[COORD_INDEX[coord]]


@dataclass(eq=False)
class Trajectory:
    """Post-burn-in states as an (n, 4) float64 array, with provenance."""

    states: np.ndarray
    r: float
    config_hash: str

    def __len__(self) -> int:
        return len(self.states)

    def coord(self, name: str) -> np.ndarray:
        return self.states[:, COORD_INDEX[name]]

    def state(self, i: int) -> State4:
        return State4(*self.states[i])


# --- config (de)serialization -----------------------------------------

def _parse_slot(src: object, key: str) -> Expr:
    if not isinstance(src, str):
        raise ConfigError(f"{key}: expected an expression string, got {src!r}")
    try:
        return parse(src)
    except ExprSyntaxError as exc:
        raise ConfigError(f"{key}: {exc} in {src!r}") from exc


def _real(v: object, key: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    return float(v)


def config_from_dict(d: Mapping) -> SystemConfig:
    """Build and validate a SystemConfig from the JSON-shaped mapping."""
    if not isinstance(d, Mapping):
        raise ConfigError(f"config root: expected an object, got {type(d).__name__}")
    unknown = set(d) - {"r", "initial", "burn_in", "coupling", "parts"}
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    for req in ("r", "initial", "coupling", "parts"):
        if req not in d:
            raise ConfigError(f"missing config key {req!r}")

    r = _real(d["r"], "r")
    initial_raw = d["initial"]
    if not isinstance(initial_raw, (list, tuple)) or len(initial_raw) != 4:
        raise ConfigError("initial: expected a list of 4 reals")
    try:
        initial = State4(*(_real(v, "initial") for v in initial_raw))
    except ValueError as exc:
        raise ConfigError(f"initial: {exc}") from None

    burn_in = d.get("burn_in", 1000)
    if isinstance(burn_in, bool) or not isinstance(burn_in, int):
        raise ConfigError(f"burn_in: expected an integer, got {burn_in!r}")

    coupling_raw = d["coupling"]
    try:
        coupling = CouplingMode(coupling_raw)
    except ValueError:
        raise ConfigError(
            f"coupling: expected 'current' or 'next', got {coupling_raw!r}"
        ) from None

    parts_raw = d["parts"]
    if not isinstance(parts_raw, Mapping) or set(parts_raw) != set(COORDS):
        raise ConfigError("parts: expected an object with exactly the keys x, y, z, w")
    parts = []
    for coord in COORDS:
        p = parts_raw[coord]
        key = f"parts.{coord}"
        if not isinstance(p, Mapping):
            raise ConfigError(f"{key}: expected an object")
        unknown = set(p) - {"alpha", "beta", "base", "f", "g", "h"}
        if unknown:
            raise ConfigError(f"{key}: unknown key(s) {sorted(unknown)}")
        for req in ("alpha", "beta", "base", "f", "g", "h"):
            if req not in p:
                raise ConfigError(f"{key}: missing key {req!r}")
            if not isinstance(p[req], (list, tuple)) or len(p[req]) != 2:
                raise ConfigError(f"{key}.{req}: expected a list of 2 entries")
        try:
            bases = tuple(BaseMap(b) for b in p["base"])
        except ValueError:
            raise ConfigError(
                f"{key}.base: entries must be one of 'tent', 'sin', 'logistic', got {p['base']!r}"
            ) from None
        parts.append(
            PartSpec(
                alpha=tuple(_real(v, f"{key}.alpha") for v in p["alpha"]),
                beta=tuple(_real(v, f"{key}.beta") for v in p["beta"]),
                base=bases,
                f=tuple(_parse_slot(s, f"{key}.f[{i}]") for i, s in enumerate(p["f"])),
                g=tuple(_parse_slot(s, f"{key}.g[{i}]") for i, s in enumerate(p["g"])),
                h=tuple(_parse_slot(s, f"{key}.h[{i}]") for i, s in enumerate(p["h"])),
            )
        )
    return SystemConfig(r=r, parts=tuple(parts), coupling=coupling, initial=initial, burn_in=burn_in)


def config_to_dict(cfg: SystemConfig) -> dict:
    """Inverse of config_from_dict, with expressions in canonical form."""
    return {
        "r": cfg.r,
        "initial": list(cfg.initial),
        "burn_in": cfg.burn_in,
        "coupling": cfg.coupling.value,
        "parts": {
            coord: {
                "alpha": list(part.alpha),
                "beta": list(part.beta),
                "base": [b.value for b in part.base],
                "f": [unparse(e) for e in part.f],
                "g": [unparse(e) for e in part.g],
                "h": [unparse(e) for e in part.h],
            }
            for coord, part in zip(COORDS, cfg.parts)
        },
    }


def config_hash(cfg: SystemConfig) -> str:
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def load_config(path: str | Path) -> SystemConfig:
    """Load and validate a config file. Raises ConfigError on any problem."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return config_from_dict(data)


def load_preset(name: str) -> SystemConfig:
    """Load one of the shipped preset configs ("case_i" or "case_ii")."""
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    text = resources.files(__package__).joinpath(f"presets/{name}.json").read_text("utf-8")
    return config_from_dict(json.loads(text))


# --- compiled stepping -------------------------------------------------

def _base_inline(base: BaseMap, t: str) -> str:
    if base is BaseMap.TENT:
        return f"(((2.0 * r) * {t}) if {t} < 0.5 else ((2.0 * r) * (1.0 - {t})))"
    if base is BaseMap.SIN:
        return f"(r * sin(({math.pi!r} * {t})))"
    return f"((((4.0 * r) * {t}) * (1.0 - {t})))"


def _make_safe_part(cfg: SystemConfig):
    """Slow-path evaluator used when the inlined fast path hits a math
    exception; a non-finite intermediate does not imply a non-finite
    result (e.g. tanh of an overflowing exp), so the branch must be
    re-evaluated with propagating NaN/inf semantics."""
    nxt = cfg.coupling is CouplingMode.NEXT

    def safe_part(pidx, bidx, r, x, y, z, w, xn, yn, zn):
        part = cfg.parts[pidx]
        tau = (x, y, z, w)[pidx]
        if pidx == 0:
            bv = z
        elif pidx == 1:
            bv = xn if nxt else x
        elif pidx == 2:
            bv = yn if nxt else y
        else:
            bv = zn if nxt else z
        fv = evaluate(part.f[bidx], {"p": eval_base_map(part.base[bidx], r, tau)})
        gv = evaluate(
            part.g[bidx],
            {"r": r, "x": x, "y": y, "z": z, "w": w, "xn": xn, "yn": yn, "zn": zn},
        )
        v = bv if bidx == 0 else (1.0 - bv)
        hv = evaluate(part.h[bidx], {"p": (part.beta[bidx] - r) * v / 2.0})
        return part.alpha[bidx] * fv + gv + hv

    return safe_part


def _compile_step(cfg: SystemConfig):
    """Generate the specialized step function for one config.

    Emits one Python function computing a full (x, y, z, w) update with
    every slot expression inlined; operation order matches the reference
    evaluator bit for bit on the finite path.
    """
    nxt = cfg.coupling is CouplingMode.NEXT
    branch_vars = {"x": "z", "y": "xn" if nxt else "x", "z": "yn" if nxt else "y",
                   "w": "zn" if nxt else "z"}
    avail = {"x": ("_nan", "_nan", "_nan"), "y": ("xn", "_nan", "_nan"),
             "z": ("xn", "yn", "_nan"), "w": ("xn", "yn", "zn")}

    lines = [f"def _step(x, y, z, w, r={cfg.r!r}):"]
    for pidx, coord in enumerate(COORDS):
        part = cfg.parts[pidx]
        bv = branch_vars[coord]
        out = coord + "n"
        safe_args = ", ".join(avail[coord])
        for bidx, (indent, cond) in enumerate((("    ", f"if {bv} < 0.5:"), ("    ", "else:"))):
            v = bv if bidx == 0 else f"(1.0 - {bv})"
            f_inline = emit_python(part.f[bidx], {"p": _base_inline(part.base[bidx], coord)})
            g_inline = emit_python(part.g[bidx])
            harg = f"((({part.beta[bidx]!r} - r) * {v}) / 2.0)"
            h_inline = emit_python(part.h[bidx], {"p": harg})
            pre = f"((({part.alpha[bidx]!r} * {f_inline}) + {g_inline}) + {h_inline})"
            lines += [
                indent + cond,
                indent + "    try:",
                indent + f"        _pre = {pre}",
                indent + "    except _ARITH:",
                indent + f"        _pre = _safe({pidx}, {bidx}, r, x, y, z, w, {safe_args})",
                indent + "    if not _isfinite(_pre):",
                indent + f"        raise _NFS({coord!r}, {bidx + 1})",
                indent + f"    {out} = _pre - _floor(_pre)",
                indent + f"    if {out} >= 1.0:",
                indent + f"        {out} = 0.0",
            ]
    lines.append("    return (xn, yn, zn, wn)")

    ns = dict(FAST_NAMESPACE)
    ns.update(
        _ARITH=(ValueError, ZeroDivisionError, OverflowError),
        _safe=_make_safe_part(cfg),
        _isfinite=math.isfinite,
        _floor=math.floor,
        _NFS=NonFiniteStateError,
        _nan=math.nan,
    )
    exec(compile("\n".join(lines), "<step>", "exec"), ns)
    return ns["_step"]


@lru_cache(maxsize=256)
def _engine(cfg: SystemConfig):
    return _compile_step(cfg)


def step(cfg: SystemConfig, s: State4) -> State4:
    """One full update of the 4D system. Raises NonFiniteStateError if a
    branch expression leaves the reals (e.g. log of a negative value)."""
    return State4(*_engine(cfg)(s.x, s.y, s.z, s.w))


def generate(cfg: SystemConfig, n: int) -> Trajectory:
    """Iterate from cfg.initial, discard cfg.burn_in states, return the
    next n as a Trajectory. Deterministic for a fixed config.

    NonFiniteStateError is re-raised with the 0-based index of the
    failing iteration (burn-in iterations included in the count).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    step_fn = _engine(cfg)
    x, y, z, w = cfg.initial
    cols = [array("d") for _ in range(4)]
    try:
        for i in range(cfg.burn_in):
            x, y, z, w = step_fn(x, y, z, w)
        for i in range(cfg.burn_in, cfg.burn_in + n):
            x, y, z, w = step_fn(x, y, z, w)
            cols[0].append(x)
            cols[1].append(y)
            cols[2].append(z)
            cols[3].append(w)
    except NonFiniteStateError as exc:
        exc.iteration = i
        raise
    states = np.column_stack([np.frombuffer(c, dtype=np.float64) for c in cols])
    return Trajectory(states=states, r=cfg.r, config_hash=config_hash(cfg))
