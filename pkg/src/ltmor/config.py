"""Experiment configuration: INI-style ``key = value`` files with sections.

Any key can be overridden from the environment as ``LTMOR_<SECTION>_<KEY>``
(upper case), e.g. ``LTMOR_MESH_N=16``. Numeric values accept ``pi`` in
simple arithmetic (``5*pi/2``).
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
import os
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

ENV_PREFIX = "LTMOR_"

REQUIRED = {
    "mesh": ("n",),
    "source": ("x0", "zeta"),
    "wavelet": ("alpha", "t0"),
    "sampling": ("M",),
    "rom": ("R",),
    "time": ("T", "N_t"),
}


class ConfigError(ValueError):
    """Missing or invalid configuration entry."""


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_number(text: str) -> float:
    """Evaluate a numeric literal or arithmetic on literals and ``pi``."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(text)

    try:
        return float(ev(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse number {text!r}") from None


def parse_int_list(text: str) -> list[int]:
    """``"2,4,8"`` or a range ``"2:24:2"`` (inclusive end)."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.replace(" ", "").split(",") if p]


def parse_float_list(text: str) -> list[float]:
    return [parse_number(p) for p in text.split(",") if p.strip()]


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    source_center: tuple[float, float]
    source_width: float
    alpha: float
    t0: float
    M: int
    R_values: tuple[int, ...]
    T: float
    N_t: int
    mu: float | None = None
    eta: float | None = None
    beta: float = 0.25
    gamma: float = 0.5
    gram: str = "stiffness"
    svd_method: str = "auto"
    coefficient: str = "identity"
    coefficient_blocks: tuple = ()
    study_M: tuple[int, ...] = ()
    out_dir: str = "out"
    stride: int = 1
    field_times: tuple[float, ...] = ()
    snapshot_format: str = "npz"
    save_snapshots: bool = True
    n_modes: int = 8
    workers: int = 1
    seed: int = 0

    def validate(self) -> "ExperimentConfig":
        positives = {"mesh.n": self.n, "source.zeta": self.source_width, "wavelet.alpha": self.alpha,
                     "wavelet.t0": self.t0, "sampling.M": self.M, "time.T": self.T, "time.N_t": self.N_t,
                     "output.stride": self.stride, "run.workers": self.workers}
        for key, val in positives.items():
            if not val > 0:
                raise ConfigError(f"{key} must be positive, got {val}")
        if self.n < 2:
            raise ConfigError(f"mesh.n must be at least 2, got {self.n}")
        if self.mu is not None and not self.mu > 0:
            raise ConfigError(f"sampling.mu must be positive, got {self.mu}")
        if self.eta is not None and not self.eta > 0:
            raise ConfigError(f"sampling.eta must be positive, got {self.eta}")
        if not self.R_values or min(self.R_values) < 1:
            raise ConfigError("rom.R must list positive dimensions")
        for M in (self.M, *self.study_M):
            if max(self.R_values) > 2 * M + 1:
                raise ConfigError(f"rom.R value {max(self.R_values)} exceeds 2M+1 = {2 * M + 1}")
        if self.gram not in ("stiffness", "h1"):
            raise ConfigError(f"rom.gram must be 'stiffness' or 'h1', got {self.gram!r}")
        if self.svd_method not in ("auto", "svd", "gram"):
            raise ConfigError(f"rom.svd must be auto, svd or gram, got {self.svd_method!r}")
        if self.snapshot_format not in ("npz", "csv"):
            raise ConfigError(f"output.snapshot_format must be npz or csv, got {self.snapshot_format!r}")
        if self.coefficient not in ("identity", "piecewise"):
            raise ConfigError(f"coefficient.kind must be identity or piecewise, got {self.coefficient!r}")
        return self

    @property
    def dt(self) -> float:
        return self.T / self.N_t

    def to_dict(self) -> dict:
        d = asdict(self)
        return d


def _get(cp, section, key, conv=str, default=None, required=False):
    if cp.has_option(section, key):
        raw = cp.get(section, key)
        try:
            return conv(raw)
        except ConfigError as exc:
            raise ConfigError(f"invalid value for {section}.{key}: {exc}") from None
        except (TypeError, ValueError):
            raise ConfigError(f"invalid value for {section}.{key}: {raw!r}") from None
    if required:
        raise ConfigError(f"missing required config key: {section}.{key}")
    return default


def _auto_or_number(text: str):
    return None if text.strip().lower() == "auto" else parse_number(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _blocks(text: str) -> tuple:
    blocks = []
    for chunk in text.split(";"):
        if chunk.strip():
            vals = [parse_number(v) for v in chunk.split(",")]
            if len(vals) != 5:
                raise ConfigError(f"coefficient block needs xmin,xmax,ymin,ymax,value: {chunk!r}")
            blocks.append(tuple(vals))
    return tuple(blocks)


def _int(text: str) -> int:
    v = parse_number(text)
    if v != int(v):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(v)


def from_parser(cp: configparser.ConfigParser) -> ExperimentConfig:
    for section, keys in REQUIRED.items():
        for key in keys:
            if not cp.has_option(section, key):
                raise ConfigError(f"missing required config key: {section}.{key}")
    center = _get(cp, "source", "x0", parse_float_list, required=True)
    if len(center) != 2:
        raise ConfigError(f"source.x0 must have two coordinates, got {center}")
    cfg = ExperimentConfig(
        n=_get(cp, "mesh", "n", _int, required=True),
        source_center=(center[0], center[1]),
        source_width=_get(cp, "source", "zeta", parse_number, required=True),
        alpha=_get(cp, "wavelet", "alpha", parse_number, required=True),
        t0=_get(cp, "wavelet", "t0", parse_number, required=True),
        M=_get(cp, "sampling", "M", _int, required=True),
        mu=_get(cp, "sampling", "mu", _auto_or_number),
        eta=_get(cp, "sampling", "eta", _auto_or_number),
        R_values=tuple(_get(cp, "rom", "R", parse_int_list, required=True)),
        gram=_get(cp, "rom", "gram", str.strip, "stiffness"),
        svd_method=_get(cp, "rom", "svd", str.strip, "auto"),
        T=_get(cp, "time", "T", parse_number, required=True),
        N_t=_get(cp, "time", "N_t", _int, required=True),
        beta=_get(cp, "time", "beta", parse_number, 0.25),
        gamma=_get(cp, "time", "gamma", parse_number, 0.5),
        coefficient=_get(cp, "coefficient", "kind", str.strip, "identity"),
        coefficient_blocks=_get(cp, "coefficient", "blocks", _blocks, ()),
        study_M=tuple(_get(cp, "study", "M", parse_int_list, ())),
        out_dir=_get(cp, "output", "dir", str.strip, "out"),
        stride=_get(cp, "output", "stride", _int, 1),
        field_times=tuple(_get(cp, "output", "field_times", parse_float_list, ())),
        snapshot_format=_get(cp, "output", "snapshot_format", str.strip, "npz"),
        save_snapshots=_get(cp, "output", "save_snapshots", _bool, True),
        n_modes=_get(cp, "output", "modes", _int, 8),
        workers=_get(cp, "run", "workers", _int, 1),
        seed=_get(cp, "run", "seed", _int, 0),
    )
    return cfg.validate()


def _new_parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";;"))
    cp.optionxform = str  # keep key case (N_t, M)
    return cp


def _canonical_key(key: str) -> str:
    canon = {k.lower(): k for keys in REQUIRED.values() for k in keys}
    return canon.get(key.lower(), key.lower())


def _normalize_keys(cp: configparser.ConfigParser) -> configparser.ConfigParser:
    out = _new_parser()
    for section in cp.sections():
        out.add_section(section.lower())
        for key, val in cp.items(section):
            out.set(section.lower(), _canonical_key(key), val)
    return out


def apply_env_overrides(cp: configparser.ConfigParser, environ) -> None:
    """Set ``section.key`` from every ``LTMOR_<SECTION>_<KEY>`` variable."""
    for name, value in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        section, _, key = name[len(ENV_PREFIX):].partition("_")
        if not key:
            continue
        section = section.lower()
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, _canonical_key(key), value)


def load_config(path=None, text: str | None = None, environ=None) -> ExperimentConfig:
    """Read a config file (or string) and apply environment overrides."""
    cp = _new_parser()
    try:
        if text is not None:
            cp.read_string(text)
        elif path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigError(f"config file not found: {path}")
            cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    cp = _normalize_keys(cp)
    apply_env_overrides(cp, os.environ if environ is None else environ)
    return from_parser(cp)


def profile_text(name: str) -> str:
    """Contents of a bundled profile (``desk`` or ``full``)."""
    try:
        return resources.files("ltmor.profiles").joinpath(f"{name}.cfg").read_text()
    except FileNotFoundError:
        raise ConfigError(f"unknown profile {name!r}") from None
