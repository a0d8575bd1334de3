"""Sectioned key/value run configuration: parsing, validation, serialization.

The format is deliberately plain text - `[section]` headers, `key = value`
lines, `#` comments - so fixtures diff trivially.  Parsing collects every
violation (with line numbers) instead of stopping at the first, and unknown
keys are rejected rather than ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .exprs import ExpressionError, compile_expression


class ConfigError(ValueError):
    """All parse/validation failures, one per line of the message."""

    def __init__(self, messages: list[str]):
        self.messages = list(messages)
        super().__init__("\n".join(self.messages))


@dataclass
class DomainSection:
    dim: int = 1
    length: float = 1.0
    length2: float = 1.0
    grid: int = 257
    p0: float = 1.0
    modes: int = 64


@dataclass
class TimeSection:
    t_final: float = 1.0
    steps: int = 512


@dataclass
class FractionalSection:
    alpha: float = 0.5


@dataclass
class SystemSection:
    preset: str | None = None
    f: str | None = None
    g: str | None = None
    lam: float = 1.0
    d: float = 1.0
    regime: str = "dissipative"
    p: float | None = None
    c_p_lambda: float | None = None
    a: str = "1"
    b: str = "1"


@dataclass
class LinearSection:
    w0: str = "1"
    source: str | None = None
    coefficient: str | None = None


@dataclass
class TruncationSection:
    level: float = 10.0


@dataclass
class SolverSection:
    tol: float = 1e-10
    max_iter: int = 200


@dataclass
class OutputSection:
    probe_csv: str = "probes.csv"
    snapshot_dir: str | None = None


@dataclass
class RunConfig:
    domain: DomainSection = field(default_factory=DomainSection)
    time: TimeSection = field(default_factory=TimeSection)
    fractional: FractionalSection = field(default_factory=FractionalSection)
    system: SystemSection = field(default_factory=SystemSection)
    linear: LinearSection = field(default_factory=LinearSection)
    truncation: TruncationSection = field(default_factory=TruncationSection)
    solver: SolverSection = field(default_factory=SolverSection)
    output: OutputSection = field(default_factory=OutputSection)

    def to_text(self) -> str:
        """Serialize; parse_config(to_text()) reproduces an equal config."""
        lines = []

        def emit(section: str, pairs: list[tuple[str, object]]) -> None:
            lines.append(f"[{section}]")
            for key, val in pairs:
                if val is not None:
                    lines.append(f"{key} = {val!r}" if isinstance(val, str) else f"{key} = {val}")
            lines.append("")

        emit("domain", [("dim", self.domain.dim), ("length", self.domain.length),
                        ("length2", self.domain.length2), ("grid", self.domain.grid),
                        ("p0", self.domain.p0), ("modes", self.domain.modes)])
        emit("time", [("t_final", self.time.t_final), ("steps", self.time.steps)])
        emit("fractional", [("alpha", self.fractional.alpha)])
        emit("system", [("preset", self.system.preset), ("f", self.system.f),
                        ("g", self.system.g), ("lambda", self.system.lam),
                        ("d", self.system.d), ("regime", self.system.regime),
                        ("p", self.system.p), ("c_p_lambda", self.system.c_p_lambda),
                        ("a", self.system.a), ("b", self.system.b)])
        emit("linear", [("w0", self.linear.w0), ("source", self.linear.source),
                        ("coefficient", self.linear.coefficient)])
        emit("truncation", [("level", self.truncation.level)])
        emit("solver", [("tol", self.solver.tol), ("max_iter", self.solver.max_iter)])
        emit("output", [("probe_csv", self.output.probe_csv),
                        ("snapshot_dir", self.output.snapshot_dir)])
        return "\n".join(lines)


def _parse_int(text: str) -> int:
    return int(text, 10)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_str(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return text[1:-1]
    return text


# (section, key) -> (attribute, parser, validator, admissible-range text)
_SCHEMA: dict[tuple[str, str], tuple[str, Callable, Callable[[object], bool], str]] = {
    ("domain", "dim"): ("dim", _parse_int, lambda v: v in (1, 2), "1 or 2"),
    ("domain", "length"): ("length", _parse_float, lambda v: v > 0, "> 0"),
    ("domain", "length2"): ("length2", _parse_float, lambda v: v > 0, "> 0"),
    ("domain", "grid"): ("grid", _parse_int, lambda v: v >= 8, ">= 8"),
    ("domain", "p0"): ("p0", _parse_float, lambda v: v > 0, "> 0"),
    ("domain", "modes"): ("modes", _parse_int, lambda v: v >= 1, ">= 1"),
    ("time", "t_final"): ("t_final", _parse_float, lambda v: v > 0, "> 0"),
    ("time", "steps"): ("steps", _parse_int, lambda v: v >= 2, ">= 2"),
    ("fractional", "alpha"): ("alpha", _parse_float, lambda v: 0 < v < 1, "(0, 1)"),
    ("system", "preset"): ("preset", _parse_str, lambda v: True, ""),
    ("system", "f"): ("f", _parse_str, lambda v: True, ""),
    ("system", "g"): ("g", _parse_str, lambda v: True, ""),
    ("system", "lambda"): ("lam", _parse_float, lambda v: v > 0, "> 0"),
    ("system", "d"): ("d", _parse_float, lambda v: v > 0, "> 0"),
    ("system", "regime"): ("regime", _parse_str, lambda v: v in ("dissipative", "blowup"),
                           "dissipative or blowup"),
    ("system", "p"): ("p", _parse_float, lambda v: v > 1, "> 1"),
    ("system", "c_p_lambda"): ("c_p_lambda", _parse_float, lambda v: v > 0, "> 0"),
    ("system", "a"): ("a", _parse_str, lambda v: True, ""),
    ("system", "b"): ("b", _parse_str, lambda v: True, ""),
    ("linear", "w0"): ("w0", _parse_str, lambda v: True, ""),
    ("linear", "source"): ("source", _parse_str, lambda v: True, ""),
    ("linear", "coefficient"): ("coefficient", _parse_str, lambda v: True, ""),
    ("truncation", "level"): ("level", _parse_float, lambda v: v > 0, "> 0"),
    ("solver", "tol"): ("tol", _parse_float, lambda v: v > 0, "> 0"),
    ("solver", "max_iter"): ("max_iter", _parse_int, lambda v: v >= 1, ">= 1"),
    ("output", "probe_csv"): ("probe_csv", _parse_str, lambda v: True, ""),
    ("output", "snapshot_dir"): ("snapshot_dir", _parse_str, lambda v: True, ""),
}
_SECTIONS = ("domain", "time", "fractional", "system", "linear", "truncation", "solver", "output")
_EXPRESSION_KEYS = {
    ("system", "f"): ("u", "v"),
    ("system", "g"): ("u", "v"),
    ("system", "a"): ("x", "y"),
    ("system", "b"): ("x", "y"),
    ("linear", "w0"): ("x", "y"),
    ("linear", "source"): ("x", "y", "t"),
    ("linear", "coefficient"): ("x", "y", "t"),
}


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError listing every violation."""
    cfg = RunConfig()
    errors: list[str] = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                errors.append(f"line {lineno}: unknown section [{section}]")
                section = None
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key = value, got {raw.strip()!r}")
            continue
        if section is None:
            errors.append(f"line {lineno}: key outside any known section")
            continue
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        spec = _SCHEMA.get((section, key))
        if spec is None:
            errors.append(f"line {lineno}: unknown key {key!r} in section [{section}]")
            continue
        attr, parser, check, admissible = spec
        try:
            parsed = parser(value)
        except ValueError:
            errors.append(f"line {lineno}: cannot parse {key} = {value!r}")
            continue
        if not check(parsed):
            errors.append(
                f"line {lineno}: {key} = {parsed} outside admissible range {admissible}"
            )
            continue
        if (section, key) in _EXPRESSION_KEYS and isinstance(parsed, str):
            try:
                compile_expression(parsed, _EXPRESSION_KEYS[(section, key)])
            except ExpressionError as exc:
                errors.append(f"line {lineno}: {exc}")
                continue
        setattr(getattr(cfg, section), attr, parsed)

    if cfg.system.regime == "blowup":
        if cfg.system.p is None:
            errors.append(
                "blow-up regime requires system.p; see the Assumption-2 validator"
            )
        if cfg.system.c_p_lambda is None:
            errors.append(
                "blow-up regime requires system.c_p_lambda; run the Assumption-2 "
                "validator to compute the largest admissible value"
            )
    if cfg.system.preset is None and (cfg.system.f is None or cfg.system.g is None):
        errors.append("system needs either a preset name or expressions for f and g")
    if cfg.domain.dim == 1 and cfg.domain.modes > cfg.domain.grid - 1:
        errors.append(
            f"modes = {cfg.domain.modes} exceeds the {cfg.domain.grid - 1} modes "
            "resolvable on this grid"
        )
    if errors:
        raise ConfigError(errors)
    return cfg
