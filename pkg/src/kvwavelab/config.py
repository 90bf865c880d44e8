"""Run configuration: parsing, defaults, and validation for the CLI.

Configurations are flat key=value text (one pair per line, ``#`` comments
allowed) or a single JSON object with the same keys.  Every key has a
typed default; unknown keys are rejected so typos fail loudly, and
duplicate keys are a parse error rather than silently last-wins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .errors import ParseError, ValidationError
from .model import ModelParams, validate_params

__all__ = ["COMMANDS", "RunConfig", "parse_config", "apply_overrides"]

COMMANDS = ("simulate", "scan", "quasimode", "audit", "spectrum", "stationary")

#: Mesh-rule names accepted by the quasimode command.
MESH_RULES = ("contract", "converged")


@dataclass(frozen=True)
class RunConfig:
    """Fully validated description of one CLI run."""

    command: str
    c: float = 4.0
    d: float = 1.0
    support_left: float = 0.0
    support_right: float = 1.0
    N: int = 512
    T: float = 50.0
    dt: Optional[float] = None
    beta_min: float = 1.0
    beta_max: float = 300.0
    beta_points: int = 60
    insert_quasimodes: bool = False
    n_max: int = 16
    gamma: float = 0.0
    n_list: tuple = ()
    N_list: tuple = (64, 128, 256)
    mesh_rule: str = "converged"
    residual_tol: Optional[float] = None
    shift_real: float = 0.0
    shift_imag: float = 10.0
    output: str = "kvwavelab-out"
    seed: int = 0
    plot: bool = True

    @property
    def params(self) -> ModelParams:
        return ModelParams(
            c=self.c,
            d=self.d,
            damping_support=(self.support_left, self.support_right),
        )

    @property
    def shift(self) -> complex:
        return complex(self.shift_real, self.shift_imag)

    def validated(self) -> "RunConfig":
        """Check cross-field invariants; returns self on success."""
        if self.command not in COMMANDS:
            raise ValidationError(
                f"command must be one of {', '.join(COMMANDS)}; got {self.command!r}"
            )
        purpose = "quasimode" if self.command in ("quasimode", "audit") else "simulate"
        validate_params(self.params, purpose=purpose)
        if purpose == "quasimode" and (self.support_left, self.support_right) != (
            0.0,
            1.0,
        ):
            raise ValidationError(
                "quasimode/audit experiments assume the damping support "
                "[0, 1]: the closed-form construction is derived for that "
                f"geometry (got [{self.support_left}, {self.support_right}])"
            )
        if self.N <= 0 or self.N % 2:
            raise ValidationError(f"N must be a positive even integer, got {self.N}")
        if self.T <= 0:
            raise ValidationError(f"T must be positive, got {self.T}")
        if self.dt is not None and self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.seed < 0:
            raise ValidationError(f"seed must be >= 0, got {self.seed}")
        if self.residual_tol is not None and self.residual_tol <= 0:
            raise ValidationError(
                f"residual_tol must be positive, got {self.residual_tol}"
            )
        if self.command == "scan":
            if not (0 < self.beta_min < self.beta_max):
                raise ValidationError(
                    f"need 0 < beta_min < beta_max, got "
                    f"[{self.beta_min}, {self.beta_max}]"
                )
            if self.beta_points < 2:
                raise ValidationError(
                    f"beta_points must be >= 2, got {self.beta_points}"
                )
            if self.gamma < 0:
                raise ValidationError(f"gamma must be >= 0, got {self.gamma}")
            if self.insert_quasimodes:
                if self.c <= 1.0:
                    raise ValidationError(
                        "insert_quasimodes requires c > 1: the resonant "
                        f"frequencies are only defined there (got c={self.c})"
                    )
                if self.n_max < 1:
                    raise ValidationError(f"n_max must be >= 1, got {self.n_max}")
        if self.command in ("quasimode", "audit"):
            for n in self.n_list:
                if n < 1:
                    raise ValidationError(f"mode indices must be >= 1, got {n}")
            if self.n_list and list(self.n_list) != sorted(set(self.n_list)):
                raise ValidationError("n_list must be strictly increasing")
        if self.command == "quasimode" and self.mesh_rule not in MESH_RULES:
            raise ValidationError(
                f"mesh_rule must be one of {', '.join(MESH_RULES)}; "
                f"got {self.mesh_rule!r}"
            )
        if self.command == "stationary":
            for n in self.N_list:
                if n <= 0 or n % 2:
                    raise ValidationError(
                        f"N_list entries must be positive even integers, got {n}"
                    )
        return self


_INT_KEYS = {"N", "beta_points", "n_max", "seed"}
_FLOAT_KEYS = {
    "c",
    "d",
    "support_left",
    "support_right",
    "T",
    "dt",
    "beta_min",
    "beta_max",
    "gamma",
    "residual_tol",
    "shift_real",
    "shift_imag",
}
_BOOL_KEYS = {"insert_quasimodes", "plot"}
_INT_LIST_KEYS = {"n_list", "N_list"}
_STR_KEYS = {"command", "mesh_rule", "output"}

_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _INT_LIST_KEYS | _STR_KEYS

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


def _coerce(key: str, value: object) -> object:
    """Convert a raw string/JSON value to the field's type."""
    if key in _STR_KEYS:
        if not isinstance(value, str):
            raise ValidationError(f"{key} must be a string, got {value!r}")
        return value
    if key in _BOOL_KEYS:
        if isinstance(value, bool):
            return value
        if isinstance(value, str):
            low = value.strip().lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
        raise ValidationError(f"{key} must be a boolean, got {value!r}")
    if key in _INT_KEYS:
        try:
            if isinstance(value, bool):
                raise ValueError
            out = int(str(value).strip())
        except ValueError:
            raise ValidationError(f"{key} must be an integer, got {value!r}") from None
        return out
    if key in _FLOAT_KEYS:
        try:
            if isinstance(value, bool):
                raise ValueError
            out = float(str(value).strip())
        except ValueError:
            raise ValidationError(f"{key} must be a number, got {value!r}") from None
        return out
    if key in _INT_LIST_KEYS:
        if isinstance(value, str):
            parts = [p for p in value.split(",") if p.strip()]
        elif isinstance(value, (list, tuple)):
            parts = list(value)
        else:
            raise ValidationError(
                f"{key} must be a comma list or JSON array, got {value!r}"
            )
        try:
            return tuple(int(str(p).strip()) for p in parts)
        except ValueError:
            raise ValidationError(f"{key} entries must be integers, got {value!r}") from None
    raise ValidationError(f"unknown key {key!r}")


def _pairs_from_json(text: str) -> list:
    """Key/value pairs from a JSON object, rejecting duplicate keys."""

    def hook(items):
        seen = set()
        for key, _val in items:
            if key in seen:
                raise ParseError(f"duplicate key {key!r} in JSON object")
            seen.add(key)
        return items

    try:
        items = json.loads(text, object_pairs_hook=hook)
    except ParseError:
        raise
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON object: {exc}") from None
    if not isinstance(items, list) or any(not isinstance(p, tuple) for p in items):
        raise ParseError("JSON config must be a single object of key/value pairs")
    flat = []
    for key, val in items:
        if isinstance(val, list) and key not in _INT_LIST_KEYS and key in _ALL_KEYS:
            raise ValidationError(f"{key} must be scalar, got array")
        flat.append((key, val))
    return flat


def _pairs_from_lines(text: str) -> list:
    """Key/value pairs from key=value lines, tracking line numbers."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ParseError(f"line {lineno}: empty key")
        pairs.append((key, value.strip()))
    return pairs


def parse_config(text: str, command: Optional[str] = None) -> RunConfig:
    """Parse and validate a configuration.

    Accepts either key=value lines or one JSON object.  Defaults
    (c=4, d=1, N=512, seed=0, ...) fill unspecified keys; unknown keys
    raise ValidationError and repeated keys raise ParseError.  A
    ``command`` argument (the CLI positional) takes precedence over any
    command key in the text.
    """
    stripped = text.strip()
    if stripped.startswith("{"):
        pairs = _pairs_from_json(stripped)
    else:
        pairs = _pairs_from_lines(text)

    seen = set()
    values = {}
    for key, raw in pairs:
        if key in seen:
            raise ParseError(f"duplicate key {key!r}")
        seen.add(key)
        if key not in _ALL_KEYS:
            raise ValidationError(
                f"unknown key {key!r}; known keys: {', '.join(sorted(_ALL_KEYS))}"
            )
        values[key] = _coerce(key, raw)

    if command is not None:
        values["command"] = _coerce("command", command)
    if "command" not in values:
        raise ValidationError(
            f"config must set command (one of {', '.join(COMMANDS)})"
        )
    return RunConfig(**values).validated()


def apply_overrides(config: RunConfig, overrides: Sequence[str]) -> RunConfig:
    """Apply ``key=value`` override strings on top of a parsed config.

    Overrides use the same keys and coercions as the file format; the
    result is re-validated.  Repeating a key across overrides is a parse
    error, but overriding a key already set in the file is the point.
    """
    seen = set()
    updates = {}
    for item in overrides:
        if "=" not in item:
            raise ParseError(f"override must be key=value, got {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        if key in seen:
            raise ParseError(f"duplicate override key {key!r}")
        seen.add(key)
        if key not in _ALL_KEYS:
            raise ValidationError(
                f"unknown key {key!r}; known keys: {', '.join(sorted(_ALL_KEYS))}"
            )
        updates[key] = _coerce(key, raw.strip())
    if not updates:
        return config.validated()
    return replace(config, **updates).validated()
