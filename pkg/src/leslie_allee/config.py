"""Run configuration, presets and their JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional, Union

from .model import OriginalParams, ScaledParams

__all__ = ["MODES", "Numerics", "Output", "RunConfig", "presets", "preset", "parse_range"]

MODES = ("equilibria", "portrait", "cycle", "manifolds", "basin", "diagram", "verify")
FORMATS = ("json", "csv", "svg", "txt")


def parse_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise ValueError(f"range must look like lo:hi, got {text!r}")
    a, b = float(lo), float(hi)
    if not (math.isfinite(a) and math.isfinite(b) and 0 < a < b):
        raise ValueError(f"range must be positive and ordered, got {text!r}")
    return (a, b)


@dataclass(frozen=True)
class Numerics:
    tol: float = 1e-9
    q_range: Optional[tuple[float, float]] = None
    s_range: Optional[tuple[float, float]] = None
    resolution: int = 64
    t_max: float = 5e4

    def __post_init__(self):
        if not 0 < self.tol <= 1e-4:
            raise ValueError(f"tol must lie in (0, 1e-4], got {self.tol!r}")
        for name in ("q_range", "s_range"):
            r = getattr(self, name)
            if r is not None:
                r = (float(r[0]), float(r[1]))
                if not 0 < r[0] < r[1]:
                    raise ValueError(f"{name} must be positive and ordered, got {r!r}")
                object.__setattr__(self, name, r)
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")


@dataclass(frozen=True)
class Output:
    path: str = "out"
    formats: tuple[str, ...] = FORMATS

    def __post_init__(self):
        object.__setattr__(self, "formats", tuple(self.formats))
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ValueError(f"unknown output format(s) {bad}; choose from {FORMATS}")


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: Union[ScaledParams, OriginalParams]
    numerics: Numerics = field(default_factory=Numerics)
    output: Output = field(default_factory=Output)
    name: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if not isinstance(self.params, (ScaledParams, OriginalParams)):
            raise TypeError("params must be ScaledParams or OriginalParams")

    @property
    def scaled(self) -> ScaledParams:
        from .model import rescale

        p = self.params
        return p if isinstance(p, ScaledParams) else rescale(p)

    def with_params(self, **changes) -> "RunConfig":
        valid = {f.name for f in fields(self.params)}
        unknown = set(changes) - valid
        if unknown:
            raise ValueError(f"unknown parameter(s) {sorted(unknown)} for {type(self.params).__name__}")
        return replace(self, params=replace(self.params, **changes))

    def to_dict(self) -> dict:
        kind = "scaled" if isinstance(self.params, ScaledParams) else "original"
        num = asdict(self.numerics)
        for k in ("q_range", "s_range"):
            if num[k] is not None:
                num[k] = list(num[k])
        return {
            "name": self.name,
            "mode": self.mode,
            "params": {kind: asdict(self.params)},
            "numerics": num,
            "output": {"path": self.output.path, "formats": list(self.output.formats)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        params = d.get("params")
        if not isinstance(params, dict) or len(params) != 1:
            raise ValueError('params must hold exactly one of "scaled" or "original"')
        (kind, vals), = params.items()
        if kind == "scaled":
            p = ScaledParams(**{k: float(v) for k, v in vals.items()})
        elif kind == "original":
            p = OriginalParams(**{k: float(v) for k, v in vals.items()})
        else:
            raise ValueError(f'unknown params kind {kind!r}; use "scaled" or "original"')
        num = dict(d.get("numerics", {}))
        for k in ("q_range", "s_range"):
            if num.get(k) is not None:
                num[k] = tuple(num[k])
        out = d.get("output", {})
        return cls(
            mode=d["mode"],
            params=p,
            numerics=Numerics(**num),
            output=Output(**{**out, "formats": tuple(out.get("formats", FORMATS))}),
            name=d.get("name", ""),
        )

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


def _sc(M, A, C, Q, S) -> ScaledParams:
    return ScaledParams(A=A, C=C, M=M, Q=Q, S=S)


def presets() -> dict[str, RunConfig]:
    """Named configurations for the published parameter sets.

    ``fig13-alt`` uses C = 0.019, for which the weak-case diagram shows
    both fold lines; the printed C = 0.19 yields one.
    """
    strong = dict(M=0.1, A=0.08)
    weak = dict(M=-0.1, A=0.08)
    p = {
        "fig2a": RunConfig("portrait", _sc(**strong, C=0.1, Q=0.19, S=0.2)),
        "fig2b": RunConfig("portrait", _sc(**strong, C=0.1, Q=0.19, S=0.08)),
        "fig2c": RunConfig("portrait", _sc(**strong, C=0.1, Q=0.19, S=0.06)),
        # S near the computed heteroclinic connection; the caption fixes only M, A, Q, C
        "fig3": RunConfig("manifolds", _sc(**strong, C=0.1, Q=0.19, S=0.0934)),
        "fig4": RunConfig("portrait", _sc(**strong, C=0.12176874, Q=0.19, S=0.08)),
        "fig5": RunConfig(
            "diagram",
            _sc(**strong, C=0.19, Q=0.19, S=0.08),
            Numerics(q_range=(0.05, 0.25), s_range=(0.005, 0.3)),
        ),
        "fig10a": RunConfig("portrait", _sc(M=-0.1, A=0.4, C=0.06, Q=0.53, S=0.15)),
        "fig10b": RunConfig("portrait", _sc(M=-0.1, A=0.4, C=0.06, Q=0.53, S=0.25)),
        # Q is printed to seven digits, so (0, C) is degenerate only to ~1e-8
        "fig11": RunConfig("verify", _sc(M=-0.1, A=0.5, C=0.09, Q=0.5555556, S=0.15), Numerics(tol=1e-7)),
        "fig13": RunConfig(
            "diagram",
            _sc(**weak, C=0.19, Q=0.2, S=0.1),
            Numerics(q_range=(0.01, 0.35), s_range=(0.005, 0.4)),
        ),
        "fig13-alt": RunConfig(
            "diagram",
            _sc(**weak, C=0.019, Q=0.3, S=0.1),
            Numerics(q_range=(0.01, 0.4), s_range=(0.005, 0.4)),
        ),
    }
    return {k: replace(v, name=k) for k, v in p.items()}


def preset(name: str) -> RunConfig:
    table = presets()
    if name not in table:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(table))}")
    return table[name]
