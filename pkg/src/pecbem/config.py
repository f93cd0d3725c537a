"""Line-based experiment configuration: `key = value`, `#` comments."""

from dataclasses import dataclass, field
from typing import List, Optional

from .spectral import parse_scheme


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Validated experiment description with defaults filled in."""

    geometry: str = ""                  # "cube" | "off"
    side: float = 1.0
    n: int = 1
    off_path: Optional[str] = None
    refine_j: int = 0
    frequencies_hz: List[float] = field(default_factory=list)
    alpha: float = 0.5
    schemes: List[str] = field(default_factory=lambda: ["cfie:projector"])
    tol: float = 1e-6
    inner_tol: float = 1e-12
    power_tol: float = 1e-3
    dphi: str = "jacobi"
    seed: int = 0
    dense_cap: int = 4096
    out_dir: str = "out"
    experiment: str = "solve"           # solve | sweep-refine | sweep-freq | sweep-resonance
    refine_levels: int = 3
    resonance_window: Optional[List[float]] = None
    resonance_steps: int = 41

    def validate(self) -> "ExperimentConfig":
        if self.geometry not in ("cube", "off"):
            raise ConfigError(f"geometry must be 'cube' or 'off', got {self.geometry!r}")
        if self.geometry == "off" and not self.off_path:
            raise ConfigError("geometry = off requires off_path")
        if self.geometry == "cube" and (self.side <= 0 or self.n < 1):
            raise ConfigError("cube geometry needs side > 0 and n >= 1")
        if not self.frequencies_hz and self.experiment != "sweep-resonance":
            raise ConfigError("at least one frequency is required (key 'f')")
        if any(f <= 0 for f in self.frequencies_hz):
            raise ConfigError("frequencies must be positive")
        for t in (self.tol, self.inner_tol, self.power_tol):
            if not 0.0 < t < 1.0:
                raise ConfigError(f"tolerances must lie in (0, 1), got {t}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        for s in self.schemes:
            parse_scheme(s)
        if self.dphi not in ("jacobi", "dyadic", "both"):
            raise ConfigError(f"dphi must be jacobi|dyadic|both, got {self.dphi!r}")
        if self.experiment not in ("solve", "sweep-refine", "sweep-freq",
                                   "sweep-resonance"):
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.experiment == "sweep-resonance":
            if not self.resonance_window or len(self.resonance_window) != 2:
                raise ConfigError("sweep-resonance needs resonance_window = f0,f1")
            if self.resonance_steps < 1:
                raise ConfigError("resonance_steps must be >= 1")
        return self


_STR_KEYS = {"geometry", "off_path", "dphi", "out_dir", "experiment"}
_INT_KEYS = {"n", "refine_j", "seed", "dense_cap", "refine_levels", "resonance_steps"}
_FLOAT_KEYS = {"side", "alpha", "tol", "inner_tol", "power_tol"}
_LIST_FLOAT_KEYS = {"f": "frequencies_hz", "resonance_window": "resonance_window"}
_LIST_STR_KEYS = {"schemes": "schemes"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; unknown keys raise naming the key and line."""
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _STR_KEYS:
                setattr(cfg, key, value)
            elif key in _INT_KEYS:
                setattr(cfg, key, int(value))
            elif key in _FLOAT_KEYS:
                setattr(cfg, key, float(value))
            elif key in _LIST_FLOAT_KEYS:
                setattr(cfg, _LIST_FLOAT_KEYS[key],
                        [float(v) for v in value.split(",") if v.strip()])
            elif key in _LIST_STR_KEYS:
                setattr(cfg, _LIST_STR_KEYS[key],
                        [v.strip() for v in value.split(",") if v.strip()])
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return cfg.validate()


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [
        f"geometry = {cfg.geometry}",
        f"experiment = {cfg.experiment}",
    ]
    if cfg.geometry == "cube":
        lines += [f"side = {cfg.side!r}", f"n = {cfg.n}"]
    else:
        lines += [f"off_path = {cfg.off_path}"]
    lines += [
        f"refine_j = {cfg.refine_j}",
        "f = " + ",".join(repr(f) for f in cfg.frequencies_hz),
        f"alpha = {cfg.alpha!r}",
        "schemes = " + ",".join(cfg.schemes),
        f"tol = {cfg.tol!r}",
        f"inner_tol = {cfg.inner_tol!r}",
        f"power_tol = {cfg.power_tol!r}",
        f"dphi = {cfg.dphi}",
        f"seed = {cfg.seed}",
        f"dense_cap = {cfg.dense_cap}",
        f"out_dir = {cfg.out_dir}",
        f"refine_levels = {cfg.refine_levels}",
    ]
    if cfg.resonance_window:
        lines.append("resonance_window = " + ",".join(repr(f) for f in cfg.resonance_window))
        lines.append(f"resonance_steps = {cfg.resonance_steps}")
    return "\n".join(lines) + "\n"
