"""Run configuration: plain-text key/value files with sections, parsed
into a validated RunConfig.  Reproducibility of experiments is the
product, so there are no environment overrides and the resolved config is
embedded verbatim in every JSON summary."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .coupling import CouplingFunctional
from .errors import ConfigError
from .hamiltonians import Mechanical, Potential, QuadraticDrift
from .measures import CircleMeasure

VMAX_DEFAULT = 10.0


@dataclass
class RunConfig:
    # model
    family: str = "quadratic-drift"
    model_dim: int = 1
    shift: float = 0.0
    potential: str = "zero"
    # grid
    n: int = 512
    dt: float = 1e-3
    vmax: float = VMAX_DEFAULT
    # coupling / measures
    coupling: str = "cosine4pi"
    m_t: str = "one-plus-cosine"
    m1: str = "one-plus-cosine"
    m2: str = "lebesgue"
    # run parameters
    t_probe: float = 20.0
    dt_probe: float = 2e-3
    horizon: float = 3.0
    horizons: list = field(default_factory=lambda: [5.0, 10.0, 20.0, 40.0])
    window: float = 0.5
    periods: int = 2
    pairs: int = 50
    phi: str = "zero"
    c: float = 0.0
    a_values: list = field(default_factory=lambda: [0.0])
    example_dim: int = 1
    csv_stride: int = 0  # 0 = auto
    k_test: int = 8      # Fourier modes in the weak-residual test bank
    # tolerances
    tol_c0: float = 0.05
    tol_periodicity: float = 1e-4
    tol_nontriviality: float = 1e-3
    tol_lipschitz_slack: float = 1e-9
    tol_convexity: float = 1e-2
    tol_residual_closed: float = 1e-10
    tol_residual_grid: float = 1e-3
    tol_converge_final: float = 5e-3
    tol_converge_slack: float = 0.1

    _FLOATS = {
        "shift", "dt", "vmax", "t_probe", "dt_probe", "horizon", "window",
        "c", "tol_c0", "tol_periodicity", "tol_nontriviality",
        "tol_lipschitz_slack", "tol_convexity", "tol_residual_closed",
        "tol_residual_grid", "tol_converge_final", "tol_converge_slack",
    }
    _INTS = {"model_dim", "n", "periods", "pairs", "example_dim", "csv_stride", "k_test"}
    _LISTS = {"horizons", "a_values"}

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path}")
        cfg = cls()
        aliases = {"f": "coupling", "dim": "model_dim"}
        for section in parser.sections():
            for key, raw in parser.items(section):
                key = aliases.get(key, key).replace("-", "_")
                if not hasattr(cfg, key) or key.startswith("_"):
                    raise ConfigError(f"unknown config key [{section}] {key}")
                if key in cls._LISTS:
                    value = [float(tok) for tok in raw.replace(",", " ").split()]
                elif key in cls._INTS:
                    value = int(raw)
                elif key in cls._FLOATS:
                    value = float(raw)
                else:
                    value = raw.strip()
                setattr(cfg, key, value)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        n = self.n
        if n < 64 or n > 4096 or (n & (n - 1)) != 0:
            raise ConfigError("grid invariant violated: n must be a power of two in [64, 4096]")
        for name in sorted(self._FLOATS):
            if name.startswith("tol_") and getattr(self, name) <= 0.0:
                raise ConfigError(f"tolerance invariant violated: {name} must be > 0")
        dx = 1.0 / n
        for label, dt in (("dt", self.dt), ("dt_probe", self.dt_probe)):
            if dt < dx / self.vmax:
                raise ConfigError(
                    f"time-step invariant violated: {label} too small; the velocity "
                    f"window spans less than one grid cell ({label} < dx/vmax)"
                )
            if dt > 0.5 / self.vmax:
                raise ConfigError(
                    f"time-step invariant violated: {label} too large; the velocity "
                    f"window exceeds the half circle ({label} > 1/(2 vmax))"
                )
        if self.window <= 0.0:
            raise ConfigError("window invariant violated: window must be > 0")
        if any(h <= 0.0 for h in self.horizons) or self.horizon <= 0.0:
            raise ConfigError("horizon invariant violated: horizons must be > 0")
        if self.periods < 1 or self.pairs < 1:
            raise ConfigError("count invariant violated: periods and pairs must be >= 1")

    # -- builders -----------------------------------------------------------
    def build_model(self):
        if self.family in ("quadratic-drift", "quadratic_drift"):
            model = QuadraticDrift(self.model_dim)
        elif self.family == "mechanical":
            model = Mechanical(self.shift, Potential.from_name(self.potential))
        else:
            raise ConfigError(f"unknown model family {self.family!r}")
        model.validate()
        return model

    def build_coupling(self) -> CouplingFunctional:
        try:
            return CouplingFunctional.from_name(self.coupling)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def build_measure(self, name: str) -> CircleMeasure:
        try:
            return CircleMeasure.from_name(name, self.n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def build_phi(self) -> np.ndarray:
        xs = np.arange(self.n) / self.n
        if self.phi == "zero":
            return np.zeros(self.n)
        if self.phi == "cosine":
            return np.cos(2.0 * np.pi * xs)
        raise ConfigError(f"unknown initial value id {self.phi!r}")

    def as_dict(self) -> dict:
        out = {}
        for name in sorted(vars(self)):
            if name.startswith("_"):
                continue
            value = getattr(self, name)
            out[name] = list(value) if isinstance(value, list) else value
        return out
