"""
Run configuration.

A single JSON document describes the problem, the discretizations, the
tolerances and the sweeps. Every field is validated before any solve
starts; ``SYMBREAK_OUT`` may override the output directory.
"""

import logging
import math
import os
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..core.descent import Tolerances
from ..core.errors import ConfigError
from ..core.nonlinearity import NonlinearitySpec
from ..core.problem import ProblemParams

logger = logging.getLogger(__name__)

OUTPUT_ENV = "SYMBREAK_OUT"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NonlinearityConfig(_Section):
    kind: Literal["pure_power", "double_power_min", "rational_power", "tabulated"] = "double_power_min"
    p: Optional[float] = Field(default=None, gt=2)
    p1: float = Field(default=3.0, gt=2)
    p2: float = Field(default=8.0, gt=2)
    M: float = Field(default=1.0, gt=0)
    mu: Optional[float] = Field(default=None, gt=2)
    # None: unbounded for the pure power, 1 otherwise
    s_star: Optional[float] = Field(default=None, gt=0)
    samples_s: Optional[List[float]] = None
    samples_f: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_kind(self):
        if self.kind == "pure_power" and self.p is None:
            raise ValueError("pure_power needs an exponent p")
        if self.kind == "tabulated" and (not self.samples_s or not self.samples_f):
            raise ValueError("tabulated needs samples_s and samples_f")
        return self

    def build(self) -> NonlinearitySpec:
        if self.kind == "pure_power":
            s_star = math.inf if self.s_star is None else self.s_star
            return NonlinearitySpec.pure_power(self.p, M=self.M, mu=self.mu, s_star=s_star)
        s_star = 1.0 if self.s_star is None else self.s_star
        if self.kind == "double_power_min":
            return NonlinearitySpec.double_power_min(self.p2, p1=self.p1, M=self.M, mu=self.mu,
                                                     s_star=s_star)
        if self.kind == "rational_power":
            return NonlinearitySpec.rational_power(self.p2, p1=self.p1, M=self.M, mu=self.mu,
                                                   s_star=s_star)
        return NonlinearitySpec.tabulated(self.samples_s, self.samples_f, self.p1, self.p2, M=self.M,
                                          mu=self.mu if self.mu is not None else self.p2,
                                          s_star=s_star)


class ProblemConfig(_Section):
    N: int = Field(default=4, ge=3)
    alpha: float = Field(default=3.0, gt=0)
    A: float = Field(default=100.0, gt=0)
    nonlinearity: NonlinearityConfig = NonlinearityConfig()

    @field_validator("alpha")
    @classmethod
    def _alpha_not_two(cls, value: float) -> float:
        if value == 2:
            raise ValueError("alpha = 2 is excluded")
        return value

    @property
    def p1(self) -> float:
        nl = self.nonlinearity
        return nl.p if nl.kind == "pure_power" else nl.p1

    @property
    def p2(self) -> float:
        nl = self.nonlinearity
        return nl.p if nl.kind == "pure_power" else nl.p2

    def build(self, A: Optional[float] = None) -> ProblemParams:
        return ProblemParams(self.N, self.alpha, self.A if A is None else A, self.nonlinearity.build())


class RadialGridConfig(_Section):
    """Radial grid in units of the natural length."""

    nodes: int = Field(default=2000, ge=3, le=100000)
    r_min: float = Field(default=1e-4, gt=0)
    r_max: float = Field(default=60.0, gt=0)
    init_width: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _bounds(self):
        if self.r_min >= self.r_max:
            raise ValueError("r_min must be below r_max")
        return self


class CylGridConfig(_Section):
    nodes: int = Field(default=256, ge=3, le=1024)
    r_min: float = Field(default=1e-3, gt=0)
    r_max: float = Field(default=20.0, gt=0)
    kind: Literal["geometric", "uniform"] = "geometric"

    @model_validator(mode="after")
    def _bounds(self):
        if self.r_min >= self.r_max:
            raise ValueError("r_min must be below r_max")
        return self


class ToleranceConfig(_Section):
    residual: float = Field(default=1e-6, gt=0)
    max_iter: int = Field(default=2000, ge=0)
    nehari_rtol: float = Field(default=1e-13, gt=0)
    t_max: float = Field(default=1e8, gt=1)
    log_every: int = Field(default=50, ge=0)

    def build(self) -> Tolerances:
        return Tolerances(residual=self.residual, max_iter=self.max_iter,
                          nehari_rtol=self.nehari_rtol, t_max=self.t_max, log_every=self.log_every)


class QuadratureConfig(_Section):
    order: int = Field(default=64, ge=4, le=512)
    panels: int = Field(default=4, ge=1, le=64)
    rtol: Optional[float] = Field(default=1e-6, gt=0)


class OutputConfig(_Section):
    directory: str = "results"
    json_mirror: bool = False
    field_dumps: bool = False


class ClassifyConfig(_Section):
    alpha_min: float = Field(default=0.1, gt=0)
    alpha_max: float = Field(default=8.0, gt=0)
    p_min: float = Field(default=2.05, gt=2)
    p_max: float = Field(default=12.0, gt=2)
    resolution: int = Field(default=40, ge=0)


class RunConfig(_Section):
    problem: ProblemConfig = ProblemConfig()
    radial_grid: RadialGridConfig = RadialGridConfig()
    cyl_grid: CylGridConfig = CylGridConfig()
    tolerances: ToleranceConfig = ToleranceConfig()
    quadrature: QuadratureConfig = QuadratureConfig()
    output: OutputConfig = OutputConfig()
    classify: ClassifyConfig = ClassifyConfig()
    A_list: List[float] = Field(default_factory=lambda: [1.0, 3.0, 10.0, 30.0, 100.0, 300.0])
    testfn_A_list: List[float] = Field(default_factory=lambda: [1e2, 1e3, 1e4, 1e5, 1e6])
    K_list: List[int] = Field(default_factory=lambda: [2])
    N_list: List[int] = Field(default_factory=lambda: list(range(4, 11)))
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    workers: int = Field(default=1, ge=1, le=256)

    @field_validator("A_list", "testfn_A_list")
    @classmethod
    def _increasing(cls, values: List[float]) -> List[float]:
        if any(a <= 0 for a in values):
            raise ValueError("A values must be positive")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("A values must be strictly increasing")
        return values

    @model_validator(mode="after")
    def _check_symmetry(self):
        N = self.problem.N
        for K in self.K_list:
            if not 2 <= K <= N - 2:
                raise ValueError(f"K = {K} outside [2, {N - 2}] for N = {N}")
        return self

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.model_validate_json(text)


def load_config(path: Optional[str]) -> RunConfig:
    """
    Read and validate a run config; defaults when path is None.

    Raises:
        ConfigError: If the file is unreadable or fails validation
    """
    if path is None:
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}")
    try:
        config = RunConfig.from_json(text)
    except ValidationError as exc:
        raise ConfigError(f"Invalid config {path}:\n{exc}")
    logger.info("loaded config %s", path)
    return config


def resolve_output_dir(config: RunConfig, cli_out: Optional[str] = None) -> str:
    """--out wins over SYMBREAK_OUT, which wins over the config."""
    if cli_out:
        return cli_out
    return os.environ.get(OUTPUT_ENV) or config.output.directory
