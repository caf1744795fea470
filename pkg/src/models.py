from datetime import datetime
from typing import Dict, List, Optional

from pydantic import field_validator
from sqlalchemy import JSON
from sqlmodel import Column, Field, SQLModel

from . import config as settings

VERDICTS = ("pass", "fail", "inconclusive")
COMMANDS = ("norms", "synth", "extend", "weld", "verify", "sweep")


class NormReport(SQLModel):
    """A norm or seminorm value with the discretization it was computed on"""
    value: float = Field(ge=0)
    grid_size: int = Field(ge=1)
    exclusion_band: Optional[float] = Field(default=None, ge=0)
    method: str
    sup: Optional[float] = Field(default=None, ge=0)
    energy: Optional[float] = Field(default=None, ge=0)
    details: Dict = Field(default_factory=dict)


class CheckVerdict(SQLModel):
    name: str
    verdict: str
    measured: Dict = Field(default_factory=dict)
    cause: Optional[str] = None

    @field_validator("verdict")
    @classmethod
    def _known_verdict(cls, v):
        if v not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")
        return v


class ExperimentReport(SQLModel):
    name: str
    checks: List[CheckVerdict] = Field(default_factory=list)
    provenance: Dict = Field(default_factory=dict)

    @property
    def overall(self) -> str:
        verdicts = [c.verdict for c in self.checks]
        if "fail" in verdicts:
            return "fail"
        if "inconclusive" in verdicts or not verdicts:
            return "inconclusive"
        return "pass"

    def check(self, name: str) -> CheckVerdict:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


class RunConfig(SQLModel):
    """Validated parameters of one CLI invocation"""
    command: str
    # defaults are read from the environment settings at construction time
    grid_n: int = Field(default_factory=lambda: settings.GRID_N, ge=257, le=65537)
    window: float = Field(default_factory=lambda: settings.WINDOW, gt=0, le=1000)
    levels: int = Field(default_factory=lambda: settings.LEVELS, ge=6, le=40)
    resolution: int = Field(default_factory=lambda: settings.RESOLUTION, ge=64, le=65536)
    seed: int = Field(default_factory=lambda: settings.SEED, ge=0)
    out_dir: str = Field(default_factory=lambda: settings.OUT_DIR)
    ladder: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    tolerances: Dict[str, float] = Field(default_factory=dict)
    inputs: Dict[str, str] = Field(default_factory=dict)

    @field_validator("command")
    @classmethod
    def _known_command(cls, v):
        if v not in COMMANDS:
            raise ValueError(f"command must be one of {COMMANDS}")
        return v

    @field_validator("ladder")
    @classmethod
    def _decreasing_ladder(cls, v):
        if not v:
            raise ValueError("epsilon ladder must not be empty")
        if any(e <= 0 or e > 1 for e in v):
            raise ValueError("epsilon ladder values must lie in (0, 1]")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("epsilon ladder must be strictly decreasing")
        return v

    @field_validator("tolerances")
    @classmethod
    def _positive_tolerances(cls, v):
        for key, tol in v.items():
            if not tol > 0:
                raise ValueError(f"tolerance '{key}' must be positive")
        return v


class RunRecord(SQLModel, table=True):
    __tablename__ = "run_record"
    __table_args__ = {'extend_existing': True}
    id: Optional[int] = Field(default=None, primary_key=True)
    command: str
    config_hash: str = Field(index=True)
    exit_code: int
    summary: Dict = Field(default_factory=dict, sa_column=Column(JSON))
    created_at: datetime = Field(default_factory=datetime.utcnow)
