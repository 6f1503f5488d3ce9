from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from services.cube_ray import ChildEnumeration


MIN_TILING_RADIUS = 8
SEED_LIMIT = 2 ** 64


class Command(str, Enum):
    SAMPLE_TILING = "sample-tiling"
    SAMPLE_CUBE = "sample-cube"
    SAMPLE_PRODUCT = "sample-product"
    SAMPLE_ABELIAN = "sample-abelian"
    SWEEP_CUBE = "sweep-cube"
    INVARIANCE = "invariance"
    VERIFY = "verify"


class Suite(str, Enum):
    TILING = "tiling"
    CUBE = "cube"
    PRODUCT = "product"
    ABELIAN = "abelian"


class InvarianceLaw(str, Enum):
    TILING = "tiling"
    UNAVERAGED = "tiling-unaveraged"
    PERCOLATION = "percolation"


class CheckReport(BaseModel):
    name: str = Field(..., description="Property checked")
    passed: bool
    witness: Optional[Any] = Field(default=None, description="Vertex or edge violating the property")
    trusted: str = Field(default="", description="Region the check quantifies over")
    details: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def failing_reports_carry_witness(self) -> "CheckReport":
        if not self.passed and self.witness is None:
            raise ValueError(f"failing check {self.name!r} has no witness")
        return self


class TranslateResult(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    translate: List[int]
    frequency: float = Field(..., ge=0.0, le=1.0)
    z_score: float
    p_value: float = Field(..., ge=0.0, le=1.0)
    rejected: bool


class InvarianceReport(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    event: str = Field(..., description="Cylinder event tested")
    law: str
    samples: int
    alpha: float
    corrected_alpha: float = Field(..., description="Per-translate level after Bonferroni correction")
    baseline_frequency: float = Field(..., ge=0.0, le=1.0)
    translates: List[TranslateResult]
    rejected: bool
    seed: int


class SuiteReport(BaseModel):
    suite: Suite
    sample: int
    checks: List[CheckReport]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(use_enum_values=False, extra="forbid")

    command: Command
    construction: Optional[str] = Field(default=None, description="Construction id for invariance campaigns")
    radius: int = Field(default=20, ge=1)
    margin: int = Field(default=6, ge=0)
    dimension: int = Field(default=3, description="Lattice dimension for sample-product")
    rank: int = Field(default=2, ge=1, description="Free rank for sample-abelian")
    moduli: List[int] = Field(default_factory=list)
    ends: int = Field(default=1, description="Number of tree ends for sample-cube")
    axis: int = Field(default=0, ge=0)
    graph: Optional[str] = Field(default=None, description="Graph JSON for sample-cube; grid window if absent")
    enumeration: ChildEnumeration = ChildEnumeration.ASCENDING
    seed: int = Field(default=0, ge=0, lt=SEED_LIMIT)
    samples: int = Field(default=1, ge=1, description="Sample count N")
    alpha: float = Field(default=0.01, gt=0.0, lt=1.0)
    events: Optional[List[List[List[int]]]] = Field(default=None, description="Single-edge events as [[u, v], ...]")
    suite: Optional[Suite] = None
    verify: bool = False
    input: Optional[str] = Field(default=None, description="Sample JSON for verify")
    output_dir: Optional[str] = None
    render: bool = True
    max_vertices: int = Field(default=7, ge=3, le=7)
    exhaustive_orders: int = Field(default=5, ge=0)
    random_orders: int = Field(default=10, ge=0)
    subtrees: int = Field(default=100, ge=0, description="Finite tile subtrees checked per tiling sample")
    max_subtree_tiles: int = Field(default=50, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)

    @field_validator("moduli")
    @classmethod
    def moduli_at_least_two(cls, moduli: List[int]) -> List[int]:
        if any(m < 2 for m in moduli):
            raise ValueError(f"all moduli must be at least 2, got {moduli}")
        return moduli

    @field_validator("ends")
    @classmethod
    def one_or_two_ends(cls, ends: int) -> int:
        if ends not in (1, 2):
            raise ValueError(f"trees have 1 or 2 ends, got {ends}")
        return ends

    @model_validator(mode="after")
    def check_command(self) -> "ExperimentConfig":
        if self.radius <= self.margin:
            raise ValueError(f"need radius > margin, got radius={self.radius}, margin={self.margin}")
        tiled = {Command.SAMPLE_TILING, Command.SAMPLE_PRODUCT}
        if self.command is Command.SAMPLE_ABELIAN and self.rank >= 2:
            tiled.add(Command.SAMPLE_ABELIAN)
        if self.command is Command.INVARIANCE and self.construction != InvarianceLaw.PERCOLATION.value:
            tiled.add(Command.INVARIANCE)
        if self.command in tiled and self.radius < MIN_TILING_RADIUS:
            raise ValueError(f"tiling windows need radius >= {MIN_TILING_RADIUS}, got {self.radius}")
        if self.command is Command.SAMPLE_PRODUCT and self.dimension < 3:
            raise ValueError(f"product rays need dimension >= 3, got {self.dimension}")
        if self.command is Command.VERIFY and not self.input:
            raise ValueError("verify needs an input sample")
        if self.command is Command.INVARIANCE:
            laws = [law.value for law in InvarianceLaw]
            if self.construction not in laws:
                raise ValueError(f"invariance campaigns run on one of {laws}, got {self.construction!r}")
        if self.command is Command.SAMPLE_CUBE and self.graph is None and self.axis > 1:
            raise ValueError(f"axis {self.axis} is outside the plane window")
        return self
