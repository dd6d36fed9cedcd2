"""JSON scenario schema for the command-line front end."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from laxlab.fields import GridSpec


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ZeroFamily(_Strict):
    name: Literal["zero"]


class ConstantFamily(_Strict):
    name: Literal["constant"]
    u12: float = 0.0
    u13: float = 0.0
    u23: float = 0.0
    v12: float = 0.0
    v13: float = 0.0
    v23: float = 0.0
    h11: float = 0.0
    h22: float = 0.0
    h: float = 0.0


class KinkFamily(_Strict):
    name: Literal["sine_gordon_kink"]
    v: float = Field(0.0, gt=-1.0, lt=1.0)
    x0: float = 0.0


class CsvFamily(_Strict):
    name: Literal["custom_csv"]
    path: str


Family = Annotated[
    Union[ZeroFamily, ConstantFamily, KinkFamily, CsvFamily], Field(discriminator="name")
]


class GridModel(_Strict):
    x_min: float
    x_max: float
    t_min: float
    t_max: float
    nx: int = Field(ge=3)
    nt: int = Field(ge=3)

    @model_validator(mode="after")
    def _check(self):
        self.spec()
        return self

    def spec(self) -> GridSpec:
        return GridSpec(**self.model_dump())


class Tolerances(_Strict):
    residual: float = Field(1e-6, gt=0)
    branch_threshold: Optional[float] = Field(None, gt=0)
    degeneracy_guard: float = Field(0.05, ge=0)
    solution: Optional[float] = Field(None, gt=0)
    curvature: float = Field(0.02, gt=0)
    order_window: tuple[float, float] = (1.7, 2.3)


class SolveOptions(_Strict):
    cfl: float = Field(0.5, gt=0)
    n_steps: Optional[int] = Field(None, ge=1)


class ReconstructOptions(_Strict):
    seed: Optional[tuple[tuple[float, float, float], ...]] = None


class Perturbation(_Strict):
    u23_factor: float = 1.0


class Scenario(_Strict):
    family: Family
    grid: GridModel
    derivatives: Literal["auto", "closed_form", "finite_difference"] = "auto"
    tolerances: Tolerances = Tolerances()
    output_dir: str = "laxlab_out"
    solve: SolveOptions = SolveOptions()
    reconstruct: ReconstructOptions = ReconstructOptions()
    perturbation: Perturbation = Perturbation()
    refinements: Optional[tuple[int, ...]] = None

    @model_validator(mode="after")
    def _check_refinements(self):
        if self.refinements is not None and any(n < 3 for n in self.refinements):
            raise ValueError("refinements entries must be >= 3")
        return self


class ScenarioError(ValueError):
    pass


def _describe(err: ValidationError) -> str:
    e = err.errors()[0]
    loc = ".".join(str(p) for p in e["loc"]) or "<root>"
    return f"{loc}: {e['msg']}"


def load_scenario(path) -> Scenario:
    """Parse and fully validate a scenario file; raise ScenarioError with one line."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    try:
        sc = Scenario.model_validate(raw)
    except ValidationError as exc:
        raise ScenarioError(_describe(exc)) from None
    if isinstance(sc.family, CsvFamily):
        csv_path = Path(sc.family.path)
        if not csv_path.is_absolute():
            csv_path = path.parent / csv_path
        sc = sc.model_copy(update={"family": CsvFamily(name="custom_csv", path=str(csv_path))})
    return sc
