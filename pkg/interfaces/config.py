
"""
Run configuration schema for the coarse-geometry laboratory CLI.
"""
import json
import os
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from application.services import SimilarityThresholds
from domain.entities import GroupModel, HeintzeModel, SolTypeModel
from domain.exceptions import CoarseLabException, ConfigurationError
from domain.value_objects import FrameMetric, GroupPoint


class ModelSpec(BaseModel):
    """
    Model and frame metric, e.g.
    {"type": "soltype", "eigenvalues_up": [1], "eigenvalues_down": [1], "lambda": 1.0}.
    """
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    type: Literal["heintze", "soltype"]
    eigenvalues_up: List[float] = Field(default_factory=lambda: [1.0], min_length=1)
    eigenvalues_down: List[float] = Field(default_factory=list)
    lam: float = Field(1.0, alias="lambda", gt=0.0)
    frame_metric: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _check_model(self) -> "ModelSpec":
        if self.type == "soltype" and not self.eigenvalues_down:
            raise ValueError("A soltype model needs eigenvalues_down")
        if self.type == "heintze" and self.eigenvalues_down:
            raise ValueError("A heintze model takes no eigenvalues_down")
        try:
            self.metric()
        except CoarseLabException as e:
            raise ValueError(str(e))
        return self

    def build(self) -> GroupModel:
        try:
            if self.type == "heintze":
                return HeintzeModel.from_values(self.eigenvalues_up)
            return SolTypeModel.from_eigenvalues(self.eigenvalues_up, self.eigenvalues_down, self.lam)
        except CoarseLabException as e:
            raise ValueError(str(e))

    def metric(self) -> FrameMetric:
        model = self.build()
        if self.frame_metric is None:
            return FrameMetric.identity(model.dim)
        return FrameMetric(self.frame_metric).check(model)


class RunConfig(BaseModel):
    """
    Parameters shared by every subcommand; each subcommand reads what it needs.
    """
    model_config = ConfigDict(extra="forbid")

    model: ModelSpec = Field(default_factory=lambda: ModelSpec(type="soltype", eigenvalues_down=[1.0]))
    second_metric: Optional[List[List[float]]] = None
    p: Optional[List[float]] = None
    q: Optional[List[float]] = None
    grid_h: float = Field(0.1, gt=0.0)
    margin: float = Field(2.0, gt=0.0)
    samples: int = Field(200, ge=0)
    seed: int = 0
    separation_scale: float = Field(23.0, ge=1.0)
    control_pairs: int = Field(20, ge=0)
    n_max: int = Field(8, ge=1)
    m: int = Field(2, ge=2, le=256)
    refine: bool = False
    normalize: bool = True
    workers: int = Field(1, ge=1)
    horoball_distances: List[float] = Field(default_factory=lambda: [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    thresholds: SimilarityThresholds = Field(default_factory=SimilarityThresholds)
    format: Literal["json", "csv"] = "json"
    output: Optional[str] = None

    def point(self, name: str) -> GroupPoint:
        coordinates = getattr(self, name)
        if coordinates is None:
            raise ConfigurationError(f"Missing point '{name}' in configuration")
        try:
            return GroupPoint.from_coordinates(self.model.build(), coordinates)
        except CoarseLabException as e:
            raise ConfigurationError(f"Invalid point '{name}': {e}")

    def second(self) -> FrameMetric:
        if self.second_metric is None:
            raise ConfigurationError("Missing 'second_metric' in configuration")
        try:
            return FrameMetric(self.second_metric).check(self.model.build())
        except CoarseLabException as e:
            raise ConfigurationError(f"Invalid second_metric: {e}")


def load_config(path: Optional[str] = None, **overrides) -> RunConfig:
    """
    Reads a JSON configuration, applies non-None overrides and validates.

    COARSE_LAB_WORKERS supplies the worker count when neither the file nor
    an override sets it.
    """
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigurationError(f"Configuration file not found: {path}")
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ConfigurationError(f"Malformed configuration {path}: {e}")
        except OSError as e:
            raise ConfigurationError(f"Cannot read configuration {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"Configuration {path} must hold a JSON object")
    if "workers" not in data and os.getenv("COARSE_LAB_WORKERS"):
        data["workers"] = os.getenv("COARSE_LAB_WORKERS")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}")
