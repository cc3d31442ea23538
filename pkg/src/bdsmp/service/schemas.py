"""Request and response models for the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

Cell = float | int | str | None


class ModelDescriptor(BaseModel):
    """Inline birth-death model: linear intensity slopes per state."""

    N: int = Field(ge=1)
    g_plus: list[tuple[float, float]]
    g_minus: list[tuple[float, float]]
    sojourn_family: Literal["exponential", "geometric"] = "exponential"
    eps0: float = 1.0


class ModelRef(BaseModel):
    """Either a named preset or an inline descriptor, never both."""

    preset: Optional[str] = None
    descriptor: Optional[ModelDescriptor] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.preset is None) == (self.descriptor is None):
            raise ValueError("give exactly one of preset / descriptor")
        return self


class ExpandRequest(BaseModel):
    model: ModelRef
    L: int = Field(default=3, ge=0)
    states: Optional[list[int]] = None


class ExactRequest(BaseModel):
    model: ModelRef
    eps: list[float] = Field(min_length=1)
    states: Optional[list[int]] = None


class CompareRequest(BaseModel):
    model: ModelRef
    L: int = Field(default=3, ge=0)
    eps: list[float] = Field(min_length=1)
    states: Optional[list[int]] = None


class SimulateRequest(BaseModel):
    model: ModelRef
    eps: float
    horizon: float = 1e6
    seed: int = 0
    replications: int = Field(default=0, ge=0)
    start: int = 0


class ReproduceRequest(BaseModel):
    figures: Optional[list[str]] = None


class Table(BaseModel):
    name: str
    columns: list[str]
    rows: list[list[Cell]]
    model_digest: str
    command: str


class TableResponse(BaseModel):
    table: Table
    version: str


class TablesResponse(BaseModel):
    tables: list[Table]
    version: str


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorEnvelope(BaseModel):
    error: ErrorBody
