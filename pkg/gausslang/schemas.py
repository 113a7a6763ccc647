# gausslang/schemas.py
from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, model_validator


class StateOut(BaseModel):
    mean: list[float]
    cov: list[list[float]]

    @classmethod
    def from_state(cls, psi) -> "StateOut":
        return cls(mean=psi.mean.tolist(), cov=psi.cov.tolist())


class GaussMapOut(BaseModel):
    A: list[list[float]]
    b: list[float]
    Sigma: list[list[float]]

    @classmethod
    def from_map(cls, f) -> "GaussMapOut":
        return cls(A=f.A.tolist(), b=f.b.tolist(), Sigma=f.Sigma.tolist())


class TraceStep(BaseModel):
    term: str
    prior: Optional[StateOut] = None


class RunReport(BaseModel):
    status: Literal["ok", "bot"]
    mean: Optional[list[float]] = None
    cov: Optional[list[list[float]]] = None
    latent_count: int = 0
    step_count: int = 0
    trace: Optional[list[TraceStep]] = None

    @model_validator(mode="after")
    def _statistics_iff_ok(self):
        present = self.mean is not None and self.cov is not None
        if present != (self.status == "ok"):
            raise ValueError("mean and cov are present exactly when status is ok")
        return self


class EffectOut(BaseModel):
    status: Literal["bot", "constraint"]
    A: list[list[float]] = Field(default_factory=list)
    c: list[float] = Field(default_factory=list)
    S: list[list[float]] = Field(default_factory=list)

    @classmethod
    def from_normal_form(cls, nf) -> "EffectOut":
        if nf.is_bot:
            return cls(status="bot")
        return cls(status="constraint", A=nf.A.tolist(), c=nf.c.tolist(), S=nf.S.tolist())


class RegionOut(BaseModel):
    point: list[float]
    basis: list[list[float]]


class CanonicalRecordOut(BaseModel):
    effect: EffectOut
    posterior: Optional[GaussMapOut] = None
    region: Optional[RegionOut] = None

    @classmethod
    def from_record(cls, record) -> "CanonicalRecordOut":
        if record.is_bot:
            return cls(effect=EffectOut.from_normal_form(record.effect))
        return cls(
            effect=EffectOut.from_normal_form(record.effect),
            posterior=GaussMapOut.from_map(record.posterior),
            region=RegionOut(point=record.region.point.tolist(), basis=record.region.basis.tolist()),
        )


class EquivReport(BaseModel):
    equivalent: bool
    dom: int
    cod: int
    left: CanonicalRecordOut
    right: CanonicalRecordOut


class ClosedNormalFormOut(BaseModel):
    status: Literal["bot", "generative"]
    A: list[list[float]] = Field(default_factory=list)
    c: list[float] = Field(default_factory=list)
    cov: list[list[float]] = Field(default_factory=list)

    @classmethod
    def from_normal_form(cls, nf) -> "ClosedNormalFormOut":
        if nf.is_bot:
            return cls(status="bot")
        return cls(status="generative", A=nf.A.tolist(), c=nf.c.tolist(), cov=(nf.A @ nf.A.T).tolist())


class ExampleSpec(BaseModel):
    name: Literal["kriging", "randomwalk", "kalman", "ridge"]
    params: dict[str, Any] = Field(default_factory=dict)


class ExampleSummary(BaseModel):
    name: str
    status: Literal["ok", "bot"]
    params: dict[str, Any]
    stats: dict[str, Any] = Field(default_factory=dict)
