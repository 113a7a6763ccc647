# gausslang/examples.py
"""
Example models, built as surface ASTs and run through the interpreter.

Each example produces per-coordinate prior and posterior statistics
(CSV: index, prior_mean, prior_sd, post_mean, post_sd) plus a summary.json.
The prior is the same program with its conditions left out.
"""
import logging
import typing
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

from .errors import ContractError
from .gauss import Failure, GaussState, is_failure
from .lang import desugar, typecheck
from .lang.desugar import sequence
from .lang.syntax import (
    Add,
    Cond,
    Const,
    Let,
    LetPair,
    MatrixLit,
    NormalParams,
    Scale,
    Term,
    Var,
    tuple_term,
)
from .opsem import observable, run
from .schemas import ExampleSpec, ExampleSummary

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["index", "prior_mean", "prior_sd", "post_mean", "post_sd"]

KALMAN_XS = [1.0, 3.4, 2.7, 3.2, 5.8, 14.0, 18.0, 11.7, 19.5, 19.2]
RIDGE_XS = [1.0, 2.0, 2.25, 5.0, 10.0]
RIDGE_YS = [-3.5, -6.4, -4.0, -8.1, -11.0]


# -------------------------------------------------------------------
# Parameters
# -------------------------------------------------------------------
class _Observed(BaseModel):
    obs_indices: list[int]
    obs_values: list[float]

    @model_validator(mode="after")
    def _check_observations(self):
        if len(self.obs_indices) != len(self.obs_values):
            raise ValueError("obs_indices and obs_values must have the same length")
        size = self.size()
        if any(i < 0 or i >= size for i in self.obs_indices):
            raise ValueError(f"observation indices must lie in [0, {size})")
        return self

    def size(self) -> int:
        raise NotImplementedError


class KrigingParams(_Observed):
    n: int = Field(100, ge=2)
    bandwidth: float = Field(0.15, gt=0)
    obs_indices: list[int] = [10, 35, 60, 85]
    obs_values: list[float] = [0.5, -1.0, 1.0, 0.2]

    def size(self) -> int:
        return self.n


class RandomWalkParams(_Observed):
    n: int = Field(100, ge=1)
    step_variance: float = Field(1.0, gt=0)
    obs_indices: list[int] = [0, 20, 40, 60, 80, 100]
    obs_values: list[float] = [0.0, 1.5, -0.5, 2.0, 1.0, -1.0]
    variant: Literal["last", "interleaved"] = "last"

    def size(self) -> int:
        return self.n + 1


class KalmanParams(BaseModel):
    xs: list[float] = Field(default_factory=lambda: list(KALMAN_XS), min_length=1)
    init_velocity: float = 1.0
    init_position_variance: float = Field(1.0, ge=0)
    init_velocity_variance: float = Field(10.0, ge=0)
    velocity_variance: float = Field(0.75, ge=0)
    obs_variance: float = Field(1.0, ge=0)


class RidgeParams(BaseModel):
    xs: list[float] = Field(default_factory=lambda: list(RIDGE_XS))
    ys: list[float] = Field(default_factory=lambda: list(RIDGE_YS))
    prior_variance: float = Field(10.0, gt=0)
    noise_variance: float = Field(0.1, ge=0)
    grid_min: float = 0.0
    grid_max: float = 11.0
    grid_points: int = Field(50, ge=2, le=200)

    @model_validator(mode="after")
    def _check_data(self):
        if len(self.xs) != len(self.ys):
            raise ValueError("xs and ys must have the same length")
        return self

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.grid_min, self.grid_max, self.grid_points)


PARAMS: dict[str, type[BaseModel]] = {
    "kriging": KrigingParams,
    "randomwalk": RandomWalkParams,
    "kalman": KalmanParams,
    "ridge": RidgeParams,
}

ExampleParams = Union[KrigingParams, RandomWalkParams, KalmanParams, RidgeParams]


def parse_params(name: str, raw: dict[str, object]) -> ExampleParams:
    """Validate k=v strings from the command line; list fields take comma-separated values."""
    try:
        model = PARAMS[name]
    except KeyError:
        raise ContractError(f"unknown example {name!r}; expected one of {sorted(PARAMS)}")
    values: dict[str, object] = {}
    for key, value in raw.items():
        if key not in model.model_fields:
            raise ContractError(f"example {name!r} has no parameter {key!r}")
        is_list = typing.get_origin(model.model_fields[key].annotation) is list
        if is_list and isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        values[key] = value
    return model.model_validate(values)


# -------------------------------------------------------------------
# Programs
# -------------------------------------------------------------------
def bind_components(source: Term, names: list[str], body: Term) -> Term:
    """let (n0, (n1, ...)) = source in body, as a chain of pair patterns."""
    out = Let(names[-1], Var(f"{names[-2]}'rest") if len(names) > 1 else source, body)
    for i in reversed(range(len(names) - 1)):
        src = source if i == 0 else Var(f"{names[i - 1]}'rest")
        out = LetPair(names[i], f"{names[i]}'rest", src, out)
    return out


def rbf_kernel(points: np.ndarray, bandwidth: float) -> np.ndarray:
    d = points[:, None] - points[None, :]
    return np.exp(-0.5 * (d / bandwidth) ** 2)


def kriging_program(p: KrigingParams, conditioned: bool = True) -> Term:
    """f ~ N(0, K) on a grid of [0, 1]; f[i] =:= c for each observation."""
    K = rbf_kernel(np.linspace(0.0, 1.0, p.n), p.bandwidth)
    cov = MatrixLit(tuple(tuple(float(v) for v in row) for row in K))
    names = [f"f{i}" for i in range(p.n)]
    result = tuple_term([Var(x) for x in names])
    if conditioned:
        result = sequence([Cond(Var(names[i]), Const(c)) for i, c in zip(p.obs_indices, p.obs_values)], result)
    prior = NormalParams(tuple_term([Const(0.0)] * p.n), cov)
    return bind_components(prior, names, result)


def randomwalk_program(p: RandomWalkParams, variant: Optional[str] = None, conditioned: bool = True) -> Term:
    """
    x0 ~ N(0, s), x_i = x_{i-1} + N(0, s). With variant "last" every
    x_j =:= c runs after the walk is built; with "interleaved" right after x_j.
    """
    variant = variant or p.variant
    names = [f"x{i}" for i in range(p.n + 1)]
    observed: dict[int, list[float]] = {}
    if conditioned:
        for i, c in zip(p.obs_indices, p.obs_values):
            observed.setdefault(i, []).append(c)

    def conds(i: int) -> list[Term]:
        return [Cond(Var(names[i]), Const(c)) for c in observed.get(i, [])]

    body = tuple_term([Var(x) for x in names])
    if variant == "last":
        body = sequence([c for i in range(p.n + 1) for c in conds(i)], body)
    for i in reversed(range(p.n + 1)):
        if variant == "interleaved":
            body = sequence(conds(i), body)
        mean = Const(0.0) if i == 0 else Var(names[i - 1])
        body = Let(names[i], NormalParams(mean, p.step_variance), body)
    return body


def kalman_program(p: KalmanParams, conditioned: bool = True) -> Term:
    """
    x0 = xs[0] + N(0, σx²), v0 = v + N(0, σv²); then x_i = x_{i-1} + v_{i-1},
    v_i = v_{i-1} + N(0, q), and x_i + N(0, r) =:= xs[i] for i >= 1.
    """
    n = len(p.xs)
    xs = [f"x{i}" for i in range(n)]
    vs = [f"v{i}" for i in range(n)]
    body: Term = tuple_term([Var(x) for x in xs] + [Var(v) for v in vs])
    for i in reversed(range(1, n)):
        if conditioned:
            body = sequence([Cond(NormalParams(Var(xs[i]), p.obs_variance), Const(p.xs[i]))], body)
        body = Let(vs[i], NormalParams(Var(vs[i - 1]), p.velocity_variance), body)
        body = Let(xs[i], Add(Var(xs[i - 1]), Var(vs[i - 1])), body)
    body = Let(vs[0], NormalParams(Const(p.init_velocity), p.init_velocity_variance), body)
    return Let(xs[0], NormalParams(Const(p.xs[0]), p.init_position_variance), body)


def ridge_program(p: RidgeParams, conditioned: bool = True) -> Term:
    """a, b ~ N(0, s); a·x + b =:= y + N(0, σ²) per data point; returns (a, b, a·g + b over the grid)."""
    def line(x: float) -> Term:
        return Add(Scale(float(x), Var("a")), Var("b"))

    body: Term = tuple_term([Var("a"), Var("b")] + [line(g) for g in p.grid])
    if conditioned:
        body = sequence([Cond(line(x), NormalParams(Const(y), p.noise_variance)) for x, y in zip(p.xs, p.ys)], body)
    body = Let("b", NormalParams(Const(0.0), p.prior_variance), body)
    return Let("a", NormalParams(Const(0.0), p.prior_variance), body)


# -------------------------------------------------------------------
# Running
# -------------------------------------------------------------------
def run_program(t: Term) -> Union[GaussState, Failure]:
    """typecheck -> desugar -> run -> observable."""
    core = desugar(typecheck(t))
    result = run(core)
    logger.debug(f"example program ran in {result.steps} steps")
    return observable(result)


def stats_frame(prior: GaussState, post: Union[GaussState, Failure], index=None) -> pd.DataFrame:
    index = np.arange(prior.dim) if index is None else np.asarray(index)
    frame = pd.DataFrame(
        {
            "index": index,
            "prior_mean": prior.mean,
            "prior_sd": np.sqrt(np.clip(np.diag(prior.cov), 0.0, None)),
        }
    )
    if is_failure(post):
        frame["post_mean"] = np.nan
        frame["post_sd"] = np.nan
    else:
        frame["post_mean"] = post.mean
        frame["post_sd"] = np.sqrt(np.clip(np.diag(post.cov), 0.0, None))
    return frame[CSV_COLUMNS]


def _slice(psi: Union[GaussState, Failure], idx: slice) -> Union[GaussState, Failure]:
    if is_failure(psi):
        return psi
    return GaussState.of(psi.mean[idx], psi.cov[idx, idx])


@dataclass
class ExampleOutput:
    frames: dict[str, pd.DataFrame]
    summary: ExampleSummary
    posterior: Union[GaussState, Failure]


def _summary(name: str, params: BaseModel, post, **stats) -> ExampleSummary:
    return ExampleSummary(
        name=name,
        status="bot" if is_failure(post) else "ok",
        params=params.model_dump(),
        stats=stats,
    )


def _kriging(p: KrigingParams) -> ExampleOutput:
    prior = run_program(kriging_program(p, conditioned=False))
    post = run_program(kriging_program(p))
    frame = stats_frame(prior, post)
    return ExampleOutput({"kriging": frame}, _summary("kriging", p, post, grid=np.linspace(0, 1, p.n).tolist()), post)


def _randomwalk(p: RandomWalkParams) -> ExampleOutput:
    prior = run_program(randomwalk_program(p, conditioned=False))
    posts = {v: run_program(randomwalk_program(p, variant=v)) for v in ("last", "interleaved")}
    post = posts[p.variant]
    stats = {}
    if not any(is_failure(s) for s in posts.values()):
        a, b = posts["last"], posts["interleaved"]
        stats = {
            "variants_max_mean_diff": float(np.max(np.abs(a.mean - b.mean))),
            "variants_max_cov_diff": float(np.max(np.abs(a.cov - b.cov))),
        }
    return ExampleOutput({"randomwalk": stats_frame(prior, post)}, _summary("randomwalk", p, post, **stats), post)


def _kalman(p: KalmanParams) -> ExampleOutput:
    n = len(p.xs)
    prior = run_program(kalman_program(p, conditioned=False))
    post = run_program(kalman_program(p))
    position, velocity = slice(0, n), slice(n, 2 * n)
    frames = {
        "kalman_position": stats_frame(_slice(prior, position), _slice(post, position)),
        "kalman_velocity": stats_frame(_slice(prior, velocity), _slice(post, velocity)),
    }
    stats = {} if is_failure(post) else {
        "final_position_mean": float(post.mean[n - 1]),
        "final_velocity_mean": float(post.mean[2 * n - 1]),
    }
    return ExampleOutput(frames, _summary("kalman", p, post, **stats), post)


def _ridge(p: RidgeParams) -> ExampleOutput:
    prior = run_program(ridge_program(p, conditioned=False))
    post = run_program(ridge_program(p))
    line = slice(2, 2 + p.grid_points)
    stats: dict = {"grid": p.grid.tolist()}
    if not is_failure(post):
        stats["coefficient_mean"] = post.mean[:2].tolist()
        stats["coefficient_cov"] = post.cov[:2, :2].tolist()
    return ExampleOutput(
        {"ridge": stats_frame(_slice(prior, line), _slice(post, line))},
        _summary("ridge", p, post, **stats),
        post,
    )


BUILDERS = {
    "kriging": _kriging,
    "randomwalk": _randomwalk,
    "kalman": _kalman,
    "ridge": _ridge,
}


def build_example(spec: ExampleSpec) -> ExampleOutput:
    params = parse_params(spec.name, spec.params)
    return BUILDERS[spec.name](params)


def write_example(output: ExampleOutput, out_dir: Union[str, Path]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, frame in output.frames.items():
        path = out / f"{name}.csv"
        frame.to_csv(path, index=False)
        written.append(path)
    summary = out / "summary.json"
    summary.write_text(output.summary.model_dump_json(indent=2))
    written.append(summary)
    logger.info(f"wrote {output.summary.name} example to {out} ({len(written)} files)")
    return written
