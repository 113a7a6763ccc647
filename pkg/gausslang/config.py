# gausslang/config.py
import os
import logging
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict

from .errors import ConfigError

load_dotenv()

DEFAULT_SUPPORT_TOL = 1e-8
DEFAULT_RANK_TOL = 1e-12
DEFAULT_PSD_TOL = 1e-10
DEFAULT_EQ_TOL = 1e-8

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Tolerances(BaseModel):
    """Numerical thresholds shared by every module.

    rank     -- singular value s counts as zero iff s <= max(rows, cols) * s_max * rank
    support  -- relative residual allowed for affine-subspace membership
    psd      -- negative eigenvalues down to -psd (scaled by the matrix norm) are clamped to 0
    equal    -- tolerance for comparing canonical records and states
    """

    model_config = ConfigDict(frozen=True)

    rank: float = DEFAULT_RANK_TOL
    support: float = DEFAULT_SUPPORT_TOL
    psd: float = DEFAULT_PSD_TOL
    equal: float = DEFAULT_EQ_TOL


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{name}={raw!r} is not a number")
    if not value > 0:
        raise ConfigError(f"{name}={raw!r} must be positive")
    return value


@lru_cache(maxsize=1)
def get_tolerances() -> Tolerances:
    """
    Lazy, cached tolerances read from the environment.
    GAUSS_TOL overrides the support tolerance.
    """
    return Tolerances(
        rank=_env_float("GAUSS_RANK_TOL", DEFAULT_RANK_TOL),
        support=_env_float("GAUSS_TOL", DEFAULT_SUPPORT_TOL),
        psd=_env_float("GAUSS_PSD_TOL", DEFAULT_PSD_TOL),
        equal=_env_float("GAUSS_EQ_TOL", DEFAULT_EQ_TOL),
    )


def configure_logging() -> None:
    level = os.getenv("LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=level, format=LOG_FORMAT)
