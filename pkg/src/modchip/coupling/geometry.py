"""
Bump geometry and the inverse-height coupling model g(h) = a/h + b.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..config import BUMP_DIAMETER_PRE_UM, BUMP_HEIGHT_PRE_UM
from ..errors import DomainError, SchemaError, SingularFit

logger = logging.getLogger(__name__)

TABLE_COLUMNS = [
    "pair",
    "h_um",
    "h_err",
    "g_meas_MHz",
    "g_err",
    "g_sim_MHz",
    "g_sim_err",
]

Point = Tuple[float, float, Optional[float]]


@dataclass(frozen=True)
class BumpGeometry:
    """Indium bump dimensions in micrometres, before and after bonding"""

    D_post: float
    h_pre: float = BUMP_HEIGHT_PRE_UM
    D_pre: float = BUMP_DIAMETER_PRE_UM
    h_post: Optional[float] = None

    def __post_init__(self) -> None:
        if min(self.h_pre, self.D_pre, self.D_post) <= 0:
            raise DomainError("bump dimensions must be positive")
        if self.h_post is not None and not 0 < self.h_post <= self.h_pre:
            raise DomainError("post-bond height must be positive and not exceed h_pre")


@dataclass(frozen=True)
class CouplingFit:
    """Fitted g(h) = a/h + b with a in MHz*um and b in MHz"""

    a: float
    b: float
    a_err: float = 0.0
    b_err: float = 0.0
    covariance: Tuple[Tuple[float, float], Tuple[float, float]] = (
        (0.0, 0.0),
        (0.0, 0.0),
    )

    def g(self, h: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return g_from_height(self, h)


def g_from_height(
    fit: CouplingFit, h: Union[float, np.ndarray]
) -> Union[float, np.ndarray]:
    """Bare coupling g/2pi in MHz for a bump height h in um"""
    h_arr = np.asarray(h, dtype=float)
    if np.any(h_arr <= 0):
        raise DomainError("bump height must be positive")
    value = fit.a / h_arr + fit.b
    return float(value) if value.ndim == 0 else value


def fit_g_vs_height(points: Sequence[Point]) -> CouplingFit:
    """Least-squares fit of a/h + b.

    Weighted by 1/sigma^2 with absolute covariance when every point carries
    a positive sigma; otherwise unweighted with the covariance scaled by the
    residual variance.
    """
    if len(points) < 3:
        raise DomainError("need at least three points to fit a/h + b")
    h = np.array([p[0] for p in points], dtype=float)
    g = np.array([p[1] for p in points], dtype=float)
    sigmas = [p[2] if len(p) > 2 else None for p in points]
    if np.any(h <= 0):
        raise DomainError("bump heights must be positive")
    if np.unique(h).size < 2:
        raise SingularFit("all bump heights are equal; a and b are not separable")

    design = np.column_stack([1.0 / h, np.ones_like(h)])
    weighted = all(s is not None and s > 0 for s in sigmas)
    if weighted:
        w = 1.0 / np.array(sigmas, dtype=float) ** 2
    else:
        w = np.ones_like(h)
    normal = design.T @ (w[:, None] * design)
    if np.linalg.cond(normal) > 1e14:
        raise SingularFit("normal equations are singular")
    params = np.linalg.solve(normal, design.T @ (w * g))
    covariance = np.linalg.inv(normal)
    if not weighted:
        dof = max(len(points) - 2, 1)
        residual = g - design @ params
        covariance = covariance * float(residual @ residual) / dof
    a, b = float(params[0]), float(params[1])
    logger.debug("g(h) fit: a=%.3f b=%.3f (weighted=%s)", a, b, weighted)
    return CouplingFit(
        a=a,
        b=b,
        a_err=float(np.sqrt(covariance[0, 0])),
        b_err=float(np.sqrt(covariance[1, 1])),
        covariance=(
            (float(covariance[0, 0]), float(covariance[0, 1])),
            (float(covariance[1, 0]), float(covariance[1, 1])),
        ),
    )


def height_from_shear(geom: BumpGeometry) -> float:
    """Post-bond height of a cylindrical bump from its sheared diameter"""
    if geom.D_post <= 0 or geom.D_pre <= 0:
        raise DomainError("bump diameters must be positive")
    return geom.h_pre * (geom.D_pre / geom.D_post) ** 2


def read_coupling_table(path: Union[str, Path]) -> pd.DataFrame:
    """Read a per-pair bump-height/coupling table"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"coupling table not found: {path}")
    table = pd.read_csv(path)
    missing = [c for c in TABLE_COLUMNS if c not in table.columns]
    if missing:
        raise SchemaError(f"missing columns {missing}", path=str(path))
    return table[TABLE_COLUMNS]


def write_coupling_table(table: pd.DataFrame, path: Union[str, Path]) -> None:
    table[TABLE_COLUMNS].to_csv(path, index=False, lineterminator="\n")


def points_from_table(
    table: pd.DataFrame, source: str = "meas", weighted: bool = False
) -> List[Point]:
    """(h, g, sigma) tuples from the measured ("meas") or simulated ("sim") column"""
    g_col = "g_meas_MHz" if source == "meas" else "g_sim_MHz"
    err_col = "g_err" if source == "meas" else "g_sim_err"
    return [
        (
            float(row["h_um"]),
            float(row[g_col]),
            float(row[err_col]) if weighted else None,
        )
        for _, row in table.iterrows()
    ]


def measured_to_model_ratio(table: pd.DataFrame) -> float:
    """Mean ratio of measured to simulated coupling across pairs"""
    return float(np.mean(table["g_meas_MHz"] / table["g_sim_MHz"]))
