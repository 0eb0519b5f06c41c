"""Calibration solve, ideal-single-photon prediction, gain and extinction.

The four measured intensities (normally open / normally closed, each gated
and ungated) form a rank-deficient linear system in (P_g_open, P_g_close,
n_g_state, n_e_state): the two gated-ungated differences are redundant.  The
system is closed with the protocol symmetry P_g_close = 1 - P_g_open, and the
redundancy is surfaced as ``consistency_residual`` instead of being silently
absorbed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, asdict

import numpy as np

from .errors import UnphysicalInputError, UnsolvableCalibrationError
from .protocol import coherent_flip_probability


@dataclass(frozen=True)
class CalibrationInputs:
    """Mean transmitted intensities (photons) for the four switch settings."""

    n0_open: float
    na_open: float
    n0_close: float
    na_close: float
    beta: float

    def __post_init__(self):
        for name in ("n0_open", "na_open", "n0_close", "na_close"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must be a probability")


@dataclass(frozen=True)
class CalibrationResult:
    P_g_open: float
    P_g_close: float
    n_g_state: float
    n_e_state: float
    consistency_residual: float

    @property
    def is_physical(self) -> bool:
        return 0.0 <= self.P_g_open <= 1.0 and 0.0 <= self.P_g_close <= 1.0


@dataclass(frozen=True)
class TransistorReport:
    """Figures of merit plus the inputs they were derived from."""

    calibration: CalibrationResult
    eta: float
    dark_flip: float | None
    p_s: float | None
    p_sg: float | None
    n1_open: float
    n0_open: float
    gain_db: float
    extinction_db: float
    counts: dict | None = None
    provenance: dict | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        cal = {k.lower(): v for k, v in out["calibration"].items()}
        cal["is_physical"] = self.calibration.is_physical
        out["calibration"] = cal
        return out


def fit_eta(points) -> tuple[float, float]:
    """Least-squares (eta, dark_flip) from measured (n_g, beta) pairs.

    The parity model is linear in (eta, dark): beta = eta*(1-e^{-2n})/2
    + dark*(1+e^{-2n})/2, so the fit is a direct normal-equations solve.
    """
    pts = [(float(n), float(b)) for n, b in points]
    if len(pts) < 2:
        raise ValueError("need at least 2 points")
    n_vals = np.array([p[0] for p in pts])
    b_vals = np.array([p[1] for p in pts])
    if np.unique(n_vals).size < 2:
        raise ValueError("fit is singular: all n_g values are equal")
    if np.any(n_vals > 0.5):
        raise ValueError("fit restricted to the linear regime n_g <= 0.5")
    odd = (1.0 - np.exp(-2.0 * n_vals)) / 2.0
    even = (1.0 + np.exp(-2.0 * n_vals)) / 2.0
    design = np.column_stack([odd, even])
    coef, *_ = np.linalg.lstsq(design, b_vals, rcond=None)
    eta, dark = float(coef[0]), float(coef[1])
    return eta, dark


def fit_eta_residual(points, eta: float, dark: float) -> float:
    """RMS misfit of a (eta, dark) pair against the flip-probability model."""
    errs = [coherent_flip_probability(n, eta, dark) - b for n, b in points]
    return math.sqrt(sum(e * e for e in errs) / len(errs))


def synthesize_intensities(
    p_g_open: float, n_g_state: float, n_e_state: float, beta: float
) -> CalibrationInputs:
    """Forward model of the four intensities under the symmetry closure."""
    p_open = p_g_open
    p_close = 1.0 - p_g_open
    return CalibrationInputs(
        n0_open=p_open * n_g_state + (1.0 - p_open) * n_e_state,
        na_open=(p_open + beta) * n_g_state + (1.0 - p_open - beta) * n_e_state,
        n0_close=p_close * n_g_state + (1.0 - p_close) * n_e_state,
        na_close=(p_close - beta) * n_g_state + (1.0 - p_close + beta) * n_e_state,
        beta=beta,
    )


def solve_calibration(c: CalibrationInputs) -> CalibrationResult:
    """Invert the four-intensity system under P_g_close = 1 - P_g_open."""
    if c.beta <= 0:
        raise UnsolvableCalibrationError("beta = 0: gated and ungated runs are identical")
    d1 = (c.na_open - c.n0_open) / c.beta
    d2 = (c.n0_close - c.na_close) / c.beta
    delta = 0.5 * (d1 + d2)
    residual = 0.5 * abs(d1 - d2)
    scale = max(abs(c.n0_open), abs(c.n0_close), 1.0)
    if abs(delta) < 1e-12 * scale:
        raise UnsolvableCalibrationError(
            "gated-ungated differences vanish (n_g_state = n_e_state)"
        )
    total = c.n0_open + c.n0_close  # = n_g_state + n_e_state under the closure
    n_e_state = 0.5 * (total - delta)
    n_g_state = 0.5 * (total + delta)
    p_open = (c.n0_open - n_e_state) / delta
    if not -0.05 <= p_open <= 1.05:
        raise UnphysicalInputError(
            f"recovered P_g_open = {p_open:.4f} outside [-0.05, 1.05]"
        )
    return CalibrationResult(
        P_g_open=p_open,
        P_g_close=1.0 - p_open,
        n_g_state=n_g_state,
        n_e_state=n_e_state,
        consistency_residual=residual,
    )


def predict_single_photon(r: CalibrationResult, eta: float) -> tuple[float, float]:
    """(n1_open, n0_open): transmissions gated by an ideal single photon vs vacuum."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must be a probability")
    p = r.P_g_open
    if p + eta > 1.0:
        warnings.warn(
            f"P_g_open + eta = {p + eta:.3f} > 1; clamping the flipped fraction",
            stacklevel=2,
        )
        eta = 1.0 - p
    n0 = p * r.n_g_state + (1.0 - p) * r.n_e_state
    n1 = (p + eta) * r.n_g_state + (1.0 - p - eta) * r.n_e_state
    return n1, n0


def gain_db(n1: float, n0: float) -> float:
    """G = 10 log10 |n1 - n0|: signal photons controlled by one gate photon."""
    diff = abs(n1 - n0)
    if diff == 0.0:
        return -math.inf
    return 10.0 * math.log10(diff)


def extinction_db(n_on: float, n_off: float) -> float:
    """R = 10 log10 (max/min): on/off contrast, reported as a positive ratio."""
    if n_on < 0 or n_off < 0:
        raise ValueError("intensities must be >= 0")
    hi, lo = max(n_on, n_off), min(n_on, n_off)
    if lo == 0.0:
        return math.inf
    return 10.0 * math.log10(hi / lo)


def switching_probability(eta: float, p_s: float) -> float:
    """P_sg = eta * P_s: single-photon gating times conditional switching."""
    if not 0.0 <= eta <= 1.0 or not 0.0 <= p_s <= 1.0:
        raise ValueError("eta and P_s must be probabilities")
    return eta * p_s
