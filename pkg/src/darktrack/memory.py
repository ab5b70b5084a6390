"""Long-term memory filter and the confidence machinery around it: response
quality scores (peak-to-energy ratios on the raw and squared map), the
running history they are judged against, and the gate decisions driving
conservative updates and re-detection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dcf import LinearFilterModel, compress, train_initial
from .spectral import dft, spectral_response


def apce(r: np.ndarray) -> float:
    """Peak sharpness: |max - min|^2 over the mean squared deviation from
    the min.  A constant map carries no localization evidence and scores 0."""
    r_max = float(r.max())
    r_min = float(r.min())
    if r_max == r_min:
        return 0.0
    return (r_max - r_min) ** 2 / float(np.mean((r - r_min) ** 2))


def csrm(r: np.ndarray) -> float:
    """The same sharpness ratio evaluated on the elementwise-squared map."""
    return apce(r * r)


@dataclass
class ConfidenceReport:
    r_max: float
    apce: float
    csrm: float
    c_long: float

    def quality(self, metric: str) -> float:
        if metric == "apce":
            return self.apce
        if metric == "csrm":
            return self.csrm
        raise ValueError(f"unknown quality metric: {metric}")


@dataclass
class GateDecisions:
    update_ok: bool
    redetect_needed: bool
    accept_candidate: bool


@dataclass
class ConfidenceHistory:
    """Running means of r_max and the quality score over frames that passed
    the update gate; gates default to pass until the first sample lands."""

    r_sum: float = 0.0
    q_sum: float = 0.0
    count: int = 0

    def push(self, r_max: float, quality: float) -> None:
        self.r_sum += r_max
        self.q_sum += quality
        self.count += 1

    @property
    def r_mean(self) -> float:
        return self.r_sum / self.count

    @property
    def q_mean(self) -> float:
        return self.q_sum / self.count


def gate(report: ConfidenceReport, hist: ConfidenceHistory, cfg) -> GateDecisions:
    """Decide update/re-detect/accept from a frame's confidence numbers.

    cfg provides gate_response, gate_quality (the history-mean factors),
    quality_metric, t_redetect and t_accept.
    """
    if hist.count == 0:
        update_ok = True
    else:
        update_ok = (
            report.r_max >= cfg.gate_response * hist.r_mean
            and report.quality(cfg.quality_metric) >= cfg.gate_quality * hist.q_mean
        )
    return GateDecisions(
        update_ok=update_ok,
        redetect_needed=report.c_long < cfg.t_redetect,
        accept_candidate=report.c_long >= cfg.t_accept,
    )


@dataclass
class LongTermFilter:
    """Conservatively updated target-only filter.  Shares the translation
    projection; numerator/denominator live in that compressed space while
    the raw template is kept for rebuilding when the projection moves."""

    model: LinearFilterModel
    proj: np.ndarray
    t_accept: float

    @classmethod
    def train(cls, x: np.ndarray, label_dft: np.ndarray, proj: np.ndarray, lam: float, eta: float, t_accept: float) -> "LongTermFilter":
        model = train_initial(compress(x, proj), label_dft, lam, eta)
        model.mu = x.copy()
        return cls(model=model, proj=proj, t_accept=t_accept)

    def response(self, z: np.ndarray) -> np.ndarray:
        return spectral_response(
            self.model.num, self.model.den, dft(compress(z, self.proj)), self.model.lam
        )


def long_term_confidence(f: LongTermFilter, z: np.ndarray) -> float:
    """Maximum of the long-term filter's response over the candidate patch."""
    if f.model.num.size == 0:
        raise ValueError("long-term filter is untrained")
    return float(f.response(z).max())


def update_long_term(f: LongTermFilter, x: np.ndarray, c_long: float) -> LongTermFilter:
    """Blend the new appearance in only when its confidence clears the
    acceptance threshold; otherwise leave the filter untouched."""
    if c_long < f.t_accept:
        return f
    eta = f.model.eta
    xc = dft(compress(x, f.proj))
    f.model.num *= 1.0 - eta
    f.model.num += eta * np.conj(f.model.label_dft)[:, :, None] * xc
    f.model.den *= 1.0 - eta
    f.model.den += eta * np.sum(xc.real**2 + xc.imag**2, axis=2)
    f.model.mu *= 1.0 - eta
    f.model.mu += eta * x
    return f


def rebase_projection(f: LongTermFilter, proj: np.ndarray) -> None:
    """Rebuild the compressed filter from the raw template under a new
    shared projection (called when the translation projection refreshes)."""
    f.proj = proj
    xc = dft(compress(f.model.mu, proj))
    f.model.num = np.conj(f.model.label_dft)[:, :, None] * xc
    f.model.den = np.sum(xc.real**2 + xc.imag**2, axis=2)
