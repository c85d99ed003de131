"""Two-dimensional truth values and the inference rules operating on them.

A statement's truth value is the pair ``<f, c>``: the frequency ``f`` is the
ratio of positive to total evidence, and the confidence ``c`` grows with the
total evidence amount ``w`` as ``c = w / (w + K_HORIZON)``.  All inference
rules in this module are pure functions of their premises' truth values, so
they are safe to call from any number of threads.

The expectation of a truth value is ``f * c`` throughout this project; it is
the ranking key used by the matching stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

# Evidential horizon: the single place the constant lives.
K_HORIZON = 1.0

# Tolerance for floating-point drift at the [0, 1] boundaries.  Values inside
# the band are clamped; values beyond it are rejected as caller bugs.
_DRIFT = 1e-9


class TruthDomainError(ValueError):
    """Raised when a value falls outside its declared [0, 1] domain."""


def _unit(value: float, what: str) -> float:
    if value != value:  # NaN
        raise TruthDomainError(f"{what} is NaN")
    if value < 0.0:
        if value < -_DRIFT:
            raise TruthDomainError(f"{what} = {value!r} below 0")
        return 0.0
    if value > 1.0:
        if value > 1.0 + _DRIFT:
            raise TruthDomainError(f"{what} = {value!r} above 1")
        return 1.0
    return value


@dataclass(frozen=True, slots=True)
class TruthValue:
    """Frequency/confidence pair.

    ``c == 1`` is representable so axiomatic input facts can be written
    ``<1, 1>``, but such values carry infinite evidence and are rejected by
    the evidence-pooling rules (`revision`, `probabilistic_revision`,
    `scale_evidence`).
    """

    f: float
    c: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "f", _unit(self.f, "frequency"))
        object.__setattr__(self, "c", _unit(self.c, "confidence"))

    @property
    def expectation(self) -> float:
        return self.f * self.c

    def __str__(self) -> str:  # <f, c> to a readable precision
        return f"<{self.f:.6g}, {self.c:.6g}>"


@dataclass(frozen=True, slots=True)
class Evidence:
    """Positive / total evidence amounts behind a truth value."""

    w_plus: float
    w: float

    def __post_init__(self) -> None:
        if self.w_plus != self.w_plus or self.w != self.w:
            raise TruthDomainError("evidence amount is NaN")
        if self.w_plus < -_DRIFT or self.w < self.w_plus - _DRIFT:
            raise TruthDomainError(
                f"invalid evidence (w_plus={self.w_plus!r}, w={self.w!r})"
            )
        object.__setattr__(self, "w_plus", max(self.w_plus, 0.0))
        object.__setattr__(self, "w", max(self.w, self.w_plus))


def op_and(xs: Iterable[float]) -> float:
    """Extended boolean AND: the product of the inputs."""
    out = 1.0
    for x in xs:
        out *= _unit(x, "and() operand")
    return out


def op_or(xs: Iterable[float]) -> float:
    """Extended boolean OR: 1 minus the product of the complements."""
    out = 1.0
    for x in xs:
        out *= 1.0 - _unit(x, "or() operand")
    return 1.0 - out


def op_not(x: float) -> float:
    """Extended boolean NOT: the complement."""
    return 1.0 - _unit(x, "not() operand")


def evidence_from_truth(tv: TruthValue) -> Evidence:
    """Invert c = w/(w+k): w = k*c/(1-c), w_plus = f*w.

    ``c == 1`` would require infinite evidence; callers must treat <., 1>
    facts specially (they never enter revision).
    """
    if tv.c >= 1.0:
        raise TruthDomainError("infinite evidence: confidence 1 cannot be pooled")
    w = K_HORIZON * tv.c / (1.0 - tv.c)
    return Evidence(tv.f * w, w)


def truth_from_evidence(ev: Evidence) -> TruthValue:
    """f = w_plus/w (0 at w = 0 by convention), c = w/(w+k)."""
    if ev.w == 0.0:
        return TruthValue(0.0, 0.0)
    return TruthValue(ev.w_plus / ev.w, ev.w / (ev.w + K_HORIZON))


def deduction(t1: TruthValue, t2: TruthValue) -> TruthValue:
    f = op_and((t1.f, t2.f))
    return TruthValue(f, f * t1.c * t2.c)


def analogy(t1: TruthValue, t2: TruthValue) -> TruthValue:
    return TruthValue(t1.f * t2.f, t2.f * t1.c * t2.c)


def conditional_deduction(t1: TruthValue, t2: TruthValue) -> TruthValue:
    """Detaches a premise from an implication; same truth function as deduction."""
    return deduction(t1, t2)


def induction(t1: TruthValue, t2: TruthValue) -> TruthValue:
    """Weak rule: produces bounded evidence rather than a direct truth value.

    With k = 1 the conclusion's confidence can never exceed 1/2.
    """
    w_plus = t2.f * t2.c * t1.f * t1.c
    w_minus = t2.f * t2.c * (1.0 - t1.f) * t1.c
    return truth_from_evidence(Evidence(w_plus, w_plus + w_minus))


def revision(t1: TruthValue, t2: TruthValue) -> TruthValue:
    """Pool the evidence of two derivations of the same statement."""
    e1 = evidence_from_truth(t1)
    e2 = evidence_from_truth(t2)
    return truth_from_evidence(Evidence(e1.w_plus + e2.w_plus, e1.w + e2.w))


def probabilistic_revision(t1: TruthValue, t2: TruthValue) -> TruthValue:
    """Merge conclusions of probabilistic origin: noisy-or on f, pooled w."""
    e1 = evidence_from_truth(t1)
    e2 = evidence_from_truth(t2)
    w = e1.w + e2.w
    return TruthValue(op_or((t1.f, t2.f)), w / (w + K_HORIZON))


def scale_evidence(tv: TruthValue, factor: float) -> TruthValue:
    """Rescale the evidence amount behind ``tv``; frequency is unchanged."""
    if not factor > 0.0 or math.isinf(factor):
        raise TruthDomainError(f"scale factor must be finite and positive, got {factor!r}")
    w = evidence_from_truth(tv).w * factor
    return TruthValue(tv.f, w / (w + K_HORIZON))


def revision_fold(tvs: Sequence[TruthValue]) -> TruthValue:
    """Pool any number of derivations in evidence space (order-independent)."""
    w_plus = 0.0
    w = 0.0
    for tv in tvs:
        ev = evidence_from_truth(tv)
        w_plus += ev.w_plus
        w += ev.w
    return truth_from_evidence(Evidence(w_plus, w))


def probabilistic_revision_fold(tvs: Sequence[TruthValue]) -> TruthValue:
    """n-ary probabilistic revision: f = 1 - prod(1-f_i), w = sum(w_i)."""
    not_f = 1.0
    w = 0.0
    for tv in tvs:
        not_f *= 1.0 - tv.f
        w += evidence_from_truth(tv).w
    return TruthValue(1.0 - not_f, w / (w + K_HORIZON))
