"""Deterministic rate and volatility curves.

Only three shapes are supported: constant, affine ``c0 + c1 t`` and
exponentially relaxing ``c0 + c1 exp(-t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

CONSTANT = "const"
AFFINE = "affine"
EXP_DECAY = "expdecay"
VARIANTS = (CONSTANT, AFFINE, EXP_DECAY)


@dataclass(frozen=True)
class ParamCurve:
    variant: str
    c0: float
    c1: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown curve variant {self.variant!r}")
        if self.variant == CONSTANT and self.c1 != 0.0:
            raise DomainError("constant curve takes a single coefficient")

    @classmethod
    def constant(cls, c0: float) -> "ParamCurve":
        return cls(CONSTANT, float(c0))

    @classmethod
    def affine(cls, c0: float, c1: float) -> "ParamCurve":
        return cls(AFFINE, float(c0), float(c1))

    @classmethod
    def exp_decay(cls, c0: float, c1: float) -> "ParamCurve":
        return cls(EXP_DECAY, float(c0), float(c1))

    @property
    def is_constant(self) -> bool:
        return self.variant == CONSTANT or self.c1 == 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.variant == AFFINE:
            out = self.c0 + self.c1 * t
        elif self.variant == EXP_DECAY:
            out = self.c0 + self.c1 * np.exp(-t)
        else:
            out = np.full_like(t, self.c0)
        return out if out.ndim else float(out)

    def integral(self, t0: float, t1: float) -> float:
        """Exact integral of the curve over [t0, t1]."""
        dt = t1 - t0
        if self.variant == AFFINE:
            return self.c0 * dt + 0.5 * self.c1 * (t1 * t1 - t0 * t0)
        if self.variant == EXP_DECAY:
            return self.c0 * dt + self.c1 * (math.exp(-t0) - math.exp(-t1))
        return self.c0 * dt

    def min_on(self, t0: float, t1: float) -> float:
        # every variant is monotone in t
        return min(self(t0), self(t1))

    def to_text(self) -> str:
        if self.variant == CONSTANT:
            return f"{CONSTANT}:{self.c0!r}"
        return f"{self.variant}:{self.c0!r},{self.c1!r}"

    @classmethod
    def parse(cls, text: str) -> "ParamCurve":
        """Parse ``const:0.05``, ``affine:0.05,0.01`` or ``expdecay:0.04,0.01``."""
        head, sep, body = text.strip().partition(":")
        head = head.strip().lower()
        if not sep or head not in VARIANTS:
            raise ConfigError(f"bad curve {text!r}; expected const:c0, affine:c0,c1 or expdecay:c0,c1")
        try:
            coeffs = [float(p) for p in body.split(",")]
        except ValueError:
            raise ConfigError(f"bad curve coefficients in {text!r}") from None
        want = 1 if head == CONSTANT else 2
        if len(coeffs) != want:
            raise ConfigError(f"curve {head!r} takes {want} coefficient(s), got {len(coeffs)}")
        return cls(head, *coeffs)


def require_positive(curve: ParamCurve, tau: float, what: str = "volatility") -> None:
    if not curve.min_on(0.0, tau) > 0:
        raise DomainError(f"{what} curve {curve.to_text()} is not positive on [0, {tau}]")
