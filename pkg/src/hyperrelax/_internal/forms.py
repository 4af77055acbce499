"""Linear combinations of mixed partial derivatives of one profile."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

Key = tuple[int, int]


@dataclass(frozen=True)
class LinearForm:
    """sum c_(a,b) d^a/dt^a d^b/dx^b w, with b < 0 meaning repeated x-primitives.

    Coefficients that cancel to exactly zero are dropped, so the form of a
    vanishing expression has no terms.
    """

    terms: Mapping[Key, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", {k: float(c) for k, c in self.terms.items() if c != 0.0})

    @classmethod
    def derivative(cls, a: int = 0, b: int = 0, coeff: float = 1.0) -> LinearForm:
        return cls({(a, b): coeff})

    @classmethod
    def zero(cls) -> LinearForm:
        return cls({})

    def _shifted(self, da: int, db: int) -> LinearForm:
        return LinearForm({(a + da, b + db): c for (a, b), c in self.terms.items()})

    def dt(self) -> LinearForm:
        return self._shifted(1, 0)

    def dx(self) -> LinearForm:
        return self._shifted(0, 1)

    def antidx(self) -> LinearForm:
        """Zero-constant x-primitive."""
        return self._shifted(0, -1)

    def __add__(self, other: LinearForm) -> LinearForm:
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0.0) + c
        return LinearForm(terms)

    def __neg__(self) -> LinearForm:
        return self * -1.0

    def __sub__(self, other: LinearForm) -> LinearForm:
        return self + (-other)

    def __mul__(self, scalar: float) -> LinearForm:
        return LinearForm({k: scalar * c for k, c in self.terms.items()})

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def max_order(self) -> int:
        """Largest a + b over the terms (0 for the zero form)."""
        return max((a + b for a, b in self.terms), default=0)

    @property
    def min_x_order(self) -> int:
        return min((b for _, b in self.terms), default=0)

    def evaluate(self, derivatives: Mapping[Key, np.ndarray]) -> np.ndarray:
        """Combine precomputed derivative values; every key must be present."""
        shape = np.shape(next(iter(derivatives.values()))) if derivatives else ()
        out = np.zeros(shape)
        for key, c in sorted(self.terms.items()):
            out = out + c * derivatives[key]
        return out

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, b), c in sorted(self.terms.items()):
            label = ("t" * a + ("x" * b if b >= 0 else f"x^{b}")) or "1"
            parts.append(f"{c:+g}*w_{label}")
        return " ".join(parts)
