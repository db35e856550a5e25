"""
Lp Norm
Família ℓp, p ∈ [1, ∞], com dual ℓq analítico (1/p + 1/q = 1)
"""

import math
from typing import Optional

import numpy as np

from src.utils.errors import ArgumentError
from src.vectors import IndexSet
from .base_norm import BaseNorm

# p = ∞ é o valor IEEE math.inf (exato), nunca um float grande
INFINITY = math.inf


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return INFINITY
    if p == INFINITY:
        return 1.0
    return p / (p - 1.0)


def format_exponent(p: float) -> str:
    if p == INFINITY:
        return "inf"
    return f"{p:g}"


def lp_value(x: np.ndarray, p: float) -> float:
    a = np.abs(x)
    if p == INFINITY:
        return float(a.max()) if a.size else 0.0
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float(math.sqrt(np.dot(a, a)))
    m = a.max() if a.size else 0.0
    if m == 0:
        return 0.0
    # escala por max|x| contra overflow de |x|^p
    return float(m * np.sum((a / m) ** p) ** (1.0 / p))


def lp_maximizer(y: np.ndarray, p: float) -> np.ndarray:
    """x com ‖x‖_p = 1 e ⟨x,y⟩ = ‖y‖_q"""
    d = y.shape[0]
    a = np.abs(y)
    if not np.any(a > 0):
        x = np.zeros(d)
        x[0] = 1.0
        return x
    if p == 1:
        x = np.zeros(d)
        i = int(np.argmax(a))
        x[i] = np.sign(y[i])
        return x
    if p == INFINITY:
        return np.sign(y).astype(float)
    q = conjugate_exponent(p)
    x = np.sign(y) * (a / a.max()) ** (q - 1.0)
    return x / lp_value(x, p)


class LpNorm(BaseNorm):
    """Norma ℓp; monotônica por ortantes, OSM para p < ∞, dual OSM para p > 1"""

    def __init__(self, p: float):
        if not (p == INFINITY or (math.isfinite(p) and p >= 1)):
            raise ArgumentError(f"Expoente p deve estar em [1, ∞], recebido {p!r}")
        self.p = float(p)
        self.q = conjugate_exponent(self.p)
        super().__init__(
            name=f"lp:{format_exponent(self.p)}",
            orthant_monotonic=True,
            orthant_strictly_monotonic=self.p < INFINITY,
            dual_orthant_strictly_monotonic=self.p > 1,
            permutation_invariant=True,
        )

    def evaluate(self, x: np.ndarray) -> float:
        return lp_value(x, self.p)

    def has_analytic_dual(self) -> bool:
        return True

    def analytic_dual(self, y: np.ndarray) -> float:
        return lp_value(y, self.q)

    def restricted_dual(self, y: np.ndarray, support: IndexSet) -> float:
        if not support:
            return 0.0
        return lp_value(y[list(support)], self.q)

    def dual_maximizer(self, y: np.ndarray, support: Optional[IndexSet] = None) -> np.ndarray:
        if support is None:
            return lp_maximizer(y, self.p)
        idx = list(support)
        x = np.zeros_like(y, dtype=float)
        if idx:
            x[idx] = lp_maximizer(y[idx], self.p)
        return x

    def dual_pair_direction(self, u: np.ndarray) -> Optional[np.ndarray]:
        if self.p == INFINITY:
            return None
        if self.p == 1:
            return np.sign(u).astype(float)
        a = np.abs(u)
        m = a.max()
        if m == 0:
            return None
        return np.sign(u) * (a / m) ** (self.p - 1.0)

    def dual_norm_object(self) -> "LpNorm":
        return LpNorm(self.q)

    def coordinate_dual(self, d: int, i: int) -> float:
        return 1.0

    def describe(self):
        info = super().describe()
        info['p'] = format_exponent(self.p)
        info['q'] = format_exponent(self.q)
        return info
