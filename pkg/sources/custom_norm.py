"""
Custom Norm
Normas-fonte definidas por procedimentos de avaliação (e, opcionalmente, dual analítico)
"""

import math
from typing import Callable, Optional, Sequence

import numpy as np

from src.utils.errors import ArgumentError
from src.vectors import IndexSet, as_vector
from .base_norm import BaseNorm, DEFAULT_ORACLE_DIM_CAP
from .lp_norm import INFINITY, conjugate_exponent, format_exponent, lp_maximizer, lp_value

Procedure = Callable[[np.ndarray], float]


class CustomNorm(BaseNorm):
    """Norma customizada; sem dual declarado, o dual vem do oráculo maximizador"""

    def __init__(self, name: str, evaluate: Procedure,
                 dual: Optional[Procedure] = None,
                 maximizer: Optional[Callable[[np.ndarray, Optional[IndexSet]], np.ndarray]] = None,
                 dual_pair: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 dual_factory: Optional[Callable[[], BaseNorm]] = None,
                 orthant_monotonic: bool = False,
                 orthant_strictly_monotonic: bool = False,
                 dual_orthant_strictly_monotonic: bool = False,
                 permutation_invariant: bool = False,
                 oracle_dim_cap: int = DEFAULT_ORACLE_DIM_CAP,
                 dim: Optional[int] = None):
        super().__init__(
            name=name,
            orthant_monotonic=orthant_monotonic,
            orthant_strictly_monotonic=orthant_strictly_monotonic,
            dual_orthant_strictly_monotonic=dual_orthant_strictly_monotonic,
            permutation_invariant=permutation_invariant,
            oracle_dim_cap=oracle_dim_cap,
            dim=dim,
        )
        self._evaluate = evaluate
        self._dual = dual
        self._maximizer = maximizer
        self._dual_pair = dual_pair
        self._dual_factory = dual_factory

    def evaluate(self, x: np.ndarray) -> float:
        return self._evaluate(x)

    def has_analytic_dual(self) -> bool:
        return self._dual is not None

    def analytic_dual(self, y: np.ndarray) -> float:
        return self._dual(y)

    def dual_maximizer(self, y: np.ndarray, support: Optional[IndexSet] = None) -> np.ndarray:
        if self._maximizer is not None:
            return self._maximizer(y, support)
        return super().dual_maximizer(y, support)

    def dual_pair_direction(self, u: np.ndarray) -> Optional[np.ndarray]:
        if self._dual_pair is None:
            return None
        return self._dual_pair(u)

    def dual_norm_object(self) -> Optional[BaseNorm]:
        if self._dual_factory is not None:
            return self._dual_factory()
        if self._dual is None:
            return None
        return CustomNorm(
            name=f"dual({self.name})",
            evaluate=self._dual,
            orthant_monotonic=self.orthant_monotonic,
            orthant_strictly_monotonic=self.dual_orthant_strictly_monotonic,
            dual_orthant_strictly_monotonic=self.orthant_strictly_monotonic,
            permutation_invariant=self.permutation_invariant,
            oracle_dim_cap=self.oracle_dim_cap,
            dim=self.dim,
        )


def weighted_lp_norm(p: float, weights: Sequence[float]) -> CustomNorm:
    """‖w∘x‖_p com pesos positivos; dual ‖y/w‖_q

    Não é invariante por permutação: exercita os caminhos genéricos
    (enumeração de suportes, geração de colunas).
    """
    w = as_vector(weights)
    if np.any(w <= 0):
        raise ArgumentError("Pesos de wlp devem ser positivos")
    if not (p == INFINITY or (math.isfinite(p) and p >= 1)):
        raise ArgumentError(f"Expoente p deve estar em [1, ∞], recebido {p!r}")
    q = conjugate_exponent(p)
    d = w.shape[0]

    def evaluate(x: np.ndarray) -> float:
        return lp_value(w * x, p)

    def dual(y: np.ndarray) -> float:
        return lp_value(y / w, q)

    def maximizer(y: np.ndarray, support: Optional[IndexSet]) -> np.ndarray:
        idx = list(range(d)) if support is None else list(support)
        x = np.zeros(d)
        if idx:
            u = lp_maximizer(y[idx] / w[idx], p)
            x[idx] = u / w[idx]
        return x

    def dual_pair(u: np.ndarray) -> Optional[np.ndarray]:
        if p == INFINITY:
            return None
        if p == 1:
            return w * np.sign(u)
        a = np.abs(w * u)
        m = a.max()
        if m == 0:
            return None
        return w * np.sign(u) * (a / m) ** (p - 1.0)

    weights_text = ",".join(f"{v:g}" for v in w)
    return CustomNorm(
        name=f"wlp:{format_exponent(p)}:{weights_text}",
        evaluate=evaluate,
        dual=dual,
        maximizer=maximizer,
        dual_pair=dual_pair,
        dual_factory=lambda: weighted_lp_norm(q, 1.0 / w),
        orthant_monotonic=True,
        orthant_strictly_monotonic=p < INFINITY,
        dual_orthant_strictly_monotonic=p > 1,
        dim=d,
    )


def skew_norm() -> CustomNorm:
    """⦀x⦀ = |x₁ − x₂| + |x₂| em R² (não é monotônica por ortantes)"""

    def evaluate(x: np.ndarray) -> float:
        return abs(x[0] - x[1]) + abs(x[1])

    return CustomNorm(name="skew", evaluate=evaluate, dim=2)
