"""
Base Norm Class
Classe base para todas as normas-fonte ⦀·⦀ usadas pelo acoplamento Capra
"""

import math
from abc import ABC, abstractmethod
from typing import Dict, Optional, Sequence

import numpy as np

from src.oracle import maximize_linear_over_ball
from src.utils.errors import InvalidNormError, UnsupportedError
from src.utils.logger import get_logger
from src.vectors import IndexSet, unit_vector

DEFAULT_ORACLE_DIM_CAP = 6


class BaseNorm(ABC):
    """Classe base para normas-fonte

    As flags de monotonicidade são *declaradas*; o módulo monotonicity
    confere por amostragem antes de confiar nelas.
    """

    def __init__(self, name: str,
                 orthant_monotonic: bool = False,
                 orthant_strictly_monotonic: bool = False,
                 dual_orthant_strictly_monotonic: bool = False,
                 permutation_invariant: bool = False,
                 oracle_dim_cap: int = DEFAULT_ORACLE_DIM_CAP,
                 dim: Optional[int] = None):
        self.name = name
        self.orthant_monotonic = orthant_monotonic
        self.orthant_strictly_monotonic = orthant_strictly_monotonic
        self.dual_orthant_strictly_monotonic = dual_orthant_strictly_monotonic
        self.permutation_invariant = permutation_invariant
        self.oracle_dim_cap = oracle_dim_cap
        self.dim = dim
        self.logger = get_logger(f"norm.{name}")

    @abstractmethod
    def evaluate(self, x: np.ndarray) -> float:
        """Valor ⦀x⦀ (sem validação)"""
        pass

    def has_analytic_dual(self) -> bool:
        return False

    def analytic_dual(self, y: np.ndarray) -> float:
        raise NotImplementedError

    def __call__(self, x: np.ndarray) -> float:
        return self.validate_value(self.evaluate(x))

    def validate_value(self, value: float) -> float:
        value = float(value)
        if not math.isfinite(value) or value < 0:
            raise InvalidNormError(f"Norma {self.name} devolveu {value!r}")
        return value

    def dual(self, y: np.ndarray) -> float:
        """⦀y⦀⋆ = sup {⟨x,y⟩ : ⦀x⦀ ≤ 1}"""
        if self.has_analytic_dual():
            return self.validate_value(self.analytic_dual(y))
        self._check_oracle_dim(y.shape[0])
        value, _ = maximize_linear_over_ball(self.__call__, y)
        return value

    def restricted_dual(self, y: np.ndarray, support: IndexSet) -> float:
        """Dual da restrição de ⦀·⦀ a R_K, avaliado em y_K"""
        if not support:
            return 0.0
        if self.orthant_monotonic and self.has_analytic_dual():
            masked = np.zeros_like(y)
            idx = list(support)
            masked[idx] = y[idx]
            return self.dual(masked)
        self._check_oracle_dim(y.shape[0])
        value, _ = maximize_linear_over_ball(self.__call__, y, support=support)
        return value

    def dual_maximizer(self, y: np.ndarray, support: Optional[IndexSet] = None) -> np.ndarray:
        """Ponto x da esfera unitária (em R_K se K for dado) com ⟨x,y⟩ máximo"""
        self._check_oracle_dim(y.shape[0])
        _, x = maximize_linear_over_ball(self.__call__, y, support=support)
        return x

    def dual_pair_direction(self, u: np.ndarray) -> Optional[np.ndarray]:
        """Par dual analítico com o mesmo suporte de u, se houver fórmula"""
        return None

    def dual_norm_object(self) -> Optional["BaseNorm"]:
        """Norma dual como objeto BaseNorm, quando disponível"""
        return None

    def coordinate_dual(self, d: int, i: int) -> float:
        """⦀e_i⦀⋆, usado em limites de correção de resíduos"""
        return self.dual(unit_vector(d, i))

    def describe(self) -> Dict:
        return {
            'name': self.name,
            'orthant_monotonic': self.orthant_monotonic,
            'orthant_strictly_monotonic': self.orthant_strictly_monotonic,
            'dual_orthant_strictly_monotonic': self.dual_orthant_strictly_monotonic,
            'permutation_invariant': self.permutation_invariant,
        }

    def check_dim(self, x: Sequence[float]):
        if self.dim is not None and len(x) != self.dim:
            raise UnsupportedError(f"Norma {self.name} definida apenas em dimensão {self.dim}")

    def _check_oracle_dim(self, d: int):
        if d > self.oracle_dim_cap:
            raise UnsupportedError(
                f"Norma {self.name} sem dual analítico e d={d} > limite do oráculo {self.oracle_dim_cap}"
            )

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"
