"""
Norm Core
Operações base: l0, normas-fonte, normas duais, restrição, normalização e ∥·∥-dualidade
"""

from typing import Iterable

import numpy as np

from sources.base_norm import BaseNorm
from sources.custom_norm import skew_norm, weighted_lp_norm
from sources.lp_norm import LpNorm
from src.utils.errors import ArgumentError
from src.vectors import ZERO_TOL, as_index_set, parse_exponent, parse_vector, same_dim, support


def l0(x: np.ndarray) -> int:
    """Número de componentes com |x_i| > ZERO_TOL"""
    return len(support(x))


def norm(n: BaseNorm, x: np.ndarray) -> float:
    n.check_dim(x)
    return n(x)


def dual_norm(n: BaseNorm, y: np.ndarray) -> float:
    n.check_dim(y)
    return n.dual(y)


def restrict(x: np.ndarray, K: Iterable[int]) -> np.ndarray:
    """x_K: coincide com x em K, zero fora"""
    idx = list(as_index_set(K, x.shape[0]))
    out = np.zeros_like(x, dtype=float)
    out[idx] = x[idx]
    return out


def normalize(n: BaseNorm, x: np.ndarray) -> np.ndarray:
    """x/⦀x⦀ se x ≠ 0, senão 0"""
    value = norm(n, x)
    if value == 0.0 or l0(x) == 0:
        return np.zeros_like(x, dtype=float)
    return np.asarray(x, dtype=float) / value


def is_dual_pair(n: BaseNorm, x: np.ndarray, y: np.ndarray, tol: float = 1e-9) -> bool:
    """Igualdade em ⟨x,y⟩ ≤ ⦀x⦀·⦀y⦀⋆, relativa a 1 + ⦀x⦀·⦀y⦀⋆"""
    same_dim(x, y)
    bound = norm(n, x) * dual_norm(n, y)
    return abs(float(np.dot(x, y)) - bound) <= tol * (1.0 + bound)


def parse_source(spec: str) -> BaseNorm:
    """Ler a especificação da norma-fonte

    Formatos: "lp:<p>" (p racional ou "inf"), "l1", "l2", "linf",
    "wlp:<p>:<w1,...,wd>" e "skew".
    """
    token = spec.strip().lower()
    if token in ("l1", "l2", "linf"):
        return LpNorm(parse_exponent(token[1:]))
    if token == "skew":
        return skew_norm()
    kind, _, rest = token.partition(":")
    if kind == "lp" and rest:
        return LpNorm(parse_exponent(rest))
    if kind == "wlp":
        p_text, _, weights_text = rest.partition(":")
        if not weights_text:
            raise ArgumentError(f"wlp exige pesos: {spec!r}")
        return weighted_lp_norm(parse_exponent(p_text), parse_vector(weights_text))
    raise ArgumentError(f"Norma-fonte desconhecida: {spec!r}")


__all__ = [
    "ZERO_TOL", "l0", "norm", "dual_norm", "restrict", "normalize",
    "is_dual_pair", "parse_source",
]
