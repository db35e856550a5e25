"""
Vectors
Validação e utilidades de vetores densos e conjuntos de índices
"""

from fractions import Fraction
from typing import Iterable, Sequence, Tuple

import numpy as np

from src.utils.errors import ArgumentError

# Tolerância absoluta de detecção de suporte (l0 é descontínua: escala é responsabilidade do chamador)
ZERO_TOL = 1e-12

IndexSet = Tuple[int, ...]


def as_vector(values) -> np.ndarray:
    """Converter para vetor 1-D finito, somente leitura"""
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise ArgumentError(f"Vetor inválido: {e}") from e
    if arr.ndim != 1 or arr.size == 0:
        raise ArgumentError(f"Vetor deve ser 1-D com d >= 1, recebido shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError("Vetor com entradas NaN/Inf")
    arr.setflags(write=False)
    return arr


def same_dim(*vectors: np.ndarray) -> int:
    """Dimensão comum; erro se os comprimentos diferem"""
    dims = {v.shape[0] for v in vectors}
    if len(dims) != 1:
        raise ArgumentError(f"Dimensões incompatíveis: {sorted(dims)}")
    return dims.pop()


def support(x: np.ndarray) -> IndexSet:
    """Índices (base 0) com |x_i| > ZERO_TOL"""
    return tuple(int(i) for i in np.nonzero(np.abs(x) > ZERO_TOL)[0])


def as_index_set(indices: Iterable[int], d: int) -> IndexSet:
    """Validar um conjunto de índices K ⊂ {0,…,d−1}"""
    items = list(indices)
    if len(set(items)) != len(items):
        raise ArgumentError(f"Índices duplicados em {items}")
    for i in items:
        if not 0 <= i < d:
            raise ArgumentError(f"Índice {i} fora de [0, {d})")
    return tuple(sorted(int(i) for i in items))


def unit_vector(d: int, i: int) -> np.ndarray:
    e = np.zeros(d)
    e[i] = 1.0
    return e


def parse_vector(text: str) -> np.ndarray:
    """Ler vetor como decimais separados por vírgula: "3,4,0" """
    parts = [p.strip() for p in text.split(',') if p.strip()]
    if not parts:
        raise ArgumentError(f"Vetor vazio: {text!r}")
    try:
        return as_vector([float(Fraction(p)) for p in parts])
    except (ValueError, ZeroDivisionError) as e:
        raise ArgumentError(f"Vetor inválido {text!r}: {e}") from e


def parse_exponent(text: str) -> float:
    """Ler p como racional ("3/2", "1.5") ou "inf" """
    token = text.strip().lower()
    if token in ("inf", "infinity", "∞"):
        return float("inf")
    try:
        return float(Fraction(token))
    except (ValueError, ZeroDivisionError) as e:
        raise ArgumentError(f"Expoente inválido {text!r}") from e


def format_vector(x: Sequence[float]) -> str:
    return ",".join(repr(float(v)) for v in x)
