"""
Oracle
Referências por força bruta, independentes dos caminhos principais:
conjugação de Fenchel em grade, L0^φ em grade (forma conjugada e forma de bolas),
gauge dos átomos k-esparsos e maximização linear sobre a bola unitária
"""

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog, minimize

from src.utils.errors import ArgumentError, UnsupportedError
from src.utils.logger import get_logger
from src.vectors import IndexSet

logger = get_logger("oracle")

GRID_DIM_CAP = 3
GAUGE_DIM_CAP = 6

GridValues = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def maximize_linear_over_ball(evaluate: Callable[[np.ndarray], float], y: np.ndarray,
                              support: Optional[IndexSet] = None) -> Tuple[float, np.ndarray]:
    """sup {⟨x,y⟩ : ⦀x⦀ ≤ 1, x ∈ R_K} e um maximizador na esfera

    Maximiza a razão ⟨z,y⟩/⦀z⦀ (invariante por escala) com Nelder–Mead a
    partir de vários pontos iniciais. O valor é um limite inferior do supremo.
    """
    y = np.asarray(y, dtype=float)
    d = y.shape[0]
    idx = list(range(d)) if support is None else list(support)
    target = y[idx]

    def embed(z: np.ndarray) -> np.ndarray:
        full = np.zeros(d)
        full[idx] = z
        return full

    def ratio(z: np.ndarray) -> float:
        length = evaluate(embed(z))
        if length <= 0:
            return 0.0
        return float(np.dot(z, target)) / length

    if not idx or not np.any(target):
        x = embed(np.eye(len(idx))[0]) if idx else np.zeros(d)
        if idx:
            x = x / evaluate(x)
        return 0.0, x

    eye = np.eye(len(idx))
    starts = [target, np.sign(target)] + list(eye) + list(-eye)
    best_value, best_z = -math.inf, None
    for z0 in starts:
        if not np.any(z0):
            continue
        res = minimize(lambda z: -ratio(z), z0, method="Nelder-Mead",
                       options={'xatol': 1e-12, 'fatol': 1e-14, 'maxiter': 2000 * len(idx)})
        for z in (z0, res.x):
            value = ratio(z)
            if value > best_value and np.any(z):
                best_value, best_z = value, z
    x = embed(best_z)
    return max(best_value, 0.0), x / evaluate(x)


@dataclass(frozen=True)
class Grid:
    """Grade cartesiana [−R, R]^d com n pontos (ímpar) por eixo"""
    dim: int
    radius: float = 2.0
    resolution: int = 201

    def __post_init__(self):
        if not 1 <= self.dim <= GRID_DIM_CAP:
            raise UnsupportedError(f"Grades densas apenas para d <= {GRID_DIM_CAP}")
        if self.resolution < 3 or self.resolution % 2 == 0:
            raise ArgumentError("Resolução da grade deve ser ímpar (origem na grade)")
        if self.radius < 1.5:
            raise ArgumentError("Raio da grade deve ser >= 1.5")

    @classmethod
    def default(cls, dim: int, radius: float = 2.0) -> "Grid":
        return cls(dim=dim, radius=radius, resolution=201 if dim <= 2 else 61)

    @property
    def step(self) -> float:
        return 2.0 * self.radius / (self.resolution - 1)

    def axis(self) -> np.ndarray:
        return np.linspace(-self.radius, self.radius, self.resolution)

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*([self.axis()] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def _values_on(fvals: GridValues, points: np.ndarray) -> np.ndarray:
    values = fvals(points) if callable(fvals) else np.asarray(fvals, dtype=float)
    if values.shape != (points.shape[0],):
        raise ArgumentError("Valores de f não correspondem aos pontos da grade")
    return values


def _lower_addition(pairing: np.ndarray, values: np.ndarray) -> np.ndarray:
    """pairing − f com adição inferior de Moreau: (+∞) + (−∞) = −∞"""
    with np.errstate(invalid="ignore"):
        out = pairing - values
    out = np.where(values == math.inf, -math.inf, out)
    return np.where(values == -math.inf, math.inf, out)


def fenchel_conjugate_grid(fvals: GridValues, y: np.ndarray, grid: Grid) -> float:
    """max_x ⟨x,y⟩ − f(x) sobre os pontos da grade"""
    points = grid.points()
    y = np.asarray(y, dtype=float)
    if y.shape != (grid.dim,):
        raise ArgumentError("Dimensão de y difere da grade")
    return float(np.max(_lower_addition(points @ y, _values_on(fvals, points))))


def capra_conjugate_grid(norm, fvals: GridValues, y: np.ndarray, grid: Grid) -> float:
    """max_x c(x,y) − f(x) sobre a grade, c = acoplamento Capra da norma-fonte"""
    points = grid.points()
    lengths = np.array([norm(p) for p in points])
    safe = np.where(lengths > 0, lengths, 1.0)
    coupling = np.where(lengths > 0, (points @ np.asarray(y, dtype=float)) / safe, 0.0)
    return float(np.max(_lower_addition(coupling, _values_on(fvals, points))))


def l0phi_grid_oracle(family, phi, x: np.ndarray, grid: Grid) -> float:
    """sup_y ⟨x,y⟩ − max_l [⊤_l(y) − φ(l)] sobre y na grade (aproximação inferior de L0^φ)"""
    if family.d != grid.dim:
        raise ArgumentError("Dimensão da família difere da grade")
    Y = grid.points()
    conjugate = np.max(family.top_k_profiles(Y) - np.asarray(phi.values), axis=1)
    return float(np.max(Y @ np.asarray(x, dtype=float) - conjugate))


def _simplex_points(d: int, resolution: int) -> np.ndarray:
    combos = [c for c in itertools.product(range(resolution + 1), repeat=d) if sum(c) <= resolution]
    return np.array(combos, dtype=float) / resolution


def _dual_directions(d: int, count: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        angles = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    # esfera de Fibonacci
    i = np.arange(count) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / count)
    azimuth = math.pi * (1.0 + math.sqrt(5.0)) * i
    return np.stack([np.cos(azimuth) * np.sin(polar),
                     np.sin(azimuth) * np.sin(polar),
                     np.cos(polar)], axis=1)


def l0phi_simplex_oracle(family, phi, x: np.ndarray, resolution: Optional[int] = None,
                         directions: Optional[int] = None, chunk: int = 2000) -> float:
    """min Σ λ_l φ(l) sobre a grade do simplex sujeito a x ∈ Σ λ_l B_l^sn

    A pertinência é testada pelas funções suporte: ⟨x,y⟩ ≤ Σ λ_l ⊤_l(y) para
    um painel de direções duais.
    """
    d = family.d
    if d > GRID_DIM_CAP:
        raise UnsupportedError(f"Oráculo de simplex apenas para d <= {GRID_DIM_CAP}")
    resolution = resolution or (100 if d <= 2 else 40)
    directions = directions or (720 if d <= 2 else 1200)
    lambdas = _simplex_points(d, resolution)
    dirs = _dual_directions(d, directions)
    support = family.top_k_profiles(dirs)[:, 1:]
    pairing = dirs @ np.asarray(x, dtype=float)
    costs = lambdas @ np.asarray(phi.values[1:], dtype=float)
    best = math.inf
    for start in range(0, lambdas.shape[0], chunk):
        block = lambdas[start:start + chunk]
        member = np.all(block @ support.T >= pairing - 1e-12, axis=1)
        if np.any(member):
            best = min(best, float(np.min(costs[start:start + chunk][member])))
    return best


@dataclass
class OracleValue:
    value: float
    converged: bool
    method: str


def gauge_atoms_oracle(family, x: np.ndarray, k: int) -> OracleValue:
    """Gauge do casco dos átomos k-esparsos, pela descrição polar

    max ⟨x,y⟩ s.a. ⦀y_K⦀⋆ ≤ 1 para todo suporte K admissível; o valor final é
    renormalizado por ⊤_k(y), portanto é sempre um limite inferior certificado.

    Não usa o encolhimento alternado sobre os átomos (min λ com x/λ no casco):
    resolve o programa polar (linprog para q ∈ {1, ∞}, SLSQP nos demais),
    que devolve junto o vetor dual que certifica o valor.
    """
    d = family.d
    if d > GAUGE_DIM_CAP:
        raise UnsupportedError(f"Oráculo de gauge apenas para d <= {GAUGE_DIM_CAP}")
    if not 1 <= k <= d:
        raise ArgumentError(f"k={k} fora de [1, {d}]")
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise ArgumentError("Oráculo de gauge exige x ≠ 0")
    source = family.source
    sizes = [k] if source.orthant_monotonic else range(1, k + 1)
    supports = [K for size in sizes for K in itertools.combinations(range(d), size)]
    q = getattr(source, "q", None)

    if q == math.inf:
        res = linprog(-x, bounds=[(-1.0, 1.0)] * d, method="highs")
        return _finish(family, x, k, res.x, res.status == 0, "lp-box")

    if q == 1.0:
        # variáveis (y, t) com |y_i| ≤ t_i e Σ_{i∈K} t_i ≤ 1
        c = np.concatenate([-x, np.zeros(d)])
        eye = np.eye(d)
        rows = [np.hstack([eye, -eye]), np.hstack([-eye, -eye])]
        budget = np.zeros((len(supports), 2 * d))
        for j, K in enumerate(supports):
            budget[j, d + np.array(K)] = 1.0
        A_ub = np.vstack(rows + [budget])
        b_ub = np.concatenate([np.zeros(2 * d), np.ones(len(supports))])
        bounds = [(None, None)] * d + [(0.0, None)] * d
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        return _finish(family, x, k, res.x[:d], res.status == 0, "lp-polyhedral")

    if q is not None:
        def constraint(K):
            idx = list(K)
            return {
                'type': 'ineq',
                'fun': lambda y: 1.0 - np.sum(np.abs(y[idx]) ** q),
                'jac': lambda y: _power_jac(y, idx, q),
            }
    else:
        def constraint(K):
            idx = list(K)

            def fun(y):
                masked = np.zeros(d)
                masked[idx] = y[idx]
                return 1.0 - source.dual(masked)
            return {'type': 'ineq', 'fun': fun}

    start = np.sign(x) * np.abs(x) / np.abs(x).max()
    start = 0.5 * start / family.top_k_dual_norm(start, k)
    res = minimize(lambda y: -float(np.dot(x, y)), start, jac=lambda y: -x, method="SLSQP",
                   constraints=[constraint(K) for K in supports],
                   options={'ftol': 1e-15, 'maxiter': 1000})
    return _finish(family, x, k, res.x, bool(res.success), "slsqp")


def _power_jac(y: np.ndarray, idx: Sequence[int], q: float) -> np.ndarray:
    grad = np.zeros_like(y)
    grad[idx] = -q * np.abs(y[idx]) ** (q - 1.0) * np.sign(y[idx])
    return grad


def _finish(family, x: np.ndarray, k: int, y: Optional[np.ndarray], ok: bool, method: str) -> OracleValue:
    if y is None:
        logger.warning(f"Oráculo de gauge falhou ({method})")
        return OracleValue(math.nan, False, method)
    top = family.top_k_dual_norm(np.asarray(y, dtype=float), k)
    if top <= 0:
        return OracleValue(math.nan, False, method)
    return OracleValue(float(np.dot(x, y)) / top, ok, method)
