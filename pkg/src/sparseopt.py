"""
Sparse Optimization
min_{x∈C} φ(l0(x)) resolvido por enumeração e pela reformulação variacional,
com conferência cruzada entre os dois caminhos
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from src.capra import PhiFunction
from src.factorization import variational_phi_l0
from src.knorms import KNormFamily
from src.normcore import l0, parse_source
from src.utils.errors import ArgumentError, InternalInconsistencyError
from src.utils.logger import get_logger
from src.vectors import as_vector, format_vector

logger = get_logger("sparseopt")

AGREEMENT_TOL = 1e-6
DEFAULT_STEPS = 101


@dataclass
class FeasibleSet:
    """Conjunto viável finito, ou fatia afim x0 + t·v com t numa grade de [t_min, t_max]"""
    kind: str
    points: List[np.ndarray] = field(default_factory=list)
    x0: Optional[np.ndarray] = None
    direction: Optional[np.ndarray] = None
    t_min: float = 0.0
    t_max: float = 1.0
    steps: int = DEFAULT_STEPS

    @classmethod
    def finite(cls, points) -> "FeasibleSet":
        vectors = [as_vector(p) for p in points]
        if not vectors:
            raise ArgumentError("Conjunto viável vazio")
        feasible = cls("finite", points=vectors)
        feasible.validate()
        return feasible

    @classmethod
    def segment(cls, x0, direction, t_min: float, t_max: float, steps: int = DEFAULT_STEPS) -> "FeasibleSet":
        if not t_min <= t_max:
            raise ArgumentError(f"Intervalo inválido [{t_min}, {t_max}]")
        if steps < 1:
            raise ArgumentError("A grade precisa de ao menos um ponto")
        feasible = cls("segment", x0=as_vector(x0), direction=as_vector(direction),
                       t_min=float(t_min), t_max=float(t_max), steps=int(steps))
        feasible.validate()
        return feasible

    def parameters(self) -> List[Optional[float]]:
        if self.kind == "finite":
            return [None] * len(self.points)
        if self.steps == 1:
            return [self.t_min]
        return [float(t) for t in np.linspace(self.t_min, self.t_max, self.steps)]

    def enumerate(self) -> List[np.ndarray]:
        if self.kind == "finite":
            return list(self.points)
        return [self.x0 + t * self.direction for t in self.parameters()]

    def validate(self):
        points = self.enumerate()
        dims = {p.shape[0] for p in points}
        if len(dims) != 1:
            raise ArgumentError(f"Pontos de dimensões diferentes: {sorted(dims)}")
        for p in points:
            if l0(p) == 0:
                raise ArgumentError("O conjunto viável não pode conter 0")

    @property
    def dim(self) -> int:
        return self.enumerate()[0].shape[0]

    def scaled(self, factor: float) -> "FeasibleSet":
        if self.kind == "finite":
            return FeasibleSet.finite([factor * p for p in self.points])
        return FeasibleSet.segment(factor * self.x0, factor * self.direction, self.t_min, self.t_max, self.steps)

    def to_dict(self) -> Dict:
        if self.kind == "finite":
            return {'kind': 'finite', 'points': self.points}
        return {'kind': 'segment', 'x0': self.x0, 'direction': self.direction,
                't_min': self.t_min, 't_max': self.t_max, 'steps': self.steps}


@dataclass
class SolveReport:
    value: float
    argmin: np.ndarray
    argmin_parameter: Optional[float]
    enumeration_value: float
    reformulated_value: float
    points: int
    max_disagreement: float

    def to_dict(self) -> Dict:
        return {
            'value': self.value,
            'argmin': self.argmin,
            'argmin_parameter': self.argmin_parameter,
            'methods': {
                'enumeration': self.enumeration_value,
                'reformulated': self.reformulated_value,
                'max_disagreement': self.max_disagreement,
            },
            'points': self.points,
        }


def solve_min_phi_l0(family: KNormFamily, phi: PhiFunction, C: FeasibleSet) -> SolveReport:
    """min_{x∈C} φ(l0(x)) por enumeração direta e pelo objetivo reformulado

    O objetivo reformulado em cada ponto é (1/⦀x⦀)·min Σ φ(l)sn_l(z^(l)), avaliado
    pelo solver de decomposição (limite superior certificado).
    """
    points = C.enumerate()
    if points[0].shape[0] != family.d:
        raise ArgumentError(f"Conjunto em dimensão {points[0].shape[0]}, família em {family.d}")
    best_direct, best_reform = math.inf, math.inf
    best_index, worst = 0, 0.0
    for i, x in enumerate(points):
        direct = phi(l0(x))
        reformulated = variational_phi_l0(family, phi, x).solver.upper
        worst = max(worst, abs(direct - reformulated))
        if direct < best_direct:
            best_direct, best_index = direct, i
        best_reform = min(best_reform, reformulated)

    if abs(best_direct - best_reform) > AGREEMENT_TOL or worst > AGREEMENT_TOL:
        raise InternalInconsistencyError(
            f"Enumeração ({best_direct:.12g}) e reformulação ({best_reform:.12g}) discordam "
            f"(pior ponto {worst:.3e})"
        )
    logger.info(f"min φ(l0) = {best_direct:g} em {format_vector(points[best_index])} ({len(points)} pontos)")
    return SolveReport(
        value=float(best_direct),
        argmin=points[best_index],
        argmin_parameter=C.parameters()[best_index],
        enumeration_value=float(best_direct),
        reformulated_value=float(best_reform),
        points=len(points),
        max_disagreement=float(worst),
    )


@dataclass
class Instance:
    family: KNormFamily
    phi: PhiFunction
    feasible: FeasibleSet


def instance_from_dict(data: Dict) -> Instance:
    """{source: "lp:<p>", phi: [v0..vd] | "id" | "sq", set: {kind, ...}}"""
    try:
        source_spec = data['source']
        phi_spec = data['phi']
        set_spec = data['set']
    except (KeyError, TypeError) as e:
        raise ArgumentError(f"Instância sem campo obrigatório: {e}") from e

    kind = set_spec.get('kind')
    if kind == "finite":
        feasible = FeasibleSet.finite(set_spec.get('points', []))
    elif kind == "segment":
        try:
            feasible = FeasibleSet.segment(set_spec['x0'], set_spec['direction'],
                                           float(set_spec['t_min']), float(set_spec['t_max']),
                                           int(set_spec.get('steps', DEFAULT_STEPS)))
        except KeyError as e:
            raise ArgumentError(f"Fatia afim sem campo {e}") from e
    else:
        raise ArgumentError(f"Tipo de conjunto desconhecido: {kind!r}")

    d = feasible.dim
    if isinstance(phi_spec, str):
        phi = PhiFunction.parse(phi_spec, d)
    else:
        phi = PhiFunction(tuple(float(v) for v in phi_spec))
        phi.check_dim(d)
    return Instance(KNormFamily(parse_source(source_spec), d), phi, feasible)


def load_instance(path: Union[str, Path]) -> Instance:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ArgumentError(f"Arquivo de instância não encontrado: {path}") from e
    except json.JSONDecodeError as e:
        raise ArgumentError(f"JSON inválido em {path}: {e}") from e
    return instance_from_dict(data)


def random_instance(d: int, rng: np.random.Generator, source: str = "lp:2", phi: str = "id") -> Dict:
    """Instância aleatória (finita ou fatia afim) no formato de arquivo"""
    if rng.random() < 0.5:
        points = []
        for _ in range(int(rng.integers(2, 6))):
            x = np.where(rng.random(d) < 0.5, rng.standard_normal(d), 0.0)
            if not np.any(x):
                x[int(rng.integers(d))] = 1.0
            points.append([float(v) for v in x])
        return {'source': source, 'phi': phi, 'set': {'kind': 'finite', 'points': points}}
    if d < 2:
        raise ArgumentError("Fatias afins aleatórias exigem d >= 2")
    # a coordenada j zera dentro da grade; a coordenada seguinte mantém 0 fora de C
    j = int(rng.integers(d))
    x0 = np.where(rng.random(d) < 0.6, rng.standard_normal(d), 0.0)
    x0[(j + 1) % d] = 1.0
    x0[j] = float(rng.integers(-2, 3)) / 2.0
    direction = np.zeros(d)
    direction[j] = 1.0
    return {
        'source': source, 'phi': phi,
        'set': {'kind': 'segment', 'x0': [float(v) for v in x0], 'direction': [float(v) for v in direction],
                't_min': -1.0, 't_max': 1.0, 'steps': 21},
    }
