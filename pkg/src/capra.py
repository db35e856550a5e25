"""
Capra
Acoplamento Capra, conjugado de φ∘l0 em forma fechada, biconjugado
e subdiferencial Capra (pertinência, caracterização em zero e certificado construtivo)
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from sources.base_norm import BaseNorm
from src.knorms import KNormFamily
from src.monotonicity import require_osm_pair, support_preserving_dual_pair
from src.normcore import l0, normalize
from src.utils.errors import ArgumentError, ConstructionError, UnsupportedError
from src.utils.logger import get_logger
from src.vectors import ZERO_TOL, as_vector, same_dim

logger = get_logger("capra")

LAMBDA_CAP = 2.0 ** 60
LAMBDA_BISECT_TOL = 1e-6
ARGMAX_TOL = 1e-12
CERTIFICATE_TOL = 1e-8


@dataclass(frozen=True)
class PhiFunction:
    """φ: {0,…,d} → R não decrescente e finita"""
    values: Tuple[float, ...]
    name: str = "table"

    def __post_init__(self):
        if len(self.values) < 2:
            raise ArgumentError("φ precisa de ao menos dois valores (d >= 1)")
        if any(math.isinf(v) for v in self.values):
            raise UnsupportedError("φ com valores infinitos não é suportada")
        if any(math.isnan(v) for v in self.values):
            raise ArgumentError("φ com valores NaN")
        for l in range(len(self.values) - 1):
            if self.values[l] > self.values[l + 1]:
                raise ArgumentError(f"φ deve ser não decrescente: φ({l})={self.values[l]} > φ({l + 1})={self.values[l + 1]}")

    @property
    def d(self) -> int:
        return len(self.values) - 1

    def __call__(self, l: int) -> float:
        return self.values[l]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @classmethod
    def identity(cls, d: int) -> "PhiFunction":
        return cls(tuple(float(l) for l in range(d + 1)), "id")

    @classmethod
    def squares(cls, d: int) -> "PhiFunction":
        return cls(tuple(float(l * l) for l in range(d + 1)), "sq")

    @classmethod
    def zero(cls, d: int) -> "PhiFunction":
        return cls(tuple(0.0 for _ in range(d + 1)), "zero")

    @classmethod
    def parse(cls, spec: str, d: int) -> "PhiFunction":
        """id | sq | zero | table:v0,...,vd"""
        token = spec.strip().lower()
        if token == "id":
            return cls.identity(d)
        if token == "sq":
            return cls.squares(d)
        if token == "zero":
            return cls.zero(d)
        kind, _, rest = token.partition(":")
        if kind != "table" or not rest:
            raise ArgumentError(f"φ desconhecida: {spec!r}")
        values = []
        for part in rest.split(","):
            part = part.strip()
            if part in ("inf", "+inf", "infinity"):
                raise UnsupportedError("φ com valores infinitos não é suportada")
            try:
                values.append(float(part))
            except ValueError as e:
                raise ArgumentError(f"Valor de φ inválido {part!r}") from e
        phi = cls(tuple(values), "table")
        phi.check_dim(d)
        return phi

    def check_dim(self, d: int):
        if self.d != d:
            raise ArgumentError(f"φ tem {len(self.values)} valores; esperado d+1 = {d + 1}")

    def check_factorization(self):
        """Hipóteses de L0^φ: φ(0) = 0 e φ ≥ 0"""
        if self.values[0] != 0.0 or min(self.values) < 0:
            raise ArgumentError("L0^φ exige φ(0) = 0 e φ >= 0")

    def to_dict(self) -> Dict:
        return {'name': self.name, 'values': list(self.values)}


def coupling(n: BaseNorm, x: np.ndarray, y: np.ndarray) -> float:
    """c(x,y) = ⟨x,y⟩/⦀x⦀ se x ≠ 0, senão 0 (constante ao longo de raios primais)"""
    x, y = as_vector(x), as_vector(y)
    same_dim(x, y)
    if l0(x) == 0:
        return 0.0
    return float(np.dot(x, y)) / n(x)


@dataclass
class ConjugateValue:
    value: float
    argmax: List[int]
    profile: List[float]

    def to_dict(self) -> Dict:
        return {'value': self.value, 'argmax': self.argmax, 'profile': self.profile}


def capra_conjugate(family: KNormFamily, phi: PhiFunction, y: np.ndarray) -> ConjugateValue:
    """(φ∘l0)^c(y) = max_l [⊤_l(y) − φ(l)], ⊤_0 = 0"""
    y = as_vector(y)
    phi.check_dim(family.d)
    if not family.source.orthant_monotonic:
        logger.warning(f"{family.source.name} não é monotônica por ortantes; fórmula do conjugado não garantida")
    profile = family.top_k_profile(y)
    terms = profile - phi.as_array()
    value = float(np.max(terms))
    cutoff = value - ARGMAX_TOL * (1.0 + abs(value))
    argmax = [int(l) for l in np.nonzero(terms >= cutoff)[0]]
    return ConjugateValue(value, argmax, [float(v) for v in profile])


def capra_biconjugate(family: KNormFamily, phi: PhiFunction, x: np.ndarray, shortcut: bool = True):
    """(φ∘l0)^{cc'}(x) = L0^φ(x/⦀x⦀); igual a φ(l0(x)) quando norma e dual são OSM"""
    from src.factorization import BracketedValue, Decomposition, eval_L0

    x = as_vector(x)
    phi.check_dim(family.d)
    if l0(x) == 0:
        zero = float(phi(0))
        return BracketedValue(zero, zero, Decomposition([np.zeros(family.d)] * family.d), np.zeros(family.d))
    require_osm_pair(family.source, "capra_biconjugate", family.d)
    return eval_L0(family, phi, normalize(family.source, x), shortcut=shortcut)


@dataclass
class MembershipResult:
    member: bool
    level: int
    normal_cone_residual: float = 0.0
    argmax_residual: float = 0.0
    argmax: List[int] = field(default_factory=list)
    at_zero: bool = False

    def __bool__(self) -> bool:
        return self.member

    def to_dict(self) -> Dict:
        return {
            'member': self.member,
            'level': self.level,
            'normal_cone_residual': self.normal_cone_residual,
            'argmax_residual': self.argmax_residual,
            'argmax': self.argmax,
            'at_zero': self.at_zero,
        }


def subdiff_at_zero_membership(family: KNormFamily, phi: PhiFunction, y: np.ndarray,
                               tol: float = CERTIFICATE_TOL) -> bool:
    """y ∈ ∂_c(φ∘l0)(0) ⇔ ⊤_l(y) ≤ φ(l) − φ(0) para todo l ≥ 1"""
    y = as_vector(y)
    phi.check_dim(family.d)
    profile = family.top_k_profile(y)
    return all(profile[l] <= phi(l) - phi(0) + tol for l in range(1, family.d + 1))


def subdiff_membership(family: KNormFamily, phi: PhiFunction, x: np.ndarray, y: np.ndarray,
                       tol: float = CERTIFICATE_TOL) -> MembershipResult:
    """y ∈ ∂_c(φ∘l0)(x)?

    (i) ⟨x,y⟩ = sn_l(x)·⊤_l(y) com l = l0(x) e (ii) l ∈ argmax_j [⊤_j(y) − φ(j)].
    """
    x, y = as_vector(x), as_vector(y)
    same_dim(x, y)
    level = l0(x)
    if level == 0:
        member = subdiff_at_zero_membership(family, phi, y, tol)
        return MembershipResult(member, 0, at_zero=True)

    sn = family.k_support_dual_norm(x, level)
    top = family.top_k_dual_norm(y, level)
    normal_residual = abs(float(np.dot(x, y)) - sn * top)
    conj = capra_conjugate(family, phi, y)
    argmax_residual = conj.value - (top - phi(level))
    member = bool(normal_residual <= tol * (1.0 + sn * top)
                  and argmax_residual <= tol * (1.0 + abs(conj.value)))
    return MembershipResult(member, level, normal_residual, argmax_residual, conj.argmax)


@dataclass
class SubgradientCertificate:
    y: np.ndarray
    lam: float
    direction: np.ndarray
    conditions: MembershipResult

    def to_dict(self) -> Dict:
        return {
            'y': self.y,
            'lambda': self.lam,
            'direction': self.direction,
            'conditions': self.conditions.to_dict(),
        }


def _level_attains_max(profile: np.ndarray, phi: np.ndarray, lam: float, level: int) -> bool:
    terms = lam * profile - phi
    best = float(np.max(terms))
    return terms[level] >= best - ARGMAX_TOL * (1.0 + abs(best))


def _minimal_lambda(profile: np.ndarray, phi: np.ndarray, level: int) -> float:
    """Menor λ > 0 com l ∈ argmax_j [λ⊤_j(y₀) − φ(j)]: dobra, bissecta e ajusta ao ponto de quebra"""
    feasible = lambda lam: _level_attains_max(profile, phi, lam, level)
    hi = 1.0
    while not feasible(hi):
        hi *= 2.0
        if hi > LAMBDA_CAP:
            raise ConstructionError(f"λ excedeu {LAMBDA_CAP:g} sem atingir o argmax em l={level}")
    lo = 0.0
    if hi > 1.0:
        lo = hi / 2.0
        while hi - lo > LAMBDA_BISECT_TOL * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                hi = mid
            else:
                lo = mid
    # o λ mínimo é um ponto de quebra (φ(l) − φ(j)) / (⊤_l − ⊤_j)
    candidates = []
    for j in range(len(profile)):
        gap = profile[level] - profile[j]
        if j == level or gap == 0:
            continue
        lam = (phi[level] - phi[j]) / gap
        if lam > 0 and lo - LAMBDA_BISECT_TOL * max(1.0, hi) <= lam <= hi and feasible(lam):
            candidates.append(lam)
    return min(candidates) if candidates else hi


def subgradient_construct(family: KNormFamily, phi: PhiFunction, x: np.ndarray) -> SubgradientCertificate:
    """Certificado λ·y₀ ∈ ∂_c(φ∘l0)(x), y₀ par dual de x com o mesmo suporte"""
    x = as_vector(x)
    phi.check_dim(family.d)
    d = family.d
    if l0(x) == 0:
        y = np.zeros(d)
        member = subdiff_at_zero_membership(family, phi, y)
        return SubgradientCertificate(y, 1.0, y, MembershipResult(member, 0, at_zero=True))

    require_osm_pair(family.source, "subgradient_construct", d)
    direction = support_preserving_dual_pair(family.source, x)
    direction = direction / family.source.dual(direction)
    level = l0(x)
    profile = family.top_k_profile(direction)
    lam = _minimal_lambda(profile, phi.as_array(), level)
    y = lam * direction
    conditions = subdiff_membership(family, phi, x, y, tol=CERTIFICATE_TOL)
    if not conditions.member:
        raise ConstructionError(
            f"Certificado λ={lam:g} não passou no teste de pertinência "
            f"(resíduos {conditions.normal_cone_residual:.3e}, {conditions.argmax_residual:.3e})"
        )
    logger.debug(f"Subgradiente construído: l={level}, λ={lam:g}")
    return SubgradientCertificate(y, lam, direction, conditions)


def subdiff_convexity_probe(family: KNormFamily, phi: PhiFunction, x: np.ndarray,
                            y1: np.ndarray, y2: np.ndarray, t: float,
                            tol: float = CERTIFICATE_TOL) -> bool:
    """Pertinência de t·y1 + (1−t)·y2 (o subdiferencial Capra é convexo)"""
    if not 0.0 <= t <= 1.0:
        raise ArgumentError(f"t={t} fora de [0, 1]")
    y1, y2 = as_vector(y1), as_vector(y2)
    return subdiff_membership(family, phi, x, t * y1 + (1.0 - t) * y2, tol).member


def discover_members(family: KNormFamily, phi: PhiFunction, x: np.ndarray,
                     scales: Sequence[float] = (1.0, 1.5, 2.0, 4.0),
                     perturbations: int = 4, seed: int = 0) -> List[np.ndarray]:
    """Membros do subdiferencial em x a partir do certificado construído

    Múltiplos maiores do certificado continuam membros (o nível l0(x) permanece no
    argmax); perturbações pequenas fora de supp(x) são mantidas só se passarem no teste.
    """
    x = as_vector(x)
    cert = subgradient_construct(family, phi, x)
    if l0(x) == 0:
        return [cert.y]
    members = [s * cert.y for s in scales if subdiff_membership(family, phi, x, s * cert.y).member]
    off = np.abs(x) <= ZERO_TOL
    if not np.any(off):
        return members
    rng = np.random.default_rng(seed)
    floor = float(np.min(np.abs(cert.y[~off])))
    for _ in range(perturbations):
        w = np.where(off, rng.uniform(-0.5, 0.5, family.d) * floor, 0.0)
        y = cert.y * rng.uniform(1.0, 2.0) + w
        if subdiff_membership(family, phi, x, y).member:
            members.append(y)
    return members
