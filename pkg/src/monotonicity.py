"""
Monotonicity
Vereditos de monotonicidade por ortantes (OM) e monotonicidade estrita (OSM),
pares duais que preservam o suporte e a cadeia estrita dos valores ⊤_k
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from sources.base_norm import BaseNorm
from sources.custom_norm import CustomNorm
from sources.lp_norm import INFINITY, LpNorm
from src.normcore import is_dual_pair, l0, restrict
from src.oracle import maximize_linear_over_ball
from src.utils.errors import ArgumentError, ConstructionError
from src.utils.logger import get_logger
from src.vectors import ZERO_TOL, as_vector, support

logger = get_logger("monotonicity")

DEFAULT_SAMPLES = 10_000
DEFAULT_DIM = 3
MONOTONE_TOL = 1e-12
CHAIN_EQUAL_TOL = 1e-9


class Verdict(str, Enum):
    PASSES = "passes"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


class Property(str, Enum):
    OM = "OM"
    OSM = "OSM"


@dataclass
class MonotonicityReport:
    """Veredito de amostragem (ou analítico, para ℓp); "passes" não é prova"""
    property: Property
    verdict: Verdict
    samples_used: int
    method: str
    counterexample: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @property
    def passes(self) -> bool:
        return self.verdict == Verdict.PASSES

    def to_dict(self) -> Dict:
        return {
            'property': self.property.value,
            'verdict': self.verdict.value,
            'samples_used': self.samples_used,
            'method': self.method,
            'counterexample': None if self.counterexample is None else {
                'x': self.counterexample[0], 'x_prime': self.counterexample[1],
            },
        }


def _sampling_dim(n: BaseNorm, dim: Optional[int]) -> int:
    if n.dim is not None:
        return n.dim
    return dim or DEFAULT_DIM


def _sample_pairs(d: int, samples: int, rng: np.random.Generator, strict: bool) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Pares (x, x′) com |x| ≤ |x′| e x∘x′ ≥ 0, estratificados

    Os padrões de suporte e os ortantes de sinal são percorridos ciclicamente;
    x é obtido encolhendo x′ coordenada a coordenada por fatores em {0, U(0,1), 1}.
    Com strict=True ao menos uma coordenada do suporte encolhe por fator ≤ 0.9.
    """
    masks = 2 ** d - 1
    for s in range(samples):
        mask_id = 1 + (s % masks) if d <= 12 else int(rng.integers(1, 2 ** d))
        mask = np.array([(mask_id >> i) & 1 for i in range(d)], dtype=bool)
        orthant = (s // masks) % (2 ** d) if d <= 12 else int(rng.integers(0, 2 ** d))
        signs = np.array([-1.0 if (orthant >> i) & 1 else 1.0 for i in range(d)])
        x_prime = np.where(mask, signs * rng.uniform(0.1, 1.0, d), 0.0)
        choice = rng.integers(0, 3, d)
        shrink = np.where(choice == 0, 0.0, np.where(choice == 1, rng.uniform(0.0, 1.0, d), 1.0))
        if strict:
            j = int(rng.choice(np.nonzero(mask)[0]))
            shrink[j] = min(shrink[j], rng.uniform(0.0, 0.9))
        yield shrink * x_prime, x_prime


def _reverifies(n: BaseNorm, x: np.ndarray, x_prime: np.ndarray, strict: bool) -> bool:
    if np.any(np.abs(x) > np.abs(x_prime)) or np.any(x * x_prime < 0):
        return False
    if strict:
        if not np.any(np.abs(x) < np.abs(x_prime)):
            return False
        return n(x) >= n(x_prime) - MONOTONE_TOL
    return n(x) > n(x_prime) + MONOTONE_TOL


def reverify_counterexample(n: BaseNorm, report: MonotonicityReport) -> bool:
    """Reavaliar diretamente o contraexemplo de um veredito "fails" """
    if report.counterexample is None:
        return False
    x, x_prime = report.counterexample
    return _reverifies(n, x, x_prime, report.property == Property.OSM)


def _sampling_check(n: BaseNorm, prop: Property, samples: int, seed: int, dim: Optional[int]) -> MonotonicityReport:
    if samples <= 0:
        return MonotonicityReport(prop, Verdict.INCONCLUSIVE, 0, "sampling")
    strict = prop == Property.OSM
    d = _sampling_dim(n, dim)
    rng = np.random.default_rng(seed)
    for used, (x, x_prime) in enumerate(_sample_pairs(d, samples, rng, strict), start=1):
        if _reverifies(n, x, x_prime, strict):
            logger.info(f"{n.name}: contraexemplo {prop.value} na amostra {used}")
            return MonotonicityReport(prop, Verdict.FAILS, used, "sampling", (x, x_prime))
    logger.debug(f"{n.name}: nenhum contraexemplo {prop.value} em {samples} amostras")
    return MonotonicityReport(prop, Verdict.PASSES, samples, "sampling")


def _linf_witness(d: int) -> Tuple[np.ndarray, np.ndarray]:
    d = max(d, 2)
    x, x_prime = np.zeros(d), np.zeros(d)
    x[0], x_prime[0], x_prime[1] = 1.0, 1.0, 1.0
    return x, x_prime


def check_orthant_monotonic(n: BaseNorm, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                            dim: Optional[int] = None) -> MonotonicityReport:
    if isinstance(n, LpNorm):
        return MonotonicityReport(Property.OM, Verdict.PASSES, 0, "analytic")
    return _sampling_check(n, Property.OM, samples, seed, dim)


def check_orthant_strictly_monotonic(n: BaseNorm, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                                     dim: Optional[int] = None) -> MonotonicityReport:
    if isinstance(n, LpNorm):
        if n.p < INFINITY:
            return MonotonicityReport(Property.OSM, Verdict.PASSES, 0, "analytic")
        witness = _linf_witness(dim or 2)
        return MonotonicityReport(Property.OSM, Verdict.FAILS, 0, "analytic", witness)
    return _sampling_check(n, Property.OSM, samples, seed, dim)


def dual_as_norm(n: BaseNorm) -> BaseNorm:
    """Norma dual como objeto, caindo no dual por oráculo quando não há fórmula"""
    dual = n.dual_norm_object()
    if dual is not None:
        return dual
    return CustomNorm(name=f"dual({n.name})", evaluate=n.dual, dim=n.dim)


def verify_declared_flags(n: BaseNorm, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                          dim: Optional[int] = None) -> Dict:
    """Comparar as flags declaradas com os vereditos observados (norma e dual)

    result['verified'][flag] vale só se a flag foi declarada e não refutada.
    A norma não é alterada.
    """
    dual = dual_as_norm(n)
    dual_samples = samples if n.has_analytic_dual() else max(samples // 10, 1)
    observed = {
        'orthant_monotonic': check_orthant_monotonic(n, samples, seed, dim),
        'orthant_strictly_monotonic': check_orthant_strictly_monotonic(n, samples, seed, dim),
        'dual_orthant_strictly_monotonic': check_orthant_strictly_monotonic(dual, dual_samples, seed, dim),
    }
    result, verified = {}, {}
    for flag, report in observed.items():
        declared = bool(getattr(n, flag))
        verified[flag] = declared and report.passes
        result[flag] = {
            'declared': declared,
            'observed': report.verdict.value,
            'consistent': declared == report.passes,
            'report': report.to_dict(),
        }
        if declared and report.verdict == Verdict.FAILS:
            logger.warning(f"{n.name}: flag declarada {flag} refutada por contraexemplo")
    result['consistent'] = all(item['consistent'] for item in result.values())
    result['verified'] = verified
    return result


@lru_cache(maxsize=64)
def _sampled_osm_pair(n: BaseNorm, dim: Optional[int], samples: int, seed: int) -> bool:
    # memo por identidade da norma; a amostragem é determinística dada a semente
    verified = verify_declared_flags(n, samples, seed, dim)['verified']
    return verified['orthant_strictly_monotonic'] and verified['dual_orthant_strictly_monotonic']


def osm_pair_status(n: BaseNorm, dim: Optional[int] = None, samples: int = 2000, seed: int = 0) -> bool:
    """Norma e dual ambas OSM (analítico para ℓp; declarado e verificado nos demais)"""
    if isinstance(n, LpNorm):
        return 1 < n.p < INFINITY
    return _sampled_osm_pair(n, dim, samples, seed)


def require_osm_pair(n: BaseNorm, context: str, dim: Optional[int] = None) -> bool:
    """Avisar quando o par não é OSM: resultados passam a ser só desigualdades"""
    ok = osm_pair_status(n, dim)
    if not ok:
        logger.warning(f"{context}: par ({n.name}, dual) não é OSM; resultado vale apenas como desigualdade")
    return ok


def support_preserving_dual_pair(n: BaseNorm, u: np.ndarray) -> np.ndarray:
    """v com supp(v) = supp(u), u∘v ≥ 0 e ⟨u,v⟩ = ⦀u⦀·⦀v⦀⋆"""
    u = as_vector(u)
    n.check_dim(u)
    supp = support(u)
    if not supp:
        raise ArgumentError("Par dual exige u ≠ 0")
    v = n.dual_pair_direction(u)
    if v is None:
        _, v = maximize_linear_over_ball(n.dual, u, support=supp)
    v = restrict(np.asarray(v, dtype=float), supp)
    v[np.abs(v) <= ZERO_TOL] = 0.0

    if support(v) != supp:
        raise ConstructionError(f"{n.name}: par dual perdeu suporte ({support(v)} ≠ {supp}); norma não é OSM?")
    if np.any(u * v < -ZERO_TOL):
        raise ConstructionError(f"{n.name}: par dual fora do ortante de u")
    if not is_dual_pair(n, u, v, tol=1e-9):
        raise ConstructionError(f"{n.name}: igualdade de dualidade não verificada para o par construído")
    return v


@dataclass
class ChainReport:
    holds: bool
    l0: int
    profile: List[float]
    failing_index: Optional[int] = None
    failure: Optional[str] = None
    dual_osm_declared: bool = True

    def to_dict(self) -> Dict:
        return {
            'holds': self.holds,
            'l0': self.l0,
            'profile': self.profile,
            'failing_index': self.failing_index,
            'failure': self.failure,
            'dual_osm_declared': self.dual_osm_declared,
        }


def strict_chain_check(family, y: np.ndarray, strict_gap: float = 1e-12) -> ChainReport:
    """⊤_1(y) < … < ⊤_l(y) = … = ⊤_d(y) = ⦀y⦀⋆ com l = l0(y)"""
    y = as_vector(y)
    source = family.source
    if not source.dual_orthant_strictly_monotonic:
        logger.warning(f"{source.name}: dual não é OSM; a cadeia estrita pode falhar")
    level = l0(y)
    profile = family.top_k_profile(y)
    values = [float(v) for v in profile[1:]]
    report = ChainReport(True, level, values, dual_osm_declared=source.dual_orthant_strictly_monotonic)
    for j in range(1, level):
        if profile[j + 1] - profile[j] <= strict_gap:
            report.holds, report.failing_index, report.failure = False, j, "strict"
            return report
    top = source.dual(y)
    for j in range(max(level, 1), family.d + 1):
        if abs(profile[j] - top) > CHAIN_EQUAL_TOL * (1.0 + top):
            report.holds, report.failing_index, report.failure = False, j, "equality"
            return report
    return report


@dataclass
class SubspaceReport:
    holds: bool
    samples_used: int
    strict: bool
    violation: Optional[Dict] = field(default=None)

    def to_dict(self) -> Dict:
        return {'holds': self.holds, 'samples_used': self.samples_used,
                'strict': self.strict, 'violation': self.violation}


def coordinate_subspace_check(n: BaseNorm, samples: int = 1000, seed: int = 0,
                              dim: Optional[int] = None, strict: bool = False) -> SubspaceReport:
    """J ⊂ K ⇒ ⦀x_J⦀ ≤ ⦀x_K⦀ (estrito quando x_J ≠ x_K e strict=True)"""
    d = _sampling_dim(n, dim)
    rng = np.random.default_rng(seed)
    for s in range(1, samples + 1):
        x = rng.standard_normal(d)
        K = tuple(int(i) for i in np.nonzero(rng.random(d) < 0.7)[0])
        J = tuple(i for i in K if rng.random() < 0.5)
        xJ, xK = restrict(x, J), restrict(x, K)
        nJ, nK = n(xJ), n(xK)
        differs = J != K
        bad = nJ >= nK - MONOTONE_TOL if (strict and differs) else nJ > nK + MONOTONE_TOL
        if bad:
            return SubspaceReport(False, s, strict, {'x': x, 'J': list(J), 'K': list(K), 'norm_J': nJ, 'norm_K': nK})
    return SubspaceReport(True, samples, strict)
