"""
Factorization
Avaliação da função de fatoração convexa L0^φ por expressões variacionais,
coincidência na esfera, coincidência de subdiferenciais e a fórmula variacional exata de φ∘l0
"""

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from src.capra import PhiFunction, capra_conjugate, subdiff_membership
from src.knorms import KNormFamily, masked
from src.monotonicity import osm_pair_status, require_osm_pair, support_preserving_dual_pair
from src.normcore import l0, normalize, restrict
from src.utils import config
from src.utils.errors import ArgumentError, ConstructionError, ConvergenceError, InternalInconsistencyError
from src.utils.logger import get_logger
from src.vectors import as_vector, support, unit_vector

logger = get_logger("factorization")

FEASIBILITY_TOL = 1e-9
SPHERE_TOL = 1e-12
COINCIDENCE_TOL = 1e-6
MAX_SUBSET_SUPPORT = 10
MAX_ROUNDS = 200
ASCENT_STEPS = 500

Atom = Tuple[int, np.ndarray]


@dataclass
class Decomposition:
    """Partes z^(1..d) (parts[l−1] = z^(l)) e, nas formas de bola, pesos do simplex"""
    parts: List[np.ndarray]
    weights: Optional[np.ndarray] = None

    @classmethod
    def trivial(cls, x: np.ndarray, d: int) -> "Decomposition":
        parts = [np.zeros(d) for _ in range(d)]
        level = l0(x)
        if level > 0:
            parts[level - 1] = np.array(x, dtype=float)
        return cls(parts)

    def reconstruct(self) -> np.ndarray:
        return np.sum(self.parts, axis=0)

    def budget(self, family: KNormFamily) -> float:
        """Σ sn_l(z^(l))"""
        return sum(family.k_support_dual_norm(z, l) for l, z in enumerate(self.parts, start=1) if np.any(z))

    def cost(self, family: KNormFamily, phi: PhiFunction) -> float:
        """Σ φ(l)·sn_l(z^(l))"""
        return sum(phi(l) * family.k_support_dual_norm(z, l) for l, z in enumerate(self.parts, start=1) if np.any(z))

    def to_dict(self) -> Dict:
        return {
            'parts': {str(l): z for l, z in enumerate(self.parts, start=1) if np.any(z)},
            'weights': self.weights,
        }


@dataclass
class BracketedValue:
    lower: float
    upper: float
    witness: Optional[Decomposition] = None
    dual_witness: Optional[np.ndarray] = None
    path: str = ""
    rounds: int = 0

    @property
    def value(self) -> float:
        if math.isinf(self.upper):
            return self.upper
        return 0.5 * (self.lower + self.upper)

    @property
    def gap(self) -> float:
        if math.isinf(self.upper):
            return 0.0
        return self.upper - self.lower

    def to_dict(self) -> Dict:
        return {
            'value': self.value,
            'lower': self.lower,
            'upper': self.upper,
            'gap': self.gap,
            'path': self.path,
            'rounds': self.rounds,
            'witness': None if self.witness is None else self.witness.to_dict(),
            'dual_witness': self.dual_witness,
        }


def ray_lower_bound(profile: np.ndarray, phi: np.ndarray, pairing: float) -> Tuple[float, float]:
    """max_{λ≥0} λ⟨x,y⟩ − max_l [λ⊤_l(y) − φ(l)] avaliado nos pontos de quebra

    Função côncava e linear por partes em λ; devolve (valor, λ).
    """
    candidates = {0.0, 1.0}
    for l in range(len(profile)):
        for j in range(l):
            gap = profile[l] - profile[j]
            if gap != 0:
                lam = (phi[l] - phi[j]) / gap
                if lam > 0 and math.isfinite(lam):
                    candidates.add(float(lam))
    best, best_lam = -math.inf, 0.0
    for lam in sorted(candidates):
        value = lam * pairing - float(np.max(lam * profile - phi))
        if value > best:
            best, best_lam = value, lam
    return best, best_lam


class L0Solver:
    """Enquadramento de L0^φ(x) para ⦀x⦀ ≤ 1

    Superior: LP mestre sobre átomos Π_K(B) rotulados pelo nível |K| (cada átomo tem
    sn_l ≤ 1), min Σ φ(l)c s.a. Σ c·a = x, Σ c ≤ 1. Inferior: duais do LP e seus
    raios, ⟨x,λy⟩ − g(λy) com g o conjugado Capra exato. Precificação por nível
    com os suportes maximizantes de ⊤_l.
    """

    def __init__(self, family: KNormFamily, phi: PhiFunction,
                 gap_tol: Optional[float] = None,
                 max_rounds: int = MAX_ROUNDS,
                 ascent_steps: int = ASCENT_STEPS):
        self.family = family
        self.phi = phi
        self.phi_values = phi.as_array()
        self.gap_tol = gap_tol if gap_tol is not None else config.gap_tolerance()
        self.max_rounds = max_rounds
        self.ascent_steps = ascent_steps
        self.logger = get_logger("factorization.solver")

    # ------------------------------------------------------------------
    # átomos

    def _initial_atoms(self, x: np.ndarray) -> List[Atom]:
        d = self.family.d
        source = self.family.source
        unit = normalize(source, x)
        supp = support(x)
        atoms: List[Atom] = [(len(supp), unit), (d, unit)]
        if len(supp) <= MAX_SUBSET_SUPPORT:
            subsets = itertools.chain.from_iterable(
                itertools.combinations(supp, size) for size in range(1, len(supp))
            )
        else:
            order = sorted(supp, key=lambda i: -abs(x[i]))
            subsets = (tuple(order[:size]) for size in range(1, len(supp)))
        for K in subsets:
            atoms.append((len(K), normalize(source, restrict(x, K))))
        for i in range(d):
            e = unit_vector(d, i)
            e = e / source(e)
            atoms.append((1, e))
            atoms.append((1, -e))
        return atoms

    def _price(self, y: np.ndarray, mu: float) -> List[Atom]:
        """Átomos com custo reduzido φ(l) + μ − ⟨a,y⟩ negativo"""
        profile, supports = self.family.top_k_profile_with_supports(y)
        found = []
        for l in range(1, self.family.d + 1):
            if profile[l] - self.phi_values[l] > mu + 1e-12 * (1.0 + abs(mu)):
                K = supports[l]
                xstar = self.family.source.dual_maximizer(masked(y, K))
                found.append((l, masked(xstar, K)))
        return found

    # ------------------------------------------------------------------
    # limites inferiores

    def dual_value(self, x: np.ndarray, y: np.ndarray) -> Tuple[float, np.ndarray]:
        profile = self.family.top_k_profile(y)
        value, lam = ray_lower_bound(profile, self.phi_values, float(np.dot(x, y)))
        return value, lam * y

    def _ascent(self, x: np.ndarray, y: np.ndarray, steps: int) -> Tuple[float, np.ndarray]:
        """Passos de supergradiente em y ↦ ⟨x,y⟩ − g(y), passo c/√t"""
        best, best_y = self.dual_value(x, y)
        scale = max(1.0, float(np.linalg.norm(y)))
        for t in range(1, steps + 1):
            profile, supports = self.family.top_k_profile_with_supports(y)
            level = int(np.argmax(profile - self.phi_values))
            grad = np.array(x, dtype=float)
            if level > 0:
                K = supports[level]
                grad -= masked(self.family.source.dual_maximizer(masked(y, K)), K)
            length = float(np.linalg.norm(grad))
            if length <= 1e-15:
                break
            y = y + (scale / math.sqrt(t)) * grad / length
            value, candidate = self.dual_value(x, y)
            if value > best:
                best, best_y = value, candidate
        return best, best_y

    def _seed_duals(self, x: np.ndarray) -> List[np.ndarray]:
        seeds = [np.sign(x).astype(float), np.array(x, dtype=float)]
        try:
            seeds.append(support_preserving_dual_pair(self.family.source, x))
        except ConstructionError:
            self.logger.debug("Sem par dual com suporte preservado; sementes reduzidas")
        return seeds

    # ------------------------------------------------------------------

    def solve(self, x: np.ndarray, raise_on_gap: bool = True) -> BracketedValue:
        d = self.family.d
        # sn_{l0(x)}(x) = ⦀x⦀ só sob monotonicidade; sn_d = ⦀·⦀ sempre
        level = l0(x) if self.family.source.orthant_monotonic else d
        best_upper = self.family.source(x) * self.phi(level)
        best_witness = Decomposition([np.array(x, dtype=float) if l == level else np.zeros(d)
                                      for l in range(1, d + 1)])
        best_lower, best_dual = 0.0, np.zeros(d)
        for y in self._seed_duals(x):
            value, candidate = self.dual_value(x, y)
            if value > best_lower:
                best_lower, best_dual = value, candidate

        atoms = self._initial_atoms(x)
        keys = {(l, tuple(np.round(a, 12))) for l, a in atoms}
        rounds = 0
        y = best_dual
        for rounds in range(1, self.max_rounds + 1):
            upper, witness, y, mu = self._master(x, atoms)
            if upper < best_upper:
                best_upper, best_witness = upper, witness
            value, candidate = self.dual_value(x, y)
            if value > best_lower:
                best_lower, best_dual = value, candidate
            if self._closed(best_lower, best_upper):
                break
            added = 0
            for l, atom in self._price(y, mu):
                key = (l, tuple(np.round(atom, 12)))
                if key not in keys:
                    keys.add(key)
                    atoms.append((l, atom))
                    added += 1
            if added == 0:
                break

        if not self._closed(best_lower, best_upper) and self.ascent_steps > 0:
            start = y if np.any(y) else best_dual
            value, candidate = self._ascent(x, start, self.ascent_steps)
            if value > best_lower:
                best_lower, best_dual = value, candidate

        best_lower = min(best_lower, best_upper)
        result = BracketedValue(best_lower, best_upper, best_witness, best_dual,
                                path="column-generation", rounds=rounds)
        if not self._closed(best_lower, best_upper):
            if raise_on_gap:
                raise ConvergenceError("L0^φ não convergiu", best_lower, best_upper, witness=result)
            self.logger.warning(f"L0^φ apenas enquadrado: [{best_lower:.9g}, {best_upper:.9g}]")
        self.logger.debug(f"L0^φ em {rounds} rodadas, {len(atoms)} átomos, gap {best_upper - best_lower:.3e}")
        return result

    def _closed(self, lower: float, upper: float) -> bool:
        return upper - lower <= self.gap_tol * max(1.0, upper)

    def _master(self, x: np.ndarray, atoms: Sequence[Atom]):
        d = self.family.d
        A = np.column_stack([a for _, a in atoms])
        cost = np.array([self.phi(l) for l, _ in atoms])
        res = linprog(cost, A_ub=np.ones((1, len(atoms))), b_ub=[1.0], A_eq=A, b_eq=x,
                      bounds=(0, None), method="highs")
        if res.status != 0:
            raise ConvergenceError(f"LP mestre de L0^φ falhou: {res.message}", 0.0, math.inf)
        coeffs = np.clip(res.x, 0.0, None)
        parts = [np.zeros(d) for _ in range(d)]
        for (l, atom), c in zip(atoms, coeffs):
            if c > 0:
                parts[l - 1] += c * atom
        resid = x - np.sum(parts, axis=0)
        parts[d - 1] += resid
        upper = float(np.dot(cost, coeffs)) + self.phi(d) * self.family.source(resid)
        y = np.asarray(res.eqlin.marginals, dtype=float)
        mu = max(0.0, -float(res.ineqlin.marginals[0]))
        return upper, Decomposition(parts), y, mu


def eval_L0(family: KNormFamily, phi: PhiFunction, x: np.ndarray, shortcut: bool = True,
            gap_tol: Optional[float] = None, raise_on_gap: bool = True) -> BracketedValue:
    """L0^φ(x) enquadrado; +∞ fora da bola unitária"""
    x = as_vector(x)
    family.source.check_dim(x)
    if x.shape[0] != family.d:
        raise ArgumentError(f"x de dimensão {x.shape[0]} na família de dimensão {family.d}")
    phi.check_dim(family.d)
    phi.check_factorization()
    d = family.d
    length = family.source(x)
    if length > 1.0 + FEASIBILITY_TOL:
        return BracketedValue(math.inf, math.inf, path="infeasible")
    if l0(x) == 0:
        return BracketedValue(0.0, 0.0, Decomposition.trivial(x, d), np.zeros(d), path="zero")
    if not family.source.orthant_monotonic:
        logger.warning(f"{family.source.name} não é monotônica por ortantes: L0^φ apenas enquadrado")
        raise_on_gap = False

    if shortcut and abs(length - 1.0) <= SPHERE_TOL and osm_pair_status(family.source, d):
        target = phi(l0(x))
        try:
            y = support_preserving_dual_pair(family.source, x)
        except ConstructionError:
            y = None
        if y is not None:
            solver = L0Solver(family, phi, gap_tol)
            lower, dual = solver.dual_value(x, y)
            return BracketedValue(min(lower, target), target, Decomposition.trivial(x, d), dual, path="sphere")

    return L0Solver(family, phi, gap_tol).solve(x, raise_on_gap=raise_on_gap)


@dataclass
class VariationalResult:
    value: float
    witness: Decomposition
    solver: BracketedValue
    improvement: float

    def to_dict(self) -> Dict:
        return {
            'value': self.value,
            'witness': self.witness.to_dict(),
            'solver': self.solver.to_dict(),
            'improvement': self.improvement,
        }


def variational_phi_l0(family: KNormFamily, phi: PhiFunction, x: np.ndarray) -> VariationalResult:
    """φ(l0(x)) = (1/⦀x⦀)·min Σ φ(l)sn_l(z^(l)) s.a. Σ sn_l(z^(l)) ≤ ⦀x⦀, Σ z^(l) = x

    O mínimo é atingido na decomposição trivial z^(l0(x)) = x; o solver confirma.
    """
    x = as_vector(x)
    if l0(x) == 0:
        raise ArgumentError("Fórmula variacional exige x ≠ 0")
    require_osm_pair(family.source, "variational_phi_l0", family.d)
    value = phi(l0(x))
    solver = eval_L0(family, phi, normalize(family.source, x), shortcut=False)
    improvement = value - solver.upper
    if solver.upper < value - COINCIDENCE_TOL:
        raise InternalInconsistencyError(
            f"Solver encontrou {solver.upper:.12g} < φ(l0(x)) = {value:.12g}: bug ou declaração OSM quebrada"
        )
    return VariationalResult(value, Decomposition.trivial(x, family.d), solver, max(improvement, 0.0))


def random_sphere_point(family: KNormFamily, rng: np.random.Generator, sparsity: Optional[int] = None) -> np.ndarray:
    """Ponto aleatório da esfera unitária com suporte aleatório"""
    d = family.d
    size = sparsity or int(rng.integers(1, d + 1))
    K = rng.choice(d, size=size, replace=False)
    x = np.zeros(d)
    x[K] = rng.standard_normal(size)
    x[K] = np.where(np.abs(x[K]) < 1e-3, 1e-3, x[K])
    return x / family.source(x)


@dataclass
class SphereReport:
    holds: bool
    samples: int
    max_residual: float
    worst_point: Optional[np.ndarray] = None

    def to_dict(self) -> Dict:
        return {'holds': self.holds, 'samples': self.samples,
                'max_residual': self.max_residual, 'worst_point': self.worst_point}


def sphere_coincidence_check(family: KNormFamily, phi: PhiFunction, samples: int = 200, seed: int = 0,
                             shortcut: bool = False, tol: float = COINCIDENCE_TOL) -> SphereReport:
    """|L0^φ(s) − φ(l0(s))| ≤ tol em pontos aleatórios da esfera"""
    require_osm_pair(family.source, "sphere_coincidence_check", family.d)
    rng = np.random.default_rng(seed)
    worst, worst_point = 0.0, None
    for _ in range(samples):
        s = random_sphere_point(family, rng)
        result = eval_L0(family, phi, s, shortcut=shortcut)
        residual = max(abs(result.upper - phi(l0(s))), abs(result.lower - phi(l0(s))))
        if residual > worst or worst_point is None:
            worst, worst_point = residual, s
    holds = worst <= tol
    if not holds:
        logger.warning(f"Coincidência na esfera violada: resíduo {worst:.3e}")
    return SphereReport(holds, samples, worst, worst_point)


@dataclass
class CoincidenceReport:
    agree: bool
    member: bool
    inequality_holds: bool
    min_slack: float
    violating_probe: Optional[np.ndarray] = None
    probes: int = 0

    def to_dict(self) -> Dict:
        return {
            'agree': self.agree,
            'member': self.member,
            'inequality_holds': self.inequality_holds,
            'min_slack': self.min_slack,
            'violating_probe': self.violating_probe,
            'probes': self.probes,
        }


def _probe_panel(family: KNormFamily, s: np.ndarray, random_probes: int, seed: int) -> List[np.ndarray]:
    d = family.d
    source = family.source
    panel = [np.zeros(d), np.array(s, dtype=float)]
    for i in range(d):
        e = unit_vector(d, i) / source(unit_vector(d, i))
        panel.extend([e, -e])
    supp = support(s)
    for size in range(1, len(supp)):
        for K in itertools.combinations(supp, size):
            panel.append(normalize(source, restrict(s, K)))
    rng = np.random.default_rng(seed)
    panel.extend(random_sphere_point(family, rng) for _ in range(random_probes))
    return panel


def _interior_panel(family: KNormFamily, s: np.ndarray, interior_points: int, seed: int) -> List[np.ndarray]:
    rng = np.random.default_rng(seed + 1)
    panel = [0.5 * np.array(s, dtype=float)]
    panel.extend(rng.uniform(0.1, 0.9) * random_sphere_point(family, rng) for _ in range(interior_points))
    return panel


def rm_subdiff_coincidence_check(family: KNormFamily, phi: PhiFunction, s: np.ndarray, y: np.ndarray,
                                 random_probes: int = 50, seed: int = 0, tol: float = COINCIDENCE_TOL,
                                 interior_points: int = 10) -> CoincidenceReport:
    """Pertinência Capra em s versus desigualdade do subgradiente de L0^φ amostrada

    L0^φ(x′) ≥ L0^φ(s) + ⟨y, x′ − s⟩ − tol no painel {0} ∪ pontos da esfera
    ∪ pontos interiores da bola (avaliados pelo limite superior de eval_L0).
    """
    s, y = as_vector(s), as_vector(y)
    phi.check_dim(family.d)
    phi.check_factorization()
    if abs(family.source(s) - 1.0) > FEASIBILITY_TOL:
        raise ArgumentError("rm_subdiff_coincidence_check exige s na esfera unitária")
    exact = require_osm_pair(family.source, "rm_subdiff_coincidence_check", family.d)

    def value(p: np.ndarray, on_sphere: bool) -> float:
        if exact and on_sphere:
            return float(phi(l0(p)))
        return eval_L0(family, phi, p, shortcut=False, raise_on_gap=False).upper

    member = subdiff_membership(family, phi, s, y).member
    base = value(s, True)
    min_slack, violating = math.inf, None
    sphere = _probe_panel(family, s, random_probes, seed)
    interior = _interior_panel(family, s, interior_points, seed)
    for p, on_sphere in [(p, True) for p in sphere] + [(p, False) for p in interior]:
        slack = value(p, on_sphere) - base - float(np.dot(y, p - s))
        if slack < min_slack:
            min_slack, violating = slack, p
    holds = min_slack >= -tol
    return CoincidenceReport(member == holds, member, holds, float(min_slack),
                             None if holds else violating, len(sphere) + len(interior))


@dataclass
class SweepRow:
    t: float
    lower: float
    upper: float
    phi_l0: float

    def to_dict(self) -> Dict:
        return {'t': self.t, 'lower': self.lower, 'upper': self.upper, 'phi_l0': self.phi_l0}


def sweep_segment(family: KNormFamily, phi: PhiFunction, x0: np.ndarray, direction: np.ndarray,
                  t_values: Sequence[float], shortcut: bool = True) -> List[SweepRow]:
    """L0^φ ao longo de x0 + t·v (linhas para plotagem externa)"""
    x0, direction = as_vector(x0), as_vector(direction)
    rows = []
    for t in t_values:
        x = x0 + float(t) * direction
        result = eval_L0(family, phi, x, shortcut=shortcut, raise_on_gap=False)
        rows.append(SweepRow(float(t), result.lower, result.upper, float(phi(l0(x)))))
    return rows


def conjugate_lower_bound(family: KNormFamily, phi: PhiFunction, x: np.ndarray, y: np.ndarray) -> float:
    """⟨x,y⟩ − (φ∘l0)^c(y): limite inferior de L0^φ(x) por dualidade fraca"""
    x, y = as_vector(x), as_vector(y)
    return float(np.dot(x, y)) - capra_conjugate(family, phi, y).value


__all__ = [
    "Decomposition", "BracketedValue", "L0Solver", "eval_L0", "variational_phi_l0",
    "sphere_coincidence_check", "rm_subdiff_coincidence_check", "sweep_segment",
    "conjugate_lower_bound", "ray_lower_bound", "random_sphere_point",
]
