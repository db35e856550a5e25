"""
Suite Manager
Gerenciador que coordena as verificações de aceitação (propriedades em escala de mesa)
"""

import itertools
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from sources.base_norm import BaseNorm
from sources.custom_norm import weighted_lp_norm
from sources.lp_norm import INFINITY, LpNorm
from src.capra import PhiFunction, capra_biconjugate, discover_members, subdiff_at_zero_membership, \
    subdiff_convexity_probe, subdiff_membership, subgradient_construct
from src.factorization import eval_L0, sphere_coincidence_check, variational_phi_l0
from src.knorms import KNormFamily
from src.monotonicity import check_orthant_strictly_monotonic, osm_pair_status, reverify_counterexample, \
    strict_chain_check, verify_declared_flags
from src.normcore import l0, parse_source
from src.oracle import Grid, gauge_atoms_oracle, l0phi_grid_oracle
from src.report_writer import ReportWriter
from src.sparseopt import instance_from_dict, random_instance, solve_min_phi_l0
from src.utils.errors import CapraError
from src.utils.logger import get_logger

TABLE_TOL = 1e-9
GENERIC_TOL = 1e-6
VALUE_TOL = 1e-6
CERTIFICATE_TOL = 1e-8
GRID_LOWER_SLACK = 2e-3
GAUGE_TOL = 1e-5

CheckResult = Dict


class VerificationManager:
    """Executa a suíte de aceitação para uma norma-fonte, dimensão e semente"""

    def __init__(self, source_spec: str, dim: int, seed: int = 0, quick: bool = False,
                 writer: Optional[ReportWriter] = None):
        self.logger = get_logger("suite_manager")
        self.source_spec = source_spec
        self.source: BaseNorm = parse_source(source_spec)
        self.dim = dim
        self.seed = seed
        self.quick = quick
        self.writer = writer or ReportWriter()
        self.family = KNormFamily(self.source, dim)
        self.osm_pair = osm_pair_status(self.source, dim, samples=500 if quick else 2000, seed=seed)
        self.phis = [PhiFunction.identity(dim), PhiFunction.squares(dim)]

        self.checks: List[Tuple[str, Callable[[], CheckResult], bool]] = [
            ("table_identities", self.check_table_identities, False),
            ("capra_convexity", self.check_capra_convexity, True),
            ("sphere_coincidence", self.check_sphere_coincidence, True),
            ("subdiff_nonempty", self.check_subdiff_nonempty, True),
            ("subdiff_convexity", self.check_subdiff_convexity, True),
            ("strict_chain", self.check_strict_chain, False),
            ("monotonicity_classification", self.check_monotonicity, False),
            ("variational_argmin", self.check_variational_argmin, True),
            ("oracle_consistency", self.check_oracle_consistency, False),
            ("reformulation_equivalence", self.check_reformulation, True),
        ]

    def _size(self, full: int, quick: int) -> int:
        return quick if self.quick else full

    def _rng(self, index: int) -> np.random.Generator:
        # fluxo independente por verificação: resultados não dependem da ordem
        return np.random.default_rng([self.seed, index])

    def _random_x(self, rng: np.random.Generator, d: Optional[int] = None) -> np.ndarray:
        d = d or self.dim
        size = int(rng.integers(1, d + 1))
        x = np.zeros(d)
        K = rng.choice(d, size=size, replace=False)
        x[K] = rng.standard_normal(size) * rng.uniform(0.2, 3.0)
        x[K] = np.where(np.abs(x[K]) < 1e-3, 1e-3, x[K])
        return x

    def run_all(self) -> Dict:
        """Executar todas as verificações; falhas viram conteúdo do relatório"""
        self.logger.info(f"Iniciando suíte: {self.source.name}, d={self.dim}, seed={self.seed}, quick={self.quick}")
        results = []
        for index, (name, check, needs_osm_pair) in enumerate(self.checks, start=1):
            if needs_osm_pair and not self.osm_pair:
                self.logger.warning(f"{name}: ignorada (par norma/dual não é OSM)")
                results.append({'id': index, 'name': name, 'status': 'skipped',
                                'details': {'reason': 'source/dual pair is not orthant-strictly monotonic'}})
                continue
            try:
                self.logger.info(f"Executando verificação {index}: {name}")
                details = check()
                status = 'passed' if details.pop('passed') else 'failed'
            except CapraError as e:
                self.logger.error(f"Erro na verificação {name}: {e}")
                details, status = {'error': str(e)}, 'failed'
            if status == 'failed':
                self.logger.warning(f"{name}: FALHOU")
            results.append({'id': index, 'name': name, 'status': status, 'details': details})

        passed = all(r['status'] != 'failed' for r in results)
        self.logger.info(f"Suíte concluída: {'OK' if passed else 'com falhas'}")
        return {
            'source': self.source.describe(),
            'source_spec': self.source_spec,
            'dim': self.dim,
            'seed': self.seed,
            'quick': self.quick,
            'osm_pair': self.osm_pair,
            'passed': passed,
            'checks': results,
        }

    def save_report(self, report: Dict):
        safe_name = self.source_spec.replace(':', '_').replace(',', '-').replace('/', '_')
        return self.writer.save_json(report, f"verify_{safe_name}_{self.seed}.json")

    # ------------------------------------------------------------------
    # 1. identidades da tabela de normas ℓ1 / ℓ∞ / k = 1

    def check_table_identities(self) -> CheckResult:
        rng = self._rng(1)
        samples = self._size(500, 40)
        worst = 0.0
        for d in (3, 4, 5):
            l1 = KNormFamily(LpNorm(1.0), d)
            linf = KNormFamily(LpNorm(INFINITY), d)
            lp = KNormFamily(LpNorm(2.0), d)
            for _ in range(samples):
                v = rng.standard_normal(d)
                a = np.sort(np.abs(v))[::-1]
                for k in range(1, d + 1):
                    worst = max(
                        worst,
                        abs(l1.top_k_dual_norm(v, k) - a[0]),
                        abs(l1.k_support_dual_norm(v, k) - a.sum()),
                        abs(linf.top_k_dual_norm(v, k) - a[:k].sum()),
                        abs(linf.k_support_dual_norm(v, k) - max(a.sum() / k, a[0])),
                    )
                worst = max(worst, abs(lp.k_support_dual_norm(v, 1) - a.sum()))

        # caminho genérico: ℓ∞ com pesos unitários não usa as fórmulas
        generic_worst = 0.0
        d = 4
        generic = KNormFamily(weighted_lp_norm(INFINITY, np.ones(d)), d)
        for _ in range(self._size(20, 3)):
            v = rng.standard_normal(d)
            a = np.sort(np.abs(v))[::-1]
            for k in range(1, d + 1):
                generic_worst = max(
                    generic_worst,
                    abs(generic.top_k_dual_norm(v, k) - a[:k].sum()),
                    abs(generic.k_support_dual_norm(v, k) - max(a.sum() / k, a[0])),
                )
        return {
            'passed': worst <= TABLE_TOL and generic_worst <= GENERIC_TOL,
            'analytic_max_residual': worst,
            'generic_max_residual': generic_worst,
            'samples': samples,
        }

    # ------------------------------------------------------------------
    # 2. biconjugado = φ∘l0

    def check_capra_convexity(self) -> CheckResult:
        rng = self._rng(2)
        samples = self._size(100, 8)
        worst, worst_lower, count = 0.0, 0.0, 0
        for phi in self.phis:
            for _ in range(samples):
                x = self._random_x(rng)
                target = phi(l0(x))
                bi = capra_biconjugate(self.family, phi, x)
                worst = max(worst, abs(bi.upper - target))
                worst_lower = max(worst_lower, target - bi.lower)
                count += 1
        return {
            'passed': worst <= VALUE_TOL and worst_lower <= VALUE_TOL,
            'max_residual': worst,
            'max_lower_deficit': worst_lower,
            'samples': count,
        }

    # ------------------------------------------------------------------
    # 3. coincidência na esfera, sem atalho

    def check_sphere_coincidence(self) -> CheckResult:
        samples = self._size(200, 6)
        reports = [sphere_coincidence_check(self.family, phi, samples, self.seed + i, shortcut=False)
                   for i, phi in enumerate(self.phis)]
        return {
            'passed': all(r.holds for r in reports),
            'max_residual': max(r.max_residual for r in reports),
            'samples': samples * len(reports),
        }

    # ------------------------------------------------------------------
    # 4. subdiferencial não vazio

    def check_subdiff_nonempty(self) -> CheckResult:
        rng = self._rng(4)
        samples = self._size(100, 8)
        failures = []
        for phi in self.phis:
            for _ in range(samples):
                x = self._random_x(rng)
                try:
                    cert = subgradient_construct(self.family, phi, x)
                    ok = subdiff_membership(self.family, phi, x, cert.y, tol=CERTIFICATE_TOL).member
                except CapraError as e:
                    ok = False
                    self.logger.debug(f"Certificado falhou: {e}")
                if not ok:
                    failures.append(x)
        zero_ok = all(subdiff_at_zero_membership(self.family, phi, np.zeros(self.dim)) for phi in self.phis)
        return {
            'passed': not failures and zero_ok,
            'failures': failures[:5],
            'zero_member': zero_ok,
            'samples': samples * len(self.phis),
        }

    # ------------------------------------------------------------------
    # 5. convexidade do subdiferencial

    def check_subdiff_convexity(self) -> CheckResult:
        rng = self._rng(5)
        pairs_wanted = self._size(50, 6)
        pairs, failures = 0, []
        attempt = 0
        while pairs < pairs_wanted and attempt < 10 * pairs_wanted:
            attempt += 1
            phi = self.phis[attempt % len(self.phis)]
            x = self._random_x(rng)
            members = discover_members(self.family, phi, x, seed=int(rng.integers(2 ** 31)))
            for y1, y2 in itertools.combinations(members, 2):
                if pairs >= pairs_wanted:
                    break
                pairs += 1
                for t in (0.25, 0.5, 0.75):
                    if not subdiff_convexity_probe(self.family, phi, x, y1, y2, t):
                        failures.append({'x': x, 'y1': y1, 'y2': y2, 't': t})
        return {'passed': not failures and pairs >= pairs_wanted, 'pairs': pairs, 'failures': failures[:5]}

    # ------------------------------------------------------------------
    # 6. cadeia estrita dos ⊤_k

    def check_strict_chain(self) -> CheckResult:
        rng = self._rng(6)
        samples = self._size(200, 20)
        d = self.dim
        l2 = KNormFamily(LpNorm(2.0), d)
        failures = []
        for s in range(samples):
            level = 1 + s % d
            y = np.zeros(d)
            K = rng.choice(d, size=level, replace=False)
            y[K] = rng.standard_normal(level)
            y[K] = np.where(np.abs(y[K]) < 1e-3, 1e-3, y[K])
            report = strict_chain_check(l2, y, strict_gap=1e-10)
            if not report.holds:
                failures.append(report)

        # dual ℓ∞ não é OSM: empates quebram a estrita monotonicidade
        l1 = KNormFamily(LpNorm(1.0), d)
        tied = np.zeros(d)
        tied[:min(2, d)] = 5.0
        negatives = [strict_chain_check(l1, tied)]
        negatives += [strict_chain_check(l1, rng.standard_normal(d)) for _ in range(self._size(20, 3))]
        exhibited = any(not r.holds for r in negatives)
        return {
            'passed': not failures and (exhibited or d == 1),
            'l2_failures': failures[:5],
            'l1_strictness_fails_somewhere': exhibited,
            'samples': samples,
        }

    # ------------------------------------------------------------------
    # 7. classificação de monotonicidade

    def check_monotonicity(self) -> CheckResult:
        classified = {}
        ok = True
        for p in (1.0, 1.5, 2.0, 3.0):
            report = check_orthant_strictly_monotonic(LpNorm(p), seed=self.seed)
            classified[f"lp:{p:g}"] = report.verdict.value
            ok = ok and report.passes
        linf = LpNorm(INFINITY)
        report = check_orthant_strictly_monotonic(linf, seed=self.seed, dim=2)
        classified["lp:inf"] = report.verdict.value
        witness_ok = (not report.passes) and reverify_counterexample(linf, report)
        declared = verify_declared_flags(self.source, samples=self._size(10_000, 500), seed=self.seed, dim=self.dim)
        return {
            'passed': ok and witness_ok and declared['consistent'],
            'classified': classified,
            'linf_witness': report.counterexample,
            'linf_witness_reverifies': witness_ok,
            'declared_flags': declared,
        }

    # ------------------------------------------------------------------
    # 8. argmin trivial da fórmula variacional

    def check_variational_argmin(self) -> CheckResult:
        rng = self._rng(8)
        samples = self._size(100, 6)
        worst_value, worst_improvement = 0.0, 0.0
        for s in range(samples):
            phi = self.phis[s % len(self.phis)]
            x = self._random_x(rng)
            result = variational_phi_l0(self.family, phi, x)
            worst_value = max(worst_value, abs(result.value - phi(l0(x))), abs(result.solver.upper - phi(l0(x))))
            worst_improvement = max(worst_improvement, result.improvement)
        return {
            'passed': worst_value <= VALUE_TOL and worst_improvement <= 1e-9,
            'max_value_residual': worst_value,
            'max_improvement': worst_improvement,
            'samples': samples,
        }

    # ------------------------------------------------------------------
    # 9. oráculos

    def check_oracle_consistency(self) -> CheckResult:
        if not self.source.has_analytic_dual():
            self.logger.warning(f"{self.source.name}: dual só por oráculo; grades densas ignoradas")
            return {'passed': True, 'skipped': 'dual norm only available through the ball oracle'}
        rng = self._rng(9)
        grid_failures, grid_points = [], 0
        d = min(self.dim, 3)
        family = self._family_at(d)
        if family is not None:
            phi = PhiFunction.identity(d)
            grid = Grid(dim=d, resolution=self._size(201 if d <= 2 else 61, 61 if d <= 2 else 21))
            for _ in range(self._size(50, 3)):
                u = rng.standard_normal(d)
                # pontos interiores com ‖x‖₁ ≤ 0.9
                radius = rng.uniform(0.0, 1.0) * min(1.0 / self.source(u), 0.9 / np.abs(u).sum())
                x = radius * u
                bracket = eval_L0(family, phi, x, raise_on_gap=False)
                value = l0phi_grid_oracle(family, phi, x, grid)
                grid_points += 1
                if not bracket.lower - GRID_LOWER_SLACK <= value <= bracket.upper + 1e-9:
                    grid_failures.append({'x': x, 'grid': value, 'lower': bracket.lower, 'upper': bracket.upper})

        gauge_failures, gauge_evaluations, unconverged = [], 0, 0
        dg = min(self.dim, 5)
        gauge_family = self._family_at(dg)
        if gauge_family is not None:
            for _ in range(self._size(10, 2)):
                x = rng.standard_normal(dg)
                for k in range(1, dg + 1):
                    oracle = gauge_atoms_oracle(gauge_family, x, k)
                    if not oracle.converged or math.isnan(oracle.value):
                        unconverged += 1
                        continue
                    gauge_evaluations += 1
                    value = gauge_family.k_support_dual_norm(x, k)
                    if abs(oracle.value - value) > GAUGE_TOL * max(1.0, value):
                        gauge_failures.append({'x': x, 'k': k, 'oracle': oracle.value, 'value': value})
        return {
            'passed': not grid_failures and not gauge_failures,
            'grid_points': grid_points,
            'grid_failures': grid_failures[:5],
            'gauge_evaluations': gauge_evaluations,
            'gauge_failures': gauge_failures[:5],
            'gauge_unconverged': unconverged,
        }

    def _family_at(self, d: int) -> Optional[KNormFamily]:
        """Família na dimensão reduzida d (None se a fonte só existe em outra dimensão)"""
        if d == self.dim:
            return self.family
        if self.source.dim is not None:
            return None
        return KNormFamily(self.source, d)

    # ------------------------------------------------------------------
    # 10. equivalência da reformulação

    def check_reformulation(self) -> CheckResult:
        rng = self._rng(10)
        d = self.dim if self.source.dim is not None else max(2, min(self.dim, 4))
        samples = self._size(20, 3)
        failures = []
        for _ in range(samples):
            data = random_instance(d, rng, source=self.source_spec)
            instance = instance_from_dict(data)
            try:
                report = solve_min_phi_l0(instance.family, instance.phi, instance.feasible)
                scaled = solve_min_phi_l0(instance.family, instance.phi, instance.feasible.scaled(2.0))
                if abs(report.value - scaled.value) > VALUE_TOL:
                    failures.append({'instance': data, 'reason': 'scale'})
            except CapraError as e:
                failures.append({'instance': data, 'reason': str(e)})
        return {'passed': not failures, 'instances': samples, 'failures': failures[:5]}
