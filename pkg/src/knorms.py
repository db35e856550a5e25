"""
K-Norms
Normas duais top-k generalizadas (⊤_k), normas duais k-support generalizadas (sn_k)
e normas duais coordenada-k
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from sources.base_norm import BaseNorm
from sources.lp_norm import INFINITY, LpNorm
from src.normcore import l0
from src.utils import config
from src.utils.errors import ArgumentError, ConvergenceError, UnsupportedError
from src.utils.logger import get_logger
from src.vectors import IndexSet

# C(12,6) = 924 suportes no pior tamanho
ENUM_DIM_CAP = 12
NESTING_TOL = 1e-9

Block = Tuple[float, np.ndarray]


def masked(v: np.ndarray, K: IndexSet) -> np.ndarray:
    out = np.zeros(v.shape[0])
    idx = list(K)
    out[idx] = v[idx]
    return out


@dataclass
class KSupportValue:
    """Valor enquadrado de sn_k(x) com certificados primal (blocos) e dual"""
    value: float
    lower: float
    upper: float
    path: str
    blocks: List[Block] = field(default_factory=list)
    dual_witness: Optional[np.ndarray] = None

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> Dict:
        return {
            'value': self.value,
            'lower': self.lower,
            'upper': self.upper,
            'path': self.path,
            'blocks': [{'weight': w, 'atom': a} for w, a in self.blocks],
            'dual_witness': self.dual_witness,
        }


@dataclass
class NestingReport:
    holds: bool
    samples_used: int
    violation: Optional[Dict] = None

    def to_dict(self) -> Dict:
        return {'holds': self.holds, 'samples_used': self.samples_used, 'violation': self.violation}


def hypersimplex_split(w: np.ndarray, size: int) -> List[Tuple[float, np.ndarray]]:
    """Decompor w ∈ [0,1]^n com Σw = size em vértices 1_S, |S| = size

    Amostragem sistemática: S(u) = {i : existe m inteiro com C_{i−1} ≤ u+m < C_i}.
    """
    c = np.concatenate(([0.0], np.cumsum(w)))
    cuts = np.unique(np.concatenate(([0.0, 1.0], np.mod(c, 1.0))))
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 1e-15:
            continue
        u = 0.5 * (lo + hi)
        chosen = np.nonzero(np.ceil(c[1:] - u) - np.ceil(c[:-1] - u) > 0.5)[0]
        if chosen.size != size:
            continue
        pieces.append((float(hi - lo), chosen))
    return pieces


class KNormFamily:
    """Famílias ⊤_k / sn_k / coordenada-k geradas por uma norma-fonte em R^d"""

    def __init__(self, source: BaseNorm, d: int,
                 gap_tol: Optional[float] = None,
                 max_rounds: Optional[int] = None):
        if d < 1:
            raise ArgumentError(f"Dimensão deve ser >= 1, recebido {d}")
        if source.dim is not None and source.dim != d:
            raise UnsupportedError(f"Norma {source.name} definida apenas em dimensão {source.dim}")
        self.source = source
        self.d = d
        self.gap_tol = gap_tol if gap_tol is not None else config.gap_tolerance()
        self.max_rounds = max_rounds if max_rounds is not None else config.max_iters()
        self.logger = get_logger("knorms")
        self._subset_cache: Dict[int, List[IndexSet]] = {}

    @property
    def sorted_path(self) -> bool:
        """Caminho rápido: fonte invariante por permutação e monotônica"""
        return self.source.permutation_invariant and self.source.orthant_monotonic

    def norm(self, x: np.ndarray) -> float:
        return self.source(x)

    def dual_norm(self, y: np.ndarray) -> float:
        return self.source.dual(y)

    # ------------------------------------------------------------------
    # validação

    def _check_vector(self, v: np.ndarray):
        if v.shape != (self.d,):
            raise ArgumentError(f"Vetor de dimensão {v.shape} na família de dimensão {self.d}")

    def _check_k(self, k: int, low: int = 0):
        if not low <= k <= self.d:
            raise ArgumentError(f"k={k} fora de [{low}, {self.d}]")

    def _subsets_up_to(self, k: int) -> List[IndexSet]:
        """Suportes não vazios com |K| ≤ k, em ordem lexicográfica"""
        if self.d > ENUM_DIM_CAP:
            raise UnsupportedError(f"Enumeração de suportes com d={self.d} > {ENUM_DIM_CAP}")
        if k not in self._subset_cache:
            subsets = itertools.chain.from_iterable(
                itertools.combinations(range(self.d), size) for size in range(1, k + 1)
            )
            self._subset_cache[k] = sorted(subsets)
        return self._subset_cache[k]

    # ------------------------------------------------------------------
    # ⊤_k

    def top_k_support(self, y: np.ndarray, k: int, path: str = "auto") -> Tuple[float, IndexSet]:
        """(⊤_k(y), suporte maximizante); empates pela ordem lexicográfica de K"""
        self._check_vector(y)
        self._check_k(k)
        if k == 0:
            return 0.0, ()
        if path == "sorted" or (path == "auto" and self.sorted_path):
            order = np.argsort(-np.abs(y), kind="stable")
            K = tuple(sorted(int(i) for i in order[:k]))
            return self.source.dual(masked(y, K)), K
        best, best_K = -1.0, ()
        for K in self._subsets_up_to(k):
            value = self.source.dual(masked(y, K))
            if value > best:
                best, best_K = value, K
        return best, best_K

    def top_k_dual_norm(self, y: np.ndarray, k: int, path: str = "auto") -> float:
        return self.top_k_support(y, k, path)[0]

    def top_k_profile(self, y: np.ndarray) -> np.ndarray:
        """(⊤_0(y), …, ⊤_d(y)) com ⊤_0 = 0"""
        return self.top_k_profile_with_supports(y)[0]

    def top_k_profile_with_supports(self, y: np.ndarray) -> Tuple[np.ndarray, List[IndexSet]]:
        self._check_vector(y)
        values = np.zeros(self.d + 1)
        supports: List[IndexSet] = [()]
        if self.sorted_path:
            order = np.argsort(-np.abs(y), kind="stable")
            for l in range(1, self.d + 1):
                K = tuple(sorted(int(i) for i in order[:l]))
                values[l] = self.source.dual(masked(y, K))
                supports.append(K)
            return values, supports
        best, best_K = 0.0, ()
        by_size: Dict[int, List[Tuple[float, IndexSet]]] = {}
        for K in self._subsets_up_to(self.d):
            by_size.setdefault(len(K), []).append((self.source.dual(masked(y, K)), K))
        for l in range(1, self.d + 1):
            for value, K in sorted(by_size[l], key=lambda item: item[1]):
                if value > best or not best_K:
                    best, best_K = value, K
            values[l] = best
            supports.append(best_K)
        return values, supports

    def top_k_profiles(self, Y: np.ndarray) -> np.ndarray:
        """Perfis de várias linhas de Y (vetorizado para fontes ℓp)"""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if isinstance(self.source, LpNorm):
            A = -np.sort(-np.abs(Y), axis=1)
            q = self.source.q
            out = np.zeros((Y.shape[0], self.d + 1))
            if q == INFINITY:
                out[:, 1:] = A[:, :1]
            elif q == 1:
                out[:, 1:] = np.cumsum(A, axis=1)
            else:
                top = A[:, :1]
                scale = np.where(top > 0, top, 1.0)
                out[:, 1:] = top * np.cumsum((A / scale) ** q, axis=1) ** (1.0 / q)
            return out
        return np.vstack([self.top_k_profile(row) for row in Y])

    # ------------------------------------------------------------------
    # sn_k

    def k_support_dual_norm(self, x: np.ndarray, k: int) -> float:
        return self.k_support_bracket(x, k).value

    def k_support_bracket(self, x: np.ndarray, k: int) -> KSupportValue:
        """sn_k(x), dual de ⊤_k, com limites primal e dual"""
        self._check_vector(x)
        self._check_k(k)
        support_size = l0(x)
        if support_size == 0:
            return KSupportValue(0.0, 0.0, 0.0, "zero", dual_witness=np.zeros(self.d))
        if k == 0:
            raise ArgumentError("sn_0 só é definida em x = 0")

        if support_size <= k and self.source.orthant_monotonic:
            value = self.source(x)
            return KSupportValue(value, value, value, "sparse",
                                 blocks=[(value, np.asarray(x, dtype=float) / value)],
                                 dual_witness=self.source.dual_pair_direction(x))

        if isinstance(self.source, LpNorm):
            result = self._lp_bracket(x, k)
            if result is not None:
                return result

        return self._column_generation(x, k)

    def _lp_bracket(self, x: np.ndarray, k: int) -> Optional[KSupportValue]:
        p = self.source.p
        a = np.abs(x)
        sign = np.sign(x)
        if p == 1 or k == 1:
            value = float(a.sum())
            blocks = [(float(a[i]), sign[i] * np.eye(self.d)[i]) for i in np.nonzero(a)[0]]
            path = "analytic-l1" if p == 1 else "analytic-k1"
            return KSupportValue(value, value, value, path, blocks=blocks, dual_witness=sign.astype(float))
        if p == INFINITY:
            total, peak = float(a.sum()), float(a.max())
            value = max(total / k, peak)
            if peak >= total / k:
                i = int(np.argmax(a))
                witness = sign[i] * np.eye(self.d)[i]
            else:
                witness = sign.astype(float)
            return KSupportValue(value, value, value, "analytic-linf", dual_witness=witness)

        lower, upper, blocks, witness = self._pooled_bracket(x, k)
        if upper - lower <= self.gap_tol * max(1.0, upper):
            return KSupportValue(0.5 * (lower + upper), lower, upper, "pooled",
                                 blocks=blocks, dual_witness=witness)
        self.logger.debug(f"Enquadramento por agrupamento abriu gap {upper - lower:.3e}; usando geração de colunas")
        return None

    def _pooled_bracket(self, x: np.ndarray, k: int):
        """Candidatos por agrupamento das menores magnitudes (nível r)

        Cabeça: as k−r−1 maiores magnitudes; cauda: o resto, agrupada na média m.
        Todo nível r fornece um dual y (limite inferior ⟨x,y⟩/⊤_k(y)); se m domina
        a cauda, a cauda se divide em blocos k-esparsos (limite superior).
        """
        p = self.source.p
        sign = np.sign(x)
        magnitudes = np.abs(x)
        order = np.argsort(-magnitudes, kind="stable")
        a = magnitudes[order]
        best_lower, best_witness = 0.0, None
        best_upper, best_blocks = math.inf, []
        for r in range(k):
            h = k - r - 1
            head, tail = order[:h], order[h:]
            m = float(a[h:].sum()) / (r + 1)
            if m <= 0:
                continue
            y = np.zeros(self.d)
            y[head] = sign[head] * (a[:h] / m) ** (p - 1.0)
            y[tail] = sign[tail]
            top = self.top_k_dual_norm(y, k)
            if top > 0:
                lower = float(np.dot(x, y)) / top
                if lower > best_lower:
                    best_lower, best_witness = lower, y
            if a[h] <= m * (1.0 + 1e-12):
                blocks = self._pooled_blocks(x, head, tail, m, r + 1)
                upper = self._blocks_upper(x, blocks)
                if upper < best_upper:
                    best_upper, best_blocks = upper, blocks
        return best_lower, best_upper, best_blocks, best_witness

    def _pooled_blocks(self, x: np.ndarray, head, tail, m: float, size: int) -> List[Block]:
        weights = np.clip(np.abs(x[tail]) / m, 0.0, 1.0)
        blocks = []
        for theta, chosen in hypersimplex_split(weights, size):
            u = np.zeros(self.d)
            u[head] = x[head]
            picked = tail[chosen]
            u[picked] = np.sign(x[picked]) * m
            length = self.source(u)
            if length > 0:
                blocks.append((theta * length, u / length))
        return blocks

    def _blocks_upper(self, x: np.ndarray, blocks: List[Block]) -> float:
        """Σ pesos + correção do resíduo por átomos coordenados"""
        recon = np.zeros(self.d)
        for weight, atom in blocks:
            recon += weight * atom
        resid = np.asarray(x, dtype=float) - recon
        correction = sum(abs(resid[i]) / self.source.coordinate_dual(self.d, i)
                         for i in np.nonzero(resid)[0])
        return float(sum(w for w, _ in blocks) + correction)

    def _column_generation(self, x: np.ndarray, k: int) -> KSupportValue:
        """Gauge dos átomos Π_K(B), |K| ≤ k: LP mestre + precificação por ⊤_k"""
        atoms: List[np.ndarray] = []
        keys = set()

        def add(atom: np.ndarray) -> bool:
            key = tuple(np.round(atom, 12))
            if key in keys or not np.any(atom):
                return False
            keys.add(key)
            atoms.append(atom)
            return True

        for i in range(self.d):
            e = np.eye(self.d)[i] * self.source.coordinate_dual(self.d, i)
            add(e)
            add(-e)

        def price(y: np.ndarray) -> bool:
            _, K = self.top_k_support(y, k)
            xstar = self.source.dual_maximizer(masked(y, K))
            return add(masked(xstar, K))

        price(np.sign(x))
        price(np.asarray(x, dtype=float))

        best_lower, best_witness = 0.0, None
        best_upper, best_blocks = math.inf, []
        for rounds in range(1, self.max_rounds + 1):
            A = np.column_stack(atoms)
            res = linprog(np.ones(len(atoms)), A_eq=A, b_eq=x, bounds=(0, None), method="highs")
            if res.status != 0:
                raise ConvergenceError(f"LP mestre falhou: {res.message}", best_lower, best_upper)
            coeffs = np.clip(res.x, 0.0, None)
            blocks = [(float(c), atoms[j]) for j, c in enumerate(coeffs) if c > 0]
            upper = self._blocks_upper(x, blocks)
            if upper < best_upper:
                best_upper, best_blocks = upper, blocks

            y = np.asarray(res.eqlin.marginals, dtype=float)
            for candidate in (y, -y):
                top = self.top_k_dual_norm(candidate, k)
                if top > 0:
                    lower = float(np.dot(x, candidate)) / top
                    if lower > best_lower:
                        best_lower, best_witness = lower, candidate

            if best_upper - best_lower <= self.gap_tol * max(1.0, best_upper):
                self.logger.debug(f"Geração de colunas fechou em {rounds} rodadas")
                return KSupportValue(0.5 * (best_lower + best_upper), best_lower, best_upper,
                                     "column-generation", blocks=best_blocks, dual_witness=best_witness)
            if not price(y):
                break

        raise ConvergenceError(f"sn_{k} não convergiu", best_lower, best_upper, witness=best_blocks)

    # ------------------------------------------------------------------
    # coordenada-k

    def coordinate_k_dual_norm(self, y: np.ndarray, k: int) -> float:
        """sup_{|K|≤k} ⦀y_K⦀_{K,⋆} (restringir e depois dualizar)"""
        self._check_vector(y)
        self._check_k(k, low=1)
        if self.source.orthant_monotonic:
            return self.top_k_dual_norm(y, k)
        return max(self.source.restricted_dual(y, K) for K in self._subsets_up_to(k))

    # ------------------------------------------------------------------
    # aninhamento

    def ball_nesting_check(self, samples: int = 1000, seed: int = 0) -> NestingReport:
        """sn_1 ≥ … ≥ sn_d = ⦀·⦀ e ⊤_1 ≤ … ≤ ⊤_d = ⦀·⦀⋆ em amostras aleatórias"""
        rng = np.random.default_rng(seed)
        for s in range(samples):
            x = rng.standard_normal(self.d)
            y = rng.standard_normal(self.d)
            sn = [self.k_support_dual_norm(x, k) for k in range(1, self.d + 1)]
            top = self.top_k_profile(y)[1:]
            nx, ny = self.source(x), self.source.dual(y)
            for k in range(1, self.d):
                if sn[k] > sn[k - 1] + NESTING_TOL * (1.0 + sn[k - 1]):
                    return self._violation(s + 1, "sn", k, x, sn)
                if top[k - 1] > top[k] + NESTING_TOL * (1.0 + top[k]):
                    return self._violation(s + 1, "top", k, y, list(top))
            if abs(sn[-1] - nx) > NESTING_TOL * (1.0 + nx):
                return self._violation(s + 1, "sn_d", self.d, x, sn)
            if abs(top[-1] - ny) > NESTING_TOL * (1.0 + ny):
                return self._violation(s + 1, "top_d", self.d, y, list(top))
        self.logger.info(f"Aninhamento verificado em {samples} amostras ({self.source.name}, d={self.d})")
        return NestingReport(True, samples)

    def _violation(self, used: int, family: str, k: int, witness: np.ndarray, values) -> NestingReport:
        self.logger.warning(f"Violação de aninhamento ({family}, k={k}) na amostra {used}")
        return NestingReport(False, used, {
            'family': family, 'k': k, 'witness': witness, 'values': [float(v) for v in values],
        })
