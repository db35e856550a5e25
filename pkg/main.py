#!/usr/bin/env python3
"""
Capra L0 Toolkit
Linha de comando: normas top-k / k-support, conjugação Capra de φ∘l0,
função de fatoração L0^φ, subdiferenciais e suíte de verificação
"""

import argparse
import sys
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

import numpy as np
from dotenv import load_dotenv

from src.capra import PhiFunction, capra_biconjugate, capra_conjugate, subdiff_membership, subgradient_construct
from src.factorization import eval_L0, rm_subdiff_coincidence_check, sphere_coincidence_check, sweep_segment
from src.knorms import KNormFamily
from src.monotonicity import (DEFAULT_SAMPLES, check_orthant_monotonic, check_orthant_strictly_monotonic,
                              coordinate_subspace_check, strict_chain_check, verify_declared_flags)
from src.normcore import dual_norm, norm, parse_source
from src.report_writer import ReportWriter
from src.sparseopt import load_instance, solve_min_phi_l0
from src.suite_manager import VerificationManager
from src.utils import config
from src.utils.errors import ArgumentError, CapraError
from src.utils.logger import setup_logger
from src.vectors import parse_vector

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION = 2


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """argparse que levanta exceção em vez de sair com código 2 (reservado a verificações)"""

    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    source: str
    phi: str
    dim: Optional[int]
    seed: int
    gap_tol: float
    output: str
    shortcut: bool

    @classmethod
    def from_args(cls, args, dim: Optional[int] = None) -> "RunConfig":
        default_output = "csv" if args.command == "sweep" else "json"
        return cls(
            source=args.source,
            phi=args.phi,
            dim=dim,
            seed=args.seed,
            gap_tol=args.gap_tol,
            output=args.output or default_output,
            shortcut=not args.no_shortcut,
        )

    def family(self) -> KNormFamily:
        if self.dim is None:
            raise ArgumentError("Dimensão indefinida: informe um vetor ou --dim")
        return KNormFamily(parse_source(self.source), self.dim, gap_tol=self.gap_tol)

    def phi_function(self) -> PhiFunction:
        return PhiFunction.parse(self.phi, self.dim)


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument('--source', default='lp:2', help='lp:<p> | l1 | l2 | linf | wlp:<p>:<w> | skew')
    common.add_argument('--phi', default='id', help='id | sq | zero | table:v0,...,vd')
    common.add_argument('--seed', type=int, default=config.default_seed())
    common.add_argument('--gap-tol', type=float, default=config.gap_tolerance())
    common.add_argument('--output', choices=['json', 'csv'], default=None)
    common.add_argument('--no-shortcut', action='store_true', help='desativa o atalho da esfera em L0^φ')
    common.add_argument('--log-level', type=str.upper, choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], default=None)

    parser = ArgumentParser(prog='capra-l0', description='Conjugação Capra e a pseudonorma l0')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=ArgumentParser)

    p = sub.add_parser('norm', parents=[common], help='valores top-k, k-support, coordenada-k, dual')
    p.add_argument('--x', help='vetor primal')
    p.add_argument('--y', help='vetor dual')
    p.add_argument('--k', type=int)
    p.add_argument('--kind', choices=['top', 'support', 'coordinate', 'dual', 'norm'], default='support')

    p = sub.add_parser('conj', parents=[common], help='conjugado Capra de φ∘l0')
    p.add_argument('--y', required=True)

    p = sub.add_parser('biconj', parents=[common], help='biconjugado Capra de φ∘l0')
    p.add_argument('--x', required=True)

    p = sub.add_parser('l0fun', parents=[common], help='L0^φ com decomposição testemunha')
    p.add_argument('--x', required=True)

    p = sub.add_parser('subdiff', parents=[common], help='certificado ou teste de pertinência')
    p.add_argument('--x', required=True)
    p.add_argument('--y', help='testa a pertinência de y em vez de construir um certificado')
    p.add_argument('--tol', type=float, default=1e-8)

    p = sub.add_parser('check', parents=[common], help='verificações de propriedades')
    p.add_argument('--what', required=True,
                   choices=['om', 'osm', 'chain', 'nesting', 'sphere', 'rm-subdiff', 'flags', 'subspace'])
    p.add_argument('--dim', type=int, default=3)
    p.add_argument('--samples', type=int, default=None)
    p.add_argument('--x', help='ponto da esfera (rm-subdiff)')
    p.add_argument('--y', help='vetor dual (chain, rm-subdiff)')

    p = sub.add_parser('solve', parents=[common], help='min φ(l0(x)) sobre um conjunto de instância')
    p.add_argument('--instance', required=True)

    p = sub.add_parser('sweep', parents=[common], help='L0^φ ao longo de um segmento (CSV)')
    p.add_argument('--x0', required=True)
    p.add_argument('--direction', required=True)
    p.add_argument('--t-min', type=float, default=0.0)
    p.add_argument('--t-max', type=float, default=1.0)
    p.add_argument('--steps', type=int, default=11)

    p = sub.add_parser('verify', parents=[common], help='suíte de aceitação completa')
    p.add_argument('--dim', type=int, required=True)
    p.add_argument('--quick', action='store_true')
    p.add_argument('--save', action='store_true', help='salva o relatório em OUTPUT_DIR')

    return parser


def _vector(text: Optional[str], name: str) -> np.ndarray:
    if text is None:
        raise ArgumentError(f"--{name} é obrigatório para este comando")
    return parse_vector(text)


def cmd_norm(args):
    vector = _vector(args.x if args.x is not None else args.y, "x ou --y")
    cfg = RunConfig.from_args(args, len(vector))
    family = cfg.family()
    result: Dict = {'kind': args.kind}
    if args.kind in ('top', 'support', 'coordinate'):
        if args.k is None:
            raise ArgumentError(f"--k é obrigatório para --kind {args.kind}")
    if args.kind == 'top':
        value, K = family.top_k_support(vector, args.k)
        result.update(value=value, support=list(K))
    elif args.kind == 'support':
        bracket = family.k_support_bracket(vector, args.k)
        result.update(bracket.to_dict())
    elif args.kind == 'coordinate':
        result['value'] = family.coordinate_k_dual_norm(vector, args.k)
    elif args.kind == 'dual':
        result['value'] = dual_norm(family.source, vector)
    else:
        result['value'] = norm(family.source, vector)
    return _payload(args, cfg, {'vector': vector, 'k': args.k}, result), EXIT_OK


def cmd_conj(args):
    y = _vector(args.y, 'y')
    cfg = RunConfig.from_args(args, len(y))
    result = capra_conjugate(cfg.family(), cfg.phi_function(), y)
    return _payload(args, cfg, {'y': y}, result), EXIT_OK


def cmd_biconj(args):
    x = _vector(args.x, 'x')
    cfg = RunConfig.from_args(args, len(x))
    result = capra_biconjugate(cfg.family(), cfg.phi_function(), x, shortcut=cfg.shortcut)
    return _payload(args, cfg, {'x': x}, result), EXIT_OK


def cmd_l0fun(args):
    x = _vector(args.x, 'x')
    cfg = RunConfig.from_args(args, len(x))
    result = eval_L0(cfg.family(), cfg.phi_function(), x, shortcut=cfg.shortcut)
    return _payload(args, cfg, {'x': x}, result), EXIT_OK


def cmd_subdiff(args):
    x = _vector(args.x, 'x')
    cfg = RunConfig.from_args(args, len(x))
    family, phi = cfg.family(), cfg.phi_function()
    if args.y is not None:
        y = parse_vector(args.y)
        result = subdiff_membership(family, phi, x, y, tol=args.tol)
        return _payload(args, cfg, {'x': x, 'y': y, 'tol': args.tol}, result), EXIT_OK
    result = subgradient_construct(family, phi, x)
    return _payload(args, cfg, {'x': x}, result), EXIT_OK


def cmd_check(args):
    what = args.what
    vector_text = args.y if what == 'chain' else args.x
    dim = len(parse_vector(vector_text)) if vector_text else args.dim
    cfg = RunConfig.from_args(args, dim)
    source = parse_source(cfg.source)
    inputs = {'what': what, 'dim': dim, 'samples': args.samples}

    if what in ('om', 'osm'):
        check = check_orthant_monotonic if what == 'om' else check_orthant_strictly_monotonic
        report = check(source, args.samples or DEFAULT_SAMPLES, cfg.seed, dim)
        return _payload(args, cfg, inputs, report), EXIT_OK
    if what == 'flags':
        report = verify_declared_flags(source, args.samples or DEFAULT_SAMPLES, cfg.seed, dim)
        return _payload(args, cfg, inputs, report), _status(report['consistent'])
    if what == 'subspace':
        report = coordinate_subspace_check(source, args.samples or 1000, cfg.seed, dim,
                                           strict=source.orthant_strictly_monotonic)
        return _payload(args, cfg, inputs, report), _status(report.holds)

    family = cfg.family()
    if what == 'chain':
        y = _vector(args.y, 'y')
        report = strict_chain_check(family, y)
        return _payload(args, cfg, {**inputs, 'y': y}, report), _status(report.holds)
    if what == 'nesting':
        report = family.ball_nesting_check(args.samples or 1000, cfg.seed)
        return _payload(args, cfg, inputs, report), _status(report.holds)
    phi = cfg.phi_function()
    if what == 'sphere':
        report = sphere_coincidence_check(family, phi, args.samples or 200, cfg.seed, shortcut=cfg.shortcut)
        return _payload(args, cfg, inputs, report), _status(report.holds)
    s, y = _vector(args.x, 'x'), _vector(args.y, 'y')
    report = rm_subdiff_coincidence_check(family, phi, s, y, seed=cfg.seed)
    return _payload(args, cfg, {**inputs, 's': s, 'y': y}, report), _status(report.agree)


def cmd_solve(args):
    instance = load_instance(args.instance)
    cfg = RunConfig.from_args(args, instance.family.d)
    cfg.source, cfg.phi = instance.family.source.name, instance.phi.name
    report = solve_min_phi_l0(instance.family, instance.phi, instance.feasible)
    inputs = {'instance': args.instance, 'set': instance.feasible, 'phi': instance.phi}
    return _payload(args, cfg, inputs, report), EXIT_OK


def cmd_sweep(args):
    x0, direction = parse_vector(args.x0), parse_vector(args.direction)
    cfg = RunConfig.from_args(args, len(x0))
    t_values = np.linspace(args.t_min, args.t_max, args.steps) if args.steps > 1 else [args.t_min]
    rows = sweep_segment(cfg.family(), cfg.phi_function(), x0, direction, t_values, shortcut=cfg.shortcut)
    inputs = {'x0': x0, 'direction': direction, 't_min': args.t_min, 't_max': args.t_max, 'steps': args.steps}
    return _payload(args, cfg, inputs, {'rows': rows}), EXIT_OK


def cmd_verify(args):
    cfg = RunConfig.from_args(args, args.dim)
    manager = VerificationManager(cfg.source, args.dim, seed=cfg.seed, quick=args.quick)
    report = manager.run_all()
    if args.save:
        manager.save_report(report)
    return _payload(args, cfg, {'quick': args.quick}, report), _status(report['passed'])


COMMANDS = {
    'norm': cmd_norm,
    'conj': cmd_conj,
    'biconj': cmd_biconj,
    'l0fun': cmd_l0fun,
    'subdiff': cmd_subdiff,
    'check': cmd_check,
    'solve': cmd_solve,
    'sweep': cmd_sweep,
    'verify': cmd_verify,
}


def _status(ok: bool) -> int:
    return EXIT_OK if ok else EXIT_VERIFICATION


def _payload(args, cfg: RunConfig, inputs: Dict, result) -> Dict:
    return {'command': args.command, 'config': asdict(cfg), 'inputs': inputs, 'result': result}


def emit(writer: ReportWriter, payload: Dict, output: str):
    if payload['command'] == 'sweep' and output == 'csv':
        writer.emit_csv(payload['result']['rows'], ['t', 'lower', 'upper', 'phi_l0'])
    else:
        writer.emit(payload, output)


def main(argv: Optional[List[str]] = None) -> int:
    """Função principal da linha de comando"""

    # Carregar variáveis de ambiente
    load_dotenv()

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        setup_logger(config.log_level()).error(f"Uso inválido: {e}")
        return EXIT_USAGE

    logger = setup_logger(args.log_level or config.log_level())
    logger.debug(f"Comando: {args.command}")

    try:
        payload, code = COMMANDS[args.command](args)
        emit(ReportWriter(), payload, payload['config']['output'])
        return code
    except CapraError as e:
        logger.error(f"Erro em {args.command}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
