"""
Configuration
Leitura de variáveis de ambiente (carregadas de .env pelos pontos de entrada)
"""

import os
from pathlib import Path

DEFAULT_GAP_TOL = 1e-6
DEFAULT_MAX_ITERS = 10000


def default_seed() -> int:
    return int(os.getenv('CAPRA_SEED', 0))


def log_level() -> str:
    return os.getenv('LOG_LEVEL', 'INFO')


def log_dir() -> str:
    """Diretório dos logs; string vazia desativa o arquivo"""
    return os.getenv('LOG_DIR', 'logs')


def output_dir() -> Path:
    return Path(os.getenv('OUTPUT_DIR', 'results'))


def gap_tolerance() -> float:
    return float(os.getenv('CAPRA_GAP_TOL', DEFAULT_GAP_TOL))


def max_iters() -> int:
    return int(os.getenv('CAPRA_MAX_ITERS', DEFAULT_MAX_ITERS))
