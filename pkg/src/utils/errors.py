"""
Errors
Hierarquia de exceções da biblioteca
"""

from typing import Optional


class CapraError(Exception):
    """Erro base de todas as operações da biblioteca"""


class InvalidNormError(CapraError):
    """Norma customizada devolveu valor negativo ou não finito"""


class ArgumentError(CapraError, ValueError):
    """Argumento fora do domínio da operação"""


class UnsupportedError(CapraError):
    """Operação sem caminho disponível (dimensão acima do limite, φ infinita...)"""


class ConvergenceError(CapraError):
    """Enquadramento primal-dual não fechou dentro do orçamento"""

    def __init__(self, message: str, lower: float, upper: float, witness: Optional[object] = None):
        super().__init__(f"{message} (lower={lower!r}, upper={upper!r})")
        self.lower = lower
        self.upper = upper
        self.witness = witness


class ConstructionError(CapraError):
    """Falha ao construir um certificado (normalmente hipótese OSM quebrada)"""


class InternalInconsistencyError(CapraError):
    """Dois caminhos numéricos independentes discordam além da tolerância"""
