"""
Logger Configuration
Configuração do sistema de logging da biblioteca capra_l0
"""

import logging
from datetime import datetime
from pathlib import Path

from src.utils import config

ROOT_LOGGER_NAME = "capra_l0"


def setup_logger(log_level: str = "INFO") -> logging.Logger:
    """Configurar sistema de logging (arquivo diário + console em stderr)"""

    level = getattr(logging, log_level.upper())

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    logger = logging.getLogger(ROOT_LOGGER_NAME)
    logger.setLevel(level)

    # Remover handlers existentes para evitar duplicação
    logger.handlers.clear()

    log_dir = config.log_dir()
    if log_dir:
        log_path = Path(log_dir)
        log_path.mkdir(exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d")
        file_handler = logging.FileHandler(log_path / f"capra_l0_{timestamp}.log", encoding='utf-8')
        file_handler.setFormatter(formatter)
        file_handler.setLevel(level)
        logger.addHandler(file_handler)

    # stdout fica reservado para JSON/CSV
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    console_handler.setLevel(level)
    logger.addHandler(console_handler)

    logger.propagate = False

    return logger


def get_logger(name: str) -> logging.Logger:
    """Logger filho de capra_l0 para um módulo"""
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")
