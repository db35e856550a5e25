"""
Report Writer
Emissão de resultados em JSON/CSV (stdout ou arquivos em OUTPUT_DIR)
"""

import csv
import json
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, TextIO

import numpy as np

from src.utils import config
from src.utils.logger import get_logger


def to_jsonable(obj):
    """Converter resultados (dataclasses com to_dict, numpy, ±∞) em tipos JSON"""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        # -0.0 e 0.0 devem serializar igual
        return value + 0.0
    return obj


class ReportWriter:
    """Escritor de relatórios: JSON determinístico (chaves ordenadas, sem timestamps) e CSV"""

    def __init__(self, output_dir: Optional[Path] = None):
        self.logger = get_logger("report_writer")
        self.output_dir = Path(output_dir) if output_dir is not None else config.output_dir()

    def format_json(self, payload) -> str:
        return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False)

    def emit_json(self, payload, stream: Optional[TextIO] = None):
        stream = stream or sys.stdout
        stream.write(self.format_json(payload) + "\n")

    def emit_csv(self, rows: Iterable[Dict], fieldnames: List[str], stream: Optional[TextIO] = None):
        stream = stream or sys.stdout
        writer = csv.DictWriter(stream, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            data = to_jsonable(row)
            writer.writerow({key: self._cell(data.get(key)) for key in fieldnames})

    def emit(self, payload, output: str = "json", stream: Optional[TextIO] = None):
        """JSON por padrão; CSV achata o payload em linhas chave/valor"""
        if output == "csv":
            rows = self._flatten(to_jsonable(payload))
            self.emit_csv(({'key': k, 'value': v} for k, v in rows), ['key', 'value'], stream)
        else:
            self.emit_json(payload, stream)

    def save_json(self, payload, filename: str) -> Path:
        """Salvar relatório consolidado em OUTPUT_DIR"""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        filepath = self.output_dir / filename
        with open(filepath, 'w', encoding='utf-8') as f:
            f.write(self.format_json(payload) + "\n")
        self.logger.info(f"Relatório salvo em: {filepath}")
        return filepath

    @staticmethod
    def _cell(value):
        if isinstance(value, list):
            return ";".join(str(v) for v in value)
        return "" if value is None else value

    def _flatten(self, data, prefix: str = "") -> List:
        if isinstance(data, dict):
            rows = []
            for key in sorted(data):
                rows.extend(self._flatten(data[key], f"{prefix}.{key}" if prefix else key))
            return rows
        return [(prefix, self._cell(data))]
