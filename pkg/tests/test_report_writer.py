import io
import json
import math

import numpy as np

from src.monotonicity import Verdict
from src.report_writer import ReportWriter, to_jsonable


def test_to_jsonable_special_values():
    data = to_jsonable({
        'inf': math.inf, 'ninf': -math.inf, 'nan': float("nan"), 'negzero': -0.0,
        'array': np.array([1.5, 2.0]), 'int': np.int64(3), 'flag': np.bool_(True),
        'verdict': Verdict.FAILS, 'tuple': (1, 2),
    })
    assert data == {
        'inf': "inf", 'ninf': "-inf", 'nan': "nan", 'negzero': 0.0,
        'array': [1.5, 2.0], 'int': 3, 'flag': True, 'verdict': "fails", 'tuple': [1, 2],
    }
    assert math.copysign(1.0, data['negzero']) == 1.0


def test_format_json_sorts_keys():
    text = ReportWriter().format_json({'b': 1, 'a': {'d': 2, 'c': 3}})
    assert list(json.loads(text)) == ['a', 'b']
    assert text.index('"c"') < text.index('"d"')


def test_emit_csv_rows():
    stream = io.StringIO()
    ReportWriter().emit_csv([{'t': 0.0, 'v': math.inf}, {'t': 1.0, 'v': [1, 2]}], ['t', 'v'], stream)
    assert stream.getvalue() == "t,v\n0.0,inf\n1.0,1;2\n"


def test_emit_csv_flattens_nested_payload():
    stream = io.StringIO()
    ReportWriter().emit({'result': {'value': 1.0, 'argmax': [1]}, 'command': 'conj'}, "csv", stream)
    assert stream.getvalue().splitlines() == ["key,value", "command,conj", "result.argmax,1", "result.value,1.0"]


def test_save_json(tmp_path):
    path = ReportWriter(tmp_path / "out").save_json({'passed': True}, "report.json")
    assert path.exists()
    assert json.loads(path.read_text(encoding='utf-8')) == {'passed': True}
