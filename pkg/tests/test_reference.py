import re
from pathlib import Path

import pytest

from asianctmc.reference import TABLES, table_requests

SOURCE_TEXT = Path(__file__).resolve().parents[1] / "paper.md"


def test_table_shapes():
    assert len(TABLES[1]) == 30
    for number, table in TABLES.items():
        reqs, bench, ref, labels = table_requests(number)
        assert len(reqs) == len(bench) == len(ref) == len(labels) == len(table)
    assert all("stand-in" in lab for lab in table_requests(1)[3])
    assert table_requests(1, transcribed_only=True)[0] == []


def test_frozen_spot_values():
    rows = {(b.label, r.strike, r.n): r for t in TABLES.values() for b in t.blocks for r in b.rows}
    t1 = {(r.strike, r.n): r for b in TABLES[1].blocks for r in b.rows}
    assert t1[(0.90, 12)].ctmc == 0.21300
    assert t1[(1.10, None)].ctmc == 0.12534
    t3 = {(r.strike, r.n): r for b in TABLES[3].blocks if b.transcribed for r in b.rows}
    assert t3[(90, 12)].ctmc == 12.70873
    t4 = {(r.strike, r.n): r for b in TABLES[4].blocks for r in b.rows}
    assert t4[(100, 250)].ctmc == 5.05803
    t5 = {(r.strike, r.n): r for b in TABLES[5].blocks for r in b.rows}
    assert t5[(100, None)].ctmc == 5.08138
    assert rows


@pytest.mark.skipif(not SOURCE_TEXT.exists(), reason="source text not shipped")
def test_every_ctmc_value_appears_in_source_text():
    text = SOURCE_TEXT.read_text()
    numbers = set(re.findall(r"\d+\.\d+", text))
    missing = []
    for t in TABLES.values():
        for b in t.blocks:
            for r in b.rows:
                for v in (r.benchmark, r.cai, r.ctmc):
                    if v is None:
                        continue
                    # values were transcribed with their printed precision
                    if not any(abs(float(s) - v) < 5e-9 for s in numbers):
                        missing.append((t.number, b.label, r.strike, r.n, v))
    assert not missing, missing[:5]
