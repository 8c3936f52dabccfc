import numpy as np
import pytest

from oracles import KCBS_MAX, TSIRELSON, kcbs_scan_oracle, tsirelson_oracle


def test_tsirelson_oracle_matches_frozen_value():
    assert tsirelson_oracle() == pytest.approx(TSIRELSON, abs=5e-8)
    assert tsirelson_oracle() == pytest.approx(np.sqrt(2), abs=1e-12)


def test_kcbs_oracle_matches_frozen_value():
    v = kcbs_scan_oracle()
    assert v == pytest.approx(KCBS_MAX, abs=5e-8)
    assert v == pytest.approx((4 * np.sqrt(5) - 5) / 3, abs=1e-9)
