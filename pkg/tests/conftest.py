from pathlib import Path
import sys

import pytest

# Ensure project root is importable when running tests directly
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from hyper_match.config import Config
from hyper_match.cost import CostMeter
from hyper_match.engine import DynamicMatcher


@pytest.fixture
def meter() -> CostMeter:
    """log_n=4 のメータ（バッチは開いた状態）。"""

    m = CostMeter(log_n=4)
    m.begin_batch()
    return m


@pytest.fixture
def make_matcher():
    def _make(r: int = 2, N: int = 64, seed: int = 0, **kwargs) -> DynamicMatcher:
        return DynamicMatcher(Config(r=r, N=N, seed=seed, **kwargs))

    return _make
