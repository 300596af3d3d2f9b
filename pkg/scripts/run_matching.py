"""
更新ストリームまたは生成ワークロードを DynamicMatcher で実行するスクリプト。

`hyper_match.cli.main` の薄いラッパーです（引数はそのまま渡します）。

例:
    python scripts/run_matching.py --generate uniform-mix --n 100 --r 2 --batches 50 --batch-size 64 --seed 7 --verify every-batch
    python scripts/run_matching.py --input stream.txt --stats-out runs/stats.json
"""

import sys
from pathlib import Path

# リポジトリ直下から直接実行できるようにする
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from hyper_match.cli import main


if __name__ == "__main__":
    sys.exit(main())
