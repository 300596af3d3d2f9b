"""hyper_match パッケージのエクスポート設定。"""

__all__ = [
    "config",
    "errors",
    "edges",
    "cost",
    "batch_set",
    "leveling",
    "luby",
    "settle",
    "epochs",
    "report",
    "engine",
    "oracle",
    "stream",
    "cli",
    "utils",
]
