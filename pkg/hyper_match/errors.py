from __future__ import annotations

"""例外階層。

- InputError: 入力（バッチ・ストリーム・設定）の不正。CLI は終了コード 2
- InternalError: 内部整合性の破綻や確率的上限の超過。CLI は終了コード 4
"""

from typing import Optional


class HyperMatchError(Exception):
    """hyper_match が送出する例外の基底クラス。"""


class InputError(HyperMatchError, ValueError):
    """呼び出し側の入力が不正。"""


class InternalError(HyperMatchError, RuntimeError):
    """エンジン内部の不整合（fail fast）。"""


# 入力系 --------------------------------------------------------------------


class EmptyEdge(InputError):
    pass


class RankExceeded(InputError):
    pass


class UnknownEdge(InputError):
    pass


class DuplicateEdge(InputError):
    pass


class InfeasibleSpec(InputError):
    pass


class TooLarge(InputError):
    pass


class ConfigError(InputError):
    pass


class StreamParseError(InputError):
    """ストリーム解析エラー。行番号を保持する。"""

    def __init__(self, message: str, line_no: Optional[int] = None) -> None:
        self.line_no = line_no
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)


# 内部系 --------------------------------------------------------------------


class EraseMissing(InternalError):
    pass


class NotEndpoint(InternalError):
    pass


class NotMaxLevel(InternalError):
    pass


class LevelOutOfRange(InternalError):
    pass


class MatchedEdgePassed(InternalError):
    pass


class NotMatched(InternalError):
    pass


class RoundCapExceeded(InternalError):
    pass


class SettleDivergence(InternalError):
    pass


class ProgressViolation(InternalError):
    pass


class InvariantBroken(InternalError):
    pass


class NoOpenBatch(InternalError):
    pass


class DoubleOpen(InternalError):
    pass


class CloseUnopened(InternalError):
    pass
