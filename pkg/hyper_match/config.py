from __future__ import annotations

"""グローバル設定・定数をまとめたモジュール。

- ランク r と容量 N から導出される α = 4r, L = ⌈log_α N⌉
- コストモデルの定数（バッチ操作ごとの work/depth 係数）
- 乱択手続きの定数（c_sub, c_luby, 再試行上限）
- YAML / 環境変数からの読込
"""

import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml
from dotenv import load_dotenv

from .errors import ConfigError


# 既定値
DEFAULT_RANK = 2
DEFAULT_SEED = 0
DEFAULT_C_SUB = 4.0
DEFAULT_C_LUBY = 8
DEFAULT_MU_CONST = 1.0
CAPACITY_SLACK = 1024  # N の初期見積りに足す更新数の余裕

# 環境変数のプレフィックス（HYPER_MATCH_SEED など）
ENV_PREFIX = "HYPER_MATCH_"

DEFAULT_CONFIG_PATH = Path("configs/default.yaml")


def default_capacity(n_vertices: int) -> int:
    """N の既定見積り 2·(頂点数 + 1024) を返す。"""

    return 2 * (max(0, int(n_vertices)) + CAPACITY_SLACK)


def ceil_log2(x: int) -> int:
    """⌈log₂ x⌉（x ≤ 1 なら 0）。"""

    if x <= 1:
        return 0
    return (int(x) - 1).bit_length()


def level_count(capacity: int, alpha: int) -> int:
    """L = ⌈log_α N⌉ を整数演算で返す（α^L ≥ N となる最小の L）。"""

    levels, power = 0, 1
    while power < capacity:
        power *= alpha
        levels += 1
    return levels


@dataclass(frozen=True)
class CostParams:
    """コストパラメータ（隠れ定数。すべて既定 1）。

    - dict_work / dict_depth: 並列辞書の insert/erase/retrieve 1 回あたり
    - scan_work / scan_depth: O(L) の接頭辞和や O(r) の走査
    - luby_work / luby_depth: Luby の 1 ラウンドあたり
    """

    dict_work: int = 1
    dict_depth: int = 1
    scan_work: int = 1
    scan_depth: int = 1
    luby_work: int = 1
    luby_depth: int = 1


@dataclass(frozen=True)
class Config:
    """エンジン設定。

    - r: ハイパーエッジの最大ランク
    - N: 頂点数 + 更新数の上界（再構築で倍増）
    - seed: アルゴリズム側 PRNG のシード
    - c_sub: subsettle の各フェーズの反復数係数
    - settle_repeat_cap: subsettle 繰返しの上限（None なら 64·⌈log₂N⌉）
    - c_luby: Luby のラウンド上限係数
    - mu_const: μ-short 判定の定数
    """

    r: int = DEFAULT_RANK
    N: int = field(default_factory=lambda: default_capacity(0))
    seed: int = DEFAULT_SEED
    c_sub: float = DEFAULT_C_SUB
    settle_repeat_cap: Optional[int] = None
    c_luby: int = DEFAULT_C_LUBY
    mu_const: float = DEFAULT_MU_CONST
    costs: CostParams = field(default_factory=CostParams)

    def __post_init__(self) -> None:
        if int(self.r) < 2:
            raise ConfigError(f"rank r must be >= 2, got {self.r}")
        if int(self.N) < 2:
            raise ConfigError(f"capacity N must be >= 2, got {self.N}")
        if self.c_sub <= 0:
            raise ConfigError(f"c_sub must be positive, got {self.c_sub}")
        if self.c_luby < 1:
            raise ConfigError(f"c_luby must be >= 1, got {self.c_luby}")
        if self.settle_repeat_cap is not None and self.settle_repeat_cap < 1:
            raise ConfigError(f"settle_repeat_cap must be >= 1, got {self.settle_repeat_cap}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")

    @property
    def alpha(self) -> int:
        return 4 * self.r

    @property
    def L(self) -> int:
        return level_count(self.N, self.alpha)

    @property
    def log_n(self) -> int:
        return ceil_log2(self.N)

    @property
    def repeat_cap(self) -> int:
        if self.settle_repeat_cap is not None:
            return int(self.settle_repeat_cap)
        return 64 * max(1, self.log_n)

    @property
    def mu(self) -> float:
        """μ = mu_const / (α⁴ · log₂α · log₂⁴N)。"""

        log_alpha = math.log2(self.alpha)
        log_n = max(1.0, math.log2(self.N))
        return self.mu_const / (self.alpha**4 * log_alpha * log_n**4)

    def threshold(self, level: int) -> int:
        """α^ℓ を返す。"""

        return self.alpha**level

    def doubled(self, at_least: int) -> "Config":
        """at_least を超えるまで N を倍増した設定を返す。"""

        capacity = self.N
        while capacity < at_least:
            capacity *= 2
        return replace(self, N=capacity)

    def to_dict(self) -> Dict[str, Any]:
        """統計ドキュメント向けの辞書（フィールド順固定）。"""

        out = asdict(self)
        out["alpha"] = self.alpha
        out["L"] = self.L
        return out


_INT_KEYS = {"r", "N", "seed", "settle_repeat_cap", "c_luby"}
_FLOAT_KEYS = {"c_sub", "mu_const"}


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid value for {key}: {value!r}") from e
    return value


def _env_overrides(env: Mapping[str, str]) -> Dict[str, Any]:
    """HYPER_MATCH_* 環境変数から上書き値を集める。"""

    out: Dict[str, Any] = {}
    for f in fields(Config):
        if f.name == "costs":
            continue
        raw = env.get(ENV_PREFIX + f.name.upper())
        if raw is not None and raw != "":
            out[f.name] = _coerce(f.name, raw)
    return out


def read_yaml(path: Path) -> Dict[str, Any]:
    """YAML マッピングを読み込む。"""

    try:
        with Path(path).open("r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a YAML mapping: {path}")
    return data


def load_env_file() -> None:
    """.env を読み込む（ENV_FILE があればそのパスを優先）。"""

    env_file = os.getenv("ENV_FILE")
    load_dotenv(env_file) if env_file else load_dotenv()


def default_config_path() -> Optional[Path]:
    return DEFAULT_CONFIG_PATH if DEFAULT_CONFIG_PATH.exists() else None


def load_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    *,
    defaults: Optional[Mapping[str, Any]] = None,
    use_env: bool = True,
) -> Config:
    """設定を組み立てる。優先順位: overrides > 環境変数 > YAML > defaults > 既定値。

    YAML は path、未指定なら configs/default.yaml（存在する場合）から読む。
    use_env=True のとき .env を読み込んだ上で HYPER_MATCH_* を参照する。
    """

    cfg_path = path or default_config_path()
    data: Dict[str, Any] = read_yaml(cfg_path) if cfg_path else {}

    known = {f.name for f in fields(Config)}
    values: Dict[str, Any] = {}
    for key, value in (defaults or {}).items():
        if value is not None and key in known:
            values[key] = _coerce(key, value)
    for key, value in data.items():
        if key in known and key != "costs" and value is not None:
            values[key] = _coerce(key, value)
    costs_raw = data.get("costs") or {}
    if not isinstance(costs_raw, dict):
        raise ConfigError("costs must be a mapping")

    if use_env:
        load_env_file()
        values.update(_env_overrides(os.environ))

    for key, value in (overrides or {}).items():
        if value is not None and key in known:
            values[key] = _coerce(key, value)

    try:
        costs = CostParams(**{k: int(v) for k, v in costs_raw.items()})
    except TypeError as e:
        raise ConfigError(f"unknown cost parameter: {e}") from e
    return Config(**values, costs=costs)
