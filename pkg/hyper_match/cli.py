from __future__ import annotations

"""コマンドライン実行ハーネス。

更新ストリーム（--input）か生成ワークロード（--generate）をバッチ毎に適用し、
マッチングの差分を 1 行 JSON で stdout に出し、最後に統計ドキュメントを出力する。

終了コード: 0 正常 / 2 入力エラー / 3 検証失敗 / 4 内部エラー

例:
    hyper-match --generate uniform-mix --n 100 --r 2 --batches 50 --batch-size 64 --seed 7 --verify every-batch
"""

import argparse
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from loguru import logger

from .config import ENV_PREFIX, Config, default_capacity, default_config_path, load_config, load_env_file, read_yaml
from .engine import DynamicMatcher, UpdateBatch
from .errors import ConfigError, InputError, InternalError
from .oracle import Violation, audit, check_ratio
from .report import short_epoch_violations
from .stream import GENERATORS, WorkloadSpec, generate, parse_stream
from .utils import dumps_record, save_json


EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VERIFY = 3
EXIT_INTERNAL = 4

VERIFY_MODES = ("none", "final", "every-batch")
DEFAULT_LOG_LEVEL = "INFO"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hyper-match", description="Batch-dynamic maximal matching in rank-r hypergraphs")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=str, default=None, help="Update stream file (BATCH / + / - / END)")
    src.add_argument("--generate", choices=GENERATORS, default=None, help="Generate a seeded workload")
    p.add_argument("--n", type=int, default=100, help="Vertex count for generated workloads")
    p.add_argument("--r", type=int, default=None, help="Max hyperedge rank")
    p.add_argument("--batches", type=int, default=10, help="Number of generated batches")
    p.add_argument("--batch-size", type=int, default=64, help="Updates per generated batch")
    p.add_argument("--insert-ratio", type=float, default=0.5, help="Insert probability per generated update")
    p.add_argument("--seed", type=int, default=None, help="Seed for the engine and the generator (separate streams)")
    p.add_argument("--verify", choices=VERIFY_MODES, default="none", help="Oracle checks")
    p.add_argument("--stats-out", type=str, default=None, help="Write the statistics document here instead of stdout")
    p.add_argument("--c-sub", type=float, default=None, help="Subsettle iterations per phase factor")
    p.add_argument("--settle-cap", type=int, default=None, help="Max subsettle repetitions per settle")
    p.add_argument("--initial-N", dest="initial_N", type=int, default=None, help="Initial capacity bound N")
    p.add_argument("--c-luby", type=int, default=None, help="Luby round cap factor")
    p.add_argument("--mu-const", type=float, default=None, help="Constant in the short-epoch threshold")
    p.add_argument("--config", type=str, default=None, help="YAML config (default: configs/default.yaml if exists)")
    p.add_argument("--log-level", type=str, default=None, help="Log level for stderr (DEBUG/INFO/WARNING/...)")
    return p


def configure_logging(level: str, log_file: Optional[str] = None) -> None:
    """stderr シンク（と任意のファイルシンク）を設定する。"""

    logger.remove()
    try:
        logger.add(sys.stderr, level=level.upper())
        if log_file:
            logger.add(log_file, level=level.upper(), rotation="1 day", retention=7)
    except ValueError as e:
        logger.add(sys.stderr, level=DEFAULT_LOG_LEVEL)
        raise ConfigError(f"invalid log level {level!r}") from e


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "r": args.r,
        "seed": args.seed,
        "c_sub": args.c_sub,
        "settle_repeat_cap": args.settle_cap,
        "N": args.initial_N,
        "c_luby": args.c_luby,
        "mu_const": args.mu_const,
    }


def _load_batches(args: argparse.Namespace, settings_path: Optional[Path]) -> Tuple[Config, List[UpdateBatch]]:
    overrides = _overrides(args)
    if args.input:
        try:
            text = Path(args.input).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read stream {args.input}: {e}") from e
        raw = parse_stream(text)
        vertices = {v for b in raw for e in b.insertions + b.deletions for v in e}
        config = load_config(settings_path, overrides, defaults={"N": default_capacity(len(vertices))})
        return config, parse_stream(text, config.r)

    config = load_config(settings_path, overrides, defaults={"N": default_capacity(args.n)})
    spec = WorkloadSpec(
        generator=args.generate,
        n=args.n,
        r=config.r,
        batch_count=args.batches,
        batch_size=args.batch_size,
        insert_ratio=args.insert_ratio,
        seed=config.seed,
    )
    return config, generate(spec)


def _verify(matcher: DynamicMatcher, when: str) -> List[Violation]:
    active = matcher.active_edges()
    found = audit(matcher) + check_ratio(len(matcher.matching()), active, matcher.config.r)
    for v in found:
        logger.error("verification failed {}: {}", when, v)
    return found


def run(args: argparse.Namespace) -> int:
    load_env_file()
    settings_path = Path(args.config) if args.config else default_config_path()
    settings = read_yaml(settings_path) if settings_path else {}
    level = args.log_level or os.getenv(ENV_PREFIX + "LOG_LEVEL") or settings.get("log_level") or DEFAULT_LOG_LEVEL
    configure_logging(str(level), settings.get("log_file"))

    config, batches = _load_batches(args, settings_path)
    logger.info("start: {} batches, r={} N={} L={} seed={}", len(batches), config.r, config.N, config.L, config.seed)

    matcher = DynamicMatcher(config)
    out = sys.stdout
    for batch in batches:
        report = matcher.apply_batch(batch)
        for record in report.deltas():
            out.write(dumps_record(record) + "\n")
        if args.verify == "every-batch" and _verify(matcher, f"after batch {report.index}"):
            return EXIT_VERIFY
    if args.verify == "final" and _verify(matcher, "at end of stream"):
        return EXIT_VERIFY

    stats = matcher.report()
    for level_id in short_epoch_violations(matcher.epochs.level_stats(matcher.config.mu), matcher.config.N):
        logger.warning("short-epoch fraction at level {} is above its envelope", level_id)
    if args.stats_out:
        save_json(Path(args.stats_out), stats)
    else:
        out.write(dumps_record(stats) + "\n")
    out.flush()
    logger.info(
        "done: {} batches, {} updates, matching size {}, total work {}",
        matcher.batch_index,
        matcher.updates,
        len(matcher.matching()),
        matcher.meter.total_work,
    )
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI エントリポイント。終了コードを返す。"""

    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except InputError as e:
        logger.error("input error: {}", e)
        return EXIT_INPUT
    except InternalError as e:
        logger.error("internal error ({}): {}", type(e).__name__, e)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
