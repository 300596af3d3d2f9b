"""
受け入れ基準をまとめて実行するスクリプト。

各基準ごとに PASS / FAIL（μ-short のみ WARN）を 1 行ログに出します。
既定は手元で数分の規模。--quick で小さく、--seeds / --batches で調整できます。

例:
    python scripts/run_acceptance.py --quick
    python scripts/run_acceptance.py --seeds 10 --batches 200 --batch-size 512 --stats-out runs/acceptance.json
"""

import argparse
import contextlib
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
from loguru import logger

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from hyper_match.cli import main as cli_main
from hyper_match.config import Config, default_capacity
from hyper_match.engine import DynamicMatcher, UpdateBatch
from hyper_match.errors import HyperMatchError
from hyper_match.oracle import audit, check_ratio
from hyper_match.report import short_epoch_violations
from hyper_match.stream import WorkloadSpec, generate
from hyper_match.utils import save_json


def _reset_logging() -> None:
    # CLI 実行がシンクを差し替えるため、元の stderr シンクに戻す
    logger.remove()
    logger.add(sys.stderr, level="INFO")


@dataclass
class Outcome:
    name: str
    passed: bool
    detail: str
    soft: bool = False
    data: Dict[str, Any] = field(default_factory=dict)


def _engine(n: int, r: int, seed: int, updates: int = 0) -> DynamicMatcher:
    # 挿入数も容量に含め、計測中のバッチで再構築が起きないようにする
    return DynamicMatcher(Config(r=r, N=default_capacity(n + updates), seed=seed))


def _random_edges(n: int, k: int, seed: int) -> List[List[int]]:
    """n 頂点上の相異なる k 本の通常辺。"""

    rng = np.random.default_rng(seed)
    seen = set()
    out: List[List[int]] = []
    while len(out) < k:
        a, b = sorted(int(x) + 1 for x in rng.choice(n, size=2, replace=False))
        if (a, b) not in seen:
            seen.add((a, b))
            out.append([a, b])
    return out


def stress(args: argparse.Namespace) -> List[Outcome]:
    """正当性ストレス・進捗補題・settle 反復数・μ-short をまとめて評価する。"""

    violations = 0
    failures: List[str] = []
    repetitions: List[int] = []
    mu_warnings: List[str] = []
    for r in (2, 3, 5):
        for n in (50, 200):
            for seed in range(args.seeds):
                spec = WorkloadSpec("uniform-mix", n=n, r=r, batch_count=args.batches, batch_size=args.batch_size, seed=seed)
                matcher = _engine(n, r, seed)
                try:
                    for batch in generate(spec):
                        matcher.apply_batch(batch)
                        found = audit(matcher)
                        if found:
                            violations += len(found)
                            failures.append(f"r={r} n={n} seed={seed}: {found[0]}")
                            break
                except HyperMatchError as e:
                    failures.append(f"r={r} n={n} seed={seed}: {type(e).__name__}: {e}")
                    continue
                repetitions.extend(matcher.settle_stats.repetitions)
                levels = matcher.epochs.level_stats(matcher.config.mu)
                for level in short_epoch_violations(levels, matcher.config.N):
                    mu_warnings.append(f"r={r} n={n} seed={seed} level={level}")

    out = [
        Outcome(
            "stress",
            not failures,
            f"{violations} violations, {len(failures)} failing runs" + (f" (first: {failures[0]})" if failures else ""),
        ),
        Outcome(
            "progress",
            not any("ProgressViolation" in f for f in failures),
            "settle progress assertion " + ("never fired" if not failures else "see stress failures"),
        ),
    ]
    if repetitions:
        mean = sum(repetitions) / len(repetitions)
        ok = mean <= 3.0 and max(repetitions) <= 20
        detail = f"{len(repetitions)} settles, mean repetitions {mean:.2f}, max {max(repetitions)}"
        if len(repetitions) < 200:
            detail += " (fewer than 200 settles recorded)"
        out.append(Outcome("settle-termination", ok, detail))
    else:
        out.append(Outcome("settle-termination", True, "no settle invocations recorded"))
    out.append(
        Outcome(
            "mu-short",
            not mu_warnings,
            f"{len(mu_warnings)} levels above the envelope" + (f" (first: {mu_warnings[0]})" if mu_warnings else ""),
            soft=True,
        )
    )
    return out


def depth_scaling(args: argparse.Namespace) -> Outcome:
    n, r = 200, 2
    sizes = (16, 256, 4096) if not args.quick else (16, 256)
    means: Dict[int, float] = {}
    worst_ratio = 0.0
    any_rebuild = False
    for k in sizes:
        depths = []
        for seed in range(5):
            matcher = _engine(n, r, seed, updates=max(sizes))
            report = matcher.apply_batch(UpdateBatch(insertions=_random_edges(n, k, seed)))
            cfg = matcher.config
            envelope = 64 * cfg.L * math.log2(cfg.alpha) * math.log2(cfg.N) ** 3
            worst_ratio = max(worst_ratio, report.depth / envelope)
            depths.append(report.depth)
            any_rebuild = any_rebuild or report.rebuilt
        means[k] = sum(depths) / len(depths)
    spread = max(means.values()) / max(1.0, min(means.values()))
    ok = spread <= 3.0 and worst_ratio <= 1.0 and not any_rebuild
    detail = ", ".join(f"k={k}: {d:.0f}" for k, d in means.items())
    return Outcome("depth-scaling", ok, f"{detail}; max/min {spread:.2f}; envelope use {worst_ratio:.4f}")


def work_scaling(args: argparse.Namespace) -> Outcome:
    totals = (2**10, 2**12) if not args.quick else (2**8, 2**10)
    amortized: Dict[int, float] = {}
    for m in totals:
        batch_size = 64
        spec = WorkloadSpec(
            "insert-all-then-delete-all", n=256, r=2, batch_count=2 * (m // 2 // batch_size), batch_size=batch_size, seed=1
        )
        matcher = _engine(256, 2, 1)
        for batch in generate(spec):
            matcher.apply_batch(batch)
        amortized[m] = matcher.meter.total_work / max(1, matcher.updates)
    small, large = amortized[totals[0]], amortized[totals[1]]
    ok = large <= 4.0 * small
    return Outcome("work-scaling", ok, f"amortized work {small:.1f} -> {large:.1f} (ratio {large / max(small, 1e-9):.2f})")


def static_insert(args: argparse.Namespace) -> Outcome:
    m = 2**12 if not args.quick else 2**10
    n = 200
    matcher = _engine(n, 2, 0, updates=m)
    report = matcher.apply_batch(UpdateBatch(insertions=_random_edges(n, m, 0)))
    cfg = matcher.config
    envelope = 64 * cfg.L * math.log2(cfg.alpha) * math.log2(cfg.N) ** 3
    found = audit(matcher)
    rounds = matcher.luby_stats.max_rounds
    ok = not found and report.depth <= envelope and rounds <= 4 * math.log2(m) + 8
    return Outcome("static-insert", ok, f"{len(found)} violations, depth {report.depth}, luby rounds {rounds}")


def ratio(args: argparse.Namespace) -> Outcome:
    instances = 500 if not args.quick else 100
    rng = np.random.default_rng(7)
    failures = 0
    for i in range(instances):
        r = int(rng.integers(2, 4))
        matcher = _engine(10, r, i)
        spec = WorkloadSpec("hypergraph-random", n=10, r=r, batch_count=4, batch_size=6, insert_ratio=0.8, seed=i)
        for batch in generate(spec):
            matcher.apply_batch(batch)
        edges = matcher.active_edges()
        if len(edges) > 24:
            continue
        if check_ratio(len(matcher.matching()), edges, r):
            failures += 1
    return Outcome("ratio", failures == 0, f"{failures} of {instances} instances below 1/r")


def reproducibility(args: argparse.Namespace) -> Outcome:
    argv = ["--generate", "uniform-mix", "--n", "60", "--r", "3", "--batches", "20", "--batch-size", "32", "--seed", "5"]
    outputs = []
    for _ in range(2):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = cli_main(argv + ["--log-level", "WARNING"])
        outputs.append((code, buf.getvalue()))
    _reset_logging()
    ok = outputs[0] == outputs[1] and outputs[0][0] == 0
    return Outcome("reproducibility", ok, f"{len(outputs[0][1])} bytes of output, identical={outputs[0] == outputs[1]}")


def main() -> None:
    p = argparse.ArgumentParser(description="Acceptance checks for hyper-match")
    p.add_argument("--seeds", type=int, default=10, help="Seeds per (r, n) in the stress suite")
    p.add_argument("--batches", type=int, default=200, help="Batches per stress run")
    p.add_argument("--batch-size", type=int, default=512, help="Updates per stress batch")
    p.add_argument("--quick", action="store_true", help="Smaller scale for a fast smoke run")
    p.add_argument("--stats-out", type=str, default=None, help="Write outcomes as JSON")
    args = p.parse_args()
    if args.quick:
        args.seeds, args.batches, args.batch_size = 2, 20, 64

    outcomes = stress(args)
    outcomes += [depth_scaling(args), work_scaling(args), static_insert(args), ratio(args), reproducibility(args)]

    failed = 0
    for o in outcomes:
        if o.passed:
            logger.info("PASS {}: {}", o.name, o.detail)
        elif o.soft:
            logger.warning("WARN {}: {}", o.name, o.detail)
        else:
            failed += 1
            logger.error("FAIL {}: {}", o.name, o.detail)
    if args.stats_out:
        save_json(Path(args.stats_out), [{"name": o.name, "passed": o.passed, "detail": o.detail} for o in outcomes])
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
