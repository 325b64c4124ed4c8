"""Command-line driver: solve, certify and report over a corpus of circuits.

    ftalloc --corpus bundled --out results/
    ftalloc --profile circuit.json --restarts 1 --seed 7
    ftalloc --corpus profiles/ --oracle "exec:python -m my_estimator_bridge" --out results/
    ftalloc --from-manifest results/aggregate.json --out rerun/
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import math
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from . import __version__, corpus_dir
from .bridge import ExternalOracle
from .cost_model import CircuitProfile, SyntheticOracle, load_profile
from .errors import OracleError, SolveError
from .simplex import GameConfig
from .solver import SolveResult, solve
from .verifier import certify_nash, grid_minimize, improvement

log = logging.getLogger("ftalloc")

CSV_HEADER = ["name", "Q_uniform", "R_uniform", "Q_eq", "R_eq", "improvement_pct", "sweeps", "converged"]
AGGREGATION_NOTE = "unweighted mean over circuit instances"
CERTIFY_SAMPLES = 2001


@dataclass
class AggregateSummary:
    count: int
    mean_improvement_pct: float
    median_improvement_pct: float
    min_improvement_pct: float
    max_improvement_pct: float
    converged: int
    oracle_evaluations: int
    failed: list[str]

    @classmethod
    def from_rows(cls, rows: list[dict], evaluations: int, failed: list[str]) -> "AggregateSummary":
        pcts = [float(r["improvement_pct"]) for r in rows]
        if not pcts:
            return cls(0, math.nan, math.nan, math.nan, math.nan, 0, evaluations, failed)
        return cls(
            count=len(pcts),
            mean_improvement_pct=statistics.fmean(pcts),
            median_improvement_pct=statistics.median(pcts),
            min_improvement_pct=min(pcts),
            max_improvement_pct=max(pcts),
            converged=sum(1 for r in rows if r["converged"] == "true"),
            oracle_evaluations=evaluations,
            failed=failed,
        )


def make_oracle(choice: str):
    if choice == "synthetic":
        return SyntheticOracle()
    if choice.startswith("exec:"):
        return ExternalOracle(choice[len("exec:"):])
    raise ValueError(f"unknown oracle {choice!r}; use 'synthetic' or 'exec:<command>'")


def _finite(x: float) -> Optional[float]:
    return x if math.isfinite(x) else None


def solve_record(result: SolveResult) -> dict:
    return {
        "s_star": list(result.s_star.as_tuple()),
        "cost_star": _finite(result.c_star),
        "cost_uniform": _finite(result.uniform_cost),
        "winning_restart": result.winning_restart,
        "oracle_evaluations": result.evaluations,
        "restarts": [
            {
                "index": tr.index,
                "start": list(tr.start.as_tuple()),
                "start_cost": _finite(tr.start_cost),
                "converged": tr.converged,
                "error": tr.error,
                "sweeps": [
                    {"sweep": rec.index, "s": list(rec.allocation.as_tuple()),
                     "cost": _finite(rec.cost), "delta": _finite(rec.delta)}
                    for rec in tr.sweeps
                ],
            }
            for tr in result.restarts
        ],
    }


def analyze(oracle, profile: CircuitProfile, cfg: GameConfig, grid_check: Optional[float] = None) -> dict:
    """Solve one circuit and attach certificate, improvement and optional grid check."""
    result = solve(oracle, profile, cfg)
    report = improvement(oracle, profile, cfg, result)
    cert = certify_nash(oracle, profile, result.s_star, cfg, CERTIFY_SAMPLES)
    out = {
        "profile": profile.to_dict(),
        "improvement": report.to_dict(),
        "certificate": cert.to_dict(),
        "converged": result.all_converged,
        "sweeps": result.sweeps,
        "solve": solve_record(result),
    }
    if grid_check:
        g_s, g_c = grid_minimize(oracle, profile, cfg, grid_check)
        out["grid_check"] = {
            "resolution": grid_check,
            "s": list(g_s.as_tuple()),
            "cost": _finite(g_c),
            "solver_within_rel_1e-3": bool(result.c_star <= g_c * (1 + 1e-3)),
        }
    return out


def csv_row(rec: dict) -> dict:
    imp = rec["improvement"]
    return {
        "name": imp["name"],
        "Q_uniform": repr(float(imp["uniform"]["Q"])),
        "R_uniform": repr(float(imp["uniform"]["R_seconds"])),
        "Q_eq": repr(float(imp["equilibrium"]["Q"])),
        "R_eq": repr(float(imp["equilibrium"]["R_seconds"])),
        "improvement_pct": repr(float(imp["improvement_pct"])),
        "sweeps": str(rec["sweeps"]),
        "converged": "true" if rec["converged"] else "false",
    }


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def manifest(cfg: GameConfig, oracle_choice: str, files: list[Path]) -> dict:
    return {
        "config": cfg.to_dict(),
        "oracle": oracle_choice,
        "corpus": [str(f.resolve()) for f in files],
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "aggregation": AGGREGATION_NOTE,
    }


def run_files(
    files: list[Path],
    cfg: GameConfig,
    oracle_choice: str,
    out_path: Path,
    grid_check: Optional[float] = None,
    jobs: int = 1,
) -> AggregateSummary:
    out_path.mkdir(parents=True, exist_ok=True)
    man = manifest(cfg, oracle_choice, files)
    profiles, failed = [], []
    for f in files:
        try:
            profiles.append(load_profile(f))
        except (OSError, ValueError, TypeError) as exc:
            log.error("skipping %s: %s", f, exc)
            failed.append(str(f))

    oracle = make_oracle(oracle_choice)
    try:
        def work(p: CircuitProfile):
            try:
                return p, analyze(oracle, p, cfg, grid_check)
            except (SolveError, OracleError) as exc:
                log.error("circuit %s failed: %s", p.name, exc)
                return p, None

        if jobs > 1 and getattr(oracle, "reentrant", False):
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                done = list(pool.map(work, profiles))
        else:
            done = [work(p) for p in profiles]
    finally:
        if hasattr(oracle, "close"):
            oracle.close()

    records = []
    for p, rec in sorted(done, key=lambda item: item[0].name):
        if rec is None:
            failed.append(p.name)
            continue
        rec = {"manifest": man, **rec}
        (out_path / f"{p.name}.report.json").write_text(json.dumps(rec, indent=2) + "\n")
        records.append(rec)

    rows = [csv_row(r) for r in records]
    (out_path / "summary.csv").write_text(render_csv(rows))
    evals = sum(r["solve"]["oracle_evaluations"] for r in records)
    summary = AggregateSummary.from_rows(rows, evals, failed)
    agg = {"summary": asdict(summary), "manifest": man}
    (out_path / "aggregate.json").write_text(json.dumps(agg, indent=2) + "\n")
    return summary


def corpus_files(path: Path) -> list[Path]:
    return sorted(p for p in path.glob("*.json") if p.is_file())


def run_corpus(corpus: Path, cfg: GameConfig, oracle_choice: str, out_path: Path, **kw) -> AggregateSummary:
    files = corpus_files(Path(corpus))
    if not files:
        raise ValueError(f"no profile files (*.json) in {corpus}")
    return run_files(files, cfg, oracle_choice, Path(out_path), **kw)


def run_single(profile_path: Path, cfg: GameConfig, oracle_choice: str, grid_check: Optional[float] = None) -> dict:
    profile = load_profile(profile_path)
    oracle = make_oracle(oracle_choice)
    try:
        rec = analyze(oracle, profile, cfg, grid_check)
    finally:
        if hasattr(oracle, "close"):
            oracle.close()
    return {"manifest": manifest(cfg, oracle_choice, [Path(profile_path)]), **rec}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ftalloc",
        description="Split a fault-tolerant error budget across logical, T-state and rotation errors "
        "by iterated best response, and report the gain over the uniform split.",
    )
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--corpus", help="directory of profile JSON files, or 'bundled'")
    src.add_argument("--profile", help="single profile JSON file; report goes to stdout")
    src.add_argument("--from-manifest", help="rerun the corpus and settings recorded in a report or aggregate.json")
    ap.add_argument("--out", default="ftalloc-out", help="output directory for corpus runs")
    d = GameConfig()
    ap.add_argument("--budget", type=float, default=d.epsilon_total)
    ap.add_argument("--weight", type=float, default=d.weight)
    ap.add_argument("--min-alloc", type=float, default=d.eps_min)
    ap.add_argument("--tol", type=float, default=d.tol_delta)
    ap.add_argument("--restarts", type=int, default=d.restarts)
    ap.add_argument("--max-sweeps", type=int, default=d.max_sweeps)
    ap.add_argument("--seed", type=int, default=d.rng_seed)
    ap.add_argument("--scan-points", type=int, default=d.scan_points,
                    help="grid points scanned per best response before Brent (0: Brent only)")
    ap.add_argument("--oracle", default="synthetic", help="'synthetic' or 'exec:<command>'")
    ap.add_argument("--grid-check", type=float, default=None, metavar="RESOLUTION",
                    help="also brute-force the simplex at this lattice spacing")
    ap.add_argument("--relative-delta", action="store_true", help="stop on relative rather than absolute cost change")
    ap.add_argument("--jobs", type=int, default=1, help="circuits solved concurrently (reentrant oracles only)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.from_manifest:
        man = json.loads(Path(args.from_manifest).read_text())["manifest"]
        cfg = GameConfig.from_dict(man["config"])
        files = [Path(f) for f in man["corpus"]]
        summary = run_files(files, cfg, man["oracle"], Path(args.out), grid_check=args.grid_check, jobs=args.jobs)
        print(json.dumps(asdict(summary), indent=2))
        return 0 if not summary.failed else 1

    try:
        cfg = GameConfig(
            epsilon_total=args.budget,
            eps_min=args.min_alloc,
            weight=args.weight,
            restarts=args.restarts,
            max_sweeps=args.max_sweeps,
            tol_delta=args.tol,
            rng_seed=args.seed,
            scan_points=args.scan_points,
            relative_delta=args.relative_delta,
        )
    except ValueError as exc:
        ap.error(str(exc))

    if args.profile:
        try:
            rec = run_single(Path(args.profile), cfg, args.oracle, args.grid_check)
        except (OSError, ValueError) as exc:
            log.error("cannot run %s: %s", args.profile, exc)
            return 1
        except (SolveError, OracleError) as exc:
            log.error("%s failed: %s", args.profile, exc)
            return 1
        print(json.dumps(rec, indent=2))
        return 0

    if not args.corpus:
        ap.error("one of --corpus, --profile or --from-manifest is required")
    corpus = corpus_dir() if args.corpus == "bundled" else Path(args.corpus)
    if not corpus_files(corpus):
        ap.error(f"empty corpus: no *.json profiles in {corpus}")
    summary = run_corpus(corpus, cfg, args.oracle, Path(args.out), grid_check=args.grid_check, jobs=args.jobs)
    print(json.dumps(asdict(summary), indent=2))
    return 0 if not summary.failed else 1


if __name__ == "__main__":
    sys.exit(main())
