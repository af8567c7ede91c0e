"""Experiment orchestration: configuration, execution, persistence.

A run configuration is a JSON document:

    {
      "name": "smoke",                      # optional run name
      "output_dir": "runs",                 # optional; else $GDNLS_LAB_OUT or ./runs
      "seed_override": 5,                   # optional; caps seeds per case
      "cases": [
        "maximal_g4",                       # builtin case id, or
        {"id": "maximal_g4", "seeds": 3},   # builtin with overrides, or
        {"id": "my_case", "family": "maximal",
         "grid": {"box_length": 100.5, "nx": 2048,
                  "t_min": -1.0, "t_max": 1.0, "nt": 256},
         "sweep": [1, 2, 4], "seeds": 5,
         "params": {"gamma": 4}, "contract": {"uniform": true}}
      ]
    }

Each run writes, under <output_dir>/<name>/:

    config.json        the configuration snapshot actually executed
    tables/<case>.csv  raw rows, columns case_id,parameter,seed,ratio,lhs,rhs
    fits.json          per-case fits, thresholds, verdicts
    provenance.json    version, timestamp, seed policy
    fields/...         |u(x,t)| matrices for cases that produce them (CSV)

Exit status: 0 all contracted cases pass, 1 any contract fails, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .errors import ConfigError, GdnlsError, PolynomialParseError, UnknownCaseError
from .grid import GridSpec
from .lab import (CaseResult, EstimateCase, builtin_cases, describe_case,
                  list_cases, measure)
from .nonlinearity import parse_polynomial

CSV_COLUMNS = ("case_id", "parameter", "seed", "ratio", "lhs", "rhs")


@dataclass
class RunConfig:
    """Validated run configuration."""

    name: str
    output_dir: Path
    cases: List[EstimateCase]
    seed_override: Optional[int] = None
    raw: dict = field(default_factory=dict)


@dataclass
class RunRecord:
    """Paths and verdicts of a completed run."""

    directory: Path
    passed: bool
    fits: dict


def _default_output_root() -> Path:
    return Path(os.environ.get("GDNLS_LAB_OUT", "runs"))


def _grid_from(obj: dict, where: str) -> GridSpec:
    try:
        return GridSpec(box_length=float(obj["box_length"]), nx=int(obj["nx"]),
                        t_min=float(obj["t_min"]), t_max=float(obj["t_max"]),
                        nt=int(obj["nt"]))
    except KeyError as e:
        raise ConfigError(f"{where}.grid", f"missing key {e.args[0]!r}")
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}.grid", str(e))


def _case_from(obj, index: int, registry) -> EstimateCase:
    where = f"cases[{index}]"
    if isinstance(obj, str):
        if obj not in registry:
            raise ConfigError(where, f"unknown builtin case {obj!r}")
        return registry[obj]
    if not isinstance(obj, dict):
        raise ConfigError(where, "must be a case id string or an object")
    if "id" not in obj:
        raise ConfigError(where, "missing 'id'")
    cid = obj["id"]
    if cid in registry and "family" not in obj:
        case = registry[cid]
        if "seeds" in obj:
            case = replace(case, seeds=int(obj["seeds"]))
        if "sweep" in obj:
            case = replace(case, sweep=tuple(float(v) for v in obj["sweep"]))
        return case
    for key in ("family", "grid", "sweep"):
        if key not in obj:
            raise ConfigError(where, f"missing {key!r} for a custom case")
    params = dict(obj.get("params", {}))
    if "polynomial" in params:
        try:
            parse_polynomial(params["polynomial"])
        except PolynomialParseError as e:
            raise ConfigError(f"{where}.params.polynomial", str(e))
    return EstimateCase(
        id=cid, family=obj["family"], grid=_grid_from(obj["grid"], where),
        sweep=tuple(float(v) for v in obj["sweep"]),
        seeds=int(obj.get("seeds", 5)), params=params,
        contract=dict(obj.get("contract", {})),
        description=obj.get("description", ""))


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    registry = builtin_cases()
    entries = raw.get("cases", [])
    if not isinstance(entries, list):
        raise ConfigError("cases", "must be a list")
    cases = [_case_from(obj, i, registry) for i, obj in enumerate(entries)]
    name = raw.get("name", time.strftime("run-%Y%m%d-%H%M%S"))
    out = Path(raw["output_dir"]) if "output_dir" in raw else _default_output_root()
    seed_override = raw.get("seed_override")
    if seed_override is not None:
        seed_override = int(seed_override)
        cases = [replace(c, seeds=min(c.seeds, seed_override)) for c in cases]
    return RunConfig(name=name, output_dir=out, cases=cases,
                     seed_override=seed_override, raw=raw)


def load_config(path: Path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("config", f"no such file: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"invalid JSON: {e}")
    return parse_config(raw)


def _write_csv(path: Path, rows: List[dict]):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in CSV_COLUMNS})


def _field_artifacts(result: CaseResult, directory: Path):
    """Persist |u(x,t)| for heatmap rendering when a case carries a field."""
    trace = result.extras.get("field_magnitude")
    if trace is None:
        return
    fdir = directory / "fields"
    fdir.mkdir(exist_ok=True)
    np.savetxt(fdir / f"{result.case.id}_absu.csv", trace, delimiter=",")
    g = result.case.grid
    meta = {"case_id": result.case.id, "box_length": g.box_length,
            "t_min": g.t_min, "t_max": g.t_max,
            "shape": [int(s) for s in trace.shape]}
    (fdir / f"{result.case.id}_absu.json").write_text(json.dumps(meta, indent=1))


def execute(config: RunConfig, jobs: int = 1) -> RunRecord:
    directory = config.output_dir / config.name
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "tables").mkdir(exist_ok=True)

    snapshot = dict(config.raw)
    snapshot.setdefault("name", config.name)
    (directory / "config.json").write_text(json.dumps(snapshot, indent=1))

    results = _run_cases(config.cases, jobs)

    fits = {}
    all_passed = True
    for result in results:
        _write_csv(directory / "tables" / f"{result.case.id}.csv", result.rows)
        _field_artifacts(result, directory)
        fits[result.case.id] = _jsonable(result.fit_summary())
        if result.case.contract and not result.passed:
            all_passed = False
    (directory / "fits.json").write_text(json.dumps(fits, indent=1))

    provenance = {
        "artifact_version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "numpy": np.__version__,
        "seed_override": config.seed_override,
        "seed_policy": "per (case, parameter, seed) counter-based generators",
        "cases": [c.id for c in config.cases],
    }
    (directory / "provenance.json").write_text(json.dumps(provenance, indent=1))
    return RunRecord(directory=directory, passed=all_passed, fits=fits)


def _run_cases(cases: List[EstimateCase], jobs: int) -> List[CaseResult]:
    if jobs <= 1 or len(cases) <= 1:
        return [measure(c) for c in cases]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(measure, cases))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and obj == float("inf"):
        return "inf"
    if isinstance(obj, GridSpec):
        return {"box_length": obj.box_length, "nx": obj.nx,
                "t_min": obj.t_min, "t_max": obj.t_max, "nt": obj.nt}
    return obj


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gdnls-lab",
        description="measurement laboratory for dispersive estimates and "
                    "small-data contraction on a periodic spectral grid")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a run configuration")
    run_p.add_argument("--config", required=True, help="path to a JSON config")
    run_p.add_argument("--out", help="output directory root (overrides config)")
    run_p.add_argument("--seed-override", type=int,
                       help="cap the number of seeds per case")
    run_p.add_argument("--jobs", type=int, default=1,
                       help="number of worker processes for cases")

    sub.add_parser("list-cases", help="list builtin estimate cases")

    desc_p = sub.add_parser("describe", help="describe one estimate case")
    desc_p.add_argument("case_id")

    args = parser.parse_args(argv)

    try:
        if args.command == "list-cases":
            for cid in list_cases():
                print(cid)
            return 0
        if args.command == "describe":
            print(describe_case(args.case_id))
            return 0
        config = load_config(Path(args.config))
        if args.out:
            config.output_dir = Path(args.out)
        if args.seed_override:
            config = replace_seeds(config, args.seed_override)
        record = execute(config, jobs=args.jobs)
        for cid, fit in record.fits.items():
            verdict = "pass" if fit.get("passed") else (
                "FAIL" if builtin_safe_contract(fit) else "info")
            print(f"{verdict:5s} {cid}: max_ratio={fit.get('max_ratio', 0):.4g}")
        print(f"run record: {record.directory}")
        return 0 if record.passed else 1
    except ConfigError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except UnknownCaseError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except GdnlsError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def replace_seeds(config: RunConfig, cap: int) -> RunConfig:
    cases = [replace(c, seeds=min(c.seeds, cap)) for c in config.cases]
    return RunConfig(config.name, config.output_dir, cases, cap, config.raw)


def builtin_safe_contract(fit: dict) -> bool:
    return bool(fit.get("contract"))


if __name__ == "__main__":
    sys.exit(main())
