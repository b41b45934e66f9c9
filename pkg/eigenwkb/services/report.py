"""Scenario suites from a JSON run configuration: CSV tables, a manifest and
an exit code reflecting the acceptance thresholds."""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Tuple, Union
import csv
import json
import logging
import time

from pydantic import ValidationError

from eigenwkb import __version__
from eigenwkb.config import settings
from eigenwkb.models.schemas import RunConfig, ScenarioConfig
from eigenwkb.services.cache_manager import cache_manager
from eigenwkb.services.experiments import ExperimentResult, ExperimentRunner, ResultRow, cached_context, operator_key
from eigenwkb.services.scenarios import Scenario, build_operator
from eigenwkb.utils.codec import format_real, parse_point
from eigenwkb.utils.errors import ConfigError, EigenWKBError

logger = logging.getLogger(__name__)


@dataclass
class RunReport:
    manifest: Dict[str, Any]
    exit_code: int
    files: List[Path] = field(default_factory=list)


def _line_of(text: str, loc: Tuple[Any, ...]) -> Optional[int]:
    """Best-effort source line of a pydantic error location: string keys are
    searched in order, an integer index i skips to the (i+1)-th occurrence of
    the key that follows it."""
    if not text:
        return None
    cursor = 0
    skip = 0
    found = None
    for part in loc:
        if isinstance(part, int):
            skip = part
            continue
        needle = f'"{part}"'
        pos = text.find(needle, cursor)
        for _ in range(skip):
            if pos < 0:
                break
            pos = text.find(needle, pos + 1)
        skip = 0
        if pos < 0:
            break
        cursor = pos + len(needle)
        found = pos
    if found is None:
        return None
    return text.count("\n", 0, found) + 1


def load_config(source: Union[str, Path, Dict[str, Any]]) -> Tuple[RunConfig, str]:
    """Parse and validate a run configuration, returning it with its raw text."""
    if isinstance(source, dict):
        text = json.dumps(source, indent=2)
    else:
        try:
            text = Path(source).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, line=e.lineno)
    try:
        return RunConfig.model_validate(data), text
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(first["loc"])
        raise ConfigError(first["msg"], line=_line_of(text, loc), field=".".join(str(p) for p in loc))


def load_scenario(cfg: ScenarioConfig, index: int, bits: int, text: str = "") -> Scenario:
    """Build the operator, then reject evaluation points inside its hull."""
    where = ("scenarios", index)
    try:
        op = build_operator(cfg.name, cfg.params)
    except (EigenWKBError, ValueError, OSError) as e:
        loc = where + ("params",)
        raise ConfigError(str(e), line=_line_of(text, loc), field=".".join(str(p) for p in loc))
    z_grid = [parse_point(z) for z in cfg.z_grid]
    ctx = cached_context(op, bits)
    for k, (raw, z) in enumerate(zip(cfg.z_grid, z_grid)):
        if ctx.hull.contains(complex(float(z[0]), float(z[1]))):
            loc = where + ("z_grid", k)
            raise ConfigError(f"z = {raw} lies inside the convex hull of the zeros of rho_M",
                              line=_line_of(text, where + ("z_grid",)),
                              field=".".join(str(p) for p in loc))
    return Scenario(name=cfg.name, op=op, n_grid=list(cfg.n_grid), z_grid=z_grid,
                    bits=bits, order=cfg.order, params=dict(cfg.params))


def _parts(x: Any) -> Tuple[Any, Any]:
    if hasattr(x, "imag") and hasattr(x, "real"):
        return x.real, x.imag
    return x, 0


def row_to_record(row: ResultRow, bits: int) -> Dict[str, str]:
    record = {
        "scenario": row.scenario,
        "n": str(row.n),
        "z_re": format_real(row.z[0], bits),
        "z_im": format_real(row.z[1], bits),
    }
    if row.error is not None:
        record.update({"measured_re": "", "measured_im": "", "predicted_re": "",
                       "predicted_im": "", "rel_error": f"error: {row.error}"})
        return record
    m_re, m_im = _parts(row.measured)
    p_re, p_im = _parts(row.predicted)
    record.update({
        "measured_re": format_real(m_re, bits),
        "measured_im": format_real(m_im, bits),
        "predicted_re": format_real(p_re, bits),
        "predicted_im": format_real(p_im, bits),
        "rel_error": format_real(row.rel_error, bits),
    })
    return record


def write_rows(stream: TextIO, rows: List[ResultRow], bits: int) -> None:
    writer = csv.DictWriter(stream, fieldnames=settings.CSV_COLUMNS)
    writer.writeheader()
    for row in sorted(rows, key=lambda r: r.sort_key):
        writer.writerow(row_to_record(row, bits))


def write_csv(path: Path, rows: List[ResultRow], bits: int) -> None:
    with open(path, "w", newline="") as f:
        write_rows(f, rows, bits)


def csv_rows(result: ExperimentResult) -> List[ResultRow]:
    if result.name == "cauchy":
        return [r for r in result.rows if r.aux.get("j") == 1]
    return result.rows


def top_degree_error(result: ExperimentResult, j: Optional[int] = None) -> Optional[float]:
    """Largest rel_error among the rows of the top degree; inf when one of
    them is an error record."""
    rows = [r for r in result.rows if j is None or r.aux.get("j") == j]
    if not rows:
        return None
    top = max(r.n for r in rows)
    rows = [r for r in rows if r.n == top]
    if any(r.error is not None for r in rows):
        return float("inf")
    return max(float(r.rel_error) for r in rows)


def _threshold_measures(results: Dict[str, ExperimentResult]) -> Dict[str, Optional[float]]:
    measures = {name: top_degree_error(res) for name, res in results.items() if name != "cauchy"}
    if "zeros" in results:
        # zeros accumulate on the hull, so they are measured against all of it
        measures["zeros"] = results["zeros"].summary.get("hausdorff_to_hull")
    if "cauchy" in results:
        measures["cauchy"] = top_degree_error(results["cauchy"], j=1)
        measures["cauchy_j2"] = top_degree_error(results["cauchy"], j=2)
    return measures


def run_all(source: Union[str, Path, Dict[str, Any]], output_dir: Union[str, Path] = None,
            bits: int = None) -> RunReport:
    config, text = load_config(source)
    out = Path(output_dir or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    thresholds = config.thresholds.model_dump(exclude_none=True)
    manifest: Dict[str, Any] = {
        "version": __version__,
        "config": json.loads(text),
        "thresholds": thresholds,
        "scenarios": [],
        "violations": [],
    }
    files: List[Path] = []
    seen: Dict[str, int] = {}
    started = time.perf_counter()

    for index, cfg in enumerate(config.scenarios):
        run_bits = bits or cfg.bits or config.bits or settings.HARNESS_BITS
        scenario = load_scenario(cfg, index, run_bits, text)
        label = cfg.label or cfg.name
        if label in seen:
            seen[label] += 1
            label = f"{label}{seen[label]}"
        else:
            seen[label] = 0
        logger.info("scenario %s (%s) at %d bits", label, cfg.name, run_bits)
        runner = ExperimentRunner(scenario)
        entry: Dict[str, Any] = {
            "label": label,
            "name": cfg.name,
            "params": cfg.params,
            "operator_hash": operator_key(scenario.op),
            "bits": run_bits,
            "n_grid": scenario.n_grid,
            "z_grid": cfg.z_grid,
            "experiments": {},
        }
        results: Dict[str, ExperimentResult] = {}
        for name in cfg.experiments:
            t0 = time.perf_counter()
            result = runner.run(name)
            elapsed = time.perf_counter() - t0
            for row in result.rows:
                row.scenario = label
            path = out / f"{label}_{name}.csv"
            write_csv(path, csv_rows(result), run_bits)
            files.append(path)
            results[name] = result
            entry["experiments"][name] = {
                "file": path.name,
                "rows": len(result.rows),
                "errors": sum(1 for r in result.rows if r.error is not None),
                "max_rel_error": result.max_rel_error,
                "wall_time": round(elapsed, 3),
                "summary": result.summary,
            }
        for key, measure in _threshold_measures(results).items():
            cap = thresholds.get(key)
            if cap is None or measure is None:
                continue
            entry["experiments"].get(key.split("_j")[0], {}).setdefault("top_degree_error", {})[key] = measure
            if not measure <= cap:
                violation = {"scenario": label, "threshold": key, "cap": cap, "measured": measure}
                manifest["violations"].append(violation)
                logger.warning("threshold %s violated in %s: %.3g > %.3g", key, label, measure, cap)
        manifest["scenarios"].append(entry)

    manifest["wall_time"] = round(time.perf_counter() - started, 3)
    manifest["cache"] = cache_manager.stats()
    exit_code = 1 if manifest["violations"] else 0
    manifest["exit_code"] = exit_code
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, default=str))
    files.append(manifest_path)
    return RunReport(manifest=manifest, exit_code=exit_code, files=files)
