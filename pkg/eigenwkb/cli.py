"""Command line entry point: ``python -m eigenwkb <verb> ...``."""
from pathlib import Path
from typing import Dict, List, Optional
import json
import sys

import typer
from rich.console import Console

from eigenwkb.config import settings
from eigenwkb.services import branch_geometry as bg
from eigenwkb.services.expansion_series import series_tables
from eigenwkb.services.experiments import ExperimentRunner, cached_context
from eigenwkb.services.operator_core import eigenpoly, ensure_valid, validate as validate_op
from eigenwkb.services.poly_core import Mode, exact
from eigenwkb.services.report import csv_rows, run_all as run_suite, write_csv, write_rows
from eigenwkb.services.scenarios import Scenario, build_operator
from eigenwkb.utils.codec import format_real, operator_from_json, parse_point, poly_to_json, scalar_to_json
from eigenwkb.utils.errors import ConfigError, EigenWKBError
from eigenwkb.utils.log_setup import setup_logging

app = typer.Typer(help="Eigenpolynomials of exactly solvable operators and their asymptotics.",
                  no_args_is_help=True)
err_console = Console(stderr=True)

USER_ERROR = 2
THRESHOLD_VIOLATED = 1


@app.callback()
def main(log_level: str = typer.Option(None, help="Logging level (default from EIGENWKB_LOG_LEVEL).")):
    setup_logging(log_level)


def _fail(e: Exception) -> None:
    err_console.print(f"[red]error:[/red] {e}")
    raise typer.Exit(code=USER_ERROR)


def _load_op(path: Path, mode: Mode = Mode.RATIONAL, bits: int = None):
    try:
        data = json.loads(path.read_text())
        return operator_from_json(data, mode, bits)
    except (OSError, ValueError, KeyError, TypeError) as e:
        _fail(ConfigError(f"cannot load operator from {path}: {e}"))


def _echo_json(payload, out: Optional[Path] = None) -> None:
    text = json.dumps(payload, indent=2)
    if out is None:
        typer.echo(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n")


def _parse_params(items: List[str]) -> Dict[str, object]:
    params: Dict[str, object] = {}
    for item in items:
        if "=" not in item:
            _fail(ConfigError(f"parameter '{item}' is not of the form key=value"))
        key, value = item.split("=", 1)
        params[key.strip()] = value.split(",") if "," in value else value.strip()
    return params


@app.command()
def solve(
    op: Path = typer.Option(..., "--op", help="Operator JSON file."),
    n: int = typer.Option(..., "--n", min=0, help="Degree of the eigenpolynomial."),
    mode: Mode = typer.Option(Mode.RATIONAL, "--mode"),
    bits: int = typer.Option(None, "--bits", help="Working precision in float mode."),
    out: Optional[Path] = typer.Option(None, "--out", help="JSON file; stdout when omitted."),
):
    """Monic eigenpolynomial Q_n and its eigenvalue."""
    bits = bits or settings.DEFAULT_BITS
    operator = _load_op(op, mode, bits)
    try:
        pair = eigenpoly(ensure_valid(operator), n)
    except EigenWKBError as e:
        _fail(e)
    _echo_json({
        "n": pair.n,
        "eigenvalue": scalar_to_json(pair.eigenvalue, bits),
        "Q": poly_to_json(pair.Q),
        "epsilon": scalar_to_json(pair.epsilon, bits) if pair.epsilon is not None else None,
    }, out)


@app.command()
def phi(
    op: Path = typer.Option(..., "--op", help="Operator JSON file."),
    z: str = typer.Option(..., "--z", help="Evaluation point 'RE,IM'."),
    order: int = typer.Option(0, "--order", min=0, max=1, help="0 for Phi0, 1 for Phi1."),
    bits: int = typer.Option(None, "--bits"),
):
    """Phi0 or Phi1 at z with its quadrature error estimate."""
    bits = bits or settings.DEFAULT_BITS
    operator = _load_op(op)
    try:
        ctx = cached_context(ensure_valid(operator), bits)
        point = exact(parse_point(z))
        result = bg.phi0(point, ctx) if order == 0 else bg.phi1(point, ctx)
    except (EigenWKBError, ValueError) as e:
        _fail(e)
    _echo_json({"order": order, "value": scalar_to_json(result.value, bits),
                "error": format_real(result.error, bits)})


@app.command()
def series(
    op: Path = typer.Option(..., "--op", help="Operator JSON file."),
    order: int = typer.Option(settings.SERIES_ORDER, "--order", min=0),
):
    """gamma, q and h tables as exact rational strings."""
    operator = _load_op(op)
    try:
        tables = series_tables(ensure_valid(operator), order)
    except EigenWKBError as e:
        _fail(e)
    _echo_json({
        "order": tables.order,
        "gamma": [scalar_to_json(g) for g in tables.gamma],
        "q": [[scalar_to_json(v) for v in row] for row in tables.q],
        "h": [scalar_to_json(v) for v in tables.h],
    })


@app.command()
def validate(op: Path = typer.Option(..., "--op", help="Operator JSON file.")):
    """Structural checks; exits 2 when the operator is invalid."""
    violations = validate_op(_load_op(op))
    _echo_json({"valid": not violations,
                "violations": [{"k": v.k, "condition": v.condition, "detail": v.detail} for v in violations]})
    if violations:
        raise typer.Exit(code=USER_ERROR)


def _run_experiment(experiment: str, scenario: str, params: List[str], op: Optional[Path],
                    degrees: List[int], points: List[str], bits: Optional[int], out: Optional[Path]):
    bits = bits or settings.HARNESS_BITS
    try:
        parsed = _parse_params(params)
        if op is not None:
            scenario, parsed = "custom", {**parsed, "file": str(op)}
        operator = build_operator(scenario, parsed)
        z_grid = [parse_point(z) for z in points]
        sc = Scenario(name=scenario, op=operator, n_grid=list(degrees), z_grid=z_grid, bits=bits, params=parsed)
        runner = ExperimentRunner(sc)
        for z in z_grid:
            bg.check_outside(exact(z), runner.ctx)
        result = runner.run(experiment)
    except (EigenWKBError, ValueError, OSError) as e:
        _fail(e)
    rows = csv_rows(result)
    if out is None:
        write_rows(sys.stdout, rows, bits)
    else:
        write_csv(out, rows, bits)
    if result.summary:
        err_console.print_json(json.dumps(result.summary, default=str))


def _experiment_command(experiment: str, help_text: str):
    def command(
        scenario: str = typer.Option("jacobi4", "--scenario", help=f"One of {settings.SCENARIOS}."),
        param: List[str] = typer.Option([], "--param", help="Scenario parameter key=value (repeatable)."),
        op: Optional[Path] = typer.Option(None, "--op", help="Operator JSON file (custom scenario)."),
        n: List[int] = typer.Option([10, 20, 40], "--n", help="Degree (repeatable)."),
        z: List[str] = typer.Option(["2,0"], "--z", help="Evaluation point 'RE,IM' (repeatable)."),
        bits: int = typer.Option(None, "--bits"),
        out: Optional[Path] = typer.Option(None, "--out", help="CSV file; stdout when omitted."),
    ):
        _run_experiment(experiment, scenario, param, op, n, z, bits, out)

    command.__doc__ = help_text
    return command


app.command("ratio-test")(_experiment_command("ratio", "Q_{n+1}(z)/Q_n(z) against exp(Phi0(z))."))
app.command("strong-asym")(_experiment_command("strong", "Q_n(z) against the asymptotic predictor."))
app.command("c1")(_experiment_command("c1", "Estimates of the first correction n (Q_n/predictor - 1)."))
app.command("cauchy")(_experiment_command("cauchy", "Normalized logarithmic derivative against w_1(z)."))
app.command("zeros")(_experiment_command("zeros", "Zeros of Q_n for the largest degree and their hull distance."))
app.command("nth-root")(_experiment_command("nth_root", "|Q_n(z)|^(1/n) against |exp(Phi0(z))|."))


@app.command("run-all")
def run_all(
    config: Path = typer.Option(..., "--config", help="Run configuration JSON."),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory (overrides the config)."),
    bits: int = typer.Option(None, "--bits"),
):
    """Run a scenario suite; exits 1 when a threshold is violated."""
    try:
        report = run_suite(config, out, bits)
    except EigenWKBError as e:
        _fail(e)
    for path in report.files:
        typer.echo(str(path))
    for v in report.manifest["violations"]:
        err_console.print(f"[yellow]threshold {v['threshold']} violated in {v['scenario']}: "
                          f"{v['measured']:.3g} > {v['cap']:.3g}[/yellow]")
    if report.exit_code:
        raise typer.Exit(code=THRESHOLD_VIOLATED)
