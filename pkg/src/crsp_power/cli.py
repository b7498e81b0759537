"""Command-line front end.

Usage:
    crsp-power analyze P1 --b2 0.2 --samples 100000 --seed 7
    crsp-power sweep P1 --param b2 --grid 0:0.5:0.1 --seed 7
    crsp-power entropy-table
    crsp-power catalog
"""

from __future__ import annotations

import os
import sys

import click
import numpy as np

from . import analysis, report
from .channels import CHANNEL_IDS
from .protocols import PROTOCOLS, DegenerateProtocolError, ProtocolError

SEED_ENV = "CRSP_POWER_SEED"
QUDIT_PROTOCOLS = ("P6", "P7")


def _fail(msg: str, code: int):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _params(protocol, b2, c, d, a2, N, M, dim, link, absent) -> dict:
    params = {"b2": b2, "c": c, "a2": a2, "N": N, "M": M, "link": link, "absent": absent}
    if protocol in QUDIT_PROTOCOLS:
        qd = dim if dim is not None else d
        if qd is not None:
            if float(qd) != int(qd):
                raise ProtocolError(f"qudit dimension must be an integer, got {qd}")
            qd = int(qd)
        params["d"] = qd
    else:
        if dim is not None:
            raise ProtocolError(f"{protocol} has no qudit dimension")
        params["d"] = d
    return {k: v for k, v in params.items() if v is not None}


def _seed(seed, samples):
    if seed is None and os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise ProtocolError(f"{SEED_ENV} is not an integer") from None
    if seed is None and samples > 0:
        raise ProtocolError(f"Monte Carlo needs --seed (or {SEED_ENV})")
    return seed


def parse_grid(spec: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    try:
        if ":" in spec:
            start, stop, step = (float(x) for x in spec.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 12) for i in range(n)]
        values = [float(x) for x in spec.split(",") if x.strip()]
        if not values:
            raise ValueError
        return values
    except ValueError:
        raise click.BadParameter(f"malformed grid {spec!r}; use start:stop:step or a,b,c",
                                 param_hint="--grid") from None


def protocol_options(f):
    opts = [
        click.option("--b2", type=float, help="MS controller-form weight b^2 (P1, P2)."),
        click.option("--c", type=float, help="MS coefficient c (P1, P2)."),
        click.option("--d", type=float, help="MS coefficient d (P1, P2) or qudit dimension (P6, P7)."),
        click.option("--a2", type=float, help="a^2 for MS (P1, P2) or PGHZ (P5)."),
        click.option("--N", "N", type=int, help="Number of target qubits/qudits (P3, P5, P6)."),
        click.option("--M", "M", type=int, help="Number of controllers (P5, P6)."),
        click.option("--dim", type=int, help="Qudit dimension (P6, P7)."),
        click.option("--link", type=int, help="GHZ-linked target qubit (P3)."),
        click.option("--absent", type=int, help="Index of the non-cooperating controller (P5, P6)."),
        click.option("--ensemble", type=click.Choice(["haar", "equatorial"]), default=None,
                     help="Target ensemble (default: haar; equatorial for P3)."),
        click.option("--samples", type=click.IntRange(min=0), default=10_000, show_default=True),
        click.option("--seed", type=int, default=None),
        click.option("--tol", type=float, default=analysis.ANALYTIC_TOL, show_default=True,
                     help="Verdict tolerance for closed-form averages."),
        click.option("--route", type=click.Choice(["mixer", "engine"]), default="mixer", show_default=True),
        click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


@click.group()
def cli():
    """Control power of controlled remote state preparation schemes."""


@cli.command()
@click.argument("protocol", type=click.Choice(sorted(PROTOCOLS)))
@protocol_options
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "text"]), default="json", show_default=True)
def analyze(protocol, b2, c, d, a2, N, M, dim, link, absent, ensemble, samples, seed, tol, route,
            workers, fmt):
    """Analyze one built-in protocol."""
    try:
        params = _params(protocol, b2, c, d, a2, N, M, dim, link, absent)
        seed = _seed(seed, samples)
        rep = analysis.analyze(protocol, params, ensemble, samples, seed, tol, route, workers)
    except (ProtocolError, ValueError) as e:
        _fail(str(e), 2)
    except (DegenerateProtocolError, np.linalg.LinAlgError, ArithmeticError) as e:
        _fail(str(e), 1)
    if fmt == "json":
        click.echo(report.to_json(rep))
    elif fmt == "csv":
        click.echo(report.to_csv([rep]), nl=False)
    else:
        click.echo(report.to_text(rep), nl=False)


@cli.command()
@click.argument("protocol", type=click.Choice(sorted(PROTOCOLS)))
@click.option("--param", required=True, help="Parameter to vary, e.g. b2, N, d.")
@click.option("--grid", required=True, help="start:stop:step (inclusive) or comma list.")
@protocol_options
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "text"]), default="csv", show_default=True)
def sweep(protocol, param, grid, b2, c, d, a2, N, M, dim, link, absent, ensemble, samples, seed,
          tol, route, workers, fmt):
    """Sweep one protocol parameter over a grid."""
    values = parse_grid(grid)
    try:
        params = _params(protocol, b2, c, d, a2, N, M, dim, link, absent)
        params.pop(param, None)
        if protocol in QUDIT_PROTOCOLS and param == "dim":
            param = "d"
        seed = _seed(seed, samples)
        reps = analysis.sweep(protocol, param, values, params, ensemble, samples, seed, tol, route, workers)
    except (ProtocolError, ValueError) as e:
        _fail(str(e), 2)
    except (DegenerateProtocolError, np.linalg.LinAlgError, ArithmeticError) as e:
        _fail(str(e), 1)
    if fmt == "json":
        click.echo(report.to_json(reps))
    elif fmt == "csv":
        click.echo(report.to_csv(reps, param), nl=False)
    else:
        click.echo("".join(report.to_text(r) + "\n" for r in reps), nl=False)


@cli.command("entropy-table")
@click.option("--d", "ms_d", type=float, default=0.6, show_default=True, help="MS coefficient d.")
@click.option("--a2", "pghz_a2", type=float, default=0.8, show_default=True, help="PGHZ weight a^2.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "text"]), default="text", show_default=True)
def entropy_table(ms_d, pghz_a2, fmt):
    """Single-party entropies of the GHZ, MS and PGHZ three-qubit channels."""
    try:
        rows = analysis.table_one(ms_d, pghz_a2)
    except ValueError as e:
        _fail(str(e), 2)
    out = {"text": report.entropy_table_text, "json": report.entropy_table_json,
           "csv": report.entropy_table_csv}[fmt](rows)
    click.echo(out, nl=not out.endswith("\n"))


@cli.command()
def catalog():
    """List channels and built-in protocols with their parameters."""
    lines = ["channels:"]
    lines += [f"  {name}" for name in sorted(CHANNEL_IDS)]
    lines.append("protocols:")
    for pid in sorted(PROTOCOLS):
        desc, _, specs = PROTOCOLS[pid]
        lines.append(f"  {pid}: {desc}")
        for s in specs:
            default = "" if s.default is None else f" (default {s.default})"
            lines.append(f"    {s.name} in {s.domain}{default}: {s.doc}")
    click.echo("\n".join(lines))


def main():
    cli()


if __name__ == "__main__":
    main()
