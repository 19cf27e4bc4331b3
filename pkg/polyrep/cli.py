"""
polyrep CLI - polynomial-inequality representations from the command line.

Machine-readable JSON goes to stdout, human summaries and logs to stderr. Exit codes: 1 parse or
configuration error, 2 violated precondition, 3 exhausted budget, 4 failed verification.
"""

import json
from pathlib import Path
from typing import Callable, TypeVar

import typer
from rich.console import Console
from rich.table import Table

from polyrep.app import PolyRepApp
from polyrep.catalog import CATALOG, get_entry
from polyrep.contour import sample_contour, write_segments, write_sign_grid
from polyrep.errors import PolyRepError, VerificationFailure
from polyrep.interval import Box
from polyrep.poly import format_rational, parse_rational

T = TypeVar("T")

# Create the main CLI application
app = typer.Typer(
    name="polyrep",
    help="📐 Minimal polynomial-inequality representations of polyhedra",
    rich_markup_mode="rich",
    no_args_is_help=True,
)

# Create catalog subcommand group
catalog_app = typer.Typer(name="catalog", help="📚 Built-in test polyhedra")
app.add_typer(catalog_app, name="catalog")

stderr = Console(stderr=True)


def _run(action: Callable[[], T]) -> T:
    """Run a library call, mapping its errors to the documented exit codes."""
    try:
        return action()
    except VerificationFailure as e:
        if hasattr(e.report, "model_dump_json"):
            typer.echo(e.report.model_dump_json(indent=2, exclude_none=True))
        typer.echo(f"❌ Verification failed: {e}", err=True)
        raise typer.Exit(e.exit_code)
    except PolyRepError as e:
        typer.echo(f"❌ {type(e).__name__}: {e}", err=True)
        raise typer.Exit(e.exit_code)
    except (FileNotFoundError, ValueError) as e:
        typer.echo(f"❌ Error: {e}", err=True)
        raise typer.Exit(1)


def _make_app(config: str | None, seed: int | None, timing: bool = False, budget: str | None = None) -> PolyRepApp:
    app_instance = PolyRepApp(config, seed=seed, timing=timing, budget=budget)
    _run(app_instance.setup_logging)
    return app_instance


def _emit(payload: str, output: Path | None) -> None:
    if output is None:
        typer.echo(payload)
    else:
        output.write_text(payload + "\n")
        typer.echo(f"Wrote {output}", err=True)


@app.command("represent")
def represent(
    input: Path | None = typer.Option(None, "--input", "-i", help="H-representation (JSON or line format)"),
    catalog: str | None = typer.Option(None, "--catalog", help="Use a built-in polyhedron instead of --input"),
    pipeline: str = typer.Option("auto", "--pipeline", "-p", help="auto | t1a | t1b | polytope | polyhedron"),
    certify: bool = typer.Option(False, "--certify", help="Verify on a certified box subdivision (d <= 3)"),
    faithful: bool = typer.Option(False, "--faithful", help="Replace the output by its faithful normal form"),
    seed: int | None = typer.Option(None, "--seed", help="Seed for every random choice"),
    budget: str | None = typer.Option(
        None, "--budget", "-b", help="Scale the search budget (e.g. 1/2) or read it from a TOML file"
    ),
    timing: bool = typer.Option(False, "--timing", help="Include wall-clock seconds in the report"),
    allow_decimal: bool = typer.Option(False, "--allow-decimal", help="Accept decimal coefficients exactly"),
    output: Path | None = typer.Option(None, "--output", "-o", help="Write the JSON document to a file"),
    config: str | None = typer.Option(None, "--config", "-c", help="Path to configuration file"),
) -> None:
    """🧮 Build a representation of a polyhedron and verify it."""

    app_instance = _make_app(config, seed, timing, budget)
    _run(lambda: app_instance.budget)
    polyhedron = _run(lambda: app_instance.load_polyhedron(input, catalog, allow_decimal))
    doc = _run(lambda: app_instance.represent(polyhedron, pipeline, certify, faithful))
    _emit(doc.model_dump_json(indent=2, exclude_none=True), output)
    stderr.print(
        f"✅ {doc.pipeline}: {len(doc.polynomials)} polynomials in R^{doc.dim}, "
        f"degrees {[entry.degree for entry in doc.provenance]}"
    )


@app.command("verify")
def verify(
    rep: Path = typer.Option(..., "--rep", "-r", help="Representation document from 'represent'"),
    poly: Path | None = typer.Option(None, "--poly", help="H-representation to compare against"),
    catalog: str | None = typer.Option(None, "--catalog", help="Use a built-in polyhedron instead of --poly"),
    mode: str = typer.Option("sampled", "--mode", "-m", help="sampled | certified"),
    resolution: str | None = typer.Option(None, "--resolution", help="Smallest certified box width, e.g. 1/256"),
    seed: int | None = typer.Option(None, "--seed", help="Seed for the stratified samples"),
    timing: bool = typer.Option(False, "--timing", help="Include wall-clock seconds in the report"),
    allow_decimal: bool = typer.Option(False, "--allow-decimal", help="Accept decimal coefficients exactly"),
    config: str | None = typer.Option(None, "--config", "-c", help="Path to configuration file"),
) -> None:
    """🔍 Check a representation against a polyhedron."""

    if mode not in ("sampled", "certified"):
        typer.echo(f"❌ Unknown mode {mode!r}; expected sampled or certified", err=True)
        raise typer.Exit(1)
    app_instance = _make_app(config, seed, timing)
    polyhedron = _run(lambda: app_instance.load_polyhedron(poly, catalog, allow_decimal))
    doc = _run(lambda: app_instance.verify(rep, polyhedron, mode, resolution))
    typer.echo(doc.report.model_dump_json(indent=2, exclude_none=True))
    report = doc.report
    stderr.print(
        f"✅ {mode} check passed: {sum(report.strata.values())} samples, "
        f"{report.certified_boxes} certified boxes, {report.gap_boxes} gap boxes"
    )


@app.command("separate")
def separate(
    s: Path = typer.Option(..., "--s", help="Side S (compact, basic closed) as JSON"),
    t: Path = typer.Option(..., "--t", help="Side T (closed, disjoint from S) as JSON"),
    certify: bool = typer.Option(False, "--certify", help="Also check on a certified box subdivision (d <= 3)"),
    seed: int | None = typer.Option(None, "--seed", help="Seed for every random choice"),
    timing: bool = typer.Option(False, "--timing", help="Include wall-clock seconds in the report"),
    allow_decimal: bool = typer.Option(False, "--allow-decimal", help="Accept decimal coefficients exactly"),
    output: Path | None = typer.Option(None, "--output", "-o", help="Write the JSON document to a file"),
    config: str | None = typer.Option(None, "--config", "-c", help="Path to configuration file"),
) -> None:
    """✂️ Build a polynomial positive on S and negative on T."""

    app_instance = _make_app(config, seed, timing)
    doc = _run(lambda: app_instance.separate(s, t, certify, allow_decimal))
    _emit(doc.model_dump_json(indent=2, exclude_none=True), output)
    constants = ", ".join(f"{c.name}={c.value}" for c in doc.found_constants)
    stderr.print(f"✅ {doc.construction} separator ({doc.evidence}): {constants or 'no constants'}")


@app.command("info")
def info(
    input: Path | None = typer.Option(None, "--input", "-i", help="H-representation (JSON or line format)"),
    catalog: str | None = typer.Option(None, "--catalog", help="Use a built-in polyhedron instead of --input"),
    seed: int | None = typer.Option(None, "--seed", help="Seed for the symmetric reduction search"),
    allow_decimal: bool = typer.Option(False, "--allow-decimal", help="Accept decimal coefficients exactly"),
    config: str | None = typer.Option(None, "--config", "-c", help="Path to configuration file"),
) -> None:
    """ℹ️ Show the combinatorics that decide the representation size."""

    app_instance = _make_app(config, seed)
    polyhedron = _run(lambda: app_instance.load_polyhedron(input, catalog, allow_decimal))
    summary = _run(lambda: app_instance.info(polyhedron))
    typer.echo(summary.model_dump_json(indent=2, exclude_none=True))


@app.command("contour")
def contour(
    rep: Path = typer.Option(..., "--rep", "-r", help="Planar representation document"),
    window: str = typer.Option("-2,3", "--window", "-w", help="'lo,hi' for a square or 'x0,x1,y0,y1'"),
    resolution: int = typer.Option(200, "--resolution", help="Grid nodes per axis"),
    out_dir: Path = typer.Option(Path("."), "--out-dir", help="Directory for signs.csv and segments.csv"),
    config: str | None = typer.Option(None, "--config", "-c", help="Path to configuration file"),
) -> None:
    """🗺️ Export sign grids and zero segments of a planar representation as CSV."""

    app_instance = _make_app(config, None)
    representation = _run(lambda: app_instance.load_representation(rep))
    bounds = _run(lambda: [parse_rational(v.strip()) for v in window.split(",")])
    if len(bounds) == 2:
        bounds = bounds * 2
    if len(bounds) != 4:
        typer.echo("❌ --window needs 2 or 4 comma-separated numbers", err=True)
        raise typer.Exit(1)
    box = Box.from_bounds(bounds[0::2], bounds[1::2])
    data = _run(lambda: sample_contour(representation.polynomials, box, resolution))
    out_dir.mkdir(parents=True, exist_ok=True)
    write_sign_grid(data, out_dir / "signs.csv")
    write_segments(data, out_dir / "segments.csv")
    stderr.print(f"✅ Wrote {out_dir / 'signs.csv'} and {out_dir / 'segments.csv'}")


@catalog_app.command("list")
def catalog_list() -> None:
    """📋 List the built-in polyhedra."""

    table = Table(title="polyrep catalog")
    table.add_column("name")
    table.add_column("description")
    table.add_column("size", justify="right")
    table.add_column("simple")
    for entry in CATALOG.values():
        table.add_row(entry.name, entry.description, str(entry.expected_size), "yes" if entry.simple else "no")
    Console().print(table)


@catalog_app.command("show")
def catalog_show(name: str = typer.Argument(..., help="Catalog entry name")) -> None:
    """📄 Print a built-in polyhedron as JSON."""

    entry = _run(lambda: get_entry(name))
    polyhedron = _run(lambda: entry.polyhedron)
    payload = {
        "name": entry.name,
        "description": entry.description,
        "expected_size": entry.expected_size,
        "simple": entry.simple,
        "polyhedron": polyhedron.to_json(),
        "vertices": [[format_rational(c) for c in v] for v in polyhedron.vertices],
    }
    typer.echo(json.dumps(payload, indent=2))


def main() -> None:
    """CLI entry point."""
    app()


if __name__ == "__main__":
    main()
