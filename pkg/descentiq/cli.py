"""CLI interface for DescentIQ."""

from __future__ import annotations

import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import typer
from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from descentiq.config import AppConfig, load_config
from descentiq.errors import (
    LocalVanishingFailure,
    ModelError,
    NoConnecting,
    ObstructionNonzero,
    PreconditionError,
)
from descentiq.models import (
    ClassReport,
    CohomologyReport,
    ExactnessReport,
    GroupSummary,
    InducedReport,
    ObstructionReport,
    PropertyCheckReport,
    Verdict,
)

app = typer.Typer(
    name="descentiq",
    help="Descent obstructions for group actions on sheaves over finite posets.",
    no_args_is_help=True,
)
console = Console()
logger = logging.getLogger(__name__)

EXIT_INVALID = 1
EXIT_PRECONDITION = 2


def setup_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%H:%M:%S",
    )


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map validation errors to exit 1 and failed preconditions to exit 2."""
    try:
        yield
    except ValidationError as e:
        console.print(f"[red]Invalid input:[/red] {e}")
        raise typer.Exit(EXIT_INVALID)
    except PreconditionError as e:
        console.print(f"[yellow]Precondition failed:[/yellow] {e}")
        raise typer.Exit(EXIT_PRECONDITION)
    except (ModelError, ValueError, FileNotFoundError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(EXIT_INVALID)


def _setup(config_path: Optional[Path], verbose: bool) -> AppConfig:
    setup_logging(verbose)
    with _exit_codes():
        return load_config(config_path)


def _load(cfg: AppConfig, model_path: Path):
    from descentiq.modelfile import load_model_file

    return load_model_file(model_path, chain_cap=cfg.site.chain_cap,
                           max_order=cfg.groups.max_order)


def _emit(report: BaseModel | list[BaseModel], as_json: bool) -> bool:
    """Print JSON when asked; return whether the caller should skip text output."""
    if not as_json:
        return False
    if isinstance(report, list):
        console.print_json(json.dumps([r.model_dump(mode="json") for r in report]))
    else:
        console.print_json(report.model_dump_json())
    return True


def _class_report(obs, names: list[str]) -> ClassReport:
    return ClassReport(group=GroupSummary.of(obs.group), coordinates=obs.coordinates,
                       cocycle=obs.table(names), is_zero=obs.is_zero())


# Shared options
ConfigOpt = typer.Option(None, "--config", "-c", help="Path to config TOML file")
VerboseOpt = typer.Option(False, "--verbose", "-v")
JsonOpt = typer.Option(False, "--json", help="Print the report as JSON")


@app.command()
def sheaf_cohomology(
    model_path: Path = typer.Argument(..., help="Model bundle (JSON)"),
    degree: int = typer.Option(1, "--degree", "-q", min=0),
    invariants: bool = typer.Option(False, "--invariants", help="Use the sheaf A^G"),
    config_path: Path = ConfigOpt,
    verbose: bool = VerboseOpt,
    as_json: bool = JsonOpt,
):
    """Compute H^q(X, A) with generator representatives."""
    from descentiq.sites.sheaves import SiteCochain

    cfg = _setup(config_path, verbose)
    with _exit_codes():
        model = _load(cfg, model_path)
        sheaf = model.invariants[0] if invariants else model.sheaf
        H = sheaf.cohomology(degree)
        generators = [SiteCochain(sheaf, degree, H.rep_of(g)).as_table()
                      for g in H.group.invariant_generators()]
        label = f"H^{degree}(X, {'A^G' if invariants else 'A'})"
        report = CohomologyReport(model=model.name, label=label, degree=degree,
                                  group=GroupSummary.of(H.group), generators=generators)
    if _emit(report, as_json or cfg.output.json_output):
        return
    console.print(f"{label} = [bold]{report.group}[/bold]")
    for i, gen in enumerate(report.generators, 1):
        console.print(f"  generator {i}: {gen}")


@app.command()
def group_cohomology(
    model_path: Path = typer.Argument(..., help="Model bundle (JSON)"),
    degree: int = typer.Option(1, "--degree", "-j", min=0),
    config_path: Path = ConfigOpt,
    verbose: bool = VerboseOpt,
    as_json: bool = JsonOpt,
):
    """Compute H^j(G, A(X)) from the bar complex."""
    from descentiq.groupcoh.bar import GroupCochain, group_cohomology as bar_cohomology

    cfg = _setup(config_path, verbose)
    with _exit_codes():
        model = _load(cfg, model_path)
        A = model.sheaf
        M = A.global_sections_module
        H = bar_cohomology(model.group, M, degree)
        names = model.group.names
        generators = []
        for gen in H.group.invariant_generators():
            c = GroupCochain(M, degree, H.rep_of(gen))
            generators.append({",".join(names[g] for g in t) or "()": v.as_list()
                               for t, v in c.items() if not v.is_zero()})
        report = CohomologyReport(model=model.name, label=f"H^{degree}(G, A(X))",
                                  degree=degree, group=GroupSummary.of(H.group),
                                  generators=generators)
    if _emit(report, as_json or cfg.output.json_output):
        return
    console.print(f"{report.label} = [bold]{report.group}[/bold]")
    for i, gen in enumerate(report.generators, 1):
        console.print(f"  generator {i}: {gen}")


@app.command()
def local_vanishing(
    model_path: Path = typer.Argument(..., help="Model bundle (JSON)"),
    degree: int = typer.Option(1, "--degree", "-j", min=1),
    config_path: Path = ConfigOpt,
    verbose: bool = VerboseOpt,
    as_json: bool = JsonOpt,
):
    """Check H^j(G, A(x)) = 0 at every point."""
    from descentiq.lowdeg.exactness import local_vanishing_report

    cfg = _setup(config_path, verbose)
    with _exit_codes():
        model = _load(cfg, model_path)
        report = local_vanishing_report(model.sheaf, degree)
    if _emit(report, as_json or cfg.output.json_output):
        return
    table = Table(title=f"H^{degree}(G, A(x))")
    table.add_column("Point", style="cyan")
    table.add_column("Group")
    for x, group in report.groups.items():
        style = "green" if group == "0" else "red"
        table.add_row(x, f"[{style}]{group}[/{style}]")
    console.print(table)
    verdict = "holds" if report.holds else f"fails at {', '.join(report.failing)}"
    console.print(f"local vanishing in degree {degree}: {verdict}")


@app.command()
def torsor_obstruction(
    model_path: Path = typer.Argument(..., help="Model bundle (JSON)"),
    cocycle: Path = typer.Option(..., "--cocycle", help="Degree-1 cocycle file"),
    config_path: Path = ConfigOpt,
    verbose: bool = VerboseOpt,
    as_json: bool = JsonOpt,
):
    """Lift the action to a torsor and compute the class of chi in H^2(G, A(X))."""
    from descentiq.descent.torsors import find_torsor_lift, torsor_obstruction as chi_class
    from descentiq.modelfile import cocycle_from_file, read_cocycle

    cfg = _setup(config_path, verbose)
    with _exit_codes():
        model = _load(cfg, model_path)
        t = cocycle_from_file(model, read_cocycle(cocycle))
        lift = find_torsor_lift(t, model.sheaf)
        obs = chi_class(lift)
        report = ObstructionReport(
            model=model.name, kind="torsor", lift_found=True,
            obstruction=_class_report(obs, model.group.names),
            vanishes_after_adjustment=obs.is_zero(),
            lift=lift.as_table(),
        )
    if _emit(report, as_json or cfg.output.json_output):
        return
    _print_obstruction(report, "H^2(G, A(X))")


@app.command()
def gerbe_obstruction(
    model_path: Path = typer.Argument(..., help="Model bundle (JSON)"),
    cocycle: Path = typer.Option(..., "--cocycle", help="Degree-2 cocycle file"),
    config_path: Path = ConfigOpt,
    verbose: bool = VerboseOpt,
    as_json: bool = JsonOpt,
):
    """Lift the action to a gerbe and compute the class of kappa in H^3(G, A(X))."""
    from descentiq.descent.gerbes import (
        find_gerbe_lift,
        gerbe_obstruction as kappa_class,
        gerbe_obstruction_vanishes,
    )
    from descentiq.modelfile import cocycle_from_file, read_cocycle

    cfg = _setup(config_path, verbose)
    with _exit_codes():
        model = _load(cfg, model_path)
        m = cocycle_from_file(model, read_cocycle(cocycle))
        try:
            lift = find_gerbe_lift(m, model.sheaf)
        except NoConnecting as e:
            report = ObstructionReport(model=model.name, kind="gerbe", lift_found=False,
                                       message=str(e))
            if _emit(report, as_json or cfg.output.json_output):
                raise typer.Exit(EXIT_PRECONDITION)
            raise
        obs = kappa_class(lift)
        report = ObstructionReport(
            model=model.name, kind="gerbe", lift_found=True,
            obstruction=_class_report(obs, model.group.names),
            vanishes_after_adjustment=gerbe_obstruction_vanishes(lift),
            lift=lift.as_table(),
        )
    if _emit(report, as_json or cfg.output.json_output):
        return
    _print_obstruction(report, "H^3(G, A(X))")


def _print_obstruction(report: ObstructionReport, where: str) -> None:
    obs = report.obstruction
    state = "[green]0[/green]" if obs.is_zero else f"[red]{obs.coordinates}[/red]"
    console.print(f"{report.kind} obstruction in {where} = {obs.group}: {state}")
    if not obs.is_zero:
        console.print(f"  cocycle: {obs.cocycle}")
    if report.kind == "gerbe" and not obs.is_zero:
        verdict = "yes" if report.vanishes_after_adjustment else "no"
        console.print(f"  vanishes after changing e by 1-cocycles: {verdict}")


@app.command()
def induced_check(
    model_path: Path = typer.Argument(..., help="Model bundle (JSON)"),
    degree: int = typer.Option(1, "--degree", min=1, max=2),
    cocycle: Path = typer.Option(..., "--cocycle", help="Cocycle file"),
    config_path: Path = ConfigOpt,
    verbose: bool = VerboseOpt,
    as_json: bool = JsonOpt,
):
    """Decide whether a class comes from H^q(X, A^G) and try to descend it."""
    from descentiq.descent import gerbes, torsors
    from descentiq.modelfile import cocycle_from_file, read_cocycle

    cfg = _setup(config_path, verbose)
    with _exit_codes():
        model = _load(cfg, model_path)
        data = read_cocycle(cocycle)
        if data.degree != degree:
            raise ModelError(f"Cocycle file has degree {data.degree}, expected {degree}")
        z = cocycle_from_file(model, data)
        if degree == 1:
            check = torsors.is_induced_torsor(z, model.sheaf)
            lift = torsors.find_torsor_lift(z, model.sheaf)
            obstruction_zero = torsors.torsor_obstruction(lift).is_zero()
            descend = torsors.fixed_point_torsor
        else:
            check = gerbes.is_induced_gerbe(z, model.sheaf)
            lift = gerbes.find_gerbe_lift(z, model.sheaf)
            obstruction_zero = gerbes.gerbe_obstruction_vanishes(lift)
            descend = gerbes.fixed_point_gerbe
        report = InducedReport(
            model=model.name, degree=degree,
            induced=Verdict.YES if check.induced else Verdict.NO,
            witness=check.witness.as_table() if check.witness is not None else {},
            cokernel_coordinates=check.cokernel_coords,
            obstruction_zero=obstruction_zero,
        )
        try:
            report.descended = descend(lift).as_table()
        except LocalVanishingFailure as e:
            report.descent_failure = e.failures
        except ObstructionNonzero:
            pass
    if _emit(report, as_json or cfg.output.json_output):
        return
    console.print(f"induced from A^G in degree {degree}: [bold]{report.induced.value}[/bold]")
    console.print(f"obstruction vanishes: {'yes' if report.obstruction_zero else 'no'}")
    if report.descended is not None:
        console.print(f"  descended cocycle: {report.descended}")
    elif report.descent_failure:
        console.print(f"  local vanishing fails at: {report.descent_failure}")
    elif report.cokernel_coordinates:
        console.print(f"  cokernel class: {report.cokernel_coordinates}")


@app.command()
def les_check(
    model_path: Path = typer.Argument(..., help="Model bundle (JSON)"),
    no_gerbe: bool = typer.Option(False, "--no-gerbe", help="Skip the gerbe node"),
    config_path: Path = ConfigOpt,
    verbose: bool = VerboseOpt,
    as_json: bool = JsonOpt,
):
    """Check exactness of the low-degree sequence node by node."""
    from descentiq.lowdeg.exactness import exactness_report

    cfg = _setup(config_path, verbose)
    with _exit_codes():
        model = _load(cfg, model_path)
        report = exactness_report(model.sheaf, name=model.name, include_gerbe=not no_gerbe)
    if _emit(report, as_json or cfg.output.json_output):
        return
    _print_exactness(report, cfg.output.show_certificates)


def _print_exactness(report: ExactnessReport, show_certificates: bool) -> None:
    nodes = list(report.nodes)
    if report.gerbe_node is not None:
        nodes.append(report.gerbe_node)
    for node in nodes:
        console.print(node.line(), markup=False, highlight=False, soft_wrap=True)
        if show_certificates and not node.exact and node.certificate:
            console.print(f"  certificate: {node.certificate}", markup=False,
                          highlight=False, soft_wrap=True)
    for theta in report.maps:
        if not theta.defined:
            console.print(f"  {theta.name}: {theta.source} -> {theta.target} undefined "
                          f"({theta.failure})", markup=False, highlight=False, soft_wrap=True)


@app.command()
def hs_compare(
    model_path: Path = typer.Argument(..., help="Model bundle with an internal-hom sheaf"),
    config_path: Path = ConfigOpt,
    verbose: bool = VerboseOpt,
    as_json: bool = JsonOpt,
):
    """Compare the total cohomology for A = E[M] with H^n(X, E)."""
    from descentiq.lowdeg.hochschild_serre import hs_low_degree_compare

    cfg = _setup(config_path, verbose)
    with _exit_codes():
        model = _load(cfg, model_path)
        if model.plain is None or model.torsor is None:
            raise ModelError("hs-compare needs a model whose sheaf is E[M] (kind internal_hom)")
        report = hs_low_degree_compare(model.plain, model.torsor,
                                       max_degree=cfg.lowdeg.max_total_degree,
                                       margin=cfg.lowdeg.group_degree_margin,
                                       name=model.name)
    if _emit(report, as_json or cfg.output.json_output):
        return
    table = Table(title=f"Total cohomology of {model.name or 'model'}")
    table.add_column("n", style="dim")
    table.add_column("total")
    table.add_column("H^n(X, E)")
    table.add_column("H^n(X, A^G)")
    table.add_column("match")
    for d in report.degrees:
        ok = "[green]yes[/green]" if d.match else "[red]no[/red]"
        table.add_row(str(d.degree), d.total, d.direct, d.invariants or "-", ok)
    console.print(table)
    console.print("E2: " + ", ".join(f"({k}) {v}" for k, v in report.e2.items()))


@app.command()
def example(
    name: str = typer.Argument(..., help="Fixture name"),
    out: Optional[Path] = typer.Option(None, "--out", "-o",
                                       help="Bundle path (default ./NAME.json)"),
    coefficients: Optional[str] = typer.Option(None, "--coefficients",
                                               help="E for cover fixtures"),
    config_path: Path = ConfigOpt,
    verbose: bool = VerboseOpt,
    as_json: bool = JsonOpt,
):
    """Write a built-in model and print its headline invariants."""
    from descentiq.fixtures import get_fixture
    from descentiq.groupcoh.bar import group_cohomology as bar_cohomology
    from descentiq.modelfile import load_model, write_bundle

    cfg = _setup(config_path, verbose)
    with _exit_codes():
        bundle = get_fixture(name, coefficients)
        path = write_bundle(bundle, out or Path(f"{name}.json"))
        model = load_model(bundle, chain_cap=cfg.site.chain_cap)
        A = model.sheaf
        M = A.global_sections_module
        headline = {"bundle": str(path)}
        for q in range(3):
            headline[f"H^{q}(X, A)"] = str(A.cohomology(q).group)
        for j in range(1, 4):
            headline[f"H^{j}(G, A(X))"] = str(bar_cohomology(model.group, M, j).group)
    if as_json or cfg.output.json_output:
        console.print_json(json.dumps(headline))
        return
    lines = [f"{k} = {v}" for k, v in headline.items()]
    console.print(Panel("\n".join(lines), title=name, expand=False))


@app.command()
def emit_model(
    name: str = typer.Argument(..., help="Fixture name"),
    out: Path = typer.Option(..., "--out", "-o", help="Where to write the bundle"),
    explicit: bool = typer.Option(True, "--explicit/--derived",
                                  help="Write stalks and maps out instead of the recipe"),
    config_path: Path = ConfigOpt,
    verbose: bool = VerboseOpt,
):
    """Write a built-in model as a bundle file."""
    from descentiq.fixtures import get_fixture
    from descentiq.modelfile import explicit_bundle, load_model, write_bundle

    cfg = _setup(config_path, verbose)
    with _exit_codes():
        bundle = get_fixture(name)
        if explicit:
            bundle = explicit_bundle(load_model(bundle, chain_cap=cfg.site.chain_cap))
        path = write_bundle(bundle, out)
    console.print(f"[green]Wrote {path}[/green]")


@app.command()
def verify(
    seed: Optional[int] = typer.Option(None, "--seed", help="Override checks.seed"),
    trials: Optional[int] = typer.Option(None, "--trials", help="Override checks.trials"),
    oracle_order: Optional[int] = typer.Option(None, "--oracle-order",
                                               help="Override checks.oracle_max_order"),
    fixture: list[str] = typer.Option(["interval-branched", "circle-cover"], "--fixture",
                                      help="Fixtures to check (repeatable)"),
    config_path: Path = ConfigOpt,
    verbose: bool = VerboseOpt,
    as_json: bool = JsonOpt,
):
    """Run the seeded randomized property suite."""
    from descentiq.checks import coefficient_reduction, run_property_suite
    from descentiq.fixtures import load_fixture

    cfg = _setup(config_path, verbose)
    seed = cfg.checks.seed if seed is None else seed
    trials = cfg.checks.trials if trials is None else trials
    with _exit_codes():
        models = [load_fixture(name, chain_cap=cfg.site.chain_cap) for name in fixture]
        reports: list[PropertyCheckReport] = run_property_suite(
            [m.sheaf for m in models], seed=seed, trials=trials,
            theta_trials=min(trials, cfg.checks.theta_trials),
            oracle_max_order=cfg.checks.oracle_max_order if oracle_order is None else oracle_order,
            oracle_max_degree=cfg.checks.oracle_max_degree,
            weak_chain_max_points=cfg.site.weak_chain_oracle_max_points,
            morphisms=[coefficient_reduction(m.torsor) for m in models
                       if m.torsor is not None],
        )
    failed = [r for r in reports if not r.passed]
    if not _emit(reports, as_json or cfg.output.json_output):
        table = Table(title=f"Property checks (seed {seed})")
        table.add_column("Check", style="cyan")
        table.add_column("Trials", justify="right")
        table.add_column("Result")
        for r in reports:
            table.add_row(r.name, str(r.trials), "[green]pass[/green]" if r.passed
                          else f"[red]{len(r.failures)} failures[/red]")
        console.print(table)
        for r in failed:
            for line in r.failures[:5]:
                console.print(f"  {r.name}: {line}", markup=False)
    if failed:
        raise typer.Exit(EXIT_INVALID)


@app.command()
def config_show(
    config_path: Path = typer.Option(None, "--config", "-c"),
):
    """Display current configuration."""
    cfg = load_config(config_path)
    console.print_json(json.dumps(cfg.model_dump(by_alias=True), indent=2, default=str))


if __name__ == "__main__":
    app()
