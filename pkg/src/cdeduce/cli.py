"""Command line entry point: ``cdeduce run|check|gen-world``."""

from __future__ import annotations

import sys

import click

from cdeduce.core import dump_world, generate_world
from cdeduce.errors import CausalityError
from cdeduce.scenario import ScenarioSyntaxError, build_microcosms, parse_scenario, run_scenario


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse_scenario(text)
    except ScenarioSyntaxError as exc:
        raise click.ClickException(f"{path}: {exc}") from None


@click.group()
def main() -> None:
    """Deduce causal relations between events from partial knowledge."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--trace", is_flag=True, help="Print derivation trees under verdicts and facts.")
@click.option("--json", "as_json", is_flag=True, help="Emit one JSON object per output line.")
@click.option("--seed", type=int, default=None, help="Default seed for experiments without seed=.")
@click.option("--trust", is_flag=True, help="Allow add/update on world-free microcosms.")
def run(file: str, trace: bool, as_json: bool, seed, trust: bool) -> None:
    """Run a scenario; exit status 1 if any expectation fails."""
    result = run_scenario(_load(file), trace=trace, seed=seed, trust=trust)
    click.echo(result.json() if as_json else result.text(), nl=False)
    sys.exit(result.exit_code)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def check(file: str) -> None:
    """Parse a scenario and validate its declarations without running commands."""
    s = _load(file)
    try:
        _, _, recs = build_microcosms(s)
    except CausalityError as exc:
        raise click.ClickException(f"{file}: {exc.tag}: {exc}") from None
    bad = [r for r in recs if r.kind == "error"]
    for r in bad:
        click.echo(r.text())
    if bad:
        sys.exit(1)
    click.echo(f"{file}: ok ({len(s.microcosms)} microcosms, {len(s.commands)} commands)")


@main.command("gen-world")
@click.argument("n", type=click.IntRange(min=0))
@click.argument("density", type=click.FloatRange(0.0, 1.0))
@click.argument("seed", type=int)
def gen_world(n: int, density: float, seed: int) -> None:
    """Print a random world as a scenario world block."""
    body = dump_world(generate_world(n, density, seed))
    click.echo("world {")
    for line in body.splitlines():
        click.echo("  " + line)
    click.echo("}")


if __name__ == "__main__":
    main()
