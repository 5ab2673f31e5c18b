"""Command line front end.

    khst kh --pd "PD[X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)]"
    khst st --dt "4 6 2"
    khst compare --census htw14.tsv --format htw-dt --names K14n5017,K14n11311,K14n11629
    khst mutants --census htw12.tsv --pairs pairs.txt
    khst selftest

Exit status: 0 on success, 1 on parse or configuration errors, 2 when some
St entry has a nonzero first component.
"""

from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

import click

from .errors import KhError
from .homology import kh
from .invariants import (census_compare, compare_with_mirror,
                         compute_census, cp2_count, mutant_check, st_table)
from .linkdata import CensusEntry, load_census, parse_dt, parse_pd, resolve_groups

LADYBUG = {"default": "right", "alt": "left"}
FORMATS = {"htw-dt": "HTW-DT", "mt-pd": "MT-PD"}


def _fail(msg: str):
    raise click.ClickException(msg)


def _j_filter(spec: str | None):
    if spec is None:
        return None
    try:
        return sorted({int(t) for t in spec.replace(",", " ").split()})
    except ValueError:
        _fail(f"--j expects integers, got {spec!r}")


def _single(pd: str | None, dt: str | None) -> list[CensusEntry]:
    if (pd is None) == (dt is None):
        _fail("give exactly one of --pd, --dt")
    try:
        if pd is not None:
            return [CensusEntry("pd", parse_pd(pd, name="pd"))]
        return [CensusEntry("dt", parse_dt(dt, name="dt"))]
    except KhError as exc:
        _fail(f"{'--pd' if pd is not None else '--dt'} {pd or dt!r}: {exc}")


def _census(path: str, fmt: str, names: str | None) -> list[CensusEntry]:
    wanted = [n.strip() for n in names.split(",") if n.strip()] if names else None
    try:
        # with --names only the named records are decoded
        entries = load_census(path, FORMATS[fmt],
                              select=None if wanted is None else set(wanted).__contains__)
    except (KhError, OSError) as exc:
        _fail(str(exc))
    if wanted:
        try:
            entries = resolve_groups([wanted], entries)[0]
        except KhError as exc:
            _fail(f"--names: {exc}")
    return entries


def _entries(pd, dt, census, fmt, names) -> list[CensusEntry]:
    if census is not None:
        if pd is not None or dt is not None:
            _fail("--census cannot be combined with --pd or --dt")
        return _census(census, fmt, names)
    return _single(pd, dt)


def _emit_kh(entry: CensusEntry, jf, out: str) -> None:
    z = kh(entry.diagram, "Z", j_filter=jf)
    dims = z.f2_dims()
    keys = sorted(set(z.entries) | set(dims))
    for (i, j) in keys:
        cell = z.entries.get((i, j))
        free = cell.free_rank if cell else 0
        tors = list(cell.invariant_factors) if cell else []
        d = dims.get((i, j), 0)
        if out == "tsv":
            click.echo(f"{entry.name}\t{i}\t{j}\t{free}\t{','.join(map(str, tors))}\t{d}")
        elif out == "json-lines":
            click.echo(json.dumps({"name": entry.name, "i": i, "j": j, "free_rank": free,
                                   "invariant_factors": tors, "f2_dim": d}))
        else:
            parts = ([f"Z^{free}"] if free else []) + [f"Z/{t}" for t in tors]
            click.echo(f"{entry.name}  Kh^{i},{j} = {' + '.join(parts) or '0'}  (F2 dim {d})")


def _emit_st(name: str, table, out: str) -> None:
    if out == "tsv":
        for row in table.tsv_rows(name):
            click.echo(row)
    elif out == "json-lines":
        for (i, j), e in table.entries.items():
            click.echo(json.dumps({"name": name, "i": i, "j": j, "st": list(e)}))
    else:
        if not table.entries:
            click.echo(f"{name}: St = 0")
        for (i, j), e in table.entries.items():
            click.echo(f"{name}  St({i},{j}) = ({e})")


out_option = click.option("--out", type=click.Choice(["tsv", "text", "json-lines"]), default="text")
ladybug_option = click.option("--ladybug", type=click.Choice(list(LADYBUG)), default="default",
                              help="ladybug matching: default (right pair) or alt (left pair)")
census_options = [
    click.option("--census", type=click.Path(dir_okay=False), default=None),
    click.option("--format", "fmt", type=click.Choice(list(FORMATS)), default="htw-dt"),
    click.option("--names", default=None, help="comma separated subset of census names"),
]


def _add(options):
    def deco(f):
        for opt in reversed(options):
            f = opt(f)
        return f
    return deco


@click.group()
def cli():
    """Khovanov homology, Steenrod squares and St(L)."""


def main(argv=None):
    try:
        rv = cli.main(args=argv, prog_name="khst", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    sys.exit(rv if isinstance(rv, int) else 0)


@cli.command("kh")
@click.option("--pd", default=None)
@click.option("--dt", default=None)
@_add(census_options)
@click.option("--j", "jspec", default=None, help="quantum gradings to compute, e.g. 1,3")
@out_option
def kh_cmd(pd, dt, census, fmt, names, jspec, out):
    """Integral Khovanov homology with F2 dimensions."""
    jf = _j_filter(jspec)
    for e in _entries(pd, dt, census, fmt, names):
        try:
            _emit_kh(e, jf, out)
        except KhError as exc:
            _fail(f"{e.name}: {exc}")


@cli.command("st")
@click.option("--pd", default=None)
@click.option("--dt", default=None)
@_add(census_options)
@ladybug_option
@out_option
def st_cmd(pd, dt, census, fmt, names, ladybug, out):
    """The St table (zero entries omitted)."""
    flag = False
    for e in _entries(pd, dt, census, fmt, names):
        try:
            table = st_table(e.diagram, LADYBUG[ladybug])
        except KhError as exc:
            _fail(f"{e.name}: {exc}")
        _emit_st(e.name, table, out)
        flag |= cp2_count(table)[1]
    if flag:
        click.echo("warning: nonzero first St component", err=True)
        sys.exit(2)


@cli.command("compare")
@_add(census_options)
@ladybug_option
@click.option("--workers", type=int, default=1)
@click.option("--resume", type=click.Path(dir_okay=False), default=None,
              help="journal file; finished links are read back instead of recomputed")
@out_option
def compare_cmd(census, fmt, names, ladybug, workers, resume, out):
    """Group census links by integral Khovanov homology and split by St."""
    if census is None:
        _fail("compare needs --census")
    if workers < 1:
        _fail("--workers must be positive")
    entries = _census(census, fmt, names)
    conv = LADYBUG[ladybug]
    if names:
        orientation, results = compare_with_mirror(entries, conv)
        click.echo(f"orientation: {orientation}", err=True)
    else:
        results = []
        for r in compute_census(entries, conv, workers, resume):
            click.echo(f"done {r.name}" + (f" ({r.error})" if r.error else ""), err=True)
            results.append(r)
    results.sort(key=lambda r: r.name)
    if out == "tsv":
        for r in results:
            if r.st is not None:
                for row in r.st.tsv_rows(r.name):
                    click.echo(row)
    elif out == "json-lines":
        for r in results:
            click.echo(r.to_json())
    report = census_compare(results)
    if out == "text":
        click.echo(report.text(), nl=False)
    if any(cp2_count(r.st)[1] for r in results if r.st is not None):
        click.echo("warning: nonzero first St component", err=True)
        sys.exit(2)


@cli.command("mutants")
@_add(census_options[:2])
@click.option("--pairs", type=click.Path(dir_okay=False), required=True)
@ladybug_option
def mutants_cmd(census, fmt, pairs, ladybug):
    """Compare St within each group of a mutant-pairs file."""
    if census is None:
        _fail("mutants needs --census")
    try:
        groups = load_census(pairs, "MUTANT-PAIRS")
        wanted = {n for g in groups for n in g}
        entries = load_census(census, FORMATS[fmt], select=wanted.__contains__)
        report = mutant_check(entries, groups, LADYBUG[ladybug])
    except (KhError, OSError) as exc:
        _fail(str(exc))
    click.echo(report.text(), nl=False)


@cli.command("selftest")
@click.option("--max-crossings", type=int, default=7)
def selftest_cmd(max_crossings):
    """Structural checks on the bundled knot table."""
    from .selftest import run_selftest
    ok = run_selftest(max_crossings, echo=click.echo)
    sys.exit(0 if ok else 1)


def data_path(name: str) -> Path:
    """Path of a bundled data file."""
    return Path(str(resources.files("khst") / "data" / name))


if __name__ == "__main__":
    main()
