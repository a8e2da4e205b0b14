"""Command-line entry point: ``twodist <command> ...``.

Exit codes: 0 feasible or success, 2 malformed input, 3 likely infeasible,
4 degenerate.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import click

from . import graph as gmod
from .algebra import DecompTerm, IntPolynomial, SetSyntaxError, decompose, parse_set
from .synth import build_G_full, synthesize_full
from .verify import (
    DEGENERATE,
    FEASIBLE,
    INFEASIBLE,
    InconsistentGreenCycle,
    SolveConfig,
    load_representation,
    representation_document,
    solve,
    sweep_range,
)

EXIT_OK, EXIT_MALFORMED, EXIT_INFEASIBLE, EXIT_DEGENERATE = 0, 2, 3, 4
_STATUS_EXIT = {FEASIBLE: EXIT_OK, INFEASIBLE: EXIT_INFEASIBLE, DEGENERATE: EXIT_DEGENERATE}


class Malformed(click.ClickException):
    exit_code = EXIT_MALFORMED


def _rational(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise Malformed(f"not a rational number: {text!r}") from exc
    if q <= 0:
        raise Malformed(f"expected a positive rational, got {text}")
    return q


def _sidecar_path(graph_path) -> Path:
    return Path(str(graph_path) + ".prov.json")


def _load_graph(path) -> gmod.Graph:
    try:
        return gmod.load(path)
    except (OSError, gmod.GraphFormatError, ValueError, KeyError) as exc:
        raise Malformed(f"cannot read graph {path}: {exc}") from exc


def _load_cfg(path, seed: int, restarts) -> SolveConfig:
    cfg = SolveConfig()
    if path:
        try:
            cfg = SolveConfig(**json.loads(Path(path).read_text()))
        except (OSError, ValueError, TypeError) as exc:
            raise Malformed(f"bad solver config {path}: {exc}") from exc
    cfg = replace(cfg, rng_seed=seed)
    if restarts is not None:
        cfg = replace(cfg, restarts=restarts)
    if not (cfg.restarts >= 1 and 0 < cfg.tol_distinct < 1):
        raise Malformed("solver config violates restarts >= 1 and 0 < tol_distinct < 1")
    return cfg


def exact_membership(graph_path, d: float):
    """Exact verdict from the synthesis sidecar, or None when there is none."""
    side = _sidecar_path(graph_path)
    if not side.exists():
        return None
    doc = json.loads(side.read_text())
    x = Fraction(d)
    if doc.get("source_set") is not None:
        return parse_set(doc["source_set"]).contains(x)
    terms = [DecompTerm.from_doc(t) for t in doc.get("terms", [])]
    return all(_term_member(t, x) for t in terms)


def _term_member(t: DecompTerm, x: Fraction) -> bool:
    if t.L > 0 and x <= t.L or (t.U is not None and x >= t.U):
        return True
    v = t.p.eval_exact(x)
    return v > 0 if t.zeta else v >= 0


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


seed_option = click.option("--seed", type=int, default=0, show_default=True, help="Seed for every random choice.")


@click.group()
def main():
    """Build and test edge-bicoloured graphs whose (1,d)-range is a given set."""


@main.command("decompose")
@click.option("--set", "set_text", required=True, help='Set, e.g. "[1/2,alg(-2,0,1;1,2)]".')
@click.option("--lambda", "lam", required=True)
@click.option("--upsilon", required=True)
@click.option("--out", type=click.Path(dir_okay=False))
def decompose_cmd(set_text, lam, upsilon, out):
    """Write the S-set terms whose intersection is the set."""
    sigma = _parse(set_text)
    try:
        terms = decompose(sigma, _rational(lam), _rational(upsilon))
    except ValueError as exc:
        raise Malformed(str(exc)) from exc
    _emit(json.dumps({"source_set": sigma.to_text(), "terms": [t.to_doc() for t in terms]}, indent=1) + "\n", out)


def _parse(text):
    try:
        return parse_set(text)
    except (SetSyntaxError, ValueError) as exc:
        raise Malformed(f"bad set {text!r}: {exc}") from exc


@main.command("synth")
@click.option("--set", "set_text", help="Target set; the graph's range is this set.")
@click.option("--poly", help="Comma-separated coefficients of an even polynomial, constant first; builds G(p).")
@click.option("--strict", is_flag=True, help="With --poly, build G'(p) (range where p > 0).")
@click.option("--lambda", "lam", default=None)
@click.option("--upsilon", default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--materialize", "W", type=int, default=None, help="Expand green classes with WxW grids.")
def synth_cmd(set_text, poly, strict, lam, upsilon, out, W):
    """Synthesize a graph and its provenance sidecar."""
    if (set_text is None) == (poly is None):
        raise Malformed("give exactly one of --set and --poly")
    if poly is not None:
        try:
            p = IntPolynomial(int(c) for c in poly.split(","))
            g, _, prov = build_G_full(p, strict)
        except ValueError as exc:
            raise Malformed(str(exc)) from exc
        term = DecompTerm(p, Fraction(0), None, int(strict))
        side = {"source_set": None, "terms": [dict(term.to_doc(), gadget=prov.to_doc())], "W": prov.W}
    else:
        if lam is None or upsilon is None:
            raise Malformed("--set needs --lambda and --upsilon")
        sigma = _parse(set_text)
        lam_q, ups_q = _rational(lam), _rational(upsilon)
        try:
            res = synthesize_full(sigma, lam_q, ups_q)
        except ValueError as exc:
            raise Malformed(str(exc)) from exc
        g, side = res.graph, res.sidecar()
    if W is not None:
        if W < 2:
            raise Malformed("W must be at least 2")
        g = gmod.pvebg_to_ebg(g, W)
        side["materialized_W"] = W
    gmod.save(g, out)
    _sidecar_path(out).write_text(json.dumps(side, indent=1) + "\n")
    p = gmod.as_pvebg(g)
    click.echo(f"vertices\t{p.num_vertices}\nred\t{len(p.red_edges)}\nblue\t{len(p.blue_edges)}\n"
               f"green\t{len(p.green_edges)}\nclasses\t{len(p.classes)}")


@main.command("check")
@click.argument("graph_path", type=click.Path(dir_okay=False))
@click.option("--d", "d", type=float, required=True)
@click.option("--cfg", "cfg_path", type=click.Path(dir_okay=False))
@click.option("--restarts", type=int, default=None)
@click.option("--rep-out", type=click.Path(dir_okay=False))
@seed_option
def check_cmd(graph_path, d, cfg_path, restarts, rep_out, seed):
    """Search for a (1,d)-representation; the exit code carries the verdict."""
    g = _load_graph(graph_path)
    cfg = _load_cfg(cfg_path, seed, restarts)
    if d <= 0:
        raise Malformed("d must be positive")
    try:
        rep = solve(g, d, cfg)
    except InconsistentGreenCycle as exc:
        raise Malformed(f"green classes are inconsistent: {exc}") from exc
    lines = [f"status\t{rep.status}", f"residual\t{rep.residual:.3e}", f"restarts_used\t{rep.restarts_used}"]
    if rep.reason:
        lines.append(f"reason\t{rep.reason}")
    exact = exact_membership(graph_path, d)
    if exact is not None:
        lines.append(f"exact_member\t{'yes' if exact else 'no'}")
    click.echo("\n".join(lines))
    if rep_out:
        Path(rep_out).write_text(representation_document(g, d, rep, cfg))
    sys.exit(_STATUS_EXIT[rep.status])


@main.command("range")
@click.argument("graph_path", type=click.Path(dir_okay=False))
@click.option("--lo", type=float, required=True)
@click.option("--hi", type=float, required=True)
@click.option("--steps", type=int, required=True)
@click.option("--restarts", type=int, default=None)
@click.option("--refine", type=int, default=8, show_default=True, help="Bisection levels at status changes.")
@click.option("--cfg", "cfg_path", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--plot", type=click.Path(dir_okay=False), help="Also draw the profile as SVG.")
@seed_option
def range_cmd(graph_path, lo, hi, steps, restarts, refine, cfg_path, out, plot, seed):
    """Sweep d over [lo, hi] and tabulate feasibility."""
    g = _load_graph(graph_path)
    cfg = _load_cfg(cfg_path, seed, restarts)
    if not 0 < lo < hi or steps < 2:
        raise Malformed("need 0 < lo < hi and steps >= 2")
    prof = sweep_range(g, lo, hi, steps, cfg, refine_levels=refine)
    _emit(prof.table(), out)
    if plot:
        from .render import plot_profile

        plot_profile(prof, plot, title=Path(graph_path).name)


@main.command("render")
@click.argument("rep_path", type=click.Path(dir_okay=False))
@click.argument("graph_path", type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def render_cmd(rep_path, graph_path, out):
    """Draw a stored representation as SVG."""
    from .render import render_representation
    from .verify import graph_hash

    g = _load_graph(graph_path)
    try:
        rep, doc = load_representation(Path(rep_path).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise Malformed(f"cannot read representation {rep_path}: {exc}") from exc
    if doc.get("graph_sha256") not in (None, graph_hash(g)):
        raise Malformed("representation was produced for a different graph")
    if len(rep.points) != gmod.as_pvebg(g).num_vertices:
        raise Malformed("representation does not place every vertex")
    render_representation(g, rep, out, title=f"d = {doc.get('d')}")


@main.command("materialize")
@click.argument("graph_path", type=click.Path(dir_okay=False))
@click.option("--w", "W", type=int, required=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def materialize_cmd(graph_path, W, out):
    """Replace every green class by chained WxW grids."""
    g = _load_graph(graph_path)
    if W < 2:
        raise Malformed("W must be at least 2")
    e = gmod.pvebg_to_ebg(gmod.as_pvebg(g), W)
    gmod.save(e, out)
    click.echo(f"vertices\t{e.num_vertices}\nred\t{len(e.red_edges)}\nblue\t{len(e.blue_edges)}")


def run(argv=None) -> int:
    try:
        main.main(args=argv, prog_name="twodist", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(run())
