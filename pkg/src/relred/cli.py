"""Command-line frontend.

Exit codes: 0 success, 2 parse error, 3 precondition violated (including
reducer refusals), 4 enumeration cap exceeded, 5 verification failure.
All outputs are deterministic; ``--threads`` is accepted for interface
stability but evaluation is serial (results are independent of it).
"""

from __future__ import annotations

import functools
import json
import sys

import click

from . import analysis, core, dependencies, diagrams, formula, reducers
from .caps import from_env
from .errors import (
    CapExceededError,
    ParseError,
    PreconditionError,
    ReductionRefused,
    RelredError,
    VerificationError,
)

EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_CAP = 4
EXIT_VERIFY = 5


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ParseError as e:
            click.echo(f"parse error: {e}", err=True)
            sys.exit(EXIT_PARSE)
        except CapExceededError as e:
            click.echo(f"cap exceeded: {e}", err=True)
            sys.exit(EXIT_CAP)
        except ReductionRefused as e:
            click.echo(f"refused ({e.reason}): {e}", err=True)
            sys.exit(EXIT_PRECONDITION)
        except VerificationError as e:
            click.echo(f"verification failed: {e}", err=True)
            sys.exit(EXIT_VERIFY)
        except (PreconditionError, RelredError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_PRECONDITION)

    return wrapper


def _load_rel(path: str):
    with open(path) as fh:
        return core.load_relation(fh.read())


def _load_cert(path: str):
    import os

    if os.path.isdir(path):
        path = os.path.join(path, "certificate.json")
    return formula.load_certificate(path)


def _parse_attr_list(text: str) -> list[str]:
    return [a for a in text.split(",") if a]


def _parse_blocks(text: str) -> list[list[str]]:
    return [_parse_attr_list(b) for b in text.split("|")]


def _emit(ctx, payload_json: str, payload_text: str):
    if ctx.obj["format"] == "json":
        click.echo(payload_json)
    else:
        click.echo(payload_text)


@click.group()
@click.option("--format", "fmt", type=click.Choice(["json", "text", "csv"]),
              default="text", help="output format")
@click.option("--threads", type=int, default=1,
              help="accepted for compatibility; execution is serial")
@click.pass_context
def main(ctx, fmt, threads):
    """Attributed-relation algebra, reductions, and diagrams."""
    ctx.ensure_object(dict)
    ctx.obj["format"] = fmt
    ctx.obj["caps"] = from_env()


@main.command("eval")
@click.argument("formula_file", type=click.Path(exists=True))
@click.option("--env", "env_files", multiple=True, required=True,
              type=click.Path(exists=True), help="relation files; the symbol "
              "is taken from the @relation header")
@click.option("--free", default=None, help="comma-separated free variables "
              "(checked against the formula)")
@click.option("-o", "--out", type=click.Path(), default=None)
@click.pass_context
@_handle_errors
def eval_cmd(ctx, formula_file, env_files, free, out):
    """Evaluate a formula file against an environment of relations."""
    with open(formula_file) as fh:
        f = formula.parse(fh.read())
    env = {}
    for path in env_files:
        name, rel = _load_rel(path)
        env[name] = rel
    free_order = _parse_attr_list(free) if free else None
    value = formula.evaluate(f, env, free_order)
    text = core.dump_relation(value, "result")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@main.command("deps")
@click.argument("rel_file", type=click.Path(exists=True))
@click.option("--fd", default=None, help="L:M functional dependency check")
@click.option("--keys", "keys_k", type=int, default=None, help="find all k-keys")
@click.option("--mvd", default=None, help="M:B1|B2|... multivalued dependency")
@click.option("--admits", type=int, default=None, help="k-key admission test")
@click.pass_context
@_handle_errors
def deps_cmd(ctx, rel_file, fd, keys_k, mvd, admits):
    """Dependency reports for a relation."""
    _, rel = _load_rel(rel_file)
    if fd is not None:
        lhs, _, rhs = fd.partition(":")
        report = dependencies.functional_dep(
            rel, _parse_attr_list(lhs), _parse_attr_list(rhs)
        )
        _emit(ctx, report.to_json(), report.to_text())
    elif keys_k is not None:
        keys = dependencies.find_keys(rel, keys_k)
        _emit(
            ctx,
            json.dumps([list(k) for k in keys]),
            "\n".join(",".join(k) for k in keys) or "(none)",
        )
    elif mvd is not None:
        m, _, blocks = mvd.partition(":")
        report = dependencies.mvd_holds(
            rel, _parse_attr_list(m), _parse_blocks(blocks)
        )
        _emit(ctx, report.to_json(), report.to_text())
    elif admits is not None:
        ok = dependencies.admits_key(rel, admits)
        _emit(ctx, json.dumps({"admits": ok, "k": admits}),
              f"admits {admits}-key: {'yes' if ok else 'no'}")
    else:
        raise PreconditionError("pick one of --fd, --keys, --mvd, --admits")


@main.command("reduce")
@click.argument("rel_file", type=click.Path(exists=True))
@click.option("--key", default=None, help="comma-separated key attributes")
@click.option("--fagin", default=None, help="M:B1|B2|...")
@click.option("--hypostatic", type=int, default=None, help="parameter count k")
@click.option("--neg-join", "neg_join", type=click.Path(exists=True),
              default=None, help="join certificate for R; produces one for not-R")
@click.option("-k", "k_param", type=int, default=1,
              help="parameter count for --neg-join")
@click.option("--identity-chain", "chain_n", type=int, default=None,
              help="chain length n (the relation file only supplies the domain)")
@click.option("-o", "--out", type=click.Path(), default="certificate",
              help="output bundle directory")
@click.pass_context
@_handle_errors
def reduce_cmd(ctx, rel_file, key, fagin, hypostatic, neg_join, k_param,
               chain_n, out):
    """Produce a verified reduction certificate bundle."""
    _, rel = _load_rel(rel_file)
    if key is not None:
        cert = reducers.key_reduction(rel, _parse_attr_list(key))
    elif fagin is not None:
        m, _, blocks = fagin.partition(":")
        cert = reducers.fagin_decompose(
            rel, _parse_attr_list(m), _parse_blocks(blocks)
        )
    elif hypostatic is not None:
        cert = reducers.hypostatic_abstraction(rel, hypostatic)
    elif neg_join is not None:
        join_cert = _load_cert(neg_join)
        cert = reducers.neg_join_projoin(join_cert, k_param)
    elif chain_n is not None:
        cert = reducers.identity_chain(chain_n, rel.domain)
    else:
        raise PreconditionError(
            "pick one of --key, --fagin, --hypostatic, --neg-join, --identity-chain"
        )
    path = formula.save_certificate(cert, out)
    click.echo(path)


@main.command("explicate")
@click.argument("cert_file", type=click.Path(exists=True))
@click.option("-o", "--out", type=click.Path(), default="explicated")
@click.pass_context
@_handle_errors
def explicate_cmd(ctx, cert_file, out):
    """Explicate a projoin certificate into a bond certificate."""
    cert = _load_cert(cert_file)
    result = diagrams.explicate_certificate(cert)
    click.echo(formula.save_certificate(result, out))


@main.command("merge")
@click.argument("cert_file", type=click.Path(exists=True))
@click.option("-o", "--out", type=click.Path(), default="merged")
@click.pass_context
@_handle_errors
def merge_cmd(ctx, cert_file, out):
    """Merge-complete a subternaric bond certificate."""
    cert = _load_cert(cert_file)
    result = diagrams.merge_complete(cert)
    click.echo(formula.save_certificate(result, out))


@main.command("diagram")
@click.argument("source", type=click.Path(exists=True))
@click.option("--dot", "dot_out", type=click.Path(), default=None,
              help="write DOT here instead of stdout")
@click.option("--stats/--no-stats", default=False,
              help="also print bond graph statistics")
@click.pass_context
@_handle_errors
def diagram_cmd(ctx, source, dot_out, stats):
    """Bonding diagram of a formula file or certificate bundle."""
    if source.endswith(".json") or __import__("os").path.isdir(source):
        f = _load_cert(source).formula
    else:
        with open(source) as fh:
            f = formula.parse(fh.read())
    graph = diagrams.build_projoin_graph(formula.normalize(f))
    dg = diagrams.to_bonding_diagram(graph)
    text = diagrams.emit_dot(dg)
    if dot_out:
        with open(dot_out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    if stats:
        st = diagrams.bond_graph_stats(dg)
        _emit(ctx, st.to_json(),
              f"V={st.V} E={st.E} C={st.C} K={st.K} I={st.I} II={st.II} III={st.III}")


@main.command("ternarity")
@click.argument("rel_file", type=click.Path(exists=True))
@click.option("--certs", multiple=True, type=click.Path(exists=True))
@click.pass_context
@_handle_errors
def ternarity_cmd(ctx, rel_file, certs):
    """Ternarity interval for a relation."""
    _, rel = _load_rel(rel_file)
    loaded = [_load_cert(c) for c in certs]
    report = diagrams.ternarity_bounds(rel, loaded, ctx.obj["caps"])
    hi = "inf" if report.upper is None else report.upper
    _emit(ctx, report.to_json(),
          f"ter in [{report.lower}, {hi}] (arity {report.arity})")


@main.command("analyze")
@click.argument("rel_file", type=click.Path(exists=True))
@click.option("--degenerate", "which", flag_value="degenerate")
@click.option("--join-reducible", "which", flag_value="join-reducible")
@click.option("--relprod2", default=None,
              help="comma-separated left block of the bipartition")
@click.option("--one-param", "which", flag_value="one-param")
@click.option("--oracle-suite", "which", flag_value="oracle-suite")
@click.option("-o", "--out", type=click.Path(), default=None,
              help="bundle directory for produced certificates")
@click.pass_context
@_handle_errors
def analyze_cmd(ctx, rel_file, which, relprod2, out):
    """Exact deciders: degeneracy, join reducibility, relative products."""
    _, rel = _load_rel(rel_file)
    caps = ctx.obj["caps"]
    if relprod2 is not None:
        cert = analysis.rel_prod_reducible2(rel, _parse_attr_list(relprod2), caps)
        if cert is None:
            _emit(ctx, json.dumps({"reducible": False}), "relprod2: no")
        else:
            if out:
                formula.save_certificate(cert, out)
            _emit(ctx, json.dumps({"reducible": True}), "relprod2: yes")
    elif which == "degenerate":
        witness = analysis.is_degenerate(rel)
        payload = {"degenerate": witness is not None,
                   "witness": [list(b) for b in witness] if witness else None}
        _emit(ctx, json.dumps(payload),
              "degenerate: " + ("|".join(",".join(b) for b in witness)
                                 if witness else "no"))
    elif which == "join-reducible":
        cert = analysis.is_join_reducible(rel)
        if cert is not None and out:
            formula.save_certificate(cert, out)
        _emit(ctx, json.dumps({"join_reducible": cert is not None}),
              "join reducible: " + ("yes" if cert is not None else "no"))
    elif which == "one-param":
        cert = analysis.one_param_ternary_projoin(rel, caps)
        if cert is not None and out:
            formula.save_certificate(cert, out)
        _emit(ctx, json.dumps({"one_param_reducible": cert is not None}),
              "one-parameter projoin: " + ("yes" if cert is not None else "no"))
    elif which == "oracle-suite":
        evidence = analysis.ternary_oracle_suite(rel, caps)
        _emit(ctx, json.dumps(evidence),
              "\n".join(json.dumps(e) for e in evidence))
    else:
        raise PreconditionError(
            "pick one of --degenerate, --join-reducible, --relprod2, "
            "--one-param, --oracle-suite"
        )


@main.command("census")
@click.option("--d", "d", type=int, required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--sample", type=int, default=None,
              help="sampled census with this many draws")
@click.option("--seed", type=int, default=0)
@click.pass_context
@_handle_errors
def census_cmd(ctx, d, n, sample, seed):
    """Count degenerate and join-reducible relations on D^n."""
    if sample is not None:
        row = analysis.census_sampled(d, n, sample, seed)
    else:
        row = analysis.census(d, n, ctx.obj["caps"])
    if ctx.obj["format"] == "json":
        click.echo(row.to_json())
    else:
        click.echo(analysis.CENSUS_CSV_HEADER)
        click.echo(row.to_csv_row())


@main.command("verify")
@click.argument("cert_file", type=click.Path(exists=True))
@click.pass_context
@_handle_errors
def verify_cmd(ctx, cert_file):
    """Re-check a certificate bundle; exit 5 when it does not verify."""
    try:
        cert = _load_cert(cert_file)
    except VerificationError as e:
        click.echo(f"invalid: {e}", err=True)
        sys.exit(EXIT_VERIFY)
    verdict = formula.check_certificate(cert)
    _emit(ctx, verdict.to_json(),
          ("valid" if verdict.valid else "INVALID")
          + f" kind={verdict.classification.kind if verdict.classification else '?'}"
          + f" factors={list(verdict.factor_arities)}")
    if not verdict.valid:
        sys.exit(EXIT_VERIFY)


if __name__ == "__main__":
    main()
