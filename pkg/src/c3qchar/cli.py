"""Command-line interface.

Four commands cover the workflows the library automates: ``compute`` prints a
single q-character with its statistics, ``verify`` sweeps a relation system
and reports each instance, ``decompose`` splits a restriction into
irreducible characters, and ``certify`` checks a truncation certificate.

Exit codes are a stable contract: 0 on success, 1 for usage errors, 2 for a
mathematical mismatch (a failed identity, a ``--method both`` disagreement, a
failed certificate condition), 3 when the term cap is exceeded.
"""

from __future__ import annotations

import dataclasses
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from .cartan import Weight, weyl_dim
from .fm import (
    TruncationCertificate,
    table1_certificate,
    verify_truncation_certificate,
    TABLE1_ROWS,
)
from .monomial import LMonomial
from .qchar import QCharacter
from .restriction import conjecture_prediction, decompose, restrict
from .tsystem import (
    CharacterCache,
    FmProvider,
    ModuleLabel,
    compute_by_recursion,
    fm_character,
    highest_monomial,
    label,
    system_instances,
    verify_relation,
)

ENV_CACHE_DIR = "C3QCHAR_CACHE_DIR"


@dataclasses.dataclass(frozen=True)
class CliConfig:
    """Settings shared by every command, filled from the top-level flags."""

    cache_dir: Path | None = None
    format: str = "text"
    max_terms: int = 2_000_000
    strict_paper: bool = False
    threads: int = 1

    def __post_init__(self) -> None:
        if self.format not in ("text", "json"):
            raise ValueError(f"format must be 'text' or 'json', got {self.format!r}")
        if self.max_terms <= 0:
            raise ValueError("max_terms must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def cache(self) -> CharacterCache:
        return CharacterCache(directory=self.cache_dir)


# spectral shifts that place each fundamental highest monomial at i_0
_FUNDAMENTAL = {1: ("T", (0, 0, 1), -2), 2: ("T", (0, 1, 0), -1), 3: ("T", (1, 0, 0), 0)}


def _parse_label(family: str, params: tuple[int, ...], shift: int) -> ModuleLabel:
    if family == "fundamental":
        if len(params) != 1 or params[0] not in (1, 2, 3):
            raise ValueError("fundamental takes one node index (1, 2 or 3)")
        fam, sub, base = _FUNDAMENTAL[params[0]]
        return label(fam, *sub, s=shift + base)
    return label(family, *params, s=shift)


def _render_char(x: QCharacter) -> str:
    if not x.terms:
        return "0"
    parts = []
    for m, c in x.sorted_terms():
        parts.append(str(m) if c == 1 else f"{c}*{m}")
    return " + ".join(parts)


def _weight_name(w: Weight) -> str:
    parts = [
        f"{c}w{i}" if c > 1 else f"w{i}"
        for i, c in zip((1, 2, 3), w.coords)
        if c
    ]
    return "V(" + (" + ".join(parts) or "0") + ")"


def _echo_json(doc) -> None:
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


@click.group()
@click.option(
    "--cache-dir",
    type=click.Path(file_okay=False, path_type=Path),
    envvar=ENV_CACHE_DIR,
    default=None,
    help=f"Directory for persistent character files (default: ${ENV_CACHE_DIR}).",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["text", "json"]),
    default="text",
    help="Output rendering.",
)
@click.option(
    "--max-terms",
    type=int,
    default=2_000_000,
    help="Abort (exit 3) when a computed character exceeds this many terms.",
)
@click.option(
    "--strict-paper",
    is_flag=True,
    help="Instantiate relations with the circulated shifts instead of the corrected ones.",
)
@click.option("--threads", type=int, default=1, help="Verification worker threads.")
@click.pass_context
def cli(ctx, cache_dir, fmt, max_terms, strict_paper, threads):
    """Exact q-characters and extended T-systems for quantum affine C3."""
    if cache_dir is not None:
        cache_dir.mkdir(parents=True, exist_ok=True)
    ctx.obj = CliConfig(
        cache_dir=cache_dir,
        format=fmt,
        max_terms=max_terms,
        strict_paper=strict_paper,
        threads=threads,
    )


@cli.command()
@click.argument("family")
@click.argument("params", nargs=-1, type=int)
@click.option("--s", "shift", type=int, default=0, help="Spectral shift.")
@click.option(
    "--method",
    type=click.Choice(["fm", "recursion", "both"]),
    default="fm",
    help="Computation path; 'both' cross-checks them and exits 2 on mismatch.",
)
@click.pass_obj
def compute(cfg: CliConfig, family, params, shift, method):
    """Compute one q-character.

    FAMILY is a catalogue name (T, Ttilde, S, R, U, V, P, O, their *bar
    duals, or 'fundamental'), PARAMS its subscripts.
    """
    lbl = _parse_label(family, params, shift)
    cache = cfg.cache()
    chars: dict[str, QCharacter] = {}
    if method in ("fm", "both"):
        chars["fm"] = fm_character(lbl, cache=cache)
    if method in ("recursion", "both"):
        chars["recursion"] = compute_by_recursion(lbl, cache=cache)
    if method == "both" and chars["fm"] != chars["recursion"]:
        click.echo(
            f"MISMATCH: fm and recursion disagree on {lbl} "
            f"({len(chars['fm'].terms)} vs {len(chars['recursion'].terms)} terms)",
            err=True,
        )
        sys.exit(2)
    x = chars["fm"] if "fm" in chars else chars["recursion"]
    if len(x.terms) > cfg.max_terms:
        click.echo(
            f"term cap exceeded: {len(x.terms)} > {cfg.max_terms}", err=True
        )
        sys.exit(3)
    stats = {
        "terms": len(x.terms),
        "dominant": len(x.dominant_monomials()),
        "dimension": x.dimension(),
    }
    if cfg.format == "json":
        _echo_json(
            {
                "label": lbl.to_json(),
                "method": method,
                "stats": stats,
                "character": x.to_json(),
            }
        )
    else:
        click.echo(f"label: {lbl}")
        click.echo(
            f"terms: {stats['terms']}  dominant: {stats['dominant']}  "
            f"dimension: {stats['dimension']}"
        )
        click.echo(_render_char(x))


def _top_product(*labels) -> str:
    if any(x.family == "Zero" for x in labels):
        return "0"
    prod = LMonomial.one()
    for x in labels:
        prod = prod * highest_monomial(x)
    return str(prod)


def _instance_failure_diagnostics(inst) -> list[str]:
    lines = [f"  ! lhs top     : {_top_product(inst.left, inst.right)}"]
    if not inst.product_type:
        lines.append(f"  ! ladder top  : {_top_product(inst.top, inst.bottom)}")
    lines.append(f"  ! sources top : {_top_product(*inst.sources)}")
    return lines


@cli.command()
@click.argument("system", type=click.Choice(["usual", "I", "II", "III", "IV"]))
@click.option("--max", "max_param", type=int, default=1, help="Parameter bound.")
@click.option(
    "--s",
    "s_values",
    type=int,
    multiple=True,
    default=(0,),
    help="Spectral shifts to sweep (repeatable).",
)
@click.option(
    "--method",
    type=click.Choice(["auto", "expand", "ledger"]),
    default="auto",
    help="Comparison strategy per instance.",
)
@click.option(
    "--strict-paper",
    is_flag=True,
    help="Use the circulated shifts (negative control; corrected entries fail).",
)
@click.pass_obj
def verify(cfg: CliConfig, system, max_param, s_values, method, strict_paper):
    """Verify every instance of one relation system.

    Sweeps all parameter tuples up to --max at each requested shift and
    reports one line per instance; exits 2 if any identity fails.
    """
    strict = strict_paper or cfg.strict_paper
    if max_param < 1:
        raise ValueError("--max must be >= 1")
    instances = []
    for s in sorted(set(s_values)):
        instances.extend(
            system_instances(system, max_param, s=s, strict_paper=strict)
        )
    instances.sort(key=lambda inst: inst.key())
    cache = cfg.cache()
    provider = None

    def run(inst):
        t0 = time.time()
        rep = verify_relation(inst, FmProvider(cache), method=method)
        cache.trim()
        return rep, time.time() - t0

    t_start = time.time()
    results = []
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = [pool.submit(run, inst) for inst in instances]
            for inst, fut in zip(instances, futures):
                results.append((inst, *fut.result()))
    else:
        for inst in instances:
            results.append((inst, *run(inst)))
    total = time.time() - t_start

    failed = [r for r in results if not r[1].ok]
    if cfg.format == "json":
        _echo_json(
            {
                "system": system,
                "max_param": max_param,
                "shifts": sorted(set(s_values)),
                "strict_paper": strict,
                "ok": not failed,
                "seconds": round(total, 3),
                "reports": [
                    dict(rep.to_json(), seconds=round(dt, 3))
                    for _, rep, dt in results
                ],
            }
        )
    else:
        for inst, rep, dt in results:
            dom = (
                f"dominants: lhs={len(rep.lhs_dominants)} "
                f"sources={len(rep.source_dominants)}"
            )
            click.echo(f"{rep.summary()}  {dom}  [{dt:.2f}s, {rep.method}]")
            if not rep.ok:
                for line in _instance_failure_diagnostics(inst):
                    click.echo(line)
        click.echo(
            f"{len(results) - len(failed)}/{len(results)} instances verified "
            f"in {total:.1f}s"
        )
    if failed:
        sys.exit(2)


@cli.command("decompose")
@click.argument("family")
@click.argument("params", nargs=-1, type=int)
@click.option("--s", "shift", type=int, default=0, help="Spectral shift.")
@click.pass_obj
def decompose_cmd(cfg: CliConfig, family, params, shift):
    """Restrict a character and split it into irreducibles.

    When the label shape has a catalogued splitting prediction the computed
    decomposition is compared against it.
    """
    lbl = _parse_label(family, params, shift)
    x = fm_character(lbl, cache=cfg.cache())
    if len(x.terms) > cfg.max_terms:
        click.echo(f"term cap exceeded: {len(x.terms)} > {cfg.max_terms}", err=True)
        sys.exit(3)
    dec = decompose(restrict(x))
    items = sorted(dec.items(), key=lambda t: (-weyl_dim(t[0]), t[0].coords))

    prediction = None
    verdict = "none catalogued for this shape"
    if not lbl.barred and lbl.family in ("T", "Ttilde") and lbl.params:
        try:
            prediction = conjecture_prediction(lbl.family, *lbl.params)
        except ValueError:
            prediction = None
    if prediction is not None:
        verdict = "matches" if prediction == dec else "DIFFERS"

    if cfg.format == "json":
        doc = {
            "label": lbl.to_json(),
            "dimension": x.dimension(),
            "decomposition": [
                {"weight": list(w.coords), "mult": c, "dim": weyl_dim(w)}
                for w, c in items
            ],
            "prediction": verdict,
        }
        if prediction is not None and verdict == "DIFFERS":
            doc["predicted"] = [
                {"weight": list(w.coords), "mult": c}
                for w, c in sorted(prediction.items(), key=lambda t: t[0].coords)
            ]
        _echo_json(doc)
    else:
        click.echo(f"label: {lbl}")
        click.echo(f"dimension: {x.dimension()}")
        summands = []
        for w, c in items:
            summands.extend([_weight_name(w)] * c)
        click.echo("decomposition: " + " + ".join(summands))
        for w, c in items:
            click.echo(f"  {_weight_name(w)}  mult {c}  dim {weyl_dim(w)}")
        click.echo(f"prediction: {verdict}")
        if verdict == "DIFFERS":
            for w, c in sorted(prediction.items(), key=lambda t: t[0].coords):
                click.echo(f"  predicted {_weight_name(w)}  mult {c}")


def _normalise_row(row: str) -> str:
    if row not in TABLE1_ROWS and row.startswith("Tt_"):
        row = "Ttilde_" + row[3:]
    return row


@cli.command()
@click.argument("row")
@click.argument("params", nargs=-1, type=int)
@click.option(
    "--corrupt",
    is_flag=True,
    help="Dev flag: drop one interior member before checking (negative control).",
)
@click.pass_obj
def certify(cfg: CliConfig, row, params, corrupt):
    """Build and check one truncation certificate.

    ROW names a catalogued family shape (e.g. T_k_l_0, Ttilde_1_0_m) and
    PARAMS fills its subscripts in the order the name lists them.
    """
    row = _normalise_row(row)
    if row not in TABLE1_ROWS:
        known = ", ".join(sorted(TABLE1_ROWS))
        raise ValueError(f"unknown certificate row {row!r}; known rows: {known}")
    names = TABLE1_ROWS[row][1]
    if len(params) != len(names):
        raise ValueError(
            f"row {row} takes {len(names)} parameter(s) {names}, got {len(params)}"
        )
    cert = table1_certificate(row, **dict(zip(names, params)))
    if corrupt:
        victim = next(
            m for m in sorted(cert.M, key=lambda m: m.items) if not m.is_dominant
        )
        cert = TruncationCertificate(cert.m_plus, cert.U, frozenset(cert.M - {victim}))
    report = verify_truncation_certificate(cert)

    if cfg.format == "json":
        _echo_json(
            {
                "row": row,
                "params": dict(zip(names, params)),
                "certificate": cert.to_json(),
                "corrupted": bool(corrupt),
                "ok": bool(report),
                "failures": list(report.failures),
            }
        )
    else:
        args = " ".join(f"{n}={v}" for n, v in zip(names, params))
        click.echo(
            f"row {row} {args}: m_plus = {cert.m_plus}, members = {len(cert.M)}"
        )
        if report:
            click.echo("certificate: ok")
        else:
            click.echo("certificate: FAILED")
            for f in report.failures:
                click.echo(f"  {f}")
    if not report:
        sys.exit(2)


def main(argv: list[str] | None = None) -> None:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, prog_name="c3qchar", standalone_mode=False)
    except click.exceptions.Exit as e:  # --help and friends
        sys.exit(e.exit_code)
    except click.ClickException as e:
        click.echo(f"error: {e.format_message()}", err=True)
        sys.exit(1)
    except ValueError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    sys.exit(0)


if __name__ == "__main__":
    main()
