import asyncio
import functools
import json
import logging
from dataclasses import replace
from pathlib import Path

import click
import numpy as np
from prometheus_client import CollectorRegistry

from .codec import decode_code, encode_code
from .config import SCALAR_BITS, logger
from .data.fvecs import write_fvecs
from .data.loader import GENERATOR_KINDS, INPUT_FORMATS, load_matrix
from .data.raw import write_raw
from .data.synthetic import gen_random_cities
from .data.text import format_delimited
from .data.tsplib import format_tsplib
from .env import SweepConfigFile
from .errors import BqqError
from .matrix import mse, standardize
from .methods import METHODS, format_params, get_method, quantize_matrix
from .metrics import SweepMetrics
from .pubo import AnnealParams
from .quantizers.analysis import error_upper_bound, feasible_point_error, inference_cost
from .quantizers.bqq import BqqCode, intermediate_dim, pseudo_bits, solve_subproblem
from .runner import records_to_csv, records_to_json, run_sweep, write_records


def handle_errors(command):
    """Report library and I/O failures as click errors (exit status 1)."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (BqqError, OSError) as e:
            raise click.ClickException(str(e)) from e

    return wrapper


def anneal_options(command):
    """--steps, --t-init, --t-fin, --eta and --zeta; unset flags fall back to BQQ_* env."""
    options = [
        click.option("--steps", type=int, help="AMFD iterations per stack."),
        click.option("--t-init", type=float, help="Initial temperature."),
        click.option("--t-fin", type=float, help="Final temperature."),
        click.option("--eta", type=float, help="Learning rate."),
        click.option("--zeta", type=float, help="Accelerating rate."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_anneal(steps, t_init, t_fin, eta, zeta) -> AnnealParams:
    return AnnealParams.auto_detect(
        n_step=steps, t_init=t_init, t_fin=t_fin, eta=eta, zeta=zeta
    )


def parse_params(items: tuple[str, ...]) -> dict[str, str]:
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            msg = f"parameters look like key=value, got {item!r}"
            raise click.BadParameter(msg, param_hint="--param")
        params[key.strip()] = value.strip()
    return params


def write_matrix(path: Path, w: np.ndarray):
    """Pick the output format from the suffix: csv/txt, fvecs, anything else raw."""
    suffix = path.suffix.lower()
    if suffix in (".csv", ".txt", ".tsv"):
        path.write_text(format_delimited(w))
    elif suffix == ".fvecs":
        path.write_bytes(write_fvecs(w))
    else:
        path.write_bytes(write_raw(w))


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log at DEBUG level.")
def main(verbose: bool):
    """bqqkit: Binary Quadratic Quantization and baseline matrix quantizers."""
    if verbose:
        logger.setLevel(logging.DEBUG)
        for handler in logger.handlers:
            handler.setLevel(logging.DEBUG)


@main.command()
@click.argument("source")
@click.option(
    "--method",
    "-m",
    type=click.Choice(list(METHODS)),
    default="bqq",
    show_default=True,
    help="Quantization method.",
)
@click.option("--param", "-P", "params", multiple=True, help="Method parameter key=value.")
@click.option("--l-scale", type=float, help="BQQ intermediate-dimension multiplier.")
@click.option("--seed", type=int, default=0, show_default=True, help="Random seed.")
@anneal_options
@click.option("--group-rows", type=int, help="Tile height for group-wise quantization.")
@click.option("--group-cols", type=int, help="Tile width for group-wise quantization.")
@click.option(
    "--scalar-bits",
    type=click.Choice(["32", "64"]),
    default=str(SCALAR_BITS),
    show_default=True,
    help="Stored width of every scalar.",
)
@click.option(
    "--input-format", type=click.Choice(INPUT_FORMATS), default="auto", show_default=True
)
@click.option(
    "--out", "-o", type=click.Path(dir_okay=False, path_type=Path), required=True,
    help="Where to write the serialized code.",
)
@click.option(
    "--summary", type=click.Path(dir_okay=False, path_type=Path),
    help="Also write the JSON summary to this file.",
)
@handle_errors
def quantize(
    source, method, params, l_scale, seed, steps, t_init, t_fin, eta, zeta,
    group_rows, group_cols, scalar_bits, input_format, out, summary,
):
    """Quantize a matrix file (or gen:... spec) and print a JSON summary.

    The matrix is standardized first; the record is stored with the code so that
    dequantize returns original units. The reported MSE is that of the stored code.
    """
    given = parse_params(params)
    if l_scale is not None:
        if method != "bqq":
            msg = "--l-scale only applies to --method bqq"
            raise click.UsageError(msg)
        given["l_scale"] = l_scale
    resolved = get_method(method).resolve(given)
    scalar_width = int(scalar_bits)

    w = load_matrix(source, input_format, seed)
    w_std, record = standardize(w)
    code = quantize_matrix(
        method,
        w_std,
        resolved,
        seed=seed,
        anneal=build_anneal(steps, t_init, t_fin, eta, zeta),
        group_rows=group_rows,
        group_cols=group_cols,
    )
    data = encode_code(code, method, standardization=record, scalar_bits=scalar_width)
    out.write_bytes(data)

    stored = decode_code(data)
    footprint = code.footprint(scalar_width)
    report = {
        "method": method,
        "params": format_params(resolved),
        "seed": seed,
        "shape": list(w.shape),
        "memory_bits": footprint.total_bits,
        "binary_bits": footprint.binary_bits,
        "scalar_count": footprint.scalar_count,
        "scalar_bits": scalar_width,
        "kilobytes": footprint.kilobytes,
        "mse": mse(w, stored.dequantize()),
        "mse_standardized": mse(w_std, stored.code.dequantize()),
    }
    if isinstance(code, BqqCode):
        report["pseudo_bits"] = pseudo_bits(code)
    text = json.dumps(report, indent=2)
    if summary is not None:
        summary.write_text(text + "\n")
    click.echo(text)
    logger.info(f"Wrote {len(data)} bytes to {out}")


@main.command()
@click.argument("code_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("output", type=click.Path(dir_okay=False, path_type=Path))
@handle_errors
def dequantize(code_file: Path, output: Path):
    """Reconstruct a matrix from a code file (raw, csv or fvecs by suffix)."""
    stored = decode_code(code_file.read_bytes())
    w = stored.dequantize()
    write_matrix(output, w)
    click.echo(f"Wrote {w.shape[0]}x{w.shape[1]} {stored.method} reconstruction to {output}")


@main.command()
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--seed", "seeds", type=int, multiple=True, help="Override SEEDS.")
@anneal_options
@click.option("--output", help="Override the OUTPUT path stem.")
@click.option(
    "--format", "formats", type=click.Choice(["csv", "json"]), multiple=True,
    help="Override FORMATS.",
)
@click.option(
    "--l-scale", "l_scales", type=float, multiple=True,
    help="Override the BQQ l_scale grid (replaces BQQ_BUDGET).",
)
@click.option("--group-rows", type=int, help="Override GROUP_ROWS.")
@click.option("--group-cols", type=int, help="Override GROUP_COLS.")
@click.option("--scalar-bits", type=click.Choice(["32", "64"]), help="Override SCALAR_BITS.")
@click.option("--original-scale", is_flag=True, help="Add MSE in original units.")
@click.option("--wall-time", is_flag=True, help="Record measured wall times.")
@click.option(
    "--metrics-file", type=click.Path(dir_okay=False, path_type=Path),
    help="Write Prometheus metrics in text format here.",
)
@handle_errors
def sweep(
    config_file, seeds, steps, t_init, t_fin, eta, zeta, output, formats,
    l_scales, group_rows, group_cols, scalar_bits, original_scale, wall_time,
    metrics_file,
):
    """Run the MSE-versus-memory sweep described by a dotenv CONFIG_FILE."""
    config = SweepConfigFile(config_file).load()
    anneal_flags = {"n_step": steps, "t_init": t_init, "t_fin": t_fin, "eta": eta, "zeta": zeta}
    overrides = {key: value for key, value in anneal_flags.items() if value is not None}
    changes = {}
    if overrides:
        changes["anneal"] = replace(config.anneal, **overrides)
    if seeds:
        changes["seeds"] = seeds
    if output:
        changes["output"] = output
    if formats:
        changes["formats"] = formats
    if l_scales:
        if "bqq" not in config.methods:
            msg = "--l-scale needs bqq among the configured methods"
            raise click.UsageError(msg)
        bqq_grid = {**config.grids.get("bqq", {}), "l_scale": list(l_scales)}
        changes["grids"] = {**config.grids, "bqq": bqq_grid}
        changes["bqq_budget"] = ()
    if group_rows is not None:
        changes["group_rows"] = group_rows
    if group_cols is not None:
        changes["group_cols"] = group_cols
    if scalar_bits is not None:
        changes["scalar_bits"] = int(scalar_bits)
    if original_scale:
        changes["original_scale"] = True
    if wall_time:
        changes["record_wall_time"] = True
    config = replace(config, **changes)

    metrics = SweepMetrics(registry=CollectorRegistry()) if metrics_file else None
    records = asyncio.run(run_sweep(config, metrics))
    if metrics is not None:
        metrics.write(metrics_file)

    if config.output:
        for path in write_records(
            records, config.output, config.formats, original_scale=config.original_scale
        ):
            click.echo(f"Wrote {path}")
    elif config.formats[0] == "json":
        click.echo(records_to_json(records, original_scale=config.original_scale), nl=False)
    else:
        click.echo(records_to_csv(records, original_scale=config.original_scale), nl=False)


@main.command()
@click.argument("source")
@click.option("--l", "l_dim", type=int, help="Intermediate dimension [default: round(mn/(m+n))].")
@click.option("--seed", type=int, default=0, show_default=True, help="Random seed.")
@anneal_options
@click.option(
    "--input-format", type=click.Choice(INPUT_FORMATS), default="auto", show_default=True
)
@handle_errors
def bound(source, l_dim, seed, steps, t_init, t_fin, eta, zeta, input_format):
    """Print the single-stack error bound next to the error BQQ p=1 achieves."""
    w = load_matrix(source, input_format, seed)
    m, n = w.shape
    l_dim = l_dim or intermediate_dim(m, n)
    upper = error_upper_bound(w, l_dim)
    feasible = feasible_point_error(w, l_dim)
    stack = solve_subproblem(w, build_anneal(steps, t_init, t_fin, eta, zeta), l_dim, seed)
    achieved_mse = mse(w, stack.dequantize())
    click.echo(f"shape: {m}x{n}")
    click.echo(f"l: {l_dim}")
    click.echo(f"upper_bound: {upper!r}")
    click.echo(f"sign_svd_error: {feasible!r}")
    click.echo(f"achieved_error: {float(np.sqrt(achieved_mse * m * n))!r}")
    click.echo(f"achieved_mse: {achieved_mse!r}")


@main.command()
@click.argument("m", type=int)
@click.argument("n", type=int)
@click.argument("l_dim", metavar="L", type=int)
@click.argument("d", type=int, default=1)
@click.option("--w-and", type=float, default=1.0, show_default=True, help="AND weight.")
@click.option("--w-add", type=float, default=1.0, show_default=True, help="ADD weight.")
@click.option("--w-mul", type=float, default=1.0, show_default=True, help="MUL weight.")
@handle_errors
def cost(m, n, l_dim, d, w_and, w_add, w_mul):
    """Print the operation counts of a first-order layer and a BQQ layer."""
    report = inference_cost(m, n, l_dim, d, (w_and, w_add, w_mul))
    click.echo(f"foq: and={report.foq_and} add={report.foq_add} mul={report.foq_mul}")
    click.echo(f"bqq: and={report.bqq_and} add={report.bqq_add} mul={report.bqq_mul}")
    click.echo(f"ratio: {report.ratio:.6f}")


@main.command()
@click.argument("kind", type=click.Choice(GENERATOR_KINDS))
@click.argument("output", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--rows", type=int, default=128, show_default=True)
@click.option("--cols", type=int, help="Defaults to --rows.")
@click.option("--rank", type=int, default=4, show_default=True)
@click.option("--noise", type=float, default=0.01, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@handle_errors
def gen(kind, output, rows, cols, rank, noise, seed):
    """Write a synthetic matrix (or, for cities to a .tsp file, the instance)."""
    cols = cols or rows
    if kind == "cities" and output.suffix.lower() == ".tsp":
        output.write_text(format_tsplib(gen_random_cities(rows, seed)))
        click.echo(f"Wrote {rows} cities to {output}")
        return
    spec = f"gen:{kind}:{rows}x{cols}:{rank}:{noise}"
    w = load_matrix(spec, seed=seed)
    write_matrix(output, w)
    click.echo(f"Wrote {w.shape[0]}x{w.shape[1]} {kind} matrix to {output}")


@main.command("methods")
def list_methods():
    """List quantization methods with their parameters and defaults."""
    for method in METHODS.values():
        click.echo(f"{method.id}: {method.description}")
        for param in method.params:
            click.echo(f"  {param.name}={param.default}  {param.help}")


@main.command("init-config")
@click.argument("config_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--input", "input_source", required=True, help="File path or gen:... spec.")
@click.option(
    "--method", "-m", "methods", type=click.Choice(list(METHODS)), multiple=True,
    help="Methods to sweep [default: bqq, uq, bcq].",
)
@click.option("--seed", "seeds", type=int, multiple=True, help="Seeds [default: 0].")
@handle_errors
def init_config(config_file, input_source, methods, seeds):
    """Write a starter sweep config."""
    if config_file.exists():
        msg = f"{config_file} already exists"
        raise click.ClickException(msg)
    SweepConfigFile(config_file).write_template(
        input_source, list(methods or ("bqq", "uq", "bcq")), list(seeds or (0,))
    )
    click.echo(f"Wrote {config_file}")


if __name__ == "__main__":
    main()
