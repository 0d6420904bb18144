"""CLI for bdepth: boundary depth of filtered complexes and the asymptotic lab."""

from __future__ import annotations

import dataclasses
import logging
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import Iterator

import click
from rich.console import Console
from rich.table import Table

from bdepth import __version__
from bdepth.core.config import DepthConfig, SuiteSizes
from bdepth.core.errors import BdepthError, InvariantViolation, ParseError
from bdepth.core.novikov import as_fraction
from bdepth.formats.manifest import RunManifest, write_failure, write_json
from bdepth.ui.console import DepthConsole

logger = logging.getLogger(__name__)


class InvariantFailure(click.ClickException):
    """A computation or check failed; a failure record was written."""

    exit_code = 1


class InputError(click.ClickException):
    """Unreadable input or a bad argument."""

    exit_code = 2


# --- Shared options ---

def _parse_cutoff(ctx: click.Context, param: click.Parameter, value: str | None) -> Fraction | None:
    if value is None:
        return None
    try:
        return as_fraction(value)
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"{value!r} is not a rational number") from None


def common_options(f):
    """Options shared by every command."""
    f = click.option("--seed", type=int, envvar="BDEPTH_SEED", help="Seed for randomized checks")(f)
    f = click.option("--cutoff", type=str, envvar="BDEPTH_CUTOFF", callback=_parse_cutoff,
                     help="Fixed truncation cutoff (default: automatic)")(f)
    f = click.option("--tolerance", type=float, envvar="BDEPTH_TOLERANCE",
                     help="Numerical tolerance for the lab")(f)
    f = click.option("--resolution", type=int, envvar="BDEPTH_RESOLUTION", help="Scan grid points")(f)
    f = click.option("--out", "output_dir", type=click.Path(path_type=Path), envvar="BDEPTH_OUT",
                     help="Output directory")(f)
    f = click.option("-q", "--quiet", is_flag=True, help="Suppress non-error output")(f)
    f = click.option("-v", "--verbose", is_flag=True, help="Enable verbose output")(f)
    f = click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
                     help="YAML config file")(f)
    f = click.option("--profile", type=str, help="Load ~/.config/bdepth/{profile}.yaml")(f)
    return f


def build_config(
    seed: int | None = None,
    cutoff: Fraction | None = None,
    tolerance: float | None = None,
    resolution: int | None = None,
    output_dir: Path | None = None,
    quiet: bool = False,
    verbose: bool = False,
    config_path: Path | None = None,
    profile: str | None = None,
) -> DepthConfig:
    """Build DepthConfig from CLI options (flag > environment > profile > default)."""
    try:
        if config_path or profile:
            config = DepthConfig.load(profile=profile, config_path=config_path)
        else:
            config = DepthConfig()
    except (FileNotFoundError, ValueError) as e:
        raise InputError(str(e)) from e

    if seed is not None:
        config.seed = seed
    if cutoff is not None:
        config.cutoff = cutoff
    if tolerance is not None:
        config.tolerance = tolerance
    if resolution is not None:
        if resolution < 3:
            raise InputError(f"resolution must be at least 3, got {resolution}")
        config.resolution = resolution
    if output_dir is not None:
        config.output_dir = output_dir
    config.quiet = quiet or config.quiet
    config.verbose = verbose or config.verbose
    return config


def _setup_logging(config: DepthConfig) -> None:
    from rich.logging import RichHandler

    if config.quiet:
        level = logging.ERROR
    elif config.verbose:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@contextmanager
def _session(command: str, config: DepthConfig, inputs: list[Path]) -> Iterator[tuple[RunManifest, DepthConsole]]:
    """Run a command body; map errors to exit codes and write the manifest."""
    _setup_logging(config)
    manifest = RunManifest.from_config(command, config, inputs)
    ui = DepthConsole(verbose=config.verbose, quiet=config.quiet)
    ui.print_header(command)
    out = config.output_dir
    try:
        yield manifest, ui
    except ParseError as e:
        write_failure(out / "failure.json", manifest, e)
        raise InputError(str(e)) from e
    except BdepthError as e:
        write_failure(out / "failure.json", manifest, e)
        ui.print_error(f"{type(e).__name__}: {e}")
        raise InvariantFailure(f"{type(e).__name__} (record in {out / 'failure.json'})") from e
    except ValueError as e:
        raise InputError(str(e)) from e
    manifest.save(out / "manifest.json")
    ui.print_output(out)


def _artifact(manifest: RunManifest, config: DepthConfig, name: str) -> Path:
    manifest.artifacts.append(name)
    return config.output_dir / name


def _parse_sequence(text: str) -> list[Fraction]:
    try:
        return [as_fraction(part.strip()) for part in text.split(",") if part.strip()]
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"{text!r} is not a comma-separated list of rationals") from None


# --- Commands ---

@click.group()
@click.version_option(version=__version__, prog_name="bdepth")
def cli() -> None:
    """bdepth - boundary depth of filtered chain complexes.

    Usage:
        bdepth depth complex.yaml          # Depth, per-grading depths, witness
        bdepth morse circle.yaml           # Circle Morse depth and quadruple
        bdepth tensor left.yaml right.yaml # Product complex and bounds
        bdepth qc correction.yaml          # Quantum-correction dichotomy
        bdepth scan family.csv ...         # Exceptional-set scan
        bdepth suite --seed 0              # Randomized property suite
    """


@cli.command()
@click.argument("complex_path", type=click.Path(exists=True, path_type=Path))
@click.option("--grading", "label", type=str, help="Only report this grading")
@common_options
def depth(complex_path: Path, label: str | None, **kwargs) -> None:
    """Boundary depth of a complex file.

    Example:
        bdepth depth pair.yaml --out results/
    """
    config = build_config(**kwargs)
    from bdepth.algebra.filtered import chain_text
    from bdepth.algebra.reduction import depth_witness, reduce
    from bdepth.formats.complex_file import parse_complex

    with _session("depth", config, [complex_path]) as (manifest, ui):
        cx = parse_complex(complex_path)
        if label is not None and label not in cx.grading:
            raise click.BadParameter(f"no grading {label!r}", param_hint="--grading")
        labels = [label] if label is not None else list(cx.grading.labels)
        certificates = {k: reduce(cx.step_into(k), config) for k in labels}
        profile = {k: cert.max_gap for k, cert in certificates.items()}
        b = max(profile.values(), default=Fraction(0))

        witness = None
        ranked = [k for k in labels if certificates[k].rank]
        if ranked:
            best = max(ranked, key=lambda k: profile[k])
            w = depth_witness(cx.step_into(best), config)
            witness = {"grading": best, "gap": w.gap, "boundary": chain_text(w.boundary),
                       "primitive": chain_text(w.primitive)}
        write_json(_artifact(manifest, config, "depth.json"), {
            "b": b,
            "profile": profile,
            "witness": witness,
            "certificates": {k: cert.to_dict() for k, cert in certificates.items()},
        })
        _print_depth_summary(ui, certificates)
        ui.print_value("b", b)


@cli.command()
@click.argument("data_path", type=click.Path(exists=True, path_type=Path))
@click.option("--v", "v_text", type=str, help="Comma-separated sequence v for the embedding report")
@click.option("--w", "w_text", type=str, default="", help="Comma-separated sequence w (default: empty)")
@click.option("--bump-resolution", type=int, default=16, show_default=True,
              help="Samples of the tent profile (multiple of 4)")
@common_options
def morse(data_path: Path, v_text: str | None, w_text: str, bump_resolution: int, **kwargs) -> None:
    """Depth of a circle function from critical values (YAML) or samples (CSV).

    Example:
        bdepth morse circle.yaml
        bdepth morse samples.csv --v 1,-2,3 --w 0,1
    """
    config = build_config(**kwargs)
    from bdepth.formats.complex_file import parse_circle
    from bdepth.formats.csv_io import read_samples, write_report
    from bdepth.morse.circle import (
        SampledCircleFunction,
        beta_chain,
        beta_combinatorial,
        beta_continuous,
        critical_quadruple,
    )
    from bdepth.morse.sampled import BumpProfile, embedding_bounds, mm

    with _session("morse", config, [data_path]) as (manifest, ui):
        if data_path.suffix.lower() == ".csv":
            _, values = read_samples(data_path)
            f = SampledCircleFunction(tuple(values))
            beta = beta_continuous(f)
            result = {"beta": beta, "osc": max(values) - min(values), "mm": mm(f),
                      "samples": len(values)}
        else:
            data = parse_circle(data_path)
            beta = beta_chain(data, config)
            formula = beta_combinatorial(data)
            if beta != formula:
                raise InvariantViolation(f"chain depth {beta} != quadruple formula {formula}",
                                         {"chain": beta, "formula": formula})
            result = {"beta": beta, "m": data.m, "osc": data.osc,
                      "quadruple": critical_quadruple(data)}
        ui.print_value("beta", beta)

        if v_text is not None:
            report = embedding_bounds(_parse_sequence(v_text), _parse_sequence(w_text),
                                      BumpProfile.tent(bump_resolution))
            write_report(_artifact(manifest, config, "embedding.csv"), report)
            result["embedding_passed"] = report.passed
            ui.print_report(report)
            if not report.passed:
                write_json(_artifact(manifest, config, "morse.json"), result)
                raise InvariantViolation("embedding bounds fail: " + "; ".join(report.errors))
        write_json(_artifact(manifest, config, "morse.json"), result)


@cli.command()
@click.argument("left_path", type=click.Path(exists=True, path_type=Path))
@click.argument("right_path", type=click.Path(exists=True, path_type=Path))
@common_options
def tensor(left_path: Path, right_path: Path, **kwargs) -> None:
    """Tensor product of two complexes and its depth bounds.

    Example:
        bdepth tensor left.yaml right.yaml --out product/
    """
    config = build_config(**kwargs)
    from bdepth.algebra.tensor import tensor_complex, verify_product_bounds
    from bdepth.formats.complex_file import parse_signed_complex, serialize_signed_complex

    with _session("tensor", config, [left_path, right_path]) as (manifest, ui):
        left, right = parse_signed_complex(left_path), parse_signed_complex(right_path)
        product = tensor_complex(left, right)
        serialize_signed_complex(product, _artifact(manifest, config, "product.yaml"))
        report = verify_product_bounds(left, right, config)
        report.save(_artifact(manifest, config, "bounds.json"))
        ui.print_report(report)


@cli.command()
@click.argument("correction_path", type=click.Path(exists=True, path_type=Path))
@common_options
def qc(correction_path: Path, **kwargs) -> None:
    """Dichotomy verdict for a quantum correction file.

    Example:
        bdepth qc correction.yaml
    """
    config = build_config(**kwargs)
    from bdepth.algebra.quantum import dichotomy_audit
    from bdepth.formats.complex_file import parse_correction

    with _session("qc", config, [correction_path]) as (manifest, ui):
        q = parse_correction(correction_path)
        report = dichotomy_audit(q, config)
        report.save(_artifact(manifest, config, "qc.json"))
        for k in q.labels:
            ui.print_alternative(k, report.value(f"alternative[{k}]"))


@cli.command()
@click.argument("family_path", type=click.Path(exists=True, path_type=Path))
@click.option("--eta-min", type=float, required=True, help="Lower end of the scan (above eta0)")
@click.option("--eta-max", type=float, required=True, help="Upper end of the scan")
@click.option("--picard-eta", type=float, help="Also compare the integrator with the Picard series here")
@common_options
def scan(family_path: Path, eta_min: float, eta_max: float, picard_eta: float | None, **kwargs) -> None:
    """Exceptional-set scan of a block operator family CSV.

    Example:
        bdepth scan family.csv --eta-min 0.5 --eta-max 3 --resolution 400
    """
    config = build_config(**kwargs)
    from bdepth.formats.csv_io import read_family, write_scan
    from bdepth.lab.flow import flow_audit
    from bdepth.lab.scan import exceptional_set_scan

    with _session("scan", config, [family_path]) as (manifest, ui):
        fam = read_family(family_path)
        result = exceptional_set_scan(fam, (eta_min, eta_max), config=config)
        write_scan(_artifact(manifest, config, "scan.csv"), result)
        summary = {"eta0": result.eta0, "eta1": result.eta1, "threshold": result.threshold,
                   "candidates": result.candidates, "refined_values": result.refined_values}
        if picard_eta is not None:
            report = flow_audit(fam, picard_eta, config)
            report.save(_artifact(manifest, config, "flow.json"))
            ui.print_report(report)
            summary["flow_passed"] = report.passed
        write_json(_artifact(manifest, config, "scan.json"), summary)
        _print_scan_summary(ui, result)
        if picard_eta is not None and not summary["flow_passed"]:
            raise InvariantViolation("integrator and Picard series disagree", picard_eta)


@cli.command()
@click.argument("hessian_path", type=click.Path(exists=True, path_type=Path))
@click.option("-k", "mode", type=int, default=1, show_default=True, help="Fourier index (k >= 1)")
@click.option("--lambda-min", type=float, default=0.5, show_default=True)
@click.option("--lambda-max", type=float, default=1.0, show_default=True)
@common_options
def fourier(hessian_path: Path, mode: int, lambda_min: float, lambda_max: float, **kwargs) -> None:
    """Block family of a Fourier mode from Hessian samples, and its lambda scan.

    Example:
        bdepth fourier hessians.csv -k 1 --lambda-min 0.5 --lambda-max 1
    """
    config = build_config(**kwargs)
    from bdepth.formats.csv_io import read_hessians, write_family, write_scan
    from bdepth.lab.fourier import fourier_block_system, lambda_candidates

    with _session("fourier", config, [hessian_path]) as (manifest, ui):
        positions, hessians, T = read_hessians(hessian_path)
        fam, eta = fourier_block_system(positions, hessians, T, mode, lambda_max)
        write_family(_artifact(manifest, config, "family.csv"), fam)
        lambdas, result = lambda_candidates(positions, hessians, T, mode, (lambda_min, lambda_max), config)
        write_scan(_artifact(manifest, config, "scan.csv"), result)
        write_json(_artifact(manifest, config, "fourier.json"), {
            "k": mode,
            "lambda_range": [lambda_min, lambda_max],
            "eta_at_lambda_max": eta,
            "lambdas": lambdas,
        })
        ui.print_value("lambda candidates", ", ".join(f"{x:.10g}" for x in lambdas) or "none")


@cli.command()
@click.option("--check", "checks", multiple=True, help="Run only these checks (repeatable)")
@click.option("--instances", type=int, help="Instances per check (default: acceptance sizes)")
@click.option("--workers", type=click.IntRange(min=0), help="Worker processes (default: one per CPU)")
@common_options
def suite(checks: tuple[str, ...], instances: int | None, workers: int | None, **kwargs) -> None:
    """Seeded randomized property suite.

    Example:
        bdepth suite --seed 0
        bdepth suite --check circle --check attainment --instances 20
    """
    config = build_config(**kwargs)
    from bdepth.suite.runner import CHECKS, SuiteRunner

    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise click.BadParameter(f"unknown checks {unknown}; choose from {', '.join(CHECKS)}",
                                 param_hint="--check")
    if instances is not None:
        for f in dataclasses.fields(SuiteSizes):
            if f.name.endswith("_instances"):
                setattr(config.suite, f.name, instances)
    if workers is not None:
        config.suite.workers = workers

    with _session("suite", config, []) as (manifest, ui):
        results = SuiteRunner(config).run(list(checks) or None)
        results.save(_artifact(manifest, config, "suite.json"))
        results.save_timings(_artifact(manifest, config, "timings.json"))
        _print_suite_summary(ui, results)
        if not results.passed:
            raise InvariantViolation(
                f"{results.failure_count} suite instances failed",
                [c.name for c in results.checks if not c.passed],
            )


# --- Summaries ---

def _print_depth_summary(ui: DepthConsole, certificates) -> None:
    table = Table(title="Boundary depth")
    table.add_column("Grading", style="info")
    table.add_column("Rank", justify="right")
    table.add_column("b_k", justify="right")
    for k, cert in certificates.items():
        table.add_row(k, str(cert.rank), str(cert.max_gap))
    ui.print_table(table)


def _print_scan_summary(ui: DepthConsole, result) -> None:
    ui.print_value("eta0", f"{result.eta0:.6g}")
    ui.print_value("eta1", f"{result.eta1:.6g}")
    ui.print_value("smallest singular value", f"{result.min_singular_value:.3g}")
    if not result.candidates:
        ui.print_value("candidates", "none")
        return
    table = Table(title="Exceptional-set candidates")
    table.add_column("eta", justify="right")
    table.add_column("singular value", justify="right")
    for eta, value in zip(result.candidates, result.refined_values):
        table.add_row(f"{eta:.10g}", f"{value:.3g}")
    ui.print_table(table)


def _print_suite_summary(ui: DepthConsole, results) -> None:
    table = Table(title=f"Property suite (seed {results.seed})")
    table.add_column("Check", style="info")
    table.add_column("Instances", justify="right")
    table.add_column("Failures", justify="right")
    table.add_column("Seconds", justify="right")
    table.add_column("Status")
    for check in results.checks:
        status = "[success]OK[/success]" if check.passed else "[error]FAIL[/error]"
        seconds = f"{check.seconds:.2f}"
        if not check.within_budget:
            seconds = f"[warning]{seconds} > {check.budget:g}[/warning]"
        table.add_row(check.name, str(check.instances), str(len(check.failures)), seconds, status)
    ui.print_table(table)


def main() -> None:
    """Entry point."""
    cli()


if __name__ == "__main__":
    main()
