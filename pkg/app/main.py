"""
Universal Teichmüller Space Toolkit

Batch command line: load boundary maps and vector fields from a TOML run configuration,
run one computation and write CSV data plus a JSON summary.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from app import __version__
from app.config import RunConfig, Settings, get_settings, load_run_config
from app.errors import DomainError, InvariantViolation, ToolkitError, UsageError, exit_code_for
from app.models.differentials import RationalQD
from app.models.fields import Chart, FieldKind, VectorField
from app.models.kernels import KernelKind
from app.models.reports import ErrorRecord, RunSummary
from app.services import (
    circlemap,
    corpus,
    extension,
    hilbert,
    quaddiff,
    quasifuchsian,
    teichmetric,
    trigapprox,
    vectorfield,
)
from app.storage.artifacts import write_csv, write_json

logger = logging.getLogger(__name__)

MODULE = "cli"

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# (results, files) produced by one subcommand
Outcome = Tuple[Dict[str, Any], List[str]]


class RunContext:
    """Everything a subcommand needs: validated config, settings and the output directory"""

    def __init__(self, command: str, config: RunConfig, settings: Settings, output_dir: Path):
        self.command = command
        self.config = config
        self.settings = settings
        self.output_dir = output_dir
        self.warnings: List[str] = []

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def warn(self, message: str) -> None:
        logger.warning(message)
        self.warnings.append(message)


def _member_id(spec: Dict[str, Any], index: int, fallback: str) -> str:
    return str(spec.get("id") or f"{index:02d}-{fallback}")


def _angle_field(V: VectorField) -> VectorField:
    if V.chart != Chart.ANGLE.value:
        raise DomainError(f"field {V.name} must be given in the angle chart for this command", module=MODULE)
    return V


def run_qs_measure(ctx: RunContext) -> Outcome:
    """Quasisymmetry constant, Hölder bound and ratio distortion per map."""
    section = ctx.config.qs_measure
    xs = np.linspace(section.x_min, section.x_max, section.nx)
    ts = np.geomspace(section.t_max, section.t_min, section.nt)
    results: Dict[str, Any] = {}
    files = []
    for index, spec in enumerate(ctx.config.maps):
        h = corpus.build_map(spec)
        member = _member_id(spec, index, h.name)
        m = circlemap.qs_constant(h, xs, ts)
        profile = circlemap.ratio_distortion_profile(h, ts, xs)
        record = {
            "map": h.name,
            "qs_constant": m,
            "holder_exponent_bound": circlemap.holder_exponent_bound(m),
            "ratio_distortion_trends_to_zero": profile.trends_to_zero(),
        }
        if h.is_circle:
            record["in_neighborhood"] = circlemap.in_neighborhood(h, section.neighborhood_eps)
        results[member] = record
        name = f"qs_{member}.csv"
        write_csv(ctx.path(name), ["t", "epsilon"], zip(profile.scales, profile.epsilon))
        files.append(name)
        logger.info(f"M({h.name}) = {m:.6g}")
    return results, files


def _extension_nodes(section) -> np.ndarray:
    return section.grid().points()


def run_extend(ctx: RunContext) -> Outcome:
    """Averaging extension sampled on the lattice, with the dilatation upper bound."""
    section = ctx.config.extend
    z = _extension_nodes(section)
    results: Dict[str, Any] = {}
    files = []
    for index, spec in enumerate(ctx.config.maps):
        h = corpus.build_map(spec)
        member = _member_id(spec, index, h.name)
        H = extension.ba_extend(h, doubled=section.doubled)
        w = H(z)
        k = extension.max_dilatation(H, z)
        results[member] = {
            "map": h.name,
            "doubled": section.doubled,
            "k_max": k,
            "d_upper": 0.5 * math.log(k),
            "max_displacement": float(np.max(np.abs(w - z))),
        }
        name = f"extend_{member}.csv"
        write_csv(ctx.path(name), ["x", "y", "re_H", "im_H"],
                  ([p.real, p.imag, q.real, q.imag] for p, q in zip(z, w)))
        files.append(name)
    return results, files


def run_dilatation_field(ctx: RunContext) -> Outcome:
    section = ctx.config.dilatation_field
    z = _extension_nodes(section)
    results: Dict[str, Any] = {}
    files = []
    for index, spec in enumerate(ctx.config.maps):
        h = corpus.build_map(spec)
        member = _member_id(spec, index, h.name)
        field = extension.beltrami_of(extension.ba_extend(h, doubled=section.doubled), z, section.step)
        results[member] = {
            "map": h.name,
            "k_max": field.k_max,
            "mu_sup": field.mu_sup,
            "consistency_defect": field.consistency_defect(),
        }
        name = f"dilatation_{member}.csv"
        write_csv(ctx.path(name), ["x", "y", "re_mu", "im_mu", "k"], field.rows())
        files.append(name)
    return results, files


def _fourier_reference(V: VectorField, size: int) -> VectorField:
    if V.kind != FieldKind.CLOSED_FORM.value:
        return V
    grid = 2.0 * math.pi * np.arange(size) / size
    return VectorField.sampled(np.asarray(V(grid), dtype=float), name=V.name)


def run_hilbert(ctx: RunContext) -> Outcome:
    """
    Principal-value Hilbert transform against the Fourier multiplier route.

    With [hilbert] beltrami the rotated-coefficient route is added on line-chart points.
    Its column is neg_v_mu_hat, since that route returns -V of the rotated coefficient.
    """
    section = ctx.config.hilbert
    if section.method not in ("nodes", "adaptive"):
        raise DomainError(f"unknown principal value method {section.method!r}", module=MODULE)
    xs = 2.0 * math.pi * np.arange(section.samples) / section.samples
    tol = ctx.config.tolerance_model()
    results: Dict[str, Any] = {}
    files = []
    for index, spec in enumerate(ctx.config.vector_fields):
        V = _angle_field(corpus.build_field(spec))
        member = _member_id(spec, index, V.name)
        pv = hilbert.hilbert_pv(V, xs, tol=tol, method=section.method, nodes=section.nodes).as_array()
        reference = hilbert.hilbert_fourier(_fourier_reference(V, section.nodes))
        fourier = np.asarray(reference(xs), dtype=float)
        results[member] = {
            "field": V.name,
            "method": section.method,
            "max_difference": float(np.max(np.abs(pv - fourier))),
        }
        name = f"hilbert_{member}.csv"
        write_csv(ctx.path(name), ["x", "pv", "fourier"], zip(xs, pv, fourier))
        files.append(name)

        if section.beltrami:
            agreement = hilbert.beltrami_agreement(V, section.beltrami_points, ctx.config.grid_model(), tol,
                                                   fourier=reference)
            if not agreement.converged:
                ctx.warn(f"{V.name}: Beltrami route quadrature did not converge (error {agreement.error:.3g})")
            results[member].update({
                "beltrami_residual": agreement.residual,
                "beltrami_error": agreement.error,
                "beltrami_converged": agreement.converged,
            })
            name = f"hilbert_{member}_beltrami.csv"
            write_csv(ctx.path(name), ["u", "neg_v_mu_hat", "fourier_line"],
                      zip(agreement.points, agreement.neg_v_mu_hat, agreement.fourier))
            files.append(name)
    return results, files


def run_approx_rate(ctx: RunContext) -> Outcome:
    """Jackson rate profile and the forward Zygmund chain check."""
    section = ctx.config.approx_rate
    results: Dict[str, Any] = {}
    files = []
    x_grid = np.linspace(0.0, 2.0 * math.pi, 257)
    t_grid = 2.0 ** -np.arange(1, section.zygmund_scales + 1, dtype=float)
    for index, spec in enumerate(ctx.config.vector_fields):
        V = _angle_field(corpus.build_field(spec))
        member = _member_id(spec, index, V.name)
        profile = trigapprox.rate_profile(V, section.n_list, section.kind)
        implied = trigapprox.zygmund_from_rate(profile)
        measured = vectorfield.zygmund_seminorm(V, x_grid, t_grid)
        chain_ok = measured <= 1.1 * implied
        if not chain_ok:
            ctx.warn(f"{V.name}: measured Zygmund quotient {measured:.6g} exceeds 20 C' = {implied:.6g}")
        results[member] = {
            "field": V.name,
            "kind": KernelKind(section.kind).value,
            "rate_constant": profile.bound,
            "spread": profile.spread(),
            "zygmund_from_rate": implied,
            "zygmund_measured": measured,
            "chain_ok": chain_ok,
        }
        name = f"rate_{member}.csv"
        write_csv(ctx.path(name), ["n", "error", "scaled"], profile.rows())
        files.append(name)
    return results, files


def _line_field(V: VectorField) -> VectorField:
    if V.chart != Chart.LINE.value:
        V = vectorfield.transport(V, Chart.LINE)
    return vectorfield.project_out_quadratics(V)


def run_pairing(ctx: RunContext) -> Outcome:
    """Quadrature pairing of the extension's ∂̄-field against the residue formula."""
    section = ctx.config.pairing
    fields = ctx.config.vector_fields
    if section.field >= len(fields):
        raise DomainError(f"pairing.field = {section.field} but only {len(fields)} fields are configured",
                          module=MODULE)
    if len(section.points) != len(section.weights):
        raise DomainError("pairing points and weights differ in length", module=MODULE)
    V = _line_field(corpus.build_field(fields[section.field]))
    phi = RationalQD.from_basis(section.points, section.weights)
    residue = quaddiff.pairing_residue(V, phi)
    result = quaddiff.pairing_integral(extension.ba_extend_field(V, section.doubled), phi,
                                       ctx.config.grid_model(), ctx.config.tolerance_model(), detail=True)
    integral = float(result.value.real)
    # Green's formula pairs the upper half-plane integral with minus the residue sum
    relative = abs(integral + residue) / abs(residue) if residue else abs(integral)
    if not result.converged:
        ctx.warn(f"pairing quadrature for {phi.name} did not converge (error {result.error:.3g})")
    results = {
        "field": V.name,
        "phi": phi.name,
        "residue": residue,
        "integral": integral,
        "integral_error": result.error,
        "relative_error": relative,
        "converged": result.converged,
    }
    name = "pairing.csv"
    write_csv(ctx.path(name), ["x", "weight", "V"],
              ([x, w, float(V(np.asarray(x)))] for x, w in zip(section.points, section.weights)))
    return results, [name]


def _distance_differentials(ctx: RunContext) -> List[RationalQD]:
    section = ctx.config.distance_bracket
    phi_list = [quaddiff.basis_differential(x) for x in section.phi_points]
    for pair in section.degenerate:
        if len(pair) != 2:
            raise DomainError(f"degenerate entries are (x, t) pairs, got {pair}", module=MODULE)
        phi_list.append(quaddiff.degenerating_sequence(pair[0], pair[1]))
    return phi_list


def run_distance_bracket(ctx: RunContext) -> Outcome:
    section = ctx.config.distance_bracket
    z = section.grid().points()
    phi_list = _distance_differentials(ctx)
    grid = ctx.config.grid_model()
    tol = ctx.config.tolerance_model()
    results: Dict[str, Any] = {}
    rows = []
    for index, spec in enumerate(ctx.config.maps):
        h = corpus.build_map(spec)
        member = _member_id(spec, index, h.name)
        record = teichmetric.bracket(h, phi_list, z, grid, tol, map_id=member)
        if record.gap < 0:
            ctx.warn(f"{member}: inverted bracket, lower {record.d_lower:.6g} > upper {record.d_upper:.6g}")
        if not all(r.converged for r in record.ratios):
            ctx.warn(f"{member}: some Reich-Strebel integrals did not converge")
        results[member] = record.model_dump(mode="json")
        rows.append([record.map_id, record.k_ba, record.d_upper, record.d_lower, record.gap])
    name = "distance_bracket.csv"
    write_csv(ctx.path(name), ["map_id", "k_ba", "d_upper", "d_lower", "gap"], rows)
    return results, [name]


def run_qf_check(ctx: RunContext) -> Outcome:
    """Operator identities of I, J, K on seeded random coefficients."""
    section = ctx.config.qf_check
    seed = ctx.config.seed(ctx.settings)
    rng = np.random.default_rng(seed)
    points = rng.uniform(-5.0, 5.0, section.samples) + 1j * np.exp(rng.uniform(math.log(1e-3), math.log(10.0),
                                                                                 section.samples))
    rows = []
    failures = []
    for i in range(section.coefficients):
        mu = corpus.random_coefficient(seed + i)
        table = quasifuchsian.quaternion_table(mu, points, tol=section.tolerance)
        for group, entries in (("relation", table.relations), ("isometry", table.isometry),
                               ("symmetry", table.symmetry)):
            for entry in entries:
                rows.append([mu.name, group, entry.relation, entry.residual, entry.passed])
                if not entry.passed:
                    failures.append(f"{mu.name}: {entry.relation}")
    name = "qf_check.csv"
    write_csv(ctx.path(name), ["coefficient", "group", "relation", "residual", "passed"], rows)
    results = {
        "seed": seed,
        "coefficients": section.coefficients,
        "samples": section.samples,
        "checks": len(rows),
        "all_passed": not failures,
        "failures": failures,
    }
    return results, [name]


COMMANDS: Dict[str, Tuple[Callable[[RunContext], Outcome], str]] = {
    "qs-measure": (run_qs_measure, "Quasisymmetry constants and ratio distortion of boundary maps"),
    "extend": (run_extend, "Averaging extension sampled on a lattice"),
    "dilatation-field": (run_dilatation_field, "Beltrami coefficient and local dilatation on a lattice"),
    "hilbert": (run_hilbert, "Hilbert transform by principal value and Fourier multipliers"),
    "approx-rate": (run_approx_rate, "Jackson approximation rate and Zygmund chain check"),
    "pairing": (run_pairing, "Vector field / quadratic differential pairing, quadrature vs residues"),
    "distance-bracket": (run_distance_bracket, "Teichmüller distance bracket per map"),
    "qf-check": (run_qf_check, "Quaternion identities of the almost complex operators"),
}


class ToolkitArgumentParser(argparse.ArgumentParser):
    """argparse parser that reports usage errors as UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage().strip()}", module=MODULE)


def build_parser() -> argparse.ArgumentParser:
    parser = ToolkitArgumentParser(
        prog="teich",
        description="Numerical toolkit for universal Teichmüller space"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="command", parser_class=ToolkitArgumentParser)
    subparsers.required = True
    for command, (_, help_text) in COMMANDS.items():
        sub = subparsers.add_parser(command, help=help_text, description=help_text)
        sub.add_argument("--config", "-c", help="TOML run configuration (defaults when omitted)")
        sub.add_argument("--output-dir", "-o", help="Artifact directory (overrides config and TEICH_OUTPUT_DIR)")
    return parser


def _write_error(output_dir: Optional[Path], error: ToolkitError) -> None:
    if output_dir is None:
        return
    record = ErrorRecord(**error.to_record())
    try:
        write_json(output_dir / "error.json", record)
    except OSError as e:
        logger.error(f"Could not write error record to {output_dir}: {e}")


def run(command: str, config: RunConfig, settings: Settings, output_dir: Path) -> RunSummary:
    """
    Run one subcommand and write its summary.

    Args:
        command: Subcommand name
        config: Validated run configuration
        settings: Environment settings
        output_dir: Directory receiving the artifacts

    Returns:
        RunSummary as written to summary.json
    """
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}; expected one of {sorted(COMMANDS)}", module=MODULE)
    handler, _ = COMMANDS[command]
    ctx = RunContext(command, config, settings, output_dir)
    logger.info(f"Running {command} into {output_dir}")
    results, files = handler(ctx)
    summary = RunSummary(
        schema_version=settings.schema_version,
        command=command,
        config=config.model_dump(mode="json", by_alias=True),
        results=results,
        files=sorted(files),
        warnings=ctx.warnings,
    )
    write_json(output_dir / "summary.json", summary)
    if command == "qf-check" and not results["all_passed"]:
        raise InvariantViolation(f"{len(results['failures'])} operator identities failed", module="quasifuchsian")
    logger.info(f"Finished {command}: {len(files)} data files")
    return summary


def main(argv: Optional[List[str]] = None) -> int:
    settings = get_settings()
    logging.basicConfig(level=settings.log_level.upper(), format=LOG_FORMAT)

    output_dir: Optional[Path] = None
    try:
        args = build_parser().parse_args(argv)
        if args.output_dir:
            output_dir = Path(args.output_dir) / args.command
        config = load_run_config(args.config)
        if output_dir is None:
            output_dir = config.output_dir(settings) / args.command
        run(args.command, config, settings, output_dir)
        return 0
    except ToolkitError as e:
        print(e.describe(), file=sys.stderr)
        _write_error(output_dir, e)
        return exit_code_for(e)
    except Exception as e:
        logger.error(f"Unexpected failure: {e}", exc_info=True)
        print(f"[error:{MODULE}] {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
