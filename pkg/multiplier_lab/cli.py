#!/usr/bin/env python3
#
#  cli.py
"""
Command line interface.
"""
#
#  Copyright © 2025 Dominic Davis-Foster <dominic@davis-foster.co.uk>
#
#  Permission is hereby granted, free of charge, to any person obtaining a copy
#  of this software and associated documentation files (the "Software"), to deal
#  in the Software without restriction, including without limitation the rights
#  to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
#  copies of the Software, and to permit persons to whom the Software is
#  furnished to do so, subject to the following conditions:
#
#  The above copyright notice and this permission notice shall be included in all
#  copies or substantial portions of the Software.
#
#  THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND,
#  EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF
#  MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT.
#  IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
#  DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
#  OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE
#  OR OTHER DEALINGS IN THE SOFTWARE.
#

# stdlib
import json
import logging
import math
from collections.abc import Callable
from pathlib import Path
from typing import Annotated, Any, TypeVar

# 3rd party
import numpy
import typer
from domdf_python_tools.paths import PathPlus
from pydantic import BaseModel
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

# this package
from multiplier_lab import __version__
from multiplier_lab.config import (
		ConeConfig,
		ControlConfig,
		FitConfig,
		ObserveConfig,
		PartitionConfig,
		RellichConfig,
		RotatedFieldSpec,
		SimulateConfig
		)
from multiplier_lab.control import control_rows, control_time, hum_solve, observability_quotient
from multiplier_lab.decay import (
		estimate_constants,
		fit_exponential,
		fit_power,
		komornik_alpha,
		komornik_verify,
		speed_bound
		)
from multiplier_lab.enums import FitModel, Verdict
from multiplier_lab.errors import AdmissibilityError, NumericalError
from multiplier_lab.fields import MultiplierField, cone_check, sup_norm
from multiplier_lab.geometry import (
		PolygonDomain,
		belt_classify,
		case_classify,
		check_R,
		check_S2,
		divergence_check,
		interface_rows,
		partition,
		segment_rows,
		unit_square
		)
from multiplier_lab.lattice import SnappedBoundary, lattice_for_spacing, snap_partition
from multiplier_lab.rellich import SmoothFunction, inequality_check, rellich_residual, shamir_defect
from multiplier_lab.utils import jsonable, write_csv, write_json, write_snapshot
from multiplier_lab.wavesim import EnergyTrace, dissipation_check, simulate, validate_feedback

__all__ = [
		"EXIT_CONFIG",
		"EXIT_NEGATIVE",
		"EXIT_NUMERICAL",
		"EXIT_OK",
		"app",
		"cone",
		"control",
		"fit",
		"observe",
		"partition_command",
		"rellich",
		"simulate_command"
		]

logger = logging.getLogger(__name__)

#: Success, or every checked condition holds.
EXIT_OK = 0

#: A checked condition does not hold.
EXIT_NEGATIVE = 1

#: The configuration was rejected.
EXIT_CONFIG = 2

#: A computation broke down.
EXIT_NUMERICAL = 3

_C = TypeVar("_C", bound=BaseModel)

app = typer.Typer(
		name="multiplier-lab",
		help="Multiplier fields, boundary partitions, and wave stabilisation and control experiments.",
		no_args_is_help=True,
		add_completion=False,
		)

ConfigOption = Annotated[Path, typer.Option("--config", "-c", help="JSON configuration for the run.")]
OutOption = Annotated[Path, typer.Option("--out", "-o", help="Directory for the run's output files.")]
SeedOption = Annotated[int, typer.Option("--seed", help="Seed for randomised data.")]
LogLevelOption = Annotated[str, typer.Option("--log-level", help="DEBUG, INFO, WARNING or ERROR.")]


def _configure_logging(level: str) -> None:
	logging.basicConfig(
			level=level.upper(),
			format="%(message)s",
			datefmt="[%X]",
			handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
			force=True,
			)
	logging.captureWarnings(True)


def _fail(error: BaseException, exit_code: int) -> None:
	payload = {"error": type(error).__name__, "message": str(error), "exit_code": exit_code}
	typer.echo(json.dumps(payload, sort_keys=True), err=True)


def _run(
		command: str,
		schema: type[_C],
		config_file: Path,
		out: Path,
		seed: int,
		log_level: str,
		body: Callable[[_C, PathPlus, numpy.random.Generator], int],
		) -> None:
	"""
	Load and validate the configuration, write the manifest, run ``body`` and exit with its code.

	Exceptions are mapped to exit codes and reported as JSON on stderr.
	"""

	try:
		_configure_logging(log_level)
		document = json.loads(PathPlus(config_file).read_text(encoding="UTF-8"))
		config = schema.model_validate(document)
		out_dir = PathPlus(out)
		out_dir.maybe_make(parents=True)
		write_json(
				out_dir / "manifest.json",
				{
						"command": command,
						"seed": seed,
						"version": __version__,
						"config": config.model_dump(mode="json"),
						},
				)
		exit_code = body(config, out_dir, numpy.random.default_rng(seed))
	except (ValueError, OSError) as e:
		# ValidationError, JSONDecodeError, AdmissibilityError and GridMismatchError are all ValueErrors
		_fail(e, EXIT_CONFIG)
		raise typer.Exit(EXIT_CONFIG) from None
	except NumericalError as e:
		_fail(e, EXIT_NUMERICAL)
		raise typer.Exit(EXIT_NUMERICAL) from None

	logger.info("%s finished with exit code %d", command, exit_code)
	raise typer.Exit(exit_code)


def _summary(title: str, rows: dict[str, Any]) -> None:
	table = Table(title=title, show_header=False)
	table.add_column("quantity", style="bold")
	table.add_column("value")
	for key, value in rows.items():
		table.add_row(key, str(jsonable(value)))
	Console().print(table)


def _snapped(
		field: MultiplierField,
		domain: PolygonDomain,
		h: float,
		) -> SnappedBoundary:
	lattice = lattice_for_spacing(h)
	return snap_partition(lattice, partition(field, domain), field)


def _resolve_time(config: ObserveConfig | ControlConfig, field: MultiplierField) -> tuple[float, float]:
	T0 = control_time(field).T0
	if config.T is None and not math.isfinite(T0):
		raise AdmissibilityError("T_over_T0 needs a field satisfying the cone condition")
	return config.final_time(T0), T0


@app.command()
def cone(
		config: ConfigOption,
		out: OutOption = Path("out"),
		seed: SeedOption = 0,
		log_level: LogLevelOption = "WARNING",
		) -> None:
	"""
	Certify the cone condition of a multiplier field.
	"""

	def body(cfg: ConeConfig, out_dir: PathPlus, rng: numpy.random.Generator) -> int:
		box = None if cfg.box is None else cfg.box.build()
		field = cfg.field.build(box)
		report = cone_check(field, box, cfg.resolution)
		norm = sup_norm(field, box, cfg.resolution)

		payload = {
				**jsonable(report),
				"norm_inf": norm.value,
				"norm_witness": norm.witness,
				"T0": 2 * norm.value / report.c_m if report.satisfied else None,
				}
		write_json(out_dir / "cone.json", payload)
		_summary("Cone condition", {"c(m)": report.c_m, "a0": report.a0, "satisfied": report.satisfied})
		return EXIT_OK if report.satisfied else EXIT_NEGATIVE

	_run("cone", ConeConfig, config, out, seed, log_level, body)


@app.command("partition")
def partition_command(
		config: ConfigOption,
		out: OutOption = Path("out"),
		seed: SeedOption = 0,
		log_level: LogLevelOption = "WARNING",
		) -> None:
	"""
	Split the boundary of a polygon by the sign of m.ν and check the interface conditions.
	"""

	def body(cfg: PartitionConfig, out_dir: PathPlus, rng: numpy.random.Generator) -> int:
		domain = cfg.domain.build()
		field = cfg.field.build()
		p = partition(field, domain, cfg.samples_per_edge)
		r_check, s2_check = check_R(p), check_S2(p)
		divergence = divergence_check(field, domain)

		write_csv(out_dir / "segments.csv", ["edge_index", "t_start", "t_end", "label"], segment_rows(p))
		write_csv(out_dir / "interfaces.csv", ['x', 'y', "type", "angle", "m_dot_tau"], interface_rows(p))

		payload: dict[str, Any] = {
				"dirichlet_length": p.dirichlet_length,
				"neumann_length": p.neumann_length,
				"tolerance": p.tolerance,
				"oscillating_edges": p.oscillating_edges,
				"degenerate_edges": p.degenerate_edges,
				'R': {**jsonable(r_check), "satisfied": r_check.satisfied},
				"S2": {
						"satisfied": s2_check.satisfied,
						"violations": [{
								"point": v.interface.point,
								"edge_index": v.interface.edge_index,
								"angle": v.interface.angle,
								"m_dot_tau": v.interface.m_dot_tau,
								"angle_valid": v.angle_valid,
								} for v in s2_check.violations],
						},
				"divergence": {**jsonable(divergence), "gap": divergence.gap},
				}

		spec = cfg.field
		if isinstance(spec, RotatedFieldSpec) and 0 < spec.theta1 <= spec.theta2 < math.pi / 2:
			payload["case"] = case_classify(spec.theta1, spec.theta2)
			if spec.theta1 == spec.theta2:
				x0 = spec.x0 or [0.0, 0.0]
				payload["belts"] = [{
						"edge_index": edge.index,
						"belt": belt_classify(edge, spec.theta1, x0),
						} for edge in domain.edges]

		write_json(out_dir / "partition.json", payload)
		_summary(
				"Boundary partition",
				{
						"Dirichlet length": p.dirichlet_length,
						"Neumann length": p.neumann_length,
						"(R)": r_check.satisfied,
						"(S2)": s2_check.satisfied,
						},
				)
		return EXIT_OK if r_check.satisfied and s2_check.satisfied else EXIT_NEGATIVE

	_run("partition", PartitionConfig, config, out, seed, log_level, body)


@app.command("simulate")
def simulate_command(
		config: ConfigOption,
		out: OutOption = Path("out"),
		seed: SeedOption = 0,
		log_level: LogLevelOption = "WARNING",
		) -> None:
	"""
	Run the damped wave equation and record its energy.
	"""

	def body(cfg: SimulateConfig, out_dir: PathPlus, rng: numpy.random.Generator) -> int:
		field = cfg.field.build()
		boundary = _snapped(field, cfg.domain.build(), cfg.h)
		lattice = boundary.lattice
		g = cfg.feedback.build()

		result = simulate(
				boundary,
				g,
				cfg.u0.build(lattice),
				cfg.u1.build(lattice),
				cfg.T,
				cfg.dt,
				cfg.output_stride,
				cfg.snapshot_stride,
				metadata={"field": cfg.field.model_dump(mode="json")},
				)
		trace = result.trace
		trace.to_csv(out_dir / "trace.csv")

		for index, (t, u) in enumerate(result.snapshots):
			write_snapshot(out_dir / "snapshots" / f"u_{index:06d}.csv", u, lattice.h, t)

		feedback_report = validate_feedback(g)
		payload = {
				"metadata": trace.metadata,
				"E0": trace.initial_energy,
				"E_final": float(trace.energy[-1]),
				"dissipation_violation": dissipation_check(trace),
				"snapshots": len(result.snapshots),
				"neumann_nodes": int(numpy.count_nonzero(boundary.neumann)),
				"dirichlet_nodes": int(numpy.count_nonzero(boundary.dirichlet)),
				"feedback_check": {
						"satisfied": feedback_report.satisfied,
						"violations": feedback_report.violations,
						},
				}
		write_json(out_dir / "simulation.json", payload)
		_summary(
				"Simulation",
				{"steps": trace.metadata["steps"], "E(0)": payload["E0"], "E(T)": payload["E_final"]},
				)
		return EXIT_OK

	_run("simulate", SimulateConfig, config, out, seed, log_level, body)


@app.command()
def fit(
		config: ConfigOption,
		out: OutOption = Path("out"),
		seed: SeedOption = 0,
		log_level: LogLevelOption = "WARNING",
		) -> None:
	"""
	Fit decay laws to an energy trace and test the integral decay lemma.
	"""

	def body(cfg: FitConfig, out_dir: PathPlus, rng: numpy.random.Generator) -> int:
		trace = EnergyTrace.from_csv(cfg.trace)
		negative = False

		fits = []
		for model in cfg.models:
			if model is FitModel.exponential:
				fits.append(fit_exponential(trace, cfg.window))
			else:
				fits.append(fit_power(trace, cfg.window, cfg.p))
		negative |= any(f.verdict is not Verdict.consistent for f in fits)
		payload: dict[str, Any] = {"fits": [f.as_dict() for f in fits]}

		if cfg.komornik:
			if cfg.alpha is not None:
				alpha = cfg.alpha
			elif cfg.p is not None and cfg.p > 1:
				alpha = komornik_alpha(cfg.p)
			else:
				alpha = 0.0
			try:
				komornik = komornik_verify(trace.t, trace.energy, alpha, cfg.slack)
			except AdmissibilityError as e:
				payload["komornik"] = {"alpha": alpha, "error": str(e)}
				negative = True
			else:
				payload["komornik"] = komornik
				negative |= not komornik.conclusion_holds

		if cfg.constants is not None:
			field = cfg.constants.field.build()
			boundary = _snapped(field, unit_square(), cfg.constants.h)
			constants = estimate_constants(boundary.lattice, boundary)
			payload["constants"] = constants

			if cfg.speed is not None:
				report = cone_check(field)
				speed = speed_bound(
						report.c_m,
						report.a0,
						cfg.speed.k_minus,
						cfg.speed.k_plus,
						constants.C_P,
						constants.C_Tr,
						cfg.speed.lambdas,
						)
				write_csv(out_dir / "speed.csv", ["lambda", "theta"], speed.rows())
				payload["speed"] = {
						"lambda_star": speed.lambda_star,
						"theta_star": speed.theta_star,
						"bracket": speed.bracket,
						"corrected_bracket": speed.corrected_bracket,
						"in_bracket": speed.in_bracket,
						"in_corrected_bracket": speed.in_corrected_bracket,
						}

		write_json(out_dir / "fit.json", payload)
		_summary("Decay fits", {f.model.value: f"{f.rate:.6g} ({f.verdict.value})" for f in fits})
		return EXIT_NEGATIVE if negative else EXIT_OK

	_run("fit", FitConfig, config, out, seed, log_level, body)


def _convergence_orders(defects: list[float], spacings: list[float], scale: float) -> list[float]:
	orders = []
	for (d1, h1), (d2, h2) in zip(zip(defects, spacings), zip(defects[1:], spacings[1:])):
		if abs(d2) <= 1e-12 * scale:
			orders.append(math.inf)
		else:
			orders.append(math.log(abs(d1 / d2)) / math.log(h1 / h2))
	return orders


@app.command()
def rellich(
		config: ConfigOption,
		out: OutOption = Path("out"),
		seed: SeedOption = 0,
		log_level: LogLevelOption = "WARNING",
		) -> None:
	"""
	Check the regular Rellich identity, or measure its defect at a Dirichlet/Neumann junction.
	"""

	def body(cfg: RellichConfig, out_dir: PathPlus, rng: numpy.random.Generator) -> int:
		spacings = cfg.spacings()
		header = ["multiplier", "function", 'h', "rho", "lhs", "volume", "boundary", "defect"]
		rows = []
		results = []

		if cfg.check == "regular":
			domain = cfg.domain.build()
			passed = True
			for m_index, spec in enumerate(cfg.multipliers):
				field = spec.build()
				for f_index in range(cfg.functions):
					u = SmoothFunction.random_trigonometric(rng)
					reports = [rellich_residual(u, field, domain, h, rng) for h in spacings]
					rows.extend(
							(m_index, f_index, r.h, math.nan, r.lhs, r.volume_term, r.boundary_term, r.defect)
							for r in reports
							)
					scale = max(1.0, max(abs(r.lhs) for r in reports))
					orders = _convergence_orders([r.defect for r in reports], spacings, scale)
					passed &= min(orders) >= cfg.min_order
					results.append({"multiplier": m_index, "function": f_index, "orders": orders})
			payload: dict[str, Any] = {"check": "regular", "min_order": cfg.min_order, "passed": passed}
		else:
			passed = True
			for m_index, spec in enumerate(cfg.multipliers):
				report = shamir_defect(spec.build(), spacings, cfg.rho_ladder)
				rows.extend(
						(m_index, 0, row.h, row.rho, row.lhs, row.volume, row.boundary, row.defect)
						for row in report.table
						)
				passed &= report.converged
				results.append({
						"multiplier": m_index,
						"extrapolated": report.extrapolated,
						"predicted": report.predicted,
						"relative_gap": report.relative_gap,
						"converged": report.converged,
						"inequality_holds": inequality_check(report),
						})
			payload = {"check": "singular", "passed": passed}

		payload["results"] = results
		write_csv(out_dir / "rellich.csv", header, rows)
		write_json(out_dir / "rellich.json", payload)
		_summary("Rellich identity", {"check": cfg.check, "passed": passed})
		return EXIT_OK if passed else EXIT_NEGATIVE

	_run("rellich", RellichConfig, config, out, seed, log_level, body)


@app.command()
def observe(
		config: ConfigOption,
		out: OutOption = Path("out"),
		seed: SeedOption = 0,
		log_level: LogLevelOption = "WARNING",
		) -> None:
	"""
	Compare the initial energy of the adjoint problem with its observed boundary flux.
	"""

	def body(cfg: ObserveConfig, out_dir: PathPlus, rng: numpy.random.Generator) -> int:
		field = cfg.field.build()
		T, _ = _resolve_time(cfg, field)
		boundary = _snapped(field, cfg.domain.build(), cfg.h)
		lattice = boundary.lattice

		report = observability_quotient(
				cfg.phi0.build(lattice),
				cfg.phi1.build(lattice),
				T,
				field,
				boundary,
				cfg.dt,
				)
		write_json(out_dir / "observability.json", report)
		_summary(
				"Observability",
				{
						"T": report.T,
						"T0": report.T0,
						"quotient": report.quotient,
						"bound": report.bound,
						"verdict": report.verdict,
						},
				)
		return EXIT_OK if report.verdict is Verdict.verified else EXIT_NEGATIVE

	_run("observe", ObserveConfig, config, out, seed, log_level, body)


@app.command()
def control(
		config: ConfigOption,
		out: OutOption = Path("out"),
		seed: SeedOption = 0,
		log_level: LogLevelOption = "WARNING",
		) -> None:
	"""
	Compute the minimal-norm boundary control which drives the given data to rest.
	"""

	def body(cfg: ControlConfig, out_dir: PathPlus, rng: numpy.random.Generator) -> int:
		field = cfg.field.build()
		T, _ = _resolve_time(cfg, field)
		boundary = _snapped(field, cfg.domain.build(), cfg.h)
		lattice = boundary.lattice

		result = hum_solve(
				cfg.u0.build(lattice),
				cfg.u1.build(lattice),
				T,
				field,
				boundary,
				tol=cfg.tol,
				max_iter=cfg.max_iter,
				dt=cfg.dt,
				)

		rows = control_rows(result.control, boundary)
		write_csv(out_dir / "control.csv", ['t', "edge_index", 's', "value"], rows)
		payload = {
				'T': result.T,
				"T0": result.T0,
				"cg_iterations": result.cg_iterations,
				"cg_residual": result.cg_residual,
				"residual_history": result.residual_history,
				"restarts": result.restarts,
				"norms": {
						**jsonable(result.norms),
						"initial": result.norms.initial,
						"final": result.norms.final,
						"reduction": result.norms.reduction,
						},
				"note": result.note,
				}
		write_json(out_dir / "hum.json", payload)
		_summary(
				"Exact control",
				{
						"CG iterations": result.cg_iterations,
						"residual": result.cg_residual,
						"reduction": result.reduction,
						},
				)
		return EXIT_OK if result.cg_residual <= cfg.tol else EXIT_NEGATIVE

	_run("control", ControlConfig, config, out, seed, log_level, body)
