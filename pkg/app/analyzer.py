"""
Exceptional Point Analyzer

This module wires the exact tools (polynomials, tropicalization, Newton
polygon, amoeba) and the numeric and export services into the commands
offered on the command line. One analyzer instance serves one run
configuration.
"""

import json
import math
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.config import settings
from app.errors import InputError
from app.models import build_model, canonical_model_name
from app.report import RunReport
from app.services.export import ResultExporter, read_matrix_file, read_poly_file
from app.services.numerics import (
    DecadeRange,
    LoopOptions,
    LoopSpec,
    SplittingFit,
    cycle_notation,
    holonomy_trace,
    root_valuations,
    splitting_exponent,
)
from app.tools.charpoly import ParametricMatrix, char_poly
from app.tools.newton_amoeba import (
    AmoebaPointCloud,
    GridSpec,
    PLCurve,
    amoeba_directions,
    amoeba_sample,
    far_point_alignment,
    find_vacuoles,
    interior_lattice_points,
    is_collapsed,
    newton_polygon,
    spine_approx,
    tentacle_directions,
)
from app.tools.poly import BiPoly
from app.tools.tropical import EPClassification, ep_order, tropical_roots, tropicalize

logger = logging.getLogger(__name__)

CONFIG_SCHEMA = 1
AGREEMENT_TOL = 0.02
COLLAPSE_MESSAGE = "Newton polygon is a segment (skin-effect signature)"


class ModelSpec(BaseModel):
    """A registered model or preset with its parameter block."""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., description="Model or preset name")
    params: Dict[str, Any] = Field(default_factory=dict, description="Parameter overrides")

    @field_validator("name")
    @classmethod
    def _known(cls, value: str) -> str:
        canonical_model_name(value)
        return value


class ScanSpec(BaseModel):
    """One model parameter and the rational values to try."""

    model_config = ConfigDict(extra="forbid")

    parameter: str = Field(..., description="Parameter to vary")
    values: List[str] = Field(..., min_length=1, description="Values as rational strings")

    @field_validator("values", mode="before")
    @classmethod
    def _as_strings(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [str(v) for v in value]
        return value


class RunConfig(BaseModel):
    """Run configuration: exactly one input source plus per-command options."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: int = Field(default=CONFIG_SCHEMA, alias="schema")
    model: Optional[ModelSpec] = None
    poly_file: Optional[Path] = None
    matrix_file: Optional[Path] = None
    grid: Optional[GridSpec] = None
    decades: Optional[DecadeRange] = None
    loop: Optional[LoopOptions] = None
    scan: Optional[ScanSpec] = None
    output_dir: Path = Field(default_factory=lambda: Path(settings.OUTPUT_DIR))

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.schema_version != CONFIG_SCHEMA:
            raise ValueError(f"unsupported config schema {self.schema_version}; expected {CONFIG_SCHEMA}")
        sources = [s for s in (self.model, self.poly_file, self.matrix_file) if s is not None]
        if len(sources) != 1:
            raise ValueError("exactly one input source is required: model, poly_file or matrix_file")
        return self

    def source_summary(self) -> Dict[str, Any]:
        if self.model is not None:
            return {"model": self.model.name, "params": self.model.params}
        if self.poly_file is not None:
            return {"poly_file": str(self.poly_file)}
        return {"matrix_file": str(self.matrix_file)}


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """
    Load a JSON run configuration.

    Input file paths are resolved against the directory of the config file.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InputError(f"cannot read config {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise InputError(f"config {path} must contain a JSON object")
    for key in ("poly_file", "matrix_file"):
        if data.get(key) and not Path(data[key]).is_absolute():
            data[key] = str(path.parent / data[key])
    return RunConfig.model_validate(data)


@dataclass
class CommandResult:
    """Outcome of one command: report payload plus the lines shown to the user."""

    command: str
    payload: Dict[str, Any]
    lines: List[str] = field(default_factory=list)


class ExceptionalPointAnalyzer:
    """
    Runs the analysis commands for one input.

    The analyzer can:
    - Tropicalize the characteristic polynomial and classify the EP
    - Build the Newton polygon, sample the amoeba and approximate its spine
    - Cross-check the classification numerically (splitting fit, holonomy)
    - Scan a model parameter and report the EP order per value
    """

    def __init__(self, config: RunConfig, zero_tol: Optional[float] = None):
        """Initialize the analyzer by building the input polynomial."""
        self.config = config
        self.zero_tol = settings.ZERO_TOL if zero_tol is None else zero_tol
        self.matrix, self.polynomial = self._load_source()
        self.exporter = ResultExporter(config.output_dir)
        self.report = RunReport(config.output_dir, source=config.source_summary())
        self._classification: Optional[EPClassification] = None
        logger.info(f"Exceptional point analyzer initialized for {config.source_summary()}")

    def _load_source(self) -> Tuple[Optional[ParametricMatrix], BiPoly]:
        config = self.config
        if config.model is not None:
            matrix = build_model(config.model.name, config.model.params)
        elif config.matrix_file is not None:
            matrix = read_matrix_file(config.matrix_file)
        else:
            polynomial = read_poly_file(config.poly_file)
            if polynomial.is_zero():
                raise InputError(f"{config.poly_file} describes the zero polynomial")
            return None, polynomial
        return matrix, char_poly(matrix)

    @property
    def spectral_source(self) -> Union[ParametricMatrix, BiPoly]:
        return self.matrix if self.matrix is not None else self.polynomial

    @property
    def classification(self) -> EPClassification:
        if self._classification is None:
            self._classification = ep_order(tropicalize(self.polynomial))
        return self._classification

    def _finish(self, result: CommandResult) -> CommandResult:
        self.report.record(result.command, result.payload)
        return result

    def analyze(self) -> CommandResult:
        """
        Tropicalize the characteristic polynomial and classify nu = 0.

        Returns:
            CommandResult with the min-plus expression, roots and verdict
        """
        logger.info("Analyzing characteristic polynomial")
        tropical = tropicalize(self.polynomial)
        roots = tropical_roots(tropical)
        classification = self.classification
        collapsed = is_collapsed(newton_polygon(self.polynomial))

        lines = [f"characteristic polynomial: {self.polynomial}", f"tropicalization: {tropical.render()}"]
        lines += [f"root {root.render()}" for root in roots] or ["no tropical roots"]
        lines.append(classification.describe())
        if collapsed:
            lines.append(COLLAPSE_MESSAGE)

        payload = {
            "polynomial": str(self.polynomial),
            "tropicalization": tropical.render(),
            "classification": classification.to_dict(),
            "newton_collapsed": collapsed,
        }
        logger.info(f"Analysis complete: {classification.describe()}")
        return self._finish(CommandResult("analyze", payload, lines))

    def newton(self) -> CommandResult:
        """Write the Newton polygon hull and edge normals."""
        logger.info("Building Newton polygon")
        polygon = newton_polygon(self.polynomial)
        self.exporter.write_newton(polygon)
        interior = interior_lattice_points(polygon)

        lines = [f"hull vertices: {', '.join(map(str, polygon.hull))}"]
        lines += [f"edge {e.start} -> {e.end}, outer normal {e.normal}" for e in polygon.edges]
        lines.append(f"interior lattice points: {len(interior)}")
        if is_collapsed(polygon):
            lines.append(COLLAPSE_MESSAGE)

        payload = {
            "hull": [list(v) for v in polygon.hull],
            "normals": [list(n) for n in tentacle_directions(polygon)],
            "interior_lattice_points": [list(p) for p in interior],
            "collapsed": is_collapsed(polygon),
        }
        return self._finish(CommandResult("newton", payload, lines))

    def amoeba(self, grid: Optional[GridSpec] = None, svg: bool = False) -> CommandResult:
        """Sample the amoeba, write it as CSV and report tentacles and vacuoles."""
        grid = grid or self.config.grid or GridSpec()
        cloud = amoeba_sample(self.polynomial, grid)
        self.exporter.write_amoeba(cloud)
        polygon = newton_polygon(self.polynomial)
        vacuoles = find_vacuoles(self.polynomial, cloud)
        interior = interior_lattice_points(polygon)
        radius = 0.5 * max(abs(math.log(grid.r_min)), abs(math.log(grid.r_max)))
        share, far = far_point_alignment(cloud, amoeba_directions(polygon), radius)

        lines = [
            f"amoeba points: {len(cloud)} ({cloud.discarded} discarded by residual)",
            f"tentacle directions (log|nu|, log|lambda|): {', '.join(map(str, amoeba_directions(polygon)))}",
            f"far points aligned with tentacles: {share:.1%} of {far}",
            f"vacuole candidates: {vacuoles.holes}; interior lattice points: {len(interior)}",
        ]
        if svg:
            self.render_svg(cloud=cloud)

        payload = {
            "points": len(cloud),
            "discarded": cloud.discarded,
            "grid": grid.model_dump(),
            "tentacle_alignment": share,
            "vacuoles": vacuoles.holes,
            "interior_lattice_points": len(interior),
        }
        return self._finish(CommandResult("amoeba", payload, lines))

    def spine(self, svg: bool = False) -> CommandResult:
        """Write the piecewise-linear spine approximation."""
        curve = spine_approx(self.polynomial)
        self.exporter.write_spine(curve)
        lines = [
            f"spine: {len(curve.vertices)} vertices, {len(curve.segments)} segments, {len(curve.rays)} rays",
            f"ray directions: {', '.join(sorted({str(r.direction) for r in curve.rays}))}",
            f"note: {curve.note}",
        ]
        if svg:
            self.render_svg(curve=curve)
        payload = {
            "vertices": [list(v) for v in curve.vertices],
            "segments": len(curve.segments),
            "ray_directions": sorted({r.direction for r in curve.rays}),
            "note": curve.note,
        }
        return self._finish(CommandResult("spine", payload, lines))

    def verify(self, decades: Optional[DecadeRange] = None) -> CommandResult:
        """
        Compare the numeric splitting exponent with 1/order.

        Args:
            decades: Sampling decades (defaults from config, then settings)

        Returns:
            CommandResult reporting both the prediction and the fit
        """
        decades = decades or self.config.decades or DecadeRange()
        classification = self.classification
        prediction = None if classification.order is None else 1.0 / classification.order
        logger.info(f"Verifying classification ({classification.describe()}) numerically")
        fit: SplittingFit = splitting_exponent(self.spectral_source, decades)
        self.exporter.write_splitting(fit)
        nu_min = 10.0 ** -decades.k_max
        valuations = sorted(float(v) for v in root_valuations(self.polynomial, nu_min))

        agrees = prediction is not None and abs(fit.exponent - prediction) <= AGREEMENT_TOL
        lines = [
            f"tropical prediction 1/N = {prediction:.4f}" if prediction is not None
            else "tropical prediction: none (degenerate point)",
            f"numeric exponent {self._display(fit.exponent)} ± {self._display(fit.stderr)}",
            f"agreement within {AGREEMENT_TOL}: {'yes' if agrees else 'no'}",
            f"root valuations at nu={nu_min:g}: " + ", ".join(f"{v:.3f}" for v in valuations),
        ]
        payload = {
            "prediction": prediction,
            "exponent": fit.exponent,
            "stderr": fit.stderr,
            "decades": [decades.k_min, decades.k_max],
            "agrees": agrees,
            "root_valuations": valuations,
        }
        return self._finish(CommandResult("verify", payload, lines))

    def holonomy(self, loop: Optional[LoopOptions] = None) -> CommandResult:
        """Trace a loop in the nu plane and report the permutation and petals."""
        loop = loop or self.config.loop or LoopOptions()
        result = holonomy_trace(LoopSpec.from_options(self.spectral_source, loop))
        self.exporter.write_trajectories(result)

        lines = [
            f"permutation {cycle_notation(result.permutation)}",
            f"cycle type {result.cycle_type()}",
            f"petal count {result.petal_count}" if result.petal_count is not None
            else "petal count n/a (enclosing loop)",
            f"samples {result.samples}, max/median step {result.step_ratio:.2f}",
        ]
        payload = {
            "mode": result.mode.value,
            "radius": loop.radius,
            "samples": result.samples,
            "permutation": list(result.permutation),
            "cycles": cycle_notation(result.permutation),
            "petal_count": result.petal_count,
            "ep_value": None if result.ep_value is None else [result.ep_value.real, result.ep_value.imag],
        }
        return self._finish(CommandResult("holonomy", payload, lines))

    def scan(self, parameter: Optional[str] = None, values: Optional[List[str]] = None) -> CommandResult:
        """Classify the EP for each value of one model parameter."""
        if self.config.model is None:
            raise InputError("scan needs a model input")
        spec = self.config.scan
        parameter = parameter or (spec.parameter if spec else None)
        values = values or (spec.values if spec else None)
        if not parameter or not values:
            raise InputError("scan needs a parameter and at least one value")

        logger.info(f"Scanning {parameter} over {len(values)} values")
        rows = []
        for value in values:
            params = dict(self.config.model.params)
            params[parameter] = value
            classification = ep_order(tropicalize(char_poly(build_model(self.config.model.name, params))))
            rows.append({"value": value, "classification": classification.to_dict(),
                         "verdict": classification.describe()})

        lines = [f"{parameter}={row['value']}: {row['verdict']}" for row in rows]
        return self._finish(CommandResult("scan", {"parameter": parameter, "results": rows}, lines))

    def _display(self, value: float) -> str:
        if abs(value) < self.zero_tol:
            value = 0.0
        return f"{value:.4f}"

    def render_svg(self, cloud: Optional[AmoebaPointCloud] = None, curve: Optional[PLCurve] = None) -> Path:
        return self.exporter.write_svg(newton_polygon(self.polynomial), cloud=cloud, curve=curve)
