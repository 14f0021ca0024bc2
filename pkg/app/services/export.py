"""
Export Service

This module reads polynomial and matrix input files and writes the CSV and
SVG artifacts of each command. CSV rows are written in a fixed order with
``repr`` floats so identical runs give byte-identical files.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from app.errors import InputError
from app.services.numerics import HolonomyResult, SplittingFit
from app.tools.charpoly import ParametricMatrix, matrix_from_json
from app.tools.newton_amoeba import AmoebaPointCloud, NewtonPolygon, PLCurve
from app.tools.poly import BiPoly, parse_terms

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from e


def read_poly_file(path: PathLike) -> BiPoly:
    """Read a polynomial in the ``i k re im`` line format."""
    return parse_terms(_read_text(path))


def read_matrix_file(path: PathLike) -> ParametricMatrix:
    """Read a ``{"n": ..., "entries": [[...]]}`` matrix document."""
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from e
    return matrix_from_json(data)


class ResultExporter:
    """
    Writer for the per-command output files.

    All files go to one output directory, created on first use.
    """

    def __init__(self, output_dir: PathLike):
        """Initialize the exporter and make sure the directory is writable."""
        self.output_dir = Path(output_dir)
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise InputError(f"output directory {self.output_dir} is not writable: {e}") from e
        logger.info(f"Result exporter writing to {self.output_dir}")

    def _write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        path = self.output_dir / name
        try:
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        except OSError as e:
            raise InputError(f"cannot write {path}: {e}") from e
        logger.debug(f"Wrote {path}")
        return path

    def write_amoeba(self, cloud: AmoebaPointCloud) -> Path:
        return self._write_csv("amoeba.csv", ("log_abs_nu", "log_abs_lambda"), cloud.points.tolist())

    def write_spine(self, curve: PLCurve) -> Path:
        """Segments as start/end; rays as origin and origin + primitive direction."""
        rows: List[Sequence] = []
        for segment in curve.segments:
            rows.append((*segment.start, *segment.end, "segment"))
        for ray in curve.rays:
            tip = (ray.origin[0] + ray.direction[0], ray.origin[1] + ray.direction[1])
            rows.append((*ray.origin, *tip, "ray"))
        return self._write_csv("spine.csv", ("x1", "y1", "x2", "y2", "kind"), rows)

    def write_newton(self, polygon: NewtonPolygon) -> List[Path]:
        hull = self._write_csv("newton_hull.csv", ("i", "k"), polygon.hull)
        edges = self._write_csv(
            "newton_edges.csv",
            ("start_i", "start_k", "end_i", "end_k", "normal_i", "normal_k"),
            [(*e.start, *e.end, *e.normal) for e in polygon.edges],
        )
        return [hull, edges]

    def write_splitting(self, fit: SplittingFit) -> Path:
        return self._write_csv("splitting.csv", ("nu", "splitting"), fit.samples)

    def write_trajectories(self, result: HolonomyResult) -> Path:
        rows = []
        for step, psi in enumerate(result.psi):
            for index, value in enumerate(result.trajectories[step]):
                rows.append((float(psi), index, float(value.real), float(value.imag)))
        return self._write_csv("trajectories.csv", ("psi", "index", "re", "im"), rows)

    def write_svg(
        self,
        polygon: NewtonPolygon,
        cloud: Optional[AmoebaPointCloud] = None,
        curve: Optional[PLCurve] = None,
    ) -> Path:
        """Render the amoeba cloud with its spine next to the Newton polygon."""
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, (ax_amoeba, ax_newton) = plt.subplots(1, 2, figsize=(10, 5))
        if cloud is not None and len(cloud):
            ax_amoeba.scatter(cloud.points[:, 0], cloud.points[:, 1], s=1, color="tab:blue", alpha=0.4)
        if curve is not None:
            for segment in curve.segments:
                ax_amoeba.plot([segment.start[0], segment.end[0]], [segment.start[1], segment.end[1]], color="black")
            reach = 10.0
            for ray in curve.rays:
                length = np.hypot(*ray.direction)
                tip = (ray.origin[0] + reach * ray.direction[0] / length, ray.origin[1] + reach * ray.direction[1] / length)
                ax_amoeba.plot([ray.origin[0], tip[0]], [ray.origin[1], tip[1]], color="black")
        ax_amoeba.set_xlabel("log|nu|")
        ax_amoeba.set_ylabel("log|lambda|")
        ax_amoeba.set_title("amoeba")

        support = np.array(polygon.support)
        ax_newton.scatter(support[:, 0], support[:, 1], color="tab:red", zorder=3)
        hull = list(polygon.hull) + [polygon.hull[0]]
        ax_newton.plot([p[0] for p in hull], [p[1] for p in hull], color="black")
        ax_newton.set_xlabel("lambda exponent i")
        ax_newton.set_ylabel("nu exponent k")
        ax_newton.set_title("Newton polygon")
        ax_newton.set_aspect("equal")

        path = self.output_dir / "amoeba.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        logger.info(f"Rendered {path}")
        return path
