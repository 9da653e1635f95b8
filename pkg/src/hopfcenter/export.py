"""
File writers: CSV series, OBJ surfaces and gnuplot scripts.

Floats are written with ``repr`` so that a fixed computation always produces
byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .integrate import Trajectory
from .poincare import CenterManifoldMesh

__all__ = [
    "fmt",
    "write_csv",
    "write_json",
    "write_trajectory_csv",
    "write_mesh_csv",
    "write_orbit_csvs",
    "mesh_to_obj",
    "write_obj",
    "gnuplot_manifold_script",
    "gnuplot_facet_script",
    "gnuplot_hamiltonian_script",
]


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_json(path: str | os.PathLike, doc) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_trajectory_csv(path, traj: Trajectory, names: Sequence[str], dense: int = 0) -> Path:
    """``t,<names>`` per accepted step, or ``dense`` equispaced samples."""
    if dense:
        ts, ys = traj.resample(dense)
    else:
        ts, ys = traj.times, traj.states
    return write_csv(path, ["t", *names], ([t, *y] for t, y in zip(ts, ys)))


def write_mesh_csv(path, mesh: CenterManifoldMesh) -> Path:
    return write_csv(path, ["q", "tau", "h", "contraction_measured", "contraction_bound"],
                     (r.to_row() for r in mesh.records))


def write_orbit_csvs(directory, mesh: CenterManifoldMesh) -> list[Path]:
    directory = Path(directory)
    return [
        write_csv(directory / f"orbit_{i:02d}.csv", ["t", "x", "y", "z"],
                  ([t, *p] for t, p in zip(o.times, o.xyz)))
        for i, o in enumerate(mesh.orbits)
    ]


def mesh_to_obj(mesh: CenterManifoldMesh, center: Sequence[float] | None = None) -> str:
    """Triangulated surface: consecutive orbit rings joined by quads split in two.

    Each orbit starts on the section, so ring vertices with the same index
    share the same phase.  With ``center`` a fan closes the innermost ring.
    """
    rings = [o.xyz[:-1] for o in mesh.orbits]  # last sample repeats the first
    lines = ["# center manifold surface", "o center_manifold"]
    if not rings:
        return "\n".join(lines) + "\n"
    n = len(rings[0])
    if any(len(r) != n for r in rings):
        raise ValueError("all orbits must be sampled with the same number of points")
    offset = 1
    if center is not None:
        lines.append("v " + " ".join(fmt(v) for v in center))
        offset = 2
    for ring in rings:
        lines.extend("v " + " ".join(fmt(v) for v in p) for p in ring)
    if center is not None:
        for j in range(n):
            lines.append(f"f 1 {offset + j} {offset + (j + 1) % n}")
    for i in range(len(rings) - 1):
        a0 = offset + i * n
        b0 = offset + (i + 1) * n
        for j in range(n):
            j1 = (j + 1) % n
            lines.append(f"f {a0 + j} {b0 + j} {b0 + j1}")
            lines.append(f"f {a0 + j} {b0 + j1} {a0 + j1}")
    return "\n".join(lines) + "\n"


def write_obj(path, mesh: CenterManifoldMesh, center=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(mesh_to_obj(mesh, center), encoding="utf-8")
    return path


def gnuplot_manifold_script(orbit_files: Sequence[str], stable_file: str, curve_file: str,
                            output: str = "center_manifold.png") -> str:
    """Periodic orbits (blue), stable manifold (red), boundary curve (magenta)."""
    orbit_plots = ", \\\n     ".join(
        f"'{f}' using 2:3:4 with lines lc rgb 'blue' notitle" for f in orbit_files)
    parts = [orbit_plots] if orbit_plots else []
    parts.append(f"'{stable_file}' using 1:2:3 with lines lw 2 lc rgb 'red' title 'stable manifold'")
    parts.append(f"'{curve_file}' using 2:3:4 with lines lw 2 lc rgb 'magenta' title 'boundary curve'")
    return "\n".join([
        "set terminal pngcairo size 900,800",
        f"set output '{output}'",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'x'", "set ylabel 'y'", "set zlabel 'z'",
        "set xyplane at 0",
        "set view 60, 120",
        "splot " + ", \\\n      ".join(parts),
        "",
    ])


def gnuplot_facet_script(family_files: Sequence[str], highlight_files: Sequence[tuple[str, str, str]],
                         output: str = "facet_portrait.png") -> str:
    """Facet phase portrait: grey family members plus highlighted ``(file, title, colour)``."""
    parts = [f"'{f}' using 2:3 with lines lc rgb '#b0b0b0' notitle" for f in family_files]
    parts += [f"'{f}' using 2:3 with lines lw 2 lc rgb '{c}' title '{t}'" for f, t, c in highlight_files]
    return "\n".join([
        "set terminal pngcairo size 800,700",
        f"set output '{output}'",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'y'", "set ylabel 'z'",
        "set xrange [0:4]", "set yrange [-4:4]",
        "plot " + ", \\\n     ".join(parts),
        "",
    ])


def gnuplot_hamiltonian_script(orbit_files: Sequence[str], output: str = "hamiltonian_portrait.png") -> str:
    """Closed level curves of the planar Hamiltonian in the ``(p, q)`` plane."""
    parts = [f"'{f}' using 2:3 with lines lc rgb 'blue' notitle" for f in orbit_files]
    return "\n".join([
        "set terminal pngcairo size 800,700",
        f"set output '{output}'",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'p'", "set ylabel 'q'",
        "plot " + ", \\\n     ".join(parts),
        "",
    ])
