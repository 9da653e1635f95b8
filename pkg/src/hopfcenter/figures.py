"""Static matplotlib renderings of the three phase-space pictures.

All functions draw onto a fresh figure with the Agg backend and save it to
``path``; nothing is shown interactively.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {
    "font.size": 11,
    "axes.labelsize": 12,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.0,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}

# fixed metadata keeps repeated renders byte-stable
_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def render_hamiltonian_portrait(orbits_pq: Sequence[np.ndarray], path) -> Path:
    """Closed level curves in the ``(p, q)`` plane, one array of shape (n, 2) each."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 5))
        for pq in orbits_pq:
            ax.plot(pq[:, 0], pq[:, 1], color="tab:blue")
        ax.plot([0], [0], "k.", ms=4)
        ax.set_xlabel("$p$")
        ax.set_ylabel("$q$")
        return _save(fig, path)


def render_facet_portrait(family: Sequence[tuple[np.ndarray, np.ndarray]],
                          highlights: Sequence[tuple[np.ndarray, np.ndarray, str, str]], path,
                          ylim=(0.0, 4.0), zlim=(-4.0, 4.0)) -> Path:
    """Orbits of the facet system in the ``(y, z)`` plane.

    ``family`` entries are ``(y, z)`` arrays drawn in grey; ``highlights`` are
    ``(y, z, label, colour)``.
    """
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 5))
        for y, z in family:
            ax.plot(y, z, color="0.7", lw=0.7)
        for y, z, label, colour in highlights:
            ax.plot(y, z, color=colour, lw=2, label=label)
        ax.set_xlim(*ylim)
        ax.set_ylim(*zlim)
        ax.set_xlabel("$y$")
        ax.set_ylabel("$z$")
        if highlights:
            ax.legend(loc="lower right", frameon=False)
        return _save(fig, path)


def _clip(xyz: np.ndarray, box: float | None) -> np.ndarray:
    if box is None:
        return xyz
    out = np.array(xyz, dtype=float)
    out[np.any(out > box, axis=1)] = np.nan  # breaks the line instead of drawing to the edge
    return out


def render_center_manifold(orbits_xyz: Sequence[np.ndarray], stable: np.ndarray, curve: np.ndarray,
                           path, view=(25, 35), box: float | None = None) -> Path:
    """Periodic orbits (blue), stable manifold (red) and boundary curve (magenta) in 3D.

    With ``box`` everything outside ``[0, box]^3`` is left out.
    """
    with plt.rc_context(_RC):
        fig = plt.figure(figsize=(6.5, 6))
        ax = fig.add_subplot(projection="3d")
        for xyz in orbits_xyz:
            xyz = _clip(xyz, box)
            ax.plot(xyz[:, 0], xyz[:, 1], xyz[:, 2], color="tab:blue", lw=0.8)
        for pts, colour in ((stable, "red"), (curve, "magenta")):
            pts = _clip(pts, box)
            ax.plot(pts[:, 0], pts[:, 1], pts[:, 2], color=colour, lw=2)
        if box is not None:
            ax.set_xlim(0, box)
            ax.set_ylim(0, box)
            ax.set_zlim(0, box)
        ax.set_xlabel("$x$")
        ax.set_ylabel("$y$")
        ax.set_zlabel("$z$")
        ax.view_init(*view)
        return _save(fig, path)
