"""SVG figures: phase portraits, basins and bifurcation diagrams."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

from .equilibria import EquilibriumRecord, coarse  # noqa: E402
from .model import ScaledParams  # noqa: E402

__all__ = ["phase_portrait", "basin_figure", "diagram_figure"]

# reproducible SVG ids and no timestamp
plt.rcParams["svg.hashsalt"] = "leslie-allee"
plt.rcParams["svg.fonttype"] = "none"

PREY = "tab:red"
PREDATOR = "tab:blue"
_GLYPH = {
    "stable": dict(marker="o", mfc="k", mec="k"),
    "unstable": dict(marker="o", mfc="w", mec="k"),
    "saddle": dict(marker="s", mfc="w", mec="k"),
    "center": dict(marker="D", mfc="0.6", mec="k"),
    "degenerate": dict(marker="D", mfc="0.6", mec="k"),
}
_BRANCH_STYLE = {
    "stable-left": dict(color="tab:green", ls="-"),
    "stable-right": dict(color="tab:green", ls="--"),
    "unstable-left": dict(color="tab:purple", ls="-"),
    "unstable-right": dict(color="tab:purple", ls="--"),
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _nullclines(ax, sp: ScaledParams, u_max: float, v_max: float):
    u = np.linspace(1e-4, min(u_max, 1.0), 400)
    prey = (u + sp.A) * (1 - u) * (u - sp.M) / sp.Q
    ok = (prey >= 0) & (prey <= v_max)
    ax.plot(np.where(ok, u, np.nan), np.where(ok, prey, np.nan), color=PREY, lw=1.2)
    ax.plot([0, 0], [0, v_max], color=PREY, lw=1.2)
    uu = np.linspace(0, u_max, 50)
    ax.plot(uu, uu + sp.C, color=PREDATOR, lw=1.2)
    ax.plot([0, u_max], [0, 0], color=PREDATOR, lw=1.2)


def phase_portrait(
    sp: ScaledParams,
    path,
    eqs: Sequence[EquilibriumRecord],
    trajectories: Iterable = (),
    manifolds: Iterable = (),
    cycles: Iterable = (),
    u_max: float = 1.1,
    v_max: Optional[float] = None,
    title: str = "",
) -> Path:
    """Nullclines (prey red, predator blue), orbits, manifolds and equilibria."""
    if v_max is None:
        v_max = 1.3 * (1 + sp.C)
    fig, ax = plt.subplots(figsize=(5, 4.2))
    _nullclines(ax, sp, u_max, v_max)
    for tr in trajectories:
        ax.plot(tr.u, tr.v, color="0.55", lw=0.6)
    for br in manifolds:
        p = br.polyline
        ax.plot(p[:, 0], p[:, 1], lw=1.0, **_BRANCH_STYLE[br.which])
    for cyc in cycles:
        ls = "-" if cyc.stability == "stable" else ":"
        ax.plot(cyc.points[:, 0], cyc.points[:, 1], color="k", lw=1.3, ls=ls)
    for e in eqs:
        ax.plot(e.location.u, e.location.v, ls="none", ms=6, zorder=5, **_GLYPH[coarse(e.label)])
    ax.set_xlim(-0.02, u_max)
    ax.set_ylim(-0.02, v_max)
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    return _save(fig, path)


def basin_figure(bm, path, title: str = "") -> Path:
    names = sorted({str(x) for x in bm.labels.ravel()})
    index = {n: i for i, n in enumerate(names)}
    grid = np.vectorize(lambda x: index[str(x)])(bm.labels)
    cmap = ListedColormap(plt.get_cmap("Pastel1").colors[: max(len(names), 1)])
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(
        grid,
        origin="lower",
        extent=(*bm.u_range, *bm.v_range),
        aspect="auto",
        cmap=cmap,
        vmin=-0.5,
        vmax=len(names) - 0.5,
        interpolation="nearest",
    )
    cb = fig.colorbar(im, ax=ax, ticks=range(len(names)))
    cb.ax.set_yticklabels(names)
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    return _save(fig, path)


_CURVE_STYLE = {
    "saddle-node": dict(color="k", ls="-"),
    "transcritical": dict(color="0.4", ls="-."),
    "hopf": dict(color="tab:red", ls="-"),
    "homoclinic": dict(color="tab:blue", ls="--"),
    "heteroclinic": dict(color="tab:green", ls=":"),
}


def diagram_figure(d, path, title: str = "") -> Path:
    """Region raster with the curves and BT points drawn on top."""
    names = sorted({str(x) for x in d.raster.ravel()})
    index = {n: i for i, n in enumerate(names)}
    grid = np.vectorize(lambda x: index[str(x)])(d.raster)
    cmap = ListedColormap(plt.get_cmap("Pastel2").colors[: max(len(names), 1)])
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    im = ax.imshow(
        grid,
        origin="lower",
        extent=(*d.q_range, *d.s_range),
        aspect="auto",
        cmap=cmap,
        vmin=-0.5,
        vmax=len(names) - 0.5,
        interpolation="nearest",
    )
    cb = fig.colorbar(im, ax=ax, ticks=range(len(names)))
    cb.ax.set_yticklabels(names)
    seen = set()
    for c in d.curves:
        if not len(c):
            continue
        q, s = np.array(c.points).T
        label = c.kind if c.kind not in seen else None
        seen.add(c.kind)
        ax.plot(q, s, lw=1.2, label=label, **_CURVE_STYLE.get(c.kind, {}))
    for b in d.bt:
        ax.plot(b.Q, b.S, "k*", ms=9, zorder=6)
    ax.set_xlim(*d.q_range)
    ax.set_ylim(*d.s_range)
    ax.set_xlabel("Q")
    ax.set_ylabel("S")
    if seen:
        ax.legend(fontsize=7, loc="upper left")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    return _save(fig, path)
