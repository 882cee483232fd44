import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from pathlib import Path
from typing import Dict, Optional
from pointerwork.plot.constants import PALETTE, QUANTITY_COLORS, SVG_HASH_SALT


def _color(label: str, i: int) -> str:
    return QUANTITY_COLORS.get(label, PALETTE[i % len(PALETTE)])


def series(
    x,
    curves: Dict[str, np.ndarray],
    path,
    xlabel: str,
    ylabel: str,
    logx: bool = False,
    logy: bool = False,
    markers: bool = False,
    hline: Optional[float] = None,
    title: Optional[str] = None,
):
    """Line plot of several curves over a shared x axis, written as a self-contained SVG."""
    plt.rcParams["svg.hashsalt"] = SVG_HASH_SALT
    f = plt.figure(figsize=(6, 4))
    for i, (label, y) in enumerate(curves.items()):
        plt.plot(
            x,
            y,
            label=label,
            c=_color(label, i),
            marker="o" if markers else None,
            lw=1.2,
        )
    if hline is not None:
        plt.axhline(hline, c="#A0B1BA", ls="--", lw=0.8)
    if logx:
        plt.xscale("log")
    if logy:
        plt.yscale("log")
    plt.xlabel(xlabel)
    plt.ylabel(ylabel)
    if title is not None:
        plt.title(title)
    plt.legend()
    plt.tight_layout()
    # no timestamp so reruns give identical files
    plt.savefig(Path(path), format="svg", metadata={"Date": None})
    plt.close(f)
    return path
