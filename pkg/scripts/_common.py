"""Shared helpers for the experiment scripts."""

import csv
from pathlib import Path

RESULTS = Path(__file__).resolve().parent.parent / "results"


def out_path(name: str) -> str:
    RESULTS.mkdir(exist_ok=True)
    return str(RESULTS / name)


def read_rows(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def plot(path, x, ys, xlabel, ylabel, logy=False, name=None):
    """Save ``path`` with a .png next to it; skipped when matplotlib is absent."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; CSV only")
        return
    rows = read_rows(path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for col in ys:
        ax.plot([float(r[x]) for r in rows], [float(r[col]) for r in rows], marker=".", label=col)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    png = str(Path(path).with_name(name) if name else Path(path).with_suffix(".png"))
    fig.savefig(png, dpi=150)
    print(f"wrote {png}")
