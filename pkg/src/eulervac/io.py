"""Artifact writing: atomic files, fixed-precision CSV tables, log-log SVG plots."""
from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def atomic_write(path, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def fmt_float(v, digits: int = 17) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), f".{digits}g")
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence], digits: dict | None = None) -> str:
    """CSV with 17 significant digits unless ``digits`` overrides a column."""
    digits = digits or {}
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(fmt_float(v, digits.get(h, 17)) for h, v in zip(header, row)))
    return "\n".join(out) + "\n"


def write_csv(path, header, rows, digits=None) -> Path:
    return atomic_write(path, csv_text(header, rows, digits))


def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def loglog_svg(path, series: dict, xlabel: str = "epsilon", ylabel: str = "norm", reference=None) -> Path:
    """Log-log plot of ``{label: (x, y)}``; output carries no timestamp."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    for label, (x, y) in sorted(series.items()):
        x, y = np.asarray(x, float), np.asarray(y, float)
        ok = (x > 0) & (y > 0)
        if np.any(ok):
            ax.loglog(x[ok], y[ok], "o-", label=label)
    if reference is not None:
        x, y, label = reference
        ax.loglog(x, y, "k--", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    import io as _io

    buf = _io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return atomic_write(path, buf.getvalue())


def line_svg(path, series: dict, xlabel: str, ylabel: str) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import io as _io

    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    for label, (x, y) in sorted(series.items()):
        ax.plot(x, y, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    fig.tight_layout()
    buf = _io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return atomic_write(path, buf.getvalue())
