"""Figure emission for run artifacts.

Writes small self-contained matplotlib scripts next to the run's CSVs (so
figures regenerate without this package installed) and, by default, also
executes them to render PNGs alongside the delimited output.
"""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

from .errors import ConfigError

LOSS_SCRIPT = '''\
"""Regenerate the loss-trajectory figure from {csv_name}."""
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
rows = list(csv.DictReader(open(here / "{csv_rel}")))
epochs = [int(r["epoch"]) for r in rows]
fig, ax = plt.subplots(figsize=(7, 4.5))
for key, label in [("L_i", "interior"), ("L_s", "smoothness"),
                   ("L_b", "boundary"), ("total", "total")]:
    ax.semilogy(epochs, [max(float(r[key]), 1e-300) for r in rows],
                label=label, linewidth=1.2)
ax.set_xlabel("epoch")
ax.set_ylabel("loss")
ax.legend()
ax.grid(True, alpha=0.3)
fig.tight_layout()
fig.savefig(here / "loss.png", dpi=150)
print("wrote", here / "loss.png")
'''

RESIDUAL_1D_SCRIPT = '''\
"""Regenerate the residual profile figure from {csv_name}."""
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
rows = list(csv.DictReader(open(here / "{csv_rel}")))
y = [float(r["y"]) for r in rows]
res = [abs(float(r["r1"])) for r in rows]
fig, ax = plt.subplots(figsize=(7, 4.5))
ax.loglog([max(v, 1e-16) for v in y], [max(v, 1e-300) for v in res], linewidth=1.2)
ax.set_xlabel("y")
ax.set_ylabel("|equation residual|")
ax.grid(True, alpha=0.3)
fig.tight_layout()
fig.savefig(here / "residuals.png", dpi=150)
print("wrote", here / "residuals.png")
'''

RESIDUAL_2D_SCRIPT = '''\
"""Regenerate the residual heatmaps from {csv_name} (n x n mesh in z)."""
import csv
import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = Path(__file__).resolve().parent
rows = list(csv.DictReader(open(here / "{csv_rel}")))
n = int(round(math.sqrt(len(rows))))
z1 = np.array([float(r["z1"]) for r in rows]).reshape(n, n)
z2 = np.array([float(r["z2"]) for r in rows]).reshape(n, n)
names = [k for k in rows[0] if k.startswith("r")]
fig, axes = plt.subplots(2, 3, figsize=(14, 8))
for ax, name in zip(axes.ravel(), names):
    r = np.abs(np.array([float(row[name]) for row in rows])).reshape(n, n)
    im = ax.pcolormesh(z1, z2, np.log10(np.maximum(r, 1e-16)), shading="auto")
    ax.set_xlabel("z_1")
    ax.set_ylabel("z_2")
    ax.set_title("log10 |" + name + "|")
    fig.colorbar(im, ax=ax)
fig.tight_layout()
fig.savefig(here / "residuals.png", dpi=150)
print("wrote", here / "residuals.png")
'''

ORACLE_SCRIPT = '''\
"""Regenerate the oracle-error figure from {csv_name}."""
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
rows = list(csv.DictReader(open(here / "{csv_rel}")))
y = [float(r["y"]) for r in rows]
err = [float(r["abs_err"]) for r in rows]
fig, ax = plt.subplots(figsize=(7, 4.5))
ax.loglog([max(v, 1e-16) for v in y], [max(v, 1e-300) for v in err], linewidth=1.2)
ax.set_xlabel("y")
ax.set_ylabel("|U_nn - U_oracle|")
ax.grid(True, alpha=0.3)
fig.tight_layout()
fig.savefig(here / "oracle_error.png", dpi=150)
print("wrote", here / "oracle_error.png")
'''


def _is_2d_grid(csv_path: Path) -> bool:
    header = csv_path.open().readline().strip().split(",")
    return "z1" in header and "z2" in header


def emit_plots(run_dir: str | Path, render: bool = True) -> list[Path]:
    """Write plot scripts for a run directory; render PNGs unless told not to.

    Raises ConfigError listing every missing input if the directory holds
    none of the expected CSVs.
    """
    run_dir = Path(run_dir)
    plots_dir = run_dir / "plots"
    expected = {
        "loss.csv": ("plot_loss.py", LOSS_SCRIPT),
        "residual_grid.csv": ("plot_residuals.py", None),  # 1D/2D decided below
    }
    oracle_csvs = sorted(run_dir.glob("*.oracle.csv")) + sorted(
        run_dir.glob("checkpoints/*.oracle.csv"))

    missing = [name for name in expected if not (run_dir / name).exists()]
    present = [name for name in expected if (run_dir / name).exists()]
    if not present and not oracle_csvs:
        wanted = ", ".join(list(expected) + ["*.oracle.csv"])
        raise ConfigError(f"no plottable artifacts in {run_dir}; missing: {wanted}")

    plots_dir.mkdir(exist_ok=True)
    scripts: list[Path] = []

    def emit(script_name: str, template: str, csv_path: Path):
        rel = Path("..") / csv_path.relative_to(run_dir)
        body = template.format(csv_name=csv_path.name, csv_rel=rel.as_posix())
        path = plots_dir / script_name
        path.write_text(body)
        scripts.append(path)

    if (run_dir / "loss.csv").exists():
        emit("plot_loss.py", LOSS_SCRIPT, run_dir / "loss.csv")
    grid_csv = run_dir / "residual_grid.csv"
    if grid_csv.exists():
        template = RESIDUAL_2D_SCRIPT if _is_2d_grid(grid_csv) else RESIDUAL_1D_SCRIPT
        emit("plot_residuals.py", template, grid_csv)
    for k, oc in enumerate(oracle_csvs):
        suffix = "" if len(oracle_csvs) == 1 else f"_{k}"
        emit(f"plot_oracle_error{suffix}.py", ORACLE_SCRIPT, oc)

    if render:
        for script in scripts:
            proc = subprocess.run([sys.executable, str(script)],
                                  capture_output=True, text=True)
            if proc.returncode != 0:
                raise ConfigError(
                    f"rendering {script.name} failed:\n{proc.stderr.strip()}")
    if missing:
        # partial artifact sets are fine; report what was skipped
        print(f"note: skipped missing inputs: {', '.join(missing)}")
    return scripts
