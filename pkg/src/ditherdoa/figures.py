"""Render result tables to figure files next to the CSV output.

One PNG per experiment: log-log error curves per quantizer for the error
studies, success-fraction heat maps with the fitted phase boundary for the
phase-transition sweep. The CSV stays the primary artifact; these plots are
a convenience for eyeballing a run.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import ResultTable

plt.rcParams.update(
    {
        "figure.figsize": (6.0, 4.2),
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "savefig.dpi": 150,
    }
)


def _series(table: ResultTable) -> dict[str, list]:
    out: dict[str, list] = {}
    for r in sorted(table.rows, key=lambda r: (r.quantizer, r.bits, r.n)):
        out.setdefault(r.quantizer, []).append(r)
    return out


def _plot_error_curves(table: ResultTable, xfield: str, xlabel: str, ylabel: str, ax):
    for label, rows in _series(table).items():
        xs = np.array([getattr(r, xfield) for r in rows], dtype=float)
        med = np.array([r.median for r in rows])
        q25 = np.array([r.quantile25 for r in rows])
        q75 = np.array([r.quantile75 for r in rows])
        (line,) = ax.loglog(xs, med, marker="o", markersize=3, label=label)
        ax.fill_between(xs, q25, q75, alpha=0.15, color=line.get_color())
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=7)


def _render_bits_curves(table: ResultTable, path: str, ylabel: str) -> None:
    fig, ax = plt.subplots()
    _plot_error_curves(table, "bits", "total bits", ylabel, ax)
    ax.set_title(table.metadata.get("experiment", ""))
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _render_eigendep_rect(table: ResultTable, path: str) -> None:
    fig, ax = plt.subplots()
    _plot_error_curves(table, "n", "snapshots n", "median sin-theta distance", ax)
    ax.set_title("eigendep_rect: error under the scaling zeta = n^(-beta)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _render_eigendep_tri(table: ResultTable, path: str) -> None:
    fig, ax = plt.subplots()
    _plot_error_curves(table, "n", "snapshots n", "median sin-theta distance", ax)
    sigma_r = table.metadata.get("sigma_r", {})
    if sigma_r:
        ns = np.array(sorted(int(k) for k in sigma_r))
        sig = np.array([float(sigma_r[str(n)]) for n in ns])
        meds = [r.median for r in table.rows if r.median > 0]
        if meds:
            # anchor the 1/sigma_r guide line near the observed curves
            scale = math.exp(float(np.mean(np.log(meds)))) * float(np.exp(np.mean(np.log(sig))))
            ax.loglog(ns, scale / sig, "k--", linewidth=1, label="C / sigma_r")
            ax.legend(fontsize=7)
    ax.set_title("eigendep_tri: error vs snapshots per bit depth")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _render_phase_transition(table: ResultTable, path: str) -> None:
    phase = table.metadata.get("phase", {})
    labels = sorted(phase) if phase else sorted({r.quantizer.split("|")[0] for r in table.rows})
    fig, axes = plt.subplots(1, max(len(labels), 1), figsize=(5.5 * max(len(labels), 1), 4.2))
    if len(labels) == 1:
        axes = [axes]
    for ax, label in zip(axes, labels):
        rows = [r for r in table.rows if r.quantizer.startswith(label + "|")]
        eps_vals = sorted({float(r.quantizer.split("eps=")[1]) for r in rows})
        bit_vals = sorted({r.bits for r in rows})
        grid = np.full((len(bit_vals), len(eps_vals)), np.nan)
        for r in rows:
            eps = float(r.quantizer.split("eps=")[1])
            grid[bit_vals.index(r.bits), eps_vals.index(eps)] = r.success_frac
        mesh = ax.pcolormesh(
            eps_vals, bit_vals, grid, shading="nearest", vmin=0, vmax=1, cmap="viridis"
        )
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("separation epsilon")
        ax.set_ylabel("total bits")
        info = phase.get(label, {})
        if info.get("eps"):
            ax.plot(info["eps"], info["min_usually_successful_bits"], "r.-", markersize=6,
                    label="usually-successful boundary")
            if "slope" in info:
                ax.set_title(f"{label} (boundary slope {info['slope']:.2f})")
                ax.legend(fontsize=7)
        else:
            ax.set_title(label)
        fig.colorbar(mesh, ax=ax, label="success fraction")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_figure(table: ResultTable, path: str) -> None:
    """Render the figure matching the table's experiment to ``path``."""
    name = table.metadata.get("experiment") or (table.rows[0].experiment if table.rows else "")
    if name == "adversarial":
        _render_bits_curves(table, path, "median sin-theta distance")
    elif name == "wellsep_doa":
        _render_bits_curves(table, path, "median matching distance")
    elif name == "eigendep_rect":
        _render_eigendep_rect(table, path)
    elif name == "eigendep_tri":
        _render_eigendep_tri(table, path)
    elif name == "phase_transition":
        _render_phase_transition(table, path)
    else:
        _render_bits_curves(table, path, "median error")
