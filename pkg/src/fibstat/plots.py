"""Figure rendering for the report paths.

Every experiment that writes CSVs can also render a matplotlib figure next to
them.  All functions take explicit data plus an output path and return the
path; callers decide whether plotting is enabled.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIG_SIZE = (7.0, 4.3)
DPI = 130


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def ratio_convergence(ratio_values, alpha, path):
    n = np.arange(1, len(ratio_values) + 1)
    err = np.abs(np.asarray(ratio_values) - alpha)
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.semilogy(n, np.maximum(err, 1e-18), lw=1.2)
    ax.set_xlabel("n")
    ax.set_ylabel(r"$|f_{n+1}/f_n - \alpha|$")
    ax.set_title("Consecutive-ratio convergence to the golden ratio")
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def transform_overview(input_terms, transformed, path, label=""):
    fig, axes = plt.subplots(2, 1, figsize=(7.0, 5.6), sharex=True)
    k_in = np.arange(1, len(input_terms) + 1)
    k_out = np.arange(1, len(transformed) + 1)
    axes[0].plot(k_in, input_terms, ".", ms=3)
    axes[0].set_ylabel(r"$x_k$")
    axes[0].set_title(f"Sequence and its difference transform {label}".rstrip())
    axes[1].plot(k_out, transformed, ".", ms=3, color="tab:red")
    axes[1].set_ylabel(r"$(\hat{F}x)_k$")
    axes[1].set_xlabel("k")
    for ax in axes:
        ax.grid(True, alpha=0.3)
    return _save(fig, path)


def density_curves(curves, path, threshold=None):
    """curves: list of (label, horizons array, ratios array)."""
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    for label, ns, ratios in curves:
        ax.plot(ns, ratios, lw=1.2, label=label)
    if threshold is not None:
        ax.axhline(threshold, color="k", ls="--", lw=0.8, label="zero threshold")
    ax.set_xlabel("n")
    ax.set_ylabel("A(n)/n")
    ax.set_title("Counting-function density estimates")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def deviation_curves(curves, path, title="Deviation densities"):
    """curves: list of (label, horizons, running densities)."""
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    for label, ns, dens in curves:
        ax.plot(ns, dens, lw=1.2, label=label)
    ax.set_xlabel("n")
    ax.set_ylabel("deviation density")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def error_curves(curves, path, title="Operator error sequences"):
    """curves: list of (label, errors indexed from k=1)."""
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    for label, errors in curves:
        k = np.arange(1, len(errors) + 1)
        vals = np.maximum(np.abs(np.asarray(errors, dtype=float)), 1e-18)
        ax.semilogy(k, vals, lw=1.2, label=label)
    ax.set_xlabel("k")
    ax.set_ylabel(r"$\|L_k(g) - g\|_{2\pi}$")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def rate_counts(reports, path):
    """reports: list of RateReport-like (weights, dyadic_horizons, weighted_counts)."""
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    for rep in reports:
        ax.loglog(rep.dyadic_horizons, np.maximum(rep.weighted_counts, 1e-18),
                  "o-", lw=1.2, label=f"{rep.weights} [{rep.verdict}]")
        ax.axhline(rep.final_threshold, color="k", ls=":", lw=0.7)
    ax.set_xlabel("n")
    ax.set_ylabel("weighted exceedance count")
    ax.set_title("Rate verdicts at dyadic horizons")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def bound_margins(rows, path, title="Modulus bound audit"):
    """rows: RateBoundRow list with k, lhs, rhs."""
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    k = [r.k for r in rows]
    ax.semilogy(k, [max(r.lhs, 1e-18) for r in rows], lw=1.2, label="operator error")
    ax.semilogy(k, [max(r.rhs, 1e-18) for r in rows], lw=1.2, label="modulus bound")
    ax.set_xlabel("k")
    ax.set_ylabel("sup norm")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)
