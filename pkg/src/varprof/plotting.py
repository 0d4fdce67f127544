"""Static figures written next to the CSV/JSON outputs (Agg backend, PNG)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from scipy.special import ndtr  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_z_histogram(z, path, title: str = "", bins: int = 50, range_=(-6.0, 6.0)) -> Path:
    """Histogram of standardised samples against the standard normal, with a QQ panel."""
    z = np.sort(np.asarray(z, dtype=float))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    ax1.hist(z, bins=bins, range=range_, density=True, alpha=0.6, label="samples")
    x = np.linspace(*range_, 400)
    ax1.plot(x, np.exp(-x * x / 2) / np.sqrt(2 * np.pi), "k-", lw=1.2, label="N(0,1)")
    ax1.set_xlabel("z")
    ax1.legend(frameon=False)
    from scipy.special import ndtri

    q = ndtri((np.arange(z.size) + 0.5) / z.size)
    ax2.plot(q, z, ".", ms=2)
    lim = [min(q[0], z[0]), max(q[-1], z[-1])]
    ax2.plot(lim, lim, "k--", lw=0.8)
    ax2.set_xlabel("normal quantile")
    ax2.set_ylabel("sample quantile")
    fig.suptitle(title)
    return _save(fig, path)


def plot_ecdf(z, path, title: str = "") -> Path:
    z = np.sort(np.asarray(z, dtype=float))
    fig, ax = plt.subplots(figsize=(5, 3.8))
    ax.step(z, np.arange(1, z.size + 1) / z.size, where="post", label="empirical")
    ax.plot(z, ndtr(z), "k-", lw=1, label="N(0,1)")
    ax.legend(frameon=False)
    ax.set_title(title)
    return _save(fig, path)


def plot_bound_sweep(rows, path, title: str = "") -> Path:
    """Log-log ``rhs`` against ``n`` per k, with an ``n^{-1/2}`` guide."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ks = sorted({r["k"] for r in rows})
    for k in ks:
        pts = [(r["n"], r["rhs"]) for r in rows if r["k"] == k and r["status"] == "ok"]
        if not pts:
            continue
        n, rhs = np.array(pts).T
        ax.loglog(n, rhs, "o-", label=f"k={k}")
        ax.loglog(n, rhs[0] * np.sqrt(n[0] / n), "k:", lw=0.8)
    ax.set_xlabel("n")
    ax.set_ylabel("bound")
    ax.set_title(title)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(frameon=False)
    return _save(fig, path)


def plot_norms(norms, path, b_n: float, budget: float | None = None, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.hist(np.asarray(norms) / np.sqrt(b_n), bins=20, alpha=0.7)
    if budget is not None:
        ax.axvline(budget / np.sqrt(b_n), color="k", ls="--", lw=1, label="budget")
        ax.legend(frameon=False)
    ax.set_xlabel("norm / sqrt(b_n)")
    ax.set_title(title)
    return _save(fig, path)


def plot_structural_zero(rows, path, title: str = "") -> Path:
    """Relative spread of the trace over draws, per k (log scale)."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ks = [r["k"] for r in rows]
    rel = [max(r["spread"] / r["scale"], 1e-18) if r["scale"] > 0 else 1e-18 for r in rows]
    colors = ["tab:gray" if r["constant"] else "tab:blue" for r in rows]
    ax.bar(ks, rel, color=colors)
    ax.set_yscale("log")
    ax.axhline(1e-9, color="k", ls="--", lw=0.8)
    ax.set_xlabel("k")
    ax.set_ylabel("relative spread")
    ax.set_title(title)
    return _save(fig, path)


def plot_er(report: dict, path, title: str = "") -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    ax1.plot(report["max_row_sums"], ".")
    ax1.axhline(report["row_sum_bound"], color="k", ls="--", lw=1)
    ax1.set_xlabel("graph")
    ax1.set_ylabel("max row sum")
    if report["ratios"]:
        ax2.hist(report["ratios"], bins=20, alpha=0.7)
        ax2.axvline(report["expected_ratio"], color="k", ls="--", lw=1)
    ax2.set_xlabel("S_k / (np)^k")
    fig.suptitle(title)
    return _save(fig, path)


def plot_oracle(rows, path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    err = np.array([max(r["rel_err"], 1e-18) for r in rows])
    ax.semilogy(err, ".")
    ax.axhline(1e-9, color="k", ls="--", lw=0.8)
    ax.set_xlabel("case")
    ax.set_ylabel("relative error")
    ax.set_title(title)
    return _save(fig, path)


def plot_variance(rows, path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ks = np.array([r["k"] for r in rows])
    ratio = np.array([r["var_hat"] / r["s_k"] if r["s_k"] > 0 else np.nan for r in rows])
    err = np.array([3 * r["var_se"] / r["s_k"] if r["s_k"] > 0 else np.nan for r in rows])
    ax.errorbar(ks, ratio, yerr=err, fmt="o")
    ax.axhline(1.0, color="k", ls="--", lw=0.8)
    ax.set_xlabel("k")
    ax.set_ylabel("var_hat / S_k")
    ax.set_title(title)
    return _save(fig, path)
