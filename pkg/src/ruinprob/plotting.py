"""Two-panel PNG summary of a solved case: epsilon band with Monte Carlo points, and the tail bound."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .pipeline import SolveResult, ValidationResult, curve_points  # noqa: E402


def plot_summary(path: Path, result: SolveResult, validation: ValidationResult | None = None,
                 title: str | None = None) -> Path:
    z = curve_points(result)
    zb = np.linspace(0.0, result.y, 201)  # the tail panel spans the whole barrier range
    eps = result.certificate.total_error
    nodes = result.interest_nodes
    show = [nodes[0]] if len(nodes) == 1 else [nodes[0], nodes[len(nodes) // 2], nodes[-1]]
    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(11, 4.2))
    top = 0.0
    for k, i in enumerate(show):
        psi = np.atleast_1d(result.psi(z, float(i)))
        label = "approximation" if len(show) == 1 else f"approximation, i = {i:g}"
        ax_a.plot(z, psi, color=f"C{k}", lw=1.6, label=label)
        ax_a.plot(z, np.minimum(1.0, psi + eps), color=f"C{k}", ls="--", lw=1.0,
                  label="upper bound (+ certified error)" if k == 0 else None)
        ax_b.plot(zb, np.atleast_1d(result.psi(zb, float(i))), color=f"C{k}", lw=1.6, label=label)
        top = max(top, float(np.max(psi)) + eps)
    if validation is not None:
        for k, i in enumerate(show):
            rows = [r for r in validation.rows if np.isclose(r.i, i)]
            if not rows:
                continue
            zs = [r.z for r in rows]
            ph = np.array([r.estimate.p_hat for r in rows])
            err = np.array([[r.estimate.p_hat - r.estimate.lower for r in rows],
                            [r.estimate.upper - r.estimate.p_hat for r in rows]])
            ax_a.errorbar(zs, ph, yerr=err, fmt="o", ms=4, color=f"C{k}", mfc="white",
                          label="Monte Carlo (95% CI)" if k == 0 else None)
            top = max(top, max(r.estimate.upper for r in rows))
    ax_b.plot(zb, np.asarray(result.bound.bound(zb)), color="k", ls=":", lw=1.4,
              label=f"tail bound {result.bound.bound.label}")
    ax_a.set_ylim(0.0, min(1.02, 1.15 * top))
    ax_b.set_ylim(0.0, 1.02)
    for ax, tag in ((ax_a, "(a)"), (ax_b, "(b)")):
        ax.set_xlabel("initial capital z")
        ax.set_ylabel("ruin probability")
        ax.set_title(tag, loc="left")
        ax.grid(alpha=0.3)
        ax.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
