"""Render a scan report to a PNG next to its delimited output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .reports import ScanReport


def _column(report: ScanReport, name: str, rows=None):
    rows = report.rows if rows is None else rows
    return [row[name] for row in rows]


def render_report(report: ScanReport, path: str) -> str:
    """One figure per report, chosen by experiment; returns the path written."""
    experiment = report.config.experiment
    fig, ax = plt.subplots(figsize=(5.0, 3.4), constrained_layout=True)
    ns = _column(report, "n")
    if experiment == "ps_scaling":
        ax.plot(ns, _column(report, "ratio"), "o-", label="max $P_s(n) / (n P_s(1))$")
        ax.plot(ns, ns, "k--", lw=1, label="ideal $n$")
        ax.set_ylabel("postselection gain")
        ax.legend()
    elif experiment == "aw_scaling":
        ax.plot(ns, _column(report, "aw_measured"), "o-", label="simulated $|A_w|$")
        ax.plot(ns, _column(report, "analytic"), "k--", lw=1, label=r"$\sqrt{n}/\epsilon$")
        ax.set_ylabel("weak value magnitude")
        ax.legend()
    elif experiment == "fisher_saturation":
        ax.plot(ns, _column(report, "saturation_ratio"), "o-",
                label=r"$I^{(1)}/(\eta I)$")
        ax.axhline(1.0, color="k", ls="--", lw=1)
        ax.set_ylim(0.9, 1.02)
        ax.set_ylabel("recovered information fraction")
        ax.legend()
    elif experiment == "circuit_check":
        deltas = [max(1.0 - row["fidelity_circuit"], 1e-18) for row in report.rows]
        ax.semilogy(range(len(deltas)), deltas, "o-", label="1 - fidelity (circuit)")
        sched = [(i, max(1.0 - row["fidelity_scheduler"], 1e-18))
                 for i, row in enumerate(report.rows)
                 if row["fidelity_scheduler"] is not None]
        if sched:
            ax.semilogy([i for i, _ in sched], [d for _, d in sched], "s--",
                        label="1 - fidelity (scheduler)")
        ax.axhline(1e-9, color="k", ls=":", lw=1, label="tolerance")
        ax.set_xlabel("row")
        ax.set_ylabel("infidelity")
        ax.legend()
        fig.savefig(path, dpi=150)
        plt.close(fig)
        return path
    ax.set_xlabel("entangled ancillas n")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
