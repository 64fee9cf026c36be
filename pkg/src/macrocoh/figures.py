"""Optional figure rendering for the report-producing CLI subcommands.

Figures are always opt-in; the delimited output remains the canonical
artifact.  The Agg backend keeps rendering headless-safe.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_scaling(rows, path: str) -> None:
    """Fisher vs commutator scaling of the mixture family, with their ratio."""
    ns = [row.N for row in rows]
    fig, (ax, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax.plot(ns, [row.qfi_value for row in rows], "o-", label="quantum Fisher")
    ax.plot(ns, [row.il_value for row in rows], "s-", label="commutator measure")
    ax.set_xlabel("N")
    ax.set_ylabel("value")
    ax.set_yscale("log")
    ax.legend()
    ax2.plot(ns, [row.ratio for row in rows], "d-", color="tab:green")
    ax2.set_xlabel("N")
    ax2.set_ylabel("Fisher / commutator")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_evolution(times, purities, sizes, path: str) -> None:
    """Purity decay and phase-space size along a decoherence trajectory."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(times, purities, "-", color="tab:blue", label="purity")
    ax.set_xlabel("time")
    ax.set_ylabel("purity", color="tab:blue")
    twin = ax.twinx()
    twin.plot(times, sizes, "--", color="tab:red", label="phase-space size")
    twin.set_ylabel("phase-space size", color="tab:red")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_copies(profile, path: str) -> None:
    """Gap-resolved coherence profiles of the two copy states."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    width = 0.35
    grid = profile.delta_grid
    ax.bar(grid - width / 2, profile.psi_norms, width, label=f"psi^{profile.n}")
    ax.bar(grid + width / 2, profile.phi_norms, width, label=f"phi^{profile.m}")
    ax.set_xlabel("gap delta")
    ax.set_ylabel("mode trace norm")
    ax.set_title(f"profile distance {profile.profile_distance:.4f}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_fuzz(summary: dict, path: str) -> None:
    """Worst monotonicity margins per measure across the fuzzed channels."""
    measures = sorted(summary["measures"])
    m2a = [summary["measures"][m]["worst_m2a"] for m in measures]
    m2b = [summary["measures"][m]["worst_m2b"] for m in measures]
    x = range(len(measures))
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.bar([i - 0.2 for i in x], m2a, 0.4, label="deterministic margin")
    ax.bar([i + 0.2 for i in x], m2b, 0.4, label="selective margin")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xticks(list(x))
    ax.set_xticklabels(measures, rotation=20)
    ax.set_ylabel("worst margin (>= 0 passes)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
