"""Matplotlib renderings used by ``dmuss demo --figures``."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .galois import is_prime, make_field  # noqa: E402
from .synthesis import (  # noqa: E402
    DmussScheme,
    PrivacyBlock,
    SymbolicGenerator,
    single_draw_success_rate,
    success_lower_bound,
)


def plot_generator(g: SymbolicGenerator, scheme: DmussScheme, path) -> Path:
    """Side-by-side support pattern of the symbolic generator and the values
    of an instantiated scheme's decoding block."""
    M, N = g.message_count, g.n_rows
    support = np.zeros((N, M + N))
    for i, row in enumerate(g.message_block):
        for j, e in enumerate(row):
            support[i, j] = 1.0 if e is not None else 0.0
        support[i, M + i] = 0.5
    values = np.array(scheme.decoding_block().to_rows(), dtype=float).reshape(N, M)

    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.6), gridspec_kw={"width_ratios": [M + N, M]})
    ax0.imshow(support, cmap="Greys", vmin=0, vmax=1)
    ax0.axvline(M - 0.5, color="tab:red", lw=1)
    ax0.set_title("indeterminates | share identity")
    message_labels = [f"W{k}" for k in range(1, len(g.rates) + 1) for _ in range(g.rates[k - 1])]
    ax0.set_xticks(range(M + N))
    ax0.set_xticklabels(message_labels + [f"Y{n}" for n in range(1, N + 1)], fontsize=7)
    ax1.set_xticks(range(M))
    ax1.set_xticklabels(message_labels, fontsize=7)
    im = ax1.imshow(values, cmap="viridis", vmin=0, vmax=scheme.q - 1)
    ax1.set_title(f"decoding block over GF({scheme.q})")
    for (i, j), v in np.ndenumerate(values):
        ax1.text(j, i, int(v), ha="center", va="center", color="w" if v < (scheme.q - 1) / 2 else "k", fontsize=8)
    for ax in (ax0, ax1):
        ax.set_yticks(range(N))
        ax.set_yticklabels([str(n) for n in range(1, N + 1)])
        ax.set_ylabel("node")
    fig.colorbar(im, ax=ax1, fraction=0.05)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_success_probability(blocks: Sequence[PrivacyBlock], path, q_max: int = 101,
                             trials: int = 400, seed: int = 0) -> tuple[Path, list[dict]]:
    """Empirical single-draw success rate against field size, with the
    ``(1 - m/q)**v`` lower bound."""
    qs = [q for q in range(2, q_max + 1) if is_prime(q)]
    rows = []
    for q in qs:
        f = make_field(q)
        rows.append({
            "q": q,
            "empirical": single_draw_success_rate(blocks, f, trials, seed=seed + q),
            "bound": success_lower_bound(blocks, f),
        })
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(qs, [r["empirical"] for r in rows], "o-", ms=3, label=f"empirical ({trials} draws)")
    ax.plot(qs, [r["bound"] for r in rows], "--", label="lower bound")
    ax.set_xscale("log")
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("field size q")
    ax.set_ylabel("P(all blocks nonsingular)")
    ax.legend(loc="lower right")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path, rows
