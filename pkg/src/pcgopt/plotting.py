"""Figure rendering for the experiment CLI.

Each CSV-producing command can optionally render a matplotlib figure of the
same data to a PNG file next to the delimited output.  Rendering is a pure
side output: the CSV content never depends on whether a figure was drawn.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["render"]


def _semilogy_ok(values):
    return all(v > 0 for v in values if v == v)


def _plot_optimize(ax, table, meta):
    params = [row[0] for row in table]
    vals = [row[1] for row in table]
    ax.plot(params, vals, "o", label="evaluations")
    if meta:
        ax.axvline(meta[0], color="tab:red", linestyle="--",
                   label=f"optimum {meta[0]:.6g}")
    if _semilogy_ok(vals):
        ax.set_yscale("log")
    ax.set_xlabel("parameter")
    ax.set_ylabel("functional value")
    ax.legend()


def _plot_curve(ax, table, meta):
    params = [row[0] for row in table]
    vals = [row[1] for row in table]
    ses = [row[2] for row in table]
    ax.plot(params, vals, "-o")
    if any(se > 0 for se in ses):
        lo = [v - se for v, se in zip(vals, ses)]
        hi = [v + se for v, se in zip(vals, ses)]
        ax.fill_between(params, lo, hi, alpha=0.3, color="gray")
    if _semilogy_ok(vals):
        ax.set_yscale("log")
    ax.set_xlabel("parameter")
    ax.set_ylabel("functional value")


def _plot_pcg(ax, table, meta):
    its = [row[0] for row in table]
    for col, label in ((1, "relres"), (2, "err2"), (3, "errA")):
        vals = [row[col] for row in table if row[col] is not None]
        if vals:
            ax.semilogy(its[:len(vals)], vals, label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel("norm")
    ax.legend()


def _plot_spectrum(ax, table, meta):
    idx = [row[0] for row in table]
    vals = [row[1] for row in table]
    ax.semilogy(idx, vals, ".")
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")


def _plot_theorem(ax, table, meta):
    its = [row[0] for row in table]
    for col, label, style in ((1, "errA", "-"), (2, "2 C1^j bound", "o"),
                              (3, "2 Cs^j bound", "s"), (4, "head |g1 q(l1)|", "--"),
                              (5, "head (zeroed run)", ":")):
        vals = [max(row[col], 1e-300) for row in table]
        ax.semilogy(its, vals, style, label=label, markevery=max(len(its) // 20, 1))
    ax.set_xlabel("iteration")
    ax.set_ylabel("A-norm error / bound")
    ax.legend(fontsize="small")


def _plot_meanrate(ax, table, meta):
    ks = [row[0] for row in table]
    ax.semilogy(ks, [row[1] for row in table], "o", label="empirical e_k")
    ax.semilogy(ks, [row[2] for row in table], "-", label="Frobenius norm of G^k")
    ax.semilogy(ks, [row[3] for row in table], "--", label="rho(G)^k")
    ax.set_xlabel("k")
    ax.set_ylabel("error measure")
    ax.legend()


_RENDERERS = {
    "optimize": _plot_optimize,
    "curve": _plot_curve,
    "pcg": _plot_pcg,
    "spectrum": _plot_spectrum,
    "theorem": _plot_theorem,
    "meanrate": _plot_meanrate,
}


def render(kind, table, png_path, meta=None, title=None):
    """Render one command's data table to png_path.

    table is a list of numeric rows as written to the CSV (None for blank
    cells); meta carries command-specific extras (e.g. the optimum).
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    _RENDERERS[kind](ax, table, meta)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
