"""Static SVG renderings of the experiment CSV rows (optional, needs matplotlib)."""
from __future__ import annotations

from collections import defaultdict

from .errors import ConfigError


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        raise ConfigError("--svg needs matplotlib (pip install 'artifact[plot]')") from None
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "stochround"
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_bias_table(rows, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot([r.k for r in rows], [float(r.theta) for r in rows], "o-")
    ax.set_xlabel("k")
    ax.set_ylabel("theta(s_k)")
    _save(fig, path)
    plt.close(fig)


def plot_integrate(rows, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    by_mode = defaultdict(lambda: ([], []))
    for N, mode, _sid, _h, result, *_ in rows:
        by_mode[mode][0].append(N)
        by_mode[mode][1].append(float(result))
    for mode, (ns, vals) in by_mode.items():
        ax.scatter(ns, vals, s=6, label=mode, alpha=0.6)
    ax.axhline(1.0, color="k", lw=0.8)
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("computed integral")
    ax.legend()
    _save(fig, path)
    plt.close(fig)


def plot_x_sweep(rows, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    xs, det, prob = {}, {}, {}
    pts = defaultdict(lambda: ([], []))
    for point, x, _xh, _rounded, _c, d, p, kind, _mode, _sid, _vh, err in rows:
        xs[point] = float(x)
        det[point], prob[point] = float(d), float(p)
        if float(err) > 0:
            pts[kind][0].append(float(x))
            pts[kind][1].append(float(err))
    order = sorted(xs)
    ax.plot([xs[i] for i in order], [det[i] for i in order], label="deterministic bound")
    ax.plot([xs[i] for i in order], [prob[i] for i in order], label="probabilistic bound")
    for kind, (x, e) in pts.items():
        ax.scatter(x, e, s=6 if kind == "sr" else 14, label=kind)
    ax.set_yscale("log")
    ax.set_xlabel("x")
    ax.set_ylabel("forward error")
    ax.legend(fontsize=7)
    _save(fig, path)
    plt.close(fig)


def plot_n_sweep(rows, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    det, prob = {}, {}
    pts = defaultdict(lambda: ([], []))
    for N, _n, _x, _rounded, _c, d, p, kind, _mode, _sid, _vh, err in rows:
        det[N], prob[N] = float(d), float(p)
        if float(err) > 0:
            pts[kind][0].append(N)
            pts[kind][1].append(float(err))
    order = sorted(det)
    ax.plot(order, [det[n] for n in order], label="deterministic bound / cond")
    ax.plot(order, [prob[n] for n in order], label="probabilistic bound / cond")
    for kind, (n, e) in pts.items():
        ax.scatter(n, e, s=6 if kind == "sr" else 14, label=kind)
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("forward error / cond")
    ax.legend(fontsize=7)
    _save(fig, path)
    plt.close(fig)
