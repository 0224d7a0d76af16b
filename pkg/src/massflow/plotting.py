"""PNG figures written next to the CLI's CSV/JSON output (Agg backend)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# strip version strings so repeated runs give identical files
_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return str(path)


def plot_mass(report, path, title="mass"):
    rho = [s.rho for s in report.samples]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogx(rho, [s.value for s in report.samples], "o-", label="finite radius")
    if any(s.circle_term for s in report.samples):
        ax.semilogx(rho, [s.surface_term for s in report.samples], "s--", label="hemisphere")
        ax.semilogx(rho, [s.circle_term for s in report.samples], "^--", label="circle")
    ax.axhline(report.extrapolated, color="k", lw=0.8, label=f"limit {report.extrapolated:.6f}")
    ax.set_xlabel("coordinate radius")
    ax.set_ylabel("mass integral")
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_lambda(rows, path, keys, title):
    lam = [r["lambda"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for k in keys:
        ax.plot(lam, [np.nan if r[k] is None else r[k] for r in rows], "o-", label=k)
    ax.set_xlabel("lambda")
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_field(field, path):
    """Deviation ``w - alpha.x`` on the meridian half-planes ``phi = 0`` and ``phi = pi``."""
    g = field.grid
    n_p = g.shape[2]
    r = g.r
    fig, ax = plt.subplots(figsize=(5, 4))
    vmax = float(np.max(np.abs(field.v))) or 1.0
    for k, sign in ((0, 1.0), (n_p // 2, -1.0)):
        T, R = np.meshgrid(g.theta, r)
        X, Z = sign * R * np.sin(T), R * np.cos(T)
        m = ax.pcolormesh(X, Z, field.v[:, :, k], shading="gouraud", cmap="RdBu_r",
                          vmin=-vmax, vmax=vmax)
    lim = min(r[-1], 12 * g.spec.inner_radius)
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim if not g.is_half else 0, lim)
    ax.set_aspect("equal")
    ax.set_title("w - alpha.x, meridian plane")
    fig.colorbar(m, ax=ax)
    return _save(fig, path)


def plot_residuals(checks: dict, path, title="residuals"):
    names = list(checks)
    vals = [max(abs(checks[n]["value"]), 1e-300) for n in names]
    tols = [checks[n]["tolerance"] for n in names]
    fig, ax = plt.subplots(figsize=(6, 0.3 * len(names) + 1.5))
    y = np.arange(len(names))
    ax.barh(y, vals, log=True, color=["tab:green" if checks[n]["passed"] else "tab:red"
                                      for n in names])
    ax.scatter([t if t > 0 else np.nan for t in tols], y, marker="|", color="k", s=200)
    ax.set_yticks(y, names, fontsize=7)
    ax.set_title(title)
    return _save(fig, path)
