"""Deterministic CSV/JSON writers and SVG figures for scan outputs.

Every file starts with the same provenance block: tool version, the full
config echo and the master seed.  Wall-clock information goes to
``timing.log`` only, so reruns with one config are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__


def provenance(command: str, config: dict) -> dict:
    return {
        "tool": "magicotoc",
        "version": __version__,
        "command": command,
        "seed": config.get("seed"),
        "config": config,
    }


def _clean(value):
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return repr(v) if math.isfinite(v) else "nan"
    return str(value)


def write_csv(path: Path, header: dict, columns: list, rows) -> Path:
    buf = io.StringIO()
    for line in json.dumps(_clean(header), sort_keys=True, indent=1).splitlines():
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    path = Path(path)
    path.write_text(buf.getvalue())
    return path


def read_csv(path: Path) -> list:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    return [{k: float(v) for k, v in row.items()} for row in reader]


def write_json(path: Path, header: dict, body: dict) -> Path:
    payload = {"provenance": _clean(header)}
    payload.update(_clean(body))
    path = Path(path)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return path


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "magicotoc"
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    return plt, fig, ax


def _save(plt, fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)


def plot_mana_scan(path: Path, rows: list, fit) -> Path:
    plt, fig, ax = _figure()
    x = [r["mana_mean"] for r in rows]
    y = [r["one_minus_delta"] for r in rows]
    ax.errorbar(
        x, y,
        xerr=[r["mana_std"] for r in rows],
        yerr=[r["delta_std"] for r in rows],
        fmt="o", color="tab:green", ms=4, capsize=2, label="sampled",
    )
    if fit is not None:
        xs = np.linspace(min(x), max(x), 50)
        ax.plot(xs, fit.slope * xs + fit.intercept, "--", color="k",
                label=f"fit {fit.slope:.3f} x + {fit.intercept:.3f}")
    ax.set_xlabel("mean mana (log2)")
    ax.set_ylabel(r"$1-\bar\delta_{OTOC}$")
    ax.legend(frameon=False)
    return _save(plt, fig, path)


def plot_sre_scan(path: Path, rows: list, fit) -> Path:
    plt, fig, ax = _figure()
    x = [r["m2_mean"] for r in rows]
    y = [r["neg_log2_delta"] for r in rows]
    ax.errorbar(x, y, xerr=[r["m2_std"] for r in rows], fmt="o", color="tab:blue", ms=4,
                capsize=2, label=r"$-\log_2\bar\delta$")
    ax.errorbar(x, [r["m2_estimate"] for r in rows], yerr=[r["m2_estimate_err"] for r in rows],
                fmt="s", color="tab:orange", ms=3, capsize=2, label="inverted estimate")
    lim = [0, max(max(x), 1.0)]
    ax.plot(lim, lim, ":", color="grey", lw=1)
    ax.set_xlabel(r"mean $M_2$")
    ax.set_ylabel("bits")
    ax.legend(frameon=False)
    return _save(plt, fig, path)


def plot_hamiltonian_scan(path: Path, rows: list) -> Path:
    plt, fig, ax = _figure()
    t = [r["time"] for r in rows]
    ax.plot(t, [r["m2_exact"] for r in rows], "--", color="k", label=r"exact $M_2$ (Choi)")
    ax.errorbar(t, [r["m2_estimate"] for r in rows], yerr=[r["m2_err"] for r in rows],
                fmt="o", color="tab:blue", ms=4, capsize=2, label="OTOC estimate")
    ax.set_xlabel("time (1/J)")
    ax.set_ylabel(r"$M_2$")
    ax.legend(frameon=False)
    return _save(plt, fig, path)


def write_sample_set(out_dir: Path, stem: str, header: dict, samples, estimate) -> tuple:
    """``<stem>.csv`` with (sample_index, otoc_value) and ``<stem>.json`` with the estimate."""
    out_dir = Path(out_dir)
    rows = [{"sample_index": k, "otoc_value": float(v)} for k, v in enumerate(samples.values)]
    csv_path = write_csv(out_dir / f"{stem}.csv", header, ["sample_index", "otoc_value"], rows)
    body = {
        "mean": estimate.mean_otoc,
        "delta": estimate.delta,
        "delta_std_err": estimate.delta_std_err,
        "m2_estimate": estimate.m2_estimate,
        "m2_err": estimate.m2_err,
        "mode": samples.sampler_mode,
        "seed": samples.master_seed,
        "n_samples": samples.n_samples,
        "a_site": samples.a_site,
        "b_site": samples.b_site,
    }
    return csv_path, write_json(out_dir / f"{stem}.json", header, body)
