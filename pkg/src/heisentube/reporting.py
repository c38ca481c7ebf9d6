"""Deterministic report emission: CSV tables, JSON metadata, PNG figures.

Numbers are serialized with 17 significant digits so doubles round-trip
losslessly and reports diff cleanly.  Wall-clock data lives in a single
metadata block; everything else is byte-reproducible under a fixed config.
"""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["Report", "format_number", "write_report"]


def format_number(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if isinstance(x, (complex, np.complexfloating)):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    return str(x)


@dataclass
class Report:
    command: str
    out_dir: Path
    files: list = field(default_factory=list)
    failed: bool = False

    @property
    def exit_code(self):
        return 1 if self.failed else 0


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_number(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _render_text(result, config_text):
    lines = [f"command: {result.command}", "", "[config]"]
    lines.extend(config_text.rstrip("\n").split("\n"))
    lines.append("")
    lines.append("[results]")
    for name, (value, context) in result.scalars.items():
        mark = ""
        if name in result.verdicts:
            mark = "  PASS" if result.verdicts[name] else "  FAIL"
        lines.append(f"  {name} = {format_number(value)}  ({context}){mark}")
    extra = [k for k in result.verdicts if k not in result.scalars]
    for name in extra:
        lines.append(f"  {name}: {'PASS' if result.verdicts[name] else 'FAIL'}")
    if result.flags:
        lines.append("")
        lines.append("[flags]")
        for fl in result.flags:
            lines.append(f"  {fl}")
    for name, (header, rows) in result.tables.items():
        lines.append("")
        lines.append(f"[table {name}]")
        lines.append("  " + " | ".join(header))
        for row in rows:
            lines.append("  " + " | ".join(format_number(v) for v in row))
    lines.append("")
    lines.append("verdict: " + ("FAIL" if result.failed else "PASS"))
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# figures


def _table_columns(result, table, *names):
    header, rows = result.tables[table]
    idx = [header.index(n) for n in names]
    return [np.array([row[i] for row in rows], dtype=float) for i in idx]


def _fig_lp_sweep(result, ax):
    header, rows = result.tables["sweep"]
    taus = sorted({row[0] for row in rows})
    for tau in taus:
        lv = [row[1] for row in rows if row[0] == tau]
        pt = [row[3] for row in rows if row[0] == tau]
        ax.semilogy(lv, pt, marker="o", label=f"tau={tau:g}")
    ax.set_xlabel("refinement level")
    ax.set_ylabel("partial integral")
    ax.legend(fontsize=8)
    ax.set_title("shell-refined integrability sweep")


def _fig_amenability(result, ax):
    sigma, mag = _table_columns(result, "path", "sigma", "derivative_magnitude")
    ax.loglog(sigma, mag, "o-")
    ax.invert_xaxis()
    exp = result.scalars.get("fitted_exponent", (np.nan, ""))[0]
    ax.set_xlabel("sigma = |f(path)|")
    ax.set_ylabel("|d^k R / ds^k|")
    ax.set_title(f"convolution derivative growth (exponent {exp:.3f})")


def _fig_continuity(result, ax):
    scale, norm = _table_columns(result, "sweep", "scale", "diff_norm")
    ax.loglog(scale, norm, "o-")
    ax.set_xlabel("translation scale")
    ax.set_ylabel("||t_* h - h||")
    ax.set_title("strong continuity sweep")


def _fig_unitarity(result, ax):
    trial, disc, err = _table_columns(result, "trials", "trial", "rel_discrepancy", "combined_rel_error")
    ax.errorbar(trial, disc, yerr=3 * err, fmt="o", capsize=2, label="|Delta norm| (3 sigma bars)")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("trial")
    ax.set_ylabel("relative discrepancy")
    ax.legend(fontsize=8)
    ax.set_title("unitarity of right translation")


def _fig_gram(result, ax):
    idx, eig = _table_columns(result, "eigenvalues", "index", "eigenvalue")
    ax.bar(idx, np.maximum(eig, 1e-300))
    ax.set_yscale("log")
    ax.set_xlabel("index")
    ax.set_ylabel("Gram eigenvalue")
    ax.set_title("spectrum of the translate Gram matrix")


def _fig_sqs(result, ax):
    s, r = _table_columns(result, "sqs_remainder", "scale", "mean_remainder")
    ax.loglog(s, r, "o-")
    exp = result.scalars.get("quadratic_remainder_exponent", (np.nan, ""))[0]
    ax.set_xlabel("scale")
    ax.set_ylabel("remainder")
    ax.set_title(f"gauge minus quadratic part (exponent {exp:.3f})")


def _fig_l1(result, ax):
    fl, v = _table_columns(result, "refinement", "floor", "value")
    ax.semilogx(fl, v, "o-")
    ax.invert_xaxis()
    ax.set_xlabel("refinement floor (relative region edge)")
    ax.set_ylabel("orbit L1 estimate")
    ax.set_title("refinement study of the orbit L1 norm")


def _fig_levi_bounds(result, ax):
    header, rows = result.tables["bounds"]
    names = [row[0] for row in rows]
    vals = [row[1] for row in rows]
    ax.bar(range(len(names)), vals)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=7)
    ax.set_title("Levi polynomial bound constants")


def _fig_certify(result, ax):
    header, rows = result.tables["certificate"]
    ax.bar([0], [rows[0][2]])
    ax.set_xticks([0])
    ax.set_xticklabels(["min tangent eigenvalue"])
    ax.set_title(f"pseudoconvexity margin ({rows[0][4]})")


def _fig_fubini(result, ax):
    header, rows = result.tables["totals"]
    names = [row[0] for row in rows]
    vals = [row[1] for row in rows]
    errs = [row[2] for row in rows]
    ax.bar(range(len(names)), vals, yerr=[3 * e for e in errs], capsize=4)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, fontsize=8)
    ax.set_title("thickened-tube mass vs slice integral")


_FIGURES = {
    "gauge-check": _fig_sqs,
    "certify-spc": _fig_certify,
    "levi-bounds": _fig_levi_bounds,
    "lp-sweep": _fig_lp_sweep,
    "l1-group": _fig_l1,
    "amenability": _fig_amenability,
    "rep-unitarity": _fig_unitarity,
    "rep-continuity": _fig_continuity,
    "gram-rank": _fig_gram,
    "slice-fubini": _fig_fubini,
}


def _render_figure(result, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fn = _FIGURES.get(result.command)
    if fn is None:
        return None
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    fn(result, ax)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


# ----------------------------------------------------------------------


def write_report(result, config_text, out_dir, elapsed_seconds, figures=True):
    """Emit report.txt, metadata.json, one CSV per table and a PNG figure.

    Only the "wallclock" block of metadata.json varies between identical
    runs; every other byte is a pure function of the config.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = Report(result.command, out, failed=result.failed)

    for name, (header, rows) in result.tables.items():
        path = out / f"{result.command}.{name}.csv"
        _write_csv(path, header, rows)
        report.files.append(path)

    txt = out / "report.txt"
    txt.write_text(_render_text(result, config_text))
    report.files.append(txt)

    fig_path = None
    if figures:
        fig_path = _render_figure(result, out / f"{result.command}.png")
        if fig_path is not None:
            report.files.append(fig_path)

    meta = {
        "command": result.command,
        "config": config_text,
        "scalars": {
            k: {"value": format_number(v), "context": c}
            for k, (v, c) in result.scalars.items()
        },
        "verdicts": {k: bool(v) for k, v in result.verdicts.items()},
        "flags": list(result.flags),
        "tables": [f.name for f in report.files if f.suffix == ".csv"],
        "figure": fig_path.name if fig_path else None,
        "failed": result.failed,
        "wallclock": {
            "started_unix": time.time() - elapsed_seconds,
            "elapsed_seconds": elapsed_seconds,
        },
    }
    meta_path = out / "metadata.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    report.files.append(meta_path)
    return report
