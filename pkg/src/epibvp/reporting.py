"""Deterministic result files: JSON, CSV and rendered figures.

Every run writes machine-readable artifacts whose bytes depend only on
the inputs: object keys are emitted sorted, every float is printed with
17 significant digits (enough to round-trip an IEEE double exactly),
and no timestamps or environment details leak into the output.  Two
runs of the same command therefore produce identical JSON files, which
is what downstream diff-based pipelines assume.

Figures are rendered with the Agg backend straight to PNG next to the
delimited output; they are a human convenience and carry no data that
is not already in the CSV/JSON.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "fmt_float", "emit_json", "write_json", "write_csv",
    "branch_record", "critical_record", "profile_record",
    "write_profile_csv", "write_branch_csv", "write_residual_csv",
    "fig_radial_profiles", "fig_residuals", "fig_monotone_trace",
    "fig_existence", "fig_chains",
]


def fmt_float(value):
    """17-significant-digit decimal form of a float (round-trip exact)."""
    v = float(value)
    if v != v:
        return "nan"
    if v in (float("inf"), float("-inf")):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _emit(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append('"%s"' % obj.replace("\\", "\\\\").replace('"', '\\"'))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no literal for non-finite numbers; null keeps files valid
        out.append("null" if (v != v or v in (float("inf"), float("-inf")))
                   else fmt_float(v))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            _emit(str(key), out)
            out.append(": ")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(", ")
            _emit(item, out)
        out.append("]")
    else:
        raise TypeError("cannot serialize %r" % type(obj))


def emit_json(obj):
    """Render obj as deterministic JSON text (sorted keys, 17 digits)."""
    out = []
    _emit(obj, out)
    out.append("\n")
    return "".join(out)


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(emit_json(obj))
    return path


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    return str(value)


def write_csv(path, header, rows):
    """Comma-delimited table with the same float formatting as the JSON."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")
    return path


# ----------------------------------------------------------------- records

def branch_record(branch, samples=None):
    """JSON-ready dict for one solved branch.

    samples, when given, is an iterable of (t, u, residual) rows from
    the residual sweep; they are stored as parallel arrays to keep the
    record compact.
    """
    rec = {
        "problem": branch.problem.short,
        "lambda": branch.lam,
        "c": branch.c,
        "branch_label": branch.branch_label,
        "n_terms": branch.n_terms,
        "f_value": branch.f_value,
        "bc_residual": branch.bc_residual,
        "residual_max": branch.residual_max,
        "near_critical": branch.near_critical,
    }
    if samples is not None:
        rec["t"] = [s[0] for s in samples]
        rec["u"] = [s[1] for s in samples]
        rec["residual"] = [s[2] for s in samples]
    return rec


def critical_record(report):
    return {
        "problem": report.problem.short,
        "lambda_lo": report.lambda_lo,
        "lambda_hi": report.lambda_hi,
        "midpoint": report.midpoint,
        "bound_interval": list(report.bound_interval),
        "within_bounds": report.within_bounds,
        "n_terms": report.n_terms,
        "tol_lambda": report.tol_lambda,
        "probes": [
            {"lambda": lam, "count": count, "c_gap": gap}
            for lam, count, gap in report.probes
        ],
    }


def profile_record(profile, boundary=None):
    rec = {
        "problem": profile.problem.short,
        "lambda": profile.lam,
        "c": profile.c,
        "branch_label": profile.branch_label,
        "n_terms": profile.n_terms,
    }
    if boundary is not None:
        rec["boundary"] = boundary
    return rec


# -------------------------------------------------------------- CSV output

def write_profile_csv(profile, outdir, name=None):
    """r,w,phi,residual table under the canonical profile file name."""
    from .radial import profile_csv_name
    fname = name if name is not None else profile_csv_name(profile)
    rows = zip(profile.r, profile.w, profile.phi, profile.residual)
    return write_csv(os.path.join(outdir, fname),
                     ["r", "w", "phi", "residual"], rows)


def write_branch_csv(branch, samples, outdir, name):
    """t,u,residual table for one branch on the evaluation grid."""
    return write_csv(os.path.join(outdir, name),
                     ["t", "u", "residual"],
                     [(t, branch.eval(t), r) for t, r in samples])


def write_residual_csv(rows, outdir, name):
    return write_csv(os.path.join(outdir, name), ["r", "residual"], rows)


# ----------------------------------------------------------------- figures

def fig_radial_profiles(profiles, path):
    """Height and slope of every branch against radius, one panel each."""
    fig, (ax_phi, ax_w) = plt.subplots(1, 2, figsize=(9.6, 4.0))
    for p in profiles:
        label = "%s (c=%.4g)" % (p.branch_label, p.c)
        ax_phi.plot(p.r, p.phi, label=label)
        ax_w.plot(p.r, p.w, label=label)
    ax_phi.set_xlabel("r")
    ax_phi.set_ylabel("phi(r)")
    ax_phi.set_title("surface height")
    ax_w.set_xlabel("r")
    ax_w.set_ylabel("w(r)")
    ax_w.set_title("radial slope")
    for ax in (ax_phi, ax_w):
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def fig_residuals(branch_rows, path):
    """Semilog defect magnitude over t for each branch.

    branch_rows: [(label, [(t, residual), ...]), ...]
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    floor = 1e-18
    for label, rows in branch_rows:
        ts = [t for t, _ in rows]
        rs = [max(abs(r), floor) for _, r in rows]
        ax.semilogy(ts, rs, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("|defect|")
    ax.set_title("equation residual of the truncated series")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def fig_monotone_trace(trace, path):
    """Per-sweep update size of both iteration chains."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    sweeps = np.arange(1, len(trace.alpha_changes) + 1)
    ax.semilogy(sweeps, np.maximum(trace.alpha_changes, 1e-18),
                marker="o", ms=3, label="upper chain update")
    ax.semilogy(sweeps, np.maximum(trace.beta_changes, 1e-18),
                marker="s", ms=3, label="lower chain update")
    ax.set_xlabel("sweep")
    ax.set_ylabel("max |change|")
    ax.set_title("%s monotone iteration, lambda=%g" % (trace.problem.short,
                                                       trace.lam))
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def fig_chains(trace, path):
    """Final iterates of both chains over t."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(trace.ts, trace.alpha, label="upper chain limit")
    ax.plot(trace.ts, trace.beta, "--", label="lower chain limit")
    ax.set_xlabel("t")
    ax.set_ylabel("u(t)")
    ax.set_title("%s two-sided iteration, lambda=%g" % (trace.problem.short,
                                                        trace.lam))
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def fig_existence(rows, path, title):
    """Branch diagram: root constants c against lambda, count on a twin."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    lams, counts = [], []
    for row in rows:
        lams.append(row["lambda"])
        counts.append(row["count"])
        for c in row["c_values"]:
            ax.plot(row["lambda"], c, "k.", ms=4)
    ax.set_xlabel("lambda")
    ax.set_ylabel("root constant c")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax2 = ax.twinx()
    ax2.step(lams, counts, where="mid", color="tab:red", alpha=0.5,
             label="branch count")
    ax2.set_ylabel("branch count", color="tab:red")
    ax2.set_ylim(-0.2, max(counts) + 0.8 if counts else 1)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
