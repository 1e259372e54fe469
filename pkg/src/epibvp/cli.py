"""Command-line front end for the thin-film steady-state solver.

Subcommands
-----------
solve              series branches for one (problem, lambda); radial CSVs,
                   figures, and a JSON summary; optional two-sided
                   iteration engine and cross-engine comparison
scan               bisection for the fold value of lambda
existence-profile  branch counts over a lambda grid
monotone           two-sided kernel iteration with ordering checks
greens-check       nonpositivity sweep of the integral kernels
residual-table     equation defect at reference radii per branch

All artifacts land in one output directory, resolved in this order:
the EPIBVP_OUT environment variable, then --outdir, then an `outdir`
line in the --config file, then ./epibvp-out.  A config file holds
flat key=value lines (keys match the long option names); values given
on the command line win over the file.

Exit status: 0 success; 1 bad configuration, kernel out of validity,
or ordering violation; 2 no admissible root or seed; 3 existence still
holds at the end of a scan bracket.

JSON and CSV files are deterministic: rerunning the same command
byte-identically reproduces them (17 significant digits, sorted keys,
no timestamps).
"""

import argparse
import os
import sys

import numpy as np

from . import reporting
from .adm import AdmConfig, ProblemKind, problem_from_tag, residual, solve_branches
from .errors import (BracketFailure, ConfigError, NoAdmissibleSeed, NoRealRoot,
                     OrderingViolation, OutOfValidity)
from .greens import GreensKernel, kernel_value, positive_k_limit, sign_check
from .lambda_scan import existence_profile, find_critical
from .monotone import (default_ts, iterate, relaxed_seed, seed_upper,
                       verify_lower_upper)
from .radial import (boundary_report, profile_csv_name, residual_table,
                     to_radial)

_ENV_OUT = "EPIBVP_OUT"
_DEFAULT_OUTDIR = "./epibvp-out"

# default lambda grid ends for existence-profile, wide enough to pass
# the fold of each problem by a clear margin
_PROFILE_STOP = {
    ProblemKind.P1_Dirichlet: 185.0,
    ProblemKind.P2_NeumannAtHalf: 45.0,
    ProblemKind.P3_Robin: 20.0,
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


# ------------------------------------------------------------- value parsing

def _parse_bracket(text):
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ConfigError("bracket must be two comma-separated numbers")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError("bracket values must be numbers: %r" % text)
    return (lo, hi)


def _parse_float(text):
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ConfigError("expected a number, got %r" % text)


def _parse_int(text):
    try:
        return int(str(text), 10)
    except (TypeError, ValueError):
        raise ConfigError("expected an integer, got %r" % text)


def _parse_lambda_list(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip() != ""]
    except ValueError:
        raise ConfigError("lambda list must be comma-separated numbers")


def _parse_engine(text):
    if text not in ("adm", "monotone", "both"):
        raise ConfigError("engine must be adm, monotone or both")
    return text


def _k_samples(text, n_samples, problem):
    """k values for greens-check: single number, comma list, or lo..hi."""
    if text is None:
        limit = positive_k_limit(problem)
        return [-50.0, -10.0, -1.0, 0.5 * limit, 0.9 * limit]
    text = str(text)
    if ".." in text:
        a, _, b = text.partition("..")
        try:
            lo, hi = float(a), float(b)
        except ValueError:
            raise ConfigError("k range must look like lo..hi")
        return list(np.linspace(lo, hi, max(2, n_samples)))
    if "," in text:
        try:
            return [float(x) for x in text.split(",")]
        except ValueError:
            raise ConfigError("k list must be comma-separated numbers")
    return [_parse_float(text)]


# ----------------------------------------------------------- config merging

def _read_config(path):
    """Flat key=value file; '#' comments and blank lines are skipped."""
    if not os.path.exists(path):
        raise ConfigError("config file not found: %s" % path)
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError("config line %d is not key=value: %r"
                                  % (lineno, line))
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    # the --lambda option is stored as "lam" (keyword clash in Python)
    if "lambda" in out:
        out["lam"] = out.pop("lambda")
    return out


def _merged(ns, cfgmap, dest, cast, default):
    """CLI value if given, else config-file value, else the default."""
    value = getattr(ns, dest, None)
    if value is not None:
        return value
    if dest in cfgmap:
        return cast(cfgmap[dest])
    return default


def _resolve_outdir(ns, cfgmap):
    env = os.environ.get(_ENV_OUT)
    if env:
        return env
    if ns.outdir is not None:
        return ns.outdir
    return cfgmap.get("outdir", _DEFAULT_OUTDIR)


def _resolve_problem(ns, cfgmap):
    tag = _merged(ns, cfgmap, "problem", str, None)
    if tag is None:
        raise ConfigError("--problem is required (p1, p2 or p3)")
    return problem_from_tag(tag)


def _adm_config(ns, cfgmap, n_terms_default=15):
    return AdmConfig(
        n_terms=_merged(ns, cfgmap, "n_terms", _parse_int, n_terms_default),
        c_bracket=_merged(ns, cfgmap, "bracket", _parse_bracket, (-60.0, 60.0)),
        tol_c=_merged(ns, cfgmap, "tol_c", _parse_float, 1e-10),
        tol_residual=_merged(ns, cfgmap, "tol_residual", _parse_float, 1e-8),
    )


def _require_lambda(ns, cfgmap):
    lam = _merged(ns, cfgmap, "lam", _parse_float, None)
    if lam is None:
        raise ConfigError("--lambda is required")
    return float(lam)


def _say(text):
    print(text)


def _unique_name(used, fname):
    """Suffix duplicate artifact names so no branch overwrites another."""
    if fname not in used:
        used[fname] = 1
        return fname
    used[fname] += 1
    stem, ext = os.path.splitext(fname)
    return "%s_%d%s" % (stem, used[fname], ext)


# ------------------------------------------------------------- solve engine

def _solve_adm(problem, lam, cfg, outdir):
    """Series branches -> radial CSV + figures; returns (records, paths)."""
    branches = solve_branches(problem, lam, cfg)
    records, paths, profiles, res_rows = [], [], [], []
    used = {}
    for b in branches:
        rows = residual(b, cfg.grid)
        prof = to_radial(b)
        edge = boundary_report(prof)
        csv_path = reporting.write_profile_csv(
            prof, outdir, name=_unique_name(used, profile_csv_name(prof)))
        rec = reporting.branch_record(
            b, samples=[(t, b.eval(t), r) for t, r in rows])
        rec["radial_boundary"] = edge
        rec["radial_csv"] = os.path.basename(csv_path)
        records.append(rec)
        paths.append(csv_path)
        profiles.append(prof)
        res_rows.append((b.branch_label, rows))
        _say("  %s branch %-8s c=%s  |defect|max=%s  edge %s=%s"
             % (problem.short, b.branch_label, reporting.fmt_float(b.c),
                reporting.fmt_float(b.residual_max), edge["expression"],
                reporting.fmt_float(edge["value"])))
    stem = "%s_%g" % (problem.short, lam)
    paths.append(reporting.fig_radial_profiles(
        profiles, os.path.join(outdir, stem + "_profiles.png")))
    paths.append(reporting.fig_residuals(
        res_rows, os.path.join(outdir, stem + "_residual.png")))
    return branches, records, paths


def _run_monotone(problem, lam, k, max_iter, tol, outdir, grid_n):
    """Two-sided iteration -> chain CSVs + figures; returns (summary, paths)."""
    ts = default_ts(grid_n)
    if lam < 0:
        seed = relaxed_seed(problem, lam)
        enforce = False
    else:
        seed = seed_upper(problem, lam)
        enforce = True
    trace = iterate(problem, k, lam, seed, max_iter=max_iter, tol=tol,
                    ts=ts, enforce_ordering=enforce)
    stem = "%s_%g" % (problem.short, lam)
    paths = [
        reporting.write_csv(os.path.join(outdir, stem + "_alpha_chain.csv"),
                            ["t", "u"], zip(trace.ts, trace.alpha)),
        reporting.write_csv(os.path.join(outdir, stem + "_beta_chain.csv"),
                            ["t", "u"], zip(trace.ts, trace.beta)),
        reporting.fig_monotone_trace(
            trace, os.path.join(outdir, stem + "_monotone.png")),
        reporting.fig_chains(trace, os.path.join(outdir, stem + "_chains.png")),
    ]
    summary = {
        "k": k,
        "lambda": lam,
        "seed_C": trace.seed_C,
        "ordered": enforce,
        "converged": trace.converged,
        "iterations": trace.iterations,
        "final_gap": trace.final_gap,
        "ordering_margin": trace.ordering_margin,
        "k_prime_window": trace.k_prime_window,
        "alpha_csv": os.path.basename(paths[0]),
        "beta_csv": os.path.basename(paths[1]),
    }
    if enforce:
        # independent defect checks of the bracketing pair behind the seed
        zeros = np.zeros_like(ts)
        summary["zero_as_lower"] = verify_lower_upper(problem, ts, zeros,
                                                      lam, "lower")
        summary["seed_as_upper"] = verify_lower_upper(problem, ts,
                                                      seed.sample(ts), lam,
                                                      "upper")
    _say("  iteration %s: converged=%s sweeps=%d gap=%s"
         % (problem.short, trace.converged, trace.iterations,
            reporting.fmt_float(trace.final_gap)))
    return trace, summary, paths


def cmd_solve(ns, cfgmap, outdir):
    problem = _resolve_problem(ns, cfgmap)
    lam = _require_lambda(ns, cfgmap)
    engine = _merged(ns, cfgmap, "engine", _parse_engine, "adm")
    cfg = _adm_config(ns, cfgmap)
    summary = {
        "command": "solve",
        "problem": problem.short,
        "lambda": lam,
        "engine": engine,
        "n_terms": cfg.n_terms,
        "c_bracket": list(cfg.c_bracket),
    }
    paths = []
    branches = None
    if engine in ("adm", "both"):
        branches, records, p = _solve_adm(problem, lam, cfg, outdir)
        summary["branches"] = records
        paths += p
    trace = None
    if engine in ("monotone", "both"):
        k = _merged(ns, cfgmap, "k", _parse_float, -1.0)
        max_iter = _merged(ns, cfgmap, "max_iter", _parse_int, 200)
        tol = _merged(ns, cfgmap, "tol", _parse_float, 1e-10)
        grid_n = _merged(ns, cfgmap, "grid_n", _parse_int, 2049)
        trace, msum, p = _run_monotone(problem, lam, k, max_iter, tol,
                                       outdir, grid_n)
        summary["monotone"] = msum
        paths += p
    if branches is not None and trace is not None:
        # the chains settle on one solution; report the distance to every
        # series branch and name the closest
        gaps = {}
        for b in branches:
            vals = b.eval_grid(trace.ts)
            gaps[b.branch_label] = float(np.max(np.abs(vals - trace.alpha)))
        best = min(gaps, key=gaps.get)
        summary["cross_engine"] = {
            "gap_by_branch": gaps,
            "closest_branch": best,
            "max_gap": gaps[best],
        }
        _say("  cross-engine: iteration sits on the %s branch (gap %s)"
             % (best, reporting.fmt_float(gaps[best])))
    json_path = reporting.write_json(
        os.path.join(outdir, "solve_%s_%g.json" % (problem.short, lam)),
        summary)
    paths.append(json_path)
    for p in sorted(paths):
        _say("  wrote %s" % p)


def cmd_scan(ns, cfgmap, outdir):
    problem = _resolve_problem(ns, cfgmap)
    tol = _merged(ns, cfgmap, "tol", _parse_float, 0.05)
    lambda_max = _merged(ns, cfgmap, "lambda_max", _parse_float, None)
    report = find_critical(problem, tol_lambda=tol, lambda_max=lambda_max)
    rec = reporting.critical_record(report)
    rec["command"] = "scan"
    paths = [reporting.write_json(
        os.path.join(outdir, "scan_%s.json" % problem.short), rec)]
    probe_rows = sorted(
        ({"lambda": lam, "count": count, "c_values": []}
         for lam, count, _ in report.probes),
        key=lambda r: r["lambda"])
    paths.append(reporting.fig_existence(
        probe_rows, os.path.join(outdir, "scan_%s.png" % problem.short),
        "%s existence bisection (fold near %.6g)" % (problem.short,
                                                     report.midpoint)))
    _say("  %s fold in [%s, %s], midpoint %s, proven window [%s, %s]: %s"
         % (problem.short, reporting.fmt_float(report.lambda_lo),
            reporting.fmt_float(report.lambda_hi),
            reporting.fmt_float(report.midpoint),
            reporting.fmt_float(report.bound_interval[0]),
            reporting.fmt_float(report.bound_interval[1]),
            "inside" if report.within_bounds else "OUTSIDE"))
    for p in sorted(paths):
        _say("  wrote %s" % p)


def cmd_existence_profile(ns, cfgmap, outdir):
    problem = _resolve_problem(ns, cfgmap)
    explicit = _merged(ns, cfgmap, "lambdas", _parse_lambda_list, None)
    if explicit is not None:
        lams = [float(x) for x in explicit]
    else:
        start = _merged(ns, cfgmap, "start", _parse_float, 0.0)
        stop = _merged(ns, cfgmap, "stop", _parse_float,
                       _PROFILE_STOP[problem])
        step = _merged(ns, cfgmap, "step", _parse_float, 5.0)
        if step <= 0 or stop < start:
            raise ConfigError("profile grid needs step > 0 and stop >= start")
        lams = list(np.arange(start, stop + 0.5 * step, step))
    cfg = _adm_config(ns, cfgmap)
    rows = existence_profile(problem, lams, cfg)
    counts = [r["count"] for r in rows]
    non_increasing = all(counts[i + 1] <= counts[i]
                         for i in range(len(counts) - 1))
    first_zero = next((r["lambda"] for r in rows if r["count"] == 0), None)
    summary = {
        "command": "existence-profile",
        "problem": problem.short,
        "n_terms": cfg.n_terms,
        "rows": rows,
        "counts_non_increasing": non_increasing,
        "first_zero_lambda": first_zero,
    }
    paths = [
        reporting.write_json(
            os.path.join(outdir, "existence_%s.json" % problem.short),
            summary),
        reporting.write_csv(
            os.path.join(outdir, "existence_%s.csv" % problem.short),
            ["lambda", "count", "c_values", "labels"],
            [(r["lambda"], r["count"],
              ";".join(reporting.fmt_float(c) for c in r["c_values"]),
              ";".join(r["labels"])) for r in rows]),
        reporting.fig_existence(
            rows, os.path.join(outdir, "existence_%s.png" % problem.short),
            "%s branch diagram" % problem.short),
    ]
    for r in rows:
        _say("  lambda=%-12s branches=%d" % (reporting.fmt_float(r["lambda"]),
                                             r["count"]))
    _say("  counts non-increasing: %s; first empty lambda: %s"
         % (non_increasing, first_zero))
    for p in sorted(paths):
        _say("  wrote %s" % p)


def cmd_monotone(ns, cfgmap, outdir):
    problem = _resolve_problem(ns, cfgmap)
    lam = _require_lambda(ns, cfgmap)
    k = _merged(ns, cfgmap, "k", _parse_float, -1.0)
    max_iter = _merged(ns, cfgmap, "max_iter", _parse_int, 200)
    tol = _merged(ns, cfgmap, "tol", _parse_float, 1e-10)
    grid_n = _merged(ns, cfgmap, "grid_n", _parse_int, 2049)
    trace, msum, paths = _run_monotone(problem, lam, k, max_iter, tol,
                                       outdir, grid_n)
    msum["command"] = "monotone"
    msum["problem"] = problem.short
    paths.append(reporting.write_json(
        os.path.join(outdir, "monotone_%s_%g.json" % (problem.short, lam)),
        msum))
    for p in sorted(paths):
        _say("  wrote %s" % p)


def cmd_greens_check(ns, cfgmap, outdir):
    problem = _resolve_problem(ns, cfgmap)
    resolution = _merged(ns, cfgmap, "resolution", _parse_int, 200)
    n_samples = _merged(ns, cfgmap, "samples", _parse_int, 5)
    k_text = _merged(ns, cfgmap, "k", str, None)
    ks = _k_samples(k_text, n_samples, problem)
    rows, first_valid = [], None
    for k in ks:
        try:
            kern = GreensKernel(problem, float(k))
        except OutOfValidity as exc:
            rows.append({"k": float(k), "valid": False, "error": str(exc)})
            _say("  k=%-12s outside validity: %s" % ("%g" % k, exc))
            continue
        rep = sign_check(kern, resolution=resolution)
        rep["valid"] = True
        rows.append(rep)
        if first_valid is None:
            first_valid = kern
        _say("  k=%-12s max G=%s  nonpositive=%s"
             % ("%g" % k, reporting.fmt_float(rep["max_value"]), rep["pass"]))
    summary = {
        "command": "greens-check",
        "problem": problem.short,
        "resolution": resolution,
        "positive_k_limit": positive_k_limit(problem),
        "samples": rows,
    }
    paths = [reporting.write_json(
        os.path.join(outdir, "greens_%s.json" % problem.short), summary)]
    if first_valid is not None:
        paths.append(_fig_kernel(first_valid,
                                 os.path.join(outdir,
                                              "greens_%s.png" % problem.short)))
    for p in sorted(paths):
        _say("  wrote %s" % p)
    if first_valid is None:
        raise OutOfValidity("no requested k fell inside the validity range")
    if any(r.get("valid") and not r["pass"] for r in rows):
        raise OutOfValidity("kernel sign check failed; see the JSON report")


def _fig_kernel(kern, path):
    import matplotlib.pyplot as plt
    n = 201
    xs = np.linspace(1e-9, 0.5, n)
    grid = kernel_value(kern, xs[None, :], xs[:, None])
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    im = ax.imshow(grid, origin="lower", extent=(0, 0.5, 0, 0.5),
                   aspect="equal", cmap="viridis")
    fig.colorbar(im, ax=ax, label="G(s, t)")
    ax.set_xlabel("s")
    ax.set_ylabel("t")
    ax.set_title("%s kernel, k=%g" % (kern.problem.short, kern.k))
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def cmd_residual_table(ns, cfgmap, outdir):
    problem = _resolve_problem(ns, cfgmap)
    lam = _require_lambda(ns, cfgmap)
    cfg = _adm_config(ns, cfgmap)
    branches = solve_branches(problem, lam, cfg)
    records, paths = [], []
    used = {}
    for b in branches:
        rows = residual_table(b)
        name = _unique_name(used, "residual_%s_%g_%s.csv"
                            % (problem.short, lam, b.branch_label))
        paths.append(reporting.write_residual_csv(rows, outdir, name))
        records.append({
            "branch_label": b.branch_label,
            "c": b.c,
            "r": [r for r, _ in rows],
            "residual": [v for _, v in rows],
            "csv": name,
        })
        worst = max(abs(v) for _, v in rows)
        _say("  %s branch %-8s c=%s  worst |defect| over the table: %s"
             % (problem.short, b.branch_label, reporting.fmt_float(b.c),
                reporting.fmt_float(worst)))
    summary = {
        "command": "residual-table",
        "problem": problem.short,
        "lambda": lam,
        "n_terms": cfg.n_terms,
        "branches": records,
    }
    paths.append(reporting.write_json(
        os.path.join(outdir, "residual_%s_%g.json" % (problem.short, lam)),
        summary))
    for p in sorted(paths):
        _say("  wrote %s" % p)


# -------------------------------------------------------------- entry point

def build_parser():
    ap = _Parser(prog="epibvp",
                 description="multiple radial steady states of an "
                             "epitaxial thin-film model")
    ap.add_argument("--outdir", default=None,
                    help="artifact directory (EPIBVP_OUT wins over this)")
    ap.add_argument("--config", default=None,
                    help="flat key=value defaults file")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    def common(p):
        p.add_argument("--problem", default=None,
                       help="boundary condition: p1, p2 or p3")

    p = sub.add_parser("solve", help="series branches at one lambda")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--n-terms", type=int, default=None)
    p.add_argument("--bracket", type=_parse_bracket, default=None,
                   metavar="LO,HI", help="root search window for c")
    p.add_argument("--tol-c", type=float, default=None)
    p.add_argument("--tol-residual", type=float, default=None)
    p.add_argument("--engine", choices=("adm", "monotone", "both"),
                   default=None)
    p.add_argument("--k", type=float, default=None,
                   help="kernel shift for the iteration engine")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=None,
                   help="iteration stopping tolerance")
    p.add_argument("--grid-n", type=int, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("scan", help="bisect the fold value of lambda")
    common(p)
    p.add_argument("--tol", type=float, default=None,
                   help="final bracket width (default 0.05)")
    p.add_argument("--lambda-max", type=float, default=None,
                   help="upper end of the existence bracket")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("existence-profile",
                       help="branch counts over a lambda grid")
    common(p)
    p.add_argument("--lambdas", type=_parse_lambda_list, default=None,
                   metavar="L1,L2,...",
                   help="explicit lambda list (overrides start/stop/step)")
    p.add_argument("--start", type=float, default=None)
    p.add_argument("--stop", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--n-terms", type=int, default=None)
    p.add_argument("--bracket", type=_parse_bracket, default=None,
                   metavar="LO,HI")
    p.add_argument("--tol-c", type=float, default=None)
    p.add_argument("--tol-residual", type=float, default=None)
    p.set_defaults(func=cmd_existence_profile)

    p = sub.add_parser("monotone", help="two-sided kernel iteration")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--k", type=float, default=None,
                   help="kernel shift (default -1)")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--grid-n", type=int, default=None)
    p.set_defaults(func=cmd_monotone)

    p = sub.add_parser("greens-check",
                       help="kernel nonpositivity over a sample of k")
    common(p)
    p.add_argument("--k", default=None,
                   help="single value, comma list, or lo..hi range")
    p.add_argument("--samples", type=int, default=None,
                   help="sample count for a lo..hi range (default 5)")
    p.add_argument("--resolution", type=int, default=None,
                   help="grid resolution per axis (default 200)")
    p.set_defaults(func=cmd_greens_check)

    p = sub.add_parser("residual-table",
                       help="equation defect at reference radii")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--n-terms", type=int, default=None)
    p.add_argument("--bracket", type=_parse_bracket, default=None,
                   metavar="LO,HI")
    p.add_argument("--tol-c", type=float, default=None)
    p.add_argument("--tol-residual", type=float, default=None)
    p.set_defaults(func=cmd_residual_table)

    return ap


def main(argv=None):
    try:
        ns = build_parser().parse_args(argv)
        cfgmap = _read_config(ns.config) if ns.config else {}
        outdir = _resolve_outdir(ns, cfgmap)
        os.makedirs(outdir, exist_ok=True)
        ns.func(ns, cfgmap, outdir)
        return 0
    except (ConfigError, OutOfValidity, OrderingViolation) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (NoRealRoot, NoAdmissibleSeed) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except BracketFailure as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
