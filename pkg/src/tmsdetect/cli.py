"""Command-line interface: sampling, enumeration, detection, statistics,
figures and the end-to-end reproduction pipeline."""

from __future__ import annotations

import json
import os
import sys
import time

import click
import numpy as np

from . import runio, stats, svgplot, tms
from .bloch import SpinSize, tensor_from_density, tensor_from_two_qubit_density
from .observables import enumerate_paths, enumerate_sets, universe_labels
from .sampling import (
    SeededEnsemble,
    npt_entangled_symmetric,
    quantumness_batch,
    sample_state,
)
from .stats import (
    best_path,
    build_class_table,
    estimate_set_probabilities,
    path_stats,
)
from .witnesses import (
    PAIR_LABELS,
    batch_diag_values,
    batch_pair_values,
    pair_witness_stats,
    t32_matrix,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

DEFAULT_INDET_CAP = 0.005


def _echo(ctx, msg):
    if not ctx.obj.get("quiet"):
        click.echo(msg, err=True)


def _config_pairs(**kwargs):
    return [(k, v) for k, v in kwargs.items()]


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="flat key = value configuration file")
@click.option("--quiet", is_flag=True, default=False)
@click.option("--verbose", is_flag=True, default=False)
@click.pass_context
def main(ctx, config_path, quiet, verbose):
    """Entanglement certification from partial Pauli data and the statistics
    of measurement-sequence lengths."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = runio.load_config(config_path)
    ctx.obj["quiet"] = quiet
    ctx.obj["verbose"] = verbose


def _ensemble(kind, spin, seed):
    n_qubits = int(round(2 * float(spin)))
    return SeededEnsemble(int(seed), kind, SpinSize(max(n_qubits, 2)))


@main.command()
@click.option("--seed", default=1, type=int)
@click.option("--count", default=10, type=int)
@click.option("--ensemble", "kind", type=click.Choice(["sym", "full2q"]), default="sym")
@click.option("--spin", default=1.0, type=float, help="spin j for the symmetric ensemble")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def sample(ctx, seed, count, kind, spin, out_dir):
    """Draw ensemble states and export their Bloch tensors as CSV."""
    ens = _ensemble(kind, spin, seed)
    os.makedirs(out_dir, exist_ok=True)
    pairs = _config_pairs(command="sample", seed=seed, count=count, ensemble=kind,
                          spin=spin)
    for i in range(count):
        rho = sample_state(ens, i)
        if kind == "sym":
            tensor = tensor_from_density(rho, ens.spin)
        else:
            tensor = tensor_from_two_qubit_density(rho)
        runio.write_tensor(os.path.join(out_dir, f"state_{i:06d}.csv"), tensor,
                           pairs + [("index_in_stream", i)])
    _echo(ctx, f"wrote {count} tensors to {out_dir}")


@main.command("enumerate-sets")
@click.option("--universe", type=click.Choice(["sym", "full2q"]), default="sym")
@click.option("--k", "k_spec", default=None, help="set size, e.g. 3 (default: all)")
@click.option("--all", "do_all", is_flag=True, default=False)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
def enumerate_sets_cmd(ctx, universe, k_spec, do_all, out_path):
    """Canonical non-equivalent measurement sets with stable ids."""
    pairs = _config_pairs(command="enumerate-sets", universe=universe)
    if k_spec is None or do_all:
        rows = []
        for k in range(1, len(universe_labels(universe)) + 1):
            for idx, mset in enumerate(enumerate_sets(universe, k), start=1):
                rows.append((k, idx, "+".join(mset.members)))
        runio.write_csv(out_path, pairs, ["k", "id", "members"], rows)
    else:
        k = int(k_spec)
        rows = [(idx, "+".join(mset.members))
                for idx, mset in enumerate(enumerate_sets(universe, k), start=1)]
        runio.write_csv(out_path, pairs + [("k", k)], ["id", "members"], rows)
    _echo(ctx, f"wrote {len(rows)} sets to {out_path}")


@main.command("enumerate-paths")
@click.option("--k", default=8, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
def enumerate_paths_cmd(ctx, k, out_path):
    """Canonical ordered measurement sequences starting with xx."""
    rows = [(i + 1, ">".join(p.steps)) for i, p in enumerate(enumerate_paths(k))]
    runio.write_csv(out_path, _config_pairs(command="enumerate-paths", k=k),
                    ["path_id", "steps"], rows)
    _echo(ctx, f"wrote {len(rows)} paths to {out_path}")


@main.command()
@click.option("--tensor", "tensor_path", required=True, type=click.Path(exists=True))
@click.option("--set", "set_spec", default=None,
              help="measurement set, e.g. xx+yy (default: full tomography)")
@click.option("--kmax", default=None, type=int)
@click.option("--out", "out_path", default=None, type=click.Path())
@click.pass_context
def detect(ctx, tensor_path, set_spec, kmax, out_path):
    """Entanglement verdict for a stored tensor and a measurement set."""
    tensor = runio.read_tensor(tensor_path)
    config = tms.DetectConfig(k_max=kmax)
    if set_spec:
        labels = set_spec.split("+")
        verdict = tms.detect_set(tensor, labels, config)
    else:
        verdict = tms.detect_full_tomography(tensor, config)
    payload = {
        "outcome": verdict.outcome,
        "level": verdict.level_k,
        "margin": None if verdict.sdp_verdict is None
        else verdict.sdp_verdict.margin,
        "ranks": list(verdict.ranks) if verdict.ranks else None,
        "timing_ms": round(verdict.timing_ms, 3),
        "reason": verdict.reason,
    }
    text = json.dumps(payload, indent=2)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    click.echo(text)
    if verdict.outcome == tms.INDETERMINATE:
        sys.exit(EXIT_NUMERICAL)


def _parse_k_range(spec, upper):
    if spec is None:
        return None
    if ".." in spec:
        lo, hi = spec.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in spec.split(",")]


def _probs_rows(table):
    rows = []
    for pos, c in enumerate(table.classes):
        rows.append((c.k, c.index, c.label, table.p[pos], table.lo[pos],
                     table.hi[pos], table.n_entangled))
    return rows


def _indet_fraction(table):
    total = table.n_entangled * len(table.classes)
    return float(table.indeterminate.sum()) / total if total else 0.0


@main.command()
@click.option("--universe", type=click.Choice(["sym", "full2q"]), default="sym")
@click.option("--k", "k_spec", default=None, help="range like 1..4 (default: all)")
@click.option("--samples", default=50000, type=int)
@click.option("--seed", default=1, type=int)
@click.option("--spin", default=1.0, type=float)
@click.option("--workers", default=None, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--svg", "svg_dir", default=None, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.pass_context
def probabilities(ctx, universe, k_spec, samples, seed, spin, workers, out_path,
                  svg_dir, fmt):
    """Detection probability of every measurement-set class (Monte Carlo)."""
    workers = workers or os.cpu_count() or 1
    ks = _parse_k_range(k_spec, len(universe_labels(universe)))
    ens = _ensemble(universe, spin, seed)
    table = estimate_set_probabilities(ens, samples, universe=universe,
                                       k_values=ks, workers=workers)
    pairs = _config_pairs(command="probabilities", universe=universe, seed=seed,
                          samples=samples, k=k_spec or "all", workers=workers,
                          n_separable=table.n_separable,
                          n_entangled=table.n_entangled,
                          n_dropped=table.n_dropped)
    if fmt == "json":
        with open(out_path, "w") as fh:
            json.dump({"config": dict(pairs),
                       "rows": [dict(zip(["k", "set_id", "members", "p", "lo",
                                          "hi", "n"], row))
                                for row in _probs_rows(table)]}, fh, indent=2)
            fh.write("\n")
    else:
        runio.write_csv(out_path, pairs,
                        ["k", "set_id", "members", "p", "lo", "hi", "n"],
                        _probs_rows(table))
    if svg_dir:
        os.makedirs(svg_dir, exist_ok=True)
        for k in sorted({c.k for c in table.classes}):
            sel = [(c, pos) for pos, c in enumerate(table.classes) if c.k == k]
            svgplot.bar_chart(
                os.path.join(svg_dir, f"probabilities_k{k}.svg"),
                [float(table.p[pos]) for _, pos in sel],
                errors=[float(table.hi[pos] - table.lo[pos]) / 2 for _, pos in sel],
                labels=[c.index for c, _ in sel],
                title=f"detection probability, {k} measurements",
                xlabel="set class", ylabel="p")
    _echo(ctx, f"wrote probabilities to {out_path}")
    if _indet_fraction(table) > float(ctx.obj["config"].get("indet_cap",
                                                            DEFAULT_INDET_CAP)):
        _echo(ctx, "indeterminate fraction above the configured cap")
        sys.exit(EXIT_NUMERICAL)


def _table_from_probs_csv(path):
    header, columns, rows = runio.read_csv(path)
    universe = header.get("universe", "sym")
    classes, mo = build_class_table(universe)
    p = np.full(len(classes), np.nan)
    n = 0
    by_key = {(c.k, c.index): pos for pos, c in enumerate(classes)}
    for row in rows:
        k, sid = int(row[0]), int(row[1])
        p[by_key[(k, sid)]] = float(row[3])
        n = int(float(row[6]))
    if np.any(np.isnan(p)):
        raise click.UsageError("probability file does not cover every set class")
    return stats.SetProbabilityTable(
        universe=universe, order=2, seed=int(header.get("seed", 0)),
        n_states=n, n_separable=0, n_entangled=n, n_dropped=0,
        classes=classes, mo_closures=mo, p=p, lo=p.copy(), hi=p.copy(),
        indeterminate=np.zeros(len(classes)), verdicts=None)


@main.command()
@click.option("--probs", "probs_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--svg", "svg_dir", default=None, type=click.Path())
@click.pass_context
def paths(ctx, probs_path, out_path, svg_dir):
    """Path algebra over a probability table: q, r, stopping depth, best path."""
    table = _table_from_probs_csv(probs_path)
    all_paths = enumerate_paths(8)
    rows = []
    for i, path in enumerate(all_paths, start=1):
        ps = path_stats(path, table)
        rows.append((i, ">".join(path.steps), ps.d) + tuple(ps.p) + tuple(ps.r))
    cols = ["path_id", "steps", "d"] + [f"p{i}" for i in range(1, 9)] \
        + [f"r{i}" for i in range(1, 9)]
    runio.write_csv(out_path, _config_pairs(command="paths", probs=probs_path),
                    cols, rows)
    result = best_path(table, bootstrap=False)
    _echo(ctx, f"best path {result.best} with depth {result.d:.3f} "
               f"({len(result.exact_ties)} exact ties)")
    if svg_dir:
        os.makedirs(svg_dir, exist_ok=True)
        svgplot.histogram(os.path.join(svg_dir, "depth_histogram.svg"),
                          [r[2] for r in rows], bin_width=0.07,
                          title="expected stopping depth over paths",
                          xlabel="d", ylabel="paths")
        ps = path_stats(result.best, table)
        svgplot.line_chart(os.path.join(svg_dir, "best_path.svg"),
                           list(range(1, 9)),
                           {"p": ps.p, "q": ps.q, "r": ps.r},
                           title=f"best path {result.best}",
                           xlabel="step k", ylabel="probability")
    _echo(ctx, f"wrote path table to {out_path}")


@main.command()
@click.option("--samples", default=2000, type=int)
@click.option("--seed", default=1, type=int)
@click.option("--grid", "grid_size", default=800, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
def quantumness(ctx, samples, seed, grid_size, out_path):
    """Distance to the coherent-state hull for sampled symmetric states."""
    ens = _ensemble("sym", 1.0, seed)
    rhos = [sample_state(ens, i) for i in range(samples)]
    res = quantumness_batch(rhos, ens.spin, grid_size=grid_size)
    rows = [(i, r.q_value, int(r.converged)) for i, r in enumerate(res)]
    runio.write_csv(out_path, _config_pairs(command="quantumness", seed=seed,
                                            samples=samples, grid=grid_size),
                    ["index", "q_value", "converged"], rows)
    _echo(ctx, f"wrote {samples} quantumness values to {out_path}")
    if any(not r.converged for r in res):
        sys.exit(EXIT_NUMERICAL)


@main.command("diag-witness")
@click.option("--spin", default=2.0, type=float)
@click.option("--count", default=10000, type=int)
@click.option("--seed", default=7, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
def diag_witness_cmd(ctx, spin, count, seed, out_path):
    """Detection statistics of the diagonal-entry witnesses for integer spin."""
    j = int(spin)
    if j != spin or j < 1:
        raise click.UsageError("--spin must be a positive integer for this command")
    ens = _ensemble("sym", j, seed)
    n_qubits = 2 * j
    batch = 500
    ent_rows = []
    for start in range(0, count, batch):
        rhos = [sample_state(ens, i) for i in range(start, min(start + batch, count))]
        obs, classes, class_ids, vals = batch_diag_values(rhos, j)
        ent = np.array([npt_entangled_symmetric(r, n_qubits) for r in rhos])
        ent_rows.append(vals[ent])
    vals = np.concatenate(ent_rows, axis=0)
    obs, classes, class_ids, _ = batch_diag_values(
        [np.eye(n_qubits + 1) / (n_qubits + 1)], j)
    n_ent = vals.shape[0]
    rows = []
    any_det = np.any(vals < -1e-10, axis=1)
    frac = float(any_det.mean()) if n_ent else 0.0
    rows.append((j, "any", frac,
                 float(np.sqrt(max(frac * (1 - frac), 0.0) / max(n_ent, 1)))))
    for ci, cls in enumerate(classes):
        det = np.any(vals[:, class_ids == ci] < -1e-10, axis=1)
        f = float(det.mean()) if n_ent else 0.0
        rows.append((j, cls.label, f,
                     float(np.sqrt(max(f * (1 - f), 0.0) / max(n_ent, 1)))))
    runio.write_csv(out_path, _config_pairs(command="diag-witness", spin=j,
                                            count=count, seed=seed,
                                            n_entangled=n_ent),
                    ["j", "k_or_observable", "detected_fraction", "stderr"], rows)
    _echo(ctx, f"wrote witness statistics to {out_path}")


@main.command()
@click.option("--count", default=10000, type=int)
@click.option("--seed", default=7, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
def ppt32(ctx, count, seed, out_path):
    """Spin-3/2 pair-witness statistics from the partial-transpose matrix."""
    ens = _ensemble("sym", 1.5, seed)
    rhos = [sample_state(ens, i) for i in range(count)]
    vals = batch_pair_values(rhos)
    tmins = np.array([np.linalg.eigvalsh(t32_matrix(
        tensor_from_density(r, ens.spin)))[0] for r in rhos])
    ent = tmins < -1e-10
    table = pair_witness_stats(vals, ent)
    rows = []
    for k in range(1, 7):
        for subset, frac in sorted(table[k].items()):
            label = "&".join(PAIR_LABELS[i] for i in subset)
            rows.append((k, label, frac))
    runio.write_csv(out_path, _config_pairs(command="ppt32", count=count, seed=seed,
                                            n_entangled=int(ent.sum())),
                    ["k", "subset", "detected_fraction"], rows)
    _echo(ctx, f"wrote pair-witness statistics to {out_path}")


@main.command()
@click.option("--scale", default=1.0, type=float,
              help="sample-size multiplier for the full pipeline")
@click.option("--seed", default=42, type=int)
@click.option("--workers", default=None, type=int)
@click.option("--out", "out_root", default="reproduce-out", type=click.Path())
@click.pass_context
def reproduce(ctx, scale, seed, workers, out_root):
    """Chain the full pipeline: enumeration tables, probability tables, path
    statistics, witness curves; CSVs, SVGs and a manifest in one directory."""
    t_start = time.time()
    workers = workers or os.cpu_count() or 1
    stamp = time.strftime("%Y%m%dT%H%M%S")
    out_dir = os.path.join(out_root, f"run-{stamp}")
    os.makedirs(out_dir, exist_ok=True)
    artifacts = []

    def art(name):
        path = os.path.join(out_dir, name)
        artifacts.append(name)
        return path

    ctx.invoke(enumerate_sets_cmd, universe="sym", k_spec=None, do_all=True,
               out_path=art("sets_sym.csv"))
    ctx.invoke(enumerate_sets_cmd, universe="full2q", k_spec=None, do_all=True,
               out_path=art("sets_full2q.csv"))
    ctx.invoke(enumerate_paths_cmd, k=8, out_path=art("paths_all.csv"))

    n_sym = max(400, int(50000 * scale))
    ens = _ensemble("sym", 1.0, seed)
    table = estimate_set_probabilities(ens, n_sym, workers=workers)
    pairs = _config_pairs(command="reproduce", universe="sym", seed=seed,
                          samples=n_sym, workers=workers,
                          n_separable=table.n_separable,
                          n_entangled=table.n_entangled,
                          n_dropped=table.n_dropped)
    runio.write_csv(art("probs_sym.csv"), pairs,
                    ["k", "set_id", "members", "p", "lo", "hi", "n"],
                    _probs_rows(table))

    all_paths = enumerate_paths(8)
    rows = []
    for i, path in enumerate(all_paths, start=1):
        ps = path_stats(path, table)
        rows.append((i, ">".join(path.steps), ps.d) + tuple(ps.p) + tuple(ps.r))
    cols = ["path_id", "steps", "d"] + [f"p{i}" for i in range(1, 9)] \
        + [f"r{i}" for i in range(1, 9)]
    runio.write_csv(art("path_stats.csv"), pairs, cols, rows)
    result = best_path(table)
    with open(art("best_path.json"), "w") as fh:
        json.dump({
            "best": ">".join(result.best.steps),
            "d": result.d,
            "d_max": float(result.d_values.max()),
            "exact_ties": [">".join(p.steps) for p in result.exact_ties],
            "branch_classes": len({p.rep[:5] for p in result.exact_ties}),
        }, fh, indent=2)
        fh.write("\n")
    svgplot.histogram(art("depth_histogram.svg"), [r[2] for r in rows],
                      bin_width=0.07, title="stopping depth over paths",
                      xlabel="d", ylabel="paths")
    bps = path_stats(result.best, table)
    svgplot.line_chart(art("best_path.svg"), list(range(1, 9)),
                       {"p": bps.p, "q": bps.q, "r": bps.r},
                       title="best path probabilities", xlabel="step k",
                       ylabel="probability")
    for k in range(1, 5):
        sel = [(c, pos) for pos, c in enumerate(table.classes) if c.k == k]
        svgplot.bar_chart(art(f"probabilities_k{k}.svg"),
                          [float(table.p[pos]) for _, pos in sel],
                          errors=[float(table.hi[pos] - table.lo[pos]) / 2
                                  for _, pos in sel],
                          labels=[c.index for c, _ in sel],
                          title=f"detection probability, {k} measurements",
                          xlabel="set class", ylabel="p")

    # witness curve over integer spins
    und_rows = []
    n_wit = max(200, int(100000 * scale))
    for j in (1, 2, 3, 4, 5):
        ensj = _ensemble("sym", j, seed + j)
        batch = 1000
        n_ent = 0
        n_und = 0
        for start in range(0, n_wit, batch):
            rhos = [sample_state(ensj, i)
                    for i in range(start, min(start + batch, n_wit))]
            _, _, _, vals = batch_diag_values(rhos, j)
            ent = np.array([npt_entangled_symmetric(r, 2 * j) for r in rhos])
            det = np.any(vals < -1e-10, axis=1)
            n_ent += int(ent.sum())
            n_und += int((ent & ~det).sum())
        und_rows.append((j, n_ent, n_und, n_und / max(n_ent, 1)))
    runio.write_csv(art("diag_undetected.csv"),
                    _config_pairs(command="reproduce-witness", seed=seed,
                                  samples=n_wit),
                    ["j", "n_entangled", "n_undetected", "fraction"], und_rows)
    svgplot.line_chart(art("diag_undetected.svg"), [r[0] for r in und_rows],
                       {"undetected": [r[3] for r in und_rows]},
                       title="entangled states missed by diagonal witnesses",
                       xlabel="spin j", ylabel="fraction")

    # per-observable comparison of the diagonal witnesses, spins 2..5
    n_cmp = max(200, int(10000 * scale))
    cmp_rows = []
    for j in (2, 3, 4, 5):
        ensj = _ensemble("sym", j, seed + 50 + j)
        rhos = [sample_state(ensj, i) for i in range(n_cmp)]
        obs, classes, class_ids, vals = batch_diag_values(rhos, j)
        ent = np.array([npt_entangled_symmetric(r, 2 * j) for r in rhos])
        vals = vals[ent]
        for ci, cls in enumerate(classes):
            det = np.any(vals[:, class_ids == ci] < -1e-10, axis=1)
            cmp_rows.append((j, cls.label, float(det.mean()) if len(vals) else 0.0))
    runio.write_csv(art("diag_comparison.csv"),
                    _config_pairs(command="reproduce-diag-compare", seed=seed,
                                  samples=n_cmp),
                    ["j", "observable", "detected_fraction"], cmp_rows)
    for j in (2, 3, 4, 5):
        sel = [(lab, f) for jj, lab, f in cmp_rows if jj == j]
        svgplot.bar_chart(art(f"diag_comparison_j{j}.svg"),
                          [f for _, f in sel], labels=[lab for lab, _ in sel],
                          title=f"diagonal observables, spin {j}",
                          xlabel="observable class", ylabel="fraction")

    # spin-3/2 pair witnesses
    n32 = max(200, int(10000 * scale))
    ens32 = _ensemble("sym", 1.5, seed)
    rhos = [sample_state(ens32, i) for i in range(n32)]
    vals = batch_pair_values(rhos)
    tmins = np.array([np.linalg.eigvalsh(t32_matrix(
        tensor_from_density(r, ens32.spin)))[0] for r in rhos])
    ptable = pair_witness_stats(vals, tmins < -1e-10)
    prow = [(k, max(ptable[k].values()), min(ptable[k].values())) for k in range(1, 7)]
    runio.write_csv(art("pair_witness.csv"),
                    _config_pairs(command="reproduce-ppt32", seed=seed, samples=n32),
                    ["k", "best_fraction", "worst_fraction"], prow)
    svgplot.line_chart(art("pair_witness.svg"), [r[0] for r in prow],
                       {"best": [r[1] for r in prow], "worst": [r[2] for r in prow]},
                       title="pair-witness detection by subset size",
                       xlabel="subset size k", ylabel="fraction")

    # non-symmetric smoke fractions
    n_full = max(100, int(10000 * scale))
    sets = [("x1x2", "y1y2"),
            ("x1x2", "y1y2", "z1z2"),
            ("x1x2", "x1y2", "y1x2", "z1z2"),
            ("x1x2", "x1y2", "y1x2", "y1y2", "z1z2")]
    ensf = _ensemble("full2q", 1.0, seed)
    tablef = estimate_set_probabilities(ensf, n_full, explicit_sets=sets,
                                        workers=workers)
    runio.write_csv(art("probs_full2q.csv"),
                    _config_pairs(command="reproduce-full2q", seed=seed,
                                  samples=n_full,
                                  n_entangled=tablef.n_entangled),
                    ["k", "set_id", "members", "p", "lo", "hi", "n"],
                    _probs_rows(tablef))

    manifest = runio.write_manifest(os.path.join(out_dir, "manifest.json"),
                                    "reproduce",
                                    {"scale": scale, "seed": seed,
                                     "workers": workers},
                                    time.time() - t_start, artifacts)
    _echo(ctx, f"reproduction complete in {manifest['wall_time_s']}s -> {out_dir}")
    frac = _indet_fraction(table)
    if frac > float(ctx.obj["config"].get("indet_cap", DEFAULT_INDET_CAP)):
        sys.exit(EXIT_NUMERICAL)


if __name__ == "__main__":
    main()
