"""Monte Carlo statistics of measurement sets and ordered measurement paths.

The pipeline samples random states, keeps the entangled ones (partial
transpose is the oracle for two qubits), and runs the moment-feasibility
engine once per equivalence class of fixed-moment sets.  Measurement sets
whose effective moments are axis-relabelings of each other pose equivalent
feasibility problems (their detection probabilities coincide exactly over
the rotation-invariant ensemble), so each such group is evaluated once on
its lead representative and the verdict is shared: degeneracies like the
probability equality of the {xx,xy,yy} and {xx,xz,yy} triples hold exactly
by construction, as does the resulting degeneracy of optimal paths.

Detections inherit along closure inclusion (an infeasibility certificate for
a subset of the fixed moments remains valid when more moments are fixed), so
the per-state verdicts are monotone wherever the lead closures are nested,
and a state whose full-tomography data is not certified entangled is dropped
from the sample (tallied separately), which normalizes the full-set
detection probability to one.
"""

from __future__ import annotations

from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import sdp, tms
from .observables import (
    MeasurementPath,
    canonical_moment_class,
    canonical_set,
    effective_moments,
    enumerate_paths,
    enumerate_sets,
    sorted_members,
    universe_labels,
)
from .paulis import SIGMA, symmetric_pauli_ops
from .sampling import (
    embed_symmetric_two_qubit,
    ppt_separable_two_qubit,
    sample_state,
)

DETECTED, NOT_DETECTED, INDET = 1, 0, 2


@dataclass(frozen=True)
class ClassInfo:
    """One canonical measurement-set class and its moment-class wiring."""

    k: int
    index: int          # 1-based position within its k (enumeration order)
    members: tuple
    closure: tuple      # sorted effective moment indices
    moclass: int        # shared-evaluation group id
    leader: bool        # True for the class whose closure is evaluated

    @property
    def label(self):
        return "+".join(self.members)


def build_class_table(universe, k_values=None, explicit_sets=None):
    """Canonical set classes for the universe, grouped by moment class.

    ``explicit_sets`` restricts the table to the listed member tuples
    (canonicalized) instead of full per-k enumerations.
    """
    entries = []
    if explicit_sets is not None:
        for members in explicit_sets:
            canon_members = sorted_members(
                universe, canonical_set(frozenset(members), universe))
            k = len(canon_members)
            ref = enumerate_sets(universe, k)
            idx = next(i for i, m in enumerate(ref, start=1)
                       if m.members == canon_members)
            entries.append((k, idx, canon_members))
    else:
        if k_values is None:
            k_values = range(1, len(universe_labels(universe)) + 1)
        for k in k_values:
            for idx, mset in enumerate(enumerate_sets(universe, k), start=1):
                entries.append((k, idx, mset.members))
    mo_groups = {}
    for k, idx, members in entries:
        closure = tuple(sorted(effective_moments(members, universe)))
        canon = tuple(sorted(canonical_moment_class(frozenset(closure), universe)))
        mo_groups.setdefault(canon, []).append((k, idx, members, closure))
    infos = []
    mo_closures = []
    for mo_id, (canon, group) in enumerate(sorted(mo_groups.items())):
        group.sort(key=lambda g: (g[0], g[1]))
        lead_closure = group[0][3]
        mo_closures.append(lead_closure)
        for pos, (k, idx, members, closure) in enumerate(group):
            infos.append(ClassInfo(k, idx, members, lead_closure, mo_id, pos == 0))
    infos.sort(key=lambda c: (c.k, c.index))
    return infos, mo_closures


@dataclass
class SetProbabilityTable:
    universe: str
    order: int
    seed: int
    n_states: int
    n_separable: int
    n_entangled: int
    n_dropped: int                 # NPT states not certified at full tomography
    classes: list
    mo_closures: list
    p: np.ndarray                  # per class
    lo: np.ndarray
    hi: np.ndarray
    indeterminate: np.ndarray      # per class counts
    verdicts: np.ndarray | None    # (n_entangled, n_moclasses) int8
    state_indices: np.ndarray | None = None  # ensemble index per kept state

    def class_of(self, k, index):
        for c in self.classes:
            if c.k == k and c.index == index:
                return c
        raise KeyError((k, index))

    def class_by_members(self, members):
        members = tuple(members)
        for c in self.classes:
            if c.members == members:
                return c
        raise KeyError(members)

    def p_of_members(self, members):
        return float(self.p[self.classes.index(self.class_by_members(members))])


# --------------------------------------------------------------------------
# per-state evaluation

_MOMENT_ALPHAS = {
    "sym": tuple(sorted([a for a in tms.monomials(tms.SPHERE, 2) if sum(a) >= 1],
                        key=lambda a: (sum(a), a))),
    "full2q": tuple(sorted([a for a in tms.monomials(tms.PRODUCT, 2)
                            if sum(a[:3]) <= 1 and sum(a[3:]) <= 1 and sum(a) >= 1],
                           key=lambda a: (sum(a), a))),
}


def _alpha_to_sorted_index(alpha):
    idx = []
    for axis, count in enumerate(alpha, start=1):
        idx.extend([axis] * count)
    while len(idx) < 2:
        idx.insert(0, 0)
    return tuple(sorted(idx))


def _moment_op_stack(universe):
    alphas = _MOMENT_ALPHAS[universe]
    if universe == "sym":
        ops = symmetric_pauli_ops(2)
        return alphas, np.stack([ops[_alpha_to_sorted_index(a)] for a in alphas])
    mats = []
    for alpha in alphas:
        m1 = next((i + 1 for i in range(3) if alpha[i]), 0)
        m2 = next((i + 1 for i in range(3) if alpha[3 + i]), 0)
        mats.append(np.kron(SIGMA[m1], SIGMA[m2]))
    return alphas, np.stack(mats)


@dataclass
class _Compiled:
    """Immutable per-run evaluation plan shared by all workers."""

    universe: str
    variety: str
    order: int
    eps_feas: float
    alphas: tuple
    op_stack: np.ndarray
    mo_closures: list
    mo_cols: list            # value-column indices per moclass
    mo_order: list           # evaluation order (ascending closure size)
    subset_mask: np.ndarray  # [a, b] True when closure_a strictly inside closure_b
    full_mo: int | None      # moclass holding every moment, if present

    def template(self, mo_id):
        return tms.compile_template(self.variety, self.order,
                                    self.mo_closures[mo_id])


def _compile_run(universe, order, eps_feas, mo_closures):
    alphas, op_stack = _moment_op_stack(universe)
    col = {a: i for i, a in enumerate(alphas)}
    mo_cols = []
    for closure in mo_closures:
        tpl = tms.compile_template(tms.variety_for(universe), order, closure)
        mo_cols.append(np.array([col[a] for a in tpl.known], dtype=int))
    sets = [frozenset(c) for c in mo_closures]
    n = len(sets)
    subset_mask = np.zeros((n, n), dtype=bool)
    for a in range(n):
        for b in range(n):
            if a != b and sets[a] < sets[b]:
                subset_mask[a, b] = True
    mo_order = sorted(range(n), key=lambda m: (len(mo_closures[m]), mo_closures[m]))
    full_mo = None
    full_set = frozenset(alphas)
    for m, s in enumerate(sets):
        if s == full_set:
            full_mo = m
    return _Compiled(universe, tms.variety_for(universe), order, eps_feas,
                     alphas, op_stack, list(mo_closures), mo_cols, mo_order,
                     subset_mask, full_mo)


def _verdict_for(compiled, mo_id, moment_row):
    """Certified verdict for one moment class on one state."""
    tpl = compiled.template(mo_id)
    values = moment_row[compiled.mo_cols[mo_id]]
    resid = tpl.consistency_residual(values)
    if resid.size and np.max(np.abs(resid)) > 1e-9:
        return DETECTED
    for i, c0, cv in tpl.fixed_diag:
        if c0 + cv @ values < -tms.DIAG_TOL:
            return DETECTED
    a0 = tpl.assemble(values)
    problem = sdp.SdpProblem(tpl.n_free, [(a0, tpl.fs)])
    verdict = sdp.solve_feasibility(problem, eps_feas=compiled.eps_feas)
    if verdict.status == sdp.INFEASIBLE:
        return DETECTED
    if verdict.status == sdp.STRICTLY_FEASIBLE:
        return NOT_DETECTED
    return INDET


def _eval_states(compiled, ensemble, indices):
    """Worker body: verdict rows for a chunk of ensemble indices."""
    n_mo = len(compiled.mo_closures)
    rows = []
    keep_idx = []
    n_sep = 0
    n_drop = 0
    for idx in indices:
        rho = sample_state(ensemble, idx)
        rho4 = embed_symmetric_two_qubit(rho) if compiled.universe == "sym" else rho
        if ppt_separable_two_qubit(rho4):
            n_sep += 1
            continue
        moment_row = np.einsum("ij,oji->o", rho, compiled.op_stack).real
        row = np.full(n_mo, -1, dtype=np.int8)
        if compiled.full_mo is not None:
            v = _verdict_for(compiled, compiled.full_mo, moment_row)
            if v != DETECTED:
                n_drop += 1
                continue
            row[compiled.full_mo] = DETECTED
        detected_mask = np.zeros(n_mo, dtype=bool)
        if compiled.full_mo is not None:
            detected_mask[compiled.full_mo] = True
        for mo_id in compiled.mo_order:
            if row[mo_id] >= 0:
                continue
            if np.any(detected_mask & compiled.subset_mask[:, mo_id]):
                row[mo_id] = DETECTED
                detected_mask[mo_id] = True
                continue
            v = _verdict_for(compiled, mo_id, moment_row)
            row[mo_id] = v
            if v == DETECTED:
                detected_mask[mo_id] = True
        rows.append(row)
        keep_idx.append(idx)
    mat = np.array(rows, dtype=np.int8) if rows else np.zeros((0, n_mo), dtype=np.int8)
    return mat, keep_idx, n_sep, n_drop


def _eval_states_star(args):
    return _eval_states(*args)


def estimate_set_probabilities(ensemble, n_states, universe=None, k_values=None,
                               explicit_sets=None, order=2, eps_feas=1e-8,
                               workers=1, bootstrap_resamples=1000,
                               bootstrap_frac=0.8, keep_verdicts=True,
                               progress=None):
    """Detection probability of every canonical measurement-set class.

    States come from ``ensemble`` (indices 0..n_states-1); separable ones are
    discarded via the partial-transpose oracle and NPT states that the engine
    cannot certify at full tomography are dropped and tallied, so the full
    set detects with probability exactly one on the retained sample.
    Bootstrap bounds follow the resampling convention of taking the min/max
    of the estimate over ``bootstrap_resamples`` subsamples of fraction
    ``bootstrap_frac``.
    """
    universe = universe or ensemble.kind
    classes, mo_closures = build_class_table(universe, k_values, explicit_sets)
    compiled = _compile_run(universe, order, eps_feas, mo_closures)

    chunk = max(50, n_states // (max(workers, 1) * 8) or 1)
    tasks = [(compiled, ensemble, range(start, min(start + chunk, n_states)))
             for start in range(0, n_states, chunk)]
    if workers > 1:
        with get_context("fork").Pool(workers) as pool:
            parts = pool.map(_eval_states_star, tasks)
    else:
        parts = []
        for t_i, task in enumerate(tasks):
            parts.append(_eval_states_star(task))
            if progress:
                progress(t_i + 1, len(tasks))
    mats = [p[0] for p in parts]
    verdicts = np.concatenate(mats, axis=0) if mats else np.zeros((0, 0), np.int8)
    state_indices = np.array([i for p in parts for i in p[1]], dtype=int)
    n_sep = sum(p[2] for p in parts)
    n_drop = sum(p[3] for p in parts)
    n_ent = verdicts.shape[0]

    det = (verdicts == DETECTED)
    indet_mo = (verdicts == INDET).sum(axis=0) if n_ent else np.zeros(len(mo_closures))
    p_mo = det.mean(axis=0) if n_ent else np.zeros(len(mo_closures))

    lo_mo, hi_mo = _bootstrap_bounds(det, ensemble.seed, bootstrap_resamples,
                                     bootstrap_frac)

    idx = [c.moclass for c in classes]
    table = SetProbabilityTable(
        universe=universe, order=order, seed=ensemble.seed,
        n_states=n_states, n_separable=n_sep, n_entangled=n_ent, n_dropped=n_drop,
        classes=classes, mo_closures=list(mo_closures),
        p=p_mo[idx], lo=lo_mo[idx], hi=hi_mo[idx],
        indeterminate=indet_mo[idx],
        verdicts=verdicts if keep_verdicts else None,
        state_indices=state_indices,
    )
    return table


def _bootstrap_bounds(det, seed, resamples, frac):
    n, n_mo = det.shape if det.size else (0, 0)
    if n == 0 or resamples <= 0:
        z = np.zeros(n_mo)
        return z, z
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 0xB007))))
    m = max(1, int(round(frac * n)))
    lo = np.full(n_mo, np.inf)
    hi = np.full(n_mo, -np.inf)
    det_f = det.astype(np.float32)
    block = max(1, min(resamples, 64))
    done = 0
    while done < resamples:
        b = min(block, resamples - done)
        draws = rng.integers(0, n, size=(b, m))
        means = det_f[draws].mean(axis=1)
        lo = np.minimum(lo, means.min(axis=0))
        hi = np.maximum(hi, means.max(axis=0))
        done += b
    return lo, hi


# --------------------------------------------------------------------------
# path algebra

@dataclass
class PathStats:
    path: MeasurementPath
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    d: float
    max_inversion: float = 0.0  # largest raw estimator decrease removed


def _prefix_class_positions(table, path):
    lookup = {(c.k, tuple(c.members)): pos for pos, c in enumerate(table.classes)}
    out = []
    for k, members in enumerate(path.rep, start=1):
        key = (k, tuple(members))
        if key not in lookup:
            raise KeyError(f"prefix set {members} of length {k} missing from table")
        out.append(lookup[key])
    return out


def path_probabilities(table, path):
    return np.array([table.p[pos] for pos in _prefix_class_positions(table, path)])


def stopping_depth(p):
    """Expected number of steps  sum_k k (p_k - p_{k-1})  for p with p[-1]=1."""
    p = np.asarray(p, dtype=float)
    if abs(p[-1] - 1.0) > 1e-12:
        raise ValueError("stopping depth needs p = 1 at the last step")
    r = np.diff(np.concatenate([[0.0], p]))
    return float(np.arange(1, len(p) + 1) @ r)


def path_stats(path, table, integrity_tol=None):
    """p, q, r arrays and the expected stopping depth of one path.

    q_k = (p_k - p_{k-1}) / (1 - p_{k-1}) is the detection probability at
    step k given no detection before; r_k = p_k - p_{k-1} the probability of
    stopping exactly at step k.  Both are validated against their product
    forms to 1e-12.

    The true probabilities are non-decreasing along a path, but pooled
    estimates can dip by sampling noise where consecutive prefix classes are
    evaluated on different relabeled representatives; dips are removed by the
    running maximum and their largest size is reported.  A dip beyond
    ``integrity_tol`` (or any drop after reaching one) signals corrupted
    input and raises.
    """
    p_raw = path_probabilities(table, path)
    prev_raw = np.concatenate([[0.0], p_raw[:-1]])
    if np.any((prev_raw >= 1.0 - 1e-12) & (p_raw < 1.0 - 1e-9)):
        raise ValueError("impossible probabilities: p reached 1 then dropped")
    inversion = float(max(0.0, np.max(prev_raw - p_raw)))
    if integrity_tol is None:
        integrity_tol = max(0.05, 5.0 / np.sqrt(max(table.n_entangled, 1)))
    if inversion > integrity_tol:
        raise ValueError(
            f"path {path}: probability drop {inversion:.3f} exceeds noise tolerance")
    p = np.maximum.accumulate(p_raw)
    prev = np.concatenate([[0.0], p[:-1]])
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(prev < 1.0, (p - prev) / (1.0 - prev), 0.0)
    r = p - prev
    r_alt = q * np.concatenate([[1.0], np.cumprod(1.0 - q)[:-1]])
    if np.max(np.abs(r - r_alt)) > 1e-12:
        raise AssertionError("the two stopping-probability forms disagree")
    p_rec = 1.0 - np.cumprod(1.0 - q)
    if np.max(np.abs(p_rec - p)) > 1e-12:
        raise AssertionError("p reconstructed from q disagrees")
    d = float(np.arange(1, len(p) + 1) @ r)
    # telescoped form: d = K p_K - sum_{k<K} p_k
    d_tel = len(p) * p[-1] - float(np.sum(p[:-1]))
    if abs(d - d_tel) > 1e-12:
        raise AssertionError("telescoped depth disagrees")
    return PathStats(path, p, q, r, d, inversion)


@dataclass
class BestPathResult:
    best: MeasurementPath
    d: float
    exact_ties: list
    within_error: list
    d_values: np.ndarray
    paths: tuple
    d_lo: float
    d_hi: float


def best_path(table, k=8, bootstrap=True):
    """Shortest-expected-depth path with exact and within-error degeneracies."""
    paths = enumerate_paths(k)
    prefix_pos = np.array([_prefix_class_positions(table, p) for p in paths])
    p_env = np.maximum.accumulate(table.p[prefix_pos], axis=1)
    d_vals = k * p_env[:, -1] - p_env[:, :-1].sum(axis=1)
    order = np.argsort(d_vals, kind="stable")
    best_i = int(order[0])
    d_best = float(d_vals[best_i])
    exact = [paths[i] for i in np.nonzero(np.abs(d_vals - d_best) <= 1e-12)[0]]
    d_lo = d_hi = d_best
    within = exact
    if bootstrap and table.verdicts is not None and table.n_entangled:
        det = (table.verdicts == DETECTED).astype(np.float32)
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((table.seed, 0xD3A7))))
        mo_idx = np.array([c.moclass for c in table.classes])
        m = max(1, int(round(0.8 * det.shape[0])))
        mins = []
        best_samples = []
        for _ in range(200):
            draws = rng.integers(0, det.shape[0], size=m)
            p_mo = det[draws].mean(axis=0)
            p_cls = p_mo[mo_idx]
            pb = np.maximum.accumulate(p_cls[prefix_pos], axis=1)
            d_b = k * pb[:, -1] - pb[:, :-1].sum(axis=1)
            mins.append(d_b.min())
            best_samples.append(d_b[best_i])
        d_lo, d_hi = float(np.min(best_samples)), float(np.max(best_samples))
        spread = d_hi - d_lo
        within = [paths[i] for i in np.nonzero(d_vals <= d_best + spread)[0]]
    return BestPathResult(paths[best_i], d_best, exact, within, d_vals, paths,
                          d_lo, d_hi)


# --------------------------------------------------------------------------
# quantumness binning

@dataclass
class BinnedRates:
    edges: np.ndarray
    counts: np.ndarray
    rates: dict        # label -> per-bin detection rate
    stderr: dict
    empty_bins: np.ndarray


def quantumness_binned_rates(q_values, detected_by, bin_width=0.015):
    """Detection rate against quantumness, binned with binomial error bars.

    ``detected_by`` maps labels to boolean arrays aligned with ``q_values``.
    Monotonicity across bins is reported by the caller, not asserted here.
    """
    q_values = np.asarray(q_values, dtype=float)
    top = max(q_values.max() if q_values.size else bin_width, bin_width)
    edges = np.arange(0.0, top + bin_width, bin_width)
    if edges[-1] < top:
        edges = np.append(edges, edges[-1] + bin_width)
    which = np.clip(np.digitize(q_values, edges) - 1, 0, len(edges) - 2)
    counts = np.bincount(which, minlength=len(edges) - 1)
    rates, stderr = {}, {}
    for label, det in detected_by.items():
        det = np.asarray(det, dtype=float)
        num = np.bincount(which, weights=det, minlength=len(edges) - 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            rate = np.where(counts > 0, num / np.maximum(counts, 1), np.nan)
            err = np.where(counts > 0,
                           np.sqrt(np.maximum(rate * (1 - rate), 0.0) / np.maximum(counts, 1)),
                           np.nan)
        rates[label] = rate
        stderr[label] = err
    return BinnedRates(edges, counts, rates, stderr, counts == 0)
