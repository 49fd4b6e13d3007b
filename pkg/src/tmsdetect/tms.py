"""Truncated-moment-sequence feasibility engine.

Partial moment data on the unit sphere (symmetric states) or on a product of
two spheres (generic two-qubit states) is compiled into a semidefinite
feasibility instance: does a probability measure on the variety reproduce
the known moments?  Infeasibility certifies entanglement; a feasible point
whose moment matrix satisfies the rank (flat-extension) condition certifies
separability.

The sphere equation x^2 + y^2 + z^2 = 1 is imposed exactly by linear
substitution: every monomial is rewritten in the quotient basis with
x-exponent at most one, which subsumes the localizing-matrix condition for
the equality constraint.  The solver's PSD block is the moment matrix
restricted to the quotient basis rows; the full-size matrix (10x10 at order
2, 28x28 in the product case) is reconstructed from any solution for rank
checks, since its remaining rows are exact linear combinations of the
quotient rows.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from math import ceil, comb

import numpy as np

from . import sdp
from .sdp import INDETERMINATE, INFEASIBLE, STRICTLY_FEASIBLE, SdpProblem

ENTANGLED_CERTIFIED = "ENTANGLED_CERTIFIED"
SEPARABLE_FLAT = "SEPARABLE_FLAT"
FEASIBLE_NOT_FLAT = "FEASIBLE_NOT_FLAT"
# INDETERMINATE is shared with the sdp module

SPHERE = "sphere3"
PRODUCT = "sphere3xsphere3"

DIAG_TOL = 1e-10
_FLAT_SEED = 0x5EED


def variety_nvars(variety):
    if variety == SPHERE:
        return 3
    if variety == PRODUCT:
        return 6
    raise ValueError(f"unknown variety {variety!r}")


def variety_for(kind):
    return SPHERE if kind == "sym" else PRODUCT


@lru_cache(maxsize=None)
def monomials(variety, max_deg):
    """All exponent tuples with total degree <= max_deg, graded-lex order."""
    nv = variety_nvars(variety)
    out = []
    for deg in range(max_deg + 1):
        for combo in combinations_with_replacement(range(nv), deg):
            alpha = [0] * nv
            for i in combo:
                alpha[i] += 1
            out.append(tuple(alpha))
    seen = sorted(set(out), key=lambda a: (sum(a), a))
    return tuple(seen)


def _is_reduced(variety, alpha):
    if variety == SPHERE:
        return alpha[0] <= 1
    return alpha[0] <= 1 and alpha[3] <= 1


@lru_cache(maxsize=None)
def reduce_moment(variety, alpha):
    """Quotient-basis expansion of y_alpha as {reduced alpha: coefficient}."""
    if _is_reduced(variety, alpha):
        return {alpha: 1.0}
    alpha = tuple(alpha)
    if alpha[0] >= 2:
        base = 0
    else:
        base = 3
    e = [0] * len(alpha)
    down = list(alpha)
    down[base] -= 2
    down = tuple(down)
    terms = {}
    for src, sign in ((down, 1.0),):
        for red, c in reduce_moment(variety, src).items():
            terms[red] = terms.get(red, 0.0) + sign * c
    for off in (1, 2):
        up = list(down)
        up[base + off] += 2
        for red, c in reduce_moment(variety, tuple(up)).items():
            terms[red] = terms.get(red, 0.0) - c
    return {k: v for k, v in terms.items() if v != 0.0}


@dataclass(frozen=True)
class MomentMatrixSpec:
    """Shape of the order-k moment matrix before quotient reduction."""

    variety: str
    order: int

    @property
    def basis(self):
        return monomials(self.variety, self.order)

    @property
    def dimension(self):
        return len(self.basis)

    @property
    def n_moments(self):
        """Distinct moments y_alpha with |alpha| <= 2k."""
        return len(monomials(self.variety, 2 * self.order))

    def cell_index(self, i, j):
        b = self.basis
        return tuple(x + y for x, y in zip(b[i], b[j]))


@dataclass
class InstanceTemplate:
    """Compiled structure of a feasibility instance for one known-index set.

    Only the numeric values of the known moments vary from state to state;
    everything else (quotient reduction, elimination of determined moments,
    block coefficient matrices) is precomputed here.
    """

    variety: str
    order: int
    known: tuple            # sorted known moment indices; value vector order
    ids: tuple              # reduced moment indices (y_0 excluded)
    free_ids: tuple
    a0_const: np.ndarray    # (dim, dim)
    a0_values: np.ndarray   # (n_known, dim, dim)
    fs: np.ndarray          # (n_free, dim, dim)
    det_rows: dict          # id -> (const, value-coefs, free-coefs)
    consistency: tuple      # (matrix over values, consts); rows must vanish
    basis: tuple            # quotient monomial basis of the PSD block
    fixed_diag: list        # structurally determined diagonal cells

    @property
    def n_free(self):
        return len(self.free_ids)

    def assemble(self, values):
        values = np.asarray(values, dtype=float)
        a0 = self.a0_const + np.tensordot(values, self.a0_values, axes=(0, 0))
        return a0

    def consistency_residual(self, values):
        mat, const = self.consistency
        if mat.shape[0] == 0:
            return np.zeros(0)
        return mat @ np.asarray(values, dtype=float) + const

    def moment_values(self, values, z):
        """Complete reduced-moment assignment id -> value at a solution z."""
        values = np.asarray(values, dtype=float)
        out = {}
        for idx, fid in enumerate(self.free_ids):
            out[fid] = float(z[idx])
        for mid, (c0, cv, cf) in self.det_rows.items():
            out[mid] = float(c0 + cv @ values + (cf @ z if len(cf) else 0.0))
        return out

    def evaluate_moment(self, alpha, values, moment_map):
        total = 0.0
        for red, c in reduce_moment(self.variety, alpha).items():
            if sum(red) == 0:
                total += c
            else:
                total += c * moment_map[red]
        return total


@lru_cache(maxsize=None)
def _compile_template(variety, order, known):
    """Build the InstanceTemplate for (variety, order, sorted known indices)."""
    nv = variety_nvars(variety)
    zero = (0,) * nv
    basis = tuple(m for m in monomials(variety, order) if _is_reduced(variety, m))
    dim = len(basis)

    # reduced moment ids touched by matrix cells or known rows
    ids = set()
    cells = {}
    for i in range(dim):
        for j in range(i, dim):
            expr = reduce_moment(variety, tuple(a + b for a, b in zip(basis[i], basis[j])))
            cells[(i, j)] = expr
            ids.update(k for k in expr if k != zero)
    known_rows = []
    for alpha in known:
        expr = reduce_moment(variety, alpha)
        ids.update(k for k in expr if k != zero)
        known_rows.append(expr)
    ids = tuple(sorted(ids, key=lambda a: (sum(a), a)))
    col = {mid: i for i, mid in enumerate(ids)}
    nid = len(ids)
    nval = len(known)

    # elimination system K Y = R V + r0 from the known moments
    kmat = np.zeros((nval, nid))
    rmat = np.zeros((nval, nval))
    r0 = np.zeros(nval)
    for row, expr in enumerate(known_rows):
        rmat[row, row] = 1.0
        for mid, c in expr.items():
            if mid == zero:
                r0[row] -= c
            else:
                kmat[row, col[mid]] += c
    # Gauss-Jordan, eliminating the highest-degree moments first
    order_cols = sorted(range(nid), key=lambda i: (sum(ids[i]), ids[i]), reverse=True)
    piv_of_row = {}
    used = set()
    for r in range(nval):
        piv = None
        for c in order_cols:
            if c not in used and abs(kmat[r, c]) > 1e-9:
                piv = c
                break
        if piv is None:
            continue
        used.add(piv)
        piv_of_row[r] = piv
        scale = kmat[r, piv]
        kmat[r] /= scale
        rmat[r] /= scale
        r0[r] /= scale
        for r2 in range(nval):
            if r2 != r and abs(kmat[r2, piv]) > 1e-12:
                f = kmat[r2, piv]
                kmat[r2] -= f * kmat[r]
                rmat[r2] -= f * rmat[r]
                r0[r2] -= f * r0[r]

    free_cols = [c for c in range(nid) if c not in used]
    free_ids = tuple(ids[c] for c in free_cols)
    fcol = {c: i for i, c in enumerate(free_cols)}

    det_rows = {}
    for r, piv in piv_of_row.items():
        cf = np.array([-kmat[r, c] for c in free_cols])
        det_rows[ids[piv]] = (r0[r], rmat[r].copy(), cf)

    cons_rows = []
    cons_consts = []
    for r in range(nval):
        if r not in piv_of_row:
            if np.max(np.abs(rmat[r])) > 1e-12 or abs(r0[r]) > 1e-12:
                cons_rows.append(rmat[r].copy())
                cons_consts.append(-r0[r])
    consistency = (
        np.array(cons_rows) if cons_rows else np.zeros((0, nval)),
        -np.array(cons_consts) if cons_consts else np.zeros(0),
    )

    # assemble block coefficients
    nfree = len(free_cols)
    a0c = np.zeros((dim, dim))
    a0v = np.zeros((nval, dim, dim))
    fs = np.zeros((nfree, dim, dim))
    fixed_diag = []
    for (i, j), expr in cells.items():
        c0 = 0.0
        cv = np.zeros(nval)
        cf = np.zeros(nfree)
        for mid, c in expr.items():
            if mid == zero:
                c0 += c
                continue
            cidx = col[mid]
            if cidx in fcol:
                cf[fcol[cidx]] += c
            else:
                d0, dv, df = det_rows[mid]
                c0 += c * d0
                cv += c * dv
                if len(df):
                    cf += c * np.array([df[k] for k in range(nfree)])
        a0c[i, j] = a0c[j, i] = c0
        for vpos in range(nval):
            a0v[vpos, i, j] = a0v[vpos, j, i] = cv[vpos]
        for fpos in range(nfree):
            fs[fpos, i, j] = fs[fpos, j, i] = cf[fpos]
        if i == j and not np.any(np.abs(cf) > 1e-12):
            fixed_diag.append((i, c0, cv.copy()))

    return InstanceTemplate(
        variety=variety,
        order=order,
        known=known,
        ids=ids,
        free_ids=free_ids,
        a0_const=a0c,
        a0_values=a0v,
        fs=fs,
        det_rows=det_rows,
        consistency=consistency,
        basis=basis,
        fixed_diag=fixed_diag,
    )


def compile_template(variety, order, known_indices):
    return _compile_template(variety, order, tuple(sorted(known_indices)))


def data_degree(known_indices):
    return max((sum(a) for a in known_indices), default=0)


def min_order(known_indices):
    return max(2, ceil(data_degree(known_indices) / 2))


def build_instance(moment_data, order, variety=SPHERE):
    """SdpProblem for the order-k relaxation of partial moment data.

    ``moment_data`` maps exponent tuples to values (the zero index may be
    included with value 1).  Raises on a linear contradiction among the
    known moments; the caller treats that as certified infeasibility.
    """
    nv = variety_nvars(variety)
    zero = (0,) * nv
    data = {tuple(a): float(v) for a, v in moment_data.items() if tuple(a) != zero}
    if order < min_order(data):
        raise ValueError(f"order {order} below minimum {min_order(data)}")
    tpl = compile_template(variety, order, data.keys())
    values = np.array([data[a] for a in tpl.known])
    resid = tpl.consistency_residual(values)
    if resid.size and np.max(np.abs(resid)) > 1e-9:
        raise LinearContradiction(float(np.max(np.abs(resid))))
    a0 = tpl.assemble(values)
    problem = SdpProblem(tpl.n_free, [(a0, tpl.fs)])
    return problem, tpl, values


class LinearContradiction(Exception):
    """Known moments are mutually inconsistent under the variety relations."""

    def __init__(self, magnitude):
        super().__init__(f"moment data inconsistent (residual {magnitude:.3e})")
        self.magnitude = magnitude


@dataclass
class DetectConfig:
    k_max: int | None = None      # default: 3 on the sphere, 2 on the product
    eps_feas: float = 1e-8
    eps_rank: float = 1e-6
    flat_search: bool = True      # seek a boundary point for the rank test
    early_exit: bool = True
    binary: bool = False          # detection-only mode used by bulk statistics

    def resolved_k_max(self, variety):
        if self.k_max is not None:
            return self.k_max
        return 3 if variety == SPHERE else 2


@dataclass
class TmsVerdict:
    outcome: str
    level_k: int
    sdp_verdict: sdp.SdpVerdict | None = None
    ranks: tuple | None = None
    reason: str = ""
    timing_ms: float = 0.0

    @property
    def detected(self):
        return self.outcome == ENTANGLED_CERTIFIED


def _fixed_diag_certificate(problem, tpl, values, eps=DIAG_TOL):
    """Trivial infeasibility certificate from a forced-negative diagonal cell."""
    a0 = problem.blocks[0][0]
    for i, c0, cv in tpl.fixed_diag:
        val = c0 + cv @ values
        if val < -eps:
            y = np.zeros_like(a0)
            y[i, i] = 1.0
            cert = {"ys": [y], "lam": np.zeros(problem.num_vars),
                    "mu": np.zeros(problem.num_vars), "nu": None}
            valid, value = sdp.verify_infeasible(problem, cert)
            if valid:
                return sdp.SdpVerdict(INFEASIBLE, value, dual_certificate=cert,
                                      message="forced negative diagonal")
    return None


def _rank_pair(matrices, eps_rank):
    ranks = []
    for mat in matrices:
        sv = np.linalg.svd(mat, compute_uv=False)
        tol = eps_rank * (sv[0] if sv.size and sv[0] > 0 else 1.0)
        ranks.append(int(np.sum(sv > tol)))
    return tuple(ranks)


def _moment_matrix_from_map(variety, order, lookup):
    basis = monomials(variety, order)
    n = len(basis)
    mat = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            mat[i, j] = mat[j, i] = lookup(tuple(a + b for a, b in zip(basis[i], basis[j])))
    return mat


def _ranks(tpl, values, z, eps_rank):
    """(rank M_{k-1}, rank M_k) of the full moment matrices at a solution."""
    mm = tpl.moment_values(values, z)
    mats = [
        _moment_matrix_from_map(tpl.variety, order,
                                lambda a: tpl.evaluate_moment(a, values, mm))
        for order in (tpl.order - 1, tpl.order)
    ]
    return _rank_pair(mats, eps_rank)


def _atomic_measure(m_vec, c_mat, tol=1e-10):
    """Atoms on the unit sphere with prescribed first/second moments.

    Requires tr C = 1 and C - m m^T >= 0.  Each principal direction u of the
    covariance gets a pair of atoms m + t u with t the two roots of
    |m + t u| = 1; the root structure makes the weights non-negative and the
    total mass exactly one.  Returns (weights, points) or None.
    """
    m_vec = np.asarray(m_vec, dtype=float)
    nm2 = float(m_vec @ m_vec)
    if nm2 > 1.0 + 1e-8:
        return None
    if nm2 >= 1.0 - tol:
        return np.array([1.0]), m_vec[None, :] / np.sqrt(nm2)
    d_mat = c_mat - np.outer(m_vec, m_vec)
    lam, u_mat = np.linalg.eigh(0.5 * (d_mat + d_mat.T))
    if lam[0] < -1e-7:
        return None
    lam = np.maximum(lam, 0.0)
    total = lam.sum()
    if total <= tol:
        return None
    lam *= (1.0 - nm2) / total  # restore tr D = 1 - |m|^2 after clipping
    weights, points = [], []
    for lam_i, u in zip(lam, u_mat.T):
        if lam_i <= tol:
            continue
        mu = float(m_vec @ u)
        root = np.sqrt(mu * mu + 1.0 - nm2)
        t_plus, t_minus = -mu + root, -mu - root
        w_plus = lam_i / (t_plus * (t_plus - t_minus))
        w_minus = -lam_i / (t_minus * (t_plus - t_minus))
        weights += [w_plus, w_minus]
        points += [m_vec + t_plus * u, m_vec + t_minus * u]
    return np.array(weights), np.array(points)


def _measure_moment_lookup(weights, points):
    def lookup(alpha):
        mono = np.prod(points ** np.asarray(alpha, dtype=float), axis=1)
        return float(weights @ mono)
    return lookup


def _flat_via_measure(tpl, values, z_point, data, eps_rank):
    """Sphere data of degree <= 2: build an explicit representing measure.

    The solved point completes the first/second moments; an atomic measure
    with those moments always exists when the completion is PSD.  Its moment
    matrices give an honest rank pair at any order (flat once the atom count
    saturates).  Returns (ranks, lookup) or None.
    """
    mm = tpl.moment_values(values, z_point)
    m_vec = np.array([tpl.evaluate_moment(e, values, mm)
                      for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))])
    c_mat = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            alpha = [0, 0, 0]
            alpha[i] += 1
            alpha[j] += 1
            c_mat[i, j] = c_mat[j, i] = tpl.evaluate_moment(tuple(alpha), values, mm)
    atoms = _atomic_measure(m_vec, c_mat)
    if atoms is None:
        return None
    weights, points = atoms
    norms = np.linalg.norm(points, axis=1)
    points = points / norms[:, None]
    lookup = _measure_moment_lookup(weights, points)
    for alpha, val in data.items():
        if abs(lookup(alpha) - val) > 1e-6:
            return None
    mats = [_moment_matrix_from_map(tpl.variety, order, lookup)
            for order in (tpl.order - 1, tpl.order)]
    return _rank_pair(mats, eps_rank), lookup


def _flat_via_boundary(problem, tpl, values, rounds=2):
    """Reweighted-trace boundary search; returns the best feasible point."""
    dim = len(tpl.basis)
    r_mat = np.eye(dim)
    best = None
    for _ in range(rounds):
        r_vec = np.tensordot(tpl.fs, r_mat, axes=([1, 2], [0, 1]))
        z, ok = sdp.minimize_linear(problem, r_vec)
        if z is None:
            break
        z = np.clip(z, -1.0, 1.0)
        blk = problem.eval_blocks(z)[0]
        w, u = np.linalg.eigh(blk)
        if w[0] < -1e-7:
            break
        best = z
        delta = 1e-4 * max(w[-1], 1e-8)
        r_mat = (u / (w + delta)) @ u.T
        r_mat = r_mat / np.trace(r_mat) * dim
    return best


def detect(moment_data, config=None, variety=SPHERE):
    """Run the extension hierarchy on partial moment data.

    Outcomes: ENTANGLED_CERTIFIED (relaxation infeasible at some order, with
    a verified certificate), SEPARABLE_FLAT (feasible point whose moment
    matrix rank matches the previous order), FEASIBLE_NOT_FLAT (feasible at
    every tried order, no flat point found), INDETERMINATE (numerical).
    """
    config = config or DetectConfig()
    t0 = time.perf_counter()
    nv = variety_nvars(variety)
    zero = (0,) * nv
    data = {tuple(a): float(v) for a, v in moment_data.items() if tuple(a) != zero}
    k_min = min_order(data)
    k_max = max(config.resolved_k_max(variety), k_min)

    last = None
    ranks = None
    for k in range(k_min, k_max + 1):
        try:
            problem, tpl, values = build_instance(data, k, variety)
        except LinearContradiction as exc:
            return TmsVerdict(ENTANGLED_CERTIFIED, k, None, None,
                              reason=f"linear contradiction: {exc}",
                              timing_ms=(time.perf_counter() - t0) * 1e3)
        fast = _fixed_diag_certificate(problem, tpl, values)
        if fast is not None:
            return TmsVerdict(ENTANGLED_CERTIFIED, k, fast,
                              reason="forced negative diagonal",
                              timing_ms=(time.perf_counter() - t0) * 1e3)
        verdict = sdp.solve_feasibility(problem, eps_feas=config.eps_feas,
                                        early_exit=config.early_exit)
        last = verdict
        if verdict.status == INFEASIBLE:
            return TmsVerdict(ENTANGLED_CERTIFIED, k, verdict,
                              reason="certified infeasible",
                              timing_ms=(time.perf_counter() - t0) * 1e3)
        strict = verdict.status == STRICTLY_FEASIBLE
        weak = (not strict and verdict.primal_point is not None
                and verdict.margin >= -1e-9)
        if config.binary:
            outcome = FEASIBLE_NOT_FLAT if strict else INDETERMINATE
            reason = "feasible (detection-only mode)" if strict else verdict.message
            return TmsVerdict(outcome, k, verdict, reason=reason,
                              timing_ms=(time.perf_counter() - t0) * 1e3)

        if config.flat_search and variety == SPHERE and data_degree(data) <= 2 \
                and verdict.primal_point is not None:
            found = _flat_via_measure(tpl, values, verdict.primal_point, data,
                                      config.eps_rank)
            if found is not None:
                lookup = found[1]
                for k_flat in range(k, k_max + 1):
                    mats = [_moment_matrix_from_map(variety, o, lookup)
                            for o in (k_flat - 1, k_flat)]
                    ranks = _rank_pair(mats, config.eps_rank)
                    if ranks[1] == ranks[0]:
                        return TmsVerdict(SEPARABLE_FLAT, k_flat, verdict, ranks,
                                          reason="flat extension from explicit measure",
                                          timing_ms=(time.perf_counter() - t0) * 1e3)

        if not (strict or weak):
            return TmsVerdict(INDETERMINATE, k, verdict,
                              reason=verdict.message,
                              timing_ms=(time.perf_counter() - t0) * 1e3)
        z_star = verdict.primal_point
        if config.flat_search and strict and tpl.n_free:
            z_b = _flat_via_boundary(problem, tpl, values)
            if z_b is not None:
                z_star = z_b
        ranks = _ranks(tpl, values, z_star, config.eps_rank)
        if ranks[1] == ranks[0]:
            return TmsVerdict(SEPARABLE_FLAT, k, verdict, ranks,
                              reason="flat extension found",
                              timing_ms=(time.perf_counter() - t0) * 1e3)
        if weak:
            return TmsVerdict(INDETERMINATE, k, verdict, ranks,
                              reason="boundary feasibility, flatness unresolved",
                              timing_ms=(time.perf_counter() - t0) * 1e3)
    return TmsVerdict(FEASIBLE_NOT_FLAT, k_max, last, ranks,
                      reason="feasible at every order tried, never flat",
                      timing_ms=(time.perf_counter() - t0) * 1e3)


def detect_set(tensor, labels, config=None):
    """Verdict for a measurement set on a state given as a Bloch tensor."""
    from .observables import effective_moments

    universe = "sym" if tensor.kind == "sym" else "full2q"
    eff = effective_moments(labels, universe)
    all_moments = tensor.moments()
    data = {a: all_moments[a] for a in eff}
    return detect(data, config, variety_for(tensor.kind))


def detect_full_tomography(tensor, config=None):
    """Verdict with every moment of the tensor fixed."""
    nv = 3 if tensor.kind == "sym" else 6
    zero = (0,) * nv
    data = {a: v for a, v in tensor.moments().items() if a != zero}
    return detect(data, config, variety_for(tensor.kind))
