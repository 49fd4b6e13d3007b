"""Dense semidefinite feasibility for small linear-matrix-inequality systems.

The solver decides whether affine symmetric-matrix maps

    A_0 + sum_b z_b A_b  >= 0        (one or more dense blocks)

admit a strictly feasible point subject to affine equalities and per-variable
box bounds |z_b| <= 1.  It maximizes the uniform margin t with every block
shifted to ``block >= t*I`` and classifies the instance by the sign of the
optimum.

The engine is a primal-dual interior-point method in the standard
linear-matrix-inequality (dual) form ``max b.y  s.t.  F0 + sum y_i F_i >= 0``
with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.  Box
bounds travel as a vectorized diagonal block.  Certificates are re-verified
by dense eigendecompositions before a verdict is returned; anything that
cannot be certified comes back INDETERMINATE, never a silent wrong answer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

STRICTLY_FEASIBLE = "STRICTLY_FEASIBLE"
INFEASIBLE = "INFEASIBLE"
INDETERMINATE = "INDETERMINATE"

DEFAULT_EPS_FEAS = 1e-8
GAP_TOL = 1e-9
FEAS_TOL = 1e-9
MAX_ITER = 200
STEP_FRAC = 0.98
CERT_TOL = 1e-7


@dataclass
class SdpProblem:
    """Feasibility instance: PSD blocks, affine equalities, box bounds.

    ``blocks`` is a list of (A0, As) pairs with A0 of shape (n, n) and As of
    shape (num_vars, n, n).  ``equalities`` is (B, c) imposing B z = c.
    Box bounds |z_b| <= 1 are always active (valid for moment variables).
    """

    num_vars: int
    blocks: list
    equalities: tuple | None = None

    def eval_blocks(self, z):
        return [a0 + np.tensordot(z, fs, axes=(0, 0)) for a0, fs in self.blocks]


@dataclass
class SdpVerdict:
    status: str
    margin: float
    primal_point: np.ndarray | None = None
    dual_certificate: dict | None = None
    iterations: int = 0
    message: str = ""


@dataclass
class _LmiData:
    """Internal LMI-form data: max b.y with dense blocks and a diagonal block."""

    b: np.ndarray
    dense_f0: list      # per block: (n, n)
    dense_fs: list      # per block: (m, n, n)
    diag_f0: np.ndarray  # (nd,)
    diag_fs: np.ndarray  # (m, nd)


class _IpmFailure(Exception):
    pass


def _chol(mat):
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        raise _IpmFailure("loss of positive definiteness")


def _max_step(l_fac, delta):
    """sup alpha with  S + alpha*Delta >= 0,  S = L L^T."""
    li = np.linalg.inv(l_fac)
    lam = np.linalg.eigvalsh(li @ delta @ li.T)[0]
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def solve_lmi(data, max_iter=MAX_ITER, gap_tol=GAP_TOL, feas_tol=FEAS_TOL,
              callback=None):
    """Run the interior-point iteration on LMI-form data.

    Returns (y, lower_bound=b.y, upper_bound=<F0,X>, dual_blocks, diag_mult,
    iterations, converged).  ``callback(y, xs, xd, dobj, pobj, rd, rp)`` may
    return True to end the run early (used for certified early verdicts).
    """
    b = data.b
    m = b.size
    nb = len(data.dense_f0)
    nd = data.diag_f0.size
    ntot = sum(f.shape[0] for f in data.dense_f0) + nd

    xs = [np.eye(f.shape[0]) for f in data.dense_f0]
    zs = [np.eye(f.shape[0]) for f in data.dense_f0]
    xd = np.ones(nd)
    zd = np.ones(nd)
    y = np.zeros(m)

    fs_flat = [fs.reshape(m, -1) for fs in data.dense_fs]
    pobj = np.inf

    it = 0
    for it in range(1, max_iter + 1):
        rd = [data.dense_f0[k] + np.tensordot(y, data.dense_fs[k], axes=(0, 0)) - zs[k]
              for k in range(nb)]
        rdd = data.diag_f0 + data.diag_fs.T @ y - zd if nd else np.zeros(0)
        ax = np.zeros(m)
        for k in range(nb):
            ax += fs_flat[k] @ xs[k].reshape(-1)
        if nd:
            ax += data.diag_fs @ xd
        rp = -b - ax

        mu = (sum(np.sum(xs[k] * zs[k]) for k in range(nb)) + (xd @ zd if nd else 0.0)) / ntot
        dobj = b @ y
        pobj = sum(np.sum(data.dense_f0[k] * xs[k]) for k in range(nb))
        pobj += data.diag_f0 @ xd if nd else 0.0

        rd_norm = max([np.max(np.abs(r)) for r in rd] + ([np.max(np.abs(rdd))] if nd else [0.0]))
        rp_norm = np.max(np.abs(rp)) if m else 0.0
        scale = 1.0 + max(abs(dobj), abs(pobj))

        if callback is not None and callback(y, xs, xd, dobj, pobj, rd_norm, rp_norm):
            return y, dobj, pobj, xs, xd, it, True
        if rd_norm <= feas_tol * scale and rp_norm <= feas_tol * scale and \
                (mu <= gap_tol or abs(pobj - dobj) <= gap_tol * scale):
            return y, dobj, pobj, xs, xd, it, True

        try:
            # Nesterov-Todd scaling
            rs, rinvs, sigmas = [], [], []
            for k in range(nb):
                lz = _chol(zs[k])
                lx = _chol(xs[k])
                u, sv, vt = np.linalg.svd(lz.T @ lx)
                sv = np.maximum(sv, 1e-300)
                rs.append(lx @ vt.T / np.sqrt(sv))
                rinvs.append((u.T @ lz.T) / np.sqrt(sv)[:, None])
                sigmas.append(sv)
        except _IpmFailure:
            break
        wd = np.sqrt(xd / zd) if nd else np.zeros(0)
        lamd = np.sqrt(xd * zd) if nd else np.zeros(0)

        # Schur complement H_ij = sum <F_i, W F_j W> = sum <R'F_iR, R'F_jR>,
        # with the scaled coefficients formed by two large GEMMs per block
        h = np.zeros((m, m))
        gmats = []
        for k in range(nb):
            n = data.dense_f0[k].shape[0]
            fr = (data.dense_fs[k].reshape(m * n, n) @ rs[k]).reshape(m, n, n)
            g = (fr.transpose(0, 2, 1).reshape(m * n, n) @ rs[k]).reshape(m, n, n)
            gf = g.reshape(m, -1)
            gmats.append(g)
            h += gf @ gf.T
        if nd:
            h += (data.diag_fs * wd**2) @ data.diag_fs.T

        try:
            hfac = cho_factor(h + 1e-13 * (np.trace(h) / max(m, 1) + 1.0) * np.eye(m),
                              lower=True)
        except np.linalg.LinAlgError:
            break

        ghad = [2.0 / (s[:, None] + s[None, :]) for s in sigmas]

        def assemble_rhs(rhs_blocks, rhs_diag):
            q = -rp.copy()
            for k in range(nb):
                corr = rs[k] @ rhs_blocks[k] @ rs[k].T
                wrdw = rs[k] @ (rs[k].T @ rd[k] @ rs[k]) @ rs[k].T
                q += fs_flat[k] @ (corr - wrdw).reshape(-1)
            if nd:
                q += data.diag_fs @ (wd * (rhs_diag / lamd) - wd**2 * rdd)
            return q

        def directions(dy, rhs_blocks, rhs_diag):
            dzs, dxs = [], []
            for k in range(nb):
                dz = rd[k] + np.tensordot(dy, data.dense_fs[k], axes=(0, 0))
                dx = rs[k] @ rhs_blocks[k] @ rs[k].T \
                    - rs[k] @ (rs[k].T @ dz @ rs[k]) @ rs[k].T
                dzs.append(dz)
                dxs.append(0.5 * (dx + dx.T))
            if nd:
                dzd = rdd + data.diag_fs.T @ dy
                dxd = wd * (rhs_diag / lamd) - wd**2 * dzd
            else:
                dzd = dxd = np.zeros(0)
            return dxs, dzs, dxd, dzd

        def step_lengths(dxs, dzs, dxd, dzd):
            ap = ad = np.inf
            for k in range(nb):
                ap = min(ap, _max_step(_chol(xs[k]), dxs[k]))
                ad = min(ad, _max_step(_chol(zs[k]), dzs[k]))
            if nd:
                neg = dxd < 0
                if np.any(neg):
                    ap = min(ap, np.min(-xd[neg] / dxd[neg]))
                neg = dzd < 0
                if np.any(neg):
                    ad = min(ad, np.min(-zd[neg] / dzd[neg]))
            return ap, ad

        try:
            # predictor (affine scaling step)
            rhs_blocks = [ghad[k] * (-np.diag(sigmas[k] ** 2)) for k in range(nb)]
            rhs_diag = -(lamd**2) if nd else np.zeros(0)
            dy_aff = cho_solve(hfac, assemble_rhs(rhs_blocks, rhs_diag))
            dxs, dzs, dxd, dzd = directions(dy_aff, rhs_blocks, rhs_diag)
            ap, ad = step_lengths(dxs, dzs, dxd, dzd)
            ap_aff = min(1.0, STEP_FRAC * ap)
            ad_aff = min(1.0, STEP_FRAC * ad)
            gap_aff = sum(np.sum((xs[k] + ap_aff * dxs[k]) * (zs[k] + ad_aff * dzs[k]))
                          for k in range(nb))
            if nd:
                gap_aff += (xd + ap_aff * dxd) @ (zd + ad_aff * dzd)
            sigma = min(1.0, max((max(gap_aff, 0.0) / max(ntot * mu, 1e-300)) ** 3, 1e-8))

            # corrector (centering plus second-order term)
            rhs_blocks = []
            for k in range(nb):
                dxt = rinvs[k] @ dxs[k] @ rinvs[k].T
                dzt = rs[k].T @ dzs[k] @ rs[k]
                cross = 0.5 * (dxt @ dzt + dzt @ dxt)
                tgt = sigma * mu * np.eye(len(sigmas[k])) - np.diag(sigmas[k] ** 2) - cross
                rhs_blocks.append(ghad[k] * tgt)
            if nd:
                rhs_diag = sigma * mu - lamd**2 - dxd * dzd
            dy = cho_solve(hfac, assemble_rhs(rhs_blocks, rhs_diag))
            dxs, dzs, dxd, dzd = directions(dy, rhs_blocks, rhs_diag)
            ap, ad = step_lengths(dxs, dzs, dxd, dzd)
        except _IpmFailure:
            break
        ap = min(1.0, STEP_FRAC * ap)
        ad = min(1.0, STEP_FRAC * ad)

        if min(ap, ad) < 1e-11:
            break

        for k in range(nb):
            xs[k] = 0.5 * ((xs[k] + ap * dxs[k]) + (xs[k] + ap * dxs[k]).T)
            zs[k] = 0.5 * ((zs[k] + ad * dzs[k]) + (zs[k] + ad * dzs[k]).T)
        if nd:
            xd = xd + ap * dxd
            zd = zd + ad * dzd
        y = y + ad * dy

    return y, b @ y, pobj, xs, xd, it, False


def _eliminate_equalities(problem):
    """Reparametrize z = z0 + N w; (None, None) flags a contradiction.

    N is returned as None when it would be the identity (no equalities), so
    callers can skip the change of basis entirely.
    """
    m = problem.num_vars
    if problem.equalities is None:
        return np.zeros(m), None
    bmat, c = problem.equalities
    bmat = np.atleast_2d(np.asarray(bmat, dtype=float))
    c = np.asarray(c, dtype=float)
    z0, *_ = np.linalg.lstsq(bmat, c, rcond=None)
    if np.max(np.abs(bmat @ z0 - c)) > 1e-9 * (1 + np.max(np.abs(c))):
        return None, None
    u, s, vt = np.linalg.svd(bmat)
    rank = int(np.sum(s > 1e-12 * (s[0] if s.size else 1.0)))
    nmat = vt[rank:].T
    return z0, nmat


def _box_rows(problem, z0, nmat, extra_cols=0):
    """Diagonal-block rows for the box; constant rows are screened out.

    Returns (diag_f0, diag_fs, violated, live) where ``violated`` is the
    index of a box bound made negative by the equalities alone, if any, and
    ``live`` maps kept rows to original box-row indices.
    """
    m = problem.num_vars
    diag_f0 = np.concatenate([1.0 - z0, 1.0 + z0])
    if nmat is None:
        coef = np.concatenate([-np.eye(m), np.eye(m)], axis=1)
    else:
        coef = np.concatenate([-nmat.T, nmat.T], axis=1)
    if extra_cols:
        coef = np.concatenate([coef, np.zeros((extra_cols, coef.shape[1]))], axis=0)
    live = np.max(np.abs(coef), axis=0) > 1e-12
    violated = None
    for idx in np.nonzero(~live)[0]:
        if diag_f0[idx] < -1e-9:
            violated = idx
            break
    return diag_f0[live], coef[:, live], violated, np.nonzero(live)[0]


def _box_contradiction_verdict(problem, idx):
    """Certificate for a box bound forced negative by the equalities."""
    n = problem.num_vars
    sign = 1.0 if idx < n else -1.0  # violated row: 1 - z (idx<n) or 1 + z
    b_idx = idx % n
    lam = np.zeros(n)
    mu = np.zeros(n)
    if idx < n:
        lam[b_idx] = 1.0
    else:
        mu[b_idx] = 1.0
    bmat, _ = problem.equalities
    g = -lam + mu
    nu, *_ = np.linalg.lstsq(np.atleast_2d(bmat).T, g, rcond=None)
    cert = {"ys": [np.zeros_like(a0) for a0, _ in problem.blocks],
            "lam": lam, "mu": mu, "nu": nu, "kind": "box-equality-contradiction"}
    valid, value = verify_infeasible(problem, cert)
    if valid:
        return SdpVerdict(INFEASIBLE, value, dual_certificate=cert,
                          message="box bound contradicts equalities")
    return SdpVerdict(INDETERMINATE, np.nan,
                      message="box/equality contradiction could not be certified")


def build_margin_lmi(problem, z0, nmat):
    """LMI data for  max t  s.t. blocks(z0 + N w) >= t I, |z| <= 1."""
    mred = problem.num_vars if nmat is None else nmat.shape[1]
    dense_f0, dense_fs = [], []
    for a0, fs in problem.blocks:
        n = a0.shape[0]
        if nmat is None:
            f0 = a0
            fw = fs
        else:
            f0 = a0 + np.tensordot(z0, fs, axes=(0, 0))
            fw = np.tensordot(nmat, fs, axes=(0, 0)) if mred else np.zeros((0, n, n))
        ft = -np.eye(n)[None]
        dense_f0.append(0.5 * (f0 + f0.T))
        dense_fs.append(np.concatenate([fw, ft], axis=0))
    diag_f0, diag_fs, violated, live = _box_rows(problem, z0, nmat, extra_cols=1)
    b = np.zeros(mred + 1)
    b[-1] = 1.0
    return _LmiData(b, dense_f0, dense_fs, diag_f0, diag_fs), violated, live


def verify_feasible(problem, z):
    """True margin (smallest block eigenvalue) at a candidate point."""
    if np.max(np.abs(z)) > 1.0 + 1e-9:
        return -np.inf
    margin = np.inf
    for blk in problem.eval_blocks(z):
        margin = min(margin, float(np.linalg.eigvalsh(0.5 * (blk + blk.T))[0]))
    return margin


def verify_infeasible(problem, cert, tol=CERT_TOL):
    """Check a Farkas-type certificate.

    Validity of (Y_blocks, lam, mu, nu) means  Y >= 0, lam, mu >= 0,
    stationarity  <A_b, Y> - lam_b + mu_b - (B^T nu)_b = 0  for every
    variable, normalization sum tr(Y) + ... bounded away from zero, and a
    strictly negative dual value  sum <A0, Y> + sum(lam + mu) + nu . c.
    Any z in the box satisfying the equalities would then give the convex
    combination a negative smallest eigenvalue: a contradiction.
    """
    ys = cert["ys"]
    lam = np.asarray(cert["lam"], dtype=float)
    mu = np.asarray(cert["mu"], dtype=float)
    nu = cert.get("nu")
    for ymat in ys:
        if ymat.size and np.linalg.eigvalsh(0.5 * (ymat + ymat.T))[0] < -tol:
            return False, 0.0
    if np.any(lam < -tol) or np.any(mu < -tol):
        return False, 0.0
    weight = sum(float(np.trace(y)) for y in ys) + float(np.sum(lam) + np.sum(mu))
    g = np.zeros(problem.num_vars)
    for (_, fs), ymat in zip(problem.blocks, ys):
        g += fs.reshape(problem.num_vars, -1) @ ymat.reshape(-1)
    g += -lam + mu
    value = sum(float(np.sum(a0 * ymat)) for (a0, _), ymat in zip(problem.blocks, ys))
    value += float(np.sum(lam) + np.sum(mu))
    if problem.equalities is not None and nu is not None:
        bmat, c = problem.equalities
        g -= np.atleast_2d(bmat).T @ np.asarray(nu, dtype=float)
        value += float(np.asarray(nu) @ np.asarray(c, dtype=float))
        weight += float(np.sum(np.abs(nu)))
    if np.max(np.abs(g)) > tol * 10 * (1.0 + weight):
        return False, value
    return value < -tol, value


def _certificate_from_duals(problem, xs, xd, live_map):
    """Scale the primal iterate into Farkas multipliers for the original problem."""
    total = sum(float(np.trace(x)) for x in xs) + float(np.sum(xd))
    if total <= 1e-300:
        return None
    ys = [x / total for x in xs]
    lam = np.zeros(problem.num_vars)
    mu = np.zeros(problem.num_vars)
    for pos, orig_idx in enumerate(live_map):
        if orig_idx < problem.num_vars:
            lam[orig_idx] = xd[pos] / total
        else:
            mu[orig_idx - problem.num_vars] = xd[pos] / total
    nu = None
    if problem.equalities is not None:
        bmat, _ = problem.equalities
        g = np.zeros(problem.num_vars)
        for (_, fs), ymat in zip(problem.blocks, ys):
            g += fs.reshape(problem.num_vars, -1) @ ymat.reshape(-1)
        g += -lam + mu
        nu, *_ = np.linalg.lstsq(np.atleast_2d(bmat).T, g, rcond=None)
    return {"ys": ys, "lam": lam, "mu": mu, "nu": nu}


def solve_feasibility(problem, eps_feas=DEFAULT_EPS_FEAS, max_iter=MAX_ITER,
                      early_exit=True):
    """Certified strict-feasibility test of an SdpProblem.

    STRICTLY_FEASIBLE and INFEASIBLE are returned only with independently
    re-verified certificates; everything else is INDETERMINATE with a
    diagnostic message.  With ``early_exit`` the iteration stops as soon as a
    certificate at the +-eps_feas threshold verifies (margin then reflects
    the certificate, not the fully optimized t); without it the auxiliary
    objective is solved to tolerance.
    """
    z0, nmat = _eliminate_equalities(problem)
    if z0 is None:
        # Farkas vector nu with B^T nu = 0 and nu . c = -1: the rows of the
        # equality system combine to the contradiction 0 = nu . c
        bmat, c = problem.equalities
        bmat = np.atleast_2d(np.asarray(bmat, dtype=float))
        u, s, _ = np.linalg.svd(bmat, full_matrices=True)
        rank = int(np.sum(s > 1e-12 * (s[0] if s.size else 1.0)))
        null = u[:, rank:]
        proj = null @ (null.T @ np.asarray(c, dtype=float))
        nu = -proj / (proj @ c)
        cert = {"ys": [np.zeros_like(a0) for a0, _ in problem.blocks],
                "lam": np.zeros(problem.num_vars),
                "mu": np.zeros(problem.num_vars),
                "nu": nu, "kind": "equality-contradiction"}
        valid, value = verify_infeasible(problem, cert)
        if valid:
            return SdpVerdict(INFEASIBLE, value, dual_certificate=cert,
                              message="inconsistent equality constraints")
        return SdpVerdict(INDETERMINATE, np.nan,
                          message="equality contradiction could not be certified")

    data, violated, live_map = build_margin_lmi(problem, z0, nmat)
    if violated is not None:
        return _box_contradiction_verdict(problem, violated)

    def to_z(y):
        w = y[:-1]
        return np.clip(z0 + (w if nmat is None else nmat @ w), -1.0, 1.0)

    state = {}

    def callback(y, xs, xd, dobj, pobj, rd_norm, rp_norm):
        if not early_exit:
            return False
        if rd_norm < 1e-10 and dobj > 2.0 * eps_feas:
            z = to_z(y)
            margin = verify_feasible(problem, z)
            if margin > eps_feas:
                state["verdict"] = SdpVerdict(STRICTLY_FEASIBLE, margin, primal_point=z)
                return True
        if rp_norm < 1e-10 and pobj < -2.0 * eps_feas:
            cert = _certificate_from_duals(problem, xs, xd, live_map)
            if cert is not None:
                valid, value = verify_infeasible(problem, cert)
                if valid and value < -eps_feas:
                    state["verdict"] = SdpVerdict(INFEASIBLE, value, dual_certificate=cert)
                    return True
        return False

    try:
        y, lb, ub, xs, xd, iters, ok = solve_lmi(data, max_iter=max_iter,
                                                 callback=callback)
    except _IpmFailure as exc:
        return SdpVerdict(INDETERMINATE, np.nan, message=f"solver breakdown: {exc}")

    if "verdict" in state:
        verdict = state["verdict"]
        verdict.iterations = iters
        return verdict

    z = to_z(y)
    margin = verify_feasible(problem, z)
    if margin > eps_feas:
        return SdpVerdict(STRICTLY_FEASIBLE, margin, primal_point=z, iterations=iters)

    cert = _certificate_from_duals(problem, xs, xd, live_map)
    if cert is not None:
        valid, value = verify_infeasible(problem, cert)
        if valid and value < -eps_feas:
            return SdpVerdict(INFEASIBLE, value, dual_certificate=cert, iterations=iters)

    # boundary case: report the best point found so the caller can classify it
    msg = "margin within +-eps_feas" if ok else "iteration limit reached"
    return SdpVerdict(INDETERMINATE, margin, primal_point=z, iterations=iters,
                      message=msg)


def minimize_linear(problem, r_vec, max_iter=MAX_ITER):
    """min r.z over the feasible set (blocks PSD, equalities, box).

    Used for boundary-seeking solves (rank minimization heuristics); the
    instance is assumed strictly feasible.  Returns (z, converged).
    """
    z0, nmat = _eliminate_equalities(problem)
    if z0 is None:
        raise ValueError("inconsistent equalities")
    dense_f0, dense_fs = [], []
    for a0, fs in problem.blocks:
        if nmat is None:
            f0, fw = a0, fs
        else:
            f0 = a0 + np.tensordot(z0, fs, axes=(0, 0))
            fw = np.tensordot(nmat, fs, axes=(0, 0))
        dense_f0.append(0.5 * (f0 + f0.T))
        dense_fs.append(fw)
    diag_f0, diag_fs, violated, _ = _box_rows(problem, z0, nmat)
    if violated is not None:
        raise ValueError("box bound contradicts equalities")
    r_vec = np.asarray(r_vec, dtype=float)
    b = -(r_vec if nmat is None else nmat.T @ r_vec)
    data = _LmiData(b, dense_f0, dense_fs, diag_f0, diag_fs)
    try:
        y, lb, ub, xs, xd, iters, ok = solve_lmi(data, max_iter=max_iter,
                                                 gap_tol=1e-10)
    except _IpmFailure:
        return None, False
    return z0 + (y if nmat is None else nmat @ y), ok


# ---------------------------------------------------------------------------
# plain-text dump/restore (SDPA-sparse-like layout) for external cross-checks

def dump_problem(problem, path):
    """Write block sizes then ``matrix block i j value`` rows.

    Matrix 0 holds the constant parts A0; matrix b >= 1 the coefficients of
    variable z_{b-1}.  Equalities are appended as commented rows.
    """
    lines = [f"nvars {problem.num_vars}", f"nblocks {len(problem.blocks)}"]
    lines.append("sizes " + " ".join(str(a0.shape[0]) for a0, _ in problem.blocks))
    for bi, (a0, fs) in enumerate(problem.blocks):
        n = a0.shape[0]
        for mat_id in range(problem.num_vars + 1):
            mat = a0 if mat_id == 0 else fs[mat_id - 1]
            for i in range(n):
                for j in range(i, n):
                    if mat[i, j] != 0.0:
                        lines.append(f"{mat_id} {bi} {i} {j} {mat[i, j]:.17g}")
    if problem.equalities is not None:
        bmat, c = problem.equalities
        bmat = np.atleast_2d(bmat)
        for r in range(bmat.shape[0]):
            coefs = " ".join(f"{v:.17g}" for v in bmat[r])
            lines.append(f"# eq {coefs} = {c[r]:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_problem(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    nvars = int(lines[0].split()[1])
    sizes = [int(s) for s in lines[2].split()[1:]]
    blocks = [(np.zeros((n, n)), np.zeros((nvars, n, n))) for n in sizes]
    eqs = []
    for ln in lines[3:]:
        if ln.startswith("# eq"):
            body = ln[4:].split("=")
            eqs.append(([float(v) for v in body[0].split()], float(body[1])))
            continue
        mat_id, bi, i, j, val = ln.split()
        mat_id, bi, i, j = int(mat_id), int(bi), int(i), int(j)
        a0, fs = blocks[bi]
        tgt = a0 if mat_id == 0 else fs[mat_id - 1]
        tgt[i, j] = float(val)
        tgt[j, i] = float(val)
    equalities = None
    if eqs:
        equalities = (np.array([e[0] for e in eqs]), np.array([e[1] for e in eqs]))
    return SdpProblem(nvars, blocks, equalities)
