"""Dense linear programs of the form  min c.v  subject to  A v >= b,  v free.

The row count m (cloud points plus grid points) dwarfs the column count k
(basis coefficients), so the solver runs the revised primal simplex method on
the dual problem

    min (-b).lam   subject to   A^T lam = c,   lam >= 0,

whose basis matrices stay k x k.  Phase 1 introduces one artificial column
per equality row; artificials left over at zero level are pinned there during
phase 2.  Pricing uses Dantzig's rule with smallest-index tie breaking.  A
stall (a long run of non-improving pivots at a degenerate vertex) triggers a
tiny lift of the basic values along the current basis, which restores strict
progress; the lift budget is finite and Bland's rule remains the last resort,
so every run is deterministic.

Outcomes carry certificates.  Optimal solutions return row duals and are
rechecked for feasibility and duality gap.  Unbounded problems return a
feasible point plus a ray along which the objective decreases forever.
Inconsistent constraints surface as solver_failure with an explanatory
message, since callers only distinguish the three listed statuses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import scipy.linalg

LpStatus = Literal["optimal", "unbounded", "solver_failure"]

_ROW_PREFIXES = {"K": "K", "grid": "G", "bound": "B"}


@dataclass(frozen=True)
class LpOptions:
    max_iters: int = 20_000
    feas_tol: float = 1e-9
    opt_tol: float = 1e-8
    stall_iters: int = 500


@dataclass(frozen=True)
class LpProblem:
    """min c.v subject to A v >= b, all v free.

    row_kinds tags each row with its provenance ("K", "grid", "bound", ...)
    for export naming and diagnostics; it has no effect on the solution.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    row_kinds: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if c.size < 1:
            raise ValueError("objective must have at least one coefficient")
        if A.ndim != 2:
            raise ValueError("constraint matrix must be two dimensional")
        if A.shape != (b.size, c.size):
            raise ValueError(
                f"shape mismatch: A is {A.shape}, expected ({b.size}, {c.size})"
            )
        for name, arr in (("c", c), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        kinds = tuple(self.row_kinds) if self.row_kinds else ("row",) * b.size
        if len(kinds) != b.size:
            raise ValueError("row_kinds length does not match the row count")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "row_kinds", kinds)

    @property
    def num_rows(self) -> int:
        return self.b.size

    @property
    def num_cols(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    v: np.ndarray | None
    objective: float
    max_infeasibility: float
    iterations: int
    ray: np.ndarray | None = None
    duals: np.ndarray | None = None
    message: str = ""


class _EngineFailure(Exception):
    pass


@dataclass
class _Outcome:
    kind: str  # "optimal" | "dual_infeasible" | "dual_unbounded"
    y: np.ndarray | None = None
    lam: np.ndarray | None = None
    basis: list[int] | None = None


class _DualSimplex:
    """Two-phase revised simplex on min f.lam s.t. sum lam_j row_j = rhs."""

    MAX_EXT_PASSES = 32
    MAX_LIFTS = 8
    LIFT_SCALE = 1e-7

    def __init__(self, rows: np.ndarray, rhs: np.ndarray, f: np.ndarray, options: LpOptions):
        self.rows = rows  # (m, k); dual column j is rows[j]
        self.rhs = rhs
        self.rhs_work = rhs.astype(float).copy()
        self.f = f
        self.opt = options
        self.m, self.k = rows.shape
        self.sigma = np.where(rhs >= 0.0, 1.0, -1.0)
        self.basis = list(range(self.m, self.m + self.k))
        self.in_basis = np.zeros(self.m, dtype=bool)
        self.iterations = 0
        self.bland = False
        self.ext_passes = 0
        self.lifts = 0
        self.lift_rng = np.random.Generator(np.random.Philox(20_240_901))

    def _column(self, j: int) -> np.ndarray:
        if j < self.m:
            return self.rows[j]
        col = np.zeros(self.k)
        col[j - self.m] = self.sigma[j - self.m]
        return col

    def _reduced_ext(self, cost_real: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Reduced costs with extended-precision accumulation, chunked."""
        out = np.empty(self.m)
        y_ext = y.astype(np.longdouble)
        for start in range(0, self.m, 8192):
            block = self.rows[start : start + 8192].astype(np.longdouble)
            f_block = cost_real[start : start + 8192].astype(np.longdouble)
            out[start : start + 8192] = (f_block - block @ y_ext).astype(float)
        return out

    def _factorize(self):
        B = np.empty((self.k, self.k))
        for pos, j in enumerate(self.basis):
            B[:, pos] = self._column(j)
        lu = scipy.linalg.lu_factor(B, check_finite=False)
        return lu, B

    @staticmethod
    def _solve_refined(lu, B: np.ndarray, rhs: np.ndarray, trans: int) -> np.ndarray:
        """LU solve plus iterative refinement with extended-precision residuals.

        Power-basis columns make simplex bases Vandermonde-like and badly
        conditioned at high degree; refinement recovers close to full double
        accuracy as long as the basis is numerically nonsingular.
        """
        x = scipy.linalg.lu_solve(lu, rhs, trans=trans, check_finite=False)
        if not np.all(np.isfinite(x)):
            raise _EngineFailure("singular basis matrix")
        mat = B.T if trans else B
        mat_ext = mat.astype(np.longdouble)
        rhs_ext = rhs.astype(np.longdouble)
        scale = float(np.max(np.abs(rhs), initial=0.0)) + 1.0
        for _ in range(3):
            residual = (rhs_ext - mat_ext @ x.astype(np.longdouble)).astype(float)
            if float(np.max(np.abs(residual), initial=0.0)) <= 1e-15 * scale:
                break
            delta = scipy.linalg.lu_solve(lu, residual, trans=trans, check_finite=False)
            if not np.all(np.isfinite(delta)):
                break
            x = x + delta
        return x

    def _run_phase(self, phase: int) -> tuple[np.ndarray, np.ndarray, float]:
        """Iterate until the phase objective is optimal; returns (x_B, y, obj)."""
        if phase == 1:
            cost_real = np.zeros(self.m)
            cost_art = 1.0
        else:
            cost_real = self.f
            cost_art = 0.0
        price_tol = 1e-9 * (1.0 + float(np.max(np.abs(cost_real), initial=0.0)))
        phase1_done = self.opt.feas_tol * (1.0 + float(np.sum(np.abs(self.rhs))))

        best_obj = math.inf
        since_improve = 0

        while True:
            lu, B = self._factorize()
            x_basic = self._solve_refined(lu, B, self.rhs_work, trans=0)
            cost_basic = np.array(
                [cost_real[j] if j < self.m else cost_art for j in self.basis]
            )
            y = self._solve_refined(lu, B, cost_basic, trans=1)

            obj = float(cost_basic @ x_basic)
            if obj < best_obj - 1e-12 * (1.0 + abs(best_obj)):
                best_obj = obj
                since_improve = 0
            else:
                since_improve += 1
                if since_improve > self.opt.stall_iters:
                    if phase == 2 and self.lifts < self.MAX_LIFTS:
                        # Degenerate vertex: lift the basic values off zero so
                        # the ratio test yields strictly positive steps again.
                        # Only the true rhs backs the returned certificates,
                        # so run() recomputes the multipliers from it.
                        self.lifts += 1
                        lift = np.zeros(self.k)
                        for pos, j in enumerate(self.basis):
                            if j < self.m:
                                lift[pos] = self.lift_rng.uniform(0.5, 1.0) * (
                                    self.LIFT_SCALE * (1.0 + abs(float(x_basic[pos])))
                                )
                        self.rhs_work = self.rhs_work + B @ lift
                        best_obj = math.inf
                        since_improve = 0
                        continue
                    self.bland = True

            if phase == 1 and obj <= phase1_done:
                return x_basic, y, obj

            reduced = cost_real - self.rows @ y
            reduced[self.in_basis] = math.inf
            entering = int(np.argmin(reduced))
            if reduced[entering] >= -price_tol:
                # Plain pricing drowns in rounding noise when |y| is large;
                # confirm optimality with extended-precision reduced costs.
                if phase == 2 and self.ext_passes < self.MAX_EXT_PASSES:
                    self.ext_passes += 1
                    reduced = self._reduced_ext(cost_real, y)
                    reduced[self.in_basis] = math.inf
                    entering = int(np.argmin(reduced))
                if reduced[entering] >= -price_tol:
                    return x_basic, y, obj
            elif self.bland:
                eligible = np.flatnonzero(reduced < -price_tol)
                entering = int(eligible[0])

            d = self._solve_refined(lu, B, self.rows[entering], trans=0)
            piv_tol = 1e-10 * max(1.0, float(np.max(np.abs(d))))

            leave_pos = -1
            if phase == 2:
                # An artificial must never leave zero; pivot it out first.
                for pos, j in enumerate(self.basis):
                    if j >= self.m and abs(d[pos]) > piv_tol:
                        if leave_pos < 0 or self.basis[pos] < self.basis[leave_pos]:
                            leave_pos = pos
            if leave_pos < 0:
                ratios = np.full(self.k, math.inf)
                positive = d > piv_tol
                ratios[positive] = np.maximum(x_basic[positive], 0.0) / d[positive]
                theta = float(ratios.min())
                if not math.isfinite(theta):
                    if phase == 1:
                        raise _EngineFailure("phase-1 subproblem is unbounded")
                    raise _UnboundedDual()
                tie = ratios <= theta * (1.0 + 1e-9) + 1e-300
                leave_pos = min(np.flatnonzero(tie), key=lambda p: self.basis[p])

            leaving = self.basis[leave_pos]
            if leaving < self.m:
                self.in_basis[leaving] = False
            self.basis[leave_pos] = entering
            self.in_basis[entering] = True

            self.iterations += 1
            if self.iterations >= self.opt.max_iters:
                raise _EngineFailure(f"iteration limit {self.opt.max_iters} reached")

    def run(self) -> _Outcome:
        x_basic, y1, w1 = self._run_phase(1)
        if w1 > self.opt.feas_tol * (1.0 + float(np.sum(np.abs(self.rhs)))):
            return _Outcome(kind="dual_infeasible", y=y1)
        try:
            x_basic, y2, _ = self._run_phase(2)
        except _UnboundedDual:
            return _Outcome(kind="dual_unbounded")
        if self.lifts:
            # Certificates must reflect the true rhs, not the lifted one.
            lu, B = self._factorize()
            x_basic = self._solve_refined(lu, B, self.rhs, trans=0)
        lam = np.zeros(self.m)
        for pos, j in enumerate(self.basis):
            if j < self.m:
                lam[j] = max(float(x_basic[pos]), 0.0)
        return _Outcome(kind="optimal", y=y2, lam=lam, basis=list(self.basis))


class _UnboundedDual(Exception):
    pass


def _deduplicate_rows(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collapse identical rows, keeping the largest right-hand side.

    Returns reduced (A, b) in first-occurrence order plus, for each kept row,
    the original index whose right-hand side it carries.
    """
    seen: dict[bytes, int] = {}
    keep_rows: list[int] = []
    best_b: list[float] = []
    best_orig: list[int] = []
    for j in range(A.shape[0]):
        key = A[j].tobytes()
        if key in seen:
            pos = seen[key]
            if b[j] > best_b[pos]:
                best_b[pos] = float(b[j])
                best_orig[pos] = j
        else:
            seen[key] = len(keep_rows)
            keep_rows.append(j)
            best_b.append(float(b[j]))
            best_orig.append(j)
    return A[keep_rows], np.asarray(best_b), np.asarray(best_orig, dtype=int)


def _gauss_solve_ext(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a dense square system entirely in extended precision.

    Used to polish near-degenerate final bases where LU in double precision
    cannot reach the feasibility contract.
    """
    k = matrix.shape[0]
    aug = np.concatenate(
        [matrix.astype(np.longdouble), rhs.reshape(-1, 1).astype(np.longdouble)],
        axis=1,
    )
    for col in range(k):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        if aug[piv, col] == 0.0:
            raise _EngineFailure("singular basis matrix")
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        factors = aug[col + 1 :, col] / aug[col, col]
        aug[col + 1 :, col:] -= factors[:, None] * aug[col, col:]
    x = aug[:, k].copy()
    for col in range(k - 1, -1, -1):
        x[col] = (x[col] - aug[col, col + 1 : k] @ x[col + 1 : k]) / aug[col, col]
    return x


def _repair_vertex(
    A2: np.ndarray, b2: np.ndarray, c: np.ndarray, basis: list[int]
) -> tuple[np.ndarray, np.ndarray]:
    """Recompute the vertex and duals of a final basis in extended precision."""
    m, k = A2.shape
    system = np.zeros((k, k))
    rhs = np.zeros(k)
    for pos, j in enumerate(basis):
        if j < m:
            system[pos] = A2[j]
            rhs[pos] = b2[j]
        else:
            system[pos, j - m] = 1.0  # leftover artificial pins v_i at zero
    v = _gauss_solve_ext(system, rhs).astype(float)
    x_basic = _gauss_solve_ext(system.T, c).astype(float)
    lam = np.zeros(m)
    for pos, j in enumerate(basis):
        if j < m:
            lam[j] = max(float(x_basic[pos]), 0.0)
    return v, lam


def _max_violation(A: np.ndarray, b: np.ndarray, v: np.ndarray) -> float:
    """max(0, max(b - A v)) with extended-precision accumulation.

    Plain float64 residuals carry noise of order eps * |v|_1, which swamps
    the feasibility tolerance when coefficients are large; this measures the
    violation of the vector actually returned to the caller.
    """
    worst = -math.inf
    v_ext = v.astype(np.longdouble)
    for start in range(0, A.shape[0], 8192):
        block = A[start : start + 8192].astype(np.longdouble)
        b_block = b[start : start + 8192].astype(np.longdouble)
        worst = max(worst, float(np.max(b_block - block @ v_ext, initial=-math.inf)))
    return max(0.0, worst)


def _check_ray(A: np.ndarray, c: np.ndarray, ray: np.ndarray, feas_tol: float) -> bool:
    scale = 1.0 + float(np.max(np.abs(A), initial=0.0))
    recession = float(np.min(A @ ray, initial=0.0))
    descent = float(c @ ray)
    return recession >= -feas_tol * scale and descent < 0.0


def solve(problem: LpProblem, options: LpOptions | None = None) -> LpSolution:
    """Solve the problem to the contract tolerances.

    Optimal solutions satisfy  max(b - A v) <= feas_tol * (1 + |b|_inf)  and a
    relative duality gap bound of opt_tol; violations are reported as
    solver_failure rather than silently returned.
    """
    opt = options or LpOptions()
    A, b, c = problem.A, problem.b, problem.c
    b_scale = 1.0 + float(np.max(np.abs(b), initial=0.0))

    if problem.num_rows == 0:
        if float(np.max(np.abs(c), initial=0.0)) == 0.0:
            return LpSolution(
                status="optimal", v=np.zeros(c.size), objective=0.0,
                max_infeasibility=0.0, iterations=0, duals=np.zeros(0),
            )
        ray = -c / float(np.max(np.abs(c)))
        return LpSolution(
            status="unbounded", v=np.zeros(c.size), objective=-math.inf,
            max_infeasibility=0.0, iterations=0, ray=ray,
            message="no constraints restrict the descent direction",
        )

    A2, b2, orig_index = _deduplicate_rows(A, b)

    try:
        engine = _DualSimplex(A2, c, -b2, opt)
        outcome = engine.run()
        iterations = engine.iterations

        if outcome.kind == "optimal":
            v = -outcome.y
            lam = outcome.lam
            objective = float(c @ v)
            max_inf = _max_violation(A, b, v)
            gap = abs(objective - float(b2 @ lam))
            if max_inf > opt.feas_tol * b_scale or gap > opt.opt_tol * (1.0 + abs(objective)):
                v, lam = _repair_vertex(A2, b2, c, outcome.basis)
                objective = float(c @ v)
                max_inf = _max_violation(A, b, v)
                gap = abs(objective - float(b2 @ lam))
            if max_inf > opt.feas_tol * b_scale:
                raise _EngineFailure(
                    f"solution violates feasibility: residual {max_inf:.3e}"
                )
            if gap > opt.opt_tol * (1.0 + abs(objective)):
                raise _EngineFailure(f"duality gap {gap:.3e} exceeds tolerance")
            duals = np.zeros(problem.num_rows)
            duals[orig_index] = lam
            return LpSolution(
                status="optimal", v=v, objective=objective,
                max_infeasibility=max_inf, iterations=iterations, duals=duals,
            )

        if outcome.kind == "dual_infeasible":
            ray = -outcome.y
            peak = float(np.max(np.abs(ray), initial=0.0))
            if peak == 0.0 or not _check_ray(A, c, ray / peak, opt.feas_tol):
                raise _EngineFailure("could not certify an unbounded direction")
            ray = ray / peak
            probe = _DualSimplex(A2, np.zeros(c.size), -b2, opt)
            probe_out = probe.run()
            iterations += probe.iterations
            if probe_out.kind == "dual_unbounded":
                raise _EngineFailure(
                    "constraints admit no feasible point (inconsistent system)"
                )
            if probe_out.kind != "optimal":
                raise _EngineFailure("feasibility probe failed to converge")
            v = -probe_out.y
            max_inf = _max_violation(A, b, v)
            if max_inf > opt.feas_tol * b_scale:
                raise _EngineFailure(
                    f"probe produced an infeasible point: residual {max_inf:.3e}"
                )
            return LpSolution(
                status="unbounded", v=v, objective=-math.inf,
                max_infeasibility=max_inf, iterations=iterations, ray=ray,
                message="objective decreases without bound along the ray",
            )

        # dual feasible but unbounded: the original constraints are inconsistent
        raise _EngineFailure(
            "constraints admit no feasible point (inconsistent system)"
        )
    except _EngineFailure as exc:
        return LpSolution(
            status="solver_failure", v=None, objective=math.nan,
            max_infeasibility=math.nan, iterations=0, message=str(exc),
        )


# ---------------------------------------------------------------------------
# MPS export
# ---------------------------------------------------------------------------


def _row_names(kinds: tuple[str, ...]) -> list[str]:
    return [
        f"{_ROW_PREFIXES.get(kind, 'R')}{j + 1:07d}" for j, kind in enumerate(kinds)
    ]


def export_mps(problem: LpProblem, destination: str | Path | None = None, name: str = "COVERLP") -> str:
    """Serialize the problem as MPS text with G rows and free variables.

    Values print with repr so a reader recovers every coefficient exactly.
    The value fields therefore run wider than the classic fixed-column MPS
    layout; any whitespace-tokenizing reader handles this.
    """
    rows = _row_names(problem.row_kinds)
    cols = [f"V{j + 1:07d}" for j in range(problem.num_cols)]

    lines = [f"NAME          {name}", "OBJSENSE", "    MIN", "ROWS", " N  OBJ"]
    lines.extend(f" G  {row}" for row in rows)

    lines.append("COLUMNS")
    for j, col in enumerate(cols):
        lines.append(f"    {col}  OBJ  {float(problem.c[j])!r}")
        for i in np.flatnonzero(problem.A[:, j]):
            lines.append(f"    {col}  {rows[i]}  {float(problem.A[i, j])!r}")

    lines.append("RHS")
    for i in np.flatnonzero(problem.b):
        lines.append(f"    RHS  {rows[i]}  {float(problem.b[i])!r}")

    lines.append("BOUNDS")
    lines.extend(f" FR BND  {col}" for col in cols)
    lines.append("ENDATA")

    text = "\n".join(lines) + "\n"
    if destination is not None:
        Path(destination).write_text(text)
    return text
