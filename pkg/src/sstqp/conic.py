"""Standard-form conic programming over nonnegative and PSD cones.

A problem is  min c.z  s.t.  A z = b,  z in K,  where K is an ordered
product of NonNeg and Psd blocks laid out contiguously in the coordinate
vector (a Psd block of order d occupies d(d+1)/2 svec coordinates).

The native solver is a first-order operator-splitting (ADMM) iteration:
an equality-constrained least-squares step whose KKT matrix is factored
once and reused, a cone projection, and a scaled dual update, with
over-relaxation and adaptive penalty rebalancing.  It is deterministic:
same problem and settings give bitwise-identical iterates.

An external solver can be hooked in through :func:`register_adapter` and
selected with the SSTQP_EXTERNAL_SOLVER environment variable; an adapter
for the SCS package is registered when that package is importable.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import linalg
from .errors import DimensionError, ParameterError, UnsupportedBackendError

ENV_EXTERNAL_SOLVER = "SSTQP_EXTERNAL_SOLVER"


@dataclass(frozen=True)
class NonNeg:
    """A block of elementwise-nonnegative coordinates."""

    size: int

    @property
    def coords(self) -> int:
        return self.size


@dataclass(frozen=True)
class Psd:
    """A PSD matrix block of the given order, stored in svec coordinates."""

    order: int

    @property
    def coords(self) -> int:
        return linalg.svec_len(self.order)


@dataclass(frozen=True)
class ConeSpec:
    """Ordered product of cone blocks; total coordinate count is ``dim``."""

    blocks: tuple

    def __post_init__(self):
        for blk in self.blocks:
            size = blk.size if isinstance(blk, NonNeg) else blk.order
            if size < 1:
                raise ParameterError(f"cone block sizes must be >= 1, got {blk}")

    @property
    def dim(self) -> int:
        return sum(blk.coords for blk in self.blocks)

    def slices(self):
        """Yield (block, slice) pairs over the coordinate vector."""
        start = 0
        for blk in self.blocks:
            stop = start + blk.coords
            yield blk, slice(start, stop)
            start = stop


def project_cone(z: np.ndarray, spec: ConeSpec) -> np.ndarray:
    """Euclidean projection onto the cone product, block by block."""
    z = np.asarray(z, dtype=float)
    if z.shape[0] != spec.dim:
        raise DimensionError(f"vector length {z.shape[0]} != cone dimension {spec.dim}")
    out = np.empty_like(z)
    for blk, sl in spec.slices():
        if isinstance(blk, NonNeg):
            np.maximum(z[sl], 0.0, out=out[sl])
        else:
            out[sl] = linalg.svec(linalg.proj_psd(linalg.smat(z[sl])))
    return out


@dataclass
class ConicProblem:
    """min c.z  s.t.  A z = b,  z in cone.  A is stored as COO triples."""

    c: np.ndarray
    a_rows: np.ndarray
    a_cols: np.ndarray
    a_vals: np.ndarray
    b: np.ndarray
    cone: ConeSpec
    label: str = ""

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.a_rows = np.asarray(self.a_rows, dtype=np.int64)
        self.a_cols = np.asarray(self.a_cols, dtype=np.int64)
        self.a_vals = np.asarray(self.a_vals, dtype=float)
        if self.c.shape[0] != self.cone.dim:
            raise DimensionError("objective length does not match cone dimension")
        keep = self.a_vals != 0.0  # invariant: no explicit zero triples
        if not keep.all():
            self.a_rows = self.a_rows[keep]
            self.a_cols = self.a_cols[keep]
            self.a_vals = self.a_vals[keep]
        if len(self.a_rows):
            if self.a_rows.min() < 0 or self.a_rows.max() >= self.num_rows:
                raise DimensionError("constraint row index out of range")
            if self.a_cols.min() < 0 or self.a_cols.max() >= self.num_cols:
                raise DimensionError("constraint column index out of range")

    @property
    def num_rows(self) -> int:
        return self.b.shape[0]

    @property
    def num_cols(self) -> int:
        return self.c.shape[0]

    def matrix(self) -> scipy.sparse.csr_matrix:
        return scipy.sparse.csr_matrix(
            (self.a_vals, (self.a_rows, self.a_cols)),
            shape=(self.num_rows, self.num_cols),
        )


@dataclass(frozen=True)
class SolverSettings:
    tol_feas: float = 1e-7
    tol_gap: float = 1e-6
    accept_tol_feas: float = 1e-5
    max_iter: int = 200_000
    penalty: float = 1.0
    over_relaxation: float = 1.6
    seed: int = 0  # reserved for perturbation strategies; unused by default

    def __post_init__(self):
        if min(self.tol_feas, self.tol_gap, self.accept_tol_feas) <= 0.0:
            raise ParameterError("tolerances must be positive")
        if not (1.0 < self.over_relaxation < 2.0):
            raise ParameterError("over-relaxation must lie in (1, 2)")
        if self.penalty <= 0.0 or self.max_iter < 1:
            raise ParameterError("penalty must be > 0 and max_iter >= 1")


@dataclass(frozen=True)
class Residuals:
    """Relative residuals: equality feasibility, dual-cone distance, gap.

    The returned primal point is cone-feasible by construction, so the
    cone entry reports the dual slack's distance to the cone.
    """

    primal_eq: float
    cone: float
    gap: float

    @property
    def worst(self) -> float:
        return max(self.primal_eq, self.cone, self.gap)


@dataclass(frozen=True)
class ConicSolution:
    status: str  # Optimal | MaxIter | PrimalInfeasible-suspected | DualInfeasible-suspected
    z: np.ndarray
    y: np.ndarray
    primal_objective: float
    dual_objective: float
    residuals: Residuals
    iterations: int
    wall_time: float

    def acceptable(self, settings: SolverSettings) -> bool:
        """Optimal, or MaxIter with residuals within the acceptance slack."""
        if self.status == "Optimal":
            return True
        return self.status == "MaxIter" and self.residuals.worst <= settings.accept_tol_feas


# internal constants of the iteration (not part of the public settings)
_CHECK_EVERY = 25
_PENALTY_EVERY = 50
_PENALTY_RATIO = 10.0
_PENALTY_FACTOR = 2.0
_PENALTY_MIN = 1e-6
_PENALTY_MAX = 1e6
_DIVERGE = 1e12


def _row_scaling(a: scipy.sparse.csr_matrix) -> np.ndarray:
    """Per-row 1/||row||_2 equilibration factors; zero rows are rejected."""
    sq = np.asarray(a.multiply(a).sum(axis=1)).ravel()
    if (sq == 0.0).any():
        raise ParameterError("constraint matrix has an all-zero row")
    return 1.0 / np.sqrt(sq)


def solve(problem: ConicProblem, settings: SolverSettings = SolverSettings()) -> ConicSolution:
    """Solve a conic problem with the native operator-splitting iteration."""
    t0 = time.perf_counter()
    n = problem.num_cols
    m = problem.num_rows
    if n == 0:
        raise ParameterError("problem has no variables")
    spec = problem.cone
    c = problem.c
    b = problem.b
    a = problem.matrix()

    if m > 0:
        d = _row_scaling(a)
        a_s = scipy.sparse.diags(d) @ a
        b_s = d * b
    else:
        d = np.zeros(0)
        a_s = a
        b_s = b

    sigma = settings.penalty
    alpha = settings.over_relaxation

    lu = None

    def factor(sig: float):
        kkt = scipy.sparse.bmat(
            [[sig * scipy.sparse.eye(n), a_s.T], [a_s, None]], format="csc"
        )
        return scipy.sparse.linalg.splu(kkt)

    if m > 0:
        lu = factor(sigma)

    z = np.zeros(n)
    w = np.zeros(n)
    lam = np.zeros(m)
    rhs = np.empty(n + m)
    rhs[n:] = b_s

    b_ref = 1.0 + np.abs(b).max(initial=0.0)
    c_ref = 1.0 + np.abs(c).max(initial=0.0)

    status = "MaxIter"
    res = Residuals(np.inf, np.inf, np.inf)
    pobj = dobj = np.nan
    y = np.zeros(m)
    iters = 0

    for k in range(1, settings.max_iter + 1):
        iters = k
        v = z - w
        if m > 0:
            rhs[:n] = sigma * v - c
            sol = lu.solve(rhs)
            x = sol[:n]
            lam = sol[n:]
        else:
            x = v - c / sigma
        x_hat = alpha * x + (1.0 - alpha) * z
        z_prev = z
        z = project_cone(x_hat + w, spec)
        w = w + x_hat - z

        if k % _CHECK_EVERY == 0 or k == settings.max_iter:
            y = d * -lam if m > 0 else lam
            pobj = float(c @ z)
            dobj = float(b @ y)
            pri = np.abs(a @ z - b).max(initial=0.0) / b_ref if m > 0 else 0.0
            s = c - (a.T @ y) if m > 0 else c
            dual = np.abs(s - project_cone(s, spec)).max(initial=0.0) / c_ref
            gap = abs(pobj - dobj) / max(1.0, abs(pobj), abs(dobj))
            res = Residuals(primal_eq=float(pri), cone=float(dual), gap=float(gap))
            if pri <= settings.tol_feas and dual <= settings.tol_feas and gap <= settings.tol_gap:
                status = "Optimal"
                break
            znorm = np.abs(z).max(initial=0.0)
            wnorm = np.abs(w).max(initial=0.0)
            if znorm > _DIVERGE:
                status = "DualInfeasible-suspected"
                break
            if wnorm > _DIVERGE:
                status = "PrimalInfeasible-suspected"
                break

        if m > 0 and k % _PENALTY_EVERY == 0 and k < settings.max_iter:
            rp = float(np.linalg.norm(x_hat - z))
            rd = float(sigma * np.linalg.norm(z - z_prev))
            new_sigma = sigma
            if rp > _PENALTY_RATIO * rd and sigma < _PENALTY_MAX:
                new_sigma = sigma * _PENALTY_FACTOR
            elif rd > _PENALTY_RATIO * rp and sigma > _PENALTY_MIN:
                new_sigma = sigma / _PENALTY_FACTOR
            if new_sigma != sigma:
                w = w * (sigma / new_sigma)
                sigma = new_sigma
                lu = factor(sigma)

    return ConicSolution(
        status=status,
        z=z,
        y=y,
        primal_objective=pobj,
        dual_objective=dobj,
        residuals=res,
        iterations=iters,
        wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# External solver hook


Adapter = Callable[[ConicProblem, SolverSettings], ConicSolution]

_ADAPTERS: dict[str, Adapter] = {}


def register_adapter(name: str, fn: Adapter) -> None:
    _ADAPTERS[name.lower()] = fn


def configured_adapter() -> Optional[str]:
    """Backend named by the environment, or None when not configured."""
    name = os.environ.get(ENV_EXTERNAL_SOLVER, "").strip().lower()
    return name or None


def solve_external(
    problem: ConicProblem,
    settings: SolverSettings = SolverSettings(),
    adapter: Optional[str] = None,
) -> ConicSolution:
    """Solve through the configured external backend (same contract as solve)."""
    name = adapter or configured_adapter()
    if name is None:
        raise UnsupportedBackendError(
            f"no external solver configured; set {ENV_EXTERNAL_SOLVER} or pass adapter="
        )
    fn = _ADAPTERS.get(name.lower())
    if fn is None:
        raise UnsupportedBackendError(
            f"external solver {name!r} is not registered (known: {sorted(_ADAPTERS)})"
        )
    return fn(problem, settings)


def _scs_adapter(problem: ConicProblem, settings: SolverSettings) -> ConicSolution:
    """Map onto the SCS form  min c.x  s.t.  Ax + s = b,  s in K.

    Equalities become zero-cone rows; cone membership of z becomes
    -z + s = 0 with s in K.  SCS orders cones zero, nonneg, psd, so the
    membership rows are permuted to list NonNeg coordinates first.  SCS
    uses the same sqrt(2)-scaled column-major-lower svec convention.
    """
    import scs

    t0 = time.perf_counter()
    n = problem.num_cols
    m = problem.num_rows
    nonneg_sizes = []
    psd_orders = []
    nonneg_idx = []
    psd_idx = []
    for blk, sl in problem.cone.slices():
        if isinstance(blk, NonNeg):
            nonneg_sizes.append(blk.size)
            nonneg_idx.extend(range(sl.start, sl.stop))
        else:
            psd_orders.append(blk.order)
            psd_idx.extend(range(sl.start, sl.stop))
    perm = np.array(nonneg_idx + psd_idx, dtype=np.int64)

    eye = scipy.sparse.identity(n, format="csr")
    a_top = problem.matrix()
    a_bot = -eye[perm]
    a_scs = scipy.sparse.vstack([a_top, a_bot], format="csc")
    b_scs = np.concatenate([problem.b, np.zeros(n)])
    cone = {"z": m, "l": int(sum(nonneg_sizes)), "s": psd_orders}
    data = {"A": a_scs, "b": b_scs, "c": problem.c}
    solver = scs.SCS(
        data,
        cone,
        eps_abs=settings.tol_gap,
        eps_rel=settings.tol_gap,
        max_iters=settings.max_iter,
        verbose=False,
    )
    out = solver.solve()
    info = out["info"]
    status_map = {
        "solved": "Optimal",
        "solved (inaccurate - reached max_iters)": "MaxIter",
        "infeasible": "PrimalInfeasible-suspected",
        "unbounded": "DualInfeasible-suspected",
    }
    status = status_map.get(info["status"].lower(), "MaxIter")
    z = np.asarray(out["x"], dtype=float)
    y = np.asarray(out["y"][:m], dtype=float)
    res = Residuals(
        primal_eq=float(info["res_pri"]),
        cone=float(info["res_dual"]),
        gap=float(abs(info.get("gap", np.nan))),
    )
    return ConicSolution(
        status=status,
        z=z,
        y=y,
        primal_objective=float(info["pobj"]),
        dual_objective=float(info["dobj"]),
        residuals=res,
        iterations=int(info["iter"]),
        wall_time=time.perf_counter() - t0,
    )


try:  # pragma: no cover - presence depends on the environment
    import scs as _scs_probe  # noqa: F401

    register_adapter("scs", _scs_adapter)
except ImportError:  # pragma: no cover
    pass
