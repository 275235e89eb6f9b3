"""Experiment plans, diagnostics, simulation runs, lifespan sweeps and the
finite-difference check of the symmetrized equation."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .good_unknowns import TERM_GROUPS, linearized_rhs, symmetrized_rhs, to_good_unknowns
from .integrators import (
    BlowupError,
    IntegratorConfig,
    Scheme,
    Stepper,
    cfl_number,
    from_characteristic,
    to_characteristic,
)
from .model import State, lambda_eps
from .random_fields import annulus_initial_state
from .spectral import GridSpec, l2_norm, sobolev_norm

__all__ = [
    "ExperimentPlan",
    "RunSpec",
    "DiagnosticsRow",
    "SimulationResult",
    "SweepEntry",
    "SweepSummary",
    "diagnostics",
    "ledger_columns",
    "initial_state",
    "simulate",
    "lifespan_sweep",
    "tail_ratio",
    "time_reverse",
    "symmetrize_consistency",
    "ConsistencyReport",
]

BASE_COLUMNS = ("t", "E_N0", "norm_zeta", "norm_v", "norm_u", "norm_V", "curl_res", "mean_res", "profile_ratio")


def ledger_columns() -> list[str]:
    """Group norms ``S, Q, C, N`` followed by every individual term."""
    terms = [t for names in TERM_GROUPS.values() for t in names]
    return list(TERM_GROUPS) + terms


# plans -------------------------------------------------------------------------------


@dataclass(frozen=True)
class RunSpec:
    """One simulation: a single ``eps`` with all numerical settings fixed."""

    epsilon: float
    n: int = 256
    length: float = 32.0 * math.pi
    N0: int = 5
    seed: int = 0
    r_lo: float = 1.0
    r_hi: float = 4.0
    energy0: float = 1.0
    t_end: float = 1.0
    dt: float = 0.05
    cadence: float = 0.1
    scheme: str = "IFRK4"
    nonlinear: bool = True
    dealias: bool = True
    ledger: bool = True

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n, self.length)

    def steps_per_row(self) -> int:
        return max(1, math.ceil(self.cadence / self.dt - 1e-9))

    def effective_dt(self) -> float:
        """Largest step not exceeding ``dt`` that divides ``cadence`` exactly."""
        return self.cadence / self.steps_per_row()

    def row_count(self) -> int:
        return math.floor(self.t_end / self.cadence + 1e-9) + 1


@dataclass
class ExperimentPlan:
    """Epsilon list, grid, data family and horizon ``t_end(eps) = T eps^-p``.

    ``compare_n`` requests a second run per ``eps`` on a finer grid for the
    resolution check; ``None`` disables it.
    """

    epsilons: list[float] = field(default_factory=lambda: [0.04, 0.02, 0.01])
    n: int = 256
    length: float = 32.0 * math.pi
    N0: int = 5
    seed: int = 0
    r_lo: float = 1.0
    r_hi: float = 4.0
    energy0: float = 1.0
    horizon_T: float = 0.1
    horizon_p: float = 2.0 / 3.0
    dt: float = 0.05
    cadence: float = 0.1
    scheme: str = "IFRK4"
    nonlinear: bool = True
    dealias: bool = True
    ledger: bool = True
    compare_n: int | None = 384
    tail_tol: float = 1e-8
    workers: int = 1

    def __post_init__(self) -> None:
        if self.N0 < 5:
            raise ValueError("N0 must be at least 5")
        if any(not (0.0 < e <= 1.0) for e in self.epsilons):
            raise ValueError("every epsilon must lie in (0, 1]")
        Scheme(self.scheme)

    def t_end(self, epsilon: float) -> float:
        return self.horizon_T * epsilon ** (-self.horizon_p)

    def entry(self, epsilon: float, n: int | None = None) -> RunSpec:
        return RunSpec(
            epsilon=epsilon,
            n=self.n if n is None else n,
            length=self.length,
            N0=self.N0,
            seed=self.seed,
            r_lo=self.r_lo,
            r_hi=self.r_hi,
            energy0=self.energy0,
            t_end=self.t_end(epsilon),
            dt=self.dt,
            cadence=self.cadence,
            scheme=self.scheme,
            nonlinear=self.nonlinear,
            dealias=self.dealias,
            ledger=self.ledger,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentPlan":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown plan keys: {sorted(unknown)}")
        return cls(**data)


def initial_state(spec: RunSpec) -> State:
    """Annulus data, zero mean and curl free by construction (checked)."""
    s = annulus_initial_state(spec.grid, spec.seed, spec.r_lo, spec.r_hi, spec.N0, spec.energy0)
    s.check_invariants(curl_tol=1e-12)
    return s


# diagnostics --------------------------------------------------------------------------


@dataclass
class DiagnosticsRow:
    t: float
    E_N0: float
    norm_zeta: float
    norm_v: float
    norm_u: float
    norm_V: float
    curl_res: float
    mean_res: float
    profile_ratio: float
    ledger: dict[str, float] = field(default_factory=dict)

    def values(self, columns: list[str]) -> list[float]:
        base = [getattr(self, c) for c in BASE_COLUMNS]
        return base + [self.ledger.get(c, float("nan")) for c in columns]


def diagnostics(s: State, epsilon: float, N0: int, with_ledger: bool = True) -> DiagnosticsRow:
    """Energy, norms, structural residuals, profile derivative and term ledger."""
    gs = to_good_unknowns(s, epsilon, N0)
    drift = linearized_rhs(gs, s, epsilon)
    inv = np.where(s.grid.kabs > 0, 1.0 / np.where(s.grid.kabs > 0, s.grid.kabs, 1.0), 0.0)
    profile_ratio = l2_norm(drift.with_coeffs(inv * drift.coeffs)) / epsilon
    ledger: dict[str, float] = {}
    if with_ledger:
        led = symmetrized_rhs(gs, s, epsilon, N0).ledger(N0)
        ledger = {k: float(v) for k, v in led.items()}
    nz, nv = sobolev_norm(s.zeta, N0), sobolev_norm(s.v, N0)
    return DiagnosticsRow(
        t=float(s.time),
        E_N0=nz * nz + nv * nv,
        norm_zeta=nz,
        norm_v=nv,
        norm_u=sobolev_norm(gs.u, N0),
        norm_V=sobolev_norm(gs.V, N0),
        curl_res=s.curl_residual(),
        mean_res=s.mean_residual(),
        profile_ratio=profile_ratio,
        ledger=ledger,
    )


def tail_ratio(s: State) -> float:
    """Largest coefficient in the outer sixth of the dealiased band over the overall peak."""
    grid = s.grid
    ix, iy = grid.index
    edge = 18 * np.maximum(np.abs(ix), np.abs(iy)) >= 5 * grid.n
    outer = edge & grid.dealias_mask
    arrs = [np.abs(s.zeta.coeffs), np.abs(s.v.x.coeffs), np.abs(s.v.y.coeffs)]
    peak = max(a.max() for a in arrs)
    if peak == 0.0:
        return 0.0
    return float(max(a[outer].max() for a in arrs) / peak)


# simulation ---------------------------------------------------------------------------


@dataclass
class SimulationResult:
    spec: RunSpec
    rows: list[DiagnosticsRow]
    final_state: State
    blowup: str | None
    blowup_time: float | None
    tail: float
    cfl: float
    dt: float
    elapsed: float

    @property
    def completed(self) -> bool:
        return self.blowup is None

    def resolved(self, tail_tol: float = 1e-8) -> bool:
        return self.tail <= tail_tol

    def energy_series(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([r.t for r in self.rows]), np.array([r.E_N0 for r in self.rows])

    def doubling_time(self) -> float:
        """First sampled time with ``E_N0 > 2 E_N0(0)``; ``inf`` if none."""
        t, e = self.energy_series()
        hit = np.nonzero(e > 2.0 * e[0])[0]
        return float(t[hit[0]]) if hit.size else math.inf

    def summary(self, tail_tol: float = 1e-8) -> dict:
        t, e = self.energy_series()
        return {
            "spec": asdict(self.spec),
            "rows": len(self.rows),
            "expected_rows": self.spec.row_count(),
            "completed": self.completed,
            "blowup": self.blowup,
            "blowup_time": self.blowup_time,
            "dt_effective": self.dt,
            "cfl_advisory": self.cfl,
            "tail_ratio": self.tail,
            "resolved": self.resolved(tail_tol),
            "E0": float(e[0]),
            "E_max_ratio": float(e.max() / e[0]) if e[0] > 0 else None,
            "T_double": _finite_or_none(self.doubling_time()),
            "max_curl_res": max(r.curl_res for r in self.rows),
            "max_mean_res": max(r.mean_res for r in self.rows),
            "elapsed_s": self.elapsed,
        }


def _finite_or_none(x: float) -> float | None:
    return None if not math.isfinite(x) else float(x)


def simulate(spec: RunSpec, s0: State | None = None, progress=None) -> SimulationResult:
    """Integrate ``spec`` and sample diagnostics every ``cadence``.

    Rows are taken at ``t = j * cadence`` for ``j = 0 .. floor(t_end/cadence)``;
    the state is then advanced to ``t_end`` exactly. A blowup stops the run,
    keeps every emitted row and appends one for the last finite state.
    """
    start = time.perf_counter()
    s = initial_state(spec) if s0 is None else s0
    grid = s.grid
    dt = spec.effective_dt()
    cfg = IntegratorConfig(dt=dt, scheme=Scheme(spec.scheme), t_end=spec.t_end, dealias=spec.dealias, nonlinear=spec.nonlinear)
    stepper = Stepper(grid, spec.epsilon, cfg)
    per_row = spec.steps_per_row()
    cs = to_characteristic(s)
    rows = [diagnostics(s, spec.epsilon, spec.N0, spec.ledger)]
    blowup, t_blow = None, None
    n_rows = spec.row_count()
    try:
        for j in range(1, n_rows):
            for _ in range(per_row):
                cs = stepper.advance(cs)
            cs = replace(cs, time=j * spec.cadence)
            rows.append(diagnostics(from_characteristic(cs), spec.epsilon, spec.N0, spec.ledger))
            if progress is not None:
                progress(j, n_rows - 1)
        rest = spec.t_end - (n_rows - 1) * spec.cadence
        if rest > 1e-12 * max(1.0, spec.t_end):
            k = math.ceil(rest / dt - 1e-9)
            tail_cfg = replace(cfg, dt=rest / k)
            tail_stepper = Stepper(grid, spec.epsilon, tail_cfg)
            for _ in range(k):
                cs = tail_stepper.advance(cs)
            cs = replace(cs, time=spec.t_end)
    except BlowupError as err:
        blowup, t_blow = str(err), err.time
        last = err.last_state
        if last.time > rows[-1].t:
            rows.append(diagnostics(last, spec.epsilon, spec.N0, spec.ledger))
        final = last
    else:
        final = from_characteristic(cs)
    return SimulationResult(
        spec=spec,
        rows=rows,
        final_state=final,
        blowup=blowup,
        blowup_time=t_blow,
        tail=tail_ratio(final),
        cfl=cfl_number(grid, spec.epsilon, dt),
        dt=dt,
        elapsed=time.perf_counter() - start,
    )


# sweep --------------------------------------------------------------------------------


@dataclass
class SweepEntry:
    epsilon: float
    result: SimulationResult
    compare: SimulationResult | None
    T_double: float
    T_double_compare: float | None
    resolution_change: float | None
    C_sup: float | None
    resolved: bool

    def to_dict(self, tail_tol: float) -> dict:
        return {
            "epsilon": self.epsilon,
            "t_end": self.result.spec.t_end,
            "T_double": _finite_or_none(self.T_double),
            "T_double_compare": None if self.T_double_compare is None else _finite_or_none(self.T_double_compare),
            "resolution_change": self.resolution_change,
            "C_sup": self.C_sup,
            "resolved": self.resolved,
            "E_max_ratio": self.result.summary(tail_tol)["E_max_ratio"],
            "run": self.result.summary(tail_tol),
            "compare_run": None if self.compare is None else self.compare.summary(tail_tol),
        }


@dataclass
class SweepSummary:
    entries: list[SweepEntry]
    slope: float | None
    slope_residuals: list[float] | None
    C_ls: float | None
    C_ls_resolved: float | None
    bounded: bool
    resolution_stable: bool | None
    plan: ExperimentPlan

    def to_dict(self) -> dict:
        tol = self.plan.tail_tol
        return {
            "plan": self.plan.to_dict(),
            "entries": [e.to_dict(tol) for e in self.entries],
            "fit": {"slope_logTdouble_vs_log_inv_eps": self.slope, "residuals": self.slope_residuals},
            "C_least_squares": self.C_ls,
            "C_least_squares_resolved_only": self.C_ls_resolved,
            "bounded_by_2E0": self.bounded,
            "resolution_stable": self.resolution_stable,
            "excluded_unresolved": [e.epsilon for e in self.entries if not e.resolved],
        }


def _run(spec: RunSpec) -> SimulationResult:
    return simulate(spec)


def _energy_gap(a: SimulationResult, b: SimulationResult) -> float:
    """Largest relative gap between the two sampled energy curves on common times."""
    _, ea = a.energy_series()
    _, eb = b.energy_series()
    m = min(ea.size, eb.size)
    return float(np.max(np.abs(ea[:m] - eb[:m]) / np.abs(eb[:m])))


def _doubling_change(ta: float, tb: float) -> float:
    if math.isinf(ta) and math.isinf(tb):
        return 0.0
    if math.isinf(ta) or math.isinf(tb):
        return math.inf
    return abs(ta - tb) / tb


def lifespan_sweep(plan: ExperimentPlan) -> SweepSummary:
    """Run every ``eps`` (and its finer-grid twin) and fit the lifespan statistics.

    Runs whose spectral tail exceeds ``plan.tail_tol`` are flagged and left
    out of the doubling-time fit; the ``C`` fit is reported both over all
    completed runs and over resolved runs only. ``resolution_change`` is the larger of the relative change of
    ``T_double`` and the largest relative gap of the energy curves.
    """
    if len(plan.epsilons) < 3:
        raise ValueError("a sweep needs at least three epsilon values")
    eps = np.asarray(plan.epsilons, dtype=float)
    ratios = eps[1:] / eps[:-1]
    if not np.allclose(ratios, ratios[0], rtol=1e-6):
        raise ValueError("epsilon values must be geometrically spaced")
    specs = [plan.entry(e) for e in plan.epsilons]
    if plan.compare_n is not None:
        specs += [plan.entry(e, plan.compare_n) for e in plan.epsilons]
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as ex:
            results = list(ex.map(_run, specs))
    else:
        results = [_run(s) for s in specs]
    k = len(plan.epsilons)
    entries: list[SweepEntry] = []
    xs, ys, keep = [], [], []
    for i, e in enumerate(plan.epsilons):
        res = results[i]
        cmp = results[k + i] if plan.compare_n is not None else None
        t, en = res.energy_series()
        x = e ** (2.0 / 3.0) * t
        y = en - en[0]
        pos = x > 0
        c_sup = float(np.max(y[pos] / x[pos])) if pos.any() else None
        resolved = res.resolved(plan.tail_tol) and res.completed
        if res.completed:
            xs.append(x)
            ys.append(y)
            keep.append(resolved)
        td = res.doubling_time()
        td_c = cmp.doubling_time() if cmp is not None else None
        change = None
        if cmp is not None:
            change = max(_doubling_change(td, td_c), _energy_gap(res, cmp))
        entries.append(SweepEntry(e, res, cmp, td, td_c, change, c_sup, resolved))
    C_ls = _c_fit(xs, ys)
    C_res = _c_fit([x for x, k in zip(xs, keep) if k], [y for y, k in zip(ys, keep) if k])
    fit_pts = [(e.epsilon, e.T_double) for e in entries if e.resolved and math.isfinite(e.T_double)]
    slope, resid = None, None
    if len(fit_pts) >= 2:
        lx = np.log([1.0 / p[0] for p in fit_pts])
        ly = np.log([p[1] for p in fit_pts])
        coef = np.polyfit(lx, ly, 1)
        slope = float(coef[0])
        resid = [float(r) for r in ly - np.polyval(coef, lx)]
    bounded = all(e.result.completed and e.result.summary()["E_max_ratio"] <= 2.0 for e in entries)
    stable = None
    if plan.compare_n is not None:
        stable = all(e.resolution_change is not None and e.resolution_change < 0.1 for e in entries)
    return SweepSummary(entries, slope, resid, C_ls, C_res, bounded, stable, plan)


def _c_fit(xs: list[np.ndarray], ys: list[np.ndarray]) -> float | None:
    """Least-squares ``C`` in ``E(t) - E(0) ~ C x`` with ``x = eps^(2/3) t``."""
    if not xs:
        return None
    x, y = np.concatenate(xs), np.concatenate(ys)
    den = float(np.dot(x, x))
    return float(np.dot(x, y) / den) if den > 0 else None


# symmetrization check --------------------------------------------------------------


def time_reverse(s: State) -> State:
    """``(zeta, v) -> (zeta, -v)``; the system is invariant under this with ``t -> -t``."""
    return State(s.zeta, -s.v, -s.time)


@dataclass
class ConsistencyReport:
    """Finite-difference errors of ``d_t V`` and of the nonlinear drift.

    ``err_*`` compare the central difference of ``V`` with
    ``i Lambda V + rhs``. ``drift_err_*`` difference the profile
    ``exp(-it Lambda) V`` instead, which removes the exactly known linear
    part and measures the assembled nonlinear right-hand side alone.
    """

    dts: list[float]
    err_symmetrized: list[float]
    err_linearized: list[float]
    drift_err_symmetrized: list[float]
    drift_err_linearized: list[float]
    order_symmetrized: float | None
    order_linearized: float | None
    drift_order_symmetrized: float | None
    drift_order_linearized: float | None
    form_gap: float
    scale: float

    def passed(self, min_order: float = 1.9, gap_tol: float = 1e-10) -> bool:
        if self.scale == 0.0:
            errs = self.err_symmetrized + self.err_linearized + self.drift_err_symmetrized + self.drift_err_linearized
            return max(errs, default=0.0) == 0.0
        orders = (
            self.order_symmetrized,
            self.order_linearized,
            self.drift_order_symmetrized,
            self.drift_order_linearized,
        )
        return all(o is not None and o >= min_order for o in orders) and self.form_gap <= gap_tol

    def to_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed()}


def _fit_order(dts: list[float], errs: list[float]) -> float | None:
    pts = [(h, e) for h, e in zip(dts, errs) if e > 0]
    if len(pts) < 2:
        return None
    h, e = np.log([p[0] for p in pts]), np.log([p[1] for p in pts])
    return float(np.polyfit(h, e, 1)[0])


def _advance(s: State, epsilon: float, dt: float, substeps: int) -> State:
    cfg = IntegratorConfig(dt=dt / substeps)
    st = Stepper(s.grid, epsilon, cfg)
    cs = to_characteristic(s)
    for _ in range(substeps):
        cs = st.advance(cs)
    return from_characteristic(cs)


def symmetrize_consistency(
    s0: State, epsilon: float, dts: list[float] | None = None, N0: int = 5, substeps: int = 1
) -> ConsistencyReport:
    """Compare the central difference of ``V`` with both assembled right-hand sides.

    The states at ``+-dt`` come from the primitive system (IFRK4); the
    backward one uses time reversal. ``form_gap`` is the largest spectral
    difference between the two assembled forms over the largest modulus of
    the symmetrized one. When ``dts`` is omitted it is
    ``0.02 / max|Lambda|`` halved four times; on stiff grids the smallest of
    these can reach the round-off floor, so pass larger steps there.
    """
    grid = s0.grid
    gs0 = to_good_unknowns(s0, epsilon, N0)
    lam = lambda_eps(grid.kabs, epsilon)
    if dts is None:
        h0 = 0.02 / float(np.abs(lam[grid.dealias_mask]).max())
        dts = [h0 / 2**i for i in range(5)]
    lin_V = 1j * lam * gs0.V.coeffs
    drift_s = symmetrized_rhs(gs0, s0, epsilon, N0).total().coeffs
    drift_l = linearized_rhs(gs0, s0, epsilon).coeffs
    sym, lnz = lin_V + drift_s, lin_V + drift_l
    scale = float(np.abs(sym).max())
    gap = float(np.abs(drift_s - drift_l).max() / scale) if scale > 0 else float(np.abs(drift_s - drift_l).max())
    dscale = float(np.linalg.norm(drift_s))
    es, el, ds, dl = [], [], [], []
    for h in dts:
        plus = _advance(s0, epsilon, h, substeps)
        minus = time_reverse(_advance(time_reverse(s0), epsilon, h, substeps))
        Vp = to_good_unknowns(plus, epsilon, N0).V.coeffs
        Vm = to_good_unknowns(minus, epsilon, N0).V.coeffs
        fd = (Vp - Vm) / (2.0 * h)
        fd_drift = (np.exp(-1j * h * lam) * Vp - np.exp(1j * h * lam) * Vm) / (2.0 * h)
        den = np.linalg.norm(fd) if scale > 0 else 1.0
        dden = dscale if dscale > 0 else 1.0
        es.append(float(np.linalg.norm(fd - sym) / den))
        el.append(float(np.linalg.norm(fd - lnz) / den))
        ds.append(float(np.linalg.norm(fd_drift - drift_s) / dden))
        dl.append(float(np.linalg.norm(fd_drift - drift_l) / dden))
    return ConsistencyReport(
        list(dts), es, el, ds, dl,
        _fit_order(dts, es), _fit_order(dts, el), _fit_order(dts, ds), _fit_order(dts, dl),
        gap, scale,
    )
