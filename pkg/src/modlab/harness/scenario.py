"""Scenarios, seeded initial-data suites, norm time series and the empirical constant."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ..characteristics import anchor_lattice, flow_jacobian_dets
from ..grid import Field, UniformGrid, boundary_mass_fraction, make_grid, spectral_tail_fraction
from ..potentials import PotentialModel
from ..propagator import StabilityError, magnetic_propagate, policy_dt, relative_l2_difference
from ..wavepacket import invert, mod_norm, wpt
from ..windows import WindowSpec, evolve_window, make_window
from . import config as C

log = logging.getLogger(__name__)

GUARD_TOL = 1e-10
MAX_HORIZON = 2.0


@dataclass(frozen=True)
class DataSpec:
    """Seeded Gaussian wave packets with random center, width and momentum."""

    count: int = 10
    seed: int = 0
    x0_max: float = 4.0
    width_min: float = 0.8
    width_max: float = 1.5
    k0_max: float = 1.5


def gaussian_packet(grid: UniformGrid, x0, width: float, k0) -> Field:
    X = grid.mesh()
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (grid.n,))
    k0 = np.broadcast_to(np.asarray(k0, dtype=float), (grid.n,))
    d = X - x0
    vals = np.exp(-np.sum(d ** 2, axis=-1) / (2 * width ** 2) + 1j * d @ k0)
    f = Field(grid, vals)
    return f * (1.0 / f.l2_norm)


def packet_parameters(spec: DataSpec, n: int) -> list:
    rng = np.random.default_rng(spec.seed)
    out = []
    for _ in range(spec.count):
        x0 = rng.uniform(-spec.x0_max, spec.x0_max, n)
        width = rng.uniform(spec.width_min, spec.width_max)
        k0 = rng.uniform(-spec.k0_max, spec.k0_max, n)
        out.append((x0, width, k0))
    return out


def gaussian_suite(grid: UniformGrid, spec: DataSpec) -> list:
    """The seeded suite on ``grid``; raises if a member violates the guards."""
    fields = []
    for k, (x0, width, k0) in enumerate(packet_parameters(spec, grid.n)):
        f = gaussian_packet(grid, x0, width, k0)
        tail, edge = spectral_tail_fraction(f), boundary_mass_fraction(f)
        if tail > GUARD_TOL or edge > GUARD_TOL:
            raise ValueError(f"initial datum {k} fails the guards (spectral tail {tail:.2e}, "
                             f"boundary mass {edge:.2e})")
        fields.append(f)
    return fields


@dataclass(frozen=True)
class Scenario:
    name: str
    grid: UniformGrid
    window: WindowSpec
    potential: PotentialModel
    data: DataSpec
    T: float
    outputs: tuple
    exponents: tuple
    scheme: str = "strang-split"
    dt: float = 0.01
    cap: float = 100.0
    refine_N: int = 1024
    refine_tol: float = 0.02
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0 < self.T <= MAX_HORIZON:
            raise ValueError(f"horizon T must lie in (0, {MAX_HORIZON}]")
        if self.potential.n != self.grid.n:
            raise ValueError("potential and grid dimensions differ")
        for p in self.exponents:
            if np.isnan(p) or p < 1:
                raise ValueError(f"exponent {p} outside [1, inf]")

    @property
    def rho(self) -> float:
        return self.potential.rho

    def step(self, grid: UniformGrid | None = None) -> float:
        g = self.grid if grid is None else grid
        return min(self.dt, policy_dt(g, self.potential, self.scheme, 0.0, self.T))

    def initial_data(self, grid: UniformGrid | None = None) -> list:
        return gaussian_suite(self.grid if grid is None else grid, self.data)

    def refined(self, N: int | None = None) -> "Scenario":
        g = make_grid(self.grid.n, self.grid.L, N or self.refine_N)
        return replace(self, grid=g)


def scenario_from_config(cfg: dict, seed: int | None = None, scheme: str | None = None) -> Scenario:
    try:
        n = C.integer(cfg["grid.n"], "grid.n")
        try:
            grid = make_grid(n, C.number(cfg["grid.L"], "grid.L"), C.integer(cfg["grid.N"], "grid.N"))
        except ValueError as exc:
            raise C.ConfigError(f"grid: {exc}") from None
        data = DataSpec(
            C.integer(cfg["data.count"], "data.count"),
            C.integer(cfg["data.seed"], "data.seed") if seed is None else seed,
            C.number(cfg["data.x0_max"], "data.x0_max"),
            C.number(cfg["data.width_min"], "data.width_min"),
            C.number(cfg["data.width_max"], "data.width_max"),
            C.number(cfg["data.k0_max"], "data.k0_max"))
        T = C.number(cfg["time.T"], "time.T")
        count = C.integer(cfg["time.outputs"], "time.outputs")
        if count < 2:
            raise C.ConfigError("time.outputs must be at least 2")
        if scheme is not None:
            cfg = dict(cfg, scheme=scheme)
        scen = Scenario(
            name=cfg["name"], grid=grid, window=C.window_spec(cfg),
            potential=C.potential_model(cfg), data=data, T=T,
            outputs=tuple(float(t) for t in np.linspace(0.0, T, count)),
            exponents=C.numbers(cfg["norms.p"], "norms.p"), scheme=C.scheme(cfg),
            dt=C.number(cfg["time.dt"], "time.dt"), cap=C.number(cfg["tol.cap"], "tol.cap"),
            refine_N=C.integer(cfg["refine.N"], "refine.N"),
            refine_tol=C.number(cfg["tol.refine"], "tol.refine"),
            extras={k: v for k, v in cfg.items() if k.startswith("characteristics.")})
        scen.initial_data()
        if not scen.dt > 0:
            raise C.ConfigError("time.dt must be positive")
    except C.ConfigError:
        raise
    except ValueError as exc:
        raise C.ConfigError(str(exc)) from None
    return scen


@dataclass(frozen=True)
class NormRow:
    u0_id: int
    p: float
    t: float
    window: str     # "fixed" or "evolved"
    norm: float
    ratio: float


@dataclass
class NormTimeseries:
    scenario: str
    times: tuple
    rows: list = field(default_factory=list)

    def ratios(self, p: float, window: str = "fixed") -> np.ndarray:
        """Array ``(members, times)`` of ratios for one exponent and window."""
        sel = [r for r in self.rows if r.p == p and r.window == window]
        ids = sorted({r.u0_id for r in sel})
        out = np.full((len(ids), len(self.times)), np.nan)
        col = {t: j for j, t in enumerate(self.times)}
        row = {i: k for k, i in enumerate(ids)}
        for r in sel:
            out[row[r.u0_id], col[r.t]] = r.ratio
        return out

    @property
    def exponents(self) -> tuple:
        return tuple(sorted({r.p for r in self.rows}))


@dataclass
class ScenarioResult:
    scenario: Scenario
    series: NormTimeseries
    diagnostics: dict
    snapshots: dict          # u0_id -> list of Field at the output times
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def _norms(u: Field, phi: Field, exponents) -> list:
    F = wpt(u, phi)
    return [mod_norm(F, p, p).value for p in exponents]


def run_scenario(s: Scenario, keep_snapshots: bool = False) -> ScenarioResult:
    """Propagate every suite member and tabulate the norms with both windows."""
    g = s.grid
    phi0 = make_window(s.window, g)
    windows = {t: evolve_window(phi0, t) for t in s.outputs}
    series = NormTimeseries(s.name, s.outputs)
    diag = {"drift": [], "inversion": [], "dt": None}
    snaps, failures = {}, []
    try:
        dt = s.step()
    except ValueError as exc:
        return ScenarioResult(s, series, diag, snaps, [("setup", str(exc))])
    diag["dt"] = dt
    for k, u0 in enumerate(s.initial_data()):
        try:
            run = magnetic_propagate(u0, s.potential, s.T, dt, s.scheme,
                                     output_times=[t for t in s.outputs if t > 0])
        except (StabilityError, FloatingPointError) as exc:
            failures.append((f"u0_{k}", str(exc)))
            continue
        states = [u0] + list(run.snapshots)
        if keep_snapshots:
            snaps[k] = states
        base = {}
        for t, u in zip(s.outputs, states):
            for window, phi in (("fixed", phi0), ("evolved", windows[t])):
                for p, v in zip(s.exponents, _norms(u, phi, s.exponents)):
                    if t == 0:
                        base[window, p] = v
                    series.rows.append(NormRow(k, p, t, window, v, v / base[window, p]))
        diag["drift"].append(run.max_drift())
        back = invert(wpt(run.final, phi0), phi0)
        diag["inversion"].append(relative_l2_difference(back, run.final))
    X, XI = anchor_lattice(g.n, 2.0, 2.0, 3, 3)
    dets = flow_jacobian_dets(s.potential, 0.0, X, XI, s.T)
    diag["jacobian_max_dev"] = float(np.max(np.abs(dets - 1)))
    diag["drift_max"] = max(diag["drift"], default=float("nan"))
    diag["inversion_max"] = max(diag["inversion"], default=float("nan"))
    return ScenarioResult(s, series, diag, snaps, failures)


def constant_report(series_list, cap: float = 100.0, window: str = "fixed") -> dict:
    """Empirical constant ``max ratio`` per (scenario, p) with a running table in ``T``.

    The table entry at output time ``T`` is the maximum over the suite and
    ``t <= T``, so it is non-decreasing by construction.
    """
    if not series_list:
        raise ValueError("need at least one series")
    out = {}
    for ser in series_list:
        per_p = {}
        for p in ser.exponents:
            R = ser.ratios(p, window)
            running = np.maximum.accumulate(np.nanmax(R, axis=0))
            chat = float(running[-1])
            per_p[p] = {
                "C_T": chat,
                "table": [(float(t), float(c)) for t, c in zip(ser.times, running)],
                "finite": bool(np.all(np.isfinite(R))),
                "flagged": bool(chat > cap),
            }
        out[ser.scenario] = per_p
    return out
