"""End-to-end study pipelines emitting CSV tables, checks, and manifests.

Four pipelines: the fidelity-compensation study (fig2), the burst-signal
scaling study (fig3), the measurement replica (11 repetitions of N=1000
single-sensor shots against a burst two-tone signal), and the readout
degradation study built on the replica's shot tables. Every pipeline is
deterministic under its master seed regardless of worker count: each scan
point derives its own counter-based stream.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .estimators import (
    BiasScan,
    EstimateOutcome,
    bias_scan_rows,
    empirical_gmin,
    estimate_frequency_separation,
)
from .io_utils import write_csv, write_json
from .montecarlo import (
    apply_readout_degradation,
    estimate_population,
    excess_noise_channel,
    simulate_shots,
)
from .sensor import EnsembleConfig, SensorModel, contrast, mean_population, qpn_variance
from .sensitivity import (
    compensation_sensors,
    compensation_threshold,
    excess_sensors,
    gmin_constant,
    gmin_continuous_kernel,
    gmin_intermittent,
    gmin_variance,
    mc_snr,
    optimal_integration_time,
    snr_curve,
)
from .signals import IntermittentTwoTone, ToneConvention, TwoToneStochastic
from .streams import derive_stream

__all__ = [
    "Check",
    "PipelineReport",
    "run_fig2",
    "run_fig3",
    "run_experiment_replica",
    "run_fidelity_degradation",
    "write_report",
    "REPLICA_PARAMS",
]

TWO_PI = 2 * math.pi

# stream namespaces; the degradation study reuses the replica's table family
_NS_FIG3 = 3
_NS_REPLICA = 11
_NS_DEGRADE = 5


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    expected: float
    tolerance: float
    note: str = ""


@dataclass
class PipelineReport:
    pipeline_id: str
    seed: int | None
    parameters: dict
    tables: dict[str, tuple[tuple[str, ...], list[tuple]]] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def write_report(report: PipelineReport, out_dir) -> None:
    """One CSV per table plus a JSON manifest; stable bytes for fixed inputs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in sorted(report.tables.items()):
        write_csv(out / f"{name}.csv", header, rows)
    manifest = {
        "pipeline_id": report.pipeline_id,
        "seed": report.seed,
        "parameters": report.parameters,
        "checks": [
            {
                "name": c.name,
                "passed": c.passed,
                "measured": c.measured,
                "expected": c.expected,
                "tolerance": c.tolerance,
                "note": c.note,
            }
            for c in report.checks
        ],
        "tables": sorted(f"{name}.csv" for name in report.tables),
    }
    write_json(out / "manifest.json", manifest)


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _fidelity_grid(extra=(0.5,)) -> list[float]:
    grid = set(np.logspace(math.log10(0.05), 0.0, 50).tolist())
    grid.update(extra)
    return sorted(grid)


def _loglog_slope(xs, ys) -> float:
    coeffs = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(coeffs[0])


# ----------------------------------------------------------------------
# fidelity compensation study

def run_fig2(
    f_grid=None,
    scenarios: tuple[str, ...] = ("constant", "variance"),
    *,
    n_shots: int = 1000,
    t2: float = 10e-3,
) -> PipelineReport:
    """Sensitivity loss and sensor compensation versus fidelity.

    Emits the g_min(F)/g_min(1) ratio at fixed M=1 (each point at its
    scenario-optimal integration time) and the integer/real sensor counts
    that recover the unity-fidelity sensitivity.
    """
    f_grid = _fidelity_grid() if f_grid is None else sorted(f_grid)
    ensemble = EnsembleConfig(n_shots, 1)

    def gmin_at(scenario: str, f: float) -> tuple[float, float]:
        sensor = SensorModel(f, t2)
        if scenario == "constant":
            return gmin_constant(sensor, ensemble, t2).g_min, t2
        t_opt = optimal_integration_time("variance", sensor, ensemble).t_opt
        return gmin_variance(sensor, ensemble, t_opt).g_min, t_opt

    ratio_rows, comp_rows = [], []
    for scenario in scenarios:
        g_unity, _ = gmin_at(scenario, 1.0)
        for f in f_grid:
            g, t_opt = gmin_at(scenario, f)
            ratio_rows.append((scenario, f, t_opt, g, g / g_unity))
            m_int = compensation_sensors(scenario, f, n_shots=n_shots, t2=t2)
            m_real = compensation_threshold(scenario, f, n_shots=n_shots, t2=t2)
            comp_rows.append((scenario, f, m_int, m_real))

    report = PipelineReport(
        "fig2",
        seed=None,
        parameters={"n_shots": n_shots, "m_sensors": 1, "t2_s": t2,
                    "scenarios": list(scenarios), "f_grid_size": len(f_grid)},
    )
    report.tables["sensitivity_ratio"] = (
        ("scenario", "fidelity", "t_opt_s", "gmin_rad_s", "gmin_over_unity"), ratio_rows)
    report.tables["compensation"] = (
        ("scenario", "fidelity", "m_sensors", "m_threshold"), comp_rows)

    by = {(r[0], r[1]): r for r in ratio_rows}
    comp_by = {(r[0], r[1]): r for r in comp_rows}
    if "constant" in scenarios and 0.5 in f_grid:
        ratio = by[("constant", 0.5)][4]
        report.checks.append(Check(
            "constant_half_fidelity_ratio", abs(ratio - 2.0) < 1e-9, ratio, 2.0, 1e-9))
        m = comp_by[("constant", 0.5)][2]
        report.checks.append(Check(
            "constant_half_fidelity_sensors", m == 4, m, 4, 0))
    for scenario in scenarios:
        ratio1 = by[(scenario, 1.0)][4]
        m1 = comp_by[(scenario, 1.0)][2]
        report.checks.append(Check(
            f"{scenario}_unity_ratio", abs(ratio1 - 1.0) < 1e-12, ratio1, 1.0, 1e-12))
        report.checks.append(Check(f"{scenario}_unity_sensors", m1 == 1, m1, 1, 0))
    if "variance" in scenarios:
        small = [f for f in f_grid if f <= 0.2]
        slope = _loglog_slope(small, [by[("variance", f)][4] for f in small])
        report.checks.append(Check(
            "variance_small_f_slope", abs(slope + 0.5) < 0.05, slope, -0.5, 0.05))
    return report


# ----------------------------------------------------------------------
# burst-signal scaling study

FIG3_PARAMS = {
    "omega_s": TWO_PI * 1000.0,
    "sigma": TWO_PI * 500.0,
    "g": TWO_PI * 10.0,
    "n_shots": 1000,
    "m_sensors": 1,
    "t2": 10e-3,
}


def run_fig3(
    seed: int,
    *,
    f_grid=None,
    t1_grid=None,
    t2: float = FIG3_PARAMS["t2"],
    threads: int = 1,
    mc_shots: int = 200_000,
) -> PipelineReport:
    """SNR structure, fidelity scaling, compensation, and burst penalty.

    Panels: (a) SNR versus integration time, analytic plus a Monte-Carlo
    variant; (b) g_min versus fidelity for the four scenarios; (c) sensor
    compensation counts; (d) the burst excess-sensor factor M_ex(t1/T2).
    """
    omega_s, sigma_amp = FIG3_PARAMS["omega_s"], FIG3_PARAMS["sigma"]
    g_probe = FIG3_PARAMS["g"]
    ensemble = EnsembleConfig(FIG3_PARAMS["n_shots"], FIG3_PARAMS["m_sensors"])
    sensor = SensorModel(1.0, t2, theta=0.0)
    spec = TwoToneStochastic(omega_s, g_probe, sigma_amp)
    f_grid = _fidelity_grid() if f_grid is None else sorted(f_grid)
    t1_grid = np.logspace(-3, 0, 30).tolist() if t1_grid is None else sorted(t1_grid)

    report = PipelineReport(
        "fig3",
        seed=seed,
        parameters={
            "omega_s_hz": omega_s / TWO_PI, "sigma_hz": sigma_amp / TWO_PI,
            "g_hz": g_probe / TWO_PI, "n_shots": ensemble.n_shots,
            "m_sensors": ensemble.m_sensors, "t2_s": t2, "theta_rad": 0.0,
            "f_grid_size": len(f_grid), "t1_grid_size": len(t1_grid),
            "mc_shots": mc_shots,
        },
    )

    # (a) analytic SNR curve on a fine grid, Monte-Carlo on a coarser one
    t_fine = [round(k * 5e-5, 10) for k in range(1, 601)]
    analytic = snr_curve(spec, sensor, ensemble, g_probe, t_fine)
    report.tables["fig3a_snr"] = (
        ("t_i_s", "snr"), [(t, s) for t, s in analytic])

    t_coarse = [round(k * 2.5e-4, 10) for k in range(1, 121)]

    def mc_point(idx: int) -> tuple[float, float]:
        t_i = t_coarse[idx]
        rng = derive_stream(seed, _NS_FIG3, 0, idx)
        return t_i, mc_snr(spec, sensor, ensemble, t_i, rng, mc_shots)

    mc = _pmap(mc_point, range(len(t_coarse)), threads)
    report.tables["fig3a_snr_mc"] = (("t_i_s", "snr"), mc)

    snr_by_t = dict(analytic)
    period = TWO_PI / omega_s
    peak_ok = all(
        snr_by_t[round(n * period, 10)] > snr_by_t[round(n * period - 5e-5, 10)]
        and snr_by_t[round(n * period, 10)] > snr_by_t[round(n * period + 5e-5, 10)]
        for n in (1, 2, 3)
    )
    report.checks.append(Check(
        "snr_local_maxima_at_period_multiples", peak_ok, float(peak_ok), 1.0, 0.0,
        note="SNR curve peaks at 1, 2, 3 ms against both grid neighbors"))
    t_star = max(analytic, key=lambda pair: pair[1])[0]
    ratio = t_star / t2
    report.checks.append(Check(
        "snr_global_max_location", 1.2 - 1e-9 <= ratio <= 1.7, ratio, 1.45, 0.25,
        note="argmax of SNR(t_i) in units of T2"))

    analytic_coarse = dict(snr_curve(spec, sensor, ensemble, g_probe, t_coarse))
    # MC SNR noise: std ~ sqrt(NM/shots) per point; 4 sigma band plus margin
    band = 4.5 * math.sqrt(ensemble.total / mc_shots)
    worst = max(abs(s - analytic_coarse[t]) for t, s in mc)
    report.checks.append(Check(
        "snr_mc_concordance", worst <= band, worst, 0.0, band,
        note="max |MC - analytic| SNR over the coarse grid"))

    # (b) g_min versus fidelity, all four scenarios at their optimal times
    def scenario_gmin(scenario: str, f: float) -> float:
        s = SensorModel(f, t2)
        if scenario == "constant":
            return gmin_constant(s, ensemble, t2).g_min
        if scenario == "variance":
            t_opt = optimal_integration_time("variance", s, ensemble).t_opt
            return gmin_variance(s, ensemble, t_opt).g_min
        if scenario == "continuous_two_tone":
            # kernel form: the root-found variant saturates below F ~ 0.07
            # at this ensemble size and cannot cover the full fidelity grid
            return gmin_continuous_kernel(s, ensemble, omega_s, sigma_amp).g_min
        return gmin_intermittent(s, ensemble, omega_s, sigma_amp).g_min

    scenarios = ("constant", "variance", "continuous_two_tone", "intermittent")
    rows_b = []
    for scenario in scenarios:
        unity = scenario_gmin(scenario, 1.0)
        values = _pmap(lambda f, sc=scenario: scenario_gmin(sc, f), f_grid, threads)
        for f, g in zip(f_grid, values):
            rows_b.append((scenario, f, g, g / unity))
    report.tables["fig3b_gmin_vs_fidelity"] = (
        ("scenario", "fidelity", "gmin_rad_s", "gmin_over_unity"), rows_b)

    window = [f for f in f_grid if 0.1 <= f <= 0.5]
    slopes = {}
    for scenario, expected in (("constant", -1.0), ("variance", -0.5),
                               ("continuous_two_tone", -0.5)):
        ys = [r[3] for r in rows_b if r[0] == scenario and r[1] in window]
        slopes[scenario] = _loglog_slope(window, ys)
        report.checks.append(Check(
            f"{scenario}_fidelity_slope", abs(slopes[scenario] - expected) < 0.05,
            slopes[scenario], expected, 0.05))
    g_09 = scenario_gmin("intermittent", 0.9)
    g_10 = scenario_gmin("intermittent", 1.0)
    slope_near_1 = (math.log(g_10) - math.log(g_09)) / (math.log(1.0) - math.log(0.9))
    report.checks.append(Check(
        "intermittent_slope_near_unity_steeper", slope_near_1 < -0.5,
        slope_near_1, -0.5, 0.0,
        note="log-log slope of intermittent g_min between F=0.9 and 1"))

    # (c) integer compensation counts
    rows_c = []
    for scenario in ("constant", "variance", "intermittent"):
        kwargs = {"n_shots": ensemble.n_shots, "t2": t2}
        if scenario == "intermittent":
            kwargs.update(omega_s=omega_s, sigma=sigma_amp)
        values = _pmap(lambda f, kw=kwargs, sc=scenario: compensation_sensors(sc, f, **kw),
                       f_grid, threads)
        rows_c.extend((scenario, f, m) for f, m in zip(f_grid, values))
    report.tables["fig3c_compensation"] = (("scenario", "fidelity", "m_sensors"), rows_c)

    # (d) burst excess-sensor factor
    rows_d = []
    for f in (1.0, 0.9997, 0.2):
        for t1 in t1_grid:
            rows_d.append((f, t1, excess_sensors(f, t1)))
    report.tables["fig3d_excess_sensors"] = (
        ("fidelity", "t1_over_t2", "m_ex"), rows_d)

    unity_vals = [r[2] for r in rows_d if r[0] == 1.0]
    flat = max(unity_vals) / min(unity_vals) - 1.0
    report.checks.append(Check(
        "m_ex_unity_flat", flat < 1e-9, flat, 0.0, 1e-9,
        note="spread of M_ex over t1 at F=1"))
    decade = [(t1, m) for f, t1, m in rows_d if f == 0.2 and 1e-3 <= t1 <= 1e-2]
    slope_d = _loglog_slope([t for t, _ in decade], [m for _, m in decade])
    report.checks.append(Check(
        "m_ex_low_f_slope", abs(slope_d + 2.0) < 0.05, slope_d, -2.0, 0.05))
    return report


# ----------------------------------------------------------------------
# measurement replica

_REPLICA_T1 = 1.0 / 2000.0  # one center period, 0.5 ms
_REPLICA_T2 = 7.97e-3
_REPLICA_CONTRAST = 0.903  # pinned fringe contrast at t1
REPLICA_PARAMS = {
    "omega_s": TWO_PI * 2000.0,
    "sigma": TWO_PI * 275.0,
    "t1": _REPLICA_T1,
    "t2": _REPLICA_T2,
    # fidelity chosen so contrast(t1) is exactly the pinned 0.903
    "fidelity": _REPLICA_CONTRAST / math.exp(-(_REPLICA_T1**2) / (2 * _REPLICA_T2**2)),
    "n_shots": 1000,
    "m_sensors": 1,
    "repetitions": 11,
    "theta": 0.0,
}


def _replica_grid() -> list[float]:
    """g grid: zero plus 21 log-spaced points over 2*pi*[10, 1000] Hz."""
    return [0.0] + [TWO_PI * g for g in np.logspace(1, 3, 21).tolist()]


def _replica_sensor() -> SensorModel:
    return SensorModel(REPLICA_PARAMS["fidelity"], REPLICA_PARAMS["t2"],
                       REPLICA_PARAMS["theta"])


def _replica_spec(g: float) -> IntermittentTwoTone:
    return IntermittentTwoTone(
        REPLICA_PARAMS["omega_s"], g, REPLICA_PARAMS["sigma"],
        t_sig=REPLICA_PARAMS["t1"])


def _simulate_replica_tables(seed: int, reps: int, threads: int):
    """Shot tables for every (grid point, repetition); shared with degrade."""
    grid = _replica_grid()
    sensor = _replica_sensor()
    ensemble = EnsembleConfig(REPLICA_PARAMS["n_shots"], REPLICA_PARAMS["m_sensors"])
    t1 = REPLICA_PARAMS["t1"]

    def one(key: tuple[int, int]):
        gi, rep = key
        path = (_NS_REPLICA, 0, gi, rep)
        rng = derive_stream(seed, *path)
        return simulate_shots(_replica_spec(grid[gi]), sensor, ensemble, t1, rng,
                              seed_path=path)

    keys = [(gi, rep) for gi in range(len(grid)) for rep in range(reps)]
    tables = _pmap(one, keys, threads)
    return grid, sensor, {k: t for k, t in zip(keys, tables)}


def _scan_from_estimates(grid, outcomes) -> BiasScan:
    rows = tuple(
        (g, tuple(outcomes[(gi, rep)] for rep in range(len(outcomes) // len(grid))))
        for gi, g in enumerate(grid)
    )
    return BiasScan(rows)


def run_experiment_replica(
    seed: int, excess_factor: float = 1.17, *, threads: int = 1
) -> PipelineReport:
    """Simulate the burst-measurement experiment end to end.

    11 repetitions of N=1000 single-sensor shots per grid point, estimation
    by exact inversion with the exclusion rule, and the empirical g_min.
    The projection-noise-limited estimates are always computed; when
    excess_factor > 1 a second scan adds matching population jitter, which
    emulates the measured noise floor sitting above projection noise.
    """
    reps = REPLICA_PARAMS["repetitions"]
    grid, sensor, tables = _simulate_replica_tables(seed, reps, threads)
    ensemble = EnsembleConfig(REPLICA_PARAMS["n_shots"], REPLICA_PARAMS["m_sensors"])
    t1 = REPLICA_PARAMS["t1"]

    pop_rows = []
    outcomes_qpn: dict[tuple[int, int], EstimateOutcome] = {}
    outcomes_exc: dict[tuple[int, int], EstimateOutcome] = {}
    for gi, g in enumerate(grid):
        spec = _replica_spec(g)
        p_model = mean_population(spec, sensor, t1)
        for rep in range(reps):
            table = tables[(gi, rep)]
            est = estimate_population(table)
            est_x = excess_noise_channel(
                table, excess_factor, derive_stream(seed, _NS_REPLICA, 1, gi, rep))
            outcomes_qpn[(gi, rep)] = estimate_frequency_separation(est, sensor, spec)
            outcomes_exc[(gi, rep)] = estimate_frequency_separation(est_x, sensor, spec)
            pop_rows.append((g / TWO_PI, rep, est_x.p_hat, est_x.std_err, est_x.qpn_err,
                             est.p_hat, p_model))

    scan_qpn = _scan_from_estimates(grid, outcomes_qpn)
    scan_exc = _scan_from_estimates(grid, outcomes_exc)
    gmin_qpn = empirical_gmin(scan_qpn)
    gmin_exc = empirical_gmin(scan_exc)
    analytic = gmin_intermittent(sensor, ensemble, REPLICA_PARAMS["omega_s"],
                                 REPLICA_PARAMS["sigma"])

    report = PipelineReport(
        "replica",
        seed=seed,
        parameters={**{k: v for k, v in REPLICA_PARAMS.items()
                       if k not in ("omega_s", "sigma")},
                    "omega_s_hz": REPLICA_PARAMS["omega_s"] / TWO_PI,
                    "sigma_hz": REPLICA_PARAMS["sigma"] / TWO_PI,
                    "excess_factor": excess_factor,
                    "contrast_t1": _REPLICA_CONTRAST},
    )
    report.tables["population"] = (
        ("g_applied_hz", "rep_index", "p_hat", "std_err", "qpn_err",
         "p_hat_qpn_limited", "p_model"), pop_rows)
    report.tables["estimates"] = (
        ("g_applied_hz", "rep_index", "status", "g_hat_hz"), bias_scan_rows(scan_exc))
    report.tables["estimates_qpn_limited"] = (
        ("g_applied_hz", "rep_index", "status", "g_hat_hz"), bias_scan_rows(scan_qpn))
    summary = [
        ("qpn_limited", gmin_qpn.g_min / TWO_PI, gmin_qpn.resolved),
        ("with_excess", gmin_exc.g_min / TWO_PI, gmin_exc.resolved),
        ("analytic", analytic.g_min / TWO_PI, True),
    ]
    report.tables["gmin_summary"] = (("variant", "gmin_hz", "resolved"), summary)

    # baseline population concordance, averaged over repetitions
    p0_model = mean_population(_replica_spec(0.0), sensor, t1)
    p0_rows = [r[5] for r in pop_rows[: reps]]
    p0_mean = sum(p0_rows) / reps
    sigma_p0 = math.sqrt(qpn_variance(p0_model, ensemble) / reps)
    report.checks.append(Check(
        "baseline_population", abs(p0_mean - p0_model) <= 3 * sigma_p0,
        p0_mean, p0_model, 3 * sigma_p0,
        note="mean p_hat at g=0 vs model, 3 sigma of the rep average"))

    # empirical error vs projection noise at g=0 (projection-limited data)
    emp_errs = [estimate_population(tables[(0, rep)]).std_err for rep in range(reps)]
    qpn_err = math.sqrt(qpn_variance(p0_model, ensemble))
    err_ratio = (sum(emp_errs) / reps) / qpn_err
    report.checks.append(Check(
        "qpn_error_ratio_g0", 0.9 <= err_ratio <= 1.1, err_ratio, 1.0, 0.1,
        note="mean empirical error over QPN prediction at g=0"))

    expected_hz = 290.0
    meas_hz = gmin_qpn.g_min / TWO_PI
    report.checks.append(Check(
        "gmin_290hz_within_15pct",
        gmin_qpn.resolved and abs(meas_hz - expected_hz) <= 0.15 * expected_hz,
        meas_hz, expected_hz, 0.15 * expected_hz,
        note="projection-noise-limited empirical g_min"))
    report.checks.append(Check(
        "analytic_gmin_290hz_within_2pct",
        abs(analytic.g_min / TWO_PI - expected_hz) <= 0.02 * expected_hz,
        analytic.g_min / TWO_PI, expected_hz, 0.02 * expected_hz))
    if excess_factor > 1.0:
        report.checks.append(Check(
            "gmin_excess_geq_qpn", gmin_exc.g_min >= gmin_qpn.g_min,
            gmin_exc.g_min / TWO_PI, gmin_qpn.g_min / TWO_PI, 0.0,
            note="excess noise cannot improve the empirical g_min; the grid "
                 "quantizes the estimate so equality is allowed"))
    return report


# ----------------------------------------------------------------------
# readout degradation study

def run_fidelity_degradation(
    seed: int,
    flip_grid: tuple[float, ...] = (0.0, 0.05, 0.1, 0.2, 0.3),
    *,
    repetitions: int = 44,
    threads: int = 1,
) -> PipelineReport:
    """Re-derive the empirical g_min after post-hoc readout bit flips.

    Base tables extend the replica's stream family (repetition indices
    beyond the replica's 11 continue the same per-point streams, so flip=0
    at 11 repetitions is bit-identical to the replica). Estimation at flip
    probability f uses the channel-scaled calibration C -> (1-2f) C; the
    fidelity is also re-measured from the degraded g=0 tables as a check.
    The g_min(F_eff) curve is compared against the burst closed form and
    against a 1/sqrt(F) scaling anchored at flip=0.
    """
    if any(not (0 <= f < 0.5) for f in flip_grid):
        raise ValueError("flip probabilities must lie in [0, 0.5)")
    flip_grid = tuple(sorted(flip_grid))
    reps = repetitions
    grid, sensor, tables = _simulate_replica_tables(seed, reps, threads)
    ensemble = EnsembleConfig(REPLICA_PARAMS["n_shots"], REPLICA_PARAMS["m_sensors"])
    t1 = REPLICA_PARAMS["t1"]
    decay = math.exp(-(t1**2) / (2 * sensor.t2**2))

    deg_rows, est_rows = [], []
    feff_sigmas = []
    gmin_by_flip = {}
    for fi, flip in enumerate(flip_grid):
        f_eff_expected = (1.0 - 2.0 * flip) * REPLICA_PARAMS["fidelity"]
        sensor_eff = SensorModel(f_eff_expected, sensor.t2, sensor.theta)
        outcomes = {}
        p0_sum = 0.0
        for gi, g in enumerate(grid):
            spec = _replica_spec(g)
            for rep in range(reps):
                rng = derive_stream(seed, _NS_DEGRADE, fi, gi, rep)
                table = apply_readout_degradation(tables[(gi, rep)], flip, rng)
                est = estimate_population(table)
                if gi == 0:
                    p0_sum += est.p_hat
                outcomes[(gi, rep)] = estimate_frequency_separation(est, sensor_eff, spec)
        scan = _scan_from_estimates(grid, outcomes)
        gmin = empirical_gmin(scan)
        gmin_by_flip[flip] = gmin
        for g_hz, rep, status, g_hat_hz in bias_scan_rows(scan):
            est_rows.append((flip, g_hz, rep, status, g_hat_hz))

        # re-measure the effective fidelity from the degraded baseline
        p0_mean = p0_sum / reps
        f_eff_measured = (1.0 - 2.0 * p0_mean) / decay
        p0_model = 0.5 * (1.0 - f_eff_expected * decay)
        sigma_f = 2.0 * math.sqrt(qpn_variance(p0_model, ensemble) / reps) / decay
        feff_sigmas.append(abs(f_eff_measured - f_eff_expected) / sigma_f)

        c_eff = f_eff_expected * decay
        model_hz = gmin_intermittent(sensor_eff, ensemble, REPLICA_PARAMS["omega_s"],
                                     REPLICA_PARAMS["sigma"]).g_min / TWO_PI
        deg_rows.append((flip, f_eff_expected, f_eff_measured, sigma_f, c_eff,
                         gmin.g_min / TWO_PI, gmin.resolved, model_hz))

    # sqrt-fidelity comparison curve anchored at the flip=0 model value
    anchor_hz = deg_rows[0][7]
    sqrt_rows = [
        (flip, row[1], row[7], anchor_hz / math.sqrt(row[1] / deg_rows[0][1]))
        for flip, row in zip(flip_grid, deg_rows)
    ]
    deg_rows = [
        row + (sqrt_rows[i][3],) for i, row in enumerate(deg_rows)
    ]

    report = PipelineReport(
        "degrade",
        seed=seed,
        parameters={"flip_grid": list(flip_grid), "repetitions": reps,
                    "n_shots": REPLICA_PARAMS["n_shots"],
                    "m_sensors": REPLICA_PARAMS["m_sensors"],
                    "fidelity": REPLICA_PARAMS["fidelity"],
                    "t2_s": REPLICA_PARAMS["t2"], "t1_s": t1,
                    "omega_s_hz": REPLICA_PARAMS["omega_s"] / TWO_PI,
                    "sigma_hz": REPLICA_PARAMS["sigma"] / TWO_PI},
    )
    report.tables["degradation"] = (
        ("flip_prob", "f_eff_expected", "f_eff_measured", "f_eff_sigma",
         "contrast_eff", "gmin_hz", "resolved", "gmin_model_hz", "gmin_sqrt_model_hz"),
        deg_rows)
    report.tables["estimates_degraded"] = (
        ("flip_prob", "g_applied_hz", "rep_index", "status", "g_hat_hz"), est_rows)

    resolved = [r for r in deg_rows if r[6]]
    rss_model = sum((r[5] - r[7]) ** 2 for r in resolved)
    rss_sqrt = sum((r[5] - r[8]) ** 2 for r in resolved)
    report.checks.append(Check(
        "burst_scaling_beats_sqrt", rss_model < rss_sqrt, rss_model, rss_sqrt, 0.0,
        note="residual sum of squares of g_min(F_eff), burst closed form vs "
             "1/sqrt(F) anchored at flip=0; resolved rows only"))
    worst_sigma = max(feff_sigmas)
    report.checks.append(Check(
        "f_eff_recovery", worst_sigma <= 3.0, worst_sigma, 0.0, 3.0,
        note="worst |measured - expected| effective fidelity in sigma units"))
    n_resolved = len(resolved)
    report.checks.append(Check(
        "gmin_resolved_rows", n_resolved >= 4, n_resolved, len(deg_rows), 0.0,
        note="degraded scans that still resolve an empirical g_min"))
    return report
