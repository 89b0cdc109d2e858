"""Command-line entry point: figures, single-point bounds, sweeps and oracle checks.

Exit status: 0 ok, 1 configuration error, 2 numerical failure, 3 tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from isac_crlb.config import (
    DEFAULT_B,
    DEFAULT_F_C,
    DEFAULT_GAMMA_DB,
    DEFAULT_N,
    DEFAULT_T_F,
    ExperimentConfig,
    load_config,
    make_rng,
)
from isac_crlb.crlb_closed import (
    ClosedFormRequest,
    crlb_fmcw,
    crlb_for_spec,
    crlb_ofdm_continuous,
    crlb_ofdm_discrete,
    crlb_otfs,
    crlb_pmcw,
    pulse_factor,
)
from isac_crlb.errors import (
    ConfigurationError,
    DegenerateSceneError,
    NumericalError,
    SamplingError,
    TruncationError,
)
from isac_crlb.fisher import (
    CrlbResult,
    coupling_report,
    crlb_from_draws,
    efim,
    fim_from_signal,
    format_bound,
)
from isac_crlb.scene import ArrayConfig, SceneParams
from isac_crlb.units import (
    CarrierConfig,
    crlb_delay_to_range,
    crlb_doppler_to_velocity,
    db_to_linear,
)
from isac_crlb.virtual_array import (
    BFDM,
    CDM,
    ITDM,
    baseline_scene,
    multiplex,
    parse_scheme,
    va_crlb_ratios,
    va_fim,
    write_ratio_csv,
)
from isac_crlb.waveform import RC, RRC, Rect, Sinc, read_signal, synthesize

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 1, 2, 3

BOUND_COLUMNS = ["c_tau_s2", "c_fd_hz2", "c_theta_rad2", "c_r_m2", "c_v_m2_s2"]

# oracle tolerances per family (relative error of the numeric bound)
TOLERANCE = {"fmcw": 0.02, "pmcw": 0.05, "ofdm": 0.05, "otfs": 0.05}
VA_TOLERANCE = 0.05
DEFECT_TOL = 1e-9


class ToleranceFailure(Exception):
    """Raised when a verification run exceeds its tolerance."""


# --------------------------------------------------------------------------
# CSV helpers
# --------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return format_bound(v)
    return "" if v is None else str(v)


def write_csv(path: Path, header: list[str], rows: list[list], seed: int) -> Path:
    """Seed comment, a header naming units, then the rows (bytewise deterministic)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(f"# seed={seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    path.write_text(buf.getvalue())
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def plot_csv(path: Path, x: str, ys: list[str], *, logy: bool = False, title: str = "") -> Path:
    """Static SVG line plot of selected CSV columns."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "isac-crlb"
    header, rows = read_csv(path)
    xi = header.index(x)
    fig, ax = plt.subplots(figsize=(6, 4))
    for y in ys:
        yi = header.index(y)
        pts = [(float(r[xi]), float(r[yi])) for r in rows if r[yi] not in ("", "unbounded")]
        if pts:
            xs, vs = zip(*pts)
            ax.plot(xs, vs, label=y)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    out = path.with_suffix(".svg")
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


# --------------------------------------------------------------------------
# closed-form evaluation from a config
# --------------------------------------------------------------------------


def _request(cfg: ExperimentConfig) -> ClosedFormRequest:
    w, sc = cfg.waveform, cfg.scene
    return ClosedFormRequest(
        B=w.B,
        T_F=w.T_F,
        K=w.K,
        L=w.L,
        pulse=w.pulse_shape() if w.family == "pmcw" else None,
        n_r=cfg.array.N_R,
        gamma=sc.gamma,
        theta_R=sc.theta_R,
    )


def closed_crlb(cfg: ExperimentConfig) -> CrlbResult:
    """Closed-form bounds for the config, including VA ratios when a scheme is set."""
    req = _request(cfg)
    fam = cfg.waveform.family
    res = {
        "fmcw": crlb_fmcw,
        "pmcw": crlb_pmcw,
        "ofdm": crlb_ofdm_continuous,
        "otfs": crlb_otfs,
    }[fam](req)
    if cfg.va.scheme and cfg.array.N_T > 1:
        r = va_crlb_ratios(parse_scheme(cfg.va.scheme, cfg.va.beta), cfg.array.N_T, n_r=req.n_r)
        res = CrlbResult(res.c_tau * r.r_tau, res.c_fd * r.r_fd, res.c_theta * r.r_theta_exact)
    return res


def bound_row(res: CrlbResult, carrier: CarrierConfig) -> list[float]:
    c_r = crlb_delay_to_range(res.c_tau) if math.isfinite(res.c_tau) else math.inf
    c_v = crlb_doppler_to_velocity(res.c_fd, carrier) if math.isfinite(res.c_fd) else math.inf
    return [res.c_tau, res.c_fd, res.c_theta, c_r, c_v]


# --------------------------------------------------------------------------
# numeric evaluation from a config
# --------------------------------------------------------------------------


def _fs(cfg: ExperimentConfig, B: float) -> float:
    return cfg.run.fs if cfg.run.fs is not None else cfg.run.oversample * B


def _scene(cfg: ExperimentConfig, energy: float, n_t: int = 1) -> SceneParams:
    sc = cfg.scene
    arr = ArrayConfig(N_T=n_t, N_R=cfg.array.N_R)
    return SceneParams.from_esnr(
        sc.gamma, energy, sigma2=sc.sigma2, theta_R=sc.theta_R, tau=sc.tau, f_D=sc.f_D, array=arr
    )


@dataclass
class NumericRun:
    """Draw-averaged numeric bounds plus what is needed to judge them."""

    result: CrlbResult
    closed: CrlbResult
    coupling: list[dict]
    energies: list[float]
    bandwidth: float
    family: str
    va_ratio: tuple[float, float, float] | None = None
    va_closed: tuple[float, float, float] | None = None
    extras: dict = field(default_factory=dict)


def numeric_crlb(cfg: ExperimentConfig) -> NumericRun:
    """Synthesize ``run.draws`` realizations and average their EFIMs."""
    w = cfg.waveform
    rng = make_rng(cfg.run.seed)
    draws = cfg.run.draws if w.random else 1
    if draws < 1:
        raise ConfigurationError("draws must be >= 1")
    scheme = parse_scheme(cfg.va.scheme, cfg.va.beta) if cfg.va.scheme else None
    n_t = cfg.array.N_T if scheme is not None else 1
    efims, coupling, energies, va_efims = [], [], [], []
    spec0 = None
    for _ in range(draws):
        spec = w.build(rng)
        spec0 = spec0 or spec
        sig = synthesize(spec, _fs(cfg, spec.bandwidth), tau_max=abs(cfg.scene.tau))
        scene = _scene(cfg, sig.energy, n_t)
        efims.append(efim(fim_from_signal(sig, baseline_scene(scene))))
        coupling.append(coupling_report(sig, scene.tau))
        energies.append(sig.energy)
        if n_t > 1:
            br = multiplex(spec, scheme, n_t, parent=sig)
            va_efims.append(efim(va_fim(spec, scheme, scene, branches=br)))
    res = crlb_from_draws(efims)
    closed = crlb_for_spec(
        spec0, n_r=cfg.array.N_R, gamma=cfg.scene.gamma, theta_R=cfg.scene.theta_R
    )
    run = NumericRun(res, closed, coupling, energies, spec0.bandwidth, w.family)
    if n_t > 1:
        v = crlb_from_draws(va_efims)
        run.va_ratio = (v.c_tau / res.c_tau, v.c_fd / res.c_fd, v.c_theta / res.c_theta)
        r = va_crlb_ratios(scheme, n_t, n_r=cfg.array.N_R)
        run.va_closed = (r.r_tau, r.r_fd, r.r_theta_exact)
    return run


def _rel(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b):
        return 0.0
    return abs(a / b - 1.0)


def judge(run: NumericRun) -> list[tuple[str, float, float, bool]]:
    """``(check, value, limit, ok)`` for every applicable oracle check."""
    tol = TOLERANCE[run.family]
    out = []
    for name in ("c_tau", "c_fd", "c_theta"):
        e = _rel(getattr(run.result, name), getattr(run.closed, name))
        out.append((f"rel_err_{name}", e, tol, e <= tol))
    e_s = float(np.mean(run.energies))
    re_c0 = max(c["re_c0_defect"] for c in run.coupling)
    lim = DEFECT_TOL * e_s * run.bandwidth
    out.append(("re_c0_defect", re_c0, lim, re_c0 <= lim))
    if run.family == "pmcw":
        im = max(abs(c["im_c1"]) for c in run.coupling)
        lim = DEFECT_TOL * e_s
        out.append(("im_c1_real_signal", im, lim, im <= lim))
    if run.va_ratio is not None:
        for name, got, want in zip(("r_tau", "r_fd", "r_theta"), run.va_ratio, run.va_closed):
            e = _rel(got, want)
            out.append((f"va_rel_err_{name}", e, VA_TOLERANCE, e <= VA_TOLERANCE))
    return out


# --------------------------------------------------------------------------
# subcommand bodies
# --------------------------------------------------------------------------


def run_crlb(cfg: ExperimentConfig, out: Path, seed: int) -> Path:
    res = closed_crlb(cfg)
    path = out / f"{cfg.name}_crlb.csv"
    return write_csv(path, BOUND_COLUMNS, [bound_row(res, cfg.scene.carrier)], seed)


def _sweep_point(args):
    cfg, variable, value = args
    c = cfg.with_value(variable, value)
    if c.sweep.engine == "numeric":
        res = numeric_crlb(c).result
    else:
        res = closed_crlb(c)
    return [value] + bound_row(res, c.scene.carrier)


def run_sweep(cfg: ExperimentConfig, out: Path, seed: int, workers: int | None = None) -> Path:
    sw = cfg.sweep
    if sw.variable is None:
        raise ConfigurationError("config has no [sweep] variable")
    jobs = [(cfg, sw.variable, v) for v in sw.values]
    # map keeps sweep order; the single writer below sees rows in that order
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(_sweep_point, jobs))
    path = out / f"{cfg.name}_sweep.csv"
    return write_csv(path, [sw.variable] + BOUND_COLUMNS, rows, seed)


def run_verify(cfg: ExperimentConfig, signal: Path | None = None) -> tuple[bool, list[str]]:
    """Oracle check of the config; returns ``(ok, report lines)``."""
    if signal is not None:
        sig = read_signal(signal)
        scene = _scene(cfg, sig.energy)
        num = crlb_from_draws([efim(fim_from_signal(sig, baseline_scene(scene)))])
        run = NumericRun(
            num,
            closed_crlb(dataclasses.replace(cfg, va=dataclasses.replace(cfg.va, scheme=None))),
            [coupling_report(sig, scene.tau)],
            [sig.energy],
            cfg.waveform.B,
            cfg.waveform.family,
        )
    else:
        run = numeric_crlb(cfg)
    checks = judge(run)
    lines = [f"{'PASS' if ok else 'FAIL'} {name} = {val:.4g} (limit {lim:.4g})" for name, val, lim, ok in checks]
    fails = [c for c in checks if not c[3]]
    if fails:
        worst = max(fails, key=lambda c: c[1] / c[2] if c[2] else math.inf)
        lines.append(f"worst offender: {worst[0]}")
    lines.append(f"im_c1 (first draw) = {run.coupling[0]['im_c1']:.4g}")
    return not fails, lines


# --------------------------------------------------------------------------
# figures
# --------------------------------------------------------------------------


def _default_req(**kw) -> ClosedFormRequest:
    base = dict(B=DEFAULT_B, T_F=DEFAULT_T_F, n_r=DEFAULT_N, gamma=db_to_linear(DEFAULT_GAMMA_DB))
    base.update(kw)
    return ClosedFormRequest(**base)


def figure_rows(fig_id: str) -> tuple[list[str], list[list]]:
    """Header and rows for one figure, all from closed forms at the default scenario."""
    carrier = CarrierConfig(DEFAULT_F_C)
    if fig_id == "fig1":
        header = ["K", "c_r_exact_m2", "c_r_approx_m2", "c_v_exact_m2_s2", "c_v_approx_m2_s2", "exact_over_approx"]
        rows = []
        for k in range(2, 201):
            r = crlb_fmcw(_default_req(K=k, approx_large_k=True))
            rows.append(
                [
                    k,
                    crlb_delay_to_range(r.c_tau),
                    crlb_delay_to_range(r.extras["c_tau_approx"]),
                    crlb_doppler_to_velocity(r.c_fd, carrier),
                    crlb_doppler_to_velocity(r.extras["c_fd_approx"], carrier),
                    r.extras["exact_over_approx"],
                ]
            )
        return header, rows
    if fig_id == "fig2":
        header = ["alpha", "c_r_rrc_m2", "c_r_rc_m2", "c_r_rect_m2", "c_r_sinc_m2", "factor_rrc", "factor_rc", "factor_rect"]
        rect = crlb_delay_to_range(crlb_pmcw(_default_req(pulse=Rect())).c_tau)
        sinc = crlb_delay_to_range(crlb_pmcw(_default_req(pulse=Sinc())).c_tau)
        rows = []
        for a in np.linspace(0.01, 1.0, 100).tolist():
            rrc = crlb_pmcw(_default_req(pulse=RRC(a)))
            rc = crlb_pmcw(_default_req(pulse=RC(a)))
            rows.append(
                [
                    a,
                    crlb_delay_to_range(rrc.c_tau),
                    crlb_delay_to_range(rc.c_tau),
                    rect,
                    sinc,
                    rrc.extras["pulse_factor"],
                    rc.extras["pulse_factor"],
                    pulse_factor(Rect()),
                ]
            )
        return header, rows
    if fig_id == "fig3":
        header = ["n", "ratio_r_vs_L", "ratio_v_vs_K"]
        rows = []
        for n in range(2, 301):
            disc = crlb_ofdm_discrete(_default_req(K=n, L=n))
            rows.append([n, disc.extras["ratio_tau"], disc.extras["ratio_fd"]])
        return header, rows
    if fig_id == "fig4":
        header = ["scheme", "n_t", "beta", "r_tau", "r_fd", "r_theta_exact", "r_theta_approx"]
        rows = []
        for n_t in (2, 4, 8, 16):
            for name, scheme in (("TDM", ITDM()), ("FDM", BFDM())):
                rows.append((name, n_t, None, va_crlb_ratios(scheme, n_t, n_r=DEFAULT_N)))
            for beta in (2, 4, 8):
                rows.append(("CDM", n_t, beta, va_crlb_ratios(CDM(beta), n_t, n_r=DEFAULT_N)))
        flat = [
            [n, t, b, r.r_tau, r.r_fd, r.r_theta_exact, r.r_theta_approx] for n, t, b, r in rows
        ]
        return header, flat
    raise ConfigurationError(f"unknown figure {fig_id!r}; choose fig1..fig4")


_PLOTS = {
    "fig1": ("K", ["c_r_exact_m2", "c_r_approx_m2"], True, "FMCW range CRLB, exact vs large-K"),
    "fig2": ("alpha", ["c_r_rrc_m2", "c_r_rc_m2", "c_r_rect_m2", "c_r_sinc_m2"], True, "PMCW range CRLB by pulse"),
    "fig3": ("n", ["ratio_r_vs_L", "ratio_v_vs_K"], False, "OFDM continuous / discrete CRLB"),
    "fig4": ("n_t", ["r_tau", "r_theta_exact"], True, "VA / non-VA CRLB ratios"),
}


def run_figure(fig_id: str, out: Path, seed: int = 0, fmt: str = "csv") -> list[Path]:
    header, rows = figure_rows(fig_id)
    path = write_csv(out / f"{fig_id}.csv", header, rows, seed)
    written = [path]
    if fmt == "csv+plot":
        x, ys, logy, title = _PLOTS[fig_id]
        if fig_id == "fig4":
            written.append(_plot_fig4(path, rows))
        else:
            written.append(plot_csv(path, x, ys, logy=logy, title=title))
    return written


def _plot_fig4(path: Path, rows: list[list]) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "isac-crlb"
    fig, ax = plt.subplots(figsize=(6, 4))
    series: dict[str, list] = {}
    for name, n_t, beta, r_tau, *_ in rows:
        label = name if beta is None else f"{name} beta={beta}"
        series.setdefault(label, []).append((n_t, r_tau))
    for label, pts in series.items():
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", label=label)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("N_T")
    ax.set_ylabel("delay CRLB ratio")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    out = path.with_suffix(".svg")
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="64-bit seed for all random draws")
    p.add_argument("--format", choices=("csv", "csv+plot"), default=None)
    p.add_argument("--oversample", type=int, default=None, help="fs = oversample * B")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isac-crlb", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("figure", help="reproduce one figure as CSV")
    p.add_argument("fig_id", choices=("fig1", "fig2", "fig3", "fig4"))
    _common(p)
    for name, helptext in (
        ("verify", "numeric oracle vs closed form"),
        ("sweep", "one-parameter sweep"),
        ("crlb", "single-point closed-form bounds"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", type=Path)
        _common(p)
        if name == "verify":
            p.add_argument("--signal", type=Path, default=None, help="binary signal file to check")
    return ap


def _apply_overrides(cfg: ExperimentConfig, ns: argparse.Namespace) -> ExperimentConfig:
    run = cfg.run
    if ns.seed is not None:
        run = dataclasses.replace(run, seed=ns.seed)
    if ns.oversample is not None:
        if ns.oversample < 1:
            raise ConfigurationError("oversample must be >= 1")
        run = dataclasses.replace(run, oversample=ns.oversample)
    out = cfg.output
    if ns.format is not None:
        out = dataclasses.replace(out, formats=ns.format)
    if ns.out is not None:
        out = dataclasses.replace(out, directory=str(ns.out))
    return dataclasses.replace(cfg, run=run, output=out)


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        if ns.command == "figure":
            out = ns.out or Path("out")
            for p in run_figure(ns.fig_id, out, ns.seed or 0, ns.format or "csv"):
                print(p)
            return EXIT_OK
        cfg = _apply_overrides(load_config(ns.config), ns)
        out = Path(cfg.output.directory)
        seed = cfg.run.seed
        if ns.command == "crlb":
            print(run_crlb(cfg, out, seed))
        elif ns.command == "sweep":
            path = run_sweep(cfg, out, seed)
            print(path)
            if cfg.output.formats == "csv+plot":
                print(plot_csv(path, cfg.sweep.variable, BOUND_COLUMNS[:3], logy=True, title=cfg.name))
        else:
            ok, lines = run_verify(cfg, ns.signal)
            print("\n".join(lines))
            print("status: " + ("pass" if ok else "fail"))
            return EXIT_OK if ok else EXIT_TOLERANCE
        return EXIT_OK
    except (ConfigurationError, SamplingError, TruncationError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DegenerateSceneError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
