"""Command-line front end.

Exit codes: 0 success, 1 validation or solver failure, 2 usage/input error.

State sources are either a named factory (``ghz:N``, ``w:N``, ``bell``,
``product:t1,p1;t2,p2`` with angles in radians) or a path to a state file::

    # optional comment / manifest lines
    {"n_spins": 2, "amplitudes": [[re, im], [re, im], [re, im], [re, im]]}
"""
from __future__ import annotations

import argparse
import datetime as _dt
import itertools
import json
import logging
import os
import platform
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__, entanglement, ising, phase_space
from .hilbert import (
    PureState,
    bell_state,
    ghz_state,
    purity,
    random_density,
    random_state,
    w_state,
)

log = logging.getLogger("spinphase")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
RENORMALIZE_LIMIT = 1e-6
VALIDATE_TOL = 1e-9


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    """12 significant digits, always with a '.' decimal point."""
    return format(float(x), ".12g")


# -- manifest and atomic output -----------------------------------------------

def manifest(command: str, parameters: dict, seed=None) -> list[str]:
    versions = (f"spinphase={__version__} numpy={np.__version__} "
                f"python={platform.python_version()}")
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return [
        f"# command: {command}",
        f"# parameters: {json.dumps(parameters, sort_keys=True)}",
        f"# seed: {json.dumps(seed)}",
        f"# versions: {versions}",
        f"# timestamp: {stamp}",
    ]


def write_atomic(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- state files and factories ------------------------------------------------

def dumps_state(state: PureState, header=()) -> str:
    body = {"n_spins": state.n_spins,
            "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes]}
    return "".join(line + "\n" for line in header) + json.dumps(body) + "\n"


def loads_state(text: str) -> PureState:
    payload = "\n".join(line for line in text.splitlines() if not line.lstrip().startswith("#"))
    try:
        doc = json.loads(payload)
        n = doc["n_spins"]
        pairs = doc["amplitudes"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed state file: {exc}") from exc
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise UsageError("n_spins must be a positive integer")
    if len(pairs) != 1 << n:
        raise UsageError(f"expected {1 << n} amplitudes for {n} spins, got {len(pairs)}")
    try:
        amps = np.array([complex(float(re), float(im)) for re, im in pairs])
    except (TypeError, ValueError) as exc:
        raise UsageError("amplitudes must be [re, im] number pairs") from exc
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > RENORMALIZE_LIMIT:
        raise UsageError(f"state norm {norm!r} deviates from 1 by more than {RENORMALIZE_LIMIT}")
    if abs(norm ** 2 - 1.0) > 1e-12:
        amps = amps / norm
    return PureState(n, amps)


def _positive_int(text: str, what: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise UsageError(f"{what} needs an integer, got {text!r}") from None
    if n < 1:
        raise UsageError(f"{what} needs a positive integer")
    return n


def resolve_state(source: str) -> PureState:
    name, _, arg = source.partition(":")
    name = name.lower()
    if name == "ghz":
        return ghz_state(_positive_int(arg, "ghz"))
    if name == "w":
        return w_state(_positive_int(arg, "w"))
    if name == "bell" and not arg:
        return bell_state()
    if name == "product":
        try:
            pairs = [[float(v) for v in item.split(",")] for item in arg.split(";") if item]
            point = phase_space.PhasePoint.from_pairs(pairs)
        except ValueError as exc:
            raise UsageError(f"bad product angles {arg!r}: {exc}") from exc
        return phase_space.coherent_state(point)
    path = Path(source)
    if not path.is_file():
        raise UsageError(f"{source!r} is neither a named state nor a readable file")
    return loads_state(path.read_text(encoding="utf-8"))


# -- commands -------------------------------------------------------------------

def cmd_second_moment(args) -> int:
    state = resolve_state(args.source)
    options = {}
    if args.method == "quadrature":
        options = dict(nodes_theta=args.nodes_theta, nodes_phi=args.nodes_phi, verify=args.verify)
    elif args.method == "montecarlo":
        options = dict(samples=args.samples, seed=args.seed)
    report = phase_space.second_moment(state, args.method, **options)
    seed = args.seed if args.method == "montecarlo" else None
    lines = manifest("second-moment", {"source": args.source, "method": args.method, **{
        k: v for k, v in options.items() if k != "seed"}}, seed)
    lines += [f"P: {fmt(report.value)}", f"method: {report.method.value}"]
    if report.stderr is not None:
        lines.append(f"stderr: {fmt(report.stderr)}")
    lines.append(f"samples_or_nodes: {report.samples_or_nodes}")
    print("\n".join(lines))
    return EXIT_OK


MEASURES = ("concurrence", "pairwise", "one-vs-rest", "tangle", "cN", "cbar2")


def entanglement_report(state: PureState, measures=None) -> list[tuple[str, float]]:
    n = state.n_spins
    if n < 2:
        raise UsageError("entanglement measures need at least two spins")
    applicable = {"concurrence": n == 2, "tangle": n == 3}
    if measures is None:
        measures = [m for m in MEASURES if applicable.get(m, True)]
    for m in measures:
        if m not in MEASURES:
            raise UsageError(f"unknown measure {m!r}; choose from {', '.join(MEASURES)}")
        if not applicable.get(m, True):
            raise UsageError(f"measure {m!r} does not apply to {n} spins")
    out = []
    if "concurrence" in measures:
        c = entanglement.concurrence_two_spin(state)
        out += [("C", c), ("P_from_C", 1 - c * c / 4)]
    if "pairwise" in measures:
        for i, j in itertools.combinations(range(n), 2):
            out.append((f"C_{i + 1},{j + 1}", entanglement.concurrence_two_spin_pair(state, i, j)))
    if "one-vs-rest" in measures:
        for i in range(n):
            out.append((f"C2_{i + 1}(rest)", entanglement.one_vs_rest_concurrence_sq(state, i)))
    if "tangle" in measures:
        out.append(("tau", entanglement.three_tangle(state)))
    if "cN" in measures:
        c_n = entanglement.multipartite_concurrence(state)
        out += [("cN", c_n), ("P_from_cN", 1 - c_n ** 2 / 4)]
    if "cbar2" in measures:
        cbar2 = entanglement.concurrence_vector_length_sq(state)
        out += [("Cbar2", cbar2), ("P_from_Cbar", 1 - cbar2 / 2 ** n)]
    if n == 3:
        pairs = sum(entanglement.concurrence_two_spin_pair(state, i, j) ** 2
                    for i, j in itertools.combinations(range(3), 2))
        rest = sum(entanglement.one_vs_rest_concurrence_sq(state, i) for i in range(3))
        out += [("P_pairwise_tangle", 1 - pairs / 4 - 3 * entanglement.three_tangle(state) / 8),
                ("P_one_vs_rest", 1 - rest / 8),
                ("P_projector", phase_space.second_moment_projector(state).value)]
    return out


def cmd_entanglement(args) -> int:
    state = resolve_state(args.source)
    measures = args.measures.split(",") if args.measures else None
    rows = entanglement_report(state, measures)
    lines = manifest("entanglement", {"source": args.source, "measures": args.measures})
    lines += [f"{name}: {fmt(value)}" for name, value in rows]
    print("\n".join(lines))
    return EXIT_OK


def _angle_range(name: str):
    return (0.0, np.pi) if name.startswith("theta") else (0.0, 2 * np.pi)


def husimi_grid(state: PureState, scan, fixed: dict, resolution: int):
    """Evaluate H on a rectangular grid over the ``scan`` variables.

    Variables are named ``theta<k>`` / ``phi<k>`` with 1-based spin index;
    unscanned angles take their value from ``fixed`` (default 0).
    Returns ``(axes, values)`` with ``values.shape == (resolution,)*len(scan)``.
    """
    n = state.n_spins
    names = [f"{v}{k}" for k in range(1, n + 1) for v in ("theta", "phi")]
    if not 1 <= len(scan) <= 3:
        raise UsageError("scan between one and three variables")
    if len(set(scan)) != len(scan):
        raise UsageError("scanned variables must be distinct")
    for v in list(scan) + list(fixed):
        if v not in names:
            raise UsageError(f"unknown variable {v!r}; expected one of {', '.join(names)}")
    if resolution < 2:
        raise UsageError("resolution must be at least 2")
    axes = [np.linspace(*_angle_range(v), resolution) for v in scan]
    mesh = np.meshgrid(*axes, indexing="ij")
    size = mesh[0].size
    thetas = np.empty((size, n))
    phis = np.empty((size, n))
    for k in range(n):
        for arr, var in ((thetas, f"theta{k + 1}"), (phis, f"phi{k + 1}")):
            if var in scan:
                arr[:, k] = mesh[scan.index(var)].ravel()
            else:
                arr[:, k] = fixed.get(var, 0.0)
    if np.any(thetas < 0) or np.any(thetas > np.pi):
        raise UsageError("theta values must lie in [0, pi]")
    values = phase_space.husimi_on_grid(state, thetas, phis)
    return axes, values.reshape(mesh[0].shape)


def _parse_fixed(items) -> dict:
    fixed = {}
    for item in items or []:
        for part in item.split(","):
            name, sep, value = part.partition("=")
            if not sep:
                raise UsageError(f"--fix expects name=value, got {part!r}")
            try:
                fixed[name.strip()] = float(value)
            except ValueError:
                raise UsageError(f"bad value in {part!r}") from None
    return fixed


def cmd_husimi_grid(args) -> int:
    state = resolve_state(args.source)
    scan = [s.strip() for s in args.scan.split(",") if s.strip()]
    fixed = _parse_fixed(args.fix)
    overlap = set(scan) & set(fixed)
    if overlap:
        raise UsageError(f"variables both scanned and fixed: {sorted(overlap)}")
    axes, values = husimi_grid(state, scan, fixed, args.resolution)
    mesh = np.meshgrid(*axes, indexing="ij")
    lines = manifest("husimi-grid", {"source": args.source, "scan": scan, "fixed": fixed,
                                     "resolution": args.resolution})
    lines.append(",".join(scan + ["H"]))
    cols = [m.ravel() for m in mesh] + [values.ravel()]
    lines += [",".join(fmt(c[i]) for c in cols) for i in range(values.size)]
    write_atomic(args.out, "\n".join(lines) + "\n")
    if not args.no_figure:
        from .plotting import plot_husimi_grid
        plot_husimi_grid(axes, values, scan, Path(args.out).with_suffix(".png"))
    print(f"wrote {args.out}")
    return EXIT_OK


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def sweep_config_from_args(args) -> ising.SweepConfig:
    if args.g_steps < 1 or args.g_min <= 0 or args.g_max < args.g_min:
        raise UsageError("need 0 < g-min <= g-max and g-steps >= 1")
    if args.g_steps == 1 and args.g_max != args.g_min:
        raise UsageError("a single g step needs g-min == g-max")
    g_grid = np.round(np.linspace(args.g_min, args.g_max, args.g_steps), 12)
    thetas = _float_list(args.theta_list)
    if args.theta_units == "pi":
        thetas = [np.pi * t for t in thetas]
    try:
        params = ising.IsingParams(n_spins=args.n, j_coupling=args.j,
                                   boundary=ising.Boundary(args.boundary))
        return ising.SweepConfig(params, tuple(float(g) for g in g_grid), tuple(thetas))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


SWEEP_HEADER = "theta,g,energy,gap,P,cN"


def sweep_csv(records, header_lines) -> str:
    lines = list(header_lines) + [SWEEP_HEADER]
    lines += [",".join(fmt(v) for v in (r.theta, r.g, r.energy, r.gap, r.P, r.cN))
              for r in records]
    return "\n".join(lines) + "\n"


def cmd_ising_sweep(args) -> int:
    config = sweep_config_from_args(args)
    if config.params.n_spins > ising.DENSE_CAP:
        raise UsageError(f"--n is capped at {ising.DENSE_CAP} for dense diagonalization")
    try:
        records = ising.sweep(config, spot_check_stride=args.spot_check_stride,
                              workers=args.workers)
    except ising.SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out", "no_figure", "workers")}
    write_atomic(args.out, sweep_csv(records, manifest("ising-sweep", params)))
    if not args.no_figure:
        from .plotting import plot_sweep
        plot_sweep(records, Path(args.out).with_suffix(".png"),
                   title=f"N={config.params.n_spins}, {config.params.boundary.value}")
    print(f"wrote {args.out} ({len(records)} rows)")
    return EXIT_OK


# -- validation suite -----------------------------------------------------------

def _two_spin_closed_form(state):
    a, b, c, d = state.amplitudes
    return 1 - abs(a * d - b * c) ** 2


def validation_table(n_max: int, trials: int, seed: int) -> list[dict]:
    """Maximum deviation of every identity over seeded random states."""
    if n_max < 2:
        raise UsageError("--n-max must be at least 2")
    rng = np.random.default_rng(seed)
    proj = lambda s: phase_space.second_moment_projector(s).value  # noqa: E731
    dev: dict[tuple[str, int], float] = {}

    def record(name, n, value):
        dev[name, n] = max(dev.get((name, n), 0.0), abs(value))

    for n in range(2, n_max + 1):
        for _ in range(trials):
            s = random_state(n, rng)
            p = proj(s)
            if n == 2:
                c = entanglement.concurrence_two_spin(s)
                record("two_spin_closed_form", n, p - _two_spin_closed_form(s))
                record("P_vs_two_spin_concurrence", n, p - (1 - c * c / 4))
            if n == 3:
                pairs = sum(entanglement.concurrence_two_spin_pair(s, i, j) ** 2
                            for i, j in itertools.combinations(range(3), 2))
                rest = sum(entanglement.one_vs_rest_concurrence_sq(s, i) for i in range(3))
                tau = entanglement.three_tangle(s)
                record("three_spin_pairwise_tangle", n, p - (1 - pairs / 4 - 3 * tau / 8))
                record("three_spin_one_vs_rest", n, p - (1 - rest / 8))
            c_n = entanglement.multipartite_concurrence(s)
            cbar2 = entanglement.concurrence_vector_length_sq(s)
            record("P_vs_cN", n, p - (1 - c_n ** 2 / 4))
            record("cN_vs_concurrence_length", n, c_n ** 2 - 2.0 ** (2 - n) * cbar2)
            record("P_vs_concurrence_length", n, p - (1 - cbar2 / 2 ** n))
            if n <= 3:
                q = phase_space.second_moment_quadrature(s).value
                record("quadrature_vs_projector", n, p - q)
    for n in range(1, min(n_max, 4) + 1):
        for _ in range(trials):
            rho = random_density(n, rng)
            lhs = phase_space.trace_ps_minus_pa(rho, check=False)
            record("Ps_minus_Pa_trace_vs_purity", n, lhs - purity(rho))
            even = sum(phase_space.antisymmetric_sector_sum(rho, k) for k in range(2, n + 1, 2))
            record("mixed_even_sector_split", n,
                   phase_space.second_moment_projector(rho).value - (0.5 * (1 + purity(rho)) - even))
    return [{"identity": name, "n": n, "max_dev": value, "tol": VALIDATE_TOL,
             "ok": value <= VALIDATE_TOL} for (name, n), value in sorted(dev.items())]


def cmd_validate(args) -> int:
    rows = validation_table(args.n_max, args.trials, args.seed)
    lines = manifest("validate", {"n_max": args.n_max, "trials": args.trials}, args.seed)
    lines.append(f"{'identity':<30} {'N':>2} {'max_dev':>12} {'tol':>8}  status")
    for r in rows:
        lines.append(f"{r['identity']:<30} {r['n']:>2} {r['max_dev']:>12.3e} "
                     f"{r['tol']:>8.0e}  {'PASS' if r['ok'] else 'FAIL'}")
    failed = [r for r in rows if not r["ok"]]
    lines.append(f"{len(rows) - len(failed)}/{len(rows)} identities within tolerance")
    print("\n".join(lines))
    return EXIT_FAIL if failed else EXIT_OK


def cmd_export_state(args) -> int:
    state = resolve_state(args.source)
    write_atomic(args.out, dumps_state(state, manifest("export-state", {"source": args.source})))
    print(f"wrote {args.out}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinphase", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sm = sub.add_parser("second-moment", help="second moment P of the Husimi function")
    sm.add_argument("source")
    sm.add_argument("--method", choices=[m.value for m in phase_space.Method], default="projector")
    sm.add_argument("--nodes-theta", type=int, default=3)
    sm.add_argument("--nodes-phi", type=int, default=5)
    sm.add_argument("--verify", action="store_true", help="re-run quadrature with doubled nodes")
    sm.add_argument("--samples", type=int, default=1_000_000)
    sm.add_argument("--seed", type=int, default=0)
    sm.set_defaults(func=cmd_second_moment)

    en = sub.add_parser("entanglement", help="concurrence-type measures")
    en.add_argument("source")
    en.add_argument("--measures", help=f"comma list from {','.join(MEASURES)}")
    en.set_defaults(func=cmd_entanglement)

    hg = sub.add_parser("husimi-grid", help="Husimi function on a grid of angles")
    hg.add_argument("source")
    hg.add_argument("--scan", required=True, help="e.g. theta1,theta2")
    hg.add_argument("--fix", action="append", help="e.g. phi1=0.3,phi2=-0.3")
    hg.add_argument("--resolution", type=int, default=41)
    hg.add_argument("--out", required=True)
    hg.add_argument("--no-figure", action="store_true")
    hg.set_defaults(func=cmd_husimi_grid)

    sw = sub.add_parser("ising-sweep", help="ground-state P over (theta, g)")
    sw.add_argument("--n", type=int, default=8)
    sw.add_argument("--j", type=float, default=1.0)
    sw.add_argument("--theta-list", default=",".join(str(t) for t in ising.DEFAULT_THETAS_OVER_PI))
    sw.add_argument("--theta-units", choices=("pi", "rad"), default="pi")
    sw.add_argument("--g-min", type=float, default=0.05)
    sw.add_argument("--g-max", type=float, default=3.0)
    sw.add_argument("--g-steps", type=int, default=60)
    sw.add_argument("--boundary", choices=[b.value for b in ising.Boundary], default="periodic")
    sw.add_argument("--spot-check-stride", type=int, default=10)
    sw.add_argument("--workers", type=int, default=None)
    sw.add_argument("--out", required=True)
    sw.add_argument("--no-figure", action="store_true")
    sw.set_defaults(func=cmd_ising_sweep)

    va = sub.add_parser("validate", help="check all identities on random states")
    va.add_argument("--n-max", type=int, default=8)
    va.add_argument("--trials", type=int, default=100)
    va.add_argument("--seed", type=int, default=0)
    va.set_defaults(func=cmd_validate)

    ex = sub.add_parser("export-state", help="write a named state as a state file")
    ex.add_argument("source")
    ex.add_argument("--out", required=True)
    ex.set_defaults(func=cmd_export_state)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
