"""Command-line entry point.

Every output starts with the tool version and the fully resolved
configuration, so re-running with that configuration reproduces the file.
Floats are written with ``repr`` (shortest round-trip form) everywhere;
results that carry no information are written as ``no-information``.

Exit codes: 0 success, 1 usage error, 2 tolerance breach, 3 degenerate input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import warnings

import numpy as np

from kmetro import __version__, bounds, oracle, protocol_sim
from kmetro import exact_moments as em
from kmetro.spin_model import CouplingSpec, ExperimentClock, SingleBodySpectrum, nearest_half_integer

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE, EXIT_DEGENERATE = 0, 1, 2, 3
NO_INFO = "no-information"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# value parsing

_PI_RE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?(?:[eE][+-]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(text) -> float:
    """Radians from ``0.3``, ``pi``, ``-pi/8``, ``3pi/4`` or ``3*pi/4``."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _PI_RE.match(text)
    if m:
        coef = m.group(1)
        if coef in ("", "+"):
            c = 1.0
        elif coef == "-":
            c = -1.0
        else:
            c = float(coef)
        den = float(m.group(2)) if m.group(2) else 1.0
        return c * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def parse_range(text, default_points=None):
    """``a:b`` or ``a:b:step`` (angles allowed) -> ``(start, stop, step_or_None)``."""
    parts = str(text).split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"range must be a:b or a:b:step, got {text!r}")
    vals = [parse_angle(p) for p in parts]
    return vals[0], vals[1], (vals[2] if len(parts) == 3 else None)


def parse_spin(text) -> float:
    J = float(text)
    if not J > 0:
        raise argparse.ArgumentTypeError(f"J must be positive, got {text!r}")
    return nearest_half_integer(J)


def parse_levels(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must be comma-separated numbers, got {text!r}") from None


def grid_from(start, stop, step, points):
    if step is not None:
        if step <= 0:
            raise ValueError("step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        grid = start + step * np.arange(count)
    else:
        grid = np.linspace(start, stop, points)
    # a symmetric range should hit 0 exactly, not 5e-17
    span = max(abs(start), abs(stop), 1e-300)
    grid[np.abs(grid) < 1e-12 * span] = 0.0
    return grid


def fmt(x) -> str:
    if isinstance(x, em.NoInformation):
        return NO_INFO
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return repr(x) if math.isfinite(x) else NO_INFO
    if x is None:
        return ""
    return str(x)


def jsonable(x):
    if isinstance(x, em.NoInformation):
        return NO_INFO
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else NO_INFO
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# output


class Report:
    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.columns: list[str] = []
        self.rows: list[list] = []
        self.summary: dict = {}

    def render(self, fmt_name: str) -> str:
        if fmt_name == "json":
            doc = {
                "tool": "kmetro",
                "version": __version__,
                "command": self.command,
                "config": self.config,
                "summary": jsonable(self.summary),
                "columns": self.columns,
                "rows": [[jsonable(v) for v in r] for r in self.rows],
            }
            return json.dumps(doc, indent=2) + "\n"
        buf = io.StringIO()
        buf.write(f"# tool: kmetro {__version__}\n")
        buf.write(f"# command: {self.command}\n")
        buf.write(f"# config: {json.dumps(self.config, sort_keys=True)}\n")
        for k, v in self.summary.items():
            buf.write(f"# {k}: {fmt(v)}\n")
        if self.columns:
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([fmt(v) for v in r])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def cmd_bound(a) -> tuple[Report, int]:
    spectrum = SingleBodySpectrum(tuple(a.levels))
    coupling = CouplingSpec(a.k, a.n, not a.no_self_interaction)
    clock = ExperimentClock(1.0, a.t, a.nu)
    ext = bounds.extreme_eigenvalues(spectrum, coupling)
    ent = bounds.qcrb_entangled(ext, clock)
    prod = bounds.optimal_product_state(spectrum, a.k, a.n, a.t, a.nu)
    rep = Report("bound", {})
    rep.columns = ["quantity", "value"]
    rep.rows = [
        ["lambda_cap_max", ext.lambda_cap_max],
        ["lambda_cap_min", ext.lambda_cap_min],
        ["counts_max", " ".join(map(str, ext.achieving_counts_max))],
        ["counts_min", " ".join(map(str, ext.achieving_counts_min))],
        ["case", ext.case],
        ["delta", ext.delta],
        ["epsilon", "unknown" if ext.epsilon is None else ext.epsilon],
        ["extremes_exact", ext.exact],
        ["entangled_delta_gamma", ent],
        ["product_x_plus", prod.x_plus],
        ["product_x_minus", prod.x_minus],
        ["product_beta_opt", prod.beta_opt],
        ["product_branch", prod.global_branch],
        ["product_variance", prod.variance],
        ["product_delta_gamma", prod.qcrb],
    ]
    return rep, EXIT_OK


def cmd_sensitivity(a) -> tuple[Report, int]:
    start, stop, step = a.phi
    phis = grid_from(start, stop, step, a.points)
    J, beta = a.J, a.beta
    exact = em.sensitivity_scan(J, beta, phis, a.axis)
    fringe = np.sqrt(em.fringe_delta_phi_sq(J, beta, phis, a.axis))
    gauss = np.array([em.sensitivity_gaussian(J, beta, p, a.axis).delta_phi for p in phis])
    s2b = abs(math.sin(2.0 * beta))
    line = 1.0 / (math.sqrt(2.0) * J**1.5 * s2b) if s2b > 1e-15 else math.inf
    rep = Report("sensitivity", {})
    rep.columns = ["phi", "delta_phi_exact", "delta_phi_fringe", "delta_phi_gaussian", "bound_line"]
    rep.rows = [[float(p), float(e), float(f), float(g), line] for p, e, f, g in zip(phis, exact, fringe, gauss)]
    i = int(np.argmin(exact))
    rep.summary = {"min_phi": float(phis[i]), "min_delta_phi_exact": float(exact[i])}
    return rep, EXIT_OK


def default_beta_grid(axis: str) -> np.ndarray:
    """181 interior points of [0, pi]; pi/2 is dropped for J_y, which has no signal there."""
    grid = np.linspace(0.0, math.pi, 183)[1:-1]
    if axis == "y":
        grid = grid[np.abs(grid - 0.5 * math.pi) > 1e-12]
    return grid


def cmd_scaling(a) -> tuple[Report, int]:
    betas = np.array(a.beta) if a.beta else default_beta_grid(a.axis)
    rep = Report("scaling", {})
    rep.columns = ["beta", "J_lo", "J_hi", "xi"]
    for b in betas:
        try:
            r = em.scaling_exponent(float(b), a.axis, a.J_lo, a.J_hi, a.rule)
            xi = r.xi
        except ValueError as exc:
            if "no information" not in str(exc):
                raise
            xi = em.NoInformation(str(exc))
        rep.rows.append([float(b), a.J_lo, a.J_hi, xi])
    return rep, EXIT_OK


def cmd_moments(a) -> tuple[Report, int]:
    J, beta, phi = a.J, a.beta, a.phi
    if a.model == "exact":
        m = em.moments_exact(J, beta, phi)
    elif a.model == "fringe":
        m = em.fringe_model(J, beta, phi)[0]
    elif a.model == "gaussian":
        m = em.gaussian_envelope_moments(J, beta, phi)
    else:
        from kmetro.spin_model import CoherentPreparation

        m = oracle.collective_moments(oracle.evolve(CoherentPreparation.from_spin(J, beta), phi, a.k))
    rep = Report("moments", {})
    rep.columns = ["quantity", "value"]
    rep.rows = [[k, v] for k, v in m.as_dict().items()]
    return rep, EXIT_OK


def cmd_simulate(a) -> tuple[Report, int]:
    cfg = protocol_sim.TrialConfig(
        J=a.J,
        beta=a.beta,
        phi_true=a.phi_true,
        axis=a.axis,
        nu=a.nu,
        seed=a.seed,
        gamma_t_dephasing=a.gamma_t,
        sampling_mode=a.mode,
        batches=a.batches,
        operating_point=a.op,
    )
    out = protocol_sim.run_estimation(cfg)
    rep = Report("simulate", {})
    rep.columns = ["batch", "phi_est"]
    rep.rows = [[i, e] for i, e in enumerate(out.estimates)]
    rep.summary = {
        "phi_est_mean": out.phi_est,
        "empirical_delta_phi": out.empirical_delta_phi,
        "expected_delta_phi": out.expected_delta_phi,
        "sample_mean": out.sample_mean,
        "sample_variance": out.sample_variance,
        "slope_used": out.slope_used,
        "sampling_mode": out.sampling_mode,
    }
    return rep, EXIT_OK


def cmd_feedback(a) -> tuple[Report, int]:
    cfg = protocol_sim.FeedbackConfig(a.f, a.nu, a.L, a.phi_true, a.seed, a.beta)
    rec = protocol_sim.adaptive_feedback(cfg)
    rep = Report("feedback", {})
    rep.columns = ["l", "J_l", "delta_phi_l", "estimate", "residual", "note"]
    rep.rows = [[s.l, s.J, s.delta_phi, s.estimate, s.residual, s.note] for s in rec.steps]
    rep.summary = {
        "phi_true": rec.phi_true,
        "phi_est": rec.phi_est,
        "final_error": rec.final_error,
        "target": rec.target,
        "success": rec.success,
        "N": rec.N,
        "N_closed_form": rec.N_closed_form,
        "rounding_slack": rec.rounding_slack,
        "last_step_fraction": rec.last_step_fraction,
        "overhead_factor": protocol_sim.overhead_factor(a.f),
    }
    return rep, EXIT_OK


def cmd_decohere(a) -> tuple[Report, int]:
    spec = em.DecoherenceSpec.from_tau2(a.tau2, a.T)
    start, stop, step = a.scan_t
    ts = grid_from(start, stop, step, a.points)
    if np.any(ts <= 0):
        raise ValueError("evolution times must be positive")
    scan = em.decoherence_scan(a.J, a.beta, spec, ts)
    _, t_opt, best = em.decohered_sensitivity(a.J, a.beta, spec, ts[0], a.T / ts[0])
    i = int(np.argmin(scan))
    rep = Report("decohere", {})
    rep.columns = ["t", "nu", "delta_gamma"]
    rep.rows = [[float(t), a.T / float(t), float(d)] for t, d in zip(ts, scan)]
    rep.summary = {
        "argmin_t": float(ts[i]),
        "min_delta_gamma": float(scan[i]),
        "optimal_t": t_opt,
        "delta_gamma_at_optimal_t": best,
    }
    return rep, EXIT_OK


def cmd_oracle_check(a) -> tuple[Report, int]:
    r = oracle.compare_grid(a.max_2J, a.grid, rtol=a.rtol, atol=a.atol)
    rep = Report("oracle-check", {})
    rep.summary = {
        "points": r.points,
        "max_relative_error": r.max_relative,
        "max_tolerance_ratio": r.max_ratio,
        "worst": r.worst,
        "passed": r.passed,
    }
    return rep, EXIT_OK if r.passed else EXIT_TOLERANCE


COMMANDS = {
    "bound": cmd_bound,
    "sensitivity": cmd_sensitivity,
    "scaling": cmd_scaling,
    "moments": cmd_moments,
    "simulate": cmd_simulate,
    "feedback": cmd_feedback,
    "decohere": cmd_decohere,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> _Parser:
    parser = _Parser(prog="kmetro", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"kmetro {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror the flag names; flags win")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", default="-", help="output path (default: stdout)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bound", parents=[common], help="entangled and product-state bounds")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--levels", type=parse_levels, default=[-0.5, 0.5])
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--nu", type=int, default=1)
    p.add_argument("--no-self-interaction", action="store_true")

    p = sub.add_parser("sensitivity", parents=[common], help="delta-phi scan over phi")
    p.add_argument("--J", type=parse_spin, required=True)
    p.add_argument("--beta", type=parse_angle, default=math.pi / 4)
    p.add_argument("--axis", choices=("x", "y"), default="y")
    p.add_argument("--phi", type=parse_range, default=parse_range("-pi/8:pi/8"))
    p.add_argument("--points", type=int, default=2001)

    p = sub.add_parser("scaling", parents=[common], help="scaling exponent against beta")
    p.add_argument("--axis", choices=("x", "y"), default="y")
    p.add_argument("--beta", type=parse_angle, action="append", help="repeatable; default 181-point grid")
    p.add_argument("--J-lo", dest="J_lo", type=parse_spin, default=1e5)
    p.add_argument("--J-hi", dest="J_hi", type=parse_spin, default=1e7)
    p.add_argument("--rule", choices=sorted(em.OPERATING_RULES), default=None)

    p = sub.add_parser("moments", parents=[common], help="first and second moments at one point")
    p.add_argument("--J", type=parse_spin, required=True)
    p.add_argument("--beta", type=parse_angle, required=True)
    p.add_argument("--phi", type=parse_angle, required=True)
    p.add_argument("--model", choices=("exact", "fringe", "gaussian", "oracle"), default="exact")
    p.add_argument("--k", type=int, default=2, help="coupling degree (oracle model only)")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo scaled-mean estimation")
    p.add_argument("--J", type=parse_spin, required=True)
    p.add_argument("--beta", type=parse_angle, default=math.pi / 4)
    p.add_argument("--phi-true", dest="phi_true", type=parse_angle, required=True)
    p.add_argument("--axis", choices=("x", "y"), default="y")
    p.add_argument("--nu", type=int, default=10_000)
    p.add_argument("--batches", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma-t", dest="gamma_t", type=float, default=0.0)
    p.add_argument("--mode", choices=("auto", "exact", "gaussian"), default="auto")
    p.add_argument("--op", type=parse_angle, default=0.0, help="operating point")

    p = sub.add_parser("feedback", parents=[common], help="adaptive bit-by-bit estimation")
    p.add_argument("--f", type=float, default=8.0)
    p.add_argument("--nu", type=int, default=100)
    p.add_argument("--L", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phi-true", dest="phi_true", type=parse_angle, default=None)
    p.add_argument("--beta", type=parse_angle, default=math.pi / 4)

    p = sub.add_parser("decohere", parents=[common], help="dephased sensitivity against evolution time")
    p.add_argument("--J", type=parse_spin, required=True)
    p.add_argument("--beta", type=parse_angle, default=math.pi / 4)
    p.add_argument("--tau2", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--scan-t", dest="scan_t", type=parse_range, default=parse_range("0.05:2.0:0.05"))
    p.add_argument("--points", type=int, default=40)

    p = sub.add_parser("oracle-check", parents=[common], help="closed forms against dense simulation")
    p.add_argument("--max-2J", dest="max_2J", type=int, default=50)
    p.add_argument("--grid", type=int, default=16)
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-12)
    return parser


_CONVERTERS = {
    "beta": parse_angle,
    "phi": parse_angle,
    "phi_true": parse_angle,
    "op": parse_angle,
    "J": parse_spin,
    "J_lo": parse_spin,
    "J_hi": parse_spin,
    "levels": parse_levels,
}


def _apply_config(parser: _Parser, argv, command: str, path: str):
    """Re-parse with the config file's values as defaults, so explicit flags still win."""
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[command]
    known = {a.dest for a in sub._actions}
    defaults = {}
    for key, val in cfg.items():
        dest = key.replace("-", "_").lstrip("_")
        if dest in ("command", "config"):
            continue
        if dest not in known:
            raise UsageError(f"unknown config key {key!r} for {command}")
        if dest in ("phi", "scan_t") and isinstance(val, str) and ":" in val:
            val = parse_range(val)
        elif dest == "beta" and command == "scaling":
            val = [parse_angle(v) for v in (val if isinstance(val, list) else [val])]
        elif dest in _CONVERTERS and val is not None:
            val = _CONVERTERS[dest](val)
        defaults[dest] = val
    for action in sub._actions:
        if action.dest in defaults:
            action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


# options whose values may start with "-" (negative angles, level lists)
_SIGNED_OPTIONS = {"--levels", "--phi", "--beta", "--phi-true", "--op", "--scan-t"}


def _glue_signed(argv):
    """``--phi -pi/8:pi/8`` -> ``--phi=-pi/8:pi/8`` so argparse does not take
    the value for an option."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _SIGNED_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1] != "--":
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _find_config(argv, parser):
    """``(config path, command)`` ahead of the full parse, so a config file
    can supply required options."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return None, None
    commands = parser._subparsers._group_actions[0].choices
    command = next((tok for tok in argv if tok in commands), None)
    if command is None:
        raise UsageError("kmetro: error: --config needs a command")
    return known.config, command


def resolved_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("config", "output", "format")}
    return jsonable(cfg)


def main(argv=None) -> int:
    argv = _glue_signed(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        config_path, command = _find_config(argv, parser)
        if config_path:
            args = _apply_config(parser, argv, command, config_path)
        else:
            args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, argparse.ArgumentTypeError) as exc:
        print(f"kmetro: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    for name in ("J", "J_lo", "J_hi"):
        if hasattr(args, name) and getattr(args, name) is not None:
            print(f"kmetro: {name} = {getattr(args, name)!r}", file=sys.stderr)

    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            report, code = COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"kmetro: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    for w in caught:
        print(f"kmetro: warning: {w.message}", file=sys.stderr)

    report.config = resolved_config(args)
    text = report.render(args.format)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
