"""Command-line front end: ``zerorange <command> CONFIG``.

A configuration is a JSON object.  Every command accepts the common keys

``command``   one of ``spectrum``, ``resolvent``, ``merge-scan``, ``critical``,
              ``form-probe``, ``verify`` (must match the subcommand if given)
``output``    output path (optional; the table is printed when absent)
``format``    ``"csv"`` (default) or ``"json"``
``seed``      integer seed recorded in the header (used by ``form-probe``)

plus the command-specific keys listed in :data:`SCHEMAS`.  Unknown keys are
rejected.  Exit status: 0 success, 1 configuration error, 2 numerical
failure.  Failures also write a one-row diagnostic table (``status``,
``error``, ``key``, ``message``) to the output path when one is known.

The environment variable ``ZERORANGE_MAX_WORKERS`` caps worker threads.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field

import click
import numpy as np

from . import __version__
from .criticality import gamma_c_bosons, gamma_hat_c
from .errors import ZeroRangeError
from .kernels import MassModel, ThetaKind, ThetaProfile
from .limits import effective_alpha_merge, g_shift_norm, g_shift_norm_momentum, merge_scan, verify_identity
from .manybody import GaussianCharge, phi_form_estimate
from .pointop import CenterConfig, resolvent_apply
from .sources import GaussianSource
from .spectral import bound_states
from .tables import TableIOError, emit_table

__all__ = ["RunConfig", "ConfigError", "parse_config", "run_command", "main", "SCHEMAS"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

COMMON_KEYS = {"command", "output", "format", "seed"}

# key -> required?
SCHEMAS = {
    "spectrum": {"centers": True, "strengths": True, "profile": False, "rtol": False},
    "resolvent": {"centers": True, "strengths": True, "profile": False, "lambda": True,
                  "source": False, "points": True},
    "merge-scan": {"alphas": True, "profile": True, "radii": True, "lambda": False, "source": False},
    "critical": {"N": True, "eta_grid": True},
    "form-probe": {"charges": True, "alphas": True, "gamma": True, "profile": True, "eta": True,
                   "lambda": True, "samples": False},
    "verify": {"identities": False},
}

IDENTITY_NAMES = ("MomentumDouble", "LogIntegral", "EtaSqrtBound", "GShiftNorm", "MergeRule")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the first offending key."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


@dataclass
class RunConfig:
    command: str
    params: dict
    output: str | None = None
    format: str = "csv"
    seed: int = 0
    raw: dict = field(default_factory=dict, repr=False)


def _fail(key, constraint):
    raise ConfigError(f"{key}: {constraint}", key)


def _real(key, v, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(key, "must be a number")
    v = float(v)
    if not math.isfinite(v):
        _fail(key, "must be finite")
    if positive and not v > 0.0:
        _fail(key, "must be > 0")
    if nonneg and not v >= 0.0:
        _fail(key, "must be >= 0")
    return v


def _int(key, v, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(key, "must be an integer")
    if minimum is not None and v < minimum:
        _fail(key, f"must be >= {minimum}")
    return v


def _list(key, v, min_len=1):
    if not isinstance(v, list) or len(v) < min_len:
        _fail(key, f"must be a list with at least {min_len} entries")
    return v


def _point(key, v):
    if not isinstance(v, list) or len(v) != 3:
        _fail(key, "must be a list of 3 numbers")
    return [_real(key, x) for x in v]


def _profile(key, v):
    if not isinstance(v, dict):
        _fail(key, "must be an object with 'kind' and 'b'")
    extra = set(v) - {"kind", "b"}
    if extra:
        _fail(f"{key}.{sorted(extra)[0]}", "unknown key")
    kinds = [k.value for k in ThetaKind]
    if v.get("kind") not in kinds:
        _fail(f"{key}.kind", f"must be one of {kinds}")
    if v["kind"] == ThetaKind.LOCAL_ZERO.value:
        return ThetaProfile.local_zero()
    b = v.get("b")
    if b == "inf" and v["kind"] == ThetaKind.EXPONENTIAL.value:
        return ThetaProfile.exponential(math.inf)
    return ThetaProfile(ThetaKind(v["kind"]), _real(f"{key}.b", b, positive=True))


def _source(key, v):
    if not isinstance(v, dict):
        _fail(key, "must be an object")
    extra = set(v) - {"center", "width", "amplitude"}
    if extra:
        _fail(f"{key}.{sorted(extra)[0]}", "unknown key")
    center = _point(f"{key}.center", v.get("center", [0.0, 0.0, 0.0]))
    width = _real(f"{key}.width", v.get("width", 1.0), positive=True)
    amp = _real(f"{key}.amplitude", v.get("amplitude", 1.0))
    return GaussianSource(tuple(center), width, amp)


def _radii(key, v):
    vals = [_real(key, x, positive=True) for x in _list(key, v)]
    if any(b >= a for a, b in zip(vals, vals[1:])):
        _fail(key, "must be strictly decreasing")
    return vals


def _centers(params):
    centers = [_point("centers", c) for c in _list("centers", params["centers"], 0)]
    strengths = [_real("strengths", a) for a in _list("strengths", params["strengths"], 0)]
    if len(centers) != len(strengths):
        _fail("strengths", "must have one entry per center")
    arr = np.array(centers, dtype=float).reshape(-1, 3)
    for i in range(len(arr)):
        for j in range(i):
            if np.all(arr[i] == arr[j]):
                _fail("centers", "must be pairwise distinct")
    profile = _profile("profile", params.get("profile", {"kind": "local_zero"}))
    return CenterConfig(arr, strengths, profile)


def _charge(key, v):
    if not isinstance(v, dict):
        _fail(key, "must be an object")
    extra = set(v) - {"amplitude", "width_p", "width_P"}
    if extra:
        _fail(f"{key}.{sorted(extra)[0]}", "unknown key")
    return GaussianCharge(_real(f"{key}.amplitude", v.get("amplitude", 1.0)),
                          _real(f"{key}.width_p", v.get("width_p", 1.0), positive=True),
                          _real(f"{key}.width_P", v.get("width_P", 1.0), positive=True))


def _eta_grid(key, v):
    if isinstance(v, dict):
        extra = set(v) - {"start", "stop", "num"}
        if extra:
            _fail(f"{key}.{sorted(extra)[0]}", "unknown key")
        start = _real(f"{key}.start", v.get("start"), positive=True)
        stop = _real(f"{key}.stop", v.get("stop"), positive=True)
        num = _int(f"{key}.num", v.get("num"), 2)
        if not stop > start:
            _fail(f"{key}.stop", "must exceed start")
        return list(np.geomspace(start, stop, num))
    vals = [_real(key, x, positive=True) for x in _list(key, v, 1)]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        _fail(key, "must be strictly increasing")
    return vals


def _validate(command, p):
    out = {}
    if command in ("spectrum", "resolvent"):
        out["config"] = _centers(p)
    if command == "spectrum":
        out["rtol"] = _real("rtol", p.get("rtol", 1e-10), positive=True)
    if command == "resolvent":
        out["lambda"] = _real("lambda", p["lambda"], positive=True)
        out["source"] = _source("source", p.get("source", {}))
        out["points"] = [_point("points", x) for x in _list("points", p["points"])]
    if command == "merge-scan":
        alphas = _list("alphas", p["alphas"], 2)
        if len(alphas) != 2:
            _fail("alphas", "must have exactly 2 entries")
        out["alphas"] = [_real("alphas", a) for a in alphas]
        out["profile"] = _profile("profile", p["profile"])
        out["radii"] = _radii("radii", p["radii"])
        out["lambda"] = _real("lambda", p.get("lambda", 1.0), positive=True)
        src = p.get("source", {"center": [0.4, -0.3, 0.2]})
        out["source"] = _source("source", src)
    if command == "critical":
        out["N"] = [_int("N", n, 2) for n in _list("N", p["N"])]
        out["eta_grid"] = _eta_grid("eta_grid", p["eta_grid"])
    if command == "form-probe":
        charges = _list("charges", p["charges"], 2)
        if len(charges) != 2:
            _fail("charges", "must have exactly 2 entries")
        out["charges"] = [_charge(f"charges[{i}]", c) for i, c in enumerate(charges)]
        alphas = _list("alphas", p["alphas"], 2)
        if len(alphas) != 2:
            _fail("alphas", "must have exactly 2 entries")
        out["alphas"] = [_real("alphas", a) for a in alphas]
        out["gamma"] = _real("gamma", p["gamma"], positive=True)
        out["profile"] = _profile("profile", p["profile"])
        out["eta"] = _real("eta", p["eta"], positive=True)
        out["lambda"] = _real("lambda", p["lambda"], positive=True)
        out["samples"] = _int("samples", p.get("samples", 1_000_000), 10_000)
    if command == "verify":
        ids = p.get("identities", list(IDENTITY_NAMES))
        for name in _list("identities", ids):
            if name not in IDENTITY_NAMES:
                _fail("identities", f"unknown identity {name!r}")
        out["identities"] = list(ids)
    return out


def parse_config(text, command=None) -> RunConfig:
    """Parse and validate a JSON configuration.

    ``command`` (from the subcommand) is used when the document has no
    ``command`` key; if both are given they must agree.

    Raises
    ------
    ConfigError
        Syntax errors (with line number), unknown commands or keys, and
        range violations; the message starts with the offending key.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    cmd = doc.get("command", command)
    if command is not None and cmd != command:
        _fail("command", f"config says {cmd!r} but subcommand is {command!r}")
    if cmd not in SCHEMAS:
        _fail("command", f"unknown command {cmd!r}; expected one of {sorted(SCHEMAS)}")
    schema = SCHEMAS[cmd]
    for key in doc:
        if key not in COMMON_KEYS and key not in schema:
            _fail(key, "unknown key")
    for key, required in schema.items():
        if required and key not in doc:
            _fail(key, "missing required key")
    fmt = doc.get("format", "csv")
    if fmt not in ("csv", "json"):
        _fail("format", "must be 'csv' or 'json'")
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        _fail("output", "must be a string path")
    seed = _int("seed", doc.get("seed", 0), 0)
    params = _validate(cmd, doc)
    return RunConfig(cmd, params, output, fmt, seed, doc)


def _run_spectrum(p, seed):
    spec = bound_states(p["config"], rtol=p["rtol"])
    n = p["config"].n
    rows = []
    for k, (e, v) in enumerate(zip(spec.energies, spec.charge_vectors)):
        row = {"index": k, "energy": float(e)}
        row.update({f"q{i}": float(v[i]) for i in range(n)})
        rows.append(row)
    columns = ["index", "energy"] + [f"q{i}" for i in range(n)]
    return rows, columns


def _run_resolvent(p, seed):
    out = resolvent_apply(p["config"], p["lambda"], p["source"], require_above_spectrum=True)
    pts = np.array(p["points"], dtype=float)
    vals = out(pts)
    rows = [{"kind": "charge", "index": i, "x": math.nan, "y": math.nan, "z": math.nan, "value": float(q)}
            for i, q in enumerate(out.charges)]
    rows += [{"kind": "field", "index": i, "x": float(x[0]), "y": float(x[1]), "z": float(x[2]), "value": float(v)}
             for i, (x, v) in enumerate(zip(pts, vals))]
    return rows, ["kind", "index", "x", "y", "z", "value"]


def _run_merge(p, seed):
    res = merge_scan(p["alphas"][0], p["alphas"][1], p["profile"], p["radii"], p["lambda"], p["source"])
    rows = list(res.rows())
    return rows, ["R", "E_ground", "E_tracked", "n_bound", "q_sum", "q_sum_predicted", "E_predicted"]


def _run_critical(p, seed):
    rows = []
    for N in p["N"]:
        gc = gamma_c_bosons(N) if N >= 3 else math.nan
        for eta in p["eta_grid"]:
            rows.append({"N": N, "eta": float(eta), "gamma_hat_c": gamma_hat_c(N, eta), "gamma_c": gc})
    return rows, ["N", "eta", "gamma_hat_c", "gamma_c"]


def _run_form(p, seed):
    est = phi_form_estimate(p["charges"], p["alphas"], p["gamma"], p["profile"], MassModel(p["eta"]),
                            p["lambda"], p["samples"], seed)
    row = est.to_dict()
    row["nonnegative_3sigma"] = bool(est.value >= -3.0 * est.stderr)
    return [row], list(row.keys())


def _verify_rows(names):
    rows = []

    def add(name, params, ref, val, rel, ok):
        rows.append({"identity": name, "params": params, "reference": float(ref), "computed": float(val),
                     "rel_error": float(rel), "passed": bool(ok)})

    if "MomentumDouble" in names:
        for k, kp in (((0, 0, 0), (1, 0, 0)), ((0.3, -0.2, 0.5), (1.1, 0.7, -0.4)), ((2, 2, 2), (2, 2, 2.25))):
            r = verify_identity("MomentumDouble", {"k": k, "k_prime": kp})
            add(r.name, f"d={r.params['d']:.6g}", r.reference, r.computed, r.rel_error, r.passed)
    if "LogIntegral" in names:
        for a in (1.0, 0.1, 7.5):
            r = verify_identity("LogIntegral", {"a": a})
            add(r.name, f"a={a:g}", r.reference, r.computed, r.rel_error, r.passed)
    if "EtaSqrtBound" in names:
        for eta in (1.0, 1e-2, 1e-4):
            r = verify_identity("EtaSqrtBound", {"eta": eta, "lam": 1.0})
            add(r.name, f"eta={eta:g}", r.reference, r.computed, r.rel_error, r.passed)
    if "GShiftNorm" in names:
        for R in (1.0, 0.1, 1e-3):
            ref = g_shift_norm(R, 1.0)
            val = g_shift_norm_momentum(R, 1.0)
            rel = abs(val - ref) / ref
            add("GShiftNorm", f"R={R:g},lam=1", ref, val, rel, rel <= 1e-8)
    if "MergeRule" in names:
        out = effective_alpha_merge(2.0, 2.0, 1.0)
        add("MergeRule", "alpha=(2,2),theta'(0)=1", 1.5, out.alpha, abs(out.alpha - 1.5) / 1.5, out.alpha == 1.5)
        out = effective_alpha_merge(-1.0, -1.0, 0.0)
        add("MergeRule", "alpha=(-1,-1),theta'(0)=0", -0.5, out.alpha, abs(out.alpha + 0.5) / 0.5, out.alpha == -0.5)
    return rows


def _run_verify(p, seed):
    return _verify_rows(p["identities"]), ["identity", "params", "reference", "computed", "rel_error", "passed"]


RUNNERS = {
    "spectrum": _run_spectrum,
    "resolvent": _run_resolvent,
    "merge-scan": _run_merge,
    "critical": _run_critical,
    "form-probe": _run_form,
    "verify": _run_verify,
}


def _metadata(cfg_command, seed):
    return {"command": cfg_command, "version": __version__, "seed": seed}


def _diagnostic(command, seed, error, key, message, fmt, path):
    row = {"status": "error", "error": error, "key": key or "", "message": message}
    return emit_table([row], fmt, path, _metadata(command or "", seed))


def run_command(cfg: RunConfig):
    """Execute a validated configuration; returns ``(exit_status, text)``.

    A ``verify`` run in which any check fails exits with status 2.
    """
    try:
        rows, columns = RUNNERS[cfg.command](cfg.params, cfg.seed)
    except (ZeroRangeError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        text = _diagnostic(cfg.command, cfg.seed, type(exc).__name__, None, str(exc), cfg.format, cfg.output)
        return EXIT_NUMERIC, text
    text = emit_table(rows, cfg.format, cfg.output, _metadata(cfg.command, cfg.seed), columns)
    status = EXIT_OK
    if cfg.command == "verify" and not all(r["passed"] for r in rows):
        status = EXIT_NUMERIC
    return status, text


def _guess_target(text):
    try:
        doc = json.loads(text)
        if isinstance(doc, dict):
            fmt = doc.get("format", "csv")
            return doc.get("output") if isinstance(doc.get("output"), str) else None, (
                fmt if fmt in ("csv", "json") else "csv")
    except json.JSONDecodeError:
        pass
    return None, "csv"


def _invoke(command, config_file, output):
    text = config_file.read()
    try:
        cfg = parse_config(text, command)
    except ConfigError as exc:
        path, fmt = _guess_target(text)
        path = output or path
        if path:
            try:
                _diagnostic(command, 0, "ConfigError", exc.key, str(exc), fmt, path)
            except OSError:
                pass
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    if output:
        cfg.output = output
    try:
        status, rendered = run_command(cfg)
    except TableIOError as exc:
        click.echo(f"output error: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    if cfg.output is None:
        click.echo(rendered, nl=False)
    if status == EXIT_NUMERIC:
        click.echo(f"numerical failure in {command}; see diagnostics", err=True)
    sys.exit(status)


@click.group()
@click.version_option(__version__, prog_name="zerorange")
def main():
    """Non-local point interactions: spectra, resolvents, limits and checks."""


def _subcommand(name, help_text):
    @main.command(name=name, help=help_text)
    @click.argument("config_file", type=click.File("r", encoding="utf-8"))
    @click.option("-o", "--output", type=click.Path(dir_okay=False), default=None,
                  help="Output path (overrides the config's 'output').")
    def cmd(config_file, output):
        _invoke(name, config_file, output)

    return cmd


_subcommand("spectrum", "Bound-state energies and charge vectors of a fixed-center configuration.")
_subcommand("resolvent", "Charges and field values of (h + lambda)^-1 applied to a Gaussian source.")
_subcommand("merge-scan", "Two-center merging scan over decreasing separations.")
_subcommand("critical", "Critical couplings gamma_hat_c(N, eta) and gamma_c(N) on a grid.")
_subcommand("form-probe", "Monte Carlo estimate of the two-center many-body boundary form.")
_subcommand("verify", "Integral identities and spot checks.")


if __name__ == "__main__":  # pragma: no cover
    main()
