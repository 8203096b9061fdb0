"""Batch front door: ingest cocycle spec files, run the scheme and the
classification / cohomology pipelines, emit reproducible reports.

Commands
--------
analyze     run the scheme on a cocycle spec, classify, evaluate conditions
construct   build a gallery family from its plan, emit spec + plan files
cohomology  solve the linearized equation over a trace, emit the residual series
conditions  evaluate the asymptotic conditions only

Spec file format (INI):

    [frequency]
    alpha = surd:(-1,1,2,1)        ; (p + q sqrt(d)) / r, or decimal:<string>

    [constant]
    angle = 0.23                   ; diagonal constant, angle in turns

    [perturbation]
    band = 3
    coeffs =
        z 1 1e-4 0.0               ; channel k re im
        t 0 2e-5 0.0

    [plan]                         ; optional: build a gallery family instead
    family = sobolev
    sigma = 1.0
    depth = 12

Reports are deterministic: identical config and inputs give byte-identical
text outputs.  Figures are rendered alongside the delimited output for
visual inspection only and are not part of the determinism contract.

Exit codes: 0 ok, 2 parse error, 3 precondition violated, 4 numeric abort.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from pathlib import Path

import numpy as np

from . import algebra, arithmetic, classify as cls_mod, cohomology, gallery
from . import harmonics as hm
from . import torusmaps as tm
from .algebra import GroupElement
from .arithmetic import DiophantineParams, parse_frequency
from .kam import (Cocycle, KamParams, SmallnessViolated, run_scheme,
                  significant_params)
from .torusmaps import AlgebraMap

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_NUMERIC = 4


class ParseError(ValueError):
    """Malformed spec/config input."""


_FAMILIES = {
    "resonant_chain": gallery.make_resonant_chain,
    "sobolev": gallery.make_sobolev,
    "due": gallery.make_due_candidate,
    "stable": gallery.make_stable_orthogonal,
    "degenerate_due": gallery.make_degenerate_due,
    "nonresonant": gallery.make_nonresonant,
}

# Per-family keyword grammar: name -> converter.
_FAMILY_KEYS = {
    "resonant_chain": {"depth": int, "margin": float},
    "sobolev": {"sigma": float, "depth": int, "honest_depth": int},
    "due": {"m_max": int, "depth": int, "distance_exponent": float},
    "stable": {"depth": int},
    "degenerate_due": {"m": int, "s0": float, "depth": int,
                       "other_exponent": float, "m_max": int},
    "nonresonant": {"amplitude": float, "band": int, "angle": float},
}

_PARAM_FLAGS = ("n_max", "N1", "schedule_exponent", "nu", "gamma", "tau",
                "eps0", "s0")


def fmt(x) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


# ---------------------------------------------------------------------------
# Spec-file parsing
# ---------------------------------------------------------------------------

def _read_config(path: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}")
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"malformed config {path}: {exc}")
    return cp


def _check_keys(cp, section: str, allowed):
    extra = set(cp[section]) - set(allowed)
    if extra:
        raise ParseError(f"unknown keys in [{section}]: {sorted(extra)}")


def parse_alpha(cp) -> tuple:
    """(alpha value, descriptor string or None) from [frequency]."""
    if "frequency" not in cp:
        raise ParseError("missing [frequency] section")
    _check_keys(cp, "frequency", {"alpha"})
    raw = cp["frequency"].get("alpha")
    if raw is None:
        raise ParseError("[frequency] needs an alpha descriptor")
    try:
        parsed = parse_frequency(raw)
    except (ValueError, ArithmeticError) as exc:
        raise ParseError(f"bad frequency descriptor {raw!r}: {exc}")
    if hasattr(parsed, "value"):
        return parsed, raw.strip()
    try:
        return float(parsed), raw.strip()
    except ValueError as exc:
        raise ParseError(f"bad decimal frequency {parsed!r}: {exc}")


def parse_constant(cp) -> GroupElement:
    if "constant" not in cp:
        raise ParseError("missing [constant] section")
    _check_keys(cp, "constant", {"angle"})
    raw = cp["constant"].get("angle")
    if raw is None:
        raise ParseError("[constant] needs angle = <turns>")
    try:
        angle = float(raw)
    except ValueError as exc:
        raise ParseError(f"bad constant angle {raw!r}: {exc}")
    return GroupElement(np.exp(2j * np.pi * angle), 0.0)


def parse_perturbation(cp) -> AlgebraMap:
    if "perturbation" not in cp:
        return tm.zero_map(4)
    _check_keys(cp, "perturbation", {"band", "coeffs"})
    sec = cp["perturbation"]
    try:
        band = int(sec.get("band", "4"))
    except ValueError as exc:
        raise ParseError(f"bad band: {exc}")
    if band < 0:
        raise ParseError("band must be nonnegative")
    t_given, z_given = {}, {}
    for line in sec.get("coeffs", "").splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4 or parts[0] not in ("t", "z"):
            raise ParseError(f"bad coefficient record {line!r}; expected "
                             "'channel k re im' with channel in {t, z}")
        try:
            k, re, im = int(parts[1]), float(parts[2]), float(parts[3])
        except ValueError as exc:
            raise ParseError(f"bad coefficient record {line!r}: {exc}")
        if abs(k) > band:
            raise ParseError(f"coefficient k={k} outside band {band}")
        target = t_given if parts[0] == "t" else z_given
        if k in target:
            raise ParseError(f"duplicate {parts[0]}-record at k={k}")
        target[k] = complex(re, im)
    # The t channel is the diagonal (real) channel: conjugate symmetry
    # t-hat(-k) = conj(t-hat(k)) is a realness constraint, checked rather
    # than silently repaired.
    for k, v in t_given.items():
        if -k in t_given and abs(t_given[-k] - v.conjugate()) > 1e-15 * (
                1.0 + abs(v)):
            raise ParseError(f"t-channel records at k={k} and k={-k} break "
                             "conjugate symmetry")
        if k == 0 and abs(v.imag) > 1e-15 * (1.0 + abs(v)):
            raise ParseError("t-channel record at k=0 must be real")
    F = AlgebraMap(band)
    for k, v in t_given.items():
        F.set_t(k, v)
    for k, v in z_given.items():
        F.set_z(k, v)
    return F


def parse_params(cp, args):
    """KamParams from the optional [params] section, overridden by flags.

    Returns None when nothing was specified, so that gallery constructors
    keep their family-specific defaults."""
    fields = {}
    if "params" in cp:
        _check_keys(cp, "params", set(_PARAM_FLAGS))
        for key in cp["params"]:
            fields[key] = cp["params"][key]
    for key in _PARAM_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            fields[key] = val
    dioph_kw = {}
    for key in ("gamma", "tau"):
        if key in fields:
            dioph_kw[key] = float(fields.pop(key))
    kw = {}
    for key, val in fields.items():
        conv = int if key in ("N1", "s0", "n_max") else float
        try:
            kw[key] = conv(val)
        except ValueError as exc:
            raise ParseError(f"bad parameter {key}={val!r}: {exc}")
    if dioph_kw:
        base = KamParams().dioph
        kw["dioph"] = DiophantineParams(dioph_kw.get("gamma", base.gamma),
                                        dioph_kw.get("tau", base.tau))
    if not kw:
        return None
    try:
        return KamParams(**kw)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad [params]: {exc}")


def parse_plan(cp, params):
    """(cocycle, plan) from the [plan] section, or None when absent."""
    if "plan" not in cp:
        return None
    sec = cp["plan"]
    family = sec.get("family")
    if family not in _FAMILIES:
        raise ParseError(f"unknown plan family {family!r}; expected one of "
                         f"{sorted(_FAMILIES)}")
    _check_keys(cp, "plan", {"family"} | set(_FAMILY_KEYS[family]))
    kwargs = {}
    for key, conv in _FAMILY_KEYS[family].items():
        if key in sec:
            try:
                kwargs[key] = conv(sec[key])
            except ValueError as exc:
                raise ParseError(f"bad plan key {key}={sec[key]!r}: {exc}")
    alpha, _ = parse_alpha(cp)
    if family == "nonresonant":
        coc = _FAMILIES[family](alpha=alpha, **kwargs)
        return coc, None
    return _FAMILIES[family](alpha=alpha, params=params, **kwargs)


def load_cocycle(cp, params):
    """(cocycle, plan-or-None) from a parsed spec file."""
    planned = parse_plan(cp, params)
    if planned is not None:
        return planned
    alpha, desc = parse_alpha(cp)
    a_val = alpha.value() if hasattr(alpha, "value") else alpha
    return Cocycle(a_val, parse_constant(cp), parse_perturbation(cp),
                   desc), None


def load_harmonic(path: str, m_max: int, k_band: int) -> hm.HarmonicFunction:
    """Harmonic coefficient file: lines 'k m j p re im'."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read harmonic file {path}: {exc}")
    f = hm.HarmonicFunction({}, m_max, k_band)
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ParseError(f"bad harmonic record {line!r}; expected "
                             "'k m j p re im'")
        try:
            k, m, j, p = (int(v) for v in parts[:4])
            re, im = float(parts[4]), float(parts[5])
        except ValueError as exc:
            raise ParseError(f"bad harmonic record {line!r}: {exc}")
        try:
            f.set(k, m, j, p, complex(re, im))
        except ValueError as exc:
            raise ParseError(f"harmonic record {line!r}: {exc}")
    return f


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------

def _params_block(params: KamParams, args) -> list:
    out = ["[parameters]"]
    for key in ("N1", "schedule_exponent", "nu", "eps0", "s0", "n_max",
                "c1", "roundoff_floor"):
        out.append(f"{key} = {fmt(getattr(params, key))}")
    out.append(f"gamma = {fmt(params.dioph.gamma)}")
    out.append(f"tau = {fmt(params.dioph.tau)}")
    out.append(f"m_max = {args.m_max}")
    out.append(f"stages = {args.stages}")
    out.append(f"seed = {args.seed}")
    return out


def _trace_block(trace) -> list:
    out = ["[trace]",
           f"alpha = {fmt(trace.original.alpha)}",
           f"alpha_descriptor = {trace.original.alpha_descriptor}",
           f"synthetic = {trace.synthetic}",
           f"steps = {len(trace.steps)}",
           f"stop_reason = {trace.stop_reason}",
           "# n N K k_r eps |coeff| zeta norm_before norm_after residual"]
    for s in trace.steps:
        k_r = s.resonance.resonant_mode
        out.append(" ".join([
            str(s.n), str(s.N), fmt(s.K),
            "-" if k_r is None else str(k_r),
            fmt(s.eps_param), fmt(abs(s.resonant_coeff)), fmt(s.zeta),
            fmt(s.norm_before), fmt(s.norm_after), fmt(s.residual)]))
    return out


def _classification_block(verdict) -> list:
    out = ["[classification]", f"verdict = {verdict.verdict}"]
    if verdict.sigma_hat is not None:
        out.append(f"sigma_hat = {fmt(verdict.sigma_hat)}")
        lo, hi = verdict.confidence
        out.append(f"confidence = {fmt(lo)} {fmt(hi)}")
    if verdict.reason:
        out.append(f"reason = {verdict.reason}")
    if verdict.delta_series:
        out.append("delta_series = " +
                   " ".join(fmt(d) for d in verdict.delta_series))
    for key in ("slope_logN_weighted", "slope_index_weighted", "stderr",
                "weighting_disagreement"):
        if key in verdict.evidence:
            out.append(f"{key} = {fmt(verdict.evidence[key])}")
    return out


def _conditions_block(report) -> list:
    out = ["[conditions]",
           f"ue_liminf = {fmt(report.ue_liminf)}",
           f"ue_holds = {report.ue_holds}",
           f"stability = {report.stability}",
           f"nu_bar = {fmt(report.nu_bar) if report.nu_bar is not None else '-'}",
           f"low_confidence = {report.low_confidence}",
           f"due_definite = {report.due_definite}",
           "# m best_distance exponent at_floor"]
    for m in sorted(report.due):
        row = report.due[m]
        out.append(f"{m} {fmt(row.best_distance)} {fmt(row.exponent)} "
                   f"{row.at_floor}")
    return out


def _write(path: Path, lines) -> None:
    path.write_text("\n".join(lines) + "\n")


def _figure_norms(trace, path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ns = [s.n for s in trace.steps]
    ax.semilogy(ns, [max(s.norm_before, 1e-300) for s in trace.steps],
                "o-", label="before")
    ax.semilogy(ns, [max(s.norm_after, 1e-300) for s in trace.steps],
                "s--", label="after")
    res = [s.n for s in trace.steps if s.resonant]
    for n in res:
        ax.axvline(n, color="0.8", zorder=0)
    ax.set_xlabel("step")
    ax.set_ylabel(r"$\|F_n\|_0$")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _figure_series(xs, ys, xlabel, ylabel, path: Path, logy=True) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5, 3.2))
    plot = ax.semilogy if logy else ax.plot
    plot(xs, [max(y, 1e-300) for y in ys] if logy else ys, "o-")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _effective_params(plan, params) -> KamParams:
    """The parameter set that actually governs the run: a gallery plan
    carries its own (possibly family-specific) parameters."""
    if plan is not None:
        return plan.params
    return params if params is not None else KamParams()


def _get_trace(cocycle, plan, params, args):
    """Honest run of the scheme, except for purely synthetic plans whose
    cocycle realization is a truncation (use the planted ladder there)."""
    if plan is not None and plan.realized_depth < plan.depth:
        return plan.synthesize_trace()
    return run_scheme(cocycle, _effective_params(plan, params))


def cmd_analyze(args) -> int:
    cp = _read_config(args.config)
    params = parse_params(cp, args)
    cocycle, plan = load_cocycle(cp, params)
    params = _effective_params(plan, params)
    trace = _get_trace(cocycle, plan, params, args)
    verdict = cls_mod.classify(trace)
    sig = significant_params(trace)
    lines = ["# su2kam analyze", ""]
    lines += _params_block(params, args) + [""]
    lines += _trace_block(trace) + [""]
    lines += _classification_block(verdict)
    if sig:
        report = cls_mod.evaluate_conditions(
            sig, [s.N for s in trace.steps], args.m_max, nu=params.nu)
        lines += [""] + _conditions_block(report)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "report.txt", lines)
    emitted = ["report.txt"]
    if "trace" in args.emit:
        _write(out / "trace.txt", _trace_block(trace))
        emitted.append("trace.txt")
    if "series" in args.emit:
        rows = ["n,norm_before,norm_after"]
        rows += [f"{s.n},{fmt(s.norm_before)},{fmt(s.norm_after)}"
                 for s in trace.steps]
        _write(out / "norms.csv", rows)
        emitted.append("norms.csv")
        if verdict.delta_series:
            rows = ["i,delta"]
            rows += [f"{i + 1},{fmt(d)}"
                     for i, d in enumerate(verdict.delta_series)]
            _write(out / "delta.csv", rows)
            emitted.append("delta.csv")
    if trace.steps:
        _figure_norms(trace, out / "fig_norms.png")
        emitted.append("fig_norms.png")
    print(f"analyze: {verdict.verdict}; wrote {', '.join(emitted)} to {out}")
    return EXIT_OK


def cmd_construct(args) -> int:
    cp = _read_config(args.config)
    params = parse_params(cp, args)
    if "plan" not in cp:
        raise ParseError("construct needs a [plan] section")
    cocycle, plan = load_cocycle(cp, params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = ["# su2kam construct: cocycle spec", "",
            "[frequency]",
            f"alpha = {cocycle.alpha_descriptor or 'decimal:' + fmt(cocycle.alpha)}",
            "",
            "[constant]"]
    diag = algebra.diagonalize(cocycle.constant)
    spec.append(f"angle = {fmt(diag.angle)}")
    F = cocycle.perturbation
    spec += ["", "[perturbation]", f"band = {F.band}", "coeffs ="]
    for k in range(-F.band, F.band + 1):
        for channel, v in (("t", F.t_coeff(k)), ("z", F.z_coeff(k))):
            if v != 0:
                spec.append(f"    {channel} {k} {fmt(v.real)} {fmt(v.imag)}")
    _write(out / "cocycle.spec", spec)
    emitted = ["cocycle.spec"]
    if plan is not None:
        rows = ["# su2kam construct: plan ground truth",
                f"family = {plan.family}",
                f"alpha = {fmt(plan.alpha)}",
                f"depth = {plan.depth}",
                f"realized_depth = {plan.realized_depth}",
                "# n N K k b eps |coeff| zeta"]
        for s in plan.steps:
            rows.append(" ".join([str(s.n), str(s.N), fmt(s.K), str(s.k),
                                  fmt(s.b), fmt(s.eps), fmt(abs(s.coeff)),
                                  fmt(s.zeta)]))
        _write(out / "plan.txt", rows)
        emitted.append("plan.txt")
        if plan.steps:
            _figure_series([s.N for s in plan.steps],
                           [abs(s.eps) for s in plan.steps],
                           "N", r"$|\epsilon_i|$", out / "fig_plan.png")
            emitted.append("fig_plan.png")
    print(f"construct: wrote {', '.join(emitted)} to {out}")
    return EXIT_OK


def cmd_cohomology(args) -> int:
    cp = _read_config(args.config)
    params = parse_params(cp, args)
    cocycle, plan = load_cocycle(cp, params)
    trace = _get_trace(cocycle, plan, params, args)
    phi = load_harmonic(args.phi, args.m_max, args.k_band)
    params = _effective_params(plan, params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if not phi.coeffs:
        stages = min(args.stages, len(trace.steps))
        _write(out / "residuals.csv",
               ["stage,residual"] + [f"{i + 1},0.0" for i in range(stages)])
        _write(out / "psi.txt", ["# k m j p re im"])
        print(f"cohomology: zero input; wrote residuals.csv, psi.txt to {out}")
        return EXIT_OK
    psi, residuals = cohomology.solve_over_trace(trace, phi, args.stages,
                                                 args.m_max)
    rows = ["stage,residual"]
    rows += [f"{i + 1},{fmt(r)}" for i, r in enumerate(residuals)]
    _write(out / "residuals.csv", rows)
    psi_rows = ["# k m j p re im"]
    for (k, m, j, p) in sorted(psi.coeffs):
        v = psi.coeffs[(k, m, j, p)]
        psi_rows.append(f"{k} {m} {j} {p} {fmt(v.real)} {fmt(v.imag)}")
    _write(out / "psi.txt", psi_rows)
    _figure_series(range(1, len(residuals) + 1), residuals,
                   "stage", "residual", out / "fig_residuals.png")
    print(f"cohomology: {len(residuals)} stages, final residual "
          f"{fmt(residuals[-1])}; wrote residuals.csv, psi.txt, "
          f"fig_residuals.png to {out}")
    return EXIT_OK


def cmd_conditions(args) -> int:
    cp = _read_config(args.config)
    params = parse_params(cp, args)
    cocycle, plan = load_cocycle(cp, params)
    params = _effective_params(plan, params)
    trace = _get_trace(cocycle, plan, params, args)
    sig = significant_params(trace)
    if not sig:
        raise cohomology.InsufficientResonances(
            "no resonant steps: the asymptotic conditions are vacuous "
            "(the trace classifies as smoothly reducible)")
    report = cls_mod.evaluate_conditions(
        sig, [s.N for s in trace.steps], args.m_max, nu=params.nu)
    lines = ["# su2kam conditions", ""]
    lines += _params_block(params, args) + [""]
    lines += _conditions_block(report)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "conditions.txt", lines)
    _figure_series([p["N"] for p in sig],
                   [max(min(abs(math.cos(p["zeta"]) ** 2 - r)
                            for r in hm.xi_set(2)), 1e-17) for p in sig],
                   "N", r"$d(\cos^2\zeta_i,\,\Xi_2)$",
                   out / "fig_conditions.png")
    print(f"conditions: stability={report.stability}; wrote conditions.txt, "
          f"fig_conditions.png to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="su2kam",
        description="KAM analysis of quasiperiodic SU(2) cocycles")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, func in (("analyze", cmd_analyze), ("construct", cmd_construct),
                       ("cohomology", cmd_cohomology),
                       ("conditions", cmd_conditions)):
        p = sub.add_parser(name)
        p.set_defaults(func=func)
        p.add_argument("--config", required=True, help="cocycle spec file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--N1", dest="N1", type=int)
        p.add_argument("--schedule-exponent", dest="schedule_exponent",
                       type=float)
        p.add_argument("--nu", dest="nu", type=float)
        p.add_argument("--gamma", dest="gamma", type=float)
        p.add_argument("--tau", dest="tau", type=float)
        p.add_argument("--eps0", dest="eps0", type=float)
        p.add_argument("--s0", dest="s0", type=int)
        p.add_argument("--m-max", dest="m_max", type=int, default=4)
        p.add_argument("--stages", type=int, default=6)
        p.add_argument("--seed", type=int, default=7)
        if name == "analyze":
            p.add_argument("--emit", action="append", default=[],
                           choices=["report", "trace", "series"])
        if name == "cohomology":
            p.add_argument("--phi", required=True,
                           help="harmonic coefficient file (k m j p re im)")
            p.add_argument("--k-band", dest="k_band", type=int, default=64)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (gallery.PlanInfeasible, arithmetic.HypothesisViolated,
            SmallnessViolated, cohomology.InsufficientResonances,
            cls_mod.NotApplicable) as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ArithmeticError, ValueError) as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
