"""Batch front end: ``toralmix {analyze,correlate,verify,diophantine} --config run.json``.

Exit codes: 0 pass, 1 configuration error, 2 property violation, 3 cone
property failure.  Artifacts are written to ``--out`` and are byte identical
for identical (config, seed) whatever ``--threads`` is.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .cones import Cone, ConeAnalysis, analyze_cones, default_quadrant_cones, tilde_cones, verify_cone_property
from .correlations import correlation_quadrature, correlation_series
from .errors import ConePropertyError, ToralError
from .lattice import MatrixFamily
from .observables import TrigObservable
from .random_model import sample_words
from .spectrum import estimate_top_exponent
from .verification import (diophantine_sweep, estimate_lemma2_constant, verify_lemma_bounds,
                           verify_product_hyperbolicity)

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION, EXIT_CONE = 0, 1, 2, 3

DEFAULTS = {
    "probs": None,
    "cones": "auto",
    "beta": 1.0,
    "n_max": 10,
    "omega_samples": 4,
    "seed": 0,
    "quadrature_n_max": 0,
    "sweep": {"radius": 50, "n_max": 25, "omega_samples": 50},
    "lyapunov": {"steps": 10000, "trials": 64, "eps_fraction": 0.05},
    "hyperbolicity_length": 12,
    "diophantine": {"member": 0, "which": "u", "eps": 0.0, "Q": 1000},
}


class ConfigError(Exception):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


@dataclass
class RunConfig:
    family: MatrixFamily
    E: Cone
    C: Cone
    beta: float
    f: TrigObservable | None
    g: TrigObservable | None
    n_max: int
    omega_samples: int
    words: list | None
    seed: int
    quadrature_n_max: int
    sweep: dict
    lyapunov: dict
    hyperbolicity_length: int
    diophantine: dict
    raw: dict = field(repr=False, default_factory=dict)


def _section(raw: dict, key: str) -> dict:
    val = raw.get(key, {})
    if not isinstance(val, dict):
        raise ConfigError(key, "must be an object")
    return {**DEFAULTS[key], **val}


def _observable(raw, name: str, beta: float) -> TrigObservable | None:
    if raw is None:
        return None
    if not isinstance(raw, list):
        raise ConfigError(name, "must be a list of {q, config?, re, im}")
    coeffs, depth = {}, None
    for k, term in enumerate(raw):
        where = f"{name}[{k}]"
        try:
            q = tuple(int(x) for x in term["q"])
            if len(q) != 2:
                raise ConfigError(where + ".q", "must have two integers")
            cfg = tuple(int(s) for s in term.get("config", []))
            c = complex(float(term.get("re", 0.0)), float(term.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(where, str(exc)) from exc
        if depth is None:
            depth = len(cfg)
        elif len(cfg) != depth:
            raise ConfigError(where + ".config", "all terms must share one cylinder depth")
        coeffs[(q, cfg)] = coeffs.get((q, cfg), 0) + c
    try:
        return TrigObservable(coeffs, depth or 0, beta)
    except ToralError as exc:
        raise ConfigError(name, str(exc)) from exc


def _cones(given, family: MatrixFamily) -> tuple[Cone, Cone]:
    if given == "auto":
        return default_quadrant_cones(family)
    if not isinstance(given, dict) or set(given) != {"E", "C"}:
        raise ConfigError("cones", 'must be "auto" or {"E": [[..],[..]], "C": [[..],[..]]}')
    out = []
    for key in ("E", "C"):
        try:
            u1, u2 = (tuple(int(x) for x in r) for r in given[key])
            out.append(Cone(u1, u2))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cones.{key}", str(exc)) from exc
    return out[0], out[1]


def load_config(path_or_dict, seed: int | None = None) -> RunConfig:
    """Parse and validate a version-1 configuration.

    Raises :class:`ConfigError` (exit 1) or :class:`ConePropertyError` when
    automatic cones are requested for a family that is not sign definite.
    """
    if isinstance(path_or_dict, dict):
        raw = path_or_dict
    else:
        try:
            raw = json.loads(Path(path_or_dict).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        except OSError as exc:
            raise ConfigError("<file>", str(exc)) from exc
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "must be an object")
    if raw.get("version") != 1:
        raise ConfigError("version", "must be 1")
    if "matrices" not in raw:
        raise ConfigError("matrices", "required")
    try:
        family = MatrixFamily(raw["matrices"], raw.get("probs"))
    except ToralError as exc:
        raise ConfigError("matrices" if "probab" not in str(exc) else "probs",
                          f"{type(exc).__name__}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError("matrices", str(exc)) from exc
    beta = float(raw.get("beta", DEFAULTS["beta"]))
    if not 0.0 < beta <= 1.0:
        raise ConfigError("beta", "must lie in (0, 1]")
    E, C = _cones(raw.get("cones", "auto"), family)

    words = raw.get("words")
    if words is None and raw.get("word") is not None:
        words = [raw["word"]]
    if words is not None:
        try:
            words = [[int(s) for s in w] for w in words]
            for w in words:
                family.check_word(w)
        except (TypeError, ValueError) as exc:
            raise ConfigError("word", str(exc)) from exc

    def nonneg_int(key, value):
        try:
            v = int(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, "must be an integer") from exc
        if v < 0:
            raise ConfigError(key, "must be nonnegative")
        return v

    return RunConfig(
        family=family, E=E, C=C, beta=beta,
        f=_observable(raw.get("f"), "f", beta),
        g=_observable(raw.get("g"), "g", beta),
        n_max=nonneg_int("n_max", raw.get("n_max", DEFAULTS["n_max"])),
        omega_samples=nonneg_int("omega_samples", raw.get("omega_samples", DEFAULTS["omega_samples"])),
        words=words,
        seed=nonneg_int("seed", raw.get("seed", 0) if seed is None else seed),
        quadrature_n_max=nonneg_int("quadrature_n_max", raw.get("quadrature_n_max", 0)),
        sweep=_section(raw, "sweep"),
        lyapunov=_section(raw, "lyapunov"),
        hyperbolicity_length=nonneg_int("hyperbolicity_length",
                                        raw.get("hyperbolicity_length", DEFAULTS["hyperbolicity_length"])),
        diophantine=_section(raw, "diophantine"),
        raw=raw,
    )


def _num(x):
    """JSON-safe number; exact fractions become strings like ``"2"`` or ``"5/2"``."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float) and math.isinf(x):
        return "unbounded"
    if isinstance(x, float) and math.isnan(x):
        return None
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, int):
        return int(obj)
    if isinstance(obj, (float, Fraction)):
        return _num(obj)
    try:
        return _num(float(obj))
    except (TypeError, ValueError):
        return str(obj)


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(x) -> str:
    return "" if x is None else "%.17g" % x


def tilde_analysis(cfg: RunConfig) -> tuple[ConeAnalysis, ConeAnalysis, MatrixFamily, Cone, Cone]:
    """Cone analysis of the family, then of the tilde family with J-transported cones."""
    fwd = verify_cone_property(cfg.family, cfg.E, cfg.C, strict=True)
    tfam = cfg.family.tilde()
    Et, Ct = tilde_cones(cfg.E, cfg.C)
    tld = analyze_cones(tfam, Et, Ct)
    return fwd, tld, tfam, Et, Ct


def _analysis_dict(a: ConeAnalysis, beta: float) -> dict:
    return {
        "lambda_E_sq": a.lambda_E_sq,
        "lambda_C_inv_sq": a.lambda_C_inv_sq,
        "lambda_E": a.lambda_E,
        "lambda_C": a.lambda_C,
        "lambda": a.lam,
        "rho": a.rho,
        "M": a.M,
        "C_const": a.C_const,
        "K": a.K,
        "c": a.c(beta) if a.C_const is not None else None,
        "clauses": a.clauses,
        "shared_boundary": a.shared_boundary,
    }


def _lyapunov(cfg: RunConfig):
    ly = cfg.lyapunov
    return estimate_top_exponent(cfg.family, n=int(ly["steps"]), trials=int(ly["trials"]), seed=cfg.seed)


def run_analyze(cfg: RunConfig, threads: int = 1) -> tuple[int, dict[str, str]]:
    fwd, tld, *_ = tilde_analysis(cfg)
    est = _lyapunov(cfg)
    lo = 0.5 * math.log(max(float(fwd.lambda_E_sq), float(fwd.lambda_C_inv_sq)))
    # the top exponent cannot beat the largest operator norm among the members
    hi = max(math.log(_opnorm(m.entries)) for m in cfg.family.members)
    margin = 3 * est.stderr if est.trials > 1 else 0.0
    interval_ok = lo - margin <= est.chi_top <= hi + margin
    summary = {
        "family": {"matrices": [list(map(list, m.entries.rows())) for m in cfg.family.members],
                   "probs": list(cfg.family.probs)},
        "cones": {"E": [list(cfg.E.u1), list(cfg.E.u2)], "C": [list(cfg.C.u1), list(cfg.C.u2)]},
        "analysis": _analysis_dict(fwd, cfg.beta) | {"M": tld.M, "C_const": tld.C_const, "K": tld.K,
                                                     "c": tld.c(cfg.beta)},
        "tilde_analysis": _analysis_dict(tld, cfg.beta),
        "lyapunov": {"chi_top": est.chi_top, "chi_bottom": est.chi_bottom, "stderr": est.stderr,
                     "steps": est.n_steps, "trials": est.trials, "interval": [lo, hi],
                     "interval_check": interval_ok},
        "seed": cfg.seed,
        "passed": fwd.passed and tld.passed and interval_ok,
    }
    code = EXIT_OK if interval_ok else EXIT_VIOLATION
    return code, {"analyze.json": dump_json(summary)}


def _opnorm(m) -> float:
    s = m.T @ m
    t, d = s.a + s.d, s.a * s.d - s.b * s.b
    return math.sqrt((t + math.sqrt(max(t * t - 4 * d, 0))) / 2)


def _correlation_words(cfg: RunConfig) -> list[tuple[int, list[int]]]:
    depth = max(cfg.f.depth, cfg.g.depth)
    length = cfg.n_max + depth
    if cfg.words is not None:
        return list(enumerate(cfg.words))
    arr = sample_words(cfg.family.probs, length, cfg.omega_samples, cfg.seed)
    return [(i, arr[i].tolist()) for i in range(cfg.omega_samples)]


def run_correlate(cfg: RunConfig, threads: int = 1) -> tuple[int, dict[str, str]]:
    if cfg.f is None or cfg.g is None:
        raise ConfigError("f/g", "correlate needs both observables")
    _, tld, tfam, Et, Ct = tilde_analysis(cfg)
    lyap = None
    if "lyapunov" in cfg.raw:
        est = _lyapunov(cfg)
        eps = float(cfg.lyapunov["eps_fraction"]) * est.chi_top
        sw = cfg.sweep
        c_eps = estimate_lemma2_constant(tfam, Et, Ct, est.chi_top, eps, R=sw["radius"], n_max=sw["n_max"],
                                         omega_samples=sw["omega_samples"], seed=cfg.seed, threads=threads)
        lyap = (est.chi_top, eps, c_eps.value)
    words = _correlation_words(cfg)
    qmax = min(cfg.quadrature_n_max, cfg.n_max)

    def job(item):
        oid, w = item
        series = correlation_series(cfg.family, w, cfg.f, cfg.g, cfg.n_max, analysis=tld, beta=cfg.beta,
                                    omega_id=str(oid), lyapunov=lyap)
        quad = [correlation_quadrature(cfg.family, w, cfg.f, cfg.g, n) for n in range(qmax + 1)] if qmax else []
        return series, quad

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(job, words))

    buf = io.StringIO(newline="")
    header = ["omega_id", "n", "re", "im", "abs", "envelope", "envelope_lyapunov"]
    if qmax:
        header += ["quadrature_re", "quadrature_im"]
    buf.write(",".join(header) + "\n")
    violations, max_quad_err = [], 0.0
    for series, quad in results:
        for n, v, env, ly in series.rows():
            row = [series.omega_id, str(n), _fmt(v.real), _fmt(v.imag), _fmt(abs(v)), _fmt(env), _fmt(ly)]
            if qmax:
                qv = quad[n] if n < len(quad) else None
                row += [_fmt(qv.real if qv is not None else None), _fmt(qv.imag if qv is not None else None)]
                if qv is not None:
                    max_quad_err = max(max_quad_err, abs(qv - v))
            buf.write(",".join(row) + "\n")
            if env is not None and abs(v) > env:
                violations.append({"omega_id": series.omega_id, "n": n, "abs": abs(v), "envelope": env})
            if ly is not None and abs(v) > ly:
                violations.append({"omega_id": series.omega_id, "n": n, "abs": abs(v), "envelope_lyapunov": ly})
    summary = {
        "rows": sum(len(s.values) for s, _ in results),
        "words": len(results),
        "rho": tld.rho,
        "c": tld.c(cfg.beta),
        "C_const": tld.C_const,
        "norm_f": cfg.f.bnorm(cfg.beta),
        "norm_g": cfg.g.bnorm(cfg.beta),
        "lyapunov": None if lyap is None else {"chi": lyap[0], "eps": lyap[1], "C_eps": lyap[2],
                                               "label": "empirical"},
        "quadrature_max_abs_diff": max_quad_err if qmax else None,
        "violations": violations,
        "passed": not violations,
        "seed": cfg.seed,
    }
    code = EXIT_OK if not violations else EXIT_VIOLATION
    return code, {"correlate.csv": buf.getvalue(), "correlate.json": dump_json(summary)}


def _diophantine(cfg: RunConfig) -> dict:
    d = cfg.diophantine
    member = int(d["member"])
    if not 0 <= member < len(cfg.family):
        raise ConfigError("diophantine.member", "index out of range")
    eig = cfg.family.members[member].eigen
    res = diophantine_sweep(eig, float(d["eps"]), int(d["Q"]), which=d["which"])
    return {"member": member, "which": d["which"], "eps": float(d["eps"]), "Q": int(d["Q"]),
            "slope": float(eig.slope_mp(d["which"])), "value": res.value, "q1": res.q1, "q2": res.q2,
            "label": "empirical"}


def run_verify(cfg: RunConfig, threads: int = 1, corrupt: bool = False) -> tuple[int, dict[str, str]]:
    _, tld, tfam, Et, Ct = tilde_analysis(cfg)
    sw = cfg.sweep
    lemma1 = verify_lemma_bounds(tfam, Et, Ct, tld, R=sw["radius"], n_max=sw["n_max"],
                                 omega_samples=sw["omega_samples"], seed=cfg.seed, threads=threads,
                                 corrupt={"lam": 0.5} if corrupt else None)
    hyper = verify_product_hyperbolicity(cfg.family, cfg.hyperbolicity_length)
    est = _lyapunov(cfg)
    eps = float(cfg.lyapunov["eps_fraction"]) * est.chi_top
    c_eps = estimate_lemma2_constant(tfam, Et, Ct, est.chi_top, eps, R=sw["radius"], n_max=sw["n_max"],
                                     omega_samples=sw["omega_samples"], seed=cfg.seed, threads=threads)
    summary = {
        "orbit_bounds": lemma1.summary(),
        "self_test_corrupt": corrupt,
        "product_hyperbolicity": hyper.summary(),
        "lyapunov_constant": {"chi": est.chi_top, "eps": eps, "C_eps": c_eps.value, "witness": c_eps.witness,
                   "label": "empirical"},
        "diophantine": _diophantine(cfg),
        "seed": cfg.seed,
    }
    summary["passed"] = lemma1.passed and hyper.passed
    code = EXIT_OK if summary["passed"] else EXIT_VIOLATION
    return code, {"verify.json": dump_json(summary)}


def run_diophantine(cfg: RunConfig, threads: int = 1) -> tuple[int, dict[str, str]]:
    return EXIT_OK, {"diophantine.json": dump_json(_diophantine(cfg))}


COMMANDS = {"analyze": run_analyze, "correlate": run_correlate, "verify": run_verify,
            "diophantine": run_diophantine}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toralmix", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration (version 1)")
    p.add_argument("--out", default=".", help="directory for CSV/JSON artifacts")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads; never changes the output")
    p.add_argument("--self-test-corrupt", action="store_true",
                   help="verify only: rerun the orbit sweep with lambda halved")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.self_test_corrupt and args.command != "verify":
        print("error: --self-test-corrupt applies to verify only", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, seed=args.seed)
        run = COMMANDS[args.command]
        kwargs = {"threads": args.threads}
        if args.command == "verify":
            kwargs["corrupt"] = args.self_test_corrupt
        code, files = run(cfg, **kwargs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConePropertyError as exc:
        print(f"cone property failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        if exc.witness is not None:
            print(f"witness: {exc.witness}", file=sys.stderr)
        return EXIT_CONE
    except ToralError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    print(f"{args.command}: exit {code}; wrote {', '.join(sorted(files))} to {out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
