"""Command line front end: TOML job configs in, JSON reports out.

    spectralsheaf example funny --json funny.json
    spectralsheaf classify job.toml
    spectralsheaf curve --set g2=3 --set g3=-1
    spectralsheaf torsion classify pair.json
    spectralsheaf run batch.toml --jobs 4 --json reports.json
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from gmpy2 import mpq

from . import __version__
from .diffop import DEFAULT_TAU, DiffOp
from .errors import (
    ConsistencyError,
    InconclusivePrecision,
    IrrationalSupport,
    ParseError,
    PoleOrderExceeded,
    SpectralError,
    ValidationError,
)
from .grunbaum import (
    DEFAULT_PREC,
    DegenerateSelfAdjoint,
    Dixmier,
    FourierDixmier,
    Generic,
    NotLocallyFree,
    SelfAdjoint,
    Wallenberg,
    build_pair,
    params_to_json,
    poly_f,
    verify_pair,
)
from .parser import parse_operator, parse_series
from .psdo import DEFAULT_DEPTH, build_M
from .scalars import fmt_scalar, parse_rational, parse_scalar
from .series import LaurentSeries
from .spectral import (
    _curve_of,
    classification_json,
    classify_sheaf,
    curve_info,
    exponent_data,
    gcd_with_trace,
    support_of_T,
)
from .torsmod import MatPair, classify, sheaf_of_torsion3

EXIT_OK, EXIT_VALIDATION, EXIT_PRECISION, EXIT_CONSISTENCY = 0, 2, 3, 4
KINDS = ("verify", "curve", "support", "gcd", "classify", "torsion", "example")
EXAMPLES = ("dixmier", "fourier-dixmier", "wallenberg", "funny", "interesting-family")


def exit_code(err: BaseException) -> int:
    if isinstance(err, ConsistencyError):
        return EXIT_CONSISTENCY
    if isinstance(err, (InconclusivePrecision, PoleOrderExceeded)):
        return EXIT_PRECISION
    if isinstance(err, (ValidationError, ParseError, IrrationalSupport, SpectralError, ValueError)):
        return EXIT_VALIDATION
    return 1


# ---------------------------------------------------------------- configs


@dataclass
class JobConfig:
    kind: str
    family: Optional[str] = None
    params: dict = field(default_factory=dict)
    prec: int = DEFAULT_PREC
    depth: int = DEFAULT_DEPTH
    tau: int = DEFAULT_TAU
    point: Optional[tuple] = None
    output: Optional[str] = None
    name: Optional[str] = None

    RESERVED = ("kind", "family", "prec", "depth", "tau_prec", "point", "output", "name")

    @classmethod
    def from_mapping(cls, d: dict) -> "JobConfig":
        kind = d.get("kind")
        if kind not in KINDS:
            raise ValidationError(f"job kind must be one of {', '.join(KINDS)}; got {kind!r}")
        cfg = cls(kind=kind, family=d.get("family"), name=d.get("name"), output=d.get("output"))
        for key, attr in (("prec", "prec"), ("depth", "depth"), ("tau_prec", "tau")):
            if key in d:
                v = d[key]
                if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                    raise ValidationError(f"{key} must be a positive integer")
                setattr(cfg, attr, v)
        if "point" in d:
            pt = d["point"]
            if not isinstance(pt, list) or len(pt) != 2:
                raise ValidationError("point must be [lambda, mu]")
            cfg.point = tuple(parse_scalar(str(x)) for x in pt)
        cfg.params = {k: v for k, v in d.items() if k not in cls.RESERVED}
        cfg.validate()
        return cfg

    def validate(self):
        if self.kind == "example":
            if self.name not in EXAMPLES:
                raise ValidationError(f"example name must be one of {', '.join(EXAMPLES)}")
        elif self.kind == "torsion":
            if "U" not in self.params or "V" not in self.params:
                raise ValidationError("torsion jobs need matrices U and V")
        elif self.kind == "curve" and self.family is None:
            for k in ("g2", "g3"):
                if k not in self.params:
                    raise ValidationError("curve jobs need g2 and g3 or a family")
        else:
            if self.family is None:
                raise ValidationError(f"{self.kind} jobs need a family")
            parse_params(self.family, self.params, self.prec)
        if self.kind == "gcd" and self.point is None:
            raise ValidationError("gcd jobs need point = [lambda, mu]")

    def echo(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.name:
            out["name"] = self.name
        if self.family:
            out["family"] = self.family
        out["params"] = {k: self.params[k] for k in sorted(self.params)}
        out.update(prec=self.prec, depth=self.depth, tau_prec=self.tau)
        if self.point is not None:
            out["point"] = [fmt_scalar(x) for x in self.point]
        return out


def _rat(params, key):
    if key not in params:
        raise ValidationError(f"missing parameter {key}")
    return parse_rational(str(params[key]))


def _series_param(params, key, start=1, prec=DEFAULT_PREC):
    if key not in params:
        raise ValidationError(f"missing parameter {key}")
    v = params[key]
    if isinstance(v, str):
        return parse_series(v, terms=prec)
    if isinstance(v, list):
        return poly_f([parse_rational(str(x)) for x in v], start)
    raise ValidationError(f"{key} must be a list of coefficients or an expression")


def parse_params(family: str, p: dict, prec=DEFAULT_PREC):
    if family == "self-adjoint":
        return SelfAdjoint(_rat(p, "K2"), _rat(p, "K3"), _series_param(p, "f", prec=prec))
    if family == "generic":
        return Generic(*(_rat(p, k) for k in ("K10", "K11", "K12", "K14")), _series_param(p, "f", prec=prec))
    if family == "not-locally-free":
        return NotLocallyFree(_rat(p, "rho"), _series_param(p, "f", prec=prec))
    if family == "degenerate":
        return DegenerateSelfAdjoint(_series_param(p, "c2", start=0, prec=prec), _rat(p, "gamma"))
    if family == "dixmier":
        return Dixmier(_rat(p, "kappa"))
    if family == "fourier-dixmier":
        return FourierDixmier(_rat(p, "kappa"))
    if family == "wallenberg":
        return Wallenberg(*(_rat(p, k) for k in ("g2", "g3", "x0", "y0")))
    raise ValidationError(f"unknown family {family!r}")


# ---------------------------------------------------------------- jobs


def _op_json(op: DiffOp) -> dict:
    out = op.to_json()
    out["text"] = repr(op)
    return out


def _certificates(pair, tau) -> dict:
    rep = verify_pair(pair, tau)
    return rep.to_json()


def _job_verify(cfg, params):
    pair = build_pair(params, cfg.prec, cfg.depth)
    rep = verify_pair(pair, cfg.tau)
    return {
        "params": params_to_json(params),
        "L": _op_json(pair.L),
        "M": _op_json(pair.M),
        "g2": fmt_scalar(pair.g2),
        "g3": fmt_scalar(pair.g3),
        "rank_declared": pair.rank,
        "relation": [fmt_scalar(c) for c in pair.relation],
        "certificates": rep.to_json(),
        "ok": rep.ok and rep.rank == pair.rank,
    }


def _job_curve(cfg, params):
    if params is None:
        c = curve_info(_rat(cfg.params, "g2"), _rat(cfg.params, "g3"))
    else:
        c = _curve_of(params)
    return {"curve": c.to_json()}


def _job_support(cfg, params):
    return {"curve": _curve_of(params).to_json(), "support": [p.to_json() for p in support_of_T(params)]}


def _gcd_json(pair, lam, mu, tau):
    res = gcd_with_trace(pair, lam, mu, tau)
    R = res.R
    out = {"gcd": _op_json(R), "remainder_orders": [r.order for r in res.remainders], "checks": res.checks}
    if R.order in (2, 3):
        ex = exponent_data(R)
        out["exponents"] = [fmt_scalar(e) for e in ex.exponents]
        out["nu"] = ex.nu
        out["c1_pole"] = ex.c1_pole
    return out


def _job_gcd(cfg, params):
    pair = build_pair(params, cfg.prec, cfg.depth)
    if isinstance(params, Dixmier):
        pair = _dixmier_as_y(pair, params)
    lam, mu = cfg.point
    out = {"point": [fmt_scalar(lam), fmt_scalar(mu)]}
    out.update(_gcd_json(pair, lam, mu, cfg.tau))
    return out


def _dixmier_as_y(pair, params):
    from .grunbaum import OperatorPair

    return OperatorPair(pair.L, pair.M * 2, pair.g2, pair.g3, pair.rank, params)


def _job_classify(cfg, params):
    if isinstance(params, Wallenberg):
        raise ValidationError("classification covers the rank-two families and the Fourier-Dixmier example")
    pair = build_pair(params, cfg.prec, cfg.depth)
    cls = classify_sheaf(params, cfg.tau, cfg.prec, cfg.depth, pair=pair)
    out = classification_json(cls)
    out["certificates"] = _certificates(pair, cfg.tau)
    out["certificates"]["consistency"] = "gcd orders, c1 poles and exponents agree with the verdict"
    if len(cls.evidence) == 1:
        e = cls.evidence[0]
        out["gcd"] = {"order": e.gcd_order, "coeffs": [c.to_json() for c in e.gcd.coeffs], "text": repr(e.gcd)}
        if e.exponents is not None:
            out["exponents"] = [fmt_scalar(x) for x in e.exponents.exponents]
            out["nu"] = e.exponents.nu
    return out


def _job_torsion(cfg, _params):
    pair = MatPair.from_json(cfg.params)
    nf = classify(pair)
    out = {"pair": pair.to_json(), "normal_form": nf.to_json(), "text": str(nf)}
    if pair.n == 3 and nf.tag != "Decomposable":
        out["sheaf"] = sheaf_of_torsion3(nf)
    return out


# pinned parameters of the bundled examples
EXAMPLE_DEFAULTS = {
    "dixmier": ("dixmier", {"kappa": "0"}),
    "fourier-dixmier": ("fourier-dixmier", {"kappa": "0"}),
    "wallenberg": ("wallenberg", {"g2": "0", "g3": "0", "x0": "1", "y0": "2"}),
    "funny": ("not-locally-free", {"rho": "0", "f": ["1"]}),
    "interesting-family": ("generic", {"K10": "0", "K11": "1", "K12": "1", "K14": "0", "f": ["1"]}),
}


def _job_example(cfg, _params):
    fam, defaults = EXAMPLE_DEFAULTS[cfg.name]
    p = dict(defaults)
    p.update(cfg.params)
    params = parse_params(fam, p, cfg.prec)
    out: dict[str, Any] = {"family": fam}
    out.update(_job_verify(cfg, params))
    pair = build_pair(params, cfg.prec, cfg.depth)
    if cfg.name == "dixmier":
        out["build_M_equals_2Q"] = build_M(pair.L, cfg.depth) == pair.M * 2
    if cfg.name == "wallenberg":
        from .grunbaum import wallenberg_u

        u = wallenberg_u(params.g2, params.g3, params.x0, params.y0, cfg.prec)
        out["u"] = u.to_json()
        return out
    if cfg.point is not None:
        lam, mu = cfg.point
        if isinstance(params, Dixmier):
            pair = _dixmier_as_y(pair, params)
        out["gcd_at_point"] = {"point": [fmt_scalar(lam), fmt_scalar(mu)], **_gcd_json(pair, lam, mu, cfg.tau)}
    cls = classify_sheaf(params, cfg.tau, cfg.prec, cfg.depth, pair=build_pair(params, cfg.prec, cfg.depth))
    out["classification"] = classification_json(cls)
    if len(cls.evidence) == 1:
        e = cls.evidence[0]
        out["gcd"] = {"order": e.gcd_order, "coeffs": [c.to_json() for c in e.gcd.coeffs], "text": repr(e.gcd)}
    return out


JOBS = {
    "verify": _job_verify,
    "curve": _job_curve,
    "support": _job_support,
    "gcd": _job_gcd,
    "classify": _job_classify,
    "torsion": _job_torsion,
    "example": _job_example,
}


def run(cfg: JobConfig) -> dict:
    """Run one job and return its report.  Domain errors propagate."""
    t0 = time.perf_counter()
    params = None
    if cfg.family is not None and cfg.kind not in ("torsion", "example"):
        params = parse_params(cfg.family, cfg.params, cfg.prec)
    result = JOBS[cfg.kind](cfg, params)
    return {
        "tool": "spectralsheaf",
        "version": __version__,
        "job": cfg.echo(),
        "result": result,
        "wall_time": round(time.perf_counter() - t0, 6),
    }


def _run_safe(cfg: JobConfig):
    try:
        return run(cfg), None
    except Exception as e:  # reported per job
        return None, {"type": type(e).__name__, "message": str(e), "exit_code": exit_code(e)}


# ---------------------------------------------------------------- io


def load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        line = getattr(e, "lineno", None)
        col = getattr(e, "colno", None)
        raise ParseError(f"{path}: {e}", line, col) from None
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e.strerror}") from None


def load_jobs(path: str) -> list[JobConfig]:
    if path.endswith(".json"):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: {e.msg}", e.lineno, e.colno) from None
    else:
        data = load_toml(path)
    if "jobs" in data:
        return [JobConfig.from_mapping(j) for j in data["jobs"]]
    return [JobConfig.from_mapping(data)]


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def summary_line(rep: dict) -> str:
    job, res = rep["job"], rep["result"]
    head = f"[{job['kind']}{':' + job['name'] if 'name' in job else ''}{' ' + job['family'] if 'family' in job else ''}]"
    bits = []
    if "certificates" in res:
        c = res["certificates"]
        bits.append(f"commutator 0 to z^{c['commutator_prec']}, relation to z^{c['relation_prec']}")
    if "curve" in res and isinstance(res["curve"], dict):
        bits.append(f"curve {res['curve']['kind']} (delta = {res['curve']['delta']})")
    cls = res.get("class") or (res.get("classification") or {}).get("class")
    if cls:
        bits.append(f"class {cls['tag']}")
    if "gcd" in res:
        bits.append(f"gcd order {res['gcd']['order']}")
    if "text" in res and "normal_form" in res:
        bits.append(f"normal form {res['text']}")
    if "support" in res:
        bits.append(f"{len(res['support'])} support point(s)")
    return head + " " + "; ".join(bits)


# ---------------------------------------------------------------- argparse


def _add_common(p):
    p.add_argument("--prec", type=int, help="series coefficients kept (default 48)")
    p.add_argument("--depth", type=int, help="pseudo-differential depth (default 12)")
    p.add_argument("--tau-prec", type=int, dest="tau", help="precision needed to certify a vanishing (default 16)")
    p.add_argument("--json", dest="json_path", help="write the JSON report here ('-' for stdout)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a job field")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spectralsheaf", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"spectralsheaf {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)
    for kind in ("verify", "curve", "support", "gcd", "classify"):
        p = sub.add_parser(kind, help=f"run a {kind} job")
        p.add_argument("config", nargs="?", help="TOML job file")
        p.add_argument("--family")
        p.add_argument("--point", nargs=2, metavar=("LAMBDA", "MU"))
        _add_common(p)
    t = sub.add_parser("torsion", help="torsion modules over k[[t^2, t^3]]")
    tsub = t.add_subparsers(dest="tcmd", required=True)
    tc = tsub.add_parser("classify", help="normal form of a matrix pair")
    tc.add_argument("config", help="TOML or JSON file with n, U, V")
    _add_common(tc)
    e = sub.add_parser("example", help="bundled examples")
    e.add_argument("name", choices=EXAMPLES)
    e.add_argument("--point", nargs=2, metavar=("LAMBDA", "MU"))
    _add_common(e)
    r = sub.add_parser("run", help="run a job file or a batch of [[jobs]]")
    r.add_argument("config")
    r.add_argument("--jobs", type=int, default=1, help="worker processes")
    r.add_argument("--json", dest="json_path")
    return ap


def _overrides(pairs):
    out = {}
    for s in pairs:
        if "=" not in s:
            raise ValidationError(f"--set expects KEY=VALUE, got {s!r}")
        k, v = s.split("=", 1)
        k = k.strip()
        v = v.strip()
        if k in ("prec", "depth", "tau_prec"):
            try:
                out[k] = int(v)
            except ValueError:
                raise ValidationError(f"{k} must be an integer") from None
        elif k in ("f", "c2") and v.startswith("["):
            out[k] = [x.strip() for x in v.strip("[]").split(",") if x.strip()]
        else:
            out[k] = v
    return out


def _config_from_args(args) -> list[JobConfig]:
    if args.cmd == "run":
        return load_jobs(args.config)
    base: dict = {}
    if getattr(args, "config", None):
        loaded = load_toml(args.config) if not args.config.endswith(".json") else json.load(open(args.config))
        base.update(loaded)
    if args.cmd == "torsion":
        base["kind"] = "torsion"
    elif args.cmd == "example":
        base.update(kind="example", name=args.name)
    else:
        base["kind"] = args.cmd
        if args.family:
            base["family"] = args.family
    if getattr(args, "point", None):
        base["point"] = list(args.point)
    base.update(_overrides(args.set))
    for key, attr in (("prec", "prec"), ("depth", "depth"), ("tau_prec", "tau")):
        v = getattr(args, attr, None)
        if v is not None:
            base[key] = v
    return [JobConfig.from_mapping(base)]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfgs = _config_from_args(args)
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code(e)
    workers = getattr(args, "jobs", 1) or 1
    if workers > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_safe, cfgs))
    else:
        results = [_run_safe(c) for c in cfgs]
    path = getattr(args, "json_path", None)
    # keep stdout clean when it carries the JSON
    human = sys.stderr if path == "-" else sys.stdout
    code = 0
    for cfg, (rep, err) in zip(cfgs, results):
        if err is not None:
            print(f"error [{cfg.kind}]: {err['type']}: {err['message']}", file=sys.stderr)
            code = max(code, err["exit_code"])
        else:
            print(summary_line(rep), file=human)
    if code:
        return code
    reports = [r for r, _ in results]
    payload = reports[0] if args.cmd != "run" else {"reports": reports}
    if path == "-":
        sys.stdout.write(dumps(payload))
    elif path:
        write_atomic(path, dumps(payload))
    for cfg, rep in zip(cfgs, reports):
        if cfg.output:
            write_atomic(cfg.output, dumps(rep))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
