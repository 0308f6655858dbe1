"""Command-line front end.

    pnlv integrate --eq iv --alpha 0 --beta -2 --seed jet:z=1,w=-2,w1=-2 --path segment:1,5
    pnlv polefield --solution special:wh,gamma=1 --r1 20 --out poles.json --svg poles.svg
    pnlv strings --in poles.json
    pnlv verify --suite laurent

Flags override config-file keys, which override defaults.  Every output
carries the full run configuration and a hash of its content.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .eqcore import EquationSpec, Jet
from .errors import PainleveError

SUBCOMMANDS = ("integrate", "polefield", "strings", "backlund", "series", "rescale",
               "special", "verify")


class UsageError(Exception):
    pass


def parse_complex(s) -> complex:
    """'a+bi' (no spaces) -> complex; plain reals pass through."""
    if isinstance(s, (int, float, complex)):
        return complex(s)
    t = str(s).strip()
    if not t or " " in t:
        raise UsageError(f"bad complex number {s!r}")
    try:
        return complex(t.replace("i", "j"))
    except ValueError:
        raise UsageError(f"bad complex number {s!r}") from None


def _kv(text):
    """'a=1,b=2' -> {'a': '1', 'b': '2'}; bare words map to ''."""
    out = {}
    for part in filter(None, text.split(",")):
        k, _, v = part.partition("=")
        out[k.strip()] = v.strip()
    return out


def _enc(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_enc(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {k: _enc(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_enc(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    subcommand: str
    eq: str = "iv"
    alpha: str = "0"
    beta: str = "0"
    gammaBranch: str = "plus"
    seed: str = ""
    solution: str = ""
    path: str = ""
    region: dict = field(default_factory=dict)
    tol: float = 1e-10
    out: str = ""
    svg: str = ""
    inp: str = ""
    randomSeed: int = 0
    extra: dict = field(default_factory=dict)

    def equation(self) -> EquationSpec:
        k = self.eq.lower()
        if k in ("i", "pi", "1"):
            return EquationSpec.pi()
        if k in ("ii", "pii", "2"):
            return EquationSpec.pii(parse_complex(self.alpha))
        if k in ("iv", "piv", "4"):
            return EquationSpec.piv(parse_complex(self.alpha), parse_complex(self.beta),
                                    self.gammaBranch)
        raise UsageError(f"unknown equation {self.eq!r}")

    def to_dict(self):
        return asdict(self)


_FIELDS = {f for f in RunConfig.__dataclass_fields__} - {"subcommand", "extra", "region"}
_REGION = ("r0", "r1", "theta0", "theta1")


def read_config(path, subcommand):
    """Flat key=value file with optional [section] headers (the section named
    after the subcommand wins over the others), or a JSON object."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        d = json.loads(text)
        flat = {k: v for k, v in d.items() if not isinstance(v, dict)}
        flat.update(d.get(subcommand, {}) if isinstance(d.get(subcommand), dict) else {})
        return flat
    cp = configparser.ConfigParser(default_section="common", interpolation=None)
    cp.optionxform = str
    cp.read_string("[common]\n" + text)
    out = dict(cp["common"])
    if cp.has_section(subcommand):
        out.update(cp[subcommand])
    return out


def build_config(args) -> RunConfig:
    cfg = RunConfig(args.subcommand)
    layers = []
    if getattr(args, "config", None):
        layers.append(read_config(args.config, args.subcommand))
    layers.append({k: v for k, v in vars(args).items() if v is not None})
    for layer in layers:
        for k, v in layer.items():
            if k in ("subcommand", "config", "func"):
                continue
            if k in _REGION:
                cfg.region[k] = float(v)
            elif k in _FIELDS:
                if k == "tol":
                    v = float(v)
                elif k == "randomSeed":
                    v = int(v)
                setattr(cfg, k, v)
            else:
                cfg.extra[k] = v
    return cfg


def emit_json(cfg, result, path=None):
    body = json.dumps(_enc(result), indent=1, sort_keys=True)
    h = hashlib.sha256(body.encode()).hexdigest()
    text = json.dumps({"config": _enc(cfg.to_dict()), "contentHash": h,
                       "result": json.loads(body)}, indent=1, sort_keys=True) + "\n"
    _write(text, path)
    return text


def emit_csv(cfg, body, path=None):
    h = hashlib.sha256(body.encode()).hexdigest()
    head = "# config: " + json.dumps(_enc(cfg.to_dict()), sort_keys=True) + "\n"
    head += f"# contentHash: {h}\n"
    _write(head + body, path)


def _write(text, path):
    if path and path != "-":
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def read_payload(path):
    """JSON written by this tool (result inside) or a bare catalogue."""
    with open(path) as fh:
        d = json.load(fh)
    return d.get("result", d)


# ---------------------------------------------------------------------------
# descriptors


def parse_seed(desc, eq):
    """pole:p=..,eps=..,h=..  or  jet:z=..,w=..,w1=..  -> Jet at the start."""
    from .localseries import PoleSeed
    kind, _, rest = desc.partition(":")
    kv = _kv(rest)
    if kind == "jet":
        try:
            j = Jet(parse_complex(kv["z"]), parse_complex(kv["w"]), parse_complex(kv["w1"]))
        except KeyError as exc:
            raise UsageError(f"jet seed needs z, w, w1 (missing {exc})") from None
        return j, None
    if kind == "pole":
        sd = PoleSeed(eq, parse_complex(kv.get("p", "0")), int(kv.get("eps", "1")),
                      parse_complex(kv.get("h", "0")))
        return None, sd
    raise UsageError(f"seed must be pole:... or jet:..., got {desc!r}")


def parse_path(desc):
    from .integrate import PathSpec
    kind, _, rest = desc.partition(":")
    nums = [x for x in rest.replace(";", ",").split(",") if x]
    try:
        if kind == "segment":
            return PathSpec.segment(parse_complex(nums[0]), parse_complex(nums[1]))
        if kind == "ray":
            return PathSpec.ray(parse_complex(nums[0]), float(nums[1]), float(nums[2]))
        if kind == "polyline":
            return PathSpec.polyline([parse_complex(x) for x in nums])
        if kind == "circle":
            turns = float(nums[2]) if len(nums) > 2 else 1.0
            t0 = float(nums[3]) if len(nums) > 3 else 0.0
            return PathSpec.circle(parse_complex(nums[0]), float(nums[1]), turns, t0)
    except IndexError:
        raise UsageError(f"path {desc!r} has too few numbers") from None
    raise UsageError(f"unknown path kind {kind!r}")


def parse_solution(desc, cfg):
    """special:wh,gamma=..,u0=..,u1=..,branch=..  special:airy,...
    chain:order=..,gamma=..,u0=..,u1=..,rotate=0|1   jet:z=..,w=..,w1=.."""
    from .backlund import RotatedSolution, chain_solution
    from .polefield import IntegratorAccessor
    from .special import airy_solution, weber_hermite
    kind, _, rest = desc.partition(":")
    kv = _kv(rest)
    init = (parse_complex(kv.get("u0", "1")), parse_complex(kv.get("u1", "0")))
    if kind == "special":
        if "wh" in kv:
            return weber_hermite(parse_complex(kv.get("gamma", "1")), kv.get("branch", "plus"),
                                 init)
        if "airy" in kv:
            return airy_solution(kv.get("branch", "plus"), init)
        raise UsageError("special solution must be wh or airy")
    if kind == "chain":
        seed = weber_hermite(parse_complex(kv.get("gamma", "1")), "plus", init)
        sol = chain_solution(seed, int(kv.get("order", "1")))
        return RotatedSolution(sol) if kv.get("rotate", "0") not in ("", "0") else sol
    if kind == "jet":
        eq = cfg.equation()
        j, _ = parse_seed(desc, eq)
        return IntegratorAccessor(eq, j, tol=cfg.tol)
    raise UsageError(f"unknown solution descriptor {desc!r}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_integrate(cfg):
    from .integrate import integrate
    from .localseries import seed_jet
    eq = cfg.equation()
    path = parse_path(cfg.path or "segment:0,1")
    jet, sd = parse_seed(cfg.seed or "jet:z=0,w=0,w1=0", eq)
    if sd is not None:
        off = path.start() - sd.p
        jet = seed_jet(sd, off)
    tr = integrate(eq, jet, path, tol=cfg.tol)
    emit_csv(cfg, tr.to_csv(), cfg.out)
    ev = cfg.extra.get("events")
    if ev:
        emit_json(cfg, json.loads(tr.pole_events_json()), ev)
    return 0


def cmd_polefield(cfg):
    from .polefield import sweep
    sol = parse_solution(cfg.solution or "special:wh,gamma=1", cfg)
    eq = getattr(sol, "eq", None)
    region = {"r0": 0.0, "r1": 10.0}
    region.update(cfg.region)
    strategy = {"zeros": str(cfg.extra.get("zeros", "0")).lower() in ("1", "true", "yes")}
    cat = sweep(eq, sol, region, strategy)
    emit_json(cfg, cat.to_dict(), cfg.out)
    if cfg.svg:
        with open(cfg.svg, "w") as fh:
            fh.write(cat.to_svg())
    return 0


def cmd_strings(cfg):
    from .polefield import PoleCatalog, cluster_strings, counting_function, lemma_checks
    if not cfg.inp:
        raise UsageError("strings needs --in poles.json")
    cat = PoleCatalog.from_dict(read_payload(cfg.inp))
    strings, unchained = cluster_strings(cat)
    out = []
    for s in strings:
        d = s.to_dict()
        d["lemma"] = lemma_checks(s, cat)
        out.append(d)
    emit_json(cfg, {"strings": out, "unchained": unchained,
                    "counting": counting_function(cat)}, cfg.out)
    return 0


def cmd_backlund(cfg):
    from .backlund import ParameterState, bii_transforms, biv_forward, biv_inverse
    eq = cfg.equation()
    jet, _ = parse_seed(cfg.seed or "", eq)
    if jet is None:
        raise UsageError("backlund needs a jet seed")
    direction = cfg.extra.get("direction", "forward")
    if eq.kind == "PIV":
        ps = ParameterState(eq.alpha, eq.gamma)
        f = biv_forward if direction == "forward" else biv_inverse
        j, new = f(jet, ps)
        res = {"jet": {"z": j.z, "w": j.w, "w1": j.w1},
               "alpha": new.alpha, "beta": new.beta, "gamma": new.gamma}
    elif eq.kind == "PII":
        d = "plus" if direction in ("forward", "plus") else "minus"
        j, a = bii_transforms(jet, eq.alpha, d)
        res = {"jet": {"z": j.z, "w": j.w, "w1": j.w1}, "alpha": a}
    else:
        raise UsageError("no Backlund transformation for equation I")
    emit_json(cfg, res, cfg.out)
    return 0


def cmd_series(cfg):
    from .localseries import (AsymptoticFamily, asymptotic_series, asymptotic_series_W,
                              laurent_W, laurent_w, log_derivative_series)
    eq = cfg.equation()
    N = int(cfg.extra.get("N", 12))
    fam = cfg.extra.get("family")
    if fam == "logDerivative":
        res = {"w'/w": log_derivative_series(eq, cfg.extra.get("pair", "02"), N).to_dict()}
    elif fam:
        branch = int(cfg.extra.get("branch", 1))
        f = AsymptoticFamily(fam, branch)
        res = {"w": asymptotic_series(f, eq, N).to_dict(),
               "W": asymptotic_series_W(f, eq, N).to_dict()}
    else:
        _, sd = parse_seed(cfg.seed or "pole:p=0", eq)
        if sd is None:
            raise UsageError("series needs a pole seed or --family")
        res = {"w": laurent_w(sd, max(N, 4)).to_dict(), "W": laurent_W(sd, max(N, 4)).to_dict()}
    emit_json(cfg, res, cfg.out)
    return 0


def cmd_rescale(cfg):
    from .polefield import PoleCatalog, accessor_for
    from .rescale import (RescaleFrame, circle_grid, cluster_estimate, limit_ode_residual,
                          pole_cluster_value, rescale_window)
    if not cfg.inp:
        raise UsageError("rescale needs --in poles.json")
    cat = PoleCatalog.from_dict(read_payload(cfg.inp))
    acc = accessor_for(parse_solution(cfg.solution or "special:wh,gamma=1", cfg))
    kind = cat.eq.kind
    lim = {"PI": "i", "PII": "ii", "PIV": "iv"}[kind]
    top = int(cfg.extra.get("top", 10))
    rows = []
    for sd in sorted(cat.poles, key=lambda s: -abs(s.p))[:top]:
        fr = RescaleFrame.for_kind(kind, sd.p, circle_grid(0.5, 32))
        _, w, w1 = rescale_window(acc, fr)
        c = pole_cluster_value(sd)
        rows.append({"p": sd.p, "c": c, "residual": limit_ode_residual(lim, w, w1, c)})
    r1 = float(cat.region.get("r1", 10.0))
    est = cluster_estimate(acc, float(cfg.extra.get("theta", 0.1)), (r1 / 3, r1), cat.poles,
                           eq=cat.eq)
    emit_json(cfg, {"windows": rows, "cluster": est.to_dict()}, cfg.out)
    return 0


def cmd_special(cfg):
    from .special import hastings_mcleod_shoot, rational_solutions
    which = cfg.extra.get("which", "wh")
    pts = [parse_complex(x) for x in str(cfg.extra.get("at", "1")).split(",") if x]
    if which == "hm":
        j, (lo, hi), k = hastings_mcleod_shoot()
        res = {"w0": j.w, "w1": j.w1, "bracket": [lo, hi], "k": k}
    elif which == "rational":
        sols = rational_solutions(cfg.equation())
        res = {"solutions": [{"w": str(s), "values": [s(z) for z in pts]} for s in sols]}
    else:
        sol = parse_solution(cfg.solution or f"special:{which}", cfg)
        vals = []
        for z in pts:
            j = sol.jet(z)
            vals.append({"z": z, "w": j.w, "w1": j.w1})
        res = {"eq": sol.eq.to_dict(), "values": vals}
    emit_json(cfg, res, cfg.out)
    return 0


def cmd_verify(cfg):
    from . import verify
    names = cfg.extra.get("suite") or []
    if cfg.extra.get("all") or not names:
        names = list(verify.SUITES)
    for n in names:
        if n not in verify.SUITES:
            raise UsageError(f"unknown suite {n!r}; choose from {', '.join(verify.SUITES)}")
    results = []
    for n in names:
        c = verify.SUITES[n]()
        print(c.line(), file=sys.stderr)
        results.append(c)
    if cfg.out:
        emit_json(cfg, [c.to_dict() for c in results], cfg.out)
    return 0 if all(c.passed for c in results) else 2


COMMANDS = {"integrate": cmd_integrate, "polefield": cmd_polefield, "strings": cmd_strings,
            "backlund": cmd_backlund, "series": cmd_series, "rescale": cmd_rescale,
            "special": cmd_special, "verify": cmd_verify}


def make_parser():
    ap = argparse.ArgumentParser(prog="pnlv", description="Painleve I, II, IV laboratory")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config")
        p.add_argument("--eq", choices=["i", "ii", "iv"])
        p.add_argument("--alpha")
        p.add_argument("--beta")
        p.add_argument("--gamma-branch", dest="gammaBranch", choices=["plus", "minus"])
        p.add_argument("--tol", type=float)
        p.add_argument("--out")
        p.add_argument("--random-seed", dest="randomSeed", type=int)
        return p

    p = common(sub.add_parser("integrate", help="integrate along a path, CSV out"))
    p.add_argument("--seed")
    p.add_argument("--path")
    p.add_argument("--events", help="write pole events JSON here")

    p = common(sub.add_parser("polefield", help="sweep a region for poles (and zeros)"))
    p.add_argument("--solution")
    for k in _REGION:
        p.add_argument(f"--{k}", type=float)
    p.add_argument("--zeros", action="store_const", const="1")
    p.add_argument("--svg")

    p = common(sub.add_parser("strings", help="chain catalogued poles into strings"))
    p.add_argument("--in", dest="inp")

    p = common(sub.add_parser("backlund", help="transform a jet"))
    p.add_argument("--seed")
    p.add_argument("--direction", choices=["forward", "inverse", "plus", "minus"])

    p = common(sub.add_parser("series", help="Laurent or asymptotic coefficients"))
    p.add_argument("--seed")
    p.add_argument("--family")
    p.add_argument("--pair")
    p.add_argument("--branch")
    p.add_argument("-N", dest="N", type=int)

    p = common(sub.add_parser("rescale", help="re-scaling windows and cluster samples"))
    p.add_argument("--in", dest="inp")
    p.add_argument("--solution")
    p.add_argument("--top", type=int)
    p.add_argument("--theta", type=float)

    p = common(sub.add_parser("special", help="evaluate special solutions"))
    p.add_argument("--which", choices=["wh", "airy", "rational", "hm"])
    p.add_argument("--solution")
    p.add_argument("--at", help="comma separated points")

    p = common(sub.add_parser("verify", help="run acceptance suites"))
    p.add_argument("--suite", action="append")
    p.add_argument("--all", action="store_const", const=True)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 1
    try:
        cfg = build_config(args)
        if cfg.subcommand == "verify" and args.suite:
            cfg.extra["suite"] = args.suite
        return COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"pnlv: {exc}", file=sys.stderr)
        return 1
    except (PainleveError, ValueError, OSError, KeyError) as exc:
        print(f"pnlv: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
