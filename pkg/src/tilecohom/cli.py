"""Command-line front end.

Exit codes: 0 ok, 2 input error, 3 computation error, 4 inconclusive verdict.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .cochain import BoundednessConfig, PECochain, class_equal, delta_x, is_coboundary
from .delone import (
    LabeledDeloneSet,
    check_delone,
    delone_distance,
    voronoi,
)
from .deformation import (
    ConjugateToOriginal,
    DeformationError,
    Inconclusive,
    SmoothingRefused,
    conjugacy_check,
    deformation_class,
    geometric_series_cochain,
    make_deformation,
    orbit_map,
    smoothing_sweep,
    strongly_pe_defect,
    unboundedness_growth,
)
from .exactnum import FieldScalar, NonPrimitiveError
from .ruelle import rs_exact, rs_invertible, rs_sweep
from .substitution import (
    DATA_DIR,
    RuleError,
    SubstitutionRule,
    generate_window,
    load_rule,
    supertile,
    validate_rule,
)
from .svg import series_svg, tilings_svg, voronoi_svg

OK, INPUT_ERROR, COMPUTE_ERROR, INCONCLUSIVE = 0, 2, 3, 4


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    """Validated knobs for one command."""

    command: str
    rule: str = "fibonacci"
    cochain: str | None = None
    deformation: str | None = None
    points: str | None = None
    other: str | None = None
    type: str | None = None
    n: int | None = None
    seed_word: str | None = None
    levels: tuple[int, int] | None = None
    radii: tuple = ()
    centers: int = 32
    eps: float = 0.2
    eps_grid: tuple = ()
    x: str | None = None
    truncation: int = 8
    defect_max: int = 10
    level: int = 22
    samples: int = 2000
    r: str | None = None
    R: str | None = None
    out: str | None = None
    seed: int = 0


# ---------------------------------------------------------------------------
# parsing helpers


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_range(text: str) -> tuple[int, int]:
    """'5:25' -> (5, 25)."""
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise InputError(f"expected lo:hi, got {text!r}") from None
    if lo > hi or lo < 0:
        raise InputError(f"bad range {text!r}")
    return lo, hi


def parse_doubling(text: str) -> tuple[int, ...]:
    """'10:160' -> (10, 20, 40, 80, 160); a comma list is taken as given."""
    if "," in text:
        vals = tuple(int(v) for v in text.split(","))
    else:
        lo, hi = parse_range(text)
        if lo <= 0:
            raise InputError("radii must be positive")
        vals = []
        r = lo
        while r <= hi:
            vals.append(r)
            r *= 2
        vals = tuple(vals)
    if not vals or min(vals) <= 0:
        raise InputError("radii must be positive")
    return vals


def parse_grid(text: str) -> tuple[Fraction, ...]:
    """'a:b:step' inclusive grid or a comma list."""
    try:
        if "," in text or ":" not in text:
            vals = tuple(Fraction(v) for v in text.split(","))
        else:
            lo, hi, step = (Fraction(v) for v in text.split(":"))
            if step <= 0:
                raise InputError("grid step must be positive")
            vals, v = [], lo
            while v <= hi:
                vals.append(v)
                v += step
            vals = tuple(vals)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad grid {text!r}") from None
    if not vals or min(vals) <= 0:
        raise InputError("grid values must be positive")
    return vals


def _read_json(path: str):
    p = Path(path)
    if not p.exists():
        bundled = DATA_DIR / f"{p.stem}.json"
        if p.suffix in ("", ".json") and bundled.exists():
            p = bundled
        else:
            raise InputError(f"file not found: {path}")
    try:
        return json.loads(p.read_text()), p
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def read_cochain(path: str) -> PECochain:
    obj, _ = _read_json(path)
    try:
        return PECochain.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad cochain ({exc})") from None


def read_deformation(path: str) -> tuple[SubstitutionRule, PECochain]:
    """Deformation file: {"rule": name | path | inline rule, "new_lengths": cochain}."""
    obj, p = _read_json(path)
    if not isinstance(obj, dict) or "new_lengths" not in obj:
        raise InputError(f"{path}: deformation needs 'rule' and 'new_lengths'")
    ref = obj.get("rule", "fibonacci")
    if isinstance(ref, str) and not Path(ref).exists() and (p.parent / ref).exists():
        ref = str(p.parent / ref)
    rule = load_rule(ref)
    validate_rule(rule)
    try:
        return rule, PECochain.from_json(obj["new_lengths"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad cochain ({exc})") from None


def read_points(path: str) -> LabeledDeloneSet:
    obj, _ = _read_json(path)
    try:
        return LabeledDeloneSet.from_json(obj)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{path}: bad point set ({exc})") from None


# ---------------------------------------------------------------------------
# output


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_default) + "\n"


def _default(v):
    if isinstance(v, FieldScalar):
        return {**v.to_json(), "float": float(v)}
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Emitter:
    def __init__(self, cfg: RunConfig, stdout):
        self.cfg = cfg
        self.stdout = stdout
        self.files: list[str] = []

    def file(self, name: str, text: str) -> None:
        if self.cfg.out:
            write_atomic(Path(self.cfg.out) / name, text)
            self.files.append(name)

    def result(self, obj: dict) -> None:
        text = _dumps(obj)
        self.file(f"{self.cfg.command}.json", text)
        self.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_supertile(cfg: RunConfig, em: Emitter) -> int:
    rule = load_rule(cfg.rule)
    word = supertile(rule, cfg.type, cfg.n)
    em.stdout.write(word + "\n")
    length = sum((rule.length(c) for c in word), FieldScalar(0))
    em.file("supertile.json", _dumps({"type": cfg.type, "n": cfg.n, "word": word, "length": length}))
    if cfg.n >= 1 and cfg.out:
        T = generate_window(rule, f"{cfg.type}|{_successor(rule, cfg.type)}", cfg.n)
        em.file("supertile.svg", tilings_svg([T], [f"sigma^{cfg.n}({cfg.type}) | following supertile"]))
    return OK


def _successor(rule: SubstitutionRule, t: str) -> str:
    from .substitution import legal_two_letter_words

    return sorted(w[1] for w in legal_two_letter_words(rule) if w[0] == t)[0]


def cmd_window(cfg: RunConfig, em: Emitter) -> int:
    rule = load_rule(cfg.rule)
    T = generate_window(rule, cfg.seed_word, cfg.n)
    lines = [f"{len(T)} tiles, window [{T.window[0]}, {T.window[1]}], origin between tiles "
             f"{T.origin_tile - 1} and {T.origin_tile}"]
    for i in range(len(T)):
        lines.append(f"{i}\t{T.types[i]}\t{T.lefts[i]}\t{T.lengths[i]}")
    em.stdout.write("\n".join(lines) + "\n")
    em.file("window.json", _dumps({
        "seed": cfg.seed_word, "n": cfg.n, "tiles": [
            {"type": T.types[i], "left": T.lefts[i], "length": T.lengths[i]} for i in range(len(T))]}))
    em.file("window.svg", tilings_svg([T], [f"seed {cfg.seed_word}, n={cfg.n}"]))
    return OK


def _deformation(cfg: RunConfig):
    rule, new = read_deformation(cfg.deformation)
    return make_deformation(rule, new)


def cmd_class(cfg: RunConfig, em: Emitter) -> int:
    d = _deformation(cfg)
    rule = d.rule
    cls = deformation_class(d)
    same, verdict = class_equal(cls, delta_x(rule), rule, BoundednessConfig())
    ok, cert = rs_invertible(cls, rule)
    em.result({
        "class": cls.to_json(),
        "class_text": str(cls),
        "fundamental_class": delta_x(rule).to_json(),
        "equals_fundamental_class": same,
        "difference_verdict": verdict.to_json(),
        "average": cert.to_json(),
        "min_length": d.min_length,
    })
    return OK if same is not None else INCONCLUSIVE


def cmd_conjugacy(cfg: RunConfig, em: Emitter) -> int:
    d = _deformation(cfg)
    verdict = conjugacy_check(d, samples=cfg.samples, seed=cfg.seed)
    em.result(verdict.to_json())
    if isinstance(verdict, ConjugateToOriginal) and cfg.out:
        T = generate_window(d.rule, "a|a" if "aa" in _pairs(d.rule) else _first(d.rule), 5)
        em.file("conjugacy.svg", tilings_svg([T, orbit_map(T, d).image], ["original", "deformed"]))
    return INCONCLUSIVE if isinstance(verdict, Inconclusive) else OK


def _pairs(rule):
    from .substitution import legal_two_letter_words

    return legal_two_letter_words(rule)


def _first(rule) -> str:
    w = sorted(_pairs(rule))[0]
    return f"{w[0]}|{w[1]}"


def cmd_rs(cfg: RunConfig, em: Emitter) -> int:
    rule = load_rule(cfg.rule)
    c = read_cochain(cfg.cochain) if cfg.cochain else delta_x(rule)
    T = generate_window(rule, cfg.seed_word or _first(rule), cfg.level)
    values, table = rs_sweep(c, T, cfg.radii, cfg.centers)
    exact = rs_exact(c, rule)
    csv_text = table.to_csv()
    em.file("rs.csv", csv_text)
    em.file("rs.svg", series_svg({"max deviation": [(float(r), table.max_deviation(r)) for r in table.radii()]},
                                 "max deviation from the exact average against r", logx=True, logy=True))
    em.result({
        "exact": exact if isinstance(exact, FieldScalar) else {"mid": exact.mid, "radius": exact.radius},
        "sweep": [v.to_json() for v in values],
        "centers": cfg.centers,
        "level": cfg.level,
    })
    return OK


def cmd_smooth(cfg: RunConfig, em: Emitter) -> int:
    rule = load_rule(cfg.rule)
    c = read_cochain(cfg.cochain)
    T = generate_window(rule, cfg.seed_word or _first(rule), cfg.level)
    try:
        chosen, tried = smoothing_sweep(c, T, cfg.radii, cfg.eps)
    except SmoothingRefused as exc:
        em.result({"refused": str(exc), "certificate": exc.certificate.to_json() if exc.certificate else None})
        return COMPUTE_ERROR
    rows = ["r,epsilon,slope_min,slope_max,monotone,discrepancy_max,discrepancy_bound"]
    for sm in tried:
        rows.append(f"{sm.r},{sm.epsilon!r},{sm.slope_min!r},{sm.slope_max!r},{sm.monotone},"
                    f"{sm.discrepancy.max_abs_integral!r},{sm.discrepancy_bound!r}")
    em.file("smooth.csv", "\n".join(rows) + "\n")
    em.file("smooth.svg", series_svg({"epsilon_r": [(float(sm.r), sm.epsilon) for sm in tried]},
                                     "relative slope spread against r", logx=True))
    em.result({
        "eps_target": cfg.eps,
        "chosen": chosen.summary() if chosen else None,
        "tried": [sm.summary() for sm in tried],
    })
    return OK if chosen else INCONCLUSIVE


def cmd_weakdemo(cfg: RunConfig, em: Emitter) -> int:
    rule = load_rule(cfg.rule)
    x = Fraction(cfg.x)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        c = geometric_series_cochain(x, cfg.truncation, "a", rule)
    lo, hi = cfg.levels
    fit = unboundedness_growth(c, rule, range(lo, hi + 1))
    verdict = is_coboundary(c, rule)
    defect = strongly_pe_defect(c, cfg.defect_max, rule, range(lo, hi + 1))
    predicted = math.log(float(x) * float(rule.eigen.perron_value))
    rows = ["n,discrepancy,allowance"] + [f"{n},{float(d)!r},{float(a)!r}" for n, d, a in fit.table]
    em.file("weakdemo.csv", "\n".join(rows) + "\n")
    em.file("weakdemo.svg", series_svg({"|discrepancy| + allowance": [(n, abs(float(d)) + float(a)) for n, d, a in fit.table]},
                                       f"sibling discrepancy against level, x = {x}", logy=True))
    em.result({
        "x": str(x),
        "truncation": cfg.truncation,
        "tail_bound": c.tail.sup_bound(),
        "fitted_exponent": fit.exponent,
        "predicted_exponent": predicted,
        "relative_error": abs(fit.exponent - predicted) / abs(predicted) if predicted else None,
        "growth": fit.to_json(),
        "is_coboundary": verdict.to_json(),
        "strongly_pe_defect": defect.to_json(),
        "warnings": [str(w.message) for w in caught],
    })
    return OK


def cmd_delone_check(cfg: RunConfig, em: Emitter) -> int:
    S = read_points(cfg.points)
    em.result(check_delone(S, Fraction(cfg.r), Fraction(cfg.R)).to_json())
    return OK


def cmd_delone_dist(cfg: RunConfig, em: Emitter) -> int:
    s1, s2 = read_points(cfg.points), read_points(cfg.other)
    need = 1 / min(cfg.eps_grid)
    for name, s in ((cfg.points, s1), (cfg.other, s2)):
        w = s.window
        if min(-w.xmin, -w.ymin, w.xmax, w.ymax) < need:
            raise InputError(f"{name}: window does not contain B(0, {need})")
    res = delone_distance(s1, s2, cfg.eps_grid)
    em.result(res.to_json())
    if res.distance is not None:
        return OK
    return INCONCLUSIVE if any(r.status == "inconclusive" for r in res.rows) else COMPUTE_ERROR


def cmd_voronoi(cfg: RunConfig, em: Emitter) -> int:
    S = read_points(cfg.points)
    cells = voronoi(S, Fraction(cfg.r), Fraction(cfg.R))
    em.result({"cells": [
        {"point": i, "vertices": [[str(x), str(y)] for x, y in c.vertices], "area": str(c.area)}
        for i, c in sorted(cells.items())]})
    em.file("voronoi.svg", voronoi_svg([p for p, _ in S.points], cells))
    return OK


COMMANDS = {
    "supertile": cmd_supertile,
    "window": cmd_window,
    "class": cmd_class,
    "conjugacy": cmd_conjugacy,
    "rs": cmd_rs,
    "smooth": cmd_smooth,
    "weakdemo": cmd_weakdemo,
    "delone-check": cmd_delone_check,
    "delone-dist": cmd_delone_dist,
    "voronoi": cmd_voronoi,
}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tilecohom", description="Cohomology of 1D substitution tiling deformations.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, rule=True):
        if rule:
            sp.add_argument("--rule", default="fibonacci", help="rule file or bundled name")
        sp.add_argument("--out", help="directory for JSON/CSV/SVG outputs")

    sp = sub.add_parser("supertile", help="print sigma^n(type)")
    common(sp)
    sp.add_argument("--type", required=True)
    sp.add_argument("--n", type=_positive_int, required=True)

    sp = sub.add_parser("window", help="list a seed-expansion window")
    common(sp)
    sp.add_argument("--seed", dest="seed_word", required=True, help="two-letter seed such as 'a|a'")
    sp.add_argument("--n", type=_positive_int, required=True)

    for name in ("class", "conjugacy"):
        sp = sub.add_parser(name, help=f"{name} verdict for a deformation file")
        common(sp, rule=False)
        sp.add_argument("--deformation", required=True)
        if name == "conjugacy":
            sp.add_argument("--samples", type=_positive_int, default=2000)
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("rs", help="exact and empirical averages")
    common(sp)
    sp.add_argument("--cochain")
    sp.add_argument("--rsweep", default="10:160")
    sp.add_argument("--centers", type=_positive_int, default=32)
    sp.add_argument("--level", type=_positive_int, default=22)
    sp.add_argument("--window-seed", dest="seed_word")

    sp = sub.add_parser("smooth", help="plateau-kernel smoothing sweep")
    common(sp)
    sp.add_argument("--cochain", required=True)
    sp.add_argument("--eps", type=float, default=0.2)
    sp.add_argument("--radii", default="4:64")
    sp.add_argument("--level", type=_positive_int, default=22)
    sp.add_argument("--window-seed", dest="seed_word")

    sp = sub.add_parser("weakdemo", help="geometric-series cochain divergence demo")
    common(sp)
    sp.add_argument("--x", required=True)
    sp.add_argument("--levels", default="5:25")
    sp.add_argument("--truncation", type=_positive_int, default=8)
    sp.add_argument("--defect-max", type=_positive_int, default=10)

    sp = sub.add_parser("delone-check", help="uniform discreteness and relative density")
    common(sp, rule=False)
    sp.add_argument("--points", required=True)
    sp.add_argument("--r", required=True, type=_fraction)
    sp.add_argument("--R", required=True, type=_fraction)

    sp = sub.add_parser("delone-dist", help="distance between two labelled point sets")
    common(sp, rule=False)
    sp.add_argument("--points", required=True)
    sp.add_argument("--other", required=True)
    sp.add_argument("--eps-grid", required=True, help="lo:hi:step or comma list")

    sp = sub.add_parser("voronoi", help="Voronoi cells of interior points")
    common(sp, rule=False)
    sp.add_argument("--points", required=True)
    sp.add_argument("--r", required=True, type=_fraction)
    sp.add_argument("--R", required=True, type=_fraction)
    return p


def make_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    for key, value in vars(ns).items():
        if key in ("rsweep", "radii", "levels", "eps_grid", "r", "R") or value is None:
            continue
        if hasattr(cfg, key):
            setattr(cfg, key, value)
    if ns.command == "rs":
        cfg.radii = parse_doubling(ns.rsweep)
    if ns.command == "smooth":
        cfg.radii = parse_doubling(ns.radii)
        if not 0 < cfg.eps < 1:
            raise InputError("--eps must lie in (0, 1)")
    if ns.command == "weakdemo":
        cfg.levels = parse_range(ns.levels)
        try:
            x = Fraction(ns.x)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"bad --x {ns.x!r}") from None
        if not 0 < x < 1:
            raise InputError("--x must lie in (0, 1)")
        cfg.x = str(x)
        if cfg.levels[1] > BoundednessConfig().horizon:
            raise InputError(f"levels exceed the horizon {BoundednessConfig().horizon}")
    if ns.command == "delone-dist":
        cfg.eps_grid = parse_grid(ns.eps_grid)
    if ns.command in ("delone-check", "voronoi"):
        if ns.r <= 0 or ns.R <= 0:
            raise InputError("--r and --R must be positive")
        cfg.r, cfg.R = str(ns.r), str(ns.R)
    if ns.command == "window" and cfg.n < 1:
        raise InputError("--n must be >= 1")
    if ns.command in ("rs", "smooth") and cfg.level < 1:
        raise InputError("--level must be >= 1")
    return cfg


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    try:
        cfg = make_config(ns)
        # validate the rule up front so bad rule files fail as input errors
        if ns.command in ("supertile", "window", "rs", "smooth", "weakdemo"):
            validate_rule(load_rule(cfg.rule))
        em = Emitter(cfg, stdout)
        code = COMMANDS[cfg.command](cfg, em)
        if cfg.out:
            write_atomic(Path(cfg.out) / "run_config.json", _dumps(asdict(cfg)))
        return code
    except (InputError, RuleError, NonPrimitiveError, DeformationError, KeyError) as exc:
        stderr.write(f"input error: {exc}\n")
        return INPUT_ERROR
    except (ValueError, ArithmeticError) as exc:
        stderr.write(f"computation error: {exc}\n")
        return COMPUTE_ERROR


if __name__ == "__main__":
    sys.exit(main())
