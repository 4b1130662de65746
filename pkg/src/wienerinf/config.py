"""Job files: a flat ``key = value`` format with sections for set trees.

Example::

    # irregularity at infinity for a sparse ball sequence
    command = classify
    n = 2
    p = 2
    variant = thm13ii

    [domain]
    kind = complement

    [domain.child]
    kind = sequence_union
    closed = true
    center = 0.75*pow2(4^j), 0
    radius = pow2(-(8^j))
    start = 1

Top-level keys set job parameters.  A set tree hangs under ``[domain]``,
``[K]`` or ``[G]``; a node's single child lives in ``[<path>.child]`` and the
members of a union or intersection in ``[<path>.children.0]``,
``[<path>.children.1]``, ...  ``[family]`` names a registered domain family
instead of a tree, and ``[data]`` describes Dirichlet data for ``solve``.
Expressions follow the grammar of :mod:`.expr`; lists are comma separated.
:func:`print_config` writes a file that parses back to an equal config.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from .expr import ExpressionParseError, parse_expr, to_text
from .geometry import (Annulus, Ball, BallSequence, ClosedBall, Complement, EmptySet, Exponents,
                       HalfSpace, Intersection, Inverted, Origin, Scaled, SequenceUnion,
                       SetDescriptor, Union, ValidationError, Weight, WholeSpace)
from .variants import CLI_VARIANTS, CriterionVariant, VariantKind

__all__ = [
    "ParseError", "JobConfig", "FamilySpec", "DataSpec", "parse_config", "print_config",
    "validate", "COMMANDS", "FAMILIES", "resolve_domain", "resolve_family", "job_variant",
    "job_weight", "set_to_sections",
]

COMMANDS = ("capacity", "wiener", "classify", "invert", "solve", "examples", "poincare")
WEIGHTS = ("constant", "power", "inversion")
WHICH = ("7.1", "7.2")
FAMILIES = {
    "example71": (),
    "example72": (),
    "example72f": (),
    "excluded_ball": ("center", "radius"),
    "half_space": ("normal", "offset"),
    "ball_chain": ("c", "lam", "rho"),
}
DATA_KINDS = {
    "indicator": ("center", "radius", "inside", "outside"),
    "coordinate": ("axis",),
    "constant": ("value",),
}
_VECTOR_PARAMS = {"center", "normal"}
_INT_PARAMS = {"axis"}
TREE_ROOTS = ("domain", "K", "G")

_SECTION = re.compile(r"\[\s*([A-Za-z_]\w*(?:\.\w+)*)\s*\]\s*$")
_KEY = re.compile(r"([A-Za-z_]\w*)\s*=")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, expected: tuple = ()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"line {line}, column {col}: {message}{detail}")


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: tuple = ()  # sorted (key, value) pairs

    def get(self, key, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class DataSpec:
    kind: str = "indicator"
    params: tuple = ()

    def get(self, key, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class JobConfig:
    n: int = 2
    p: float = 2.0
    command: Optional[str] = None
    weight: str = "constant"
    delta: Optional[float] = None
    variant: str = "thm13ii"
    point: Optional[tuple] = None
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    samples_per_decade: int = 16
    grid_h: float = 1 / 64
    tol: float = 1e-10
    max_iter: int = 100
    seed: int = 0
    which: Optional[str] = None
    radii: Optional[tuple] = None
    family: Optional[FamilySpec] = None
    domain: Optional[SetDescriptor] = None
    K: Optional[SetDescriptor] = None
    G: Optional[SetDescriptor] = None
    data: Optional[DataSpec] = None

    @property
    def exponents(self) -> Exponents:
        return Exponents(self.n, self.p)


_SCALARS = {
    "n": int, "p": float, "command": str, "weight": str, "delta": float, "variant": str,
    "point": "vector", "r_min": float, "r_max": float, "samples_per_decade": int,
    "grid_h": float, "tol": float, "max_iter": int, "seed": int, "which": str, "radii": "vector",
}


# ------------------------------------------------------------ lexing

@dataclass
class _Entry:
    key: str
    value: str
    line: int
    col: int      # column of the key
    vcol: int     # column of the value


@dataclass
class _Section:
    name: str
    line: int
    entries: dict = field(default_factory=dict)


def _lex(text: str) -> dict:
    sections = {"": _Section("", 0)}
    cur = sections[""]
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        col = len(line) - len(stripped) + 1
        if stripped.startswith("["):
            m = _SECTION.match(stripped)
            if not m:
                raise ParseError("malformed section header", ln, col, ("[name]", "[name.child]"))
            name = m.group(1)
            if name in sections:
                raise ParseError(f"duplicate section [{name}]", ln, col)
            cur = sections[name] = _Section(name, ln)
            continue
        m = _KEY.match(stripped)
        if not m:
            raise ParseError("expected 'key = value'", ln, col, ("key", "[section]"))
        key = m.group(1)
        rest = stripped[m.end():]
        value = rest.strip()
        vcol = col + m.end() + (len(rest) - len(rest.lstrip()))
        if not value:
            raise ParseError(f"missing value for {key!r}", ln, vcol, ("value",))
        if key in cur.entries:
            raise ParseError(f"duplicate key {key!r}", ln, col)
        cur.entries[key] = _Entry(key, value, ln, col, vcol)
    return sections


# ------------------------------------------------------------ values

def _float(e: _Entry) -> float:
    try:
        return float(e.value)
    except ValueError:
        raise ParseError(f"{e.key}: not a number: {e.value!r}", e.line, e.vcol, ("number",)) from None


def _int(e: _Entry) -> int:
    try:
        return int(e.value)
    except ValueError:
        raise ParseError(f"{e.key}: not an integer: {e.value!r}", e.line, e.vcol, ("integer",)) from None


def _bool(e: _Entry) -> bool:
    v = e.value.lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise ParseError(f"{e.key}: not a boolean: {e.value!r}", e.line, e.vcol, ("true", "false"))


def _parts(e: _Entry) -> list[tuple[str, int]]:
    out, start = [], 0
    for piece in e.value.split(","):
        lead = len(piece) - len(piece.lstrip())
        out.append((piece.strip(), e.vcol + start + lead))
        start += len(piece) + 1
    return out


def _vector(e: _Entry) -> tuple:
    vals = []
    for text, col in _parts(e):
        try:
            vals.append(float(text))
        except ValueError:
            raise ParseError(f"{e.key}: not a number: {text!r}", e.line, col, ("number",)) from None
    return tuple(vals)


def _expr(e: _Entry, text: Optional[str] = None, col: Optional[int] = None):
    text = e.value if text is None else text
    col = e.vcol if col is None else col
    try:
        return parse_expr(text)
    except ExpressionParseError as exc:
        msg = str(exc).split(" at offset")[0]
        raise ParseError(f"{e.key}: {msg}", e.line, col + exc.pos, exc.expected) from None


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(float(x)) for x in v)
    return str(v)


# ------------------------------------------------------------ set trees

_NODE_KEYS = {
    "ball": ("center", "radius"),
    "closed_ball": ("center", "radius"),
    "annulus": ("inner", "outer", "closed"),
    "half_space": ("normal", "offset"),
    "complement": (),
    "inverted": (),
    "union": (),
    "intersection": (),
    "sequence_union": ("center", "radius", "start", "closed"),
    "scaled": ("factor",),
    "whole_space": (),
    "origin": (),
    "empty": (),
}
_WITH_CHILD = ("complement", "inverted", "scaled")
_WITH_CHILDREN = ("union", "intersection")


def _need(sec: _Section, key: str) -> _Entry:
    if key not in sec.entries:
        raise ParseError(f"[{sec.name}] is missing {key!r}", sec.line, 1, (key,))
    return sec.entries[key]


def _tree(sections: dict, path: str, used: set) -> SetDescriptor:
    if path not in sections:
        parent = sections.get(path.rsplit(".", 1)[0]) if "." in path else None
        line = parent.line if parent else 0
        raise ParseError(f"missing section [{path}]", line, 1, (f"[{path}]",))
    sec = sections[path]
    used.add(path)
    kind_e = _need(sec, "kind")
    kind = kind_e.value
    if kind not in _NODE_KEYS:
        raise ParseError(f"unknown set kind {kind!r}", kind_e.line, kind_e.vcol, tuple(_NODE_KEYS))
    allowed = set(_NODE_KEYS[kind]) | {"kind"}
    for k, e in sec.entries.items():
        if k not in allowed:
            raise ParseError(f"key {k!r} does not apply to {kind}", e.line, e.col,
                             tuple(sorted(allowed)))
    E = sec.entries
    try:
        if kind in ("ball", "closed_ball"):
            cls = Ball if kind == "ball" else ClosedBall
            return cls(_vector(_need(sec, "center")), _float(_need(sec, "radius")))
        if kind == "annulus":
            closed = _bool(E["closed"]) if "closed" in E else False
            return Annulus(_float(_need(sec, "inner")), _float(_need(sec, "outer")), closed)
        if kind == "half_space":
            off = _float(E["offset"]) if "offset" in E else 0.0
            return HalfSpace(_vector(_need(sec, "normal")), off)
        if kind == "sequence_union":
            ce = _need(sec, "center")
            center = tuple(_expr(ce, t, c) for t, c in _parts(ce))
            radius = _expr(_need(sec, "radius"))
            start = _int(E["start"]) if "start" in E else 1
            closed = _bool(E["closed"]) if "closed" in E else True
            return SequenceUnion(BallSequence(center, radius, start), closed)
        if kind == "whole_space":
            return WholeSpace()
        if kind == "origin":
            return Origin()
        if kind == "empty":
            return EmptySet()
        if kind in _WITH_CHILD:
            child = _tree(sections, f"{path}.child", used)
            if kind == "complement":
                return Complement(child)
            if kind == "inverted":
                return Inverted(child)
            return Scaled(child, _float(_need(sec, "factor")))
        kids = []
        i = 0
        while f"{path}.children.{i}" in sections:
            kids.append(_tree(sections, f"{path}.children.{i}", used))
            i += 1
        if not kids:
            raise ParseError(f"[{path}] needs [{path}.children.0]", sec.line, 1,
                             (f"[{path}.children.0]",))
        return Union(tuple(kids)) if kind == "union" else Intersection(tuple(kids))
    except ValidationError as exc:
        raise ParseError(f"[{path}]: {exc}", sec.line, 1) from None


def set_to_sections(S: SetDescriptor, path: str) -> list[str]:
    """Section text for a set tree rooted at ``path``."""
    lines = [f"[{path}]"]
    kids: list[tuple[str, SetDescriptor]] = []
    if isinstance(S, (Ball, ClosedBall)):
        lines += ["kind = " + ("ball" if isinstance(S, Ball) else "closed_ball"),
                  f"center = {_fmt(S.center)}", f"radius = {_fmt(float(S.radius))}"]
    elif isinstance(S, Annulus):
        lines += ["kind = annulus", f"inner = {_fmt(float(S.inner))}",
                  f"outer = {_fmt(float(S.outer))}", f"closed = {_fmt(bool(S.closed))}"]
    elif isinstance(S, HalfSpace):
        lines += ["kind = half_space", f"normal = {_fmt(S.normal)}", f"offset = {_fmt(S.offset)}"]
    elif isinstance(S, SequenceUnion):
        seq = S.seq
        lines += ["kind = sequence_union", "center = " + ", ".join(to_text(c) for c in seq.center),
                  f"radius = {to_text(seq.radius)}", f"start = {int(seq.start)}",
                  f"closed = {_fmt(bool(S.closed))}"]
    elif isinstance(S, WholeSpace):
        lines.append("kind = whole_space")
    elif isinstance(S, Origin):
        lines.append("kind = origin")
    elif isinstance(S, EmptySet):
        lines.append("kind = empty")
    elif isinstance(S, Complement):
        lines.append("kind = complement")
        kids.append((f"{path}.child", S.child))
    elif isinstance(S, Inverted):
        lines.append("kind = inverted")
        kids.append((f"{path}.child", S.child))
    elif isinstance(S, Scaled):
        lines += ["kind = scaled", f"factor = {_fmt(float(S.factor))}"]
        kids.append((f"{path}.child", S.child))
    elif isinstance(S, (Union, Intersection)):
        lines.append("kind = " + ("union" if isinstance(S, Union) else "intersection"))
        kids += [(f"{path}.children.{i}", c) for i, c in enumerate(S.children)]
    else:
        raise ValidationError(f"cannot serialise {type(S).__name__}")
    out = lines + [""]
    for p, c in kids:
        out += set_to_sections(c, p)
    return out


# ------------------------------------------------------------ params

def _param_value(key: str, e: _Entry):
    if key in _VECTOR_PARAMS:
        return _vector(e)
    if key in _INT_PARAMS:
        return _int(e)
    return _float(e)


def _params(sec: _Section, allowed: tuple, label: str) -> tuple:
    out = []
    for k, e in sec.entries.items():
        if k in ("name", "kind"):
            continue
        if k not in allowed:
            raise ParseError(f"{label} takes no parameter {k!r}", e.line, e.col, allowed)
        out.append((k, _param_value(k, e)))
    return tuple(sorted(out))


# ------------------------------------------------------------ API

def parse_config(text: str, check: bool = True) -> JobConfig:
    """Parse a job file; with ``check`` the result is also validated."""
    sections = _lex(text)
    top = sections[""]
    kw = {}
    for k, e in top.entries.items():
        if k not in _SCALARS:
            raise ParseError(f"unknown key {k!r}", e.line, e.col, tuple(_SCALARS))
        kind = _SCALARS[k]
        if kind == "vector":
            kw[k] = _vector(e)
        elif kind is int:
            kw[k] = _int(e)
        elif kind is float:
            kw[k] = _float(e)
        else:
            kw[k] = e.value
    used = {""}
    for root in TREE_ROOTS:
        if root in sections:
            kw[root] = _tree(sections, root, used)
    if "family" in sections:
        sec = sections["family"]
        used.add("family")
        ne = _need(sec, "name")
        if ne.value not in FAMILIES:
            raise ParseError(f"unknown family {ne.value!r}", ne.line, ne.vcol, tuple(FAMILIES))
        kw["family"] = FamilySpec(ne.value, _params(sec, FAMILIES[ne.value], ne.value))
    if "data" in sections:
        sec = sections["data"]
        used.add("data")
        ke = _need(sec, "kind")
        if ke.value not in DATA_KINDS:
            raise ParseError(f"unknown data kind {ke.value!r}", ke.line, ke.vcol, tuple(DATA_KINDS))
        kw["data"] = DataSpec(ke.value, _params(sec, DATA_KINDS[ke.value], ke.value))
    for name, sec in sections.items():
        if name not in used:
            raise ParseError(f"section [{name}] is not attached to any tree", sec.line, 1,
                             ("[domain]", "[K]", "[G]", "[family]", "[data]"))
    cfg = JobConfig(**kw)
    if check:
        validate(cfg)
    return cfg


def print_config(cfg: JobConfig) -> str:
    lines = []
    for f in fields(JobConfig):
        if f.name in TREE_ROOTS + ("family", "data"):
            continue
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if f.name in ("p", "delta", "r_min", "r_max", "grid_h", "tol"):
            v = float(v)
        lines.append(f"{f.name} = {_fmt(v)}")
    lines.append("")
    for root in TREE_ROOTS:
        S = getattr(cfg, root)
        if S is not None:
            lines += set_to_sections(S, root)
    for label, spec, key in (("family", cfg.family, "name"), ("data", cfg.data, "kind")):
        if spec is None:
            continue
        lines.append(f"[{label}]")
        lines.append(f"{key} = {spec.name if label == 'family' else spec.kind}")
        lines += [f"{k} = {_fmt(v)}" for k, v in spec.params]
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def job_variant(cfg: JobConfig) -> CriterionVariant:
    name = cfg.variant
    if name in CLI_VARIANTS:
        kind = CLI_VARIANTS[name]
    else:
        try:
            kind = VariantKind(name)
        except ValueError:
            raise ValidationError(f"unknown variant {name!r}; choose from "
                                  f"{', '.join(list(CLI_VARIANTS) + [k.value for k in VariantKind])}") from None
    if kind is VariantKind.CLASSIC_AT_POINT:
        point = cfg.point if cfg.point is not None else (0.0,) * cfg.n
        return CriterionVariant(kind, point=tuple(point))
    return CriterionVariant(kind)


def job_weight(cfg: JobConfig) -> Weight:
    if cfg.weight == "constant":
        return Weight.constant()
    if cfg.weight == "inversion":
        return Weight.for_exponents(cfg.exponents)
    return Weight.power(cfg.delta if cfg.delta is not None else 0.0)


def resolve_family(cfg: JobConfig):
    from . import families as fam
    spec = cfg.family
    if spec is None:
        return None
    n = cfg.n
    name = spec.name
    if name == "example71":
        return fam.Example71(n)
    if name == "example72":
        return fam.Example72(n)
    if name == "example72f":
        return fam.Example72F(n)
    if name == "excluded_ball":
        return fam.ExcludedBall(tuple(spec.get("center", (0.0,) * n)), spec.get("radius", 1.0))
    if name == "half_space":
        normal = spec.get("normal", (1.0,) + (0.0,) * (n - 1))
        return fam.HalfSpace(tuple(normal), spec.get("offset", 0.0))
    return fam.BallChain(spec.get("c", 4.0), spec.get("lam", 2.0), spec.get("rho", 1.0), n)


def resolve_domain(cfg: JobConfig) -> Optional[SetDescriptor]:
    if cfg.domain is not None:
        return cfg.domain
    f = resolve_family(cfg)
    return None if f is None else f.descriptor()


def _dims(S: SetDescriptor, n: int) -> None:
    if isinstance(S, (Ball, ClosedBall)) and len(S.center) != n:
        raise ValidationError(f"ball centre {S.center} is not in R^{n}")
    if isinstance(S, HalfSpace) and len(S.normal) != n:
        raise ValidationError(f"half-space normal {S.normal} is not in R^{n}")
    if isinstance(S, SequenceUnion) and S.seq.dim != n:
        raise ValidationError(f"sequence centres have {S.seq.dim} coordinates, expected {n}")
    for attr in ("child",):
        if hasattr(S, attr):
            _dims(getattr(S, attr), n)
    if isinstance(S, (Union, Intersection)):
        for c in S.children:
            _dims(c, n)


def validate(cfg: JobConfig) -> JobConfig:
    """Raise :class:`ValidationError` on an inconsistent job."""
    exp = cfg.exponents
    if cfg.command is not None and cfg.command not in COMMANDS:
        raise ValidationError(f"unknown command {cfg.command!r}; choose from {', '.join(COMMANDS)}")
    if cfg.weight not in WEIGHTS:
        raise ValidationError(f"unknown weight {cfg.weight!r}; choose from {', '.join(WEIGHTS)}")
    if cfg.weight == "power" and cfg.delta is None:
        raise ValidationError("power weight needs delta")
    if cfg.weight != "power" and cfg.delta is not None:
        raise ValidationError("delta applies to the power weight only")
    job_variant(cfg)
    if cfg.which is not None and cfg.which not in WHICH:
        raise ValidationError(f"which must be one of {', '.join(WHICH)}")
    if not (cfg.grid_h > 0 and math.isfinite(cfg.grid_h)):
        raise ValidationError("grid_h must be positive")
    if not cfg.tol > 0:
        raise ValidationError("tol must be positive")
    if cfg.max_iter < 1:
        raise ValidationError("max_iter must be at least 1")
    if cfg.samples_per_decade < 4:
        raise ValidationError("samples_per_decade must be at least 4")
    if cfg.r_min is not None and cfg.r_max is not None and not 0 < cfg.r_min < cfg.r_max:
        raise ValidationError("need 0 < r_min < r_max")
    if cfg.point is not None and len(cfg.point) != cfg.n:
        raise ValidationError(f"point must have {cfg.n} coordinates")
    if cfg.radii is not None:
        r = cfg.radii
        if not r or any(v <= 0 for v in r) or any(b >= a for a, b in zip(r, r[1:])):
            raise ValidationError("radii must be positive and strictly decreasing")
    if cfg.family is not None and cfg.domain is not None:
        raise ValidationError("give either a family or a domain tree, not both")
    for S in (cfg.domain, cfg.K, cfg.G):
        if S is not None:
            _dims(S, cfg.n)
    if cfg.family is not None:
        resolve_family(cfg)
    if cfg.data is not None:
        for k, v in cfg.data.params:
            if k == "center" and len(v) != cfg.n:
                raise ValidationError(f"data centre must have {cfg.n} coordinates")
            if k == "axis" and not 0 <= v < cfg.n:
                raise ValidationError(f"data axis must lie in 0..{cfg.n - 1}")
    cmd = cfg.command
    dom = resolve_domain(cfg)
    if cmd in ("classify", "wiener", "invert", "solve") and dom is None:
        raise ValidationError(f"{cmd} needs a domain tree or a family")
    if cmd == "classify" or (cmd == "wiener" and job_variant(cfg).about_infinity):
        exp.require_p_ge_n()
    if cmd == "classify" and isinstance(dom, WholeSpace):
        raise ValidationError("the whole space has no boundary; classification refused")
    if cmd == "capacity" and (cfg.K is None or cfg.G is None):
        raise ValidationError("capacity needs [K] and [G] sections")
    if cmd == "solve" and cfg.n != 2:
        raise ValidationError("solve runs on planar grids only (n = 2)")
    return cfg


def with_overrides(cfg: JobConfig, **kw) -> JobConfig:
    """Copy with the given non-None fields replaced."""
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})


__all__ += ["with_overrides"]
