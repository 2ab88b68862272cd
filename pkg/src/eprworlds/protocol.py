"""Line-oriented experiment language (``.epr`` files).

Grammar (EBNF; one directive per line, ``#`` starts a comment, tokens are
separated by whitespace)::

    program   = { line } ;
    line      = [ directive ] [ "#" { any } ] newline ;
    directive = prep | measure | compare | analysis ;
    prep      = "singlet" "axis" deg deg ;
    measure   = "measure" device ( "axis" deg deg | "random" "seed" int ) ;
    compare   = "compare" ;
    analysis  = "analyze" ( "worlds" "maxden" int
                          | "correlation"
                          | "bell" deg deg deg deg deg deg
                          | "lhv" name "samples" int "seed" int
                          | "thetascan" deg deg int ) ;
    device    = "1" | "2" ;
    deg       = real ;            (* polar then azimuth, in degrees *)

Ordering rules: ``singlet`` comes first and once; each device is measured
at most once; ``compare`` follows both measurements; analyses follow all
steps.  ``analyze worlds`` needs ``compare``; ``correlation`` and ``lhv``
need both measurements along fixed axes.  A ``random`` measurement is only
allowed when the analyses are ``thetascan`` (at least one) or ``bell``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

from .errors import ProtocolSemanticError, ProtocolSyntaxError
from .lhv import STRATEGIES
from .spin import Direction

_REAL = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?\Z")
_INT = re.compile(r"[+-]?\d+\Z")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*\Z")
_TOKEN = re.compile(r"\S+")
_SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class Angles:
    polar: float
    azimuth: float

    @property
    def direction(self) -> Direction:
        return Direction.from_degrees(self.polar, self.azimuth)

    def text(self) -> str:
        return f"{_num(self.polar)} {_num(self.azimuth)}"


@dataclass(frozen=True)
class Fixed:
    angles: Angles


@dataclass(frozen=True)
class RandomPerRun:
    seed: int


AxisSpec = Union[Fixed, RandomPerRun]


@dataclass(frozen=True)
class Singlet:
    axis: Angles
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Measure:
    device: int
    axis: AxisSpec
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Compare:
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Worlds:
    max_denominator: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Correlation:
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Bell:
    n1: Angles
    n2: Angles
    n3: Angles
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LhvBaseline:
    strategy: str
    samples: int
    seed: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ThetaScan:
    start: float
    stop: float
    points: int
    line: int = field(default=0, compare=False)


Step = Union[Measure, Compare]
Analysis = Union[Worlds, Correlation, Bell, LhvBaseline, ThetaScan]


@dataclass(frozen=True)
class ExperimentPlan:
    prep: Singlet
    steps: tuple[Step, ...]
    analyses: tuple[Analysis, ...]

    @property
    def measures(self) -> tuple[Measure, ...]:
        return tuple(s for s in self.steps if isinstance(s, Measure))

    @property
    def has_compare(self) -> bool:
        return any(isinstance(s, Compare) for s in self.steps)


def _num(x: float) -> str:
    # repr is the shortest string that reads back to the same double
    return repr(float(x))


class _Line:
    def __init__(self, lineno: int, text: str):
        self.lineno = lineno
        code = text.split("#", 1)[0]
        self.tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(code)]
        self.end_col = len(code.rstrip()) + 1
        self.pos = 0

    def _fail(self, message, col=None):
        raise ProtocolSyntaxError(message, self.lineno, col or self.end_col)

    def next(self, what: str) -> tuple[str, int]:
        if self.pos >= len(self.tokens):
            self._fail(f"expected {what}, found end of line")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def keyword(self, *words: str) -> str:
        tok, col = self.next(" or ".join(repr(w) for w in words))
        if tok not in words:
            self._fail(f"expected {' or '.join(repr(w) for w in words)}, found {tok!r}", col)
        return tok

    def real(self, what: str) -> float:
        tok, col = self.next(what)
        if not _REAL.match(tok):
            self._fail(f"expected {what} (a number), found {tok!r}", col)
        value = float(tok)
        if not math.isfinite(value):
            self._fail(f"{what} {tok!r} is not finite", col)
        return value

    def integer(self, what: str, minimum: int, maximum: int | None = None) -> int:
        tok, col = self.next(what)
        if not _INT.match(tok):
            self._fail(f"expected {what} (an integer), found {tok!r}", col)
        value = int(tok)
        if value < minimum or (maximum is not None and value >= maximum):
            bound = f">= {minimum}" if maximum is None else f"in [{minimum}, {maximum})"
            raise ProtocolSemanticError(f"{what} must be {bound}, got {value}", self.lineno, col)
        return value

    def name(self, what: str) -> tuple[str, int]:
        tok, col = self.next(what)
        if not _NAME.match(tok):
            self._fail(f"expected {what}, found {tok!r}", col)
        return tok, col

    def angles(self, what: str) -> Angles:
        col = self.tokens[self.pos][1] if self.pos < len(self.tokens) else self.end_col
        polar = self.real(f"{what} polar angle")
        azimuth = self.real(f"{what} azimuth")
        if not 0.0 <= polar <= 180.0:
            raise ProtocolSemanticError(f"{what} polar angle {polar!r} outside [0, 180]", self.lineno, col)
        return Angles(polar, azimuth)

    def done(self):
        if self.pos < len(self.tokens):
            tok, col = self.tokens[self.pos]
            self._fail(f"unexpected token {tok!r}", col)


def _parse_directive(ln: _Line):
    head, col = ln.next("a directive")
    n = ln.lineno
    if head == "singlet":
        ln.keyword("axis")
        node = Singlet(ln.angles("singlet axis"), n)
    elif head == "measure":
        dev_tok, dev_col = ln.next("device number")
        if dev_tok not in ("1", "2"):
            ln._fail(f"device must be 1 or 2, found {dev_tok!r}", dev_col)
        mode = ln.keyword("axis", "random")
        if mode == "axis":
            spec = Fixed(ln.angles("measurement axis"))
        else:
            ln.keyword("seed")
            spec = RandomPerRun(ln.integer("seed", 0, _SEED_LIMIT))
        node = Measure(int(dev_tok), spec, n)
    elif head == "compare":
        node = Compare(n)
    elif head == "analyze":
        kind = ln.keyword("worlds", "correlation", "bell", "lhv", "thetascan")
        if kind == "worlds":
            ln.keyword("maxden")
            node = Worlds(ln.integer("maxden", 1), n)
        elif kind == "correlation":
            node = Correlation(n)
        elif kind == "bell":
            node = Bell(ln.angles("n1"), ln.angles("n2"), ln.angles("n3"), n)
        elif kind == "lhv":
            name, name_col = ln.name("strategy name")
            if name not in STRATEGIES:
                raise ProtocolSemanticError(
                    f"unknown LHV strategy {name!r} (known: {', '.join(sorted(STRATEGIES))})", n, name_col
                )
            ln.keyword("samples")
            samples = ln.integer("samples", 1)
            ln.keyword("seed")
            node = LhvBaseline(name, samples, ln.integer("seed", 0, _SEED_LIMIT), n)
        else:
            scol = ln.tokens[ln.pos][1] if ln.pos < len(ln.tokens) else ln.end_col
            start = ln.real("scan start")
            stop = ln.real("scan stop")
            points = ln.integer("scan points", 2)
            for v in (start, stop):
                if not 0.0 <= v <= 180.0:
                    raise ProtocolSemanticError(f"scan angle {v!r} outside [0, 180]", n, scol)
            node = ThetaScan(start, stop, points, n)
    else:
        ln._fail(f"unknown directive {head!r}", col)
    ln.done()
    return node


def parse(text: str) -> ExperimentPlan:
    """Parse and validate an experiment; raises a :class:`ProtocolError` subclass on bad input."""
    prep = None
    steps: list[Step] = []
    analyses: list[Analysis] = []
    measured: dict[int, Measure] = {}

    def semantic(message, line):
        raise ProtocolSemanticError(message, line)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        ln = _Line(lineno, raw)
        if not ln.tokens:
            continue
        node = _parse_directive(ln)
        if isinstance(node, Singlet):
            if prep is not None:
                semantic(f"second preparation (first on line {prep.line})", lineno)
            prep = node
            continue
        if prep is None:
            semantic("no preparation: 'singlet' must come before any other directive", lineno)
        if isinstance(node, (Measure, Compare)) and analyses:
            semantic("measurement steps must come before analyses", lineno)
        if isinstance(node, Measure):
            if node.device in measured:
                semantic(
                    f"device {node.device} measured twice (first on line {measured[node.device].line}); "
                    "devices are single-shot",
                    lineno,
                )
            if any(isinstance(s, Compare) for s in steps):
                semantic("measurement after compare", lineno)
            measured[node.device] = node
            steps.append(node)
        elif isinstance(node, Compare):
            if any(isinstance(s, Compare) for s in steps):
                semantic("compare appears twice", lineno)
            if len(measured) < 2:
                semantic("compare before both devices have measured", lineno)
            steps.append(node)
        else:
            if isinstance(node, Worlds) and not any(isinstance(s, Compare) for s in steps):
                semantic("'analyze worlds' requires a preceding compare", lineno)
            if isinstance(node, (Correlation, LhvBaseline, Worlds)) and len(measured) < 2:
                semantic(f"'analyze {_KIND[type(node)]}' requires both devices to be measured", lineno)
            analyses.append(node)

    if prep is None:
        semantic("no preparation: program has no 'singlet' directive", 1)
    randoms = [m for m in measured.values() if isinstance(m.axis, RandomPerRun)]
    if randoms:
        line = min(m.line for m in randoms)
        bad = [a for a in analyses if not isinstance(a, (ThetaScan, Bell))]
        if bad:
            semantic(
                f"random measurement axis (line {line}) is only allowed with binned analyses; "
                f"'analyze {_KIND[type(bad[0])]}' on line {bad[0].line} needs fixed axes",
                bad[0].line,
            )
        if not any(isinstance(a, ThetaScan) for a in analyses):
            semantic("random measurement axis requires an 'analyze thetascan' analysis", line)
    return ExperimentPlan(prep, tuple(steps), tuple(analyses))


_KIND = {Worlds: "worlds", Correlation: "correlation", Bell: "bell", LhvBaseline: "lhv", ThetaScan: "thetascan"}


def format_plan(plan: ExperimentPlan) -> str:
    """Canonical source text; ``parse(format_plan(p)) == p``."""
    lines = [f"singlet axis {plan.prep.axis.text()}"]
    for step in plan.steps:
        if isinstance(step, Compare):
            lines.append("compare")
        elif isinstance(step.axis, Fixed):
            lines.append(f"measure {step.device} axis {step.axis.angles.text()}")
        else:
            lines.append(f"measure {step.device} random seed {step.axis.seed}")
    for a in plan.analyses:
        if isinstance(a, Worlds):
            lines.append(f"analyze worlds maxden {a.max_denominator}")
        elif isinstance(a, Correlation):
            lines.append("analyze correlation")
        elif isinstance(a, Bell):
            lines.append(f"analyze bell {a.n1.text()} {a.n2.text()} {a.n3.text()}")
        elif isinstance(a, LhvBaseline):
            lines.append(f"analyze lhv {a.strategy} samples {a.samples} seed {a.seed}")
        else:
            lines.append(f"analyze thetascan {_num(a.start)} {_num(a.stop)} {a.points}")
    return "\n".join(lines) + "\n"
