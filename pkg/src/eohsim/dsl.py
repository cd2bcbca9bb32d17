"""Line-oriented experiment description (``.eoh`` files).

One statement per line, ``#`` starts a comment, ``key=value`` parameters
may come in any order.  Units are fixed per keyword::

    material he3|he4
    temperature <K>
    pitch <nm>
    film <nm>
    mode rwa|full
    t2 <ms>
    qubit <id> bias=<V/cm>
    pulse <id> erf=<V/cm> duration=<ps> detuning=<GHz>
    stark <id> field=<V/cm> duration=<ps>
    swap <id> <id> duration=<ps>|auto
    sweep <id> <id> rate=<GHz/ns> span=<GHz>
    wait <ps>
    readout fpeak=<V/cm>|auto duration=<ns> seed=<int> shots=<int>

:func:`parse` collects every problem in the file before raising
:class:`DSLError`, and :func:`render` writes the canonical form that parses
back to an equal :class:`Schedule`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields
from typing import Optional, Union

MATERIAL_NAMES = ("he3", "he4")
MODES = ("rwa", "full")
_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    message: str
    token: str = ""

    def __str__(self):
        where = f"line {self.line}, column {self.column}"
        return f"{where}: {self.message}" + (f" (at {self.token!r})" if self.token else "")


class DSLError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


@dataclass(frozen=True)
class Header:
    material: Optional[str] = None
    temperature: float = 0.01  # K
    pitch: float = 500.0  # nm
    film: float = 500.0  # nm
    mode: str = "rwa"
    t2: float = 100.0  # ms


@dataclass(frozen=True)
class QubitDecl:
    id: str
    bias: float = 0.0  # V/cm
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Pulse:
    qubit: str
    erf: float  # V/cm
    duration: float  # ps
    detuning: float = 0.0  # GHz
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Stark:
    qubit: str
    field: float  # V/cm
    duration: float  # ps
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Swap:
    a: str
    b: str
    duration: Optional[float] = None  # ps, None means auto
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Sweep:
    a: str
    b: str
    rate: float  # GHz/ns
    span: float  # GHz
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Wait:
    duration: float  # ps
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Readout:
    fpeak: Optional[float] = None  # V/cm, None means auto
    duration: float = 1.0  # ns
    seed: int = 0
    shots: int = 1
    line: int = field(default=0, compare=False)


Event = Union[Pulse, Stark, Swap, Sweep, Wait, Readout]


@dataclass(frozen=True)
class Schedule:
    header: Header
    qubits: tuple = ()
    events: tuple = ()

    @property
    def qubit_ids(self) -> list:
        return [q.id for q in self.qubits]

    @property
    def readout(self) -> Optional[Readout]:
        if self.events and isinstance(self.events[-1], Readout):
            return self.events[-1]
        return None


# -- parsing --------------------------------------------------------------------

@dataclass
class _Tok:
    text: str
    col: int


class _Line:
    def __init__(self, lineno, tokens, errors):
        self.lineno = lineno
        self.tokens = tokens
        self.errors = errors
        self.ok = True

    def error(self, tok, message):
        self.ok = False
        if tok is None:
            self.errors.append(ParseError(self.lineno, 1, message))
        else:
            self.errors.append(ParseError(self.lineno, tok.col, message, tok.text))

    def split(self, n_positional, allowed, required):
        """Positional tokens after the keyword, then key=value pairs."""
        args = self.tokens[1:]
        positional = [t for t in args if "=" not in t.text]
        pairs = [t for t in args if "=" in t.text]
        # positional arguments must precede parameters
        first_pair = next((i for i, t in enumerate(args) if "=" in t.text), len(args))
        for t in args[first_pair:]:
            if "=" not in t.text:
                self.error(t, "positional argument after key=value parameters")
        if len(positional) != n_positional:
            where = positional[n_positional] if len(positional) > n_positional else None
            kw = self.tokens[0]
            self.error(where or kw, f"'{kw.text}' takes {n_positional} positional argument(s), got {len(positional)}")
        params = {}
        for t in pairs:
            key, _, value = t.text.partition("=")
            if key not in allowed:
                self.error(t, f"unknown parameter '{key}' for '{self.tokens[0].text}'")
            elif key in params:
                self.error(t, f"duplicate parameter '{key}'")
            elif value == "":
                self.error(t, f"missing value for '{key}'")
            else:
                params[key] = _Tok(value, t.col + len(key) + 1)
        for key in required:
            if key not in params:
                self.error(self.tokens[0], f"missing required parameter '{key}'")
        return positional[:n_positional], params

    def number(self, tok, *, minimum=None, strict=False, allow_auto=False, integer=False):
        if allow_auto and tok.text == "auto":
            return None
        try:
            value = int(tok.text) if integer else float(tok.text)
        except ValueError:
            kind = "an integer" if integer else "a number"
            self.error(tok, f"expected {kind}" + (" or 'auto'" if allow_auto else ""))
            return math.nan
        if not integer and not math.isfinite(value):
            self.error(tok, "value must be finite")
        elif minimum is not None and (value < minimum or (strict and value == minimum)):
            self.error(tok, f"value must be {'>' if strict else '>='} {minimum}")
        return value

    def ident(self, tok):
        if not _ID.match(tok.text):
            self.error(tok, f"invalid qubit id '{tok.text}'")
        return tok.text


def _tokenize(text: str):
    text = text.split("#", 1)[0]
    return [_Tok(m.group(), m.start() + 1) for m in re.finditer(r"\S+", text)]


_HEADER_KEYS = ("material", "temperature", "pitch", "film", "mode", "t2")


def parse(source: str) -> Schedule:
    """Parse ``.eoh`` text; raises :class:`DSLError` listing every problem."""
    errors: list[ParseError] = []
    header: dict = {}
    qubits: list[QubitDecl] = []
    events: list = []
    refs: list = []  # (line, token, id) checked once all qubits are known
    named: set = set()  # ids from every declaration, even ones with bad parameters
    readout_line = None

    for lineno, raw in enumerate(source.splitlines(), start=1):
        tokens = _tokenize(raw)
        if not tokens:
            continue
        ln = _Line(lineno, tokens, errors)
        kw = tokens[0]
        word = kw.text

        if word != word.lower():
            ln.error(kw, "keywords are lowercase")
            continue

        if readout_line is not None and word not in _HEADER_KEYS:
            ln.error(kw, f"readout on line {readout_line} must be the last statement")

        if word in _HEADER_KEYS:
            if word in header:
                ln.error(kw, f"duplicate '{word}' statement")
                continue
            pos, _ = ln.split(1, (), ())
            if not ln.ok:
                continue
            arg = pos[0]
            if word == "material":
                if arg.text not in MATERIAL_NAMES:
                    ln.error(arg, f"unknown material; valid materials: {', '.join(MATERIAL_NAMES)}")
                else:
                    header[word] = arg.text
            elif word == "mode":
                if arg.text not in MODES:
                    ln.error(arg, "mode must be 'rwa' or 'full'")
                else:
                    header[word] = arg.text
            else:
                value = ln.number(arg, minimum=0.0, strict=True)
                if ln.ok:
                    header[word] = value

        elif word == "qubit":
            pos, p = ln.split(1, ("bias",), ())
            if not pos:
                continue
            qid = ln.ident(pos[0])
            bias = ln.number(p["bias"], minimum=0.0) if "bias" in p else 0.0
            if qid in named:
                ln.error(pos[0], f"qubit '{qid}' already declared")
            elif _ID.match(qid):
                # later references should not cascade into "undeclared" errors
                named.add(qid)
            if ln.ok:
                qubits.append(QubitDecl(qid, bias, lineno))

        elif word == "pulse":
            pos, p = ln.split(1, ("erf", "duration", "detuning"), ("erf", "duration"))
            if pos:
                refs.append((ln, pos[0]))
            erf = ln.number(p["erf"]) if "erf" in p else math.nan
            dur = ln.number(p["duration"], minimum=0.0) if "duration" in p else math.nan
            det = ln.number(p["detuning"]) if "detuning" in p else 0.0
            if ln.ok:
                events.append(Pulse(pos[0].text, erf, dur, det, lineno))

        elif word == "stark":
            pos, p = ln.split(1, ("field", "duration"), ("field", "duration"))
            if pos:
                refs.append((ln, pos[0]))
            fld = ln.number(p["field"], minimum=0.0) if "field" in p else math.nan
            dur = ln.number(p["duration"], minimum=0.0) if "duration" in p else math.nan
            if ln.ok:
                events.append(Stark(pos[0].text, fld, dur, lineno))

        elif word in ("swap", "sweep"):
            if word == "swap":
                pos, p = ln.split(2, ("duration",), ("duration",))
            else:
                pos, p = ln.split(2, ("rate", "span"), ("rate", "span"))
            for t in pos:
                refs.append((ln, t))
            if len(pos) == 2 and pos[0].text == pos[1].text:
                ln.error(pos[1], f"'{word}' needs two distinct qubits")
            if word == "swap":
                dur = ln.number(p["duration"], minimum=0.0, allow_auto=True) if "duration" in p else None
                if ln.ok:
                    events.append(Swap(pos[0].text, pos[1].text, dur, lineno))
            else:
                rate = ln.number(p["rate"]) if "rate" in p else math.nan
                if "rate" in p and rate == 0:
                    ln.error(p["rate"], "sweep rate must be non-zero")
                span = ln.number(p["span"], minimum=0.0, strict=True) if "span" in p else math.nan
                if ln.ok:
                    events.append(Sweep(pos[0].text, pos[1].text, rate, span, lineno))

        elif word == "wait":
            pos, _ = ln.split(1, (), ())
            if pos:
                dur = ln.number(pos[0], minimum=0.0)
                if ln.ok:
                    events.append(Wait(dur, lineno))

        elif word == "readout":
            if readout_line is not None:
                continue
            readout_line = lineno
            _, p = ln.split(0, ("fpeak", "duration", "seed", "shots"), ())
            fpeak = ln.number(p["fpeak"], minimum=0.0, strict=True, allow_auto=True) if "fpeak" in p else None
            dur = ln.number(p["duration"], minimum=0.0, strict=True) if "duration" in p else 1.0
            seed = ln.number(p["seed"], minimum=0, integer=True) if "seed" in p else 0
            shots = ln.number(p["shots"], minimum=1, integer=True) if "shots" in p else 1
            if ln.ok:
                events.append(Readout(fpeak, dur, seed, shots, lineno))

        else:
            ln.error(kw, f"unknown statement '{word}'")

    declared = named
    for ln, tok in refs:
        if _ID.match(tok.text) and tok.text not in declared:
            errors.append(ParseError(ln.lineno, tok.col, f"undeclared qubit '{tok.text}'", tok.text))
        elif not _ID.match(tok.text):
            errors.append(ParseError(ln.lineno, tok.col, f"invalid qubit id '{tok.text}'", tok.text))

    if "material" not in header and not any(e.message.startswith("unknown material") for e in errors):
        errors.append(ParseError(1, 1, "missing 'material' header"))

    if errors:
        errors.sort(key=lambda e: (e.line, e.column))
        raise DSLError(errors)
    return Schedule(Header(**header), tuple(qubits), tuple(events))


# -- rendering ------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _params(**kw) -> str:
    return " ".join(f"{k}={_fmt(kw[k])}" for k in sorted(kw))


def render(schedule: Schedule) -> str:
    h = schedule.header
    lines = [f"material {h.material}"]
    lines += [f"{name} {_fmt(getattr(h, name))}" for name in ("temperature", "pitch", "film")]
    lines += [f"mode {h.mode}", f"t2 {_fmt(h.t2)}"]
    lines += [f"qubit {q.id} {_params(bias=q.bias)}" for q in schedule.qubits]
    for ev in schedule.events:
        if isinstance(ev, Pulse):
            lines.append(f"pulse {ev.qubit} {_params(erf=ev.erf, duration=ev.duration, detuning=ev.detuning)}")
        elif isinstance(ev, Stark):
            lines.append(f"stark {ev.qubit} {_params(field=ev.field, duration=ev.duration)}")
        elif isinstance(ev, Swap):
            lines.append(f"swap {ev.a} {ev.b} {_params(duration=ev.duration)}")
        elif isinstance(ev, Sweep):
            lines.append(f"sweep {ev.a} {ev.b} {_params(rate=ev.rate, span=ev.span)}")
        elif isinstance(ev, Wait):
            lines.append(f"wait {_fmt(ev.duration)}")
        elif isinstance(ev, Readout):
            lines.append(f"readout {_params(fpeak=ev.fpeak, duration=ev.duration, seed=ev.seed, shots=ev.shots)}")
    return "\n".join(lines) + "\n"


def event_fields(ev) -> dict:
    """Public fields of an event, without the source line."""
    return {f.name: getattr(ev, f.name) for f in fields(ev) if f.name != "line"}
