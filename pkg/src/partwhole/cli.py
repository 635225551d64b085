"""Command-line front end.

Queries look like ``compare S(2) P``, ``prefix Qpos --len 9`` or
``label Qpos 2+1/3``.  Set expressions use ``union``, ``inter``, ``minus``
and ``x`` (Cartesian product, binding tightest).
"""

from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import oracle
from .errors import ParseError, PartWholeError, VerifyMismatch
from .expr import ATOM_NAMES, Atom, BinOp, Finite, SetExpr, to_text, universe_of
from .sets import build, compare_sets, format_element
from .verdict import SIGN_WORDS, residue_name

COMMANDS = ("size", "prefix", "chi", "compare", "label", "block", "verify")
DEFAULT_BUDGET = 10_000
DEFAULT_LEN = 20

_TOKEN = re.compile(r"\s*(?:(--[A-Za-z]+)|(-?\d+)|([A-Za-z][A-Za-z0-9]*)|([(){},/+]))")


@dataclass(frozen=True)
class Token:
    kind: str  # "opt" | "int" | "word" | "sym" | "end"
    text: str
    column: int


def tokenize(text: str) -> List[Token]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col - 1]!r}", col)
        for kind, group in zip(("opt", "int", "word", "sym"), m.groups()):
            if group is not None:
                out.append(Token(kind, group, m.start(m.lastindex) + 1))
        pos = m.end()
    out.append(Token("end", "", len(text) + 1))
    return out


@dataclass(frozen=True)
class Query:
    command: str
    sets: Tuple[SetExpr, ...] = ()
    number: Optional[int] = None
    element: object = None
    budget: int = DEFAULT_BUDGET
    length: int = DEFAULT_LEN
    json: bool = False
    budget_given: bool = field(default=False, compare=False)


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = repr(text) if text else kind
            got = "end of input" if t.kind == "end" else repr(t.text)
            raise ParseError(f"expected {want}, found {got}", t.column)
        return self.advance()

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    # grammar

    def setexpr(self) -> SetExpr:
        left = self.term()
        while self.at("word", "union") or self.at("word", "minus"):
            op = self.advance().text
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> SetExpr:
        left = self.factor()
        while self.at("word", "inter"):
            self.advance()
            left = BinOp("inter", left, self.factor())
        return left

    def factor(self) -> SetExpr:
        left = self.atom()
        while self.at("word", "x"):
            self.advance()
            left = BinOp("product", left, self.atom())
        return left

    def positive_int(self) -> int:
        t = self.expect("int")
        v = int(t.text)
        if v < 1:
            raise ParseError(f"expected a positive integer, found {t.text}", t.column)
        return v

    def atom(self) -> SetExpr:
        t = self.tok
        if t.kind == "word" and t.text in ATOM_NAMES:
            self.advance()
            if t.text in ("M", "S"):
                self.expect("sym", "(")
                k = self.positive_int()
                self.expect("sym", ")")
                return Atom(t.text, k)
            return Atom(t.text)
        if self.at("sym", "{"):
            self.advance()
            if self.at("sym", "}"):
                raise ParseError("empty set literal; write N minus N for the empty set",
                                 self.tok.column)
            elements = [int(self.expect("int").text)]
            while self.at("sym", ","):
                self.advance()
                elements.append(int(self.expect("int").text))
            self.expect("sym", "}")
            return Finite(tuple(elements))
        if self.at("sym", "("):
            self.advance()
            e = self.setexpr()
            self.expect("sym", ")")
            return e
        got = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"expected a set, found {got}", t.column)

    def element(self):
        if self.at("sym", "("):
            self.advance()
            a = self.element()
            self.expect("sym", ",")
            b = self.element()
            self.expect("sym", ")")
            return (a, b)
        whole = int(self.expect("int").text)
        if self.at("sym", "/"):
            self.advance()
            t = self.expect("int")
            if int(t.text) == 0:
                raise ParseError("zero denominator", t.column)
            return Fraction(whole, int(t.text))
        if self.at("sym", "+"):
            self.advance()
            num = int(self.expect("int").text)
            self.expect("sym", "/")
            t = self.expect("int")
            if int(t.text) == 0:
                raise ParseError("zero denominator", t.column)
            return whole + Fraction(num, int(t.text))
        return whole

    def options(self, opts: dict):
        while self.at("opt"):
            t = self.advance()
            if t.text == "--json":
                opts["json"] = True
            elif t.text in ("--budget", "--len"):
                v = self.positive_int()
                opts["budget" if t.text == "--budget" else "length"] = v
                if t.text == "--budget":
                    opts["budget_given"] = True
            else:
                raise ParseError(f"unknown option {t.text}", t.column)


def parse(text: str) -> Query:
    """Parse a query string; raises ParseError or UniverseError."""
    p = _Parser(text)
    t = p.tok
    if t.kind != "word" or t.text not in COMMANDS:
        got = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"expected a command ({', '.join(COMMANDS)}), found {got}", t.column)
    cmd = p.advance().text
    opts: dict = {}
    p.options(opts)
    sets = [p.setexpr()]
    number = element = None
    p.options(opts)
    if cmd == "compare":
        sets.append(p.setexpr())
    elif cmd == "label":
        element = p.element()
    elif cmd == "block":
        number = p.positive_int()
    p.options(opts)
    if not p.at("end"):
        raise ParseError(f"unexpected {p.tok.text!r}", p.tok.column)
    for s in sets:
        universe_of(s)
    return Query(cmd, tuple(sets), number, element, **opts)


def query_text(q: Query) -> str:
    """Canonical text for a query (parses back to an equal query)."""
    parts = [q.command] + [_wrap(s) for s in q.sets]
    if q.command == "label":
        parts.append(_element_text(q.element))
    if q.command == "block":
        parts.append(str(q.number))
    if q.budget != DEFAULT_BUDGET:
        parts += ["--budget", str(q.budget)]
    if q.length != DEFAULT_LEN:
        parts += ["--len", str(q.length)]
    if q.json:
        parts.append("--json")
    return " ".join(parts)


def _wrap(s: SetExpr) -> str:
    text = to_text(s)
    return f"({text})" if isinstance(s, BinOp) else text


def _element_text(x) -> str:
    if isinstance(x, tuple):
        return f"({_element_text(x[0])},{_element_text(x[1])})"
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    return str(x)


# execution --------------------------------------------------------------


def _numbers(values: Sequence[int]) -> str:
    return " ".join(str(v) for v in values)


def _verdict_certificate(v) -> dict:
    cert = {"method": v.method, "justification": v.justification()}
    if v.classes is not None:
        cert["period"] = v.period
        cert["classes"] = {residue_name(r, v.period): SIGN_WORDS[s] for r, s in v.classes}
    if v.proof is not None:
        cert["proof"] = {
            "less_on": residue_name(v.proof[0], v.period),
            "greater_on": residue_name(v.proof[1], v.period),
        }
    if v.certificate:
        cert.update({k: val for k, val in v.certificate.items() if k != "text"})
    return cert


def _execute(q: Query) -> Tuple[str, dict, int]:
    inputs = [to_text(s) for s in q.sets]
    payload = {"command": q.command, "inputs": inputs}
    if q.command == "compare":
        v = compare_sets(build(q.sets[0]), build(q.sets[1]), q.budget)
        payload["result"] = str(v.relation)
        if v.witness_m is not None:
            payload["witness"] = v.witness_m
        if v.checked_to is not None:
            payload["checked_to"] = v.checked_to
        payload["certificate"] = _verdict_certificate(v)
        return v.summary(), payload, 0

    a = build(q.sets[0])
    if q.command == "size":
        seq = a.size()
        lines = []
        if seq.symbolic is not None:
            lines.append(f"σ({inputs[0]}) = {seq.symbolic}")
        elif seq.envelope is not None:
            lines.append(f"σ({inputs[0]}): {seq.envelope}")
        prefix = seq.prefix(q.length)
        lines.append(f"prefix: {_numbers(prefix)}")
        payload["result"] = seq.to_json(q.length)
        if seq.envelope is not None:
            payload["certificate"] = seq.envelope.to_json()
        return "\n".join(lines), payload, 0
    if q.command == "prefix":
        prefix = a.size().prefix(q.length)
        payload["result"] = prefix
        return _numbers(prefix), payload, 0
    if q.command == "chi":
        chi = a.characteristic().prefix(q.length)
        payload["result"] = chi
        return _numbers(chi), payload, 0
    if q.command == "label":
        value = a.label(q.element)
        payload["inputs"].append(_element_text(q.element))
        payload["result"] = value
        return str(value), payload, 0
    if q.command == "block":
        items = a.block(q.number)
        payload["inputs"].append(q.number)
        payload["result"] = [format_element(x) for x in items]
        return "{" + ", ".join(format_element(x) for x in items) + "}", payload, 0
    if q.command == "verify":
        bound = q.budget if q.budget_given else q.length
        mine = a.size().prefix(bound)
        theirs = oracle.brute_sigma(q.sets[0], bound)
        payload["inputs"].append(bound)
        if mine == theirs:
            payload["result"] = "PASS"
            return f"PASS (σ prefix matches oracle: {_numbers(mine)})", payload, 0
        n = next(i for i, (x, y) in enumerate(zip(mine, theirs)) if x != y) + 1
        payload["result"] = "FAIL"
        payload["mismatch"] = {"n": n, "pipeline": mine[n - 1], "oracle": theirs[n - 1]}
        return (f"FAIL (first difference at n={n}: pipeline {mine[n - 1]}, "
                f"oracle {theirs[n - 1]})", payload, VerifyMismatch.exit_code)
    raise ValueError(q.command)


def run(q: Query) -> Tuple[str, int]:
    """Execute a query; returns ``(output, exit_code)``."""
    try:
        text, payload, code = _execute(q)
    except PartWholeError as exc:
        msg = f"error: {exc}"
        if q.json:
            msg = json.dumps({"command": q.command, "error": str(exc),
                              "exit_code": exc.exit_code}, sort_keys=True, ensure_ascii=False)
        return msg, exc.exit_code
    if q.json:
        return json.dumps(payload, sort_keys=True, ensure_ascii=False), code
    return text, code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    if not args or args[0] in ("-h", "--help"):
        print(__doc__.strip())
        print("\ncommands: " + ", ".join(COMMANDS))
        return 0 if args else 1
    try:
        q = parse(" ".join(args))
    except PartWholeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    out, code = run(q)
    stream = sys.stdout if code == 0 else sys.stderr
    if code == VerifyMismatch.exit_code:
        stream = sys.stdout
    print(out, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
