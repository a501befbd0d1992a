"""OpenQASM 2.0 import/export for the supported gate subset.

Accepted programs: the ``OPENQASM 2.0;`` header, an optional
``include "qelib1.inc";`` (recognised, never read), exactly one ``qreg`` and
calls to ``h x y z cx cz rx ry rz`` on single register elements. Angles may
use numeric literals, ``pi``, unary minus, parentheses, ``*`` and ``/``.
Anything else is rejected with a line/column diagnostic.

``q[k]`` always maps to internal qubit ``k``, the most significant bit of the
state index.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .circuit import Circuit, GateInstance, GateKind, validate

_BY_NAME = {k.value: k for k in GateKind}
_UNSUPPORTED = {
    "creg": "classical register declaration",
    "measure": "measurement",
    "barrier": "barrier",
    "reset": "reset",
    "gate": "custom gate definition",
    "opaque": "opaque gate declaration",
    "if": "classically controlled operation",
    "U": "builtin U gate",
    "CX": "builtin CX gate",
}


class QasmError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str  # ID NUMBER STRING SYM EOF
    text: str
    line: int
    column: int

    def describe(self) -> str:
        return "end of input" if self.kind == "EOF" else repr(self.text)


_TOKEN_RE = re.compile(
    r"""
    (?P<WS>[ \t\r\n]+)
  | (?P<LINECOMMENT>//[^\n]*)
  | (?P<BLOCKCOMMENT>/\*.*?\*/)
  | (?P<NUMBER>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ID>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<STRING>"[^"\n]*")
  | (?P<SYM>->|==|[;,()\[\]{}+\-*/^])
    """,
    re.VERBOSE | re.DOTALL | re.ASCII,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            if text.startswith("/*", pos):
                raise QasmError("unterminated block comment", line, col)
            raise QasmError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("WS", "LINECOMMENT", "BLOCKCOMMENT"):
            tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0
        self.reg_name: str | None = None
        self.reg_size = 0
        self.gates: list[GateInstance] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None) -> QasmError:
        tok = tok or self.tok
        return QasmError(message, tok.line, tok.column)

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            wanted = what or (repr(text) if text else kind.lower())
            raise self.error(f"expected {wanted}, got {tok.describe()}")
        return self.advance()

    def program(self) -> Circuit:
        if not (self.tok.kind == "ID" and self.tok.text == "OPENQASM"):
            raise self.error(f"expected OPENQASM header, got {self.tok.describe()}")
        self.advance()
        version = self.expect("NUMBER", what="version number")
        if version.text not in ("2.0", "2"):
            raise self.error(f"unsupported OpenQASM version {version.text}", version)
        self.expect("SYM", ";")
        if self.tok.kind == "ID" and self.tok.text == "include":
            self.advance()
            path = self.expect("STRING", what="include path")
            if path.text != '"qelib1.inc"':
                raise self.error(f"unsupported include {path.text}", path)
            self.expect("SYM", ";")
        while self.tok.kind != "EOF":
            self.statement()
        if self.reg_name is None:
            raise self.error("missing qreg declaration")
        circuit = Circuit(self.reg_size, self.gates)
        validate(circuit).raise_if_invalid()
        return circuit

    def statement(self) -> None:
        tok = self.tok
        if tok.kind != "ID":
            raise self.error(f"expected statement, got {tok.describe()}")
        if tok.text == "qreg":
            self.qreg()
        elif tok.text in _UNSUPPORTED:
            raise self.error(f"unsupported statement '{tok.text}' ({_UNSUPPORTED[tok.text]})")
        elif tok.text == "include":
            raise self.error("include is only allowed directly after the header")
        elif tok.text in _BY_NAME:
            self.gate_call()
        else:
            raise self.error(f"unsupported gate '{tok.text}'")

    def qreg(self) -> None:
        start = self.advance()
        if self.reg_name is not None:
            raise self.error("multiple qreg declarations are not supported", start)
        name = self.expect("ID", what="register name")
        self.expect("SYM", "[")
        size = self.expect("NUMBER", what="register size")
        if not size.text.isdigit() or int(size.text) < 1:
            raise self.error("register size must be a positive integer", size)
        self.expect("SYM", "]")
        self.expect("SYM", ";")
        self.reg_name, self.reg_size = name.text, int(size.text)

    def gate_call(self) -> None:
        name_tok = self.advance()
        kind = _BY_NAME[name_tok.text]
        if self.reg_name is None:
            raise self.error("gate used before qreg declaration", name_tok)
        angle = None
        if kind.parametric:
            self.expect("SYM", "(")
            angle = self.expr()
            self.expect("SYM", ")")
        elif self.tok.text == "(":
            raise self.error(f"gate '{name_tok.text}' takes no parameters")
        qubits = [self.qarg()]
        while self.tok.kind == "SYM" and self.tok.text == ",":
            self.advance()
            qubits.append(self.qarg())
        self.expect("SYM", ";")
        if len(qubits) != kind.n_qubits:
            raise self.error(f"gate '{name_tok.text}' expects {kind.n_qubits} qubit(s), got {len(qubits)}", name_tok)
        if len(set(qubits)) != len(qubits):
            raise self.error(f"gate '{name_tok.text}' uses the same qubit twice", name_tok)
        self.gates.append(GateInstance(kind, tuple(qubits), angle))

    def qarg(self) -> int:
        name = self.expect("ID", what="qubit argument")
        if name.text != self.reg_name:
            raise self.error(f"unknown register '{name.text}'", name)
        if self.tok.text != "[":
            raise self.error("register broadcast is not supported; index a single qubit")
        self.advance()
        idx = self.expect("NUMBER", what="qubit index")
        if not idx.text.isdigit():
            raise self.error("qubit index must be a non-negative integer", idx)
        if int(idx.text) >= self.reg_size:
            raise self.error(f"qubit index {idx.text} out of range for {self.reg_name}[{self.reg_size}]", idx)
        self.expect("SYM", "]")
        return int(idx.text)

    # angle := term ; term := unary (('*'|'/') unary)* ; unary := '-' unary | atom
    def expr(self) -> float:
        value = self.unary()
        while self.tok.kind == "SYM" and self.tok.text in ("*", "/"):
            op = self.advance()
            rhs = self.unary()
            if op.text == "*":
                value *= rhs
            elif rhs == 0:
                raise self.error("division by zero", op)
            else:
                value /= rhs
        if not math.isfinite(value):
            raise self.error("angle is not finite")
        return value

    def unary(self) -> float:
        if self.tok.kind == "SYM" and self.tok.text == "-":
            self.advance()
            return -self.unary()
        return self.atom()

    def atom(self) -> float:
        tok = self.tok
        if tok.kind == "NUMBER":
            self.advance()
            return float(tok.text)
        if tok.kind == "ID" and tok.text == "pi":
            self.advance()
            return math.pi
        if tok.kind == "SYM" and tok.text == "(":
            self.advance()
            value = self.expr()
            self.expect("SYM", ")")
            return value
        raise self.error(f"expected number, 'pi', '-' or '(', got {tok.describe()}")


def parse_qasm(text: str | bytes) -> Circuit:
    """Parse a program into a circuit with fixed-angle gates.

    Raises :class:`QasmError` for anything outside the supported subset.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise QasmError(f"input is not valid UTF-8 (byte {exc.start})") from None
    return _Parser(tokenize(text)).program()


def format_angle(theta: float) -> str:
    if not math.isfinite(theta):
        raise ValueError(f"cannot export non-finite angle {theta}")
    return format(theta, ".17g")


def export_qasm(circuit: Circuit, values=None) -> str:
    """Emit the circuit with angles resolved from ``values`` (default: stored values)."""
    validate(circuit).raise_if_invalid()
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.n_qubits}];"]
    for gate, theta in zip(circuit.gates, circuit.gate_angles(values)):
        args = ",".join(f"q[{q}]" for q in gate.qubits)
        if gate.kind.parametric:
            lines.append(f"{gate.kind.value}({format_angle(theta)}) {args};")
        else:
            lines.append(f"{gate.kind.value} {args};")
    return "\n".join(lines) + "\n"
