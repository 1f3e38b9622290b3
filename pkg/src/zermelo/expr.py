"""A small expression language for scalar fields.

Grammar (standard precedence; ``^`` binds tighter than unary minus, takes an
integer literal exponent and does not chain without parentheses)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" ["-"] INT)?
    atom   := NUMBER | x<k> | "(" expr ")" | call
    call   := sqrt(expr) | exp(expr) | abs2(block) | dot(block, block)
    block  := block(i, j)          # coordinates x_i..x_j inclusive, 1-based

Evaluation is generic: it works on floats, complex numbers and dual numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import exp, sqrt


class ExprError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line else ""
        super().__init__(f"{message}{where}")


class ExprSyntaxError(ExprError):
    pass


class ExprNameError(ExprError):
    pass


class ExprArityError(ExprError):
    pass


# AST ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Block:
    start: int
    stop: int  # inclusive


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Neg, BinOp, Pow, Call]
ExprAst = Node

FUNCTIONS = {"sqrt": ("expr",), "exp": ("expr",), "abs2": ("block",), "dot": ("block", "block")}


# tokenizer ---------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<num>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num | name | op | end
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    line, col, i = 1, 1, 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            col, i = col + 1, i + 1
            continue
        m = _TOKEN.match(text, i)
        if not m:
            raise ExprSyntaxError(f"unexpected character {ch!r}", line, col)
        tokens.append(Token(m.lastgroup, m.group(0), line, col))
        col += len(m.group(0))
        i = m.end()
    tokens.append(Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.text != text or t.kind == "end":
            got = "end of input" if t.kind == "end" else repr(t.text)
            raise ExprSyntaxError(f"expected {text!r}, got {got}", t.line, t.column)
        return self.advance()

    def parse(self) -> Node:
        if self.tok.kind == "end":
            raise ExprSyntaxError("empty expression", self.tok.line, self.tok.column)
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.line, self.tok.column)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.text == "-" and self.tok.kind == "op":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.text == "^":
            self.advance()
            sign = 1
            if self.tok.text == "-":
                self.advance()
                sign = -1
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                raise ExprSyntaxError("exponent must be an integer literal", t.line, t.column)
            self.advance()
            return Pow(base, sign * int(t.text))
        return base

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "name":
            self.advance()
            m = re.fullmatch(r"x([1-9]\d*)", t.text)
            if m:
                return Var(int(m.group(1)))
            if t.text in FUNCTIONS:
                return self.call(t)
            if t.text == "block":
                raise ExprSyntaxError("block(i,j) is only valid inside abs2 or dot", t.line, t.column)
            raise ExprNameError(f"unknown identifier {t.text!r}", t.line, t.column)
        got = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {got}", t.line, t.column)

    def call(self, name_tok: Token) -> Node:
        self.expect("(")
        kinds = FUNCTIONS[name_tok.text]
        args = []
        while True:
            args.append(self.block() if self.tok.text == "block" else self.expr())
            if self.tok.text == ",":
                self.advance()
                continue
            break
        self.expect(")")
        if len(args) != len(kinds):
            raise ExprArityError(
                f"{name_tok.text} takes {len(kinds)} argument(s), got {len(args)}",
                name_tok.line,
                name_tok.column,
            )
        for kind, a in zip(kinds, args):
            if (kind == "block") != isinstance(a, Block):
                raise ExprSyntaxError(
                    f"{name_tok.text} expects {kind} arguments", name_tok.line, name_tok.column
                )
        if name_tok.text == "dot" and _block_len(args[0]) != _block_len(args[1]):
            raise ExprArityError("dot of blocks with different lengths", name_tok.line, name_tok.column)
        return Call(name_tok.text, tuple(args))

    def block(self) -> Block:
        t = self.advance()
        self.expect("(")
        i = self._int()
        self.expect(",")
        j = self._int()
        self.expect(")")
        if not 1 <= i <= j:
            raise ExprSyntaxError(f"invalid block({i},{j})", t.line, t.column)
        return Block(i, j)

    def _int(self) -> int:
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            raise ExprSyntaxError("expected an integer index", t.line, t.column)
        self.advance()
        return int(t.text)


def _block_len(b: Block) -> int:
    return b.stop - b.start + 1


def parse_expr(text: str) -> Node:
    return _Parser(text).parse()


# printing ------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _num_text(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(node: Node) -> str:
    return _print(node, 0)


def _print(node, ctx: int) -> str:
    # ctx: binding strength demanded by the parent (0 none, 1 additive, 2 mult, 3 unary, 4 power base)
    if isinstance(node, Num):
        if node.value < 0:
            s = "-" + _num_text(-node.value)
            return f"({s})" if ctx >= 3 else s
        return _num_text(node.value)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Block):
        return f"block({node.start},{node.stop})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(_print(a, 0) for a in node.args)})"
    if isinstance(node, Pow):
        s = f"{_print(node.base, 4)}^{node.exponent}"
        return f"({s})" if ctx >= 4 else s
    if isinstance(node, Neg):
        s = "-" + _print(node.arg, 3)
        return f"({s})" if ctx >= 4 else s
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = _print(node.left, p)
        # left-associative: the right operand needs strictly higher precedence
        right = _print(node.right, p + 1)
        s = f"{left} {node.op} {right}"
        return f"({s})" if ctx > p else s
    raise TypeError(f"not an expression node: {node!r}")


# evaluation ----------------------------------------------------------------------

def max_index(node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Block):
        return node.stop
    if isinstance(node, Num):
        return 0
    if isinstance(node, Neg):
        return max_index(node.arg)
    if isinstance(node, Pow):
        return max_index(node.base)
    if isinstance(node, BinOp):
        return max(max_index(node.left), max_index(node.right))
    if isinstance(node, Call):
        return max(max_index(a) for a in node.args)
    raise TypeError(node)


def _ipow(b, k: int):
    if k == 0:
        return 1.0 + 0.0 * b
    r = b
    for _ in range(abs(k) - 1):
        r = r * b
    return r if k > 0 else 1.0 / r


def evaluate(node, x):
    """Evaluate at a coordinate vector (floats, complex or duals)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.index > len(x):
            raise ExprError(f"x{node.index} used with a {len(x)}-dimensional point")
        return x[node.index - 1]
    if isinstance(node, Neg):
        return -evaluate(node.arg, x)
    if isinstance(node, Pow):
        return _ipow(evaluate(node.base, x), node.exponent)
    if isinstance(node, BinOp):
        a, b = evaluate(node.left, x), evaluate(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a / b
    if isinstance(node, Call):
        if node.name == "sqrt":
            return sqrt(evaluate(node.args[0], x))
        if node.name == "exp":
            return exp(evaluate(node.args[0], x))
        blocks = [_slice(b, x) for b in node.args]
        u, v = (blocks[0], blocks[0]) if node.name == "abs2" else blocks
        out = u[0] * v[0]
        for p, q in zip(u[1:], v[1:]):
            out = out + p * q
        return out
    raise TypeError(node)


def _slice(b: Block, x):
    if b.stop > len(x):
        raise ExprError(f"block({b.start},{b.stop}) used with a {len(x)}-dimensional point")
    return [x[i] for i in range(b.start - 1, b.stop)]


@dataclass(frozen=True)
class Expression:
    """Parsed expression bundled with its source; callable on coordinate vectors."""

    text: str
    ast: Node

    @classmethod
    def parse(cls, text: str) -> "Expression":
        return cls(text, parse_expr(text))

    @property
    def min_dim(self) -> int:
        return max_index(self.ast)

    def __call__(self, x):
        return evaluate(self.ast, x)

    def canonical(self) -> str:
        return to_text(self.ast)

    def eval_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([float(self(row)) for row in X])
