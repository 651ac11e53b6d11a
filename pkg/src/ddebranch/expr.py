"""A small arithmetic expression language for configuration files.

Grammar (standard precedence, lowest to highest):

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := atom ('^' factor)?          # right-associative
    atom    := NUMBER | 'pi' | NAME | NAME '(' expr ')' | '(' expr ')'

Functions: sin, cos, exp, log, abs, sqrt (all unary).  '^' is
right-associative and unary minus binds tighter than '^' on its left
operand, so "-x^2" parses as -(x^2) and "2^3^2" as 2^(3^2).  There is no
implicit multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Set, Tuple, Union

from .errors import ExprArityError, ExprEvalError, ExprNameError, ExprSyntaxError

FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": math.log,
    "abs": abs,
    "sqrt": math.sqrt,
}

CONSTANTS = {"pi": math.pi}


@dataclass(frozen=True)
class Num:
    value: float

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    operand: "Node"

    def __str__(self):
        return f"(-{self.operand})"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"

    def __str__(self):
        return f"{self.fn}({self.arg})"


Node = Union[Num, Var, Neg, BinOp, Call]


@dataclass(frozen=True)
class Expr:
    """A parsed, immutable expression with its declared variable set."""

    root: Node
    allowed_vars: FrozenSet[str]

    def __str__(self):
        return str(self.root)

    def free_vars(self) -> Set[str]:
        out: Set[str] = set()
        _collect_vars(self.root, out)
        return out

    def __call__(self, **bindings):
        return evaluate(self, bindings)


def _collect_vars(node: Node, out: Set[str]):
    if isinstance(node, Var):
        out.add(node.name)
    elif isinstance(node, Neg):
        _collect_vars(node.operand, out)
    elif isinstance(node, BinOp):
        _collect_vars(node.left, out)
        _collect_vars(node.right, out)
    elif isinstance(node, Call):
        _collect_vars(node.arg, out)


def _tokenize(source: str):
    """Yield (kind, text, offset) tokens; kinds: num, name, op, lparen, rparen."""
    tokens = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (source[j].isdigit() or (source[j] == "." and not seen_dot)):
                if source[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            tokens.append(("num", source[i:j], i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(("name", source[i:j], i))
            i = j
        elif c in "+-*/^":
            tokens.append(("op", c, i))
            i += 1
        elif c == "(":
            tokens.append(("lparen", c, i))
            i += 1
        elif c == ")":
            tokens.append(("rparen", c, i))
            i += 1
        elif c == ",":
            tokens.append(("comma", c, i))
            i += 1
        else:
            raise ExprSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source: str, allowed_vars: Set[str]):
        self.source = source
        self.allowed = set(allowed_vars)
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind, text=None):
        kind_, text_, off = self.peek()
        if kind_ != kind or (text is not None and text_ != text):
            want = text if text is not None else kind
            raise ExprSyntaxError(f"expected {want!r}", off)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.advance()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Node:
        kind, text, off = self.peek()
        if kind == "num":
            self.advance()
            return Num(float(text))
        if kind == "lparen":
            self.advance()
            node = self.expr()
            self.expect("rparen")
            return node
        if kind == "name":
            self.advance()
            if self.peek()[0] == "lparen":
                if text not in FUNCTIONS:
                    raise ExprNameError(text, off)
                self.advance()
                arg = self.expr()
                if self.peek()[0] == "comma":
                    raise ExprArityError(text, 2, self.peek()[2])
                self.expect("rparen")
                return Call(text, arg)
            if text in CONSTANTS:
                return Num(CONSTANTS[text])
            if text in FUNCTIONS:
                raise ExprArityError(text, 0, off)
            if text not in self.allowed:
                raise ExprNameError(text, off)
            return Var(text)
        raise ExprSyntaxError("incomplete expression" if kind == "end" else f"unexpected {text!r}", off)


def parse(source: str, allowed_vars) -> Expr:
    """Parse a source string into an immutable Expr.

    Every identifier must be a known function, the constant pi, or a member
    of allowed_vars; anything else is an ExprNameError naming the offender.
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    allowed = frozenset(allowed_vars)
    root = _Parser(source, allowed).parse()
    return Expr(root=root, allowed_vars=allowed)


def _eval_node(node: Node, bindings: Dict[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return float(bindings[node.name])
        except KeyError:
            raise ExprEvalError(f"unbound variable '{node.name}'", node) from None
    if isinstance(node, Neg):
        return -_eval_node(node.operand, bindings)
    if isinstance(node, Call):
        x = _eval_node(node.arg, bindings)
        if node.fn == "log" and x <= 0.0:
            raise ExprEvalError(f"log of nonpositive value {x!r}", node)
        if node.fn == "sqrt" and x < 0.0:
            raise ExprEvalError(f"sqrt of negative value {x!r}", node)
        return float(FUNCTIONS[node.fn](x))
    # BinOp
    lhs = _eval_node(node.left, bindings)
    rhs = _eval_node(node.right, bindings)
    op = node.op
    if op == "+":
        return lhs + rhs
    if op == "-":
        return lhs - rhs
    if op == "*":
        return lhs * rhs
    if op == "/":
        if rhs == 0.0:
            raise ExprEvalError("division by zero", node)
        return lhs / rhs
    # '^'
    try:
        return float(lhs ** rhs)
    except (OverflowError, ValueError) as exc:
        raise ExprEvalError(f"power error: {exc}", node) from None


def evaluate(e: Expr, bindings: Dict[str, float]) -> float:
    """IEEE double evaluation of the AST under the given bindings."""
    return _eval_node(e.root, bindings)


def pretty(e: Expr) -> str:
    """Fully parenthesized rendering; parse(pretty(e)) reproduces the AST."""
    return str(e.root)
