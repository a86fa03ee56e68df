"""Concrete syntax: parser and pretty-printer, round-trip stable.

Grammar sketch (comments run `--` to end of line)::

    program  ::= decl* expr
    decl     ::= "let" ["rec"] IDENT [":" type] "=" expr ";"
    expr     ::= "\\" IDENT ":" type "." expr
               | "if" expr "then" expr "else" expr
               | orexpr
    orexpr   ::= andexpr ("||" andexpr)*
    andexpr  ::= cmpexpr ("&&" cmpexpr)*
    cmpexpr  ::= addexpr [("="|"<>"|"<"|"<="|">"|">=") addexpr]
    addexpr  ::= mulexpr (("+"|"-") mulexpr)*
    mulexpr  ::= unary (("*"|"mod"|"div") unary)*
    unary    ::= "not" unary | "-" INT | "-" unary | appexpr
    appexpr  ::= ("<" type "=>" type "@" IDENT ">" appexpr | atom) atom*
    atom     ::= INT | "true" | "false" | IDENT | "(" expr ")"
    type     ::= atomtype ["->" type]
    atomtype ::= "{" IDENT ":" ("Int"|"Bool") "|" expr "}" | "(" type ")"

`let` is elaborated by substitution, `let rec` (annotation required) by Fix.
Shadowed binders are renamed apart while parsing.  Runtime-only forms print
with sigils (`blame l`, `check<...>`, `stack<...>`) that parse rejects.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .syntax import (
    Abs,
    ActiveCheck,
    App,
    BaseType,
    Blame,
    Cast,
    Coerce,
    CoercionStack,
    Cond,
    Const,
    EmptyAnn,
    Fix,
    Fun,
    FunC,
    Op,
    Refinement,
    Refs,
    Term,
    Type,
    Types,
    Var,
    fresh_name,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Decl:
    name: str
    annot: Optional[Type]
    body: Term
    recursive: bool


@dataclass(frozen=True)
class SourceFile:
    decls: tuple[Decl, ...]
    main: Term


KEYWORDS = {"if", "then", "else", "let", "rec", "true", "false", "not", "mod", "div", "Int", "Bool"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_']*)
  | (?P<punct>->|=>|<=|>=|<>|&&|\|\||[{}()<>|:.\\;@=+\-*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "ident" | "punct" | "kw" | "eof"
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        column = pos - line_start + 1
        if m.lastgroup == "ws":
            chunk = m.group()
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                line_start = m.start() + chunk.rindex("\n") + 1
        elif m.lastgroup == "ident":
            word = m.group()
            tokens.append(Token("kw" if word in KEYWORDS else "ident", word, line, column))
        else:
            tokens.append(Token(m.lastgroup, m.group(), line, column))
        pos = m.end()
    tokens.append(Token("eof", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    # -- token plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message + (f" (found {tok.text!r})" if tok.text else " (at end of input)"), tok.line, tok.column)

    def eat(self, kind: str, text: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            raise self.error(f"expected {text or kind}")
        return self.next()

    def at(self, kind: str, text: Optional[str] = None, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == kind and (text is None or tok.text == text)

    # -- program structure

    def parse_program(self) -> SourceFile:
        decls: list[Decl] = []
        while self.at("kw", "let"):
            decls.append(self.parse_decl())
        main = self.parse_expr()
        self.eat("eof")
        return SourceFile(tuple(decls), main)

    def parse_decl(self) -> Decl:
        self.eat("kw", "let")
        recursive = False
        if self.at("kw", "rec"):
            self.next()
            recursive = True
        name = self.eat("ident").text
        annot = None
        if self.at("punct", ":"):
            self.next()
            annot = self.parse_type()
        if recursive and annot is None:
            raise self.error("let rec requires a type annotation")
        self.eat("punct", "=")
        body = self.parse_expr()
        self.eat("punct", ";")
        return Decl(name, annot, body, recursive)

    # -- expressions

    def parse_expr(self) -> Term:
        if self.at("punct", "\\"):
            self.next()
            binder = self.eat("ident").text
            self.eat("punct", ":")
            annot = self.parse_type()
            self.eat("punct", ".")
            return Abs(binder, annot, self.parse_expr())
        if self.at("kw", "if"):
            self.next()
            guard = self.parse_expr()
            self.eat("kw", "then")
            then = self.parse_expr()
            self.eat("kw", "else")
            return Cond(guard, then, self.parse_expr())
        if self.at("kw", "let"):
            decl = self.parse_decl()
            rest = self.parse_expr()
            value = Fix(decl.name, decl.annot, decl.body) if decl.recursive else decl.body
            return _subst_decl(rest, decl.name, value)
        return self.parse_or()

    def parse_or(self) -> Term:
        e = self.parse_and()
        while self.at("punct", "||"):
            self.next()
            e = Op("||", (e, self.parse_and()))
        return e

    def parse_and(self) -> Term:
        e = self.parse_cmp()
        while self.at("punct", "&&"):
            self.next()
            e = Op("&&", (e, self.parse_cmp()))
        return e

    def parse_cmp(self) -> Term:
        e = self.parse_add()
        for op in ("=", "<>", "<", "<=", ">", ">="):
            if self.at("punct", op):
                self.next()
                return Op(op, (e, self.parse_add()))
        return e

    def parse_add(self) -> Term:
        e = self.parse_mul()
        while self.at("punct", "+") or self.at("punct", "-"):
            op = self.next().text
            e = Op(op, (e, self.parse_mul()))
        return e

    def parse_mul(self) -> Term:
        e = self.parse_unary()
        while self.at("punct", "*") or self.at("kw", "mod") or self.at("kw", "div"):
            op = self.next().text
            e = Op(op, (e, self.parse_unary()))
        return e

    def parse_unary(self) -> Term:
        if self.at("kw", "not"):
            self.next()
            return Op("not", (self.parse_unary(),))
        if self.at("punct", "-"):
            self.next()
            if self.at("int"):
                return Const(-int(self.next().text))
            return Op("-", (Const(0), self.parse_unary()))
        return self.parse_app()

    def parse_app(self) -> Term:
        e = self.parse_cast() if self._at_cast() else self.parse_atom()
        while self._at_atom():
            e = App(e, self.parse_atom())
        return e

    def _at_cast(self) -> bool:
        # A cast's "<" is always followed by a type opener.
        return self.at("punct", "<") and (self.at("punct", "{", ahead=1) or self.at("punct", "(", ahead=1))

    def parse_cast(self) -> Term:
        self.eat("punct", "<")
        src = self.parse_type()
        self.eat("punct", "=>")
        tgt = self.parse_type()
        self.eat("punct", "@")
        label = self.eat("ident").text
        self.eat("punct", ">")
        return Cast(src, EmptyAnn(), tgt, label, self.parse_app())

    def _at_atom(self) -> bool:
        return self.at("int") or self.at("ident") or self.at("kw", "true") or self.at("kw", "false") or self.at("punct", "(")

    def parse_atom(self) -> Term:
        if self.at("int"):
            return Const(int(self.next().text))
        if self.at("kw", "true") or self.at("kw", "false"):
            return Const(self.next().text == "true")
        if self.at("ident"):
            return Var(self.next().text)
        if self.at("punct", "("):
            self.next()
            e = self.parse_expr()
            self.eat("punct", ")")
            return e
        raise self.error("expected an expression")

    # -- types

    def parse_type(self) -> Type:
        t = self.parse_atom_type()
        if self.at("punct", "->"):
            self.next()
            return Fun(t, self.parse_type())
        return t

    def parse_atom_type(self) -> Type:
        if self.at("punct", "("):
            self.next()
            t = self.parse_type()
            self.eat("punct", ")")
            return t
        self.eat("punct", "{")
        binder = self.eat("ident").text
        self.eat("punct", ":")
        base_tok = self.next()
        if base_tok.text == "Int":
            base = BaseType.INT
        elif base_tok.text == "Bool":
            base = BaseType.BOOL
        else:
            raise self.error("expected Int or Bool")
        self.eat("punct", "|")
        predicate = self.parse_expr()
        self.eat("punct", "}")
        return Refinement(binder, base, predicate)


def parse_program(text: str) -> SourceFile:
    """Parse a whole file into declarations plus the main expression."""

    source = _Parser(text).parse_program()
    names = [d.name for d in source.decls]
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        raise ParseError(f"duplicate declaration {dup!r}", 1, 1)
    return source


def elaborate(source: SourceFile) -> Term:
    term = source.main
    for decl in reversed(source.decls):
        value = Fix(decl.name, decl.annot, decl.body) if decl.recursive else decl.body
        term = _subst_decl(term, decl.name, value)
    return _unshadow(term, {}, set())


def _subst_decl(term: Term, name: str, value: Term) -> Term:
    from .syntax import subst

    return subst(term, name, value)


def parse(text: str) -> Term:
    """Parse a program to a single elaborated term."""

    return elaborate(parse_program(text))


def parse_type(text: str) -> Type:
    """Parse a standalone type."""

    parser = _Parser(text)
    t = parser.parse_type()
    parser.eat("eof")
    return t


def _unshadow(node, env: dict[str, str], used: set[str]):
    """Rename binders apart so no variable shadows another."""

    if isinstance(node, Var):
        return Var(env.get(node.name, node.name))
    if isinstance(node, (Const, Blame)):
        return node
    if isinstance(node, (Abs, Fix)):
        annot = _unshadow(node.annot, env, used)
        binder = node.binder
        if binder in used:
            binder = fresh_name(binder, frozenset(used) | frozenset(env.values()))
        used.add(binder)
        body = _unshadow(node.body, {**env, node.binder: binder}, used)
        return type(node)(binder, annot, body)
    if isinstance(node, App):
        return App(_unshadow(node.fn, env, used), _unshadow(node.arg, env, used))
    if isinstance(node, Op):
        return Op(node.name, tuple(_unshadow(a, env, used) for a in node.args))
    if isinstance(node, Cast):
        return Cast(
            _unshadow(node.src, env, used),
            node.ann,
            _unshadow(node.tgt, env, used),
            node.label,
            _unshadow(node.subject, env, used),
        )
    if isinstance(node, Cond):
        return Cond(
            _unshadow(node.guard, env, used),
            _unshadow(node.then, env, used),
            _unshadow(node.orelse, env, used),
        )
    if isinstance(node, Refinement):
        binder = node.binder
        if binder in used:
            binder = fresh_name(binder, frozenset(used) | frozenset(env.values()))
        pred = _unshadow(node.predicate, {**env, node.binder: binder}, used | {binder})
        return Refinement(binder, node.base, pred)
    if isinstance(node, Fun):
        return Fun(_unshadow(node.dom, env, used), _unshadow(node.cod, env, used))
    if isinstance(node, (ActiveCheck, CoercionStack)):
        raise ParseError("runtime-only form in source program", 1, 1)
    raise TypeError(f"unshadow: unexpected node {node!r}")


# ---------------------------------------------------------------------------
# Printing

_LEVEL_OR, _LEVEL_AND, _LEVEL_CMP, _LEVEL_ADD, _LEVEL_MUL, _LEVEL_UNARY, _LEVEL_APP, _LEVEL_ATOM = range(1, 9)
_LEVEL_LOW = 0

_BINOP_LEVEL = {
    "||": _LEVEL_OR,
    "&&": _LEVEL_AND,
    "=": _LEVEL_CMP,
    "<>": _LEVEL_CMP,
    "<": _LEVEL_CMP,
    "<=": _LEVEL_CMP,
    ">": _LEVEL_CMP,
    ">=": _LEVEL_CMP,
    "+": _LEVEL_ADD,
    "-": _LEVEL_ADD,
    "*": _LEVEL_MUL,
    "mod": _LEVEL_MUL,
    "div": _LEVEL_MUL,
}


def print_term(e: Term) -> str:
    return _show(e, _LEVEL_LOW)


def print_type(t: Type) -> str:
    if isinstance(t, Refinement):
        return "{" + t.binder + ":" + t.base.value + " | " + print_term(t.predicate) + "}"
    dom = print_type(t.dom)
    if isinstance(t.dom, Fun):
        dom = "(" + dom + ")"
    return dom + " -> " + print_type(t.cod)


def _paren(s: str, level: int, minimum: int) -> str:
    return "(" + s + ")" if level < minimum else s


def _show_label(label) -> str:
    return label if label is not None else "•"


def _show_ann(ann) -> str:
    if isinstance(ann, EmptyAnn):
        return ""
    if isinstance(ann, Types):
        return " ! {" + ", ".join(print_type(t) for t in ann.types) + "}"
    return " ! " + _show_coercion(ann.coercion)


def _show_coercion(c) -> str:
    if isinstance(c, Refs):
        return "[" + ", ".join(print_type(x.ref) + "^" + x.label for x in c.entries) + "]"
    return "(" + _show_coercion(c.dom) + " |-> " + _show_coercion(c.cod) + ")"


def _show(e: Term, minimum: int) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        if e.value < 0:
            return _paren(str(e.value), _LEVEL_UNARY, minimum)
        return str(e.value)
    if isinstance(e, Abs):
        s = "\\" + e.binder + ":" + print_type(e.annot) + ". " + _show(e.body, _LEVEL_LOW)
        return _paren(s, _LEVEL_LOW, minimum)
    if isinstance(e, Fix):
        # `let rec` is the only source syntax for Fix; standalone prints as a decl.
        s = "let rec " + e.binder + " : " + print_type(e.annot) + " = " + _show(e.body, _LEVEL_LOW) + "; " + e.binder
        return _paren(s, _LEVEL_LOW, minimum)
    if isinstance(e, App):
        s = _show(e.fn, _LEVEL_APP) + " " + _show(e.arg, _LEVEL_ATOM)
        return _paren(s, _LEVEL_APP, minimum)
    if isinstance(e, Op):
        if e.name == "not":
            return _paren("not " + _show(e.args[0], _LEVEL_UNARY), _LEVEL_UNARY, minimum)
        level = _BINOP_LEVEL[e.name]
        # cmp is non-associative (parenthesize both sides); add/mul associate left
        left = _show(e.args[0], level + 1 if level == _LEVEL_CMP else level)
        right = _show(e.args[1], level + 1)
        return _paren(left + " " + e.name + " " + right, level, minimum)
    if isinstance(e, Cast):
        head = "<" + print_type(e.src) + " => " + print_type(e.tgt) + " @ " + _show_label(e.label) + _show_ann(e.ann) + ">"
        return _paren(head + " " + _show(e.subject, _LEVEL_ATOM), _LEVEL_LOW, minimum)
    if isinstance(e, Blame):
        return _paren("blame " + _show_label(e.label), _LEVEL_LOW, minimum)
    if isinstance(e, ActiveCheck):
        s = (
            "check<"
            + print_type(e.tgt)
            + ", "
            + _show(e.current, _LEVEL_LOW)
            + ", "
            + _show(e.scrutinee, _LEVEL_LOW)
            + ">@"
            + _show_label(e.label)
        )
        return _paren(s, _LEVEL_LOW, minimum)
    if isinstance(e, CoercionStack):
        s = (
            "stack<"
            + print_type(e.tgt)
            + ", "
            + ("ok" if e.status.name == "CHECKED" else "?")
            + ", ["
            + ", ".join(print_type(x.ref) + "^" + x.label for x in e.pending)
            + "], "
            + _show(e.scrutinee, _LEVEL_LOW)
            + ", "
            + _show(e.current, _LEVEL_LOW)
            + ">"
        )
        return _paren(s, _LEVEL_LOW, minimum)
    if isinstance(e, Cond):
        s = "if " + _show(e.guard, _LEVEL_LOW) + " then " + _show(e.then, _LEVEL_LOW) + " else " + _show(e.orelse, _LEVEL_LOW)
        return _paren(s, _LEVEL_LOW, minimum)
    raise TypeError(f"print: not a term: {e!r}")
