import re
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import sympy as sp

from .diffpoly import DiffPolynomial, Exponent, JetLayout
from .rational import T, RationalFunction

__all__ = 'ParseError', 'PolySystem', 'parse_poly', 'format_poly', 'parse_system', 'format_system'

_TOKEN_RE = re.compile(r'\s*(?:(\d+)|([A-Za-z][A-Za-z0-9]*)|(.))')
_HEADER_RE = re.compile(
    r'^\s*vars:\s*(?P<vars>[^;]*);\s*order:\s*(?P<order>\d+)\s*;(?:\s*consts:\s*(?P<consts>[^;]*);)?\s*$'
)


class ParseError(ValueError):
    def __init__(self, reason: str, position: int):
        super().__init__(f'{reason} at position {position}')
        self.reason = reason
        self.position = position


class _Token(NamedTuple):
    kind: str  # 'num', 'ident', 'op' or 'end'
    text: str
    position: int


def _tokenize(text: str, offset: int = 0) -> List[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        assert m is not None
        if m.group(1):
            tokens.append(_Token('num', m.group(1), offset + m.start(1)))
        elif m.group(2):
            tokens.append(_Token('ident', m.group(2), offset + m.start(2)))
        elif m.group(3):
            if m.group(3) not in '+-*/^_()':
                raise ParseError(f'unexpected character {m.group(3)!r}', offset + m.start(3))
            tokens.append(_Token('op', m.group(3), offset + m.start(3)))
        pos = m.end()
    tokens.append(_Token('end', '', offset + len(text)))
    return tokens


class _Parser:
    """
    Recursive descent over

        poly   := [sign] term (sign term)*
        term   := coeff ['*' factor ('*' factor)*] | factor ('*' factor)*
        factor := ident ['_' nat] ['^' nat]
        coeff  := int ['/' int] | '(' tpoly ')' ['/' '(' tpoly ')']
        tpoly  := [sign] tterm (sign tterm)*
        tterm  := tatom ('*' tatom)*
        tatom  := int | ident ['^' nat]        # ident is t or a declared constant
    """

    def __init__(self, text: str, layout: JetLayout, constants: Sequence[str], offset: int = 0):
        self.tokens = _tokenize(text, offset)
        self.i = 0
        self.layout = layout
        self.constants: Dict[str, sp.Symbol] = {str(T): T}
        for name in constants:
            if name in layout.names:
                raise ValueError(f'constant {name!r} clashes with a jet variable')
            self.constants[name] = sp.Symbol(name)

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def accept(self, op: str) -> bool:
        if self.tok.kind == 'op' and self.tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str) -> None:
        if not self.accept(op):
            raise ParseError(f'expected {op!r}, found {self.describe()}', self.tok.position)

    def describe(self) -> str:
        return 'end of input' if self.tok.kind == 'end' else repr(self.tok.text)

    def nat(self) -> int:
        if self.tok.kind != 'num':
            raise ParseError(f'expected a natural number, found {self.describe()}', self.tok.position)
        return int(self.advance().text)

    def sign(self) -> Optional[int]:
        if self.accept('+'):
            return 1
        if self.accept('-'):
            return -1
        return None

    def poly(self) -> DiffPolynomial:
        terms: Dict[Exponent, RationalFunction] = {}
        sign = self.sign() or 1
        while True:
            exp, coeff = self.term()
            coeff = coeff if sign > 0 else -coeff
            terms[exp] = terms[exp] + coeff if exp in terms else coeff
            s = self.sign()
            if s is None:
                break
            sign = s
        if self.tok.kind != 'end':
            raise ParseError(f'unexpected {self.describe()}', self.tok.position)
        return DiffPolynomial(self.layout, terms)

    def term(self) -> Tuple[Exponent, RationalFunction]:
        exp = [0] * self.layout.s
        if self.tok.kind == 'num' or (self.tok.kind == 'op' and self.tok.text == '('):
            coeff = self.coeff()
            if not self.accept('*'):
                return tuple(exp), coeff
        elif self.tok.kind == 'ident':
            coeff = RationalFunction(1)
        else:
            raise ParseError(f'expected a term, found {self.describe()}', self.tok.position)
        self.factor(exp)
        while self.accept('*'):
            self.factor(exp)
        return tuple(exp), coeff

    def factor(self, exp: List[int]) -> None:
        tok = self.tok
        if tok.kind != 'ident':
            raise ParseError(f'expected a variable, found {self.describe()}', tok.position)
        name = tok.text
        if name in self.constants:
            raise ParseError(f'{name!r} may only appear inside a parenthesised coefficient', tok.position)
        if name not in self.layout.names:
            raise ParseError(f'unknown variable {name!r}', tok.position)
        self.advance()
        order = self.nat() if self.accept('_') else 0
        if order > self.layout.l:
            raise ParseError(f'jet order {order} of {name!r} exceeds layout order {self.layout.l}', tok.position)
        power = self.nat() if self.accept('^') else 1
        exp[self.layout.index(self.layout.variable_index(name), order)] += power

    def coeff(self) -> RationalFunction:
        if self.tok.kind == 'num':
            num = sp.Integer(self.nat())
            if self.accept('/'):
                den_tok = self.tok
                den = self.nat()
                if den == 0:
                    raise ParseError('zero denominator', den_tok.position)
                return RationalFunction(sp.Rational(num, den))
            return RationalFunction(num)
        self.expect('(')
        num_expr = self.tpoly()
        self.expect(')')
        if not self.accept('/'):
            return RationalFunction(num_expr)
        pos = self.tok.position
        self.expect('(')
        den_expr = self.tpoly()
        self.expect(')')
        if sp.expand(den_expr) == 0:
            raise ParseError('zero denominator', pos)
        return RationalFunction(num_expr / den_expr)

    def tpoly(self) -> sp.Expr:
        sign = self.sign() or 1
        total = sp.Integer(0)
        while True:
            total += sign * self.tterm()
            s = self.sign()
            if s is None:
                return total
            sign = s

    def tterm(self) -> sp.Expr:
        value = self.tatom()
        while self.accept('*'):
            value *= self.tatom()
        return value

    def tatom(self) -> sp.Expr:
        tok = self.tok
        if tok.kind == 'num':
            return sp.Integer(self.nat())
        if tok.kind != 'ident':
            raise ParseError(f'expected a coefficient term, found {self.describe()}', tok.position)
        if tok.text not in self.constants:
            raise ParseError(f'{tok.text!r} is neither {T!r} nor a declared constant', tok.position)
        self.advance()
        symbol = self.constants[tok.text]
        return symbol ** self.nat() if self.accept('^') else symbol


def parse_poly(text: str, layout: JetLayout, constants: Sequence[str] = ()) -> DiffPolynomial:
    """
    Parse a differential polynomial, `x_2` is the second derivative of `x`.

    ```py
    from diffbkk import JetLayout, parse_poly
    from diffbkk.rational import T

    p = parse_poly('(t^2+1)/(t-3)*x^2', JetLayout(1, 0))
    assert p.terms[(2,)] == (T**2 + 1) / (T - 3)
    ```
    """
    return _Parser(text, layout, constants).poly()


def _term_key(exp: Exponent) -> Tuple[int, Exponent]:
    return -sum(exp), tuple(-e for e in exp)


def format_poly(p: DiffPolynomial) -> str:
    """Text form of `p` in the same grammar `parse_poly` reads."""
    if p.is_zero:
        return '0'
    out = ''
    for exp in sorted(p.terms, key=_term_key):
        c = p.terms[exp]
        factors = []
        for idx, e in enumerate(exp):
            if e:
                name = p.layout.coordinate_name(idx)
                factors.append(name if e == 1 else f'{name}^{e}')
        if c.is_number:
            value = c.as_fraction()
            negative = value < 0
            magnitude = RationalFunction(abs(value))
            parts = factors if magnitude == 1 and factors else [magnitude.format()] + factors
        else:
            negative = False
            parts = [c.format()] + factors
        body = '*'.join(parts)
        if not out:
            out = f'-{body}' if negative else body
        else:
            out += f' - {body}' if negative else f' + {body}'
    return out


class PolySystem(NamedTuple):
    layout: JetLayout
    polys: List[DiffPolynomial]
    constants: Tuple[str, ...]


def _names(raw: str) -> Tuple[str, ...]:
    return tuple(n.strip() for n in raw.split(',') if n.strip())


def parse_system(text: str) -> PolySystem:
    """
    Parse a system file: a header line `vars: x, y; order: 3;` optionally followed by `consts: c5, c6;`,
    then one polynomial per line. Lines starting with `#` are comments.
    """
    header: Optional[re.Match[str]] = None
    layout: Optional[JetLayout] = None
    constants: Tuple[str, ...] = ()
    polys = []
    offset = 0
    for line in text.splitlines(keepends=True):
        start = offset
        offset += len(line)
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        if header is None:
            header = _HEADER_RE.match(stripped)
            if header is None:
                raise ParseError('expected a header "vars: <names>; order: <l>;"', start)
            constants = _names(header.group('consts') or '')
            names = _names(header.group('vars'))
            try:
                layout = JetLayout(len(names), int(header.group('order')), names)
            except ValueError as e:
                raise ParseError(str(e), start) from e
            continue
        assert layout is not None
        polys.append(_Parser(line.rstrip('\r\n'), layout, constants, offset=start).poly())
    if layout is None:
        raise ParseError('missing header', 0)
    return PolySystem(layout, polys, constants)


def format_system(layout: JetLayout, polys: Iterable[DiffPolynomial], constants: Sequence[str] = ()) -> str:
    header = f'vars: {", ".join(layout.names)}; order: {layout.l};'
    if constants:
        header += f' consts: {", ".join(constants)};'
    return '\n'.join([header] + [format_poly(p) for p in polys]) + '\n'
