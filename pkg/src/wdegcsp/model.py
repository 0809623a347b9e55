"""Problem representation, the text instance format, and random instances."""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class CspError(ValueError):
    """Raised when a problem definition violates a structural invariant."""


class ParseError(CspError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ParameterError(ValueError):
    """Raised for infeasible random-generator parameters."""


@dataclass(frozen=True)
class VariableDecl:
    id: str
    domain: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(int(v) for v in self.domain))
        if not self.domain:
            raise CspError(f"variable {self.id} has an empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise CspError(f"variable {self.id} has duplicate domain values")


@dataclass(frozen=True)
class ConstraintDecl:
    id: str
    scope: tuple[str, ...]
    # kept sorted so that equality and serialization are canonical
    relation: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(self.scope))
        rel = [tuple(int(v) for v in t) for t in self.relation]
        if len(set(rel)) != len(rel):
            raise CspError(f"constraint {self.id} has duplicate tuples")
        object.__setattr__(self, "relation", tuple(sorted(rel)))

    @property
    def arity(self) -> int:
        return len(self.scope)


@dataclass(frozen=True)
class Csp:
    name: str
    variables: tuple[VariableDecl, ...]
    constraints: tuple[ConstraintDecl, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        domains: dict[str, set[int]] = {}
        for var in self.variables:
            if var.id in domains:
                raise CspError(f"duplicate variable {var.id}")
            domains[var.id] = set(var.domain)
        seen: set[str] = set()
        for con in self.constraints:
            if con.id in seen:
                raise CspError(f"duplicate constraint {con.id}")
            seen.add(con.id)
            for x in con.scope:
                if x not in domains:
                    raise CspError(f"unknown variable {x} in constraint {con.id}")
            if len(set(con.scope)) != len(con.scope):
                raise CspError(f"repeated variable in scope of constraint {con.id}")
            for t in con.relation:
                if len(t) != len(con.scope):
                    raise CspError(
                        f"arity mismatch in constraint {con.id}: scope length "
                        f"{len(con.scope)}, tuple length {len(t)}"
                    )
                for x, v in zip(con.scope, t):
                    if v not in domains[x]:
                        raise CspError(
                            f"value {v} outside the domain of {x} in constraint {con.id}"
                        )

    @classmethod
    def build(
        cls,
        name: str,
        domains: Mapping[str, Iterable[int]],
        constraints: Iterable[tuple[str, Sequence[str], Iterable[Sequence[int]]]] = (),
    ) -> "Csp":
        """Convenience constructor: ``Csp.build("t", {"x": [0, 1]}, [("c0", ["x"], [(0,)])])``."""
        return cls(
            name,
            tuple(VariableDecl(x, tuple(d)) for x, d in domains.items()),
            tuple(ConstraintDecl(c, tuple(s), tuple(tuple(t) for t in r)) for c, s, r in constraints),
        )

    @property
    def variable_ids(self) -> list[str]:
        return [v.id for v in self.variables]

    def domain(self, x: str) -> tuple[int, ...]:
        for var in self.variables:
            if var.id == x:
                return var.domain
        raise KeyError(x)

    def search_space_size(self) -> int:
        return math.prod(len(v.domain) for v in self.variables)


def is_solution(csp: Csp, assignment: Mapping[str, int]) -> bool:
    """True iff the total assignment satisfies every constraint."""
    missing = [x for x in csp.variable_ids if x not in assignment]
    if missing:
        raise ValueError(f"assignment is not total, missing {missing}")
    for var in csp.variables:
        if assignment[var.id] not in var.domain:
            return False
    for con in csp.constraints:
        if tuple(assignment[x] for x in con.scope) not in set(con.relation):
            return False
    return True


# -- text format ---------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|:|[^\s():]+")


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]


def _int(tok: str, lineno: int, col: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", lineno, col) from None


def _ident(tok: str, lineno: int, col: int) -> str:
    if tok in ("(", ")", ":"):
        raise ParseError(f"expected an identifier, got {tok!r}", lineno, col)
    return tok


def parse_instance(text: str) -> Csp:
    """Parse the line-oriented instance format.

    ::

        csp <name>
        var <id> : <int> <int> ...
        con <id> : <varid> ... : (<int> ...) (<int> ...) ...
    """
    name = None
    variables: list[VariableDecl] = []
    domains: dict[str, set[int]] = {}
    constraints: list[ConstraintDecl] = []
    con_ids: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        toks = _tokens(raw)
        head, col = toks[0]

        if name is None and head != "csp":
            # a missing header is tolerated; the name defaults to "csp"
            name = "csp"

        if head == "csp":
            if name is not None:
                raise ParseError("duplicate csp header", lineno, col)
            if len(toks) != 2:
                raise ParseError("expected 'csp <name>'", lineno, col)
            name = _ident(toks[1][0], lineno, toks[1][1])

        elif head == "var":
            if constraints:
                raise ParseError("variables must precede constraints", lineno, col)
            if len(toks) < 4 or toks[2][0] != ":":
                raise ParseError("expected 'var <id> : <values>'", lineno, col)
            vid = _ident(toks[1][0], lineno, toks[1][1])
            if vid in domains:
                raise ParseError(f"duplicate variable {vid}", lineno, toks[1][1])
            values = []
            for tok, c in toks[3:]:
                v = _int(tok, lineno, c)
                if v in values:
                    raise ParseError(f"duplicate value {v} in domain of {vid}", lineno, c)
                values.append(v)
            domains[vid] = set(values)
            variables.append(VariableDecl(vid, tuple(values)))

        elif head == "con":
            if len(toks) < 4 or toks[2][0] != ":":
                raise ParseError("expected 'con <id> : <scope> : <tuples>'", lineno, col)
            cid = _ident(toks[1][0], lineno, toks[1][1])
            if cid in con_ids:
                raise ParseError(f"duplicate constraint {cid}", lineno, toks[1][1])
            i = 3
            scope: list[str] = []
            while i < len(toks) and toks[i][0] != ":":
                tok, c = toks[i]
                x = _ident(tok, lineno, c)
                if x not in domains:
                    raise ParseError(f"unknown variable {x}", lineno, c)
                if x in scope:
                    raise ParseError(f"variable {x} repeated in scope", lineno, c)
                scope.append(x)
                i += 1
            if i == len(toks):
                raise ParseError("missing ':' before the relation", lineno, len(raw) + 1)
            if not scope:
                raise ParseError("empty scope", lineno, toks[i][1])
            i += 1
            relation: list[tuple[int, ...]] = []
            seen: set[tuple[int, ...]] = set()
            while i < len(toks):
                tok, c = toks[i]
                if tok != "(":
                    raise ParseError(f"expected '(', got {tok!r}", lineno, c)
                start = c
                i += 1
                values = []
                while i < len(toks) and toks[i][0] != ")":
                    values.append((_int(toks[i][0], lineno, toks[i][1]), toks[i][1]))
                    i += 1
                if i == len(toks):
                    raise ParseError("unterminated tuple", lineno, start)
                i += 1
                if len(values) != len(scope):
                    raise ParseError(
                        f"arity mismatch: scope length {len(scope)}, tuple length {len(values)}",
                        lineno,
                        start,
                    )
                for x, (v, vc) in zip(scope, values):
                    if v not in domains[x]:
                        raise ParseError(f"value {v} outside the domain of {x}", lineno, vc)
                t = tuple(v for v, _ in values)
                if t in seen:
                    raise ParseError(f"duplicate tuple {t}", lineno, start)
                seen.add(t)
                relation.append(t)
            con_ids.add(cid)
            constraints.append(ConstraintDecl(cid, tuple(scope), tuple(relation)))

        else:
            raise ParseError(f"unknown directive {head!r}", lineno, col)

    if name is None:
        name = "csp"
    return Csp(name, tuple(variables), tuple(constraints))


def serialize_instance(csp: Csp) -> str:
    lines = [f"csp {csp.name}"]
    for var in csp.variables:
        lines.append(f"var {var.id} : " + " ".join(map(str, var.domain)))
    for con in csp.constraints:
        tuples = " ".join("(" + " ".join(map(str, t)) + ")" for t in con.relation)
        lines.append(f"con {con.id} : {' '.join(con.scope)} : {tuples}".rstrip())
    return "\n".join(lines) + "\n"


def load_instance(path) -> Csp:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


# -- random instances ----------------------------------------------------


def relation_size(d: int, k: int, t: float) -> int:
    """Number of tuples kept: round-half-up of (1 - t) * d**k."""
    return int(math.floor((1.0 - t) * d**k + 0.5))


def generate_random(n: int, d: int, k: int, m: int, t: float, seed: int) -> Csp:
    """Model-B style random instance.

    Scopes are distinct k-subsets of the variables (listed in increasing
    variable order); each relation holds exactly ``relation_size(d, k, t)``
    tuples sampled without replacement. The generator is Python's
    Mersenne Twister seeded with ``seed``, so output is a pure function of
    the arguments.
    """
    if not (n >= k >= 1):
        raise ParameterError(f"need n >= k >= 1, got n={n}, k={k}")
    if d < 1 or m < 0:
        raise ParameterError(f"need d >= 1 and m >= 0, got d={d}, m={m}")
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"tightness must lie in [0, 1], got {t}")
    n_scopes = math.comb(n, k)
    if m > n_scopes:
        raise ParameterError(f"{m} constraints requested but only {n_scopes} distinct scopes exist")

    rng = random.Random(seed)
    if n_scopes <= 4 * m or n_scopes <= 10_000:
        scopes = rng.sample(list(itertools.combinations(range(n), k)), m)
    else:
        chosen: set[tuple[int, ...]] = set()
        scopes = []
        while len(scopes) < m:
            s = tuple(sorted(rng.sample(range(n), k)))
            if s not in chosen:
                chosen.add(s)
                scopes.append(s)

    size = relation_size(d, k, t)
    width = len(str(n - 1))
    names = [f"x{i:0{width}d}" for i in range(n)]
    variables = tuple(VariableDecl(x, tuple(range(d))) for x in names)
    constraints = []
    for j, scope in enumerate(scopes):
        codes = rng.sample(range(d**k), size)
        rel = []
        for code in codes:
            digits = []
            for _ in range(k):
                code, r = divmod(code, d)
                digits.append(r)
            rel.append(tuple(reversed(digits)))
        constraints.append(ConstraintDecl(f"c{j}", tuple(names[i] for i in scope), tuple(rel)))
    tname = f"{t:g}".replace(".", "p")
    return Csp(f"rand-{n}-{d}-{k}-{m}-{tname}-{seed}", variables, tuple(constraints))
