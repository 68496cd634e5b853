"""Parfactor models: logvars, parameterized randvars, potential tables,
grounding, and the exact joint distribution they induce.

A parfactor couples an ordered tuple of Boolean parameterized randvars (PRVs)
with a strictly positive potential table over all value combinations and a
constraint on its logical variables.  A set of parfactors plus logvar
declarations forms a model; the product of all groundings, normalized, is the
model's joint distribution.

Canonical row order is fixed everywhere: arguments left to right, the last
argument varying fastest, values ordered (0, 1).  Row ``i`` of a table over
``n`` arguments therefore holds the potential of the assignment given by the
``n``-bit binary expansion of ``i``, most significant bit first.

Text format (line oriented, ``#`` comments)::

    domain X = {alice, bob}
    prv smokes(X)
    parfactor social (friends(X, Y), smokes(X), smokes(Y)) [| (X, Y) in {...}]
    0 0 0  1.0
    ...          # exactly 2^n potential rows, canonical order

Round trip is bit exact: ``parse_model(serialize_model(m))`` equals ``m``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

import numpy as np

from .errors import ModelError, ParseError, TooLargeError

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_CONST_RE = re.compile(r"[A-Za-z0-9_]+\Z")


def _check_ident(name: str, what: str) -> None:
    if not _IDENT_RE.match(name):
        raise ModelError(f"invalid {what} identifier: {name!r}")


@dataclass(frozen=True)
class Logvar:
    """A logical variable over a finite constant domain (kept sorted)."""

    name: str
    domain: tuple[str, ...]

    def __post_init__(self) -> None:
        _check_ident(self.name, "logvar")
        domain = tuple(self.domain)
        if not domain:
            raise ModelError(f"logvar {self.name}: domain is empty")
        if len(set(domain)) != len(domain):
            raise ModelError(f"logvar {self.name}: duplicate constants in domain")
        for c in domain:
            if not _CONST_RE.match(c):
                raise ModelError(f"logvar {self.name}: invalid constant {c!r}")
        # constants are case-sensitive; lexicographic order fixes determinism
        object.__setattr__(self, "domain", tuple(sorted(domain)))


@dataclass(frozen=True)
class PRV:
    """A Boolean parameterized randvar: a name applied to zero or more logvars.

    The range is always {0, 1}; with no parameters the PRV is a plain
    propositional randvar.
    """

    name: str
    params: tuple[Logvar, ...] = ()

    def __post_init__(self) -> None:
        _check_ident(self.name, "randvar")
        object.__setattr__(self, "params", tuple(self.params))

    @property
    def arity(self) -> int:
        return len(self.params)

    def signature(self) -> tuple[tuple[str, ...], ...]:
        """Positional domains; two PRVs of one name must agree on this."""
        return tuple(lv.domain for lv in self.params)

    def __str__(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}({', '.join(lv.name for lv in self.params)})"


@dataclass(frozen=True)
class Constraint:
    """Allowed bindings of a logvar tuple.

    ``tuples is None`` means TOP: the full cross product of the domains.
    An explicit set may be empty, in which case the parfactor has no
    groundings.
    """

    logvars: tuple[Logvar, ...]
    tuples: frozenset[tuple[str, ...]] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "logvars", tuple(self.logvars))
        if self.tuples is None:
            return
        tuples = frozenset(tuple(t) for t in self.tuples)
        if not self.logvars:
            raise ModelError("explicit constraint needs at least one logvar")
        for t in tuples:
            if len(t) != len(self.logvars):
                raise ModelError(
                    f"constraint tuple {t} has arity {len(t)}, expected {len(self.logvars)}"
                )
            for c, lv in zip(t, self.logvars):
                if c not in lv.domain:
                    raise ModelError(f"constant {c!r} not in domain of logvar {lv.name}")
        object.__setattr__(self, "tuples", tuples)

    @property
    def is_top(self) -> bool:
        return self.tuples is None

    def bindings(self) -> list[tuple[str, ...]]:
        """All allowed logvar bindings, in sorted order."""
        if self.tuples is None:
            return list(itertools.product(*(lv.domain for lv in self.logvars)))
        return sorted(self.tuples)


@dataclass(frozen=True)
class Parfactor:
    """A potential table over a tuple of Boolean PRVs under a constraint."""

    name: str
    args: tuple[PRV, ...]
    potentials: tuple[float, ...]
    constraint: Constraint | None = None

    def __post_init__(self) -> None:
        _check_ident(self.name, "parfactor")
        args = tuple(self.args)
        object.__setattr__(self, "args", args)
        potentials = tuple(float(p) for p in self.potentials)
        if len(potentials) != 1 << len(args):
            raise ModelError(
                f"parfactor {self.name}: expected {1 << len(args)} potentials "
                f"for {len(args)} arguments, got {len(potentials)}"
            )
        for p in potentials:
            if not (p > 0.0) or p != p or p == float("inf"):
                raise ModelError(
                    f"parfactor {self.name}: potentials must be strictly positive "
                    f"finite reals, got {p!r}"
                )
        object.__setattr__(self, "potentials", potentials)
        own = self.logvars()
        if self.constraint is None:
            object.__setattr__(self, "constraint", Constraint(own))
        elif set(self.constraint.logvars) != set(own):
            raise ModelError(
                f"parfactor {self.name}: constraint logvars "
                f"{[lv.name for lv in self.constraint.logvars]} do not match "
                f"argument logvars {[lv.name for lv in own]}"
            )

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def size(self) -> int:
        return len(self.potentials)

    def logvars(self) -> tuple[Logvar, ...]:
        """Logvars of the arguments, in first-occurrence order."""
        seen: list[Logvar] = []
        for prv in self.args:
            for lv in prv.params:
                if lv not in seen:
                    seen.append(lv)
        return tuple(seen)

    def row_assignment(self, i: int) -> tuple[int, ...]:
        n = self.arity
        return tuple((i >> (n - 1 - j)) & 1 for j in range(n))

    def with_potentials(self, potentials) -> Parfactor:
        return Parfactor(self.name, self.args, tuple(potentials), self.constraint)


def enumerate_rows(parfactor: Parfactor) -> list[tuple[tuple[int, ...], float]]:
    """All (assignment, potential) rows of a parfactor in canonical order."""
    return [
        (parfactor.row_assignment(i), parfactor.potentials[i])
        for i in range(parfactor.size)
    ]


@dataclass(frozen=True, order=True)
class GroundAtom:
    """A ground randvar: a randvar name applied to constants."""

    name: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({','.join(self.args)})"


@dataclass(frozen=True)
class GroundFactor:
    """One grounding of a parfactor; shares the parent's potential table."""

    atoms: tuple[GroundAtom, ...]
    potentials: tuple[float, ...]


@dataclass(frozen=True)
class ParfactorModel:
    """Declared logvars plus a set of parfactors."""

    logvars: tuple[Logvar, ...]
    parfactors: tuple[Parfactor, ...]

    def __post_init__(self) -> None:
        logvars = tuple(sorted(self.logvars, key=lambda lv: lv.name))
        if len({lv.name for lv in logvars}) != len(logvars):
            raise ModelError("duplicate logvar declarations")
        object.__setattr__(self, "logvars", logvars)
        object.__setattr__(self, "parfactors", tuple(self.parfactors))
        declared = {lv.name: lv for lv in logvars}
        signatures: dict[str, tuple] = {}
        names = set()
        for pf in self.parfactors:
            if pf.name in names:
                raise ModelError(f"duplicate parfactor name {pf.name!r}")
            names.add(pf.name)
            for prv in pf.args:
                for lv in prv.params:
                    if declared.get(lv.name) != lv:
                        raise ModelError(
                            f"parfactor {pf.name}: logvar {lv.name} is not declared"
                        )
                sig = prv.signature()
                if signatures.setdefault(prv.name, sig) != sig:
                    raise ModelError(
                        f"randvar {prv.name} used with conflicting parameter signatures"
                    )

    def prv_signatures(self) -> dict[str, PRV]:
        """One representative PRV per randvar name, in first-occurrence order."""
        reps: dict[str, PRV] = {}
        for pf in self.parfactors:
            for prv in pf.args:
                reps.setdefault(prv.name, prv)
        return reps

    def with_tables(self, tables) -> ParfactorModel:
        """Same structure with every potential table replaced."""
        if len(tables) != len(self.parfactors):
            raise ModelError("table count does not match parfactor count")
        return ParfactorModel(
            self.logvars,
            tuple(pf.with_potentials(t) for pf, t in zip(self.parfactors, tables)),
        )


def ground(model: ParfactorModel) -> tuple[GroundFactor, ...]:
    """All ground factors of a model, one per parfactor per constraint binding.

    Deterministic: parfactors in model order, bindings in sorted constant
    order.
    """
    factors: list[GroundFactor] = []
    for pf in model.parfactors:
        lv_names = [lv.name for lv in pf.constraint.logvars]
        for binding in pf.constraint.bindings():
            env = dict(zip(lv_names, binding))
            atoms = tuple(
                GroundAtom(prv.name, tuple(env[lv.name] for lv in prv.params))
                for prv in pf.args
            )
            factors.append(GroundFactor(atoms, pf.potentials))
    return tuple(factors)


@dataclass(frozen=True, eq=False)
class JointTable:
    """Exact distribution over ground randvars.

    ``probs[w]`` is the probability of world ``w``; bit ``m - 1 - k`` of ``w``
    is the value of ``atoms[k]`` where ``m = len(atoms)``.
    """

    atoms: tuple[GroundAtom, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        self.probs.setflags(write=False)

    def _mask(self, event: dict[GroundAtom, int]) -> np.ndarray:
        m = len(self.atoms)
        pos = {a: k for k, a in enumerate(self.atoms)}
        mask = np.ones(len(self.probs), dtype=bool)
        world = np.arange(len(self.probs), dtype=np.int64)
        for atom, value in event.items():
            if atom not in pos:
                raise ModelError(f"unknown ground randvar {atom}")
            mask &= ((world >> (m - 1 - pos[atom])) & 1) == value
        return mask

    def prob(self, event: dict[GroundAtom, int]) -> float:
        """Probability of the given (possibly partial) event."""
        return float(self.probs[self._mask(event)].sum())

    def marginal(
        self,
        event: dict[GroundAtom, int],
        given: dict[GroundAtom, int] | None = None,
    ) -> float:
        """P(event | given); errors if the conditioning event has mass zero."""
        if not given:
            return self.prob(event)
        denom = self.prob(given)
        if denom <= 0.0:
            raise ModelError("conditioning event has probability zero")
        return self.prob({**event, **given}) / denom

    def allclose(self, other: JointTable, atol: float = 1e-9) -> bool:
        return self.atoms == other.atoms and bool(
            np.allclose(self.probs, other.probs, rtol=0.0, atol=atol)
        )


def joint_distribution(model: ParfactorModel, cap: int = 20) -> JointTable:
    """Brute-force joint distribution over all ground randvars.

    This is the exact-enumeration oracle, not the production inference path;
    it refuses models with more than ``cap`` ground randvars.
    """
    factors = ground(model)
    atoms = sorted({a for f in factors for a in f.atoms})
    m = len(atoms)
    if m > cap:
        raise TooLargeError(
            f"model has {m} ground randvars, too large for exact enumeration (cap {cap})"
        )
    pos = {a: k for k, a in enumerate(atoms)}
    size = 1 << m
    world = np.arange(size, dtype=np.int64)
    weights = np.ones(size, dtype=np.float64)
    for f in factors:
        idx = np.zeros(size, dtype=np.int64)
        for atom in f.atoms:
            bit = (world >> (m - 1 - pos[atom])) & 1
            idx = (idx << 1) | bit
        weights = weights * np.asarray(f.potentials, dtype=np.float64)[idx]
    z = float(weights.sum())
    if not np.isfinite(z) or z <= 0.0:
        raise ModelError("joint distribution normalizer is not positive and finite")
    return JointTable(tuple(atoms), weights / z)


# ---------------------------------------------------------------------------
# text format


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


_DOMAIN_RE = re.compile(r"domain\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*\{([^}]*)\}\s*\Z")
_PRV_RE = re.compile(r"prv\s+([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(([^)]*)\))?\s*\Z")
_PARFACTOR_RE = re.compile(r"parfactor\s+([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*\Z")
_CONSTRAINT_RE = re.compile(r"\(([^)]*)\)\s+in\s+\{(.*)\}\s*\Z")
_APPLICATION_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(([^)]*)\))?\s*\Z")


def _split_names(text: str) -> list[str]:
    text = text.strip()
    if not text:
        return []
    return [part.strip() for part in text.split(",")]


def _split_top_level(text: str) -> list[str]:
    """Split on commas that are not inside parentheses."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i].strip())
            start = i + 1
    tail = text[start:].strip()
    if tail:
        parts.append(tail)
    return parts


class _Lines:
    def __init__(self, text: str):
        self.items = [
            (no, stripped)
            for no, raw in enumerate(text.splitlines(), 1)
            if (stripped := _strip_comment(raw).strip())
        ]
        self.pos = 0

    def peek(self):
        return self.items[self.pos] if self.pos < len(self.items) else None

    def next(self):
        item = self.peek()
        if item is not None:
            self.pos += 1
        return item


def parse_model(text: str) -> ParfactorModel:
    """Parse the line-oriented model format; errors carry line numbers."""
    logvars: dict[str, Logvar] = {}
    declarations: dict[str, PRV] = {}
    parfactors: list[Parfactor] = []
    lines = _Lines(text)

    def fail(no: int, message: str):
        raise ParseError(f"line {no}: {message}")

    def resolve_logvar(no: int, name: str) -> Logvar:
        if name not in logvars:
            fail(no, f"logvar {name!r} is not declared")
        return logvars[name]

    def parse_application(no: int, token: str) -> PRV:
        m = _APPLICATION_RE.match(token)
        if not m:
            fail(no, f"malformed randvar application {token!r}")
        name, params_text = m.group(1), m.group(2) or ""
        params = tuple(resolve_logvar(no, p) for p in _split_names(params_text))
        prv = PRV(name, params)
        if name not in declarations:
            fail(no, f"randvar {name!r} is not declared")
        if declarations[name].signature() != prv.signature():
            fail(no, f"randvar {name!r} used with a different signature than declared")
        return prv

    while (item := lines.next()) is not None:
        no, line = item
        if line.startswith("domain"):
            m = _DOMAIN_RE.match(line)
            if not m:
                fail(no, "malformed domain declaration")
            name, consts = m.group(1), _split_names(m.group(2))
            if name in logvars:
                fail(no, f"logvar {name!r} declared twice")
            try:
                logvars[name] = Logvar(name, tuple(consts))
            except ModelError as e:
                fail(no, str(e))
        elif line.startswith("prv"):
            m = _PRV_RE.match(line)
            if not m:
                fail(no, "malformed prv declaration")
            name, params_text = m.group(1), m.group(2) or ""
            if name in declarations:
                fail(no, f"randvar {name!r} declared twice")
            params = tuple(resolve_logvar(no, p) for p in _split_names(params_text))
            declarations[name] = PRV(name, params)
        elif line.startswith("parfactor"):
            head, _, constraint_text = (part.strip() for part in line.partition("|"))
            m = _PARFACTOR_RE.match(head)
            if not m:
                fail(no, "malformed parfactor header")
            pf_name, args_text = m.group(1), m.group(2)
            args = tuple(parse_application(no, t) for t in _split_top_level(args_text))
            if not args and not args_text.strip():
                args = ()
            constraint = None
            if constraint_text:
                cm = _CONSTRAINT_RE.match(constraint_text)
                if not cm:
                    fail(no, "malformed constraint (expected '(X, ...) in {(...), ...}')")
                cvars = tuple(resolve_logvar(no, v) for v in _split_names(cm.group(1)))
                tuples = frozenset(
                    tuple(_split_names(t)) for t in re.findall(r"\(([^)]*)\)", cm.group(2))
                )
                try:
                    constraint = Constraint(cvars, tuples)
                except ModelError as e:
                    fail(no, str(e))
            rows = 1 << len(args)
            potentials = []
            for i in range(rows):
                row_item = lines.next()
                if row_item is None:
                    fail(no, f"parfactor {pf_name}: expected {rows} potential rows")
                row_no, row_line = row_item
                tokens = row_line.split()
                if len(tokens) != len(args) + 1:
                    fail(row_no, f"expected {len(args)} values and one potential")
                bits = tokens[: len(args)]
                expected = tuple((i >> (len(args) - 1 - j)) & 1 for j in range(len(args)))
                if tuple(bits) != tuple(str(b) for b in expected):
                    fail(
                        row_no,
                        f"row out of canonical order: got {' '.join(bits)}, "
                        f"expected {' '.join(str(b) for b in expected)}",
                    )
                try:
                    potentials.append(float(tokens[-1]))
                except ValueError:
                    fail(row_no, f"bad potential value {tokens[-1]!r}")
            try:
                parfactors.append(Parfactor(pf_name, args, tuple(potentials), constraint))
            except ModelError as e:
                fail(no, str(e))
        else:
            fail(no, f"unrecognized directive: {line.split()[0]!r}")

    try:
        return ParfactorModel(tuple(logvars.values()), tuple(parfactors))
    except ModelError as e:
        raise ParseError(str(e)) from e


def serialize_model(model: ParfactorModel) -> str:
    """Render a model in the text format; bit-exact round trip."""
    out: list[str] = []
    for lv in model.logvars:
        out.append(f"domain {lv.name} = {{{', '.join(lv.domain)}}}")
    reps = model.prv_signatures()
    for name in sorted(reps):
        out.append(f"prv {reps[name]}")
    for pf in model.parfactors:
        args = ", ".join(str(prv) for prv in pf.args)
        header = f"parfactor {pf.name} ({args})"
        if not pf.constraint.is_top:
            names = ", ".join(lv.name for lv in pf.constraint.logvars)
            tuples = ", ".join(f"({', '.join(t)})" for t in sorted(pf.constraint.tuples))
            header += f" | ({names}) in {{{tuples}}}"
        out.append(header)
        for bits, p in enumerate_rows(pf):
            prefix = " ".join(str(b) for b in bits)
            out.append(f"{prefix}  {p!r}" if prefix else f"{p!r}")
    return "\n".join(out) + "\n"


def load_model(path) -> ParfactorModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())
