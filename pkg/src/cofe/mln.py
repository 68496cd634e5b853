"""Weighted first-order formula models (MLNs): construction from parfactor
models, exact joint semantics, and text serialization.

An MLN is a list of (weight, formula) pairs over named atoms whose logvars are
implicitly universally quantified.  A world's probability is proportional to
``exp(sum_i w_i * n_i)`` where ``n_i`` counts the true groundings of formula
``i`` in that world.

Text format (``//`` comments, UTF-8)::

    domain X = {alice, bob}
    0.0  !friends(X,Y) v !smokes(X) v !smokes(Y)
    2.0001277349601105  friends(X,Y) ^ smokes(X) ^ smokes(Y)

One formula per line, weight first; ``^`` is AND, ``v`` is OR, ``!`` is NOT,
``true`` is the tautology.  Multi-literal conjuncts of a disjunction are
parenthesized.  Weights round-trip bit exactly.

A tautology or an atom that occurs in no implicant has no literal to appear
in; serialization therefore drops such vacuous atom slots (``true`` keeps no
atoms at all).  Parsing text back yields the equivalent normalized formula, so
``parse_mln(serialize_mln(m)) == m`` whenever every formula of ``m`` mentions
each of its atoms; the pipeline keeps full atom tuples in memory, where the
joint semantics needs them.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

import numpy as np

from .errors import ModelError, ParseError, TooLargeError
from .logic import BoolFormula, bucket_by_weight, minimize
from .model import GroundAtom, JointTable, Logvar, ParfactorModel, Parfactor, PRV, enumerate_rows
from .reduction import (
    CLUSTER,
    QUANTILE,
    ReductionParams,
    ReductionResult,
    identity_reduction,
    select_reduction,
)

STRATEGIES = ("auto", "quantile", "cluster", "none")


@dataclass(frozen=True)
class Atom:
    """A predicate applied to logvar names, e.g. ``smokes(X)``."""

    pred: str
    args: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(self.args)})"


@dataclass(frozen=True)
class MLNFormula:
    """A Boolean formula over positional atoms together with its weight."""

    weight: float
    atoms: tuple[Atom, ...]
    formula: BoolFormula

    def __post_init__(self) -> None:
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if self.formula.arity != len(self.atoms):
            raise ModelError(
                f"formula arity {self.formula.arity} does not match "
                f"{len(self.atoms)} atoms"
            )

    def logvar_names(self) -> tuple[str, ...]:
        """Logvars of the formula's atoms, in first-occurrence order."""
        seen: list[str] = []
        for atom in self.atoms:
            for name in atom.args:
                if name not in seen:
                    seen.append(name)
        return tuple(seen)

    def render(self) -> str:
        parts: list[str] = []
        for implicant in self.formula.implicants:
            literals = [
                f"{self.atoms[j]}" if b == 1 else f"!{self.atoms[j]}"
                for j, b in enumerate(implicant)
                if b is not None
            ]
            if not literals:
                return "true"
            text = " ^ ".join(literals)
            if len(literals) > 1 and len(self.formula.implicants) > 1:
                text = f"({text})"
            parts.append(text)
        return " v ".join(parts)


@dataclass(frozen=True)
class MLN:
    """Logvar declarations plus an ordered list of weighted formulas."""

    logvars: tuple[Logvar, ...]
    formulas: tuple[MLNFormula, ...]

    def __post_init__(self) -> None:
        logvars = tuple(sorted(self.logvars, key=lambda lv: lv.name))
        if len({lv.name for lv in logvars}) != len(logvars):
            raise ModelError("duplicate logvar declarations")
        object.__setattr__(self, "logvars", logvars)
        object.__setattr__(self, "formulas", tuple(self.formulas))
        declared = {lv.name for lv in logvars}
        arities: dict[str, int] = {}
        for f in self.formulas:
            for atom in f.atoms:
                if arities.setdefault(atom.pred, len(atom.args)) != len(atom.args):
                    raise ModelError(f"atom {atom.pred} used with conflicting arities")
                for name in atom.args:
                    if name not in declared:
                        raise ModelError(f"atom {atom} references undeclared logvar {name}")


def cofe(
    model: ParfactorModel,
    params: ReductionParams,
    strategy: str = "auto",
    drop_zero_weight: bool = False,
) -> tuple[MLN, list[ReductionResult]]:
    """Reduce, extract and minimize every parfactor of a model into an MLN.

    Per parfactor: pick a reduction within the budget, turn each mapped table
    row into a weighted minterm, bucket rows by mapped potential and minimize
    each bucket into one formula.  Formulas keep parfactor order, ascending
    weight within a parfactor.  Returns the MLN together with the chosen
    per-parfactor reductions.

    ``strategy`` restricts reduction to one strategy ("none" skips it); the
    budget guarantee holds for all of them.  ``drop_zero_weight`` removes
    formulas with exact weight 0, which never change the distribution.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    lowered: dict[str, str] = {}
    for name in model.prv_signatures():
        if lowered.setdefault(name.lower(), name) != name:
            raise ModelError(
                f"randvar names {lowered[name.lower()]!r} and {name!r} collide "
                "after lowercasing"
            )
    for pf in model.parfactors:
        if not pf.constraint.is_top:
            raise ModelError(
                f"parfactor {pf.name}: formula extraction supports only "
                "unconstrained (TOP) parfactors"
            )
    results: list[ReductionResult] = []
    formulas: list[MLNFormula] = []
    referenced: set[str] = set()
    for pf in model.parfactors:
        if strategy == "none":
            result = identity_reduction(pf)
        elif strategy == "auto":
            result = select_reduction(pf, params)
        else:
            result = select_reduction(pf, params, strategies=(strategy,))
        results.append(result)
        atoms = tuple(
            Atom(prv.name.lower(), tuple(lv.name for lv in prv.params))
            for prv in pf.args
        )
        if len(set(atoms)) != len(atoms):
            # repeated applications only ever read the diagonal of the table;
            # their extracted formulas would be unwritable contradictions
            raise ModelError(
                f"parfactor {pf.name}: duplicate argument atoms; formula "
                "extraction needs distinct applications"
            )
        referenced.update(lv.name for prv in pf.args for lv in prv.params)
        rows = [
            (bits, result.mapped[i])
            for i, (bits, _) in enumerate(enumerate_rows(pf))
        ]
        for bucket in bucket_by_weight(rows):
            if drop_zero_weight and bucket.weight == 0.0:
                continue
            formulas.append(MLNFormula(bucket.weight, atoms, minimize(bucket)))
    logvars = tuple(lv for lv in model.logvars if lv.name in referenced)
    return MLN(logvars, tuple(formulas)), results


def mln_joint(
    mln: MLN,
    domains: dict[str, tuple[str, ...]] | None = None,
    cap: int = 20,
) -> JointTable:
    """Exact joint distribution of an MLN over all groundings of its atoms.

    ``domains`` overrides declared logvar domains by name.  Worlds are
    weighted by ``exp(sum_i w_i * n_i)`` and normalized; the ground randvar
    count must not exceed ``cap``.
    """
    doms = {lv.name: lv.domain for lv in mln.logvars}
    if domains:
        for name, consts in domains.items():
            doms[name] = tuple(sorted(consts))
    ground_atoms: set[GroundAtom] = set()
    groundings: list[tuple[float, BoolFormula, list[tuple[GroundAtom, ...]]]] = []
    for f in mln.formulas:
        names = f.logvar_names()
        for name in names:
            if name not in doms:
                raise ModelError(f"no domain for logvar {name}")
        subs = []
        for combo in itertools.product(*(doms[name] for name in names)):
            env = dict(zip(names, combo))
            ga = tuple(
                GroundAtom(atom.pred, tuple(env[a] for a in atom.args))
                for atom in f.atoms
            )
            ground_atoms.update(ga)
            subs.append(ga)
        groundings.append((f.weight, f.formula, subs))
    atoms = tuple(sorted(ground_atoms))
    m = len(atoms)
    if m > cap:
        raise TooLargeError(
            f"MLN has {m} ground randvars, too large for exact enumeration (cap {cap})"
        )
    pos = {a: k for k, a in enumerate(atoms)}
    size = 1 << m
    world = np.arange(size, dtype=np.int64)
    columns = [((world >> (m - 1 - k)) & 1).astype(np.int8) for k in range(m)]
    scores = np.zeros(size, dtype=np.float64)
    for weight, formula, subs in groundings:
        for ga in subs:
            truth = np.zeros(size, dtype=bool)
            for implicant in formula.implicants:
                term = np.ones(size, dtype=bool)
                for j, b in enumerate(implicant):
                    if b is not None:
                        term &= columns[pos[ga[j]]] == b
                truth |= term
            scores += weight * truth
    if size:
        scores -= scores.max()
    weights = np.exp(scores)
    return JointTable(atoms, weights / weights.sum())


def mln_to_parfactor_model(mln: MLN, name: str = "converted") -> ParfactorModel:
    """Rebuild a single-parfactor model from an MLN whose formulas partition
    the assignment space of one shared atom tuple.

    Each table row takes ``exp(w)`` of the unique formula satisfied there.
    Raises with a diagnostic when the MLN does not have that shape.
    """
    if not mln.formulas:
        raise ModelError("cannot convert an empty MLN to a parfactor")
    atoms = mln.formulas[0].atoms
    for f in mln.formulas:
        if f.atoms != atoms:
            raise ModelError(
                "conversion requires all formulas over one shared atom tuple; "
                f"got {tuple(map(str, f.atoms))} vs {tuple(map(str, atoms))}"
            )
    arity = len(atoms)
    potentials: list[float | None] = [None] * (1 << arity)
    for f in mln.formulas:
        for bits in f.formula.satisfying():
            idx = 0
            for b in bits:
                idx = (idx << 1) | b
            if potentials[idx] is not None:
                raise ModelError(
                    f"formulas overlap on assignment {bits}; they must partition "
                    "the assignment space"
                )
            potentials[idx] = float(np.exp(f.weight))
    if any(p is None for p in potentials):
        raise ModelError("formulas do not cover the full assignment space")
    declared = {lv.name: lv for lv in mln.logvars}
    prvs = tuple(
        PRV(atom.pred, tuple(declared[a] for a in atom.args)) for atom in atoms
    )
    referenced = {lv.name for prv in prvs for lv in prv.params}
    parfactor = Parfactor(name, prvs, tuple(potentials))
    return ParfactorModel(
        tuple(lv for lv in mln.logvars if lv.name in referenced), (parfactor,)
    )


# ---------------------------------------------------------------------------
# text format

_MLN_DOMAIN_RE = re.compile(r"domain\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*\{([^}]*)\}\s*\Z")
_LITERAL_RE = re.compile(
    r"(!?)\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(([^)]*)\))?\s*\Z"
)


def serialize_mln(mln: MLN) -> str:
    """Render an MLN in the text format; weights round-trip bit exactly."""
    out = [f"domain {lv.name} = {{{', '.join(lv.domain)}}}" for lv in mln.logvars]
    out.extend(f"{f.weight!r}  {f.render()}" for f in mln.formulas)
    return "\n".join(out) + "\n"


def parse_mln(text: str) -> MLN:
    """Parse the text format back into an MLN; errors carry line numbers."""
    logvars: dict[str, Logvar] = {}
    formulas: list[MLNFormula] = []

    def fail(no: int, message: str):
        raise ParseError(f"line {no}: {message}")

    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if line.startswith("domain"):
            m = _MLN_DOMAIN_RE.match(line)
            if not m:
                fail(no, "malformed domain declaration")
            name = m.group(1)
            if name in logvars:
                fail(no, f"logvar {name!r} declared twice")
            consts = [c.strip() for c in m.group(2).split(",") if c.strip()]
            try:
                logvars[name] = Logvar(name, tuple(consts))
            except ModelError as e:
                fail(no, str(e))
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            fail(no, "expected '<weight>  <formula>'")
        try:
            weight = float(parts[0])
        except ValueError:
            fail(no, f"bad weight {parts[0]!r}")
        body = parts[1].strip()
        if body == "true":
            formulas.append(MLNFormula(weight, (), BoolFormula.tautology(0)))
            continue
        atoms: list[Atom] = []
        conjuncts: list[dict[int, int]] = []
        for conjunct in body.split(" v "):
            conjunct = conjunct.strip()
            if conjunct.startswith("(") and conjunct.endswith(")"):
                conjunct = conjunct[1:-1].strip()
            assignment: dict[int, int] = {}
            for literal in conjunct.split("^"):
                m = _LITERAL_RE.match(literal.strip())
                if not m:
                    fail(no, f"malformed literal {literal.strip()!r}")
                negated, pred, args_text = m.group(1) == "!", m.group(2), m.group(3)
                args = tuple(
                    a.strip() for a in (args_text or "").split(",") if a.strip()
                )
                atom = Atom(pred, args)
                if atom not in atoms:
                    atoms.append(atom)
                j = atoms.index(atom)
                value = 0 if negated else 1
                if assignment.get(j, value) != value:
                    fail(no, f"contradictory literals for atom {atom}")
                assignment[j] = value
            conjuncts.append(assignment)
        arity = len(atoms)
        cover = tuple(
            tuple(assignment.get(j) for j in range(arity)) for assignment in conjuncts
        )
        try:
            formula = BoolFormula(arity, cover)
            formulas.append(MLNFormula(weight, tuple(atoms), formula))
        except (ValueError, ModelError) as e:
            fail(no, str(e))
    try:
        return MLN(tuple(logvars.values()), tuple(formulas))
    except ModelError as e:
        raise ParseError(str(e)) from e


def load_mln(path) -> MLN:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_mln(fh.read())
