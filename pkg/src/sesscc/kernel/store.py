"""The constraint store and its entailment procedure.

Facts are kept as a set of atoms; equalities live in a union-find over
terms that is closed under tuple congruence (and tuple injectivity, since
the term algebra is free).  Distinct constants are distinct.  Existential
questions are decided over the finite universe of terms the store knows
about, which is what makes abstraction matching terminate.
"""

from __future__ import annotations

from collections import defaultdict
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence

from .constraints import (
    FALSE,
    And,
    Atom,
    CFalse,
    Constraint,
    CTrue,
    Eq,
    Exists,
    MalformedConstraint,
    Neq,
    conj,
    conjuncts,
    constants,
    exists,
    format_constraint,
    subst,
)
from .terms import (
    Apply,
    Const,
    EvalError,
    FreshNames,
    Term,
    Tuple,
    Var,
    alpha_name,
    evaluate,
    subst_term,
    term_vars,
)

Substitution = dict[str, Term]


class Store:
    def __init__(self, fresh: Optional[FreshNames] = None,
                 arities: Optional[dict[str, int]] = None) -> None:
        self.fresh = fresh if fresh is not None else FreshNames()
        self.arities = arities if arities is not None else {}
        self.facts: dict[Atom, None] = {}
        self.equalities: list[tuple[Term, Term]] = []
        self.disequalities: list[tuple[Term, Term]] = []
        self.hidden: list[str] = []
        self.inconsistent = False
        self.version = 0
        self._by_pred: dict[tuple[str, int], list[Atom]] = defaultdict(list)
        self._parent: dict[Term, Term] = {}
        self._const: dict[Term, Const] = {}
        self._tuples: dict[Term, list[Tuple]] = {}
        self._sigs: dict[tuple, Tuple] = {}
        self._class_cache: Optional[tuple[int, dict]] = None
        # (pred, arity, argument class keys) of every fact; dropped on merges
        self._fact_index: Optional[set] = set()

    # ----------------------------------------------------------- union-find

    def _find(self, t: Term) -> Term:
        root = t
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[t] != root:
            self._parent[t], t = root, self._parent[t]
        return root

    def _register(self, t: Term) -> None:
        if t in self._parent:
            return
        if isinstance(t, Tuple):
            for item in t.items:
                self._register(item)
        self._parent[t] = t
        if isinstance(t, Const):
            self._const[t] = t
        elif isinstance(t, Tuple):
            self._tuples[t] = [t]
            sig = self._sig(t)
            other = self._sigs.get(sig)
            if other is None:
                self._sigs[sig] = t
            else:
                self._union(t, other)

    def _sig(self, t: Tuple) -> tuple:
        return (len(t.items),) + tuple(self._find(i) for i in t.items)

    def _union(self, a: Term, b: Term) -> None:
        pending = [(a, b)]
        while pending:
            x, y = pending.pop()
            rx, ry = self._find(x), self._find(y)
            if rx == ry:
                continue
            self._fact_index = None
            self._parent[ry] = rx
            cx, cy = self._const.pop(rx, None), self._const.pop(ry, None)
            if cx is not None and cy is not None and cx != cy:
                self.inconsistent = True
            if cx or cy:
                self._const[rx] = cx or cy
            tx, ty = self._tuples.pop(rx, []), self._tuples.pop(ry, [])
            if tx and ty:
                a0, b0 = tx[0], ty[0]
                if len(a0.items) != len(b0.items):
                    self.inconsistent = True
                else:
                    pending.extend(zip(a0.items, b0.items))
            if tx or ty:
                self._tuples[rx] = tx + ty
                if rx in self._const:
                    self.inconsistent = True
            pending.extend(self._recongruence())

    def _recongruence(self) -> list[tuple[Term, Term]]:
        table: dict[tuple, Tuple] = {}
        merges = []
        for tuples in list(self._tuples.values()):
            for t in tuples:
                sig = self._sig(t)
                other = table.get(sig)
                if other is None:
                    table[sig] = t
                elif self._find(other) != self._find(t):
                    merges.append((other, t))
        self._sigs = table
        return merges

    def _key(self, t: Term):
        """Hashable equality-class key; unknown terms get a structural key."""
        if t in self._parent:
            return ("c", self._find(t))
        if isinstance(t, Tuple):
            keys = tuple(self._key(i) for i in t.items)
            if all(k[0] == "c" for k in keys):
                hit = self._sigs.get((len(keys),) + tuple(k[1] for k in keys))
                if hit is not None:
                    return ("c", self._find(hit))
            return ("t", keys)
        return ("s", t)

    def _fact_key(self, fact: Atom) -> tuple:
        return (fact.pred, len(fact.args)) + tuple(self._key(a) for a in fact.args)

    def _has_fact(self, pred: str, keys: tuple) -> bool:
        if self._fact_index is None:
            self._fact_index = {self._fact_key(f) for f in self.facts}
        return (pred, len(keys)) + keys in self._fact_index

    def _lookup(self, v: Var) -> Optional[Term]:
        if v in self._parent:
            return self._const.get(self._find(v))
        return None

    def _eval(self, t: Term) -> Term:
        return evaluate(t, self._lookup)

    def _const_of(self, t: Term) -> Optional[Const]:
        if isinstance(t, Const):
            return t
        if t in self._parent:
            return self._const.get(self._find(t))
        return None

    def _tuple_of(self, t: Term) -> Optional[Tuple]:
        if t in self._parent:
            found = self._tuples.get(self._find(t))
            return found[0] if found else None
        return t if isinstance(t, Tuple) else None

    def _distinct(self, a: Term, b: Term, depth: int = 0) -> bool:
        ka, kb = self._key(a), self._key(b)
        if ka == kb:
            return False
        ca, cb = self._const_of(a), self._const_of(b)
        if ca is not None and cb is not None:
            return ca != cb
        ta, tb = self._tuple_of(a), self._tuple_of(b)
        if (ca is not None and tb is not None) or (cb is not None and ta is not None):
            return True
        if ta is not None and tb is not None and depth < 16:
            if len(ta.items) != len(tb.items):
                return True
            if any(self._distinct(x, y, depth + 1) for x, y in zip(ta.items, tb.items)):
                return True
        pair = {ka, kb}
        return any({self._key(x), self._key(y)} == pair for x, y in self.disequalities)

    # ---------------------------------------------------------------- tell

    def tell(self, c: Constraint) -> None:
        """Add ``c`` to the store in place (rule R_Tell)."""
        try:
            self._tell(c)
        except EvalError as exc:
            raise MalformedConstraint(f"{format_constraint(c)}: {exc}") from exc
        self._check_disequalities()
        self.version += 1

    def _tell(self, c: Constraint) -> None:
        match c:
            case CTrue():
                pass
            case CFalse():
                self.inconsistent = True
            case Atom(pred, args):
                known = self.arities.setdefault(pred, len(args))
                if known != len(args):
                    raise MalformedConstraint(
                        f"predicate {pred} used with arity {len(args)}, fixed at {known}")
                fact = Atom(pred, tuple(self._eval(a) for a in args))
                if fact not in self.facts:
                    self.facts[fact] = None
                    self._by_pred[(pred, len(args))].append(fact)
                    for a in fact.args:
                        self._register(a)
                    if self._fact_index is not None:
                        self._fact_index.add(self._fact_key(fact))
            case Eq(left, right):
                left, right = self._eval(left), self._eval(right)
                self._register(left)
                self._register(right)
                self.equalities.append((left, right))
                self._union(left, right)
            case Neq(left, right):
                left, right = self._eval(left), self._eval(right)
                self._register(left)
                self._register(right)
                self.disequalities.append((left, right))
            case And(items):
                for item in items:
                    self._tell(item)
            case Exists(bound, body):
                witnesses = {b: Var(self.fresh(b)) for b in bound}
                self.hidden.extend(w.name for w in witnesses.values())
                self._tell(subst(body, witnesses))

    def _check_disequalities(self) -> None:
        for x, y in self.disequalities:
            if self._key(x) == self._key(y):
                self.inconsistent = True
                return

    # ------------------------------------------------------------- entails

    def entails(self, c: Constraint) -> bool:
        if self.inconsistent:
            return True
        match c:
            case CTrue():
                return True
            case CFalse():
                return False
            case Atom(pred, args):
                try:
                    keys = tuple(self._key(self._eval(a)) for a in args)
                except EvalError:
                    return False
                return self._has_fact(pred, keys)
            case Eq(left, right):
                try:
                    return self._key(self._eval(left)) == self._key(self._eval(right))
                except EvalError:
                    return False
            case Neq(left, right):
                try:
                    return self._distinct(self._eval(left), self._eval(right))
                except EvalError:
                    return False
            case And(items):
                return all(self.entails(i) for i in items)
            case Exists(bound, body):
                renaming = {b: Var(alpha_name(b)) for b in bound}
                body = subst(body, renaming)
                names = [v.name for v in renaming.values()]
                return next(self._solutions(names, body, constants(body)), None) is not None
        raise TypeError(f"not a constraint: {c!r}")

    # --------------------------------------------------------- abstraction

    def universe(self, extra: Iterable[Term] = ()) -> list[Term]:
        """Candidate terms: everything registered, then ``extra``, in order."""
        terms = list(self._parent)
        seen = self._parent
        for t in extra:
            if t not in seen:
                seen = set(seen) | {t} if seen is self._parent else seen | {t}
                terms.append(t)
        return terms

    def _classes(self, universe: list[Term]) -> dict:
        """Universe terms grouped by equivalence class, cached per version."""
        cached = self._class_cache
        if cached is None or cached[0] != self.version:
            classes: dict = defaultdict(list)
            for t in self._parent:
                classes[self._key(t)].append(t)
            cached = self._class_cache = (self.version, classes)
        classes = cached[1]
        extra = universe[len(self._parent):]
        if not extra:
            return classes
        merged = defaultdict(list, {k: list(v) for k, v in classes.items()})
        for t in extra:
            merged[self._key(t)].append(t)
        return merged

    def signature(self, binders: Sequence[str], guard: Constraint) -> tuple:
        """A value that changes whenever ``match_abstraction`` may answer differently."""
        preds, open_binders = _guard_shape(tuple(binders), guard)
        counts = tuple(len(self._by_pred.get(p, ())) for p in preds)
        return (self.inconsistent, len(self.equalities), len(self.disequalities), counts,
                len(self._parent) if open_binders else -1)

    def _solutions(self, binders: Sequence[str], guard: Constraint,
                   extra: Iterable[Term]) -> Iterator[tuple[Term, ...]]:
        """Yield (possibly repeated) tuples ``t`` with ``self ⊢ guard[t/binders]``."""
        universe = self.universe(extra)
        if self.inconsistent:
            yield from product(universe, repeat=len(binders))
            return
        classes = self._classes(universe)
        bset = set(binders)
        atoms = [a for a in _flat(guard) if isinstance(a, Atom)]

        def close(binding: dict[str, Term]) -> Iterator[tuple[Term, ...]]:
            rest = [b for b in binders if b not in binding]
            for combo in product(universe, repeat=len(rest)):
                full = {**binding, **dict(zip(rest, combo))}
                if self.entails(subst(guard, full)):
                    yield tuple(full[b] for b in binders)

        def walk(i: int, binding: dict[str, Term]) -> Iterator[tuple[Term, ...]]:
            if i == len(atoms):
                yield from close(binding)
                return
            a = atoms[i]
            if not any(v in bset and v not in binding for arg in a.args for v in term_vars(arg)):
                try:
                    keys = tuple(self._key(self._eval(subst_term(t, binding))) for t in a.args)
                except EvalError:
                    return
                if self._has_fact(a.pred, keys):
                    yield from walk(i + 1, binding)
                return
            for fact in list(self._by_pred.get((a.pred, len(a.args)), ())):
                for extended in self._match_args(a.args, fact.args, binding, bset, classes):
                    yield from walk(i + 1, extended)

        yield from walk(0, {})

    def _match_args(self, patterns, terms, binding, bset, classes):
        if not patterns:
            yield binding
            return
        for b in self._match(patterns[0], terms[0], binding, bset, classes):
            yield from self._match_args(patterns[1:], terms[1:], b, bset, classes)

    def _match(self, pattern: Term, term: Term, binding, bset, classes):
        open_vars = [v for v in term_vars(pattern) if v in bset and v not in binding]
        if not open_vars:
            try:
                ground = self._eval(subst_term(pattern, binding))
            except EvalError:
                return
            if self._key(ground) == self._key(term):
                yield binding
            return
        match pattern:
            case Var(name):
                for u in classes.get(self._key(term), ()):
                    yield {**binding, name: u}
            case Tuple(items):
                for u in classes.get(self._key(term), ()):
                    if isinstance(u, Tuple) and len(u.items) == len(items):
                        yield from self._match_args(items, u.items, binding, bset, classes)
            case Apply():
                # interpreted: bound later by enumeration, checked by entails
                yield binding

    def match_abstraction(self, binders: Sequence[str], guard: Constraint,
                          already_used: Iterable = ()) -> list[Substitution]:
        """All admissible substitutions σ with ``self ⊢ guard·σ`` (rule R_Abs).

        ``already_used`` holds substitutions (dicts or term tuples aligned
        with ``binders``) that have fired before and are excluded.  The
        result is ordered lexicographically by candidate insertion order.
        """
        extra = constants(guard)
        used = {_as_tuple(u, binders) for u in already_used}
        names = set(binders)
        found = set()
        for sol in self._solutions(list(binders), guard, extra):
            if sol in used or sol in found:
                continue
            if any(v in names for t in sol for v in term_vars(t)):
                continue
            found.add(sol)
        if len(found) > 1:
            index = {t: i for i, t in enumerate(self.universe(extra))}
            ordered = sorted(found, key=lambda s: tuple(index[t] for t in s))
        else:
            ordered = list(found)
        return [dict(zip(binders, s)) for s in ordered]

    # ---------------------------------------------------------- projection

    def to_constraint(self) -> Constraint:
        if self.inconsistent:
            return FALSE
        items: list[Constraint] = list(self.facts)
        items += [Eq(a, b) for a, b in self.equalities]
        items += [Neq(a, b) for a, b in self.disequalities]
        return conj(*sorted(items, key=format_constraint))

    def hide(self, names: Sequence[str]) -> Constraint:
        """Existential projection of the store over ``names`` (rule R_Local)."""
        return exists(tuple(names), self.to_constraint())

    def output(self) -> Constraint:
        """The store with every hidden local projected away."""
        return self.hide(sorted(set(self.hidden)))

    def copy(self) -> "Store":
        other = Store(self.fresh, dict(self.arities))
        for fact in self.facts:
            other.tell(fact)
        for a, b in self.equalities:
            other.tell(Eq(a, b))
        for a, b in self.disequalities:
            other.tell(Neq(a, b))
        other.hidden = list(self.hidden)
        other.inconsistent = self.inconsistent
        return other

    def __repr__(self) -> str:
        return f"Store({format_constraint(self.to_constraint())})"


@lru_cache(maxsize=4096)
def _guard_shape(binders: tuple[str, ...], guard: Constraint) -> tuple[tuple, bool]:
    """Predicates a guard consults, and whether some binder is not fixed by an atom."""
    preds = []
    covered: set[str] = set()
    for item in _flat(guard):
        if isinstance(item, Atom):
            preds.append((item.pred, len(item.args)))
            for a in item.args:
                covered.update(_pattern_vars(a))
        elif isinstance(item, Exists):
            return tuple(preds), True
    return tuple(dict.fromkeys(preds)), not set(binders) <= covered


def _pattern_vars(t: Term) -> Iterator[str]:
    match t:
        case Var(name):
            yield name
        case Tuple(items):
            for i in items:
                yield from _pattern_vars(i)


def _flat(c: Constraint) -> list[Constraint]:
    out = []
    for part in conjuncts(c):
        if isinstance(part, And):
            out.extend(_flat(part))
        else:
            out.append(part)
    return out


def _as_tuple(sub, binders) -> tuple:
    if isinstance(sub, dict):
        return tuple(sub[b] for b in binders)
    return tuple(sub)


# -------------------------------------------------------- functional API


def tell_merge(store: Store, c: Constraint) -> Store:
    """Return a new store entailing both ``store`` and ``c``."""
    merged = store.copy()
    merged.tell(c)
    return merged


def entails(store: Store, c: Constraint) -> bool:
    return store.entails(c)


def match_abstraction(store: Store, binders: Sequence[str], guard: Constraint,
                      already_used: Iterable = ()) -> list[Substitution]:
    return store.match_abstraction(binders, guard, already_used)


def hide(store: Store, names: Sequence[str]) -> Constraint:
    return store.hide(names)


def store_of(c: Constraint, fresh: Optional[FreshNames] = None) -> Store:
    s = Store(fresh)
    s.tell(c)
    return s


def equivalent(c1: Constraint, c2: Constraint) -> bool:
    """Entailment-equivalence of two constraints."""
    return store_of(c1).entails(c2) and store_of(c2).entails(c1)
