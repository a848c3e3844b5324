"""Based root data for GL(n), SL(n), Sp(2g), GSp(2g) in exact coordinates.

Cocharacters are integer (or Fraction) vectors of length ``cochar_rank``;
roots are integer character vectors of the same length, paired with
cocharacters through a fixed integer pairing matrix (the standard dot
product for every built-in family).  All derived data (positive roots,
2*rho, the finite Weyl group, the fundamental-group presentation) is
computed once at construction and never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

from . import linalg
from .errors import ConfigurationError, PreconditionError

Vector = Tuple[int, ...]

WEYL_CAP = 100_000

GROUP_TAGS = ("GL", "SL", "Sp", "GSp")


class RootDatum:
    """A based root datum together with its precomputed Weyl combinatorics."""

    def __init__(self, group_tag, roots, coroots, simple_indices, cochar_rank,
                 pairing=None, rep_weights=None):
        if len(roots) != len(coroots):
            raise ConfigurationError("roots and coroots must be aligned lists")
        self.group_tag = group_tag
        self.cochar_rank = int(cochar_rank)
        self.roots = linalg.freeze(roots) if roots else ()
        self.coroots = linalg.freeze(coroots) if coroots else ()
        self.simple_indices = tuple(simple_indices)
        self.rank = len(self.simple_indices)
        if pairing is None:
            pairing = linalg.identity(self.cochar_rank)
        self.pairing = linalg.freeze(pairing)
        # Weight multiset of the attached faithful representation, or None.
        self.rep_weights = linalg.freeze(rep_weights) if rep_weights else None
        self._validate_shapes()
        self._check_root_coroot_pairings()
        self.simple_roots = tuple(self.roots[i] for i in self.simple_indices)
        self.simple_coroots = tuple(self.coroots[i] for i in self.simple_indices)
        self.positive_indices = self._split_positivity()
        self.positive_roots = tuple(self.roots[i] for i in self.positive_indices)
        self.two_rho = tuple(sum(col) for col in zip(*self.positive_roots)) \
            if self.positive_roots else (0,) * self.cochar_rank
        self.simple_reflections = tuple(
            self._reflection_matrix(self.roots[i], self.coroots[i])
            for i in self.simple_indices)
        self.weyl_elements = self._generate_weyl(WEYL_CAP)
        self._weyl_set = set(self.weyl_elements)
        self.coroot_set = frozenset(self.coroots)
        self._char_matrices: Dict = {}
        self.pi1 = present_quotient(self.cochar_rank, list(self.coroots))
        self._component_simples = self._split_components()

    # -- construction-time validation -------------------------------------

    def _validate_shapes(self):
        for chi in self.roots:
            if len(chi) != self.cochar_rank:
                raise ConfigurationError("root of wrong length")
        for v in self.coroots:
            if len(v) != self.cochar_rank:
                raise ConfigurationError("coroot of wrong length")
        if len(self.pairing) != self.cochar_rank:
            raise ConfigurationError("pairing matrix has wrong shape")
        if len(set(self.roots)) != len(self.roots):
            raise ConfigurationError("duplicate roots")
        root_set = set(self.roots)
        for chi in self.roots:
            if tuple(-x for x in chi) not in root_set:
                raise ConfigurationError("root set is not stable under negation")

    def _check_root_coroot_pairings(self):
        for chi, v in zip(self.roots, self.coroots):
            if self.pair(chi, v) != 2:
                raise ConfigurationError("<alpha, alpha_check> must equal 2")

    def _split_positivity(self):
        """Indices of roots that are nonnegative combinations of the base."""
        cols = list(self.simple_roots)
        positive = []
        for idx, chi in enumerate(self.roots):
            coeffs = linalg.solve_columns(cols, chi) if cols else None
            if coeffs is None:
                raise ConfigurationError("root outside the span of the base")
            if all(c >= 0 for c in coeffs):
                positive.append(idx)
            elif not all(c <= 0 for c in coeffs):
                raise ConfigurationError("base does not split the roots by sign")
        if 2 * len(positive) != len(self.roots):
            raise ConfigurationError("positive roots do not halve the root set")
        return tuple(positive)

    def _reflection_matrix(self, chi, v):
        n = self.cochar_rank
        cols = []
        for j in range(n):
            e = tuple(1 if i == j else 0 for i in range(n))
            image = tuple(e[i] - self.pair(chi, e) * v[i] for i in range(n))
            cols.append(image)
        return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))

    def _generate_weyl(self, cap):
        ident = linalg.identity(self.cochar_rank)
        elements = {ident}
        frontier = [ident]
        while frontier:
            new_frontier = []
            for w in frontier:
                for s in self.simple_reflections:
                    ws = linalg.mat_mul(w, s)
                    if ws not in elements:
                        elements.add(ws)
                        new_frontier.append(ws)
                        if len(elements) > cap:
                            raise ConfigurationError(
                                "Weyl enumeration exceeded the hard cap; "
                                "the reflections do not generate a finite group")
            frontier = new_frontier
        return tuple(sorted(elements))

    def _split_components(self):
        """Partition of simple indices (positions in the base) by Cartan links."""
        k = self.rank
        adj = {i: set() for i in range(k)}
        for i in range(k):
            for j in range(i + 1, k):
                if self.pair(self.simple_roots[i], self.simple_coroots[j]) != 0:
                    adj[i].add(j)
                    adj[j].add(i)
        seen, comps = set(), []
        for i in range(k):
            if i in seen:
                continue
            stack, comp = [i], []
            while stack:
                x = stack.pop()
                if x in seen:
                    continue
                seen.add(x)
                comp.append(x)
                stack.extend(adj[x] - seen)
            comps.append(tuple(sorted(comp)))
        return tuple(comps)

    # -- basic pairings and actions ----------------------------------------

    def pair(self, chi, v):
        """<chi, v> through the pairing matrix."""
        total = 0
        for i, ci in enumerate(chi):
            if ci == 0:
                continue
            row = self.pairing[i]
            total += ci * sum(row[j] * v[j] for j in range(len(v)))
        return total

    def char_matrix(self, w):
        """Matrix of chi -> chi o w on characters, for a cocharacter matrix w."""
        cached = self._char_matrices.get(w)
        if cached is not None:
            return cached
        p = self.pairing
        pw = linalg.mat_mul(p, w)
        pinv = linalg.mat_inv(p)
        result = linalg.transpose(linalg.mat_mul(pw, pinv))
        result = linalg.freeze(tuple(int(x) for x in row) for row in result)
        self._char_matrices[w] = result
        return result

    def is_weyl(self, w):
        return w in self._weyl_set

    def highest_root(self, component):
        """Highest root of one irreducible component of the base."""
        best, best_height = None, None
        for chi in self.positive_roots:
            coeffs = linalg.solve_columns(list(self.simple_roots), chi)
            support = [i for i, c in enumerate(coeffs) if c != 0]
            if not set(support) <= set(component):
                continue
            height = sum(coeffs)
            if best is None or height > best_height:
                best, best_height = chi, height
        if best is None:
            raise ConfigurationError("component has no roots")
        return best

    @property
    def components(self):
        return self._component_simples

    def coroot_of(self, chi):
        return self.coroots[self.roots.index(chi)]

    def __repr__(self):
        return f"RootDatum({self.group_tag}, cochar_rank={self.cochar_rank}, roots={len(self.roots)})"


# -- quotient presentations (Smith form) -----------------------------------

@dataclass(frozen=True)
class CoinvariantLattice:
    """Presentation of a quotient of Z^rank: free part plus cyclic torsion.

    ``projection`` maps X_* onto the presentation; the first ``free_rank``
    rows are the free coordinates, the remaining rows are read modulo the
    matching entry of ``torsion``.
    """

    free_rank: int
    torsion: Tuple[int, ...]
    projection: Tuple[Tuple[int, ...], ...]

    def project(self, v) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        image = linalg.mat_vec(self.projection, v)
        free = tuple(int(x) for x in image[:self.free_rank])
        tors = tuple(int(x) % d for x, d in zip(image[self.free_rank:], self.torsion))
        return free, tors

    def images_equal(self, u, v) -> bool:
        return self.project(u) == self.project(v)


def present_quotient(rank: int, relation_columns) -> CoinvariantLattice:
    """Present Z^rank modulo the integer span of the given columns."""
    if not relation_columns:
        return CoinvariantLattice(rank, (), linalg.identity(rank))
    rows = [[int(col[i]) for col in relation_columns] for i in range(rank)]
    divisors, s = linalg.smith_with_transform(rows)

    def _normalize(row):
        # Flip so the first nonzero entry is positive: makes the GL free
        # coordinate the valuation of the determinant rather than its negative.
        lead = next((x for x in row if x != 0), 1)
        return tuple(row) if lead > 0 else tuple(-x for x in row)

    free_rows, torsion_rows, torsion = [], [], []
    for i, d in enumerate(divisors):
        if d == 0:
            free_rows.append(_normalize(s[i]))
        elif d > 1:
            torsion_rows.append(_normalize(s[i]))
            torsion.append(d)
    projection = tuple(free_rows + torsion_rows)
    return CoinvariantLattice(len(free_rows), tuple(torsion), projection)


# -- lattice actions ---------------------------------------------------------

@dataclass(frozen=True)
class LatticeAction:
    """A finite group of integer matrices acting on the cocharacter lattice."""

    generators: Tuple[Tuple[Tuple[int, ...], ...], ...]
    order: int

    @staticmethod
    def trivial(rank: int) -> "LatticeAction":
        return LatticeAction((linalg.identity(rank),), 1)

    def validate(self, datum: RootDatum):
        for g in self.generators:
            if len(g) != datum.cochar_rank:
                raise ConfigurationError("generator of wrong size")
            if abs(linalg.det(g)) != 1:
                raise ConfigurationError("generator is not invertible over Z")
            image = {tuple(linalg.mat_vec(g, v)) for v in datum.coroot_set}
            if image != datum.coroot_set:
                raise ConfigurationError("generator does not permute the coroots")
            power = g
            k = 1
            while not linalg.mat_eq(power, linalg.identity(datum.cochar_rank)):
                power = linalg.mat_mul(power, g)
                k += 1
                if k > self.order:
                    raise ConfigurationError("generator order exceeds declared order")
            if self.order % k != 0:
                raise ConfigurationError("generator order does not divide the action order")


def coinvariants(datum: RootDatum, action: LatticeAction) -> CoinvariantLattice:
    """Coinvariants X_* / span{x - g x} presented via Smith reduction."""
    action.validate(datum)
    n = datum.cochar_rank
    columns = []
    for g in action.generators:
        for j in range(n):
            e = tuple(1 if i == j else 0 for i in range(n))
            ge = linalg.mat_vec(g, e)
            col = tuple(int(e[i] - ge[i]) for i in range(n))
            if any(col):
                columns.append(col)
    return present_quotient(n, columns)


# -- dominance ----------------------------------------------------------------

def is_dominant(datum: RootDatum, v) -> bool:
    return all(datum.pair(alpha, v) >= 0 for alpha in datum.simple_roots)


def dominant_rep(datum: RootDatum, v) -> Tuple[Fraction, ...]:
    """Unique dominant element of the Weyl orbit of v.

    Simple-reflection ascent with lowest-index-first tie breaking, so the
    walk (not only the endpoint) is deterministic.
    """
    current = tuple(Fraction(x) for x in v)
    while True:
        for i, alpha in enumerate(datum.simple_roots):
            if datum.pair(alpha, current) < 0:
                current = tuple(
                    Fraction(x) for x in linalg.mat_vec(datum.simple_reflections[i], current))
                break
        else:
            return current


def dominance_leq(datum: RootDatum, v1, v2) -> bool:
    """Dominance order: v2 - v1 a nonnegative rational sum of positive coroots.

    Both arguments must already be dominant.  Inputs whose difference leaves
    the rational span of the coroots (distinct central components) compare
    as False.
    """
    for name, v in (("first", v1), ("second", v2)):
        if not is_dominant(datum, v):
            raise PreconditionError(f"{name} argument is not dominant")
    diff = tuple(Fraction(b) - Fraction(a) for a, b in zip(v1, v2))
    if not datum.simple_coroots:
        return all(x == 0 for x in diff)
    coeffs = linalg.solve_columns(list(datum.simple_coroots), diff)
    if coeffs is None:
        return False
    return all(c >= 0 for c in coeffs)


# -- builders -----------------------------------------------------------------

def _basis_vector(n, i, value=1):
    return tuple(value if j == i else 0 for j in range(n))


def _build_gl(n: int) -> RootDatum:
    roots, coroots = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                chi = tuple((1 if k == i else 0) - (1 if k == j else 0) for k in range(n))
                roots.append(chi)
                coroots.append(chi)
    simple = [roots.index(tuple((1 if k == i else 0) - (1 if k == i + 1 else 0)
                                for k in range(n))) for i in range(n - 1)]
    weights = [_basis_vector(n, i) for i in range(n)]
    return RootDatum("GL", roots, coroots, simple, n, rep_weights=weights)


def _build_sl(n: int) -> RootDatum:
    """SL(n) with cocharacters in the simple-coroot basis, characters in the
    fundamental-weight basis; the pairing is then the identity."""
    rank = n - 1
    roots, coroots = [], []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            chi = tuple((1 if k == i else 0) - (1 if k == i - 1 else 0)
                        - (1 if k == j else 0) + (1 if k == j - 1 else 0)
                        for k in range(rank))
            lo, hi = min(i, j), max(i, j)
            body = tuple(1 if lo <= k < hi else 0 for k in range(rank))
            v = body if i < j else tuple(-x for x in body)
            roots.append(chi)
            coroots.append(v)
    simple = []
    for i in range(rank):
        target = tuple(2 if k == i else (-1 if abs(k - i) == 1 else 0) for k in range(rank))
        simple.append(roots.index(target))
    weights = []
    for i in range(n):
        chi = tuple((1 if k == i else 0) - (1 if k == i - 1 else 0) for k in range(rank))
        weights.append(chi)
    return RootDatum("SL", roots, coroots, simple, rank, rep_weights=weights)


def _build_sp(n: int) -> RootDatum:
    g = n // 2
    roots, coroots = [], []
    for i in range(g):
        for j in range(g):
            if i != j:
                chi = tuple((1 if k == i else 0) - (1 if k == j else 0) for k in range(g))
                roots.append(chi)
                coroots.append(chi)
    for i in range(g):
        for j in range(i + 1, g):
            for sign in (1, -1):
                chi = tuple(sign * ((1 if k == i else 0) + (1 if k == j else 0))
                            for k in range(g))
                roots.append(chi)
                coroots.append(chi)
    for i in range(g):
        for sign in (1, -1):
            roots.append(_basis_vector(g, i, 2 * sign))
            coroots.append(_basis_vector(g, i, sign))
    simple = []
    for i in range(g - 1):
        target = tuple((1 if k == i else 0) - (1 if k == i + 1 else 0) for k in range(g))
        simple.append(roots.index(target))
    simple.append(roots.index(_basis_vector(g, g - 1, 2)))
    weights = [_basis_vector(g, i) for i in range(g)]
    weights += [_basis_vector(g, i, -1) for i in range(g - 1, -1, -1)]
    return RootDatum("Sp", roots, coroots, simple, g, rep_weights=weights)


def _build_gsp(n: int) -> RootDatum:
    """GSp(2g) as Sp coordinates plus one similitude coordinate (the last).

    Cocharacters (a_1, ..., a_g, c) act on the standard 2g-dimensional
    space with exponents (a_1, ..., a_g, c - a_g, ..., c - a_1); the
    similitude valuation realises pi_1(GSp) = Z.
    """
    g = n // 2
    m = g + 1
    roots, coroots = [], []
    for i in range(g):
        for j in range(g):
            if i != j:
                chi = tuple((1 if k == i else 0) - (1 if k == j else 0) for k in range(m))
                roots.append(chi)
                coroots.append(chi)
    f = _basis_vector(m, g)
    for i in range(g):
        for j in range(i + 1, g):
            base = tuple((1 if k == i else 0) + (1 if k == j else 0) for k in range(m))
            chi_plus = tuple(b - fb for b, fb in zip(base, f))
            roots.append(chi_plus)
            coroots.append(tuple((1 if k == i else 0) + (1 if k == j else 0) for k in range(m)))
            roots.append(tuple(-x for x in chi_plus))
            coroots.append(tuple(-((1 if k == i else 0) + (1 if k == j else 0)) for k in range(m)))
    for i in range(g):
        chi_long = tuple(2 * (1 if k == i else 0) - fb for k, fb in zip(range(m), f))
        roots.append(chi_long)
        coroots.append(_basis_vector(m, i))
        roots.append(tuple(-x for x in chi_long))
        coroots.append(_basis_vector(m, i, -1))
    simple = []
    for i in range(g - 1):
        target = tuple((1 if k == i else 0) - (1 if k == i + 1 else 0) for k in range(m))
        simple.append(roots.index(target))
    long_simple = tuple(2 * (1 if k == g - 1 else 0) - (1 if k == g else 0) for k in range(m))
    simple.append(roots.index(long_simple))
    weights = [_basis_vector(m, i) for i in range(g)]
    for i in range(g - 1, -1, -1):
        weights.append(tuple((1 if k == g else 0) - (1 if k == i else 0) for k in range(m)))
    return RootDatum("GSp", roots, coroots, simple, m, rep_weights=weights)


def build_classical(tag: str, n: int) -> RootDatum:
    """Standard based root datum of one classical family in coordinate form."""
    tag = str(tag)
    if tag not in GROUP_TAGS:
        raise ConfigurationError(f"unsupported group tag {tag!r}; expected one of {GROUP_TAGS}")
    if tag in ("GL", "SL"):
        if n < 1:
            raise ConfigurationError("GL/SL need n >= 1")
        if tag == "GL":
            return _build_gl(n) if n > 1 else RootDatum("GL", [], [], [], 1,
                                                        rep_weights=[(1,)])
        if n == 1:
            raise ConfigurationError("SL(1) is trivial; use GL(1)")
        return _build_sl(n)
    if n < 2 or n % 2 != 0:
        raise ConfigurationError("Sp/GSp need even n >= 2")
    return _build_sp(n) if tag == "Sp" else _build_gsp(n)


def datum_from_document(doc: dict) -> RootDatum:
    """Root datum from a structured-text document.

    Fixed keys: ``group``, ``n``; custom data may instead carry explicit
    ``roots``, ``coroots`` and optional ``pairing``.
    """
    if not isinstance(doc, dict):
        raise ConfigurationError("root-datum document must be a mapping")
    unknown = set(doc) - {"group", "n", "roots", "coroots", "pairing", "simple_indices"}
    if unknown:
        raise ConfigurationError(f"unknown root-datum keys: {sorted(unknown)}")
    if "roots" in doc or "coroots" in doc:
        for key in ("roots", "coroots", "simple_indices"):
            if key not in doc:
                raise ConfigurationError(f"custom datum needs {key}")
        roots = [tuple(map(int, r)) for r in doc["roots"]]
        coroots = [tuple(map(int, r)) for r in doc["coroots"]]
        rank = len(roots[0]) if roots else int(doc.get("n", 0))
        pairing = doc.get("pairing")
        return RootDatum(str(doc.get("group", "custom")), roots, coroots,
                         [int(i) for i in doc["simple_indices"]], rank, pairing=pairing)
    if "group" not in doc or "n" not in doc:
        raise ConfigurationError("document needs 'group' and 'n'")
    return build_classical(str(doc["group"]), int(doc["n"]))


def parse_group_name(name: str) -> RootDatum:
    """Parse compact CLI names like GL2, SL3, Sp4, GSp4."""
    for tag in ("GSp", "GL", "SL", "Sp"):
        if name.startswith(tag):
            try:
                n = int(name[len(tag):])
            except ValueError:
                break
            return build_classical(tag, n)
    raise ConfigurationError(f"cannot parse group name {name!r}")
