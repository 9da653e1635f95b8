"""
Reaction networks: a small line-oriented DSL, stoichiometry, and mass-action
vector fields.

The grammar is one reaction per line::

    # comment
    species: X, Y, Z          (optional; fixes the species order)
    Z + X -> 2X @ k1
    0 -> 2Z @ k4

A complex is a ``+``-separated list of ``[int] identifier`` terms, or ``0``
for the empty complex.  Without a ``species:`` line the species are ordered
by first appearance.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

__all__ = [
    "Complex",
    "Reaction",
    "ReactionNetwork",
    "SystemParams",
    "NetworkSyntaxError",
    "MolecularityWarning",
    "parse_network",
    "pretty_print",
    "stoichiometric_matrix",
    "network_rank",
    "is_bimolecular",
    "mass_action_rhs",
    "mass_action_field",
    "builtin",
    "BUILTIN_NAMES",
    "network_to_json",
    "network_from_json",
]


class NetworkSyntaxError(ValueError):
    """Raised on malformed DSL input.  Carries 1-based ``line`` and ``column``."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class MolecularityWarning(UserWarning):
    """Emitted when a parsed network has a complex of molecularity > 2."""


@dataclass(frozen=True, eq=False)
class Complex:
    """A formal nonnegative integer combination of species.

    ``terms`` keeps the written order so that pretty-printing is stable;
    equality and hashing ignore that order.
    """

    terms: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        merged: dict[str, int] = {}
        for name, coeff in self.terms:
            if coeff < 1:
                raise ValueError(f"coefficient of {name!r} must be >= 1, got {coeff}")
            merged[name] = merged.get(name, 0) + int(coeff)
        object.__setattr__(self, "terms", tuple(merged.items()))

    @classmethod
    def of(cls, mapping: Mapping[str, int] | None = None, **kw: int) -> "Complex":
        items = dict(mapping or {}, **kw)
        return cls(tuple((k, v) for k, v in items.items() if v))

    def as_dict(self) -> dict[str, int]:
        return dict(self.terms)

    def coefficient(self, species: str) -> int:
        return self.as_dict().get(species, 0)

    @property
    def molecularity(self) -> int:
        return sum(c for _, c in self.terms)

    @property
    def species(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.terms)

    def __eq__(self, other):
        if not isinstance(other, Complex):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(frozenset(self.terms))

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(name if c == 1 else f"{c}{name}" for name, c in self.terms)


@dataclass(frozen=True)
class Reaction:
    reactant: Complex
    product: Complex
    rate: str

    def __post_init__(self):
        if self.reactant == self.product:
            raise ValueError(f"null reaction {self.reactant} -> {self.product}")

    def net_change(self, species: str) -> int:
        return self.product.coefficient(species) - self.reactant.coefficient(species)

    def __str__(self):
        return f"{self.reactant} -> {self.product} @ {self.rate}"


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple[str, ...]
    reactions: tuple[Reaction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        if len(set(self.species)) != len(self.species):
            raise ValueError(f"duplicate species in {self.species}")
        known = set(self.species)
        for rxn in self.reactions:
            missing = (set(rxn.reactant.species) | set(rxn.product.species)) - known
            if missing:
                raise ValueError(f"reaction '{rxn}' uses undeclared species {sorted(missing)}")

    @property
    def rate_symbols(self) -> tuple[str, ...]:
        """Distinct rate symbols in order of first use."""
        return tuple(dict.fromkeys(r.rate for r in self.reactions))

    def reorder(self, species: Sequence[str]) -> "ReactionNetwork":
        """Same network with a permuted species list."""
        if sorted(species) != sorted(self.species):
            raise ValueError(f"{list(species)} is not a permutation of {list(self.species)}")
        return ReactionNetwork(tuple(species), self.reactions)

    def __str__(self):
        return pretty_print(self)


@dataclass(frozen=True)
class SystemParams:
    """Positive rate constants keyed by rate symbol.

    For the four-reaction system the symbols are ``k1..k4`` and the
    convenience properties ``k1``, ..., ``alpha`` and ``omega`` apply.
    """

    kappa: Mapping[str, float]

    def __post_init__(self):
        kappa = {str(k): float(v) for k, v in dict(self.kappa).items()}
        for k, v in kappa.items():
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"rate constant {k} must be positive and finite, got {v}")
        object.__setattr__(self, "kappa", kappa)

    @classmethod
    def from_values(cls, values: Sequence[float], symbols: Sequence[str] | None = None) -> "SystemParams":
        values = list(values)
        if symbols is None:
            symbols = [f"k{i + 1}" for i in range(len(values))]
        if len(symbols) != len(values):
            raise ValueError(f"expected {len(symbols)} rate constants, got {len(values)}")
        return cls(dict(zip(symbols, values)))

    def __getitem__(self, symbol: str) -> float:
        return self.kappa[symbol]

    def __hash__(self):
        return hash(tuple(sorted(self.kappa.items())))

    def vector(self, symbols: Sequence[str]) -> np.ndarray:
        try:
            return np.array([self.kappa[s] for s in symbols], dtype=float)
        except KeyError as exc:
            raise KeyError(f"no value for rate symbol {exc.args[0]!r}") from None

    def replace(self, **changes: float) -> "SystemParams":
        return SystemParams({**self.kappa, **changes})

    @property
    def k1(self) -> float:
        return self.kappa["k1"]

    @property
    def k2(self) -> float:
        return self.kappa["k2"]

    @property
    def k3(self) -> float:
        return self.kappa["k3"]

    @property
    def k4(self) -> float:
        return self.kappa["k4"]

    @property
    def alpha(self) -> float:
        return math.sqrt(self.k1 * self.k3 * self.k4 / self.k2)

    @property
    def omega(self) -> float:
        # frequency of the imaginary eigenvalue pair on the bifurcation set
        return math.sqrt(2.0 * self.k2 * self.k4)


# ---------------------------------------------------------------------------
# parsing and printing

_TERM_RE = re.compile(r"\s*(\d*)\s*([^\W\d]\w*)\s*$", re.UNICODE)


def _parse_complex(text: str, lineno: int, col0: int) -> Complex:
    stripped = text.strip()
    if stripped == "0":
        return Complex()
    if not stripped:
        raise NetworkSyntaxError("empty complex (use 0 for the zero complex)", lineno, col0 + 1)
    terms = []
    offset = 0
    for piece in text.split("+"):
        m = _TERM_RE.match(piece)
        if m is None:
            lead = len(piece) - len(piece.lstrip())
            raise NetworkSyntaxError(f"bad term {piece.strip()!r}", lineno, col0 + offset + lead + 1)
        coeff = int(m.group(1)) if m.group(1) else 1
        if coeff < 1:
            lead = len(piece) - len(piece.lstrip())
            raise NetworkSyntaxError("coefficient must be positive", lineno, col0 + offset + lead + 1)
        terms.append((m.group(2), coeff))
        offset += len(piece) + 1
    return Complex(tuple(terms))


def parse_network(text: str) -> ReactionNetwork:
    """Parse DSL text into a :class:`ReactionNetwork`.

    Raises :class:`NetworkSyntaxError` with line/column on malformed input.
    Complexes of molecularity above two are accepted and reported through a
    :class:`MolecularityWarning`.
    """
    declared: list[str] | None = None
    seen: dict[str, None] = {}
    reactions: list[Reaction] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        head = line.strip()
        if head.startswith("species:") or head.startswith("species :"):
            if declared is not None:
                raise NetworkSyntaxError("duplicate species declaration", lineno, 1)
            body = head.split(":", 1)[1]
            names = [s.strip() for s in body.split(",") if s.strip()]
            for name in names:
                if not name.isidentifier():
                    raise NetworkSyntaxError(f"bad species name {name!r}", lineno, raw.index(name) + 1)
            declared = names
            continue
        arrow = line.find("->")
        if arrow < 0:
            raise NetworkSyntaxError("expected '->'", lineno, len(line.rstrip()) + 1)
        at = line.find("@", arrow)
        if at < 0:
            raise NetworkSyntaxError("expected '@ rate'", lineno, len(line.rstrip()) + 1)
        tail = line[at + 1:]
        rate = tail.strip()
        if not rate.isidentifier():
            col = at + 1 + len(tail) - len(tail.lstrip()) + 1
            raise NetworkSyntaxError(f"bad rate symbol {rate!r}", lineno, col)
        reactant = _parse_complex(line[:arrow], lineno, 0)
        product = _parse_complex(line[arrow + 2:at], lineno, arrow + 2)
        if reactant == product:
            raise NetworkSyntaxError("reactant and product complexes are equal", lineno, 1)
        for name in reactant.species + product.species:
            seen.setdefault(name, None)
        reactions.append(Reaction(reactant, product, rate))

    if declared is None:
        species = tuple(seen)
    else:
        undeclared = [s for s in seen if s not in declared]
        if undeclared:
            raise NetworkSyntaxError(f"species {undeclared} not in the species declaration", 1, 1)
        species = tuple(declared)
    net = ReactionNetwork(species, tuple(reactions))
    if not is_bimolecular(net):
        bad = [str(r) for r in net.reactions
               if r.reactant.molecularity > 2 or r.product.molecularity > 2]
        warnings.warn(f"non-bimolecular reactions: {bad}", MolecularityWarning, stacklevel=2)
    return net


def pretty_print(net: ReactionNetwork) -> str:
    """Canonical DSL text; ``parse_network(pretty_print(net)) == net``."""
    lines = ["species: " + ", ".join(net.species)]
    lines.extend(str(r) for r in net.reactions)
    return "\n".join(lines) + "\n"


def network_to_json(net: ReactionNetwork) -> str:
    doc = {
        "species": list(net.species),
        "reactions": [
            {"reactant": r.reactant.as_dict(), "product": r.product.as_dict(), "rate": r.rate}
            for r in net.reactions
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False)


def network_from_json(text: str) -> ReactionNetwork:
    doc = json.loads(text)
    reactions = tuple(
        Reaction(Complex.of(r["reactant"]), Complex.of(r["product"]), r["rate"])
        for r in doc["reactions"]
    )
    return ReactionNetwork(tuple(doc["species"]), reactions)


# ---------------------------------------------------------------------------
# stoichiometry


def _coefficient_matrices(net: ReactionNetwork) -> tuple[np.ndarray, np.ndarray]:
    index = {s: i for i, s in enumerate(net.species)}
    reac = np.zeros((len(net.species), len(net.reactions)), dtype=np.int64)
    prod = np.zeros_like(reac)
    for j, rxn in enumerate(net.reactions):
        for name, c in rxn.reactant.terms:
            reac[index[name], j] = c
        for name, c in rxn.product.terms:
            prod[index[name], j] = c
    return reac, prod


def stoichiometric_matrix(net: ReactionNetwork) -> np.ndarray:
    """Integer matrix with entry (s, r) = net change of species s in reaction r."""
    reac, prod = _coefficient_matrices(net)
    return prod - reac


def _bareiss_rank(rows: list[list[int]]) -> int:
    # fraction-free elimination; every intermediate value is an exact integer
    m = [list(map(int, r)) for r in rows]
    n_rows = len(m)
    n_cols = len(m[0]) if m else 0
    rank = 0
    prev = 1
    for col in range(n_cols):
        pivot = next((i for i in range(rank, n_rows) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        piv = m[rank][col]
        for i in range(rank + 1, n_rows):
            for j in range(col + 1, n_cols):
                m[i][j] = (piv * m[i][j] - m[i][col] * m[rank][j]) // prev
            m[i][col] = 0
        prev = piv
        rank += 1
        if rank == n_rows:
            break
    return rank


def network_rank(net: ReactionNetwork) -> int:
    """Exact rank of the stoichiometric matrix."""
    return _bareiss_rank(stoichiometric_matrix(net).tolist())


def rank_fraction(matrix: Sequence[Sequence[int]]) -> int:
    """Rank by Gauss-Jordan over :class:`fractions.Fraction` (used as a cross-check)."""
    m = [[Fraction(v) for v in row] for row in matrix]
    rank = 0
    n_cols = len(m[0]) if m else 0
    for col in range(n_cols):
        pivot = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def is_bimolecular(net: ReactionNetwork) -> bool:
    return all(r.reactant.molecularity <= 2 and r.product.molecularity <= 2 for r in net.reactions)


# ---------------------------------------------------------------------------
# mass-action kinetics


def mass_action_rhs(net: ReactionNetwork, params: SystemParams, state: Sequence[float]) -> np.ndarray:
    """Evaluate the mass-action vector field at ``state``.

    Plain float arithmetic, reaction by reaction, so that the result is a
    deterministic polynomial evaluation.
    """
    state = [float(v) for v in state]
    if len(state) != len(net.species):
        raise ValueError(f"state has length {len(state)}, network has {len(net.species)} species")
    index = {s: i for i, s in enumerate(net.species)}
    out = [0.0] * len(state)
    for rxn in net.reactions:
        try:
            k = params.kappa[rxn.rate]
        except KeyError:
            raise KeyError(f"no value for rate symbol {rxn.rate!r}") from None
        flux = k
        for name, c in rxn.reactant.terms:
            flux *= state[index[name]] ** c
        for name in net.species:
            delta = rxn.net_change(name)
            if delta:
                out[index[name]] += delta * flux
    return np.array(out)


def mass_action_field(net: ReactionNetwork, params: SystemParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """Compile ``net`` and ``params`` into ``f(t, y)`` for the integrators."""
    reac, _ = _coefficient_matrices(net)
    stoich = stoichiometric_matrix(net).astype(float)
    rates = params.vector([r.rate for r in net.reactions])
    exps = reac.T.astype(float)

    def rhs(t, y):
        flux = rates * np.prod(np.power(y, exps), axis=1)
        return stoich @ flux

    return rhs


# ---------------------------------------------------------------------------
# builtins

_BUILTIN_TEXT = {
    "paper4": """\
species: X, Y, Z
Z + X -> 2X @ k1
X + Y -> 2Y @ k2
Y + Z -> 0 @ k3
0 -> 2Z @ k4
""",
    "paper4_variant": """\
species: X, Y, Z
Z + X -> 2X @ k1
X + Y -> 2Y @ k2
Y + Z -> 0 @ k3
0 -> Z @ k4
""",
    "lotka": """\
species: X, Y
X -> 2X @ k1
X + Y -> 2Y @ k2
Y -> 0 @ k3
""",
    "ivanova": """\
species: X, Y, Z
Z + X -> 2X @ k1
X + Y -> 2Y @ k2
Y + Z -> 2Z @ k3
""",
    "symmetric9": """\
species: X, Y, Z
Z + X -> X @ alpha
X -> 2X @ gamma
2X -> X @ beta
X + Y -> Y @ alpha
Y -> 2Y @ gamma
2Y -> Y @ beta
Y + Z -> Z @ alpha
Z -> 2Z @ gamma
2Z -> Z @ beta
""",
}

BUILTIN_NAMES: tuple[str, ...] = tuple(_BUILTIN_TEXT)


def builtin(name: str) -> ReactionNetwork:
    """One of ``paper4``, ``paper4_variant``, ``lotka``, ``ivanova``, ``symmetric9``."""
    try:
        text = _BUILTIN_TEXT[name]
    except KeyError:
        raise ValueError(f"unknown builtin network {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
    return parse_network(text)


def builtin_text(name: str) -> str:
    builtin(name)
    return _BUILTIN_TEXT[name]


def load_network(source: str) -> ReactionNetwork:
    """Resolve ``builtin:NAME``, a bare builtin name, or a path to a ``.crn`` file."""
    if source.startswith("builtin:"):
        return builtin(source.split(":", 1)[1])
    if source in _BUILTIN_TEXT:
        return builtin(source)
    with open(source, encoding="utf-8") as fh:
        return parse_network(fh.read())

