from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Sequence, Tuple, Union

from .exceptions import ConfigurationError


@dataclass(frozen=True, order=True)
class GroupElement:
    """
    Element of Z^d x Z_m1 x ... x Z_mk, used as a vertex name.

    Torsion entries are always reduced modulo their modulus, so two elements
    naming the same vertex compare (and hash) equal.
    """
    free: Tuple[int, ...] = ()
    torsion: Tuple[int, ...] = ()
    moduli: Tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.torsion) != len(self.moduli):
            raise ConfigurationError(
                f"torsion {self.torsion} does not match moduli {self.moduli}"
            )
        object.__setattr__(self, "free", tuple(int(x) for x in self.free))
        object.__setattr__(
            self, "torsion", tuple(int(t) % m for t, m in zip(self.torsion, self.moduli))
        )
        object.__setattr__(self, "moduli", tuple(int(m) for m in self.moduli))

    @property
    def dimension(self) -> int:
        return len(self.free)

    def _check_compatible(self, other: "GroupElement"):
        if len(self.free) != len(other.free) or self.moduli != other.moduli:
            raise ConfigurationError(f"cannot combine {self} with {other}")

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check_compatible(other)
        return GroupElement(
            tuple(a + b for a, b in zip(self.free, other.free)),
            tuple(a + b for a, b in zip(self.torsion, other.torsion)),
            self.moduli,
        )

    def __neg__(self) -> "GroupElement":
        return GroupElement(
            tuple(-a for a in self.free),
            tuple(-t for t in self.torsion),
            self.moduli,
        )

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return self + (-other)

    def is_zero(self) -> bool:
        return not any(self.free) and not any(self.torsion)

    def free_part(self) -> "GroupElement":
        return GroupElement(self.free, (0,) * len(self.moduli), self.moduli)

    def torsion_part(self) -> "GroupElement":
        return GroupElement((0,) * len(self.free), self.torsion, self.moduli)

    def extend(self, extra_free: Sequence[int]) -> "GroupElement":
        """Append free coordinates (product constructions)."""
        return GroupElement(self.free + tuple(extra_free), self.torsion, self.moduli)

    def to_json(self) -> list:
        return list(self.free) + list(self.torsion)

    def __repr__(self) -> str:
        if self.moduli:
            return f"({', '.join(map(str, self.free))} | {', '.join(map(str, self.torsion))})"
        return f"({', '.join(map(str, self.free))})"


ElementLike = Union[GroupElement, int, Sequence[int]]


def lattice(*coords: int) -> GroupElement:
    """Vertex of the standard lattice Z^d."""
    return GroupElement(tuple(coords))


def zero(dimension: int, moduli: Sequence[int] = ()) -> GroupElement:
    return GroupElement((0,) * dimension, (0,) * len(moduli), tuple(moduli))


def element(value: ElementLike, dimension: int = 0, moduli: Sequence[int] = ()) -> GroupElement:
    """
    Normalize an int, a coordinate sequence or a GroupElement.

    Plain sequences list the free coordinates first, then the torsion ones.
    """
    if isinstance(value, GroupElement):
        return value
    if isinstance(value, int):
        coords = [value]
    else:
        coords = [int(c) for c in value]
    moduli = tuple(moduli)
    if len(coords) != dimension + len(moduli):
        raise ConfigurationError(
            f"{value!r} does not name an element of Z^{dimension} x {moduli}"
        )
    return GroupElement(tuple(coords[:dimension]), tuple(coords[dimension:]), moduli)


def unit_vectors(dimension: int, moduli: Sequence[int] = ()) -> list:
    """Standard generators: one unit vector per free and per torsion coordinate."""
    moduli = tuple(moduli)
    gens = []
    for i in range(dimension):
        free = tuple(1 if j == i else 0 for j in range(dimension))
        gens.append(GroupElement(free, (0,) * len(moduli), moduli))
    for i in range(len(moduli)):
        torsion = tuple(1 if j == i else 0 for j in range(len(moduli)))
        gens.append(GroupElement((0,) * dimension, torsion, moduli))
    return gens


def torsion_elements(moduli: Sequence[int], dimension: int = 0) -> Iterator[GroupElement]:
    """All elements of the finite part, in lexicographic order."""
    moduli = tuple(moduli)
    for torsion in product(*(range(m) for m in moduli)):
        yield GroupElement((0,) * dimension, torsion, moduli)

