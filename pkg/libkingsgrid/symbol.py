"""Dispersion symbols of Z^d Cayley graphs: evaluation, derivatives and Taylor data of the shifted phase."""

import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List, Sequence, Tuple, Union
import numpy as np
from libkingsgrid.logs import start_logger
from libkingsgrid.exceptions import DimensionMismatch, InvalidGeneratorSet, InsufficientOrder

logger = start_logger(__name__)

TWO_PI = 2.0 * math.pi
SEAM_TOLERANCE = 1e-14
'''Not in docs. helper functions'''


def check_dimension(gens: "HalfGeneratorSet", points: np.ndarray):
    """Check that the trailing axis of points matches the dimension of gens"""
    if points.shape[-1] != gens.dimension:
        logger.error('Oops! An error Occurred ⚠️')
        raise DimensionMismatch(
            "Point of dimension {} given for a symbol on the {}-torus.".format(
                points.shape[-1], gens.dimension))


def as_points(p: Any) -> np.ndarray:
    """Coordinates of a TorusPoint, a sequence or an array of points as a float array"""
    if isinstance(p, TorusPoint):
        return np.asarray(p.coordinates, dtype=float)
    return np.atleast_1d(np.asarray(p, dtype=float))


def reduce_angles(x: Any) -> np.ndarray:
    """Reduce angles into [0, 2π), folding values within the seam tolerance of 2π to zero"""
    reduced = np.mod(np.asarray(x, dtype=float), TWO_PI)
    return np.where(reduced > TWO_PI - SEAM_TOLERANCE, 0.0, reduced)


def exponent_tuples(dimension: int, degree: int) -> Iterator[Tuple[int, ...]]:
    """All exponent tuples of the given total degree in lexicographic order"""
    if dimension == 1:
        yield (degree, )
        return
    for first in range(degree, -1, -1):
        for rest in exponent_tuples(dimension - 1, degree - first):
            yield (first, ) + rest


def multinomial(exponents: Sequence[int]) -> int:
    """Multinomial coefficient |e|!/(e_1!...e_d!)"""
    value = math.factorial(sum(exponents))
    for e in exponents:
        value //= math.factorial(e)
    return value


"""Domain types"""


@dataclass(frozen=True)
class HalfGeneratorSet:
    '''One representative per ±pair of generators of a Cayley graph of Z^d'''
    dimension: int
    half_generators: Tuple[Tuple[int, ...], ...]
    name: str = "custom"

    def __post_init__(self):
        gens = tuple(tuple(int(c) for c in h) for h in self.half_generators)
        object.__setattr__(self, 'half_generators', gens)
        if self.dimension < 1:
            raise InvalidGeneratorSet("Dimension must be a positive integer.")
        if not gens:
            raise InvalidGeneratorSet("A generator set needs at least one half-generator.")
        seen = set()
        for h in gens:
            if len(h) != self.dimension:
                raise DimensionMismatch(
                    "Half-generator {} does not live in Z^{}.".format(h, self.dimension))
            if not any(h):
                raise InvalidGeneratorSet("The zero vector is not a generator.")
            negative = tuple(-c for c in h)
            if h in seen or negative in seen:
                raise InvalidGeneratorSet(
                    "Half-generator {} repeats or negates another one.".format(h))
            seen.add(h)

    @property
    def matrix(self) -> np.ndarray:
        '''Half-generators as rows of an integer matrix'''
        return np.array(self.half_generators, dtype=float)

    @property
    def size(self) -> int:
        return len(self.half_generators)

    def gradient_bound(self) -> np.ndarray:
        '''Componentwise bound 2·Σ_h |h_i| on the gradient of the symbol'''
        return 2.0 * np.abs(self.matrix).sum(axis=0)

    def symbol_sup(self) -> float:
        '''Upper bound 4·(number of half-generators) on the symbol'''
        return 4.0 * self.size

    def same_as(self, other: "HalfGeneratorSet") -> bool:
        '''Equality of the generated symmetric sets, ignoring order and signs of representatives'''
        if self.dimension != other.dimension:
            return False

        def canonical(gens):
            return {max(h, tuple(-c for c in h)) for h in gens.half_generators}

        return canonical(self) == canonical(other)

    def is_king2d(self) -> bool:
        return self.same_as(HalfGeneratorSet.king2d())

    def is_reflection_symmetric(self) -> bool:
        '''True if flipping any single coordinate maps the generated set to itself'''
        full = {h for h in self.half_generators} | {tuple(-c for c in h) for h in self.half_generators}
        for axis in range(self.dimension):
            flipped = {tuple(-c if i == axis else c for i, c in enumerate(h)) for h in full}
            if flipped != full:
                return False
        return True

    @classmethod
    def king2d(cls) -> "HalfGeneratorSet":
        return cls(2, ((1, 0), (0, 1), (1, 1), (1, -1)), name="king2d")

    @classmethod
    def lkg3d(cls) -> "HalfGeneratorSet":
        return cls(3, ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, -1, 0)), name="lkg3d")

    @classmethod
    def chain1d(cls) -> "HalfGeneratorSet":
        return cls(1, ((1, ), ), name="chain1d")

    @classmethod
    def lattice(cls, dimension: int) -> "HalfGeneratorSet":
        '''Nearest-neighbour lattice Z^d'''
        rows = tuple(tuple(1 if i == j else 0 for j in range(dimension)) for i in range(dimension))
        return cls(dimension, rows, name="lattice-z{}d".format(dimension))

    @classmethod
    def from_lines(cls, lines: Iterable[str], name: str = "custom") -> "HalfGeneratorSet":
        '''Parse one integer vector per line; blank lines and # comments are skipped'''
        rows = []
        for line in lines:
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            rows.append(tuple(int(token) for token in line.replace(',', ' ').split()))
        if not rows:
            raise InvalidGeneratorSet("No half-generators found.")
        return cls(len(rows[0]), tuple(rows), name=name)

    @classmethod
    def from_file(cls, path: str) -> "HalfGeneratorSet":
        logger.info('Loading half-generators from {}'.format(path))
        with open(path) as handle:
            return cls.from_lines(handle, name=str(path))

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'dimension': self.dimension,
            'half_generators': [list(h) for h in self.half_generators]
        }


@dataclass(frozen=True)
class TorusPoint:
    '''A point of the d-torus, coordinates reduced into [0, 2π)'''
    coordinates: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'coordinates',
                           tuple(float(c) for c in reduce_angles(np.atleast_1d(self.coordinates))))

    @classmethod
    def of(cls, *coordinates: float) -> "TorusPoint":
        return cls(tuple(coordinates))

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coordinates)

    def distance(self, other: Union["TorusPoint", Sequence[float]]) -> float:
        return float(torus_distance(self.as_array(), as_points(other)))

    def __iter__(self):
        return iter(self.coordinates)

    def __getitem__(self, index):
        return self.coordinates[index]


def torus_distance(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Euclidean distance with each coordinate difference taken modulo 2π"""
    difference = np.abs(np.mod(np.asarray(p) - np.asarray(q) + math.pi, TWO_PI) - math.pi)
    return np.sqrt(np.sum(difference**2, axis=-1))


@dataclass(frozen=True)
class TaylorPolynomial:
    '''Truncated Taylor data: exponent tuple -> real coefficient'''
    coefficients: Dict[Tuple[int, ...], float]
    max_order: int
    dimension: int = 2

    def __post_init__(self):
        for exponents in self.coefficients:
            if sum(exponents) > self.max_order:
                raise InsufficientOrder(
                    "Exponent {} exceeds the truncation order {}.".format(exponents, self.max_order))

    def coefficient(self, *exponents: int) -> float:
        return self.coefficients.get(tuple(exponents), 0.0)

    def largest_coefficient(self) -> float:
        return max((abs(c) for c in self.coefficients.values()), default=0.0)

    def support(self, coeff_threshold: float = 0.0) -> List[Tuple[int, ...]]:
        return sorted(e for e, c in self.coefficients.items() if abs(c) > coeff_threshold)

    def evaluate(self, delta: Any) -> np.ndarray:
        '''Value of the polynomial at one or many displacements'''
        delta = np.atleast_1d(np.asarray(delta, dtype=float))
        total = np.zeros(delta.shape[:-1])
        for exponents, c in self.coefficients.items():
            total = total + c * np.prod(delta**np.asarray(exponents), axis=-1)
        return total

    def truncated(self, order: int) -> "TaylorPolynomial":
        kept = {e: c for e, c in self.coefficients.items() if sum(e) <= order}
        return TaylorPolynomial(kept, order, self.dimension)

    def transposed(self) -> "TaylorPolynomial":
        '''Swap the roles of the two variables of a 2D polynomial'''
        self.check_planar()
        return TaylorPolynomial({(e[1], e[0]): c for e, c in self.coefficients.items()},
                                self.max_order, 2)

    def sheared(self, k: float) -> "TaylorPolynomial":
        '''Substitute x = u + k·v, y = v in a 2D polynomial; exact binomial expansion'''
        self.check_planar()
        result: Dict[Tuple[int, int], float] = {}
        for (a, b), c in self.coefficients.items():
            for j in range(a + 1):
                key = (j, a - j + b)
                result[key] = result.get(key, 0.0) + c * math.comb(a, j) * k**(a - j)
        return TaylorPolynomial(result, self.max_order, 2)

    def check_planar(self):
        if self.dimension != 2:
            raise DimensionMismatch("Only planar Taylor polynomials support this operation.")

    def to_dict(self) -> dict:
        return {
            'max_order': self.max_order,
            'coefficients': [[list(e), c] for e, c in sorted(self.coefficients.items())]
        }


"""Symbol operations"""


def phases(gens: HalfGeneratorSet, p: Any) -> np.ndarray:
    """Inner products h·p for every half-generator, stacked on the last axis"""
    points = as_points(p)
    check_dimension(gens, points)
    return points @ gens.matrix.T


def eval_symbol(gens: HalfGeneratorSet, p: Any) -> Union[float, np.ndarray]:
    """ω(p) = Σ_h 2(1 − cos(h·p))"""
    try:
        value = np.sum(2.0 * (1.0 - np.cos(phases(gens, p))), axis=-1)
        return float(value) if np.ndim(value) == 0 else value
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def grad_symbol(gens: HalfGeneratorSet, p: Any) -> np.ndarray:
    """∇ω(p) = Σ_h 2h sin(h·p)"""
    try:
        return 2.0 * np.sin(phases(gens, p)) @ gens.matrix
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def hessian_symbol(gens: HalfGeneratorSet, p: Any) -> np.ndarray:
    """Hess ω(p) = Σ_h 2(h⊗h) cos(h·p)"""
    try:
        weights = 2.0 * np.cos(phases(gens, p))
        outer = np.einsum('ki,kj->kij', gens.matrix, gens.matrix)
        return np.tensordot(weights, outer, axes=([-1], [0]))
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def phase_series_coefficient(theta: float, k: int) -> float:
    """Coefficient of φ^k in 2(1−cos(θ+φ)) − 2(1−cos θ) − 2 sin θ·φ"""
    if k % 2 == 0:
        return 2.0 * math.cos(theta) * (-1)**(k // 2 + 1) / math.factorial(k)
    return 2.0 * math.sin(theta) * (-1)**((k - 1) // 2) / math.factorial(k)


def taylor_shifted_phase(gens: HalfGeneratorSet, p0: Any, order: int) -> TaylorPolynomial:
    """Taylor data of ω(p0+δ) − ω(p0) − ∇ω(p0)·δ up to the given total order"""
    try:
        if order < 2:
            raise InsufficientOrder("Taylor order must be at least 2, got {}.".format(order))
        thetas = np.atleast_1d(phases(gens, p0))
        coefficients: Dict[Tuple[int, ...], float] = {}
        for k in range(2, order + 1):
            weights = [phase_series_coefficient(float(theta), k) for theta in thetas]
            for exponents in exponent_tuples(gens.dimension, k):
                shape = multinomial(exponents)
                value = 0.0
                for weight, h in zip(weights, gens.half_generators):
                    monomial = 1
                    for hi, ei in zip(h, exponents):
                        monomial *= hi**ei
                    value += weight * monomial
                if value != 0.0:
                    coefficients[exponents] = shape * value
        return TaylorPolynomial(coefficients, order, gens.dimension)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


"""King's grid closed forms"""


def king2d_cs(p: Any) -> Tuple[Any, Any, Any, Any]:
    """(c1, s1, c2, s2) = (cos x0, sin x0, cos y0, sin y0)"""
    points = as_points(p)
    x, y = points[..., 0], points[..., 1]
    return np.cos(x), np.sin(x), np.cos(y), np.sin(y)


def king2d_det4(p: Any) -> np.ndarray:
    """c1c2(1+2c1)(1+2c2) − 4s1²s2², one quarter of det Hess ω"""
    c1, s1, c2, s2 = king2d_cs(p)
    return c1 * c2 * (1 + 2 * c1) * (1 + 2 * c2) - 4 * s1**2 * s2**2


def king2d_det4_gradient(p: Any) -> np.ndarray:
    c1, s1, c2, s2 = king2d_cs(p)
    dx = c2 * (1 + 2 * c2) * (-s1 * (1 + 4 * c1)) - 8 * s1 * c1 * s2**2
    dy = c1 * (1 + 2 * c1) * (-s2 * (1 + 4 * c2)) - 8 * s2 * c2 * s1**2
    return np.stack([dx, dy], axis=-1)


def king2d_hessian_closed_form(cs: Tuple[float, float, float, float]) -> np.ndarray:
    c1, s1, c2, s2 = cs
    return 2.0 * np.array([[c1 * (1 + 2 * c2), -2 * s1 * s2], [-2 * s1 * s2, c2 * (1 + 2 * c1)]])
