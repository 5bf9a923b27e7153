"""Newton polyhedra of planar Taylor data: Newton distance, principal face and adaptedness."""

import math
from fractions import Fraction
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple
import numpy as np
from libkingsgrid.logs import start_logger
from libkingsgrid.exceptions import InsufficientOrder, DimensionMismatch
from libkingsgrid.enumerables import Verdict
from libkingsgrid.symbol import TaylorPolynomial

logger = start_logger(__name__)

RELATIVE_THRESHOLD = 1e-9
ROOT_CLUSTER_TOLERANCE = 1e-7

Point = Tuple[int, int]


@dataclass(frozen=True)
class CompactEdge:
    '''Segment of the boundary on the line a1·n1 + a2·n2 = m'''
    start: Point
    end: Point
    a1: int
    a2: int
    m: int

    @property
    def line(self) -> Tuple[int, int, int]:
        return (self.a1, self.a2, self.m)

    @property
    def slope(self) -> Fraction:
        return Fraction(self.end[1] - self.start[1], self.end[0] - self.start[0])

    def contains(self, n1: Fraction, n2: Fraction) -> bool:
        on_line = self.a1 * n1 + self.a2 * n2 == self.m
        return on_line and min(self.start[0], self.end[0]) <= n1 <= max(self.start[0], self.end[0])


@dataclass(frozen=True)
class NewtonPolyhedron:
    support: Tuple[Point, ...]
    vertices: Tuple[Point, ...]
    compact_edges: Tuple[CompactEdge, ...]

    @property
    def leftmost(self) -> Point:
        '''Vertex carrying the unbounded vertical ray'''
        return min(self.vertices)

    @property
    def lowest(self) -> Point:
        '''Vertex carrying the unbounded horizontal ray'''
        return min(self.vertices, key=lambda v: (v[1], v[0]))

    def to_dict(self) -> dict:
        return {
            'support': [list(p) for p in self.support],
            'vertices': [list(v) for v in self.vertices],
            'compact_edges': [{
                'start': list(e.start),
                'end': list(e.end),
                'line': list(e.line)
            } for e in self.compact_edges]
        }


@dataclass(frozen=True)
class PrincipalFaceReport:
    distance: Fraction
    face_kind: str
    supporting_line: Optional[Tuple[int, int, int]]
    adapted: Verdict
    height: Fraction
    height_is_lower_bound: bool = True

    def to_dict(self) -> dict:
        return {
            'distance': str(self.distance),
            'face_kind': self.face_kind,
            'supporting_line': list(self.supporting_line) if self.supporting_line else None,
            'adapted': self.adapted.value,
            'height': ('>= ' if self.height_is_lower_bound else '') + str(self.height)
        }


def cross(o: Point, a: Point, b: Point) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def staircase(support: Sequence[Point]) -> List[Point]:
    """Points not dominated by another point of the support, by increasing n1"""
    lowest = {}
    for n1, n2 in support:
        if n1 not in lowest or n2 < lowest[n1]:
            lowest[n1] = n2
    steps = []
    for n1 in sorted(lowest):
        if not steps or lowest[n1] < steps[-1][1]:
            steps.append((n1, lowest[n1]))
    return steps


def build_polyhedron(taylor: TaylorPolynomial, coeff_threshold: Optional[float] = None) -> NewtonPolyhedron:
    """Newton polyhedron of the support above the threshold (default 1e-9·largest coefficient)"""
    try:
        if taylor.dimension != 2:
            raise DimensionMismatch("Newton polyhedra are built for planar Taylor data only.")
        if coeff_threshold is None:
            coeff_threshold = RELATIVE_THRESHOLD * taylor.largest_coefficient()
        if coeff_threshold < 0:
            raise ValueError("coeff_threshold must be nonnegative.")
        support = tuple(sorted(tuple(e) for e in taylor.support(coeff_threshold)))
        if not support:
            raise InsufficientOrder(
                "No coefficient above {} up to order {}; raise the Taylor order.".format(
                    coeff_threshold, taylor.max_order))
        chain: List[Point] = []
        for p in staircase(support):
            while len(chain) >= 2 and cross(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        edges = []
        for p, q in zip(chain, chain[1:]):
            dx, dy = q[0] - p[0], q[1] - p[1]
            g = math.gcd(dx, -dy)
            a1, a2 = -dy // g, dx // g
            edges.append(CompactEdge(p, q, a1, a2, a1 * p[0] + a2 * p[1]))
        edges.sort(key=lambda e: e.slope, reverse=True)
        return NewtonPolyhedron(support, tuple(chain), tuple(edges))
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def principal_face(poly: NewtonPolyhedron) -> PrincipalFaceReport:
    """Newton distance and the face of minimal dimension containing (d, d)"""
    try:
        if not poly.vertices:
            raise InsufficientOrder("Empty Newton polyhedron.")
        left, low = poly.leftmost, poly.lowest
        candidates = [Fraction(left[0]), Fraction(low[1])]
        candidates += [Fraction(e.m, e.a1 + e.a2) for e in poly.compact_edges]
        d = max(candidates)
        if (d, d) in {(Fraction(v[0]), Fraction(v[1])) for v in poly.vertices}:
            return PrincipalFaceReport(d, 'vertex', None, Verdict.undetermined, d)
        for edge in poly.compact_edges:
            if edge.contains(d, d):
                return PrincipalFaceReport(d, 'edge', edge.line, Verdict.undetermined, d)
        logger.warning('Diagonal meets an unbounded ray of the Newton polyhedron at d = {}'.format(d))
        return PrincipalFaceReport(d, 'ray', None, Verdict.undetermined, d)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def edge_polynomial(taylor: TaylorPolynomial, poly: NewtonPolyhedron, line: Tuple[int, int, int]) -> np.ndarray:
    """Coefficients of P(y1) = f_Γ(y1, 1), highest power first"""
    a1, a2, m = line
    on_edge = [p for p in poly.support if a1 * p[0] + a2 * p[1] == m]
    degree = max(p[0] for p in on_edge)
    coefficients = np.zeros(degree + 1)
    for n1, n2 in on_edge:
        coefficients[degree - n1] += taylor.coefficient(n1, n2)
    return coefficients


def real_root_multiplicities(coefficients: np.ndarray, tolerance: float = ROOT_CLUSTER_TOLERANCE) -> List[Tuple[float, int]]:
    """Real roots of a polynomial with multiplicities from clustering numpy.roots.

    A root of multiplicity m moves by about η^(1/m) under a relative coefficient error η, so a cluster
    growing to m roots accepts a spread of scale·tolerance^(1/m), scale being the root bound max|c_i/c_0|.
    """
    coefficients = np.trim_zeros(np.asarray(coefficients, dtype=float), 'f')
    if coefficients.size < 2:
        return []
    scale = max(1.0, float(np.max(np.abs(coefficients[1:] / coefficients[0]))))
    roots = list(np.roots(coefficients))
    clusters: List[List[complex]] = []
    for root in sorted(roots, key=lambda r: (r.real, r.imag)):
        for cluster in clusters:
            if abs(np.mean(cluster) - root) < scale * tolerance**(1.0 / (len(cluster) + 1)):
                cluster.append(root)
                break
        else:
            clusters.append([root])
    found = []
    for cluster in clusters:
        centre = np.mean(cluster)
        if abs(centre.imag) < scale * tolerance:
            found.append((float(centre.real), len(cluster)))
    return sorted(found)


def adaptedness_check(taylor: TaylorPolynomial, poly: NewtonPolyhedron, report: PrincipalFaceReport) -> Verdict:
    """Adapted when a1, a2 > 1 on the principal line, or when no real root of the edge polynomial exceeds multiplicity d"""
    try:
        if report.face_kind != 'edge':
            return Verdict.undetermined
        a1, a2, m = report.supporting_line
        if a1 > 1 and a2 > 1:
            return Verdict.adapted
        roots = real_root_multiplicities(edge_polynomial(taylor, poly, report.supporting_line))
        worst = max((multiplicity for _, multiplicity in roots), default=0)
        logger.debug('Edge polynomial real roots {} on line {}'.format(roots, report.supporting_line))
        if worst <= report.distance:
            return Verdict.adapted
        return Verdict.undetermined
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def analyse(taylor: TaylorPolynomial, coeff_threshold: Optional[float] = None) -> Tuple[NewtonPolyhedron, PrincipalFaceReport]:
    """Polyhedron and principal face report with the adaptedness verdict and height filled in"""
    poly = build_polyhedron(taylor, coeff_threshold)
    report = principal_face(poly)
    verdict = adaptedness_check(taylor, poly, report)
    return poly, replace(report, adapted=verdict, height_is_lower_bound=verdict is not Verdict.adapted)


def render_tikz(poly: NewtonPolyhedron, reach: int = 5) -> str:
    """Coordinate list of the hull boundary in TikZ syntax"""
    left, low = poly.leftmost, poly.lowest
    top = max(reach, left[1] + 1)
    right = max(reach, low[0] + 1)
    boundary = [(left[0], top)] + list(poly.vertices) + [(right, low[1])]
    lines = ['\\draw (-0.2,0)--({},0);'.format(right + 0.2), '\\draw (0,-0.2)--(0,{});'.format(top + 0.2)]
    for p, q in zip(poly.vertices, poly.vertices[1:]):
        lines.append('\\draw ({},{})--({},{});'.format(p[0], p[1], q[0], q[1]))
    lines.append('\\draw [dashed](-0.2,-0.2)--({},{});'.format(min(top, right), min(top, right)))
    path = '--'.join('({},{})'.format(x, y) for x, y in boundary + [(right, top)])
    lines.append('\\fill [fill=gray!50][opacity=0.5] {}-- cycle;'.format(path))
    return '\n'.join(lines)
