from enum import Enum
from functools import partial
from libkingsgrid.symbol import HalfGeneratorSet


class Presets(Enum):
    '''Named generator sets; lattice_zd takes the dimension as argument'''
    lkg3d = partial(HalfGeneratorSet.lkg3d)
    king2d = partial(HalfGeneratorSet.king2d)
    chain1d = partial(HalfGeneratorSet.chain1d)
    lattice_zd = partial(HalfGeneratorSet.lattice)


class CaseTag(Enum):
    '''Branch of the case analysis a critical point falls in'''
    NonDegenerate = 'NonDegenerate'
    CaseI = 'CaseI'
    CaseIIa = 'CaseIIa'
    CaseIIb_A2 = 'CaseIIb_A2'
    CaseIIb_A3 = 'CaseIIb_A3'
    Generic = 'Generic'


class SingularityType(Enum):
    A1 = 'A1'
    A2 = 'A2'
    A3 = 'A3'


class VelocityRegion(Enum):
    '''Velocity classes by the worst singularity among the critical points'''
    V0 = 'V0'
    V1 = 'V1'
    V2 = 'V2'
    V3 = 'V3'


class Formulas(Enum):
    '''exact: Taylor data of the actual phase; printed: the closed forms as displayed in the case analysis'''
    exact = 'exact'
    printed = 'printed'


class QuadratureMethod(Enum):
    periodic_trapezoid_fft = 'periodic-trapezoid-fft'
    periodic_trapezoid_point = 'periodic-trapezoid-point'
    bessel_rows = 'bessel-rows'
    gauss_panels = 'gauss-panels'


class Verdict(Enum):
    adapted = 'adapted'
    not_adapted = 'not-adapted'
    undetermined = 'undetermined'


class SystemVerdict(Enum):
    solvable = 'solvable'
    no_solution_found = 'no-solution-found'


def preset(name: str, dimension: int = 3) -> HalfGeneratorSet:
    '''Resolve a preset name such as "lkg3d" or "lattice-zd"'''
    member = Presets[name.replace('-', '_')]
    if member is Presets.lattice_zd:
        return member.value(dimension)
    return member.value()
