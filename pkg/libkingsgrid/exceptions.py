class DimensionMismatch(Exception):
    '''Exception raised if a point, box or exponent does not match the dimension of the generator set'''
    pass


class InvalidGeneratorSet(Exception):
    '''Exception for zero, repeated or mutually negative half-generators'''
    pass


class InsufficientOrder(Exception):
    '''Exception raised if a Taylor polynomial is too short to decide the Newton polyhedron'''
    pass


class UnclassifiableSingularity(Exception):
    '''Exception raised if a degenerate critical point falls in no case of the classification'''
    pass


class ResourceBudgetExceeded(Exception):
    '''Exception raised if a grid or a quadrature does not fit the configured budget'''

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class FitError(Exception):
    '''Exception raised if decay data cannot be fitted by a power law'''
    pass


class EvolutionBlowUp(Exception):
    '''Exception raised if a field stops being finite during an evolution'''

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class InadmissiblePair(Exception):
    '''Exception raised if a Strichartz report is asked for a pair that is not admissible'''
    pass


class InvalidConfig(Exception):
    '''Exception raised if a config file or flag has a bad value'''
    pass


class UnknownCommand(Exception):
    '''Exception raised if libkingsgrid.cli.run() gets an unknown command'''
    pass
