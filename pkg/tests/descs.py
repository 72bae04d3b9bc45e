"""Descriptors shared by the tests, built directly from the library types."""

import mpmath

from motivic_lfunc.coeffs import DedekindQuadraticProvider, DirichletCharacterProvider, OneProvider, TauProvider
from motivic_lfunc.lseries import LFunctionDescriptor


def zeta(**kw):
    return LFunctionDescriptor(OneProvider(), (0,), 1, 1, conductor=1, poles=((0, 1), (1, -1)), name="zeta", **kw)


def chi4(**kw):
    return LFunctionDescriptor(DirichletCharacterProvider(4, [1, 0, -1, 0]), (1,), 1, 1, conductor=4, name="chi4", **kw)


def zeta_qi(**kw):
    with mpmath.workdps(80):
        r = mpmath.sqrt(mpmath.pi) / 2
        poles = ((0, r), (1, -r))
    return LFunctionDescriptor(DedekindQuadraticProvider(-4), (0, 1), 1, 1, conductor=4,
                               poles=poles, name="zeta_Qi", **kw)


def delta(**kw):
    return LFunctionDescriptor(TauProvider(), (0, 1), 12, 1, conductor=1, growth=6, name="Delta", **kw)
