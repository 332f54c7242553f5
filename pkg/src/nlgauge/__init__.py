"""Nonlinear Schroedinger equations in logarithmic variables and their nonlinear gauge group."""
from .equation_model import (ABCoefficients, NuMuCoefficients, PhysicalParams, ab_from_numu,
                             doebner_goldin_numu, functionals_R, linear_schroedinger_ab,
                             numu_from_ab, rhs)
from .errors import (DomainError, NLGaugeError, NumericalError, SingularGaugeError,
                     ValidationError, WindingError)
from .expr import differentiate, field_handle, parse
from .gauge_group import GaugeElement, apply_to_st, compose, inverse, is_subgroup
from .gauge_transform import (homogeneous_matrix_law, transform_ab, transform_numu_subgroup,
                              validate_against_paper)
from .grid import Grid, STField, WaveFunction, st_to_wavefunction, wavefunction_to_st
from .invariants import (full_group_invariants, invariant_combination, invariant_potentials,
                         maxwell_residual, tau_beta)
from .solver import (continuity_residual, covariance_experiment, evolve, hydrodynamic_residual,
                     observables)

__version__ = "0.1.0"
