"""
Built-in executable domains: Counters, FO-Counters, Deterministic Pacman and Twin Prime.
"""

from ..model import DomainRegistry
from .counters import CountersDomain, CountersState
from .fo_counters import FoCountersDomain, FoCountersState
from .pacman import Ghost, PacmanDomain, PacmanLayout, PacmanState, pacman_step
from .twinprime import TwinPrimeDomain, TwinPrimeState, is_prime, is_twin_prime


def default_registry() -> DomainRegistry:
    """A registry holding the four built-in domains."""
    return DomainRegistry([
        CountersDomain(),
        FoCountersDomain(),
        PacmanDomain(),
        TwinPrimeDomain(),
    ])


__all__ = [
    'CountersDomain',
    'CountersState',
    'FoCountersDomain',
    'FoCountersState',
    'Ghost',
    'PacmanDomain',
    'PacmanLayout',
    'PacmanState',
    'TwinPrimeDomain',
    'TwinPrimeState',
    'default_registry',
    'is_prime',
    'is_twin_prime',
    'pacman_step',
]
