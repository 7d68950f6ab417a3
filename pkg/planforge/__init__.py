"""
planforge: classical search over executable planning domains, guided by heuristics
that an LLM writes as code.

Only the core model is imported here; worker processes import this package and must
not pull in the provider SDKs.
"""

from .config import BudgetPolicy, HeuristicMix, Limits
from .errors import PlanForgeError
from .model import TaskModel, load_instance, load_instance_file

__all__ = [
    'BudgetPolicy',
    'HeuristicMix',
    'Limits',
    'PlanForgeError',
    'TaskModel',
    'load_instance',
    'load_instance_file',
]
