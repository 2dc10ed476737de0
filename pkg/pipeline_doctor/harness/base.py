"""Base scenario abstraction and registry"""

from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Type

from ..errors import ConfigError
from ..search_space import PipelineInstance, PlannedPipeline


class Scenario(ABC):
    """A planned pipeline paired with a deterministic success oracle.

    The oracle stands in for training: it encodes a known failure cause as a
    predicate over the instance's bindings.
    """

    name: str = ''
    description: str = ''
    # Constraint family the failure cause belongs to.
    tag: str = ''
    # Label of the example pipeline the scenario is modelled on.
    example: str = ''

    @abstractmethod
    def pipeline(self) -> PlannedPipeline:
        """The search space an AutoML run would sample from."""

    @abstractmethod
    def oracle(self, inst: PipelineInstance) -> bool:
        """True when ``inst`` would train successfully."""


class ScenarioRegistry:
    """Registry for managing built-in scenarios"""

    _scenarios: Dict[str, Type[Scenario]] = {}

    @classmethod
    def register(cls, name: str, scenario_class: Type[Scenario]):
        """Register a scenario class"""
        cls._scenarios[name] = scenario_class

    @classmethod
    def get(cls, name: str) -> Optional[Type[Scenario]]:
        """Get a scenario class by name"""
        return cls._scenarios.get(name)

    @classmethod
    def list_available(cls) -> List[str]:
        """List all registered scenario names"""
        return list(cls._scenarios.keys())

    @classmethod
    def create(cls, name: str) -> Scenario:
        scenario_class = cls.get(name)
        if scenario_class is None:
            raise ConfigError(
                f"unknown scenario {name!r}; available: {', '.join(cls.list_available())}")
        return scenario_class()
