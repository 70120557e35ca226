"""Runtime settings, read from the environment."""
import os
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 10_000_000
DEFAULT_EXTENDED_BUDGET = 10 ** 9

PACKAGE_FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@dataclass
class Settings:
    """Settings shared by the CLI and the verification suite."""
    fixtures_dir: Path = PACKAGE_FIXTURES
    home_dir: Path = field(default_factory=lambda: Path.home() / ".cartankit")
    node_budget: Optional[int] = DEFAULT_NODE_BUDGET  # None means unbounded
    extended_budget: int = DEFAULT_EXTENDED_BUDGET
    is_snap: bool = False

    @property
    def logs_dir(self) -> Path:
        return self.home_dir / "logs"

    def with_budget(self, budget: Optional[int]) -> 'Settings':
        """Copy of the settings with another node budget."""
        return Settings(
            fixtures_dir=self.fixtures_dir,
            home_dir=self.home_dir,
            node_budget=budget,
            extended_budget=self.extended_budget,
            is_snap=self.is_snap
        )

    def runs_extended(self) -> bool:
        """Whether the budget admits the long enumeration checks."""
        return self.node_budget is None or self.node_budget >= self.extended_budget

    @staticmethod
    def from_env(environ=None) -> 'Settings':
        env = os.environ if environ is None else environ

        fixtures = env.get('CARTANKIT_FIXTURES')
        home = env.get('CARTANKIT_HOME')
        budget = env.get('CARTANKIT_BUDGET')

        settings = Settings(
            fixtures_dir=Path(fixtures) if fixtures else PACKAGE_FIXTURES,
            home_dir=Path(home) if home else Path.home() / ".cartankit",
            node_budget=parse_budget(budget) if budget else DEFAULT_NODE_BUDGET,
            is_snap=env.get('SNAP') is not None
        )
        logger.debug(f"Settings loaded: fixtures={settings.fixtures_dir}, budget={settings.node_budget}")
        return settings


def parse_budget(text: str) -> Optional[int]:
    """Parse a node budget: a positive integer, or 'max' for unbounded."""
    if text.strip().lower() == 'max':
        return None
    value = int(text)
    if value <= 0:
        raise ValueError(f"budget must be positive, got {value}")
    return value
