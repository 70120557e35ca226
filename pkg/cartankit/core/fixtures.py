"""Fixture library: the printed matrices and block scenarios shipped as JSON."""
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

from .errors import FixtureError, ValidationError
from .exactlin import IntMatrix, as_int, parse_rational
from .qform import GramForm
from .blockcalc import BlockScenario

logger = logging.getLogger(__name__)


def read_json(path) -> object:
    """Read a JSON file, reporting syntax errors with their location."""
    path = Path(path)
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except FileNotFoundError:
        raise FixtureError(f"{path} not found") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None


class FixtureLibrary:
    """Named fixtures indexed by index.json in the fixture directory."""

    def __init__(self, fixtures_path: Optional[str] = None):
        """Initialize the library.

        Args:
            fixtures_path: Directory holding index.json. If None, uses the
                fixtures shipped with the package.
        """
        if fixtures_path is None:
            from .config import PACKAGE_FIXTURES
            fixtures_path = str(PACKAGE_FIXTURES)

        self.fixtures_path = Path(fixtures_path)
        self.index_file = self.fixtures_path / "index.json"
        self.entries: Dict[str, Dict] = {}
        self.load_index()

    def load_index(self):
        """Load the fixture index from disk."""
        if not self.index_file.exists():
            logger.warning(f"No fixture index in {self.fixtures_path}")
            self.entries = {}
            return
        data = read_json(self.index_file)
        if not isinstance(data, dict) or not isinstance(data.get('fixtures', {}), dict):
            raise FixtureError(f"{self.index_file} is not a fixture index")
        self.entries = data.get('fixtures', {})
        logger.info(f"Loaded fixture index with {len(self.entries)} entries")

    def names(self, kind: Optional[str] = None) -> List[str]:
        return sorted(name for name, entry in self.entries.items()
                      if kind is None or entry.get('kind') == kind)

    def path_for(self, name: str) -> Path:
        """Resolve a fixture name, or a path to a JSON file, to a file path."""
        if name in self.entries:
            return self.fixtures_path / self.entries[name]['file']
        candidate = Path(name)
        if candidate.suffix == '.json':
            if candidate.exists():
                return candidate
            if (self.fixtures_path / candidate.name).exists():
                return self.fixtures_path / candidate.name
        raise FixtureError(f"unknown fixture '{name}'")

    def load(self, name: str) -> Dict:
        data = read_json(self.path_for(name))
        if not isinstance(data, dict):
            raise FixtureError(f"fixture '{name}' is not a JSON object")
        return data

    def load_matrix(self, name: str) -> IntMatrix:
        """An integer matrix fixture, with its optional integer scale applied."""
        data = self.load(name)
        if 'matrix' not in data:
            raise FixtureError(f"fixture '{name}' has no matrix")
        matrix = IntMatrix.from_list(data['matrix'])
        return matrix.scale(as_int(data.get('scale', 1)))

    def load_form(self, name: str) -> GramForm:
        """A form fixture; the scale may be rational (e.g. 1/2)."""
        data = self.load(name)
        if 'matrix' not in data:
            raise FixtureError(f"fixture '{name}' has no matrix")
        return GramForm.from_list(data['matrix']).scale(parse_rational(data.get('scale', 1)))

    def load_scenario(self, name: str) -> BlockScenario:
        return BlockScenario.from_dict(self.load(name))
