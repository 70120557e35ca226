"""Run reports: what a command computed, its verdicts, and how it is rendered."""
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..core.exactlin import IntMatrix

logger = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
SKIP = "skip"


def jsonable(value):
    """Convert results to plain JSON values (Fractions become "a/b" strings)."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    if isinstance(value, IntMatrix):
        return value.to_list()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, 'to_dict'):
        return jsonable(value.to_dict())
    if isinstance(value, float):
        raise TypeError("floating point values do not belong in a report")
    return str(value)


@dataclass
class RunReport:
    """The outcome of one command."""
    command: str
    inputs: Dict = field(default_factory=dict)
    results: Dict = field(default_factory=dict)
    verdicts: List[Tuple[str, str]] = field(default_factory=list)
    timing_ms: int = 0
    error: Optional[str] = None

    def add_verdict(self, claim_id: str, outcome):
        """Record a verdict; a bool maps to pass/fail."""
        if isinstance(outcome, bool):
            outcome = PASS if outcome else FAIL
        if outcome not in (PASS, FAIL, SKIP):
            raise ValueError(f"unknown verdict {outcome!r}")
        self.verdicts.append((claim_id, outcome))

    @property
    def passed(self) -> bool:
        return all(outcome != FAIL for _, outcome in self.verdicts)

    def to_dict(self, include_timing: bool = True):
        data = {
            'command': self.command,
            'inputs': jsonable(self.inputs),
            'results': jsonable(self.results),
            'verdicts': [{'claim': claim, 'outcome': outcome} for claim, outcome in self.verdicts]
        }
        if self.error is not None:
            data['error'] = self.error
        if include_timing:
            data['timing_ms'] = self.timing_ms
        return data

    @staticmethod
    def from_dict(data) -> 'RunReport':
        return RunReport(
            command=data['command'],
            inputs=data.get('inputs', {}),
            results=data.get('results', {}),
            verdicts=[(v['claim'], v['outcome']) for v in data.get('verdicts', [])],
            timing_ms=data.get('timing_ms', 0),
            error=data.get('error')
        )

    def render_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=2)

    def render_text(self) -> str:
        lines = [f"cartankit {self.command}"]
        if self.inputs:
            lines.append("inputs:")
            lines.extend(_text_block(jsonable(self.inputs), 1))
        if self.results:
            lines.append("results:")
            lines.extend(_text_block(jsonable(self.results), 1))
        if self.verdicts:
            lines.append("verdicts:")
            width = max(len(claim) for claim, _ in self.verdicts)
            for claim, outcome in self.verdicts:
                lines.append(f"  {claim.ljust(width)}  {outcome.upper()}")
        if self.error is not None:
            lines.append(f"error: {self.error}")
        lines.append(f"time: {self.timing_ms} ms")
        return "\n".join(lines)

    def export_pdf(self, filepath: str):
        """Export the text rendering to a PDF file."""
        from reportlab.pdfgen import canvas
        from reportlab.lib.pagesizes import A4

        margin = 40
        leading = 11
        pdf = canvas.Canvas(filepath, pagesize=A4)
        pdf.setTitle(f"cartankit {self.command}")
        y = A4[1] - margin
        pdf.setFont("Courier", 9)
        for line in self.render_text().splitlines():
            if y < margin:
                pdf.showPage()
                pdf.setFont("Courier", 9)
                y = A4[1] - margin
            # Standard Type 1 fonts only cover Latin-1
            pdf.drawString(margin, y, line.encode('latin-1', 'replace').decode('latin-1'))
            y -= leading
        pdf.save()
        logger.info(f"Exported report to PDF: {filepath}")


def _is_matrix(value) -> bool:
    return (isinstance(value, list) and bool(value)
            and all(isinstance(row, list) and all(isinstance(x, (int, str)) for x in row) for row in value))


def _text_block(value, depth: int) -> List[str]:
    pad = "  " * depth
    if isinstance(value, dict):
        lines = []
        for key in sorted(value):
            item = value[key]
            if isinstance(item, (dict, list)) and item and not _is_flat(item):
                lines.append(f"{pad}{key}:")
                lines.extend(_text_block(item, depth + 1))
            else:
                lines.append(f"{pad}{key}: {_inline(item)}")
        return lines
    if _is_matrix(value):
        width = max(len(str(x)) for row in value for x in row)
        return [pad + " ".join(str(x).rjust(width) for x in row) for row in value]
    if isinstance(value, list):
        lines = []
        for item in value:
            if isinstance(item, (dict, list)) and item and not _is_flat(item):
                lines.append(f"{pad}-")
                lines.extend(_text_block(item, depth + 1))
            else:
                lines.append(f"{pad}- {_inline(item)}")
        return lines
    return [f"{pad}{_inline(value)}"]


def _is_flat(value) -> bool:
    return isinstance(value, list) and all(not isinstance(x, (list, dict)) for x in value)


def _inline(value) -> str:
    if isinstance(value, list):
        return "[" + ", ".join(_inline(x) for x in value) + "]"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if value is None:
        return "-"
    return str(value)
