from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Validation:
    """Outcome of a structural check: truthy iff no problem was found."""

    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok

    def add(self, problem: str) -> None:
        self.problems.append(problem)

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        shown = "; ".join(self.problems[:5])
        more = f" (+{len(self.problems) - 5} more)" if len(self.problems) > 5 else ""
        return f"invalid: {shown}{more}"
