"""Tiny result type for validation routines that report witnesses.

Validators in this package return a CheckResult rather than a bare bool, so
callers (and the command line) can surface *where* a property failed, not
just that it failed.
"""

from __future__ import annotations


class CheckResult:
    """Outcome of a structural check.

    ok       -- True when the property holds
    reason   -- short machine-friendly tag ("euler-sum", "not-graded", ...)
    witness  -- offending data (an interval pair, an element, ...) or None
    detail   -- optional human-readable elaboration
    """

    __slots__ = ("ok", "reason", "witness", "detail")

    def __init__(self, ok, reason="", witness=None, detail=""):
        self.ok = bool(ok)
        self.reason = reason
        self.witness = witness
        self.detail = detail

    def __bool__(self):
        return self.ok

    @classmethod
    def passed(cls):
        return cls(True)

    @classmethod
    def failed(cls, reason, witness=None, detail=""):
        return cls(False, reason, witness, detail)

    def __repr__(self):
        if self.ok:
            return "CheckResult(ok)"
        extra = f", witness={self.witness!r}" if self.witness is not None else ""
        return f"CheckResult(fail: {self.reason}{extra})"

    def describe(self):
        if self.ok:
            return "ok"
        parts = [self.reason or "failed"]
        if self.witness is not None:
            parts.append(f"witness={self.witness}")
        if self.detail:
            parts.append(self.detail)
        return "; ".join(parts)
