"""Exception types shared by the lpvol modules."""


class DomainError(ValueError):
    """An argument lies outside the region where the quantity is defined."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed to reach its requested accuracy."""


class BracketError(RuntimeError):
    """A root-finding bracket does not enclose a sign change."""
