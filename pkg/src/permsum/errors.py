"""Exception hierarchy shared by every permsum module."""


class PermsumError(Exception):
    """Base class for all errors raised by permsum."""


class InvalidInputError(PermsumError, ValueError):
    """Malformed or out-of-domain input (bad JSON, size mismatch, n too small)."""


class NoDiversityError(PermsumError, ValueError):
    """The multiset has a single distinct value, so M = 0."""


class CapExceededError(PermsumError):
    """A size cap, iteration budget or memory budget would be exceeded."""
