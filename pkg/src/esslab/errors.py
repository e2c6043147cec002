"""Exception hierarchy. Every error raised by the library derives from EsslabError."""


class EsslabError(Exception):
    pass


class KindMismatchError(EsslabError):
    """Line and circle objects mixed in one operation."""


class EmptySetError(EsslabError):
    """Operation needs a nonempty spectral set or cloud."""


class UnboundedSetError(EsslabError):
    """Distance requested on a set carrying a +/-inf flag."""


class FamilyMismatchError(EsslabError):
    """Jacobi operation fed a CMV scenario or vice versa."""


class IndexError_(EsslabError):
    """Stream index below the origin."""


class ScenarioError(EsslabError):
    """Malformed or unsupported scenario description."""


class UnsupportedClassError(ScenarioError):
    """Scenario class has no structural right-limit route."""


class DomainError(EsslabError):
    """Parameter outside its admissible domain (e.g. |alpha| > 1)."""


class WindowError(EsslabError):
    """Window too small, missing margin, or support touching an edge."""


class SupportError(WindowError):
    """Trial vector support violates the required margin."""


class ResolutionError(EsslabError):
    """Scan/bisection grid exhausted without resolving the root structure."""


class ConvergenceError(EsslabError):
    """Iterative estimate failed to reach its tolerance."""

    def __init__(self, msg, history=None):
        super().__init__(msg)
        self.history = list(history) if history is not None else []


class StructureError(EsslabError):
    """Computed object violates a structural guarantee (e.g. nonunimodular root)."""


class RegistryError(EsslabError):
    """Unknown theorem tag."""

    def __init__(self, tag, known):
        super().__init__(f"unknown theorem tag {tag!r}; known tags: {', '.join(sorted(known))}")
        self.known = sorted(known)
