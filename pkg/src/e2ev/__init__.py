"""End-to-end verifiable election toolkit.

Submodules are imported explicitly; this package init stays empty so that the
standalone verifier (``e2ev.verifier``) can be built from ``e2ev.constants``
alone.
"""

__version__ = "0.1.0"
