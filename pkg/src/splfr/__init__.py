"""Cache-aided secure and private linear function retrieval over shared links.

Subpackages:

- field: exact GF(q) arithmetic (prime q and binary extensions)
- pda: placement delivery arrays, construction, validation, bounds
- engine: key-superposition placement, delivery, decoding
- audit: exact information-theoretic verification on small instances
- tradeoff: rational memory-load curves, converse bounds, gap checks
- cli: command-line entry point
"""

__version__ = "0.1.0"
