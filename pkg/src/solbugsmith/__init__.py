"""solbugsmith: seed Solidity sources with known bugs and score analyzers."""

from __future__ import annotations

__version__ = "0.1.0"
