"""Allow ``python -m triplekit``."""

from .cli import main

main()
