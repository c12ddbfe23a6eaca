"""solclone: comment-guided detection of semantic (Type-4) clones of Solidity functions.

Pipeline stages: ingest -> extract -> embed -> pairs -> sample -> review -> llm scan -> report.
Each stage is a module with a library API; `solclone.cli` wires them into subcommands.
"""

__version__ = "0.1.0"
